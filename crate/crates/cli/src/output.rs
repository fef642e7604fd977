//! Byte-stable rendering helpers.

use serde::Serialize;

/// Pretty JSON with object keys sorted, newline-terminated.
pub fn json<T: Serialize>(value: &T) -> String {
    // serde_json's Value map is ordered by key
    let v = serde_json::to_value(value).expect("documents serialize");
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

/// CSV with a header row; cells are written with `Display`.
pub fn csv<R: IntoIterator<Item = Vec<String>>>(header: &[&str], rows: R) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}
