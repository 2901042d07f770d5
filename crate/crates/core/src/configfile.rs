//! Line-oriented `[SECTION]` files shared by the taxonomy and hierarchy
//! configs. A header may carry content on the same line (`[VARIANT] WTAH`).

/// A non-empty content line tagged with its section and 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ConfigLine<'a> {
    pub section: &'a str,
    pub line: usize,
    pub text: &'a str,
}

/// Splits `text` into content lines. Lines starting with `#` are comments.
/// Content before the first header is reported with an empty section name.
pub(crate) fn lines(text: &str) -> Vec<ConfigLine<'_>> {
    let mut section = "";
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut rest = line;
        if let Some(stripped) = line.strip_prefix('[') {
            if let Some(end) = stripped.find(']') {
                section = &stripped[..end];
                rest = stripped[end + 1..].trim();
                if rest.is_empty() {
                    continue;
                }
            }
        }
        out.push(ConfigLine {
            section,
            line: idx + 1,
            text: rest,
        });
    }
    out
}

/// Splits a comma-separated list, trimming entries and dropping empty ones.
pub(crate) fn list(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}
