/// Fraction of trailing lines in which a signature delimiter starts a footer.
const FOOTER_WINDOW: (usize, usize) = (3, 10);

fn is_blank(line: &str) -> bool {
    line.trim().is_empty()
}

fn is_quote(line: &str) -> bool {
    let t = line.trim();
    t.starts_with('>') || t.ends_with("writes:") || t.ends_with("wrote:")
}

fn is_signature_delimiter(line: &str) -> bool {
    matches!(line.trim(), "--" | "---")
}

/// Index of the footer start, if a delimiter lies within the last 30% of `lines`.
fn footer_start(lines: &[&str]) -> Option<usize> {
    let n = lines.len();
    let (num, den) = FOOTER_WINDOW;
    lines.iter().enumerate().find(|&(p, l)| den * (n - p) <= num * n && is_signature_delimiter(l)).map(|(p, _)| p)
}

/// Strips the header, quoted lines, blank lines and a trailing signature block.
///
/// * Header: everything up to and including the first blank line, when one exists.
/// * Quotes: lines whose first non-space character is `>`, and attribution
///   lines ending in `writes:` or `wrote:`.
/// * Footer: from the first `--` / `---` line that falls in the last 30% of the
///   remaining lines to the end, repeated until no delimiter qualifies.
///
/// The result has no blank lines, so applying the function twice is a no-op.
pub fn preprocess_document(raw: &str) -> String {
    let all: Vec<&str> = raw.lines().collect();
    let body = match all.iter().position(|l| is_blank(l)) {
        Some(p) => &all[p + 1..],
        None => &all[..],
    };
    let mut lines: Vec<&str> = body.iter().copied().filter(|l| !is_blank(l) && !is_quote(l)).collect();
    while let Some(p) = footer_start(&lines) {
        lines.truncate(p);
    }
    lines.join("\n")
}

/// Lowercased maximal alphanumeric runs of at least two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| t.chars().nth(1).is_some()).map(str::to_lowercase).collect()
}
