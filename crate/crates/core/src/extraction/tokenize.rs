//! Identifier splitting for function-name tokens.

/// Function words dropped after splitting. Part of the index format: an index
/// records the list it was built with.
pub const STOPWORDS: [&str; 12] =
    ["a", "an", "the", "of", "to", "in", "on", "for", "and", "or", "at", "by"];

/// Splits an identifier into lowercase word tokens.
///
/// Boundaries are any non-letter character (`_`, `$`, digits, ...), a
/// lower-to-upper case change, and the last capital of an acronym run that is
/// followed by a lowercase letter (`XMLHttp` splits as `XML`, `Http`).
///
/// ```
/// use name_loom::tokenize_name;
/// assert_eq!(tokenize_name("getClipboardContent"), ["get", "clipboard", "content"]);
/// assert_eq!(tokenize_name("parse_JSON2Tree"), ["parse", "json", "tree"]);
/// ```
pub fn tokenize_name(name: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in name.split(|c: char| !c.is_alphabetic()) {
        split_case(word, &mut tokens);
    }
    tokens.retain(|t| !STOPWORDS.contains(&t.as_str()));
    tokens
}

fn split_case(word: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = word.chars().collect();
    let mut start = 0;
    for i in 1..chars.len() {
        let (prev, cur) = (chars[i - 1], chars[i]);
        let next_lower = chars.get(i + 1).is_some_and(|c| c.is_lowercase());
        let boundary = (prev.is_lowercase() && cur.is_uppercase())
            || (prev.is_uppercase() && cur.is_uppercase() && next_lower);
        if boundary {
            out.push(chars[start..i].iter().collect::<String>().to_lowercase());
            start = i;
        }
    }
    if start < chars.len() {
        out.push(chars[start..].iter().collect::<String>().to_lowercase());
    }
}
