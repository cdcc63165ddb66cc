/// Lowercase, split on whitespace, and trim leading/trailing punctuation.
/// Curly apostrophes are folded to `'` so `don’t` and `don't` agree.
/// Tokens that are pure punctuation disappear.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let folded: String = raw
                .chars()
                .map(|c| if c == '\u{2019}' || c == '\u{2018}' { '\'' } else { c })
                .flat_map(char::to_lowercase)
                .collect();
            let trimmed = folded.trim_matches(|c: char| !c.is_alphanumeric());
            (!trimmed.is_empty()).then(|| trimmed.to_string())
        })
        .collect()
}

/// Whitespace-token count, before any punctuation trimming.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_edge_punctuation_only() {
        assert_eq!(tokenize("Don't tell anyone, this!"), ["don't", "tell", "anyone", "this"]);
        assert_eq!(tokenize("  \"Hello\"  -- world... "), ["hello", "world"]);
        assert_eq!(tokenize("e-mail"), ["e-mail"]);
    }

    #[test]
    fn folds_curly_apostrophes() {
        assert_eq!(tokenize("Don\u{2019}t"), ["don't"]);
    }

    #[test]
    fn empty_and_punctuation_only() {
        assert!(tokenize("").is_empty());
        assert!(tokenize(" ... !! ").is_empty());
        assert_eq!(word_count(" ... !! "), 2);
    }
}
