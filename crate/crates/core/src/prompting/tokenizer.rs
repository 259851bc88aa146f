/// Token counting as needed for prompt budgeting.
pub trait TokenCounter: Send + Sync {
    fn count(&self, text: &str) -> usize;

    /// Longest prefix of `text` that fits in `max_tokens`.
    fn truncate(&self, text: &str, max_tokens: usize) -> String;
}

/// Whitespace-delimited tokens; the reference counter for prompt tests.
#[derive(Clone, Copy, Debug, Default)]
pub struct WhitespaceTokenizer;

impl TokenCounter for WhitespaceTokenizer {
    fn count(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }

    fn truncate(&self, text: &str, max_tokens: usize) -> String {
        text.split_whitespace()
            .take(max_tokens)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whitespace_counts_and_truncates() {
        let t = WhitespaceTokenizer;
        assert_eq!(t.count("a  b\nc "), 3);
        assert_eq!(t.truncate("a b c d", 2), "a b");
        assert_eq!(t.count(&t.truncate("a b c d", 9)), 4);
    }
}
