use super::Tokenizer;
use crate::prompting::TokenCounter;

pub const BOS: u32 = 256;
pub const EOS: u32 = 257;

/// UTF-8 bytes as tokens, plus BOS and EOS. Encoding prepends BOS.
#[derive(Clone, Copy, Debug, Default)]
pub struct ByteTokenizer;

impl TokenCounter for ByteTokenizer {
    fn count(&self, text: &str) -> usize {
        text.len() + 1
    }

    fn truncate(&self, text: &str, max_tokens: usize) -> String {
        let mut end = max_tokens.saturating_sub(1).min(text.len());
        while !text.is_char_boundary(end) {
            end -= 1;
        }
        text[..end].to_string()
    }
}

impl Tokenizer for ByteTokenizer {
    fn vocab_size(&self) -> usize {
        258
    }

    fn encode(&self, text: &str) -> Vec<u32> {
        std::iter::once(BOS)
            .chain(text.bytes().map(u32::from))
            .collect()
    }

    fn decode(&self, ids: &[u32]) -> String {
        let bytes: Vec<u8> = ids
            .iter()
            .filter(|&&id| id < 256)
            .map(|&id| id as u8)
            .collect();
        String::from_utf8_lossy(&bytes).into_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_label_names() {
        let t = ByteTokenizer;
        let ids = t.encode("plays a role as <METHODS>");
        assert_eq!(ids[0], BOS);
        assert_eq!(ids.len(), t.count("plays a role as <METHODS>"));
        assert_eq!(t.decode(&ids), "plays a role as <METHODS>");
        assert_eq!(t.decode(&[b'a' as u32, EOS, b'b' as u32]), "ab");
    }

    #[test]
    fn truncation_respects_char_boundaries() {
        let t = ByteTokenizer;
        assert_eq!(t.truncate("héllo", 3), "h");
        assert_eq!(t.truncate("abc", 10), "abc");
        assert!(t.count(&t.truncate("abcdef", 4)) <= 4);
    }
}
