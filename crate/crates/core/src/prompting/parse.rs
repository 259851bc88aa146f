use std::fmt;

use crate::corpus::{LabelMode, LabelSet, LabelVector};

/// No label name could be found in the generated text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseFailure {
    pub generated: String,
}

impl fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "no label found in {:?}", self.generated)
    }
}

impl std::error::Error for ParseFailure {}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Maps generated text back to labels.
///
/// Only the text before the first `<End>` marker is searched. Label names
/// match case-insensitively as whole words, so `OTHER` does not fire inside
/// "another". In single mode the earliest match wins (the longer name when two
/// start at the same offset); in multi mode every matched label is set.
pub fn parse_generated_label(
    generated: &str,
    labels: &LabelSet,
    mode: LabelMode,
) -> Result<LabelVector, ParseFailure> {
    let haystack = generated.to_ascii_lowercase();
    let haystack = match haystack.find("<end>") {
        Some(end) => &haystack[..end],
        None => &haystack[..],
    };
    let bytes = haystack.as_bytes();

    // (start offset, name length, label index) of each label's first match.
    let mut hits: Vec<(usize, usize, usize)> = Vec::new();
    for (c, name) in labels.names().iter().enumerate() {
        let needle = name.to_ascii_lowercase();
        let mut from = 0;
        while let Some(pos) = haystack[from..].find(&needle) {
            let start = from + pos;
            let end = start + needle.len();
            let left_ok = start == 0 || !is_word_byte(bytes[start - 1]);
            let right_ok = end == bytes.len() || !is_word_byte(bytes[end]);
            if left_ok && right_ok {
                hits.push((start, needle.len(), c));
                break;
            }
            from = start + 1;
        }
    }
    if hits.is_empty() {
        return Err(ParseFailure {
            generated: generated.to_string(),
        });
    }

    let m = labels.len();
    match mode {
        LabelMode::Single => {
            hits.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
            Ok(LabelVector::one_hot(m, hits[0].2))
        }
        LabelMode::Multi => {
            let indices: Vec<usize> = hits.iter().map(|h| h.2).collect();
            Ok(LabelVector::from_indices(m, &indices))
        }
    }
}
