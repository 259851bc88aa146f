use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Corpus, SourceKind};
use crate::error::{Error, Result};

/// Largest-remainder apportionment of `n` items over `ratios`; ties go to the
/// earlier split.
fn apportion(n: usize, ratios: &[f64; 3]) -> [usize; 3] {
    let quotas: Vec<f64> = ratios
        .iter()
        // Round away float noise such as 0.6 * 5 = 3.0000000000000004.
        .map(|r| (r * n as f64 * 1e9).round() / 1e9)
        .collect();
    let mut sizes = [0usize; 3];
    for (s, q) in sizes.iter_mut().zip(&quotas) {
        *s = q.floor() as usize;
    }
    let mut remaining = n - sizes.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..3).filter(|&i| ratios[i] > 0.0).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        sizes[i] += 1;
        remaining -= 1;
    }
    sizes
}

/// Splits a corpus into (train, dev, test), stratified by source kind.
///
/// Each stratum is shuffled with a seeded ChaCha8 stream and apportioned by
/// largest remainder, so the structured/unstructured proportion is preserved
/// in every split up to rounding. Documents keep their original corpus order
/// within each split.
pub fn stratified_split(
    corpus: &Corpus,
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<(Corpus, Corpus, Corpus)> {
    let ratios = [ratios.0, ratios.1, ratios.2];
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::InvalidArgument(format!("bad split ratios {ratios:?}")));
    }
    if (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "split ratios {ratios:?} do not sum to 1"
        )));
    }
    let n_splits = ratios.iter().filter(|&&r| r > 0.0).count();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; corpus.documents.len()];
    for kind in [SourceKind::Structured, SourceKind::Unstructured] {
        let mut members: Vec<usize> = corpus
            .documents
            .iter()
            .enumerate()
            .filter(|(_, d)| d.source_kind == kind)
            .map(|(i, _)| i)
            .collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < n_splits {
            return Err(Error::StratumTooSmall {
                stratum: kind.as_str().to_string(),
                size: members.len(),
                splits: n_splits,
            });
        }
        members.shuffle(&mut rng);
        let sizes = apportion(members.len(), &ratios);
        let mut offset = 0;
        for (split, &size) in sizes.iter().enumerate() {
            for &doc in &members[offset..offset + size] {
                assignment[doc] = split;
            }
            offset += size;
        }
    }

    let mut parts: [Vec<_>; 3] = Default::default();
    for (doc, &split) in corpus.documents.iter().zip(&assignment) {
        parts[split].push(doc.clone());
    }
    let [train, dev, test] = parts;
    Ok((
        Corpus::new(corpus.label_set.clone(), train)?,
        Corpus::new(corpus.label_set.clone(), dev)?,
        Corpus::new(corpus.label_set.clone(), test)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, LabelSet, LabelVector};

    fn corpus(structured: usize, unstructured: usize) -> Corpus {
        let docs = (0..structured + unstructured)
            .map(|i| {
                let kind = if i < structured {
                    SourceKind::Structured
                } else {
                    SourceKind::Unstructured
                };
                Document::new(
                    format!("d{i:03}"),
                    kind,
                    vec![("text".to_string(), LabelVector::one_hot(6, 0))],
                )
            })
            .collect();
        Corpus::new(LabelSet::rhetorical(), docs).unwrap()
    }

    #[test]
    fn apportion_is_exact() {
        assert_eq!(apportion(100, &[0.6, 0.2, 0.2]), [60, 20, 20]);
        assert_eq!(apportion(5, &[0.6, 0.2, 0.2]), [3, 1, 1]);
        assert_eq!(apportion(7, &[0.6, 0.2, 0.2]), [4, 2, 1]);
        assert_eq!(apportion(3, &[1.0, 0.0, 0.0]), [3, 0, 0]);
    }

    #[test]
    fn dataset_sized_split() {
        let c = corpus(100, 700);
        let (tr, dv, te) = stratified_split(&c, (0.6, 0.2, 0.2), 1).unwrap();
        assert_eq!(
            (tr.documents.len(), dv.documents.len(), te.documents.len()),
            (480, 160, 160)
        );
    }

    #[test]
    fn identity_split() {
        let c = corpus(2, 5);
        let (tr, dv, te) = stratified_split(&c, (1.0, 0.0, 0.0), 3).unwrap();
        assert_eq!(tr, c);
        assert!(dv.is_empty() && te.is_empty());
    }

    #[test]
    fn small_stratum_is_rejected() {
        let c = corpus(2, 10);
        assert!(matches!(
            stratified_split(&c, (0.6, 0.2, 0.2), 0),
            Err(Error::StratumTooSmall { size: 2, .. })
        ));
    }

    #[test]
    fn bad_ratios_are_rejected() {
        let c = corpus(3, 3);
        assert!(stratified_split(&c, (0.5, 0.2, 0.2), 0).is_err());
        assert!(stratified_split(&c, (1.2, -0.2, 0.0), 0).is_err());
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let c = corpus(10, 30);
        let a = stratified_split(&c, (0.6, 0.2, 0.2), 11).unwrap();
        let b = stratified_split(&c, (0.6, 0.2, 0.2), 11).unwrap();
        assert_eq!(a, b);
    }
}
