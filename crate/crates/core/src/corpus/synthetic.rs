//! Deterministic synthetic abstracts built from label-specific sentence
//! templates. Used for desk-scale training runs and as the shipped sample.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Corpus, Document, LabelSet, LabelVector, SourceKind};

const CONDITIONS: &[&str] = &[
    "asthma", "diabetes", "migraine", "sepsis", "obesity", "anemia", "gout", "acne",
];
const TREATMENTS: &[&str] = &[
    "metformin", "aspirin", "yoga", "insulin", "zinc", "statins", "probiotics", "tai chi",
];

const BACKGROUND: &[&str] = &[
    "{c} is a common chronic disease.",
    "The burden of {c} keeps rising.",
    "Little is known about {c} in youth.",
];
const OBJECTIVE: &[&str] = &[
    "We aimed to test {t} for {c}.",
    "This study sought to assess {t}.",
    "Our goal was to evaluate {t} in {c}.",
];
const METHODS: &[&str] = &[
    "We randomized {n} adults to {t} or placebo.",
    "Patients were followed for {k} weeks.",
    "Data came from {n} clinics via a survey.",
];
const RESULTS: &[&str] = &[
    "Symptoms fell by {k} percent with {t}.",
    "Relapse was lower with {t} (p = 0.0{d}).",
    "Adverse events were rare in both arms.",
];
const CONCLUSIONS: &[&str] = &[
    "Thus {t} appears safe for {c}.",
    "In conclusion, {t} should be offered.",
    "These findings support wider use of {t}.",
];
const OTHER: &[&str] = &["Trial registration: NCT0{n}{d}.", "Funded by a national grant."];
const OBJECTIVE_METHODS: &[&str] = &["To test {t}, we enrolled {n} adults with {c}."];
const RESULTS_CONCLUSIONS: &[&str] = &["{t} cut relapse by {k} percent, so it works."];

#[derive(Clone, Debug)]
pub struct SyntheticConfig {
    pub n_docs: usize,
    pub seed: u64,
    /// Every `structured_every`-th document is structured (8 gives 12.5%).
    pub structured_every: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_docs: 200,
            seed: 42,
            structured_every: 8,
        }
    }
}

fn fill(template: &str, rng: &mut ChaCha8Rng, condition: &str, treatment: &str) -> String {
    let mut s = template
        .replace("{c}", condition)
        .replace("{t}", treatment)
        .replace("{n}", &rng.random_range(20..400).to_string())
        .replace("{k}", &rng.random_range(4..52).to_string())
        .replace("{d}", &rng.random_range(1..9).to_string());
    if let Some(first) = s.get(0..1) {
        let upper = first.to_uppercase();
        s.replace_range(0..1, &upper);
    }
    s
}

/// Generates `n_docs` abstracts over the six rhetorical labels.
///
/// Unstructured abstracts follow the usual rhetorical order with optional
/// background and registration sentences and occasional merged
/// objective+methods or results+conclusions sentences (multi-label).
/// Structured abstracts always carry the five main sections, one sentence each.
pub fn generate(config: &SyntheticConfig) -> Corpus {
    let labels = LabelSet::rhetorical();
    let m = labels.len();
    let [bg, obj, met, res, con, oth] = [0, 1, 2, 3, 4, 5];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut documents = Vec::with_capacity(config.n_docs);

    for i in 0..config.n_docs {
        let condition = *CONDITIONS.choose(&mut rng).unwrap();
        let treatment = *TREATMENTS.choose(&mut rng).unwrap();
        let structured = config.structured_every > 0 && i % config.structured_every == 0;
        let mut plan: Vec<(&[&str], Vec<usize>)> = Vec::new();
        if structured {
            plan.push((BACKGROUND, vec![bg]));
            plan.push((OBJECTIVE, vec![obj]));
            plan.push((METHODS, vec![met]));
            plan.push((RESULTS, vec![res]));
            plan.push((CONCLUSIONS, vec![con]));
        } else {
            if rng.random_bool(0.5) {
                plan.push((BACKGROUND, vec![bg]));
            }
            if rng.random_bool(0.15) {
                plan.push((OBJECTIVE_METHODS, vec![obj, met]));
            } else {
                plan.push((OBJECTIVE, vec![obj]));
                plan.push((METHODS, vec![met]));
            }
            if rng.random_bool(0.15) {
                plan.push((RESULTS_CONCLUSIONS, vec![res, con]));
            } else {
                plan.push((RESULTS, vec![res]));
                plan.push((CONCLUSIONS, vec![con]));
            }
            if rng.random_bool(0.08) {
                plan.push((OTHER, vec![oth]));
            }
        }
        let sentences = plan
            .into_iter()
            .map(|(templates, gold)| {
                let template = templates.choose(&mut rng).unwrap();
                (
                    fill(template, &mut rng, condition, treatment),
                    LabelVector::from_indices(m, &gold),
                )
            })
            .collect::<Vec<_>>();
        let kind = if structured {
            SourceKind::Structured
        } else {
            SourceKind::Unstructured
        };
        documents.push(Document::new(format!("syn-{i:04}"), kind, sentences));
    }
    Corpus::new(labels, documents).expect("generator emits valid documents")
}
