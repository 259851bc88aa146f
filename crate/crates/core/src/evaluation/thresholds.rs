use serde::{Deserialize, Serialize};

use crate::corpus::{LabelMode, LabelVector};
use crate::error::{Error, Result};

use super::metrics::Confusion;

/// Inclusive threshold grid `start, start + step, ..., stop`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for ThresholdGrid {
    fn default() -> Self {
        Self {
            start: 0.05,
            stop: 0.95,
            step: 0.05,
        }
    }
}

impl ThresholdGrid {
    /// Grid points, built from integer steps and rounded to 12 decimals so
    /// that 0.1 + 0.2 style drift never adds or drops a point.
    pub fn values(&self) -> Result<Vec<f64>> {
        let ok = self.start.is_finite()
            && self.stop.is_finite()
            && self.step.is_finite()
            && self.step > 0.0
            && self.start <= self.stop
            && self.start >= 0.0
            && self.stop <= 1.0;
        if !ok {
            return Err(Error::InvalidArgument(format!("degenerate threshold grid {self:?}")));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n)
            .map(|i| ((self.start + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdProfile {
    pub thresholds: Vec<f64>,
    pub grid: Option<ThresholdGrid>,
    /// Split the thresholds were tuned on.
    pub source: String,
    /// Labels absent from the tuning gold, left at the 0.5 default.
    pub flagged: Vec<usize>,
}

impl ThresholdProfile {
    /// The same threshold for every label.
    pub fn fixed(m: usize, tau: f64) -> Self {
        Self {
            thresholds: vec![tau; m],
            grid: None,
            source: format!("fixed:{tau}"),
            flagged: Vec::new(),
        }
    }
}

/// Default threshold for labels with no positive in the tuning gold.
pub const ABSENT_LABEL_THRESHOLD: f64 = 0.5;

/// Per label, the smallest grid value maximizing that label's binary F1.
pub fn tune_thresholds(probs: &[Vec<f64>], gold: &[LabelVector], grid: ThresholdGrid, source: &str) -> Result<ThresholdProfile> {
    if probs.is_empty() {
        return Err(Error::InvalidArgument("empty validation set".into()));
    }
    if probs.len() != gold.len() {
        return Err(Error::Shape(format!("{} probability vectors for {} gold vectors", probs.len(), gold.len())));
    }
    let m = gold[0].len();
    if probs.iter().any(|p| p.len() != m) || gold.iter().any(|g| g.len() != m) {
        return Err(Error::Shape("inconsistent label count".into()));
    }
    let values = grid.values()?;
    let mut thresholds = Vec::with_capacity(m);
    let mut flagged = Vec::new();
    for c in 0..m {
        if !gold.iter().any(|g| g.get(c)) {
            thresholds.push(ABSENT_LABEL_THRESHOLD);
            flagged.push(c);
            continue;
        }
        let mut best = (f64::NEG_INFINITY, values[0]);
        for &tau in &values {
            let mut k = Confusion::default();
            for (p, g) in probs.iter().zip(gold) {
                match (p[c] >= tau, g.get(c)) {
                    (true, true) => k.tp += 1,
                    (true, false) => k.fp += 1,
                    (false, true) => k.fn_ += 1,
                    (false, false) => {}
                }
            }
            let f1 = k.f1();
            if f1 > best.0 {
                best = (f1, tau);
            }
        }
        thresholds.push(best.1);
    }
    Ok(ThresholdProfile {
        thresholds,
        grid: Some(grid),
        source: source.to_string(),
        flagged,
    })
}

fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// Thresholded multi-label decisions with an argmax fallback for empty rows,
/// or one-hot argmax in single mode.
pub fn decode_predictions(probs: &[Vec<f64>], profile: &ThresholdProfile, mode: LabelMode) -> Result<Vec<LabelVector>> {
    let m = profile.thresholds.len();
    probs
        .iter()
        .map(|p| {
            if p.len() != m {
                return Err(Error::Shape(format!("{} probabilities for {m} thresholds", p.len())));
            }
            Ok(match mode {
                LabelMode::Single => LabelVector::one_hot(m, argmax(p)),
                LabelMode::Multi => {
                    let mut v = LabelVector::from_bits(p.iter().zip(&profile.thresholds).map(|(p, t)| p >= t).collect());
                    if !v.any() {
                        v.set(argmax(p), true);
                    }
                    v
                }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points() {
        let v = ThresholdGrid::default().values().unwrap();
        assert_eq!(v.len(), 19);
        assert_eq!(v[0], 0.05);
        assert_eq!(v[18], 0.95);
        assert_eq!(v[5], 0.3);
        assert!(ThresholdGrid { start: 0.5, stop: 0.1, step: 0.1 }.values().is_err());
        assert!(ThresholdGrid { start: 0.1, stop: 0.5, step: 0.0 }.values().is_err());
    }

    #[test]
    fn smallest_plateau_value() {
        let probs = vec![vec![0.9], vec![0.8], vec![0.1]];
        let gold = vec![LabelVector::one_hot(1, 0), LabelVector::one_hot(1, 0), LabelVector::zeros(1)];
        let grid = ThresholdGrid { start: 0.1, stop: 0.9, step: 0.1 };
        let p = tune_thresholds(&probs, &gold, grid, "dev").unwrap();
        assert_eq!(p.thresholds, vec![0.2]);
    }

    #[test]
    fn separable_case_picks_first_grid_point() {
        let probs = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let gold = vec![LabelVector::one_hot(2, 0), LabelVector::one_hot(2, 1)];
        let p = tune_thresholds(&probs, &gold, ThresholdGrid::default(), "dev").unwrap();
        assert_eq!(p.thresholds, vec![0.05, 0.05]);
    }

    #[test]
    fn absent_label_is_flagged() {
        let probs = vec![vec![0.7, 0.2]];
        let gold = vec![LabelVector::one_hot(2, 0)];
        let p = tune_thresholds(&probs, &gold, ThresholdGrid::default(), "dev").unwrap();
        assert_eq!(p.thresholds[1], 0.5);
        assert_eq!(p.flagged, vec![1]);
    }

    #[test]
    fn decoding_rules() {
        let prof = ThresholdProfile::fixed(2, 0.5);
        let d = decode_predictions(&[vec![0.9, 0.1], vec![0.3, 0.2]], &prof, LabelMode::Multi).unwrap();
        assert_eq!(d[0], LabelVector::one_hot(2, 0));
        assert_eq!(d[1], LabelVector::one_hot(2, 0));
        let prof = ThresholdProfile::fixed(3, 0.4);
        let d = decode_predictions(&[vec![0.4, 0.35, 0.25]], &prof, LabelMode::Single).unwrap();
        assert_eq!(d[0], LabelVector::one_hot(3, 0));
    }
}
