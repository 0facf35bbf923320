//! Strictly proper scoring rules on finite distributions, with the entropy and
//! divergence each one induces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a [`DiscreteDist`].
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A probability vector over the indices `0..m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DiscreteDist {
    weights: Vec<f64>,
}

impl DiscreteDist {
    /// Validates non-negativity and unit mass (within [`MASS_TOLERANCE`]).
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "weight {w} is negative or non-finite"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Self { weights })
    }

    /// Rescales non-negative weights to unit mass.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidDistribution("zero total mass".into()));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        Ok(Self {
            weights: vec![1.0 / m as f64; m],
        })
    }

    pub fn point_mass(m: usize, at: usize) -> Result<Self> {
        if at >= m {
            return Err(Error::IndexOutOfRange { index: at, size: m });
        }
        let mut weights = vec![0.0; m];
        weights[at] = 1.0;
        Ok(Self { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn has_full_support(&self) -> bool {
        self.weights.iter().all(|w| *w > 0.0)
    }

    /// Largest absolute coordinate difference.
    pub fn sup_distance(&self, other: &DiscreteDist) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn l2_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    fn sum_of_squares(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }
}

impl<'de> Deserialize<'de> for DiscreteDist {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let weights = Vec::<f64>::deserialize(d)?;
        DiscreteDist::new(weights).map_err(serde::de::Error::custom)
    }
}

/// Which strictly proper score is in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    #[serde(alias = "log")]
    Logarithmic,
    #[serde(alias = "brier")]
    Quadratic,
    Spherical,
}

impl ScoreKind {
    pub const ALL: [ScoreKind; 3] = [
        ScoreKind::Logarithmic,
        ScoreKind::Quadratic,
        ScoreKind::Spherical,
    ];
}

fn check_same_support(p: &DiscreteDist, q: &DiscreteDist) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            actual: q.len(),
        });
    }
    Ok(())
}

/// S(q, y). The log score of a zero-probability outcome is `-inf`.
pub fn score(kind: ScoreKind, q: &DiscreteDist, y: usize) -> Result<f64> {
    if y >= q.len() {
        return Err(Error::IndexOutOfRange {
            index: y,
            size: q.len(),
        });
    }
    let qy = q.get(y);
    Ok(match kind {
        ScoreKind::Logarithmic => qy.ln(),
        ScoreKind::Quadratic => 2.0 * qy - q.sum_of_squares(),
        ScoreKind::Spherical => qy / q.l2_norm(),
    })
}

/// E_{Y~p}[S(q, Y)], with outcomes of zero p-mass contributing nothing.
pub fn expected_score(kind: ScoreKind, p: &DiscreteDist, q: &DiscreteDist) -> Result<f64> {
    check_same_support(p, q)?;
    Ok(match kind {
        ScoreKind::Logarithmic => p
            .weights()
            .iter()
            .zip(q.weights())
            .filter(|(pw, _)| **pw > 0.0)
            .map(|(pw, qw)| pw * qw.ln())
            .sum(),
        ScoreKind::Quadratic => {
            let cross: f64 = p
                .weights()
                .iter()
                .zip(q.weights())
                .map(|(a, b)| a * b)
                .sum();
            2.0 * cross - q.sum_of_squares()
        }
        ScoreKind::Spherical => {
            let cross: f64 = p
                .weights()
                .iter()
                .zip(q.weights())
                .map(|(a, b)| a * b)
                .sum();
            cross / q.l2_norm()
        }
    })
}

/// Generalized entropy H_S(p) = -E_{Y~p}[S(p, Y)].
pub fn entropy(kind: ScoreKind, p: &DiscreteDist) -> f64 {
    match kind {
        ScoreKind::Logarithmic => p
            .weights()
            .iter()
            .filter(|w| **w > 0.0)
            .map(|w| -w * w.ln())
            .sum(),
        ScoreKind::Quadratic => -p.sum_of_squares(),
        ScoreKind::Spherical => -p.l2_norm(),
    }
}

/// Score divergence D_S(p ‖ q) = E_{Y~p}[S(p, Y) - S(q, Y)].
///
/// Under the log score this is the KL divergence, `+inf` when q misses mass of p.
pub fn divergence(kind: ScoreKind, p: &DiscreteDist, q: &DiscreteDist) -> Result<f64> {
    check_same_support(p, q)?;
    if p == q {
        return Ok(0.0);
    }
    let d = match kind {
        ScoreKind::Logarithmic => {
            let mut total = 0.0;
            for (pw, qw) in p.weights().iter().zip(q.weights()) {
                if *pw > 0.0 {
                    if *qw == 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    total += pw * (pw / qw).ln();
                }
            }
            total
        }
        ScoreKind::Quadratic => p
            .weights()
            .iter()
            .zip(q.weights())
            .map(|(a, b)| (a - b) * (a - b))
            .sum(),
        ScoreKind::Spherical => {
            let cross: f64 = p
                .weights()
                .iter()
                .zip(q.weights())
                .map(|(a, b)| a * b)
                .sum();
            p.l2_norm() - cross / q.l2_norm()
        }
    };
    Ok(d.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(w: &[f64]) -> DiscreteDist {
        DiscreteDist::new(w.to_vec()).unwrap()
    }

    #[test]
    fn score_examples() {
        let u = DiscreteDist::uniform(2).unwrap();
        assert!((score(ScoreKind::Logarithmic, &u, 0).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        let q = dist(&[0.3, 0.7]);
        assert!((score(ScoreKind::Quadratic, &q, 1).unwrap() - 0.82).abs() < 1e-15);
        let pm = dist(&[1.0, 0.0]);
        assert_eq!(score(ScoreKind::Spherical, &pm, 0).unwrap(), 1.0);
        assert_eq!(
            score(ScoreKind::Logarithmic, &pm, 1).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn score_index_out_of_range() {
        let u = DiscreteDist::uniform(3).unwrap();
        assert_eq!(
            score(ScoreKind::Quadratic, &u, 3),
            Err(Error::IndexOutOfRange { index: 3, size: 3 })
        );
    }

    #[test]
    fn entropy_examples() {
        let u4 = DiscreteDist::uniform(4).unwrap();
        assert!((entropy(ScoreKind::Logarithmic, &u4) - 4f64.ln()).abs() < 1e-15);
        assert!((entropy(ScoreKind::Quadratic, &dist(&[0.3, 0.7])) + 0.58).abs() < 1e-15);
        assert_eq!(
            entropy(ScoreKind::Logarithmic, &dist(&[0.0, 1.0, 0.0])),
            0.0
        );
        assert!((entropy(ScoreKind::Spherical, &dist(&[0.6, 0.4])) + 0.52f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn divergence_examples() {
        let p = dist(&[0.2, 0.5, 0.3]);
        for kind in ScoreKind::ALL {
            assert_eq!(divergence(kind, &p, &p).unwrap(), 0.0);
        }
        let d = divergence(ScoreKind::Quadratic, &dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])).unwrap();
        assert!((d - 2.0).abs() < 1e-15);
        let kl = divergence(
            ScoreKind::Logarithmic,
            &dist(&[0.5, 0.5]),
            &dist(&[0.25, 0.75]),
        )
        .unwrap();
        let expected = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert!((kl - expected).abs() < 1e-15);
        assert!((kl - 0.1438).abs() < 1e-4);
    }

    #[test]
    fn log_divergence_is_infinite_off_support() {
        let d = divergence(
            ScoreKind::Logarithmic,
            &dist(&[0.5, 0.5]),
            &dist(&[1.0, 0.0]),
        )
        .unwrap();
        assert_eq!(d, f64::INFINITY);
    }

    #[test]
    fn divergence_support_mismatch() {
        let err = divergence(ScoreKind::Logarithmic, &dist(&[1.0]), &dist(&[0.5, 0.5]));
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(DiscreteDist::new(vec![]).is_err());
        assert!(DiscreteDist::new(vec![0.5, 0.6]).is_err());
        assert!(DiscreteDist::new(vec![1.5, -0.5]).is_err());
        assert!(DiscreteDist::new(vec![f64::NAN, 1.0]).is_err());
        assert!(DiscreteDist::normalized(vec![0.0, 0.0]).is_err());
        let d = DiscreteDist::normalized(vec![1.0, 3.0]).unwrap();
        assert_eq!(d.weights(), &[0.25, 0.75]);
    }

    #[test]
    fn deserialize_validates() {
        let ok: DiscreteDist = serde_json::from_str("[0.25, 0.75]").unwrap();
        assert_eq!(ok.len(), 2);
        assert!(serde_json::from_str::<DiscreteDist>("[0.25, 0.25]").is_err());
        let kind: ScoreKind = serde_json::from_str("\"log\"").unwrap();
        assert_eq!(kind, ScoreKind::Logarithmic);
        let kind: ScoreKind = serde_json::from_str("\"brier\"").unwrap();
        assert_eq!(kind, ScoreKind::Quadratic);
    }
}
