//! Contrastive-loss and reward-aggregation kernels.

use thiserror::Error;

/// Contrastive temperature used for retrieval fine-tuning.
pub const DEFAULT_TAU: f64 = 0.05;

const GATING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ScoringError {
    #[error("zero_norm: vector has zero length")]
    ZeroNorm,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("temperature must be positive, got {0}")]
    InvalidTau(f64),
    #[error("invalid matrix: {0}")]
    Shape(String),
    #[error("invalid reward bundle: {0}")]
    Bundle(String),
}

/// Dot product over the product of squared norms, so identical inputs give
/// exactly 1.0.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, ScoringError> {
    if u.len() != v.len() {
        return Err(ScoringError::DimensionMismatch(u.len(), v.len()));
    }
    if u.iter().chain(v).any(|x| !x.is_finite()) {
        return Err(ScoringError::NonFinite);
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(ScoringError::ZeroNorm);
    }
    Ok((dot / (nu * nv).sqrt()).clamp(-1.0, 1.0))
}

/// Row-major query x document similarities with the positive column of each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    pos: Vec<usize>,
}

impl SimilarityMatrix {
    pub fn new(rows: Vec<Vec<f64>>, pos: Vec<usize>) -> Result<Self, ScoringError> {
        let n = rows.len();
        if n == 0 {
            return Err(ScoringError::Shape("no rows".into()));
        }
        if pos.len() != n {
            return Err(ScoringError::Shape(format!("{} rows but {} positive indices", n, pos.len())));
        }
        let m = rows[0].len();
        if m == 0 {
            return Err(ScoringError::Shape("no columns".into()));
        }
        let mut values = Vec::with_capacity(n * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(ScoringError::Shape(format!("row {i} has {} columns, expected {m}", row.len())));
            }
            if pos[i] >= m {
                return Err(ScoringError::Shape(format!("row {i}: positive index {} out of range", pos[i])));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(ScoringError::NonFinite);
            }
            values.extend(row);
        }
        Ok(Self { rows: n, cols: m, values, pos })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn positive(&self, i: usize) -> usize {
        self.pos[i]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }
}

pub fn infonce_loss(s: &SimilarityMatrix, tau: f64) -> Result<f64, ScoringError> {
    infonce_loss_with_margin(s, tau, 0.0)
}

/// InfoNCE with an additive margin subtracted from each positive similarity
/// before temperature scaling. `margin = 0` is the standard loss.
pub fn infonce_loss_with_margin(s: &SimilarityMatrix, tau: f64, margin: f64) -> Result<f64, ScoringError> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(ScoringError::InvalidTau(tau));
    }
    if !margin.is_finite() {
        return Err(ScoringError::NonFinite);
    }
    let mut total = 0.0;
    let mut logits = vec![0.0; s.cols];
    for i in 0..s.rows {
        let pos = s.pos[i];
        for (j, (l, v)) in logits.iter_mut().zip(s.row(i)).enumerate() {
            *l = if j == pos { (v - margin) / tau } else { v / tau };
        }
        if logits.iter().any(|l| !l.is_finite()) {
            return Err(ScoringError::NonFinite);
        }
        // argmax term contributes exp(0) = 1; the rest go through ln_1p
        let (k, max) = logits
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (j, l)| if l > acc.1 { (j, l) } else { acc });
        let rest: f64 = logits
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, l)| (l - max).exp())
            .sum();
        total += (max - logits[pos]) + rest.ln_1p();
    }
    Ok((total / s.rows as f64).max(0.0))
}

/// `mask[i][j]` is true when column `j` is a usable negative for row `i`:
/// not the positive, and guide similarity strictly below the positive's
/// similarity minus `margin`.
pub fn gist_negative_mask(guide: &SimilarityMatrix, margin: f64) -> Vec<Vec<bool>> {
    (0..guide.rows)
        .map(|i| {
            let pos = guide.pos[i];
            let bound = guide.get(i, pos) - margin;
            guide
                .row(i)
                .iter()
                .enumerate()
                .map(|(j, &g)| j != pos && g < bound)
                .collect()
        })
        .collect()
}

/// Gating coefficients paired with per-objective rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardBundle {
    gating: Vec<f64>,
    rewards: Vec<f64>,
}

impl RewardBundle {
    pub fn new(gating: Vec<f64>, rewards: Vec<f64>) -> Result<Self, ScoringError> {
        if gating.is_empty() || gating.len() != rewards.len() {
            return Err(ScoringError::Bundle(format!(
                "{} gating coefficients for {} rewards",
                gating.len(),
                rewards.len()
            )));
        }
        if gating.iter().chain(&rewards).any(|x| !x.is_finite()) {
            return Err(ScoringError::NonFinite);
        }
        if let Some(g) = gating.iter().find(|g| **g < 0.0) {
            return Err(ScoringError::Bundle(format!("negative gating coefficient {g}")));
        }
        let sum: f64 = gating.iter().sum();
        if (sum - 1.0).abs() > GATING_TOLERANCE {
            return Err(ScoringError::Bundle(format!("gating sums to {sum}")));
        }
        Ok(Self { gating, rewards })
    }

    pub fn gating(&self) -> &[f64] {
        &self.gating
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }
}

pub fn armo_score(b: &RewardBundle) -> f64 {
    b.gating.iter().zip(&b.rewards).map(|(g, r)| g * r).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]), Ok(1.0));
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]), Ok(0.0));
        let expected = 32.0 / (14f64.sqrt() * 77f64.sqrt());
        assert!(close(cosine(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap(), expected, 1e-15));
        assert!(close(expected, 0.974632, 1e-6));
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(ScoringError::ZeroNorm));
        assert_eq!(cosine(&[1.0], &[1.0, 0.0]), Err(ScoringError::DimensionMismatch(1, 2)));
    }

    #[test]
    fn identical_vectors_are_exactly_one() {
        let v = [0.1, -0.7, 0.3333, 12.5];
        assert_eq!(cosine(&v, &v), Ok(1.0));
    }

    #[test]
    fn single_candidate_loss_is_zero() {
        let s = SimilarityMatrix::new(vec![vec![0.3]], vec![0]).unwrap();
        assert_eq!(infonce_loss(&s, DEFAULT_TAU), Ok(0.0));
    }

    #[test]
    fn diagonal_two_by_two() {
        let s = SimilarityMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0, 1]).unwrap();
        let x = (-20f64).exp();
        let oracle = x - x * x / 2.0 + x * x * x / 3.0;
        let loss = infonce_loss(&s, 0.05).unwrap();
        assert!(((loss - oracle) / oracle).abs() < 1e-12, "{loss} vs {oracle}");
    }

    #[test]
    fn uniform_rows_give_ln_m() {
        for m in [2usize, 4, 16] {
            let s = SimilarityMatrix::new(vec![vec![0.42; m]; 3], vec![0, 1, m - 1]).unwrap();
            for tau in [0.01, 0.05, 1.0] {
                let loss = infonce_loss(&s, tau).unwrap();
                assert!(close(loss, (m as f64).ln(), 1e-12));
            }
        }
    }

    #[test]
    fn extreme_logits_do_not_overflow() {
        let s = SimilarityMatrix::new(vec![vec![1.0, -1.0, 1.0]], vec![1]).unwrap();
        let loss = infonce_loss(&s, 1e-3).unwrap();
        assert!(close(loss, 2000.0 + 2f64.ln(), 1e-9));
    }

    #[test]
    fn margin_raises_loss() {
        let s = SimilarityMatrix::new(vec![vec![0.9, 0.2, 0.1]], vec![0]).unwrap();
        let plain = infonce_loss(&s, 0.05).unwrap();
        let with = infonce_loss_with_margin(&s, 0.05, 0.1).unwrap();
        assert!(with > plain);
    }

    #[test]
    fn invalid_inputs() {
        let s = SimilarityMatrix::new(vec![vec![0.9, 0.2]], vec![0]).unwrap();
        assert_eq!(infonce_loss(&s, 0.0), Err(ScoringError::InvalidTau(0.0)));
        assert_eq!(
            SimilarityMatrix::new(vec![vec![f64::NAN]], vec![0]),
            Err(ScoringError::NonFinite)
        );
        assert!(SimilarityMatrix::new(vec![vec![0.1, 0.2]], vec![2]).is_err());
        assert!(SimilarityMatrix::new(vec![vec![0.1, 0.2], vec![0.1]], vec![0, 0]).is_err());
    }

    #[test]
    fn gist_examples() {
        let s = SimilarityMatrix::new(vec![vec![0.8, 0.8, 0.1]], vec![0]).unwrap();
        assert_eq!(gist_negative_mask(&s, 0.0), vec![vec![false, false, true]]);

        let g = vec![
            vec![0.90, 0.85, 0.70, 0.10],
            vec![0.20, 0.60, 0.55, 0.49],
            vec![0.30, 0.31, 0.05, 0.40],
        ];
        let pos = vec![0, 1, 3];
        let mask = gist_negative_mask(&SimilarityMatrix::new(g.clone(), pos.clone()).unwrap(), 0.1);
        for i in 0..3 {
            for j in 0..4 {
                let expected = j != pos[i] && g[i][j] < g[i][pos[i]] - 0.1;
                assert_eq!(mask[i][j], expected, "({i},{j})");
            }
        }
        assert_eq!(mask[1], vec![true, false, false, true]);
    }

    #[test]
    fn armo_examples() {
        let b = RewardBundle::new(vec![0.5, 0.3, 0.2], vec![0.8, -0.1, 0.4]).unwrap();
        assert!(close(armo_score(&b), 0.45, 1e-15));
        let one_hot = RewardBundle::new(vec![0.0, 1.0, 0.0], vec![3.0, -2.0, 7.0]).unwrap();
        assert_eq!(armo_score(&one_hot), -2.0);
        let uniform = RewardBundle::new(vec![0.25; 4], vec![1.0, 2.0, 3.0, 6.0]).unwrap();
        assert!(close(armo_score(&uniform), 3.0, 1e-15));
        assert!(RewardBundle::new(vec![0.5, 0.6], vec![1.0, 1.0]).is_err());
        assert!(RewardBundle::new(vec![1.2, -0.2], vec![1.0, 1.0]).is_err());
        assert!(RewardBundle::new(vec![1.0], vec![]).is_err());
    }

    fn matrix() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>)> {
        (1usize..6, 1usize..8).prop_flat_map(|(n, m)| {
            (
                prop::collection::vec(prop::collection::vec(-1.0f64..1.0, m), n),
                prop::collection::vec(0..m, n),
            )
        })
    }

    proptest! {
        #[test]
        fn loss_is_non_negative((rows, pos) in matrix(), tau in 0.01f64..2.0) {
            let s = SimilarityMatrix::new(rows, pos).unwrap();
            prop_assert!(infonce_loss(&s, tau).unwrap() >= 0.0);
        }

        #[test]
        fn joint_scaling_invariance((rows, pos) in matrix(), tau in 0.01f64..2.0, c in 0.1f64..10.0) {
            let s = SimilarityMatrix::new(rows, pos).unwrap();
            let a = infonce_loss(&s, tau).unwrap();
            let b = infonce_loss(&s.scaled(c), c * tau).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0), "{} vs {}", a, b);
        }

        #[test]
        fn gist_margin_monotone((rows, pos) in matrix(), m1 in -0.5f64..0.5, dm in 0.0f64..0.5) {
            let s = SimilarityMatrix::new(rows, pos).unwrap();
            let lo = gist_negative_mask(&s, m1);
            let hi = gist_negative_mask(&s, m1 + dm);
            for (a, b) in lo.iter().flatten().zip(hi.iter().flatten()) {
                prop_assert!(!(!a && *b));
            }
        }

        #[test]
        fn armo_within_reward_range(raw in prop::collection::vec((0.0f64..1.0, -5.0f64..5.0), 1..8)) {
            let total: f64 = raw.iter().map(|(g, _)| g).sum();
            prop_assume!(total > 1e-6);
            let gating: Vec<f64> = raw.iter().map(|(g, _)| g / total).collect();
            let rewards: Vec<f64> = raw.iter().map(|(_, r)| *r).collect();
            let Ok(b) = RewardBundle::new(gating, rewards.clone()) else { return Ok(()) };
            let s = armo_score(&b);
            let lo = rewards.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = rewards.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(s >= lo - 1e-12 && s <= hi + 1e-12);
        }

        #[test]
        fn cosine_scale_invariance(
            uv in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..16),
            a in 0.01f64..100.0,
            b in 0.01f64..100.0,
        ) {
            let u: Vec<f64> = uv.iter().map(|p| p.0).collect();
            let v: Vec<f64> = uv.iter().map(|p| p.1).collect();
            let Ok(c) = cosine(&u, &v) else { return Ok(()) };
            let su: Vec<f64> = u.iter().map(|x| x * a).collect();
            let sv: Vec<f64> = v.iter().map(|x| x * b).collect();
            prop_assert!((cosine(&su, &sv).unwrap() - c).abs() < 1e-12);
        }
    }
}
