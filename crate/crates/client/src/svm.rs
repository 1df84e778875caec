//! Linear margin classifier trained in the dual with coordinate descent
//! (hinge loss, box-constrained). The bias rides along as an implicit
//! always-one feature, so the box alone regularizes it.

use crate::ClientError;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CONVERGENCE_TOL: f64 = 1e-6;
const MAX_EPOCHS: usize = 1000;

/// Dense samples with fixed dimensionality and a binary label each.
#[derive(Debug, Clone, Default)]
pub struct TrainingSet {
    dim: usize,
    xs: Vec<f32>,
    ys: Vec<i8>,
}

impl TrainingSet {
    pub fn new(dim: usize) -> TrainingSet {
        TrainingSet {
            dim,
            xs: Vec::new(),
            ys: Vec::new(),
        }
    }

    pub fn push(&mut self, x: &[f32], positive: bool) {
        debug_assert_eq!(x.len(), self.dim);
        self.xs.extend_from_slice(x);
        self.ys.push(if positive { 1 } else { -1 });
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, i: usize) -> &[f32] {
        &self.xs[i * self.dim..(i + 1) * self.dim]
    }

    fn has_both_classes(&self) -> bool {
        self.ys.iter().any(|&y| y > 0) && self.ys.iter().any(|&y| y < 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearScorer {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearScorer {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn score(&self, x: &[f32]) -> f64 {
        debug_assert_eq!(x.len(), self.weights.len());
        let mut acc = self.bias;
        for (w, &v) in self.weights.iter().zip(x) {
            acc += w * v as f64;
        }
        acc
    }
}

/// Fit by dual coordinate descent: keep the primal weights incrementally,
/// visit samples in a fresh shuffled order each epoch, and stop when the
/// largest projected gradient over an epoch drops below tolerance.
/// `object` only tags the single-class error.
pub fn fit_linear_svm(
    set: &TrainingSet,
    cost: f64,
    seed: u64,
    object: u8,
) -> Result<LinearScorer, ClientError> {
    if !(cost.is_finite() && cost > 0.0) {
        return Err(ClientError::BadParam(format!(
            "cost must be positive ({cost})"
        )));
    }
    if set.is_empty() || !set.has_both_classes() {
        return Err(ClientError::SingleClass(object));
    }
    let n = set.len();
    let d = set.dim;
    // trailing slot is the implicit bias feature
    let mut w = vec![0.0f64; d + 1];
    let mut alpha = vec![0.0f64; n];
    let q_diag: Vec<f64> = (0..n)
        .map(|i| {
            set.sample(i)
                .iter()
                .map(|&v| (v as f64) * (v as f64))
                .sum::<f64>()
                + 1.0
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for _ in 0..MAX_EPOCHS {
        order.shuffle(&mut rng);
        let mut max_pg = 0.0f64;
        for &i in &order {
            let x = set.sample(i);
            let y = set.ys[i] as f64;
            let mut margin = w[d];
            for (wj, &v) in w[..d].iter().zip(x) {
                margin += wj * v as f64;
            }
            let g = y * margin - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= cost {
                g.max(0.0)
            } else {
                g
            };
            max_pg = max_pg.max(pg.abs());
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / q_diag[i]).clamp(0.0, cost);
                let delta = (alpha[i] - old) * y;
                if delta != 0.0 {
                    for (wj, &v) in w[..d].iter_mut().zip(x) {
                        *wj += delta * v as f64;
                    }
                    w[d] += delta;
                }
            }
        }
        if max_pg < CONVERGENCE_TOL {
            break;
        }
    }
    let bias = w[d];
    w.truncate(d);
    Ok(LinearScorer { weights: w, bias })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_clusters() -> TrainingSet {
        let mut set = TrainingSet::new(2);
        for i in 0..20 {
            let j = (i % 5) as f32 * 0.1;
            set.push(&[2.0 + j, 1.0 - j], true);
            set.push(&[-2.0 - j, -1.0 + j], false);
        }
        set
    }

    #[test]
    fn separable_clusters_train_to_perfect_margin_signs() {
        let set = two_clusters();
        let scorer = fit_linear_svm(&set, 1.0, 3, 1).unwrap();
        for i in 0..set.len() {
            let s = scorer.score(set.sample(i));
            assert_eq!(s > 0.0, set.ys[i] > 0, "sample {i} score {s}");
        }
    }

    #[test]
    fn single_class_sets_are_rejected() {
        let mut fg_only = TrainingSet::new(2);
        fg_only.push(&[1.0, 0.0], true);
        fg_only.push(&[2.0, 0.5], true);
        assert!(matches!(
            fit_linear_svm(&fg_only, 1.0, 0, 4),
            Err(ClientError::SingleClass(4))
        ));
        let empty = TrainingSet::new(2);
        assert!(matches!(
            fit_linear_svm(&empty, 1.0, 0, 2),
            Err(ClientError::SingleClass(2))
        ));
    }

    #[test]
    fn training_is_deterministic_for_a_fixed_seed() {
        let set = two_clusters();
        let a = fit_linear_svm(&set, 0.5, 99, 1).unwrap();
        let b = fit_linear_svm(&set, 0.5, 99, 1).unwrap();
        let bits = |s: &LinearScorer| {
            s.weights
                .iter()
                .chain(std::iter::once(&s.bias))
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn recovers_a_known_separating_line() {
        // label by sign of 0.3x + 0.7y - 0.1, leaving a margin band empty
        let line = |x: f64, y: f64| 0.3 * x + 0.7 * y - 0.1;
        let mut set = TrainingSet::new(2);
        let mut grid = Vec::new();
        for ix in 0..21 {
            for iy in 0..21 {
                let x = -1.0 + ix as f64 * 0.1;
                let y = -1.0 + iy as f64 * 0.1;
                let f = line(x, y);
                if f.abs() < 0.05 {
                    continue;
                }
                grid.push(((x as f32, y as f32), f > 0.0));
            }
        }
        for (i, &((x, y), pos)) in grid.iter().enumerate() {
            if i % 2 == 0 {
                set.push(&[x, y], pos);
            }
        }
        let scorer = fit_linear_svm(&set, 10.0, 7, 1).unwrap();
        let held_out = grid.iter().skip(1).step_by(2);
        let (mut agree, mut total) = (0usize, 0usize);
        for &((x, y), pos) in held_out {
            total += 1;
            if (scorer.score(&[x, y]) > 0.0) == pos {
                agree += 1;
            }
        }
        let rate = agree as f64 / total as f64;
        assert!(rate >= 0.99, "held-out agreement {rate}");
    }

    #[test]
    fn cost_bound_is_respected_in_the_primal_weights() {
        // one mislabeled point inside the opposite cluster must not blow up
        // the solution when the cost box is tight
        let mut set = two_clusters();
        set.push(&[2.0, 1.0], false);
        let scorer = fit_linear_svm(&set, 0.01, 5, 1).unwrap();
        let norm: f64 = scorer.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        assert!(norm.is_finite() && norm < 10.0);
    }
}
