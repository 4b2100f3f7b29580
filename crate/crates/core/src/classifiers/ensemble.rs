//! Bootstrap random forest and SAMME AdaBoost over decision stumps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{Tree, TreeOptions};
use crate::groundtruth::SunShade;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Each tree sees a bootstrap sample of size n and draws
    /// `max(1, floor(sqrt(d)))` features per split. Tree `t` uses its own
    /// random stream derived from `seed`, so the result does not depend on
    /// thread scheduling.
    pub fn fit(x: &Matrix, y: &[SunShade], n_trees: usize, min_samples_split: usize, seed: u64) -> Forest {
        let n = y.len();
        let options = TreeOptions {
            min_samples_split,
            max_depth: None,
            max_features: Some(((x.ncols() as f64).sqrt().floor() as usize).max(1)),
        };
        let trees = (0..n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t as u64);
                let mut counts = vec![0.0; n];
                for _ in 0..n {
                    counts[rng.gen_range(0..n)] += 1.0;
                }
                Tree::fit(x, y, Some(&counts), &options, Some(&mut rng))
            })
            .collect();
        Forest { trees }
    }

    pub fn sun_probability(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.sun_probability(row)).sum::<f64>() / self.trees.len() as f64
    }

    /// Mean `p(Sun)` minus one half.
    pub fn decision_values(&self, x: &Matrix) -> Vec<f64> {
        (0..x.nrows())
            .into_par_iter()
            .map(|i| self.sun_probability(x.row(i)) - 0.5)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub stumps: Vec<Tree>,
    pub alphas: Vec<f64>,
}

impl AdaBoost {
    /// Discrete SAMME boosting. Stops early on a perfect stump or one no
    /// better than chance.
    pub fn fit(x: &Matrix, y: &[SunShade], n_estimators: usize, learning_rate: f64) -> AdaBoost {
        let n = y.len();
        let mut w = vec![1.0 / n as f64; n];
        let options = TreeOptions {
            max_depth: Some(1),
            ..TreeOptions::default()
        };
        let mut out = AdaBoost {
            stumps: Vec::new(),
            alphas: Vec::new(),
        };
        for _ in 0..n_estimators {
            let stump = Tree::fit(x, y, Some(&w), &options, None);
            let miss: Vec<bool> = x.rows_iter().zip(y).map(|(r, l)| stump.predict_row(r) != *l).collect();
            let total: f64 = w.iter().sum();
            let err = miss.iter().zip(&w).filter(|(m, _)| **m).map(|(_, w)| w).sum::<f64>() / total;
            if err <= 0.0 {
                out.stumps.push(stump);
                out.alphas.push(1.0);
                break;
            }
            if err >= 0.5 {
                if out.stumps.is_empty() {
                    out.stumps.push(stump);
                    out.alphas.push(1.0);
                }
                break;
            }
            let alpha = learning_rate * ((1.0 - err) / err).ln();
            for (wi, m) in w.iter_mut().zip(&miss) {
                if *m {
                    *wi *= alpha.exp();
                }
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|wi| *wi /= s);
            out.stumps.push(stump);
            out.alphas.push(alpha);
        }
        out
    }

    /// Weighted vote, `Sun` counted +1 and `Shade` -1.
    pub fn decision_values(&self, x: &Matrix) -> Vec<f64> {
        x.rows_iter()
            .map(|r| {
                self.stumps
                    .iter()
                    .zip(&self.alphas)
                    .map(|(s, a)| if s.predict_row(r) == SunShade::Sun { *a } else { -*a })
                    .sum()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::label_of;
    use super::super::testdata::{accuracy, blobs, xor};
    use super::*;

    fn labels(v: Vec<f64>) -> Vec<SunShade> {
        v.into_iter().map(label_of).collect()
    }

    #[test]
    fn forest_is_reproducible_from_seed() {
        let (x, y) = xor(20, 4);
        let a = Forest::fit(&x, &y, 10, 2, 7);
        assert_eq!(a, Forest::fit(&x, &y, 10, 2, 7));
        assert_ne!(a, Forest::fit(&x, &y, 10, 2, 8));
    }

    #[test]
    fn ensembles_beat_or_match_their_base_learner() {
        for (x, y) in [xor(30, 1), blobs(50, 2)] {
            let tree = Tree::fit(&x, &y, None, &TreeOptions::default(), None);
            let tree_acc = accuracy(&labels(tree.decision_values(&x)), &y);
            let forest = Forest::fit(&x, &y, 100, 2, 3);
            assert!(accuracy(&labels(forest.decision_values(&x)), &y) >= tree_acc);

            let stump = Tree::fit(
                &x,
                &y,
                None,
                &TreeOptions {
                    max_depth: Some(1),
                    ..TreeOptions::default()
                },
                None,
            );
            let stump_acc = accuracy(&labels(stump.decision_values(&x)), &y);
            let boost = AdaBoost::fit(&x, &y, 50, 1.0);
            assert!(accuracy(&labels(boost.decision_values(&x)), &y) >= stump_acc);
        }
    }

    #[test]
    fn adaboost_stops_on_a_perfect_stump() {
        let (x, y) = blobs(30, 3);
        let boost = AdaBoost::fit(&x, &y, 50, 1.0);
        assert_eq!(boost.stumps.len(), 1);
    }
}
