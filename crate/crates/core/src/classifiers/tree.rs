//! CART classification tree on weighted Gini impurity.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::groundtruth::SunShade;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct TreeOptions {
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    /// Features drawn per split; all features when `None`.
    pub max_features: Option<usize>,
}

impl Default for TreeOptions {
    fn default() -> Self {
        TreeOptions {
            min_samples_split: 2,
            max_depth: None,
            max_features: None,
        }
    }
}

/// Internal nodes send `x[feature] <= threshold` left. Leaves have
/// `left == right == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub feature: usize,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
    /// Total training weight of `[Shade, Sun]` reaching the node.
    pub weight: [f64; 2],
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.left == 0 && self.right == 0
    }

    /// Fraction of the node's weight that is `Sun`.
    pub fn sun_probability(&self) -> f64 {
        let total = self.weight[0] + self.weight[1];
        if total > 0.0 {
            self.weight[1] / total
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

struct Split {
    feature: usize,
    threshold: f64,
    score: f64,
}

fn class_of(label: SunShade) -> usize {
    (label == SunShade::Sun) as usize
}

/// Best split of `idx` on `feature`, scored by the Gini proxy
/// `sum_c L_c^2 / W_L + sum_c R_c^2 / W_R` (larger is better).
fn best_split_on(
    x: &Matrix,
    y: &[SunShade],
    w: &[f64],
    idx: &[usize],
    feature: usize,
    total: [f64; 2],
    buf: &mut Vec<(f64, usize)>,
) -> Option<Split> {
    buf.clear();
    buf.extend(idx.iter().map(|&i| (x.get(i, feature), i)));
    buf.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut left = [0.0; 2];
    let mut best: Option<Split> = None;
    for k in 0..buf.len() - 1 {
        let (v, i) = buf[k];
        left[class_of(y[i])] += w[i];
        let next = buf[k + 1].0;
        if next <= v {
            continue;
        }
        let right = [total[0] - left[0], total[1] - left[1]];
        let wl = left[0] + left[1];
        let wr = right[0] + right[1];
        if wl <= 0.0 || wr <= 0.0 {
            continue;
        }
        let score = (left[0] * left[0] + left[1] * left[1]) / wl + (right[0] * right[0] + right[1] * right[1]) / wr;
        if best.as_ref().is_none_or(|b| score > b.score) {
            let mid = 0.5 * (v + next);
            best = Some(Split {
                feature,
                threshold: if mid < next { mid } else { v },
                score,
            });
        }
    }
    best
}

impl Tree {
    /// Grows a tree on the rows with positive weight (all rows when
    /// `weights` is `None`). `rng` is required when `max_features` is set.
    pub fn fit(
        x: &Matrix,
        y: &[SunShade],
        weights: Option<&[f64]>,
        options: &TreeOptions,
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> Tree {
        let ones;
        let w = match weights {
            Some(w) => w,
            None => {
                ones = vec![1.0; y.len()];
                &ones
            }
        };
        let d = x.ncols();
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| w[i] > 0.0).collect();
        let mut nodes = vec![Node {
            feature: 0,
            threshold: 0.0,
            left: 0,
            right: 0,
            weight: [0.0; 2],
        }];
        let mut stack = vec![(0usize, 0usize, idx.len(), 0usize)];
        let mut buf = Vec::with_capacity(idx.len());
        let mut features: Vec<usize> = (0..d).collect();

        while let Some((node, start, end, depth)) = stack.pop() {
            let rows = &idx[start..end];
            let mut total = [0.0; 2];
            for &i in rows {
                total[class_of(y[i])] += w[i];
            }
            nodes[node].weight = total;
            let pure = total[0] <= 0.0 || total[1] <= 0.0;
            if pure || rows.len() < options.min_samples_split || options.max_depth.is_some_and(|m| depth >= m) {
                continue;
            }

            let mut best: Option<Split> = None;
            let limit = options.max_features.unwrap_or(d).min(d);
            let mut visited = 0;
            for k in 0..d {
                if visited >= limit {
                    break;
                }
                let f = if options.max_features.is_some() {
                    let r = rng.as_mut().expect("max_features needs an rng");
                    let pick = r.gen_range(k..d);
                    features.swap(k, pick);
                    features[k]
                } else {
                    k
                };
                let first = x.get(rows[0], f);
                if rows.iter().all(|&i| x.get(i, f) == first) {
                    continue;
                }
                visited += 1;
                if let Some(s) = best_split_on(x, y, w, rows, f, total, &mut buf) {
                    if best.as_ref().is_none_or(|b| s.score > b.score) {
                        best = Some(s);
                    }
                }
            }
            let Some(split) = best else { continue };

            let slice = &mut idx[start..end];
            let (mut lo, mut hi): (Vec<usize>, Vec<usize>) =
                slice.iter().partition(|&&i| x.get(i, split.feature) <= split.threshold);
            let mid = start + lo.len();
            lo.append(&mut hi);
            slice.copy_from_slice(&lo);

            let left = nodes.len();
            let leaf = Node {
                feature: 0,
                threshold: 0.0,
                left: 0,
                right: 0,
                weight: [0.0; 2],
            };
            nodes.push(leaf);
            nodes.push(leaf);
            nodes[node].feature = split.feature;
            nodes[node].threshold = split.threshold;
            nodes[node].left = left;
            nodes[node].right = left + 1;
            stack.push((left + 1, mid, end, depth + 1));
            stack.push((left, start, mid, depth + 1));
        }
        Tree { nodes }
    }

    pub fn leaf(&self, row: &[f64]) -> &Node {
        let mut n = &self.nodes[0];
        while !n.is_leaf() {
            n = if row[n.feature] <= n.threshold {
                &self.nodes[n.left]
            } else {
                &self.nodes[n.right]
            };
        }
        n
    }

    pub fn sun_probability(&self, row: &[f64]) -> f64 {
        self.leaf(row).sun_probability()
    }

    /// Majority class at the leaf; an even split goes to `Shade`.
    pub fn predict_row(&self, row: &[f64]) -> SunShade {
        let w = self.leaf(row).weight;
        if w[1] > w[0] {
            SunShade::Sun
        } else {
            SunShade::Shade
        }
    }

    /// `p(Sun) - p(Shade)` at the leaf.
    pub fn decision_values(&self, x: &Matrix) -> Vec<f64> {
        x.rows_iter().map(|r| 2.0 * self.sun_probability(r) - 1.0).collect()
    }

    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        let mut max = 0;
        for (i, n) in self.nodes.iter().enumerate() {
            if !n.is_leaf() {
                depth[n.left] = depth[i] + 1;
                depth[n.right] = depth[i] + 1;
                max = max.max(depth[i] + 1);
            }
        }
        max
    }
}

#[cfg(test)]
mod tests {
    use super::super::testdata::{accuracy, xor};
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn memorizes_training_data() {
        let (x, y) = xor(30, 1);
        let t = Tree::fit(&x, &y, None, &TreeOptions::default(), None);
        let pred: Vec<SunShade> = x.rows_iter().map(|r| t.predict_row(r)).collect();
        assert_eq!(pred, y);
    }

    #[test]
    fn thresholds_are_midpoints_and_left_is_inclusive() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![4.0], vec![6.0]]);
        let y = [SunShade::Shade, SunShade::Shade, SunShade::Sun, SunShade::Sun];
        let t = Tree::fit(&x, &y, None, &TreeOptions::default(), None);
        assert_eq!(t.nodes[0].threshold, 3.0);
        assert_eq!(t.predict_row(&[3.0]), SunShade::Shade);
        assert_eq!(t.predict_row(&[3.0001]), SunShade::Sun);
    }

    #[test]
    fn conflicting_duplicates_tie_to_shade() {
        let x = Matrix::from_rows(&[vec![1.0], vec![1.0]]);
        let y = [SunShade::Sun, SunShade::Shade];
        let t = Tree::fit(&x, &y, None, &TreeOptions::default(), None);
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.predict_row(&[1.0]), SunShade::Shade);
    }

    #[test]
    fn weights_shift_the_majority() {
        let x = Matrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]);
        let y = [SunShade::Sun, SunShade::Shade, SunShade::Shade];
        let w = [5.0, 1.0, 1.0];
        let t = Tree::fit(&x, &y, Some(&w), &TreeOptions::default(), None);
        assert_eq!(t.predict_row(&[1.0]), SunShade::Sun);
    }

    #[test]
    fn stump_has_one_split() {
        let (x, y) = xor(10, 2);
        let opts = TreeOptions {
            max_depth: Some(1),
            ..TreeOptions::default()
        };
        let t = Tree::fit(&x, &y, None, &opts, None);
        assert_eq!(t.depth(), 1);
        assert_eq!(t.nodes.len(), 3);
        let pred: Vec<SunShade> = x.rows_iter().map(|r| t.predict_row(r)).collect();
        assert!(accuracy(&pred, &y) <= 0.75);
    }

    proptest! {
        #[test]
        fn distinct_points_are_memorized(points in proptest::collection::btree_map((-50i32..50, -50i32..50), any::<bool>(), 2..40)) {
            let rows: Vec<Vec<f64>> = points.keys().map(|&(a, b)| vec![a as f64, b as f64]).collect();
            let y: Vec<SunShade> = points.values().map(|&s| if s { SunShade::Sun } else { SunShade::Shade }).collect();
            let x = Matrix::from_rows(&rows);
            let t = Tree::fit(&x, &y, None, &TreeOptions::default(), None);
            for (r, l) in x.rows_iter().zip(&y) {
                prop_assert_eq!(t.predict_row(r), *l);
            }
        }
    }
}
