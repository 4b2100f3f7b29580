use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::groundtruth::SunShade;
use crate::matrix::{squared_distance, Matrix};

/// Stored-exemplar k-nearest-neighbour vote under Euclidean distance. Equal
/// distances are broken by training-row order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub exemplars: Matrix,
    pub labels: Vec<SunShade>,
}

impl KnnModel {
    pub fn fit(x: &Matrix, y: &[SunShade], k: usize) -> KnnModel {
        KnnModel {
            k,
            exemplars: x.clone(),
            labels: y.to_vec(),
        }
    }

    /// `(Sun votes - Shade votes) / k`; an even vote is zero and so `Shade`.
    pub fn decision_value(&self, row: &[f64]) -> f64 {
        let k = self.k.min(self.labels.len());
        let mut d: Vec<(f64, usize)> = self
            .exemplars
            .rows_iter()
            .enumerate()
            .map(|(i, e)| (squared_distance(e, row), i))
            .collect();
        let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, order);
        }
        let sun = d[..k].iter().filter(|(_, i)| self.labels[*i] == SunShade::Sun).count() as f64;
        (2.0 * sun - k as f64) / k as f64
    }

    pub fn decision_values(&self, x: &Matrix) -> Vec<f64> {
        (0..x.nrows())
            .into_par_iter()
            .map(|i| self.decision_value(x.row(i)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::label_of;
    use super::*;

    #[test]
    fn majority_of_nearest() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![10.0], vec![11.0]]);
        let y = [SunShade::Sun, SunShade::Sun, SunShade::Shade, SunShade::Shade, SunShade::Shade];
        let m = KnnModel::fit(&x, &y, 3);
        assert_eq!(label_of(m.decision_value(&[0.5])), SunShade::Sun);
        assert_eq!(label_of(m.decision_value(&[9.0])), SunShade::Shade);
    }

    #[test]
    fn even_vote_goes_to_shade() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]);
        let y = [SunShade::Sun, SunShade::Shade];
        let m = KnnModel::fit(&x, &y, 2);
        assert_eq!(m.decision_value(&[0.5]), 0.0);
        assert_eq!(label_of(m.decision_value(&[0.2])), SunShade::Shade);
    }

    #[test]
    fn equal_distances_prefer_earlier_rows() {
        let x = Matrix::from_rows(&[vec![-1.0], vec![1.0], vec![-1.0]]);
        let y = [SunShade::Sun, SunShade::Shade, SunShade::Shade];
        let m = KnnModel::fit(&x, &y, 1);
        assert_eq!(label_of(m.decision_value(&[0.0])), SunShade::Sun);
    }
}
