//! Per-player real tensors over pure profiles, and the tensor of
//! best-outcome probabilities.

use std::ops::Deref;

use rayon::prelude::*;

use crate::dist::prob_max_all;
use crate::error::{Error, Result};
use crate::game::{MixedProfile, Shape, StochasticGame};

/// Row player's and column player's matrices.
pub type Bimatrix = (Vec<Vec<f64>>, Vec<Vec<f64>>);

/// `values[player][flat profile]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffTensor {
    shape: Shape,
    values: Vec<Vec<f64>>,
}

impl PayoffTensor {
    pub fn new(shape: Shape, values: Vec<Vec<f64>>) -> Self {
        assert_eq!(values.len(), shape.players(), "one value table per player");
        assert!(values.iter().all(|v| v.len() == shape.num_profiles()), "value table size");
        PayoffTensor { shape, values }
    }

    /// Two-player tensor from row-player and column-player matrices.
    pub fn from_bimatrix(a: &[Vec<f64>], b: &[Vec<f64>]) -> Self {
        let rows = a.len();
        let cols = a.first().map_or(0, Vec::len);
        let shape = Shape::new(vec![rows, cols]);
        let flat = |m: &[Vec<f64>]| m.iter().flat_map(|r| r.iter().copied()).collect();
        PayoffTensor::new(shape, vec![flat(a), flat(b)])
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn players(&self) -> usize {
        self.shape.players()
    }

    pub fn get(&self, player: usize, profile: &[usize]) -> f64 {
        self.values[player][self.shape.flat_index(profile)]
    }

    pub fn values(&self, player: usize) -> &[f64] {
        &self.values[player]
    }

    /// `(A, B)` with `A[r][c]`, `B[r][c]` the row and column player's entries.
    pub fn bimatrix(&self) -> Result<Bimatrix> {
        if self.players() != 2 {
            return Err(Error::Unsupported("exactly two players".into()));
        }
        let (m, n) = (self.shape.dims()[0], self.shape.dims()[1]);
        let mat = |i: usize| -> Vec<Vec<f64>> {
            (0..m).map(|r| self.values[i][r * n..(r + 1) * n].to_vec()).collect()
        };
        Ok((mat(0), mat(1)))
    }

    /// `Σ_{s₋ᵢ} σ(s₋ᵢ) · t_i(own, s₋ᵢ)`: player `i`'s value for `own`
    /// against the opponents' part of `profile`.
    pub fn contract(&self, player: usize, own: usize, profile: &MixedProfile) -> f64 {
        self.shape
            .opponent_profiles(player)
            .iter()
            .map(|frag| {
                let w = profile.profile_weight(player, frag);
                if w == 0.0 {
                    0.0
                } else {
                    w * self.get(player, &self.shape.join(player, own, frag))
                }
            })
            .sum()
    }
}

/// Entry `(i, s)` is the probability that player `i`'s payoff at `s` is at
/// least the payoff of every other own action against the same `s₋ᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTensor(PayoffTensor);

impl Deref for ProbabilityTensor {
    type Target = PayoffTensor;

    fn deref(&self) -> &PayoffTensor {
        &self.0
    }
}

impl ProbabilityTensor {
    pub fn into_inner(self) -> PayoffTensor {
        self.0
    }
}

/// Builds the probability tensor. Each `(player, s₋ᵢ)` column is one
/// [`prob_max_all`] call over the player's own actions.
pub fn build_tensor(game: &StochasticGame) -> Result<ProbabilityTensor> {
    let shape = game.shape().clone();
    let mut values = vec![vec![0.0; shape.num_profiles()]; game.players()];
    for (i, table) in values.iter_mut().enumerate() {
        let own = game.num_strategies(i);
        let columns = game
            .opponent_profiles(i)
            .into_par_iter()
            .map(|frag| {
                let flats: Vec<usize> = (0..own).map(|s| shape.flat_index(&shape.join(i, s, &frag))).collect();
                let family: Vec<_> = flats.iter().map(|&f| game.payoff_flat(i, f)).collect();
                prob_max_all(&family).map(|p| (flats, p))
            })
            .collect::<Result<Vec<_>>>()?;
        for (flats, probs) in columns {
            for (f, p) in flats.into_iter().zip(probs) {
                table[f] = p;
            }
        }
    }
    Ok(ProbabilityTensor(PayoffTensor::new(shape, values)))
}

/// Probability that `own` is player `i`'s best action when the opponents'
/// pure profile is drawn once from `profile` and shared by all own actions.
pub fn mixed_br_prob(tensor: &ProbabilityTensor, player: usize, own: usize, profile: &MixedProfile) -> f64 {
    tensor.contract(player, own, profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::dist::PayoffDistribution;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    #[test]
    fn first_example_entries() {
        let t = build_tensor(&catalog::example1().unwrap()).unwrap();
        close(t.get(0, &[0, 0]), 0.76, 5e-3);
        close(t.get(0, &[1, 0]), 0.24, 5e-3);
        close(t.get(0, &[0, 1]), 0.7, 5e-3);
        close(t.get(0, &[1, 1]), 0.3, 5e-3);
        close(t.get(1, &[0, 0]), 0.4, 5e-3);
        close(t.get(1, &[0, 1]), 0.6, 5e-3);
        close(t.get(1, &[1, 0]), 0.28, 5e-3);
        close(t.get(1, &[1, 1]), 0.72, 5e-3);
    }

    #[test]
    fn second_example_entries() {
        let t = build_tensor(&catalog::example2().unwrap()).unwrap();
        close(t.get(1, &[0, 0]), 0.4, 5e-3);
        close(t.get(1, &[0, 1]), 0.6, 5e-3);
        close(t.get(1, &[1, 0]), 1.0, 5e-3);
        close(t.get(1, &[1, 1]), 0.0, 5e-3);
    }

    #[test]
    fn identical_payoffs_split_uniformly() {
        let d = catalog::bumps(&[(1.0, 0.0)]).unwrap();
        let g = StochasticGame::from_fn(&[&["a", "b", "c"], &["x", "y"]], |_, _| Ok(d.clone())).unwrap();
        let t = build_tensor(&g).unwrap();
        for f in 0..6 {
            close(t.values(0)[f], 1.0 / 3.0, 1e-6);
            close(t.values(1)[f], 0.5, 1e-6);
        }
    }

    #[test]
    fn single_option_player_gets_one() {
        let g = StochasticGame::from_fn(&[&["only"], &["x", "y"]], |_, p| {
            PayoffDistribution::point(p[1] as f64)
        })
        .unwrap();
        let t = build_tensor(&g).unwrap();
        assert_eq!(t.get(0, &[0, 0]), 1.0);
        assert_eq!(t.get(0, &[0, 1]), 1.0);
    }

    #[test]
    fn mixed_best_response_probabilities() {
        let g = catalog::example2().unwrap();
        let t = build_tensor(&g).unwrap();
        let p = MixedProfile::new(vec![vec![5.0 / 6.0, 1.0 / 6.0], vec![0.5, 0.5]]).unwrap();
        close(mixed_br_prob(&t, 1, 0, &p), 0.5, 5e-3);
        let p = MixedProfile::new(vec![vec![0.0, 1.0], vec![0.5, 0.5]]).unwrap();
        close(mixed_br_prob(&t, 1, 0, &p), 1.0, 5e-3);
        let pure = MixedProfile::pure(g.shape(), &[0, 1]);
        assert_eq!(mixed_br_prob(&t, 0, 1, &pure), t.get(0, &[1, 1]));
    }

    #[test]
    fn bimatrix_view() {
        let t = PayoffTensor::from_bimatrix(&[vec![1.0, 2.0], vec![3.0, 4.0]], &[vec![5.0, 6.0], vec![7.0, 8.0]]);
        assert_eq!(t.get(0, &[1, 0]), 3.0);
        assert_eq!(t.get(1, &[0, 1]), 6.0);
        let (a, b) = t.bimatrix().unwrap();
        assert_eq!(a[1][1], 4.0);
        assert_eq!(b[1][0], 7.0);
    }
}
