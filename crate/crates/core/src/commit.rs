//! Games in which every player commits to one pure action for `M` rounds
//! and is paid the sum of `M` independent draws.
//!
//! Every payoff is replaced by the grid density of its `M`-fold convolution,
//! then the ordinary tensor and equilibrium machinery runs on the result.

use crate::dist::{convolve_power, PayoffDistribution};
use crate::equilibrium::{mixed_equilibria_2p, pure_equilibria, Concept, EquilibriumResult};
use crate::error::{Error, Result};
use crate::game::StochasticGame;
use crate::tensor::{build_tensor, ProbabilityTensor};

/// Cells per narrowest truncation window for the default grid.
pub const CELLS_PER_WINDOW: f64 = 64.0;
/// Refinement stops once no tensor entry moves by this much.
pub const REFINE_TOL: f64 = 1e-3;
/// Upper bound on grid halvings.
pub const MAX_HALVINGS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommitOptions {
    /// Lattice spacing; chosen from the game when `None`.
    pub grid_step: Option<f64>,
    /// Halve the step until the tensor settles.
    pub refine: bool,
}

impl Default for CommitOptions {
    fn default() -> Self {
        CommitOptions { grid_step: None, refine: true }
    }
}

#[derive(Debug, Clone)]
pub struct CommitGame {
    base: StochasticGame,
    m: usize,
    grid_step: f64,
    game: StochasticGame,
    tensor: ProbabilityTensor,
}

impl CommitGame {
    pub fn base(&self) -> &StochasticGame {
        &self.base
    }

    pub fn rounds(&self) -> usize {
        self.m
    }

    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    /// The game whose payoffs are the convolved grid densities.
    pub fn game(&self) -> &StochasticGame {
        &self.game
    }

    pub fn tensor(&self) -> &ProbabilityTensor {
        &self.tensor
    }
}

fn all_payoffs(g: &StochasticGame) -> impl Iterator<Item = &PayoffDistribution> {
    (0..g.players()).flat_map(move |i| (0..g.shape().num_profiles()).map(move |f| g.payoff_flat(i, f)))
}

/// Narrowest truncation window over the game divided by
/// [`CELLS_PER_WINDOW`]. Games with atoms only use an eighth of the smallest
/// gap between distinct atom values, or `1/64` if every atom coincides.
pub fn default_grid_step(g: &StochasticGame) -> f64 {
    let narrowest = all_payoffs(g).filter_map(PayoffDistribution::narrowest_window).reduce(f64::min);
    if let Some(w) = narrowest {
        return w / CELLS_PER_WINDOW;
    }
    let mut values: Vec<f64> = all_payoffs(g).flat_map(|d| d.atoms().iter().map(|a| a.value)).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .reduce(f64::min)
        .map_or(1.0 / 64.0, |gap| gap / 8.0)
}

fn convolved(g: &StochasticGame, m: usize, step: f64) -> Result<(StochasticGame, ProbabilityTensor)> {
    let game = g.map_payoffs(|_, _, d| convolve_power(d, m, step)?.to_distribution())?;
    let tensor = build_tensor(&game)?;
    Ok((game, tensor))
}

fn max_change(a: &ProbabilityTensor, b: &ProbabilityTensor) -> f64 {
    (0..a.players())
        .flat_map(|i| a.values(i).iter().zip(b.values(i)).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

/// Commit version of `g` with the default grid and refinement.
pub fn commit_game(g: &StochasticGame, m: usize) -> Result<CommitGame> {
    commit_game_with(g, m, CommitOptions::default())
}

pub fn commit_game_with(g: &StochasticGame, m: usize, opts: CommitOptions) -> Result<CommitGame> {
    if m == 0 {
        return Err(Error::InvalidArgument("the number of committed rounds must be at least 1".into()));
    }
    let mut step = opts.grid_step.unwrap_or_else(|| default_grid_step(g));
    let (mut game, mut tensor) = convolved(g, m, step)?;
    if opts.refine {
        for _ in 0..MAX_HALVINGS {
            let (finer_game, finer) = convolved(g, m, step / 2.0)?;
            let moved = max_change(&tensor, &finer);
            step /= 2.0;
            game = finer_game;
            tensor = finer;
            log::debug!("commit grid step {step}: tensor moved {moved:.2e}");
            if moved < REFINE_TOL {
                break;
            }
        }
    }
    Ok(CommitGame { base: g.clone(), m, grid_step: step, game, tensor })
}

/// Pure equilibria of the commit tensor, plus mixed ones for two players.
pub fn solve_commit(cg: &CommitGame) -> Result<Vec<EquilibriumResult>> {
    let mut out = pure_equilibria(&cg.tensor, Concept::RaeM);
    if cg.game.players() == 2 {
        out.extend(mixed_equilibria_2p(&cg.tensor, Concept::RaeM)?.equilibria);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn single_round_matches_base_tensor() {
        let g = catalog::example1().unwrap();
        let cg = commit_game(&g, 1).unwrap();
        let base = build_tensor(&g).unwrap();
        assert!(max_change(&base, cg.tensor()) < 1e-3);
        let pures: Vec<_> = solve_commit(&cg)
            .unwrap()
            .into_iter()
            .filter_map(|e| e.pure)
            .map(|p| p.0)
            .collect();
        assert_eq!(pures, vec![vec![0, 1]]);
    }

    #[test]
    fn deterministic_winner_stays_winner() {
        let two = PayoffDistribution::point(2.0).unwrap();
        let one = PayoffDistribution::point(1.0).unwrap();
        let g = StochasticGame::from_fn(&[&["A", "B"], &["X"]], |i, p| {
            Ok(if i == 0 && p[0] == 0 { two.clone() } else { one.clone() })
        })
        .unwrap();
        for m in [1, 3, 10] {
            let cg = commit_game(&g, m).unwrap();
            assert_eq!(cg.tensor().get(0, &[0, 0]), 1.0);
            assert_eq!(cg.tensor().get(0, &[1, 0]), 0.0);
        }
    }

    #[test]
    fn single_profile_game() {
        let g = StochasticGame::from_fn(&[&["A"], &["X"]], |_, _| catalog::bumps(&[(1.0, 0.0)])).unwrap();
        let eq = solve_commit(&commit_game(&g, 4).unwrap()).unwrap();
        assert_eq!(eq.len(), 1);
        assert_eq!(eq[0].pure.as_ref().unwrap().0, vec![0, 0]);
    }

    #[test]
    fn convolved_means_scale() {
        let g = catalog::example1().unwrap();
        let cg = commit_game_with(&g, 3, CommitOptions { grid_step: None, refine: false }).unwrap();
        for f in 0..4 {
            let base = g.payoff_flat(0, f).mean();
            assert!((cg.game().payoff_flat(0, f).mean() - 3.0 * base).abs() < 3e-2);
        }
    }

    #[test]
    fn bad_inputs() {
        let g = catalog::example1().unwrap();
        assert!(commit_game(&g, 0).is_err());
        let coarse = CommitOptions { grid_step: Some(0.5), refine: false };
        assert!(matches!(commit_game_with(&g, 2, coarse), Err(Error::GridTooCoarse { .. })));
    }
}
