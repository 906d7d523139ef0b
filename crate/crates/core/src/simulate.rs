//! Seeded Monte Carlo experiments on a game.
//!
//! Rounds are split into fixed batches; batch `b` draws from a ChaCha stream
//! selected by `b`, so results do not depend on how batches are scheduled
//! across threads.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dist::prob_max;
use crate::error::{Error, Result};
use crate::game::{MixedProfile, StochasticGame};

/// Rounds per random stream.
pub const BATCH: u64 = 10_000;
pub const DEFAULT_ROUNDS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub rounds: u64,
    pub seed: u64,
    /// Player whose payoffs are compared.
    pub player: usize,
}

impl SimConfig {
    pub fn new(rounds: u64, seed: u64, player: usize) -> Self {
        SimConfig { rounds, seed, player }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimReport {
    pub wins: u64,
    pub ties: u64,
    pub rounds: u64,
    /// `wins / rounds`.
    pub proportion: f64,
    /// Three binomial standard errors of `proportion`.
    pub confidence_halfwidth: f64,
}

impl SimReport {
    fn from_counts(wins: u64, ties: u64, rounds: u64) -> Self {
        let p = wins as f64 / rounds as f64;
        SimReport {
            wins,
            ties,
            rounds,
            proportion: p,
            confidence_halfwidth: 3.0 * (p * (1.0 - p) / rounds as f64).sqrt(),
        }
    }
}

/// Samples pure profiles from a mixed profile.
struct ProfileSampler {
    players: Vec<WeightedIndex<f64>>,
}

impl ProfileSampler {
    fn new(p: &MixedProfile) -> Result<Self> {
        let players = p
            .probs()
            .iter()
            .map(|w| WeightedIndex::new(w).map_err(|e| Error::InvalidProfile(e.to_string())))
            .collect::<Result<_>>()?;
        Ok(ProfileSampler { players })
    }

    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut [usize]) {
        for (slot, d) in out.iter_mut().zip(&self.players) {
            *slot = d.sample(rng);
        }
    }
}

fn check(g: &StochasticGame, cfg: &SimConfig, profiles: &[&MixedProfile]) -> Result<()> {
    if cfg.rounds == 0 {
        return Err(Error::InvalidArgument("at least one round is required".into()));
    }
    if cfg.player >= g.players() {
        return Err(Error::InvalidArgument(format!("no player {}", cfg.player + 1)));
    }
    if profiles.iter().any(|p| !p.matches(g.shape())) {
        return Err(Error::InvalidProfile("profile does not match the game".into()));
    }
    Ok(())
}

/// Runs `round` over all batches in parallel and adds up `(wins, ties)`.
fn run_batches<F>(cfg: &SimConfig, streams_per_batch: u64, round: F) -> SimReport
where
    F: Fn(&mut [ChaCha8Rng]) -> Option<bool> + Sync,
{
    let batches = cfg.rounds.div_ceil(BATCH);
    let (wins, ties) = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rngs: Vec<ChaCha8Rng> = (0..streams_per_batch)
                .map(|k| {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(b * streams_per_batch + k);
                    rng
                })
                .collect();
            let n = BATCH.min(cfg.rounds - b * BATCH);
            let (mut wins, mut ties) = (0u64, 0u64);
            for _ in 0..n {
                match round(&mut rngs) {
                    Some(true) => wins += 1,
                    Some(false) => {}
                    None => ties += 1,
                }
            }
            (wins, ties)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    SimReport::from_counts(wins, ties, cfg.rounds)
}

fn outcome(a: f64, b: f64) -> Option<bool> {
    if a == b {
        None
    } else {
        Some(a > b)
    }
}

/// Plays profile `a` and profile `b` independently each round and counts the
/// rounds in which the tested player's payoff under `a` is strictly larger.
pub fn compare_equilibria(g: &StochasticGame, a: &MixedProfile, b: &MixedProfile, cfg: &SimConfig) -> Result<SimReport> {
    check(g, cfg, &[a, b])?;
    let samplers = [ProfileSampler::new(a)?, ProfileSampler::new(b)?];
    let i = cfg.player;
    Ok(run_batches(cfg, 2, |rngs| {
        let mut pay = [0.0; 2];
        let mut s = vec![0; g.players()];
        for (k, sampler) in samplers.iter().enumerate() {
            sampler.draw(&mut rngs[k], &mut s);
            pay[k] = g.payoff(i, &s).sample(&mut rngs[k]);
        }
        outcome(pay[0], pay[1])
    }))
}

/// Draws the opponents' pure profile once per round from `p` and compares
/// the tested player's payoffs for their first and second action under it.
pub fn indifference_test(g: &StochasticGame, p: &MixedProfile, cfg: &SimConfig) -> Result<SimReport> {
    check(g, cfg, &[p])?;
    let i = cfg.player;
    if g.num_strategies(i) != 2 {
        return Err(Error::InvalidArgument(format!("player {} must have exactly two strategies", i + 1)));
    }
    let sampler = ProfileSampler::new(p)?;
    Ok(run_batches(cfg, 1, |rngs| {
        let rng = &mut rngs[0];
        let mut s = vec![0; g.players()];
        sampler.draw(rng, &mut s);
        s[i] = 0;
        let first = g.payoff(i, &s).sample(rng);
        s[i] = 1;
        let second = g.payoff(i, &s).sample(rng);
        outcome(first, second)
    }))
}

/// Exact counterpart of [`compare_equilibria`]: probability that the payoff
/// under `a` exceeds the payoff under `b`, with exact ties split evenly.
pub fn exact_compare(g: &StochasticGame, a: &MixedProfile, b: &MixedProfile, player: usize) -> Result<f64> {
    check(g, &SimConfig::new(1, 0, player), &[a, b])?;
    let shape = g.shape();
    let weight = |p: &MixedProfile, s: &[usize]| -> f64 { s.iter().enumerate().map(|(j, &k)| p.player(j)[k]).product() };
    let profiles: Vec<Vec<usize>> = shape.iter_profiles().collect();
    let mut total = 0.0;
    for s in &profiles {
        let wa = weight(a, s);
        if wa == 0.0 {
            continue;
        }
        for t in &profiles {
            let wb = weight(b, t);
            if wb == 0.0 {
                continue;
            }
            total += wa * wb * prob_max(0, &[g.payoff(player, s), g.payoff(player, t)])?;
        }
    }
    Ok(total)
}

/// Inclusive grid `lo, lo + step, …` up to `hi`; empty when `hi < lo`.
pub fn param_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("bad sweep {lo}:{hi}:{step}")));
    }
    if hi < lo {
        return Ok(Vec::new());
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| lo + k as f64 * step).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub concept_a: String,
    pub concept_b: String,
    pub report: SimReport,
}

/// Runs `experiment` at every parameter value, in order.
pub fn sweep<F, E>(params: &[f64], mut experiment: F) -> std::result::Result<Vec<SweepRow>, E>
where
    F: FnMut(f64) -> std::result::Result<SweepRow, E>,
{
    params.iter().map(|&a| experiment(a)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::dist::PayoffDistribution;

    #[test]
    fn deterministic_payoffs_always_tie() {
        let g = StochasticGame::from_fn(&[&["A"], &["X"]], |_, _| PayoffDistribution::point(1.0)).unwrap();
        let p = MixedProfile::uniform(g.shape());
        let r = compare_equilibria(&g, &p, &p, &SimConfig::new(25_000, 1, 0)).unwrap();
        assert_eq!((r.wins, r.ties, r.proportion), (0, 25_000, 0.0));
    }

    #[test]
    fn reproducible_and_seed_sensitive() {
        let g = catalog::example4(5.0).unwrap();
        let a = MixedProfile::pure(g.shape(), &[0, 1]);
        let b = MixedProfile::pure(g.shape(), &[1, 1]);
        let cfg = SimConfig::new(30_001, 9, 0);
        let r1 = compare_equilibria(&g, &a, &b, &cfg).unwrap();
        let r2 = compare_equilibria(&g, &a, &b, &cfg).unwrap();
        assert_eq!(r1, r2);
        let r3 = compare_equilibria(&g, &a, &b, &SimConfig { seed: 10, ..cfg }).unwrap();
        assert_ne!(r1.wins, r3.wins);
    }

    #[test]
    fn pure_comparison_matches_exact() {
        // (U,R) pays f₁₂ and (D,R) pays f₂₂ to player 1.
        let g = catalog::example4(5.0).unwrap();
        let a = MixedProfile::pure(g.shape(), &[0, 1]);
        let b = MixedProfile::pure(g.shape(), &[1, 1]);
        let exact = exact_compare(&g, &a, &b, 0).unwrap();
        assert!((exact - 0.7).abs() < 1e-6);
        let r = compare_equilibria(&g, &a, &b, &SimConfig::new(100_000, 3, 0)).unwrap();
        assert!((r.proportion - exact).abs() < r.confidence_halfwidth);
    }

    #[test]
    fn identical_actions_look_like_a_fair_coin() {
        let d = catalog::bumps(&[(1.0, 0.0)]).unwrap();
        let g = StochasticGame::from_fn(&[&["U", "D"], &["L", "R"]], |_, _| Ok(d.clone())).unwrap();
        let p = MixedProfile::pure(g.shape(), &[0, 0]);
        let r = indifference_test(&g, &p, &SimConfig::new(100_000, 4, 1)).unwrap();
        assert!((r.proportion - 0.5).abs() < r.confidence_halfwidth);
    }

    #[test]
    fn validation() {
        let g = catalog::remark_atoms().unwrap();
        let p = MixedProfile::uniform(g.shape());
        assert!(indifference_test(&g, &p, &SimConfig::new(10, 0, 0)).is_err());
        assert!(compare_equilibria(&g, &p, &p, &SimConfig::new(0, 0, 0)).is_err());
        assert!(compare_equilibria(&g, &p, &p, &SimConfig::new(10, 0, 1)).is_err());
    }

    #[test]
    fn grids_and_sweeps() {
        assert_eq!(param_grid(0.0, 10.0, 0.5).unwrap().len(), 21);
        assert_eq!(param_grid(0.0, 0.3, 0.1).unwrap().len(), 4);
        assert!(param_grid(1.0, 0.0, 0.5).unwrap().is_empty());
        assert!(param_grid(0.0, 1.0, 0.0).is_err());
        let rows = sweep(&[], |_| -> Result<SweepRow> { unreachable!() }).unwrap();
        assert!(rows.is_empty());
        let g = catalog::example2().unwrap();
        let p = MixedProfile::uniform(g.shape());
        let run = |a: f64| -> Result<SweepRow> {
            Ok(SweepRow {
                param: a,
                concept_a: "L".into(),
                concept_b: "R".into(),
                report: indifference_test(&g, &p, &SimConfig::new(5_000, 2, 1))?,
            })
        };
        assert_eq!(sweep(&[1.0, 1.0], run).unwrap()[0].report, sweep(&[1.0], run).unwrap()[0].report);
    }
}
