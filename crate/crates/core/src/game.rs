//! Finite games whose payoffs are random variables, and mixed profiles over
//! them.
//!
//! Pure profiles are stored as flat indices in row-major order with player 0
//! varying slowest, which is the lexicographic order of strategy labels in
//! declaration order.

use crate::dist::PayoffDistribution;
use crate::error::{Error, Result};

/// Tolerance on the sum of a mixed strategy.
pub const PROFILE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategySet {
    pub player: usize,
    pub labels: Vec<String>,
}

impl StrategySet {
    pub fn new<S: Into<String>>(player: usize, labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidGame(format!("player {} has no strategies", player + 1)));
        }
        for (k, l) in labels.iter().enumerate() {
            if labels[..k].contains(l) {
                return Err(Error::InvalidGame(format!(
                    "player {} lists strategy `{l}` twice",
                    player + 1
                )));
            }
        }
        Ok(StrategySet { player, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// One strategy index per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PureProfile(pub Vec<usize>);

/// Row-major shape helpers shared by games and tensors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(dims: Vec<usize>) -> Self {
        Shape(dims)
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn players(&self) -> usize {
        self.0.len()
    }

    pub fn num_profiles(&self) -> usize {
        self.0.iter().product()
    }

    pub fn flat_index(&self, profile: &[usize]) -> usize {
        debug_assert_eq!(profile.len(), self.0.len());
        profile.iter().zip(&self.0).fold(0, |acc, (&s, &n)| acc * n + s)
    }

    pub fn profile_at(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.0.len()];
        for (slot, &n) in out.iter_mut().zip(&self.0).rev() {
            *slot = flat % n;
            flat /= n;
        }
        out
    }

    pub fn contains(&self, profile: &[usize]) -> bool {
        profile.len() == self.0.len() && profile.iter().zip(&self.0).all(|(&s, &n)| s < n)
    }

    /// Every choice of strategies for players other than `player`, in
    /// lexicographic order. Each fragment lists the others in player order.
    pub fn opponent_profiles(&self, player: usize) -> Vec<Vec<usize>> {
        let dims: Vec<usize> = self
            .0
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != player)
            .map(|(_, &n)| n)
            .collect();
        let others = Shape(dims);
        let fragments: Vec<Vec<usize>> = others.iter_profiles().collect();
        fragments
    }

    /// All profiles in flat-index order.
    pub fn iter_profiles(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.num_profiles()).map(move |f| self.profile_at(f))
    }

    /// Inserts `own` for `player` into an opponent fragment.
    pub fn join(&self, player: usize, own: usize, fragment: &[usize]) -> Vec<usize> {
        let mut full = Vec::with_capacity(fragment.len() + 1);
        full.extend_from_slice(&fragment[..player]);
        full.push(own);
        full.extend_from_slice(&fragment[player..]);
        full
    }
}

/// A finite game with one payoff distribution per player and pure profile.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticGame {
    strategies: Vec<StrategySet>,
    shape: Shape,
    /// `payoffs[player][flat profile]`
    payoffs: Vec<Vec<PayoffDistribution>>,
}

impl StochasticGame {
    /// Builds a game; `payoffs[i]` lists player `i`'s distributions in flat
    /// profile order. Unnormalized distributions are normalized here.
    pub fn new(strategies: Vec<StrategySet>, payoffs: Vec<Vec<PayoffDistribution>>) -> Result<Self> {
        if strategies.is_empty() {
            return Err(Error::InvalidGame("a game needs at least one player".into()));
        }
        for (i, s) in strategies.iter().enumerate() {
            if s.player != i {
                return Err(Error::InvalidGame(format!(
                    "strategy set {} is tagged as player {}",
                    i + 1,
                    s.player + 1
                )));
            }
            if s.is_empty() {
                return Err(Error::InvalidGame(format!("player {} has no strategies", i + 1)));
            }
        }
        let shape = Shape::new(strategies.iter().map(StrategySet::len).collect());
        if payoffs.len() != strategies.len() {
            return Err(Error::InvalidGame(format!(
                "{} payoff tables for {} players",
                payoffs.len(),
                strategies.len()
            )));
        }
        let n = shape.num_profiles();
        let mut normalized = Vec::with_capacity(payoffs.len());
        for (i, table) in payoffs.into_iter().enumerate() {
            if table.len() != n {
                return Err(Error::InvalidGame(format!(
                    "player {} has {} payoff entries, expected {n}",
                    i + 1,
                    table.len()
                )));
            }
            let table = table
                .into_iter()
                .map(|d| if d.is_normalized() { Ok(d) } else { d.normalize() })
                .collect::<Result<Vec<_>>>()?;
            normalized.push(table);
        }
        Ok(StochasticGame { strategies, shape, payoffs: normalized })
    }

    /// Convenience constructor for games given by label lists and a closure
    /// over `(player, profile)`.
    pub fn from_fn<F>(labels: &[&[&str]], mut payoff: F) -> Result<Self>
    where
        F: FnMut(usize, &[usize]) -> Result<PayoffDistribution>,
    {
        let strategies = labels
            .iter()
            .enumerate()
            .map(|(i, l)| StrategySet::new(i, l.iter().copied()))
            .collect::<Result<Vec<_>>>()?;
        let shape = Shape::new(strategies.iter().map(StrategySet::len).collect());
        let payoffs = (0..strategies.len())
            .map(|i| shape.iter_profiles().map(|p| payoff(i, &p)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(strategies, payoffs)
    }

    pub fn players(&self) -> usize {
        self.strategies.len()
    }

    pub fn strategies(&self) -> &[StrategySet] {
        &self.strategies
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn num_strategies(&self, player: usize) -> usize {
        self.strategies[player].len()
    }

    pub fn payoff(&self, player: usize, profile: &[usize]) -> &PayoffDistribution {
        &self.payoffs[player][self.shape.flat_index(profile)]
    }

    pub fn payoff_flat(&self, player: usize, flat: usize) -> &PayoffDistribution {
        &self.payoffs[player][flat]
    }

    pub fn opponent_profiles(&self, player: usize) -> Vec<Vec<usize>> {
        self.shape.opponent_profiles(player)
    }

    pub fn profile_labels(&self, profile: &[usize]) -> Vec<String> {
        profile
            .iter()
            .zip(&self.strategies)
            .map(|(&s, set)| set.labels[s].clone())
            .collect()
    }

    /// Replaces every payoff distribution through `f`, keeping the strategy sets.
    pub fn map_payoffs<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(usize, usize, &PayoffDistribution) -> Result<PayoffDistribution> + Sync,
    {
        use rayon::prelude::*;
        let payoffs = self
            .payoffs
            .iter()
            .enumerate()
            .map(|(i, table)| {
                table
                    .par_iter()
                    .enumerate()
                    .map(|(flat, d)| f(i, flat, d))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.strategies.clone(), payoffs)
    }

    /// Sub-game keeping only the listed strategy indices for each player.
    pub fn restrict(&self, keep: &[Vec<usize>]) -> Result<Self> {
        if keep.len() != self.players() {
            return Err(Error::InvalidArgument("one keep-list per player is required".into()));
        }
        let strategies = keep
            .iter()
            .enumerate()
            .map(|(i, k)| {
                if k.iter().any(|&s| s >= self.num_strategies(i)) {
                    return Err(Error::InvalidArgument(format!("strategy index out of range for player {}", i + 1)));
                }
                StrategySet::new(i, k.iter().map(|&s| self.strategies[i].labels[s].clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        let sub = Shape::new(keep.iter().map(Vec::len).collect());
        let payoffs = (0..self.players())
            .map(|i| {
                sub.iter_profiles()
                    .map(|p| {
                        let orig: Vec<usize> = p.iter().zip(keep).map(|(&s, k)| k[s]).collect();
                        self.payoff(i, &orig).clone()
                    })
                    .collect()
            })
            .collect();
        Self::new(strategies, payoffs)
    }
}

/// One probability vector per player.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedProfile {
    probs: Vec<Vec<f64>>,
}

impl MixedProfile {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        for (i, p) in probs.iter().enumerate() {
            if p.is_empty() || p.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                return Err(Error::InvalidProfile(format!("player {} has an invalid vector {p:?}", i + 1)));
            }
            let s: f64 = p.iter().sum();
            if (s - 1.0).abs() > PROFILE_TOLERANCE {
                return Err(Error::InvalidProfile(format!("player {} probabilities sum to {s}", i + 1)));
            }
        }
        Ok(MixedProfile { probs })
    }

    /// Every player mixes uniformly.
    pub fn uniform(shape: &Shape) -> Self {
        MixedProfile {
            probs: shape.dims().iter().map(|&n| vec![1.0 / n as f64; n]).collect(),
        }
    }

    /// The degenerate profile playing `profile` with certainty.
    pub fn pure(shape: &Shape, profile: &[usize]) -> Self {
        MixedProfile {
            probs: shape
                .dims()
                .iter()
                .zip(profile)
                .map(|(&n, &s)| (0..n).map(|k| if k == s { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }

    pub fn player(&self, i: usize) -> &[f64] {
        &self.probs[i]
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn players(&self) -> usize {
        self.probs.len()
    }

    pub fn matches(&self, shape: &Shape) -> bool {
        self.probs.len() == shape.players() && self.probs.iter().zip(shape.dims()).all(|(p, &n)| p.len() == n)
    }

    /// `σ(s₋ᵢ) = Π_{j≠i} σ_j(s_j)` for an opponent fragment.
    pub fn profile_weight(&self, player: usize, fragment: &[usize]) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != player)
            .zip(fragment)
            .map(|((_, p), &s)| p[s])
            .product()
    }

    /// Strategies played with probability above `threshold`.
    pub fn support(&self, threshold: f64) -> Vec<Vec<usize>> {
        self.probs
            .iter()
            .map(|p| (0..p.len()).filter(|&k| p[k] > threshold).collect())
            .collect()
    }
}

/// Distribution of player `i`'s payoff when playing `own` against `profile`:
/// the `σ(s₋ᵢ)`-weighted mixture of the pure-profile payoffs.
pub fn mixture_payoff(
    game: &StochasticGame,
    player: usize,
    own: usize,
    profile: &MixedProfile,
) -> Result<PayoffDistribution> {
    if !profile.matches(game.shape()) {
        return Err(Error::InvalidProfile("profile does not match the game".into()));
    }
    let shape = game.shape();
    let parts: Vec<(f64, &PayoffDistribution)> = game
        .opponent_profiles(player)
        .into_iter()
        .map(|frag| {
            let w = profile.profile_weight(player, &frag);
            (w, game.payoff(player, &shape.join(player, own, &frag)))
        })
        .collect();
    PayoffDistribution::mixture(&parts)
}

/// Per-player expected payoff at every pure profile.
pub fn expected_tensor(game: &StochasticGame) -> crate::tensor::PayoffTensor {
    let n = game.shape().num_profiles();
    let values = (0..game.players())
        .map(|i| (0..n).map(|f| game.payoff_flat(i, f).mean()).collect())
        .collect();
    crate::tensor::PayoffTensor::new(game.shape().clone(), values)
}
