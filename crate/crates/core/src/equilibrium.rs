//! Pure and mixed equilibria of per-player tensors, strict dominance, and
//! iterated elimination.
//!
//! Feeding the probability tensor gives risk-averse equilibria; feeding the
//! expected-payoff tensor gives ordinary Nash equilibria.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{MixedProfile, PureProfile, StochasticGame};
use crate::tensor::{build_tensor, PayoffTensor};

/// Slack allowed when comparing tensor entries for best responses.
pub const BEST_RESPONSE_TOL: f64 = 1e-9;
/// Probabilities down to `-NONNEGATIVITY_TOL` are clamped to zero.
pub const NONNEGATIVITY_TOL: f64 = 1e-9;
/// Entries at or below this are outside the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-9;
/// Mixed solutions closer than this are reported once.
pub const DEDUP_TOL: f64 = 1e-7;
/// Required margin for strict dominance.
pub const DOMINANCE_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Concept {
    Nash,
    Rae,
    Rae2,
    RaeM,
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Concept::Nash => "NASH",
            Concept::Rae => "RAE",
            Concept::Rae2 => "RAE2",
            Concept::RaeM => "RAE_M",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Pure,
    Mixed,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Pure => "pure",
            Kind::Mixed => "mixed",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub concept: Concept,
    pub kind: Kind,
    pub profile: MixedProfile,
    /// Set for pure equilibria.
    pub pure: Option<PureProfile>,
    pub support: Vec<Vec<usize>>,
    /// Expected payoff (Nash) or best-response probability (risk-averse
    /// concepts) for each player.
    pub values: Vec<f64>,
    /// The solver could not pin the profile down uniquely; see the concept's
    /// solver for what was reported instead.
    pub degenerate: bool,
    /// Located by a grid search rather than solved exactly.
    pub approximate: bool,
}

impl EquilibriumResult {
    pub fn pure_profile(
        concept: Concept,
        shape: &crate::game::Shape,
        profile: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        let mixed = MixedProfile::pure(shape, &profile);
        EquilibriumResult {
            concept,
            kind: Kind::Pure,
            support: profile.iter().map(|&s| vec![s]).collect(),
            pure: Some(PureProfile(profile)),
            profile: mixed,
            values,
            degenerate: false,
            approximate: false,
        }
    }

    pub fn mixed_profile(concept: Concept, profile: MixedProfile, values: Vec<f64>) -> Self {
        EquilibriumResult {
            concept,
            kind: Kind::Mixed,
            support: profile.support(SUPPORT_THRESHOLD),
            profile,
            pure: None,
            values,
            degenerate: false,
            approximate: false,
        }
    }
}

/// Whether `own` is within tolerance of the best entry for player `i` at the
/// opponent part of `profile`.
fn is_pure_best_response(t: &PayoffTensor, player: usize, profile: &[usize]) -> bool {
    let shape = t.shape();
    let mut alt = profile.to_vec();
    let here = t.get(player, profile);
    (0..shape.dims()[player]).all(|s| {
        alt[player] = s;
        t.get(player, &alt) <= here + BEST_RESPONSE_TOL
    })
}

/// Every pure profile at which each player's entry is maximal over their own
/// deviations. Ties count as best responses.
pub fn pure_equilibria(t: &PayoffTensor, concept: Concept) -> Vec<EquilibriumResult> {
    let shape = t.shape();
    shape
        .iter_profiles()
        .filter(|p| (0..t.players()).all(|i| is_pure_best_response(t, i, p)))
        .map(|p| {
            let values = (0..t.players()).map(|i| t.get(i, &p)).collect();
            EquilibriumResult::pure_profile(concept, shape, p, values)
        })
        .collect()
}

/// Largest gap, over players, between the best own action and the worst
/// action in the support, under `profile`. Zero at an exact equilibrium.
pub fn indifference_residual(t: &PayoffTensor, profile: &MixedProfile) -> f64 {
    (0..t.players())
        .map(|i| {
            let vals: Vec<f64> = (0..t.shape().dims()[i]).map(|s| t.contract(i, s, profile)).collect();
            let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let worst_in_support = profile.player(i)
                .iter()
                .zip(&vals)
                .filter(|(&p, _)| p > SUPPORT_THRESHOLD)
                .map(|(_, &v)| v)
                .fold(f64::INFINITY, f64::min);
            best - worst_in_support
        })
        .fold(0.0, f64::max)
}

/// Outcome of a support enumeration.
#[derive(Debug, Clone, Default)]
pub struct MixedSearch {
    pub equilibria: Vec<EquilibriumResult>,
    /// Support pairs whose indifference system was singular; skipped.
    pub degenerate: Vec<Error>,
}

/// Solves the square system `a·x = b`. `None` when the matrix is singular.
#[allow(clippy::needless_range_loop)]
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - tail) / a[r][r];
    }
    Some(x)
}

/// Mix over `cols` that makes the row player indifferent across `rows` of
/// `payoff`, plus the common value. `payoff[r][c]` is the indifferent
/// player's entry.
fn indifference_mix(payoff: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> Option<(Vec<f64>, f64)> {
    let k = cols.len();
    let mut a = Vec::with_capacity(k + 1);
    let mut b = Vec::with_capacity(k + 1);
    for &r in rows {
        let mut row: Vec<f64> = cols.iter().map(|&c| payoff[r][c]).collect();
        row.push(-1.0);
        a.push(row);
        b.push(0.0);
    }
    let mut norm = vec![1.0; k];
    norm.push(0.0);
    a.push(norm);
    b.push(1.0);
    let sol = solve_square(a, b)?;
    let value = sol[k];
    Some((sol[..k].to_vec(), value))
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for k in start..n {
            cur.push(k);
            go(k + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, size, &mut Vec::new(), &mut out);
    out
}

/// Expands a mix over `support` to a full vector, clamping small negatives.
fn expand(mix: &[f64], support: &[usize], n: usize) -> Option<Vec<f64>> {
    let mut full = vec![0.0; n];
    for (&s, &p) in support.iter().zip(mix) {
        if p < -NONNEGATIVITY_TOL {
            return None;
        }
        full[s] = p.max(0.0);
    }
    let total: f64 = full.iter().sum();
    full.iter_mut().for_each(|p| *p /= total);
    Some(full)
}

fn check_support(t: &PayoffTensor, rows: &[usize], cols: &[usize], concept: Concept) -> Result<Option<EquilibriumResult>> {
    let (a, b) = t.bimatrix()?;
    let (m, n) = (a.len(), a[0].len());
    // Column player's mix makes the row player indifferent, and vice versa.
    let bt: Vec<Vec<f64>> = (0..n).map(|c| (0..m).map(|r| b[r][c]).collect()).collect();
    let degenerate = || Error::DegenerateSupport { rows: rows.to_vec(), cols: cols.to_vec() };
    let (y, v1) = indifference_mix(&a, rows, cols).ok_or_else(degenerate)?;
    let (x, v2) = indifference_mix(&bt, cols, rows).ok_or_else(degenerate)?;
    let (Some(x), Some(y)) = (expand(&x, rows, m), expand(&y, cols, n)) else {
        return Ok(None);
    };
    let tol = BEST_RESPONSE_TOL * v1.abs().max(v2.abs()).max(1.0);
    let row_vals: Vec<f64> = (0..m).map(|r| (0..n).map(|c| a[r][c] * y[c]).sum()).collect();
    let col_vals: Vec<f64> = (0..n).map(|c| (0..m).map(|r| b[r][c] * x[r]).sum()).collect();
    if row_vals.iter().any(|&v| v > v1 + tol) || col_vals.iter().any(|&v| v > v2 + tol) {
        return Ok(None);
    }
    let profile = MixedProfile::new(vec![x, y])?;
    let support = profile.support(SUPPORT_THRESHOLD);
    if support.iter().all(|s| s.len() == 1) {
        return Ok(None);
    }
    Ok(Some(EquilibriumResult::mixed_profile(concept, profile, vec![v1, v2])))
}

/// Support enumeration for two-player tensors.
///
/// Supports are visited by increasing total size and lexicographically within
/// a size; only equal-size supports are considered. Profiles where both
/// players are pure are left to [`pure_equilibria`].
pub fn mixed_equilibria_2p(t: &PayoffTensor, concept: Concept) -> Result<MixedSearch> {
    if t.players() != 2 {
        return Err(Error::Unsupported("exactly two players for mixed equilibria".into()));
    }
    let (m, n) = (t.shape().dims()[0], t.shape().dims()[1]);
    let mut pairs = Vec::new();
    for k in 1..=m.min(n) {
        for rows in subsets(m, k) {
            for cols in subsets(n, k) {
                pairs.push((rows.clone(), cols));
            }
        }
    }
    let outcomes: Vec<Result<Option<EquilibriumResult>>> = pairs
        .par_iter()
        .map(|(rows, cols)| check_support(t, rows, cols, concept))
        .collect();

    let mut search = MixedSearch::default();
    for outcome in outcomes {
        match outcome {
            Ok(Some(eq)) => {
                let dup = search.equilibria.iter().any(|e| profile_distance(&e.profile, &eq.profile) < DEDUP_TOL);
                if !dup {
                    search.equilibria.push(eq);
                }
            }
            Ok(None) => {}
            Err(e @ Error::DegenerateSupport { .. }) => {
                log::debug!("skipping support: {e}");
                search.degenerate.push(e);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(search)
}

pub(crate) fn profile_distance(a: &MixedProfile, b: &MixedProfile) -> f64 {
    a.probs()
        .iter()
        .flatten()
        .zip(b.probs().iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// The first own action whose entry beats `own` by more than the margin at
/// every opponent profile, if any.
pub fn is_strictly_dominated(t: &PayoffTensor, player: usize, own: usize) -> Option<usize> {
    let shape = t.shape();
    let frags = shape.opponent_profiles(player);
    (0..shape.dims()[player]).filter(|&s| s != own).find(|&s| {
        frags.iter().all(|f| {
            t.get(player, &shape.join(player, s, f)) > t.get(player, &shape.join(player, own, f)) + DOMINANCE_MARGIN
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Elimination {
    pub player: usize,
    pub strategy: String,
    pub dominated_by: String,
}

#[derive(Debug, Clone)]
pub struct IesdsOutcome {
    pub game: StochasticGame,
    /// Surviving strategy indices of the original game, per player.
    pub kept: Vec<Vec<usize>>,
    pub trace: Vec<Elimination>,
}

/// Iterated elimination of strictly dominated strategies on the probability
/// tensor. One strategy is removed per round and the tensor is rebuilt,
/// since a player's entries depend on which of their own actions remain.
pub fn iesds(game: &StochasticGame) -> Result<IesdsOutcome> {
    iesds_with(game, |g| Ok(build_tensor(g)?.into_inner()))
}

/// [`iesds`] with a caller-supplied tensor builder.
pub fn iesds_with<F>(game: &StochasticGame, build: F) -> Result<IesdsOutcome>
where
    F: Fn(&StochasticGame) -> Result<PayoffTensor>,
{
    let mut kept: Vec<Vec<usize>> = game.shape().dims().iter().map(|&n| (0..n).collect()).collect();
    let mut current = game.clone();
    let mut trace = Vec::new();
    loop {
        let t = build(&current)?;
        let hit = (0..current.players()).find_map(|i| {
            (0..current.num_strategies(i))
                .find_map(|s| is_strictly_dominated(&t, i, s).map(|by| (i, s, by)))
        });
        let Some((i, s, by)) = hit else { break };
        let labels = &current.strategies()[i].labels;
        trace.push(Elimination {
            player: i,
            strategy: labels[s].clone(),
            dominated_by: labels[by].clone(),
        });
        kept[i].remove(s);
        current = game.restrict(&kept)?;
    }
    Ok(IesdsOutcome { game: current, kept, trace })
}
