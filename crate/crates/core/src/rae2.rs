//! Best-response probabilities when every hypothetical own action faces its
//! own, independently drawn opponent profile.
//!
//! An *assignment* maps each own action to the opponent profile it is
//! compared under. Its weight is the product of the opponents' mixing
//! probabilities over all slots, and the win probability of an own action
//! under an assignment is one [`prob_max`](crate::dist::prob_max) call.
//! Because the slots are exchangeable, the values over all own actions sum to
//! one, and at a pure opponent profile they collapse to the ordinary tensor.

use rayon::prelude::*;

use crate::dist::prob_max_all;
use crate::equilibrium::{profile_distance, Concept, EquilibriumResult, DOMINANCE_MARGIN};
use crate::error::{Error, Result};
use crate::game::{MixedProfile, StochasticGame};

/// Default limit on the number of assignments enumerated per player.
pub const DEFAULT_TUPLE_CAP: u128 = 1_000_000;
/// Both indifference conditions must hold this tightly at a reported root.
pub const ROOT_CHECK_TOL: f64 = 1e-6;
/// Finest grid spacing used by [`rae2_mixed_grid`].
pub const GRID_RESOLUTION: f64 = 1e-3;
/// Upper bound on grid points per player in [`rae2_mixed_grid`].
pub const GRID_POINTS: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct Rae2Evaluation {
    pub player: usize,
    pub own: usize,
    pub profile: MixedProfile,
    pub value: f64,
    /// Number of assignments enumerated, `|S₋ᵢ|^|Sᵢ|`.
    pub terms: u128,
}

/// Win probabilities of every own action under every assignment, for one
/// player.
#[derive(Debug, Clone)]
pub struct Rae2Table {
    player: usize,
    own: usize,
    fragments: Vec<Vec<usize>>,
    /// `probs[a][s]`; assignment `a` gives own action `s` the fragment at
    /// base-`|fragments|` digit `s` of `a`.
    probs: Vec<Vec<f64>>,
}

fn assignment_count(fragments: usize, own: usize, cap: u128) -> Result<usize> {
    let terms = (fragments as u128).checked_pow(own as u32).unwrap_or(u128::MAX);
    if terms > cap {
        return Err(Error::TupleExplosion { terms, cap });
    }
    Ok(terms as usize)
}

impl Rae2Table {
    pub fn new(game: &StochasticGame, player: usize, cap: u128) -> Result<Self> {
        if player >= game.players() {
            return Err(Error::InvalidArgument(format!("no player {}", player + 1)));
        }
        let shape = game.shape();
        let own = game.num_strategies(player);
        let fragments = game.opponent_profiles(player);
        let count = assignment_count(fragments.len(), own, cap)?;
        let probs = (0..count)
            .into_par_iter()
            .map(|a| {
                let family: Vec<_> = (0..own)
                    .map(|s| {
                        let frag = &fragments[digit(a, s, fragments.len())];
                        game.payoff(player, &shape.join(player, s, frag))
                    })
                    .collect();
                prob_max_all(&family)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Rae2Table { player, own, fragments, probs })
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn terms(&self) -> u128 {
        self.probs.len() as u128
    }

    /// Value of own action `s` when the opponents play `profile`.
    pub fn value(&self, own: usize, profile: &MixedProfile) -> f64 {
        let weights: Vec<f64> = self
            .fragments
            .iter()
            .map(|f| profile.profile_weight(self.player, f))
            .collect();
        self.value_with(own, &weights)
    }

    /// [`value`](Self::value) with the opponent-fragment weights given directly.
    fn value_with(&self, own: usize, weights: &[f64]) -> f64 {
        let nf = self.fragments.len();
        self.probs
            .iter()
            .enumerate()
            .map(|(a, p)| {
                let w: f64 = (0..self.own).map(|s| weights[digit(a, s, nf)]).product();
                w * p[own]
            })
            .sum()
    }

    fn swapped(&self, a: usize, s: usize, t: usize) -> usize {
        let nf = self.fragments.len();
        let (ds, dt) = (digit(a, s, nf), digit(a, t, nf));
        let pow = |k: usize| nf.pow(k as u32);
        a - ds * pow(s) - dt * pow(t) + dt * pow(s) + ds * pow(t)
    }

    /// The first own action that beats `own` under every assignment, with the
    /// two actions' slots switched for the comparison.
    ///
    /// With more than two own actions the other slots keep their fragments;
    /// treat such results as provisional.
    pub fn dominated_by(&self, own: usize) -> Option<usize> {
        (0..self.own).filter(|&s| s != own).find(|&s| {
            (0..self.probs.len()).all(|a| self.probs[a][s] > self.probs[self.swapped(a, s, own)][own] + DOMINANCE_MARGIN)
        })
    }
}

fn digit(a: usize, k: usize, base: usize) -> usize {
    (a / base.pow(k as u32)) % base
}

/// Probability that `own` wins for `player` with independent opponent draws
/// per own action.
pub fn rae2_prob(game: &StochasticGame, player: usize, own: usize, profile: &MixedProfile, cap: u128) -> Result<Rae2Evaluation> {
    if !profile.matches(game.shape()) {
        return Err(Error::InvalidProfile("profile does not match the game".into()));
    }
    if player >= game.players() || own >= game.num_strategies(player) {
        return Err(Error::InvalidArgument(format!("no strategy {own} for player {}", player + 1)));
    }
    let table = Rae2Table::new(game, player, cap)?;
    Ok(Rae2Evaluation {
        player,
        own,
        profile: profile.clone(),
        value: table.value(own, profile).clamp(0.0, 1.0),
        terms: table.terms(),
    })
}

/// Dominating own action for `own`, if any.
pub fn rae2_is_strictly_dominated(game: &StochasticGame, player: usize, own: usize, cap: u128) -> Result<Option<usize>> {
    Ok(Rae2Table::new(game, player, cap)?.dominated_by(own))
}

/// Roots in `[0, 1]` of `c2·x² + c1·x + c0`, or `None` when the polynomial
/// vanishes identically.
fn unit_roots(c2: f64, c1: f64, c0: f64) -> Option<Vec<f64>> {
    const EPS: f64 = 1e-12;
    let mut roots = Vec::new();
    if c2.abs() < EPS {
        if c1.abs() < EPS {
            return if c0.abs() < EPS { None } else { Some(roots) };
        }
        roots.push(-c0 / c1);
    } else {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc >= 0.0 {
            let sign = if c1 < 0.0 { -1.0 } else { 1.0 };
            let q = -0.5 * (c1 + sign * disc.sqrt());
            roots.push(q / c2);
            if q != 0.0 {
                roots.push(c0 / q);
            }
        }
    }
    let mut inside: Vec<f64> = roots
        .into_iter()
        .filter(|r| (-1e-9..=1.0 + 1e-9).contains(r))
        .map(|r| r.clamp(0.0, 1.0))
        .collect();
    inside.sort_by(f64::total_cmp);
    inside.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    Some(inside)
}

/// Opponent weights on their first strategy that leave `table`'s player
/// indifferent between their two actions; `None` when every weight does.
fn indifference_roots(table: &Rae2Table) -> Option<Vec<f64>> {
    // Assignment digits: own action 0 → bit 0, own action 1 → bit 1.
    let d: Vec<f64> = table.probs.iter().map(|p| p[0] - p[1]).collect();
    let (d00, d10, d01, d11) = (d[0], d[1], d[2], d[3]);
    // D(x) = d00·x² + (d01 + d10)·x(1 − x) + d11·(1 − x)²
    unit_roots(d00 - d01 - d10 + d11, d01 + d10 - 2.0 * d11, d11)
}

/// Mixed equilibria of a two-player game with two strategies each, from the
/// closed-form roots of each player's indifference quadratic.
///
/// A player whose quadratic vanishes identically is indifferent at every
/// opponent mix; the opponent is then reported at `(½, ½)` and the result is
/// flagged degenerate.
pub fn rae2_mixed_2x2(game: &StochasticGame) -> Result<Vec<EquilibriumResult>> {
    if game.shape().dims() != [2, 2] {
        return Err(Error::Unsupported("closed-form solving needs a 2×2 game".into()));
    }
    let tables = [Rae2Table::new(game, 0, 4)?, Rae2Table::new(game, 1, 4)?];
    // Player 1's indifference fixes player 2's mix and vice versa.
    let mut choices = Vec::with_capacity(2);
    let mut degenerate = false;
    for (i, table) in tables.iter().enumerate() {
        match indifference_roots(table) {
            None => {
                degenerate = true;
                choices.push(vec![0.5]);
            }
            Some(r) if r.is_empty() => return Err(Error::NoInteriorRoot { player: i }),
            Some(r) => choices.push(r),
        }
    }
    let mut out = Vec::new();
    for &y in &choices[0] {
        for &x in &choices[1] {
            let pure_x = x == 0.0 || x == 1.0;
            let pure_y = y == 0.0 || y == 1.0;
            if pure_x && pure_y {
                continue;
            }
            let profile = MixedProfile::new(vec![vec![x, 1.0 - x], vec![y, 1.0 - y]])?;
            let values: Vec<f64> = tables.iter().map(|t| t.value(0, &profile)).collect();
            let ok = tables
                .iter()
                .all(|t| (t.value(0, &profile) - t.value(1, &profile)).abs() < ROOT_CHECK_TOL);
            if !ok {
                continue;
            }
            let mut eq = EquilibriumResult::mixed_profile(Concept::Rae2, profile, values);
            eq.degenerate = degenerate;
            out.push(eq);
        }
    }
    Ok(out)
}

/// All mixes on the simplex lattice with denominator `k`.
fn simplex_lattice(n: usize, k: usize) -> Vec<Vec<f64>> {
    fn go(n: usize, left: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() + 1 == n {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / k as f64).collect());
            cur.pop();
            return;
        }
        for c in (0..=left).rev() {
            cur.push(c);
            go(n, left - c, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, k, k, &mut Vec::with_capacity(n), &mut out);
    out
}

fn lattice_size(n: usize, k: usize) -> f64 {
    // C(k + n − 1, n − 1)
    (1..n).map(|j| (k + j) as f64 / j as f64).product()
}

fn lattice_denominator(n: usize) -> usize {
    let finest = (1.0 / GRID_RESOLUTION).round() as usize;
    (1..=finest).rev().find(|&k| lattice_size(n, k) <= GRID_POINTS as f64).unwrap_or(1)
}

/// Grid search for mixed equilibria of any two-player game.
///
/// Each player's simplex is covered by a lattice of at most
/// [`GRID_POINTS`] points (spacing [`GRID_RESOLUTION`] for two strategies).
/// A lattice pair is accepted when every supported action is within the
/// lattice's slack of the best, and accepted pairs within a few lattice
/// steps of each other are merged. Results are flagged approximate.
pub fn rae2_mixed_grid(game: &StochasticGame, cap: u128) -> Result<Vec<EquilibriumResult>> {
    if game.players() != 2 {
        return Err(Error::Unsupported("exactly two players for mixed equilibria".into()));
    }
    let dims = game.shape().dims().to_vec();
    let tables = [Rae2Table::new(game, 0, cap)?, Rae2Table::new(game, 1, cap)?];
    let dens = [lattice_denominator(dims[0]), lattice_denominator(dims[1])];
    let grids = [simplex_lattice(dims[0], dens[0]), simplex_lattice(dims[1], dens[1])];
    let steps = [1.0 / dens[0] as f64, 1.0 / dens[1] as f64];

    // best[i][g] = (values, best-response mask) of player i against the
    // opponent's lattice point g.
    let responses = |i: usize| -> Vec<(Vec<f64>, u64)> {
        let opp = 1 - i;
        let slack = (dims[0] * dims[1]) as f64 * steps[opp];
        grids[opp]
            .par_iter()
            .map(|w| {
                let vals: Vec<f64> = (0..dims[i]).map(|s| tables[i].value_with(s, w)).collect();
                let top = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mask = vals
                    .iter()
                    .enumerate()
                    .filter(|&(_, &v)| v >= top - slack)
                    .fold(0u64, |m, (s, _)| m | 1 << s);
                (vals, mask)
            })
            .collect()
    };
    let best = [responses(0), responses(1)];
    let support_mask = |p: &[f64]| p.iter().enumerate().filter(|&(_, &v)| v > 0.0).fold(0u64, |m, (s, _)| m | 1 << s);
    let masks = [
        grids[0].iter().map(|p| support_mask(p)).collect::<Vec<_>>(),
        grids[1].iter().map(|p| support_mask(p)).collect::<Vec<_>>(),
    ];

    let mut hits: Vec<(f64, usize, usize)> = (0..grids[0].len())
        .into_par_iter()
        .flat_map_iter(|gx| {
            let best = &best;
            let masks = &masks;
            (0..grids[1].len()).filter_map(move |gy| {
                let (sx, sy) = (masks[0][gx], masks[1][gy]);
                if sx.count_ones() == 1 && sy.count_ones() == 1 {
                    return None;
                }
                let (vx, bx) = &best[0][gy];
                let (vy, by) = &best[1][gx];
                if sx & !bx != 0 || sy & !by != 0 {
                    return None;
                }
                let gap = |vals: &[f64], support: u64| {
                    let top = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let low = (0..vals.len())
                        .filter(|&s| support & (1 << s) != 0)
                        .map(|s| vals[s])
                        .fold(f64::INFINITY, f64::min);
                    top - low
                };
                Some((gap(vx, sx).max(gap(vy, sy)), gx, gy))
            })
        })
        .collect();
    hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let radius = 5.0 * steps[0].max(steps[1]);
    let mut out: Vec<EquilibriumResult> = Vec::new();
    for (_, gx, gy) in hits {
        let profile = MixedProfile::new(vec![grids[0][gx].clone(), grids[1][gy].clone()])?;
        if out.iter().any(|e| profile_distance(&e.profile, &profile) <= radius) {
            continue;
        }
        let values = (0..2)
            .map(|i| {
                let vals = &best[i][if i == 0 { gy } else { gx }].0;
                vals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let mut eq = EquilibriumResult::mixed_profile(Concept::Rae2, profile, values);
        eq.approximate = true;
        out.push(eq);
    }
    if !out.is_empty() {
        log::warn!("mixed RAE2 located by grid search; {} approximate result(s)", out.len());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::tensor::{build_tensor, mixed_br_prob};

    fn mix(x: f64, y: f64) -> MixedProfile {
        MixedProfile::new(vec![vec![x, 1.0 - x], vec![y, 1.0 - y]]).unwrap()
    }

    #[test]
    fn example2_quadratic() {
        let g = catalog::example2().unwrap();
        for x in [0.0, 0.5, 1.0] {
            let v = rae2_prob(&g, 1, 0, &mix(x, 0.5), DEFAULT_TUPLE_CAP).unwrap();
            assert_eq!(v.terms, 4);
            let expect = -0.1 * x * x - 0.5 * x + 1.0;
            assert!((v.value - expect).abs() < 5e-3, "{x}: {} vs {expect}", v.value);
        }
    }

    #[test]
    fn example2_mixed_root() {
        let eq = rae2_mixed_2x2(&catalog::example2().unwrap()).unwrap();
        assert_eq!(eq.len(), 1);
        let root = (-5.0 + 45f64.sqrt()) / 2.0;
        assert!((eq[0].profile.player(0)[0] - root).abs() < 1e-3);
        assert!((eq[0].profile.player(1)[0] - root).abs() < 1e-3);
        assert!(!eq[0].degenerate);
    }

    #[test]
    fn pure_opponent_matches_tensor_and_values_partition() {
        let g = catalog::example4(2.5).unwrap();
        let t = build_tensor(&g).unwrap();
        let pure = MixedProfile::pure(g.shape(), &[0, 1]);
        for s in 0..2 {
            let v = rae2_prob(&g, 0, s, &pure, DEFAULT_TUPLE_CAP).unwrap().value;
            assert!((v - mixed_br_prob(&t, 0, s, &pure)).abs() < 1e-9);
        }
        let p = mix(0.3, 0.8);
        let total: f64 = (0..2).map(|s| rae2_prob(&g, 1, s, &p, DEFAULT_TUPLE_CAP).unwrap().value).sum();
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn single_action_player_always_wins() {
        let g = StochasticGame::from_fn(&[&["A"], &["X", "Y"]], |_, p| catalog::bumps(&[(1.0, p[1] as f64)])).unwrap();
        let p = MixedProfile::uniform(g.shape());
        assert_eq!(rae2_prob(&g, 0, 0, &p, 10).unwrap().value, 1.0);
        assert_eq!(rae2_is_strictly_dominated(&g, 0, 0, 10).unwrap(), None);
    }

    #[test]
    fn tuple_cap_is_enforced() {
        let g = catalog::example2().unwrap();
        let err = rae2_prob(&g, 0, 0, &MixedProfile::uniform(g.shape()), 3).unwrap_err();
        assert_eq!(err, Error::TupleExplosion { terms: 4, cap: 3 });
    }

    #[test]
    fn dominance() {
        let g = catalog::dominated_row().unwrap();
        assert_eq!(rae2_is_strictly_dominated(&g, 0, 1, 16).unwrap(), Some(0));
        assert_eq!(rae2_is_strictly_dominated(&g, 0, 0, 16).unwrap(), None);
        let g2 = catalog::example2().unwrap();
        for i in 0..2 {
            for s in 0..2 {
                assert_eq!(rae2_is_strictly_dominated(&g2, i, s, 16).unwrap(), None);
            }
        }
    }

    #[test]
    fn identical_payoffs_are_degenerate() {
        let d = catalog::bumps(&[(1.0, 0.0)]).unwrap();
        let g = StochasticGame::from_fn(&[&["U", "D"], &["L", "R"]], |_, _| Ok(d.clone())).unwrap();
        let eq = rae2_mixed_2x2(&g).unwrap();
        assert_eq!(eq.len(), 1);
        assert!(eq[0].degenerate);
        assert_eq!(eq[0].profile.player(0), &[0.5, 0.5]);
    }

    #[test]
    fn no_root_is_an_error() {
        let g = catalog::dominated_row().unwrap();
        assert!(matches!(rae2_mixed_2x2(&g), Err(Error::NoInteriorRoot { player: 0 })));
    }

    #[test]
    fn quadratic_roots() {
        let r = unit_roots(1.0, -1.0, 0.21).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0] - 0.3).abs() < 1e-12 && (r[1] - 0.7).abs() < 1e-12);
        assert_eq!(unit_roots(0.0, 0.0, 0.0), None);
        assert_eq!(unit_roots(0.0, 0.0, 1.0), Some(vec![]));
        assert_eq!(unit_roots(0.0, 2.0, -1.0), Some(vec![0.5]));
    }

    #[test]
    fn grid_search_agrees_with_closed_form() {
        let g = catalog::example2().unwrap();
        let exact = rae2_mixed_2x2(&g).unwrap();
        let approx = rae2_mixed_grid(&g, DEFAULT_TUPLE_CAP).unwrap();
        assert!(!approx.is_empty());
        assert!(approx.iter().all(|e| e.approximate));
        let best = approx
            .iter()
            .map(|e| profile_distance(&e.profile, &exact[0].profile))
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-2, "{best}");
    }

    #[test]
    fn lattice_shapes() {
        assert_eq!(simplex_lattice(2, 4).len(), 5);
        assert_eq!(simplex_lattice(3, 2).len(), 6);
        assert_eq!(lattice_denominator(2), 1000);
        assert!(lattice_size(3, lattice_denominator(3)) <= GRID_POINTS as f64);
    }
}
