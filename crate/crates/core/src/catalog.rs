//! Built-in games used by tests, benchmarks and the shipped game files.
//!
//! All continuous payoffs here are sums of `exp(−20(u − m)²)` bumps cut to
//! `[m − ½, m + ½]`.

use crate::dist::{GaussComponent, PayoffDistribution};
use crate::error::Result;
use crate::game::StochasticGame;

pub const BUMP_RATE: f64 = 20.0;

/// Mixture of unit-width bumps given as `(weight, center)` pairs.
pub fn bumps(parts: &[(f64, f64)]) -> Result<PayoffDistribution> {
    let comps = parts
        .iter()
        .map(|&(w, c)| GaussComponent::new(w, c, BUMP_RATE, c - 0.5, c + 0.5))
        .collect::<Result<Vec<_>>>()?;
    PayoffDistribution::new(comps, vec![])?.normalize()
}

fn symmetric_2x2(table: [[PayoffDistribution; 2]; 2]) -> Result<StochasticGame> {
    StochasticGame::from_fn(&[&["U", "D"], &["L", "R"]], |_, p| Ok(table[p[0]][p[1]].clone()))
}

/// Two Nash equilibria at `(U,L)` and `(D,R)`; the only risk-averse one is `(U,R)`.
pub fn example1() -> Result<StochasticGame> {
    let f4 = bumps(&[(3.0, 2.0), (2.0, 7.0)])?;
    let f3 = bumps(&[(1.0, 3.0)])?;
    let f3_hat = bumps(&[(3.0, 1.0), (2.0, 6.0)])?;
    let f5 = bumps(&[(7.0, 2.0), (3.0, 12.0)])?;
    symmetric_2x2([[f4, f3], [f3_hat, f5]])
}

/// Pure risk-averse equilibria `(U,R)` and `(D,L)` plus a mixed one at 5/6.
pub fn example2() -> Result<StochasticGame> {
    let f4 = bumps(&[(3.0, 2.0), (2.0, 7.0)])?;
    let f3 = bumps(&[(1.0, 3.0)])?;
    let f1 = bumps(&[(1.0, 1.0)])?;
    symmetric_2x2([[f4, f3.clone()], [f3, f1]])
}

/// The one-parameter family whose Nash structure changes at `a = 10/3` and `a = 6`.
pub fn example4(a: f64) -> Result<StochasticGame> {
    let f11 = bumps(&[(3.0, 1.0), (2.0, a)])?;
    let f12 = bumps(&[(1.0, 3.0)])?;
    let f22 = bumps(&[(7.0, 2.0), (3.0, a + 2.0)])?;
    symmetric_2x2([[f11, f12.clone()], [f12, f22]])
}

/// One player choosing between three discrete payoffs that tie often.
pub fn remark_atoms() -> Result<StochasticGame> {
    let table = [
        PayoffDistribution::discrete(&[(1.0, 0.8), (2.0, 0.2)])?,
        PayoffDistribution::point(1.0)?,
        PayoffDistribution::discrete(&[(1.0, 0.5), (2.0, 0.5)])?,
    ];
    StochasticGame::from_fn(&[&["X", "Y", "Z"]], |_, p| Ok(table[p[0]].clone()))
}

/// Player 1's `U` row always pays 5 and `D` always pays 1; player 2 always
/// gets 3. `D` is strictly dominated.
pub fn dominated_row() -> Result<StochasticGame> {
    StochasticGame::from_fn(&[&["U", "D"], &["L", "R"]], |i, p| match (i, p[0]) {
        (0, 0) => PayoffDistribution::point(5.0),
        (0, _) => PayoffDistribution::point(1.0),
        _ => PayoffDistribution::point(3.0),
    })
}
