//! Seeded random games shared by the integration suites.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riskaverse::{Atom, GaussComponent, PayoffDistribution, StochasticGame};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One to three truncated Gaussian bumps with random shapes.
pub fn random_continuous(rng: &mut ChaCha8Rng) -> PayoffDistribution {
    let k = rng.random_range(1..=3);
    let comps = (0..k)
        .map(|_| {
            let center = rng.random_range(0.0..10.0);
            let left = rng.random_range(0.2..1.5);
            let right = rng.random_range(0.2..1.5);
            let shift = rng.random_range(-0.3..0.3);
            GaussComponent::new(
                rng.random_range(0.5..3.0),
                center + shift,
                rng.random_range(2.0..40.0),
                center - left,
                center + right,
            )
            .unwrap()
        })
        .collect();
    PayoffDistribution::new(comps, vec![]).unwrap().normalize().unwrap()
}

/// Atoms on a small integer grid, so ties are common.
pub fn random_atoms(rng: &mut ChaCha8Rng) -> PayoffDistribution {
    let mut values: Vec<f64> = (0..5).map(f64::from).collect();
    let k = rng.random_range(1..=3);
    let atoms = (0..k)
        .map(|_| {
            let v = values.swap_remove(rng.random_range(0..values.len()));
            Atom::new(v, rng.random_range(0.1..1.0))
        })
        .collect();
    PayoffDistribution::new(vec![], atoms).unwrap().normalize().unwrap()
}

/// Atoms at continuous random values, mixed with bumps half of the time.
pub fn random_mixed(rng: &mut ChaCha8Rng) -> PayoffDistribution {
    let atoms: Vec<Atom> = (0..rng.random_range(1..=2))
        .map(|k| Atom::new(rng.random_range(0.0..10.0) + k as f64 * 1e-3, rng.random_range(0.1..1.0)))
        .collect();
    let discrete = PayoffDistribution::new(vec![], atoms).unwrap().normalize().unwrap();
    if rng.random_bool(0.5) {
        PayoffDistribution::mixture(&[(0.5, &discrete), (0.5, &random_continuous(rng))]).unwrap()
    } else {
        discrete
    }
}

pub fn random_game<F>(rng: &mut ChaCha8Rng, dims: &[usize], mut payoff: F) -> StochasticGame
where
    F: FnMut(&mut ChaCha8Rng) -> PayoffDistribution,
{
    let names: Vec<Vec<String>> = dims
        .iter()
        .enumerate()
        .map(|(i, &n)| (0..n).map(|s| format!("p{}s{}", i + 1, s + 1)).collect())
        .collect();
    let refs: Vec<Vec<&str>> = names.iter().map(|v| v.iter().map(String::as_str).collect()).collect();
    let labels: Vec<&[&str]> = refs.iter().map(Vec::as_slice).collect();
    StochasticGame::from_fn(&labels, |_, _| Ok(payoff(rng))).unwrap()
}

/// Two-player game with 2–3 strategies each and continuous payoffs.
pub fn random_two_player(seed: u64) -> StochasticGame {
    let mut r = rng(seed);
    let dims = [r.random_range(2..=3), r.random_range(2..=3)];
    random_game(&mut r, &dims, random_continuous)
}

/// Any number of players from one to three, any payoff flavour.
pub fn random_any(seed: u64) -> StochasticGame {
    let mut r = rng(seed);
    let players = r.random_range(1..=3);
    let dims: Vec<usize> = (0..players).map(|_| r.random_range(1..=3)).collect();
    match seed % 3 {
        0 => random_game(&mut r, &dims, random_continuous),
        1 => random_game(&mut r, &dims, random_atoms),
        _ => random_game(&mut r, &dims, random_mixed),
    }
}

/// 2×2 or 2×3 atom game.
pub fn random_atom_game(seed: u64) -> StochasticGame {
    let mut r = rng(seed);
    let dims = [2, r.random_range(2..=3)];
    random_game(&mut r, &dims, random_atoms)
}

/// Exact `P(candidate is the maximum)` for atom-only families by enumerating
/// every joint outcome; ties split evenly.
pub fn brute_force_prob_max(candidate: usize, family: &[&PayoffDistribution]) -> f64 {
    fn go(k: usize, family: &[&PayoffDistribution], picked: &mut Vec<f64>, weight: f64, candidate: usize) -> f64 {
        if k == family.len() {
            let top = picked.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if picked[candidate] < top {
                return 0.0;
            }
            let ties = picked.iter().filter(|&&v| v == top).count();
            return weight / ties as f64;
        }
        let mut total = 0.0;
        for a in family[k].atoms() {
            picked.push(a.value);
            total += go(k + 1, family, picked, weight * a.prob, candidate);
            picked.pop();
        }
        total
    }
    go(0, family, &mut Vec::new(), 1.0, candidate)
}

/// Binomial 3σ bound around an exact probability.
pub fn three_sigma(q: f64, n: u64) -> f64 {
    3.0 * (q * (1.0 - q) / n as f64).sqrt()
}
