//! Payoff random variables: mixtures of truncated Gaussian bumps and point
//! masses.
//!
//! A [`PayoffDistribution`] carries unnormalized weights until
//! [`PayoffDistribution::normalize`] rescales it to unit total mass. Every
//! other operation in the crate expects normalized distributions.

mod grid;
mod maximum;

pub use grid::{convolve_power, discretize, GridDensity, MIN_CELLS_PER_WINDOW};
pub use maximum::{prob_max, prob_max_all};

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Tolerance on total mass for a distribution to count as normalized.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// One term `weight · exp(−rate·(u − center)²)` restricted to `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussComponent {
    pub weight: f64,
    pub center: f64,
    pub rate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl GaussComponent {
    pub fn new(weight: f64, center: f64, rate: f64, lo: f64, hi: f64) -> Result<Self> {
        let c = GaussComponent { weight, center, rate, lo, hi };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        let all_finite = [self.weight, self.center, self.rate, self.lo, self.hi]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidComponent(format!("non-finite field in {self:?}")));
        }
        if !(self.weight > 0.0) {
            return Err(Error::InvalidComponent(format!("weight {} must be positive", self.weight)));
        }
        if !(self.rate > 0.0) {
            return Err(Error::InvalidComponent(format!("rate {} must be positive", self.rate)));
        }
        if !(self.lo < self.hi) {
            return Err(Error::InvalidComponent(format!(
                "window [{}, {}] is empty",
                self.lo, self.hi
            )));
        }
        if !(self.kernel_mass(self.lo, self.hi) > 0.0) {
            return Err(Error::InvalidComponent(format!(
                "window [{}, {}] carries no mass for center {}",
                self.lo, self.hi, self.center
            )));
        }
        Ok(())
    }

    /// `∫ exp(−rate·(u − center)²) du` over `[a, b] ∩ [lo, hi]`, without the weight.
    pub(crate) fn kernel_mass(&self, a: f64, b: f64) -> f64 {
        let a = a.max(self.lo);
        let b = b.min(self.hi);
        if !(b > a) {
            return 0.0;
        }
        let s = self.rate.sqrt();
        0.5 * (PI / self.rate).sqrt() * erf_diff(s * (a - self.center), s * (b - self.center))
    }

    /// Probability mass of the component (weight included).
    pub fn mass(&self) -> f64 {
        self.weight * self.kernel_mass(self.lo, self.hi)
    }

    pub(crate) fn density(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            0.0
        } else {
            let d = x - self.center;
            self.weight * (-self.rate * d * d).exp()
        }
    }

    pub(crate) fn mass_below(&self, x: f64) -> f64 {
        self.weight * self.kernel_mass(self.lo, x)
    }

    fn kernel(&self, u: f64) -> f64 {
        let d = u - self.center;
        (-self.rate * d * d).exp()
    }

    /// `∫ u · density(u) du`.
    fn first_moment(&self) -> f64 {
        let z = self.kernel_mass(self.lo, self.hi);
        let tail = (self.kernel(self.lo) - self.kernel(self.hi)) / (2.0 * self.rate);
        self.weight * (self.center * z + tail)
    }

    /// `∫ (u − center)² · density(u) du`.
    fn second_central_moment(&self) -> f64 {
        let z = self.kernel_mass(self.lo, self.hi);
        let tl = self.lo - self.center;
        let th = self.hi - self.center;
        let boundary = (tl * self.kernel(self.lo) - th * self.kernel(self.hi)) / (2.0 * self.rate);
        self.weight * (z / (2.0 * self.rate) + boundary)
    }

    /// Fraction of the untruncated Gaussian that falls inside the window.
    fn window_fraction(&self) -> f64 {
        self.kernel_mass(self.lo, self.hi) / (PI / self.rate).sqrt()
    }

    fn sample<R: Rng + ?Sized>(&self, inside: f64, rng: &mut R) -> f64 {
        if inside > 0.25 {
            let sd = (0.5 / self.rate).sqrt();
            loop {
                let z: f64 = rng.sample(StandardNormal);
                let x = self.center + sd * z;
                if x >= self.lo && x <= self.hi {
                    return x;
                }
            }
        }
        // Inverse CDF by bisection for windows deep in a tail.
        let target = rng.random::<f64>() * self.kernel_mass(self.lo, self.hi);
        let (mut a, mut b) = (self.lo, self.hi);
        for _ in 0..64 {
            let m = 0.5 * (a + b);
            if self.kernel_mass(self.lo, m) < target {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}

/// `erf(b) − erf(a)` for `a ≤ b`, using `erfc` on one-sided intervals so
/// that far-tail windows keep their relative precision.
fn erf_diff(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        libm::erfc(a) - libm::erfc(b)
    } else if b <= 0.0 {
        libm::erfc(-b) - libm::erfc(-a)
    } else {
        libm::erf(b) - libm::erf(a)
    }
}

/// A point mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub prob: f64,
}

impl Atom {
    pub fn new(value: f64, prob: f64) -> Self {
        Atom { value, prob }
    }
}

/// Density `Σ components + Σ atoms`. Atoms are kept sorted by value.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffDistribution {
    components: Vec<GaussComponent>,
    atoms: Vec<Atom>,
    normalized: bool,
    component_mass: Vec<f64>,
    component_inside: Vec<f64>,
    atom_cumulative: Vec<f64>,
}

impl PayoffDistribution {
    /// Builds an unnormalized distribution after validating every part.
    pub fn new(components: Vec<GaussComponent>, mut atoms: Vec<Atom>) -> Result<Self> {
        if components.is_empty() && atoms.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        for c in &components {
            c.validate()?;
        }
        for a in &atoms {
            if !a.value.is_finite() {
                return Err(Error::InvalidAtom(format!("value {} is not finite", a.value)));
            }
            if !(a.prob > 0.0) || !a.prob.is_finite() {
                return Err(Error::InvalidAtom(format!(
                    "probability {} at value {} must be positive",
                    a.prob, a.value
                )));
            }
        }
        atoms.sort_by(|a, b| a.value.total_cmp(&b.value));
        if let Some(w) = atoms.windows(2).find(|w| w[0].value == w[1].value) {
            return Err(Error::InvalidAtom(format!("duplicate atom value {}", w[0].value)));
        }
        Ok(Self::assemble(components, atoms, false))
    }

    fn assemble(components: Vec<GaussComponent>, atoms: Vec<Atom>, normalized: bool) -> Self {
        let component_mass = components.iter().map(GaussComponent::mass).collect();
        let component_inside = components.iter().map(GaussComponent::window_fraction).collect();
        let atom_cumulative = atoms
            .iter()
            .scan(0.0, |acc, a| {
                *acc += a.prob;
                Some(*acc)
            })
            .collect();
        PayoffDistribution {
            components,
            atoms,
            normalized,
            component_mass,
            component_inside,
            atom_cumulative,
        }
    }

    /// A single normalized truncated Gaussian.
    pub fn gaussian(center: f64, rate: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![GaussComponent::new(1.0, center, rate, lo, hi)?], vec![])?.normalize()
    }

    /// A normalized distribution concentrated at `value`.
    pub fn point(value: f64) -> Result<Self> {
        Self::new(vec![], vec![Atom::new(value, 1.0)])?.normalize()
    }

    /// A normalized discrete distribution from `(value, weight)` pairs.
    pub fn discrete(pairs: &[(f64, f64)]) -> Result<Self> {
        let atoms = pairs.iter().map(|&(v, p)| Atom::new(v, p)).collect();
        Self::new(vec![], atoms)?.normalize()
    }

    /// Normalized mixture `Σ w_k · d_k`; terms with zero weight are dropped
    /// and atoms at equal values are merged.
    pub fn mixture(parts: &[(f64, &PayoffDistribution)]) -> Result<Self> {
        let mut components = Vec::new();
        let mut atoms: Vec<Atom> = Vec::new();
        for &(w, d) in parts {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidArgument(format!("mixture weight {w}")));
            }
            if w == 0.0 {
                continue;
            }
            components.extend(d.components.iter().map(|c| GaussComponent { weight: c.weight * w, ..*c }));
            atoms.extend(d.atoms.iter().map(|a| Atom::new(a.value, a.prob * w)));
        }
        atoms.sort_by(|a, b| a.value.total_cmp(&b.value));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.value == a.value => last.prob += a.prob,
                _ => merged.push(a),
            }
        }
        Self::new(components, merged)?.normalize()
    }

    pub fn components(&self) -> &[GaussComponent] {
        &self.components
    }

    /// Atoms in increasing order of value.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn total_mass(&self) -> f64 {
        self.component_mass.iter().sum::<f64>() + self.atom_cumulative.last().copied().unwrap_or(0.0)
    }

    /// Rescales weights and atom probabilities so the total mass is one.
    pub fn normalize(&self) -> Result<Self> {
        let total = self.total_mass();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::ZeroMass);
        }
        let scale = 1.0 / total;
        let components = self
            .components
            .iter()
            .map(|c| GaussComponent { weight: c.weight * scale, ..*c })
            .collect();
        let atoms = self.atoms.iter().map(|a| Atom::new(a.value, a.prob * scale)).collect();
        Ok(Self::assemble(components, atoms, true))
    }

    pub(crate) fn ensure_normalized(&self) -> Result<()> {
        if self.normalized {
            Ok(())
        } else {
            Err(Error::NotNormalized)
        }
    }

    /// Probability mass of each Gaussian component.
    pub fn component_masses(&self) -> &[f64] {
        &self.component_mass
    }

    /// Continuous density at `x`; atoms do not contribute.
    pub fn pdf(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.density(x)).sum()
    }

    /// `P(U ≤ x)`, atoms at `x` included.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|a| a.value <= x);
        (self.continuous_cdf(x) + self.atom_prefix(k)).clamp(0.0, 1.0)
    }

    /// `P(U < x)`.
    pub fn cdf_below(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|a| a.value < x);
        (self.continuous_cdf(x) + self.atom_prefix(k)).clamp(0.0, 1.0)
    }

    /// `P(U = x)`; nonzero only at atoms.
    pub fn atom_mass_at(&self, x: f64) -> f64 {
        match self.atoms.binary_search_by(|a| a.value.total_cmp(&x)) {
            Ok(k) => self.atoms[k].prob,
            Err(_) => 0.0,
        }
    }

    fn continuous_cdf(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.mass_below(x)).sum()
    }

    fn atom_prefix(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.atom_cumulative[k - 1]
        }
    }

    pub fn mean(&self) -> f64 {
        self.components.iter().map(GaussComponent::first_moment).sum::<f64>()
            + self.atoms.iter().map(|a| a.value * a.prob).sum::<f64>()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        let continuous: f64 = self
            .components
            .iter()
            .zip(&self.component_mass)
            .map(|(c, &m)| {
                // E[(U − μ)²] = E[(U − c)²] + 2(c − μ)E[U − c] + (c − μ)² per component.
                let shift = c.center - mu;
                let first = c.first_moment() - c.center * m;
                c.second_central_moment() + 2.0 * shift * first + shift * shift * m
            })
            .sum();
        continuous + self.atoms.iter().map(|a| a.prob * (a.value - mu).powi(2)).sum::<f64>()
    }

    /// Smallest and largest value with positive probability.
    pub fn support(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in &self.components {
            lo = lo.min(c.lo);
            hi = hi.max(c.hi);
        }
        if let (Some(first), Some(last)) = (self.atoms.first(), self.atoms.last()) {
            lo = lo.min(first.value);
            hi = hi.max(last.value);
        }
        (lo, hi)
    }

    /// Width of the narrowest truncation window, if there are components.
    pub fn narrowest_window(&self) -> Option<f64> {
        self.components.iter().map(|c| c.hi - c.lo).reduce(f64::min)
    }

    /// One draw. Component or atom is chosen by mass, then the component is
    /// sampled by rejection or, for windows that keep little of the
    /// Gaussian, by inverse CDF.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut u = rng.random::<f64>() * self.total_mass();
        for (k, c) in self.components.iter().enumerate() {
            let m = self.component_mass[k];
            if u < m {
                return c.sample(self.component_inside[k], rng);
            }
            u -= m;
        }
        if self.atoms.is_empty() {
            // Rounding can leave u just past the last component.
            let k = self.components.len() - 1;
            return self.components[k].sample(self.component_inside[k], rng);
        }
        let idx = self
            .atom_cumulative
            .partition_point(|&cum| cum <= u)
            .min(self.atoms.len() - 1);
        self.atoms[idx].value
    }
}
