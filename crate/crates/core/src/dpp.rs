//! Point-process layer: correlations, exact configuration distributions,
//! local densities, Bogoliubov functionals, void probabilities, and the
//! particle-hole push-forward.
//!
//! On a finite ground set the correlation functions ρ(T) = det K\[T,T\]
//! determine the full configuration distribution by inclusion–exclusion
//! over the subset lattice; that exact table is the ground-truth oracle
//! every other route (L-densities, sampling) is checked against.

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::fredholm::{self, FredholmError};
use crate::jop::{JKernel, JopError};
use crate::linalg;
use crate::space::{Configuration, IndexWindow, PartitionedSpace, SpaceError};
use crate::C64;

/// Largest ground set for which the 2ⁿ subset lattice is enumerated.
pub const DEFAULT_ENUMERATION_CAP: usize = 14;

/// Negative masses above this threshold are treated as roundoff and
/// clamped to zero; anything below it is a hard error.
pub const NEGATIVE_MASS_FLOOR: f64 = -1e-6;

const CLAMP_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DppError {
    #[error("ground set of size {n} exceeds the enumeration cap {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("{context} has non-negligible imaginary part {imag:.3e}")]
    ComplexValue { context: &'static str, imag: f64 },
    #[error("{context} is negative beyond tolerance: {value:.6e} (kernel is not a valid correlation kernel)")]
    NegativeValue { context: &'static str, value: f64 },
    #[error("configuration mass {mass:.6e} below {floor:.0e} at subset {mask:#b}: no point process with this kernel exists", floor = NEGATIVE_MASS_FLOOR)]
    NegativeMass { mask: u64, mass: f64 },
    #[error("distribution sums to {sum} instead of 1")]
    NotNormalized { sum: f64 },
    #[error("‖K^Δ‖ = {norm} is at 1: Det(1−K^Δ) degenerates (void probability 0); use the exact distribution, or thin the kernel first (CLI: `thin --eps`)")]
    WindowNormOne { norm: f64 },
    #[error("thinning factor must lie in (0, 1], got {eps}")]
    ThinningRange { eps: f64 },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Jop(#[from] JopError),
    #[error(transparent)]
    Fredholm(#[from] FredholmError),
}

/// Distinct points x₁..x_k for a k-point correlation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorrelationQuery {
    points: Vec<usize>,
}

impl CorrelationQuery {
    pub fn new(mut points: Vec<usize>) -> Result<Self, SpaceError> {
        points.sort_unstable();
        for w in points.windows(2) {
            if w[0] == w[1] {
                return Err(SpaceError::DuplicateIndex(w[0]));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }
}

/// k-point correlation k^(k)(x₁..x_k) = det K\[q,q\] · w(x₁)⋯w(x_k).
///
/// The determinant of a J-Hermitian minor is real; the weighted form is
/// exactly the principal minor of the operator matrix √w·K·√w. Assumes
/// the kernel passed [`JKernel::check_validity`]; a kernel that did not
/// surfaces here as a complex or negative determinant error.
pub fn correlation(kernel: &JKernel, query: &CorrelationQuery) -> Result<f64, DppError> {
    let n = kernel.n();
    for &p in query.points() {
        if p >= n {
            return Err(SpaceError::OutOfBounds { index: p, n }.into());
        }
    }
    let op = kernel.op_matrix();
    let minor = linalg::determinant(&linalg::principal_submatrix(&op, query.points()));
    real_part(minor, "correlation determinant")
        .and_then(|value| floor_at_zero(value, "correlation determinant"))
}

/// Exact probability mass over all 2ⁿ configurations, *without* the
/// nonnegativity checks: the raw inclusion–exclusion inversion
/// P(γ=S) = Σ_{T⊇S} (−1)^{|T\S|} det K\[T,T\].
///
/// Returns possibly signed masses; [`exact_distribution`] layers the
/// probability checks on top.
pub fn signed_distribution(kernel: &JKernel, cap: usize) -> Result<DistributionTable, DppError> {
    let n = kernel.n();
    if n > cap || n >= 64 {
        return Err(DppError::TooLarge { n, cap });
    }
    let op = kernel.op_matrix();
    let size = 1usize << n;
    let mut masses = Vec::with_capacity(size);
    for mask in 0..size as u64 {
        let minor = linalg::principal_minor(&op, mask, n);
        masses.push(real_part(minor, "correlation determinant")?);
    }
    // in-place superset Möbius inversion over the subset lattice
    for bit in 0..n {
        let step = 1usize << bit;
        for mask in 0..size {
            if mask & step == 0 {
                masses[mask] -= masses[mask | step];
            }
        }
    }
    Ok(DistributionTable {
        space: kernel.space().clone(),
        masses,
        clamped: 0,
        min_raw_mass: 0.0,
    })
}

/// Exact configuration distribution of the DPP with kernel K.
///
/// Masses in (−1e−9, 0) are clamped to zero (roundoff); a mass below the
/// hard floor −1e−6 is an error: it certifies that no point process with
/// these correlations exists.
pub fn exact_distribution(kernel: &JKernel, cap: usize) -> Result<DistributionTable, DppError> {
    let mut table = signed_distribution(kernel, cap)?;
    let mut clamped = 0usize;
    let mut min_raw = 0f64;
    for (mask, mass) in table.masses.iter_mut().enumerate() {
        if *mass < 0.0 {
            min_raw = min_raw.min(*mass);
            if *mass < NEGATIVE_MASS_FLOOR {
                return Err(DppError::NegativeMass {
                    mask: mask as u64,
                    mass: *mass,
                });
            }
            *mass = 0.0;
            clamped += 1;
        }
    }
    table.clamped = clamped;
    table.min_raw_mass = min_raw;
    let sum = table.sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(DppError::NotNormalized { sum });
    }
    Ok(table)
}

/// Local densities on a window via the L-operator:
/// mass(S) = Det(1−K^Δ)·det L\[Δ\]\[S,S\], with L\[Δ\] = K^Δ(1−K^Δ)⁻¹.
///
/// Requires ‖K^Δ‖ < 1; at norm one the void probability vanishes and L
/// blows up, so this refuses rather than regularizes (thin the kernel
/// first, or use the exact distribution).
pub fn densities_via_l(
    kernel: &JKernel,
    delta: &IndexWindow,
) -> Result<DistributionTable, DppError> {
    let restricted = kernel.restrict(delta)?;
    let m = restricted.n();
    if m > DEFAULT_ENUMERATION_CAP {
        return Err(DppError::TooLarge {
            n: m,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    let op = restricted.op_matrix();
    let norm = linalg::operator_norm(&op);
    if norm >= 1.0 - 1e-12 {
        return Err(DppError::WindowNormOne { norm });
    }
    let id = DMatrix::<C64>::identity(m, m);
    let det0 = real_part(linalg::determinant(&(&id - &op)), "Det(1−K^Δ)")?;
    let l_op = restricted.l_transform()?.op_matrix();

    let size = 1usize << m;
    let mut masses = Vec::with_capacity(size);
    let mut clamped = 0usize;
    let mut min_raw = 0f64;
    for mask in 0..size as u64 {
        let minor = real_part(
            linalg::principal_minor(&l_op, mask, m),
            "L-density determinant",
        )?;
        let mut mass = det0 * minor;
        if mass < 0.0 {
            min_raw = min_raw.min(mass);
            if mass < NEGATIVE_MASS_FLOOR {
                return Err(DppError::NegativeMass { mask, mass });
            }
            mass = 0.0;
            clamped += 1;
        }
        masses.push(mass);
    }
    let table = DistributionTable {
        space: restricted.space().clone(),
        masses,
        clamped,
        min_raw_mass: min_raw,
    };
    let sum = table.sum();
    if (sum - 1.0).abs() > 1e-8 {
        return Err(DppError::NotNormalized { sum });
    }
    Ok(table)
}

/// Bogoliubov functional B(φ) = E[∏_{x∈γ}(1+φ(x))], evaluated as the
/// multiplier determinant Det(1 + sgn(φ)√|φ| K √|φ|).
pub fn bogoliubov(kernel: &JKernel, phi: &[f64]) -> Result<f64, DppError> {
    let value = fredholm::det_multiplier(kernel, phi)?;
    real_part(value, "Bogoliubov functional")
}

/// Probability of no points in the window: Det(1−K^Δ).
///
/// Windows at operator norm one get an exact 0 (the no-particle event is
/// null there); otherwise the determinant, floored at zero.
pub fn void_probability(kernel: &JKernel, delta: &IndexWindow) -> Result<f64, DppError> {
    let restricted = kernel.restrict(delta)?;
    let m = restricted.n();
    if m == 0 {
        return Ok(1.0);
    }
    let op = restricted.op_matrix();
    let norm = linalg::operator_norm(&op);
    if (norm - 1.0).abs() <= 1e-9 {
        return Ok(0.0);
    }
    let id = DMatrix::<C64>::identity(m, m);
    let det = real_part(linalg::determinant(&(id - op)), "Det(1−K^Δ)")?;
    floor_at_zero(det, "void probability")
}

/// Correlation kernel of the push-forward under the particle-hole
/// involution: the hat transform K̂.
pub fn pushforward_complement(kernel: &JKernel) -> JKernel {
    kernel.hat()
}

/// Independent ε-thinning: kernel εK. Preserves validity since
/// hat(εK) = ε·hat(K) + (1−ε)P₂.
pub fn thin(kernel: &JKernel, eps: f64) -> Result<JKernel, DppError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(DppError::ThinningRange { eps });
    }
    Ok(kernel.scaled(eps))
}

fn real_part(value: C64, context: &'static str) -> Result<f64, DppError> {
    if value.im.abs() > 1e-9 * value.re.abs().max(1.0) {
        return Err(DppError::ComplexValue {
            context,
            imag: value.im,
        });
    }
    Ok(value.re)
}

fn floor_at_zero(value: f64, context: &'static str) -> Result<f64, DppError> {
    if value < -CLAMP_TOL {
        Err(DppError::NegativeValue { context, value })
    } else {
        Ok(value.max(0.0))
    }
}

/// Exact probability mass over the 2ⁿ subsets of a (small) ground set.
#[derive(Clone, Debug)]
pub struct DistributionTable {
    space: PartitionedSpace,
    masses: Vec<f64>,
    clamped: usize,
    min_raw_mass: f64,
}

impl DistributionTable {
    pub fn space(&self) -> &PartitionedSpace {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    /// Mass of the configuration given as a bitmask.
    pub fn mass(&self, mask: u64) -> f64 {
        self.masses[mask as usize]
    }

    pub fn prob(&self, gamma: &Configuration) -> f64 {
        self.mass(gamma.to_mask())
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Number of tiny negative masses clamped to zero.
    pub fn clamped(&self) -> usize {
        self.clamped
    }

    /// Most negative raw mass observed before clamping (0 when none).
    pub fn min_raw_mass(&self) -> f64 {
        self.min_raw_mass
    }

    pub fn iter(&self) -> impl Iterator<Item = (Configuration, f64)> + '_ {
        self.masses
            .iter()
            .enumerate()
            .map(|(mask, &m)| (Configuration::from_mask(mask as u64, self.n()), m))
    }

    pub fn sum(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn min_mass(&self) -> f64 {
        self.masses.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Total variation distance ½·Σ|p−q| (tables must share a ground set size).
    pub fn total_variation(&self, other: &DistributionTable) -> f64 {
        assert_eq!(self.masses.len(), other.masses.len());
        0.5 * self
            .masses
            .iter()
            .zip(&other.masses)
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>()
    }

    /// Push-forward under the particle-hole involution.
    pub fn complement_image(&self) -> DistributionTable {
        let mut masses = vec![0.0; self.masses.len()];
        for (mask, &m) in self.masses.iter().enumerate() {
            masses[self.space.complement_mask(mask as u64) as usize] += m;
        }
        DistributionTable {
            space: self.space.clone(),
            masses,
            clamped: self.clamped,
            min_raw_mass: self.min_raw_mass,
        }
    }

    /// Marginal distribution of γ ∩ Δ, as a table over the restricted space.
    pub fn marginalize(&self, delta: &IndexWindow) -> Result<DistributionTable, SpaceError> {
        let sub_space = self.space.restrict(delta)?;
        let mut masses = vec![0.0; 1 << delta.len()];
        for (mask, &m) in self.masses.iter().enumerate() {
            let mut sub_mask = 0u64;
            for (pos, &i) in delta.indices().iter().enumerate() {
                if mask >> i & 1 == 1 {
                    sub_mask |= 1 << pos;
                }
            }
            masses[sub_mask as usize] += m;
        }
        Ok(DistributionTable {
            space: sub_space,
            masses,
            clamped: 0,
            min_raw_mass: 0.0,
        })
    }

    /// Inclusion probability Σ_{S ⊇ T} P(S) for T given as a bitmask.
    pub fn inclusion_probability(&self, t_mask: u64) -> f64 {
        self.masses
            .iter()
            .enumerate()
            .filter(|(mask, _)| *mask as u64 & t_mask == t_mask)
            .map(|(_, &m)| m)
            .sum()
    }

    /// Expectation Σ_S P(S)·∏_{x∈S}(1+φ(x)) — the Bogoliubov functional
    /// straight from the table.
    pub fn bogoliubov_sum(&self, phi: &[f64]) -> f64 {
        assert_eq!(phi.len(), self.n());
        self.masses
            .iter()
            .enumerate()
            .map(|(mask, &m)| {
                let mut factor = 1.0;
                for (i, &p) in phi.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        factor *= 1.0 + p;
                    }
                }
                m * factor
            })
            .sum()
    }
}
