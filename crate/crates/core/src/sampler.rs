//! Exact DPP sampling via particle-hole duality.
//!
//! There is no direct sampling algorithm for a J-Hermitian kernel; the
//! designated route samples the Hermitian dual DPP(K̂) by the standard
//! spectral two-phase procedure and pushes every draw through the
//! particle-hole involution. Randomness is a pure function of
//! (seed, sample index): each sample owns a counter-based ChaCha
//! substream, so batches are reproducible for any worker count.

use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::dpp::{self, CorrelationQuery, DistributionTable, DppError, DEFAULT_ENUMERATION_CAP};
use crate::jop::{JKernel, DEFAULT_TOL};
use crate::linalg;
use crate::space::Configuration;
use crate::C64;

/// Hermitian-input eigenvalues are clamped into \[0,1\] within this slack;
/// anything further out is refused.
pub const EIGENVALUE_CLAMP: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("kernel is not Hermitian: block deviation {violation:.3e}")]
    NonHermitian { violation: f64 },
    #[error("eigenvalue {eigenvalue} outside [-{clamp:.0e}, 1+{clamp:.0e}]; not a valid Hermitian DPP kernel", clamp = EIGENVALUE_CLAMP)]
    SpectrumOutOfRange { eigenvalue: f64 },
    #[error("kernel failed the hat-criterion validity check (margin {margin:.3e})")]
    InvalidKernel { margin: f64 },
    #[error(transparent)]
    Dpp(#[from] DppError),
}

/// Reproducible batch of configurations.
#[derive(Clone, Debug, Serialize)]
pub struct SampleBatch {
    pub seed: u64,
    pub count: usize,
    pub configurations: Vec<Configuration>,
}

/// Per-sample generator: substream `index` of the seeded ChaCha stream.
fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Samples a Hermitian DPP with spectrum in \[0,1\] by eigendecomposition:
/// eigenvector i enters the frame with probability λᵢ, then points are
/// drawn sequentially from the resulting projection with Gram–Schmidt
/// downdating. Marginals satisfy P(x ∈ γ) = H(x,x).
pub fn sample_hermitian(
    kernel: &JKernel,
    count: usize,
    seed: u64,
) -> Result<SampleBatch, SamplerError> {
    let op = kernel.op_matrix();
    let violation = linalg::max_abs(&(&op - op.adjoint()));
    if violation > 1e-8 * linalg::max_abs(&op).max(1.0) {
        return Err(SamplerError::NonHermitian { violation });
    }
    let (raw_values, vectors) = linalg::hermitian_eigen(&op);
    let mut values = Vec::with_capacity(raw_values.len());
    for lambda in raw_values {
        if !(-EIGENVALUE_CLAMP..=1.0 + EIGENVALUE_CLAMP).contains(&lambda) {
            return Err(SamplerError::SpectrumOutOfRange { eigenvalue: lambda });
        }
        values.push(lambda.clamp(0.0, 1.0));
    }
    let configurations: Vec<Configuration> = (0..count as u64)
        .into_par_iter()
        .map(|index| draw_one(&values, &vectors, stream_rng(seed, index)))
        .collect();
    Ok(SampleBatch {
        seed,
        count,
        configurations,
    })
}

fn draw_one(values: &[f64], vectors: &DMatrix<C64>, mut rng: ChaCha8Rng) -> Configuration {
    let n = values.len();
    // phase 1: independent Bernoulli(λᵢ) eigenvector selection;
    // one uniform per eigenvalue keeps the stream layout fixed
    let selected: Vec<usize> = (0..n)
        .filter(|&i| rng.random::<f64>() < values[i])
        .collect();
    let mut frame = vectors.select_columns(selected.iter());
    let mut points: Vec<usize> = Vec::with_capacity(selected.len());

    for remaining in (1..=selected.len()).rev() {
        // residual projection diagonal = squared row norms of the frame
        let row_mass: Vec<f64> = (0..n)
            .map(|x| frame.row(x).iter().map(|z| z.norm_sqr()).sum())
            .collect();
        let total: f64 = row_mass.iter().sum();
        let mut target = rng.random::<f64>() * total;
        let mut chosen = n - 1;
        for (x, &mass) in row_mass.iter().enumerate() {
            target -= mass;
            if target <= 0.0 {
                chosen = x;
                break;
            }
        }
        points.push(chosen);
        if remaining == 1 {
            break;
        }
        // eliminate the pivot column so every remaining column vanishes
        // at the chosen point, then re-orthonormalize
        let cols = frame.ncols();
        let pivot_col = (0..cols)
            .max_by(|&a, &b| {
                frame[(chosen, a)]
                    .norm_sqr()
                    .total_cmp(&frame[(chosen, b)].norm_sqr())
            })
            .expect("frame has columns while remaining > 1");
        let pivot = frame[(chosen, pivot_col)];
        if pivot.norm() >= 1e-12 {
            for j in 0..cols {
                if j == pivot_col {
                    continue;
                }
                let factor = frame[(chosen, j)] / pivot;
                for i in 0..n {
                    let correction = factor * frame[(i, pivot_col)];
                    frame[(i, j)] -= correction;
                }
            }
        }
        let keep: Vec<usize> = (0..cols).filter(|&j| j != pivot_col).collect();
        frame = frame.select_columns(keep.iter());
        // modified Gram–Schmidt with a floor on residual norms
        for j in 0..frame.ncols() {
            for prev in 0..j {
                let proj: C64 = (0..n)
                    .map(|i| frame[(i, prev)].conj() * frame[(i, j)])
                    .sum();
                for i in 0..n {
                    let correction = proj * frame[(i, prev)];
                    frame[(i, j)] -= correction;
                }
            }
            let norm: f64 = frame.column(j).norm();
            if norm >= 1e-12 {
                for i in 0..n {
                    frame[(i, j)] /= C64::new(norm, 0.0);
                }
            }
        }
    }
    points.sort_unstable();
    points.dedup();
    Configuration::new(points).expect("points are distinct after dedup")
}

/// Samples the J-Hermitian DPP by duality: draw DPP(K̂) and apply the
/// particle-hole involution to every configuration. Bit-identical to the
/// complement image of [`sample_hermitian`] on hat(K) by construction.
pub fn sample_j(kernel: &JKernel, count: usize, seed: u64) -> Result<SampleBatch, SamplerError> {
    let verdict = kernel.check_validity(DEFAULT_TOL);
    if !verdict.valid {
        return Err(SamplerError::InvalidKernel {
            margin: verdict.margin,
        });
    }
    let dual = kernel.hat();
    let batch = sample_hermitian(&dual, count, seed)?;
    let space = kernel.space();
    let configurations = batch
        .configurations
        .into_iter()
        .map(|gamma| {
            space
                .complement(&gamma)
                .expect("sampled indices are in bounds")
        })
        .collect();
    Ok(SampleBatch {
        seed,
        count,
        configurations,
    })
}

/// One inclusion-probability comparison row.
#[derive(Clone, Debug, Serialize)]
pub struct EstimateRow {
    pub points: Vec<usize>,
    pub exact: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub z: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub count: usize,
    pub seed: u64,
    pub rows: Vec<EstimateRow>,
}

/// Monte Carlo check of correlation determinants: empirical frequency of
/// {γ ⊇ q} against det K\[q,q\], with binomial standard errors; |z| > 4 is
/// flagged.
pub fn estimate(
    kernel: &JKernel,
    queries: &[CorrelationQuery],
    count: usize,
    seed: u64,
) -> Result<EstimateReport, SamplerError> {
    let batch = sample_j(kernel, count, seed)?;
    let mut rows = Vec::with_capacity(queries.len());
    for query in queries {
        let exact = dpp::correlation(kernel, query)?;
        let hits = batch
            .configurations
            .iter()
            .filter(|gamma| query.points().iter().all(|&p| gamma.contains(p)))
            .count();
        let empirical = hits as f64 / count as f64;
        let stderr = (empirical * (1.0 - empirical) / count as f64).sqrt();
        let z = if stderr > 0.0 {
            (empirical - exact) / stderr
        } else if (empirical - exact).abs() <= f64::EPSILON {
            0.0
        } else {
            f64::INFINITY.copysign(empirical - exact)
        };
        rows.push(EstimateRow {
            points: query.points().to_vec(),
            exact,
            empirical,
            stderr,
            z,
            flagged: z.abs() > 4.0,
        });
    }
    Ok(EstimateReport { count, seed, rows })
}

#[derive(Clone, Debug, Serialize)]
pub struct GofReport {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    /// Cells entering the statistic after pooling.
    pub cells_used: usize,
    /// Low-expectation cells pooled together (expected < 5).
    pub pooled_cells: usize,
    pub count: usize,
    pub seed: u64,
}

/// Chi-square goodness of fit of a sampled batch against an exact table.
/// Cells with expected count below 5 are pooled into one.
pub fn chi_square_report(table: &DistributionTable, batch: &SampleBatch) -> GofReport {
    let size = 1usize << table.n();
    let mut observed = vec![0u64; size];
    for gamma in &batch.configurations {
        observed[gamma.to_mask() as usize] += 1;
    }
    let total = batch.count as f64;

    let mut statistic = 0.0;
    let mut cells_used = 0usize;
    let mut pooled_cells = 0usize;
    let mut pool_expected = 0.0;
    let mut pool_observed = 0u64;
    for (mask, &seen) in observed.iter().enumerate() {
        let expected = table.mass(mask as u64) * total;
        if expected < 5.0 {
            pooled_cells += 1;
            pool_expected += expected;
            pool_observed += seen;
        } else {
            let diff = seen as f64 - expected;
            statistic += diff * diff / expected;
            cells_used += 1;
        }
    }
    if pool_expected > 0.0 || pool_observed > 0 {
        if pool_expected > 0.0 {
            let diff = pool_observed as f64 - pool_expected;
            statistic += diff * diff / pool_expected;
            cells_used += 1;
        } else {
            // impossible configurations observed
            statistic = f64::INFINITY;
            cells_used += 1;
        }
    }

    let (degrees_of_freedom, p_value) = if cells_used <= 1 {
        (0, 1.0)
    } else {
        let df = cells_used - 1;
        let p = if statistic.is_finite() {
            1.0 - ChiSquared::new(df as f64).expect("df ≥ 1").cdf(statistic)
        } else {
            0.0
        };
        (df, p)
    };
    GofReport {
        statistic,
        degrees_of_freedom,
        p_value,
        cells_used,
        pooled_cells,
        count: batch.count,
        seed: batch.seed,
    }
}

/// Samples the kernel and chi-square-tests the configuration histogram
/// against the exact distribution (needs the enumeration oracle).
pub fn goodness_of_fit(
    kernel: &JKernel,
    count: usize,
    seed: u64,
) -> Result<GofReport, SamplerError> {
    let table = dpp::exact_distribution(kernel, DEFAULT_ENUMERATION_CAP)?;
    let batch = sample_j(kernel, count, seed)?;
    Ok(chi_square_report(&table, &batch))
}
