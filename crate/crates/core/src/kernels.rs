//! Kernel constructors: the graph-projection family from an operator G,
//! random valid J-Hermitian kernels for fuzz corpora, and Nyström
//! discretization of continuous block kernels.

use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::jop::{hat_of, JKernel, JopError};
use crate::linalg;
use crate::space::{Part, PartitionedSpace};
use crate::C64;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("G must be {expected_rows}×{expected_cols} (|X₂|×|X₁|), got {rows}×{cols}")]
    GDimensions {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error(
        "failed to invert 1+G*G; this cannot happen for finite G unless entries are non-finite"
    )]
    GramInversion,
    #[error("rank {rank} exceeds ground set size {n}")]
    RankTooLarge { rank: usize, n: usize },
    #[error("norm cap must lie in (0, 1], got {norm_cap}")]
    NormCapRange { norm_cap: f64 },
    #[error("points_per_part must be at least 1")]
    ZeroPoints,
    #[error("kernel block {block} evaluated to a non-finite value at ({x}, {y})")]
    NonFinite { block: &'static str, x: f64, y: f64 },
    #[error(transparent)]
    Jop(#[from] JopError),
}

/// Bounded operator G mapping the X₁ block into the X₂ block,
/// stored as an |X₂|×|X₁| matrix in the orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct GOperator {
    matrix: DMatrix<C64>,
}

impl GOperator {
    pub fn new(matrix: DMatrix<C64>) -> Self {
        Self { matrix }
    }

    pub fn from_real(matrix: DMatrix<f64>) -> Self {
        Self {
            matrix: matrix.map(|x| C64::new(x, 0.0)),
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }
}

/// J-Hermitian kernel whose hat transform is the orthogonal projection
/// onto the graph subspace {h ⊕ Gh | h ∈ L²(X₁)}.
///
/// The projection is assembled from its closed-form blocks
/// [[M, MG*], [GM, GMG*]] with M = (1+G*G)⁻¹, and the kernel is its hat
/// (the hat transform is an involution, so hat(K) recovers the
/// projection exactly). Blocks of the result: K₁₁ = (1+G*G)⁻¹,
/// K₂₂ = (1+GG*)⁻¹, K₂₁ = G(1+G*G)⁻¹, K₁₂ = −(1+G*G)⁻¹G*.
/// In particular hat(from_g(0)) = P₁ and rank(hat K) = |X₁|.
pub fn from_g(space: &PartitionedSpace, g: &GOperator) -> Result<JKernel, KernelError> {
    let n1 = space.count_of(Part::One);
    let n2 = space.count_of(Part::Two);
    let gm = g.matrix();
    if gm.nrows() != n2 || gm.ncols() != n1 {
        return Err(KernelError::GDimensions {
            expected_rows: n2,
            expected_cols: n1,
            rows: gm.nrows(),
            cols: gm.ncols(),
        });
    }
    let gram = gm.adjoint() * gm;
    let m = (DMatrix::<C64>::identity(n1, n1) + gram)
        .try_inverse()
        .ok_or(KernelError::GramInversion)?;

    let p11 = m.clone();
    let p12 = &m * gm.adjoint();
    let p21 = gm * &m;
    let p22 = gm * &m * gm.adjoint();

    let projection = assemble_blocks(space, &p11, &p12, &p21, &p22);
    debug_assert!(
        linalg::max_abs(&(&projection * &projection - &projection)) <= 1e-10,
        "graph projection must be idempotent"
    );
    debug_assert!(
        linalg::max_abs(&(&projection - projection.adjoint())) <= 1e-10,
        "graph projection must be Hermitian"
    );

    let op = hat_of(&projection, space);
    Ok(JKernel::from_op_matrix(space.clone(), op)?)
}

/// Places part-indexed blocks at global (possibly interleaved) indices.
fn assemble_blocks(
    space: &PartitionedSpace,
    b11: &DMatrix<C64>,
    b12: &DMatrix<C64>,
    b21: &DMatrix<C64>,
    b22: &DMatrix<C64>,
) -> DMatrix<C64> {
    let n = space.n();
    let mut pos = vec![0usize; n];
    let mut seen1 = 0;
    let mut seen2 = 0;
    for (i, slot) in pos.iter_mut().enumerate() {
        match space.part(i) {
            Part::One => {
                *slot = seen1;
                seen1 += 1;
            }
            Part::Two => {
                *slot = seen2;
                seen2 += 1;
            }
        }
    }
    DMatrix::from_fn(n, n, |i, j| match (space.part(i), space.part(j)) {
        (Part::One, Part::One) => b11[(pos[i], pos[j])],
        (Part::One, Part::Two) => b12[(pos[i], pos[j])],
        (Part::Two, Part::One) => b21[(pos[i], pos[j])],
        (Part::Two, Part::Two) => b22[(pos[i], pos[j])],
    })
}

/// Parameters for [`random_valid`].
#[derive(Clone, Copy, Debug)]
pub struct RandomKernelSpec {
    /// Number of nonzero hat eigenvalues; defaults to full rank
    /// (or n/2 for projections).
    pub rank: Option<usize>,
    /// Draw a random rank-r orthogonal projection instead of a spectrum
    /// in [0, norm_cap].
    pub projection: bool,
    /// Upper bound for the hat spectrum, in (0, 1].
    pub norm_cap: f64,
}

impl Default for RandomKernelSpec {
    fn default() -> Self {
        Self {
            rank: None,
            projection: false,
            norm_cap: 1.0,
        }
    }
}

/// Random valid J-Hermitian kernel: draws a Hermitian H with spectrum in
/// [0, norm_cap] (or a random rank-r projection) from a Haar-like frame
/// and returns hat(H), which is J-Hermitian and valid by the involution.
/// Deterministic in the seed.
pub fn random_valid(
    space: &PartitionedSpace,
    spec: &RandomKernelSpec,
    seed: u64,
) -> Result<JKernel, KernelError> {
    let n = space.n();
    if !(spec.norm_cap > 0.0 && spec.norm_cap <= 1.0) {
        return Err(KernelError::NormCapRange {
            norm_cap: spec.norm_cap,
        });
    }
    let rank = spec.rank.unwrap_or(if spec.projection { n / 2 } else { n });
    if rank > n {
        return Err(KernelError::RankTooLarge { rank, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spectrum: Vec<f64> = (0..n)
        .map(|i| {
            if i >= rank {
                0.0
            } else if spec.projection {
                1.0
            } else {
                spec.norm_cap * rng.random::<f64>()
            }
        })
        .collect();
    Ok(hat_of_random_hermitian(space, &spectrum, &mut rng))
}

/// hat(Q·diag(spectrum)·Q*) for a Haar-like random unitary Q drawn from
/// the seed. The hat spectrum of the result is exactly `spectrum`, so
/// eigenvalues outside \[0,1\] produce deliberately invalid kernels.
pub fn random_with_hat_spectrum(space: &PartitionedSpace, spectrum: &[f64], seed: u64) -> JKernel {
    assert_eq!(spectrum.len(), space.n());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    hat_of_random_hermitian(space, spectrum, &mut rng)
}

fn hat_of_random_hermitian(
    space: &PartitionedSpace,
    spectrum: &[f64],
    rng: &mut ChaCha8Rng,
) -> JKernel {
    let n = space.n();
    let q = random_unitary(n, rng);
    let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        spectrum.iter().map(|&v| C64::new(v, 0.0)),
    ));
    let h = &q * lambda * q.adjoint();
    let op = hat_of(&h, space);
    JKernel::from_op_matrix(space.clone(), op).expect("dimensions match by construction")
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller on the ChaCha stream keeps the draw sequence explicit.
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Haar-like random unitary via QR of a complex Gaussian matrix with the
/// R-diagonal phase correction.
fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let z = DMatrix::<C64>::from_fn(n, n, |_, _| {
        C64::new(standard_normal(rng), standard_normal(rng))
    });
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Real interval with direction: `a` may exceed `b`, in which case grid
/// points are laid out from `a` toward `b` (weights stay positive).
#[derive(Clone, Copy, Debug)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quadrature {
    Midpoint,
    GaussLegendre,
}

pub type KernelFn = Box<dyn Fn(f64, f64) -> C64 + Send + Sync>;

/// The four block functions k_{ab}(x, y) of a continuous kernel.
pub struct KernelBlocks {
    pub k11: KernelFn,
    pub k12: KernelFn,
    pub k21: KernelFn,
    pub k22: KernelFn,
}

impl KernelBlocks {
    pub fn zero() -> Self {
        Self {
            k11: Box::new(|_, _| C64::new(0.0, 0.0)),
            k12: Box::new(|_, _| C64::new(0.0, 0.0)),
            k21: Box::new(|_, _| C64::new(0.0, 0.0)),
            k22: Box::new(|_, _| C64::new(0.0, 0.0)),
        }
    }

    /// Single-part kernel: only k₁₁ is nonzero.
    pub fn single_part(k11: KernelFn) -> Self {
        Self {
            k11,
            ..Self::zero()
        }
    }
}

/// Continuous two-part kernel together with its quadrature.
/// J-Hermiticity of the supplied functions is checked on the grid, not
/// assumed.
pub struct ContinuousKernelSpec {
    pub part1: Option<Interval>,
    pub part2: Option<Interval>,
    pub blocks: KernelBlocks,
    pub quadrature: Quadrature,
    pub points_per_part: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct GridPoint {
    pub x: f64,
    pub part: Part,
    pub weight: f64,
}

/// Result of a Nyström discretization.
pub struct Discretization {
    /// Kernel on the grid with quadrature weights absorbed
    /// (entries √wᵢ·k(xᵢ,xⱼ)·√wⱼ on a unit-weight space).
    pub kernel: JKernel,
    pub grid: Vec<GridPoint>,
    /// Largest deviation from the J-Hermitian block conditions on the grid.
    pub j_violation: f64,
    pub j_hermitian_on_grid: bool,
}

/// Discretizes a continuous block kernel on per-part quadrature grids.
///
/// The symmetrized weighting √w·k·√w preserves Hermitian structure, and
/// determinants of 1+M approximate the integral expansion of Det(1+K).
pub fn discretize(spec: &ContinuousKernelSpec) -> Result<Discretization, KernelError> {
    if spec.points_per_part == 0 {
        return Err(KernelError::ZeroPoints);
    }
    let mut grid: Vec<GridPoint> = Vec::new();
    if let Some(interval) = spec.part1 {
        for (x, weight) in quadrature_nodes(interval, spec.quadrature, spec.points_per_part) {
            grid.push(GridPoint {
                x,
                part: Part::One,
                weight,
            });
        }
    }
    if let Some(interval) = spec.part2 {
        for (x, weight) in quadrature_nodes(interval, spec.quadrature, spec.points_per_part) {
            grid.push(GridPoint {
                x,
                part: Part::Two,
                weight,
            });
        }
    }
    let n = grid.len();
    let mut entries = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (pi, pj) = (grid[i].part, grid[j].part);
            let (name, f): (&'static str, &KernelFn) = match (pi, pj) {
                (Part::One, Part::One) => ("k11", &spec.blocks.k11),
                (Part::One, Part::Two) => ("k12", &spec.blocks.k12),
                (Part::Two, Part::One) => ("k21", &spec.blocks.k21),
                (Part::Two, Part::Two) => ("k22", &spec.blocks.k22),
            };
            let value = f(grid[i].x, grid[j].x);
            if !value.re.is_finite() || !value.im.is_finite() {
                return Err(KernelError::NonFinite {
                    block: name,
                    x: grid[i].x,
                    y: grid[j].x,
                });
            }
            entries[(i, j)] = value * C64::new((grid[i].weight * grid[j].weight).sqrt(), 0.0);
        }
    }
    let part: Vec<Part> = grid.iter().map(|p| p.part).collect();
    let labels: Vec<String> = grid.iter().map(|p| format!("{}", p.x)).collect();
    let space = PartitionedSpace::new(part, None, Some(labels)).expect("unit weights are valid");
    let kernel = JKernel::new(space, entries)?;
    let j_violation = kernel.j_violation();
    Ok(Discretization {
        j_hermitian_on_grid: j_violation <= 1e-8,
        kernel,
        grid,
        j_violation,
    })
}

fn quadrature_nodes(interval: Interval, quadrature: Quadrature, n: usize) -> Vec<(f64, f64)> {
    let (lo, hi) = (interval.a.min(interval.b), interval.a.max(interval.b));
    let mut nodes: Vec<(f64, f64)> = match quadrature {
        Quadrature::Midpoint => {
            let h = (hi - lo) / n as f64;
            (0..n).map(|i| (lo + (i as f64 + 0.5) * h, h)).collect()
        }
        Quadrature::GaussLegendre => gauss_legendre(n)
            .into_iter()
            .map(|(t, w)| {
                let half = 0.5 * (hi - lo);
                (0.5 * (lo + hi) + half * t, half * w)
            })
            .collect(),
    };
    if interval.a > interval.b {
        nodes.reverse();
    }
    nodes
}

/// Gauss–Legendre nodes and weights on [−1, 1] by the Golub–Welsch
/// method: eigenvalues of the Jacobi matrix are the nodes, weights come
/// from the squared first eigenvector components.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    if n == 1 {
        return vec![(0.0, 2.0)];
    }
    let jacobi = DMatrix::<f64>::from_fn(n, n, |i, j| {
        if i.abs_diff(j) == 1 {
            let k = i.min(j) as f64 + 1.0;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let se = jacobi.symmetric_eigen();
    let mut out: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let q0 = se.eigenvectors[(0, i)];
            (se.eigenvalues[i], 2.0 * q0 * q0)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jop::DEFAULT_TOL;
    use crate::space::PartitionedSpace;
    use nalgebra::{dmatrix, DVector};

    #[test]
    fn from_g_scalar_example() {
        let space = PartitionedSpace::from_labels(&[1, 2]).unwrap();
        let g = GOperator::from_real(dmatrix![1.0]);
        let k = from_g(&space, &g).unwrap();
        let expect = dmatrix![0.5, -0.5; 0.5, 0.5].map(|x| C64::new(x, 0.0));
        assert!((k.entries() - expect).norm() < 1e-14);
        let hat = k.hat();
        let expect_hat = dmatrix![0.5, 0.5; 0.5, 0.5].map(|x| C64::new(x, 0.0));
        assert!((hat.entries() - expect_hat).norm() < 1e-14);
    }

    #[test]
    fn from_g_zero_boundary_case() {
        // graph of G = 0 is H₁ itself: hat(K) = P₁, hence K = hat(P₁) = 1
        let space = PartitionedSpace::from_labels(&[1, 2, 2]).unwrap();
        let g = GOperator::from_real(DMatrix::zeros(2, 1));
        let k = from_g(&space, &g).unwrap();
        assert!((k.entries() - DMatrix::<C64>::identity(3, 3)).norm() < 1e-14);
        let p1 = space.projector(Part::One).map(|x| C64::new(x, 0.0));
        assert!((k.hat().entries() - p1).norm() < 1e-14);
    }

    fn random_g(n2: usize, n1: usize, seed: u64) -> GOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GOperator::new(DMatrix::from_fn(n2, n1, |_, _| {
            C64::new(standard_normal(&mut rng), standard_normal(&mut rng))
        }))
    }

    fn graph_fix_error(space: &PartitionedSpace, g: &GOperator, hat_op: &DMatrix<C64>) -> f64 {
        // worst ‖P(h⊕Gh) − (h⊕Gh)‖ over the X₁ basis images
        let ones = space.indices_of(Part::One);
        let twos = space.indices_of(Part::Two);
        let mut worst = 0.0f64;
        for (col, _) in ones.iter().enumerate() {
            let mut v = DVector::<C64>::zeros(space.n());
            v[ones[col]] = C64::new(1.0, 0.0);
            for (row, &global) in twos.iter().enumerate() {
                v[global] = g.matrix()[(row, col)];
            }
            let err = (hat_op * &v - &v).norm() / v.norm();
            worst = worst.max(err);
        }
        worst
    }

    #[test]
    fn from_g_projects_onto_graph() {
        for seed in 0..15 {
            let (n1, n2) = (2 + (seed as usize) % 3, 1 + (seed as usize) % 4);
            let space = PartitionedSpace::two_blocks(n1, n2);
            let g = random_g(n2, n1, seed);
            let k = from_g(&space, &g).unwrap();
            let hat = k.hat().op_matrix();
            assert!(linalg::max_abs(&(&hat * &hat - &hat)) < 1e-10);
            assert!(linalg::max_abs(&(&hat - hat.adjoint())) < 1e-10);
            assert!(graph_fix_error(&space, &g, &hat) < 1e-10);
            // rank of the graph projection is |X₁|
            let rank = linalg::hermitian_eigenvalues(&hat)
                .iter()
                .filter(|&&l| l > 0.5)
                .count();
            assert_eq!(rank, n1);
            let verdict = k.check_validity(DEFAULT_TOL);
            assert!(verdict.valid && verdict.margin >= -1e-9);
        }
    }

    #[test]
    fn from_g_block_identities() {
        let (n1, n2) = (3, 2);
        let space = PartitionedSpace::two_blocks(n1, n2);
        let g = random_g(n2, n1, 42);
        let k = from_g(&space, &g).unwrap();
        let gm = g.matrix();
        let m = (DMatrix::<C64>::identity(n1, n1) + gm.adjoint() * gm)
            .try_inverse()
            .unwrap();
        let m2 = (DMatrix::<C64>::identity(n2, n2) + gm * gm.adjoint())
            .try_inverse()
            .unwrap();
        assert!((k.block(Part::One, Part::One) - &m).norm() < 1e-12);
        assert!((k.block(Part::Two, Part::Two) - &m2).norm() < 1e-12);
        assert!((k.block(Part::Two, Part::One) - gm * &m).norm() < 1e-12);
        assert!((k.block(Part::One, Part::Two) + &m * gm.adjoint()).norm() < 1e-12);
        assert!(k.is_j_hermitian(1e-12));
    }

    #[test]
    fn from_g_handles_interleaved_parts() {
        let space = PartitionedSpace::from_labels(&[2, 1, 2, 1]).unwrap();
        let g = random_g(2, 2, 5);
        let k = from_g(&space, &g).unwrap();
        let hat = k.hat().op_matrix();
        assert!(linalg::max_abs(&(&hat * &hat - &hat)) < 1e-10);
        assert!(graph_fix_error(&space, &g, &hat) < 1e-10);
    }

    #[test]
    fn from_g_dimension_check() {
        let space = PartitionedSpace::from_labels(&[1, 2]).unwrap();
        let g = GOperator::from_real(dmatrix![1.0; 2.0]);
        assert!(matches!(
            from_g(&space, &g),
            Err(KernelError::GDimensions { .. })
        ));
    }

    #[test]
    fn random_valid_examples() {
        let space = PartitionedSpace::from_labels(&[1, 2, 1, 2]).unwrap();
        // rank-0 projection collapses to hat(0) = P₂
        let spec = RandomKernelSpec {
            rank: Some(0),
            projection: true,
            norm_cap: 1.0,
        };
        let k = random_valid(&space, &spec, 3).unwrap();
        let p2 = space.projector(Part::Two).map(|x| C64::new(x, 0.0));
        assert!((k.entries() - p2).norm() < 1e-12);

        for seed in 0..25 {
            let k = random_valid(&space, &RandomKernelSpec::default(), seed).unwrap();
            assert!(k.check_validity(DEFAULT_TOL).valid, "seed {seed}");
        }

        let again = random_valid(&space, &RandomKernelSpec::default(), 11).unwrap();
        let twin = random_valid(&space, &RandomKernelSpec::default(), 11).unwrap();
        assert_eq!(again.entries(), twin.entries());

        assert!(matches!(
            random_valid(
                &space,
                &RandomKernelSpec {
                    rank: Some(9),
                    ..Default::default()
                },
                0
            ),
            Err(KernelError::RankTooLarge { .. })
        ));
        assert!(matches!(
            random_valid(
                &space,
                &RandomKernelSpec {
                    norm_cap: 0.0,
                    ..Default::default()
                },
                0
            ),
            Err(KernelError::NormCapRange { .. })
        ));
    }

    #[test]
    fn random_projection_hat_is_idempotent() {
        let space = PartitionedSpace::from_labels(&[1, 1, 2, 2, 2]).unwrap();
        for seed in 0..10 {
            let spec = RandomKernelSpec {
                rank: Some(2),
                projection: true,
                norm_cap: 1.0,
            };
            let k = random_valid(&space, &spec, seed).unwrap();
            let hat = k.hat().op_matrix();
            assert!(linalg::max_abs(&(&hat * &hat - &hat)) < 1e-10);
        }
    }

    #[test]
    fn gauss_legendre_known_rules() {
        let rule = gauss_legendre(2);
        assert!((rule[0].0 + 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!((rule[1].0 - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!((rule[0].1 - 1.0).abs() < 1e-14);

        let rule = gauss_legendre(3);
        assert!(rule[1].0.abs() < 1e-14);
        assert!((rule[1].1 - 8.0 / 9.0).abs() < 1e-14);
        // degree-4 exactness: ∫_{-1}^{1} x⁴ dx = 2/5
        let integral: f64 = rule.iter().map(|&(x, w)| w * x.powi(4)).sum();
        assert!((integral - 0.4).abs() < 1e-13);
    }

    #[test]
    fn discretize_zero_kernel() {
        let spec = ContinuousKernelSpec {
            part1: Some(Interval { a: 0.0, b: 1.0 }),
            part2: None,
            blocks: KernelBlocks::zero(),
            quadrature: Quadrature::Midpoint,
            points_per_part: 8,
        };
        let disc = discretize(&spec).unwrap();
        assert_eq!(disc.kernel.n(), 8);
        let det = crate::fredholm::det_direct(&disc.kernel).value;
        assert!((det - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(disc.j_hermitian_on_grid);
    }

    #[test]
    fn discretize_rank_one_constant_kernel() {
        // k(x,y) = −½·1·1 on [0,1]: Det(1+M) = 1 − ½∫1 = ½ at any grid size
        for n in [4, 32] {
            let spec = ContinuousKernelSpec {
                part1: Some(Interval { a: 0.0, b: 1.0 }),
                part2: None,
                blocks: KernelBlocks::single_part(Box::new(|_, _| C64::new(-0.5, 0.0))),
                quadrature: Quadrature::Midpoint,
                points_per_part: n,
            };
            let det = crate::fredholm::det_direct(&discretize(&spec).unwrap().kernel).value;
            assert!((det - C64::new(0.5, 0.0)).norm() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn discretize_self_convergence() {
        let kernel_fn = |x: f64, y: f64| C64::new(-0.3 * (-(x - y).powi(2)).exp(), 0.0);
        let det_at = |n: usize| {
            let spec = ContinuousKernelSpec {
                part1: Some(Interval { a: 0.0, b: 1.0 }),
                part2: None,
                blocks: KernelBlocks::single_part(Box::new(kernel_fn)),
                quadrature: Quadrature::Midpoint,
                points_per_part: n,
            };
            crate::fredholm::det_direct(&discretize(&spec).unwrap().kernel)
                .value
                .re
        };
        let (d1, d2, d4) = (det_at(16), det_at(32), det_at(64));
        assert!((d2 - d4).abs() < (d1 - d2).abs());
    }

    #[test]
    fn discretize_single_part_hermitian_is_valid() {
        let spec = ContinuousKernelSpec {
            part1: Some(Interval { a: 0.0, b: 1.0 }),
            part2: None,
            blocks: KernelBlocks::single_part(Box::new(|x: f64, y: f64| {
                C64::new(0.5 * (-(x - y).powi(2) / 0.5).exp(), 0.0)
            })),
            quadrature: Quadrature::GaussLegendre,
            points_per_part: 12,
        };
        let disc = discretize(&spec).unwrap();
        assert!(disc.kernel.check_validity(DEFAULT_TOL).valid);
    }

    #[test]
    fn discretize_direction_reverses_grid() {
        let blocks = |dir: f64| ContinuousKernelSpec {
            part1: Some(Interval {
                a: if dir > 0.0 { 0.0 } else { 1.0 },
                b: if dir > 0.0 { 1.0 } else { 0.0 },
            }),
            part2: None,
            blocks: KernelBlocks::single_part(Box::new(|x: f64, y: f64| {
                C64::new(0.1 * x * y, 0.0)
            })),
            quadrature: Quadrature::Midpoint,
            points_per_part: 4,
        };
        let forward = discretize(&blocks(1.0)).unwrap();
        let backward = discretize(&blocks(-1.0)).unwrap();
        let fx: Vec<f64> = forward.grid.iter().map(|p| p.x).collect();
        let mut bx: Vec<f64> = backward.grid.iter().map(|p| p.x).collect();
        bx.reverse();
        assert_eq!(fx, bx);
        assert!(backward.grid.iter().all(|p| p.weight > 0.0));
        let df = crate::fredholm::det_direct(&forward.kernel).value;
        let db = crate::fredholm::det_direct(&backward.kernel).value;
        assert!((df - db).norm() < 1e-14);
    }

    #[test]
    fn discretize_reports_non_finite() {
        let spec = ContinuousKernelSpec {
            part1: Some(Interval { a: 0.0, b: 1.0 }),
            part2: None,
            blocks: KernelBlocks::single_part(Box::new(|x: f64, _| C64::new(1.0 / (x - x), 0.0))),
            quadrature: Quadrature::Midpoint,
            points_per_part: 2,
        };
        assert!(matches!(
            discretize(&spec),
            Err(KernelError::NonFinite { .. })
        ));
    }
}
