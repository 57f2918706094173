//! Model operators with computable resolvent densities: the Dirichlet
//! Laplacian on the unit interval, the restricted fractional Laplacian on the
//! unit interval, and the Dirichlet Laplacian on the unit ball reduced to the
//! radial variable. A [`Domain`] carries its grid, quadrature cells, and the
//! kernel evaluators; everything is immutable after construction.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use thiserror::Error;

use crate::frac::{FracKernel, FracOperator};
use crate::grid::{Grading, Grid, GridFunction};
use crate::linalg::solve_tridiagonal;
use crate::radial;
use crate::scalar::Scalar;
use crate::special::{tanh_sinh, GaussLegendre};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainKind<S> {
    /// -d^2/dx^2 on (0,1) with zero boundary values.
    IntervalLaplacian,
    /// Restricted fractional Laplacian of order alpha in (0,2) on (0,1),
    /// zero exterior condition.
    IntervalFractional(S),
    /// Dirichlet Laplacian on the unit ball of R^d, radial reduction, d >= 2.
    RadialBallLaplacian(usize),
}

impl<S: Scalar> DomainKind<S> {
    pub fn label(&self) -> &'static str {
        match self {
            DomainKind::IntervalLaplacian => "interval-laplacian",
            DomainKind::IntervalFractional(_) => "interval-fractional",
            DomainKind::RadialBallLaplacian(_) => "radial-ball-laplacian",
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("grid_size must be at least 8, got {0}")]
    GridTooSmall(usize),
    #[error("fractional order must lie strictly inside (0, 2), got {0}")]
    AlphaOutOfRange(f64),
    #[error("ball dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("point {0} lies outside the open domain")]
    OutOfDomain(f64),
    #[error("kernel is singular on the diagonal at x = {0}")]
    SingularDiagonal(f64),
    #[error("grid points must be strictly increasing interior points")]
    InvalidGrid,
    #[error("discretized resolvent solve failed: {0}")]
    SolveFailed(#[from] crate::linalg::LinalgError),
}

/// Absolute plus relative tolerance attached to grid quadrature; checkers
/// and comparison predicates inherit it.
#[derive(Clone, Copy, Debug)]
pub struct QuadTol<S> {
    pub abs: S,
    pub rel: S,
}

impl<S: Scalar> Default for QuadTol<S> {
    fn default() -> Self {
        Self {
            abs: S::of(1e-8),
            rel: S::of(1e-6),
        }
    }
}

static DOMAIN_COUNTER: AtomicU64 = AtomicU64::new(1);

pub struct Domain<S: Scalar> {
    kind: DomainKind<S>,
    grid: Grid<S>,
    weights: Vec<S>,
    quad_tol: QuadTol<S>,
    id: u64,
    frac_kernel: OnceLock<Arc<FracKernel<S>>>,
    frac_op: OnceLock<Arc<FracOperator<S>>>,
    kernel_matrix: OnceLock<Arc<Vec<S>>>,
}

/// Internal grid resolution for the dense fractional operator backing
/// resolvent solves and the discrete energy form.
const FRAC_INTERNAL_GRID: usize = 511;

impl<S: Scalar> Domain<S> {
    /// Build a domain with `grid_size` interior points. `BoundaryGraded`
    /// packs points quadratically toward the endpoints to resolve the
    /// boundary behavior of the Green kernels.
    pub fn new(kind: DomainKind<S>, grid_size: usize, grading: Grading) -> Result<Self, DomainError> {
        if grid_size < 8 {
            return Err(DomainError::GridTooSmall(grid_size));
        }
        let grid = match grading {
            Grading::Uniform => Grid::new_uniform(grid_size),
            Grading::BoundaryGraded => Grid::new_graded(grid_size, 2.0),
        };
        Self::from_grid(kind, grid)
    }

    /// Build a domain over explicit strictly increasing interior points.
    pub fn from_points(kind: DomainKind<S>, points: Vec<S>) -> Result<Self, DomainError> {
        if points.len() < 8 {
            return Err(DomainError::GridTooSmall(points.len()));
        }
        let grid = Grid::from_points(points);
        if !grid.validate() {
            return Err(DomainError::InvalidGrid);
        }
        Self::from_grid(kind, grid)
    }

    fn from_grid(kind: DomainKind<S>, grid: Grid<S>) -> Result<Self, DomainError> {
        match kind {
            DomainKind::IntervalFractional(alpha) => {
                if !(alpha > S::zero() && alpha < S::two()) {
                    return Err(DomainError::AlphaOutOfRange(alpha.as_f64()));
                }
            }
            DomainKind::RadialBallLaplacian(d) => {
                if d < 2 {
                    return Err(DomainError::DimensionTooSmall(d));
                }
            }
            DomainKind::IntervalLaplacian => {}
        }
        let weights = (0..grid.len())
            .map(|j| {
                let (a, b) = grid.cell(j);
                match kind {
                    DomainKind::RadialBallLaplacian(d) => radial::shell_mass(d, a, b),
                    _ => b - a,
                }
            })
            .collect();
        Ok(Self {
            kind,
            grid,
            weights,
            quad_tol: QuadTol::default(),
            id: DOMAIN_COUNTER.fetch_add(1, Ordering::Relaxed),
            frac_kernel: OnceLock::new(),
            frac_op: OnceLock::new(),
            kernel_matrix: OnceLock::new(),
        })
    }

    pub fn with_quad_tol(mut self, tol: QuadTol<S>) -> Self {
        self.quad_tol = tol;
        self
    }

    #[inline]
    pub fn kind(&self) -> DomainKind<S> {
        self.kind
    }

    #[inline]
    pub fn grid(&self) -> &Grid<S> {
        &self.grid
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    #[inline]
    pub fn points(&self) -> &[S] {
        self.grid.points()
    }

    #[inline]
    pub fn quad_weights(&self) -> &[S] {
        &self.weights
    }

    #[inline]
    pub fn quad_tol(&self) -> QuadTol<S> {
        self.quad_tol
    }

    #[inline]
    pub fn id(&self) -> u64 {
        self.id
    }

    /// Total mass of the reference measure: 1 for the interval kinds, the
    /// ball volume for the radial kind.
    pub fn total_mass(&self) -> S {
        match self.kind {
            DomainKind::RadialBallLaplacian(d) => radial::shell_mass(d, S::zero(), S::one()),
            _ => S::one(),
        }
    }

    #[inline]
    pub fn contains(&self, x: S) -> bool {
        x > S::zero() && x < S::one()
    }

    fn require_interior(&self, x: S) -> Result<(), DomainError> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(DomainError::OutOfDomain(x.as_f64()))
        }
    }

    fn frac_kernel(&self) -> &Arc<FracKernel<S>> {
        let alpha = match self.kind {
            DomainKind::IntervalFractional(a) => a,
            _ => unreachable!("fractional kernel requested on a non-fractional domain"),
        };
        self.frac_kernel
            .get_or_init(|| Arc::new(FracKernel::new(alpha)))
    }

    /// Dense fractional operator on the internal uniform grid.
    pub fn frac_operator(&self) -> &Arc<FracOperator<S>> {
        let alpha = match self.kind {
            DomainKind::IntervalFractional(a) => a,
            _ => unreachable!("fractional operator requested on a non-fractional domain"),
        };
        self.frac_op
            .get_or_init(|| Arc::new(FracOperator::new(alpha, FRAC_INTERNAL_GRID)))
    }

    /// Resolvent density r(x, y). Symmetric and nonnegative; signals the
    /// diagonal when the kernel blows up there.
    pub fn green_kernel(&self, x: S, y: S) -> Result<S, DomainError> {
        self.require_interior(x)?;
        self.require_interior(y)?;
        if x == y && self.singular_diagonal() {
            return Err(DomainError::SingularDiagonal(x.as_f64()));
        }
        Ok(self.kernel_value(x, y))
    }

    /// True when r(x, x) = +infinity for interior x.
    pub fn singular_diagonal(&self) -> bool {
        match self.kind {
            DomainKind::IntervalFractional(alpha) => alpha <= S::one(),
            _ => false,
        }
    }

    /// Kernel value with +infinity on a singular diagonal (no error path);
    /// inputs must be interior.
    pub fn kernel_value(&self, x: S, y: S) -> S {
        match self.kind {
            DomainKind::IntervalLaplacian => x.min(y) * (S::one() - x.max(y)),
            DomainKind::IntervalFractional(_) => self.frac_kernel().eval(x, y),
            DomainKind::RadialBallLaplacian(d) => radial::kernel(d, x, y),
        }
    }

    /// Kernel value with the separation passed explicitly (quadrature path).
    fn kernel_value_sep(&self, x: S, y: S, sep: S) -> S {
        match self.kind {
            DomainKind::IntervalFractional(_) => self.frac_kernel().eval_sep(x, y, sep),
            _ => self.kernel_value(x, y),
        }
    }

    /// Density of the reference measure at y (1 on the interval kinds).
    fn measure_density(&self, y: S) -> S {
        match self.kind {
            DomainKind::RadialBallLaplacian(d) => {
                radial::sphere_area::<S>(d) * y.powf(S::of_usize(d) - S::one())
            }
            _ => S::one(),
        }
    }

    /// x -> R_n 1 (x): solve the discretized (n - L) v = 1 with zero
    /// boundary/exterior condition. Values are clamped into [0, 1/n], the
    /// range guaranteed by sub-Markovianity.
    pub fn alpha_resolvent_one(&self, n: S) -> Result<GridFunction<S>, DomainError> {
        assert!(n > S::zero(), "resolvent parameter must be positive");
        let pts = self.points();
        let count = pts.len();
        let cap = n.recip();
        let values = match self.kind {
            DomainKind::IntervalLaplacian => {
                // 3-point scheme on the possibly nonuniform grid
                let mut lower = vec![S::zero(); count - 1];
                let mut upper = vec![S::zero(); count - 1];
                let mut diag = vec![S::zero(); count];
                for i in 0..count {
                    let xl = if i == 0 { S::zero() } else { pts[i - 1] };
                    let xr = if i == count - 1 { S::one() } else { pts[i + 1] };
                    let hl = pts[i] - xl;
                    let hr = xr - pts[i];
                    let c = S::two() / (hl + hr);
                    diag[i] = n + c * (hl.recip() + hr.recip());
                    if i > 0 {
                        lower[i - 1] = -c / hl;
                    }
                    if i < count - 1 {
                        upper[i] = -c / hr;
                    }
                }
                solve_tridiagonal(&lower, &diag, &upper, &vec![S::one(); count])?
            }
            DomainKind::RadialBallLaplacian(d) => {
                let edges: Vec<S> = (0..=count)
                    .map(|i| {
                        if i == count {
                            S::one()
                        } else {
                            self.grid.cell(i).0
                        }
                    })
                    .collect();
                radial::solve_shifted(d, pts, &edges, n, &vec![S::one(); count])?
            }
            DomainKind::IntervalFractional(_) => {
                let op = self.frac_operator();
                let internal = op.solve_shifted(n, &vec![S::one(); op.len()])?;
                let internal_fn = GridFunction::new(internal);
                let internal_grid = Grid::new_uniform(op.len());
                pts.iter()
                    .map(|&x| internal_fn.eval_linear(&internal_grid, x))
                    .collect()
            }
        };
        Ok(GridFunction::new(
            values
                .into_iter()
                .map(|v| v.max(S::zero()).min(cap))
                .collect(),
        ))
    }

    /// Effective kernel matrix K[i][j] = cell-average over cell j of
    /// y -> r(x_i, y) under the reference measure, row-major. Row sums
    /// against the cell masses reproduce integrals of the kernel exactly up
    /// to the sub-cell quadrature error, including across the diagonal
    /// singularity.
    pub fn kernel_matrix(&self) -> Arc<Vec<S>> {
        self.kernel_matrix
            .get_or_init(|| {
                let n = self.len();
                let mut m = vec![S::zero(); n * n];
                let gl = GaussLegendre::new(8);
                let ts = tanh_sinh::<S>(72, S::of(1e-24));
                m.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
                    let xi = self.grid.point(i);
                    for (j, slot) in row.iter_mut().enumerate() {
                        let (a, b) = self.grid.cell(j);
                        let wj = self.weights[j];
                        *slot = self.cell_integral(xi, a, b, &gl, &ts) / wj;
                    }
                });
                Arc::new(m)
            })
            .clone()
    }

    /// Integral over [a, b] of r(xi, y) dm(y). Cells near xi are split at xi
    /// (clamped into the cell) with singular sides handled by tanh-sinh
    /// nodes clustered at the singularity; smooth spans use Gauss-Legendre.
    fn cell_integral(
        &self,
        xi: S,
        a: S,
        b: S,
        gl: &GaussLegendre<S>,
        ts: &[(S, S)],
    ) -> S {
        let width = b - a;
        let near = xi >= a - S::two() * width && xi <= b + S::two() * width;
        let singular = matches!(self.kind, DomainKind::IntervalFractional(_));
        if near {
            let s = xi.clamp(a, b);
            let mut total = S::zero();
            for (lo, hi, sing_at_hi) in [(a, s, true), (s, b, false)] {
                let len = hi - lo;
                if len <= S::zero() {
                    continue;
                }
                if singular {
                    let gap = if sing_at_hi { xi - hi } else { lo - xi }.max(S::zero());
                    for &(tau, w) in ts {
                        let delta = len * tau;
                        let y = if sing_at_hi { hi - delta } else { lo + delta };
                        let sep = gap + delta;
                        total += w * len * self.kernel_value_sep(xi, y, sep) * self.measure_density(y);
                    }
                } else {
                    total += gl.integrate(lo, hi, |y| self.kernel_value(xi, y) * self.measure_density(y));
                }
            }
            total
        } else {
            gl.integrate(a, b, |y| self.kernel_value(xi, y) * self.measure_density(y))
        }
    }

    // ----- quadrature helpers on grid functions -----

    /// Weighted inner product sum u v w over grid points where both factors
    /// are finite (sentinel points carry zero reference mass in the
    /// quasi-everywhere sense).
    pub fn inner(&self, u: &GridFunction<S>, v: &GridFunction<S>) -> S {
        debug_assert_eq!(u.len(), self.len());
        debug_assert_eq!(v.len(), self.len());
        let mut acc = S::zero();
        for ((&a, &b), &w) in u.values().iter().zip(v.values()).zip(&self.weights) {
            if a.is_finite() && b.is_finite() {
                acc += a * b * w;
            }
        }
        acc
    }

    /// Quadrature integral of u against the reference measure.
    pub fn integral(&self, u: &GridFunction<S>) -> S {
        let mut acc = S::zero();
        for (&a, &w) in u.values().iter().zip(&self.weights) {
            if a.is_finite() {
                acc += a * w;
            }
        }
        acc
    }

    pub fn l1_norm(&self, u: &GridFunction<S>) -> S {
        let mut acc = S::zero();
        for (&a, &w) in u.values().iter().zip(&self.weights) {
            if a.is_finite() {
                acc += a.abs() * w;
            }
        }
        acc
    }

    pub fn l1_distance(&self, u: &GridFunction<S>, v: &GridFunction<S>) -> S {
        let mut acc = S::zero();
        for ((&a, &b), &w) in u.values().iter().zip(v.values()).zip(&self.weights) {
            if a.is_finite() && b.is_finite() {
                acc += (a - b).abs() * w;
            }
        }
        acc
    }

    /// Sup of |u| over grid points where `mask` is true, skipping sentinels.
    pub fn sup_abs_masked(&self, u: &GridFunction<S>, mask: &[bool]) -> S {
        let mut best = S::zero();
        for (&v, &keep) in u.values().iter().zip(mask) {
            if keep && v.is_finite() {
                best = best.max(v.abs());
            }
        }
        best
    }

    /// Mask selecting grid points at distance greater than `radius` from
    /// every center in `centers`.
    pub fn exclusion_mask(&self, centers: &[S], radius: S) -> Vec<bool> {
        self.points()
            .iter()
            .map(|&x| centers.iter().all(|&c| (x - c).abs() > radius))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type D = Domain<f64>;

    #[test]
    fn uniform_nine_point_grid_matches_convention() {
        let dom = D::new(DomainKind::IntervalLaplacian, 9, Grading::Uniform).unwrap();
        for (j, &x) in dom.points().iter().enumerate() {
            assert!((x - 0.1 * (j + 1) as f64).abs() < 1e-15);
        }
        // interior weights are the uniform spacing; the two boundary cells
        // absorb the remaining mass so that the total is exact
        let w = dom.quad_weights();
        for &wi in &w[1..8] {
            assert!((wi - 0.1).abs() < 1e-15);
        }
        let total: f64 = w.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn graded_weights_sum_to_domain_mass() {
        let dom = D::new(
            DomainKind::IntervalFractional(0.5),
            64,
            Grading::BoundaryGraded,
        )
        .unwrap();
        let total: f64 = dom.quad_weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);

        let ball = D::new(DomainKind::RadialBallLaplacian(3), 64, Grading::BoundaryGraded).unwrap();
        let total: f64 = ball.quad_weights().iter().sum();
        assert!((total - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(matches!(
            D::new(DomainKind::IntervalLaplacian, 7, Grading::Uniform),
            Err(DomainError::GridTooSmall(7))
        ));
        assert!(matches!(
            D::new(DomainKind::IntervalFractional(2.5), 64, Grading::Uniform),
            Err(DomainError::AlphaOutOfRange(_))
        ));
        assert!(matches!(
            D::new(DomainKind::IntervalFractional(0.0), 64, Grading::Uniform),
            Err(DomainError::AlphaOutOfRange(_))
        ));
        assert!(matches!(
            D::new(DomainKind::RadialBallLaplacian(1), 64, Grading::Uniform),
            Err(DomainError::DimensionTooSmall(1))
        ));
    }

    #[test]
    fn interval_kernel_closed_form_and_symmetry() {
        let dom = D::new(DomainKind::IntervalLaplacian, 32, Grading::Uniform).unwrap();
        assert!((dom.green_kernel(0.25, 0.5).unwrap() - 0.125).abs() < 1e-15);
        assert!(matches!(
            dom.green_kernel(-0.1, 0.5),
            Err(DomainError::OutOfDomain(_))
        ));
        let frac = D::new(DomainKind::IntervalFractional(0.8), 32, Grading::Uniform).unwrap();
        assert!(matches!(
            frac.green_kernel(0.3, 0.3),
            Err(DomainError::SingularDiagonal(_))
        ));
        // random-pair symmetry across all kinds, same code path -> bit equal
        let ball = D::new(DomainKind::RadialBallLaplacian(4), 32, Grading::Uniform).unwrap();
        let mut state = 7u64;
        let mut rand01 = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64)
        };
        for dom in [&dom, &frac, &ball] {
            for _ in 0..2500 {
                let x = 0.001 + 0.998 * rand01();
                let y = 0.001 + 0.998 * rand01();
                if x == y {
                    continue;
                }
                let a = dom.green_kernel(x, y).unwrap();
                let b = dom.green_kernel(y, x).unwrap();
                assert!(a >= 0.0);
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn resolvent_one_interval_closed_form() {
        let dom = D::new(DomainKind::IntervalLaplacian, 512, Grading::BoundaryGraded).unwrap();
        let v = dom.alpha_resolvent_one(1.0).unwrap();
        let i = dom.grid().nearest(0.5);
        let x = dom.grid().point(i);
        // v = (1 - cosh(sqrt(n)(x-1/2))/cosh(sqrt(n)/2))/n
        let want = 1.0 - ((x - 0.5_f64).cosh() / 0.5_f64.cosh());
        assert!((v.at(i) - want).abs() < 1e-4, "got {} want {want}", v.at(i));
        assert!((v.at(i) - (1.0 - 1.0 / 0.5f64.cosh())).abs() < 1e-4);
    }

    #[test]
    fn resolvent_one_bounded_and_monotone_in_n() {
        for kind in [
            DomainKind::IntervalLaplacian,
            DomainKind::IntervalFractional(0.8),
            DomainKind::RadialBallLaplacian(3),
        ] {
            let dom = D::new(kind, 128, Grading::BoundaryGraded).unwrap();
            let mut prev: Option<GridFunction<f64>> = None;
            for n in [1.0, 10.0, 100.0, 1000.0] {
                let v = dom.alpha_resolvent_one(n).unwrap();
                for &val in v.values() {
                    assert!(val >= 0.0 && val <= 1.0 / n + 1e-12);
                }
                if let Some(p) = &prev {
                    for (a, b) in v.values().iter().zip(p.values()) {
                        assert!(*a <= *b + 1e-9, "pointwise nonincreasing in n");
                    }
                }
                prev = Some(v);
            }
        }
    }

    #[test]
    fn n_resolvent_tends_to_one_interior() {
        let dom = D::new(DomainKind::IntervalLaplacian, 256, Grading::BoundaryGraded).unwrap();
        let i = dom.grid().nearest(0.5);
        let mut last = 0.0;
        for n in [1.0, 10.0, 100.0, 1000.0] {
            let v = dom.alpha_resolvent_one(n).unwrap();
            let scaled = n * v.at(i);
            let x = dom.grid().point(i);
            let exact = 1.0 - ((n.sqrt() * (x - 0.5)).cosh() / (n.sqrt() * 0.5).cosh());
            assert!((scaled - exact).abs() < 2e-3, "n={n}: {scaled} vs {exact}");
            assert!(scaled >= last);
            last = scaled;
        }
        assert!(last > 0.99);
    }
}
