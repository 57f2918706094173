//! Interior grids with quadrature cells, and real-valued functions on them.

use crate::scalar::Scalar;

/// Strictly increasing interior points of (0, 1) together with the quadrature
/// cells around them. Cell edges always start at 0 and end at 1, so the cell
/// masses sum exactly to the reference measure of the whole domain.
#[derive(Clone, Debug)]
pub struct Grid<S> {
    points: Vec<S>,
    /// cell edges, length = points.len() + 1, edges[0] = 0, edges[n] = 1
    edges: Vec<S>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grading {
    Uniform,
    BoundaryGraded,
}

impl<S: Scalar> Grid<S> {
    pub fn new_uniform(n: usize) -> Self {
        let pts: Vec<S> = (1..=n).map(|j| S::of_usize(j) / S::of_usize(n + 1)).collect();
        Self::from_points(pts)
    }

    /// Symmetric power grading that packs points toward both endpoints:
    /// x(s) = s^p / (s^p + (1-s)^p).
    pub fn new_graded(n: usize, exponent: f64) -> Self {
        let pts: Vec<S> = (1..=n)
            .map(|j| {
                let s = j as f64 / (n + 1) as f64;
                let num = s.powf(exponent);
                let den = num + (1.0 - s).powf(exponent);
                S::of(num / den)
            })
            .collect();
        Self::from_points(pts)
    }

    /// Build a grid from arbitrary strictly increasing interior points.
    /// Cells are midpoint cells, extended to the boundary at both ends.
    pub fn from_points(points: Vec<S>) -> Self {
        assert!(!points.is_empty());
        let n = points.len();
        let mut edges = Vec::with_capacity(n + 1);
        edges.push(S::zero());
        for j in 1..n {
            edges.push((points[j - 1] + points[j]) * S::half());
        }
        edges.push(S::one());
        Self { points, edges }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn points(&self) -> &[S] {
        &self.points
    }

    #[inline]
    pub fn point(&self, i: usize) -> S {
        self.points[i]
    }

    #[inline]
    pub fn cell(&self, i: usize) -> (S, S) {
        (self.edges[i], self.edges[i + 1])
    }

    pub fn validate(&self) -> bool {
        let mut ok = self.points[0] > S::zero() && *self.points.last().unwrap() < S::one();
        for w in self.points.windows(2) {
            ok &= w[0] < w[1];
        }
        ok
    }

    /// Index of the grid point nearest to x.
    pub fn nearest(&self, x: S) -> usize {
        match self
            .points
            .binary_search_by(|p| p.partial_cmp(&x).expect("ordered grid"))
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i == self.points.len() => self.points.len() - 1,
            Err(i) => {
                if x - self.points[i - 1] <= self.points[i] - x {
                    i - 1
                } else {
                    i
                }
            }
        }
    }

    /// Cell index containing x (cells partition (0,1)).
    pub fn cell_of(&self, x: S) -> usize {
        let mut lo = 0usize;
        let mut hi = self.points.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.edges[mid + 1] < x {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Real values on a grid, possibly with signed-infinity sentinels at isolated
/// points (potentials of atoms at singular kernels).
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<S> {
    values: Vec<S>,
}

impl<S: Scalar> GridFunction<S> {
    pub fn new(values: Vec<S>) -> Self {
        Self { values }
    }

    pub fn constant(n: usize, v: S) -> Self {
        Self { values: vec![v; n] }
    }

    pub fn zeros(n: usize) -> Self {
        Self::constant(n, S::zero())
    }

    pub fn from_fn<F: Fn(S) -> S>(grid: &Grid<S>, f: F) -> Self {
        Self {
            values: grid.points().iter().map(|&x| f(x)).collect(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[S] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, i: usize) -> S {
        self.values[i]
    }

    pub fn map<F: Fn(S) -> S>(&self, f: F) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip<F: Fn(S, S) -> S>(&self, other: &Self, f: F) -> Self {
        assert_eq!(self.len(), other.len(), "grid functions on different grids");
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, a: S) -> Self {
        self.map(|v| v * a)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    /// Piecewise-linear evaluation at x, with value 0 pinned at both domain
    /// endpoints. Non-finite nodal values are skipped by interpolating the
    /// nearest finite neighbors, so only exact hits see the sentinel.
    pub fn eval_linear(&self, grid: &Grid<S>, x: S) -> S {
        let pts = grid.points();
        let n = pts.len();
        if x <= S::zero() || x >= S::one() {
            return S::zero();
        }
        // locate the bracketing nodes
        let mut hi = match pts.binary_search_by(|p| p.partial_cmp(&x).expect("ordered")) {
            Ok(i) => return self.values[i],
            Err(i) => i,
        };
        let mut lo = hi;
        // virtual boundary nodes carry value 0
        let (mut x0, mut v0) = (S::zero(), S::zero());
        let (mut x1, mut v1) = (S::one(), S::zero());
        while lo > 0 {
            lo -= 1;
            if self.values[lo].is_finite() {
                x0 = pts[lo];
                v0 = self.values[lo];
                break;
            }
        }
        while hi < n {
            if self.values[hi].is_finite() {
                x1 = pts[hi];
                v1 = self.values[hi];
                break;
            }
            hi += 1;
        }
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }

    pub fn finite_mask(&self) -> Vec<bool> {
        self.values.iter().map(|v| v.is_finite()).collect()
    }
}
