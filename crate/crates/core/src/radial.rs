//! Dirichlet Laplacian on the unit ball of R^d, d >= 2, reduced to the
//! radial variable. The reference measure is the radial volume measure
//! omega_{d-1} r^(d-1) dr, and the kernel is the spherical average of the
//! classical image-charge Green function, which collapses to a closed form
//! by the shell theorem:
//!   d >= 3:  r(r, s) = (max(r,s)^(2-d) - 1) / ((d-2) omega_{d-1})
//!   d  = 2:  r(r, s) = ln(1/max(r,s)) / (2 pi)

use crate::scalar::Scalar;

/// Surface area of the unit sphere S^(d-1).
pub fn sphere_area<S: Scalar>(dim: usize) -> S {
    let d = dim as f64;
    let v = 2.0 * std::f64::consts::PI.powf(d / 2.0);
    S::of(v) / crate::special::gamma(S::of(d / 2.0))
}

/// Radial volume of the shell (a, b): omega_{d-1} (b^d - a^d)/d.
pub fn shell_mass<S: Scalar>(dim: usize, a: S, b: S) -> S {
    let d = S::of_usize(dim);
    sphere_area::<S>(dim) * (b.powf(d) - a.powf(d)) / d
}

/// Spherically averaged Green kernel; finite for max(r,s) > 0.
pub fn kernel<S: Scalar>(dim: usize, r: S, s: S) -> S {
    let m = r.max(s);
    if dim == 2 {
        m.recip().ln() / (S::two() * S::PI())
    } else {
        let d = S::of_usize(dim);
        (m.powf(S::two() - d) - S::one()) / ((d - S::two()) * sphere_area::<S>(dim))
    }
}

/// Solve (shift - L) v = rhs radially with L the Dirichlet Laplacian:
/// conservative flux discretization of r^(1-d) (r^(d-1) v')' on the grid,
/// natural condition at r = 0, zero condition at r = 1.
pub fn solve_shifted<S: Scalar>(
    dim: usize,
    points: &[S],
    edges: &[S],
    shift: S,
    rhs: &[S],
) -> Result<Vec<S>, crate::linalg::LinalgError> {
    let n = points.len();
    let d = S::of_usize(dim);
    let omega = sphere_area::<S>(dim);
    // cell masses under the radial volume measure
    let mass: Vec<S> = (0..n)
        .map(|i| omega * (edges[i + 1].powf(d) - edges[i].powf(d)) / d)
        .collect();
    // face conductances omega * c^(d-1) / dx between node i and i+1 (ghost at 1)
    let mut lower = vec![S::zero(); n - 1];
    let mut upper = vec![S::zero(); n - 1];
    let mut diag = vec![S::zero(); n];
    for i in 0..n {
        diag[i] = shift * mass[i];
    }
    for i in 0..n - 1 {
        let c = edges[i + 1];
        let g = omega * c.powf(d - S::one()) / (points[i + 1] - points[i]);
        lower[i] = -g;
        upper[i] = -g;
        diag[i] += g;
        diag[i + 1] += g;
    }
    // boundary face at r = 1 with v(1) = 0
    let g_last = omega / (S::one() - points[n - 1]);
    diag[n - 1] += g_last;
    let weighted: Vec<S> = rhs.iter().zip(&mass).map(|(&f, &m)| f * m).collect();
    crate::linalg::solve_tridiagonal(&lower, &diag, &upper, &weighted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn kernel_reproduces_poisson_solution() {
        // -Delta u = 1 radially has u(r) = (1 - r^2)/(2 d)
        for dim in [2usize, 3, 5] {
            let grid = Grid::<f64>::new_graded(400, 2.0);
            let n = grid.len();
            let mut u = vec![0.0; n];
            for i in 0..n {
                let r = grid.point(i);
                let mut acc = 0.0;
                for j in 0..n {
                    let (a, b) = grid.cell(j);
                    // split the cell at the kink s = r and integrate exactly enough
                    let gl = crate::special::GaussLegendre::<f64>::new(8);
                    let s_split = r.clamp(a, b);
                    for (lo, hi) in [(a, s_split), (s_split, b)] {
                        if hi > lo {
                            acc += gl.integrate(lo, hi, |s| {
                                kernel(dim, r, s)
                                    * sphere_area::<f64>(dim)
                                    * s.powf(dim as f64 - 1.0)
                            });
                        }
                    }
                }
                u[i] = acc;
            }
            for i in 0..n {
                let r = grid.point(i);
                let want = (1.0 - r * r) / (2.0 * dim as f64);
                assert!(
                    (u[i] - want).abs() < 1e-9,
                    "dim={dim} r={r}: got {} want {want}",
                    u[i]
                );
            }
        }
    }

    #[test]
    fn resolvent_limit_matches_poisson() {
        // shift -> 0 recovers -Delta u = 1
        let grid = Grid::<f64>::new_graded(600, 2.0);
        let pts = grid.points().to_vec();
        let edges: Vec<f64> = (0..=grid.len())
            .map(|i| {
                if i == 0 {
                    0.0
                } else if i == grid.len() {
                    1.0
                } else {
                    grid.cell(i).0
                }
            })
            .collect();
        let rhs = vec![1.0; pts.len()];
        let v = solve_shifted(3, &pts, &edges, 0.0, &rhs).unwrap();
        for (i, &r) in pts.iter().enumerate() {
            let want = (1.0 - r * r) / 6.0;
            assert!((v[i] - want).abs() < 5e-6, "r={r}: {} vs {want}", v[i]);
        }
    }
}
