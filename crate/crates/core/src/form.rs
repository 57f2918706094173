//! Discrete Dirichlet forms, one per operator kind, normalized so that the
//! form's discrete Green function matches the kernel module:
//! piecewise-linear stiffness with zero boundary extension on the interval,
//! the radially weighted gradient form on the ball, and the dense
//! centered-difference pairing for the fractional kind.

use crate::domain::{Domain, DomainKind};
use crate::grid::{Grid, GridFunction};
use crate::radial;
use crate::scalar::Scalar;

/// E(u, v) for grid functions extended by zero at the boundary (interval
/// kinds) or at the outer radius (ball kind; the center is natural).
pub fn dirichlet_form<S: Scalar>(dom: &Domain<S>, u: &GridFunction<S>, v: &GridFunction<S>) -> S {
    assert_eq!(u.len(), dom.len());
    assert_eq!(v.len(), dom.len());
    let pts = dom.points();
    let n = pts.len();
    match dom.kind() {
        DomainKind::IntervalLaplacian => {
            let mut acc = S::zero();
            for seg in 0..=n {
                let (xl, ul, vl) = if seg == 0 {
                    (S::zero(), S::zero(), S::zero())
                } else {
                    (pts[seg - 1], u.at(seg - 1), v.at(seg - 1))
                };
                let (xr, ur, vr) = if seg == n {
                    (S::one(), S::zero(), S::zero())
                } else {
                    (pts[seg], u.at(seg), v.at(seg))
                };
                let h = xr - xl;
                acc += (ur - ul) * (vr - vl) / h;
            }
            acc
        }
        DomainKind::RadialBallLaplacian(d) => {
            let omega = radial::sphere_area::<S>(d);
            let dm1 = S::of_usize(d) - S::one();
            let gl = crate::special::GaussLegendre::new(4);
            let mut acc = S::zero();
            // no gradient contribution inside (0, x_1): natural center
            for seg in 1..=n {
                let (xl, ul, vl) = (pts[seg - 1], u.at(seg - 1), v.at(seg - 1));
                let (xr, ur, vr) = if seg == n {
                    (S::one(), S::zero(), S::zero())
                } else {
                    (pts[seg], u.at(seg), v.at(seg))
                };
                let h = xr - xl;
                let weight = gl.integrate(xl, xr, |r| r.powf(dm1));
                acc += omega * (ur - ul) / h * ((vr - vl) / h) * weight;
            }
            acc
        }
        DomainKind::IntervalFractional(_) => {
            let op = dom.frac_operator();
            let internal = Grid::new_uniform(op.len());
            let ui: Vec<S> = internal
                .points()
                .iter()
                .map(|&x| u.eval_linear(dom.grid(), x))
                .collect();
            let vi: Vec<S> = internal
                .points()
                .iter()
                .map(|&x| v.eval_linear(dom.grid(), x))
                .collect();
            op.energy(&ui, &vi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grading;

    #[test]
    fn interval_energy_of_parabola() {
        // u = x(1-x)/2 has int (u')^2 = 1/12
        let dom: Domain<f64> = Domain::new(DomainKind::IntervalLaplacian, 512, Grading::BoundaryGraded).unwrap();
        let u = GridFunction::from_fn(dom.grid(), |x| 0.5 * x * (1.0 - x));
        let e = dirichlet_form(&dom, &u, &u);
        assert!((e - 1.0 / 12.0).abs() < 1e-5, "got {e}");
    }

    #[test]
    fn interval_form_recovers_point_mass_of_green_column() {
        // E(r(·, a), v) = v(a) exactly for piecewise-linear v when a is a node
        let dom: Domain<f64> = Domain::new(DomainKind::IntervalLaplacian, 64, Grading::Uniform).unwrap();
        let i = 31;
        let a = dom.grid().point(i);
        let col = GridFunction::from_fn(dom.grid(), |x| x.min(a) * (1.0 - x.max(a)));
        let v = GridFunction::from_fn(dom.grid(), |x| (2.0 * x).sin());
        let e = dirichlet_form(&dom, &col, &v);
        assert!((e - v.at(i)).abs() < 1e-12, "got {e} want {}", v.at(i));
    }

    #[test]
    fn radial_energy_of_poisson_solution() {
        // u = (1-r^2)/(2d): E = omega int_0^1 (r/d)^2 r^(d-1) dr = omega/(d^2 (d+2))
        for d in [2usize, 3] {
            let dom: Domain<f64> = Domain::new(DomainKind::RadialBallLaplacian(d), 512, Grading::BoundaryGraded)
                .unwrap();
            let df = d as f64;
            let u = GridFunction::from_fn(dom.grid(), |r| (1.0 - r * r) / (2.0 * df));
            let e = dirichlet_form(&dom, &u, &u);
            let want = radial::sphere_area::<f64>(d) / (df * df * (df + 2.0));
            assert!((e - want).abs() < 1e-5 * want.max(1.0), "d={d}: {e} vs {want}");
        }
    }

    #[test]
    fn fractional_form_matches_eigen_identity() {
        // E((1-t^2)^(a/2) on ball coords, itself) known through the
        // diagonalization: for u_0 = (x(1-x))^(alpha/2), (-L)u_0 is constant
        // Gamma(1+alpha) * 2^alpha scaled to (0,1), so E(u_0, v) =
        // Gamma(1+alpha) 2^alpha <1, v> ... checked against the operator.
        let alpha = 1.2f64;
        let dom: Domain<f64> = Domain::new(DomainKind::IntervalFractional(alpha), 128, Grading::Uniform).unwrap();
        let u = GridFunction::from_fn(dom.grid(), |x| {
            (x * (1.0 - x)).powf(alpha / 2.0) / crate::special::gamma(1.0 + alpha)
        });
        let v = GridFunction::from_fn(dom.grid(), |x| x * (1.0 - x));
        let e = dirichlet_form(&dom, &u, &v);
        // (-Delta)^(alpha/2) u = 1 on (0,1), so E(u, v) = int v dm
        let want = dom.integral(&v);
        assert!(
            (e - want).abs() < 5e-3 * want.max(1.0),
            "fractional form defect: {e} vs {want}"
        );
    }
}
