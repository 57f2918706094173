//! The potential operator R: measures to grid functions through the
//! resolvent density, Rμ(x) = ∫ r(x,y) μ(dy), plus the resolvent-based
//! total-variation estimator built from the Yosida functions
//! g_n = n(1 − n R_n 1).

use crate::domain::{Domain, DomainError};
use crate::grid::GridFunction;
use crate::measure::{Measure, MeasureError};
use crate::scalar::Scalar;

/// Rμ on the grid. Density parts go through the cell-averaged kernel matrix;
/// atoms contribute kernel columns evaluated at the grid points. At a grid
/// point equal to an atom location with a singular kernel the value is the
/// signed infinity sentinel; such points are finitely many and carry no
/// quadrature mass downstream.
pub fn potential<S: Scalar>(dom: &Domain<S>, mu: &Measure<S>) -> GridFunction<S> {
    let n = dom.len();
    let mut out = vec![S::zero(); n];
    if let Some(g) = mu.density() {
        assert_eq!(g.len(), n, "density on a different grid");
        let km = dom.kernel_matrix();
        let w = dom.quad_weights();
        let gv = g.values();
        for (i, slot) in out.iter_mut().enumerate() {
            let row = &km[i * n..(i + 1) * n];
            let mut acc = S::zero();
            for ((&k, &gj), &wj) in row.iter().zip(gv).zip(w) {
                if gj.is_finite() {
                    acc += k * gj * wj;
                }
            }
            *slot = acc;
        }
    }
    for atom in mu.atoms() {
        for (i, &x) in dom.points().iter().enumerate() {
            if out[i].is_finite() {
                let col = dom.kernel_value(x, atom.location);
                if col.is_finite() {
                    out[i] += atom.weight * col;
                } else {
                    out[i] = if atom.weight > S::zero() {
                        S::infinity()
                    } else {
                        S::neg_infinity()
                    };
                }
            }
        }
    }
    GridFunction::new(out)
}

/// Pairing ⟨μ, v⟩ = ∫ v g dm + Σ w_a v(loc_a), with v interpolated linearly
/// at atom locations (the admissible route for potentials of test
/// densities, which are continuous there).
pub fn measure_pairing<S: Scalar>(dom: &Domain<S>, mu: &Measure<S>, v: &GridFunction<S>) -> S {
    let mut acc = S::zero();
    if let Some(g) = mu.density() {
        acc += dom.inner(g, v);
    }
    for atom in mu.atoms() {
        acc += atom.weight * v.eval_linear(dom.grid(), atom.location);
    }
    acc
}

/// Yosida function g_n = n(1 − n R_n 1); nonnegative, with R(g_n·m)
/// increasing to 1 pointwise as n grows.
pub fn yosida_g<S: Scalar>(dom: &Domain<S>, n: S) -> Result<GridFunction<S>, DomainError> {
    let rn1 = dom.alpha_resolvent_one(n)?;
    Ok(rn1.map(|v| (n * (S::one() - n * v)).max(S::zero())))
}

#[derive(Clone, Copy, Debug)]
pub struct TvEstimate<S> {
    pub n: S,
    pub value: S,
}

/// Resolvent ladder for the total variation of a nonnegative measure:
/// the grid inner products ⟨g_n, Rμ⟩, which equal ⟨R g_n, μ⟩ by kernel
/// symmetry, increase to ‖μ‖_TV along the ladder.
pub fn tv_via_resolvent<S: Scalar>(
    dom: &Domain<S>,
    mu: &Measure<S>,
    n_list: &[S],
) -> Result<Vec<TvEstimate<S>>, MeasureError> {
    if !mu.is_nonnegative() {
        return Err(MeasureError::SignedMeasure);
    }
    let rmu = potential(dom, mu);
    let mut out = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let g = yosida_g(dom, n).expect("resolvent solve");
        out.push(TvEstimate {
            n,
            value: dom.inner(&g, &rmu),
        });
    }
    Ok(out)
}

/// True iff Rν ≤ Rμ + tol at every grid point, with the domain quadrature
/// tolerance; infinities dominate infinities.
pub fn dominates<S: Scalar>(dom: &Domain<S>, nu: &Measure<S>, mu: &Measure<S>) -> bool {
    let rnu = potential(dom, nu);
    let rmu = potential(dom, mu);
    let tol = dom.quad_tol();
    rnu.values().iter().zip(rmu.values()).all(|(&a, &b)| {
        if b.is_infinite() && b > S::zero() {
            true
        } else if a.is_infinite() {
            false
        } else {
            a <= b + tol.abs + tol.rel * b.abs()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainKind;
    use crate::grid::Grading;
    use crate::measure::Atom;

    fn interval(n: usize) -> Domain<f64> {
        Domain::new(DomainKind::IntervalLaplacian, n, Grading::BoundaryGraded).unwrap()
    }

    #[test]
    fn potential_of_lebesgue_matches_closed_form() {
        let dom = interval(512);
        let u = potential(&dom, &Measure::lebesgue(&dom));
        for (i, &x) in dom.points().iter().enumerate() {
            let want = 0.5 * x * (1.0 - x);
            assert!((u.at(i) - want).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn potential_of_dirac_is_kernel_column() {
        let dom = interval(128);
        let u = potential(&dom, &Measure::dirac(0.25, 1.0).unwrap());
        for (i, &x) in dom.points().iter().enumerate() {
            let want = x.min(0.25) * (1.0 - x.max(0.25));
            assert!((u.at(i) - want).abs() < 1e-14);
        }
        assert!((u.eval_linear(dom.grid(), 0.25) - 0.25 * 0.75).abs() < 1e-2);
    }

    #[test]
    fn fractional_dirac_emits_sentinel_only_on_grid_atom() {
        let dom: Domain<f64> = Domain::new(
            DomainKind::IntervalFractional(0.5),
            63,
            Grading::Uniform,
        )
        .unwrap();
        // 0.5 is a grid point of the uniform 63-point grid
        let u = potential(&dom, &Measure::dirac(0.5, 1.0).unwrap());
        let i_mid = dom.grid().nearest(0.5);
        assert!(u.at(i_mid).is_infinite() && u.at(i_mid) > 0.0);
        for (i, v) in u.values().iter().enumerate() {
            if i != i_mid {
                assert!(v.is_finite() && *v > 0.0);
            }
        }
        // negative atom gives the negative sentinel
        let un = potential(&dom, &Measure::dirac(0.5, -2.0).unwrap());
        assert!(un.at(i_mid).is_infinite() && un.at(i_mid) < 0.0);
    }

    #[test]
    fn potential_is_linear() {
        let dom = interval(96);
        let g = Measure::from_density(
            &dom,
            GridFunction::from_fn(dom.grid(), |x| (3.0 * x).sin()),
        )
        .unwrap();
        let d = Measure::dirac(0.3, 0.7).unwrap();
        let combo = Measure::linear_combination(2.0, &g, -0.5, &d);
        let direct = potential(&dom, &combo);
        let parts = potential(&dom, &g)
            .scale(2.0)
            .add(&potential(&dom, &d).scale(-0.5));
        for (a, b) in direct.values().iter().zip(parts.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_quadrature_is_self_adjoint_within_tolerance() {
        for kind in [
            DomainKind::IntervalLaplacian,
            DomainKind::IntervalFractional(0.5),
            DomainKind::IntervalFractional(1.5),
            DomainKind::RadialBallLaplacian(3),
        ] {
            let dom: Domain<f64> = Domain::new(kind, 128, Grading::BoundaryGraded).unwrap();
            let g = GridFunction::from_fn(dom.grid(), |x| (5.0 * x).cos());
            let h = GridFunction::from_fn(dom.grid(), |x| x * x - 0.3);
            let rg = potential(&dom, &Measure::from_density(&dom, g.clone()).unwrap());
            let rh = potential(&dom, &Measure::from_density(&dom, h.clone()).unwrap());
            let lhs = dom.inner(&rg, &h);
            let rhs = dom.inner(&g, &rh);
            assert!(
                (lhs - rhs).abs() < 2e-5,
                "{kind:?}: defect {}",
                (lhs - rhs).abs()
            );
        }
    }

    #[test]
    fn yosida_examples() {
        let dom = interval(512);
        let g1 = yosida_g(&dom, 1.0).unwrap();
        let i = dom.grid().nearest(0.5);
        let want = 1.0 / 0.5f64.cosh();
        assert!((g1.at(i) - want).abs() < 1e-4, "got {}", g1.at(i));
        for n in [1.0, 10.0, 100.0] {
            let g = yosida_g(&dom, n).unwrap();
            assert!(g.values().iter().all(|v| *v >= 0.0));
            let rg = potential(
                &dom,
                &Measure::from_density(&dom, g).unwrap(),
            );
            assert!(
                rg.values().iter().all(|v| *v <= 1.0 + 1e-6),
                "R g_n must stay below 1 (n={n})"
            );
        }
        // R(g_n m) is nondecreasing in n pointwise
        let r1 = potential(&dom, &Measure::from_density(&dom, yosida_g(&dom, 1.0).unwrap()).unwrap());
        let r10 = potential(&dom, &Measure::from_density(&dom, yosida_g(&dom, 10.0).unwrap()).unwrap());
        for (a, b) in r1.values().iter().zip(r10.values()) {
            assert!(*a <= *b + 1e-6);
        }
    }

    #[test]
    fn tv_ladder_examples() {
        let dom = interval(512);
        let ns = [1.0, 10.0, 100.0, 1000.0];
        // closed form for mu = 1·m: <g_n, R mu> = 1 - 2 tanh(sqrt(n)/2)/sqrt(n)
        let est = tv_via_resolvent(&dom, &Measure::lebesgue(&dom), &ns).unwrap();
        let mut prev = -1.0;
        for e in &est {
            let s = e.n.sqrt();
            let want = 1.0 - 2.0 * (s / 2.0).tanh() / s;
            assert!(
                (e.value - want).abs() < 2e-3,
                "n={}: got {} want {want}",
                e.n,
                e.value
            );
            assert!(e.value >= prev, "ladder must be nondecreasing");
            assert!(e.value <= 1.0 + 1e-9, "bounded by the tv norm");
            prev = e.value;
        }
        // the 5% recovery level is reached for n >= ~1600 on this measure
        let est4 = tv_via_resolvent(&dom, &Measure::lebesgue(&dom), &[1e4]).unwrap();
        assert!(est4[0].value > 0.95);

        // atom: recovery is exponentially fast in sqrt(n)
        let mu = Measure::dirac(0.5, 2.0).unwrap();
        let est = tv_via_resolvent(&dom, &mu, &ns).unwrap();
        assert!((est.last().unwrap().value - 2.0).abs() < 0.05 * 2.0);
        for w in est.windows(2) {
            assert!(w[0].value <= w[1].value + 1e-12);
        }

        let est = tv_via_resolvent(&dom, &Measure::zero(), &ns).unwrap();
        assert!(est.iter().all(|e| e.value == 0.0));

        let signed = Measure::dirac(0.5, -1.0).unwrap();
        assert!(matches!(
            tv_via_resolvent(&dom, &signed, &ns),
            Err(MeasureError::SignedMeasure)
        ));
    }

    #[test]
    fn dominates_examples() {
        let dom = interval(128);
        let mu = Measure::new(
            &dom,
            Some(GridFunction::from_fn(dom.grid(), |x| 1.0 + x)),
            vec![Atom { location: 0.6, weight: 0.5 }],
        )
        .unwrap();
        let half = mu.scale(0.5);
        assert!(dominates(&dom, &half, &mu));
        assert!(dominates(&dom, &Measure::zero(), &mu));
        // a Dirac is not dominated by Lebesgue: R delta peaks above 1/8
        let delta = Measure::dirac(0.5, 1.0).unwrap();
        assert!(!dominates(&dom, &delta, &Measure::lebesgue(&dom)));
    }

    #[test]
    fn potential_finite_quasi_everywhere() {
        // R|mu| finite except at singular atom grid points
        let dom: Domain<f64> = Domain::new(DomainKind::IntervalFractional(0.5), 63, Grading::Uniform).unwrap();
        let mu = Measure::new(
            &dom,
            Some(GridFunction::constant(dom.len(), 2.0)),
            vec![
                Atom { location: 0.5, weight: -1.0 },
                Atom { location: 0.313, weight: 0.25 },
            ],
        )
        .unwrap();
        let (pos, neg) = crate::measure::pos_neg_parts(&mu);
        let abs = pos.add(&neg);
        let r = potential(&dom, &abs);
        let mid = dom.grid().nearest(0.5);
        let mut infinite = 0;
        for (i, v) in r.values().iter().enumerate() {
            if v.is_infinite() {
                infinite += 1;
                assert_eq!(i, mid, "only the on-grid atom may be infinite");
            }
        }
        assert_eq!(infinite, 1);
    }
}
