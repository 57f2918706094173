//! Executable cross-checks for the equivalent solution concepts: the kernel
//! identity, duality pairings against bounded test densities, the
//! truncation-correction potentials and their convergence ladder, the a
//! priori L¹ and energy estimates, and the positivity principle.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::Domain;
use crate::form::dirichlet_form;
use crate::grid::GridFunction;
use crate::measure::{decompose, pos_neg_parts, tv_norm, Measure};
use crate::potential::{measure_pairing, potential};
use crate::scalar::Scalar;
use crate::solver::{nonlinearity_density, truncate, Nonlinearity};

/// One inequality check: lhs ≤ rhs within the recorded slack.
#[derive(Clone, Copy, Debug)]
pub struct EstimateCheck<S> {
    pub lhs: S,
    pub rhs: S,
    pub holds: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct EnergyCheck<S> {
    pub k: S,
    pub lhs: S,
    pub rhs: S,
    pub holds: bool,
}

/// Numerical witnesses for a candidate solution.
#[derive(Clone, Debug)]
pub struct VerificationReport<S> {
    pub resolvent_residual: S,
    pub stampacchia_max_residual: S,
    /// per k: sup distance of the correction potential to Rμ_c away from
    /// the concentrated support
    pub nu_k_convergence: Vec<(S, S)>,
    pub l1_estimate: EstimateCheck<S>,
    pub energy_estimates: Vec<EnergyCheck<S>>,
    pub positivity_ok: Option<bool>,
}

/// Sup over non-atom grid points of |u − R(f_u·m + μ)|.
pub fn check_resolvent_identity<S: Scalar>(
    dom: &Domain<S>,
    u: &GridFunction<S>,
    f: &Nonlinearity<S>,
    mu: &Measure<S>,
) -> S {
    let fu = nonlinearity_density(dom, f, u);
    let total = Measure::from_density(dom, fu)
        .expect("density on own grid")
        .add(mu);
    let ru = potential(dom, &total);
    let atol = S::of(1e-14);
    let mut best = S::zero();
    for ((&a, &b), &x) in u.values().iter().zip(ru.values()).zip(dom.points()) {
        let at_atom = mu.atoms().iter().any(|at| (at.location - x).abs() <= atol);
        if !at_atom && a.is_finite() && b.is_finite() {
            best = best.max((a - b).abs());
        }
    }
    best
}

/// Standard battery of bounded test densities: the constant one, ten
/// pseudo-random smooth profiles from a fixed seed, and two
/// boundary-localized bumps.
pub fn standard_battery<S: Scalar>(dom: &Domain<S>, seed: u64) -> Vec<GridFunction<S>> {
    let mut out = Vec::with_capacity(13);
    out.push(GridFunction::constant(dom.len(), S::one()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10 {
        let a: f64 = rng.gen_range(-1.0..1.0);
        let b: f64 = rng.gen_range(-1.0..1.0);
        let c: f64 = rng.gen_range(-1.0..1.0);
        let k1: f64 = rng.gen_range(1.0..7.0);
        let k2: f64 = rng.gen_range(1.0..12.0);
        out.push(GridFunction::from_fn(dom.grid(), move |x| {
            let xf = x.as_f64();
            S::of(a * (k1 * xf).sin() + b * (k2 * xf).cos() + c * (xf - 0.5))
        }));
    }
    for center in [0.05f64, 0.95] {
        out.push(GridFunction::from_fn(dom.grid(), move |x| {
            let d = (x.as_f64() - center) / 0.04;
            S::of((-d * d).exp())
        }));
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct StampacchiaEntry<S> {
    pub residual: Option<S>,
    pub admissible: bool,
}

/// Duality residuals |⟨u,v⟩ − ⟨f_u, Rv⟩ − ⟨μ, Rv⟩| over a battery of bounded
/// test densities; inadmissible pairings (infinite ⟨|μ|, R|v|⟩) are
/// reported per entry instead of contributing to the max.
pub fn check_stampacchia<S: Scalar>(
    dom: &Domain<S>,
    u: &GridFunction<S>,
    f: &Nonlinearity<S>,
    mu: &Measure<S>,
    v_list: &[GridFunction<S>],
) -> (S, Vec<StampacchiaEntry<S>>) {
    let fu = nonlinearity_density(dom, f, u);
    let (mu_pos, mu_neg) = pos_neg_parts(mu);
    let mu_abs = mu_pos.add(&mu_neg);
    let mut entries = Vec::with_capacity(v_list.len());
    let mut max_res = S::zero();
    for v in v_list {
        let rv = potential(
            dom,
            &Measure::from_density(dom, v.clone()).expect("density on own grid"),
        );
        let r_abs_v = potential(
            dom,
            &Measure::from_density(dom, v.map(|t| t.abs())).expect("density on own grid"),
        );
        let admissibility = measure_pairing(dom, &mu_abs, &r_abs_v);
        if !admissibility.is_finite() {
            entries.push(StampacchiaEntry {
                residual: None,
                admissible: false,
            });
            continue;
        }
        let lhs = dom.inner(u, v);
        let f_term = dom.inner(&fu, &rv);
        let mu_term = measure_pairing(dom, mu, &rv);
        let residual = (lhs - f_term - mu_term).abs();
        max_res = max_res.max(residual);
        entries.push(StampacchiaEntry {
            residual: Some(residual),
            admissible: true,
        });
    }
    (max_res, entries)
}

/// Truncation-correction measure at level k, recovered two ways: weak
/// actions through the discrete Dirichlet form, and the potential route
/// R ν_k = T_k u − R(f_u·m + μ_d).
#[derive(Clone, Debug)]
pub struct Correction<S> {
    pub k: S,
    pub actions: Vec<S>,
    pub potential: GridFunction<S>,
}

pub fn reconstruct_correction<S: Scalar>(
    dom: &Domain<S>,
    u: &GridFunction<S>,
    f: &Nonlinearity<S>,
    mu_d: &Measure<S>,
    k: S,
    v_list: &[GridFunction<S>],
) -> Correction<S> {
    let tku = truncate(u, k);
    let fu = nonlinearity_density(dom, f, u);
    let smooth = Measure::from_density(dom, fu.clone())
        .expect("density on own grid")
        .add(mu_d);
    let r_smooth = potential(dom, &smooth);
    let pot = tku.sub(&r_smooth);
    let actions = v_list
        .iter()
        .map(|v| dirichlet_form(dom, &tku, v) - dom.inner(&fu, v) - measure_pairing(dom, mu_d, v))
        .collect();
    Correction {
        k,
        actions,
        potential: pot,
    }
}

/// Convergence ladder: for each k, the sup of |Rν_k − Rμ_c| over grid
/// points at distance greater than `exclusion_radius` from the atoms of
/// μ_c (where Rμ_c may blow up).
pub fn correction_ladder<S: Scalar>(
    dom: &Domain<S>,
    u: &GridFunction<S>,
    f: &Nonlinearity<S>,
    mu_d: &Measure<S>,
    mu_c: &Measure<S>,
    k_list: &[S],
    exclusion_radius: S,
) -> Vec<(S, S)> {
    let r_mu_c = potential(dom, mu_c);
    let mask = dom.exclusion_mask(&mu_c.atom_locations(), exclusion_radius);
    k_list
        .iter()
        .map(|&k| {
            let corr = reconstruct_correction(dom, u, f, mu_d, k, &[]);
            let gap = corr.potential.sub(&r_mu_c);
            (k, dom.sup_abs_masked(&gap, &mask))
        })
        .collect()
}

/// ‖f_u‖_{L¹} ≤ 2‖f(·,0)‖_{L¹} + ‖μ‖_TV within the quadrature slack.
pub fn check_l1_estimate<S: Scalar>(
    dom: &Domain<S>,
    u: &GridFunction<S>,
    f: &Nonlinearity<S>,
    mu: &Measure<S>,
) -> EstimateCheck<S> {
    let fu = nonlinearity_density(dom, f, u);
    let lhs = dom.l1_norm(&fu);
    let f0 = GridFunction::from_fn(dom.grid(), |x| f.eval(x, S::zero()));
    let rhs = S::two() * dom.l1_norm(&f0) + tv_norm(dom, mu);
    let tol = dom.quad_tol();
    let slack = S::of(10.0) * (tol.abs + tol.rel * rhs.abs());
    EstimateCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + slack,
    }
}

/// E(T_k u, T_k u) ≤ k(‖μ‖_TV + ‖f_u‖_{L¹}) within the quadrature slack.
pub fn check_energy_estimate<S: Scalar>(
    dom: &Domain<S>,
    u: &GridFunction<S>,
    f: &Nonlinearity<S>,
    mu: &Measure<S>,
    k_list: &[S],
) -> Vec<EnergyCheck<S>> {
    let fu = nonlinearity_density(dom, f, u);
    let fu_l1 = dom.l1_norm(&fu);
    let tv = tv_norm(dom, mu);
    let tol = dom.quad_tol();
    k_list
        .iter()
        .map(|&k| {
            let tku = truncate(u, k);
            let lhs = dirichlet_form(dom, &tku, &tku);
            let rhs = k * (tv + fu_l1);
            let slack = S::of(10.0) * (tol.abs + tol.rel * rhs.abs());
            EnergyCheck {
                k,
                lhs,
                rhs,
                holds: lhs <= rhs + slack,
            }
        })
        .collect()
}

/// μ ≥ 0 together with the sign condition forces u ≥ 0 away from atoms.
/// Returns None when the preconditions do not apply.
pub fn check_positivity<S: Scalar>(
    dom: &Domain<S>,
    u: &GridFunction<S>,
    f: &Nonlinearity<S>,
    mu: &Measure<S>,
    tol: S,
) -> Option<bool> {
    if !mu.is_nonnegative() || !f.flags.sign_condition {
        return None;
    }
    let atol = S::of(1e-14);
    let ok = u
        .values()
        .iter()
        .zip(dom.points())
        .all(|(&v, &x)| {
            let at_atom = mu.atoms().iter().any(|a| (a.location - x).abs() <= atol);
            at_atom || !v.is_finite() || v >= -S::of(10.0) * tol
        });
    Some(ok)
}

#[derive(Clone, Debug)]
pub struct VerifyOptions<S> {
    pub k_list: Vec<S>,
    pub exclusion_radius: S,
    pub battery_seed: u64,
    pub solver_tol: S,
}

impl<S: Scalar> Default for VerifyOptions<S> {
    fn default() -> Self {
        Self {
            k_list: vec![S::one(), S::two(), S::of(4.0), S::of(8.0), S::of(16.0)],
            exclusion_radius: S::of(0.05),
            battery_seed: 424242,
            solver_tol: S::of(1e-8),
        }
    }
}

/// Solve-once, verify-everything: assemble the full report for a candidate
/// solution of −Lu = f(·,u) + μ.
pub fn verify_all<S: Scalar>(
    dom: &Domain<S>,
    u: &GridFunction<S>,
    f: &Nonlinearity<S>,
    mu: &Measure<S>,
    opts: &VerifyOptions<S>,
) -> VerificationReport<S> {
    let (mu_d, mu_c) = decompose(dom, mu).expect("measure atoms are interior");
    let battery = standard_battery(dom, opts.battery_seed);
    let (stamp_max, _) = check_stampacchia(dom, u, f, mu, &battery);
    VerificationReport {
        resolvent_residual: check_resolvent_identity(dom, u, f, mu),
        stampacchia_max_residual: stamp_max,
        nu_k_convergence: correction_ladder(
            dom,
            u,
            f,
            &mu_d,
            &mu_c,
            &opts.k_list,
            opts.exclusion_radius,
        ),
        l1_estimate: check_l1_estimate(dom, u, f, mu),
        energy_estimates: check_energy_estimate(dom, u, f, mu, &opts.k_list),
        positivity_ok: check_positivity(dom, u, f, mu, opts.solver_tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainKind;
    use crate::grid::Grading;
    use crate::solver::{solve_linear, solve_semilinear, NonlinearityFlags, SolveOptions};

    fn interval(n: usize) -> Domain<f64> {
        Domain::new(DomainKind::IntervalLaplacian, n, Grading::BoundaryGraded).unwrap()
    }

    fn cubic() -> Nonlinearity<f64> {
        Nonlinearity::new(
            |_, y: f64| -(y * y * y),
            NonlinearityFlags {
                nonincreasing_in_y: true,
                sign_condition: true,
                zero_integrable: true,
            },
        )
    }

    #[test]
    fn resolvent_identity_examples() {
        let dom = interval(256);
        let mu = Measure::lebesgue(&dom);
        let (u, _) = solve_linear(&dom, &mu);
        let r = check_resolvent_identity(&dom, &u, &Nonlinearity::zero(), &mu);
        assert!(r < 1e-12, "linear case must be definitionally exact, got {r}");

        let perturbed = u.map(|v| v + 0.1);
        let r = check_resolvent_identity(&dom, &perturbed, &Nonlinearity::zero(), &mu);
        assert!((r - 0.1).abs() < 1e-12);

        let (us, rep) = solve_semilinear(&dom, &cubic(), &mu, SolveOptions::default()).unwrap();
        let r = check_resolvent_identity(&dom, &us, &cubic(), &mu);
        assert!(r <= rep.final_residual + 1e-12);
    }

    #[test]
    fn stampacchia_examples() {
        let dom = interval(512);
        let mu = Measure::lebesgue(&dom);
        let (u, _) = solve_linear(&dom, &mu);
        let battery = standard_battery(&dom, 7);
        let (max_res, entries) = check_stampacchia(&dom, &u, &Nonlinearity::zero(), &mu, &battery);
        assert!(entries.iter().all(|e| e.admissible));
        assert!(max_res < 1e-6, "linear duality residual {max_res}");

        let (us, _) = solve_semilinear(&dom, &cubic(), &mu, SolveOptions::default()).unwrap();
        let (max_res, _) = check_stampacchia(&dom, &us, &cubic(), &mu, &battery);
        assert!(max_res <= 1e-5, "semilinear duality residual {max_res}");

        // residual grows linearly in the perturbation size
        let (r1, _) = check_stampacchia(
            &dom,
            &u.map(|v| v + 0.01),
            &Nonlinearity::zero(),
            &mu,
            &battery[..1],
        );
        let (r2, _) = check_stampacchia(
            &dom,
            &u.map(|v| v + 0.02),
            &Nonlinearity::zero(),
            &mu,
            &battery[..1],
        );
        assert!((r2 / r1 - 2.0).abs() < 1e-6);
    }

    #[test]
    fn correction_vanishes_for_smooth_data_above_sup() {
        let dom = interval(256);
        let mu = Measure::lebesgue(&dom);
        let opts = SolveOptions {
            tol: 1e-10,
            ..Default::default()
        };
        let (u, _) = solve_semilinear(&dom, &cubic(), &mu, opts).unwrap();
        // sup|u| <= 1/8, so k = 1 leaves truncation inactive
        let corr = reconstruct_correction(&dom, &u, &cubic(), &mu, 1.0, &[]);
        let sup = corr
            .potential
            .values()
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(sup < 1e-8, "R nu_k should vanish, got {sup}");
    }

    #[test]
    fn correction_at_k_zero_is_minus_smooth_potential() {
        let dom = interval(128);
        let mu = Measure::lebesgue(&dom);
        let (u, _) = solve_linear(&dom, &mu);
        let corr = reconstruct_correction(&dom, &u, &Nonlinearity::zero(), &mu, 0.0, &[]);
        let r = potential(&dom, &mu);
        for (a, b) in corr.potential.values().iter().zip(r.values()) {
            assert!((a + b).abs() < 1e-14);
        }
    }

    #[test]
    fn correction_routes_are_mutually_consistent() {
        // weak action = <(-L) R nu_k, v> up to form discretization error
        let dom = interval(512);
        let mu = Measure::lebesgue(&dom);
        let (u, _) = solve_semilinear(&dom, &cubic(), &mu, SolveOptions::default()).unwrap();
        let battery = standard_battery(&dom, 11);
        let k = 0.05; // active truncation
        let corr = reconstruct_correction(&dom, &u, &cubic(), &mu, k, &battery);
        for (v, &action) in battery.iter().zip(&corr.actions) {
            let operator_route = dirichlet_form(&dom, &corr.potential, v);
            assert!(
                (action - operator_route).abs() < 2e-4,
                "route gap {}",
                (action - operator_route).abs()
            );
        }
    }

    #[test]
    fn fractional_dirac_ladder_is_nonincreasing() {
        let dom: Domain<f64> = Domain::new(
            DomainKind::IntervalFractional(0.5),
            255,
            Grading::Uniform,
        )
        .unwrap();
        let mu = Measure::dirac(0.5, 1.0).unwrap();
        let (u, _) = solve_linear(&dom, &mu);
        let (mu_d, mu_c) = decompose(&dom, &mu).unwrap();
        assert!(mu_d.is_zero() && !mu_c.is_zero());
        let ladder = correction_ladder(
            &dom,
            &u,
            &Nonlinearity::zero(),
            &mu_d,
            &mu_c,
            &[1.0, 2.0, 4.0, 8.0, 16.0],
            0.1,
        );
        for w in ladder.windows(2) {
            assert!(w[1].1 <= w[0].1 * 1.1, "ladder must trend down: {ladder:?}");
        }
        let first = ladder.first().unwrap().1;
        let last = ladder.last().unwrap().1;
        assert!(last <= 0.25 * first.max(1e-12), "{ladder:?}");
    }

    #[test]
    fn l1_estimate_closed_form_instance() {
        let dom = interval(512);
        let f = Nonlinearity::new(
            |_, y: f64| -y,
            NonlinearityFlags {
                nonincreasing_in_y: true,
                sign_condition: true,
                zero_integrable: true,
            },
        );
        let mu = Measure::lebesgue(&dom);
        let (u, _) = solve_semilinear(
            &dom,
            &f,
            &mu,
            SolveOptions {
                tol: 1e-10,
                ..Default::default()
            },
        )
        .unwrap();
        let chk = check_l1_estimate(&dom, &u, &f, &mu);
        let want = 1.0 - 2.0 * 0.5f64.tanh();
        assert!((chk.lhs - want).abs() < 1e-4, "lhs {} want {want}", chk.lhs);
        assert!((chk.rhs - 1.0).abs() < 1e-9);
        assert!(chk.holds);

        // f == 0: lhs = 0
        let chk = check_l1_estimate(&dom, &potential(&dom, &mu), &Nonlinearity::zero(), &mu);
        assert!(chk.lhs == 0.0 && chk.holds);
    }

    #[test]
    fn energy_estimate_examples() {
        let dom = interval(512);
        let mu = Measure::lebesgue(&dom);
        let (u, _) = solve_linear(&dom, &mu);
        let checks = check_energy_estimate(&dom, &u, &Nonlinearity::zero(), &mu, &[0.125, 0.5, 1.0]);
        for c in &checks {
            assert!(c.holds);
            assert!((c.lhs - 1.0 / 12.0).abs() < 1e-4, "inactive truncation energy");
            assert!((c.rhs - c.k).abs() < 1e-9);
        }
        // k = 0 degenerates to equality 0 <= 0
        let z = check_energy_estimate(&dom, &u, &Nonlinearity::zero(), &mu, &[0.0]);
        assert!(z[0].lhs.abs() < 1e-15 && z[0].rhs == 0.0 && z[0].holds);

        // tent function: active truncation has energy exactly k
        let delta = Measure::dirac(0.5, 1.0).unwrap();
        let (ud, _) = solve_linear(&dom, &delta);
        for c in check_energy_estimate(&dom, &ud, &Nonlinearity::zero(), &delta, &[0.05, 0.1]) {
            assert!(c.holds);
            assert!((c.lhs - c.k).abs() < 5e-3 * c.k.max(1e-9), "tent energy ~ k");
        }
    }

    #[test]
    fn positivity_checker_examples() {
        let dom = interval(256);
        let mu = Measure::lebesgue(&dom);
        let (u, _) = solve_semilinear(&dom, &cubic(), &mu, SolveOptions::default()).unwrap();
        assert_eq!(check_positivity(&dom, &u, &cubic(), &mu, 1e-8), Some(true));

        let (u0, _) = solve_semilinear(&dom, &cubic(), &Measure::zero(), SolveOptions::default())
            .unwrap();
        assert_eq!(check_positivity(&dom, &u0, &cubic(), &Measure::zero(), 1e-8), Some(true));

        let signed = Measure::dirac(0.5, -1.0).unwrap();
        let (us, _) = solve_linear(&dom, &signed);
        assert_eq!(check_positivity(&dom, &us, &cubic(), &signed, 1e-8), None);
    }
}
