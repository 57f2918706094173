//! Monte Carlo cross-verification along killed paths: the accumulated
//! forcing functional, the lifetime Laplace transform, and a window-hitting
//! probe used to falsify the point-polarity table. Paths use Euler stepping
//! with an end-of-step kill test; per-path RNG streams come from a
//! counter-based split of one root seed so results are reproducible
//! regardless of worker count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::domain::{Domain, DomainKind};
use crate::grid::GridFunction;
use crate::scalar::Scalar;
use crate::solver::Nonlinearity;

#[derive(Clone, Copy, Debug)]
pub struct PathEstimate<S> {
    pub mean: S,
    pub std_error: S,
    pub n_paths: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct McOptions {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum McError {
    #[error("time step must be positive, got {0}")]
    BadTimeStep(f64),
    #[error("at least 100 paths are required, got {0}")]
    TooFewPaths(usize),
    #[error("start point {0} must be interior")]
    BoundaryStart(f64),
    #[error("window {window} is below the path resolution scale {scale}")]
    WindowTooNarrow { window: f64, scale: f64 },
}

/// Hard cap on simulated time per path; exit beyond it is a negligible-mass
/// tail for every kind instantiated here.
const T_MAX: f64 = 64.0;

fn validate(dom_start: f64, opts: &McOptions) -> Result<(), McError> {
    if opts.dt <= 0.0 {
        return Err(McError::BadTimeStep(opts.dt));
    }
    if opts.n_paths < 100 {
        return Err(McError::TooFewPaths(opts.n_paths));
    }
    if !(dom_start > 0.0 && dom_start < 1.0) {
        return Err(McError::BoundaryStart(dom_start));
    }
    Ok(())
}

/// Characteristic spatial scale of one Euler step.
pub fn step_scale<S: Scalar>(dom: &Domain<S>, dt: f64) -> f64 {
    match dom.kind() {
        DomainKind::IntervalFractional(alpha) => dt.powf(1.0 / alpha.as_f64()),
        _ => (2.0 * dt).sqrt(),
    }
}

/// Standard symmetric stable increment with characteristic function
/// exp(-|xi|^alpha): Chambers-Mallows-Stuck construction.
pub fn sample_standard_stable(alpha: f64, rng: &mut ChaCha8Rng) -> f64 {
    let v: f64 = rng.gen_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2);
    if (alpha - 1.0).abs() < 1e-9 {
        return v.tan();
    }
    let w: f64 = -rng.gen_range(1e-300f64..1.0).ln();
    let num = (alpha * v).sin();
    let den = v.cos().powf(1.0 / alpha);
    let tail = ((1.0 - alpha) * v).cos() / w;
    num / den * tail.powf((1.0 - alpha) / alpha)
}

/// State of one killed path, radial kinds carried as a full vector.
enum PathState {
    Line(f64),
    Ball(Vec<f64>),
}

impl PathState {
    fn coordinate(&self) -> f64 {
        match self {
            PathState::Line(x) => *x,
            PathState::Ball(v) => v.iter().map(|c| c * c).sum::<f64>().sqrt(),
        }
    }

    fn alive(&self) -> bool {
        match self {
            PathState::Line(x) => *x > 0.0 && *x < 1.0,
            PathState::Ball(_) => self.coordinate() < 1.0,
        }
    }
}

fn start_state<S: Scalar>(dom: &Domain<S>, x: f64) -> PathState {
    match dom.kind() {
        DomainKind::RadialBallLaplacian(d) => {
            let mut v = vec![0.0; d];
            v[0] = x;
            PathState::Ball(v)
        }
        _ => PathState::Line(x),
    }
}

fn step<S: Scalar>(dom: &Domain<S>, state: &mut PathState, dt: f64, rng: &mut ChaCha8Rng) {
    match (dom.kind(), state) {
        (DomainKind::IntervalLaplacian, PathState::Line(x)) => {
            let z: f64 = rng.sample(StandardNormal);
            *x += (2.0 * dt).sqrt() * z;
        }
        (DomainKind::IntervalFractional(alpha), PathState::Line(x)) => {
            let s = sample_standard_stable(alpha.as_f64(), rng);
            *x += dt.powf(1.0 / alpha.as_f64()) * s;
        }
        (DomainKind::RadialBallLaplacian(_), PathState::Ball(v)) => {
            let sigma = (2.0 * dt).sqrt();
            for c in v.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *c += sigma * z;
            }
        }
        _ => unreachable!("path state matches the domain kind"),
    }
}

fn run_paths<S, F>(opts: &McOptions, per_path: F) -> PathEstimate<S>
where
    S: Scalar,
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let seed = opts.seed;
    let values: Vec<f64> = (0..opts.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            per_path(&mut rng)
        })
        .collect();
    let n = values.len() as f64;
    let mean: f64 = values.iter().sum::<f64>() / n;
    let var: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    PathEstimate {
        mean: S::of(mean),
        std_error: S::of((var / n).sqrt()),
        n_paths: opts.n_paths,
        seed,
    }
}

/// Estimate u(x) = E_x[∫(f(X_t, û(X_t)) + g(X_t)) dt] along the killed
/// path; for a true solution û of the smooth-data problem the mean
/// estimates û(x) itself.
pub fn fk_estimate<S: Scalar>(
    dom: &Domain<S>,
    f: &Nonlinearity<S>,
    g: &GridFunction<S>,
    u_hat: &GridFunction<S>,
    x: S,
    opts: &McOptions,
) -> Result<PathEstimate<S>, McError> {
    validate(x.as_f64(), opts)?;
    let dt = opts.dt;
    let max_steps = (T_MAX / dt) as usize;
    Ok(run_paths(opts, |rng| {
        let mut state = start_state(dom, x.as_f64());
        let mut acc = 0.0f64;
        for _ in 0..max_steps {
            let pos = S::of(state.coordinate());
            let uh = u_hat.eval_linear(dom.grid(), pos);
            let fval = f.eval(pos, uh).as_f64();
            let gval = g.eval_linear(dom.grid(), pos).as_f64();
            acc += (fval + gval) * dt;
            step(dom, &mut state, dt, rng);
            if !state.alive() {
                break;
            }
        }
        acc
    }))
}

/// Estimate E_x[e^{-n ζ}] with ζ the first exit time; n·estimate
/// cross-checks the Yosida function g_n at x.
pub fn lifetime_transform<S: Scalar>(
    dom: &Domain<S>,
    x: S,
    n: S,
    opts: &McOptions,
) -> Result<PathEstimate<S>, McError> {
    validate(x.as_f64(), opts)?;
    let dt = opts.dt;
    let nf = n.as_f64();
    let max_steps = (T_MAX / dt) as usize;
    Ok(run_paths(opts, |rng| {
        let mut state = start_state(dom, x.as_f64());
        let mut steps = 0usize;
        while state.alive() && steps < max_steps {
            step(dom, &mut state, dt, rng);
            steps += 1;
        }
        (-nf * steps as f64 * dt).exp()
    }))
}

/// Fraction of paths from a deterministic interior start that enter the
/// window of the given width around x0 before exiting. Shrinking windows
/// probe whether the point is hit (fractions plateau) or polar (fractions
/// decay to zero).
pub fn hit_probe<S: Scalar>(
    dom: &Domain<S>,
    x0: S,
    window: S,
    opts: &McOptions,
) -> Result<PathEstimate<S>, McError> {
    validate(x0.as_f64(), opts)?;
    let scale = step_scale(dom, opts.dt);
    let wf = window.as_f64();
    if wf <= 2.0 * scale {
        return Err(McError::WindowTooNarrow { window: wf, scale });
    }
    let x0f = x0.as_f64();
    let start = if x0f >= 0.5 { x0f / 2.0 } else { (1.0 + x0f) / 2.0 };
    let half = wf / 2.0;
    let dt = opts.dt;
    let max_steps = (T_MAX / dt) as usize;
    Ok(run_paths(opts, |rng| {
        let mut state = start_state(dom, start);
        for _ in 0..max_steps {
            if (state.coordinate() - x0f).abs() <= half {
                return 1.0;
            }
            step(dom, &mut state, dt, rng);
            if !state.alive() {
                break;
            }
        }
        0.0
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grading;
    use crate::measure::Measure;
    use crate::potential::potential;

    fn interval(n: usize) -> Domain<f64> {
        Domain::new(DomainKind::IntervalLaplacian, n, Grading::BoundaryGraded).unwrap()
    }

    fn opts(n_paths: usize, dt: f64, seed: u64) -> McOptions {
        McOptions { n_paths, dt, seed }
    }

    #[test]
    fn validation_errors() {
        let dom = interval(64);
        let z = GridFunction::zeros(64);
        let e = fk_estimate(&dom, &Nonlinearity::zero(), &z, &z, 0.5, &opts(10, 1e-3, 1));
        assert!(matches!(e, Err(McError::TooFewPaths(10))));
        let e = fk_estimate(&dom, &Nonlinearity::zero(), &z, &z, 0.5, &opts(100, -1.0, 1));
        assert!(matches!(e, Err(McError::BadTimeStep(_))));
        let e = fk_estimate(&dom, &Nonlinearity::zero(), &z, &z, 1.0, &opts(100, 1e-3, 1));
        assert!(matches!(e, Err(McError::BoundaryStart(_))));
        let e = hit_probe(&dom, 0.5, 1e-6, &opts(100, 1e-3, 1));
        assert!(matches!(e, Err(McError::WindowTooNarrow { .. })));
    }

    #[test]
    fn zero_data_gives_exactly_zero() {
        let dom = interval(64);
        let z = GridFunction::zeros(64);
        let est = fk_estimate(&dom, &Nonlinearity::zero(), &z, &z, 0.5, &opts(200, 1e-3, 9)).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn identical_seeds_are_bit_identical() {
        let dom = interval(64);
        let g = GridFunction::constant(64, 1.0);
        let z = GridFunction::zeros(64);
        let a = fk_estimate(&dom, &Nonlinearity::zero(), &g, &z, 0.5, &opts(500, 1e-3, 77)).unwrap();
        let b = fk_estimate(&dom, &Nonlinearity::zero(), &g, &z, 0.5, &opts(500, 1e-3, 77)).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let c = fk_estimate(&dom, &Nonlinearity::zero(), &g, &z, 0.5, &opts(500, 1e-3, 78)).unwrap();
        assert_ne!(a.mean.to_bits(), c.mean.to_bits());
    }

    #[test]
    fn expected_exit_time_matches_green_integral() {
        // E_x ζ = x(1-x)/2 for the generator d^2/dx^2
        let dom = interval(64);
        let g = GridFunction::constant(64, 1.0);
        let z = GridFunction::zeros(64);
        let est =
            fk_estimate(&dom, &Nonlinearity::zero(), &g, &z, 0.5, &opts(20_000, 1e-4, 4)).unwrap();
        let budget = 0.8 * (1e-4f64).sqrt();
        assert!(
            (est.mean - 0.125).abs() <= 3.0 * est.std_error + budget,
            "mean {} ± {}",
            est.mean,
            est.std_error
        );
    }

    #[test]
    fn lifetime_transform_matches_closed_form() {
        let dom = interval(64);
        let est = lifetime_transform(&dom, 0.5, 1.0, &opts(20_000, 1e-4, 5)).unwrap();
        let want = 1.0 / 0.5f64.cosh();
        let budget = 0.8 * (1e-4f64).sqrt();
        assert!(
            (est.mean - want).abs() <= 3.0 * est.std_error + budget,
            "mean {} want {want}",
            est.mean
        );
        // n -> 0 forces the transform to 1
        let est0 = lifetime_transform(&dom, 0.5, 1e-9, &opts(200, 1e-3, 6)).unwrap();
        assert!((est0.mean - 1.0).abs() < 1e-6);
        // near the boundary the exit is almost immediate
        let estb = lifetime_transform(&dom, 0.995, 1.0, &opts(2_000, 1e-6, 7)).unwrap();
        assert!(estb.mean > 0.98, "got {}", estb.mean);
    }

    #[test]
    fn cauchy_increments_match_cms_special_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // median of |Cauchy| is 1: check the empirical median is near 1
        let mut vals: Vec<f64> = (0..20_000)
            .map(|_| sample_standard_stable(1.0, &mut rng).abs())
            .collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let med = vals[vals.len() / 2];
        assert!((med - 1.0).abs() < 0.05, "median {med}");
    }

    #[test]
    fn stable_tail_gets_heavier_for_smaller_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let big = |alpha: f64, rng: &mut ChaCha8Rng| {
            (0..30_000)
                .filter(|_| sample_standard_stable(alpha, rng).abs() > 10.0)
                .count() as f64
                / 30_000.0
        };
        let f05 = big(0.5, &mut rng);
        let f15 = big(1.5, &mut rng);
        assert!(f05 > 5.0 * f15, "tails: {f05} vs {f15}");
    }

    #[test]
    fn window_spanning_domain_is_always_hit() {
        let dom = interval(64);
        let est = hit_probe(&dom, 0.5, 0.9999, &opts(200, 1e-3, 2)).unwrap();
        assert_eq!(est.mean, 1.0);
    }

    #[test]
    fn hit_fractions_separate_polar_from_nonpolar() {
        // Brownian paths keep hitting a shrinking window; 0.5-stable paths
        // jump over it with probability tending to one.
        let lap = interval(64);
        let frac =
            Domain::<f64>::new(DomainKind::IntervalFractional(0.5), 64, Grading::Uniform).unwrap();
        let windows = [0.08, 0.02, 0.008];
        // jump paths tolerate a coarse clock; diffusive paths need the step
        // scale well below the finest window
        let lap_frac: Vec<f64> = windows
            .iter()
            .map(|&w| hit_probe(&lap, 0.5, w, &opts(1_500, 2e-6, 11)).unwrap().mean)
            .collect();
        let sta_frac: Vec<f64> = windows
            .iter()
            .map(|&w| hit_probe(&frac, 0.5, w, &opts(1_500, 1e-4, 11)).unwrap().mean)
            .collect();
        // plateau: Brownian fractions stay within a factor ~2 of each other
        assert!(lap_frac[2] > 0.5 * lap_frac[0], "{lap_frac:?}");
        // decay: stable fractions drop strongly with the window
        assert!(sta_frac[2] < 0.4 * sta_frac[0], "{sta_frac:?}");
    }

    #[test]
    fn ball_paths_reproduce_mean_exit_time() {
        // E_x ζ for generator Delta on the unit ball: (1 - r^2)/(2d)
        let dom: Domain<f64> = Domain::new(DomainKind::RadialBallLaplacian(3), 64, Grading::Uniform).unwrap();
        let g = GridFunction::constant(64, 1.0);
        let z = GridFunction::zeros(64);
        let est = fk_estimate(&dom, &Nonlinearity::zero(), &g, &z, 0.3, &opts(5_000, 1e-4, 13))
            .unwrap();
        let want = (1.0 - 0.09) / 6.0;
        let budget = 1.0 * (1e-4f64).sqrt();
        assert!(
            (est.mean - want).abs() <= 3.0 * est.std_error + budget,
            "mean {} want {want}",
            est.mean
        );
    }

    #[test]
    fn yosida_consistency_through_lifetime() {
        let dom = interval(512);
        let x = dom.grid().point(dom.grid().nearest(0.5));
        let est = lifetime_transform(&dom, x, 1.0, &opts(20_000, 1e-4, 21)).unwrap();
        let g1 = crate::potential::yosida_g(&dom, 1.0).unwrap();
        let budget = 0.8 * (1e-4f64).sqrt();
        let got = 1.0 * est.mean;
        let want = g1.at(dom.grid().nearest(0.5));
        assert!((got - want).abs() <= 3.0 * est.std_error + budget);
    }

    #[test]
    fn fk_reproduces_potential_of_density() {
        // u = R(g m) with g a bump: the functional with f = 0 estimates u(x)
        let dom = interval(256);
        let g = GridFunction::from_fn(dom.grid(), |x: f64| (std::f64::consts::PI * x).sin());
        let mu = Measure::from_density(&dom, g.clone()).unwrap();
        let u = potential(&dom, &mu);
        let z = GridFunction::zeros(dom.len());
        let est = fk_estimate(&dom, &Nonlinearity::zero(), &g, &z, 0.5, &opts(20_000, 1e-4, 17))
            .unwrap();
        let want = u.eval_linear(dom.grid(), 0.5);
        let budget = 0.8 * (1e-4f64).sqrt();
        assert!(
            (est.mean - want).abs() <= 3.0 * est.std_error + budget,
            "mean {} want {want}",
            est.mean
        );
    }
}
