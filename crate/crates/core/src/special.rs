//! Small special-function toolbox: log-gamma, gamma, and Chebyshev fits.

use crate::scalar::Scalar;

/// Lanczos coefficients (g = 7, n = 9), good to ~1e-15 in double precision.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for positive arguments.
pub fn ln_gamma<S: Scalar>(x: S) -> S {
    let x = x.as_f64();
    assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    if x < 0.5 {
        // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        let v = std::f64::consts::PI / (std::f64::consts::PI * x).sin();
        return S::of(v.ln() - ln_gamma::<f64>(1.0 - x));
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    let v = 0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln();
    S::of(v)
}

pub fn gamma<S: Scalar>(x: S) -> S {
    ln_gamma(x).exp()
}

/// Gauss-Legendre rule on [-1, 1], nodes by Newton iteration on P_n.
#[derive(Clone, Debug)]
pub struct GaussLegendre<S> {
    pub nodes: Vec<S>,
    pub weights: Vec<S>,
}

impl<S: Scalar> GaussLegendre<S> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![S::zero(); n];
        let mut weights = vec![S::zero(); n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            // Chebyshev-based initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                // evaluate P_n and P_n' at x via recurrence
                let (mut p0, mut p1) = (1.0f64, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                pp = nf * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / pp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * pp * pp);
            nodes[i] = S::of(-x);
            nodes[n - 1 - i] = S::of(x);
            weights[i] = S::of(w);
            weights[n - 1 - i] = S::of(w);
        }
        Self { nodes, weights }
    }

    /// Integrate f over [a, b].
    pub fn integrate<F: Fn(S) -> S>(&self, a: S, b: S, f: F) -> S {
        let c = (a + b) * S::half();
        let h = (b - a) * S::half();
        let mut acc = S::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += *w * f(c + h * *x);
        }
        acc * h
    }
}

/// Chebyshev interpolant of a smooth univariate function on [a, b].
#[derive(Clone, Debug)]
pub struct Chebyshev<S> {
    a: S,
    b: S,
    coeffs: Vec<S>,
}

impl<S: Scalar> Chebyshev<S> {
    pub fn fit<F: Fn(S) -> S>(a: S, b: S, n: usize, f: F) -> Self {
        assert!(n >= 2 && b > a);
        let nf = n as f64;
        let vals: Vec<S> = (0..n)
            .map(|k| {
                let t = (std::f64::consts::PI * (k as f64 + 0.5) / nf).cos();
                let x = (a + b) * S::half() + (b - a) * S::half() * S::of(t);
                f(x)
            })
            .collect();
        let mut coeffs = vec![S::zero(); n];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let mut acc = S::zero();
            for (k, v) in vals.iter().enumerate() {
                let ang = std::f64::consts::PI * j as f64 * (k as f64 + 0.5) / nf;
                acc += *v * S::of(ang.cos());
            }
            *c = acc * S::two() / S::of(nf);
        }
        Self { a, b, coeffs }
    }

    /// Clenshaw evaluation; `x` must lie within the fitted interval.
    pub fn eval(&self, x: S) -> S {
        let t = (S::two() * x - self.a - self.b) / (self.b - self.a);
        let t2 = t * S::two();
        let (mut d0, mut d1) = (S::zero(), S::zero());
        for c in self.coeffs.iter().skip(1).rev() {
            let tmp = d0;
            d0 = t2 * d0 - d1 + *c;
            d1 = tmp;
        }
        t * d0 - d1 + self.coeffs[0] * S::half()
    }

    pub fn domain(&self) -> (S, S) {
        (self.a, self.b)
    }
}

/// Tanh-sinh nodes on (0, 1] clustered toward 0, as (node, weight) pairs.
/// Designed for integrable endpoint singularities at 0.
pub fn tanh_sinh<S: Scalar>(n: usize, cutoff: S) -> Vec<(S, S)> {
    let range = 4.0f64;
    let h = 2.0 * range / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let u = -range + h * k as f64;
        let s = u.sinh();
        let tau = 0.5 * (1.0 - (0.5 * std::f64::consts::PI * s).tanh());
        let w = h * 0.25 * std::f64::consts::PI * u.cosh()
            / (0.5 * std::f64::consts::PI * s).cosh().powi(2);
        let tau = S::of(tau);
        if tau > cutoff {
            out.push((tau, S::of(w)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_matches_known_values() {
        assert!((gamma(0.5f64) - std::f64::consts::PI.sqrt()).abs() < 1e-13);
        assert!((gamma(1.0f64) - 1.0).abs() < 1e-14);
        assert!((gamma(4.0f64) - 6.0).abs() < 1e-12);
        assert!((gamma(0.25f64) - 3.625_609_908_221_908_3).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::<f64>::new(8);
        let v = gl.integrate(0.0, 1.0, |x| x.powi(11));
        assert!((v - 1.0 / 12.0).abs() < 1e-15);
        let v = gl.integrate(-1.0, 2.0, |x| 3.0 * x * x);
        assert!((v - 9.0).abs() < 1e-13);
    }

    #[test]
    fn chebyshev_reproduces_smooth_function() {
        let ch = Chebyshev::fit(0.0f64, 4.0, 40, |x| (x * 0.7).sin() * (1.0 + x).ln());
        for k in 0..100 {
            let x = 4.0 * k as f64 / 99.0;
            let want = (x * 0.7).sin() * (1.0 + x).ln();
            assert!((ch.eval(x) - want).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        // integral of t^(-1/2) over (0,1] = 2
        let nodes = tanh_sinh::<f64>(128, 1e-30);
        let v: f64 = nodes.iter().map(|&(t, w)| w * t.powf(-0.5)).sum();
        assert!((v - 2.0).abs() < 1e-8, "got {v}");
    }
}
