//! Gauss-Legendre rules and adaptive tensor-product integration over a
//! spherical cap.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 4.0 * f64::EPSILON {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor-product rule over `u = cos θ ∈ [u_lo, u_hi]` and `φ ∈ [0, 2π)`.
pub fn band_rule<F>(u_lo: f64, u_hi: f64, order: usize, f: &F) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let (x, w) = gauss_legendre(order);
    let u_half = 0.5 * (u_hi - u_lo);
    let u_mid = 0.5 * (u_hi + u_lo);
    let mut total = 0.0;
    for (xu, wu) in x.iter().zip(&w) {
        let theta = (u_mid + u_half * xu).clamp(-1.0, 1.0).acos();
        let mut inner = 0.0;
        for (xp, wp) in x.iter().zip(&w) {
            let phi = PI * (1.0 + xp);
            inner += wp * f(theta, phi);
        }
        total += wu * inner * PI;
    }
    total * u_half
}

/// Tensor-product rule over the cap `θ ≤ θ₀`.
pub fn cap_rule<F>(theta0: f64, order: usize, f: &F) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    band_rule(theta0.cos(), 1.0, order, f)
}

pub const START_ORDER: usize = 8;
pub const MAX_ORDER: usize = 1024;

/// `∫₀^{2π} dφ ∫₀^{θ₀} sin θ dθ f(θ, φ)`, doubling the order until two
/// successive estimates agree to `tol`.
pub fn integrate_cap<F>(theta0: f64, tol: f64, f: F) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    integrate_band(theta0.cos(), 1.0, tol, f)
}

/// Same as [`integrate_cap`] over the band `cos θ ∈ [u_lo, u_hi]`.
pub fn integrate_band<F>(u_lo: f64, u_hi: f64, tol: f64, f: F) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let mut order = START_ORDER;
    let mut prev = band_rule(u_lo, u_hi, order, &f);
    loop {
        order *= 2;
        let next = band_rule(u_lo, u_hi, order, &f);
        let err = (next - prev).abs();
        if err < tol {
            return Ok(next);
        }
        if order >= MAX_ORDER {
            return Err(Error::QuadratureNotConverged {
                estimate: next,
                error_estimate: err,
            });
        }
        prev = next;
    }
}
