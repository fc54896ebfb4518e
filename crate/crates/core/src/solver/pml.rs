//! Convolutional PML coefficients.
//!
//! With the stretch `s = 1 + σ / (α + jωε0)` (κ = 1) the auxiliary field
//! obeys `ψⁿ⁺¹ = b ψⁿ + c ∂F`, with `b = exp(-(σ + α) dt / ε0)` and
//! `c = σ (b − 1) / (σ + α)`.

use super::Real;
use crate::medium::{EPS0, ETA0};

/// Polynomial grading order of the absorber conductivity.
pub const GRADING_ORDER: f64 = 3.0;
/// Complex-frequency shift at the absorber's inner face, S/m.
pub const ALPHA_MAX: f64 = 0.05;

/// Recursive-convolution coefficients along one axis, sampled at the
/// integer (E) and half-integer (H) positions.
#[derive(Debug, Clone)]
pub struct AxisProfile {
    pub b_e: Vec<Real>,
    pub c_e: Vec<Real>,
    pub b_h: Vec<Real>,
    pub c_h: Vec<Real>,
}

impl AxisProfile {
    /// `n` cells along the axis, `thickness` of them absorbing at each end.
    pub fn new(
        n: usize,
        thickness: usize,
        dx: f64,
        dt: f64,
        eps_background: f64,
        target_reflection: f64,
    ) -> Self {
        let mut profile = AxisProfile {
            b_e: vec![1.0; n],
            c_e: vec![0.0; n],
            b_h: vec![1.0; n],
            c_h: vec![0.0; n],
        };
        if thickness == 0 {
            return profile;
        }
        let depth_m = thickness as f64 * dx;
        let sigma_max = -(GRADING_ORDER + 1.0) * target_reflection.ln()
            / (2.0 * ETA0 * eps_background.sqrt() * depth_m);
        let p = thickness as f64;
        let hi = (n - thickness) as f64;
        let depth = |x: f64| -> f64 { ((p - x).max(x - hi).max(0.0) / p).min(1.0) };
        let coeffs = |rho: f64| -> (f64, f64) {
            if rho <= 0.0 {
                return (1.0, 0.0);
            }
            let sigma = sigma_max * rho.powf(GRADING_ORDER);
            let alpha = ALPHA_MAX * (1.0 - rho);
            let b = (-(sigma + alpha) * dt / EPS0).exp();
            let c = sigma * (b - 1.0) / (sigma + alpha);
            (b, c)
        };
        for i in 0..n {
            let (b, c) = coeffs(depth(i as f64 + 0.5));
            profile.b_e[i] = b as Real;
            profile.c_e[i] = c as Real;
            let (b, c) = coeffs(depth(i as f64 + 1.0));
            profile.b_h[i] = b as Real;
            profile.c_h[i] = c as Real;
        }
        profile
    }
}

/// Indices of the absorbing strips along an axis of `n` cells.
pub fn strip_indices(n: usize, thickness: usize) -> impl Iterator<Item = usize> + Clone {
    let t = thickness.min(n / 2);
    (0..t).chain(n - t..n)
}
