//! Gauss–Legendre quadrature for complex-valued integrands.
//!
//! Supplies fixed-order panel rules plus an adaptive driver that compares a
//! 10-point against a 20-point rule on each subinterval and bisects until
//! the difference meets the requested tolerance.  Used by the wave-packet
//! oracles (Fourier integrals of Gaussian packets) and by cross-check tests
//! that integrate correlation kernels numerically.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{CoreError, Result};

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
///
/// Nodes are the roots of the Legendre polynomial P_n, found by Newton
/// iteration from Chebyshev-like starting guesses; weights are
/// 2 / ((1 − x²) P_n'(x)²).  Exact for polynomials of degree ≤ 2n − 1.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(CoreError::InvalidParameter(
            "gauss_legendre: order must be at least 1".into(),
        ));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Roots are symmetric about 0; compute the non-negative half.
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_n' by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

/// Pre-computed rule reusable across many panels.
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(order: usize) -> Result<Self> {
        let (nodes, weights) = gauss_legendre(order)?;
        Ok(Self { nodes, weights })
    }

    /// ∫_a^b f(x) dx with a single panel of this rule.
    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += *w * f(mid + half * x);
        }
        acc * half
    }
}

/// ∫_a^b f(x) dx split into `panels` equal panels of an n-point rule.
pub fn integrate_panels<F: FnMut(f64) -> Complex64>(
    a: f64,
    b: f64,
    order: usize,
    panels: usize,
    mut f: F,
) -> Result<Complex64> {
    if panels == 0 {
        return Err(CoreError::InvalidParameter(
            "integrate_panels: need at least one panel".into(),
        ));
    }
    let rule = GaussRule::new(order)?;
    let width = (b - a) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = a + p as f64 * width;
        acc += rule.integrate(lo, lo + width, &mut f);
    }
    Ok(acc)
}

/// Adaptive ∫_a^b f(x) dx by nested Gauss–Legendre rules.
///
/// Each subinterval is integrated with 10- and 20-point rules; when the
/// difference exceeds `max(atol, rtol · |running total|)` scaled by the
/// subinterval fraction, the interval is bisected.  Fails with
/// [`CoreError::QuadratureFailure`] if the subdivision budget is exhausted
/// before convergence.
pub fn integrate_adaptive<F: FnMut(f64) -> Complex64>(
    a: f64,
    b: f64,
    rtol: f64,
    atol: f64,
    mut f: F,
) -> Result<Complex64> {
    if !(b >= a) {
        return Err(CoreError::InvalidParameter(format!(
            "integrate_adaptive: invalid interval [{a}, {b}]"
        )));
    }
    if b == a {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let low = GaussRule::new(10)?;
    let high = GaussRule::new(20)?;
    let span = b - a;
    let mut stack = vec![(a, b)];
    let mut total = Complex64::new(0.0, 0.0);
    // Crude magnitude estimate so the relative test has a scale before the
    // first intervals converge.
    let scale_guess = high.integrate(a, b, &mut f).norm();
    let mut budget = 200_000usize;
    while let Some((lo, hi)) = stack.pop() {
        budget = budget.checked_sub(1).ok_or_else(|| {
            CoreError::QuadratureFailure(format!(
                "integrate_adaptive: subdivision budget exhausted on [{a}, {b}]"
            ))
        })?;
        if budget == 0 {
            return Err(CoreError::QuadratureFailure(format!(
                "integrate_adaptive: subdivision budget exhausted on [{a}, {b}]"
            )));
        }
        let coarse = low.integrate(lo, hi, &mut f);
        let fine = high.integrate(lo, hi, &mut f);
        let scale = total.norm().max(scale_guess);
        let allowed = atol.max(rtol * scale) * ((hi - lo) / span);
        if (fine - coarse).norm() <= allowed || hi - lo < 1e-14 * span {
            total += fine;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid));
            stack.push((mid, hi));
        }
    }
    Ok(total)
}
