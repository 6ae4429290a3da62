//! Correlation data: exponential decompositions of bath two-point
//! functions, field–coupling cross-correlations (exponential or sampled),
//! Gaussian wave-packet specifications, and the closed-form Markovian
//! wave-packet kernels (drive amplitudes, output kick times, and free
//! field–field overlaps).

use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{CoreError, Result};
use crate::faddeeva::faddeeva_w;

/// A sum of decaying complex exponentials Σ_k a_k e^{−b_k (t₂ − t₁)}.
///
/// Represents bath correlation entries and exponential-form
/// cross-correlations alike.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExponentialSeries {
    terms: Vec<(Complex64, Complex64)>,
}

impl ExponentialSeries {
    /// Builds a series from (amplitude, rate) pairs; every rate must have
    /// a non-negative real part (decaying or purely oscillating terms).
    pub fn new(terms: Vec<(Complex64, Complex64)>) -> Result<Self> {
        for (k, (_, b)) in terms.iter().enumerate() {
            if b.re < 0.0 {
                return Err(CoreError::InvalidParameter(format!(
                    "exponential series term {k}: rate {b} has negative real part"
                )));
            }
        }
        Ok(Self { terms })
    }

    /// The zero-term series (identically zero function).
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Complex64, Complex64)] {
        &self.terms
    }

    /// Σ_k a_k, the value at zero lag.
    pub fn sum_amplitudes(&self) -> Complex64 {
        self.terms.iter().map(|(a, _)| a).sum()
    }
}

/// Σ_k a_k e^{−b_k · lag}; rejects negative lags (two-point functions are
/// only consumed in time-ordered form).
pub fn eval_series(s: &ExponentialSeries, lag: f64) -> Result<Complex64> {
    if lag < 0.0 {
        return Err(CoreError::NegativeLag(lag));
    }
    Ok(s.terms
        .iter()
        .map(|(a, b)| a * (-b * lag).exp())
        .sum())
}

/// Bath two-point correlation matrix in exponential form, indexed by the
/// interaction-superoperator labels (α, β).  Missing entries act as the
/// empty series.
#[derive(Debug, Clone)]
pub struct CorrelationTable {
    n_alpha: usize,
    entries: Vec<ExponentialSeries>,
}

impl CorrelationTable {
    pub fn new(n_alpha: usize) -> Self {
        Self {
            n_alpha,
            entries: vec![ExponentialSeries::empty(); n_alpha * n_alpha],
        }
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    pub fn set(&mut self, alpha: usize, beta: usize, series: ExponentialSeries) -> Result<()> {
        if alpha >= self.n_alpha || beta >= self.n_alpha {
            return Err(CoreError::MissingEntry(format!(
                "correlation table index ({alpha},{beta}) out of range {0}x{0}",
                self.n_alpha
            )));
        }
        self.entries[alpha * self.n_alpha + beta] = series;
        Ok(())
    }

    pub fn get(&self, alpha: usize, beta: usize) -> &ExponentialSeries {
        &self.entries[alpha * self.n_alpha + beta]
    }

    /// Iterates over the non-empty (α, β, series) entries.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &ExponentialSeries)> {
        self.entries.iter().enumerate().filter_map(move |(i, s)| {
            (!s.is_empty()).then_some((i / self.n_alpha, i % self.n_alpha, s))
        })
    }
}

/// Functional form of a field–coupling cross-correlation ⟨φ_j χ^α_τ⟩.
pub enum CrossKind {
    /// Exponential ansatz Σ_k c_k e^{−γ_k τ}; required for dynamic fields.
    ExponentialForm(ExponentialSeries),
    /// Arbitrary sampled kernel of absolute time; sufficient for static
    /// fields, which never need the exponential ansatz.
    Sampled(Box<dyn Fn(f64) -> Complex64 + Send + Sync>),
}

/// A cross-correlation function tied to a field label `field` and an
/// interaction-superoperator label `alpha`.
pub struct CrossCorrelationFn {
    pub field: usize,
    pub alpha: usize,
    pub kind: CrossKind,
}

impl fmt::Debug for CrossCorrelationFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            CrossKind::ExponentialForm(s) => format!("ExponentialForm({} terms)", s.terms().len()),
            CrossKind::Sampled(_) => "Sampled(..)".into(),
        };
        write!(
            f,
            "CrossCorrelationFn {{ field: {}, alpha: {}, kind: {kind} }}",
            self.field, self.alpha
        )
    }
}

impl CrossCorrelationFn {
    pub fn exponential(field: usize, alpha: usize, series: ExponentialSeries) -> Self {
        Self {
            field,
            alpha,
            kind: CrossKind::ExponentialForm(series),
        }
    }

    pub fn sampled(
        field: usize,
        alpha: usize,
        f: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            field,
            alpha,
            kind: CrossKind::Sampled(Box::new(f)),
        }
    }

    /// Evaluates the kernel.  Exponential forms treat the argument as a
    /// non-negative lag; sampled forms receive it verbatim.
    pub fn eval(&self, t: f64) -> Result<Complex64> {
        match &self.kind {
            CrossKind::ExponentialForm(s) => eval_series(s, t),
            CrossKind::Sampled(f) => Ok(f(t)),
        }
    }
}

/// A Gaussian single-photon wave packet with momentum bias `p_in`,
/// momentum width `sigma_in` and launch position `x_in`, propagating at
/// speed `c` toward an emitter with decay rate `gamma`.
///
/// The spatial width is fixed by construction to ζ = 1/(2σ), and the
/// momentum density g_in(p) = e^{−(p−p_in)²/(2σ²)}/√(2πσ²) integrates
/// to one.
#[derive(Debug, Clone, Copy)]
pub struct WavePacketSpec {
    pub x_in: f64,
    pub p_in: f64,
    pub sigma_in: f64,
    pub zeta_in: f64,
    pub c: f64,
    pub gamma: f64,
}

impl WavePacketSpec {
    pub fn new(x_in: f64, p_in: f64, sigma_in: f64, c: f64, gamma: f64) -> Result<Self> {
        if !(sigma_in > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "wave packet momentum width must be positive, got {sigma_in}"
            )));
        }
        if !(c > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "propagation speed must be positive, got {c}"
            )));
        }
        if !(gamma >= 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "decay rate must be non-negative, got {gamma}"
            )));
        }
        Ok(Self {
            x_in,
            p_in,
            sigma_in,
            zeta_in: 1.0 / (2.0 * sigma_in),
            c,
            gamma,
        })
    }

    /// Momentum density g_in(p), normalized to ∫g_in = 1.
    pub fn g(&self, p: f64) -> f64 {
        let d = p - self.p_in;
        (-d * d / (2.0 * self.sigma_in * self.sigma_in)).exp()
            / (2.0 * PI * self.sigma_in * self.sigma_in).sqrt()
    }

    /// √g_in(p).
    pub fn sqrt_g(&self, p: f64) -> f64 {
        let d = p - self.p_in;
        (-d * d / (4.0 * self.sigma_in * self.sigma_in)).exp()
            / (2.0 * PI * self.sigma_in * self.sigma_in).powf(0.25)
    }

    /// Effective drive frequency scale K_in = (2π)^{−1/4} √(Γc/ζ)/2.
    pub fn k_in(&self) -> f64 {
        (2.0 * PI).powf(-0.25) * (self.gamma * self.c / self.zeta_in).sqrt() / 2.0
    }

    /// Half-line Fourier transforms of √g_in, shared by the drive
    /// amplitudes and the free-field overlap:
    ///
    /// h_neg(u) = (2πσ²)^{1/4} ∫_{−∞}^0 dp √g_in(p) e^{−ipu} / (σ√π)
    ///          = e^{−B²} w(σu + iB),                B = p_in/(2σ),
    /// h_pos(u) = the p > 0 complement, so that
    /// h_pos(u) + h_neg(u) = 2 e^{−σ²u² − i p_in u} (the full Gaussian).
    fn h_neg(&self, u: f64) -> Result<Complex64> {
        let b = self.p_in * self.zeta_in; // p_in/(2σ)
        let z = Complex64::new(self.sigma_in * u, b);
        Ok((-b * b).exp() * faddeeva_w(z)?)
    }

    fn h_pos(&self, u: f64) -> Result<Complex64> {
        let s = self.sigma_in * u;
        let gaussian = Complex64::new(-s * s, -self.p_in * u).exp();
        Ok(2.0 * gaussian - self.h_neg(u)?)
    }
}

/// Sign label of the two drive amplitudes Ω^in_±.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Time-dependent complex drive amplitude Ω^in_±(t) of the Markovian
/// wave-packet machine,
///
/// Ω^in_±(t) = i √(Γc/2π) ∫ dp √g_in(p) e^{∓i[p x_in + c|p| t]},
///
/// evaluated in closed form through the scaled complex error function with
/// x_t = x_in + ct and x_{−t} = x_in − ct:
/// Ω^in_±(t) = i K_in [h_pos(±x_t) + h_neg(±x_{−t})].
pub fn omega_in(w: &WavePacketSpec, sign: Sign, t: f64) -> Result<Complex64> {
    if t < 0.0 {
        return Err(CoreError::InvalidParameter(format!(
            "omega_in: drive time must be non-negative, got {t}"
        )));
    }
    if w.gamma == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let s = sign.factor();
    let x_t = w.x_in + w.c * t;
    let x_mt = w.x_in - w.c * t;
    let bracket = w.h_pos(s * x_t)? + w.h_neg(s * x_mt)?;
    Ok(Complex64::new(0.0, w.k_in()) * bracket)
}

/// A delta-kick instant of the output machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kick {
    /// Trajectory time at which the kick fires.
    pub t_star: f64,
    /// True when the kick sits exactly at t = 0 and only half of its
    /// exponent applies (the delta is bisected by the domain boundary).
    pub half_weight: bool,
}

/// Kick times of the output coupling for an observation at (x_out, t_out).
///
/// The output kernel collapses to delta functions at t_out ± x_out/c; only
/// t* = t_out − |x_out|/c can fall inside [0, t_out].  Returns it when it
/// does (flagging half-weight at t* = 0 exactly), or nothing when the
/// light cone has not reached the observation point (|x_out|/c > t_out).
/// For x_out = 0 the two deltas coincide at the right endpoint t_out; each
/// then counts half, so they merge into one full-weight kick.
pub fn omega_out_kick_times(x_out: f64, t_out: f64, c: f64) -> Result<Vec<Kick>> {
    if !(c > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "omega_out_kick_times: speed must be positive, got {c}"
        )));
    }
    if !(t_out >= 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "omega_out_kick_times: observation time must be non-negative, got {t_out}"
        )));
    }
    let t_star = t_out - x_out.abs() / c;
    if t_star < 0.0 {
        Ok(vec![])
    } else {
        Ok(vec![Kick {
            t_star,
            half_weight: t_star == 0.0,
        }])
    }
}

/// Position-eigenmode output profile: plane-wave weights
/// √(Δx/2π) e^{−i p x_out} on a spatial lattice of spacing Δx.
#[derive(Debug, Clone, Copy)]
pub struct OutputProfile {
    pub dx: f64,
}

impl OutputProfile {
    pub fn new(dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "output profile spacing must be positive, got {dx}"
            )));
        }
        Ok(Self { dx })
    }
}

/// Free-field overlap ⟨φ₁^out φ₂^in⟩ between the output position eigenmode
/// at (x_out, t_out) and the incoming wave packet,
///
/// ⟨φ₁^out φ₂^in⟩ = √(Δx/2π) ∫ dp √g_in(p) e^{−ip(x_out−x_in)} e^{ic|p|t_out},
///
/// in closed form with Δx_t = x_out − x_in + c t_out and
/// Δx_{−t} = x_out − x_in − c t_out:
/// √(Δx/ζ)/(2 (2π)^{1/4}) · [h_pos(Δx_{−t}) + h_neg(Δx_t)].
/// The value is independent of the decay rate Γ.
pub fn free_field_overlap(
    w: &WavePacketSpec,
    g_out: &OutputProfile,
    x_out: f64,
    t_out: f64,
) -> Result<Complex64> {
    let dx_t = x_out - w.x_in + w.c * t_out;
    let dx_mt = x_out - w.x_in - w.c * t_out;
    let prefactor = (g_out.dx / w.zeta_in).sqrt() / (2.0 * (2.0 * PI).powf(0.25));
    Ok(prefactor * (w.h_pos(dx_mt)? + w.h_neg(dx_t)?))
}
