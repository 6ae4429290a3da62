//! Independent ground-truth computations used to verify the hierarchy and
//! scattering engines:
//!
//! * **Pure dephasing** — when the system coupling `s` commutes with `H_S`
//!   the reduced dynamics exponentiates in closed form, with and without a
//!   single-photon input correction.
//! * **Truncated-Fock brute force** — direct Lindblad evolution of the
//!   system tensored with a few lossy oscillators, whose vacuum correlation
//!   functions are single decaying exponentials (the pseudomode picture).
//! * **Single-excitation scattering analytics** — exact amplitudes of a
//!   two-level emitter in a flat-coupling 1-D waveguide driven by a
//!   Gaussian wave packet, and the resulting positional photon density.
//!
//! Everything here is deliberately independent of the hierarchy engine: the
//! only shared ingredients are the elementary matrix/quadrature utilities.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::correlations::{ExponentialSeries, WavePacketSpec};
use crate::error::{CoreError, Result};
use crate::integrator::{integrate_grid, OdeSystem, StepControl};
use crate::markovian::ScatteringConfig;
use crate::operators::{
    commutator_super, dissipator_super, left_mul_super, right_mul_super, ComplexMatrix,
    SuperOperator,
};
use crate::quad::integrate_adaptive;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// ---------------------------------------------------------------------------
// Pure dephasing closed form
// ---------------------------------------------------------------------------

/// Parameters of the single-exponential dephasing bath
/// C₀(t) = λ₀² e^{−iΩ₀t − Γ₀|t|}, together with the matching input-mode
/// cross-correlation ⟨X(τ)φ†⟩ = λ₀ e^{−iΩ₀τ − Γ₀τ}.
#[derive(Debug, Clone, Copy)]
pub struct DephasingParams {
    pub lambda0: f64,
    pub omega0: f64,
    pub gamma0: f64,
}

impl DephasingParams {
    pub fn new(lambda0: f64, omega0: f64, gamma0: f64) -> Result<Self> {
        if !(gamma0 >= 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "dephasing bath decay rate must be non-negative, got {gamma0}"
            )));
        }
        Ok(Self {
            lambda0,
            omega0,
            gamma0,
        })
    }

    /// Complex decay rate b = Γ₀ + iΩ₀.
    pub fn rate(&self) -> Complex64 {
        c64(self.gamma0, self.omega0)
    }

    /// The bath correlation C₀ as a one-term exponential series
    /// (amplitude λ₀², rate Γ₀ + iΩ₀).
    pub fn bath_series(&self) -> ExponentialSeries {
        ExponentialSeries::new(vec![(c64(self.lambda0 * self.lambda0, 0.0), self.rate())])
            .expect("non-negative rate by construction")
    }

    /// ∫₀^t ⟨X(τ)φ†⟩ dτ = λ₀ (1 − e^{−bt})/b, the running cross-correlation
    /// integral of the matched input mode.
    pub fn cross_integral(&self, t: f64) -> Complex64 {
        self.lambda0 * e_kernel(-self.rate(), t)
    }

    /// Input weight g_t = |∫₀^t ⟨X(τ)φ†⟩dτ|²
    ///                  = λ₀²(1 − e^{−(iΩ₀+Γ₀)t})(1 − e^{(iΩ₀−Γ₀)t})/(Ω₀²+Γ₀²).
    pub fn g(&self, t: f64) -> f64 {
        self.cross_integral(t).norm_sqr()
    }
}

/// (e^{zt} − 1)/z, switching to the Taylor series when |zt| is small enough
/// for the direct quotient to lose accuracy (removable singularity at
/// z = 0).
pub fn e_kernel(z: Complex64, t: f64) -> Complex64 {
    let u = z * t;
    if u.norm() < 1e-4 {
        t * (1.0 + u * (0.5 + u * (1.0 / 6.0 + u * (1.0 / 24.0 + u / 120.0))))
    } else {
        (u.exp() - 1.0) / z
    }
}

/// Double time integral of one correlation exponential,
/// ∫₀^t dt₂ ∫₀^{t₂} dt₁ a e^{−b(t₂−t₁)} = a (e^{−bt} − 1 + bt)/b²,
/// with a series switch at small |bt|.
fn double_time_integral(a: Complex64, b: Complex64, t: f64) -> Complex64 {
    let u = b * t;
    if u.norm() < 1e-4 {
        a * t
            * t
            * (0.5 + u * (-1.0 / 6.0 + u * (1.0 / 24.0 + u * (-1.0 / 120.0 + u / 720.0))))
    } else {
        a * ((-u).exp() - 1.0 + u) / (b * b)
    }
}

fn require_dephasing_pair(h_s: &ComplexMatrix, s: &ComplexMatrix) -> Result<()> {
    let d = s.require_square()?;
    if h_s.rows() != d || h_s.cols() != d {
        return Err(CoreError::DimensionMismatch(format!(
            "system Hamiltonian is {}x{}, coupling is {d}x{d}",
            h_s.rows(),
            h_s.cols()
        )));
    }
    let scale = 1.0 + s.max_abs().max(h_s.max_abs());
    let defect = s.hermiticity_defect();
    if defect > 1e-12 * scale {
        return Err(CoreError::NotHermitian {
            defect,
            tol: 1e-12 * scale,
        });
    }
    let comm = h_s.mul(s).sub(&s.mul(h_s));
    if comm.max_abs() > 1e-12 * scale * scale {
        return Err(CoreError::InvalidParameter(format!(
            "dephasing requires [H_S, s] = 0; commutator norm {:.3e}",
            comm.max_abs()
        )));
    }
    Ok(())
}

/// Closed-form propagator of the pure-dephasing dynamics for a bath with
/// exponential correlation C(τ) = Σ_k a_k e^{−b_k τ} (τ ≥ 0, with
/// C(−τ) = C(τ)* by hermiticity):
///
/// ρ_S(t) = e^{−i[H_S,·] t + F_t} ρ_S(0),
/// F_t = f_t (s·s − s²·) + f̄_t (s·s − ·s²),
/// f_t = ∫₀^t dt₂ ∫₀^{t₂} dt₁ C(t₂ − t₁).
///
/// Requires a hermitian coupling with [H_S, s] = 0, which makes all three
/// exponent pieces commute so they may share a single exponential.
pub fn dephasing_propagator(
    bath: &ExponentialSeries,
    h_s: &ComplexMatrix,
    s: &ComplexMatrix,
    t: f64,
) -> Result<SuperOperator> {
    require_dephasing_pair(h_s, s)?;
    if !(t >= 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "dephasing propagator time must be non-negative, got {t}"
        )));
    }
    let f: Complex64 = bath
        .terms()
        .iter()
        .map(|&(a, b)| double_time_integral(a, b, t))
        .sum();

    let s_sq = s.mul(s);
    let sandwich = left_mul_super(s)?.compose(&right_mul_super(s)?);
    let forward = sandwich.sub(&left_mul_super(&s_sq)?);
    let backward = sandwich.sub(&right_mul_super(&s_sq)?);
    let exponent = forward
        .scale(f)
        .add(&backward.scale(f.conj()))
        .add(&commutator_super(h_s)?.scale(c64(0.0, -t)));
    exponent.expm()
}

/// Pure-dephasing reduced state at time `t` for the single-exponential bath
/// of `params`, optionally corrected for a single-photon input in the
/// matched bath mode:
///
/// ρ̃_S(t) = ⟨φφ†⟩ ρ_S(t) + g_t D_s[ρ_S(t)],      ⟨φφ†⟩ = 1,
/// D_s[·] = 2s·s − s²· − ·s².
pub fn dephasing_rho(
    params: &DephasingParams,
    h_s: &ComplexMatrix,
    s: &ComplexMatrix,
    rho0: &ComplexMatrix,
    t: f64,
    with_input: bool,
) -> Result<ComplexMatrix> {
    let prop = dephasing_propagator(&params.bath_series(), h_s, s, t)?;
    let rho = prop.apply(rho0)?;
    if !with_input {
        return Ok(rho);
    }
    let d_s = dissipator_super(s)?;
    let correction = d_s.apply(&rho)?.scale(c64(params.g(t), 0.0));
    Ok(rho.add(&correction))
}

// ---------------------------------------------------------------------------
// Truncated-Fock brute force (pseudomode oracle)
// ---------------------------------------------------------------------------

/// One lossy oscillator of the brute-force bath.  In the mode's vacuum the
/// coupled quadrature x = a + a† has correlation
/// ⟨x(t) x(0)⟩ = e^{−iωt − γ|t|}, so the system sees the exponential bath
/// C(t) = λ² e^{−iωt − γ|t|}.
#[derive(Debug, Clone, Copy)]
pub struct ModeSpec {
    /// Oscillator frequency ω.
    pub omega: f64,
    /// Coupling strength λ in H_I = λ s (a + a†).
    pub lambda: f64,
    /// Amplitude decay rate γ (Lindblad term γ(2aρa† − a†aρ − ρa†a)).
    pub decay: f64,
}

/// Precomputed Lindblad generator applied through matrix products (a dense
/// superoperator would not fit for multi-mode spaces).
struct LindbladSystem {
    dim: usize,
    h: ComplexMatrix,
    /// (rate, jump, jump†, jump†·jump) per dissipative channel.
    channels: Vec<(f64, ComplexMatrix, ComplexMatrix, ComplexMatrix)>,
}

impl OdeSystem for LindbladSystem {
    fn dim(&self) -> usize {
        self.dim * self.dim
    }

    fn rhs(&self, _t: f64, y: &[Complex64], dydt: &mut [Complex64]) {
        let rho = ComplexMatrix::unvectorize(y, self.dim).expect("state length fixed by dim");
        let mut out = self
            .h
            .mul(&rho)
            .sub(&rho.mul(&self.h))
            .scale(c64(0.0, -1.0));
        for (rate, l, ldag, ldl) in &self.channels {
            let jump = l.mul(&rho).mul(ldag).scale(c64(2.0 * rate, 0.0));
            let anti = ldl.mul(&rho).add(&rho.mul(ldl)).scale(c64(*rate, 0.0));
            out = out.add(&jump).sub(&anti);
        }
        dydt.copy_from_slice(&out.vectorize());
    }
}

/// Annihilation operator on an n-level Fock truncation.
fn annihilation(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            c64((j as f64).sqrt(), 0.0)
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// op on mode `which` of `n_modes` oscillators (system factor first/slow).
fn embed_mode(d_s: usize, n_modes: usize, cut: usize, which: usize, op: &ComplexMatrix) -> ComplexMatrix {
    let mut full = ComplexMatrix::identity(d_s);
    for k in 0..n_modes {
        if k == which {
            full = full.kron(op);
        } else {
            full = full.kron(&ComplexMatrix::identity(cut));
        }
    }
    full
}

/// Partial trace over all oscillator factors (system factor slow).
fn trace_out_modes(rho_full: &ComplexMatrix, d_s: usize) -> ComplexMatrix {
    let m = rho_full.rows() / d_s;
    ComplexMatrix::from_fn(d_s, d_s, |i, j| {
        (0..m).map(|n| rho_full.get(i * m + n, j * m + n)).sum()
    })
}

/// Direct Lindblad evolution of system ⊗ truncated lossy oscillators,
/// initialized in `rho0 ⊗ |0⟩⟨0|…`, returning the reduced system state at
/// every grid time (the grid starts at t = 0).
///
/// This is the brute-force pseudomode oracle: each mode realizes one
/// exponential term of the bath correlation exactly (up to Fock-space
/// truncation), so the partial trace must agree with a hierarchy run using
/// the matched [`ExponentialSeries`].
pub fn fock_brute_force(
    h_s: &ComplexMatrix,
    coupling: &ComplexMatrix,
    modes: &[ModeSpec],
    rho0: &ComplexMatrix,
    fock_cut: usize,
    t_grid: &[f64],
) -> Result<Vec<ComplexMatrix>> {
    let d_s = rho0.require_square()?;
    if coupling.rows() != d_s || h_s.rows() != d_s {
        return Err(CoreError::DimensionMismatch(format!(
            "system operators must match the {d_s}-dimensional initial state"
        )));
    }
    if fock_cut < 2 {
        return Err(CoreError::InvalidParameter(format!(
            "Fock truncation must keep at least 2 levels, got {fock_cut}"
        )));
    }
    if modes.len() > 3 {
        return Err(CoreError::InvalidParameter(format!(
            "brute-force oracle supports at most 3 modes, got {}",
            modes.len()
        )));
    }
    for (k, m) in modes.iter().enumerate() {
        if !(m.decay >= 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "mode {k}: decay rate must be non-negative, got {}",
                m.decay
            )));
        }
    }

    let n_modes = modes.len();
    let m_total = fock_cut.pow(n_modes as u32);
    let d = d_s * m_total;
    let a_small = annihilation(fock_cut);
    let n_small = a_small.dagger().mul(&a_small);
    let s_full = coupling.kron(&ComplexMatrix::identity(m_total));

    let mut h = h_s.kron(&ComplexMatrix::identity(m_total));
    let mut channels = Vec::new();
    for (k, mode) in modes.iter().enumerate() {
        let a = embed_mode(d_s, n_modes, fock_cut, k, &a_small);
        let n_op = embed_mode(d_s, n_modes, fock_cut, k, &n_small);
        let x = a.add(&a.dagger());
        h = h
            .add(&n_op.scale(c64(mode.omega, 0.0)))
            .add(&s_full.mul(&x).scale(c64(mode.lambda, 0.0)));
        if mode.decay > 0.0 {
            let adag = a.dagger();
            let ada = adag.mul(&a);
            channels.push((mode.decay, a, adag, ada));
        }
    }

    // ρ_full(0) = ρ0 ⊗ |0⟩⟨0|⊗…  (vacuum occupies the first Fock index of
    // every mode).
    let mut vac = ComplexMatrix::zeros(m_total, m_total);
    vac.set(0, 0, c64(1.0, 0.0));
    let rho_full0 = rho0.kron(&vac);

    let sys = LindbladSystem {
        dim: d,
        h,
        channels,
    };
    let states = integrate_grid(
        &sys,
        &rho_full0.vectorize(),
        t_grid,
        &[],
        &mut [],
        StepControl::default(),
    )?;
    states
        .iter()
        .map(|y| Ok(trace_out_modes(&ComplexMatrix::unvectorize(y, d)?, d_s)))
        .collect()
}

/// [`fock_brute_force`] with a convergence check: the run is repeated with
/// the truncation raised by 2 and rejected when any entry of any reduced
/// state moves by more than `tol` (truncation non-convergence).  Returns
/// the finer run.
pub fn fock_converged(
    h_s: &ComplexMatrix,
    coupling: &ComplexMatrix,
    modes: &[ModeSpec],
    rho0: &ComplexMatrix,
    fock_cut: usize,
    t_grid: &[f64],
    tol: f64,
) -> Result<Vec<ComplexMatrix>> {
    let coarse = fock_brute_force(h_s, coupling, modes, rho0, fock_cut, t_grid)?;
    let fine = fock_brute_force(h_s, coupling, modes, rho0, fock_cut + 2, t_grid)?;
    let worst = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| a.max_abs_diff(b))
        .fold(0.0f64, f64::max);
    if worst > tol {
        return Err(CoreError::InvalidParameter(format!(
            "Fock truncation {fock_cut} not converged: raising it by 2 moves \
             the reduced state by {worst:.3e} (tolerance {tol:.1e})"
        )));
    }
    Ok(fine)
}

// ---------------------------------------------------------------------------
// Single-excitation scattering analytics
// ---------------------------------------------------------------------------

/// Dispersion branch of the 1-D field: ω(p) = ±c|p|.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Positive,
    Negative,
}

impl Branch {
    fn freq(self, c: f64, p: f64) -> f64 {
        match self {
            Branch::Positive => c * p.abs(),
            Branch::Negative => -c * p.abs(),
        }
    }
}

/// Single-excitation wavefunction amplitudes at one time: vacuum weight
/// `c0`, emitter excitation `c1`, and field amplitude densities per branch
/// on the sampled momentum grid.
///
/// Unitarity fixes |c0|² + |c1|² + Σ_r ∫|c_r(p)|² dp = 1.
#[derive(Debug, Clone)]
pub struct SingleExcitationAmplitudes {
    pub c0: Complex64,
    pub c1: Complex64,
    pub p_grid: Vec<f64>,
    pub positive: Vec<Complex64>,
    pub negative: Vec<Complex64>,
}

/// Adaptive quadrature over the momentum support of the packet, split at
/// the dispersion kink p = 0.
fn packet_quad<F: FnMut(f64) -> Complex64>(w: &WavePacketSpec, mut f: F) -> Result<Complex64> {
    let lo = w.p_in - 12.0 * w.sigma_in;
    let hi = w.p_in + 12.0 * w.sigma_in;
    let mid = 0.0f64.clamp(lo, hi);
    Ok(integrate_adaptive(lo, mid, 1e-12, 1e-15, &mut f)?
        + integrate_adaptive(mid, hi, 1e-12, 1e-15, &mut f)?)
}

/// Emitter excitation amplitude of the flat-coupling waveguide model, with
/// arbitrary initial excitation `c1_0` and an optional incoming packet:
///
/// c₁(t) = e^{−(iω_S+Γ)t} c₁(0)
///       − i √(Γc/2π) ∫dp √g_in(p) e^{−ip x_in}
///         (e^{−ic|p|t} − e^{−(iω_S+Γ)t}) / (i(ω_S − c|p|) + Γ).
///
/// For a flat coupling over both dispersion branches the self-energy is
/// exactly Γ at every complex frequency, so this expression is exact, not
/// merely a weak-coupling approximation.
pub fn excited_amplitude(
    cfg: &ScatteringConfig,
    c1_0: Complex64,
    include_packet: bool,
    t: f64,
) -> Result<Complex64> {
    if !(t >= 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "excited_amplitude: time must be non-negative, got {t}"
        )));
    }
    let damp = (-c64(cfg.gamma, cfg.omega_s) * t).exp();
    let decay = damp * c1_0;
    if !include_packet || cfg.gamma == 0.0 {
        // The packet couples with strength √Γ; at Γ = 0 it never drives
        // the emitter.
        return Ok(decay);
    }
    let w = &cfg.wavepacket;
    let g = (cfg.gamma * cfg.c / (2.0 * PI)).sqrt();
    let integral = packet_quad(w, |p| {
        let source = w.sqrt_g(p) * (c64(0.0, -p * w.x_in)).exp();
        let denom = c64(cfg.gamma, cfg.omega_s - cfg.c * p.abs());
        source * ((c64(0.0, -cfg.c * p.abs() * t)).exp() - damp) / denom
    })?;
    Ok(decay - c64(0.0, g) * integral)
}

/// c₁(t) for the packet-driven initial condition c₁(0) = 0.
pub fn analytic_c1(cfg: &ScatteringConfig, t: f64) -> Result<Complex64> {
    excited_amplitude(cfg, c64(0.0, 0.0), true, t)
}

/// Field amplitude density c_r(p; t) on branch `branch`, for the
/// packet-driven initial condition (packet on the positive branch,
/// c₁(0) = 0):
///
/// c_r(p;t) = e^{−iω_r t} [ c_r(p;0) − i g ∫₀^t e^{iω_r τ} c₁(τ) dτ ],
///
/// with the time integral folded into one momentum quadrature through
/// (e^{zt} − 1)/z kernels (the ω_r(p) = c|p′| resonance is removable and
/// handled by a series switch).
pub fn branch_amplitude(cfg: &ScatteringConfig, branch: Branch, p: f64, t: f64) -> Result<Complex64> {
    if !(t >= 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "branch_amplitude: time must be non-negative, got {t}"
        )));
    }
    let w = &cfg.wavepacket;
    let omega = branch.freq(cfg.c, p);
    let free = match branch {
        Branch::Positive => w.sqrt_g(p) * (c64(0.0, -p * w.x_in)).exp(),
        Branch::Negative => c64(0.0, 0.0),
    };
    if cfg.gamma == 0.0 {
        return Ok((c64(0.0, -omega * t)).exp() * free);
    }
    let g = (cfg.gamma * cfg.c / (2.0 * PI)).sqrt();
    // ∫₀^t e^{iωτ} c₁(τ) dτ with c₁ in closed form: each source momentum p′
    // contributes two elementary exponential time integrals.
    let z_damp = c64(-cfg.gamma, omega - cfg.omega_s);
    let time_integral = c64(0.0, -g)
        * packet_quad(w, |pp| {
            let source = w.sqrt_g(pp) * (c64(0.0, -pp * w.x_in)).exp();
            let denom = c64(cfg.gamma, cfg.omega_s - cfg.c * pp.abs());
            let z_free = c64(0.0, omega - cfg.c * pp.abs());
            source / denom * (e_kernel(z_free, t) - e_kernel(z_damp, t))
        })?;
    Ok((c64(0.0, -omega * t)).exp() * (free - c64(0.0, g) * time_integral))
}

/// Samples all single-excitation amplitudes on a momentum grid.
pub fn single_excitation_amplitudes(
    cfg: &ScatteringConfig,
    t: f64,
    p_grid: &[f64],
) -> Result<SingleExcitationAmplitudes> {
    let c1 = analytic_c1(cfg, t)?;
    let mut positive = Vec::with_capacity(p_grid.len());
    let mut negative = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        positive.push(branch_amplitude(cfg, Branch::Positive, p, t)?);
        negative.push(branch_amplitude(cfg, Branch::Negative, p, t)?);
    }
    Ok(SingleExcitationAmplitudes {
        c0: c64(0.0, 0.0),
        c1,
        p_grid: p_grid.to_vec(),
        positive,
        negative,
    })
}

/// Photon occupation density at position `x` and time `t_out`,
///
/// n(x, t) = | c̃_free(x, t) − i √(Γ/c) c₁(t − |x|/c) θ(|x| ≤ ct) |²,
///
/// where c̃_free is the freely propagated packet amplitude
/// (1/√2π) ∫dp √g_in(p) e^{−ip x_in} e^{ipx − ic|p|t}: the free packet plus
/// the emitter's retarded spherical (here: two-sided) emission.  The
/// observable of the scattering machine equals Δx · n(x_out, t_out).
pub fn analytic_density(cfg: &ScatteringConfig, x: f64, t_out: f64) -> Result<f64> {
    if !(t_out >= 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "analytic_density: time must be non-negative, got {t_out}"
        )));
    }
    let w = &cfg.wavepacket;
    let profile = crate::correlations::OutputProfile::new(1.0)?;
    // The unit-Δx overlap is the complex conjugate of c̃_free.
    let free = crate::correlations::free_field_overlap(w, &profile, x, t_out)?.conj();
    let tau = t_out - x.abs() / cfg.c;
    let amp = if tau >= 0.0 && cfg.gamma > 0.0 {
        free - c64(0.0, (cfg.gamma / cfg.c).sqrt()) * analytic_c1(cfg, tau)?
    } else {
        free
    };
    Ok(amp.norm_sqr())
}
