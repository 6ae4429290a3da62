//! Auxiliary-density-matrix hierarchy for non-Markovian open-system
//! dynamics with optional input/output field indexes.
//!
//! The state of the solver is a collection of auxiliary density matrices
//! (ADMs) labelled by an [`AdmIndex`]: a vector of bath-mode occupation
//! numbers `n` (one per exponential decomposition term σ of the bath
//! correlation matrix), plus binary flags for dynamic (`n_phi`) and static
//! (`n_static`) field insertions.  The root index (all zeros) carries the
//! reduced system density matrix; flagged indexes carry time-ordered field
//! insertions from which input/output observables are reconstructed.
//!
//! Two algebraically equivalent generator forms are provided:
//! [`HeomForm::Canonical`] uses the raw coefficients (down-coupling
//! `α₀·n_σ·a^σ`, up-coupling `α₀⁻¹`), while [`HeomForm::Rescaled`]
//! symmetrizes them to `α₀·√(n_σ a^σ)` and `α₀⁻¹·√((n_σ+1) a^σ)`, which
//! keeps all ADMs at a uniform scale for deep hierarchies.  Both evolve the
//! identical root trajectory; rescaled tier-`n` ADMs differ from canonical
//! ones by the factor `∏_σ [n_σ! (a^σ)^{n_σ}]^{−1/2}`.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::correlations::{CorrelationTable, CrossCorrelationFn, CrossKind, ExponentialSeries};
use crate::error::{CoreError, Result};
use crate::integrator::{integrate_grid, Event, OdeSystem, StepControl};
use crate::operators::{commutator_super, left_mul_super, right_mul_super, ComplexMatrix, SuperOperator};

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// System Hamiltonian plus the system side of every interaction term.
///
/// Each coupling operator `s_q` contributes two interaction superoperators,
/// indexed `α = 2q` (left multiplication `s_q·`) and `α = 2q + 1` (negated
/// right multiplication `−·s_q`), so that a sum over both α of equal
/// weights produces the commutator `[s_q, ·]`.
#[derive(Debug, Clone)]
pub struct SystemModel {
    dim: usize,
    h_s: ComplexMatrix,
    couplings: Vec<ComplexMatrix>,
    supers: Vec<SuperOperator>,
}

impl SystemModel {
    pub fn new(h_s: ComplexMatrix, couplings: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = h_s.require_square()?;
        let scale = 1.0 + h_s.max_abs();
        let defect = h_s.hermiticity_defect();
        if defect > 1e-12 * scale {
            return Err(CoreError::NotHermitian {
                defect,
                tol: 1e-12 * scale,
            });
        }
        let mut supers = Vec::with_capacity(2 * couplings.len());
        for s in &couplings {
            if s.require_square()? != dim {
                return Err(CoreError::DimensionMismatch(format!(
                    "coupling operator is {}x{}, Hamiltonian is {dim}x{dim}",
                    s.rows(),
                    s.cols()
                )));
            }
            supers.push(left_mul_super(s)?);
            supers.push(right_mul_super(s)?.scale(c64(-1.0, 0.0)));
        }
        Ok(Self {
            dim,
            h_s,
            couplings,
            supers,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h_s(&self) -> &ComplexMatrix {
        &self.h_s
    }

    pub fn couplings(&self) -> &[ComplexMatrix] {
        &self.couplings
    }

    /// Number of interaction superoperators (two per coupling operator).
    pub fn n_alpha(&self) -> usize {
        self.supers.len()
    }

    /// The interaction superoperator labelled `alpha`.
    pub fn interaction_super(&self, alpha: usize) -> &SuperOperator {
        &self.supers[alpha]
    }
}

/// One exponential term σ of the factorized influence kernel: correlation
/// amplitude `a`, decay rate `b` (non-negative real part), the
/// down-coupling superoperator applied when descending from this σ's
/// occupation, and the up-coupling superoperator ascending into it.
#[derive(Debug, Clone)]
pub struct SigmaTerm {
    a: Complex64,
    b: Complex64,
    down: SuperOperator,
    up: SuperOperator,
}

impl SigmaTerm {
    pub fn amplitude(&self) -> Complex64 {
        self.a
    }

    pub fn decay(&self) -> Complex64 {
        self.b
    }
}

/// One dynamic-field slot η = (field, exponential kernel term): the flag
/// decays at `decay` and couples down through interaction superoperator
/// `alpha` with weight `amplitude`.
#[derive(Debug, Clone)]
struct DynSlot {
    alpha: usize,
    amplitude: Complex64,
    decay: Complex64,
}

#[derive(Debug, Clone)]
struct DynField {
    label: usize,
    slots: Vec<usize>,
}

#[derive(Debug)]
struct StaticField {
    label: usize,
    kernels: Vec<CrossCorrelationFn>,
}

/// Default cap on the number of auxiliary density matrices.
pub const DEFAULT_MAX_ADM: usize = 300_000;

/// Full problem description: system model, factorized bath terms, the
/// hierarchy scaling parameter α₀ (default −i), tier cap `n_max`, and any
/// input/output field attachments.
#[derive(Debug)]
pub struct HierarchySpec {
    model: SystemModel,
    sigma: Vec<SigmaTerm>,
    alpha0: Complex64,
    n_max: usize,
    dyn_fields: Vec<DynField>,
    dyn_slots: Vec<DynSlot>,
    static_fields: Vec<StaticField>,
    max_adm: usize,
}

impl HierarchySpec {
    fn base(model: SystemModel, alpha0: Complex64, n_max: usize) -> Result<Self> {
        if alpha0.norm() == 0.0 {
            return Err(CoreError::InvalidParameter(
                "hierarchy scaling parameter must be non-zero".into(),
            ));
        }
        Ok(Self {
            model,
            sigma: Vec::new(),
            alpha0,
            n_max,
            dyn_fields: Vec::new(),
            dyn_slots: Vec::new(),
            static_fields: Vec::new(),
            max_adm: DEFAULT_MAX_ADM,
        })
    }

    fn push_sigma(&mut self, a: Complex64, b: Complex64, down: SuperOperator, up: SuperOperator) {
        // Zero-amplitude terms contribute nothing and would break the
        // rescaled form's √a coefficients, so they are pruned here.
        if a.norm() > 0.0 {
            self.sigma.push(SigmaTerm { a, b, down, up });
        }
    }

    /// Builds the hierarchy directly from the full superoperator
    /// correlation matrix `C^{αβ}(τ) = Σ_k a_k e^{−b_k τ}`: each non-empty
    /// entry contributes one σ term per exponential, with down-coupling
    /// `𝒮^β` and up-coupling `−𝒮^α`.
    pub fn new(
        model: SystemModel,
        bath: &CorrelationTable,
        alpha0: Complex64,
        n_max: usize,
    ) -> Result<Self> {
        if bath.n_alpha() != model.n_alpha() {
            return Err(CoreError::DimensionMismatch(format!(
                "correlation table has {} superoperator labels, model has {}",
                bath.n_alpha(),
                model.n_alpha()
            )));
        }
        let mut spec = Self::base(model, c64(0.0, -1.0), n_max)?;
        spec = spec.with_alpha0(alpha0)?;
        for (alpha, beta, series) in bath.iter() {
            let down = spec.model.interaction_super(beta).clone();
            let up = spec.model.interaction_super(alpha).scale(c64(-1.0, 0.0));
            for &(a, b) in series.terms() {
                spec.push_sigma(a, b, down.clone(), up.clone());
            }
        }
        Ok(spec)
    }

    /// Builds the hierarchy for a single hermitian coupling operator from
    /// the scalar bath correlation `C(τ) = Σ_k c_k e^{−γ_k τ}` (τ ≥ 0),
    /// using the causal two-branch form: one branch per exponential couples
    /// down through `s·` with amplitude `c_k`, its conjugate partner
    /// through `−·s` with amplitude `c̄_k`, and both ascend through the
    /// commutator `−[s,·]`.
    pub fn from_causal(
        model: SystemModel,
        correlation: &ExponentialSeries,
        n_max: usize,
    ) -> Result<Self> {
        Self::single_coupling(model, correlation, n_max, false)
    }

    /// Same physics as [`Self::from_causal`], but organized around the real
    /// and imaginary parts of the bath correlation: `C_R` terms couple down
    /// through `[s,·]` and `C_I` terms through `i(s· + ·s)`, both ascending
    /// through `−[s,·]`.
    pub fn from_real_structure(
        model: SystemModel,
        correlation: &ExponentialSeries,
        n_max: usize,
    ) -> Result<Self> {
        Self::single_coupling(model, correlation, n_max, true)
    }

    fn single_coupling(
        model: SystemModel,
        correlation: &ExponentialSeries,
        n_max: usize,
        real_structure: bool,
    ) -> Result<Self> {
        if model.couplings().len() != 1 {
            return Err(CoreError::InvalidParameter(format!(
                "single-coupling constructors need exactly one coupling operator, got {}",
                model.couplings().len()
            )));
        }
        let s = &model.couplings()[0];
        let scale = 1.0 + s.max_abs();
        let defect = s.hermiticity_defect();
        if defect > 1e-12 * scale {
            return Err(CoreError::NotHermitian {
                defect,
                tol: 1e-12 * scale,
            });
        }
        let mut spec = Self::base(model, c64(0.0, -1.0), n_max)?;
        let left = spec.model.interaction_super(0).clone();
        let right = spec.model.interaction_super(1).clone();
        let comm = left.add(&right); // [s, ·]
        let up = comm.scale(c64(-1.0, 0.0)); // −[s, ·]
        if real_structure {
            let anti = left.sub(&right).scale(c64(0.0, 1.0)); // i(s· + ·s)
            for &(c, g) in correlation.terms() {
                // C_R = (C + C̄)/2 pairs with [s,·]; C_I = (C − C̄)/(2i)
                // pairs with i(s· + ·s).
                spec.push_sigma(0.5 * c, g, comm.clone(), up.clone());
                spec.push_sigma(0.5 * c.conj(), g.conj(), comm.clone(), up.clone());
                spec.push_sigma(c64(0.0, -0.5) * c, g, anti.clone(), up.clone());
                spec.push_sigma(c64(0.0, 0.5) * c.conj(), g.conj(), anti.clone(), up.clone());
            }
        } else {
            for &(c, g) in correlation.terms() {
                spec.push_sigma(c, g, left.clone(), up.clone());
                spec.push_sigma(c.conj(), g.conj(), right.clone(), up.clone());
            }
        }
        Ok(spec)
    }

    /// Overrides the hierarchy scaling parameter α₀ (any non-zero complex
    /// value; physical observables are independent of the choice).
    pub fn with_alpha0(mut self, alpha0: Complex64) -> Result<Self> {
        if alpha0.norm() == 0.0 {
            return Err(CoreError::InvalidParameter(
                "hierarchy scaling parameter must be non-zero".into(),
            ));
        }
        self.alpha0 = alpha0;
        Ok(self)
    }

    /// Overrides the cap on the number of auxiliary density matrices.
    pub fn with_max_adm_count(mut self, cap: usize) -> Self {
        self.max_adm = cap;
        self
    }

    fn check_field(&self, label: usize, kernels: &[CrossCorrelationFn]) -> Result<()> {
        if kernels.is_empty() {
            return Err(CoreError::InvalidParameter(format!(
                "field {label} has no cross-correlation kernels"
            )));
        }
        let duplicate = self.dyn_fields.iter().any(|f| f.label == label)
            || self.static_fields.iter().any(|f| f.label == label);
        if duplicate {
            return Err(CoreError::InvalidParameter(format!(
                "field label {label} is already in use"
            )));
        }
        for k in kernels {
            if k.field != label {
                return Err(CoreError::InvalidParameter(format!(
                    "kernel tagged for field {} attached to field {label}",
                    k.field
                )));
            }
            if k.alpha >= self.model.n_alpha() {
                return Err(CoreError::InvalidParameter(format!(
                    "kernel superoperator label {} out of range (model has {})",
                    k.alpha,
                    self.model.n_alpha()
                )));
            }
        }
        Ok(())
    }

    /// Attaches a dynamic field: its cross-correlation kernels must be in
    /// exponential form, each term becoming one flag slot that decays at
    /// the term's rate and couples down through the kernel's
    /// interaction superoperator.
    pub fn with_dynamic_field(
        mut self,
        label: usize,
        kernels: Vec<CrossCorrelationFn>,
    ) -> Result<Self> {
        self.check_field(label, &kernels)?;
        let mut slots = Vec::new();
        for k in &kernels {
            let series = match &k.kind {
                CrossKind::ExponentialForm(s) => s,
                CrossKind::Sampled(_) => {
                    return Err(CoreError::InvalidParameter(format!(
                        "dynamic field {label} requires exponential-form kernels"
                    )))
                }
            };
            for &(c, g) in series.terms() {
                if c.norm() == 0.0 {
                    continue;
                }
                slots.push(self.dyn_slots.len());
                self.dyn_slots.push(DynSlot {
                    alpha: k.alpha,
                    amplitude: c,
                    decay: g,
                });
            }
        }
        if slots.is_empty() {
            return Err(CoreError::InvalidParameter(format!(
                "dynamic field {label} has no non-zero kernel terms"
            )));
        }
        self.dyn_fields.push(DynField { label, slots });
        Ok(self)
    }

    /// Attaches a static field: a single binary flag whose down-coupling
    /// superoperator `Σ_α ⟨φ(t_φ) χ^α_t⟩ 𝒮^α` is evaluated at the current
    /// absolute time on every right-hand-side call, so the kernels may be
    /// arbitrary sampled functions.
    pub fn with_static_field(
        mut self,
        label: usize,
        kernels: Vec<CrossCorrelationFn>,
    ) -> Result<Self> {
        self.check_field(label, &kernels)?;
        self.static_fields.push(StaticField { label, kernels });
        Ok(self)
    }

    pub fn model(&self) -> &SystemModel {
        &self.model
    }

    pub fn sigma_terms(&self) -> &[SigmaTerm] {
        &self.sigma
    }

    pub fn alpha0(&self) -> Complex64 {
        self.alpha0
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Labels of all attached fields, dynamic first.
    pub fn field_labels(&self) -> Vec<usize> {
        self.dyn_fields
            .iter()
            .map(|f| f.label)
            .chain(self.static_fields.iter().map(|f| f.label))
            .collect()
    }
}

/// Label of one auxiliary density matrix: bath occupations `n` (one per σ
/// term, total bounded by the tier cap), dynamic-field slot flags `n_phi`
/// (at most one slot set per field), and static-field flags `n_static`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AdmIndex {
    pub n: Vec<u32>,
    pub n_phi: Vec<u32>,
    pub n_static: Vec<u8>,
}

impl AdmIndex {
    /// Total bath-mode occupation Σ_σ n_σ.
    pub fn depth(&self) -> u32 {
        self.n.iter().sum()
    }

    /// Total number of field insertions.
    pub fn field_excitation(&self) -> u32 {
        self.n_phi.iter().sum::<u32>() + self.n_static.iter().map(|&f| u32::from(f)).sum::<u32>()
    }
}

/// The enumerated, deterministically ordered ADM index set with O(1)
/// reverse lookup.
#[derive(Debug, Clone)]
pub struct IndexSpace {
    indexes: Vec<AdmIndex>,
    lookup: HashMap<AdmIndex, usize>,
}

impl IndexSpace {
    pub fn len(&self) -> usize {
        self.indexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indexes.is_empty()
    }

    pub fn indexes(&self) -> &[AdmIndex] {
        &self.indexes
    }

    pub fn position(&self, idx: &AdmIndex) -> Option<usize> {
        self.lookup.get(idx).copied()
    }
}

fn binom_u128(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn enumerate_occupations(n_sigma: usize, n_max: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = vec![0u32; n_sigma];
    fn recur(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, pos: usize, budget: u32) {
        if pos == current.len() {
            out.push(current.clone());
            return;
        }
        for v in 0..=budget {
            current[pos] = v;
            recur(out, current, pos + 1, budget - v);
        }
        current[pos] = 0;
    }
    recur(&mut out, &mut current, 0, n_max as u32);
    out
}

/// Enumerates every ADM index of the hierarchy: all bath occupations with
/// total ≤ `n_max`, crossed with every admissible field-flag combination
/// (at most one slot per dynamic field, each static field on or off).
pub fn build_index_space(spec: &HierarchySpec) -> Result<IndexSpace> {
    let n_sigma = spec.sigma.len();
    let regular = binom_u128(n_sigma + spec.n_max, n_sigma);
    let mut flags: u128 = 1 << spec.static_fields.len();
    for f in &spec.dyn_fields {
        flags *= (1 + f.slots.len()) as u128;
    }
    let total = regular * flags;
    if total > spec.max_adm as u128 {
        return Err(CoreError::InvalidParameter(format!(
            "hierarchy needs {total} auxiliary matrices, cap is {}",
            spec.max_adm
        )));
    }

    // Dynamic-field flag patterns: each field independently chooses "no
    // insertion" or exactly one of its slots.
    let mut phi_patterns: Vec<Vec<u32>> = vec![vec![0; spec.dyn_slots.len()]];
    for f in &spec.dyn_fields {
        let mut next = Vec::new();
        for pat in &phi_patterns {
            next.push(pat.clone());
            for &slot in &f.slots {
                let mut p = pat.clone();
                p[slot] = 1;
                next.push(p);
            }
        }
        phi_patterns = next;
    }
    let m_static = spec.static_fields.len();
    let mut indexes = Vec::with_capacity(total as usize);
    for ns in enumerate_occupations(n_sigma, spec.n_max) {
        for phi in &phi_patterns {
            for bits in 0..(1u32 << m_static) {
                let n_static = (0..m_static).map(|j| ((bits >> j) & 1) as u8).collect();
                indexes.push(AdmIndex {
                    n: ns.clone(),
                    n_phi: phi.clone(),
                    n_static,
                });
            }
        }
    }
    indexes.sort();
    let lookup = indexes
        .iter()
        .enumerate()
        .map(|(i, idx)| (idx.clone(), i))
        .collect();
    Ok(IndexSpace { indexes, lookup })
}

/// Which coefficient convention the assembled generator uses; see the
/// module docs.  Both forms produce the identical root trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeomForm {
    Canonical,
    Rescaled,
}

enum OpRef {
    /// Scalar multiple of the identity (occupation decay).
    Identity,
    /// Entry of the shared superoperator table.
    Table(usize),
}

struct Coupling {
    row: usize,
    col: usize,
    coeff: Complex64,
    op: OpRef,
}

struct TimeDepCoupling {
    row: usize,
    col: usize,
    field_pos: usize,
}

/// Assembled hierarchy generator: the index space plus a block-sparse
/// coupling list built once up front.  Static-field couplings are the only
/// time-dependent pieces; their scalar kernels are evaluated on every
/// right-hand-side call.
pub struct Hierarchy {
    spec: HierarchySpec,
    space: IndexSpace,
    form: HeomForm,
    block: usize,
    ops: Vec<SuperOperator>,
    constant: Vec<Coupling>,
    time_dep: Vec<TimeDepCoupling>,
}

impl Hierarchy {
    pub fn new(spec: HierarchySpec, form: HeomForm) -> Result<Self> {
        let space = build_index_space(&spec)?;
        let dim = spec.model.dim();
        let block = dim * dim;
        let n_sigma = spec.sigma.len();

        // Shared superoperator table: [0] the Hamiltonian commutator
        // −i[H_S,·], then the σ down-couplings, the σ up-couplings, and the
        // bare interaction superoperators used by field couplings.
        let mut ops = Vec::with_capacity(1 + 2 * n_sigma + spec.model.n_alpha());
        ops.push(commutator_super(&spec.model.h_s)?.scale(c64(0.0, -1.0)));
        for term in &spec.sigma {
            ops.push(term.down.clone());
        }
        for term in &spec.sigma {
            ops.push(term.up.clone());
        }
        for alpha in 0..spec.model.n_alpha() {
            ops.push(spec.model.interaction_super(alpha).clone());
        }
        let down_op = |s: usize| 1 + s;
        let up_op = |s: usize| 1 + n_sigma + s;
        let alpha_op = |a: usize| 1 + 2 * n_sigma + a;

        let inv_alpha0 = spec.alpha0.inv();
        let mut constant = Vec::new();
        let mut time_dep = Vec::new();
        for (row, idx) in space.indexes().iter().enumerate() {
            constant.push(Coupling {
                row,
                col: row,
                coeff: c64(1.0, 0.0),
                op: OpRef::Table(0),
            });
            let mut decay = Complex64::default();
            for (s, term) in spec.sigma.iter().enumerate() {
                decay -= f64::from(idx.n[s]) * term.b;
            }
            for (e, slot) in spec.dyn_slots.iter().enumerate() {
                decay -= f64::from(idx.n_phi[e]) * slot.decay;
            }
            if decay.norm() > 0.0 {
                constant.push(Coupling {
                    row,
                    col: row,
                    coeff: decay,
                    op: OpRef::Identity,
                });
            }
            for (s, term) in spec.sigma.iter().enumerate() {
                if idx.n[s] > 0 {
                    let mut lower = idx.clone();
                    lower.n[s] -= 1;
                    let col = space.position(&lower).expect("lower neighbour enumerated");
                    let n_s = f64::from(idx.n[s]);
                    let coeff = match form {
                        HeomForm::Canonical => spec.alpha0 * n_s * term.a,
                        HeomForm::Rescaled => spec.alpha0 * (n_s * term.a).sqrt(),
                    };
                    constant.push(Coupling {
                        row,
                        col,
                        coeff,
                        op: OpRef::Table(down_op(s)),
                    });
                }
                let mut upper = idx.clone();
                upper.n[s] += 1;
                // Absent at the tier cap: the truncation drops ascents.
                if let Some(col) = space.position(&upper) {
                    let coeff = match form {
                        HeomForm::Canonical => inv_alpha0,
                        HeomForm::Rescaled => {
                            inv_alpha0 * (f64::from(idx.n[s] + 1) * term.a).sqrt()
                        }
                    };
                    constant.push(Coupling {
                        row,
                        col,
                        coeff,
                        op: OpRef::Table(up_op(s)),
                    });
                }
            }
            for (e, slot) in spec.dyn_slots.iter().enumerate() {
                if idx.n_phi[e] > 0 {
                    let mut lower = idx.clone();
                    lower.n_phi[e] = 0;
                    let col = space.position(&lower).expect("unflagged neighbour enumerated");
                    constant.push(Coupling {
                        row,
                        col,
                        coeff: slot.amplitude,
                        op: OpRef::Table(alpha_op(slot.alpha)),
                    });
                }
            }
            for (j, _) in spec.static_fields.iter().enumerate() {
                if idx.n_static[j] > 0 {
                    let mut lower = idx.clone();
                    lower.n_static[j] = 0;
                    let col = space.position(&lower).expect("unflagged neighbour enumerated");
                    time_dep.push(TimeDepCoupling {
                        row,
                        col,
                        field_pos: j,
                    });
                }
            }
        }
        let h = Self {
            spec,
            space,
            form,
            block,
            ops,
            constant,
            time_dep,
        };
        // The field sector must be strictly lower-triangular: no coupling
        // may feed a higher field excitation back into a lower one.
        assert!(h.verify_tier_bounded(), "field sector is not lower-triangular");
        Ok(h)
    }

    pub fn spec(&self) -> &HierarchySpec {
        &self.spec
    }

    pub fn form(&self) -> HeomForm {
        self.form
    }

    pub fn index_space(&self) -> &IndexSpace {
        &self.space
    }

    pub fn n_adm(&self) -> usize {
        self.space.len()
    }

    /// Length of one vectorized ADM block (system dimension squared).
    pub fn block_len(&self) -> usize {
        self.block
    }

    pub fn state_len(&self) -> usize {
        self.space.len() * self.block
    }

    /// Checks structurally that every generator coupling keeps or lowers
    /// the field excitation, so field flags never feed back upward.
    pub fn verify_tier_bounded(&self) -> bool {
        let exc = |i: usize| self.space.indexes()[i].field_excitation();
        self.constant.iter().all(|c| exc(c.col) <= exc(c.row))
            && self.time_dep.iter().all(|c| exc(c.col) < exc(c.row))
    }

    /// Flat initial state: the root ADM holds `rho0`, every other ADM is
    /// zero (factorized initial condition).
    pub fn initial_state(&self, rho0: &ComplexMatrix) -> Result<Vec<Complex64>> {
        if rho0.require_square()? != self.spec.model.dim() {
            return Err(CoreError::DimensionMismatch(format!(
                "initial state is {}x{}, system dimension is {}",
                rho0.rows(),
                rho0.cols(),
                self.spec.model.dim()
            )));
        }
        let root = AdmIndex {
            n: vec![0; self.spec.sigma.len()],
            n_phi: vec![0; self.spec.dyn_slots.len()],
            n_static: vec![0; self.spec.static_fields.len()],
        };
        let pos = self.space.position(&root).expect("root index enumerated");
        let mut y = vec![Complex64::default(); self.state_len()];
        y[pos * self.block..(pos + 1) * self.block].copy_from_slice(&rho0.vectorize());
        Ok(y)
    }

    fn rhs_unchecked(&self, t: f64, y: &[Complex64], dydt: &mut [Complex64]) {
        dydt.fill(Complex64::default());
        let b = self.block;
        let mut scratch = vec![Complex64::default(); b];
        for cpl in &self.constant {
            let src = &y[cpl.col * b..(cpl.col + 1) * b];
            let dst = &mut dydt[cpl.row * b..(cpl.row + 1) * b];
            match cpl.op {
                OpRef::Identity => {
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += cpl.coeff * s;
                    }
                }
                OpRef::Table(i) => {
                    self.ops[i].apply_vec(src, &mut scratch);
                    for (d, s) in dst.iter_mut().zip(&scratch) {
                        *d += cpl.coeff * s;
                    }
                }
            }
        }
        let n_sigma = self.spec.sigma.len();
        for cpl in &self.time_dep {
            let field = &self.spec.static_fields[cpl.field_pos];
            for kernel in &field.kernels {
                let k = kernel
                    .eval(t)
                    .expect("static-field kernel evaluation failed");
                if k.norm() == 0.0 {
                    continue;
                }
                let op = &self.ops[1 + 2 * n_sigma + kernel.alpha];
                let src = &y[cpl.col * b..(cpl.col + 1) * b];
                op.apply_vec(src, &mut scratch);
                let dst = &mut dydt[cpl.row * b..(cpl.row + 1) * b];
                for (d, s) in dst.iter_mut().zip(&scratch) {
                    *d += k * s;
                }
            }
        }
    }

    /// Evaluates the full hierarchy right-hand side at absolute time `t`.
    pub fn rhs(&self, t: f64, y: &[Complex64], dydt: &mut [Complex64]) -> Result<()> {
        if y.len() != self.state_len() || dydt.len() != self.state_len() {
            return Err(CoreError::DimensionMismatch(format!(
                "state has {} entries, hierarchy expects {}",
                y.len(),
                self.state_len()
            )));
        }
        self.rhs_unchecked(t, y, dydt);
        Ok(())
    }

    /// Integrates from the factorized initial state over `grid` (which
    /// must start at the initial time).  `breakpoints` are times the
    /// stepper must land on exactly (kernel kinks); each kick is an
    /// instantaneous superoperator applied atomically to every ADM block
    /// at its stated time.
    pub fn integrate(
        &self,
        rho0: &ComplexMatrix,
        grid: &[f64],
        breakpoints: &[f64],
        kicks: &[(f64, SuperOperator)],
        ctrl: StepControl,
    ) -> Result<Vec<Vec<Complex64>>> {
        for (_, k) in kicks {
            if k.dim() != self.spec.model.dim() {
                return Err(CoreError::DimensionMismatch(format!(
                    "kick superoperator dimension {} does not match system dimension {}",
                    k.dim(),
                    self.spec.model.dim()
                )));
            }
        }
        let y0 = self.initial_state(rho0)?;
        let b = self.block;
        let n_adm = self.n_adm();
        let mut events: Vec<Event<'_>> = kicks
            .iter()
            .map(|(t, k)| Event {
                t: *t,
                apply: Box::new(move |y: &mut [Complex64]| {
                    let mut scratch = vec![Complex64::default(); b];
                    for blk in 0..n_adm {
                        let range = blk * b..(blk + 1) * b;
                        k.apply_vec(&y[range.clone()], &mut scratch);
                        y[range].copy_from_slice(&scratch);
                    }
                }),
            })
            .collect();
        let sys = HierarchyOde { h: self };
        integrate_grid(&sys, &y0, grid, breakpoints, &mut events, ctrl)
    }

    /// Extracts one ADM from a flat state vector.
    pub fn adm(&self, y: &[Complex64], idx: &AdmIndex) -> Result<ComplexMatrix> {
        let pos = self.space.position(idx).ok_or_else(|| {
            CoreError::MissingEntry(format!("ADM index {idx:?} not in the hierarchy"))
        })?;
        ComplexMatrix::unvectorize(
            &y[pos * self.block..(pos + 1) * self.block],
            self.spec.model.dim(),
        )
    }

    /// The reduced system density matrix (root ADM).
    pub fn rho_s(&self, y: &[Complex64]) -> Result<ComplexMatrix> {
        let root = AdmIndex {
            n: vec![0; self.spec.sigma.len()],
            n_phi: vec![0; self.spec.dyn_slots.len()],
            n_static: vec![0; self.spec.static_fields.len()],
        };
        self.adm(y, &root)
    }

    /// Reconstructs the conditional matrix carrying exactly one insertion
    /// of every field in `fields` and none of the others: the sum of all
    /// zero-occupation ADMs whose per-field flag totals match.  The empty
    /// set returns the root ADM.
    pub fn reconstruct(&self, y: &[Complex64], fields: &[usize]) -> Result<ComplexMatrix> {
        let labels = self.spec.field_labels();
        for f in fields {
            if !labels.contains(f) {
                return Err(CoreError::MissingEntry(format!(
                    "field label {f} is not attached to this hierarchy"
                )));
            }
        }
        let dim = self.spec.model.dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        'outer: for (pos, idx) in self.space.indexes().iter().enumerate() {
            if idx.depth() != 0 {
                continue;
            }
            for (j, f) in self.spec.dyn_fields.iter().enumerate() {
                let total: u32 = f.slots.iter().map(|&s| idx.n_phi[s]).sum();
                let want = u32::from(fields.contains(&self.spec.dyn_fields[j].label));
                if total != want {
                    continue 'outer;
                }
            }
            for (j, f) in self.spec.static_fields.iter().enumerate() {
                let want = u8::from(fields.contains(&f.label));
                if idx.n_static[j] != want {
                    continue 'outer;
                }
            }
            let blk = ComplexMatrix::unvectorize(
                &y[pos * self.block..(pos + 1) * self.block],
                dim,
            )?;
            acc = acc.add(&blk);
        }
        Ok(acc)
    }
}

struct HierarchyOde<'a> {
    h: &'a Hierarchy,
}

impl OdeSystem for HierarchyOde<'_> {
    fn dim(&self) -> usize {
        self.h.state_len()
    }

    fn rhs(&self, t: f64, y: &[Complex64], dydt: &mut [Complex64]) {
        self.h.rhs_unchecked(t, y, dydt);
    }
}
