//! Dense complex matrix algebra and Liouville-space (superoperator) constructions.
//!
//! Every other module builds on the two types defined here:
//!
//! * [`ComplexMatrix`] — a dense, row-major complex matrix holding density
//!   matrices, Hamiltonians and coupling operators.
//! * [`SuperOperator`] — a `(dim^2, dim^2)` matrix acting on *vectorized*
//!   density matrices.
//!
//! # Vectorization convention
//!
//! Column stacking is used project-wide: the vector element `i + j*dim`
//! holds the matrix entry at row `i`, column `j`.  Under this convention
//! `vec(A ρ B) = (B^T ⊗ A) vec(ρ)`, so a left multiplication is `I ⊗ A`
//! and a right multiplication is `B^T ⊗ I`.  All superoperator matrices in
//! this crate depend on this choice; do not mix conventions.
//!
//! System dimensions in the supported scenarios are ≤ 4, so everything is
//! dense and allocation-light; no sparsity machinery is used at this level.

use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// Tolerance used by hermiticity checks.  Matrices are *checked*, never
/// auto-symmetrized.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// A dense complex matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Build from a closure over (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Build from nested row slices; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(CoreError::DimensionMismatch("ragged rows in from_rows".into()));
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            data.extend_from_slice(row);
        }
        Ok(Self { rows: r, cols: c, data })
    }

    /// Build from real row slices.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let complex_rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&complex_rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Checked square-ness, as required by the superoperator constructors.
    pub fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(CoreError::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: Complex64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] += v;
    }

    /// Raw row-major entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    /// Matrix product; shapes must be compatible.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.add_to(i, j, a * other.get(k, j));
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let data = self.data.iter().map(|a| a * s).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hermiticity defect `max |M - M^dag|`.
    pub fn hermiticity_defect(&self) -> f64 {
        debug_assert!(self.is_square());
        self.max_abs_diff(&self.dagger())
    }

    /// Check hermiticity within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_defect() <= tol
    }

    /// Kronecker product `self ⊗ other` (first factor is the slow index).
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self.get(i1, j1);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        out.set(
                            i1 * other.rows + i2,
                            j1 * other.cols + j2,
                            a * other.get(i2, j2),
                        );
                    }
                }
            }
        }
        out
    }

    /// Column-stacking vectorization: element `i + j*rows` is entry (i, j).
    pub fn vectorize(&self) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(self.rows * self.cols);
        for j in 0..self.cols {
            for i in 0..self.rows {
                v.push(self.get(i, j));
            }
        }
        v
    }

    /// Inverse of [`ComplexMatrix::vectorize`] for a square matrix of size `dim`.
    pub fn unvectorize(v: &[Complex64], dim: usize) -> Result<Self> {
        if v.len() != dim * dim {
            return Err(CoreError::DimensionMismatch(format!(
                "unvectorize: vector length {} is not {}^2",
                v.len(),
                dim
            )));
        }
        Ok(Self::from_fn(dim, dim, |i, j| v[i + j * dim]))
    }

    /// Eigendecomposition of a hermitian matrix by the cyclic complex Jacobi
    /// method.  Returns ascending eigenvalues and the unitary matrix whose
    /// columns are the matching eigenvectors, so `self = V diag(λ) V^dag`.
    pub fn eigh(&self) -> Result<(Vec<f64>, ComplexMatrix)> {
        let n = self.require_square()?;
        let defect = self.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(CoreError::NotHermitian { defect, tol: HERMITICITY_TOL });
        }
        let mut a = self.clone();
        let mut v = Self::identity(n);
        let scale = self.max_abs().max(1e-300);
        for _sweep in 0..100 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off.max(a.get(p, q).norm());
                }
            }
            if off <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    let m = apq.norm();
                    if m <= 1e-18 * scale {
                        continue;
                    }
                    let app = a.get(p, p).re;
                    let aqq = a.get(q, q).re;
                    // Phase of the off-diagonal entry and rotation angle that
                    // zeroes it in the 2x2 hermitian sub-block.
                    let phase = apq / m;
                    let theta = 0.5 * (2.0 * m).atan2(app - aqq);
                    let c = theta.cos();
                    let s = theta.sin();
                    // Unitary rotation columns (p, q):
                    //   col_p' = c*col_p + s*conj(phase)*col_q
                    //   col_q' = -s*phase*col_p + c*col_q
                    let sp = s * phase;
                    let spc = s * phase.conj();
                    // A <- J^dag A J, applied as column then row updates.
                    for i in 0..n {
                        let aip = a.get(i, p);
                        let aiq = a.get(i, q);
                        a.set(i, p, aip * c + aiq * spc);
                        a.set(i, q, -aip * sp + aiq * c);
                    }
                    for j in 0..n {
                        let apj = a.get(p, j);
                        let aqj = a.get(q, j);
                        a.set(p, j, apj * c + aqj * spc.conj());
                        a.set(q, j, -apj * sp.conj() + aqj * c);
                    }
                    for i in 0..n {
                        let vip = v.get(i, p);
                        let viq = v.get(i, q);
                        v.set(i, p, vip * c + viq * spc);
                        v.set(i, q, -vip * sp + viq * c);
                    }
                }
            }
        }
        // Sort ascending and permute eigenvector columns accordingly.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a.get(i, i).re.partial_cmp(&a.get(j, j).re).unwrap());
        let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i).re).collect();
        let vectors = Self::from_fn(n, n, |i, j| v.get(i, order[j]));
        Ok((eigenvalues, vectors))
    }

    /// Matrix exponential by scaling-and-squaring with a truncated Taylor
    /// series; accurate to near machine precision for the small, well-scaled
    /// matrices used in this crate.
    pub fn expm(&self) -> Result<Self> {
        let n = self.require_square()?;
        let norm = self.max_abs() * n as f64;
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
        let t = self.scale(Complex64::new(1.0 / 2f64.powi(squarings as i32), 0.0));
        let mut result = Self::identity(n);
        let mut term = Self::identity(n);
        for k in 1..200 {
            term = term.mul(&t).scale(Complex64::new(1.0 / k as f64, 0.0));
            result = result.add(&term);
            if term.max_abs() < 1e-18 * result.max_abs().max(1.0) {
                break;
            }
        }
        for _ in 0..squarings {
            result = result.mul(&result);
        }
        Ok(result)
    }
}

/// A linear map on vectorized density matrices of Hilbert dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl SuperOperator {
    /// Wrap an explicit `(dim^2, dim^2)` matrix.
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != dim * dim || matrix.cols() != dim * dim {
            return Err(CoreError::DimensionMismatch(format!(
                "superoperator matrix is {}x{}, expected {}x{}",
                matrix.rows(),
                matrix.cols(),
                dim * dim,
                dim * dim
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::zeros(dim * dim, dim * dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::identity(dim * dim) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Apply to a density matrix: `unvec(M · vec(ρ))`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.dim || rho.cols() != self.dim {
            return Err(CoreError::DimensionMismatch(format!(
                "superoperator of dim {} applied to {}x{} matrix",
                self.dim,
                rho.rows(),
                rho.cols()
            )));
        }
        let v = rho.vectorize();
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        self.apply_vec(&v, &mut out);
        ComplexMatrix::unvectorize(&out, self.dim)
    }

    /// Apply to an already-vectorized state (`out +=` is *not* used; `out`
    /// is overwritten).
    pub fn apply_vec(&self, v: &[Complex64], out: &mut [Complex64]) {
        let d2 = self.dim * self.dim;
        debug_assert_eq!(v.len(), d2);
        debug_assert_eq!(out.len(), d2);
        for i in 0..d2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..d2 {
                acc += self.matrix.get(i, j) * v[j];
            }
            out[i] = acc;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self { dim: self.dim, matrix: self.matrix.add(&other.matrix) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self { dim: self.dim, matrix: self.matrix.sub(&other.matrix) }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { dim: self.dim, matrix: self.matrix.scale(s) }
    }

    /// Composition `self ∘ other` (matrix product).
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self { dim: self.dim, matrix: self.matrix.mul(&other.matrix) }
    }

    /// Superoperator exponential.
    pub fn expm(&self) -> Result<Self> {
        Ok(Self { dim: self.dim, matrix: self.matrix.expm()? })
    }
}

/// Superoperator of left multiplication: `unvec(L · vec(ρ)) = A ρ`.
pub fn left_mul_super(a: &ComplexMatrix) -> Result<SuperOperator> {
    let d = a.require_square()?;
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for j in 0..d {
        for i in 0..d {
            for k in 0..d {
                m.set(i + j * d, k + j * d, a.get(i, k));
            }
        }
    }
    SuperOperator::new(d, m)
}

/// Superoperator of right multiplication: `unvec(R · vec(ρ)) = ρ A`.
pub fn right_mul_super(a: &ComplexMatrix) -> Result<SuperOperator> {
    let d = a.require_square()?;
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            for l in 0..d {
                m.set(i + j * d, i + l * d, a.get(l, j));
            }
        }
    }
    SuperOperator::new(d, m)
}

/// Commutator superoperator: `unvec(C · vec(ρ)) = Hρ − ρH`.
pub fn commutator_super(h: &ComplexMatrix) -> Result<SuperOperator> {
    Ok(left_mul_super(h)?.sub(&right_mul_super(h)?))
}

/// Lindblad dissipator superoperator:
/// `unvec(D · vec(ρ)) = 2 L ρ L† − L†L ρ − ρ L†L`.
pub fn dissipator_super(l: &ComplexMatrix) -> Result<SuperOperator> {
    l.require_square()?;
    let ldag = l.dagger();
    let ldl = ldag.mul(l);
    let sandwich = left_mul_super(l)?.compose(&right_mul_super(&ldag)?);
    let anticomm = left_mul_super(&ldl)?.add(&right_mul_super(&ldl)?);
    Ok(sandwich.scale(Complex64::new(2.0, 0.0)).sub(&anticomm))
}

/// Heisenberg-style conjugation `e^{iH0 t} · op · e^{−iH0 t}` computed via
/// the eigendecomposition of the hermitian `H0`.
pub fn interaction_picture(
    op: &ComplexMatrix,
    h0: &ComplexMatrix,
    t: f64,
) -> Result<ComplexMatrix> {
    let n = h0.require_square()?;
    if op.rows() != n || op.cols() != n {
        return Err(CoreError::DimensionMismatch(format!(
            "operator is {}x{}, H0 is {}x{}",
            op.rows(),
            op.cols(),
            n,
            n
        )));
    }
    let (vals, vecs) = h0.eigh()?;
    let phases = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, vals[i] * t)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let u = vecs.mul(&phases).mul(&vecs.dagger());
    Ok(u.mul(op).mul(&u.dagger()))
}

/// Frequently-used two-level operators, in the basis (|e>, |g>) = (0, 1).
pub mod two_level {
    use super::ComplexMatrix;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// σ_z = diag(1, −1): +1 on the excited state.
    pub fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]])
            .unwrap()
    }

    /// σ_x.
    pub fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]])
            .unwrap()
    }

    /// σ_y.
    pub fn sigma_y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]])
            .unwrap()
    }

    /// Raising operator σ₊ = |e><g|.
    pub fn sigma_plus() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]])
            .unwrap()
    }

    /// Lowering operator σ₋ = |g><e|.
    pub fn sigma_minus() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]])
            .unwrap()
    }

    /// Projector on the excited state.
    pub fn excited() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]])
            .unwrap()
    }

    /// Projector on the ground state.
    pub fn ground() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]])
            .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::two_level::*;
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let a = random_matrix(rng, n);
        a.add(&a.dagger()).scale(c(0.5, 0.0))
    }

    #[test]
    fn left_mul_identity_is_identity() {
        let l = left_mul_super(&ComplexMatrix::identity(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_matrix(&mut rng, 2);
        assert!(l.apply(&rho).unwrap().max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn left_mul_pauli_action() {
        // σ₋ |e><e| = |g><e|
        let l = left_mul_super(&sigma_minus()).unwrap();
        let out = l.apply(&excited()).unwrap();
        let mut expect = ComplexMatrix::zeros(2, 2);
        expect.set(1, 0, c(1.0, 0.0));
        assert!(out.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn left_mul_matches_direct_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix(&mut rng, 3);
        let rho = random_matrix(&mut rng, 3);
        let via_super = left_mul_super(&a).unwrap().apply(&rho).unwrap();
        assert!(via_super.max_abs_diff(&a.mul(&rho)) < 1e-13);
    }

    #[test]
    fn right_mul_identity_and_pauli() {
        let r = right_mul_super(&ComplexMatrix::identity(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_matrix(&mut rng, 2);
        assert!(r.apply(&rho).unwrap().max_abs_diff(&rho) < 1e-15);

        // |g><e| σ₊ = |g><g|
        let r = right_mul_super(&sigma_plus()).unwrap();
        let mut ket_ge = ComplexMatrix::zeros(2, 2);
        ket_ge.set(1, 0, c(1.0, 0.0));
        assert!(r.apply(&ket_ge).unwrap().max_abs_diff(&ground()) < 1e-15);
    }

    #[test]
    fn right_mul_matches_direct_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_matrix(&mut rng, 4);
        let rho = random_matrix(&mut rng, 4);
        let via_super = right_mul_super(&a).unwrap().apply(&rho).unwrap();
        assert!(via_super.max_abs_diff(&rho.mul(&a)) < 1e-13);
    }

    #[test]
    fn commutator_identity_is_zero() {
        let cm = commutator_super(&ComplexMatrix::identity(3)).unwrap();
        assert!(cm.matrix().max_abs() < 1e-15);
    }

    #[test]
    fn commutator_pauli_algebra() {
        // [σ_z, σ_x] = 2iσ_y
        let cm = commutator_super(&sigma_z()).unwrap();
        let out = cm.apply(&sigma_x()).unwrap();
        assert!(out.max_abs_diff(&sigma_y().scale(c(0.0, 2.0))) < 1e-15);
    }

    #[test]
    fn commutator_matches_direct_and_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(&mut rng, 3);
        let rho = random_matrix(&mut rng, 3);
        let direct = h.mul(&rho).sub(&rho.mul(&h));
        let cm = commutator_super(&h).unwrap();
        assert!(cm.apply(&rho).unwrap().max_abs_diff(&direct) < 1e-13);
        // commutator = left − right, exactly as matrices
        let lr = left_mul_super(&h).unwrap().sub(&right_mul_super(&h).unwrap());
        assert!(cm.matrix().max_abs_diff(lr.matrix()) == 0.0);
    }

    #[test]
    fn dissipator_zero_and_decay() {
        let d = dissipator_super(&ComplexMatrix::zeros(2, 2)).unwrap();
        assert!(d.matrix().max_abs() < 1e-15);

        // D[σ₋] |e><e| = 2|g><g| − 2|e><e|
        let d = dissipator_super(&sigma_minus()).unwrap();
        let out = d.apply(&excited()).unwrap();
        let expect = ground().scale(c(2.0, 0.0)).sub(&excited().scale(c(2.0, 0.0)));
        assert!(out.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn dissipator_matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let l = random_matrix(&mut rng, 3);
        let rho = random_matrix(&mut rng, 3);
        let ldag = l.dagger();
        let ldl = ldag.mul(&l);
        let direct = l
            .mul(&rho)
            .mul(&ldag)
            .scale(c(2.0, 0.0))
            .sub(&ldl.mul(&rho))
            .sub(&rho.mul(&ldl));
        let d = dissipator_super(&l).unwrap();
        assert!(d.apply(&rho).unwrap().max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn dissipator_preserves_hermiticity_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let l = random_matrix(&mut rng, 3);
            let rho = random_hermitian(&mut rng, 3);
            let out = dissipator_super(&l).unwrap().apply(&rho).unwrap();
            assert!(out.trace().norm() < 1e-12, "dissipator output must be traceless");
            assert!(out.hermiticity_defect() < 1e-12);
        }
    }

    #[test]
    fn interaction_picture_at_zero_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h0 = random_hermitian(&mut rng, 3);
        let op = random_matrix(&mut rng, 3);
        assert!(interaction_picture(&op, &h0, 0.0).unwrap().max_abs_diff(&op) < 1e-12);
    }

    #[test]
    fn interaction_picture_two_level_phase() {
        // e^{i ω/2 σ_z t} σ₋ e^{−i ω/2 σ_z t} = σ₋ e^{−iωt}
        let omega = 1.7;
        let t = 0.83;
        let h0 = sigma_z().scale(c(omega / 2.0, 0.0));
        let out = interaction_picture(&sigma_minus(), &h0, t).unwrap();
        let expect = sigma_minus().scale(Complex64::from_polar(1.0, -omega * t));
        assert!(out.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn interaction_picture_preserves_spectrum_and_hermiticity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h0 = random_hermitian(&mut rng, 4);
        let op = random_hermitian(&mut rng, 4);
        let out = interaction_picture(&op, &h0, 0.631).unwrap();
        assert!(out.hermiticity_defect() < 1e-11);
        let (mut e1, _) = op.eigh().unwrap();
        let (mut e2, _) = out.eigh().unwrap();
        e1.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e2.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in e1.iter().zip(&e2) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn interaction_picture_rejects_non_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let h0 = random_matrix(&mut rng, 3);
        let op = random_matrix(&mut rng, 3);
        assert!(matches!(
            interaction_picture(&op, &h0, 1.0),
            Err(CoreError::NotHermitian { .. })
        ));
    }

    #[test]
    fn left_right_actions_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=4 {
            let a = random_matrix(&mut rng, n);
            let b = random_matrix(&mut rng, n);
            let rho = random_matrix(&mut rng, n);
            let lr = left_mul_super(&a).unwrap().compose(&right_mul_super(&b).unwrap());
            let rl = right_mul_super(&b).unwrap().compose(&left_mul_super(&a).unwrap());
            let direct = a.mul(&rho).mul(&b);
            assert!(lr.apply(&rho).unwrap().max_abs_diff(&direct) < 1e-12);
            assert!(rl.apply(&rho).unwrap().max_abs_diff(&direct) < 1e-12);
        }
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 2..=6 {
            let h = random_hermitian(&mut rng, n);
            let (vals, vecs) = h.eigh().unwrap();
            // unitarity
            let vhv = vecs.dagger().mul(&vecs);
            assert!(vhv.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-12);
            // reconstruction
            let lambda = ComplexMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    c(vals[i], 0.0)
                } else {
                    c(0.0, 0.0)
                }
            });
            let rebuilt = vecs.mul(&lambda).mul(&vecs.dagger());
            assert!(rebuilt.max_abs_diff(&h) < 1e-12);
            // ascending order
            for w in vals.windows(2) {
                assert!(w[0] <= w[1] + 1e-14);
            }
        }
    }

    #[test]
    fn expm_matches_diagonalization_for_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = random_hermitian(&mut rng, 4);
        let (vals, vecs) = h.eigh().unwrap();
        let exp_diag = ComplexMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                c(vals[i].exp(), 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let via_eigh = vecs.mul(&exp_diag).mul(&vecs.dagger());
        assert!(h.expm().unwrap().max_abs_diff(&via_eigh) < 1e-11);
    }

    #[test]
    fn vectorize_roundtrip_and_convention() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(3.0, 0.0), c(4.0, 0.0)],
        ])
        .unwrap();
        let v = m.vectorize();
        // column stacking: (1,3,2,4)
        assert_eq!(v, vec![c(1.0, 0.0), c(3.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        assert_eq!(ComplexMatrix::unvectorize(&v, 2).unwrap(), m);
    }

    #[test]
    fn superoperator_rejects_non_square() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(left_mul_super(&rect), Err(CoreError::NotSquare { .. })));
        assert!(matches!(right_mul_super(&rect), Err(CoreError::NotSquare { .. })));
        assert!(matches!(commutator_super(&rect), Err(CoreError::NotSquare { .. })));
        assert!(matches!(dissipator_super(&rect), Err(CoreError::NotSquare { .. })));
    }
}
