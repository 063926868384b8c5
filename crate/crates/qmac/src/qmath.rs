//! Dense complex linear algebra and quantum-state primitives.
//!
//! Everything downstream (channels, entropies, typical subspaces, decoders)
//! is built on the operations in this module: Kronecker products with a fixed
//! index convention, partial traces over declared subsystem factorizations,
//! Hermitian eigendecomposition with a deterministic ordering and phase
//! convention, purification, and trace distance.
//!
//! Index convention, fixed globally: for `tensor(a, b)` the composite index is
//! `i_left * dim_right + i_right`, i.e. the left factor is most significant.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance for Hermiticity and PSD checks on density operators.
pub const HERM_TOL: f64 = 1e-9;
/// Eigenvalues below this threshold are treated as exact zeros in entropies
/// and pseudo-inverses.
pub const EIG_CLAMP: f64 = 1e-12;
/// Hard cap on the dimension of any operator (2^20 basis states).
pub const DIM_CAP: usize = 1 << 20;

pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

// ---------------------------------------------------------------------------
// Elementary matrix helpers
// ---------------------------------------------------------------------------

/// Largest absolute entry of `m`.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise deviation between two matrices.
pub fn max_entry_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_entry_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Deviation of `m` from its own adjoint (0 for exactly Hermitian matrices).
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_entry_diff(m, &m.adjoint())
}

/// `Tr(a b)` in O(n²) without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `(I_{left} ⊗ A) M (I_{left} ⊗ A)†` computed blockwise, avoiding the full
/// Kronecker lift: each `right × right` block `M_ij` maps to `A M_ij A†`.
pub fn conjugate_second_factor(m: &CMatrix, left: usize, a: &CMatrix) -> CMatrix {
    let right = a.nrows();
    debug_assert_eq!(a.ncols(), right);
    debug_assert_eq!(m.nrows(), left * right);
    debug_assert_eq!(m.ncols(), left * right);
    let adj = a.adjoint();
    let mut out = CMatrix::zeros(left * right, left * right);
    let mut block = CMatrix::zeros(right, right);
    for bi in 0..left {
        for bj in 0..left {
            for r in 0..right {
                for c in 0..right {
                    block[(r, c)] = m[(bi * right + r, bj * right + c)];
                }
            }
            let conj = a * &block * &adj;
            for r in 0..right {
                for c in 0..right {
                    out[(bi * right + r, bj * right + c)] = conj[(r, c)];
                }
            }
        }
    }
    out
}

/// `|x⟩⟨x|` on a `dim`-dimensional space.
pub fn basis_projector(dim: usize, x: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(x, x)] = ONE;
    m
}

/// Computational basis vector `|x⟩`.
pub fn basis_vector(dim: usize, x: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[x] = ONE;
    v
}

/// Kronecker product with the global index convention (left factor most
/// significant). Fails with `DimensionCap` when the composite dimension
/// exceeds `DIM_CAP`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let rows = a.nrows().saturating_mul(b.nrows());
    let cols = a.ncols().saturating_mul(b.ncols());
    if rows > DIM_CAP || cols > DIM_CAP {
        return Err(Error::DimensionCap {
            got: rows.max(cols),
            cap: DIM_CAP,
        });
    }
    Ok(a.kronecker(b))
}

/// Kronecker product of a list of factors, left to right.
pub fn tensor_all(factors: &[&CMatrix]) -> Result<CMatrix> {
    let mut iter = factors.iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::FactorError("tensor_all of empty list".into()))?;
    let mut acc = (*first).clone();
    for f in iter {
        acc = tensor(&acc, f)?;
    }
    Ok(acc)
}

/// `n`-fold Kronecker power.
pub fn tensor_power(m: &CMatrix, n: usize) -> Result<CMatrix> {
    if n == 0 {
        return Ok(CMatrix::identity(1, 1));
    }
    let mut acc = m.clone();
    for _ in 1..n {
        acc = tensor(&acc, m)?;
    }
    Ok(acc)
}

/// Kronecker product of vectors.
pub fn tensor_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Mixed-radix index arithmetic over subsystem factorizations
// ---------------------------------------------------------------------------

/// Decompose a flat index into per-subsystem digits (most significant first).
pub fn split_index(idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    let mut rest = idx;
    for k in (0..dims.len()).rev() {
        digits[k] = rest % dims[k];
        rest /= dims[k];
    }
    digits
}

/// Recompose per-subsystem digits into a flat index.
pub fn join_index(digits: &[usize], dims: &[usize]) -> usize {
    let mut idx = 0;
    for (d, dim) in digits.iter().zip(dims.iter()) {
        idx = idx * dim + d;
    }
    idx
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition
// ---------------------------------------------------------------------------

/// Result of [`eig_hermitian`]: eigenvalues sorted descending with matching
/// eigenvector columns, phases fixed so the first non-negligible component of
/// each eigenvector is positive real.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// Reconstruct `V diag(λ) V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::from_diagonal(&CVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&x| cr(x)),
        ));
        &self.vectors * d * self.vectors.adjoint()
    }
}

fn is_diagonal(m: &CMatrix, tol: f64) -> bool {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j && m[(i, j)].norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrized as `(m + m†)/2` before decomposition; inputs more
/// than [`HERM_TOL`] away from Hermitian are rejected. Eigenvalues come back
/// sorted descending; ties keep the pre-sort column order, so the
/// decomposition is reproducible across runs. Exactly diagonal matrices skip
/// the iterative solver and return the standard basis.
pub fn eig_hermitian(m: &CMatrix) -> Result<HermitianEigen> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(m.nrows(), m.ncols()));
    }
    let defect = hermiticity_defect(m);
    if defect > HERM_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let h = (m + m.adjoint()).scale(0.5);
    let n = h.nrows();

    let (raw_values, raw_vectors) = if is_diagonal(&h, 0.0) {
        let vals: Vec<f64> = (0..n).map(|i| h[(i, i)].re).collect();
        (vals, CMatrix::identity(n, n))
    } else {
        let eig = h.symmetric_eigen();
        (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        raw_values[j]
            .partial_cmp(&raw_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });

    let mut values = Vec::with_capacity(n);
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(raw_values[src]);
        let col = raw_vectors.column(src);
        // fix the global phase: first component above threshold becomes
        // positive real
        let phase = col
            .iter()
            .find(|z| z.norm() > 1e-12)
            .map(|z| z.conj() / z.norm())
            .unwrap_or(ONE);
        for r in 0..n {
            vectors[(r, dst)] = col[r] * phase;
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// `f(m)` for Hermitian `m` via the spectral decomposition.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    let eig = eig_hermitian(m)?;
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        eig.values.len(),
        eig.values.iter().map(|&x| cr(f(x))),
    ));
    Ok(&eig.vectors * d * eig.vectors.adjoint())
}

/// Pseudo-inverse square root on the support: eigenvalues below `threshold`
/// map to 0, the rest to `λ^{-1/2}`.
pub fn inv_sqrt_on_support(m: &CMatrix, threshold: f64) -> Result<CMatrix> {
    hermitian_function(m, |x| if x > threshold { 1.0 / x.sqrt() } else { 0.0 })
}

// ---------------------------------------------------------------------------
// Density operators
// ---------------------------------------------------------------------------

/// Hermitian, PSD, trace-one operator with a declared subsystem
/// factorization.
///
/// Construction through [`DensityOperator::new`] validates the invariants:
/// Hermiticity and unit trace within 1e-9, and positive semidefiniteness with
/// eigenvalues in `[-1e-9, 0)` clipped to zero (the state is then
/// renormalized and flagged as repaired).
#[derive(Debug, Clone)]
pub struct DensityOperator {
    dim: usize,
    mat: CMatrix,
    subsystem_dims: Vec<usize>,
    repaired: bool,
}

impl DensityOperator {
    pub fn new(mat: CMatrix, subsystem_dims: Vec<usize>) -> Result<Self> {
        let dim = mat.nrows();
        if mat.ncols() != dim {
            return Err(Error::DimensionMismatch(dim, mat.ncols()));
        }
        check_factorization(dim, &subsystem_dims)?;
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let defect = hermiticity_defect(&mat);
        if defect > HERM_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = mat.diagonal().iter().map(|z| z.re).sum::<f64>();
        if (tr - 1.0).abs() > HERM_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let herm = (&mat + mat.adjoint()).scale(0.5);
        let eig = eig_hermitian(&herm)?;
        let min_eig = eig.values.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -HERM_TOL {
            return Err(Error::InvalidState(format!(
                "not PSD: min eigenvalue {min_eig:.3e}"
            )));
        }
        if min_eig < 0.0 {
            // clip the slightly negative tail and renormalize
            let clipped: Vec<f64> = eig.values.iter().map(|&x| x.max(0.0)).collect();
            let total: f64 = clipped.iter().sum();
            let d = CMatrix::from_diagonal(&CVector::from_iterator(
                clipped.len(),
                clipped.iter().map(|&x| cr(x / total)),
            ));
            let mat = &eig.vectors * d * eig.vectors.adjoint();
            return Ok(Self {
                dim,
                mat,
                subsystem_dims,
                repaired: true,
            });
        }
        Ok(Self {
            dim,
            mat: herm.scale(1.0 / tr),
            subsystem_dims,
            repaired: false,
        })
    }

    /// Construct without the PSD eigendecomposition check. For operators that
    /// are valid by construction (partial traces, unitary conjugations of
    /// valid states); still hermitizes and renormalizes the trace.
    pub fn new_unchecked(mat: CMatrix, subsystem_dims: Vec<usize>) -> Self {
        let dim = mat.nrows();
        debug_assert_eq!(dim, mat.ncols());
        debug_assert_eq!(subsystem_dims.iter().product::<usize>(), dim);
        let herm = (&mat + mat.adjoint()).scale(0.5);
        let tr = herm.diagonal().iter().map(|z| z.re).sum::<f64>();
        Self {
            dim,
            mat: herm.scale(1.0 / tr),
            subsystem_dims,
            repaired: false,
        }
    }

    /// Maximally mixed state π = I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            dim,
            mat: CMatrix::identity(dim, dim).scale(1.0 / dim as f64),
            subsystem_dims: vec![dim],
            repaired: false,
        }
    }

    /// Diagonal state from a probability vector.
    pub fn from_probabilities(probs: &[f64]) -> Result<Self> {
        validate_distribution(probs)?;
        let dim = probs.len();
        let mat = CMatrix::from_diagonal(&CVector::from_iterator(
            dim,
            probs.iter().map(|&p| cr(p)),
        ));
        Ok(Self {
            dim,
            mat,
            subsystem_dims: vec![dim],
            repaired: false,
        })
    }

    /// Pure computational-basis state |x⟩⟨x|.
    pub fn basis_state(dim: usize, x: usize) -> Self {
        Self {
            dim,
            mat: basis_projector(dim, x),
            subsystem_dims: vec![dim],
            repaired: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        &self.subsystem_dims
    }

    /// True when construction had to clip a slightly negative eigenvalue.
    pub fn repaired(&self) -> bool {
        self.repaired
    }

    /// Same operator with a different declared factorization.
    pub fn with_subsystems(mut self, dims: Vec<usize>) -> Result<Self> {
        check_factorization(self.dim, &dims)?;
        self.subsystem_dims = dims;
        Ok(self)
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    /// Tensor product of two states; subsystem lists concatenate.
    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        let mat = tensor(&self.mat, &other.mat)?;
        let mut dims = self.subsystem_dims.clone();
        dims.extend_from_slice(&other.subsystem_dims);
        Ok(DensityOperator {
            dim: mat.nrows(),
            mat,
            subsystem_dims: dims,
            repaired: false,
        })
    }

    /// Reduced state on the subsystems in `keep` (indices into the declared
    /// factorization, in their original relative order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        let dims = &self.subsystem_dims;
        let m = dims.len();
        let mut keep_sorted: Vec<usize> = keep.to_vec();
        keep_sorted.sort_unstable();
        keep_sorted.dedup();
        if keep_sorted.len() != keep.len() {
            return Err(Error::FactorError("duplicate subsystem in keep".into()));
        }
        if keep_sorted.iter().any(|&k| k >= m) {
            return Err(Error::FactorError(format!(
                "keep index out of range (have {m} subsystems)"
            )));
        }
        if keep_sorted.is_empty() {
            return Err(Error::FactorError("keep set must be non-empty".into()));
        }
        let traced: Vec<usize> = (0..m).filter(|k| !keep_sorted.contains(k)).collect();
        let kept_dims: Vec<usize> = keep_sorted.iter().map(|&k| dims[k]).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
        let out_dim: usize = kept_dims.iter().product();
        let tr_dim: usize = traced_dims.iter().product();

        let mut out = CMatrix::zeros(out_dim, out_dim);
        let mut digits = vec![0usize; m];
        for ro in 0..out_dim {
            let rk = split_index(ro, &kept_dims);
            for co in 0..out_dim {
                let ck = split_index(co, &kept_dims);
                let mut acc = ZERO;
                for t in 0..tr_dim {
                    let td = split_index(t, &traced_dims);
                    for (pos, &k) in keep_sorted.iter().enumerate() {
                        digits[k] = rk[pos];
                    }
                    for (pos, &k) in traced.iter().enumerate() {
                        digits[k] = td[pos];
                    }
                    let ri = join_index(&digits, dims);
                    for (pos, &k) in keep_sorted.iter().enumerate() {
                        digits[k] = ck[pos];
                    }
                    let ci = join_index(&digits, dims);
                    acc += self.mat[(ri, ci)];
                }
                out[(ro, co)] = acc;
            }
        }
        Ok(DensityOperator {
            dim: out_dim,
            mat: out,
            subsystem_dims: kept_dims,
            repaired: false,
        })
    }

    /// Reorder the declared subsystems: output subsystem `k` is input
    /// subsystem `perm[k]`.
    pub fn permute_subsystems(&self, perm: &[usize]) -> Result<DensityOperator> {
        let dims = &self.subsystem_dims;
        let out_dims: Vec<usize> = permute_dims(dims, perm)?;
        let mat = permute_matrix_subsystems(&self.mat, dims, perm)?;
        Ok(DensityOperator {
            dim: self.dim,
            mat,
            subsystem_dims: out_dims,
            repaired: false,
        })
    }

    /// Spectral purification on A ⊗ R with `dim_R = dim_A`:
    /// `|ψ⟩ = Σ_i √λ_i |v_i⟩|i⟩` with eigenvalues sorted descending and the
    /// qmath phase convention, so the construction is reproducible.
    pub fn purify(&self) -> PureState {
        let eig = eig_hermitian(&self.mat).expect("density operator is Hermitian");
        let d = self.dim;
        let mut amp = CVector::zeros(d * d);
        for (i, &lam) in eig.values.iter().enumerate() {
            if lam <= 0.0 {
                continue;
            }
            let s = lam.sqrt();
            for a in 0..d {
                amp[a * d + i] += eig.vectors[(a, i)] * cr(s);
            }
        }
        PureState::new_unchecked(amp, vec![d, d])
    }

    /// Eigenvalues sorted descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_hermitian(&self.mat)
            .expect("density operator is Hermitian")
            .values
    }
}

fn check_factorization(dim: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.iter().product::<usize>() != dim {
        return Err(Error::FactorError(format!(
            "subsystem dims {dims:?} do not factor dimension {dim}"
        )));
    }
    Ok(())
}

fn check_permutation(perm: &[usize], len: usize) -> Result<()> {
    let mut seen = vec![false; len];
    if perm.len() != len {
        return Err(Error::FactorError("permutation length mismatch".into()));
    }
    for &p in perm {
        if p >= len || seen[p] {
            return Err(Error::FactorError("invalid permutation".into()));
        }
        seen[p] = true;
    }
    Ok(())
}

fn invert_digits(out_digits: &[usize], perm: &[usize], len: usize) -> Vec<usize> {
    let mut src = vec![0usize; len];
    for (k, &p) in perm.iter().enumerate() {
        src[p] = out_digits[k];
    }
    src
}

fn permute_dims(dims: &[usize], perm: &[usize]) -> Result<Vec<usize>> {
    check_permutation(perm, dims.len())?;
    Ok(perm.iter().map(|&p| dims[p]).collect())
}

/// Reorder the tensor factors of an operator on `⊗_k dims[k]`: output factor
/// `k` is input factor `perm[k]`.
pub fn permute_matrix_subsystems(m: &CMatrix, dims: &[usize], perm: &[usize]) -> Result<CMatrix> {
    let out_dims = permute_dims(dims, perm)?;
    let dim: usize = dims.iter().product();
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch(m.nrows(), dim));
    }
    // flat index map: out index -> source index
    let map: Vec<usize> = (0..dim)
        .map(|i| {
            let digits = split_index(i, &out_dims);
            join_index(&invert_digits(&digits, perm, dims.len()), dims)
        })
        .collect();
    let mut out = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            out[(i, j)] = m[(map[i], map[j])];
        }
    }
    Ok(out)
}

/// Validate a probability vector: non-negative entries summing to 1 within
/// 1e-12.
pub fn validate_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::BadDistribution("empty".into()));
    }
    if p.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::BadDistribution(format!("negative entry in {p:?}")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::BadDistribution(format!("sum {s} is not 1")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Pure states
// ---------------------------------------------------------------------------

/// Unit vector with a declared subsystem factorization.
#[derive(Debug, Clone)]
pub struct PureState {
    dim: usize,
    amplitudes: CVector,
    subsystem_dims: Vec<usize>,
}

impl PureState {
    pub fn new(amplitudes: CVector, subsystem_dims: Vec<usize>) -> Result<Self> {
        let dim = amplitudes.len();
        check_factorization(dim, &subsystem_dims)?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("2-norm {norm} is not 1")));
        }
        Ok(Self {
            dim,
            amplitudes: amplitudes.scale(1.0 / norm),
            subsystem_dims,
        })
    }

    pub fn new_unchecked(amplitudes: CVector, subsystem_dims: Vec<usize>) -> Self {
        let dim = amplitudes.len();
        let norm = amplitudes.norm();
        Self {
            dim,
            amplitudes: amplitudes.scale(1.0 / norm),
            subsystem_dims,
        }
    }

    /// Computational basis state |x⟩.
    pub fn basis(dim: usize, x: usize) -> Self {
        Self {
            dim,
            amplitudes: basis_vector(dim, x),
            subsystem_dims: vec![dim],
        }
    }

    /// Maximally entangled |Φ⟩ = d^{-1/2} Σ_i |i⟩|i⟩ on a pair of
    /// `d`-dimensional systems.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut amp = CVector::zeros(d * d);
        let s = cr(1.0 / (d as f64).sqrt());
        for i in 0..d {
            amp[i * d + i] = s;
        }
        Self {
            dim: d * d,
            amplitudes: amp,
            subsystem_dims: vec![d, d],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        &self.subsystem_dims
    }

    pub fn with_subsystems(mut self, dims: Vec<usize>) -> Result<Self> {
        check_factorization(self.dim, &dims)?;
        self.subsystem_dims = dims;
        Ok(self)
    }

    /// |ψ⟩⟨ψ| as a density operator.
    pub fn to_density(&self) -> DensityOperator {
        let mat = &self.amplitudes * self.amplitudes.adjoint();
        DensityOperator {
            dim: self.dim,
            mat,
            subsystem_dims: self.subsystem_dims.clone(),
            repaired: false,
        }
    }

    /// Tensor product of pure states.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let amp = tensor_vec(&self.amplitudes, &other.amplitudes);
        let mut dims = self.subsystem_dims.clone();
        dims.extend_from_slice(&other.subsystem_dims);
        PureState {
            dim: amp.len(),
            amplitudes: amp,
            subsystem_dims: dims,
        }
    }

    /// Reorder the declared subsystems (same convention as
    /// [`DensityOperator::permute_subsystems`]).
    pub fn permute_subsystems(&self, perm: &[usize]) -> Result<PureState> {
        let dims = &self.subsystem_dims;
        check_permutation(perm, dims.len())?;
        let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
        let mut amp = CVector::zeros(self.dim);
        for i in 0..self.dim {
            let di = split_index(i, &out_dims);
            let src = invert_digits(&di, perm, dims.len());
            amp[i] = self.amplitudes[join_index(&src, dims)];
        }
        Ok(PureState {
            dim: self.dim,
            amplitudes: amp,
            subsystem_dims: out_dims,
        })
    }

    /// Overlap ⟨self|other⟩.
    pub fn overlap(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Apply a matrix to the full state vector.
    pub fn apply(&self, m: &CMatrix, out_dims: Vec<usize>) -> PureState {
        PureState::new_unchecked(m * &self.amplitudes, out_dims)
    }

    /// Trace distance between two pure states, `2√(1-|⟨ζ|ψ⟩|²)`.
    pub fn trace_distance_pure(&self, other: &PureState) -> f64 {
        let ov = self.overlap(other).norm();
        2.0 * (1.0 - (ov * ov).min(1.0)).max(0.0).sqrt()
    }
}

/// Trace distance `‖a-b‖₁ = Σ |eig(a-b)|`, in [0, 2].
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    trace_norm(&(a.matrix() - b.matrix()))
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    let eig = eig_hermitian(m)?;
    Ok(eig.values.iter().map(|x| x.abs()).sum())
}

// ---------------------------------------------------------------------------
// Random sampling (Ginibre states, Haar-like unitaries)
// ---------------------------------------------------------------------------

/// Ginibre matrix: i.i.d. standard complex Gaussian entries.
pub fn ginibre_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Full-rank random mixed state `G G† / Tr(G G†)`.
pub fn ginibre_state<R: Rng>(dim: usize, rng: &mut R) -> DensityOperator {
    let g = ginibre_matrix(dim, dim, rng);
    let m = &g * g.adjoint();
    DensityOperator::new_unchecked(m, vec![dim])
}

/// Haar-like random unitary via QR of a Ginibre matrix with the standard
/// phase correction.
pub fn haar_unitary<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let g = ginibre_matrix(dim, dim, rng);
    let qr = g.qr();
    let r_diag: Vec<Complex64> = (0..dim).map(|i| qr.r()[(i, i)]).collect();
    let q = qr.q();
    let mut u = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        let d = r_diag[j];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            u[(i, j)] = q[(i, j)] * phase;
        }
    }
    u
}

/// Random pure state with Gaussian amplitudes (Haar distributed).
pub fn random_pure_state<R: Rng>(subsystem_dims: &[usize], rng: &mut R) -> PureState {
    let dim: usize = subsystem_dims.iter().product();
    let amp = CVector::from_fn(dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    PureState::new_unchecked(amp, subsystem_dims.to_vec())
}
