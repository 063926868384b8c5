//! CPTP maps as Kraus lists, Stinespring dilations and complementary
//! channels, plus constructors for the channel zoo used throughout: the
//! generalized Pauli set, the completely dephasing channel Δ, the collective
//! phase-flip channel M_p, cq channels, and tensor powers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{
    basis_projector, c, eig_hermitian, max_entry_diff, tensor, trace_distance, CMatrix,
    DensityOperator, PureState, DIM_CAP, HERM_TOL, ONE,
};

/// Completely positive trace-preserving map as a Kraus list.
///
/// The completeness relation `Σ K†K = I` is checked to 1e-9 on construction.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::BadOperands("empty Kraus list".into()));
        }
        let dim_out = kraus[0].nrows();
        let dim_in = kraus[0].ncols();
        for k in &kraus {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(Error::DimensionMismatch(k.nrows(), dim_out));
            }
        }
        let mut sum = CMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let defect = max_entry_diff(&sum, &CMatrix::identity(dim_in, dim_in));
        if defect > HERM_TOL {
            return Err(Error::BadOperands(format!(
                "Kraus completeness defect {defect:.3e}"
            )));
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Identity channel on a `d`-dimensional system.
    pub fn identity(d: usize) -> Self {
        Self {
            dim_in: d,
            dim_out: d,
            kraus: vec![CMatrix::identity(d, d)],
        }
    }

    /// Apply the channel: `ρ ↦ Σ K ρ K†`.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch(rho.dim(), self.dim_in));
        }
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * rho.matrix() * k.adjoint();
        }
        Ok(DensityOperator::new_unchecked(out, vec![self.dim_out]))
    }

    /// Apply to a raw matrix (no state validation); used for map-level
    /// equality checks.
    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        out
    }

    /// Choi state `(N ⊗ I)(Φ)` with Φ maximally entangled on in ⊗ in.
    pub fn choi(&self) -> Result<DensityOperator> {
        let phi = PureState::maximally_entangled(self.dim_in).to_density();
        apply_to_subsystems(self, &phi, &[0])
    }

    /// Compose `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        if other.dim_out != self.dim_in {
            return Err(Error::DimensionMismatch(other.dim_out, self.dim_in));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(a * b);
            }
        }
        QuantumChannel::new(kraus)
    }
}

/// Isometry `V: A → B ⊗ E` with `V†V = I`; the environment is the least
/// significant tensor factor of the output.
#[derive(Debug, Clone)]
pub struct Isometry {
    dim_in: usize,
    dim_out: usize,
    env_dim: usize,
    matrix: CMatrix,
}

impl Isometry {
    pub fn new(matrix: CMatrix, env_dim: usize) -> Result<Self> {
        let dim_out = matrix.nrows();
        let dim_in = matrix.ncols();
        if !dim_out.is_multiple_of(env_dim) {
            return Err(Error::FactorError(format!(
                "environment dim {env_dim} does not divide output dim {dim_out}"
            )));
        }
        let defect = max_entry_diff(
            &(matrix.adjoint() * &matrix),
            &CMatrix::identity(dim_in, dim_in),
        );
        if defect > HERM_TOL {
            return Err(Error::BadOperands(format!(
                "isometry defect {defect:.3e}"
            )));
        }
        Ok(Self {
            dim_in,
            dim_out,
            env_dim,
            matrix,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    /// Total output dimension `dim_B · dim_E`.
    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    /// Output dimension of the B factor.
    pub fn dim_b(&self) -> usize {
        self.dim_out / self.env_dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `V ρ V†` with output factorization `[dim_B, dim_E]`.
    pub fn conjugate(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch(rho.dim(), self.dim_in));
        }
        let m = &self.matrix * rho.matrix() * self.matrix.adjoint();
        Ok(DensityOperator::new_unchecked(
            m,
            vec![self.dim_b(), self.env_dim],
        ))
    }
}

/// Stinespring dilation `V = Σ_k K_k ⊗ |k⟩^E`, one environment basis state
/// per Kraus operator.
pub fn stinespring_dilation(ch: &QuantumChannel) -> Isometry {
    let env = ch.kraus.len();
    let mut v = CMatrix::zeros(ch.dim_out * env, ch.dim_in);
    for (k, kr) in ch.kraus.iter().enumerate() {
        for b in 0..ch.dim_out {
            for i in 0..ch.dim_in {
                v[(b * env + k, i)] = kr[(b, i)];
            }
        }
    }
    Isometry::new(v, env).expect("dilation of a valid channel is an isometry")
}

/// Complementary channel `N^c(ρ) = Tr_B V ρ V†` as a Kraus list on the
/// environment.
pub fn complementary_channel(ch: &QuantumChannel) -> QuantumChannel {
    let env = ch.kraus.len();
    let mut kraus = Vec::with_capacity(ch.dim_out);
    for b in 0..ch.dim_out {
        let mut f = CMatrix::zeros(env, ch.dim_in);
        for (k, kr) in ch.kraus.iter().enumerate() {
            for i in 0..ch.dim_in {
                f[(k, i)] = kr[(b, i)];
            }
        }
        kraus.push(f);
    }
    QuantumChannel::new(kraus).expect("complementary Kraus list of a valid channel is complete")
}

/// The d² generalized Pauli matrices `U_{l·d+k} = Ẑ(l) X̂(k)` with
/// `X̂(k) = Σ_s |s⟩⟨s+k|` and `Ẑ(l) = Σ_s e^{i2πsl/d} |s⟩⟨s|`.
pub fn make_generalized_pauli(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d);
    for l in 0..d {
        let z = pauli_z_power(d, l);
        for k in 0..d {
            out.push(&z * pauli_x_power(d, k));
        }
    }
    out
}

/// `X̂_d(k) = Σ_s |s⟩⟨s+k mod d|`.
pub fn pauli_x_power(d: usize, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for s in 0..d {
        m[(s, (s + k) % d)] = ONE;
    }
    m
}

/// `Ẑ_d(l) = Σ_s e^{i2πsl/d} |s⟩⟨s|`.
pub fn pauli_z_power(d: usize, l: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for s in 0..d {
        let phase = 2.0 * std::f64::consts::PI * (s * l) as f64 / d as f64;
        m[(s, s)] = c(phase.cos(), phase.sin());
    }
    m
}

/// Collective phase-flip channel
/// `M_p(ρ) = Σ_k p_k (Ẑ(k)⊗Ẑ(k)) ρ (Ẑ(k)⊗Ẑ(k))†` on a pair of
/// `d`-dimensional inputs. Zero-probability terms keep their Kraus operators
/// omitted so the dilation stays minimal.
pub fn make_collective_phase_flip(d: usize, p: &[f64]) -> Result<QuantumChannel> {
    if p.len() != d {
        return Err(Error::BadDistribution(format!(
            "expected {d} probabilities, got {}",
            p.len()
        )));
    }
    crate::qmath::validate_distribution(p)?;
    let mut kraus = Vec::new();
    for (k, &pk) in p.iter().enumerate() {
        if pk == 0.0 {
            continue;
        }
        let z = pauli_z_power(d, k);
        kraus.push(tensor(&z, &z)?.scale(pk.sqrt()));
    }
    QuantumChannel::new(kraus)
}

/// Completely dephasing channel `Δ: ρ ↦ Σ_x |x⟩⟨x| ρ |x⟩⟨x|`.
pub fn make_completely_dephasing(d: usize) -> QuantumChannel {
    let kraus: Vec<CMatrix> = (0..d).map(|x| basis_projector(d, x)).collect();
    QuantumChannel::new(kraus).expect("dephasing Kraus list is complete")
}

/// Completely depolarizing channel `ρ ↦ π`.
pub fn make_completely_depolarizing(d: usize) -> QuantumChannel {
    let s = 1.0 / (d as f64).sqrt();
    let mut kraus = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let mut m = CMatrix::zeros(d, d);
            m[(i, j)] = ONE;
            kraus.push(m.scale(s));
        }
    }
    QuantumChannel::new(kraus).expect("depolarizing Kraus list is complete")
}

/// `n`-fold tensor power: the Kraus list is every `n`-fold Kronecker product
/// of factor Kraus operators.
pub fn tensor_power_channel(ch: &QuantumChannel, n: usize) -> Result<QuantumChannel> {
    if n == 0 {
        return Err(Error::BadOperands("tensor power with n = 0".into()));
    }
    let din = ch
        .dim_in
        .checked_pow(n as u32)
        .filter(|&x| x <= DIM_CAP)
        .ok_or(Error::DimensionCap {
            got: usize::MAX,
            cap: DIM_CAP,
        })?;
    let dout = ch
        .dim_out
        .checked_pow(n as u32)
        .filter(|&x| x <= DIM_CAP)
        .ok_or(Error::DimensionCap {
            got: usize::MAX,
            cap: DIM_CAP,
        })?;
    let _ = (din, dout);
    let mut kraus: Vec<CMatrix> = ch.kraus.clone();
    for _ in 1..n {
        let mut next = Vec::with_capacity(kraus.len() * ch.kraus.len());
        for a in &kraus {
            for b in &ch.kraus {
                next.push(tensor(a, b)?);
            }
        }
        kraus = next;
    }
    QuantumChannel::new(kraus)
}

/// Apply a channel to a subset of a state's subsystems (identity elsewhere).
/// `targets` must be contiguous and in order; the channel input dimension
/// must match the product of the target dims. The channel output replaces the
/// target slots with a single subsystem of `dim_out`.
pub fn apply_to_subsystems(
    ch: &QuantumChannel,
    rho: &DensityOperator,
    targets: &[usize],
) -> Result<DensityOperator> {
    let dims = rho.subsystem_dims().to_vec();
    if targets.is_empty() {
        return Err(Error::FactorError("no target subsystems".into()));
    }
    for w in targets.windows(2) {
        if w[1] != w[0] + 1 {
            return Err(Error::FactorError(
                "target subsystems must be contiguous".into(),
            ));
        }
    }
    let t0 = targets[0];
    let t1 = *targets.last().unwrap();
    if t1 >= dims.len() {
        return Err(Error::FactorError("target out of range".into()));
    }
    let target_dim: usize = dims[t0..=t1].iter().product();
    if target_dim != ch.dim_in {
        return Err(Error::DimensionMismatch(target_dim, ch.dim_in));
    }
    let left: usize = dims[..t0].iter().product();
    let right: usize = dims[t1 + 1..].iter().product();
    let il = CMatrix::identity(left, left);
    let ir = CMatrix::identity(right, right);

    let mut out = CMatrix::zeros(
        left * ch.dim_out * right,
        left * ch.dim_out * right,
    );
    for k in &ch.kraus {
        let lifted = tensor(&tensor(&il, k)?, &ir)?;
        out += &lifted * rho.matrix() * lifted.adjoint();
    }
    let mut out_dims: Vec<usize> = dims[..t0].to_vec();
    out_dims.push(ch.dim_out);
    out_dims.extend_from_slice(&dims[t1 + 1..]);
    Ok(DensityOperator::new_unchecked(out, out_dims))
}

/// Trace distance between the Choi states of two channels; Kraus
/// representations are non-unique, so this is the channel equality test.
pub fn choi_distance(a: &QuantumChannel, b: &QuantumChannel) -> Result<f64> {
    if a.dim_in != b.dim_in || a.dim_out != b.dim_out {
        return Err(Error::DimensionMismatch(a.dim_in, b.dim_in));
    }
    trace_distance(&a.choi()?, &b.choi()?)
}

/// Random channel from a Haar-random isometry with the given environment
/// dimension.
pub fn random_channel<R: rand::Rng>(
    dim_in: usize,
    dim_out: usize,
    env_dim: usize,
    rng: &mut R,
) -> Result<QuantumChannel> {
    if dim_out * env_dim < dim_in {
        return Err(Error::BadOperands(
            "output ⊗ environment smaller than input".into(),
        ));
    }
    let u = crate::qmath::haar_unitary(dim_out * env_dim, rng);
    let mut kraus = Vec::with_capacity(env_dim);
    for k in 0..env_dim {
        let mut m = CMatrix::zeros(dim_out, dim_in);
        for b in 0..dim_out {
            for i in 0..dim_in {
                m[(b, i)] = u[(b * env_dim + k, i)];
            }
        }
        kraus.push(m);
    }
    QuantumChannel::new(kraus)
}

// ---------------------------------------------------------------------------
// Channel spec files
// ---------------------------------------------------------------------------

/// On-disk channel description; complex entries are `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelSpecFile {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

impl ChannelSpecFile {
    pub fn from_channel(ch: &QuantumChannel) -> Self {
        let kraus = ch
            .kraus
            .iter()
            .map(|k| {
                (0..k.nrows())
                    .map(|i| (0..k.ncols()).map(|j| [k[(i, j)].re, k[(i, j)].im]).collect())
                    .collect()
            })
            .collect();
        Self {
            dim_in: ch.dim_in,
            dim_out: ch.dim_out,
            kraus,
        }
    }

    pub fn to_channel(&self) -> Result<QuantumChannel> {
        let mut kraus = Vec::with_capacity(self.kraus.len());
        for rows in &self.kraus {
            if rows.len() != self.dim_out {
                return Err(Error::Input(format!(
                    "Kraus operator has {} rows, expected {}",
                    rows.len(),
                    self.dim_out
                )));
            }
            let mut m = CMatrix::zeros(self.dim_out, self.dim_in);
            for (i, row) in rows.iter().enumerate() {
                if row.len() != self.dim_in {
                    return Err(Error::Input(format!(
                        "Kraus operator row has {} cols, expected {}",
                        row.len(),
                        self.dim_in
                    )));
                }
                for (j, &[re, im]) in row.iter().enumerate() {
                    m[(i, j)] = Complex64::new(re, im);
                }
            }
            kraus.push(m);
        }
        QuantumChannel::new(kraus)
    }
}

/// True when `N(|i⟩⟨i|) = |i⟩⟨i|` for every computational basis state, the
/// generalized-dephasing fixed-point property.
pub fn is_generalized_dephasing(ch: &QuantumChannel, tol: f64) -> bool {
    if ch.dim_in != ch.dim_out {
        return false;
    }
    for i in 0..ch.dim_in {
        let out = ch.apply_matrix(&basis_projector(ch.dim_in, i));
        if max_entry_diff(&out, &basis_projector(ch.dim_in, i)) > tol {
            return false;
        }
    }
    true
}

/// Environment vectors `|φ_i⟩` of a generalized dephasing channel, read off
/// the Stinespring dilation `V|i⟩ = |i⟩ ⊗ |φ_i⟩`.
pub fn dephasing_environment_vectors(ch: &QuantumChannel) -> Result<Vec<crate::qmath::CVector>> {
    if !is_generalized_dephasing(ch, HERM_TOL) {
        return Err(Error::NotDephasing(
            "diagonal fixed-point check failed".into(),
        ));
    }
    let env = ch.kraus.len();
    let mut out = Vec::with_capacity(ch.dim_in);
    for i in 0..ch.dim_in {
        let mut phi = crate::qmath::CVector::zeros(env);
        for (k, kr) in ch.kraus.iter().enumerate() {
            phi[k] = kr[(i, i)];
        }
        out.push(phi);
    }
    Ok(out)
}

/// Spectrum of a channel output on a diagonal input, used by
/// basis-independent comparisons of complementary channels.
pub fn output_spectrum(ch: &QuantumChannel, rho: &DensityOperator) -> Result<Vec<f64>> {
    let out = ch.apply(rho)?;
    Ok(eig_hermitian(out.matrix())?.values)
}
