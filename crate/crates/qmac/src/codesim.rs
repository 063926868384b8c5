//! Desk-scale realization of the entanglement-assisted code construction:
//! the shared resource state, block-Pauli encodings over the type-class
//! decomposition, channel outputs, square-root-measurement decoding with the
//! packing-bound comparison, the Hayashi–Nagaoka and gentle-measurement
//! checks, and the two-sender successive-decoding channels.
//!
//! Layout conventions. The resource `Ψ = φ^{⊗n}` lives on `(A'^n, B'^n)`
//! where `A'` is the sender's half (channel input) and `B'` the receiver's
//! half. `B'` carries eigen-index coordinates of ρ (the purification pairs
//! eigenvector `|v_x⟩` with reference `|x⟩`), so block unitaries act on `B'`
//! as plain matrices while their `A'`-side counterparts are conjugated by the
//! eigenbasis. Channel outputs are ordered `(B^n, B'^n)`, with the
//! environment inserted as `(B^n, E^n, B'^n)` when retained.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::channels::{stinespring_dilation, tensor_power_channel, QuantumChannel};
use crate::entropy::{conditional_mutual_information, mutual_information, von_neumann_entropy};
use crate::error::{Error, Result};
use crate::qmath::{
    conjugate_second_factor, eig_hermitian, hermitian_function, inv_sqrt_on_support,
    max_entry_diff, permute_matrix_subsystems, tensor, tensor_power, trace_distance,
    trace_product, CMatrix, CVector, DensityOperator, PureState, HERM_TOL, ONE,
};
use crate::typing::typical_projector;

/// Exact state computation is refused above this operator dimension.
pub const STATE_CAP: usize = 4096;
/// Eigenvalues below this are treated as zero in pseudo-inverse square
/// roots.
pub const PINV_THRESHOLD: f64 = 1e-10;
/// Spectral gap below which eigenvalues of ρ are treated as degenerate and
/// their eigenspaces merged into one block.
pub const DEGENERACY_TOL: f64 = 1e-9;

fn check_cap(dim: usize) -> Result<()> {
    if dim > STATE_CAP {
        return Err(Error::DimensionCap {
            got: dim,
            cap: STATE_CAP,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Resource decomposition: type classes over the spectrum of ρ
// ---------------------------------------------------------------------------

/// One block of the direct-sum decomposition `H^{⊗n} = ⊕_α H_α`: all basis
/// sequences whose per-copy eigenvalues follow a fixed type over the
/// *distinct* eigenvalues of ρ.
#[derive(Debug, Clone)]
pub struct ResourceClass {
    /// counts per distinct-eigenvalue group
    pub value_counts: Vec<usize>,
    /// member basis sequences as flat indices in `[d^n]`, ascending
    pub members: Vec<usize>,
    /// block dimension (= members.len())
    pub dim: usize,
    /// total probability mass `p_α` of the block under `ρ^{⊗n}`
    pub prob_mass: f64,
}

/// Eigendecomposition of ρ together with the block structure of `ρ^{⊗n}`.
///
/// Degenerate eigenvalues are merged into one group, so every block unitary
/// commutes with `ρ^{⊗n}` exactly; for a nondegenerate spectrum the blocks
/// are the ordinary type classes.
#[derive(Debug, Clone)]
pub struct ResourceDecomposition {
    pub n: usize,
    pub dim: usize,
    /// eigenvalues of ρ, descending
    pub probs: Vec<f64>,
    /// eigenbasis of ρ (columns)
    pub basis: CMatrix,
    basis_is_identity: bool,
    /// distinct-eigenvalue groups as lists of eigen indices
    pub value_groups: Vec<Vec<usize>>,
    pub classes: Vec<ResourceClass>,
}

impl ResourceDecomposition {
    pub fn new(rho: &DensityOperator, n: usize) -> Result<Self> {
        let d = rho.dim();
        let total = d
            .checked_pow(n as u32)
            .filter(|&x| x <= STATE_CAP)
            .ok_or(Error::DimensionCap {
                got: usize::MAX,
                cap: STATE_CAP,
            })?;
        let eig = eig_hermitian(rho.matrix())?;
        let probs: Vec<f64> = eig.values.iter().map(|&x| x.max(0.0)).collect();
        let basis_is_identity = max_entry_diff(&eig.vectors, &CMatrix::identity(d, d)) == 0.0;

        // group eigen indices by (approximately) equal eigenvalue
        let mut value_groups: Vec<Vec<usize>> = Vec::new();
        for i in 0..d {
            match value_groups.last_mut() {
                Some(g) if (probs[*g.last().unwrap()] - probs[i]).abs() <= DEGENERACY_TOL => {
                    g.push(i)
                }
                _ => value_groups.push(vec![i]),
            }
        }
        let group_of: Vec<usize> = {
            let mut v = vec![0usize; d];
            for (g, members) in value_groups.iter().enumerate() {
                for &i in members {
                    v[i] = g;
                }
            }
            v
        };

        // bucket every basis sequence by its group-sequence type
        let mut buckets: std::collections::BTreeMap<Vec<usize>, Vec<usize>> =
            std::collections::BTreeMap::new();
        for idx in 0..total {
            let seq = crate::typing::sequence_of_index(idx, n, d);
            let mut counts = vec![0usize; value_groups.len()];
            for &x in &seq {
                counts[group_of[x]] += 1;
            }
            buckets.entry(counts).or_default().push(idx);
        }
        let classes: Vec<ResourceClass> = buckets
            .into_iter()
            .map(|(value_counts, members)| {
                let dim = members.len();
                let member_prob: f64 = value_counts
                    .iter()
                    .enumerate()
                    .map(|(g, &c)| probs[value_groups[g][0]].powi(c as i32))
                    .product();
                ResourceClass {
                    value_counts,
                    members,
                    dim,
                    prob_mass: member_prob * dim as f64,
                }
            })
            .collect();

        Ok(Self {
            n,
            dim: d,
            probs,
            basis: eig.vectors,
            basis_is_identity,
            value_groups,
            classes,
        })
    }

    /// Identity encoding: every block gets the identity Pauli with positive
    /// sign.
    pub fn identity_index(&self) -> BlockPauliIndex {
        BlockPauliIndex {
            entries: self.classes.iter().map(|_| (0, false)).collect(),
        }
    }

    /// Uniform sample from `S = G × B`.
    pub fn sample_index<R: Rng>(&self, rng: &mut R) -> BlockPauliIndex {
        BlockPauliIndex {
            entries: self
                .classes
                .iter()
                .map(|c| (rng.random_range(0..c.dim * c.dim), rng.random::<bool>()))
                .collect(),
        }
    }

    /// Size of the index set `|S| = 2^a · Π_α d_α²`, or `None` on overflow.
    pub fn index_set_size(&self) -> Option<u128> {
        let mut acc: u128 = 1u128.checked_shl(self.classes.len() as u32)?;
        for c in &self.classes {
            acc = acc.checked_mul((c.dim * c.dim) as u128)?;
        }
        Some(acc)
    }

    /// Every element of `S`, when the set is small enough to enumerate.
    pub fn enumerate_indices(&self, limit: usize) -> Option<Vec<BlockPauliIndex>> {
        let size = self.index_set_size()?;
        if size > limit as u128 {
            return None;
        }
        let mut out = Vec::with_capacity(size as usize);
        let mut current = self.identity_index();
        loop {
            out.push(current.clone());
            // odometer increment over (g_α, b_α)
            let mut pos = 0;
            loop {
                if pos == self.classes.len() {
                    return Some(out);
                }
                let (ref mut g, ref mut b) = current.entries[pos];
                if !*b {
                    *b = true;
                    break;
                }
                *b = false;
                let cap = self.classes[pos].dim * self.classes[pos].dim;
                if *g + 1 < cap {
                    *g += 1;
                    break;
                }
                *g = 0;
                pos += 1;
            }
        }
    }

    /// Block-Pauli unitary in eigen coordinates of `ρ^{⊗n}`:
    /// `U = ⊕_α (-1)^{b_α} U_{g_α}` embedded on each block's members.
    pub fn block_pauli_eigen(&self, idx: &BlockPauliIndex) -> Result<CMatrix> {
        if idx.entries.len() != self.classes.len() {
            return Err(Error::IndexError(format!(
                "{} entries for {} classes",
                idx.entries.len(),
                self.classes.len()
            )));
        }
        let dim_total = self.dim.pow(self.n as u32);
        let mut u = CMatrix::zeros(dim_total, dim_total);
        for (class, &(g, b)) in self.classes.iter().zip(idx.entries.iter()) {
            if g >= class.dim * class.dim {
                return Err(Error::IndexError(format!(
                    "generalized Pauli index {g} out of range for block dim {}",
                    class.dim
                )));
            }
            let block = generalized_pauli_single(class.dim, g);
            let sign = if b { -1.0 } else { 1.0 };
            for r in 0..class.dim {
                for c in 0..class.dim {
                    let z = block[(r, c)];
                    if z.norm() > 0.0 {
                        u[(class.members[r], class.members[c])] = z.scale(sign);
                    }
                }
            }
        }
        Ok(u)
    }

    /// The same unitary acting on the physical `A'^n` side (conjugated into
    /// the computational basis).
    pub fn block_pauli_physical(&self, idx: &BlockPauliIndex) -> Result<CMatrix> {
        let u = self.block_pauli_eigen(idx)?;
        if self.basis_is_identity {
            return Ok(u);
        }
        let w = tensor_power(&self.basis, self.n)?;
        Ok(&w * u * w.adjoint())
    }

    /// `Σ_α √p_α |Φ_α⟩` with `Φ_α` maximally entangled across the block,
    /// the `A'` side in physical coordinates and the `B'` side in eigen
    /// coordinates.
    pub fn resource_from_classes(&self) -> Result<PureState> {
        let dn = self.dim.pow(self.n as u32);
        let mut amp = CVector::zeros(dn * dn);
        for class in &self.classes {
            let coeff = (class.prob_mass / class.dim as f64).sqrt();
            for &m in &class.members {
                amp[m * dn + m] += crate::qmath::cr(coeff);
            }
        }
        let eigenside = PureState::new_unchecked(amp, vec![dn, dn]);
        if self.basis_is_identity {
            return Ok(eigenside);
        }
        let w = tensor_power(&self.basis, self.n)?;
        let lifted = tensor(&w, &CMatrix::identity(dn, dn))?;
        Ok(eigenside.apply(&lifted, vec![dn, dn]))
    }
}

/// `m`-th generalized Pauli on a `d`-dimensional block
/// (`U_{l·d+k} = Ẑ(l) X̂(k)`); for 1-dimensional blocks only the identity.
fn generalized_pauli_single(d: usize, m: usize) -> CMatrix {
    let l = m / d;
    let k = m % d;
    crate::channels::pauli_z_power(d, l) * crate::channels::pauli_x_power(d, k)
}

/// Per-block generalized Pauli index `(g_α, b_α)` for every type class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockPauliIndex {
    pub entries: Vec<(usize, bool)>,
}

/// `Ψ = purify(ρ)^{⊗n}` regrouped onto `(A'^n, B'^n)`.
pub fn build_entangled_resource(rho: &DensityOperator, n: usize) -> Result<PureState> {
    let d = rho.dim();
    d.checked_pow(n as u32)
        .filter(|&x| x <= STATE_CAP)
        .ok_or(Error::DimensionCap {
            got: usize::MAX,
            cap: STATE_CAP,
        })?;
    let phi = rho.purify();
    let mut state = phi.clone();
    for _ in 1..n {
        state = state.tensor(&phi);
    }
    // (A'_1, B'_1, ..., A'_n, B'_n) → (A'^n, B'^n)
    let mut perm = Vec::with_capacity(2 * n);
    for k in 0..n {
        perm.push(2 * k);
    }
    for k in 0..n {
        perm.push(2 * k + 1);
    }
    let state = state.permute_subsystems(&perm)?;
    state.with_subsystems(vec![d.pow(n as u32), d.pow(n as u32)])
}

// ---------------------------------------------------------------------------
// Encoded outputs
// ---------------------------------------------------------------------------

/// Shared context for one `(channel, ρ, n, δ)` instance: the decomposition,
/// the dilation, `θ^{⊗n}`, and the packing projectors.
pub struct PackingContext {
    pub channel: QuantumChannel,
    pub decomp: ResourceDecomposition,
    pub n: usize,
    pub delta: f64,
    /// channel output dimension per copy
    pub dim_b: usize,
    /// `θ^{⊗n}` on `(B^n, B'^n)`
    pub theta_n: DensityOperator,
    /// `Π = Π^n_{N(ρ),δ} ⊗ Π^n_{ρ,δ}`
    pub pi: CMatrix,
    /// `Π^n_{θ,δ}` regrouped onto `(B^n, B'^n)`
    pub pi_theta: CMatrix,
    /// per-copy θ state (for entropies)
    pub theta_copy: DensityOperator,
}

impl PackingContext {
    pub fn new(m: &QuantumChannel, rho: &DensityOperator, n: usize, delta: f64) -> Result<Self> {
        let d = rho.dim();
        if m.dim_in() != d {
            return Err(Error::DimensionMismatch(m.dim_in(), d));
        }
        let dim_b = m.dim_out();
        let dn = d.checked_pow(n as u32).ok_or(Error::DimensionCap {
            got: usize::MAX,
            cap: STATE_CAP,
        })?;
        let bn = dim_b.checked_pow(n as u32).ok_or(Error::DimensionCap {
            got: usize::MAX,
            cap: STATE_CAP,
        })?;
        check_cap(bn.checked_mul(dn).ok_or(Error::DimensionCap {
            got: usize::MAX,
            cap: STATE_CAP,
        })?)?;

        let decomp = ResourceDecomposition::new(rho, n)?;

        // per-copy θ = (N ⊗ I) φ on (B, B'), B' in eigen coordinates
        let theta_copy = theta_single_copy(m, &decomp)?;

        // θ^{⊗n} on (B^n, B'^n)
        let mut theta_n = theta_copy.clone();
        for _ in 1..n {
            theta_n = theta_n.tensor(&theta_copy)?;
        }
        let mut perm = Vec::with_capacity(2 * n);
        for k in 0..n {
            perm.push(2 * k);
        }
        for k in 0..n {
            perm.push(2 * k + 1);
        }
        let theta_n = theta_n.permute_subsystems(&perm)?.with_subsystems(vec![bn, dn])?;

        // Π = Π_{N(ρ)} ⊗ Π_ρ; the B' factor is diagonal in eigen coordinates
        let out_state = m.apply(rho)?;
        let pi_b = typical_projector(&out_state, n, delta)?;
        let rho_eigen = DensityOperator::from_probabilities(&normalized(&decomp.probs))?;
        let pi_r = typical_projector(&rho_eigen, n, delta)?;
        let pi = tensor(&pi_b.projector, &pi_r.projector)?;

        // Π_θ on (BB')^n, regrouped to (B^n, B'^n)
        let pi_theta_raw = typical_projector(&theta_copy, n, delta)?;
        let dims: Vec<usize> = (0..n).flat_map(|_| [dim_b, d]).collect();
        let pi_theta = permute_matrix_subsystems(&pi_theta_raw.projector, &dims, &perm)?;

        Ok(Self {
            channel: m.clone(),
            decomp,
            n,
            delta,
            dim_b,
            theta_n,
            pi,
            pi_theta,
            theta_copy,
        })
    }

    /// `σ_{s} = (I ⊗ U^tr) θ^{⊗n} (I ⊗ U^*)`, the transpose form of the
    /// encoded output.
    pub fn encoded_output(&self, idx: &BlockPauliIndex) -> Result<DensityOperator> {
        let u = self.decomp.block_pauli_eigen(idx)?;
        let bn = self.theta_n.subsystem_dims()[0];
        let m = conjugate_second_factor(self.theta_n.matrix(), bn, &u.transpose());
        Ok(DensityOperator::new_unchecked(
            m,
            self.theta_n.subsystem_dims().to_vec(),
        ))
    }

    /// `Π_{s} = (I ⊗ U^tr) Π^n_{θ,δ} (I ⊗ U^*)`.
    pub fn encoded_projector(&self, idx: &BlockPauliIndex) -> Result<CMatrix> {
        let u = self.decomp.block_pauli_eigen(idx)?;
        let bn = self.theta_n.subsystem_dims()[0];
        Ok(conjugate_second_factor(&self.pi_theta, bn, &u.transpose()))
    }

    /// `Tr σ_s X`.
    pub fn output_expectation(&self, idx: &BlockPauliIndex, x: &CMatrix) -> Result<f64> {
        let sigma = self.encoded_output(idx)?;
        Ok(trace_product(sigma.matrix(), x).re)
    }
}

fn normalized(p: &[f64]) -> Vec<f64> {
    let s: f64 = p.iter().sum();
    p.iter().map(|&x| x / s).collect()
}

/// Per-copy `θ = (N ⊗ I) φ` on `(B, B')` with `B'` in eigen coordinates of
/// ρ.
fn theta_single_copy(m: &QuantumChannel, decomp: &ResourceDecomposition) -> Result<DensityOperator> {
    let d = decomp.dim;
    // φ = Σ_x √λ_x |v_x⟩|x⟩ on (A', B')
    let mut amp = CVector::zeros(d * d);
    for (x, &lam) in decomp.probs.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        for a in 0..d {
            amp[a * d + x] += decomp.basis[(a, x)].scale(lam.sqrt());
        }
    }
    let phi = PureState::new_unchecked(amp, vec![d, d]);
    crate::channels::apply_to_subsystems(m, &phi.to_density(), &[0])
}

/// The dilated encoded state
/// `|Υ⟩ = (U_N^{⊗n} ⊗ I)(U_s ⊗ I)|Ψ⟩` on `(B^n, E^n, B'^n)`.
pub fn encoded_output_dilated(
    m: &QuantumChannel,
    decomp: &ResourceDecomposition,
    idx: &BlockPauliIndex,
) -> Result<PureState> {
    let d = decomp.dim;
    let n = decomp.n;
    let dn = d.pow(n as u32);
    let v = stinespring_dilation(m);
    let vn_dim = (v.dim_b() * v.env_dim())
        .checked_pow(n as u32)
        .and_then(|x| x.checked_mul(dn))
        .ok_or(Error::DimensionCap {
            got: usize::MAX,
            cap: crate::qmath::DIM_CAP,
        })?;
    if vn_dim > crate::qmath::DIM_CAP {
        return Err(Error::DimensionCap {
            got: vn_dim,
            cap: crate::qmath::DIM_CAP,
        });
    }

    // Ψ in mixed coordinates (physical A', eigen B')
    let psi = decomp.resource_from_classes()?;
    let u_phys = decomp.block_pauli_physical(idx)?;
    let encoded = psi.apply(&tensor(&u_phys, &CMatrix::identity(dn, dn))?, vec![dn, dn]);

    let vn = tensor_power(v.matrix(), n)?;
    let lifted = tensor(&vn, &CMatrix::identity(dn, dn))?;
    // subsystems after V^{⊗n}: ((B,E)_1, ..., (B,E)_n, B'^n)
    let mut dims: Vec<usize> = Vec::with_capacity(2 * n + 1);
    for _ in 0..n {
        dims.push(v.dim_b());
        dims.push(v.env_dim());
    }
    for _ in 0..n {
        dims.push(d);
    }
    let out = encoded
        .apply(&lifted, vec![v.dim_b().pow(n as u32) * v.env_dim().pow(n as u32), dn])
        .with_subsystems(dims)?;
    // (B_1, E_1, ..., B_n, E_n, B'_1, ..., B'_n) → (B^n, E^n, B'^n)
    let mut perm = Vec::with_capacity(3 * n);
    for k in 0..n {
        perm.push(2 * k);
    }
    for k in 0..n {
        perm.push(2 * k + 1);
    }
    for k in 0..n {
        perm.push(2 * n + k);
    }
    out.permute_subsystems(&perm)
}

/// `σ_s` via the dilation (tracing the environment), used to cross-check the
/// transpose form.
pub fn encoded_output_direct(
    m: &QuantumChannel,
    decomp: &ResourceDecomposition,
    idx: &BlockPauliIndex,
) -> Result<DensityOperator> {
    let ups = encoded_output_dilated(m, decomp, idx)?;
    let n = decomp.n;
    let keep: Vec<usize> = (0..n).chain(2 * n..3 * n).collect();
    let reduced = ups.to_density().partial_trace(&keep)?;
    let bn = m.dim_out().pow(n as u32);
    let dn = decomp.dim.pow(n as u32);
    reduced.with_subsystems(vec![bn, dn])
}

/// Exact average of `σ_s` over the whole index set, evaluated in closed form
/// as `Σ_α p_α (N^{⊗n}(π_α) ⊗ π_α)`.
pub fn average_output_state(
    m: &QuantumChannel,
    rho: &DensityOperator,
    n: usize,
) -> Result<DensityOperator> {
    let decomp = ResourceDecomposition::new(rho, n)?;
    let d = decomp.dim;
    let dn = d.pow(n as u32);
    let bn = m.dim_out().pow(n as u32);
    check_cap(bn * dn)?;
    let mn = tensor_power_channel(m, n)?;
    let w = if decomp.basis_is_identity {
        None
    } else {
        Some(tensor_power(&decomp.basis, n)?)
    };
    let mut acc = CMatrix::zeros(bn * dn, bn * dn);
    for class in &decomp.classes {
        // π_α on the physical side and on the eigen side
        let mut proj = CMatrix::zeros(dn, dn);
        for &mb in &class.members {
            proj[(mb, mb)] = ONE;
        }
        let pi_eigen = proj.scale(1.0 / class.dim as f64);
        let pi_phys = match &w {
            Some(w) => w * &pi_eigen * w.adjoint(),
            None => pi_eigen.clone(),
        };
        let out = mn.apply_matrix(&pi_phys);
        acc += tensor(&out, &pi_eigen)?.scale(class.prob_mass);
    }
    Ok(DensityOperator::new_unchecked(acc, vec![bn, dn]))
}

/// Brute-force average over every `s ∈ S` (transpose form); only valid when
/// the index set is enumerable.
pub fn average_output_state_enumerated(
    m: &QuantumChannel,
    rho: &DensityOperator,
    n: usize,
    limit: usize,
) -> Result<DensityOperator> {
    let ctx = PackingContext::new(m, rho, n, 0.5)?;
    let indices = ctx
        .decomp
        .enumerate_indices(limit)
        .ok_or_else(|| Error::BadOperands("index set too large to enumerate".into()))?;
    let dim = ctx.theta_n.dim();
    let mut acc = CMatrix::zeros(dim, dim);
    for idx in &indices {
        acc += ctx.encoded_output(idx)?.matrix();
    }
    acc = acc.scale(1.0 / indices.len() as f64);
    Ok(DensityOperator::new_unchecked(
        acc,
        ctx.theta_n.subsystem_dims().to_vec(),
    ))
}

// ---------------------------------------------------------------------------
// Square-root measurement
// ---------------------------------------------------------------------------

/// POVM produced by the square-root construction.
#[derive(Debug, Clone)]
pub struct DecoderPOVM {
    pub elements: Vec<CMatrix>,
    pub dim: usize,
}

impl DecoderPOVM {
    /// PSD within 1e-9 per element and `Σ Λ ≤ I` within 1e-8.
    pub fn validate(&self) -> Result<()> {
        let mut sum = CMatrix::zeros(self.dim, self.dim);
        for el in &self.elements {
            let eig = eig_hermitian(el)?;
            let min = eig.values.iter().cloned().fold(f64::INFINITY, f64::min);
            if min < -1e-9 {
                return Err(Error::DegenerateDecoder(format!(
                    "POVM element has eigenvalue {min:.3e}"
                )));
            }
            sum += el;
        }
        let excess = eig_hermitian(&(sum - CMatrix::identity(self.dim, self.dim)))?
            .values
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        if excess > 1e-8 {
            return Err(Error::DegenerateDecoder(format!(
                "POVM exceeds identity by {excess:.3e}"
            )));
        }
        Ok(())
    }

    /// The leftover element `I - Σ Λ_k` (clipped to PSD), so the POVM can be
    /// completed when used as an instrument.
    pub fn remainder(&self) -> CMatrix {
        let mut sum = CMatrix::zeros(self.dim, self.dim);
        for el in &self.elements {
            sum += el;
        }
        let rem = CMatrix::identity(self.dim, self.dim) - sum;
        hermitian_function(&rem, |x| x.max(0.0)).expect("remainder is Hermitian")
    }
}

/// Square-root measurement from sandwiched operators `Υ_m = Π Π_m Π`:
/// `Λ_k = (ΣΥ)^{-1/2} Υ_k (ΣΥ)^{-1/2}` with the pseudo-inverse square root
/// on the support.
pub fn build_srm_decoder(pi: &CMatrix, pi_m: &[CMatrix]) -> Result<DecoderPOVM> {
    if pi_m.is_empty() {
        return Err(Error::DegenerateDecoder("no codeword projectors".into()));
    }
    let dim = pi.nrows();
    let upsilons: Vec<CMatrix> = pi_m.iter().map(|p| pi * p * pi).collect();
    build_srm_from_upsilons(&upsilons, dim)
}

fn build_srm_from_upsilons(upsilons: &[CMatrix], dim: usize) -> Result<DecoderPOVM> {
    let mut sum = CMatrix::zeros(dim, dim);
    for u in upsilons {
        sum += u;
    }
    let sum = (&sum + sum.adjoint()).scale(0.5);
    let eig = eig_hermitian(&sum)?;
    if eig.values.iter().all(|&x| x < PINV_THRESHOLD) {
        return Err(Error::DegenerateDecoder(
            "all sandwiched operators vanish".into(),
        ));
    }
    let root = inv_sqrt_on_support(&sum, PINV_THRESHOLD)?;
    let elements: Vec<CMatrix> = upsilons
        .iter()
        .map(|u| {
            let m = &root * u * &root;
            (&m + m.adjoint()).scale(0.5)
        })
        .collect();
    Ok(DecoderPOVM { elements, dim })
}

// ---------------------------------------------------------------------------
// Packing simulation
// ---------------------------------------------------------------------------

/// Random codebook of block-Pauli indices.
#[derive(Debug, Clone, Serialize)]
pub struct Codebook {
    pub n: usize,
    pub rate: f64,
    pub entries: Vec<BlockPauliIndex>,
    pub seed: u64,
}

impl Codebook {
    /// Sample `N = 2^{⌊nR⌋}` codewords (or an explicit count) uniformly from
    /// `S` with replacement; reproducible from `(seed, stream)`. The exponent
    /// is clamped at 20 to match the global enumeration cap.
    pub fn sample(
        decomp: &ResourceDecomposition,
        rate: f64,
        n_codewords: Option<usize>,
        seed: u64,
        stream: u64,
    ) -> Self {
        let n = decomp.n;
        let count = n_codewords
            .unwrap_or_else(|| 1usize << ((n as f64 * rate).floor().clamp(0.0, 20.0) as u32));
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let entries = (0..count.max(1))
            .map(|_| decomp.sample_index(&mut rng))
            .collect();
        Self {
            n,
            rate,
            entries,
            seed,
        }
    }
}

/// Inputs of a packing-lemma simulation.
#[derive(Debug, Clone, Serialize)]
pub struct PackingConfig {
    pub n: usize,
    pub rate: f64,
    /// overrides `2^{⌊nR⌋}` when set
    pub n_codewords: Option<usize>,
    pub gamma: f64,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Per-codebook outcome.
#[derive(Debug, Clone, Serialize)]
pub struct TrialSummary {
    pub trial: usize,
    pub min_success: f64,
    pub avg_success: f64,
    pub pass: bool,
}

/// Full simulation report.
#[derive(Debug, Clone, Serialize)]
pub struct PackingReport {
    pub n: usize,
    pub rate: f64,
    pub n_codewords: usize,
    pub gamma: f64,
    pub delta: f64,
    pub seed: u64,
    pub trials: usize,
    /// measured ε = max(1 - min_s Tr σ_s Π, 1 - min_s Tr σ_s Π_s)
    pub eps_measured: f64,
    /// packing bound 1 - 4(ε + √(8ε)) - 8γ with the measured ε
    pub bound: f64,
    /// d = max_s Tr Π_s
    pub d_measured: f64,
    /// D = 1 / max eigenvalue of Π σ̄ Π
    pub big_d_measured: f64,
    /// the code size ⌊γ D / d⌋ the lemma itself would grant
    pub n_paper: u64,
    /// property (p3): tightest c̃ with Tr Π_s ≤ 2^{n[H(AB) + c̃δ]}
    pub p3_tightest_c: f64,
    /// property (p4): tightest η̃ with max eig ≤ 2^{-n[H(A)+H(B)-c̃δ-η̃]}
    pub p4_tightest_eta: f64,
    /// best codebook (after derandomization)
    pub best_trial: usize,
    pub min_success: f64,
    pub avg_success: f64,
    /// fraction of codebooks whose average success clears the bound
    pub pass_fraction: f64,
    /// max error among kept codewords after expurgating the worse half
    pub post_expurgation_max_error: f64,
    pub codebooks: Vec<TrialSummary>,
}

/// Evaluate one codebook: exact per-codeword success probabilities
/// `Tr σ_{f(k)} Λ_k` under the square-root decoder.
pub fn evaluate_codebook(ctx: &PackingContext, entries: &[BlockPauliIndex]) -> Result<Vec<f64>> {
    let mut upsilons = Vec::with_capacity(entries.len());
    for idx in entries {
        let proj = ctx.encoded_projector(idx)?;
        let sandwiched = sandwich(&ctx.pi, &proj);
        upsilons.push((&sandwiched + sandwiched.adjoint()).scale(0.5));
    }
    let povm = build_srm_from_upsilons(&upsilons, ctx.theta_n.dim())?;
    let mut successes = Vec::with_capacity(entries.len());
    for (idx, lambda) in entries.iter().zip(povm.elements.iter()) {
        successes.push(ctx.output_expectation(idx, lambda)?);
    }
    Ok(successes)
}

/// `Π M Π`, with an entrywise fast path when Π is diagonal.
fn sandwich(pi: &CMatrix, m: &CMatrix) -> CMatrix {
    let n = pi.nrows();
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || pi[(i, j)].norm() == 0.0));
    if diagonal {
        let mut out = m.clone();
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] *= pi[(i, i)] * pi[(j, j)];
            }
        }
        out
    } else {
        pi * m * pi
    }
}

/// Run the packing-lemma simulation: measure ε from the projector
/// properties, sample random codebooks, decode with the square-root
/// measurement, compare with the packing bound, then derandomize and
/// expurgate.
pub fn simulate_packing(
    m: &QuantumChannel,
    rho: &DensityOperator,
    cfg: &PackingConfig,
) -> Result<PackingReport> {
    let ctx = PackingContext::new(m, rho, cfg.n, cfg.delta)?;

    // measured ε over sampled s (p1, p2); Tr σ_s Π_s is invariant in s and
    // Tr σ_s Π is invariant under block encodings, but both are measured
    let mut eps: f64 = 0.0;
    let mut sample_rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    sample_rng.set_stream(0);
    let sampled: Vec<BlockPauliIndex> = match ctx.decomp.enumerate_indices(32) {
        Some(all) => all,
        None => {
            let mut v = vec![ctx.decomp.identity_index()];
            for _ in 0..15 {
                v.push(ctx.decomp.sample_index(&mut sample_rng));
            }
            v
        }
    };
    let mut d_measured: f64 = 0.0;
    for idx in &sampled {
        let p1 = ctx.output_expectation(idx, &ctx.pi)?;
        let proj = ctx.encoded_projector(idx)?;
        let p2 = ctx.output_expectation(idx, &proj)?;
        eps = eps.max(1.0 - p1).max(1.0 - p2);
        let tr: f64 = proj.diagonal().iter().map(|z| z.re).sum();
        d_measured = d_measured.max(tr);
    }

    // D from property (p4) on the exact average state
    let sigma_avg = average_output_state(m, rho, cfg.n)?;
    let sandwiched = &ctx.pi * sigma_avg.matrix() * &ctx.pi;
    let max_eig = eig_hermitian(&(&sandwiched + sandwiched.adjoint()).scale(0.5))?
        .values
        .into_iter()
        .fold(0.0f64, f64::max);
    let big_d_measured = if max_eig > 0.0 { 1.0 / max_eig } else { f64::INFINITY };
    let n_paper = (cfg.gamma * big_d_measured / d_measured.max(1.0)).floor() as u64;

    // measured constants of properties (p3), (p4)
    let nf = cfg.n as f64;
    let h_ab = von_neumann_entropy(&ctx.theta_copy);
    let h_a = crate::entropy::shannon_entropy(&ctx.decomp.probs);
    let h_b = von_neumann_entropy(&m.apply(rho)?);
    let p3_tightest_c = ((d_measured.log2() / nf - h_ab) / cfg.delta.max(1e-300)).max(0.0);
    let p4_tightest_eta = if max_eig > 0.0 {
        (h_a + h_b - p3_tightest_c * cfg.delta + max_eig.log2() / nf).max(0.0)
    } else {
        0.0
    };

    let bound = 1.0 - 4.0 * (eps + (8.0 * eps).sqrt()) - 8.0 * cfg.gamma;

    // codebook trials
    let mut summaries = Vec::with_capacity(cfg.trials);
    let mut best: Option<(usize, Vec<f64>, Vec<BlockPauliIndex>)> = None;
    let mut pass_count = 0usize;
    let mut n_codewords = 0usize;
    for trial in 0..cfg.trials {
        let codebook = Codebook::sample(
            &ctx.decomp,
            cfg.rate,
            cfg.n_codewords,
            cfg.seed,
            trial as u64 + 1,
        );
        n_codewords = codebook.entries.len();
        let successes = evaluate_codebook(&ctx, &codebook.entries)?;
        let min_s = successes.iter().cloned().fold(f64::INFINITY, f64::min);
        let avg_s = successes.iter().sum::<f64>() / successes.len() as f64;
        let pass = avg_s >= bound;
        if pass {
            pass_count += 1;
        }
        summaries.push(TrialSummary {
            trial,
            min_success: min_s,
            avg_success: avg_s,
            pass,
        });
        let better = match &best {
            Some((_, bs, _)) => avg_s > bs.iter().sum::<f64>() / bs.len() as f64,
            None => true,
        };
        if better {
            best = Some((trial, successes, codebook.entries));
        }
    }

    let (best_trial, best_successes, _best_entries) =
        best.ok_or_else(|| Error::BadOperands("trials must be ≥ 1".into()))?;
    let min_success = best_successes.iter().cloned().fold(f64::INFINITY, f64::min);
    let avg_success = best_successes.iter().sum::<f64>() / best_successes.len() as f64;

    // expurgation: drop the worse half (same decoder restricted to the kept
    // indices stays a valid sub-POVM)
    let mut errors: Vec<f64> = best_successes.iter().map(|s| 1.0 - s).collect();
    errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let kept = errors.len().div_ceil(2);
    let post_expurgation_max_error = errors[..kept]
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);

    Ok(PackingReport {
        n: cfg.n,
        rate: cfg.rate,
        n_codewords,
        gamma: cfg.gamma,
        delta: cfg.delta,
        seed: cfg.seed,
        trials: cfg.trials,
        eps_measured: eps,
        bound,
        d_measured,
        big_d_measured,
        n_paper,
        p3_tightest_c,
        p4_tightest_eta,
        best_trial,
        min_success,
        avg_success,
        pass_fraction: pass_count as f64 / cfg.trials.max(1) as f64,
        post_expurgation_max_error,
        codebooks: summaries,
    })
}

/// Decode an explicit codebook (no random sampling); returns per-codeword
/// success probabilities.
pub fn decode_explicit_codebook(
    m: &QuantumChannel,
    rho: &DensityOperator,
    n: usize,
    delta: f64,
    entries: &[BlockPauliIndex],
) -> Result<Vec<f64>> {
    let ctx = PackingContext::new(m, rho, n, delta)?;
    evaluate_codebook(&ctx, entries)
}

// ---------------------------------------------------------------------------
// Hayashi–Nagaoka operator inequality
// ---------------------------------------------------------------------------

/// Minimum eigenvalue of `2(I-S) + 4T - (I - (S+T)^{-1/2} S (S+T)^{-1/2})`,
/// which the operator inequality keeps ≥ 0 (up to roundoff) whenever
/// `0 ≤ S ≤ I` and `T ≥ 0`.
pub fn hayashi_nagaoka_check(s: &CMatrix, t: &CMatrix) -> Result<f64> {
    if s.nrows() != t.nrows() || s.ncols() != t.ncols() || s.nrows() != s.ncols() {
        return Err(Error::DimensionMismatch(s.nrows(), t.nrows()));
    }
    let dim = s.nrows();
    let eig_s = eig_hermitian(s).map_err(|_| Error::BadOperands("S not Hermitian".into()))?;
    let min_s = eig_s.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_s = eig_s.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min_s < -HERM_TOL || max_s > 1.0 + HERM_TOL {
        return Err(Error::BadOperands(format!(
            "S eigenvalues in [{min_s:.3e}, {max_s:.3e}], need [0, 1]"
        )));
    }
    let eig_t = eig_hermitian(t).map_err(|_| Error::BadOperands("T not Hermitian".into()))?;
    let min_t = eig_t.values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_t < -HERM_TOL {
        return Err(Error::BadOperands(format!(
            "T has eigenvalue {min_t:.3e}, need T ≥ 0"
        )));
    }
    let id = CMatrix::identity(dim, dim);
    let root = inv_sqrt_on_support(&(s + t), PINV_THRESHOLD)?;
    let lhs = &id - &root * s * &root;
    let rhs = (&id - s).scale(2.0) + t.scale(4.0);
    let diff = rhs - lhs;
    let eig = eig_hermitian(&(&diff + diff.adjoint()).scale(0.5))?;
    Ok(eig.values.into_iter().fold(f64::INFINITY, f64::min))
}

// ---------------------------------------------------------------------------
// Gentle coherent measurement
// ---------------------------------------------------------------------------

/// Outcome of the gentle-measurement disturbance check.
#[derive(Debug, Clone, Serialize)]
pub struct GentleReport {
    pub epsilon: f64,
    pub bound: f64,
    pub max_disturbance: f64,
    pub pass: bool,
}

/// Coherent-measurement isometry `D: A → A ⊗ J`, `D|ψ⟩ = Σ_j (√Λ_j|ψ⟩)|j⟩`,
/// with the remainder outcome appended last when `Σ Λ < I`.
pub fn measurement_isometry(povm: &DecoderPOVM) -> Result<CMatrix> {
    let dim = povm.dim;
    let remainder = povm.remainder();
    let rem_norm = crate::qmath::max_abs(&remainder);
    let mut branches: Vec<CMatrix> = Vec::with_capacity(povm.elements.len() + 1);
    for el in &povm.elements {
        branches.push(hermitian_function(el, |x| x.max(0.0).sqrt())?);
    }
    if rem_norm > 1e-12 {
        branches.push(hermitian_function(&remainder, |x| x.max(0.0).sqrt())?);
    }
    let j = branches.len();
    let mut d = CMatrix::zeros(dim * j, dim);
    for (jj, b) in branches.iter().enumerate() {
        for r in 0..dim {
            for c in 0..dim {
                d[(r * j + jj, c)] = b[(r, c)];
            }
        }
    }
    Ok(d)
}

/// Check the gentle coherent measurement bound: measuring `ρ_k` with a POVM
/// that identifies it with probability ≥ 1-ε disturbs its purification by at
/// most `√(8ε)` in trace distance.
pub fn gentle_measurement_check(
    states: &[DensityOperator],
    povm: &DecoderPOVM,
) -> Result<GentleReport> {
    if states.len() > povm.elements.len() {
        return Err(Error::BadOperands(format!(
            "{} states but only {} POVM elements",
            states.len(),
            povm.elements.len()
        )));
    }
    let dim = povm.dim;
    let mut epsilon: f64 = 0.0;
    for (k, rho) in states.iter().enumerate() {
        let succ: f64 = (rho.matrix() * &povm.elements[k])
            .diagonal()
            .iter()
            .map(|z| z.re)
            .sum();
        epsilon = epsilon.max(1.0 - succ);
    }
    let d = measurement_isometry(povm)?;
    let j = d.nrows() / dim;
    let mut max_disturbance: f64 = 0.0;
    for (k, rho) in states.iter().enumerate() {
        // purification |φ_k⟩ on (A, R); measure the A side
        let phi = rho.purify().permute_subsystems(&[1, 0])?; // (R, A)
        let lifted = tensor(&CMatrix::identity(dim, dim), &d)?;
        let zeta = phi.apply(&lifted, vec![dim, dim, j]);
        // target |φ_k⟩ ⊗ |k⟩
        let mut marker = CVector::zeros(j);
        marker[k] = ONE;
        let target = PureState::new_unchecked(
            crate::qmath::tensor_vec(phi.amplitudes(), &marker),
            vec![dim, dim, j],
        );
        max_disturbance = max_disturbance.max(zeta.trace_distance_pure(&target));
    }
    let bound = (8.0 * epsilon).sqrt();
    Ok(GentleReport {
        epsilon,
        bound,
        max_disturbance,
        pass: max_disturbance <= bound + 1e-9,
    })
}

/// Randomized sweep of the Hayashi–Nagaoka inequality.
#[derive(Debug, Clone, Serialize)]
pub struct HayashiNagaokaReport {
    pub trials: usize,
    pub max_dim: usize,
    pub seed: u64,
    pub min_margin: f64,
    pub pass: bool,
}

/// Check the operator inequality on random pairs `0 ≤ S ≤ I`, `T ≥ 0`.
pub fn hayashi_nagaoka_sweep(trials: usize, max_dim: usize, seed: u64) -> Result<HayashiNagaokaReport> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut min_margin = f64::INFINITY;
    for _ in 0..trials {
        let d = rng.random_range(2..=max_dim.max(2));
        let g = crate::qmath::ginibre_matrix(d, d, &mut rng);
        let h = (&g + g.adjoint()).scale(0.5);
        // squash the spectrum into [0, 1]
        let s = hermitian_function(&h, |x| 1.0 / (1.0 + (-x).exp()))?;
        let t = crate::qmath::ginibre_state(d, &mut rng)
            .matrix()
            .scale(rng.random::<f64>() * 3.0);
        min_margin = min_margin.min(hayashi_nagaoka_check(&s, &t)?);
    }
    if trials == 0 {
        min_margin = 0.0;
    }
    Ok(HayashiNagaokaReport {
        trials,
        max_dim,
        seed,
        min_margin,
        pass: min_margin >= -1e-8,
    })
}

/// Randomized sweep of the gentle-measurement bound plus the pure-state
/// distance identity it relies on.
#[derive(Debug, Clone, Serialize)]
pub struct GentleSweepReport {
    pub trials: usize,
    pub seed: u64,
    /// max disturbance − √(8ε) over instances (≤ 0 when the bound holds)
    pub max_excess: f64,
    /// max | ‖ζ−ψ‖ − 2√(1−|⟨ζ|ψ⟩|²) | over random pure pairs
    pub max_identity_deviation: f64,
    pub pass: bool,
}

/// Measure block-diagonal states with slightly mixed two-outcome POVMs and
/// check the disturbance bound on every instance; also verify the pure-state
/// trace-distance identity against the dense eigenvalue route.
pub fn gentle_measurement_sweep(trials: usize, seed: u64) -> Result<GentleSweepReport> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut max_excess = f64::NEG_INFINITY;
    let mut max_identity_deviation: f64 = 0.0;
    for _ in 0..trials {
        let half = rng.random_range(1..=2usize);
        let dim = 2 * half;
        let mix: f64 = 0.005 + 0.05 * rng.random::<f64>();
        let mut p0 = CMatrix::zeros(dim, dim);
        let mut p1 = CMatrix::zeros(dim, dim);
        for k in 0..half {
            p0[(k, k)] = ONE;
            p1[(half + k, half + k)] = ONE;
        }
        let povm = DecoderPOVM {
            elements: vec![
                p0.scale(1.0 - mix) + p1.scale(mix),
                p1.scale(1.0 - mix) + p0.scale(mix),
            ],
            dim,
        };
        // random states supported on the matching blocks
        let mut states = Vec::new();
        for b in 0..2 {
            let block = crate::qmath::ginibre_state(half, &mut rng);
            let mut m = CMatrix::zeros(dim, dim);
            for r in 0..half {
                for c in 0..half {
                    m[(b * half + r, b * half + c)] = block.matrix()[(r, c)];
                }
            }
            states.push(DensityOperator::new_unchecked(m, vec![dim]));
        }
        let report = gentle_measurement_check(&states, &povm)?;
        max_excess = max_excess.max(report.max_disturbance - report.bound);

        let a = crate::qmath::random_pure_state(&[dim], &mut rng);
        let b = crate::qmath::random_pure_state(&[dim], &mut rng);
        let fast = a.trace_distance_pure(&b);
        let dense = trace_distance(&a.to_density(), &b.to_density())?;
        max_identity_deviation = max_identity_deviation.max((fast - dense).abs());
    }
    if trials == 0 {
        max_excess = 0.0;
    }
    Ok(GentleSweepReport {
        trials,
        seed,
        max_excess,
        max_identity_deviation,
        pass: max_excess <= 1e-9 && max_identity_deviation <= 1e-9,
    })
}

// ---------------------------------------------------------------------------
// Decoupling (condition iii) check
// ---------------------------------------------------------------------------

/// Outcome of the decode-then-un-Pauli decoupling check.
#[derive(Debug, Clone, Serialize)]
pub struct DecouplingReport {
    pub eps_prime: f64,
    pub bound: f64,
    pub max_distance: f64,
    pub pass: bool,
}

/// Verify that the coherent decoder followed by the message-conditioned
/// un-Pauli returns the dilated no-encoding state: for each codeword
/// `‖(I ⊗ D'')(Υ_k) − (U_N^{⊗n} ⊗ I)(φ^{⊗n}) ⊗ |k⟩⟨k|‖ ≤ √(8ε') + 1e-6`.
pub fn verify_decoupling(
    m: &QuantumChannel,
    rho: &DensityOperator,
    n: usize,
    delta: f64,
    entries: &[BlockPauliIndex],
) -> Result<DecouplingReport> {
    let ctx = PackingContext::new(m, rho, n, delta)?;
    let successes = evaluate_codebook(&ctx, entries)?;
    let eps_prime = successes
        .iter()
        .map(|s| 1.0 - s)
        .fold(0.0f64, f64::max)
        .clamp(0.0, 1.0);

    // rebuild the decoder POVM for the isometry
    let mut upsilons = Vec::with_capacity(entries.len());
    for idx in entries {
        let proj = ctx.encoded_projector(idx)?;
        let sandwiched = &ctx.pi * proj * &ctx.pi;
        upsilons.push((&sandwiched + sandwiched.adjoint()).scale(0.5));
    }
    let povm = build_srm_from_upsilons(&upsilons, ctx.theta_n.dim())?;
    let d_iso = measurement_isometry(&povm)?;
    let dim_br = ctx.theta_n.dim();
    let j = d_iso.nrows() / dim_br;
    let dn = ctx.decomp.dim.pow(n as u32);

    // controlled un-Pauli on (B'^n, J): Σ_k U*_{f(k)} ⊗ |k⟩⟨k| (+ I on the
    // remainder outcome)
    let mut w = CMatrix::zeros(dn * j, dn * j);
    for (k, idx) in entries.iter().enumerate() {
        let u_conj = ctx.decomp.block_pauli_eigen(idx)?.conjugate();
        for r in 0..dn {
            for c in 0..dn {
                let z = u_conj[(r, c)];
                if z.norm() > 0.0 {
                    w[(r * j + k, c * j + k)] = z;
                }
            }
        }
    }
    for extra in entries.len()..j {
        for r in 0..dn {
            w[(r * j + extra, r * j + extra)] = ONE;
        }
    }

    // reference: the un-encoded dilated state on (E^n, B^n, B'^n)
    let ident = ctx.decomp.identity_index();
    let to_e_first = |ups: PureState| -> Result<PureState> {
        // (B^n, E^n, B'^n) → (E^n, B^n, B'^n)
        let k = ups.subsystem_dims().len() / 3;
        let mut perm = Vec::with_capacity(3 * k);
        for i in 0..k {
            perm.push(k + i);
        }
        for i in 0..k {
            perm.push(i);
        }
        for i in 0..k {
            perm.push(2 * k + i);
        }
        ups.permute_subsystems(&perm)
    };
    let reference = to_e_first(encoded_output_dilated(m, &ctx.decomp, &ident)?)?;
    let dim_e: usize = reference.subsystem_dims()[..n].iter().product();
    let dim_bn: usize = reference.subsystem_dims()[n..2 * n].iter().product();
    let ref_flat = reference.clone().with_subsystems(vec![dim_e, dim_bn, dn])?;

    let mut max_distance: f64 = 0.0;
    for (k, idx) in entries.iter().enumerate() {
        let ups = to_e_first(encoded_output_dilated(m, &ctx.decomp, idx)?)?
            .with_subsystems(vec![dim_e, dim_bn * dn])?;
        // coherent decode: (E^n) ⊗ (B^n B'^n) → (E^n) ⊗ (B^n B'^n) ⊗ J
        let lifted = tensor(&CMatrix::identity(dim_e, dim_e), &d_iso)?;
        let decoded = ups.apply(&lifted, vec![dim_e, dim_bn, dn, j]);
        // conditioned un-Pauli on (B'^n, J)
        let wl = tensor(
            &CMatrix::identity(dim_e * dim_bn, dim_e * dim_bn),
            &w,
        )?;
        let undone = decoded.apply(&wl, vec![dim_e, dim_bn, dn, j]);
        // target: reference ⊗ |k⟩
        let mut marker = CVector::zeros(j);
        marker[k] = ONE;
        let target = PureState::new_unchecked(
            crate::qmath::tensor_vec(ref_flat.amplitudes(), &marker),
            vec![dim_e, dim_bn, dn, j],
        );
        max_distance = max_distance.max(undone.trace_distance_pure(&target));
    }
    let bound = (8.0 * eps_prime).sqrt() + 1e-6;
    Ok(DecouplingReport {
        eps_prime,
        bound,
        max_distance,
        pass: max_distance <= bound,
    })
}

// ---------------------------------------------------------------------------
// Successive decoding for the two-sender channel
// ---------------------------------------------------------------------------

/// Effective channels and corner rates of the successive-decoding
/// construction.
#[derive(Debug)]
pub struct SuccessiveDecoding {
    /// `N₁: ω ↦ M(ω ⊗ ρ₂)`
    pub n1: QuantumChannel,
    /// `N̂₁: ω ↦ (I ⊗ M)(ω ⊗ φ₂)`, Alice's channel with Bob's purification
    /// retained
    pub n1_hat: QuantumChannel,
    /// `N₂: ω ↦ (I ⊗ M)(φ₁ ⊗ ω)`
    pub n2: QuantumChannel,
    /// `(I(A;C)_θ, I(B;C|A)_θ)`, corner point Q
    pub rates: (f64, f64),
    /// `|I(A;C) − (rsum − r2)|`, the chain-rule consistency defect
    pub chain_rule_defect: f64,
}

/// Build the successive-decoding channels and rate pair for fixed product
/// inputs.
pub fn successive_decode_rates(
    m: &QuantumChannel,
    rho1: &DensityOperator,
    rho2: &DensityOperator,
) -> Result<SuccessiveDecoding> {
    let d1 = rho1.dim();
    let d2 = rho2.dim();
    if m.dim_in() != d1 * d2 {
        return Err(Error::DimensionMismatch(m.dim_in(), d1 * d2));
    }

    // N₁ = M ∘ (ω ↦ ω ⊗ ρ₂)
    let rho2_eig = eig_hermitian(rho2.matrix())?;
    let mut n1_kraus = Vec::new();
    for (i, &q) in rho2_eig.values.iter().enumerate() {
        if q <= 0.0 {
            continue;
        }
        // insertion Kraus √q (I ⊗ |u_i⟩): (d1·d2) × d1
        let mut ins = CMatrix::zeros(d1 * d2, d1);
        for a in 0..d1 {
            for b in 0..d2 {
                ins[(a * d2 + b, a)] = rho2_eig.vectors[(b, i)].scale(q.sqrt());
            }
        }
        for k in m.kraus() {
            n1_kraus.push(k * &ins);
        }
    }
    let n1 = QuantumChannel::new(n1_kraus)?;

    // N̂₁ = (M ⊗ I_{C_B}) ∘ (ω ↦ ω ⊗ φ₂), output (C, C_B)
    let phi2 = rho2.purify(); // (B', C_B)
    let mut ins2 = CMatrix::zeros(d1 * d2 * d2, d1);
    for a in 0..d1 {
        for bc in 0..d2 * d2 {
            ins2[(a * d2 * d2 + bc, a)] = phi2.amplitudes()[bc];
        }
    }
    let idcb = CMatrix::identity(d2, d2);
    let mut hat_kraus = Vec::new();
    for k in m.kraus() {
        hat_kraus.push(tensor(k, &idcb)? * &ins2);
    }
    let n1_hat = QuantumChannel::new(hat_kraus)?;

    // N₂ = (I_{C_A} ⊗ M) ∘ (ω ↦ φ₁ ⊗ ω), with φ₁ ordered (C_A, A')
    let phi1 = rho1.purify().permute_subsystems(&[1, 0])?; // (C_A, A')
    let mut ins1 = CMatrix::zeros(d1 * d1 * d2, d2);
    for ca in 0..d1 * d1 {
        for b in 0..d2 {
            ins1[(ca * d2 + b, b)] = phi1.amplitudes()[ca];
        }
    }
    let idca = CMatrix::identity(d1, d1);
    let mut n2_kraus = Vec::new();
    for k in m.kraus() {
        n2_kraus.push(tensor(&idca, k)? * &ins1);
    }
    let n2 = QuantumChannel::new(n2_kraus)?;

    // rates from the two-sender θ
    let theta = crate::capacity::build_theta(m, rho1, rho2, false)?;
    let i_ac = mutual_information(&theta.state, &["A"], &["C"])?;
    let r2 = conditional_mutual_information(&theta.state, &["B"], &["C"], &["A"])?;
    let rsum = mutual_information(&theta.state, &["A", "B"], &["C"])?;

    // I(A;C) via N₁'s single-sender θ must agree with rsum − r2
    let i_ac_n1 = crate::capacity::single_sender_information(&n1, rho1)?;
    let chain_rule_defect = (i_ac_n1 - (rsum - r2)).abs().max((i_ac - (rsum - r2)).abs());

    Ok(SuccessiveDecoding {
        n1,
        n1_hat,
        n2,
        rates: (i_ac, r2),
        chain_rule_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{
        make_collective_phase_flip, make_completely_dephasing, random_channel,
    };
    use crate::qmath::ginibre_state;

    fn pi2() -> DensityOperator {
        DensityOperator::maximally_mixed(2)
    }

    #[test]
    fn resource_masses_binomial() {
        // ρ = diag(0.75, 0.25), n = 2: block masses (0.5625, 0.375, 0.0625)
        let rho = DensityOperator::from_probabilities(&[0.75, 0.25]).unwrap();
        let decomp = ResourceDecomposition::new(&rho, 2).unwrap();
        assert_eq!(decomp.classes.len(), 3);
        let masses: Vec<f64> = decomp.classes.iter().map(|c| c.prob_mass).collect();
        let mut sorted = masses.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((sorted[0] - 0.5625).abs() < 1e-12);
        assert!((sorted[1] - 0.375).abs() < 1e-12);
        assert!((sorted[2] - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn degenerate_spectrum_merges_blocks() {
        // maximally mixed: a single block spanning everything
        let decomp = ResourceDecomposition::new(&pi2(), 2).unwrap();
        assert_eq!(decomp.classes.len(), 1);
        assert_eq!(decomp.classes[0].dim, 4);
        assert!((decomp.classes[0].prob_mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resource_state_matches_class_decomposition() {
        for (rho, n) in [
            (DensityOperator::from_probabilities(&[0.75, 0.25]).unwrap(), 3),
            (pi2(), 2),
            (DensityOperator::from_probabilities(&[0.5, 0.3, 0.2]).unwrap(), 2),
        ] {
            let psi = build_entangled_resource(&rho, n).unwrap();
            let decomp = ResourceDecomposition::new(&rho, n).unwrap();
            let from_classes = decomp.resource_from_classes().unwrap();
            let overlap = psi.overlap(&from_classes).norm();
            assert!(
                overlap >= 1.0 - 1e-10,
                "overlap {overlap} for n = {n}"
            );
        }
    }

    #[test]
    fn resource_n1_is_maximally_entangled_for_pi() {
        let psi = build_entangled_resource(&pi2(), 1).unwrap();
        let phi = PureState::maximally_entangled(2);
        assert!(psi.trace_distance_pure(&phi) < 1e-12);
    }

    #[test]
    fn block_pauli_identity_and_unitarity() {
        let rho = DensityOperator::from_probabilities(&[0.75, 0.25]).unwrap();
        let decomp = ResourceDecomposition::new(&rho, 2).unwrap();
        let id = decomp
            .block_pauli_eigen(&decomp.identity_index())
            .unwrap();
        assert!(max_entry_diff(&id, &CMatrix::identity(4, 4)) < 1e-15);

        use rand::SeedableRng;
        let mut rng = ChaCha12Rng::seed_from_u64(51);
        for _ in 0..10 {
            let idx = decomp.sample_index(&mut rng);
            let u = decomp.block_pauli_eigen(&idx).unwrap();
            let defect = max_entry_diff(&(u.adjoint() * &u), &CMatrix::identity(4, 4));
            assert!(defect < 1e-12);
        }
    }

    #[test]
    fn block_pauli_n1_nondegenerate_is_sign_flip() {
        // 1-dim blocks admit only ±1 phases; classes are ordered by count
        // vector, so class 0 = counts (0,1) = eigen index 1
        let rho = DensityOperator::from_probabilities(&[0.75, 0.25]).unwrap();
        let decomp = ResourceDecomposition::new(&rho, 1).unwrap();
        assert_eq!(decomp.classes.len(), 2);
        assert_eq!(decomp.classes[0].members, vec![1]);
        let idx = BlockPauliIndex {
            entries: vec![(0, true), (0, false)],
        };
        let u = decomp.block_pauli_eigen(&idx).unwrap();
        let mut expect = CMatrix::identity(2, 2);
        expect[(1, 1)] = crate::qmath::cr(-1.0);
        assert!(max_entry_diff(&u, &expect) < 1e-15);
    }

    #[test]
    fn block_pauli_embeds_on_two_dim_class() {
        // n=2 qubits, class (1,1) spans {|01⟩, |10⟩}
        let rho = DensityOperator::from_probabilities(&[0.75, 0.25]).unwrap();
        let decomp = ResourceDecomposition::new(&rho, 2).unwrap();
        let mid = decomp
            .classes
            .iter()
            .position(|c| c.dim == 2)
            .unwrap();
        let mut idx = decomp.identity_index();
        idx.entries[mid] = (1, false); // X̂ on the block
        let u = decomp.block_pauli_eigen(&idx).unwrap();
        // swaps |01⟩ ↔ |10⟩ (indices 1 and 2), identity elsewhere
        assert!((u[(1, 2)] - ONE).norm() < 1e-15);
        assert!((u[(2, 1)] - ONE).norm() < 1e-15);
        assert!((u[(0, 0)] - ONE).norm() < 1e-15);
        assert!((u[(3, 3)] - ONE).norm() < 1e-15);
    }

    #[test]
    fn encoding_preserves_tensor_power() {
        // condition ii): U ρ^{⊗n} U† = ρ^{⊗n}
        use rand::SeedableRng;
        let mut rng = ChaCha12Rng::seed_from_u64(52);
        let rho = ginibre_state(2, &mut rng);
        let decomp = ResourceDecomposition::new(&rho, 2).unwrap();
        let rn = tensor_power(rho.matrix(), 2).unwrap();
        for _ in 0..20 {
            let idx = decomp.sample_index(&mut rng);
            let u = decomp.block_pauli_physical(&idx).unwrap();
            let conj = &u * &rn * u.adjoint();
            let a = DensityOperator::new_unchecked(conj, vec![4]);
            let b = DensityOperator::new_unchecked(rn.clone(), vec![4]);
            assert!(trace_distance(&a, &b).unwrap() < 1e-9);
        }
    }

    #[test]
    fn transpose_form_matches_direct_form() {
        use rand::SeedableRng;
        let mut rng = ChaCha12Rng::seed_from_u64(53);
        let m = make_completely_dephasing(2);
        let rho = ginibre_state(2, &mut rng);
        let decomp = ResourceDecomposition::new(&rho, 2).unwrap();
        let ctx = PackingContext::new(&m, &rho, 2, 0.5).unwrap();
        for _ in 0..10 {
            let idx = decomp.sample_index(&mut rng);
            let direct = encoded_output_direct(&m, &decomp, &idx).unwrap();
            let transpose = ctx.encoded_output(&idx).unwrap();
            assert!(trace_distance(&direct, &transpose).unwrap() < 1e-9);
        }
    }

    #[test]
    fn identity_encoding_gives_theta_power() {
        let m = make_completely_dephasing(2);
        let rho = DensityOperator::from_probabilities(&[0.7, 0.3]).unwrap();
        let ctx = PackingContext::new(&m, &rho, 2, 0.5).unwrap();
        let sigma = ctx.encoded_output(&ctx.decomp.identity_index()).unwrap();
        assert!(trace_distance(&sigma, &ctx.theta_n).unwrap() < 1e-12);
    }

    #[test]
    fn average_state_closed_form_matches_enumeration() {
        let m = QuantumChannel::identity(2);
        for n in [1usize, 2] {
            let rho = DensityOperator::from_probabilities(&[0.75, 0.25]).unwrap();
            let closed = average_output_state(&m, &rho, n).unwrap();
            let enumerated = average_output_state_enumerated(&m, &rho, n, 4096).unwrap();
            assert!(
                trace_distance(&closed, &enumerated).unwrap() < 1e-8,
                "n = {n}"
            );
        }
    }

    #[test]
    fn average_state_cross_blocks_vanish() {
        // off-block entries of the enumerated average are ≤ 1e-10
        let m = QuantumChannel::identity(2);
        let rho = DensityOperator::from_probabilities(&[0.75, 0.25]).unwrap();
        let avg = average_output_state_enumerated(&m, &rho, 2, 4096).unwrap();
        let decomp = ResourceDecomposition::new(&rho, 2).unwrap();
        // class of each B'-side index
        let mut class_of = [0usize; 4];
        for (ci, c) in decomp.classes.iter().enumerate() {
            for &mb in &c.members {
                class_of[mb] = ci;
            }
        }
        let m4 = avg.matrix();
        for r in 0..16 {
            for c in 0..16 {
                let (rb, rr) = (r / 4, r % 4);
                let (cb, cc) = (c / 4, c % 4);
                let _ = (rb, cb);
                if class_of[rr] != class_of[cc] {
                    assert!(
                        m4[(r, c)].norm() <= 1e-10,
                        "cross-block entry at ({r},{c})"
                    );
                }
            }
        }
    }

    #[test]
    fn average_state_n1_qubit() {
        // n = 1 identity channel: average = Σ_α p_α π_α ⊗ π_α
        let m = QuantumChannel::identity(2);
        let rho = DensityOperator::from_probabilities(&[0.75, 0.25]).unwrap();
        let avg = average_output_state(&m, &rho, 1).unwrap();
        let mut expect = CMatrix::zeros(4, 4);
        expect[(0, 0)] = crate::qmath::cr(0.75);
        expect[(3, 3)] = crate::qmath::cr(0.25);
        let expect = DensityOperator::new_unchecked(expect, vec![2, 2]);
        assert!(trace_distance(&avg, &expect).unwrap() < 1e-12);
    }

    #[test]
    fn srm_single_projector() {
        // one codeword whose Υ is a projector: Λ₁ is that projector
        let p = crate::qmath::basis_projector(4, 2);
        let povm =
            build_srm_decoder(&CMatrix::identity(4, 4), std::slice::from_ref(&p)).unwrap();
        povm.validate().unwrap();
        assert!(max_entry_diff(&povm.elements[0], &p) < 1e-10);
    }

    #[test]
    fn srm_orthogonal_supports() {
        let mut p1 = CMatrix::zeros(4, 4);
        p1[(0, 0)] = ONE;
        p1[(1, 1)] = ONE;
        let mut p2 = CMatrix::zeros(4, 4);
        p2[(2, 2)] = ONE;
        p2[(3, 3)] = ONE;
        let povm = build_srm_decoder(&CMatrix::identity(4, 4), &[p1.clone(), p2.clone()]).unwrap();
        povm.validate().unwrap();
        assert!(max_entry_diff(&povm.elements[0], &p1) < 1e-10);
        assert!(max_entry_diff(&povm.elements[1], &p2) < 1e-10);
    }

    #[test]
    fn srm_random_instances_are_povms() {
        use rand::SeedableRng;
        let mut rng = ChaCha12Rng::seed_from_u64(54);
        for _ in 0..10 {
            let pi = CMatrix::identity(6, 6);
            let projs: Vec<CMatrix> = (0..3)
                .map(|_| {
                    let g = ginibre_state(6, &mut rng);
                    let eig = eig_hermitian(g.matrix()).unwrap();
                    // random rank-2 projector
                    let mut p = CMatrix::zeros(6, 6);
                    for k in 0..2 {
                        let v = eig.vectors.column(k);
                        p += v * v.adjoint();
                    }
                    p
                })
                .collect();
            let povm = build_srm_decoder(&pi, &projs).unwrap();
            povm.validate().unwrap();
        }
    }

    #[test]
    fn srm_degenerate_rejected() {
        let z = CMatrix::zeros(3, 3);
        assert!(matches!(
            build_srm_decoder(&z, &[CMatrix::identity(3, 3)]),
            Err(Error::DegenerateDecoder(_))
        ));
    }

    #[test]
    fn superdense_coding_perfect_recovery() {
        // noiseless qubit, ρ = π, n = 1: the 4 Pauli codewords are the Bell
        // states and the square-root decoder distinguishes them exactly
        let m = QuantumChannel::identity(2);
        let entries: Vec<BlockPauliIndex> = (0..4)
            .map(|g| BlockPauliIndex {
                entries: vec![(g, false)],
            })
            .collect();
        let successes = decode_explicit_codebook(&m, &pi2(), 1, 0.5, &entries).unwrap();
        for (g, s) in successes.iter().enumerate() {
            assert!(s >= &(1.0 - 1e-9), "codeword {g}: success {s}");
        }
    }

    #[test]
    fn single_codeword_success_bound() {
        // N = 1: success ≥ Tr σ Π_s − √(8ε) (the gentle-operator chain)
        let m = make_completely_dephasing(2);
        let rho = DensityOperator::from_probabilities(&[0.7, 0.3]).unwrap();
        let ctx = PackingContext::new(&m, &rho, 3, 0.35).unwrap();
        let idx = ctx.decomp.identity_index();
        let success = evaluate_codebook(&ctx, std::slice::from_ref(&idx)).unwrap()[0];
        let p1 = ctx.output_expectation(&idx, &ctx.pi).unwrap();
        let proj = ctx.encoded_projector(&idx).unwrap();
        let p2 = ctx.output_expectation(&idx, &proj).unwrap();
        let eps = (1.0 - p1).max(1.0 - p2).max(0.0);
        assert!(
            success >= p2 - (8.0 * eps).sqrt() - 1e-9,
            "success {success}, Tr σ Π_s = {p2}, ε = {eps}"
        );
    }

    #[test]
    fn x_type_encoding_flips_copy_state() {
        // Δ on a maximally mixed qubit at n = 1: the merged block is the
        // whole space, and the X encoding turns θ = ½Σ|xx⟩⟨xx| into the
        // flipped copy state ½Σ|x⟩⟨x| ⊗ |x⊕1⟩⟨x⊕1|
        let m = make_completely_dephasing(2);
        let ctx = PackingContext::new(&m, &pi2(), 1, 0.5).unwrap();
        assert_eq!(ctx.decomp.classes.len(), 1);
        let x_idx = BlockPauliIndex {
            entries: vec![(1, false)],
        };
        let sigma = ctx.encoded_output(&x_idx).unwrap();
        let mut expect = CMatrix::zeros(4, 4);
        expect[(1, 1)] = crate::qmath::cr(0.5); // |0⟩⟨0| ⊗ |1⟩⟨1|
        expect[(2, 2)] = crate::qmath::cr(0.5); // |1⟩⟨1| ⊗ |0⟩⟨0|
        let expect = DensityOperator::new_unchecked(expect, vec![2, 2]);
        assert!(trace_distance(&sigma, &expect).unwrap() < 1e-12);
    }

    #[test]
    fn superdense_n2_four_paulis_on_merged_block() {
        // ρ = π at n = 2 merges into one 4-dim block; four distinct
        // generalized Paulis give orthogonal outputs through the noiseless
        // channel and decode perfectly
        let m = QuantumChannel::identity(2);
        let entries: Vec<BlockPauliIndex> = [0usize, 1, 4, 5]
            .iter()
            .map(|&g| BlockPauliIndex {
                entries: vec![(g, false)],
            })
            .collect();
        let successes = decode_explicit_codebook(&m, &pi2(), 2, 0.5, &entries).unwrap();
        for (k, s) in successes.iter().enumerate() {
            assert!(*s >= 1.0 - 1e-9, "codeword {k}: success {s}");
        }
    }

    #[test]
    fn encoded_projector_trace_invariant() {
        // property (p3): Tr Π_s = Tr Π_θ exactly under unitary conjugation
        use rand::SeedableRng;
        let m = make_completely_dephasing(2);
        let rho = DensityOperator::from_probabilities(&[0.7, 0.3]).unwrap();
        let ctx = PackingContext::new(&m, &rho, 3, 0.35).unwrap();
        let base: f64 = ctx.pi_theta.diagonal().iter().map(|z| z.re).sum();
        let mut rng = ChaCha12Rng::seed_from_u64(61);
        for _ in 0..5 {
            let idx = ctx.decomp.sample_index(&mut rng);
            let proj = ctx.encoded_projector(&idx).unwrap();
            let tr: f64 = proj.diagonal().iter().map(|z| z.re).sum();
            assert!((tr - base).abs() < 1e-9);
        }
    }

    #[test]
    fn packing_simulation_dephasing() {
        let m = make_completely_dephasing(2);
        let cfg = PackingConfig {
            n: 3,
            rate: 0.5,
            n_codewords: None,
            gamma: 0.01,
            delta: 0.34,
            trials: 4,
            seed: 11,
        };
        let report = simulate_packing(&m, &pi2(), &cfg).unwrap();
        assert_eq!(report.n_codewords, 2); // 2^{⌊3·0.5⌋}
        assert!(report.eps_measured >= 0.0 && report.eps_measured <= 1.0);
        assert!(report.avg_success >= report.bound);
        assert!(report.post_expurgation_max_error <= 1.0);
        assert!((report.pass_fraction - 1.0).abs() < 1e-12);
        // deterministic rerun
        let report2 = simulate_packing(&m, &pi2(), &cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&report).unwrap(),
            serde_json::to_string(&report2).unwrap()
        );
    }

    #[test]
    fn hayashi_nagaoka_cases() {
        let id = CMatrix::identity(4, 4);
        let zero = CMatrix::zeros(4, 4);
        // S = I, T = 0: both sides vanish
        let margin = hayashi_nagaoka_check(&id, &zero).unwrap();
        assert!(margin.abs() < 1e-10);

        let half = CMatrix::identity(4, 4).scale(0.5);
        let margin = hayashi_nagaoka_check(&half, &zero).unwrap();
        assert!(margin >= -1e-8);

        // preconditions
        let too_big = CMatrix::identity(4, 4).scale(1.5);
        assert!(matches!(
            hayashi_nagaoka_check(&too_big, &zero),
            Err(Error::BadOperands(_))
        ));
        let neg = CMatrix::identity(4, 4).scale(-0.1);
        assert!(matches!(
            hayashi_nagaoka_check(&id, &neg),
            Err(Error::BadOperands(_))
        ));
    }

    #[test]
    fn hayashi_nagaoka_random_sweep() {
        use rand::SeedableRng;
        let mut rng = ChaCha12Rng::seed_from_u64(55);
        for _ in 0..100 {
            let d = rng.random_range(2..=8usize);
            // random 0 ≤ S ≤ I via a squashed Hermitian
            let g = crate::qmath::ginibre_matrix(d, d, &mut rng);
            let h = (&g + g.adjoint()).scale(0.5);
            let s = hermitian_function(&h, |x| 1.0 / (1.0 + (-x).exp())).unwrap();
            let t = ginibre_state(d, &mut rng).matrix().scale(rng.random::<f64>() * 3.0);
            let margin = hayashi_nagaoka_check(&s, &t).unwrap();
            assert!(margin >= -1e-8, "margin {margin}");
        }
    }

    #[test]
    fn gentle_measurement_projective_case() {
        // projective measurement with states inside the projectors:
        // no disturbance
        let states = vec![
            DensityOperator::basis_state(4, 0),
            DensityOperator::basis_state(4, 2),
        ];
        let mut p0 = CMatrix::zeros(4, 4);
        p0[(0, 0)] = ONE;
        p0[(1, 1)] = ONE;
        let mut p1 = CMatrix::zeros(4, 4);
        p1[(2, 2)] = ONE;
        p1[(3, 3)] = ONE;
        let povm = DecoderPOVM {
            elements: vec![p0, p1],
            dim: 4,
        };
        let report = gentle_measurement_check(&states, &povm).unwrap();
        assert!(report.epsilon < 1e-12);
        assert!(report.max_disturbance < 1e-9);
        assert!(report.pass);
    }

    #[test]
    fn gentle_measurement_random_instances() {
        use rand::SeedableRng;
        let mut rng = ChaCha12Rng::seed_from_u64(56);
        for _ in 0..10 {
            let dim = 4;
            // states close to orthogonal projectors, measured by a slightly
            // noisy POVM: ε stays small, disturbance within √(8ε)
            let mix: f64 = 0.02 + 0.03 * rng.random::<f64>();
            let mut p0 = CMatrix::zeros(dim, dim);
            p0[(0, 0)] = ONE;
            p0[(1, 1)] = ONE;
            let mut p1 = CMatrix::zeros(dim, dim);
            p1[(2, 2)] = ONE;
            p1[(3, 3)] = ONE;
            let el0 = p0.scale(1.0 - mix) + p1.scale(mix);
            let el1 = p1.scale(1.0 - mix) + p0.scale(mix);
            let povm = DecoderPOVM {
                elements: vec![el0, el1],
                dim,
            };
            let mut m0 = CMatrix::zeros(dim, dim);
            m0[(0, 0)] = crate::qmath::cr(0.6);
            m0[(1, 1)] = crate::qmath::cr(0.4);
            let mut m1 = CMatrix::zeros(dim, dim);
            m1[(2, 2)] = crate::qmath::cr(0.5);
            m1[(3, 3)] = crate::qmath::cr(0.5);
            let states = vec![
                DensityOperator::new_unchecked(m0, vec![dim]),
                DensityOperator::new_unchecked(m1, vec![dim]),
            ];
            let report = gentle_measurement_check(&states, &povm).unwrap();
            assert!(report.pass, "{report:?}");
        }
    }

    #[test]
    fn pure_state_distance_identity() {
        // ‖ζ - ψ‖ = 2√(1 - |⟨ζ|ψ⟩|²) against the dense eigenvalue route
        use rand::SeedableRng;
        let mut rng = ChaCha12Rng::seed_from_u64(57);
        for _ in 0..20 {
            let a = crate::qmath::random_pure_state(&[4], &mut rng);
            let b = crate::qmath::random_pure_state(&[4], &mut rng);
            let fast = a.trace_distance_pure(&b);
            let dense = trace_distance(&a.to_density(), &b.to_density()).unwrap();
            assert!((fast - dense).abs() < 1e-9);
        }
    }

    #[test]
    fn decoupling_superdense() {
        // noiseless superdense instance: ε' = 0 and the decoupling defect
        // stays within the bound
        let m = QuantumChannel::identity(2);
        let entries: Vec<BlockPauliIndex> = (0..4)
            .map(|g| BlockPauliIndex {
                entries: vec![(g, false)],
            })
            .collect();
        let report = verify_decoupling(&m, &pi2(), 1, 0.5, &entries).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.max_distance < 1e-6);
    }

    #[test]
    fn decoupling_dephasing_n2() {
        let m = make_completely_dephasing(2);
        let rho = DensityOperator::from_probabilities(&[0.6, 0.4]).unwrap();
        let decomp = ResourceDecomposition::new(&rho, 2).unwrap();
        use rand::SeedableRng;
        let mut rng = ChaCha12Rng::seed_from_u64(58);
        let entries: Vec<BlockPauliIndex> =
            (0..2).map(|_| decomp.sample_index(&mut rng)).collect();
        let report = verify_decoupling(&m, &rho, 2, 0.5, &entries).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn successive_decoding_phase_flip() {
        let m = make_collective_phase_flip(2, &[0.5, 0.5]).unwrap();
        let dec = successive_decode_rates(&m, &pi2(), &pi2()).unwrap();
        assert!((dec.rates.0 - 1.0).abs() < 1e-9);
        assert!((dec.rates.1 - 2.0).abs() < 1e-9);
        assert!(dec.chain_rule_defect < 1e-9);

        let m = make_collective_phase_flip(2, &[1.0, 0.0]).unwrap();
        let dec = successive_decode_rates(&m, &pi2(), &pi2()).unwrap();
        assert!((dec.rates.0 - 2.0).abs() < 1e-9);
        assert!((dec.rates.1 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn successive_decoding_chain_rule_random() {
        use rand::SeedableRng;
        let mut rng = ChaCha12Rng::seed_from_u64(59);
        for _ in 0..10 {
            let m = random_channel(4, 2, 2, &mut rng).unwrap();
            let rho1 = ginibre_state(2, &mut rng);
            let rho2 = ginibre_state(2, &mut rng);
            let dec = successive_decode_rates(&m, &rho1, &rho2).unwrap();
            assert!(dec.chain_rule_defect < 1e-9, "defect {}", dec.chain_rule_defect);
        }
    }

    #[test]
    fn cq_commutation_with_block_encodings() {
        // Δ^{⊗n} ∘ U_s = Δ^{⊗n} ∘ U_s ∘ Δ^{⊗n} as maps, for block-Pauli
        // encodings built over a diagonal resource state
        use rand::SeedableRng;
        let mut rng = ChaCha12Rng::seed_from_u64(60);
        let rho = DensityOperator::from_probabilities(&[0.7, 0.3]).unwrap();
        let decomp = ResourceDecomposition::new(&rho, 2).unwrap();
        let deph2 = tensor_power_channel(&make_completely_dephasing(2), 2).unwrap();
        for _ in 0..8 {
            let idx = decomp.sample_index(&mut rng);
            let u = decomp.block_pauli_physical(&idx).unwrap();
            for _ in 0..20 {
                let x = ginibre_state(4, &mut rng);
                let lhs = deph2.apply_matrix(&(&u * x.matrix() * u.adjoint()));
                let dx = deph2.apply_matrix(x.matrix());
                let rhs = deph2.apply_matrix(&(&u * dx * u.adjoint()));
                assert!(max_entry_diff(&lhs, &rhs) < 1e-9);
            }
        }
    }
}
