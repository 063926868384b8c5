//! Capacity-region machinery: the θ state for a two-sender channel with
//! product inputs, the rate pentagon and its corner points, entropic
//! objectives optimized over input states, the collective phase-flip closed
//! form, and the resource corner-rate bundles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::channels::{
    dephasing_environment_vectors, is_generalized_dephasing, make_completely_dephasing,
    stinespring_dilation, QuantumChannel,
};
use crate::entropy::{
    coherent_information, conditional_mutual_information, mutual_information, shannon_entropy,
    von_neumann_entropy, LabeledState,
};
use crate::error::{Error, Result};
use crate::qmath::{ginibre_matrix, tensor, CMatrix, CVector, DensityOperator, HERM_TOL};

// ---------------------------------------------------------------------------
// θ states
// ---------------------------------------------------------------------------

/// The joint state after sending half of each sender's purification through
/// the channel: `θ^{ABC} = (I ⊗ M)(φ₁ ⊗ φ₂)`, or its Stinespring extension
/// `θ^{ABCE}` when built purified.
#[derive(Debug, Clone)]
pub struct ThetaState {
    pub state: LabeledState,
    pub channel: QuantumChannel,
    pub rho1: DensityOperator,
    pub rho2: DensityOperator,
    pub purified: bool,
}

/// Build θ for a two-input channel and product input `ρ₁ ⊗ ρ₂`. With
/// `purified` the environment system E of the Stinespring dilation is
/// retained and the state carries labels A, B, C, E.
pub fn build_theta(
    m: &QuantumChannel,
    rho1: &DensityOperator,
    rho2: &DensityOperator,
    purified: bool,
) -> Result<ThetaState> {
    let d1 = rho1.dim();
    let d2 = rho2.dim();
    if m.dim_in() != d1 * d2 {
        return Err(Error::DimensionMismatch(m.dim_in(), d1 * d2));
    }
    // purify() returns (system, reference) = (A', A); build
    // φ₁^{A A'} ⊗ φ₂^{B B'} reordered to (A, B, A', B') so the channel eats
    // the primed halves and the references stay behind
    let phi = rho1
        .purify()
        .tensor(&rho2.purify())
        .permute_subsystems(&[1, 3, 0, 2])?;
    let v = stinespring_dilation(m);
    let retained = d1 * d2;
    let lifted = tensor(&CMatrix::identity(retained, retained), v.matrix())?;
    let dilated = phi.apply(&lifted, vec![d1, d2, v.dim_b(), v.env_dim()]);
    let state = if purified {
        LabeledState::new(dilated.to_density(), &["A", "B", "C", "E"])?
    } else {
        LabeledState::new(dilated.to_density().partial_trace(&[0, 1, 2])?, &["A", "B", "C"])?
    };
    Ok(ThetaState {
        state,
        channel: m.clone(),
        rho1: rho1.clone(),
        rho2: rho2.clone(),
        purified,
    })
}

/// Single-sender analogue `θ^{AB} = (I ⊗ N)(φ^{AA'})`.
pub fn single_sender_theta(n: &QuantumChannel, rho: &DensityOperator) -> Result<LabeledState> {
    if n.dim_in() != rho.dim() {
        return Err(Error::DimensionMismatch(n.dim_in(), rho.dim()));
    }
    // reorder (A', A) → (A, A') so the system half goes through the channel
    let phi = rho.purify().permute_subsystems(&[1, 0])?;
    let v = stinespring_dilation(n);
    let lifted = tensor(&CMatrix::identity(rho.dim(), rho.dim()), v.matrix())?;
    let dilated = phi.apply(&lifted, vec![rho.dim(), v.dim_b(), v.env_dim()]);
    LabeledState::new(dilated.to_density().partial_trace(&[0, 1])?, &["A", "B"])
}

/// `I(A;B)_θ` for a single-sender channel and input ρ.
pub fn single_sender_information(n: &QuantumChannel, rho: &DensityOperator) -> Result<f64> {
    let theta = single_sender_theta(n, rho)?;
    mutual_information(&theta, &["A"], &["B"])
}

/// `I(AB;C)_θ` where the purifying system of a joint (not necessarily
/// product) input plays the role of AB.
pub fn joint_input_sum_information(m: &QuantumChannel, rho: &DensityOperator) -> Result<f64> {
    if m.dim_in() != rho.dim() {
        return Err(Error::DimensionMismatch(m.dim_in(), rho.dim()));
    }
    let phi = rho.purify().permute_subsystems(&[1, 0])?;
    let v = stinespring_dilation(m);
    let lifted = tensor(&CMatrix::identity(rho.dim(), rho.dim()), v.matrix())?;
    let dilated = phi.apply(&lifted, vec![rho.dim(), v.dim_b(), v.env_dim()]);
    let theta = LabeledState::new(dilated.to_density().partial_trace(&[0, 1])?, &["R", "C"])?;
    mutual_information(&theta, &["R"], &["C"])
}

// ---------------------------------------------------------------------------
// Rate pentagons
// ---------------------------------------------------------------------------

/// Rate region `{R₁ ≤ r1, R₂ ≤ r2, R₁+R₂ ≤ rsum}` for fixed inputs, with its
/// vertex list in counter-clockwise order starting at the origin.
#[derive(Debug, Clone, Serialize)]
pub struct RegionPentagon {
    pub r1: f64,
    pub r2: f64,
    pub rsum: f64,
    pub vertices: Vec<(f64, f64)>,
}

impl RegionPentagon {
    pub fn new(r1: f64, r2: f64, rsum: f64) -> Self {
        let raw = [
            (0.0, 0.0),
            (r1, 0.0),
            (r1, rsum - r1),
            (rsum - r2, r2),
            (0.0, r2),
        ];
        let mut vertices: Vec<(f64, f64)> = Vec::new();
        for v in raw {
            if !vertices
                .iter()
                .any(|u| (u.0 - v.0).abs() < 1e-12 && (u.1 - v.1).abs() < 1e-12)
            {
                vertices.push(v);
            }
        }
        Self {
            r1,
            r2,
            rsum,
            vertices,
        }
    }

    /// Pentagon shape invariant `0 ≤ max(r1, r2) ≤ rsum ≤ r1 + r2`, up to
    /// tolerance.
    pub fn is_consistent(&self, tol: f64) -> bool {
        self.r1 >= -tol
            && self.r2 >= -tol
            && self.rsum + tol >= self.r1.max(self.r2)
            && self.rsum <= self.r1 + self.r2 + tol
    }

    pub fn contains(&self, rate1: f64, rate2: f64, tol: f64) -> bool {
        rate1 >= -tol
            && rate2 >= -tol
            && rate1 <= self.r1 + tol
            && rate2 <= self.r2 + tol
            && rate1 + rate2 <= self.rsum + tol
    }
}

/// Evaluate the pentagon of Eq-style bounds `(I(A;C|B), I(B;C|A), I(AB;C))`
/// at fixed product inputs.
pub fn region_for_inputs(
    m: &QuantumChannel,
    rho1: &DensityOperator,
    rho2: &DensityOperator,
) -> Result<RegionPentagon> {
    let theta = build_theta(m, rho1, rho2, false)?;
    region_of_theta(&theta.state)
}

/// Pentagon of an already-built θ state with labels A, B, C.
pub fn region_of_theta(state: &LabeledState) -> Result<RegionPentagon> {
    let r1 = conditional_mutual_information(state, &["A"], &["C"], &["B"])?;
    let r2 = conditional_mutual_information(state, &["B"], &["C"], &["A"])?;
    let rsum = mutual_information(state, &["A", "B"], &["C"])?;
    Ok(RegionPentagon::new(r1, r2, rsum))
}

/// Named corner points of a pentagon: O the origin, P where Alice is
/// decoded last, Q where Bob is decoded last, R where Alice stays silent.
#[derive(Debug, Clone, Serialize)]
pub struct CornerPoints {
    pub o: (f64, f64),
    pub p: (f64, f64),
    pub q: (f64, f64),
    pub r: (f64, f64),
}

pub fn corner_points(pent: &RegionPentagon) -> CornerPoints {
    CornerPoints {
        o: (0.0, 0.0),
        p: (pent.r1, pent.rsum - pent.r1),
        q: (pent.rsum - pent.r2, pent.r2),
        r: (0.0, pent.r2),
    }
}

/// Closed-form region of the collective phase-flip channel:
/// `(2 log d, 2 log d, 4 log d − H(p))`.
pub fn phase_flip_region_closed_form(d: usize, p: &[f64]) -> Result<RegionPentagon> {
    if p.len() != d {
        return Err(Error::BadDistribution(format!(
            "expected {d} probabilities, got {}",
            p.len()
        )));
    }
    crate::qmath::validate_distribution(p)?;
    let log_d = (d as f64).log2();
    Ok(RegionPentagon::new(
        2.0 * log_d,
        2.0 * log_d,
        4.0 * log_d - shannon_entropy(p),
    ))
}

// ---------------------------------------------------------------------------
// Optimization over input states
// ---------------------------------------------------------------------------

/// Multi-start ascent configuration.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub step: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 8,
            step: 0.1,
            tol: 1e-9,
            max_iters: 5000,
            seed: 0,
        }
    }
}

/// Density matrices are parameterized as `ρ = G G† / Tr(G G†)` with `G` a
/// free complex matrix, so ascent steps stay inside the state space. A
/// degenerate `G ≈ 0` falls back to the maximally mixed state instead of
/// dividing by a vanishing trace.
fn params_to_state(params: &[f64], dim: usize) -> DensityOperator {
    let g = CMatrix::from_fn(dim, dim, |i, j| {
        let k = 2 * (i * dim + j);
        crate::qmath::c(params[k], params[k + 1])
    });
    let m = &g * g.adjoint();
    let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
    if !tr.is_finite() || tr < 1e-12 {
        return DensityOperator::maximally_mixed(dim);
    }
    DensityOperator::new_unchecked(m, vec![dim])
}

fn state_param_len(dim: usize) -> usize {
    2 * dim * dim
}

fn identity_params(dim: usize) -> Vec<f64> {
    let mut p = vec![0.0; state_param_len(dim)];
    for i in 0..dim {
        p[2 * (i * dim + i)] = 1.0;
    }
    p
}

fn random_params<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    let g = ginibre_matrix(dim, dim, rng);
    let mut p = vec![0.0; state_param_len(dim)];
    for i in 0..dim {
        for j in 0..dim {
            p[2 * (i * dim + j)] = g[(i, j)].re;
            p[2 * (i * dim + j) + 1] = g[(i, j)].im;
        }
    }
    p
}

const GRAD_H: f64 = 1e-5;

/// Projected concave ascent with central-difference gradients and step
/// halving on non-improvement. Returns the best parameters, the best value,
/// and whether the step shrank below tolerance before the iteration cap.
fn ascend(
    f: &dyn Fn(&[f64]) -> f64,
    mut x: Vec<f64>,
    step0: f64,
    tol: f64,
    max_iters: usize,
) -> (Vec<f64>, f64, bool) {
    let mut best = f(&x);
    let mut step = step0;
    let mut grad: Option<Vec<f64>> = None;
    for _ in 0..max_iters {
        if step < tol {
            return (x, best, true);
        }
        let g = grad.get_or_insert_with(|| {
            let mut g = vec![0.0; x.len()];
            let mut probe = x.clone();
            for k in 0..x.len() {
                probe[k] = x[k] + GRAD_H;
                let fp = f(&probe);
                probe[k] = x[k] - GRAD_H;
                let fm = f(&probe);
                probe[k] = x[k];
                g[k] = (fp - fm) / (2.0 * GRAD_H);
            }
            g
        });
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return (x, best, true);
        }
        let candidate: Vec<f64> = x
            .iter()
            .zip(g.iter())
            .map(|(xi, gi)| xi + step * gi / norm)
            .collect();
        let fc = f(&candidate);
        if fc > best {
            x = candidate;
            best = fc;
            grad = None;
        } else {
            step *= 0.5;
        }
    }
    (x, best, false)
}

/// Result of an input-state optimization.
#[derive(Debug, Clone)]
pub struct OptimizedValue {
    pub value: f64,
    pub argmax: DensityOperator,
    pub converged: bool,
}

/// Entanglement-assisted capacity of a single-sender channel,
/// `C_E = max_ρ I(A;B)_θ`, by multi-start ascent over the input state. The
/// value is certified by direct evaluation at the returned maximizer, so it
/// is a lower bound on the true maximum.
pub fn ea_capacity_single(n: &QuantumChannel, cfg: &OptimizerConfig) -> Result<OptimizedValue> {
    let dim = n.dim_in();
    let objective = |params: &[f64]| -> f64 {
        let rho = params_to_state(params, dim);
        match single_sender_information(n, &rho) {
            Ok(v) if v.is_finite() => v,
            _ => f64::NEG_INFINITY,
        }
    };
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for start in 0..cfg.starts.max(1) {
        let x0 = if start == 0 {
            identity_params(dim)
        } else {
            random_params(dim, &mut rng)
        };
        let (x, v, converged) = ascend(&objective, x0, cfg.step, cfg.tol, cfg.max_iters);
        if best.as_ref().map(|b| v > b.1).unwrap_or(true) {
            best = Some((x, v, converged));
        }
    }
    let (x, _, converged) = best.unwrap();
    let argmax = params_to_state(&x, dim);
    let value = single_sender_information(n, &argmax)?;
    Ok(OptimizedValue {
        value,
        argmax,
        converged,
    })
}

/// Result of the sum-rate optimization over product inputs.
#[derive(Debug, Clone)]
pub struct SumRateResult {
    pub value: f64,
    pub rho1: DensityOperator,
    pub rho2: DensityOperator,
    pub converged: bool,
}

/// Objectives an input-pair optimizer can target: the pentagon coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionObjective {
    R1,
    R2,
    Sum,
}

/// `max_{ρ₁,ρ₂} I(AB;C)_θ` over product inputs by block-coordinate ascent
/// (alternately optimizing each sender's state). A certified lower bound on
/// the single-letter sum-rate maximum.
pub fn sum_rate_bound(
    m: &QuantumChannel,
    dims: (usize, usize),
    cfg: &OptimizerConfig,
) -> Result<SumRateResult> {
    optimize_product_inputs(m, dims, RegionObjective::Sum, cfg)
}

/// Block-coordinate ascent of a pentagon coordinate over product inputs.
pub fn optimize_product_inputs(
    m: &QuantumChannel,
    dims: (usize, usize),
    objective: RegionObjective,
    cfg: &OptimizerConfig,
) -> Result<SumRateResult> {
    let (d1, d2) = dims;
    if m.dim_in() != d1 * d2 {
        return Err(Error::DimensionMismatch(m.dim_in(), d1 * d2));
    }
    let eval = |x1: &[f64], x2: &[f64]| -> f64 {
        let rho1 = params_to_state(x1, d1);
        let rho2 = params_to_state(x2, d2);
        match build_theta(m, &rho1, &rho2, false).and_then(|t| match objective {
            RegionObjective::Sum => mutual_information(&t.state, &["A", "B"], &["C"]),
            RegionObjective::R1 => {
                conditional_mutual_information(&t.state, &["A"], &["C"], &["B"])
            }
            RegionObjective::R2 => {
                conditional_mutual_information(&t.state, &["B"], &["C"], &["A"])
            }
        }) {
            Ok(v) if v.is_finite() => v,
            _ => f64::NEG_INFINITY,
        }
    };

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(Vec<f64>, Vec<f64>, f64, bool)> = None;
    for start in 0..cfg.starts.max(1) {
        let (mut x1, mut x2) = if start == 0 {
            (identity_params(d1), identity_params(d2))
        } else {
            (random_params(d1, &mut rng), random_params(d2, &mut rng))
        };
        let mut value = eval(&x1, &x2);
        let mut converged = false;
        // alternate full ascents on each block until neither improves
        for _round in 0..32 {
            let f1 = |p: &[f64]| eval(p, &x2);
            let (nx1, v1, _) = ascend(&f1, x1.clone(), cfg.step, cfg.tol, cfg.max_iters);
            x1 = nx1;
            let f2 = |p: &[f64]| eval(&x1, p);
            let (nx2, v2, _) = ascend(&f2, x2.clone(), cfg.step, cfg.tol, cfg.max_iters);
            x2 = nx2;
            let improved = v2.max(v1) - value;
            value = v2.max(v1);
            if improved.abs() < cfg.tol.max(1e-12) {
                converged = true;
                break;
            }
        }
        if best.as_ref().map(|b| value > b.2).unwrap_or(true) {
            best = Some((x1, x2, value, converged));
        }
    }
    let (x1, x2, _, converged) = best.unwrap();
    let rho1 = params_to_state(&x1, d1);
    let rho2 = params_to_state(&x2, d2);
    let value = eval(&x1, &x2);
    Ok(SumRateResult {
        value,
        rho1,
        rho2,
        converged,
    })
}

// ---------------------------------------------------------------------------
// Union region sampling and hulls
// ---------------------------------------------------------------------------

/// Pentagons sampled from the union region.
#[derive(Debug, Clone, Serialize)]
pub struct UnionSample {
    /// maximally mixed baseline, then Ginibre samples, then the three
    /// optimizer-refined pentagons (r1, r2, sum-rate extremal inputs)
    pub pentagons: Vec<RegionPentagon>,
    /// convergence flags of the three refinements
    pub refined_converged: Vec<bool>,
}

/// Pentagons for Ginibre-sampled product inputs plus optimizer-refined
/// extremal inputs (one refinement per pentagon coordinate). The convex hull
/// of the union is taken downstream.
pub fn union_region_sample(
    m: &QuantumChannel,
    dims: (usize, usize),
    samples: usize,
    cfg: &OptimizerConfig,
    seed: u64,
) -> Result<UnionSample> {
    let (d1, d2) = dims;
    if m.dim_in() != d1 * d2 {
        return Err(Error::DimensionMismatch(m.dim_in(), d1 * d2));
    }
    let mut pentagons = Vec::new();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    // deterministic baseline: maximally mixed inputs
    pentagons.push(region_for_inputs(
        m,
        &DensityOperator::maximally_mixed(d1),
        &DensityOperator::maximally_mixed(d2),
    )?);
    for _ in 0..samples {
        let rho1 = crate::qmath::ginibre_state(d1, &mut rng);
        let rho2 = crate::qmath::ginibre_state(d2, &mut rng);
        pentagons.push(region_for_inputs(m, &rho1, &rho2)?);
    }
    let mut refined_converged = Vec::new();
    for objective in [RegionObjective::R1, RegionObjective::R2, RegionObjective::Sum] {
        let refined = optimize_product_inputs(m, dims, objective, cfg)?;
        pentagons.push(region_for_inputs(m, &refined.rho1, &refined.rho2)?);
        refined_converged.push(refined.converged);
    }
    Ok(UnionSample {
        pentagons,
        refined_converged,
    })
}

/// The two-sender view of `M^{⊗2}`: sender 1 holds both first-copy inputs,
/// sender 2 both second-copy inputs. The Kraus operators absorb the
/// permutation from `(A₁A₂, B₁B₂)` ordering to the per-copy `(A₁B₁, A₂B₂)`
/// ordering the tensor power expects.
pub fn level_two_channel(
    m: &QuantumChannel,
    dims: (usize, usize),
) -> Result<(QuantumChannel, (usize, usize))> {
    let (d1, d2) = dims;
    if m.dim_in() != d1 * d2 {
        return Err(Error::DimensionMismatch(m.dim_in(), d1 * d2));
    }
    let m2 = crate::channels::tensor_power_channel(m, 2)?;
    let total = d1 * d1 * d2 * d2;
    // permutation |a₁a₂b₁b₂⟩ → |a₁b₁a₂b₂⟩
    let grouped_dims = [d1, d1, d2, d2];
    let copy_dims = [d1, d2, d1, d2];
    let mut perm = CMatrix::zeros(total, total);
    for x in 0..total {
        let g = crate::qmath::split_index(x, &grouped_dims);
        let y = crate::qmath::join_index(&[g[0], g[2], g[1], g[3]], &copy_dims);
        perm[(y, x)] = crate::qmath::ONE;
    }
    let kraus: Vec<CMatrix> = m2.kraus().iter().map(|k| k * &perm).collect();
    Ok((QuantumChannel::new(kraus)?, (d1 * d1, d2 * d2)))
}

/// Level-`n` rate pentagon: the region of `M^{⊗n}` at the given (possibly
/// across-copy entangled) inputs, scaled by `1/n`. Only `n ≤ 2` is
/// evaluated; the regularized limit itself is not computable, so callers
/// must present the result as an inner bound.
pub fn level_n_region(
    m: &QuantumChannel,
    dims: (usize, usize),
    n: usize,
    rho1: &DensityOperator,
    rho2: &DensityOperator,
) -> Result<RegionPentagon> {
    match n {
        1 => region_for_inputs(m, rho1, rho2),
        2 => {
            let (m2, _) = level_two_channel(m, dims)?;
            let pent = region_for_inputs(&m2, rho1, rho2)?;
            Ok(RegionPentagon::new(
                pent.r1 / 2.0,
                pent.r2 / 2.0,
                pent.rsum / 2.0,
            ))
        }
        _ => Err(Error::Input(format!(
            "level-{n} evaluation not supported (n ≤ 2)"
        ))),
    }
}

/// Convex hull (monotone chain) of all pentagon vertices; returns the hull
/// counter-clockwise starting at the origin. Time-sharing between operating
/// points corresponds to the hull edges.
pub fn union_hull(pentagons: &[RegionPentagon]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = pentagons
        .iter()
        .flat_map(|p| p.vertices.iter().copied())
        .collect();
    pts.push((0.0, 0.0));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    if pts.len() <= 2 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    let mut hull = lower;
    hull.extend(upper);
    // rotate so the origin (always a vertex of these regions) comes first
    if let Some(pos) = hull
        .iter()
        .position(|&(x, y)| x.abs() < 1e-12 && y.abs() < 1e-12)
    {
        hull.rotate_left(pos);
    }
    hull
}

// ---------------------------------------------------------------------------
// Resource corner-rate bundles
// ---------------------------------------------------------------------------

/// Rates appearing in the corner-point resource inequalities, evaluated on
/// `θ^{ABCE}`: entanglement rates, the classical corner, the "father"
/// halves, and the two quantum corners.
#[derive(Debug, Clone, Serialize)]
pub struct ResourceRates {
    /// ebit rates consumed: (H(A), H(B))
    pub e1: f64,
    pub e2: f64,
    /// classical corner (I(A;C), I(B;CA))
    pub classical_corner: (f64, f64),
    /// entanglement consumed by the father protocol: (½I(A;BE), ½I(B;E))
    pub father_consumed: (f64, f64),
    /// father quantum rates (½I(A;C), ½I(B;CA))
    pub father_rates: (f64, f64),
    /// quantum corner (I(A⟩C), I(B⟩CA))
    pub quantum_corner_1: (f64, f64),
    /// quantum corner (I(A⟩BC), I(B⟩C))
    pub quantum_corner_2: (f64, f64),
}

pub fn resource_corner_rates(
    m: &QuantumChannel,
    rho1: &DensityOperator,
    rho2: &DensityOperator,
) -> Result<ResourceRates> {
    let theta = build_theta(m, rho1, rho2, true)?;
    let s = &theta.state;
    let e1 = s.entropy(&["A"])?;
    let e2 = s.entropy(&["B"])?;
    let i_a_c = mutual_information(s, &["A"], &["C"])?;
    let i_b_ca = mutual_information(s, &["B"], &["C", "A"])?;
    let i_a_be = mutual_information(s, &["A"], &["B", "E"])?;
    let i_b_e = mutual_information(s, &["B"], &["E"])?;
    Ok(ResourceRates {
        e1,
        e2,
        classical_corner: (i_a_c, i_b_ca),
        father_consumed: (0.5 * i_a_be, 0.5 * i_b_e),
        father_rates: (0.5 * i_a_c, 0.5 * i_b_ca),
        quantum_corner_1: (
            coherent_information(s, &["A"], &["C"])?,
            coherent_information(s, &["B"], &["C", "A"])?,
        ),
        quantum_corner_2: (
            coherent_information(s, &["A"], &["B", "C"])?,
            coherent_information(s, &["B"], &["C"])?,
        ),
    })
}

// ---------------------------------------------------------------------------
// Generalized dephasing maximizer checks
// ---------------------------------------------------------------------------

/// Outcome of the dephasing-maximizer sweep.
#[derive(Debug, Clone, Serialize)]
pub struct DephasingReport {
    pub trials: usize,
    pub seed: u64,
    /// min over trials of I(A;B) at the dephased input minus I(A;B) at the
    /// original input (never below -1e-8 when the lemma holds)
    pub min_dephasing_gain: f64,
    /// max |2H({r}) - H(Σ r φ) - I(A;B)| over random diagonal inputs
    pub max_closed_form_deviation: f64,
    pub pass: bool,
}

/// For a generalized dephasing channel, dephasing the input never lowers
/// `I(A;B)_θ`, and on diagonal inputs the closed form
/// `I = 2H({r_i}) - H(Σ_i r_i φ_i)` holds. Rejects channels that move
/// diagonal weight with `NotDephasing`.
pub fn verify_dephasing_maximizer(
    n: &QuantumChannel,
    trials: usize,
    seed: u64,
) -> Result<DephasingReport> {
    if !is_generalized_dephasing(n, HERM_TOL) {
        return Err(Error::NotDephasing(
            "diagonal fixed-point check failed".into(),
        ));
    }
    let d = n.dim_in();
    let delta = make_completely_dephasing(d);
    let env_vectors = dephasing_environment_vectors(n)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut min_gain = f64::INFINITY;
    let mut max_dev: f64 = 0.0;
    for _ in 0..trials {
        let rho = crate::qmath::ginibre_state(d, &mut rng);
        let dephased = delta.apply(&rho)?;
        let i_orig = single_sender_information(n, &rho)?;
        let i_deph = single_sender_information(n, &dephased)?;
        min_gain = min_gain.min(i_deph - i_orig);

        // closed form on the diagonal of this sample
        let r: Vec<f64> = (0..d).map(|i| rho.matrix()[(i, i)].re).collect();
        let closed = dephasing_closed_form(&r, &env_vectors)?;
        let direct = single_sender_information(n, &dephased)?;
        max_dev = max_dev.max((closed - direct).abs());
    }
    if trials == 0 {
        min_gain = 0.0;
    }
    let pass = min_gain >= -1e-8 && max_dev <= 1e-8;
    Ok(DephasingReport {
        trials,
        seed,
        min_dephasing_gain: min_gain,
        max_closed_form_deviation: max_dev,
        pass,
    })
}

/// `2H({r_i}) - H(Σ_i r_i φ_i)` for diagonal input weights `r` and
/// environment vectors `φ_i`.
pub fn dephasing_closed_form(r: &[f64], env_vectors: &[CVector]) -> Result<f64> {
    if r.len() != env_vectors.len() {
        return Err(Error::DimensionMismatch(r.len(), env_vectors.len()));
    }
    let env_dim = env_vectors[0].len();
    let mut mix = CMatrix::zeros(env_dim, env_dim);
    for (&ri, phi) in r.iter().zip(env_vectors.iter()) {
        mix += (phi * phi.adjoint()).scale(ri);
    }
    let mix = DensityOperator::new_unchecked(mix, vec![env_dim]);
    Ok(2.0 * shannon_entropy(r) - von_neumann_entropy(&mix))
}

/// Environment vectors `|φ_jl⟩ = Σ_k √p_k e^{i2πk(j+l)/d} |k⟩` of the
/// collective phase-flip dilation, indexed by `jl`.
pub fn phase_flip_env_vectors(d: usize, p: &[f64]) -> Result<Vec<CVector>> {
    crate::qmath::validate_distribution(p)?;
    let mut out = Vec::with_capacity(d * d);
    for j in 0..d {
        for l in 0..d {
            let mut phi = CVector::zeros(p.len());
            for (k, &pk) in p.iter().enumerate() {
                let ph = 2.0 * std::f64::consts::PI * (k * (j + l)) as f64 / d as f64;
                phi[k] = crate::qmath::c(ph.cos(), ph.sin()).scale(pk.sqrt());
            }
            out.push(phi);
        }
    }
    Ok(out)
}
