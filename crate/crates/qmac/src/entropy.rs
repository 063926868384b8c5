//! Entropic functionals on multipartite states and executable versions of
//! the entropy lemmas used in the converse arguments.
//!
//! All logarithms are base 2; rates and entropies are in bits. The
//! `0·log 0 := 0` convention enters through an eigenvalue clamp at 1e-12.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmath::{
    ginibre_state, random_pure_state, DensityOperator, EIG_CLAMP,
};

/// Shannon entropy of a probability vector, in bits.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > EIG_CLAMP)
        .map(|&x| -x * x.log2())
        .sum()
}

/// Von Neumann entropy `H(ρ) = -Tr ρ log₂ ρ`, in bits.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    shannon_entropy(&rho.eigenvalues())
}

/// A density operator with named subsystems.
#[derive(Debug, Clone)]
pub struct LabeledState {
    state: DensityOperator,
    labels: Vec<String>,
}

impl LabeledState {
    pub fn new(state: DensityOperator, labels: &[&str]) -> Result<Self> {
        if labels.len() != state.subsystem_dims().len() {
            return Err(Error::LabelError(format!(
                "{} labels for {} subsystems",
                labels.len(),
                state.subsystem_dims().len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for l in labels {
            if !seen.insert(*l) {
                return Err(Error::LabelError(format!("duplicate label {l}")));
            }
        }
        Ok(Self {
            state,
            labels: labels.iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn labels(&self) -> Vec<&str> {
        self.labels.iter().map(|s| s.as_str()).collect()
    }

    fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut idx = Vec::with_capacity(labels.len());
        for l in labels {
            let pos = self
                .labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::LabelError(format!("unknown label {l}")))?;
            idx.push(pos);
        }
        Ok(idx)
    }

    /// Reduced state on the named subsystems (in their original order).
    pub fn marginal(&self, labels: &[&str]) -> Result<DensityOperator> {
        let mut keep = self.positions(labels)?;
        keep.sort_unstable();
        self.state.partial_trace(&keep)
    }

    /// Entropy of a marginal, `H(labels)`.
    pub fn entropy(&self, labels: &[&str]) -> Result<f64> {
        Ok(von_neumann_entropy(&self.marginal(labels)?))
    }
}

fn check_disjoint(parts: &[&[&str]]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for part in parts {
        for l in *part {
            if !seen.insert(*l) {
                return Err(Error::LabelError(format!(
                    "label {l} appears in more than one part"
                )));
            }
        }
    }
    Ok(())
}

fn union<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<&'a str> {
    let mut out = a.to_vec();
    out.extend_from_slice(b);
    out
}

/// Quantum mutual information `I(A;B) = H(A) + H(B) - H(AB)`.
pub fn mutual_information(s: &LabeledState, part_a: &[&str], part_b: &[&str]) -> Result<f64> {
    check_disjoint(&[part_a, part_b])?;
    Ok(s.entropy(part_a)? + s.entropy(part_b)? - s.entropy(&union(part_a, part_b))?)
}

/// Conditional mutual information
/// `I(A;C|B) = H(AB) + H(BC) - H(ABC) - H(B)`.
pub fn conditional_mutual_information(
    s: &LabeledState,
    part_a: &[&str],
    part_c: &[&str],
    part_b: &[&str],
) -> Result<f64> {
    check_disjoint(&[part_a, part_c, part_b])?;
    let h_ab = s.entropy(&union(part_a, part_b))?;
    let h_bc = s.entropy(&union(part_b, part_c))?;
    let h_abc = s.entropy(&union(&union(part_a, part_b), part_c))?;
    let h_b = s.entropy(part_b)?;
    Ok(h_ab + h_bc - h_abc - h_b)
}

/// Coherent information `I(A⟩C) = I(A;C) - H(A)`.
pub fn coherent_information(s: &LabeledState, part_a: &[&str], part_c: &[&str]) -> Result<f64> {
    Ok(mutual_information(s, part_a, part_c)? - s.entropy(part_a)?)
}

/// Conditional entropy `H(A|B) = H(AB) - H(B)`.
pub fn conditional_entropy(s: &LabeledState, part_a: &[&str], part_b: &[&str]) -> Result<f64> {
    check_disjoint(&[part_a, part_b])?;
    Ok(s.entropy(&union(part_a, part_b))? - s.entropy(part_b)?)
}

// ---------------------------------------------------------------------------
// Lemma verification
// ---------------------------------------------------------------------------

/// Outcome of a randomized entropy-lemma sweep.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyLemmaReport {
    pub trials: usize,
    pub max_dim: usize,
    pub seed: u64,
    /// max |H(B|E) + H(B|A)| over random pure tripartite states
    pub duality_max_violation: f64,
    /// min of H(B) + H(B|E) - I(A;B) over random mixed tripartite states
    pub bound_min_slack: f64,
    pub pass: bool,
}

/// Check the entropy duality `H(B|E) = -H(B|A)` on random pure tripartite
/// states and the bound `I(A;B) ≤ H(B) + H(B|E)` on random mixed ones.
///
/// Passes when the duality holds to 1e-8 and the bound slack never drops
/// below -1e-9.
pub fn verify_entropy_lemmas(trials: usize, max_dim: usize, seed: u64) -> EntropyLemmaReport {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut duality_max_violation: f64 = 0.0;
    let mut bound_min_slack = f64::INFINITY;
    for _ in 0..trials {
        let da = rng.random_range(2..=max_dim);
        let db = rng.random_range(2..=max_dim);
        let de = rng.random_range(2..=max_dim);

        // pure |ψ⟩^{ABE}: H(B|E) + H(B|A) = 0
        let psi = random_pure_state(&[da, db, de], &mut rng);
        let s = LabeledState::new(psi.to_density(), &["A", "B", "E"]).unwrap();
        let lhs = conditional_entropy(&s, &["B"], &["E"]).unwrap();
        let rhs = conditional_entropy(&s, &["B"], &["A"]).unwrap();
        duality_max_violation = duality_max_violation.max((lhs + rhs).abs());

        // mixed σ^{ABE}: I(A;B) ≤ H(B) + H(B|E)
        let sigma = ginibre_state(da * db * de, &mut rng)
            .with_subsystems(vec![da, db, de])
            .unwrap();
        let s = LabeledState::new(sigma, &["A", "B", "E"]).unwrap();
        let slack = s.entropy(&["B"]).unwrap()
            + conditional_entropy(&s, &["B"], &["E"]).unwrap()
            - mutual_information(&s, &["A"], &["B"]).unwrap();
        bound_min_slack = bound_min_slack.min(slack);
    }
    if trials == 0 {
        bound_min_slack = 0.0;
    }
    let pass = duality_max_violation <= 1e-8 && bound_min_slack >= -1e-9;
    EntropyLemmaReport {
        trials,
        max_dim,
        seed,
        duality_max_violation,
        bound_min_slack,
        pass,
    }
}

/// Outcome of a strong-subadditivity sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SsaReport {
    pub trials: usize,
    pub max_dim: usize,
    pub seed: u64,
    /// min I(A;C|B) over random tripartite states
    pub min_value: f64,
    pub pass: bool,
}

/// Strong subadditivity: `I(A;C|B) ≥ 0` on random tripartite mixed states.
pub fn verify_strong_subadditivity(trials: usize, max_dim: usize, seed: u64) -> SsaReport {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut min_value = f64::INFINITY;
    for _ in 0..trials {
        let da = rng.random_range(2..=max_dim);
        let db = rng.random_range(2..=max_dim);
        let dc = rng.random_range(2..=max_dim);
        let rho = ginibre_state(da * db * dc, &mut rng)
            .with_subsystems(vec![da, db, dc])
            .unwrap();
        let s = LabeledState::new(rho, &["A", "B", "C"]).unwrap();
        let v = conditional_mutual_information(&s, &["A"], &["C"], &["B"]).unwrap();
        min_value = min_value.min(v);
    }
    if trials == 0 {
        min_value = 0.0;
    }
    SsaReport {
        trials,
        max_dim,
        seed,
        min_value,
        pass: min_value >= -1e-9,
    }
}
