//! Per-measurement correlation quantities.
//!
//! For a state `rho_AB` and an Alice measurement `{P_i}` with outcome
//! probabilities `p_i` and Bob states `rho_i^B`:
//!
//! * `c_hv     = S(rho_B) - sum_i p_i S(rho_i^B)`
//! * `delta_cl = S(rho_A) - S(rho'_A) + c_hv`
//! * `deficit_q = sum_i p_i S(rho_i^B) + S(rho'_A) - S(rho_AB)`
//!
//! where `rho'_A = sum_i P_i rho_A P_i`. The last two always add up to the
//! mutual information.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::measurement::{outcomes, MeasurementOperators, ProjectiveMeasurement};
use crate::state::{entropy, matrix_entropy, partial_trace, DensityMatrix, Subsystem};

/// Entropies of a state and its marginals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateEntropies {
    pub s_ab: f64,
    pub s_a: f64,
    pub s_b: f64,
}

impl StateEntropies {
    pub fn of(rho: &DensityMatrix) -> Result<Self> {
        Ok(Self {
            s_ab: entropy(rho)?,
            s_a: entropy(&partial_trace(rho, Subsystem::A))?,
            s_b: entropy(&partial_trace(rho, Subsystem::B))?,
        })
    }

    pub fn mutual_information(&self) -> f64 {
        self.s_a + self.s_b - self.s_ab
    }
}

/// Measurement-dependent pieces shared by all the per-measurement quantities.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct OutcomeTerms {
    pub weights: Vec<f64>,
    pub entropies: Vec<f64>,
    pub bob_average_entropy: f64,
}

pub(crate) fn outcome_terms(rho: &DensityMatrix, m: &impl MeasurementOperators) -> Result<OutcomeTerms> {
    let mut weights = Vec::with_capacity(m.outcome_count());
    let mut entropies = Vec::with_capacity(m.outcome_count());
    let mut avg = 0.0;
    for o in outcomes(rho, m)? {
        let s = match &o.bob_state {
            Some(state) => entropy(state)?,
            None => 0.0,
        };
        avg += o.probability * s;
        weights.push(o.probability);
        entropies.push(s);
    }
    Ok(OutcomeTerms {
        weights,
        entropies,
        bob_average_entropy: avg,
    })
}

/// `S(sum_i P_i rho_A P_i)`.
pub(crate) fn dephased_alice_entropy(rho_a: &ComplexMatrix, m: &ProjectiveMeasurement) -> Result<f64> {
    if rho_a.rows() != m.dim() {
        return Err(Error::dims("dephased Alice entropy", rho_a.rows(), m.dim()));
    }
    let d = rho_a.rows();
    let mut out = ComplexMatrix::zeros(d, d);
    for p in m.projectors() {
        out = &out + &(&(p * rho_a) * p);
    }
    matrix_entropy(&out.hermitian_part())
}

/// Classical correlation `c_HV` for one measurement (projective or POVM).
pub fn c_hv(rho_ab: &DensityMatrix, m: &impl MeasurementOperators) -> Result<f64> {
    let s_b = entropy(&partial_trace(rho_ab, Subsystem::B))?;
    Ok(s_b - outcome_terms(rho_ab, m)?.bob_average_entropy)
}

/// One-way classical deficit for one projective measurement.
pub fn delta_cl(rho_ab: &DensityMatrix, m: &ProjectiveMeasurement) -> Result<f64> {
    let rho_a = partial_trace(rho_ab, Subsystem::A);
    let s_a = entropy(&rho_a)?;
    let s_a_after = dephased_alice_entropy(rho_a.matrix(), m)?;
    Ok(s_a - s_a_after + c_hv(rho_ab, m)?)
}

/// The bracketed one-way quantum deficit expression for one measurement.
pub fn deficit_q(rho_ab: &DensityMatrix, m: &ProjectiveMeasurement) -> Result<f64> {
    let rho_a = partial_trace(rho_ab, Subsystem::A);
    let s_a_after = dephased_alice_entropy(rho_a.matrix(), m)?;
    let terms = outcome_terms(rho_ab, m)?;
    Ok(terms.bob_average_entropy + s_a_after - entropy(rho_ab)?)
}

/// Globally accessible information `log2(d_A d_B) - S(rho_AB)`.
pub fn i_go(rho_ab: &DensityMatrix) -> Result<f64> {
    Ok((rho_ab.dim() as f64).log2() - entropy(rho_ab)?)
}

/// Locally accessible information `log2 d_A - S(rho_A) + log2 d_B - S(rho_B)`.
pub fn i_lo(rho_ab: &DensityMatrix) -> Result<f64> {
    let (da, db) = rho_ab.dims();
    let e = StateEntropies::of(rho_ab)?;
    Ok((da as f64).log2() - e.s_a + (db as f64).log2() - e.s_b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub c_hv: f64,
    pub delta_cl: f64,
    pub deficit_q: f64,
    /// `S(rho'_A) - S(rho_A)`, never negative up to rounding.
    pub alice_entropy_cost: f64,
    pub mutual_information: f64,
    /// One entry per measurement outcome, zero-probability outcomes included.
    pub outcome_weights: Vec<f64>,
    pub per_outcome_entropies: Vec<f64>,
}

pub fn measure_report(rho_ab: &DensityMatrix, m: &ProjectiveMeasurement) -> Result<MeasureReport> {
    let ent = StateEntropies::of(rho_ab)?;
    let rho_a = partial_trace(rho_ab, Subsystem::A);
    let s_a_after = dephased_alice_entropy(rho_a.matrix(), m)?;
    let terms = outcome_terms(rho_ab, m)?;
    let c_hv = ent.s_b - terms.bob_average_entropy;
    let cost = s_a_after - ent.s_a;
    Ok(MeasureReport {
        c_hv,
        delta_cl: c_hv - cost,
        deficit_q: terms.bob_average_entropy + s_a_after - ent.s_ab,
        alice_entropy_cost: cost,
        mutual_information: ent.mutual_information(),
        outcome_weights: terms.weights,
        per_outcome_entropies: terms.entropies,
    })
}
