//! Alice-side measurements: projective (von Neumann) measurements, POVMs for
//! evaluation only, dephasing and the ensembles they prepare on Bob's side.

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eig, ComplexMatrix, C64};
use crate::state::{DensityMatrix, Ensemble};

pub const MEASUREMENT_TOL: f64 = 1e-9;
/// Outcomes with probability below this are dropped from ensembles.
pub const ZERO_PROBABILITY: f64 = 1e-12;
/// Adjacent eigenvalues closer than this count as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;

/// Operators `M_i` on Alice's space defining outcome probabilities
/// `Tr((M_i (x) I) rho)`.
pub trait MeasurementOperators {
    fn operators(&self) -> &[ComplexMatrix];

    fn dim(&self) -> usize {
        self.operators()[0].rows()
    }

    fn outcome_count(&self) -> usize {
        self.operators().len()
    }
}

/// Complete set of orthogonal projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement {
    projectors: Vec<ComplexMatrix>,
    /// Columns are the basis vectors when built from a basis.
    basis: Option<ComplexMatrix>,
}

impl ProjectiveMeasurement {
    pub fn new(projectors: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = projectors.first() else {
            return Err(Error::InvalidMeasurement("no projectors".into()));
        };
        let d = first.rows();
        let mut sum = ComplexMatrix::zeros(d, d);
        for (i, p) in projectors.iter().enumerate() {
            if p.rows() != d || p.cols() != d {
                return Err(Error::dims(
                    "ProjectiveMeasurement::new",
                    format!("{d}x{d}"),
                    format!("{}x{} (projector {i})", p.rows(), p.cols()),
                ));
            }
            if !p.is_hermitian(MEASUREMENT_TOL) {
                return Err(Error::InvalidMeasurement(format!("projector {i} is not Hermitian")));
            }
            if (p * p).max_abs_diff(p) > MEASUREMENT_TOL {
                return Err(Error::InvalidMeasurement(format!("projector {i} is not idempotent")));
            }
            for (j, q) in projectors.iter().enumerate().skip(i + 1) {
                if (p * q).max_abs() > MEASUREMENT_TOL {
                    return Err(Error::InvalidMeasurement(format!(
                        "projectors {i} and {j} are not orthogonal"
                    )));
                }
            }
            sum = &sum + p;
        }
        if sum.max_abs_diff(&ComplexMatrix::identity(d)) > MEASUREMENT_TOL {
            return Err(Error::InvalidMeasurement("projectors do not sum to the identity".into()));
        }
        Ok(Self {
            projectors,
            basis: None,
        })
    }

    /// Rank-1 measurement from the columns of a unitary.
    pub fn from_unitary(u: &ComplexMatrix) -> Result<Self> {
        basis_measurement(&u.columns())
    }

    pub fn computational(dim: usize) -> Self {
        Self::from_unitary(&ComplexMatrix::identity(dim)).expect("identity is unitary")
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn basis(&self) -> Option<&ComplexMatrix> {
        self.basis.as_ref()
    }

    pub fn is_rank_one(&self) -> bool {
        self.projectors.iter().all(|p| (p.trace().re - 1.0).abs() < 1e-6)
    }

    /// Basis vectors of a rank-1 measurement, recovered from the projectors
    /// when the measurement was not built from a basis.
    pub fn basis_vectors(&self) -> Option<Vec<Vec<C64>>> {
        if let Some(b) = &self.basis {
            return Some(b.columns());
        }
        if !self.is_rank_one() {
            return None;
        }
        self.projectors
            .iter()
            .map(|p| hermitian_eig(p).ok().map(|e| e.eigenvector(0)))
            .collect()
    }

    /// Same projectors in a different order.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.projectors.len() {
            return Err(Error::dims("ProjectiveMeasurement::permuted", self.projectors.len(), order.len()));
        }
        let projectors = order.iter().map(|&i| self.projectors[i].clone()).collect();
        let basis = match &self.basis {
            Some(b) => {
                let cols = b.columns();
                Some(ComplexMatrix::from_columns(&order.iter().map(|&i| cols[i].clone()).collect::<Vec<_>>())?)
            }
            None => None,
        };
        Ok(Self { projectors, basis })
    }

    /// Whether every projector commutes with `rho_a` within `tol`.
    pub fn commutes_with(&self, rho_a: &ComplexMatrix, tol: f64) -> Result<bool> {
        for p in &self.projectors {
            if p.commutator_norm(rho_a)? > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl MeasurementOperators for ProjectiveMeasurement {
    fn operators(&self) -> &[ComplexMatrix] {
        &self.projectors
    }
}

/// Positive operator-valued measure, used only for evaluating `c_HV`.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::InvalidMeasurement("no POVM elements".into()));
        };
        let d = first.rows();
        let mut sum = ComplexMatrix::zeros(d, d);
        for (i, m) in elements.iter().enumerate() {
            if m.rows() != d || m.cols() != d {
                return Err(Error::dims(
                    "Povm::new",
                    format!("{d}x{d}"),
                    format!("{}x{} (element {i})", m.rows(), m.cols()),
                ));
            }
            let eig = hermitian_eig(m).map_err(|e| Error::InvalidMeasurement(format!("element {i}: {e}")))?;
            if eig.eigenvalues.last().is_some_and(|&l| l < -MEASUREMENT_TOL) {
                return Err(Error::InvalidMeasurement(format!("element {i} is not positive semidefinite")));
            }
            sum = &sum + m;
        }
        if sum.max_abs_diff(&ComplexMatrix::identity(d)) > MEASUREMENT_TOL {
            return Err(Error::InvalidMeasurement("POVM elements do not sum to the identity".into()));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }
}

impl MeasurementOperators for Povm {
    fn operators(&self) -> &[ComplexMatrix] {
        &self.elements
    }
}

impl From<ProjectiveMeasurement> for Povm {
    fn from(m: ProjectiveMeasurement) -> Self {
        Povm { elements: m.projectors }
    }
}

/// `P_i = |v_i><v_i|`; the vectors must form an orthonormal basis.
pub fn basis_measurement(vectors: &[Vec<C64>]) -> Result<ProjectiveMeasurement> {
    let d = vectors.len();
    if d == 0 {
        return Err(Error::InvalidMeasurement("empty basis".into()));
    }
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != d {
            return Err(Error::InvalidMeasurement(format!(
                "{d} vectors cannot span C^{} (vector {i})",
                v.len()
            )));
        }
    }
    for i in 0..d {
        for j in i..d {
            let ip = linalg::inner(&vectors[i], &vectors[j]);
            let expected = if i == j { 1.0 } else { 0.0 };
            if (ip - C64::new(expected, 0.0)).norm() > MEASUREMENT_TOL {
                return Err(Error::InvalidMeasurement(format!(
                    "basis vectors {i} and {j} are not orthonormal (<v_i|v_j> = {:.3e}{:+.3e}i)",
                    ip.re, ip.im
                )));
            }
        }
    }
    Ok(ProjectiveMeasurement {
        projectors: vectors.iter().map(|v| ComplexMatrix::projector(v)).collect(),
        basis: Some(ComplexMatrix::from_columns(vectors)?),
    })
}

/// Rank-1 measurement in the eigenbasis of `rho_a` (descending eigenvalues).
/// Degenerate eigenvalues leave the basis non-unique; see [`has_degenerate_spectrum`].
pub fn eigenbasis_measurement(rho_a: &DensityMatrix) -> Result<ProjectiveMeasurement> {
    let eig = hermitian_eig(rho_a.matrix())?;
    ProjectiveMeasurement::from_unitary(&eig.eigenvectors)
}

pub fn has_degenerate_spectrum(rho_a: &DensityMatrix) -> Result<bool> {
    let eig = hermitian_eig(rho_a.matrix())?;
    Ok(eig.eigenvalues.windows(2).any(|w| (w[0] - w[1]).abs() < DEGENERACY_GAP))
}

fn check_alice_dim(rho_ab: &DensityMatrix, dim: usize, context: &'static str) -> Result<()> {
    if rho_ab.dim_a() != dim {
        return Err(Error::dims(context, format!("d_A = {}", rho_ab.dim_a()), format!("measurement on C^{dim}")));
    }
    Ok(())
}

fn lift_to_alice(op: &ComplexMatrix, db: usize) -> ComplexMatrix {
    op.tensor(&ComplexMatrix::identity(db))
}

/// `sum_i (P_i (x) I) rho (P_i (x) I)`.
pub fn dephase(rho_ab: &DensityMatrix, m: &ProjectiveMeasurement) -> Result<DensityMatrix> {
    check_alice_dim(rho_ab, m.dim(), "dephase")?;
    let (da, db) = rho_ab.dims();
    let d = da * db;
    let mut out = ComplexMatrix::zeros(d, d);
    for p in m.projectors() {
        let lifted = lift_to_alice(p, db);
        out = &out + &(&(&lifted * rho_ab.matrix()) * &lifted);
    }
    DensityMatrix::new((da, db), out.hermitian_part())
}

/// One measurement outcome: its probability and, when non-negligible, Bob's
/// conditional state.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub probability: f64,
    pub bob_state: Option<DensityMatrix>,
}

/// Per-outcome probabilities and Bob states, in measurement order,
/// including negligible outcomes (with `bob_state = None`).
pub fn outcomes(rho_ab: &DensityMatrix, m: &impl MeasurementOperators) -> Result<Vec<Outcome>> {
    check_alice_dim(rho_ab, m.dim(), "outcome_ensemble")?;
    let (da, db) = rho_ab.dims();
    let rho = rho_ab.matrix();
    m.operators()
        .iter()
        .map(|op| {
            // Tr_A((M (x) I) rho)_{jl} = sum_{a,a'} M_{a a'} rho_{(a' j),(a l)}
            let mut x = ComplexMatrix::zeros(db, db);
            for a in 0..da {
                for a2 in 0..da {
                    let coeff = op[(a, a2)];
                    if coeff.norm_sqr() == 0.0 {
                        continue;
                    }
                    for j in 0..db {
                        for l in 0..db {
                            x[(j, l)] += coeff * rho[(a2 * db + j, a * db + l)];
                        }
                    }
                }
            }
            let probability = x.trace().re.max(0.0);
            let bob_state = if probability >= ZERO_PROBABILITY {
                Some(DensityMatrix::new((db, 1), x.hermitian_part().scale_real(1.0 / probability))?)
            } else {
                None
            };
            Ok(Outcome {
                probability,
                bob_state,
            })
        })
        .collect()
}

/// Bob's ensemble `{p_i, rho_i^B}`; zero-probability outcomes are dropped.
pub fn outcome_ensemble(rho_ab: &DensityMatrix, m: &impl MeasurementOperators) -> Result<Ensemble> {
    let (weights, members) = outcomes(rho_ab, m)?
        .into_iter()
        .filter_map(|o| o.bob_state.map(|s| (o.probability, s)))
        .unzip();
    Ensemble::new(weights, members)
}

/// Refines each projector into rank-1 pieces along the eigenbasis of
/// `P_i rho_A P_i` restricted to the range of `P_i`.
pub fn refine(m: &ProjectiveMeasurement, rho_a: &DensityMatrix) -> Result<ProjectiveMeasurement> {
    if rho_a.dim() != m.dim() {
        return Err(Error::dims("refine", m.dim(), rho_a.dim()));
    }
    if m.is_rank_one() {
        return Ok(m.clone());
    }
    let d = m.dim();
    let mut vectors = Vec::with_capacity(d);
    for p in m.projectors() {
        let range: Vec<Vec<C64>> = {
            let e = hermitian_eig(p)?;
            (0..d).filter(|&k| e.eigenvalues[k] > 0.5).map(|k| e.eigenvector(k)).collect()
        };
        if range.is_empty() {
            continue;
        }
        let q = ComplexMatrix::from_columns(&range)?;
        let block = q.adjoint().matmul(rho_a.matrix())?.matmul(&q)?;
        let e = hermitian_eig(&block)?;
        let rotated = q.matmul(&e.eigenvectors)?;
        vectors.extend(rotated.columns());
    }
    basis_measurement(&vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;
    use crate::state::{partial_trace, PureState, Subsystem};

    fn kets(vs: &[&[f64]]) -> Vec<Vec<C64>> {
        vs.iter().map(|v| v.iter().map(|&x| c64(x, 0.0)).collect()).collect()
    }

    #[test]
    fn computational_basis_projectors() {
        let m = basis_measurement(&kets(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert!(m.projectors()[0].approx_eq(&ComplexMatrix::diag(&[1.0, 0.0]), 0.0));
        assert!(m.projectors()[1].approx_eq(&ComplexMatrix::diag(&[0.0, 1.0]), 0.0));
    }

    #[test]
    fn hadamard_basis_projectors() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = basis_measurement(&kets(&[&[s, s], &[s, -s]])).unwrap();
        let plus = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        let minus = ComplexMatrix::from_real_rows(&[&[0.5, -0.5], &[-0.5, 0.5]]).unwrap();
        assert!(m.projectors()[0].approx_eq(&plus, 1e-15));
        assert!(m.projectors()[1].approx_eq(&minus, 1e-15));
    }

    #[test]
    fn qutrit_computational_basis() {
        let m = ProjectiveMeasurement::computational(3);
        assert_eq!(m.projectors().len(), 3);
        assert!(m.is_rank_one());
    }

    #[test]
    fn basis_measurement_rejects_non_orthonormal() {
        assert!(basis_measurement(&kets(&[&[1.0, 0.0], &[1.0, 0.0]])).is_err());
        assert!(basis_measurement(&kets(&[&[1.0, 0.0], &[0.0, 2.0]])).is_err());
        assert!(basis_measurement(&kets(&[&[1.0, 0.0]])).is_err());
    }

    #[test]
    fn projective_measurement_validation() {
        assert!(ProjectiveMeasurement::new(vec![ComplexMatrix::diag(&[1.0, 0.0])]).is_err());
        assert!(ProjectiveMeasurement::new(vec![ComplexMatrix::diag(&[0.5, 0.5]), ComplexMatrix::diag(&[0.5, 0.5])]).is_err());
        assert!(ProjectiveMeasurement::new(vec![ComplexMatrix::identity(2)]).is_ok());
    }

    #[test]
    fn povm_validation() {
        let half = ComplexMatrix::diag(&[0.5, 0.5]);
        assert!(Povm::new(vec![half.clone(), half.clone()]).is_ok());
        assert!(Povm::new(vec![ComplexMatrix::diag(&[1.5, 1.0]), ComplexMatrix::diag(&[-0.5, 0.0])]).is_err());
        assert!(Povm::new(vec![half]).is_err());
    }

    #[test]
    fn eigenbasis_of_diagonal_state() {
        let rho = DensityMatrix::single(ComplexMatrix::diag(&[0.3, 0.7])).unwrap();
        let m = eigenbasis_measurement(&rho).unwrap();
        // descending order: |1> first
        assert!(m.projectors()[0].approx_eq(&ComplexMatrix::diag(&[0.0, 1.0]), 1e-15));
        assert!(m.projectors()[1].approx_eq(&ComplexMatrix::diag(&[1.0, 0.0]), 1e-15));
        assert!(!has_degenerate_spectrum(&rho).unwrap());
    }

    #[test]
    fn eigenbasis_of_maximally_mixed_is_computational() {
        let rho = DensityMatrix::maximally_mixed((2, 1));
        let m = eigenbasis_measurement(&rho).unwrap();
        assert!(m.projectors()[0].approx_eq(&ComplexMatrix::diag(&[1.0, 0.0]), 0.0));
        assert!(has_degenerate_spectrum(&rho).unwrap());
    }

    #[test]
    fn dephasing_bell_state() {
        let out = dephase(&DensityMatrix::bell(), &ProjectiveMeasurement::computational(2)).unwrap();
        assert!(out.matrix().approx_eq(&ComplexMatrix::diag(&[0.5, 0.0, 0.0, 0.5]), 1e-15));
    }

    #[test]
    fn dephasing_fixed_point_and_idempotence() {
        let classical = DensityMatrix::new((2, 2), ComplexMatrix::diag(&[0.1, 0.2, 0.3, 0.4])).unwrap();
        let m = ProjectiveMeasurement::computational(2);
        let once = dephase(&classical, &m).unwrap();
        assert!(once.matrix().approx_eq(classical.matrix(), 1e-15));
        let bell_once = dephase(&DensityMatrix::bell(), &m).unwrap();
        let bell_twice = dephase(&bell_once, &m).unwrap();
        assert!(bell_once.matrix().approx_eq(bell_twice.matrix(), 1e-15));
    }

    #[test]
    fn dephase_rejects_dimension_mismatch() {
        let rho = DensityMatrix::maximally_mixed((3, 2));
        assert!(dephase(&rho, &ProjectiveMeasurement::computational(2)).is_err());
    }

    #[test]
    fn bell_outcome_ensemble() {
        let ens = outcome_ensemble(&DensityMatrix::bell(), &ProjectiveMeasurement::computational(2)).unwrap();
        assert!(ens.weights().iter().all(|w| (w - 0.5).abs() < 1e-15));
        assert!(ens.members()[0].matrix().approx_eq(&ComplexMatrix::diag(&[1.0, 0.0]), 1e-15));
        assert!(ens.members()[1].matrix().approx_eq(&ComplexMatrix::diag(&[0.0, 1.0]), 1e-15));
    }

    #[test]
    fn product_state_outcomes_equal_bob_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let ra = DensityMatrix::single(ComplexMatrix::diag(&[0.3, 0.7])).unwrap();
        let rb = PureState::single_real(&[0.6, 0.8]).unwrap().density();
        let rho = DensityMatrix::product(&ra, &rb);
        let m = basis_measurement(&kets(&[&[s, s], &[s, -s]])).unwrap();
        let ens = outcome_ensemble(&rho, &m).unwrap();
        for member in ens.members() {
            assert!(member.matrix().approx_eq(rb.matrix(), 1e-12));
        }
    }

    #[test]
    fn zero_probability_outcomes_are_dropped() {
        let rho = PureState::new((2, 2), vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)])
            .unwrap()
            .density();
        let ens = outcome_ensemble(&rho, &ProjectiveMeasurement::computational(2)).unwrap();
        assert_eq!(ens.len(), 1);
        assert_eq!(ens.weights(), &[1.0]);
    }

    #[test]
    fn povm_outcomes_average_to_bob_state() {
        let rho = DensityMatrix::bell();
        let povm = Povm::new(vec![ComplexMatrix::diag(&[0.7, 0.2]), ComplexMatrix::diag(&[0.3, 0.8])]).unwrap();
        let ens = outcome_ensemble(&rho, &povm).unwrap();
        assert!((ens.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let rb = partial_trace(&rho, Subsystem::B);
        assert!(ens.average().matrix().approx_eq(rb.matrix(), 1e-12));
    }

    #[test]
    fn refine_rank_one_is_identity_operation() {
        let m = ProjectiveMeasurement::computational(2);
        let rho = DensityMatrix::maximally_mixed((2, 1));
        assert_eq!(refine(&m, &rho).unwrap(), m);
    }

    #[test]
    fn refine_trivial_measurement_gives_eigenbasis() {
        let rho_a = DensityMatrix::single(
            ComplexMatrix::from_real_rows(&[&[0.4, 0.1, 0.0, 0.0], &[0.1, 0.3, 0.0, 0.0], &[0.0, 0.0, 0.2, 0.05], &[0.0, 0.0, 0.05, 0.1]])
                .unwrap(),
        )
        .unwrap();
        let refined = refine(&ProjectiveMeasurement::new(vec![ComplexMatrix::identity(4)]).unwrap(), &rho_a).unwrap();
        assert!(refined.is_rank_one());
        assert!(refined.commutes_with(rho_a.matrix(), 1e-9).unwrap());
    }
}
