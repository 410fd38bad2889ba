//! Bipartite density matrices, pure states and ensembles, plus the entropic
//! quantities built on them. All logarithms are base 2.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eig, ComplexMatrix, C64};

/// Validation tolerance for Hermiticity, unit trace and positivity.
pub const STATE_TOL: f64 = 1e-9;
/// Eigenvalues in `[-NEGATIVE_CLIP, 0)` are treated as zero by [`entropy`].
pub const NEGATIVE_CLIP: f64 = 1e-9;
const PURE_NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subsystem::A => f.write_str("A"),
            Subsystem::B => f.write_str("B"),
        }
    }
}

impl std::str::FromStr for Subsystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Subsystem::A),
            "B" | "b" => Ok(Subsystem::B),
            other => Err(Error::InvalidArgument(format!("unknown subsystem label `{other}`"))),
        }
    }
}

/// A density matrix on `C^{d_A} (x) C^{d_B}`. `d_B = 1` is a single system.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: (usize, usize),
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (all to `1e-9`).
    pub fn new(dims: (usize, usize), matrix: ComplexMatrix) -> Result<Self> {
        let d = dims.0 * dims.1;
        if dims.0 == 0 || dims.1 == 0 {
            return Err(Error::InvalidState("subsystem dimensions must be positive".into()));
        }
        if matrix.rows() != d || matrix.cols() != d {
            return Err(Error::dims(
                "DensityMatrix::new",
                format!("{d}x{d} for dims {}x{}", dims.0, dims.1),
                format!("{}x{}", matrix.rows(), matrix.cols()),
            ));
        }
        let herm = matrix.hermiticity_deviation();
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace is {:.12} (expected 1)", tr.re)));
        }
        let eig = hermitian_eig(&matrix)?;
        let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self {
            dims,
            matrix: matrix.hermitian_part(),
        })
    }

    /// Single-system state (`d_B = 1`).
    pub fn single(matrix: ComplexMatrix) -> Result<Self> {
        let d = matrix.rows();
        Self::new((d, 1), matrix)
    }

    pub fn from_pure(state: &PureState) -> Self {
        Self {
            dims: state.dims,
            matrix: ComplexMatrix::projector(&state.amplitudes),
        }
    }

    pub fn maximally_mixed(dims: (usize, usize)) -> Self {
        let d = dims.0 * dims.1;
        Self {
            dims,
            matrix: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
        }
    }

    /// `rho_A (x) rho_B`, both single-system states.
    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> Self {
        Self {
            dims: (a.dim(), b.dim()),
            matrix: a.matrix.tensor(&b.matrix),
        }
    }

    /// `(|00> + |11>)/sqrt(2)`.
    pub fn bell() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = PureState::new(
            (2, 2),
            vec![
                C64::new(s, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(s, 0.0),
            ],
        )
        .expect("unit vector");
        Self::from_pure(&psi)
    }

    /// Re-labels the dimensions of an existing state.
    pub fn with_dims(self, dims: (usize, usize)) -> Result<Self> {
        if dims.0 * dims.1 != self.dim() {
            return Err(Error::dims("DensityMatrix::with_dims", self.dim(), dims.0 * dims.1));
        }
        Ok(Self { dims, ..self })
    }

    pub(crate) fn from_matrix_trusted(dims: (usize, usize), matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(matrix.rows(), dims.0 * dims.1);
        Self { dims, matrix }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn dim_a(&self) -> usize {
        self.dims.0
    }

    pub fn dim_b(&self) -> usize {
        self.dims.1
    }

    /// Total dimension `d_A d_B`.
    pub fn dim(&self) -> usize {
        self.dims.0 * self.dims.1
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Block `<a| rho |a'>` acting on B, i.e. the `(a, a')` entry of the
    /// A-index structure.
    pub fn block(&self, a: usize, a_prime: usize) -> ComplexMatrix {
        let db = self.dims.1;
        let mut out = ComplexMatrix::zeros(db, db);
        for j in 0..db {
            for l in 0..db {
                out[(j, l)] = self.matrix[(a * db + j, a_prime * db + l)];
            }
        }
        out
    }

    pub fn reduced(&self, keep: Subsystem) -> DensityMatrix {
        partial_trace(self, keep)
    }
}

/// Unit vector on `C^{d_A} (x) C^{d_B}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: (usize, usize),
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(dims: (usize, usize), amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != dims.0 * dims.1 {
            return Err(Error::dims("PureState::new", dims.0 * dims.1, amplitudes.len()));
        }
        let norm = linalg::vector_norm(&amplitudes);
        if (norm - 1.0).abs() > PURE_NORM_TOL {
            return Err(Error::InvalidState(format!("state vector has norm {norm:.12}")));
        }
        Ok(Self { dims, amplitudes })
    }

    /// Normalizes `amplitudes` before validating.
    pub fn normalized(dims: (usize, usize), amplitudes: Vec<C64>) -> Result<Self> {
        let norm = linalg::vector_norm(&amplitudes);
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(dims, amplitudes.into_iter().map(|x| x / norm).collect())
    }

    pub fn single(amplitudes: Vec<C64>) -> Result<Self> {
        let d = amplitudes.len();
        Self::new((d, 1), amplitudes)
    }

    pub fn single_real(amplitudes: &[f64]) -> Result<Self> {
        Self::single(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

/// Weighted collection of states with common dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    weights: Vec<f64>,
    members: Vec<DensityMatrix>,
}

impl Ensemble {
    pub fn new(weights: Vec<f64>, members: Vec<DensityMatrix>) -> Result<Self> {
        if weights.len() != members.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} weights for {} members",
                weights.len(),
                members.len()
            )));
        }
        if members.is_empty() {
            return Err(Error::InvalidEnsemble("empty ensemble".into()));
        }
        if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < 0.0) {
            return Err(Error::InvalidEnsemble(format!("negative or NaN weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidEnsemble(format!("weights sum to {total:.12}")));
        }
        let dims = members[0].dims();
        if let Some(m) = members.iter().find(|m| m.dims() != dims) {
            return Err(Error::dims("Ensemble::new", format!("{dims:?}"), format!("{:?}", m.dims())));
        }
        Ok(Self { weights, members })
    }

    pub fn from_pure(weights: Vec<f64>, states: &[PureState]) -> Result<Self> {
        Self::new(weights, states.iter().map(PureState::density).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn members(&self) -> &[DensityMatrix] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &DensityMatrix)> {
        self.weights.iter().copied().zip(&self.members)
    }

    /// `sum_k p_k rho_k`.
    pub fn average(&self) -> DensityMatrix {
        let dims = self.members[0].dims();
        let d = dims.0 * dims.1;
        let mut acc = ComplexMatrix::zeros(d, d);
        for (p, m) in self.iter() {
            acc = &acc + &m.matrix().scale_real(p);
        }
        DensityMatrix::from_matrix_trusted(dims, acc)
    }

    /// `sum_k p_k S(rho_k)`.
    pub fn average_entropy(&self) -> Result<f64> {
        self.iter().map(|(p, m)| Ok(p * entropy(m)?)).sum()
    }
}

/// Reduced state on `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: Subsystem) -> DensityMatrix {
    let (da, db) = rho.dims();
    let m = rho.matrix();
    match keep {
        Subsystem::A => {
            let mut out = ComplexMatrix::zeros(da, da);
            for i in 0..da {
                for k in 0..da {
                    out[(i, k)] = (0..db).map(|j| m[(i * db + j, k * db + j)]).sum();
                }
            }
            DensityMatrix::from_matrix_trusted((da, 1), out)
        }
        Subsystem::B => {
            let mut out = ComplexMatrix::zeros(db, db);
            for j in 0..db {
                for l in 0..db {
                    out[(j, l)] = (0..da).map(|i| m[(i * db + j, i * db + l)]).sum();
                }
            }
            DensityMatrix::from_matrix_trusted((db, 1), out)
        }
    }
}

/// Shannon entropy in bits of a probability vector, with `0 log 0 = 0`.
pub fn shannon_entropy(probabilities: &[f64]) -> f64 {
    probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Von Neumann entropy of a positive semidefinite matrix (not necessarily
/// unit trace). Eigenvalues within `NEGATIVE_CLIP` below zero are clipped.
pub fn matrix_entropy(m: &ComplexMatrix) -> Result<f64> {
    let eig = hermitian_eig(m)?;
    let mut s = 0.0;
    for &l in &eig.eigenvalues {
        if l < -NEGATIVE_CLIP {
            return Err(Error::InvalidState(format!("negative eigenvalue {l:.3e} in entropy")));
        }
        if l > 0.0 {
            s -= l * l.log2();
        }
    }
    Ok(s.max(0.0))
}

/// Von Neumann entropy in bits.
pub fn entropy(rho: &DensityMatrix) -> Result<f64> {
    matrix_entropy(rho.matrix())
}

/// `log2(d) - S(rho)`; `d` is the total dimension.
pub fn information_content(rho: &DensityMatrix) -> Result<f64> {
    Ok((rho.dim() as f64).log2() - entropy(rho)?)
}

/// `S(rho_A) + S(rho_B) - S(rho_AB)`.
pub fn mutual_information(rho: &DensityMatrix) -> Result<f64> {
    let sa = entropy(&partial_trace(rho, Subsystem::A))?;
    let sb = entropy(&partial_trace(rho, Subsystem::B))?;
    let sab = entropy(rho)?;
    Ok(sa + sb - sab)
}

/// `sum_i sqrt(p_i) |i>|psi_i>` with `|i>` the computational basis of
/// `C^n`, `n` = number of states.
pub fn state_from_ensemble(weights: &[f64], states: &[PureState]) -> Result<PureState> {
    if weights.len() != states.len() {
        return Err(Error::InvalidEnsemble(format!(
            "{} weights for {} states",
            weights.len(),
            states.len()
        )));
    }
    if states.is_empty() {
        return Err(Error::InvalidEnsemble("empty ensemble".into()));
    }
    if weights.iter().any(|w| w.is_nan() || *w < 0.0) {
        return Err(Error::InvalidEnsemble("negative or NaN weight".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > STATE_TOL {
        return Err(Error::InvalidEnsemble(format!("weights sum to {total:.12}")));
    }
    let db = states[0].amplitudes().len();
    if let Some(s) = states.iter().find(|s| s.amplitudes().len() != db) {
        return Err(Error::dims("state_from_ensemble", db, s.amplitudes().len()));
    }
    let da = states.len();
    let mut amplitudes = vec![C64::new(0.0, 0.0); da * db];
    for (i, (w, s)) in weights.iter().zip(states).enumerate() {
        let sw = w.sqrt();
        for (j, &x) in s.amplitudes().iter().enumerate() {
            amplitudes[i * db + j] = x * sw;
        }
    }
    PureState::new((da, db), amplitudes)
}

/// Holevo quantity `S(sum p_k rho_k) - sum p_k S(rho_k)`.
pub fn holevo_chi(ensemble: &Ensemble) -> Result<f64> {
    Ok(entropy(&ensemble.average())? - ensemble.average_entropy()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    fn ket(v: &[f64]) -> PureState {
        PureState::single_real(v).unwrap()
    }

    fn classical_mixture() -> DensityMatrix {
        DensityMatrix::new((2, 2), ComplexMatrix::diag(&[0.5, 0.0, 0.0, 0.5])).unwrap()
    }

    #[test]
    fn bell_reduces_to_maximally_mixed() {
        let r = partial_trace(&DensityMatrix::bell(), Subsystem::A);
        assert!(r.matrix().approx_eq(&ComplexMatrix::diag(&[0.5, 0.5]), 1e-12));
    }

    #[test]
    fn product_state_reduction() {
        let ra = DensityMatrix::single(ComplexMatrix::diag(&[0.3, 0.7])).unwrap();
        let rb = DensityMatrix::single(ComplexMatrix::diag(&[0.9, 0.1])).unwrap();
        let p = DensityMatrix::product(&ra, &rb);
        assert!(partial_trace(&p, Subsystem::A).matrix().approx_eq(ra.matrix(), 1e-12));
        assert!(partial_trace(&p, Subsystem::B).matrix().approx_eq(rb.matrix(), 1e-12));
    }

    #[test]
    fn classical_mixture_reduction() {
        let r = partial_trace(&classical_mixture(), Subsystem::B);
        assert!(r.matrix().approx_eq(&ComplexMatrix::diag(&[0.5, 0.5]), 1e-15));
    }

    #[test]
    fn entropy_examples() {
        assert!(entropy(&ket(&[1.0, 0.0]).density()).unwrap().abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed((2, 1));
        assert!((entropy(&mixed).unwrap() - 1.0).abs() < 1e-12);
        let d = DensityMatrix::single(ComplexMatrix::diag(&[0.25, 0.75])).unwrap();
        let expected = -0.25 * 0.25f64.log2() - 0.75 * 0.75f64.log2();
        assert!((entropy(&d).unwrap() - expected).abs() < 1e-12);
        assert!((entropy(&d).unwrap() - 0.811278).abs() < 1e-6);
    }

    #[test]
    fn entropy_clips_tiny_negative_eigenvalues() {
        let m = ComplexMatrix::diag(&[1.0 + 5e-10, -5e-10]);
        assert!(matrix_entropy(&m).unwrap() < 1e-8);
        let bad = ComplexMatrix::diag(&[1.1, -0.1]);
        assert!(matrix_entropy(&bad).is_err());
    }

    #[test]
    fn information_content_examples() {
        assert!((information_content(&ket(&[0.6, 0.8]).density()).unwrap() - 1.0).abs() < 1e-12);
        assert!(information_content(&DensityMatrix::maximally_mixed((2, 1))).unwrap().abs() < 1e-12);
        assert!((information_content(&DensityMatrix::bell()).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        let ra = DensityMatrix::single(ComplexMatrix::diag(&[0.3, 0.7])).unwrap();
        let rb = DensityMatrix::single(ComplexMatrix::diag(&[0.4, 0.6])).unwrap();
        assert!(mutual_information(&DensityMatrix::product(&ra, &rb)).unwrap().abs() < 1e-12);
        assert!((mutual_information(&DensityMatrix::bell()).unwrap() - 2.0).abs() < 1e-12);
        assert!((mutual_information(&classical_mixture()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_ensemble_gives_bell_state() {
        let psi = state_from_ensemble(&[0.5, 0.5], &[ket(&[1.0, 0.0]), ket(&[0.0, 1.0])]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [c64(s, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(s, 0.0)];
        assert_eq!(psi.dims(), (2, 2));
        for (a, b) in psi.amplitudes().iter().zip(&expected) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn trivial_ensemble() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = state_from_ensemble(&[1.0], &[ket(&[s, s])]).unwrap();
        assert_eq!(psi.dims(), (1, 2));
        assert!((psi.amplitudes()[0].re - s).abs() < 1e-15);
        assert!((psi.amplitudes()[1].re - s).abs() < 1e-15);
    }

    #[test]
    fn nonorthogonal_ensemble_construction() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = state_from_ensemble(&[0.5, 0.5], &[ket(&[s, s]), ket(&[0.8, -0.6])]).unwrap();
        let expected = [0.5, 0.5, 0.8 * s, -0.6 * s];
        for (a, b) in psi.amplitudes().iter().zip(expected) {
            assert!((a.re - b).abs() < 1e-15 && a.im == 0.0);
        }
        // Bob's reduction is the ensemble average.
        let rb = partial_trace(&psi.density(), Subsystem::B);
        let avg = Ensemble::from_pure(vec![0.5, 0.5], &[ket(&[s, s]), ket(&[0.8, -0.6])])
            .unwrap()
            .average();
        assert!(rb.matrix().approx_eq(avg.matrix(), 1e-15));
    }

    #[test]
    fn state_from_ensemble_rejects_count_mismatch() {
        assert!(state_from_ensemble(&[0.5, 0.5], &[ket(&[1.0, 0.0])]).is_err());
    }

    #[test]
    fn holevo_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let same = Ensemble::from_pure(vec![0.3, 0.7], &[ket(&[s, s]), ket(&[s, s])]).unwrap();
        assert!(holevo_chi(&same).unwrap().abs() < 1e-12);
        let orth = Ensemble::from_pure(vec![0.5, 0.5], &[ket(&[1.0, 0.0]), ket(&[0.0, 1.0])]).unwrap();
        assert!((holevo_chi(&orth).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new((2, 1), ComplexMatrix::diag(&[0.6, 0.6])).is_err());
        assert!(DensityMatrix::new((2, 1), ComplexMatrix::diag(&[1.2, -0.2])).is_err());
        assert!(DensityMatrix::new((2, 2), ComplexMatrix::diag(&[0.5, 0.5])).is_err());
        let nh = ComplexMatrix::from_rows(&[
            vec![c64(0.5, 0.0), c64(0.1, 0.0)],
            vec![c64(0.2, 0.0), c64(0.5, 0.0)],
        ])
        .unwrap();
        assert!(DensityMatrix::new((2, 1), nh).is_err());
    }

    #[test]
    fn subsystem_labels_parse() {
        assert_eq!("A".parse::<Subsystem>().unwrap(), Subsystem::A);
        assert_eq!("b".parse::<Subsystem>().unwrap(), Subsystem::B);
        assert!("C".parse::<Subsystem>().is_err());
    }
}
