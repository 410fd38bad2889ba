//! Quantum channels in Kraus form or as qubit Bloch-affine maps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{pauli_x, pauli_y, pauli_z, ComplexMatrix};
use crate::state::DensityMatrix;

const COMPLETENESS_TOL: f64 = 1e-9;
const BLOCH_SAMPLES: usize = 10_000;
const BLOCH_SAMPLE_SEED: u64 = 0x5eed_b10c;

/// `rho -> sum_k A_k rho A_k^dagger` with `sum_k A_k^dagger A_k = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    operators: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::InvalidChannel("no Kraus operators".into()));
        };
        let d = first.rows();
        let mut sum = ComplexMatrix::zeros(d, d);
        for (k, a) in operators.iter().enumerate() {
            if a.rows() != d || a.cols() != d {
                return Err(Error::dims(
                    "KrausChannel::new",
                    format!("{d}x{d}"),
                    format!("{}x{} (operator {k})", a.rows(), a.cols()),
                ));
            }
            sum = &sum + &a.adjoint().matmul(a)?;
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(d));
        if dev > COMPLETENESS_TOL {
            return Err(Error::InvalidChannel(format!(
                "Kraus operators are not trace preserving (deviation {dev:.3e})"
            )));
        }
        Ok(Self { operators })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            operators: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].rows()
    }

    fn apply_linear(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for a in &self.operators {
            out = &out + &(&(a * x) * &a.adjoint());
        }
        out
    }
}

/// Qubit map acting on Bloch vectors as `w -> scale * w + offset`
/// (componentwise scale), with `sigma_1,2,3 = X, Y, Z` and `|0>` the `+1`
/// eigenvector of `Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochAffineChannel {
    scale: [f64; 3],
    offset: [f64; 3],
}

impl BlochAffineChannel {
    /// Rejects maps that send some sampled unit Bloch vector outside the
    /// unit ball (10^4 samples, tolerance `1e-9`).
    pub fn new(scale: [f64; 3], offset: [f64; 3]) -> Result<Self> {
        if scale.iter().chain(&offset).any(|x| !x.is_finite()) {
            return Err(Error::InvalidChannel("non-finite Bloch parameters".into()));
        }
        let channel = Self { scale, offset };
        let worst = channel.sampled_max_image_norm();
        if worst > 1.0 + 1e-9 {
            return Err(Error::InvalidChannel(format!(
                "Bloch map leaves the unit ball (|w'| = {worst:.6})"
            )));
        }
        Ok(channel)
    }

    pub fn scale(&self) -> [f64; 3] {
        self.scale
    }

    pub fn offset(&self) -> [f64; 3] {
        self.offset
    }

    pub fn map_bloch(&self, w: [f64; 3]) -> [f64; 3] {
        [
            self.scale[0] * w[0] + self.offset[0],
            self.scale[1] * w[1] + self.offset[1],
            self.scale[2] * w[2] + self.offset[2],
        ]
    }

    fn sampled_max_image_norm(&self) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(BLOCH_SAMPLE_SEED);
        let mut worst: f64 = 0.0;
        for _ in 0..BLOCH_SAMPLES {
            let v: [f64; 3] = [
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            ];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n == 0.0 {
                continue;
            }
            let image = self.map_bloch([v[0] / n, v[1] / n, v[2] / n]);
            worst = worst.max(norm3(image));
        }
        // Poles are where the affine maps are tight; include them exactly.
        for axis in 0..3 {
            for sign in [1.0, -1.0] {
                let mut w = [0.0; 3];
                w[axis] = sign;
                worst = worst.max(norm3(self.map_bloch(w)));
            }
        }
        worst
    }

    /// Affine action extended linearly to arbitrary 2x2 operators:
    /// `X -> (tr X I + sum_i (s_i Tr(X sigma_i) + t_i tr X) sigma_i) / 2`.
    fn apply_linear(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let tr = x.trace();
        let paulis = [pauli_x(), pauli_y(), pauli_z()];
        let mut out = ComplexMatrix::identity(2).scale(tr);
        for (i, sigma) in paulis.iter().enumerate() {
            let w_i = (x * sigma).trace();
            let coeff = w_i * self.scale[i] + tr * self.offset[i];
            out = &out + &sigma.scale(coeff);
        }
        out.scale_real(0.5)
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Bloch vector `(Tr(rho X), Tr(rho Y), Tr(rho Z))` of a qubit operator.
pub fn bloch_vector(rho: &ComplexMatrix) -> [f64; 3] {
    let paulis = [pauli_x(), pauli_y(), pauli_z()];
    let mut w = [0.0; 3];
    for (i, s) in paulis.iter().enumerate() {
        w[i] = (rho * s).trace().re;
    }
    w
}

#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    Kraus(KrausChannel),
    BlochAffine(BlochAffineChannel),
}

impl From<KrausChannel> for Channel {
    fn from(c: KrausChannel) -> Self {
        Channel::Kraus(c)
    }
}

impl From<BlochAffineChannel> for Channel {
    fn from(c: BlochAffineChannel) -> Self {
        Channel::BlochAffine(c)
    }
}

impl Channel {
    pub fn identity(dim: usize) -> Self {
        Channel::Kraus(KrausChannel::identity(dim))
    }

    pub fn dim(&self) -> usize {
        match self {
            Channel::Kraus(k) => k.dim(),
            Channel::BlochAffine(_) => 2,
        }
    }

    /// Linear extension of the channel to any `d x d` operator.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.dim();
        if x.rows() != d || x.cols() != d {
            let ctx = match self {
                Channel::BlochAffine(_) => "Bloch-affine channel (qubit only)",
                Channel::Kraus(_) => "Kraus channel",
            };
            return Err(Error::dims(ctx, format!("{d}x{d}"), format!("{}x{}", x.rows(), x.cols())));
        }
        Ok(match self {
            Channel::Kraus(k) => k.apply_linear(x),
            Channel::BlochAffine(b) => b.apply_linear(x),
        })
    }

    /// Applies the channel to a single-system state (`d_B = 1`) or to the
    /// whole of a bipartite state viewed as one system.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_operator(rho.matrix())?;
        DensityMatrix::new(rho.dims(), out)
    }

    /// `(I_A (x) Lambda)(rho_AB)`, computed blockwise over Alice's indices.
    pub fn apply_to_bob(&self, rho_ab: &DensityMatrix) -> Result<DensityMatrix> {
        let (da, db) = rho_ab.dims();
        if db != self.dim() {
            return Err(Error::dims("apply_to_bob", format!("d_B = {}", self.dim()), format!("d_B = {db}")));
        }
        let mut out = ComplexMatrix::zeros(da * db, da * db);
        for a in 0..da {
            for a2 in 0..da {
                let mapped = self.apply_operator(&rho_ab.block(a, a2))?;
                for j in 0..db {
                    for l in 0..db {
                        out[(a * db + j, a2 * db + l)] = mapped[(j, l)];
                    }
                }
            }
        }
        DensityMatrix::new((da, db), out)
    }
}

pub fn apply(channel: &Channel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    channel.apply(rho)
}

pub fn apply_to_bob(channel: &Channel, rho_ab: &DensityMatrix) -> Result<DensityMatrix> {
    channel.apply_to_bob(rho_ab)
}

/// The amplitude-damping channel with Kraus operators
/// `A_1 = |0><0| + sqrt(1/2)|1><1|`, `A_2 = sqrt(1/2)|0><1|`.
pub fn make_sw99_channel() -> KrausChannel {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a1 = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, s]]).unwrap();
    let a2 = ComplexMatrix::from_real_rows(&[&[0.0, s], &[0.0, 0.0]]).unwrap();
    KrausChannel::new(vec![a1, a2]).expect("amplitude damping is trace preserving")
}

/// `w -> (0.6 w_1, 0.6 w_2, 0.5 + 0.5 w_3)`.
pub fn make_knr01_channel() -> BlochAffineChannel {
    BlochAffineChannel::new([0.6, 0.6, 0.5], [0.0, 0.0, 0.5]).expect("maps the ball into itself")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;
    use crate::state::{PureState, Subsystem};

    fn ket(v: &[f64]) -> DensityMatrix {
        PureState::single_real(v).unwrap().density()
    }

    #[test]
    fn sw99_channel_kraus_properties() {
        let ch = make_sw99_channel();
        let [a1, a2] = ch.operators() else { panic!() };
        let sum = &(&a1.adjoint() * a1) + &(&a2.adjoint() * a2);
        assert!(sum.approx_eq(&ComplexMatrix::identity(2), 1e-15));
        let v0 = a1.apply(&[c64(1.0, 0.0), c64(0.0, 0.0)]).unwrap();
        assert_eq!(v0, vec![c64(1.0, 0.0), c64(0.0, 0.0)]);
        let v1 = a2.apply(&[c64(0.0, 0.0), c64(1.0, 0.0)]).unwrap();
        assert!((v1[0].re - 0.5f64.sqrt()).abs() < 1e-15 && v1[1].norm() == 0.0);
    }

    #[test]
    fn sw99_channel_on_basis_states() {
        let ch = Channel::from(make_sw99_channel());
        let out0 = ch.apply(&ket(&[1.0, 0.0])).unwrap();
        assert!(out0.matrix().approx_eq(&ComplexMatrix::diag(&[1.0, 0.0]), 1e-15));
        let out1 = ch.apply(&ket(&[0.0, 1.0])).unwrap();
        assert!(out1.matrix().approx_eq(&ComplexMatrix::diag(&[0.5, 0.5]), 1e-15));
    }

    #[test]
    fn knr01_parameters() {
        let ch = make_knr01_channel();
        assert_eq!(ch.scale(), [0.6, 0.6, 0.5]);
        assert_eq!(ch.offset(), [0.0, 0.0, 0.5]);
        assert_eq!(ch.map_bloch([0.0, 0.0, 1.0]), [0.0, 0.0, 1.0]);
        let fixed = Channel::from(ch).apply(&ket(&[1.0, 0.0])).unwrap();
        assert!(fixed.matrix().approx_eq(&ComplexMatrix::diag(&[1.0, 0.0]), 1e-15));
    }

    #[test]
    fn knr01_on_maximally_mixed() {
        let ch = Channel::from(make_knr01_channel());
        let out = ch.apply(&DensityMatrix::maximally_mixed((2, 1))).unwrap();
        assert!(out.matrix().approx_eq(&ComplexMatrix::diag(&[0.75, 0.25]), 1e-15));
    }

    #[test]
    fn bloch_channel_rejects_expanding_map() {
        assert!(BlochAffineChannel::new([1.0, 1.0, 1.0], [0.0, 0.0, 0.1]).is_err());
        assert!(BlochAffineChannel::new([0.0, 0.0, 0.0], [0.0, 0.0, 1.0]).is_ok());
    }

    #[test]
    fn bloch_channel_rejects_non_qubit() {
        let ch = Channel::from(make_knr01_channel());
        assert!(ch.apply(&DensityMatrix::maximally_mixed((3, 1))).is_err());
    }

    #[test]
    fn kraus_rejects_non_trace_preserving() {
        let a = ComplexMatrix::diag(&[1.0, 0.5]);
        assert!(KrausChannel::new(vec![a]).is_err());
        assert!(KrausChannel::new(vec![]).is_err());
    }

    #[test]
    fn identity_channel_on_bob() {
        let rho = DensityMatrix::bell();
        let out = Channel::identity(2).apply_to_bob(&rho).unwrap();
        assert!(out.matrix().approx_eq(rho.matrix(), 1e-15));
    }

    #[test]
    fn fixed_point_product_on_bob() {
        let rho = PureState::new((2, 2), vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)])
            .unwrap()
            .density();
        let out = Channel::from(make_sw99_channel()).apply_to_bob(&rho).unwrap();
        assert!(out.matrix().approx_eq(&ComplexMatrix::diag(&[1.0, 0.0, 0.0, 0.0]), 1e-15));
    }

    #[test]
    fn apply_to_bob_preserves_alice_reduction() {
        let rho = DensityMatrix::bell();
        for ch in [Channel::from(make_sw99_channel()), Channel::from(make_knr01_channel())] {
            let out = ch.apply_to_bob(&rho).unwrap();
            let before = rho.reduced(Subsystem::A);
            let after = out.reduced(Subsystem::A);
            assert!(after.matrix().approx_eq(before.matrix(), 1e-12));
        }
    }

    #[test]
    fn apply_to_bob_rejects_dimension_mismatch() {
        let rho = DensityMatrix::maximally_mixed((2, 3));
        assert!(Channel::from(make_sw99_channel()).apply_to_bob(&rho).is_err());
    }

    #[test]
    fn bloch_vector_of_plus_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let w = bloch_vector(ket(&[s, s]).matrix());
        assert!((w[0] - 1.0).abs() < 1e-12 && w[1].abs() < 1e-12 && w[2].abs() < 1e-12);
    }
}
