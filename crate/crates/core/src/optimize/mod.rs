//! Search over complete rank-1 Alice measurements.
//!
//! A basis is the column set of `W exp(iH)` where `W` is a per-start anchor
//! unitary and `H` is Hermitian, built from `dim^2` real parameters. Each
//! start is refined with Nelder-Mead and polished by restarting the simplex
//! at the incumbent. Starts are, in order: the computational basis, the
//! eigenbasis of `rho_A`, the best point of a `(theta, phi)` grid when the
//! searched block is a qubit, then `restarts` random generators drawn from a
//! seeded stream. Results depend only on the state and the config.

pub(crate) mod simplex;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, expi_hermitian, hermitian_eig, ComplexMatrix, C64};
use crate::measurement::ProjectiveMeasurement;
use crate::measures::{self, dephased_alice_entropy, outcome_terms, StateEntropies};
use crate::state::{partial_trace, DensityMatrix, Subsystem};

use simplex::nelder_mead;

/// Eigenvalues of `rho_A` at or below this are treated as kernel.
pub const SUPPORT_TOL: f64 = 1e-9;

const INITIAL_STEP: f64 = 0.4;
const POLISH_STEP_FACTOR: f64 = 0.1;
const MAX_POLISH_ROUNDS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Maximize `c_HV`.
    CHv,
    /// Maximize `delta_cl`.
    DeltaCl,
    /// Minimize the per-measurement one-way quantum deficit.
    Deficit,
}

impl Objective {
    pub fn maximizes(self) -> bool {
        !matches!(self, Objective::Deficit)
    }

    /// Evaluates through the public per-measurement functions.
    pub fn evaluate(self, rho: &DensityMatrix, m: &ProjectiveMeasurement) -> Result<f64> {
        match self {
            Objective::CHv => measures::c_hv(rho, m),
            Objective::DeltaCl => measures::delta_cl(rho, m),
            Objective::Deficit => measures::deficit_q(rho, m),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Objective::CHv => "chv",
            Objective::DeltaCl => "dcl",
            Objective::Deficit => "deficit",
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chv" => Ok(Objective::CHv),
            "dcl" => Ok(Objective::DeltaCl),
            "deficit" => Ok(Objective::Deficit),
            other => Err(Error::InvalidArgument(format!("unknown objective `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub grid_points_per_angle: usize,
    pub restarts: usize,
    pub seed: u64,
    pub refine_tolerance: f64,
    pub max_refine_iterations: usize,
    pub support_restricted: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid_points_per_angle: 64,
            restarts: 32,
            seed: 0,
            refine_tolerance: 1e-9,
            max_refine_iterations: 2000,
            support_restricted: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points_per_angle < 1 || self.restarts < 1 || self.max_refine_iterations < 1 {
            return Err(Error::InvalidArgument("optimizer counts must be at least 1".into()));
        }
        if self.refine_tolerance.is_nan() || self.refine_tolerance < 0.0 {
            return Err(Error::InvalidArgument("refine tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

/// Real coordinates of a Hermitian generator: diagonal entries first in
/// row order interleaved with `(re, im)` of each upper off-diagonal entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisParameterization {
    pub dim: usize,
    pub params: Vec<f64>,
}

impl BasisParameterization {
    pub fn new(dim: usize, params: Vec<f64>) -> Result<Self> {
        if params.len() != dim * dim {
            return Err(Error::dims("BasisParameterization::new", dim * dim, params.len()));
        }
        Ok(Self { dim, params })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            params: vec![0.0; dim * dim],
        }
    }

    pub fn generator(&self) -> ComplexMatrix {
        hermitian_from_params(self.dim, &self.params)
    }

    /// Columns of `exp(iH)`.
    pub fn basis(&self) -> Result<ComplexMatrix> {
        expi_hermitian(&self.generator())
    }
}

fn hermitian_from_params(dim: usize, params: &[f64]) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(dim, dim);
    let mut k = 0;
    for i in 0..dim {
        h[(i, i)] = c64(params[k], 0.0);
        k += 1;
        for j in (i + 1)..dim {
            let z = c64(params[k], params[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

/// Orthonormal basis `|v>, |v_perp>` with `|v> = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
pub fn qubit_basis(theta: f64, phi: f64) -> ComplexMatrix {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = C64::from_polar(1.0, phi);
    ComplexMatrix::from_columns(&[vec![c64(c, 0.0), e * s], vec![-e.conj() * s, c64(c, 0.0)]])
        .expect("2x2")
}

/// The searched family of bases: a list of orthogonal blocks (isometries)
/// each rotated independently.
#[derive(Debug, Clone)]
struct SearchSpace {
    dim: usize,
    blocks: Vec<ComplexMatrix>,
}

impl SearchSpace {
    fn new(rho_a: &ComplexMatrix, support_restricted: bool) -> Result<Self> {
        let dim = rho_a.rows();
        if !support_restricted {
            return Ok(Self {
                dim,
                blocks: vec![ComplexMatrix::identity(dim)],
            });
        }
        let eig = hermitian_eig(rho_a)?;
        let (support, kernel): (Vec<usize>, Vec<usize>) = (0..dim).partition(|&k| eig.eigenvalues[k] > SUPPORT_TOL);
        let mut blocks = Vec::new();
        for idx in [support, kernel] {
            if !idx.is_empty() {
                let cols: Vec<Vec<C64>> = idx.iter().map(|&k| eig.eigenvector(k)).collect();
                blocks.push(ComplexMatrix::from_columns(&cols)?);
            }
        }
        Ok(Self { dim, blocks })
    }

    fn param_count(&self) -> usize {
        self.blocks.iter().map(|b| b.cols() * b.cols()).sum()
    }

    fn basis(&self, anchors: &[ComplexMatrix], params: &[f64]) -> Result<ComplexMatrix> {
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(self.dim);
        let mut offset = 0;
        for (block, anchor) in self.blocks.iter().zip(anchors) {
            let r = block.cols();
            let rot = expi_hermitian(&hermitian_from_params(r, &params[offset..offset + r * r]))?;
            offset += r * r;
            cols.extend(block.matmul(anchor)?.matmul(&rot)?.columns());
        }
        ComplexMatrix::from_columns(&cols)
    }

    fn identity_anchors(&self) -> Vec<ComplexMatrix> {
        self.blocks.iter().map(|b| ComplexMatrix::identity(b.cols())).collect()
    }
}

/// Objective evaluation with the state-only entropies cached.
struct Evaluator<'a> {
    rho: &'a DensityMatrix,
    rho_a: ComplexMatrix,
    entropies: StateEntropies,
    objective: Objective,
}

impl<'a> Evaluator<'a> {
    fn new(rho: &'a DensityMatrix, objective: Objective) -> Result<Self> {
        Ok(Self {
            rho,
            rho_a: partial_trace(rho, Subsystem::A).into_matrix(),
            entropies: StateEntropies::of(rho)?,
            objective,
        })
    }

    fn value(&self, basis: &ComplexMatrix) -> Result<f64> {
        let m = ProjectiveMeasurement::from_unitary(basis)?;
        let bob_avg = outcome_terms(self.rho, &m)?.bob_average_entropy;
        let c_hv = self.entropies.s_b - bob_avg;
        Ok(match self.objective {
            Objective::CHv => c_hv,
            Objective::DeltaCl => self.entropies.s_a - dephased_alice_entropy(&self.rho_a, &m)? + c_hv,
            Objective::Deficit => bob_avg + dephased_alice_entropy(&self.rho_a, &m)? - self.entropies.s_ab,
        })
    }

    /// Value to minimize.
    fn cost(&self, basis: &ComplexMatrix) -> f64 {
        match self.value(basis) {
            Ok(v) if self.objective.maximizes() => -v,
            Ok(v) => v,
            Err(_) => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub objective: Objective,
    /// Best value found: a lower bound for maximizations, an upper bound for
    /// the deficit minimization.
    pub value: f64,
    #[serde(skip)]
    pub best_measurement: Option<ProjectiveMeasurement>,
    /// Columns are the optimal basis vectors.
    #[serde(skip)]
    pub best_basis: Option<ComplexMatrix>,
    pub best_start: usize,
    pub starts: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub history: Option<Vec<(usize, f64)>>,
}

impl OptimizationResult {
    pub fn measurement(&self) -> &ProjectiveMeasurement {
        self.best_measurement.as_ref().expect("set by optimize")
    }

    pub fn basis(&self) -> &ComplexMatrix {
        self.best_basis.as_ref().expect("set by optimize")
    }
}

struct Start {
    anchors: Vec<ComplexMatrix>,
    params: Vec<f64>,
}

struct StartOutcome {
    cost: f64,
    basis: ComplexMatrix,
    evaluations: usize,
    converged: bool,
}

fn run_start(space: &SearchSpace, eval: &Evaluator<'_>, start: &Start, cfg: &OptimizerConfig) -> Result<StartOutcome> {
    let mut f = |x: &[f64]| match space.basis(&start.anchors, x) {
        Ok(b) => eval.cost(&b),
        Err(_) => f64::INFINITY,
    };
    let mut budget = cfg.max_refine_iterations;
    let mut step = INITIAL_STEP;
    let mut out = nelder_mead(&mut f, &start.params, step, cfg.refine_tolerance, budget);
    budget = budget.saturating_sub(out.iterations);
    let mut evaluations = out.evaluations;
    for _ in 0..MAX_POLISH_ROUNDS {
        if budget == 0 {
            break;
        }
        step *= POLISH_STEP_FACTOR;
        let again = nelder_mead(&mut f, &out.x, step, cfg.refine_tolerance, budget);
        budget = budget.saturating_sub(again.iterations);
        evaluations += again.evaluations;
        let gain = out.fx - again.fx;
        let converged = again.converged;
        if again.fx < out.fx {
            out = again;
        }
        out.converged = converged;
        if gain <= cfg.refine_tolerance {
            break;
        }
    }
    Ok(StartOutcome {
        cost: out.fx,
        basis: space.basis(&start.anchors, &out.x)?,
        evaluations,
        converged: out.converged,
    })
}

fn grid_angles(grid_points: usize) -> (Vec<f64>, Vec<f64>) {
    let thetas = if grid_points == 1 {
        vec![0.0]
    } else {
        (0..grid_points).map(|k| PI * k as f64 / (grid_points - 1) as f64).collect()
    };
    let n_phi = 2 * grid_points;
    let phis = (0..n_phi).map(|l| 2.0 * PI * l as f64 / n_phi as f64).collect();
    (thetas, phis)
}

/// Best `(cost, theta, phi)` on the grid; ties go to the first point.
fn scan_grid(grid_points: usize, mut cost: impl FnMut(&ComplexMatrix) -> f64) -> (f64, ComplexMatrix) {
    let (thetas, phis) = grid_angles(grid_points);
    let mut best = (f64::INFINITY, qubit_basis(0.0, 0.0));
    for &theta in &thetas {
        for &phi in &phis {
            let u = qubit_basis(theta, phi);
            let c = cost(&u);
            if c < best.0 {
                best = (c, u);
            }
        }
    }
    best
}

/// Exhaustive scan over qubit bases on a `grid_points x 2 grid_points`
/// `(theta, phi)` grid, with `theta` in `[0, pi]` and `phi` in `[0, 2 pi)`.
/// Returns the best objective value and the basis (as columns).
pub fn grid_scan_qubit(objective: Objective, rho_ab: &DensityMatrix, grid_points: usize) -> Result<(f64, ComplexMatrix)> {
    if rho_ab.dim_a() != 2 {
        return Err(Error::dims("grid_scan_qubit", "d_A = 2", format!("d_A = {}", rho_ab.dim_a())));
    }
    if grid_points == 0 {
        return Err(Error::InvalidArgument("grid needs at least one point".into()));
    }
    let sign = if objective.maximizes() { -1.0 } else { 1.0 };
    let mut failure = None;
    let (cost, basis) = scan_grid(grid_points, |u| {
        let m = ProjectiveMeasurement::from_unitary(u).expect("qubit basis is orthonormal");
        match objective.evaluate(rho_ab, &m) {
            Ok(v) => sign * v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((sign * cost, basis))
}

fn build_starts(space: &SearchSpace, rho_a: &ComplexMatrix, eval: &Evaluator<'_>, cfg: &OptimizerConfig) -> Result<Vec<Start>> {
    let n_params = space.param_count();
    let mut starts = vec![Start {
        anchors: space.identity_anchors(),
        params: vec![0.0; n_params],
    }];
    if space.blocks.len() == 1 {
        let eig = hermitian_eig(rho_a)?;
        starts.push(Start {
            anchors: vec![eig.eigenvectors],
            params: vec![0.0; n_params],
        });
    }
    if space.blocks[0].cols() == 2 {
        let tail = space.identity_anchors().split_off(1);
        let (_, best) = scan_grid(cfg.grid_points_per_angle, |u| {
            let mut anchors = vec![u.clone()];
            anchors.extend(tail.iter().cloned());
            match space.basis(&anchors, &vec![0.0; n_params]) {
                Ok(b) => eval.cost(&b),
                Err(_) => f64::INFINITY,
            }
        });
        let mut anchors = vec![best];
        anchors.extend(tail);
        starts.push(Start {
            anchors,
            params: vec![0.0; n_params],
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.restarts {
        starts.push(Start {
            anchors: space.identity_anchors(),
            params: (0..n_params).map(|_| rng.gen_range(-PI..=PI)).collect(),
        });
    }
    Ok(starts)
}

/// Optimizes `objective` over complete rank-1 measurements on Alice's space.
pub fn optimize(rho_ab: &DensityMatrix, objective: Objective, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    cfg.validate()?;
    let eval = Evaluator::new(rho_ab, objective)?;
    let space = SearchSpace::new(&eval.rho_a, cfg.support_restricted)?;
    let starts = build_starts(&space, &eval.rho_a, &eval, cfg)?;

    let outcomes: Vec<Result<StartOutcome>> = starts
        .par_iter()
        .map(|s| run_start(&space, &eval, s, cfg))
        .collect();
    let outcomes: Vec<StartOutcome> = outcomes.into_iter().collect::<Result<_>>()?;

    let sign = if objective.maximizes() { -1.0 } else { 1.0 };
    let mut best_index = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.cost < outcomes[best_index].cost {
            best_index = i;
        }
    }
    let best = &outcomes[best_index];
    let measurement = ProjectiveMeasurement::from_unitary(&best.basis)?;
    let value = objective.evaluate(rho_ab, &measurement)?;
    Ok(OptimizationResult {
        objective,
        value,
        best_measurement: Some(measurement),
        best_basis: Some(best.basis.clone()),
        best_start: best_index,
        starts: outcomes.len(),
        evaluations: outcomes.iter().map(|o| o.evaluations).sum(),
        converged: best.converged,
        history: Some(outcomes.iter().enumerate().map(|(i, o)| (i, sign * o.cost)).collect()),
    })
}

/// Best `c_HV` over rank-1 projective measurements (a lower bound on `C_HV`).
pub fn maximize_c_hv(rho_ab: &DensityMatrix, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    optimize(rho_ab, Objective::CHv, cfg)
}

/// Best `delta_cl` over rank-1 projective measurements.
pub fn maximize_delta_cl(rho_ab: &DensityMatrix, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    optimize(rho_ab, Objective::DeltaCl, cfg)
}

/// Smallest per-measurement one-way quantum deficit found.
pub fn minimize_deficit(rho_ab: &DensityMatrix, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    optimize(rho_ab, Objective::Deficit, cfg)
}
