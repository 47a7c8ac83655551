use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::extended::ExtendedReal;
use crate::linalg::hermitian::projector_above;
use crate::linalg::matrix::{self, c64, CMatrix, CVector, MatrixJson};
use crate::linalg::{spectral_norm, HermitianOperator, SpectralDecomposition};
use crate::tol::DEFAULT;
use crate::{rng, Error, Result};

/// PSD Hermitian operator with unit trace. The spectrum is cached.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    op: HermitianOperator,
    spec: SpectralDecomposition,
    trace_defect: f64,
}

impl DensityOperator {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let spec = op.eig()?;
        let tau = spec.support_threshold();
        if spec.min_eigenvalue() < -tau {
            return Err(Error::InvalidState(format!(
                "eigenvalue {:.3e} is below -{tau:.1e}",
                spec.min_eigenvalue()
            )));
        }
        let trace_defect = (op.trace() - 1.0).abs();
        if trace_defect > DEFAULT.unit_trace {
            return Err(Error::InvalidState(format!("trace differs from 1 by {trace_defect:.3e}")));
        }
        Ok(DensityOperator { op, spec, trace_defect })
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(m)?)
    }

    /// Normalize a PSD matrix by its trace.
    pub fn normalized(m: CMatrix) -> Result<Self> {
        let tr = m.trace().re;
        if !(tr > 0.0) {
            return Err(Error::InvalidState("cannot normalize an operator with non-positive trace".into()));
        }
        Self::new(HermitianOperator::from_raw(m / c64(tr, 0.0)))
    }

    pub fn from_diag(probs: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::diag(probs))
    }

    pub fn pure(psi: &CVector) -> Result<Self> {
        Self::normalized(psi * psi.adjoint())
    }

    /// Computational basis projector `|k⟩⟨k|` in dimension `d`.
    pub fn basis(d: usize, k: usize) -> Self {
        let mut p = vec![0.0; d];
        p[k] = 1.0;
        Self::from_diag(&p).expect("basis projector is a state")
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::from_diag(&vec![1.0 / d as f64; d]).expect("I/d is a state")
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spec
    }

    pub fn trace_defect(&self) -> f64 {
        self.trace_defect
    }

    pub fn support_threshold(&self) -> f64 {
        self.spec.support_threshold()
    }

    pub fn rank(&self) -> usize {
        let tau = self.support_threshold();
        self.spec.eigenvalues.iter().filter(|&&l| l > tau).count()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.dim()
    }

    pub fn support_projector(&self) -> HermitianOperator {
        projector_above(&self.spec, self.support_threshold())
    }

    /// `ρ^{1/2}` with eigenvalues clamped at zero.
    pub fn sqrt(&self) -> HermitianOperator {
        HermitianOperator::from_raw(self.spec.map_real(|l| l.max(0.0).sqrt()))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::new(self.op.kron(&other.op)).expect("tensor product of states")
    }

    /// `U ρ U†` for unitary `U`.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        Self::new(self.op.conjugate_by(u)?)
    }

    pub fn regularize(&self, epsilon: f64) -> Result<RegularizedState> {
        RegularizedState::new(self.clone(), epsilon)
    }
}

/// `ρ + ε·I`, deliberately not renormalized (trace `1 + ε·d`).
#[derive(Clone, Debug)]
pub struct RegularizedState {
    pub base: DensityOperator,
    pub epsilon: f64,
}

impl RegularizedState {
    pub fn new(base: DensityOperator, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Schedule(format!("regularization must be positive, got {epsilon}")));
        }
        Ok(RegularizedState { base, epsilon })
    }

    pub fn op(&self) -> HermitianOperator {
        self.base.op().shifted(self.epsilon)
    }

    /// Spectrum of `ρ + ε I`, reusing the eigenvectors of `ρ`.
    pub fn spectrum(&self) -> SpectralDecomposition {
        let s = self.base.spectrum();
        SpectralDecomposition {
            eigenvalues: s.eigenvalues.iter().map(|l| l.max(0.0) + self.epsilon).collect(),
            eigenvectors: s.eigenvectors.clone(),
        }
    }

    pub fn trace(&self) -> f64 {
        1.0 + self.epsilon * self.base.dim() as f64
    }
}

/// Strictly decreasing positive regularization parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EpsSchedule(Vec<f64>);

impl EpsSchedule {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Schedule("schedule is empty".into()));
        }
        if values.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(Error::Schedule("schedule entries must be positive and finite".into()));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Schedule("schedule must be strictly decreasing".into()));
        }
        Ok(EpsSchedule(values))
    }

    /// `10^{-2-k}`, `k = 0..6`.
    pub fn default_geometric() -> Self {
        EpsSchedule((0..7).map(|k| 10f64.powi(-2 - k)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn last(&self) -> f64 {
        *self.0.last().expect("non-empty")
    }
}

impl Default for EpsSchedule {
    fn default() -> Self {
        Self::default_geometric()
    }
}

impl TryFrom<Vec<f64>> for EpsSchedule {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<EpsSchedule> for Vec<f64> {
    fn from(s: EpsSchedule) -> Self {
        s.0
    }
}

fn entropy_of_spectrum(vals: &[f64], tau: f64) -> f64 {
    -vals.iter().filter(|&&l| l > tau).map(|&l| ExtendedReal::x_log_x(l)).sum::<f64>()
}

/// `S(ρ) = −Tr ρ log ρ` in nats.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    entropy_of_spectrum(&rho.spectrum().eigenvalues, rho.support_threshold())
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyLimit {
    pub epsilons: Vec<f64>,
    /// `−Tr(ρ_ε log ρ_ε)` per schedule entry.
    pub values: Vec<f64>,
    pub last: f64,
    pub direct: f64,
    /// `10·ε_last·d·|log ε_last|`.
    pub tolerance: f64,
    pub agrees: bool,
}

pub fn regularized_entropy_limit(rho: &DensityOperator, schedule: &EpsSchedule) -> EntropyLimit {
    let d = rho.dim() as f64;
    let values: Vec<f64> = schedule
        .values()
        .iter()
        .map(|&eps| {
            let reg = RegularizedState { base: rho.clone(), epsilon: eps };
            entropy_of_spectrum(&reg.spectrum().eigenvalues, 0.0)
        })
        .collect();
    let last = *values.last().expect("non-empty schedule");
    let direct = von_neumann_entropy(rho);
    let e = schedule.last();
    let tolerance = 10.0 * e * d * e.ln().abs();
    EntropyLimit {
        epsilons: schedule.values().to_vec(),
        agrees: (last - direct).abs() <= tolerance,
        values,
        last,
        direct,
        tolerance,
    }
}

/// `GG†/Tr(GG†)` with `G` a `d×rank` Ginibre matrix.
pub fn random_density(rng: &mut impl Rng, d: usize, rank: usize) -> Result<DensityOperator> {
    if rank == 0 || rank > d {
        return Err(Error::InvalidArgument(format!("rank must lie in 1..={d}, got {rank}")));
    }
    let g = rng::ginibre(rng, d, rank);
    DensityOperator::normalized(&g * g.adjoint())
}

pub fn random_density_seeded(d: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    random_density(&mut rng::stream(seed, 0), d, rank)
}

/// Pair with `supp ρ ⊆ supp σ`: both live on a random `rank_sigma`-dimensional subspace,
/// with `ρ` of `rank_rho` inside it.
pub fn random_nested_pair(
    rng: &mut impl Rng,
    d: usize,
    rank_rho: usize,
    rank_sigma: usize,
) -> Result<(DensityOperator, DensityOperator)> {
    if rank_rho == 0 || rank_rho > rank_sigma || rank_sigma > d {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= rank_rho <= rank_sigma <= {d}, got {rank_rho}, {rank_sigma}"
        )));
    }
    let q = rng::random_isometry(rng, d, rank_sigma);
    let g = rng::ginibre(rng, rank_sigma, rank_rho);
    let h = rng::ginibre(rng, rank_sigma, rank_sigma);
    let rho = DensityOperator::normalized(&q * (&g * g.adjoint()) * q.adjoint())?;
    let sigma = DensityOperator::normalized(&q * (&h * h.adjoint()) * q.adjoint())?;
    Ok((rho, sigma))
}

/// `‖(I − P_σ) P_ρ‖_2 ≤ tol`.
pub fn support_overlap_defect(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::dim(format!("state dimensions {} and {} differ", rho.dim(), sigma.dim())));
    }
    let p_rho = rho.support_projector();
    let p_sigma = sigma.support_projector();
    let comp = matrix::identity(rho.dim()) - p_sigma.matrix();
    spectral_norm(&(comp * p_rho.matrix()))
}

pub fn support_contained(rho: &DensityOperator, sigma: &DensityOperator, tol: f64) -> Result<bool> {
    Ok(support_overlap_defect(rho, sigma)? <= tol)
}

/// Wire format: matrix JSON tagged `"kind": "density"` with optional sampler metadata.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateJson {
    pub kind: String,
    #[serde(flatten)]
    pub matrix: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
}

impl StateJson {
    pub fn from_state(rho: &DensityOperator, seed: Option<u64>, rank: Option<usize>) -> Self {
        StateJson { kind: "density".into(), matrix: MatrixJson::from_matrix(rho.matrix()), seed, rank }
    }

    pub fn to_state(&self) -> Result<DensityOperator> {
        if self.kind != "density" {
            return Err(Error::Parse(format!("expected kind \"density\", got \"{}\"", self.kind)));
        }
        DensityOperator::from_matrix(self.matrix.to_matrix()?)
    }
}

pub fn state_from_json(text: &str) -> Result<DensityOperator> {
    serde_json::from_str::<StateJson>(text)?.to_state()
}

pub fn state_to_json(rho: &DensityOperator) -> String {
    serde_json::to_string_pretty(&StateJson::from_state(rho, None, None)).expect("serializable")
}
