use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::matrix::{self, c64, CMatrix, MatrixJson};
use crate::linalg::unitary::{complete_to_unitary, unitarity_defect};
use crate::linalg::{loewner_gap, min_eigenvalue, HermitianOperator, LoewnerCertificate};
use crate::states::DensityOperator;
use crate::tol::DEFAULT;
use crate::{rng, Error, Result};

/// `𝓗_a ⊗ 𝓗_b`; composite index `a·d_b + b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteDims {
    pub d_a: usize,
    pub d_b: usize,
}

impl BipartiteDims {
    pub fn new(d_a: usize, d_b: usize) -> Result<Self> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::dim("subsystem dimensions must be positive"));
        }
        Ok(BipartiteDims { d_a, d_b })
    }

    pub fn d_ab(&self) -> usize {
        self.d_a * self.d_b
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.d_ab() {
            return Err(Error::dim(format!(
                "operator dimension {n} does not match d_a·d_b = {}·{}",
                self.d_a, self.d_b
            )));
        }
        Ok(())
    }
}

/// `Tr_b X`, `(Tr_b X)[i,j] = Σ_k X[i·d_b+k, j·d_b+k]`.
pub fn partial_trace_b_matrix(x: &CMatrix, dims: BipartiteDims) -> Result<CMatrix> {
    dims.check(x.nrows())?;
    dims.check(x.ncols())?;
    let (da, db) = (dims.d_a, dims.d_b);
    Ok(CMatrix::from_fn(da, da, |i, j| (0..db).map(|k| x[(i * db + k, j * db + k)]).sum()))
}

pub fn partial_trace_b(x: &HermitianOperator, dims: BipartiteDims) -> Result<HermitianOperator> {
    Ok(HermitianOperator::from_raw(partial_trace_b_matrix(x.matrix(), dims)?))
}

pub fn partial_trace_state(rho: &DensityOperator, dims: BipartiteDims) -> Result<DensityOperator> {
    DensityOperator::new(partial_trace_b(rho.op(), dims)?)
}

/// `Tr_b† X = X ⊗ I_b`.
pub fn partial_trace_adjoint_matrix(x: &CMatrix, dims: BipartiteDims) -> Result<CMatrix> {
    if x.nrows() != dims.d_a || x.ncols() != dims.d_a {
        return Err(Error::dim(format!("expected a {0}x{0} operator", dims.d_a)));
    }
    Ok(matrix::kron(x, &matrix::identity(dims.d_b)))
}

pub fn partial_trace_adjoint(x: &HermitianOperator, dims: BipartiteDims) -> Result<HermitianOperator> {
    Ok(HermitianOperator::from_raw(partial_trace_adjoint_matrix(x.matrix(), dims)?))
}

/// Certify `Φ(X†)Φ(X) ≤ Φ(X†X)` for a unital CP map `Φ`.
pub fn schwarz_defect(
    phi: impl Fn(&CMatrix) -> CMatrix,
    x: &CMatrix,
    tol: f64,
) -> Result<LoewnerCertificate> {
    let xd = x.adjoint();
    let gap = phi(&(&xd * x)) - phi(&xd) * phi(x);
    loewner_gap(&matrix::symmetrize(&gap), tol)
}

/// CPTP map in Kraus form.
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
    d_in: usize,
    d_out: usize,
    completeness_defect: f64,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let (d_out, d_in) = first.shape();
        if d_in == 0 || d_out == 0 {
            return Err(Error::InvalidChannel("Kraus operators must be non-empty".into()));
        }
        if kraus.iter().any(|k| k.shape() != (d_out, d_in)) {
            return Err(Error::InvalidChannel("Kraus operators have inconsistent shapes".into()));
        }
        if kraus.iter().any(|k| !matrix::all_finite(k)) {
            return Err(Error::InvalidChannel("Kraus operators contain non-finite entries".into()));
        }
        let sum: CMatrix = kraus.iter().map(|k| k.adjoint() * k).fold(matrix::zeros(d_in, d_in), |a, b| a + b);
        let completeness_defect = (sum - matrix::identity(d_in)).norm();
        if completeness_defect > DEFAULT.completeness {
            return Err(Error::InvalidChannel(format!(
                "Σ K†K differs from the identity by {completeness_defect:.3e}"
            )));
        }
        Ok(QuantumChannel { kraus, d_in, d_out, completeness_defect })
    }

    pub fn identity(d: usize) -> Self {
        Self::new(vec![matrix::identity(d)]).expect("identity channel")
    }

    pub fn unitary(u: &CMatrix) -> Result<Self> {
        if !u.is_square() || unitarity_defect(u) > DEFAULT.orthonormality {
            return Err(Error::InvalidChannel("conjugation requires a unitary".into()));
        }
        Self::new(vec![u.clone()])
    }

    /// Qubit dephasing `{√p' I, √(1−p') Z}` with `p' = 1 − p`.
    pub fn dephasing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("dephasing probability {p} outside [0,1]")));
        }
        let z = matrix::from_real_diag(&[1.0, -1.0]);
        Self::new(vec![matrix::identity(2) * c64((1.0 - p).sqrt(), 0.0), z * c64(p.sqrt(), 0.0)])
    }

    /// `X ↦ Tr(X) I/d`, using the `d²` Weyl operators `X^a Z^b / d`.
    pub fn full_depolarizer(d: usize) -> Self {
        let omega = 2.0 * std::f64::consts::PI / d as f64;
        let mut kraus = Vec::with_capacity(d * d);
        let norm = c64(1.0 / d as f64, 0.0);
        for a in 0..d {
            for b in 0..d {
                let mut w = matrix::zeros(d, d);
                for j in 0..d {
                    let phase = c64(0.0, omega * (b * j) as f64).exp();
                    w[((j + a) % d, j)] = phase * norm;
                }
                kraus.push(w);
            }
        }
        Self::new(kraus).expect("Weyl family is complete")
    }

    /// `Tr_b` as the Kraus family `{I_a ⊗ ⟨k|}`.
    pub fn partial_trace(dims: BipartiteDims) -> Self {
        let kraus = (0..dims.d_b)
            .map(|k| matrix::kron(&matrix::identity(dims.d_a), &matrix::matrix_unit(1, dims.d_b, 0, k)))
            .collect();
        Self::new(kraus).expect("partial trace is CPTP")
    }

    /// Compression of a random isometry `𝓗_in → 𝓗_out ⊗ ℂ^r`.
    pub fn random(rng: &mut impl Rng, d_in: usize, d_out: usize, r: usize) -> Result<Self> {
        if d_in == 0 || d_out == 0 || r == 0 || d_out * r < d_in {
            return Err(Error::InvalidArgument(format!(
                "need d_out·r >= d_in > 0, got d_in={d_in}, d_out={d_out}, r={r}"
            )));
        }
        let v = rng::random_isometry(rng, d_out * r, d_in);
        let kraus = (0..r).map(|i| CMatrix::from_fn(d_out, d_in, |s, c| v[(s * r + i, c)])).collect();
        Self::new(kraus)
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn completeness_defect(&self) -> f64 {
        self.completeness_defect
    }

    pub fn apply_matrix(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.shape() != (self.d_in, self.d_in) {
            return Err(Error::dim(format!("channel input is {0}x{0}", self.d_in)));
        }
        Ok(self.kraus.iter().fold(matrix::zeros(self.d_out, self.d_out), |acc, k| acc + k * x * k.adjoint()))
    }

    /// `𝒞†(Y) = Σ K† Y K`.
    pub fn adjoint_apply(&self, y: &CMatrix) -> Result<CMatrix> {
        if y.shape() != (self.d_out, self.d_out) {
            return Err(Error::dim(format!("channel adjoint input is {0}x{0}", self.d_out)));
        }
        Ok(self.kraus.iter().fold(matrix::zeros(self.d_in, self.d_in), |acc, k| acc + k.adjoint() * y * k))
    }

    pub fn apply_hermitian(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        Ok(HermitianOperator::from_raw(self.apply_matrix(x.matrix())?))
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        DensityOperator::new(self.apply_hermitian(rho.op())?)
    }

    /// `J = Σ_{ij} E_ij ⊗ 𝒞(E_ij)`.
    pub fn choi(&self) -> CMatrix {
        let n = self.d_in;
        let mut j = matrix::zeros(n * self.d_out, n * self.d_out);
        for a in 0..n {
            for b in 0..n {
                let out = self.apply_matrix(&matrix::matrix_unit(n, n, a, b)).expect("shape");
                j += matrix::kron(&matrix::matrix_unit(n, n, a, b), &out);
            }
        }
        j
    }

    /// `λ_min` of the Choi matrix (complete positivity certificate).
    pub fn choi_min_eigenvalue(&self) -> Result<f64> {
        min_eigenvalue(&self.choi())
    }

    pub fn is_cptp(&self) -> Result<bool> {
        let j = self.choi();
        let tau = DEFAULT.support * (1.0 + j.norm());
        Ok(self.completeness_defect <= DEFAULT.completeness && min_eigenvalue(&j)? >= -tau)
    }

    pub fn compose(&self, after: &QuantumChannel) -> Result<Self> {
        if after.d_in != self.d_out {
            return Err(Error::dim("composition dimensions do not chain"));
        }
        let kraus = after.kraus.iter().flat_map(|b| self.kraus.iter().map(move |a| b * a)).collect();
        Self::new(kraus)
    }

    pub fn to_json(&self) -> ChannelJson {
        ChannelJson {
            kraus: self.kraus.iter().map(MatrixJson::from_matrix).collect(),
            d_in: self.d_in,
            d_out: self.d_out,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelJson {
    pub kraus: Vec<MatrixJson>,
    pub d_in: usize,
    pub d_out: usize,
}

impl ChannelJson {
    pub fn to_channel(&self) -> Result<QuantumChannel> {
        let kraus = self.kraus.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?;
        let ch = QuantumChannel::new(kraus)?;
        if ch.d_in != self.d_in || ch.d_out != self.d_out {
            return Err(Error::Parse("declared d_in/d_out do not match the Kraus shapes".into()));
        }
        Ok(ch)
    }
}

/// `𝒞(X) = Tr_env(U (X ⊗ |e_0⟩⟨e_0|) U†)`.
#[derive(Clone, Debug)]
pub struct StinespringDilation {
    pub env_dim: usize,
    pub unitary: CMatrix,
    pub env_state: DensityOperator,
    pub round_trip_defect: f64,
}

impl StinespringDilation {
    pub fn dims(&self) -> BipartiteDims {
        BipartiteDims { d_a: self.unitary.nrows() / self.env_dim, d_b: self.env_dim }
    }

    pub fn apply_matrix(&self, x: &CMatrix) -> Result<CMatrix> {
        let joint = matrix::kron(x, self.env_state.matrix());
        partial_trace_b_matrix(&(&self.unitary * joint * self.unitary.adjoint()), self.dims())
    }
}

/// Dilate a square channel. Any unitary completion is valid; this one is Gram–Schmidt.
pub fn stinespring_dilate(ch: &QuantumChannel) -> Result<StinespringDilation> {
    if ch.d_in != ch.d_out {
        return Err(Error::InvalidChannel("Stinespring form requires d_in = d_out".into()));
    }
    let d = ch.d_in;
    let r = ch.kraus.len();
    let env = r.max(2);
    let n = d * env;
    // V x = Σ_i K_i x ⊗ e_i
    let v = CMatrix::from_fn(n, d, |row, c| {
        let (s, i) = (row / env, row % env);
        if i < r {
            ch.kraus[i][(s, c)]
        } else {
            matrix::ZERO
        }
    });
    let w = complete_to_unitary(&v)?;
    // column c·env of U must be V e_c, because x ⊗ e_0 sits at index c·env
    let mut u = matrix::zeros(n, n);
    let mut spare = d;
    for col in 0..n {
        if col % env == 0 {
            u.set_column(col, &w.column(col / env));
        } else {
            u.set_column(col, &w.column(spare));
            spare += 1;
        }
    }
    let env_state = DensityOperator::basis(env, 0);
    let mut dil = StinespringDilation { env_dim: env, unitary: u, env_state, round_trip_defect: 0.0 };
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            let e = matrix::matrix_unit(d, d, a, b);
            worst = worst.max((dil.apply_matrix(&e)? - ch.apply_matrix(&e)?).norm());
        }
    }
    dil.round_trip_defect = worst;
    if worst > DEFAULT.dilation {
        return Err(Error::InvalidChannel(format!("dilation round trip defect {worst:.3e}")));
    }
    Ok(dil)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::random_density_seeded;

    fn d22() -> BipartiteDims {
        BipartiteDims::new(2, 2).unwrap()
    }

    #[test]
    fn partial_trace_examples() {
        let xa = random_density_seeded(2, 2, 1).unwrap();
        let xb = random_density_seeded(2, 2, 2).unwrap();
        let joint = xa.kron(&xb);
        let t = partial_trace_b(joint.op(), d22()).unwrap();
        assert!((t.matrix() - xa.matrix()).norm() < 1e-14);

        let s = 1.0 / 2f64.sqrt();
        let bell = crate::linalg::CVector::from_vec(vec![c64(s, 0.0), matrix::ZERO, matrix::ZERO, c64(s, 0.0)]);
        let bell = DensityOperator::pure(&bell).unwrap();
        let t = partial_trace_b(bell.op(), d22()).unwrap();
        assert!((t.matrix() - matrix::from_real_diag(&[0.5, 0.5])).norm() < 1e-15);

        let mm = partial_trace_b(DensityOperator::maximally_mixed(6).op(), BipartiteDims::new(2, 3).unwrap())
            .unwrap();
        assert!((mm.matrix() - matrix::from_real_diag(&[0.5, 0.5])).norm() < 1e-15);
        assert!(partial_trace_b(&HermitianOperator::identity(5), d22()).is_err());
    }

    #[test]
    fn partial_trace_adjoint_examples() {
        let i = partial_trace_adjoint(&HermitianOperator::identity(2), d22()).unwrap();
        assert_eq!(i.matrix(), &matrix::identity(4));
        let p = partial_trace_adjoint(&HermitianOperator::diag(&[1.0, 0.0]), d22()).unwrap();
        assert_eq!(p.matrix(), &matrix::from_real_diag(&[1.0, 1.0, 0.0, 0.0]));
        let z = partial_trace_adjoint(&HermitianOperator::zero(2), d22()).unwrap();
        assert_eq!(z.frobenius_norm(), 0.0);
    }

    #[test]
    fn schwarz_examples() {
        let dims = d22();
        let phi = |x: &CMatrix| partial_trace_adjoint_matrix(x, dims).unwrap();
        let x = rng::ginibre(&mut rng::stream(4, 0), 2, 2);
        assert!(schwarz_defect(phi, &x, 1e-10).unwrap().holds);
        let c = schwarz_defect(phi, &matrix::identity(2), 1e-10).unwrap();
        assert_eq!(c.min_eig, 0.0);

        let mut r = rng::stream(5, 0);
        let ch = QuantumChannel::random(&mut r, 3, 3, 2).unwrap();
        for _ in 0..100 {
            let x = rng::ginibre(&mut r, 3, 3);
            let c = schwarz_defect(|y| ch.adjoint_apply(y).unwrap(), &x, 1e-9).unwrap();
            assert!(c.holds, "{c:?}");
        }
    }

    #[test]
    fn apply_examples() {
        let rho = random_density_seeded(2, 2, 9).unwrap();
        let out = QuantumChannel::identity(2).apply(&rho).unwrap();
        assert!((out.matrix() - rho.matrix()).norm() < 1e-15);
        let out = QuantumChannel::full_depolarizer(2).apply(&rho).unwrap();
        assert!((out.matrix() - matrix::from_real_diag(&[0.5, 0.5])).norm() < 1e-14);

        let joint = random_density_seeded(4, 3, 10).unwrap();
        let via_kraus = QuantumChannel::partial_trace(d22()).apply(&joint).unwrap();
        let direct = partial_trace_b(joint.op(), d22()).unwrap();
        assert!((via_kraus.matrix() - direct.matrix()).norm() < 1e-10);
    }

    #[test]
    fn generated_channels_are_cptp() {
        let mut r = rng::stream(6, 0);
        for (di, dout, k) in [(2, 2, 2), (3, 2, 3), (2, 3, 1)] {
            let ch = QuantumChannel::random(&mut r, di, dout, k).unwrap();
            assert!(ch.is_cptp().unwrap());
        }
        assert!(QuantumChannel::full_depolarizer(3).is_cptp().unwrap());
        assert!(QuantumChannel::new(vec![matrix::identity(2) * c64(0.5, 0.0)]).is_err());
    }

    #[test]
    fn stinespring_examples() {
        let d = stinespring_dilate(&QuantumChannel::identity(2)).unwrap();
        assert_eq!(d.env_dim, 2);
        assert!(unitarity_defect(&d.unitary) < 1e-12);
        let d = stinespring_dilate(&QuantumChannel::dephasing(0.5).unwrap()).unwrap();
        assert_eq!(d.env_dim, 2);
        assert!(d.round_trip_defect < 1e-10);
        let d = stinespring_dilate(&QuantumChannel::full_depolarizer(2)).unwrap();
        assert_eq!(d.env_dim, 4);
        let ch = QuantumChannel::random(&mut rng::stream(7, 0), 2, 3, 2).unwrap();
        assert!(stinespring_dilate(&ch).is_err());
    }

    #[test]
    fn channel_json_round_trip() {
        let ch = QuantumChannel::random(&mut rng::stream(8, 0), 2, 2, 3).unwrap();
        let text = serde_json::to_string(&ch.to_json()).unwrap();
        let back: ChannelJson = serde_json::from_str(&text).unwrap();
        let back = back.to_channel().unwrap();
        assert_eq!(back.kraus().len(), 3);
    }
}
