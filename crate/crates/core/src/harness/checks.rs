use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::campaign::{Cell, RankClass};
use crate::channels::{ChannelJson, QuantumChannel};
use crate::entropy::{self, Branch};
use crate::linalg::ExtendedReal;
use crate::petz::{self, Figure, Superoperator};
use crate::states::{self, DensityOperator, EpsSchedule, StateJson};
use crate::tol::Tolerances;
use crate::uhlmann::{self, forms, means, OperatorBasis, PositiveForm, Side, TSchedule};
use crate::{rng, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    Dpi,
    Isometry,
    KeyInequality,
    PetzChain,
    UhlmannChain,
    CrossProof,
    Equivalence,
    FourMethod,
    Representation,
    Composition,
    GeometricMean,
    InterpolationMonotonicity,
    Pullback,
    Recovery,
    FawziRenner,
    Counterexample,
}

impl Check {
    pub const ALL: [Check; 16] = [
        Check::Dpi,
        Check::Isometry,
        Check::KeyInequality,
        Check::PetzChain,
        Check::UhlmannChain,
        Check::CrossProof,
        Check::Equivalence,
        Check::FourMethod,
        Check::Representation,
        Check::Composition,
        Check::GeometricMean,
        Check::InterpolationMonotonicity,
        Check::Pullback,
        Check::Recovery,
        Check::FawziRenner,
        Check::Counterexample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Dpi => "dpi",
            Check::Isometry => "isometry",
            Check::KeyInequality => "key-inequality",
            Check::PetzChain => "petz-chain",
            Check::UhlmannChain => "uhlmann-chain",
            Check::CrossProof => "cross-proof",
            Check::Equivalence => "equivalence",
            Check::FourMethod => "four-method",
            Check::Representation => "representation",
            Check::Composition => "composition",
            Check::GeometricMean => "geometric-mean",
            Check::InterpolationMonotonicity => "interpolation-monotonicity",
            Check::Pullback => "pullback",
            Check::Recovery => "recovery",
            Check::FawziRenner => "fawzi-renner",
            Check::Counterexample => "counterexample",
        }
    }

    /// Stable index used to derive random substreams.
    pub fn index(self) -> u64 {
        Check::ALL.iter().position(|&c| c == self).expect("listed") as u64
    }

    pub fn full_rank_only(self) -> bool {
        matches!(
            self,
            Check::Isometry
                | Check::KeyInequality
                | Check::CrossProof
                | Check::FourMethod
                | Check::Recovery
                | Check::FawziRenner
        )
    }

    /// Checks that ignore the dimension grid and run a fixed instance list.
    pub fn is_fixed(self) -> bool {
        self == Check::Counterexample
    }

    /// Dimension of the sampled states for this check in `cell`.
    fn state_dim(self, cell: &Cell) -> usize {
        match self {
            Check::FawziRenner | Check::Representation | Check::Composition | Check::GeometricMean
            | Check::InterpolationMonotonicity => cell.d_a,
            _ => cell.d_ab(),
        }
    }

    fn needs_channel(self) -> bool {
        matches!(self, Check::Dpi | Check::Recovery | Check::FawziRenner)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Check::ALL.iter().copied().find(|c| c.name() == s).ok_or_else(|| Error::UnknownCheck(s.to_string()))
    }
}

/// Serialized inputs of one check instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Inputs {
    States {
        rho: StateJson,
        sigma: StateJson,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        channel: Option<ChannelJson>,
        /// Seed for auxiliary randomness (probes, rotations, candidates).
        aux_seed: u64,
    },
    FigurePoint {
        which: Figure,
        alpha: f64,
        xi: f64,
        x: f64,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    /// The quantity compared against the check's tolerance; `≤ tol` passes.
    pub defect: f64,
    pub holds: bool,
    pub details: Value,
}

fn sample_pair(rng: &mut impl Rng, d: usize, rank: RankClass) -> Result<(DensityOperator, DensityOperator)> {
    match rank {
        RankClass::Full => Ok((states::random_density(rng, d, d)?, states::random_density(rng, d, d)?)),
        RankClass::Deficient => {
            let (r, s) = rank.ranks(d);
            states::random_nested_pair(rng, d, r, s)
        }
    }
}

pub(crate) fn generate(check: Check, cell: &Cell, rng: &mut impl Rng) -> Result<Inputs> {
    let d = check.state_dim(cell);
    let (rho, sigma) = if check == Check::Equivalence && cell.rank == RankClass::Deficient && rng.random::<bool>() {
        // independent supports: exercises the divergent branch
        let (r, s) = cell.rank.ranks(d);
        (states::random_density(rng, d, r)?, states::random_density(rng, d, s)?)
    } else {
        sample_pair(rng, d, cell.rank)?
    };
    let (rr, rs) = (rho.rank(), sigma.rank());
    let channel = if check.needs_channel() {
        Some(QuantumChannel::random(rng, d, d, cell.d_b)?.to_json())
    } else {
        None
    };
    Ok(Inputs::States {
        rho: StateJson::from_state(&rho, None, Some(rr)),
        sigma: StateJson::from_state(&sigma, None, Some(rs)),
        channel,
        aux_seed: rng.random(),
    })
}

/// The fixed instance list of a grid-independent check.
pub(crate) fn fixed_instances(check: Check) -> Vec<Inputs> {
    match check {
        Check::Counterexample => [Figure::JensenInverse, Figure::JensenLog]
            .iter()
            .flat_map(|&which| {
                petz::default_grid().into_iter().map(move |x| Inputs::FigurePoint { which, alpha: 0.5, xi: 0.5, x })
            })
            .collect(),
        _ => vec![],
    }
}

fn finite_or_max(x: f64) -> f64 {
    if x.is_nan() {
        f64::MAX
    } else {
        x.clamp(-f64::MAX, f64::MAX)
    }
}

fn outcome(defect: f64, tol: f64, details: Value) -> Outcome {
    let defect = finite_or_max(defect);
    Outcome { defect, holds: defect <= tol, details }
}

fn left_right(rho: &DensityOperator, sigma: &DensityOperator) -> Result<(PositiveForm, PositiveForm)> {
    let basis = OperatorBasis::matrix_units(rho.dim());
    Ok((
        forms::form_from_operator_pair(rho, Side::Left, &basis)?,
        forms::form_from_operator_pair(sigma, Side::Right, &basis)?,
    ))
}

fn ext_diff(a: ExtendedReal, b: ExtendedReal) -> f64 {
    match (a, b) {
        (ExtendedReal::Finite(x), ExtendedReal::Finite(y)) => (x - y).abs(),
        (x, y) if x == y => 0.0,
        _ => f64::INFINITY,
    }
}

pub(crate) fn evaluate(check: Check, cell: Option<&Cell>, inputs: &Inputs, tol: &Tolerances) -> Result<Outcome> {
    let (rho, sigma, channel, aux) = match inputs {
        Inputs::FigurePoint { which, alpha, xi, x } => {
            if check != Check::Counterexample {
                return Err(Error::Schema(format!("check `{check}` expects state inputs")));
            }
            let row = petz::flawed_step_counterexample(*which, *alpha, *xi, &[*x])?[0];
            // the instance passes when the claimed inequality lhs ≤ rhs is seen to fail
            return Ok(Outcome { defect: finite_or_max(row.rhs - row.lhs), holds: row.violation, details: json!(row) });
        }
        Inputs::States { rho, sigma, channel, aux_seed } => {
            if check == Check::Counterexample {
                return Err(Error::Schema("check `counterexample` expects a figure point".into()));
            }
            let ch = channel.as_ref().map(|c| c.to_channel()).transpose()?;
            (rho.to_state()?, sigma.to_state()?, ch, *aux_seed)
        }
    };
    let cell = cell.ok_or_else(|| Error::Schema(format!("check `{check}` needs a cell")))?;
    let dims = cell.dims()?;
    if rho.dim() != check.state_dim(cell) || sigma.dim() != rho.dim() {
        return Err(Error::Schema(format!("state dimension {} does not match the cell", rho.dim())));
    }
    let need_channel = || channel.as_ref().ok_or_else(|| Error::Schema(format!("check `{check}` needs a channel")));

    Ok(match check {
        Check::Dpi => {
            let cert = entropy::dpi_via_stinespring(&rho, &sigma, need_channel()?)?;
            let defect = match (cert.lhs, cert.rhs) {
                (ExtendedReal::Finite(l), ExtendedReal::Finite(r)) => l - r,
                (_, ExtendedReal::PosInfinity) => 0.0,
                _ => f64::INFINITY,
            };
            outcome(defect, tol.dpi, json!(cert))
        }
        Check::Isometry => {
            let v = petz::build_v_rho(rho.op(), dims)?;
            outcome(v.isometry_defect.max(v.bridge_defect), tol.isometry, json!(v.summary()))
        }
        Check::KeyInequality => {
            let cert = petz::check_key_inequality(rho.op(), sigma.op(), dims, 8, aux)?;
            outcome(-cert.min_eig, tol.key_inequality, json!(cert))
        }
        Check::PetzChain => {
            let cert = petz::corrected_monotonicity(&rho, &sigma, dims, &EpsSchedule::default())?;
            let defect = cert.final_gap.map_or(0.0, |g| -g);
            Outcome { holds: cert.holds && defect <= tol.chain, defect: finite_or_max(defect), details: json!(cert) }
        }
        Check::UhlmannChain => {
            let cert = uhlmann::uhlmann_monotonicity(&rho, &sigma, dims, &TSchedule::default())?;
            let defect = cert.final_gap.finite().map_or(0.0, |g| -g);
            let holds = cert.holds && !cert.regularized && defect <= tol.chain;
            Outcome { holds, defect: finite_or_max(defect), details: json!(cert) }
        }
        Check::CrossProof => {
            let p = petz::corrected_monotonicity(&rho, &sigma, dims, &EpsSchedule::default())?;
            let u = uhlmann::uhlmann_monotonicity(&rho, &sigma, dims, &TSchedule::default())?;
            let inst = p.instances.first().ok_or_else(|| Error::Degenerate("empty Petz chain".into()))?;
            let full = ext_diff(u.s_full.value, ExtendedReal::Finite(inst.s_full));
            let red = ext_diff(u.s_reduced.value, ExtendedReal::Finite(inst.s_reduced));
            let details = json!({
                "petz": { "s_full": inst.s_full, "s_reduced": inst.s_reduced },
                "uhlmann": { "s_full": u.s_full.value, "s_reduced": u.s_reduced.value },
            });
            outcome(full.max(red), tol.cross_proof, details)
        }
        Check::Equivalence => {
            let sup = entropy::relative_entropy_support(&rho, &sigma)?;
            let reg = entropy::relative_entropy_regularized(&rho, &sigma, &EpsSchedule::default())?;
            let defect = match (sup.branch, reg.branch) {
                (Branch::Finite, Branch::Finite) => {
                    let s = sup.finite().expect("finite branch");
                    (reg.last_term() - s).abs() / (1.0 + s.abs())
                }
                (a, b) if a == b => 0.0,
                _ => f64::INFINITY,
            };
            let details = json!({ "support": sup, "regularized": reg });
            outcome(defect, tol.equivalence, details)
        }
        Check::FourMethod => {
            let sup = entropy::relative_entropy_support(&rho, &sigma)?.value;
            let reg = entropy::relative_entropy_regularized(&rho, &sigma, &EpsSchedule::default())?.value;
            let modular = ExtendedReal::Finite(petz::entropy_via_modular(rho.op(), sigma.op())?);
            let form = uhlmann::relative_entropy_form(&rho, &sigma)?.value;
            let vals = [sup, reg, modular, form];
            let mut worst: f64 = 0.0;
            for i in 0..4 {
                for j in (i + 1)..4 {
                    worst = worst.max(ext_diff(vals[i], vals[j]));
                }
            }
            let details = json!({ "support": sup, "regularized": reg, "modular": modular, "form": form });
            outcome(worst, tol.method_agreement, details)
        }
        Check::Representation => {
            let (a, b) = left_right(&rho, &sigma)?;
            let t = rng::stream(aux, 0).random_range(0.0..1.0);
            let reps = means::check_representation_independence(&a, &b, t, 3, aux)?;
            let direct = means::direct_interpolation(rho.op(), sigma.op(), t)?.distance(&uhlmann::interpolate(&a, &b, t)?);
            let details = json!({ "t": t, "representations": reps, "direct_route": direct });
            outcome(reps.max(direct), tol.representation, details)
        }
        Check::Composition => {
            let (a, b) = left_right(&rho, &sigma)?;
            let mut r = rng::stream(aux, 0);
            let (t1, t2, t) = (r.random_range(0.0..1.0), r.random_range(0.0..1.0), r.random_range(0.0..1.0));
            let cert = means::interpolation_of_interpolations(&a, &b, t1, t2, t)?;
            outcome(cert.defect, tol.composition, json!({ "t1": t1, "t2": t2, "t": t, "defect": cert.defect }))
        }
        Check::GeometricMean => {
            let (a, b) = left_right(&rho, &sigma)?;
            let g = uhlmann::geometric_mean(&a, &b)?;
            let dom = means::check_domination(&g, &a, &b, 1000, &mut rng::stream(aux, 0))?;
            let max = means::check_geometric_mean_maximality(&a, &b, 100, aux)?;
            let defect = dom.worst_excess.max(-max.worst_min_eig);
            let details = json!({ "domination": dom, "maximality": max });
            let out = outcome(defect, tol.form_order, details);
            Outcome { holds: out.holds && max.holds, ..out }
        }
        Check::InterpolationMonotonicity => {
            let (a, b) = left_right(&rho, &sigma)?;
            let mut r = rng::stream(aux, 0);
            let alo = PositiveForm::new(means::random_contraction(&mut r, a.gram())?)?;
            let blo = PositiveForm::new(means::random_contraction(&mut r, b.gram())?)?;
            let cert = means::check_interpolation_monotonicity(&alo, &a, &blo, &b, &means::dyadic_grid(3))?;
            let worst = cert.points.iter().map(|p| -p.min_eig).fold(f64::NEG_INFINITY, f64::max);
            outcome(worst, tol.form_order, json!(cert))
        }
        Check::Pullback => {
            let (a, b) = left_right(&rho, &sigma)?;
            let psi = Superoperator::partial_trace_adjoint(dims).matrix().clone();
            let cert = means::check_pullback_inequality(&psi, &a, &b, &means::dyadic_grid(3))?;
            let worst = cert.points.iter().map(|p| -p.min_eig).fold(f64::NEG_INFINITY, f64::max);
            outcome(worst, tol.form_order, json!(cert))
        }
        Check::Recovery => {
            let rec = petz::recovery::recovery_identity_defect(&sigma, need_channel()?)?;
            let fac = petz::recovery::factorization_defect(&sigma, dims)?;
            outcome(rec.max(fac), tol.recovery, json!({ "recovery": rec, "factorization": fac }))
        }
        Check::FawziRenner => {
            let cert = petz::fawzi_renner_check(&rho, &sigma, need_channel()?)?;
            outcome(-cert.slack, tol.fawzi_renner, json!(cert))
        }
        Check::Counterexample => unreachable!("handled above"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in Check::ALL {
            assert_eq!(c.name().parse::<Check>().unwrap(), c);
        }
        assert!(matches!("x".parse::<Check>(), Err(Error::UnknownCheck(_))));
    }

    #[test]
    fn every_check_passes_on_a_sample() {
        let tol = crate::tol::DEFAULT;
        for rank in [RankClass::Full, RankClass::Deficient] {
            let cell = Cell { d_a: 2, d_b: 2, rank };
            for c in Check::ALL {
                if c.is_fixed() || (rank == RankClass::Deficient && c.full_rank_only()) {
                    continue;
                }
                let inputs = generate(c, &cell, &mut rng::stream(5, c.index())).unwrap();
                let out = evaluate(c, Some(&cell), &inputs, &tol).unwrap();
                assert!(out.holds, "{c} on {rank}: defect {:e}", out.defect);
            }
        }
        for inputs in fixed_instances(Check::Counterexample) {
            assert!(evaluate(Check::Counterexample, None, &inputs, &tol).unwrap().holds);
        }
    }
}
