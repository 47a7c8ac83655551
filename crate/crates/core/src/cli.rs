//! The `relent` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::channels::{BipartiteDims, ChannelJson, QuantumChannel};
use crate::entropy;
use crate::harness::{self, Campaign};
use crate::linalg::ExtendedReal;
use crate::petz::{self, Figure};
use crate::states::{self, DensityOperator, EpsSchedule, StateJson};
use crate::tol::{Tolerances, DEFAULT};
use crate::uhlmann::{self, TSchedule};
use crate::{rng, Error, Result};

pub const TOLERANCES_ENV: &str = "RELENT_TOLERANCES";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "relent", version, about = "Quantum relative entropy and certified data-processing checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Relative entropy S(ρ‖σ) by one or all methods.
    Entropy(EntropyArgs),
    /// Data processing through a Stinespring dilation.
    Dpi(DpiArgs),
    /// Monotonicity under the partial trace, link by link.
    Chain(ChainArgs),
    #[command(hide = true)]
    PetzChain(ChainInputs),
    #[command(hide = true)]
    UhlmannChain(ChainInputs),
    /// CSV data of the scalar counterexamples.
    Figures(FiguresArgs),
    /// Run a seeded verification campaign.
    Campaign(CampaignArgs),
    /// Petz recovery identity and, given ρ, the fidelity bound.
    Recovery(RecoveryArgs),
    /// Re-run the instance stored in a witness file.
    Replay(ReplayArgs),
    /// Emit a random density operator as JSON.
    RandomState(RandomStateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Support,
    Regularized,
    Modular,
    Form,
    All,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    pub rho: PathBuf,
    pub sigma: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub method: Method,
    /// Write the full result as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DpiArgs {
    pub rho: PathBuf,
    pub sigma: PathBuf,
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Proof {
    Petz,
    Uhlmann,
}

#[derive(Debug, Args)]
pub struct ChainInputs {
    pub rho: PathBuf,
    pub sigma: PathBuf,
    /// `d_a,d_b`.
    #[arg(long, value_parser = parse_dims)]
    pub dims: BipartiteDims,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    #[arg(long, value_enum)]
    pub proof: Proof,
    #[command(flatten)]
    pub inputs: ChainInputs,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    #[arg(long, default_value = "jensen-inverse")]
    pub which: Figure,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub xi: f64,
    /// `start:stop:step` or a comma list; defaults to 0.05, 0.10, …, 5.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<Grid>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CampaignArgs {
    /// TOML or JSON campaign file; the default campaign when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RecoveryArgs {
    pub sigma: PathBuf,
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long)]
    pub rho: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub witness: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RandomStateArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct Grid(pub Vec<f64>);

fn parse_dims(s: &str) -> std::result::Result<BipartiteDims, String> {
    let parts: Vec<&str> = s.split([',', 'x']).collect();
    if parts.len() != 2 {
        return Err("expected d_a,d_b".into());
    }
    let a = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let b = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    BipartiteDims::new(a, b).map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    if s.contains(':') {
        let p: Vec<&str> = s.split(':').collect();
        if p.len() != 3 {
            return Err("expected start:stop:step".into());
        }
        let (a, b, h) = (num(p[0])?, num(p[1])?, num(p[2])?);
        if !(h > 0.0) || b < a {
            return Err("need step > 0 and stop ≥ start".into());
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        Ok(Grid((0..=n).map(|k| a + k as f64 * h).collect()))
    } else {
        s.split(',').filter(|t| !t.trim().is_empty()).map(num).collect::<std::result::Result<_, _>>().map(Grid)
    }
}

/// Tolerances from the file named by `RELENT_TOLERANCES`, or the defaults.
pub fn tolerances_from_env() -> Result<Tolerances> {
    match std::env::var_os(TOLERANCES_ENV) {
        Some(p) => Tolerances::from_str_any(&fs::read_to_string(p)?),
        None => Ok(DEFAULT),
    }
}

fn read_state(p: &Path) -> Result<DensityOperator> {
    let text = fs::read_to_string(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
    states::state_from_json(&text)
}

fn read_channel(p: &Path) -> Result<QuantumChannel> {
    let text = fs::read_to_string(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
    serde_json::from_str::<ChannelJson>(&text)?.to_channel()
}

fn write_json(path: &Option<PathBuf>, value: &impl Serialize) -> Result<()> {
    if let Some(p) = path {
        fs::write(p, serde_json::to_string_pretty(value)? + "\n")?;
    }
    Ok(())
}

fn show(v: ExtendedReal) -> String {
    match v {
        ExtendedReal::Finite(x) => format!("{x:.12}"),
        ExtendedReal::PosInfinity => "infinite (support violation)".into(),
        ExtendedReal::NegInfinity => "-inf".into(),
    }
}

fn link_label(lhs: f64, rhs: f64, holds: bool, tol: f64) -> &'static str {
    if !holds {
        "VIOLATED"
    } else if (rhs - lhs).abs() <= tol * (1.0 + rhs.abs()) {
        "equality"
    } else {
        "certified"
    }
}

/// Parse `args` and run; returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let tol = tolerances_from_env()?;
    match cli.command {
        Command::Entropy(a) => cmd_entropy(a, &tol, out),
        Command::Dpi(a) => cmd_dpi(a, out),
        Command::Chain(a) => cmd_chain(a.proof, a.inputs, &tol, out),
        Command::PetzChain(a) => cmd_chain(Proof::Petz, a, &tol, out),
        Command::UhlmannChain(a) => cmd_chain(Proof::Uhlmann, a, &tol, out),
        Command::Figures(a) => cmd_figures(a, out),
        Command::Campaign(a) => cmd_campaign(a, tol, out),
        Command::Recovery(a) => cmd_recovery(a, &tol, out),
        Command::Replay(a) => cmd_replay(a, &tol, out),
        Command::RandomState(a) => cmd_random_state(a, out),
    }
}

fn cmd_entropy(a: EntropyArgs, tol: &Tolerances, out: &mut dyn Write) -> Result<i32> {
    let rho = read_state(&a.rho)?;
    let sigma = read_state(&a.sigma)?;
    if rho.dim() != sigma.dim() {
        return Err(Error::dim(format!("ρ is {0}×{0} but σ is {1}×{1}", rho.dim(), sigma.dim())));
    }
    let wanted = |m: Method| a.method == Method::All || a.method == m;
    let support = entropy::relative_entropy_support(&rho, &sigma)?;
    let mut values: Vec<(&str, ExtendedReal)> = vec![];
    let mut report = serde_json::Map::new();
    if wanted(Method::Support) {
        values.push(("support", support.value));
        report.insert("support".into(), json!(support));
    }
    if wanted(Method::Regularized) {
        let r = entropy::relative_entropy_regularized(&rho, &sigma, &EpsSchedule::default())?;
        values.push(("regularized", r.value));
        report.insert("regularized".into(), json!(r));
    }
    if wanted(Method::Modular) {
        let v = if rho.is_full_rank() && sigma.is_full_rank() {
            ExtendedReal::Finite(petz::entropy_via_modular(rho.op(), sigma.op())?)
        } else {
            petz::entropy_via_modular_regularized(rho.op(), sigma.op(), &EpsSchedule::default())?
        };
        values.push(("modular", v));
        report.insert("modular".into(), json!(v));
    }
    if wanted(Method::Form) {
        let f = uhlmann::relative_entropy_form(&rho, &sigma)?;
        values.push(("form", f.value));
        report.insert("form".into(), json!(f));
    }
    for (name, v) in &values {
        writeln!(out, "{name}: {}", show(*v))?;
    }
    let mut agree = true;
    for (_, v) in &values {
        agree &= match (support.value, *v) {
            (ExtendedReal::Finite(s), ExtendedReal::Finite(x)) => (s - x).abs() <= tol.method_agreement,
            (s, x) => s == x,
        };
    }
    if values.len() > 1 {
        writeln!(out, "agreement: {}", if agree { "yes" } else { "NO" })?;
    }
    report.insert("agreement".into(), json!(agree));
    write_json(&a.out, &report)?;
    Ok(if agree { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_dpi(a: DpiArgs, out: &mut dyn Write) -> Result<i32> {
    let rho = read_state(&a.rho)?;
    let sigma = read_state(&a.sigma)?;
    let ch = read_channel(&a.channel)?;
    let cert = entropy::dpi_via_stinespring(&rho, &sigma, &ch)?;
    writeln!(out, "S(C(rho)||C(sigma)) = {}", show(cert.lhs))?;
    writeln!(out, "S(rho||sigma)       = {}", show(cert.rhs))?;
    for s in &cert.steps {
        writeln!(out, "  {:<28} defect {:.3e}  {}", s.name, s.defect, if s.holds { "ok" } else { "VIOLATED" })?;
    }
    writeln!(out, "{}", if cert.holds { "certified" } else { "VIOLATED" })?;
    write_json(&a.out, &cert)?;
    Ok(if cert.holds { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_chain(proof: Proof, a: ChainInputs, tol: &Tolerances, out: &mut dyn Write) -> Result<i32> {
    let rho = read_state(&a.rho)?;
    let sigma = read_state(&a.sigma)?;
    if rho.dim() != a.dims.d_ab() || sigma.dim() != a.dims.d_ab() {
        return Err(Error::dim(format!(
            "--dims {}x{} needs {2}×{2} states, got {3} and {4}",
            a.dims.d_a,
            a.dims.d_b,
            a.dims.d_ab(),
            rho.dim(),
            sigma.dim()
        )));
    }
    let holds = match proof {
        Proof::Petz => {
            let c = petz::corrected_monotonicity(&rho, &sigma, a.dims, &EpsSchedule::default())?;
            if c.regularized {
                let s: Vec<String> = c.schedule.iter().map(|e| format!("{e:e}")).collect();
                writeln!(out, "regularized, eps schedule: {}", s.join(", "))?;
            }
            for inst in &c.instances {
                writeln!(out, "eps = {:e}", inst.epsilon)?;
                for l in &inst.links {
                    let label = link_label(l.lhs, l.rhs, l.holds, tol.chain);
                    writeln!(out, "  {:<24} {:.12} <= {:.12}  {label}", l.name, l.lhs, l.rhs)?;
                }
            }
            for e in &c.endpoints {
                writeln!(out, "endpoint {}: {} vs {} (defect {:.3e})", e.name, show(e.observed), show(e.expected), e.defect)?;
            }
            match c.final_gap {
                Some(g) => writeln!(out, "gap: {g:.12}")?,
                None => writeln!(out, "gap: {}", show(ExtendedReal::PosInfinity))?,
            }
            write_json(&a.out, &c)?;
            c.holds
        }
        Proof::Uhlmann => {
            let c = uhlmann::uhlmann_monotonicity(&rho, &sigma, a.dims, &TSchedule::default())?;
            let l = |x: &crate::linalg::LoewnerCertificate| if x.holds { "certified" } else { "VIOLATED" };
            writeln!(out, "schwarz rho: min eig {:.3e}  {}", c.schwarz_rho.min_eig, l(&c.schwarz_rho))?;
            writeln!(out, "schwarz sigma: min eig {:.3e}  {}", c.schwarz_sigma.min_eig, l(&c.schwarz_sigma))?;
            for s in &c.steps {
                writeln!(
                    out,
                    "t = {:e}: {:.12} <= {:.12} <= {:.12}  {} / {}",
                    s.t,
                    s.gamma_full,
                    s.gamma_pulled,
                    s.gamma_reduced,
                    link_label(s.gamma_full, s.gamma_pulled, s.holds, tol.form_order),
                    link_label(s.gamma_pulled, s.gamma_reduced, s.holds, tol.form_order),
                )?;
            }
            writeln!(out, "S(rho||sigma) = {}", show(c.s_full.value))?;
            writeln!(out, "S(rho_a||sigma_a) = {}", show(c.s_reduced.value))?;
            writeln!(out, "gap: {}", show(c.final_gap))?;
            writeln!(out, "regularization: none")?;
            write_json(&a.out, &c)?;
            c.holds
        }
    };
    writeln!(out, "{}", if holds { "certified" } else { "VIOLATED" })?;
    Ok(if holds { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_figures(a: FiguresArgs, out: &mut dyn Write) -> Result<i32> {
    let grid = a.grid.map_or_else(petz::default_grid, |g| g.0);
    if grid.is_empty() {
        return Err(Error::InvalidArgument("grid is empty".into()));
    }
    let rows = petz::flawed_step_counterexample(a.which, a.alpha, a.xi, &grid)?;
    let csv = petz::rows_to_csv(&rows);
    match &a.out {
        Some(p) => fs::write(p, csv)?,
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn cmd_campaign(a: CampaignArgs, env_tol: Tolerances, out: &mut dyn Write) -> Result<i32> {
    let mut c: Campaign = match &a.config {
        Some(p) => fs::read_to_string(p)?.parse()?,
        None => Campaign::default(),
    };
    if c.tolerances.is_none() && std::env::var_os(TOLERANCES_ENV).is_some() {
        c.tolerances = Some(env_tol);
    }
    let report = harness::run_campaign(&c, a.jobs)?;
    for ch in &report.checks {
        let rate = ch.violation_rate.map(|r| format!(", violation rate {r}")).unwrap_or_default();
        writeln!(out, "{:<28} pass {:>6}  fail {:>4}  worst {:.3e}{rate}", ch.name, ch.pass_count, ch.fail_count, ch.worst_defect)?;
    }
    writeln!(out, "total: {} passed, {} failed", report.total_pass, report.total_fail)?;
    match &a.out {
        Some(p) => fs::write(p, report.to_json() + "\n")?,
        None => writeln!(out, "{}", report.to_json())?,
    }
    Ok(if report.total_fail == 0 { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_recovery(a: RecoveryArgs, tol: &Tolerances, out: &mut dyn Write) -> Result<i32> {
    let sigma = read_state(&a.sigma)?;
    let ch = read_channel(&a.channel)?;
    let defect = petz::recovery::recovery_identity_defect(&sigma, &ch)?;
    let mut holds = defect <= tol.recovery;
    writeln!(out, "||P(C(sigma)) - sigma|| = {defect:.3e}")?;
    let mut report = json!({ "recovery_defect": defect });
    if let Some(p) = &a.rho {
        let rho = read_state(p)?;
        let fr = petz::fawzi_renner_check(&rho, &sigma, &ch)?;
        writeln!(out, "entropy loss {:.12}, -2 log F {:.12}, slack {:.3e}", fr.entropy_loss, fr.bound, fr.slack)?;
        holds &= fr.slack >= -tol.fawzi_renner;
        report["fawzi_renner"] = json!(fr);
    }
    writeln!(out, "{}", if holds { "certified" } else { "VIOLATED" })?;
    write_json(&a.out, &report)?;
    Ok(if holds { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_replay(a: ReplayArgs, tol: &Tolerances, out: &mut dyn Write) -> Result<i32> {
    let r = harness::replay_witness(&fs::read_to_string(&a.witness)?, tol)?;
    writeln!(out, "{} sample {}: defect {:.3e}  {}", r.check, r.sample, r.defect, if r.holds { "pass" } else { "FAIL" })?;
    writeln!(out, "{}", serde_json::to_string_pretty(&r.details)?)?;
    write_json(&a.out, &r)?;
    Ok(if r.holds { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_random_state(a: RandomStateArgs, out: &mut dyn Write) -> Result<i32> {
    let rank = a.rank.unwrap_or(a.dim);
    let rho = states::random_density(&mut rng::stream(a.seed, 0), a.dim, rank)?;
    let text = serde_json::to_string_pretty(&StateJson::from_state(&rho, Some(a.seed), Some(rank)))? + "\n";
    match &a.out {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}
