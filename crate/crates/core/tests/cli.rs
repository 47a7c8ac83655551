use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use relent::harness::{Check, Inputs, Witness};
use relent::states::{DensityOperator, StateJson};

fn relent(args: &[&str], env: Option<(&str, &Path)>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_relent"));
    cmd.args(args).env_remove("RELENT_TOLERANCES");
    if let Some((k, v)) = env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_state(dir: &Path, name: &str, rho: &DensityOperator) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string(&StateJson::from_state(rho, None, None)).unwrap()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn entropy_methods_and_branches() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_state(dir.path(), "p.json", &DensityOperator::from_diag(&[0.5, 0.5]).unwrap());
    let q = write_state(dir.path(), "q.json", &DensityOperator::from_diag(&[0.75, 0.25]).unwrap());
    let out = relent(&["entropy", s(&p), s(&q)], None);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for m in ["support", "regularized", "modular", "form"] {
        assert!(text.contains(&format!("{m}: 0.1438410")), "{text}");
    }

    let e0 = write_state(dir.path(), "e0.json", &DensityOperator::basis(2, 0));
    let e1 = write_state(dir.path(), "e1.json", &DensityOperator::basis(2, 1));
    let json = dir.path().join("r.json");
    let out = relent(&["entropy", s(&e0), s(&e1), "--out", s(&json)], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).matches("infinite (support violation)").count(), 4);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v["agreement"], true);

    let out = relent(&["entropy", s(&p), s(&p), "--method", "form"], None);
    assert!(stdout(&out).starts_with("form: 0.0000000000") || stdout(&out).starts_with("form: -0.0000000000"));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.json");
    fs::write(&junk, "{ not json").unwrap();
    let p = write_state(dir.path(), "p.json", &DensityOperator::maximally_mixed(2));
    assert_eq!(relent(&["entropy", s(&junk), s(&p)], None).status.code(), Some(2));
    let four = write_state(dir.path(), "four.json", &DensityOperator::maximally_mixed(4));
    assert_eq!(relent(&["chain", "--proof", "petz", s(&four), s(&four), "--dims", "2,3"], None).status.code(), Some(2));
    assert_eq!(relent(&["figures", "--grid", ""], None).status.code(), Some(2));
    assert_eq!(relent(&["no-such-command"], None).status.code(), Some(2));
    assert_eq!(relent(&["replay", s(&junk)], None).status.code(), Some(2));
}

#[test]
fn figures_csv() {
    let out = relent(&["figures"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,lhs,rhs,violation"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r.ends_with(",true")));

    let out = stdout(&relent(&["figures", "--alpha", "1", "--grid", "0.5:5:0.5"], None));
    assert!(out.lines().skip(1).all(|r| r.ends_with(",false")));
    let log = stdout(&relent(&["figures", "--which", "jensen-log", "--grid", "1"], None));
    assert!(log.contains("1,1.386294361119890"), "{log}");
}

#[test]
fn chains_for_equal_random_and_deficient_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let mut g = relent::rng::stream(42, 0);
    let rho = relent::states::random_density(&mut g, 4, 4).unwrap();
    let sigma = relent::states::random_density(&mut g, 4, 4).unwrap();
    let (dr, ds) = relent::states::random_nested_pair(&mut g, 4, 2, 3).unwrap();
    let r = write_state(dir.path(), "r.json", &rho);
    let sg = write_state(dir.path(), "s.json", &sigma);
    let a = write_state(dir.path(), "a.json", &dr);
    let b = write_state(dir.path(), "b.json", &ds);

    for proof in ["petz", "uhlmann"] {
        let out = relent(&["chain", "--proof", proof, s(&r), s(&r), "--dims", "2,2"], None);
        assert_eq!(out.status.code(), Some(0));
        let text = stdout(&out);
        let links: Vec<&str> = text.lines().filter(|l| l.starts_with("  ") || l.starts_with("t = ")).collect();
        assert!(!links.is_empty());
        assert!(links.iter().all(|l| l.ends_with("equality")), "{text}");
    }
    let pj = dir.path().join("p.json");
    let uj = dir.path().join("u.json");
    assert_eq!(relent(&["petz-chain", s(&r), s(&sg), "--dims", "2,2", "--out", s(&pj)], None).status.code(), Some(0));
    assert_eq!(relent(&["uhlmann-chain", s(&r), s(&sg), "--dims", "2,2", "--out", s(&uj)], None).status.code(), Some(0));
    let pv: serde_json::Value = serde_json::from_str(&fs::read_to_string(pj).unwrap()).unwrap();
    let uv: serde_json::Value = serde_json::from_str(&fs::read_to_string(uj).unwrap()).unwrap();
    let gap = |v: &serde_json::Value| v["final_gap"].as_f64().unwrap();
    assert!((gap(&pv) - gap(&uv)).abs() <= 1e-7);

    let out = relent(&["chain", "--proof", "uhlmann", s(&a), s(&b), "--dims", "2,2"], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("regularization: none"));
    let out = relent(&["chain", "--proof", "petz", s(&a), s(&b), "--dims", "2,2"], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("eps schedule: 1e-2"));
}

#[test]
fn campaign_exit_codes_and_tolerance_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "samples = 2\nchecks = [\"recovery\", \"counterexample\"]\n").unwrap();
    let rep = dir.path().join("rep.json");
    let out = relent(&["campaign", "--config", s(&cfg), "--out", s(&rep), "--jobs", "2"], None);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(v["total_fail"], 0);

    let tol = dir.path().join("tol.toml");
    fs::write(&tol, "recovery = -1.0\n").unwrap();
    let out = relent(&["campaign", "--config", s(&cfg), "--out", s(&rep)], Some(("RELENT_TOLERANCES", &tol)));
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    let w = &v["checks"][0]["cells"][0]["failures"][0]["witness"];
    let wf = dir.path().join("w.json");
    fs::write(&wf, w.to_string()).unwrap();
    assert_eq!(relent(&["replay", s(&wf)], None).status.code(), Some(1));

    fs::write(&tol, "not_a_tolerance = 1\n").unwrap();
    assert_eq!(relent(&["campaign", "--config", s(&cfg)], Some(("RELENT_TOLERANCES", &tol))).status.code(), Some(2));
    fs::write(&cfg, "checks = [\"bogus\"]\n").unwrap();
    assert_eq!(relent(&["campaign", "--config", s(&cfg)], None).status.code(), Some(2));
}

#[test]
fn near_singular_witness_replays_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let rho = relent::states::random_density(&mut relent::rng::stream(9, 0), 4, 4).unwrap();
    let sigma = DensityOperator::from_diag(&[0.5, 0.3, 0.2 - 1e-13, 1e-13]).unwrap();
    let inputs = Inputs::States {
        rho: StateJson::from_state(&rho, None, None),
        sigma: StateJson::from_state(&sigma, None, None),
        channel: None,
        aux_seed: 0,
    };
    let cell = relent::harness::Cell { d_a: 2, d_b: 2, rank: relent::harness::RankClass::Full };
    let w = Witness::new(Check::Equivalence, Some(cell), 0, 0, inputs);
    let wf = dir.path().join("w.json");
    fs::write(&wf, serde_json::to_string(&w).unwrap()).unwrap();
    let a = relent(&["replay", s(&wf)], None);
    let b = relent(&["replay", s(&wf)], None);
    assert_eq!(a.stdout, b.stdout);
    assert!(matches!(a.status.code(), Some(0) | Some(1)));
    assert!(stdout(&a).contains("\"regularized\""));
}

#[test]
fn random_state_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.json");
    assert_eq!(relent(&["random-state", "--dim", "3", "--rank", "2", "--seed", "5", "--out", s(&p)], None).status.code(), Some(0));
    let rho = relent::states::state_from_json(&fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(rho.rank(), 2);
    assert_eq!(relent(&["entropy", s(&p), s(&p), "--method", "support"], None).status.code(), Some(0));
}
