use std::fs;
use std::path::Path;
use std::process::Command;

use kamlab::cli::{builtin, parse_config, parse_config_file, run_scenario, Family, BUILTINS};
use kamlab::limit::Verdict;

const MINIMAL: &str = "\
# smallest runnable scenario
[scenario]
name = demo

[grid]
n = 64

[model]
name = mechanical
";

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn minimal_scenario_defaults() {
    let c = parse_config(MINIMAL).unwrap();
    assert_eq!(c.m, 3);
    assert_eq!(c.dt(), c.grid().dx());
    assert_eq!(c.lambda.values().len(), 6);
    assert_eq!(c.tolerances.solver, 1e-10);
    assert!(c.window.is_none() && c.expect.is_empty());
}

#[test]
fn error_lines() {
    let text = MINIMAL.replace("n = 64", "n = 3");
    let err = parse_config(&text).unwrap_err();
    assert_eq!(err.0.len(), 1);
    assert_eq!(err.0[0].line, 6);
    assert!(err.0[0].message.contains("n must be ≥ 4"));
    assert_eq!(err.to_string(), format!("line 6: {}", err.0[0].message));

    let text = format!("{MINIMAL}[lambda]\nfactor = fast\nbogus = 1\n[weird]\nx = 1\n");
    let err = parse_config(&text).unwrap_err();
    let lines: Vec<usize> = err.0.iter().map(|e| e.line).collect();
    assert_eq!(lines, vec![11, 12, 14], "{err}");

    let err = parse_config("[grid]\nn = 8\n").unwrap_err();
    assert!(err.0.iter().any(|e| e.message.contains("[scenario]")));

    let err = parse_config("[scenario]\nname = x\nname = y\n[grid]\nn = 8\n[model]\nname = mechanical\n").unwrap_err();
    assert_eq!(err.0[0].line, 3);
    assert!(err.0[0].message.contains("duplicate"));
}

#[test]
fn lambda_schedule() {
    let text = format!("{MINIMAL}[lambda]\nlambda0 = 0.1\nfactor = 0.5\ncount = 6\n");
    let values = parse_config(&text).unwrap().lambda.values();
    assert_eq!(values, vec![0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125]);
}

#[test]
fn family_model_compatibility() {
    let text = MINIMAL.replace("name = demo", "name = demo\nfamilies = maximal");
    let err = parse_config(&text).unwrap_err();
    assert!(err.0[0].message.contains("families need a contact model"));
    let text = "[scenario]\nname = s\nfamilies = maximal\n[grid]\nn = 16\n[model]\nname = sin-contact\n";
    let err = parse_config(text).unwrap_err();
    assert!(err.0[0].message.contains("not available"));
    let text = text.replace("families = maximal", "families = contact-constants\n[lambda]\ncount = 3");
    let err = parse_config(&text).unwrap_err();
    assert!(err.0.iter().any(|e| e.message.contains("count must be ≥ 4")));
}

#[test]
fn table_files_are_validated() {
    let dir = tempfile::tempdir().unwrap();
    let values: String = (0..8).map(|i| format!("{}\n", (i as f64) / 8.0)).collect();
    fs::write(dir.path().join("v.csv"), &values).unwrap();
    fs::write(dir.path().join("short.csv"), "1\n2\n").unwrap();
    let conf = "[scenario]\nname = t\n[grid]\nn = 8\n[control]\nm = 1\n[model]\nname = mechanical\npotential = table(v.csv)\n";
    let path = dir.path().join("t.conf");
    fs::write(&path, conf).unwrap();
    let c = parse_config_file(&path).unwrap();
    assert_eq!(c.model.name, "mechanical");

    fs::write(&path, conf.replace("v.csv", "short.csv")).unwrap();
    let err = parse_config_file(&path).unwrap_err();
    assert_eq!(err.0[0].line, 9, "{err}");
    fs::write(&path, conf.replace("v.csv", "missing.csv")).unwrap();
    assert!(parse_config_file(&path).is_err());
}

#[test]
fn builtins_parse_and_echo() {
    for (name, _, text) in BUILTINS {
        let c = parse_config(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(c.name, name);
        assert_eq!(parse_config(&c.to_text()).unwrap(), c, "{name}");
        assert!(!c.expect.is_empty());
    }
    assert!(builtin("no-such").is_none());
    let c = parse_config(builtin("sign-changing-dichotomy").unwrap()).unwrap();
    assert_eq!(c.families, vec![Family::Maximal, Family::Diverging]);
}

#[test]
fn mechanical_a1_end_to_end() {
    let c = parse_config(builtin("mechanical-a1").unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = run_scenario(&c, dir.path()).unwrap();
    assert!(report.all_passed(), "{:#?}", report.failures());
    assert_eq!(report.exit_code(), 0);
    assert_eq!(read(dir.path(), "c0.csv").lines().take(3).collect::<Vec<_>>(), ["method,c0", "karp,1", "lp,1"]);
    let ergodic: f64 = read(dir.path(), "c0.csv").lines().nth(3).unwrap()["ergodic,".len()..].parse().unwrap();
    assert!((ergodic - 1.0).abs() <= 0.05);
    assert_eq!(read(dir.path(), "aubry.csv"), "node,x0,self_barrier\n0,0,0\n");
    assert_eq!(report.aubry, vec![0]);
    assert_eq!(report.verdict("maximal"), Some(Verdict::Converges));
    let diag = read(dir.path(), "diagnostics.csv");
    assert!(diag.starts_with("family,lambda,min,max,sup_gap_to_u0,verdict\nmaximal,0.1,"));
    assert_eq!(diag.lines().count(), 7);
    for lambda in c.lambda.values() {
        let csv = read(dir.path(), &format!("solutions_maximal_{lambda}.csv"));
        assert_eq!(csv.lines().count(), 65);
    }
    let text = read(dir.path(), "report.txt");
    assert!(text.contains("result: PASS"));
    assert_eq!(text.matches("[PASS]").count(), report.checks.len());
    assert!(text.contains("c0 karp    = 1"));
}

#[test]
fn unmet_expectation_exits_with_two() {
    let text = builtin("sin-contact-trichotomy").unwrap().replace("plus = DivergesPlus", "plus = Converges");
    let c = parse_config(&text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = run_scenario(&c, dir.path()).unwrap();
    assert_eq!(report.exit_code(), 2);
    let failed: Vec<&str> = report.failures().iter().map(|c| c.name.as_str()).collect();
    assert_eq!(failed, vec!["plus verdict is Converges"]);
    assert!(read(dir.path(), "report.txt").contains("[FAIL] classify  plus verdict is Converges: got DivergesPlus"));
}

#[test]
fn runs_are_deterministic() {
    let c = parse_config(builtin("sin-contact-trichotomy").unwrap()).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = run_scenario(&c, a.path()).unwrap();
    run_scenario(&c, b.path()).unwrap();
    let csvs: Vec<&String> = ra.files.iter().filter(|f| f.ends_with(".csv")).collect();
    assert!(csvs.len() >= 20);
    for f in csvs {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_kamlab");
    let list = Command::new(exe).arg("list-builtins").output().unwrap();
    assert!(list.status.success());
    let stdout = String::from_utf8(list.stdout).unwrap();
    for (name, _, _) in BUILTINS {
        assert!(stdout.contains(name));
    }

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.conf");
    fs::write(&bad, MINIMAL.replace("n = 64", "n = 2")).unwrap();
    let out = Command::new(exe).arg("validate").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 6: n must be ≥ 4"));
    let out = Command::new(exe).arg("run").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let good = dir.path().join("good.conf");
    fs::write(&good, MINIMAL).unwrap();
    let out = Command::new(exe).arg("validate").arg(&good).output().unwrap();
    assert!(out.status.success());

    let target = dir.path().join("out");
    let out = Command::new(exe)
        .args(["run", "sin-contact-trichotomy"])
        .env("KAMLAB_OUTPUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(target.join("report.txt").exists() && target.join("diagnostics.csv").exists());

    let failing = dir.path().join("fail.conf");
    fs::write(&failing, builtin("sin-contact-trichotomy").unwrap().replace("zero = Converges", "zero = DivergesMinus"))
        .unwrap();
    let out = Command::new(exe).arg("run").arg(&failing).env("KAMLAB_OUTPUT_DIR", &target).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
