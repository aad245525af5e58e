use std::path::Path;
use std::process::{Command, Stdio};

use ph_cli::config::{parse_config_str, IntegratorChoice, StepChoice};
use ph_cli::run::resolve_config;
use ph_cli::args::RunArgs;

fn phsim(args: &[&str], dir: &Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_phsim"))
        .args(args)
        .current_dir(dir)
        .env_remove("PHSIM_CSV_PRECISION")
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap(), text)
}

#[test]
fn empty_config_is_the_example_setup() {
    let c = parse_config_str("{}").unwrap();
    let p = &c.plate;
    assert_eq!((p.n1, p.n2), (21, 21));
    assert_eq!(p.nu, 0.2);
    for v in [p.l1, p.l2, p.rho_c_h_c, p.xi_c, p.piezo.psi_p, p.piezo.a1, p.piezo.a2, p.piezo.rho_p_h_p, p.piezo.xi_p] {
        assert_eq!(v, 1.0);
    }
    assert_eq!(p.patches.zp1, 0.25);
    assert_eq!(p.patches.zp2, vec![0.1, 0.65]);
    assert_eq!((p.patches.lp1, p.patches.lp2), (0.25, 0.25));
    let g = &c.controller.plate;
    assert_eq!(g.c, [0.1, 0.1]);
    assert_eq!((g.jc34, g.rc34, g.rc33, g.rc44), (1.0, -1.0, 200.0, 150.0));
    assert_eq!(g.mc, [[1e4, 0.0], [0.0, 1e4]]);
    assert_eq!(g.gc_lower, [[100.0, 0.0], [100.0, 0.0]]);
    let e = &c.equilibrium.plate;
    assert_eq!((e.a, e.b, e.c, e.d), (0.16, 0.12, 1.0, 2.0));
    assert_eq!(c.dt, StepChoice::Auto);
    assert_eq!(c.integrator, IntegratorChoice::Auto);
    assert_eq!(c.t_final, 50.0);
}

#[test]
fn resolved_config_round_trips() {
    let c = parse_config_str(r#"{"scenario": "beam-casimir", "dt": 0.001, "plate": {"nu": 0.3}}"#).unwrap();
    assert_eq!(c.dt, StepChoice::Fixed(0.001));
    let text = serde_json::to_string(&c).unwrap();
    assert_eq!(parse_config_str(&text).unwrap(), c);
}

#[test]
fn out_of_range_poisson_ratio_names_its_key() {
    let c = parse_config_str(r#"{"plate": {"nu": 0.7}}"#).unwrap();
    let err = c.validate().unwrap_err().to_string();
    assert!(err.contains("plate.nu"), "{err}");
    assert_eq!(c.validate().unwrap_err().exit_code(), 1);
}

#[test]
fn unknown_keys_are_rejected_with_their_path() {
    let err = parse_config_str(r#"{"foo": 1}"#).unwrap_err().to_string();
    assert!(err.contains("foo"), "{err}");
    let err = parse_config_str(r#"{"plate": {"piezo": {"sigmaa": 3}}}"#).unwrap_err().to_string();
    assert!(err.contains("plate.piezo") && err.contains("sigmaa"), "{err}");
}

#[test]
fn small_grids_are_rejected() {
    let args = RunArgs {
        grid_n: Some(5),
        ..RunArgs::default()
    };
    let err = resolve_config(&args).unwrap_err().to_string();
    assert!(err.contains("plate.n1"), "{err}");
}

#[test]
fn dt_accepts_auto_or_a_number() {
    assert_eq!("auto".parse::<StepChoice>().unwrap(), StepChoice::Auto);
    assert_eq!("0.5".parse::<StepChoice>().unwrap(), StepChoice::Fixed(0.5));
    assert!("fast".parse::<StepChoice>().is_err());
    assert!(parse_config_str(r#"{"dt": -1}"#).unwrap().validate().is_err());
}

#[test]
fn beam_run_writes_its_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = phsim(&["simulate", "--scenario", "beam-casimir", "--t-final", "50", "--dt", "auto", "--out", "runs/b1"], dir.path());
    assert_eq!(code, 0, "{text}");
    let out = dir.path().join("runs/b1");
    for f in ["trajectory.csv", "w_final.csv", "actuator_trace.csv", "config_resolved.json", "report.json"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let traj = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,H,Hc,Hcl,dHcl,C1_drift,C2_drift,eq_error,u1,u2\n"));
    assert!(!traj.contains('\r'));
    let w = std::fs::read_to_string(out.join("w_final.csv")).unwrap();
    assert_eq!(w.lines().count(), 1);
    assert_eq!(w.trim().split(',').count(), 21);

    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["scenario"], "beam-casimir");
    assert_eq!(report["exit_code"], 0);
    for f in report["files"].as_array().unwrap() {
        assert!(out.join(f.as_str().unwrap()).exists());
    }
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    // defaults are echoed
    assert_eq!(report["config"]["plate"]["nu"], 0.2);
}

#[test]
fn plate_run_writes_grid_and_edge_trace() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = phsim(
        &["simulate", "--scenario", "plate-open-loop", "--t-final", "0.2", "--log-every", "7", "--out", "p"],
        dir.path(),
    );
    assert_eq!(code, 0, "{text}");
    let out = dir.path().join("p");
    let w = std::fs::read_to_string(out.join("w_final.csv")).unwrap();
    assert_eq!(w.lines().count(), 21);
    assert!(w.lines().all(|l| l.split(',').count() == 21));
    let traj = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let edge = std::fs::read_to_string(out.join("edge_b4.csv")).unwrap();
    assert_eq!(edge.lines().count(), traj.lines().count());
    assert_eq!(edge.lines().nth(1).unwrap().split(',').count(), 22);
}

#[test]
fn precision_override_and_bad_values() {
    let dir = tempfile::tempdir().unwrap();
    let run = |p: &str| {
        Command::new(env!("CARGO_BIN_EXE_phsim"))
            .args(["simulate", "--scenario", "beam-open-loop", "--t-final", "0.1", "--out", "o"])
            .current_dir(dir.path())
            .env("PHSIM_CSV_PRECISION", p)
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .unwrap()
            .code()
            .unwrap()
    };
    assert_eq!(run("6"), 0);
    let traj = std::fs::read_to_string(dir.path().join("o/trajectory.csv")).unwrap();
    let first = traj.lines().nth(1).unwrap().split(',').next().unwrap().to_string();
    assert_eq!(first, "0.00000e0");
    assert_eq!(run("zero"), 1);
}

#[test]
fn missing_config_file_and_scenario_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(phsim(&["simulate", "--scenario", "beam-casimir", "--config", "nope.json"], dir.path()).0, 1);
    assert_eq!(phsim(&["simulate"], dir.path()).0, 1);
    assert_eq!(phsim(&["simulate", "--scenario", "plate"], dir.path()).0, 1);
}

#[test]
fn verify_writes_one_report_per_suite() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = phsim(&["verify", "--scenario", "plate-casimir", "--check", "casimir", "--check", "power", "--out", "v"], dir.path());
    assert_eq!(code, 0, "{text}");
    let csv = std::fs::read_to_string(dir.path().join("v/verify_casimir.csv")).unwrap();
    assert!(csv.starts_with("condition,norm,tolerance,pass\n"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
    assert!(dir.path().join("v/verify_power.csv").exists());
    assert!(!dir.path().join("v/verify_gradient.csv").exists());
}
