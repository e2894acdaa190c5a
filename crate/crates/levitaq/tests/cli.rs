use std::path::Path;
use std::process::{Command, Output};

fn levitaq(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levitaq"))
        .args(args)
        .env("LEVITAQ_OUT_DIR", out)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(summary: &str, key: &str) -> f64 {
    summary
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {summary}"))
        .parse()
        .unwrap()
}

#[test]
fn missing_config_exits_1_naming_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere.conf");
    let o = levitaq(dir.path(), &["trap-sim", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(missing.to_str().unwrap()), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("c.conf");
    std::fs::write(&conf, "v_ac = 4000\nvoltage = 3\n").unwrap();
    let o = levitaq(dir.path(), &["trap-sim", "--config", conf.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`voltage`"), "{}", stderr(&o));
    let o = levitaq(dir.path(), &["trap-sim", "--eta", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("eta"), "{}", stderr(&o));
}

#[test]
fn stability_scan_reports_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let o = levitaq(dir.path(), &["stability-scan", "--q-min", "0", "--q-max", "1.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let q = field(&stdout(&o), "boundary_q");
    assert!((q - 0.908).abs() < 0.005, "{q}");
    assert!(dir.path().join("stability-scan/stability.csv").exists());
}

#[test]
fn forward_then_solve_recovers_headline_orientation() {
    let dir = tempfile::tempdir().unwrap();
    let o = levitaq(dir.path(), &["esr-forward"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let spectrum = dir.path().join("esr-forward/spectrum.csv");
    let head = std::fs::read_to_string(&spectrum).unwrap();
    assert!(head.starts_with("frequency_hz,contrast\n"));
    let o = levitaq(dir.path(), &["esr-solve", "--input", spectrum.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("theta_deg=63.4"), "{s}");
    assert!((field(&s, "phi_deg") - 35.2).abs() < 0.5, "{s}");
    assert!((field(&s, "b_gauss") - 83.0).abs() < 1.0, "{s}");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("esr-solve/solution.json")).unwrap()).unwrap();
    for key in ["theta_deg", "phi_deg", "B_gauss", "residual_hz", "degeneracy"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert!(json["degeneracy"].as_array().unwrap().len() >= 4);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["esr-forward", "--noise-sigma", "0.002", "--seed", "42"];
    assert!(levitaq(a.path(), &args).status.success());
    assert!(levitaq(b.path(), &args).status.success());
    let read = |d: &Path| std::fs::read(d.join("esr-forward/spectrum.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    let c = tempfile::tempdir().unwrap();
    assert!(levitaq(c.path(), &["esr-forward", "--noise-sigma", "0.002", "--seed", "43"]).status.success());
    assert_ne!(read(a.path()), read(c.path()));
}

#[test]
fn recorded_parameters_reproduce_the_run() {
    let a = tempfile::tempdir().unwrap();
    let o = levitaq(a.path(), &["trap-sim", "--v-ac", "3000", "--t-end", "0.005"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let params = a.path().join("trap-sim/params.txt");
    let text = std::fs::read_to_string(&params).unwrap();
    assert!(text.contains("v_ac = 3000") && text.contains("damping_gamma = 0"));
    let b = tempfile::tempdir().unwrap();
    let o2 = levitaq(b.path(), &["trap-sim", "--config", params.to_str().unwrap()]);
    assert!(o2.status.success(), "{}", stderr(&o2));
    assert_eq!(stdout(&o), stdout(&o2));
    let traj = |d: &Path| std::fs::read(d.join("trap-sim/trajectory.csv")).unwrap();
    assert_eq!(traj(a.path()), traj(b.path()));
    assert!(String::from_utf8(traj(a.path())).unwrap().starts_with("t,x,y,z,vx,vy,vz\n"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("c.conf");
    std::fs::write(&conf, "omega_alpha_hz = 80\nt_end = 0.3\n").unwrap();
    let o = levitaq(dir.path(), &["angular-sim", "--config", conf.to_str().unwrap(), "--omega-alpha-hz", "50"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!((field(&stdout(&o), "libration_hz") - 50.0).abs() < 2.5);
    let header = std::fs::read_to_string(dir.path().join("angular-sim/angle.csv")).unwrap();
    assert!(header.starts_with("t,alpha,alpha_dot\n"));
}

#[test]
fn physics_and_solver_failures_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = levitaq(dir.path(), &["ramp-infer", "--ramp-start-hz", "1500"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("stable region"));
    let o = levitaq(dir.path(), &["trap-sim", "--charge-e", "0"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let flat = dir.path().join("flat.csv");
    let mut text = String::from("frequency_hz,contrast\n");
    for i in 0..200 {
        text += &format!("{:e},1\n", 2.8e9 + i as f64 * 1e6);
    }
    std::fs::write(&flat, text).unwrap();
    let o = levitaq(dir.path(), &["esr-solve", "--input", flat.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("no dips above depth threshold"));

    let o = levitaq(dir.path(), &["esr-solve"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`input`"));
}

#[test]
fn out_dir_flag_beats_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let o = levitaq(env_dir.path(), &["radiation", "--out-dir", flag_dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(flag_dir.path().join("radiation/radiation.json").exists());
    assert!(!env_dir.path().join("radiation").exists());
    let f = field(&stdout(&o), "force_n");
    assert!((f - 1.17e-12).abs() < 0.01e-12, "{f}");
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = levitaq(dir.path(), &["esr-solve", "--help"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("--min-separation-hz"));
}

#[test]
fn compare_reports_rotation_about_z() {
    let dir = tempfile::tempdir().unwrap();
    let before = dir.path().join("before.csv");
    let after = dir.path().join("after.csv");
    assert!(levitaq(dir.path(), &["esr-forward"]).status.success());
    std::fs::rename(dir.path().join("esr-forward/spectrum.csv"), &before).unwrap();
    assert!(levitaq(dir.path(), &["esr-forward", "--theta-deg", "0"]).status.success());
    std::fs::rename(dir.path().join("esr-forward/spectrum.csv"), &after).unwrap();
    let o = levitaq(
        dir.path(),
        &[
            "esr-compare",
            "--before",
            before.to_str().unwrap(),
            "--after",
            after.to_str().unwrap(),
            "--b-fixed-gauss",
            "83.07",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(field(&s, "theta_after_deg").abs() < 1.0, "{s}");
    assert!((field(&s, "phi_after_deg") - field(&s, "phi_deg")).abs() < 1.0, "{s}");
    assert!(s.contains("lines_merged=true"), "{s}");
}
