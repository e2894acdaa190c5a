use levitaq::cli::{run, Invocation};

fn go(args: &[&str], out: &std::path::Path) -> Result<String, String> {
    let mut argv = vec!["levitaq"];
    argv.extend_from_slice(args);
    argv.extend_from_slice(&["--out-dir", out.to_str().unwrap()]);
    match run(argv, None) {
        Ok(Invocation::Completed { outcome, .. }) => Ok(outcome.summary),
        Ok(Invocation::Help(h)) => Err(h),
        Err(e) => Err(format!("exit {}: {e}", e.exit_code())),
    }
}

/// Every forward spectrum on the 15° × 15° × {20, 50, 80} G grid can be
/// solved from its own output file.
#[test]
fn forward_then_solve_succeeds_on_grid() {
    let dir = tempfile::tempdir().unwrap();
    let spectrum = dir.path().join("esr-forward/spectrum.csv");
    let mut failures = Vec::new();
    for b in ["20", "50", "80"] {
        for ti in 0..24 {
            for pj in 0..=12 {
                let (t, p) = ((15 * ti).to_string(), (15 * pj).to_string());
                go(&["esr-forward", "--b-gauss", b, "--theta-deg", &t, "--phi-deg", &p], dir.path()).unwrap();
                if let Err(e) = go(&["esr-solve", "--input", spectrum.to_str().unwrap()], dir.path()) {
                    failures.push(format!("B={b} θ={t} φ={p}: {e}"));
                }
            }
        }
    }
    assert!(failures.is_empty(), "{} failures:\n{}", failures.len(), failures.join("\n"));
}
