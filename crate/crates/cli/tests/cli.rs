use std::process::Command;

fn dfvem(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_dfvem"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn mesh_gen_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let p = path.to_str().unwrap();
    let (code, _, _) = dfvem(&["mesh", "gen", "--cubes", "2", "--tetra", "--out", p]);
    assert_eq!(code, 0);
    let (code, out, _) = dfvem(&["mesh", "check", "--rho", "0.1", p]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["counts"]["cells"], 48);
    assert_eq!(v["pass"], true);
    // the Kuhn tetrahedra fail a strict threshold
    let (code, out, _) = dfvem(&["mesh", "check", "--rho", "0.9", p]);
    assert_eq!(code, 1);
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn complex_check_report() {
    let (code, out, _) = dfvem(&["complex-check", "--tetra", "1", "--k", "3"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["exactness"]["alternating_sum"], 0);
    assert_eq!(v["rank"]["rank"], v["rank"]["dim_q"]);
    assert_eq!(v["pass"], true);
    let (code, out, _) = dfvem(&["complex-check", "--cubes", "2", "--cap", "10"]);
    assert_eq!(code, 0);
    assert!(json(&out)["rank_error"].is_string());
}

#[test]
fn bench_run_and_rates() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let c = csv.to_str().unwrap();
    let args = [
        "bench",
        "run",
        "--case",
        "ex3-p1",
        "--k",
        "2",
        "--levels",
        "2",
        "--no-timing",
        "--out",
        c,
    ];
    let (code, out, _) = dfvem(&args);
    assert_eq!(code, 0, "{out}");
    let v = json(&out);
    assert_eq!(v["config"]["case"], "ex3-p1");
    assert!(v["levels"][1]["e_h1_u"].as_f64().unwrap() < 1e-9);
    let first = std::fs::read_to_string(&csv).unwrap();
    assert!(first.starts_with("level,h,ndof_u,ndof_p,eH1u,eL2p,newton_iters,wall_time_s"));
    dfvem(&args);
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), first);

    let (code, out, _) = dfvem(&["bench", "rates", c]);
    assert_eq!(code, 0);
    assert!(json(&out)["slopes"].is_null());
}

#[test]
fn solve_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("s.json");
    let cells = dir.path().join("c.csv");
    let (code, out, _) = dfvem(&[
        "solve",
        "--case",
        "ex2-ns",
        "--cubes",
        "2",
        "--out",
        sol.to_str().unwrap(),
        "--cells",
        cells.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["converged"], true);
    assert!(v["divfree"].as_f64().unwrap() < 1e-9);
    let s = json(&std::fs::read_to_string(&sol).unwrap());
    assert_eq!(
        s["velocity"].as_array().unwrap().len(),
        v["ndof_u"].as_u64().unwrap() as usize
    );
    assert_eq!(std::fs::read_to_string(&cells).unwrap().lines().count(), 9);
}

#[test]
fn errors_are_reported() {
    let (code, _, err) = dfvem(&["bench", "run", "--case", "ex9"]);
    assert_ne!(code, 0);
    assert!(err.contains("unknown case"));
    let (code, _, err) = dfvem(&["mesh", "check", "/nonexistent.json"]);
    assert_eq!(code, 2);
    assert!(err.contains("reading"));
    let (code, _, _) = dfvem(&["complex-check", "--cubes", "1", "--k", "7"]);
    assert_eq!(code, 2);
}
