use std::path::Path;
use std::process::{Command, Output};

fn isac(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_isac"));
    cmd.args(args).env_remove("ISAC_OUTPUT_DIR");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sidecar_reproduces_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let second = dir.path().join("second.csv");
    ok(&isac(
        &[
            "sweep-capacity",
            "--out",
            first.to_str().unwrap(),
            "--n_samples=3000",
            "--seed=99",
            "--snr_db=3",
        ],
        &[],
    ));
    let sidecar = dir.path().join("first.csv.config");
    ok(&isac(
        &[
            "sweep-capacity",
            "--config",
            sidecar.to_str().unwrap(),
            "--out",
            second.to_str().unwrap(),
        ],
        &[],
    ));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
    assert_eq!(
        std::fs::read(&sidecar).unwrap(),
        std::fs::read(dir.path().join("second.csv.config")).unwrap()
    );
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    ok(&isac(&["tradeoff"], &[("ISAC_OUTPUT_DIR", dir.path())]));
    let csv = std::fs::read_to_string(dir.path().join("tradeoff.csv")).unwrap();
    assert!(csv.starts_with("L_p,capacity,ergodic_crb\n"));
    assert_eq!(csv.lines().count(), 14);
    assert!(dir.path().join("tradeoff.csv.config").exists());
}

#[test]
fn headers_per_command() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, header, rows) in [
        (
            "sweep-capacity",
            "L_p,capacity_closed,capacity_mc_mean,capacity_mc_stderr",
            13,
        ),
        ("sweep-crb", "L_p,crb_closed,crb_series,crb_mc_mean,crb_mc_stderr", 13),
        ("sweep-efficiency", "axis_value,efficiency,L_p_used", 31),
        ("sweep-utility", "L_p,utility,capacity_ratio,crb_ratio,feasible", 13),
        (
            "optimize",
            "L_p_opt,q_star,iterations,converged,efficiency_at_opt,L_p_continuous",
            1,
        ),
        ("mc-validate", "quantity,L_p,closed_form,mc_mean,mc_stderr,z_score", 26),
    ] {
        let out = dir.path().join(format!("{cmd}.csv"));
        ok(&isac(&[cmd, "--n_samples=500", "--out", out.to_str().unwrap()], &[]));
        let csv = std::fs::read_to_string(&out).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(header), "{cmd}");
        assert_eq!(lines.count(), rows, "{cmd}");
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "# comment\nsymbols = 14\nu_c_th = 1.5\n").unwrap();
    let out = dir.path().join("x.csv");
    let res = isac(
        &[
            "tradeoff",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(res.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&res.stderr);
    assert!(msg.contains("bad.cfg:3") && msg.contains("u_c_th"), "{msg}");
    assert!(!out.exists());

    let res = isac(&["tradeoff", "--no_such_key=1", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("no_such_key"));
    let res = isac(&["no-such-command"], &[]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    // A vanishing pilot SNR makes the estimate worthless and the closed form
    // degenerate.
    let res = isac(&["tradeoff", "--snr_db=-200", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stderr).contains("ergodic_capacity"));
    assert!(!out.exists());
}
