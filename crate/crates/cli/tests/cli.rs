use std::fs;
use std::path::Path;
use std::process::Command;

fn mcsim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mcsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn small_capacity_sweep(out: &Path, parallel: &str) -> std::process::Output {
    mcsim(&[
        "sweep-capacity",
        "--out",
        out.to_str().unwrap(),
        "--seeds",
        "2",
        "--parallel",
        parallel,
        "--set",
        "sim_time_s=1",
        "--set",
        "n_ues=1-3",
    ])
}

#[test]
fn capacity_sweep_writes_identical_files_for_any_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let run_a = small_capacity_sweep(&a, "1");
    let run_b = small_capacity_sweep(&b, "3");
    assert!(
        run_a.status.success(),
        "{}",
        String::from_utf8_lossy(&run_a.stderr)
    );
    assert!(run_b.status.success());

    let stdout = String::from_utf8(run_a.stdout).unwrap();
    assert!(stdout.contains("capacity dbtb"), "{stdout}");
    for name in [
        "multi_ue_capacity_sweep_raw.csv",
        "multi_ue_capacity_sweep_aggregate.csv",
        "multi_ue_capacity_sweep_summary.txt",
    ] {
        let left = fs::read(a.join(name)).unwrap();
        assert_eq!(left, fs::read(b.join(name)).unwrap(), "{name}");
    }
    let raw = fs::read_to_string(a.join("multi_ue_capacity_sweep_raw.csv")).unwrap();
    assert!(raw.starts_with("# mcsim "));
    assert!(raw.contains("# sim_time_s = 1"));
}

#[test]
fn distance_sweep_honours_config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# short run\ndistances_m = 10, 133\nsim_time_s = 1\nruns = 5\npolicy = single_fr1,dbtb\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let res = mcsim(&[
        "sweep-distance",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "runs=2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let agg = fs::read_to_string(out.join("single_ue_distance_sweep_aggregate.csv")).unwrap();
    let rows: Vec<&str> = agg
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 4);
    assert!(
        rows.iter().all(|r| r.split(',').nth(3) == Some("2")),
        "{agg}"
    );
}

#[test]
fn unknown_key_fails_with_its_name() {
    let dir = tempfile::tempdir().unwrap();
    let res = mcsim(&[
        "sweep-distance",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "warp_factor=9",
    ]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("warp_factor"));
}
