use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_platoon-sim"))
}

#[test]
fn print_defaults_is_a_valid_scenario() {
    let out = bin().arg("--print-defaults").output().unwrap();
    assert!(out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("default.toml");
    fs::write(&path, &out.stdout).unwrap();
    let v = bin().arg("validate").arg(&path).output().unwrap();
    assert!(v.status.success(), "{}", String::from_utf8_lossy(&v.stderr));
}

#[test]
fn run_writes_results_and_replay_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args(["run", "--controller", "FCFS_Platoon", "--seed", "4", "--horizon", "120", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(out.join("run.csv")).unwrap();
    assert!(csv.starts_with("vehicle_id,platoon_id,index,approach,movement,"));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(summary["controller"], "FCFS_Platoon");
    assert_eq!(summary["seed"], 4);

    let replay = bin()
        .arg("replay")
        .arg(out.join("run.log"))
        .args(["--platoon", "1"])
        .output()
        .unwrap();
    assert!(replay.status.success());
    let text = String::from_utf8(replay.stdout).unwrap();
    assert!(text.starts_with("t,p,v,u\n"));
    assert!(text.lines().count() > 10);
}

#[test]
fn faults_give_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[demand]\nrate_w = -5\n").unwrap();
    let v = bin().arg("validate").arg(&bad).output().unwrap();
    assert!(!v.status.success());
    assert!(String::from_utf8_lossy(&v.stderr).contains("demand.rate_w"));

    let log = dir.path().join("empty.log");
    fs::write(&log, "").unwrap();
    let r = bin().arg("replay").arg(&log).args(["--platoon", "3"]).output().unwrap();
    assert!(!r.status.success());

    let tight = dir.path().join("tight.toml");
    fs::write(&tight, "[geometry]\nschedule_zone_length = 20.0\n").unwrap();
    let r = bin().arg("run").arg(&tight).arg("--out").arg(dir.path()).output().unwrap();
    assert!(!r.status.success());
}

#[test]
fn sweep_writes_one_csv_and_json_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.toml");
    let out = dir.path().join("sweep");
    fs::write(
        &scenario,
        format!(
            "[experiment]\nhorizon = 60.0\ncontrollers = [\"OC_Platoon\", \"FCFS_Ind\"]\nmax_sizes = [1, 5]\nseeds = [1, 2]\noutput_dir = {:?}\n",
            out.to_string_lossy()
        ),
    )
    .unwrap();
    let status = bin().arg("sweep").arg(&scenario).status().unwrap();
    assert!(status.success());
    let cells = fs::read_dir(out.join("cells")).unwrap().count();
    assert_eq!(cells, 2 * 2 * 2 * 2);
    for f in ["comparison.csv", "percent_vs_fcfs_ind.csv", "percent_vs_size1.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}
