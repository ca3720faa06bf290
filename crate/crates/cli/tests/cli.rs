use std::fs;
use std::process::{Command, Output};

fn spinchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinchain"))
        .args(args)
        .env_remove("SPINCHAIN_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field(line: &str, index: usize) -> f64 {
    line.split(',').nth(index).unwrap().parse().unwrap()
}

#[test]
fn single_noiseless_realization() {
    let args = [
        "run",
        "--protocol",
        "spin-coupling",
        "--n",
        "15",
        "--realizations",
        "1",
        "--noiseless",
    ];
    let text = stdout(&spinchain(&args));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("protocol,N,sigma_h,sigma_j,realizations,"));
    assert!(field(lines[1], 5) > 1.0 - 1e-9);
    assert!(field(lines[1], 7) > 1.0 - 1e-9);
    assert_eq!(text, stdout(&spinchain(&args)));
}

#[test]
fn even_adiabatic_chain_is_diagnosed() {
    let out = spinchain(&[
        "run",
        "--protocol",
        "adiabatic",
        "--n",
        "24",
        "--realizations",
        "2",
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("odd number of sites"), "{err}");
    assert!(err.contains("dark state"), "{err}");
}

#[test]
fn invalid_inputs_fail() {
    for args in [
        vec!["run", "--n", "1"],
        vec!["run", "--sigma-h", "-0.1"],
        vec!["run", "--realizations", "0"],
        vec!["run", "--protocol", "teleport"],
        vec!["run", "--ramp-endpoints", "soft"],
        vec!["run", "--config", "/nonexistent/config.toml"],
        vec!["run", "--noiseless", "--sigma-h", "0.1"],
        vec!["sweep", "--ns", "5", "--sigma-step", "0"],
    ] {
        let out = spinchain(&args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn noiseless_adiabatic_trajectory() {
    let text = stdout(&spinchain(&[
        "trajectory",
        "--protocol",
        "adiabatic",
        "--n",
        "25",
        "--noiseless",
    ]));
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header.first(), Some(&"t"));
    assert_eq!(&header[header.len() - 2..], ["J_odd", "J_even"]);
    let last = text.lines().last().unwrap();
    assert!(field(last, 25) >= 0.99, "{last}");
    let rows = text.lines().count() - 1;
    assert!((250..=502).contains(&rows), "{rows} rows");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("point.toml");
    fs::write(
        &cfg,
        "realizations = 30\nseed = 5\n[chain]\nn_sites = 9\n[protocol]\nkind = \"swap\"\n[disorder]\nsigma_h = 0.1\nsigma_j = 0.1\n",
    )
    .unwrap();
    let path = cfg.to_str().unwrap();
    let text = stdout(&spinchain(&["run", "--config", path, "--seed", "6"]));
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "swap");
    assert_eq!(row[1], "9");
    assert_eq!(row[4], "30");
    assert_eq!(row[9], "6");
}

#[test]
fn sweep_manifest_replays_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("grid.csv");
    let args = [
        "sweep",
        "--protocols",
        "swap,spin-coupling",
        "--ns",
        "5,7",
        "--sigma-h-values",
        "0,0.1",
        "--sigma-j-values",
        "0.05",
        "--realizations",
        "25",
        "--seed",
        "3",
        "--output",
        first.to_str().unwrap(),
    ];
    stdout(&spinchain(&args));
    let table = fs::read_to_string(&first).unwrap();
    assert_eq!(table.lines().count(), 1 + 2 * 2 * 2);

    let manifest = dir.path().join("grid.manifest.toml");
    let manifest_text = fs::read_to_string(&manifest).unwrap();
    assert!(manifest_text.contains("[manifest]"));
    assert!(manifest_text.contains("threads"));

    let replay = dir.path().join("replay.csv");
    stdout(&spinchain(&[
        "sweep",
        "--config",
        manifest.to_str().unwrap(),
        "--output",
        replay.to_str().unwrap(),
    ]));
    assert_eq!(fs::read_to_string(&replay).unwrap(), table);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = [
        "run",
        "--protocol",
        "swap",
        "--n",
        "11",
        "--sigma-h",
        "0.2",
        "--sigma-j",
        "0.1",
        "--realizations",
        "64",
        "--seed",
        "9",
    ];
    let one = Command::new(env!("CARGO_BIN_EXE_spinchain"))
        .args(args)
        .env("SPINCHAIN_THREADS", "1")
        .output()
        .unwrap();
    let three = spinchain(&[&["--threads", "3"], &args[..]].concat());
    assert_eq!(stdout(&one), stdout(&three));
}

#[test]
fn quick_verify_passes() {
    let text = stdout(&spinchain(&["verify"]));
    assert!(
        text.lines().filter(|l| l.starts_with("PASS")).count() >= 6,
        "{text}"
    );
    assert!(!text.contains("FAIL"));
}
