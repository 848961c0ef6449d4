use std::path::Path;
use std::process::{Command, Output};

fn trajdim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trajdim")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.toml");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn data_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with("# generated_unix")).map(String::from).collect()
}

const DAMPING: &str = r#"
schema_version = 1
[model]
kind = "top"
spin = 0.5
omega_z = 0.0
g = 0.0
gamma = 1.0
[trajectory]
dt = 0.01
horizon = 2.0
stride = 20
trajectories = 400
seed = 3
initial_state = { basis = 0 }
[analysis]
times = [0.2, 0.6, 1.0, 2.0]
"#;

#[test]
fn oracle_check_on_two_level_damping() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), DAMPING);
    let out = dir.path().join("out");
    let res = trajdim(&["oracle-check", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", "1"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let lines = data_lines(&out.join("oracle.csv"));
    assert!(lines[1].starts_with("# config_sha256 = "));
    assert_eq!(lines[2], "t,observable,trajectory_mean,std_error,exact,z");
    assert_eq!(lines.len(), 3 + 4 * 3);
}

#[test]
fn coarse_step_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &DAMPING.replace("dt = 0.01", "dt = 0.2").replace("stride = 20", "stride = 1"));
    let res = trajdim(&["oracle-check", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("too coarse"));
}

#[test]
fn config_errors_carry_lines() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{DAMPING}[sweep]\nparameter = \"omega_x\"\nvalues = []\n");
    let cfg = write_config(dir.path(), &body);
    let res = trajdim(&["id-time", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("line 20") && err.contains("sweep.values"), "{err}");
}

#[test]
fn spectrum_cap_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let body = DAMPING.replace("spin = 0.5", "spin = 10") + "[spectrum]\nmax_dim = 100\n";
    let cfg = write_config(dir.path(), &body);
    let res = trajdim(&["spectrum", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("exceeds the configured cap"));
}

#[test]
fn spectrum_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let body = DAMPING.replace("spin = 0.5", "spin = 3").replace("omega_z = 0.0", "omega_z = 4.0").replace("g = 0.0", "g = 5.0");
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("out");
    let res = trajdim(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for f in ["eigenvalues_0.csv", "ratios_0.csv", "spacings_0.csv", "spectrum_summary.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert_eq!(data_lines(&out.join("eigenvalues_0.csv")).len(), 3 + 49);
}

#[test]
fn classical_orbits_keep_their_norm() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
schema_version = 1
[model]
kind = "top"
spin = 20
omega_z = 1.0
g = 5.0
omega_x = 0.0
k = 0.2
tau = 1.0
gamma = 0.2
[classical]
grid = [3, 4]
initial = [[0.0, 0.0, -1.0]]
dt = 0.001
horizon = 20.0
stride = 100
"#;
    let cfg = write_config(dir.path(), body);
    let out = dir.path().join("out");
    let res = trajdim(&["classical", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let summary = data_lines(&out.join("classical_summary.csv"));
    assert_eq!(summary.len(), 3 + 13);
    for row in &summary[3..] {
        let drift: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(drift <= 1e-8);
    }
    let pole = data_lines(&out.join("orbit_12.csv"));
    assert_eq!(pole[2], "t,m_x,m_y,m_z,z,phi,norm_drift");
    assert!(pole[3..].iter().all(|r| r.split(',').skip(1).take(3).collect::<Vec<_>>() == ["0", "0", "-1"]));
}

#[test]
fn reruns_reproduce_and_seed_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
schema_version = 1
[model]
kind = "top"
spin = 3
omega_z = 1.0
g = 5.0
omega_x = 1.0
gamma = 2.0
[trajectory]
dt = 0.005
horizon = 2.0
stride = 100
trajectories = 60
seed = 11
initial_state = "haar"
[analysis]
window = [1.0, 2.0]
"#;
    let cfg = write_config(dir.path(), body);
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec!["id-time", "--config", &cfg, "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let res = trajdim(&args);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        data_lines(&out.join("id_time_0.csv"))
    };
    let a = run("a", &[]);
    let b = run("b", &["--threads", "2"]);
    let c = run("c", &["--seed", "12"]);
    assert_eq!(a, b);
    assert_ne!(a[3..], c[3..]);
}

#[test]
fn trajectories_are_saved_as_qtrj() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
schema_version = 1
[model]
kind = "top"
spin = 2
omega_z = 1.0
g = 1.0
omega_x = 1.0
gamma = 1.0
[trajectory]
dt = 0.01
horizon = 2.0
stride = 20
trajectories = 30
seed = 4
initial_state = "haar"
save_trajectories = true
[analysis]
times = [1.0, 2.0]
"#;
    let cfg = write_config(dir.path(), body);
    let out = dir.path().join("out");
    let res = trajdim(&["id-time", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let read = |i: usize| {
        let f = std::fs::File::open(out.join(format!("traj_0_{i}.qtrj"))).unwrap();
        trajdim::trajectory::read_qtrj(std::io::BufReader::new(f)).unwrap()
    };
    let (first, last) = (read(0), read(29));
    assert_eq!(first.dim, 5);
    assert_eq!(first.snapshots.len(), 11);
    assert_eq!(first.snapshots[0], last.snapshots[0]);
    assert!((first.snapshots[10].0 - 2.0).abs() < 1e-12);
    assert!(!out.join("traj_0_30.qtrj").exists());
}
