use std::fs;
use std::path::Path;
use trajdim::config::ExperimentConfig;
use trajdim::experiments::{run_id_time, run_id_traj, run_spectrum};
use trajdim::Error;

fn top_traj(omega_x: f64) -> ExperimentConfig {
    ExperimentConfig::from_toml(&format!(
        r#"
schema_version = 1
[model]
kind = "top"
spin = 10
omega_z = 1.0
g = 5.0
omega_x = {omega_x}
gamma = 2.0
[trajectory]
dt = 0.0025
horizon = 50.0
stride = 2
trajectories = 6
seed = 3
initial_state = "haar"
[analysis]
delta_t = [0.1]
"#
    ))
    .unwrap()
}

fn data_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(str::to_owned)
        .collect()
}

#[test]
fn integrable_top_trajectories_are_flagged_non_pareto() {
    let dir = tempfile::tempdir().unwrap();
    let pts = run_id_traj(&top_traj(0.0), Some(dir.path())).unwrap();
    assert_eq!(pts.len(), 1);
    assert_eq!(pts[0].n_pareto, 0);
    assert_eq!(pts[0].trajectories.len(), 6);
    // flagged rows are kept in the output
    let rows = data_rows(&dir.path().join("id_traj_0.csv"));
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.ends_with(",0")));
}

#[test]
fn chaotic_top_single_trajectory_dimension_is_finite() {
    let pts = run_id_traj(&top_traj(1.0), None).unwrap();
    let p = &pts[0];
    assert!(p.trajectories.iter().all(|t| t.estimate.is_some_and(|e| e.id.is_finite() && e.id > 0.0)));
    assert!(p.id_mean.is_finite() && p.id_sem.is_finite());
    assert!(p.id_mean > 0.5 && p.id_mean < 3.0, "{}", p.id_mean);
}

#[test]
fn top_sweep_gives_minimum_at_integrable_point() {
    let cfg = ExperimentConfig::from_toml(
        r#"
schema_version = 1
[model]
kind = "top"
spin = 10
omega_z = 1.0
g = 5.0
gamma = 2.0
[trajectory]
horizon = 10.0
stride = 100
trajectories = 200
seed = 5
initial_state = "haar"
[analysis]
window = [5.0, 10.0]
[sweep]
parameter = "omega_x"
values = [0.0, 2.0, 4.0]
"#,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let pts = run_id_time(&cfg, Some(dir.path())).unwrap();
    assert_eq!(data_rows(&dir.path().join("summary.csv")).len(), 3);
    let ids: Vec<f64> = pts.iter().map(|p| p.id_mean).collect();
    assert!(ids[0] < ids[1] && ids[0] < ids[2], "{ids:?}");
}

#[test]
fn model_a_sweep_gives_minimum_at_free_point() {
    let cfg = ExperimentConfig::from_toml(
        r#"
schema_version = 1
[model]
kind = "chain"
variant = "A"
sites = 6
j1 = 1.0
gamma0 = 1.0
[trajectory]
horizon = 20.0
stride = 300
trajectories = 200
seed = 6
initial_state = "haar"
[analysis]
window = [10.0, 20.0]
[sweep]
parameter = "delta"
values = [0.0, 0.5, 1.0]
"#,
    )
    .unwrap();
    let ids: Vec<f64> = run_id_time(&cfg, None).unwrap().iter().map(|p| p.id_mean).collect();
    assert!(ids[0] < ids[1] && ids[0] < ids[2], "{ids:?}");
}

#[test]
fn empty_sweep_is_a_config_error() {
    let err = ExperimentConfig::from_toml(
        r#"
schema_version = 1
[model]
kind = "top"
spin = 2
omega_z = 1.0
g = 1.0
gamma = 1.0
[sweep]
parameter = "omega_x"
values = []
"#,
    )
    .unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
    assert!(err.to_string().contains("sweep.values"), "{err}");
}

#[test]
fn integrable_top_floquet_spectrum_is_poissonian() {
    let cfg = ExperimentConfig::from_toml(
        r#"
schema_version = 1
[model]
kind = "top"
spin = 20
omega_z = 4.0
g = 5.0
tau = 1.0
gamma = 0.2
[spectrum]
mode = "floquet"
"#,
    )
    .unwrap();
    let pts = run_spectrum(&cfg, None).unwrap();
    assert_eq!(pts[0].matrix_dim, 41 * 41);
    assert!(pts[0].mean_cos_theta.abs() <= 0.06, "{}", pts[0].mean_cos_theta);
}
