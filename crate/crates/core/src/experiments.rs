//! Configured experiments: ensembles, dimension estimates, spectra,
//! classical orbits and the master-equation cross-check, with CSV output.

use crate::config::{ExperimentConfig, InitialState, ModelSpec, SpectrumMode, SweepParameter, UnravelingSpec};
use crate::dimension::{
    late_time_average, mean_std, scale_profile, single_trajectory_dataset, two_nn, IdEstimate, IdSeries, ScalePoint,
};
use crate::error::{invalid, Error, Result};
use crate::hilbert::{chain_operator, chain_total_sz, diagonal_sector, spin_operators, Axis, PureState, SpinRep};
use crate::lindblad::{
    chain_model, floquet_map, gauge_transform, quantum_top_model, vectorize, DensityMatrix, DensityPropagator,
    LindbladModel, TopParams, UnravelingGauge,
};
use crate::linalg::ComplexMatrix;
use num_complex::Complex64 as C64;
use crate::semiclassical::{integrate_orbit, orbit_export, ClassicalParams, ClassicalSpin, OrbitRow, ORBIT_CSV_HEADER};
use crate::spectral::{
    complex_ratios, eigen_spectrum, ginibre_mean_spacing, ginibre_pdf_unit_mean, histogram, mean_cos_theta,
    mean_modulus, nn_spacings, poisson2d_pdf, ComplexSpectrum, RatioSample,
};
use crate::trajectory::{
    default_dt, expectation, write_qtrj, JumpIntegrator, SnapshotFile, TrajectoryConfig, TrajectoryRecord,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::Path;

/// RNG stream reserved for drawing the shared random initial state.
pub const INITIAL_STATE_STREAM: u64 = u64::MAX - 1;
/// Oracle z-scores above this fail the check.
pub const ORACLE_Z_LIMIT: f64 = 4.0;
const MIN_STANDARD_ERROR: f64 = 1e-9;
/// Upper edge of the spacing histogram, in units of the mean spacing.
const SPACING_RANGE: f64 = 4.0;

pub type SweepPoint = Option<(SweepParameter, f64)>;

fn point_columns(p: SweepPoint) -> String {
    match p {
        Some((param, v)) => format!("{},{v}", param.name()),
        None => "none,".to_string(),
    }
}

/// Model without the unraveling gauge.
pub fn base_model(cfg: &ExperimentConfig) -> Result<LindbladModel> {
    match &cfg.model {
        ModelSpec::Top(p) => quantum_top_model(p),
        ModelSpec::Chain(p) => chain_model(p),
    }
}

/// Model with the configured jump-operator shifts applied.
pub fn unraveled_model(cfg: &ExperimentConfig) -> Result<LindbladModel> {
    let model = base_model(cfg)?;
    let Some(u) = &cfg.unraveling else { return Ok(model) };
    gauge_transform(&model, &gauge(u, model.jumps().len()))
}

fn gauge(u: &UnravelingSpec, channels: usize) -> UnravelingGauge {
    let c = |z: &[f64; 2]| C64::new(z[0], z[1]);
    match (&u.shift, &u.shifts) {
        (_, Some(list)) => UnravelingGauge { shifts: list.iter().map(c).collect(), energy_offset: u.energy_offset },
        (Some(z), None) => UnravelingGauge::uniform(channels, c(z), u.energy_offset),
        (None, None) => UnravelingGauge { energy_offset: u.energy_offset, ..UnravelingGauge::identity(channels) },
    }
}

/// Total `S_z` of the configured system, diagonal in the computational basis.
pub fn total_sz(cfg: &ExperimentConfig) -> Result<ComplexMatrix> {
    Ok(match &cfg.model {
        ModelSpec::Top(p) => spin_operators(SpinRep::new(p.spin)?).sz,
        ModelSpec::Chain(p) => chain_total_sz(p.sites),
    })
}

/// Initial state shared by all trajectories; random states use a
/// dedicated stream of the configured seed.
pub fn initial_state(cfg: &ExperimentConfig) -> Result<PureState> {
    let t = cfg.trajectory()?;
    let dim = base_model(cfg)?.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(t.seed);
    rng.set_stream(INITIAL_STATE_STREAM);
    match t.initial_state {
        InitialState::Haar => Ok(PureState::haar(dim, &mut rng)),
        InitialState::HaarFixedSz(v) => {
            let support = diagonal_sector(&total_sz(cfg)?, v);
            if support.is_empty() {
                return Err(invalid(format!("no basis states with total S_z = {v}")));
            }
            PureState::haar_in_subspace(dim, &support, &mut rng)
        }
        InitialState::Basis(i) => PureState::basis(dim, i),
    }
}

/// Everything needed to run the configured ensemble.
#[derive(Debug, Clone)]
pub struct EnsembleSetup {
    pub model: LindbladModel,
    pub psi0: PureState,
    pub config: TrajectoryConfig,
    pub trajectories: usize,
}

pub fn ensemble_setup(cfg: &ExperimentConfig) -> Result<EnsembleSetup> {
    let t = cfg.trajectory()?;
    let model = unraveled_model(cfg)?;
    let psi0 = initial_state(cfg)?;
    let dt = match t.dt {
        Some(dt) => dt,
        None => default_dt(&model, &psi0, t.horizon, t.seed)?,
    };
    let config = TrajectoryConfig::new(dt, t.horizon, t.stride, t.seed)?;
    Ok(EnsembleSetup { model, psi0, config, trajectories: t.trajectories })
}

impl EnsembleSetup {
    pub fn run(&self) -> Result<Vec<TrajectoryRecord>> {
        JumpIntegrator::new(&self.model, self.config.dt)?.simulate_ensemble(
            &self.psi0,
            &self.config,
            0..self.trajectories as u64,
        )
    }
}

/// Configured evaluation times, or every positive snapshot time inside the window.
fn evaluation_times(cfg: &ExperimentConfig, snapshot_times: &[f64]) -> Result<Vec<f64>> {
    let a = cfg.analysis()?;
    if let Some(t) = &a.times {
        return Ok(t.clone());
    }
    let (lo, hi) = a.window.map_or((0.0, f64::INFINITY), |w| (w[0], w[1]));
    let eps = 1e-9 * snapshot_times.last().copied().unwrap_or(1.0).max(1.0);
    let times: Vec<f64> =
        snapshot_times.iter().copied().filter(|&t| t > 0.0 && t >= lo - eps && t <= hi + eps).collect();
    if times.is_empty() {
        return Err(Error::Config("no snapshot times inside the analysis window".into()));
    }
    Ok(times)
}

fn averaging_window(cfg: &ExperimentConfig, times: &[f64]) -> Result<(f64, f64)> {
    let eps = 1e-9;
    Ok(match cfg.analysis()?.window {
        Some([a, b]) => (a - eps, b + eps),
        None => (times[0] - eps, times[times.len() - 1] + eps),
    })
}

#[derive(Debug, Clone)]
pub struct IdTimePoint {
    pub point: SweepPoint,
    pub dt: f64,
    pub series: IdSeries<f64>,
    /// Late-time `Īd` and its standard deviation over the window.
    pub id_mean: f64,
    pub id_std: f64,
    pub scale: Vec<ScalePoint>,
}

/// `I_d(t)` of the fixed-time ensembles for every sweep point.
pub fn run_id_time(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Vec<IdTimePoint>> {
    let cutoff = cfg.analysis()?.cutoff_fraction;
    let mut points = Vec::new();
    for (idx, point) in cfg.sweep_points().into_iter().enumerate() {
        let c = cfg.at_point(point);
        let setup = ensemble_setup(&c)?;
        let ensemble = setup.run()?;
        save_trajectories(&c, out, idx, &ensemble)?;
        let snap: Vec<f64> = ensemble[0].times().collect();
        let times = evaluation_times(&c, &snap)?;
        let estimates = times
            .par_iter()
            .map(|&t| two_nn(&crate::dimension::fixed_time_dataset(&ensemble, t)?, cutoff))
            .collect::<Result<Vec<_>>>()?;
        let series = IdSeries::new(times.clone(), estimates)?;
        let (lo, hi) = averaging_window(&c, &times)?;
        let (id_mean, id_std) = late_time_average(&series, lo, hi)?;
        let n_list = &c.analysis()?.n_list;
        let scale =
            if n_list.is_empty() { Vec::new() } else { scale_profile(&ensemble, lo, hi, n_list, cutoff)? };
        if let Some(dir) = out {
            write_series(dir, cfg, idx, point, &series)?;
            if !scale.is_empty() {
                let rows = scale.iter().map(|s| format!("{},{},{},{}", s.n, s.id_mean, s.id_std, s.r_bar));
                write_csv(dir, &format!("scale_profile_{idx}.csv"), cfg, "id-time", Some(point), "n,id_mean,id_std,r_bar", rows)?;
            }
        }
        points.push(IdTimePoint { point, dt: setup.config.dt, series, id_mean, id_std, scale });
    }
    if let Some(dir) = out {
        let rows = points
            .iter()
            .map(|p| format!("{},{},{},{},{}", point_columns(p.point), p.id_mean, p.id_std, p.series.len(), p.dt));
        write_csv(dir, "summary.csv", cfg, "id-time", None, "parameter,value,id_mean,id_std,n_times,dt", rows)?;
    }
    Ok(points)
}

fn write_series(dir: &Path, cfg: &ExperimentConfig, idx: usize, point: SweepPoint, s: &IdSeries<f64>) -> Result<()> {
    let rows = s.times.iter().zip(&s.estimates).map(|(t, e)| {
        format!(
            "{t},{},{},{},{},{},{}",
            e.id,
            e.typical_scale,
            e.n_points,
            e.fit_residual,
            e.discarded,
            u8::from(e.is_pareto())
        )
    });
    write_csv(
        dir,
        &format!("id_time_{idx}.csv"),
        cfg,
        "id-time",
        Some(point),
        "t,id,r_bar,n_points,fit_residual,discarded,pareto",
        rows,
    )
}

/// Single-trajectory estimate; `None` when the estimator has too few usable points.
#[derive(Debug, Clone)]
pub struct TrajectoryDimension {
    pub index: usize,
    pub estimate: Option<IdEstimate<f64>>,
}

impl TrajectoryDimension {
    pub fn is_pareto(&self) -> bool {
        self.estimate.as_ref().is_some_and(IdEstimate::is_pareto)
    }
}

#[derive(Debug, Clone)]
pub struct IdTrajPoint {
    pub point: SweepPoint,
    pub delta_t: f64,
    pub trajectories: Vec<TrajectoryDimension>,
    /// Mean over all trajectories with an estimate, and its standard error.
    pub id_mean: f64,
    pub id_sem: f64,
    pub n_pareto: usize,
}

/// Per-trajectory `I′_d(Δt)` for every sweep point and `Δt`.
pub fn run_id_traj(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Vec<IdTrajPoint>> {
    let a = cfg.analysis()?;
    if a.delta_t.is_empty() {
        return Err(Error::Config("analysis.delta_t is required for id-traj".into()));
    }
    let cutoff = a.cutoff_fraction;
    let mut points = Vec::new();
    for (idx, point) in cfg.sweep_points().into_iter().enumerate() {
        let ensemble = ensemble_setup(&cfg.at_point(point))?.run()?;
        save_trajectories(cfg, out, idx, &ensemble)?;
        let mut rows = Vec::new();
        for &delta_t in &a.delta_t {
            let trajectories = ensemble
                .par_iter()
                .enumerate()
                .map(|(index, rec)| {
                    let estimate = match two_nn(&single_trajectory_dataset(rec, delta_t)?, cutoff) {
                        Ok(e) => Some(e),
                        Err(Error::TooFewPoints { .. } | Error::DegenerateFit) => None,
                        Err(e) => return Err(e),
                    };
                    Ok(TrajectoryDimension { index, estimate })
                })
                .collect::<Result<Vec<_>>>()?;
            let ids: Vec<f64> = trajectories.iter().filter_map(|t| t.estimate.as_ref().map(|e| e.id)).collect();
            let (id_mean, id_sem) = match mean_std(&ids) {
                Some((m, s)) => (m, s / (ids.len() as f64).sqrt()),
                None => (ids.first().copied().unwrap_or(f64::NAN), f64::NAN),
            };
            let n_pareto = trajectories.iter().filter(|t| t.is_pareto()).count();
            for t in &trajectories {
                let (id, r, n, rel) = t.estimate.as_ref().map_or((f64::NAN, f64::NAN, 0, f64::NAN), |e| {
                    (e.id, e.typical_scale, e.n_points, e.relative_residual)
                });
                rows.push(format!("{},{delta_t},{id},{r},{n},{rel},{}", t.index, u8::from(t.is_pareto())));
            }
            points.push(IdTrajPoint { point, delta_t, trajectories, id_mean, id_sem, n_pareto });
        }
        if let Some(dir) = out {
            write_csv(
                dir,
                &format!("id_traj_{idx}.csv"),
                cfg,
                "id-traj",
                Some(point),
                "trajectory,delta_t,id,r_bar,n_points,relative_residual,pareto",
                rows,
            )?;
        }
    }
    if let Some(dir) = out {
        let rows = points.iter().map(|p| {
            format!(
                "{},{},{},{},{},{}",
                point_columns(p.point),
                p.delta_t,
                p.id_mean,
                p.id_sem,
                p.n_pareto,
                p.trajectories.len()
            )
        });
        write_csv(dir, "id_traj_summary.csv", cfg, "id-traj", None, "parameter,value,delta_t,id_mean,id_sem,n_pareto,n_trajectories", rows)?;
    }
    Ok(points)
}

#[derive(Debug, Clone)]
pub struct SpectrumPoint {
    pub point: SweepPoint,
    pub mode: SpectrumMode,
    pub matrix_dim: usize,
    pub spectrum: ComplexSpectrum<f64>,
    pub ratios: RatioSample<f64>,
    pub mean_cos_theta: f64,
    pub mean_modulus: f64,
    /// Nearest-neighbour spacings at unit mean.
    pub spacings: Vec<f64>,
}

/// Floquet map or generator of `model`; fails above `cap` without building it.
pub fn spectrum_matrix(model: &LindbladModel, mode: SpectrumMode, cap: usize) -> Result<ComplexMatrix> {
    let dim = model.dim() * model.dim();
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    Ok(match mode {
        SpectrumMode::Floquet => floquet_map(model)?.into_matrix(),
        SpectrumMode::Autonomous => vectorize(model).into_matrix(),
    })
}

pub fn run_spectrum(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Vec<SpectrumPoint>> {
    let spec = cfg.spectrum.clone().unwrap_or_default();
    let mut points = Vec::new();
    for (idx, point) in cfg.sweep_points().into_iter().enumerate() {
        let model = base_model(&cfg.at_point(point))?;
        let mode = spec.mode.unwrap_or(if model.kick().is_some() { SpectrumMode::Floquet } else { SpectrumMode::Autonomous });
        let matrix = spectrum_matrix(&model, mode, spec.max_dim)?;
        let mut spectrum = eigen_spectrum(&matrix, false)?;
        if let Some(m) = spec.min_modulus {
            spectrum = spectrum.filtered(|z| z.norm() > m);
        }
        let ratios = complex_ratios(&spectrum, spec.convention)?;
        let cos = mean_cos_theta(&ratios)?;
        let modulus = mean_modulus(&ratios)?;
        let spacings = nn_spacings(&spectrum)?;
        if let Some(dir) = out {
            write_spectrum_files(dir, cfg, idx, point, &spectrum, &ratios, &spacings, spec.bins)?;
        }
        points.push(SpectrumPoint {
            point,
            mode,
            matrix_dim: matrix.nrows(),
            spectrum,
            ratios,
            mean_cos_theta: cos,
            mean_modulus: modulus,
            spacings,
        });
    }
    if let Some(dir) = out {
        let rows = points.iter().map(|p| {
            format!(
                "{},{:?},{},{},{},{},{},{}",
                point_columns(p.point),
                p.mode,
                p.matrix_dim,
                p.spectrum.len(),
                p.ratios.ratios.len(),
                p.ratios.skipped,
                p.mean_cos_theta,
                p.mean_modulus
            )
        });
        write_csv(
            dir,
            "spectrum_summary.csv",
            cfg,
            "spectrum",
            None,
            "parameter,value,mode,matrix_dim,n_eigenvalues,n_ratios,skipped,mean_cos_theta,mean_modulus",
            rows,
        )?;
    }
    Ok(points)
}

#[allow(clippy::too_many_arguments)]
fn write_spectrum_files(
    dir: &Path,
    cfg: &ExperimentConfig,
    idx: usize,
    point: SweepPoint,
    spectrum: &ComplexSpectrum<f64>,
    ratios: &RatioSample<f64>,
    spacings: &[f64],
    bins: usize,
) -> Result<()> {
    let eig = spectrum.eigenvalues.iter().map(|z| format!("{},{}", z.re, z.im));
    write_csv(dir, &format!("eigenvalues_{idx}.csv"), cfg, "spectrum", Some(point), "re,im", eig)?;
    let rat = ratios.ratios.iter().map(|z| format!("{},{},{},{}", z.re, z.im, z.norm(), z.arg()));
    write_csv(dir, &format!("ratios_{idx}.csv"), cfg, "spectrum", Some(point), "re,im,r,theta", rat)?;
    let mean = ginibre_mean_spacing();
    let rows = histogram(spacings, bins, 0.0, SPACING_RANGE)?
        .into_iter()
        .map(|(s, p)| {
            let poisson = poisson2d_pdf(s)?;
            let ginibre = ginibre_pdf_unit_mean(s, mean)?;
            Ok(format!("{s},{p},{poisson},{ginibre}"))
        })
        .collect::<Result<Vec<_>>>()?;
    write_csv(dir, &format!("spacings_{idx}.csv"), cfg, "spectrum", Some(point), "s,density,poisson2d,ginibre", rows)
}

#[derive(Debug, Clone)]
pub struct ClassicalOrbit {
    pub initial: ClassicalSpin<f64>,
    pub rows: Vec<OrbitRow<f64>>,
    pub max_norm_drift: f64,
}

pub fn classical_params(p: &TopParams) -> ClassicalParams<f64> {
    ClassicalParams { omega_z: p.omega_z, g: p.g, omega_x: p.omega_x, gamma: p.gamma, k: p.k, tau: p.tau }
}

/// Grid points `z_i = −1 + (2i+1)/n_z`, `φ_j = 2πj/n_φ`, then the listed extras.
pub fn classical_initial_conditions(cfg: &ExperimentConfig) -> Result<Vec<ClassicalSpin<f64>>> {
    let c = cfg.classical()?;
    let mut out = Vec::new();
    if let Some([nz, nphi]) = c.grid {
        for i in 0..nz {
            let z = -1.0 + (2 * i + 1) as f64 / nz as f64;
            for j in 0..nphi {
                out.push(ClassicalSpin::from_cylindrical(z, std::f64::consts::TAU * j as f64 / nphi as f64));
            }
        }
    }
    out.extend(c.initial.iter().map(|&m| ClassicalSpin { m }));
    Ok(out)
}

pub fn run_classical(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Vec<ClassicalOrbit>> {
    let ModelSpec::Top(top) = &cfg.model else {
        return Err(Error::Config("the classical limit exists for the top only".into()));
    };
    let c = cfg.classical()?;
    let params = classical_params(top);
    let orbits = classical_initial_conditions(cfg)?
        .into_par_iter()
        .map(|m0| {
            let orbit = integrate_orbit(m0, &params, c.dt, c.horizon)?;
            let max_norm_drift = orbit.max_norm_drift();
            let rows = orbit_export(&orbit.thinned(c.stride));
            Ok(ClassicalOrbit { initial: m0, rows, max_norm_drift })
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(dir) = out {
        for (i, o) in orbits.iter().enumerate() {
            let rows = o.rows.iter().map(OrbitRow::csv_line);
            write_csv(dir, &format!("orbit_{i}.csv"), cfg, "classical", None, ORBIT_CSV_HEADER, rows)?;
        }
        let rows = orbits.iter().enumerate().map(|(i, o)| {
            let [x, y, z] = o.initial.m;
            format!("{i},{x},{y},{z},{:e}", o.max_norm_drift)
        });
        write_csv(dir, "classical_summary.csv", cfg, "classical", None, "orbit,m_x,m_y,m_z,max_norm_drift", rows)?;
    }
    Ok(orbits)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub t: f64,
    pub observable: String,
    pub mean: f64,
    pub std_error: f64,
    pub exact: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub rows: Vec<OracleRow>,
    pub max_z: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.max_z <= ORACLE_Z_LIMIT
    }
}

/// Observables compared by the oracle: `S_z, S_x, S_y` for the top;
/// `σᶻ₁, σˣ₁` and total `S_z` for chains.
pub fn oracle_observables(cfg: &ExperimentConfig) -> Result<Vec<(String, ComplexMatrix)>> {
    Ok(match &cfg.model {
        ModelSpec::Top(p) => {
            let ops = spin_operators(SpinRep::new(p.spin)?);
            vec![("S_z".into(), ops.sz), ("S_x".into(), ops.sx), ("S_y".into(), ops.sy)]
        }
        ModelSpec::Chain(p) => vec![
            ("sigma_z_1".into(), chain_operator(p.sites, 1, Axis::Z)?),
            ("sigma_x_1".into(), chain_operator(p.sites, 1, Axis::X)?),
            ("S_z".into(), chain_total_sz(p.sites)),
        ],
    })
}

/// Trajectory averages against the master equation at the analysis times.
pub fn run_oracle_check(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<OracleReport> {
    let times = cfg.analysis()?.times.clone().ok_or_else(|| Error::Config("analysis.times is required for oracle-check".into()))?;
    let setup = ensemble_setup(cfg)?;
    let ensemble = setup.run()?;
    let exact = DensityPropagator::new(&base_model(cfg)?)?.propagate_series(&DensityMatrix::pure(&setup.psi0), &times)?;
    let observables = oracle_observables(cfg)?;
    let mut rows = Vec::new();
    for (&t, rho) in times.iter().zip(&exact) {
        let states = ensemble.iter().map(|r| r.snapshot_at(t).ok_or(Error::MissingSnapshot(t))).collect::<Result<Vec<_>>>()?;
        for (name, op) in &observables {
            let values = states.iter().map(|psi| expectation(psi, op)).collect::<Result<Vec<_>>>()?;
            let (mean, sd) = mean_std(&values).unwrap_or((values[0], 0.0));
            let std_error = sd / (values.len() as f64).sqrt();
            let exact = rho.expectation(op).re;
            let z = (mean - exact).abs() / std_error.max(MIN_STANDARD_ERROR);
            rows.push(OracleRow { t, observable: name.clone(), mean, std_error, exact, z });
        }
    }
    let max_z = rows.iter().fold(0.0f64, |m, r| m.max(r.z));
    if let Some(dir) = out {
        let lines = rows.iter().map(|r| format!("{},{},{},{},{},{}", r.t, r.observable, r.mean, r.std_error, r.exact, r.z));
        write_csv(dir, "oracle.csv", cfg, "oracle-check", None, "t,observable,trajectory_mean,std_error,exact,z", lines)?;
    }
    Ok(OracleReport { rows, max_z })
}

/// Writes a CSV preceded by a commented header with the config hash and a
/// timestamp, the only line that varies between reruns.
/// Writes `traj_{point}_{index}.qtrj` per trajectory when the config asks for it.
fn save_trajectories(cfg: &ExperimentConfig, out: Option<&Path>, point: usize, ensemble: &[TrajectoryRecord]) -> Result<()> {
    let (Some(dir), true) = (out, cfg.trajectory()?.save_trajectories) else {
        return Ok(());
    };
    std::fs::create_dir_all(dir)?;
    for (i, rec) in ensemble.iter().enumerate() {
        let w = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("traj_{point}_{i}.qtrj")))?);
        write_qtrj(&SnapshotFile::from(rec), w)?;
    }
    Ok(())
}

pub fn write_csv(
    dir: &Path,
    name: &str,
    cfg: &ExperimentConfig,
    command: &str,
    point: Option<SweepPoint>,
    header: &str,
    rows: impl IntoIterator<Item = String>,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let mut text = String::new();
    let _ = writeln!(text, "# trajdim {command}");
    let _ = writeln!(text, "# config_sha256 = {}", cfg.hash());
    if let Some(Some((param, v))) = point {
        let _ = writeln!(text, "# {} = {v}", param.name());
    }
    let _ = writeln!(text, "# generated_unix = {stamp}");
    let _ = writeln!(text, "{header}");
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    std::fs::write(dir.join(name), text)?;
    Ok(())
}
