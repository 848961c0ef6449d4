//! Quantum-jump unraveling with a fixed step and first-order Bernoulli
//! jump selection, plus the `QTRJ` snapshot file format.

use crate::error::{invalid, Error, Result};
use crate::hilbert::{self, PureState};
use crate::lindblad::{effective_hamiltonian, kick_unitary, LindbladModel};
use crate::linalg::{self, expm, ComplexMatrix, SparseOp, ZERO};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::{Read, Write};

/// Largest total jump probability accepted in one step.
pub const MAX_STEP_PROBABILITY: f64 = 0.1;
/// Total jump probability per step targeted by [`default_dt`].
pub const TARGET_STEP_PROBABILITY: f64 = 0.02;
pub const DEFAULT_DT: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    pub dt: f64,
    pub horizon: f64,
    pub snapshot_stride: usize,
    pub seed: u64,
    pub trajectory_index: u64,
}

impl TrajectoryConfig {
    pub fn new(dt: f64, horizon: f64, snapshot_stride: usize, seed: u64) -> Result<Self> {
        let c = Self { dt, horizon, snapshot_stride, seed, trajectory_index: 0 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        // A zero horizon is allowed and yields the initial snapshot only.
        if !(self.horizon >= 0.0) || (self.horizon > 0.0 && self.horizon < self.dt * (1.0 - 1e-9)) {
            return Err(invalid(format!("horizon {} shorter than dt {}", self.horizon, self.dt)));
        }
        if self.snapshot_stride == 0 {
            return Err(invalid("snapshot stride must be at least 1"));
        }
        Ok(())
    }

    pub fn with_index(self, trajectory_index: u64) -> Self {
        Self { trajectory_index, ..self }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    /// Time between snapshots.
    pub fn snapshot_interval(&self) -> f64 {
        self.dt * self.snapshot_stride as f64
    }

    /// Generator for one trajectory: the seed picks the key, the index the stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.trajectory_index);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub channel: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub snapshots: Vec<(f64, PureState)>,
    pub jumps: Vec<JumpEvent>,
    pub config: TrajectoryConfig,
}

impl TrajectoryRecord {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.snapshots.iter().map(|(t, _)| *t)
    }

    /// Snapshot whose time is within half a step of `t`.
    pub fn snapshot_at(&self, t: f64) -> Option<&PureState> {
        let tol = 0.5 * self.config.dt;
        let idx = self.snapshots.partition_point(|(s, _)| *s < t - tol);
        self.snapshots.get(idx).filter(|(s, _)| (s - t).abs() <= tol).map(|(_, psi)| psi)
    }

    pub fn final_state(&self) -> &PureState {
        &self.snapshots.last().expect("records hold at least the initial snapshot").1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpProbabilities {
    pub channels: Vec<f64>,
    pub no_jump: f64,
}

impl JumpProbabilities {
    pub fn total(&self) -> f64 {
        self.channels.iter().sum()
    }
}

/// `p_α = dt ⟨ψ|L_α†L_α|ψ⟩` and `p₀ = 1 − Σ p_α`.
pub fn jump_probabilities(psi: &PureState, model: &LindbladModel, dt: f64) -> Result<JumpProbabilities> {
    check_dim(psi, model.dim())?;
    let channels: Vec<f64> = model
        .jumps()
        .iter()
        .map(|l| dt * hilbert::norm(&linalg::matvec(l, psi.amplitudes())).powi(2))
        .collect();
    finish_probabilities(channels, dt)
}

fn finish_probabilities(channels: Vec<f64>, dt: f64) -> Result<JumpProbabilities> {
    let total: f64 = channels.iter().sum();
    if total > MAX_STEP_PROBABILITY {
        return Err(Error::StepTooCoarse { total, dt });
    }
    Ok(JumpProbabilities { channels, no_jump: 1.0 - total })
}

fn check_dim(psi: &PureState, dim: usize) -> Result<()> {
    if psi.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: psi.dim() });
    }
    Ok(())
}

/// Model prepared for stepping at a fixed `dt`: sparse jumps and the cached
/// no-jump propagator `e^{−i dt H_eff}`.
#[derive(Debug, Clone)]
pub struct JumpIntegrator {
    dt: f64,
    jumps: Vec<SparseOp>,
    no_jump: SparseOp,
    kick: Option<(usize, SparseOp)>,
    check_step: bool,
}

impl JumpIntegrator {
    pub fn new(model: &LindbladModel, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(invalid(format!("dt must be positive, got {dt}")));
        }
        let heff = effective_hamiltonian(model);
        let no_jump = SparseOp::from_dense(&expm(&linalg::scale(C64::new(0.0, -dt), &heff)));
        let jumps = model.jumps().iter().map(SparseOp::from_dense).collect();
        let kick = match model.kick() {
            Some(k) => {
                let n = (k.period / dt).round();
                if n < 1.0 || (n * dt - k.period).abs() > 1e-9 * k.period {
                    return Err(Error::PeriodMismatch { period: k.period, dt });
                }
                Some((n as usize, SparseOp::from_dense(&kick_unitary(k))))
            }
            None => None,
        };
        Ok(Self { dt, jumps, no_jump, kick, check_step: true })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.no_jump.dim()
    }

    pub fn channels(&self) -> usize {
        self.jumps.len()
    }

    pub fn jump_probabilities(&self, psi: &[C64]) -> Result<JumpProbabilities> {
        let channels: Vec<f64> = self.jumps.iter().map(|l| self.dt * l.image_norm_sqr(psi)).collect();
        if self.check_step {
            finish_probabilities(channels, self.dt)
        } else {
            let total = channels.iter().sum::<f64>();
            Ok(JumpProbabilities { channels, no_jump: 1.0 - total })
        }
    }

    /// One step driven by the uniform variate `u ∈ [0, 1)`. The state is
    /// updated in place with `scratch` as workspace; returns the channel
    /// that fired, if any.
    pub fn step_with(&self, psi: &mut Vec<C64>, scratch: &mut Vec<C64>, u: f64) -> Result<Option<usize>> {
        let p = self.jump_probabilities(psi)?;
        let mut acc = 0.0;
        let mut fired = None;
        for (alpha, &pa) in p.channels.iter().enumerate() {
            acc += pa;
            if u < acc {
                fired = Some(alpha);
                break;
            }
        }
        match fired {
            Some(alpha) => self.jumps[alpha].apply_into(psi, scratch),
            None => self.no_jump.apply_into(psi, scratch),
        }
        std::mem::swap(psi, scratch);
        normalize(psi)?;
        Ok(fired)
    }

    fn apply_kick(&self, psi: &mut Vec<C64>, scratch: &mut Vec<C64>) -> Result<()> {
        if let Some((_, u)) = &self.kick {
            u.apply_into(psi, scratch);
            std::mem::swap(psi, scratch);
            normalize(psi)?;
        }
        Ok(())
    }

    pub fn simulate(&self, psi0: &PureState, config: &TrajectoryConfig) -> Result<TrajectoryRecord> {
        self.run(psi0, config, |_| {})
    }

    /// Steps a trajectory, calling `observe` on the state before each step.
    fn run(
        &self,
        psi0: &PureState,
        config: &TrajectoryConfig,
        mut observe: impl FnMut(&[C64]),
    ) -> Result<TrajectoryRecord> {
        config.validate()?;
        check_dim(psi0, self.dim())?;
        if (config.dt - self.dt).abs() > 1e-15 * self.dt {
            return Err(invalid(format!("integrator built for dt = {}, config has {}", self.dt, config.dt)));
        }
        let mut rng = config.rng();
        let steps = config.steps();
        let mut psi = psi0.amplitudes().to_vec();
        let mut scratch = vec![ZERO; psi.len()];
        let mut snapshots = Vec::with_capacity(steps / config.snapshot_stride + 1);
        let mut jumps = Vec::new();
        for n in 0..=steps {
            let t = n as f64 * self.dt;
            if n % config.snapshot_stride == 0 {
                snapshots.push((t, PureState::from_normalized(psi.clone())));
            }
            if n == steps {
                break;
            }
            observe(&psi);
            if let Some((period_steps, _)) = &self.kick {
                if n % period_steps == 0 {
                    self.apply_kick(&mut psi, &mut scratch)?;
                }
            }
            let u: f64 = rng.random();
            if let Some(channel) = self.step_with(&mut psi, &mut scratch, u)? {
                jumps.push(JumpEvent { time: (n + 1) as f64 * self.dt, channel });
            }
        }
        Ok(TrajectoryRecord { snapshots, jumps, config: *config })
    }

    pub fn simulate_ensemble(&self, psi0: &PureState, config: &TrajectoryConfig, indices: std::ops::Range<u64>) -> Result<Vec<TrajectoryRecord>> {
        indices
            .into_par_iter()
            .map(|i| self.simulate(psi0, &config.with_index(i)))
            .collect()
    }
}

fn normalize(psi: &mut [C64]) -> Result<()> {
    let n = hilbert::norm(psi);
    if !(n > 0.0) || !n.is_finite() {
        return Err(invalid("state collapsed to zero norm"));
    }
    let inv = 1.0 / n;
    psi.iter_mut().for_each(|a| *a *= inv);
    Ok(())
}

/// Single step of the unraveling. Builds the no-jump propagator on every
/// call; use [`JumpIntegrator`] in loops.
pub fn step<R: Rng + ?Sized>(
    psi: &PureState,
    model: &LindbladModel,
    dt: f64,
    rng: &mut R,
) -> Result<(PureState, Option<usize>)> {
    check_dim(psi, model.dim())?;
    let integ = JumpIntegrator::new(&model.without_kick(), dt)?;
    let mut v = psi.amplitudes().to_vec();
    let mut scratch = vec![ZERO; v.len()];
    let fired = integ.step_with(&mut v, &mut scratch, rng.random())?;
    Ok((PureState::from_normalized(v), fired))
}

pub fn simulate_trajectory(psi0: &PureState, model: &LindbladModel, config: &TrajectoryConfig) -> Result<TrajectoryRecord> {
    JumpIntegrator::new(model, config.dt)?.simulate(psi0, config)
}

/// `n` trajectories with indices `0..n`.
pub fn simulate_ensemble(
    psi0: &PureState,
    model: &LindbladModel,
    config: &TrajectoryConfig,
    n: usize,
) -> Result<Vec<TrajectoryRecord>> {
    if n == 0 {
        return Err(invalid("ensemble needs at least one trajectory"));
    }
    JumpIntegrator::new(model, config.dt)?.simulate_ensemble(psi0, config, 0..n as u64)
}

/// `⟨ψ|O|ψ⟩` for Hermitian `O`.
pub fn expectation(psi: &PureState, op: &ComplexMatrix) -> Result<f64> {
    check_dim(psi, op.nrows())?;
    let defect = linalg::hermiticity_defect(op);
    if defect > 1e-10 * linalg::max_abs(op).max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(expectation_unchecked(psi.amplitudes(), op))
}

fn expectation_unchecked(psi: &[C64], op: &ComplexMatrix) -> f64 {
    let o = linalg::matvec(op, psi);
    psi.iter().zip(&o).map(|(a, b)| a.conj() * b).sum::<C64>().re
}

/// Per-snapshot `(⟨Q⟩, ⟨Q²⟩ − ⟨Q⟩²)`.
pub fn freezing_monitor(record: &TrajectoryRecord, q: &ComplexMatrix) -> Result<Vec<(f64, f64)>> {
    let q2 = q * q;
    record
        .snapshots
        .iter()
        .map(|(_, psi)| {
            let m = expectation(psi, q)?;
            let m2 = expectation_unchecked(psi.amplitudes(), &q2);
            Ok((m, (m2 - m * m).max(0.0)))
        })
        .collect()
}

/// Largest step compatible with the kick period that is `≤ target`.
pub fn period_compatible_dt(model: &LindbladModel, target: f64) -> f64 {
    match model.kick() {
        Some(k) => k.period / (k.period / target).ceil(),
        None => target,
    }
}

/// Step size such that a pilot trajectory never exceeds a total jump
/// probability of [`TARGET_STEP_PROBABILITY`] per step, capped at
/// [`DEFAULT_DT`].
pub fn default_dt(model: &LindbladModel, psi0: &PureState, horizon: f64, seed: u64) -> Result<f64> {
    let pilot_horizon = horizon.clamp(0.0, 10.0);
    let mut dt = period_compatible_dt(model, DEFAULT_DT);
    for _ in 0..8 {
        let mut integ = JumpIntegrator::new(model, dt)?;
        integ.check_step = false;
        if pilot_horizon < dt {
            break;
        }
        let config = TrajectoryConfig { dt, horizon: pilot_horizon, snapshot_stride: usize::MAX, seed, trajectory_index: u64::MAX };
        let mut max_rate = 0.0f64;
        integ.run(psi0, &config, |psi| {
            let rate: f64 = integ.jumps.iter().map(|l| l.image_norm_sqr(psi)).sum();
            max_rate = max_rate.max(rate);
        })?;
        if max_rate <= 0.0 {
            break;
        }
        let wanted = period_compatible_dt(model, DEFAULT_DT.min(TARGET_STEP_PROBABILITY / max_rate));
        if wanted >= dt * (1.0 - 1e-12) {
            break;
        }
        dt = wanted;
    }
    Ok(dt)
}

pub const QTRJ_MAGIC: &[u8; 4] = b"QTRJ";
pub const QTRJ_VERSION: u32 = 1;

/// Contents of a `QTRJ` file.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFile {
    pub dim: usize,
    pub snapshots: Vec<(f64, Vec<C64>)>,
    pub jumps: Vec<JumpEvent>,
}

impl From<&TrajectoryRecord> for SnapshotFile {
    fn from(r: &TrajectoryRecord) -> Self {
        Self {
            dim: r.snapshots.first().map_or(0, |(_, p)| p.dim()),
            snapshots: r.snapshots.iter().map(|(t, p)| (*t, p.amplitudes().to_vec())).collect(),
            jumps: r.jumps.clone(),
        }
    }
}

fn to_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Format(format!("{what} {v} does not fit in u32")))
}

pub fn write_qtrj<W: Write>(file: &SnapshotFile, mut w: W) -> Result<()> {
    w.write_all(QTRJ_MAGIC)?;
    w.write_all(&QTRJ_VERSION.to_le_bytes())?;
    w.write_all(&to_u32(file.dim, "dimension")?.to_le_bytes())?;
    w.write_all(&to_u32(file.snapshots.len(), "snapshot count")?.to_le_bytes())?;
    for (t, amps) in &file.snapshots {
        if amps.len() != file.dim {
            return Err(Error::DimensionMismatch { expected: file.dim, found: amps.len() });
        }
        w.write_all(&t.to_le_bytes())?;
        for a in amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
    }
    w.write_all(&to_u32(file.jumps.len(), "jump count")?.to_le_bytes())?;
    for j in &file.jumps {
        w.write_all(&j.time.to_le_bytes())?;
        w.write_all(&to_u32(j.channel, "channel")?.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_qtrj<R: Read>(mut r: R) -> Result<SnapshotFile> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != QTRJ_MAGIC {
        return Err(Error::Format("not a QTRJ file".into()));
    }
    let version = read_u32(&mut r)?;
    if version != QTRJ_VERSION {
        return Err(Error::Format(format!("unsupported QTRJ version {version}")));
    }
    let dim = read_u32(&mut r)? as usize;
    let count = read_u32(&mut r)? as usize;
    let mut snapshots = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let t = read_f64(&mut r)?;
        let mut amps = Vec::with_capacity(dim);
        for _ in 0..dim {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            amps.push(C64::new(re, im));
        }
        snapshots.push((t, amps));
    }
    let njumps = read_u32(&mut r)? as usize;
    let mut jumps = Vec::with_capacity(njumps.min(1 << 20));
    for _ in 0..njumps {
        let time = read_f64(&mut r)?;
        let channel = read_u32(&mut r)? as usize;
        jumps.push(JumpEvent { time, channel });
    }
    Ok(SnapshotFile { dim, snapshots, jumps })
}
