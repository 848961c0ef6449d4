//! Large-spin limit of the dissipative top: a flow on the sphere of the
//! reduced magnetization `m = ⟨S⟩/S`, with kicks as exact rotations.

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Relative tolerance when checking that the kick period is a whole number of steps.
const PERIOD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalSpin<T> {
    pub m: [T; 3],
}

impl<T: Real> ClassicalSpin<T> {
    pub fn new(mx: T, my: T, mz: T) -> Self {
        Self { m: [mx, my, mz] }
    }

    /// Unit vector with height `z = m_z` and azimuth `phi`.
    pub fn from_cylindrical(z: T, phi: T) -> Self {
        let rho = (T::one() - z * z).max(T::zero()).sqrt();
        Self::new(rho * phi.cos(), rho * phi.sin(), z)
    }

    pub fn south_pole() -> Self {
        Self::new(T::zero(), T::zero(), -T::one())
    }

    pub fn norm_sqr(&self) -> T {
        self.m.iter().fold(T::zero(), |acc, &x| acc + x * x)
    }

    pub fn z(&self) -> T {
        self.m[2]
    }

    /// `atan2(m_y, m_x)`, or `None` on the z axis.
    pub fn phi(&self) -> Option<T> {
        let [x, y, _] = self.m;
        (x != T::zero() || y != T::zero()).then(|| y.atan2(x))
    }

    fn axpy(&self, h: T, d: &[T; 3]) -> Self {
        Self { m: [self.m[0] + h * d[0], self.m[1] + h * d[1], self.m[2] + h * d[2]] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalParams<T> {
    pub omega_z: T,
    pub g: T,
    pub omega_x: T,
    pub gamma: T,
    pub k: T,
    /// Kick period; required when `k ≠ 0`.
    pub tau: Option<T>,
}

impl<T: Real> ClassicalParams<T> {
    pub fn autonomous(omega_z: T, g: T, omega_x: T, gamma: T) -> Self {
        Self { omega_z, g, omega_x, gamma, k: T::zero(), tau: None }
    }

    pub fn kicked(self, k: T, tau: T) -> Self {
        Self { k, tau: Some(tau), ..self }
    }
}

/// Autonomous part of the equations of motion.
pub fn drift<T: Real>(s: &ClassicalSpin<T>, p: &ClassicalParams<T>) -> [T; 3] {
    let [x, y, z] = s.m;
    let two = T::lit(2.0);
    [
        -p.omega_z * y - two * p.g * y * z + two * p.gamma * x * z,
        p.omega_z * x + two * p.g * x * z - p.omega_x * z + two * p.gamma * y * z,
        p.omega_x * y - two * p.gamma * (x * x + y * y),
    ]
}

/// Rotation about the y axis by `2k m_y`, the exact integral of one kick.
pub fn kick_map<T: Real>(s: &ClassicalSpin<T>, k: T) -> ClassicalSpin<T> {
    let [x, y, z] = s.m;
    let (sin, cos) = (T::lit(2.0) * k * y).sin_cos();
    ClassicalSpin::new(x * cos + z * sin, y, z * cos - x * sin)
}

/// One classic fourth-order Runge–Kutta step of [`drift`].
pub fn rk4_step<T: Real>(s: &ClassicalSpin<T>, p: &ClassicalParams<T>, dt: T) -> ClassicalSpin<T> {
    let half = dt / T::lit(2.0);
    let k1 = drift(s, p);
    let k2 = drift(&s.axpy(half, &k1), p);
    let k3 = drift(&s.axpy(half, &k2), p);
    let k4 = drift(&s.axpy(dt, &k3), p);
    let sixth = dt / T::lit(6.0);
    let two = T::lit(2.0);
    let mut m = s.m;
    for i in 0..3 {
        m[i] = m[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
    }
    ClassicalSpin { m }
}

/// Sampled orbit `(t, m(t))`; states at kick times are recorded before the kick.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit<T> {
    pub points: Vec<(T, ClassicalSpin<T>)>,
}

impl<T: Real> Orbit<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> Option<&ClassicalSpin<T>> {
        self.points.last().map(|(_, s)| s)
    }

    /// Every `stride`-th point, always keeping the last one.
    pub fn thinned(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        let n = self.points.len();
        let points = self
            .points
            .iter()
            .enumerate()
            .filter(|(i, _)| i % stride == 0 || i + 1 == n)
            .map(|(_, p)| *p)
            .collect();
        Self { points }
    }

    /// Largest `| |m(t)|² − |m(0)|² |` along the orbit.
    pub fn max_norm_drift(&self) -> T {
        let Some((_, first)) = self.points.first() else { return T::zero() };
        let n0 = first.norm_sqr();
        self.points.iter().fold(T::zero(), |acc, (_, s)| acc.max((s.norm_sqr() - n0).abs()))
    }
}

/// Whole number of steps in `span`, or `None` if `span` is not a multiple of `dt`.
fn whole_steps<T: Real>(span: T, dt: T) -> Option<usize> {
    let ratio = (span / dt).to_f64_lossy();
    let n = ratio.round();
    ((ratio - n).abs() <= PERIOD_TOLERANCE * ratio.max(1.0)).then_some(n as usize)
}

/// RK4 integration of the drift over `[0, horizon]` with kicks at `t = nτ`
/// (including `t = 0`) applied before the step that starts there.
pub fn integrate_orbit<T: Real>(
    m0: ClassicalSpin<T>,
    params: &ClassicalParams<T>,
    dt: T,
    horizon: T,
) -> Result<Orbit<T>> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(invalid("dt must be positive and finite"));
    }
    if horizon < T::zero() || !horizon.is_finite() {
        return Err(invalid("horizon must be non-negative and finite"));
    }
    if m0.m.iter().any(|x| !x.is_finite()) {
        return Err(invalid("initial magnetization must be finite"));
    }
    let steps_per_kick = if params.k == T::zero() {
        None
    } else {
        let tau = params.tau.ok_or(Error::MissingKick)?;
        if !(tau > T::zero()) {
            return Err(invalid("kick period must be positive"));
        }
        let n = whole_steps(tau, dt)
            .filter(|&n| n > 0)
            .ok_or(Error::PeriodMismatch { period: tau.to_f64_lossy(), dt: dt.to_f64_lossy() })?;
        Some(n)
    };
    let steps = (horizon / dt).to_f64_lossy().round() as usize;
    let mut points = Vec::with_capacity(steps + 1);
    let mut s = m0;
    points.push((T::zero(), s));
    for i in 0..steps {
        if steps_per_kick.is_some_and(|n| i % n == 0) {
            s = kick_map(&s, params.k);
        }
        s = rk4_step(&s, params, dt);
        points.push((T::from_usize_lossy(i + 1) * dt, s));
    }
    Ok(Orbit { points })
}

/// One exported orbit sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitRow<T> {
    pub t: T,
    pub m: [T; 3],
    pub z: T,
    pub phi: T,
    /// `|m(t)|² − |m(0)|²`.
    pub norm_drift: T,
}

pub const ORBIT_CSV_HEADER: &str = "t,m_x,m_y,m_z,z,phi,norm_drift";

impl<T: Real> OrbitRow<T> {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:e}",
            self.t, self.m[0], self.m[1], self.m[2], self.z, self.phi, self.norm_drift
        )
    }
}

/// Cylindrical coordinates `z = m_z`, `φ = atan2(m_y, m_x)`. On the z axis
/// `φ` keeps its previous value (0 if the orbit starts there).
pub fn orbit_export<T: Real>(orbit: &Orbit<T>) -> Vec<OrbitRow<T>> {
    let n0 = orbit.points.first().map_or(T::zero(), |(_, s)| s.norm_sqr());
    let mut phi = T::zero();
    orbit
        .points
        .iter()
        .map(|(t, s)| {
            if let Some(p) = s.phi() {
                phi = p;
            }
            OrbitRow { t: *t, m: s.m, z: s.z(), phi, norm_drift: s.norm_sqr() - n0 }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn chaotic() -> ClassicalParams<f64> {
        ClassicalParams::autonomous(1.0, 5.0, 2.0, 0.2).kicked(0.2, 1.0)
    }

    fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn dist(a: &ClassicalSpin<f64>, b: &ClassicalSpin<f64>) -> f64 {
        a.m.iter().zip(&b.m).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    /// Forward Euler of the drift plus the kick terms spread over a window of width `eps`.
    fn regularized_kick(s: &ClassicalSpin<f64>, p: &ClassicalParams<f64>, eps: f64, n: usize) -> ClassicalSpin<f64> {
        let h = eps / n as f64;
        let a = 2.0 * p.k / eps;
        let mut m = s.m;
        for _ in 0..n {
            let d = drift(&ClassicalSpin { m }, p);
            let [x, y, z] = m;
            m = [x + h * (d[0] + a * y * z), y + h * d[1], z + h * (d[2] - a * x * y)];
        }
        ClassicalSpin { m }
    }

    #[test]
    fn south_pole_is_fixed_without_transverse_field() {
        let p = ClassicalParams { omega_x: 0.0, ..chaotic() };
        assert_eq!(drift(&ClassicalSpin::south_pole(), &p), [0.0; 3]);
        let orbit = integrate_orbit(ClassicalSpin::south_pole(), &p, 0.01, 5.0).unwrap();
        assert!(orbit.points.iter().all(|(_, s)| *s == ClassicalSpin::south_pole()));
        assert_eq!(drift(&ClassicalSpin::south_pole(), &chaotic()), [0.0, 2.0, 0.0]);
    }

    #[test]
    fn pure_precession_keeps_transverse_length() {
        let p = ClassicalParams::autonomous(1.7, 0.0, 0.0, 0.0);
        for s in [ClassicalSpin::new(0.3, -0.4, 0.2), ClassicalSpin::new(-0.9, 0.1, 0.4)] {
            let d = drift(&s, &p);
            let rate: f64 = 2.0 * (s.m[0] * d[0] + s.m[1] * d[1]);
            assert!(rate.abs() < 1e-15);
            assert_eq!(d[2], 0.0);
        }
    }

    #[test]
    fn kick_limits() {
        let s = ClassicalSpin::new(0.2, 0.5, -0.3);
        assert_eq!(kick_map(&s, 0.0), s);
        let x = ClassicalSpin::new(1.0, 0.0, 0.0);
        assert_eq!(kick_map(&x, 3.0), x);
    }

    #[test]
    fn kick_matches_regularized_delta() {
        let p = chaotic();
        let s = ClassicalSpin::new(0.48, 0.6, -0.64);
        let exact = kick_map(&s, p.k);
        let coarse = dist(&regularized_kick(&s, &p, 1e-3, 200_000), &exact);
        let fine = dist(&regularized_kick(&s, &p, 1e-4, 200_000), &exact);
        assert!((coarse / fine - 10.0).abs() < 1.5, "{coarse} {fine}");
        let tight = dist(&regularized_kick(&s, &p, 1e-8, 1_000_000), &exact);
        assert!(tight < 1e-6, "{tight}");
    }

    #[test]
    fn export_coordinates_and_poles() {
        let orbit = Orbit {
            points: vec![
                (0.0, ClassicalSpin::new(0.0, 0.0, 1.0)),
                (1.0, ClassicalSpin::new(1.0, 0.0, 0.0)),
                (2.0, ClassicalSpin::new(0.0, 1.0, 0.0)),
                (3.0, ClassicalSpin::new(0.0, 0.0, -1.0)),
            ],
        };
        let rows = orbit_export(&orbit);
        let zp: Vec<_> = rows.iter().map(|r| (r.z, r.phi)).collect();
        assert_eq!(zp, vec![(1.0, 0.0), (0.0, 0.0), (0.0, FRAC_PI_2), (-1.0, FRAC_PI_2)]);
        assert_eq!(rows[0].csv_line().split(',').count(), ORBIT_CSV_HEADER.split(',').count());
    }

    #[test]
    fn kicked_orbit_conserves_norm() {
        let s = ClassicalSpin::from_cylindrical(0.3, 1.1);
        let orbit = integrate_orbit(s, &chaotic(), 1e-3, 100.0).unwrap();
        assert_eq!(orbit.len(), 100_001);
        assert!(orbit.max_norm_drift() <= 1e-8, "{}", orbit.max_norm_drift());
    }

    #[test]
    fn rk4_global_order() {
        let p = ClassicalParams::autonomous(1.0, 5.0, 2.0, 0.2).kicked(0.2, 1.0);
        let s = ClassicalSpin::from_cylindrical(0.5, 0.7);
        let end = |dt: f64| *integrate_orbit(s, &p, dt, 10.0).unwrap().last().unwrap();
        let reference = end(0.004 / 16.0);
        let e1 = dist(&end(0.004), &reference);
        let e2 = dist(&end(0.002), &reference);
        let ratio = e1 / e2;
        assert!((13.0..19.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn kick_needs_whole_period() {
        let p = chaotic();
        let s = ClassicalSpin::new(0.0, 1.0, 0.0);
        assert!(matches!(integrate_orbit(s, &p, 0.3, 1.0), Err(Error::PeriodMismatch { .. })));
        let no_tau = ClassicalParams { tau: None, ..p };
        assert!(matches!(integrate_orbit(s, &no_tau, 0.1, 1.0), Err(Error::MissingKick)));
        assert!(integrate_orbit(s, &ClassicalParams { k: 0.0, ..no_tau }, 0.3, 1.0).is_ok());
    }

    #[test]
    fn single_precision_orbit() {
        let p = ClassicalParams::<f32>::autonomous(1.0, 5.0, 2.0, 0.2).kicked(0.2, 1.0);
        let orbit = integrate_orbit(ClassicalSpin::from_cylindrical(0.3f32, 1.1), &p, 0.01, 10.0).unwrap();
        assert!(orbit.max_norm_drift() < 1e-4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn drift_is_tangent(
            m in prop::array::uniform3(-2.0f64..2.0),
            c in prop::array::uniform4(-5.0f64..5.0),
        ) {
            let p = ClassicalParams::autonomous(c[0], c[1], c[2], c[3]);
            let s = ClassicalSpin { m };
            let d = drift(&s, &p);
            let scale = 1.0 + dot(&m, &m) * (1.0 + dot(&m, &m).sqrt()) * 20.0;
            prop_assert!(dot(&m, &d).abs() <= 1e-13 * scale);
        }

        #[test]
        fn opposite_kicks_cancel(m in prop::array::uniform3(-1.5f64..1.5), k in -10.0f64..10.0) {
            let s = ClassicalSpin { m };
            let back = kick_map(&kick_map(&s, k), -k);
            prop_assert!(dist(&back, &s) <= 1e-14 * (1.0 + s.norm_sqr().sqrt()));
            prop_assert!((kick_map(&s, k).norm_sqr() - s.norm_sqr()).abs() <= 1e-14);
        }
    }
}
