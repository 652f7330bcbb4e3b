//! Classical mean-field amplitudes `alpha(t)`, `beta(t)` and the coefficients
//! they induce on the fluctuations: `Delta'(t)`, `G(t) = g0 alpha(t)` and the
//! cavity phase integral `U(t) = int_0^t [i Delta' + kappa/2]`.

use crate::error::{Error, Result};
use crate::etd::EtdStep;
use crate::model::{Schedule, SystemParams, TimeGrid};
use crate::scalar::{cplx, i_unit, Cplx, Real};

/// Guard on `|alpha|`, `|beta|`.
pub const CLASSICAL_DIVERGENCE: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DriveModel {
    /// `Delta' = omega_m` imposed exactly (red-sideband lock).
    #[default]
    Locked,
    /// `Delta'(t) = Delta_c - g0 (beta + beta*)` from the mean-field equations.
    SelfConsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassicalOptions {
    pub drive: DriveModel,
    /// Freeze `G` at the real steady value `g0 |alpha_ss|`.
    pub constant_g: bool,
}

/// Reservoir seen by the classical mechanical amplitude.
#[derive(Debug, Clone, Copy)]
pub enum MeanFieldBath<'a, T> {
    None,
    /// `Im f` on the grid lags (`f` is purely imaginary).
    Memory(&'a [T]),
    /// Markovian local damping `-(gamma/2) beta`.
    Local {
        gamma: T,
    },
}

/// `U(t_n)` on the grid; `u(t1 - t2) = -(U(t1) - U(t2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseIntegral<T> {
    pub grid: TimeGrid<T>,
    pub u: Vec<Cplx<T>>,
}

impl<T: Real> PhaseIntegral<T> {
    /// `exp(-(U_b - U_a))` for grid indices `a <= b`.
    pub fn propagator(&self, a: usize, b: usize) -> Cplx<T> {
        (self.u[a] - self.u[b]).exp()
    }
}

/// Mean-field trajectory sampled on the grid.
#[derive(Debug, Clone)]
pub struct ClassicalTrajectory<T> {
    pub grid: TimeGrid<T>,
    pub alpha: Vec<Cplx<T>>,
    pub beta: Vec<Cplx<T>>,
    pub delta_eff: Vec<T>,
    pub g: Vec<Cplx<T>>,
    /// `kappa` in force on each step `[t_n, t_{n+1})`.
    pub kappa: Vec<T>,
    pub options: ClassicalOptions,
    // one-sided derivatives at both ends of every step, for Hermite interpolation
    g_slope: Vec<(Cplx<T>, Cplx<T>)>,
    delta_slope: Vec<(T, T)>,
}

impl<T: Real> ClassicalTrajectory<T> {
    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    /// True when `G` is the same at every grid point.
    pub fn is_constant_coupling(&self) -> bool {
        let g0 = self.g[0];
        self.g.iter().all(|&g| g == g0) && self.delta_eff.iter().all(|&d| d == self.delta_eff[0])
    }

    /// `(G(t), Delta'(t))` between grid points by cubic Hermite interpolation.
    pub fn coupling_at(&self, t: T) -> (Cplx<T>, T) {
        let h = self.grid.dt;
        let steps = self.len() - 1;
        if steps == 0 {
            return (self.g[0], self.delta_eff[0]);
        }
        let x = (t / h).max(T::zero());
        let n = x.floor().to_usize().unwrap_or(0).min(steps - 1);
        let s = x - T::from_usize_lossy(n);
        let (h00, h10, h01, h11) = hermite_basis(s);
        let (d0, d1) = self.g_slope[n];
        let g = self.g[n] * h00 + d0 * (h10 * h) + self.g[n + 1] * h01 + d1 * (h11 * h);
        let (e0, e1) = self.delta_slope[n];
        let d = self.delta_eff[n] * h00 + e0 * h10 * h + self.delta_eff[n + 1] * h01 + e1 * h11 * h;
        (g, d)
    }

    /// Rows `(t, Re alpha, Im alpha, Re beta, Im beta, Delta', |G|)`.
    pub fn rows(&self) -> impl Iterator<Item = [T; 7]> + '_ {
        (0..self.len()).map(move |i| {
            [
                self.grid.t(i),
                self.alpha[i].re,
                self.alpha[i].im,
                self.beta[i].re,
                self.beta[i].im,
                self.delta_eff[i],
                self.g[i].norm(),
            ]
        })
    }
}

fn hermite_basis<T: Real>(s: T) -> (T, T, T, T) {
    let (two, three) = (T::lit(2.0), T::lit(3.0));
    let s2 = s * s;
    let s3 = s2 * s;
    (two * s3 - three * s2 + T::one(), s3 - two * s2 + s, -two * s3 + three * s2, s3 - s2)
}

/// `U` under the sideband lock: `i omega_m t + (1/2) int_0^t kappa`, exact
/// for a piecewise-constant `kappa`.
pub fn sideband_lock<T: Real>(
    params: &SystemParams<T>,
    grid: &TimeGrid<T>,
    schedule: &Schedule<T>,
) -> PhaseIntegral<T> {
    let half = T::lit(0.5);
    let u = grid.times().map(|t| cplx(schedule.kappa_integral(params.kappa, t) * half, params.omega_m * t)).collect();
    PhaseIntegral { grid: *grid, u }
}

fn guard<T: Real>(name: &'static str, t: T, z: Cplx<T>) -> Result<()> {
    let v = z.norm();
    if v.is_finite() && v <= T::lit(CLASSICAL_DIVERGENCE) {
        Ok(())
    } else {
        Err(Error::Divergence { guard: name, t: t.to_f64_lossy(), value: v.to_f64_lossy() })
    }
}

/// Integrates the mean-field equations
///
/// ```text
/// alpha' = -(i Delta' + kappa/2) alpha + E
/// beta'  = -i omega_m beta + i g0 |alpha|^2 + int_0^t f(t - tau) [beta + beta*](tau) dtau
/// ```
///
/// with exponential integrators: the linear rotation/decay is exact and the
/// remaining forcing is trapezoidal, corrected once at the new point. The
/// memory integral uses trapezoidal weights on the stored history; `f(0) = 0`
/// keeps it explicit. `kappa` and `E` follow `schedule` (sampled at step
/// midpoints, so switches should sit on grid points).
pub fn evolve_classical<T: Real>(
    params: &SystemParams<T>,
    bath: MeanFieldBath<'_, T>,
    grid: &TimeGrid<T>,
    schedule: &Schedule<T>,
    options: ClassicalOptions,
) -> Result<(ClassicalTrajectory<T>, PhaseIntegral<T>)> {
    grid.check()?;
    schedule.check()?;
    if let MeanFieldBath::Memory(f) = bath {
        if f.len() < grid.len() {
            return Err(Error::GridMismatch(format!("memory table has {} lags, grid needs {}", f.len(), grid.len())));
        }
    }
    let n = grid.len();
    let h = grid.dt;
    let half = T::lit(0.5);
    let iu = i_unit::<T>();
    let locked = options.drive == DriveModel::Locked;
    let detuning = |beta: Cplx<T>| {
        if locked {
            params.omega_m
        } else {
            params.delta_c - params.g0 * (beta.re + beta.re)
        }
    };

    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    let mut delta = Vec::with_capacity(n);
    let mut kappa = Vec::with_capacity(n.saturating_sub(1));
    alpha.push(params.alpha0);
    beta.push(params.beta0);
    delta.push(detuning(params.beta0));
    guard("alpha", T::zero(), params.alpha0)?;
    guard("beta", T::zero(), params.beta0)?;

    // history x_j = beta_j + beta_j^* = 2 Re beta_j
    let mut x: Vec<T> = Vec::with_capacity(n);
    x.push(params.beta0.re + params.beta0.re);
    let memory_at = |m: usize, x: &[T]| -> T {
        // int_0^{t_m} f(t_m - tau) x(tau): Im part of f times x, trapezoid, f(0) = 0.
        match bath {
            MeanFieldBath::Memory(f) if m > 0 => {
                let mut acc = half * f[m] * x[0];
                for j in 1..m {
                    acc += f[m - j] * x[j];
                }
                acc * h
            }
            _ => T::zero(),
        }
    };
    let local = match bath {
        MeanFieldBath::Local { gamma } => gamma * half,
        _ => T::zero(),
    };
    let beta_lambda = cplx(local, params.omega_m);
    let beta_step = EtdStep::new(beta_lambda, h);
    let forcing = |a: Cplx<T>, mem: T| iu * (params.g0 * a.norm_sqr()) + iu * mem;

    let mut mem_n = T::zero();
    for step in 0..n - 1 {
        let t0 = grid.t(step);
        let t1 = grid.t(step + 1);
        let mid = t0 + h * half;
        let (kap, e) = schedule.value_at(params, mid);
        kappa.push(kap);
        let e = cplx(e, T::zero());
        let (a0, b0, d0) = (alpha[step], beta[step], delta[step]);
        let mem_1 = memory_at(step + 1, &x);
        let n0 = forcing(a0, mem_n);

        let advance_alpha = |d1: T| {
            let lam = cplx(kap * half, (d0 + d1) * half);
            EtdStep::new(lam, h).constant_weight() * e + (-lam * h).exp() * a0
        };

        let (a1, b1, d1) = if locked {
            let a1 = advance_alpha(d0);
            let b1 = beta_step.apply(b0, n0, forcing(a1, mem_1));
            (a1, b1, d0)
        } else {
            // predictor with the frozen forcing, then one trapezoidal correction
            let bp = beta_step.apply(b0, n0, n0);
            let dp = detuning(bp);
            let ap = advance_alpha(dp);
            let bc = beta_step.apply(b0, n0, forcing(ap, mem_1));
            let dc = detuning(bc);
            let ac = advance_alpha(dc);
            let b1 = beta_step.apply(b0, n0, forcing(ac, mem_1));
            (ac, b1, detuning(b1))
        };
        guard("alpha", t1, a1)?;
        guard("beta", t1, b1)?;
        alpha.push(a1);
        beta.push(b1);
        delta.push(d1);
        x.push(b1.re + b1.re);
        mem_n = mem_1;
    }

    // slopes per step, with that step's kappa and E
    let beta_dot = |k: usize, mem: T| -beta_lambda * beta[k] + forcing(alpha[k], mem);
    let mut g_slope = Vec::with_capacity(n.saturating_sub(1));
    let mut delta_slope = Vec::with_capacity(n.saturating_sub(1));
    let mut mem_prev = T::zero();
    for step in 0..n.saturating_sub(1) {
        let (kap, e) = schedule.value_at(params, grid.t(step) + h * half);
        let alpha_dot = |k: usize| -cplx(kap * half, delta[k]) * alpha[k] + cplx(e, T::zero());
        let mem_next = memory_at(step + 1, &x);
        g_slope.push((alpha_dot(step) * params.g0, alpha_dot(step + 1) * params.g0));
        if locked {
            delta_slope.push((T::zero(), T::zero()));
        } else {
            let s = |bd: Cplx<T>| -params.g0 * (bd.re + bd.re);
            delta_slope.push((s(beta_dot(step, mem_prev)), s(beta_dot(step + 1, mem_next))));
        }
        mem_prev = mem_next;
    }

    let (g, g_slope) = if options.constant_g {
        let det = if locked { params.omega_m } else { params.delta_c };
        let gc = cplx(params.g0 * params.steady_alpha(det).norm(), T::zero());
        let z = cplx(T::zero(), T::zero());
        (vec![gc; n], vec![(z, z); n.saturating_sub(1)])
    } else {
        (alpha.iter().map(|&a| a * params.g0).collect(), g_slope)
    };

    let phase = if locked {
        sideband_lock(params, grid, schedule)
    } else {
        let mut u = Vec::with_capacity(n);
        let mut im = T::zero();
        u.push(cplx(T::zero(), T::zero()));
        for k in 1..n {
            im += (delta[k - 1] + delta[k]) * half * h;
            u.push(cplx(schedule.kappa_integral(params.kappa, grid.t(k)) * half, im));
        }
        PhaseIntegral { grid: *grid, u }
    };

    let traj =
        ClassicalTrajectory { grid: *grid, alpha, beta, delta_eff: delta, g, kappa, options, g_slope, delta_slope };
    Ok((traj, phase))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bare(e: f64, g0: f64) -> SystemParams<f64> {
        SystemParams { drive_e: e, g0, ..SystemParams::cooling_reference() }
    }

    fn closed_alpha(p: &SystemParams<f64>, det: f64, t: f64) -> Cplx<f64> {
        let lam = cplx(p.kappa / 2.0, det);
        let ss = cplx(p.drive_e, 0.0) / lam;
        ss + (p.alpha0 - ss) * (-lam * t).exp()
    }

    #[test]
    fn free_cavity_decay() {
        let p = bare(0.0, 0.0);
        let grid = TimeGrid::new(0.05, 200);
        let (tr, _) =
            evolve_classical(&p, MeanFieldBath::None, &grid, &Schedule::constant(), ClassicalOptions::default())
                .unwrap();
        let want = 100.0 * (-0.025f64 * 10.0).exp();
        assert!((tr.alpha[200].norm() / want - 1.0).abs() < 1e-6);
    }

    #[test]
    fn driven_cavity_matches_closed_form() {
        let p = bare(300.0, 0.0);
        let grid = TimeGrid::new(0.1, 1000);
        for drive in [DriveModel::Locked, DriveModel::SelfConsistent] {
            let opts = ClassicalOptions { drive, constant_g: false };
            let (tr, _) = evolve_classical(&p, MeanFieldBath::None, &grid, &Schedule::constant(), opts).unwrap();
            for i in (0..=1000).step_by(50) {
                let c = closed_alpha(&p, 1.0, grid.t(i));
                assert!((tr.alpha[i] - c).norm() / c.norm() < 1e-6, "{drive:?} at {i}");
            }
        }
        let ss = p.steady_alpha(1.0).norm();
        assert!((ss - 299.906).abs() < 1e-3);
    }

    #[test]
    fn free_mechanical_rotation() {
        let p = SystemParams { beta0: cplx(3.0, 4.0), ..bare(0.0, 0.0) };
        let grid = TimeGrid::new(0.1, 500);
        let opts = ClassicalOptions { drive: DriveModel::SelfConsistent, constant_g: false };
        let (tr, _) = evolve_classical(&p, MeanFieldBath::None, &grid, &Schedule::constant(), opts).unwrap();
        for i in [0, 7, 500] {
            let want = p.beta0 * cplx(0.0, -grid.t(i)).exp();
            assert!((tr.beta[i] - want).norm() < 1e-10);
        }
    }

    #[test]
    fn coupling_is_g0_alpha_and_interpolates() {
        let p = SystemParams::<f64>::cooling_reference();
        let grid = TimeGrid::new(0.05, 400);
        let (tr, _) =
            evolve_classical(&p, MeanFieldBath::None, &grid, &Schedule::constant(), ClassicalOptions::default())
                .unwrap();
        for i in 0..tr.len() {
            assert_eq!(tr.g[i], tr.alpha[i] * p.g0);
        }
        for t in [0.0125, 3.33, 19.97] {
            let (g, d) = tr.coupling_at(t);
            let want = closed_alpha(&p, 1.0, t) * p.g0;
            assert!((g - want).norm() < 1e-7 * want.norm(), "t = {t}");
            assert_eq!(d, 1.0);
        }
    }

    #[test]
    fn constant_coupling_toggle() {
        let p = SystemParams::<f64>::cooling_reference();
        let grid = TimeGrid::new(0.1, 10);
        let opts = ClassicalOptions { drive: DriveModel::Locked, constant_g: true };
        let (tr, _) = evolve_classical(&p, MeanFieldBath::None, &grid, &Schedule::constant(), opts).unwrap();
        assert!(tr.is_constant_coupling());
        assert!((tr.g[3].re - 5e-5 * 299.906).abs() < 1e-6 && tr.g[3].im == 0.0);
        assert_eq!(tr.coupling_at(0.55).0, tr.g[0]);
    }

    #[test]
    fn lock_phase_values() {
        let p = SystemParams::<f64>::cooling_reference();
        let grid = TimeGrid::new(0.1, 2000);
        let u = sideband_lock(&p, &grid, &Schedule::constant());
        assert_eq!(u.u[0], cplx(0.0, 0.0));
        assert!((u.u[100] - cplx(0.25, 10.0)).norm() < 1e-12);
        let q = sideband_lock(&p, &grid, &Schedule::kappa_switch(133.6, 10.0));
        assert!((q.u[2000].re - (0.025 * 133.6 + 5.0 * 66.4)).abs() < 1e-9);
        assert!(q.u.windows(2).all(|w| w[1].re >= w[0].re));
    }

    #[test]
    fn self_consistent_phase_tracks_detuning() {
        let p = SystemParams { g0: 1e-3, ..SystemParams::<f64>::cooling_reference() };
        let grid = TimeGrid::new(0.02, 500);
        let opts = ClassicalOptions { drive: DriveModel::SelfConsistent, constant_g: false };
        let (tr, u) = evolve_classical(&p, MeanFieldBath::None, &grid, &Schedule::constant(), opts).unwrap();
        let direct: f64 = (1..=500).map(|k| 0.5 * 0.02 * (tr.delta_eff[k - 1] + tr.delta_eff[k])).sum();
        assert!((u.u[500].im - direct).abs() < 1e-12);
        assert!(tr.delta_eff.iter().any(|&d| (d - 1.0).abs() > 1e-3));
    }

    fn memory_run(dt: f64, t_end: f64) -> ClassicalTrajectory<f64> {
        use crate::quadrature::QuadratureRule;
        use crate::spectral::{KernelTables, QuadOptions, SpectralModel};
        let model = SpectralModel::OhmicFamily { eta: 1e-2, s: 0.5, omega0: 5.0 };
        let p = SystemParams { g0: 2e-4, drive_e: 30.0, ..SystemParams::cooling_reference() };
        let grid = TimeGrid::with_end(dt, t_end).unwrap();
        let q = QuadratureRule::for_model(&model, 1.0, t_end, &QuadOptions::default()).unwrap();
        let tab = KernelTables::build(&model, &q, p.temperature_ratio, 1.0, &grid).unwrap();
        let f = tab.f_imag();
        let opts = ClassicalOptions { drive: DriveModel::SelfConsistent, constant_g: false };
        evolve_classical(&p, MeanFieldBath::Memory(&f), &grid, &Schedule::constant(), opts).unwrap().0
    }

    #[test]
    fn second_order_with_memory() {
        let t_end = 10.0;
        let reference = memory_run(0.025, t_end);
        let err = |dt: f64| {
            let r = memory_run(dt, t_end);
            let (a, b) = (r.alpha.last().unwrap(), r.beta.last().unwrap());
            (a - reference.alpha.last().unwrap()).norm() + (b - reference.beta.last().unwrap()).norm()
        };
        let (e1, e2) = (err(0.2), err(0.1));
        assert!(e1 / e2 >= 3.5, "ratio {} ({e1:e}, {e2:e})", e1 / e2);
    }

    #[test]
    fn divergence_is_reported() {
        let p = SystemParams { drive_e: 1e12, ..bare(0.0, 0.0) };
        let grid = TimeGrid::new(0.1, 100);
        let r = evolve_classical(&p, MeanFieldBath::None, &grid, &Schedule::constant(), ClassicalOptions::default());
        assert!(matches!(r, Err(Error::Divergence { guard: "alpha", .. })));
    }
}
