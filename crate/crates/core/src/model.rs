//! Parameter, grid and schedule types.
//!
//! All frequencies and rates are expressed in units of the mechanical
//! frequency `omega_m`, times in `1/omega_m`, and `hbar = 1`.

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Physical parameters of the linearized optomechanical system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams<T> {
    /// Mechanical frequency; the unit scale (1 by convention).
    pub omega_m: T,
    /// Bare cavity detuning `omega_c - omega_d`.
    pub delta_c: T,
    /// Cavity energy decay rate.
    pub kappa: T,
    /// Single-photon optomechanical coupling.
    pub g0: T,
    /// Cavity driving strength.
    pub drive_e: T,
    /// Initial mechanical occupation.
    pub m0: T,
    /// Initial cavity occupation.
    pub n0: T,
    /// `hbar omega_m / (k_B T)`.
    pub temperature_ratio: T,
    /// Initial classical cavity amplitude.
    pub alpha0: Cplx<T>,
    /// Initial classical mechanical amplitude.
    pub beta0: Cplx<T>,
    /// Markovian mechanical decay, used only by the Markovian baseline.
    pub gamma_m: T,
    /// When set, `m0` must equal the Bose-Einstein occupation at `omega_m`.
    pub thermal_init: bool,
}

impl<T: Real> SystemParams<T> {
    /// Parameter set of the sub-Ohmic cooling figure: `kappa = 0.05`,
    /// `g0 = 1e-3 kappa`, `E = 300`, `|alpha0| = |beta0| = 100`, `m0 = 100`,
    /// with the mirror in thermal equilibrium with its bath.
    pub fn cooling_reference() -> Self {
        let kappa = T::lit(0.05);
        let m0 = T::lit(100.0);
        Self {
            omega_m: T::one(),
            delta_c: T::one(),
            kappa,
            g0: kappa * T::lit(1e-3),
            drive_e: T::lit(300.0),
            m0,
            n0: T::zero(),
            temperature_ratio: temperature_ratio_for_occupation(m0),
            alpha0: Cplx::new(T::lit(100.0), T::zero()),
            beta0: Cplx::new(T::lit(100.0), T::zero()),
            gamma_m: T::lit(1e-8),
            thermal_init: true,
        }
    }

    /// Steady cavity amplitude `E / (i Delta + kappa/2)` for a fixed detuning.
    pub fn steady_alpha(&self, detuning: T) -> Cplx<T> {
        Cplx::new(self.drive_e, T::zero()) / Cplx::new(self.kappa / T::lit(2.0), detuning)
    }
}

/// Temperature ratio `hbar omega_m / k_B T` at which the thermal occupation
/// of the mechanical mode equals `m0`: `ln(1 + 1/m0)`.
pub fn temperature_ratio_for_occupation<T: Real>(m0: T) -> T {
    (T::one() + m0.recip()).ln()
}

/// Uniform time grid `t_i = i dt`, `i = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    pub dt: T,
    pub n_steps: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(dt: T, n_steps: usize) -> Self {
        Self { dt, n_steps }
    }

    /// Grid with the step count chosen so that `n_steps dt` is closest to `t_end`.
    pub fn with_end(dt: T, t_end: T) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::DegenerateGrid(format!("dt = {dt} must be positive")));
        }
        let n = (t_end / dt).round();
        if !(n >= T::zero()) || !n.is_finite() {
            return Err(Error::DegenerateGrid(format!("t_end = {t_end} is not reachable")));
        }
        Ok(Self::new(dt, n.to_usize().unwrap_or(0)))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn t(&self, i: usize) -> T {
        T::from_usize_lossy(i) * self.dt
    }

    pub fn t_end(&self) -> T {
        self.t(self.n_steps)
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.len()).map(move |i| self.t(i))
    }

    /// Index of the grid point at `t`, if `t` lies on the grid (to 1e-6 dt).
    pub fn index_of(&self, t: T) -> Option<usize> {
        let x = t / self.dt;
        let n = x.round();
        if n < T::zero() || (x - n).abs() > T::lit(1e-6) {
            return None;
        }
        let n = n.to_usize()?;
        (n <= self.n_steps).then_some(n)
    }

    /// Same spacing and length, up to 1e-12 relative in `dt`.
    pub fn matches(&self, other: &Self) -> bool {
        self.n_steps == other.n_steps && (self.dt - other.dt).abs() <= T::lit(1e-12) * self.dt
    }

    pub fn check(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::DegenerateGrid(format!("dt = {} must be positive", self.dt)));
        }
        Ok(())
    }
}

/// Piecewise-constant modulation of the cavity decay and the drive strength.
///
/// Each list holds `(switch_time, value)` pairs; the value holds from its
/// switch time (inclusive) until the next one. Before the first switch the
/// base values from [`SystemParams`] apply.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schedule<T> {
    pub kappa_steps: Vec<(T, T)>,
    pub drive_steps: Vec<(T, T)>,
}

impl<T: Real> Schedule<T> {
    pub fn constant() -> Self {
        Self { kappa_steps: Vec::new(), drive_steps: Vec::new() }
    }

    /// Single instantaneous jump of `kappa` at `t_switch`.
    pub fn kappa_switch(t_switch: T, kappa: T) -> Self {
        Self { kappa_steps: vec![(t_switch, kappa)], drive_steps: Vec::new() }
    }

    pub fn is_constant(&self) -> bool {
        self.kappa_steps.is_empty() && self.drive_steps.is_empty()
    }

    pub fn check(&self) -> Result<()> {
        for (name, steps) in [("kappa", &self.kappa_steps), ("drive", &self.drive_steps)] {
            for w in steps.windows(2) {
                if !(w[1].0 > w[0].0) {
                    return Err(Error::InvalidSchedule(format!(
                        "{name} switch times must be strictly increasing ({} then {})",
                        w[0].0, w[1].0
                    )));
                }
            }
            if let Some(&(t, v)) = steps.iter().find(|(t, v)| *t < T::zero() || *v < T::zero()) {
                return Err(Error::InvalidSchedule(format!(
                    "{name} step ({t}, {v}) must have non-negative time and value"
                )));
            }
        }
        Ok(())
    }

    fn lookup(steps: &[(T, T)], base: T, t: T) -> T {
        steps.iter().take_while(|(ts, _)| *ts <= t).last().map_or(base, |&(_, v)| v)
    }

    /// `(kappa(t), E(t))`, right-continuous at switch times.
    pub fn value_at(&self, params: &SystemParams<T>, t: T) -> (T, T) {
        (self.kappa_at(params.kappa, t), self.drive_at(params.drive_e, t))
    }

    pub fn kappa_at(&self, base: T, t: T) -> T {
        Self::lookup(&self.kappa_steps, base, t)
    }

    pub fn drive_at(&self, base: T, t: T) -> T {
        Self::lookup(&self.drive_steps, base, t)
    }

    /// Exact `int_0^t kappa(tau) dtau` of the piecewise-constant profile.
    pub fn kappa_integral(&self, base: T, t: T) -> T {
        let mut acc = T::zero();
        let mut from = T::zero();
        let mut value = base;
        for &(ts, v) in &self.kappa_steps {
            if ts >= t {
                break;
            }
            if ts > from {
                acc += value * (ts - from);
                from = ts;
            }
            value = v;
        }
        acc + value * (t - from).max(T::zero())
    }

    /// All switch events as `(quantity, time, value)`.
    pub fn events(&self) -> Vec<(&'static str, T, T)> {
        let mut ev: Vec<_> = self
            .kappa_steps
            .iter()
            .map(|&(t, v)| ("kappa", t, v))
            .chain(self.drive_steps.iter().map(|&(t, v)| ("drive_e", t, v)))
            .collect();
        ev.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }
}

/// Non-fatal findings of [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// `|alpha0|` below 10: the linearization is questionable at early times.
    WeakInitialDisplacement { alpha0_abs: f64 },
    /// Predicted steady `|alpha|` below 10.
    WeakSteadyDisplacement { alpha_ss_abs: f64 },
}

/// Configuration that passed [`validate`].
#[derive(Debug, Clone)]
pub struct Validated<T> {
    pub params: SystemParams<T>,
    pub grid: TimeGrid<T>,
    pub warnings: Vec<Warning>,
}

impl<T> Validated<T> {
    /// True when the linear approximation is expected to hold.
    pub fn linearization_ok(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// Displacement below which the linearized dynamics is flagged.
pub const LINEARIZATION_THRESHOLD: f64 = 10.0;

/// Relative tolerance of the `m0` / temperature consistency check.
pub const THERMAL_CONSISTENCY_RTOL: f64 = 1e-9;

fn require<T: Real>(ok: bool, name: &'static str, value: T, rule: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("{rule}, got {value}") })
    }
}

/// Checks parameter invariants and flags weak linearization.
pub fn validate<T: Real>(params: &SystemParams<T>, grid: &TimeGrid<T>) -> Result<Validated<T>> {
    grid.check()?;
    let p = params;
    require(p.omega_m > T::zero(), "omega_m", p.omega_m, "must be > 0")?;
    require(p.kappa > T::zero(), "kappa", p.kappa, "must be > 0")?;
    require(p.g0 >= T::zero(), "g0", p.g0, "must be >= 0")?;
    require(p.m0 >= T::zero(), "m0", p.m0, "must be >= 0")?;
    require(p.n0 >= T::zero(), "n0", p.n0, "must be >= 0")?;
    require(p.temperature_ratio > T::zero(), "temperature_ratio", p.temperature_ratio, "must be > 0")?;
    require(p.gamma_m >= T::zero(), "gamma_m", p.gamma_m, "must be >= 0")?;
    require(p.drive_e.is_finite(), "drive_e", p.drive_e, "must be finite")?;

    if p.thermal_init {
        let required = temperature_ratio_for_occupation(p.m0);
        let rel = ((p.temperature_ratio - required) / required).abs();
        if !(rel <= T::lit(THERMAL_CONSISTENCY_RTOL)) {
            return Err(Error::InconsistentThermal {
                m0: p.m0.to_f64_lossy(),
                required: required.to_f64_lossy(),
                given: p.temperature_ratio.to_f64_lossy(),
            });
        }
    }

    let mut warnings = Vec::new();
    let threshold = T::lit(LINEARIZATION_THRESHOLD);
    if p.alpha0.norm() < threshold {
        warnings.push(Warning::WeakInitialDisplacement { alpha0_abs: p.alpha0.norm().to_f64_lossy() });
    }
    let alpha_ss = p.steady_alpha(p.delta_c).norm();
    if alpha_ss < threshold {
        warnings.push(Warning::WeakSteadyDisplacement { alpha_ss_abs: alpha_ss.to_f64_lossy() });
    }
    Ok(Validated { params: p.clone(), grid: *grid, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_set_is_valid_without_warnings() {
        let p = SystemParams::<f64>::cooling_reference();
        assert!((p.g0 - 5e-5).abs() < 1e-18);
        let v = validate(&p, &TimeGrid::new(0.02, 10)).unwrap();
        assert!(v.linearization_ok(), "{:?}", v.warnings);
    }

    #[test]
    fn zero_step_is_degenerate() {
        let p = SystemParams::<f64>::cooling_reference();
        let err = validate(&p, &TimeGrid::new(0.0, 10)).unwrap_err();
        assert!(matches!(err, Error::DegenerateGrid(_)));
        assert!(err.to_string().contains("degenerate grid"));
    }

    #[test]
    fn thermal_ratio_inverts_bose_einstein() {
        let x = temperature_ratio_for_occupation(100.0_f64);
        assert!((x - (101.0_f64 / 100.0).ln()).abs() < 1e-16);
        assert!((x - 9.9503e-3).abs() < 1e-7);
        assert!((1.0 / x.exp_m1() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn inconsistent_thermal_state_rejected() {
        let mut p = SystemParams::<f64>::cooling_reference();
        p.temperature_ratio *= 1.001;
        assert!(matches!(validate(&p, &TimeGrid::new(0.02, 1)), Err(Error::InconsistentThermal { .. })));
        p.thermal_init = false;
        assert!(validate(&p, &TimeGrid::new(0.02, 1)).is_ok());
    }

    #[test]
    fn negative_rates_rejected() {
        let mut p = SystemParams::<f64>::cooling_reference();
        p.gamma_m = -1.0;
        assert!(matches!(validate(&p, &TimeGrid::new(0.02, 1)), Err(Error::InvalidParameter { name: "gamma_m", .. })));
        let mut p = SystemParams::<f64>::cooling_reference();
        p.kappa = 0.0;
        assert!(validate(&p, &TimeGrid::new(0.02, 1)).is_err());
    }

    #[test]
    fn weak_drive_warns() {
        let mut p = SystemParams::<f64>::cooling_reference();
        p.alpha0 = Cplx::new(1.0, 0.0);
        p.drive_e = 1.0;
        let v = validate(&p, &TimeGrid::new(0.02, 1)).unwrap();
        assert_eq!(v.warnings.len(), 2);
    }

    #[test]
    fn qswitch_lookup() {
        let p = SystemParams::<f64>::cooling_reference();
        let s = Schedule::kappa_switch(133.6f64, 10.0);
        assert_eq!(s.value_at(&p, 100.0).0, 0.05);
        assert_eq!(s.value_at(&p, 200.0).0, 10.0);
        assert_eq!(s.value_at(&p, 133.6).0, 10.0);
        assert_eq!(s.value_at(&p, 200.0).1, 300.0);
        let empty = Schedule::<f64>::constant();
        assert_eq!(empty.value_at(&p, 1e3), (0.05, 300.0));
    }

    #[test]
    fn kappa_integral_piecewise() {
        let s = Schedule::kappa_switch(133.6f64, 10.0);
        let got = s.kappa_integral(0.05, 200.0);
        assert!((got - (0.05 * 133.6 + 10.0 * 66.4)).abs() < 1e-9);
        assert_eq!(s.kappa_integral(0.05, 0.0), 0.0);
        assert!((s.kappa_integral(0.05, 100.0) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn schedule_must_increase() {
        let s = Schedule { kappa_steps: vec![(2.0, 1.0), (1.0, 1.0)], drive_steps: vec![] };
        assert!(s.check().is_err());
        let s = Schedule { kappa_steps: vec![(1.0, -1.0)], drive_steps: vec![] };
        assert!(s.check().is_err());
    }

    #[test]
    fn grid_index_lookup() {
        let g = TimeGrid::<f64>::with_end(0.02, 200.0).unwrap();
        assert_eq!(g.n_steps, 10_000);
        assert_eq!(g.index_of(133.6), Some(6680));
        assert_eq!(g.index_of(133.61), None);
        assert_eq!(g.index_of(300.0), None);
    }

    #[test]
    fn works_in_single_precision() {
        let p = SystemParams::<f32>::cooling_reference();
        assert!(validate(&p, &TimeGrid::new(0.02_f32, 4)).is_ok());
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn value_at_is_piecewise_constant(ts in proptest::collection::vec(0.1f64..100.0, 1..5), q in 0.0f64..120.0) {
            let mut ts = ts;
            ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ts.dedup();
            let steps: Vec<_> = ts.iter().enumerate().map(|(i, &t)| (t, i as f64 + 1.0)).collect();
            let s = Schedule { kappa_steps: steps.clone(), drive_steps: vec![] };
            let k = s.kappa_at(0.5, q);
            let expected = steps.iter().rfind(|(t, _)| *t <= q).map_or(0.5, |&(_, v)| v);
            prop_assert_eq!(k, expected);
            for &(t, v) in &steps {
                prop_assert_eq!(s.kappa_at(0.5, t), v);
            }
        }
    }
}
