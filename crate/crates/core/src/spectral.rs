//! Bath spectral densities, thermal occupations, the memory kernel `f(t)`,
//! the stationary bath correlation `C3(tau)` and bath-mode discretization.

use crate::error::{Error, Result};
use crate::model::TimeGrid;
use crate::quadrature::{NeumaierSum, QuadratureRule};
use crate::scalar::{cplx, sin_cos_of_product, Cplx, Real};

/// Spectral density `J(omega)` of the mechanical reservoir.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralModel<T> {
    /// `J = eta omega (omega/omega0)^(s-1) exp(-omega/omega0)`.
    OhmicFamily { eta: T, s: T, omega0: T },
    /// `J = C(omega) omega^k` on `band`, zero outside, with
    /// `C = eta exp(-omega_c/omega0) / omega0^(k-1)`. The exponential runs
    /// with `omega_c = omega` unless `c_fixed_at` pins it to a frequency.
    BandPowerLaw { eta: T, omega0: T, k: T, band: (T, T), c_fixed_at: Option<T> },
    /// White spectrum `J = gamma_m / (2 pi)`: the Markovian limit.
    Flat { gamma_m: T },
}

impl<T: Real> SpectralModel<T> {
    /// Power-law band centred on `omega_m` with full width `width`.
    pub fn centered_band(eta: T, omega0: T, k: T, omega_m: T, width: T) -> Self {
        let half = width * T::lit(0.5);
        Self::BandPowerLaw { eta, omega0, k, band: (omega_m - half, omega_m + half), c_fixed_at: None }
    }

    pub fn check(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        match *self {
            Self::OhmicFamily { eta, s, omega0 } => {
                if !(eta >= T::zero()) {
                    return bad("bath.eta", format!("must be >= 0, got {eta}"));
                }
                if !(s > T::zero()) {
                    return bad("bath.s", format!("must be > 0, got {s}"));
                }
                if !(omega0 > T::zero()) {
                    return bad("bath.omega0", format!("must be > 0, got {omega0}"));
                }
            }
            Self::BandPowerLaw { eta, omega0, band, .. } => {
                if !(eta >= T::zero()) {
                    return bad("bath.eta", format!("must be >= 0, got {eta}"));
                }
                if !(omega0 > T::zero()) {
                    return bad("bath.omega0", format!("must be > 0, got {omega0}"));
                }
                if !(band.0 > T::zero() && band.1 > band.0) {
                    return bad("bath.band", format!("need 0 < lo < hi, got [{}, {}]", band.0, band.1));
                }
            }
            Self::Flat { gamma_m } => {
                if !(gamma_m >= T::zero()) {
                    return bad("gamma_m", format!("must be >= 0, got {gamma_m}"));
                }
            }
        }
        Ok(())
    }

    pub fn is_markovian(&self) -> bool {
        matches!(self, Self::Flat { .. })
    }
}

/// Spectral density at `omega >= 0`.
pub fn eval_j<T: Real>(model: &SpectralModel<T>, omega: T) -> T {
    if omega < T::zero() {
        return T::zero();
    }
    match *model {
        SpectralModel::OhmicFamily { eta, s, omega0 } => {
            if omega == T::zero() {
                return T::zero();
            }
            eta * omega * (omega / omega0).powf(s - T::one()) * (-omega / omega0).exp()
        }
        SpectralModel::BandPowerLaw { eta, omega0, k, band, c_fixed_at } => {
            if omega < band.0 || omega > band.1 {
                return T::zero();
            }
            let at = c_fixed_at.unwrap_or(omega);
            let c = eta * (-at / omega0).exp() / omega0.powf(k - T::one());
            c * omega.powf(k)
        }
        SpectralModel::Flat { gamma_m } => gamma_m / (T::lit(2.0) * T::PI()),
    }
}

/// Bose-Einstein occupation `1/(exp(omega ratio/omega_m) - 1)`, where
/// `ratio = hbar omega_m / k_B T`. Returns 0 once the exponent exceeds 700.
pub fn thermal_occupation<T: Real>(omega: T, temperature_ratio: T, omega_m: T) -> T {
    let x = omega * temperature_ratio / omega_m;
    if !(x <= T::lit(700.0)) {
        return T::zero();
    }
    x.exp_m1().recip()
}

/// Knobs for [`QuadratureRule::for_model`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub per_panel: usize,
    /// Lower bound on node count for the Ohmic family.
    pub min_nodes_ohmic: usize,
    /// Lower bound on node count for a power-law band.
    pub min_nodes_band: usize,
    /// Ohmic integration range is `[0, cutoff_factor omega0]`.
    pub cutoff_factor: f64,
    /// Largest phase `omega_width t_max` swept by one panel.
    pub phase_per_panel: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            per_panel: 16,
            min_nodes_ohmic: 512,
            min_nodes_band: 256,
            cutoff_factor: 40.0,
            phase_per_panel: 4.0 * std::f64::consts::PI,
        }
    }
}

impl QuadOptions {
    /// Reference resolution: a quarter of the default phase per panel,
    /// enough for `1e-8` relative accuracy of `f` out to the horizon.
    pub fn reference() -> Self {
        Self { phase_per_panel: std::f64::consts::PI, ..Self::default() }
    }

    /// Same rule family with `factor` times as many panels.
    pub fn refined(self, factor: usize) -> Self {
        Self {
            min_nodes_ohmic: self.min_nodes_ohmic * factor,
            min_nodes_band: self.min_nodes_band * factor,
            phase_per_panel: self.phase_per_panel / factor as f64,
            ..self
        }
    }
}

impl<T: Real> QuadratureRule<T> {
    /// Frequency rule for `model`, resolved for lags up to `horizon`.
    ///
    /// The panel count grows with `horizon` so that every panel sweeps at
    /// most `phase_per_panel` radians of `omega t`. A [`SpectralModel::Flat`]
    /// spectrum maps to a single node at `omega_m` with weight `pi`, the
    /// resonant weight of a white spectrum: `sum w J = gamma_m / 2`.
    pub fn for_model(model: &SpectralModel<T>, omega_m: T, horizon: T, opts: &QuadOptions) -> Result<Self> {
        model.check()?;
        let panels_for = |width: T, min_nodes: usize| {
            let by_phase = (width * horizon / T::lit(opts.phase_per_panel)).ceil().to_usize().unwrap_or(1);
            by_phase.max(min_nodes.div_ceil(opts.per_panel)).max(1)
        };
        Ok(match *model {
            SpectralModel::OhmicFamily { omega0, .. } => {
                // Dyadic panel width: every panel offset and scaled GL node
                // is then exact, so no rounding pattern repeats across panels
                // (it would alias coherently with the oscillation at long lags).
                let cut = omega0 * T::lit(opts.cutoff_factor);
                let target = cut / T::from_usize_lossy(panels_for(cut, opts.min_nodes_ohmic));
                let h = T::lit(2.0).powi(target.log2().floor().to_i32().unwrap_or(0));
                let panels = (cut / h).ceil().to_usize().unwrap_or(1).max(1);
                Self::composite(T::zero(), h * T::from_usize_lossy(panels), panels, opts.per_panel, true)
            }
            SpectralModel::BandPowerLaw { band, .. } => {
                let panels = panels_for(band.1 - band.0, opts.min_nodes_band);
                Self::composite(band.0, band.1, panels, opts.per_panel, false)
            }
            SpectralModel::Flat { .. } => Self::atom(omega_m, T::PI()),
        })
    }
}

/// `f(t) = 2i int J(omega) sin(omega t) domega`, evaluated with `quad`.
///
/// The Markovian [`SpectralModel::Flat`] spectrum has no memory kernel; the
/// Markovian baseline uses local damping instead.
pub fn memory_kernel_f<T: Real>(model: &SpectralModel<T>, quad: &QuadratureRule<T>, t: T) -> Result<Cplx<T>> {
    if model.is_markovian() {
        return Err(Error::Unsupported("memory kernel of the Markovian flat spectrum"));
    }
    let im = quad.integrate(|w| eval_j(model, w) * sin_cos_of_product(w, t).0);
    Ok(cplx(T::zero(), T::lit(2.0) * im))
}

/// `C3(tau) = int J(omega) [exp(-i omega tau) + 2 cos(omega tau) N(omega)] domega`.
pub fn bath_correlation_c3<T: Real>(
    model: &SpectralModel<T>,
    quad: &QuadratureRule<T>,
    temperature_ratio: T,
    omega_m: T,
    tau: T,
) -> Cplx<T> {
    let two = T::lit(2.0);
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    for (&w, &q) in quad.nodes.iter().zip(&quad.weights) {
        let jw = q * eval_j(model, w);
        let n = thermal_occupation(w, temperature_ratio, omega_m);
        let (s, c) = sin_cos_of_product(w, tau);
        re.add(jw * c * (T::one() + two * n));
        im.add(-jw * s);
    }
    cplx(re.value(), im.value())
}

/// Equivalent damping `int J(omega) exp(i (omega_m - omega) tau) domega`.
pub fn equivalent_damping<T: Real>(model: &SpectralModel<T>, quad: &QuadratureRule<T>, omega_m: T, tau: T) -> Cplx<T> {
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    for (&w, &q) in quad.nodes.iter().zip(&quad.weights) {
        let (s, c) = sin_cos_of_product(omega_m - w, tau);
        let jw = q * eval_j(model, w);
        re.add(jw * c);
        im.add(jw * s);
    }
    cplx(re.value(), im.value())
}

/// Per-node samples `(omega_j, w_j J(omega_j), N(omega_j))` of a rule.
#[derive(Debug, Clone)]
pub struct SpectralSamples<T> {
    pub omega: Vec<T>,
    pub weighted_j: Vec<T>,
    pub occupation: Vec<T>,
}

impl<T: Real> SpectralSamples<T> {
    pub fn new(model: &SpectralModel<T>, quad: &QuadratureRule<T>, temperature_ratio: T, omega_m: T) -> Self {
        let weighted_j = quad.nodes.iter().zip(&quad.weights).map(|(&w, &q)| q * eval_j(model, w)).collect();
        let occupation = quad.nodes.iter().map(|&w| thermal_occupation(w, temperature_ratio, omega_m)).collect();
        Self { omega: quad.nodes.clone(), weighted_j, occupation }
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

/// Kernels tabulated on the lags of a time grid.
#[derive(Debug, Clone)]
pub struct KernelTables<T> {
    pub grid: TimeGrid<T>,
    /// `f(t_n)`, purely imaginary.
    pub f: Vec<Cplx<T>>,
    /// `C3(t_n)`.
    pub c3: Vec<Cplx<T>>,
    /// Vacuum part `int J exp(-i omega t_n)`, the rotating-wave bath kernel.
    pub c_vac: Vec<Cplx<T>>,
}

fn phasor<T: Real>(w: T, t: T) -> Cplx<T> {
    let (s, c) = sin_cos_of_product(w, t);
    cplx(c, s)
}

/// Steps between exact re-evaluations of the rotating phasors.
const PHASOR_RESYNC: usize = 256;

impl<T: Real> KernelTables<T> {
    /// Tabulates `f`, `C3` and the vacuum kernel on every lag of `grid`.
    ///
    /// Cost is `O(n_grid n_nodes)`; phasors advance by one multiplication
    /// per step and are re-synchronised periodically.
    pub fn build(
        model: &SpectralModel<T>,
        quad: &QuadratureRule<T>,
        temperature_ratio: T,
        omega_m: T,
        grid: &TimeGrid<T>,
    ) -> Result<Self> {
        if model.is_markovian() {
            return Err(Error::Unsupported("kernel tables of the Markovian flat spectrum"));
        }
        grid.check()?;
        let samples = SpectralSamples::new(model, quad, temperature_ratio, omega_m);
        let len = grid.len();
        let zero = Cplx::new(T::zero(), T::zero());
        let mut f_im = vec![T::zero(); len];
        let mut c3 = vec![zero; len];
        let mut c_vac = vec![zero; len];
        let two = T::lit(2.0);
        for j in 0..samples.len() {
            let (w, jw, n) = (samples.omega[j], samples.weighted_j[j], samples.occupation[j]);
            if jw == T::zero() {
                continue;
            }
            let step = phasor(w, grid.dt);
            let mut z = Cplx::new(T::one(), T::zero());
            let thermal = jw * (T::one() + two * n);
            for i in 0..len {
                if i % PHASOR_RESYNC == 0 {
                    z = phasor(w, grid.t(i));
                }
                f_im[i] += two * jw * z.im;
                c_vac[i] += cplx(jw * z.re, -jw * z.im);
                c3[i] += cplx(thermal * z.re, -jw * z.im);
                z *= step;
            }
        }
        let f = f_im.into_iter().map(|v| cplx(T::zero(), v)).collect();
        Ok(Self { grid: *grid, f, c3, c_vac })
    }

    /// Imaginary parts of `f` on the grid.
    pub fn f_imag(&self) -> Vec<T> {
        self.f.iter().map(|z| z.im).collect()
    }
}

/// Discrete bath: mode frequencies and couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct BathModes<T> {
    pub omega: Vec<T>,
    pub coupling: Vec<T>,
}

impl<T: Real> BathModes<T> {
    pub fn empty() -> Self {
        Self { omega: Vec::new(), coupling: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// `sum_k V_k^2`.
    pub fn total_weight(&self) -> T {
        self.coupling.iter().fold(T::zero(), |a, &v| a + v * v)
    }

    /// Same modes with every frequency moved by `shift` (couplings kept).
    pub fn shifted(&self, shift: T) -> Self {
        Self { omega: self.omega.iter().map(|&w| w + shift).collect(), coupling: self.coupling.clone() }
    }
}

/// Default discretization band: `omega_m +- 3` (clipped at 0) for the Ohmic
/// family, the band itself for a power law, `omega_m +- 0.7` for the flat
/// Markovian spectrum. A narrower white band leaves a slow `1/W` transient
/// in the relaxation; a wider one reaches the low-frequency modes whose
/// thermal occupation blows up the counter-rotating slip.
pub fn default_mode_band<T: Real>(model: &SpectralModel<T>, omega_m: T) -> (T, T) {
    match *model {
        SpectralModel::OhmicFamily { .. } => {
            let w = T::lit(3.0) * omega_m;
            ((omega_m - w).max(T::zero()), omega_m + w)
        }
        SpectralModel::BandPowerLaw { band, .. } => band,
        SpectralModel::Flat { .. } => {
            let w = T::lit(0.7) * omega_m;
            ((omega_m - w).max(T::zero()), omega_m + w)
        }
    }
}

/// Midpoint-rule bath modes on `band`: `V_k^2 = J(omega_k) d_omega`.
pub fn discretize_bath<T: Real>(model: &SpectralModel<T>, k: usize, band: (T, T)) -> Result<BathModes<T>> {
    model.check()?;
    if k < 2 {
        return Err(Error::InvalidParameter { name: "bath.modes", reason: format!("need at least 2 modes, got {k}") });
    }
    let (lo, hi) = band;
    let outside = || Error::BandOutsideSupport { lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() };
    if !(hi > lo) || lo < T::zero() {
        return Err(outside());
    }
    if let SpectralModel::BandPowerLaw { band: (bl, bh), .. } = *model {
        let slack = T::lit(1e-12) * bh;
        if lo < bl - slack || hi > bh + slack {
            return Err(outside());
        }
    }
    let dw = (hi - lo) / T::from_usize_lossy(k);
    let omega: Vec<T> = (0..k).map(|i| lo + dw * (T::from_usize_lossy(i) + T::lit(0.5))).collect();
    let coupling = omega.iter().map(|&w| (eval_j(model, w) * dw).sqrt()).collect();
    Ok(BathModes { omega, coupling })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ohmic(s: f64) -> SpectralModel<f64> {
        SpectralModel::OhmicFamily { eta: 1e-5, s, omega0: 5.0 }
    }

    /// Closed form of `f(t)` for `s = 1`: `4 i eta omega0^3 t / (1 + omega0^2 t^2)^2`.
    fn ohmic_f_closed(eta: f64, omega0: f64, t: f64) -> f64 {
        4.0 * eta * omega0.powi(3) * t / (1.0 + omega0 * omega0 * t * t).powi(2)
    }

    /// Brute-force midpoint sum of `int_0^cut g`, used as an independent check.
    fn brute(g: impl Fn(f64) -> f64, cut: f64, n: usize) -> f64 {
        let h = cut / n as f64;
        (0..n).map(|i| g((i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn j_values() {
        let v = eval_j(&ohmic(1.0), 1.0);
        assert!((v - 1e-5 * (-0.2f64).exp()).abs() < 1e-20);
        assert!((v - 8.1873e-6).abs() < 1e-9);
        assert_eq!(eval_j(&ohmic(0.5), 0.0), 0.0);
        let band = SpectralModel::centered_band(1e-5, 5.0, -2.0, 1.0, 0.07);
        assert_eq!(eval_j(&band, 1.1), 0.0);
        assert!(eval_j(&band, 1.0) > 0.0);
    }

    #[test]
    fn band_c_as_written_vs_fixed() {
        let as_written =
            SpectralModel::BandPowerLaw { eta: 1e-5, omega0: 5.0, k: -2.0, band: (0.95, 1.05), c_fixed_at: None };
        let fixed =
            SpectralModel::BandPowerLaw { eta: 1e-5, omega0: 5.0, k: -2.0, band: (0.95, 1.05), c_fixed_at: Some(1.0) };
        assert_eq!(eval_j(&as_written, 1.0), eval_j(&fixed, 1.0));
        assert!(eval_j(&as_written, 1.04) < eval_j(&fixed, 1.04));
        let c = 1e-5 * (-0.2f64).exp() * 125.0;
        assert!((eval_j(&fixed, 1.0) - c).abs() < 1e-18);
    }

    #[test]
    fn thermal_cases() {
        assert!((thermal_occupation(1.0, 2f64.ln(), 1.0) - 1.0).abs() < 1e-15);
        assert_eq!(thermal_occupation(1.0, 1e6, 1.0), 0.0);
        let ratio = (1.01f64).ln();
        assert!((thermal_occupation(1.0, ratio, 1.0) / 100.0 - 1.0).abs() < 1e-6);
        let ratio = 9.9503e-3f64;
        assert!((thermal_occupation(1.0, ratio, 1.0) / 100.0 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn kernel_vanishes_at_zero_and_is_imaginary() {
        let q = QuadratureRule::for_model(&ohmic(0.5), 1.0, 20.0, &QuadOptions::default()).unwrap();
        let f0 = memory_kernel_f(&ohmic(0.5), &q, 0.0).unwrap();
        assert_eq!(f0, Cplx::new(0.0, 0.0));
        for t in [0.3, 2.0, 11.0] {
            assert_eq!(memory_kernel_f(&ohmic(0.5), &q, t).unwrap().re, 0.0);
        }
    }

    #[test]
    fn ohmic_kernel_matches_closed_form_and_brute_force() {
        let model = ohmic(1.0);
        let q = QuadratureRule::for_model(&model, 1.0, 50.0, &QuadOptions::default()).unwrap();
        let f = memory_kernel_f(&model, &q, 0.5).unwrap().im;
        let closed = ohmic_f_closed(1e-5, 5.0, 0.5);
        assert!((closed - 4.7562e-5).abs() < 1e-9);
        assert!(((f - closed) / closed).abs() < 1e-10);
        let bf = 2.0 * brute(|w| eval_j(&model, w) * (w * 0.5).sin(), 200.0, 400_000);
        assert!(((bf - closed) / closed).abs() < 1e-7);
    }

    #[test]
    fn flat_kernel_refused() {
        let flat = SpectralModel::Flat { gamma_m: 1e-3f64 };
        let q = QuadratureRule::for_model(&flat, 1.0, 10.0, &QuadOptions::default()).unwrap();
        assert!(matches!(memory_kernel_f(&flat, &q, 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn flat_equivalent_damping_is_half_gamma() {
        let flat = SpectralModel::Flat { gamma_m: 1e-3f64 };
        let q = QuadratureRule::for_model(&flat, 1.0, 20.0, &QuadOptions::default()).unwrap();
        for tau in [0.0, 3.0, 20.0] {
            let d = equivalent_damping(&flat, &q, 1.0, tau);
            assert!((d.re - 5e-4).abs() < 1e-18 && d.im.abs() < 1e-18);
        }
    }

    #[test]
    fn c3_at_zero_and_zero_temperature() {
        let model = ohmic(1.0);
        let q = QuadratureRule::for_model(&model, 1.0, 10.0, &QuadOptions::default()).unwrap();
        let c = bath_correlation_c3(&model, &q, 1e9, 1.0, 0.0);
        assert!((c.re - 2.5e-4).abs() < 1e-14 && c.im.abs() < 1e-20);
        let ratio = 0.3;
        let c = bath_correlation_c3(&model, &q, ratio, 1.0, 0.0);
        let expect = q.integrate(|w| eval_j(&model, w) * (1.0 + 2.0 * thermal_occupation(w, ratio, 1.0)));
        assert!((c.re - expect).abs() < 1e-16 * expect.abs().max(1.0));
        let cz = bath_correlation_c3(&model, &q, 1e9, 1.0, 0.7);
        let vac = q.integrate(|w| eval_j(&model, w) * (w * 0.7).cos());
        assert!((cz.re - vac).abs() < 1e-18);
    }

    #[test]
    fn c3_hermitian() {
        let model = ohmic(0.5);
        let q = QuadratureRule::for_model(&model, 1.0, 10.0, &QuadOptions::default()).unwrap();
        for tau in [0.1, 1.3, 7.0] {
            let a = bath_correlation_c3(&model, &q, 0.01, 1.0, tau);
            let b = bath_correlation_c3(&model, &q, 0.01, 1.0, -tau);
            assert!((a - b.conj()).norm() <= 1e-15 * a.norm());
        }
    }

    #[test]
    fn tables_agree_with_pointwise_evaluation() {
        let model = ohmic(0.5);
        let grid = TimeGrid::new(0.05, 1200);
        let q = QuadratureRule::for_model(&model, 1.0, grid.t_end(), &QuadOptions::default()).unwrap();
        let tab = KernelTables::build(&model, &q, 0.01, 1.0, &grid).unwrap();
        for i in [0, 1, 17, 600, 1199] {
            let t = grid.t(i);
            let f = memory_kernel_f(&model, &q, t).unwrap();
            let c = bath_correlation_c3(&model, &q, 0.01, 1.0, t);
            assert!((tab.f[i] - f).norm() < 1e-13 * 2.5e-4, "f at {i}");
            assert!((tab.c3[i] - c).norm() < 1e-13 * c.norm().max(1e-3), "c3 at {i}");
        }
    }

    #[test]
    fn kernel_converges_under_refinement() {
        let model = ohmic(1.0);
        let opts = QuadOptions::reference();
        let q1 = QuadratureRule::for_model(&model, 1.0, 50.0, &opts).unwrap();
        let q2 = QuadratureRule::for_model(&model, 1.0, 50.0, &opts.refined(2)).unwrap();
        assert!(q2.len() >= 2 * q1.len() - 16);
        for i in 1..=100 {
            let t = 0.5 * i as f64;
            let a = memory_kernel_f(&model, &q1, t).unwrap().im;
            let b = memory_kernel_f(&model, &q2, t).unwrap().im;
            assert!(((a - b) / b).abs() < 1e-8, "t = {t}: {a} vs {b}");
        }
    }

    #[test]
    fn reference_rule_meets_closed_form_to_long_lags() {
        let model = ohmic(1.0);
        let q = QuadratureRule::for_model(&model, 1.0, 50.0, &QuadOptions::reference()).unwrap();
        for i in 1..=500 {
            let t = 0.1 * i as f64;
            let f = memory_kernel_f(&model, &q, t).unwrap().im;
            let c = ohmic_f_closed(1e-5, 5.0, t);
            assert!(((f - c) / c).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn constant_density_discretizes_exactly() {
        let flat = SpectralModel::Flat { gamma_m: 2e-3 };
        let modes = discretize_bath(&flat, 7, (0.5, 1.5)).unwrap();
        let c = 2e-3 / (2.0 * std::f64::consts::PI);
        assert!((modes.total_weight() - c).abs() < 1e-17);
    }

    #[test]
    fn ohmic_modes_reproduce_integral() {
        let modes = discretize_bath(&ohmic(1.0), 2000, (0.0, 50.0)).unwrap();
        assert!((modes.total_weight() / 2.5e-4 - 1.0).abs() < 0.01);
    }

    #[test]
    fn band_modes_reproduce_antiderivative() {
        let band = SpectralModel::BandPowerLaw {
            eta: 1e-5,
            omega0: 5.0,
            k: -2.0,
            band: (0.965, 1.035),
            c_fixed_at: Some(1.0),
        };
        let modes = discretize_bath(&band, 200, (0.965, 1.035)).unwrap();
        let c = 1e-5 * (-0.2f64).exp() * 125.0;
        let exact = c * (1.0 / 0.965 - 1.0 / 1.035);
        assert!((modes.total_weight() / exact - 1.0).abs() < 1e-5);
        // as written, the exponential runs with omega; compare with brute force.
        let running =
            SpectralModel::BandPowerLaw { eta: 1e-5, omega0: 5.0, k: -2.0, band: (0.965, 1.035), c_fixed_at: None };
        let modes = discretize_bath(&running, 200, (0.965, 1.035)).unwrap();
        let h = 0.07 / 1e5;
        let bf: f64 = (0..100_000).map(|i| eval_j(&running, 0.965 + (i as f64 + 0.5) * h) * h).sum();
        assert!((modes.total_weight() / bf - 1.0).abs() < 1e-5);
    }

    #[test]
    fn band_outside_support_rejected() {
        let band = SpectralModel::centered_band(1e-5, 5.0, -2.0, 1.0, 0.1);
        assert!(matches!(discretize_bath(&band, 10, (0.5, 1.0)), Err(Error::BandOutsideSupport { .. })));
        assert!(discretize_bath(&ohmic(1.0), 1, (0.0, 1.0)).is_err());
        assert!(discretize_bath(&ohmic(1.0), 10, (2.0, 1.0)).is_err());
    }

    #[test]
    fn single_precision_kernel() {
        let model = SpectralModel::OhmicFamily { eta: 1e-5f32, s: 1.0, omega0: 5.0 };
        let q = QuadratureRule::for_model(&model, 1.0, 2.0, &QuadOptions::default()).unwrap();
        let f = memory_kernel_f(&model, &q, 0.5).unwrap().im;
        assert!((f / 4.7562e-5 - 1.0).abs() < 1e-3);
    }
}
