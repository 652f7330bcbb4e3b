//! Mean phonon number assembled from the propagators.
//!
//! Writing the noise part of `b(t)` as `i int_0^t R(t - tau) B(tau) dtau`,
//! with `B` the Hermitian force from the cavity and the reservoir,
//!
//! ```text
//! N_b(t) = (|M|^2 + |L|^2) m0 + |L|^2 + int int R*(t - t1) R(t - t2) <B(t1) B(t2)>
//! ```
//!
//! and `R = M - L*`. The force correlation splits into the initial cavity
//! photons, the cavity input noise and the reservoir; each piece is
//! evaluated in a factored form so that no `O(N^3)` double sum is needed.

use crate::classical::{ClassicalTrajectory, PhaseIntegral};
use crate::error::{Error, Result};
use crate::model::TimeGrid;
use crate::propagator::PropagatorPair;
use crate::scalar::{cplx, Cplx, Real};
use crate::spectral::SpectralSamples;

/// How the propagators combine into the noise response `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResponseForm {
    /// `R = M - L*`, from solving the fluctuation equations with a source.
    #[default]
    Derived,
    /// `R = M + L*`.
    MainText,
}

/// Treatment of the cavity input-noise kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputNoiseForm {
    /// Full two-time correlation
    /// `int_0^{min(t1,t2)} ds kappa(s) G*(t1) G(t2) e^{-(U(t1)-U(s))} e^{-(U*(t2)-U*(s))}`.
    #[default]
    TwoTime,
    /// The single-time kernel `|G(t1)|^2 (1 - e^{-int_0^t1 kappa})`, which is
    /// the diagonal of the two-time form, taken for every `t2`.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OccupancyOptions {
    pub response: ResponseForm,
    pub input_noise: InputNoiseForm,
}

/// Reservoir force statistics.
#[derive(Debug, Clone, Copy)]
pub enum BathNoise<'a, T> {
    None,
    /// Structured reservoir sampled on quadrature nodes.
    Spectral(&'a SpectralSamples<T>),
    /// White noise matching local damping `gamma` at occupation `n_th`.
    Local {
        gamma: T,
        n_th: T,
    },
}

/// Initial occupations of the two fluctuation modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialOccupations<T> {
    pub m0: T,
    pub n0: T,
}

/// `N_b` and its additive components on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancySeries<T> {
    pub grid: TimeGrid<T>,
    pub total: Vec<T>,
    /// `(|M|^2 + |L|^2) m0 + |L|^2`.
    pub homogeneous: Vec<T>,
    /// Initial cavity photons.
    pub cavity: Vec<T>,
    /// Cavity input noise.
    pub input_noise: Vec<T>,
    /// Mechanical reservoir.
    pub bath: Vec<T>,
    /// Imaginary part discarded during assembly (zero unless a non-Hermitian
    /// kernel form is selected).
    pub imag: Vec<T>,
}

/// Components of `N_b` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentReport<T> {
    pub t: T,
    pub total: T,
    pub homogeneous: T,
    pub cavity: T,
    pub input_noise: T,
    pub bath: T,
}

impl<T: Real> OccupancySeries<T> {
    /// Rows `(t, N_b, homog, cavity, input, bath)`.
    pub fn rows(&self) -> impl Iterator<Item = [T; 6]> + '_ {
        (0..self.total.len()).map(move |i| {
            [self.grid.t(i), self.total[i], self.homogeneous[i], self.cavity[i], self.input_noise[i], self.bath[i]]
        })
    }
}

/// Component breakdown at grid time `t`.
pub fn component_report<T: Real>(series: &OccupancySeries<T>, t: T) -> Result<ComponentReport<T>> {
    let i = series
        .grid
        .index_of(t)
        .filter(|&i| i < series.total.len())
        .ok_or_else(|| Error::GridMismatch(format!("t = {t} is not a point of the output grid")))?;
    Ok(ComponentReport {
        t: series.grid.t(i),
        total: series.total[i],
        homogeneous: series.homogeneous[i],
        cavity: series.cavity[i],
        input_noise: series.input_noise[i],
        bath: series.bath[i],
    })
}

fn response<T: Real>(pair: &PropagatorPair<T>, form: ResponseForm) -> Vec<Cplx<T>> {
    pair.m
        .iter()
        .zip(&pair.l)
        .map(|(&m, &l)| match form {
            ResponseForm::Derived => m - l.conj(),
            ResponseForm::MainText => m + l.conj(),
        })
        .collect()
}

/// Trapezoid weights `h c_j` on `[t_a, t_b]` (grid indices).
#[inline]
fn tw<T: Real>(h: T, j: usize, a: usize, b: usize) -> T {
    if a == b {
        T::zero()
    } else if j == a || j == b {
        h * T::lit(0.5)
    } else {
        h
    }
}

/// Quadrature weights for `int_0^{t_n} kappa(s) g(s) ds` with `kappa` piecewise
/// constant per step: each node takes half a step of `kappa` from either side.
fn kappa_weights<T: Real>(h: T, kappa: &[T], n: usize) -> Vec<T> {
    let half = h * T::lit(0.5);
    (0..=n)
        .map(|j| {
            let left = if j > 0 { kappa[j - 1] } else { T::zero() };
            let right = if j < n { kappa[j] } else { T::zero() };
            half * (left + right)
        })
        .collect()
}

struct Inputs<'a, T> {
    r: Vec<Cplx<T>>,
    g: &'a [Cplx<T>],
    u: &'a [Cplx<T>],
    kappa: &'a [T],
    n: usize,
    h: T,
}

fn gather<'a, T: Real>(
    pair: &PropagatorPair<T>,
    traj: &'a ClassicalTrajectory<T>,
    phase: &'a PhaseIntegral<T>,
    options: OccupancyOptions,
) -> Result<Inputs<'a, T>> {
    let n = pair.m.len();
    if !pair.grid.matches(&traj.grid) || !pair.grid.matches(&phase.grid) {
        return Err(Error::GridMismatch("propagators, trajectory and phase integral must share one grid".into()));
    }
    if traj.len() < n || phase.u.len() < n || pair.l.len() != n || traj.kappa.len() + 1 < n {
        return Err(Error::GridMismatch("input series shorter than the propagator grid".into()));
    }
    Ok(Inputs { r: response(pair, options.response), g: &traj.g, u: &phase.u, kappa: &traj.kappa, n, h: pair.grid.dt })
}

/// Fast assembly of `N_b(t_n)` for every grid point.
///
/// Cavity terms are single convolutions (`O(N^2)` total), the input noise
/// uses a backward recurrence per output time (`O(N^2)`), and the reservoir
/// term is a running sum per frequency node (`O(N N_omega)`).
pub fn phonon_number<T: Real>(
    pair: &PropagatorPair<T>,
    traj: &ClassicalTrajectory<T>,
    phase: &PhaseIntegral<T>,
    bath: BathNoise<'_, T>,
    init: InitialOccupations<T>,
    options: OccupancyOptions,
) -> Result<OccupancySeries<T>> {
    let inp = gather(pair, traj, phase, options)?;
    let Inputs { ref r, g, u, kappa, n, h } = inp;
    let zero = cplx(T::zero(), T::zero());
    let half = T::lit(0.5);
    let one = T::one();

    let homogeneous: Vec<T> = (0..n)
        .map(|k| {
            let l2 = pair.l[k].norm_sqr();
            (pair.m[k].norm_sqr() + l2) * init.m0 + l2
        })
        .collect();

    let coupled = g.iter().take(n).any(|z| z.norm_sqr() > T::zero());
    let mut cavity = vec![T::zero(); n];
    let mut input_noise = vec![T::zero(); n];
    let mut imag = vec![T::zero(); n];
    if coupled {
        // x_j = G_j e^{-U*_j}
        let x: Vec<Cplx<T>> = (0..n).map(|j| g[j] * (-u[j].conj()).exp()).collect();
        let decay_star: Vec<Cplx<T>> =
            (0..n.saturating_sub(1)).map(|j| (u[j].conj() - u[j + 1].conj()).exp()).collect();
        let mut p = vec![zero; n];
        for t in 1..n {
            let (mut a, mut b) = (zero, zero);
            for j in 0..=t {
                let w = tw(h, j, 0, t);
                a += r[t - j] * x[j] * w;
                if init.n0 > T::zero() {
                    b += r[t - j] * x[j].conj() * w;
                }
            }
            cavity[t] = (init.n0 + one) * a.norm_sqr() + init.n0 * b.norm_sqr();

            let wk = kappa_weights(h, kappa, t);
            match options.input_noise {
                InputNoiseForm::TwoTime => {
                    p[t] = zero;
                    let mut acc = T::zero();
                    for j in (0..t).rev() {
                        let e = decay_star[j];
                        p[j] = (r[t - j] * g[j] + r[t - j - 1] * g[j + 1] * e) * (h * half) + e * p[j + 1];
                        acc += wk[j] * p[j].norm_sqr();
                    }
                    input_noise[t] = acc;
                }
                InputNoiseForm::AsPrinted => {
                    let (mut s1, mut s2) = (zero, zero);
                    for j in 0..=t {
                        let w = tw(h, j, 0, t);
                        let fill = one - (-(u[j].re + u[j].re)).exp();
                        s1 += r[t - j].conj() * (g[j].norm_sqr() * fill * w);
                        s2 += r[t - j] * w;
                    }
                    let z = s1 * s2;
                    input_noise[t] = z.re;
                    imag[t] = z.im;
                }
            }
        }
    }

    let bath_part = match bath {
        BathNoise::None => vec![T::zero(); n],
        BathNoise::Local { gamma, n_th } => {
            let mut out = vec![T::zero(); n];
            let mut run = T::zero();
            for t in 1..n {
                run += (r[t - 1].norm_sqr() + r[t].norm_sqr()) * (h * half);
                out[t] = gamma * n_th * run;
            }
            out
        }
        BathNoise::Spectral(samples) => spectral_bath(r, samples, h),
    };

    let total = (0..n).map(|k| homogeneous[k] + cavity[k] + input_noise[k] + bath_part[k]).collect();
    Ok(OccupancySeries { grid: pair.grid, total, homogeneous, cavity, input_noise, bath: bath_part, imag })
}

const PHASOR_RESYNC: usize = 256;

/// `sum_j w_j J_j [(N_j + 1) |Q-_j|^2 + N_j |Q+_j|^2]` with
/// `Q-+_j(t) = int_0^t R(s) e^{-+ i omega_j s} ds` as running trapezoid sums.
fn spectral_bath<T: Real>(r: &[Cplx<T>], samples: &SpectralSamples<T>, h: T) -> Vec<T> {
    let n = r.len();
    let half = h * T::lit(0.5);
    let zero = cplx(T::zero(), T::zero());
    let nodes: Vec<usize> = (0..samples.len()).filter(|&j| samples.weighted_j[j] != T::zero()).collect();
    let k = nodes.len();
    let mut phasor = vec![cplx(T::one(), T::zero()); k];
    let step: Vec<Cplx<T>> = nodes.iter().map(|&j| unit(-samples.omega[j] * h)).collect();
    // closed running sums (all interior weights) for e^{-i w s} and e^{+i w s}
    let mut sm = vec![zero; k];
    let mut sp = vec![zero; k];
    let mut out = vec![T::zero(); n];
    for t in 0..n {
        if t % PHASOR_RESYNC == 0 {
            let tt = h * T::from_usize_lossy(t);
            for (slot, &j) in nodes.iter().enumerate() {
                phasor[slot] = unit(-samples.omega[j] * tt);
            }
        }
        let rt = r[t];
        let mut acc = T::zero();
        for slot in 0..k {
            let j = nodes[slot];
            let z = phasor[slot];
            let em = rt * z;
            let ep = rt * z.conj();
            if t > 0 {
                let qm = sm[slot] + em * half;
                let qp = sp[slot] + ep * half;
                let wj = samples.weighted_j[j];
                let nj = samples.occupation[j];
                acc += wj * ((nj + T::one()) * qm.norm_sqr() + nj * qp.norm_sqr());
            }
            let w = if t == 0 { half } else { h };
            sm[slot] += em * w;
            sp[slot] += ep * w;
            phasor[slot] = z * step[slot];
        }
        out[t] = acc;
    }
    out
}

#[inline]
fn unit<T: Real>(theta: T) -> Cplx<T> {
    let (s, c) = theta.sin_cos();
    cplx(c, s)
}

/// Direct double-sum evaluation of the same discretized expression,
/// `O(N^2)` per output point. Reference implementation for tests.
pub fn reference_phonon_number<T: Real>(
    pair: &PropagatorPair<T>,
    traj: &ClassicalTrajectory<T>,
    phase: &PhaseIntegral<T>,
    bath: BathNoise<'_, T>,
    init: InitialOccupations<T>,
    options: OccupancyOptions,
) -> Result<OccupancySeries<T>> {
    let inp = gather(pair, traj, phase, options)?;
    let Inputs { ref r, g, u, kappa, n, h } = inp;
    let zero = cplx(T::zero(), T::zero());
    let one = T::one();
    let mut out = OccupancySeries {
        grid: pair.grid,
        total: vec![T::zero(); n],
        homogeneous: vec![T::zero(); n],
        cavity: vec![T::zero(); n],
        input_noise: vec![T::zero(); n],
        bath: vec![T::zero(); n],
        imag: vec![T::zero(); n],
    };
    // bath correlation as a function of the lag index difference, both signs
    let corr = |d: i64| -> Cplx<T> {
        match bath {
            BathNoise::Spectral(s) => {
                let tau = h * T::lit(d as f64);
                (0..s.len()).fold(zero, |acc, j| {
                    let wj = s.weighted_j[j];
                    let nj = s.occupation[j];
                    acc + (unit(-s.omega[j] * tau) * (nj + one) + unit(s.omega[j] * tau) * nj) * wj
                })
            }
            _ => zero,
        }
    };
    let lags: Vec<Cplx<T>> = (-(n as i64)..=(n as i64)).map(corr).collect();
    for t in 0..n {
        let l2 = pair.l[t].norm_sqr();
        out.homogeneous[t] = (pair.m[t].norm_sqr() + l2) * init.m0 + l2;
        let wk = kappa_weights(h, kappa, t);
        let (mut cav, mut inn, mut bth) = (zero, zero, zero);
        for j1 in 0..=t {
            let w1 = tw(h, j1, 0, t);
            if w1 == T::zero() {
                continue;
            }
            let r1 = r[t - j1].conj();
            for j2 in 0..=t {
                let w = w1 * tw(h, j2, 0, t);
                let r12 = r1 * r[t - j2] * w;
                // initial photons
                let x1 = g[j1] * (-u[j1].conj()).exp();
                let x2 = g[j2] * (-u[j2].conj()).exp();
                let k1 = x1 * x2.conj() * init.n0 + x1.conj() * x2 * (init.n0 + one);
                cav += r12 * k1;
                if options.input_noise == InputNoiseForm::AsPrinted {
                    let fill = one - (-(u[j1].re + u[j1].re)).exp();
                    inn += r12 * (g[j1].norm_sqr() * fill);
                }
                bth += r12 * lags[(j1 as i64 - j2 as i64 + n as i64) as usize];
            }
        }
        // two-time input noise: int_0^t ds kappa(s) |int_s^t R(t - tau) G(tau) e^{-(U*(tau) - U*(s))}|^2
        if options.input_noise == InputNoiseForm::TwoTime && t > 0 {
            for s in 0..t {
                let mut p = zero;
                for tau in s..=t {
                    let w = tw(h, tau, s, t);
                    p += r[t - tau] * g[tau] * (u[s].conj() - u[tau].conj()).exp() * w;
                }
                inn += cplx(wk[s] * p.norm_sqr(), T::zero());
            }
        }
        if let BathNoise::Local { gamma, n_th } = bath {
            let s = (0..=t).fold(T::zero(), |acc, j| acc + tw(h, j, 0, t) * r[j].norm_sqr());
            bth = cplx(gamma * n_th * s, T::zero());
        }
        out.cavity[t] = cav.re;
        out.input_noise[t] = inn.re;
        out.bath[t] = bth.re;
        out.imag[t] = cav.im + inn.im + bth.im;
        out.total[t] = out.homogeneous[t] + cav.re + inn.re + bth.re;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{evolve_classical, ClassicalOptions, MeanFieldBath};
    use crate::model::{Schedule, SystemParams};
    use crate::propagator::{solve_ml, DressedKernel, PropagatorOptions};
    use crate::quadrature::QuadratureRule;
    use crate::spectral::{thermal_occupation, KernelTables, QuadOptions, SpectralModel};

    struct Run {
        pair: PropagatorPair<f64>,
        traj: ClassicalTrajectory<f64>,
        phase: PhaseIntegral<f64>,
        samples: SpectralSamples<f64>,
    }

    fn run(p: &SystemParams<f64>, grid: &TimeGrid<f64>, schedule: &Schedule<f64>, eta: f64) -> Run {
        let model = SpectralModel::OhmicFamily { eta, s: 0.5, omega0: 5.0 };
        let quad = QuadOptions { min_nodes_ohmic: 64, ..QuadOptions::default() };
        let q = QuadratureRule::for_model(&model, 1.0, grid.t_end(), &quad).unwrap();
        let tab = KernelTables::build(&model, &q, p.temperature_ratio, 1.0, grid).unwrap();
        let (traj, phase) =
            evolve_classical(p, MeanFieldBath::None, grid, schedule, ClassicalOptions::default()).unwrap();
        let k = DressedKernel::free(grid, 1.0).with_memory(&tab).unwrap().with_coupling(&traj, &phase).unwrap();
        let pair = solve_ml(&k, PropagatorOptions::default()).unwrap();
        let samples = SpectralSamples::new(&model, &q, p.temperature_ratio, 1.0);
        Run { pair, traj, phase, samples }
    }

    fn strong() -> SystemParams<f64> {
        // enough coupling that every component is visible over a short window
        SystemParams { g0: 1e-4, n0: 0.7, kappa: 0.3, ..SystemParams::cooling_reference() }
    }

    #[test]
    fn starts_at_m0() {
        let p = strong();
        let grid = TimeGrid::new(0.1, 50);
        let r = run(&p, &grid, &Schedule::constant(), 1e-5);
        let init = InitialOccupations { m0: p.m0, n0: p.n0 };
        let s = phonon_number(
            &r.pair,
            &r.traj,
            &r.phase,
            BathNoise::Spectral(&r.samples),
            init,
            OccupancyOptions::default(),
        )
        .unwrap();
        assert_eq!(s.total[0], 100.0);
        let c = component_report(&s, 0.0).unwrap();
        assert_eq!((c.homogeneous, c.cavity, c.input_noise, c.bath), (100.0, 0.0, 0.0, 0.0));
        assert!(component_report(&s, 0.05).is_err());
    }

    #[test]
    fn free_oscillator_conserves_occupation() {
        let grid = TimeGrid::new(0.1, 1000);
        let k = DressedKernel::free(&grid, 1.0);
        let pair = solve_ml(&k, PropagatorOptions::default()).unwrap();
        let p = SystemParams { g0: 0.0, ..SystemParams::cooling_reference() };
        let (traj, phase) =
            evolve_classical(&p, MeanFieldBath::None, &grid, &Schedule::constant(), ClassicalOptions::default())
                .unwrap();
        let init = InitialOccupations { m0: 100.0, n0: 0.0 };
        let s = phonon_number(&pair, &traj, &phase, BathNoise::None, init, OccupancyOptions::default()).unwrap();
        assert!(s.total.iter().all(|v: &f64| (v - 100.0).abs() < 1e-10));
        assert!(s.cavity.iter().chain(&s.input_noise).all(|&v| v == 0.0));
    }

    #[test]
    fn markovian_relaxation() {
        let grid = TimeGrid::new(0.5, 4000);
        let gamma = 1e-3;
        let ratio = (1.0f64 + 1.0 / 100.0).ln();
        let n_th = thermal_occupation(1.0, ratio, 1.0);
        let k = DressedKernel::free(&grid, 1.0).with_local_damping(gamma);
        let pair = solve_ml(&k, PropagatorOptions { rwa: true }).unwrap();
        let p = SystemParams { g0: 0.0, m0: 10.0, thermal_init: false, ..SystemParams::cooling_reference() };
        let (traj, phase) =
            evolve_classical(&p, MeanFieldBath::None, &grid, &Schedule::constant(), ClassicalOptions::default())
                .unwrap();
        let init = InitialOccupations { m0: 10.0, n0: 0.0 };
        let s =
            phonon_number(&pair, &traj, &phase, BathNoise::Local { gamma, n_th }, init, OccupancyOptions::default())
                .unwrap();
        for i in (0..=4000).step_by(400) {
            let t = grid.t(i);
            let want = 10.0 * (-gamma * t).exp() + n_th * (1.0 - (-gamma * t).exp());
            assert!((s.total[i] / want - 1.0).abs() < 1e-3, "t = {t}: {} vs {want}", s.total[i]);
        }
    }

    fn compare(a: &OccupancySeries<f64>, b: &OccupancySeries<f64>) {
        for i in 0..a.total.len() {
            for (x, y, what) in [
                (a.cavity[i], b.cavity[i], "cavity"),
                (a.input_noise[i], b.input_noise[i], "input"),
                (a.bath[i], b.bath[i], "bath"),
                (a.total[i], b.total[i], "total"),
            ] {
                assert!((x - y).abs() <= 1e-9 * y.abs().max(1e-6), "{what} at {i}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn fast_path_equals_double_sum() {
        let p = strong();
        let grid = TimeGrid::new(0.1, 240);
        let schedule = Schedule::kappa_switch(12.0, 0.9);
        let r = run(&p, &grid, &schedule, 1e-3);
        let init = InitialOccupations { m0: p.m0, n0: p.n0 };
        for options in [
            OccupancyOptions::default(),
            OccupancyOptions { response: ResponseForm::MainText, input_noise: InputNoiseForm::AsPrinted },
        ] {
            let bath = BathNoise::Spectral(&r.samples);
            let fast = phonon_number(&r.pair, &r.traj, &r.phase, bath, init, options).unwrap();
            let slow = reference_phonon_number(&r.pair, &r.traj, &r.phase, bath, init, options).unwrap();
            compare(&fast, &slow);
        }
        assert!(r.samples.len() >= 64);
    }

    #[test]
    fn components_are_nonnegative_and_real() {
        let p = strong();
        let grid = TimeGrid::new(0.05, 2000);
        let r = run(&p, &grid, &Schedule::constant(), 1e-4);
        let init = InitialOccupations { m0: p.m0, n0: p.n0 };
        let s = phonon_number(
            &r.pair,
            &r.traj,
            &r.phase,
            BathNoise::Spectral(&r.samples),
            init,
            OccupancyOptions::default(),
        )
        .unwrap();
        assert!(s.imag.iter().all(|&v| v == 0.0));
        assert!(s.cavity.iter().chain(&s.input_noise).chain(&s.bath).all(|&v| v >= 0.0));
        assert!(s.input_noise[2000] > 0.0 && s.cavity[2000] > 0.0 && s.bath[2000] > 0.0);
        assert!(s.total[2000] < s.total[0]);
    }

    #[test]
    fn zero_temperature_bath_is_positive_on_tiny_grid() {
        let grid = TimeGrid::new(0.7, 2);
        let p = SystemParams {
            g0: 0.0,
            temperature_ratio: 1e9,
            m0: 0.0,
            thermal_init: false,
            ..SystemParams::cooling_reference()
        };
        let r = run(&p, &grid, &Schedule::constant(), 1e-2);
        let init = InitialOccupations { m0: 0.0, n0: 0.0 };
        let bath = BathNoise::Spectral(&r.samples);
        let fast = phonon_number(&r.pair, &r.traj, &r.phase, bath, init, OccupancyOptions::default()).unwrap();
        let slow =
            reference_phonon_number(&r.pair, &r.traj, &r.phase, bath, init, OccupancyOptions::default()).unwrap();
        assert!(fast.bath[2] > 0.0 && fast.cavity[2] == 0.0 && fast.input_noise[2] == 0.0);
        assert!((fast.bath[2] - slow.bath[2]).abs() < 1e-12 * slow.bath[2]);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let p = strong();
        let r = run(&p, &TimeGrid::new(0.1, 20), &Schedule::constant(), 1e-5);
        let other = run(&p, &TimeGrid::new(0.2, 20), &Schedule::constant(), 1e-5);
        let init = InitialOccupations { m0: p.m0, n0: p.n0 };
        let err = phonon_number(&r.pair, &other.traj, &r.phase, BathNoise::None, init, OccupancyOptions::default());
        assert!(matches!(err, Err(Error::GridMismatch(_))));
    }
}
