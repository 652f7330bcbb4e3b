//! Memory-dressed propagators of the mechanical fluctuation.
//!
//! With the cavity eliminated, `b(t) = M(t) b(0) + L(t) b^dag(0) + noise`,
//! where
//!
//! ```text
//! M' = -i omega_m M + int_0^t F(t, tau) [M + L](tau) dtau
//! L' =  i omega_m L + int_0^t F*(t, tau) [M + L](tau) dtau
//! F(t, tau) = f(t - tau) - [G*(t) G(tau) e^{-(U(t) - U(tau))} - c.c.]
//! ```
//!
//! Both `f` and the bracket are purely imaginary, so `F* = -F` and the two
//! memory integrals differ only in sign.

use crate::classical::{ClassicalTrajectory, PhaseIntegral};
use crate::error::{Error, Result};
use crate::etd::EtdStep;
use crate::model::TimeGrid;
use crate::scalar::{cplx, Cplx, Real};
use crate::spectral::KernelTables;

/// Guard on `|M|`.
pub const PROPAGATOR_DIVERGENCE: f64 = 1e6;

/// Reservoir part of the kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelBath<T> {
    /// No mechanical reservoir.
    None,
    /// Tabulated `Im f` and the vacuum correlation used under the RWA.
    Memory { f_imag: Vec<T>, c_vac: Vec<Cplx<T>> },
    /// Markovian local damping at rate `gamma` (energy), i.e. `-(gamma/2) M`
    /// and `-(gamma/2) L`.
    Local { gamma: T },
}

/// The dressed kernel `F` in factored form: stationary bath part plus the
/// separable radiation-pressure part built from `G(t)` and `U(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedKernel<T> {
    pub grid: TimeGrid<T>,
    pub omega_m: T,
    pub bath: KernelBath<T>,
    pub g: Vec<Cplx<T>>,
    pub u: Vec<Cplx<T>>,
}

impl<T: Real> DressedKernel<T> {
    /// Bare kernel: no bath and no cavity (`F = 0`).
    pub fn free(grid: &TimeGrid<T>, omega_m: T) -> Self {
        let z = cplx(T::zero(), T::zero());
        Self { grid: *grid, omega_m, bath: KernelBath::None, g: vec![z; grid.len()], u: vec![z; grid.len()] }
    }

    pub fn with_memory(mut self, tables: &KernelTables<T>) -> Result<Self> {
        if tables.f.len() < self.grid.len() {
            return Err(Error::GridMismatch(format!(
                "kernel table has {} lags, grid needs {}",
                tables.f.len(),
                self.grid.len()
            )));
        }
        let n = self.grid.len();
        self.bath = KernelBath::Memory {
            f_imag: tables.f[..n].iter().map(|z| z.im).collect(),
            c_vac: tables.c_vac[..n].to_vec(),
        };
        Ok(self)
    }

    pub fn with_local_damping(mut self, gamma: T) -> Self {
        self.bath = KernelBath::Local { gamma };
        self
    }

    /// Radiation-pressure dressing from a classical run.
    pub fn with_coupling(mut self, traj: &ClassicalTrajectory<T>, phase: &PhaseIntegral<T>) -> Result<Self> {
        if traj.len() < self.grid.len() || phase.u.len() < self.grid.len() {
            return Err(Error::GridMismatch("classical trajectory shorter than the propagator grid".into()));
        }
        let n = self.grid.len();
        self.g = traj.g[..n].to_vec();
        self.u = phase.u[..n].to_vec();
        Ok(self)
    }

    /// Raw coupling arrays, for callers that build them directly.
    pub fn with_coupling_series(mut self, g: Vec<Cplx<T>>, u: Vec<Cplx<T>>) -> Result<Self> {
        if g.len() != self.grid.len() || u.len() != self.grid.len() {
            return Err(Error::GridMismatch("coupling series length differs from the grid".into()));
        }
        self.g = g;
        self.u = u;
        Ok(self)
    }

    /// `F(t_n, t_j)` for `j <= n`.
    pub fn value(&self, n: usize, j: usize) -> Cplx<T> {
        let bath = match &self.bath {
            KernelBath::Memory { f_imag, .. } => cplx(T::zero(), f_imag[n - j]),
            _ => cplx(T::zero(), T::zero()),
        };
        let cav = self.g[n].conj() * self.g[j] * (self.u[j] - self.u[n]).exp();
        bath - (cav - cav.conj())
    }

    /// Kernel of the conjugate problem: `F -> F*`, `omega_m -> -omega_m`.
    /// Solving it yields `conj(M)`, `conj(L)`.
    pub fn conjugated(&self) -> Self {
        let bath = match &self.bath {
            KernelBath::Memory { f_imag, c_vac } => KernelBath::Memory {
                f_imag: f_imag.iter().map(|&v| -v).collect(),
                c_vac: c_vac.iter().map(|z| z.conj()).collect(),
            },
            other => other.clone(),
        };
        Self {
            grid: self.grid,
            omega_m: -self.omega_m,
            bath,
            g: self.g.iter().map(|z| z.conj()).collect(),
            u: self.u.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Whether `F(t, tau)` depends on `t - tau` only, sampled on a spread of
    /// pairs against `F(t - tau, 0)` with tolerance `1e-12` (relative to the
    /// kernel scale).
    pub fn check_stationarity(&self) -> bool {
        let n = self.grid.len();
        if n < 2 {
            return true;
        }
        let scale = (0..n).map(|k| self.value(k, 0).norm()).fold(T::zero(), T::max).max(T::lit(1e-300));
        let tol = T::lit(1e-12) * scale.max(T::one());
        let stride = (n / 37).max(1);
        for a in (0..n).step_by(stride) {
            for b in (a..n).step_by(stride) {
                if (self.value(b, a) - self.value(b - a, 0)).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PropagatorOptions {
    /// Rotating-wave approximation: `L = 0`, beam-splitter dressing only and
    /// the vacuum bath kernel `-int J e^{-i omega tau}`.
    pub rwa: bool,
}

/// `M(t)`, `L(t)` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorPair<T> {
    pub grid: TimeGrid<T>,
    pub m: Vec<Cplx<T>>,
    pub l: Vec<Cplx<T>>,
}

impl<T: Real> PropagatorPair<T> {
    /// Rows `(t, Re M, Im M, Re L, Im L, |M|^2 - |L|^2)`.
    pub fn rows(&self) -> impl Iterator<Item = [T; 6]> + '_ {
        (0..self.m.len()).map(move |i| {
            let (m, l) = (self.m[i], self.l[i]);
            [self.grid.t(i), m.re, m.im, l.re, l.im, m.norm_sqr() - l.norm_sqr()]
        })
    }
}

/// Solves the propagator equations by exponential-trapezoid stepping.
///
/// The rotation `-/+ i omega_m` (and local damping) is integrated exactly;
/// the memory integral is trapezoidal over the stored history. `F(t, t) = 0`
/// makes the history sum at the new point explicit; under the RWA the
/// vacuum kernel does not vanish at zero lag and the endpoint is solved
/// for. The cavity part costs `O(1)` per step through running sums, the
/// bath part `O(n)`.
pub fn solve_ml<T: Real>(kernel: &DressedKernel<T>, options: PropagatorOptions) -> Result<PropagatorPair<T>> {
    kernel.grid.check()?;
    let n = kernel.grid.len();
    if kernel.g.len() != n || kernel.u.len() != n {
        return Err(Error::GridMismatch("kernel coupling series length differs from the grid".into()));
    }
    let h = kernel.grid.dt;
    let half = T::lit(0.5);
    let zero = cplx(T::zero(), T::zero());
    let one = cplx(T::one(), T::zero());
    let gamma_half = match kernel.bath {
        KernelBath::Local { gamma } => gamma * half,
        _ => T::zero(),
    };
    let m_step = EtdStep::new(cplx(gamma_half, kernel.omega_m), h);
    let l_step = EtdStep::new(cplx(gamma_half, -kernel.omega_m), h);
    let (f_imag, c_vac) = match &kernel.bath {
        KernelBath::Memory { f_imag, c_vac } => (Some(f_imag.as_slice()), Some(c_vac.as_slice())),
        _ => (None, None),
    };
    let g = &kernel.g;
    let u = &kernel.u;

    let mut m = Vec::with_capacity(n);
    let mut l = Vec::with_capacity(n);
    m.push(one);
    l.push(zero);
    // history driving the memory integral: S = M + L (full) or M (RWA)
    let mut s: Vec<Cplx<T>> = vec![one];
    // running sums h sum_j c_j G_j e^{-(U_n - U_j)} S_j and the conjugate-phase partner
    let mut z_run = g[0] * s[0] * (h * half);
    let mut w_run = g[0].conj() * s[0] * (h * half);
    let mut i_prev = zero;

    for k in 0..n - 1 {
        let e = (u[k] - u[k + 1]).exp();
        let z_next = z_run * e;
        let mut i_next = -g[k + 1].conj() * z_next;
        if !options.rwa {
            let w_next = w_run * e.conj();
            i_next += g[k + 1] * w_next;
        }
        // bath history j = 0..=k at lag k+1-j
        if let Some(f) = f_imag {
            if options.rwa {
                let cv = c_vac.expect("memory bath carries vacuum table");
                let mut acc = cv[k + 1] * s[0] * half;
                for j in 1..=k {
                    acc += cv[k + 1 - j] * s[j];
                }
                i_next -= acc * h;
            } else {
                let mut acc = s[0] * (f[k + 1] * half);
                for j in 1..=k {
                    acc += s[j] * f[k + 1 - j];
                }
                i_next += cplx(-acc.im, acc.re) * h;
            }
        }

        let (m1, l1) = if options.rwa {
            // endpoint terms at t_{k+1}: -(h/2)(C_vac(0) + |G|^2) M_{k+1}
            let a1 = h * half * (c_vac.map_or(T::zero(), |cv| cv[0].re) + g[k + 1].norm_sqr());
            let base = m_step.decay * m[k] + m_step.w0 * i_prev + m_step.w1 * i_next;
            let m1 = base / (one + m_step.w1 * a1);
            // i_next feeds the next step's left end including the endpoint term
            i_next -= m1 * a1;
            (m1, zero)
        } else {
            (m_step.apply(m[k], i_prev, i_next), l_step.apply(l[k], -i_prev, -i_next))
        };
        let mag = m1.norm();
        if !(mag.is_finite() && mag <= T::lit(PROPAGATOR_DIVERGENCE)) {
            return Err(Error::Divergence {
                guard: "M",
                t: kernel.grid.t(k + 1).to_f64_lossy(),
                value: mag.to_f64_lossy(),
            });
        }
        m.push(m1);
        l.push(l1);
        let s1 = if options.rwa { m1 } else { m1 + l1 };
        s.push(s1);
        z_run = z_next + g[k + 1] * s1 * h;
        w_run = w_run * e.conj() + g[k + 1].conj() * s1 * h;
        i_prev = i_next;
    }
    Ok(PropagatorPair { grid: kernel.grid, m, l })
}
