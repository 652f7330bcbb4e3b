//! Second-moment equations of the cavity, the mirror and a discretized bath.
//!
//! An independent route to `N_b(t)`: the bath is a finite set of modes
//! `b_k` held at their thermal occupations, and the Gaussian second moments
//! `N_a, N_b, <a^dag b>, <a b>, <a^2>, <b^2>` and, per mode, `<a^dag b_k>`,
//! `<a b_k>`, `<b^dag b_k>`, `<b b_k>`, `<b_k^2>` are integrated with RK4.

use crate::classical::ClassicalTrajectory;
use crate::error::{Error, Result};
use crate::model::{SystemParams, TimeGrid};
use crate::scalar::{cplx, i_unit, Cplx, Real};
use crate::spectral::{thermal_occupation, BathModes};

/// Guard on `|N_a|`, `|N_b|`.
pub const MOMENT_DIVERGENCE: f64 = 1e9;

const SCALARS: usize = 6;
const BLOCKS: usize = 6;

/// Full moment vector at one instant.
///
/// Layout: `N_a, N_b, <a^dag b>, <a b>, <a^2>, <b^2>`, then six blocks of
/// length `K`: `<a^dag b_k>`, `<a b_k>`, `<b^dag b_k>`, `<b b_k>`,
/// `<b_k^2>`, and the heat-conduction auxiliary (the part of
/// `<b^dag b_k>` driven by `N_k - N_b` alone).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState<T> {
    pub data: Vec<Cplx<T>>,
    pub modes: usize,
}

impl<T: Real> MomentState<T> {
    pub fn initial(m0: T, n0: T, modes: usize) -> Self {
        let mut data = vec![cplx(T::zero(), T::zero()); SCALARS + BLOCKS * modes];
        data[0] = cplx(n0, T::zero());
        data[1] = cplx(m0, T::zero());
        Self { data, modes }
    }

    pub fn n_a(&self) -> Cplx<T> {
        self.data[0]
    }
    pub fn n_b(&self) -> Cplx<T> {
        self.data[1]
    }
    /// `<a^dag b>`.
    pub fn ab_dag(&self) -> Cplx<T> {
        self.data[2]
    }
    /// `<a b>`.
    pub fn ab(&self) -> Cplx<T> {
        self.data[3]
    }
    pub fn a2(&self) -> Cplx<T> {
        self.data[4]
    }
    pub fn b2(&self) -> Cplx<T> {
        self.data[5]
    }
    fn block(&self, b: usize) -> &[Cplx<T>] {
        &self.data[SCALARS + b * self.modes..SCALARS + (b + 1) * self.modes]
    }
    /// `<a^dag b_k>`.
    pub fn cav_dag_mode(&self) -> &[Cplx<T>] {
        self.block(0)
    }
    /// `<a b_k>`.
    pub fn cav_mode(&self) -> &[Cplx<T>] {
        self.block(1)
    }
    /// `<b^dag b_k>`.
    pub fn mirror_dag_mode(&self) -> &[Cplx<T>] {
        self.block(2)
    }
    /// `<b b_k>`.
    pub fn mirror_mode(&self) -> &[Cplx<T>] {
        self.block(3)
    }
    /// `<b_k^2>`.
    pub fn mode_sq(&self) -> &[Cplx<T>] {
        self.block(4)
    }
    pub fn heat(&self) -> &[Cplx<T>] {
        self.block(5)
    }
}

/// Instantaneous energy-flow rates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransportRates<T> {
    /// `dN_a/dt = -upsilon_kappa + upsilon_c + upsilon_sq`.
    pub upsilon_a: T,
    /// `dN_b/dt = -upsilon_c + upsilon_sq + delta_upsilon`.
    pub upsilon_b: T,
    /// Beam-splitter exchange mirror -> cavity, `i(G <a^dag b> - c.c.)`.
    pub upsilon_c: T,
    /// Pair creation, `i(G <a b>* - c.c.)`; feeds both modes.
    pub upsilon_sq: T,
    /// Cavity output flow `kappa N_a`.
    pub upsilon_kappa: T,
    /// Net flow from the reservoir into the mirror.
    pub delta_upsilon: T,
    /// The part of `delta_upsilon` driven by `N_k - N_b` alone.
    pub delta_upsilon_heat: T,
}

/// Transport rates of `state` under coupling `g` and cavity decay `kappa`.
pub fn transport_rates<T: Real>(
    state: &MomentState<T>,
    g: Cplx<T>,
    kappa: T,
    modes: &BathModes<T>,
) -> TransportRates<T> {
    let iu = i_unit::<T>();
    let x = g * state.ab_dag();
    let upsilon_c = (iu * (x - x.conj())).re;
    let y = g * state.ab().conj();
    let upsilon_sq = (iu * (y - y.conj())).re;
    let upsilon_kappa = kappa * state.n_a().re;
    let (e, p, hh) = (state.mirror_dag_mode(), state.mirror_mode(), state.heat());
    let mut dv = cplx(T::zero(), T::zero());
    let mut dh = cplx(T::zero(), T::zero());
    for k in 0..modes.len() {
        let v = modes.coupling[k];
        dv += (e[k].conj() - e[k] + p[k] - p[k].conj()) * v;
        dh += (hh[k].conj() - hh[k]) * v;
    }
    let delta_upsilon = (iu * dv).re;
    TransportRates {
        upsilon_a: -upsilon_kappa + upsilon_c + upsilon_sq,
        upsilon_b: -upsilon_c + upsilon_sq + delta_upsilon,
        upsilon_c,
        upsilon_sq,
        upsilon_kappa,
        delta_upsilon,
        delta_upsilon_heat: (iu * dh).re,
    }
}

/// Time series produced by [`evolve_moments`].
#[derive(Debug, Clone)]
pub struct MomentSeries<T> {
    pub grid: TimeGrid<T>,
    pub n_a: Vec<T>,
    pub n_b: Vec<T>,
    /// Largest `|Im N_a|`, `|Im N_b|` met along the run.
    pub max_imag: T,
    pub rates: Vec<TransportRates<T>>,
    pub final_state: MomentState<T>,
}

impl<T: Real> MomentSeries<T> {
    /// Rows `(t, N_a, N_b, upsilon_a, upsilon_b, upsilon_c, upsilon_kappa,
    /// delta_upsilon, upsilon_sq, delta_upsilon_heat)`.
    pub fn rows(&self) -> impl Iterator<Item = [T; 10]> + '_ {
        (0..self.n_b.len()).map(move |i| {
            let r = &self.rates[i];
            [
                self.grid.t(i),
                self.n_a[i],
                self.n_b[i],
                r.upsilon_a,
                r.upsilon_b,
                r.upsilon_c,
                r.upsilon_kappa,
                r.delta_upsilon,
                r.upsilon_sq,
                r.delta_upsilon_heat,
            ]
        })
    }
}

struct Coefficients<T> {
    g: Cplx<T>,
    delta: T,
    kappa: T,
}

fn derivative<T: Real>(
    y: &[Cplx<T>],
    out: &mut [Cplx<T>],
    c: &Coefficients<T>,
    omega_m: T,
    modes: &BathModes<T>,
    occ: &[T],
) {
    let k_count = modes.len();
    let iu = i_unit::<T>();
    let one = T::one();
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let (g, gs) = (c.g, c.g.conj());
    let (delta, kappa, w) = (c.delta, c.kappa, omega_m);
    let (na, nb, c0, p0, a2, b2) = (y[0], y[1], y[2], y[3], y[4], y[5]);
    let blk = |b: usize| SCALARS + b * k_count;
    let (ic, id, ie, ip, iq, ih) = (blk(0), blk(1), blk(2), blk(3), blk(4), blk(5));

    let mut s_c0 = cplx(T::zero(), T::zero()); // sum V (c_k + d_k*)
    let mut s_p0 = s_c0; // sum V (d_k + c_k*)
    let mut s_b2 = s_c0; // sum V (p_k + e_k*)
    let mut s_nb = s_c0; // sum V (p_k - p_k* + e_k* - e_k)
    for k in 0..k_count {
        let v = modes.coupling[k];
        let wk = modes.omega[k];
        let (ck, dk, ek, pk, qk, hk) = (y[ic + k], y[id + k], y[ie + k], y[ip + k], y[iq + k], y[ih + k]);
        s_c0 += (ck + dk.conj()) * v;
        s_p0 += (dk + ck.conj()) * v;
        s_b2 += (pk + ek.conj()) * v;
        s_nb += (pk - pk.conj() + ek.conj() - ek) * v;
        let nk = occ[k];
        let pe = pk + ek;
        out[ic + k] = -cplx(kappa * half, wk - delta) * ck - iu * gs * pe - iu * (c0 + p0.conj()) * v;
        out[id + k] = -cplx(kappa * half, delta + wk) * dk + iu * g * pe - iu * (p0 + c0.conj()) * v;
        out[ie + k] = iu * (w - wk) * ek - iu * (gs * dk + g * ck) + iu * (qk + nk - nb - b2.conj()) * v;
        out[ip + k] = -iu * (w + wk) * pk + iu * (gs * dk + g * ck) - iu * (qk + nk + b2 + nb + one) * v;
        out[iq + k] = -iu * (two * wk) * qk - iu * (pk + ek) * (two * v);
        out[ih + k] = iu * (w - wk) * hk + iu * (-nb + nk) * v;
    }
    let bs = g * c0;
    let sq = g * p0.conj();
    out[0] = -na * kappa + iu * (bs - bs.conj()) + iu * (sq - sq.conj());
    out[1] = -iu * (bs - bs.conj()) + iu * (sq - sq.conj()) + iu * s_nb;
    out[2] = -cplx(kappa * half, w - delta) * c0 - iu * (gs * b2 + gs * nb - gs * na - g * a2.conj()) - iu * s_c0;
    out[3] = -cplx(kappa * half, delta + w) * p0 + iu * (g * b2 + g * nb + gs * a2 + g * (na + one)) - iu * s_p0;
    out[4] = -cplx(kappa, two * delta) * a2 + iu * two * g * (p0 + c0.conj());
    out[5] = -iu * (two * w) * b2 + iu * two * (gs * p0 + g * c0) - iu * two * s_b2;
}

/// Integrates the moment equations on `grid` with classical RK4.
///
/// `G(t)` and `Delta'(t)` come from `traj` (Hermite-interpolated at the
/// stage times); `kappa` is the per-step value stored in `traj`. The bath
/// occupations are fixed at their thermal values.
pub fn evolve_moments<T: Real>(
    params: &SystemParams<T>,
    modes: &BathModes<T>,
    grid: &TimeGrid<T>,
    traj: &ClassicalTrajectory<T>,
) -> Result<MomentSeries<T>> {
    grid.check()?;
    if !grid.matches(&traj.grid) || traj.len() < grid.len() {
        return Err(Error::GridMismatch("moment grid must match the classical trajectory grid".into()));
    }
    let k = modes.len();
    let occ: Vec<T> =
        modes.omega.iter().map(|&w| thermal_occupation(w, params.temperature_ratio, params.omega_m)).collect();
    let mut state = MomentState::initial(params.m0, params.n0, k);
    let len = state.data.len();
    let zero = cplx(T::zero(), T::zero());
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![zero; len], vec![zero; len], vec![zero; len], vec![zero; len], vec![zero; len]);
    let n = grid.len();
    let h = grid.dt;
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);

    let mut n_a = Vec::with_capacity(n);
    let mut n_b = Vec::with_capacity(n);
    let mut rates = Vec::with_capacity(n);
    let mut max_imag = T::zero();
    let record = |state: &MomentState<T>,
                  i: usize,
                  n_a: &mut Vec<T>,
                  n_b: &mut Vec<T>,
                  rates: &mut Vec<TransportRates<T>>,
                  mi: &mut T| {
        n_a.push(state.n_a().re);
        n_b.push(state.n_b().re);
        *mi = mi.max(state.n_a().im.abs()).max(state.n_b().im.abs());
        let kap = traj.kappa.get(i).or(traj.kappa.last()).copied().unwrap_or(params.kappa);
        rates.push(transport_rates(state, traj.g[i], kap, modes));
    };
    record(&state, 0, &mut n_a, &mut n_b, &mut rates, &mut max_imag);

    for step in 0..n - 1 {
        let t0 = grid.t(step);
        let kappa = traj.kappa[step];
        let coeffs = |t: T| {
            let (g, delta) = traj.coupling_at(t);
            Coefficients { g, delta, kappa }
        };
        let (c0, c_mid, c1) = (coeffs(t0), coeffs(t0 + h * half), coeffs(t0 + h));
        let y = &state.data;
        derivative(y, &mut k1, &c0, params.omega_m, modes, &occ);
        for i in 0..len {
            tmp[i] = y[i] + k1[i] * (h * half);
        }
        derivative(&tmp, &mut k2, &c_mid, params.omega_m, modes, &occ);
        for i in 0..len {
            tmp[i] = y[i] + k2[i] * (h * half);
        }
        derivative(&tmp, &mut k3, &c_mid, params.omega_m, modes, &occ);
        for i in 0..len {
            tmp[i] = y[i] + k3[i] * h;
        }
        derivative(&tmp, &mut k4, &c1, params.omega_m, modes, &occ);
        for i in 0..len {
            state.data[i] += (k1[i] + (k2[i] + k3[i]) * T::lit(2.0) + k4[i]) * (h * sixth);
        }
        let (a, b) = (state.n_a().norm(), state.n_b().norm());
        let lim = T::lit(MOMENT_DIVERGENCE);
        if !(a <= lim && b <= lim) {
            let (guard, value) = if a > lim || a.is_nan() { ("N_a", a) } else { ("N_b", b) };
            return Err(Error::Divergence { guard, t: grid.t(step + 1).to_f64_lossy(), value: value.to_f64_lossy() });
        }
        record(&state, step + 1, &mut n_a, &mut n_b, &mut rates, &mut max_imag);
    }
    Ok(MomentSeries { grid: *grid, n_a, n_b, max_imag, rates, final_state: state })
}

/// Largest residuals `|dN_a/dt - upsilon_a|`, `|dN_b/dt - upsilon_b|` with
/// central differences over the interior points.
pub fn finite_difference_audit<T: Real>(series: &MomentSeries<T>) -> Result<(T, T)> {
    let n = series.n_b.len();
    if n < 3 {
        return Err(Error::DegenerateGrid(format!("audit needs at least 3 points, got {n}")));
    }
    let two_h = series.grid.dt * T::lit(2.0);
    let mut ra = T::zero();
    let mut rb = T::zero();
    for i in 1..n - 1 {
        let da = (series.n_a[i + 1] - series.n_a[i - 1]) / two_h;
        let db = (series.n_b[i + 1] - series.n_b[i - 1]) / two_h;
        ra = ra.max((da - series.rates[i].upsilon_a).abs());
        rb = rb.max((db - series.rates[i].upsilon_b).abs());
    }
    Ok((ra, rb))
}
