//! Exponential time-differencing helpers for `y' = -lambda y + N(t)`.

use crate::scalar::{cplx, Cplx, Real};

const SERIES_RADIUS: f64 = 1.0;
const SERIES_TERMS: usize = 24;

/// `phi1(z) = (1 - e^{-z}) / z` and `psi(z) = (1 - e^{-z}(1 + z)) / z^2`.
pub(crate) fn phi_psi<T: Real>(z: Cplx<T>) -> (Cplx<T>, Cplx<T>) {
    let one = cplx(T::one(), T::zero());
    if z.norm() < T::lit(SERIES_RADIUS) {
        // phi1 = sum (-z)^k/(k+1)!,  psi = sum (-z)^k (k+1)/(k+2)!
        let mut phi = cplx(T::zero(), T::zero());
        let mut psi = phi;
        let mut pow = one;
        let mut fact = T::one(); // (k+1)!
        for k in 0..SERIES_TERMS {
            let kf = T::from_usize_lossy(k);
            fact *= kf + T::one();
            phi += pow / fact;
            psi += pow * ((kf + T::one()) / (fact * (kf + T::lit(2.0))));
            pow = -pow * z;
        }
        (phi, psi)
    } else {
        let e = (-z).exp();
        ((one - e) / z, (one - e * (one + z)) / (z * z))
    }
}

/// One exponential-trapezoid step, exact when `N` is linear over the step:
/// `y1 = e^{-z} y0 + h [psi N0 + (phi1 - psi) N1]`, `z = lambda h`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EtdStep<T> {
    pub decay: Cplx<T>,
    pub w0: Cplx<T>,
    pub w1: Cplx<T>,
}

impl<T: Real> EtdStep<T> {
    pub fn new(lambda: Cplx<T>, h: T) -> Self {
        let z = lambda * h;
        let (phi, psi) = phi_psi(z);
        Self { decay: (-z).exp(), w0: psi * h, w1: (phi - psi) * h }
    }

    #[inline]
    pub fn apply(&self, y0: Cplx<T>, n0: Cplx<T>, n1: Cplx<T>) -> Cplx<T> {
        self.decay * y0 + self.w0 * n0 + self.w1 * n1
    }

    /// Weight of a forcing held constant over the step: `h phi1`.
    #[inline]
    pub fn constant_weight(&self) -> Cplx<T> {
        self.w0 + self.w1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_and_closed_form_agree_at_the_seam() {
        for z in [cplx(0.999, 0.0), cplx(0.0, 0.999), cplx(-0.6, 0.7)] {
            let (p1, s1) = phi_psi::<f64>(z);
            let e = (-z).exp();
            let one = cplx(1.0, 0.0);
            let p2 = (one - e) / z;
            let s2 = (one - e * (one + z)) / (z * z);
            assert!((p1 - p2).norm() < 1e-13 && (s1 - s2).norm() < 1e-12, "{z}");
        }
        let (p, s) = phi_psi::<f64>(cplx(0.0, 0.0));
        assert_eq!((p.re, s.re), (1.0, 0.5));
    }

    #[test]
    fn exact_for_linear_forcing() {
        // y' = -l y + (a + b t), y(0) = 0; compare with closed form at h.
        let l = cplx(0.3, 2.0);
        let (a, b, h) = (cplx(1.0, -0.5), cplx(0.2, 0.1), 0.37);
        let st = EtdStep::new(l, h);
        let y = st.apply(cplx(0.0, 0.0), a, a + b * h);
        let e = (-l * h).exp();
        let one = cplx(1.0, 0.0);
        let exact = a * (one - e) / l + b * (l * h - one + e) / (l * l);
        assert!((y - exact).norm() < 1e-14);
    }
}
