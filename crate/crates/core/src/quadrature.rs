//! Composite Gauss-Legendre rules on the frequency axis.

use crate::scalar::Real;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            z = 0.0;
            dp = 1.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n == 1 {
        w[0] = 2.0;
    }
    (x, w)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy)]
pub struct NeumaierSum<T> {
    sum: T,
    comp: T,
}

impl<T: Real> Default for NeumaierSum<T> {
    fn default() -> Self {
        Self { sum: T::zero(), comp: T::zero() }
    }
}

impl<T: Real> NeumaierSum<T> {
    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

/// A positive-weight quadrature rule over frequencies, nodes strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    /// Composite rule with `panels` equal panels of `per_panel` points on
    /// `[lo, hi]`.
    ///
    /// With `root_first_panel`, the first panel is mapped through
    /// `omega = lo + h y^2`, which absorbs integrable `(omega - lo)^(-1/2)`
    /// and `sqrt(omega - lo)` behaviour at the lower edge.
    pub fn composite(lo: T, hi: T, panels: usize, per_panel: usize, root_first_panel: bool) -> Self {
        let (x, w) = gauss_legendre(per_panel);
        let h = (hi - lo) / T::from_usize_lossy(panels);
        let half = T::lit(0.5);
        let mut nodes = Vec::with_capacity(panels * per_panel);
        let mut weights = Vec::with_capacity(panels * per_panel);
        for p in 0..panels {
            let a = lo + h * T::from_usize_lossy(p);
            for (xi, wi) in x.iter().zip(&w) {
                let y = (T::lit(*xi) + T::one()) * half;
                let wy = T::lit(*wi) * half;
                if p == 0 && root_first_panel {
                    nodes.push(a + h * y * y);
                    weights.push(T::lit(2.0) * h * y * wy);
                } else {
                    nodes.push(a + h * y);
                    weights.push(h * wy);
                }
            }
        }
        Self { nodes, weights }
    }

    /// A single node carrying the given weight.
    pub fn atom(node: T, weight: T) -> Self {
        Self { nodes: vec![node], weights: vec![weight] }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_j w_j g(omega_j)`, compensated: oscillatory kernels cancel to
    /// many orders below the size of their terms at long lags.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut g: F) -> T {
        let mut acc = NeumaierSum::default();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * g(x));
        }
        acc.value()
    }
}
