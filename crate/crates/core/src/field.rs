//! Smooth periodic fields on `[−N, N)` with evaluable derivatives.

use std::f64::consts::FRAC_PI_2;

/// A 2N-periodic field with derivatives up to [`SmoothField::max_order`].
pub trait SmoothField: Sync {
    /// Half-period `N`.
    fn half_period(&self) -> usize;

    /// Highest derivative order that can be evaluated.
    fn max_order(&self) -> usize;

    /// `∇^j u(x)`; orders above `max_order` return 0 or a piecewise value.
    fn derivative(&self, j: usize, x: f64) -> f64;

    fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// Derivatives of orders `0..out.len()` at `x`.
    fn derivatives(&self, x: f64, out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.derivative(j, x);
        }
    }
}

/// Wraps `x` into `[−N, N)`.
pub fn wrap(x: f64, n: usize) -> f64 {
    let p = 2.0 * n as f64;
    let y = (x + n as f64).rem_euclid(p);
    y - n as f64
}

/// `u(x) = Σ a_i sin(k_i x + θ_i)` with `k_i = π m_i / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    n: usize,
    modes: Vec<(f64, usize, f64)>,
}

impl FourierField {
    /// Modes given as `(amplitude, integer mode m, phase)`.
    pub fn new(n: usize, modes: Vec<(f64, usize, f64)>) -> Self {
        FourierField { n, modes }
    }

    /// `amplitude · sin(π m x / N)`.
    pub fn sine(n: usize, amplitude: f64, m: usize) -> Self {
        Self::new(n, vec![(amplitude, m, 0.0)])
    }

    /// `amplitude · cos(π m x / N)`.
    pub fn cosine(n: usize, amplitude: f64, m: usize) -> Self {
        Self::new(n, vec![(amplitude, m, FRAC_PI_2)])
    }

    pub fn wavenumber(&self, m: usize) -> f64 {
        std::f64::consts::PI * m as f64 / self.n as f64
    }
}

impl SmoothField for FourierField {
    fn half_period(&self) -> usize {
        self.n
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }

    fn derivative(&self, j: usize, x: f64) -> f64 {
        self.modes
            .iter()
            .map(|&(a, m, th)| {
                let k = self.wavenumber(m);
                let s = match j % 4 {
                    0 => (k * x + th).sin(),
                    1 => (k * x + th).cos(),
                    2 => -(k * x + th).sin(),
                    _ => -(k * x + th).cos(),
                };
                a * k.powi(j as i32) * s
            })
            .sum()
    }
}

/// The zero field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroField {
    pub n: usize,
}

impl SmoothField for ZeroField {
    fn half_period(&self) -> usize {
        self.n
    }
    fn max_order(&self) -> usize {
        usize::MAX
    }
    fn derivative(&self, _j: usize, _x: f64) -> f64 {
        0.0
    }
}

/// Samples `u` at the lattice sites `ξ = −N..N−1`.
pub fn sample_sites(u: &dyn SmoothField) -> Vec<f64> {
    let n = u.half_period() as i64;
    (-n..n).map(|xi| u.value(xi as f64)).collect()
}
