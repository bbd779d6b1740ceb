//! Pair potentials with closed-form derivatives up to order 7.
//!
//! All potentials are written in reduced form `φ(r) = g(r/ε)` so that the
//! rest length is `r = ε`. In lattice units `ε = 1`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Highest derivative order available in closed form.
pub const MAX_DERIVATIVE: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    Harmonic,
    #[serde(alias = "lj", alias = "lennard-jones")]
    LennardJones,
    Morse,
}

impl std::str::FromStr for PotentialKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "harmonic" => Ok(PotentialKind::Harmonic),
            "lj" | "lennardjones" | "lennard-jones" => Ok(PotentialKind::LennardJones),
            "morse" => Ok(PotentialKind::Morse),
            other => Err(Error::Config(format!("unknown potential '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPotential {
    kind: PotentialKind,
    morse_a: f64,
    scale: f64,
}

impl PairPotential {
    pub const DEFAULT_MORSE_A: f64 = 4.0;

    pub fn new(kind: PotentialKind, scale: f64, morse_a: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
        }
        if kind == PotentialKind::Morse && !(morse_a > 0.0) {
            return Err(Error::InvalidParameter(format!("Morse stiffness must be positive, got {morse_a}")));
        }
        Ok(PairPotential { kind, morse_a, scale })
    }

    /// `½(r/ε − 1)²`.
    pub fn harmonic(scale: f64) -> Result<Self> {
        Self::new(PotentialKind::Harmonic, scale, Self::DEFAULT_MORSE_A)
    }

    /// `(r/ε)⁻¹² − 2(r/ε)⁻⁶`, minimum −1 at `r = ε`.
    pub fn lennard_jones(scale: f64) -> Result<Self> {
        Self::new(PotentialKind::LennardJones, scale, Self::DEFAULT_MORSE_A)
    }

    /// `e^{−2a(r/ε−1)} − 2e^{−a(r/ε−1)}`, minimum −1 at `r = ε`.
    pub fn morse(scale: f64, a: f64) -> Result<Self> {
        Self::new(PotentialKind::Morse, scale, a)
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `φ^(j)(r)`.
    pub fn eval_derivative(&self, j: usize, r: f64) -> Result<f64> {
        if j > MAX_DERIVATIVE {
            return Err(Error::UnsupportedOrder(j));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain { what: format!("{:?} potential", self.kind), arg: r });
        }
        let t = r / self.scale;
        Ok(self.reduced(j, t) * self.scale.powi(-(j as i32)))
    }

    /// Derivatives of orders `0..=jmax` at `r`.
    pub fn eval_upto(&self, jmax: usize, r: f64) -> Result<[f64; MAX_DERIVATIVE + 1]> {
        if jmax > MAX_DERIVATIVE {
            return Err(Error::UnsupportedOrder(jmax));
        }
        let mut out = [0.0; MAX_DERIVATIVE + 1];
        for (j, o) in out.iter_mut().enumerate().take(jmax + 1) {
            *o = self.eval_derivative(j, r)?;
        }
        Ok(out)
    }

    fn reduced(&self, j: usize, t: f64) -> f64 {
        match self.kind {
            PotentialKind::Harmonic => match j {
                0 => 0.5 * (t - 1.0) * (t - 1.0),
                1 => t - 1.0,
                2 => 1.0,
                _ => 0.0,
            },
            PotentialKind::LennardJones => {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                let a = rising(12.0, j) * t.powi(-12 - j as i32);
                let b = rising(6.0, j) * t.powi(-6 - j as i32);
                sign * (a - 2.0 * b)
            }
            PotentialKind::Morse => {
                let a = self.morse_a;
                let e1 = (-a * (t - 1.0)).exp();
                (-2.0 * a).powi(j as i32) * e1 * e1 - 2.0 * (-a).powi(j as i32) * e1
            }
        }
    }

    /// `φ_ρ(s) = φ(s + Fρ)`.
    pub fn shifted(&self, f: f64, rho: i64) -> Result<ShiftedPotential> {
        if !(f > 0.0) {
            return Err(Error::Domain { what: "deformation gradient F".into(), arg: f });
        }
        if rho == 0 {
            return Err(Error::InvalidParameter("bond index must be nonzero".into()));
        }
        Ok(ShiftedPotential { base: *self, shift: f * rho as f64, rho })
    }
}

fn rising(a: f64, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (a + i as f64))
}

/// Interaction range `𝓡 = {1, …, r_cut}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteractionRange {
    r_cut: usize,
}

impl InteractionRange {
    pub fn new(r_cut: usize) -> Result<Self> {
        if r_cut == 0 {
            return Err(Error::InvalidParameter("r_cut must be at least 1".into()));
        }
        Ok(InteractionRange { r_cut })
    }

    pub fn r_cut(&self) -> usize {
        self.r_cut
    }

    pub fn bonds(&self) -> impl Iterator<Item = i64> {
        1..=self.r_cut as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedPotential {
    base: PairPotential,
    shift: f64,
    rho: i64,
}

impl ShiftedPotential {
    pub fn base(&self) -> &PairPotential {
        &self.base
    }

    pub fn rho(&self) -> i64 {
        self.rho
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn eval_derivative(&self, j: usize, s: f64) -> Result<f64> {
        self.base.eval_derivative(j, s + self.shift).map_err(|e| match e {
            Error::Domain { what, arg } => Error::Domain { what: format!("{what} (bond ρ={})", self.rho), arg },
            other => other,
        })
    }

    pub fn eval_upto(&self, jmax: usize, s: f64) -> Result<[f64; MAX_DERIVATIVE + 1]> {
        if jmax > MAX_DERIVATIVE {
            return Err(Error::UnsupportedOrder(jmax));
        }
        let mut out = [0.0; MAX_DERIVATIVE + 1];
        for (j, o) in out.iter_mut().enumerate().take(jmax + 1) {
            *o = self.eval_derivative(j, s)?;
        }
        Ok(out)
    }
}

/// Shifted potentials for every bond of `range`.
pub fn bond_potentials(p: &PairPotential, f: f64, range: InteractionRange) -> Result<Vec<ShiftedPotential>> {
    range.bonds().map(|rho| p.shifted(f, rho)).collect()
}

/// `M^(j,s) = Σ_ρ ρ^{j+s} sup_{g ∈ interval} |φ_ρ^(j)(g)|`.
///
/// The supremum is taken on a uniform grid of the interval (endpoints included).
pub fn decay_moment(pots: &[ShiftedPotential], j: usize, s: i32, interval: (f64, f64)) -> Result<f64> {
    let (lo, hi) = interval;
    if !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain { what: "decay moment interval".into(), arg: lo });
    }
    const SAMPLES: usize = 2001;
    let mut total = 0.0;
    for p in pots {
        let mut sup: f64 = 0.0;
        for i in 0..SAMPLES {
            let g = if hi == lo { lo } else { lo + (hi - lo) * i as f64 / (SAMPLES - 1) as f64 };
            sup = sup.max(p.eval_derivative(j, g)?.abs());
        }
        total += (p.rho().abs() as f64).powi(j as i32 + s) * sup;
    }
    Ok(total)
}
