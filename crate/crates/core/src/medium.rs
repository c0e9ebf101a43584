//! Optical parameters of a homogeneous medium and the nondimensional
//! quantities derived from them. Lengths downstream are in units of the
//! transport mean free path `1/mu_t`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Absorption and scattering coefficients (cm^-1) plus Legendre coefficients
/// `f_l` of the phase function, `f_0 = 1`. Coefficients past `order()` are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalMedium {
    mu_a: f64,
    mu_s: f64,
    f: Vec<f64>,
}

/// Single-scattering albedo `mu_s / (mu_a + mu_s)`.
pub fn albedo(mu_a: f64, mu_s: f64) -> Result<f64> {
    if !(mu_a > 0.0 && mu_a.is_finite()) {
        return Err(Error::InvalidMedium("mu_a must be positive and finite"));
    }
    if !(mu_s > 0.0 && mu_s.is_finite()) {
        return Err(Error::InvalidMedium("mu_s must be positive and finite"));
    }
    Ok(mu_s / (mu_a + mu_s))
}

/// Henyey-Greenstein coefficients `g^l`, `l = 0..=n`.
pub fn henyey_greenstein_coeffs(g: f64, n: usize) -> Result<Vec<f64>> {
    if !(g.abs() < 1.0) {
        return Err(Error::InvalidMedium("Henyey-Greenstein asymmetry needs |g| < 1"));
    }
    let mut out = Vec::with_capacity(n + 1);
    let mut p = 1.0;
    for _ in 0..=n {
        out.push(p);
        p *= g;
    }
    Ok(out)
}

impl OpticalMedium {
    pub fn new(mu_a: f64, mu_s: f64, f: Vec<f64>) -> Result<Self> {
        albedo(mu_a, mu_s)?;
        match f.first() {
            None => return Err(Error::InvalidMedium("phase function needs f_0")),
            Some(f0) if (f0 - 1.0).abs() > 1e-12 => {
                return Err(Error::InvalidMedium("phase function must have f_0 = 1"))
            }
            _ => {}
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMedium("phase-function coefficients must be finite"));
        }
        let mut f = f;
        f[0] = 1.0;
        Ok(Self { mu_a, mu_s, f })
    }

    pub fn isotropic(mu_a: f64, mu_s: f64) -> Result<Self> {
        Self::new(mu_a, mu_s, vec![1.0])
    }

    /// Linear anisotropic scattering, `N = 1`.
    pub fn linear(mu_a: f64, mu_s: f64, f1: f64) -> Result<Self> {
        Self::new(mu_a, mu_s, vec![1.0, f1])
    }

    pub fn henyey_greenstein(mu_a: f64, mu_s: f64, g: f64, n: usize) -> Result<Self> {
        Self::new(mu_a, mu_s, henyey_greenstein_coeffs(g, n)?)
    }

    /// Medium with `mu_t = 1` and the given albedo.
    pub fn from_albedo(c: f64, f: Vec<f64>) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::InvalidMedium("albedo must lie in (0, 1)"));
        }
        Self::new(1.0 - c, c, f)
    }

    pub fn mu_a(&self) -> f64 {
        self.mu_a
    }

    pub fn mu_s(&self) -> f64 {
        self.mu_s
    }

    pub fn mu_t(&self) -> f64 {
        self.mu_a + self.mu_s
    }

    pub fn albedo(&self) -> f64 {
        self.mu_s / (self.mu_a + self.mu_s)
    }

    /// Polynomial order `N` of the phase function.
    pub fn order(&self) -> usize {
        self.f.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.f
    }

    /// `f_l`, zero for `l > N`.
    pub fn coeff(&self, l: usize) -> f64 {
        self.f.get(l).copied().unwrap_or(0.0)
    }

    pub fn is_isotropic(&self) -> bool {
        self.f[1..].iter().all(|&v| v == 0.0)
    }

    /// `1 - c f_l`.
    pub fn sigma(&self, l: usize) -> f64 {
        1.0 - self.albedo() * self.coeff(l)
    }

    pub fn sigma_table(&self, l_max: usize) -> SigmaTable {
        SigmaTable {
            sigma: (0..=l_max.max(self.order())).map(|l| self.sigma(l)).collect(),
        }
    }

    /// Converts a length in cm to mean free paths.
    pub fn optical_length(&self, cm: f64) -> f64 {
        cm * self.mu_t()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaTable {
    pub sigma: Vec<f64>,
}

impl SigmaTable {
    pub fn get(&self, l: usize) -> f64 {
        self.sigma.get(l).copied().unwrap_or(1.0)
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }
}
