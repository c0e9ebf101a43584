//! Geometry of the rotated reference frame: the complex direction
//! `k = (-i nu q, Q(nu q))`, the projection `mu(k)` and spherical harmonics
//! referred to `k`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::specfun::{factorial_ratio, legendre_seed, p_row, parity, wigner_d_imag, WignerTable};

/// Unit vector given by polar cosine and azimuth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub mu: f64,
    pub phi: f64,
}

impl Direction {
    pub fn new(mu: f64, phi: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&mu) || !phi.is_finite() {
            return Err(Error::Domain("direction needs mu in [-1, 1] and finite phi"));
        }
        Ok(Self { mu, phi })
    }

    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self { mu: theta.cos(), phi }
    }

    pub fn sin_theta(&self) -> f64 {
        (1.0 - self.mu * self.mu).max(0.0).sqrt()
    }

    pub fn reversed(&self) -> Self {
        Self {
            mu: -self.mu,
            phi: self.phi + PI,
        }
    }

    /// Rotation about the z-axis.
    pub fn turned(&self, angle: f64) -> Self {
        Self {
            mu: self.mu,
            phi: self.phi + angle,
        }
    }
}

/// Spectral parameter and transverse wave vector of one elementary solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameParams {
    pub nu: f64,
    pub q: [f64; 2],
    pub qmag: f64,
    pub phi_q: f64,
    /// `Q(nu q) = sqrt(1 + (nu q)^2)`
    pub big_q: f64,
}

impl FrameParams {
    pub fn new(nu: f64, q: [f64; 2]) -> Self {
        let qmag = q[0].hypot(q[1]);
        let phi_q = q[1].atan2(q[0]);
        Self::polar(nu, qmag, phi_q)
    }

    pub fn polar(nu: f64, qmag: f64, phi_q: f64) -> Self {
        Self {
            nu,
            q: [qmag * phi_q.cos(), qmag * phi_q.sin()],
            qmag,
            phi_q,
            big_q: (nu * qmag).hypot(1.0),
        }
    }

    /// `nu |q|`
    pub fn x(&self) -> f64 {
        self.nu * self.qmag
    }

    /// Azimuth of `k`. At `q = 0` the frame is the lab frame itself.
    pub fn phi_k(&self) -> f64 {
        if self.qmag == 0.0 {
            0.0
        } else if self.nu > 0.0 {
            self.phi_q + PI
        } else {
            self.phi_q
        }
    }
}

/// `mu(k) = s . k = -i nu q sin(theta) cos(phi - phi_q) + Q cos(theta)`.
pub fn mu_rotated(s: &Direction, fp: &FrameParams) -> Complex64 {
    Complex64::new(
        fp.big_q * s.mu,
        -fp.x() * s.sin_theta() * (s.phi - fp.phi_q).cos(),
    )
}

/// `sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!)`
pub fn harmonic_norm(l: usize, m: i32) -> f64 {
    ((2 * l + 1) as f64 / (4.0 * PI) * factorial_ratio(l, m)).sqrt()
}

/// Lab-frame `Y_lm(s)` with the Condon-Shortley phase.
pub fn spherical_harmonic(l: usize, m: i32, s: &Direction) -> Complex64 {
    let a = m.unsigned_abs() as usize;
    if a > l {
        return Complex64::new(0.0, 0.0);
    }
    let p = p_row(s.mu, m, l).get(l);
    let big_p = parity(m as i64) * s.sin_theta().powi(a as i32) * p;
    Complex64::from_polar(harmonic_norm(l, m) * big_p, m as f64 * s.phi)
}

/// Wigner table of one frame, reused across directions.
#[derive(Debug, Clone)]
pub struct RotatedFrame {
    pub params: FrameParams,
    wigner: WignerTable,
}

impl RotatedFrame {
    pub fn new(params: FrameParams, l_max: usize) -> Self {
        Self {
            params,
            wigner: wigner_d_imag(params.x(), l_max),
        }
    }

    pub fn l_max(&self) -> usize {
        self.wigner.l_max()
    }

    /// `Y_lm(s; k) = sum_m' e^{-i m' phi_k} d^l_{m'm}(theta_k) Y_lm'(s)`.
    pub fn rotated_harmonic(&self, l: usize, m: i32, s: &Direction) -> Complex64 {
        self.rotate_row(l, m, &harmonic_row(l, s))
    }

    fn rotate_row(&self, l: usize, m: i32, row: &[Complex64]) -> Complex64 {
        assert!(l <= self.l_max(), "rotated harmonic above table order");
        let li = l as i32;
        let phi_k = self.params.phi_k();
        let mut acc = Complex64::new(0.0, 0.0);
        for (mp, y) in (-li..=li).zip(row) {
            let d = self.wigner.get(l, mp, m);
            if d == Complex64::new(0.0, 0.0) {
                continue;
            }
            acc += Complex64::from_polar(1.0, -(mp as f64) * phi_k) * d * y;
        }
        acc
    }

    /// `(1 - mu(k)^2)^{|m|/2} e^{i m phi(k)}`, the regular product. It is the
    /// rotated image of `sin^|m| e^{i m phi}`, i.e. `Y_{|m|m}(s;k)` rescaled.
    pub fn combined_factor(&self, m: i32, s: &Direction) -> Complex64 {
        self.combined_factor_cached(m, &HarmonicCache::new(s, m.unsigned_abs() as usize))
    }

    pub fn combined_factor_cached(&self, m: i32, cache: &HarmonicCache) -> Complex64 {
        if m == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let a = m.unsigned_abs() as usize;
        let scale = harmonic_norm(a, m) * parity(m as i64) * legendre_seed(m);
        self.rotate_row(a, m, &cache.rows[a]) / scale
    }

    /// `e^{i m phi(k)}` alone, on the principal branch of `(1 - mu(k)^2)^{-|m|/2}`.
    pub fn azimuthal_phase(&self, m: i32, s: &Direction) -> Result<Complex64> {
        let mu = mu_rotated(s, &self.params);
        let w = Complex64::new(1.0, 0.0) - mu * mu;
        if w.norm() < 1e-300 {
            return Err(Error::Domain("mu(k)^2 = 1: azimuth of k undefined"));
        }
        Ok(self.combined_factor(m, s) / w.sqrt().powu(m.unsigned_abs()))
    }
}

/// `combined_factor` continued to complex `nu`: the `|m|`-th power of `s`
/// projected on `e_theta +- i e_phi` of the frame of `k`. `big_q` picks the
/// branch of `Q(nu q)`.
pub fn combined_factor_continued(nu: Complex64, big_q: Complex64, qmag: f64, phi_q: f64, m: i32, s: &Direction) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let x = nu * qmag;
    let (phi_k, sin_k) = if qmag == 0.0 {
        (0.0, Complex64::new(0.0, 0.0))
    } else if nu.re > 0.0 {
        (phi_q + PI, i * x)
    } else {
        (phi_q, -i * x)
    };
    let cos_k = big_q;
    let st = s.sin_theta();
    let (sx, sy) = (st * s.phi.cos(), st * s.phi.sin());
    let along = sx * phi_k.cos() + sy * phi_k.sin();
    let across = -sx * phi_k.sin() + sy * phi_k.cos();
    let e_theta = cos_k * along - sin_k * s.mu;
    let sense = if m >= 0 { 1.0 } else { -1.0 };
    (e_theta + i * (across * sense)).powu(m.unsigned_abs())
}

/// Lab-frame `Y_lm'(s)` for all `|m'| <= l`, indexed by `m' + l`.
pub fn harmonic_row(l: usize, s: &Direction) -> Vec<Complex64> {
    let li = l as i32;
    (-li..=li).map(|mp| spherical_harmonic(l, mp, s)).collect()
}

/// Lab harmonic rows of one direction for `l <= l_max`.
#[derive(Debug, Clone)]
pub struct HarmonicCache {
    rows: Vec<Vec<Complex64>>,
}

impl HarmonicCache {
    pub fn new(s: &Direction, l_max: usize) -> Self {
        Self {
            rows: (0..=l_max).map(|l| harmonic_row(l, s)).collect(),
        }
    }
}
