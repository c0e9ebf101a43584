//! Singular eigenfunctions `phi^m(nu, mu)`, their rotated-frame angular parts
//! and the spherical-harmonic coefficients `c_l^m(nu)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::chandra::{check_order, GKernel};
use crate::error::{Error, Result};
use crate::medium::OpticalMedium;
use crate::quadrature::{pv_integral, Rules};
use crate::rotation::{harmonic_norm, mu_rotated, Direction, RotatedFrame};
use crate::specfun::{p_row, parity, q_row};
use crate::spectrum::{dispersion, lambda_weight};

/// Largest `|Lambda^m(nu)|` accepted when building a discrete eigenfunction.
pub const EIGENVALUE_TOLERANCE: f64 = 1e-10;

/// Smallest `|nu - mu(k)|` allowed when evaluating the regular part off the axis.
pub const POLE_GUARD: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Discrete,
    Continuum,
}

/// `phi^m(nu, mu) = (c nu / 2) P g^m(nu,mu)/(nu - mu) + lambda^m(nu) (1-nu^2)^{-|m|} delta(nu - mu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularEigenfunction {
    pub m: i32,
    pub nu: f64,
    pub branch: Branch,
    /// Zero on the discrete branch.
    pub delta_coeff: f64,
    half_c_nu: f64,
    kernel: GKernel<f64>,
}

fn weight(mu: f64, m: i32) -> f64 {
    (1.0 - mu * mu).powi(m.abs())
}

impl SingularEigenfunction {
    /// Eigenfunction at a discrete eigenvalue; `nu` must be a root of `Lambda^m`.
    pub fn discrete(nu: f64, m: i32, med: &OpticalMedium, rules: &Rules) -> Result<Self> {
        check_order(m, med)?;
        if nu.abs() <= 1.0 {
            return Err(Error::Domain("discrete eigenvalues lie outside [-1, 1]"));
        }
        let residual = dispersion(nu, m, med, rules)?;
        if residual.abs() > EIGENVALUE_TOLERANCE {
            return Err(Error::NotAnEigenvalue { nu, residual });
        }
        Ok(Self {
            m,
            nu,
            branch: Branch::Discrete,
            delta_coeff: 0.0,
            half_c_nu: 0.5 * med.albedo() * nu,
            kernel: GKernel::new(nu, m, med)?,
        })
    }

    pub fn continuum(nu: f64, m: i32, med: &OpticalMedium, rules: &Rules) -> Result<Self> {
        let lambda = lambda_weight(nu, m, med, rules)?;
        Ok(Self {
            m,
            nu,
            branch: Branch::Continuum,
            delta_coeff: lambda / weight(nu, m),
            half_c_nu: 0.5 * med.albedo() * nu,
            kernel: GKernel::new(nu, m, med)?,
        })
    }

    /// Dispatches on `|nu|`.
    pub fn new(nu: f64, m: i32, med: &OpticalMedium, rules: &Rules) -> Result<Self> {
        if nu.abs() < 1.0 {
            Self::continuum(nu, m, med, rules)
        } else {
            Self::discrete(nu, m, med, rules)
        }
    }

    pub fn kernel(&self) -> &GKernel<f64> {
        &self.kernel
    }

    /// `(c nu / 2) g^m(nu, mu)`, the numerator of the regular part.
    pub fn numerator(&self, mu: f64) -> f64 {
        self.half_c_nu * self.kernel.eval(mu)
    }

    /// `(c nu / 2) g^m(nu, mu)/(nu - mu)`; meaningful for `mu != nu`.
    pub fn regular(&self, mu: f64) -> f64 {
        self.numerator(mu) / (self.nu - mu)
    }

    /// Regular part at a complex projection `mu(k)`.
    pub fn regular_complex(&self, mu: Complex64) -> Result<Complex64> {
        let d = Complex64::new(self.nu, 0.0) - mu;
        if d.norm() <= POLE_GUARD {
            return Err(Error::PoleHit { distance: d.norm() });
        }
        Ok(self.kernel.eval(mu) * self.half_c_nu / d)
    }

    /// `int test(mu) phi(nu, mu) (1-mu^2)^{|m|} dmu`, the principal value and
    /// the delta term included on the continuum branch.
    pub fn integrate(&self, rules: &Rules, test: impl Fn(f64) -> f64) -> Result<f64> {
        let m = self.m;
        match self.branch {
            Branch::Discrete => Ok(rules
                .interval
                .integrate(|mu| test(mu) * self.regular(mu) * weight(mu, m))),
            Branch::Continuum => {
                let pv = pv_integral(&rules.interval, self.nu, |mu| test(mu) * self.numerator(mu) * weight(mu, m))?;
                Ok(pv + self.delta_coeff * test(self.nu) * weight(self.nu, m))
            }
        }
    }

    /// `Phi^m_nu(s; k) = phi^m(nu, mu(k)) (1-mu(k)^2)^{|m|/2} e^{i m phi(k)}`, discrete branch.
    pub fn eval_phi(&self, frame: &RotatedFrame, s: &Direction) -> Result<Complex64> {
        if self.branch != Branch::Discrete {
            return Err(Error::Domain("continuum eigenfunctions exist only under integrals"));
        }
        let mu = mu_rotated(s, &frame.params);
        Ok(self.regular_complex(mu)? * frame.combined_factor(self.m, s))
    }
}

/// `[2 pi Q(nu q) N]^{-1}`, turning `Phi` into its adjoint `Phi~`.
pub fn adjoint_weight(big_q: f64, norm: f64) -> f64 {
    1.0 / (2.0 * PI * big_q * norm)
}

/// `c_l^m(nu)` for `l = |m|..=l_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    pub m: i32,
    pub nu: f64,
    pub values: Vec<f64>,
}

impl CoeffTable {
    pub fn get(&self, l: usize) -> f64 {
        self.values[l - self.m.unsigned_abs() as usize]
    }

    pub fn l_max(&self) -> usize {
        self.m.unsigned_abs() as usize + self.values.len() - 1
    }
}

/// `c_l^m(nu) = int Phi^m_nu Y*_lm ds` at `q = 0`. Off the cut the Cauchy
/// integrals close on `2 p_min q_max`; on the cut they are deformed onto the
/// upper unit half-circle.
pub fn coeff_table(nu: f64, m: i32, med: &OpticalMedium, l_max: usize, rules: &Rules) -> Result<CoeffTable> {
    check_order(m, med)?;
    let a = m.unsigned_abs() as usize;
    if l_max < a {
        return Err(Error::Domain("coefficient table needs l_max >= |m|"));
    }
    if nu.abs() == 1.0 {
        return Err(Error::Domain("coefficients undefined at nu = +-1"));
    }
    let kernel = GKernel::new(nu, m, med)?;
    let w = kernel.weights();
    let n = a + w.len() - 1;
    let top = l_max.max(n);
    let half_c_nu = 0.5 * med.albedo() * nu;
    let p = p_row(nu, m, top);
    // <phi, p_l>_m for every l; c_l is 2 pi (-1)^m N_lm times this
    let mut moments = Vec::with_capacity(l_max - a + 1);
    if nu.abs() > 1.0 {
        let q = q_row(nu, m, top)?;
        for l in a..=l_max {
            let mut s = 0.0;
            for (k, wk) in w.iter().enumerate() {
                let lpp = a + k;
                let (lo, hi) = if lpp <= l { (lpp, l) } else { (l, lpp) };
                s += wk * 2.0 * p.get(lo) * q.get(hi);
            }
            moments.push(half_c_nu * s);
        }
    } else {
        let lambda = lambda_weight(nu, m, med, rules)?;
        let arc_rows: Vec<(Complex64, Complex64, LegendreArc)> = rules
            .arc
            .iter()
            .map(|(theta, wt)| {
                let z = Complex64::from_polar(1.0, theta);
                let dz = Complex64::new(0.0, 1.0) * z * wt;
                (z, dz, LegendreArc::new(z, m, top))
            })
            .collect();
        for l in a..=l_max {
            let mut s = 0.0;
            for (k, wk) in w.iter().enumerate() {
                let lpp = a + k;
                // int P P/(nu - mu) = -i pi F(nu) - int_arc F(z)/(nu - z) dz with F = P P
                let f_nu = weight(nu, m) * p.get(lpp) * p.get(l);
                let mut arc = Complex64::new(0.0, 0.0);
                for (z, dz, row) in &arc_rows {
                    let f = row.weight * row.p[lpp - a] * row.p[l - a];
                    arc += f / (Complex64::new(nu, 0.0) - z) * dz;
                }
                let pv = Complex64::new(0.0, -PI * f_nu) - arc;
                s += wk * pv.re;
            }
            moments.push(half_c_nu * s + lambda * p.get(l));
        }
    }
    let sign = parity(m as i64);
    let values = moments
        .iter()
        .enumerate()
        .map(|(k, v)| 2.0 * PI * sign * harmonic_norm(a + k, m) * v)
        .collect();
    Ok(CoeffTable { m, nu, values })
}

struct LegendreArc {
    weight: Complex64,
    p: Vec<Complex64>,
}

impl LegendreArc {
    fn new(z: Complex64, m: i32, top: usize) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self {
            weight: (one - z * z).powu(m.unsigned_abs()),
            p: p_row(z, m, top).values,
        }
    }
}

/// `int mu phi_i phi_k (1-mu^2)^{|m|} dmu / N_k` over discrete modes at `q = 0`.
/// `norms` carries the signed `N` of each mode.
pub fn biorthogonality(modes: &[SingularEigenfunction], norms: &[f64], rules: &Rules) -> Vec<Vec<f64>> {
    modes
        .iter()
        .map(|a| {
            modes
                .iter()
                .zip(norms)
                .map(|(b, nb)| {
                    rules
                        .interval
                        .integrate(|mu| mu * a.regular(mu) * b.regular(mu) * weight(mu, a.m))
                        / nb
                })
                .collect()
        })
        .collect()
}
