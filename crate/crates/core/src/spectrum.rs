//! Dispersion function `Lambda^m(z)`, continuum weight `lambda^m(nu)`,
//! discrete eigenvalues and the normalization factors of both spectra.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::chandra::{check_order, GKernel};
use crate::error::{Error, Result};
use crate::medium::OpticalMedium;
use crate::quadrature::{pv_integral, Rules};
use crate::scalar::Scalar;
use crate::specfun::q_row;

/// Below this distance from `[-1, 1]` the Cauchy integral in `Lambda` is
/// evaluated with the pole subtracted.
const NEAR_SEGMENT: f64 = 0.05;

/// Scan grid size in `1/nu`.
pub const SCAN_POINTS: usize = 4096;

/// Largest root residual accepted by [`find_discrete`].
pub const ROOT_RESIDUAL: f64 = 1e-12;

fn weight_power<T: Scalar>(mu: T, a: usize) -> T {
    (T::one() - mu * mu).pow_n(a as u32)
}

/// `lambda^m(nu) = 1 - (c nu / 2) PV int g^m(nu,mu) (1-mu^2)^{|m|} / (nu - mu) dmu`.
pub fn lambda_weight(nu: f64, m: i32, med: &OpticalMedium, rules: &Rules) -> Result<f64> {
    check_order(m, med)?;
    if !(nu > -1.0 && nu < 1.0) {
        return Err(Error::Domain("continuum weight needs nu inside (-1, 1)"));
    }
    let a = m.unsigned_abs() as usize;
    let kernel = GKernel::new(nu, m, med)?;
    let pv = pv_integral(&rules.interval, nu, |mu| kernel.eval(mu) * weight_power(mu, a))?;
    Ok(1.0 - 0.5 * med.albedo() * nu * pv)
}

fn distance_to_segment(z: num_complex::Complex64) -> f64 {
    let x = z.re.clamp(-1.0, 1.0);
    ((z.re - x).powi(2) + z.im * z.im).sqrt()
}

/// `Lambda^m(z) = 1 - (c z / 2) int g^m(z,mu) (1-mu^2)^{|m|} / (z - mu) dmu`
/// for `z` off `[-1, 1]`, real or complex.
pub fn dispersion<T: Scalar>(z: T, m: i32, med: &OpticalMedium, rules: &Rules) -> Result<T> {
    check_order(m, med)?;
    let zc = z.to_complex();
    if zc.im == 0.0 && zc.re.abs() <= 1.0 {
        return Err(Error::Domain("dispersion function is cut on [-1, 1]"));
    }
    let a = m.unsigned_abs() as usize;
    let kernel = GKernel::new(z, m, med)?;
    let mut integral = T::zero();
    if distance_to_segment(zc) < NEAR_SEGMENT {
        let big_g = |mu: T| kernel.eval(mu) * weight_power(mu, a);
        // the subtracted numerator is a polynomial in mu, so Gauss is exact
        let gz = big_g(z);
        for (x, w) in rules.interval.iter() {
            integral += (big_g(T::real(x)) - gz) / (z - T::real(x)) * w;
        }
        integral += gz * z.cauchy_log();
    } else {
        // termwise: int (1-mu^2)^{|m|} p_l^m / (z - mu) = 2 q_l^m(z); no cancellation at large z
        let q = q_row(z, m, med.order())?;
        for (k, w) in kernel.weights().iter().enumerate() {
            integral += *w * q.get(a + k) * 2.0;
        }
    }
    Ok(T::one() - z * integral * (0.5 * med.albedo()))
}

/// `dLambda/dz` at real `|z| > 1` from the Cauchy integral over a circle of
/// half the distance to the cut; the trapezoid rule converges like `2^-K`.
pub fn dispersion_derivative(z: f64, m: i32, med: &OpticalMedium, rules: &Rules) -> Result<f64> {
    const K: usize = 64;
    if z.abs() <= 1.0 {
        return Err(Error::Domain("dispersion derivative needs |z| > 1"));
    }
    let r = 0.5 * (z.abs() - 1.0);
    let mut acc = 0.0;
    for k in 0..K {
        let t = 2.0 * PI * (k as f64 + 0.5) / K as f64;
        let e = num_complex::Complex64::new(t.cos(), t.sin());
        let v = dispersion(e * r + z, m, med, rules)?;
        acc += (v / e).re;
    }
    Ok(acc / (K as f64 * r))
}

/// Discrete eigenvalues `nu_j^m > 1` (descending) with their normalizations.
/// The negative partners `-nu_j^m` are implied.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumData {
    pub m: i32,
    pub albedo: f64,
    pub eigenvalues: Vec<f64>,
    pub norms: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl SpectrumData {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Sample points in `nu > 1`: a uniform grid in `1/nu` plus geometric
/// refinements towards `nu = 1` and `nu = infinity`.
fn scan_points() -> Vec<f64> {
    let mut pts: Vec<f64> = (1..SCAN_POINTS).map(|i| SCAN_POINTS as f64 / i as f64).collect();
    pts.extend((12..=44).map(|k| 1.0 + 2f64.powi(-k)));
    pts.extend((13..=50).map(|k| 2f64.powi(k)));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

fn refine_root(lo: f64, hi: f64, f: &impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-14 * mid.max(1.0) || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok((mid, 0.0));
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    let f_hi = f(hi)?;
    let (mut best, mut best_r) = if f_lo.abs() < f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
    // secant polish inside the final bracket
    let (mut x0, mut f0, mut x1, mut f1) = (lo, f_lo, hi, f_hi);
    for _ in 0..4 {
        if f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !(x2 > lo.min(hi) - (hi - lo) && x2 < hi.max(lo) + (hi - lo)) {
            break;
        }
        let f2 = f(x2)?;
        if f2.abs() < best_r.abs() {
            best = x2;
            best_r = f2;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
    }
    Ok((best, best_r))
}

/// Brackets every sign change of `Lambda^m` on `nu > 1`.
pub fn bracket_roots(m: i32, med: &OpticalMedium, rules: &Rules) -> Result<Vec<(f64, f64)>> {
    check_order(m, med)?;
    let pts = scan_points();
    let mut vals = Vec::with_capacity(pts.len());
    for &p in &pts {
        vals.push(dispersion(p, m, med, rules)?);
    }
    let mut brackets = Vec::new();
    for i in 0..pts.len() - 1 {
        if vals[i] == 0.0 {
            brackets.push((pts[i], pts[i]));
        } else if (vals[i] < 0.0) != (vals[i + 1] < 0.0) && vals[i + 1] != 0.0 {
            brackets.push((pts[i], pts[i + 1]));
        }
    }
    Ok(brackets)
}

/// Refines one bracket to a root of `Lambda^m` and its normalization.
pub fn refine_bracket(bracket: (f64, f64), m: i32, med: &OpticalMedium, rules: &Rules) -> Result<(f64, f64)> {
    let f = |nu: f64| dispersion(nu, m, med, rules);
    if bracket.0 == bracket.1 {
        return Ok((bracket.0, 0.0));
    }
    refine_root(bracket.0, bracket.1, &f)
}

/// Assembles refined roots into a [`SpectrumData`], checking residuals.
pub fn assemble_spectrum(m: i32, med: &OpticalMedium, rules: &Rules, mut roots: Vec<(f64, f64)>) -> Result<SpectrumData> {
    roots.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut data = SpectrumData {
        m,
        albedo: med.albedo(),
        eigenvalues: Vec::with_capacity(roots.len()),
        norms: Vec::with_capacity(roots.len()),
        residuals: Vec::with_capacity(roots.len()),
    };
    for (nu, r) in roots {
        if r.abs() > ROOT_RESIDUAL {
            return Err(Error::Convergence {
                iterations: 200,
                partial: nu,
                estimate: r.abs(),
            });
        }
        data.eigenvalues.push(nu);
        data.norms.push(discrete_norm(nu, m, med, rules)?);
        data.residuals.push(r.abs());
    }
    Ok(data)
}

/// All discrete eigenvalues `nu > 1` of azimuthal order `m`.
pub fn find_discrete(m: i32, med: &OpticalMedium, rules: &Rules) -> Result<SpectrumData> {
    // the dispersion function depends on m only through |m|
    let a = m.unsigned_abs() as i32;
    let brackets = bracket_roots(a, med, rules)?;
    let mut roots = Vec::with_capacity(brackets.len());
    for b in brackets {
        roots.push(refine_bracket(b, a, med, rules)?);
    }
    let mut data = assemble_spectrum(a, med, rules, roots)?;
    data.m = m;
    Ok(data)
}

/// `N_j = (c/2) nu^2 g^m(nu,nu) Lambda'(nu)` at a discrete eigenvalue.
/// Odd in `nu`; positive at the leading root.
pub fn discrete_norm(nu: f64, m: i32, med: &OpticalMedium, rules: &Rules) -> Result<f64> {
    let g = GKernel::new(nu, m, med)?.eval(nu);
    let d = dispersion_derivative(nu, m, med, rules)?;
    Ok(0.5 * med.albedo() * nu * nu * g * d)
}

pub fn norm_discrete(j: usize, spec: &SpectrumData) -> f64 {
    spec.norms[j]
}

/// `N^m(nu) = nu [lambda^2 + (pi c nu g(nu,nu) (1-nu^2)^{|m|} / 2)^2] (1-nu^2)^{-|m|}`.
pub fn norm_continuum(nu: f64, m: i32, med: &OpticalMedium, rules: &Rules) -> Result<f64> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::Domain("continuum normalization needs nu inside (0, 1)"));
    }
    Ok(continuum_point(nu, m, med, rules)?.norm)
}

/// Boundary values of the dispersion function on the cut at one `nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumPoint {
    pub nu: f64,
    pub lambda: f64,
    /// `pi c nu g(nu,nu) (1-nu^2)^{|m|} / 2`; `Lambda^{m+-} = lambda +- i jump`.
    pub jump: f64,
    pub norm: f64,
}

pub fn continuum_point(nu: f64, m: i32, med: &OpticalMedium, rules: &Rules) -> Result<ContinuumPoint> {
    let lambda = lambda_weight(nu, m, med, rules)?;
    let a = m.unsigned_abs() as usize;
    let w = weight_power(nu, a);
    let jump = 0.5 * PI * med.albedo() * nu * GKernel::new(nu, m, med)?.eval(nu) * w;
    let norm = nu * (lambda * lambda + jump * jump) / w;
    Ok(ContinuumPoint { nu, lambda, jump, norm })
}

/// Continuum data tabulated on the `(0, 1)` Gauss nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumTable {
    pub m: i32,
    pub points: Vec<ContinuumPoint>,
    pub weights: Vec<f64>,
}

impl ContinuumTable {
    pub fn new(m: i32, med: &OpticalMedium, rules: &Rules) -> Result<Self> {
        check_order(m, med)?;
        let mut points = Vec::with_capacity(rules.unit.len());
        for &nu in &rules.unit.nodes {
            points.push(continuum_point(nu, m, med, rules)?);
        }
        Ok(Self {
            m,
            points,
            weights: rules.unit.weights.clone(),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ContinuumPoint, f64)> + '_ {
        self.points.iter().zip(self.weights.iter().copied())
    }
}
