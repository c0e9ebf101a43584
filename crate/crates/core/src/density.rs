//! Energy densities `U v` on the source axis: point source and finite line
//! source, by the eigenfunction expansion and by isotropic Fourier baselines.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::medium::OpticalMedium;
use crate::quadrature::{gauss_legendre, oscillatory_semi_infinite, OscillatorySettings, QuadratureRule, Rules};
use crate::specfun::cumulative_j0;
use crate::spectrum::{continuum_point, find_discrete};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Case,
    Fourier,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceKind {
    Point,
    /// Segment of optical length `ell` along the x axis starting at the origin.
    Line { ell: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    pub kind: SourceKind,
    pub strength: f64,
}

impl SourceSpec {
    pub fn point(strength: f64) -> Result<Self> {
        Self::new(SourceKind::Point, strength)
    }

    pub fn line(strength: f64, ell: f64) -> Result<Self> {
        Self::new(SourceKind::Line { ell }, strength)
    }

    fn new(kind: SourceKind, strength: f64) -> Result<Self> {
        if !(strength > 0.0) {
            return Err(Error::Domain("source strength must be positive"));
        }
        if let SourceKind::Line { ell } = kind {
            if !(ell > 0.0) {
                return Err(Error::Domain("line length must be positive"));
            }
        }
        Ok(Self { kind, strength })
    }
}

/// Sampled `U v / (mu_t^2 S_a)` (point) or `U v / (mu_t S_b)` (line).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub z: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub method: Method,
}

impl DensityProfile {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || n < 2 {
        return Err(Error::Domain("log grid needs 0 < lo < hi and n >= 2"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut zs: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
    // pin the ends against exp/ln round-off
    zs[0] = lo;
    zs[n - 1] = hi;
    Ok(zs)
}

pub fn default_grid() -> Vec<f64> {
    log_grid(0.1, 25.0, 200).expect("fixed grid bounds")
}

/// Least-squares slope of `ln(z U)` against `z`.
pub fn decay_slope(z: &[f64], u: &[f64]) -> f64 {
    let n = z.len() as f64;
    let ys: Vec<f64> = z.iter().zip(u).map(|(z, u)| (z * u).ln()).collect();
    let mx = z.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = z.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = z.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Panels on `(0, 1)` graded geometrically toward both ends.
fn graded_breaks() -> Vec<f64> {
    let mut b = alloc::vec![0.0];
    for k in (2..=20).rev() {
        b.push(0.5f64.powi(k));
    }
    b.push(0.5);
    for k in 2..=40 {
        b.push(1.0 - 0.5f64.powi(k));
    }
    b.push(1.0);
    b
}

#[derive(Debug, Clone, Copy)]
struct ContinuumSample {
    nu: f64,
    fine: f64,
    coarse: f64,
    norm: f64,
}

/// Order-0 spectrum tabulated for the axial density integrals.
#[derive(Debug, Clone)]
pub struct DensitySolver {
    albedo: f64,
    discrete: Vec<(f64, f64)>,
    continuum: Vec<ContinuumSample>,
}

impl DensitySolver {
    pub fn new(med: &OpticalMedium, rules: &Rules) -> Result<Self> {
        let spec = find_discrete(0, med, rules)?;
        let discrete = spec.eigenvalues.iter().zip(&spec.norms).map(|(&nu, &n)| (nu, n.abs())).collect();
        let (fine, coarse) = (gauss_legendre(16), gauss_legendre(8));
        let breaks = graded_breaks();
        let mut continuum = Vec::new();
        for pair in breaks.windows(2) {
            for (rule, is_fine) in [(&fine, true), (&coarse, false)] {
                for (nu, w) in rule.mapped(pair[0], pair[1]).iter() {
                    let cp = continuum_point(nu, 0, med, rules)?;
                    continuum.push(ContinuumSample {
                        nu,
                        fine: if is_fine { w } else { 0.0 },
                        coarse: if is_fine { 0.0 } else { w },
                        norm: cp.norm,
                    });
                }
            }
        }
        Ok(Self {
            albedo: med.albedo(),
            discrete,
            continuum,
        })
    }

    pub fn albedo(&self) -> f64 {
        self.albedo
    }

    /// Discrete order-0 eigenvalues with their positive normalizations.
    pub fn discrete(&self) -> &[(f64, f64)] {
        &self.discrete
    }

    pub fn leading_eigenvalue(&self) -> Option<f64> {
        self.discrete.first().map(|d| d.0)
    }

    /// `sum_j e^{-K_j z}/(Q_j N_j)` plus the continuum analogue, with
    /// `K = Q(nu q)/nu`; returns the fine value and its coarse-rule gap.
    pub(crate) fn axial_kernel(&self, q: f64, z: f64) -> (f64, f64) {
        let term = |nu: f64, norm: f64| {
            let big_q = (nu * q).hypot(1.0);
            (-big_q * z / nu).exp() / (big_q * norm)
        };
        let disc: f64 = self.discrete.iter().map(|&(nu, n)| term(nu, n)).sum();
        let (mut fine, mut coarse) = (0.0, 0.0);
        for s in &self.continuum {
            let t = term(s.nu, s.norm);
            fine += s.fine * t;
            coarse += s.coarse * t;
        }
        (disc + fine, (fine - coarse).abs())
    }

    /// Point-source `U v` at axial distance `z`, with an error estimate.
    pub fn point(&self, z: f64) -> Result<(f64, f64)> {
        if !(z > 0.0) {
            return Err(Error::Domain("density needs z > 0"));
        }
        let disc: f64 = self.discrete.iter().map(|&(nu, n)| (-z / nu).exp() / (nu * n)).sum();
        let (mut fine, mut coarse) = (0.0, 0.0);
        for s in &self.continuum {
            let t = (-z / s.nu).exp() / (s.nu * s.norm);
            fine += s.fine * t;
            coarse += s.coarse * t;
        }
        Ok(((disc + fine) / z, (fine - coarse).abs() / z))
    }

    /// Point-source `U v` averaged over the shell `a < r < b` (volume weight `r^2`).
    pub fn shell_average(&self, a: f64, b: f64) -> Result<f64> {
        if !(a >= 0.0 && b > a) {
            return Err(Error::Domain("shell needs 0 <= a < b"));
        }
        let mut acc = 0.0;
        for (r, w) in gauss_legendre(16).mapped(a, b).iter() {
            acc += w * r * r * self.point(r)?.0;
        }
        Ok(3.0 * acc / (b * b * b - a * a * a))
    }

    /// Line-source `U v` on the axis through one end of the segment.
    pub fn line(&self, z: f64, ell: f64) -> Result<(f64, f64)> {
        if !(z > 0.0) {
            return Err(Error::Domain("density needs z > 0"));
        }
        if !(ell > 0.0) {
            return Err(Error::Domain("line length must be positive"));
        }
        let slow = 1.0 / self.leading_eigenvalue().unwrap_or(1.0);
        let q_max = 40.0 / z;
        let cap = (PI / ell).min(2.0 / z);
        let rule = gauss_legendre(16);
        let (mut acc, mut err) = (0.0, 0.0);
        let (mut a, mut width) = (0.0, (slow / 8.0).min(cap));
        while a < q_max {
            let b = (a + width).min(q_max);
            for (q, w) in rule.mapped(a, b).iter() {
                let (k, e) = self.axial_kernel(q, z);
                let cum = cumulative_j0(ell * q);
                acc += w * cum * k;
                err += w * cum.abs() * e;
            }
            a = b;
            width = (2.0 * width).min(cap);
        }
        Ok((acc, err))
    }
}

fn profile(zs: &[f64], method: Method, mut f: impl FnMut(f64) -> Result<(f64, f64)>) -> Result<DensityProfile> {
    let mut values = Vec::with_capacity(zs.len());
    let mut errors = Vec::with_capacity(zs.len());
    for &z in zs {
        let (v, e) = f(z)?;
        values.push(v);
        errors.push(e);
    }
    Ok(DensityProfile {
        z: zs.to_vec(),
        values,
        errors,
        method,
    })
}

pub fn density_point(zs: &[f64], med: &OpticalMedium, rules: &Rules) -> Result<DensityProfile> {
    let solver = DensitySolver::new(med, rules)?;
    profile(zs, Method::Case, |z| solver.point(z))
}

pub fn density_line(zs: &[f64], med: &OpticalMedium, ell: f64, rules: &Rules) -> Result<DensityProfile> {
    let solver = DensitySolver::new(med, rules)?;
    profile(zs, Method::Case, |z| solver.line(z, ell))
}

fn require_isotropic(med: &OpticalMedium) -> Result<f64> {
    if med.is_isotropic() {
        Ok(med.albedo())
    } else {
        Err(Error::NotIsotropic(med.coeff(1)))
    }
}

/// `(atan k)^2 / (k - c atan k)`, with the small-`k` difference by series.
pub fn fourier_amplitude(k: f64, c: f64) -> f64 {
    let at = k.atan();
    let den = if k < 1e-2 {
        let k2 = k * k;
        let tail = k * k2 * (1.0 / 3.0 - k2 * (1.0 / 5.0 - k2 * (1.0 / 7.0 - k2 / 9.0)));
        k * (1.0 - c) + c * tail
    } else {
        k - c * at
    };
    at * at / den
}

const FOURIER_SETTINGS: OscillatorySettings = OscillatorySettings {
    split: 20.0,
    tol: 1e-11,
    max_segments: 20000,
};

/// Isotropic point-source `U v` at distance `r` by the Fourier route.
pub fn point_fourier(r: f64, c: f64) -> Result<(f64, f64)> {
    if !(r > 0.0) {
        return Err(Error::Domain("density needs z > 0"));
    }
    let integral = oscillatory_semi_infinite(|k| fourier_amplitude(k, c), r, FOURIER_SETTINGS)?;
    let scale = 2.0 * c / (PI * r);
    Ok(((-r).exp() / (r * r) + scale * integral, scale * 10.0 * FOURIER_SETTINGS.tol))
}

fn line_fourier_with(z: f64, c: f64, ell: f64, rule: &QuadratureRule) -> Result<f64> {
    let mut acc = 0.0;
    for (x0, w) in rule.mapped(0.0, ell).iter() {
        acc += w * point_fourier(x0.hypot(z), c)?.0;
    }
    Ok(acc)
}

/// Isotropic line-source `U v`; depends on `z` only through `z^2`.
pub fn line_fourier(z: f64, c: f64, ell: f64) -> Result<(f64, f64)> {
    if z == 0.0 || !z.is_finite() {
        return Err(Error::Domain("line density needs z != 0"));
    }
    if !(ell > 0.0) {
        return Err(Error::Domain("line length must be positive"));
    }
    let fine = line_fourier_with(z, c, ell, &gauss_legendre(20))?;
    let coarse = line_fourier_with(z, c, ell, &gauss_legendre(10))?;
    Ok((fine, (fine - coarse).abs()))
}

pub fn density_point_fourier(zs: &[f64], med: &OpticalMedium) -> Result<DensityProfile> {
    let c = require_isotropic(med)?;
    profile(zs, Method::Fourier, |z| point_fourier(z, c))
}

pub fn density_line_fourier(zs: &[f64], med: &OpticalMedium, ell: f64) -> Result<DensityProfile> {
    let c = require_isotropic(med)?;
    profile(zs, Method::Fourier, |z| line_fourier(z, c, ell))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn reference_case(f1: f64, mu_a: f64) -> OpticalMedium {
        OpticalMedium::linear(mu_a, 100.0, f1).unwrap()
    }

    fn solvers() -> &'static [DensitySolver; 3] {
        static S: OnceLock<[DensitySolver; 3]> = OnceLock::new();
        S.get_or_init(|| {
            let rules = Rules::production();
            [(0.0, 0.03), (0.3, 0.03), (0.3, 0.3)].map(|(f1, mu_a)| DensitySolver::new(&reference_case(f1, mu_a), &rules).unwrap())
        })
    }

    #[test]
    fn grids() {
        let g = default_grid();
        assert_eq!(g.len(), 200);
        assert!((g[0] - 0.1).abs() < 1e-15 && (g[199] - 25.0).abs() < 1e-12);
        assert!(log_grid(0.0, 1.0, 4).is_err());
        let z = [1.0, 2.0, 3.0];
        let u: Vec<f64> = z.iter().map(|z: &f64| (-0.5 * z).exp() / z).collect();
        assert!((decay_slope(&z, &u) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn source_spec_validation() {
        assert!(SourceSpec::point(1.0).is_ok());
        assert!(SourceSpec::point(0.0).is_err());
        assert!(SourceSpec::line(1.0, 0.0).is_err());
    }

    #[test]
    fn point_large_z_limit() {
        for s in solvers() {
            let (nu0, n0) = s.discrete()[0];
            let z = 20.0;
            let mut expect = 1.0 / (nu0 * n0);
            for &(nu, n) in &s.discrete()[1..] {
                expect += (-z / nu + z / nu0).exp() / (nu * n);
            }
            let v = s.point(z).unwrap().0 * z * (z / nu0).exp();
            assert!((v / expect - 1.0).abs() < 1e-6, "{v} {expect}");
        }
    }

    #[test]
    fn point_positive_decreasing_and_ordered() {
        let zs = log_grid(0.5, 20.0, 40).unwrap();
        for s in solvers() {
            let u: Vec<f64> = zs.iter().map(|&z| s.point(z).unwrap().0).collect();
            assert!(u.iter().all(|&v| v > 0.0));
            assert!(u.windows(2).all(|w| w[1] < w[0]));
        }
        let [_, ii, iii] = solvers();
        assert!(iii.point(5.0).unwrap().0 < ii.point(5.0).unwrap().0);
    }

    #[test]
    fn decay_rate() {
        let zs = log_grid(15.0, 25.0, 21).unwrap();
        for s in solvers() {
            let u: Vec<f64> = zs.iter().map(|&z| s.point(z).unwrap().0).collect();
            let nu0 = s.leading_eigenvalue().unwrap();
            assert!((decay_slope(&zs, &u) * nu0 + 1.0).abs() < 1e-2);
        }
    }

    #[test]
    fn point_case_matches_fourier() {
        let s = &solvers()[0];
        for z in log_grid(0.5, 10.0, 12).unwrap() {
            let a = s.point(z).unwrap().0;
            let b = point_fourier(z, s.albedo()).unwrap().0;
            assert!((a / b - 1.0).abs() < 1e-3, "{z}: {a} {b}");
        }
    }

    #[test]
    fn fourier_limits() {
        let v = point_fourier(1.0, 1e-12).unwrap().0;
        assert!((v - (-1.0f64).exp()).abs() < 1e-10);
        assert!((fourier_amplitude(1e-3, 0.5) - 1e-3f64.atan().powi(2) / (1e-3 - 0.5 * 1e-3f64.atan())).abs() < 1e-9);
        let iso = OpticalMedium::from_albedo(0.9, alloc::vec![1.0, 0.2]).unwrap();
        assert!(matches!(density_point_fourier(&[1.0], &iso), Err(Error::NotIsotropic(_))));
        assert!(density_line_fourier(&[1.0], &iso, 1.0).is_err());
    }

    #[test]
    fn line_fourier_symmetry_and_short_limit() {
        let a = line_fourier(1.5, 0.95, 1.0).unwrap().0;
        let b = line_fourier(-1.5, 0.95, 1.0).unwrap().0;
        assert_eq!(a, b);
        let ell = 1e-4;
        let short = line_fourier(1.5, 0.95, ell).unwrap().0;
        assert!((short / (ell * point_fourier(1.5, 0.95).unwrap().0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn line_case_short_limit() {
        let s = &solvers()[0];
        let ell = 1e-3;
        let r = s.line(2.0, ell).unwrap().0 / (ell * s.point(2.0).unwrap().0);
        assert!((r - 1.0).abs() < 1e-5, "{r}");
    }

    #[test]
    fn line_case_matches_fourier() {
        let s = &solvers()[0];
        for &z in &[0.5, 2.0, 6.0, 10.0] {
            let a = s.line(z, 1.0).unwrap().0;
            let b = line_fourier(z, s.albedo(), 1.0).unwrap().0;
            assert!((a / b - 1.0).abs() < 1e-3, "{z}: {a} {b}");
        }
    }

    #[test]
    fn line_resembles_point_far_away() {
        let s = &solvers()[1];
        for &z in &[5.0, 10.0, 20.0] {
            let r = s.line(z, 1.0).unwrap().0 / s.point(z).unwrap().0;
            assert!((r - 1.0).abs() < 0.1, "{z}: {r}");
        }
    }

    #[test]
    fn domain_errors() {
        let s = &solvers()[0];
        assert!(s.point(0.0).is_err());
        assert!(s.line(-1.0, 1.0).is_err());
        assert!(s.line(1.0, 0.0).is_err());
    }

    #[test]
    fn shell_average_brackets_point_values() {
        let s = &solvers()[1];
        let thin = s.shell_average(1.999, 2.001).unwrap();
        assert!((thin / s.point(2.0).unwrap().0 - 1.0).abs() < 1e-6);
        let wide = s.shell_average(1.0, 2.0).unwrap();
        assert!(wide < s.point(1.0).unwrap().0 && wide > s.point(2.0).unwrap().0);
        assert!(s.shell_average(2.0, 2.0).is_err());
    }
}
