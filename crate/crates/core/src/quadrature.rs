//! Gauss-Legendre rules, principal-value integrals by singularity
//! subtraction, and oscillatory semi-infinite integrals summed over
//! half-periods with Euler averaging.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Production order for integrals over `[-1, 1]` and `(0, 1)`.
pub const PRODUCTION_ORDER: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// The same rule carried affinely onto `(a, b)`.
    pub fn mapped(&self, a: f64, b: f64) -> QuadratureRule {
        let h = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        QuadratureRule {
            nodes: self.nodes.iter().map(|x| mid + h * x).collect(),
            weights: self.weights.iter().map(|w| h * w).collect(),
        }
    }

    pub fn integrate<T: Scalar>(&self, mut f: impl FnMut(f64) -> T) -> T {
        let mut sum = T::zero();
        for (x, w) in self.iter() {
            sum += f(x) * w;
        }
        sum
    }
}

/// Gauss rules shared by the spectral computations: `[-1, 1]`, `(0, 1)`, and
/// the half-circle parameter `(0, pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rules {
    pub interval: QuadratureRule,
    pub unit: QuadratureRule,
    pub arc: QuadratureRule,
}

impl Rules {
    pub fn with_orders(interval: usize, arc: usize) -> Self {
        let interval = gauss_legendre(interval);
        let unit = interval.mapped(0.0, 1.0);
        let arc = gauss_legendre(arc).mapped(0.0, PI);
        Self { interval, unit, arc }
    }

    pub fn production() -> Self {
        Self::with_orders(PRODUCTION_ORDER, 256)
    }
}

impl Default for Rules {
    fn default() -> Self {
        Self::production()
    }
}

/// `n`-point Gauss-Legendre rule on `(-1, 1)`, nodes ascending.
pub fn gauss_legendre(n: usize) -> QuadratureRule {
    assert!(n >= 1, "Gauss-Legendre needs at least one node");
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadratureRule { nodes, weights }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `PV int_{-1}^{1} F(mu)/(nu - mu) dmu` for `nu` inside `(-1, 1)`:
/// the subtracted integrand `(F(mu) - F(nu))/(nu - mu)` is integrated by `rule`
/// and the pole part is `F(nu) ln((1+nu)/(1-nu))`.
pub fn pv_integral<T: Scalar>(rule: &QuadratureRule, nu: f64, f: impl Fn(f64) -> T) -> Result<T> {
    if !(nu > -1.0 && nu < 1.0) {
        return Err(Error::Domain("principal value needs nu inside (-1, 1)"));
    }
    Ok(subtracted_cauchy(rule, nu, &f) + f(nu) * ((1.0 + nu) / (1.0 - nu)).ln())
}

/// `int_{-1}^{1} (F(mu) - F(nu))/(nu - mu) dmu`, the regular part of a Cauchy
/// integral. Valid on either side of the interval.
pub fn subtracted_cauchy<T: Scalar>(rule: &QuadratureRule, nu: f64, f: &impl Fn(f64) -> T) -> T {
    let f_nu = f(nu);
    let mut sum = T::zero();
    for (x, w) in rule.iter() {
        let d = nu - x;
        if d != 0.0 {
            sum += (f(x) - f_nu) * (w / d);
        }
    }
    sum
}

/// 15-point Gauss-Kronrod pair on `(a, b)`: (Kronrod value, error estimate).
fn gauss_kronrod15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    const XK: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const WK: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_727_8,
    ];
    const WG: [f64; 4] = [
        0.129_484_966_168_869_7,
        0.279_705_391_489_276_7,
        0.381_830_050_505_118_9,
        0.417_959_183_673_469_4,
    ];
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    let fc = f(c);
    let mut k = WK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let s = f(c - h * XK[i]) + f(c + h * XK[i]);
        k += WK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Global adaptive Gauss-Kronrod on `(a, b)` to absolute tolerance `tol`:
/// the segment with the largest error estimate is bisected until the summed
/// estimate meets `tol` or `max_segments` is reached.
pub fn adaptive(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64, max_segments: usize) -> (f64, f64) {
    let (v, e) = gauss_kronrod15(f, a, b);
    let mut segs = alloc::vec![(a, b, v, e)];
    let (mut total, mut err) = (v, e);
    while err > tol && segs.len() < max_segments {
        let (worst, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.3 > acc.1 { (i, s.3) } else { acc });
        let (lo, hi, v, e) = segs.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let left = gauss_kronrod15(f, lo, mid);
        let right = gauss_kronrod15(f, mid, hi);
        total += left.0 + right.0 - v;
        err += left.1 + right.1 - e;
        segs.push((lo, mid, left.0, left.1));
        segs.push((mid, hi, right.0, right.1));
    }
    (total, err)
}

/// Settings for [`oscillatory_semi_infinite`].
#[derive(Debug, Clone, Copy)]
pub struct OscillatorySettings {
    /// Wavenumber past which the amplitude is treated as smooth.
    pub split: f64,
    pub tol: f64,
    pub max_segments: usize,
}

impl Default for OscillatorySettings {
    fn default() -> Self {
        Self {
            split: 20.0,
            tol: 1e-10,
            max_segments: 4000,
        }
    }
}

/// `int_0^inf sin(kz) f(k) dk` for amplitudes decaying like `1/k`.
///
/// Half-periods of `sin(kz)` below the split are integrated adaptively; above
/// it the alternating half-period contributions are summed by repeated
/// averaging of partial sums.
pub fn oscillatory_semi_infinite(f: impl Fn(f64) -> f64, z: f64, settings: OscillatorySettings) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain("oscillatory integral needs z > 0"));
    }
    let period = PI / z;
    let head_segments = ((settings.split / period).ceil() as usize).max(1);
    let mut g = |k: f64| (k * z).sin() * f(k);
    let seg_tol = 0.1 * settings.tol / head_segments as f64;
    let mut head = 0.0;
    for n in 0..head_segments {
        head += adaptive(&mut g, n as f64 * period, (n + 1) as f64 * period, seg_tol, 200).0;
    }
    let rule = gauss_legendre(24);
    let mut partial = Vec::new();
    let mut running = 0.0;
    let mut last = f64::NAN;
    for count in 0..settings.max_segments {
        let a = (head_segments + count) as f64 * period;
        running += rule.mapped(a, a + period).integrate(&mut g);
        partial.push(running);
        if partial.len() >= 2 {
            let est = euler_average(&partial);
            if count > 6 && (est - last).abs() < settings.tol {
                return Ok(head + est);
            }
            last = est;
        }
    }
    Err(Error::Convergence {
        iterations: settings.max_segments,
        partial: head + running,
        estimate: (euler_average(&partial) - running).abs(),
    })
}

/// Repeated pairwise averaging of partial sums of an alternating series.
fn euler_average(partial: &[f64]) -> f64 {
    let keep = partial.len().min(40);
    let mut row: Vec<f64> = partial[partial.len() - keep..].to_vec();
    while row.len() > 1 {
        for i in 0..row.len() - 1 {
            row[i] = 0.5 * (row[i] + row[i + 1]);
        }
        row.pop();
    }
    row[0]
}
