//! Legendre functions in the normalization used by the transport recurrences,
//! their second-kind partners off the cut, Wigner d-matrices at imaginary
//! angle, and the Bessel function J0 with its running integral.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `(l - m)! / (l + m)!` for `|m| <= l`, signed `m`.
pub fn factorial_ratio(l: usize, m: i32) -> f64 {
    let a = m.unsigned_abs() as usize;
    debug_assert!(a <= l);
    let prod: f64 = (l - a + 1..=l + a).fold(1.0, |acc, k| acc * k as f64);
    if m >= 0 {
        1.0 / prod
    } else {
        prod
    }
}

/// `(-1)^n` for signed `n`.
pub fn parity(n: i64) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Seed `p_{|m|}^m`: `(2m)!/(2^m m!)` for `m >= 0`, `(-1)^m/(2^|m| |m|!)` below.
pub fn legendre_seed(m: i32) -> f64 {
    let a = m.unsigned_abs() as usize;
    if m >= 0 {
        (1..=a).fold(1.0, |acc, k| acc * (2 * k - 1) as f64)
    } else {
        parity(m as i64) / ((1..=a).fold(1.0, |acc, k| acc * (2 * k) as f64))
    }
}

/// Values indexed by `l = |m|..=l_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreRow<T> {
    pub m: i32,
    pub values: Vec<T>,
}

impl<T: Copy> LegendreRow<T> {
    pub fn l_min(&self) -> usize {
        self.m.unsigned_abs() as usize
    }

    pub fn l_max(&self) -> usize {
        self.l_min() + self.values.len() - 1
    }

    pub fn get(&self, l: usize) -> T {
        self.values[l - self.l_min()]
    }
}

/// `p_l^m(mu)` for `l = |m|..=l_max`, from the three-term recurrence.
pub fn p_row<T: Scalar>(mu: T, m: i32, l_max: usize) -> LegendreRow<T> {
    let a = m.unsigned_abs() as usize;
    assert!(l_max >= a, "l_max below |m|");
    let mut values = Vec::with_capacity(l_max - a + 1);
    values.push(T::real(legendre_seed(m)));
    let mut prev = T::zero();
    for l in a..l_max {
        let cur = values[l - a];
        let lf = l as f64;
        let mf = m as f64;
        let next = (mu * cur * (2.0 * lf + 1.0) - prev * (lf + mf)) / (lf - mf + 1.0);
        prev = cur;
        values.push(next);
    }
    LegendreRow { m, values }
}

/// `(-1)^m (1 - z^2)^{|m|/2}` on the principal branch; turns `p` into `P`.
pub fn associated_prefactor<T: Scalar>(z: T, m: i32) -> Complex64 {
    let s = (T::one() - z * z).to_complex();
    // a signed-zero imaginary part must not flip real arguments above 1 to -i
    let s = Complex64::new(s.re, s.im + 0.0);
    s.sqrt().powu(m.unsigned_abs()) * parity(m as i64)
}

fn on_cut<T: Scalar>(nu: T) -> bool {
    let z = nu.to_complex();
    z.im == 0.0 && z.re.abs() <= 1.0
}

/// `int_{-1}^{1} (1 - mu^2)^n / (z - mu) dmu` off the segment.
fn cauchy_weight_moment<T: Scalar>(z: T, n: usize) -> T {
    if z.modulus() <= 1.5 {
        let mut j = z.cauchy_log();
        let one_minus = T::one() - z * z;
        // int (1 - mu^2)^k dmu = 2 (2^k k!)^2 / (2k + 1)!
        let mut moment = 2.0;
        for k in 1..=n {
            j = one_minus * j + z * moment;
            moment *= (2 * k) as f64 / (2 * k + 1) as f64;
        }
        j
    } else {
        let z2 = z * z;
        let mut mk = 2.0 * (1..=n).fold(1.0, |acc, k| acc * (2 * k) as f64 / (2 * k + 1) as f64);
        let mut zpow = T::one() / z;
        let mut sum = zpow * mk;
        let mut k = 0usize;
        loop {
            mk *= (k + 1) as f64 / (k + 2 * n + 3) as f64;
            zpow = zpow / z2;
            let term = zpow * mk;
            sum += term;
            k += 2;
            if term.modulus() <= 1e-18 * sum.modulus() || k > 4000 {
                break;
            }
        }
        sum
    }
}

fn convergence_radius<T: Scalar>(z: T) -> f64 {
    let z = z.to_complex();
    let one = Complex64::new(1.0, 0.0);
    let w = z + (z - one).sqrt() * (z + one).sqrt();
    let r = w.norm();
    if r >= 1.0 {
        r
    } else {
        1.0 / r
    }
}

/// Reduced second-kind row `q_l^m(nu) = 1/2 int (1-mu^2)^{|m|} p_l^m(mu)/(nu-mu) dmu`.
///
/// It obeys the `p` recurrence above `l = |m|` and is its minimal solution, so
/// the ratios come from a backward continued fraction.
pub fn q_row<T: Scalar>(nu: T, m: i32, l_max: usize) -> Result<LegendreRow<T>> {
    if on_cut(nu) {
        return Err(Error::Domain("second-kind Legendre function on the cut [-1, 1]"));
    }
    let a = m.unsigned_abs() as usize;
    assert!(l_max >= a, "l_max below |m|");
    let rho = convergence_radius(nu);
    let depth = if rho > 1.0 {
        ((17.0 * core::f64::consts::LN_10) / (2.0 * rho.ln())).ceil().min(1.0e6) as usize
    } else {
        1_000_000
    };
    let top = l_max + depth + 2;
    let mf = m as f64;
    let mut ratios = vec![T::zero(); l_max - a + 1];
    let mut r = T::zero();
    for l in (a + 1..=top).rev() {
        let lf = l as f64;
        r = T::real(lf + mf) / (nu * (2.0 * lf + 1.0) - r * (lf - mf + 1.0));
        if l <= l_max {
            ratios[l - a] = r;
        }
    }
    let seed = cauchy_weight_moment(nu, a) * (0.5 * legendre_seed(m));
    let mut values = Vec::with_capacity(l_max - a + 1);
    values.push(seed);
    for l in a + 1..=l_max {
        let prev = values[l - a - 1];
        values.push(prev * ratios[l - a]);
    }
    Ok(LegendreRow { m, values })
}

/// Associated Legendre functions of both kinds off the cut `(-inf, 1]`,
/// `P = (-1)^m (1-nu^2)^{|m|/2} p` and `Q = q / [(-1)^m (1-nu^2)^{|m|/2}]`.
/// Products `P_a Q_b` do not depend on the branch of the prefactor.
pub fn legendre_pq<T: Scalar>(
    nu: T,
    m: i32,
    l_max: usize,
) -> Result<(LegendreRow<Complex64>, LegendreRow<Complex64>)> {
    let q = q_row(nu, m, l_max)?;
    let p = p_row(nu, m, l_max);
    let pre = associated_prefactor(nu, m);
    let big_p = LegendreRow {
        m,
        values: p.values.iter().map(|v| v.to_complex() * pre).collect(),
    };
    let big_q = LegendreRow {
        m,
        values: q.values.iter().map(|v| v.to_complex() / pre).collect(),
    };
    Ok((big_p, big_q))
}

/// Wigner d-matrices `d^l_{m'm}` at the imaginary angle whose cosine is
/// `sqrt(1 + x^2)` and sine `i|x|`, for all `|m|, |m'| <= l <= l_max`.
#[derive(Debug, Clone)]
pub struct WignerTable {
    l_max: usize,
    data: Vec<Complex64>,
}

impl WignerTable {
    fn index(&self, l: usize, mp: i32, m: i32) -> usize {
        let w = 2 * self.l_max + 1;
        let l0 = self.l_max as i32;
        (l * w + (mp + l0) as usize) * w + (m + l0) as usize
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// `d^l_{m'm}`; zero when `max(|m|,|m'|) > l`.
    pub fn get(&self, l: usize, mp: i32, m: i32) -> Complex64 {
        if mp.unsigned_abs() as usize > l || m.unsigned_abs() as usize > l {
            return Complex64::new(0.0, 0.0);
        }
        self.data[self.index(l, mp, m)]
    }
}

/// Half-angle cosine and sine for the continued rotation.
pub fn imaginary_half_angle(x: f64) -> (Complex64, Complex64) {
    let big_q = (1.0 + x * x).sqrt();
    let cos_half = Complex64::new(((1.0 + big_q) / 2.0).sqrt(), 0.0);
    // (Q - 1)/2 = x^2 / (2 (Q + 1)) avoids cancellation at small x
    let sin_half = Complex64::new(0.0, (x * x / (2.0 * (big_q + 1.0))).sqrt());
    (cos_half, sin_half)
}

/// Closed-form sum for `d^j_{m'm}` given the half-angle cosine and sine.
pub fn wigner_d_explicit(j: usize, mp: i32, m: i32, cos_half: Complex64, sin_half: Complex64) -> Complex64 {
    let ji = j as i64;
    let (m, mp) = (m as i64, mp as i64);
    if mp.abs() > ji || m.abs() > ji {
        return Complex64::new(0.0, 0.0);
    }
    let f = |n: i64| factorial(n as usize);
    let pre = (f(ji + m) * f(ji - m) * f(ji + mp) * f(ji - mp)).sqrt();
    let k_lo = 0.max(m - mp);
    let k_hi = (ji + m).min(ji - mp);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in k_lo..=k_hi {
        let den = f(ji + m - k) * f(k) * f(ji - k - mp) * f(k - m + mp);
        let sign = parity(k - m + mp);
        let c = cos_half.powu((2 * ji - 2 * k + m - mp) as u32);
        let s = sin_half.powu((2 * k - m + mp) as u32);
        sum += c * s * (sign * pre / den);
    }
    sum
}

pub fn wigner_d_imag(x: f64, l_max: usize) -> WignerTable {
    let w = 2 * l_max + 1;
    let mut table = WignerTable {
        l_max,
        data: vec![Complex64::new(0.0, 0.0); (l_max + 1) * w * w],
    };
    let cos_theta = Complex64::new((1.0 + x * x).sqrt(), 0.0);
    let (ch, sh) = imaginary_half_angle(x);
    let lm = l_max as i32;
    for mp in -lm..=lm {
        for m in -lm..=lm {
            let l0 = mp.unsigned_abs().max(m.unsigned_abs()) as usize;
            let d0 = wigner_d_explicit(l0, mp, m, ch, sh);
            let idx = table.index(l0, mp, m);
            table.data[idx] = d0;
            if l0 == l_max {
                continue;
            }
            let d1 = wigner_d_explicit(l0 + 1, mp, m, ch, sh);
            let idx = table.index(l0 + 1, mp, m);
            table.data[idx] = d1;
            let (mf, mpf) = (m as f64, mp as f64);
            let (mut dm1, mut d) = (d0, d1);
            for l in l0 + 1..l_max {
                let lf = l as f64;
                let a = lf * (((lf + 1.0).powi(2) - mf * mf) * ((lf + 1.0).powi(2) - mpf * mpf)).sqrt();
                let b = 2.0 * lf + 1.0;
                let c = (lf + 1.0) * ((lf * lf - mf * mf) * (lf * lf - mpf * mpf)).sqrt();
                let next = ((cos_theta * (lf * (lf + 1.0)) - mf * mpf) * d * b - dm1 * c) / a;
                dm1 = d;
                d = next;
                let idx = table.index(l + 1, mp, m);
                table.data[idx] = next;
            }
        }
    }
    table
}

pub fn bessel_j0(x: f64) -> f64 {
    libm::j0(x)
}

const GL16: [(f64, f64); 8] = [
    (0.095_012_509_837_637_44, 0.189_450_610_455_068_5),
    (0.281_603_550_779_258_9, 0.182_603_415_044_923_6),
    (0.458_016_777_657_227_4, 0.169_156_519_395_002_5),
    (0.617_876_244_402_643_8, 0.149_595_988_816_576_7),
    (0.755_404_408_355_003, 0.124_628_971_255_533_9),
    (0.865_631_202_387_831_7, 0.095_158_511_682_492_8),
    (0.944_575_023_073_232_6, 0.062_253_523_938_647_89),
    (0.989_400_934_991_649_9, 0.027_152_459_411_754_09),
];

/// `int_0^x J0(t) dt` by 16-point Gauss-Legendre on unit panels.
pub fn cumulative_j0(x: f64) -> f64 {
    assert!(x >= 0.0, "cumulative J0 needs x >= 0");
    let panels = x.ceil().max(1.0) as usize;
    let h = x / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * h;
        for &(t, w) in GL16.iter() {
            sum += w * (libm::j0(mid + 0.5 * h * t) + libm::j0(mid - 0.5 * h * t));
        }
    }
    0.5 * h * sum
}
