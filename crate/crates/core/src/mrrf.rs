//! Rotated-reference-frame spherical-harmonic expansion: the symmetric
//! tridiagonal operator `B^m`, its eigenpairs and the normalization `Z^m`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::medium::OpticalMedium;

/// Default truncation order.
pub const DEFAULT_TRUNCATION: usize = 200;

const MAX_SWEEPS: usize = 60;

/// `B^m` on `l = |m|..=L`: zero diagonal, couplings
/// `b_l = sqrt(((l+1)^2 - m^2) / ((4(l+1)^2 - 1) sigma_{l+1} sigma_l))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    pub m: i32,
    pub l_max: usize,
    /// `off[k]` couples `l = |m|+k` and `l+1`.
    pub off: Vec<f64>,
}

impl TridiagonalOperator {
    pub fn dim(&self) -> usize {
        self.off.len() + 1
    }

    pub fn l_min(&self) -> usize {
        self.m.unsigned_abs() as usize
    }
}

pub fn build_b(m: i32, med: &OpticalMedium, l_max: usize) -> Result<TridiagonalOperator> {
    let a = m.unsigned_abs() as usize;
    if l_max < a + 1 {
        return Err(Error::Domain("truncation needs L >= |m| + 1"));
    }
    let mf = m as f64;
    let off = (a..l_max)
        .map(|l| {
            let lp = (l + 1) as f64;
            (lp * lp - mf * mf).sqrt() / ((4.0 * lp * lp - 1.0) * med.sigma(l) * med.sigma(l + 1)).sqrt()
        })
        .collect();
    Ok(TridiagonalOperator { m, l_max, off })
}

/// One eigenpair of `B^m`; `vector[k] = <|m|+k | psi>` with unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub nu: f64,
    pub vector: Vec<f64>,
}

/// Full eigen-decomposition by implicit-shift QL, eigenvalues descending.
/// The zero-diagonal 2x2 case is solved in closed form.
pub fn solve_modes(op: &TridiagonalOperator) -> Result<Vec<Mode>> {
    let n = op.dim();
    if n == 2 {
        let (b, h) = (op.off[0].abs(), core::f64::consts::FRAC_1_SQRT_2);
        let s = op.off[0].signum();
        return Ok(alloc::vec![
            Mode { nu: b, vector: alloc::vec![h, s * h] },
            Mode { nu: -b, vector: alloc::vec![h, -s * h] },
        ]);
    }
    let mut d = vec![0.0; n];
    let mut e = op.off.clone();
    e.push(0.0);
    // column-major eigenvector accumulator, z[i*n + k]: component i of vector k
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m] == 0.0 {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::Convergence {
                    iterations: iter,
                    partial: d[l],
                    estimate: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zk1 = z[k * n + i + 1];
                    let zk = z[k * n + i];
                    z[k * n + i + 1] = s * zk + c * zk1;
                    z[k * n + i] = c * zk - s * zk1;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).unwrap());
    Ok(order
        .into_iter()
        .map(|k| {
            let mut vector: Vec<f64> = (0..n).map(|i| z[i * n + k]).collect();
            // fix the sign so the lowest-l component is non-negative
            if vector[0] < 0.0 {
                vector.iter_mut().for_each(|v| *v = -*v);
            }
            Mode { nu: d[k], vector }
        })
        .collect())
}

/// Number of eigenvalues below `x` (Sturm sequence of the `LDL^T` pivots).
fn count_below(op: &TridiagonalOperator, x: f64) -> usize {
    let mut count = 0;
    let mut q = -x;
    if q < 0.0 {
        count += 1;
    }
    for b in &op.off {
        let prev = if q == 0.0 { f64::EPSILON * (b.abs() + 1.0) } else { q };
        q = -x - b * b / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue by bisection on the Sturm count.
pub fn largest_eigenvalue(op: &TridiagonalOperator) -> f64 {
    let n = op.dim();
    if n == 2 {
        return op.off[0].abs();
    }
    // Gershgorin bound for a zero-diagonal matrix
    let mut hi = 0.0f64;
    for i in 0..n {
        let left = if i > 0 { op.off[i - 1].abs() } else { 0.0 };
        let right = if i < op.off.len() { op.off[i].abs() } else { 0.0 };
        hi = hi.max(left + right);
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(op, mid) < n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `Z^m(nu_j) = 2 pi N_j / nu_j`.
pub fn z_norm(nu: f64, norm: f64) -> f64 {
    2.0 * PI * norm / nu
}

/// `Z` from an eigenvector and the coefficients `c_l`, matched at `l = |m|`:
/// `<l|psi> = sqrt(sigma_l) c_l / sqrt(Z)`.
pub fn z_from_vector(mode: &Mode, coeff_lowest: f64, sigma_lowest: f64) -> f64 {
    let ratio = sigma_lowest.sqrt() * coeff_lowest / mode.vector[0];
    ratio * ratio
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenfunctions::coeff_table;
    use crate::quadrature::Rules;
    use crate::spectrum::find_discrete;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn med(c: f64, f: &[f64]) -> OpticalMedium {
        OpticalMedium::from_albedo(c, f.to_vec()).unwrap()
    }

    #[test]
    fn entries() {
        let m = med(0.9, &[1.0, 0.3]);
        let b = build_b(0, &m, 5).unwrap();
        assert_relative_eq!(b.off[0], 1.0 / (3.0 * m.sigma(0) * m.sigma(1)).sqrt(), epsilon = 1e-15);
        let free = med(1e-300, &[1.0]);
        let b = build_b(2, &free, 8).unwrap();
        for (k, v) in b.off.iter().enumerate() {
            let lp = (k + 3) as f64;
            assert_relative_eq!(*v, ((lp * lp - 4.0) / (4.0 * lp * lp - 1.0)).sqrt(), epsilon = 1e-15);
        }
        assert!(build_b(1, &m, 1).is_err());
    }

    #[test]
    fn two_by_two() {
        let m = med(0.9997, &[1.0, 0.3]);
        let b = build_b(0, &m, 1).unwrap();
        let modes = solve_modes(&b).unwrap();
        let expect = 1.0 / (3.0 * m.sigma(0) * m.sigma(1)).sqrt();
        assert_eq!(modes[0].nu, expect);
        assert_eq!(modes[1].nu, -expect);
        // 1/sqrt(3 * 0.0003 * 0.70009) = 39.838...
        assert!((expect - 39.838).abs() < 1e-3);
        assert_eq!(largest_eigenvalue(&b), expect);
        for (mu_a, f1) in [(0.03, 0.0), (0.03, 0.3), (0.3, 0.3)] {
            let m = OpticalMedium::linear(mu_a, 100.0, f1).unwrap();
            let top = solve_modes(&build_b(0, &m, 1).unwrap()).unwrap()[0].nu;
            assert_eq!(top, 1.0 / (3.0 * m.sigma(0) * m.sigma(1)).sqrt());
        }
    }

    #[test]
    fn decomposition_reconstructs_operator() {
        let m = med(0.95, &[1.0, 0.5, 0.2]);
        let b = build_b(1, &m, 30).unwrap();
        let modes = solve_modes(&b).unwrap();
        let n = b.dim();
        for mode in &modes {
            let v = &mode.vector;
            let norm: f64 = v.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            for i in 0..n {
                let mut bv = 0.0;
                if i > 0 {
                    bv += b.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    bv += b.off[i] * v[i + 1];
                }
                assert!((bv - mode.nu * v[i]).abs() < 1e-11 * mode.nu.abs().max(1.0));
            }
        }
        for (a, z) in modes.iter().zip(modes.iter().rev()) {
            assert!((a.nu + z.nu).abs() < 1e-11);
        }
        for i in 0..n {
            for k in i + 1..n {
                let dot: f64 = modes[i].vector.iter().zip(&modes[k].vector).map(|(x, y)| x * y).sum();
                assert!(dot.abs() < 1e-11);
            }
        }
    }

    #[test]
    fn converges_to_dispersion_root() {
        let rules = Rules::production();
        let m = med(0.9, &[1.0]);
        let nu0 = find_discrete(0, &m, &rules).unwrap().eigenvalues[0];
        let mut prev = f64::INFINITY;
        for l in [20usize, 50, 100, 200] {
            let b = build_b(0, &m, l).unwrap();
            let top = largest_eigenvalue(&b);
            let err = (top - nu0).abs();
            assert!(err <= prev + 1e-14);
            prev = err;
            assert_relative_eq!(top, solve_modes(&b).unwrap()[0].nu, epsilon = 1e-12);
        }
        assert!(prev <= 1e-8, "{prev}");
    }

    #[test]
    fn eigenvector_decay_and_z_routes() {
        let rules = Rules::production();
        for (c, f1) in [(100.0 / 100.03, 0.0), (100.0 / 100.03, 0.3), (100.0 / 100.3, 0.3)] {
            let m = med(c, &[1.0, f1]);
            let s = find_discrete(0, &m, &rules).unwrap();
            let nu0 = s.eigenvalues[0];
            let b = build_b(0, &m, DEFAULT_TRUNCATION).unwrap();
            let mode = &solve_modes(&b).unwrap()[0];
            assert!((mode.nu - nu0).abs() < 1e-8 * nu0);
            for l in 10..40 {
                assert!(mode.vector[l + 1].abs() < mode.vector[l].abs());
            }
            let z_case = z_norm(nu0, s.norms[0]);
            assert!(z_case > 0.0);
            let coeffs = coeff_table(nu0, 0, &m, DEFAULT_TRUNCATION, &rules).unwrap();
            let z_vec = z_from_vector(mode, coeffs.get(0), m.sigma(0));
            assert!((z_vec - z_case).abs() < 1e-6 * z_case, "{z_vec} {z_case}");
            // one constant links every l
            let scale = z_case.sqrt();
            for l in 0..30 {
                let expect = m.sigma(l).sqrt() * coeffs.get(l) / scale;
                assert!((mode.vector[l] - expect).abs() < 1e-6, "l={l}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn spectrum_is_symmetric(c in 0.0f64..0.999, g in 0.0f64..0.9, m in 0i32..=3, l in 5usize..40) {
            let med = OpticalMedium::henyey_greenstein(1.0 - c, c, g, 3).unwrap();
            let b = build_b(m, &med, l + m as usize).unwrap();
            let modes = solve_modes(&b).unwrap();
            let top = modes[0].nu;
            for (a, z) in modes.iter().zip(modes.iter().rev()) {
                prop_assert!((a.nu + z.nu).abs() < 1e-10 * top.max(1.0));
            }
            prop_assert!((largest_eigenvalue(&b) - top).abs() < 1e-11 * top.max(1.0));
        }
    }
}
