//! Chandrasekhar-type polynomials `h_l^m(nu)` and the scattering kernel
//! `g^m(nu, mu)` built from them.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::medium::OpticalMedium;
use crate::scalar::Scalar;
use crate::specfun::{factorial_ratio, legendre_seed, parity};

/// `h_l^m(nu)` for `l = |m|..=l_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct HTable<T> {
    pub m: i32,
    pub values: Vec<T>,
}

impl<T: Copy> HTable<T> {
    pub fn get(&self, l: usize) -> T {
        self.values[l - self.m.unsigned_abs() as usize]
    }
}

pub(crate) fn check_order(m: i32, med: &OpticalMedium) -> Result<()> {
    if m.unsigned_abs() as usize > med.order() {
        Err(Error::EmptySpectrum { m, n: med.order() })
    } else {
        Ok(())
    }
}

/// Upward recurrence `(l-m+1) h_{l+1} = nu (2l+1) sigma_l h_l - (l+m) h_{l-1}`
/// from `h_{|m|} = p_{|m|}^m`, evaluated for `|m|` and mapped to negative `m`.
pub fn h_table<T: Scalar>(nu: T, m: i32, med: &OpticalMedium, l_max: usize) -> Result<HTable<T>> {
    check_order(m, med)?;
    let a = m.unsigned_abs() as usize;
    let top = l_max.max(a);
    let mf = a as f64;
    let mut values = Vec::with_capacity(top - a + 1);
    values.push(T::real(legendre_seed(a as i32)));
    let mut prev = T::zero();
    for l in a..top {
        let lf = l as f64;
        let cur = values[l - a];
        let next = (nu * cur * ((2.0 * lf + 1.0) * med.sigma(l)) - prev * (lf + mf)) / (lf - mf + 1.0);
        prev = cur;
        values.push(next);
    }
    if m < 0 {
        let s = parity(a as i64);
        for (k, v) in values.iter_mut().enumerate() {
            *v = *v * (s * factorial_ratio(a + k, a as i32));
        }
    }
    Ok(HTable { m, values })
}

/// `g^m(nu, .)` as the polynomial `sum_l w_l p_l^m(mu)` with
/// `w_l = (2l+1) f_l (l-m)!/(l+m)! h_l^m(nu)`, `l = |m|..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GKernel<T> {
    pub m: i32,
    weights: Vec<T>,
}

impl<T: Scalar> GKernel<T> {
    pub fn new(nu: T, m: i32, med: &OpticalMedium) -> Result<Self> {
        let n = med.order();
        let h = h_table(nu, m, med, n)?;
        let a = m.unsigned_abs() as usize;
        let weights = (a..=n)
            .map(|l| h.get(l) * ((2 * l + 1) as f64 * med.coeff(l) * factorial_ratio(l, m)))
            .collect();
        Ok(Self { m, weights })
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn degree(&self) -> usize {
        self.weights.len() - 1
    }

    /// `g^m(nu, mu)` by running the `p` recurrence alongside the sum.
    pub fn eval<U: Scalar>(&self, mu: U) -> U
    where
        T: Into<U>,
    {
        let a = self.m.unsigned_abs() as usize;
        let mf = self.m as f64;
        let mut prev = U::zero();
        let mut cur = U::real(legendre_seed(self.m));
        let mut s = U::zero();
        for (k, w) in self.weights.iter().enumerate() {
            s += (*w).into() * cur;
            let lf = (a + k) as f64;
            let next = (mu * cur * (2.0 * lf + 1.0) - prev * (lf + mf)) / (lf - mf + 1.0);
            prev = cur;
            cur = next;
        }
        s
    }
}

pub fn g_kernel(nu: f64, mu: f64, m: i32, med: &OpticalMedium) -> Result<f64> {
    Ok(GKernel::new(nu, m, med)?.eval(mu))
}
