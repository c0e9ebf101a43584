//! Infinite-medium Green's functions: the plane-source form in `z` and the
//! point-source form through the transverse Fourier variable `q`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::chandra::GKernel;
use crate::error::{Error, Result};
use crate::medium::OpticalMedium;
use crate::quadrature::{gauss_legendre, Rules};
use crate::rotation::{combined_factor_continued, mu_rotated, Direction, FrameParams, HarmonicCache, RotatedFrame};
use crate::spectrum::{continuum_point, dispersion, find_discrete, ContinuumPoint, ContinuumTable, ROOT_RESIDUAL};

/// Imaginary parts at or below this make a pole real (principal value plus delta).
pub const REAL_POLE: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct DiscreteMode {
    pub nu: f64,
    /// Positive normalization shared by `+nu` and `-nu`.
    pub norm: f64,
    plus: GKernel<f64>,
    minus: GKernel<f64>,
}

impl DiscreteMode {
    fn kernel(&self, sign: f64) -> &GKernel<f64> {
        if sign > 0.0 {
            &self.plus
        } else {
            &self.minus
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContinuumNode {
    pub point: ContinuumPoint,
    pub weight: f64,
    plus: GKernel<f64>,
    minus: GKernel<f64>,
}

impl ContinuumNode {
    fn new(point: ContinuumPoint, weight: f64, m: i32, med: &OpticalMedium) -> Result<Self> {
        Ok(Self {
            point,
            weight,
            plus: GKernel::new(point.nu, m, med)?,
            minus: GKernel::new(-point.nu, m, med)?,
        })
    }

    fn kernel(&self, sign: f64) -> &GKernel<f64> {
        if sign > 0.0 {
            &self.plus
        } else {
            &self.minus
        }
    }
}

/// Discrete and tabulated continuum data of one order `m >= 0`; `-m` shares it.
#[derive(Debug, Clone)]
pub struct ModeSet {
    pub m: i32,
    pub discrete: Vec<DiscreteMode>,
    pub continuum: Vec<ContinuumNode>,
}

impl ModeSet {
    pub fn new(m: i32, med: &OpticalMedium, rules: &Rules) -> Result<Self> {
        let spec = find_discrete(m, med, rules)?;
        let mut discrete = Vec::with_capacity(spec.len());
        for ((&nu, &norm), &res) in spec.eigenvalues.iter().zip(&spec.norms).zip(&spec.residuals) {
            if res > ROOT_RESIDUAL {
                return Err(Error::NotAnEigenvalue { nu, residual: res });
            }
            discrete.push(DiscreteMode {
                nu,
                norm: norm.abs(),
                plus: GKernel::new(nu, m, med)?,
                minus: GKernel::new(-nu, m, med)?,
            });
        }
        let table = ContinuumTable::new(m, med, rules)?;
        let continuum = table
            .iter()
            .map(|(p, w)| ContinuumNode::new(*p, w, m, med))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { m, discrete, continuum })
    }
}

/// Transverse quadrature controls for the point-source Green's function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QGrid {
    /// Gauss nodes per radial panel.
    pub panel_nodes: usize,
    /// Width of the first radial panel; later panels double.
    pub first_panel: f64,
    /// Largest panel width in units of `1/|z - z0|`.
    pub panel_width: f64,
    /// Radial cutoff where `sqrt(1/nu0^2 + q^2) |z - z0|` reaches this exponent.
    pub cutoff_exponent: f64,
    pub azimuth_min: usize,
    /// Smallest `|z - z0|` accepted.
    pub floor: f64,
}

impl Default for QGrid {
    fn default() -> Self {
        Self {
            panel_nodes: 16,
            first_panel: 0.125,
            panel_width: 4.0,
            cutoff_exponent: 32.0,
            azimuth_min: 32,
            floor: 0.1,
        }
    }
}

impl QGrid {
    /// Both node counts doubled.
    pub fn refined(&self) -> Self {
        Self {
            panel_nodes: 2 * self.panel_nodes,
            azimuth_min: 2 * self.azimuth_min,
            ..*self
        }
    }
}

/// One transverse node; `weight` carries `e^{i q.rho} q dq dpsi / (2 pi)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QNode {
    pub q: [f64; 2],
    pub weight: Complex64,
}

/// Medium, spectra of every order and quadrature settings.
#[derive(Debug, Clone)]
pub struct GreensEvaluator {
    medium: OpticalMedium,
    rules: Rules,
    modes: Vec<ModeSet>,
    pub grid: QGrid,
}

fn weight_power(x: f64, m: i32) -> f64 {
    (1.0 - x * x).powi(m.abs())
}

/// `PV int_0^1 dt / (t - a)` for `a` inside or `int_0^1 dt/(t - a)` outside.
fn unit_log(a: f64) -> f64 {
    ((1.0 - a) / a).abs().ln()
}

impl GreensEvaluator {
    pub fn new(medium: OpticalMedium, rules: Rules) -> Result<Self> {
        let modes = (0..=medium.order() as i32)
            .map(|m| ModeSet::new(m, &medium, &rules))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            medium,
            rules,
            modes,
            grid: QGrid::default(),
        })
    }

    pub fn medium(&self) -> &OpticalMedium {
        &self.medium
    }

    pub fn rules(&self) -> &Rules {
        &self.rules
    }

    pub fn modes(&self, m: i32) -> &ModeSet {
        &self.modes[m.unsigned_abs() as usize]
    }

    /// Slowest decay length `nu_0^0`, or 1 when the order-0 spectrum is empty.
    pub fn leading_eigenvalue(&self) -> f64 {
        self.modes[0].discrete.first().map_or(1.0, |d| d.nu)
    }

    fn half_c(&self) -> f64 {
        0.5 * self.medium.albedo()
    }

    /// `G(z, s; z0, s0)` of a plane source, summed over all orders.
    pub fn green_1d(&self, z: f64, s: &Direction, z0: f64, s0: &Direction) -> Result<f64> {
        if z == z0 {
            return Err(Error::JumpPlane);
        }
        let dphi = s.phi - s0.phi;
        let mut total = 0.0;
        for ms in &self.modes {
            let t = self.green_1d_order(ms.m, z, s.mu, z0, s0.mu)?;
            let mult = if ms.m == 0 { 1.0 } else { 2.0 * (ms.m as f64 * dphi).cos() };
            total += mult * t;
        }
        Ok(total)
    }

    /// Order-`m` term of the plane-source form without the `e^{i m (phi - phi0)}` phase.
    pub fn green_1d_order(&self, m: i32, z: f64, mu: f64, z0: f64, mu0: f64) -> Result<f64> {
        if z == z0 {
            return Err(Error::JumpPlane);
        }
        let ms = self.modes(m);
        let sign = if z > z0 { 1.0 } else { -1.0 };
        let dz = (z - z0).abs();
        let hc = self.half_c();
        let mut acc = 0.0;
        for d in &ms.discrete {
            let nu = sign * d.nu;
            let k = d.kernel(sign);
            let a = hc * nu * k.eval(mu) / (nu - mu);
            let b = hc * nu * k.eval(mu0) / (nu - mu0);
            acc += a * b * (-dz / d.nu).exp() / d.norm;
        }
        acc += self.continuum_1d(ms, sign, mu, mu0, dz)?;
        Ok(acc * (weight_power(mu, m) * weight_power(mu0, m)).sqrt() / (2.0 * PI))
    }

    fn continuum_1d(&self, ms: &ModeSet, sign: f64, mu: f64, mu0: f64, dz: f64) -> Result<f64> {
        let m = ms.m;
        let hc = self.half_c();
        let (alpha, beta) = (sign * mu, sign * mu0);
        let inside = |x: f64| x > 0.0 && x < 1.0;
        if inside(alpha) && alpha == beta {
            return Err(Error::Domain("plane Green's function is singular for mu = mu0"));
        }
        // numerator of the product of regular parts at t, nu' = sign * t
        let numerator = |t: f64, cp: &ContinuumPoint, k: &GKernel<f64>| {
            let nu = sign * t;
            (-dz / t).exp() / cp.norm * (hc * nu) * (hc * nu) * k.eval(mu) * k.eval(mu0)
        };
        let pole = |x: f64| -> Result<Option<(ContinuumPoint, GKernel<f64>)>> {
            if inside(x) {
                Ok(Some((
                    continuum_point(x, m, &self.medium, &self.rules)?,
                    GKernel::new(sign * x, m, &self.medium)?,
                )))
            } else {
                Ok(None)
            }
        };
        let pa = pole(alpha)?;
        let pb = pole(beta)?;
        let ra = pa.as_ref().map_or(0.0, |(cp, k)| numerator(alpha, cp, k) / (alpha - beta));
        let rb = pb.as_ref().map_or(0.0, |(cp, k)| numerator(beta, cp, k) / (beta - alpha));
        let mut acc = 0.0;
        for node in &ms.continuum {
            let t = node.point.nu;
            let f = numerator(t, &node.point, node.kernel(sign)) / ((t - alpha) * (t - beta));
            acc += node.weight * (f - ra / (t - alpha) - rb / (t - beta));
        }
        if pa.is_some() {
            acc += ra * unit_log(alpha);
        }
        if pb.is_some() {
            acc += rb * unit_log(beta);
        }
        // delta part of one factor against the regular part of the other
        if let Some((cp, k)) = &pa {
            let reg = hc * mu * k.eval(mu0) / (mu - mu0);
            acc += (-dz / alpha).exp() / cp.norm * cp.lambda / weight_power(mu, m) * reg;
        }
        if let Some((cp, k)) = &pb {
            let reg = hc * mu0 * k.eval(mu) / (mu0 - mu);
            acc += (-dz / beta).exp() / cp.norm * cp.lambda / weight_power(mu0, m) * reg;
        }
        Ok(acc)
    }

    /// `G^(q)`, the transverse Fourier transform of the point-source Green's
    /// function, normalized so that `G^(0)` is the plane-source form.
    pub fn transverse_kernel(&self, q: [f64; 2], z: f64, s: &Direction, z0: f64, s0: &Direction) -> Result<Complex64> {
        if z == z0 {
            return Err(Error::JumpPlane);
        }
        let geo = Transverse {
            sign: if z > z0 { 1.0 } else { -1.0 },
            q,
            dz: (z - z0).abs(),
            s: *s,
            s0: *s0,
            cache: HarmonicCache::new(s, self.medium.order()),
            cache0: HarmonicCache::new(s0, self.medium.order()),
        };
        let total = self.discrete_transverse(&geo)? + self.continuum_transverse(&geo)?;
        Ok(total / (2.0 * PI))
    }

    fn orders(&self) -> core::ops::RangeInclusive<i32> {
        let n = self.medium.order() as i32;
        -n..=n
    }

    fn discrete_transverse(&self, geo: &Transverse) -> Result<Complex64> {
        let hc = self.half_c();
        let mut acc = Complex64::new(0.0, 0.0);
        for m in self.orders() {
            for d in &self.modes(m).discrete {
                let nu = geo.sign * d.nu;
                let frame = RotatedFrame::new(FrameParams::new(nu, geo.q), m.unsigned_abs() as usize);
                let big_q = frame.params.big_q;
                let k = d.kernel(geo.sign);
                let phi = |dir: &Direction, cache: &HarmonicCache, order: i32| -> Result<Complex64> {
                    let mu_k = mu_rotated(dir, &frame.params);
                    let gap = Complex64::new(nu, 0.0) - mu_k;
                    if gap.norm() <= crate::eigenfunctions::POLE_GUARD {
                        return Err(Error::PoleHit { distance: gap.norm() });
                    }
                    Ok(k.eval(mu_k) * (hc * nu) / gap * frame.combined_factor_cached(order, cache))
                };
                // the source factor is the continuation of the conjugate, not its value
                let pair = phi(&geo.s, &geo.cache, m)? * phi(&geo.s0, &geo.cache0, -m)?;
                acc += pair * ((-big_q * geo.dz / d.nu).exp() / (big_q * d.norm));
            }
        }
        Ok(acc)
    }

    /// Envelope and the two regular numerators at `t` for order `m`.
    fn continuum_numerator(&self, geo: &Transverse, m: i32, t: f64, frame: &RotatedFrame, norm: f64, k: &GKernel<f64>) -> [Complex64; 3] {
        let nu = geo.sign * t;
        let hc = self.half_c();
        let big_q = frame.params.big_q;
        let mu_k = mu_rotated(&geo.s, &frame.params);
        let mu0_k = mu_rotated(&geo.s0, &frame.params);
        let env = (-big_q * geo.dz / t).exp() / (big_q * norm);
        let angular = frame.combined_factor_cached(m, &geo.cache) * frame.combined_factor_cached(-m, &geo.cache0);
        [angular * env, k.eval(mu_k) * (hc * nu), k.eval(mu0_k) * (hc * nu)]
    }

    fn continuum_transverse(&self, geo: &Transverse) -> Result<Complex64> {
        let n = self.medium.order();
        let qmag = geo.q[0].hypot(geo.q[1]);
        let phi_q = geo.q[1].atan2(geo.q[0]);
        let (s, s0, sign) = (&geo.s, &geo.s0, geo.sign);
        // t - sign mu(k) and t - sign mu0(k) as functions of t
        let pa = PoleFactor::new(sign * s.mu, -s.sin_theta() * (s.phi - phi_q).cos(), qmag);
        let pb = PoleFactor::new(sign * s0.mu, -s0.sin_theta() * (s0.phi - phi_q).cos(), qmag);
        let (root_a, root_b) = (pa.root(), pb.root());
        if let (Some(ta), Some(tb)) = (root_a, root_b) {
            if (ta.t - tb.t).norm() <= REAL_POLE {
                return Err(Error::Domain("point Green's function kernel is singular for coincident poles"));
            }
        }
        let mut acc = Complex64::new(0.0, 0.0);
        // residues of the linearized poles, per order
        let mut subtract: Vec<(i32, Complex64, Linear)> = Vec::new();
        for (first, (pole, other, root)) in [(true, (&pa, &pb, root_a)), (false, (&pb, &pa, root_b))] {
            let Some(Root { t: root, big_q }) = root else { continue };
            let inside = root.re > 0.0 && root.re < 1.0;
            let slope = pole.derivative_at(root, big_q);
            if root.im.abs() > REAL_POLE || !inside {
                for m in self.orders() {
                    let [delta, r] = self.continued_pole(geo, m, root, big_q, first, other)?;
                    acc += delta / slope;
                    if inside {
                        let lin = Linear { root, slope };
                        acc += r * lin.unit_integral();
                        subtract.push((m, r, lin));
                    }
                }
                continue;
            }
            let t = root.re;
            let lin = Linear {
                root: Complex64::new(t, 0.0),
                slope,
            };
            let frame = RotatedFrame::new(FrameParams::new(sign * t, geo.q), n);
            for m in self.orders() {
                let cp = continuum_point(t, m, &self.medium, &self.rules)?;
                let k = GKernel::new(sign * t, m, &self.medium)?;
                let [env, reg_a, reg_b] = self.continuum_numerator(geo, m, t, &frame, cp.norm, &k);
                let r = env * reg_a * reg_b / other.value(t);
                acc += r * lin.unit_integral();
                // delta of this factor against the regular part of the other
                let reg_other = if first { reg_b } else { reg_a };
                acc += env * reg_other * (cp.lambda / weight_power(t, m)) / (other.value(t) * sign) / slope.re.abs();
                subtract.push((m, r, lin));
            }
        }
        let unit = &self.rules.unit;
        for (i, (t, w)) in unit.iter().enumerate() {
            let frame = RotatedFrame::new(FrameParams::new(sign * t, geo.q), n);
            let den = pa.value(t) * pb.value(t);
            for m in self.orders() {
                let node = &self.modes(m).continuum[i];
                let [env, reg_a, reg_b] = self.continuum_numerator(geo, m, t, &frame, node.point.norm, node.kernel(sign));
                let mut f = env * reg_a * reg_b / den;
                for (mm, r, lin) in &subtract {
                    if *mm == m {
                        f -= r / lin.at(t);
                    }
                }
                acc += f * w;
            }
        }
        Ok(acc)
    }

    /// Delta part times `D'(t)` and residue numerator of the factor whose root
    /// `t` is complex. Over the norm, the delta weight continues to
    /// `1 / (t Lambda(t))` on the principal sheet from either side of the cut.
    fn continued_pole(&self, geo: &Transverse, m: i32, t: Complex64, big_q: Complex64, first: bool, other: &PoleFactor) -> Result<[Complex64; 2]> {
        let qmag = geo.q[0].hypot(geo.q[1]);
        let phi_q = geo.q[1].atan2(geo.q[0]);
        let sign = geo.sign;
        let nu = t * sign;
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let mu_k = |dir: &Direction| big_q * dir.mu - i * nu * (qmag * dir.sin_theta() * (dir.phi - phi_q).cos());
        let k = GKernel::new(nu, m, &self.medium)?;
        let reg_a = k.eval(mu_k(&geo.s)) * nu * self.half_c();
        let reg_b = k.eval(mu_k(&geo.s0)) * nu * self.half_c();
        let angular = combined_factor_continued(nu, big_q, qmag, phi_q, m, &geo.s) * combined_factor_continued(nu, big_q, qmag, phi_q, -m, &geo.s0);
        let env = angular * (-big_q * geo.dz / t).exp() / big_q / other.value_at(t, big_q);
        let lambda = dispersion(t, m, &self.medium, &self.rules)?;
        let w = (one - t * t).powu(m.unsigned_abs());
        let jump = k.eval(nu) * t * w * (0.5 * PI * self.medium.albedo());
        // the norm continued off the cut is t Lambda (Lambda -+ 2i jump) / w
        let other_side = if t.im > 0.0 { lambda - i * jump * 2.0 } else { lambda + i * jump * 2.0 };
        let reg_other = if first { reg_b } else { reg_a };
        Ok([env * reg_other / (t * lambda * sign), env * reg_a * reg_b * w / (t * lambda * other_side)])
    }

    /// Transverse nodes for `G(rho, z; 0, z0)`; the azimuth grid starts at the
    /// source azimuth `psi0`.
    pub fn q_nodes(&self, rho: [f64; 2], dz: f64, psi0: f64) -> Result<Vec<QNode>> {
        let dz = dz.abs();
        if dz < self.grid.floor {
            return Err(Error::Domain("|z - z0| below the transverse-integration floor"));
        }
        let g = self.grid;
        let nu0 = self.leading_eigenvalue();
        let reach = g.cutoff_exponent / dz;
        let q_max = (reach * reach - 1.0 / (nu0 * nu0)).max(0.0).sqrt();
        let cap = g.panel_width / dz;
        let base = gauss_legendre(g.panel_nodes);
        let rho_mag = rho[0].hypot(rho[1]);
        let mut nodes = Vec::new();
        let (mut a, mut width) = (0.0, g.first_panel.min(cap));
        while a < q_max {
            let b = (a + width).min(q_max);
            let panel = (a, b);
            a = b;
            width = (2.0 * width).min(cap);
            let (a, b) = panel;
            for (kq, wq) in base.mapped(a, b).iter() {
                // enough azimuth points to resolve e^{i q rho cos}
                let na = g.azimuth_min.max(2 * (kq * rho_mag).ceil() as usize + 16);
                let dpsi = 2.0 * PI / na as f64;
                for j in 0..na {
                    let psi = psi0 + j as f64 * dpsi;
                    let qv = [kq * psi.cos(), kq * psi.sin()];
                    let phase = Complex64::from_polar(1.0, qv[0] * rho[0] + qv[1] * rho[1]);
                    nodes.push(QNode {
                        q: qv,
                        weight: phase * (wq * kq * dpsi / (4.0 * PI * PI)),
                    });
                }
            }
        }
        Ok(nodes)
    }

    /// `G(rho, z, s; 0, z0, s0)` of a point source at the origin of its plane.
    pub fn green_3d(&self, rho: [f64; 2], z: f64, s: &Direction, z0: f64, s0: &Direction) -> Result<f64> {
        let nodes = self.q_nodes(rho, z - z0, s0.phi)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for node in nodes {
            acc += self.transverse_kernel(node.q, z, s, z0, s0)? * node.weight;
        }
        Ok(acc.re)
    }
}

struct Transverse {
    sign: f64,
    q: [f64; 2],
    dz: f64,
    s: Direction,
    s0: Direction,
    cache: HarmonicCache,
    cache0: HarmonicCache,
}

/// `D(t) = t - mu Q(t q) - i t q tau`, the shifted denominator of one factor.
#[derive(Debug, Clone, Copy)]
struct PoleFactor {
    mu: f64,
    tau: f64,
    q: f64,
}

#[derive(Debug, Clone, Copy)]
struct Linear {
    root: Complex64,
    slope: Complex64,
}

impl Linear {
    fn at(&self, t: f64) -> Complex64 {
        (Complex64::new(t, 0.0) - self.root) * self.slope
    }
}

impl PoleFactor {
    fn new(mu: f64, tau: f64, q: f64) -> Self {
        Self { mu, tau, q }
    }

    fn big_q(&self, t: f64) -> f64 {
        (t * self.q).hypot(1.0)
    }

    fn value(&self, t: f64) -> Complex64 {
        Complex64::new(t - self.mu * self.big_q(t), -t * self.q * self.tau)
    }

    /// `D` at complex `t`, given the branch `big_q` of `Q(t q)` there.
    fn value_at(&self, t: Complex64, big_q: Complex64) -> Complex64 {
        t - big_q * self.mu - Complex64::new(0.0, self.q * self.tau) * t
    }

    fn derivative_at(&self, t: Complex64, big_q: Complex64) -> Complex64 {
        Complex64::new(1.0, -self.q * self.tau) - t * (self.mu * self.q * self.q) / big_q
    }

    /// Root of `D` continued from `t = mu` at `q = 0`, with `Q` there. The root
    /// stays off the real axis for `q tau != 0`, so its side of the cut never
    /// changes. It is left unpolished: next to the cut of `Q` on the imaginary
    /// axis, Newton on the principal branch can land on the other sheet.
    fn root(&self) -> Option<Root> {
        if self.mu <= 0.0 {
            return None;
        }
        let shift = Complex64::new(1.0, -self.q * self.tau);
        let t = Complex64::new(self.mu, 0.0) / (shift * shift - self.mu * self.mu * self.q * self.q).sqrt();
        Some(Root { t, big_q: shift * t / self.mu })
    }
}

#[derive(Debug, Clone, Copy)]
struct Root {
    t: Complex64,
    big_q: Complex64,
}

impl Linear {
    /// `int_0^1 dt / L(t)`; principal value when the root is real.
    fn unit_integral(&self) -> Complex64 {
        if self.root.im == 0.0 {
            return Complex64::new(unit_log(self.root.re), 0.0) / self.slope;
        }
        let one = Complex64::new(1.0, 0.0);
        ((one - self.root).ln() - (-self.root).ln()) / self.slope
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn iso() -> &'static GreensEvaluator {
        static G: OnceLock<GreensEvaluator> = OnceLock::new();
        G.get_or_init(|| GreensEvaluator::new(OpticalMedium::from_albedo(0.9, alloc::vec![1.0]).unwrap(), Rules::production()).unwrap())
    }

    fn lin() -> &'static GreensEvaluator {
        static G: OnceLock<GreensEvaluator> = OnceLock::new();
        G.get_or_init(|| {
            GreensEvaluator::new(OpticalMedium::from_albedo(0.95, alloc::vec![1.0, 0.3]).unwrap(), Rules::production()).unwrap()
        })
    }

    /// Coarser continuum rule for the transverse-integration tests.
    fn lin_coarse() -> &'static GreensEvaluator {
        static G: OnceLock<GreensEvaluator> = OnceLock::new();
        G.get_or_init(|| {
            GreensEvaluator::new(OpticalMedium::from_albedo(0.95, alloc::vec![1.0, 0.3]).unwrap(), Rules::with_orders(128, 64))
                .unwrap()
        })
    }

    fn dir(mu: f64, phi: f64) -> Direction {
        Direction::new(mu, phi).unwrap()
    }

    #[test]
    fn jump_plane_rejected() {
        assert!(matches!(iso().green_1d(1.0, &dir(0.3, 0.0), 1.0, &dir(0.2, 0.0)), Err(Error::JumpPlane)));
    }

    #[test]
    fn far_field_ratio() {
        let g = iso();
        let nu0 = g.leading_eigenvalue();
        let (s, s0) = (dir(0.4, 0.2), dir(-0.3, 1.0));
        let a = g.green_1d(15.0, &s, 0.0, &s0).unwrap();
        let b = g.green_1d(16.0, &s, 0.0, &s0).unwrap();
        assert!(((b / a) / (-1.0 / nu0).exp() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn reciprocity() {
        for g in [iso(), lin()] {
            for &(z, z0) in &[(1.3, 0.2), (-0.5, 0.7)] {
                for &(mu, mu0) in &[(0.4, 0.7), (-0.2, 0.5), (0.9, -0.6), (-0.8, -0.3)] {
                    let (s, s0) = (dir(mu, 0.3), dir(mu0, 1.4));
                    let a = g.green_1d(z, &s, z0, &s0).unwrap();
                    let b = g.green_1d(z0, &s0.reversed(), z, &s.reversed()).unwrap();
                    assert!((a - b).abs() < 1e-10 * a.abs().max(1e-3), "{a} {b}");
                }
            }
        }
    }

    #[test]
    fn higher_orders_vanish_under_azimuthal_integral() {
        let g = lin();
        let n = 12;
        let mut acc = 0.0;
        for j in 0..n {
            let phi = 2.0 * PI * j as f64 / n as f64;
            acc += g.green_1d(1.0, &dir(0.3, phi), 0.0, &dir(0.6, 0.0)).unwrap() / n as f64;
        }
        let m0 = g.green_1d_order(0, 1.0, 0.3, 0.0, 0.6).unwrap();
        assert!((acc - m0).abs() < 1e-13 * m0.abs());
    }

    /// Plane density `int G ds ds0` against the isotropic closed form built from
    /// the same spectrum: `(1/2)[e^{-z/nu0}/N0 + int_0^1 e^{-z/nu}/N dnu] * 2 pi`.
    #[test]
    fn angular_integral_is_positive_and_matches_mode_sum() {
        let g = iso();
        let (rule, rule0) = (gauss_legendre(64), gauss_legendre(63));
        let z = 1.5;
        let mut total = 0.0;
        for (mu, w) in rule.iter() {
            for (mu0, w0) in rule0.iter() {
                total += w * w0 * 4.0 * PI * PI * g.green_1d(z, &dir(mu, 0.0), 0.0, &dir(mu0, 0.0)).unwrap();
            }
        }
        assert!(total > 0.0);
        // the uncollided delta(s - s0) part sits off the sampled support
        let ballistic: f64 = gauss_legendre(200).mapped(0.0, 1.0).iter().map(|(mu, w)| w * (-z / mu).exp() / mu).sum();
        total += 2.0 * PI * ballistic;
        let ms = g.modes(0);
        let d = &ms.discrete[0];
        let mut expect = (-z / d.nu).exp() / d.norm;
        for node in &ms.continuum {
            expect += node.weight * (-z / node.point.nu).exp() / node.point.norm;
        }
        // int phi dmu = 1 for every mode: 2 pi * (1/2 pi)*2 pi normalizations
        expect *= 2.0 * PI;
        assert!((total / expect - 1.0).abs() < 1e-4, "{total} {expect}");
    }

    #[test]
    fn transverse_kernel_at_origin_is_plane_form() {
        for g in [iso(), lin()] {
            for &(z, z0) in &[(1.0, 0.0), (0.0, 0.8)] {
                for &(mu, mu0) in &[(0.4, 0.7), (-0.2, 0.5), (0.9, -0.6), (-0.8, -0.3)] {
                    let (s, s0) = (dir(mu, 0.3), dir(mu0, 1.4));
                    let a = g.green_1d(z, &s, z0, &s0).unwrap();
                    let b = g.transverse_kernel([0.0, 0.0], z, &s, z0, &s0).unwrap();
                    assert!((b.re - a).abs() < 1e-10 * a.abs().max(1e-3), "{a} {b}");
                    assert!(b.im.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn isotropic_point_kernel_has_single_order() {
        let g = iso();
        assert_eq!(g.medium().order(), 0);
        assert_eq!(g.modes(0).discrete.len(), 1);
        let (s, s0) = (dir(-0.4, 0.3), dir(-0.2, 1.1));
        let a = g.transverse_kernel([0.3, 0.1], 1.0, &s, 0.0, &s0).unwrap();
        let mut two = g.clone();
        two.medium = OpticalMedium::from_albedo(0.9, alloc::vec![1.0, 0.0]).unwrap();
        two.modes.push(ModeSet::new(1, &two.medium, &two.rules).unwrap());
        let b = two.transverse_kernel([0.3, 0.1], 1.0, &s, 0.0, &s0).unwrap();
        assert!(two.modes(1).discrete.is_empty());
        assert!((a - b).norm() < 1e-12 * a.norm(), "{a} {b}");
    }

    #[test]
    fn point_source_rotational_symmetry() {
        let g = lin_coarse();
        let (s, s0) = (dir(-0.5, 0.4), dir(-0.3, -0.7));
        let rho = [0.3, -0.2];
        let a = g.green_3d(rho, 1.0, &s, 0.0, &s0).unwrap();
        let gam = 0.9f64;
        let rr = [rho[0] * gam.cos() - rho[1] * gam.sin(), rho[0] * gam.sin() + rho[1] * gam.cos()];
        let b = g.green_3d(rr, 1.0, &s.turned(gam), 0.0, &s0.turned(gam)).unwrap();
        assert!((a - b).abs() < 1e-9 * a.abs(), "{a} {b}");
    }

    #[test]
    fn point_source_grid_refinement() {
        let base = lin_coarse().clone();
        let mut fine = base.clone();
        fine.grid = base.grid.refined();
        let (s, s0) = (dir(-0.5, 0.4), dir(-0.3, -0.7));
        for &dz in &[0.5, 1.5] {
            let a = base.green_3d([0.2, 0.1], dz, &s, 0.0, &s0).unwrap();
            let b = fine.green_3d([0.2, 0.1], dz, &s, 0.0, &s0).unwrap();
            assert!((a - b).abs() < 1e-6 * b.abs(), "{dz}: {a} {b}");
        }
    }

    #[test]
    fn nonzero_orders_vanish_over_the_sphere() {
        let med = OpticalMedium::from_albedo(0.95, alloc::vec![1.0, 0.9]).unwrap();
        let g = GreensEvaluator::new(med, Rules::production()).unwrap();
        let hc = 0.5 * g.medium().albedo();
        let (rule, n_phi) = (gauss_legendre(64), 64);
        for m in [-1, 1] {
            let d = &g.modes(m).discrete[0];
            let frame = RotatedFrame::new(FrameParams::new(d.nu, [0.2, 0.1]), 1);
            let (mut acc, mut size) = (Complex64::new(0.0, 0.0), 0.0);
            for (mu, w) in rule.iter() {
                for j in 0..n_phi {
                    let s = dir(mu, 2.0 * PI * j as f64 / n_phi as f64);
                    let mu_k = mu_rotated(&s, &frame.params);
                    let v = d.plus.eval(mu_k) * (hc * d.nu) / (d.nu - mu_k) * frame.combined_factor(m, &s);
                    acc += v * w;
                    size += v.norm() * w;
                }
            }
            assert!(acc.norm() < 1e-12 * size, "{m}: {acc} {size}");
        }
    }

    #[test]
    fn floor_enforced() {
        assert!(iso().q_nodes([0.0, 0.0], 0.05, 0.0).is_err());
    }

    /// Collided isotropic kernel by direct Fourier inversion in `k_z`.
    fn fourier_inversion(c: f64, q: f64, z: f64, s: &Direction, s0: &Direction) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let f = |kz: f64| {
            let k = q.hypot(kz);
            let l = if k < 1e-8 { 1.0 - k * k / 3.0 } else { k.atan() / k };
            let a = one + i * (q * s.sin_theta() * s.phi.cos() + kz * s.mu);
            let b = one + i * (q * s0.sin_theta() * s0.phi.cos() + kz * s0.mu);
            (i * kz * z).exp() * (c / (4.0 * PI)) / (a * b * (1.0 - c * l)) / (2.0 * PI)
        };
        let rule = gauss_legendre(16);
        let mut acc = Complex64::new(0.0, 0.0);
        for panel in -16000..16000 {
            let a = panel as f64;
            for (x, w) in rule.mapped(a, a + 1.0).iter() {
                acc += f(x) * w;
            }
        }
        acc
    }

    #[test]
    fn transverse_kernel_matches_fourier_inversion() {
        let g = iso();
        let dirs = [(0.5, 0.0, 0.3, 0.0), (0.5, 1.0, 0.3, -0.7), (0.8, 2.0, -0.4, 0.5), (-0.6, 0.3, 0.7, 2.0), (0.9, 0.5 * PI - 1e-6, 0.2, 1.0)];
        for &q in &[0.01, 0.4, 1.5, 6.0] {
            for &(mu, phi, mu0, phi0) in &dirs {
                for &z in &[1.0, -0.7] {
                    let (s, s0) = (dir(mu, phi), dir(mu0, phi0));
                    let k = g.transverse_kernel([q, 0.0], z, &s, 0.0, &s0).unwrap();
                    let o = fourier_inversion(0.9, q, z, &s, &s0);
                    assert!((k - o).norm() <= 1e-6 * o.norm() + 1e-8, "q {q} z {z} {mu},{phi},{mu0},{phi0}: {k} vs {o}");
                }
            }
        }
    }

    #[test]
    fn transverse_kernel_continuous_where_the_pole_meets_the_cut_of_q() {
        // mu0 |q| > 1 and tau0 -> 0 put the source root next to the imaginary axis
        let (s, s0) = (dir(0.4, 0.9), dir(0.6, 0.0));
        for g in [iso(), lin()] {
            for &q in &[1.684, 2.5] {
                let k = |qx: f64| g.transverse_kernel([qx, -q], 1.0, &s, 0.0, &s0).unwrap();
                let (a, b, c) = (k(1e-16), k(-3e-16), k(1e-9));
                assert!((a - b).norm() < 1e-9 * a.norm() && (a - c).norm() < 1e-6 * a.norm(), "{q}: {a} {b} {c}");
            }
        }
    }

    #[test]
    fn transverse_kernel_over_both_spheres_is_axial_kernel() {
        use crate::density::DensitySolver;
        use crate::specfun::bessel_j0;
        let g = lin_coarse();
        let solver = DensitySolver::new(g.medium(), &Rules::production()).unwrap();
        let (z, n_phi) = (1.0, 12);
        let (ra, rb) = (gauss_legendre(20), gauss_legendre(21));
        let dphi = 2.0 * PI / n_phi as f64;
        let uncollided = gauss_legendre(200).mapped(0.0, 1.0);
        for &q in &[0.3, 1.2] {
            let mut acc = Complex64::new(0.0, 0.0);
            for (mu, w) in ra.iter() {
                for i in 0..n_phi {
                    let s = dir(mu, dphi * (i as f64 + 0.5));
                    for (mu0, w0) in rb.iter() {
                        for j in 0..n_phi {
                            let s0 = dir(mu0, dphi * (j as f64 + 0.25));
                            acc += g.transverse_kernel([q, 0.0], z, &s, 0.0, &s0).unwrap() * (w * w0 * dphi * dphi);
                        }
                    }
                }
            }
            let ballistic = 2.0 * PI * uncollided.integrate(|mu: f64| bessel_j0(q * z * (1.0 - mu * mu).sqrt() / mu) * (-z / mu).exp() / mu);
            let axial = solver.axial_kernel(q, z).0;
            assert!(acc.im.abs() < 1e-6 * acc.re, "{acc}");
            assert!(((acc.re + ballistic) / axial / (2.0 * PI) - 1.0).abs() < 1e-3, "q {q}: {acc} {ballistic} {axial}");
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn transverse_kernel_reciprocity(
            qx in -3.0f64..3.0, qy in -3.0f64..3.0, z in 0.1f64..2.0,
            mu in -0.95f64..0.95, phi in 0.0..2.0 * PI, mu0 in -0.95f64..0.95, phi0 in 0.0..2.0 * PI,
        ) {
            let g = lin();
            let (s, s0) = (dir(mu, phi), dir(mu0, phi0));
            let a = g.transverse_kernel([qx, qy], z, &s, 0.0, &s0).unwrap();
            let b = g.transverse_kernel([-qx, -qy], 0.0, &s0.reversed(), z, &s.reversed()).unwrap();
            proptest::prop_assert!((a - b).norm() <= 1e-9 * a.norm() + 1e-13, "{} {}", a, b);
        }
    }
}
