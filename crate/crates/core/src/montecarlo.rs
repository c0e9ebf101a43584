//! Photon Monte Carlo for an isotropic point emitter in an infinite medium
//! with isotropic or linear scattering. Collision estimator on radial shells.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::medium::OpticalMedium;

pub const WEIGHT_CUTOFF: f64 = 1e-6;
pub const CUTOFF_SURVIVAL: f64 = 0.5;
/// Photons per RNG stream; batch `b` draws from stream `b` of the seed.
pub const BATCH_PHOTONS: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub albedo: f64,
    pub f1: f64,
    pub photons: u64,
    pub bins: usize,
    pub r_max: f64,
    pub seed: u64,
    /// Radius beyond which each doubling of `r` costs a roulette at `1/split`
    /// and each halving back splits into `split` copies.
    pub importance_radius: f64,
    pub split: u32,
}

impl McConfig {
    pub fn new(med: &OpticalMedium, photons: u64, bins: usize, r_max: f64, seed: u64) -> Result<Self> {
        if med.order() > 1 {
            return Err(Error::InvalidMedium("Monte Carlo samples isotropic or linear scattering only"));
        }
        let cfg = Self {
            albedo: med.albedo(),
            f1: med.coeff(1),
            photons,
            bins,
            r_max,
            seed,
            importance_radius: r_max.max(4.0),
            split: 4,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.photons < 1 {
            return Err(Error::Domain("need at least one photon"));
        }
        if self.bins < 1 || !(self.r_max > 0.0) {
            return Err(Error::Domain("need positive bin width"));
        }
        if !(self.f1.abs() < 1.0 / 3.0) {
            return Err(Error::Domain("linear phase function needs |f1| < 1/3"));
        }
        if !(self.albedo > 0.0 && self.albedo < 1.0) {
            return Err(Error::Domain("albedo must lie in (0, 1)"));
        }
        if !(self.importance_radius > 0.0) || self.split < 1 {
            return Err(Error::Domain("importance radius must be positive and split >= 1"));
        }
        Ok(())
    }

    pub fn batches(&self) -> u64 {
        self.photons.div_ceil(BATCH_PHOTONS)
    }

    pub fn batch_photons(&self, batch: u64) -> u64 {
        BATCH_PHOTONS.min(self.photons - batch * BATCH_PHOTONS)
    }

    pub fn bin_width(&self) -> f64 {
        self.r_max / self.bins as f64
    }
}

/// Inverse CDF of `(1 + 3 f1 mu)/2` on `[-1, 1]`.
pub fn sample_linear_phase(f1: f64, u: f64) -> Result<f64> {
    if !(f1.abs() < 1.0 / 3.0) {
        return Err(Error::Domain("linear phase function needs |f1| < 1/3"));
    }
    if f1 == 0.0 {
        return Ok(2.0 * u - 1.0);
    }
    // a mu^2 + mu/2 + (1/2 - a - u) = 0, root in [-1, 1] in cancellation-free form
    let a = 0.75 * f1;
    let disc = 0.25 - 4.0 * a * (0.5 - a - u);
    let mu = 2.0 * (u + a - 0.5) / (0.5 + disc.max(0.0).sqrt());
    Ok(mu.clamp(-1.0, 1.0))
}

/// Uniform on `[0, 1)` from the top 53 bits.
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// Raw per-history sums and the weight ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct Tally {
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
    pub photons: u64,
    pub collisions: u64,
    pub absorbed: f64,
    pub roulette_killed: f64,
    pub roulette_gained: f64,
}

impl Tally {
    pub fn new(bins: usize) -> Self {
        Self {
            sum: alloc::vec![0.0; bins],
            sum_sq: alloc::vec![0.0; bins],
            photons: 0,
            collisions: 0,
            absorbed: 0.0,
            roulette_killed: 0.0,
            roulette_gained: 0.0,
        }
    }

    pub fn merge(&mut self, other: &Tally) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self.photons += other.photons;
        self.collisions += other.collisions;
        self.absorbed += other.absorbed;
        self.roulette_killed += other.roulette_killed;
        self.roulette_gained += other.roulette_gained;
    }

    /// `(absorbed + killed - gained) / injected - 1`.
    pub fn audit_residual(&self) -> f64 {
        (self.absorbed + self.roulette_killed - self.roulette_gained) / self.photons as f64 - 1.0
    }
}

#[derive(Debug, Clone, Copy)]
struct Photon {
    pos: [f64; 3],
    dir: [f64; 3],
    weight: f64,
    level: u32,
}

fn isotropic_direction(rng: &mut impl RngCore) -> [f64; 3] {
    let mu = 2.0 * uniform(rng) - 1.0;
    let phi = 2.0 * PI * uniform(rng);
    let st = (1.0 - mu * mu).max(0.0).sqrt();
    [st * phi.cos(), st * phi.sin(), mu]
}

/// `(cos phi, sin phi)` for uniform `phi`, by rejection from the unit disk.
fn unit_azimuth(rng: &mut impl RngCore) -> (f64, f64) {
    loop {
        let x = 2.0 * uniform(rng) - 1.0;
        let y = 2.0 * uniform(rng) - 1.0;
        let r2 = x * x + y * y;
        if r2 > 0.0 && r2 <= 1.0 {
            let inv = 1.0 / r2.sqrt();
            return (x * inv, y * inv);
        }
    }
}

fn scatter(dir: [f64; 3], cos_t: f64, (cp, sp): (f64, f64)) -> [f64; 3] {
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let [ux, uy, uz] = dir;
    if uz.abs() > 0.99999 {
        return [sin_t * cp, sin_t * sp, uz.signum() * cos_t];
    }
    let t = (1.0 - uz * uz).sqrt();
    [
        sin_t * (ux * uz * cp - uy * sp) / t + ux * cos_t,
        sin_t * (uy * uz * cp + ux * sp) / t + uy * cos_t,
        -sin_t * cp * t + uz * cos_t,
    ]
}

/// Smallest `l` with `r <= r0 2^l`.
fn importance_level(r: f64, r0: f64) -> u32 {
    let (mut level, mut edge) = (0, r0);
    while r > edge {
        edge *= 2.0;
        level += 1;
    }
    level
}

/// Transport the photons of one batch on its own stream.
pub fn run_batch(cfg: &McConfig, batch: u64) -> Tally {
    transport(cfg, cfg.batch_photons(batch), &mut batch_rng(cfg.seed, batch))
}

/// Transport `photons` source photons drawing from `rng`.
pub fn transport(cfg: &McConfig, photons: u64, rng: &mut impl RngCore) -> Tally {
    let mut tally = Tally::new(cfg.bins);
    let dr = cfg.bin_width();
    let c = cfg.albedo;
    let split = cfg.split as f64;
    let mut history = alloc::vec![0.0; cfg.bins];
    let mut touched: Vec<usize> = Vec::new();
    let mut bank: Vec<Photon> = Vec::new();
    for _ in 0..photons {
        tally.photons += 1;
        bank.push(Photon {
            pos: [0.0; 3],
            dir: isotropic_direction(rng),
            weight: 1.0,
            level: 0,
        });
        while let Some(mut p) = bank.pop() {
            loop {
                let step = -(1.0 - uniform(rng)).ln();
                for (x, d) in p.pos.iter_mut().zip(p.dir) {
                    *x += step * d;
                }
                let r = (p.pos[0] * p.pos[0] + p.pos[1] * p.pos[1] + p.pos[2] * p.pos[2]).sqrt();
                let level = importance_level(r, cfg.importance_radius);
                let mut copies = 1;
                if level > p.level {
                    let survive = split.powi(-((level - p.level) as i32));
                    if uniform(rng) < survive {
                        tally.roulette_gained += p.weight / survive - p.weight;
                        p.weight /= survive;
                    } else {
                        tally.roulette_killed += p.weight;
                        break;
                    }
                } else if level < p.level {
                    copies = cfg.split.pow(p.level - level);
                }
                p.level = level;
                tally.collisions += 1;
                if r < cfg.r_max {
                    let bin = ((r / dr) as usize).min(cfg.bins - 1);
                    if history[bin] == 0.0 {
                        touched.push(bin);
                    }
                    history[bin] += p.weight;
                }
                tally.absorbed += p.weight * (1.0 - c);
                p.weight *= c;
                if p.weight < WEIGHT_CUTOFF {
                    if uniform(rng) < CUTOFF_SURVIVAL {
                        tally.roulette_gained += p.weight;
                        p.weight /= CUTOFF_SURVIVAL;
                    } else {
                        tally.roulette_killed += p.weight;
                        break;
                    }
                }
                // split after the collision; every copy scatters on its own
                p.weight /= copies as f64;
                let incoming = p.dir;
                for k in 0..copies {
                    let cos_t = sample_linear_phase(cfg.f1, uniform(rng)).expect("validated f1");
                    let dir = scatter(incoming, cos_t, unit_azimuth(rng));
                    if k == 0 {
                        p.dir = dir;
                    } else {
                        bank.push(Photon { dir, ..p });
                    }
                }
            }
        }
        for &b in &touched {
            tally.sum[b] += history[b];
            tally.sum_sq[b] += history[b] * history[b];
            history[b] = 0.0;
        }
        touched.clear();
    }
    tally
}

/// Shell densities in the point-source normalization with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct McResult {
    pub r_edges: Vec<f64>,
    pub r_center: Vec<f64>,
    pub density: Vec<f64>,
    pub stderr: Vec<f64>,
    pub tally: Tally,
}

impl McResult {
    pub fn from_tally(cfg: &McConfig, tally: Tally) -> Self {
        let dr = cfg.bin_width();
        let n = tally.photons as f64;
        let r_edges: Vec<f64> = (0..=cfg.bins).map(|i| i as f64 * dr).collect();
        let mut r_center = Vec::with_capacity(cfg.bins);
        let mut density = Vec::with_capacity(cfg.bins);
        let mut stderr = Vec::with_capacity(cfg.bins);
        for i in 0..cfg.bins {
            let (a, b) = (r_edges[i], r_edges[i + 1]);
            let volume = 4.0 * PI / 3.0 * (b * b * b - a * a * a);
            let scale = 4.0 * PI / volume;
            let mean = tally.sum[i] / n;
            let var = (tally.sum_sq[i] / n - mean * mean).max(0.0) / (n - 1.0).max(1.0);
            r_center.push(0.5 * (a + b));
            density.push(scale * mean);
            stderr.push(scale * var.sqrt());
        }
        Self {
            r_edges,
            r_center,
            density,
            stderr,
            tally,
        }
    }

    /// Bin whose shell contains `r`.
    pub fn bin_of(&self, r: f64) -> Option<usize> {
        self.r_edges.windows(2).position(|w| r >= w[0] && r < w[1])
    }
}

/// Serial run over all batches, merged in batch order.
pub fn simulate_point(cfg: &McConfig) -> Result<McResult> {
    cfg.validate()?;
    let mut tally = Tally::new(cfg.bins);
    for b in 0..cfg.batches() {
        tally.merge(&run_batch(cfg, b));
    }
    Ok(McResult::from_tally(cfg, tally))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;

    #[test]
    fn sampler_endpoints() {
        assert_eq!(sample_linear_phase(0.0, 0.5).unwrap(), 0.0);
        assert_eq!(sample_linear_phase(0.0, 0.0).unwrap(), -1.0);
        assert!((sample_linear_phase(0.0, 1.0 - 1e-16).unwrap() - 1.0).abs() < 1e-15);
        assert!((sample_linear_phase(0.3, 0.0).unwrap() + 1.0).abs() < 1e-15);
        assert!((sample_linear_phase(0.3, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(sample_linear_phase(1.0 / 3.0, 0.5).is_err());
    }

    #[test]
    fn sampler_inverts_cdf() {
        for &f1 in &[-0.3, 0.1, 0.3] {
            for i in 0..=20 {
                let u = i as f64 / 20.0;
                let mu = sample_linear_phase(f1, u).unwrap();
                let cdf = 0.5 * (mu + 1.0) + 0.75 * f1 * (mu * mu - 1.0);
                assert!((cdf - u).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sampler_mean_cosine() {
        let mut rng = batch_rng(7, 0);
        let n = 10_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let mu = sample_linear_phase(0.3, uniform(&mut rng)).unwrap();
            s += mu;
            s2 += mu * mu;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 0.3).abs() < 3.0 * se, "{mean} {se}");
    }

    fn shell_average(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let rule = gauss_legendre(16).mapped(a, b);
        let top: f64 = rule.iter().map(|(r, w)| w * r * r * f(r)).sum();
        top / ((b * b * b - a * a * a) / 3.0)
    }

    #[test]
    fn pure_absorber_first_collisions() {
        let med = OpticalMedium::from_albedo(1e-9, alloc::vec![1.0]).unwrap();
        let cfg = McConfig::new(&med, 400_000, 40, 4.0, 11).unwrap();
        let res = simulate_point(&cfg).unwrap();
        for &r in &[0.55, 1.05, 2.05, 3.05] {
            let i = res.bin_of(r).unwrap();
            let exact = shell_average(res.r_edges[i], res.r_edges[i + 1], |r| (-r).exp() / (r * r));
            assert!((res.density[i] - exact).abs() < 3.0 * res.stderr[i], "{r}: {} {exact} {}", res.density[i], res.stderr[i]);
        }
    }

    #[test]
    fn reproducible_and_audited() {
        let med = OpticalMedium::from_albedo(0.99, alloc::vec![1.0, 0.3]).unwrap();
        let cfg = McConfig::new(&med, 20_000, 10, 5.0, 3).unwrap();
        let a = simulate_point(&cfg).unwrap();
        let b = simulate_point(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.tally.audit_residual().abs() < 1e-9, "{}", a.tally.audit_residual());
        let other = simulate_point(&McConfig { seed: 4, ..cfg }).unwrap();
        assert_ne!(a.tally.sum, other.tally.sum);
    }

    #[test]
    fn stderr_scales_with_photon_count() {
        let med = OpticalMedium::from_albedo(0.9, alloc::vec![1.0]).unwrap();
        let cfg = McConfig::new(&med, 100_000, 10, 5.0, 5).unwrap();
        let one = simulate_point(&cfg).unwrap();
        let two = simulate_point(&McConfig { photons: 200_000, seed: 6, ..cfg }).unwrap();
        for i in [2, 4, 6] {
            let ratio = two.stderr[i] / one.stderr[i];
            assert!((ratio * 2f64.sqrt() - 1.0).abs() < 0.1, "{i}: {ratio}");
        }
    }

    #[test]
    fn config_validation() {
        let med = OpticalMedium::from_albedo(0.9, alloc::vec![1.0, 0.4]).unwrap();
        assert!(McConfig::new(&med, 10, 10, 5.0, 0).is_err());
        let iso = OpticalMedium::from_albedo(0.9, alloc::vec![1.0]).unwrap();
        assert!(McConfig::new(&iso, 0, 10, 5.0, 0).is_err());
        assert!(McConfig::new(&iso, 10, 0, 5.0, 0).is_err());
        let cfg = McConfig::new(&iso, 40_000, 10, 5.0, 0).unwrap();
        assert_eq!(cfg.batches(), 3);
        assert_eq!(cfg.batch_photons(2), 40_000 - 2 * BATCH_PHOTONS);
    }
}
