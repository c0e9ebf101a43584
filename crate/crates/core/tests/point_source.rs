use std::f64::consts::PI;

use caseflux_core::greens::{GreensEvaluator, QGrid};
use caseflux_core::quadrature::{gauss_legendre, Rules};
use caseflux_core::rotation::Direction;
use caseflux_core::OpticalMedium;

/// Coarse everywhere: these checks are about sign and symmetry, not digits.
fn evaluator() -> GreensEvaluator {
    let med = OpticalMedium::from_albedo(0.95, vec![1.0, 0.3]).unwrap();
    let mut g = GreensEvaluator::new(med, Rules::with_orders(128, 64)).unwrap();
    g.grid = QGrid {
        panel_nodes: 8,
        azimuth_min: 16,
        cutoff_exponent: 20.0,
        ..QGrid::default()
    };
    g
}

fn dir(mu: f64, phi: f64) -> Direction {
    Direction::new(mu, phi).unwrap()
}

#[test]
fn pencil_beam_fluence_is_positive() {
    let g = evaluator();
    let s0 = dir(0.8, 0.0);
    let (rule, n_phi) = (gauss_legendre(4), 4);
    let dphi = 2.0 * PI / n_phi as f64;
    for &(rho, z) in &[([0.0, 0.0], 1.0), ([0.7, 0.0], 0.5), ([-0.4, 0.9], 1.5), ([0.3, 0.2], -0.8)] {
        let mut fluence = 0.0;
        for (mu, w) in rule.iter() {
            for j in 0..n_phi {
                let s = dir(mu, dphi * (j as f64 + 0.5));
                fluence += g.green_3d(rho, z, &s, 0.0, &s0).unwrap() * w * dphi;
            }
        }
        assert!(fluence > 0.0, "{rho:?} {z}: {fluence}");
    }
}

#[test]
fn mirror_symmetry_across_the_source_plane_of_incidence() {
    let g = evaluator();
    let (s, s0) = (dir(0.4, 0.9), dir(0.6, 0.0));
    let a = g.green_3d([0.5, 0.3], 1.0, &s, 0.0, &s0).unwrap();
    let b = g.green_3d([0.5, -0.3], 1.0, &dir(0.4, -0.9), 0.0, &s0).unwrap();
    assert!((a - b).abs() < 1e-9 * a.abs(), "{a} {b}");
}
