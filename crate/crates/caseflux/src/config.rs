//! Medium parameters from presets, key-value files and flags.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use caseflux_core::medium::OpticalMedium;

use crate::error::{Error, Result};

/// Three reference media: (mu_a, mu_s, f1) in cm^-1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    I,
    II,
    III,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::I, Preset::II, Preset::III];

    pub fn triple(self) -> (f64, f64, f64) {
        match self {
            Preset::I => (0.03, 100.0, 0.0),
            Preset::II => (0.03, 100.0, 0.3),
            Preset::III => (0.3, 100.0, 0.3),
        }
    }

    pub fn spec(self) -> MediumSpec {
        let (mu_a, mu_s, f1) = self.triple();
        MediumSpec {
            mu_a: Some(mu_a),
            mu_s: Some(mu_s),
            f1: Some(f1),
            ..MediumSpec::default()
        }
    }

    pub fn medium(self) -> OpticalMedium {
        self.spec().build().expect("preset media are valid")
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(Preset::I),
            "ii" | "2" => Ok(Preset::II),
            "iii" | "3" => Ok(Preset::III),
            _ => Err(Error::Config(format!("unknown preset {s:?} (expected i, ii or iii)"))),
        }
    }
}

/// Partially specified medium. Later layers override earlier ones field by field.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MediumSpec {
    pub mu_a: Option<f64>,
    pub mu_s: Option<f64>,
    pub f1: Option<f64>,
    pub hg_g: Option<f64>,
    pub order: Option<usize>,
}

impl MediumSpec {
    pub fn overlay(self, top: MediumSpec) -> MediumSpec {
        // an explicit phase function on top replaces the other kind below
        let (f1, hg_g) = match (top.f1, top.hg_g) {
            (None, None) => (self.f1, self.hg_g),
            other => other,
        };
        MediumSpec {
            mu_a: top.mu_a.or(self.mu_a),
            mu_s: top.mu_s.or(self.mu_s),
            f1,
            hg_g,
            order: top.order.or(self.order),
        }
    }

    pub fn parse(text: &str) -> Result<MediumSpec> {
        let mut spec = MediumSpec::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| Error::Config(format!("line {}: {msg}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| at(format!("expected key = value, got {line:?}")))?;
            let real = || value.parse::<f64>().map_err(|_| at(format!("{key}: not a number: {value:?}")));
            let slot_taken = match key {
                "mu_a" => spec.mu_a.replace(real()?).is_some(),
                "mu_s" => spec.mu_s.replace(real()?).is_some(),
                "f1" => spec.f1.replace(real()?).is_some(),
                "hg_g" => spec.hg_g.replace(real()?).is_some(),
                "N" => {
                    let n = value.parse::<usize>().map_err(|_| at(format!("N: not an order: {value:?}")))?;
                    spec.order.replace(n).is_some()
                }
                _ => return Err(at(format!("unknown key {key:?}"))),
            };
            if slot_taken {
                return Err(at(format!("duplicate key {key:?}")));
            }
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<MediumSpec> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn build(&self) -> Result<OpticalMedium> {
        let missing = |k: &str| Error::Config(format!("missing {k} (give --{k} or a preset)", k = k.replace('_', "-")));
        let mu_a = self.mu_a.ok_or_else(|| missing("mu_a"))?;
        let mu_s = self.mu_s.ok_or_else(|| missing("mu_s"))?;
        let med = match (self.f1, self.hg_g, self.order) {
            (Some(_), Some(_), _) => return Err(Error::Config("f1 and hg_g are mutually exclusive".into())),
            (None, Some(g), n) => OpticalMedium::henyey_greenstein(mu_a, mu_s, g, n.unwrap_or(1))?,
            (Some(f1), None, Some(0)) if f1 != 0.0 => {
                return Err(Error::Config("N = 0 contradicts a nonzero f1".into()));
            }
            (Some(_), None, Some(n)) if n > 1 => {
                return Err(Error::Config(format!("f1 fixes N <= 1, got N = {n}")));
            }
            (Some(0.0), None, None | Some(0)) => OpticalMedium::isotropic(mu_a, mu_s)?,
            (Some(f1), None, _) => OpticalMedium::linear(mu_a, mu_s, f1)?,
            (None, None, Some(n)) if n > 0 => {
                return Err(Error::Config(format!("N = {n} needs hg_g or f1")));
            }
            (None, None, _) => OpticalMedium::isotropic(mu_a, mu_s)?,
        };
        Ok(med)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_values() {
        let spec = MediumSpec::parse("# case ii\nmu_a = 0.03\nmu_s=100\n\nf1 = 0.3  # linear\n").unwrap();
        let med = spec.build().unwrap();
        assert_eq!(med, OpticalMedium::linear(0.03, 100.0, 0.3).unwrap());
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(matches!(MediumSpec::parse("mu_t = 1"), Err(Error::Config(_))));
        assert!(matches!(MediumSpec::parse("mu_a = 1\nmu_a = 2"), Err(Error::Config(_))));
        assert!(matches!(MediumSpec::parse("mu_a 1"), Err(Error::Config(_))));
        assert!(matches!(MediumSpec::parse("N = -1"), Err(Error::Config(_))));
    }

    #[test]
    fn henyey_greenstein_order() {
        let spec = MediumSpec::parse("mu_a = 0.1\nmu_s = 10\nhg_g = 0.5\nN = 3").unwrap();
        let med = spec.build().unwrap();
        assert_eq!(med.order(), 3);
        assert_eq!(med.coeffs(), &[1.0, 0.5, 0.25, 0.125]);
    }

    #[test]
    fn phase_conflicts() {
        let both = MediumSpec::parse("mu_a = 0.1\nmu_s = 10\nhg_g = 0.5\nf1 = 0.2").unwrap();
        assert!(both.build().is_err());
        let high = MediumSpec::parse("mu_a = 0.1\nmu_s = 10\nf1 = 0.2\nN = 2").unwrap();
        assert!(high.build().is_err());
        let bare = MediumSpec::parse("mu_a = 0.1\nmu_s = 10\nN = 2").unwrap();
        assert!(bare.build().is_err());
        assert!(MediumSpec::parse("mu_a = 0.1").unwrap().build().is_err());
    }

    #[test]
    fn overlay_replaces_phase_kind() {
        let base = Preset::II.spec();
        let top = MediumSpec {
            hg_g: Some(0.2),
            order: Some(2),
            ..MediumSpec::default()
        };
        let med = base.overlay(top).build().unwrap();
        assert_eq!(med.order(), 2);
        assert_eq!(med.mu_a(), 0.03);
    }

    #[test]
    fn presets() {
        assert_eq!("ii".parse::<Preset>().unwrap(), Preset::II);
        assert!("iv".parse::<Preset>().is_err());
        let c = Preset::III.medium().albedo();
        assert!((c - 100.0 / 100.3).abs() < 1e-15);
        assert!(Preset::I.medium().is_isotropic());
    }
}
