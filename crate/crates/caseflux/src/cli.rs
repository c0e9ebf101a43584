//! `caseflux` command line: argument parsing, dispatch and output.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use caseflux_core::density::{log_grid, DensitySolver};
use caseflux_core::greens::GreensEvaluator;
use caseflux_core::medium::OpticalMedium;
use caseflux_core::montecarlo::McConfig;
use caseflux_core::quadrature::Rules;
use caseflux_core::rotation::Direction;
use caseflux_core::spectrum::find_discrete;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{MediumSpec, Preset};
use crate::error::{Error, Result, EXIT_OK};
use crate::parallel;
use crate::report::{write_spectrum_json, SpectrumReport, Table};

#[derive(Debug, Parser)]
#[command(name = "caseflux", version, about = "Singular-eigenfunction transport in an infinite medium")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discrete spectrum for every order |m| <= N, as JSON.
    Spectrum(SpectrumArgs),
    /// Point-source energy density along the axis.
    DensityPoint(DensityArgs),
    /// Line-source energy density above one end of the segment.
    DensityLine(LineArgs),
    /// Plane-source Green's function G(z, s; z0, s0).
    Green1d(Green1dArgs),
    /// Point-source Green's function G(rho, z, s; 0, z0, s0).
    Green3d(Green3dArgs),
    /// Monte Carlo point-source density in radial shells.
    Mc(McArgs),
    /// Eigenfunction route against the Fourier baseline and optionally Monte Carlo.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args)]
pub struct MediumArgs {
    /// Reference medium: i, ii or iii.
    #[arg(long = "case", value_name = "PRESET")]
    pub preset: Option<Preset>,
    /// Key-value file with mu_a, mu_s, f1 or hg_g, N; overrides the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Absorption coefficient, cm^-1.
    #[arg(long)]
    pub mu_a: Option<f64>,
    /// Scattering coefficient, cm^-1.
    #[arg(long)]
    pub mu_s: Option<f64>,
    /// Linear anisotropy coefficient f_1.
    #[arg(long, conflicts_with = "hg_g")]
    pub f1: Option<f64>,
    /// Henyey-Greenstein asymmetry, truncated at order N.
    #[arg(long)]
    pub hg_g: Option<f64>,
    /// Phase-function order N.
    #[arg(long = "order", short = 'N')]
    pub order: Option<usize>,
}

impl MediumArgs {
    pub fn spec(&self) -> Result<MediumSpec> {
        let mut spec = self.preset.map(Preset::spec).unwrap_or_default();
        if let Some(path) = &self.config {
            spec = spec.overlay(MediumSpec::load(path)?);
        }
        Ok(spec.overlay(MediumSpec {
            mu_a: self.mu_a,
            mu_s: self.mu_s,
            f1: self.f1,
            hg_g: self.hg_g,
            order: self.order,
        }))
    }

    pub fn medium(&self) -> Result<OpticalMedium> {
        self.spec()?.build()
    }
}

impl clap::builder::ValueParserFactory for Preset {
    type Parser = clap::builder::ValueParser;

    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<Preset>().map_err(|e| e.to_string()))
    }
}

#[derive(Debug, Clone, Args)]
pub struct QuadratureArgs {
    /// Gauss-Legendre order on the interval (-1, 1).
    #[arg(long, default_value_t = caseflux_core::quadrature::PRODUCTION_ORDER)]
    pub nu_order: usize,
    /// Gauss-Legendre order on the contour arc.
    #[arg(long, default_value_t = 256)]
    pub arc_order: usize,
}

impl QuadratureArgs {
    pub fn rules(&self) -> Result<Rules> {
        if self.nu_order < 8 || self.arc_order < 8 {
            return Err(Error::Config("quadrature orders must be at least 8".into()));
        }
        Ok(Rules::with_orders(self.nu_order, self.arc_order))
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

impl OutputArgs {
    fn open(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(io::stdout().lock()),
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Smallest axial distance, mean free paths.
    #[arg(long, default_value_t = 0.1)]
    pub zmin: f64,
    /// Largest axial distance, mean free paths.
    #[arg(long, default_value_t = 25.0)]
    pub zmax: f64,
    /// Number of log-spaced points.
    #[arg(long, default_value_t = 200)]
    pub nz: usize,
}

impl GridArgs {
    pub fn points(&self) -> Result<Vec<f64>> {
        Ok(log_grid(self.zmin, self.zmax, self.nz)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Case,
    Fourier,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub medium: MediumArgs,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub medium: MediumArgs,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Defaults to both for isotropic media, case otherwise.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LineLength {
    /// Segment length in cm.
    #[arg(long, group = "length")]
    pub ell: Option<f64>,
    /// Segment length in mean free paths.
    #[arg(long, group = "length")]
    pub ell_mfp: Option<f64>,
}

impl LineLength {
    /// Optical length, if one was given.
    pub fn optical(&self, med: &OpticalMedium) -> Option<f64> {
        self.ell_mfp.or(self.ell.map(|cm| med.optical_length(cm)))
    }
}

#[derive(Debug, Clone, Args)]
pub struct LineArgs {
    #[command(flatten)]
    pub density: DensityArgs,
    #[command(flatten)]
    pub length: LineLength,
}

#[derive(Debug, Clone, Args)]
pub struct AngleArgs {
    /// Source-plane position z0, mean free paths.
    #[arg(long, default_value_t = 0.0)]
    pub z0: f64,
    /// Direction cosine of the detected ray.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi: f64,
    /// Direction cosine of the emitted ray.
    #[arg(long, allow_hyphen_values = true)]
    pub mu0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi0: f64,
}

impl AngleArgs {
    fn directions(&self) -> Result<(Direction, Direction)> {
        Ok((Direction::new(self.mu, self.phi)?, Direction::new(self.mu0, self.phi0)?))
    }
}

#[derive(Debug, Clone, Args)]
pub struct Green1dArgs {
    #[command(flatten)]
    pub medium: MediumArgs,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
    /// Detector planes, comma separated.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub z: Vec<f64>,
    #[command(flatten)]
    pub angles: AngleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Green3dArgs {
    #[command(flatten)]
    pub medium: MediumArgs,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub y: f64,
    /// Detector planes, comma separated.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub z: Vec<f64>,
    #[command(flatten)]
    pub angles: AngleArgs,
    /// Smallest accepted |z - z0|.
    #[arg(long)]
    pub floor: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct McRunArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub photons: u64,
    #[arg(long, default_value_t = 60)]
    pub bins: usize,
    /// Outer radius of the last shell, mean free paths.
    #[arg(long, default_value_t = 6.0)]
    pub rmax: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Copies per inward importance level.
    #[arg(long)]
    pub split: Option<u32>,
    /// Radius where importance levels begin.
    #[arg(long)]
    pub importance_radius: Option<f64>,
}

impl McRunArgs {
    fn config(&self, med: &OpticalMedium, photons: u64) -> Result<McConfig> {
        let mut cfg = McConfig::new(med, photons, self.bins, self.rmax, self.seed)?;
        if let Some(s) = self.split {
            cfg.split = s;
        }
        if let Some(r) = self.importance_radius {
            cfg.importance_radius = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub medium: MediumArgs,
    #[command(flatten)]
    pub run: McRunArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub medium: MediumArgs,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Compare the line source of this length instead of the point source.
    #[command(flatten)]
    pub length: LineLength,
    /// Photons for a Monte Carlo column (point source only); 0 skips it.
    #[arg(long, default_value_t = 0)]
    pub mc_photons: u64,
    #[command(flatten)]
    pub mc: McRunArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parse `argv` (program name first), run, and return the process exit code.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    match parallel::init_threads().and_then(|()| execute(&cli.command)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("caseflux: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Spectrum(a) => spectrum(a),
        Command::DensityPoint(a) => {
            let med = a.medium.medium()?;
            density_table(a, &med, None)?.write_csv(a.output.open()?)
        }
        Command::DensityLine(a) => {
            let med = a.density.medium.medium()?;
            let ell = a
                .length
                .optical(&med)
                .ok_or_else(|| Error::Config("density-line needs --ell or --ell-mfp".into()))?;
            density_table(&a.density, &med, Some(ell))?.write_csv(a.density.output.open()?)
        }
        Command::Green1d(a) => green_1d(a),
        Command::Green3d(a) => green_3d(a),
        Command::Mc(a) => mc(a),
        Command::Compare(a) => compare(a)?.write_csv(a.output.open()?),
    }
}

fn spectrum(a: &SpectrumArgs) -> Result<()> {
    let med = a.medium.medium()?;
    let rules = a.quadrature.rules()?;
    let n = med.order() as i32;
    let reports = (-n..=n)
        .map(|m| find_discrete(m, &med, &rules).map(|s| SpectrumReport::from(&s)))
        .collect::<caseflux_core::Result<Vec<_>>>()?;
    write_spectrum_json(&reports, a.output.open()?)
}

fn rel_diff(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some((a? - b?).abs() / b?.abs())
}

/// Columns `z, U_case, U_fourier, rel_diff`.
pub fn density_table(a: &DensityArgs, med: &OpticalMedium, ell: Option<f64>) -> Result<Table> {
    let zs = a.grid.points()?;
    let method = a.method.unwrap_or(if med.is_isotropic() { MethodArg::Both } else { MethodArg::Case });
    let case = match method {
        MethodArg::Case | MethodArg::Both => {
            let solver = DensitySolver::new(med, &a.quadrature.rules()?)?;
            Some(match ell {
                None => parallel::density_point(&zs, &solver)?,
                Some(l) => parallel::density_line(&zs, &solver, l)?,
            })
        }
        MethodArg::Fourier => None,
    };
    let fourier = match method {
        MethodArg::Fourier | MethodArg::Both => Some(match ell {
            None => parallel::density_point_fourier(&zs, med)?,
            Some(l) => parallel::density_line_fourier(&zs, med, l)?,
        }),
        MethodArg::Case => None,
    };
    let mut table = Table::new(&["z", "U_case", "U_fourier", "rel_diff"]);
    for (i, &z) in zs.iter().enumerate() {
        let uc = case.as_ref().map(|p| p.values[i]);
        let uf = fourier.as_ref().map(|p| p.values[i]);
        table.push(vec![Some(z), uc, uf, rel_diff(uc, uf)]);
    }
    Ok(table)
}

fn green_1d(a: &Green1dArgs) -> Result<()> {
    let eval = GreensEvaluator::new(a.medium.medium()?, a.quadrature.rules()?)?;
    let (s, s0) = a.angles.directions()?;
    let ang = &a.angles;
    let mut table = Table::new(&["z", "mu", "phi", "z0", "mu0", "phi0", "G"]);
    for &z in &a.z {
        let g = eval.green_1d(z, &s, ang.z0, &s0)?;
        table.push([z, ang.mu, ang.phi, ang.z0, ang.mu0, ang.phi0, g].map(Some).to_vec());
    }
    table.write_csv(a.output.open()?)
}

fn green_3d(a: &Green3dArgs) -> Result<()> {
    let mut eval = GreensEvaluator::new(a.medium.medium()?, a.quadrature.rules()?)?;
    if let Some(f) = a.floor {
        if f.is_nan() || f <= 0.0 {
            return Err(Error::Config("--floor must be positive".into()));
        }
        eval.grid.floor = f;
    }
    let (s, s0) = a.angles.directions()?;
    let ang = &a.angles;
    let mut table = Table::new(&["x", "y", "z", "mu", "phi", "z0", "mu0", "phi0", "G"]);
    for &z in &a.z {
        let g = parallel::green_3d(&eval, [a.x, a.y], z, &s, ang.z0, &s0)?;
        table.push([a.x, a.y, z, ang.mu, ang.phi, ang.z0, ang.mu0, ang.phi0, g].map(Some).to_vec());
    }
    table.write_csv(a.output.open()?)
}

fn mc(a: &McArgs) -> Result<()> {
    let med = a.medium.medium()?;
    let res = parallel::simulate_point(&a.run.config(&med, a.run.photons)?)?;
    let mut table = Table::new(&["r_center", "U_est", "stderr"]);
    for i in 0..res.r_center.len() {
        table.push(vec![Some(res.r_center[i]), Some(res.density[i]), Some(res.stderr[i])]);
    }
    table.write_csv(a.output.open()?)
}

/// Density columns plus, with `--mc-photons`, the Monte Carlo shell containing
/// each z, the case density averaged over that shell, and their gap in
/// standard errors.
pub fn compare(a: &CompareArgs) -> Result<Table> {
    let med = a.medium.medium()?;
    let ell = a.length.optical(&med);
    let density = DensityArgs {
        medium: a.medium.clone(),
        quadrature: a.quadrature.clone(),
        grid: a.grid.clone(),
        method: Some(if med.is_isotropic() { MethodArg::Both } else { MethodArg::Case }),
        output: a.output.clone(),
    };
    let mut table = density_table(&density, &med, ell)?;
    if a.mc_photons == 0 {
        return Ok(table);
    }
    if ell.is_some() {
        return Err(Error::Config("Monte Carlo compares the point source only".into()));
    }
    let res = parallel::simulate_point(&a.mc.config(&med, a.mc_photons)?)?;
    let solver = DensitySolver::new(&med, &a.quadrature.rules()?)?;
    table.header.extend(["U_mc", "mc_stderr", "U_case_shell", "mc_sigma"].map(String::from));
    for row in &mut table.rows {
        let z = row[0].expect("z column is always set");
        let extra = match res.bin_of(z) {
            Some(i) => {
                let shell = solver.shell_average(res.r_edges[i], res.r_edges[i + 1])?;
                let (u, se) = (res.density[i], res.stderr[i]);
                [Some(u), Some(se), Some(shell), Some((u - shell) / se)]
            }
            None => [None; 4],
        };
        row.extend(extra);
    }
    Ok(table)
}
