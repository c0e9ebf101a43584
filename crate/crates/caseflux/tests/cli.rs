use std::io::Write;
use std::process::{Command, Output};

use caseflux::report::{SpectrumReport, Table};

fn caseflux(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_caseflux")).args(args).output().expect("binary runs")
}

fn table(out: &Output) -> Table {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    Table::read_csv(out.stdout.as_slice()).unwrap()
}

#[test]
fn spectrum_json_mirrors_orders() {
    let out = caseflux(&["spectrum", "--mu-a", "0.03", "--mu-s", "100", "--f1", "0.3"]);
    assert!(out.status.success());
    let reports: Vec<SpectrumReport> = serde_json::from_slice(&out.stdout).unwrap();
    let ms: Vec<i32> = reports.iter().map(|r| r.m).collect();
    assert_eq!(ms, [-1, 0, 1]);
    assert_eq!(reports[0].eigenvalues, reports[2].eigenvalues);
    assert_eq!(reports[1].eigenvalues.len(), 1);
    assert!(reports.iter().flat_map(|r| &r.residuals).all(|r| r.abs() <= 1e-12));
    assert!((reports[1].c - 100.0 / 100.03).abs() < 1e-15);
}

#[test]
fn compare_case_i_agrees() {
    let t = table(&caseflux(&["compare", "--case", "i", "--zmin", "0.5", "--zmax", "10", "--nz", "20"]));
    assert_eq!(t.header, ["z", "U_case", "U_fourier", "rel_diff"]);
    assert_eq!(t.rows.len(), 20);
    let worst = t.column("rel_diff").unwrap().into_iter().map(Option::unwrap).fold(0.0, f64::max);
    assert!(worst <= 1e-3, "{worst}");
}

#[test]
fn compare_with_monte_carlo_columns() {
    let t = table(&caseflux(&[
        "compare", "--case", "ii", "--zmin", "1", "--zmax", "5", "--nz", "3", "--mc-photons", "20000",
        "--importance-radius", "3",
    ]));
    assert_eq!(t.header.len(), 8);
    // no Fourier baseline for anisotropic scattering
    assert!(t.column("U_fourier").unwrap().iter().all(Option::is_none));
    for sigma in t.column("mc_sigma").unwrap() {
        assert!(sigma.unwrap().abs() < 5.0);
    }
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(caseflux(&["--help"]).status.code(), Some(0));
    assert_eq!(caseflux(&["density-point", "--help"]).status.code(), Some(0));
    let bad = caseflux(&["spectrum", "--case", "i", "--bogus"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("Usage"));
    assert_eq!(caseflux(&[]).status.code(), Some(2));
}

#[test]
fn validation_errors_exit_2() {
    // negative absorption
    assert_eq!(caseflux(&["spectrum", "--mu-a", "-1", "--mu-s", "1"]).status.code(), Some(2));
    // missing medium
    assert_eq!(caseflux(&["spectrum"]).status.code(), Some(2));
    // Fourier baseline is isotropic only
    assert_eq!(caseflux(&["density-point", "--case", "iii", "--method", "fourier"]).status.code(), Some(2));
    // jump plane
    let g = caseflux(&["green1d", "--case", "i", "--z", "0", "--mu", "0.5", "--mu0", "0.2"]);
    assert_eq!(g.status.code(), Some(2));
    let unknown_preset = caseflux(&["spectrum", "--case", "iv"]);
    assert_eq!(unknown_preset.status.code(), Some(2));
    let threads = Command::new(env!("CARGO_BIN_EXE_caseflux"))
        .args(["spectrum", "--case", "i"])
        .env("CASEFLUX_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn config_file_and_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("medium.txt");
    let mut f = std::fs::File::create(&cfg).unwrap();
    writeln!(f, "# case iii\nmu_a = 0.3\nmu_s = 100\nf1 = 0.3").unwrap();
    drop(f);
    let csv = dir.path().join("u.csv");
    let out = caseflux(&[
        "density-point", "--config", cfg.to_str().unwrap(), "--nz", "4", "--out", csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let from_file = Table::read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    let preset = table(&caseflux(&["density-point", "--case", "iii", "--nz", "4"]));
    assert_eq!(from_file, preset);

    let mut f = std::fs::File::create(&cfg).unwrap();
    writeln!(f, "mu_a = 0.3\nmu_t = 100").unwrap();
    drop(f);
    let bad = caseflux(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("unknown key"));
}

#[test]
fn flags_override_preset() {
    let a = table(&caseflux(&["density-point", "--case", "ii", "--f1", "0", "--nz", "3"]));
    let b = table(&caseflux(&["density-point", "--case", "i", "--nz", "3"]));
    assert_eq!(a, b);
}

#[test]
fn density_line_lengths() {
    let mfp = table(&caseflux(&["density-line", "--case", "i", "--ell-mfp", "1", "--zmin", "0.5", "--zmax", "10", "--nz", "4"]));
    // --ell is in cm; at mu_t = 100.03 this value is one mean free path
    let cm = table(&caseflux(&["density-line", "--case", "i", "--ell", "0.009997000899730081", "--zmin", "0.5", "--zmax", "10", "--nz", "4"]));
    for (a, b) in mfp.rows.iter().zip(&cm.rows) {
        assert!((a[1].unwrap() / b[1].unwrap() - 1.0).abs() < 1e-9);
        assert!(a[3].unwrap() < 1e-3);
    }
    let neither = caseflux(&["density-line", "--case", "i"]);
    assert_eq!(neither.status.code(), Some(2));
    let both = caseflux(&["density-line", "--case", "i", "--ell", "1", "--ell-mfp", "1"]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn green_rows_echo_inputs() {
    let t = table(&caseflux(&["green1d", "--case", "ii", "--z", "1,-2.5", "--mu", "0.5", "--phi", "1", "--mu0", "-0.3"]));
    assert_eq!(t.header, ["z", "mu", "phi", "z0", "mu0", "phi0", "G"]);
    assert_eq!(t.rows[1][0], Some(-2.5));
    assert!(t.rows.iter().all(|r| r[6].unwrap() > 0.0));
    let t = table(&caseflux(&[
        "green3d", "--case", "i", "--nu-order", "128", "--arc-order", "64", "--x", "0.4", "--z", "1.5",
        "--mu", "0.2", "--mu0", "0.6",
    ]));
    assert_eq!(t.header.len(), 9);
    assert!(t.rows[0][8].unwrap().is_finite());
    let floor = caseflux(&["green3d", "--case", "i", "--z", "0.05", "--mu", "0.5", "--mu0", "0.3"]);
    assert_eq!(floor.status.code(), Some(2));
}

#[test]
fn mc_is_reproducible() {
    let args = ["mc", "--case", "i", "--photons", "20000", "--bins", "10", "--rmax", "2", "--seed", "7"];
    let a = caseflux(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_caseflux")).args(args).env("CASEFLUX_THREADS", "3").output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let t = table(&a);
    assert_eq!(t.header, ["r_center", "U_est", "stderr"]);
    assert_eq!(t.rows.len(), 10);
}

#[test]
fn numbers_have_17_significant_digits() {
    let out = caseflux(&["density-point", "--case", "i", "--nz", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let cell = text.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    let mantissa = cell.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{cell}");
}
