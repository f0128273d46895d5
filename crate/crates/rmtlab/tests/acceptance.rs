//! Acceptance criteria 1 to 12, one test per criterion. Each prints a single
//! PASS/FAIL line followed by the failing checks, if any.

use std::io::Write;

use rmtlab::stats::GofReport;
use rmtlab::suites::{run_suite, Suite, SuiteConfig};
use rmtlab::Seed;

const SEED: Seed = Seed::new(2024, 0);

fn criterion(number: u32, title: &str, suites: &[Suite]) {
    let mut reports: Vec<GofReport> = Vec::new();
    for &s in suites {
        reports.extend(run_suite(s, &SuiteConfig::new(SEED)).unwrap_or_else(|e| panic!("suite {s} failed to run: {e}")));
    }
    let failed: Vec<&GofReport> = reports.iter().filter(|r| !r.pass).collect();
    let mut text = format!(
        "criterion {number:02} {title}: {} ({}/{} checks)\n",
        if failed.is_empty() { "PASS" } else { "FAIL" },
        reports.len() - failed.len(),
        reports.len()
    );
    for r in &failed {
        text += &format!("    failed {}: statistic {} > critical {}\n", r.test_name, r.statistic, r.critical_value);
    }
    std::io::stdout().lock().write_all(text.as_bytes()).unwrap();
    assert!(failed.is_empty(), "criterion {number} failed: {:?}", failed.iter().map(|r| &r.test_name).collect::<Vec<_>>());
}

#[test]
fn criterion_01_exact_identities() {
    criterion(1, "exact identities", &[Suite::Identities]);
}

#[test]
fn criterion_02_quarter_circular() {
    criterion(2, "quarter-circular law", &[Suite::QuarterCircular]);
}

#[test]
fn criterion_03_circular() {
    criterion(3, "circular law", &[Suite::Circular]);
}

#[test]
fn criterion_04_ginibre_exact_formulas() {
    criterion(4, "Ginibre exact formulas", &[Suite::Kostlan]);
}

#[test]
fn criterion_05_spectral_radius_gumbel() {
    criterion(5, "spectral radius and Gumbel", &[Suite::Gumbel]);
}

#[test]
fn criterion_06_nu_z_solver() {
    criterion(6, "finite-variance singular value fixed point", &[Suite::NuZ]);
}

#[test]
fn criterion_07_quaternionic_recovery() {
    criterion(7, "quaternionic circular-law recovery", &[Suite::Quaternionic]);
}

#[test]
fn criterion_08_log_energy() {
    criterion(8, "log-energy rate minimum", &[Suite::Energy]);
}

#[test]
fn criterion_09_heavy_tail() {
    criterion(9, "heavy tails (alpha = 1)", &[Suite::Heavy]);
}

#[test]
fn criterion_10_real_ginibre() {
    criterion(10, "real Ginibre", &[Suite::RealGinibre]);
}

#[test]
fn criterion_11_invertibility() {
    criterion(11, "invertibility", &[Suite::Invertibility]);
}

#[test]
fn criterion_12_concentration() {
    criterion(12, "concentration", &[Suite::Concentration]);
}
