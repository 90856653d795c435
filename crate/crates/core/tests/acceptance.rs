//! Acceptance criteria, one test each, at the sizes they are stated for.
//!
//! Every test prints a single `PASS`/`FAIL` line before asserting, so
//! `cargo test --test acceptance -- --nocapture` doubles as a report.

use spheroid_sim::validate::{self, CheckResult, Scale};

fn verdict(result: CheckResult) {
    println!("{result}");
    assert!(result.passed, "{result}");
}

#[test]
fn criterion_01_porosity_from_cell_census() {
    verdict(validate::check_porosity().unwrap());
}

#[test]
fn criterion_02_effective_diffusion_coefficient() {
    verdict(validate::check_effective_diffusion().unwrap());
}

#[test]
fn criterion_03_free_diffusion_matches_heat_kernel() {
    verdict(validate::check_free_diffusion(&Scale::desk()).unwrap());
}

#[test]
fn criterion_04_mean_squared_displacement() {
    verdict(validate::check_msd(&Scale::desk()).unwrap());
}

#[test]
fn criterion_05_uptake_decay() {
    verdict(validate::check_uptake_decay(&Scale::desk()).unwrap());
}

#[test]
fn criterion_06_mass_conservation() {
    verdict(validate::check_mass_conservation(&Scale::desk()).unwrap());
}

#[test]
fn criterion_07_preset_symmetry() {
    verdict(validate::check_symmetry(&Scale::desk()).unwrap());
}

#[test]
fn criterion_08_finite_volume_cross_check() {
    let (result, report) = validate::check_fd_cross_check(&Scale::desk()).unwrap();
    println!("{result}");
    // Independent of the verdict: once Poisson noise is removed, the
    // partitioned field must explain the particle grid.
    assert!(
        report.bias_partitioned <= validate::FD_L2_TOL,
        "partitioned bias {:.4}",
        report.bias_partitioned
    );
    assert!(report.max_edge_fraction < 1e-3);
    assert!(result.passed, "{result}");
}

#[test]
fn criterion_09_ring_traps_molecules() {
    verdict(validate::check_ring_trapping(&Scale::desk()).unwrap());
}

#[test]
fn criterion_10_uptake_gradient_faces_transmitter() {
    verdict(validate::check_uptake_gradient(&Scale::desk()).unwrap());
}

#[test]
fn criterion_11_determinism_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    verdict(validate::check_determinism(&Scale::desk(), dir.path()).unwrap());
}
