use paneitz_core::coefficients::paneitz_coefficients;
use paneitz_core::discrete::{
    build_bundle, solve, spectrum, FourierImmersion, SolverChoice, SpectrumOptions, TorusGrid, Trig,
};

fn lanczos() -> SpectrumOptions {
    SpectrumOptions {
        solver: SolverChoice::Lanczos,
        ..Default::default()
    }
}

#[test]
fn flat_three_torus_lanczos_sixteen() {
    let imm = FourierImmersion::clifford_torus(&[1.0; 3]);
    let grid = TorusGrid::uniform(3, 16).unwrap();
    let c = paneitz_coefficients(3).unwrap().values();
    let (_, s) = spectrum(&imm, &grid, &c, 8, &lanczos()).unwrap();
    assert!(s.eigenvalues[0].abs() < 1e-8);
    assert!(s.eigenvalues[1..7].iter().all(|l| (l - 1.0).abs() < 1e-8));
    assert!((s.eigenvalues[7] - 4.0).abs() < 1e-8);
}

#[test]
fn flat_five_torus_lanczos() {
    let imm = FourierImmersion::clifford_torus(&[1.0; 5]);
    let grid = TorusGrid::uniform(5, 8).unwrap();
    let c = paneitz_coefficients(5).unwrap().values();
    let (_, s) = spectrum(&imm, &grid, &c, 11, &SpectrumOptions::default()).unwrap();
    assert_eq!(s.method, SolverChoice::Lanczos);
    assert!(s.eigenvalues[0].abs() < 1e-9);
    assert!(s.eigenvalues[1..11].iter().all(|l| (l - 1.0).abs() < 1e-9));
}

#[test]
fn perturbed_four_torus_lanczos() {
    let imm = FourierImmersion::clifford_torus(&[0.5; 4])
        .with_extra_coordinate(vec![1, 1, 0, 0], 0.05, Trig::Cos)
        .unwrap();
    let grid = TorusGrid::uniform(4, 8).unwrap();
    let b = build_bundle(&imm, &grid).unwrap();
    let c = paneitz_coefficients(4).unwrap().values();
    let s = solve(&b, &c, 5, &lanczos()).unwrap();
    assert!(s.max_residual() <= 1e-9 * s.eigenvalues[4].abs().max(1.0));
}

#[test]
fn lanczos_matches_dense_when_basis_fills_the_grid() {
    // 7-wide blocks on 8³ points: the Krylov basis spans nearly everything
    // before the tilted cluster converges
    let imm = FourierImmersion::tilted_clifford(3, 0.05, vec![1, 1, 0]).unwrap();
    let grid = TorusGrid::uniform(3, 8).unwrap();
    let c = paneitz_coefficients(3).unwrap().values();
    let dense = SpectrumOptions {
        solver: SolverChoice::Dense,
        ..Default::default()
    };
    let (_, a) = spectrum(&imm, &grid, &c, 7, &dense).unwrap();
    let (_, b) = spectrum(&imm, &grid, &c, 7, &lanczos()).unwrap();
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((x - y).abs() < 1e-9 * x.abs().max(1.0), "{x} vs {y}");
    }
}
