use paneitz_core::bounds::{
    replay_proof, verify, BoundData, BoundId, ChainTheorem, EigenBasis, GridSpace,
};
use paneitz_core::catalog::Ambient;
use paneitz_core::coefficients::paneitz_coefficients;
use paneitz_core::discrete::{spectrum, FourierImmersion, SpectrumOptions, TorusGrid, Trig};

#[test]
fn clifford_four_torus_chain_is_tight() {
    let imm = FourierImmersion::clifford_torus(&[0.5; 4]);
    let grid = TorusGrid::uniform(4, 8).unwrap();
    let c = paneitz_coefficients(4).unwrap().values();
    let (b, s) = spectrum(&imm, &grid, &c, 9, &SpectrumOptions::default()).unwrap();
    let space = GridSpace::new(&b).unwrap();
    let r = replay_proof(ChainTheorem::Thm11, &space, &EigenBasis::from(&s), 1e-6).unwrap();
    assert!(r.passed, "{:#?}", r.worst_step());
    assert!(r.final_slack.abs() < 1e-6 * r.final_rhs);

    let d = BoundData::from_bundle("clifford", &b, &s, Ambient::UnitSphere).unwrap();
    let direct = verify(&d, BoundId::Cor11).unwrap();
    assert!(direct.equality);
    assert!((direct.rhs - r.final_rhs).abs() < 1e-9 * direct.rhs);
    assert!((direct.lhs - r.final_lhs).abs() < 1e-9 * direct.lhs);
}

#[test]
fn perturbed_four_torus_chain_is_strict() {
    let imm = FourierImmersion::clifford_torus(&[0.5; 4])
        .with_extra_coordinate(vec![1, 1, 0, 0], 0.05, Trig::Cos)
        .unwrap();
    let grid = TorusGrid::uniform(4, 8).unwrap();
    let c = paneitz_coefficients(4).unwrap().values();
    let (b, s) = spectrum(&imm, &grid, &c, 10, &SpectrumOptions::default()).unwrap();
    let space = GridSpace::new(&b).unwrap();
    let r = replay_proof(ChainTheorem::Thm11, &space, &EigenBasis::from(&s), 1e-6).unwrap();
    assert!(r.passed, "{:#?}", r.worst_step());
    assert!(r.final_slack > 1e-3 * r.final_rhs);
    assert!(r.trace_defect < 1e-8 && r.gradient_excess < 1e-8);
}
