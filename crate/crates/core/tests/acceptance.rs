//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::Instant;

use paneitz_core::bounds::{
    replay_proof, verify, BoundData, BoundId, ChainTheorem, EigenBasis, GridSpace, PolySpace,
};
use paneitz_core::catalog::{model_constants, paneitz_eigenvalues, Ambient, ModelManifold};
use paneitz_core::coefficients::paneitz_coefficients;
use paneitz_core::discrete::{
    build_bundle, spectrum, CurvatureBundle, FourierImmersion, SolverChoice, SpectrumOptions,
    SpectrumResult, TorusGrid,
};
use paneitz_core::error::LabError;
use paneitz_core::geometry::{curvature_point, induced_metric};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(label: &str, got: f64, want: f64, rel: f64) -> Result<(), String> {
    ensure(
        (got - want).abs() <= rel * want.abs().max(f64::MIN_POSITIVE),
        || format!("{label} = {got:.15}, expected {want:.15} (rel tol {rel:e})"),
    )
}

fn err(e: LabError) -> String {
    e.to_string()
}

fn model_report(
    m: &ModelManifold,
    id: BoundId,
    count: usize,
) -> Result<paneitz_core::bounds::BoundReport, String> {
    let d = BoundData::from_model(m, count).map_err(err)?;
    verify(&d, id).map_err(err)
}

fn under_a_second(start: Instant) -> Result<f64, String> {
    let t = start.elapsed().as_secs_f64();
    ensure(t < 1.0, || format!("took {t:.3} s"))?;
    Ok(t)
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let m = ModelManifold::round_sphere(4, 1.0, Ambient::Euclidean).map_err(err)?;
    let r = model_report(&m, BoundId::Thm11, 5)?;
    let want = 8.0 * 6f64.sqrt();
    close("lhs", r.lhs, want, 1e-10)?;
    close("rhs", r.rhs, want, 1e-10)?;
    ensure(r.equality, || "equality not detected".into())?;
    let t = under_a_second(start)?;
    Ok(format!(
        "thm_1_1 on S4(1): lhs = rhs = {:.10} ({t:.3} s)",
        r.lhs
    ))
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let h = 0.5f64.sqrt();
    let m = ModelManifold::sphere_product(&[(2, h), (2, h)], Ambient::UnitSphere).map_err(err)?;
    let r = model_report(&m, BoundId::Cor11, 5)?;
    let want = 32.0 / 3f64.sqrt();
    close("lhs", r.lhs, want, 1e-10)?;
    close("rhs", r.rhs, want, 1e-10)?;
    ensure(r.equality, || "equality not detected".into())?;
    let t = under_a_second(start)?;
    Ok(format!(
        "cor_1_1 on S2(√½)xS2(√½) in S5(1): lhs = rhs = {:.10} ({t:.3} s)",
        r.lhs
    ))
}

fn criterion_3() -> Check {
    let m = ModelManifold::round_sphere(5, 1.0, Ambient::Euclidean).map_err(err)?;
    let r = model_report(&m, BoundId::Thm12, 6)?;
    let want = 5.0 * 52.5f64.sqrt();
    close("S5 lhs", r.lhs, want, 1e-10)?;
    close("S5 rhs", r.rhs, want, 1e-10)?;
    ensure(r.equality, || "S5 equality not detected".into())?;
    let t = ModelManifold::flat_torus(&[1.0; 5], Ambient::Euclidean).map_err(err)?;
    let rt = model_report(&t, BoundId::Thm12, 6)?;
    close("T5 lhs", rt.lhs, 5.0, 1e-10)?;
    close("T5 rhs", rt.rhs, 52.5f64.sqrt(), 1e-10)?;
    ensure(rt.slack > 0.0 && !rt.equality, || "T5 not strict".into())?;
    Ok(format!(
        "thm_1_2: S5(1) lhs = rhs = {:.10}; flat T5 lhs = {:.10} < rhs = {:.10}",
        r.lhs, rt.lhs, rt.rhs
    ))
}

fn criterion_4() -> Check {
    let m = ModelManifold::round_sphere(5, 1.0, Ambient::UnitSphere).map_err(err)?;
    let r = model_report(&m, BoundId::Thm13, 6)?;
    let lhs = (105f64.sqrt() + 4.0 * 945f64.sqrt()) / 4.0;
    close("lhs", r.lhs, lhs, 1e-10)?;
    close("rhs", r.rhs, 5.0 * (945.0f64 / 16.0).sqrt(), 1e-10)?;
    ensure(r.slack > 0.0 && !r.equality, || "not strict".into())?;
    let s3 = ModelManifold::round_sphere(3, 1.0, Ambient::UnitSphere).map_err(err)?;
    match model_report(&s3, BoundId::Thm13, 5) {
        Err(msg) if msg.contains("positiv") => {}
        other => return Err(format!("S3(1) was not refused: {other:?}")),
    }
    Ok(format!(
        "thm_1_3 on S5(1): lhs = {:.6} < rhs = {:.7}; S3(1) refused",
        r.lhs, r.rhs
    ))
}

fn criterion_5() -> Check {
    let m = ModelManifold::round_sphere(4, 1.0, Ambient::Euclidean).map_err(err)?;
    let r = model_report(&m, BoundId::ChenLiL1, 5)?;
    close("lambda_1", r.lhs, 24.0, 1e-10)?;
    close("bound", r.rhs, 24.0, 1e-10)?;
    ensure(r.equality, || "equality not detected".into())?;
    Ok(format!(
        "chenli_l1 on S4(1): lambda_1 = bound = {:.10}",
        r.lhs
    ))
}

fn solver(choice: SolverChoice) -> SpectrumOptions {
    SpectrumOptions {
        solver: choice,
        ..Default::default()
    }
}

fn torus_spectrum(
    n: usize,
    side: usize,
    count: usize,
) -> Result<(CurvatureBundle, SpectrumResult), String> {
    let imm = FourierImmersion::clifford_torus(&vec![1.0; n]);
    let grid = TorusGrid::uniform(n, side).map_err(err)?;
    let c = paneitz_coefficients(n).map_err(err)?.values();
    spectrum(&imm, &grid, &c, count, &solver(SolverChoice::Lanczos)).map_err(err)
}

fn match_catalog(label: &str, s: &SpectrumResult, n: usize) -> Result<f64, String> {
    let m = ModelManifold::flat_torus(&vec![1.0; n], Ambient::Euclidean).map_err(err)?;
    let exact = paneitz_eigenvalues(&m, s.eigenvalues.len()).map_err(err)?;
    let worst = s
        .eigenvalues
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(worst <= 1e-9, || {
        format!("{label}: max eigenvalue error {worst:e}")
    })?;
    Ok(worst)
}

fn criterion_6(t5: &(CurvatureBundle, SpectrumResult), t5_secs: f64) -> Check {
    let start = Instant::now();
    let (_, t3) = torus_spectrum(3, 16, 8)?;
    let e3 = match_catalog("T3 16^3", &t3, 3)?;
    let e5 = match_catalog("T5 8^5", &t5.1, 5)?;

    let imm = FourierImmersion::donut_times_circles(2.0, 1.0, &[1.0]);
    let grid = TorusGrid::uniform(3, 8).map_err(err)?;
    let c = paneitz_coefficients(3).map_err(err)?.values();
    let (_, dense) = spectrum(&imm, &grid, &c, 8, &solver(SolverChoice::Dense)).map_err(err)?;
    let (_, lanczos) = spectrum(&imm, &grid, &c, 8, &solver(SolverChoice::Lanczos)).map_err(err)?;
    let agree = dense
        .eigenvalues
        .iter()
        .zip(&lanczos.eigenvalues)
        .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
        .fold(0.0, f64::max);
    ensure(agree <= 1e-8, || {
        format!("dense vs Lanczos differ by {agree:e}")
    })?;
    let asym = dense
        .asymmetry_defect
        .ok_or("dense path reported no asymmetry defect")?;
    ensure(asym <= 1e-8, || format!("self-adjointness defect {asym:e}"))?;
    let total = start.elapsed().as_secs_f64() + t5_secs;
    ensure(total < 300.0, || format!("took {total:.1} s"))?;
    Ok(format!(
        "T3 error {e3:.1e}, T5 error {e5:.1e}, dense/Lanczos {agree:.1e}, asymmetry {asym:.1e} ({total:.1} s)"
    ))
}

fn criterion_7(t5: &(CurvatureBundle, SpectrumResult)) -> Check {
    let m = ModelManifold::round_sphere(4, 1.0, Ambient::Euclidean).map_err(err)?;
    let space = PolySpace::new(&m).map_err(err)?;
    let eig = space.eigenpairs(6).map_err(err)?;
    let r = replay_proof(ChainTheorem::Thm11, &space, &eig, 1e-9).map_err(err)?;
    let worst = r.worst_step().map_or(0.0, |s| s.relative_slack);
    ensure(worst >= -1e-9, || format!("S4 step {:?}", r.worst_step()))?;
    ensure(r.final_slack.abs() <= 1e-9 * r.final_rhs, || {
        format!("S4 final slack {:e}", r.final_slack)
    })?;
    ensure(r.passed, || "S4 chain did not pass its own checks".into())?;

    let (b, s) = t5;
    let grid_space = GridSpace::new(b).map_err(err)?;
    let rt =
        replay_proof(ChainTheorem::Thm12, &grid_space, &EigenBasis::from(s), 1e-6).map_err(err)?;
    let worst5 = rt.worst_step().map_or(0.0, |s| s.relative_slack);
    ensure(worst5 >= -1e-6, || format!("T5 step {:?}", rt.worst_step()))?;
    ensure(rt.passed, || "T5 chain did not pass its own checks".into())?;
    let d = BoundData::from_bundle("flat T5", b, s, Ambient::Euclidean).map_err(err)?;
    let direct = verify(&d, BoundId::Thm12).map_err(err)?;
    close("T5 replay rhs", rt.final_rhs, direct.rhs, 1e-6)?;
    close("T5 replay lhs", rt.final_lhs, direct.lhs, 1e-6)?;
    Ok(format!(
        "S4 worst step {worst:.1e}, final slack {:.1e}; T5 worst step {worst5:.1e}, final {:.6} <= {:.6}",
        r.final_slack, rt.final_lhs, rt.final_rhs
    ))
}

fn catalog_list() -> Vec<ModelManifold> {
    let mut out = Vec::new();
    for n in 3..=8 {
        out.push(ModelManifold::round_sphere(n, 1.3, Ambient::Euclidean).unwrap());
    }
    for f in [
        vec![(2, 1.0), (2, 0.7)],
        vec![(1, 0.6), (3, 1.1)],
        vec![(2, 0.8), (3, 1.4)],
        vec![(1, 1.0), (2, 0.5), (2, 0.9)],
    ] {
        out.push(ModelManifold::sphere_product(&f, Ambient::Euclidean).unwrap());
    }
    for radii in [vec![1.0; 4], vec![0.7, 1.0, 1.3, 0.9, 1.1], vec![1.0; 7]] {
        out.push(ModelManifold::flat_torus(&radii, Ambient::Euclidean).unwrap());
    }
    out
}

fn scale_covariance() -> Result<usize, String> {
    let mut checked = 0;
    for m in catalog_list() {
        let factors: Vec<(usize, f64)> = m
            .factors()
            .iter()
            .map(|f| (f.dim, 2.0 * f.radius))
            .collect();
        let big = match &m.kind {
            paneitz_core::catalog::ModelKind::RoundSphere { n, r } => {
                ModelManifold::round_sphere(*n, 2.0 * r, m.ambient)
            }
            paneitz_core::catalog::ModelKind::FlatTorus { radii } => ModelManifold::flat_torus(
                &radii.iter().map(|r| 2.0 * r).collect::<Vec<_>>(),
                m.ambient,
            ),
            _ => ModelManifold::sphere_product(&factors, m.ambient),
        }
        .map_err(err)?;
        let count = paneitz_core::bounds::eigenvalues_needed(m.dim()) + 1;
        let (d1, d2) = (
            BoundData::from_model(&m, count).map_err(err)?,
            BoundData::from_model(&big, count).map_err(err)?,
        );
        for id in paneitz_core::bounds::applicable_bounds(&d1) {
            let (Ok(a), Ok(b)) = (verify(&d1, id), verify(&d2, id)) else {
                continue;
            };
            let drift = (a.relative_slack - b.relative_slack).abs();
            ensure(drift <= 1e-10, || {
                format!("{} {id}: relative slack moved by {drift:e}", m.id())
            })?;
            checked += 1;
        }
    }
    Ok(checked)
}

fn criterion_8() -> Check {
    // position-vector identities and the Gauss equation on curved bundles
    let immersions = [
        (FourierImmersion::donut_times_circles(2.0, 1.0, &[]), 64),
        (FourierImmersion::donut_times_circles(2.5, 0.8, &[1.2]), 48),
        (
            FourierImmersion::tilted_clifford(4, 0.2, vec![1, 1, 0, 0]).map_err(err)?,
            8,
        ),
    ];
    let mut worst_identity: f64 = 0.0;
    let mut worst_gauss: f64 = 0.0;
    for (imm, side) in &immersions {
        let b = build_bundle(imm, &TorusGrid::uniform(imm.n, *side).map_err(err)?).map_err(err)?;
        let probe = b
            .grid()
            .sample(|x| (x[0] + 0.3).sin() * (2.0 * x[1]).cos() + x[0].cos());
        let ids = b.position_identities(&probe).map_err(err)?;
        worst_identity = worst_identity.max(ids.worst());
        let nf = imm.n as f64;
        for p in 0..b.len() {
            let (h2, s) = (b.mean_curvature2()[p], b.second_form_norm2()[p]);
            ensure(s >= nf * h2 - 1e-12 * s.max(1.0), || {
                format!("S < n|H|^2 at point {p}")
            })?;
        }
        for p in (0..b.len()).step_by(97) {
            let jet = imm.jet(&b.grid().point(p));
            let metric = induced_metric(&jet).map_err(err)?;
            let c = curvature_point(&jet, &metric).map_err(err)?;
            let gauss = nf * (nf - 1.0) * c.h2 - (c.s - nf * c.h2);
            worst_gauss = worst_gauss.max((gauss - c.r).abs() / c.r.abs().max(1.0));
        }
    }
    ensure(worst_identity <= 1e-8, || {
        format!("position identity defect {worst_identity:e}")
    })?;
    ensure(worst_gauss <= 1e-10, || {
        format!("Gauss identity defect {worst_gauss:e}")
    })?;

    let checked = scale_covariance()?;
    for (n, q) in [(3usize, 15.0 / 8.0), (5, 105.0 / 8.0), (6, 24.0)] {
        let m = ModelManifold::round_sphere(n, 1.0, Ambient::UnitSphere).map_err(err)?;
        close(
            &format!("Q(S{n})"),
            model_constants(&m).map_err(err)?.q,
            q,
            1e-12,
        )?;
    }
    Ok(format!(
        "identities {worst_identity:.1e}, Gauss {worst_gauss:.1e}, {checked} scaled bounds, Q on S3/S5/S6"
    ))
}

fn main() {
    let start = Instant::now();
    let t5 = torus_spectrum(5, 8, 11);
    let t5_secs = start.elapsed().as_secs_f64();
    let shared = |f: &dyn Fn(&(CurvatureBundle, SpectrumResult)) -> Check| match &t5 {
        Ok(t) => f(t),
        Err(e) => Err(format!("T5 spectrum failed: {e}")),
    };
    let results = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        shared(&|t| criterion_6(t, t5_secs)),
        shared(&criterion_7),
        criterion_8(),
    ];
    let mut failed = 0;
    for (i, r) in results.iter().enumerate() {
        match r {
            Ok(detail) => println!("criterion {}: PASS  {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
