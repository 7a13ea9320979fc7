use std::sync::Arc;

use critsys::coupling::CouplingParams;
use critsys::exponents::Exponents;
use critsys::groundstate::{build_ground_state, mu_s_quadrature, system_residuals};
use critsys::radial::{RadialGrid, RadialProfile};
use critsys::regime::{classify, ground_state_energy, Classification};

fn grid() -> Arc<RadialGrid> {
    Arc::new(RadialGrid::new(3, 1e-6, 1e6, 4096).unwrap())
}

#[test]
fn classify_build_export_reload() {
    let g = grid();
    let e = Exponents::single(3, 1.0).unwrap();
    let c = CouplingParams::new(1.5, 1.0, 0.8, 2.4, 1.6).unwrap();
    let report = classify(&e, &c).unwrap();
    assert_eq!(report.classification, Classification::NontrivialGroundState);
    assert!(report.numeric_agrees);

    let mu = mu_s_quadrature(&g, 1.0).unwrap();
    let pair = build_ground_state(&report, mu, &g, 1.0, &c, None).unwrap();
    let (ru, rv) = system_residuals(&pair.u, &pair.v, 1.0, &c).unwrap();
    assert!(ru < 1e-3 && rv < 1e-3, "{ru} {rv}");
    assert_eq!(
        pair.energy,
        ground_state_energy(report.sharp_ratio.unwrap(), mu, 4.0).unwrap()
    );

    let mut buf = Vec::new();
    pair.u.write_csv(&mut buf).unwrap();
    let back = RadialProfile::read_csv(3, buf.as_slice()).unwrap();
    assert_eq!(back.values(), pair.u.values());
}

#[test]
fn nontrivial_pairs_solve_the_system_across_dimensions() {
    for (n, s) in [(3u32, 1.5), (4, 1.0), (5, 1.5)] {
        let g = Arc::new(RadialGrid::new(n, 1e-6, 1e6, 4096).unwrap());
        let e = Exponents::single(n, s).unwrap();
        let p = e.two_star_s1;
        let c = CouplingParams::new(1.0, 1.0, 1.0, p / 2.0, p / 2.0).unwrap();
        let report = classify(&e, &c).unwrap();
        assert_eq!(report.classification, Classification::NontrivialGroundState);
        let mu = mu_s_quadrature(&g, s).unwrap();
        let pair = build_ground_state(&report, mu, &g, s, &c, None).unwrap();
        let (ru, rv) = system_residuals(&pair.u, &pair.v, s, &c).unwrap();
        assert!(ru < 1e-3 && rv < 1e-3, "N={n} s={s}: {ru} {rv}");
    }
}
