//! Cross-module checks: balayage constructions against the checker.

use balayage_core::balayage::{check, verify_arens_singer, verify_jensen};
use balayage_core::construct::{
    convolution_balayage, family_integral_balayage, harmonic_measure_ball, jensen_mixture,
    MeasureFamily,
};
use balayage_core::lyons::{build_example5, LyonsFixture};
use balayage_core::testfn::{harmonic_poly_basis, Family, FamilyDescriptor};
use balayage_core::{Ball, ComponentKind, ContinuousComponent, DiscreteCharge, Point, SetExpr};

fn p(c: &[f64]) -> Point {
    Point::new(c)
}

fn unit_domain() -> SetExpr {
    SetExpr::ball(Point::origin(2), 1.0, false)
}

/// Jensen fixtures: the Dirac mass, harmonic measures and their mixtures.
fn jensen_fixtures() -> Vec<(Point, DiscreteCharge)> {
    let x = p(&[0.1, -0.05]);
    let ball = Ball::open(p(&[0.05, 0.0]), 0.4);
    vec![
        (x.clone(), DiscreteCharge::dirac(x.clone()).unwrap()),
        (x.clone(), harmonic_measure_ball(&ball, &x, 256).unwrap()),
        (x.clone(), jensen_mixture(0.3, &x, 0.7, &ball, 256).unwrap()),
        (
            Point::origin(2),
            jensen_mixture(0.5, &Point::origin(2), 0.5, &Ball::open(Point::origin(2), 0.5), 256).unwrap(),
        ),
    ]
}

#[test]
fn jensen_measures_are_arens_singer() {
    let basis = harmonic_poly_basis(2, 6).unwrap();
    for (x, m) in jensen_fixtures() {
        let fam = Family::subharmonic(&FamilyDescriptor::default(), &Ball::unit(2), &[&m]).unwrap();
        let j = verify_jensen(&m, &x, &fam, 1e-9).unwrap();
        assert!(j.pass, "{:?}", j.worst_margin);
        assert!(verify_arens_singer(&m, &x, &basis, 1e-9).unwrap().pass);
    }
}

#[test]
fn sphere_measure_is_jensen_for_the_center() {
    let sigma = DiscreteCharge::from_component(ContinuousComponent::new(
        ComponentKind::SurfaceSphere,
        Point::origin(2),
        1.0,
        1.0,
        512,
    ))
    .unwrap()
    .flatten()
    .unwrap();
    let fam = Family::subharmonic(&FamilyDescriptor::default(), &Ball::open(Point::origin(2), 1.5), &[&sigma])
        .unwrap();
    let v = verify_jensen(&sigma, &Point::origin(2), &fam, 1e-9).unwrap();
    assert!(v.pass, "{:?}", v.worst_margin);
}

#[test]
fn convolution_chain_keeps_balayage() {
    let ex = build_example5(&LyonsFixture::standard(), 32).unwrap().flatten().unwrap();
    let fam = Family::subharmonic(&FamilyDescriptor::default(), &Ball::unit(2), &[&ex.theta, &ex.mu]).unwrap();
    assert!(check(&ex.theta, &ex.mu, &fam, 0.0).unwrap().pass);
    for (kind, r, level) in [
        (ComponentKind::Mollifier, 0.05, 12),
        (ComponentKind::SurfaceSphere, 0.04, 32),
        (ComponentKind::UniformBall, 0.05, 32),
    ] {
        let iota = DiscreteCharge::from_component(ContinuousComponent::new(kind, Point::origin(2), r, 1.0, level))
            .unwrap()
            .flatten()
            .unwrap();
        let beta = convolution_balayage(&ex.mu, &iota, &unit_domain()).unwrap();
        let v = check(&ex.theta, &beta, &fam, 0.0).unwrap();
        assert!(v.pass, "{kind:?}: {:?} vs {}", v.worst_margin, v.tolerance);
    }
}

/// With Arens-Singer kernels and a harmonic family the margins do not move.
#[test]
fn harmonic_kernels_preserve_harmonic_margins() {
    let ex = build_example5(&LyonsFixture::standard(), 32).unwrap().flatten().unwrap();
    let har = Family::harmonic(2, 6).unwrap();
    let before = check(&ex.theta, &ex.mu, &har, 1e-9).unwrap();
    let entries = ex
        .mu
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let r = 0.02 + 0.03 * (i % 3) as f64;
            let ball = Ball::open(a.point.clone(), r);
            (a.point.clone(), harmonic_measure_ball(&ball, &a.point, 48).unwrap())
        })
        .collect();
    let beta = family_integral_balayage(&ex.mu, &MeasureFamily::Table { entries }, &unit_domain()).unwrap();
    let after = check(&ex.theta, &beta, &har, 1e-9).unwrap();
    assert!(after.pass);
    let tol = after.tolerance + before.tolerance;
    for (a, b) in before.margins.iter().zip(&after.margins) {
        let (a, b) = (a.unwrap().finite().unwrap(), b.unwrap().finite().unwrap());
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }
}

#[test]
fn measure_json_round_trip() {
    let json = r#"{"d":2,"atoms":[{"p":[0.5,0.0],"w":0.015625}],
        "components":[{"kind":"uniform_ball","center":[0.0,0.0],"radius":0.8,"total":1.0,"level":16}]}"#;
    let m: DiscreteCharge = serde_json::from_str(json).unwrap();
    assert!((m.total_mass() - 1.015625).abs() < 1e-15);
    let back: DiscreteCharge = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(back, m);
    assert!(serde_json::from_str::<DiscreteCharge>(r#"{"d":2,"atoms":[{"p":[1,2,3],"w":1}]}"#).is_err());
    assert!(serde_json::from_str::<DiscreteCharge>(r#"{"d":2,"extra":1}"#).is_err());
}
