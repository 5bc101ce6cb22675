mod common;

use common::viss_fixtures;
use singcert::fixtures::Fixture;
use singcert::sysio::ToInclusionJson;
use singcert::viss::{consequence_check, viss, VissOptions};
use singcert::Scalar;

fn run<T: Scalar>(fx: &Fixture) {
    let (f, x) = fx.load::<T>().unwrap();
    let opts = VissOptions {
        eps: fx.eps,
        ..Default::default()
    };
    let r = viss(&f, &x, &opts).unwrap_or_else(|e| panic!("{}: {e}", fx.name));
    assert_eq!(r.corank_sequence, fx.expected_coranks, "{}", fx.name);
    assert!(r.is_certified(), "{}", fx.name);
    assert!(r.max_width() <= 1e-8, "{}: width {}", fx.name, r.max_width());
    assert!(consequence_check(&r), "{}", fx.name);
    let (_, after) = fx.reference_sigma.unwrap();
    let ratio = r.sigma_min_after / after;
    assert!(
        (0.1..=10.0).contains(&ratio),
        "{}: sigma after {}",
        fx.name,
        r.sigma_min_after
    );
    assert_eq!(r.system.len(), fx.n << (fx.expected_coranks.len() - 1));
}

#[test]
fn every_active_fixture_certifies_with_reference_coranks() {
    for fx in viss_fixtures() {
        for_field!(fx, run);
    }
}

#[test]
fn quarantined_fixtures_are_listed() {
    let q: Vec<_> = singcert::fixtures::registry()
        .iter()
        .filter(|f| !f.is_active())
        .map(|f| f.name)
        .collect();
    assert_eq!(q, vec!["lizhi12", "ojika4"]);
}

#[test]
fn reports_carry_inclusions() {
    let fx = singcert::fixtures::find("dz1").unwrap();
    let (f, x) = fx.load::<f64>().unwrap();
    let r = viss(
        &f,
        &x,
        &VissOptions {
            eps: fx.eps,
            ..Default::default()
        },
    )
    .unwrap();
    let rep = singcert::sysio::Report::from_result("dz1", &r);
    assert_eq!(rep.x_inclusions.as_ref().unwrap().len(), 4);
    assert_eq!(rep.b_inclusions.as_ref().unwrap().len(), 8);
    assert_eq!(r.x_box[0].to_json(), rep.x_inclusions.unwrap()[0]);
}
