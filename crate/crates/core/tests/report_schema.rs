use num_complex::Complex64;
use serde_json::Value;
use singcert::fixtures::find;
use singcert::sysio::{Report, REPORT_SCHEMA};
use singcert::viss::{viss, VissError, VissOptions};

fn validator() -> jsonschema::Validator {
    let schema: Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn check(v: &jsonschema::Validator, report: &Report) {
    let json: Value = serde_json::from_str(&report.to_json_pretty()).unwrap();
    let errors: Vec<String> = v.iter_errors(&json).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{}: {errors:?}", report.system);
    let line: Value = serde_json::from_str(&report.to_json_line()).unwrap();
    assert_eq!(json, line);
}

#[test]
fn certified_reports_validate() {
    let v = validator();
    for name in ["dz1", "dz2", "rugr09"] {
        let fx = find(name).unwrap();
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
        check(&v, &Report::from_result(name, &r));
    }
    let fx = find("caprasse").unwrap();
    let (f, x) = fx.load::<Complex64>().unwrap();
    let r = viss(
        &f,
        &x,
        &VissOptions {
            eps: fx.eps,
            ..Default::default()
        },
    )
    .unwrap();
    let rep = Report::from_result("caprasse", &r);
    assert!(rep.to_json_line().contains("\"re\""));
    check(&v, &rep);
}

#[test]
fn failure_reports_validate() {
    let v = validator();
    let fx = find("dz2").unwrap();
    let (f, x) = fx.load::<f64>().unwrap();
    let err = viss(
        &f,
        &x,
        &VissOptions {
            eps: fx.eps,
            max_deflations: 1,
            ..Default::default()
        },
    )
    .unwrap_err();
    let VissError::DeflationCap { coranks, .. } = err else {
        panic!("expected cap")
    };
    check(&v, &Report::failure("dz2", 3, fx.eps, coranks, "cap".into(), 0.1));
}

#[test]
fn schema_rejects_missing_inclusions() {
    let v = validator();
    let fx = find("dz1").unwrap();
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
    let mut rep = Report::from_result("dz1", &r);
    rep.x_inclusions = None;
    let json: Value = serde_json::from_str(&rep.to_json_line()).unwrap();
    assert!(!v.is_valid(&json));
}
