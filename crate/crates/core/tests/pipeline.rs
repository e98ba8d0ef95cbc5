use std::path::Path;

use vortex_birth::model::{nondimensionalize, ScenarioConfig};
use vortex_birth::predictor::{closed_form_theorem46, locate_separation, SearchOptions, Verdict};
use vortex_birth::report::predict;
use vortex_birth::taylor::{assumption_residuals, first_order_field, transversality};

fn config(name: &str) -> ScenarioConfig {
    ScenarioConfig::from_path(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)).unwrap()
}

#[test]
fn report_numbers_are_rederivable() {
    let s = config("canonical_k100.toml").scenario;
    let (report, _) = predict(&s, None, &SearchOptions::default()).unwrap();
    let ds = nondimensionalize(&s);

    let res = assumption_residuals(&ds);
    assert_eq!(res.max_abs_r_as3, report.residuals.max_abs_r_as3);
    let ev = locate_separation(&ds, report.t_max, &SearchOptions::default()).unwrap();
    assert_eq!(ev.t0, report.t0);
    assert_eq!(ev.x_bar, report.x_bar);

    let fof = first_order_field(&ds);
    let x = report.x_bar.unwrap();
    let e2 = report.eigen.unwrap().e2;
    assert_eq!(transversality(&fof, x, e2).unwrap(), report.transversality.unwrap());

    let cf = closed_form_theorem46(100.0, 1.0, 1.0, 1.0, 1.0).unwrap();
    assert!((report.t0.unwrap() - cf.t0).abs() < 1e-9);
    assert!((report.transversality.unwrap() - cf.transversality).abs() < 1e-6);
    assert_eq!(report.verdict, Verdict::SeparationCertified);
}

#[test]
fn scenario_hash_survives_text_round_trip() {
    let s = config("canonical_k20.toml").scenario;
    let text = ScenarioConfig::to_toml_string(&s);
    let again = ScenarioConfig::from_toml_str(&text).unwrap().scenario;
    assert_eq!(ScenarioConfig::fingerprint(&s), ScenarioConfig::fingerprint(&again));
    let other = config("canonical_k100.toml").scenario;
    assert_ne!(ScenarioConfig::fingerprint(&s), ScenarioConfig::fingerprint(&other));
}

#[test]
fn shipped_configs_give_expected_verdicts() {
    let opts = SearchOptions::default();
    for (name, verdict) in [
        ("canonical_k100.toml", Verdict::SeparationCertified),
        ("canonical_k20.toml", Verdict::SeparationCertified),
        ("divergent.toml", Verdict::SeparationRejected),
        ("uniform.toml", Verdict::Inconclusive),
    ] {
        let (r, _) = predict(&config(name).scenario, None, &opts).unwrap();
        assert_eq!(r.verdict, verdict, "{name}");
    }
}
