use plurigreen::acceptance::{ci_family, grid_5x5};
use plurigreen::config::{SweepConfig, SweepFile, Tolerances};
use plurigreen::harness::run_sweep;
use plurigreen::output::{csv_string, fmt_float, to_json, SweepSummary, CSV_COLUMNS};
use plurigreen::schema::{BoundRecord, ComplexRecord, FamilyRecord, PolyRecord, Real, TermRecord};
use plurigreen_core::classify::geometric_schedule;
use plurigreen_core::cxgeom::{CanonicalFrame, Complex2};
use plurigreen_core::green::{GreenConfig, GreenContext};
use plurigreen_core::C64;
use proptest::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn round_trip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(v: &T) {
    let text = to_json(v);
    let back: T = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    assert_eq!(&back, v);
    assert_eq!(to_json(&back), text);
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |x| x.is_finite()), -1.0f64..1.0]
}

proptest! {
    #[test]
    fn seventeen_digits_round_trip(x in finite()) {
        let s = fmt_float(x);
        prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        let mantissa = s.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
        prop_assert_eq!(mantissa.len(), 17);
    }

    #[test]
    fn reals_round_trip(x in prop_oneof![finite(), Just(f64::INFINITY), Just(f64::NEG_INFINITY)]) {
        round_trip(&Real(x));
    }

    #[test]
    fn polynomials_round_trip(terms in prop::collection::vec((0u32..6, 0u32..6, finite(), finite()), 0..8)) {
        let rec = PolyRecord(terms.into_iter().map(|(j, k, re, im)| TermRecord { j, k, re, im }).collect());
        round_trip(&rec);
    }

    #[test]
    fn families_round_trip(re in finite(), im in finite(), e1 in 0.5f64..3.0, e2 in 0.0f64..3.0) {
        let rec = FamilyRecord::PowerLaw {
            rho_coeff: ComplexRecord { re, im },
            rho_exp: e1,
            delta_coeff: ComplexRecord { re: im, im: re },
            delta_exp: e2,
        };
        round_trip(&rec);
    }
}

#[test]
fn bound_records_round_trip() {
    let frame = CanonicalFrame::from_params(1e-3, C64::new(5e-4, 0.0), C64::new(1e-3, 0.0)).unwrap();
    let ctx = GreenContext::new(frame, GreenConfig::default()).unwrap();
    let z = Complex2::real(0.4, 0.3);
    let mut bounds = ctx.lower_bounds(z).unwrap();
    bounds.push(ctx.upper_bound_two_point(z).unwrap());
    bounds.push(ctx.upper_bound_disk_envelope(z).unwrap());
    bounds.push(ctx.lower_bound_best(ctx.poles()[1]).unwrap());
    for b in &bounds {
        round_trip(&BoundRecord::from(b));
    }
    let at_pole = to_json(&BoundRecord::from(bounds.last().unwrap()));
    assert!(at_pole.contains("\"value\": \"-inf\""), "{at_pole}");
}

#[test]
fn sweep_summary_round_trips() {
    let cfg = SweepConfig::new(ci_family(), geometric_schedule(1e-1, 1e-4, 4), grid_5x5()[..3].to_vec());
    let report = run_sweep(&cfg, 1).unwrap();
    round_trip(&SweepSummary::new(&report));
}

#[test]
fn csv_has_the_documented_columns() {
    let cfg = SweepConfig::new(ci_family(), geometric_schedule(1e-1, 1e-4, 4), vec![Complex2::real(0.5, 0.25)]);
    let report = run_sweep(&cfg, 1).unwrap();
    let csv = csv_string(&report);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "eps,z1_re,z1_im,z2_re,z2_im,lower,upper_two_point,upper_envelope,exact_or_reference,kind,gap"
    );
    assert_eq!(CSV_COLUMNS.len(), 11);
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 11);
    assert_eq!(first[0], "1.0000000000000001e-1");
    assert_eq!(first[9], "exact");
    let upper: f64 = first[7].parse().unwrap();
    let exact: f64 = first[8].parse().unwrap();
    let gap: f64 = first[10].parse().unwrap();
    assert_eq!(gap, upper - exact);
}

#[test]
fn config_files_reject_unknown_keys() {
    let ok = r#"{"family": {"kind": "power_law", "rho_coeff": {"re": 0.5}, "rho_exp": 1,
                "delta_coeff": {"re": 1, "im": 0}, "delta_exp": 1},
                "eps_schedule": {"first": 0.1, "last": 1e-5, "count": 5},
                "grid": {"min": 0.2, "max": 0.8, "n": 2}}"#;
    let f = SweepFile::from_json(ok).unwrap();
    let cfg = SweepConfig::from_file(&f).unwrap();
    cfg.validate().unwrap();
    assert_eq!(cfg.test_points.len(), 4);
    assert_eq!(cfg.eps_schedule.len(), 5);

    let typo = ok.replace("\"grid\"", "\"gird\"");
    assert!(SweepFile::from_json(&typo).is_err());
    let nested = ok.replace("\"n\": 2", "\"n\": 2, \"step\": 1");
    assert!(SweepFile::from_json(&nested).is_err());
    let tol = ok.replace("\"grid\"", "\"tolerances\": {\"sandwhich\": 1e-9}, \"grid\"");
    assert!(SweepFile::from_json(&tol).is_err());
}

#[test]
fn config_ranges_are_enforced() {
    let base = SweepConfig::new(ci_family(), geometric_schedule(1e-1, 1e-5, 5), grid_5x5());
    base.validate().unwrap();
    let mut bad = vec![];
    let mut c = base.clone();
    c.envelope_budget = 0;
    bad.push(c);
    let mut c = base.clone();
    c.sup_resolution = 8;
    bad.push(c);
    let mut c = base.clone();
    c.eps_schedule = geometric_schedule(1e-1, 1e-3, 5);
    bad.push(c);
    let mut c = base.clone();
    c.eps_schedule = vec![1e-1, 1e-2, 1e-2, 1e-4, 1e-5];
    bad.push(c);
    let mut c = base.clone();
    c.test_points.push(Complex2::real(1.0, 0.0));
    bad.push(c);
    let mut c = base.clone();
    c.tolerances = Tolerances {
        trend_hard: 0.95,
        ..Tolerances::default()
    };
    bad.push(c);
    for c in bad {
        assert!(c.validate().is_err(), "{c:?}");
    }
}
