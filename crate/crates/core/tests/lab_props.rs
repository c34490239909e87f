use std::time::Duration;

use gauge_measure::lab::{builtin, render_report, verdict, ConvergenceReport, ReportFormat, Theorem, Verdict, CSV_HEADER};
use proptest::prelude::*;

fn report(discrepancies: Vec<f64>, secondary: bool, seed: u64) -> ConvergenceReport {
    let n_values: Vec<usize> = (1..=discrepancies.len()).map(|k| 50 * k).collect();
    ConvergenceReport {
        theorem_id: "dct/custom".into(),
        seed,
        secondary: secondary.then(|| discrepancies.iter().map(|d| d / 2.0).collect()),
        verdict: verdict(&discrepancies, 1e-3),
        n_values,
        discrepancies,
        tolerance: 1e-3,
        runtime: Duration::from_millis(seed % 1000),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn verdict_follows_last_value_and_tail(d in prop::collection::vec(0.0..5e-3f64, 1..12)) {
        let tol = 1e-3;
        let tail = &d[d.len() / 2..];
        let expect = *d.last().unwrap() < tol && tail.iter().all(|x| *x < 2.0 * tol);
        prop_assert_eq!(verdict(&d, tol) == Verdict::Pass, expect);
    }

    #[test]
    fn reports_round_trip_through_json(d in prop::collection::vec(0.0..1.0f64, 0..10), secondary in any::<bool>(), seed in any::<u64>()) {
        let r = report(d, secondary, seed);
        let bytes = render_report(&r, ReportFormat::Json).unwrap();
        let back: ConvergenceReport = serde_json::from_slice(&bytes).unwrap();
        prop_assert_eq!(&back, &r);
        prop_assert_eq!(render_report(&back, ReportFormat::Json).unwrap(), bytes);
    }

    #[test]
    fn csv_has_one_row_per_n(d in prop::collection::vec(0.0..1.0f64, 0..10), secondary in any::<bool>()) {
        let r = report(d.clone(), secondary, 3);
        let text = String::from_utf8(render_report(&r, ReportFormat::Csv).unwrap()).unwrap();
        let mut rows = csv::Reader::from_reader(text.as_bytes());
        prop_assert_eq!(rows.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER.to_vec());
        let recs: Vec<csv::StringRecord> = rows.records().map(Result::unwrap).collect();
        prop_assert_eq!(recs.len(), d.len());
        for (rec, x) in recs.iter().zip(&d) {
            prop_assert_eq!(rec[3].parse::<f64>().unwrap(), *x);
            prop_assert_eq!(rec[6].is_empty(), !secondary);
        }
    }
}

#[test]
fn empty_report_is_header_only() {
    let text = String::from_utf8(render_report(&report(Vec::new(), false, 0), ReportFormat::Csv).unwrap()).unwrap();
    assert_eq!(text, format!("{}\n", CSV_HEADER.join(",")));
    assert_eq!(verdict(&[], 1e-3), Verdict::Fail);
}

#[test]
fn runs_are_reproducible() {
    for theorem in Theorem::ALL {
        let instance = theorem.instances()[0];
        let run = |seed| builtin(theorem, instance, seed, Some(vec![50, 100]), None).unwrap().run().unwrap();
        let (a, b) = (run(11), run(11));
        for fmt in [ReportFormat::Csv, ReportFormat::Json] {
            assert_eq!(render_report(&a, fmt).unwrap(), render_report(&b, fmt).unwrap(), "{}", theorem.name());
        }
        assert_eq!(run(12).seed, 12);
    }
}

#[test]
fn unknown_instances_are_rejected() {
    for theorem in Theorem::ALL {
        assert!(builtin(theorem, "nope", 0, None, None).is_err());
    }
    assert!("fubini".parse::<Theorem>().is_err());
}
