use std::f64::consts::PI;
use std::path::PathBuf;

use proptest::prelude::*;
use qclust::ingest::{
    cluster_profile, filter_year, label_encode, min_max_normalize, parse_kev_csv, parse_kev_reader,
    Column, LabelEncoding,
};
use qclust::{Dataset, Error, NormalizationRange};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

#[test]
fn sample_fixture_parses_cleanly() {
    let parsed = parse_kev_csv(fixture("kev_sample.csv")).unwrap();
    assert_eq!(parsed.records.len(), 10);
    assert!(parsed.rejects.is_empty());
    let follina = &parsed.records[0];
    assert_eq!(follina.cve_id, "CVE-2022-30190");
    assert_eq!(follina.vendor_project, "Microsoft");
    assert_eq!(follina.cvss_score, Some(7.8));
    assert_eq!(follina.severity, "HIGH");
}

#[test]
fn mixed_fixture_rejects_with_line_numbers() {
    let parsed = parse_kev_csv(fixture("kev_mixed.csv")).unwrap();
    let lines: Vec<u64> = parsed.rejects.iter().map(|r| r.line).collect();
    assert_eq!(lines, vec![5, 7]);
    assert!(parsed.rejects[0].reason.contains("date_added"));
    assert!(parsed.rejects[1].reason.contains("cve_id"));
    // every data row is accounted for
    assert_eq!(parsed.records.len() + parsed.rejects.len(), 8);

    let only_2022 = filter_year(&parsed.records, 2022);
    let ids: Vec<&str> = only_2022.iter().map(|r| r.cve_id.as_str()).collect();
    assert_eq!(
        ids,
        vec!["CVE-2022-1096", "CVE-2022-30190", "CVE-2022-21999"]
    );
    assert!(filter_year(&[], 2022).is_empty());
}

#[test]
fn missing_columns_are_listed() {
    let err =
        parse_kev_reader("cveID,dateAdded\nCVE-2022-0001,2022-01-01\n".as_bytes()).unwrap_err();
    match err {
        Error::Ingest(msg) => {
            assert!(msg.contains("vendor_project"), "{msg}");
            assert!(msg.contains("product"), "{msg}");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn profiles_partition_the_records() {
    let parsed = parse_kev_csv(fixture("kev_sample.csv")).unwrap();
    let assignments: Vec<usize> = (0..10).map(|i| i % 3).collect();
    let profiles = cluster_profile(&parsed.records, &assignments, 3).unwrap();
    assert_eq!(profiles.iter().map(|p| p.size).sum::<usize>(), 10);
    for p in &profiles {
        assert_eq!(p.top_vendors.iter().map(|v| v.1).sum::<usize>(), p.size);
        assert_eq!(p.top_products.iter().map(|v| v.1).sum::<usize>(), p.size);
        assert_eq!(p.severity_histogram.values().sum::<usize>(), p.size);
        for w in p.top_vendors.windows(2) {
            assert!(w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0));
        }
    }
    let whole = cluster_profile(&parsed.records, &[0; 10], 1).unwrap();
    assert_eq!(whole[0].top_vendors[0], ("Microsoft".to_string(), 4));
}

#[test]
fn unknown_column_name_is_a_usage_error() {
    assert!(matches!("bogus".parse::<Column>(), Err(Error::Usage(_))));
    assert_eq!(
        "vendorProject".parse::<Column>().unwrap(),
        Column::VendorProject
    );
}

proptest! {
    #[test]
    fn encoding_round_trips(values in prop::collection::vec("[a-zA-Z ]{0,6}", 1..40)) {
        let enc = LabelEncoding::fit("x", values.iter().map(String::as_str));
        for v in &values {
            let code = enc.code_of(v).unwrap();
            prop_assert_eq!(enc.decode(code), Some(v.as_str()));
        }
        for w in enc.categories.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        prop_assert_eq!(enc, LabelEncoding::fit("x", values.iter().rev().map(String::as_str)));
    }

    #[test]
    fn normalization_hits_the_bounds(
        cols in 1usize..4,
        raw in prop::collection::vec(-1e3f64..1e3, 2..60),
        angle in any::<bool>(),
    ) {
        let rows = raw.len() / cols;
        prop_assume!(rows >= 1);
        let data = Dataset::from_flat(rows, cols, raw[..rows * cols].to_vec()).unwrap();
        let range = if angle { NormalizationRange::ANGLE } else { NormalizationRange::UNIT };
        let (out, constant) = min_max_normalize(&data, range).unwrap();
        for j in 0..cols {
            let src = data.column(j);
            let dst = out.column(j);
            prop_assert!(dst.iter().all(|v| (range.lo..=range.hi).contains(v)));
            if constant.contains(&j) {
                prop_assert!(dst.iter().all(|&v| v == range.lo));
            } else {
                let lo = src.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = src.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                for (s, d) in src.iter().zip(&dst) {
                    if *s == lo { prop_assert_eq!(*d, range.lo); }
                    if *s == hi { prop_assert_eq!(*d, range.hi); }
                }
            }
        }
    }
}

#[test]
fn label_codes_follow_sorted_order() {
    let parsed = parse_kev_csv(fixture("kev_sample.csv")).unwrap();
    let (codes, encodings) =
        label_encode(&parsed.records, &[Column::VendorProject, Column::Product]).unwrap();
    assert_eq!(codes.n_cols(), 2);
    assert_eq!(
        encodings[0].categories,
        vec!["Atlassian", "F5", "Google", "Microsoft", "SAP", "VMware"]
    );
    assert_eq!(codes.row(0)[0], 3.0);
    let (angles, _) = min_max_normalize(&codes, NormalizationRange::ANGLE).unwrap();
    assert!((angles.row(0)[0] - 3.0 / 5.0 * PI).abs() < 1e-15);
}
