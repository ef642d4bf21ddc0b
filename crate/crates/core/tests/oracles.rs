//! Box-plot statistics against values frozen from matplotlib's
//! `cbook.boxplot_stats(x, whis=1.5)`.

use attn_peaks::measures::summarize;
use serde::Deserialize;

#[derive(Deserialize)]
struct Case {
    values: Vec<f64>,
    median: f64,
    q1: f64,
    q3: f64,
    whisker_low: f64,
    whisker_high: f64,
    outliers: Vec<f64>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn box_stats_match_frozen_reference() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/boxplot_oracle.jsonl");
    let text = std::fs::read_to_string(path).unwrap();
    let mut n = 0;
    for (i, line) in text.lines().enumerate() {
        let c: Case = serde_json::from_str(line).unwrap();
        let s = summarize(&c.values).unwrap();
        assert_eq!(s.n, c.values.len(), "case {i}");
        for (name, got, want) in [
            ("median", s.median, c.median),
            ("q1", s.q1, c.q1),
            ("q3", s.q3, c.q3),
            ("whisker_low", s.whisker_low, c.whisker_low),
            ("whisker_high", s.whisker_high, c.whisker_high),
        ] {
            assert!(close(got, want), "case {i} {name}: {got} != {want}");
        }
        let mut outliers = s.outliers.clone();
        outliers.sort_by(f64::total_cmp);
        assert_eq!(outliers, c.outliers, "case {i}");
        n += 1;
    }
    assert_eq!(n, 300);
}
