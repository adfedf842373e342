mod common;

use std::collections::BTreeMap;

use tailprobe::eval::{length_analysis, BootstrapConfig};
use tailprobe::{SeededRng, Stream};

#[test]
fn constant_step_error_compounds_linearly() {
    let lang = common::language(4, 2, 0.4, 9, 21);
    let data = lang.sample_corpus(3_000, &mut SeededRng::substream(0, Stream::Sampling, 0));
    let delta = -0.37;
    let model = common::ShiftedModel { inner: &lang, delta };
    let boot = BootstrapConfig {
        draws: 100,
        ..Default::default()
    };
    let a = length_analysis(&lang, &model, &data, &boot).unwrap();
    assert!((a.mean_token_error - delta).abs() < 1e-9);
    assert_eq!(a.quarantined, 0);
    let mut present = BTreeMap::new();
    for x in &data {
        *present.entry((x.len() + 1).min(9)).or_insert(0usize) += 1;
    }
    assert_eq!(a.rows.len(), present.len());
    for r in &a.rows {
        assert_eq!(present[&r.steps], r.count);
        let want = r.steps as f64 * delta;
        assert!((r.observed - want).abs() < 1e-9, "{r:?}");
        assert!((r.expected - want).abs() < 1e-9, "{r:?}");
    }
    assert!(a.rows.iter().any(|r| r.steps == 9), "no sequence reached max_len");
}
