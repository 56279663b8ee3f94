use std::fs::File;

use proptest::prelude::*;

use taleweave::domain::{
    Benchmark, CopingDimension, CopingSubscale, CopingTag, NormalityIssue, ResponseCode, SusResponse,
    TagOrigin, SUS_ITEM_COUNT,
};
use taleweave::insight::{
    aggregate_coping, read_coping_csv, read_sus_csv, render_sus_report, sus_raw, sus_score, sus_stats,
    tag_response, CopingDistribution, InsightError, TagMode,
};

mod support;
use support::{fixture, Rig};

/// Scoring written from the questionnaire's rules: items 2, 4, 6, 8 and 10
/// are negatively worded and count `5 - x`, all others `x - 1`.
fn oracle_score(items: &[u8]) -> f64 {
    let raw: i32 = items
        .iter()
        .zip(1..)
        .map(|(&x, i)| if [2, 4, 6, 8, 10].contains(&i) { 5 - i32::from(x) } else { i32::from(x) - 1 })
        .sum();
    f64::from(raw) * 100.0 / 52.0
}

fn respondent(items: Vec<u8>) -> SusResponse {
    SusResponse { respondent_id: "r".into(), items }
}

fn questionnaire() -> impl Strategy<Value = Vec<u8>> {
    proptest::collection::vec(1u8..=5, SUS_ITEM_COUNT)
}

proptest! {
    #[test]
    fn score_agrees_with_the_oracle(items in questionnaire()) {
        let got = sus_score(&respondent(items.clone())).unwrap();
        prop_assert!((got - oracle_score(&items)).abs() < 1e-9);
        prop_assert!((0.0..=100.0).contains(&got));
    }

    #[test]
    fn mirrored_answers_mirror_the_score(items in questionnaire()) {
        let mirrored: Vec<u8> = items.iter().map(|x| 6 - x).collect();
        let a = respondent(items);
        let b = respondent(mirrored);
        prop_assert_eq!(sus_raw(&a).unwrap() + sus_raw(&b).unwrap(), 52);
        prop_assert_eq!(sus_score(&a).unwrap() + sus_score(&b).unwrap(), 100.0);
    }

    #[test]
    fn agreeing_more_with_a_positive_item_never_lowers_the_score(
        items in questionnaire(),
        item in 0usize..SUS_ITEM_COUNT,
    ) {
        let negative = [1, 3, 5, 7, 9].contains(&item);
        let mut up = items.clone();
        if up[item] < 5 {
            up[item] += 1;
        }
        let (before, after) = (sus_score(&respondent(items)).unwrap(), sus_score(&respondent(up)).unwrap());
        if negative {
            prop_assert!(after <= before);
        } else {
            prop_assert!(after >= before);
        }
    }

    #[test]
    fn out_of_range_answers_are_rejected(items in questionnaire(), item in 0usize..SUS_ITEM_COUNT, bad in prop_oneof![Just(0u8), 6u8..=255]) {
        let mut items = items;
        items[item] = bad;
        prop_assert!(sus_score(&respondent(items)).is_err());
    }

    #[test]
    fn benchmark_is_monotone(a in 0.0f64..=100.0, b in 0.0f64..=100.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(Benchmark::classify(lo) <= Benchmark::classify(hi));
    }
}

#[test]
fn extreme_and_neutral_questionnaires() {
    let best: Vec<u8> = (1..=13).map(|i| if [2, 4, 6, 8, 10].contains(&i) { 1 } else { 5 }).collect();
    let worst: Vec<u8> = best.iter().map(|x| 6 - x).collect();
    assert_eq!(sus_score(&respondent(best)).unwrap(), 100.0);
    assert_eq!(sus_score(&respondent(worst)).unwrap(), 0.0);
    assert_eq!(sus_score(&respondent(vec![3; 13])).unwrap(), 50.0);
    assert!(sus_score(&respondent(vec![3; 12])).is_err());
}

#[test]
fn benchmark_boundaries() {
    let cases = [
        (100.0, Benchmark::BestImaginable),
        (84.1, Benchmark::BestImaginable),
        (84.09, Benchmark::Excellent),
        (81.09, Benchmark::Excellent),
        (80.8, Benchmark::Excellent),
        (80.79, Benchmark::Good),
        (71.4, Benchmark::Good),
        (71.39, Benchmark::Ok),
        (51.0, Benchmark::Ok),
        (50.99, Benchmark::Poor),
        (0.0, Benchmark::Poor),
    ];
    for (score, want) in cases {
        assert_eq!(Benchmark::classify(score), want, "{score}");
    }
}

#[test]
fn all_three_file_has_mean_fifty_and_no_normality_test() {
    let rows = read_sus_csv(File::open(fixture("sus_all_three.csv")).unwrap()).unwrap();
    let a = sus_stats(&rows).unwrap();
    assert_eq!(a.mean, 50.0);
    assert_eq!(a.sd, 0.0);
    assert_eq!(a.normality_issue, Some(NormalityIssue::DegenerateSample));
    assert_eq!(a.benchmark, Benchmark::Poor);
}

#[test]
fn sample_file_statistics() {
    let rows = read_sus_csv(File::open(fixture("sus_sample.csv")).unwrap()).unwrap();
    let a = sus_stats(&rows).unwrap();
    let scores: Vec<f64> = rows.iter().map(|r| oracle_score(&r.items)).collect();
    let mean = scores.iter().sum::<f64>() / 12.0;
    let sd = (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / 11.0).sqrt();
    assert!((a.mean - mean).abs() < 1e-9 && (a.sd - sd).abs() < 1e-9);
    assert!((a.mean - 81.89).abs() < 0.01, "{}", a.mean);
    assert_eq!(a.benchmark, Benchmark::Excellent);
    let sw = a.shapiro.unwrap();
    assert!((sw.w - 0.945).abs() < 1e-3 && (sw.p - 0.571).abs() < 0.01, "{sw:?}");
    let report = render_sus_report(&a);
    assert!(report.contains("mean: 81.89") && report.contains("benchmark: excellent"), "{report}");
}

#[test]
fn malformed_rows_name_their_line() {
    let err = read_sus_csv(File::open(fixture("sus_malformed.csv")).unwrap()).unwrap_err();
    match err {
        InsightError::Csv { line, message } => {
            assert_eq!(line, 3);
            assert!(message.contains("q4"), "{message}");
        }
        other => panic!("{other:?}"),
    }
    let bad_header = "id,q1\nR1,3\n";
    assert!(matches!(read_sus_csv(bad_header.as_bytes()), Err(InsightError::Csv { line: 1, .. })));
    assert!(matches!(sus_stats(&[]), Err(InsightError::Empty)));
}

fn corpus_distribution() -> CopingDistribution {
    let rows = read_coping_csv(File::open(fixture("coping_codes.csv")).unwrap()).unwrap();
    aggregate_coping(&rows.iter().map(|r| r.tag()).collect::<Vec<_>>()).unwrap()
}

#[test]
fn dimension_counts_add_up() {
    let d = corpus_distribution();
    assert_eq!(d.dimension(CopingDimension::ProblemFocused), 36);
    let by_dimension: usize = CopingDimension::ALL.iter().map(|&dim| d.dimension(dim)).sum();
    let by_subscale: usize = CopingSubscale::ALL.iter().map(|&s| d.count(s)).sum();
    assert_eq!(by_dimension, 48);
    assert_eq!(by_subscale, 48);
    for dim in CopingDimension::ALL {
        let inner: usize = dim.subscales().map(|s| d.count(s)).sum();
        assert_eq!(inner, d.dimension(dim), "{dim:?}");
    }
}

#[test]
fn presence_covers_every_child_and_milestone() {
    let d = corpus_distribution();
    assert_eq!(d.presence.len(), 12);
    let codes: usize = d.codes.values().map(Vec::len).sum();
    assert_eq!(codes, 48);
    let c1_3: ResponseCode = "C1-3".parse().unwrap();
    assert!(d.codes[&CopingSubscale::Repression].contains(&c1_3));
}

#[test]
fn distribution_document_round_trips_and_table_lists_zeros() {
    let d = corpus_distribution();
    assert_eq!(CopingDistribution::from_document(&d.to_document().unwrap()).unwrap(), d);
    let table = d.render_table();
    for line in ["Direct Problem Solving", "Wishful Thinking", "Support for Actions"] {
        assert!(table.lines().any(|l| l.contains(line)), "{line} missing:\n{table}");
    }
    assert!(table.lines().any(|l| l.contains("Direct Problem Solving") && l.contains(" 28 ")));
}

#[test]
fn duplicate_codes_are_rejected() {
    let code: ResponseCode = "C2-1".parse().unwrap();
    let tag = CopingTag::new(code, CopingSubscale::Control, TagOrigin::Manual);
    assert!(matches!(aggregate_coping(&[tag.clone(), tag]), Err(InsightError::DuplicateCode(_))));
}

#[test]
fn malformed_codes_are_rejected() {
    for bad in ["C0-1", "C01-1", "X1-1", "C1-", "C1-0", "C1-5"] {
        assert!(bad.parse::<ResponseCode>().is_err(), "{bad}");
    }
    let csv = "code,subscale,text\nC1-1,direct_problem_solving,ok\nC1-2,daydreaming,no\n";
    assert!(matches!(read_coping_csv(csv.as_bytes()), Err(InsightError::Csv { line: 3, .. })));
}

#[test]
fn suggested_tags_are_marked_and_manual_tags_are_kept() {
    let rig = Rig::new(3);
    let code: ResponseCode = "C4-2".parse().unwrap();
    let manual = tag_response(code, "I ask the teacher", TagMode::Manual(CopingSubscale::SeekingUnderstanding)).unwrap();
    assert_eq!(manual.tag().unwrap().origin, TagOrigin::Manual);
    let suggested = tag_response(code, "I ask the teacher", TagMode::Suggested(rig.engine.agents())).unwrap();
    if let Some(tag) = suggested.tag() {
        assert_eq!(tag.origin, TagOrigin::Suggested);
        assert_eq!(tag.dimension, tag.subscale.dimension());
    }
}
