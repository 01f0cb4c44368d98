use fuselab_core::analysis::{rank_models, rank_shifts, worst_models};
use fuselab_core::ingest::{parse_metrics_table, serialize_metrics_table, InputFile};
use fuselab_core::model::{competition_ranks, DatasetId, MetricKind, MetricsTable, ModelId, RankTable};
use fuselab_core::report::{render_markdown, Provenance, ReportBundle};

const TABLE: &str = include_str!("../../../data/table1.csv");

fn table() -> MetricsTable {
    parse_metrics_table(TABLE).unwrap()
}

fn ds(s: &str) -> DatasetId {
    DatasetId::new(s).unwrap()
}

fn ranks_of(t: &MetricsTable, dataset: &str, kind: MetricKind) -> Vec<(String, u32)> {
    rank_models(t, &ds(dataset), kind)
        .unwrap()
        .into_iter()
        .map(|(m, r)| (m.to_string(), r))
        .collect()
}

fn expect(pairs: &[(&str, u32)]) -> Vec<(String, u32)> {
    pairs.iter().map(|&(m, r)| (m.to_string(), r)).collect()
}

fn bundle() -> ReportBundle {
    let inputs = vec![InputFile {
        path: "table1.csv".into(),
        sha256: fuselab_core::ingest::digest_hex(TABLE.as_bytes()),
    }];
    ReportBundle::build(table(), Provenance::new(None, inputs)).unwrap()
}

#[test]
fn auroc_ranks_per_dataset() {
    let t = table();
    assert_eq!(
        ranks_of(&t, "UADFV", MetricKind::Auroc),
        expect(&[
            ("MesoInception", 8),
            ("Xception", 5),
            ("Core", 1),
            ("FFD", 4),
            ("SRM", 7),
            ("UCF", 6),
            ("Ensemble-Avg", 2),
            ("Ensemble-Weighted", 2),
        ])
    );
    assert_eq!(
        ranks_of(&t, "Celeb-DF-v2", MetricKind::Auroc),
        expect(&[
            ("MesoInception", 8),
            ("Xception", 6),
            ("Core", 5),
            ("FFD", 7),
            ("SRM", 4),
            ("UCF", 1),
            ("Ensemble-Avg", 3),
            ("Ensemble-Weighted", 2),
        ])
    );
}

#[test]
fn auroc_shifts_of_core_and_ucf() {
    let t = table();
    let shifts = rank_shifts(&t, MetricKind::Auroc, &[ds("UADFV"), ds("Celeb-DF-v2")]).unwrap();
    let core = shifts.iter().find(|s| s.model.as_str() == "Core").unwrap();
    assert_eq!(core.ranks, vec![1, 5]);
    assert_eq!(core.max_shift, 4);
    let ucf = shifts.iter().find(|s| s.model.as_str() == "UCF").unwrap();
    assert_eq!(ucf.ranks, vec![6, 1]);
    assert_eq!(ucf.max_shift, 5);
}

#[test]
fn ensembles_never_worst_and_meso_always_worst() {
    let t = table();
    for d in ["UADFV", "Celeb-DF-v2"] {
        for kind in MetricKind::ALL {
            let worst = worst_models(&t, &ds(d), kind).unwrap();
            assert_eq!(worst, vec![ModelId::new("MesoInception").unwrap()], "{d} {kind}");
        }
    }
    let b = bundle();
    let never: Vec<&str> = b.robustness.never_worst.iter().map(|m| m.as_str()).collect();
    assert_eq!(
        never,
        vec![
            "Core",
            "Ensemble-Avg",
            "Ensemble-Weighted",
            "FFD",
            "SRM",
            "UCF",
            "Xception"
        ]
    );
}

#[test]
fn markdown_bolds_core_and_ucf() {
    let md = render_markdown(&bundle());
    assert!(md.contains("| Core | **0.961** | **0.964** | 0.741 | 0.829 |"), "{md}");
    assert!(md.contains("| UCF | 0.920 | 0.924 | **0.772** | **0.861** |"), "{md}");
    assert_eq!(md.matches("**").count(), 8);
    let body: Vec<&str> = md
        .lines()
        .skip_while(|l| !l.starts_with("| Model"))
        .skip(2)
        .take_while(|l| l.starts_with('|'))
        .collect();
    assert_eq!(body.len(), 8);
    assert!(body[0].starts_with("| Core |"));
    assert!(body[7].starts_with("| MesoInception |"));
}

/// Reads the metrics table back out of the rendered markdown.
fn table_from_markdown(md: &str, datasets: &[DatasetId]) -> MetricsTable {
    let mut t = MetricsTable::new();
    let rows = md
        .lines()
        .skip_while(|l| !l.starts_with("| Model"))
        .skip(2)
        .take_while(|l| l.starts_with('|'));
    for line in rows {
        let cells: Vec<&str> = line
            .trim_matches('|')
            .split('|')
            .map(|c| c.trim().trim_matches('*'))
            .collect();
        let model = ModelId::new(cells[0]).unwrap();
        for (i, d) in datasets.iter().enumerate() {
            let auroc = cells[1 + 2 * i].parse().unwrap();
            let auprc = cells[2 + 2 * i].parse().unwrap();
            t.insert(
                model.clone(),
                d.clone(),
                fuselab_core::model::MetricPair { auroc, auprc },
            )
            .unwrap();
        }
    }
    t
}

#[test]
fn markdown_values_rerank_to_the_same_table() {
    let b = bundle();
    let parsed = table_from_markdown(&render_markdown(&b), &b.datasets);
    let reranked = RankTable::from_metrics(&parsed).unwrap();
    for d in &b.datasets {
        for kind in MetricKind::ALL {
            for m in b.metrics.models() {
                assert_eq!(reranked.rank(d, kind, m), b.ranks.rank(d, kind, m), "{m} {d} {kind}");
            }
        }
    }
}

#[test]
fn metrics_csv_round_trips() {
    let t = table();
    let text = serialize_metrics_table(&t);
    assert_eq!(parse_metrics_table(&text).unwrap(), t);
    assert_eq!(serialize_metrics_table(&parse_metrics_table(&text).unwrap()), text);
}

#[test]
fn competition_ranking_skips_after_ties() {
    assert_eq!(competition_ranks(&[0.958, 0.961, 0.958, 0.950]), vec![2, 1, 2, 4]);
}
