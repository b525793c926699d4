//! Training behaviour, the article-to-KB workflow and the evidence store.

mod common;

use abspec::absa::{
    classify_specificity, load_labeled_snippets, train_specificity, AspectMode, HeadVariant,
    LabeledSnippet,
};
use abspec::config::TrainConfig;
use abspec::corpus::extract_specificity_snippets;
use abspec::kb::{query_kb, run_pipeline_at, store_entries, KbStore};
use abspec::linking::{load_labeled_pairs, train_link_model, LinkVariant};
use abspec::SpecificityLabel;
use approx::assert_abs_diff_eq;
use chrono::{DateTime, Utc};
use common::{article, fixture};

fn small(variant: HeadVariant) -> TrainConfig {
    TrainConfig {
        head_variant: variant,
        d_model: 16,
        n_heads: 2,
        n_layers: 1,
        d_ff: 32,
        epochs: 30,
        lr: 1e-2,
        validation_fraction: 0.0,
        ..TrainConfig::default()
    }
}

fn example(text: &str, label: SpecificityLabel) -> LabeledSnippet {
    LabeledSnippet {
        text: text.into(),
        label,
        aspect: None,
    }
}

#[test]
fn first_batch_loss_is_ln3() {
    let data = load_labeled_snippets(fixture("spec_train.jsonl")).unwrap();
    for variant in HeadVariant::ALL {
        let cfg = TrainConfig { epochs: 1, ..small(variant) };
        let (_, report) = train_specificity(&data, &cfg).unwrap();
        assert_abs_diff_eq!(report.first_batch_loss, 3f64.ln(), epsilon = 1e-9);
    }
}

#[test]
fn memorizes_one_example() {
    let data = [example("The 6E10 antibody gave non-specific bands.", SpecificityLabel::Nonspecific)];
    for variant in HeadVariant::ALL {
        let (model, _) = train_specificity(&data, &small(variant)).unwrap();
        let p = model.classify_labeled(&data[0]).unwrap();
        assert_eq!(p.label, SpecificityLabel::Nonspecific, "{variant:?} {p:?}");
    }
}

#[test]
fn huge_l2_keeps_predictions_uniform() {
    let data = [
        example("The 6E10 antibody gave non-specific bands.", SpecificityLabel::Nonspecific),
        example("The NeuN antibody was specific in knockout controls.", SpecificityLabel::Specific),
    ];
    let cfg = TrainConfig {
        l2_weight: 1e6,
        lr: 1e-3,
        freeze_encoder: true,
        ..small(HeadVariant::AoaCls)
    };
    let (model, _) = train_specificity(&data, &cfg).unwrap();
    assert!(model.head.weight().iter().all(|w| w.abs() < 1e-2));
    let p = model.classify_labeled(&data[0]).unwrap();
    for q in p.probs {
        assert_abs_diff_eq!(q, 1.0 / 3.0, epsilon = 0.05);
    }
}

#[test]
fn training_is_deterministic() {
    let data = load_labeled_snippets(fixture("spec_train.jsonl")).unwrap();
    let cfg = TrainConfig { epochs: 2, ..small(HeadVariant::AoaCls) };
    let (a, ra) = train_specificity(&data, &cfg).unwrap();
    let (b, rb) = train_specificity(&data, &cfg).unwrap();
    assert_eq!(ra, rb);
    assert_eq!(a.classify_labeled(&data[0]).unwrap(), b.classify_labeled(&data[0]).unwrap());
}

fn fig1_models() -> (abspec::absa::SpecificityModel, abspec::linking::LinkModel) {
    let spec = load_labeled_snippets(fixture("spec_train.jsonl")).unwrap();
    let (spec_model, _) = train_specificity(&spec, &small(HeadVariant::AoaCls)).unwrap();
    let pairs = load_labeled_pairs(fixture("link_pairs.jsonl")).unwrap();
    let cfg = TrainConfig {
        link_variant: LinkVariant::PairSpc,
        ..small(HeadVariant::AoaCls)
    };
    let (link_model, _) = train_link_model(&pairs, &cfg).unwrap();
    (spec_model, link_model)
}

#[test]
fn fitted_model_reproduces_fixture_labels() {
    let data = load_labeled_snippets(fixture("spec_train.jsonl")).unwrap();
    let (model, _) = fig1_models();
    let a = article("pmc6120938");
    let snippet = &extract_specificity_snippets(&a)[0];
    let span = snippet.aspect_spans[0];
    assert_eq!(model.aspect_text(&snippet.text, span), "the 6E10 antibody");
    let p = classify_specificity(snippet, span, &model).unwrap();
    assert_eq!(p.label, SpecificityLabel::Nonspecific, "{p:?}");
    assert_abs_diff_eq!(p.probs.iter().sum::<f64>(), 1.0, epsilon = 1e-12);

    let cd99 = data.iter().find(|ex| ex.text.contains("CD99")).unwrap();
    assert_eq!(cd99.label, SpecificityLabel::Specific);
}

#[test]
fn fig1_pipeline_and_store() {
    let (spec_model, link_model) = fig1_models();
    let a = article("pmc6120938");
    let now: DateTime<Utc> = DateTime::parse_from_rfc3339("2024-03-01T00:00:00Z").unwrap().into();
    let entries = run_pipeline_at(&a, &spec_model, &link_model, now);
    assert_eq!(entries.len(), 1, "{entries:#?}");
    let e = &entries[0];
    assert_eq!(e.rrid, "AB_2564652");
    assert_eq!(e.specificity, SpecificityLabel::Nonspecific);
    assert!(e.evidence.contains("with the 6E10 antibody"));
    assert_eq!(run_pipeline_at(&a, &spec_model, &link_model, now), entries);

    let dir = tempfile::tempdir().unwrap();
    let mut kb = KbStore::open(dir.path().join("kb.sqlite")).unwrap();
    assert_eq!(store_entries(&entries, &mut kb).unwrap(), 1);
    assert_eq!(store_entries(&entries, &mut kb).unwrap(), 0);
    let got = query_kb(&kb, "AB_2564652").unwrap();
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].specificity, SpecificityLabel::Nonspecific);
    assert!(got[0].render_alert().starts_with("ALERT RRID:AB_2564652"));
    assert!(query_kb(&kb, "AB_11212597").unwrap().is_empty());
    assert!(query_kb(&kb, "AB_12x").is_err());
}

#[test]
fn article_without_snippets_yields_nothing() {
    let (spec_model, link_model) = fig1_models();
    let raw = r#"{"article_id":"X","sections":[{"title":"Methods","paragraphs":["Rabbit anti-GFAP (RRID:AB_1) was used."]}]}"#;
    let a = abspec::corpus::parse_article(raw).unwrap();
    assert!(run_pipeline_at(&a, &spec_model, &link_model, Utc::now()).is_empty());
}

#[test]
fn word_mode_uses_literal_match() {
    let cfg = TrainConfig {
        aspect_mode: AspectMode::Word,
        epochs: 1,
        ..small(HeadVariant::AoaCls)
    };
    let data = [example("Some bands with the 6E10 antibody were non-specific.", SpecificityLabel::Nonspecific)];
    let (model, _) = train_specificity(&data, &cfg).unwrap();
    let m = abspec::corpus::ANTIBODY_RE.find(&data[0].text).unwrap();
    let span = abspec::corpus::Span::new(m.start(), m.end());
    assert_eq!(model.aspect_text(&data[0].text, span), "antibody");
}

#[test]
fn archives_round_trip() {
    let (spec_model, link_model) = fig1_models();
    let dir = tempfile::tempdir().unwrap();
    let (sp, lp) = (dir.path().join("spec.json"), dir.path().join("link.json"));
    spec_model.save(&sp).unwrap();
    link_model.save(&lp).unwrap();
    let spec_back = abspec::absa::SpecificityModel::load(&sp).unwrap();
    let link_back = abspec::linking::LinkModel::load(&lp).unwrap();
    let a = article("pmc6120938");
    let now = Utc::now();
    assert_eq!(
        run_pipeline_at(&a, &spec_back, &link_back, now),
        run_pipeline_at(&a, &spec_model, &link_model, now)
    );
    assert!(abspec::linking::LinkModel::load(&sp).is_err());
}
