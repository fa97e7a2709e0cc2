//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.
//!
//! `cargo test -p secdisc --test acceptance`

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use secdisc::cli::{cross_validation, cross_validation_report};
use secdisc::config::RunConfig;
use secdisc::corpus_io::load_dataset;
use secdisc_core::baseline::{keyword_classify, keyword_score, DEFAULT_THRESHOLD};
use secdisc_core::classifiers::build_model;
use secdisc_core::classifiers::nn::{resolve_inputs, train_network, DeepArchitecture, Layer, Network, Shape, TrainConfig};
use secdisc_core::eval::{self, percent, sample_size, ConfusionMatrix, FoldPlan, Rounding};
use secdisc_core::preprocess::porter_stem;
use secdisc_core::{seed, KeywordLexicon, Label, ModelSpec, PreprocessConfig, TokenList};

const PORTER_PAIRS: &str = include_str!("../../core/tests/fixtures/porter_pairs.tsv");
const SAMPLE: &str = "data/sample581.tsv";
const SAMPLE_BASELINE: &str = "data/sample581.f1";

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    if ok {
        Ok(detail.into())
    } else {
        Err(detail.into())
    }
}

fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Brute-force precision, recall, F1 and G-mean straight from the vectors.
fn oracle_metrics(truth: &[bool], pred: &[bool]) -> [f64; 4] {
    let count = |t: bool, p: bool| truth.iter().zip(pred).filter(|&(&a, &b)| a == t && b == p).count() as f64;
    let (tp, fp, tn, fn_) = (count(true, true), count(false, true), count(false, false), count(true, false));
    let div = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    let precision = div(tp, tp + fp);
    let recall = div(tp, tp + fn_);
    let f1 = div(2.0 * precision * recall, precision + recall);
    let specificity = div(tn, tn + fp);
    let gmean = if tp + fn_ == 0.0 || tn + fp == 0.0 { 0.0 } else { (recall * specificity).sqrt() };
    [precision, recall, f1, gmean]
}

/// Share of positive-negative pairs ranked correctly, ties counting half.
fn oracle_auc(truth: &[bool], scores: &[f64]) -> Option<f64> {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &ti) in truth.iter().enumerate() {
        for (j, &tj) in truth.iter().enumerate() {
            if ti && !tj {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    (pairs > 0.0).then(|| wins / pairs)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = seed::rng(1);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let n = rng.gen_range(1..=200);
        let rate = rng.gen_range(0.0..=1.0);
        let truth: Vec<bool> = (0..n).map(|_| rng.gen_bool(rate)).collect();
        let pred: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        // coarse scores force ties
        let levels = rng.gen_range(2..50) as f64;
        let scores: Vec<f64> = (0..n).map(|_| (rng.gen_range(0.0..1.0) * levels).floor() / levels).collect();
        let labels = |v: &[bool]| v.iter().map(|&b| Label::from_bool(b)).collect::<Vec<_>>();
        let cm = eval::confusion(&labels(&truth), &labels(&pred)).map_err(|e| e.to_string())?;
        let m = eval::metrics(&cm);
        for (got, want) in [m.precision, m.recall, m.f1, m.gmean].into_iter().zip(oracle_metrics(&truth, &pred)) {
            worst = worst.max((got - want).abs());
        }
        match (eval::auc(&labels(&truth), &scores), oracle_auc(&truth, &scores)) {
            (Ok(got), Some(want)) => worst = worst.max((got - want).abs()),
            (Err(_), None) => {}
            (got, want) => return Err(format!("case {case}: auc {got:?} vs oracle {want:?}")),
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1e-9 && elapsed < Duration::from_secs(30),
        format!("1000 cases, max deviation {worst:.2e}, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn criterion_2() -> Outcome {
    let m = eval::metrics(&ConfusionMatrix::new(165, 18, 354, 40));
    let got: Vec<String> = [m.precision, m.recall, m.f1, m.gmean].iter().map(|&v| percent(v, Rounding::Truncate)).collect();
    let want = ["90.16", "80.48", "85.05", "87.51"];
    check(got == want, format!("precision/recall/F1/G-mean = {}", got.join("/")))
}

fn criterion_3() -> Outcome {
    let cases = [(5724, 0.95, 0.02, 1692), (17_277, 0.95, 0.04, 581), (577, 0.90, 0.05, 185)];
    let mut got = Vec::new();
    for (population, confidence, margin, want) in cases {
        let n = sample_size(population, confidence, margin).map_err(|e| e.to_string())?;
        if n != want {
            return Err(format!("sample_size({population}, {confidence}, {margin}) = {n}, want {want}"));
        }
        got.push(n.to_string());
    }
    check(true, got.join(", "))
}

fn tokens(words: &[&str]) -> TokenList {
    TokenList::new(words.iter().map(|w| w.to_string()).collect())
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let lex = KeywordLexicon::seed(&PreprocessConfig::default());
    let filler = ["deploy", "build", "imag", "page", "button", "render", "cach", "commit", "merg", "branch"];
    if let Some(f) = filler.iter().find(|f| lex.mentions(f)) {
        return Err(format!("filler token {f} overlaps the lexicon"));
    }
    let mut one = vec!["deploy"; 19];
    one.insert(7, "jwt");
    let mut two = one.clone();
    two[12] = "xss";
    let (l1, p1) = keyword_classify(&tokens(&one), &lex, DEFAULT_THRESHOLD);
    let (l2, p2) = keyword_classify(&tokens(&two), &lex, DEFAULT_THRESHOLD);
    if l1 != Label::NonSecurity || l2 != Label::Security {
        return Err(format!("1/20 (pr {p1}) -> {l1:?}, 2/20 (pr {p2}) -> {l2:?}"));
    }
    let keywords: Vec<&str> = lex.keywords().filter(|k| !k.contains(' ')).collect();
    let mut rng = seed::rng(4);
    for m in 0..500 {
        let len = rng.gen_range(1..40);
        let mut base: Vec<String> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.2) {
                    keywords.choose(&mut rng).unwrap().to_string()
                } else {
                    filler.choose(&mut rng).unwrap().to_string()
                }
            })
            .collect();
        let before_list = TokenList::new(base.clone());
        let before = keyword_score(&before_list, &lex);
        let (before_label, _) = keyword_classify(&before_list, &lex, DEFAULT_THRESHOLD);
        // insert only at boundaries that do not split a matched phrase
        let inside: BTreeSet<usize> =
            lex.matches(&base).iter().flat_map(|&(s, l)| s + 1..s + l).collect();
        let cuts: Vec<usize> = (0..=base.len()).filter(|c| !inside.contains(c)).collect();
        let at = *cuts.choose(&mut rng).unwrap();
        let add_keyword = rng.gen_bool(0.5);
        let token = if add_keyword { keywords.choose(&mut rng).unwrap() } else { filler.choose(&mut rng).unwrap() };
        base.insert(at, token.to_string());
        let after_list = TokenList::new(base);
        let after = keyword_score(&after_list, &lex);
        let (after_label, _) = keyword_classify(&after_list, &lex, DEFAULT_THRESHOLD);
        let ok = if add_keyword {
            after.pr >= before.pr && !(before_label.is_security() && !after_label.is_security())
        } else {
            after.pr <= before.pr && !(!before_label.is_security() && after_label.is_security())
        };
        if !ok {
            return Err(format!("mutation {m}: inserting {token} moved pr {} -> {}", before.pr, after.pr));
        }
    }
    let elapsed = start.elapsed();
    check(
        elapsed < Duration::from_secs(5),
        format!("1/20 -> 0, 2/20 -> 1, 500 monotone mutations, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn criterion_5() -> Outcome {
    let mut checked = 0;
    let mut has_going = false;
    for line in PORTER_PAIRS.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let (word, want) = line.split_once('\t').ok_or_else(|| format!("bad fixture line {line:?}"))?;
        let got = porter_stem(word);
        if got != want {
            return Err(format!("{word}: got {got}, want {want}"));
        }
        has_going |= word == "going" && want == "go";
        checked += 1;
    }
    check(checked >= 30 && has_going, format!("{checked} reference pairs, going -> go"))
}

fn criterion_6() -> Outcome {
    let trace = |name: &str| -> Result<Vec<Vec<usize>>, String> {
        let spec = ModelSpec::parse_name(name, 42).map_err(|e| e.to_string())?;
        Ok(build_model(&spec).map_err(|e| e.to_string())?.shape_trace)
    };
    // first vector after the input is the flattened activation
    let flatten = |t: &[Vec<usize>]| t.iter().skip(1).find(|s| s.len() == 1).map(|s| s[0]);
    let m1 = trace("DeepM1")?;
    let m2 = trace("DeepM2")?;
    let m3 = trace("DeepM3")?;
    let conv_out = m1.contains(&vec![12, 30]);
    let widths = (flatten(&m1), flatten(&m2), flatten(&m3));
    check(
        conv_out && widths == (Some(120), Some(360), Some(2000)),
        format!("DeepM1 conv block 12x30: {conv_out}, flatten widths {widths:?}"),
    )
}

/// 64 sequences: positives draw tokens from 1..=20, negatives from 21..=40,
/// lengths 20 to 60, tail-padded to 100.
fn separable_sequences() -> Vec<(Vec<u32>, bool)> {
    let mut rng = seed::rng(2024);
    (0..64)
        .map(|i| {
            let positive = i % 2 == 0;
            let len = rng.gen_range(20..=60);
            let base = if positive { 1 } else { 21 };
            let mut s: Vec<u32> = (0..len).map(|_| base + rng.gen_range(0..20)).collect();
            s.resize(100, 0);
            (s, positive)
        })
        .collect()
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let data = separable_sequences();
    let pairs: Vec<(&[u32], bool)> = data.iter().map(|(s, y)| (s.as_slice(), *y)).collect();
    let arch = DeepArchitecture::deep_m1();
    let mut net = Network::new(arch.layers(41), arch.maxlen, &mut seed::rng(7));
    let cfg = TrainConfig { seed: 7, max_epochs: 100, patience: 99, ..TrainConfig::default() };
    let log = train_network(&mut net, &pairs, &pairs, &cfg);
    let acc = pairs.iter().filter(|(x, y)| (net.predict_proba(x) > 0.5) == *y).count() as f64 / pairs.len() as f64;
    let elapsed = start.elapsed();

    let mut layers = vec![Layer::Embedding { vocab: 4, dim: 4 }, Layer::Flatten, Layer::Dense { input: 0, units: 1, relu: false }];
    resolve_inputs(&mut layers, Shape { steps: 1, channels: 3, flat: true });
    let mut frozen = Network::new(layers, 3, &mut seed::rng(1));
    let fixture: Vec<(&[u32], bool)> = vec![(&[1, 2, 0], true), (&[3, 3, 0], false)];
    let still = TrainConfig { learning_rate: 0.0, ..TrainConfig::default() };
    let stop = train_network(&mut frozen, &fixture, &fixture, &still);

    check(
        acc >= 0.95 && elapsed < Duration::from_secs(300) && stop.epochs.len() == still.patience + 1,
        format!(
            "DeepM1 train accuracy {acc:.3} after {} epochs in {:.1}s; constant validation stopped after {} epochs (patience {})",
            log.epochs.len(),
            elapsed.as_secs_f64(),
            stop.epochs.len(),
            still.patience
        ),
    )
}

fn criterion_8() -> Outcome {
    let plan = FoldPlan::random(17_277, 10, 42).map_err(|e| e.to_string())?;
    let mut sizes = plan.sizes();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let mut seen = vec![0u32; 17_277];
    for f in 0..plan.len() {
        for i in plan.test_indices(f) {
            seen[i] += 1;
        }
    }
    let once = seen.iter().all(|&c| c == 1);
    let want: Vec<usize> = [1728; 7].into_iter().chain([1727; 3]).collect();

    let ds = load_dataset(&workspace_root().join(SAMPLE)).map_err(|e| e.to_string())?;
    let cfg = RunConfig { models: vec!["TF-IDF+DT".into(), "BoW+RF".into(), "TF-IDF+SVM-LR".into()], baseline: true, ..RunConfig::default() };
    let render = || -> Result<(String, String), String> {
        let outcomes = cross_validation(&cfg, &ds).map_err(|e| e.to_string())?;
        cross_validation_report(&cfg, &ds, &outcomes).map_err(|e| e.to_string())
    };
    let (a, b) = (render()?, render()?);
    check(
        sizes == want && once && a == b,
        format!("fold sizes 7x1728 + 3x1727: {}, each index once: {once}, identical reports: {}", sizes == want, a == b),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let ds = load_dataset(&workspace_root().join(SAMPLE)).map_err(|e| e.to_string())?;
    let cfg = RunConfig { models: vec!["TF-IDF+DT".into()], ..RunConfig::default() };
    let outcomes = cross_validation(&cfg, &ds).map_err(|e| e.to_string())?;
    let f1 = outcomes[0].row.f1;
    let elapsed = start.elapsed();
    let path = workspace_root().join(SAMPLE_BASELINE);
    let baseline = match fs::read_to_string(&path) {
        Ok(text) => text.trim().parse::<f64>().map_err(|e| format!("{}: {e}", path.display()))?,
        Err(_) => {
            fs::write(&path, format!("{f1}\n")).map_err(|e| e.to_string())?;
            f1
        }
    };
    check(
        elapsed < Duration::from_secs(120) && f1 >= 0.9 * baseline,
        format!("{} paragraphs, F1 {f1:.4} vs baseline {baseline:.4}, {:.1}s", ds.len(), elapsed.as_secs_f64()),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("metric formulas match brute-force oracles", criterion_1),
        ("published confusion matrix renders 90.16/80.48/85.05/87.51", criterion_2),
        ("sample sizes 1692, 581, 185", criterion_3),
        ("keyword threshold boundary and monotonicity", criterion_4),
        ("Porter stems match the reference fixture", criterion_5),
        ("deep architecture shape traces", criterion_6),
        ("tiny overfit and early stopping", criterion_7),
        ("fold partition and reproducible reports", criterion_8),
        ("581-paragraph end-to-end regression", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
