//! Evaluation metrics: chrF++ for translation output, location and split
//! prediction accuracy for sandhi splitting, and word-level P/R/F1 with
//! perfect match for segmentation.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::segmenter::PredictionRecord;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("reference text is empty")]
    EmptyReference,
    #[error("segments {joined:?} cannot be aligned to {compound:?}")]
    UnalignableGold { compound: String, joined: String },
}

/// chrF++ parameters. The defaults are the metric's standard definition:
/// character n-grams up to order 6, word n-grams up to order 2, beta 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChrfParams {
    pub char_ngram_max: usize,
    pub word_ngram_max: usize,
    pub beta: f64,
}

impl Default for ChrfParams {
    fn default() -> Self {
        Self {
            char_ngram_max: 6,
            word_ngram_max: 2,
            beta: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct OrderStats {
    hyp_total: u64,
    ref_total: u64,
    matched: u64,
}

fn ngram_counts<T: Eq + std::hash::Hash>(items: &[T], n: usize) -> HashMap<&[T], u64> {
    let mut map: HashMap<&[T], u64> = HashMap::new();
    if n > 0 && items.len() >= n {
        for window in items.windows(n) {
            *map.entry(window).or_insert(0) += 1;
        }
    }
    map
}

fn ngram_stats<T: Eq + std::hash::Hash>(hyp: &[T], refr: &[T], n: usize) -> OrderStats {
    let hyp_counts = ngram_counts(hyp, n);
    let ref_counts = ngram_counts(refr, n);
    let matched = hyp_counts
        .iter()
        .map(|(gram, &c)| c.min(ref_counts.get(gram).copied().unwrap_or(0)))
        .sum();
    OrderStats {
        hyp_total: hyp_counts.values().sum(),
        ref_total: ref_counts.values().sum(),
        matched,
    }
}

/// Per-order clipped n-gram statistics: `char_ngram_max` character orders
/// over whitespace-stripped text followed by `word_ngram_max` word orders
/// over whitespace tokens.
fn chrf_stats(hyp: &str, refr: &str, params: &ChrfParams) -> Vec<OrderStats> {
    let hyp_chars: Vec<char> = hyp.chars().filter(|c| !c.is_whitespace()).collect();
    let ref_chars: Vec<char> = refr.chars().filter(|c| !c.is_whitespace()).collect();
    let hyp_words: Vec<&str> = hyp.split_whitespace().collect();
    let ref_words: Vec<&str> = refr.split_whitespace().collect();

    let mut stats = Vec::with_capacity(params.char_ngram_max + params.word_ngram_max);
    for n in 1..=params.char_ngram_max {
        stats.push(ngram_stats(&hyp_chars, &ref_chars, n));
    }
    for n in 1..=params.word_ngram_max {
        stats.push(ngram_stats(&hyp_words, &ref_words, n));
    }
    stats
}

/// Averages per-order F-beta. Orders where neither side has any n-grams do
/// not count; an order where only one side is empty contributes zero.
fn score_from_stats(stats: &[OrderStats], beta: f64) -> f64 {
    let beta2 = beta * beta;
    let mut sum = 0.0;
    let mut orders = 0usize;
    for s in stats {
        if s.hyp_total == 0 && s.ref_total == 0 {
            continue;
        }
        orders += 1;
        let precision = if s.hyp_total > 0 {
            s.matched as f64 / s.hyp_total as f64
        } else {
            0.0
        };
        let recall = if s.ref_total > 0 {
            s.matched as f64 / s.ref_total as f64
        } else {
            0.0
        };
        let denom = beta2 * precision + recall;
        if denom > 0.0 {
            sum += (1.0 + beta2) * precision * recall / denom;
        }
    }
    if orders == 0 {
        0.0
    } else {
        100.0 * sum / orders as f64
    }
}

/// Sentence-level chrF++ on a 0..100 scale.
pub fn chrf_pp(hypothesis: &str, reference: &str, params: &ChrfParams) -> Result<f64, MetricError> {
    if reference.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    Ok(score_from_stats(
        &chrf_stats(hypothesis, reference, params),
        params.beta,
    ))
}

/// Corpus-level chrF++ views: the document-level score pools n-gram counts
/// over all pairs; the mean averages per-item scores.
#[derive(Debug, Clone, Serialize)]
pub struct ChrfCorpus {
    pub document: f64,
    pub mean: f64,
    pub per_item: Vec<f64>,
}

pub fn chrf_corpus<'a, I>(pairs: I, params: &ChrfParams) -> Result<ChrfCorpus, MetricError>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut pooled: Vec<OrderStats> =
        vec![OrderStats::default(); params.char_ngram_max + params.word_ngram_max];
    let mut per_item = Vec::new();
    for (hyp, refr) in pairs {
        if refr.is_empty() {
            return Err(MetricError::EmptyReference);
        }
        let stats = chrf_stats(hyp, refr, params);
        for (acc, s) in pooled.iter_mut().zip(&stats) {
            acc.hyp_total += s.hyp_total;
            acc.ref_total += s.ref_total;
            acc.matched += s.matched;
        }
        per_item.push(score_from_stats(&stats, params.beta));
    }
    let mean = if per_item.is_empty() {
        0.0
    } else {
        per_item.iter().sum::<f64>() / per_item.len() as f64
    };
    Ok(ChrfCorpus {
        document: score_from_stats(&pooled, params.beta),
        mean,
        per_item,
    })
}

/// Maps each segment boundary to a character offset in the compound via a
/// minimal edit alignment of the compound against the `+`-joined segments.
/// `+` deletions are free; traceback from the start prefers match, then
/// substitute, then delete, then insert, which fixes a deterministic
/// leftmost alignment. Fails when the normalized edit distance exceeds 0.5.
pub fn align_locations(
    compound: &str,
    segments: &[String],
) -> Result<BTreeSet<usize>, MetricError> {
    let joined = segments.join("+");
    if segments.is_empty() || segments.iter().any(|s| s.is_empty()) {
        return Err(MetricError::UnalignableGold {
            compound: compound.to_string(),
            joined,
        });
    }
    let s: Vec<char> = joined.chars().collect();
    let t: Vec<char> = compound.chars().collect();
    let (n, m) = (s.len(), t.len());

    // dist[i][j]: cost of aligning s[i..] to t[j..]
    let mut dist = vec![vec![0u32; m + 1]; n + 1];
    for j in (0..m).rev() {
        dist[n][j] = dist[n][j + 1] + 1;
    }
    for i in (0..n).rev() {
        dist[i][m] = dist[i + 1][m] + u32::from(s[i] != '+');
        for j in (0..m).rev() {
            dist[i][j] = if s[i] == '+' {
                dist[i + 1][j].min(dist[i][j + 1] + 1)
            } else {
                let diag = dist[i + 1][j + 1] + u32::from(s[i] != t[j]);
                diag.min(dist[i + 1][j] + 1).min(dist[i][j + 1] + 1)
            };
        }
    }

    let plus_count = s.iter().filter(|&&c| c == '+').count();
    let denom = m.max(n - plus_count).max(1) as f64;
    if f64::from(dist[0][0]) / denom > 0.5 {
        return Err(MetricError::UnalignableGold {
            compound: compound.to_string(),
            joined,
        });
    }

    let mut locations = BTreeSet::new();
    let (mut i, mut j) = (0, 0);
    while i < n {
        let here = dist[i][j];
        if s[i] == '+' {
            if dist[i + 1][j] == here {
                locations.insert(j);
                i += 1;
            } else {
                j += 1;
            }
        } else if j < m && dist[i + 1][j + 1] + u32::from(s[i] != t[j]) == here {
            i += 1;
            j += 1;
        } else if dist[i + 1][j] + 1 == here {
            i += 1;
        } else {
            j += 1;
        }
    }
    Ok(locations)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SegEvalCounts {
    pub records: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lpa_correct: Option<usize>,
    pub spa_correct: usize,
    pub pm_correct: usize,
    pub matched_segments: usize,
    pub predicted_segments: usize,
    pub gold_segments: usize,
}

/// Segmentation metric bundle. `lpa` is present only when boundary
/// locations were evaluated.
#[derive(Debug, Clone, Serialize)]
pub struct SegEvalResult {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lpa: Option<f64>,
    pub spa: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub pm: f64,
    pub counts: SegEvalCounts,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Location prediction accuracy: a record is correct when the predicted
/// boundary-offset set equals the gold set. Gold that cannot be aligned to
/// its input is an error; an unalignable prediction just scores as wrong.
pub fn lpa(records: &[PredictionRecord]) -> Result<f64, MetricError> {
    let mut correct = 0usize;
    for record in records {
        let gold = align_locations(&record.input, &record.gold)?;
        match align_locations(&record.input, &record.pred) {
            Ok(pred) if pred == gold => correct += 1,
            _ => {}
        }
    }
    Ok(ratio(correct, records.len()))
}

/// Split prediction accuracy: exact equality of predicted and gold lists.
pub fn spa(records: &[PredictionRecord]) -> f64 {
    let correct = records.iter().filter(|r| r.pred == r.gold).count();
    ratio(correct, records.len())
}

fn multiset_intersection(a: &[String], b: &[String]) -> usize {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for item in a {
        *counts.entry(item.as_str()).or_insert(0) += 1;
    }
    let mut matched = 0;
    for item in b {
        if let Some(c) = counts.get_mut(item.as_str()) {
            if *c > 0 {
                *c -= 1;
                matched += 1;
            }
        }
    }
    matched
}

/// Micro-averaged word-level precision, recall, and F1 over segment
/// multisets, plus the perfect-match rate. Leaves `lpa` unset.
pub fn prf_pm(records: &[PredictionRecord]) -> SegEvalResult {
    let mut counts = SegEvalCounts {
        records: records.len(),
        ..Default::default()
    };
    for record in records {
        counts.matched_segments += multiset_intersection(&record.pred, &record.gold);
        counts.predicted_segments += record.pred.len();
        counts.gold_segments += record.gold.len();
        if record.pred == record.gold {
            counts.pm_correct += 1;
            counts.spa_correct += 1;
        }
    }
    let precision = ratio(counts.matched_segments, counts.predicted_segments);
    let recall = ratio(counts.matched_segments, counts.gold_segments);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    SegEvalResult {
        lpa: None,
        spa: ratio(counts.spa_correct, counts.records),
        precision,
        recall,
        f1,
        pm: ratio(counts.pm_correct, counts.records),
        counts,
    }
}

/// Runs every segmentation metric, including LPA.
pub fn evaluate_segmentation(records: &[PredictionRecord]) -> Result<SegEvalResult, MetricError> {
    let mut result = prf_pm(records);
    let mut lpa_correct = 0usize;
    for record in records {
        let gold = align_locations(&record.input, &record.gold)?;
        match align_locations(&record.input, &record.pred) {
            Ok(pred) if pred == gold => lpa_correct += 1,
            _ => {}
        }
    }
    result.lpa = Some(ratio(lpa_correct, records.len()));
    result.counts.lpa_correct = Some(lpa_correct);
    Ok(result)
}

/// Serializable bundle tying corpus-level scores to the parameters that
/// produced them. Either metric family may be absent.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub corpus: String,
    pub params: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chrf_document: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chrf_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segmentation: Option<SegEvalResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_item: Option<serde_json::Value>,
}

impl EvalReport {
    pub fn for_chrf(corpus: String, params: &ChrfParams, scores: &ChrfCorpus, per_item: bool) -> Self {
        Self {
            corpus,
            params: serde_json::to_value(params).unwrap_or_default(),
            chrf_document: Some(scores.document),
            chrf_mean: Some(scores.mean),
            segmentation: None,
            per_item: per_item
                .then(|| serde_json::to_value(&scores.per_item).unwrap_or_default()),
        }
    }

    pub fn for_segmentation(
        corpus: String,
        params: serde_json::Value,
        result: SegEvalResult,
        per_item: Option<serde_json::Value>,
    ) -> Self {
        Self {
            corpus,
            params,
            chrf_document: None,
            chrf_mean: None,
            segmentation: Some(result),
            per_item,
        }
    }
}

/// Rewrites all record fields with anusvara normalization, for corpora
/// whose gold convention differs from the prediction side.
pub fn normalize_records(records: &[PredictionRecord]) -> Vec<PredictionRecord> {
    use crate::script::{normalize_anusvara, ScriptTag, TaggedText};
    let norm = |text: &str| -> String {
        normalize_anusvara(&TaggedText::new(text, ScriptTag::Slp1))
            .map(TaggedText::into_text)
            .unwrap_or_else(|_| text.to_string())
    };
    records
        .iter()
        .map(|r| PredictionRecord {
            input: norm(&r.input),
            gold: r.gold.iter().map(|s| norm(s)).collect(),
            pred: r.pred.iter().map(|s| norm(s)).collect(),
        })
        .collect()
}
