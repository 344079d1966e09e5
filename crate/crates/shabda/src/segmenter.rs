//! Lexicon-guided segmentation of compounds into ordered segment lists,
//! the `&...+...$` target codec, and an adapter for externally produced
//! predictions.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics;
use crate::sandhi::{self, RuleTable, SandhiError};
use crate::script;

/// Additive smoothing weight for segment scores.
pub const SMOOTHING_ALPHA: f64 = 0.1;
/// Upper bound on segments per analysis.
pub const MAX_SEGMENTS: usize = 8;

const MAX_EXPANSIONS: usize = 500_000;

#[derive(Debug, Error)]
pub enum SegmentError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("segment list is empty or contains an empty segment")]
    EmptySegment,
    #[error("segment contains reserved marker character {0:?}")]
    MarkerInSegment(char),
    #[error("nothing left after decoding")]
    DecodeEmpty,
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Sandhi(#[from] SandhiError),
}

/// Stem frequencies with add-alpha smoothed log probabilities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(counts: impl IntoIterator<Item = (String, u64)>) -> Self {
        let mut lex = Self::new();
        for (stem, count) in counts {
            lex.add(stem, count);
        }
        lex
    }

    fn add(&mut self, stem: String, count: u64) {
        if count == 0 || stem.is_empty() {
            return;
        }
        *self.counts.entry(stem).or_insert(0) += count;
        self.total += count;
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SegmentError> {
        let path = path.as_ref();
        let io_err = |source| SegmentError::Io {
            path: path.display().to_string(),
            source,
        };
        let file = fs::File::open(path).map_err(io_err)?;
        let mut lex = Self::new();
        for (idx, raw) in std::io::BufRead::lines(std::io::BufReader::new(file)).enumerate() {
            let raw = raw.map_err(io_err)?;
            let line = raw.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (stem, count) = match line.split_once('\t') {
                Some((s, c)) => (s, c),
                None => (line, "1"),
            };
            let count: u64 = count.trim().parse().map_err(|_| SegmentError::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                msg: format!("bad count {count:?}"),
            })?;
            if stem.is_empty() || count == 0 {
                return Err(SegmentError::Parse {
                    path: path.display().to_string(),
                    line: idx + 1,
                    msg: "stem must be non-empty and count >= 1".to_string(),
                });
            }
            lex.add(stem.to_string(), count);
        }
        Ok(lex)
    }

    pub fn count(&self, stem: &str) -> u64 {
        self.counts.get(stem).copied().unwrap_or(0)
    }

    pub fn contains(&self, stem: &str) -> bool {
        self.counts.contains_key(stem)
    }

    /// Number of distinct stems.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(s, &c)| (s.as_str(), c))
    }

    /// Smoothed unigram log probability of one segment.
    pub fn log_prob(&self, segment: &str) -> f64 {
        let vocab = self.counts.len() as f64 + 1.0;
        let num = self.count(segment) as f64 + SMOOTHING_ALPHA;
        let den = self.total as f64 + SMOOTHING_ALPHA * vocab;
        (num / den).ln()
    }

    /// The best log probability any single segment can achieve.
    fn max_log_prob(&self) -> f64 {
        let best = self.counts.values().copied().max().unwrap_or(0);
        let vocab = self.counts.len() as f64 + 1.0;
        ((best as f64 + SMOOTHING_ALPHA) / (self.total as f64 + SMOOTHING_ALPHA * vocab)).ln()
    }
}

/// Counts every gold segment occurrence across a corpus.
pub fn build_lexicon<I, S>(corpus: I) -> Lexicon
where
    I: IntoIterator<Item = S>,
    S: AsRef<[String]>,
{
    let mut lex = Lexicon::new();
    for row in corpus {
        for seg in row.as_ref() {
            lex.add(seg.clone(), 1);
        }
    }
    lex
}

/// One analysis of a compound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segmentation {
    pub compound: String,
    pub segments: Vec<String>,
    /// Boundary offsets in the compound, derived by edit alignment. Fused
    /// chains that collapse neighboring boundaries onto one offset report
    /// that offset once.
    pub locations: Vec<usize>,
    /// Sum over segments of the smoothed unigram log probability.
    pub score: f64,
    /// False for externally produced analyses that were not checked
    /// against the rule table.
    pub verified: bool,
}

/// A compound with its gold split and an external system's predicted split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub input: String,
    pub gold: Vec<String>,
    pub pred: Vec<String>,
}

/// Left-to-right sandhi join of `segments` reproduces `compound`?
pub fn verify_segments(compound: &str, segments: &[String], rules: &RuleTable) -> bool {
    let mut iter = segments.iter();
    let mut acc = match iter.next() {
        Some(first) => first.clone(),
        None => return false,
    };
    for seg in iter {
        acc = match sandhi::join(&acc, seg, rules) {
            Ok(j) => j,
            Err(_) => return false,
        };
    }
    acc == compound
}

struct State {
    priority: f64,
    score: f64,
    remaining: String,
    /// Peeled segments, rightmost first.
    tail: Vec<String>,
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.priority == other.priority
    }
}
impl Eq for State {}
impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

fn compare_analyses(a: &(f64, Vec<String>, String), b: &(f64, Vec<String>, String)) -> Ordering {
    b.0.total_cmp(&a.0)
        .then_with(|| a.1.len().cmp(&b.1.len()))
        .then_with(|| a.2.cmp(&b.2))
}

/// Top-k segmentations of `compound`, best first. Analyses peel segments
/// off the right end through the rule table's split candidates; the score
/// of an analysis is the sum of its segments' smoothed log probabilities.
/// Ties break toward fewer segments, then the lexicographically smaller
/// joined form. The unsegmented word is always among the candidates.
pub fn segment(
    compound: &str,
    lexicon: &Lexicon,
    rules: &RuleTable,
    k: usize,
) -> Result<Vec<Segmentation>, SegmentError> {
    if k == 0 {
        return Err(SegmentError::InvalidInput("k must be >= 1".to_string()));
    }
    if compound.is_empty() {
        return Err(SegmentError::InvalidInput("compound is empty".to_string()));
    }
    if !script::is_slp1_word(compound) {
        return Err(SegmentError::InvalidInput(format!(
            "compound {compound:?} is not a valid SLP1 word"
        )));
    }

    let h = lexicon.max_log_prob();
    let mut queue = BinaryHeap::new();
    queue.push(State {
        priority: h,
        score: 0.0,
        remaining: compound.to_string(),
        tail: Vec::new(),
    });

    let mut candidate_cache: HashMap<String, Vec<(String, String)>> = HashMap::new();
    let mut seen_states: HashSet<(String, String)> = HashSet::new();
    let mut done: HashSet<String> = HashSet::new();
    let mut completed: Vec<(f64, Vec<String>, String)> = Vec::new();
    let mut expansions = 0usize;

    while let Some(state) = queue.pop() {
        // Once k analyses are in hand and the best possible remaining
        // priority cannot beat the current k-th score, stop. The margin
        // keeps exact ties in play for the tie-break sort.
        if completed.len() >= k {
            let mut scores: Vec<f64> = completed.iter().map(|c| c.0).collect();
            scores.sort_by(|a, b| b.total_cmp(a));
            if state.priority < scores[k - 1] - 1e-9 {
                break;
            }
        }
        expansions += 1;
        if expansions > MAX_EXPANSIONS {
            break;
        }

        // Taking the remainder as the first segment completes an analysis.
        let mut segments = Vec::with_capacity(state.tail.len() + 1);
        segments.push(state.remaining.clone());
        segments.extend(state.tail.iter().rev().cloned());
        let joined = segments.join("+");
        if done.insert(joined.clone()) {
            // recompute left-to-right so equal analyses get equal floats
            let score: f64 = segments.iter().map(|s| lexicon.log_prob(s)).sum();
            completed.push((score, segments, joined));
        }

        if state.tail.len() + 2 > MAX_SEGMENTS {
            continue;
        }
        let candidates = match candidate_cache.get(&state.remaining) {
            Some(c) => c.clone(),
            None => {
                let c: Vec<(String, String)> = sandhi::split_candidates(&state.remaining, rules)?
                    .into_iter()
                    .map(|c| (c.left, c.right))
                    .collect();
                candidate_cache.insert(state.remaining.clone(), c.clone());
                c
            }
        };
        for (left, right) in candidates {
            let mut tail = state.tail.clone();
            tail.push(right.clone());
            let key = (left.clone(), tail.join("+"));
            if !seen_states.insert(key) {
                continue;
            }
            let score = state.score + lexicon.log_prob(&right);
            queue.push(State {
                priority: score + h,
                score,
                remaining: left,
                tail,
            });
        }
    }

    completed.sort_by(compare_analyses);
    completed.truncate(k);
    Ok(completed
        .into_iter()
        .map(|(score, segments, _)| {
            let locations = metrics::align_locations(compound, &segments)
                .map(|set| set.into_iter().collect())
                .unwrap_or_default();
            debug_assert!(verify_segments(compound, &segments, rules));
            Segmentation {
                compound: compound.to_string(),
                segments,
                locations,
                score,
                verified: true,
            }
        })
        .collect())
}

/// Renders a segment list in the target format: `&` + segments joined by
/// `+` + `$`.
pub fn encode_target<S: AsRef<str>>(segments: &[S]) -> Result<String, SegmentError> {
    if segments.is_empty() || segments.iter().any(|s| s.as_ref().is_empty()) {
        return Err(SegmentError::EmptySegment);
    }
    for seg in segments {
        if let Some(marker) = seg.as_ref().chars().find(|c| matches!(c, '&' | '+' | '$')) {
            return Err(SegmentError::MarkerInSegment(marker));
        }
    }
    let mut out = String::from("&");
    for (i, seg) in segments.iter().enumerate() {
        if i > 0 {
            out.push('+');
        }
        out.push_str(seg.as_ref());
    }
    out.push('$');
    Ok(out)
}

/// Tolerant inverse of [`encode_target`]: strips one leading `&` and one
/// trailing `$` if present, splits on `+`, trims whitespace, and drops
/// empty pieces. Model output is often malformed; only a fully empty
/// result is an error.
pub fn decode_target(marked: &str) -> Result<Vec<String>, SegmentError> {
    let trimmed = marked.trim();
    let trimmed = trimmed.strip_prefix('&').unwrap_or(trimmed);
    let trimmed = trimmed.strip_suffix('$').unwrap_or(trimmed);
    let segments: Vec<String> = trimmed
        .split('+')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if segments.is_empty() {
        return Err(SegmentError::DecodeEmpty);
    }
    Ok(segments)
}

/// Reads prediction records from JSON lines with keys `input`,
/// `gold` (array), and `pred` (array or marked text). One record is held
/// in memory at a time.
pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRecord>, SegmentError> {
    let path = path.as_ref();
    let io_err = |source| SegmentError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::open(path).map_err(io_err)?;
    let origin = path.display().to_string();
    let mut records = Vec::new();
    for (idx, line) in std::io::BufRead::lines(std::io::BufReader::new(file)).enumerate() {
        let line = line.map_err(io_err)?;
        if let Some(record) = parse_prediction_line(&line, idx + 1, &origin)? {
            records.push(record);
        }
    }
    Ok(records)
}

pub fn parse_predictions(text: &str, origin: &str) -> Result<Vec<PredictionRecord>, SegmentError> {
    text.lines()
        .enumerate()
        .filter_map(|(idx, line)| parse_prediction_line(line, idx + 1, origin).transpose())
        .collect()
}

fn parse_prediction_line(
    raw: &str,
    line_no: usize,
    origin: &str,
) -> Result<Option<PredictionRecord>, SegmentError> {
    let line = raw.trim();
    if line.is_empty() {
        return Ok(None);
    }
    let err = |msg: String| SegmentError::Parse {
        path: origin.to_string(),
        line: line_no,
        msg,
    };
    let value: serde_json::Value = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
    let input = value
        .get("input")
        .and_then(|v| v.as_str())
        .ok_or_else(|| err("missing string field \"input\"".to_string()))?;
    if input.is_empty() {
        return Err(err("\"input\" is empty".to_string()));
    }
    let gold = value
        .get("gold")
        .and_then(|v| v.as_array())
        .ok_or_else(|| err("missing array field \"gold\"".to_string()))?;
    let gold: Vec<String> = gold
        .iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| err("\"gold\" must contain strings".to_string()))
        })
        .collect::<Result<_, _>>()?;
    if gold.is_empty() {
        return Err(err("\"gold\" is empty".to_string()));
    }
    let pred = match value.get("pred") {
        Some(serde_json::Value::String(s)) => decode_target(s).unwrap_or_default(),
        Some(serde_json::Value::Array(items)) => items
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| err("\"pred\" must contain strings".to_string()))
            })
            .collect::<Result<_, _>>()?,
        _ => return Err(err("missing field \"pred\"".to_string())),
    };
    Ok(Some(PredictionRecord {
        input: input.to_string(),
        gold,
        pred,
    }))
}
