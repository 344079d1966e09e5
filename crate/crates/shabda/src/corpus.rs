//! Segmentation-corpus loading, validation, pruning, and script
//! conversion. Corpus files are TSV lines of `compound<TAB>seg1+seg2+...`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::sandhi::RuleTable;
use crate::script::{ScriptError, ScriptTag, TaggedText, TranslitTable};
use crate::segmenter;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}:{line}: illegal character {codepoint:?} at offset {offset}")]
    ScriptViolation {
        path: String,
        line: usize,
        offset: usize,
        codepoint: char,
    },
    #[error("instance {index}: {source}")]
    Convert {
        index: usize,
        source: ScriptError,
    },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// One gold-segmented compound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegInstance {
    pub compound: TaggedText,
    pub gold_segments: Vec<TaggedText>,
    /// Dataset name, normally the source file stem.
    pub source: String,
    /// 1-based line number in the source file.
    pub line: usize,
}

impl SegInstance {
    pub fn gold_strings(&self) -> Vec<String> {
        self.gold_segments
            .iter()
            .map(|s| s.text().to_string())
            .collect()
    }
}

/// Loads instances in file order, validating every field against the
/// declared script. The file is read line by line; blank lines are
/// skipped.
pub fn load_seg_corpus(
    path: impl AsRef<Path>,
    script: ScriptTag,
) -> Result<Vec<SegInstance>, CorpusError> {
    let path = path.as_ref();
    let io_err = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::open(path).map_err(io_err)?;
    let source = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let origin = path.display().to_string();
    let mut instances = Vec::new();
    for (idx, line) in std::io::BufRead::lines(std::io::BufReader::new(file)).enumerate() {
        let line = line.map_err(io_err)?;
        if let Some(instance) = parse_seg_line(&line, idx + 1, script, &source, &origin)? {
            instances.push(instance);
        }
    }
    Ok(instances)
}

pub fn parse_seg_corpus(
    text: &str,
    script: ScriptTag,
    source: &str,
    origin: &str,
) -> Result<Vec<SegInstance>, CorpusError> {
    text.lines()
        .enumerate()
        .filter_map(|(idx, line)| parse_seg_line(line, idx + 1, script, source, origin).transpose())
        .collect()
}

fn parse_seg_line(
    raw: &str,
    line_no: usize,
    script: ScriptTag,
    source: &str,
    origin: &str,
) -> Result<Option<SegInstance>, CorpusError> {
    let table = TranslitTable::default_table();
    let line = raw.trim_end_matches('\r');
    if line.trim().is_empty() || line.starts_with('#') {
        return Ok(None);
    }
    let (compound, rest) = line.split_once('\t').ok_or_else(|| CorpusError::Parse {
        path: origin.to_string(),
        line: line_no,
        msg: "expected compound<TAB>seg1+seg2+...".to_string(),
    })?;
    let compound = compound.trim();
    if compound.is_empty() {
        return Err(CorpusError::Parse {
            path: origin.to_string(),
            line: line_no,
            msg: "empty compound".to_string(),
        });
    }
    let segments: Vec<&str> = rest
        .split('+')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    for field in std::iter::once(compound).chain(segments.iter().copied()) {
        if let Some(v) = table.violations(field, script).first() {
            return Err(CorpusError::ScriptViolation {
                path: origin.to_string(),
                line: line_no,
                offset: v.offset,
                codepoint: v.codepoint,
            });
        }
    }
    Ok(Some(SegInstance {
        compound: TaggedText::new(compound, script),
        gold_segments: segments
            .iter()
            .map(|s| TaggedText::new(s, script))
            .collect(),
        source: source.to_string(),
        line: line_no,
    }))
}

/// Which pruning checks run. Join verification is off by default: the
/// shipped rule table is a subset of real sandhi and would over-prune.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PruneChecks {
    pub script: bool,
    pub empty: bool,
    pub join: bool,
}

impl Default for PruneChecks {
    fn default() -> Self {
        Self {
            script: true,
            empty: true,
            join: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PruneReason {
    ScriptViolation,
    EmptySegments,
    JoinFailure,
}

impl PruneReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ScriptViolation => "script-violation",
            Self::EmptySegments => "empty-segments",
            Self::JoinFailure => "join-failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrunedInstance {
    pub line: usize,
    pub compound: String,
    pub reason: PruneReason,
}

/// Partitions instances into kept and pruned. Every pruned instance
/// carries the first reason that fired.
pub fn prune_invalid(
    instances: Vec<SegInstance>,
    rules: &RuleTable,
    checks: PruneChecks,
) -> (Vec<SegInstance>, Vec<PrunedInstance>) {
    let table = TranslitTable::default_table();
    let mut kept = Vec::new();
    let mut pruned = Vec::new();
    for instance in instances {
        let reason = prune_reason(&instance, rules, table, checks);
        match reason {
            Some(reason) => pruned.push(PrunedInstance {
                line: instance.line,
                compound: instance.compound.text().to_string(),
                reason,
            }),
            None => kept.push(instance),
        }
    }
    (kept, pruned)
}

fn prune_reason(
    instance: &SegInstance,
    rules: &RuleTable,
    table: &TranslitTable,
    checks: PruneChecks,
) -> Option<PruneReason> {
    if checks.empty
        && (instance.gold_segments.is_empty()
            || instance.gold_segments.iter().any(|s| s.text().is_empty()))
    {
        return Some(PruneReason::EmptySegments);
    }
    if checks.script {
        let bad = std::iter::once(&instance.compound)
            .chain(instance.gold_segments.iter())
            .any(|t| !table.violations(t.text(), t.script()).is_empty());
        if bad {
            return Some(PruneReason::ScriptViolation);
        }
    }
    if checks.join {
        let slp1: Result<Vec<String>, ScriptError> = instance
            .gold_segments
            .iter()
            .map(|s| table.transliterate(s, ScriptTag::Slp1).map(TaggedText::into_text))
            .collect();
        let compound = table.transliterate(&instance.compound, ScriptTag::Slp1);
        let ok = match (slp1, compound) {
            (Ok(segments), Ok(compound)) => {
                segmenter::verify_segments(compound.text(), &segments, rules)
            }
            _ => false,
        };
        if !ok {
            return Some(PruneReason::JoinFailure);
        }
    }
    None
}

/// Transliterates every field of every instance.
pub fn convert_corpus(
    instances: &[SegInstance],
    target: ScriptTag,
) -> Result<Vec<SegInstance>, CorpusError> {
    let table = TranslitTable::default_table();
    instances
        .iter()
        .enumerate()
        .map(|(index, instance)| {
            let convert = |t: &TaggedText| -> Result<TaggedText, CorpusError> {
                table
                    .transliterate(t, target)
                    .map_err(|source| CorpusError::Convert { index, source })
            };
            Ok(SegInstance {
                compound: convert(&instance.compound)?,
                gold_segments: instance
                    .gold_segments
                    .iter()
                    .map(convert)
                    .collect::<Result<_, _>>()?,
                source: instance.source.clone(),
                line: instance.line,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CorpusStats {
    pub instances: usize,
    /// segment count -> number of instances with that many segments
    pub segment_histogram: BTreeMap<usize, usize>,
    /// every character appearing in compounds or segments
    pub charset: String,
    pub pruned: usize,
    pub pruned_reasons: BTreeMap<String, usize>,
}

/// Deterministic corpus summary, invariant under instance order.
pub fn stats(instances: &[SegInstance]) -> CorpusStats {
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    let mut charset: BTreeSet<char> = BTreeSet::new();
    for instance in instances {
        *histogram.entry(instance.gold_segments.len()).or_insert(0) += 1;
        charset.extend(instance.compound.text().chars());
        for seg in &instance.gold_segments {
            charset.extend(seg.text().chars());
        }
    }
    CorpusStats {
        instances: instances.len(),
        segment_histogram: histogram,
        charset: charset.into_iter().collect(),
        pruned: 0,
        pruned_reasons: BTreeMap::new(),
    }
}

/// [`stats`] plus the outcome of a pruning pass.
pub fn stats_with_pruned(instances: &[SegInstance], pruned: &[PrunedInstance]) -> CorpusStats {
    let mut out = stats(instances);
    out.pruned = pruned.len();
    for p in pruned {
        *out
            .pruned_reasons
            .entry(p.reason.as_str().to_string())
            .or_insert(0) += 1;
    }
    out
}
