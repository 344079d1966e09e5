//! Builds augmented inputs for technical-term translation: the Hindi term
//! is normalized, stripped of inflectional affixes, segmented, and the
//! segments are rendered after the English term in the target script.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::sandhi::RuleTable;
use crate::script::{self, ScriptError, ScriptTag, TaggedText};
use crate::segmenter::{self, Lexicon, SegmentError};

const DEFAULT_AFFIXES: &str = include_str!("../data/hindi_affixes.tsv");

pub const SEP: &str = "<SEP>";
pub const ISEP: &str = "<isep>";

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error(transparent)]
    Segment(#[from] SegmentError),
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
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Administrative,
    Biotechnology,
    Chemistry,
    Other,
}

impl Domain {
    pub fn parse(s: &str) -> Self {
        match s.trim().to_ascii_lowercase().as_str() {
            "administrative" | "administration" | "admin" => Self::Administrative,
            "biotechnology" | "biotech" => Self::Biotechnology,
            "chemistry" => Self::Chemistry,
            _ => Self::Other,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Administrative => "administrative",
            Self::Biotechnology => "biotechnology",
            Self::Chemistry => "chemistry",
            Self::Other => "other",
        }
    }
}

/// One bilingual dictionary entry: an English term and its Hindi
/// translation, bound for some target language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DictEntry {
    pub english: String,
    pub hindi: TaggedText,
    pub domain: Domain,
    pub target_language: String,
}

impl DictEntry {
    /// Parses a `english<TAB>hindi<TAB>target_language<TAB>domain` line.
    pub fn from_tsv_line(line: &str, origin: &str, line_no: usize) -> Result<Self, AugmentError> {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 || cols[0].is_empty() || cols[1].is_empty() {
            return Err(AugmentError::Parse {
                path: origin.to_string(),
                line: line_no,
                msg: "expected english<TAB>hindi<TAB>target_language<TAB>domain".to_string(),
            });
        }
        Ok(Self {
            english: cols[0].to_string(),
            hindi: TaggedText::new(cols[1], ScriptTag::Devanagari),
            domain: Domain::parse(cols[3]),
            target_language: cols[2].trim().to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Affix {
    pub suffix: String,
    /// Minimum number of code points the stem must keep.
    pub min_stem: usize,
}

/// Ordered Hindi suffix patterns; the longest match that leaves enough stem
/// wins, and at most one suffix is stripped per word.
#[derive(Debug, Clone, Default)]
pub struct AffixList {
    affixes: Vec<Affix>,
}

impl AffixList {
    pub fn parse(text: &str, origin: &str) -> Result<Self, AugmentError> {
        let mut affixes = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (suffix, min_stem) = match line.split_once('\t') {
                Some((s, m)) => {
                    let min: usize = m.trim().parse().map_err(|_| AugmentError::Parse {
                        path: origin.to_string(),
                        line: idx + 1,
                        msg: format!("bad minimum stem length {m:?}"),
                    })?;
                    (s, min)
                }
                None => (line, 2),
            };
            if suffix.is_empty() {
                return Err(AugmentError::Parse {
                    path: origin.to_string(),
                    line: idx + 1,
                    msg: "empty suffix".to_string(),
                });
            }
            affixes.push(Affix {
                suffix: suffix.nfc().collect(),
                min_stem,
            });
        }
        Ok(Self { affixes })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AugmentError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| AugmentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn default_list() -> &'static Self {
        static LIST: OnceLock<AffixList> = OnceLock::new();
        LIST.get_or_init(|| {
            Self::parse(DEFAULT_AFFIXES, "builtin:hindi_affixes.tsv")
                .expect("builtin affix list is well-formed")
        })
    }

    pub fn len(&self) -> usize {
        self.affixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.affixes.is_empty()
    }

    fn strip<'a>(&self, word: &'a str) -> &'a str {
        let word_chars = word.chars().count();
        let mut best: Option<&Affix> = None;
        for affix in &self.affixes {
            if !word.ends_with(affix.suffix.as_str()) {
                continue;
            }
            let suffix_chars = affix.suffix.chars().count();
            if word_chars < suffix_chars + affix.min_stem {
                continue;
            }
            if best.is_none_or(|b| suffix_chars > b.suffix.chars().count()) {
                best = Some(affix);
            }
        }
        match best {
            Some(affix) => &word[..word.len() - affix.suffix.len()],
            None => word,
        }
    }
}

/// Strips one inflectional suffix per word. Words without a listed suffix,
/// or too short to keep the minimum stem, pass unchanged.
pub fn lemmatize_hindi(word: &TaggedText, affixes: &AffixList) -> Result<TaggedText, ScriptError> {
    if word.script() != ScriptTag::Devanagari {
        return Err(ScriptError::WrongScript {
            expected: "devanagari",
            found: word.script(),
        });
    }
    let stripped: Vec<&str> = word
        .text()
        .split_whitespace()
        .map(|w| affixes.strip(w))
        .collect();
    Ok(TaggedText::new(stripped.join(" "), ScriptTag::Devanagari))
}

/// Script used for rendered segments. Languages written in a script the
/// toolkit does not carry fall back to ISO-15919 romanization, which is
/// also the readable form the augmented input is printed in.
pub fn target_script(language: &str) -> ScriptTag {
    match language.trim().to_ascii_lowercase().as_str() {
        "hindi" | "hi" | "sanskrit" | "sa" => ScriptTag::Devanagari,
        "slp1" => ScriptTag::Slp1,
        _ => ScriptTag::Iso15919,
    }
}

/// An English term plus the segments mined from its Hindi translation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedInput {
    pub english: String,
    pub segments: Vec<TaggedText>,
    pub rendered: String,
    pub coverage_flag: bool,
    /// The segments in SLP1, before target-script conversion.
    pub slp1_segments: Vec<String>,
}

/// Runs the full pipeline for one entry: anusvara normalization, affix
/// stripping per word, transliteration to SLP1, top-1 segmentation, and
/// target-script rendering. When no word yields anything beyond an
/// out-of-lexicon whole word, the entry is uncovered and renders as the
/// bare English term.
pub fn build_augmented_input(
    entry: &DictEntry,
    rules: &RuleTable,
    lexicon: &Lexicon,
    affixes: &AffixList,
) -> Result<AugmentedInput, AugmentError> {
    let normalized = script::normalize_anusvara(&entry.hindi)?;
    let lemma = lemmatize_hindi(&normalized, affixes)?;

    let mut slp1_segments = Vec::new();
    let mut covered = false;
    for word in lemma.text().split_whitespace() {
        let slp1 = script::transliterate(&TaggedText::new(word, ScriptTag::Devanagari), ScriptTag::Slp1)?;
        let top = segmenter::segment(slp1.text(), lexicon, rules, 1)?;
        let analysis = &top[0];
        if analysis.segments.len() > 1 || lexicon.contains(slp1.text()) {
            covered = true;
        }
        slp1_segments.extend(analysis.segments.iter().cloned());
    }

    if !covered {
        return Ok(AugmentedInput {
            english: entry.english.clone(),
            segments: Vec::new(),
            rendered: entry.english.clone(),
            coverage_flag: false,
            slp1_segments: Vec::new(),
        });
    }

    let script = target_script(&entry.target_language);
    let segments: Vec<TaggedText> = slp1_segments
        .iter()
        .map(|s| script::transliterate(&TaggedText::new(s, ScriptTag::Slp1), script))
        .collect::<Result<_, _>>()?;
    let mut rendered = format!("{} {SEP} ", entry.english);
    for (i, seg) in segments.iter().enumerate() {
        if i > 0 {
            rendered.push_str(&format!(" {ISEP} "));
        }
        rendered.push_str(seg.text());
    }
    Ok(AugmentedInput {
        english: entry.english.clone(),
        segments,
        rendered,
        coverage_flag: true,
        slp1_segments,
    })
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct CoverageStats {
    pub entries: usize,
    /// Entries whose rendering carries segments.
    pub covered: usize,
    /// Entries where additionally every segment is an in-lexicon stem.
    pub covered_all_in_lexicon: usize,
    pub fraction: f64,
    /// False when there were no entries and the fraction is meaningless.
    pub defined: bool,
}

impl CoverageStats {
    fn add(&mut self, covered: bool, all_in_lexicon: bool) {
        self.entries += 1;
        if covered {
            self.covered += 1;
        }
        if all_in_lexicon {
            self.covered_all_in_lexicon += 1;
        }
    }

    fn finish(&mut self) {
        self.defined = self.entries > 0;
        self.fraction = if self.entries > 0 {
            self.covered as f64 / self.entries as f64
        } else {
            0.0
        };
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CoverageReport {
    pub overall: CoverageStats,
    pub per_domain: BTreeMap<String, CoverageStats>,
}

/// Counts covered entries per domain and overall.
pub fn coverage_report(
    entries: &[DictEntry],
    rules: &RuleTable,
    lexicon: &Lexicon,
    affixes: &AffixList,
) -> Result<CoverageReport, AugmentError> {
    let mut report = CoverageReport::default();
    for entry in entries {
        let augmented = build_augmented_input(entry, rules, lexicon, affixes)?;
        let all_in = augmented.coverage_flag
            && augmented.slp1_segments.iter().all(|s| lexicon.contains(s));
        report.overall.add(augmented.coverage_flag, all_in);
        report
            .per_domain
            .entry(entry.domain.as_str().to_string())
            .or_default()
            .add(augmented.coverage_flag, all_in);
    }
    report.overall.finish();
    for stats in report.per_domain.values_mut() {
        stats.finish();
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture_lexicon() -> Lexicon {
        Lexicon::from_counts(
            [
                "jana", "samUha", "racanA", "BrURa", "rUpa", "antaraRa", "antaH", "kzepaRa",
            ]
            .into_iter()
            .map(|s| (s.to_string(), 1)),
        )
    }

    fn entry(english: &str, hindi: &str, lang: &str, domain: &str) -> DictEntry {
        DictEntry {
            english: english.to_string(),
            hindi: TaggedText::new(hindi, ScriptTag::Devanagari),
            domain: Domain::parse(domain),
            target_language: lang.to_string(),
        }
    }

    #[test]
    fn lemmatize_strips_listed_suffix() {
        let affixes = AffixList::default_list();
        let out = lemmatize_hindi(
            &TaggedText::new("करणों", ScriptTag::Devanagari),
            affixes,
        )
        .unwrap();
        assert_eq!(out.text(), "करण");
        assert!(script::validate(&out).is_empty());
    }

    #[test]
    fn lemmatize_leaves_unlisted_and_short_words() {
        let affixes = AffixList::default_list();
        for word in ["रचना", "जन"] {
            let out = lemmatize_hindi(&TaggedText::new(word, ScriptTag::Devanagari), affixes)
                .unwrap();
            assert_eq!(out.text(), word);
        }
        // stripping would leave a single letter, below the minimum stem
        let out = lemmatize_hindi(&TaggedText::new("कों", ScriptTag::Devanagari), affixes)
            .unwrap();
        assert_eq!(out.text(), "कों");
    }

    #[test]
    fn lemmatize_rejects_non_devanagari() {
        let affixes = AffixList::default_list();
        assert!(lemmatize_hindi(&TaggedText::new("karaN", ScriptTag::Slp1), affixes).is_err());
    }

    #[test]
    fn renders_two_segment_entry() {
        let out = build_augmented_input(
            &entry("mass", "जनसमूह", "kannada", "administrative"),
            RuleTable::default_table(),
            &fixture_lexicon(),
            AffixList::default_list(),
        )
        .unwrap();
        assert_eq!(out.rendered, "mass <SEP> jana <isep> samūha");
        assert!(out.coverage_flag);
        assert_eq!(out.slp1_segments, vec!["jana", "samUha"]);
    }

    #[test]
    fn renders_single_segment_entry() {
        let out = build_augmented_input(
            &entry("composition", "रचना", "kannada", "administrative"),
            RuleTable::default_table(),
            &fixture_lexicon(),
            AffixList::default_list(),
        )
        .unwrap();
        assert_eq!(out.rendered, "composition <SEP> racanā");
    }

    #[test]
    fn renders_fused_and_visarga_entries() {
        let out = build_augmented_input(
            &entry("transformation", "रूपांतरण", "marathi", "biotechnology"),
            RuleTable::default_table(),
            &fixture_lexicon(),
            AffixList::default_list(),
        )
        .unwrap();
        assert_eq!(out.rendered, "transformation <SEP> rūpa <isep> antaraṇa");

        let out = build_augmented_input(
            &entry("injection", "अंतःक्षेपण", "marathi", "biotechnology"),
            RuleTable::default_table(),
            &fixture_lexicon(),
            AffixList::default_list(),
        )
        .unwrap();
        assert_eq!(out.rendered, "injection <SEP> antaḥ <isep> kṣēpaṇa");
    }

    #[test]
    fn uncovered_entry_renders_bare_term() {
        let out = build_augmented_input(
            &entry("valve", "कपाट", "kannada", "other"),
            RuleTable::default_table(),
            &fixture_lexicon(),
            AffixList::default_list(),
        )
        .unwrap();
        assert!(!out.coverage_flag);
        assert_eq!(out.rendered, "valve");
        assert!(!out.rendered.contains(SEP) && !out.rendered.contains(ISEP));
        assert!(out.segments.is_empty());
    }

    #[test]
    fn hindi_target_renders_devanagari() {
        let out = build_augmented_input(
            &entry("mass", "जनसमूह", "hindi", "administrative"),
            RuleTable::default_table(),
            &fixture_lexicon(),
            AffixList::default_list(),
        )
        .unwrap();
        assert_eq!(out.rendered, "mass <SEP> जन <isep> समूह");
        for seg in &out.segments {
            assert_eq!(seg.script(), ScriptTag::Devanagari);
            assert!(script::validate(seg).is_empty());
        }
    }

    #[test]
    fn rendering_grammar_is_exact() {
        let lexicon = fixture_lexicon();
        let rules = RuleTable::default_table();
        let affixes = AffixList::default_list();
        for (english, hindi) in [
            ("mass", "जनसमूह"),
            ("composition", "रचना"),
            ("valve", "कपाट"),
            ("group of people", "जन समूह"),
        ] {
            let out = build_augmented_input(
                &entry(english, hindi, "kannada", "other"),
                rules,
                &lexicon,
                affixes,
            )
            .unwrap();
            if out.coverage_flag {
                let expected = format!(
                    "{} {SEP} {}",
                    english,
                    out.segments
                        .iter()
                        .map(|s| s.text().to_string())
                        .collect::<Vec<_>>()
                        .join(&format!(" {ISEP} "))
                );
                assert_eq!(out.rendered, expected);
            } else {
                assert_eq!(out.rendered, english);
            }
            assert!(!out.rendered.starts_with(' ') && !out.rendered.ends_with(' '));
            let again = build_augmented_input(
                &entry(english, hindi, "kannada", "other"),
                rules,
                &lexicon,
                affixes,
            )
            .unwrap();
            assert_eq!(again.rendered, out.rendered);
        }
    }

    #[test]
    fn coverage_fractions() {
        let lexicon = fixture_lexicon();
        let rules = RuleTable::default_table();
        let affixes = AffixList::default_list();
        let entries = vec![
            entry("mass", "जनसमूह", "kannada", "administrative"),
            entry("composition", "रचना", "kannada", "administrative"),
            entry("brood", "भ्रूण", "marathi", "biotechnology"),
            entry("valve", "कपाट", "kannada", "other"),
        ];
        let report = coverage_report(&entries, rules, &lexicon, affixes).unwrap();
        assert_eq!(report.overall.entries, 4);
        assert_eq!(report.overall.covered, 3);
        assert!((report.overall.fraction - 0.75).abs() < 1e-12);
        assert!(report.overall.defined);
        assert_eq!(report.per_domain["administrative"].covered, 2);
        assert_eq!(report.per_domain["administrative"].fraction, 1.0);
        assert_eq!(report.per_domain["other"].covered, 0);

        let empty = coverage_report(&[], rules, &lexicon, affixes).unwrap();
        assert_eq!(empty.overall.entries, 0);
        assert_eq!(empty.overall.fraction, 0.0);
        assert!(!empty.overall.defined);
    }

    #[test]
    fn dict_entry_parses_tsv() {
        let e = DictEntry::from_tsv_line("mass\tजनसमूह\tkannada\tadministrative", "t", 1).unwrap();
        assert_eq!(e.english, "mass");
        assert_eq!(e.domain, Domain::Administrative);
        assert!(DictEntry::from_tsv_line("mass\tजनसमूह", "t", 1).is_err());
    }
}
