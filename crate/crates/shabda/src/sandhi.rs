//! Data-driven sandhi engine: forward joining of two words into a fused
//! surface form, and reverse enumeration of split candidates.
//!
//! All rules operate on SLP1. Rule files are TSV with columns
//! `left_suffix<TAB>right_prefix<TAB>fused<TAB>category`; file order is
//! priority and a literal `∅` in the fused column denotes deletion.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use thiserror::Error;

use crate::script;

const DEFAULT_RULES: &str = include_str!("../data/sandhi_rules.tsv");
const DELETION_MARK: &str = "∅";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SandhiCategory {
    Vowel,
    Visarga,
    Consonant,
    Concat,
}

impl SandhiCategory {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "vowel" => Some(Self::Vowel),
            "visarga" => Some(Self::Visarga),
            "consonant" => Some(Self::Consonant),
            "concat" => Some(Self::Concat),
            _ => None,
        }
    }
}

/// One rewrite: when the first word ends with `left_suffix` and the second
/// begins with `right_prefix`, the two patterns are replaced by `fused`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SandhiRule {
    pub left_suffix: String,
    pub right_prefix: String,
    pub fused: String,
    pub category: SandhiCategory,
}

#[derive(Debug, Error)]
pub enum SandhiError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}:{line}: duplicate rule for ({left:?}, {right:?})")]
    DuplicateRule {
        path: String,
        line: usize,
        left: String,
        right: String,
    },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// An ordered rule list plus a reverse index from the first character of
/// each fused form to the rules that produce it.
pub struct RuleTable {
    rules: Vec<SandhiRule>,
    by_fused_first: HashMap<char, Vec<usize>>,
    empty_fused: Vec<usize>,
    concat: SandhiRule,
}

impl RuleTable {
    pub fn new(rules: Vec<SandhiRule>) -> Result<Self, SandhiError> {
        let mut seen = HashMap::new();
        for (i, rule) in rules.iter().enumerate() {
            if rule.category != SandhiCategory::Concat
                && (rule.left_suffix.is_empty() || rule.right_prefix.is_empty())
            {
                return Err(SandhiError::InvalidInput(format!(
                    "rule {i}: empty pattern outside the concat category"
                )));
            }
            if let Some(prev) = seen.insert((rule.left_suffix.clone(), rule.right_prefix.clone()), i)
            {
                return Err(SandhiError::DuplicateRule {
                    path: "<memory>".to_string(),
                    line: i + 1,
                    left: rules[prev].left_suffix.clone(),
                    right: rules[prev].right_prefix.clone(),
                });
            }
        }
        let mut by_fused_first: HashMap<char, Vec<usize>> = HashMap::new();
        let mut empty_fused = Vec::new();
        for (i, rule) in rules.iter().enumerate() {
            match rule.fused.chars().next() {
                Some(c) => by_fused_first.entry(c).or_default().push(i),
                None => empty_fused.push(i),
            }
        }
        Ok(Self {
            rules,
            by_fused_first,
            empty_fused,
            concat: SandhiRule {
                left_suffix: String::new(),
                right_prefix: String::new(),
                fused: String::new(),
                category: SandhiCategory::Concat,
            },
        })
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, SandhiError> {
        let mut rules = Vec::new();
        let mut seen: HashMap<(String, String), usize> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(SandhiError::Parse {
                    path: origin.to_string(),
                    line: idx + 1,
                    msg: format!("expected 4 tab-separated columns, got {}", cols.len()),
                });
            }
            let category = SandhiCategory::parse(cols[3]).ok_or_else(|| SandhiError::Parse {
                path: origin.to_string(),
                line: idx + 1,
                msg: format!("unknown category {:?}", cols[3]),
            })?;
            if category != SandhiCategory::Concat && (cols[0].is_empty() || cols[1].is_empty()) {
                return Err(SandhiError::Parse {
                    path: origin.to_string(),
                    line: idx + 1,
                    msg: "empty pattern outside the concat category".to_string(),
                });
            }
            if cols[2].is_empty() {
                return Err(SandhiError::Parse {
                    path: origin.to_string(),
                    line: idx + 1,
                    msg: format!("empty fused form; use {DELETION_MARK} for deletion"),
                });
            }
            let key = (cols[0].to_string(), cols[1].to_string());
            if seen.insert(key, idx + 1).is_some() {
                return Err(SandhiError::DuplicateRule {
                    path: origin.to_string(),
                    line: idx + 1,
                    left: cols[0].to_string(),
                    right: cols[1].to_string(),
                });
            }
            let fused = if cols[2] == DELETION_MARK {
                String::new()
            } else {
                cols[2].to_string()
            };
            rules.push(SandhiRule {
                left_suffix: cols[0].to_string(),
                right_prefix: cols[1].to_string(),
                fused,
                category,
            });
        }
        Self::new(rules)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SandhiError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| SandhiError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn default_table() -> &'static Self {
        static TABLE: OnceLock<RuleTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            Self::parse(DEFAULT_RULES, "builtin:sandhi_rules.tsv")
                .expect("builtin rule table is well-formed")
        })
    }

    pub fn rules(&self) -> &[SandhiRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// The synthetic rule reported for plain concatenation.
    pub fn concat_rule(&self) -> &SandhiRule {
        &self.concat
    }
}

/// A way of undoing one fused region of a compound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitCandidate<'t> {
    pub left: String,
    pub right: String,
    pub rule: &'t SandhiRule,
    /// Character offset in the compound where the fused region begins.
    pub location: usize,
}

fn check_word(word: &str, what: &str) -> Result<(), SandhiError> {
    if word.is_empty() {
        return Err(SandhiError::InvalidInput(format!("{what} is empty")));
    }
    if !script::is_slp1_word(word) {
        return Err(SandhiError::InvalidInput(format!(
            "{what} {word:?} is not a valid SLP1 word"
        )));
    }
    Ok(())
}

/// Joins two words, applying the first rule (in table order) whose patterns
/// match the boundary. Without a match the words are concatenated.
pub fn join(left: &str, right: &str, table: &RuleTable) -> Result<String, SandhiError> {
    check_word(left, "left word")?;
    check_word(right, "right word")?;
    for rule in &table.rules {
        if left.ends_with(&rule.left_suffix) && right.starts_with(&rule.right_prefix) {
            let mut out = String::with_capacity(left.len() + right.len());
            out.push_str(&left[..left.len() - rule.left_suffix.len()]);
            out.push_str(&rule.fused);
            out.push_str(&right[rule.right_prefix.len()..]);
            return Ok(out);
        }
    }
    Ok(format!("{left}{right}"))
}

/// Enumerates every way of splitting `compound` into two words: plain cuts
/// at each interior boundary plus the inverse of every rule whose fused
/// form occurs in the compound. Every returned pair joins back to the
/// compound exactly; the list is deduplicated and ordered by location,
/// then rule priority.
pub fn split_candidates<'t>(
    compound: &str,
    table: &'t RuleTable,
) -> Result<Vec<SplitCandidate<'t>>, SandhiError> {
    check_word(compound, "compound")?;
    let n = compound.len(); // SLP1 is ASCII, so bytes are characters
    let mut raw: Vec<(usize, usize, SplitCandidate<'t>)> = Vec::new();

    for location in 1..n {
        // plain concatenation at this cut
        raw.push((
            location,
            usize::MAX,
            SplitCandidate {
                left: compound[..location].to_string(),
                right: compound[location..].to_string(),
                rule: &table.concat,
                location,
            },
        ));
        // rules whose fused form starts here; position 0 is excluded so the
        // left side always keeps at least one original character
        let first = compound[location..].chars().next().unwrap();
        for &i in table.by_fused_first.get(&first).into_iter().flatten() {
            let rule = &table.rules[i];
            if compound[location..].starts_with(&rule.fused) {
                let mut left = compound[..location].to_string();
                left.push_str(&rule.left_suffix);
                let mut right = rule.right_prefix.clone();
                right.push_str(&compound[location + rule.fused.len()..]);
                raw.push((
                    location,
                    i,
                    SplitCandidate {
                        left,
                        right,
                        rule,
                        location,
                    },
                ));
            }
        }
        // deletion rules can be undone at any interior position
        for &i in &table.empty_fused {
            let rule = &table.rules[i];
            let mut left = compound[..location].to_string();
            left.push_str(&rule.left_suffix);
            let mut right = rule.right_prefix.clone();
            right.push_str(&compound[location..]);
            raw.push((
                location,
                i,
                SplitCandidate {
                    left,
                    right,
                    rule,
                    location,
                },
            ));
        }
    }

    raw.sort_by_key(|entry| (entry.0, entry.1));
    let mut out: Vec<SplitCandidate<'t>> = Vec::new();
    for (_, _, cand) in raw {
        if out.iter().any(|c| c.left == cand.left && c.right == cand.right) {
            continue;
        }
        // soundness: keep only pairs that the joiner maps back to the compound
        if join(&cand.left, &cand.right, table)
            .map(|j| j == compound)
            .unwrap_or(false)
        {
            out.push(cand);
        }
    }
    Ok(out)
}

/// Loads a rule table from a TSV file.
pub fn load_rules(path: impl AsRef<Path>) -> Result<RuleTable, SandhiError> {
    RuleTable::load(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table() -> &'static RuleTable {
        RuleTable::default_table()
    }

    #[test]
    fn join_guna_and_dirgha() {
        assert_eq!(join("tatra", "api", table()).unwrap(), "tatrApi");
        assert_eq!(join("nara", "indra", table()).unwrap(), "narendra");
    }

    #[test]
    fn join_falls_back_to_concatenation() {
        assert_eq!(join("tat", "puruza", table()).unwrap(), "tatpuruza");
    }

    #[test]
    fn join_visarga_and_consonant_rules() {
        assert_eq!(join("rAmaH", "gacCati", table()).unwrap(), "rAmogacCati");
        assert_eq!(join("rAmaH", "api", table()).unwrap(), "rAmo'pi");
        assert_eq!(join("tat", "eva", table()).unwrap(), "tadeva");
        assert_eq!(join("sam", "Di", table()).unwrap(), "saMDi");
    }

    #[test]
    fn join_rejects_bad_input() {
        assert!(join("", "api", table()).is_err());
        assert!(join("tatra", "", table()).is_err());
        assert!(join("tat ra", "api", table()).is_err());
        assert!(join("तत्र", "api", table()).is_err());
    }

    #[test]
    fn split_finds_paper_examples() {
        let cands = split_candidates("tatrApi", table()).unwrap();
        assert!(cands
            .iter()
            .any(|c| c.left == "tatra" && c.right == "api"));
        let cands = split_candidates("narendra", table()).unwrap();
        assert!(cands
            .iter()
            .any(|c| c.left == "nara" && c.right == "indra"));
    }

    #[test]
    fn split_single_character_has_no_candidates() {
        assert!(split_candidates("a", table()).unwrap().is_empty());
    }

    #[test]
    fn split_matches_brute_force_oracle() {
        // oracle: all cut points, all rule undos, filtered by join-roundtrip
        fn oracle(compound: &str, table: &RuleTable) -> Vec<(String, String)> {
            let mut found = Vec::new();
            for cut in 1..compound.len() {
                let mut pairs = vec![(
                    compound[..cut].to_string(),
                    compound[cut..].to_string(),
                )];
                for rule in table.rules() {
                    if compound[cut..].starts_with(&rule.fused) {
                        pairs.push((
                            format!("{}{}", &compound[..cut], rule.left_suffix),
                            format!("{}{}", rule.right_prefix, &compound[cut + rule.fused.len()..]),
                        ));
                    }
                }
                for (l, r) in pairs {
                    if join(&l, &r, table).map(|j| j == compound).unwrap_or(false)
                        && !found.contains(&(l.clone(), r.clone()))
                    {
                        found.push((l, r));
                    }
                }
            }
            found
        }
        for compound in ["tatrApi", "narendra", "saMDi", "rAmo'pi", "tatpuruza"] {
            let got: Vec<(String, String)> = split_candidates(compound, table())
                .unwrap()
                .into_iter()
                .map(|c| (c.left, c.right))
                .collect();
            let mut want = oracle(compound, table());
            want.sort();
            let mut got_sorted = got.clone();
            got_sorted.sort();
            assert_eq!(got_sorted, want, "candidate set for {compound}");
        }
    }

    #[test]
    fn split_is_deterministic() {
        let a = split_candidates("tatrApi", table()).unwrap();
        let b = split_candidates("tatrApi", table()).unwrap();
        let fmt = |v: &[SplitCandidate]| -> Vec<String> {
            v.iter()
                .map(|c| format!("{}|{}|{}", c.left, c.right, c.location))
                .collect()
        };
        assert_eq!(fmt(&a), fmt(&b));
    }

    #[test]
    fn parse_rejects_duplicates_and_bad_rows() {
        assert!(RuleTable::parse("a\ta\tA\tvowel\na\ta\tA\tvowel\n", "t").is_err());
        assert!(RuleTable::parse("a\ta\tA\n", "t").is_err());
        assert!(RuleTable::parse("a\ta\tA\tnoise\n", "t").is_err());
        assert!(RuleTable::parse("\ta\tA\tvowel\n", "t").is_err());
    }

    #[test]
    fn empty_table_degrades_to_concatenation() {
        let empty = RuleTable::parse("", "t").unwrap();
        assert!(empty.is_empty());
        assert_eq!(join("tatra", "api", &empty).unwrap(), "tatraapi");
        let cands = split_candidates("tatra", &empty).unwrap();
        assert_eq!(cands.len(), 4);
        assert!(cands.iter().all(|c| c.rule.category == SandhiCategory::Concat));
    }

    #[test]
    fn deletion_rule_roundtrips() {
        let t = RuleTable::parse("H\ts\t∅\tvisarga\n", "t").unwrap();
        assert_eq!(join("rAmaH", "sa", &t).unwrap(), "rAmaa");
        let cands = split_candidates("rAmaa", &t).unwrap();
        assert!(cands.iter().any(|c| c.left == "rAmaH" && c.right == "sa"));
    }

    #[test]
    fn three_rule_file_loads() {
        let t = RuleTable::parse("a\ta\tA\tvowel\na\ti\te\tvowel\na\tu\to\tvowel\n", "t").unwrap();
        assert_eq!(t.len(), 3);
    }

    fn stem_strategy() -> impl Strategy<Value = String> {
        let consonants = "kgcjtdnpbmyrlvszSh";
        let vowels = "aAiIuUe";
        (
            proptest::sample::select(consonants.chars().collect::<Vec<_>>()),
            proptest::collection::vec(
                (
                    proptest::sample::select(consonants.chars().collect::<Vec<_>>()),
                    proptest::sample::select(vowels.chars().collect::<Vec<_>>()),
                ),
                1..4,
            ),
        )
            .prop_map(|(lead, syls)| {
                let mut s = String::new();
                s.push(lead);
                for (c, v) in syls {
                    s.push(v);
                    s.push(c);
                }
                s
            })
    }

    proptest! {
        // Roundtrip completeness: whatever join produced, split can undo.
        #[test]
        fn prop_split_undoes_join(a in stem_strategy(), b in stem_strategy()) {
            let compound = join(&a, &b, table()).unwrap();
            let cands = split_candidates(&compound, table()).unwrap();
            prop_assert!(
                cands.iter().any(|c| c.left == a && c.right == b),
                "({a}, {b}) missing from splits of {compound}"
            );
        }

        // Soundness: every candidate joins back to its compound.
        #[test]
        fn prop_candidates_join_back(a in stem_strategy(), b in stem_strategy()) {
            let compound = join(&a, &b, table()).unwrap();
            for cand in split_candidates(&compound, table()).unwrap() {
                prop_assert_eq!(join(&cand.left, &cand.right, table()).unwrap(), compound.clone());
                prop_assert!(cand.location > 0 && cand.location < compound.len());
            }
        }

        // Monotonicity: removing the last rule never adds candidates.
        #[test]
        fn prop_more_rules_more_candidates(a in stem_strategy(), b in stem_strategy()) {
            let full = table();
            let fewer = RuleTable::new(full.rules()[..full.len() - 20].to_vec()).unwrap();
            let compound = join(&a, &b, full).unwrap();
            let small: Vec<(String, String)> = split_candidates(&compound, &fewer)
                .unwrap()
                .into_iter()
                .map(|c| (c.left, c.right))
                .collect();
            let big: Vec<(String, String)> = split_candidates(&compound, full)
                .unwrap()
                .into_iter()
                .map(|c| (c.left, c.right))
                .collect();
            for pair in small {
                // a pair found with fewer rules survives, unless the larger
                // table changes what join(pair) produces
                if join(&pair.0, &pair.1, full).unwrap() == compound {
                    prop_assert!(big.contains(&pair));
                }
            }
        }
    }
}
