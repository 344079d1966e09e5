//! Mapping tables: grapheme correspondences between the supported scripts
//! and the varga grid used by anusvara normalization.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use unicode_normalization::UnicodeNormalization;

use super::{ScriptError, ScriptTag, Violation};

const DEFAULT_TRANSLIT: &str = include_str!("../../data/translit.tsv");
const DEFAULT_VARGA: &str = include_str!("../../data/varga.tsv");

pub(crate) const VIRAMA: char = '\u{094D}';

/// Characters that every operation passes through untouched: whitespace,
/// the marker symbols reserved by the target codec, joiners, and vedic
/// accent marks.
pub(crate) fn is_passthrough(c: char) -> bool {
    c.is_whitespace()
        || matches!(c, '+' | '&' | '$' | '<' | '>')
        || matches!(c, '\u{200C}' | '\u{200D}')
        || ('\u{0951}'..='\u{0954}').contains(&c)
}

/// Structural role of a grapheme unit, derived from its Devanagari column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum UnitKind {
    IndependentVowel,
    Matra,
    Consonant,
    Sign,
    Avagraha,
    Digit,
    Danda,
}

pub(crate) fn dev_kind(c: char) -> Option<UnitKind> {
    match c {
        '\u{0904}'..='\u{0914}' | '\u{0960}' | '\u{0961}' => Some(UnitKind::IndependentVowel),
        '\u{093D}' => Some(UnitKind::Avagraha),
        '\u{093E}'..='\u{094C}' | '\u{0962}' | '\u{0963}' => Some(UnitKind::Matra),
        '\u{0915}'..='\u{0939}' | '\u{0958}'..='\u{095F}' => Some(UnitKind::Consonant),
        '\u{0901}'..='\u{0903}' => Some(UnitKind::Sign),
        '\u{0966}'..='\u{096F}' => Some(UnitKind::Digit),
        '\u{0964}' | '\u{0965}' => Some(UnitKind::Danda),
        _ => None,
    }
}

struct Row {
    dev: String,
    slp1: String,
    iso: String,
    kind: UnitKind,
}

enum ScanEvent<'a> {
    Unit(&'a Row),
    Pass(char),
}

/// Grapheme correspondence table among Devanagari, SLP1, and ISO-15919.
///
/// Rows come from a three-column TSV. The first row for a given key wins on
/// output; later duplicates act as alternate input spellings.
pub struct TranslitTable {
    by_dev: HashMap<String, usize>,
    by_slp1: HashMap<String, usize>,
    by_iso: HashMap<String, usize>,
    /// SLP1 vowel -> dependent (matra) form in Devanagari.
    dev_matra: HashMap<String, String>,
    rows: Vec<Row>,
    max_iso_unit: usize,
    max_slp1_unit: usize,
}

impl TranslitTable {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ScriptError> {
        let mut rows = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 || cols.iter().any(|c| c.is_empty()) {
                return Err(ScriptError::Parse {
                    path: origin.to_string(),
                    line: idx + 1,
                    msg: "expected three non-empty tab-separated columns".to_string(),
                });
            }
            let dev: String = cols[0].nfc().collect();
            let kind = dev_kind(dev.chars().next().unwrap()).ok_or_else(|| ScriptError::Parse {
                path: origin.to_string(),
                line: idx + 1,
                msg: format!("first column {dev:?} is not a Devanagari unit"),
            })?;
            rows.push(Row {
                dev,
                slp1: cols[1].nfc().collect(),
                iso: cols[2].nfc().collect(),
                kind,
            });
        }

        let mut by_dev = HashMap::new();
        let mut by_slp1 = HashMap::new();
        let mut by_iso = HashMap::new();
        let mut dev_matra = HashMap::new();
        for (i, row) in rows.iter().enumerate() {
            by_dev.entry(row.dev.clone()).or_insert(i);
            by_slp1.entry(row.slp1.clone()).or_insert(i);
            by_iso.entry(row.iso.clone()).or_insert(i);
            if row.kind == UnitKind::Matra {
                dev_matra.entry(row.slp1.clone()).or_insert_with(|| row.dev.clone());
            }
        }
        let max_iso_unit = rows.iter().map(|r| r.iso.chars().count()).max().unwrap_or(1);
        let max_slp1_unit = rows.iter().map(|r| r.slp1.chars().count()).max().unwrap_or(1);
        Ok(Self {
            by_dev,
            by_slp1,
            by_iso,
            dev_matra,
            rows,
            max_iso_unit,
            max_slp1_unit,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScriptError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ScriptError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn default_table() -> &'static Self {
        static TABLE: OnceLock<TranslitTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            Self::parse(DEFAULT_TRANSLIT, "builtin:translit.tsv")
                .expect("builtin transliteration table is well-formed")
        })
    }

    fn input_map(&self, script: ScriptTag) -> (&HashMap<String, usize>, usize) {
        match script {
            ScriptTag::Devanagari => (&self.by_dev, 1),
            ScriptTag::Slp1 => (&self.by_slp1, self.max_slp1_unit),
            ScriptTag::Iso15919 => (&self.by_iso, self.max_iso_unit),
        }
    }

    /// Longest-match scan of `text` under `script`. Each table unit arrives
    /// as `Unit`, each passthrough character as `Pass`.
    fn scan<F>(&self, text: &str, script: ScriptTag, mut f: F) -> Result<(), ScriptError>
    where
        F: FnMut(ScanEvent<'_>),
    {
        let (map, max_unit) = self.input_map(script);
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        let mut unit = String::new();
        while i < chars.len() {
            let c = chars[i];
            if is_passthrough(c) || (script == ScriptTag::Devanagari && c == VIRAMA) {
                f(ScanEvent::Pass(c));
                i += 1;
                continue;
            }
            let mut matched = 0;
            for len in (1..=max_unit.min(chars.len() - i)).rev() {
                unit.clear();
                unit.extend(&chars[i..i + len]);
                if let Some(&row) = map.get(unit.as_str()) {
                    f(ScanEvent::Unit(&self.rows[row]));
                    matched = len;
                    break;
                }
            }
            if matched == 0 {
                return Err(ScriptError::UnmappableCharacter {
                    offset: i,
                    codepoint: c,
                });
            }
            i += matched;
        }
        Ok(())
    }

    /// Reads Devanagari into canonical SLP1, resolving the inherent vowel.
    fn read_devanagari(&self, text: &str) -> Result<String, ScriptError> {
        let mut out = String::with_capacity(text.len());
        let mut pending = false; // a bare consonant still owes its inherent "a"
        for (offset, c) in text.chars().enumerate() {
            if is_passthrough(c) {
                if pending {
                    out.push('a');
                    pending = false;
                }
                out.push(c);
                continue;
            }
            if c == VIRAMA {
                pending = false;
                continue;
            }
            let row = self
                .by_dev
                .get(c.to_string().as_str())
                .map(|&i| &self.rows[i])
                .ok_or(ScriptError::UnmappableCharacter {
                    offset,
                    codepoint: c,
                })?;
            match row.kind {
                UnitKind::Consonant => {
                    if pending {
                        out.push('a');
                    }
                    out.push_str(&row.slp1);
                    pending = true;
                }
                UnitKind::Matra => {
                    out.push_str(&row.slp1);
                    pending = false;
                }
                UnitKind::IndependentVowel => {
                    if pending {
                        out.push('a');
                        pending = false;
                    }
                    out.push_str(&row.slp1);
                }
                UnitKind::Sign
                | UnitKind::Avagraha
                | UnitKind::Digit
                | UnitKind::Danda => {
                    if pending {
                        out.push('a');
                        pending = false;
                    }
                    out.push_str(&row.slp1);
                }
            }
        }
        if pending {
            out.push('a');
        }
        Ok(out)
    }

    /// Writes canonical SLP1 as Devanagari, inserting virama between bare
    /// consonants and choosing matra or independent vowel forms by position.
    fn write_devanagari(&self, slp1: &str) -> Result<String, ScriptError> {
        let mut out = String::with_capacity(slp1.len() * 3);
        let mut after_consonant = false;
        self.scan(slp1, ScriptTag::Slp1, |event| {
            let row = match event {
                ScanEvent::Unit(row) => row,
                ScanEvent::Pass(c) => {
                    if after_consonant {
                        out.push(VIRAMA);
                        after_consonant = false;
                    }
                    out.push(c);
                    return;
                }
            };
            match row.kind {
                UnitKind::Consonant => {
                    if after_consonant {
                        out.push(VIRAMA);
                    }
                    out.push_str(&row.dev);
                    after_consonant = true;
                }
                UnitKind::IndependentVowel => {
                    if after_consonant {
                        if row.slp1 != "a" {
                            let matra = self
                                .dev_matra
                                .get(&row.slp1)
                                .expect("every non-a vowel has a matra row");
                            out.push_str(matra);
                        }
                        after_consonant = false;
                    } else {
                        out.push_str(&row.dev);
                    }
                }
                _ => {
                    if after_consonant {
                        out.push(VIRAMA);
                        after_consonant = false;
                    }
                    out.push_str(&row.dev);
                }
            }
        })?;
        if after_consonant {
            out.push(VIRAMA);
        }
        Ok(out)
    }

    fn substitute(
        &self,
        text: &str,
        from: ScriptTag,
        pick: impl Fn(&Row) -> &str,
    ) -> Result<String, ScriptError> {
        let mut out = String::with_capacity(text.len() * 2);
        self.scan(text, from, |event| match event {
            ScanEvent::Unit(row) => out.push_str(pick(row)),
            ScanEvent::Pass(c) => out.push(c),
        })?;
        Ok(out)
    }

    /// Converts to canonical SLP1 from any supported script.
    pub(crate) fn to_slp1(&self, text: &str, script: ScriptTag) -> Result<String, ScriptError> {
        match script {
            ScriptTag::Devanagari => self.read_devanagari(text),
            ScriptTag::Slp1 => self.substitute(text, ScriptTag::Slp1, |r| &r.slp1),
            ScriptTag::Iso15919 => self.substitute(text, ScriptTag::Iso15919, |r| &r.slp1),
        }
    }

    pub(crate) fn render_slp1(&self, slp1: &str, target: ScriptTag) -> Result<String, ScriptError> {
        match target {
            ScriptTag::Devanagari => self.write_devanagari(slp1),
            ScriptTag::Slp1 => Ok(slp1.to_string()),
            ScriptTag::Iso15919 => self.substitute(slp1, ScriptTag::Slp1, |r| &r.iso),
        }
    }

    pub fn transliterate(
        &self,
        input: &super::TaggedText,
        target: ScriptTag,
    ) -> Result<super::TaggedText, ScriptError> {
        if input.script() == target {
            return Ok(input.clone());
        }
        let pivot = self.to_slp1(input.text(), input.script())?;
        let text = self.render_slp1(&pivot, target)?;
        Ok(super::TaggedText::new(text, target))
    }

    /// Reports every character that is not legal under the given tag.
    pub fn violations(&self, text: &str, script: ScriptTag) -> Vec<Violation> {
        let (map, max_unit) = self.input_map(script);
        let chars: Vec<char> = text.chars().collect();
        let mut out = Vec::new();
        let mut i = 0;
        let mut unit = String::new();
        while i < chars.len() {
            let c = chars[i];
            if is_passthrough(c) || (script == ScriptTag::Devanagari && c == VIRAMA) {
                i += 1;
                continue;
            }
            let mut matched = 0;
            for len in (1..=max_unit.min(chars.len() - i)).rev() {
                unit.clear();
                unit.extend(&chars[i..i + len]);
                if map.contains_key(unit.as_str()) {
                    matched = len;
                    break;
                }
            }
            if matched == 0 {
                out.push(Violation {
                    offset: i,
                    codepoint: c,
                });
                i += 1;
            } else {
                i += matched;
            }
        }
        out
    }

    /// True when every character of `text` is an SLP1 letter, nasal sign,
    /// visarga, or avagraha. Digits, punctuation, whitespace, and marker
    /// symbols are not word material.
    pub fn is_slp1_word(&self, text: &str) -> bool {
        !text.is_empty()
            && text.chars().all(|c| {
                self.by_slp1
                    .get(c.to_string().as_str())
                    .map(|&i| {
                        !matches!(self.rows[i].kind, UnitKind::Digit | UnitKind::Danda)
                    })
                    .unwrap_or(false)
            })
    }
}

struct VargaBlock {
    grid: Vec<Vec<String>>,
    /// unit -> (row, column) position in the grid
    pos: HashMap<String, (usize, usize)>,
}

/// The five varga rows by five positions, per script. The fifth position of
/// each row is the nasal that replaces a preceding anusvara.
pub struct VargaTable {
    blocks: HashMap<ScriptTag, VargaBlock>,
}

impl VargaTable {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ScriptError> {
        let mut blocks: HashMap<ScriptTag, VargaBlock> = HashMap::new();
        let mut current: Option<(ScriptTag, Vec<Vec<String>>)> = None;
        let parse_err = |line: usize, msg: String| ScriptError::Parse {
            path: origin.to_string(),
            line,
            msg,
        };

        let flush = |cur: Option<(ScriptTag, Vec<Vec<String>>)>,
                         blocks: &mut HashMap<ScriptTag, VargaBlock>,
                         line: usize|
         -> Result<(), ScriptError> {
            if let Some((tag, grid)) = cur {
                if grid.len() != 5 {
                    return Err(parse_err(
                        line,
                        format!("script block {} has {} rows, expected 5", tag, grid.len()),
                    ));
                }
                let mut pos = HashMap::new();
                for (r, row) in grid.iter().enumerate() {
                    for (c, unit) in row.iter().enumerate() {
                        if pos.insert(unit.clone(), (r, c)).is_some() {
                            return Err(parse_err(
                                line,
                                format!("duplicate unit {unit:?} in {tag} block"),
                            ));
                        }
                    }
                }
                blocks.insert(tag, VargaBlock { grid, pos });
            }
            Ok(())
        };

        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !line.contains('\t') {
                let tag = line.parse::<ScriptTag>().map_err(|_| {
                    parse_err(idx + 1, format!("unknown script tag {line:?}"))
                })?;
                flush(current.take(), &mut blocks, idx + 1)?;
                current = Some((tag, Vec::new()));
                continue;
            }
            let cells: Vec<String> = line.split('\t').map(|c| c.nfc().collect()).collect();
            if cells.len() != 5 || cells.iter().any(|c| c.is_empty()) {
                return Err(parse_err(idx + 1, "expected 5 non-empty columns".to_string()));
            }
            match current.as_mut() {
                Some((_, grid)) => grid.push(cells),
                None => return Err(parse_err(idx + 1, "row before any script tag".to_string())),
            }
        }
        flush(current.take(), &mut blocks, text.lines().count())?;
        Ok(Self { blocks })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScriptError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ScriptError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn default_table() -> &'static Self {
        static TABLE: OnceLock<VargaTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            Self::parse(DEFAULT_VARGA, "builtin:varga.tsv")
                .expect("builtin varga table is well-formed")
        })
    }

    /// Position of a single-character unit within the script's grid.
    pub(crate) fn position(&self, script: ScriptTag, unit: char) -> Option<(usize, usize)> {
        self.blocks
            .get(&script)
            .and_then(|b| b.pos.get(unit.to_string().as_str()).copied())
    }

    /// The fifth (nasal) unit of the given row.
    pub(crate) fn fifth(&self, script: ScriptTag, row: usize) -> Option<&str> {
        self.blocks
            .get(&script)
            .and_then(|b| b.grid.get(row))
            .map(|r| r[4].as_str())
    }
}
