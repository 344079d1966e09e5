//! Script tagging, transliteration among Devanagari / SLP1 / ISO-15919,
//! and the anusvara-to-varga-nasal normalization applied before
//! segmentation.

mod table;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

pub use table::{TranslitTable, VargaTable};
pub(crate) use table::VIRAMA;

/// The scripts the toolkit can read and write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScriptTag {
    Devanagari,
    Slp1,
    Iso15919,
}

impl ScriptTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScriptTag::Devanagari => "devanagari",
            ScriptTag::Slp1 => "slp1",
            ScriptTag::Iso15919 => "iso15919",
        }
    }
}

impl fmt::Display for ScriptTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScriptTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "devanagari" | "deva" => Ok(ScriptTag::Devanagari),
            "slp1" => Ok(ScriptTag::Slp1),
            "iso15919" | "iso-15919" | "iso" => Ok(ScriptTag::Iso15919),
            other => Err(format!("unknown script tag {other:?}")),
        }
    }
}

/// A piece of text labeled with the script it is written in. Construction
/// applies Unicode NFC so that composed and decomposed spellings of the
/// same syllable compare equal and hit the same table rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaggedText {
    text: String,
    script: ScriptTag,
}

impl TaggedText {
    pub fn new(text: impl AsRef<str>, script: ScriptTag) -> Self {
        Self {
            text: text.as_ref().nfc().collect(),
            script,
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn script(&self) -> ScriptTag {
        self.script
    }

    pub fn into_text(self) -> String {
        self.text
    }
}

impl fmt::Display for TaggedText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// A character that is not legal under the text's script tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Character offset into the text.
    pub offset: usize,
    pub codepoint: char,
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("unmappable character {codepoint:?} (U+{code:04X}) at offset {offset}", code = *.codepoint as u32)]
    UnmappableCharacter { offset: usize, codepoint: char },
    #[error("operation requires {expected} text, got {found}")]
    WrongScript {
        expected: &'static str,
        found: ScriptTag,
    },
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

/// Converts `input` to the target script using the builtin tables.
///
/// The mapping is table-driven and longest-match-first on multi-character
/// units; marker symbols, whitespace, joiners, and vedic accents pass
/// through untouched.
pub fn transliterate(input: &TaggedText, target: ScriptTag) -> Result<TaggedText, ScriptError> {
    TranslitTable::default_table().transliterate(input, target)
}

/// Replaces every anusvara that immediately precedes a consonant from
/// columns 1-4 of a varga row with that row's fifth (nasal) consonant.
/// Anusvara before anything else, including end of word, stays put.
pub fn normalize_anusvara(input: &TaggedText) -> Result<TaggedText, ScriptError> {
    normalize_anusvara_with(input, VargaTable::default_table())
}

/// [`normalize_anusvara`] against a caller-supplied varga table.
pub fn normalize_anusvara_with(
    input: &TaggedText,
    varga: &VargaTable,
) -> Result<TaggedText, ScriptError> {
    let script = input.script();
    let anusvara = match script {
        ScriptTag::Slp1 => 'M',
        ScriptTag::Devanagari => '\u{0902}',
        ScriptTag::Iso15919 => {
            return Err(ScriptError::WrongScript {
                expected: "devanagari or slp1",
                found: script,
            })
        }
    };

    let chars: Vec<char> = input.text().chars().collect();
    let mut out = String::with_capacity(input.text().len() + 8);
    for (i, &c) in chars.iter().enumerate() {
        if c != anusvara {
            out.push(c);
            continue;
        }
        // The rule looks at the next character only; in Devanagari the
        // consonant letter directly follows the anusvara sign.
        let replacement = chars.get(i + 1).and_then(|&next| {
            let (row, col) = varga.position(script, next)?;
            if col <= 3 {
                varga.fifth(script, row)
            } else {
                None
            }
        });
        match replacement {
            Some(fifth) => {
                out.push_str(fifth);
                if script == ScriptTag::Devanagari {
                    out.push(VIRAMA);
                }
            }
            None => out.push(c),
        }
    }
    Ok(TaggedText::new(out, script))
}

/// Lists every code point of `input` that is illegal under its script tag.
/// Whitespace and the toolkit's marker symbols are always permitted.
pub fn validate(input: &TaggedText) -> Vec<Violation> {
    TranslitTable::default_table().violations(input.text(), input.script())
}

/// True when `text` is usable as a single SLP1 word: non-empty, letters and
/// nasal/visarga signs only.
pub fn is_slp1_word(text: &str) -> bool {
    TranslitTable::default_table().is_slp1_word(text)
}

/// Character offsets of anusvaras in word-final position. The
/// normalization rule leaves these unchanged; callers that care can warn.
pub fn final_anusvara_offsets(input: &TaggedText) -> Vec<usize> {
    let anusvara = match input.script() {
        ScriptTag::Slp1 => 'M',
        ScriptTag::Devanagari => '\u{0902}',
        ScriptTag::Iso15919 => return Vec::new(),
    };
    let chars: Vec<char> = input.text().chars().collect();
    chars
        .iter()
        .enumerate()
        .filter(|&(i, &c)| {
            c == anusvara
                && chars
                    .get(i + 1)
                    .map(|&n| n.is_whitespace())
                    .unwrap_or(true)
        })
        .map(|(i, _)| i)
        .collect()
}
