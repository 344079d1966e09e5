//! shabda is a deterministic toolkit for Sanskrit-centred text processing:
//! transliteration among Devanagari, SLP1, and ISO-15919, sandhi joining
//! and splitting, lexicon-driven word segmentation, augmented-input
//! generation for technical-term translation, and the evaluation metrics
//! (chrF++, LPA, SPA, word-level P/R/F1, perfect match) used to score
//! segmentation and translation outputs.
//!
//! Everything is a pure function over immutable tables: load the tables
//! once, then call from as many threads as you like. The default tables
//! are compiled in; all of them can be replaced by TSV files.
//!
//! ```
//! use shabda::{sandhi, script, segmenter};
//! use shabda::script::{ScriptTag, TaggedText};
//!
//! let rules = sandhi::RuleTable::default_table();
//! assert_eq!(sandhi::join("tatra", "api", rules).unwrap(), "tatrApi");
//!
//! let lexicon = segmenter::Lexicon::from_counts(
//!     [("tatra".to_string(), 1), ("api".to_string(), 1)],
//! );
//! let top = segmenter::segment("tatrApi", &lexicon, rules, 1).unwrap();
//! assert_eq!(top[0].segments, vec!["tatra", "api"]);
//!
//! let word = TaggedText::new("संधि", ScriptTag::Devanagari);
//! let slp1 = script::transliterate(&word, ScriptTag::Slp1).unwrap();
//! assert_eq!(slp1.text(), "saMDi");
//! ```

pub mod augment;
pub mod corpus;
pub mod metrics;
pub mod sandhi;
pub mod script;
pub mod segmenter;

pub use script::{ScriptTag, TaggedText};
