//! Lexical simplification of medical text.
//!
//! Terms found in an ontology-derived phrase table are replaced by the
//! alternative label that maximises a mix of language-model fit and word
//! frequency, repeating until the sentence stops changing.
//!
//! ```
//! use medsimp::lm::ScoreTable;
//! use medsimp::ontology::{align, AlignOptions, ConceptRecord};
//! use medsimp::simplifier::{simplify, SimplifierConfig};
//! use medsimp::wordfreq::FrequencyTable;
//!
//! let records = vec![
//!     ConceptRecord::new("C1", "Otalgia", "snomed", true),
//!     ConceptRecord::new("C1", "Earache", "chv", false),
//! ];
//! let table = align(&records, &AlignOptions::default());
//! let freq = FrequencyTable::load("earache\t0.00001\n".as_bytes()).unwrap();
//! let lm = ScoreTable::new().with_fallback(-5.0);
//! let config = SimplifierConfig::new(0.5).unwrap();
//! let result = simplify("Patient has otalgia.", &table, &lm, &freq, &config);
//! assert_eq!(result.final_sentence, "Patient has earache.");
//! ```

pub mod eval;
pub mod lm;
pub mod ontology;
pub mod simplifier;
pub mod textproc;
pub mod wordfreq;

pub use lm::{LmError, LmScorer};
pub use ontology::{align, AlignOptions, ConceptRecord, PhraseTable};
pub use simplifier::{simplify, SimplificationResult, SimplifierConfig};
pub use wordfreq::{FrequencyTable, TermScorer};
