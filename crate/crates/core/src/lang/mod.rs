//! Formal languages: alphabets, counter machines, DFAs, the language
//! catalog and next-character legality.

pub mod alphabet;
pub mod catalog;
pub mod counter;
pub mod dfa;
pub mod legal;

pub use alphabet::{Alphabet, Symbol};
pub use catalog::{LanguageClass, LanguageId, LanguageSpec, Recognizer, RunState};
pub use counter::{CounterMachine, CounterOp, MachineConfig, StatelessCounterMachine};
pub use dfa::Dfa;
pub use legal::{brute_force_legal, legal_next, target_rows, LegalSet};
