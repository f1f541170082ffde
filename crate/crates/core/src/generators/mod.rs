//! Positive-sample generation and dataset assembly.

pub mod dataset;
pub mod pcfg;
pub mod sample;
pub mod shuffle;

pub use dataset::{build_dataset, is_enumerated, targets_for, Bin, Dataset, DatasetSpec, Example, Manifest};
pub use pcfg::{sample_dyck1, PcfgDyckParams};
pub use sample::{enumerate_language, sample_language, Sampler};
pub use shuffle::{random_interleaving, shuffle_words};
