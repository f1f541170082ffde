//! Dataset assembly: a training split plus disjoint length bins, with k-hot
//! next-character targets, and JSON-lines persistence.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::sample::{enumerate_language, Sampler};
use crate::error::{Error, Result};
use crate::lang::{target_rows, LanguageId, LanguageSpec, Symbol};
use crate::rng;

/// Sizes and length ranges of one dataset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub train_size: usize,
    pub train_lo: usize,
    pub train_hi: usize,
    pub bin_size: usize,
    pub n_bins: usize,
    pub bin_width: usize,
}

impl DatasetSpec {
    /// The standard sizes and windows for a catalog language.
    pub fn for_language(id: &LanguageId) -> DatasetSpec {
        use LanguageId::*;
        let s = |train_size, train_lo, train_hi, bin_size, n_bins, bin_width| DatasetSpec {
            train_size,
            train_lo,
            train_hi,
            bin_size,
            n_bins,
            bin_width,
        };
        match id {
            Shuffle(k) if *k >= 4 => s(10000, 2, 100, 2000, 3, 50),
            Dyck1 | Shuffle(_) | BoolExp(_) | ResetDyck1 => s(10000, 2, 50, 2000, 3, 50),
            AnBn => s(50, 2, 100, 50, 3, 100),
            AnBnCn => s(50, 3, 150, 50, 3, 150),
            AnBnCnDn => s(50, 4, 200, 50, 3, 200),
            Tomita(1) => s(50, 2, 50, 100, 2, 50),
            Tomita(2) => s(25, 2, 50, 50, 2, 50),
            Tomita(_) | Parity | Zero12 => s(10000, 2, 50, 2000, 2, 50),
            AbcdePlus => s(10000, 5, 200, 1000, 2, 100),
            AbDBc => s(10000, 1, 50, 2000, 2, 50),
            Dn(_) => s(10000, 2, 100, 2000, 2, 100),
            AaStar => s(250, 2, 500, 50, 2, 100),
            AaaaStar | AbabStar => s(125, 4, 500, 25, 2, 100),
        }
    }

    /// Same windows with different split sizes.
    pub fn with_sizes(mut self, train_size: usize, bin_size: usize) -> Self {
        self.train_size = train_size;
        self.bin_size = bin_size;
        self
    }

    /// Length range of bin `j`. Bin 0 is the training range; later bins are
    /// contiguous windows of `bin_width` past it.
    pub fn bin_range(&self, j: usize) -> (usize, usize) {
        if j == 0 {
            (self.train_lo, self.train_hi)
        } else {
            (
                self.train_hi + (j - 1) * self.bin_width + 2,
                self.train_hi + j * self.bin_width,
            )
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_lo > self.train_hi || self.n_bins == 0 || self.bin_width < 2 {
            return Err(Error::InvalidConfig(format!(
                "inconsistent dataset spec {self:?}"
            )));
        }
        Ok(())
    }
}

/// Languages sparse enough that splits list every word in the window.
pub fn is_enumerated(id: &LanguageId) -> bool {
    use LanguageId::*;
    matches!(
        id,
        AnBn | AnBnCn | AnBnCnDn | AaStar | AaaaStar | AbabStar | Tomita(1) | Tomita(2) | Dn(1)
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub input: String,
    pub targets: Vec<Vec<u8>>,
    pub length: usize,
    #[serde(skip)]
    pub symbols: Vec<Symbol>,
}

impl Example {
    /// Builds the record for a member word. Fails on non-members.
    pub fn new(spec: &LanguageSpec, word: Vec<Symbol>) -> Result<Self> {
        if !spec.membership(&word)? {
            return Err(Error::NotAMember {
                language: spec.id().to_string(),
                word: spec.decode(&word),
            });
        }
        let targets = targets_for(spec, &word)?;
        Ok(Example {
            input: spec.decode(&word),
            length: word.len(),
            targets,
            symbols: word,
        })
    }
}

/// Row `t` is the k-hot legal set after `s_1..s_t`. Fails on non-members.
pub fn targets_for(spec: &LanguageSpec, word: &[Symbol]) -> Result<Vec<Vec<u8>>> {
    if !spec.membership(word)? {
        return Err(Error::NotAMember {
            language: spec.id().to_string(),
            word: spec.decode(word),
        });
    }
    Ok(target_rows(spec, word)?.iter().map(|r| r.to_bits()).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bin {
    pub lo: usize,
    pub hi: usize,
    pub examples: Vec<Example>,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub language: LanguageId,
    pub seed: u64,
    pub spec: DatasetSpec,
    pub train: Vec<Example>,
    pub bins: Vec<Bin>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub language: LanguageId,
    pub alphabet: String,
    pub seed: u64,
    pub spec: DatasetSpec,
    pub train_count: usize,
    pub bins: Vec<BinManifest>,
    /// File name → lowercase hex SHA-256 of its bytes.
    pub sha256: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinManifest {
    pub file: String,
    pub lo: usize,
    pub hi: usize,
    pub count: usize,
}

const TRAIN_FILE: &str = "train.jsonl";
const MANIFEST_FILE: &str = "manifest.json";

fn bin_file(j: usize) -> String {
    format!("bin{j}.jsonl")
}

/// Attempts per wanted distinct string before a bin is declared short.
const DISTINCT_ATTEMPTS_PER_STRING: usize = 50;

/// Builds the dataset for `language`. Identical inputs give identical
/// datasets.
pub fn build_dataset(language: &LanguageId, spec: &DatasetSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let lang = language.spec()?;
    let enumerated = is_enumerated(language);

    let train_words = if enumerated {
        let mut r = rng::stream(seed, 0);
        subset(
            enumerate_language(&lang, spec.train_lo, spec.train_hi)?,
            spec.train_size,
            &mut r,
        )
    } else {
        let mut r = rng::stream(seed, 0);
        let sampler = Sampler::new(&lang, spec.train_lo, spec.train_hi)?;
        (0..spec.train_size)
            .map(|_| sampler.sample(&mut r))
            .collect::<Result<Vec<_>>>()?
    };
    if train_words.len() < spec.train_size {
        log::warn!(
            "{language}: training window holds only {} of the {} requested words",
            train_words.len(),
            spec.train_size
        );
    }
    let train = train_words
        .into_iter()
        .map(|w| Example::new(&lang, w))
        .collect::<Result<Vec<_>>>()?;

    let mut bins = Vec::with_capacity(spec.n_bins);
    for j in 0..spec.n_bins {
        let (lo, hi) = spec.bin_range(j);
        let mut r = rng::stream(seed, 1 + j as u64);
        let words = if enumerated {
            let words = subset(enumerate_language(&lang, lo, hi)?, spec.bin_size, &mut r);
            if words.len() < spec.bin_size {
                log::warn!(
                    "{language}: bin {j} [{lo}, {hi}] holds only {} of the {} requested words",
                    words.len(),
                    spec.bin_size
                );
            }
            words
        } else {
            distinct_samples(&lang, lo, hi, spec.bin_size, j, &mut r)?
        };
        let examples = words
            .into_iter()
            .map(|w| Example::new(&lang, w))
            .collect::<Result<Vec<_>>>()?;
        bins.push(Bin { lo, hi, examples });
    }

    Ok(Dataset {
        language: language.clone(),
        seed,
        spec: spec.clone(),
        train,
        bins,
    })
}

/// A random subset of at most `size` words, returned in length order.
fn subset(mut words: Vec<Vec<Symbol>>, size: usize, rng: &mut rng::Rng) -> Vec<Vec<Symbol>> {
    if words.len() > size {
        words.shuffle(rng);
        words.truncate(size);
        words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    }
    words
}

fn distinct_samples(
    lang: &LanguageSpec,
    lo: usize,
    hi: usize,
    size: usize,
    bin: usize,
    rng: &mut rng::Rng,
) -> Result<Vec<Vec<Symbol>>> {
    let sampler = Sampler::new(lang, lo, hi)?;
    let mut seen = HashSet::with_capacity(size);
    let mut out = Vec::with_capacity(size);
    let budget = size.max(1) * DISTINCT_ATTEMPTS_PER_STRING;
    for _ in 0..budget {
        if out.len() == size {
            break;
        }
        let w = sampler.sample(rng)?;
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    if out.len() < size {
        return Err(Error::InsufficientStrings {
            language: lang.id().to_string(),
            bin,
            wanted: size,
            achievable: out.len(),
        });
    }
    Ok(out)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn to_jsonl(examples: &[Example]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    for ex in examples {
        serde_json::to_writer(&mut buf, ex)?;
        buf.push(b'\n');
    }
    Ok(buf)
}

impl Dataset {
    pub fn language_spec(&self) -> Result<LanguageSpec> {
        self.language.spec()
    }

    pub fn manifest(&self) -> Result<Manifest> {
        let mut sha256 = BTreeMap::new();
        sha256.insert(TRAIN_FILE.to_string(), sha256_hex(&to_jsonl(&self.train)?));
        let mut bins = Vec::new();
        for (j, bin) in self.bins.iter().enumerate() {
            let file = bin_file(j);
            sha256.insert(file.clone(), sha256_hex(&to_jsonl(&bin.examples)?));
            bins.push(BinManifest {
                file,
                lo: bin.lo,
                hi: bin.hi,
                count: bin.examples.len(),
            });
        }
        Ok(Manifest {
            language: self.language.clone(),
            alphabet: self.language_spec()?.alphabet().symbols().iter().collect(),
            seed: self.seed,
            spec: self.spec.clone(),
            train_count: self.train.len(),
            bins,
            sha256,
        })
    }

    /// Writes `train.jsonl`, `bin{j}.jsonl` and `manifest.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<Manifest> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, bytes: &[u8]| -> Result<()> {
            let path = dir.join(name);
            let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            f.write_all(bytes).map_err(|e| Error::io(&path, e))
        };
        write(TRAIN_FILE, &to_jsonl(&self.train)?)?;
        for (j, bin) in self.bins.iter().enumerate() {
            write(&bin_file(j), &to_jsonl(&bin.examples)?)?;
        }
        let manifest = self.manifest()?;
        write(MANIFEST_FILE, &serde_json::to_vec_pretty(&manifest)?)?;
        Ok(manifest)
    }

    /// Reads a dataset written by [`Dataset::save`], checking every hash.
    pub fn load(dir: &Path) -> Result<Dataset> {
        let manifest_path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| Error::format(&manifest_path, e.to_string()))?;
        let lang = manifest.language.spec()?;

        let read = |name: &str| -> Result<Vec<Example>> {
            let path = dir.join(name);
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let expected = manifest
                .sha256
                .get(name)
                .ok_or_else(|| Error::format(&manifest_path, format!("no hash for {name}")))?;
            if &sha256_hex(&bytes) != expected {
                return Err(Error::format(&path, "SHA-256 does not match the manifest"));
            }
            let mut out = Vec::new();
            for (i, line) in BufReader::new(&bytes[..]).lines().enumerate() {
                let line = line.map_err(|e| Error::io(&path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let mut ex: Example = serde_json::from_str(&line)
                    .map_err(|e| Error::format(&path, format!("line {}: {e}", i + 1)))?;
                ex.symbols = lang.encode(&ex.input)?;
                out.push(ex);
            }
            Ok(out)
        };

        let train = read(TRAIN_FILE)?;
        let bins = manifest
            .bins
            .iter()
            .map(|b| {
                Ok(Bin {
                    lo: b.lo,
                    hi: b.hi,
                    examples: read(&b.file)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            language: manifest.language,
            seed: manifest.seed,
            spec: manifest.spec,
            train,
            bins,
        })
    }
}
