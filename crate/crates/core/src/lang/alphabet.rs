use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a symbol within its [`Alphabet`].
pub type Symbol = usize;

/// A finite, ordered set of single-character symbols.
///
/// The order is significant: target vectors list the symbols in alphabet
/// order followed by one end-of-sequence coordinate.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new(symbols: impl IntoIterator<Item = char>) -> Self {
        let symbols: Vec<char> = symbols.into_iter().collect();
        for (i, c) in symbols.iter().enumerate() {
            assert!(
                !symbols[..i].contains(c),
                "duplicate symbol {c:?} in alphabet"
            );
        }
        Alphabet { symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn char_of(&self, symbol: Symbol) -> Option<char> {
        self.symbols.get(symbol).copied()
    }

    pub fn index_of(&self, c: char) -> Option<Symbol> {
        self.symbols.iter().position(|&s| s == c)
    }

    pub fn encode(&self, text: &str) -> Result<Vec<Symbol>> {
        text.chars()
            .map(|c| {
                self.index_of(c).ok_or_else(|| Error::UnknownSymbol {
                    symbol: c.to_string(),
                    alphabet: self.to_string(),
                })
            })
            .collect()
    }

    pub fn decode(&self, word: &[Symbol]) -> String {
        word.iter()
            .map(|&s| self.symbols.get(s).copied().unwrap_or('?'))
            .collect()
    }

    pub fn check(&self, word: &[Symbol]) -> Result<()> {
        match word.iter().find(|&&s| s >= self.symbols.len()) {
            Some(&s) => Err(Error::SymbolIndex(s)),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.symbols.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Alphabet{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode() {
        let a = Alphabet::new(['[', ']']);
        assert_eq!(a.encode("[]]").unwrap(), vec![0, 1, 1]);
        assert_eq!(a.decode(&[1, 0]), "][");
        assert!(matches!(a.encode("[x"), Err(Error::UnknownSymbol { .. })));
        assert!(a.check(&[0, 2]).is_err());
    }

    #[test]
    fn multibyte_symbols() {
        let a = Alphabet::new(['∼', '∧', '0', '1']);
        assert_eq!(a.encode("∧∼01").unwrap(), vec![1, 0, 2, 3]);
    }
}
