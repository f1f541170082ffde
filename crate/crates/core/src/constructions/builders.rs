//! Weight assignments for the three constructions.

use super::hand::{identity, zeros, Acceptor, HandTransformer};
use crate::error::{Error, Result};
use crate::lang::catalog::BRACKETS;
use crate::lang::{Alphabet, StatelessCounterMachine};

/// Shuffle-k recognizer: `d_model = 2k`, `[_j ↦ e_{2j} − e_{2j+1}`,
/// `]_j ↦ −e_{2j} + e_{2j+1}`, identity query/value, zero key, no
/// residual, `z = ReLU(a)`.
pub fn build_shuffle_dyck(k: usize) -> Result<HandTransformer> {
    if k == 0 || k > BRACKETS.len() {
        return Err(Error::InvalidConfig(format!(
            "Shuffle-k needs 1 ≤ k ≤ {}",
            BRACKETS.len()
        )));
    }
    let alphabet = Alphabet::new(BRACKETS[..k].iter().flat_map(|&(o, c)| [o, c]));
    let d = 2 * k;
    let embed = (0..d)
        .map(|s| {
            let mut e = vec![0; d];
            let sign = if s % 2 == 0 { 1 } else { -1 };
            e[2 * (s / 2)] = sign;
            e[2 * (s / 2) + 1] = -sign;
            e
        })
        .collect();
    HandTransformer::new(
        alphabet,
        embed,
        None,
        identity(d),
        zeros(d, d),
        identity(d),
        false,
        identity(d),
        vec![0; d],
        Acceptor::ShuffleDyck { k },
    )
}

/// Symbol used for the prepended start position in exports.
pub const BOOLEXP_START: char = '^';

/// BoolExp recognizer over `(operator, arity)` pairs plus the values `0`
/// and `1`: `d_model = 2`, a start position embedded as `[1, −1]`, an
/// arity-`r` symbol as `[r − 1, −(r − 1)]`.
pub fn build_boolexp(ops: &[(char, u32)]) -> Result<HandTransformer> {
    if ops.is_empty() || ops.iter().any(|&(_, r)| r == 0) {
        return Err(Error::InvalidConfig(
            "BoolExp needs at least one operator, each of arity ≥ 1".into(),
        ));
    }
    let spec = crate::lang::LanguageId::BoolExp(ops.to_vec()).spec()?;
    let alphabet = spec.alphabet().clone();
    let embed = alphabet
        .symbols()
        .iter()
        .map(|c| {
            let r = ops
                .iter()
                .find(|(o, _)| o == c)
                .map_or(0, |&(_, r)| i64::from(r));
            vec![r - 1, 1 - r]
        })
        .collect();
    HandTransformer::new(
        alphabet,
        embed,
        Some(vec![1, -1]),
        identity(2),
        zeros(2, 2),
        identity(2),
        false,
        identity(2),
        vec![0; 2],
        Acceptor::BoolExp,
    )
}

/// Stateless counter machine recognizer: `d_model = 2k + |Σ|`. The input
/// is `[0_{2k}, onehot(s)]`; the value map sends `onehot(s)` to
/// `(+m_c, −m_c)` in each counter block; with the residual the attention
/// output is `[±counts / i, onehot(s_i)]`. The FFN keeps the counter block
/// through a ReLU and maps `onehot(s_i)` to `onehot(δ(s_i))`.
pub fn build_rcl(machine: &StatelessCounterMachine) -> Result<HandTransformer> {
    let alphabet = machine.alphabet().clone();
    let k = machine.counters();
    let sigma = alphabet.len();
    let n_states = machine.states().len();
    let d = 2 * k + sigma;
    let embed = (0..sigma)
        .map(|s| {
            let mut e = vec![0; d];
            e[2 * k + s] = 1;
            e
        })
        .collect();
    let mut value = zeros(d, d);
    for s in 0..sigma {
        for (c, &m) in machine.increments(s).iter().enumerate() {
            value[2 * c][2 * k + s] = m;
            value[2 * c + 1][2 * k + s] = -m;
        }
    }
    let mut ffn = zeros(2 * k + n_states, d);
    for (i, row) in ffn.iter_mut().enumerate().take(2 * k) {
        row[i] = 1;
    }
    for s in 0..sigma {
        ffn[2 * k + machine.next_state(s)][2 * k + s] = 1;
    }
    HandTransformer::new(
        alphabet,
        embed,
        None,
        identity(d),
        zeros(d, d),
        value,
        true,
        ffn,
        vec![0; 2 * k + n_states],
        Acceptor::Rcl {
            counters: k,
            start: machine.start(),
            accept: machine.accept_pairs().to_vec(),
        },
    )
}

/// Stateless machine for the bracket alphabet of Shuffle-k: counter `j`
/// adds ±1 for bracket type `j`, the state records whether the last symbol
/// opened or closed a bracket, and words are accepted with all counters at
/// zero unless they end with an opening bracket. This is a superset of
/// Shuffle-k (prefix depths may go negative); Shuffle-1's stateless
/// relative is Dyck-1 with that relaxation.
pub fn shuffle_stateless_machine(k: usize) -> Result<StatelessCounterMachine> {
    if k == 0 || k > BRACKETS.len() {
        return Err(Error::InvalidConfig(format!(
            "Shuffle-k needs 1 ≤ k ≤ {}",
            BRACKETS.len()
        )));
    }
    const START: usize = 0;
    const AFTER_OPEN: usize = 1;
    const AFTER_CLOSE: usize = 2;
    let alphabet = Alphabet::new(BRACKETS[..k].iter().flat_map(|&(o, c)| [o, c]));
    let increments = (0..2 * k)
        .map(|s| {
            let mut inc = vec![0; k];
            inc[s / 2] = if s % 2 == 0 { 1 } else { -1 };
            inc
        })
        .collect();
    let next_state = (0..2 * k)
        .map(|s| if s % 2 == 0 { AFTER_OPEN } else { AFTER_CLOSE })
        .collect();
    StatelessCounterMachine::new(
        alphabet,
        &["start", "after_open", "after_close"],
        START,
        increments,
        next_state,
        vec![(START, 0), (AFTER_CLOSE, 0)],
    )
}

#[cfg(test)]
mod tests {
    use num_rational::Rational64;

    use super::*;
    use crate::constructions::HandRunner;
    use crate::lang::catalog::{BOOLEXP2_OPS, BOOLEXP3_OPS};

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn shuffle1_embeddings_and_trace() {
        let ht = build_shuffle_dyck(1).unwrap();
        assert_eq!(ht.embedding(0), [1, -1]);
        assert_eq!(ht.embedding(1), [-1, 1]);
        let w = ht.alphabet().encode("[[]").unwrap();
        let t = ht.run::<Rational64>(&w).unwrap();
        assert_eq!(t.attention_output[2], vec![r(1, 3), r(-1, 3)]);
        let w = ht.alphabet().encode("[]").unwrap();
        let t = ht.run::<Rational64>(&w).unwrap();
        assert_eq!(t.attention_output[0], vec![r(1, 1), r(-1, 1)]);
        assert_eq!(t.attention_output[1], vec![r(0, 1), r(0, 1)]);
        assert!(t.accepted);
        let w = ht.alphabet().encode("][").unwrap();
        let t = ht.run::<Rational64>(&w).unwrap();
        assert_eq!(t.output[0], vec![r(0, 1), r(1, 1)]);
        assert!(!t.accepted);
        assert!(ht.accepts::<Rational64>(&[]).unwrap());
    }

    #[test]
    fn shuffle2_paper_words() {
        let ht = build_shuffle_dyck(2).unwrap();
        for (w, ok) in [("([)]", true), ("[((]))", true), ("([)", false), ("())(", false)] {
            let w = ht.alphabet().encode(w).unwrap();
            assert_eq!(ht.accepts::<Rational64>(&w).unwrap(), ok);
        }
    }

    #[test]
    fn boolexp_embeddings() {
        let ht = build_boolexp(&[('∼', 1), ('∧', 2), ('>', 3)]).unwrap();
        let e = |c: char| ht.embedding(ht.alphabet().index_of(c).unwrap()).to_vec();
        assert_eq!(e('∼'), [0, 0]);
        assert_eq!(e('∧'), [1, -1]);
        assert_eq!(e('>'), [2, -2]);
        assert_eq!(e('0'), [-1, 1]);
        assert_eq!(e('1'), [-1, 1]);
        assert_eq!(ht.start_embedding(), Some(&[1, -1][..]));
    }

    #[test]
    fn boolexp_paper_words() {
        let ht = build_boolexp(&BOOLEXP2_OPS).unwrap();
        for (w, ok) in [("∧∼01", true), ("∼10", false), ("0", true), ("0∼", false), ("", false)] {
            let w = ht.alphabet().encode(w).unwrap();
            assert_eq!(ht.accepts::<Rational64>(&w).unwrap(), ok, "{w:?}");
        }
        let ht = build_boolexp(&BOOLEXP3_OPS).unwrap();
        // The counter returns to zero twice; only the first may end the word.
        let w = ht.alphabet().encode("0+0").unwrap();
        assert!(!ht.accepts::<Rational64>(&w).unwrap());
    }

    #[test]
    fn rcl_shuffle2_and_dyck() {
        let m = shuffle_stateless_machine(2).unwrap();
        let ht = build_rcl(&m).unwrap();
        assert_eq!(ht.d_model(), 2 * 2 + 4);
        for (w, ok) in [("([)]", true), ("])[(", false), ("", true)] {
            let w = ht.alphabet().encode(w).unwrap();
            assert_eq!(ht.accepts::<Rational64>(&w).unwrap(), ok);
            assert_eq!(m.accepts(&w).unwrap(), ok);
        }
        let d = shuffle_stateless_machine(1).unwrap();
        let ht = build_rcl(&d).unwrap();
        assert!(ht.accepts::<Rational64>(&[0, 1]).unwrap());
    }

    #[test]
    fn rcl_zero_increment_gives_zero_value_block() {
        let m = StatelessCounterMachine::new(
            Alphabet::new(['a', 'b']),
            &["q"],
            0,
            vec![vec![1], vec![0]],
            vec![0, 0],
            vec![(0, 0)],
        )
        .unwrap();
        let ht = build_rcl(&m).unwrap();
        assert_eq!(ht.value_vector(1)[..2], [0, 0]);
        assert_eq!(ht.value_vector(0)[..2], [1, -1]);
    }

    #[test]
    fn streaming_matches_full_run() {
        let hts = [
            build_shuffle_dyck(2).unwrap(),
            build_boolexp(&BOOLEXP3_OPS).unwrap(),
            build_rcl(&shuffle_stateless_machine(2).unwrap()).unwrap(),
        ];
        let mut rng = crate::rng::stream(3, 0);
        use rand::Rng;
        for ht in &hts {
            for _ in 0..200 {
                let n = rng.gen_range(0..12);
                let w: Vec<usize> = (0..n).map(|_| rng.gen_range(0..ht.alphabet().len())).collect();
                let mut runner = HandRunner::<Rational64>::new(ht).unwrap();
                for &s in &w {
                    runner.step(s).unwrap();
                }
                assert_eq!(runner.accepted(), ht.accepts::<Rational64>(&w).unwrap());
                assert_eq!(ht.accepts::<f64>(&w).unwrap(), ht.accepts::<Rational64>(&w).unwrap());
            }
        }
    }

    #[test]
    fn depth_ratio_identity() {
        let ht = build_shuffle_dyck(1).unwrap();
        let w = ht.alphabet().encode("[[][]]][[[").unwrap();
        let t = ht.run::<Rational64>(&w).unwrap();
        let mut depth = 0i64;
        for (i, &s) in w.iter().enumerate() {
            depth += if s == 0 { 1 } else { -1 };
            assert_eq!(t.attention_output[i][0] * Rational64::from_integer(i as i64 + 1), r(depth, 1));
            let row_sum: Rational64 = t.attention[i].iter().sum();
            assert_eq!(row_sum, r(1, 1));
        }
    }

    #[test]
    fn nonzero_keys_are_rejected_in_exact_mode() {
        let mut ht = build_shuffle_dyck(1).unwrap();
        ht.set_key(identity(2)).unwrap();
        assert!(ht.run::<Rational64>(&[0, 1]).is_err());
        let t = ht.run::<f64>(&[0, 1]).unwrap();
        assert!((t.attention[1].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(HandRunner::<f64>::new(&ht).is_err());
    }
}
