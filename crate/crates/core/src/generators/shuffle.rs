//! The shuffle (interleaving) operation on words.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

/// All interleavings of `u` and `v`:
/// `u || ε = ε || u = {u}`, `αu || βv = α(u || βv) ∪ β(αu || v)`.
pub fn shuffle_words(u: &str, v: &str) -> BTreeSet<String> {
    let u: Vec<char> = u.chars().collect();
    let v: Vec<char> = v.chars().collect();
    let mut out = BTreeSet::new();
    let mut buf = String::new();
    interleave_all(&u, &v, &mut buf, &mut out);
    out
}

fn interleave_all(u: &[char], v: &[char], buf: &mut String, out: &mut BTreeSet<String>) {
    if u.is_empty() || v.is_empty() {
        let mut w = buf.clone();
        w.extend(u.iter().chain(v));
        out.insert(w);
        return;
    }
    for (head, rest_u, rest_v) in [(u[0], &u[1..], v), (v[0], u, &v[1..])] {
        buf.push(head);
        interleave_all(rest_u, rest_v, buf, out);
        buf.pop();
    }
}

/// A uniformly random interleaving of `words` (uniform over the choice of
/// which positions each word occupies).
pub fn random_interleaving<T: Copy, R: Rng + ?Sized>(words: &[Vec<T>], rng: &mut R) -> Vec<T> {
    let mut owners: Vec<usize> = words
        .iter()
        .enumerate()
        .flat_map(|(i, w)| std::iter::repeat(i).take(w.len()))
        .collect();
    owners.shuffle(rng);
    let mut cursors = vec![0usize; words.len()];
    owners
        .into_iter()
        .map(|i| {
            let c = words[i][cursors[i]];
            cursors[i] += 1;
            c
        })
        .collect()
}
