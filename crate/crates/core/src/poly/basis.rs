//! Monomial bookkeeping shared by every polynomial of a given `(n, d)`.
//!
//! Affine monomials `x^α` with `|α| <= d` and homogeneous monomials
//! `X_0^{d-|α|} X^α` are in bijection, so both polynomial kinds share one
//! index table. The canonical order is graded lexicographic: total degree
//! ascending, then larger `α_1` first, and so on.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Largest number of affine variables the evaluators support.
pub const MAX_VARS: usize = 7;

#[derive(Debug)]
pub struct MonomialBasis {
    n: usize,
    d: u32,
    /// Flattened affine exponents, `n` entries per monomial.
    exponents: Vec<u32>,
    /// Multinomial `binom(d, (d-|α|, α))` per monomial.
    binom: Vec<f64>,
    /// Graded index -> position in the nested Horner layout.
    nested_pos: Vec<usize>,
    /// `sizes[m][e] = binom(m + e, m)`, number of monomials in `m` variables of degree <= e.
    sizes: Vec<Vec<usize>>,
    lookup: HashMap<Vec<u32>, usize>,
}

impl MonomialBasis {
    /// Fetches the cached basis for `(n, d)`, building it on first use.
    pub fn get(n: usize, d: u32) -> Result<Arc<MonomialBasis>> {
        if n == 0 || n > MAX_VARS {
            return Err(Error::UnsupportedSpace {
                n,
                d,
                reason: "variable count must be in 1..=7",
            });
        }
        if d > 64 {
            return Err(Error::UnsupportedSpace {
                n,
                d,
                reason: "degree must be at most 64",
            });
        }
        type Cache = Mutex<HashMap<(usize, u32), Arc<MonomialBasis>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("basis cache poisoned");
        Ok(guard
            .entry((n, d))
            .or_insert_with(|| Arc::new(MonomialBasis::build(n, d)))
            .clone())
    }

    fn build(n: usize, d: u32) -> MonomialBasis {
        let mut exponents = Vec::new();
        let mut current = vec![0u32; n];
        for k in 0..=d {
            push_degree(&mut exponents, &mut current, 0, k);
        }
        let len = exponents.len() / n;

        let sizes = (0..=n)
            .map(|m| (0..=d as usize).map(|e| binom_usize(m + e, m)).collect())
            .collect::<Vec<Vec<usize>>>();

        let ln_fact_d = ln_gamma(d as f64 + 1.0);
        let mut binom = Vec::with_capacity(len);
        let mut nested_pos = Vec::with_capacity(len);
        let mut lookup = HashMap::with_capacity(len);
        for i in 0..len {
            let alpha = &exponents[i * n..(i + 1) * n];
            let total: u32 = alpha.iter().sum();
            let mut ln = ln_fact_d - ln_gamma((d - total) as f64 + 1.0);
            for &a in alpha {
                ln -= ln_gamma(a as f64 + 1.0);
            }
            let b = multinomial_from_ln(ln);
            binom.push(b);
            nested_pos.push(nested_position(alpha, d, &sizes));
            lookup.insert(alpha.to_vec(), i);
        }

        MonomialBasis {
            n,
            d,
            exponents,
            binom,
            nested_pos,
            sizes,
            lookup,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// `N = binom(n + d, n)`.
    pub fn len(&self) -> usize {
        self.binom.len()
    }

    pub fn is_empty(&self) -> bool {
        self.binom.is_empty()
    }

    /// Affine exponents of monomial `i`.
    pub fn exponents(&self, i: usize) -> &[u32] {
        &self.exponents[i * self.n..(i + 1) * self.n]
    }

    pub fn total_degree(&self, i: usize) -> u32 {
        self.exponents(i).iter().sum()
    }

    pub fn binom(&self, i: usize) -> f64 {
        self.binom[i]
    }

    pub fn binoms(&self) -> &[f64] {
        &self.binom
    }

    pub fn index_of(&self, alpha: &[u32]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    pub(crate) fn nested_position(&self, i: usize) -> usize {
        self.nested_pos[i]
    }

    pub(crate) fn block_size(&self, vars: usize, degree: u32) -> usize {
        self.sizes[vars][degree as usize]
    }
}

fn push_degree(out: &mut Vec<u32>, current: &mut [u32], pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.extend_from_slice(current);
        return;
    }
    for a in (0..=remaining).rev() {
        current[pos] = a;
        push_degree(out, current, pos + 1, remaining - a);
    }
    current[pos] = 0;
}

/// Nested layout: the block for `α_1 = j` holds the layout of the remaining
/// variables with degree bound `d - j`, blocks ordered by `j` ascending.
fn nested_position(alpha: &[u32], d: u32, sizes: &[Vec<usize>]) -> usize {
    let mut pos = 0;
    let mut deg = d;
    for (k, &a) in alpha.iter().enumerate() {
        let rest = alpha.len() - k - 1;
        for j in 0..a {
            pos += sizes[rest][(deg - j) as usize];
        }
        deg -= a;
    }
    pos
}

fn binom_usize(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

fn multinomial_from_ln(ln: f64) -> f64 {
    let v = ln.exp();
    // Integers below 2^52 are exact in f64; snap the log-gamma rounding residue.
    if v < 4.5e15 {
        v.round()
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order_for_two_variables() {
        let b = MonomialBasis::get(2, 2).unwrap();
        let got: Vec<Vec<u32>> = (0..b.len()).map(|i| b.exponents(i).to_vec()).collect();
        assert_eq!(
            got,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
        // binom(2, (α_0, α)): 1, 2, 2, 1, 2, 1
        assert_eq!(b.binoms(), &[1.0, 2.0, 2.0, 1.0, 2.0, 1.0]);
    }

    #[test]
    fn dimension_matches_binomial() {
        for n in 1..=4 {
            for d in 0..=12u32 {
                let b = MonomialBasis::get(n, d).unwrap();
                assert_eq!(b.len(), binom_usize(n + d as usize, n));
            }
        }
    }

    #[test]
    fn nested_positions_are_a_permutation() {
        let b = MonomialBasis::get(3, 5).unwrap();
        let mut seen = vec![false; b.len()];
        for i in 0..b.len() {
            let p = b.nested_position(i);
            assert!(!seen[p]);
            seen[p] = true;
        }
    }

    #[test]
    fn multinomials_stay_exact_at_high_degree() {
        let b = MonomialBasis::get(2, 30).unwrap();
        let i = b.index_of(&[10, 10]).unwrap();
        // 30! / (10!)^3
        assert_eq!(b.binom(i), 5_550_996_791_340.0);
    }

    #[test]
    fn rejects_unsupported_sizes() {
        assert!(MonomialBasis::get(0, 2).is_err());
        assert!(MonomialBasis::get(8, 2).is_err());
    }
}
