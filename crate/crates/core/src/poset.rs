//! Partial orders on finite ground sets and on the real line.
//!
//! A [`FinitePoset`] stores the full relation matrix and is validated at
//! construction (reflexive, antisymmetric, transitive). Up-sets — subsets
//! closed under moving upward — are the extreme test sets for stochastic
//! dominance and the order-Kolmogorov distance, so the type carries fast
//! membership tests and a guarded exhaustive enumeration.

use crate::{Error, Result};

/// Largest ground set for which exhaustive up-set enumeration is allowed.
pub const MAX_ENUM_STATES: usize = 20;

/// A finite partially ordered ground set with an explicit relation matrix.
///
/// `leq(i, j)` is the truth of `state_i ⪯ state_j`. The *order graph* is the
/// set of index pairs `(i, j)` with `leq(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePoset {
    labels: Vec<String>,
    n: usize,
    // row-major n*n
    leq: Vec<bool>,
}

impl FinitePoset {
    /// Build a poset from labels and an `n x n` relation matrix, validating
    /// reflexivity, antisymmetry and transitivity. The transitivity check is
    /// cubic in `n`, which is acceptable for the exact-mode sizes this crate
    /// targets.
    pub fn new(labels: Vec<String>, matrix: &[Vec<bool>]) -> Result<Self> {
        let n = labels.len();
        if matrix.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: matrix.len(),
            });
        }
        let mut leq = vec![false; n * n];
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            leq[i * n..(i + 1) * n].copy_from_slice(row);
        }
        let poset = FinitePoset { labels, n, leq };
        poset.check_axioms()?;
        Ok(poset)
    }

    /// Poset with default labels `s0..s{n-1}` from a relation closure.
    pub fn from_fn(n: usize, rel: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let labels = (0..n).map(|i| format!("s{i}")).collect::<Vec<_>>();
        let matrix: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..n).map(|j| rel(i, j)).collect())
            .collect();
        Self::new(labels, &matrix)
    }

    /// The identity order: `x ⪯ y` iff `x = y`. Under this order every
    /// subset is an up-set and the order-Kolmogorov distance collapses to
    /// total variation.
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| i == j).expect("identity order is always valid")
    }

    /// The total order `0 < 1 < ... < n-1` on the index set.
    pub fn chain(n: usize) -> Self {
        Self::from_fn(n, |i, j| i <= j).expect("chain order is always valid")
    }

    fn check_axioms(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if !self.leq[i * n + i] {
                return Err(Error::InvalidOrder(format!(
                    "not reflexive at state {} (`{}`)",
                    i, self.labels[i]
                )));
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && self.leq[i * n + j] && self.leq[j * n + i] {
                    return Err(Error::InvalidOrder(format!(
                        "not antisymmetric: {} <= {} and {} <= {}",
                        i, j, j, i
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if !self.leq[i * n + j] {
                    continue;
                }
                for k in 0..n {
                    if self.leq[j * n + k] && !self.leq[i * n + k] {
                        return Err(Error::InvalidOrder(format!(
                            "not transitive: {} <= {} <= {} but not {} <= {}",
                            i, j, k, i, k
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Index of a state label.
    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownState(label.to_string()))
    }

    /// Truth of `state_i ⪯ state_j`.
    #[inline]
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i * self.n + j]
    }

    /// Relation lookup by label; unknown labels are a domain error.
    pub fn leq_by_label(&self, a: &str, b: &str) -> Result<bool> {
        Ok(self.leq(self.index_of(a)?, self.index_of(b)?))
    }

    /// All related index pairs `(i, j)` with `i ⪯ j` (the order graph).
    pub fn related_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n)
            .flat_map(move |i| (0..self.n).map(move |j| (i, j)))
            .filter(move |&(i, j)| self.leq(i, j))
    }

    /// Upward closure of `{i}` as a bitmask (requires `n <= 64`).
    fn up_mask(&self, i: usize) -> u64 {
        debug_assert!(self.n <= 64);
        let mut m = 0u64;
        for j in 0..self.n {
            if self.leq(i, j) {
                m |= 1 << j;
            }
        }
        m
    }

    /// Whether the bitmask subset is an up-set (requires `n <= 64`).
    pub fn is_up_set_mask(&self, set: u64) -> bool {
        assert!(self.n <= 64, "bitmask subsets require n <= 64");
        for i in 0..self.n {
            if set >> i & 1 == 1 && self.up_mask(i) & !set != 0 {
                return false;
            }
        }
        true
    }

    /// Whether the membership vector describes an up-set: `i` in the set and
    /// `i ⪯ j` forces `j` in the set.
    pub fn is_up_set(&self, members: &[bool]) -> Result<bool> {
        if members.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: members.len(),
            });
        }
        for i in 0..self.n {
            if !members[i] {
                continue;
            }
            for j in 0..self.n {
                if self.leq(i, j) && !members[j] {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Exhaustively enumerate all up-sets as bitmasks. Guarded at
    /// [`MAX_ENUM_STATES`] states; larger instances must use the min-cut
    /// path instead.
    pub fn enumerate_up_sets(&self) -> Result<Vec<u64>> {
        if self.n > MAX_ENUM_STATES {
            return Err(Error::CapacityExceeded {
                what: "up-set enumeration",
                limit_desc: format!("at most {MAX_ENUM_STATES} states"),
                got: self.n,
                hint: "use the min-cut formulation (dominance/distance routines switch automatically)",
            });
        }
        let ups: Vec<u64> = (0..self.n).map(|i| self.up_mask(i)).collect();
        let mut out = Vec::new();
        'outer: for set in 0u64..(1 << self.n) {
            for (i, up) in ups.iter().enumerate() {
                if set >> i & 1 == 1 && up & !set != 0 {
                    continue 'outer;
                }
            }
            out.push(set);
        }
        Ok(out)
    }

    /// Probability mass a weight vector assigns to a bitmask subset.
    pub(crate) fn mask_mass(&self, weights: &[f64], set: u64) -> f64 {
        let mut total = 0.0;
        for (i, w) in weights.iter().enumerate() {
            if set >> i & 1 == 1 {
                total += w;
            }
        }
        total
    }
}

/// Orders on real scalars and real vectors.
///
/// `Identity` relates only equal points, `TotalReal` is the usual order on
/// the real line, and `ProductReal(k)` compares `k`-vectors componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderKind {
    Identity,
    TotalReal,
    ProductReal(usize),
}

impl OrderKind {
    /// Relation on real vectors. Scalars are length-1 slices.
    pub fn leq(&self, x: &[f64], y: &[f64]) -> Result<bool> {
        let expect = match self {
            OrderKind::Identity | OrderKind::TotalReal => {
                if x.len() != y.len() {
                    return Err(Error::DimensionMismatch {
                        expected: x.len(),
                        got: y.len(),
                    });
                }
                x.len()
            }
            OrderKind::ProductReal(k) => *k,
        };
        if x.len() != expect || y.len() != expect {
            return Err(Error::DimensionMismatch {
                expected: expect,
                got: if x.len() != expect { x.len() } else { y.len() },
            });
        }
        Ok(match self {
            OrderKind::Identity => x == y,
            OrderKind::TotalReal | OrderKind::ProductReal(_) => {
                x.iter().zip(y).all(|(a, b)| a <= b)
            }
        })
    }

    /// Scalar convenience form of [`OrderKind::leq`].
    pub fn leq_scalar(&self, x: f64, y: f64) -> bool {
        match self {
            OrderKind::Identity => x == y,
            OrderKind::TotalReal | OrderKind::ProductReal(_) => x <= y,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_is_valid_and_orders() {
        let p = FinitePoset::chain(3);
        assert!(p.leq(0, 2));
        assert!(!p.leq(2, 0));
        assert!(p.leq(1, 1));
        assert_eq!(p.related_pairs().count(), 6);
    }

    #[test]
    fn label_lookup_and_unknown_label() {
        let p = FinitePoset::new(
            vec!["lo".into(), "hi".into()],
            &[vec![true, true], vec![false, true]],
        )
        .unwrap();
        assert!(p.leq_by_label("lo", "hi").unwrap());
        assert!(!p.leq_by_label("hi", "lo").unwrap());
        assert!(matches!(
            p.leq_by_label("hi", "nope"),
            Err(Error::UnknownState(_))
        ));
    }

    #[test]
    fn constructor_rejects_each_axiom_violation() {
        // not reflexive
        let r = FinitePoset::from_fn(2, |i, j| i == j && i != 0);
        assert!(matches!(r, Err(Error::InvalidOrder(msg)) if msg.contains("reflexive")));
        // not antisymmetric
        let r = FinitePoset::from_fn(2, |_, _| true);
        assert!(matches!(r, Err(Error::InvalidOrder(msg)) if msg.contains("antisymmetric")));
        // not transitive: 0<=1, 1<=2, but not 0<=2
        let r = FinitePoset::from_fn(3, |i, j| i == j || (i == 0 && j == 1) || (i == 1 && j == 2));
        assert!(matches!(r, Err(Error::InvalidOrder(msg)) if msg.contains("transitive")));
    }

    #[test]
    fn up_sets_of_chain_are_tails() {
        let p = FinitePoset::chain(4);
        let ups = p.enumerate_up_sets().unwrap();
        assert_eq!(ups.len(), 5);
        for set in &ups {
            // a tail: membership is monotone in the index
            let members: Vec<bool> = (0..4).map(|i| set >> i & 1 == 1).collect();
            for w in members.windows(2) {
                assert!(!w[0] || w[1]);
            }
        }
    }

    #[test]
    fn up_sets_of_antichain_are_all_subsets() {
        let p = FinitePoset::identity(4);
        assert_eq!(p.enumerate_up_sets().unwrap().len(), 16);
        for set in 0u64..16 {
            assert!(p.is_up_set_mask(set));
        }
    }

    #[test]
    fn two_element_chain_up_sets() {
        let p = FinitePoset::chain(2);
        let ups = p.enumerate_up_sets().unwrap();
        assert_eq!(ups, vec![0b00, 0b10, 0b11]);
    }

    #[test]
    fn up_set_examples_on_chain() {
        let p = FinitePoset::chain(3);
        assert!(p.is_up_set(&[false, false, false]).unwrap());
        assert!(p.is_up_set(&[true, true, true]).unwrap());
        assert!(p.is_up_set(&[false, true, true]).unwrap());
        assert!(!p.is_up_set(&[false, true, false]).unwrap());
    }

    #[test]
    fn up_set_family_is_a_lattice() {
        // closed under union and intersection
        let p = FinitePoset::from_fn(4, |i, j| i == j || (i == 0 && j > 0) || (i == 1 && j == 3))
            .unwrap();
        let ups = p.enumerate_up_sets().unwrap();
        let family: std::collections::HashSet<u64> = ups.iter().copied().collect();
        for &a in &ups {
            for &b in &ups {
                assert!(family.contains(&(a | b)));
                assert!(family.contains(&(a & b)));
            }
        }
    }

    #[test]
    fn enumeration_guard() {
        let p = FinitePoset::identity(21);
        assert!(matches!(
            p.enumerate_up_sets(),
            Err(Error::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn order_kind_examples() {
        let id = OrderKind::Identity;
        assert!(id.leq(&[3.0], &[3.0]).unwrap());
        assert!(!id.leq(&[3.0], &[4.0]).unwrap());
        let prod = OrderKind::ProductReal(2);
        assert!(prod.leq(&[1.0, 2.0], &[2.0, 3.0]).unwrap());
        assert!(!prod.leq(&[1.0, 5.0], &[2.0, 3.0]).unwrap());
        assert!(matches!(
            prod.leq(&[1.0], &[2.0, 3.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(OrderKind::TotalReal.leq_scalar(1.5, 1.5));
    }
}
