use std::collections::HashMap;

use super::{LatticeCarrier, LatticeError, Result};
use crate::ffmat::{FieldPrime, Subspace};

/// Explicit finite lattice with precomputed operation tables.
///
/// Elements are indices `0..len()`.
#[derive(Clone, Debug)]
pub struct TableLattice {
    labels: Vec<String>,
    leq: Vec<bool>,
    join: Vec<u32>,
    meet: Vec<u32>,
    bottom: usize,
    top: usize,
    complement: Option<Vec<u32>>,
}

impl TableLattice {
    /// Builds a lattice from a partial order, computing joins and meets by scan.
    pub fn from_order(labels: Vec<String>, leq: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(LatticeError::NotALattice("empty carrier".into()));
        }
        let mut rel = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                rel[a * n + b] = leq(a, b);
            }
        }
        for a in 0..n {
            if !rel[a * n + a] {
                return Err(LatticeError::NotALattice(format!("{} not reflexive", labels[a])));
            }
            for b in 0..n {
                if a != b && rel[a * n + b] && rel[b * n + a] {
                    return Err(LatticeError::NotALattice(format!(
                        "{} and {} are mutually below each other",
                        labels[a], labels[b]
                    )));
                }
                for c in 0..n {
                    if rel[a * n + b] && rel[b * n + c] && !rel[a * n + c] {
                        return Err(LatticeError::NotALattice("order is not transitive".into()));
                    }
                }
            }
        }
        let mut join = vec![0u32; n * n];
        let mut meet = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                let ub: Vec<usize> =
                    (0..n).filter(|&c| rel[a * n + c] && rel[b * n + c]).collect();
                let lub = ub.iter().copied().find(|&c| ub.iter().all(|&d| rel[c * n + d]));
                let lb: Vec<usize> =
                    (0..n).filter(|&c| rel[c * n + a] && rel[c * n + b]).collect();
                let glb = lb.iter().copied().find(|&c| lb.iter().all(|&d| rel[d * n + c]));
                match (lub, glb) {
                    (Some(j), Some(m)) => {
                        join[a * n + b] = j as u32;
                        meet[a * n + b] = m as u32;
                    }
                    _ => {
                        return Err(LatticeError::NotALattice(format!(
                            "{} and {} lack a join or meet",
                            labels[a], labels[b]
                        )))
                    }
                }
            }
        }
        let bottom = (0..n).find(|&a| (0..n).all(|b| rel[a * n + b])).unwrap();
        let top = (0..n).find(|&a| (0..n).all(|b| rel[b * n + a])).unwrap();
        Ok(TableLattice { labels, leq: rel, join, meet, bottom, top, complement: None })
    }

    /// Tabulates an enumerable carrier. Returns the table and the element list.
    pub fn from_carrier<L: LatticeCarrier>(l: &L, cap: u128) -> Result<(Self, Vec<L::Elem>)> {
        let elems = l.elements(cap)?;
        let n = elems.len();
        let index: HashMap<&L::Elem, usize> = elems.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let mut join = vec![0u32; n * n];
        let mut meet = vec![0u32; n * n];
        let mut leq = vec![false; n * n];
        for a in 0..n {
            for b in a..n {
                let j = index[&l.join(&elems[a], &elems[b])] as u32;
                let m = index[&l.meet(&elems[a], &elems[b])] as u32;
                join[a * n + b] = j;
                join[b * n + a] = j;
                meet[a * n + b] = m;
                meet[b * n + a] = m;
                leq[a * n + b] = m as usize == a;
                leq[b * n + a] = m as usize == b;
            }
        }
        let bottom = index[&l.bottom()];
        let top = index[&l.top()];
        let labels = elems.iter().map(|e| format!("{e:?}")).collect();
        Ok((TableLattice { labels, leq, join, meet, bottom, top, complement: None }, elems))
    }

    /// Attaches an orthocomplementation; checked to be an order-reversing
    /// involution producing complements.
    pub fn with_complement(mut self, comp: Vec<usize>) -> Result<Self> {
        let n = self.len();
        if comp.len() != n || comp.iter().any(|&c| c >= n) {
            return Err(LatticeError::NotALattice("complement table has wrong size".into()));
        }
        for a in 0..n {
            if comp[comp[a]] != a {
                return Err(LatticeError::NotALattice("complement is not an involution".into()));
            }
            if self.join(&a, &comp[a]) != self.top || self.meet(&a, &comp[a]) != self.bottom {
                return Err(LatticeError::NotALattice(format!(
                    "{} is not complemented by {}",
                    self.labels[a], self.labels[comp[a]]
                )));
            }
            for b in 0..n {
                if self.leq(&a, &b) && !self.leq(&comp[b], &comp[a]) {
                    return Err(LatticeError::NotALattice("complement is not antitone".into()));
                }
            }
        }
        self.complement = Some(comp.into_iter().map(|c| c as u32).collect());
        Ok(self)
    }

    /// The height-2 modular ortholattice with `k` pairs of complementary atoms.
    pub fn mo(k: usize) -> Self {
        let mut labels = vec!["0".to_string(), "1".to_string()];
        for i in 1..=k {
            labels.push(format!("a{i}"));
            labels.push(format!("a{i}'"));
        }
        let l = TableLattice::from_order(labels, |a, b| a == b || a == 0 || b == 1)
            .expect("MO_k is a lattice");
        let mut comp = vec![1, 0];
        for i in 0..k {
            comp.push(2 * i + 3);
            comp.push(2 * i + 2);
        }
        l.with_complement(comp).expect("MO_k is an ortholattice")
    }

    /// The Boolean lattice of subsets of an `atoms`-element set, with set
    /// complement. Element `i` is the subset with bitmask `i`.
    pub fn boolean(atoms: u32) -> Self {
        let n = 1usize << atoms;
        let labels = (0..n).map(|i| format!("{i:0w$b}", w = atoms as usize)).collect();
        let l = TableLattice::from_order(labels, |a, b| a & b == a).expect("Boolean lattice");
        l.with_complement((0..n).map(|i| !i & (n - 1)).collect()).expect("Boolean complement")
    }

    /// The chain 0 < 1 < ... < n-1.
    pub fn chain(n: usize) -> Self {
        TableLattice::from_order((0..n).map(|i| i.to_string()).collect(), |a, b| a <= b)
            .expect("chain")
    }

    /// The pentagon N5 (non-modular).
    pub fn n5() -> Self {
        // 0 < a < b < 1, 0 < c < 1
        let labels = ["0", "a", "b", "c", "1"].map(String::from).to_vec();
        let below = |x: usize, y: usize| {
            x == y || x == 0 || y == 4 || (x == 1 && y == 2)
        };
        TableLattice::from_order(labels, below).expect("N5")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn complement(&self, a: usize) -> Option<usize> {
        self.complement.as_ref().map(|c| c[a] as usize)
    }

    pub fn has_complement(&self) -> bool {
        self.complement.is_some()
    }

    #[inline]
    pub fn join_idx(&self, a: usize, b: usize) -> usize {
        self.join[a * self.labels.len() + b] as usize
    }

    #[inline]
    pub fn meet_idx(&self, a: usize, b: usize) -> usize {
        self.meet[a * self.labels.len() + b] as usize
    }

    #[inline]
    pub fn leq_idx(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.labels.len() + b]
    }

    pub fn bottom_idx(&self) -> usize {
        self.bottom
    }

    pub fn top_idx(&self) -> usize {
        self.top
    }

    /// Modular law on every triple.
    pub fn is_modular(&self) -> bool {
        let n = self.len();
        (0..n).all(|a| {
            (0..n).all(|b| {
                !self.leq_idx(b, a)
                    || (0..n).all(|c| {
                        self.meet_idx(a, self.join_idx(b, c)) == self.join_idx(b, self.meet_idx(a, c))
                    })
            })
        })
    }
}

impl LatticeCarrier for TableLattice {
    type Elem = usize;

    fn join(&self, a: &usize, b: &usize) -> usize {
        self.join_idx(*a, *b)
    }
    fn meet(&self, a: &usize, b: &usize) -> usize {
        self.meet_idx(*a, *b)
    }
    fn bottom(&self) -> usize {
        self.bottom
    }
    fn top(&self) -> usize {
        self.top
    }
    fn leq(&self, a: &usize, b: &usize) -> bool {
        self.leq_idx(*a, *b)
    }
    fn cardinality(&self) -> u128 {
        self.len() as u128
    }
    fn elements(&self, cap: u128) -> Result<Vec<usize>> {
        if self.len() as u128 > cap {
            return Err(LatticeError::CapExceeded { count: self.len() as u128, cap });
        }
        Ok((0..self.len()).collect())
    }
}

/// Subspace lattice tabulated for fast search, with the index map back to
/// subspaces.
#[derive(Clone, Debug)]
pub struct IndexedSubspaces {
    pub p: FieldPrime,
    pub n: usize,
    pub table: TableLattice,
    pub elems: Vec<Subspace>,
    index: HashMap<Subspace, usize>,
}

impl IndexedSubspaces {
    pub fn new(p: FieldPrime, n: usize, cap: u128) -> Result<Self> {
        let carrier = super::SubspaceLattice::new(p, n);
        let (table, elems) = TableLattice::from_carrier(&carrier, cap)?;
        let index = elems.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        Ok(IndexedSubspaces { p, n, table, elems, index })
    }

    pub fn index_of(&self, u: &Subspace) -> Option<usize> {
        self.index.get(u).copied()
    }

    pub fn subspace(&self, i: usize) -> &Subspace {
        &self.elems[i]
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mo_and_boolean_shapes() {
        let mo2 = TableLattice::mo(2);
        assert_eq!(mo2.len(), 6);
        assert!(mo2.is_modular());
        assert_eq!(mo2.join_idx(2, 4), 1);
        assert_eq!(mo2.meet_idx(2, 4), 0);
        assert_eq!(mo2.complement(2), Some(3));
        let b = TableLattice::boolean(2);
        assert_eq!(b.len(), 4);
        assert_eq!(b.join_idx(1, 2), 3);
        assert_eq!(b.complement(1), Some(2));
        assert!(!TableLattice::n5().is_modular());
    }

    #[test]
    fn rejects_non_lattices() {
        // two incomparable maximal elements
        let labels = ["0", "a", "b"].map(String::from).to_vec();
        assert!(TableLattice::from_order(labels, |x, y| x == y || x == 0).is_err());
        let bad = TableLattice::chain(3).with_complement(vec![2, 1, 0]);
        assert!(bad.is_err());
    }

    #[test]
    fn indexed_subspaces_agree_with_direct_ops() {
        let p = FieldPrime::new(2).unwrap();
        let idx = IndexedSubspaces::new(p, 3, 1000).unwrap();
        assert_eq!(idx.len(), 16);
        assert!(idx.table.is_modular());
        for a in 0..idx.len() {
            for b in 0..idx.len() {
                let s = idx.elems[a].sum(&idx.elems[b]).unwrap();
                assert_eq!(idx.index_of(&s), Some(idx.table.join_idx(a, b)));
            }
        }
        assert!(idx.elems[idx.table.bottom_idx()].is_zero());
        assert!(idx.elems[idx.table.top_idx()].is_full());
    }
}
