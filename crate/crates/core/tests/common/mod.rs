//! Reference implementations used only by the tests. They share no code
//! with the library beyond its plain data types: subspaces are explicit
//! sets of vectors, matrices are nested vectors.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use modcon::ffmat::{FieldPrime, Matrix, Subspace};
use modcon::lattice::LatticeTerm;

pub fn gf(p: u32) -> FieldPrime {
    FieldPrime::new(p).unwrap()
}

/// Vector of GF(p)^n <-> integer with coordinate 0 most significant.
pub fn encode(p: u32, v: &[u32]) -> usize {
    v.iter().fold(0usize, |acc, &c| acc * p as usize + c as usize)
}

pub fn decode(p: u32, n: usize, mut i: usize) -> Vec<u32> {
    let mut v = vec![0; n];
    for k in (0..n).rev() {
        v[k] = (i % p as usize) as u32;
        i /= p as usize;
    }
    v
}

/// A subspace as the explicit set of its vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VecSet {
    pub p: u32,
    pub n: usize,
    pub pts: BTreeSet<usize>,
}

impl VecSet {
    pub fn zero(p: u32, n: usize) -> Self {
        VecSet { p, n, pts: [0].into_iter().collect() }
    }

    /// All linear combinations of the given vectors.
    pub fn span(p: u32, n: usize, gens: &[Vec<u32>]) -> Self {
        let mut pts: BTreeSet<usize> = [0].into_iter().collect();
        for g in gens {
            let mut next = BTreeSet::new();
            for &x in &pts {
                let xv = decode(p, n, x);
                for c in 0..p {
                    let y: Vec<u32> = xv.iter().zip(g).map(|(a, b)| (a + c * b) % p).collect();
                    next.insert(encode(p, &y));
                }
            }
            pts = next;
        }
        VecSet { p, n, pts }
    }

    pub fn of(u: &Subspace) -> Self {
        let b = u.basis();
        let rows: Vec<Vec<u32>> = (0..b.rows()).map(|r| b.row(r).to_vec()).collect();
        VecSet::span(u.field().get(), u.ambient_dim(), &rows)
    }

    pub fn join(&self, o: &VecSet) -> VecSet {
        let gens: Vec<Vec<u32>> = self.pts.iter().chain(&o.pts).map(|&i| decode(self.p, self.n, i)).collect();
        VecSet::span(self.p, self.n, &gens)
    }

    pub fn meet(&self, o: &VecSet) -> VecSet {
        VecSet { p: self.p, n: self.n, pts: self.pts.intersection(&o.pts).copied().collect() }
    }

    pub fn dim(&self) -> usize {
        let mut d = 0;
        let mut s = 1;
        while s < self.pts.len() {
            s *= self.p as usize;
            d += 1;
        }
        d
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        self.pts.contains(&encode(self.p, v))
    }
}

/// Every subspace of GF(p)^n, by closing spans of single vectors under joins.
pub fn all_vecsets(p: u32, n: usize) -> Vec<VecSet> {
    let total = (p as usize).pow(n as u32);
    let mut seen: BTreeSet<VecSet> = BTreeSet::new();
    seen.insert(VecSet::zero(p, n));
    let lines: Vec<VecSet> = (1..total).map(|i| VecSet::span(p, n, &[decode(p, n, i)])).collect();
    let mut frontier: Vec<VecSet> = vec![VecSet::zero(p, n)];
    while let Some(u) = frontier.pop() {
        for l in &lines {
            let w = u.join(l);
            if seen.insert(w.clone()) {
                frontier.push(w);
            }
        }
    }
    seen.into_iter().collect()
}

/// Gaussian binomial count of all subspaces of GF(p)^n.
pub fn subspace_count(p: u64, n: u32) -> u64 {
    (0..=n)
        .map(|k| {
            let mut num = 1u64;
            let mut den = 1u64;
            for i in 0..k {
                num *= p.pow(n - i) - 1;
                den *= p.pow(i + 1) - 1;
            }
            num / den
        })
        .sum()
}

pub fn gl_order(d: u32, p: u64) -> u64 {
    (0..d).map(|i| p.pow(d) - p.pow(i)).product()
}

// ---------------------------------------------------------------------------
// matrices as nested vectors

pub type M = Vec<Vec<u32>>;

pub fn to_m(a: &Matrix) -> M {
    a.to_rows()
}

pub fn mmul(p: u32, a: &M, b: &M) -> M {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0; m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut s = 0u64;
            for t in 0..k {
                s += a[i][t] as u64 * b[t][j] as u64;
            }
            out[i][j] = (s % p as u64) as u32;
        }
    }
    out
}

pub fn all_matrices(p: u32, d: usize) -> Vec<M> {
    let cells = d * d;
    (0..(p as usize).pow(cells as u32))
        .map(|i| {
            let v = decode(p, cells, i);
            v.chunks(d).map(|r| r.to_vec()).collect()
        })
        .collect()
}

pub fn naive_idempotents(p: u32, d: usize) -> Vec<M> {
    all_matrices(p, d).into_iter().filter(|e| mmul(p, e, e) == *e).collect()
}

pub fn colset(p: u32, a: &M) -> VecSet {
    let n = a.len();
    let cols: Vec<Vec<u32>> = (0..a[0].len()).map(|j| (0..n).map(|i| a[i][j]).collect()).collect();
    VecSet::span(p, n, &cols)
}

pub fn apply(p: u32, a: &M, v: &[u32]) -> Vec<u32> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum::<u32>() % p).collect()
}

pub fn common_fixed_nonzero(p: u32, gens: &[M]) -> bool {
    let n = gens[0].len();
    (1..(p as usize).pow(n as u32)).any(|i| {
        let v = decode(p, n, i);
        gens.iter().all(|g| apply(p, g, &v) == v)
    })
}

pub fn matrix(p: u32, m: &M) -> Matrix {
    let rows: Vec<Vec<i64>> = m.iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect();
    Matrix::from_rows(gf(p), &rows).unwrap()
}

// ---------------------------------------------------------------------------
// naive lattice evaluation over vector sets

pub fn eval_vs(t: &LatticeTerm, asg: &BTreeMap<String, VecSet>, p: u32, n: usize) -> VecSet {
    match t {
        LatticeTerm::Var { name } => asg[name].clone(),
        LatticeTerm::Const0 => VecSet::zero(p, n),
        LatticeTerm::Const1 => VecSet { p, n, pts: (0..(p as usize).pow(n as u32)).collect() },
        LatticeTerm::Join { left, right } => eval_vs(left, asg, p, n).join(&eval_vs(right, asg, p, n)),
        LatticeTerm::Meet { left, right } => eval_vs(left, asg, p, n).meet(&eval_vs(right, asg, p, n)),
    }
}

/// All assignments of `vars` over `elems` (odometer order).
pub fn assignments<T: Clone>(vars: &[String], elems: &[T]) -> Vec<BTreeMap<String, T>> {
    let mut out = vec![BTreeMap::new()];
    for v in vars {
        let mut next = Vec::with_capacity(out.len() * elems.len());
        for a in &out {
            for e in elems {
                let mut b = a.clone();
                b.insert(v.clone(), e.clone());
                next.push(b);
            }
        }
        out = next;
    }
    out
}

// ---------------------------------------------------------------------------
// random lattice terms

pub fn random_term(rng: &mut impl rand::Rng, vars: &[&str], depth: u32) -> LatticeTerm {
    if depth == 0 || rng.random_range(0..3) == 0 {
        return match rng.random_range(0..10) {
            0 => LatticeTerm::Const0,
            1 => LatticeTerm::Const1,
            _ => LatticeTerm::var(vars[rng.random_range(0..vars.len())]),
        };
    }
    let a = random_term(rng, vars, depth - 1);
    let b = random_term(rng, vars, depth - 1);
    if rng.random_bool(0.5) {
        a + b
    } else {
        a & b
    }
}

pub fn random_conjunction(
    rng: &mut impl rand::Rng,
    vars: &[&str],
    max_eqs: usize,
    depth: u32,
) -> modcon::lattice::LatticeConjunction {
    let mut c = modcon::lattice::LatticeConjunction::default();
    for _ in 0..rng.random_range(1..=max_eqs) {
        c.push(random_term(rng, vars, depth), random_term(rng, vars, depth));
    }
    c
}

/// Rank by plain Gaussian elimination.
pub fn naive_rank(p: u32, m: &M) -> usize {
    let mut a = m.clone();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let inv = |x: u32| (1..p).find(|y| x * y % p == 1).unwrap();
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows).find(|&i| a[i][c] != 0) else { continue };
        a.swap(r, piv);
        let k = inv(a[r][c]);
        for x in a[r].iter_mut() {
            *x = *x * k % p;
        }
        for i in 0..rows {
            if i != r && a[i][c] != 0 {
                let f = a[i][c];
                for j in 0..cols {
                    a[i][j] = (a[i][j] + p * p - f * a[r][j] % p) % p;
                }
            }
        }
        r += 1;
    }
    r
}

// ---------------------------------------------------------------------------
// databases as plain tuple lists

pub fn fd_naive(tuples: &[Vec<u32>], x: &[usize], y: &[usize]) -> bool {
    tuples.iter().all(|s| {
        tuples
            .iter()
            .all(|t| !x.iter().all(|&i| s[i] == t[i]) || y.iter().all(|&i| s[i] == t[i]))
    })
}

pub fn emvd_naive(tuples: &[Vec<u32>], x: &[usize], y: &[usize]) -> bool {
    let guard: Vec<usize> = x.iter().copied().filter(|i| y.contains(i)).collect();
    tuples.iter().all(|t1| {
        tuples.iter().all(|t2| {
            !guard.iter().all(|&i| t1[i] == t2[i])
                || tuples
                    .iter()
                    .any(|t| x.iter().all(|&i| t[i] == t1[i]) && y.iter().all(|&i| t[i] == t2[i]))
        })
    })
}

/// Nonempty subsets of `0..n` as index lists.
pub fn subsets(n: usize) -> Vec<Vec<usize>> {
    (1..1usize << n).map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect()).collect()
}
