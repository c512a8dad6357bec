mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use modcon::database::{self, Database};
use modcon::ffmat::{Matrix, Subspace};
use modcon::formulas::{parse_group_presentation, unnest, FreshNames};
use modcon::groups::{search_sn, GroupPresentation, GroupWord, Perm};
use modcon::lattice::{eval_equation, IndexedSubspaces, LatticeConjunction, SubspaceLattice};
use modcon::matring::RingSystem;
use modcon::oracle::{search_lattice, search_subspace_lattice, Pruning, SearchOptions};
use modcon::reductions::{
    constructive_pipeline, group_to_lattice, lattice_to_relalg, type1_to_deps, LatticeFormula,
    Nontriviality, PipelineArtifact, Stage,
};
use modcon::relalg::{eta, Relation};

fn field() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![2u32, 3, 5])
}

fn square(max: usize) -> impl Strategy<Value = (u32, M, M, M)> {
    (field(), 1..=max).prop_flat_map(|(p, n)| (Just(p), mat(p, n, n), mat(p, n, n), mat(p, n, n)))
}

fn spans(n: usize) -> impl Strategy<Value = (u32, M, M)> {
    field().prop_flat_map(move |p| (Just(p), mat(p, 0..=n, n), mat(p, 0..=n, n)))
}

fn mat(p: u32, rows: impl Into<prop::collection::SizeRange>, c: usize) -> impl Strategy<Value = M> {
    prop::collection::vec(prop::collection::vec(0..p, c), rows)
}

fn sub(p: u32, n: usize, rows: &M) -> Subspace {
    let rows: Vec<Vec<i64>> = rows.iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect();
    Subspace::span(gf(p), n, &rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn matrix_ring_laws((p, a, b, c) in square(4)) {
        let (ma, mb, mc) = (matrix(p, &a), matrix(p, &b), matrix(p, &c));
        let ab = ma.mul(&mb).unwrap();
        prop_assert_eq!(to_m(&ab), mmul(p, &a, &b));
        prop_assert_eq!(ab.mul(&mc).unwrap(), ma.mul(&mb.mul(&mc).unwrap()).unwrap());
        let left = ma.mul(&mb.add(&mc).unwrap()).unwrap();
        prop_assert_eq!(left, ab.add(&ma.mul(&mc).unwrap()).unwrap());
        prop_assert_eq!(ma.rank(), naive_rank(p, &a));
        prop_assert_eq!(ma.transpose().rank(), ma.rank());
    }

    #[test]
    fn inverse_and_quasi_inverse((p, a, _, _) in square(4)) {
        let m = matrix(p, &a);
        let n = a.len();
        match m.inverse() {
            Some(inv) => {
                prop_assert_eq!(naive_rank(p, &a), n);
                prop_assert_eq!(m.mul(&inv).unwrap(), Matrix::identity(gf(p), n));
            }
            None => prop_assert!(naive_rank(p, &a) < n),
        }
        let q = m.quasi_inverse().unwrap();
        prop_assert_eq!(m.mul(&q).unwrap().mul(&m).unwrap(), m);
    }

    #[test]
    fn kernel_and_solve((p, a, b, _) in square(3)) {
        let m = matrix(p, &a);
        let k = m.kernel();
        prop_assert_eq!(k.dim() + m.rank(), a.len());
        for v in VecSet::of(&k).pts {
            prop_assert!(apply(p, &a, &decode(p, a.len(), v)).iter().all(|&x| x == 0));
        }
        let rhs = matrix(p, &b);
        match m.solve(&rhs).unwrap() {
            Some(x) => prop_assert_eq!(m.mul(&x).unwrap(), rhs),
            None => {
                let cols = colset(p, &a);
                let bad = (0..b.len()).any(|j| !cols.contains(&b.iter().map(|r| r[j]).collect::<Vec<_>>()));
                prop_assert!(bad);
            }
        }
    }

    #[test]
    fn subspace_ops_match_vector_sets((p, a, b) in spans(3)) {
        let (u, w) = (sub(p, 3, &a), sub(p, 3, &b));
        let (su, sw) = (VecSet::span(p, 3, &a), VecSet::span(p, 3, &b));
        prop_assert_eq!(VecSet::of(&u), su.clone());
        prop_assert_eq!(VecSet::of(&u.sum(&w).unwrap()), su.join(&sw));
        prop_assert_eq!(VecSet::of(&u.meet(&w).unwrap()), su.meet(&sw));
        prop_assert_eq!(u.sum(&w).unwrap().dim() + u.meet(&w).unwrap().dim(), u.dim() + w.dim());
        prop_assert_eq!(u.is_subspace_of(&w), su.pts.is_subset(&sw.pts));
        let c = u.standard_complement();
        prop_assert!(u.meet(&c).unwrap().is_zero() && u.sum(&c).unwrap().is_full());
    }

    #[test]
    fn subspace_json_round_trip((p, a, _) in spans(4)) {
        let u = sub(p, 4, &a);
        let back: Subspace = serde_json::from_str(&serde_json::to_string(&u).unwrap()).unwrap();
        prop_assert_eq!(back, u);
        let m = matrix(p, &if a.is_empty() { vec![vec![0; 4]] } else { a });
        let back: Matrix = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        prop_assert_eq!(back, m);
    }
}

fn conj_from_seed(seed: u64, vars: &[&str], eqs: usize) -> LatticeConjunction {
    random_conjunction(&mut ChaCha8Rng::seed_from_u64(seed), vars, eqs, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// The search finds a witness exactly when brute force over vector sets does.
    #[test]
    fn lattice_search_is_complete(seed in any::<u64>()) {
        let conj = conj_from_seed(seed, &["x", "y", "w"], 2);
        let vars = conj.vars();
        let subspaces = all_vecsets(2, 2);
        let naive = assignments(&vars, &subspaces).into_iter().any(|a| {
            a.values().any(|v| v.pts.len() > 1)
                && conj.equations.iter().all(|e| eval_vs(&e.lhs, &a, 2, 2) == eval_vs(&e.rhs, &a, 2, 2))
        });
        let lf = LatticeFormula {
            nontriviality: Nontriviality::SomeNonBottom { watch: vars.clone() },
            ..LatticeFormula::plain(conj.clone())
        };
        let r = search_subspace_lattice(&lf, gf(2), 2, &SearchOptions::default()).unwrap();
        prop_assert_eq!(r.outcome.witness().is_some(), naive, "{}", conj);
        if let Some(w) = r.outcome.witness() {
            let l = SubspaceLattice::new(gf(2), 2);
            prop_assert!(conj.equations.iter().all(|e| eval_equation(e, w, &l).unwrap()));
        }
    }

    /// Unnesting is equivalent: the bound variables are determined by the free ones.
    #[test]
    fn unnest_equivalence(seed in any::<u64>()) {
        let conj = conj_from_seed(seed, &["x", "y"], 3);
        let vars = conj.vars();
        let idx = IndexedSubspaces::new(gf(2), 2, 100).unwrap();
        let t = &idx.table;
        let pp = unnest(&conj, &mut FreshNames::new(&vars));
        prop_assert!(pp.conjuncts.len() >= conj.len());
        let elems: Vec<usize> = (0..t.len()).collect();
        for a in assignments(&vars, &elems) {
            let direct = conj.equations.iter().all(|e| eval_equation(e, &a, t).unwrap());
            prop_assert_eq!(pp.holds(&a, t).unwrap(), direct);
        }
    }

    #[test]
    fn conjunction_text_round_trip(seed in any::<u64>()) {
        let conj = conj_from_seed(seed, &["x", "y", "w"], 4);
        let back: LatticeConjunction = conj.to_string().parse().unwrap();
        prop_assert_eq!(&back, &conj);
        let back: LatticeConjunction = serde_json::from_str(&serde_json::to_string(&conj).unwrap()).unwrap();
        prop_assert_eq!(back, conj);
    }
}

// ---------------------------------------------------------------------------
// permutation models

/// Composition right-to-left; S_n ≅ S_n^op so existence does not depend on it.
fn perm_mul(a: &[usize], b: &[usize]) -> Vec<usize> {
    b.iter().map(|&i| a[i]).collect()
}

fn perm_pow(a: &[usize], e: i64) -> Vec<usize> {
    let mut base = a.to_vec();
    if e < 0 {
        let mut inv = vec![0; a.len()];
        for (i, &x) in a.iter().enumerate() {
            inv[x] = i;
        }
        base = inv;
    }
    let mut acc: Vec<usize> = (0..a.len()).collect();
    for _ in 0..e.unsigned_abs() {
        acc = perm_mul(&acc, &base);
    }
    acc
}

fn all_perms(n: usize) -> Vec<Vec<usize>> {
    Perm::all(n).into_iter().map(|p| p.images().to_vec()).collect::<BTreeSet<_>>().into_iter().collect()
}

fn eval_naive(w: &[(usize, i64)], asg: &[Vec<usize>], n: usize) -> Vec<usize> {
    w.iter().fold((0..n).collect(), |acc, &(g, e)| perm_mul(&acc, &perm_pow(&asg[g], e)))
}

type Word = Vec<(usize, i64)>;

fn naive_min_degree(k: usize, rels: &[(Word, Word)], n_max: usize) -> Option<usize> {
    for n in 1..=n_max {
        let perms = all_perms(n);
        let choices: Vec<usize> = (0..perms.len()).collect();
        let names: Vec<String> = (0..k).map(|i| i.to_string()).collect();
        for a in assignments(&names, &choices) {
            let asg: Vec<Vec<usize>> = (0..k).map(|i| perms[a[&i.to_string()]].clone()).collect();
            let nontrivial = asg.iter().any(|p| p.iter().enumerate().any(|(i, &x)| i != x));
            if nontrivial && rels.iter().all(|(l, r)| eval_naive(l, &asg, n) == eval_naive(r, &asg, n)) {
                return Some(n);
            }
        }
    }
    None
}

fn word() -> impl Strategy<Value = Word> {
    prop::collection::vec((0..2usize, prop::sample::select(vec![-2i64, -1, 1, 2, 3])), 0..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permutation_search_matches_brute_force(rels in prop::collection::vec((word(), word()), 1..3)) {
        let names = ["x", "y"];
        let to_word = |w: &Word| GroupWord::new(w.iter().map(|&(g, e)| (names[g].to_string(), e)));
        let pres = GroupPresentation::new(
            names.iter().map(|s| s.to_string()).collect(),
            rels.iter().map(|(l, r)| (to_word(l), to_word(r))).collect(),
        ).unwrap();
        let found = search_sn(&pres, 4).unwrap();
        prop_assert_eq!(found.as_ref().map(|w| w.n), naive_min_degree(2, &rels, 4));
        let reparsed = parse_group_presentation(&pres.to_string()).unwrap();
        prop_assert_eq!(reparsed, pres);
    }
}

// ---------------------------------------------------------------------------
// databases

fn db_strategy() -> impl Strategy<Value = (usize, Vec<Vec<u32>>)> {
    (1..=4usize).prop_flat_map(|k| (Just(k), prop::collection::vec(prop::collection::vec(0..3u32, k), 1..10)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn database_checks_match_reference((k, tuples) in db_strategy()) {
        let names: Vec<String> = (0..k).map(|i| format!("a{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let d = Database::from_values(&refs, &tuples).unwrap();
        let uniq: BTreeSet<&Vec<u32>> = tuples.iter().collect();
        prop_assert_eq!(d.len(), uniq.len());
        for x in subsets(k) {
            let xn: Vec<&str> = x.iter().map(|&i| refs[i]).collect();
            let classes: Vec<Vec<u32>> = d.tuples().iter().map(|t| x.iter().map(|&i| t[i]).collect()).collect();
            prop_assert_eq!(database::eta_d(&d, &xn).unwrap(), Relation::from_labels(&classes));
            for y in subsets(k) {
                let yn: Vec<&str> = y.iter().map(|&i| refs[i]).collect();
                prop_assert_eq!(database::check_fd(&d, &xn, &yn), fd_naive(&tuples, &x, &y));
                prop_assert_eq!(database::check_emvd(&d, &xn, &yn), emvd_naive(&tuples, &x, &y));
            }
        }
        let injective = (0..k).all(|c| {
            let col: BTreeSet<u32> = d.tuples().iter().map(|t| t[c]).collect();
            col.len() == d.len()
        });
        prop_assert_eq!(database::almost_trivial(&d), injective);
        let back: Database = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        prop_assert_eq!(back, d);
    }

    /// In a coset database an fd X → Y holds iff f(X) ⊆ f(Y).
    #[test]
    fn coset_database_dependencies(picks in prop::collection::btree_set(0usize..67, 2..5)) {
        let idx = IndexedSubspaces::new(gf(2), 4, 100).unwrap();
        let f: Vec<(String, Subspace)> = picks.iter().enumerate().map(|(i, &s)| (format!("a{i}"), idx.subspace(s).clone())).collect();
        let d = database::build_dvf(&f).unwrap();
        for (a, u) in &f {
            let r = database::eta_d(&d, &[a]).unwrap();
            prop_assert_eq!(r.class_count(), Some(16 / (1 << u.dim())));
            for (b, w) in &f {
                prop_assert_eq!(database::check_fd(&d, &[a], &[b]), u.is_subspace_of(w));
            }
        }
    }
}

#[test]
fn eta_matches_coset_relation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (p, n) in [(2u32, 3usize), (3, 2)] {
        for u in all_vecsets(p, n) {
            let gens: Vec<Vec<i64>> = u.pts.iter().map(|&i| decode(p, n, i).iter().map(|&x| x as i64).collect()).collect();
            let s = Subspace::span(gf(p), n, &gens).unwrap();
            let r = eta(&s).unwrap();
            let total = (p as usize).pow(n as u32);
            for _ in 0..50 {
                use rand::Rng;
                let (a, b) = (rng.random_range(0..total), rng.random_range(0..total));
                let diff: Vec<u32> =
                    decode(p, n, a).iter().zip(decode(p, n, b)).map(|(x, y)| (x + p - y) % p).collect();
                assert_eq!(r.contains(a, b), u.contains(&diff));
            }
            assert!(r.in_eq());
        }
    }
}

// ---------------------------------------------------------------------------
// pipeline envelopes

#[test]
fn provenance_chain_replays() {
    let pres = parse_group_presentation("gens x; rel x^3 = 1").unwrap();
    let run = constructive_pipeline(&pres, 4).unwrap();
    let stages: Vec<Stage> = run.artifacts.iter().map(|a| a.stage).collect();
    assert_eq!(stages, [Stage::Group, Stage::Lattice, Stage::Relalg, Stage::Deps]);
    for (i, w) in run.artifacts.windows(2).enumerate() {
        assert!(Stage::is_edge(w[0].stage, w[1].stage));
        assert_eq!(w[1].provenance.len(), i + 1);
        assert_eq!(w[1].provenance.last().unwrap().source_hash, w[0].hash());
        assert_eq!(w[1].provenance[..i], w[0].provenance[..]);
    }
    // replaying each transform from the previous payload reproduces the next artifact
    let g: GroupPresentation = run.artifacts[0].payload().unwrap();
    let (lf, fresh) = group_to_lattice(&g);
    let lat = run.artifacts[0].derive(Stage::Lattice, "group_to_lattice", &lf, fresh);
    assert_eq!(lat, run.artifacts[1]);
    let (rf, fresh) = lattice_to_relalg(&lf.conjunction, false);
    let rel = lat.derive(Stage::Relalg, "lattice_to_relalg", &rf, fresh);
    assert_eq!(rel, run.artifacts[2]);
    let df = type1_to_deps(&rf).unwrap();
    assert_eq!(rel.derive(Stage::Deps, "type1_to_deps", &df, Vec::new()), run.artifacts[3]);
    let text = serde_json::to_string(&run.artifacts).unwrap();
    let back: Vec<PipelineArtifact> = serde_json::from_str(&text).unwrap();
    assert_eq!(back, run.artifacts);
}

#[test]
fn ring_system_text_round_trip() {
    for src in ["idem x, y ; x*y - y*x = 0", "idem ; x*x + 1 = 0", "idem e ; e*a*e = a ; a*a = 2*a - 1"] {
        let sys: RingSystem = src.parse().unwrap();
        let back: RingSystem = sys.to_string().parse().unwrap();
        assert_eq!(back, sys, "{src}");
        let back: RingSystem = serde_json::from_str(&serde_json::to_string(&sys).unwrap()).unwrap();
        assert_eq!(back, sys);
    }
}

/// Frames enumerated up front and frames interleaved with the other
/// variables reach the same verdict.
#[test]
fn frame_naive_agrees_with_frame_first() {
    let idx = IndexedSubspaces::new(gf(2), 4, 1000).unwrap();
    for src in ["gens x; rel x = x^2", "gens x; rel x^2 = 1"] {
        let (lf, _) = group_to_lattice(&parse_group_presentation(src).unwrap());
        let verdict = |pruning| {
            let r = search_lattice(&lf, &idx.table, &SearchOptions { pruning, ..Default::default() }).unwrap();
            (r.outcome.is_exhausted(), r.stats.nodes)
        };
        let (first, n1) = verdict(Pruning::Auto);
        let (naive, n2) = verdict(Pruning::FrameNaive);
        assert_eq!(first, naive, "{src}");
        assert!(n1 <= n2, "{src}: frame-first visited {n1} nodes, frame-naive {n2}");
    }
}

#[test]
fn witnesses_reduce_to_matrix_assignments() {
    let l = SubspaceLattice::new(gf(3), 2);
    let conj: LatticeConjunction = "x + y = 1; x & y = 0".parse().unwrap();
    let u = Subspace::span(gf(3), 2, &[[1i64, 1]]).unwrap();
    let w = Subspace::span(gf(3), 2, &[[1i64, 2]]).unwrap();
    let asg: BTreeMap<String, Subspace> = [("x".to_string(), u), ("y".to_string(), w)].into();
    let (sys, _) = modcon::reductions::lattice_to_ring(&conj);
    let m = modcon::reductions::ring_witness_from_lattice(&conj, &asg, &l).unwrap();
    assert!(sys.holds(&m, gf(3), 2).unwrap());
    for (v, s) in &asg {
        assert_eq!(VecSet::of(&modcon::matring::colspace(&m[v])), VecSet::of(s));
    }
}
