use std::sync::Arc;

use proptest::prelude::*;
use qspec::quantale::{builtin_quantale, Elem, Quantale};
use qspec::relations::{
    add, biproduct_convolution, blocks, compose, dagger, direct_sum, reassemble, scalar_mul, scalar_mul_via_tensor,
    support, tensor, FiniteSet, QRel,
};

fn q(tag: &str) -> Arc<Quantale> {
    Arc::new(builtin_quantale(tag).unwrap())
}

fn set(n: usize) -> Arc<FiniteSet> {
    Arc::new(FiniteSet::range(format!("S{n}"), n))
}

fn rel(q: &Arc<Quantale>, n: usize, m: usize, entries: &[u8]) -> QRel {
    QRel::from_entries(q, &set(n), &set(m), entries.iter().map(|&e| Elem(e)).collect()).unwrap()
}

/// Independent matrix product: entry (x, z) is the join over y of f(x,y)·g(y,z).
fn naive_compose(q: &Quantale, f: &QRel, g: &QRel) -> Vec<Elem> {
    let (n, m, p) = (f.dom().len(), f.cod().len(), g.cod().len());
    let mut out = Vec::with_capacity(n * p);
    for x in 0..n {
        for z in 0..p {
            out.push(q.join_all((0..m).map(|y| q.mul(f.get(x, y), g.get(y, z)))));
        }
    }
    out
}

/// Every relation `n -> m` over `q`.
fn all_relations(q: &Arc<Quantale>, n: usize, m: usize) -> Vec<QRel> {
    let k = q.len();
    (0..k.pow((n * m) as u32))
        .map(|mut c| {
            let entries: Vec<u8> = (0..n * m)
                .map(|_| {
                    let e = (c % k) as u8;
                    c /= k;
                    e
                })
                .collect();
            rel(q, n, m, &entries)
        })
        .collect()
}

#[test]
fn boolean_composition_is_relational_composition() {
    let q = q("boolean2");
    let x = Arc::new(FiniteSet::from_ids("X", &["1"]).unwrap());
    let y = Arc::new(FiniteSet::from_ids("Y", &["2"]).unwrap());
    let z = Arc::new(FiniteSet::from_ids("Z", &["3"]).unwrap());
    let f = QRel::from_cells(&q, &x, &y, &[(0, 0)]);
    let g = QRel::from_cells(&q, &y, &z, &[(0, 0)]);
    let h = compose(&f, &g).unwrap();
    assert!(h.relates(0, 0));
    assert_eq!(h.dom().as_ref(), x.as_ref());
    assert_eq!(h.cod().as_ref(), z.as_ref());
    let d = dagger(&f);
    assert_eq!(d.dom().as_ref(), y.as_ref());
    assert!(d.relates(0, 0));
    assert_eq!(support(&f).supp, vec![0]);
    assert_eq!(support(&f).cosupp, vec![0]);
    assert_eq!(support(&QRel::zero(&q, &x, &y)).supp, Vec::<usize>::new());
}

#[test]
fn godel_composition_by_hand() {
    let q = q("godel3");
    // 0, a, 1 are 0, 1, 2
    let f = rel(&q, 2, 2, &[1, 2, 0, 1]);
    let g = rel(&q, 2, 2, &[2, 0, 1, 1]);
    let h = compose(&f, &g).unwrap();
    assert_eq!(h.entries(), naive_compose(&q, &f, &g));
    assert_eq!(h.entries(), &[Elem(1); 4]);
}

#[test]
fn composition_checks_objects() {
    let q = q("boolean2");
    assert!(compose(&rel(&q, 1, 2, &[0, 1]), &rel(&q, 1, 2, &[0, 1])).is_err());
    assert!(add(&rel(&q, 1, 2, &[0, 1]), &rel(&q, 2, 1, &[0, 1])).is_err());
    assert!(compose(&rel(&q, 1, 1, &[1]), &QRel::identity(&self::q("godel3"), &set(1))).is_err());
}

/// Enrichment composites, exhaustively over boolean2 with |X|, |Y| ≤ 2.
#[test]
fn boolean_enrichment_exhaustive() {
    let q = q("boolean2");
    for n in 1..=2 {
        for m in 1..=2 {
            let rels = all_relations(&q, n, m);
            for f in &rels {
                for g in &rels {
                    assert_eq!(add(f, g).unwrap(), biproduct_convolution(f, g).unwrap());
                }
                for s in q.elems() {
                    assert_eq!(scalar_mul(s, f).unwrap(), scalar_mul_via_tensor(s, f).unwrap());
                }
            }
        }
    }
}

/// Over a ZDF quantale a normal relation has equal support and cosupport.
#[test]
fn normal_relations_have_equal_supports() {
    for (tag, n) in [("boolean2", 3), ("godel3", 2), ("godel4", 2)] {
        let q = q(tag);
        let mut normal = 0;
        for f in all_relations(&q, n, n) {
            let d = dagger(&f);
            if compose(&f, &d).unwrap() == compose(&d, &f).unwrap() {
                normal += 1;
                let s = support(&f);
                assert_eq!(s.supp, s.cosupp, "{tag} {f}");
            }
        }
        assert!(normal > 1);
    }
}

/// With a nilpotent scalar the implication fails: `f = [0 x; 0 0]` with
/// `x·x* = 0` is normal. Powerset quantales have zero divisors but no such `x`.
#[test]
fn supports_can_differ_without_zdf() {
    for (tag, expected) in [("lukasiewicz3", true), ("powerset2", false)] {
        let q = q(tag);
        let witness = all_relations(&q, 2, 2).into_iter().find(|f| {
            let d = dagger(f);
            compose(f, &d).unwrap() == compose(&d, f).unwrap() && support(f).supp != support(f).cosupp
        });
        assert_eq!(witness.is_some(), expected, "{tag}");
    }
}

#[test]
fn blocks_of_a_diagonal_relation() {
    let q = q("boolean2");
    let id = QRel::identity(&q, &set(2));
    let b = blocks(&id, &[vec![0], vec![1]], &[vec![0], vec![1]]).unwrap();
    assert!(b.blocks[0][1].is_zero() && b.blocks[1][0].is_zero());
    assert!(!b.blocks[0][0].is_zero() && !b.blocks[1][1].is_zero());
    let whole = blocks(&id, &[vec![0, 1]], &[vec![0, 1]]).unwrap();
    assert_eq!(whole.blocks[0][0].entries(), id.entries());
    assert!(blocks(&id, &[vec![0]], &[vec![0, 1]]).is_err());
    assert!(blocks(&id, &[vec![0, 1], vec![1]], &[vec![0, 1]]).is_err());
}

fn arb_quantale() -> impl Strategy<Value = Arc<Quantale>> {
    prop::sample::select(vec!["boolean2", "godel3", "lukasiewicz3", "powerset2", "godel4"]).prop_map(q)
}

fn arb_rel(q: Arc<Quantale>, n: usize, m: usize) -> impl Strategy<Value = QRel> {
    let k = q.len() as u8;
    prop::collection::vec(0..k, n * m).prop_map(move |e| rel(&q, n, m, &e))
}

/// A quantale with four composable relations `f, f2: A -> B`, `g: B -> C`,
/// `h: C -> D` and two scalars.
#[allow(clippy::type_complexity)]
fn arb_chain() -> impl Strategy<Value = (Arc<Quantale>, QRel, QRel, QRel, QRel, Elem, Elem)> {
    (arb_quantale(), 1usize..4, 1usize..4, 1usize..4, 1usize..4).prop_flat_map(|(q, a, b, c, d)| {
        let k = q.len() as u8;
        (
            Just(q.clone()),
            arb_rel(q.clone(), a, b),
            arb_rel(q.clone(), a, b),
            arb_rel(q.clone(), b, c),
            arb_rel(q, c, d),
            (0..k).prop_map(Elem),
            (0..k).prop_map(Elem),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn category_laws((q, f, _f2, g, h, _s, _t) in arb_chain()) {
        prop_assert_eq!(compose(&f, &g).unwrap().entries().to_vec(), naive_compose(&q, &f, &g));
        prop_assert_eq!(
            compose(&compose(&f, &g).unwrap(), &h).unwrap(),
            compose(&f, &compose(&g, &h).unwrap()).unwrap()
        );
        prop_assert_eq!(compose(&QRel::identity(&q, f.dom()), &f).unwrap(), f.clone());
        prop_assert_eq!(compose(&f, &QRel::identity(&q, f.cod())).unwrap(), f.clone());
    }

    #[test]
    fn dagger_laws((_q, f, f2, g, _h, s, _t) in arb_chain()) {
        prop_assert_eq!(dagger(&dagger(&f)), f.clone());
        prop_assert_eq!(dagger(&compose(&f, &g).unwrap()), compose(&dagger(&g), &dagger(&f)).unwrap());
        prop_assert_eq!(dagger(&add(&f, &f2).unwrap()), add(&dagger(&f), &dagger(&f2)).unwrap());
        let q = f.quantale().clone();
        prop_assert_eq!(dagger(&scalar_mul(s, &f).unwrap()), scalar_mul(q.star(s), &dagger(&f)).unwrap());
    }

    #[test]
    fn semimodule_laws((q, f, f2, g, _h, s, t) in arb_chain()) {
        let sm = |s, f: &QRel| scalar_mul(s, f).unwrap();
        let plus = |a: &QRel, b: &QRel| add(a, b).unwrap();
        prop_assert_eq!(sm(s, &plus(&f, &f2)), plus(&sm(s, &f), &sm(s, &f2)));
        prop_assert_eq!(sm(q.join(s, t), &f), plus(&sm(s, &f), &sm(t, &f)));
        prop_assert_eq!(sm(q.mul(s, t), &f), sm(s, &sm(t, &f)));
        prop_assert_eq!(sm(q.one(), &f), f.clone());
        prop_assert!(sm(q.zero(), &f).is_zero());
        prop_assert_eq!(plus(&f, &QRel::zero(&q, f.dom(), f.cod())), f.clone());
        prop_assert_eq!(plus(&f, &f), f.clone());
        // composition is bilinear and commutes with the scalar action
        prop_assert_eq!(compose(&plus(&f, &f2), &g).unwrap(), plus(&compose(&f, &g).unwrap(), &compose(&f2, &g).unwrap()));
        prop_assert_eq!(compose(&sm(s, &f), &g).unwrap(), sm(s, &compose(&f, &g).unwrap()));
        prop_assert_eq!(compose(&f, &sm(s, &g)).unwrap(), sm(s, &compose(&f, &g).unwrap()));
    }

    #[test]
    fn enrichment_composites((_q, f, f2, _g, _h, s, _t) in arb_chain()) {
        prop_assert_eq!(add(&f, &f2).unwrap(), biproduct_convolution(&f, &f2).unwrap());
        prop_assert_eq!(scalar_mul(s, &f).unwrap(), scalar_mul_via_tensor(s, &f).unwrap());
    }

    #[test]
    fn tensor_interchange((_q, f, _f2, g, h, _s, _t) in arb_chain()) {
        // (f ⊗ h) ; (g ⊗ 1) = (f;g) ⊗ h
        let q = f.quantale().clone();
        let lhs = compose(&tensor(&f, &h).unwrap(), &tensor(&g, &QRel::identity(&q, h.cod())).unwrap()).unwrap();
        let rhs = tensor(&compose(&f, &g).unwrap(), &h).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(dagger(&tensor(&f, &h).unwrap()), tensor(&dagger(&f), &dagger(&h)).unwrap());
    }

    #[test]
    fn direct_sum_is_block_diagonal((_q, f, _f2, g, _h, _s, _t) in arb_chain()) {
        let d = direct_sum(&f, &g).unwrap();
        let (n, m) = (f.dom().len(), g.dom().len());
        let (p, r) = (f.cod().len(), g.cod().len());
        let dom_parts = vec![(0..n).collect(), (n..n + m).collect()];
        let cod_parts = vec![(0..p).collect(), (p..p + r).collect()];
        let b = blocks(&d, &dom_parts, &cod_parts).unwrap();
        prop_assert_eq!(b.blocks[0][0].entries(), f.entries());
        prop_assert_eq!(b.blocks[1][1].entries(), g.entries());
        prop_assert!(b.blocks[0][1].is_zero() && b.blocks[1][0].is_zero());
    }

    #[test]
    fn block_round_trip(
        (f, split_dom, split_cod) in arb_quantale()
            .prop_flat_map(|q| (1usize..5, 1usize..5).prop_flat_map(move |(n, m)| (arb_rel(q.clone(), n, m), 0..=n, 0..=m)))
    ) {
        let n = f.dom().len();
        let m = f.cod().len();
        let part = |k: usize, len: usize| -> Vec<Vec<usize>> {
            [(0..k).collect::<Vec<_>>(), (k..len).collect()].into_iter().filter(|p| !p.is_empty()).collect()
        };
        let (dp, cp) = (part(split_dom, n), part(split_cod, m));
        let b = blocks(&f, &dp, &cp).unwrap();
        prop_assert_eq!(reassemble(&b, f.dom(), f.cod()).unwrap(), f.clone());
        let bd = blocks(&dagger(&f), &cp, &dp).unwrap();
        prop_assert_eq!(bd.blocks.len(), b.dagger().blocks.len());
        for (row, drow) in bd.blocks.iter().zip(&b.dagger().blocks) {
            for (x, y) in row.iter().zip(drow) {
                prop_assert_eq!(x.entries(), y.entries());
            }
        }
    }

    /// Block product oracle: blocks of `f;g` are joins of products of blocks.
    #[test]
    fn block_multiplication(
        (f, g, k) in arb_quantale().prop_flat_map(|q| {
            (1usize..4, 2usize..5, 1usize..4).prop_flat_map(move |(n, m, p)| {
                (arb_rel(q.clone(), n, m), arb_rel(q.clone(), m, p), 1..m)
            })
        })
    ) {
        let m = f.cod().len();
        let mid: Vec<Vec<usize>> = vec![(0..k).collect(), (k..m).collect()];
        let rows = vec![(0..f.dom().len()).collect::<Vec<_>>()];
        let cols = vec![(0..g.cod().len()).collect::<Vec<_>>()];
        let bf = blocks(&f, &rows, &mid).unwrap();
        let bg = blocks(&g, &mid, &cols).unwrap();
        let parts: Vec<QRel> = (0..2).map(|j| compose(&bf.blocks[0][j], &bg.blocks[j][0]).unwrap()).collect();
        let q = f.quantale().clone();
        let joined: Vec<Elem> =
            parts[0].entries().iter().zip(parts[1].entries()).map(|(&a, &b)| q.join(a, b)).collect();
        prop_assert_eq!(compose(&f, &g).unwrap().entries().to_vec(), joined);
    }

    #[test]
    fn literal_round_trip(f in arb_quantale().prop_flat_map(|q| (1usize..4, 1usize..4).prop_flat_map(move |(n, m)| arb_rel(q.clone(), n, m)))) {
        let lit = f.to_literal();
        let json = serde_json::to_string(&lit).unwrap();
        let back = QRel::from_literal(f.quantale(), &serde_json::from_str(&json).unwrap()).unwrap();
        prop_assert_eq!(back.entries(), f.entries());
    }
}
