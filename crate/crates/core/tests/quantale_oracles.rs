use std::sync::Arc;

use proptest::prelude::*;
use qspec::quantale::{
    builtin_quantale, endomorphisms, is_zdf, verify_quantale, zero_divisor_witness, Elem, Quantale, QuantaleDoc,
};

fn q(tag: &str) -> Arc<Quantale> {
    Arc::new(builtin_quantale(tag).unwrap())
}

const TAGS: &[&str] = &[
    "boolean2",
    "godel3",
    "godel4",
    "godel5",
    "lukasiewicz3",
    "lukasiewicz4",
    "lukasiewicz5",
    "powerset1",
    "powerset2",
    "powerset3",
];

/// Every map `q -> q` in lexicographic order of its value table.
fn all_maps(n: usize) -> impl Iterator<Item = Vec<Elem>> {
    (0..n.pow(n as u32)).map(move |mut k| {
        let mut v = vec![Elem(0); n];
        for slot in v.iter_mut().rev() {
            *slot = Elem((k % n) as u8);
            k /= n;
        }
        v
    })
}

fn preserves_everything(q: &Quantale, h: &[Elem]) -> bool {
    let f = |e: Elem| h[e.index()];
    f(q.zero()) == q.zero()
        && f(q.one()) == q.one()
        && q.elems().all(|a| f(q.star(a)) == q.star(f(a)))
        && q.elems().all(|a| q.elems().all(|b| f(q.join(a, b)) == q.join(f(a), f(b)) && f(q.mul(a, b)) == q.mul(f(a), f(b))))
}

#[test]
fn endomorphisms_match_brute_force() {
    for tag in TAGS.iter().filter(|t| **t != "powerset3") {
        let q = q(tag);
        let oracle: Vec<Vec<Elem>> = all_maps(q.len()).filter(|h| preserves_everything(&q, h)).collect();
        let found: Vec<Vec<Elem>> = endomorphisms(&q).into_iter().map(|h| h.map).collect();
        assert_eq!(found, oracle, "{tag}");
    }
}

#[test]
fn godel3_has_down_identity_and_up() {
    let q = q("godel3");
    let a = q.element("1/2").unwrap();
    let images: Vec<Elem> = endomorphisms(&q).iter().map(|h| h.apply(a)).collect();
    assert_eq!(images, vec![q.zero(), a, q.one()]);
}

#[test]
fn boolean2_has_only_the_identity() {
    let e = endomorphisms(&q("boolean2"));
    assert_eq!(e.len(), 1);
    assert!(e[0].is_identity());
}

#[test]
fn every_builtin_is_a_quantale() {
    for tag in TAGS {
        let r = verify_quantale(&q(tag));
        assert!(r.passed, "{tag}: {:?}", r.violations);
    }
}

#[test]
fn zdf_matches_pair_scan() {
    for tag in TAGS {
        let q = q(tag);
        let zero = q.zero();
        let oracle = q.elems().all(|a| q.elems().all(|b| a == zero || b == zero || q.mul(a, b) != zero));
        assert_eq!(is_zdf(&q), oracle, "{tag}");
        let expected = *tag == "boolean2" || tag.starts_with("godel") || *tag == "powerset1";
        assert_eq!(oracle, expected, "{tag}");
    }
    let l = q("lukasiewicz3");
    let half = l.element("1/2").unwrap();
    assert_eq!(zero_divisor_witness(&l), Some((half, half)));
}

fn chain_doc(mul: &[[usize; 3]; 3]) -> QuantaleDoc {
    let names = ["0", "a", "1"];
    let table = |f: &dyn Fn(usize, usize) -> usize| -> Vec<Vec<String>> {
        (0..3).map(|x| (0..3).map(|y| names[f(x, y)].to_string()).collect()).collect()
    };
    QuantaleDoc {
        name: "chain3".into(),
        elements: names.iter().map(|s| s.to_string()).collect(),
        join: table(&|x, y| x.max(y)),
        mul: table(&|x, y| mul[x][y]),
        unit: "1".into(),
        involution: None,
    }
}

/// Searches commutative unital tables on the 3-chain for one that fails
/// distributivity alone.
#[test]
fn distributivity_counterexample_is_reported() {
    let mut found = None;
    'search: for code in 0..3usize.pow(6) {
        let mut free = [0usize; 6];
        let mut c = code;
        for f in &mut free {
            *f = c % 3;
            c /= 3;
        }
        // upper triangle (0,0) (0,1) (0,2) (1,1) (1,2) (2,2)
        let [m00, m01, m02, m11, m12, m22] = free;
        let mul = [[m00, m01, m02], [m01, m11, m12], [m02, m12, m22]];
        let r = verify_quantale(&Quantale::from_doc(&chain_doc(&mul)).unwrap());
        if r.violations.len() == 1 && r.violations[0].axiom == "distributivity" {
            found = Some((mul, r));
            break 'search;
        }
    }
    let (mul, r) = found.expect("a non-distributive table exists");
    let w: Vec<usize> = r.violations[0].witness.iter().map(|n| ["0", "a", "1"].iter().position(|m| m == n).unwrap()).collect();
    let (x, y, z) = (w[0], w[1], w[2]);
    assert!(mul[x][y.max(z)] != mul[x][y].max(mul[x][z]) || mul[y.max(z)][x] != mul[y][x].max(mul[z][x]));
}

#[test]
fn non_idempotent_join_loads_but_fails_verification() {
    let mut doc = chain_doc(&[[0, 0, 0], [0, 1, 1], [0, 1, 2]]);
    doc.join[1][1] = "1".into();
    let q = Quantale::from_doc(&doc).unwrap();
    let r = verify_quantale(&q);
    assert!(!r.passed);
    assert_eq!(r.violated("join_idempotent").unwrap().witness, ["a"]);
}

#[test]
fn document_round_trip() {
    for tag in TAGS {
        let q = q(tag);
        let back = Quantale::load(&q.to_json()).unwrap();
        assert_eq!(back.to_json(), q.to_json(), "{tag}");
    }
}

proptest! {
    #[test]
    fn chains_are_quantales(n in 2usize..9) {
        for tag in [format!("godel{n}"), format!("lukasiewicz{n}")] {
            prop_assert!(verify_quantale(&q(&tag)).passed);
        }
    }

    #[test]
    fn endomorphisms_compose(tag in prop::sample::select(TAGS)) {
        let q = q(tag);
        let e = endomorphisms(&q);
        for f in &e {
            prop_assert!(f.is_homomorphism());
            for g in &e {
                prop_assert!(e.contains(&f.then(g).unwrap()));
            }
        }
    }
}
