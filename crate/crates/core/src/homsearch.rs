//! Backtracking search for structure-preserving maps out of a finite
//! involutive semiring given by operation tables.
//!
//! Used both for rig endomorphisms of a quantale and for characters of a
//! subsemialgebra. Every constraint `h(a op b) = h(a) op h(b)` is checked as
//! soon as both operands carry a value, and the value of the result is forced
//! by propagation, so the search only branches on genuinely free elements.

use crate::quantale::{Elem, Quantale};

/// Operation tables of a finite involutive semiring with carrier `0..size`.
#[derive(Clone, Debug)]
pub(crate) struct Tables {
    pub size: usize,
    pub join: Vec<usize>,
    pub mul: Vec<usize>,
    pub star: Vec<usize>,
    pub zero: usize,
    pub one: usize,
}

impl Tables {
    pub fn from_quantale(q: &Quantale) -> Self {
        let n = q.len();
        let mut join = Vec::with_capacity(n * n);
        let mut mul = Vec::with_capacity(n * n);
        for a in q.elems() {
            for b in q.elems() {
                join.push(q.join(a, b).index());
                mul.push(q.mul(a, b).index());
            }
        }
        Tables {
            size: n,
            join,
            mul,
            star: q.elems().map(|a| q.star(a).index()).collect(),
            zero: q.zero().index(),
            one: q.one().index(),
        }
    }
}

/// All maps `h: source -> target` preserving 0, 1, join, multiplication and
/// involution, in lexicographic order of their value tables.
pub(crate) fn homomorphisms(source: &Tables, target: &Quantale) -> Vec<Vec<Elem>> {
    let mut out = Vec::new();
    let mut values: Vec<Option<Elem>> = vec![None; source.size];
    let mut trail = Vec::new();
    if assign(source, target, &mut values, &mut trail, source.zero, target.zero())
        && assign(source, target, &mut values, &mut trail, source.one, target.one())
    {
        search(source, target, &mut values, &mut out);
    }
    out
}

fn search(source: &Tables, target: &Quantale, values: &mut Vec<Option<Elem>>, out: &mut Vec<Vec<Elem>>) {
    let Some(free) = values.iter().position(Option::is_none) else {
        out.push(values.iter().map(|v| v.expect("all assigned")).collect());
        return;
    };
    for candidate in target.elems() {
        let mut trail = Vec::new();
        if assign(source, target, values, &mut trail, free, candidate) {
            search(source, target, values, out);
        }
        for k in trail {
            values[k] = None;
        }
    }
}

/// Assigns `values[k] = v` and propagates forced values. Returns false on a
/// conflict; every index written is recorded in `trail` for undoing.
fn assign(
    source: &Tables,
    target: &Quantale,
    values: &mut [Option<Elem>],
    trail: &mut Vec<usize>,
    k: usize,
    v: Elem,
) -> bool {
    let mut queue = vec![(k, v)];
    while let Some((k, v)) = queue.pop() {
        match values[k] {
            Some(existing) if existing == v => continue,
            Some(_) => return false,
            None => {
                values[k] = Some(v);
                trail.push(k);
            }
        }
        queue.push((source.star[k], target.star(v)));
        let n = source.size;
        for (j, w) in values.iter().enumerate() {
            let Some(w) = *w else { continue };
            queue.push((source.join[k * n + j], target.join(v, w)));
            queue.push((source.mul[k * n + j], target.mul(v, w)));
            queue.push((source.mul[j * n + k], target.mul(w, v)));
        }
    }
    true
}
