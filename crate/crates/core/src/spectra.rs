//! Gelfand and prime spectra of a subsemialgebra, restriction along
//! inclusions, and the comparison maps `ξ` and `τ`.
//!
//! Characters preserve 0, 1, binary joins, composition and the involution.
//! Compatibility with scalars is then automatic in the form
//! `ρ(s • a) = ρ(s • 1) · ρ(a)`, since `s • a = (s • 1) ∘ a`.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::homsearch;
use crate::quantale::{builtin_quantale, is_zdf, Elem, Quantale};
use crate::subalgebra::{inclusion_map, Subsemialgebra};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// The scalars `Q` of the algebra.
    Quantale,
    /// The Boolean quantale `2`.
    Two,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Character {
    pub algebra: String,
    pub target: Target,
    /// `values[i]` is the image of member `i`.
    pub values: Vec<Elem>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PrimeIdeal {
    pub algebra: String,
    /// Sorted member indices.
    pub members: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Gelfand,
    Prime,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(untagged)]
pub enum SpectrumPoint {
    Character(Character),
    Ideal(PrimeIdeal),
}

impl SpectrumPoint {
    pub fn algebra(&self) -> &str {
        match self {
            SpectrumPoint::Character(c) => &c.algebra,
            SpectrumPoint::Ideal(j) => &j.algebra,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectrumSet {
    pub algebra: String,
    pub kind: SpectrumKind,
    pub points: Vec<SpectrumPoint>,
}

impl SpectrumSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn position(&self, p: &SpectrumPoint) -> Option<usize> {
        self.points.iter().position(|x| x == p)
    }
}

pub fn two() -> Arc<Quantale> {
    Arc::new(builtin_quantale("boolean2").expect("builtin"))
}

fn characters_into(a: &Subsemialgebra, target: &Quantale, kind: Target) -> Result<Vec<Character>> {
    let t = a.tables()?;
    Ok(homsearch::homomorphisms(&t.ring, target)
        .into_iter()
        .map(|values| Character { algebra: a.id().to_string(), target: kind, values })
        .collect())
}

/// All characters `A -> Q`, lexicographic in their value tables.
pub fn characters(a: &Subsemialgebra) -> Result<Vec<Character>> {
    characters_into(a, a.quantale(), Target::Quantale)
}

pub fn gelfand_spectrum(a: &Subsemialgebra) -> Result<SpectrumSet> {
    Ok(SpectrumSet {
        algebra: a.id().to_string(),
        kind: SpectrumKind::Gelfand,
        points: characters(a)?.into_iter().map(SpectrumPoint::Character).collect(),
    })
}

/// All homomorphisms `A -> 2`. The quantale must be ZDF so that `2` carries
/// the scalar action through the collapse `w`.
pub fn characters_to_two(a: &Subsemialgebra) -> Result<Vec<Character>> {
    if !is_zdf(a.quantale()) {
        return Err(Error::NotZdf(a.quantale().name().into()));
    }
    characters_into(a, &two(), Target::Two)
}

/// Checks every homomorphism law for `values: A -> target`, including
/// `ρ(s • a) = ρ(s • 1) · ρ(a)`.
pub fn is_character(a: &Subsemialgebra, target: &Quantale, values: &[Elem]) -> bool {
    let Ok(t) = a.tables() else { return false };
    let r = &t.ring;
    let m = r.size;
    if values.len() != m || values.iter().any(|v| !target.contains(*v)) {
        return false;
    }
    values[r.zero] == target.zero()
        && values[r.one] == target.one()
        && (0..m).all(|i| values[r.star[i]] == target.star(values[i]))
        && (0..m).all(|i| {
            (0..m).all(|j| {
                values[r.join[i * m + j]] == target.join(values[i], values[j])
                    && values[r.mul[i * m + j]] == target.mul(values[i], values[j])
            })
        })
        && (0..a.quantale().len()).all(|s| {
            let s1 = t.scalar[s * m + r.one];
            (0..m).all(|i| values[t.scalar[s * m + i]] == target.mul(values[s1], values[i]))
        })
}

/// `a ∘ A`, the ideal generated by one member.
pub fn principal_ideal(a: &Subsemialgebra, i: usize) -> Result<Vec<usize>> {
    let t = a.tables()?;
    let m = t.ring.size;
    let set: BTreeSet<usize> = (0..m).map(|b| t.ring.mul[i * m + b]).collect();
    Ok(set.into_iter().collect())
}

fn to_bits(m: usize, xs: &[usize]) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(m);
    b.extend(xs.iter().copied());
    b
}

/// Refuses to list more ideals than this.
pub const IDEAL_LIMIT: usize = 1 << 16;

/// Every ideal of `A`: subsets containing 0, closed under join and absorbing
/// multiplication. Sorted by size, then members. Their number can grow
/// exponentially in `|A|`; past [`IDEAL_LIMIT`] this fails.
pub fn all_ideals(a: &Subsemialgebra) -> Result<Vec<Vec<usize>>> {
    let t = a.tables()?;
    let r = &t.ring;
    let m = r.size;
    let principals: Vec<Vec<usize>> = (0..m).map(|i| principal_ideal(a, i)).collect::<Result<_>>()?;
    let bottom = to_bits(m, &[r.zero]);
    let mut seen = HashSet::from([bottom.clone()]);
    let mut queue = VecDeque::from([bottom]);
    while let Some(j) = queue.pop_front() {
        for (i, p) in principals.iter().enumerate() {
            if j.contains(i) {
                continue;
            }
            let mut next = FixedBitSet::with_capacity(m);
            for x in j.ones() {
                for &y in p {
                    next.insert(r.join[x * m + y]);
                }
            }
            if seen.insert(next.clone()) {
                if seen.len() > IDEAL_LIMIT {
                    return Err(Error::BoundExceeded { size: seen.len() as u128, bound: IDEAL_LIMIT as u128 });
                }
                queue.push_back(next);
            }
        }
    }
    let mut out: Vec<Vec<usize>> = seen.into_iter().map(|b| b.ones().collect()).collect();
    out.sort_by(|x, y| (x.len(), x).cmp(&(y.len(), y)));
    Ok(out)
}

pub fn is_ideal(a: &Subsemialgebra, j: &[usize]) -> bool {
    let Ok(t) = a.tables() else { return false };
    let r = &t.ring;
    let m = r.size;
    let inside = to_bits(m, j);
    inside.contains(r.zero)
        && j.iter().all(|&x| j.iter().all(|&y| inside.contains(r.join[x * m + y])))
        && j.iter().all(|&x| (0..m).all(|b| inside.contains(r.mul[b * m + x])))
}

/// Prime, k- and star-closure conditions, without properness.
fn prime_k_star(a: &Subsemialgebra, j: &[usize]) -> bool {
    let Ok(t) = a.tables() else { return false };
    let r = &t.ring;
    let m = r.size;
    let inside = to_bits(m, j);
    let prime = (0..m).all(|s| (0..m).all(|u| !inside.contains(r.mul[s * m + u]) || inside.contains(s) || inside.contains(u)));
    let k = j.iter().all(|&x| (0..m).all(|b| !inside.contains(r.join[x * m + b]) || inside.contains(b)));
    let star = j.iter().all(|&x| inside.contains(r.star[x]));
    prime && k && star
}

pub fn is_prime_k_star_ideal(a: &Subsemialgebra, j: &[usize]) -> bool {
    let proper = a.one_index().is_some_and(|one| !j.contains(&one));
    proper && is_ideal(a, j) && prime_k_star(a, j)
}

/// Result of scanning the ideals of an algebra for primes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimeScan {
    pub primes: Vec<Vec<usize>>,
    /// Ideals meeting every prime condition except properness.
    pub improper_excluded: usize,
}

/// A k-ideal is down-closed (take `b ≤ a`, then `a ∨ b = a`) and join-closed,
/// hence equal to `↓j` for its own join `j`. Scanning the `m` down-sets of
/// members therefore finds every prime k*-ideal.
pub fn prime_scan(a: &Subsemialgebra) -> Result<PrimeScan> {
    let one = a.one_index().ok_or_else(|| Error::NotClosed("identity is not a member".into()))?;
    let t = a.tables()?;
    let m = t.ring.size;
    let mut primes = Vec::new();
    let mut improper_excluded = 0;
    for j in 0..m {
        let down: Vec<usize> = (0..m).filter(|&b| t.ring.join[b * m + j] == j).collect();
        if is_ideal(a, &down) && prime_k_star(a, &down) {
            if down.contains(&one) {
                improper_excluded += 1;
            } else {
                primes.push(down);
            }
        }
    }
    primes.sort();
    Ok(PrimeScan { primes, improper_excluded })
}

/// All proper prime k*-ideals, lexicographic in their member lists.
pub fn prime_spectrum(a: &Subsemialgebra) -> Result<SpectrumSet> {
    Ok(SpectrumSet {
        algebra: a.id().to_string(),
        kind: SpectrumKind::Prime,
        points: prime_scan(a)?
            .primes
            .into_iter()
            .map(|members| SpectrumPoint::Ideal(PrimeIdeal { algebra: a.id().to_string(), members }))
            .collect(),
    })
}

pub fn spectrum(a: &Subsemialgebra, kind: SpectrumKind) -> Result<SpectrumSet> {
    match kind {
        SpectrumKind::Gelfand => gelfand_spectrum(a),
        SpectrumKind::Prime => prime_spectrum(a),
    }
}

/// Members sent to bottom of `target`.
pub fn kernel(c: &Character, target: &Quantale) -> PrimeIdeal {
    let z = target.zero();
    let members = c.values.iter().enumerate().filter(|(_, v)| **v == z).map(|(i, _)| i).collect();
    PrimeIdeal { algebra: c.algebra.clone(), members }
}

/// Restricts a point over `b` to the subalgebra `a ⊆ b`.
pub fn restrict_point(p: &SpectrumPoint, a: &Subsemialgebra, b: &Subsemialgebra) -> Result<SpectrumPoint> {
    if p.algebra() != b.id() {
        return Err(Error::ForeignPoint { expected: b.id().into(), found: p.algebra().into() });
    }
    let map = inclusion_map(a, b)?;
    Ok(match p {
        SpectrumPoint::Character(c) => SpectrumPoint::Character(Character {
            algebra: a.id().to_string(),
            target: c.target,
            values: map.iter().map(|&j| c.values[j]).collect(),
        }),
        SpectrumPoint::Ideal(k) => {
            let inside = to_bits(b.len(), &k.members);
            SpectrumPoint::Ideal(PrimeIdeal {
                algebra: a.id().to_string(),
                members: (0..a.len()).filter(|&i| inside.contains(map[i])).collect(),
            })
        }
    })
}

/// `ξ(ρ) = ker(w ∘ ρ)`.
pub fn xi(a: &Subsemialgebra, rho: &Character) -> Result<PrimeIdeal> {
    if !is_zdf(a.quantale()) {
        return Err(Error::NotZdf(a.quantale().name().into()));
    }
    if rho.algebra != a.id() || rho.target != Target::Quantale {
        return Err(Error::ForeignPoint { expected: a.id().into(), found: rho.algebra.clone() });
    }
    Ok(kernel(rho, a.quantale()))
}

/// `τ(γ) = ! ∘ γ`.
pub fn tau(a: &Subsemialgebra, gamma: &Character) -> Result<Character> {
    let q = a.quantale();
    if !is_zdf(q) {
        return Err(Error::NotZdf(q.name().into()));
    }
    if gamma.algebra != a.id() || gamma.target != Target::Two {
        return Err(Error::ForeignPoint { expected: a.id().into(), found: gamma.algebra.clone() });
    }
    let values = gamma.values.iter().map(|v| if v.index() == 0 { q.zero() } else { q.one() }).collect();
    Ok(Character { algebra: gamma.algebra.clone(), target: Target::Quantale, values })
}

/// The kernel of a character to `2`.
pub fn kernel_two(gamma: &Character) -> PrimeIdeal {
    kernel(gamma, &two())
}
