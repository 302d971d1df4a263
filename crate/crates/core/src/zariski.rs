//! Zariski topologies on the Gelfand and prime spectra, stored as explicit
//! families of closed sets.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantale::is_zdf;
use crate::spectra::{self, all_ideals, principal_ideal, restrict_point, xi, SpectrumKind, SpectrumPoint, SpectrumSet};
use crate::subalgebra::Subsemialgebra;

/// Largest spectrum for which finality of `ξ` is checked over all subsets.
pub const FINALITY_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiniteTopology {
    pub points: Vec<String>,
    /// Sorted point-index lists, closed under finite unions and intersections.
    pub closed_sets: Vec<Vec<usize>>,
}

impl FiniteTopology {
    /// Closes `basis ∪ {∅, all}` under binary unions and intersections.
    pub fn generated(points: Vec<String>, basis: impl IntoIterator<Item = Vec<usize>>) -> Self {
        let n = points.len();
        let mut family: BTreeSet<Vec<usize>> = basis.into_iter().collect();
        family.insert(Vec::new());
        family.insert((0..n).collect());
        loop {
            let current: Vec<&Vec<usize>> = family.iter().collect();
            let mut fresh = Vec::new();
            for (i, a) in current.iter().enumerate() {
                for b in &current[..i] {
                    for c in [union(a, b), intersection(a, b)] {
                        if !family.contains(&c) {
                            fresh.push(c);
                        }
                    }
                }
            }
            if fresh.is_empty() {
                break;
            }
            family.extend(fresh);
        }
        FiniteTopology { points, closed_sets: family.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_closed(&self, set: &[usize]) -> bool {
        self.closed_sets.binary_search_by(|c| c.as_slice().cmp(set)).is_ok()
    }

    /// Closed under finite unions and intersections, containing ∅ and all.
    pub fn is_topology(&self) -> bool {
        let all: Vec<usize> = (0..self.len()).collect();
        self.is_closed(&[])
            && self.is_closed(&all)
            && self.closed_sets.iter().all(|a| {
                self.closed_sets.iter().all(|b| self.is_closed(&union(a, b)) && self.is_closed(&intersection(a, b)))
            })
    }

    /// No closed set separates `x` from `y`.
    pub fn indistinguishable(&self, x: usize, y: usize) -> bool {
        self.closed_sets.iter().all(|c| c.contains(&x) == c.contains(&y))
    }
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().chain(b).copied().collect::<BTreeSet<_>>().into_iter().collect()
}

fn intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| b.contains(x)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// `V(⟨a⟩)` for each member `a`.
    Principal,
    /// `V(J)` for every ideal `J`.
    AllIdeals,
}

/// Whether the ideal `j` lies inside the point: `j ⊆ ker ρ` or `j ⊆ K`.
fn vanishes(a: &Subsemialgebra, point: &SpectrumPoint, j: &[usize]) -> bool {
    match point {
        SpectrumPoint::Character(rho) => {
            let z = a.quantale().zero();
            j.iter().all(|&m| rho.values[m] == z)
        }
        SpectrumPoint::Ideal(k) => j.iter().all(|m| k.members.binary_search(m).is_ok()),
    }
}

pub fn point_labels(s: &SpectrumSet) -> Vec<String> {
    let prefix = match s.kind {
        SpectrumKind::Gelfand => "rho",
        SpectrumKind::Prime => "K",
    };
    (0..s.len()).map(|i| format!("{prefix}{i}")).collect()
}

pub fn zariski(a: &Subsemialgebra, kind: SpectrumKind) -> Result<FiniteTopology> {
    zariski_with(a, kind, Basis::Principal)
}

pub fn zariski_with(a: &Subsemialgebra, kind: SpectrumKind, basis: Basis) -> Result<FiniteTopology> {
    let spectrum = spectra::spectrum(a, kind)?;
    zariski_on(a, &spectrum, basis)
}

fn zariski_on(a: &Subsemialgebra, spectrum: &SpectrumSet, basis: Basis) -> Result<FiniteTopology> {
    let ideals = match basis {
        Basis::Principal => (0..a.len()).map(|i| principal_ideal(a, i)).collect::<Result<Vec<_>>>()?,
        Basis::AllIdeals => all_ideals(a)?,
    };
    let sets = ideals
        .iter()
        .map(|j| (0..spectrum.len()).filter(|&p| vanishes(a, &spectrum.points[p], j)).collect())
        .collect::<Vec<_>>();
    Ok(FiniteTopology::generated(point_labels(spectrum), sets))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeparationReport {
    pub t0: bool,
    pub t1: bool,
    pub compact: bool,
    pub indistinguishable_pairs: Vec<(usize, usize)>,
}

pub fn separation_report(t: &FiniteTopology) -> SeparationReport {
    let n = t.len();
    let indistinguishable_pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).filter(|&(x, y)| t.indistinguishable(x, y)).collect();
    let t1 = (0..n).all(|x| t.is_closed(&[x]));
    SeparationReport {
        t0: indistinguishable_pairs.is_empty(),
        t1,
        // finitely many points, so every open cover has a finite subcover
        compact: true,
        indistinguishable_pairs,
    }
}

/// Restriction `Spec(B) -> Spec(A)` along `A ⊆ B`, as point indices.
pub fn restriction_map(a: &Subsemialgebra, b: &Subsemialgebra, kind: SpectrumKind) -> Result<Vec<usize>> {
    let (sa, sb) = (spectra::spectrum(a, kind)?, spectra::spectrum(b, kind)?);
    sb.points
        .iter()
        .map(|p| {
            let r = restrict_point(p, a, b)?;
            sa.position(&r).ok_or_else(|| Error::FunctorLaw("restricted point is not in the spectrum".into()))
        })
        .collect()
}

fn preimage(map: &[usize], set: &[usize]) -> Vec<usize> {
    (0..map.len()).filter(|&p| set.contains(&map[p])).collect()
}

/// The restriction along `A ⊆ B` pulls closed sets back to closed sets.
pub fn check_continuity(a: &Subsemialgebra, b: &Subsemialgebra, kind: SpectrumKind) -> Result<bool> {
    let map = restriction_map(a, b, kind)?;
    let (ta, tb) = (zariski(a, kind)?, zariski(b, kind)?);
    Ok(is_continuous(&map, &tb, &ta))
}

/// `map: source -> target` is continuous.
pub fn is_continuous(map: &[usize], source: &FiniteTopology, target: &FiniteTopology) -> bool {
    target.closed_sets.iter().all(|c| source.is_closed(&preimage(map, c)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Quotient {
    pub space: FiniteTopology,
    /// Class of each original point.
    pub map: Vec<usize>,
}

/// Identifies topologically indistinguishable points.
pub fn kolmogorov_quotient(t: &FiniteTopology) -> Quotient {
    let n = t.len();
    let mut map = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for x in 0..n {
        if map[x] != usize::MAX {
            continue;
        }
        let class: Vec<usize> = (x..n).filter(|&y| t.indistinguishable(x, y)).collect();
        for &y in &class {
            map[y] = classes.len();
        }
        classes.push(class);
    }
    let points = classes
        .iter()
        .map(|c| {
            let names: Vec<&str> = c.iter().map(|&p| t.points[p].as_str()).collect();
            if names.len() == 1 {
                names[0].to_string()
            } else {
                format!("[{}]", names.join(","))
            }
        })
        .collect();
    let images = t.closed_sets.iter().map(|c| c.iter().map(|&p| map[p]).collect::<BTreeSet<_>>().into_iter().collect());
    Quotient { space: FiniteTopology::generated(points, images), map }
}

/// Same points and the same closed sets after relabelling through `bij`.
pub fn is_homeomorphism(bij: &[usize], source: &FiniteTopology, target: &FiniteTopology) -> bool {
    let mut seen = vec![false; target.len()];
    let bijective = bij.len() == target.len()
        && bij.iter().all(|&y| y < seen.len() && !std::mem::replace(&mut seen[y], true));
    bijective && source.closed_sets.len() == target.closed_sets.len() && is_continuous(bij, source, target) && {
        let inverse: Vec<usize> = (0..target.len()).map(|y| bij.iter().position(|&b| b == y).unwrap_or(0)).collect();
        is_continuous(&inverse, target, source)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientCheck {
    /// `ξ` as Gelfand index → prime index.
    pub xi: Vec<usize>,
    pub surjective: bool,
    pub continuous: bool,
    /// A subset of the prime spectrum is closed iff its preimage is.
    pub final_topology: bool,
    /// Two characters share a kernel iff they are indistinguishable.
    pub fibers_are_classes: bool,
    /// The induced map from the Kolmogorov quotient is a homeomorphism.
    pub quotient_homeomorphic: bool,
}

impl QuotientCheck {
    pub fn holds(&self) -> bool {
        self.surjective && self.continuous && self.final_topology && self.fibers_are_classes && self.quotient_homeomorphic
    }
}

/// Checks that `ξ: Spec_G(A) -> Spec_P(A)` is a topological quotient map
/// identifying exactly the indistinguishable characters.
pub fn verify_quotient_xi(a: &Subsemialgebra) -> Result<QuotientCheck> {
    if !is_zdf(a.quantale()) {
        return Err(Error::NotZdf(a.quantale().name().into()));
    }
    let (g, p) = (spectra::gelfand_spectrum(a)?, spectra::prime_spectrum(a)?);
    if p.len() > FINALITY_LIMIT {
        return Err(Error::BoundExceeded { size: p.len() as u128, bound: FINALITY_LIMIT as u128 });
    }
    let (tg, tp) = (zariski_on(a, &g, Basis::Principal)?, zariski_on(a, &p, Basis::Principal)?);
    let xi_map = g
        .points
        .iter()
        .map(|pt| {
            let SpectrumPoint::Character(rho) = pt else { unreachable!("gelfand spectrum") };
            let k = SpectrumPoint::Ideal(xi(a, rho)?);
            p.position(&k).ok_or_else(|| Error::RouteDisagreement("ξ(ρ) is not a prime k*-ideal".into()))
        })
        .collect::<Result<Vec<usize>>>()?;
    let surjective = (0..p.len()).all(|k| xi_map.contains(&k));
    let continuous = is_continuous(&xi_map, &tg, &tp);
    let final_topology = (0u32..1 << p.len()).all(|mask| {
        let set: Vec<usize> = (0..p.len()).filter(|k| mask & (1 << k) != 0).collect();
        tp.is_closed(&set) == tg.is_closed(&preimage(&xi_map, &set))
    });
    let fibers_are_classes =
        (0..g.len()).all(|x| (0..g.len()).all(|y| (xi_map[x] == xi_map[y]) == tg.indistinguishable(x, y)));
    let quotient = kolmogorov_quotient(&tg);
    let mut induced = vec![usize::MAX; quotient.space.len()];
    for (x, &c) in quotient.map.iter().enumerate() {
        induced[c] = xi_map[x];
    }
    let quotient_homeomorphic = is_homeomorphism(&induced, &quotient.space, &tp);
    Ok(QuotientCheck { xi: xi_map, surjective, continuous, final_topology, fibers_are_classes, quotient_homeomorphic })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpaceReport {
    pub kind: SpectrumKind,
    pub topology: FiniteTopology,
    pub separation: SeparationReport,
    pub quotient: Quotient,
}

#[derive(Clone, Debug, Serialize)]
pub struct TopologyReport {
    pub algebra: String,
    pub gelfand: SpaceReport,
    pub prime: SpaceReport,
    /// `None` off the ZDF hypothesis.
    pub xi_quotient: Option<QuotientCheck>,
}

pub fn topology_report(a: &Subsemialgebra) -> Result<TopologyReport> {
    let space = |kind| -> Result<SpaceReport> {
        let topology = zariski(a, kind)?;
        Ok(SpaceReport { kind, separation: separation_report(&topology), quotient: kolmogorov_quotient(&topology), topology })
    };
    Ok(TopologyReport {
        algebra: a.id().to_string(),
        gelfand: space(SpectrumKind::Gelfand)?,
        prime: space(SpectrumKind::Prime)?,
        xi_quotient: if is_zdf(a.quantale()) { Some(verify_quotient_xi(a)?) } else { None },
    })
}
