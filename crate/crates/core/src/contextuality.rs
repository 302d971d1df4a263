//! Spectral presheaves over the algebra poset, their global sections, and the
//! contextuality verdict.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::csp::{Constraint, Csp};
use crate::error::{Error, Result};
use crate::quantale::{is_zdf, verify_quantale, Quantale};
use crate::relations::{self, FiniteSet};
use crate::spectra::{self, characters_to_two, kernel_two, restrict_point, tau, xi, SpectrumKind, SpectrumPoint, SpectrumSet};
use crate::subalgebra::{enumerate_vn, primitive_idempotents, AlgebraPoset, Decomposition, EnumerationMode};

/// A contravariant functor from the algebra poset to finite sets.
#[derive(Debug)]
pub struct Presheaf {
    kind: SpectrumKind,
    poset: Arc<AlgebraPoset>,
    values: Vec<SpectrumSet>,
    /// For `i ≤ j`, the image in `values[i]` of each point of `values[j]`.
    restrictions: BTreeMap<(usize, usize), Vec<usize>>,
    decompositions: OnceLock<Result<Vec<Decomposition>, String>>,
}

/// One point per algebra, indexed like the poset objects.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Section {
    pub choice: Vec<usize>,
}

/// Materializes both values and restriction maps, and checks the functor laws.
pub fn build_presheaf(poset: &Arc<AlgebraPoset>, kind: SpectrumKind) -> Result<Presheaf> {
    let objects = poset.objects();
    let values = objects.par_iter().map(|a| spectra::spectrum(a, kind)).collect::<Result<Vec<_>>>()?;
    let lookups: Vec<HashMap<&SpectrumPoint, usize>> =
        values.iter().map(|v| v.points.iter().enumerate().map(|(k, p)| (p, k)).collect()).collect();
    let pairs: Vec<(usize, usize)> =
        (0..objects.len()).flat_map(|i| (0..objects.len()).map(move |j| (i, j))).filter(|&(i, j)| poset.leq(i, j)).collect();
    let maps = pairs
        .par_iter()
        .map(|&(i, j)| {
            values[j]
                .points
                .iter()
                .map(|p| {
                    let r = restrict_point(p, &objects[i], &objects[j])?;
                    lookups[i].get(&r).copied().ok_or_else(|| {
                        Error::FunctorLaw(format!("restriction from #{j} to #{i} leaves the spectrum"))
                    })
                })
                .collect::<Result<Vec<usize>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let restrictions: BTreeMap<(usize, usize), Vec<usize>> = pairs.into_iter().zip(maps).collect();
    let p = Presheaf { kind, poset: poset.clone(), values, restrictions, decompositions: OnceLock::new() };
    p.check_functor_laws()?;
    Ok(p)
}

impl Presheaf {
    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn poset(&self) -> &Arc<AlgebraPoset> {
        &self.poset
    }

    pub fn values(&self) -> &[SpectrumSet] {
        &self.values
    }

    /// Restriction from object `j` down to object `i ≤ j`.
    pub fn restriction(&self, i: usize, j: usize) -> Option<&[usize]> {
        self.restrictions.get(&(i, j)).map(Vec::as_slice)
    }

    fn check_functor_laws(&self) -> Result<()> {
        let n = self.values.len();
        for i in 0..n {
            let id = self.restriction(i, i).ok_or_else(|| Error::FunctorLaw(format!("no identity on #{i}")))?;
            if id.iter().enumerate().any(|(k, &v)| k != v) {
                return Err(Error::FunctorLaw(format!("restriction along the identity of #{i} is not the identity")));
            }
        }
        for (&(i, j), ij) in &self.restrictions {
            for k in (0..n).filter(|&k| k != j && self.poset.leq(j, k)) {
                let jk = &self.restrictions[&(j, k)];
                let ik = &self.restrictions[&(i, k)];
                if ik.iter().zip(jk).any(|(&direct, &step)| direct != ij[step]) {
                    return Err(Error::FunctorLaw(format!("restrictions #{k}→#{j}→#{i} do not compose")));
                }
            }
        }
        Ok(())
    }

    fn edges(&self) -> Vec<(usize, usize, Vec<usize>)> {
        self.poset.hasse().iter().map(|&(i, j)| (i, j, self.restrictions[&(i, j)].clone())).collect()
    }

    /// Naturality along every Hasse edge.
    pub fn is_natural(&self, s: &Section) -> bool {
        s.choice.len() == self.values.len()
            && s.choice.iter().zip(&self.values).all(|(&c, v)| c < v.len())
            && self.poset.hasse().iter().all(|&(i, j)| self.restrictions[&(i, j)][s.choice[j]] == s.choice[i])
    }

    fn decompositions(&self) -> Result<&[Decomposition]> {
        let d = self.decompositions.get_or_init(|| {
            self.poset
                .objects()
                .par_iter()
                .map(primitive_idempotents)
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.to_string())
        });
        d.as_deref().map_err(|e| Error::Decomposition(e.clone()))
    }

    fn require_prime_zdf(&self) -> Result<()> {
        if self.kind != SpectrumKind::Prime {
            return Err(Error::InvalidConfig("this operation needs the prime presheaf".into()));
        }
        let q = self.poset.quantale();
        if !is_zdf(q) {
            return Err(Error::NotZdf(q.name().into()));
        }
        Ok(())
    }

    /// The primitive idempotent of object `i` outside the chosen prime ideal.
    fn selected_idempotent(&self, i: usize, point: usize) -> Result<usize> {
        let SpectrumPoint::Ideal(k) = &self.values[i].points[point] else {
            return Err(Error::InvalidConfig("this operation needs the prime presheaf".into()));
        };
        let outside: Vec<usize> =
            self.decompositions()?[i].idempotents.iter().copied().filter(|e| k.members.binary_search(e).is_err()).collect();
        match outside.as_slice() {
            [e] => Ok(*e),
            _ => Err(Error::InconsistentSection(format!(
                "{} primitive idempotents of #{i} lie outside the chosen ideal",
                outside.len()
            ))),
        }
    }
}

/// All sections of the presheaf with point counts `sizes` and restriction
/// maps `(lower, upper, map)`, in lexicographic order.
pub fn sections_from_tables(sizes: &[usize], edges: &[(usize, usize, Vec<usize>)]) -> Vec<Section> {
    let constraints = edges.iter().map(|(lo, hi, map)| Constraint::functional(*hi, *lo, map, sizes[*lo])).collect();
    Csp::new(sizes.to_vec(), constraints).solve_all().into_iter().map(|choice| Section { choice }).collect()
}

pub fn global_sections(p: &Presheaf) -> Vec<Section> {
    let sizes: Vec<usize> = p.values.iter().map(SpectrumSet::len).collect();
    sections_from_tables(&sizes, &p.edges())
}

/// The section determined by the point `x` of the carrier: on each algebra,
/// the prime ideal annihilated by the primitive idempotent supporting `x`.
pub fn canonical_section(p: &Presheaf, x: usize) -> Result<Section> {
    p.require_prime_zdf()?;
    let carrier = p.poset.carrier();
    if x >= carrier.len() {
        return Err(Error::InvalidParameter(format!("point {x} is outside a carrier of size {}", carrier.len())));
    }
    let decs = p.decompositions()?;
    let mut choice = Vec::with_capacity(p.values.len());
    for (i, a) in p.poset.objects().iter().enumerate() {
        let t = a.tables()?;
        let m = a.len();
        let c = decs[i]
            .supports
            .iter()
            .position(|s| s.contains(&x))
            .ok_or_else(|| Error::InconsistentSection(format!("no idempotent of #{i} supports point {x}")))?;
        let e = decs[i].idempotents[c];
        let members: Vec<usize> = (0..m).filter(|&b| t.ring.mul[e * m + b] == t.ring.zero).collect();
        let point = SpectrumPoint::Ideal(spectra::PrimeIdeal { algebra: a.id().to_string(), members });
        choice.push(
            p.values[i]
                .position(&point)
                .ok_or_else(|| Error::InconsistentSection(format!("annihilator of e_x in #{i} is not a prime k*-ideal")))?,
        );
    }
    let s = Section { choice };
    if !p.is_natural(&s) {
        return Err(Error::InconsistentSection(format!("canonical section of point {x} is not natural")));
    }
    Ok(s)
}

/// The point of the carrier singled out by a prime section on the diagonal
/// algebra, after checking that the idempotents it selects on all algebras
/// pairwise overlap.
pub fn section_element(p: &Presheaf, s: &Section) -> Result<usize> {
    p.require_prime_zdf()?;
    if !p.is_natural(s) {
        return Err(Error::InconsistentSection("not a natural family".into()));
    }
    let d = p.poset.diagonal_index().ok_or(Error::DiagonalAbsent)?;
    let objects = p.poset.objects();
    let ed = p.selected_idempotent(d, s.choice[d])?;
    let supp = relations::support(&objects[d].members()[ed]).supp;
    let [x] = supp.as_slice() else {
        return Err(Error::InconsistentSection("diagonal idempotent is not a point projection".into()));
    };
    let selected: Vec<_> = (0..objects.len())
        .map(|i| p.selected_idempotent(i, s.choice[i]).map(|e| objects[i].members()[e].clone()))
        .collect::<Result<_>>()?;
    for (i, e) in selected.iter().enumerate() {
        for (j, f) in selected.iter().enumerate().skip(i + 1) {
            if relations::compose(e, f)?.is_zero() {
                return Err(Error::InconsistentSection(format!("selected idempotents of #{i} and #{j} are orthogonal")));
            }
        }
    }
    Ok(*x)
}

/// Whether the prime route found a section, or `None` off its hypotheses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Routes {
    pub direct_gelfand: bool,
    pub prime_via_tau: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ElementEntry {
    pub prime_section: usize,
    pub element: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub object: String,
    pub quantale: String,
    pub mode: EnumerationMode,
    pub complete: bool,
    /// The quantale is ZDF, so the prime route and canonical sections apply.
    pub hypotheses_met: bool,
    pub contextual: bool,
    /// Algebra ids, in the order used by every section table.
    pub objects: Vec<String>,
    pub section_count: usize,
    /// Global sections of the Gelfand presheaf.
    pub sections: Vec<Section>,
    pub prime_section_count: Option<usize>,
    pub prime_sections: Vec<Section>,
    /// The carrier point each prime section determines.
    pub element_map: Vec<ElementEntry>,
    pub canonical_section_count: Option<usize>,
    /// `section_element ∘ canonical_section` is the identity on the carrier.
    pub canonical_round_trip: Option<bool>,
    pub routes: Routes,
    pub witness: String,
}

pub fn ks_verdict(x: &Arc<FiniteSet>, q: &Arc<Quantale>, mode: EnumerationMode) -> Result<Verdict> {
    let report = verify_quantale(q);
    if !report.passed {
        let names: Vec<&str> = report.violations.iter().map(|v| v.axiom.as_str()).collect();
        return Err(Error::InvalidParameter(format!("`{}` is not a quantale: {}", q.name(), names.join(", "))));
    }
    let poset = Arc::new(enumerate_vn(x, q, mode)?);
    ks_verdict_on(&poset)
}

/// The verdict over an already enumerated poset.
pub fn ks_verdict_on(poset: &Arc<AlgebraPoset>) -> Result<Verdict> {
    let q = poset.quantale();
    let x = poset.carrier();
    let gelfand = build_presheaf(poset, SpectrumKind::Gelfand)?;
    let sections = global_sections(&gelfand);
    let direct = !sections.is_empty();
    let zdf = is_zdf(q);
    let mut verdict = Verdict {
        object: format!("{}{{{}}}", x.name(), x.points().iter().map(ToString::to_string).collect::<Vec<_>>().join(",")),
        quantale: q.name().to_string(),
        mode: poset.mode(),
        complete: poset.complete(),
        hypotheses_met: zdf,
        contextual: !direct,
        objects: poset.objects().iter().map(|a| a.id().to_string()).collect(),
        section_count: sections.len(),
        sections,
        prime_section_count: None,
        prime_sections: Vec::new(),
        element_map: Vec::new(),
        canonical_section_count: None,
        canonical_round_trip: None,
        routes: Routes { direct_gelfand: direct, prime_via_tau: None },
        witness: String::new(),
    };
    if !zdf {
        verdict.witness = format!(
            "{} is not zero-divisor free; decided by the direct Gelfand search only ({} sections)",
            q.name(),
            verdict.section_count
        );
        return Ok(verdict);
    }

    let prime = build_presheaf(poset, SpectrumKind::Prime)?;
    let prime_sections = global_sections(&prime);
    let via_tau = prime_route(&gelfand, &prime, &prime_sections)?;
    check_xi(&gelfand, &prime, &verdict.sections)?;
    if via_tau != direct {
        return Err(Error::RouteDisagreement(format!(
            "direct search found {} sections, the prime route found {}",
            verdict.section_count,
            prime_sections.len()
        )));
    }
    verdict.routes.prime_via_tau = Some(via_tau);
    verdict.element_map = prime_sections
        .iter()
        .enumerate()
        .map(|(k, s)| {
            section_element(&prime, s).map(|e| ElementEntry { prime_section: k, element: x.points()[e].to_string() })
        })
        .collect::<Result<_>>()?;
    let canonical = (0..x.len()).map(|p| canonical_section(&prime, p)).collect::<Result<Vec<_>>>()?;
    let mut distinct = canonical.clone();
    distinct.sort();
    distinct.dedup();
    verdict.canonical_section_count = Some(distinct.len());
    verdict.canonical_round_trip = Some(
        canonical.iter().enumerate().map(|(p, s)| section_element(&prime, s).map(|e| e == p)).collect::<Result<Vec<_>>>()?.into_iter().all(|b| b),
    );
    verdict.prime_section_count = Some(prime_sections.len());
    verdict.prime_sections = prime_sections;
    verdict.witness = if direct {
        format!(
            "{} Gelfand sections; every carrier point gives a canonical prime section, mapped to a Gelfand section by τ",
            verdict.section_count
        )
    } else {
        "no natural choice of characters exists".into()
    };
    Ok(verdict)
}

/// Maps prime sections to Gelfand sections through `τ`, objectwise choosing
/// the unique `γ: A -> 2` with the given kernel. Returns whether any exist.
fn prime_route(gelfand: &Presheaf, prime: &Presheaf, prime_sections: &[Section]) -> Result<bool> {
    let objects = gelfand.poset.objects();
    let tau_tables = objects
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            let twos = characters_to_two(a)?;
            prime.values[i]
                .points
                .iter()
                .map(|k| {
                    let SpectrumPoint::Ideal(k) = k else { unreachable!("prime presheaf") };
                    let gammas: Vec<_> = twos.iter().filter(|g| kernel_two(g) == *k).collect();
                    let [gamma] = gammas.as_slice() else {
                        return Err(Error::RouteDisagreement(format!(
                            "{} maps to 2 have kernel {:?} on #{i}",
                            gammas.len(),
                            k.members
                        )));
                    };
                    let rho = SpectrumPoint::Character(tau(a, gamma)?);
                    gelfand.values[i]
                        .position(&rho)
                        .ok_or_else(|| Error::RouteDisagreement(format!("τ(γ) is not a character of #{i}")))
                })
                .collect::<Result<Vec<usize>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    for s in prime_sections {
        let image = Section { choice: s.choice.iter().enumerate().map(|(i, &k)| tau_tables[i][k]).collect() };
        if !gelfand.is_natural(&image) {
            return Err(Error::RouteDisagreement("τ does not carry a prime section to a Gelfand section".into()));
        }
    }
    Ok(!prime_sections.is_empty())
}

/// `ξ` carries every Gelfand section to a prime section.
fn check_xi(gelfand: &Presheaf, prime: &Presheaf, sections: &[Section]) -> Result<()> {
    let objects = gelfand.poset.objects();
    for s in sections {
        let mut choice = Vec::with_capacity(objects.len());
        for (i, &k) in s.choice.iter().enumerate() {
            let SpectrumPoint::Character(rho) = &gelfand.values[i].points[k] else { unreachable!("gelfand presheaf") };
            let ideal = SpectrumPoint::Ideal(xi(&objects[i], rho)?);
            choice.push(
                prime.values[i]
                    .position(&ideal)
                    .ok_or_else(|| Error::RouteDisagreement(format!("ξ(ρ) is not a prime k*-ideal of #{i}")))?,
            );
        }
        if !prime.is_natural(&Section { choice }) {
            return Err(Error::RouteDisagreement("ξ does not carry a Gelfand section to a prime section".into()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantale::builtin_quantale;

    fn poset(tag: &str, n: usize) -> Arc<AlgebraPoset> {
        let q = Arc::new(builtin_quantale(tag).unwrap());
        let x = Arc::new(FiniteSet::range("X", n));
        Arc::new(enumerate_vn(&x, &q, EnumerationMode::Exhaustive).unwrap())
    }

    #[test]
    fn single_object_sections_are_its_points() {
        let p = poset("godel3", 1);
        assert_eq!(p.len(), 1);
        let g = build_presheaf(&p, SpectrumKind::Gelfand).unwrap();
        assert_eq!(global_sections(&g).len(), g.values()[0].len());
        let pr = build_presheaf(&p, SpectrumKind::Prime).unwrap();
        assert_eq!(canonical_section(&pr, 0).unwrap(), Section { choice: vec![0] });
    }

    #[test]
    fn incompatible_restrictions_have_no_sections() {
        // 0 ≤ 1 ≤ 2 with 0 ≤ 2 restricting inconsistently
        let edges = vec![(0, 1, vec![0]), (1, 2, vec![0, 0]), (0, 2, vec![1, 1])];
        assert!(sections_from_tables(&[2, 1, 2], &edges).is_empty());
    }

    #[test]
    fn boolean_two_point_sections() {
        let p = poset("boolean2", 2);
        let pr = build_presheaf(&p, SpectrumKind::Prime).unwrap();
        let sections = global_sections(&pr);
        assert!(sections.len() >= 2);
        let mut elements: Vec<usize> = sections.iter().map(|s| section_element(&pr, s).unwrap()).collect();
        elements.sort();
        elements.dedup();
        assert_eq!(elements, vec![0, 1]);
        for x in 0..2 {
            let s = canonical_section(&pr, x).unwrap();
            assert_eq!(section_element(&pr, &s).unwrap(), x);
        }
    }

    #[test]
    fn verdicts() {
        let q = Arc::new(builtin_quantale("boolean2").unwrap());
        let x = Arc::new(FiniteSet::range("X", 2));
        let v = ks_verdict(&x, &q, EnumerationMode::Exhaustive).unwrap();
        assert!(!v.contextual);
        assert_eq!(v.routes, Routes { direct_gelfand: true, prime_via_tau: Some(true) });
        assert_eq!(v.canonical_section_count, Some(2));
        assert_eq!(v.canonical_round_trip, Some(true));

        let q = Arc::new(builtin_quantale("lukasiewicz3").unwrap());
        let v = ks_verdict(&x, &q, EnumerationMode::Exhaustive).unwrap();
        assert!(!v.hypotheses_met);
        assert_eq!(v.routes.prime_via_tau, None);
    }

    #[test]
    fn prime_operations_refuse_the_gelfand_presheaf() {
        let p = poset("boolean2", 1);
        let g = build_presheaf(&p, SpectrumKind::Gelfand).unwrap();
        assert!(canonical_section(&g, 0).is_err());
    }
}
