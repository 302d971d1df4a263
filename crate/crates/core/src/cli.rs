//! The batch driver behind the `qspec` binary: runs a pipeline, collects
//! failed checks, and renders a report.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::contextuality::{
    build_presheaf, canonical_section, global_sections, ks_verdict_on, section_element, ElementEntry, Section, Verdict,
};
use crate::error::{Error, Result};
use crate::quantale::{endomorphisms, is_zdf, verify_quantale, zero_divisor_witness, AxiomReport, Elem, Quantale};
use crate::relations::{self, FiniteSet, QRel};
use crate::spectra::{
    characters, characters_to_two, is_character, kernel_two, prime_scan, tau, xi, SpectrumKind,
};
use crate::subalgebra::{enumerate_vn, primitive_idempotents, AlgebraPoset, EnumerationMode, PosetReport};
use crate::zariski::{check_continuity, separation_report, topology_report, zariski, zariski_with, Basis, TopologyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Relation-law spot checks run by `check-quantale`.
pub const SPOT_CHECK_TRIALS: usize = 256;
/// Largest algebra for which the principal-ideal basis is compared with the
/// all-ideals basis.
pub const BASIS_ORACLE_LIMIT: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    CheckQuantale,
    Algebras,
    Spectrum,
    Sections,
    Verdict,
    Topology,
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckQuantale => "check-quantale",
            Command::Algebras => "algebras",
            Command::Spectrum => "spectrum",
            Command::Sections => "sections",
            Command::Verdict => "verdict",
            Command::Topology => "topology",
            Command::All => "all",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuantaleSource {
    Builtin(String),
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Dot,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "dot" => Ok(Format::Dot),
            _ => Err(Error::InvalidConfig(format!("unknown format `{s}`"))),
        }
    }
}

/// Names an object of the algebra poset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraSelector {
    Trivial,
    Diagonal,
    Index(usize),
}

impl FromStr for AlgebraSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trivial" => Ok(AlgebraSelector::Trivial),
            "diagonal" => Ok(AlgebraSelector::Diagonal),
            _ => s
                .parse()
                .map(AlgebraSelector::Index)
                .map_err(|_| Error::InvalidConfig(format!("algebra selector `{s}` is not trivial, diagonal or an index"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub quantale: QuantaleSource,
    pub size: usize,
    pub mode: EnumerationMode,
    pub format: Format,
    pub seed: u64,
    pub algebra: Option<AlgebraSelector>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub check: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub quantale: String,
    pub size: usize,
    pub mode: EnumerationMode,
    pub seed: u64,
    pub passed: bool,
    pub failures: Vec<Failure>,
    pub result: CommandResult,
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum CommandResult {
    Quantale(QuantaleResult),
    Algebras(AlgebrasResult),
    Spectrum(SpectrumResult),
    Sections(SectionsResult),
    Verdict(Box<Verdict>),
    Topology(TopologyResult),
    All(Box<AllResult>),
}

#[derive(Clone, Debug, Serialize)]
pub struct QuantaleResult {
    pub name: String,
    pub elements: Vec<String>,
    pub axioms: AxiomReport,
    pub zdf: bool,
    pub zero_divisor: Option<(String, String)>,
    /// Value tables of every rig endomorphism.
    pub endomorphisms: Vec<Vec<String>>,
    pub spot_checks: SpotChecks,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpotChecks {
    pub trials: usize,
    pub mismatches: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlgebrasResult {
    pub poset: PosetReport,
    /// Supports of the primitive idempotents of each object, on ZDF quantales.
    pub decompositions: Option<Vec<Vec<Vec<usize>>>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlgebraSpectra {
    pub index: usize,
    pub id: String,
    pub size: usize,
    /// Value tables of the characters to `Q`.
    pub gelfand: Vec<Vec<String>>,
    /// Member lists of the prime k*-ideals.
    pub prime: Vec<Vec<usize>>,
    pub improper_excluded: usize,
    pub characters_to_two: Option<usize>,
    /// Index of `ξ(ρ)` in `prime` for each character.
    pub xi: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumResult {
    pub algebras: Vec<AlgebraSpectra>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CanonicalEntry {
    pub element: String,
    pub section: Section,
}

#[derive(Clone, Debug, Serialize)]
pub struct SectionsResult {
    pub objects: Vec<String>,
    pub gelfand_sections: Vec<Section>,
    pub prime_sections: Option<Vec<Section>>,
    pub element_map: Vec<ElementEntry>,
    pub canonical: Vec<CanonicalEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TopologyEntry {
    pub index: usize,
    pub report: TopologyReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct TopologyResult {
    pub algebras: Vec<TopologyEntry>,
    /// Hasse edges whose restriction maps were checked for continuity.
    pub continuity_edges_checked: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AllResult {
    pub quantale: QuantaleResult,
    pub algebras: AlgebrasResult,
    pub spectrum: SpectrumResult,
    pub sections: SectionsResult,
    pub verdict: Verdict,
    pub topology: TopologyResult,
}

/// Exit status and rendered output of a run.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub code: i32,
    pub output: String,
    pub diagnostics: String,
}

/// Configuration and resource errors end the run with status 2; anything
/// else raised by a check is reported as a failure of that check.
fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Parse(_)
            | Error::Arity { .. }
            | Error::UnknownElement(_)
            | Error::UnknownBuiltin(_)
            | Error::InvalidParameter(_)
            | Error::BoundExceeded { .. }
            | Error::InvalidConfig(_)
            | Error::Json(_)
            | Error::Io(_)
    )
}

pub fn load_quantale(source: &QuantaleSource) -> Result<Quantale> {
    match source {
        QuantaleSource::Builtin(tag) => crate::quantale::builtin_quantale(tag),
        QuantaleSource::File(path) => Quantale::load(&std::fs::read_to_string(path)?),
    }
}

pub fn run(config: &RunConfig) -> Outcome {
    match execute(config) {
        Ok((report, dot)) => {
            let output = match config.format {
                Format::Json => serde_json::to_string_pretty(&report).expect("serializable") + "\n",
                Format::Dot => dot.unwrap_or_default(),
                Format::Text => render_text(&report),
            };
            let code = if report.passed { EXIT_OK } else { EXIT_CHECK_FAILED };
            let diagnostics = report.failures.iter().map(|f| format!("FAILED {}: {}\n", f.check, f.detail)).collect();
            Outcome { code, output, diagnostics }
        }
        Err(e) => Outcome {
            code: if is_config_error(&e) { EXIT_CONFIG } else { EXIT_CHECK_FAILED },
            output: String::new(),
            diagnostics: format!("error: {e}\n"),
        },
    }
}

struct Ctx {
    q: Arc<Quantale>,
    x: Arc<FiniteSet>,
    config: RunConfig,
    failures: Vec<Failure>,
}

impl Ctx {
    fn fail(&mut self, check: &str, detail: impl Into<String>) {
        self.failures.push(Failure { check: check.to_string(), detail: detail.into() });
    }

    fn expect(&mut self, ok: bool, check: &str, detail: impl FnOnce() -> String) {
        if !ok {
            self.fail(check, detail());
        }
    }

    /// Passes configuration errors up, records the rest as failures.
    fn attempt<T>(&mut self, check: &str, r: Result<T>) -> Result<Option<T>> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(e) if is_config_error(&e) => Err(e),
            Err(e) => {
                self.fail(check, e.to_string());
                Ok(None)
            }
        }
    }

    fn selected(&self, poset: &AlgebraPoset) -> Result<Vec<usize>> {
        let Some(sel) = self.config.algebra else { return Ok((0..poset.len()).collect()) };
        let index = match sel {
            AlgebraSelector::Trivial => poset.trivial_index(),
            AlgebraSelector::Diagonal => poset.diagonal_index(),
            AlgebraSelector::Index(i) => (i < poset.len()).then_some(i),
        };
        index
            .map(|i| vec![i])
            .ok_or_else(|| Error::InvalidConfig(format!("no algebra {sel:?} among {} objects", poset.len())))
    }
}

fn execute(config: &RunConfig) -> Result<(Report, Option<String>)> {
    if config.format == Format::Dot && config.command != Command::Algebras {
        return Err(Error::InvalidConfig("dot output is only available for `algebras`".into()));
    }
    if config.size == 0 {
        return Err(Error::InvalidConfig("--size must be at least 1".into()));
    }
    let q = Arc::new(load_quantale(&config.quantale)?);
    let x = Arc::new(FiniteSet::range("X", config.size));
    let mut ctx = Ctx { q: q.clone(), x: x.clone(), config: config.clone(), failures: Vec::new() };
    let needs_poset = config.command != Command::CheckQuantale;
    let poset = if needs_poset { Some(Arc::new(enumerate_vn(&x, &q, config.mode)?)) } else { None };
    let mut dot = None;
    let result = match config.command {
        Command::CheckQuantale => CommandResult::Quantale(check_quantale(&mut ctx)),
        Command::Algebras => {
            let p = poset.as_ref().expect("enumerated");
            dot = Some(p.to_dot());
            CommandResult::Algebras(algebras(&mut ctx, p)?)
        }
        Command::Spectrum => CommandResult::Spectrum(spectrum(&mut ctx, poset.as_ref().expect("enumerated"))?),
        Command::Sections => CommandResult::Sections(sections(&mut ctx, poset.as_ref().expect("enumerated"))?),
        Command::Verdict => CommandResult::Verdict(Box::new(verdict(&mut ctx, poset.as_ref().expect("enumerated"))?)),
        Command::Topology => CommandResult::Topology(topology(&mut ctx, poset.as_ref().expect("enumerated"))?),
        Command::All => {
            let p = poset.as_ref().expect("enumerated");
            CommandResult::All(Box::new(AllResult {
                quantale: check_quantale(&mut ctx),
                algebras: algebras(&mut ctx, p)?,
                spectrum: spectrum(&mut ctx, p)?,
                sections: sections(&mut ctx, p)?,
                verdict: verdict(&mut ctx, p)?,
                topology: topology(&mut ctx, p)?,
            }))
        }
    };
    let report = Report {
        command: config.command.name(),
        quantale: q.name().to_string(),
        size: config.size,
        mode: config.mode,
        seed: config.seed,
        passed: ctx.failures.is_empty(),
        failures: ctx.failures,
        result,
    };
    Ok((report, dot))
}

fn random_relation(rng: &mut ChaCha8Rng, q: &Arc<Quantale>, dom: &Arc<FiniteSet>, cod: &Arc<FiniteSet>) -> QRel {
    let entries = (0..dom.len() * cod.len()).map(|_| Elem(rng.random_range(0..q.len()) as u8)).collect();
    QRel::from_entries(q, dom, cod, entries).expect("valid entries")
}

/// Category, dagger and enrichment laws on random relations.
fn spot_check(q: &Arc<Quantale>, size: usize, seed: u64, trials: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sets: Vec<Arc<FiniteSet>> = (1..=size.max(1)).map(|n| Arc::new(FiniteSet::range(format!("S{n}"), n))).collect();
    let mut mismatches = 0;
    for _ in 0..trials {
        let pick = |rng: &mut ChaCha8Rng| sets[rng.random_range(0..sets.len())].clone();
        let (a, b, c, d) = (pick(&mut rng), pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let f = random_relation(&mut rng, q, &a, &b);
        let f2 = random_relation(&mut rng, q, &a, &b);
        let g = random_relation(&mut rng, q, &b, &c);
        let h = random_relation(&mut rng, q, &c, &d);
        let s = Elem(rng.random_range(0..q.len()) as u8);
        let laws = || -> Result<bool> {
            let assoc = relations::compose(&relations::compose(&f, &g)?, &h)? == relations::compose(&f, &relations::compose(&g, &h)?)?;
            let unit = relations::compose(&f, &QRel::identity(q, &b))? == f && relations::compose(&QRel::identity(q, &a), &f)? == f;
            let dag = relations::dagger(&relations::compose(&f, &g)?)
                == relations::compose(&relations::dagger(&g), &relations::dagger(&f))?
                && relations::dagger(&relations::dagger(&f)) == f;
            let add = relations::add(&f, &f2)? == relations::biproduct_convolution(&f, &f2)?;
            let scalar = relations::scalar_mul(s, &f)? == relations::scalar_mul_via_tensor(s, &f)?;
            Ok(assoc && unit && dag && add && scalar)
        };
        if !laws().unwrap_or(false) {
            mismatches += 1;
        }
    }
    mismatches
}

fn check_quantale(ctx: &mut Ctx) -> QuantaleResult {
    let q = ctx.q.clone();
    let axioms = verify_quantale(&q);
    for v in &axioms.violations {
        ctx.fail("quantale_axioms", format!("{} violated at ({})", v.axiom, v.witness.join(", ")));
    }
    let endos = endomorphisms(&q);
    ctx.expect(endos.iter().any(|h| h.is_identity()), "endomorphisms", || "identity is missing".into());
    let closed = endos.iter().all(|f| endos.iter().all(|g| f.then(g).is_ok_and(|h| endos.contains(&h))));
    ctx.expect(closed, "endomorphisms", || "not closed under composition".into());
    let mismatches = spot_check(&q, ctx.config.size, ctx.config.seed, SPOT_CHECK_TRIALS);
    ctx.expect(mismatches == 0, "relation_laws", || format!("{mismatches} of {SPOT_CHECK_TRIALS} random cases failed"));
    QuantaleResult {
        name: q.name().to_string(),
        elements: q.elems().map(|e| q.element_name(e).to_string()).collect(),
        zdf: is_zdf(&q),
        zero_divisor: zero_divisor_witness(&q).map(|(a, b)| (q.element_name(a).to_string(), q.element_name(b).to_string())),
        endomorphisms: endos.iter().map(|h| h.map.iter().map(|&e| q.element_name(e).to_string()).collect()).collect(),
        axioms,
        spot_checks: SpotChecks { trials: SPOT_CHECK_TRIALS, mismatches },
    }
}

fn algebras(ctx: &mut Ctx, poset: &AlgebraPoset) -> Result<AlgebrasResult> {
    let trivial = poset.trivial_index();
    ctx.expect(
        trivial.is_some_and(|t| (0..poset.len()).all(|j| poset.leq(t, j))),
        "trivial_minimum",
        || "the trivial algebra is not below every object".into(),
    );
    for (i, a) in poset.objects().iter().enumerate() {
        let f = a.flags();
        ctx.expect(f.unital && f.star_closed && f.commutative && a.is_closed(), "algebra_flags", || {
            format!("#{i} is not a closed commutative unital *-algebra: {f:?}")
        });
        ctx.expect(a.closed_under_all_joins(), "joins", || format!("#{i} is not closed under joins of member subsets"));
    }
    let decompositions = if is_zdf(&ctx.q) {
        let mut out = Vec::with_capacity(poset.len());
        for (i, a) in poset.objects().iter().enumerate() {
            match ctx.attempt("decomposition", primitive_idempotents(a))? {
                Some(d) => {
                    for f in d.check(a) {
                        ctx.fail("decomposition", format!("#{i}: {f}"));
                    }
                    out.push(d.supports);
                }
                None => out.push(Vec::new()),
            }
        }
        Some(out)
    } else {
        None
    };
    Ok(AlgebrasResult { poset: poset.report(), decompositions })
}

fn spectrum(ctx: &mut Ctx, poset: &AlgebraPoset) -> Result<SpectrumResult> {
    let q = ctx.q.clone();
    let zdf = is_zdf(&q);
    let mut out = Vec::new();
    for i in ctx.selected(poset)? {
        let a = &poset.objects()[i];
        let Some(rhos) = ctx.attempt("gelfand_spectrum", characters(a))? else { continue };
        let Some(scan) = ctx.attempt("prime_spectrum", prime_scan(a))? else { continue };
        for rho in &rhos {
            ctx.expect(is_character(a, &q, &rho.values), "characters", || format!("#{i}: {:?} is not a character", rho.values));
        }
        let mut entry = AlgebraSpectra {
            index: i,
            id: a.id().to_string(),
            size: a.len(),
            gelfand: rhos.iter().map(|r| r.values.iter().map(|&e| q.element_name(e).to_string()).collect()).collect(),
            prime: scan.primes.clone(),
            improper_excluded: scan.improper_excluded,
            characters_to_two: None,
            xi: None,
        };
        if zdf {
            let Some(gammas) = ctx.attempt("characters_to_two", characters_to_two(a))? else { continue };
            let mut kernels: Vec<Vec<usize>> = gammas.iter().map(|g| kernel_two(g).members).collect();
            kernels.sort();
            ctx.expect(kernels == scan.primes, "kernel_bijection", || {
                format!("#{i}: kernels of maps to 2 differ from the prime spectrum")
            });
            if let Some(d) = ctx.attempt("decomposition", primitive_idempotents(a))? {
                for g in &gammas {
                    let ones = d.idempotents.iter().filter(|&&e| g.values[e].index() != 0).count();
                    ctx.expect(ones == 1, "one_idempotent", || format!("#{i}: a map to 2 sends {ones} primitive idempotents to 1"));
                }
            }
            for g in &gammas {
                let back = tau(a, g).and_then(|t| xi(a, &t));
                ctx.expect(back.as_ref().is_ok_and(|k| *k == kernel_two(g)), "xi_tau", || format!("#{i}: ξ∘τ is not the kernel"));
            }
            let xi_map: Vec<usize> = rhos
                .iter()
                .filter_map(|r| xi(a, r).ok().and_then(|k| scan.primes.iter().position(|p| *p == k.members)))
                .collect();
            ctx.expect(xi_map.len() == rhos.len(), "xi", || format!("#{i}: ξ leaves the prime spectrum"));
            if q.len() == 2 {
                let mut sorted = xi_map.clone();
                sorted.sort();
                sorted.dedup();
                ctx.expect(sorted.len() == xi_map.len() && sorted.len() == scan.primes.len(), "xi_bijective", || {
                    format!("#{i}: ξ is not a bijection")
                });
            }
            entry.characters_to_two = Some(gammas.len());
            entry.xi = Some(xi_map);
        }
        out.push(entry);
    }
    Ok(SpectrumResult { algebras: out })
}

fn sections(ctx: &mut Ctx, poset: &Arc<AlgebraPoset>) -> Result<SectionsResult> {
    let mut result = SectionsResult {
        objects: poset.objects().iter().map(|a| a.id().to_string()).collect(),
        gelfand_sections: Vec::new(),
        prime_sections: None,
        element_map: Vec::new(),
        canonical: Vec::new(),
    };
    if let Some(g) = ctx.attempt("gelfand_presheaf", build_presheaf(poset, SpectrumKind::Gelfand))? {
        result.gelfand_sections = global_sections(&g);
    }
    if !is_zdf(&ctx.q) {
        return Ok(result);
    }
    let Some(p) = ctx.attempt("prime_presheaf", build_presheaf(poset, SpectrumKind::Prime))? else { return Ok(result) };
    let prime_sections = global_sections(&p);
    let points = ctx.x.points().to_vec();
    for (k, s) in prime_sections.iter().enumerate() {
        if let Some(e) = ctx.attempt("section_element", section_element(&p, s))? {
            result.element_map.push(ElementEntry { prime_section: k, element: points[e].to_string() });
        }
    }
    for (x, point) in points.iter().enumerate() {
        let Some(s) = ctx.attempt("canonical_section", canonical_section(&p, x))? else { continue };
        let back = ctx.attempt("section_element", section_element(&p, &s))?;
        ctx.expect(back == Some(x), "canonical_round_trip", || format!("point {point} does not come back"));
        ctx.expect(prime_sections.contains(&s), "canonical_section", || format!("section of {point} was not enumerated"));
        result.canonical.push(CanonicalEntry { element: point.to_string(), section: s });
    }
    let mut distinct: Vec<&Section> = result.canonical.iter().map(|c| &c.section).collect();
    distinct.sort();
    distinct.dedup();
    ctx.expect(distinct.len() == points.len(), "canonical_count", || {
        format!("{} distinct canonical sections for {} points", distinct.len(), points.len())
    });
    result.prime_sections = Some(prime_sections);
    Ok(result)
}

fn verdict(ctx: &mut Ctx, poset: &Arc<AlgebraPoset>) -> Result<Verdict> {
    let v = match ks_verdict_on(poset) {
        Ok(v) => v,
        Err(e) if is_config_error(&e) => return Err(e),
        Err(e) => {
            ctx.fail("verdict", e.to_string());
            return Err(e);
        }
    };
    if v.hypotheses_met {
        ctx.expect(!v.contextual, "non_contextual", || "a ZDF quantale produced a contextual verdict".into());
        ctx.expect(v.canonical_round_trip == Some(true), "canonical_round_trip", || "section_element ∘ canonical_section is not the identity".into());
        let n = ctx.x.len();
        ctx.expect(v.canonical_section_count == Some(n), "canonical_count", || {
            format!("{:?} canonical sections for {n} points", v.canonical_section_count)
        });
        ctx.expect(v.element_map.len() == v.prime_section_count.unwrap_or(0), "section_element", || {
            "some prime section determines no element".into()
        });
    }
    Ok(v)
}

fn topology(ctx: &mut Ctx, poset: &AlgebraPoset) -> Result<TopologyResult> {
    let zdf = is_zdf(&ctx.q);
    let selected = ctx.selected(poset)?;
    let mut algebras = Vec::new();
    for &i in &selected {
        let a = &poset.objects()[i];
        let Some(report) = ctx.attempt("topology", topology_report(a))? else { continue };
        if zdf {
            let s = &report.prime.separation;
            ctx.expect(s.t0 && s.compact, "prime_t0_compact", || format!("#{i}: prime spectrum is not T0 and compact"));
            ctx.expect(report.xi_quotient.as_ref().is_some_and(|c| c.holds()), "xi_quotient", || {
                format!("#{i}: ξ is not a quotient map onto the prime spectrum")
            });
        }
        for space in [&report.gelfand, &report.prime] {
            ctx.expect(space.topology.is_topology(), "topology", || format!("#{i}: closed sets are not a topology"));
            ctx.expect(separation_report(&space.quotient.space).t0, "kolmogorov", || format!("#{i}: quotient is not T0"));
        }
        if a.len() <= BASIS_ORACLE_LIMIT {
            for kind in [SpectrumKind::Gelfand, SpectrumKind::Prime] {
                let same = zariski(a, kind).ok() == zariski_with(a, kind, Basis::AllIdeals).ok();
                ctx.expect(same, "principal_basis", || format!("#{i}: principal and all-ideal bases differ"));
            }
        }
        algebras.push(TopologyEntry { index: i, report });
    }
    let mut edges = 0;
    if ctx.config.algebra.is_none() {
        for &(lo, hi) in poset.hasse() {
            for kind in [SpectrumKind::Gelfand, SpectrumKind::Prime] {
                let (a, b) = (&poset.objects()[lo], &poset.objects()[hi]);
                if let Some(ok) = ctx.attempt("continuity", check_continuity(a, b, kind))? {
                    ctx.expect(ok, "continuity", || format!("restriction #{hi} → #{lo} is not continuous ({kind:?})"));
                }
            }
            edges += 1;
        }
    }
    Ok(TopologyResult { algebras, continuity_edges_checked: edges })
}

fn render_text(r: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "qspec {} quantale={} |X|={} mode={} seed={}", r.command, r.quantale, r.size, r.mode, r.seed);
    render_result(&mut s, &r.result);
    if r.passed {
        let _ = writeln!(s, "all checks passed");
    } else {
        let _ = writeln!(s, "{} checks failed:", r.failures.len());
        for f in &r.failures {
            let _ = writeln!(s, "  {}: {}", f.check, f.detail);
        }
    }
    s
}

fn render_result(s: &mut String, result: &CommandResult) {
    match result {
        CommandResult::Quantale(q) => {
            let _ = writeln!(s, "elements: {}", q.elements.join(" "));
            let _ = writeln!(s, "axioms: {}", if q.axioms.passed { "pass" } else { "FAIL" });
            let _ = writeln!(s, "zdf: {}", q.zdf);
            if let Some((a, b)) = &q.zero_divisor {
                let _ = writeln!(s, "zero divisor: {a} · {b} = 0");
            }
            let _ = writeln!(s, "endomorphisms: {}", q.endomorphisms.iter().map(|e| format!("[{}]", e.join(" "))).collect::<Vec<_>>().join(" "));
            let _ = writeln!(s, "relation spot checks: {} trials, {} mismatches", q.spot_checks.trials, q.spot_checks.mismatches);
        }
        CommandResult::Algebras(a) => {
            let p = &a.poset;
            let _ = writeln!(s, "{} algebras, {} covering edges, complete={}", p.objects.len(), p.edges.len(), p.complete);
            for o in &p.objects {
                let label = o.label.map(|l| format!(" ({l})")).unwrap_or_default();
                let _ = writeln!(s, "  #{} {} |A|={}{label}", o.index, o.id, o.size);
            }
        }
        CommandResult::Spectrum(sp) => {
            for a in &sp.algebras {
                let _ = writeln!(
                    s,
                    "  #{} {} |A|={}: |Spec_G|={} |Spec_P|={} maps to 2: {}",
                    a.index,
                    a.id,
                    a.size,
                    a.gelfand.len(),
                    a.prime.len(),
                    a.characters_to_two.map_or("-".into(), |n| n.to_string())
                );
            }
        }
        CommandResult::Sections(sc) => {
            let _ = writeln!(s, "objects: {}", sc.objects.len());
            let _ = writeln!(s, "Gelfand sections: {}", sc.gelfand_sections.len());
            if let Some(p) = &sc.prime_sections {
                let _ = writeln!(s, "prime sections: {}", p.len());
            }
            for e in &sc.element_map {
                let _ = writeln!(s, "  prime section {} -> {}", e.prime_section, e.element);
            }
        }
        CommandResult::Verdict(v) => {
            let _ = writeln!(s, "{}", if v.contextual { "contextual" } else { "non-contextual" });
            let _ = writeln!(s, "objects: {} (complete={})", v.objects.len(), v.complete);
            let _ = writeln!(s, "Gelfand sections: {}", v.section_count);
            if let Some(n) = v.prime_section_count {
                let _ = writeln!(s, "prime sections: {n}");
            }
            if !v.hypotheses_met {
                let _ = writeln!(s, "prime route skipped: quantale is not ZDF");
            }
            let _ = writeln!(s, "{}", v.witness);
        }
        CommandResult::Topology(t) => {
            for e in &t.algebras {
                let r = &e.report;
                let _ = writeln!(
                    s,
                    "  #{} {}: Gelfand {} points T0={} T1={}; prime {} points T0={} T1={}",
                    e.index,
                    r.algebra,
                    r.gelfand.topology.len(),
                    r.gelfand.separation.t0,
                    r.gelfand.separation.t1,
                    r.prime.topology.len(),
                    r.prime.separation.t0,
                    r.prime.separation.t1
                );
            }
            let _ = writeln!(s, "continuity checked on {} covering edges", t.continuity_edges_checked);
        }
        CommandResult::All(all) => {
            for part in [
                CommandResult::Quantale(all.quantale.clone()),
                CommandResult::Algebras(all.algebras.clone()),
                CommandResult::Spectrum(all.spectrum.clone()),
                CommandResult::Sections(all.sections.clone()),
                CommandResult::Verdict(Box::new(all.verdict.clone())),
                CommandResult::Topology(all.topology.clone()),
            ] {
                render_result(s, &part);
            }
        }
    }
}
