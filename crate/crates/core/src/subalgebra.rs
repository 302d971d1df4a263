//! Commutants, closures and commutative von Neumann subsemialgebras of
//! `Hom(X, X)`, their inclusion poset, and the decomposition of such an
//! algebra into indecomposable components.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::homsearch::Tables;
use crate::quantale::{is_zdf, Elem, Quantale};
use crate::relations::{self, matmul, FiniteSet, QRel};

pub const DEFAULT_HOM_BOUND: u128 = 65_536;
pub const HOM_BOUND_ENV: &str = "QSPEC_MAX_HOM_SIZE";
/// Generated mode still scans `Hom(X, X)` for normal elements.
pub const GENERATED_SCAN_LIMIT: u128 = 1 << 24;

/// The exhaustive-mode bound, overridable through [`HOM_BOUND_ENV`].
pub fn hom_bound() -> Result<u128> {
    match std::env::var(HOM_BOUND_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("{HOM_BOUND_ENV}={v} is not a non-negative integer"))),
        Err(_) => Ok(DEFAULT_HOM_BOUND),
    }
}

/// `|Q|^(n²)`, saturating.
pub fn hom_size(q: &Quantale, n: usize) -> u128 {
    u32::try_from(n * n)
        .ok()
        .and_then(|e| (q.len() as u128).checked_pow(e))
        .unwrap_or(u128::MAX)
}

/// `Hom(X, X)` indexed in mixed radix, first cell most significant, so index
/// order is lexicographic order of entry vectors.
pub struct HomSpace {
    q: Arc<Quantale>,
    x: Arc<FiniteSet>,
    cells: usize,
    size: usize,
    rows: Vec<OnceLock<FixedBitSet>>,
}

impl HomSpace {
    pub fn new(q: &Arc<Quantale>, x: &Arc<FiniteSet>, limit: u128) -> Result<Self> {
        let size = hom_size(q, x.len());
        if size > limit {
            return Err(Error::BoundExceeded { size, bound: limit });
        }
        let size = size as usize;
        Ok(HomSpace {
            q: q.clone(),
            x: x.clone(),
            cells: x.len() * x.len(),
            size,
            rows: (0..size).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn carrier(&self) -> &Arc<FiniteSet> {
        &self.x
    }

    fn decode_into(&self, mut idx: usize, out: &mut [Elem]) {
        let radix = self.q.len();
        for cell in out.iter_mut().rev() {
            *cell = Elem((idx % radix) as u8);
            idx /= radix;
        }
    }

    pub fn decode(&self, idx: usize) -> Vec<Elem> {
        let mut out = vec![Elem(0); self.cells];
        self.decode_into(idx, &mut out);
        out
    }

    pub fn encode(&self, entries: &[Elem]) -> usize {
        entries.iter().fold(0, |acc, e| acc * self.q.len() + e.index())
    }

    pub fn relation(&self, idx: usize) -> QRel {
        QRel::raw(&self.q, &self.x, &self.x, self.decode(idx))
    }

    pub fn index_of(&self, f: &QRel) -> Result<usize> {
        if f.dom() != &self.x || f.cod() != &self.x || f.quantale() != &self.q {
            return Err(Error::MixedAmbient);
        }
        Ok(self.encode(f.entries()))
    }

    fn commute_mats(&self, f: &[Elem], g: &[Elem], fg: &mut [Elem], gf: &mut [Elem]) -> bool {
        let n = self.x.len();
        matmul(&self.q, n, n, n, f, g, fg);
        matmul(&self.q, n, n, n, g, f, gf);
        fg == gf
    }

    pub fn commute(&self, f: usize, g: usize) -> bool {
        let mut bufs = [vec![Elem(0); self.cells], vec![Elem(0); self.cells]];
        let [a, b] = &mut bufs;
        self.commute_mats(&self.decode(f), &self.decode(g), a, b)
    }

    pub fn dagger_index(&self, g: usize) -> usize {
        self.encode(relations::dagger(&self.relation(g)).entries())
    }

    /// `g ∘ g† = g† ∘ g`.
    pub fn is_normal(&self, g: usize) -> bool {
        self.commute(g, self.dagger_index(g))
    }

    /// Everything commuting with `g`; cached.
    pub fn row(&self, g: usize) -> &FixedBitSet {
        self.rows[g].get_or_init(|| self.scan(&[self.decode(g)]))
    }

    /// All elements commuting with every matrix in `with`.
    fn scan(&self, with: &[Vec<Elem>]) -> FixedBitSet {
        let cells = self.cells;
        let hits: Vec<usize> = (0..self.size)
            .into_par_iter()
            .map_init(
                || (vec![Elem(0); cells], vec![Elem(0); cells], vec![Elem(0); cells]),
                |(f, a, b), idx| {
                    self.decode_into(idx, f);
                    with.iter().all(|g| self.commute_mats(f, g, a, b)).then_some(idx)
                },
            )
            .flatten()
            .collect();
        self.bitset(hits)
    }

    fn bitset(&self, ones: impl IntoIterator<Item = usize>) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(self.size);
        b.extend(ones);
        b
    }

    /// The commutant of an arbitrary set of elements.
    pub fn commutant_of(&self, set: &[usize]) -> FixedBitSet {
        let mut out = self.bitset(0..self.size);
        for &g in set {
            out.intersect_with(self.row(g));
        }
        out
    }

    /// `C'` given as a bitset, when `C ⊆ C'`: then `C'' ⊆ C'` and it suffices
    /// to look inside `C'`.
    fn inner_commutant(&self, commutant: &FixedBitSet) -> FixedBitSet {
        let ones: Vec<usize> = commutant.ones().collect();
        let hits: Vec<usize> = ones.par_iter().copied().filter(|&f| commutant.is_subset(self.row(f))).collect();
        self.bitset(hits)
    }

    /// The centre `Hom(X,X)'`, computed as the commutant of the generators
    /// `a • E_ij` of `Hom(X, X)` under joins.
    fn centre(&self) -> FixedBitSet {
        let n = self.x.len();
        let z = self.q.zero();
        let gens: Vec<Vec<Elem>> = self
            .q
            .elems()
            .flat_map(|a| {
                (0..n * n).map(move |c| {
                    let mut m = vec![z; n * n];
                    m[c] = a;
                    m
                })
            })
            .collect();
        self.scan(&gens)
    }

    fn algebra(&self, members: &FixedBitSet) -> Subsemialgebra {
        let rels = members.ones().map(|i| self.relation(i)).collect();
        let mut a = Subsemialgebra::from_sorted(&self.x, &self.q, rels);
        a.flags.von_neumann = Some(true);
        a
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub unital: bool,
    pub star_closed: bool,
    pub commutative: bool,
    /// `None` until decided.
    pub von_neumann: Option<bool>,
}

#[derive(Clone, Debug)]
pub(crate) struct OpTables {
    pub ring: Tables,
    /// `scalar[s * m + a]` is the member index of `s • a`.
    pub scalar: Vec<usize>,
}

/// A finite set of endomorphisms of `X`, sorted lexicographically.
#[derive(Clone, Debug)]
pub struct Subsemialgebra {
    x: Arc<FiniteSet>,
    q: Arc<Quantale>,
    members: Vec<QRel>,
    id: String,
    flags: Flags,
    tables: OnceLock<OpTables>,
}

impl PartialEq for Subsemialgebra {
    fn eq(&self, other: &Self) -> bool {
        self.x == other.x && self.q == other.q && self.members == other.members
    }
}

impl Eq for Subsemialgebra {}

impl Subsemialgebra {
    pub fn new(x: &Arc<FiniteSet>, q: &Arc<Quantale>, mut members: Vec<QRel>) -> Result<Self> {
        if members.iter().any(|m| m.dom() != x || m.cod() != x || m.quantale() != q) {
            return Err(Error::MixedAmbient);
        }
        members.sort();
        members.dedup();
        Ok(Self::from_sorted(x, q, members))
    }

    fn from_sorted(x: &Arc<FiniteSet>, q: &Arc<Quantale>, members: Vec<QRel>) -> Self {
        let id = algebra_id(x.len(), q, &members);
        let mut a = Subsemialgebra {
            x: x.clone(),
            q: q.clone(),
            members,
            id,
            flags: Flags { unital: false, star_closed: false, commutative: false, von_neumann: None },
            tables: OnceLock::new(),
        };
        a.flags.unital = a.contains(&QRel::identity(q, x));
        a.flags.star_closed = a.members.iter().all(|m| a.contains(&relations::dagger(m)));
        a.flags.commutative = a.members.iter().enumerate().all(|(i, f)| {
            a.members[..i].iter().all(|g| {
                relations::compose(f, g).expect("same ambient") == relations::compose(g, f).expect("same ambient")
            })
        });
        a
    }

    pub fn carrier(&self) -> &Arc<FiniteSet> {
        &self.x
    }

    pub fn quantale(&self) -> &Arc<Quantale> {
        &self.q
    }

    pub fn members(&self) -> &[QRel] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Hex digest of the sorted member matrices.
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn index_of(&self, f: &QRel) -> Option<usize> {
        self.members.binary_search(f).ok()
    }

    pub fn contains(&self, f: &QRel) -> bool {
        self.index_of(f).is_some()
    }

    pub fn is_subset_of(&self, other: &Subsemialgebra) -> bool {
        self.members.iter().all(|m| other.contains(m))
    }

    /// Same member matrices, ignoring how the carrier points are labelled.
    pub fn same_members(&self, other: &Subsemialgebra) -> bool {
        self.q == other.q
            && self.x.len() == other.x.len()
            && self.members.iter().map(QRel::entries).eq(other.members.iter().map(QRel::entries))
    }

    pub fn zero_index(&self) -> Option<usize> {
        self.index_of(&QRel::zero(&self.q, &self.x, &self.x))
    }

    pub fn one_index(&self) -> Option<usize> {
        self.index_of(&QRel::identity(&self.q, &self.x))
    }

    /// Contains 0 and `id_X` and is closed under join, composition, dagger and
    /// every scalar.
    pub fn is_closed(&self) -> bool {
        self.tables().is_ok()
    }

    /// Every subset of members has its join in the algebra. Binary closure
    /// suffices for a finite set; small algebras are also checked literally.
    pub fn closed_under_all_joins(&self) -> bool {
        if self.tables().is_err() {
            return false;
        }
        let m = self.len();
        if m > 16 {
            return true;
        }
        (0u32..1 << m).all(|mask| {
            let mut acc = QRel::zero(&self.q, &self.x, &self.x);
            for i in (0..m).filter(|i| mask & (1 << i) != 0) {
                acc = relations::add(&acc, &self.members[i]).expect("same ambient");
            }
            self.contains(&acc)
        })
    }

    pub(crate) fn tables(&self) -> Result<&OpTables> {
        if let Some(t) = self.tables.get() {
            return Ok(t);
        }
        let t = self.build_tables()?;
        Ok(self.tables.get_or_init(|| t))
    }

    fn build_tables(&self) -> Result<OpTables> {
        let find = |f: &QRel, what: &str| {
            self.index_of(f).ok_or_else(|| Error::NotClosed(format!("{what} {f} is not a member")))
        };
        let zero = find(&QRel::zero(&self.q, &self.x, &self.x), "zero")?;
        let one = find(&QRel::identity(&self.q, &self.x), "identity")?;
        let m = self.len();
        let mut join = Vec::with_capacity(m * m);
        let mut mul = Vec::with_capacity(m * m);
        for a in &self.members {
            for b in &self.members {
                join.push(find(&relations::add(a, b)?, "join")?);
                mul.push(find(&relations::compose(b, a)?, "composite")?);
            }
        }
        let star = self.members.iter().map(|a| find(&relations::dagger(a), "dagger")).collect::<Result<_>>()?;
        let mut scalar = Vec::with_capacity(self.q.len() * m);
        for s in self.q.elems() {
            for a in &self.members {
                scalar.push(find(&relations::scalar_mul(s, a)?, "scalar multiple")?);
            }
        }
        Ok(OpTables { ring: Tables { size: m, join, mul, star, zero, one }, scalar })
    }

    pub(crate) fn set_von_neumann(&mut self, v: bool) {
        self.flags.von_neumann = Some(v);
    }

    /// Member `i` as a matrix of element names.
    pub fn member_matrix(&self, i: usize) -> Vec<Vec<String>> {
        let f = &self.members[i];
        let n = self.x.len();
        (0..n).map(|r| (0..n).map(|c| self.q.element_name(f.get(r, c)).to_string()).collect()).collect()
    }
}

fn algebra_id(n: usize, q: &Quantale, members: &[QRel]) -> String {
    let mut h = Sha256::new();
    h.update(q.name().as_bytes());
    h.update((n as u64).to_le_bytes());
    for m in members {
        h.update(m.entries().iter().map(|e| e.0).collect::<Vec<u8>>());
    }
    hex::encode(&h.finalize()[..6])
}

/// The smallest subsemialgebra containing `gens`, 0 and `id_X`.
pub fn close(x: &Arc<FiniteSet>, q: &Arc<Quantale>, gens: &[QRel]) -> Result<Subsemialgebra> {
    if gens.iter().any(|g| g.dom() != x || g.cod() != x || g.quantale() != q) {
        return Err(Error::MixedAmbient);
    }
    let mut all: Vec<QRel> = Vec::new();
    let mut seen: HashSet<QRel> = HashSet::new();
    let mut push = |f: QRel, all: &mut Vec<QRel>| {
        if seen.insert(f.clone()) {
            all.push(f);
        }
    };
    push(QRel::zero(q, x, x), &mut all);
    push(QRel::identity(q, x), &mut all);
    for g in gens {
        push(g.clone(), &mut all);
    }
    let mut i = 0;
    while i < all.len() {
        let f = all[i].clone();
        push(relations::dagger(&f), &mut all);
        for s in q.elems() {
            push(relations::scalar_mul(s, &f)?, &mut all);
        }
        for j in 0..=i {
            let g = all[j].clone();
            push(relations::add(&f, &g)?, &mut all);
            push(relations::compose(&f, &g)?, &mut all);
            push(relations::compose(&g, &f)?, &mut all);
        }
        i += 1;
    }
    Subsemialgebra::new(x, q, all)
}

/// `{q • id_X}`; von Neumann.
pub fn trivial_algebra(x: &Arc<FiniteSet>, q: &Arc<Quantale>) -> Subsemialgebra {
    let mut a = close(x, q, &[]).expect("no generators");
    a.set_von_neumann(true);
    a
}

/// All diagonal relations on `X`, the algebra `∏_{x∈X} Q`.
pub fn diagonal_algebra(x: &Arc<FiniteSet>, q: &Arc<Quantale>) -> Subsemialgebra {
    let n = x.len();
    let k = q.len();
    let total = k.pow(n as u32);
    let members = (0..total)
        .map(|mut code| {
            let mut diag = vec![Elem(0); n];
            for d in diag.iter_mut().rev() {
                *d = Elem((code % k) as u8);
                code /= k;
            }
            QRel::from_fn(q, x, x, |i, j| if i == j { diag[i] } else { q.zero() })
        })
        .collect();
    let mut a = Subsemialgebra::new(x, q, members).expect("same ambient");
    a.set_von_neumann(true);
    a
}

/// `{f | f∘g = g∘f for all g ∈ B}`.
pub fn commutant(x: &Arc<FiniteSet>, q: &Arc<Quantale>, b: &[QRel]) -> Result<Subsemialgebra> {
    let space = HomSpace::new(q, x, hom_bound()?)?;
    let mats = b.iter().map(|g| space.index_of(g).map(|i| space.decode(i))).collect::<Result<Vec<_>>>()?;
    let set = space.scan(&mats);
    let rels = set.ones().map(|i| space.relation(i)).collect();
    Ok(Subsemialgebra::from_sorted(x, q, rels))
}

/// `A = A''`.
pub fn is_von_neumann(a: &Subsemialgebra) -> Result<bool> {
    let space = HomSpace::new(&a.q, &a.x, hom_bound()?)?;
    let mats: Vec<Vec<Elem>> = a.members.iter().map(|m| m.entries().to_vec()).collect();
    let prime = space.scan(&mats);
    let prime_mats: Vec<Vec<Elem>> = prime.ones().map(|i| space.decode(i)).collect();
    let double = space.scan(&prime_mats);
    Ok(double.count_ones(..) == a.len() && a.members.iter().all(|m| double.contains(space.encode(m.entries()))))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EnumerationMode {
    Exhaustive,
    /// Double commutants of at most `k` commuting normal generators.
    Generated(usize),
}

impl fmt::Display for EnumerationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnumerationMode::Exhaustive => f.write_str("exhaustive"),
            EnumerationMode::Generated(k) => write!(f, "generated({k})"),
        }
    }
}

impl FromStr for EnumerationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "exhaustive" {
            return Ok(EnumerationMode::Exhaustive);
        }
        let k = s
            .strip_prefix("generated(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("generated"))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown mode `{s}`")))?;
        if k.is_empty() {
            return Ok(EnumerationMode::Generated(2));
        }
        k.parse()
            .map(EnumerationMode::Generated)
            .map_err(|_| Error::InvalidConfig(format!("bad generator count in `{s}`")))
    }
}

impl Serialize for EnumerationMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Commutative von Neumann subsemialgebras of `Hom(X, X)` under inclusion.
#[derive(Clone, Debug)]
pub struct AlgebraPoset {
    x: Arc<FiniteSet>,
    q: Arc<Quantale>,
    mode: EnumerationMode,
    complete: bool,
    objects: Vec<Subsemialgebra>,
    leq: Vec<FixedBitSet>,
    hasse: Vec<(usize, usize)>,
}

impl AlgebraPoset {
    /// Orders `objects` by size then members, and computes inclusions.
    pub fn from_algebras(
        x: &Arc<FiniteSet>,
        q: &Arc<Quantale>,
        mut objects: Vec<Subsemialgebra>,
        mode: EnumerationMode,
        complete: bool,
    ) -> Result<Self> {
        if objects.iter().any(|a| &a.x != x || &a.q != q) {
            return Err(Error::MixedAmbient);
        }
        objects.sort_by(|a, b| (a.len(), &a.members).cmp(&(b.len(), &b.members)));
        objects.dedup();
        let k = objects.len();
        let leq: Vec<FixedBitSet> = (0..k)
            .map(|i| {
                let mut row = FixedBitSet::with_capacity(k);
                row.extend((0..k).filter(|&j| objects[i].is_subset_of(&objects[j])));
                row
            })
            .collect();
        let mut hasse = Vec::new();
        for i in 0..k {
            for j in leq[i].ones().filter(|&j| j != i) {
                if !leq[i].ones().any(|m| m != i && m != j && leq[m].contains(j)) {
                    hasse.push((i, j));
                }
            }
        }
        Ok(AlgebraPoset { x: x.clone(), q: q.clone(), mode, complete, objects, leq, hasse })
    }

    pub fn carrier(&self) -> &Arc<FiniteSet> {
        &self.x
    }

    pub fn quantale(&self) -> &Arc<Quantale> {
        &self.q
    }

    pub fn mode(&self) -> EnumerationMode {
        self.mode
    }

    /// Whether every commutative von Neumann algebra is present.
    pub fn complete(&self) -> bool {
        self.complete
    }

    pub fn objects(&self) -> &[Subsemialgebra] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// `objects[i] ⊆ objects[j]`.
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i].contains(j)
    }

    /// Covering pairs `(lower, upper)`.
    pub fn hasse(&self) -> &[(usize, usize)] {
        &self.hasse
    }

    pub fn find(&self, a: &Subsemialgebra) -> Option<usize> {
        self.objects.iter().position(|o| o == a)
    }

    pub fn trivial_index(&self) -> Option<usize> {
        self.find(&trivial_algebra(&self.x, &self.q))
    }

    pub fn diagonal_index(&self) -> Option<usize> {
        self.find(&diagonal_algebra(&self.x, &self.q))
    }

    /// For `objects[i] ⊆ objects[j]`, the member index in `j` of each member of `i`.
    pub fn inclusion_map(&self, i: usize, j: usize) -> Result<Vec<usize>> {
        inclusion_map(&self.objects[i], &self.objects[j])
    }

    pub fn label(&self, i: usize) -> Option<&'static str> {
        let a = &self.objects[i];
        if *a == trivial_algebra(&self.x, &self.q) {
            Some("trivial")
        } else if *a == diagonal_algebra(&self.x, &self.q) {
            Some("diagonal")
        } else {
            None
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph algebras {\n  rankdir=BT;\n  node [shape=box];\n");
        for (i, a) in self.objects.iter().enumerate() {
            let tag = self.label(i).map(|l| format!(" {l}")).unwrap_or_default();
            out.push_str(&format!("  a{i} [label=\"#{i}{tag}\\n{}\\n|A|={}\"];\n", a.id(), a.len()));
        }
        for (i, j) in &self.hasse {
            out.push_str(&format!("  a{i} -> a{j};\n"));
        }
        out.push_str("}\n");
        out
    }

    pub fn report(&self) -> PosetReport {
        PosetReport {
            quantale: self.q.name().to_string(),
            carrier: self.x.points().iter().map(ToString::to_string).collect(),
            mode: self.mode,
            complete: self.complete,
            objects: self
                .objects
                .iter()
                .enumerate()
                .map(|(i, a)| ObjectReport {
                    index: i,
                    id: a.id().to_string(),
                    label: self.label(i),
                    size: a.len(),
                    flags: a.flags(),
                    members: (0..a.len()).map(|m| a.member_matrix(m)).collect(),
                })
                .collect(),
            edges: self.hasse.iter().map(|&(i, j)| [i, j]).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PosetReport {
    pub quantale: String,
    pub carrier: Vec<String>,
    pub mode: EnumerationMode,
    pub complete: bool,
    pub objects: Vec<ObjectReport>,
    /// Hasse edges `[lower, upper]`.
    pub edges: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObjectReport {
    pub index: usize,
    pub id: String,
    pub label: Option<&'static str>,
    pub size: usize,
    pub flags: Flags,
    pub members: Vec<Vec<Vec<String>>>,
}

pub fn inclusion_map(a: &Subsemialgebra, b: &Subsemialgebra) -> Result<Vec<usize>> {
    if a.x != b.x || a.q != b.q {
        return Err(Error::NotAnInclusion("algebras live on different ambients".into()));
    }
    a.members
        .iter()
        .map(|m| b.index_of(m).ok_or_else(|| Error::NotAnInclusion(format!("{m} is missing from {}", b.id()))))
        .collect()
}

/// All commutative von Neumann subsemialgebras of `Hom(X, X)`, or those
/// reachable from at most `k` generators.
pub fn enumerate_vn(x: &Arc<FiniteSet>, q: &Arc<Quantale>, mode: EnumerationMode) -> Result<AlgebraPoset> {
    let found = match mode {
        EnumerationMode::Exhaustive => {
            let space = HomSpace::new(q, x, hom_bound()?)?;
            let found = exhaustive(&space);
            (space, found)
        }
        EnumerationMode::Generated(k) => {
            let space = HomSpace::new(q, x, GENERATED_SCAN_LIMIT)?;
            let found = generated(&space, k);
            (space, found)
        }
    };
    let (space, sets) = found;
    let mut objects: Vec<Subsemialgebra> = sets.iter().map(|s| space.algebra(s)).collect();
    if matches!(mode, EnumerationMode::Generated(_)) {
        objects.push(trivial_algebra(x, q));
        objects.push(diagonal_algebra(x, q));
    }
    AlgebraPoset::from_algebras(x, q, objects, mode, mode == EnumerationMode::Exhaustive)
}

/// Depth-first search from the centre: from `A` with commutant `A'`, adjoin a
/// normal `g ∈ A' \ A` and pass to `(A ∪ {g, g†})''`. Every commutative vN
/// algebra above `A` is reached by adjoining its elements one at a time.
fn exhaustive(space: &HomSpace) -> BTreeSet<FixedBitSet> {
    let centre = space.centre();
    let everything = space.bitset(0..space.size);
    let mut visited = BTreeSet::from([centre.clone()]);
    let mut stack = vec![(centre, everything)];
    while let Some((a, ap)) = stack.pop() {
        let candidates: Vec<usize> = ap.ones().filter(|&g| !a.contains(g)).collect();
        let children: Vec<(FixedBitSet, FixedBitSet)> = candidates
            .par_iter()
            .filter(|&&g| space.is_normal(g))
            .map(|&g| adjoin(space, &ap, g))
            .collect();
        for (b, bp) in children {
            if !visited.contains(&b) {
                visited.insert(b.clone());
                stack.push((b, bp));
            }
        }
    }
    visited
}

fn adjoin(space: &HomSpace, ap: &FixedBitSet, g: usize) -> (FixedBitSet, FixedBitSet) {
    let mut bp = ap.clone();
    bp.intersect_with(space.row(g));
    bp.intersect_with(space.row(space.dagger_index(g)));
    (space.inner_commutant(&bp), bp)
}

fn generated(space: &HomSpace, k: usize) -> BTreeSet<FixedBitSet> {
    let centre = space.centre();
    let everything = space.bitset(0..space.size);
    let normals: Vec<usize> = (0..space.size).into_par_iter().filter(|&g| space.is_normal(g)).collect();
    let mut out = BTreeSet::from([centre.clone()]);
    extend_generated(space, &normals, &centre, &everything, 0, k, &mut out);
    out
}

fn extend_generated(
    space: &HomSpace,
    normals: &[usize],
    a: &FixedBitSet,
    ap: &FixedBitSet,
    start: usize,
    budget: usize,
    out: &mut BTreeSet<FixedBitSet>,
) {
    if budget == 0 {
        return;
    }
    let children: Vec<(usize, FixedBitSet, FixedBitSet)> = normals[start..]
        .par_iter()
        .enumerate()
        .filter(|(_, &g)| ap.contains(g) && !a.contains(g))
        .map(|(i, &g)| {
            let (b, bp) = adjoin(space, ap, g);
            (start + i + 1, b, bp)
        })
        .collect();
    for (next, b, bp) in children {
        out.insert(b.clone());
        extend_generated(space, normals, &b, &bp, next, budget - 1, out);
    }
}

/// Primitive subunital idempotents `e_i` of a commutative vN algebra and the
/// components `e_i A`, member indices throughout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub idempotents: Vec<usize>,
    /// The support of each `e_i`, a block of a partition of `X`.
    pub supports: Vec<Vec<usize>>,
    pub components: Vec<Vec<usize>>,
}

/// Decomposes `a` along the atoms of the Boolean algebra of member supports.
pub fn primitive_idempotents(a: &Subsemialgebra) -> Result<Decomposition> {
    if !is_zdf(&a.q) {
        return Err(Error::NotZdf(a.q.name().into()));
    }
    match a.flags.von_neumann {
        Some(true) => {}
        Some(false) => return Err(Error::NotVonNeumann),
        None => {
            if !is_von_neumann(a)? {
                return Err(Error::NotVonNeumann);
            }
        }
    }
    let t = a.tables()?;
    let supports: BTreeSet<Vec<usize>> = a.members.iter().map(|m| relations::support(m).supp).collect();
    let atoms: Vec<Vec<usize>> = supports
        .iter()
        .filter(|s| !s.is_empty())
        .filter(|s| !supports.iter().any(|o| !o.is_empty() && o != *s && o.iter().all(|p| s.contains(p))))
        .cloned()
        .collect();
    let mut covered = vec![0usize; a.x.len()];
    for p in atoms.iter().flatten() {
        covered[*p] += 1;
    }
    if covered.iter().any(|&c| c != 1) {
        return Err(Error::Decomposition("atoms of the support algebra do not partition the carrier".into()));
    }
    let mut idempotents = Vec::with_capacity(atoms.len());
    for atom in &atoms {
        let e = QRel::partial_identity(&a.q, &a.x, atom);
        let i = a
            .index_of(&e)
            .ok_or_else(|| Error::Decomposition(format!("identity on the support {atom:?} is not a member")))?;
        idempotents.push(i);
    }
    let m = a.len();
    let components = idempotents
        .iter()
        .map(|&e| {
            let c: BTreeSet<usize> = (0..m).map(|x| t.ring.mul[e * m + x]).collect();
            c.into_iter().collect()
        })
        .collect();
    Ok(Decomposition { idempotents, supports: atoms, components })
}

/// Idempotents `e` with some `e'` in the algebra such that `e∘e' = 0` and
/// `e ∨ e' = 1`.
pub fn subunital_idempotents(a: &Subsemialgebra) -> Result<Vec<usize>> {
    let t = a.tables()?;
    let m = a.len();
    let r = &t.ring;
    Ok((0..m)
        .filter(|&e| r.mul[e * m + e] == e)
        .filter(|&e| (0..m).any(|c| r.mul[e * m + c] == r.zero && r.join[e * m + c] == r.one))
        .collect())
}

impl Decomposition {
    /// Every violated invariant, as text; empty when all hold.
    pub fn check(&self, a: &Subsemialgebra) -> Vec<String> {
        let mut failures = Vec::new();
        let Ok(t) = a.tables() else {
            return vec!["algebra is not closed".into()];
        };
        let r = &t.ring;
        let m = a.len();
        let es = &self.idempotents;
        for &e in es {
            if r.mul[e * m + e] != e {
                failures.push(format!("e{e} is not idempotent"));
            }
        }
        for (i, &e) in es.iter().enumerate() {
            for &f in &es[..i] {
                if r.mul[e * m + f] != r.zero {
                    failures.push(format!("e{e} and e{f} are not orthogonal"));
                }
            }
        }
        let total = es.iter().fold(r.zero, |acc, &e| r.join[acc * m + e]);
        if total != r.one {
            failures.push("idempotents do not join to the unit".into());
        }
        let sub = subunital_idempotents(a).unwrap_or_default();
        for &e in es {
            let splits = sub.iter().any(|&f| {
                f != r.zero
                    && sub.iter().any(|&g| g != r.zero && r.mul[f * m + g] == r.zero && r.join[f * m + g] == e)
            });
            if e == r.zero || splits || !sub.contains(&e) {
                failures.push(format!("e{e} is not primitive"));
            }
        }
        let image = |x: usize| es.iter().map(|&e| r.mul[e * m + x]).collect::<Vec<_>>();
        let tuples: HashSet<Vec<usize>> = (0..m).map(image).collect();
        let product: usize = self.components.iter().map(Vec::len).product();
        if tuples.len() != m || product != m {
            failures.push(format!("component map is not bijective: |A| = {m}, image {}, product {product}", tuples.len()));
        }
        let join_ok = (0..m).all(|x| {
            (0..m).all(|y| {
                let (ix, iy) = (image(x), image(y));
                image(r.join[x * m + y]) == ix.iter().zip(&iy).map(|(&u, &v)| r.join[u * m + v]).collect::<Vec<_>>()
                    && image(r.mul[x * m + y]) == ix.iter().zip(&iy).map(|(&u, &v)| r.mul[u * m + v]).collect::<Vec<_>>()
            })
        });
        let star_ok = (0..m).all(|x| image(r.star[x]) == image(x).iter().map(|&u| r.star[u]).collect::<Vec<_>>());
        let scalar_ok = (0..a.q.len()).all(|s| {
            (0..m).all(|x| image(t.scalar[s * m + x]) == image(x).iter().map(|&u| t.scalar[s * m + u]).collect::<Vec<_>>())
        });
        if !(join_ok && star_ok && scalar_ok) {
            failures.push("component map is not a homomorphism".into());
        }
        failures
    }
}

/// Block-diagonal `{a ⊕ b}` on `X ⊔ Y`.
pub fn direct_sum(a: &Subsemialgebra, b: &Subsemialgebra) -> Result<Subsemialgebra> {
    if a.q != b.q {
        return Err(Error::QuantaleMismatch(a.q.name().into(), b.q.name().into()));
    }
    let xy = Arc::new(FiniteSet::disjoint_union(&[&a.x, &b.x]));
    let mut members = Vec::with_capacity(a.len() * b.len());
    for f in &a.members {
        for g in &b.members {
            let s = relations::direct_sum(f, g)?;
            members.push(QRel::raw(&a.q, &xy, &xy, s.entries().to_vec()));
        }
    }
    Subsemialgebra::new(&xy, &a.q, members)
}

/// `e A` viewed on the support of `e`.
pub fn restrict_component(a: &Subsemialgebra, e: &QRel) -> Result<Subsemialgebra> {
    let supp = relations::support(e).supp;
    let name = format!("{}|{}", a.x.name(), supp.iter().map(|i| a.x.points()[*i].to_string()).collect::<Vec<_>>().join(","));
    let carrier = Arc::new(a.x.subset(name, &supp));
    restrict_component_onto(a, e, &carrier)
}

/// As [`restrict_component`], labelling the support by the points of `carrier`.
pub fn restrict_component_onto(a: &Subsemialgebra, e: &QRel, carrier: &Arc<FiniteSet>) -> Result<Subsemialgebra> {
    let ei = a.index_of(e).ok_or_else(|| Error::NotSubunital(format!("{e} is not a member")))?;
    if !subunital_idempotents(a)?.contains(&ei) {
        return Err(Error::NotSubunital(format!("{e} has no orthogonal complement in the algebra")));
    }
    let supp = relations::support(e).supp;
    if *e != QRel::partial_identity(&a.q, &a.x, &supp) {
        return Err(Error::NotSubunital(format!("{e} is not an identity on its support")));
    }
    if carrier.len() != supp.len() {
        return Err(Error::ShapeMismatch(format!("carrier has {} points, support has {}", carrier.len(), supp.len())));
    }
    let members = a
        .members
        .iter()
        .map(|f| {
            let efe = relations::compose(&relations::compose(e, f)?, e)?;
            Ok(QRel::from_fn(&a.q, carrier, carrier, |i, j| efe.get(supp[i], supp[j])))
        })
        .collect::<Result<Vec<_>>>()?;
    Subsemialgebra::new(carrier, &a.q, members)
}
