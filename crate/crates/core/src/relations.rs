//! Quantale-valued relations as dense matrices.
//!
//! A relation `f: X -> Y` stores one quantale element per cell `(x, y)`,
//! row-major over `dom × cod`. Composition is written in diagrammatic order:
//! [`compose`]`(f, g)` is "first `f`, then `g`", i.e. `g ∘ f`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantale::{Elem, Quantale};

/// A point of a finite set. Disjoint unions tag points with the index of the
/// summand they came from; products pair them.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    Atom(String),
    Tagged(usize, Box<Point>),
    Pair(Box<Point>, Box<Point>),
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Atom(s) => f.write_str(s),
            Point::Tagged(i, p) => write!(f, "{i}:{p}"),
            Point::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

impl From<&str> for Point {
    fn from(s: &str) -> Self {
        Point::Atom(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FiniteSet {
    name: String,
    points: Vec<Point>,
}

impl FiniteSet {
    pub fn new(name: impl Into<String>, points: Vec<Point>) -> Result<Self> {
        let name = name.into();
        for (i, p) in points.iter().enumerate() {
            if points[..i].contains(p) {
                return Err(Error::Parse(format!("duplicate point `{p}` in set `{name}`")));
            }
        }
        Ok(FiniteSet { name, points })
    }

    pub fn from_ids(name: impl Into<String>, ids: &[&str]) -> Result<Self> {
        Self::new(name, ids.iter().map(|&s| Point::from(s)).collect())
    }

    /// `{1, ..., n}`.
    pub fn range(name: impl Into<String>, n: usize) -> Self {
        FiniteSet { name: name.into(), points: (1..=n).map(|i| Point::Atom(i.to_string())).collect() }
    }

    /// The monoidal unit: a one-point set.
    pub fn unit() -> Self {
        FiniteSet { name: "I".into(), points: vec![Point::Atom("*".into())] }
    }

    /// The zero object.
    pub fn empty() -> Self {
        FiniteSet { name: "0".into(), points: Vec::new() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, p: &Point) -> Option<usize> {
        self.points.iter().position(|x| x == p)
    }

    pub fn disjoint_union(parts: &[&FiniteSet]) -> FiniteSet {
        let name = parts.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join("⊔");
        let points = parts
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.points.iter().map(move |p| Point::Tagged(i, Box::new(p.clone()))))
            .collect();
        FiniteSet { name, points }
    }

    pub fn product(a: &FiniteSet, b: &FiniteSet) -> FiniteSet {
        let points = a
            .points
            .iter()
            .flat_map(|p| b.points.iter().map(move |r| Point::Pair(Box::new(p.clone()), Box::new(r.clone()))))
            .collect();
        FiniteSet { name: format!("{}×{}", a.name, b.name), points }
    }

    /// The subset on the given indices, in the given order.
    pub fn subset(&self, name: impl Into<String>, indices: &[usize]) -> FiniteSet {
        FiniteSet { name: name.into(), points: indices.iter().map(|&i| self.points[i].clone()).collect() }
    }
}

/// A relation `dom -> cod` valued in a quantale.
///
/// Field order makes the derived ordering lexicographic on the entries, which
/// is the canonical order of members everywhere in the crate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QRel {
    entries: Vec<Elem>,
    dom: Arc<FiniteSet>,
    cod: Arc<FiniteSet>,
    q: Arc<Quantale>,
}

impl QRel {
    pub fn from_entries(q: &Arc<Quantale>, dom: &Arc<FiniteSet>, cod: &Arc<FiniteSet>, entries: Vec<Elem>) -> Result<Self> {
        if entries.len() != dom.len() * cod.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {}×{} relation",
                entries.len(),
                dom.len(),
                cod.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|e| !q.contains(**e)) {
            return Err(Error::UnknownElement(format!("index {} in quantale `{}`", bad.index(), q.name())));
        }
        Ok(Self::raw(q, dom, cod, entries))
    }

    pub(crate) fn raw(q: &Arc<Quantale>, dom: &Arc<FiniteSet>, cod: &Arc<FiniteSet>, entries: Vec<Elem>) -> Self {
        debug_assert_eq!(entries.len(), dom.len() * cod.len());
        QRel { entries, dom: dom.clone(), cod: cod.clone(), q: q.clone() }
    }

    pub fn from_fn(
        q: &Arc<Quantale>,
        dom: &Arc<FiniteSet>,
        cod: &Arc<FiniteSet>,
        f: impl Fn(usize, usize) -> Elem,
    ) -> Self {
        let entries = (0..dom.len()).flat_map(|i| (0..cod.len()).map(move |j| (i, j))).map(|(i, j)| f(i, j)).collect();
        Self::raw(q, dom, cod, entries)
    }

    pub fn zero(q: &Arc<Quantale>, dom: &Arc<FiniteSet>, cod: &Arc<FiniteSet>) -> Self {
        let z = q.zero();
        Self::from_fn(q, dom, cod, |_, _| z)
    }

    pub fn identity(q: &Arc<Quantale>, x: &Arc<FiniteSet>) -> Self {
        Self::scalar_identity(q, x, q.one())
    }

    /// `s • id_X`.
    pub fn scalar_identity(q: &Arc<Quantale>, x: &Arc<FiniteSet>, s: Elem) -> Self {
        let z = q.zero();
        Self::from_fn(q, x, x, |i, j| if i == j { s } else { z })
    }

    /// The identity on the points `subset` of `x` and zero elsewhere.
    pub fn partial_identity(q: &Arc<Quantale>, x: &Arc<FiniteSet>, subset: &[usize]) -> Self {
        let (z, one) = (q.zero(), q.one());
        Self::from_fn(q, x, x, |i, j| if i == j && subset.contains(&i) { one } else { z })
    }

    /// A relation with value 1 on the listed cells and 0 elsewhere.
    pub fn from_cells(q: &Arc<Quantale>, dom: &Arc<FiniteSet>, cod: &Arc<FiniteSet>, cells: &[(usize, usize)]) -> Self {
        let (z, one) = (q.zero(), q.one());
        Self::from_fn(q, dom, cod, |i, j| if cells.contains(&(i, j)) { one } else { z })
    }

    pub fn quantale(&self) -> &Arc<Quantale> {
        &self.q
    }

    pub fn dom(&self) -> &Arc<FiniteSet> {
        &self.dom
    }

    pub fn cod(&self) -> &Arc<FiniteSet> {
        &self.cod
    }

    pub fn entries(&self) -> &[Elem] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.entries[i * self.cod.len() + j]
    }

    /// `f` relates `i` to `j` when the entry is non-zero.
    pub fn relates(&self, i: usize, j: usize) -> bool {
        self.get(i, j) != self.q.zero()
    }

    pub fn is_zero(&self) -> bool {
        let z = self.q.zero();
        self.entries.iter().all(|&e| e == z)
    }

    pub fn is_endo(&self) -> bool {
        self.dom == self.cod
    }

    pub fn to_literal(&self) -> RelationLiteral {
        let z = self.q.zero();
        let mut entries = Vec::new();
        for i in 0..self.dom.len() {
            for j in 0..self.cod.len() {
                let e = self.get(i, j);
                if e != z {
                    entries.push((
                        self.dom.points[i].to_string(),
                        self.cod.points[j].to_string(),
                        self.q.element_name(e).to_string(),
                    ));
                }
            }
        }
        RelationLiteral {
            dom: self.dom.points.iter().map(Point::to_string).collect(),
            cod: self.cod.points.iter().map(Point::to_string).collect(),
            entries,
        }
    }

    pub fn from_literal(q: &Arc<Quantale>, lit: &RelationLiteral) -> Result<Self> {
        let ids = |v: &[String]| v.iter().map(|s| Point::Atom(s.clone())).collect::<Vec<_>>();
        let dom = Arc::new(FiniteSet::new("dom", ids(&lit.dom))?);
        let cod = Arc::new(FiniteSet::new("cod", ids(&lit.cod))?);
        Self::from_literal_on(q, &dom, &cod, lit)
    }

    /// Reads a literal whose point ids refer to existing sets.
    pub fn from_literal_on(q: &Arc<Quantale>, dom: &Arc<FiniteSet>, cod: &Arc<FiniteSet>, lit: &RelationLiteral) -> Result<Self> {
        let find = |set: &FiniteSet, id: &str| {
            set.points
                .iter()
                .position(|p| p.to_string() == id)
                .ok_or_else(|| Error::ObjectMismatch(format!("point `{id}` is not in `{}`", set.name)))
        };
        let mut entries = vec![q.zero(); dom.len() * cod.len()];
        for (x, y, v) in &lit.entries {
            let (i, j) = (find(dom, x)?, find(cod, y)?);
            entries[i * cod.len() + j] = q.element(v)?;
        }
        Ok(Self::raw(q, dom, cod, entries))
    }
}

impl fmt::Display for QRel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols = self.cod.len().max(1);
        let rows: Vec<String> = self
            .entries
            .chunks(cols)
            .map(|r| r.iter().map(|&e| self.q.element_name(e)).collect::<Vec<_>>().join(" "))
            .collect();
        write!(f, "[{}]", rows.join("; "))
    }
}

/// JSON relation literal: cells not listed are bottom.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationLiteral {
    pub dom: Vec<String>,
    pub cod: Vec<String>,
    pub entries: Vec<(String, String, String)>,
}

fn same_quantale(f: &QRel, g: &QRel) -> Result<()> {
    if f.q != g.q {
        return Err(Error::QuantaleMismatch(f.q.name().into(), g.q.name().into()));
    }
    Ok(())
}

/// Raw matrix product over `q`: `a` is `n×m`, `b` is `m×p`.
pub(crate) fn matmul(q: &Quantale, n: usize, m: usize, p: usize, a: &[Elem], b: &[Elem], out: &mut [Elem]) {
    let z = q.zero();
    for i in 0..n {
        for k in 0..p {
            let mut acc = z;
            for j in 0..m {
                acc = q.join(acc, q.mul(a[i * m + j], b[j * p + k]));
            }
            out[i * p + k] = acc;
        }
    }
}

/// First `f`, then `g`: entry `(x, z)` is the join over `y` of `f(x,y)·g(y,z)`.
pub fn compose(f: &QRel, g: &QRel) -> Result<QRel> {
    same_quantale(f, g)?;
    if f.cod != g.dom {
        return Err(Error::ObjectMismatch(format!(
            "codomain `{}` of the first relation is not the domain `{}` of the second",
            f.cod.name, g.dom.name
        )));
    }
    let (n, m, p) = (f.dom.len(), f.cod.len(), g.cod.len());
    let mut out = vec![f.q.zero(); n * p];
    matmul(&f.q, n, m, p, &f.entries, &g.entries, &mut out);
    Ok(QRel::raw(&f.q, &f.dom, &g.cod, out))
}

/// Transpose with the involution applied entrywise.
pub fn dagger(f: &QRel) -> QRel {
    QRel::from_fn(&f.q, &f.cod, &f.dom, |j, i| f.q.star(f.get(i, j)))
}

/// Pointwise join, the biproduct convolution `f + g`.
pub fn add(f: &QRel, g: &QRel) -> Result<QRel> {
    same_quantale(f, g)?;
    if f.dom != g.dom || f.cod != g.cod {
        return Err(Error::ShapeMismatch(format!(
            "cannot add {}→{} and {}→{}",
            f.dom.name, f.cod.name, g.dom.name, g.cod.name
        )));
    }
    let entries = f.entries.iter().zip(&g.entries).map(|(&a, &b)| f.q.join(a, b)).collect();
    Ok(QRel::raw(&f.q, &f.dom, &f.cod, entries))
}

/// Entrywise `s · f(x,y)`.
pub fn scalar_mul(s: Elem, f: &QRel) -> Result<QRel> {
    if !f.q.contains(s) {
        return Err(Error::ForeignScalar { scalar: s.index(), quantale: f.q.name().into() });
    }
    let entries = f.entries.iter().map(|&e| f.q.mul(s, e)).collect();
    Ok(QRel::raw(&f.q, &f.dom, &f.cod, entries))
}

/// Kronecker product on `dom f × dom g -> cod f × cod g`.
pub fn tensor(f: &QRel, g: &QRel) -> Result<QRel> {
    same_quantale(f, g)?;
    let dom = Arc::new(FiniteSet::product(&f.dom, &g.dom));
    let cod = Arc::new(FiniteSet::product(&f.cod, &g.cod));
    let (gd, gc) = (g.dom.len(), g.cod.len());
    Ok(QRel::from_fn(&f.q, &dom, &cod, |r, c| {
        f.q.mul(f.get(r / gd, c / gc), g.get(r % gd, c % gc))
    }))
}

/// Block-diagonal `f ⊕ g: dom f ⊔ dom g -> cod f ⊔ cod g`.
pub fn direct_sum(f: &QRel, g: &QRel) -> Result<QRel> {
    same_quantale(f, g)?;
    let dom = Arc::new(FiniteSet::disjoint_union(&[&f.dom, &g.dom]));
    let cod = Arc::new(FiniteSet::disjoint_union(&[&f.cod, &g.cod]));
    let (fd, fc) = (f.dom.len(), f.cod.len());
    let z = f.q.zero();
    Ok(QRel::from_fn(&f.q, &dom, &cod, |i, j| match (i < fd, j < fc) {
        (true, true) => f.get(i, j),
        (false, false) => g.get(i - fd, j - fc),
        _ => z,
    }))
}

/// Coprojection `κ_i: X_i -> X_0 ⊔ ... ⊔ X_k`.
pub fn coprojection(q: &Arc<Quantale>, parts: &[&FiniteSet], i: usize) -> QRel {
    let union = Arc::new(FiniteSet::disjoint_union(parts));
    let offset: usize = parts[..i].iter().map(|p| p.len()).sum();
    let part = Arc::new(parts[i].clone());
    let (z, one) = (q.zero(), q.one());
    QRel::from_fn(q, &part, &union, |a, b| if b == offset + a { one } else { z })
}

/// Projection `π_i = κ_i†`.
pub fn projection(q: &Arc<Quantale>, parts: &[&FiniteSet], i: usize) -> QRel {
    dagger(&coprojection(q, parts, i))
}

/// Diagonal `Δ: X -> X ⊕ X`, the pairing of two identities.
pub fn diagonal(q: &Arc<Quantale>, x: &Arc<FiniteSet>) -> QRel {
    let cod = Arc::new(FiniteSet::disjoint_union(&[x, x]));
    let n = x.len();
    let (z, one) = (q.zero(), q.one());
    QRel::from_fn(q, x, &cod, |i, j| if j % n == i { one } else { z })
}

/// Codiagonal `∇: Y ⊕ Y -> Y`, the copairing of two identities.
pub fn codiagonal(q: &Arc<Quantale>, y: &Arc<FiniteSet>) -> QRel {
    dagger(&diagonal(q, y))
}

/// The composite `∇ ∘ (f ⊕ g) ∘ Δ`, computed literally from the biproduct
/// structure. Agrees with [`add`].
pub fn biproduct_convolution(f: &QRel, g: &QRel) -> Result<QRel> {
    if f.dom != g.dom || f.cod != g.cod {
        return Err(Error::ShapeMismatch("biproduct convolution needs parallel relations".into()));
    }
    let split = compose(&diagonal(&f.q, &f.dom), &direct_sum(f, g)?)?;
    compose(&split, &codiagonal(&f.q, &f.cod))
}

/// Right unitor `X -> X ⊗ I`.
pub fn right_unitor(q: &Arc<Quantale>, x: &Arc<FiniteSet>) -> QRel {
    let xi = Arc::new(FiniteSet::product(x, &FiniteSet::unit()));
    let (z, one) = (q.zero(), q.one());
    QRel::from_fn(q, x, &xi, |i, j| if i == j { one } else { z })
}

/// The scalar `s` as an endomorphism of the monoidal unit.
pub fn scalar_relation(q: &Arc<Quantale>, s: Elem) -> QRel {
    let unit = Arc::new(FiniteSet::unit());
    QRel::raw(q, &unit, &unit, vec![s])
}

/// `X ≅ X⊗I --f⊗s--> Y⊗I ≅ Y`. Agrees with [`scalar_mul`].
pub fn scalar_mul_via_tensor(s: Elem, f: &QRel) -> Result<QRel> {
    if !f.q.contains(s) {
        return Err(Error::ForeignScalar { scalar: s.index(), quantale: f.q.name().into() });
    }
    let lifted = tensor(f, &scalar_relation(&f.q, s))?;
    let there = compose(&right_unitor(&f.q, &f.dom), &lifted)?;
    compose(&there, &dagger(&right_unitor(&f.q, &f.cod)))
}

/// Checks that `parts` is a partition of `0..n` into non-empty blocks.
fn check_partition(parts: &[Vec<usize>], n: usize, what: &str) -> Result<()> {
    let mut seen = vec![false; n];
    for part in parts {
        if part.is_empty() {
            return Err(Error::NotAPartition(format!("empty block in {what} partition")));
        }
        for &i in part {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::NotAPartition(format!("index {i} out of range or repeated in {what} partition")));
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::NotAPartition(format!("{what} partition does not cover the carrier")));
    }
    Ok(())
}

/// A relation cut into blocks along partitions of its domain and codomain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockMatrix {
    pub dom_parts: Vec<Vec<usize>>,
    pub cod_parts: Vec<Vec<usize>>,
    /// `blocks[i][j]: dom_parts[i] -> cod_parts[j]`.
    pub blocks: Vec<Vec<QRel>>,
}

impl BlockMatrix {
    /// The block matrix of `f†`: transposed, with every block daggered.
    pub fn dagger(&self) -> BlockMatrix {
        let blocks = (0..self.cod_parts.len())
            .map(|j| (0..self.dom_parts.len()).map(|i| dagger(&self.blocks[i][j])).collect())
            .collect();
        BlockMatrix { dom_parts: self.cod_parts.clone(), cod_parts: self.dom_parts.clone(), blocks }
    }
}

pub fn blocks(f: &QRel, dom_parts: &[Vec<usize>], cod_parts: &[Vec<usize>]) -> Result<BlockMatrix> {
    check_partition(dom_parts, f.dom.len(), "domain")?;
    check_partition(cod_parts, f.cod.len(), "codomain")?;
    let blocks = dom_parts
        .iter()
        .enumerate()
        .map(|(bi, rows)| {
            let dom = Arc::new(f.dom.subset(format!("{}[{bi}]", f.dom.name), rows));
            cod_parts
                .iter()
                .enumerate()
                .map(|(bj, cols)| {
                    let cod = Arc::new(f.cod.subset(format!("{}[{bj}]", f.cod.name), cols));
                    QRel::from_fn(&f.q, &dom, &cod, |i, j| f.get(rows[i], cols[j]))
                })
                .collect()
        })
        .collect();
    Ok(BlockMatrix { dom_parts: dom_parts.to_vec(), cod_parts: cod_parts.to_vec(), blocks })
}

/// Inverse of [`blocks`]: writes every block back into a `dom × cod` matrix.
pub fn reassemble(m: &BlockMatrix, dom: &Arc<FiniteSet>, cod: &Arc<FiniteSet>) -> Result<QRel> {
    check_partition(&m.dom_parts, dom.len(), "domain")?;
    check_partition(&m.cod_parts, cod.len(), "codomain")?;
    let q = m.blocks.first().and_then(|r| r.first()).map(|b| b.q.clone()).ok_or_else(|| {
        Error::NotAPartition("block matrix has no blocks".into())
    })?;
    let mut entries = vec![q.zero(); dom.len() * cod.len()];
    for (bi, rows) in m.dom_parts.iter().enumerate() {
        for (bj, cols) in m.cod_parts.iter().enumerate() {
            let b = &m.blocks[bi][bj];
            for (i, &r) in rows.iter().enumerate() {
                for (j, &c) in cols.iter().enumerate() {
                    entries[r * cod.len() + c] = b.get(i, j);
                }
            }
        }
    }
    Ok(QRel::raw(&q, dom, cod, entries))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupportPair {
    /// Domain indices related to something.
    pub supp: Vec<usize>,
    /// Codomain indices something is related to.
    pub cosupp: Vec<usize>,
}

pub fn support(f: &QRel) -> SupportPair {
    SupportPair {
        supp: (0..f.dom.len()).filter(|&i| (0..f.cod.len()).any(|j| f.relates(i, j))).collect(),
        cosupp: (0..f.cod.len()).filter(|&j| (0..f.dom.len()).any(|i| f.relates(i, j))).collect(),
    }
}
