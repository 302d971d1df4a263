//! Finite involutive commutative quantales.
//!
//! A quantale is stored as operation tables over an ordered carrier. The
//! carrier order is the order of the defining document and every enumeration
//! in the crate sorts by it. Because the carrier is finite, a complete
//! join-semilattice is the same thing as a join-semilattice with a least
//! element, and distributivity over arbitrary joins reduces to distributivity
//! over binary joins and the bottom element.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homsearch::{self, Tables};

/// Index of an element in a quantale's carrier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Elem(pub u8);

impl Elem {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Largest carrier that fits the `Elem` index type.
pub const MAX_ELEMENTS: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quantale {
    name: String,
    elements: Vec<String>,
    join: Vec<Elem>,
    mul: Vec<Elem>,
    unit: Elem,
    involution: Vec<Elem>,
    involution_given: bool,
    bottom: Option<Elem>,
    top: Elem,
}

/// The JSON quantale-definition document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantaleDoc {
    pub name: String,
    pub elements: Vec<String>,
    pub join: Vec<Vec<String>>,
    pub mul: Vec<Vec<String>>,
    pub unit: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub involution: Option<Vec<String>>,
}

impl Quantale {
    /// Parses a quantale-definition document. The tables are taken verbatim;
    /// the quantale laws are checked separately by [`verify_quantale`].
    pub fn load(json: &str) -> Result<Self> {
        let doc: QuantaleDoc = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_doc(&doc)
    }

    pub fn from_doc(doc: &QuantaleDoc) -> Result<Self> {
        let n = doc.elements.len();
        if n == 0 {
            return Err(Error::Parse("a quantale needs at least one element".into()));
        }
        if n > MAX_ELEMENTS {
            return Err(Error::InvalidParameter(format!(
                "{n} elements exceeds the supported maximum of {MAX_ELEMENTS}"
            )));
        }
        let mut ids: HashMap<&str, Elem> = HashMap::with_capacity(n);
        for (i, e) in doc.elements.iter().enumerate() {
            if ids.insert(e.as_str(), Elem(i as u8)).is_some() {
                return Err(Error::Parse(format!("duplicate element id `{e}`")));
            }
        }
        let lookup = |id: &str| ids.get(id).copied().ok_or_else(|| Error::UnknownElement(id.to_string()));
        let table = |name: &str, rows: &[Vec<String>]| -> Result<Vec<Elem>> {
            if rows.len() != n {
                return Err(Error::Arity { table: name.to_string(), expected: n * n, found: rows.iter().map(Vec::len).sum() });
            }
            let mut out = Vec::with_capacity(n * n);
            for row in rows {
                if row.len() != n {
                    return Err(Error::Arity { table: name.to_string(), expected: n * n, found: rows.iter().map(Vec::len).sum() });
                }
                for id in row {
                    out.push(lookup(id)?);
                }
            }
            Ok(out)
        };
        let join = table("join", &doc.join)?;
        let mul = table("mul", &doc.mul)?;
        let unit = lookup(&doc.unit)?;
        let (involution, involution_given) = match &doc.involution {
            Some(inv) => {
                if inv.len() != n {
                    return Err(Error::Arity { table: "involution".into(), expected: n, found: inv.len() });
                }
                (inv.iter().map(|id| lookup(id)).collect::<Result<Vec<_>>>()?, true)
            }
            None => ((0..n).map(|i| Elem(i as u8)).collect(), false),
        };
        Ok(Self::assemble(doc.name.clone(), doc.elements.clone(), join, mul, unit, involution, involution_given))
    }

    fn assemble(
        name: String,
        elements: Vec<String>,
        join: Vec<Elem>,
        mul: Vec<Elem>,
        unit: Elem,
        involution: Vec<Elem>,
        involution_given: bool,
    ) -> Self {
        let n = elements.len();
        let bottom = (0..n)
            .map(|b| Elem(b as u8))
            .find(|&b| (0..n).all(|x| join[b.index() * n + x].index() == x && join[x * n + b.index()].index() == x));
        let top = (1..n).fold(Elem(0), |acc, x| join[acc.index() * n + x]);
        Quantale { name, elements, join, mul, unit, involution, involution_given, bottom, top }
    }

    pub fn to_doc(&self) -> QuantaleDoc {
        let n = self.len();
        let ids = |t: &[Elem]| -> Vec<Vec<String>> {
            t.chunks(n).map(|row| row.iter().map(|&e| self.elements[e.index()].clone()).collect()).collect()
        };
        QuantaleDoc {
            name: self.name.clone(),
            elements: self.elements.clone(),
            join: ids(&self.join),
            mul: ids(&self.mul),
            unit: self.elements[self.unit.index()].clone(),
            involution: self
                .involution_given
                .then(|| self.involution.iter().map(|&e| self.elements[e.index()].clone()).collect()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("document serialization cannot fail")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elems(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.elements.len()).map(|i| Elem(i as u8))
    }

    pub fn element_name(&self, e: Elem) -> &str {
        &self.elements[e.index()]
    }

    pub fn element(&self, id: &str) -> Result<Elem> {
        self.elements
            .iter()
            .position(|e| e == id)
            .map(|i| Elem(i as u8))
            .ok_or_else(|| Error::UnknownElement(id.to_string()))
    }

    pub fn contains(&self, e: Elem) -> bool {
        e.index() < self.len()
    }

    #[inline]
    pub fn join(&self, a: Elem, b: Elem) -> Elem {
        self.join[a.index() * self.len() + b.index()]
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a.index() * self.len() + b.index()]
    }

    #[inline]
    pub fn star(&self, a: Elem) -> Elem {
        self.involution[a.index()]
    }

    pub fn one(&self) -> Elem {
        self.unit
    }

    /// The bottom element, i.e. the semiring zero.
    ///
    /// Panics if the join table has no identity; such a table fails
    /// [`verify_quantale`] and is not a valid input to any construction.
    pub fn zero(&self) -> Elem {
        self.bottom.expect("join table has no least element; verify the quantale first")
    }

    pub fn bottom(&self) -> Option<Elem> {
        self.bottom
    }

    pub fn top(&self) -> Elem {
        self.top
    }

    /// `a <= b` in the order induced by the join.
    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        self.join(a, b) == b
    }

    pub fn join_all(&self, xs: impl IntoIterator<Item = Elem>) -> Elem {
        xs.into_iter().fold(self.zero(), |acc, x| self.join(acc, x))
    }

    pub fn has_trivial_involution(&self) -> bool {
        self.elems().all(|e| self.star(e) == e)
    }

    pub fn builtin(b: Builtin) -> Result<Self> {
        b.build()
    }
}

impl fmt::Display for Quantale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {{{}}}", self.name, self.elements.join(", "))
    }
}

/// Named quantales available without a document.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    Boolean2,
    /// The `n`-element chain with `min` as multiplication.
    GodelChain(usize),
    /// The `n`-element chain `{0, 1/(n-1), ..., 1}` with the Łukasiewicz t-norm.
    LukasiewiczChain(usize),
    /// `(P({1..n}), ∪, ∩)` with unit the full set.
    Powerset(usize),
}

impl Builtin {
    pub fn tag(&self) -> String {
        match self {
            Builtin::Boolean2 => "boolean2".into(),
            Builtin::GodelChain(n) => format!("godel{n}"),
            Builtin::LukasiewiczChain(n) => format!("lukasiewicz{n}"),
            Builtin::Powerset(n) => format!("powerset{n}"),
        }
    }

    fn build(self) -> Result<Quantale> {
        match self {
            Builtin::Boolean2 => Ok(chain("boolean2".into(), 2, |a, b| a.min(b))),
            Builtin::GodelChain(n) => {
                if n < 2 {
                    return Err(Error::InvalidParameter(format!("godel_chain needs n >= 2, got {n}")));
                }
                check_size(n)?;
                Ok(chain(self.tag(), n, |a, b| a.min(b)))
            }
            Builtin::LukasiewiczChain(n) => {
                if n < 2 {
                    return Err(Error::InvalidParameter(format!("lukasiewicz_chain needs n >= 2, got {n}")));
                }
                check_size(n)?;
                let top = n - 1;
                Ok(chain(self.tag(), n, move |a, b| (a + b).saturating_sub(top)))
            }
            Builtin::Powerset(n) => {
                if n < 1 {
                    return Err(Error::InvalidParameter("powerset needs n >= 1".into()));
                }
                if n > 8 {
                    return Err(Error::InvalidParameter(format!(
                        "powerset({n}) has more than {MAX_ELEMENTS} elements"
                    )));
                }
                Ok(powerset(self.tag(), n))
            }
        }
    }
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_ELEMENTS {
        return Err(Error::InvalidParameter(format!("chain of length {n} exceeds {MAX_ELEMENTS}")));
    }
    Ok(())
}

/// Chain `0 < 1/(n-1) < ... < 1` with `max` as join and the given
/// multiplication on indices.
fn chain(name: String, n: usize, mul: impl Fn(usize, usize) -> usize) -> Quantale {
    let top = n - 1;
    let label = |i: usize| match i {
        0 => "0".to_string(),
        i if i == top => "1".to_string(),
        i => {
            let g = num_integer::gcd(i, top);
            format!("{}/{}", i / g, top / g)
        }
    };
    let mut join = Vec::with_capacity(n * n);
    let mut mul_t = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            join.push(Elem(a.max(b) as u8));
            mul_t.push(Elem(mul(a, b) as u8));
        }
    }
    let involution = (0..n).map(|i| Elem(i as u8)).collect();
    Quantale::assemble(name, (0..n).map(label).collect(), join, mul_t, Elem(top as u8), involution, false)
}

fn powerset(name: String, n: usize) -> Quantale {
    let size = 1usize << n;
    let label = |mask: usize| {
        let parts: Vec<String> = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| (b + 1).to_string()).collect();
        format!("{{{}}}", parts.join(","))
    };
    let mut join = Vec::with_capacity(size * size);
    let mut mul = Vec::with_capacity(size * size);
    for a in 0..size {
        for b in 0..size {
            join.push(Elem((a | b) as u8));
            mul.push(Elem((a & b) as u8));
        }
    }
    let involution = (0..size).map(|i| Elem(i as u8)).collect();
    Quantale::assemble(name, (0..size).map(label).collect(), join, mul, Elem((size - 1) as u8), involution, false)
}

impl FromStr for Builtin {
    type Err = Error;

    /// Accepts `boolean2`, `godel3`, `godel_chain(3)`, `lukasiewicz4`,
    /// `lukasiewicz_chain(4)`, `powerset2`, `powerset(2)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "boolean2" || s == "2" {
            return Ok(Builtin::Boolean2);
        }
        let (stem, param) = match s.find('(') {
            Some(open) if s.ends_with(')') => (&s[..open], &s[open + 1..s.len() - 1]),
            _ => {
                let split = s.find(|c: char| c.is_ascii_digit()).ok_or_else(|| Error::UnknownBuiltin(s.into()))?;
                (&s[..split], &s[split..])
            }
        };
        let n: usize = param
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("`{param}` is not a size in `{s}`")))?;
        let b = match stem {
            "godel" | "godel_chain" => Builtin::GodelChain(n),
            "lukasiewicz" | "lukasiewicz_chain" => Builtin::LukasiewiczChain(n),
            "powerset" => Builtin::Powerset(n),
            _ => return Err(Error::UnknownBuiltin(s.into())),
        };
        Ok(b)
    }
}

/// Looks up a builtin quantale by tag, e.g. `godel_chain(3)`.
pub fn builtin_quantale(tag: &str) -> Result<Quantale> {
    tag.parse::<Builtin>()?.build()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub axiom: String,
    pub witness: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

impl AxiomReport {
    pub fn violated(&self, axiom: &str) -> Option<&Violation> {
        self.violations.iter().find(|v| v.axiom == axiom)
    }
}

/// Exhaustively checks the axioms of a non-trivial involutive commutative
/// quantale. Each violated axiom is reported once, with the
/// lexicographically first witness.
pub fn verify_quantale(q: &Quantale) -> AxiomReport {
    let mut violations = Vec::new();
    let name = |e: Elem| q.element_name(e).to_string();
    let mut report = |axiom: &str, witness: Option<Vec<Elem>>| {
        if let Some(w) = witness {
            violations.push(Violation { axiom: axiom.to_string(), witness: w.into_iter().map(name).collect() });
        }
    };
    let e1 = || q.elems();
    let e2 = || e1().flat_map(move |x| e1().map(move |y| (x, y)));
    let e3 = || e2().flat_map(move |(x, y)| e1().map(move |z| (x, y, z)));

    report("join_idempotent", e1().find(|&x| q.join(x, x) != x).map(|x| vec![x]));
    report("join_commutative", e2().find(|&(x, y)| q.join(x, y) != q.join(y, x)).map(|(x, y)| vec![x, y]));
    report(
        "join_associative",
        e3().find(|&(x, y, z)| q.join(q.join(x, y), z) != q.join(x, q.join(y, z))).map(|(x, y, z)| vec![x, y, z]),
    );
    report("join_bottom", q.bottom().is_none().then(Vec::new));
    report("mul_commutative", e2().find(|&(x, y)| q.mul(x, y) != q.mul(y, x)).map(|(x, y)| vec![x, y]));
    report(
        "mul_associative",
        e3().find(|&(x, y, z)| q.mul(q.mul(x, y), z) != q.mul(x, q.mul(y, z))).map(|(x, y, z)| vec![x, y, z]),
    );
    report(
        "mul_unit",
        e1().find(|&x| q.mul(q.one(), x) != x || q.mul(x, q.one()) != x).map(|x| vec![x]),
    );
    report(
        "distributivity",
        e3().find(|&(x, y, z)| {
            q.mul(x, q.join(y, z)) != q.join(q.mul(x, y), q.mul(x, z))
                || q.mul(q.join(y, z), x) != q.join(q.mul(y, x), q.mul(z, x))
        })
        .map(|(x, y, z)| vec![x, y, z]),
    );
    if let Some(bot) = q.bottom() {
        report(
            "bottom_absorbing",
            e1().find(|&x| q.mul(x, bot) != bot || q.mul(bot, x) != bot).map(|x| vec![x]),
        );
    }
    report("involution_self_inverse", e1().find(|&x| q.star(q.star(x)) != x).map(|x| vec![x]));
    report(
        "involution_join_hom",
        e2().find(|&(x, y)| q.star(q.join(x, y)) != q.join(q.star(x), q.star(y))).map(|(x, y)| vec![x, y]),
    );
    report(
        "involution_mul_antihom",
        e2().find(|&(x, y)| q.star(q.mul(x, y)) != q.mul(q.star(y), q.star(x))).map(|(x, y)| vec![x, y]),
    );
    report("involution_unit", (q.star(q.one()) != q.one()).then(|| vec![q.one()]));
    report("nontrivial", (q.bottom() == Some(q.top())).then(Vec::new));

    AxiomReport { passed: violations.is_empty(), violations }
}

/// First pair of non-zero elements whose product is zero.
pub fn zero_divisor_witness(q: &Quantale) -> Option<(Elem, Elem)> {
    let zero = q.zero();
    q.elems()
        .filter(|&x| x != zero)
        .flat_map(|x| q.elems().filter(move |&y| y != zero).map(move |y| (x, y)))
        .find(|&(x, y)| q.mul(x, y) == zero)
}

pub fn is_zdf(q: &Quantale) -> bool {
    zero_divisor_witness(q).is_none()
}

/// A map of carriers preserving join, bottom, multiplication, unit and
/// involution.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RigHom {
    pub source: Arc<Quantale>,
    pub target: Arc<Quantale>,
    pub map: Vec<Elem>,
}

impl RigHom {
    pub fn apply(&self, e: Elem) -> Elem {
        self.map[e.index()]
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.map.iter().enumerate().all(|(i, e)| e.index() == i)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &RigHom) -> Result<RigHom> {
        if self.target != other.source {
            return Err(Error::QuantaleMismatch(self.target.name().into(), other.source.name().into()));
        }
        Ok(RigHom {
            source: self.source.clone(),
            target: other.target.clone(),
            map: self.map.iter().map(|&e| other.apply(e)).collect(),
        })
    }

    /// Checks every preservation law exhaustively.
    pub fn is_homomorphism(&self) -> bool {
        let (s, t) = (&*self.source, &*self.target);
        let h = |e| self.apply(e);
        h(s.zero()) == t.zero()
            && h(s.one()) == t.one()
            && s.elems().all(|x| h(s.star(x)) == t.star(h(x)))
            && s.elems().all(|x| {
                s.elems().all(|y| h(s.join(x, y)) == t.join(h(x), h(y)) && h(s.mul(x, y)) == t.mul(h(x), h(y)))
            })
    }

    /// The unique quantale map `2 -> q`.
    pub fn bang(q: &Arc<Quantale>) -> RigHom {
        RigHom {
            source: Arc::new(Builtin::Boolean2.build().expect("boolean2 builds")),
            target: q.clone(),
            map: vec![q.zero(), q.one()],
        }
    }

    /// The collapse `w: q -> 2` sending every non-zero element to 1. It is a
    /// homomorphism exactly when `q` is zero-divisor free.
    pub fn collapse(q: &Arc<Quantale>) -> Result<RigHom> {
        if !is_zdf(q) {
            return Err(Error::NotZdf(q.name().into()));
        }
        let zero = q.zero();
        Ok(RigHom {
            source: q.clone(),
            target: Arc::new(Builtin::Boolean2.build().expect("boolean2 builds")),
            map: q.elems().map(|e| if e == zero { Elem(0) } else { Elem(1) }).collect(),
        })
    }
}

/// All rig homomorphisms `source -> target`, ordered lexicographically by
/// their tables.
pub fn homomorphisms(source: &Arc<Quantale>, target: &Arc<Quantale>) -> Vec<RigHom> {
    homsearch::homomorphisms(&Tables::from_quantale(source), target)
        .into_iter()
        .map(|map| RigHom { source: source.clone(), target: target.clone(), map })
        .collect()
}

pub fn endomorphisms(q: &Arc<Quantale>) -> Vec<RigHom> {
    homomorphisms(q, q)
}
