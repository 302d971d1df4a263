//! One test per acceptance criterion. Each prints a single PASS/FAIL line
//! with its elapsed time against a limit pinned here.

use std::collections::BTreeSet;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use qspec::contextuality::{build_presheaf, canonical_section, global_sections, ks_verdict_on, section_element};
use qspec::quantale::{builtin_quantale, is_zdf, verify_quantale, Elem, Quantale};
use qspec::relations::{add, biproduct_convolution, compose, scalar_mul, scalar_mul_via_tensor, FiniteSet, QRel};
use qspec::spectra::{characters, characters_to_two, kernel_two, prime_scan, xi, SpectrumKind};
use qspec::subalgebra::{
    diagonal_algebra, enumerate_vn, primitive_idempotents, subunital_idempotents, AlgebraPoset, EnumerationMode,
    Subsemialgebra,
};
use qspec::zariski::{check_continuity, kolmogorov_quotient, separation_report, verify_quotient_xi, zariski};

const RANDOM_CASES: usize = 1000;
const RANDOM_SEED: u64 = 0x5eed;

type Check = std::result::Result<(), String>;

fn criterion(n: u32, name: &str, limit: Duration, body: impl FnOnce() -> Check) {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let verdict = if outcome.is_ok() && in_time { "PASS" } else { "FAIL" };
    let detail = match (&outcome, in_time) {
        (Err(e), _) => format!(": {e}"),
        (Ok(()), false) => ": time limit exceeded".to_string(),
        _ => String::new(),
    };
    println!("acceptance {n} [{name}] {verdict} in {:.3}s (limit {}s){detail}", elapsed.as_secs_f64(), limit.as_secs());
    assert!(outcome.is_ok() && in_time, "criterion {n} failed{detail}");
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Check {
    if ok { Ok(()) } else { Err(what()) }
}

fn q(tag: &str) -> Arc<Quantale> {
    Arc::new(builtin_quantale(tag).unwrap())
}

fn carrier(n: usize) -> Arc<FiniteSet> {
    Arc::new(FiniteSet::range("X", n))
}

fn poset(tag: &str, n: usize, mode: EnumerationMode) -> std::result::Result<Arc<AlgebraPoset>, String> {
    enumerate_vn(&carrier(n), &q(tag), mode).map(Arc::new).map_err(|e| format!("{tag} |X|={n}: {e}"))
}

/// The instances of criteria 3, 4 and 7.
fn decomposition_instances() -> std::result::Result<Vec<(String, Arc<AlgebraPoset>)>, String> {
    [
        ("boolean2", 1, EnumerationMode::Exhaustive),
        ("boolean2", 2, EnumerationMode::Exhaustive),
        ("boolean2", 3, EnumerationMode::Generated(2)),
        ("godel3", 2, EnumerationMode::Exhaustive),
    ]
    .into_iter()
    .map(|(tag, n, mode)| Ok((format!("{tag} |X|={n} {mode}"), poset(tag, n, mode)?)))
    .collect()
}

#[test]
fn criterion_1_quantale_kernel() {
    criterion(1, "quantale kernel", Duration::from_secs(1), || {
        let tags = [
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
        for tag in tags {
            let q = q(tag);
            let r = verify_quantale(&q);
            ensure(r.passed, || format!("{tag}: {:?}", r.violations))?;
            // powerset1 = {∅, {1}} is a copy of boolean2 and so also ZDF
            let expected = tag == "boolean2" || tag.starts_with("godel") || tag == "powerset1";
            ensure(is_zdf(&q) == expected, || format!("{tag}: is_zdf = {}", is_zdf(&q)))?;
        }
        Ok(())
    })
}

fn all_relations(q: &Arc<Quantale>, n: usize, m: usize) -> Vec<QRel> {
    let (x, y) = (carrier(n), Arc::new(FiniteSet::range("Y", m)));
    let k = q.len();
    (0..k.pow((n * m) as u32))
        .map(|mut c| {
            let entries = (0..n * m)
                .map(|_| {
                    let e = Elem((c % k) as u8);
                    c /= k;
                    e
                })
                .collect();
            QRel::from_entries(q, &x, &y, entries).unwrap()
        })
        .collect()
}

fn enrichment_agrees(f: &QRel, g: &QRel, s: Elem) -> Check {
    let sum = add(f, g).map_err(|e| e.to_string())?;
    let conv = biproduct_convolution(f, g).map_err(|e| e.to_string())?;
    ensure(sum == conv, || format!("add differs from the biproduct composite at {f} + {g}"))?;
    let direct = scalar_mul(s, f).map_err(|e| e.to_string())?;
    let via = scalar_mul_via_tensor(s, f).map_err(|e| e.to_string())?;
    ensure(direct == via, || format!("scalar action differs from the unitor composite at {s:?} • {f}"))
}

#[test]
fn criterion_2_enrichment_oracles() {
    criterion(2, "enrichment oracles", Duration::from_secs(10), || {
        let b = q("boolean2");
        let mut exhaustive = 0;
        for n in 1..=2 {
            for m in 1..=2 {
                let rels = all_relations(&b, n, m);
                for f in &rels {
                    for g in &rels {
                        for s in b.elems() {
                            enrichment_agrees(f, g, s)?;
                            exhaustive += 1;
                        }
                    }
                }
            }
        }
        ensure(exhaustive > 0, || "no boolean cases".into())?;
        let g3 = q("godel3");
        let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED);
        for _ in 0..RANDOM_CASES {
            let (n, m) = (rng.random_range(1..=3usize), rng.random_range(1..=3usize));
            let (x, y) = (carrier(n), Arc::new(FiniteSet::range("Y", m)));
            let mut random = || -> QRel {
                let entries = (0..n * m).map(|_| Elem(rng.random_range(0..g3.len()) as u8)).collect();
                QRel::from_entries(&g3, &x, &y, entries).unwrap()
            };
            let (f, g) = (random(), random());
            let s = Elem(rng.random_range(0..g3.len()) as u8);
            enrichment_agrees(&f, &g, s)?;
        }
        Ok(())
    })
}

/// Orthogonal idempotents joining to the unit, each primitive, with
/// `a ↦ (e_i a)` a bijection onto the product of the components.
fn decomposition_holds(label: &str, idx: usize, a: &Subsemialgebra) -> Check {
    let fail = |what: &str| format!("{label} #{idx}: {what}");
    let d = primitive_idempotents(a).map_err(|e| fail(&e.to_string()))?;
    let internal = d.check(a);
    ensure(internal.is_empty(), || fail(&internal.join("; ")))?;
    let m = a.members();
    let (q, x) = (a.quantale(), a.carrier());
    let es: Vec<&QRel> = d.idempotents.iter().map(|&i| &m[i]).collect();
    let c = |f: &QRel, g: &QRel| compose(f, g).expect("same carrier");
    let j = |f: &QRel, g: &QRel| add(f, g).expect("same carrier");
    for (i, e) in es.iter().enumerate() {
        ensure(c(e, e) == **e, || fail("an idempotent is not idempotent"))?;
        for f in &es[i + 1..] {
            ensure(c(e, f).is_zero(), || fail("idempotents are not orthogonal"))?;
        }
    }
    let unit = es.iter().fold(QRel::zero(q, x, x), |acc, e| j(&acc, e));
    ensure(unit == QRel::identity(q, x), || fail("idempotents do not join to the unit"))?;
    let sub = subunital_idempotents(a).map_err(|e| fail(&e.to_string()))?;
    for e in &es {
        let below = sub.iter().filter(|&&s| {
            let p = c(&m[s], e);
            p == m[s] && !p.is_zero() && p != **e
        });
        ensure(below.count() == 0, || fail("an idempotent is not primitive"))?;
    }
    // injective: a is the join of its components
    for f in m {
        let back = es.iter().fold(QRel::zero(q, x, x), |acc, e| j(&acc, &c(e, f)));
        ensure(back == *f, || fail("a member is not the join of its components"))?;
    }
    // surjective: any choice of components joins to a member projecting back
    let comps: Vec<BTreeSet<QRel>> = es.iter().map(|e| m.iter().map(|f| c(e, f)).collect()).collect();
    let total: usize = comps.iter().map(BTreeSet::len).product();
    ensure(total == m.len(), || fail(&format!("|∏ e_i A| = {total} but |A| = {}", m.len())))?;
    let lists: Vec<Vec<&QRel>> = comps.iter().map(|s| s.iter().collect()).collect();
    for mut code in 0..total {
        let mut joined = QRel::zero(q, x, x);
        let mut picks = Vec::with_capacity(lists.len());
        for l in &lists {
            let p = l[code % l.len()];
            code /= l.len();
            joined = j(&joined, p);
            picks.push(p);
        }
        ensure(a.contains(&joined), || fail("a join of components is not a member"))?;
        for (e, p) in es.iter().zip(&picks) {
            ensure(c(e, &joined) == **p, || fail("reassembly does not project back"))?;
        }
    }
    Ok(())
}

#[test]
fn criterion_3_decomposition() {
    criterion(3, "decomposition", Duration::from_secs(120), || {
        for (label, p) in decomposition_instances()? {
            for (i, a) in p.objects().iter().enumerate() {
                decomposition_holds(&label, i, a)?;
            }
        }
        Ok(())
    })
}

#[test]
fn criterion_4_spectra_correspondence() {
    criterion(4, "spectra correspondence", Duration::from_secs(60), || {
        for (label, p) in decomposition_instances()? {
            let boolean = p.quantale().name() == "boolean2";
            for (i, a) in p.objects().iter().enumerate() {
                let fail = |what: &str| format!("{label} #{i}: {what}");
                let gammas = characters_to_two(a).map_err(|e| fail(&e.to_string()))?;
                let primes = prime_scan(a).map_err(|e| fail(&e.to_string()))?.primes;
                let mut kernels: Vec<Vec<usize>> = gammas.iter().map(|g| kernel_two(g).members).collect();
                kernels.sort();
                let distinct = kernels.windows(2).all(|w| w[0] != w[1]);
                ensure(distinct && kernels == primes, || fail("kernels of maps to 2 are not the prime spectrum"))?;
                let d = primitive_idempotents(a).map_err(|e| fail(&e.to_string()))?;
                for g in &gammas {
                    let ones = d.idempotents.iter().filter(|&&e| g.values[e] != Elem(0)).count();
                    ensure(ones == 1, || fail(&format!("a map to 2 is 1 on {ones} primitive idempotents")))?;
                }
                if boolean {
                    let rhos = characters(a).map_err(|e| fail(&e.to_string()))?;
                    let mut images = rhos
                        .iter()
                        .map(|r| xi(a, r).map(|k| k.members))
                        .collect::<qspec::Result<Vec<_>>>()
                        .map_err(|e| fail(&e.to_string()))?;
                    images.sort();
                    ensure(images == primes && images.windows(2).all(|w| w[0] != w[1]), || fail("ξ is not a bijection"))?;
                }
            }
        }
        Ok(())
    })
}

#[test]
fn criterion_5_worked_example_surrogate() {
    criterion(5, "worked example surrogate", Duration::from_secs(10), || {
        let d = diagonal_algebra(&carrier(2), &q("godel3"));
        let gel = zariski(&d, SpectrumKind::Gelfand).map_err(|e| e.to_string())?;
        let pri = zariski(&d, SpectrumKind::Prime).map_err(|e| e.to_string())?;
        ensure(pri.len() == 4, || format!("|Spec_P| = {}", pri.len()))?;
        ensure(gel.len() == 6, || format!("|Spec_G| = {}", gel.len()))?;
        let sp = separation_report(&pri);
        ensure(sp.t0 && !sp.t1, || format!("prime side T0={} T1={}", sp.t0, sp.t1))?;
        let sg = separation_report(&gel);
        ensure(!sg.t0 && sg.indistinguishable_pairs.len() == 2, || {
            format!("Gelfand side T0={} with pairs {:?}", sg.t0, sg.indistinguishable_pairs)
        })?;
        ensure(kolmogorov_quotient(&gel).space.len() == 4, || "Kolmogorov quotient does not have 4 points".into())?;
        let check = verify_quotient_xi(&d).map_err(|e| e.to_string())?;
        ensure(check.holds(), || format!("ξ is not the Kolmogorov quotient: {check:?}"))?;
        ensure(sg.indistinguishable_pairs.iter().all(|&(a, b)| check.xi[a] == check.xi[b]), || {
            "ξ separates indistinguishable characters".into()
        })
    })
}

#[test]
fn criterion_6_non_contextuality() {
    criterion(6, "non-contextuality", Duration::from_secs(300), || {
        for (tag, n) in [("boolean2", 1), ("boolean2", 2), ("boolean2", 3), ("godel3", 1), ("godel3", 2)] {
            let label = format!("{tag} |X|={n}");
            let p = poset(tag, n, EnumerationMode::Exhaustive)?;
            let v = ks_verdict_on(&p).map_err(|e| format!("{label}: {e}"))?;
            let fail = |what: &str| format!("{label}: {what}");
            ensure(v.hypotheses_met && !v.contextual, || fail("verdict is contextual"))?;
            ensure(v.routes.direct_gelfand, || fail("no Gelfand section"))?;
            ensure(v.routes.prime_via_tau == Some(true), || fail("prime route found no section"))?;
            let prime = build_presheaf(&p, SpectrumKind::Prime).map_err(|e| fail(&e.to_string()))?;
            let sections = global_sections(&prime);
            let mut canon = Vec::with_capacity(n);
            for x in 0..n {
                let s = canonical_section(&prime, x).map_err(|e| fail(&e.to_string()))?;
                let back = section_element(&prime, &s).map_err(|e| fail(&e.to_string()))?;
                ensure(back == x, || fail(&format!("point {x} comes back as {back}")))?;
                ensure(sections.contains(&s), || fail("canonical section was not enumerated"))?;
                canon.push(s);
            }
            canon.sort();
            canon.dedup();
            ensure(canon.len() == n, || fail(&format!("{} canonical sections", canon.len())))?;
            for s in &sections {
                section_element(&prime, s).map_err(|e| fail(&format!("a section determines no element: {e}")))?;
            }
            ensure(v.canonical_section_count == Some(n) && v.canonical_round_trip == Some(true), || {
                fail("verdict disagrees with the direct checks")
            })?;
        }
        Ok(())
    })
}

#[test]
fn criterion_7_topology_functoriality() {
    criterion(7, "topology functoriality", Duration::from_secs(60), || {
        for (label, p) in decomposition_instances()? {
            for (i, a) in p.objects().iter().enumerate() {
                let t = zariski(a, SpectrumKind::Prime).map_err(|e| format!("{label} #{i}: {e}"))?;
                let s = separation_report(&t);
                ensure(s.t0 && s.compact, || format!("{label} #{i}: prime side T0={} compact={}", s.t0, s.compact))?;
            }
            for &(lo, hi) in p.hasse() {
                for kind in [SpectrumKind::Gelfand, SpectrumKind::Prime] {
                    let ok = check_continuity(&p.objects()[lo], &p.objects()[hi], kind)
                        .map_err(|e| format!("{label} #{hi}→#{lo}: {e}"))?;
                    ensure(ok, || format!("{label}: restriction #{hi}→#{lo} is not continuous ({kind:?})"))?;
                }
            }
        }
        Ok(())
    })
}

#[test]
fn criterion_8_determinism() {
    criterion(8, "determinism", Duration::from_secs(60), || {
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_qspec"))
                .args(["verdict", "--quantale", "godel3", "--size", "2", "--seed", "7", "--format", "json"])
                .env_remove("QSPEC_MAX_HOM_SIZE")
                .output()
                .map_err(|e| e.to_string())
        };
        let (a, b) = (run()?, run()?);
        ensure(a.status.success() && b.status.success(), || "verdict run failed".into())?;
        ensure(!a.stdout.is_empty(), || "empty report".into())?;
        ensure(a.stdout == b.stdout, || "reports differ".into())
    })
}
