//! Binary constraint satisfaction over small finite domains: an AC-3
//! prefilter, then backtracking that maintains arc consistency, enumerating
//! every solution in lexicographic order.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;

/// `allowed[v]` is the set of values of `right` compatible with `left = v`.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub left: usize,
    pub right: usize,
    pub allowed: Vec<FixedBitSet>,
}

impl Constraint {
    /// The constraint `right = f(left)`.
    pub fn functional(left: usize, right: usize, map: &[usize], right_size: usize) -> Self {
        let allowed = map
            .iter()
            .map(|&w| {
                let mut b = FixedBitSet::with_capacity(right_size);
                if w < right_size {
                    b.insert(w);
                }
                b
            })
            .collect();
        Constraint { left, right, allowed }
    }

    fn permits(&self, l: usize, r: usize) -> bool {
        self.allowed[l].contains(r)
    }
}

#[derive(Clone, Debug)]
pub struct Csp {
    sizes: Vec<usize>,
    constraints: Vec<Constraint>,
    /// Constraint indices touching each variable.
    incident: Vec<Vec<usize>>,
}

impl Csp {
    pub fn new(sizes: Vec<usize>, constraints: Vec<Constraint>) -> Self {
        let mut incident = vec![Vec::new(); sizes.len()];
        for (k, c) in constraints.iter().enumerate() {
            assert_eq!(c.allowed.len(), sizes[c.left], "constraint table does not match its domain");
            incident[c.left].push(k);
            incident[c.right].push(k);
        }
        Csp { sizes, constraints, incident }
    }

    fn full_domains(&self) -> Vec<FixedBitSet> {
        self.sizes
            .iter()
            .map(|&n| {
                let mut b = FixedBitSet::with_capacity(n);
                b.insert_range(..);
                b
            })
            .collect()
    }

    /// Removes unsupported values of `var` with respect to constraint `k`.
    fn revise(&self, domains: &mut [FixedBitSet], k: usize, var: usize) -> bool {
        let c = &self.constraints[k];
        let removed: Vec<usize> = if var == c.left {
            domains[var].ones().filter(|&l| !domains[c.right].ones().any(|r| c.permits(l, r))).collect()
        } else {
            domains[var].ones().filter(|&r| !domains[c.left].ones().any(|l| c.permits(l, r))).collect()
        };
        for v in &removed {
            domains[var].set(*v, false);
        }
        !removed.is_empty()
    }

    /// AC-3 from the given arcs; false if some domain empties.
    fn propagate(&self, domains: &mut [FixedBitSet], mut queue: VecDeque<(usize, usize)>) -> bool {
        while let Some((k, var)) = queue.pop_front() {
            if self.revise(domains, k, var) {
                if domains[var].is_clear() {
                    return false;
                }
                for &k2 in &self.incident[var] {
                    let c = &self.constraints[k2];
                    let other = if c.left == var { c.right } else { c.left };
                    if k2 != k {
                        queue.push_back((k2, other));
                    }
                }
            }
        }
        true
    }

    fn all_arcs(&self) -> VecDeque<(usize, usize)> {
        self.constraints.iter().enumerate().flat_map(|(k, c)| [(k, c.left), (k, c.right)]).collect()
    }

    /// Domains after the AC-3 prefilter, or `None` if inconsistent.
    pub fn arc_consistent_domains(&self) -> Option<Vec<FixedBitSet>> {
        let mut domains = self.full_domains();
        self.propagate(&mut domains, self.all_arcs()).then_some(domains)
    }

    /// Every solution, lexicographically ordered.
    pub fn solve_all(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        if self.sizes.contains(&0) {
            return out;
        }
        if let Some(domains) = self.arc_consistent_domains() {
            self.search(0, domains, &mut out);
        }
        out
    }

    fn search(&self, var: usize, domains: Vec<FixedBitSet>, out: &mut Vec<Vec<usize>>) {
        if var == self.sizes.len() {
            out.push(domains.iter().map(|d| d.ones().next().expect("singleton")).collect());
            return;
        }
        for v in domains[var].ones() {
            let mut next = domains.clone();
            next[var].clear();
            next[var].insert(v);
            let arcs = self.incident[var]
                .iter()
                .map(|&k| {
                    let c = &self.constraints[k];
                    (k, if c.left == var { c.right } else { c.left })
                })
                .collect();
            if self.propagate(&mut next, arcs) {
                self.search(var + 1, next, out);
            }
        }
    }

    pub fn is_solution(&self, assignment: &[usize]) -> bool {
        assignment.len() == self.sizes.len()
            && assignment.iter().zip(&self.sizes).all(|(v, n)| v < n)
            && self.constraints.iter().all(|c| c.permits(assignment[c.left], assignment[c.right]))
    }
}
