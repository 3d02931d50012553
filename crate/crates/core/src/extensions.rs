//! Iterated lowering: extensions into geometric and rectangular lattices,
//! and the bounded exhaustive search for length-preserving extensions with a
//! prescribed poset of join-irreducibles.
//!
//! All inputs are finite, so the pipelines are plain loops with a size
//! guard; there is no transfinite step. Indices survive each lowering (new
//! elements are appended), so an element of the initial lattice keeps its
//! index all the way to the final one.

use std::ops::ControlFlow;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::enumeration::for_each_geometry;
use crate::error::{Error, Result};
use crate::geometry::{lat_of_geometry, Geometry};
use crate::lattice::FiniteLattice;
use crate::lowering::{compute_d, lower_direct_with, LoweringResult, Verify};
use crate::poset::{all_down_sets, ChainPartition, Poset};

pub const DEFAULT_SIZE_LIMIT: usize = 50_000;

/// Lowerings on lattices up to this size run the full postcondition suite;
/// larger ones run the linear checks only.
pub const FULL_VERIFY_LIMIT: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepStats {
    pub e: usize,
    pub h: usize,
    pub d_size: usize,
    pub size: usize,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct ExtensionTrace {
    pub initial: Arc<FiniteLattice>,
    pub steps: Vec<LoweringResult>,
    pub final_lattice: Arc<FiniteLattice>,
    /// Initial → final; the identity on `0..|initial|`.
    pub embed_total: Vec<usize>,
    pub stats: Vec<StepStats>,
    /// For chain-based runs, the chains of `Jir final` (lattice indices,
    /// ascending), slot for slot with the input partition.
    pub chains: Option<Vec<Vec<usize>>>,
}

impl ExtensionTrace {
    fn start(l: Arc<FiniteLattice>) -> ExtensionTrace {
        ExtensionTrace {
            embed_total: (0..l.len()).collect(),
            final_lattice: l.clone(),
            initial: l,
            steps: Vec::new(),
            stats: Vec::new(),
            chains: None,
        }
    }

    fn push(&mut self, step: LoweringResult, elapsed: Duration) {
        self.stats.push(StepStats {
            e: step.e,
            h: step.h,
            d_size: step.d.len(),
            size: step.k.len(),
            elapsed,
        });
        self.embed_total = self.embed_total.iter().map(|&x| step.embed[x]).collect();
        self.final_lattice = step.k.clone();
        self.steps.push(step);
    }

    /// Lowers `(e, h)` on the current final lattice, respecting `limit`.
    fn lower(&mut self, e: usize, h: usize, limit: usize) -> Result<usize> {
        let cur = self.final_lattice.clone();
        let size = cur.len() + compute_d(&cur, e, h)?.len();
        if size > limit {
            return Err(Error::SizeLimit {
                limit,
                size,
                partial: Box::new(self.clone()),
            });
        }
        let verify = if cur.len() <= FULL_VERIFY_LIMIT {
            Verify::Full
        } else {
            Verify::Light
        };
        let t = Instant::now();
        let step = lower_direct_with(cur, e, h, verify)?;
        let e_prime = step.e_prime;
        self.push(step, t.elapsed());
        Ok(e_prime)
    }

    /// Re-checks the trace invariants.
    pub fn verify(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Verification(msg));
        let mut cur = &self.initial;
        for (i, step) in self.steps.iter().enumerate() {
            if !Arc::ptr_eq(&step.base, cur) && !step.base.same_order(cur) {
                return fail(format!("step {i} does not start from the previous result"));
            }
            cur = &step.k;
        }
        if !Arc::ptr_eq(cur, &self.final_lattice) && !cur.same_order(&self.final_lattice) {
            return fail("last step does not produce the final lattice".into());
        }
        if self.initial.length() != self.final_lattice.length() {
            return fail("length changed".into());
        }
        if self.initial.join_irreducibles().len() != self.final_lattice.join_irreducibles().len() {
            return fail("number of join-irreducibles changed".into());
        }
        self.initial
            .check_length_preserving_embedding(&self.final_lattice, &self.embed_total)
            .or_else(|msg| fail(format!("composed embedding: {msg}")))
    }
}

/// `Σ_{p ∈ Jir} height(p)`; strictly decreases along the geometric pipeline.
pub fn jir_rank_sum(l: &FiniteLattice) -> usize {
    l.join_irreducibles().elements.iter().map(|&p| l.height(p)).sum()
}

/// The step the geometric pipeline would take next: the non-atom `e ∈ Jir`
/// of least height (then least index), lowered to the least-index lower
/// cover of `lcov(e)`.
pub fn next_geometric_step(l: &FiniteLattice) -> Option<(usize, usize)> {
    let jir = l.join_irreducibles();
    let (_, e) = jir
        .elements
        .iter()
        .zip(&jir.lcov)
        .filter(|(_, &c)| c != l.bottom())
        .map(|(&e, _)| (l.height(e), e))
        .min()?;
    let lcov = jir.lcov_of(e).expect("e is join-irreducible");
    let h = *l.order().lower_covers(lcov).iter().min().expect("lcov(e) is not the bottom");
    Some((e, h))
}

pub fn extend_to_geometric(l: &FiniteLattice, limit: usize) -> Result<ExtensionTrace> {
    extend_to_geometric_shared(Arc::new(l.clone()), limit)
}

pub fn extend_to_geometric_shared(l: Arc<FiniteLattice>, limit: usize) -> Result<ExtensionTrace> {
    if let Some((x, y)) = l.semimodularity_violation() {
        return Err(Error::Precondition(format!(
            "lattice is not semimodular at ({x}, {y})"
        )));
    }
    let mut trace = ExtensionTrace::start(l);
    while let Some((e, h)) = next_geometric_step(&trace.final_lattice) {
        trace.lower(e, h, limit)?;
    }
    Ok(trace)
}

/// Resolves a partition of `Jir L` given in lattice indices; chains come
/// back ascending.
fn jir_partition(l: &FiniteLattice, chains: &[Vec<usize>]) -> Result<Vec<Vec<usize>>> {
    let jir = l.join_irreducibles();
    let mut positions = Vec::with_capacity(chains.len());
    for chain in chains {
        let mut pos = Vec::with_capacity(chain.len());
        for &x in chain {
            if x >= l.len() {
                return Err(Error::Index {
                    index: x,
                    size: l.len(),
                });
            }
            pos.push(jir.position(x).ok_or_else(|| {
                Error::NotAPartition(format!("{x} is not join-irreducible"))
            })?);
        }
        positions.push(pos);
    }
    let part = ChainPartition { chains: positions }.validate(&jir.order)?;
    Ok(part
        .chains
        .into_iter()
        .map(|c| c.into_iter().map(|i| jir.elements[i]).collect())
        .collect())
}

/// The first non-parallel situation: for `(i, j)` in index order, the least
/// `e ∈ C_i` above some `b ∈ C_j`.
fn next_chain_step(l: &FiniteLattice, chains: &[Vec<usize>]) -> Option<(usize, usize)> {
    for (i, ci) in chains.iter().enumerate() {
        for (j, cj) in chains.iter().enumerate() {
            if i == j {
                continue;
            }
            if let Some(pos) = ci.iter().position(|&e| cj.iter().any(|&b| l.lt(b, e))) {
                return Some((i, pos));
            }
        }
    }
    None
}

pub fn extend_parallel_chains(l: &FiniteLattice, chains: &[Vec<usize>]) -> Result<ExtensionTrace> {
    extend_parallel_chains_with_limit(l, chains, DEFAULT_SIZE_LIMIT)
}

pub fn extend_parallel_chains_with_limit(
    l: &FiniteLattice,
    chains: &[Vec<usize>],
    limit: usize,
) -> Result<ExtensionTrace> {
    if let Some((x, y)) = l.semimodularity_violation() {
        return Err(Error::Precondition(format!(
            "lattice is not semimodular at ({x}, {y})"
        )));
    }
    let mut chains = jir_partition(l, chains)?;
    let mut trace = ExtensionTrace::start(Arc::new(l.clone()));
    trace.chains = Some(chains.clone());
    while let Some((i, pos)) = next_chain_step(&trace.final_lattice, &chains) {
        let e = chains[i][pos];
        let h = if pos == 0 {
            trace.final_lattice.bottom()
        } else {
            chains[i][pos - 1]
        };
        let e_prime = match trace.lower(e, h, limit) {
            Ok(e_prime) => e_prime,
            Err(Error::SizeLimit {
                limit,
                size,
                mut partial,
            }) => {
                partial.chains = Some(chains);
                return Err(Error::SizeLimit {
                    limit,
                    size,
                    partial,
                });
            }
            Err(err) => return Err(err),
        };
        chains[i][pos] = e_prime;
        trace.chains = Some(chains.clone());
    }
    check_parallel_output(&trace.final_lattice, &chains)?;
    Ok(trace)
}

/// Both notions of disjointness hold pairwise on the output chains.
fn check_parallel_output(k: &FiniteLattice, chains: &[Vec<usize>]) -> Result<()> {
    let jir = k.join_irreducibles();
    let as_positions = |c: &[usize]| jir.positions_subset(c).expect("chains stay in Jir");
    let mut covered = 0;
    for (i, ci) in chains.iter().enumerate() {
        covered += ci.len();
        for cj in &chains[i + 1..] {
            let parallel = jir.order.are_parallel(&as_positions(ci), &as_positions(cj))?;
            let disjoint = k.chains_lattice_disjoint(ci, cj)?;
            if !parallel || !disjoint {
                return Err(Error::Verification(format!(
                    "chains {ci:?} and {cj:?}: parallel = {parallel}, lattice-disjoint = {disjoint}"
                )));
            }
        }
    }
    if covered != jir.len() {
        return Err(Error::Verification(format!(
            "chains cover {covered} of {} join-irreducibles",
            jir.len()
        )));
    }
    Ok(())
}

/// Makes a cover of `Jir L` by chains disjoint by removing from each chain
/// the elements of the earlier ones; emptied chains are dropped.
pub fn peel_chains(cover: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut seen: Vec<usize> = Vec::new();
    let mut out = Vec::new();
    for chain in cover {
        let rest: Vec<usize> = chain.iter().copied().filter(|x| !seen.contains(x)).collect();
        seen.extend(&rest);
        if !rest.is_empty() {
            out.push(rest);
        }
    }
    out
}

/// `k` if `Jir L` splits into `k = width(Jir L)` pairwise lattice-disjoint
/// chains, i.e. `L` is `k`-dimensional rectangular.
pub fn rectangular_dimension(l: &FiniteLattice) -> Option<usize> {
    if !l.is_semimodular() {
        return None;
    }
    let jir = l.join_irreducibles();
    // pairwise parallel chains covering Jir are its comparability components
    let m = jir.len();
    let mut comp: Vec<usize> = (0..m).collect();
    fn root(comp: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while comp[r] != r {
            r = comp[r];
        }
        comp[x] = r;
        r
    }
    for x in 0..m {
        for y in 0..m {
            if jir.order.lt(x, y) {
                let (a, b) = (root(&mut comp, x), root(&mut comp, y));
                comp[a] = b;
            }
        }
    }
    let mut chains: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for x in 0..m {
        let r = root(&mut comp, x);
        match roots.iter().position(|&s| s == r) {
            Some(i) => chains[i].push(jir.elements[x]),
            None => {
                roots.push(r);
                chains.push(vec![jir.elements[x]]);
            }
        }
    }
    for c in &chains {
        if !jir.order.is_chain(&jir.positions_subset(c)?) {
            return None;
        }
    }
    for (i, ci) in chains.iter().enumerate() {
        for cj in &chains[i + 1..] {
            if !l.chains_lattice_disjoint(ci, cj).ok()? {
                return None;
            }
        }
    }
    (chains.len() == jir.order.width()).then_some(chains.len())
}

/// Extension into a `width(Jir L)`-dimensional rectangular lattice, using a
/// minimum chain partition of `Jir L`.
pub fn rectangular_extension(l: &FiniteLattice) -> Result<ExtensionTrace> {
    let jir = l.join_irreducibles();
    let chains: Vec<Vec<usize>> = jir
        .order
        .width_chain_partition()
        .chains
        .into_iter()
        .map(|c| c.into_iter().map(|i| jir.elements[i]).collect())
        .collect();
    rectangular_from_chains(l, &chains)
}

/// Like [`rectangular_extension`] but from a user-supplied cover of `Jir L`
/// by chains, which may overlap.
pub fn rectangular_extension_with_cover(
    l: &FiniteLattice,
    cover: &[Vec<usize>],
) -> Result<ExtensionTrace> {
    rectangular_from_chains(l, &peel_chains(cover))
}

fn rectangular_from_chains(l: &FiniteLattice, chains: &[Vec<usize>]) -> Result<ExtensionTrace> {
    let trace = extend_parallel_chains(l, chains)?;
    let k = rectangular_dimension(&trace.final_lattice);
    if k != Some(chains.len()) {
        return Err(Error::Verification(format!(
            "final lattice has rectangular dimension {k:?}, expected {}",
            chains.len()
        )));
    }
    Ok(trace)
}

/// `length(L) = |Jir L|` for distributive `L`, checked directly and along the
/// geometric pipeline (every intermediate distributive, final Boolean).
pub fn distributive_length_check(l: &FiniteLattice) -> Result<bool> {
    if !l.is_distributive() {
        return Err(Error::NotDistributive);
    }
    let jir = l.join_irreducibles().len();
    let direct = l.length() == jir;
    let trace = extend_to_geometric(l, DEFAULT_SIZE_LIMIT)?;
    let stays = trace.steps.iter().all(|s| s.k.is_distributive());
    let fin = &trace.final_lattice;
    let atoms = fin.atoms().len();
    let boolean = atoms < usize::BITS as usize && fin.len() == 1 << atoms;
    Ok(direct && stays && boolean && fin.length() == atoms && atoms == jir)
}

#[derive(Clone, Debug)]
pub struct ExtensionWitness {
    pub geometry: Geometry,
    pub lattice: FiniteLattice,
    /// `L → lattice`, a length-preserving `{0,1}`-embedding.
    pub embedding: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct ExtensionSearch {
    pub geometries_examined: usize,
    pub witness: Option<ExtensionWitness>,
}

/// Every height-preserving, cover-preserving `{0,1}`-embedding candidate
/// `L → K`, tried in index order; returns the first that checks out.
fn find_embedding(l: &FiniteLattice, k: &FiniteLattice) -> Option<Vec<usize>> {
    let order = l.order().linear_extension();
    let mut f = vec![usize::MAX; l.len()];
    let mut used = vec![false; k.len()];

    fn go(
        l: &FiniteLattice,
        k: &FiniteLattice,
        order: &[usize],
        idx: usize,
        f: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        let Some(&x) = order.get(idx) else {
            return l.verify_length_preserving_embedding(k, f);
        };
        let lower = l.order().lower_covers(x);
        let candidates: Vec<usize> = if lower.is_empty() {
            vec![k.bottom()]
        } else if lower.len() >= 2 {
            vec![k.join(f[lower[0]], f[lower[1]])]
        } else {
            k.order().upper_covers(f[lower[0]]).to_vec()
        };
        for y in candidates {
            if used[y] || k.height(y) != l.height(x) {
                continue;
            }
            if !lower.iter().all(|&c| k.covers(f[c], y)) {
                continue;
            }
            f[x] = y;
            used[y] = true;
            let consistent = order[..idx].iter().all(|&z| {
                let m = l.meet(x, z);
                f[m] == usize::MAX || f[m] == k.meet(y, f[z])
            });
            if consistent && go(l, k, order, idx + 1, f, used) {
                return true;
            }
            used[y] = false;
            f[x] = usize::MAX;
        }
        false
    }

    go(l, k, &order, 0, &mut f, &mut used).then_some(f)
}

/// Decides whether `L` has a length-preserving semimodular extension whose
/// poset of join-irreducibles is `target`, by running through every
/// geometry on `target`. The first witness in enumeration order is returned.
///
/// Fails with [`Error::BoundExceeded`] when `target` has more down-sets than
/// `size_bound`, since a candidate could then exceed the bound.
pub fn exhaustive_extension_search(
    l: &FiniteLattice,
    target: &Poset,
    size_bound: usize,
) -> Result<ExtensionSearch> {
    if let Some((x, y)) = l.semimodularity_violation() {
        return Err(Error::Precondition(format!(
            "lattice is not semimodular at ({x}, {y})"
        )));
    }
    if target.len() > 20 {
        return Err(Error::BoundExceeded {
            needed: 1 << 20,
            bound: size_bound,
        });
    }
    let needed = all_down_sets(target).len();
    if needed > size_bound {
        return Err(Error::BoundExceeded {
            needed,
            bound: size_bound,
        });
    }
    let length = l.length();
    let mut examined = 0;
    let mut witness = None;
    let _ = for_each_geometry(target, Some(length), |g| {
        examined += 1;
        let k = lat_of_geometry(&g).expect("enumerated families are geometries");
        if k.length() != length || k.len() < l.len() {
            return ControlFlow::Continue(());
        }
        match find_embedding(l, &k) {
            Some(embedding) => {
                witness = Some(ExtensionWitness {
                    geometry: g,
                    lattice: k,
                    embedding,
                });
                ControlFlow::Break(())
            }
            None => ControlFlow::Continue(()),
        }
    });
    Ok(ExtensionSearch {
        geometries_examined: examined,
        witness,
    })
}

/// Convenience for fixtures: the chain partition `{{x}}` of every element
/// of `Jir L`.
pub fn singleton_partition(l: &FiniteLattice) -> Vec<Vec<usize>> {
    l.join_irreducibles().elements.iter().map(|&x| vec![x]).collect()
}
