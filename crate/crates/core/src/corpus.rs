//! Test corpora and deliberately naive oracles.
//!
//! The oracles read nothing from a lattice but its order relation and
//! recompute meets, joins, covers and chain lengths by brute force, so they
//! share no code path with [`crate::lattice`].

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::enumeration::{enumerate_geometries, posets_up_to_isomorphism};
use crate::error::{Error, Result};
use crate::families;
use crate::geometry::lat_of_geometry;
use crate::lattice::FiniteLattice;
use crate::lowering::{lower_direct, Predicate};

pub const DEFAULT_ORACLE_CAP: usize = 512;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusSpec {
    pub seed: u64,
    /// `C_1 ..= C_max_chain`.
    pub max_chain: usize,
    /// `B_1 ..= B_max_boolean`.
    pub max_boolean: usize,
    /// `M_k` for each listed `k`.
    pub m_k: Vec<usize>,
    /// Grids `m × n` with `2 <= m <= n <= max_grid`.
    pub max_grid: usize,
    pub n5: bool,
    /// `M3` over chains with `1 ..= m3_over_chain` extra elements below.
    pub m3_over_chain: usize,
    /// The lattices of all geometries on posets with up to this many
    /// elements, one per isomorphism type.
    pub geometries_up_to: usize,
    /// Extra members obtained by this many random lowering runs.
    pub random_lowerings: usize,
    pub lowering_depth: usize,
    /// Members above this size are dropped.
    pub max_size: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            seed: 7,
            max_chain: 5,
            max_boolean: 4,
            m_k: vec![3, 4],
            max_grid: 4,
            n5: true,
            m3_over_chain: 0,
            geometries_up_to: 0,
            random_lowerings: 6,
            lowering_depth: 2,
            max_size: 64,
        }
    }
}

impl CorpusSpec {
    /// The default families plus `M3` over short chains and the lattices of
    /// all geometries on at most four points. The default families contain
    /// no lattice whose modularity or join-distributivity a lowering breaks.
    pub fn extended() -> Self {
        CorpusSpec {
            m3_over_chain: 2,
            geometries_up_to: 4,
            ..CorpusSpec::default()
        }
    }

    /// Every family switched off.
    pub fn empty() -> Self {
        CorpusSpec {
            seed: 0,
            max_chain: 0,
            max_boolean: 0,
            m_k: Vec::new(),
            max_grid: 0,
            n5: false,
            m3_over_chain: 0,
            geometries_up_to: 0,
            random_lowerings: 0,
            lowering_depth: 0,
            max_size: usize::MAX,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Profile {
    pub semimodular: bool,
    pub distributive: bool,
    pub modular: bool,
    pub join_distributive: bool,
    pub geometric: bool,
}

impl Profile {
    pub fn of(l: &FiniteLattice) -> Profile {
        Profile {
            semimodular: l.is_semimodular(),
            distributive: l.is_distributive(),
            modular: l.is_modular(),
            join_distributive: l.is_join_distributive(),
            geometric: l.is_geometric(),
        }
    }

    pub fn get(&self, p: Predicate) -> bool {
        match p {
            Predicate::Distributive => self.distributive,
            Predicate::Modular => self.modular,
            Predicate::JoinDistributive => self.join_distributive,
            Predicate::Semimodular => self.semimodular,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub lattice: FiniteLattice,
    pub profile: Profile,
}

/// Every `(e, h)` with `e` a non-atom join-irreducible and `h < lcov(e)`.
pub fn valid_pairs(l: &FiniteLattice) -> Vec<(usize, usize)> {
    let jir = l.join_irreducibles();
    let mut out = Vec::new();
    for (&e, &c) in jir.elements.iter().zip(&jir.lcov) {
        for h in l.order().down_row(c).ones() {
            if h != c {
                out.push((e, h));
            }
        }
    }
    out
}

/// Applies `depth` lowerings chosen uniformly among the valid pairs; stops
/// early if none is left.
pub fn random_lowering(l: &FiniteLattice, depth: usize, seed: u64) -> Result<FiniteLattice> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = l.clone();
    for _ in 0..depth {
        let pairs = valid_pairs(&cur);
        let Some(&(e, h)) = pairs.choose(&mut rng) else {
            break;
        };
        cur = (*lower_direct(&cur, e, h)?.k).clone();
    }
    Ok(cur)
}

pub fn generate_corpus(spec: &CorpusSpec) -> Vec<CorpusEntry> {
    let mut base: Vec<(String, FiniteLattice)> = Vec::new();
    for n in 1..=spec.max_chain {
        base.push((format!("C{n}"), families::chain(n)));
    }
    for n in 1..=spec.max_boolean {
        base.push((format!("B{n}"), families::boolean(n)));
    }
    for &k in &spec.m_k {
        base.push((format!("M{k}"), families::m_k(k)));
    }
    for m in 2..=spec.max_grid {
        for n in m..=spec.max_grid {
            base.push((format!("grid{m}x{n}"), families::grid(m, n)));
        }
    }
    if spec.n5 {
        base.push(("N5".into(), families::n5()));
    }
    for below in 1..=spec.m3_over_chain {
        base.push((format!("M3/C{below}"), families::m3_over_chain(below)));
    }
    let mut geometric: Vec<FiniteLattice> = Vec::new();
    for n in 1..=spec.geometries_up_to {
        for p in posets_up_to_isomorphism(n) {
            for g in enumerate_geometries(&p) {
                let l = lat_of_geometry(&g).expect("enumerated families are geometries");
                if !geometric.iter().any(|m| m.is_isomorphic(&l)) {
                    base.push((format!("geom{n}.{}", geometric.len()), l.clone()));
                    geometric.push(l);
                }
            }
        }
    }
    base.retain(|(_, l)| l.len() <= spec.max_size);

    let seeds: Vec<usize> = (0..base.len())
        .filter(|&i| !valid_pairs(&base[i].1).is_empty() && base[i].1.is_semimodular())
        .collect();
    let mut derived = Vec::new();
    if !seeds.is_empty() {
        for r in 0..spec.random_lowerings {
            let (name, l) = &base[seeds[r % seeds.len()]];
            let seed = spec.seed.wrapping_add(r as u64);
            let k = random_lowering(l, spec.lowering_depth, seed)
                .expect("random lowering of a semimodular lattice succeeds");
            if k.len() <= spec.max_size {
                derived.push((format!("lower({name},d{},s{seed})", spec.lowering_depth), k));
            }
        }
    }
    base.into_iter()
        .chain(derived)
        .map(|(name, lattice)| CorpusEntry {
            name,
            profile: Profile::of(&lattice),
            lattice,
        })
        .collect()
}

fn check_cap(l: &FiniteLattice, cap: usize) -> Result<()> {
    if l.len() > cap {
        return Err(Error::CapExceeded { size: l.len(), cap });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleTables {
    pub meet: Vec<Vec<usize>>,
    pub join: Vec<Vec<usize>>,
}

/// Meets and joins by scanning all bounds.
pub fn oracle_meet_join(l: &FiniteLattice, cap: usize) -> Result<OracleTables> {
    check_cap(l, cap)?;
    let p = l.order();
    let n = l.len();
    let best = |bounds: Vec<usize>, above: bool| -> usize {
        let found: Vec<usize> = bounds
            .iter()
            .copied()
            .filter(|&z| {
                bounds
                    .iter()
                    .all(|&w| if above { p.leq(w, z) } else { p.leq(z, w) })
            })
            .collect();
        assert_eq!(found.len(), 1, "bound is not unique");
        found[0]
    };
    let mut meet = vec![vec![0; n]; n];
    let mut join = vec![vec![0; n]; n];
    for x in 0..n {
        for y in 0..n {
            let lower: Vec<usize> = (0..n).filter(|&z| p.leq(z, x) && p.leq(z, y)).collect();
            let upper: Vec<usize> = (0..n).filter(|&z| p.leq(x, z) && p.leq(y, z)).collect();
            meet[x][y] = best(lower, true);
            join[x][y] = best(upper, false);
        }
    }
    Ok(OracleTables { meet, join })
}

/// Cover pairs by the double loop with an explicit betweenness scan.
pub fn oracle_covers(l: &FiniteLattice, cap: usize) -> Result<Vec<(usize, usize)>> {
    check_cap(l, cap)?;
    let p = l.order();
    let n = l.len();
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if x != y
                && p.leq(x, y)
                && !(0..n).any(|z| z != x && z != y && p.leq(x, z) && p.leq(z, y))
            {
                out.push((x, y));
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Lengths of the maximal chains of `[a, b]`, by walking covers.
pub fn oracle_maximal_chains(
    l: &FiniteLattice,
    a: usize,
    b: usize,
    cap: usize,
) -> Result<BTreeSet<usize>> {
    let covers = oracle_covers(l, cap)?;
    let mut up = vec![Vec::new(); l.len()];
    for (x, y) in covers {
        up[x].push(y);
    }
    let p = l.order();
    let mut out = BTreeSet::new();
    let mut stack = vec![(a, 0)];
    while let Some((x, depth)) = stack.pop() {
        if x == b {
            out.insert(depth);
            continue;
        }
        for &y in &up[x] {
            if p.leq(y, b) {
                stack.push((y, depth + 1));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    pub name: String,
    pub lattice: FiniteLattice,
    pub e: usize,
    pub h: usize,
    pub k: FiniteLattice,
    /// `[o, a, b, c, i]`: an `N5` in `K` for modularity and distributivity,
    /// an `M3` for join-distributivity.
    pub sublattice: Option<[usize; 5]>,
}

/// The first corpus lattice (then the first valid pair) where `predicate`
/// holds before lowering and fails after.
pub fn search_counterexample(corpus: &[CorpusEntry], predicate: Predicate) -> Option<Counterexample> {
    for entry in corpus {
        if !entry.profile.semimodular || !entry.profile.get(predicate) {
            continue;
        }
        for (e, h) in valid_pairs(&entry.lattice) {
            let res = lower_direct(&entry.lattice, e, h).expect("valid pair on a semimodular lattice");
            if predicate.eval(&res.k) {
                continue;
            }
            let sublattice = match predicate {
                Predicate::JoinDistributive => res.k.find_m3_sublattice(),
                _ => res.k.find_n5_sublattice().or_else(|| res.k.find_m3_sublattice()),
            };
            return Some(Counterexample {
                name: entry.name.clone(),
                lattice: entry.lattice.clone(),
                e,
                h,
                k: (*res.k).clone(),
                sublattice,
            });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::*;

    #[test]
    fn default_corpus_members() {
        let corpus = generate_corpus(&CorpusSpec::default());
        let names: Vec<&str> = corpus.iter().map(|c| c.name.as_str()).collect();
        for want in ["C1", "C5", "B1", "B4", "M3", "M4", "grid2x2", "grid4x4", "N5"] {
            assert!(names.contains(&want), "{want} missing");
        }
        let n5 = corpus.iter().find(|c| c.name == "N5").unwrap();
        assert!(!n5.profile.semimodular);
    }

    #[test]
    fn empty_spec_gives_empty_corpus() {
        assert!(generate_corpus(&CorpusSpec::empty()).is_empty());
    }

    #[test]
    fn extended_corpus_has_witnesses() {
        let corpus = generate_corpus(&CorpusSpec::extended());
        let m = search_counterexample(&corpus, Predicate::Modular).unwrap();
        let [o, a, b, c, i] = m.sublattice.unwrap();
        assert!(m.k.lt(o, a) && m.k.lt(a, b) && m.k.lt(b, i));
        assert_eq!(m.k.join(a, c), i);
        assert_eq!(m.k.meet(b, c), o);
        let j = search_counterexample(&corpus, Predicate::JoinDistributive).unwrap();
        assert!(j.sublattice.is_some());
        assert!(search_counterexample(&corpus, Predicate::Distributive).is_none());
    }

    #[test]
    fn random_lowering_is_reproducible() {
        let a = random_lowering(&chain(4), 2, 7).unwrap();
        let b = random_lowering(&chain(4), 2, 7).unwrap();
        assert!(a.same_order(&b));
        assert_eq!(a.length(), 4);
    }

    #[test]
    fn oracles_on_small_lattices() {
        let b3 = boolean(3);
        let t = oracle_meet_join(&b3, DEFAULT_ORACLE_CAP).unwrap();
        for x in 0..8 {
            for y in 0..8 {
                assert_eq!(t.meet[x][y], x & y);
                assert_eq!(t.join[x][y], x | y);
            }
        }
        let lens = oracle_maximal_chains(&n5(), 0, 4, DEFAULT_ORACLE_CAP).unwrap();
        assert_eq!(lens, BTreeSet::from([2, 3]));
        assert_eq!(
            oracle_covers(&chain(3), DEFAULT_ORACLE_CAP).unwrap(),
            vec![(0, 1), (1, 2), (2, 3)]
        );
        assert!(matches!(
            oracle_covers(&boolean(3), 4),
            Err(Error::CapExceeded { size: 8, cap: 4 })
        ));
    }
}
