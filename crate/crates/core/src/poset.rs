//! Finite posets on dense indices `0..n`.
//!
//! The order is stored twice, as a row of down-sets and a row of up-sets, so
//! that every query on subsets is a bitset operation. Covers are derived from
//! the order and kept sorted.

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// A subset of a ground set `0..n`.
pub type Subset = FixedBitSet;

/// Builds a subset of `0..n` from the given members.
pub fn subset_of(n: usize, members: impl IntoIterator<Item = usize>) -> Subset {
    let mut s = Subset::with_capacity(n);
    for m in members {
        s.insert(m);
    }
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poset {
    n: usize,
    down: Vec<Subset>,
    up: Vec<Subset>,
    covers: Vec<(usize, usize)>,
    lower_covers: Vec<Vec<usize>>,
    upper_covers: Vec<Vec<usize>>,
}

impl Poset {
    /// Reflexive-transitive closure of a list of `(lower, upper)` pairs.
    /// Self-pairs are accepted and ignored.
    pub fn from_covers(n: usize, pairs: &[(usize, usize)]) -> Result<Poset> {
        let mut succ = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        for &(x, y) in pairs {
            for i in [x, y] {
                if i >= n {
                    return Err(Error::Index { index: i, size: n });
                }
            }
            if x != y {
                succ[x].push(y);
                indeg[y] += 1;
            }
        }
        // Kahn's algorithm; anything left over sits on a cycle.
        let mut order = Vec::with_capacity(n);
        let mut stack: Vec<usize> = (0..n).rev().filter(|&x| indeg[x] == 0).collect();
        while let Some(x) = stack.pop() {
            order.push(x);
            for &y in &succ[x] {
                indeg[y] -= 1;
                if indeg[y] == 0 {
                    stack.push(y);
                }
            }
        }
        if order.len() < n {
            let &(x, y) = pairs
                .iter()
                .find(|&&(x, y)| x != y && indeg[x] > 0 && indeg[y] > 0)
                .expect("a leftover vertex has a leftover predecessor");
            return Err(Error::Cycle(x, y));
        }
        let mut down: Vec<Subset> = (0..n).map(|x| subset_of(n, [x])).collect();
        for &x in &order {
            for &y in &succ[x] {
                let row = down[x].clone();
                down[y].union_with(&row);
            }
        }
        Ok(Self::from_down_rows(down))
    }

    /// Builds a poset from a relation given as a predicate `leq(x, y)`,
    /// checking that it is a partial order.
    pub fn from_relation(n: usize, leq: impl Fn(usize, usize) -> bool) -> Result<Poset> {
        let mut down: Vec<Subset> = vec![Subset::with_capacity(n); n];
        for (y, row) in down.iter_mut().enumerate() {
            for x in 0..n {
                if leq(x, y) {
                    row.insert(x);
                }
            }
        }
        for (y, row) in down.iter().enumerate() {
            if !row.contains(y) {
                return Err(Error::Precondition(format!("relation is not reflexive at {y}")));
            }
            for x in row.ones() {
                if x != y && down[x].contains(y) {
                    return Err(Error::Cycle(x, y));
                }
                if !down[x].is_subset(row) {
                    let z = down[x].difference(row).next().unwrap();
                    return Err(Error::Precondition(format!(
                        "relation is not transitive: {z} <= {x} <= {y} but not {z} <= {y}"
                    )));
                }
            }
        }
        Ok(Self::from_down_rows(down))
    }

    /// `down[y]` must already be `{x : x <= y}` for a partial order.
    pub(crate) fn from_down_rows(down: Vec<Subset>) -> Poset {
        let n = down.len();
        let mut up: Vec<Subset> = vec![Subset::with_capacity(n); n];
        for (y, row) in down.iter().enumerate() {
            for x in row.ones() {
                up[x].insert(y);
            }
        }
        let mut lower_covers = vec![Vec::new(); n];
        let mut upper_covers = vec![Vec::new(); n];
        let mut covers = Vec::new();
        for y in 0..n {
            let mut strict = down[y].clone();
            strict.set(y, false);
            for x in strict.ones() {
                if up[x].intersection_count(&strict) == 1 {
                    lower_covers[y].push(x);
                    upper_covers[x].push(y);
                    covers.push((x, y));
                }
            }
        }
        covers.sort_unstable();
        Poset {
            n,
            down,
            up,
            covers,
            lower_covers,
            upper_covers,
        }
    }

    pub fn chain(n: usize) -> Poset {
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_covers(n, &pairs).expect("chain is acyclic")
    }

    pub fn antichain(n: usize) -> Poset {
        Self::from_covers(n, &[]).expect("antichain is acyclic")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn check(&self, u: usize) -> Result<()> {
        if u < self.n {
            Ok(())
        } else {
            Err(Error::Index {
                index: u,
                size: self.n,
            })
        }
    }

    #[inline]
    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.down[y].contains(x)
    }

    #[inline]
    pub fn lt(&self, x: usize, y: usize) -> bool {
        x != y && self.leq(x, y)
    }

    #[inline]
    pub fn comparable(&self, x: usize, y: usize) -> bool {
        self.leq(x, y) || self.leq(y, x)
    }

    /// `{x : x <= u}`.
    pub fn down_set(&self, u: usize) -> Result<Subset> {
        self.check(u)?;
        Ok(self.down[u].clone())
    }

    /// `{x : x < u}`.
    pub fn strict_down_set(&self, u: usize) -> Result<Subset> {
        let mut s = self.down_set(u)?;
        s.set(u, false);
        Ok(s)
    }

    pub fn up_set(&self, u: usize) -> Result<Subset> {
        self.check(u)?;
        Ok(self.up[u].clone())
    }

    pub(crate) fn down_row(&self, u: usize) -> &Subset {
        &self.down[u]
    }

    pub(crate) fn up_row(&self, u: usize) -> &Subset {
        &self.up[u]
    }

    pub fn is_down_set(&self, x: &Subset) -> bool {
        x.ones().all(|u| u < self.n && self.down[u].is_subset(x))
    }

    /// Canonical cover list, sorted.
    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn lower_covers(&self, x: usize) -> &[usize] {
        &self.lower_covers[x]
    }

    pub fn upper_covers(&self, x: usize) -> &[usize] {
        &self.upper_covers[x]
    }

    /// `x ≺ y`.
    pub fn is_cover(&self, x: usize, y: usize) -> bool {
        self.upper_covers[x].binary_search(&y).is_ok()
    }

    /// A linear extension: sorting by down-set size respects `<`.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by_key(|&x| (self.down[x].count_ones(..), x));
        order
    }

    /// Longest chain from a minimal element up to each element.
    pub fn heights(&self) -> Vec<usize> {
        let mut height = vec![0usize; self.n];
        for x in self.linear_extension() {
            height[x] = self.lower_covers[x]
                .iter()
                .map(|&c| height[c] + 1)
                .max()
                .unwrap_or(0);
        }
        height
    }

    /// Length of the longest chain (`|C| = 1 + length C`); zero when empty.
    pub fn length(&self) -> usize {
        self.heights().into_iter().max().unwrap_or(0)
    }

    pub fn minimal_elements(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&x| self.lower_covers[x].is_empty())
            .collect()
    }

    /// Ok if `x` is totally ordered, otherwise an incomparable pair.
    pub fn check_chain(&self, x: &Subset) -> Result<()> {
        let members: Vec<usize> = x.ones().collect();
        for (i, &a) in members.iter().enumerate() {
            self.check(a)?;
            for &b in &members[i + 1..] {
                if !self.comparable(a, b) {
                    return Err(Error::NotAChain(a, b));
                }
            }
        }
        Ok(())
    }

    pub fn is_chain(&self, x: &Subset) -> bool {
        self.check_chain(x).is_ok()
    }

    pub fn is_antichain(&self, x: &Subset) -> bool {
        let members: Vec<usize> = x.ones().collect();
        members
            .iter()
            .enumerate()
            .all(|(i, &a)| members[i + 1..].iter().all(|&b| !self.comparable(a, b)))
    }

    /// True iff every element of `c1` is incomparable to every element of `c2`.
    pub fn are_parallel(&self, c1: &Subset, c2: &Subset) -> Result<bool> {
        self.check_chain(c1)?;
        self.check_chain(c2)?;
        Ok(c1
            .ones()
            .all(|a| c2.ones().all(|b| !self.comparable(a, b))))
    }

    /// The subposet induced on `elements` (positions follow the slice order).
    pub fn induced(&self, elements: &[usize]) -> Poset {
        let m = elements.len();
        let down = (0..m)
            .map(|j| subset_of(m, (0..m).filter(|&i| self.leq(elements[i], elements[j]))))
            .collect();
        Poset::from_down_rows(down)
    }

    /// Maximum matching in the strict-order bipartite graph, tried in index
    /// order so the result is the same on every run.
    fn strict_order_matching(&self) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
        let n = self.n;
        let mut match_left: Vec<Option<usize>> = vec![None; n];
        let mut match_right: Vec<Option<usize>> = vec![None; n];

        fn augment(
            p: &Poset,
            x: usize,
            seen: &mut [bool],
            match_left: &mut [Option<usize>],
            match_right: &mut [Option<usize>],
        ) -> bool {
            for y in p.up[x].ones() {
                if y == x || seen[y] {
                    continue;
                }
                seen[y] = true;
                let free = match match_right[y] {
                    None => true,
                    Some(x2) => augment(p, x2, seen, match_left, match_right),
                };
                if free {
                    match_left[x] = Some(y);
                    match_right[y] = Some(x);
                    return true;
                }
            }
            false
        }

        for x in 0..n {
            let mut seen = vec![false; n];
            augment(self, x, &mut seen, &mut match_left, &mut match_right);
        }
        (match_left, match_right)
    }

    /// Minimum chain partition (Dilworth) via maximum bipartite matching.
    pub fn width_chain_partition(&self) -> ChainPartition {
        let (match_left, match_right) = self.strict_order_matching();
        let mut chains = Vec::new();
        for (start, m) in match_right.iter().enumerate() {
            if m.is_some() {
                continue;
            }
            let mut chain = vec![start];
            let mut cur = start;
            while let Some(next) = match_left[cur] {
                chain.push(next);
                cur = next;
            }
            chains.push(chain);
        }
        let antichain = self.antichain_from_matching(&match_left, &match_right);
        assert_eq!(
            antichain.count_ones(..),
            chains.len(),
            "König antichain must match the chain count"
        );
        assert!(self.is_antichain(&antichain));
        ChainPartition { chains }
    }

    /// A maximum antichain (König's construction from the same matching).
    pub fn max_antichain(&self) -> Subset {
        let (match_left, match_right) = self.strict_order_matching();
        self.antichain_from_matching(&match_left, &match_right)
    }

    fn antichain_from_matching(
        &self,
        match_left: &[Option<usize>],
        match_right: &[Option<usize>],
    ) -> Subset {
        let n = self.n;
        let mut reach_left = vec![false; n];
        let mut reach_right = vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&x| match_left[x].is_none()).collect();
        for &x in &stack {
            reach_left[x] = true;
        }
        while let Some(x) = stack.pop() {
            for y in self.up[x].ones() {
                if y == x || reach_right[y] || match_left[x] == Some(y) {
                    continue;
                }
                reach_right[y] = true;
                if let Some(x2) = match_right[y] {
                    if !reach_left[x2] {
                        reach_left[x2] = true;
                        stack.push(x2);
                    }
                }
            }
        }
        subset_of(n, (0..n).filter(|&x| reach_left[x] && !reach_right[x]))
    }

    pub fn width(&self) -> usize {
        self.width_chain_partition().chains.len()
    }
}

/// Pairwise disjoint chains covering the ground set; each chain is listed in
/// increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainPartition {
    pub chains: Vec<Vec<usize>>,
}

impl ChainPartition {
    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    /// Checks the partition against `p` and sorts each chain upward.
    pub fn validate(mut self, p: &Poset) -> Result<ChainPartition> {
        let mut seen = Subset::with_capacity(p.len());
        for chain in &mut self.chains {
            if chain.is_empty() {
                return Err(Error::NotAPartition("empty chain".into()));
            }
            for &x in chain.iter() {
                if x >= p.len() {
                    return Err(Error::Index {
                        index: x,
                        size: p.len(),
                    });
                }
                if seen.put(x) {
                    return Err(Error::NotAPartition(format!("{x} occurs twice")));
                }
            }
            p.check_chain(&subset_of(p.len(), chain.iter().copied()))
                .map_err(|e| Error::NotAPartition(e.to_string()))?;
            chain.sort_by_key(|&x| p.down[x].count_ones(..));
        }
        if let Some(missing) = (0..p.len()).find(|&x| !seen.contains(x)) {
            return Err(Error::NotAPartition(format!("{missing} is not covered")));
        }
        Ok(self)
    }
}

/// Searches for an order isomorphism `a -> b`.
pub fn find_poset_isomorphism(a: &Poset, b: &Poset) -> Option<Vec<usize>> {
    if a.len() != b.len() || a.covers().len() != b.covers().len() {
        return None;
    }
    let profile = |p: &Poset, x: usize| {
        (
            p.down[x].count_ones(..),
            p.up[x].count_ones(..),
            p.lower_covers[x].len(),
            p.upper_covers[x].len(),
        )
    };
    let order = a.linear_extension();
    let mut map = vec![usize::MAX; a.len()];
    let mut used = vec![false; b.len()];

    type Profile = dyn Fn(&Poset, usize) -> (usize, usize, usize, usize);

    fn go(
        k: usize,
        order: &[usize],
        a: &Poset,
        b: &Poset,
        map: &mut [usize],
        used: &mut [bool],
        profile: &Profile,
    ) -> bool {
        let Some(&x) = order.get(k) else {
            return true;
        };
        let px = profile(a, x);
        for y in 0..b.len() {
            if used[y] || profile(b, y) != px {
                continue;
            }
            let consistent = order[..k].iter().all(|&z| {
                a.leq(z, x) == b.leq(map[z], y) && a.leq(x, z) == b.leq(y, map[z])
            });
            if !consistent {
                continue;
            }
            map[x] = y;
            used[y] = true;
            if go(k + 1, order, a, b, map, used, profile) {
                return true;
            }
            used[y] = false;
        }
        map[x] = usize::MAX;
        false
    }

    go(0, &order, a, b, &mut map, &mut used, &profile).then_some(map)
}

/// Every down-set of `p`, in increasing order of bitmask; only for small
/// ground sets.
pub fn all_down_sets(p: &Poset) -> Vec<Subset> {
    let n = p.len();
    assert!(n <= 24, "down-set enumeration is exhaustive over 2^n masks");
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let s = subset_of(n, (0..n).filter(|&i| mask >> i & 1 == 1));
        if p.is_down_set(&s) {
            out.push(s);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: usize, xs: &[usize]) -> Subset {
        subset_of(n, xs.iter().copied())
    }

    #[test]
    fn singleton_and_chain() {
        let p = Poset::from_covers(1, &[]).unwrap();
        assert!(p.leq(0, 0));
        assert!(p.covers().is_empty());

        let c = Poset::from_covers(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(c.covers(), &[(0, 1), (1, 2)]);
        assert!(c.leq(0, 2));
    }

    #[test]
    fn redundant_pairs_are_not_covers() {
        let c = Poset::from_covers(3, &[(0, 2), (0, 1), (1, 2)]).unwrap();
        assert_eq!(c.covers(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn cycle_and_index_errors() {
        assert!(matches!(
            Poset::from_covers(3, &[(0, 1), (1, 2), (2, 0)]),
            Err(Error::Cycle(..))
        ));
        assert!(matches!(
            Poset::from_covers(2, &[(0, 5)]),
            Err(Error::Index { index: 5, size: 2 })
        ));
    }

    #[test]
    fn down_sets() {
        let c = Poset::chain(3);
        assert_eq!(c.down_set(2).unwrap(), set(3, &[0, 1, 2]));
        assert_eq!(c.strict_down_set(2).unwrap(), set(3, &[0, 1]));
        let a = Poset::antichain(3);
        assert_eq!(a.down_set(1).unwrap(), set(3, &[1]));
        assert!(a.strict_down_set(1).unwrap().is_clear());
        assert!(matches!(a.down_set(3), Err(Error::Index { .. })));

        // Jir of the 2x3 grid: a < b in one coordinate, c alone in the other.
        let jir = Poset::from_covers(3, &[(0, 1)]).unwrap();
        assert_eq!(jir.down_set(1).unwrap(), set(3, &[0, 1]));
    }

    #[test]
    fn down_set_predicate() {
        let c = Poset::chain(3);
        assert!(c.is_down_set(&set(3, &[0, 1])));
        assert!(!c.is_down_set(&set(3, &[1])));
        assert!(c.is_down_set(&set(3, &[])));
    }

    #[test]
    fn lengths() {
        assert_eq!(Poset::chain(4).length(), 3);
        assert_eq!(Poset::antichain(5).length(), 0);
        // a < b with e' isolated
        assert_eq!(Poset::from_covers(3, &[(0, 1)]).unwrap().length(), 1);
    }

    #[test]
    fn widths() {
        let p = Poset::chain(4).width_chain_partition();
        assert_eq!(p.chains, vec![vec![0, 1, 2, 3]]);
        let p = Poset::antichain(3).width_chain_partition();
        assert_eq!(p.chains, vec![vec![0], vec![1], vec![2]]);

        // a=0 < b=1, c=2 < d=3, a < d
        let p = Poset::from_covers(4, &[(0, 1), (2, 3), (0, 3)]).unwrap();
        let part = p.width_chain_partition();
        assert_eq!(part.len(), 2);
        part.clone().validate(&p).unwrap();
        // no single chain covers it: 1 and 3 are incomparable
        assert!(!p.comparable(1, 3));
    }

    #[test]
    fn parallel_chains() {
        let a = Poset::antichain(2);
        assert!(a.are_parallel(&set(2, &[0]), &set(2, &[1])).unwrap());
        let c = Poset::chain(2);
        assert!(!c.are_parallel(&set(2, &[0]), &set(2, &[1])).unwrap());
        let k1 = Poset::from_covers(3, &[(0, 1)]).unwrap();
        assert!(k1.are_parallel(&set(3, &[0, 1]), &set(3, &[2])).unwrap());
        assert!(matches!(
            a.are_parallel(&set(2, &[0, 1]), &set(2, &[])),
            Err(Error::NotAChain(0, 1))
        ));
    }

    #[test]
    fn relation_checks() {
        assert!(Poset::from_relation(2, |x, y| x <= y).is_ok());
        assert!(matches!(
            Poset::from_relation(2, |_, _| true),
            Err(Error::Cycle(..))
        ));
        // 0<=1, 1<=2 but not 0<=2
        let bad = |x: usize, y: usize| x == y || (x, y) == (0, 1) || (x, y) == (1, 2);
        assert!(matches!(
            Poset::from_relation(3, bad),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn partition_validation() {
        let p = Poset::from_covers(3, &[(0, 1)]).unwrap();
        let ok = ChainPartition {
            chains: vec![vec![1, 0], vec![2]],
        };
        assert_eq!(ok.validate(&p).unwrap().chains, vec![vec![0, 1], vec![2]]);
        let overlap = ChainPartition {
            chains: vec![vec![0, 1], vec![1, 2]],
        };
        assert!(matches!(overlap.validate(&p), Err(Error::NotAPartition(_))));
        let missing = ChainPartition {
            chains: vec![vec![0, 1]],
        };
        assert!(matches!(missing.validate(&p), Err(Error::NotAPartition(_))));
        let not_chain = ChainPartition {
            chains: vec![vec![0, 2], vec![1]],
        };
        assert!(matches!(not_chain.validate(&p), Err(Error::NotAPartition(_))));
    }

    #[test]
    fn poset_isomorphism() {
        let a = Poset::from_covers(3, &[(0, 1)]).unwrap();
        let b = Poset::from_covers(3, &[(2, 0)]).unwrap();
        let f = find_poset_isomorphism(&a, &b).unwrap();
        assert_eq!(f, vec![2, 0, 1]);
        assert!(find_poset_isomorphism(&a, &Poset::chain(3)).is_none());
    }

    #[test]
    fn down_set_enumeration() {
        assert_eq!(all_down_sets(&Poset::chain(3)).len(), 4);
        assert_eq!(all_down_sets(&Poset::antichain(3)).len(), 8);
    }
}
