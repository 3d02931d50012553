//! Finite lattices over a [`Poset`], with meet/join tables and the usual
//! structural predicates.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::poset::{subset_of, Poset, Subset};

/// Above this many elements meets and joins are computed from the order on
/// each call instead of being tabulated.
pub const DEFAULT_TABLE_THRESHOLD: usize = 4096;

/// Exhaustive maximal-chain enumeration in [`FiniteLattice::check_jhcc`] is
/// used up to this size; beyond it the check is by gradedness.
pub const JHCC_EXHAUSTIVE_LIMIT: usize = 24;

#[derive(Clone, Debug)]
enum Ops {
    Tables { meet: Vec<u32>, join: Vec<u32> },
    OnDemand,
}

#[derive(Clone, Debug)]
pub struct FiniteLattice {
    order: Poset,
    ops: Ops,
    bottom: usize,
    top: usize,
    height: Vec<usize>,
}

/// The join-irreducible elements of a lattice with their induced order.
///
/// `elements[i]` is a lattice index; `order` is indexed by position `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JirPoset {
    pub elements: Vec<usize>,
    pub order: Poset,
    pub lcov: Vec<usize>,
}

impl JirPoset {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn position(&self, x: usize) -> Option<usize> {
        self.elements.binary_search(&x).ok()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.position(x).is_some()
    }

    /// Unique lower cover of the lattice element `x`, if it is join-irreducible.
    pub fn lcov_of(&self, x: usize) -> Option<usize> {
        self.position(x).map(|i| self.lcov[i])
    }

    /// Positions of `xs` (lattice indices) as a subset of the Jir poset.
    pub fn positions_subset(&self, xs: &[usize]) -> Option<Subset> {
        let mut s = Subset::with_capacity(self.len());
        for &x in xs {
            s.insert(self.position(x)?);
        }
        Some(s)
    }
}

impl FiniteLattice {
    pub fn from_poset(order: Poset) -> Result<FiniteLattice> {
        Self::from_poset_with_threshold(order, DEFAULT_TABLE_THRESHOLD)
    }

    /// Builds a lattice from its order. Up to `table_threshold` elements the
    /// full glb/lub tables are built and every pair is checked; above it only
    /// the bounds are checked and meets/joins are computed per query.
    pub fn from_poset_with_threshold(order: Poset, table_threshold: usize) -> Result<FiniteLattice> {
        let n = order.len();
        if n == 0 {
            return Err(Error::NotALattice {
                x: 0,
                y: 0,
                reason: "is drawn from an empty poset".into(),
            });
        }
        let minimal = order.minimal_elements();
        if minimal.len() > 1 {
            return Err(Error::NotALattice {
                x: minimal[0],
                y: minimal[1],
                reason: "has no common lower bound".into(),
            });
        }
        let bottom = minimal[0];
        let maximal: Vec<usize> = (0..n).filter(|&x| order.upper_covers(x).is_empty()).collect();
        if maximal.len() > 1 {
            return Err(Error::NotALattice {
                x: maximal[0],
                y: maximal[1],
                reason: "has no common upper bound".into(),
            });
        }
        let top = maximal[0];
        let height = order.heights();

        let ops = if n <= table_threshold {
            let mut meet = vec![0u32; n * n];
            let mut join = vec![0u32; n * n];
            let mut buf = Subset::with_capacity(n);
            for x in 0..n {
                for y in x..n {
                    buf.clone_from(order.down_row(x));
                    buf.intersect_with(order.down_row(y));
                    let m = buf.ones().max_by_key(|&z| height[z]).unwrap();
                    if order.down_row(m) != &buf {
                        return Err(Error::NotALattice {
                            x,
                            y,
                            reason: "has no greatest lower bound".into(),
                        });
                    }
                    buf.clone_from(order.up_row(x));
                    buf.intersect_with(order.up_row(y));
                    let j = buf.ones().min_by_key(|&z| height[z]).unwrap();
                    if order.up_row(j) != &buf {
                        return Err(Error::NotALattice {
                            x,
                            y,
                            reason: "has no least upper bound".into(),
                        });
                    }
                    meet[x * n + y] = m as u32;
                    meet[y * n + x] = m as u32;
                    join[x * n + y] = j as u32;
                    join[y * n + x] = j as u32;
                }
            }
            Ops::Tables { meet, join }
        } else {
            Ops::OnDemand
        };
        Ok(FiniteLattice {
            order,
            ops,
            bottom,
            top,
            height,
        })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &Poset {
        &self.order
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn has_tables(&self) -> bool {
        matches!(self.ops, Ops::Tables { .. })
    }

    #[inline]
    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.order.leq(x, y)
    }

    #[inline]
    pub fn lt(&self, x: usize, y: usize) -> bool {
        self.order.lt(x, y)
    }

    #[inline]
    pub fn covers(&self, x: usize, y: usize) -> bool {
        self.order.is_cover(x, y)
    }

    pub fn meet(&self, x: usize, y: usize) -> usize {
        match &self.ops {
            Ops::Tables { meet, .. } => meet[x * self.len() + y] as usize,
            Ops::OnDemand => {
                let mut buf = self.order.down_row(x).clone();
                buf.intersect_with(self.order.down_row(y));
                let m = buf.ones().max_by_key(|&z| self.height[z]).unwrap();
                assert!(
                    self.order.down_row(m) == &buf,
                    "({x}, {y}) has no greatest lower bound"
                );
                m
            }
        }
    }

    pub fn join(&self, x: usize, y: usize) -> usize {
        match &self.ops {
            Ops::Tables { join, .. } => join[x * self.len() + y] as usize,
            Ops::OnDemand => {
                let mut buf = self.order.up_row(x).clone();
                buf.intersect_with(self.order.up_row(y));
                let j = buf.ones().min_by_key(|&z| self.height[z]).unwrap();
                assert!(
                    self.order.up_row(j) == &buf,
                    "({x}, {y}) has no least upper bound"
                );
                j
            }
        }
    }

    pub fn join_all(&self, xs: impl IntoIterator<Item = usize>) -> usize {
        xs.into_iter().fold(self.bottom, |acc, x| self.join(acc, x))
    }

    pub fn meet_all(&self, xs: impl IntoIterator<Item = usize>) -> usize {
        xs.into_iter().fold(self.top, |acc, x| self.meet(acc, x))
    }

    /// Longest chain from the bottom to `x`; the rank when the lattice is graded.
    pub fn height(&self, x: usize) -> usize {
        self.height[x]
    }

    pub fn heights(&self) -> &[usize] {
        &self.height
    }

    pub fn length(&self) -> usize {
        self.height[self.top]
    }

    pub fn atoms(&self) -> Vec<usize> {
        self.order.upper_covers(self.bottom).to_vec()
    }

    pub fn down_set(&self, x: usize) -> Subset {
        self.order.down_row(x).clone()
    }

    pub fn join_irreducibles(&self) -> JirPoset {
        let elements: Vec<usize> = (0..self.len())
            .filter(|&x| self.order.lower_covers(x).len() == 1)
            .collect();
        let lcov = elements
            .iter()
            .map(|&x| self.order.lower_covers(x)[0])
            .collect();
        let order = self.order.induced(&elements);
        JirPoset {
            elements,
            order,
            lcov,
        }
    }

    pub fn is_join_irreducible(&self, x: usize) -> bool {
        self.order.lower_covers(x).len() == 1
    }

    /// A pair `(x, y)` with `x ∧ y ≺ x` but not `y ≺ x ∨ y`.
    pub fn semimodularity_violation(&self) -> Option<(usize, usize)> {
        let n = self.len();
        for x in 0..n {
            for &m in self.order.lower_covers(x) {
                // every y with x ∧ y = m
                for y in self.order.up_row(m).ones() {
                    if self.meet(x, y) == m && !self.covers(y, self.join(x, y)) {
                        return Some((x, y));
                    }
                }
            }
        }
        None
    }

    pub fn is_semimodular(&self) -> bool {
        self.semimodularity_violation().is_none()
    }

    /// Jordan–Hölder chain condition: all maximal chains of every interval
    /// have the same length.
    pub fn check_jhcc(&self) -> bool {
        if self.len() <= JHCC_EXHAUSTIVE_LIMIT {
            (0..self.len()).all(|a| {
                self.order
                    .up_row(a)
                    .ones()
                    .all(|b| self.maximal_chain_lengths(a, b).len() == 1)
            })
        } else {
            self.is_graded()
        }
    }

    /// Every cover raises the height by exactly one.
    pub fn is_graded(&self) -> bool {
        self.order
            .covers()
            .iter()
            .all(|&(x, y)| self.height[y] == self.height[x] + 1)
    }

    /// Lengths of all maximal chains of `[a, b]`, by depth-first enumeration.
    pub fn maximal_chain_lengths(&self, a: usize, b: usize) -> BTreeSet<usize> {
        fn walk(l: &FiniteLattice, x: usize, b: usize, depth: usize, out: &mut BTreeSet<usize>) {
            if x == b {
                out.insert(depth);
                return;
            }
            for &y in l.order.upper_covers(x) {
                if l.leq(y, b) {
                    walk(l, y, b, depth + 1, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        if self.leq(a, b) {
            walk(self, a, b, 0, &mut out);
        }
        out
    }

    /// Length of `[a, b]`, assuming the lattice is graded.
    pub fn interval_length(&self, a: usize, b: usize) -> usize {
        debug_assert!(self.leq(a, b));
        self.height[b] - self.height[a]
    }

    pub fn is_geometric(&self) -> bool {
        self.is_semimodular()
            && (0..self.len())
                .filter(|&x| self.is_join_irreducible(x))
                .all(|x| self.order.lower_covers(x)[0] == self.bottom)
    }

    pub fn is_distributive(&self) -> bool {
        let n = self.len();
        (0..n).all(|x| {
            (0..n).all(|y| {
                (0..n).all(|z| {
                    self.meet(x, self.join(y, z)) == self.join(self.meet(x, y), self.meet(x, z))
                })
            })
        })
    }

    pub fn is_modular(&self) -> bool {
        let n = self.len();
        (0..n).all(|x| {
            self.order.up_row(x).ones().all(|z| {
                (0..n).all(|y| self.join(x, self.meet(y, z)) == self.meet(self.join(x, y), z))
            })
        })
    }

    /// Semimodular and without an `M3` sublattice.
    pub fn is_join_distributive(&self) -> bool {
        self.is_semimodular() && self.find_m3_sublattice().is_none()
    }

    /// `[o, a, b, c, i]` forming an `M3` sublattice.
    pub fn find_m3_sublattice(&self) -> Option<[usize; 5]> {
        self.find_m3(false)
    }

    /// An `M3` sublattice whose five elements are joined by covers.
    pub fn find_cover_preserving_m3(&self) -> Option<[usize; 5]> {
        self.find_m3(true)
    }

    fn find_m3(&self, cover_preserving: bool) -> Option<[usize; 5]> {
        let n = self.len();
        for a in 0..n {
            for b in a + 1..n {
                if self.order.comparable(a, b) {
                    continue;
                }
                let o = self.meet(a, b);
                let i = self.join(a, b);
                if cover_preserving
                    && !(self.covers(o, a)
                        && self.covers(o, b)
                        && self.covers(a, i)
                        && self.covers(b, i))
                {
                    continue;
                }
                for c in b + 1..n {
                    if self.meet(a, c) == o
                        && self.meet(b, c) == o
                        && self.join(a, c) == i
                        && self.join(b, c) == i
                        && (!cover_preserving || (self.covers(o, c) && self.covers(c, i)))
                    {
                        return Some([o, a, b, c, i]);
                    }
                }
            }
        }
        None
    }

    /// `[o, a, b, c, i]` with `o < a < b < i`, `c` a complement of both.
    pub fn find_n5_sublattice(&self) -> Option<[usize; 5]> {
        let n = self.len();
        for a in 0..n {
            for b in self.order.up_row(a).ones() {
                if a == b {
                    continue;
                }
                for c in 0..n {
                    if self.order.comparable(a, c) || self.order.comparable(b, c) {
                        continue;
                    }
                    let o = self.meet(b, c);
                    let i = self.join(a, c);
                    if self.meet(a, c) == o && self.join(b, c) == i {
                        return Some([o, a, b, c, i]);
                    }
                }
            }
        }
        None
    }

    /// Checks that `f` is a length-preserving (cover-preserving `{0,1}`)
    /// embedding of `self` into `k`, naming the first failure.
    pub fn check_length_preserving_embedding(&self, k: &FiniteLattice, f: &[usize]) -> std::result::Result<(), String> {
        let n = self.len();
        if f.len() != n {
            return Err(format!("map has {} entries for {} elements", f.len(), n));
        }
        if let Some(&bad) = f.iter().find(|&&y| y >= k.len()) {
            return Err(format!("image {bad} out of range"));
        }
        let mut seen = Subset::with_capacity(k.len());
        for (x, &y) in f.iter().enumerate() {
            if seen.put(y) {
                return Err(format!("not injective at {x} -> {y}"));
            }
        }
        if f[self.bottom] != k.bottom {
            return Err("bottom not preserved".into());
        }
        if f[self.top] != k.top {
            return Err("top not preserved".into());
        }
        if self.length() != k.length() {
            return Err(format!("length {} vs {}", self.length(), k.length()));
        }
        for x in 0..n {
            for y in x..n {
                if f[self.meet(x, y)] != k.meet(f[x], f[y]) {
                    return Err(format!("meet of ({x}, {y}) not preserved"));
                }
                if f[self.join(x, y)] != k.join(f[x], f[y]) {
                    return Err(format!("join of ({x}, {y}) not preserved"));
                }
            }
        }
        for &(x, y) in self.order.covers() {
            if !k.covers(f[x], f[y]) {
                return Err(format!("cover {x} ≺ {y} not preserved"));
            }
        }
        Ok(())
    }

    pub fn verify_length_preserving_embedding(&self, k: &FiniteLattice, f: &[usize]) -> bool {
        self.check_length_preserving_embedding(k, f).is_ok()
    }

    /// Every cross pair of the two chains (lattice indices inside Jir) meets
    /// to the bottom.
    pub fn chains_lattice_disjoint(&self, c1: &[usize], c2: &[usize]) -> Result<bool> {
        for c in [c1, c2] {
            if let Some(&x) = c.iter().find(|&&x| x >= self.len()) {
                return Err(Error::Index {
                    index: x,
                    size: self.len(),
                });
            }
            if let Some(&x) = c.iter().find(|&&x| !self.is_join_irreducible(x)) {
                return Err(Error::Precondition(format!("{x} is not join-irreducible")));
            }
            self.order.check_chain(&subset_of(self.len(), c.iter().copied()))?;
        }
        Ok(c1
            .iter()
            .all(|&a| c2.iter().all(|&b| self.meet(a, b) == self.bottom)))
    }

    fn profile(&self, x: usize) -> (usize, usize, usize, usize, usize) {
        (
            self.height[x],
            self.order.lower_covers(x).len(),
            self.order.upper_covers(x).len(),
            self.order.down_row(x).count_ones(..),
            self.order.up_row(x).count_ones(..),
        )
    }

    /// Backtracking search for a lattice isomorphism `self -> other`.
    ///
    /// Elements with two or more lower covers are the join of any two of
    /// them, so only join-irreducibles are actually branched on.
    pub fn find_isomorphism(&self, other: &FiniteLattice) -> Option<Vec<usize>> {
        let n = self.len();
        if n != other.len()
            || self.order.covers().len() != other.order.covers().len()
            || self.length() != other.length()
        {
            return None;
        }
        let mut mine: Vec<_> = (0..n).map(|x| self.profile(x)).collect();
        let mut theirs: Vec<_> = (0..n).map(|x| other.profile(x)).collect();
        let profiles = (mine.clone(), theirs.clone());
        mine.sort_unstable();
        theirs.sort_unstable();
        if mine != theirs {
            return None;
        }
        let order = self.order.linear_extension();
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; n];

        struct Ctx<'a> {
            a: &'a FiniteLattice,
            b: &'a FiniteLattice,
            order: Vec<usize>,
            pa: Vec<(usize, usize, usize, usize, usize)>,
            pb: Vec<(usize, usize, usize, usize, usize)>,
        }

        fn consistent(ctx: &Ctx, k: usize, x: usize, y: usize, map: &[usize]) -> bool {
            ctx.order[..k].iter().all(|&z| {
                ctx.a.leq(z, x) == ctx.b.leq(map[z], y) && ctx.a.leq(x, z) == ctx.b.leq(y, map[z])
            })
        }

        fn go(ctx: &Ctx, k: usize, map: &mut [usize], used: &mut [bool]) -> bool {
            let Some(&x) = ctx.order.get(k) else {
                return true;
            };
            let lc = ctx.a.order.lower_covers(x);
            let candidates: Vec<usize> = if lc.len() >= 2 {
                vec![ctx.b.join(map[lc[0]], map[lc[1]])]
            } else {
                (0..ctx.b.len()).filter(|&y| ctx.pb[y] == ctx.pa[x]).collect()
            };
            for y in candidates {
                if used[y] || ctx.pb[y] != ctx.pa[x] || !consistent(ctx, k, x, y, map) {
                    continue;
                }
                map[x] = y;
                used[y] = true;
                if go(ctx, k + 1, map, used) {
                    return true;
                }
                used[y] = false;
                map[x] = usize::MAX;
            }
            false
        }

        let ctx = Ctx {
            a: self,
            b: other,
            order,
            pa: profiles.0,
            pb: profiles.1,
        };
        go(&ctx, 0, &mut map, &mut used).then_some(map)
    }

    pub fn is_isomorphic(&self, other: &FiniteLattice) -> bool {
        self.find_isomorphism(other).is_some()
    }

    /// Same indices, same order.
    pub fn same_order(&self, other: &FiniteLattice) -> bool {
        self.order == other.order
    }
}
