//! Exhaustive enumeration of small posets and of every geometry on a given
//! ground poset.
//!
//! Geometries are generated top-down: candidate down-sets are decided in
//! order of decreasing size. When a set is taken, every flat strictly above
//! it has already been decided, so its intersections with earlier flats can
//! be forced into the family and (CP) can be checked on the spot.

use std::collections::HashMap;
use std::ops::ControlFlow;

use crate::geometry::Geometry;
use crate::poset::{all_down_sets, find_poset_isomorphism, subset_of, Poset, Subset};

struct Search<'a> {
    ground: &'a Poset,
    cands: Vec<Subset>,
    index: HashMap<Subset, usize>,
    strict_down: Vec<Subset>,
    required: Vec<bool>,
    included: Vec<bool>,
    forced: Vec<u32>,
    up_len: Vec<usize>,
    max_length: Option<usize>,
}

impl Search<'_> {
    /// Tries to add candidate `i`; on success returns the forced indices to
    /// release on backtrack.
    fn include(&mut self, i: usize) -> Option<Vec<usize>> {
        let c = &self.cands[i];
        let n = self.ground.len();

        let mut up_len = 0;
        for j in 0..i {
            if self.included[j] && c.is_subset(&self.cands[j]) && c != &self.cands[j] {
                up_len = up_len.max(self.up_len[j] + 1);
            }
        }
        if self.max_length.is_some_and(|m| up_len > m) {
            return None;
        }

        for q in 0..n {
            if c.contains(q) || !self.strict_down[q].is_subset(c) {
                continue;
            }
            let mut cq = c.clone();
            cq.insert(q);
            let mut y = subset_of(n, 0..n);
            for j in 0..i {
                if self.included[j] && cq.is_subset(&self.cands[j]) {
                    y.intersect_with(&self.cands[j]);
                }
            }
            let blocked = (0..i).any(|j| {
                let z = &self.cands[j];
                self.included[j] && c.is_subset(z) && z != c && z.is_subset(&y) && z != &y
            });
            if blocked {
                return None;
            }
        }

        let mut forced = Vec::new();
        for j in 0..i {
            if !self.included[j] {
                continue;
            }
            let mut meet = c.clone();
            meet.intersect_with(&self.cands[j]);
            let k = self.index[&meet];
            if k != i {
                debug_assert!(k > i);
                forced.push(k);
            }
        }
        for &k in &forced {
            self.forced[k] += 1;
        }
        self.included[i] = true;
        self.up_len[i] = up_len;
        Some(forced)
    }

    fn release(&mut self, i: usize, forced: Vec<usize>) {
        self.included[i] = false;
        for k in forced {
            self.forced[k] -= 1;
        }
    }

    fn run(&mut self, i: usize, visit: &mut dyn FnMut(Geometry) -> ControlFlow<()>) -> ControlFlow<()> {
        if i == self.cands.len() {
            let flats = (0..i)
                .filter(|&j| self.included[j])
                .map(|j| self.cands[j].clone())
                .collect();
            return visit(Geometry::new_unchecked(self.ground.clone(), flats));
        }
        if let Some(forced) = self.include(i) {
            let flow = self.run(i + 1, visit);
            self.release(i, forced);
            flow?;
        }
        if !self.required[i] && self.forced[i] == 0 {
            self.run(i + 1, visit)?;
        }
        ControlFlow::Continue(())
    }
}

/// Calls `visit` on every geometry with ground poset `p`, in a fixed order.
/// With `max_length`, families containing a longer `⊆`-chain are skipped.
pub fn for_each_geometry(
    p: &Poset,
    max_length: Option<usize>,
    mut visit: impl FnMut(Geometry) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let n = p.len();
    let mut cands = all_down_sets(p);
    cands.sort_by(|a, b| {
        b.count_ones(..)
            .cmp(&a.count_ones(..))
            .then_with(|| b.cmp(a))
    });
    let index: HashMap<Subset, usize> = cands.iter().cloned().zip(0..).collect();
    let strict_down: Vec<Subset> = (0..n).map(|u| p.strict_down_set(u).unwrap()).collect();
    let mut required = vec![false; cands.len()];
    required[index[&subset_of(n, 0..n)]] = true;
    required[index[&Subset::with_capacity(n)]] = true;
    for u in 0..n {
        required[index[p.down_row(u)]] = true;
        required[index[&strict_down[u]]] = true;
    }
    let m = cands.len();
    let mut search = Search {
        ground: p,
        cands,
        index,
        strict_down,
        required,
        included: vec![false; m],
        forced: vec![0; m],
        up_len: vec![0; m],
        max_length,
    };
    search.run(0, &mut visit)
}

pub fn enumerate_geometries(p: &Poset) -> Vec<Geometry> {
    let mut out = Vec::new();
    let _ = for_each_geometry(p, None, |g| {
        out.push(g);
        ControlFlow::Continue(())
    });
    out
}

/// All labelled posets on `0..n`; intended for `n <= 4`.
pub fn labelled_posets(n: usize) -> Vec<Poset> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|x| (0..n).filter(move |&y| y != x).map(move |y| (x, y)))
        .collect();
    assert!(pairs.len() <= 20, "labelled poset enumeration is exponential");
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << pairs.len()) {
        let lt = |x: usize, y: usize| {
            pairs
                .iter()
                .position(|&p| p == (x, y))
                .is_some_and(|k| mask >> k & 1 == 1)
        };
        if let Ok(p) = Poset::from_relation(n, |x, y| x == y || lt(x, y)) {
            out.push(p);
        }
    }
    out
}

/// One representative per isomorphism class of posets on `n` elements.
pub fn posets_up_to_isomorphism(n: usize) -> Vec<Poset> {
    let mut reps: Vec<Poset> = Vec::new();
    for p in labelled_posets(n) {
        if !reps.iter().any(|r| find_poset_isomorphism(r, &p).is_some()) {
            reps.push(p);
        }
    }
    reps
}
