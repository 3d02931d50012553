//! Lowering a join-irreducible element `e` of a semimodular lattice `L` to a
//! cover of a prescribed `h < lcov(e)`.
//!
//! Two independent constructions are provided. [`lower_direct`] writes the
//! order of the extension `K = L ∪ N` down case by case; [`lower_via_geometry`]
//! adds the flats `{e} ∪ X` to the geometry of `L` and takes the lattice of
//! the result. Both index `K` the same way: `L` keeps `0..|L|` and the copy of
//! the `i`-th element of `D` (ascending) is `|L| + i`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{geom_of_lattice, lat_of_geometry, lattice_flat, Geometry};
use crate::lattice::FiniteLattice;
use crate::poset::{Poset, Subset};

/// How much of the postcondition suite runs after a lowering.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Verify {
    /// Every invariant, including all-pairs semimodularity and embedding.
    #[default]
    Full,
    /// Linear-size checks only: Jir exchange, `lcov(e')`, length, covers.
    Light,
}

#[derive(Clone, Debug)]
pub struct LoweringResult {
    pub base: Arc<FiniteLattice>,
    pub k: Arc<FiniteLattice>,
    /// `L → K`; the identity on `0..|L|`.
    pub embed: Vec<usize>,
    pub e: usize,
    pub h: usize,
    pub e_prime: usize,
    /// `D`, ascending.
    pub d: Vec<usize>,
    /// `N`: `n[i]` is the copy of `d[i]`.
    pub n: Vec<usize>,
}

impl LoweringResult {
    /// The copy of `x ∈ D` in `N`.
    pub fn lift(&self, x: usize) -> Option<usize> {
        self.d.binary_search(&x).ok().map(|i| self.n[i])
    }

    /// The element of `D` a new element `y ∈ N` was copied from.
    pub fn alit(&self, y: usize) -> Option<usize> {
        y.checked_sub(self.base.len()).and_then(|i| self.d.get(i).copied())
    }

    pub fn in_d(&self, x: usize) -> bool {
        self.d.binary_search(&x).is_ok()
    }

    pub fn is_new(&self, y: usize) -> bool {
        y >= self.base.len()
    }
}

/// Checks `e ∈ Jir L` and `h < lcov(e)`; returns `lcov(e)`.
fn check_params(l: &FiniteLattice, e: usize, h: usize) -> Result<usize> {
    for i in [e, h] {
        if i >= l.len() {
            return Err(Error::Index {
                index: i,
                size: l.len(),
            });
        }
    }
    if !l.is_join_irreducible(e) {
        return Err(Error::Precondition(format!("{e} is not join-irreducible")));
    }
    let lcov = l.order().lower_covers(e)[0];
    if lcov == l.bottom() {
        return Err(Error::Precondition(format!(
            "{e} is an atom and cannot be lowered"
        )));
    }
    if h == lcov {
        return Err(Error::Precondition(format!(
            "h = {h} is already the lower cover of {e}"
        )));
    }
    if !l.lt(h, lcov) {
        return Err(Error::Precondition(format!(
            "h = {h} is not strictly below lcov({e}) = {lcov}"
        )));
    }
    Ok(lcov)
}

/// `D = { x ≥ h : e ≰ y for every y with x ⪯ y }`.
pub fn compute_d(l: &FiniteLattice, e: usize, h: usize) -> Result<Vec<usize>> {
    check_params(l, e, h)?;
    Ok(l.order()
        .up_row(h)
        .ones()
        .filter(|&x| {
            !l.leq(e, x) && l.order().upper_covers(x).iter().all(|&y| !l.leq(e, y))
        })
        .collect())
}

pub fn lower_direct(l: &FiniteLattice, e: usize, h: usize) -> Result<LoweringResult> {
    lower_direct_with(Arc::new(l.clone()), e, h, Verify::Full)
}

pub fn lower_direct_with(
    l: Arc<FiniteLattice>,
    e: usize,
    h: usize,
    verify: Verify,
) -> Result<LoweringResult> {
    let d = compute_d(&l, e, h)?;
    if verify == Verify::Full {
        if let Some((x, y)) = l.semimodularity_violation() {
            return Err(Error::Precondition(format!(
                "lattice is not semimodular at ({x}, {y})"
            )));
        }
    }
    let n = l.len();
    let nk = n + d.len();
    // alit(x) ∨ e for every new element
    let lifted_join: Vec<usize> = d.iter().map(|&x| l.join(x, e)).collect();
    let order = Poset::from_relation(nk, |x, y| match (x < n, y < n) {
        (true, true) => l.leq(x, y),
        (false, false) => l.leq(d[x - n], d[y - n]),
        (true, false) => l.leq(x, d[y - n]),
        (false, true) => l.leq(lifted_join[x - n], y),
    })
    .map_err(|err| Error::Verification(format!("order on K is not a partial order: {err}")))?;
    let k = FiniteLattice::from_poset(order)
        .map_err(|err| Error::Verification(format!("K is not a lattice: {err}")))?;
    package(l, Arc::new(k), e, h, d, verify)
}

fn package(
    l: Arc<FiniteLattice>,
    k: Arc<FiniteLattice>,
    e: usize,
    h: usize,
    d: Vec<usize>,
    verify: Verify,
) -> Result<LoweringResult> {
    let base = l.len();
    let new: Vec<usize> = (base..base + d.len()).collect();
    let pos = d
        .binary_search(&h)
        .map_err(|_| Error::Verification(format!("h = {h} is not in D")))?;
    let res = LoweringResult {
        embed: (0..base).collect(),
        e_prime: new[pos],
        base: l,
        k,
        e,
        h,
        d,
        n: new,
    };
    verify_lowering(&res, verify)?;
    Ok(res)
}

fn convex(l: &FiniteLattice, set: &Subset) -> bool {
    set.ones().all(|a| {
        set.ones().filter(|&b| l.leq(a, b)).all(|b| {
            let mut between = l.order().up_row(a).clone();
            between.intersect_with(l.order().down_row(b));
            between.is_subset(set)
        })
    })
}

/// Runs the postconditions of a lowering.
pub fn verify_lowering(res: &LoweringResult, level: Verify) -> Result<()> {
    let l = &*res.base;
    let k = &*res.k;
    let fail = |msg: String| Err(Error::Verification(msg));

    if k.len() != l.len() + res.d.len() {
        return fail(format!("|K| = {} but |L| + |D| = {}", k.len(), l.len() + res.d.len()));
    }
    if k.length() != l.length() {
        return fail(format!("length changed from {} to {}", l.length(), k.length()));
    }
    let jir_l = l.join_irreducibles();
    let jir_k = k.join_irreducibles();
    if jir_l.len() != jir_k.len() {
        return fail(format!("|Jir| changed from {} to {}", jir_l.len(), jir_k.len()));
    }
    let lost: Vec<usize> = jir_l
        .elements
        .iter()
        .map(|&x| res.embed[x])
        .filter(|&x| !jir_k.contains(x))
        .collect();
    let embedded: Vec<usize> = jir_l.elements.iter().map(|&x| res.embed[x]).collect();
    let gained: Vec<usize> = jir_k
        .elements
        .iter()
        .copied()
        .filter(|x| !embedded.contains(x))
        .collect();
    if lost != [res.embed[res.e]] || gained != [res.e_prime] {
        return fail(format!(
            "Jir exchange is {lost:?} -> {gained:?}, expected [{}] -> [{}]",
            res.embed[res.e], res.e_prime
        ));
    }
    if jir_k.lcov_of(res.e_prime) != Some(res.embed[res.h]) {
        return fail(format!("lcov(e') = {:?}, expected {}", jir_k.lcov_of(res.e_prime), res.h));
    }
    if res.lift(res.h) != Some(res.e_prime) {
        return fail("e' is not the copy of h".into());
    }
    for &(x, y) in l.order().covers() {
        if !k.covers(res.embed[x], res.embed[y]) {
            return fail(format!("cover {x} ≺ {y} is not preserved"));
        }
    }
    if level == Verify::Light {
        return Ok(());
    }

    if let Some((x, y)) = k.semimodularity_violation() {
        return fail(format!("K is not semimodular at ({x}, {y})"));
    }
    l.check_length_preserving_embedding(k, &res.embed)
        .or_else(|msg| fail(format!("embedding: {msg}")))?;

    let d_in_l: Subset = crate::poset::subset_of(l.len(), res.d.iter().copied());
    let d_in_k: Subset = crate::poset::subset_of(k.len(), res.d.iter().map(|&x| res.embed[x]));
    let n_in_k: Subset = crate::poset::subset_of(k.len(), res.n.iter().copied());
    let mut dn = d_in_k.clone();
    dn.union_with(&n_in_k);
    if !dn.ones().all(|x| k.leq(res.embed[res.h], x)) {
        return fail("h is not the least element of D ∪ N".into());
    }
    if !convex(l, &d_in_l) {
        return fail("D is not convex in L".into());
    }
    if !convex(k, &d_in_k) {
        return fail("D is not convex in K".into());
    }
    if !convex(k, &n_in_k) {
        return fail("N is not convex in K".into());
    }
    if !convex(k, &dn) {
        return fail("D ∪ N is not convex in K".into());
    }
    Ok(())
}

/// The intermediate objects of the geometric construction.
#[derive(Clone, Debug)]
pub struct GeometricLowering {
    /// `Geom L`; ground positions are Jir positions of `L`.
    pub base: Geometry,
    /// Jir position of `e`.
    pub e: usize,
    /// `H = Jir L ∩ ↓h`.
    pub h_flat: Subset,
    /// The flats `X ⊇ H` none of whose covers-or-equals contain `e`.
    pub d_flats: Vec<Subset>,
    /// `{e} ∪ X` for each `X` in `d_flats`.
    pub n_flats: Vec<Subset>,
    /// The reordered ground poset.
    pub r: Poset,
    pub extended: Geometry,
}

/// Builds the extended geometry `(R, F ∪ N)` for lowering `e` to `h`.
pub fn lowering_geometry(l: &FiniteLattice, e: usize, h: usize) -> Result<GeometricLowering> {
    check_params(l, e, h)?;
    let base = geom_of_lattice(l)?;
    let jir = l.join_irreducibles();
    let ep = jir.position(e).expect("e is join-irreducible");
    let h_flat = lattice_flat(l, &jir, h);
    let family = base.inclusion_order();
    let flats = base.flats();

    let d_flats: Vec<Subset> = (0..flats.len())
        .filter(|&i| {
            h_flat.is_subset(&flats[i])
                && !flats[i].contains(ep)
                && family
                    .upper_covers(i)
                    .iter()
                    .all(|&j| !flats[j].contains(ep))
        })
        .map(|i| flats[i].clone())
        .collect();
    let n_flats: Vec<Subset> = d_flats
        .iter()
        .map(|x| {
            let mut y = x.clone();
            y.insert(ep);
            y
        })
        .collect();
    if let Some(y) = n_flats.iter().find(|y| base.is_flat(y)) {
        return Err(Error::Verification(format!(
            "new flat {:?} already belongs to Geom L",
            y.ones().collect::<Vec<_>>()
        )));
    }

    let p = base.ground();
    let r = Poset::from_relation(p.len(), |y, x| {
        y == x || (p.lt(y, x) && x != ep) || (x == ep && h_flat.contains(y))
    })
    .map_err(|err| Error::Verification(format!("R is not a poset: {err}")))?;

    let mut all = flats.to_vec();
    all.extend(n_flats.iter().cloned());
    let extended = Geometry::new(r.clone(), all)
        .map_err(|err| Error::Verification(format!("extended family: {err}")))?;
    Ok(GeometricLowering {
        base,
        e: ep,
        h_flat,
        d_flats,
        n_flats,
        r,
        extended,
    })
}

pub fn lower_via_geometry(l: &FiniteLattice, e: usize, h: usize) -> Result<LoweringResult> {
    if let Some((x, y)) = l.semimodularity_violation() {
        return Err(Error::Precondition(format!(
            "lattice is not semimodular at ({x}, {y})"
        )));
    }
    let gl = lowering_geometry(l, e, h)?;
    let kg = lat_of_geometry(&gl.extended)
        .map_err(|err| Error::Verification(format!("Lat of extended geometry: {err}")))?;
    let jir = l.join_irreducibles();
    let n = l.len();

    // Relabel flats into the L-first convention.
    let flat_of: Vec<Subset> = (0..n).map(|x| lattice_flat(l, &jir, x)).collect();
    let d: Vec<usize> = (0..n).filter(|&x| gl.d_flats.contains(&flat_of[x])).collect();
    let mut perm: Vec<usize> = flat_of
        .iter()
        .map(|f| gl.extended.flat_index(f).expect("old flats survive"))
        .collect();
    for &x in &d {
        let mut y = flat_of[x].clone();
        y.insert(gl.e);
        perm.push(gl.extended.flat_index(&y).expect("new flats are present"));
    }
    if perm.len() != kg.len() {
        return Err(Error::Verification(format!(
            "{} flats relabelled out of {}",
            perm.len(),
            kg.len()
        )));
    }
    let order = Poset::from_relation(perm.len(), |a, b| kg.leq(perm[a], perm[b]))?;
    let k = FiniteLattice::from_poset(order)?;
    package(Arc::new(l.clone()), Arc::new(k), e, h, d, Verify::Full)
}

/// Closed-form meet in `K`, computed from `L` alone.
pub fn meet_formula(res: &LoweringResult, x: usize, y: usize) -> usize {
    let l = &*res.base;
    let lift = |z: usize| res.lift(z).expect("meet of elements above h stays in D");
    match (res.alit(x), res.alit(y)) {
        (None, None) => l.meet(x, y),
        (Some(a), Some(b)) => lift(l.meet(a, b)),
        // equal to x itself only when alit(x) <= y
        (Some(a), None) => {
            if l.leq(res.e, y) {
                lift(l.meet(a, y))
            } else {
                l.meet(a, y)
            }
        }
        (None, Some(b)) => {
            if l.leq(res.e, x) {
                lift(l.meet(x, b))
            } else {
                l.meet(x, b)
            }
        }
    }
}

/// Closed-form join in `K`, computed from `L` alone.
pub fn join_formula(res: &LoweringResult, x: usize, y: usize) -> usize {
    let l = &*res.base;
    let via = |j: usize| match res.lift(j) {
        Some(z) => z,
        None => l.join(j, res.e),
    };
    match (res.alit(x), res.alit(y)) {
        (None, None) => l.join(x, y),
        (Some(a), Some(b)) => via(l.join(a, b)),
        (Some(a), None) => via(l.join(a, y)),
        (None, Some(b)) => via(l.join(x, b)),
    }
}

/// Closed-form cover relation `x ≺ y` in `K`.
pub fn covers_formula(res: &LoweringResult, x: usize, y: usize) -> bool {
    let l = &*res.base;
    match (res.alit(x), res.alit(y)) {
        (None, None) => l.covers(x, y),
        (Some(a), Some(b)) => l.covers(a, b),
        (None, Some(b)) => x == b,
        (Some(a), None) => {
            let top = l.join(a, res.e);
            y == top && l.interval_length(a, top) == 2
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Predicate {
    Distributive,
    Modular,
    JoinDistributive,
    Semimodular,
}

impl Predicate {
    pub const ALL: [Predicate; 4] = [
        Predicate::Distributive,
        Predicate::Modular,
        Predicate::JoinDistributive,
        Predicate::Semimodular,
    ];

    pub fn eval(self, l: &FiniteLattice) -> bool {
        match self {
            Predicate::Distributive => l.is_distributive(),
            Predicate::Modular => l.is_modular(),
            Predicate::JoinDistributive => l.is_join_distributive(),
            Predicate::Semimodular => l.is_semimodular(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Predicate::Distributive => "distributive",
            Predicate::Modular => "modular",
            Predicate::JoinDistributive => "join-distributive",
            Predicate::Semimodular => "semimodular",
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Predicate {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.replace('_', "-").as_str() {
            "distributive" => Ok(Predicate::Distributive),
            "modular" => Ok(Predicate::Modular),
            "join-distributive" => Ok(Predicate::JoinDistributive),
            "semimodular" => Ok(Predicate::Semimodular),
            other => Err(format!("unknown predicate `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PreservationRecord {
    pub predicate: Predicate,
    pub before: bool,
    pub after: bool,
}

impl PreservationRecord {
    /// `before ⟹ after`.
    pub fn preserved(&self) -> bool {
        !self.before || self.after
    }
}

pub fn check_preservation(
    l: &FiniteLattice,
    e: usize,
    h: usize,
    predicate: Predicate,
) -> Result<PreservationRecord> {
    let res = lower_direct(l, e, h)?;
    Ok(PreservationRecord {
        predicate,
        before: predicate.eval(l),
        after: predicate.eval(&res.k),
    })
}
