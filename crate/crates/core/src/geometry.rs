//! Geometries: a ground poset together with a family of flats satisfying the
//! axioms (FL), (F∩), (F↓), (Pr) and (CP), and the canonical maps between
//! geometries and semimodular lattices.
//!
//! Flats are kept sorted by `(cardinality, bits)`, so the empty flat comes
//! first, the ground set last, and the order is a linear extension of `⊆`.
//! The lattice of a geometry uses the flat positions as element indices.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::lattice::{FiniteLattice, JirPoset};
use crate::poset::{subset_of, Poset, Subset};

fn flat_cmp(a: &Subset, b: &Subset) -> Ordering {
    a.count_ones(..)
        .cmp(&b.count_ones(..))
        .then_with(|| a.cmp(b))
}

pub(crate) fn sort_flats(flats: &mut Vec<Subset>) {
    flats.sort_by(flat_cmp);
    flats.dedup();
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Geometry {
    ground: Poset,
    flats: Vec<Subset>,
}

/// A concrete reason one axiom fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// A flat is not a subset of the ground set.
    OutsideGround { flat: Vec<usize> },
    GroundMissing,
    IntersectionMissing { x: Vec<usize>, y: Vec<usize> },
    NotDownSet { flat: Vec<usize>, element: usize, below: usize },
    EmptyMissing,
    PrincipalMissing { u: usize },
    StrictPrincipalMissing { u: usize },
    /// No flat covering `x` contains `q`, although `q ∉ x` and `↓q \ {q} ⊆ x`.
    NoCover { q: usize, x: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    /// Length of the longest `⊆`-chain of flats.
    pub length: usize,
    pub finite_length: Option<Violation>,
    pub intersection: Option<Violation>,
    pub down_sets: Option<Violation>,
    pub principal: Option<Violation>,
    pub covering: Option<Violation>,
}

impl AxiomReport {
    pub fn passes(&self) -> bool {
        self.violations().next().is_none()
    }

    pub fn violations(&self) -> impl Iterator<Item = (&'static str, &Violation)> {
        [
            ("FL", &self.finite_length),
            ("F∩", &self.intersection),
            ("F↓", &self.down_sets),
            ("Pr", &self.principal),
            ("CP", &self.covering),
        ]
        .into_iter()
        .filter_map(|(name, v)| v.as_ref().map(|v| (name, v)))
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passes() {
            return write!(f, "all axioms hold (length {})", self.length);
        }
        let parts: Vec<String> = self
            .violations()
            .map(|(name, v)| format!("({name}) {v:?}"))
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

fn members(s: &Subset) -> Vec<usize> {
    s.ones().collect()
}

impl Geometry {
    /// Builds a geometry and checks all five axioms.
    pub fn new(ground: Poset, flats: Vec<Subset>) -> Result<Geometry> {
        let g = Self::new_unchecked(ground, flats);
        let report = g.check_axioms();
        if report.passes() {
            Ok(g)
        } else {
            Err(Error::Axiom(Box::new(report)))
        }
    }

    /// Sorts and deduplicates the flats without checking any axiom.
    pub fn new_unchecked(ground: Poset, mut flats: Vec<Subset>) -> Geometry {
        let n = ground.len();
        for f in &mut flats {
            if f.len() != n && f.ones().all(|u| u < n) {
                *f = subset_of(n, f.ones());
            }
        }
        sort_flats(&mut flats);
        Geometry { ground, flats }
    }

    pub fn ground(&self) -> &Poset {
        &self.ground
    }

    pub fn flats(&self) -> &[Subset] {
        &self.flats
    }

    pub fn flat_index(&self, x: &Subset) -> Option<usize> {
        self.flats.binary_search_by(|f| flat_cmp(f, x)).ok()
    }

    pub fn is_flat(&self, x: &Subset) -> bool {
        self.flat_index(x).is_some()
    }

    fn full(&self) -> Subset {
        let n = self.ground.len();
        subset_of(n, 0..n)
    }

    /// Smallest flat containing `x`: the intersection of all flats `Y ⊇ x`.
    pub fn closure(&self, x: &Subset) -> Subset {
        let mut out = self.full();
        for f in &self.flats {
            if x.is_subset(f) {
                out.intersect_with(f);
            }
        }
        out
    }

    /// The flats ordered by inclusion; element `i` is `flats()[i]`.
    pub fn inclusion_order(&self) -> Poset {
        let m = self.flats.len();
        let down = (0..m)
            .map(|j| subset_of(m, (0..m).filter(|&i| self.flats[i].is_subset(&self.flats[j]))))
            .collect();
        Poset::from_down_rows(down)
    }

    pub fn check_axioms(&self) -> AxiomReport {
        let n = self.ground.len();
        let p = &self.ground;

        let finite_length = self
            .flats
            .iter()
            .find(|f| f.ones().any(|u| u >= n))
            .map(|f| Violation::OutsideGround { flat: members(f) });
        if finite_length.is_some() {
            return AxiomReport {
                length: 0,
                finite_length,
                intersection: None,
                down_sets: None,
                principal: None,
                covering: None,
            };
        }
        let family = self.inclusion_order();
        let length = family.length();

        let mut intersection = None;
        if !self.is_flat(&self.full()) {
            intersection = Some(Violation::GroundMissing);
        } else {
            'outer: for (i, x) in self.flats.iter().enumerate() {
                for y in &self.flats[i + 1..] {
                    let mut meet = x.clone();
                    meet.intersect_with(y);
                    if !self.is_flat(&meet) {
                        intersection = Some(Violation::IntersectionMissing {
                            x: members(x),
                            y: members(y),
                        });
                        break 'outer;
                    }
                }
            }
        }

        let down_sets = self.flats.iter().find_map(|f| {
            f.ones().find_map(|u| {
                p.down_row(u)
                    .difference(f)
                    .next()
                    .map(|below| Violation::NotDownSet {
                        flat: members(f),
                        element: u,
                        below,
                    })
            })
        });

        let principal = if !self.is_flat(&Subset::with_capacity(n)) {
            Some(Violation::EmptyMissing)
        } else {
            (0..n).find_map(|u| {
                if !self.is_flat(p.down_row(u)) {
                    Some(Violation::PrincipalMissing { u })
                } else if !self.is_flat(&p.strict_down_set(u).unwrap()) {
                    Some(Violation::StrictPrincipalMissing { u })
                } else {
                    None
                }
            })
        };

        let mut covering = None;
        'cp: for (i, x) in self.flats.iter().enumerate() {
            for q in 0..n {
                if x.contains(q) || !p.strict_down_set(q).unwrap().is_subset(x) {
                    continue;
                }
                let covered = family
                    .upper_covers(i)
                    .iter()
                    .any(|&j| self.flats[j].contains(q));
                if !covered {
                    covering = Some(Violation::NoCover { q, x: members(x) });
                    break 'cp;
                }
            }
        }

        AxiomReport {
            length,
            finite_length,
            intersection,
            down_sets,
            principal,
            covering,
        }
    }

    /// The `u` with `u ∉ x`, `↓u \ {u} ⊆ x` and `z = cl({u} ∪ x)`, if any.
    pub fn cover_witness(&self, x: &Subset, z: &Subset) -> Option<usize> {
        (0..self.ground.len()).find(|&u| {
            if x.contains(u) || !self.ground.strict_down_set(u).unwrap().is_subset(x) {
                return false;
            }
            let mut ux = x.clone();
            ux.insert(u);
            &self.closure(&ux) == z
        })
    }

    /// Whether `z` covers `x`, decided through a cover witness.
    pub fn geometry_covers(&self, x: &Subset, z: &Subset) -> bool {
        self.cover_witness(x, z).is_some()
    }
}

/// `Jir L ∩ ↓x` as a subset of Jir positions.
pub fn lattice_flat(l: &FiniteLattice, jir: &JirPoset, x: usize) -> Subset {
    subset_of(
        jir.len(),
        (0..jir.len()).filter(|&p| l.leq(jir.elements[p], x)),
    )
}

/// The geometry of a semimodular lattice: its Jir poset with the flats
/// `Jir L ∩ ↓x`.
pub fn geom_of_lattice(l: &FiniteLattice) -> Result<Geometry> {
    if let Some((x, y)) = l.semimodularity_violation() {
        return Err(Error::NotSemimodular(format!(
            "{x} ∧ {y} is covered by {x} but {y} is not covered by {x} ∨ {y}"
        )));
    }
    let jir = l.join_irreducibles();
    let flats: Vec<Subset> = (0..l.len()).map(|x| lattice_flat(l, &jir, x)).collect();
    let g = Geometry::new_unchecked(jir.order.clone(), flats);
    if g.flats.len() != l.len() {
        return Err(Error::Verification(format!(
            "{} flats for {} lattice elements",
            g.flats.len(),
            l.len()
        )));
    }
    let report = g.check_axioms();
    if !report.passes() {
        return Err(Error::Verification(format!("Geom(L) fails: {report}")));
    }
    Ok(g)
}

/// The lattice of flats ordered by inclusion; element `i` is `flats()[i]`.
pub fn lat_of_geometry(g: &Geometry) -> Result<FiniteLattice> {
    let report = g.check_axioms();
    if !report.passes() {
        return Err(Error::Axiom(Box::new(report)));
    }
    let l = FiniteLattice::from_poset(g.inclusion_order())?;
    let m = g.flats.len();
    for i in 0..m {
        for j in i..m {
            let mut meet = g.flats[i].clone();
            meet.intersect_with(&g.flats[j]);
            if g.flat_index(&meet) != Some(l.meet(i, j)) {
                return Err(Error::Verification(format!(
                    "meet of flats {i}, {j} is not their intersection"
                )));
            }
            let mut union = g.flats[i].clone();
            union.union_with(&g.flats[j]);
            if g.flat_index(&g.closure(&union)) != Some(l.join(i, j)) {
                return Err(Error::Verification(format!(
                    "join of flats {i}, {j} is not the closure of their union"
                )));
            }
        }
    }
    if let Some((x, y)) = l.semimodularity_violation() {
        return Err(Error::Verification(format!(
            "lattice of flats is not semimodular at ({x}, {y})"
        )));
    }
    Ok(l)
}

/// Verifies `x ↦ Jir L ∩ ↓x` is an isomorphism `L → Lat(Geom L)` and returns
/// it as an index map.
pub fn roundtrip_lattice(l: &FiniteLattice) -> Result<Vec<usize>> {
    let g = geom_of_lattice(l)?;
    let k = lat_of_geometry(&g)?;
    let jir = l.join_irreducibles();
    let mut map = Vec::with_capacity(l.len());
    for x in 0..l.len() {
        let idx = g
            .flat_index(&lattice_flat(l, &jir, x))
            .ok_or_else(|| Error::Verification(format!("image of {x} is not a flat")))?;
        map.push(idx);
    }
    let mut seen = Subset::with_capacity(k.len());
    for (x, &fx) in map.iter().enumerate() {
        if seen.put(fx) {
            return Err(Error::Verification(format!("{x} shares its image {fx}")));
        }
    }
    if map.len() != k.len() {
        return Err(Error::Verification("canonical map is not onto".into()));
    }
    for x in 0..l.len() {
        for y in 0..l.len() {
            if l.leq(x, y) != k.leq(map[x], map[y]) {
                return Err(Error::Verification(format!(
                    "order between {x} and {y} is not preserved"
                )));
            }
        }
    }
    Ok(map)
}

/// Verifies `u ↦ ↓u` induces an isomorphism `G → Geom(Lat G)`; returns the
/// ground map into Jir positions of `Lat G`.
pub fn roundtrip_geometry(g: &Geometry) -> Result<Vec<usize>> {
    let k = lat_of_geometry(g)?;
    let g2 = geom_of_lattice(&k)?;
    let jir = k.join_irreducibles();
    let n = g.ground.len();
    let mut map = Vec::with_capacity(n);
    for u in 0..n {
        let principal = g
            .flat_index(g.ground.down_row(u))
            .ok_or_else(|| Error::Verification(format!("↓{u} is not a flat")))?;
        let pos = jir.position(principal).ok_or_else(|| {
            Error::Verification(format!("↓{u} is not join-irreducible in Lat G"))
        })?;
        map.push(pos);
    }
    if jir.len() != n {
        return Err(Error::Verification(format!(
            "{} ground elements but {} join-irreducible flats",
            n,
            jir.len()
        )));
    }
    let mut seen = Subset::with_capacity(n);
    for (u, &gu) in map.iter().enumerate() {
        if seen.put(gu) {
            return Err(Error::Verification(format!("{u} shares its image {gu}")));
        }
    }
    for u in 0..n {
        for v in 0..n {
            if g.ground.leq(u, v) != g2.ground.leq(map[u], map[v]) {
                return Err(Error::Verification(format!(
                    "ground order between {u} and {v} is not preserved"
                )));
            }
        }
    }
    let mut images = Vec::with_capacity(g.flats.len());
    for x in &g.flats {
        let image = subset_of(n, x.ones().map(|y| map[y]));
        if !g2.is_flat(&image) {
            return Err(Error::Verification(format!(
                "image of flat {:?} is not a flat",
                members(x)
            )));
        }
        images.push(image);
    }
    sort_flats(&mut images);
    if images.len() != g2.flats.len() {
        return Err(Error::Verification("flat map is not a bijection".into()));
    }
    Ok(map)
}

/// The join-irreducible flats, checked to be exactly the principal down-sets
/// `↓u`.
pub fn jir_of_geometry(g: &Geometry) -> Result<Vec<Subset>> {
    let k = lat_of_geometry(g)?;
    let jir = k.join_irreducibles();
    let from_lattice: Vec<Subset> = jir.elements.iter().map(|&i| g.flats[i].clone()).collect();
    let mut principal: Vec<Subset> = (0..g.ground.len())
        .map(|u| g.ground.down_row(u).clone())
        .collect();
    sort_flats(&mut principal);
    let mut sorted = from_lattice;
    sort_flats(&mut sorted);
    if sorted != principal {
        return Err(Error::Verification(
            "join-irreducible flats differ from the principal down-sets".into(),
        ));
    }
    Ok(sorted)
}
