//! Standard small lattices used as fixtures and corpus seeds.

use crate::lattice::FiniteLattice;
use crate::poset::Poset;

fn build(n: usize, covers: &[(usize, usize)]) -> FiniteLattice {
    let p = Poset::from_covers(n, covers).expect("family orders are acyclic");
    FiniteLattice::from_poset(p).expect("family members are lattices")
}

/// The chain `C_len`: `len + 1` elements `0 < 1 < ... < len`.
pub fn chain(len: usize) -> FiniteLattice {
    FiniteLattice::from_poset(Poset::chain(len + 1)).expect("chains are lattices")
}

/// The Boolean lattice `B_n`; element `i` is the subset with bitmask `i`.
pub fn boolean(n: usize) -> FiniteLattice {
    let size = 1usize << n;
    let mut covers = Vec::new();
    for x in 0..size {
        for bit in 0..n {
            if x & (1 << bit) == 0 {
                covers.push((x, x | (1 << bit)));
            }
        }
    }
    build(size, &covers)
}

/// `M_k`: bottom `0`, atoms `1..=k`, top `k + 1`.
pub fn m_k(k: usize) -> FiniteLattice {
    let top = k + 1;
    let covers: Vec<_> = (1..=k).flat_map(|a| [(0, a), (a, top)]).collect();
    build(k + 2, &covers)
}

/// The pentagon: `0 < 1 < 2 < 4` and `0 < 3 < 4`.
pub fn n5() -> FiniteLattice {
    build(5, &[(0, 1), (1, 2), (2, 4), (0, 3), (3, 4)])
}

/// Direct product; element `(i, j)` has index `i * b.len() + j`.
pub fn product(a: &FiniteLattice, b: &FiniteLattice) -> FiniteLattice {
    let nb = b.len();
    let mut covers = Vec::new();
    for &(x, y) in a.order().covers() {
        for j in 0..nb {
            covers.push((x * nb + j, y * nb + j));
        }
    }
    for i in 0..a.len() {
        for &(x, y) in b.order().covers() {
            covers.push((i * nb + x, i * nb + y));
        }
    }
    build(a.len() * nb, &covers)
}

/// The `m × n` grid, i.e. the product of chains with `m` and `n` elements.
pub fn grid(m: usize, n: usize) -> FiniteLattice {
    product(&chain(m - 1), &chain(n - 1))
}

/// `M3` with a chain of `below` extra elements glued under it.
pub fn m3_over_chain(below: usize) -> FiniteLattice {
    let mut covers: Vec<(usize, usize)> = (0..below).map(|i| (i, i + 1)).collect();
    let o = below;
    let top = o + 4;
    for a in o + 1..=o + 3 {
        covers.push((o, a));
        covers.push((a, top));
    }
    build(top + 1, &covers)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(chain(3).len(), 4);
        assert_eq!(boolean(3).len(), 8);
        assert_eq!(m_k(4).len(), 6);
        assert_eq!(grid(2, 3).len(), 6);
        assert_eq!(grid(3, 4).length(), 5);
        assert_eq!(m3_over_chain(1).len(), 6);
        assert!(m3_over_chain(1).is_modular());
    }
}
