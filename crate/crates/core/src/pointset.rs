//! Finite point sets in the cube `[0, D]^M`.
//!
//! Sets are kept in canonical form: duplicates removed and points sorted
//! lexicographically by coordinate. Two sets compare equal exactly when
//! they contain the same points, regardless of how they were produced.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::SystemError;

/// Regular lattice `{ g * D / n : g = 0..=n }` along each axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice {
    n: u32,
    side: f64,
}

impl Lattice {
    pub fn new(n: u32, side: f64) -> Result<Self, SystemError> {
        if n == 0 {
            return Err(SystemError::LatticeIndex { index: 0, n: 0 });
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(SystemError::InvalidSide(side));
        }
        Ok(Lattice { n, side })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    /// Spacing `D / n`.
    pub fn spacing(&self) -> f64 {
        self.side / self.n as f64
    }

    /// Coordinate of index `g`. Index `n` maps to `D` exactly.
    #[inline]
    pub fn coord(&self, g: u32) -> f64 {
        if g >= self.n {
            self.side
        } else {
            (g as f64 * self.side) / self.n as f64
        }
    }

    /// Largest index whose coordinate does not exceed `v`, clamped to `0..=n`.
    ///
    /// The result is consistent with [`Lattice::coord`]: `coord(g) <= v <
    /// coord(g + 1)` whenever `v` lies inside the cube.
    #[inline]
    pub fn floor_index(&self, v: f64) -> u32 {
        if !(v > 0.0) {
            return 0;
        }
        if v >= self.side {
            return self.n;
        }
        let mut g = ((v * self.n as f64) / self.side).floor();
        if g < 0.0 {
            g = 0.0;
        }
        let mut g = (g as u64).min(self.n as u64) as u32;
        // One-step corrections for rounding in the scaled product.
        while g > 0 && self.coord(g) > v {
            g -= 1;
        }
        while g < self.n && self.coord(g + 1) <= v {
            g += 1;
        }
        g
    }

    /// Index of the nearest lattice coordinate, ties resolved upward.
    #[inline]
    pub fn round_index(&self, v: f64) -> u32 {
        let g = self.floor_index(v);
        if g >= self.n {
            return g;
        }
        let below = v - self.coord(g);
        let above = self.coord(g + 1) - v;
        if above <= below {
            g + 1
        } else {
            g
        }
    }

    /// Number of lattice points in dimension `dim`, if it fits in a `u64`.
    pub fn cell_count(&self, dim: usize) -> Option<u64> {
        let base = self.n as u64 + 1;
        (0..dim).try_fold(1u64, |acc, _| acc.checked_mul(base))
    }

    /// Mixed-radix index with the first coordinate most significant, so that
    /// sorting linear indices gives the canonical point order. Callers must
    /// check `cell_count` first.
    #[inline]
    pub fn linear_index(&self, g: &[u32]) -> u64 {
        let base = self.n as u64 + 1;
        g.iter().fold(0u64, |acc, &gi| acc * base + gi as u64)
    }

    #[inline]
    pub fn unlinear(&self, mut idx: u64, out: &mut [u32]) {
        let base = self.n as u64 + 1;
        for o in out.iter_mut().rev() {
            *o = (idx % base) as u32;
            idx /= base;
        }
    }
}

/// A finite subset of `[0, D]^M`, optionally known to lie on a lattice.
#[derive(Clone, Debug)]
pub struct PointSet {
    dim: usize,
    side: f64,
    coords: Vec<f64>,
    lattice: Option<(Lattice, Vec<u32>)>,
}

impl PartialEq for PointSet {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.coords.len() == other.coords.len()
            && self.coords.iter().zip(&other.coords).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

fn check_side(side: f64) -> Result<(), SystemError> {
    if side.is_finite() && side > 0.0 {
        Ok(())
    } else {
        Err(SystemError::InvalidSide(side))
    }
}

impl PointSet {
    /// Builds a set from flat coordinates (`dim` values per point).
    pub fn new(dim: usize, side: f64, mut coords: Vec<f64>) -> Result<Self, SystemError> {
        check_side(side)?;
        if dim == 0 || !coords.len().is_multiple_of(dim) {
            return Err(SystemError::DimensionMismatch(format!(
                "{} coordinates do not split into points of dimension {}",
                coords.len(),
                dim
            )));
        }
        for v in coords.iter_mut() {
            if !(*v >= 0.0 && *v <= side) {
                return Err(SystemError::PointOutsideCube { value: *v, side });
            }
            // -0.0 becomes +0.0 so bit patterns identify points.
            *v += 0.0;
        }
        Ok(Self::canonical_raw(dim, side, coords))
    }

    /// Builds a set from already-clamped, zero-normalized coordinates.
    pub(crate) fn canonical_raw(dim: usize, side: f64, coords: Vec<f64>) -> Self {
        let count = coords.len() / dim;
        let mut order: Vec<usize> = (0..count).collect();
        let point = |i: usize| &coords[i * dim..(i + 1) * dim];
        order.par_sort_unstable_by(|&a, &b| cmp_points(point(a), point(b)));
        let mut out = Vec::with_capacity(coords.len());
        let mut last: Option<usize> = None;
        for i in order {
            if let Some(prev) = last {
                if cmp_points(point(prev), point(i)) == Ordering::Equal {
                    continue;
                }
            }
            out.extend_from_slice(point(i));
            last = Some(i);
        }
        PointSet { dim, side, coords: out, lattice: None }
    }

    /// A one-point set.
    pub fn single(side: f64, point: &[f64]) -> Result<Self, SystemError> {
        Self::new(point.len(), side, point.to_vec())
    }

    /// The cube center `(D/2, ..., D/2)`.
    pub fn center(dim: usize, side: f64) -> Result<Self, SystemError> {
        Self::new(dim, side, vec![side / 2.0; dim])
    }

    /// Builds a lattice set from flat index vectors (`dim` indices per point).
    pub fn from_lattice(dim: usize, lattice: Lattice, mut indices: Vec<u32>) -> Result<Self, SystemError> {
        if dim == 0 || !indices.len().is_multiple_of(dim) {
            return Err(SystemError::DimensionMismatch(format!(
                "{} indices do not split into points of dimension {}",
                indices.len(),
                dim
            )));
        }
        if let Some(&bad) = indices.iter().find(|&&g| g > lattice.n) {
            return Err(SystemError::LatticeIndex { index: bad as u64, n: lattice.n as u64 });
        }
        let count = indices.len() / dim;
        let mut order: Vec<usize> = (0..count).collect();
        let key = |i: usize| &indices[i * dim..(i + 1) * dim];
        order.par_sort_unstable_by(|&a, &b| key(a).cmp(key(b)));
        order.dedup_by(|a, b| key(*a) == key(*b));
        let sorted: Vec<u32> = order.iter().flat_map(|&i| key(i).iter().copied()).collect();
        indices.clear();
        Ok(Self::from_sorted_lattice(dim, lattice, sorted))
    }

    /// Lattice set from indices that are already sorted and unique.
    pub(crate) fn from_sorted_lattice(dim: usize, lattice: Lattice, indices: Vec<u32>) -> Self {
        let coords = indices.iter().map(|&g| lattice.coord(g)).collect();
        PointSet { dim, side: lattice.side, coords, lattice: Some((lattice, indices)) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cube side `D`.
    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    /// Flat coordinates in canonical order.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Lattice and flat index vectors, when the set is lattice-backed.
    pub fn lattice(&self) -> Option<(&Lattice, &[u32])> {
        self.lattice.as_ref().map(|(l, g)| (l, g.as_slice()))
    }

    pub fn is_lattice(&self) -> bool {
        self.lattice.is_some()
    }

    /// Drops the lattice tag, keeping the same points.
    pub fn into_raw(self) -> Self {
        PointSet { lattice: None, ..self }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        let count = self.len();
        let (mut lo, mut hi) = (0usize, count);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match cmp_points(self.point(mid), p) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return true,
            }
        }
        false
    }
}

#[inline]
fn cmp_points(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedups_and_sorts() {
        let s = PointSet::new(2, 1.0, vec![0.5, 0.5, 0.1, 0.9, 0.5, 0.5, -0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.point(0), &[0.0, 0.0]);
        assert_eq!(s.point(0)[0].to_bits(), 0.0f64.to_bits());
        assert!(s.contains(&[0.1, 0.9]));
        assert!(!s.contains(&[0.9, 0.1]));
    }

    #[test]
    fn rejects_points_outside_cube() {
        assert!(matches!(
            PointSet::new(1, 1.0, vec![1.5]),
            Err(SystemError::PointOutsideCube { .. })
        ));
        assert!(PointSet::new(1, 1.0, vec![f64::NAN]).is_err());
        assert!(PointSet::new(2, 1.0, vec![0.1]).is_err());
    }

    #[test]
    fn lattice_endpoint_is_exact() {
        for &(n, side) in &[(3u32, 0.1), (7, 1.0), (49, 2.5), (1, 3.0)] {
            let l = Lattice::new(n, side).unwrap();
            assert_eq!(l.coord(n), side);
            assert_eq!(l.floor_index(side), n);
            for g in 0..=n {
                assert_eq!(l.floor_index(l.coord(g)), g);
                assert_eq!(l.round_index(l.coord(g)), g);
            }
        }
    }

    #[test]
    fn floor_and_round_indices() {
        let l = Lattice::new(10, 1.0).unwrap();
        assert_eq!(l.floor_index(0.37), 3);
        assert_eq!(l.round_index(0.37), 4);
        assert_eq!(l.round_index(0.34), 3);
        assert_eq!(l.floor_index(0.0), 0);
    }

    #[test]
    fn lattice_set_roundtrip() {
        let l = Lattice::new(4, 1.0).unwrap();
        let s = PointSet::from_lattice(2, l, vec![4, 0, 1, 1, 4, 0]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.point(0), &[0.25, 0.25]);
        assert_eq!(s.point(1), &[1.0, 0.0]);
        assert!(PointSet::from_lattice(1, l, vec![5]).is_err());
        let mut g = [0u32; 2];
        l.unlinear(l.linear_index(&[3, 2]), &mut g);
        assert_eq!(g, [3, 2]);
        assert_eq!(l.cell_count(2), Some(25));
    }
}
