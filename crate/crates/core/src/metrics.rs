//! Hausdorff–Pompeiu distance between finite point sets.
//!
//! `d(A, B) = max_{a in A} min_{b in B} |a - b|` and
//! `h(A, B) = max(d(A, B), d(B, A))`.
//!
//! Two exact evaluators are provided: a brute-force double loop and a
//! bucketed search over a uniform grid built on the target set. Bucketing
//! only skips cells that provably hold no closer point, so both evaluators
//! return the same values and the same witnesses (ties go to the lowest
//! index on both sides).

use rayon::prelude::*;

use crate::error::MetricError;
use crate::pointset::PointSet;

/// Sets larger than this are measured with the bucketed evaluator.
pub const BUCKET_THRESHOLD: usize = 10_000;

const MAX_CELLS: usize = 1 << 22;

/// One directed distance with the pair that attains it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Directed {
    pub distance: f64,
    /// Index of the farthest source point.
    pub from: usize,
    /// Index of its nearest target point.
    pub to: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceReport {
    /// `h(A, B)`
    pub h: f64,
    /// `d(A, B)`, witness indices into `A` then `B`.
    pub forward: Directed,
    /// `d(B, A)`, witness indices into `B` then `A`.
    pub backward: Directed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Auto,
    BruteForce,
    Bucketed,
}

fn check(a: &PointSet, b: &PointSet) -> Result<(), MetricError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptySet);
    }
    if a.dim() != b.dim() {
        return Err(MetricError::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

#[inline]
fn dist2(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum()
}

// (squared distance, source index, target index); larger distance wins,
// ties go to the lower source index.
type Cand = (f64, usize, usize);

fn farther(x: Cand, y: Cand) -> Cand {
    if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
        y
    } else {
        x
    }
}

fn finish(c: Cand) -> Directed {
    Directed { distance: c.0.sqrt(), from: c.1, to: c.2 }
}

fn nearest_brute(p: &[f64], target: &PointSet) -> (f64, usize) {
    let mut best = (f64::INFINITY, usize::MAX);
    for (j, q) in target.iter().enumerate() {
        let d = dist2(p, q);
        if d < best.0 {
            best = (d, j);
        }
    }
    best
}

fn directed_brute(a: &PointSet, b: &PointSet) -> Directed {
    let worst = (0..a.len())
        .into_par_iter()
        .map(|i| {
            let (d, j) = nearest_brute(a.point(i), b);
            (d, i, j)
        })
        .reduce(|| (f64::NEG_INFINITY, usize::MAX, usize::MAX), farther);
    finish(worst)
}

/// Uniform grid of cubic cells over the bounding box of a point set.
struct Buckets<'a> {
    set: &'a PointSet,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cell: f64,
    counts: Vec<usize>,
    starts: Vec<u32>,
    members: Vec<u32>,
    slack: f64,
}

impl<'a> Buckets<'a> {
    fn new(set: &'a PointSet) -> Self {
        let dim = set.dim();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in set.iter() {
            for i in 0..dim {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        let extent = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0f64, f64::max);
        let per_axis = ((set.len() as f64 / 2.0).powf(1.0 / dim as f64).ceil() as usize).max(1);
        let mut cell = if extent > 0.0 { extent / per_axis as f64 } else { 1.0 };
        let mut counts: Vec<usize>;
        loop {
            counts = lo.iter().zip(&hi).map(|(l, h)| ((h - l) / cell).floor() as usize + 1).collect();
            let total = counts.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c));
            match total {
                Some(t) if t <= MAX_CELLS => break,
                _ => cell *= 2.0,
            }
        }
        let total: usize = counts.iter().product();
        let mut buckets = Buckets {
            set,
            lo,
            hi,
            cell,
            counts,
            starts: vec![0; total + 1],
            members: vec![0; set.len()],
            slack: 1e-12 * (extent + 1.0),
        };
        let ids: Vec<usize> = set.iter().map(|p| buckets.cell_of(p)).collect();
        for &c in &ids {
            buckets.starts[c + 1] += 1;
        }
        for c in 0..total {
            buckets.starts[c + 1] += buckets.starts[c];
        }
        let mut fill = buckets.starts.clone();
        for (j, &c) in ids.iter().enumerate() {
            buckets.members[fill[c] as usize] = j as u32;
            fill[c] += 1;
        }
        buckets
    }

    #[inline]
    fn axis_cell(&self, i: usize, x: f64) -> usize {
        let c = ((x - self.lo[i]) / self.cell).floor();
        if c <= 0.0 {
            0
        } else {
            (c as usize).min(self.counts[i] - 1)
        }
    }

    fn cell_of(&self, p: &[f64]) -> usize {
        (0..p.len()).fold(0, |acc, i| acc * self.counts[i] + self.axis_cell(i, p[i]))
    }

    /// Squared distance and lowest index of the nearest member to `p`.
    fn nearest(&self, p: &[f64], scratch: &mut Scratch) -> (f64, usize) {
        let dim = p.len();
        // Projection onto the bounding box; distances from it to cells bound
        // distances from p (the projection is non-expansive).
        for i in 0..dim {
            scratch.proj[i] = p[i].clamp(self.lo[i], self.hi[i]);
            scratch.center[i] = self.axis_cell(i, scratch.proj[i]);
        }
        let max_ring = self.counts.iter().copied().max().unwrap_or(1);
        let mut best = (f64::INFINITY, usize::MAX);
        for ring in 0..=max_ring {
            if ring >= 1 {
                let lb = (ring - 1) as f64 * self.cell;
                if lb > best.0.sqrt() + self.slack {
                    break;
                }
            }
            self.visit_ring(p, ring, scratch, &mut best);
        }
        best
    }

    fn visit_ring(&self, p: &[f64], ring: usize, scratch: &mut Scratch, best: &mut (f64, usize)) {
        let dim = p.len();
        for i in 0..dim {
            scratch.lo[i] = scratch.center[i].saturating_sub(ring);
            scratch.hi[i] = (scratch.center[i] + ring).min(self.counts[i] - 1);
        }
        scratch.cur.copy_from_slice(&scratch.lo);
        'cells: loop {
            let cheb = (0..dim).map(|i| scratch.cur[i].abs_diff(scratch.center[i])).max().unwrap_or(0);
            if cheb == ring {
                // Per-cell pruning on the box distance.
                let mut box_d2 = 0.0;
                for i in 0..dim {
                    let c_lo = self.lo[i] + scratch.cur[i] as f64 * self.cell;
                    let c_hi = c_lo + self.cell;
                    let gap = (c_lo - scratch.proj[i]).max(scratch.proj[i] - c_hi).max(0.0);
                    box_d2 += gap * gap;
                }
                if box_d2.sqrt() <= best.0.sqrt() + self.slack {
                    let id = (0..dim).fold(0, |acc, i| acc * self.counts[i] + scratch.cur[i]);
                    let (s, e) = (self.starts[id] as usize, self.starts[id + 1] as usize);
                    for &j in &self.members[s..e] {
                        let j = j as usize;
                        let d = dist2(p, self.set.point(j));
                        if d < best.0 || (d == best.0 && j < best.1) {
                            *best = (d, j);
                        }
                    }
                }
            }
            for i in (0..dim).rev() {
                if scratch.cur[i] < scratch.hi[i] {
                    scratch.cur[i] += 1;
                    continue 'cells;
                }
                scratch.cur[i] = scratch.lo[i];
            }
            break;
        }
    }
}

struct Scratch {
    proj: Vec<f64>,
    center: Vec<usize>,
    lo: Vec<usize>,
    hi: Vec<usize>,
    cur: Vec<usize>,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        Scratch {
            proj: vec![0.0; dim],
            center: vec![0; dim],
            lo: vec![0; dim],
            hi: vec![0; dim],
            cur: vec![0; dim],
        }
    }
}

fn directed_bucketed(a: &PointSet, b: &PointSet) -> Directed {
    let buckets = Buckets::new(b);
    let dim = a.dim();
    let worst = (0..a.len())
        .into_par_iter()
        .map_init(
            || Scratch::new(dim),
            |scratch, i| {
                let (d, j) = buckets.nearest(a.point(i), scratch);
                (d, i, j)
            },
        )
        .reduce(|| (f64::NEG_INFINITY, usize::MAX, usize::MAX), farther);
    finish(worst)
}

fn directed_with(a: &PointSet, b: &PointSet, method: Method) -> Directed {
    let bucket = match method {
        Method::BruteForce => false,
        Method::Bucketed => true,
        Method::Auto => a.len().max(b.len()) > BUCKET_THRESHOLD,
    };
    if bucket {
        directed_bucketed(a, b)
    } else {
        directed_brute(a, b)
    }
}

/// `d(A, B) = sup_{a in A} d(a, B)`.
pub fn directed_distance(a: &PointSet, b: &PointSet) -> Result<f64, MetricError> {
    check(a, b)?;
    Ok(directed_with(a, b, Method::Auto).distance)
}

/// `h(A, B)` with witnesses for both directions.
pub fn hausdorff(a: &PointSet, b: &PointSet) -> Result<DistanceReport, MetricError> {
    hausdorff_with(a, b, Method::Auto)
}

pub fn hausdorff_with(a: &PointSet, b: &PointSet, method: Method) -> Result<DistanceReport, MetricError> {
    check(a, b)?;
    let forward = directed_with(a, b, method);
    let backward = directed_with(b, a, method);
    Ok(DistanceReport { h: forward.distance.max(backward.distance), forward, backward })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set1(v: &[f64]) -> PointSet {
        PointSet::new(1, 1.0, v.to_vec()).unwrap()
    }

    #[test]
    fn asymmetric_directed() {
        let a = set1(&[0.0]);
        let b = set1(&[0.0, 1.0]);
        assert_eq!(directed_distance(&a, &b).unwrap(), 0.0);
        assert_eq!(directed_distance(&b, &a).unwrap(), 1.0);
        let r = hausdorff(&a, &b).unwrap();
        assert_eq!(r.h, 1.0);
        assert_eq!(r.backward, Directed { distance: 1.0, from: 1, to: 0 });
    }

    #[test]
    fn identity_and_points() {
        let a = set1(&[0.2, 0.5, 0.9]);
        assert_eq!(hausdorff(&a, &a).unwrap().h, 0.0);
        assert_eq!(hausdorff(&set1(&[0.0]), &set1(&[1.0])).unwrap().h, 1.0);
    }

    #[test]
    fn opposite_corners_span_the_diameter() {
        let a = PointSet::single(1.0, &[0.0, 0.0]).unwrap();
        let b = PointSet::single(1.0, &[1.0, 1.0]).unwrap();
        assert_eq!(hausdorff(&a, &b).unwrap().h, 2f64.sqrt());
    }

    #[test]
    fn errors() {
        let empty = PointSet::new(1, 1.0, vec![]).unwrap();
        assert_eq!(hausdorff(&empty, &set1(&[0.5])).unwrap_err(), MetricError::EmptySet);
        let two = PointSet::single(1.0, &[0.5, 0.5]).unwrap();
        assert_eq!(
            hausdorff(&two, &set1(&[0.5])).unwrap_err(),
            MetricError::DimensionMismatch(2, 1)
        );
    }

    #[test]
    fn bucketed_handles_degenerate_boxes() {
        // All target points on one line, queries off the line and outside the box.
        let b = PointSet::new(2, 1.0, (0..50).flat_map(|i| [i as f64 / 49.0, 0.5]).collect()).unwrap();
        let a = PointSet::new(2, 1.0, vec![0.0, 0.0, 1.0, 1.0, 0.3, 0.5, 0.77, 0.9]).unwrap();
        let brute = hausdorff_with(&a, &b, Method::BruteForce).unwrap();
        let fast = hausdorff_with(&a, &b, Method::Bucketed).unwrap();
        assert_eq!(brute, fast);
        let single = PointSet::single(1.0, &[0.25, 0.25]).unwrap();
        assert_eq!(
            hausdorff_with(&a, &single, Method::BruteForce).unwrap(),
            hausdorff_with(&a, &single, Method::Bucketed).unwrap()
        );
    }
}
