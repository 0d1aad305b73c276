//! Deterministic, grid, and sliding-window iteration of the fractal operator.
//!
//! Every step enumerates all `L * |K_1| * ... * |K_p|` map evaluations. The
//! enumeration is split into chunks that run in parallel; each chunk folds
//! its images into an order-independent accumulator (a sorted, deduplicated
//! point list, a lattice occupancy set, or running minima), so results are
//! identical to sequential evaluation.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use log::warn;
use rayon::prelude::*;

use crate::error::AlgoError;
use crate::pointset::{Lattice, PointSet};
use crate::schedule::GridSchedule;
use crate::system::{GifsSystem, RangePolicy};

/// Default cap on map evaluations per run.
pub const DEFAULT_TUPLE_BUDGET: u64 = 2_000_000_000;

/// Slack, relative to `D`, allowed on measured snapping gaps.
pub const GAP_SLACK: f64 = 1e-9;

const CHUNK: u64 = 1 << 14;
// Largest lattice tracked with a bitmap; bigger ones use hash sets.
const DENSE_CELLS: u64 = 1 << 22;

/// Rounding rule used when snapping images onto the lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SnapMode {
    /// `[u]`: largest lattice point not above `u` in every coordinate.
    Floor,
    /// `[u + 1/2]`: nearest lattice point.
    Round,
}

impl SnapMode {
    /// Worst-case snapping distance as a fraction of the cell diagonal.
    pub fn gap_factor(self) -> f64 {
        match self {
            SnapMode::Floor => 1.0,
            SnapMode::Round => 0.5,
        }
    }

    #[inline]
    fn index(self, lattice: &Lattice, v: f64) -> u32 {
        match self {
            SnapMode::Floor => lattice.floor_index(v),
            SnapMode::Round => lattice.round_index(v),
        }
    }
}

/// Lattice indices of `v` snapped with resolution `n` on `[0, side]`.
pub fn snap_indices(v: &[f64], lattice: &Lattice, mode: SnapMode) -> Vec<u32> {
    v.iter().map(|&x| mode.index(lattice, x)).collect()
}

/// `(D/n) [ (n/D) v ]` componentwise, or with `+ 1/2` inside the bracket in
/// [`SnapMode::Round`].
pub fn snap(v: &[f64], n: u32, side: f64, mode: SnapMode) -> Result<Vec<f64>, AlgoError> {
    let lattice = Lattice::new(n, side)?;
    Ok(v.iter().map(|&x| lattice.coord(mode.index(&lattice, x))).collect())
}

/// Output of one operator application.
#[derive(Clone, Debug)]
pub struct StepResult {
    pub points: PointSet,
    /// Map evaluations performed.
    pub tuples: u64,
    /// Images that landed outside the drift band and were clamped.
    pub clamped: u64,
}

/// Per-step statistics of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct StepStats {
    pub step: usize,
    /// Size of the set after this step (`x_k` or `|A~_k|`).
    pub points: usize,
    /// Map evaluations in this step.
    pub tuples: u64,
    /// Map evaluations up to and including this step (`y_k`).
    pub cumulative_tuples: u64,
    pub millis: f64,
    pub clamped: u64,
    /// Grid resolution `n_k`, for grid runs.
    pub resolution: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunStats {
    pub steps: Vec<StepStats>,
}

impl RunStats {
    pub fn total_tuples(&self) -> u64 {
        self.steps.last().map_or(0, |s| s.cumulative_tuples)
    }

    fn push(&mut self, step: usize, result: &StepResult, started: Instant, resolution: Option<u32>) {
        let cumulative = self.total_tuples() + result.tuples;
        self.steps.push(StepStats {
            step,
            points: result.points.len(),
            tuples: result.tuples,
            cumulative_tuples: cumulative,
            millis: started.elapsed().as_secs_f64() * 1e3,
            clamped: result.clamped,
            resolution,
        });
    }
}

/// Measured snapping gap for one grid step.
#[derive(Clone, Debug, PartialEq)]
pub struct GapCertificate {
    pub step: usize,
    pub resolution: u32,
    /// `eps_k = D sqrt(M) / n_k`
    pub eps: f64,
    /// `eps_k` for floor snapping, `eps_k / 2` for round snapping.
    pub bound: f64,
    /// `h(A~_k, G(A~_{k-1}))`, when verification ran.
    pub measured: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Complete,
    /// The tuple budget stopped the run; `points` holds the last completed step.
    BudgetExhausted { step: usize, needed: u128, remaining: u64 },
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub points: PointSet,
    pub stats: RunStats,
    pub certificates: Vec<GapCertificate>,
    pub status: RunStatus,
}

impl RunOutcome {
    pub fn is_partial(&self) -> bool {
        !matches!(self.status, RunStatus::Complete)
    }

    /// Number of operator applications completed.
    pub fn completed_steps(&self) -> usize {
        self.stats.steps.len()
    }
}

/// Precomputed block products `A_j u` for every map, argument slot, and point.
struct Evaluator<'a> {
    system: &'a GifsSystem,
    sizes: Vec<u64>,
    // partials[l][j] holds |K_j| * M values
    partials: Vec<Vec<Vec<f64>>>,
    tuples_per_map: u64,
}

impl<'a> Evaluator<'a> {
    fn new(system: &'a GifsSystem, args: &[&PointSet], budget: u64) -> Result<Self, AlgoError> {
        if args.len() != system.order() {
            return Err(AlgoError::Arity { expected: system.order(), got: args.len() });
        }
        for set in args {
            if set.is_empty() {
                return Err(AlgoError::EmptyInput);
            }
            if set.dim() != system.dim() {
                return Err(AlgoError::InvalidParameter(format!(
                    "point set has dimension {}, system has {}",
                    set.dim(),
                    system.dim()
                )));
            }
        }
        let sizes: Vec<u64> = args.iter().map(|s| s.len() as u64).collect();
        let per_map: u128 = sizes.iter().map(|&s| s as u128).product();
        let count = per_map * system.map_count() as u128;
        if count > budget as u128 {
            return Err(AlgoError::TupleBudgetExceeded { count, budget });
        }
        let dim = system.dim();
        let partials = system
            .maps()
            .iter()
            .map(|f| {
                args.iter()
                    .enumerate()
                    .map(|(j, set)| {
                        let mut out = vec![0.0; set.coords().len()];
                        for (u, o) in set.iter().zip(out.chunks_exact_mut(dim)) {
                            f.block_product(j, u, o);
                        }
                        out
                    })
                    .collect()
            })
            .collect();
        Ok(Evaluator { system, sizes, partials, tuples_per_map: per_map as u64 })
    }

    fn total(&self) -> u64 {
        self.tuples_per_map * self.system.map_count() as u64
    }

    /// Folds every clamped image into an accumulator; returns it with the
    /// number of far clamps.
    fn fold<A, I, F, R>(&self, init: I, visit: F, merge: R) -> (A, u64)
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(&mut A, &[f64]) + Sync + Send,
        R: Fn(A, A) -> A + Sync + Send,
    {
        let dim = self.system.dim();
        let order = self.sizes.len();
        let chunks = self.tuples_per_map.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .fold(
                || (init(), 0u64),
                |(mut acc, mut far), c| {
                    let start = c * CHUNK;
                    let end = (start + CHUNK).min(self.tuples_per_map);
                    // Odometer over argument indices; the last slot varies fastest.
                    let mut digits = vec![0usize; order];
                    let mut rest = start;
                    for j in (0..order).rev() {
                        digits[j] = (rest % self.sizes[j]) as usize;
                        rest /= self.sizes[j];
                    }
                    let mut img = vec![0.0; dim];
                    for _ in start..end {
                        for (l, f) in self.system.maps().iter().enumerate() {
                            img.iter_mut().for_each(|v| *v = 0.0);
                            for (j, &d) in digits.iter().enumerate() {
                                let part = &self.partials[l][j][d * dim..(d + 1) * dim];
                                for (v, p) in img.iter_mut().zip(part) {
                                    *v += p;
                                }
                            }
                            for (v, b) in img.iter_mut().zip(f.offset()) {
                                *v += b;
                            }
                            if self.system.clamp(&mut img) {
                                far += 1;
                            }
                            visit(&mut acc, &img);
                        }
                        for j in (0..order).rev() {
                            digits[j] += 1;
                            if (digits[j] as u64) < self.sizes[j] {
                                break;
                            }
                            digits[j] = 0;
                        }
                    }
                    (acc, far)
                },
            )
            .reduce(|| (init(), 0u64), |(a, fa), (b, fb)| (merge(a, b), fa + fb))
    }
}

fn report_drift(system: &GifsSystem, clamped: u64) {
    if clamped > 0 && system.policy() == RangePolicy::Strict {
        warn!("{clamped} images drifted outside the cube by more than 1e-9 and were clamped");
    }
}

/// `F(K_1, ..., K_p) = U_i f_i(K_1 x ... x K_p)`, deduplicated.
pub fn fractal_step(system: &GifsSystem, args: &[&PointSet], budget: u64) -> Result<StepResult, AlgoError> {
    let ev = Evaluator::new(system, args, budget)?;
    let (coords, clamped) = ev.fold(
        Vec::new,
        |acc: &mut Vec<f64>, img| acc.extend_from_slice(img),
        |mut a, mut b| {
            if a.len() < b.len() {
                std::mem::swap(&mut a, &mut b);
            }
            a.extend_from_slice(&b);
            a
        },
    );
    report_drift(system, clamped);
    let points = PointSet::canonical_raw(system.dim(), system.side(), coords);
    Ok(StepResult { points, tuples: ev.total(), clamped })
}

/// `G(K) = F(K, ..., K)`.
pub fn g_step(system: &GifsSystem, set: &PointSet, budget: u64) -> Result<StepResult, AlgoError> {
    let args = vec![set; system.order()];
    fractal_step(system, &args, budget)
}

enum Occupancy {
    Dense(Vec<u64>),
    Sparse(HashSet<u64>),
}

impl Occupancy {
    fn new(cells: u64) -> Self {
        if cells <= DENSE_CELLS {
            Occupancy::Dense(vec![0u64; cells.div_ceil(64) as usize])
        } else {
            Occupancy::Sparse(HashSet::new())
        }
    }

    #[inline]
    fn insert(&mut self, idx: u64) {
        match self {
            Occupancy::Dense(bits) => bits[(idx / 64) as usize] |= 1u64 << (idx % 64),
            Occupancy::Sparse(set) => {
                set.insert(idx);
            }
        }
    }

    fn merge(self, other: Self) -> Self {
        match (self, other) {
            (Occupancy::Dense(mut a), Occupancy::Dense(b)) => {
                a.iter_mut().zip(b).for_each(|(x, y)| *x |= y);
                Occupancy::Dense(a)
            }
            (Occupancy::Sparse(mut a), Occupancy::Sparse(mut b)) => {
                if a.len() < b.len() {
                    std::mem::swap(&mut a, &mut b);
                }
                a.extend(b);
                Occupancy::Sparse(a)
            }
            _ => unreachable!("occupancy kinds never mix within one step"),
        }
    }

    fn sorted(self) -> Vec<u64> {
        match self {
            Occupancy::Dense(bits) => {
                let mut out = Vec::new();
                for (w, &word) in bits.iter().enumerate() {
                    let mut word = word;
                    while word != 0 {
                        let b = word.trailing_zeros() as u64;
                        out.push(w as u64 * 64 + b);
                        word &= word - 1;
                    }
                }
                out
            }
            Occupancy::Sparse(set) => {
                let mut out: Vec<u64> = set.into_iter().collect();
                out.sort_unstable();
                out
            }
        }
    }
}

fn lattice_for(system: &GifsSystem, n: u32) -> Result<(Lattice, u64), AlgoError> {
    let lattice = Lattice::new(n, system.side())?;
    let cells = lattice
        .cell_count(system.dim())
        .ok_or(crate::error::SystemError::LatticeTooLarge { n: n as u64, dim: system.dim() })?;
    Ok((lattice, cells))
}

/// One grid-algorithm step: images of `G(prev)` snapped onto the lattice of
/// resolution `n`, deduplicated by lattice index.
pub fn grid_step(
    system: &GifsSystem,
    prev: &PointSet,
    n: u32,
    mode: SnapMode,
    budget: u64,
) -> Result<StepResult, AlgoError> {
    let (lattice, cells) = lattice_for(system, n)?;
    let args = vec![prev; system.order()];
    let ev = Evaluator::new(system, &args, budget)?;
    let dim = system.dim();
    let (occupied, clamped) = ev.fold(
        || Occupancy::new(cells),
        |acc, img| {
            let base = n as u64 + 1;
            let idx = img.iter().fold(0u64, |a, &x| a * base + mode.index(&lattice, x) as u64);
            acc.insert(idx);
        },
        Occupancy::merge,
    );
    report_drift(system, clamped);
    let linear = occupied.sorted();
    let mut indices = vec![0u32; linear.len() * dim];
    for (&idx, g) in linear.iter().zip(indices.chunks_exact_mut(dim)) {
        lattice.unlinear(idx, g);
    }
    let points = PointSet::from_sorted_lattice(dim, lattice, indices);
    Ok(StepResult { points, tuples: ev.total(), clamped })
}

/// Exact `h(snapped, G(prev))` where `snapped` lies on `lattice` and contains
/// the snap of every image in `G(prev)`.
///
/// Both directed distances are computed by streaming the images of
/// `G(prev)` once. Candidate lattice points are restricted to a box of
/// half-width `sqrt(M)` cells around each image; that box holds every
/// lattice point within one cell diagonal, which is where the nearest
/// neighbours must lie when the snapping contract holds. A lattice point
/// with no image inside the box reports an infinite gap.
pub fn snapping_gap(system: &GifsSystem, prev: &PointSet, snapped: &PointSet) -> Result<f64, AlgoError> {
    let (lattice, indices) = snapped.lattice().ok_or_else(|| {
        AlgoError::InvalidParameter("gap measurement needs a lattice-backed set".into())
    })?;
    let lattice = *lattice;
    let dim = system.dim();
    let n = lattice.n();
    let cells = lattice
        .cell_count(dim)
        .ok_or(crate::error::SystemError::LatticeTooLarge { n: n as u64, dim })?;
    let count = snapped.len();

    enum Lookup {
        Dense(Vec<u32>),
        Sparse(HashMap<u64, u32>),
    }
    let lookup = if cells <= DENSE_CELLS {
        let mut table = vec![u32::MAX; cells as usize];
        for (pos, g) in indices.chunks_exact(dim).enumerate() {
            table[lattice.linear_index(g) as usize] = pos as u32;
        }
        Lookup::Dense(table)
    } else {
        Lookup::Sparse(
            indices
                .chunks_exact(dim)
                .enumerate()
                .map(|(pos, g)| (lattice.linear_index(g), pos as u32))
                .collect(),
        )
    };
    let find = |idx: u64| -> Option<usize> {
        match &lookup {
            Lookup::Dense(t) => {
                let pos = t[idx as usize];
                (pos != u32::MAX).then_some(pos as usize)
            }
            Lookup::Sparse(m) => m.get(&idx).map(|&p| p as usize),
        }
    };

    let radius = (dim as f64).sqrt() * (1.0 + 1e-9) + 1e-9;
    let scale = n as f64 / lattice.side();
    let args = vec![prev; system.order()];
    let ev = Evaluator::new(system, &args, u64::MAX)?;
    struct GapAcc {
        // max over images of the squared distance to the nearest snapped point
        forward: f64,
        // per snapped point, squared distance to the nearest image
        best: Vec<f64>,
        lo: Vec<u32>,
        hi: Vec<u32>,
        cell: Vec<u32>,
    }
    let init = || GapAcc {
        forward: 0.0,
        best: vec![f64::INFINITY; count],
        lo: vec![0; dim],
        hi: vec![0; dim],
        cell: vec![0; dim],
    };
    let (acc, _) = ev.fold(
        init,
        |acc, img| {
            for i in 0..dim {
                let u = img[i] * scale;
                acc.lo[i] = (u - radius).ceil().max(0.0) as u32;
                acc.hi[i] = ((u + radius).floor().max(0.0) as u32).min(n);
            }
            acc.cell.copy_from_slice(&acc.lo);
            let mut nearest = f64::INFINITY;
            'cells: loop {
                if let Some(pos) = find(lattice.linear_index(&acc.cell)) {
                    let d2: f64 = snapped
                        .point(pos)
                        .iter()
                        .zip(img)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    nearest = nearest.min(d2);
                    if d2 < acc.best[pos] {
                        acc.best[pos] = d2;
                    }
                }
                for i in (0..dim).rev() {
                    if acc.cell[i] < acc.hi[i] {
                        acc.cell[i] += 1;
                        continue 'cells;
                    }
                    acc.cell[i] = acc.lo[i];
                }
                break;
            }
            if nearest > acc.forward {
                acc.forward = nearest;
            }
        },
        |mut a, b| {
            a.best.iter_mut().zip(b.best).for_each(|(x, y)| *x = x.min(y));
            a.forward = a.forward.max(b.forward);
            a
        },
    );
    let forward = acc.forward;
    let backward = acc.best.into_iter().fold(0.0f64, f64::max);
    Ok(forward.max(backward).sqrt())
}

fn check_start(system: &GifsSystem, start: &PointSet) -> Result<(), AlgoError> {
    if start.is_empty() {
        return Err(AlgoError::EmptyInput);
    }
    if start.dim() != system.dim() || start.side() != system.side() {
        return Err(AlgoError::InvalidParameter(format!(
            "start set lives in [0,{}]^{}, system in [0,{}]^{}",
            start.side(),
            start.dim(),
            system.side(),
            system.dim()
        )));
    }
    Ok(())
}

fn budget_stop(step: usize, err: AlgoError) -> Result<RunStatus, AlgoError> {
    match err {
        AlgoError::TupleBudgetExceeded { count, budget } => {
            Ok(RunStatus::BudgetExhausted { step, needed: count, remaining: budget })
        }
        other => Err(other),
    }
}

/// Applies `G` to `start` `steps` times.
pub fn deterministic_run(
    system: &GifsSystem,
    start: &PointSet,
    steps: usize,
    budget: u64,
) -> Result<RunOutcome, AlgoError> {
    check_start(system, start)?;
    let mut current = start.clone();
    let mut stats = RunStats::default();
    let mut status = RunStatus::Complete;
    for step in 1..=steps {
        let started = Instant::now();
        let remaining = budget - stats.total_tuples();
        match g_step(system, &current, remaining) {
            Ok(result) => {
                stats.push(step, &result, started, None);
                current = result.points;
            }
            Err(e) => {
                status = budget_stop(step, e)?;
                break;
            }
        }
    }
    Ok(RunOutcome { points: current, stats, certificates: Vec::new(), status })
}

/// Runs the grid algorithm over `schedule`, one step per resolution.
///
/// With `verify`, every step also measures `h(A~_k, G(A~_{k-1}))` exactly and
/// fails with [`AlgoError::VerificationFailure`] if it exceeds the snapping
/// bound by more than `1e-9 * D`.
pub fn grid_run(
    system: &GifsSystem,
    start: &PointSet,
    schedule: &GridSchedule,
    mode: SnapMode,
    budget: u64,
    verify: bool,
) -> Result<RunOutcome, AlgoError> {
    check_start(system, start)?;
    let diameter = system.diameter();
    let mut current = start.clone();
    let mut stats = RunStats::default();
    let mut certificates = Vec::new();
    let mut status = RunStatus::Complete;
    for (k, &n) in schedule.resolutions().iter().enumerate() {
        let step = k + 1;
        let started = Instant::now();
        let remaining = budget - stats.total_tuples();
        let result = match grid_step(system, &current, n, mode, remaining) {
            Ok(r) => r,
            Err(e) => {
                status = budget_stop(step, e)?;
                break;
            }
        };
        stats.push(step, &result, started, Some(n));
        let eps = diameter / n as f64;
        let bound = eps * mode.gap_factor();
        let measured = if verify {
            let gap = snapping_gap(system, &current, &result.points)?;
            if gap > bound + GAP_SLACK * system.side() {
                return Err(AlgoError::VerificationFailure { step, measured: gap, bound });
            }
            Some(gap)
        } else {
            None
        };
        certificates.push(GapCertificate { step, resolution: n, eps, bound, measured });
        current = result.points;
    }
    Ok(RunOutcome { points: current, stats, certificates, status })
}

/// Sliding-window recurrence `K_{j+p} = F(K_j, ..., K_{j+p-1})` started from
/// `seeds = (K_1, ..., K_p)`; returns `K_{p+steps}`.
pub fn memory_p_run(
    system: &GifsSystem,
    seeds: &[PointSet],
    steps: usize,
    budget: u64,
) -> Result<RunOutcome, AlgoError> {
    if seeds.len() != system.order() {
        return Err(AlgoError::Arity { expected: system.order(), got: seeds.len() });
    }
    if steps == 0 {
        return Err(AlgoError::InvalidParameter("memory-p run needs at least one step".into()));
    }
    for s in seeds {
        check_start(system, s)?;
    }
    let mut window: Vec<PointSet> = seeds.to_vec();
    let mut stats = RunStats::default();
    let mut status = RunStatus::Complete;
    for step in 1..=steps {
        let started = Instant::now();
        let remaining = budget - stats.total_tuples();
        let args: Vec<&PointSet> = window.iter().collect();
        match fractal_step(system, &args, remaining) {
            Ok(result) => {
                stats.push(step, &result, started, None);
                window.remove(0);
                window.push(result.points);
            }
            Err(e) => {
                status = budget_stop(step, e)?;
                break;
            }
        }
    }
    let points = window.pop().expect("window holds p >= 1 sets");
    Ok(RunOutcome { points, stats, certificates: Vec::new(), status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::AffineMap;
    use crate::sysio::{builtin, Example};

    fn constant_system(offset: Vec<f64>) -> GifsSystem {
        let dim = offset.len();
        let f = AffineMap::constant(2, offset).unwrap();
        GifsSystem::new(vec![f], 1.0, 2, dim, RangePolicy::Strict).unwrap()
    }

    fn half_sum_system() -> GifsSystem {
        // (u1 + u2) / 2 scaled slightly so the bound stays below one.
        let f = AffineMap::new(vec![vec![0.49], vec![0.49]], vec![0.01]).unwrap();
        GifsSystem::new(vec![f], 1.0, 2, 1, RangePolicy::Strict).unwrap()
    }

    #[test]
    fn snap_examples() {
        assert_eq!(snap(&[0.37], 10, 1.0, SnapMode::Floor).unwrap(), vec![0.3]);
        assert_eq!(snap(&[0.37], 10, 1.0, SnapMode::Round).unwrap(), vec![0.4]);
        assert_eq!(snap(&[2.5], 7, 2.5, SnapMode::Floor).unwrap(), vec![2.5]);
        let l = Lattice::new(7, 2.5).unwrap();
        assert_eq!(snap_indices(&[2.5], &l, SnapMode::Floor), vec![7]);
    }

    #[test]
    fn constant_map_images() {
        let s = constant_system(vec![0.25, 0.75]);
        let k = PointSet::new(2, 1.0, vec![0.1, 0.2, 0.3, 0.4, 0.9, 0.9]).unwrap();
        let out = g_step(&s, &k, DEFAULT_TUPLE_BUDGET).unwrap();
        assert_eq!(out.points, PointSet::single(1.0, &[0.25, 0.75]).unwrap());
        assert_eq!(out.tuples, 9);
        let grid = grid_step(&s, &k, 3, SnapMode::Floor, DEFAULT_TUPLE_BUDGET).unwrap();
        assert_eq!(grid.points.coords(), &snap(&[0.25, 0.75], 3, 1.0, SnapMode::Floor).unwrap()[..]);
    }

    #[test]
    fn single_tuple_average() {
        let f = AffineMap::new(vec![vec![0.5], vec![0.5]], vec![0.0]).unwrap();
        // The averaging map has bound exactly one, so build through Project to
        // bypass nothing: it must still be rejected.
        assert!(GifsSystem::new(vec![f], 1.0, 2, 1, RangePolicy::Project).is_err());
        let s = half_sum_system();
        let a = PointSet::single(1.0, &[0.0]).unwrap();
        let b = PointSet::single(1.0, &[1.0]).unwrap();
        let out = fractal_step(&s, &[&a, &b], 10).unwrap();
        assert_eq!(out.points.coords(), &[0.5]);
    }

    #[test]
    fn example_a_origin_images() {
        let s = builtin(Example::A);
        let origin = PointSet::single(1.0, &[0.0, 0.0]).unwrap();
        let out = g_step(&s, &origin, 100).unwrap();
        let expected = PointSet::new(2, 1.0, vec![0.0, 0.0, 0.4, 0.0, 0.0, 0.04]).unwrap();
        assert_eq!(out.points, expected);
        let grid = grid_step(&s, &origin, 1, SnapMode::Floor, 100).unwrap();
        assert_eq!(grid.points.coords(), &[0.0, 0.0]);
    }

    #[test]
    fn counting_contract() {
        let s = builtin(Example::A);
        let k = PointSet::new(2, 1.0, vec![0.1, 0.1, 0.2, 0.3, 0.5, 0.5, 0.9, 0.0]).unwrap();
        let out = g_step(&s, &k, DEFAULT_TUPLE_BUDGET).unwrap();
        assert_eq!(out.tuples, 3 * 16);
    }

    #[test]
    fn budget_guard_trips() {
        let s = builtin(Example::A);
        let k = PointSet::center(2, 1.0).unwrap();
        let err = g_step(&s, &k, 2).unwrap_err();
        assert_eq!(err, AlgoError::TupleBudgetExceeded { count: 3, budget: 2 });
        let run = deterministic_run(&s, &k, 5, 40).unwrap();
        assert!(run.is_partial());
        assert_eq!(run.completed_steps(), 2);
        assert_eq!(run.stats.total_tuples(), 3 + 27);
        assert_eq!(run.status, RunStatus::BudgetExhausted { step: 3, needed: 3 * 27 * 27, remaining: 10 });
    }

    #[test]
    fn empty_and_arity_errors() {
        let s = builtin(Example::A);
        let k = PointSet::center(2, 1.0).unwrap();
        assert_eq!(fractal_step(&s, &[&k], 10).unwrap_err(), AlgoError::Arity { expected: 2, got: 1 });
        let empty = PointSet::new(2, 1.0, vec![]).unwrap();
        assert_eq!(g_step(&s, &empty, 10).unwrap_err(), AlgoError::EmptyInput);
        assert!(memory_p_run(&s, &[k.clone(), k], 0, 10).is_err());
    }

    #[test]
    fn zero_steps_returns_start() {
        let s = builtin(Example::A);
        let k = PointSet::center(2, 1.0).unwrap();
        let run = deterministic_run(&s, &k, 0, 10).unwrap();
        assert_eq!(run.points, k);
        assert!(run.stats.steps.is_empty());
    }

    #[test]
    fn two_applications_count() {
        let s = builtin(Example::A);
        let k = PointSet::center(2, 1.0).unwrap();
        let run = deterministic_run(&s, &k, 2, DEFAULT_TUPLE_BUDGET).unwrap();
        assert_eq!(run.stats.steps[0].tuples, 3);
        assert_eq!(run.stats.steps[1].tuples, 27);
    }

    #[test]
    fn single_resolution_lands_on_corners() {
        for ex in [Example::A, Example::B, Example::C] {
            let s = builtin(ex);
            let k = PointSet::center(2, 1.0).unwrap();
            let sched = GridSchedule::custom(vec![1], 1.0, 2).unwrap();
            let run = grid_run(&s, &k, &sched, SnapMode::Floor, DEFAULT_TUPLE_BUDGET, true).unwrap();
            assert!(run.points.iter().all(|p| p.iter().all(|&x| x == 0.0 || x == 1.0)));
        }
    }

    #[test]
    fn memory_window_with_equal_seeds_matches_g_step() {
        let s = builtin(Example::B);
        let k = PointSet::new(2, 1.0, vec![0.2, 0.3, 0.6, 0.1]).unwrap();
        let run = memory_p_run(&s, &[k.clone(), k.clone()], 1, DEFAULT_TUPLE_BUDGET).unwrap();
        assert_eq!(run.points, g_step(&s, &k, DEFAULT_TUPLE_BUDGET).unwrap().points);
    }

    #[test]
    fn memory_window_constant_map_stabilizes() {
        let s = constant_system(vec![0.5, 0.25]);
        let a = PointSet::single(1.0, &[0.0, 0.0]).unwrap();
        let b = PointSet::single(1.0, &[1.0, 1.0]).unwrap();
        for steps in 1..4 {
            let run = memory_p_run(&s, &[a.clone(), b.clone()], steps, 100).unwrap();
            assert_eq!(run.points.coords(), &[0.5, 0.25]);
        }
    }

    #[test]
    fn gap_of_constant_map_is_snap_distance() {
        let s = constant_system(vec![0.37, 0.37]);
        let k = PointSet::center(2, 1.0).unwrap();
        let g = grid_step(&s, &k, 10, SnapMode::Floor, 100).unwrap();
        let gap = snapping_gap(&s, &k, &g.points).unwrap();
        let expected = ((0.37f64 - 0.3).powi(2) * 2.0).sqrt();
        assert!((gap - expected).abs() < 1e-15);
    }
}
