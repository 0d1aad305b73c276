//! Affine maps `f: (R^M)^p -> R^M` and their Lipschitz bounds.
//!
//! A map is stored as `p` coefficient blocks `A_1..A_p` (each `M x M`,
//! row-major) plus an offset `b`, and evaluates as
//! `f(u_1, ..., u_p) = A_1 u_1 + ... + A_p u_p + b`.
//!
//! The Lipschitz bound is taken with respect to the maximum metric on the
//! product space and the euclidean metric on the target:
//! `|f(u) - f(v)| <= (sum_j ||A_j||_2) * max_j |u_j - v_j|`.

use crate::error::SystemError;

/// Power iteration limits used for blocks larger than 2x2.
const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 10_000;

/// One constituent map of a generalized iterated function system.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    dim: usize,
    // p blocks, each dim*dim, row-major.
    blocks: Vec<Vec<f64>>,
    offset: Vec<f64>,
}

impl AffineMap {
    /// Builds a map from row-major `M x M` blocks and an offset of length `M`.
    pub fn new(blocks: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self, SystemError> {
        let dim = offset.len();
        if dim == 0 {
            return Err(SystemError::DimensionMismatch("offset must have length >= 1".into()));
        }
        if blocks.is_empty() {
            return Err(SystemError::DimensionMismatch("map needs at least one block".into()));
        }
        for (j, block) in blocks.iter().enumerate() {
            if block.len() != dim * dim {
                return Err(SystemError::DimensionMismatch(format!(
                    "block {} has {} coefficients, expected {}",
                    j + 1,
                    block.len(),
                    dim * dim
                )));
            }
        }
        if blocks.iter().flatten().chain(offset.iter()).any(|v| !v.is_finite()) {
            return Err(SystemError::NonFinite);
        }
        Ok(AffineMap { dim, blocks, offset })
    }

    /// Builds a map from nested rows: `blocks[j][r][c]`.
    pub fn from_rows(blocks: &[&[&[f64]]], offset: &[f64]) -> Result<Self, SystemError> {
        let flat = blocks
            .iter()
            .map(|rows| rows.iter().flat_map(|r| r.iter().copied()).collect())
            .collect();
        Self::new(flat, offset.to_vec())
    }

    /// A map ignoring its arguments.
    pub fn constant(order: usize, offset: Vec<f64>) -> Result<Self, SystemError> {
        let dim = offset.len();
        Self::new(vec![vec![0.0; dim * dim]; order], offset)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of arguments `p`.
    pub fn order(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, j: usize) -> &[f64] {
        &self.blocks[j]
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    /// Coefficient of input coordinate `c` of argument `j` in output row `r`.
    pub fn coeff(&self, j: usize, r: usize, c: usize) -> f64 {
        self.blocks[j][r * self.dim + c]
    }

    /// `A_j u` for a single argument, written into `out`.
    ///
    /// `apply` and the batched evaluators in `algorithms` share this routine
    /// so that every path produces bit-identical images.
    #[inline]
    pub(crate) fn block_product(&self, j: usize, u: &[f64], out: &mut [f64]) {
        let block = &self.blocks[j];
        for (r, o) in out.iter_mut().enumerate() {
            let row = &block[r * self.dim..(r + 1) * self.dim];
            let mut acc = 0.0;
            for (a, x) in row.iter().zip(u) {
                acc += a * x;
            }
            *o = acc;
        }
    }

    /// Evaluates `sum_j A_j args[j] + b`. No clamping is applied.
    pub fn apply(&self, args: &[&[f64]]) -> Result<Vec<f64>, SystemError> {
        if args.len() != self.order() {
            return Err(SystemError::DimensionMismatch(format!(
                "expected {} arguments, got {}",
                self.order(),
                args.len()
            )));
        }
        if let Some(bad) = args.iter().find(|a| a.len() != self.dim) {
            return Err(SystemError::DimensionMismatch(format!(
                "argument has dimension {}, expected {}",
                bad.len(),
                self.dim
            )));
        }
        let mut acc = vec![0.0; self.dim];
        let mut tmp = vec![0.0; self.dim];
        for (j, u) in args.iter().enumerate() {
            self.block_product(j, u, &mut tmp);
            for (a, t) in acc.iter_mut().zip(&tmp) {
                *a += t;
            }
        }
        for (a, b) in acc.iter_mut().zip(&self.offset) {
            *a += b;
        }
        Ok(acc)
    }

    /// Certified upper bound on the Lipschitz constant: `sum_j sigma_max(A_j)`.
    pub fn lip_bound(&self) -> f64 {
        self.blocks.iter().map(|b| spectral_norm(b, self.dim)).sum()
    }

    /// Interval image of `([0, side]^M)^p` per output coordinate, as `(lo, hi)`.
    pub fn interval_image(&self, side: f64) -> Vec<(f64, f64)> {
        (0..self.dim)
            .map(|r| {
                let mut lo = self.offset[r];
                let mut hi = self.offset[r];
                for block in &self.blocks {
                    for &a in &block[r * self.dim..(r + 1) * self.dim] {
                        if a < 0.0 {
                            lo += a * side;
                        } else {
                            hi += a * side;
                        }
                    }
                }
                (lo, hi)
            })
            .collect()
    }
}

/// Largest singular value of a row-major `n x n` matrix.
///
/// Closed form for `n <= 2`; power iteration on `A^T A` otherwise, inflated
/// by the final residual and capped by the Frobenius norm so the result
/// stays an upper bound.
pub fn spectral_norm(a: &[f64], n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    match n {
        0 => 0.0,
        1 => a[0].abs(),
        2 => {
            let (p, q, r, s) = (a[0], a[1], a[2], a[3]);
            let plus = (p + s).hypot(q - r);
            let minus = (p - s).hypot(q + r);
            0.5 * (plus + minus)
        }
        _ => power_iteration_norm(a, n),
    }
}

fn power_iteration_norm(a: &[f64], n: usize) -> f64 {
    let frobenius = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if frobenius == 0.0 {
        return 0.0;
    }
    // B = A^T A
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            b[i * n + j] = (0..n).map(|k| a[k * n + i] * a[k * n + j]).sum();
        }
    }
    // Deterministic start vector with no special alignment to coordinate axes.
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * (i as f64 + 1.0).sqrt()).collect();
    normalize(&mut x);
    let mut y = vec![0.0; n];
    let mut mu = 0.0;
    let mut residual = f64::INFINITY;
    for _ in 0..POWER_MAX_ITER {
        mat_vec(&b, &x, &mut y, n);
        let next_mu: f64 = x.iter().zip(&y).map(|(u, v)| u * v).sum();
        residual = x
            .iter()
            .zip(&y)
            .map(|(u, v)| (v - next_mu * u).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
        let converged = (next_mu - mu).abs() <= POWER_TOL * next_mu.abs();
        mu = next_mu;
        if converged && residual <= POWER_TOL * mu {
            break;
        }
    }
    (mu + residual).max(0.0).sqrt().min(frobenius)
}

fn mat_vec(b: &[f64], x: &[f64], y: &mut [f64], n: usize) {
    for (i, yi) in y.iter_mut().enumerate() {
        *yi = b[i * n..(i + 1) * n].iter().zip(x).map(|(p, q)| p * q).sum();
    }
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
}
