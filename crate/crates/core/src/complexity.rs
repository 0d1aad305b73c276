//! Point-count cost models for the deterministic and grid algorithms.
//!
//! The deterministic cost is a tower exponential, so everything here is
//! carried in natural-log scale and the deterministic cost additionally in
//! doubly-logarithmic form. Raw values are only materialized when their log
//! stays below [`MAX_LN_VALUE`].

use std::fmt::Write as _;

use crate::algorithms::g_step;
use crate::error::{AlgoError, CostError};
use crate::metrics::hausdorff;
use crate::pointset::PointSet;
use crate::system::GifsSystem;

/// Largest natural log for which a raw `f64` value is produced.
pub const MAX_LN_VALUE: f64 = 700.0;

/// Header of the ratio table CSV.
pub const RATIO_CSV_HEADER: &str = "eps,ln_cost_grid,ln_cost_det,ln_ratio";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostParams {
    /// Number of points in the initial set.
    pub x0: u64,
    /// Number of maps.
    pub maps: u64,
    pub order: usize,
    pub dim: usize,
    pub contraction: f64,
}

impl CostParams {
    pub fn new(x0: u64, maps: u64, order: usize, dim: usize, contraction: f64) -> Result<Self, CostError> {
        if x0 == 0 || maps == 0 || order == 0 || dim == 0 {
            return Err(CostError::InvalidParameter(
                "x0, map count, order and dimension must be positive".into(),
            ));
        }
        if !(contraction > 0.0 && contraction < 1.0) {
            return Err(CostError::InvalidParameter(format!(
                "contraction constant {contraction} must lie in (0, 1)"
            )));
        }
        Ok(CostParams { x0, maps, order, dim, contraction })
    }

    /// Parameters of a concrete system started from `x0` points.
    pub fn for_system(system: &GifsSystem, x0: u64) -> Result<Self, CostError> {
        Self::new(x0, system.map_count() as u64, system.order(), system.dim(), system.contraction())
    }

    pub fn beta(&self) -> usize {
        self.order * self.dim
    }

    fn require_tower(&self) -> Result<(), CostError> {
        if self.order < 2 {
            Err(CostError::UnsupportedOrder(self.order))
        } else {
            Ok(())
        }
    }

    /// `ln(x0 * L^(1/(p-1)))`, the log of the tower base.
    fn ln_base(&self) -> f64 {
        (self.x0 as f64).ln() + (self.maps as f64).ln() / (self.order - 1) as f64
    }
}

fn check_eps(eps: f64) -> Result<(), CostError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(CostError::InvalidParameter(format!("eps must be positive and finite, got {eps}")))
    }
}

fn materialize(ln_value: f64) -> Option<f64> {
    (ln_value < MAX_LN_VALUE).then(|| ln_value.exp())
}

/// Deterministic cost `base^(e)` with `e = (1/eps)^(ln p / ln(1/C))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeterministicCost {
    /// `ln(x0 * L^(1/(p-1)))`
    pub ln_base: f64,
    /// `ln e = ln(1/eps) * ln p / ln(1/C)`
    pub ln_exponent: f64,
    /// `ln C_c = e * ln_base`; infinite once `e` itself overflows.
    pub ln_value: f64,
}

impl DeterministicCost {
    /// `ln ln C_c`, finite whenever the base exceeds one.
    pub fn ln_ln_value(&self) -> f64 {
        self.ln_exponent + self.ln_base.ln()
    }

    pub fn value(&self) -> Option<f64> {
        materialize(self.ln_value)
    }
}

pub fn cost_deterministic(eps: f64, params: &CostParams) -> Result<DeterministicCost, CostError> {
    check_eps(eps)?;
    params.require_tower()?;
    let ln_base = params.ln_base();
    let ln_exponent = -eps.ln() * (params.order as f64).ln() / -params.contraction.ln();
    let ln_value = if ln_base == 0.0 { 0.0 } else { ln_exponent.exp() * ln_base };
    Ok(DeterministicCost { ln_base, ln_exponent, ln_value })
}

/// Grid cost `coefficient * (1/eps)^power`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridCost {
    /// `ln((1 - C^(beta/(beta+1)))^(-beta-1))`
    pub ln_coefficient: f64,
    /// `beta = p * M`
    pub power: usize,
    pub ln_value: f64,
}

impl GridCost {
    pub fn coefficient(&self) -> Option<f64> {
        materialize(self.ln_coefficient)
    }

    pub fn value(&self) -> Option<f64> {
        materialize(self.ln_value)
    }
}

pub fn cost_grid(eps: f64, params: &CostParams) -> Result<GridCost, CostError> {
    check_eps(eps)?;
    let beta = params.beta() as f64;
    let w = beta / (beta + 1.0);
    let ln_coefficient = -(beta + 1.0) * (-(w * params.contraction.ln()).exp_m1()).ln();
    let ln_value = ln_coefficient - beta * eps.ln();
    Ok(GridCost { ln_coefficient, power: params.beta(), ln_value })
}

/// Classical IFS cost `(1/eps)^(ln L / ln(1/C))`.
pub fn cost_ifs(eps: f64, maps: u64, contraction: f64) -> Result<f64, CostError> {
    check_eps(eps)?;
    if maps == 0 || !(contraction > 0.0 && contraction < 1.0) {
        return Err(CostError::InvalidParameter(format!(
            "need at least one map and C in (0, 1), got L = {maps}, C = {contraction}"
        )));
    }
    let exponent = (maps as f64).ln() / (1.0 / contraction).ln();
    Ok((1.0 / eps).powf(exponent))
}

/// Natural log of the closed-form bound on the point count after `k` steps.
pub fn xk_bound(k: u32, params: &CostParams) -> Result<f64, CostError> {
    params.require_tower()?;
    let ln_l = (params.maps as f64).ln() / (params.order - 1) as f64;
    let growth = (params.order as f64).powi(k as i32);
    Ok(growth * ((params.x0 as f64).ln() + ln_l) - ln_l)
}

/// Natural log of `x_k` from `x_k = L * x_{k-1}^p`, unrolled step by step.
pub fn xk_recurrence(k: u32, params: &CostParams) -> f64 {
    let ln_l = (params.maps as f64).ln();
    let p = params.order as f64;
    (0..k).fold((params.x0 as f64).ln(), |acc, _| ln_l + p * acc)
}

/// Exact `x_k`, if it fits in a `u128`.
pub fn xk_exact(k: u32, params: &CostParams) -> Option<u128> {
    (0..k).try_fold(params.x0 as u128, |acc, _| {
        acc.checked_pow(params.order as u32)?.checked_mul(params.maps as u128)
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioRow {
    pub eps: f64,
    pub ln_cost_grid: f64,
    pub ln_cost_det: f64,
    /// `ln(C_g / C_c)`
    pub ln_ratio: f64,
}

pub fn ratio_table(eps_list: &[f64], params: &CostParams) -> Result<Vec<RatioRow>, CostError> {
    eps_list
        .iter()
        .map(|&eps| {
            let grid = cost_grid(eps, params)?;
            let det = cost_deterministic(eps, params)?;
            Ok(RatioRow {
                eps,
                ln_cost_grid: grid.ln_value,
                ln_cost_det: det.ln_value,
                ln_ratio: grid.ln_value - det.ln_value,
            })
        })
        .collect()
}

/// Renders rows with 17 significant digits.
pub fn ratio_csv(rows: &[RatioRow]) -> String {
    let mut out = String::from(RATIO_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            r.eps, r.ln_cost_grid, r.ln_cost_det, r.ln_ratio
        );
    }
    out
}

/// `eps_j = first * factor^j` for `j = 0..count`.
///
/// When `1/factor` is an integer (10, 2, ...) each entry is a single
/// division by an exact power, so `0.1, 0.01, ...` come out as the doubles
/// nearest to those decimals instead of accumulating rounding.
pub fn geometric_eps(first: f64, factor: f64, count: usize) -> Vec<f64> {
    let inv = 1.0 / factor;
    let integral = inv.fract() == 0.0 && inv >= 2.0;
    (0..count)
        .map(|j| {
            let divisor = inv.powi(j as i32);
            if integral && divisor < 9_007_199_254_740_992.0 {
                first / divisor
            } else {
                first * factor.powi(j as i32)
            }
        })
        .collect()
}

/// `h(K0, G(K0)) / (1 - C)`, the factor relating iteration count to
/// accuracy for a deterministic run from `seed`. The cost models above
/// compare point counts at equal eps and leave this factor out.
pub fn accuracy_factor(system: &GifsSystem, seed: &PointSet, budget: u64) -> Result<f64, AlgoError> {
    let image = g_step(system, seed, budget)?.points;
    let h = hausdorff(seed, &image).map_err(|_| AlgoError::EmptyInput)?.h;
    Ok(h / (1.0 - system.contraction()))
}
