//! Grid-resolution schedules `(n_k)`, the Lagrange-optimal schedule, and the
//! accumulated error bound of the grid algorithm.
//!
//! With cell diagonals `eps_k = D sqrt(M) / n_k`, the grid iterate after `N`
//! steps is within
//!
//! ```text
//! eps_N + C eps_{N-1} + ... + C^{N-1} eps_1 + C^N D sqrt(M)
//! ```
//!
//! of the attractor. Minimizing the number of evaluated points
//! `sum_k eps_k^{-beta}` (`beta = pM`) under that bound gives cell sizes
//! decaying geometrically with ratio `C^{1/(beta+1)}`; see [`optimal_plan`].

use crate::error::ScheduleError;

/// Relative tolerance on the optimal plan's equality constraint.
pub const CONSTRAINT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Quadratic,
    Optimal { target: f64 },
    Constant(u32),
    Custom,
}

/// A sequence of grid resolutions with derived cell diagonals.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSchedule {
    resolutions: Vec<u32>,
    eps: Vec<f64>,
    diameter: f64,
    provenance: Provenance,
}

fn diameter_of(side: f64, dim: usize) -> Result<f64, ScheduleError> {
    if !(side.is_finite() && side > 0.0) || dim == 0 {
        return Err(ScheduleError::Invalid(format!("cube [0,{side}]^{dim} is not valid")));
    }
    Ok(side * (dim as f64).sqrt())
}

impl GridSchedule {
    fn build(resolutions: Vec<u32>, side: f64, dim: usize, provenance: Provenance) -> Result<Self, ScheduleError> {
        if resolutions.is_empty() {
            return Err(ScheduleError::Invalid("schedule needs at least one step".into()));
        }
        if resolutions.contains(&0) {
            return Err(ScheduleError::Invalid("resolutions must be positive".into()));
        }
        let diameter = diameter_of(side, dim)?;
        let eps = resolutions.iter().map(|&n| diameter / n as f64).collect();
        Ok(GridSchedule { resolutions, eps, diameter, provenance })
    }

    /// `n_k = k^2` for `k = 1..=steps`.
    pub fn quadratic(steps: usize, side: f64, dim: usize) -> Result<Self, ScheduleError> {
        let resolutions = (1..=steps)
            .map(|k| {
                u32::try_from(k * k).map_err(|_| ScheduleError::Invalid(format!("step {k} overflows n_k = k^2")))
            })
            .collect::<Result<_, _>>()?;
        Self::build(resolutions, side, dim, Provenance::Quadratic)
    }

    /// The same resolution at every step.
    pub fn constant(n: u32, steps: usize, side: f64, dim: usize) -> Result<Self, ScheduleError> {
        Self::build(vec![n; steps], side, dim, Provenance::Constant(n))
    }

    pub fn custom(resolutions: Vec<u32>, side: f64, dim: usize) -> Result<Self, ScheduleError> {
        Self::build(resolutions, side, dim, Provenance::Custom)
    }

    /// `n_k = [D sqrt(M) / eps_k^0] + 1`, so every realized `eps_k` is below
    /// the plan's `eps_k^0`.
    pub fn from_plan(plan: &OptimalPlan, side: f64, dim: usize) -> Result<Self, ScheduleError> {
        let diameter = diameter_of(side, dim)?;
        let resolutions = plan
            .eps0
            .iter()
            .map(|&e| {
                let n = (diameter / e).floor() + 1.0;
                if n > u32::MAX as f64 {
                    Err(ScheduleError::Invalid(format!("cell size {e} needs more than 2^32 cells per axis")))
                } else {
                    Ok(n as u32)
                }
            })
            .collect::<Result<_, _>>()?;
        Self::build(resolutions, side, dim, Provenance::Optimal { target: plan.target_eps })
    }

    /// The first `steps` entries (or the whole schedule if shorter).
    pub fn prefix(&self, steps: usize) -> Result<Self, ScheduleError> {
        if steps == 0 {
            return Err(ScheduleError::Invalid("schedule needs at least one step".into()));
        }
        let k = steps.min(self.len());
        Ok(GridSchedule {
            resolutions: self.resolutions[..k].to_vec(),
            eps: self.eps[..k].to_vec(),
            diameter: self.diameter,
            provenance: self.provenance.clone(),
        })
    }

    /// Parses one positive integer per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, side: f64, dim: usize) -> Result<Self, ScheduleError> {
        let mut resolutions = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let n: u32 = line
                .parse()
                .map_err(|_| ScheduleError::Invalid(format!("line {}: expected a positive integer, found {line:?}", i + 1)))?;
            resolutions.push(n);
        }
        Self::build(resolutions, side, dim, Provenance::Custom)
    }

    /// One `n_k` per line.
    pub fn to_text(&self) -> String {
        self.resolutions.iter().map(|n| format!("{n}\n")).collect()
    }

    pub fn resolutions(&self) -> &[u32] {
        &self.resolutions
    }

    /// Cell diagonals `eps_k = D sqrt(M) / n_k`.
    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Number of steps `N`.
    pub fn len(&self) -> usize {
        self.resolutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resolutions.is_empty()
    }
}

/// Accumulated error bounds after each step:
/// `B_0 = D sqrt(M)`, `B_k = gap_factor * eps_k + C B_{k-1}`.
///
/// `gap_factor` is 1 for floor snapping and 1/2 for round snapping.
/// The recursion expands to `sum_j C^j eps_{k-j} + C^k D sqrt(M)` with the
/// highest powers of `C` accumulated first.
pub fn prefix_bounds(schedule: &GridSchedule, contraction: f64, gap_factor: f64) -> Vec<f64> {
    let mut acc = schedule.diameter;
    schedule
        .eps
        .iter()
        .map(|&e| {
            acc = contraction * acc + gap_factor * e;
            acc
        })
        .collect()
}

/// Bound on `h(A~_N, A_F)` after the whole schedule (floor snapping).
pub fn error_bound(schedule: &GridSchedule, contraction: f64) -> f64 {
    error_bound_scaled(schedule, contraction, 1.0)
}

/// [`error_bound`] with per-step gaps scaled by `gap_factor`.
pub fn error_bound_scaled(schedule: &GridSchedule, contraction: f64, gap_factor: f64) -> f64 {
    *prefix_bounds(schedule, contraction, gap_factor)
        .last()
        .expect("schedules are never empty")
}

/// The constrained minimizer of `sum_k eps_k^{-beta}` subject to the
/// accumulated error equalling `target_eps`, with `N` chosen by rounding the
/// continuous optimum.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalPlan {
    pub target_eps: f64,
    pub contraction: f64,
    pub diameter: f64,
    pub beta: usize,
    /// Number of steps `N`.
    pub steps: usize,
    /// Cell diagonals `eps_k^0`, `k = 1..=N`.
    pub eps0: Vec<f64>,
    /// Scale factor `k_N` in `eps_k^0 = k_N C^{k/(beta+1)}`.
    pub k_n: f64,
    /// `t = C^{-beta N/(beta+1)} - 1`
    pub t: f64,
    /// `K_1 = 1 - C^{beta/(beta+1)}`
    pub k1: f64,
    /// `K_2 = K_1^{-beta-1}`
    pub k2: f64,
    /// `K_3 = K_2 eps^{-beta}`
    pub k3: f64,
    /// `a = D sqrt(M) / eps`
    pub a: f64,
    /// `y = C^{-N}`; may be infinite when `N` is large, see `ln_y`.
    pub y: f64,
    pub ln_y: f64,
    ln_k3: f64,
    ln_t: f64,
}

/// Builds the optimal plan for reaching accuracy `target_eps`.
pub fn optimal_plan(
    target_eps: f64,
    contraction: f64,
    side: f64,
    dim: usize,
    order: usize,
) -> Result<OptimalPlan, ScheduleError> {
    if !(contraction > 0.0 && contraction < 1.0) {
        return Err(ScheduleError::DegenerateContraction(contraction));
    }
    if order == 0 {
        return Err(ScheduleError::Invalid("order must be positive".into()));
    }
    let diameter = diameter_of(side, dim)?;
    if !(target_eps > 0.0 && target_eps < diameter) {
        return Err(ScheduleError::EpsilonTooLarge { eps: target_eps, diameter });
    }
    let beta = order * dim;
    let b = beta as f64;
    let ln_c = contraction.ln();
    let a = diameter / target_eps;
    let ln_a = a.ln();
    let steps_real = (b + 1.0) * (target_eps / diameter).ln() / ln_c;
    let steps = steps_real.floor() as usize + 1;
    let ln_y = -(steps as f64) * ln_c;
    // y must exceed a for the constraint to admit positive cell sizes.
    if !(ln_y > ln_a) {
        return Err(ScheduleError::EpsilonTooLarge { eps: target_eps, diameter });
    }
    let w = b / (b + 1.0);
    let ln_t = w * ln_y + (-(-w * ln_y).exp()).ln_1p();
    let k1 = -(w * ln_c).exp_m1();
    // ln(eps y - D sqrt(M)) = ln eps + ln y + ln(1 - a/y)
    let ln_gap = target_eps.ln() + ln_y + (-(ln_a - ln_y).exp()).ln_1p();
    let ln_kn = k1.ln() - ln_t + ln_gap;
    let eps0: Vec<f64> = (1..=steps)
        .map(|k| (ln_kn + (k as f64) / (b + 1.0) * ln_c).exp())
        .collect();
    let ln_k2 = -(b + 1.0) * k1.ln();
    let ln_k3 = ln_k2 - b * target_eps.ln();
    let plan = OptimalPlan {
        target_eps,
        contraction,
        diameter,
        beta,
        steps,
        eps0,
        k_n: ln_kn.exp(),
        t: ln_t.exp(),
        k1,
        k2: ln_k2.exp(),
        k3: ln_k3.exp(),
        a,
        y: ln_y.exp(),
        ln_y,
        ln_k3,
        ln_t,
    };
    let residual = plan.constraint_residual();
    if !(residual.abs() <= CONSTRAINT_TOL * target_eps) {
        return Err(ScheduleError::Invalid(format!(
            "constraint residual {residual} exceeds tolerance for eps = {target_eps}"
        )));
    }
    if plan.eps0.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(ScheduleError::Invalid("non-positive cell size in optimal plan".into()));
    }
    Ok(plan)
}

impl OptimalPlan {
    /// `g(eps^0) = sum_k C^{N-k} eps_k^0 + C^N D sqrt(M) - eps`.
    pub fn constraint_residual(&self) -> f64 {
        constraint_value(&self.eps0, self.contraction, self.diameter) - self.target_eps
    }

    /// Constraint weights `C^{N-k}`, `k = 1..=N`.
    pub fn constraint_weights(&self) -> Vec<f64> {
        let n = self.steps as i32;
        (1..=n).map(|k| self.contraction.powi(n - k)).collect()
    }

    /// `ln sum_k (eps_k^0)^{-beta}` by direct summation.
    pub fn ln_cost_direct(&self) -> f64 {
        ln_point_cost(&self.eps0, self.beta)
    }

    /// `ln( K_3 (y^{beta/(beta+1)} - 1)^{beta+1} (y - a)^{-beta} )` at this plan's `y`.
    pub fn ln_cost_closed_form(&self) -> f64 {
        self.curve().ln_h(self.ln_y)
    }

    /// The optimal-cost curve as a function of `y`.
    pub fn curve(&self) -> CostCurve {
        CostCurve { ln_k3: self.ln_k3, a: self.a, beta: self.beta }
    }

    pub fn ln_t(&self) -> f64 {
        self.ln_t
    }
}

/// `sum_k C^{N-k} eps_k + C^N D sqrt(M)`.
pub fn constraint_value(eps: &[f64], contraction: f64, diameter: f64) -> f64 {
    eps.iter().fold(diameter, |acc, &e| contraction * acc + e)
}

/// `sum_k eps_k^{-beta}`
pub fn point_cost(eps: &[f64], beta: usize) -> f64 {
    eps.iter().map(|&e| e.powi(-(beta as i32))).sum()
}

/// `ln sum_k eps_k^{-beta}` without overflow.
pub fn ln_point_cost(eps: &[f64], beta: usize) -> f64 {
    let b = beta as f64;
    let terms: Vec<f64> = eps.iter().map(|&e| -b * e.ln()).collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + terms.iter().map(|&t| (t - max).exp()).sum::<f64>().ln()
}

/// `h(y) = K_3 (y^{beta/(beta+1)} - 1)^{beta+1} (y - a)^{-beta}` on `y > a`,
/// evaluated in log space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostCurve {
    pub ln_k3: f64,
    pub a: f64,
    pub beta: usize,
}

impl CostCurve {
    /// `ln h(y)` given `ln y`; infinite for `y <= a`.
    pub fn ln_h(&self, ln_y: f64) -> f64 {
        let b = self.beta as f64;
        let w = b / (b + 1.0);
        let ln_a = self.a.ln();
        if ln_y <= ln_a {
            return f64::INFINITY;
        }
        let ln_num = w * ln_y + (-(-w * ln_y).exp()).ln_1p();
        let ln_den = ln_y + (-(ln_a - ln_y).exp()).ln_1p();
        self.ln_k3 + (b + 1.0) * ln_num - b * ln_den
    }

    /// `ln y` of the minimizer, `y* = a^{beta+1}`.
    pub fn argmin_ln_y(&self) -> f64 {
        (self.beta as f64 + 1.0) * self.a.ln()
    }

    /// `ln h(a^{beta+1}) = ln( K_3 (a^beta - 1) / a^beta )`.
    pub fn ln_min(&self) -> f64 {
        let b = self.beta as f64;
        self.ln_k3 + (-(-b * self.a.ln()).exp()).ln_1p()
    }
}
