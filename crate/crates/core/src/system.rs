//! Generalized iterated function systems on the cube `[0, D]^M`.

use crate::affine::AffineMap;
use crate::error::SystemError;

/// Slack allowed by the interval range check, relative to `D`.
const RANGE_SLACK: f64 = 1e-12;

/// Tolerance band outside `[0, D]` that counts as floating-point drift.
pub const DRIFT_TOL: f64 = 1e-9;

/// How a system treats maps whose image leaves the cube.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RangePolicy {
    /// Every map must send `([0,D]^M)^p` into `[0,D]^M`; checked by interval arithmetic.
    #[default]
    Strict,
    /// Maps are composed with the nearest-point projection onto the cube.
    /// The projection is 1-Lipschitz, so the contraction bound is unchanged.
    Project,
}

/// A GIFS of order `p` on `[0, D]^M` with certified contraction constant `C < 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct GifsSystem {
    dim: usize,
    order: usize,
    side: f64,
    maps: Vec<AffineMap>,
    lip_bounds: Vec<f64>,
    contraction: f64,
    policy: RangePolicy,
    range_excess: f64,
}

impl GifsSystem {
    /// Validates dimensions, certifies `C < 1` and the range condition.
    pub fn new(
        maps: Vec<AffineMap>,
        side: f64,
        order: usize,
        dim: usize,
        policy: RangePolicy,
    ) -> Result<Self, SystemError> {
        if maps.is_empty() {
            return Err(SystemError::NoMaps);
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(SystemError::InvalidSide(side));
        }
        if order == 0 || dim == 0 {
            return Err(SystemError::DimensionMismatch("order and dimension must be positive".into()));
        }
        for (i, f) in maps.iter().enumerate() {
            if f.dim() != dim || f.order() != order {
                return Err(SystemError::DimensionMismatch(format!(
                    "map {} has dimension {} and order {}, system expects {} and {}",
                    i + 1,
                    f.dim(),
                    f.order(),
                    dim,
                    order
                )));
            }
        }
        let lip_bounds: Vec<f64> = maps.iter().map(AffineMap::lip_bound).collect();
        let contraction = lip_bounds.iter().copied().fold(0.0, f64::max);
        if contraction >= 1.0 {
            let map = lip_bounds.iter().position(|&b| b >= 1.0).unwrap_or(0);
            return Err(SystemError::ContractionViolation {
                map: map + 1,
                bound: lip_bounds[map],
                constant: contraction,
            });
        }
        let mut range_excess: f64 = 0.0;
        for (i, f) in maps.iter().enumerate() {
            for (r, (lo, hi)) in f.interval_image(side).into_iter().enumerate() {
                let excess = (-lo).max(hi - side).max(0.0);
                if excess > RANGE_SLACK * side && policy == RangePolicy::Strict {
                    return Err(SystemError::RangeViolation { map: i + 1, coord: r + 1, lo, hi, side });
                }
                range_excess = range_excess.max(excess);
            }
        }
        Ok(GifsSystem { dim, order, side, maps, lip_bounds, contraction, policy, range_excess })
    }

    /// `M`
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `p`
    pub fn order(&self) -> usize {
        self.order
    }

    /// `D`
    pub fn side(&self) -> f64 {
        self.side
    }

    /// `L`
    pub fn map_count(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn lip_bounds(&self) -> &[f64] {
        &self.lip_bounds
    }

    /// Certified contraction constant `C = max_i lip(f_i)`.
    pub fn contraction(&self) -> f64 {
        self.contraction
    }

    /// `beta = p * M`
    pub fn beta(&self) -> usize {
        self.order * self.dim
    }

    /// Cube diameter `D * sqrt(M)`.
    pub fn diameter(&self) -> f64 {
        self.side * (self.dim as f64).sqrt()
    }

    pub fn policy(&self) -> RangePolicy {
        self.policy
    }

    /// Largest distance by which an interval image leaves the cube (0 for strict systems).
    pub fn range_excess(&self) -> f64 {
        self.range_excess
    }

    /// Same system with the maps listed in another order.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, SystemError> {
        let maps = perm.iter().map(|&i| self.maps[i].clone()).collect();
        Self::new(maps, self.side, self.order, self.dim, self.policy)
    }

    /// Clamps an image into the cube. Returns `true` if some coordinate was
    /// outside the drift band `[-1e-9, D + 1e-9]`.
    #[inline]
    pub(crate) fn clamp(&self, v: &mut [f64]) -> bool {
        let mut far = false;
        for x in v.iter_mut() {
            if *x < -DRIFT_TOL || *x > self.side + DRIFT_TOL {
                far = true;
            }
            *x = x.clamp(0.0, self.side) + 0.0;
        }
        far
    }

    /// Evaluates map `i` and clamps the result into the cube.
    pub fn eval(&self, i: usize, args: &[&[f64]]) -> Result<Vec<f64>, SystemError> {
        let mut v = self.maps[i].apply(args)?;
        self.clamp(&mut v);
        Ok(v)
    }
}
