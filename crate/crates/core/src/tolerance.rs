use crate::error::{Error, Result};

/// Numerical thresholds shared by every check in the crate.
///
/// `zero_rel` is relative: a singular value or eigenvalue counts as zero when
/// it is at most `zero_rel` times the largest one. `geom_abs` is an absolute
/// bound on coordinate, distance and residual disagreement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    zero_rel: f64,
    geom_abs: f64,
}

impl Tolerances {
    pub const DEFAULT_ZERO_REL: f64 = 1e-9;
    pub const DEFAULT_GEOM_ABS: f64 = 1e-8;

    pub fn new(zero_rel: f64, geom_abs: f64) -> Result<Self> {
        let ok = |t: f64| t > 0.0 && t < 1.0;
        if ok(zero_rel) && ok(geom_abs) {
            Ok(Self { zero_rel, geom_abs })
        } else {
            Err(Error::InvalidTolerances { zero_rel, geom_abs })
        }
    }

    pub fn zero_rel(&self) -> f64 {
        self.zero_rel
    }

    pub fn geom_abs(&self) -> f64 {
        self.geom_abs
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            zero_rel: Self::DEFAULT_ZERO_REL,
            geom_abs: Self::DEFAULT_GEOM_ABS,
        }
    }
}
