//! Soft functional dependencies: learning `d ≈ m·x + b` between attribute
//! pairs, choosing error margins, grouping correlated attributes and splitting
//! a dataset into margin-conforming (primary) and outlier rows.
//!
//! The learning pipeline for one ordered pair `(x, d)` is
//!
//! 1. draw a uniform row sample,
//! 2. shift both columns so their sample minimum is zero and [`bucketize`],
//! 3. keep the centres of buckets above a density threshold ([`dense_centers`]),
//! 4. fit a least-squares line to the weighted centres ([`fit_linear`]),
//! 5. pick asymmetric margins from displacement quantiles ([`select_margins`]).

mod detect;
mod fit;

use serde::{Deserialize, Serialize};

pub use detect::{
    detect_pairs, learn_groups, merge_groups, split_data, DetectConfig, PairFitter, Rejection,
    SplitResult,
};
pub use fit::{bucketize, central_interval, dense_centers, fit_linear, select_margins, BucketGrid, LinearFit, Margins, TrainingSet};

/// A learned linear dependency `dependent ≈ slope · indexed + intercept`
/// together with the margins every primary record must respect:
/// `-eps_lb <= dependent - predict(indexed) <= eps_ub`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftFdModel {
    pub indexed_dim: usize,
    pub dependent_dim: usize,
    pub slope: f64,
    pub intercept: f64,
    pub eps_lb: f64,
    pub eps_ub: f64,
    /// Fraction of records whose displacement lies inside the margins.
    pub fit_quality: f64,
}

impl SoftFdModel {
    #[inline]
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    /// Signed distance of the dependent value from the model line.
    #[inline]
    pub fn displacement(&self, x: f64, d: f64) -> f64 {
        d - self.predict(x)
    }

    /// Closed-bound margin test.
    #[inline]
    pub fn contains(&self, x: f64, d: f64) -> bool {
        let disp = self.displacement(x, d);
        -self.eps_lb <= disp && disp <= self.eps_ub
    }

    pub(crate) fn validate(&self, n_dims: usize) -> crate::Result<()> {
        use crate::Error;
        for dim in [self.indexed_dim, self.dependent_dim] {
            if dim >= n_dims {
                return Err(Error::DimOutOfRange { dim, n_dims });
            }
        }
        if self.indexed_dim == self.dependent_dim {
            return Err(Error::invalid("a model cannot predict its own indexed dimension"));
        }
        if self.slope == 0.0 || !self.slope.is_finite() || !self.intercept.is_finite() {
            return Err(Error::invalid("model slope must be finite and nonzero"));
        }
        if !(self.eps_lb >= 0.0 && self.eps_ub >= 0.0 && self.eps_lb.is_finite() && self.eps_ub.is_finite()) {
            return Err(Error::invalid("margins must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// One predictor attribute and the dependent attributes it explains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationGroup {
    pub predictor: usize,
    pub models: Vec<SoftFdModel>,
}

impl CorrelationGroup {
    pub fn dependents(&self) -> impl Iterator<Item = usize> + '_ {
        self.models.iter().map(|m| m.dependent_dim)
    }
}

/// Checks the structural invariants of a group list against a dimension count:
/// every model hangs off its group's predictor, and no dimension is used twice.
pub fn validate_groups(groups: &[CorrelationGroup], n_dims: usize) -> crate::Result<()> {
    let mut seen = vec![false; n_dims];
    let mut claim = |dim: usize| -> crate::Result<()> {
        if dim >= n_dims {
            return Err(crate::Error::DimOutOfRange { dim, n_dims });
        }
        if std::mem::replace(&mut seen[dim], true) {
            return Err(crate::Error::invalid(format!(
                "dimension {dim} appears in more than one group role"
            )));
        }
        Ok(())
    };
    for g in groups {
        claim(g.predictor)?;
        if g.models.is_empty() {
            return Err(crate::Error::invalid("group without dependents"));
        }
        for m in &g.models {
            if m.indexed_dim != g.predictor {
                return Err(crate::Error::invalid(format!(
                    "model for dimension {} is not indexed on predictor {}",
                    m.dependent_dim, g.predictor
                )));
            }
            claim(m.dependent_dim)?;
        }
    }
    for g in groups {
        for m in &g.models {
            m.validate(n_dims)?;
        }
    }
    Ok(())
}
