//! Query rectangles and the translation of dependent-attribute constraints
//! onto the indexed attribute through a model's margin band.
//!
//! For a model `d ≈ m·x + b` with margins `(ε_lb, ε_ub)`, every conforming
//! record satisfies `m·x + b - ε_lb <= d <= m·x + b + ε_ub`. A constraint
//! `d ∈ [y_lo, y_hi]` therefore implies, for `m > 0`,
//! `x ∈ [(y_lo - b - ε_ub) / m, (y_hi - b + ε_lb) / m]`, and the mirrored
//! interval for `m < 0`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::softfd::SoftFdModel;

/// A closed interval with possibly infinite ends, or the canonical empty set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const FULL: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    pub const EMPTY: Interval = Interval {
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
    };

    /// `[lo, hi]`, or [`Interval::EMPTY`] when `lo > hi` or either end is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        if lo <= hi {
            Interval { lo, hi }
        } else {
            Self::EMPTY
        }
    }

    pub fn point(v: f64) -> Self {
        Self::new(v, v)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo <= self.hi)
    }

    pub fn is_full(&self) -> bool {
        self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY
    }

    #[inline]
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        if self.is_empty() || other.is_empty() {
            return Self::EMPTY;
        }
        Self::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        !self.intersect(other).is_empty()
    }

    pub fn width(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.hi - self.lo
        }
    }
}

/// Per-dimension closed constraints. Unconstrained dimensions use `±∞`; a
/// point query has `lo == hi` everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRect {
    bounds: Vec<Interval>,
}

impl QueryRect {
    pub fn new(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        let bounds = lo
            .iter()
            .zip(hi)
            .map(|(&l, &h)| Self::checked(l, h))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { bounds })
    }

    pub fn from_intervals(bounds: Vec<Interval>) -> Result<Self> {
        if bounds.iter().any(Interval::is_empty) {
            return Err(Error::invalid("query bounds must satisfy lo <= hi"));
        }
        Ok(Self { bounds })
    }

    /// The whole space in `n_dims` dimensions.
    pub fn full(n_dims: usize) -> Self {
        Self {
            bounds: vec![Interval::FULL; n_dims],
        }
    }

    pub fn point(coords: &[f64]) -> Self {
        Self {
            bounds: coords.iter().map(|&v| Interval::point(v)).collect(),
        }
    }

    fn checked(lo: f64, hi: f64) -> Result<Interval> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::invalid(format!("invalid bound [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn n_dims(&self) -> usize {
        self.bounds.len()
    }

    pub fn dim(&self, d: usize) -> Interval {
        self.bounds[d]
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    /// Replaces one dimension's constraint. Used to narrow the indexed
    /// attribute with translated constraints.
    pub fn with_dim(mut self, d: usize, interval: Interval) -> Result<Self> {
        if interval.is_empty() {
            return Err(Error::invalid("cannot set an empty interval"));
        }
        self.bounds[d] = interval;
        Ok(self)
    }

    pub fn set_unbounded(&mut self, d: usize) {
        self.bounds[d] = Interval::FULL;
    }

    pub fn is_point(&self) -> bool {
        self.bounds.iter().all(|b| b.lo == b.hi)
    }

    #[inline]
    pub fn contains(&self, record: &[f64]) -> bool {
        self.bounds.iter().zip(record).all(|(b, &v)| b.contains(v))
    }

    /// True when the rectangle overlaps the per-dimension `(min, max)` box.
    pub fn intersects_box(&self, bbox: &[(f64, f64)]) -> bool {
        self.bounds
            .iter()
            .zip(bbox)
            .all(|(b, &(lo, hi))| b.lo <= hi && lo <= b.hi)
    }
}

// JSON form: `[[lo, hi], ...]` with `null` standing for an infinite end.
impl Serialize for QueryRect {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let finite = |v: f64| if v.is_finite() { Some(v) } else { None };
        let pairs: Vec<[Option<f64>; 2]> = self
            .bounds
            .iter()
            .map(|b| [finite(b.lo), finite(b.hi)])
            .collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QueryRect {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[Option<f64>; 2]>::deserialize(d)?;
        let bounds = pairs
            .into_iter()
            .map(|[lo, hi]| {
                QueryRect::checked(
                    lo.unwrap_or(f64::NEG_INFINITY),
                    hi.unwrap_or(f64::INFINITY),
                )
            })
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Ok(QueryRect { bounds })
    }
}

pub fn predict(model: &SoftFdModel, x: f64) -> f64 {
    model.predict(x)
}

/// Interval of indexed values whose margin band meets `[y_lo, y_hi]`.
///
/// Finite ends are widened by a few ulps of the operands so that records
/// admitted by the floating-point margin test in
/// [`split_data`](crate::softfd::split_data) are never excluded.
pub fn dependent_range_to_indexed(model: &SoftFdModel, y_lo: f64, y_hi: f64) -> Result<Interval> {
    let m = model.slope;
    if m == 0.0 || !m.is_finite() {
        return Err(Error::invalid("cannot translate through a zero slope"));
    }
    if y_lo.is_nan() || y_hi.is_nan() || y_lo > y_hi {
        return Err(Error::invalid(format!("invalid dependent range [{y_lo}, {y_hi}]")));
    }
    let b = model.intercept;
    // lower/upper line intersections, in the order they bound x for m > 0
    let from_lo = (y_lo - b - model.eps_ub) / m;
    let from_hi = (y_hi - b + model.eps_lb) / m;
    let (lo, hi) = if m > 0.0 { (from_lo, from_hi) } else { (from_hi, from_lo) };

    let y_mag = finite_abs(y_lo).max(finite_abs(y_hi));
    let operands = 2.0 * y_mag + 2.0 * b.abs() + model.eps_lb + model.eps_ub;
    let slack = |x: f64| 8.0 * f64::EPSILON * (operands / m.abs() + x.abs()) + f64::MIN_POSITIVE;
    Ok(Interval::new(lo - slack(lo), hi + slack(hi)))
}

fn finite_abs(v: f64) -> f64 {
    if v.is_finite() {
        v.abs()
    } else {
        0.0
    }
}

/// Indexed-attribute interval to scan: the direct constraint intersected with
/// the translated dependent constraint.
pub fn translated_scan_range(model: &SoftFdModel, x: Interval, y: Interval) -> Result<Interval> {
    if y.is_empty() || x.is_empty() {
        return Ok(Interval::EMPTY);
    }
    if y.is_full() {
        return Ok(x);
    }
    Ok(x.intersect(&dependent_range_to_indexed(model, y.lo(), y.hi())?))
}

/// Area of the true result region inside a band of half-width `eps` around
/// `y = a·x`, for a dependent-axis query of height `q_y`.
pub fn result_area(q_y: f64, eps: f64, a: f64) -> f64 {
    q_y * 2.0 * eps / a
}

/// Area the translated scan covers for the same query.
pub fn scanned_area(q_y: f64, eps: f64, a: f64) -> f64 {
    2.0 * eps * (2.0 * eps + q_y) / a
}

/// `result_area / scanned_area = q_y / (2ε + q_y)`.
pub fn effectiveness(q_y: f64, eps: f64) -> Result<f64> {
    if q_y < 0.0 || eps < 0.0 {
        return Err(Error::invalid("query height and margin must be nonnegative"));
    }
    if q_y == 0.0 && eps == 0.0 {
        return Err(Error::invalid("effectiveness undefined for q_y = eps = 0"));
    }
    Ok(q_y / (2.0 * eps + q_y))
}
