//! Intervals of the real line with exact rational endpoints.
//!
//! Better-than sets of the weighted-V preferences are intervals, so the
//! manipulation deciders reduce to intersecting a handful of these.

use std::fmt;

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bound {
    Unbounded,
    Closed(Rational),
    Open(Rational),
}

impl Bound {
    fn value(&self) -> Option<Rational> {
        match self {
            Bound::Unbounded => None,
            Bound::Closed(v) | Bound::Open(v) => Some(*v),
        }
    }

    fn is_open(&self) -> bool {
        matches!(self, Bound::Open(_))
    }
}

/// A possibly empty, possibly unbounded interval. All empty intervals are
/// stored as the same canonical value, so `==` is set equality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    lower: Bound,
    upper: Bound,
}

const EMPTY: Interval = Interval {
    lower: Bound::Open(Rational::ZERO),
    upper: Bound::Open(Rational::ZERO),
};

impl Interval {
    pub fn new(lower: Bound, upper: Bound) -> Self {
        let candidate = Interval { lower, upper };
        if candidate.is_degenerate_empty() {
            EMPTY
        } else {
            candidate
        }
    }

    pub fn empty() -> Self {
        EMPTY
    }

    pub fn all() -> Self {
        Interval::new(Bound::Unbounded, Bound::Unbounded)
    }

    pub fn point(x: Rational) -> Self {
        Interval::closed(x, x)
    }

    pub fn open(a: Rational, b: Rational) -> Self {
        Interval::new(Bound::Open(a), Bound::Open(b))
    }

    pub fn closed(a: Rational, b: Rational) -> Self {
        Interval::new(Bound::Closed(a), Bound::Closed(b))
    }

    /// `[x, +inf)`
    pub fn at_least(x: Rational) -> Self {
        Interval::new(Bound::Closed(x), Bound::Unbounded)
    }

    pub fn lower(&self) -> Bound {
        self.lower
    }

    pub fn upper(&self) -> Bound {
        self.upper
    }

    fn is_degenerate_empty(&self) -> bool {
        match (self.lower.value(), self.upper.value()) {
            (Some(lo), Some(hi)) => lo > hi || (lo == hi && (self.lower.is_open() || self.upper.is_open())),
            _ => false,
        }
    }

    pub fn is_empty(&self) -> bool {
        *self == EMPTY
    }

    pub fn contains(&self, x: Rational) -> bool {
        if self.is_empty() {
            return false;
        }
        let above = match self.lower {
            Bound::Unbounded => true,
            Bound::Closed(lo) => x >= lo,
            Bound::Open(lo) => x > lo,
        };
        let below = match self.upper {
            Bound::Unbounded => true,
            Bound::Closed(hi) => x <= hi,
            Bound::Open(hi) => x < hi,
        };
        above && below
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        if self.is_empty() || other.is_empty() {
            return EMPTY;
        }
        let lower = tighter(self.lower, other.lower, true);
        let upper = tighter(self.upper, other.upper, false);
        Interval::new(lower, upper)
    }

    /// The image `{t - y : y in self}`.
    pub fn reflect(&self, t: Rational) -> Interval {
        if self.is_empty() {
            return EMPTY;
        }
        let flip = |b: Bound| match b {
            Bound::Unbounded => Bound::Unbounded,
            Bound::Closed(v) => Bound::Closed(t - v),
            Bound::Open(v) => Bound::Open(t - v),
        };
        Interval::new(flip(self.upper), flip(self.lower))
    }

    /// A deterministic member of the interval: the point itself for a
    /// degenerate interval, the midpoint of a bounded one, one unit inside a
    /// ray.
    pub fn representative(&self) -> Option<Rational> {
        if self.is_empty() {
            return None;
        }
        Some(match (self.lower.value(), self.upper.value()) {
            (Some(lo), Some(hi)) if lo == hi => lo,
            (Some(lo), Some(hi)) => Rational::midpoint(lo, hi),
            (Some(lo), None) => lo + Rational::ONE,
            (None, Some(hi)) => hi - Rational::ONE,
            (None, None) => Rational::ZERO,
        })
    }
}

fn tighter(a: Bound, b: Bound, is_lower: bool) -> Bound {
    match (a.value(), b.value()) {
        (None, _) => b,
        (_, None) => a,
        (Some(x), Some(y)) => {
            if x == y {
                if a.is_open() {
                    a
                } else {
                    b
                }
            } else if (x > y) == is_lower {
                a
            } else {
                b
            }
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "{{}}");
        }
        match self.lower {
            Bound::Unbounded => write!(f, "(-inf")?,
            Bound::Closed(v) => write!(f, "[{v}")?,
            Bound::Open(v) => write!(f, "({v}")?,
        }
        match self.upper {
            Bound::Unbounded => write!(f, ", +inf)"),
            Bound::Closed(v) => write!(f, ", {v}]"),
            Bound::Open(v) => write!(f, ", {v})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn empty_is_canonical() {
        assert_eq!(Interval::open(int(1), int(1)), Interval::empty());
        assert_eq!(Interval::closed(int(2), int(1)), Interval::empty());
        assert_eq!(
            Interval::new(Bound::Closed(int(3)), Bound::Open(int(3))),
            Interval::empty()
        );
        assert!(!Interval::point(int(3)).is_empty());
    }

    #[test]
    fn intersection_keeps_the_stricter_endpoint() {
        let a = Interval::closed(int(0), int(4));
        let b = Interval::open(int(2), int(4));
        let c = a.intersect(&b);
        assert_eq!(c, Interval::new(Bound::Open(int(2)), Bound::Open(int(4))));
        assert!(!c.contains(int(4)));
        assert!(c.contains(int(3)));
        assert!(Interval::open(int(0), int(1))
            .intersect(&Interval::closed(int(1), int(2)))
            .is_empty());
    }

    #[test]
    fn reflection_swaps_endpoints() {
        let a = Interval::new(Bound::Open(int(3)), Bound::Closed(int(5)));
        assert_eq!(
            a.reflect(int(5)),
            Interval::new(Bound::Closed(int(0)), Bound::Open(int(2)))
        );
    }

    #[test]
    fn representative_lies_inside() {
        for iv in [
            Interval::open(int(3), int(5)),
            Interval::point(rat(7, 2)),
            Interval::at_least(int(2)),
            Interval::all(),
        ] {
            assert!(iv.contains(iv.representative().unwrap()), "{iv}");
        }
        assert_eq!(Interval::empty().representative(), None);
    }
}
