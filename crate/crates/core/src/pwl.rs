//! Exact roots of nondecreasing piecewise-linear sums.
//!
//! The rationing parameter of the uniform-style rules solves
//! `sum_i term_i(lambda) = target` where every term is a clamped line. The
//! sum is continuous and nondecreasing, so sorting the kinks and solving the
//! one linear piece that brackets the target gives the exact root.

use crate::rational::Rational;

/// `min(cap, base + slope * lambda)` or `max(floor, base + slope * lambda)`,
/// with `slope >= 0`.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Term {
    Min {
        cap: Rational,
        base: Rational,
        slope: Rational,
    },
    Max {
        floor: Rational,
        base: Rational,
        slope: Rational,
    },
}

impl Term {
    pub(crate) fn eval(&self, lambda: Rational) -> Rational {
        match *self {
            Term::Min { cap, base, slope } => cap.min(base + slope * lambda),
            Term::Max { floor, base, slope } => floor.max(base + slope * lambda),
        }
    }

    fn kink(&self) -> Option<Rational> {
        let (bound, base, slope) = match *self {
            Term::Min { cap, base, slope } => (cap, base, slope),
            Term::Max { floor, base, slope } => (floor, base, slope),
        };
        slope.is_positive().then(|| (bound - base) / slope)
    }

    /// Slope left of every kink.
    fn left_slope(&self) -> Rational {
        match *self {
            Term::Min { slope, .. } => slope,
            Term::Max { .. } => Rational::ZERO,
        }
    }

    /// Slope right of every kink.
    fn right_slope(&self) -> Rational {
        match *self {
            Term::Min { .. } => Rational::ZERO,
            Term::Max { slope, .. } => slope,
        }
    }
}

fn total(terms: &[Term], lambda: Rational) -> Rational {
    terms.iter().map(|t| t.eval(lambda)).sum()
}

/// Smallest `lambda` with `sum(terms)(lambda) == target`, if any.
///
/// Where the sum is flat at `target` every term is flat as well, so any root
/// yields the same term values; the smallest is returned for determinism.
pub(crate) fn solve(terms: &[Term], target: Rational) -> Option<Rational> {
    let mut kinks: Vec<Rational> = terms.iter().filter_map(Term::kink).collect();
    kinks.sort();
    kinks.dedup();

    let Some(&first) = kinks.first() else {
        return (total(terms, Rational::ZERO) == target).then_some(Rational::ZERO);
    };
    let values: Vec<Rational> = kinks.iter().map(|k| total(terms, *k)).collect();

    if target <= values[0] {
        if target == values[0] {
            return Some(first);
        }
        let slope: Rational = terms.iter().map(Term::left_slope).sum();
        if slope.is_zero() {
            return None;
        }
        return Some(first - (values[0] - target) / slope);
    }
    for k in 1..kinks.len() {
        if target <= values[k] {
            let (x0, x1) = (kinks[k - 1], kinks[k]);
            let (y0, y1) = (values[k - 1], values[k]);
            return Some(x0 + (target - y0) * (x1 - x0) / (y1 - y0));
        }
    }
    let last = kinks.len() - 1;
    let slope: Rational = terms.iter().map(Term::right_slope).sum();
    if slope.is_zero() {
        return None;
    }
    Some(kinks[last] + (target - values[last]) / slope)
}
