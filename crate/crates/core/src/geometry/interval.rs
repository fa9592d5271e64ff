use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

/// Closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Interval {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}] is empty");
        Interval { lo, hi }
    }

    /// `center + radius * [-1, 1]`.
    pub fn centered(center: f64, radius: f64) -> Interval {
        Interval::new(center - radius, center + radius)
    }

    pub fn point(v: f64) -> Interval {
        Interval { lo: v, hi: v }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

impl Add for Interval {
    type Output = Interval;

    fn add(self, rhs: Interval) -> Interval {
        Interval::new(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

/// Product of two independent intervals.
impl Mul for Interval {
    type Output = Interval;

    fn mul(self, rhs: Interval) -> Interval {
        let p = [self.lo * rhs.lo, self.lo * rhs.hi, self.hi * rhs.lo, self.hi * rhs.hi];
        Interval::new(
            p.iter().copied().fold(f64::INFINITY, f64::min),
            p.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    }
}

/// Axis-aligned box of intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalBox(pub Vec<Interval>);

impl IntervalBox {
    pub fn centered(center: &[f64], radius: f64) -> IntervalBox {
        IntervalBox(center.iter().map(|&c| Interval::centered(c, radius)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        v.len() == self.0.len() && self.0.iter().zip(v).all(|(i, &x)| i.contains(x))
    }

    /// `Σ_i B_i · C_i` with every factor treated as an independent interval.
    pub fn dot(&self, other: &IntervalBox) -> Interval {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a * b)
            .fold(Interval::point(0.0), |acc, p| acc + p)
    }
}
