use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The n-cube `m + w·[-1/2, 1/2]^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    m: Vec<f64>,
    w: f64,
}

impl Cube {
    pub fn new(m: Vec<f64>, w: f64) -> Result<Cube> {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "w",
                reason: format!("cube width must be positive, got {w}"),
            });
        }
        if m.is_empty() || m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: "midpoint must be a finite, non-empty point".into(),
            });
        }
        Ok(Cube { m, w })
    }

    /// `[-a, a]^n`.
    pub fn region(n: usize, a: f64) -> Result<Cube> {
        Cube::new(vec![0.0; n], 2.0 * a)
    }

    pub fn midpoint(&self) -> &[f64] {
        &self.m
    }

    pub fn width(&self) -> f64 {
        self.w
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    pub fn volume(&self) -> f64 {
        self.w.powi(self.m.len() as i32)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.m.len() && self.m.iter().zip(x).all(|(c, v)| (v - c).abs() <= 0.5 * self.w)
    }

    /// The `2^n` halves, in lexicographic orthant order (first axis most significant, `-` before `+`).
    pub fn children(&self) -> Vec<Cube> {
        let n = self.m.len();
        let q = 0.25 * self.w;
        (0..1usize << n)
            .map(|code| {
                let m = (0..n)
                    .map(|axis| {
                        let plus = code >> (n - 1 - axis) & 1 == 1;
                        if plus {
                            self.m[axis] + q
                        } else {
                            self.m[axis] - q
                        }
                    })
                    .collect();
                Cube { m, w: 0.5 * self.w }
            })
            .collect()
    }

    /// Corner points, same orthant order as [`Cube::children`].
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.m.len();
        let h = 0.5 * self.w;
        (0..1usize << n)
            .map(|code| {
                (0..n)
                    .map(|axis| {
                        let plus = code >> (n - 1 - axis) & 1 == 1;
                        if plus {
                            self.m[axis] + h
                        } else {
                            self.m[axis] - h
                        }
                    })
                    .collect()
            })
            .collect()
    }
}
