//! Uniform grids on [0,1] and composite Simpson weights.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub x: Vec<f64>,
}

impl Grid {
    pub fn uniform(points: usize) -> Result<Self> {
        if !(2..=1_000_000).contains(&points) {
            return Err(Error::Domain(format!("grid needs 2..=1e6 points, got {points}")));
        }
        let h = 1.0 / (points - 1) as f64;
        let mut x: Vec<f64> = (0..points).map(|k| k as f64 * h).collect();
        x[points - 1] = 1.0;
        Ok(Grid { x })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    /// Composite Simpson weights; an even point count closes with a 3/8 panel.
    pub fn simpson_weights(&self) -> Vec<f64> {
        simpson_weights_uniform(self.x.len(), self.step())
    }

    /// Index of the node at `x`, if `x` lies on the grid.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let h = self.step();
        let k = (x / h).round();
        if k < 0.0 || k as usize >= self.len() || (k * h - x).abs() > 1e-9 * h {
            None
        } else {
            Some(k as usize)
        }
    }
}

/// Simpson weights for `n >= 2` equispaced points with spacing `h`.
pub fn simpson_weights_uniform(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    match n {
        0 | 1 => return w,
        2 => {
            w[0] = 0.5 * h;
            w[1] = 0.5 * h;
            return w;
        }
        3 => {
            w[0] = h / 3.0;
            w[1] = 4.0 * h / 3.0;
            w[2] = h / 3.0;
            return w;
        }
        _ => {}
    }
    let simpson_end = if n % 2 == 1 { n - 1 } else { n - 4 };
    let mut i = 0;
    while i < simpson_end {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
        i += 2;
    }
    if n % 2 == 0 {
        let k = n - 4;
        let f = 3.0 * h / 8.0;
        w[k] += f;
        w[k + 1] += 3.0 * f;
        w[k + 2] += 3.0 * f;
        w[k + 3] += f;
    }
    w
}
