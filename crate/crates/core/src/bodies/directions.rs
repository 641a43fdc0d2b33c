use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default direction count per dimension.
pub fn default_direction_count(dim: usize) -> usize {
    match dim {
        1 => 2,
        2 => 720,
        _ => 2048,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// `{+1, -1}`.
    Line,
    /// Equispaced angles `2πk/m`.
    Circle,
    /// Fibonacci sphere.
    Fibonacci,
}

/// Unit directions with quadrature weights for the uniform measure on the sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    pub dim: usize,
    pub layout: Layout,
    pub directions: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl DirectionSet {
    pub fn default_for(dim: usize) -> Result<Self> {
        Self::with_count(dim, default_direction_count(dim))
    }

    pub fn with_count(dim: usize, m: usize) -> Result<Self> {
        match dim {
            1 => Ok(Self::line()),
            2 => Self::circle(m),
            3 => Self::fibonacci(m),
            _ => Err(Error::input(format!("direction sets exist for dimensions 1..=3, got {dim}"))),
        }
    }

    pub fn line() -> Self {
        DirectionSet { dim: 1, layout: Layout::Line, directions: vec![vec![1.0], vec![-1.0]], weights: vec![0.5, 0.5] }
    }

    pub fn circle(m: usize) -> Result<Self> {
        if m < 8 {
            return Err(Error::input("need at least 8 directions in the plane"));
        }
        let directions = (0..m)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / m as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
        Ok(DirectionSet { dim: 2, layout: Layout::Circle, directions, weights: vec![1.0 / m as f64; m] })
    }

    pub fn fibonacci(m: usize) -> Result<Self> {
        if m < 32 {
            return Err(Error::input("need at least 32 directions on the sphere"));
        }
        let golden = PI * (3.0 - 5f64.sqrt());
        let directions = (0..m)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / m as f64;
                let r = (1.0 - z * z).sqrt();
                let a = golden * i as f64;
                vec![r * a.cos(), r * a.sin(), z]
            })
            .collect();
        Ok(DirectionSet { dim: 3, layout: Layout::Fibonacci, directions, weights: vec![1.0 / m as f64; m] })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Largest angle between any direction and its nearest neighbour (an estimate of resolution).
    pub fn angular_gap(&self) -> f64 {
        match self.layout {
            Layout::Line => PI,
            Layout::Circle => 2.0 * PI / self.len() as f64,
            Layout::Fibonacci => (4.0 * PI / self.len() as f64).sqrt() * 1.1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_vectors_and_normalized_weights() {
        for dim in 1..=3 {
            let d = DirectionSet::default_for(dim).unwrap();
            for u in &d.directions {
                let n: f64 = u.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((n - 1.0).abs() < 1e-12);
            }
            assert!((d.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fibonacci_is_balanced() {
        let d = DirectionSet::fibonacci(2048).unwrap();
        let mean: Vec<f64> = (0..3).map(|a| d.directions.iter().map(|u| u[a]).sum::<f64>() / 2048.0).collect();
        assert!(mean.iter().all(|m| m.abs() < 1e-3));
        let second = d.directions.iter().map(|u| u[2] * u[2]).sum::<f64>() / 2048.0;
        assert!((second - 1.0 / 3.0).abs() < 1e-3);
    }
}
