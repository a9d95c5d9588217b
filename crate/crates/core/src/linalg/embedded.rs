//! Vectors in `R^{dT}` viewed as `T` blocks of `R^d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vector in `R^{dT}` made of `T` consecutive blocks of length `d`.
///
/// Rounds are 1-based: block `t` occupies flat indices `d(t-1)..dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedVector {
    rounds: usize,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddedVector {
    pub fn zeros(rounds: usize, dim: usize) -> Self {
        Self {
            rounds,
            dim,
            data: vec![0.0; rounds * dim],
        }
    }

    pub fn from_flat(rounds: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rounds * dim {
            return Err(Error::DimensionMismatch {
                expected: rounds * dim,
                actual: data.len(),
                context: "embedded vector length",
            });
        }
        Ok(Self { rounds, dim, data })
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Block `t`, 1-based; panics outside `1..=rounds`.
    pub fn block(&self, t: usize) -> &[f64] {
        assert!(t >= 1 && t <= self.rounds, "block {t} out of 1..={}", self.rounds);
        &self.data[(t - 1) * self.dim..t * self.dim]
    }

    pub fn block_mut(&mut self, t: usize) -> &mut [f64] {
        assert!(t >= 1 && t <= self.rounds, "block {t} out of 1..={}", self.rounds);
        &mut self.data[(t - 1) * self.dim..t * self.dim]
    }

    /// Coordinate `j` (0-based) of every block, i.e. one scalar sequence of length `T`.
    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.data.iter().skip(j).step_by(self.dim).copied().collect()
    }

    pub fn set_coordinate(&mut self, j: usize, values: &[f64]) {
        debug_assert_eq!(values.len(), self.rounds);
        for (slot, v) in self.data.iter_mut().skip(j).step_by(self.dim).zip(values) {
            *slot = *v;
        }
    }

    pub fn dot(&self, other: &EmbeddedVector) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn add_assign(&mut self, other: &EmbeddedVector) -> Result<()> {
        self.check_same_shape(other)?;
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rounds: self.rounds,
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn sub(&self, other: &EmbeddedVector) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rounds: self.rounds,
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    fn check_same_shape(&self, other: &EmbeddedVector) -> Result<()> {
        if self.rounds != other.rounds || self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: other.len(),
                context: "embedded vector shapes differ",
            });
        }
        Ok(())
    }
}

/// A comparator sequence `u_1, ..., u_T` in `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ComparatorSequence {
    points: Vec<Vec<f64>>,
}

impl ComparatorSequence {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Precondition("comparator sequence must be nonempty".into()))?;
        if dim == 0 {
            return Err(Error::Precondition("comparator dimension must be positive".into()));
        }
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.len(),
                context: "comparator point dimension",
            });
        }
        Ok(Self { points })
    }

    /// The static sequence `u, u, ..., u`.
    pub fn constant(u: &[f64], rounds: usize) -> Result<Self> {
        Self::new(vec![u.to_vec(); rounds])
    }

    pub fn zeros(rounds: usize, dim: usize) -> Result<Self> {
        Self::new(vec![vec![0.0; dim]; rounds])
    }

    /// Scalar sequence (`d = 1`).
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|v| vec![*v]).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// `u_t`, 1-based.
    pub fn point(&self, t: usize) -> &[f64] {
        &self.points[t - 1]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Extends to `rounds` by repeating the last point, which leaves every
    /// path-length unchanged.
    pub fn padded_to(&self, rounds: usize) -> Self {
        let mut points = self.points.clone();
        let last = points[points.len() - 1].clone();
        while points.len() < rounds {
            points.push(last.clone());
        }
        Self { points }
    }

    /// `sum_t ||u_t - u_{t+1}||`.
    pub fn path_length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| dist_sq(&w[0], &w[1]).sqrt())
            .sum()
    }

    /// `sum_t ||u_t - u_{t+1}||^2`.
    pub fn squared_path_length(&self) -> f64 {
        self.points.windows(2).map(|w| dist_sq(&w[0], &w[1])).sum()
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for p in &self.points {
            m.iter_mut().zip(p).for_each(|(a, b)| *a += b);
        }
        let n = self.len() as f64;
        m.iter_mut().for_each(|a| *a /= n);
        m
    }

    /// `max_t ||u_t||`.
    pub fn max_norm(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<Vec<f64>>> for ComparatorSequence {
    type Error = Error;

    fn try_from(points: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(points)
    }
}

impl From<ComparatorSequence> for Vec<Vec<f64>> {
    fn from(seq: ComparatorSequence) -> Self {
        seq.points
    }
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

/// `e_t ⊗ g`: the round-`t` loss placed in block `t` of `R^{dT}` (`t` is 1-based).
pub fn embed_loss(t: usize, g: &[f64], rounds: usize) -> Result<EmbeddedVector> {
    if t == 0 || t > rounds {
        return Err(Error::IndexOutOfRange {
            index: t,
            bound: rounds,
            context: "embed_loss round",
        });
    }
    let mut out = EmbeddedVector::zeros(rounds, g.len());
    out.block_mut(t).copy_from_slice(g);
    Ok(out)
}

/// Concatenates `u_1, ..., u_T` into one vector of `R^{dT}`.
pub fn embed_comparator(seq: &ComparatorSequence) -> EmbeddedVector {
    let data = seq.points().iter().flatten().copied().collect();
    EmbeddedVector {
        rounds: seq.len(),
        dim: seq.dim(),
        data,
    }
}
