use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Real;

/// Which side of the transform a field's samples live on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    Physical,
    Frequency,
}

impl Space {
    pub fn flipped(self) -> Self {
        match self {
            Space::Physical => Space::Frequency,
            Space::Frequency => Space::Physical,
        }
    }
}

/// Complex samples on the nodes of a [`Grid`] (physical nodes or dual
/// frequency nodes, according to `space`).
#[derive(Debug, Clone)]
pub struct Field<T: Real> {
    grid: Arc<Grid<T>>,
    values: Vec<Complex<T>>,
    space: Space,
}

impl<T: Real> Field<T> {
    pub fn zeros(grid: &Arc<Grid<T>>, space: Space) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![Complex::new(T::zero(), T::zero()); grid.len()],
            space,
        }
    }

    pub fn from_values(grid: &Arc<Grid<T>>, values: Vec<Complex<T>>, space: Space) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Usage(format!(
                "field has {} values but the grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            values,
            space,
        })
    }

    /// Samples `f(x′, x_{d+1})` at every physical node.
    pub fn from_fn<F>(grid: &Arc<Grid<T>>, f: F) -> Self
    where
        F: Fn(&[T]) -> Complex<T>,
    {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self {
            grid: Arc::clone(grid),
            values,
            space: Space::Physical,
        }
    }

    /// Samples `F(λ′, λ_{d+1})` at every frequency node.
    pub fn from_freq_fn<F>(grid: &Arc<Grid<T>>, f: F) -> Self
    where
        F: Fn(&[T]) -> Complex<T>,
    {
        let values = (0..grid.len()).map(|i| f(&grid.freq_point(i))).collect();
        Self {
            grid: Arc::clone(grid),
            values,
            space: Space::Frequency,
        }
    }

    #[inline]
    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    #[inline]
    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    #[inline]
    pub fn space(&self) -> Space {
        self.space
    }

    pub(crate) fn with_values(&self, values: Vec<Complex<T>>, space: Space) -> Self {
        debug_assert_eq!(values.len(), self.grid.len());
        Self {
            grid: Arc::clone(&self.grid),
            values,
            space,
        }
    }

    pub fn expect_space(&self, space: Space, op: &str) -> Result<()> {
        if self.space != space {
            return Err(Error::Usage(format!(
                "{op} expects a {space:?}-space field, got {:?}",
                self.space
            )));
        }
        Ok(())
    }

    /// Same grid and same space.
    pub fn check_compatible(&self, other: &Field<T>) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::Usage("fields live on different grids".into()));
        }
        if self.space != other.space {
            return Err(Error::Usage(format!(
                "space mismatch: {:?} vs {:?}",
                self.space, other.space
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        self.map(|v| v * c)
    }

    pub fn map<F: Fn(Complex<T>) -> Complex<T>>(&self, f: F) -> Self {
        self.with_values(self.values.iter().map(|&v| f(v)).collect(), self.space)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex<T>, other: &Field<T>, b: Complex<T>) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| x * a + y * b)
            .collect();
        Ok(self.with_values(values, self.space))
    }

    pub fn add(&self, other: &Field<T>) -> Result<Self> {
        let one = Complex::new(T::one(), T::zero());
        self.combine(one, other, one)
    }

    pub fn sub(&self, other: &Field<T>) -> Result<Self> {
        let one = Complex::new(T::one(), T::zero());
        self.combine(one, other, -one)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Field<T>) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&x, &y)| x * y).collect();
        Ok(self.with_values(values, self.space))
    }

    /// Largest pointwise `|self − other|`.
    pub fn max_abs_diff(&self, other: &Field<T>) -> Result<T> {
        self.check_compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max))
    }

    pub fn sup(&self) -> T {
        self.values.iter().map(|v| v.norm()).fold(T::zero(), T::max)
    }
}
