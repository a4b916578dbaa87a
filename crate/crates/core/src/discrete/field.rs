use crate::em::Vec3;
use crate::error::{Error, Result};

use super::Grid3;

/// Common view of gridded data as a flat, component-major `f64` buffer.
pub trait GridField: Clone + Sized {
    const COMPONENTS: usize;

    fn data(&self) -> &[f64];
    fn data_mut(&mut self) -> &mut [f64];
    fn from_data(data: Vec<f64>) -> Self;

    fn zeros(grid: &Grid3) -> Self {
        Self::from_data(vec![0.0; grid.len() * Self::COMPONENTS])
    }

    fn check(&self, grid: &Grid3) -> Result<()> {
        let expected = grid.len() * Self::COMPONENTS;
        if self.data().len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                got: self.data().len(),
            });
        }
        Ok(())
    }

    fn ensure_finite(&self, what: &'static str) -> Result<()> {
        if self.data().iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(what))
        }
    }

    /// `self += a * other`
    fn axpy(&mut self, a: f64, other: &Self) {
        for (s, o) in self.data_mut().iter_mut().zip(other.data()) {
            *s += a * o;
        }
    }

    fn scaled(&self, a: f64) -> Self {
        Self::from_data(self.data().iter().map(|v| a * v).collect())
    }

    fn max_abs(&self) -> f64 {
        self.data().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    data: Vec<f64>,
}

impl ScalarField {
    pub fn from_fn(grid: &Grid3, f: impl Fn(Vec3) -> f64) -> Self {
        Self {
            data: (0..grid.len()).map(|i| f(grid.position(i))).collect(),
        }
    }

    pub fn constant(grid: &Grid3, v: f64) -> Self {
        Self {
            data: vec![v; grid.len()],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

impl std::ops::Index<usize> for ScalarField {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl std::ops::IndexMut<usize> for ScalarField {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

impl GridField for ScalarField {
    const COMPONENTS: usize = 1;
    fn data(&self) -> &[f64] {
        &self.data
    }
    fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
    fn from_data(data: Vec<f64>) -> Self {
        Self { data }
    }
}

/// Vector field stored as three contiguous component arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    data: Vec<f64>,
}

impl VectorField {
    pub fn from_fn(grid: &Grid3, f: impl Fn(Vec3) -> Vec3) -> Self {
        let n = grid.len();
        let mut data = vec![0.0; 3 * n];
        for i in 0..n {
            let v = f(grid.position(i));
            data[i] = v.x;
            data[n + i] = v.y;
            data[2 * n + i] = v.z;
        }
        Self { data }
    }

    pub fn from_components(x: Vec<f64>, y: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() != z.len() {
            return Err(Error::ShapeMismatch {
                expected: x.len(),
                got: y.len().max(z.len()),
            });
        }
        let mut data = x;
        data.extend(y);
        data.extend(z);
        Ok(Self { data })
    }

    pub fn uniform(grid: &Grid3, v: Vec3) -> Self {
        Self::from_fn(grid, |_| v)
    }

    /// Number of grid points.
    pub fn points(&self) -> usize {
        self.data.len() / 3
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.points();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.points();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn component_field(&self, c: usize) -> ScalarField {
        ScalarField::from_data(self.component(c).to_vec())
    }

    pub fn get(&self, i: usize) -> Vec3 {
        let n = self.points();
        Vec3::new(self.data[i], self.data[n + i], self.data[2 * n + i])
    }

    pub fn set(&mut self, i: usize, v: Vec3) {
        let n = self.points();
        self.data[i] = v.x;
        self.data[n + i] = v.y;
        self.data[2 * n + i] = v.z;
    }

    /// Applies `f` point-wise to build a new field.
    pub fn map(&self, f: impl Fn(Vec3) -> Vec3) -> Self {
        let n = self.points();
        let mut out = Self {
            data: vec![0.0; 3 * n],
        };
        for i in 0..n {
            out.set(i, f(self.get(i)));
        }
        out
    }

    pub fn mean(&self) -> Vec3 {
        let n = self.points() as f64;
        Vec3::new(
            self.component(0).iter().sum::<f64>() / n,
            self.component(1).iter().sum::<f64>() / n,
            self.component(2).iter().sum::<f64>() / n,
        )
    }

    /// Largest point-wise Euclidean norm.
    pub fn max_norm(&self) -> f64 {
        (0..self.points()).fold(0.0, |m, i| m.max(self.get(i).norm()))
    }
}

impl GridField for VectorField {
    const COMPONENTS: usize = 3;
    fn data(&self) -> &[f64] {
        &self.data
    }
    fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
    fn from_data(data: Vec<f64>) -> Self {
        assert_eq!(data.len() % 3, 0, "vector field data must hold 3 components");
        Self { data }
    }
}

/// Point-wise `a . b`.
pub fn dot_fields(a: &VectorField, b: &VectorField) -> ScalarField {
    ScalarField::from_data((0..a.points()).map(|i| a.get(i).dot(b.get(i))).collect())
}

/// Point-wise `v x f` for a constant vector `v`.
pub fn cross_const(v: Vec3, f: &VectorField) -> VectorField {
    f.map(|x| v.cross(x))
}
