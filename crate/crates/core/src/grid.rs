//! Complex 2D grids and look stacks.
//!
//! All grids are azimuth-major row-major: element (az, rg) lives at
//! `data[az * n_range + rg]`. Shapes are always quoted as (azimuth, range).

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// A 2D complex array over (azimuth, range).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    n_azimuth: usize,
    n_range: usize,
    data: Vec<Complex64>,
}

impl ComplexGrid {
    pub fn zeros(n_azimuth: usize, n_range: usize) -> Self {
        Self {
            n_azimuth,
            n_range,
            data: vec![Complex64::new(0.0, 0.0); n_azimuth * n_range],
        }
    }

    pub fn from_data(n_azimuth: usize, n_range: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n_azimuth * n_range {
            return Err(Error::ShapeMismatch {
                expected: (n_azimuth, n_range),
                got: (data.len(), 1),
            });
        }
        Ok(Self {
            n_azimuth,
            n_range,
            data,
        })
    }

    /// Grid of standard circular complex Gaussian entries.
    pub fn random<R: Rng>(n_azimuth: usize, n_range: usize, rng: &mut R) -> Self {
        use rand_distr::StandardNormal;
        let data = (0..n_azimuth * n_range)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) / std::f64::consts::SQRT_2
            })
            .collect();
        Self {
            n_azimuth,
            n_range,
            data,
        }
    }

    #[inline]
    pub fn n_azimuth(&self) -> usize {
        self.n_azimuth
    }

    #[inline]
    pub fn n_range(&self) -> usize {
        self.n_range
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.n_azimuth, self.n_range)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, az: usize, rg: usize) -> Complex64 {
        self.data[az * self.n_range + rg]
    }

    #[inline]
    pub fn set(&mut self, az: usize, rg: usize, v: Complex64) {
        self.data[az * self.n_range + rg] = v;
    }

    #[inline]
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let data = self.data.iter().map(|v| v * factor).collect();
        Self {
            n_azimuth: self.n_azimuth,
            n_range: self.n_range,
            data,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_shape(self, other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            n_azimuth: self.n_azimuth,
            n_range: self.n_range,
            data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same_shape(self, other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            n_azimuth: self.n_azimuth,
            n_range: self.n_range,
            data,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

fn check_same_shape(a: &ComplexGrid, b: &ComplexGrid) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.shape(),
            got: b.shape(),
        });
    }
    Ok(())
}

/// Hermitian inner product sum conj(a_i) * b_i over all cells.
pub fn inner_product(a: &ComplexGrid, b: &ComplexGrid) -> Result<Complex64> {
    check_same_shape(a, b)?;
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Ordered collection of L complex subimages, each (n_azimuth_full / L) x n_range.
#[derive(Debug, Clone, PartialEq)]
pub struct LookStack {
    looks: Vec<ComplexGrid>,
}

impl LookStack {
    pub fn new(looks: Vec<ComplexGrid>) -> Result<Self> {
        if looks.is_empty() {
            return Err(Error::InvalidScene("look stack must hold at least one look".into()));
        }
        let shape = looks[0].shape();
        for l in &looks[1..] {
            if l.shape() != shape {
                return Err(Error::ShapeMismatch {
                    expected: shape,
                    got: l.shape(),
                });
            }
        }
        Ok(Self { looks })
    }

    pub fn zeros(look_count: usize, n_azimuth_sub: usize, n_range: usize) -> Self {
        Self {
            looks: (0..look_count)
                .map(|_| ComplexGrid::zeros(n_azimuth_sub, n_range))
                .collect(),
        }
    }

    #[inline]
    pub fn look_count(&self) -> usize {
        self.looks.len()
    }

    #[inline]
    pub fn look(&self, i: usize) -> &ComplexGrid {
        &self.looks[i]
    }

    #[inline]
    pub fn look_mut(&mut self, i: usize) -> &mut ComplexGrid {
        &mut self.looks[i]
    }

    #[inline]
    pub fn looks(&self) -> &[ComplexGrid] {
        &self.looks
    }

    /// Shape of each subimage.
    pub fn look_shape(&self) -> (usize, usize) {
        self.looks[0].shape()
    }

    pub fn norm_sq(&self) -> f64 {
        self.looks.iter().map(|l| l.norm_sq()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            looks: self.looks.iter().map(|l| l.scaled(factor)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.look_count() != other.look_count() {
            return Err(Error::ShapeMismatch {
                expected: (self.look_count(), 0),
                got: (other.look_count(), 0),
            });
        }
        let looks = self
            .looks
            .iter()
            .zip(&other.looks)
            .map(|(a, b)| {
                check_same_shape(a, b)?;
                let data = a
                    .data()
                    .iter()
                    .zip(b.data())
                    .map(|(&x, &y)| f(x, y))
                    .collect();
                ComplexGrid::from_data(a.n_azimuth(), a.n_range(), data)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { looks })
    }
}

/// Inner product over an entire look stack.
pub fn stack_inner_product(a: &LookStack, b: &LookStack) -> Result<Complex64> {
    if a.look_count() != b.look_count() {
        return Err(Error::ShapeMismatch {
            expected: (a.look_count(), 0),
            got: (b.look_count(), 0),
        });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, y) in a.looks().iter().zip(b.looks()) {
        acc += inner_product(x, y)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inner_product_of_self_is_norm_sq() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = ComplexGrid::random(4, 5, &mut rng);
        let p = inner_product(&g, &g).unwrap();
        assert!((p.re - g.norm_sq()).abs() < 1e-12 * g.norm_sq());
        assert!(p.im.abs() < 1e-12);
        assert!(p.re >= 0.0);
    }

    #[test]
    fn inner_product_conjugate_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = ComplexGrid::random(3, 3, &mut rng);
        let b = ComplexGrid::random(3, 3, &mut rng);
        let ab = inner_product(&a, &b).unwrap();
        let ba = inner_product(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-12);
    }

    #[test]
    fn inner_product_with_zero() {
        let z = ComplexGrid::zeros(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = ComplexGrid::random(2, 2, &mut rng);
        assert_eq!(inner_product(&z, &b).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn inner_product_rejects_shape_mismatch() {
        let a = ComplexGrid::zeros(2, 3);
        let b = ComplexGrid::zeros(3, 2);
        assert!(inner_product(&a, &b).is_err());
    }

    #[test]
    fn look_stack_rejects_mixed_shapes() {
        let looks = vec![ComplexGrid::zeros(2, 3), ComplexGrid::zeros(2, 4)];
        assert!(LookStack::new(looks).is_err());
    }
}
