//! Dense complex matrices, used for frequency-domain quantities.

use super::matrix::Matrix;
use super::svd::svd;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Assemble from separate real and imaginary parts (matching shapes).
    pub fn from_parts(re: &Matrix, im: &Matrix) -> Result<Self> {
        if re.shape() != im.shape() {
            return Err(Error::ShapeMismatch {
                op: "complex from_parts",
                left: re.shape(),
                right: im.shape(),
            });
        }
        Ok(Self::from_fn(re.rows(), re.cols(), |i, j| {
            Complex64::new(re[(i, j)], im[(i, j)])
        }))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value, computed through the real embedding
    /// [[Re, -Im], [Im, Re]] whose singular values are those of the complex
    /// matrix each repeated twice.
    pub fn sigma_max(&self) -> Result<f64> {
        if self.rows == 0 || self.cols == 0 {
            return Ok(0.0);
        }
        let embed = Matrix::from_fn(2 * self.rows, 2 * self.cols, |i, j| {
            let z = self[(i % self.rows, j % self.cols)];
            match (i >= self.rows, j >= self.cols) {
                (false, false) | (true, true) => z.re,
                (false, true) => -z.im,
                (true, false) => z.im,
            }
        });
        Ok(svd(&embed)?.s[0])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl std::ops::Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}
