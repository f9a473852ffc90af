//! Dense square complex matrices sized for reduced density operators.
//!
//! Storage is row-major. The free functions at the bottom work on raw
//! slices so the HEOM kernel can operate directly on the flat ADO pool.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::linalg;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend(row.iter().map(|&x| C64::new(x, 0.0)));
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                data.push(f(a, b));
            }
        }
        Self { dim, data }
    }

    /// The projector |j⟩⟨j|.
    pub fn projector(dim: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(j, j)] = C64::new(1.0, 0.0);
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |a, b| self[(b, a)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self[(i, i)].re).collect()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        matmul_into(&self.data, &other.data, &mut out.data, n);
        Ok(out)
    }

    /// [A, B] = AB − BA.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = Self::zeros(self.dim);
        commutator_into(&self.data, &other.data, &mut out.data, self.dim);
        Ok(out)
    }

    /// {A, B} = AB + BA.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        let ab = self.matmul(other)?;
        let ba = other.matmul(self)?;
        ab.add(&ba)
    }

    /// max |A_ab − B_ab|.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// max |A − A†| over all elements.
    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.data, self.dim)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Eigenvalues of the Hermitian part (A + A†)/2 in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let n = self.dim;
        // [[Re, −Im], [Im, Re]] is real symmetric with each eigenvalue of
        // the Hermitian matrix appearing twice.
        let m = 2 * n;
        let mut sym = vec![0.0; m * m];
        for a in 0..n {
            for b in 0..n {
                let h = (self[(a, b)] + self[(b, a)].conj()) * 0.5;
                sym[a * m + b] = h.re;
                sym[(a + n) * m + (b + n)] = h.re;
                sym[(a + n) * m + b] = h.im;
                sym[a * m + (b + n)] = -h.im;
            }
        }
        let mut eig = linalg::symmetric_eigenvalues(&mut sym, m);
        eig.sort_by(f64::total_cmp);
        eig.into_iter().step_by(2).collect()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (a, b): (usize, usize)) -> &C64 {
        &self.data[a * self.dim + b]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (a, b): (usize, usize)) -> &mut C64 {
        &mut self.data[a * self.dim + b]
    }
}

pub fn matmul_into(a: &[C64], b: &[C64], out: &mut [C64], n: usize) {
    for r in 0..n {
        for c in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += a[r * n + k] * b[k * n + c];
            }
            out[r * n + c] = acc;
        }
    }
}

/// Writes AB − BA into `out`.
pub fn commutator_into(a: &[C64], b: &[C64], out: &mut [C64], n: usize) {
    for r in 0..n {
        for c in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += a[r * n + k] * b[k * n + c] - b[r * n + k] * a[k * n + c];
            }
            out[r * n + c] = acc;
        }
    }
}

pub fn hermiticity_deviation(m: &[C64], n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in a..n {
            worst = worst.max((m[a * n + b] - m[b * n + a].conj()).norm());
        }
    }
    worst
}
