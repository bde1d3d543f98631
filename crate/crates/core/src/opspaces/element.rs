use alloc::format;
use alloc::vec::Vec;

use super::OsDescriptor;
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, C64, ZERO};

/// Element `[x_ij]` of `M_n(X)` in coordinate form.
#[derive(Clone, Debug, PartialEq)]
pub struct OsElement {
    space: OsDescriptor,
    n: usize,
    coords: Vec<CMatrix>,
}

impl OsElement {
    pub fn new(space: OsDescriptor, n: usize, coords: Vec<CMatrix>) -> Result<Self> {
        space.validate()?;
        if n == 0 {
            return Err(Error::Shape("matrix level n must be >= 1".into()));
        }
        if coords.len() != space.dim() {
            return Err(Error::Shape(format!(
                "{} coordinate matrices for {}",
                coords.len(),
                space.name()
            )));
        }
        for (k, a) in coords.iter().enumerate() {
            if a.rows() != n || a.cols() != n {
                return Err(Error::Shape(format!(
                    "coordinate {k} is {}x{}, expected {n}x{n}",
                    a.rows(),
                    a.cols()
                )));
            }
            if !a.is_finite() {
                return Err(Error::NonFinite("coordinate matrix"));
            }
        }
        Ok(Self { space, n, coords })
    }

    pub fn zeros(space: OsDescriptor, n: usize) -> Self {
        let coords = (0..space.dim()).map(|_| CMatrix::zeros(n, n)).collect();
        Self { space, n, coords }
    }

    /// Build from entry vectors: `entry(i, j)` returns the coordinates of
    /// `x_ij` in `X`.
    pub fn from_entries(space: OsDescriptor, n: usize, mut entry: impl FnMut(usize, usize) -> Vec<C64>) -> Result<Self> {
        let d = space.dim();
        let mut coords: Vec<CMatrix> = (0..d).map(|_| CMatrix::zeros(n, n)).collect();
        for i in 0..n {
            for j in 0..n {
                let v = entry(i, j);
                if v.len() != d {
                    return Err(Error::Shape(format!("entry ({i},{j}) has {} coordinates, expected {d}", v.len())));
                }
                for (k, z) in v.into_iter().enumerate() {
                    coords[k][(i, j)] = z;
                }
            }
        }
        Self::new(space, n, coords)
    }

    /// Flattened coordinates, index `k * n² + i * n + j`.
    pub fn from_flat(space: OsDescriptor, n: usize, flat: &[C64]) -> Result<Self> {
        let d = space.dim();
        if flat.len() != d * n * n {
            return Err(Error::Shape(format!("{} flat coordinates for d={d}, n={n}", flat.len())));
        }
        let coords = flat
            .chunks(n * n)
            .map(|c| CMatrix::from_vec(n, n, c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, n, coords)
    }

    pub fn space(&self) -> OsDescriptor {
        self.space
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[CMatrix] {
        &self.coords
    }

    pub fn flat(&self) -> Vec<C64> {
        self.coords.iter().flat_map(|a| a.as_slice().iter().copied()).collect()
    }

    /// Coordinates of the entry `x_ij ∈ X`.
    pub fn entry(&self, i: usize, j: usize) -> Vec<C64> {
        self.coords.iter().map(|a| a[(i, j)]).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(CMatrix::is_zero)
    }

    pub fn is_real(&self) -> bool {
        self.coords.iter().all(CMatrix::is_real)
    }

    /// Same coordinates viewed in another space of the same dimension.
    pub fn reinterpret(&self, space: OsDescriptor) -> Result<Self> {
        Self::new(space, self.n, self.coords.clone())
    }

    /// `[x_ji]`: transpose at the outer matrix level.
    pub fn outer_transpose(&self) -> Self {
        Self {
            space: self.space,
            n: self.n,
            coords: self.coords.iter().map(CMatrix::transpose).collect(),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.space != other.space || self.n != other.n {
            return Err(Error::Shape(format!(
                "{} at n={} vs {} at n={}",
                self.space.name(),
                self.n,
                other.space.name(),
                other.n
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { coords, ..self.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { coords, ..self.clone() })
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            space: self.space,
            n: self.n,
            coords: self.coords.iter().map(|a| a.scale(s)).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Block-diagonal `diag(self, other)` in `M_{n+m}(X)`.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::Shape("direct sum of elements from different spaces".into()));
        }
        let (n, m) = (self.n, other.n);
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| {
                CMatrix::from_fn(n + m, n + m, |i, j| {
                    if i < n && j < n {
                        a[(i, j)]
                    } else if i >= n && j >= n {
                        b[(i - n, j - n)]
                    } else {
                        ZERO
                    }
                })
            })
            .collect();
        Ok(Self {
            space: self.space,
            n: n + m,
            coords,
        })
    }

    /// Apply an `X`-level map entrywise (the amplification `f_n`).
    pub fn amplify<E>(
        &self,
        target: OsDescriptor,
        mut f: impl FnMut(&[C64]) -> core::result::Result<Vec<C64>, E>,
    ) -> core::result::Result<Self, E>
    where
        E: From<Error>,
    {
        let n = self.n;
        let d = target.dim();
        let mut coords: Vec<CMatrix> = (0..d).map(|_| CMatrix::zeros(n, n)).collect();
        for i in 0..n {
            for j in 0..n {
                let y = f(&self.entry(i, j))?;
                if y.len() != d {
                    return Err(Error::Shape(format!("map returned {} coordinates, expected {d}", y.len())).into());
                }
                for (k, z) in y.into_iter().enumerate() {
                    coords[k][(i, j)] = z;
                }
            }
        }
        Ok(Self::new(target, n, coords)?)
    }
}
