use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::Window;

/// A finite, ordered point configuration stored as flat coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PointConfig<T> {
    dim: usize,
    coords: Vec<T>,
}

impl<T: Real> PointConfig<T> {
    pub fn new(dim: usize) -> Self {
        PointConfig {
            dim,
            coords: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        PointConfig {
            dim,
            coords: Vec::with_capacity(n * dim),
        }
    }

    pub fn from_points<P: AsRef<[T]>>(dim: usize, points: &[P]) -> Result<Self> {
        let mut c = PointConfig::with_capacity(dim, points.len());
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::param(format!("point of length {} in a {dim}-dimensional configuration", p.len())));
            }
            c.coords.extend_from_slice(p);
        }
        Ok(c)
    }

    /// Checks that every point lies in `w`.
    pub fn in_window(&self, w: &Window<T>) -> bool {
        self.dim == w.dim() && self.iter().all(|p| w.contains(p))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, T> {
        self.coords.chunks_exact(self.dim.max(1))
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn push(&mut self, x: &[T]) {
        debug_assert_eq!(x.len(), self.dim);
        self.coords.extend_from_slice(x);
    }

    /// Removes point `i` by moving the last point into its slot.
    pub fn swap_remove(&mut self, i: usize) {
        let n = self.len();
        let d = self.dim;
        if i + 1 != n {
            for k in 0..d {
                self.coords[i * d + k] = self.coords[(n - 1) * d + k];
            }
        }
        self.coords.truncate((n - 1) * d);
    }

    /// Removes the first point bit-identical to `x`; returns whether one was found.
    pub fn remove_exact(&mut self, x: &[T]) -> bool {
        match self.position_exact(x) {
            Some(i) => {
                self.swap_remove(i);
                true
            }
            None => false,
        }
    }

    pub fn position_exact(&self, x: &[T]) -> Option<usize> {
        self.iter().position(|p| p == x)
    }

    /// `self + delta_x`.
    pub fn with_point(&self, x: &[T]) -> Self {
        let mut c = self.clone();
        c.push(x);
        c
    }

    /// `self - delta_{x_i}`.
    pub fn without(&self, i: usize) -> Self {
        let mut c = PointConfig::with_capacity(self.dim, self.len().saturating_sub(1));
        for (j, p) in self.iter().enumerate() {
            if j != i {
                c.push(p);
            }
        }
        c
    }

    /// Number of points within distance `r` of `x` (closed ball).
    pub fn count_within(&self, w: &Window<T>, x: &[T], r: T) -> usize {
        let r2 = r * r;
        self.iter().filter(|p| w.dist2(x, p) <= r2).count()
    }

    /// Smallest pairwise distance, or `+inf` for fewer than two points.
    pub fn min_pair_distance(&self, w: &Window<T>) -> T {
        let n = self.len();
        let mut best = T::infinity();
        for i in 0..n {
            for j in i + 1..n {
                best = best.min(w.dist2(self.point(i), self.point(j)));
            }
        }
        best.sqrt()
    }

    pub fn to_points(&self) -> Vec<Vec<T>> {
        self.iter().map(|p| p.to_vec()).collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
struct RawConfig<T> {
    dim: usize,
    points: Vec<Vec<T>>,
}

impl<T: Real> Serialize for PointConfig<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawConfig {
            dim: self.dim,
            points: self.to_points(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for PointConfig<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawConfig::<T>::deserialize(d)?;
        PointConfig::from_points(raw.dim, &raw.points).map_err(serde::de::Error::custom)
    }
}
