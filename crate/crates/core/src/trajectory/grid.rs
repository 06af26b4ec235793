use std::f64::consts::PI;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bucket sizes of a product search space; paths are ordered lexicographically
/// with the first coordinate most significant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::NoBuckets);
        }
        if sizes.contains(&0) {
            return Err(Error::EmptyRegister);
        }
        Ok(Self(sizes))
    }

    pub fn sizes(&self) -> &[usize] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    /// Number of paths, saturating at `u128::MAX`.
    pub fn total(&self) -> u128 {
        self.0
            .iter()
            .try_fold(1u128, |acc, &n| acc.checked_mul(n as u128))
            .unwrap_or(u128::MAX)
    }

    pub fn check_cap(&self, cap: u128) -> Result<usize> {
        let size = self.total();
        if size > cap || size > usize::MAX as u128 {
            return Err(Error::CapExceeded { size, cap });
        }
        Ok(size as usize)
    }

    pub fn contains(&self, path: &[usize]) -> bool {
        path.len() == self.k() && path.iter().zip(&self.0).all(|(&y, &n)| y < n)
    }

    /// Path with lexicographic rank `index`.
    pub fn path_at(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.k()];
        for (slot, &n) in out.iter_mut().zip(&self.0).rev() {
            *slot = index % n;
            index /= n;
        }
        out
    }

    pub fn index_of(&self, path: &[usize]) -> usize {
        path.iter().zip(&self.0).fold(0, |acc, (&y, &n)| acc * n + y)
    }
}

/// One ordinate index per column.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path(pub Vec<usize>);

impl Deref for Path {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Path {
    fn from(v: Vec<usize>) -> Self {
        Path(v)
    }
}

/// Discretized physical space: free columns between two fixed boundary points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    columns: Vec<Vec<f64>>,
    abscissae: Vec<f64>,
    start: (f64, f64),
    end: (f64, f64),
    y_range: (f64, f64),
    #[serde(skip)]
    shape: Shape,
}

impl Grid {
    pub fn new(
        columns: Vec<Vec<f64>>,
        abscissae: Vec<f64>,
        start: (f64, f64),
        end: (f64, f64),
        y_range: (f64, f64),
    ) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::NoBuckets);
        }
        if columns.len() != abscissae.len() {
            return Err(Error::InvalidGrid(format!(
                "{} columns but {} abscissae",
                columns.len(),
                abscissae.len()
            )));
        }
        let xs: Vec<f64> = std::iter::once(start.0)
            .chain(abscissae.iter().copied())
            .chain(std::iter::once(end.0))
            .collect();
        if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(
                "abscissae must be finite and strictly increasing between the boundary points"
                    .into(),
            ));
        }
        if !(y_range.0 < y_range.1) {
            return Err(Error::InvalidGrid(format!(
                "empty ordinate range {y_range:?}"
            )));
        }
        for (i, col) in columns.iter().enumerate() {
            if col.is_empty() {
                return Err(Error::InvalidGrid(format!("column {i} has no ordinates")));
            }
            if let Some(y) = col
                .iter()
                .find(|y| !y.is_finite() || **y < y_range.0 || **y > y_range.1)
            {
                return Err(Error::InvalidGrid(format!(
                    "ordinate {y} in column {i} outside {y_range:?}"
                )));
            }
        }
        let shape = Shape::new(columns.iter().map(Vec::len).collect())?;
        Ok(Self {
            columns,
            abscissae,
            start,
            end,
            y_range,
            shape,
        })
    }

    pub fn k(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn start(&self) -> (f64, f64) {
        self.start
    }

    pub fn end(&self) -> (f64, f64) {
        self.end
    }

    pub fn y_range(&self) -> (f64, f64) {
        self.y_range
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Boundary points and the chosen interior points, left to right.
    pub fn knots(&self, path: &[usize]) -> Result<Vec<(f64, f64)>> {
        if !self.shape().contains(path) {
            return Err(Error::InvalidArgument(format!(
                "path {path:?} does not fit grid shape {:?}",
                self.shape().sizes()
            )));
        }
        let mut pts = Vec::with_capacity(self.k() + 2);
        pts.push(self.start);
        for ((x, col), &j) in self.abscissae.iter().zip(&self.columns).zip(path) {
            pts.push((*x, col[j]));
        }
        pts.push(self.end);
        Ok(pts)
    }
}

/// Default brachistochrone rectangle `[0, pi] x [0, 2]` with boundary points
/// `(0, 2)` and `(pi, 0)`.
pub const BRACHISTOCHRONE_START: (f64, f64) = (0.0, 2.0);
pub const BRACHISTOCHRONE_END: (f64, f64) = (PI, 0.0);

/// `k = sizes.len()` free columns at `x_i = pi i / (k + 1)`; column `i` holds
/// the ordinates `{y_max j / n_i : j = 1..=n_i}` (zero is excluded because an
/// interior zero makes the travel time diverge).
pub fn brachistochrone_grid_with_height(sizes: &[usize], y_max: f64) -> Result<Grid> {
    if sizes.is_empty() {
        return Err(Error::NoBuckets);
    }
    if sizes.contains(&0) {
        return Err(Error::EmptyRegister);
    }
    if !(y_max > 0.0 && y_max.is_finite()) {
        return Err(Error::InvalidGrid(format!("y_max must be positive, got {y_max}")));
    }
    let k = sizes.len();
    let abscissae = (1..=k).map(|i| PI * i as f64 / (k + 1) as f64).collect();
    let columns = sizes
        .iter()
        .map(|&n| (1..=n).map(|j| y_max * j as f64 / n as f64).collect())
        .collect();
    Grid::new(
        columns,
        abscissae,
        BRACHISTOCHRONE_START,
        BRACHISTOCHRONE_END,
        (0.0, y_max.max(BRACHISTOCHRONE_START.1)),
    )
}

pub fn build_brachistochrone_grid(sizes: &[usize]) -> Result<Grid> {
    brachistochrone_grid_with_height(sizes, 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_column_grid() {
        let g = build_brachistochrone_grid(&[4]).unwrap();
        assert_eq!(g.k(), 1);
        assert!((g.abscissae()[0] - PI / 2.0).abs() < 1e-15);
        assert_eq!(g.columns()[0], vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(g.start(), (0.0, 2.0));
        assert_eq!(g.end(), (PI, 0.0));
    }

    #[test]
    fn three_columns_at_quarter_points() {
        let g = build_brachistochrone_grid(&[8, 8, 8]).unwrap();
        let want = [PI / 4.0, PI / 2.0, 3.0 * PI / 4.0];
        for (x, w) in g.abscissae().iter().zip(want) {
            assert!((x - w).abs() < 1e-15);
        }
        assert_eq!(g.shape().total(), 512);
        assert_eq!(g.columns()[2][0], 0.25);
    }

    #[test]
    fn invalid_grids_rejected() {
        assert!(build_brachistochrone_grid(&[]).is_err());
        assert!(build_brachistochrone_grid(&[3, 0]).is_err());
        let bad_x = Grid::new(vec![vec![1.0]], vec![5.0], (0.0, 2.0), (PI, 0.0), (0.0, 2.0));
        assert!(bad_x.is_err());
        let bad_y = Grid::new(vec![vec![2.5]], vec![1.0], (0.0, 2.0), (PI, 0.0), (0.0, 2.0));
        assert!(bad_y.is_err());
    }

    #[test]
    fn knots_include_boundaries() {
        let g = build_brachistochrone_grid(&[2, 3]).unwrap();
        let k = g.knots(&[1, 0]).unwrap();
        assert_eq!(k.len(), 4);
        assert_eq!(k[0], (0.0, 2.0));
        assert_eq!(k[1].1, 2.0);
        assert!((k[2].1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(k[3], (PI, 0.0));
        assert!(g.knots(&[2, 0]).is_err());
    }

    #[test]
    fn cap_check() {
        let s = Shape::new(vec![10, 10, 10]).unwrap();
        assert_eq!(s.check_cap(1000).unwrap(), 1000);
        assert!(matches!(s.check_cap(999), Err(Error::CapExceeded { size: 1000, cap: 999 })));
        let huge = Shape::new(vec![usize::MAX, usize::MAX, 4]).unwrap();
        assert_eq!(huge.total(), u128::MAX);
    }

    proptest! {
        #[test]
        fn rank_roundtrip(sizes in prop::collection::vec(1usize..6, 1..5), seed in 0usize..10_000) {
            let s = Shape::new(sizes).unwrap();
            let idx = seed % s.total() as usize;
            let p = s.path_at(idx);
            prop_assert!(s.contains(&p));
            prop_assert_eq!(s.index_of(&p), idx);
        }
    }

    #[test]
    fn lexicographic_order() {
        let s = Shape::new(vec![2, 3]).unwrap();
        let all: Vec<Vec<usize>> = (0..6).map(|i| s.path_at(i)).collect();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[5], vec![1, 2]);
    }
}
