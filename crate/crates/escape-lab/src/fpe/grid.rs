//! Uniform cell-centered grids and density fields.

use crate::error::{Error, Result};
use crate::landscapes::Landscape;

/// One uniform axis of cell centers on `[min, max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Axis> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::Argument(format!(
                "axis needs finite min < max, got [{min}, {max}]"
            )));
        }
        if n < 4 {
            return Err(Error::Argument(format!("axis needs at least 4 cells, got {n}")));
        }
        Ok(Axis { min, max, n })
    }

    /// Cell width.
    #[inline]
    pub fn h(&self) -> f64 {
        (self.max - self.min) / self.n as f64
    }

    /// Center of cell `i`.
    #[inline]
    pub fn center(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * self.h()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.center(i)).collect()
    }
}

/// Tensor grid of one or two axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Grid> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::Argument(format!(
                "grids are 1- or 2-dimensional, got {} axes",
                axes.len()
            )));
        }
        Ok(Grid { axes })
    }

    pub fn line(min: f64, max: f64, n: usize) -> Result<Grid> {
        Ok(Grid { axes: vec![Axis::new(min, max, n)?] })
    }

    pub fn square(min: f64, max: f64, n: usize) -> Result<Grid> {
        Ok(Grid { axes: vec![Axis::new(min, max, n)?, Axis::new(min, max, n)?] })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn n_cells(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.h()).product()
    }

    /// Center of the cell with row-major flat index `idx`.
    pub fn center(&self, idx: usize) -> Vec<f64> {
        match self.axes.len() {
            1 => vec![self.axes[0].center(idx)],
            2 => {
                let n2 = self.axes[1].n;
                vec![self.axes[0].center(idx / n2), self.axes[1].center(idx % n2)]
            }
            _ => unreachable!(),
        }
    }
}

/// A nonnegative cell-averaged density on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub grid: Grid,
    /// Row-major cell values.
    pub values: Vec<f64>,
}

impl DensityField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<DensityField> {
        if values.len() != grid.n_cells() {
            return Err(Error::Argument(format!(
                "density has {} values for a grid of {} cells",
                values.len(),
                grid.n_cells()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Argument("density values must be finite and nonnegative".into()));
        }
        Ok(DensityField { grid, values })
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Scale to unit mass.
    pub fn normalize(&mut self) -> Result<()> {
        let mass = self.total_mass();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Numeric(format!("cannot normalize density of mass {mass}")));
        }
        for v in &mut self.values {
            *v /= mass;
        }
        Ok(())
    }

    /// Expectation of `f` under the density (assumes unit mass).
    pub fn expectation(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let vol = self.grid.cell_volume();
        self.values
            .iter()
            .enumerate()
            .map(|(i, p)| p * f(&self.grid.center(i)) * vol)
            .sum()
    }
}

/// `sqrt(sum_i (a_i - b_i)^2 w_i vol)`: the L2 distance weighted by `weight`.
pub fn weighted_l2_distance(a: &DensityField, b: &DensityField, weight: &[f64]) -> Result<f64> {
    if a.grid != b.grid || a.values.len() != weight.len() {
        return Err(Error::Argument("weighted distance needs matching grids".into()));
    }
    let vol = a.grid.cell_volume();
    Ok(a
        .values
        .iter()
        .zip(&b.values)
        .zip(weight)
        .map(|((x, y), w)| (x - y).powi(2) * w * vol)
        .sum::<f64>()
        .sqrt())
}

/// Normalized Gibbs density `exp(-eta L)` on `grid`.
///
/// Fails with a domain error when the boundary cells still carry
/// non-negligible weight, i.e. the truncated box is too small.
pub fn stationary_density(landscape: &Landscape, grid: &Grid, eta: f64) -> Result<DensityField> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Argument(format!("eta must be positive and finite, got {eta}")));
    }
    if grid.dim() != landscape.dim {
        return Err(Error::Argument(format!(
            "grid dim {} does not match landscape dim {}",
            grid.dim(),
            landscape.dim
        )));
    }
    // Shift by the minimum of L on the grid so the exponentials stay in range.
    let ls: Vec<f64> = (0..grid.n_cells()).map(|i| landscape.value(&grid.center(i))).collect();
    let lmin = ls.iter().cloned().fold(f64::INFINITY, f64::min);
    let values: Vec<f64> = ls.iter().map(|l| (-eta * (l - lmin)).exp()).collect();
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    let boundary_max = boundary_indices(grid)
        .into_iter()
        .map(|i| values[i])
        .fold(0.0f64, f64::max);
    if boundary_max > 1e-8 * max {
        return Err(Error::Domain(format!(
            "boundary Gibbs weight {boundary_max:e} exceeds 1e-8 of the peak; enlarge the box"
        )));
    }
    let mut field = DensityField::new(grid.clone(), values)?;
    field.normalize()?;
    Ok(field)
}

/// Flat indices of all boundary cells.
pub fn boundary_indices(grid: &Grid) -> Vec<usize> {
    match grid.dim() {
        1 => vec![0, grid.axes[0].n - 1],
        2 => {
            let (n1, n2) = (grid.axes[0].n, grid.axes[1].n);
            let mut out = Vec::new();
            for i in 0..n1 {
                for j in 0..n2 {
                    if i == 0 || j == 0 || i == n1 - 1 || j == n2 - 1 {
                        out.push(i * n2 + j);
                    }
                }
            }
            out
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::collections::BTreeMap;

    #[test]
    fn axis_and_grid_geometry() {
        let a = Axis::new(-2.0, 2.0, 8).unwrap();
        assert_relative_eq!(a.h(), 0.5);
        assert_relative_eq!(a.center(0), -1.75);
        assert_relative_eq!(a.center(7), 1.75);
        let g = Grid::square(-1.0, 1.0, 4).unwrap();
        assert_eq!(g.n_cells(), 16);
        assert_relative_eq!(g.cell_volume(), 0.25);
        assert_eq!(g.center(5), vec![-0.25, -0.25]);
    }

    #[test]
    fn stationary_density_matches_gaussian() {
        let l = Landscape::builtin("quadratic", &BTreeMap::new()).unwrap();
        let g = Grid::line(-8.0, 8.0, 400).unwrap();
        let p = stationary_density(&l, &g, 4.0).unwrap();
        assert_relative_eq!(p.total_mass(), 1.0, max_relative = 1e-12);
        // eta = 4 gives variance 1/4; compare against the normalized Gaussian.
        let var = p.expectation(|w| w[0] * w[0]);
        assert_relative_eq!(var, 0.25, max_relative = 1e-6);
        let w = g.axes[0].center(200);
        let exact = (4.0 / (2.0 * std::f64::consts::PI)).sqrt() * (-2.0 * w * w).exp();
        assert_relative_eq!(p.values[200], exact, max_relative = 1e-4);
    }

    #[test]
    fn stationary_density_rejects_small_domain() {
        let l = Landscape::builtin("quadratic", &BTreeMap::new()).unwrap();
        let g = Grid::line(-1.0, 1.0, 50).unwrap();
        assert!(matches!(stationary_density(&l, &g, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn weighted_distance_basics() {
        let g = Grid::line(0.0, 1.0, 4).unwrap();
        let a = DensityField::new(g.clone(), vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let b = DensityField::new(g.clone(), vec![1.0, 1.0, 1.0, 3.0]).unwrap();
        let w = vec![1.0; 4];
        assert_relative_eq!(weighted_l2_distance(&a, &a, &w).unwrap(), 0.0);
        assert_relative_eq!(weighted_l2_distance(&a, &b, &w).unwrap(), 1.0);
    }

    #[test]
    fn density_validation() {
        let g = Grid::line(0.0, 1.0, 4).unwrap();
        assert!(DensityField::new(g.clone(), vec![1.0; 3]).is_err());
        assert!(DensityField::new(g, vec![1.0, -0.5, 0.0, 0.0]).is_err());
    }
}
