use std::sync::Arc;

use crate::integrate::for_each_assignment;
use crate::kernel::{Cell, UStatKernel};
use crate::point_process::{IntensityModel, Point, PointConfiguration};
use crate::ustat::binomial;
use crate::{Error, Result};

/// Disjoint boxes shared by a family of simple functions. The cells are
/// assumed to lie inside the window of any intensity they are used with.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    cells: Vec<Cell>,
}

impl Grid {
    pub fn new(cells: Vec<Cell>) -> Result<Self> {
        let Some(first) = cells.first() else {
            return Err(Error::InvalidSimpleFunction("grid has no cells".into()));
        };
        let dim = first.dim;
        for c in &cells {
            if c.dim != dim || !(c.measure() > 0.0) {
                return Err(Error::InvalidSimpleFunction(format!("bad cell {c:?}")));
            }
        }
        for (a, ca) in cells.iter().enumerate() {
            for cb in &cells[a + 1..] {
                let overlap =
                    (0..dim).all(|x| ca.lower[x] < cb.upper[x] && cb.lower[x] < ca.upper[x]);
                if overlap {
                    return Err(Error::InvalidSimpleFunction(format!(
                        "cells {ca:?} and {cb:?} overlap"
                    )));
                }
            }
        }
        Ok(Grid { cells })
    }

    /// `per_axis[a]` equal slabs along each axis of the box.
    pub fn regular(lower: &[f64], upper: &[f64], per_axis: &[usize]) -> Result<Self> {
        let dim = lower.len();
        if upper.len() != dim || per_axis.len() != dim || per_axis.contains(&0) {
            return Err(Error::InvalidSimpleFunction(
                "inconsistent grid spec".into(),
            ));
        }
        let mut cells = Vec::new();
        for_each_assignment(per_axis.iter().copied().max().unwrap_or(1), dim, |idx| {
            if idx.iter().zip(per_axis).any(|(i, n)| i >= n) {
                return;
            }
            let lo: Vec<f64> = (0..dim)
                .map(|a| lower[a] + (upper[a] - lower[a]) * idx[a] as f64 / per_axis[a] as f64)
                .collect();
            let hi: Vec<f64> = (0..dim)
                .map(|a| {
                    lower[a] + (upper[a] - lower[a]) * (idx[a] + 1) as f64 / per_axis[a] as f64
                })
                .collect();
            cells.push(Cell::new(&lo, &hi));
        });
        Grid::new(cells)
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn locate(&self, p: &Point) -> Option<usize> {
        self.cells
            .iter()
            .position(|c| c.contains(p, false))
            .or_else(|| self.cells.iter().position(|c| c.contains(p, true)))
    }

    /// `η(B_c) − μ(B_c)` for every cell.
    pub fn centred_counts(
        &self,
        config: &PointConfiguration,
        intensity: &IntensityModel,
    ) -> Vec<f64> {
        let mut counts: Vec<f64> = self
            .cells
            .iter()
            .map(|c| -intensity.lambda() * c.measure())
            .collect();
        for p in &config.points {
            if let Some(c) = self.locate(p) {
                counts[c] += 1.0;
            }
        }
        counts
    }
}

/// A symmetric function constant on products of grid cells and zero on every
/// cell tuple with a repeated index.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpleFunction {
    order: usize,
    grid: Arc<Grid>,
    coeffs: Vec<f64>,
}

impl SimpleFunction {
    /// Tabulates `coef` over cell tuples. Tuples with repeated cells are set
    /// to zero; an asymmetric table is rejected.
    pub fn from_fn(grid: &Arc<Grid>, order: usize, coef: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let n = grid.len();
        let size = n
            .checked_pow(order as u32)
            .filter(|&s| s <= 1 << 24)
            .ok_or_else(|| {
                Error::InvalidSimpleFunction(format!("{n} cells to the power {order} is too large"))
            })?;
        let mut coeffs = Vec::with_capacity(size);
        let mut seen = vec![false; n];
        for_each_assignment(n, order, |idx| {
            seen.iter_mut().for_each(|s| *s = false);
            let distinct = idx.iter().all(|&c| !std::mem::replace(&mut seen[c], true));
            coeffs.push(if distinct { coef(idx) } else { 0.0 });
        });
        let f = SimpleFunction {
            order,
            grid: grid.clone(),
            coeffs,
        };
        let mut asym = None;
        for_each_assignment(n, order, |idx| {
            let mut sorted = idx.to_vec();
            sorted.sort_unstable();
            let (a, b) = (f.coefficient(idx), f.coefficient(&sorted));
            if asym.is_none() && (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                asym = Some(idx.to_vec());
            }
        });
        if let Some(idx) = asym {
            return Err(Error::InvalidSimpleFunction(format!(
                "not symmetric at cells {idx:?}"
            )));
        }
        if let Some(v) = f.coeffs.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidSimpleFunction(format!("coefficient {v}")));
        }
        Ok(f)
    }

    pub fn constant(grid: &Arc<Grid>, value: f64) -> Self {
        SimpleFunction {
            order: 0,
            grid: grid.clone(),
            coeffs: vec![value],
        }
    }

    /// `coef` on the cell set `cells`, zero elsewhere (symmetrised indicator).
    pub fn indicator(grid: &Arc<Grid>, cells: &[usize], value: f64) -> Result<Self> {
        let mut want = cells.to_vec();
        want.sort_unstable();
        SimpleFunction::from_fn(grid, cells.len(), |idx| {
            let mut s = idx.to_vec();
            s.sort_unstable();
            if s == want {
                value
            } else {
                0.0
            }
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &c| acc * self.grid.len() + c)
    }

    pub fn coefficient(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.order);
        self.coeffs[self.offset(idx)]
    }

    /// Pointwise value; zero outside the grid.
    pub fn eval(&self, points: &[Point]) -> f64 {
        let mut idx = Vec::with_capacity(points.len());
        for p in points {
            match self.grid.locate(p) {
                Some(c) => idx.push(c),
                None => return 0.0,
            }
        }
        self.coefficient(&idx)
    }

    fn same_grid(&self, other: &SimpleFunction) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::IncompatibleGrids)
        }
    }

    pub(crate) fn check_grids(factors: &[SimpleFunction]) -> Result<()> {
        if let Some(first) = factors.first() {
            for f in &factors[1..] {
                first.same_grid(f)?;
            }
        }
        Ok(())
    }

    /// `I_n(f) = Σ_{cell tuples} coef · Π (η(B_c) − μ(B_c))`.
    pub fn wiener_ito(&self, config: &PointConfiguration, intensity: &IntensityModel) -> f64 {
        let z = self.grid.centred_counts(config, intensity);
        self.wiener_ito_from_counts(&z)
    }

    pub(crate) fn wiener_ito_from_counts(&self, z: &[f64]) -> f64 {
        let mut total = 0.0;
        let mut pos = 0;
        for_each_assignment(self.grid.len(), self.order, |idx| {
            let c = self.coeffs[pos];
            pos += 1;
            if c != 0.0 {
                total += c * idx.iter().map(|&i| z[i]).product::<f64>();
            }
        });
        total
    }

    /// `‖f‖² = ∫ f² dμ^n`.
    pub fn norm_sq(&self, intensity: &IntensityModel) -> f64 {
        self.weighted_sum(intensity, |c| c * c)
    }

    /// `∫ f dμ^n`.
    pub fn integral(&self, intensity: &IntensityModel) -> f64 {
        self.weighted_sum(intensity, |c| c)
    }

    fn weighted_sum(&self, intensity: &IntensityModel, g: impl Fn(f64) -> f64) -> f64 {
        let mass: Vec<f64> = self
            .grid
            .cells()
            .iter()
            .map(|c| intensity.lambda() * c.measure())
            .collect();
        let mut total = 0.0;
        let mut pos = 0;
        for_each_assignment(self.grid.len(), self.order, |idx| {
            let c = self.coeffs[pos];
            pos += 1;
            if c != 0.0 {
                total += g(c) * idx.iter().map(|&i| mass[i]).product::<f64>();
            }
        });
        total
    }

    /// `f(B_cell, ·)` as a simple function of order `n − 1`.
    pub fn fix_first(&self, cell: usize) -> SimpleFunction {
        assert!(self.order >= 1);
        let stride = self.grid.len().pow(self.order as u32 - 1);
        SimpleFunction {
            order: self.order - 1,
            grid: self.grid.clone(),
            coeffs: self.coeffs[cell * stride..(cell + 1) * stride].to_vec(),
        }
    }

    /// Chaos kernels `f_1 … f_n` of the U-statistic with kernel `f`:
    /// `f_i(c) = C(n,i) Σ_{c'} coef(c, c') Π μ(B_{c'})`.
    pub fn chaos_kernels(&self, intensity: &IntensityModel) -> Vec<SimpleFunction> {
        let k = self.order;
        let n = self.grid.len();
        let mass: Vec<f64> = self
            .grid
            .cells()
            .iter()
            .map(|c| intensity.lambda() * c.measure())
            .collect();
        (1..=k)
            .map(|i| {
                let stride = n.pow((k - i) as u32);
                let mut coeffs = Vec::with_capacity(n.pow(i as u32));
                for head in 0..n.pow(i as u32) {
                    let block = &self.coeffs[head * stride..(head + 1) * stride];
                    let mut sum = 0.0;
                    let mut pos = 0;
                    for_each_assignment(n, k - i, |tail| {
                        sum += block[pos] * tail.iter().map(|&c| mass[c]).product::<f64>();
                        pos += 1;
                    });
                    coeffs.push(binomial(k, i) * sum);
                }
                SimpleFunction {
                    order: i,
                    grid: self.grid.clone(),
                    coeffs,
                }
            })
            .collect()
    }

    /// The U-statistic kernel `x ↦ f(x)`, flagged for exact cell integration.
    pub fn to_kernel(&self, name: &str) -> Result<UStatKernel> {
        let f = self.clone();
        Ok(UStatKernel::new(name, self.order, move |x| f.eval(x))?
            .with_cells(self.grid.cells().to_vec()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_process::{SpatialWindow, Window};

    fn grid2() -> Arc<Grid> {
        Arc::new(Grid::regular(&[0.0, 0.0], &[1.0, 1.0], &[2, 1]).unwrap())
    }

    fn model(lambda: f64) -> IntensityModel {
        IntensityModel::new(
            lambda,
            Window::Spatial(SpatialWindow::unit_cube(2).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn regular_grid_covers_box() {
        let g = Grid::regular(&[0.0, 0.0], &[1.0, 2.0], &[2, 3]).unwrap();
        assert_eq!(g.len(), 6);
        let total: f64 = g.cells().iter().map(Cell::measure).sum();
        assert!((total - 2.0).abs() < 1e-12);
        assert_eq!(g.locate(&Point::new(&[0.25, 0.1])), Some(0));
        assert_eq!(g.locate(&Point::new(&[1.0, 2.0])), Some(5));
        assert_eq!(g.locate(&Point::new(&[1.5, 0.0])), None);
    }

    #[test]
    fn overlapping_cells_rejected() {
        let a = Cell::new(&[0.0], &[0.6]);
        let b = Cell::new(&[0.5], &[1.0]);
        assert!(Grid::new(vec![a, b]).is_err());
    }

    #[test]
    fn diagonal_is_structurally_zero() {
        let f = SimpleFunction::from_fn(&grid2(), 2, |_| 3.0).unwrap();
        assert_eq!(f.coefficient(&[0, 0]), 0.0);
        assert_eq!(f.coefficient(&[0, 1]), 3.0);
    }

    #[test]
    fn asymmetric_table_rejected() {
        let r = SimpleFunction::from_fn(&grid2(), 2, |idx| idx[0] as f64);
        assert!(matches!(r, Err(Error::InvalidSimpleFunction(_))));
    }

    #[test]
    fn order_one_integral_is_centred_count() {
        let g = grid2();
        let f = SimpleFunction::indicator(&g, &[1], 1.0).unwrap();
        let m = model(4.0);
        let c = PointConfiguration::spatial(
            vec![
                Point::new(&[0.7, 0.5]),
                Point::new(&[0.6, 0.1]),
                Point::new(&[0.2, 0.2]),
            ],
            2,
        );
        assert!((f.wiener_ito(&c, &m) - (2.0 - 2.0)).abs() < 1e-12);
        let c0 = SimpleFunction::constant(&g, 2.5);
        assert_eq!(c0.wiener_ito(&c, &m), 2.5);
        assert_eq!(f.norm_sq(&m), 2.0);
    }

    #[test]
    fn fix_first_and_chaos_kernels() {
        let g = grid2();
        let f = SimpleFunction::from_fn(&g, 2, |_| -1.0).unwrap();
        let h = f.fix_first(0);
        assert_eq!(h.order(), 1);
        assert_eq!(h.coefficient(&[0]), 0.0);
        assert_eq!(h.coefficient(&[1]), -1.0);
        let m = model(3.0);
        let ks = f.chaos_kernels(&m);
        // f_1(c) = 2 · (−1) · μ(other cell) = −3
        assert_eq!(ks[0].coefficient(&[0]), -3.0);
        assert_eq!(ks[1], f);
    }

    #[test]
    fn kernel_view_integrates_exactly() {
        let g = grid2();
        let f = SimpleFunction::from_fn(&g, 2, |_| 2.0).unwrap();
        let k = f.to_kernel("s").unwrap();
        let v = k.eval(&[Point::new(&[0.1, 0.5]), Point::new(&[0.9, 0.5])]);
        assert_eq!(v, 2.0);
        assert_eq!(k.cells().unwrap().len(), 2);
    }
}
