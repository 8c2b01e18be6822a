use crate::integrate::{for_each_assignment, Estimate};
use crate::kernel::UStatKernel;
use crate::point_process::{IntensityModel, Point};
use crate::{Error, Result};

use super::partition::{enumerate_pi, PartitionDiagram};
use super::simple::SimpleFunction;

/// A function of a fixed number of points.
pub trait Factor {
    fn arity(&self) -> usize;
    fn eval(&self, args: &[Point]) -> f64;
}

impl Factor for SimpleFunction {
    fn arity(&self) -> usize {
        self.order()
    }

    fn eval(&self, args: &[Point]) -> f64 {
        SimpleFunction::eval(self, args)
    }
}

impl Factor for UStatKernel {
    fn arity(&self) -> usize {
        self.order()
    }

    fn eval(&self, args: &[Point]) -> f64 {
        UStatKernel::eval(self, args)
    }
}

/// A closure with a declared arity.
pub struct FnFactor<F> {
    pub arity: usize,
    pub f: F,
}

impl<F: Fn(&[Point]) -> f64> Factor for FnFactor<F> {
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, args: &[Point]) -> f64 {
        (self.f)(args)
    }
}

/// `R^π(f_1 ⊗ … ⊗ f_m)` as a function of one point per block.
pub struct Replaced<'a> {
    slots: Vec<Vec<usize>>,
    factors: Vec<&'a dyn Factor>,
    blocks: usize,
}

impl Replaced<'_> {
    pub fn arity(&self) -> usize {
        self.blocks
    }

    pub fn eval(&self, ys: &[Point]) -> f64 {
        assert_eq!(ys.len(), self.blocks);
        let mut args = Vec::new();
        let mut prod = 1.0;
        for (slot, f) in self.slots.iter().zip(&self.factors) {
            args.clear();
            args.extend(slot.iter().map(|&b| ys[b]));
            prod *= f.eval(&args);
        }
        prod
    }
}

/// Substitutes `y_b` for every variable of block `b` and multiplies the
/// factors.
pub fn apply_replacement<'a>(
    diagram: &PartitionDiagram,
    factors: &[&'a dyn Factor],
) -> Result<Replaced<'a>> {
    let sizes = diagram.sizes();
    if sizes.len() != factors.len() || sizes.iter().zip(factors).any(|(&s, f)| s != f.arity()) {
        return Err(Error::ArityMismatch(format!(
            "diagram sizes {sizes:?} against factor arities {:?}",
            factors.iter().map(|f| f.arity()).collect::<Vec<_>>()
        )));
    }
    Ok(Replaced {
        slots: diagram.slots(),
        factors: factors.to_vec(),
        blocks: diagram.len(),
    })
}

/// `E Π_l I_{n_l}(f_l) = Σ_{π ∈ Π} ∫ R^π(f_1 ⊗ … ⊗ f_m) dμ^{|π|}`, exact on the
/// shared grid. Order-zero factors contribute their constant.
pub fn product_expectation(
    factors: &[SimpleFunction],
    intensity: &IntensityModel,
) -> Result<Estimate> {
    SimpleFunction::check_grids(factors)?;
    let constant: f64 = factors
        .iter()
        .filter(|f| f.order() == 0)
        .map(|f| f.coefficient(&[]))
        .product();
    let active: Vec<&SimpleFunction> = factors.iter().filter(|f| f.order() > 0).collect();
    let Some(first) = active.first() else {
        return Ok(Estimate::exact(constant));
    };
    let grid = first.grid();
    let mass: Vec<f64> = grid
        .cells()
        .iter()
        .map(|c| intensity.lambda() * c.measure())
        .collect();
    let sizes: Vec<usize> = active.iter().map(|f| f.order()).collect();
    let mut total = 0.0;
    let mut args: Vec<usize> = Vec::new();
    for diagram in enumerate_pi(&sizes)? {
        let slots = diagram.slots();
        for_each_assignment(grid.len(), diagram.len(), |cells| {
            let mut v: f64 = cells.iter().map(|&c| mass[c]).product();
            for (slot, f) in slots.iter().zip(&active) {
                args.clear();
                args.extend(slot.iter().map(|&b| cells[b]));
                v *= f.coefficient(&args);
                if v == 0.0 {
                    break;
                }
            }
            total += v;
        });
    }
    Ok(Estimate::exact(constant * total))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::chaos::Grid;
    use crate::point_process::{SpatialWindow, Window};

    fn model(lambda: f64) -> IntensityModel {
        IntensityModel::new(
            lambda,
            Window::Spatial(SpatialWindow::unit_cube(1).unwrap()),
        )
        .unwrap()
    }

    fn grid(n: usize) -> Arc<Grid> {
        Arc::new(Grid::regular(&[0.0], &[1.0], &[n]).unwrap())
    }

    #[test]
    fn replacement_single_block() {
        let f = FnFactor {
            arity: 1,
            f: |x: &[Point]| x[0].0[0],
        };
        let g = FnFactor {
            arity: 1,
            f: |x: &[Point]| 2.0 + x[0].0[0],
        };
        let d = &enumerate_pi(&[1, 1]).unwrap()[0];
        let r = apply_replacement(d, &[&f, &g]).unwrap();
        assert_eq!(r.arity(), 1);
        assert_eq!(r.eval(&[Point::new(&[3.0])]), 15.0);
    }

    #[test]
    fn replacement_pairing() {
        let f = FnFactor {
            arity: 2,
            f: |x: &[Point]| x[0].0[0] - x[1].0[0],
        };
        let g = FnFactor {
            arity: 2,
            f: |x: &[Point]| x[0].0[0] + 2.0 * x[1].0[0],
        };
        let d: PartitionDiagram = "[(1,1)(2,1)|(1,2)(2,2)]".parse().unwrap();
        let r = apply_replacement(&d, &[&f, &g]).unwrap();
        let ys = [Point::new(&[1.0]), Point::new(&[5.0])];
        assert_eq!(r.eval(&ys), (1.0 - 5.0) * (1.0 + 10.0));
        let one = FnFactor {
            arity: 2,
            f: |_: &[Point]| 1.0,
        };
        let r1 = apply_replacement(&d, &[&one, &one]).unwrap();
        assert_eq!(r1.eval(&ys), 1.0);
    }

    #[test]
    fn replacement_arity_checked() {
        let f = FnFactor {
            arity: 2,
            f: |_: &[Point]| 1.0,
        };
        let d = &enumerate_pi(&[1, 1]).unwrap()[0];
        assert!(matches!(
            apply_replacement(d, &[&f, &f]),
            Err(Error::ArityMismatch(_))
        ));
        assert!(apply_replacement(d, &[&f]).is_err());
    }

    #[test]
    fn lone_first_order_factor_has_zero_mean() {
        let g = grid(3);
        let f = SimpleFunction::from_fn(&g, 1, |c| c[0] as f64 + 1.0).unwrap();
        assert_eq!(product_expectation(&[f], &model(2.0)).unwrap().value, 0.0);
    }

    #[test]
    fn two_first_order_factors_give_inner_product() {
        let g = grid(2);
        let f = SimpleFunction::from_fn(&g, 1, |c| [1.0, 3.0][c[0]]).unwrap();
        let h = SimpleFunction::from_fn(&g, 1, |c| [2.0, -1.0][c[0]]).unwrap();
        // λ ∫ f h dθ = 4 · (0.5 · 2 − 0.5 · 3)
        let e = product_expectation(&[f, h], &model(4.0)).unwrap();
        assert!((e.value - -2.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_orders_are_orthogonal() {
        let g = grid(3);
        let f1 = SimpleFunction::from_fn(&g, 1, |_| 1.0).unwrap();
        let f2 = SimpleFunction::from_fn(&g, 2, |_| 1.0).unwrap();
        assert_eq!(
            product_expectation(&[f1, f2], &model(2.0)).unwrap().value,
            0.0
        );
    }

    #[test]
    fn isometry_second_order() {
        let g = grid(3);
        let f = SimpleFunction::from_fn(&g, 2, |c| (c[0] + c[1]) as f64).unwrap();
        let m = model(5.0);
        let e = product_expectation(&[f.clone(), f.clone()], &m).unwrap();
        assert!((e.value - 2.0 * f.norm_sq(&m)).abs() < 1e-9);
    }

    #[test]
    fn incompatible_grids_rejected() {
        let f = SimpleFunction::from_fn(&grid(2), 1, |_| 1.0).unwrap();
        let h = SimpleFunction::from_fn(&grid(3), 1, |_| 1.0).unwrap();
        assert!(matches!(
            product_expectation(&[f, h], &model(1.0)),
            Err(Error::IncompatibleGrids)
        ));
    }
}
