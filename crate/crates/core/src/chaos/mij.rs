use rayon::prelude::*;

use crate::integrate::{cell_integrate, mc_integrate, Estimate, Integrator, Plan};
use crate::kernel::UStatKernel;
use crate::point_process::{IntensityModel, Point};
use crate::ustat::binomial;
use crate::{Error, Result};

use super::partition::{enumerate_pi_bar, PartitionDiagram};

/// Cell-tuple count above which the exact path gives way to Monte Carlo.
const EXACT_TUPLE_LIMIT: f64 = 4.0e6;

#[derive(Clone, Debug, PartialEq)]
pub struct MijEstimate {
    pub i: usize,
    pub j: usize,
    pub estimate: Estimate,
    /// `|Π̄(i, i, j, j)|`.
    pub diagrams: usize,
}

/// Argument lists of the four factors over one buffer holding the block
/// points first and then the free variables, plus a proposal plan in which
/// every variable after the first has a parent sharing a factor with it.
struct Layout {
    args: Vec<Vec<usize>>,
    parents: Vec<Option<usize>>,
}

fn layout(diagram: &PartitionDiagram, free: [usize; 4]) -> Layout {
    let slots = diagram.slots();
    let nb = diagram.len();
    // Breadth-first order over blocks through shared factors.
    let mut order = vec![0usize];
    let mut parent_block = vec![None; nb];
    let mut visited = vec![false; nb];
    visited[0] = true;
    let mut head = 0;
    while head < order.len() {
        let b = order[head];
        head += 1;
        for slot in &slots {
            if !slot.contains(&b) {
                continue;
            }
            for &b2 in slot {
                if !visited[b2] {
                    visited[b2] = true;
                    parent_block[b2] = Some(b);
                    order.push(b2);
                }
            }
        }
    }
    let mut position = vec![0usize; nb];
    for (p, &b) in order.iter().enumerate() {
        position[b] = p;
    }
    let mut parents: Vec<Option<usize>> = order
        .iter()
        .map(|&b| parent_block[b].map(|q| position[q]))
        .collect();
    let mut args = Vec::with_capacity(4);
    let mut next = nb;
    for (slot, &nf) in slots.iter().zip(&free) {
        let mut a: Vec<usize> = slot.iter().map(|&b| position[b]).collect();
        let anchor = a[0];
        for _ in 0..nf {
            a.push(next);
            parents.push(Some(anchor));
            next += 1;
        }
        args.push(a);
    }
    Layout { args, parents }
}

/// `M_ij = C(k,i)² C(k,j)² Σ_{π ∈ Π̄(i,i,j,j)} ∫ R^π(|f ⊗ f ⊗ f ⊗ f|) dμ`, where
/// the first `i` (resp. `j`) arguments of each factor enter the diagram and
/// the remaining `k − i` (resp. `k − j`) are integrated freely.
///
/// Kernels with cells are integrated exactly when the cell-tuple count is
/// small; local kernels use a proposal that follows the diagram's factor
/// links so samples stay inside the kernel's support.
pub fn m_ij(
    kernel: &UStatKernel,
    i: usize,
    j: usize,
    intensity: &IntensityModel,
    integrator: &Integrator,
) -> Result<MijEstimate> {
    let k = kernel.order();
    if !(1 <= i && i <= j && j <= k) {
        return Err(Error::InvalidOrder { i, j, k });
    }
    let diagrams = enumerate_pi_bar(&[i, i, j, j])?;
    let free = [k - i, k - i, k - j, k - j];
    let lambda = intensity.lambda();
    let window = intensity.window();
    let terms: Vec<Result<Estimate>> = diagrams
        .par_iter()
        .enumerate()
        .map(|(d, diagram)| {
            let lay = layout(diagram, free);
            let n = lay.parents.len();
            let mut args = vec![Point::default(); k];
            let integrand = |buf: &[Point]| {
                let mut prod = 1.0;
                for a in &lay.args {
                    for (t, &v) in a.iter().enumerate() {
                        args[t] = buf[v];
                    }
                    prod *= kernel.eval(&args);
                    if prod == 0.0 {
                        return 0.0;
                    }
                }
                prod.abs()
            };
            let exact = integrator
                .exact_cells_for(kernel)
                .filter(|cells| (cells.len() as f64).powi(n as i32) <= EXACT_TUPLE_LIMIT);
            let theta = match exact {
                Some(cells) => Estimate::exact(cell_integrate(cells, &[], n, integrand)?),
                None => {
                    let plan = match kernel.locality() {
                        Some(_) => Plan {
                            n_fixed: 0,
                            parents: lay.parents.clone(),
                            radius: kernel.locality(),
                        },
                        None => Plan::uniform(0, n),
                    };
                    let mut rng = integrator.child(&[d as u64]).rng();
                    mc_integrate(window, &plan, &[], integrator.samples, &mut rng, integrand)?
                }
            };
            Ok(theta.scale(lambda.powi(n as i32)))
        })
        .collect();
    let mut total = Estimate::exact(0.0);
    for t in terms {
        total = total.add(t?);
    }
    let c = binomial(k, i) * binomial(k, j);
    Ok(MijEstimate {
        i,
        j,
        estimate: total.scale(c * c),
        diagrams: diagrams.len(),
    })
}
