//! Multiple Wiener–Itô integrals of simple functions, partition diagrams and
//! the fourth-moment partition integrals `M_ij`.

mod mij;
mod partition;
mod product;
mod simple;

pub use mij::{m_ij, MijEstimate};
pub use partition::{
    enumerate_pi, enumerate_pi_bar, is_connected, PartitionDiagram, MAX_VARIABLES,
};
pub use product::{apply_replacement, product_expectation, Factor, FnFactor, Replaced};
pub use simple::{Grid, SimpleFunction};
