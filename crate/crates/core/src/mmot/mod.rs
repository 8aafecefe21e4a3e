//! Coulomb multi-marginal transport in the Monge ansatz: densities, meshes,
//! discretization, the objective oracle, potentials and 1-D references.

pub mod catalog;
pub mod density;
pub mod mesh;
pub mod objective;
pub mod oracle1d;
pub mod potential;
pub mod quadrature;
pub mod system;

pub use catalog::{system, SYSTEM_COUNT};
pub use density::{Density, Term};
pub use mesh::{build_mesh, refine, Cell, Mesh, MeshStyle};
pub use objective::MmotOracle;
pub use oracle1d::{discrete_reference, DiscreteReference, Oracle1d, PotentialSign};
pub use potential::{error_metrics, ot_map, restrict_map, sce_potential, MapPoint};
pub use system::{discretize, discretize_masked, DiscreteSystem, DiscretizeOptions, Normalization};
