//! Block coordinate descent over products of transport polytopes.
//!
//! Each outer iteration linearizes a smooth objective in one block and solves
//! an entropy- or KL-regularized transport subproblem by Sinkhorn scaling.
//! The sampled variants solve the subproblem on a Poisson-sampled support.
//!
//! ```
//! use otbcd::polytope::{Marginal, transport_lp};
//! use ndarray::array;
//!
//! let a = Marginal::new(array![0.5, 0.5]).unwrap();
//! let w = array![[0.0, 1.0], [1.0, 0.0]];
//! let (_, value) = transport_lp(&w, &a, &a).unwrap();
//! assert_eq!(value, 0.0);
//! ```

pub mod error;
pub mod methods;
pub mod mmot;
pub mod multigrid;
pub mod polytope;
pub mod sinkhorn;
pub mod sparsify;

pub use error::{Error, Result};
pub use methods::{MethodConfig, MethodKind, RunRecord};
pub use polytope::{Csr, Marginal, ObjectiveOracle, Pattern, Plan, Storage};
pub use sinkhorn::{KernelMatrix, ScalingState, SinkhornConfig};
