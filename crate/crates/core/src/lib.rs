pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod propagator;
pub mod quadrature;
pub mod scalar;
pub mod separable;
pub mod solver;
pub mod special_fn;
pub mod strichartz;
pub mod translation;
pub mod trajectory;
pub mod transform;

pub use error::{Error, Result};
pub use field::{Field, Space};
pub use grid::{Grid, GridSpec, WeinsteinParams};
pub use scalar::Real;

/// Double-precision aliases.
pub type Params64 = WeinsteinParams<f64>;
pub type Grid64 = Grid<f64>;
pub type Field64 = Field<f64>;
pub type Trajectory64 = trajectory::Trajectory<f64>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type Nonlinearity64 = solver::NonlinearitySpec<f64>;
