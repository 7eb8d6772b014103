//! Multiscale cellular fillings of cycles in step-2 Carnot groups.
//!
//! A cycle on the integer grid of a graded nilpotent group is coarsened one
//! dyadic scale at a time until it vanishes; the chain homotopies between
//! consecutive scales add up to a filling whose mass follows the group's
//! dilation weights.
//!
//! ```
//! use carnot_fill::{families, filling, grid::CubicalGrid, group::GroupSpec};
//!
//! let g = GroupSpec::preset("H3").unwrap();
//! let grid = CubicalGrid::for_group(&g).unwrap();
//! let sphere = families::sphere_cycle(&grid, 4).unwrap();
//! let (beta, report) = filling::multiscale_fill(&grid, &sphere, &Default::default()).unwrap();
//! assert!(report.verified);
//! assert_eq!(beta.mass(&grid), 256);
//! ```

pub mod coarsen;
pub mod error;
pub mod families;
pub mod filling;
pub mod grid;
pub mod group;
pub mod homotopy;
pub mod io;
pub mod multiscale;
pub mod oracle;
pub mod path;
pub mod weights;

pub use error::{Error, Result};
