//! Result export: CSV iteration logs, legacy-VTK snapshots, and a PNG raster
//! of the material layout.

pub mod csv;
pub mod png;
pub mod vtk;

pub use csv::{read_iteration_log, write_iteration_log};
pub use png::{rasterize_layout, write_png_layout};
pub use vtk::write_vtk_snapshot;
