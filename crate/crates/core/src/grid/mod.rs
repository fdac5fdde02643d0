//! Hierarchical adaptive cube grids.
//!
//! The pieces: [`HierarchicalGrid`] owns the refinement forest and runs the
//! mark/pre-adapt/adapt/post-adapt cycle; [`GridView`] is a consistent
//! snapshot (leaf mesh or one level) carrying consecutive zero-based
//! [index sets](GridView::index) and [`Intersection`]s; [`Entity`] is a
//! copyable combinatorial handle with a persistent [`GlobalId`];
//! [`PersistentContainer`] keeps per-entity data alive across adaptation;
//! [`Mapper`] flattens several codimensions into one index range; and the
//! export functions write views with attached data as VTK or CSV.

mod container;
mod entity;
mod export;
mod hierarchical;
mod intersection;
mod view;

pub use container::PersistentContainer;
pub use entity::{Entity, GlobalId, MAX_GRID_DIM, MAX_LEVEL};
pub use export::{write_cells_csv, write_vtk};
pub use hierarchical::HierarchicalGrid;
pub use intersection::Intersection;
pub use view::{GridView, Mapper, ViewKind};
