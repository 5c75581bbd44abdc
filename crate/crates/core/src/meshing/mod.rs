//! Meshing techniques: Delaunay tetrahedra, hexahedral grids, Voronoi cells
//! and tetrahedron aggregation; plus refinement datasets.

pub mod aggregate;
pub mod dataset;
pub mod delaunay;
pub mod hex;
pub mod voronoi;

pub use aggregate::{aggregate_poly, select_pairs};
pub use dataset::{
    build_mesh_redraw,
    level_seed,
    build_dataset, build_dataset_with_targets, build_mesh_for, Dataset, DatasetError, DatasetLabel,
    DatasetMetadata, LevelMetadata, Meshing, LEVEL_TARGETS,
};
pub use delaunay::{delaunay_tet, delaunay_tets, tets_to_mesh, DelaunayError};
pub use hex::{hex_mesh, HexError};
pub use voronoi::{voronoi_cell, voronoi_mesh, VoronoiError};
