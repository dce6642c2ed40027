//! Transfer of time-dependent scattered field data onto finite element
//! quadrature points.
//!
//! Source data follows the `csvt` layout: a master file of `time,file`
//! records, one coordinates file and one data file per step. Values are
//! interpolated at target points with Shepard inverse-distance weighting over
//! the `k` nearest sources, found by an exact kd-tree search.
//!
//! ```
//! use csvt_core::{build_index, interpolate_point, Backend, FieldSnapshot, InterpParams, PointCloud};
//!
//! let sources = PointCloud::from_xy(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
//! let values = FieldSnapshot::new(0.0, 1, vec![0.0, 1.0]).unwrap();
//! let index = build_index(&sources, Backend::KdTree).unwrap();
//! let neighbors = index.knn(&[0.25, 0.0], 2).unwrap();
//! let params = InterpParams { k: 2, ..Default::default() };
//! let v = interpolate_point(&values, &neighbors, &params, sources.bbox_diagonal()).unwrap();
//! assert!((v[0] - 0.1).abs() < 1e-15);
//! ```

// `!(a > b)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod coupler;
pub mod error;
pub mod fem;
pub mod interp;
pub mod io;
pub mod spatial;

pub use config::{
    parse_coupling_config, parse_coupling_config_str, CouplingConfig, KnnLib, Overrides, TargetSpec,
    TimeSpec,
};
pub use coupler::{
    load_targets, run_couple, validate_dataset, write_targets_csv, Finding, OutputManifest, Severity,
    ValidationReport,
};
pub use error::{Error, Result};
pub use fem::{
    gauss_points_reference, map_to_physical, parse_mesh, quadrature_points, rectangle_mesh, write_mesh,
    Element, ElementKind, Mesh, RefPoint, TargetInfo, TargetSet,
};
pub use interp::{
    evaluate_snapshot, evaluate_transient, interpolate_point, select_time_step, shepard_weights,
    InterpParams, TimeMode, TimeSelection,
};
pub use io::{
    load_dataset, parse_coordinates_file, parse_data_file, parse_master_file, write_field_csv,
    ColumnMap, CoordColumns, FieldSnapshot, ManifestEntry, PointCloud, ScatteredDataset,
    TimeSeriesManifest,
};
pub use spatial::{build_index, Backend, Neighbor, NeighborSet, SpatialIndex};
