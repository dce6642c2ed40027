//! Reading and writing the `csvt` file hierarchy.
//!
//! A dataset consists of a master file listing `(time, data file)` records,
//! one coordinates file holding the source point locations, and one data file
//! per time step. All three are comma-separated text; blank lines and lines
//! starting with `#` are skipped, and surrounding whitespace of every field is
//! trimmed. Column indices are zero-based.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::CouplingConfig;
use crate::error::{Error, Result};

/// Point coordinates in 2D or 3D Cartesian space.
///
/// Coordinates are always stored as `[x, y, z]`; `z` is `0.0` for 2D clouds.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<[f64; 3]>,
}

impl PointCloud {
    /// Builds a cloud, checking the dimension and that every coordinate is finite.
    ///
    /// An empty cloud is representable; consumers that need points (index build,
    /// file output) reject it.
    pub fn new(dim: usize, coords: Vec<[f64; 3]>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidParams(format!(
                "point dimension must be 2 or 3, got {dim}"
            )));
        }
        if coords.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParams("non-finite coordinate".into()));
        }
        let mut coords = coords;
        if dim == 2 {
            coords.iter_mut().for_each(|c| c[2] = 0.0);
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn from_xy(points: &[[f64; 2]]) -> Result<Self> {
        Self::new(2, points.iter().map(|p| [p[0], p[1], 0.0]).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Full `[x, y, z]` triple of point `i`.
    pub fn point(&self, i: usize) -> &[f64; 3] {
        &self.coords[i]
    }

    /// The first `dim` coordinates of point `i`.
    pub fn coords(&self, i: usize) -> &[f64] {
        &self.coords[i][..self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64; 3]> + '_ {
        self.coords.iter()
    }

    /// Length of the diagonal of the axis-aligned bounding box.
    pub fn bbox_diagonal(&self) -> f64 {
        if self.coords.is_empty() {
            return 0.0;
        }
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for c in &self.coords {
            for a in 0..3 {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
        }
        (0..3).map(|a| (hi[a] - lo[a]).powi(2)).sum::<f64>().sqrt()
    }

    /// Returns a copy with every coordinate multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(
            self.dim,
            self.coords
                .iter()
                .map(|c| [c[0] * s, c[1] * s, c[2] * s])
                .collect(),
        )
    }
}

/// Field values at every point of a cloud for one instant.
///
/// Values are stored row-major: row `i` holds the `components` values of point `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    time: f64,
    components: usize,
    values: Vec<f64>,
}

impl FieldSnapshot {
    pub fn new(time: f64, components: usize, values: Vec<f64>) -> Result<Self> {
        if components == 0 {
            return Err(Error::InvalidParams("snapshot needs at least one component".into()));
        }
        if !values.len().is_multiple_of(components) {
            return Err(Error::InvalidParams(format!(
                "{} values do not form rows of {components} components",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite field value".into()));
        }
        Ok(FieldSnapshot {
            time,
            components,
            values,
        })
    }

    /// Builds a snapshot from per-point rows; every row must have the same length.
    pub fn from_rows(time: f64, rows: &[Vec<f64>]) -> Result<Self> {
        let components = rows.first().map_or(1, Vec::len);
        if rows.iter().any(|r| r.len() != components) {
            return Err(Error::InvalidParams("ragged snapshot rows".into()));
        }
        Self::new(time, components, rows.concat())
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// Number of point rows.
    pub fn len(&self) -> usize {
        self.values.len() / self.components
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.components..(i + 1) * self.components]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.components)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// One master-file record.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub time: f64,
    /// Path text exactly as written in the master file (trimmed).
    pub file: String,
    /// `file` resolved against the master file's directory.
    pub data_path: PathBuf,
}

/// Ordered, strictly time-increasing list of data files.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesManifest {
    entries: Vec<ManifestEntry>,
}

impl TimeSeriesManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParams("empty manifest".into()));
        }
        for (i, w) in entries.windows(2).enumerate() {
            if !(w[1].time > w[0].time) {
                return Err(Error::InvalidParams(format!(
                    "non-increasing time at entry {}",
                    i + 2
                )));
            }
        }
        if entries.iter().any(|e| e.file.trim().is_empty()) {
            return Err(Error::InvalidParams("empty data path".into()));
        }
        Ok(TimeSeriesManifest { entries })
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.time)
    }

    pub fn time(&self, step: usize) -> f64 {
        self.entries[step].time
    }

    pub fn first_time(&self) -> f64 {
        self.entries[0].time
    }

    pub fn last_time(&self) -> f64 {
        self.entries[self.entries.len() - 1].time
    }
}

/// Coordinate columns of the coordinates file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoordColumns {
    pub x: usize,
    pub y: usize,
    pub z: Option<usize>,
}

/// Zero-based column layout of the master, coordinates and data files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub coords: CoordColumns,
    pub value_cols: Vec<usize>,
    pub step_value_col: usize,
    pub step_file_col: usize,
}

impl ColumnMap {
    pub fn validate(&self) -> Result<()> {
        let c = &self.coords;
        let mut coord_cols = vec![c.x, c.y];
        coord_cols.extend(c.z);
        if !all_distinct(&coord_cols) {
            return Err(Error::ColumnMap("coordinate columns must be distinct".into()));
        }
        if self.value_cols.is_empty() {
            return Err(Error::ColumnMap("at least one value column is required".into()));
        }
        if !all_distinct(&self.value_cols) {
            return Err(Error::ColumnMap("value columns must be distinct".into()));
        }
        if self.step_value_col == self.step_file_col {
            return Err(Error::ColumnMap(
                "stepValues and stepFiles columns must differ".into(),
            ));
        }
        Ok(())
    }

    /// 3 when a `z` column is mapped, 2 otherwise.
    pub fn dim(&self) -> usize {
        if self.coords.z.is_some() {
            3
        } else {
            2
        }
    }
}

fn all_distinct(cols: &[usize]) -> bool {
    let mut seen = HashSet::new();
    cols.iter().all(|c| seen.insert(*c))
}

/// Source points, manifest and one snapshot per manifest entry.
#[derive(Debug, Clone)]
pub struct ScatteredDataset {
    points: PointCloud,
    manifest: TimeSeriesManifest,
    snapshots: Vec<FieldSnapshot>,
    quantity_id: String,
}

impl ScatteredDataset {
    pub fn new(
        points: PointCloud,
        manifest: TimeSeriesManifest,
        snapshots: Vec<FieldSnapshot>,
        quantity_id: impl Into<String>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if snapshots.len() != manifest.len() {
            return Err(Error::InvalidParams(format!(
                "{} snapshots for {} manifest entries",
                snapshots.len(),
                manifest.len()
            )));
        }
        for (snap, entry) in snapshots.iter().zip(manifest.entries()) {
            if snap.len() != points.len() {
                return Err(Error::PointCountMismatch {
                    path: entry.data_path.clone(),
                    found: snap.len(),
                    expected: points.len(),
                });
            }
            if snap.time().to_bits() != entry.time.to_bits() {
                return Err(Error::InvalidParams(format!(
                    "snapshot time {} differs from manifest time {}",
                    snap.time(),
                    entry.time
                )));
            }
        }
        Ok(ScatteredDataset {
            points,
            manifest,
            snapshots,
            quantity_id: quantity_id.into(),
        })
    }

    pub fn points(&self) -> &PointCloud {
        &self.points
    }

    pub fn manifest(&self) -> &TimeSeriesManifest {
        &self.manifest
    }

    pub fn snapshots(&self) -> &[FieldSnapshot] {
        &self.snapshots
    }

    pub fn snapshot(&self, step: usize) -> Result<&FieldSnapshot> {
        self.snapshots.get(step).ok_or(Error::StepOutOfRange {
            step,
            steps: self.snapshots.len(),
        })
    }

    pub fn quantity_id(&self) -> &str {
        &self.quantity_id
    }

    pub fn components(&self) -> usize {
        self.snapshots[0].components()
    }
}

/// Data records of a text file: `(1-based line number, trimmed fields)`.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            None
        } else {
            Some((i + 1, trimmed.split(',').map(str::trim).collect()))
        }
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn field<'a>(path: &Path, line: usize, fields: &[&'a str], col: usize) -> Result<&'a str> {
    fields.get(col).copied().ok_or_else(|| {
        Error::parse(
            path,
            line,
            format!("missing column {col} (row has {} fields)", fields.len()),
        )
    })
}

fn finite_field(path: &Path, line: usize, fields: &[&str], col: usize, what: &str) -> Result<f64> {
    let text = field(path, line, fields, col)?;
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(Error::parse(
            path,
            line,
            format!("non-finite {what} '{text}' in column {col}"),
        )),
        Err(_) => Err(Error::parse(
            path,
            line,
            format!("unparseable {what} '{text}' in column {col}"),
        )),
    }
}

/// Reads the master file into a manifest.
pub fn parse_master_file(path: &Path, map: &ColumnMap) -> Result<TimeSeriesManifest> {
    let text = read_text(path)?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut entries: Vec<ManifestEntry> = Vec::new();
    for (line, fields) in records(&text) {
        let time_text = field(path, line, &fields, map.step_value_col)?;
        let time = match time_text.parse::<f64>() {
            Ok(t) if t.is_finite() => t,
            _ => {
                return Err(Error::parse(
                    path,
                    line,
                    format!("unparseable time '{time_text}'"),
                ))
            }
        };
        let file = field(path, line, &fields, map.step_file_col)?;
        if file.is_empty() {
            return Err(Error::parse(path, line, "empty data file path"));
        }
        if let Some(prev) = entries.last() {
            if !(time > prev.time) {
                return Err(Error::NonIncreasingTime {
                    path: path.to_path_buf(),
                    line,
                });
            }
        }
        entries.push(ManifestEntry {
            time,
            file: file.to_string(),
            data_path: base.join(file),
        });
    }
    if entries.is_empty() {
        return Err(Error::EmptyManifest {
            path: path.to_path_buf(),
        });
    }
    Ok(TimeSeriesManifest { entries })
}

/// Reads source point locations; row order becomes the point index.
pub fn parse_coordinates_file(path: &Path, map: &ColumnMap) -> Result<PointCloud> {
    let text = read_text(path)?;
    let c = map.coords;
    let mut coords = Vec::new();
    for (line, fields) in records(&text) {
        let x = finite_field(path, line, &fields, c.x, "coordinate")?;
        let y = finite_field(path, line, &fields, c.y, "coordinate")?;
        let z = match c.z {
            Some(col) => finite_field(path, line, &fields, col, "coordinate")?,
            None => 0.0,
        };
        coords.push([x, y, z]);
    }
    if coords.is_empty() {
        return Err(Error::EmptyCloud);
    }
    PointCloud::new(map.dim(), coords)
}

/// Reads the mapped value columns of every data row, without a row-count check.
pub fn read_values(path: &Path, value_cols: &[usize]) -> Result<FieldSnapshot> {
    if value_cols.is_empty() {
        return Err(Error::ColumnMap("at least one value column is required".into()));
    }
    let text = read_text(path)?;
    let mut values = Vec::new();
    for (line, fields) in records(&text) {
        for &col in value_cols {
            values.push(finite_field(path, line, &fields, col, "value")?);
        }
    }
    FieldSnapshot::new(0.0, value_cols.len(), values)
}

/// Reads one data file of `expected_n` rows. The returned snapshot has time
/// `0.0`; callers set it.
pub fn parse_data_file(path: &Path, value_cols: &[usize], expected_n: usize) -> Result<FieldSnapshot> {
    let snapshot = read_values(path, value_cols)?;
    if snapshot.len() != expected_n {
        return Err(Error::PointCountMismatch {
            path: path.to_path_buf(),
            found: snapshot.len(),
            expected: expected_n,
        });
    }
    Ok(snapshot)
}

/// Loads the quantity selected by `config` eagerly: manifest, coordinates and
/// every data file.
pub fn load_dataset(config: &CouplingConfig) -> Result<ScatteredDataset> {
    let quantity = config.selected_quantity()?;
    let map = config.column_map()?;
    let manifest = parse_master_file(&config.master_path(), &map)?;
    let points = parse_coordinates_file(&config.coordinates_path()?, &map)?;
    let snapshots = manifest
        .entries()
        .par_iter()
        .map(|e| parse_data_file(&e.data_path, &map.value_cols, points.len()).map(|s| s.with_time(e.time)))
        .collect::<Result<Vec<_>>>()?;
    ScatteredDataset::new(points, manifest, snapshots, quantity.id.clone())
}

/// Decimal text with 17 significant digits, which round-trips every finite `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `# x,y,z,<id>_0,...` followed by one row per point.
pub fn write_field_csv(
    points: &PointCloud,
    snapshot: &FieldSnapshot,
    quantity_id: &str,
    path: &Path,
) -> Result<()> {
    if points.is_empty() {
        return Err(Error::EmptyTargetSet);
    }
    if points.len() != snapshot.len() {
        return Err(Error::RowMismatch {
            points: points.len(),
            values: snapshot.len(),
        });
    }
    let mut header = String::from("# x,y,z");
    for c in 0..snapshot.components() {
        write!(header, ",{quantity_id}_{c}").unwrap();
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut line = String::new();
    writeln!(out, "{header}").map_err(|e| Error::io(path, e))?;
    for (p, row) in points.iter().zip(snapshot.rows()) {
        line.clear();
        for (i, v) in p.iter().chain(row.iter()).enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format_value(*v));
        }
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
