//! End-to-end transfer: validate inputs, load the dataset, build targets,
//! interpolate every requested time and write a new `csvt` hierarchy.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{debug, info};

use crate::config::{
    CoordinatesConfig, CouplingConfig, CsvtConfig, QuantityConfig, RunConfig, TargetSpec, TimeSpec,
    ValueComp,
};
use crate::error::{Error, Result};
use crate::fem::{parse_mesh, quadrature_points, TargetSet};
use crate::interp::{evaluate_snapshot, evaluate_transient};
use crate::io::{
    load_dataset, parse_coordinates_file, parse_data_file, parse_master_file, read_values,
    write_field_csv, ColumnMap, CoordColumns,
};
use crate::spatial::build_index;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub severity: Severity,
    pub message: String,
    /// File or configuration key the finding refers to.
    pub location: String,
}

/// Every problem found in a configuration and the files it references.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    fn push(&mut self, severity: Severity, location: impl fmt::Display, message: impl Into<String>) {
        self.findings.push(Finding {
            severity,
            message: message.into(),
            location: location.to_string(),
        });
    }

    fn error(&mut self, location: impl fmt::Display, message: impl Into<String>) {
        self.push(Severity::Error, location, message);
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Warning)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for finding in &self.findings {
            writeln!(f, "{}: {}: {}", finding.severity, finding.location, finding.message)?;
        }
        Ok(())
    }
}

/// Checks the configuration and every referenced file, collecting all findings.
pub fn validate_dataset(config: &CouplingConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    let cfg = config.base_dir.display();

    if let Err(e) = config.run.params.validate() {
        report.error(format_args!("{cfg}: run"), e.to_string());
    }
    let map = match config.column_map() {
        Ok(m) => Some(m),
        Err(e) => {
            report.error(format_args!("{cfg}: csvt"), e.to_string());
            None
        }
    };
    let coords_path = match config.coordinates_path() {
        Ok(p) => Some(p),
        Err(e) => {
            report.error(format_args!("{cfg}: coordinates"), e.to_string());
            None
        }
    };

    let master = config.master_path();
    let manifest = map.as_ref().and_then(|m| match parse_master_file(&master, m) {
        Ok(manifest) => Some(manifest),
        Err(e) => {
            report.error(master.display(), e.to_string());
            None
        }
    });

    let points = match (&map, &coords_path) {
        (Some(m), Some(p)) => match parse_coordinates_file(p, m) {
            Ok(points) => Some(points),
            Err(e) => {
                report.error(p.display(), e.to_string());
                None
            }
        },
        _ => None,
    };

    if let (Some(m), Some(manifest)) = (&map, &manifest) {
        for entry in manifest.entries() {
            let result = match &points {
                Some(points) => parse_data_file(&entry.data_path, &m.value_cols, points.len()).map(drop),
                None => read_values(&entry.data_path, &m.value_cols).map(drop),
            };
            if let Err(e) = result {
                report.error(entry.data_path.display(), e.to_string());
            }
        }
        if let TimeSpec::Explicit(times) = &config.run.times {
            let (lo, hi) = (manifest.first_time(), manifest.last_time());
            for &t in times {
                if t < lo || t > hi {
                    report.push(
                        Severity::Warning,
                        format_args!("{cfg}: run/@times"),
                        format!("query time {t} outside stored range [{lo}, {hi}]; will clamp"),
                    );
                }
            }
        }
    }

    match &config.run.targets {
        None => report.error(format_args!("{cfg}: run/targets"), "no interpolation targets configured"),
        Some(spec) => {
            if let Some(m) = &map {
                match load_targets(config, spec, m) {
                    Ok(targets) => {
                        if let Some(points) = &points {
                            if targets.points.dim() != points.dim() {
                                report.error(
                                    format_args!("{cfg}: run/targets"),
                                    format!(
                                        "targets are {}D but source points are {}D",
                                        targets.points.dim(),
                                        points.dim()
                                    ),
                                );
                            }
                        }
                    }
                    Err(e) => report.error(format_args!("{cfg}: run/targets"), e.to_string()),
                }
            }
        }
    }
    if config.output.is_none() {
        report.error(format_args!("{cfg}: output"), "no output directory configured");
    }
    report
}

/// Builds the target set described by `spec`.
pub fn load_targets(config: &CouplingConfig, spec: &TargetSpec, map: &ColumnMap) -> Result<TargetSet> {
    match spec {
        TargetSpec::Mesh { path, region, order } => {
            let mesh = parse_mesh(&config.resolve(path))?;
            quadrature_points(&mesh, *order, region.as_deref())
        }
        TargetSpec::PointsFile(path) => {
            let points = parse_coordinates_file(&config.resolve(path), map)?;
            Ok(TargetSet::from_points(points))
        }
    }
}

/// Files produced by [`run_couple`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputManifest {
    /// Output master file, same `time,path` layout as the input one.
    pub master: PathBuf,
    /// Configuration that loads the output as a dataset.
    pub config: PathBuf,
    pub steps: Vec<(f64, PathBuf)>,
}

fn step_file_name(id: &str, seq: usize, count: usize) -> String {
    let width = count.saturating_sub(1).to_string().len().max(4);
    format!("{id}_{seq:0width$}.csv")
}

/// Runs one transfer and writes `<id>_<seq>.csv` per requested time, then the
/// output master `<id>.descrip` and a reload configuration `<id>.xml`.
pub fn run_couple(config: &CouplingConfig) -> Result<OutputManifest> {
    let params = config.run.params;
    params.validate()?;
    let out_dir = config.output_dir().ok_or_else(|| Error::MissingKey {
        path: config.base_dir.clone(),
        key: "output/@directory".into(),
    })?;
    let spec = config.run.targets.as_ref().ok_or_else(|| Error::MissingKey {
        path: config.base_dir.clone(),
        key: "run/targets".into(),
    })?;

    let dataset = load_dataset(config)?;
    info!(
        "loaded '{}': {} points, {} steps, {} component(s)",
        dataset.quantity_id(),
        dataset.points().len(),
        dataset.manifest().len(),
        dataset.components()
    );
    let map = config.column_map()?;
    let targets = load_targets(config, spec, &map)?;
    if targets.points.dim() != dataset.points().dim() {
        return Err(Error::DimensionMismatch {
            found: targets.points.dim(),
            expected: dataset.points().dim(),
        });
    }
    let index = build_index(dataset.points(), config.backend()?)?;
    info!("{} target points, backend {}", targets.len(), index.backend());

    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let id = dataset.quantity_id().to_string();
    let requests: Vec<(Option<usize>, f64)> = match &config.run.times {
        TimeSpec::AllSteps => dataset.manifest().times().enumerate().map(|(i, t)| (Some(i), t)).collect(),
        TimeSpec::Explicit(ts) => ts.iter().map(|&t| (None, t)).collect(),
    };

    let mut steps = Vec::with_capacity(requests.len());
    for (seq, (stored, t)) in requests.iter().copied().enumerate() {
        let field = match stored {
            Some(step) => evaluate_snapshot(&dataset, step, &targets.points, &index, &params),
            None => evaluate_transient(&dataset, t, &targets.points, &index, &params),
        }
        .map_err(|e| Error::Step {
            step: seq,
            time: t,
            source: Box::new(e),
        })?;
        let name = step_file_name(&id, seq, requests.len());
        let path = out_dir.join(&name);
        write_field_csv(&targets.points, &field, &id, &path).map_err(|e| Error::Step {
            step: seq,
            time: t,
            source: Box::new(e),
        })?;
        debug!("wrote {}", path.display());
        steps.push((t, path));
    }

    let mut master_text = String::from("# time,file\n");
    for (t, path) in &steps {
        let name = path.file_name().unwrap_or_default().to_string_lossy();
        writeln!(master_text, "{t:?},{name}").unwrap();
    }
    let master = out_dir.join(format!("{id}.descrip"));
    fs::write(&master, master_text).map_err(|e| Error::io(&master, e))?;

    let reload = output_config(config, &id, dataset.points().dim(), dataset.components(), &steps)?;
    let config_path = out_dir.join(format!("{id}.xml"));
    fs::write(&config_path, reload.to_xml()).map_err(|e| Error::io(&config_path, e))?;
    info!("wrote {} steps to {}", steps.len(), out_dir.display());

    Ok(OutputManifest {
        master,
        config: config_path,
        steps,
    })
}

/// Configuration describing the output hierarchy. Coordinates come from the
/// first step file, whose leading `x,y,z` columns hold the target points.
fn output_config(
    config: &CouplingConfig,
    id: &str,
    dim: usize,
    components: usize,
    steps: &[(f64, PathBuf)],
) -> Result<CouplingConfig> {
    let first = steps
        .first()
        .and_then(|(_, p)| p.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .ok_or(Error::EmptyTargetSet)?;
    let source = config.selected_quantity()?;
    let comps = (0..components)
        .map(|c| ValueComp {
            dof: source.comps.get(c).and_then(|s| s.dof.clone()),
            col: 3 + c,
        })
        .collect();
    Ok(CouplingConfig {
        base_dir: config.output_dir().unwrap_or_default(),
        dataset: CsvtConfig {
            file_name: format!("{id}.descrip"),
            id: format!("{}_out", config.dataset.id),
            step_values_col: 0,
            step_files_col: 1,
            coordinates: CoordinatesConfig {
                file_name: Some(first),
                columns: CoordColumns {
                    x: 0,
                    y: 1,
                    z: (dim == 3).then_some(2),
                },
            },
            quantities: vec![QuantityConfig {
                name: source.name.clone(),
                id: id.to_string(),
                knn_lib: source.knn_lib,
                comps,
            }],
        },
        run: RunConfig::default(),
        output: None,
    })
}

/// Writes a target set as `# x,y,z,element,local,weight,nx,ny`; `element` is
/// the 1-based mesh element id and the normal columns are empty for
/// non-boundary elements.
pub fn write_targets_csv(targets: &TargetSet, path: &Path) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::EmptyTargetSet);
    }
    let mut out = String::from("# x,y,z,element,local,weight,nx,ny\n");
    for (i, p) in targets.points.iter().enumerate() {
        let cells: Vec<String> = p.iter().map(|v| crate::io::format_value(*v)).collect();
        out.push_str(&cells.join(","));
        match targets.info.get(i) {
            Some(info) => {
                write!(
                    out,
                    ",{},{},{}",
                    info.element + 1,
                    info.local,
                    crate::io::format_value(info.weight)
                )
                .unwrap();
                match info.normal {
                    Some(n) => write!(
                        out,
                        ",{},{}",
                        crate::io::format_value(n[0]),
                        crate::io::format_value(n[1])
                    )
                    .unwrap(),
                    None => out.push_str(",,"),
                }
            }
            None => out.push_str(",,,,,"),
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_names_are_padded_and_sortable() {
        assert_eq!(step_file_name("q", 0, 2), "q_0000.csv");
        assert_eq!(step_file_name("q", 12, 20000), "q_00012.csv");
        let mut names: Vec<String> = (0..120).map(|i| step_file_name("a", i, 120)).collect();
        let sorted = {
            let mut s = names.clone();
            s.sort();
            s
        };
        assert_eq!(names, sorted);
        names.dedup();
        assert_eq!(names.len(), 120);
    }

    #[test]
    fn report_display_and_counts() {
        let mut r = ValidationReport::default();
        assert!(r.is_empty() && !r.has_errors());
        r.push(Severity::Warning, "cfg", "will clamp");
        assert!(!r.has_errors());
        r.error("a.csv", "broken");
        assert!(r.has_errors());
        assert_eq!(r.errors().count(), 1);
        assert_eq!(r.warnings().count(), 1);
        assert_eq!(r.to_string(), "warning: cfg: will clamp\nerror: a.csv: broken\n");
    }
}
