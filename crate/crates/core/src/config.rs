//! Coupling run configuration.
//!
//! The dataset part uses the element and attribute names of the openCFS
//! `scatteredData` block unchanged; run parameters, targets and the output
//! directory sit next to it:
//!
//! ```xml
//! <coupling>
//!   <scatteredData>
//!     <csvt fileName="./csvt/data.descrip" id="myCSVT">
//!       <stepValues col="0"/>
//!       <stepFiles col="1"/>
//!       <coordinates fileName="points.csv">
//!         <comp dof="x" col="0"/>
//!         <comp dof="y" col="1"/>
//!       </coordinates>
//!       <quantity name="scatter" id="acouPot" knnLib="Flann">
//!         <comp col="0"/>
//!       </quantity>
//!     </csvt>
//!   </scatteredData>
//!   <run quantityId="acouPot" k="4" p="2" timeMode="nearest" times="all-steps">
//!     <targets mesh="square.msh" region="bnd" order="2"/>
//!   </run>
//!   <output directory="out"/>
//! </coupling>
//! ```
//!
//! `fileName`, `mesh`, `pointsFile` and `directory` are relative to the
//! configuration file; the coordinates `fileName` is relative to the master
//! file, like the data files it lists.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use roxmltree::{Document, Node};

use crate::error::{Error, Result};
use crate::interp::{InterpParams, TimeMode};
use crate::io::{ColumnMap, CoordColumns};
use crate::spatial::Backend;

/// Neighbor-search library named in the configuration. Both select the exact
/// kd-tree backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnnLib {
    Flann,
    Cgal,
}

impl FromStr for KnnLib {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "flann" => Ok(KnnLib::Flann),
            "cgal" => Ok(KnnLib::Cgal),
            _ => Err(Error::UnknownKnnLib(s.to_string())),
        }
    }
}

impl KnnLib {
    pub fn name(self) -> &'static str {
        match self {
            KnnLib::Flann => "Flann",
            KnnLib::Cgal => "Cgal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueComp {
    pub dof: Option<String>,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantityConfig {
    pub name: String,
    pub id: String,
    pub knn_lib: KnnLib,
    pub comps: Vec<ValueComp>,
}

impl QuantityConfig {
    pub fn value_cols(&self) -> Vec<usize> {
        self.comps.iter().map(|c| c.col).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordinatesConfig {
    /// Coordinates file as written; relative to the master file's directory.
    pub file_name: Option<String>,
    pub columns: CoordColumns,
}

/// The `<csvt>` element.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvtConfig {
    /// Master file as written; relative to the configuration directory.
    pub file_name: String,
    pub id: String,
    pub step_values_col: usize,
    pub step_files_col: usize,
    pub coordinates: CoordinatesConfig,
    pub quantities: Vec<QuantityConfig>,
}

/// Query times.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum TimeSpec {
    /// Every stored step, at its stored time.
    #[default]
    AllSteps,
    Explicit(Vec<f64>),
}

impl FromStr for TimeSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all-steps") {
            return Ok(TimeSpec::AllSteps);
        }
        let times = s
            .split(',')
            .map(|t| {
                let t = t.trim();
                match t.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(format!("bad time '{t}'")),
                }
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err("query times must be strictly increasing".into());
        }
        Ok(TimeSpec::Explicit(times))
    }
}

impl std::fmt::Display for TimeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TimeSpec::AllSteps => f.write_str("all-steps"),
            TimeSpec::Explicit(ts) => {
                let parts: Vec<String> = ts.iter().map(|t| format!("{t:?}")).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    /// Quadrature points of the mesh elements in `region` (all when `None`).
    Mesh {
        path: String,
        region: Option<String>,
        order: usize,
    },
    /// Explicit target points, columns laid out like the coordinates file.
    PointsFile(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub quantity_id: Option<String>,
    pub params: InterpParams,
    /// Overrides the backend implied by `knnLib`.
    pub backend: Option<Backend>,
    pub times: TimeSpec,
    pub targets: Option<TargetSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            quantity_id: None,
            params: InterpParams::default(),
            backend: None,
            times: TimeSpec::AllSteps,
            targets: None,
        }
    }
}

pub const DEFAULT_ORDER: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingConfig {
    /// Directory that relative paths in the file are resolved against.
    pub base_dir: PathBuf,
    pub dataset: CsvtConfig,
    pub run: RunConfig,
    pub output: Option<String>,
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    base.join(p)
}

impl CouplingConfig {
    pub fn master_path(&self) -> PathBuf {
        resolve(&self.base_dir, &self.dataset.file_name)
    }

    pub fn coordinates_path(&self) -> Result<PathBuf> {
        let name = self
            .dataset
            .coordinates
            .file_name
            .as_deref()
            .ok_or_else(|| Error::MissingKey {
                path: self.base_dir.clone(),
                key: "coordinates/@fileName".into(),
            })?;
        let master = self.master_path();
        Ok(resolve(master.parent().unwrap_or(Path::new("")), name))
    }

    pub fn output_dir(&self) -> Option<PathBuf> {
        self.output.as_deref().map(|o| resolve(&self.base_dir, o))
    }

    pub fn resolve(&self, p: &str) -> PathBuf {
        resolve(&self.base_dir, p)
    }

    /// The quantity this run transfers: the one named by `run/@quantityId`,
    /// or the only one defined.
    pub fn selected_quantity(&self) -> Result<&QuantityConfig> {
        let qs = &self.dataset.quantities;
        match &self.run.quantity_id {
            Some(id) => qs.iter().find(|q| &q.id == id).ok_or_else(|| Error::Config {
                path: self.base_dir.clone(),
                message: format!("run references unknown quantity '{id}'"),
            }),
            None if qs.len() == 1 => Ok(&qs[0]),
            None => Err(Error::Config {
                path: self.base_dir.clone(),
                message: "several quantities defined; set run/@quantityId".into(),
            }),
        }
    }

    pub fn column_map(&self) -> Result<ColumnMap> {
        let map = ColumnMap {
            coords: self.dataset.coordinates.columns,
            value_cols: self.selected_quantity()?.value_cols(),
            step_value_col: self.dataset.step_values_col,
            step_file_col: self.dataset.step_files_col,
        };
        map.validate()?;
        Ok(map)
    }

    /// Search backend: the explicit run option, else the kd-tree for either `knnLib`.
    pub fn backend(&self) -> Result<Backend> {
        if let Some(b) = self.run.backend {
            return Ok(b);
        }
        self.selected_quantity()?;
        Ok(Backend::KdTree)
    }

    /// Applies command-line overrides; unset fields leave the configuration untouched.
    pub fn apply_overrides(&mut self, o: &Overrides) -> Result<()> {
        if let Some(path) = &o.targets_file {
            self.run.targets = Some(TargetSpec::PointsFile(path.clone()));
        }
        if let Some(path) = &o.mesh {
            let (region, order) = match &self.run.targets {
                Some(TargetSpec::Mesh { region, order, .. }) => (region.clone(), *order),
                _ => (None, DEFAULT_ORDER),
            };
            self.run.targets = Some(TargetSpec::Mesh {
                path: path.clone(),
                region,
                order,
            });
        }
        if o.region.is_some() || o.order.is_some() {
            match &mut self.run.targets {
                Some(TargetSpec::Mesh { region, order, .. }) => {
                    if let Some(r) = &o.region {
                        *region = Some(r.clone());
                    }
                    if let Some(n) = o.order {
                        *order = n;
                    }
                }
                _ => {
                    return Err(Error::Config {
                        path: self.base_dir.clone(),
                        message: "--region/--order need mesh targets".into(),
                    })
                }
            }
        }
        let params = &mut self.run.params;
        if let Some(k) = o.k {
            params.k = k;
        }
        if let Some(p) = o.p {
            params.p = p;
        }
        if let Some(mode) = o.time_mode {
            params.time_mode = mode;
        }
        if let Some(times) = &o.times {
            self.run.times = times.clone();
        }
        if let Some(b) = o.backend {
            self.run.backend = Some(b);
        }
        if let Some(out) = &o.output {
            self.output = Some(out.clone());
        }
        Ok(())
    }

    /// Serializes back to the XML layout accepted by [`parse_coupling_config_str`].
    pub fn to_xml(&self) -> String {
        let d = &self.dataset;
        let mut s = String::new();
        s.push_str("<coupling>\n  <scatteredData>\n");
        writeln!(
            s,
            "    <csvt fileName=\"{}\" id=\"{}\">",
            esc(&d.file_name),
            esc(&d.id)
        )
        .unwrap();
        writeln!(s, "      <stepValues col=\"{}\"/>", d.step_values_col).unwrap();
        writeln!(s, "      <stepFiles col=\"{}\"/>", d.step_files_col).unwrap();
        match &d.coordinates.file_name {
            Some(f) => writeln!(s, "      <coordinates fileName=\"{}\">", esc(f)).unwrap(),
            None => s.push_str("      <coordinates>\n"),
        }
        let c = d.coordinates.columns;
        writeln!(s, "        <comp dof=\"x\" col=\"{}\"/>", c.x).unwrap();
        writeln!(s, "        <comp dof=\"y\" col=\"{}\"/>", c.y).unwrap();
        if let Some(z) = c.z {
            writeln!(s, "        <comp dof=\"z\" col=\"{z}\"/>").unwrap();
        }
        s.push_str("      </coordinates>\n");
        for q in &d.quantities {
            writeln!(
                s,
                "      <quantity name=\"{}\" id=\"{}\" knnLib=\"{}\">",
                esc(&q.name),
                esc(&q.id),
                q.knn_lib.name()
            )
            .unwrap();
            for comp in &q.comps {
                match &comp.dof {
                    Some(dof) => writeln!(s, "        <comp dof=\"{}\" col=\"{}\"/>", esc(dof), comp.col),
                    None => writeln!(s, "        <comp col=\"{}\"/>", comp.col),
                }
                .unwrap();
            }
            s.push_str("      </quantity>\n");
        }
        s.push_str("    </csvt>\n  </scatteredData>\n");

        let r = &self.run;
        s.push_str("  <run");
        if let Some(id) = &r.quantity_id {
            write!(s, " quantityId=\"{}\"", esc(id)).unwrap();
        }
        write!(
            s,
            " k=\"{}\" p=\"{:?}\" exactHitTol=\"{:?}\" timeMode=\"{}\"",
            r.params.k, r.params.p, r.params.exact_hit_tol, r.params.time_mode
        )
        .unwrap();
        if let Some(b) = r.backend {
            write!(s, " backend=\"{b}\"").unwrap();
        }
        write!(s, " times=\"{}\"", r.times).unwrap();
        match &r.targets {
            None => s.push_str("/>\n"),
            Some(t) => {
                s.push_str(">\n    <targets");
                match t {
                    TargetSpec::Mesh { path, region, order } => {
                        write!(s, " mesh=\"{}\"", esc(path)).unwrap();
                        if let Some(region) = region {
                            write!(s, " region=\"{}\"", esc(region)).unwrap();
                        }
                        write!(s, " order=\"{order}\"").unwrap();
                    }
                    TargetSpec::PointsFile(path) => write!(s, " pointsFile=\"{}\"", esc(path)).unwrap(),
                }
                s.push_str("/>\n  </run>\n");
            }
        }
        if let Some(out) = &self.output {
            writeln!(s, "  <output directory=\"{}\"/>", esc(out)).unwrap();
        }
        s.push_str("</coupling>\n");
        s
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Command-line replacements for configuration values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub mesh: Option<String>,
    pub region: Option<String>,
    pub order: Option<usize>,
    pub targets_file: Option<String>,
    pub k: Option<usize>,
    pub p: Option<f64>,
    pub time_mode: Option<TimeMode>,
    pub times: Option<TimeSpec>,
    pub backend: Option<Backend>,
    pub output: Option<String>,
}

/// Reads a configuration file; relative paths inside it resolve against its directory.
pub fn parse_coupling_config(path: &Path) -> Result<CouplingConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
    parse_coupling_config_str(&text, path, base)
}

/// Parses configuration text. `origin` names the source in error messages.
pub fn parse_coupling_config_str(text: &str, origin: &Path, base_dir: PathBuf) -> Result<CouplingConfig> {
    let doc = Document::parse(text).map_err(|e| Error::Config {
        path: origin.to_path_buf(),
        message: format!("malformed XML: {e}"),
    })?;
    let p = Parser { origin };
    let root = doc.root_element();

    let scattered = p.unique_descendant(root, "scatteredData")?.ok_or_else(|| p.missing("scatteredData"))?;
    let csvts: Vec<Node> = scattered.children().filter(|n| n.has_tag_name("csvt")).collect();
    let csvt = match csvts.as_slice() {
        [one] => *one,
        [] => return Err(p.missing("scatteredData/csvt")),
        _ => return Err(p.error("only one csvt dataset per run is supported")),
    };
    let dataset = p.csvt(csvt)?;

    let run = match p.unique_descendant(root, "run")? {
        Some(node) => p.run(node)?,
        None => RunConfig::default(),
    };
    let output = match p.unique_descendant(root, "output")? {
        Some(node) => Some(p.attr(node, "output", "directory")?.to_string()),
        None => None,
    };

    let config = CouplingConfig {
        base_dir,
        dataset,
        run,
        output,
    };
    if let Some(id) = &config.run.quantity_id {
        if !config.dataset.quantities.iter().any(|q| &q.id == id) {
            return Err(p.error(&format!("run references unknown quantity '{id}'")));
        }
    }
    Ok(config)
}

struct Parser<'p> {
    origin: &'p Path,
}

impl Parser<'_> {
    fn missing(&self, key: &str) -> Error {
        Error::MissingKey {
            path: self.origin.to_path_buf(),
            key: key.to_string(),
        }
    }

    fn error(&self, message: &str) -> Error {
        Error::Config {
            path: self.origin.to_path_buf(),
            message: message.to_string(),
        }
    }

    fn unique_descendant<'a, 'i>(&self, root: Node<'a, 'i>, tag: &str) -> Result<Option<Node<'a, 'i>>> {
        let mut found = root.descendants().filter(|n| n.has_tag_name(tag));
        let first = found.next();
        if found.next().is_some() {
            return Err(self.error(&format!("duplicate <{tag}> element")));
        }
        Ok(first)
    }

    fn attr<'a>(&self, node: Node<'a, '_>, elem: &str, name: &str) -> Result<&'a str> {
        node.attribute(name)
            .ok_or_else(|| self.missing(&format!("{elem}/@{name}")))
    }

    fn parsed<T: FromStr>(&self, node: Node, elem: &str, name: &str) -> Result<Option<T>> {
        match node.attribute(name) {
            None => Ok(None),
            Some(text) => text
                .trim()
                .parse::<T>()
                .map(Some)
                .map_err(|_| self.error(&format!("{elem}/@{name}: invalid value '{text}'"))),
        }
    }

    fn col(&self, node: Node, elem: &str) -> Result<usize> {
        self.parsed(node, elem, "col")?
            .ok_or_else(|| self.missing(&format!("{elem}/@col")))
    }

    fn child<'a, 'i>(&self, node: Node<'a, 'i>, path: &str, tag: &str) -> Result<Node<'a, 'i>> {
        node.children()
            .find(|n| n.has_tag_name(tag))
            .ok_or_else(|| self.missing(&format!("{path}/{tag}")))
    }

    fn csvt(&self, node: Node) -> Result<CsvtConfig> {
        let file_name = self.attr(node, "csvt", "fileName")?.to_string();
        let id = self.attr(node, "csvt", "id")?.to_string();
        let step_values_col = self.col(self.child(node, "csvt", "stepValues")?, "stepValues")?;
        let step_files_col = self.col(self.child(node, "csvt", "stepFiles")?, "stepFiles")?;

        let coords = self.child(node, "csvt", "coordinates")?;
        let (mut x, mut y, mut z) = (None, None, None);
        for comp in coords.children().filter(|n| n.has_tag_name("comp")) {
            let dof = self.attr(comp, "coordinates/comp", "dof")?;
            let slot = match dof {
                "x" => &mut x,
                "y" => &mut y,
                "z" => &mut z,
                _ => return Err(self.error(&format!("coordinates/comp: unknown dof '{dof}'"))),
            };
            if slot.is_some() {
                return Err(self.error(&format!("coordinates/comp: dof '{dof}' mapped twice")));
            }
            *slot = Some(self.col(comp, "coordinates/comp")?);
        }
        let columns = CoordColumns {
            x: x.ok_or_else(|| self.missing("coordinates/comp[@dof='x']"))?,
            y: y.ok_or_else(|| self.missing("coordinates/comp[@dof='y']"))?,
            z,
        };
        let coordinates = CoordinatesConfig {
            file_name: coords.attribute("fileName").map(str::to_string),
            columns,
        };

        let mut quantities: Vec<QuantityConfig> = Vec::new();
        for q in node.children().filter(|n| n.has_tag_name("quantity")) {
            let id = self.attr(q, "quantity", "id")?.to_string();
            if quantities.iter().any(|other| other.id == id) {
                return Err(Error::DuplicateQuantityId {
                    path: self.origin.to_path_buf(),
                    id,
                });
            }
            let knn_lib = self.attr(q, "quantity", "knnLib")?.parse::<KnnLib>()?;
            let comps = q
                .children()
                .filter(|n| n.has_tag_name("comp"))
                .map(|c| {
                    Ok(ValueComp {
                        dof: c.attribute("dof").map(str::to_string),
                        col: self.col(c, "quantity/comp")?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if comps.is_empty() {
                return Err(self.missing("quantity/comp"));
            }
            quantities.push(QuantityConfig {
                name: q.attribute("name").unwrap_or(&id).to_string(),
                id,
                knn_lib,
                comps,
            });
        }
        if quantities.is_empty() {
            return Err(self.missing("csvt/quantity"));
        }
        Ok(CsvtConfig {
            file_name,
            id,
            step_values_col,
            step_files_col,
            coordinates,
            quantities,
        })
    }

    fn run(&self, node: Node) -> Result<RunConfig> {
        let defaults = InterpParams::default();
        let params = InterpParams {
            k: self.parsed(node, "run", "k")?.unwrap_or(defaults.k),
            p: self.parsed(node, "run", "p")?.unwrap_or(defaults.p),
            exact_hit_tol: self
                .parsed(node, "run", "exactHitTol")?
                .unwrap_or(defaults.exact_hit_tol),
            time_mode: self
                .parsed(node, "run", "timeMode")?
                .unwrap_or(defaults.time_mode),
        };
        params.validate()?;
        let targets = match node.children().find(|n| n.has_tag_name("targets")) {
            None => None,
            Some(t) => match (t.attribute("mesh"), t.attribute("pointsFile")) {
                (Some(mesh), None) => Some(TargetSpec::Mesh {
                    path: mesh.to_string(),
                    region: t.attribute("region").map(str::to_string),
                    order: self.parsed(t, "targets", "order")?.unwrap_or(DEFAULT_ORDER),
                }),
                (None, Some(points)) => Some(TargetSpec::PointsFile(points.to_string())),
                (Some(_), Some(_)) => {
                    return Err(self.error("targets: give either mesh or pointsFile, not both"))
                }
                (None, None) => return Err(self.missing("targets/@mesh")),
            },
        };
        Ok(RunConfig {
            quantity_id: node.attribute("quantityId").map(str::to_string),
            params,
            backend: self.parsed(node, "run", "backend")?,
            times: self.parsed(node, "run", "times")?.unwrap_or_default(),
            targets,
        })
    }
}
