//! Interpolation targets from a linear 2D finite element mesh.
//!
//! Supported elements are `line2` (boundary segments), `tri3` and `quad4`.
//! Targets are the Gauss–Legendre quadrature points of the selected elements,
//! mapped to physical space with linear/bilinear shape functions.
//!
//! Reference elements: `line2` on `[-1, 1]`, `quad4` on `[-1, 1]^2` with nodes
//! counter-clockwise from `(-1, -1)`, `tri3` on the unit triangle
//! `(0,0), (1,0), (0,1)`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    Line2,
    Tri3,
    Quad4,
}

impl ElementKind {
    pub fn node_count(self) -> usize {
        match self {
            ElementKind::Line2 => 2,
            ElementKind::Tri3 => 3,
            ElementKind::Quad4 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Line2 => "line2",
            ElementKind::Tri3 => "tri3",
            ElementKind::Quad4 => "quad4",
        }
    }

    /// Measure of the reference element.
    pub fn reference_measure(self) -> f64 {
        match self {
            ElementKind::Line2 => 2.0,
            ElementKind::Tri3 => 0.5,
            ElementKind::Quad4 => 4.0,
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "line2" => Some(ElementKind::Line2),
            "tri3" => Some(ElementKind::Tri3),
            "quad4" => Some(ElementKind::Quad4),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub kind: ElementKind,
    /// Zero-based node indices.
    pub nodes: Vec<usize>,
    pub region: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: PointCloud,
    elements: Vec<Element>,
}

impl Mesh {
    /// Validates connectivity: node ids in range and nonzero length/area.
    pub fn new(nodes: PointCloud, elements: Vec<Element>) -> Result<Self> {
        for (id, e) in elements.iter().enumerate() {
            if e.nodes.len() != e.kind.node_count() {
                return Err(Error::InvalidParams(format!(
                    "element {id}: {} expects {} nodes, got {}",
                    e.kind.name(),
                    e.kind.node_count(),
                    e.nodes.len()
                )));
            }
            if let Some(&bad) = e.nodes.iter().find(|&&n| n >= nodes.len()) {
                return Err(Error::InvalidParams(format!(
                    "element {id}: node {bad} out of range"
                )));
            }
        }
        let mesh = Mesh { nodes, elements };
        for id in 0..mesh.elements.len() {
            if mesh.is_degenerate(id) {
                return Err(Error::DegenerateElement { element: id });
            }
        }
        Ok(mesh)
    }

    pub fn nodes(&self) -> &PointCloud {
        &self.nodes
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    fn xy(&self, node: usize) -> [f64; 2] {
        let p = self.nodes.point(node);
        [p[0], p[1]]
    }

    fn is_degenerate(&self, id: usize) -> bool {
        let e = &self.elements[id];
        let pts: Vec<[f64; 2]> = e.nodes.iter().map(|&n| self.xy(n)).collect();
        let distinct = pts
            .iter()
            .enumerate()
            .all(|(i, a)| pts[i + 1..].iter().all(|b| a != b));
        if !distinct {
            return true;
        }
        match e.kind {
            ElementKind::Line2 => false,
            // Shoelace area; zero for collinear nodes.
            ElementKind::Tri3 | ElementKind::Quad4 => {
                let n = pts.len();
                let twice_area: f64 = (0..n)
                    .map(|i| {
                        let (a, b) = (pts[i], pts[(i + 1) % n]);
                        a[0] * b[1] - b[0] * a[1]
                    })
                    .sum();
                twice_area == 0.0
            }
        }
    }
}

/// Reads the text mesh format:
///
/// ```text
/// $nodes
/// 1 0.0 0.0
/// ...
/// $elements
/// 1 quad4 domain 1 2 3 4
/// 2 line2 bnd 1 2
/// ```
///
/// Node and element ids are 1-based and must be consecutive.
pub fn parse_mesh(path: &Path) -> Result<Mesh> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    #[derive(PartialEq)]
    enum Section {
        None,
        Nodes,
        Elements,
    }
    let mut section = Section::None;
    let mut coords: Vec<[f64; 3]> = Vec::new();
    // (line, kind, region, raw node ids)
    let mut raw_elements: Vec<(usize, ElementKind, String, Vec<String>)> = Vec::new();

    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('$') {
            section = match name {
                "nodes" => Section::Nodes,
                "elements" => Section::Elements,
                _ => return Err(Error::parse(path, line_no, format!("unknown section '${name}'"))),
            };
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match section {
            Section::None => return Err(Error::parse(path, line_no, "data before any section")),
            Section::Nodes => {
                if fields.len() != 3 {
                    return Err(Error::parse(path, line_no, "node line must be 'id x y'"));
                }
                let expected = coords.len() + 1;
                if fields[0].parse::<usize>().ok() != Some(expected) {
                    return Err(Error::parse(
                        path,
                        line_no,
                        format!("expected node id {expected}, found '{}'", fields[0]),
                    ));
                }
                let mut xy = [0.0; 2];
                for (slot, text) in xy.iter_mut().zip(&fields[1..]) {
                    *slot = match text.parse::<f64>() {
                        Ok(v) if v.is_finite() => v,
                        _ => {
                            return Err(Error::parse(
                                path,
                                line_no,
                                format!("bad coordinate '{text}'"),
                            ))
                        }
                    };
                }
                coords.push([xy[0], xy[1], 0.0]);
            }
            Section::Elements => {
                if fields.len() < 3 {
                    return Err(Error::parse(
                        path,
                        line_no,
                        "element line must be 'id kind region n1 n2 ...'",
                    ));
                }
                let expected = raw_elements.len() + 1;
                if fields[0].parse::<usize>().ok() != Some(expected) {
                    return Err(Error::parse(
                        path,
                        line_no,
                        format!("expected element id {expected}, found '{}'", fields[0]),
                    ));
                }
                let kind = ElementKind::parse(fields[1]).ok_or_else(|| Error::UnknownElementKind {
                    path: path.to_path_buf(),
                    line: line_no,
                    kind: fields[1].to_string(),
                })?;
                let ids = &fields[3..];
                if ids.len() != kind.node_count() {
                    return Err(Error::parse(
                        path,
                        line_no,
                        format!("{} needs {} node ids, found {}", kind.name(), kind.node_count(), ids.len()),
                    ));
                }
                raw_elements.push((
                    line_no,
                    kind,
                    fields[2].to_string(),
                    ids.iter().map(|s| s.to_string()).collect(),
                ));
            }
        }
    }

    let node_count = coords.len();
    let mut elements = Vec::with_capacity(raw_elements.len());
    for (line, kind, region, ids) in raw_elements {
        let mut nodes = Vec::with_capacity(ids.len());
        for id in ids {
            match id.parse::<usize>() {
                Ok(n) if (1..=node_count).contains(&n) => nodes.push(n - 1),
                _ => {
                    return Err(Error::BadNodeId {
                        path: path.to_path_buf(),
                        line,
                        id,
                    })
                }
            }
        }
        elements.push(Element { kind, nodes, region });
    }
    Mesh::new(PointCloud::new(2, coords)?, elements)
}

/// A quadrature point on a reference element; `xi[1]` is unused for `line2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefPoint {
    pub xi: [f64; 2],
    pub weight: f64,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` for `n` points.
fn gauss_legendre_1d(n: usize) -> Option<Vec<(f64, f64)>> {
    match n {
        1 => Some(vec![(0.0, 2.0)]),
        2 => {
            let a = 1.0 / 3.0_f64.sqrt();
            Some(vec![(-a, 1.0), (a, 1.0)])
        }
        3 => {
            let a = (3.0_f64 / 5.0).sqrt();
            Some(vec![(-a, 5.0 / 9.0), (0.0, 8.0 / 9.0), (a, 5.0 / 9.0)])
        }
        _ => None,
    }
}

/// Reference quadrature rule for `kind`.
///
/// `order` is points per direction for `line2`/`quad4` (exact to degree
/// `2n - 1` per direction) and the polynomial degree for `tri3` (1: centroid,
/// 2: three-point, 3: four-point rule with a negative centroid weight).
pub fn gauss_points_reference(kind: ElementKind, order: usize) -> Result<Vec<RefPoint>> {
    let unsupported = || Error::UnsupportedOrder {
        kind: kind.name(),
        order,
    };
    match kind {
        ElementKind::Line2 => Ok(gauss_legendre_1d(order)
            .ok_or_else(unsupported)?
            .into_iter()
            .map(|(x, w)| RefPoint { xi: [x, 0.0], weight: w })
            .collect()),
        ElementKind::Quad4 => {
            let rule = gauss_legendre_1d(order).ok_or_else(unsupported)?;
            let mut pts = Vec::with_capacity(rule.len() * rule.len());
            for &(eta, we) in &rule {
                for &(xi, wx) in &rule {
                    pts.push(RefPoint {
                        xi: [xi, eta],
                        weight: wx * we,
                    });
                }
            }
            Ok(pts)
        }
        ElementKind::Tri3 => {
            let p = |a: f64, b: f64, w: f64| RefPoint { xi: [a, b], weight: w };
            match order {
                1 => Ok(vec![p(1.0 / 3.0, 1.0 / 3.0, 0.5)]),
                2 => {
                    let (a, b, w) = (1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0);
                    Ok(vec![p(a, a, w), p(b, a, w), p(a, b, w)])
                }
                3 => {
                    let (a, b, w) = (0.2, 0.6, 25.0 / 96.0);
                    Ok(vec![
                        p(1.0 / 3.0, 1.0 / 3.0, -27.0 / 96.0),
                        p(a, a, w),
                        p(b, a, w),
                        p(a, b, w),
                    ])
                }
                _ => Err(unsupported()),
            }
        }
    }
}

/// Maps a reference point of element `element` to physical space, returning
/// the position and the Jacobian determinant (the length ratio for `line2`).
pub fn map_to_physical(mesh: &Mesh, element: usize, xi: [f64; 2]) -> Result<([f64; 2], f64)> {
    let e = mesh
        .elements
        .get(element)
        .ok_or(Error::ElementOutOfRange { element })?;
    let x: Vec<[f64; 2]> = e.nodes.iter().map(|&n| mesh.xy(n)).collect();
    let (s, t) = (xi[0], xi[1]);
    let (pos, jac) = match e.kind {
        ElementKind::Line2 => {
            let (n1, n2) = (0.5 * (1.0 - s), 0.5 * (1.0 + s));
            let pos = [n1 * x[0][0] + n2 * x[1][0], n1 * x[0][1] + n2 * x[1][1]];
            let len = (x[1][0] - x[0][0]).hypot(x[1][1] - x[0][1]);
            (pos, 0.5 * len)
        }
        ElementKind::Tri3 => {
            let n = [1.0 - s - t, s, t];
            let pos = [
                n[0] * x[0][0] + n[1] * x[1][0] + n[2] * x[2][0],
                n[0] * x[0][1] + n[1] * x[1][1] + n[2] * x[2][1],
            ];
            let det = (x[1][0] - x[0][0]) * (x[2][1] - x[0][1])
                - (x[2][0] - x[0][0]) * (x[1][1] - x[0][1]);
            (pos, det)
        }
        ElementKind::Quad4 => {
            let signs = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
            let mut pos = [0.0; 2];
            // d(x, y)/d(s, t)
            let mut j = [[0.0; 2]; 2];
            for (a, &(sa, ta)) in signs.iter().enumerate() {
                let n = 0.25 * (1.0 + sa * s) * (1.0 + ta * t);
                let dn_ds = 0.25 * sa * (1.0 + ta * t);
                let dn_dt = 0.25 * ta * (1.0 + sa * s);
                for d in 0..2 {
                    pos[d] += n * x[a][d];
                    j[d][0] += dn_ds * x[a][d];
                    j[d][1] += dn_dt * x[a][d];
                }
            }
            (pos, j[0][0] * j[1][1] - j[0][1] * j[1][0])
        }
    };
    if !(jac > 0.0) {
        return Err(Error::InvertedElement { element });
    }
    Ok((pos, jac))
}

/// Per-target metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetInfo {
    pub element: usize,
    /// Index of the quadrature point within its element.
    pub local: usize,
    /// Reference weight times the Jacobian determinant.
    pub weight: f64,
    /// Unit normal for `line2` elements: the tangent rotated clockwise.
    pub normal: Option<[f64; 2]>,
}

/// Quadrature points with their element metadata, one entry per
/// `(element, quadrature point)` pair.
#[derive(Debug, Clone)]
pub struct TargetSet {
    pub points: PointCloud,
    pub info: Vec<TargetInfo>,
}

impl TargetSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Wraps plain points (e.g. read from a file); `info` stays empty.
    pub fn from_points(points: PointCloud) -> Self {
        TargetSet {
            info: Vec::new(),
            points,
        }
    }
}

fn line_normal(mesh: &Mesh, e: &Element) -> [f64; 2] {
    let (a, b) = (mesh.xy(e.nodes[0]), mesh.xy(e.nodes[1]));
    let (tx, ty) = (b[0] - a[0], b[1] - a[1]);
    let len = tx.hypot(ty);
    [ty / len, -tx / len]
}

/// Quadrature points of every element whose region equals `region`
/// (all elements when `None`).
pub fn quadrature_points(mesh: &Mesh, order: usize, region: Option<&str>) -> Result<TargetSet> {
    let mut coords = Vec::new();
    let mut info = Vec::new();
    for (id, e) in mesh.elements.iter().enumerate() {
        if region.is_some_and(|r| r != e.region) {
            continue;
        }
        let rule = gauss_points_reference(e.kind, order)?;
        let normal = (e.kind == ElementKind::Line2).then(|| line_normal(mesh, e));
        for (local, rp) in rule.iter().enumerate() {
            let (pos, jac) = map_to_physical(mesh, id, rp.xi)?;
            coords.push([pos[0], pos[1], 0.0]);
            info.push(TargetInfo {
                element: id,
                local,
                weight: rp.weight * jac,
                normal,
            });
        }
    }
    if info.is_empty() {
        return Err(Error::EmptyRegion(region.map(str::to_string)));
    }
    Ok(TargetSet {
        points: PointCloud::new(2, coords)?,
        info,
    })
}

/// Structured `nx` × `ny` quad4 mesh of the rectangle `[x0, x1] × [y0, y1]`,
/// region `domain`, plus `line2` elements on the boundary, region `boundary`,
/// ordered counter-clockwise so their normals point outward.
pub fn rectangle_mesh(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidParams("grid needs at least one cell per direction".into()));
    }
    let node = |i: usize, j: usize| j * (nx + 1) + i;
    let mut coords = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = x0 + (x1 - x0) * i as f64 / nx as f64;
            let y = y0 + (y1 - y0) * j as f64 / ny as f64;
            coords.push([x, y, 0.0]);
        }
    }
    let mut elements = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            elements.push(Element {
                kind: ElementKind::Quad4,
                nodes: vec![node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)],
                region: "domain".into(),
            });
        }
    }
    let mut ring = Vec::new();
    ring.extend((0..nx).map(|i| (node(i, 0), node(i + 1, 0))));
    ring.extend((0..ny).map(|j| (node(nx, j), node(nx, j + 1))));
    ring.extend((0..nx).rev().map(|i| (node(i + 1, ny), node(i, ny))));
    ring.extend((0..ny).rev().map(|j| (node(0, j + 1), node(0, j))));
    elements.extend(ring.into_iter().map(|(a, b)| Element {
        kind: ElementKind::Line2,
        nodes: vec![a, b],
        region: "boundary".into(),
    }));
    Mesh::new(PointCloud::new(2, coords)?, elements)
}

/// Writes a mesh in the format read by [`parse_mesh`].
pub fn write_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    use std::fmt::Write as _;
    let mut out = String::from("$nodes\n");
    for (i, p) in mesh.nodes.iter().enumerate() {
        writeln!(out, "{} {:?} {:?}", i + 1, p[0], p[1]).unwrap();
    }
    out.push_str("$elements\n");
    for (i, e) in mesh.elements.iter().enumerate() {
        write!(out, "{} {} {}", i + 1, e.kind.name(), e.region).unwrap();
        for n in &e.nodes {
            write!(out, " {}", n + 1).unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Mesh {
        let nodes = PointCloud::from_xy(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        Mesh::new(
            nodes,
            vec![
                Element {
                    kind: ElementKind::Quad4,
                    nodes: vec![0, 1, 2, 3],
                    region: "domain".into(),
                },
                Element {
                    kind: ElementKind::Line2,
                    nodes: vec![0, 1],
                    region: "bnd".into(),
                },
                Element {
                    kind: ElementKind::Tri3,
                    nodes: vec![0, 1, 3],
                    region: "tri".into(),
                },
            ],
        )
        .unwrap()
    }

    fn write(dir: &Path, text: &str) -> std::path::PathBuf {
        let p = dir.join("m.msh");
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn parse_unit_square() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "# unit square\n$nodes\n1 0 0\n2 1 0\n3 1 1\n4 0 1\n\n$elements\n1 quad4 domain 1 2 3 4\n",
        );
        let mesh = parse_mesh(&p).unwrap();
        assert_eq!(mesh.nodes().len(), 4);
        assert_eq!(mesh.elements().len(), 1);
        assert_eq!(mesh.elements()[0].nodes, vec![0, 1, 2, 3]);
    }

    #[test]
    fn parse_errors() {
        let dir = tempfile::tempdir().unwrap();
        let nodes = "$nodes\n1 0 0\n2 1 0\n3 1 1\n4 0 1\n$elements\n";
        let p = write(dir.path(), &format!("{nodes}1 quad4 d 1 2 3 99\n"));
        assert!(matches!(parse_mesh(&p), Err(Error::BadNodeId { line: 7, .. })));
        let p = write(dir.path(), &format!("{nodes}1 quad4 d 1 2 2 4\n"));
        let err = parse_mesh(&p).unwrap_err();
        assert!(err.to_string().contains("degenerate element"), "{err}");
        let p = write(dir.path(), &format!("{nodes}1 hex8 d 1 2 3 4\n"));
        assert!(matches!(parse_mesh(&p), Err(Error::UnknownElementKind { .. })));
        let p = write(dir.path(), &format!("{nodes}1 tri3 d 1 2 3 4\n"));
        assert!(matches!(parse_mesh(&p), Err(Error::Parse { .. })));
        let p = write(dir.path(), "$nodes\n2 0 0\n");
        assert!(matches!(parse_mesh(&p), Err(Error::Parse { .. })));
        let p = write(dir.path(), "$nodes\n1 0 0\n2 1 0\n3 2 0\n$elements\n1 tri3 d 1 2 3\n");
        assert!(matches!(parse_mesh(&p), Err(Error::DegenerateElement { element: 0 })));
        let p = write(dir.path(), "1 0 0\n");
        assert!(parse_mesh(&p).is_err());
    }

    #[test]
    fn reference_rules() {
        assert_eq!(
            gauss_points_reference(ElementKind::Line2, 1).unwrap(),
            vec![RefPoint { xi: [0.0, 0.0], weight: 2.0 }]
        );
        let two = gauss_points_reference(ElementKind::Line2, 2).unwrap();
        assert!((two[1].xi[0] - 0.5773502691896258).abs() < 1e-16);
        assert!((two[0].xi[0] + 0.5773502691896258).abs() < 1e-16);
        assert!(two.iter().all(|p| p.weight == 1.0));
        let tri = gauss_points_reference(ElementKind::Tri3, 1).unwrap();
        assert_eq!(tri, vec![RefPoint { xi: [1.0 / 3.0, 1.0 / 3.0], weight: 0.5 }]);
        assert_eq!(gauss_points_reference(ElementKind::Quad4, 3).unwrap().len(), 9);
        assert!(matches!(
            gauss_points_reference(ElementKind::Quad4, 4),
            Err(Error::UnsupportedOrder { order: 4, .. })
        ));
        assert!(gauss_points_reference(ElementKind::Tri3, 0).is_err());
    }

    #[test]
    fn mapping_examples() {
        let mesh = unit_square();
        let (pos, j) = map_to_physical(&mesh, 0, [0.0, 0.0]).unwrap();
        assert_eq!((pos, j), ([0.5, 0.5], 0.25));
        let (pos, j) = map_to_physical(&mesh, 2, [1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((pos[0] - 1.0 / 3.0).abs() < 1e-15 && (pos[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((j - 1.0).abs() < 1e-15);

        let nodes = PointCloud::from_xy(&[[0.0, 0.0], [2.0, 0.0]]).unwrap();
        let line = Mesh::new(
            nodes,
            vec![Element {
                kind: ElementKind::Line2,
                nodes: vec![0, 1],
                region: "b".into(),
            }],
        )
        .unwrap();
        assert_eq!(map_to_physical(&line, 0, [0.0, 0.0]).unwrap(), ([1.0, 0.0], 1.0));
        assert!(matches!(
            map_to_physical(&line, 3, [0.0, 0.0]),
            Err(Error::ElementOutOfRange { element: 3 })
        ));
    }

    #[test]
    fn clockwise_elements_are_inverted() {
        let nodes = PointCloud::from_xy(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let mesh = Mesh::new(
            nodes,
            vec![
                Element {
                    kind: ElementKind::Quad4,
                    nodes: vec![0, 3, 2, 1],
                    region: "d".into(),
                },
                Element {
                    kind: ElementKind::Tri3,
                    nodes: vec![0, 3, 1],
                    region: "t".into(),
                },
            ],
        )
        .unwrap();
        assert!(matches!(
            map_to_physical(&mesh, 0, [0.0, 0.0]),
            Err(Error::InvertedElement { element: 0 })
        ));
        assert!(matches!(
            map_to_physical(&mesh, 1, [0.2, 0.2]),
            Err(Error::InvertedElement { element: 1 })
        ));
    }

    #[test]
    fn quadrature_examples() {
        let mesh = unit_square();
        let ts = quadrature_points(&mesh, 2, Some("domain")).unwrap();
        assert_eq!(ts.len(), 4);
        assert!(ts.info.iter().all(|i| i.weight == 0.25 && i.normal.is_none()));
        assert_eq!(ts.info.iter().map(|i| i.weight).sum::<f64>(), 1.0);

        let b = quadrature_points(&mesh, 2, Some("bnd")).unwrap();
        assert_eq!(b.len(), 2);
        assert!(b.info.iter().all(|i| i.normal == Some([0.0, -1.0])));
        assert_eq!(b.info.iter().map(|i| i.local).collect::<Vec<_>>(), vec![0, 1]);

        let err = quadrature_points(&mesh, 2, Some("nothing")).unwrap_err();
        assert!(err.to_string().contains("empty region"));

        let all = quadrature_points(&mesh, 1, None).unwrap();
        assert_eq!(all.len(), 3);
    }

    #[test]
    fn rectangle_mesh_round_trips_and_has_outward_normals() {
        let mesh = rectangle_mesh(0.0, 2.0, -1.0, 1.0, 3, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.msh");
        write_mesh(&mesh, &p).unwrap();
        assert_eq!(parse_mesh(&p).unwrap(), mesh);

        let area: f64 = quadrature_points(&mesh, 2, Some("domain"))
            .unwrap()
            .info
            .iter()
            .map(|i| i.weight)
            .sum();
        assert!((area - 4.0).abs() < 1e-12);
        let bnd = quadrature_points(&mesh, 1, Some("boundary")).unwrap();
        let perimeter: f64 = bnd.info.iter().map(|i| i.weight).sum();
        assert!((perimeter - 8.0).abs() < 1e-12);
        for (i, info) in bnd.info.iter().enumerate() {
            let p = bnd.points.point(i);
            let n = info.normal.unwrap();
            // Outward: moving along the normal leaves the rectangle's centre behind.
            let (cx, cy) = (p[0] - 1.0, p[1]);
            assert!(n[0] * cx + n[1] * cy > 0.0);
        }
    }
}
