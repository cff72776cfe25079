//! Mesh file formats.
//!
//! The native ASCII format:
//!
//! ```text
//! stmesh <dim> <n_nodes> <n_elements> <n_facets>
//! <id> <x> [<y> [<z> [<t>]]]          (n_nodes lines)
//! <id> <n1> ... <n_{dim+1}>           (n_elements lines)
//! <tag> <n1> ... <n_dim>              (n_facets lines)
//! ```
//!
//! Blank lines and `#` comments are ignored. Spatial meshes use the same
//! format with `dim` equal to the spatial dimension. Spatial meshes may also
//! be read from version 2.2 ASCII Gmsh files.

use super::{det_of, sorted, simplex_faces, BoundaryFacet, ElementKind, Facet, Interface, SpaceTimeSlabMesh, SpatialMesh};
use crate::error::{Error, Result};
use crate::geometry::{Point, MAX_DIM};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

/// Contents of a native mesh file with node references resolved to indices.
#[derive(Clone, Debug, Default)]
pub struct MeshFile {
    pub dim: usize,
    pub nodes: Vec<Vec<f64>>,
    pub elements: Vec<Vec<usize>>,
    /// Element line number, for diagnostics.
    pub element_lines: Vec<usize>,
    pub facets: Vec<(String, Vec<usize>)>,
}

fn perr(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let toks: Vec<&str> = l.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

pub fn parse_stmesh(text: &str) -> Result<MeshFile> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    if header[0] != "stmesh" || header.len() != 5 {
        return Err(perr(hl, "expected header 'stmesh <dim> <n_nodes> <n_elements> <n_facets>'"));
    }
    let num = |s: &str, line: usize| s.parse::<usize>().map_err(|_| perr(line, format!("expected a non-negative integer, got '{s}'")));
    let dim = num(header[1], hl)?;
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(perr(hl, format!("dimension {dim} not in 1..=4")));
    }
    let (nn, ne, nf) = (num(header[2], hl)?, num(header[3], hl)?, num(header[4], hl)?);
    let mut out = MeshFile {
        dim,
        ..Default::default()
    };
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut last = hl;
    for _ in 0..nn {
        let (ln, t) = lines.next().ok_or_else(|| perr(last + 1, "unexpected end of file in node section"))?;
        last = ln;
        if t.len() != dim + 1 {
            return Err(perr(ln, format!("node line needs an id and {dim} coordinates")));
        }
        let c = t[1..]
            .iter()
            .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| perr(ln, "invalid coordinate"))?;
        if ids.insert(t[0].to_string(), out.nodes.len()).is_some() {
            return Err(perr(ln, format!("duplicate node id {}", t[0])));
        }
        out.nodes.push(c);
    }
    let lookup = |ids: &HashMap<String, usize>, s: &str, ln: usize| ids.get(s).copied().ok_or_else(|| perr(ln, format!("unknown node id {s}")));
    for _ in 0..ne {
        let (ln, t) = lines.next().ok_or_else(|| perr(last + 1, "unexpected end of file in element section"))?;
        last = ln;
        if t.len() != dim + 2 {
            return Err(perr(ln, format!("element line needs an id and {} node ids", dim + 1)));
        }
        let el = t[1..].iter().map(|s| lookup(&ids, s, ln)).collect::<Result<Vec<_>>>()?;
        out.elements.push(el);
        out.element_lines.push(ln);
    }
    for _ in 0..nf {
        let (ln, t) = lines.next().ok_or_else(|| perr(last + 1, "unexpected end of file in facet section"))?;
        last = ln;
        if t.len() != dim + 1 {
            return Err(perr(ln, format!("facet line needs a tag and {dim} node ids")));
        }
        let f = t[1..].iter().map(|s| lookup(&ids, s, ln)).collect::<Result<Vec<_>>>()?;
        out.facets.push((t[0].to_string(), f));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(perr(ln, "trailing content after the declared sections"));
    }
    Ok(out)
}

fn coords4(c: &[f64]) -> [f64; MAX_DIM] {
    let mut a = [0.0; MAX_DIM];
    a[..c.len()].copy_from_slice(c);
    a
}

/// Reorders nodes to positive orientation and rejects duplicate, degenerate
/// and folded elements. Returns the parity of each element.
fn canonicalize(dim: usize, nodes: &[Vec<f64>], elements: &mut [Vec<usize>]) -> Result<Vec<bool>> {
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut parity = Vec::with_capacity(elements.len());
    let scale = nodes
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(1e-300);
    for (e, el) in elements.iter_mut().enumerate() {
        let mut s = sorted(el);
        s.dedup();
        if s.len() != el.len() {
            return Err(Error::NegativeVolumeElement { element: e });
        }
        if let Some(prev) = seen.insert(s, e) {
            return Err(Error::NonConformingMesh(format!("element {e} duplicates element {prev}")));
        }
        let c: Vec<_> = el.iter().map(|&v| coords4(&nodes[v])).collect();
        let det = det_of(&c, dim);
        if det.abs() <= 1e-14 * scale.powi(dim as i32) {
            return Err(Error::NegativeVolumeElement { element: e });
        }
        if det < 0.0 {
            el.swap(0, 1);
        }
        parity.push(det < 0.0);
    }
    // opposite vertices of an interior facet must lie on opposite sides
    let mut owners: HashMap<Vec<usize>, Vec<(usize, usize)>> = HashMap::new();
    for (e, el) in elements.iter().enumerate() {
        for (k, f) in simplex_faces(el).into_iter().enumerate() {
            owners.entry(sorted(&f)).or_default().push((e, el[k]));
        }
    }
    for (f, o) in &owners {
        if o.len() > 2 {
            return Err(Error::NonConformingMesh(format!("facet {f:?} shared by {} elements", o.len())));
        }
        if o.len() == 2 {
            let mut side = [0.0; 2];
            for (s, &(_, opp)) in o.iter().enumerate() {
                let mut c: Vec<_> = f.iter().map(|&v| coords4(&nodes[v])).collect();
                c.push(coords4(&nodes[opp]));
                side[s] = det_of(&c, dim);
            }
            if side[0] * side[1] >= 0.0 {
                return Err(Error::NegativeVolumeElement { element: o[0].0.max(o[1].0) });
            }
        }
    }
    Ok(parity)
}

fn interface_nodes(facets: &[Vec<usize>], nodes: &[Point], d: usize) -> Vec<usize> {
    let mut v: Vec<usize> = facets.iter().flatten().copied().collect();
    v.sort_unstable();
    v.dedup();
    v.sort_by(|&a, &b| {
        nodes[a].coords[..d]
            .partial_cmp(&nodes[b].coords[..d])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    v
}

/// Builds an unstructured slab from a parsed file. Boundary facets lying at
/// the minimum or maximum time form the lower and upper interfaces; other
/// boundary facets take their tag from the file, or `untagged`.
pub fn ust_from_file(f: MeshFile) -> Result<SpaceTimeSlabMesh> {
    let dim = f.dim;
    if dim < 2 {
        return Err(Error::NonConformingMesh("space-time meshes need dimension >= 2".into()));
    }
    let d = dim - 1;
    let mut elements = f.elements;
    let parity = canonicalize(dim, &f.nodes, &mut elements)?;
    let nodes: Vec<Point> = f.nodes.iter().map(|c| Point::new(c)).collect();
    let t = |v: usize| nodes[v].coords[d];
    let (t_lo, t_hi) = nodes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.coords[d]), b.max(p.coords[d])));
    if !(t_hi > t_lo) {
        return Err(Error::NonPositiveTimeStep { t_lo, t_hi });
    }
    let tol = 1e-10 * (t_hi - t_lo);
    let tags: HashMap<Vec<usize>, String> = f.facets.iter().map(|(tag, n)| (sorted(n), tag.clone())).collect();
    let mut owners: HashMap<Vec<usize>, (usize, Vec<usize>)> = HashMap::new();
    let mut count: HashMap<Vec<usize>, usize> = HashMap::new();
    for (e, el) in elements.iter().enumerate() {
        for face in simplex_faces(el) {
            let s = sorted(&face);
            *count.entry(s.clone()).or_default() += 1;
            owners.insert(s, (e, face));
        }
    }
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut lateral = Vec::new();
    let mut keys: Vec<&Vec<usize>> = count.iter().filter(|(_, c)| **c == 1).map(|(k, _)| k).collect();
    keys.sort();
    for key in keys {
        let (owner, face) = owners[key].clone();
        if face.iter().all(|&v| (t(v) - t_lo).abs() <= tol) {
            lower.push(face);
        } else if face.iter().all(|&v| (t(v) - t_hi).abs() <= tol) {
            upper.push(face);
        } else {
            lateral.push(Facet {
                tag: tags.get(key).cloned().unwrap_or_else(|| "untagged".into()),
                nodes: face,
                owner,
            });
        }
    }
    let n = nodes.len();
    Ok(SpaceTimeSlabMesh {
        space_dim: d,
        lower: Interface {
            nodes: interface_nodes(&lower, &nodes, d),
            facets: lower,
        },
        upper: Interface {
            nodes: interface_nodes(&upper, &nodes, d),
            facets: upper,
        },
        nodes,
        kind: ElementKind::Simplex,
        elements,
        lateral,
        node_level: vec![0; n],
        parity,
        t_lo,
        t_hi,
        spatial: None,
    })
}

pub fn import_ust(path: &Path) -> Result<SpaceTimeSlabMesh> {
    let text = std::fs::read_to_string(path)?;
    ust_from_file(parse_stmesh(&text)?)
}

pub fn spatial_from_file(f: MeshFile) -> Result<SpatialMesh> {
    let mut elements = f.elements;
    canonicalize(f.dim, &f.nodes, &mut elements)?;
    Ok(SpatialMesh {
        dim: f.dim,
        nodes: f.nodes.iter().map(|c| Point::new(c)).collect(),
        elements,
        boundary: f.facets.into_iter().map(|(tag, nodes)| BoundaryFacet { nodes, tag }).collect(),
    })
}

/// Reads a spatial mesh in the native or Gmsh 2.2 format.
pub fn read_spatial_mesh(path: &Path) -> Result<SpatialMesh> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with("$MeshFormat") {
        read_gmsh_spatial(&text)
    } else {
        spatial_from_file(parse_stmesh(&text)?)
    }
}

/// Parses a version 2.2 ASCII Gmsh mesh. The highest-dimensional simplices
/// become elements; simplices one dimension lower become boundary facets
/// tagged by physical name (or number).
pub fn read_gmsh_spatial(text: &str) -> Result<SpatialMesh> {
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).collect();
    let mut i = 0;
    let mut names: HashMap<String, String> = HashMap::new();
    let mut raw_nodes: HashMap<String, [f64; 3]> = HashMap::new();
    let mut cells: Vec<(usize, usize, String, Vec<String>)> = Vec::new();
    let mut version_ok = false;
    let count = |i: usize| -> Result<usize> {
        lines
            .get(i)
            .and_then(|(_, l)| l.parse().ok())
            .ok_or_else(|| perr(lines.get(i).map_or(i + 1, |x| x.0), "expected an entry count"))
    };
    while i < lines.len() {
        let (ln, l) = lines[i];
        match l {
            "$MeshFormat" => {
                let v = lines.get(i + 1).map(|x| x.1).unwrap_or("");
                if !v.starts_with("2.2") || v.split_whitespace().nth(1) != Some("0") {
                    return Err(perr(ln + 1, "only ASCII MeshFormat 2.2 is supported"));
                }
                version_ok = true;
                i += 3;
            }
            "$PhysicalNames" => {
                let n = count(i + 1)?;
                for k in 0..n {
                    let (ln, l) = lines[i + 2 + k];
                    let t: Vec<&str> = l.splitn(3, ' ').collect();
                    if t.len() != 3 {
                        return Err(perr(ln, "malformed physical name"));
                    }
                    names.insert(t[1].to_string(), t[2].trim_matches('"').to_string());
                }
                i += n + 3;
            }
            "$Nodes" => {
                let n = count(i + 1)?;
                for k in 0..n {
                    let (ln, l) = *lines.get(i + 2 + k).ok_or_else(|| perr(ln, "truncated node section"))?;
                    let t: Vec<&str> = l.split_whitespace().collect();
                    if t.len() != 4 {
                        return Err(perr(ln, "node line needs an id and 3 coordinates"));
                    }
                    let mut c = [0.0; 3];
                    for a in 0..3 {
                        c[a] = t[a + 1].parse().map_err(|_| perr(ln, "invalid coordinate"))?;
                    }
                    raw_nodes.insert(t[0].to_string(), c);
                }
                i += n + 3;
            }
            "$Elements" => {
                let n = count(i + 1)?;
                for k in 0..n {
                    let (ln, l) = *lines.get(i + 2 + k).ok_or_else(|| perr(ln, "truncated element section"))?;
                    let t: Vec<&str> = l.split_whitespace().collect();
                    let parse = |s: &str| s.parse::<usize>().map_err(|_| perr(ln, "invalid integer"));
                    if t.len() < 3 {
                        return Err(perr(ln, "malformed element line"));
                    }
                    let ty = parse(t[1])?;
                    let ntags = parse(t[2])?;
                    let dim = match ty {
                        15 => 0,
                        1 => 1,
                        2 => 2,
                        4 => 3,
                        other => return Err(perr(ln, format!("unsupported element type {other}"))),
                    };
                    if t.len() != 3 + ntags + dim + 1 {
                        return Err(perr(ln, "element node count does not match its type"));
                    }
                    let tag = if ntags > 0 { t[3].to_string() } else { "0".to_string() };
                    cells.push((ln, dim, tag, t[3 + ntags..].iter().map(|s| s.to_string()).collect()));
                }
                i += n + 3;
            }
            _ => i += 1,
        }
    }
    if !version_ok {
        return Err(perr(1, "missing $MeshFormat section"));
    }
    let d = cells.iter().map(|c| c.1).max().ok_or_else(|| perr(1, "no elements"))?;
    if d == 0 {
        return Err(perr(1, "no simplices of positive dimension"));
    }
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut nodes = Vec::new();
    let mut resolve = |id: &str, ln: usize, nodes: &mut Vec<Point>| -> Result<usize> {
        if let Some(&k) = index.get(id) {
            return Ok(k);
        }
        let c = raw_nodes.get(id).ok_or_else(|| perr(ln, format!("unknown node id {id}")))?;
        nodes.push(Point::new(&c[..d]));
        index.insert(id.to_string(), nodes.len() - 1);
        Ok(nodes.len() - 1)
    };
    let mut elements = Vec::new();
    let mut facets = Vec::new();
    for (ln, dim, _, ids) in &cells {
        if *dim == d {
            elements.push(ids.iter().map(|s| resolve(s, *ln, &mut nodes)).collect::<Result<Vec<_>>>()?);
        }
    }
    for (ln, dim, tag, ids) in &cells {
        if *dim + 1 == d {
            let f = ids.iter().map(|s| resolve(s, *ln, &mut nodes)).collect::<Result<Vec<_>>>()?;
            facets.push((names.get(tag).cloned().unwrap_or_else(|| tag.clone()), f));
        }
    }
    let file = MeshFile {
        dim: d,
        nodes: nodes.iter().map(|p| p.as_slice().to_vec()).collect(),
        element_lines: vec![0; elements.len()],
        elements,
        facets,
    };
    spatial_from_file(file)
}

fn fmt_mesh(dim: usize, nodes: &[Point], elements: &[Vec<usize>], facets: &[(String, Vec<usize>)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "stmesh {dim} {} {} {}", nodes.len(), elements.len(), facets.len());
    for (i, p) in nodes.iter().enumerate() {
        let _ = write!(s, "{i}");
        for c in p.as_slice() {
            let _ = write!(s, " {c:.17e}");
        }
        s.push('\n');
    }
    for (i, el) in elements.iter().enumerate() {
        let _ = write!(s, "{i}");
        for v in el {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    for (tag, f) in facets {
        s.push_str(tag);
        for v in f {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    s
}

/// Writes a simplex slab with its lateral facets.
pub fn write_stmesh(path: &Path, m: &SpaceTimeSlabMesh) -> Result<()> {
    let facets: Vec<(String, Vec<usize>)> = m.lateral.iter().map(|f| (f.tag.clone(), f.nodes.clone())).collect();
    std::fs::write(path, fmt_mesh(m.st_dim(), &m.nodes, &m.simplices(), &facets))?;
    Ok(())
}

pub fn write_spatial_stmesh(path: &Path, m: &SpatialMesh) -> Result<()> {
    let facets: Vec<(String, Vec<usize>)> = m.boundary.iter().map(|f| (f.tag.clone(), f.nodes.clone())).collect();
    std::fs::write(path, fmt_mesh(m.dim, &m.nodes, &m.elements, &facets))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{subdivide_sst, validate_conformity};

    const TWO_TRI: &str = "# unit square in (x, t)
stmesh 2 4 2 2
1 0 0
2 1 0
3 1 1
4 0 1
10 1 2 3
11 1 3 4
left 4 1
right 2 3
";

    #[test]
    fn parse_and_detect_interfaces() {
        let m = ust_from_file(parse_stmesh(TWO_TRI).unwrap()).unwrap();
        assert_eq!(m.elements.len(), 2);
        assert_eq!(m.lower.facets.len(), 1);
        assert_eq!(m.upper.facets.len(), 1);
        assert_eq!(m.lateral_tags(), vec!["left", "right"]);
        assert_eq!(m.lower.nodes, vec![0, 1]);
        assert_eq!(validate_conformity(&m).defects(), 0);
    }

    #[test]
    fn duplicate_and_inverted() {
        let dup = TWO_TRI.replace("stmesh 2 4 2 2", "stmesh 2 4 3 2").replace("11 1 3 4\n", "11 1 3 4\n12 3 4 1\n");
        assert!(matches!(ust_from_file(parse_stmesh(&dup).unwrap()), Err(Error::NonConformingMesh(_))));
        // second triangle folded over the first
        let folded = TWO_TRI.replace("4 0 1\n", "4 0.9 0.5\n");
        assert!(matches!(ust_from_file(parse_stmesh(&folded).unwrap()), Err(Error::NegativeVolumeElement { .. })));
        let flat = TWO_TRI.replace("4 0 1\n", "4 0.5 0.5\n");
        assert!(matches!(ust_from_file(parse_stmesh(&flat).unwrap()), Err(Error::NegativeVolumeElement { .. })));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let bad = TWO_TRI.replace("3 1 1", "3 1 x");
        match parse_stmesh(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        let bad = TWO_TRI.replace("11 1 3 4", "11 1 3 9");
        assert!(matches!(parse_stmesh(&bad), Err(Error::Parse { line: 8, .. })));
    }

    #[test]
    fn round_trip() {
        let s = SpatialMesh::rectangle(0.0, 1.0, 0.0, 1.0, 3, 2, |_| "w".into());
        let st = subdivide_sst(&s, 0.0, 0.1, &vec![0; s.nodes.len()]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.stmesh");
        write_stmesh(&p, &st).unwrap();
        let back = import_ust(&p).unwrap();
        assert_eq!(back.elements.len(), st.elements.len());
        assert_eq!(back.lateral.len(), st.lateral.len());
        assert_eq!(back.lower.facets.len(), s.elements.len());
        assert!((back.volume() - 0.1).abs() < 1e-14);
        let ps = dir.path().join("s.stmesh");
        write_spatial_stmesh(&ps, &s).unwrap();
        let sb = read_spatial_mesh(&ps).unwrap();
        assert_eq!(sb.elements.len(), 12);
        assert_eq!(sb.boundary.len(), s.boundary.len());
    }

    #[test]
    fn gmsh_reader() {
        let text = r#"$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
2
1 1 "wall"
2 2 "fluid"
$EndPhysicalNames
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
6
1 2 2 2 1 1 2 3
2 2 2 2 1 1 3 4
3 1 2 1 1 1 2
4 1 2 1 1 2 3
5 1 2 1 1 3 4
6 1 2 1 1 4 1
$EndElements
"#;
        let m = read_gmsh_spatial(text).unwrap();
        assert_eq!(m.dim, 2);
        assert_eq!(m.elements.len(), 2);
        assert_eq!(m.boundary.len(), 4);
        assert_eq!(m.tags(), vec!["wall"]);
        assert!((m.volume() - 1.0).abs() < 1e-15);
    }
}
