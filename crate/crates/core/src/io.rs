//! JSON module documents, transform documents and CSV tables.
//!
//! Matrix entries are strings: decimal residues over GF(p), `num/den` over
//! the rationals. Points with dimension 0 may be omitted, and so may edges
//! touching them.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{GridPoint, GridPoset};
use crate::matrix::Matrix;
use crate::module::PersistenceModule;
use crate::natural::NatTransform;
use crate::table::InvariantTable;

pub const FORMAT_VERSION: &str = "mpers2/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimEntry {
    pub point: Vec<usize>,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub point: Vec<usize>,
    pub axis: usize,
    pub matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleDocument {
    pub format: String,
    pub field: String,
    pub axes: Vec<Vec<f64>>,
    #[serde(default)]
    pub dims: Vec<DimEntry>,
    #[serde(default)]
    pub edges: Vec<EdgeEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentEntry {
    pub point: Vec<usize>,
    pub matrix: Vec<Vec<String>>,
}

/// A natural transformation between two documented modules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformDocument {
    pub format: String,
    pub field: String,
    pub source: String,
    pub target: String,
    pub components: Vec<ComponentEntry>,
}

fn doc_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Document {
        location: location.into(),
        message: message.into(),
    }
}

pub fn matrix_to_strings(m: &Matrix) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|r| m.row(r).iter().map(|s| s.to_exact_string()).collect())
        .collect()
}

fn matrix_from_strings(field: Field, rows: &[Vec<String>], expected: (usize, usize), location: &str) -> Result<Matrix> {
    let cols = rows.first().map_or(expected.1, |r| r.len());
    if rows.iter().any(|r| r.len() != cols) {
        return Err(doc_err(location, "rows of the matrix have different lengths"));
    }
    let found = (rows.len(), if rows.is_empty() { expected.1 } else { cols });
    if found != expected {
        return Err(doc_err(
            location,
            format!(
                "matrix is {}x{}, expected {}x{}",
                found.0, found.1, expected.0, expected.1
            ),
        ));
    }
    let mut data = Vec::with_capacity(found.0 * found.1);
    for (r, row) in rows.iter().enumerate() {
        for (c, s) in row.iter().enumerate() {
            data.push(
                field
                    .parse_scalar(s)
                    .map_err(|e| doc_err(format!("{location}, entry ({r},{c})"), e.to_string()))?,
            );
        }
    }
    Ok(Matrix::from_scalars(field, found.0, found.1, data)?)
}

pub fn export_module(m: &PersistenceModule) -> ModuleDocument {
    let grid = m.grid();
    let mut dims = Vec::new();
    let mut edges = Vec::new();
    for (lin, p) in grid.points().enumerate() {
        let d = m.dim_linear(lin);
        if d > 0 {
            dims.push(DimEntry {
                point: p.0.clone(),
                dim: d,
            });
        }
        for axis in 0..grid.nparams() {
            if let Some(e) = m.map_linear(lin, axis) {
                if e.rows() > 0 && e.cols() > 0 {
                    edges.push(EdgeEntry {
                        point: p.0.clone(),
                        axis,
                        matrix: matrix_to_strings(e),
                    });
                }
            }
        }
    }
    ModuleDocument {
        format: FORMAT_VERSION.into(),
        field: m.field().to_string(),
        axes: grid.axes().to_vec(),
        dims,
        edges,
    }
}

fn check_version(format: &str) -> Result<()> {
    if format != FORMAT_VERSION {
        return Err(doc_err(
            "format",
            format!("unsupported format {format:?}, expected {FORMAT_VERSION:?}"),
        ));
    }
    Ok(())
}

fn parse_field(s: &str) -> Result<Field> {
    s.parse::<Field>().map_err(|e| doc_err("field", e.to_string()))
}

fn parse_point(grid: &GridPoset, point: &[usize], location: &str) -> Result<GridPoint> {
    let p = GridPoint(point.to_vec());
    if !grid.contains(&p) {
        return Err(doc_err(location, format!("point {point:?} is outside the grid")));
    }
    Ok(p)
}

/// Builds and validates the module described by `doc`.
pub fn import_module(doc: &ModuleDocument) -> Result<PersistenceModule> {
    check_version(&doc.format)?;
    let field = parse_field(&doc.field)?;
    let grid = GridPoset::new(doc.axes.clone()).map_err(|e| doc_err("axes", e.to_string()))?;
    let mut dims = vec![0; grid.len()];
    let mut seen = vec![false; grid.len()];
    for (i, entry) in doc.dims.iter().enumerate() {
        let location = format!("dims[{i}]");
        let p = parse_point(&grid, &entry.point, &location)?;
        let lin = grid.linear(&p);
        if seen[lin] {
            return Err(doc_err(location, format!("point {p} listed twice")));
        }
        seen[lin] = true;
        dims[lin] = entry.dim;
    }
    let mut m = PersistenceModule::with_dims(grid.clone(), field, dims)?;
    let mut given = vec![false; grid.len() * grid.nparams()];
    for (i, entry) in doc.edges.iter().enumerate() {
        let location = format!("edges[{i}]");
        let p = parse_point(&grid, &entry.point, &location)?;
        if entry.axis >= grid.nparams() {
            return Err(doc_err(location, format!("axis {} out of range", entry.axis)));
        }
        let Some(q) = grid.step(&p, entry.axis) else {
            return Err(doc_err(
                location,
                format!("edge at {p} along axis {} leaves the grid", entry.axis),
            ));
        };
        let slot = grid.linear(&p) * grid.nparams() + entry.axis;
        if given[slot] {
            return Err(doc_err(
                location,
                format!("edge at {p} along axis {} listed twice", entry.axis),
            ));
        }
        given[slot] = true;
        let location = format!("{location} (edge at {p} along axis {})", entry.axis);
        let mat = matrix_from_strings(field, &entry.matrix, (m.dim(&q), m.dim(&p)), &location)?;
        m.set_map(&p, entry.axis, mat)?;
    }
    for (lin, p) in grid.points().enumerate() {
        for axis in 0..grid.nparams() {
            let Some(q) = grid.step(&p, axis) else { continue };
            if !given[lin * grid.nparams() + axis] && m.dim(&p) > 0 && m.dim(&q) > 0 {
                return Err(doc_err(
                    "edges",
                    format!("missing edge at {p} along axis {axis} between nonzero fibers"),
                ));
            }
        }
    }
    let violations = m.validate();
    if !violations.is_empty() {
        let listed: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(doc_err("module", format!("not a valid module: {}", listed.join("; "))));
    }
    Ok(m)
}

/// Parses JSON text into a document, locating errors by path and line.
pub fn parse_document<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        doc_err(
            format!("line {} column {}, at {}", inner.line(), inner.column(), path),
            inner.to_string(),
        )
    })
}

pub fn module_from_json(text: &str) -> Result<PersistenceModule> {
    import_module(&parse_document::<ModuleDocument>(text)?)
}

pub fn module_to_json(m: &PersistenceModule) -> String {
    let mut s = serde_json::to_string_pretty(&export_module(m)).expect("serializable");
    s.push('\n');
    s
}

pub fn export_transform(eta: &NatTransform, source: &str, target: &str) -> TransformDocument {
    let grid = eta.source().grid();
    let components = grid
        .points()
        .zip(eta.components())
        .filter(|(_, c)| c.rows() > 0 && c.cols() > 0)
        .map(|(p, c)| ComponentEntry {
            point: p.0,
            matrix: matrix_to_strings(c),
        })
        .collect();
    TransformDocument {
        format: FORMAT_VERSION.into(),
        field: eta.source().field().to_string(),
        source: source.into(),
        target: target.into(),
        components,
    }
}

/// Component matrices of a documented transform between known modules.
pub fn import_transform_components(
    doc: &TransformDocument,
    source: &PersistenceModule,
    target: &PersistenceModule,
) -> Result<Vec<Matrix>> {
    check_version(&doc.format)?;
    let field = parse_field(&doc.field)?;
    if field != source.field() {
        return Err(doc_err("field", format!("expected {}, found {field}", source.field())));
    }
    let grid = source.grid();
    let mut given: BTreeMap<usize, &ComponentEntry> = BTreeMap::new();
    for (i, c) in doc.components.iter().enumerate() {
        let location = format!("components[{i}]");
        let p = parse_point(grid, &c.point, &location)?;
        if given.insert(grid.linear(&p), c).is_some() {
            return Err(doc_err(location, format!("point {p} listed twice")));
        }
    }
    grid.points()
        .enumerate()
        .map(|(lin, p)| {
            let shape = (target.dim_linear(lin), source.dim_linear(lin));
            match given.get(&lin) {
                Some(c) => matrix_from_strings(field, &c.matrix, shape, &format!("component at {p}")),
                None => Ok(Matrix::zeros(field, shape.0, shape.1)),
            }
        })
        .collect()
}

/// Writes `a_0..a_{n-1}, b_0..b_{n-1}, value` rows with grid coordinates,
/// in lexicographic pair order.
pub fn write_table_csv<T: Display, W: Write>(table: &InvariantTable<T>, out: &mut W) -> std::io::Result<()> {
    let grid = table.grid();
    let n = grid.nparams();
    let header: Vec<String> = (0..n)
        .map(|i| format!("a_{i}"))
        .chain((0..n).map(|i| format!("b_{i}")))
        .chain(std::iter::once("value".to_string()))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for (a, b, v) in table.iter() {
        let fields: Vec<String> = grid
            .coords(a)
            .into_iter()
            .chain(grid.coords(b))
            .map(|c| c.to_string())
            .chain(std::iter::once(v.to_string()))
            .collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn table_to_csv<T: Display>(table: &InvariantTable<T>) -> String {
    let mut buf = Vec::new();
    write_table_csv(table, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridBox;

    fn sample() -> PersistenceModule {
        let g = GridPoset::integer(&[3, 2], 1).unwrap();
        let a =
            PersistenceModule::interval_on_box(g.clone(), Field::GF2, &GridBox::new([0, 0], [1, 1]).unwrap()).unwrap();
        a.direct_sum(&PersistenceModule::constant(g, Field::GF2, 1)).unwrap()
    }

    #[test]
    fn round_trip() {
        let m = sample();
        let text = module_to_json(&m);
        assert_eq!(module_from_json(&text).unwrap(), m);
        let r = {
            let f = Field::Rational;
            let g = GridPoset::new(vec![vec![0.0, 0.5]]).unwrap();
            let mut m = PersistenceModule::constant(g, f, 2);
            m.set_map(
                &GridPoint::from([0]),
                0,
                Matrix::from_rows(f, &[[3, 0], [1, -2]])
                    .scale(&Field::rational(1, 3))
                    .unwrap(),
            )
            .unwrap();
            m
        };
        let text = module_to_json(&r);
        assert!(text.contains("\"1/1\""), "{text}");
        assert_eq!(module_from_json(&text).unwrap(), r);
    }

    #[test]
    fn omitted_zero_points_are_zero() {
        let text = r#"{"format":"mpers2/1","field":"GF(2)","axes":[[0,1,2]],
            "dims":[{"point":[1],"dim":1},{"point":[2],"dim":1}],
            "edges":[{"point":[1],"axis":0,"matrix":[["1"]]}]}"#;
        let m = module_from_json(text).unwrap();
        let g = GridPoset::range(&[3]).unwrap();
        let expected = PersistenceModule::interval_on_box(g, Field::GF2, &GridBox::new([1], [2]).unwrap()).unwrap();
        assert_eq!(m, expected);
    }

    #[test]
    fn bad_shape_names_the_edge() {
        let text = r#"{"format":"mpers2/1","field":"GF(2)","axes":[[0,1]],
            "dims":[{"point":[0],"dim":1},{"point":[1],"dim":1}],
            "edges":[{"point":[0],"axis":0,"matrix":[["1","0"]]}]}"#;
        let err = module_from_json(text).unwrap_err().to_string();
        assert!(err.contains("edge at (0) along axis 0"), "{err}");
        assert!(err.contains("1x2"), "{err}");
    }

    #[test]
    fn unknown_version_and_syntax_errors() {
        let doc = module_to_json(&sample()).replace("mpers2/1", "mpers2/9");
        assert!(module_from_json(&doc)
            .unwrap_err()
            .to_string()
            .contains("unsupported format"));
        let err = module_from_json(
            r#"{"format":"mpers2/1","field":"GF(2)","axes":[[0,1]],"dims":[{"point":[0],"dim":"x"}]}"#,
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("dims[0].dim"), "{err}");
    }

    #[test]
    fn csv_layout() {
        let g = GridPoset::new(vec![vec![0.5, 1.5]]).unwrap();
        let mut t = InvariantTable::new(g);
        t.insert(GridPoint::from([0]), GridPoint::from([1]), 2usize);
        t.insert(GridPoint::from([0]), GridPoint::from([0]), 1usize);
        assert_eq!(table_to_csv(&t), "a_0,b_0,value\n0.5,0.5,1\n0.5,1.5,2\n");
    }
}
