//! Problem documents, CSV fields and JSON reports.
//!
//! Floats are written with 17 significant digits so every value read back is
//! bitwise identical to the one written.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analytic::OracleSurface;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryData, DomainSpec, Shape};
use crate::solver::ScalarField;

/// Boundary data as given in a problem document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundarySpec {
    Constant { value: f64 },
    Oracle { oracle: OracleSurface },
    /// Values in the order of the domain's boundary nodes.
    Table { values: Vec<f64> },
}

/// A Dirichlet problem: domain, grid resolution and boundary data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub domain: Shape,
    /// Grid nodes per axis `[x, t]`, endpoints included.
    pub grid: [usize; 2],
    pub boundary: BoundarySpec,
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        let [nx, nt] = self.grid;
        if nx < 3 || nt < 3 {
            return Err(Error::InvalidDomain(format!("grid needs at least 3 nodes per axis, got {nx}x{nt}")));
        }
        DomainSpec::new(self.domain.clone(), nx - 1, nt - 1)
    }

    pub fn build(&self) -> Result<(Arc<DomainSpec>, BoundaryData)> {
        let domain = self.domain()?;
        let data = match &self.boundary {
            BoundarySpec::Constant { value } => BoundaryData::constant(&domain, *value),
            BoundarySpec::Oracle { oracle } => BoundaryData::from_oracle(&domain, oracle)?,
            BoundarySpec::Table { values } => BoundaryData::tabulated(&domain, values.clone())?,
        };
        Ok((Arc::new(domain), data))
    }
}

/// Formats a float with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON formatter that prints floats with 17 significant digits.
struct ExactFloats<'a>(serde_json::ser::PrettyFormatter<'a>);

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> std::io::Result<()> {
                self.0.$name(w $(, $arg)*)
            }
        )*
    };
}

impl serde_json::ser::Formatter for ExactFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        w.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, value as f64)
    }

    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

/// Serialises to pretty JSON with 17-digit floats; non-finite floats become
/// `null`.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let fmt = ExactFloats(serde_json::ser::PrettyFormatter::with_indent(b"  "));
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

/// Writes `x,t,g` rows for the active nodes, `t` outer and `x` inner.
pub fn write_field_csv<W: Write>(field: &ScalarField, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "t", "g"])?;
    let d = field.domain();
    for k in 0..d.node_count() {
        if d.is_active(k) {
            let (x, t) = d.coords(k);
            w.write_record([format_float(x), format_float(t), format_float(field.value(k))])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_field_csv(field: &ScalarField, path: &Path) -> Result<()> {
    write_field_csv(field, std::fs::File::create(path)?)
}

/// Rows of a field CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FieldTable {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub g: Vec<f64>,
}

pub fn read_field_table<R: Read>(input: R) -> Result<FieldTable> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "t", "g"] {
        return Err(Error::Parse(format!("expected header x,t,g, got {headers:?}")));
    }
    let mut table = FieldTable::default();
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| Error::Parse("short CSV row".into()))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(e.to_string()))
        };
        table.x.push(parse(0)?);
        table.t.push(parse(1)?);
        table.g.push(parse(2)?);
    }
    Ok(table)
}

fn distinct_sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s.dedup();
    s
}

impl FieldTable {
    /// The rectangle grid spanned by the distinct coordinates of the rows.
    pub fn infer_rectangle(&self) -> Result<DomainSpec> {
        let xs = distinct_sorted(&self.x);
        let ts = distinct_sorted(&self.t);
        if xs.len() < 3 || ts.len() < 3 {
            return Err(Error::Parse("field table does not span a grid".into()));
        }
        DomainSpec::rectangle(
            xs[0],
            xs[xs.len() - 1],
            ts[0],
            ts[ts.len() - 1],
            xs.len() - 1,
            ts.len() - 1,
        )
    }

    /// Field on `domain` whose rows match its active nodes in order; the
    /// boundary data are the boundary rows.
    pub fn into_field(self, domain: Arc<DomainSpec>) -> Result<ScalarField> {
        let active: Vec<usize> = (0..domain.node_count()).filter(|&k| domain.is_active(k)).collect();
        if active.len() != self.g.len() {
            return Err(Error::Parse(format!(
                "table has {} rows, domain has {} active nodes",
                self.g.len(),
                active.len()
            )));
        }
        let diam = domain.diameter();
        let mut values = vec![f64::NAN; domain.node_count()];
        for (row, &k) in active.iter().enumerate() {
            let (x, t) = domain.coords(k);
            if (x - self.x[row]).abs() > 1e-9 * diam || (t - self.t[row]).abs() > 1e-9 * diam {
                return Err(Error::Parse(format!(
                    "row {row} at ({}, {}) does not match node ({x}, {t})",
                    self.x[row], self.t[row]
                )));
            }
            values[k] = self.g[row];
        }
        let trace = domain.boundary_nodes().iter().map(|&k| values[k]).collect();
        let boundary = BoundaryData::tabulated(&domain, trace)?;
        ScalarField::new(domain, values, boundary)
    }
}

/// Loads a field CSV, on `domain` if given and otherwise on the rectangle its
/// coordinates span.
pub fn load_field_csv(path: &Path, domain: Option<Arc<DomainSpec>>) -> Result<ScalarField> {
    let table = read_field_table(std::fs::File::open(path)?)?;
    let domain = match domain {
        Some(d) => d,
        None => Arc::new(table.infer_rectangle()?),
    };
    table.into_field(domain)
}
