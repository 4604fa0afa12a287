//! Problem selection from a config document or from flags.

use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;

use horograph::analytic::OracleSurface;
use horograph::geometry::{BoundaryData, DomainSpec, Shape};
use horograph::io::{BoundarySpec, ProblemConfig};

use crate::commands::CliError;

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Problem document (domain, grid, boundary).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Rectangle `[x0,x1]x[t0,t1]`.
    #[arg(long)]
    pub domain: Option<String>,
    /// Grid nodes per axis `NX,NT`.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<[usize; 2]>,
    /// Constant boundary data.
    #[arg(long, conflicts_with = "oracle")]
    pub constant: Option<f64>,
    /// Closed-form surface: geodesic-plane, horocylinder, euclidean-plane, x-sinh-t.
    #[arg(long, visible_alias = "kind")]
    pub oracle: Option<String>,
    /// Geodesic plane radius.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Geodesic plane centre `x0`.
    #[arg(long)]
    pub center: Option<f64>,
    /// Horocylinder height, or the constant term of a Euclidean plane.
    #[arg(long)]
    pub c: Option<f64>,
    /// Euclidean plane `x` coefficient.
    #[arg(long)]
    pub a: Option<f64>,
    /// Euclidean plane `t` coefficient.
    #[arg(long)]
    pub b: Option<f64>,
}

/// A resolved problem.
pub struct Problem {
    pub domain: Arc<DomainSpec>,
    pub data: BoundaryData,
    pub oracle: Option<OracleSurface>,
    pub config: ProblemConfig,
}

pub fn parse_grid(s: &str) -> Result<[usize; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([
            a.parse().map_err(|e| format!("bad grid {s:?}: {e}"))?,
            b.parse().map_err(|e| format!("bad grid {s:?}: {e}"))?,
        ]),
        _ => Err(format!("grid must be NX,NT, got {s:?}")),
    }
}

/// Parses `[x0,x1]x[t0,t1]`.
pub fn parse_box(s: &str) -> Result<Shape, CliError> {
    let bad = || CliError::Config(format!("domain must look like [x0,x1]x[t0,t1], got {s:?}"));
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let (xs, ts) = compact.split_once("]x[").ok_or_else(bad)?;
    let interval = |part: &str| -> Result<(f64, f64), CliError> {
        let inner = part.trim_start_matches('[').trim_end_matches(']');
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
    };
    let (x_min, x_max) = interval(xs)?;
    let (t_min, t_max) = interval(ts)?;
    Ok(Shape::Rectangle { x_min, x_max, t_min, t_max })
}

impl ProblemArgs {
    fn oracle_surface(&self) -> Result<Option<OracleSurface>, CliError> {
        let Some(kind) = self.oracle.as_deref() else {
            return Ok(None);
        };
        let surface = match kind {
            "geodesic-plane" => OracleSurface::geodesic_plane(self.radius.unwrap_or(2.0), self.center.unwrap_or(1.0)),
            "horocylinder" => OracleSurface::Horocylinder { c: self.c.unwrap_or(1.0) },
            "euclidean-plane" => OracleSurface::EuclideanPlane {
                coeffs: vec![self.a.unwrap_or(0.0)],
                b: self.b.unwrap_or(0.0),
                c: self.c.unwrap_or(1.0),
            },
            "x-sinh-t" => OracleSurface::XSinhT,
            other => return Err(CliError::Config(format!("unknown oracle {other:?}"))),
        };
        Ok(Some(surface))
    }

    /// Default rectangle for an oracle: where its standard example lives.
    fn default_shape(oracle: Option<&OracleSurface>) -> Shape {
        let (x_min, x_max, t_min, t_max) = match oracle {
            Some(OracleSurface::XSinhT) => (1.0, 2.0, 1.0, 2.0),
            Some(OracleSurface::GeodesicPlane { .. }) => (0.5, 1.5, 0.0, 1.0),
            _ => (0.0, 1.0, 0.0, 1.0),
        };
        Shape::Rectangle { x_min, x_max, t_min, t_max }
    }

    /// The problem document described by the flags, with flags overriding
    /// the config file.
    pub fn document(&self) -> Result<ProblemConfig, CliError> {
        let oracle = self.oracle_surface()?;
        let mut cfg = match &self.config {
            Some(path) => ProblemConfig::load(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
            None => ProblemConfig {
                domain: Self::default_shape(oracle.as_ref()),
                grid: [33, 33],
                boundary: BoundarySpec::Constant { value: 1.0 },
            },
        };
        if let Some(d) = &self.domain {
            cfg.domain = parse_box(d)?;
        }
        if let Some(g) = self.grid {
            cfg.grid = g;
        }
        if let Some(c) = self.constant {
            cfg.boundary = BoundarySpec::Constant { value: c };
        }
        if let Some(o) = oracle {
            cfg.boundary = BoundarySpec::Oracle { oracle: o };
        }
        Ok(cfg)
    }

    pub fn resolve(&self) -> Result<Problem, CliError> {
        let config = self.document()?;
        let (domain, data) = config.build().map_err(|e| CliError::Config(e.to_string()))?;
        let oracle = match &config.boundary {
            BoundarySpec::Oracle { oracle } => Some(oracle.clone()),
            _ => None,
        };
        Ok(Problem { domain, data, oracle, config })
    }

    /// The same problem on a different grid.
    pub fn with_grid(&self, grid: [usize; 2]) -> Self {
        ProblemArgs {
            grid: Some(grid),
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_syntax() {
        assert_eq!(
            parse_box("[1, 2]x[-1,2.5]").unwrap(),
            Shape::Rectangle { x_min: 1.0, x_max: 2.0, t_min: -1.0, t_max: 2.5 }
        );
        assert!(parse_box("[1,2]*[1,2]").is_err());
        assert!(parse_box("[1]x[1,2]").is_err());
        assert_eq!(parse_grid("33, 17").unwrap(), [33, 17]);
        assert!(parse_grid("33").is_err());
    }
}
