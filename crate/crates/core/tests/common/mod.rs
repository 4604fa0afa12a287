#![allow(dead_code)]

use std::sync::Arc;

use horograph::analytic::OracleSurface;
use horograph::geometry::{BoundaryData, DomainSpec};
use horograph::solver::{continuation_solve, ContinuationResult, ContinuationSchedule, SolverConfig};

/// A named Dirichlet problem of the continuation suite.
pub struct Case {
    pub name: &'static str,
    pub domain: Arc<DomainSpec>,
    pub data: BoundaryData,
    pub oracle: Option<OracleSurface>,
}

fn unit_rectangle(width: f64, n: usize) -> Arc<DomainSpec> {
    Arc::new(DomainSpec::rectangle(0.0, width, 0.0, 1.0, n, n).unwrap())
}

pub fn constant_case(name: &'static str, width: f64, n: usize) -> Case {
    let domain = unit_rectangle(width, n);
    let data = BoundaryData::constant(&domain, 1.0);
    Case { name, domain, data, oracle: None }
}

pub fn oracle_case(name: &'static str, domain: DomainSpec, oracle: OracleSurface) -> Case {
    let domain = Arc::new(domain);
    let data = BoundaryData::from_oracle(&domain, &oracle).unwrap();
    Case { name, domain, data, oracle: Some(oracle) }
}

/// `f = 1` on rectangles of widths 0.5, 1 and 2, and the traces of the two
/// exact solutions.
pub fn suite(n: usize) -> Vec<Case> {
    vec![
        constant_case("constant, width 0.5", 0.5, n),
        constant_case("constant, width 1", 1.0, n),
        constant_case("constant, width 2", 2.0, n),
        oracle_case(
            "geodesic plane trace",
            DomainSpec::rectangle(0.5, 1.5, 0.0, 1.0, n, n).unwrap(),
            OracleSurface::geodesic_plane(2.0, 1.0),
        ),
        oracle_case(
            "x sinh t trace",
            DomainSpec::rectangle(1.0, 2.0, 1.0, 2.0, n, n).unwrap(),
            OracleSurface::XSinhT,
        ),
    ]
}

pub fn run(case: &Case) -> ContinuationResult {
    continuation_solve(
        case.domain.clone(),
        &case.data,
        &ContinuationSchedule::default(),
        &SolverConfig::default(),
    )
    .unwrap_or_else(|e| panic!("{}: {e}", case.name))
}
