//! Flat `key = value` run configuration.
//!
//! One setting per line; `#` starts a comment; blank lines are ignored;
//! keys are case-sensitive and may appear once. Recognised keys:
//!
//! | key | value |
//! |---|---|
//! | `problem` | registry id |
//! | `method` | `bkm`, `bpm` or `mkm` |
//! | `boundary_nodes`, `interior_nodes` | counts |
//! | `lattice` | points per side of an MKM lattice |
//! | `order` | BPM truncation order |
//! | `dirichlet_fraction` | real in `[0, 1]` |
//! | `solver` | `lu`, `tsvd` or `tsvd:<rcut>` |
//! | `basis` | `linear`, `thin-plate`, `cubic` or `mq:<c>` (DRM basis) |
//! | `shape` | MKM multiquadric shape parameter |
//! | `schedule` | comma-separated boundary counts for `sweep` |
//! | `format` | `csv` or `markdown` |
//! | `out` | output path |
//! | `timing` | `true` or `false` |

use std::collections::BTreeMap;
use std::path::PathBuf;

use rbfpde::linalg::SolverChoice;
use rbfpde::rbf::RbfKind;

use crate::report::Format;
use crate::runner::Method;
use crate::BenchError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub problem: Option<String>,
    pub method: Option<Method>,
    pub boundary_nodes: Option<usize>,
    pub interior_nodes: Option<usize>,
    pub lattice: Option<usize>,
    pub order: Option<usize>,
    pub dirichlet_fraction: Option<f64>,
    pub solver: Option<SolverChoice>,
    pub basis: Option<RbfKind>,
    pub shape: Option<f64>,
    pub schedule: Option<Vec<usize>>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub timing: Option<bool>,
}

pub fn parse_solver(s: &str) -> Result<SolverChoice, String> {
    match s.split_once(':') {
        None if s == "lu" => Ok(SolverChoice::Lu),
        None if s == "tsvd" => Ok(SolverChoice::Tsvd { rcut: 1e-12 }),
        Some(("tsvd", r)) => r
            .parse()
            .map(|rcut| SolverChoice::Tsvd { rcut })
            .map_err(|_| format!("bad truncation ratio `{r}`")),
        _ => Err(format!("unknown solver `{s}`")),
    }
}

pub fn parse_basis(s: &str) -> Result<RbfKind, String> {
    let kind = match s.split_once(':') {
        None => match s {
            "linear" => RbfKind::LinearPlusOne,
            "thin-plate" => RbfKind::ThinPlate,
            "cubic" => RbfKind::PolyharmonicCubic,
            _ => return Err(format!("unknown basis `{s}`")),
        },
        Some(("mq", c)) => RbfKind::Multiquadric {
            c: c.parse().map_err(|_| format!("bad shape parameter `{c}`"))?,
        },
        _ => return Err(format!("unknown basis `{s}`")),
    };
    kind.validate().map_err(|e| e.to_string())?;
    Ok(kind)
}

pub fn parse_schedule(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("bad count `{}`", t.trim())))
        .collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let mut seen = BTreeMap::new();
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| BenchError::Config { line: line_no, message };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.insert(key.to_string(), line_no).is_some() {
                return Err(err(format!("duplicate key `{key}`")));
            }
            let count = |v: &str| v.parse::<usize>().map_err(|_| err(format!("`{key}` expects a count")));
            let real = |v: &str| v.parse::<f64>().map_err(|_| err(format!("`{key}` expects a number")));
            match key {
                "problem" => cfg.problem = Some(value.to_string()),
                "method" => cfg.method = Some(value.parse().map_err(|e: BenchError| err(e.to_string()))?),
                "boundary_nodes" => cfg.boundary_nodes = Some(count(value)?),
                "interior_nodes" => cfg.interior_nodes = Some(count(value)?),
                "lattice" => cfg.lattice = Some(count(value)?),
                "order" => cfg.order = Some(count(value)?),
                "dirichlet_fraction" => cfg.dirichlet_fraction = Some(real(value)?),
                "solver" => cfg.solver = Some(parse_solver(value).map_err(err)?),
                "basis" => cfg.basis = Some(parse_basis(value).map_err(err)?),
                "shape" => cfg.shape = Some(real(value)?),
                "schedule" => cfg.schedule = Some(parse_schedule(value).map_err(err)?),
                "format" => cfg.format = Some(value.parse().map_err(|e: BenchError| err(e.to_string()))?),
                "out" => cfg.out = Some(PathBuf::from(value)),
                "timing" => {
                    cfg.timing = Some(value.parse().map_err(|_| err("`timing` expects true or false".into()))?)
                }
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_key() {
        let text = "
            # Table 1, second column
            problem = helmholtz2d-d1
            method = bkm
            boundary_nodes = 49   # knots
            interior_nodes = 15
            lattice = 9
            order = 4
            dirichlet_fraction = 0.5
            solver = tsvd:1e-10
            basis = mq:0.8
            shape = 0.3
            schedule = 16, 32,64
            format = markdown
            out = results.md
            timing = true
        ";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.problem.as_deref(), Some("helmholtz2d-d1"));
        assert_eq!(c.method, Some(Method::Bkm));
        assert_eq!(c.boundary_nodes, Some(49));
        assert_eq!(c.solver, Some(SolverChoice::Tsvd { rcut: 1e-10 }));
        assert_eq!(c.basis, Some(RbfKind::Multiquadric { c: 0.8 }));
        assert_eq!(c.schedule, Some(vec![16, 32, 64]));
        assert_eq!(c.format, Some(Format::Markdown));
        assert_eq!(c.timing, Some(true));
    }

    #[test]
    fn reports_line_numbers() {
        match RunConfig::parse("method = bkm\n\nboundary_nodes = many\n") {
            Err(BenchError::Config { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(RunConfig::parse("order = 1\norder = 2").is_err());
        assert!(RunConfig::parse("colour = blue").is_err());
        assert!(RunConfig::parse("just words").is_err());
        assert!(RunConfig::parse("basis = mq:-1").is_err());
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }
}
