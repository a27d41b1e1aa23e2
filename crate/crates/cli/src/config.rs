use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fermat_bias::arith::LevelConfig;
use fermat_bias::curves::DEFAULT_ORACLE_CAP;
use fermat_bias::export::DEFAULT_FIT_FROM;
use fermat_bias::fields::DEFAULT_TABLE_CAP;
use fermat_bias::lfunc::geometric_grid;
use fermat_bias::CurveId;
use serde::Deserialize;

use crate::Options;

pub const DEFAULT_X_MAX: u64 = 100_000;
pub const MIN_X_MAX: u64 = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Geometric { per_decade: u32 },
    Explicit(Vec<f64>),
}

impl GridSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("geometric") {
            let per_decade = match rest.strip_prefix(':') {
                Some(n) => n.parse().map_err(|_| format!("bad grid density {n:?}"))?,
                None if rest.is_empty() => 4,
                None => return Err(format!("bad grid spec {s:?}")),
            };
            if per_decade == 0 {
                return Err("grid density must be positive".into());
            }
            return Ok(GridSpec::Geometric { per_decade });
        }
        let xs = s
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad grid point {x:?}")))
            .collect::<Result<Vec<_>, _>>()?;
        if xs.windows(2).any(|w| w[0] >= w[1]) || xs.iter().any(|x| !x.is_finite() || *x < 2.0) {
            return Err("explicit grid points must be increasing and at least 2".into());
        }
        Ok(GridSpec::Explicit(xs))
    }

    pub fn points(&self, x_max: u64) -> Result<Vec<f64>, String> {
        match self {
            GridSpec::Geometric { per_decade } => Ok(geometric_grid(x_max, *per_decade)),
            GridSpec::Explicit(xs) => {
                if xs.last().is_some_and(|&x| x > x_max as f64) {
                    return Err(format!("grid extends past --x-max {x_max}"));
                }
                Ok(xs.clone())
            }
        }
    }
}

/// `--m` in a config file: one value for every curve, or per curve.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum MSetting {
    All(u32),
    PerCurve(BTreeMap<String, u32>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    ell: Option<u64>,
    curve: Option<String>,
    k: Option<u32>,
    x_max: Option<u64>,
    grid: Option<String>,
    m: Option<MSetting>,
    threads: Option<usize>,
    cache: Option<PathBuf>,
    oracle_cap: Option<u64>,
    table_cap: Option<u64>,
    out: Option<PathBuf>,
    no_header_timestamp: Option<bool>,
    fit_from: Option<f64>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub ell: u32,
    pub curves: Vec<CurveId>,
    pub x_max: u64,
    pub grid: GridSpec,
    pub m_default: u32,
    pub m: BTreeMap<CurveId, u32>,
    pub threads: Option<usize>,
    pub cache: Option<PathBuf>,
    pub oracle_cap: u64,
    pub table_cap: u64,
    pub out: PathBuf,
    pub header_timestamp: bool,
    pub fit_from: f64,
}

fn select_curves(ell: u32, curve: &str, k: Option<u32>) -> Result<Vec<CurveId>, String> {
    let quotient = |k| CurveId::quotient(ell, k).map_err(|e| e.to_string());
    match (curve, k) {
        ("all", None) => Ok(CurveId::all(ell)),
        ("fermat", None) => Ok(vec![CurveId::fermat(ell)]),
        ("quotient", None) => Ok(CurveId::all(ell).into_iter().skip(1).collect()),
        ("quotient", Some(k)) => Ok(vec![quotient(k)?]),
        (other, None) => CurveId::parse(ell, other).map(|c| vec![c]).map_err(|e| e.to_string()),
        (other, Some(_)) => Err(format!("--k only applies to --curve quotient, not {other:?}")),
    }
}

impl RunConfig {
    /// Flags override the config file, which overrides the defaults.
    pub fn resolve(opts: &Options) -> Result<Self, String> {
        let file = match &opts.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let ell = opts.ell.or(file.ell).ok_or("--ell is required")?;
        let level = LevelConfig::new(ell).map_err(|e| e.to_string())?;
        let ell = level.ell;

        let curve = opts.curve.clone().or(file.curve).unwrap_or_else(|| "all".into());
        let curves = select_curves(ell, &curve, opts.k.or(file.k))?;

        let x_max = opts.x_max.or(file.x_max).unwrap_or(DEFAULT_X_MAX);
        if x_max < MIN_X_MAX {
            return Err(format!("--x-max must be at least {MIN_X_MAX}"));
        }
        let grid = match opts.grid.as_deref().or(file.grid.as_deref()) {
            Some(s) => GridSpec::parse(s)?,
            None => GridSpec::Geometric { per_decade: 4 },
        };
        grid.points(x_max)?;

        let mut m_default = 0;
        let mut m = BTreeMap::new();
        match file.m {
            Some(MSetting::All(v)) => m_default = v,
            Some(MSetting::PerCurve(map)) => {
                for (name, v) in map {
                    m.insert(CurveId::parse(ell, &name).map_err(|e| e.to_string())?, v);
                }
            }
            None => {}
        }
        for spec in &opts.m {
            match spec.split_once('=') {
                Some((name, v)) => {
                    let c = CurveId::parse(ell, name.trim()).map_err(|e| e.to_string())?;
                    m.insert(c, parse_m(v)?);
                }
                None => m_default = parse_m(spec)?,
            }
        }

        let threads = opts.threads.or(file.threads);
        if threads == Some(0) {
            return Err("--threads must be positive".into());
        }
        Ok(RunConfig {
            ell,
            curves,
            x_max,
            grid,
            m_default,
            m,
            threads,
            cache: opts.cache.clone().or(file.cache),
            oracle_cap: opts.oracle_cap.or(file.oracle_cap).unwrap_or(DEFAULT_ORACLE_CAP),
            table_cap: opts.table_cap.or(file.table_cap).unwrap_or(DEFAULT_TABLE_CAP),
            out: opts.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("out")),
            header_timestamp: !(opts.no_header_timestamp || file.no_header_timestamp.unwrap_or(false)),
            fit_from: opts.fit_from.or(file.fit_from).unwrap_or(DEFAULT_FIT_FROM),
        })
    }

    pub fn m_for(&self, curve: CurveId) -> u32 {
        self.m.get(&curve).copied().unwrap_or(self.m_default)
    }

    pub fn grid_points(&self) -> Vec<f64> {
        self.grid.points(self.x_max).expect("checked in resolve")
    }
}

fn parse_m(s: &str) -> Result<u32, String> {
    s.trim().parse().map_err(|_| format!("bad --m value {s:?}"))
}
