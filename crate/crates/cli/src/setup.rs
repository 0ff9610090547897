use clap::Args;
use pdm_core::coord::{CoordinateMap, Grid};
use pdm_core::expr::Params;
use pdm_core::func::Interval;
use pdm_core::operators::{OrderingParams, OscillatorConfig};
use pdm_core::profiles::{builtin, mass_from_deformation, ClosedForms, DeformationProfile, MassProfile};
use pdm_core::Expression;

use crate::CliError;

pub const DEFAULT_POINTS: usize = 2000;

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Built-in profile name
    #[arg(long)]
    pub builtin: Option<String>,
    /// Mass m(x) as an expression in x
    #[arg(long = "m-expr", value_name = "EXPR")]
    pub m_expr: Option<String>,
    /// Deformation Q(x) as an expression in x
    #[arg(long = "Q-expr", value_name = "EXPR")]
    pub q_expr: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Profile parameter, repeatable
    #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    /// Domain of a custom expression (accepts inf)
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub domain: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Grid bounds and interior node count
    #[arg(long, num_args = 3, value_names = ["LO", "HI", "N"], allow_negative_numbers = true)]
    pub grid: Option<Vec<f64>>,
    /// Ordering exponent a, with b = -1/2 - a
    #[arg(long, default_value_t = -0.25, allow_negative_numbers = true)]
    pub ordering: f64,
}

pub fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("{v:?} is not a number"))?;
    Ok((k.trim().to_string(), v))
}

impl Common {
    pub fn params(&self) -> Params {
        self.params.iter().cloned().collect()
    }

    pub fn grid_spec(&self) -> Result<Option<(f64, f64, usize)>, CliError> {
        let Some(g) = &self.grid else { return Ok(None) };
        let (lo, hi, n) = (g[0], g[1], g[2]);
        if n.fract() != 0.0 || n < OscillatorConfig::<f64>::MIN_POINTS as f64 {
            return Err(CliError::Config(format!(
                "grid needs an integer node count of at least {}, got {n}",
                OscillatorConfig::<f64>::MIN_POINTS
            )));
        }
        if !(lo < hi) {
            return Err(CliError::Config(format!("grid bounds must satisfy lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Some((lo, hi, n as usize)))
    }

    fn domain(&self) -> Interval<f64> {
        self.domain.as_ref().map_or(Interval::real_line(), |d| Interval::new(d[0], d[1]))
    }
}

/// A profile with its map, frequency and grid.
pub struct Setup {
    pub name: String,
    pub mass: MassProfile<f64>,
    pub map: CoordinateMap<f64>,
    pub closed: Option<ClosedForms<f64>>,
    pub params: Params,
    pub cfg: OscillatorConfig<f64>,
    pub warnings: Vec<String>,
}

impl Setup {
    pub fn grid(&self) -> Result<Grid<f64>, CliError> {
        Ok(self.cfg.grid()?)
    }
}

fn parse_expr(text: &str) -> Result<Expression, CliError> {
    Expression::parse(text).map_err(|e| CliError::Config(format!("{text:?}: {e}")))
}

pub fn build(source: &Source, common: &Common) -> Result<Setup, CliError> {
    let params = common.params();
    let grid = common.grid_spec()?;
    let ordering = OrderingParams::from_a(common.ordering)?;
    let (name, mass, closed, warnings) = if let Some(b) = &source.builtin {
        let b = builtin::<f64>(b, &params)?;
        let mass = match grid {
            Some((lo, hi, _)) => b.mass.with_window(Interval::new(lo, hi))?,
            None => b.mass.clone(),
        };
        (mass.name().to_string(), mass, Some(b.closed), b.warnings)
    } else {
        let (lo, hi, _) =
            grid.ok_or_else(|| CliError::Config("--grid is required with --m-expr or --Q-expr".into()))?;
        let window = Interval::new(lo, hi);
        if let Some(text) = &source.m_expr {
            let m = MassProfile::from_expr(parse_expr(text)?, params.clone(), common.domain(), window)?;
            (text.clone(), m, None, Vec::new())
        } else {
            let text = source.q_expr.as_deref().expect("clap enforces one source");
            let d = DeformationProfile::from_expr(parse_expr(text)?, params.clone(), common.domain(), window)?;
            let m = mass_from_deformation(&d)?;
            (format!("Q = {text}"), m, None, Vec::new())
        }
    };
    let map = CoordinateMap::build_default(&mass)?;
    let w = mass.window();
    let (lo, hi, n) = grid.unwrap_or((w.lo, w.hi, DEFAULT_POINTS));
    let cfg = OscillatorConfig::new(common.omega, lo, hi, n)?.with_ordering(ordering);
    Ok(Setup { name, mass, map, closed, params, cfg, warnings })
}
