use clap::{Args, ValueEnum};
use pdm_core::classical::integrate;
use pdm_core::coord::{CoordinateMap, Grid};
use pdm_core::expr::Params;
use pdm_core::func::{BoundExpr, Constant, Interval, SharedFn};
use pdm_core::operators::{
    hamiltonian_h1, hamiltonian_h2_on_q, hamiltonian_h2_on_x, hamiltonian_vonroos, kinetic_t1, kinetic_vonroos,
    ladder_a, ladder_b, map_nodes, momentum_pi, noether_momentum, oscillator_potential, q_grid, GridOperator,
    Harmonic,
};
use pdm_core::profiles::{
    builtin, deformation_from_mass, deformed_potential, map_from_deformation, mass_from_deformation,
    DeformationProfile, MassProfile,
};
use pdm_core::spectra::{analytic_energy, analytic_phi, eigen_symmetric_tridiagonal, normalized_overlap};
use pdm_core::verify::{format_table, run_suite, Status, Suite, GRID_SIZES};
use pdm_core::{Error, Expression};

use crate::setup::{Common, Setup, DEFAULT_POINTS};
use crate::table::{real, Cell, Table};
use crate::{CliError, Format};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 2;
pub const EXIT_SKIPPED: u8 = 3;

/// Text for the output sink, lines for stderr, and the exit code.
pub struct Outcome {
    pub body: String,
    pub messages: Vec<String>,
    pub exit: u8,
}

impl Outcome {
    fn table(t: &Table, format: Format, exit: u8) -> Self {
        let body = match format {
            Format::Csv => t.to_csv(),
            Format::Json => t.to_json(),
        };
        Self { body, messages: t.notes.clone(), exit }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Hamiltonian {
    H1,
    H2q,
    Vonroos,
}

fn value_name<V: ValueEnum>(v: V) -> String {
    v.to_possible_value().map_or_else(String::new, |p| p.get_name().to_string())
}

pub fn spectrum(s: &Setup, which: Hamiltonian, levels: usize, format: Format) -> Result<Outcome, CliError> {
    let g = s.grid()?;
    let w = s.cfg.omega;
    let v = oscillator_potential(&s.map, w);
    let h = match which {
        Hamiltonian::H1 => hamiltonian_h1(&s.mass, &g, v.as_ref())?,
        Hamiltonian::Vonroos => hamiltonian_vonroos(&s.mass, &g, s.cfg.ordering, v.as_ref())?,
        Hamiltonian::H2q => hamiltonian_h2_on_q(&q_grid(&s.map, &g)?, &Harmonic(w), &s.map.range())?,
    };
    let spec = eigen_symmetric_tridiagonal(&h, levels)?;
    let bounded = !s.map.range().is_onto_reals();

    let mut t = Table::new(&["n", "E_numeric", "E_analytic", "abs_err"]);
    t.notes.push(format!("profile {}, omega = {}, hamiltonian {}", s.name, real(w), value_name(which)));
    t.notes.push(format!("grid [{}, {}] with {} interior nodes", real(g.lo()), real(g.hi()), g.n()));
    if which == Hamiltonian::Vonroos {
        let o = s.cfg.ordering;
        t.notes.push(format!("ordering a = {}, b = {}", o.a, o.b));
    }
    if bounded {
        t.notes.push(format!(
            "SKIPPED: attainable q-range {} is bounded; comparison with omega(n + 1/2) is not claimed",
            s.map.range()
        ));
    }
    for (n, &e) in spec.eigenvalues.iter().enumerate() {
        let exact = analytic_energy(n, w);
        let err = if bounded { f64::NAN } else { (e - exact).abs() };
        t.push(vec![Cell::Int(n), Cell::Real(e), Cell::Real(exact), Cell::Real(err)]);
    }
    Ok(Outcome::table(&t, format, if bounded { EXIT_SKIPPED } else { EXIT_OK }))
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct DeriveSource {
    /// Derive m, q and V from Q(x)
    #[arg(long = "from-Q", value_name = "EXPR")]
    pub from_q: Option<String>,
    /// Derive Q, q and V from m(x)
    #[arg(long = "from-m", value_name = "EXPR")]
    pub from_m: Option<String>,
    /// Tabulate a built-in with its closed forms
    #[arg(long)]
    pub builtin: Option<String>,
}

fn parse(text: &str) -> Result<Expression, CliError> {
    Expression::parse(text).map_err(|e| CliError::Config(format!("{text:?}: {e}")))
}

fn derive_grid(common: &Common, fallback: Option<Interval<f64>>) -> Result<Grid<f64>, CliError> {
    let (lo, hi, n) = match (common.grid_spec()?, fallback) {
        (Some(g), _) => g,
        (None, Some(w)) => (w.lo, w.hi, DEFAULT_POINTS),
        (None, None) => return Err(CliError::Config("--grid is required with --from-Q or --from-m".into())),
    };
    Ok(Grid::x(lo, hi, n)?)
}

fn in_domain(p: &MassProfile<f64>, x: f64) -> Result<(), CliError> {
    let d = p.domain();
    if d.contains(x) {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("m is not positive at x = {} (derived domain ({}, {}))", real(x), d.lo, d.hi)))
    }
}

fn at<E: std::fmt::Display>(x: f64, r: Result<f64, E>) -> Result<f64, CliError> {
    r.map_err(|e| CliError::Numerical(format!("at x = {}: {e}", real(x))))
}

pub fn derive(src: &DeriveSource, common: &Common, format: Format) -> Result<Outcome, CliError> {
    let params = common.params();
    let domain = common.domain.as_ref().map_or(Interval::real_line(), |d| Interval::new(d[0], d[1]));
    let omega = common.omega;
    let half_w2 = 0.5 * omega * omega;
    let mut t = Table::new(&["x", "m", "Q", "q", "V"]);
    if let Some(text) = &src.from_q {
        let g = derive_grid(common, None)?;
        let window = Interval::new(g.lo(), g.hi());
        let d = DeformationProfile::from_expr(parse(text)?, params, domain, window)?;
        let m = mass_from_deformation(&d)?;
        let q = map_from_deformation(&d);
        let v = deformed_potential(&d, omega)?;
        t.notes.push(format!("from Q(x) = {text}, omega = {}", real(omega)));
        for &x in g.points() {
            in_domain(&m, x)?;
            t.push_reals(&[x, m.m(x)?, d.value(x)?, at(x, q.value(x))?, at(x, v.value(x))?]);
        }
    } else if let Some(text) = &src.from_m {
        let g = derive_grid(common, None)?;
        let m = MassProfile::from_expr(parse(text)?, params, domain, Interval::new(g.lo(), g.hi()))?;
        let map = CoordinateMap::build_default(&m)?;
        let d = deformation_from_mass(&m, &map)?;
        let (x0, q0) = map.anchor();
        t.notes.push(format!("from m(x) = {text}, omega = {}, q({}) = {}", real(omega), real(x0), real(q0)));
        t.notes.push(format!("attainable q-range {}", map.range()));
        for &x in g.points() {
            let q = map.forward(x)?;
            t.push_reals(&[x, m.m(x)?, d.value(x)?, q, half_w2 * q * q]);
        }
    } else {
        let name = src.builtin.as_deref().expect("clap enforces one source");
        let b = builtin::<f64>(name, &params)?;
        let g = derive_grid(common, Some(b.mass.window()))?;
        let f = &b.formulas;
        t.notes.push(format!("builtin {name}, omega = {}", real(omega)));
        t.notes.push(format!("m(x) = {}", f.m));
        t.notes.push(format!("Q(x) = {}", f.deformation));
        t.notes.push(format!("q(x) = {}", f.q));
        t.notes.push(format!("V(x) = {}", f.potential));
        t.notes.extend(b.warnings.iter().cloned());
        let q = b.closed.q.clone().expect("built-ins carry a closed q");
        let v = b.closed.potential(omega).expect("built-ins carry a closed V");
        for &x in g.points() {
            in_domain(&b.mass, x)?;
            t.push_reals(&[x, b.mass.m(x)?, b.deformation.value(x)?, at(x, q.value(x))?, at(x, v.value(x))?]);
        }
    }
    Ok(Outcome::table(&t, format, EXIT_OK))
}

pub fn verify(s: &Setup, suite: &str, sizes: &[usize], format: Format) -> Result<Outcome, CliError> {
    let suite = Suite::parse(suite).ok_or_else(|| {
        CliError::Config(format!("unknown suite {suite:?}; expected one of {}", Suite::NAMES.join(", ")))
    })?;
    let sizes = if sizes.is_empty() { GRID_SIZES.to_vec() } else { sizes.to_vec() };
    if sizes.len() < 2 {
        return Err(CliError::Config("verification needs at least two grid sizes".into()));
    }
    let reports = run_suite(suite, &s.mass, &s.map, &s.cfg, &sizes)?;
    let body = match format {
        Format::Json => {
            let mut b = serde_json::to_string_pretty(&reports).expect("reports serialize");
            b.push('\n');
            b
        }
        Format::Csv => {
            let mut b = String::from("check_name,status,final_residual,estimated_order,threshold\n");
            for r in &reports {
                let status = serde_json::to_value(r.status()).expect("status serializes");
                let order = r.estimated_order.map_or(f64::NAN, |o| o);
                let last = if r.residuals.is_empty() { f64::NAN } else { r.final_residual() };
                b.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.check_name,
                    status.as_str().unwrap_or_default(),
                    real(last),
                    real(order),
                    real(r.threshold)
                ));
            }
            b
        }
    };
    let mut messages: Vec<String> = format_table(&reports).lines().map(str::to_string).collect();
    let failing: Vec<&str> =
        reports.iter().filter(|r| r.status() == Status::Fail).map(|r| r.check_name.as_str()).collect();
    let exit = if failing.is_empty() {
        EXIT_OK
    } else {
        messages.push(format!("failing checks: {}", failing.join(", ")));
        EXIT_FAILED
    };
    Ok(Outcome { body, messages, exit })
}

pub fn eigenfunction(s: &Setup, level: usize, format: Format) -> Result<Outcome, CliError> {
    let g = s.grid()?;
    let w = s.cfg.omega;
    let v = oscillator_potential(&s.map, w);
    let spec = eigen_symmetric_tridiagonal(&hamiltonian_h1(&s.mass, &g, v.as_ref())?, level + 1)?;
    let mut grid_vec = spec.eigenvectors[level].clone();
    let mut phi = g.map(|x| analytic_phi(level, w, &s.mass, &s.map, x))?;
    let norm = (phi.iter().map(|p| p * p).sum::<f64>() * g.h()).sqrt();
    phi.iter_mut().for_each(|p| *p /= norm);
    let mut overlap = normalized_overlap(&grid_vec, &phi);
    if overlap < 0.0 {
        grid_vec.iter_mut().for_each(|p| *p = -*p);
        overlap = -overlap;
    }
    let mut t = Table::new(&["x", "phi_n_analytic", "phi_n_grid"]);
    t.notes.push(format!("profile {}, level {level}, omega = {}", s.name, real(w)));
    if !s.map.range().is_onto_reals() {
        t.notes.push(format!("attainable q-range {} is bounded; the analytic state is not claimed", s.map.range()));
    }
    t.summary.push(("overlap", overlap));
    t.summary.push(("E_numeric", spec.eigenvalues[level]));
    t.summary.push(("E_analytic", analytic_energy(level, w)));
    for ((&x, &a), &b) in g.points().iter().zip(&phi).zip(&grid_vec) {
        t.push_reals(&[x, a, b]);
    }
    let mut out = Outcome::table(&t, format, EXIT_OK);
    out.messages.push(format!("overlap = {}", real(overlap)));
    Ok(out)
}

#[derive(Args, Debug, Clone)]
pub struct ClassicalArgs {
    /// oscillator, zero, or an expression in x (may use omega and the profile parameters)
    #[arg(long = "V", default_value = "oscillator", value_name = "POTENTIAL")]
    pub potential: String,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub v0: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long = "t-final", default_value_t = 50.0)]
    pub t_final: f64,
}

fn potential(s: &Setup, spec: &str) -> Result<SharedFn<f64>, CliError> {
    Ok(match spec {
        "zero" => std::sync::Arc::new(Constant(0.0)),
        "oscillator" => match s.closed.as_ref().and_then(|c| c.potential(s.cfg.omega)) {
            Some(v) => v,
            None => oscillator_potential(&s.map, s.cfg.omega),
        },
        text => {
            let mut p: Params = s.params.clone();
            p.insert("omega".into(), s.cfg.omega);
            BoundExpr::new(parse(text)?, p).shared()
        }
    })
}

pub fn classical(s: &Setup, a: &ClassicalArgs, format: Format) -> Result<Outcome, CliError> {
    if !(a.dt > 0.0 && a.t_final > 0.0) {
        return Err(CliError::Config("--dt and --t-final must be positive".into()));
    }
    let v = potential(s, &a.potential)?;
    let steps = (a.t_final / a.dt).round() as usize;
    let tr = integrate(&s.mass, v.as_ref(), a.x0, a.v0, a.dt, steps)?;
    let mut t = Table::new(&["t", "x", "v", "energy", "pseudo_momentum"]);
    t.notes.push(format!("profile {}, V = {}, dt = {}, steps = {steps}", s.name, a.potential, real(a.dt)));
    t.summary.push(("energy_drift", tr.energy_drift()));
    t.summary.push(("pseudo_momentum_drift", tr.pseudo_momentum_drift()));
    let mut exit = EXIT_OK;
    if let Some(e) = &tr.stopped {
        t.notes.push(format!("stopped at t = {}: {e}", real(tr.last().t)));
        exit = EXIT_FAILED;
    }
    for p in &tr.points {
        t.push_reals(&[p.t, p.x, p.v, p.energy, p.pseudo_momentum]);
    }
    let mut out = Outcome::table(&t, format, exit);
    out.messages.push(format!("energy drift = {}", real(tr.energy_drift())));
    out.messages.push(format!("pseudo-momentum drift = {}", real(tr.pseudo_momentum_drift())));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OperatorKind {
    Pi,
    T1,
    Vonroos,
    H1,
    H2x,
    A,
    Adag,
    B,
    Bdag,
    Noether,
}

pub fn operator(s: &Setup, which: OperatorKind, format: Format) -> Result<Outcome, CliError> {
    let g = s.grid()?;
    let w = s.cfg.omega;
    let v = oscillator_potential(&s.map, w);
    let q = || map_nodes(&s.map, &g);
    let op: GridOperator<f64> = match which {
        OperatorKind::Pi => momentum_pi(&s.mass, &g)?,
        OperatorKind::T1 => kinetic_t1(&s.mass, &g)?,
        OperatorKind::Vonroos => kinetic_vonroos(&s.mass, &g, s.cfg.ordering)?,
        OperatorKind::H1 => hamiltonian_h1(&s.mass, &g, v.as_ref())?,
        OperatorKind::H2x => hamiltonian_h2_on_x(&s.mass, &g, v.as_ref())?,
        OperatorKind::A => ladder_a(&s.mass, &g, &q()?, w, s.cfg.ordering, false)?,
        OperatorKind::Adag => ladder_a(&s.mass, &g, &q()?, w, s.cfg.ordering, true)?,
        OperatorKind::B => ladder_b(&s.mass, &g, &q()?, w, false)?,
        OperatorKind::Bdag => ladder_b(&s.mass, &g, &q()?, w, true)?,
        OperatorKind::Noether => noether_momentum(&s.mass, &g)?,
    };
    let mut t = Table::new(&["row", "col", "value"]);
    t.notes.push(format!("{} on {} nodes, band {}", value_name(which), g.n(), op.band()));
    let n = g.n();
    for i in 0..n {
        for j in i.saturating_sub(op.band())..(i + op.band() + 1).min(n) {
            let value = op.get(i, j);
            if value != 0.0 {
                t.push(vec![Cell::Int(i), Cell::Int(j), Cell::Real(value)]);
            }
        }
    }
    Ok(Outcome::table(&t, format, EXIT_OK))
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::UnknownProfile(_)
            | Error::UnknownParameter { .. }
            | Error::InvalidParameter { .. }
            | Error::OriginOffset { .. }
            | Error::Config(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
