//! Command-line front end. [`run`] takes the raw argument list and returns the
//! exit code together with everything destined for stdout and stderr, so the
//! binary is a thin wrapper and tests can drive it in-process.

use std::collections::BTreeMap;
use std::io;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::besselpair::{ground_state, ode_residual, shoot, OdeProblem};
use crate::calculus::{j_op, log_derivative};
use crate::catalog::{self, CatalogEntry, EntryReport, RunConfig};
use crate::expr::{parse, Expr, ParamBindings};
use crate::feller::{recurrence_test, Domain, FellerConfig, Recurrence};
use crate::grid::{geometric, uniform};
use crate::hardy::{classify, derive_weight, Classification, HardyConfig, WeightPair};
use crate::spectral::{default_truncations, verify_inequality, GridMap, Truncation, Verdict};

pub const SCHEMA: &str = "hardy-forge/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INDETERMINATE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "hardy-forge", version, about = "Weighted Hardy inequalities from radial weight pairs")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Apply the operator J^d to a profile φ.
    Jd(JdArgs),
    /// Derive W = J^d(h) − J^d(V) and classify it.
    Weight(PairArgs),
    /// Feller's recurrence test for the form with weight h.
    Feller(FellerArgs),
    /// Full certificate chain: recurrence, positivity, optimality, spectral bounds.
    Classify(PairArgs),
    /// Check the inequality numerically on nested truncations.
    Spectrum(SpectrumArgs),
    /// Check that √(h/V) solves the Bessel-pair ODE and stays positive.
    Bessel(BesselArgs),
    /// Built-in regression catalog.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Domain as l:r; endpoints may be inf or -inf.
    #[arg(long, default_value = "0:inf")]
    pub interval: String,
    /// Operator dimension d (also bound as the parameter `d` unless given with --param).
    #[arg(long, default_value_t = 1.0)]
    pub dim: f64,
    /// Parameter binding name=value; repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
}

#[derive(Args, Debug, Clone)]
pub struct FellerOpts {
    /// Base point of the scale function.
    #[arg(long)]
    pub base_point: Option<f64>,
    /// Ratio between consecutive shells.
    #[arg(long)]
    pub ladder_factor: Option<f64>,
    /// Number of shells per endpoint.
    #[arg(long)]
    pub shells: Option<usize>,
}

#[derive(Args, Debug)]
pub struct JdArgs {
    /// Profile φ(x).
    #[arg(long)]
    pub phi: String,
    /// Points at which to evaluate; repeatable.
    #[arg(long = "at")]
    pub at: Vec<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct PairArgs {
    #[arg(long)]
    pub h: String,
    #[arg(long = "V")]
    pub v: String,
    /// Points in the scan grid.
    #[arg(long, default_value_t = 512)]
    pub scan_points: usize,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub feller: FellerOpts,
}

#[derive(Args, Debug)]
pub struct FellerArgs {
    #[arg(long)]
    pub h: String,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub feller: FellerOpts,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    /// h, used to derive W when --W is absent.
    #[arg(long)]
    pub h: Option<String>,
    #[arg(long = "V")]
    pub v: String,
    /// Weight to test instead of the derived one.
    #[arg(long = "W")]
    pub w: Option<String>,
    /// Truncation a:b:n with optional :log or :logit map; repeatable, in growing order.
    #[arg(long = "trunc", value_name = "A:B:N[:MAP]")]
    pub trunc: Vec<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct BesselArgs {
    #[arg(long)]
    pub h: String,
    #[arg(long = "V")]
    pub v: String,
    #[arg(long = "W")]
    pub w: Option<String>,
    /// Check window a:b inside the domain; defaults to the first spectral truncation.
    #[arg(long)]
    pub window: Option<String>,
    /// Largest accepted residual.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Subcommand, Debug)]
pub enum CatalogAction {
    /// Entry names with their default parameters.
    List,
    /// Run one entry, or every entry with --all.
    Run(CatalogRunArgs),
}

#[derive(Args, Debug)]
pub struct CatalogRunArgs {
    pub name: Option<String>,
    #[arg(long, conflicts_with = "name")]
    pub all: bool,
    /// Parameter override name=value; repeatable, single entry only.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    /// Shift an expected constant, ENTRY:LABEL:DELTA (test fixture hook).
    #[arg(long, hide = true)]
    pub perturb_constant: Vec<String>,
}

/// Exit code with the text for each stream.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

/// What a subcommand produced before formatting.
struct Done {
    code: i32,
    params: Value,
    result: Value,
    text: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Outcome { code: EXIT_OK, stdout: e.to_string(), stderr: String::new() }
                }
                _ => Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: one_line(&e.to_string()) },
            };
        }
    };
    let start = Instant::now();
    let name = command_name(&cli.command);
    let done = match dispatch(&cli.command) {
        Ok(d) => d,
        Err(Usage(msg)) => {
            return Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: format!("error: {}\n", msg) }
        }
    };
    let ms = start.elapsed().as_secs_f64() * 1e3;
    match cli.format {
        Format::Json => {
            let env = json!({
                "schema": SCHEMA,
                "version": env!("CARGO_PKG_VERSION"),
                "command": name,
                "params": done.params,
                "result": done.result,
            });
            Outcome { code: done.code, stdout: to_json(&env) + "\n", stderr: String::new() }
        }
        Format::Text => Outcome { code: done.code, stdout: done.text, stderr: format!("wall: {ms:.1} ms\n") },
    }
}

fn one_line(msg: &str) -> String {
    let first = msg.lines().find(|l| !l.trim().is_empty()).unwrap_or("usage error");
    format!("{}\n", first.trim())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Jd(_) => "jd",
        Command::Weight(_) => "weight",
        Command::Feller(_) => "feller",
        Command::Classify(_) => "classify",
        Command::Spectrum(_) => "spectrum",
        Command::Bessel(_) => "bessel",
        Command::Catalog { action: CatalogAction::List } => "catalog list",
        Command::Catalog { action: CatalogAction::Run(_) } => "catalog run",
    }
}

/// Floats as 17 significant digits so reruns are byte-identical and lossless.
struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17);
    v.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn parse_endpoint(s: &str) -> Result<f64, Usage> {
    match s.trim() {
        "inf" | "+inf" | "∞" => Ok(f64::INFINITY),
        "-inf" | "−inf" | "-∞" => Ok(f64::NEG_INFINITY),
        t => t.parse().map_err(|_| Usage(format!("bad endpoint `{t}`"))),
    }
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64), Usage> {
    let (a, b) = s.split_once(':').ok_or_else(|| Usage(format!("{what} must be l:r, got `{s}`")))?;
    Ok((parse_endpoint(a)?, parse_endpoint(b)?))
}

fn parse_bindings(items: &[String]) -> Result<ParamBindings, Usage> {
    let mut p = ParamBindings::new();
    for it in items {
        let (k, v) = it.split_once('=').ok_or_else(|| Usage(format!("--param must be name=value, got `{it}`")))?;
        let v: f64 = v.trim().parse().map_err(|_| Usage(format!("bad value in --param `{it}`")))?;
        p.set(k.trim(), v);
    }
    Ok(p)
}

fn parse_trunc(s: &str, dom: &Domain) -> Result<Truncation, Usage> {
    let parts: Vec<&str> = s.split(':').collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(Usage(format!("--trunc must be a:b:n[:map], got `{s}`")));
    }
    let a = parse_endpoint(parts[0])?;
    let b = parse_endpoint(parts[1])?;
    let n: usize = parts[2].parse().map_err(|_| Usage(format!("bad node count in `{s}`")))?;
    let t = Truncation::new(a, b, n);
    Ok(match parts.get(3).copied() {
        None | Some("auto") => t,
        Some("id") | Some("identity") => t.mapped(GridMap::Identity),
        Some("log") if dom.l.is_finite() => t.mapped(GridMap::Log { origin: dom.l }),
        Some("logit") if dom.l.is_finite() && dom.r.is_finite() => t.mapped(GridMap::Logit { l: dom.l, r: dom.r }),
        Some(m) => return Err(Usage(format!("map `{m}` is unknown or needs finite endpoints"))),
    })
}

struct Setup {
    dom: Domain,
    params: ParamBindings,
}

impl Common {
    fn setup(&self) -> Result<Setup, Usage> {
        let (l, r) = parse_pair(&self.interval, "--interval")?;
        let dom = Domain::new(l, r, self.dim)?;
        let mut params = ParamBindings::new().with("d", self.dim);
        params = params.merged(&parse_bindings(&self.params)?);
        Ok(Setup { dom, params })
    }

    fn echo(&self) -> BTreeMap<&'static str, Value> {
        let mut m = BTreeMap::new();
        m.insert("interval", json!(self.interval));
        m.insert("dim", json!(self.dim));
        m.insert("param", json!(self.params));
        m
    }
}

impl FellerOpts {
    fn config(&self) -> FellerConfig {
        let mut c = FellerConfig { base_point: self.base_point, ..FellerConfig::default() };
        if let Some(f) = self.ladder_factor {
            c.ladder_factor = f;
        }
        if let Some(n) = self.shells {
            c.shells = n;
        }
        c
    }
}

/// Parse an expression and insist every parameter in it is bound.
fn expr(text: &str, flag: &str, p: &ParamBindings) -> Result<Expr, Usage> {
    let e = parse(text).map_err(|err| Usage(format!("{flag}: {err}")))?;
    if let Some(missing) = e.params().into_iter().find(|k| p.get(k).is_none()) {
        return Err(Usage(format!("{flag}: parameter `{missing}` is not bound (use --param {missing}=VALUE)")));
    }
    Ok(e)
}

fn dispatch(c: &Command) -> Result<Done, Usage> {
    match c {
        Command::Jd(a) => jd(a),
        Command::Weight(a) => pair_cmd(a, false),
        Command::Classify(a) => pair_cmd(a, true),
        Command::Feller(a) => feller(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Bessel(a) => bessel(a),
        Command::Catalog { action: CatalogAction::List } => catalog_list(),
        Command::Catalog { action: CatalogAction::Run(a) } => catalog_run(a),
    }
}

fn jd(a: &JdArgs) -> Result<Done, Usage> {
    let s = a.common.setup()?;
    let phi = expr(&a.phi, "--phi", &s.params)?;
    let j = j_op(&phi, s.dom.d);
    let l = log_derivative(&phi);
    let mut text = format!("J^{}(φ) = {}\nφ'/φ = {}\n", s.dom.d, j, l);
    let mut values = Vec::new();
    let mut code = EXIT_OK;
    for &x in &a.at {
        match j.eval(x, &s.params) {
            Ok(v) => {
                text += &format!("  J({x}) = {v}\n");
                values.push(json!({"x": x, "value": v}));
            }
            Err(e) => {
                text += &format!("  J({x}): {e}\n");
                values.push(json!({"x": x, "error": e.to_string()}));
                code = EXIT_INDETERMINATE;
            }
        }
    }
    let mut params = a.common.echo();
    params.insert("phi", json!(a.phi));
    params.insert("at", json!(a.at));
    Ok(Done { code, params: value(&params), result: json!({"J": j, "log_derivative": l, "values": values}), text })
}

fn classification_code(c: Classification) -> i32 {
    match c {
        Classification::Indeterminate => EXIT_INDETERMINATE,
        _ => EXIT_OK,
    }
}

fn pair_cmd(a: &PairArgs, full: bool) -> Result<Done, Usage> {
    let s = a.common.setup()?;
    let h = expr(&a.h, "--h", &s.params)?;
    let v = expr(&a.v, "--V", &s.params)?;
    let wp = WeightPair::new(h, v, s.dom, s.params);
    let cfg = HardyConfig { feller: a.feller.config(), scan_points: a.scan_points, ..HardyConfig::default() };
    let mut params = a.common.echo();
    params.insert("h", json!(a.h));
    params.insert("V", json!(a.v));
    let rep = match classify(&wp, &cfg) {
        Ok(r) => r,
        Err(e @ crate::hardy::HardyError::Config(_)) => return Err(Usage(e.to_string())),
        Err(e) => {
            let msg = e.to_string();
            return Ok(Done {
                code: EXIT_INDETERMINATE,
                params: value(&params),
                result: json!({"error": msg}),
                text: format!("error: {msg}\n"),
            });
        }
    };
    let code = classification_code(rep.classification);
    let mut text = format!("W = {}\nclassification: {:?}\n", rep.w, rep.classification);
    if full {
        text += &format!(
            "recurrence (h): {:?}\nrecurrence (V): {:?}\npositivity: {}\n",
            rep.recurrence.recurrent,
            rep.v_recurrence.recurrent,
            if rep.positivity.is_nonnegative() { "W >= 0" } else { "not certified" }
        );
        if let Some(l) = rep.spectral_lambda {
            text += &format!("λ = inf W·V = {} at {}\n", l.value, l.at);
        }
        if let Some(l) = rep.spectral_lambda_prime {
            text += &format!("λ' = inf W = {} at {}\n", l.value, l.at);
        }
        text += &format!("boundary density = {}\n", rep.boundary_density);
        for n in &rep.notes {
            text += &format!("note: {n}\n");
        }
        return Ok(Done { code, params: value(&params), result: value(&rep), text });
    }
    let grid = crate::grid::scan_grid(&wp.dom, 9, &cfg.grid);
    let samples: Vec<Value> = grid
        .iter()
        .map(|&x| match rep.w.eval(x, &wp.params) {
            Ok(v) => json!({"x": x, "W": v}),
            Err(e) => json!({"x": x, "error": e.to_string()}),
        })
        .collect();
    let result = json!({
        "W": rep.w,
        "samples": samples,
        "positivity": rep.positivity,
        "classification": rep.classification,
    });
    Ok(Done { code, params: value(&params), result, text })
}

fn feller(a: &FellerArgs) -> Result<Done, Usage> {
    let s = a.common.setup()?;
    let h = expr(&a.h, "--h", &s.params)?;
    let verdict = recurrence_test(&h, &s.params, &s.dom, &a.feller.config())?;
    let code = match verdict.recurrent {
        Recurrence::Indeterminate => EXIT_INDETERMINATE,
        _ => EXIT_OK,
    };
    let text = format!(
        "recurrent: {:?}\nleft: {:?}\nright: {:?}\n",
        verdict.recurrent, verdict.left.tag, verdict.right.tag
    );
    let mut params = a.common.echo();
    params.insert("h", json!(a.h));
    Ok(Done { code, params: value(&params), result: value(&verdict), text })
}

fn spectrum(a: &SpectrumArgs) -> Result<Done, Usage> {
    let s = a.common.setup()?;
    let v = expr(&a.v, "--V", &s.params)?;
    let (h, w) = match (&a.h, &a.w) {
        (_, Some(w)) => (a.h.as_ref().map(|h| expr(h, "--h", &s.params)).transpose()?, expr(w, "--W", &s.params)?),
        (Some(h), None) => {
            let h = expr(h, "--h", &s.params)?;
            let wp = WeightPair::new(h.clone(), v.clone(), s.dom, s.params.clone());
            (Some(h), derive_weight(&wp))
        }
        (None, None) => return Err(Usage("spectrum needs --h or --W".into())),
    };
    let mut truncs = a.trunc.iter().map(|t| parse_trunc(t, &s.dom)).collect::<Result<Vec<_>, _>>()?;
    if truncs.is_empty() {
        truncs = default_truncations(&s.dom);
    }
    let wp = WeightPair::new(h.unwrap_or_else(|| v.clone()), v, s.dom, s.params);
    let rep = verify_inequality(&wp, &w, &truncs);
    let code = match rep.verdict {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INDETERMINATE,
    };
    let mut text = format!("W = {w}\nform: {:?}\n", rep.form);
    for l in &rep.levels {
        match (l.value, &l.error) {
            (Some(v), _) => text += &format!("  [{}, {}] n={}: {}\n", l.a, l.b, l.n, v),
            (None, Some(e)) => text += &format!("  [{}, {}] n={}: {}\n", l.a, l.b, l.n, e),
            _ => {}
        }
    }
    text += &format!("verdict: {:?}\n", rep.verdict);
    let mut params = a.common.echo();
    params.insert("h", json!(a.h));
    params.insert("V", json!(a.v));
    params.insert("W", json!(a.w));
    params.insert("trunc", json!(a.trunc));
    Ok(Done { code, params: value(&params), result: json!({"W": w, "report": rep}), text })
}

fn bessel(a: &BesselArgs) -> Result<Done, Usage> {
    let s = a.common.setup()?;
    let h = expr(&a.h, "--h", &s.params)?;
    let v = expr(&a.v, "--V", &s.params)?;
    let wp = WeightPair::new(h, v.clone(), s.dom, s.params.clone());
    let w = match &a.w {
        Some(w) => expr(w, "--W", &s.params)?,
        None => derive_weight(&wp),
    };
    let (lo, hi) = match &a.window {
        Some(win) => parse_pair(win, "--window")?,
        None => {
            let t = default_truncations(&s.dom)[0];
            (t.a, t.b)
        }
    };
    if !(s.dom.contains(lo) && s.dom.contains(hi) && lo < hi) {
        return Err(Usage(format!("window [{lo}, {hi}] must lie inside the domain")));
    }
    let u = ground_state(&wp);
    let grid = if lo > 0.0 && hi / lo >= 10.0 { geometric(lo, hi, 129) } else { uniform(lo, hi, 129) };
    let residual = ode_residual(&u, &v, &w, s.dom.d, &grid, &s.params);
    let sol = OdeProblem::new(v, w.clone(), s.dom.d, lo, hi, s.params.clone())
        .seeded_from(&u)
        .map_err(|e| e.to_string())
        .and_then(|p| shoot(&p).map_err(|e| e.to_string()));
    let mut result = json!({"ground_state": u, "W": w, "window": [lo, hi]});
    let mut text = format!("u = {u}\nW = {w}\n");
    let mut code = EXIT_OK;
    match &residual {
        Ok(r) => {
            result["residual"] = json!(r);
            text += &format!("max residual: {r:e}\n");
            if *r > a.tol {
                code = EXIT_FAIL;
            }
        }
        Err(e) => {
            result["residual_error"] = json!(e.to_string());
            text += &format!("residual: {e}\n");
            code = EXIT_INDETERMINATE;
        }
    }
    match &sol {
        Ok(sol) => {
            result["shooting"] = json!({
                "positive": sol.positive,
                "min_value": sol.min_value,
                "truncated": sol.truncated,
                "steps": sol.samples.len(),
            });
            text += &format!("shooting: positive={} min={}\n", sol.positive, sol.min_value);
            if !sol.positive && code == EXIT_OK {
                code = EXIT_FAIL;
            }
        }
        Err(e) => {
            result["shooting_error"] = json!(e);
            text += &format!("shooting: {e}\n");
            if code == EXIT_OK {
                code = EXIT_INDETERMINATE;
            }
        }
    }
    let mut params = a.common.echo();
    params.insert("h", json!(a.h));
    params.insert("V", json!(a.v));
    params.insert("W", json!(a.w));
    params.insert("window", json!(a.window));
    params.insert("tol", json!(a.tol));
    Ok(Done { code, params: value(&params), result, text })
}

fn catalog_list() -> Result<Done, Usage> {
    let mut text = String::new();
    let mut items = Vec::new();
    for name in catalog::names() {
        let d = catalog::defaults(name)?;
        let en = catalog::get_entry(name, &ParamBindings::new())?;
        let ps: Vec<String> = d.iter().map(|(k, v)| format!("{k}={v}")).collect();
        text += &format!("{name:<22} {}\n", ps.join(" "));
        items.push(json!({
            "name": name,
            "params": d,
            "h": en.wp.h,
            "V": en.wp.v,
            "expected_W": en.expected_w,
            "expected_classification": en.expected_classification,
        }));
    }
    Ok(Done { code: EXIT_OK, params: json!({}), result: json!(items), text })
}

fn catalog_run(a: &CatalogRunArgs) -> Result<Done, Usage> {
    let overrides = parse_bindings(&a.params)?;
    let mut entries: Vec<CatalogEntry> = match (&a.name, a.all) {
        (Some(n), false) => vec![catalog::get_entry(n, &overrides)?],
        (None, true) => {
            if !overrides.is_empty() {
                return Err(Usage("--param applies to a single entry, not --all".into()));
            }
            catalog::list_entries()
        }
        _ => return Err(Usage("give an entry name or --all".into())),
    };
    for p in &a.perturb_constant {
        let parts: Vec<&str> = p.splitn(3, ':').collect();
        let [name, label, delta] = parts[..] else {
            return Err(Usage(format!("--perturb-constant must be ENTRY:LABEL:DELTA, got `{p}`")));
        };
        let delta: f64 = delta.parse().map_err(|_| Usage(format!("bad delta in `{p}`")))?;
        let en = entries
            .iter_mut()
            .find(|e| e.name == name)
            .ok_or_else(|| Usage(format!("entry `{name}` is not being run")))?;
        en.perturb_constant(label, delta)?;
    }
    let reports: Vec<EntryReport> = catalog::run_all(&entries, &RunConfig::default());
    let code = if reports.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_FAIL };
    let mut text = String::new();
    for r in &reports {
        text += &format!("{} {}\n", if r.pass { "PASS" } else { "FAIL" }, r.name);
        for c in r.constants.iter().filter(|c| !c.ok) {
            text += &format!("  constant {}: expected {} got {:?}\n", c.label, c.expected, c.computed);
        }
        for e in &r.errors {
            text += &format!("  {e}\n");
        }
    }
    let params = json!({"name": a.name, "all": a.all, "param": a.params, "perturb_constant": a.perturb_constant});
    Ok(Done { code, params, result: value(&reports), text })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn go(args: &[&str]) -> Outcome {
        run(std::iter::once("hardy-forge").chain(args.iter().copied()))
    }

    #[test]
    fn classical_weight_is_optimal() {
        let o = go(&["--format", "json", "weight", "--h", "x^(2-d)", "--V", "1", "--dim", "3", "--interval", "0:inf"]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["result"]["classification"], "Optimal");
        for s in v["result"]["samples"].as_array().unwrap() {
            let x = s["x"].as_f64().unwrap();
            assert!((s["W"].as_f64().unwrap() - 0.25 / (x * x)).abs() <= 1e-12 / (x * x));
        }
    }

    #[test]
    fn floats_keep_17_digits() {
        assert_eq!(to_json(&json!([0.1, 1.0])), "[1.0000000000000001e-1,1.0000000000000000e0]");
        let back: Vec<f64> = serde_json::from_str(&to_json(&vec![std::f64::consts::PI])).unwrap();
        assert_eq!(back[0], std::f64::consts::PI);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(go(&["weight", "--bogus"]).code, EXIT_USAGE);
        assert_eq!(go(&["feller", "--h", "x^k"]).code, EXIT_USAGE);
        assert_eq!(go(&["feller", "--h", "x", "--interval", "1:0"]).code, EXIT_USAGE);
        assert_eq!(go(&["feller", "--h", "x", "--param", "k"]).code, EXIT_USAGE);
        assert_eq!(go(&["catalog", "run"]).code, EXIT_USAGE);
        assert_eq!(go(&["catalog", "run", "nope"]).code, EXIT_USAGE);
        assert_eq!(go(&["--help"]).code, EXIT_OK);
        assert_eq!(go(&[]).code, EXIT_USAGE);
    }

    #[test]
    fn trunc_parsing() {
        let dom = Domain::new(0.0, f64::INFINITY, 3.0).unwrap();
        let t = parse_trunc("0.001:1e3:10", &dom).unwrap();
        assert_eq!((t.a, t.b, t.n, t.map), (0.001, 1e3, 10, GridMap::Auto));
        assert_eq!(parse_trunc("0:1:100:identity", &dom).unwrap().map, GridMap::Identity);
        assert_eq!(parse_trunc("1:2:100:log", &dom).unwrap().map, GridMap::Log { origin: 0.0 });
        assert!(parse_trunc("1:2:100:logit", &dom).is_err());
        assert!(parse_trunc("0:1", &dom).is_err());
        assert!(parse_trunc("0:1:5:warp", &dom).is_err());
    }
}
