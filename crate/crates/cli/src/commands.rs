//! The subcommands. Each returns what goes to stdout; files named by
//! `--out`/`--trace` (or the output-directory variable) are written here.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use ehfade::bounds;
use ehfade::sim::{self, Mode, RxPolicySpec, SlotRecord, SlotSink, TxPolicySpec};
use ehfade::{ArrivalModel, BoundsReport, ReceiverConfig, RxBoundsReport, SimConfig, ThroughputEstimate};

use crate::config::{support_max, Config};
use crate::error::{CliError, CliResult};
use crate::output::{fmt_g12, fmt_opt, resolve_out, write_file, Document, RunManifest};
use crate::verify;

/// Where a command sends its results.
#[derive(Debug, Clone, Default)]
pub struct OutputOptions {
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    /// Print the machine-readable document instead of the text summary.
    pub json: bool,
}

/// What a command produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub stdout: String,
    pub exit_code: u8,
    /// Files written, primary output first.
    pub files: Vec<PathBuf>,
}

impl Outcome {
    fn ok(stdout: String, files: Vec<PathBuf>) -> Self {
        Self { stdout, exit_code: 0, files }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn require(cfg: &Config, key: &str) -> CliResult<f64> {
    cfg.f64(key)?.ok_or_else(|| bad(format!("`{key}` is required")))
}

/// Flattens a JSON value into sorted `a.b = value` lines.
fn text_lines(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(map) => {
                for (k, child) in map {
                    let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&p, child, out);
                }
            }
            Value::Array(items) if items.iter().any(|i| i.is_object() || i.is_array()) => {
                for (i, child) in items.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), child, out);
                }
            }
            Value::Number(n) => match n.as_f64() {
                Some(x) if !n.is_u64() && !n.is_i64() => out.push_str(&format!("{prefix} = {}\n", fmt_g12(x))),
                _ => out.push_str(&format!("{prefix} = {n}\n")),
            },
            Value::String(s) => out.push_str(&format!("{prefix} = {s}\n")),
            other => out.push_str(&format!("{prefix} = {other}\n")),
        }
    }
    let mut out = String::new();
    walk("", v, &mut out);
    out
}

fn render<B: Serialize>(doc: &Document<B>, json: bool) -> String {
    if json {
        doc.to_json()
    } else {
        let v = serde_json::to_value(doc).expect("documents serialize");
        text_lines(&v)
    }
}

/// Writes the JSON document and its manifest if an output path applies.
fn emit<B: Serialize>(
    command: &str,
    cfg: &Config,
    doc: &Document<B>,
    opts: &OutputOptions,
    extra_files: Vec<PathBuf>,
) -> CliResult<Outcome> {
    let mut files = Vec::new();
    if let Some(path) = resolve_out(opts.out.as_deref(), &format!("{command}.json")) {
        write_file(&path, &doc.to_json())?;
        files.push(path.clone());
        files.extend(extra_files);
        let mut manifest = RunManifest::start(command, cfg.seed()?, cfg.entries().clone());
        manifest.outputs = files.iter().map(|p| p.display().to_string()).collect();
        files.push(manifest.finish(&path)?);
    } else {
        files.extend(extra_files);
    }
    Ok(Outcome::ok(render(doc, opts.json), files))
}

/// Transmitter arrivals and battery size from `arrivals`/`b_max`, falling
/// back to Bernoulli(`p`, `b_max`).
fn tx_arrivals(cfg: &Config) -> CliResult<(ArrivalModel, f64)> {
    let b_max = cfg.f64("b_max")?;
    match (cfg.arrivals()?, cfg.f64("p")?) {
        (Some(m), _) => {
            let b = b_max.unwrap_or_else(|| support_max(&m));
            Ok((m, b))
        }
        (None, Some(p)) => {
            let b = b_max.ok_or_else(|| bad("`b_max` is required when arrivals are given through `p`"))?;
            Ok((ArrivalModel::bernoulli(p, b).map_err(|e| bad(e.to_string()))?, b))
        }
        (None, None) => Err(bad("set `arrivals` (or `p` with `b_max`)")),
    }
}

#[derive(Serialize)]
struct TxBoundsBody {
    mode: &'static str,
    arrivals: ArrivalModel,
    b_max: f64,
    bounds: BoundsReport,
    /// Median-quantized gap bound; absent when the median is zero.
    median_gap_bound: Option<f64>,
    capacity: Option<ehfade::CapacityBracket>,
}

#[derive(Serialize)]
struct RxBoundsBody {
    mode: &'static str,
    p: f64,
    q: f64,
    b_max: f64,
    unit_battery: RxBoundsReport,
    simple_receiver: RxBoundsReport,
}

pub fn cmd_bounds(cfg: &Config, opts: &OutputOptions) -> CliResult<Outcome> {
    match cfg.mode()? {
        Mode::TxOnly => {
            let (arrivals, b_max) = tx_arrivals(cfg)?;
            let report = BoundsReport::compute(&arrivals, b_max)?;
            let c = cfg.f64("c")?.unwrap_or(0.0);
            let body = TxBoundsBody {
                mode: "tx",
                median_gap_bound: bounds::general_gap_bound(&arrivals).ok(),
                capacity: bounds::capacity_bracket(&arrivals, c).ok(),
                arrivals,
                b_max,
                bounds: report,
            };
            emit("bounds", cfg, &Document::new("ehfade.bounds", body), opts, Vec::new())
        }
        Mode::TxRx => {
            let p = require(cfg, "p")?;
            let q = require(cfg, "q")?;
            let b_max = cfg.f64("b_max")?.unwrap_or(1.0);
            let body = RxBoundsBody {
                mode: "tx_rx",
                p,
                q,
                b_max,
                unit_battery: RxBoundsReport::unit_battery(p, q)?,
                simple_receiver: RxBoundsReport::simple_receiver(p, q, b_max)?,
            };
            emit("bounds", cfg, &Document::new("ehfade.bounds", body), opts, Vec::new())
        }
    }
}

pub fn cmd_solve_k(cfg: &Config, opts: &OutputOptions) -> CliResult<Outcome> {
    let p = require(cfg, "p")?;
    let k = bounds::solve_gap_constant(p)?;
    let gap = bounds::bernoulli_gap_bound(p)?;
    let doc = Document::new("ehfade.solve_k", json!({ "p": p, "k": k, "gap_bound": gap }));
    emit("solve-k", cfg, &doc, opts, Vec::new())
}

/// Builds the simulator configuration described by `cfg`.
pub fn sim_config(cfg: &Config) -> CliResult<SimConfig> {
    let mode = cfg.mode()?;
    let policy = cfg.get("policy").unwrap_or(if mode == Mode::TxRx { "ctp" } else { "cfp" });
    let tx_policy = match policy {
        "cfp" => TxPolicySpec::Cfp,
        "greedy" => TxPolicySpec::Greedy,
        "ctp" => TxPolicySpec::Ctp { latch: cfg.latch()? },
        other => return Err(bad(format!("`policy`: expected cfp, greedy or ctp, got `{other}`"))),
    };
    let mut sc = match (mode, tx_policy) {
        (Mode::TxOnly, TxPolicySpec::Ctp { .. }) => return Err(bad("policy `ctp` needs `mode = tx_rx`")),
        (Mode::TxOnly, _) => {
            let (arrivals, b_max) = tx_arrivals(cfg)?;
            SimConfig::tx_only(arrivals, b_max, tx_policy)
        }
        (Mode::TxRx, TxPolicySpec::Ctp { .. }) => {
            let p = require(cfg, "p")?;
            let q = require(cfg, "q")?;
            let rx = ReceiverConfig::unit(q, cfg.rx_policy()?.unwrap_or(RxPolicySpec::Ctp))?;
            SimConfig::tx_rx(ArrivalModel::bernoulli(p, 1.0)?, 1.0, tx_policy, rx)
        }
        (Mode::TxRx, _) => {
            let q = require(cfg, "q")?;
            let (arrivals, b_max) = tx_arrivals(cfg)?;
            let rx = ReceiverConfig::unit(q, cfg.rx_policy()?.unwrap_or(RxPolicySpec::WhenCharged))?;
            SimConfig::tx_rx(arrivals, b_max, tx_policy, rx)
        }
    };
    sc = sc.with_slots(cfg.slots()?).with_replications(cfg.reps()?).with_seed(cfg.seed()?);
    if let Some(w) = cfg.u64("warmup")? {
        sc.warmup_slots = w;
    }
    sc.rate_prefactor = cfg.prefactor()?;
    sc.fkg_lags = cfg.fkg_lags()?;
    sc.validate()?;
    Ok(sc)
}

/// Streams replication 0 into a CSV file.
struct CsvTrace {
    w: csv::Writer<BufWriter<File>>,
    failed: Option<csv::Error>,
}

impl CsvTrace {
    const HEADER: [&'static str; 6] = ["slot", "h", "spend", "battery_tx", "battery_rx", "rate"];

    fn create(path: &Path) -> CliResult<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        w.write_record(Self::HEADER).map_err(|e| CliError::Runtime(e.to_string()))?;
        Ok(Self { w, failed: None })
    }

    fn finish(mut self, path: &Path) -> CliResult<()> {
        if let Some(e) = self.failed {
            return Err(CliError::Runtime(format!("writing {}: {e}", path.display())));
        }
        self.w.flush().map_err(|e| CliError::io(path, e))
    }
}

impl SlotSink<f64> for CsvTrace {
    fn record(&mut self, r: &SlotRecord<f64>) {
        if self.failed.is_some() {
            return;
        }
        let row = [
            r.slot.to_string(),
            fmt_g12(r.h),
            fmt_g12(r.spend),
            fmt_g12(r.battery_tx),
            fmt_opt(r.battery_rx),
            fmt_g12(r.rate),
        ];
        if let Err(e) = self.w.write_record(&row) {
            self.failed = Some(e);
        }
    }
}

/// Resolved config snapshot: file and flags plus the defaults that applied.
fn snapshot(cfg: &Config, sc: &SimConfig) -> Config {
    let mut out = cfg.clone();
    let mode = match sc.mode() {
        Mode::TxOnly => "tx",
        Mode::TxRx => "tx_rx",
    };
    let fill = [
        ("mode", mode.to_string()),
        ("seed", sc.seed.to_string()),
        ("slots", sc.n_slots.to_string()),
        ("reps", sc.n_replications.to_string()),
        ("warmup", sc.warmup_slots.to_string()),
    ];
    for (k, v) in fill {
        if out.get(k).is_none() {
            out.set(k, &v).expect("known key");
        }
    }
    out
}

fn analytic_for(sc: &SimConfig) -> BTreeMap<&'static str, Value> {
    let mut m = BTreeMap::new();
    match (&sc.tx_policy, &sc.receiver) {
        (TxPolicySpec::Ctp { .. }, Some(rx)) => {
            if let (ArrivalModel::Bernoulli { p, .. }, ArrivalModel::Bernoulli { p: q, .. }) =
                (&sc.tx_arrivals, &rx.arrivals)
            {
                match RxBoundsReport::unit_battery(*p, *q) {
                    Ok(r) => {
                        m.insert("t_ub", json!(r.t_ub_rx));
                        m.insert("t_lb", json!(r.t_lb_rx));
                        m.insert("gamma_star", json!(r.gamma_star));
                    }
                    Err(e) => {
                        m.insert("error", json!(e.to_string()));
                    }
                }
            }
        }
        (_, None) => match BoundsReport::compute(&sc.tx_arrivals, sc.b_max) {
            Ok(r) => {
                m.insert("t_ub", json!(r.t_ub));
                if sc.tx_policy == TxPolicySpec::Cfp {
                    m.insert("t_lb", json!(r.t_lb));
                    m.insert("gap_bound", json!(r.gap_bound));
                }
            }
            Err(e) => {
                m.insert("t_ub", json!(bounds::transmitter_upper_bound(&sc.tx_arrivals)));
                m.insert("error", json!(e.to_string()));
            }
        },
        (_, Some(rx)) => {
            m.insert("t_ub", json!(bounds::rx_upper_bound_general(&sc.tx_arrivals, &rx.arrivals)));
        }
    }
    m
}

#[derive(Serialize)]
struct SimulateBody {
    config: BTreeMap<String, String>,
    estimate: ThroughputEstimate,
    analytic: BTreeMap<&'static str, Value>,
}

pub fn cmd_simulate(cfg: &Config, opts: &OutputOptions) -> CliResult<Outcome> {
    let sc = sim_config(cfg)?;
    let resolved = snapshot(cfg, &sc);
    let estimate = match &opts.trace {
        Some(path) => {
            let mut sink = CsvTrace::create(path)?;
            let est = sim::simulate_with_trace(&sc, &mut sink)?;
            sink.finish(path)?;
            est
        }
        None => sim::simulate(&sc)?,
    };
    let body = SimulateBody { config: resolved.entries().clone(), estimate, analytic: analytic_for(&sc) };
    let trace: Vec<PathBuf> = opts.trace.iter().cloned().collect();
    emit("simulate", &resolved, &Document::new("ehfade.simulate", body), opts, trace)
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub kind: &'static str,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub b_max: f64,
    pub t_ub: Option<f64>,
    pub t_lb_analytic: Option<f64>,
    pub t_sim_mean: Option<f64>,
    pub t_sim_stderr: Option<f64>,
    pub gap_bound: Option<f64>,
    pub error: Option<String>,
}

pub const SWEEP_COLUMNS: [&str; 10] =
    ["kind", "p", "q", "b_max", "t_ub", "t_lb_analytic", "t_sim_mean", "t_sim_stderr", "gap_bound", "error"];

impl SweepRow {
    fn new(kind: &'static str, p: Option<f64>, q: Option<f64>, b_max: f64) -> Self {
        Self {
            kind,
            p,
            q,
            b_max,
            t_ub: None,
            t_lb_analytic: None,
            t_sim_mean: None,
            t_sim_stderr: None,
            gap_bound: None,
            error: None,
        }
    }

    fn fail(&mut self, e: impl std::fmt::Display) {
        let msg = e.to_string();
        self.error = Some(match self.error.take() {
            Some(prev) => format!("{prev}; {msg}"),
            None => msg,
        });
    }

    fn order(&self, other: &Self) -> Ordering {
        let opt = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (a, b) => a.is_some().cmp(&b.is_some()),
        };
        self.kind
            .cmp(other.kind)
            .then(opt(self.p, other.p))
            .then(opt(self.q, other.q))
            .then(self.b_max.total_cmp(&other.b_max))
    }

    fn csv_record(&self) -> [String; 10] {
        [
            self.kind.to_string(),
            fmt_opt(self.p),
            fmt_opt(self.q),
            fmt_g12(self.b_max),
            fmt_opt(self.t_ub),
            fmt_opt(self.t_lb_analytic),
            fmt_opt(self.t_sim_mean),
            fmt_opt(self.t_sim_stderr),
            fmt_opt(self.gap_bound),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

fn sweep_point(base: &Config, row: &mut SweepRow) {
    // Analytic side first; a failure there still lets the simulation run.
    let mut sim_cfg = base.clone();
    let set = |c: &mut Config, k: &str, v: f64| c.set(k, &format!("{v:?}")).expect("known key");
    match row.kind {
        "bernoulli" => {
            let (p, b) = (row.p.unwrap(), row.b_max);
            match ArrivalModel::bernoulli(p, b).and_then(|m| BoundsReport::compute(&m, b)) {
                Ok(r) => {
                    row.t_ub = Some(r.t_ub);
                    row.t_lb_analytic = Some(r.t_lb);
                    row.gap_bound = Some(r.gap_bound);
                }
                Err(e) => row.fail(e),
            }
            sim_cfg.set("mode", "tx").unwrap();
            sim_cfg.set("policy", "cfp").unwrap();
            sim_cfg.set("arrivals", &format!("bernoulli:p={p:?},e={b:?}")).unwrap();
            set(&mut sim_cfg, "b_max", b);
        }
        "uniform" => {
            let b = row.b_max;
            match ArrivalModel::uniform(0.0, b).and_then(|m| BoundsReport::compute(&m, b)) {
                Ok(r) => {
                    row.t_ub = Some(r.t_ub);
                    row.t_lb_analytic = Some(r.t_lb);
                    row.gap_bound = Some(r.gap_bound);
                }
                Err(e) => row.fail(e),
            }
            sim_cfg.set("mode", "tx").unwrap();
            sim_cfg.set("policy", "cfp").unwrap();
            sim_cfg.set("arrivals", &format!("uniform:0,{b:?}")).unwrap();
            set(&mut sim_cfg, "b_max", b);
        }
        "ctp" => {
            let (p, q) = (row.p.unwrap(), row.q.unwrap());
            match RxBoundsReport::unit_battery(p, q) {
                Ok(r) => {
                    row.t_ub = Some(r.t_ub_rx);
                    row.t_lb_analytic = Some(r.t_lb_rx);
                    row.gap_bound = Some(r.t_ub_rx - r.t_lb_rx);
                }
                Err(e) => row.fail(e),
            }
            sim_cfg.set("mode", "tx_rx").unwrap();
            sim_cfg.set("policy", "ctp").unwrap();
            set(&mut sim_cfg, "p", p);
            set(&mut sim_cfg, "q", q);
        }
        _ => unreachable!("kinds are validated before the sweep"),
    }
    let run = sim_config(&sim_cfg).and_then(|sc| sim::simulate(&sc).map_err(CliError::from));
    match run {
        Ok(est) => {
            row.t_sim_mean = Some(est.mean);
            row.t_sim_stderr = Some(est.std_err);
        }
        Err(e) => row.fail(e),
    }
}

/// Expands the grid into rows, sorted by `(kind, p, q, b_max)`.
pub fn sweep_rows(cfg: &Config) -> CliResult<Vec<SweepRow>> {
    let kinds: Vec<&'static str> = match cfg.get("grid.kind") {
        None => Vec::new(),
        Some(s) => s
            .split(',')
            .map(str::trim)
            .filter(|k| !k.is_empty())
            .map(|k| match k {
                "bernoulli" => Ok("bernoulli"),
                "ctp" => Ok("ctp"),
                "uniform" => Ok("uniform"),
                other => Err(bad(format!("`grid.kind`: unknown kind `{other}`"))),
            })
            .collect::<CliResult<_>>()?,
    };
    let (ps, qs, bs) = (cfg.grid("grid.p")?, cfg.grid("grid.q")?, cfg.grid("grid.b_max")?);
    let mut rows = Vec::new();
    for kind in kinds {
        match kind {
            "bernoulli" => {
                for &p in &ps {
                    for &b in &bs {
                        rows.push(SweepRow::new(kind, Some(p), None, b));
                    }
                }
            }
            "uniform" => rows.extend(bs.iter().map(|&b| SweepRow::new(kind, None, None, b))),
            _ => {
                for &p in &ps {
                    for &q in &qs {
                        rows.push(SweepRow::new(kind, Some(p), Some(q), 1.0));
                    }
                }
            }
        }
    }
    rows.sort_by(SweepRow::order);
    rows.dedup_by(|a, b| a.order(b) == Ordering::Equal);
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_COLUMNS).expect("in-memory write");
    for r in rows {
        w.write_record(r.csv_record()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

pub fn cmd_sweep(cfg: &Config, opts: &OutputOptions) -> CliResult<Outcome> {
    let mut rows = sweep_rows(cfg)?;
    for row in &mut rows {
        sweep_point(cfg, row);
    }
    let csv_text = sweep_csv(&rows);
    let mut files = Vec::new();
    if let Some(path) = resolve_out(opts.out.as_deref(), "sweep.csv") {
        write_file(&path, &csv_text)?;
        files.push(path.clone());
        let mut manifest = RunManifest::start("sweep", cfg.seed()?, cfg.entries().clone());
        manifest.outputs = vec![path.display().to_string()];
        files.push(manifest.finish(&path)?);
    }
    let stdout = if opts.json { Document::new("ehfade.sweep", json!({ "rows": rows })).to_json() } else { csv_text };
    Ok(Outcome::ok(stdout, files))
}

pub fn cmd_verify(cfg: &Config, opts: &OutputOptions) -> CliResult<Outcome> {
    let seed = cfg.seed()?;
    let mut progress = std::io::stderr();
    let report = verify::run_all(seed, |line| {
        let _ = writeln!(progress, "{line}");
    });
    let doc = Document::new("ehfade.verify", &report);
    let mut files = Vec::new();
    if let Some(path) = resolve_out(opts.out.as_deref(), "verify.json") {
        write_file(&path, &doc.to_json())?;
        files.push(path);
    }
    let stdout = if opts.json { doc.to_json() } else { report.lines().join("\n") + "\n" };
    Ok(Outcome { stdout, exit_code: if report.passed { 0 } else { 1 }, files })
}
