//! The verification suite: ten pass/fail checks of the bounds engine and the
//! simulator, with pinned tolerances.
//!
//! Reference values that are not simple closed forms come from oracles
//! written here independently of the core crate (the exponential integral is
//! recomputed by quadrature rather than by series or continued fraction).

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use ehfade::bounds::{self, BoundPath};
use ehfade::numerics::{exp_integral_e1, fading_log_moment};
use ehfade::policies::LatchMode;
use ehfade::sim::{self, estimate_fkg_terms, RxPolicySpec, SlotRecord, SlotSink, TxPolicySpec};
use ehfade::{ArrivalModel, BoundsReport, GapRecursion, LogBase, ReceiverConfig, SimConfig, ThroughputEstimate};

/// Slots per replication and replication count of the long runs.
pub const LONG_RUN: (u64, u32) = (1_000_000, 20);
/// Slots per replication of each dominance-matrix cell.
pub const MATRIX_SLOTS: u64 = 200_000;
/// Battery sizes of the Bernoulli(1/2) gap check.
pub const BERNOULLI_B: [f64; 5] = [1.0, 5.0, 10.0, 100.0, 1000.0];
/// Battery sizes of the uniform-arrival gap check.
pub const UNIFORM_B: [f64; 3] = [1.0, 10.0, 100.0];
pub const BERNOULLI_GAP_LIMIT: f64 = 1.41 + 1e-3;
pub const UNIFORM_GAP_LIMIT: f64 = 1.78;
pub const MIN_TOTAL_SLOTS: u64 = 100_000_000;
pub const E1_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_s: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {}  {}: {} ({:.2}s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed_s
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub total_slots: u64,
    pub criteria: Vec<CriterionResult>,
}

impl VerifyReport {
    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self.criteria.iter().map(CriterionResult::line).collect();
        out.push(format!(
            "{}: {}/{} criteria passed",
            if self.passed { "PASS" } else { "FAIL" },
            self.criteria.iter().filter(|c| c.passed).count(),
            self.criteria.len()
        ));
        out
    }
}

fn timed(id: u8, name: &'static str, f: impl FnOnce() -> (bool, String)) -> CriterionResult {
    let t = Instant::now();
    let (passed, detail) = f();
    CriterionResult { id, name, passed, detail, elapsed_s: t.elapsed().as_secs_f64() }
}

/// `E1(x)` by adaptive Simpson on `∫₀^∞ e^{-u}/(x+u) du` after substituting
/// `x + u = x·eˢ`, which leaves the smooth integrand `exp(−x(eˢ−1))`.
pub fn e1_oracle(x: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn simpson(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let f = |s: f64| (-x * s.exp_m1()).exp();
    // Past s_max the integrand is below e^{-60}.
    let s_max = (60.0 / x).ln_1p();
    let pieces = 32;
    let h = s_max / pieces as f64;
    let integral: f64 = (0..pieces)
        .map(|i| {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
            simpson(&f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), 1e-16, 40)
        })
        .sum();
    (-x).exp() * integral
}

/// Gap constant at `p = 1/2` against `k = 6.05 ± 0.01` and gap `1.41 ± 0.01`.
pub fn check_gap_constant(recursion: &GapRecursion) -> (bool, String) {
    let start = Instant::now();
    let p = 0.5f64;
    match recursion.solve(p) {
        Ok(k) => {
            let gap = 0.5 * (1.0 + (2.0 * p).sqrt() * k).log2();
            let secs = start.elapsed().as_secs_f64();
            let ok = (k - 6.05).abs() <= 0.01 && (gap - 1.41).abs() <= 0.01 && secs < 1.0;
            (ok, format!("k = {k:.6}, gap = {gap:.6} bits, solved in {secs:.2e}s"))
        }
        Err(e) => (false, format!("solver failed: {e}")),
    }
}

fn check_bernoulli_gap() -> (bool, String) {
    let start = Instant::now();
    let mut worst = f64::NEG_INFINITY;
    let mut parts = Vec::new();
    for b in BERNOULLI_B {
        let gap = ArrivalModel::bernoulli(0.5, b)
            .map(|m| bounds::transmitter_upper_bound(&m))
            .and_then(|ub| Ok(ub - bounds::cfp_lower_bound_bernoulli(0.5, b)?));
        match gap {
            Ok(g) => {
                worst = worst.max(g);
                parts.push(format!("B={b}: {g:.4}"));
            }
            Err(e) => return (false, format!("B={b}: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (worst <= BERNOULLI_GAP_LIMIT && secs < 1.0, format!("{} (limit {BERNOULLI_GAP_LIMIT:.3})", parts.join(", ")))
}

fn check_uniform_gap() -> (bool, String) {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for b in UNIFORM_B {
        match ArrivalModel::uniform(0.0, b).and_then(|m| BoundsReport::compute(&m, b)) {
            Ok(r) => {
                let g = r.t_ub - r.t_lb;
                ok &= r.path == BoundPath::MedianQuantized && g <= UNIFORM_GAP_LIMIT;
                parts.push(format!("B={b}: {g:.4}"));
            }
            Err(e) => return (false, format!("B={b}: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (ok && secs < 1.0, format!("{} (limit {UNIFORM_GAP_LIMIT})", parts.join(", ")))
}

fn check_special_functions() -> (bool, String) {
    let n = 50;
    let (lo, hi) = (1e-4f64, 50.0f64);
    let mut worst = 0.0f64;
    let mut worst_x = lo;
    for i in 0..n {
        let x = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
        let rel = match exp_integral_e1(x) {
            Ok(v) => ((v - e1_oracle(x)) / e1_oracle(x)).abs(),
            Err(_) => f64::INFINITY,
        };
        if rel > worst {
            worst = rel;
            worst_x = x;
        }
    }
    let flm: f64 = fading_log_moment(1.0, LogBase::Nats);
    let ok = worst < E1_REL_TOL && (flm - 0.596347).abs() <= 1e-6;
    (ok, format!("max rel err {worst:.2e} at x = {worst_x:.3e}; E[ln(1+h)] = {flm:.9}"))
}

/// Checks every slot of replication 0 against energy neutrality without
/// relying on the battery code, and optionally keeps the spend sequence.
struct Audit {
    tx_cap: f64,
    rx_cap: Option<f64>,
    events: u64,
    spends: Option<Vec<f64>>,
}

impl SlotSink<f64> for Audit {
    fn record(&mut self, r: &SlotRecord<f64>) {
        let tx_bad = !(r.spend >= 0.0 && r.spend <= r.battery_tx && r.battery_tx <= self.tx_cap);
        let rx_bad = match (r.battery_rx, self.rx_cap) {
            (Some(b), Some(cap)) => !(b >= 0.0 && b <= cap),
            _ => false,
        };
        self.events += u64::from(tx_bad || rx_bad);
        if let Some(s) = self.spends.as_mut() {
            s.push(r.spend);
        }
    }
}

/// Running totals for the neutrality check.
#[derive(Debug, Default)]
struct Ledger {
    slots: u64,
    aborted_runs: u64,
    audit_events: u64,
    failures: Vec<String>,
}

impl Ledger {
    fn run(&mut self, cfg: &SimConfig, keep_spends: bool) -> Result<(ThroughputEstimate, Vec<f64>), String> {
        let mut audit = Audit {
            tx_cap: cfg.b_max,
            rx_cap: cfg.receiver.as_ref().map(|r| r.b_max),
            events: 0,
            spends: keep_spends.then(|| Vec::with_capacity(cfg.n_slots as usize)),
        };
        match sim::simulate_with_trace(cfg, &mut audit) {
            Ok(est) => {
                self.slots += est.slots_simulated;
                self.audit_events += audit.events;
                Ok((est, audit.spends.unwrap_or_default()))
            }
            Err(e) => {
                if matches!(e, ehfade::Error::NeutralityViolation { .. }) {
                    self.aborted_runs += 1;
                }
                self.failures.push(e.to_string());
                Err(e.to_string())
            }
        }
    }
}

fn long_run(cfg: SimConfig, seed: u64) -> SimConfig {
    cfg.with_slots(LONG_RUN.0).with_replications(LONG_RUN.1).with_seed(seed)
}

/// Transmitter-only CFP under Bernoulli(1/2, 10) with a battery of 10.
pub fn cfp_baseline(seed: u64) -> SimConfig {
    let mut cfg =
        long_run(SimConfig::tx_only(ArrivalModel::bernoulli(0.5, 10.0).unwrap(), 10.0, TxPolicySpec::Cfp), seed);
    cfg.fkg_lags = vec![1, 5];
    cfg
}

/// Common threshold policy with unit batteries at `p = q = 1/2`.
pub fn ctp_baseline(seed: u64) -> SimConfig {
    let rx = ReceiverConfig::unit(0.5, RxPolicySpec::Ctp).unwrap();
    long_run(
        SimConfig::tx_rx(
            ArrivalModel::bernoulli(0.5, 1.0).unwrap(),
            1.0,
            TxPolicySpec::Ctp { latch: LatchMode::Once },
            rx,
        ),
        seed,
    )
}

/// Transmitter-only configurations of the dominance matrix, labelled.
pub fn dominance_matrix(seed: u64) -> Vec<(String, SimConfig)> {
    let mut out = Vec::new();
    let arrivals = BERNOULLI_B
        .iter()
        .map(|&b| (format!("bernoulli(0.5,{b})"), ArrivalModel::bernoulli(0.5, b).unwrap(), b))
        .chain(UNIFORM_B.iter().map(|&b| (format!("uniform(0,{b})"), ArrivalModel::uniform(0.0, b).unwrap(), b)));
    for (label, m, b) in arrivals {
        for (name, policy) in [("cfp", TxPolicySpec::Cfp), ("greedy", TxPolicySpec::Greedy)] {
            let cfg = SimConfig::tx_only(m.clone(), b, policy)
                .with_slots(MATRIX_SLOTS)
                .with_replications(LONG_RUN.1)
                .with_seed(seed);
            out.push((format!("{name}/{label}"), cfg));
        }
    }
    out
}

/// Runs every criterion; `progress` sees each result line as it completes.
pub fn run_all(seed: u64, mut progress: impl FnMut(&str)) -> VerifyReport {
    let mut results = Vec::new();
    let mut push = |r: CriterionResult, results: &mut Vec<CriterionResult>| {
        progress(&r.line());
        results.push(r);
    };
    let mut ledger = Ledger::default();

    push(timed(1, "gap constant", || check_gap_constant(&GapRecursion::default())), &mut results);
    push(timed(2, "bernoulli gap", check_bernoulli_gap), &mut results);
    push(timed(3, "uniform gap", check_uniform_gap), &mut results);

    // 4: CFP vs its analytic throughput; keeps the spend trace for 8.
    let c4_cfg = cfp_baseline(seed);
    let mut c4: Option<(ThroughputEstimate, Vec<f64>)> = None;
    push(
        timed(4, "simulation vs analysis", || {
            let t = Instant::now();
            let analytic = match bounds::cfp_lower_bound_bernoulli(0.5, 10.0) {
                Ok(v) => v,
                Err(e) => return (false, format!("analytic value failed: {e}")),
            };
            match ledger.run(&c4_cfg, true) {
                Ok((est, spends)) => {
                    let secs = t.elapsed().as_secs_f64();
                    let diff = (est.mean - analytic).abs();
                    let ok = diff <= 3.0 * est.std_err && est.std_err <= 0.01 && secs < 30.0;
                    let detail = format!(
                        "mean {:.6} vs analytic {analytic:.6}, |diff| {diff:.2e} <= 3*se {:.2e}, se <= 0.01",
                        est.mean,
                        3.0 * est.std_err
                    );
                    c4 = Some((est, spends));
                    (ok, detail)
                }
                Err(e) => (false, e),
            }
        }),
        &mut results,
    );

    // 7: half-ratio guarantee of the common threshold policy.
    push(
        timed(7, "receiver half ratio", || {
            let t = Instant::now();
            let (v2, gamma) = match bounds::unit_battery_rx_upper_bound(0.5, 0.5) {
                Ok(v) => v,
                Err(e) => return (false, format!("upper bound failed: {e}")),
            };
            match ledger.run(&ctp_baseline(seed), false) {
                Ok((est, _)) => {
                    let secs = t.elapsed().as_secs_f64();
                    let floor = 0.5 * v2 - 3.0 * est.std_err;
                    let frac = est.extras.h_above_gamma_fraction.unwrap_or(f64::NAN);
                    let frac_se = est.extras.h_above_gamma_std_err.unwrap_or(f64::NAN);
                    let frac_ok = (frac - 0.5).abs() <= 3.0 * frac_se;
                    let ok = est.mean >= floor && frac_ok && secs < 30.0;
                    (
                        ok,
                        format!(
                            "mean {:.6} >= {floor:.6} (half of {v2:.6}); P(h > {gamma:.4}) = {frac:.5} +- {:.1e}",
                            est.mean,
                            3.0 * frac_se
                        ),
                    )
                }
                Err(e) => (false, e),
            }
        }),
        &mut results,
    );

    // 5: no empirical throughput above the universal upper bound.
    push(
        timed(5, "upper-bound dominance", || {
            let mut checked = 0;
            let mut violations = Vec::new();
            let mut cells: Vec<(String, Result<ThroughputEstimate, String>, f64)> = Vec::new();
            if let Some((est, _)) = &c4 {
                cells.push((
                    "cfp/bernoulli(0.5,10) long run".into(),
                    Ok(est.clone()),
                    bounds::transmitter_upper_bound(&c4_cfg.tx_arrivals),
                ));
            }
            for (label, cfg) in dominance_matrix(seed) {
                let ub = bounds::transmitter_upper_bound(&cfg.tx_arrivals);
                cells.push((label, ledger.run(&cfg, false).map(|r| r.0), ub));
            }
            for (label, est, ub) in cells {
                match est {
                    Ok(e) => {
                        checked += 1;
                        if e.mean > ub + 3.0 * e.std_err {
                            violations.push(format!("{label}: {:.5} > {ub:.5}", e.mean));
                        }
                    }
                    Err(err) => violations.push(format!("{label}: {err}")),
                }
            }
            let detail = if violations.is_empty() {
                format!("{checked} configurations, 0 violations")
            } else {
                format!("{} violations: {}", violations.len(), violations.join("; "))
            };
            (violations.is_empty() && checked > 0, detail)
        }),
        &mut results,
    );

    // 8: correlation direction of the spend sequence.
    push(
        timed(8, "spend correlation direction", || {
            let Some((est, spends)) = &c4 else { return (false, "long CFP run unavailable".into()) };
            let mut ok = true;
            let mut parts = Vec::new();
            for fk in &est.extras.fkg {
                // Per-replication spread of lhs − rhs; the trace is a single replication.
                let sigma = fk.diff_std_err * (est.n_replications as f64).sqrt();
                match estimate_fkg_terms(spends, fk.lag) {
                    Ok((lhs, rhs)) => {
                        ok &= lhs >= rhs - 3.0 * sigma && fk.lhs >= fk.rhs - 3.0 * fk.diff_std_err;
                        parts.push(format!("lag {}: {lhs:.5} >= {rhs:.5} - 3*{sigma:.1e}", fk.lag));
                    }
                    Err(e) => {
                        ok = false;
                        parts.push(format!("lag {}: {e}", fk.lag));
                    }
                }
            }
            (ok && est.extras.fkg.len() == 2, parts.join(", "))
        }),
        &mut results,
    );

    push(timed(9, "special functions", check_special_functions), &mut results);

    // 10: same seed, same bytes.
    push(
        timed(10, "determinism", || {
            let Some((first, _)) = &c4 else { return (false, "long CFP run unavailable".into()) };
            match ledger.run(&c4_cfg, false) {
                Ok((again, _)) => {
                    let a = serde_json::to_string_pretty(first).expect("estimate serializes");
                    let b = serde_json::to_string_pretty(&again).expect("estimate serializes");
                    (a == b, format!("{} bytes, identical: {}", a.len(), a == b))
                }
                Err(e) => (false, e),
            }
        }),
        &mut results,
    );

    let total_slots = ledger.slots;
    push(
        timed(6, "energy neutrality", || {
            let ok = ledger.aborted_runs == 0 && ledger.audit_events == 0 && total_slots >= MIN_TOTAL_SLOTS;
            let mut detail = format!(
                "{total_slots} slots simulated (need {MIN_TOTAL_SLOTS}), {} aborted runs, {} audit events",
                ledger.aborted_runs, ledger.audit_events
            );
            if !ledger.failures.is_empty() {
                detail.push_str(&format!("; run failures: {}", ledger.failures.join("; ")));
            }
            (ok, detail)
        }),
        &mut results,
    );

    results.sort_by_key(|r| r.id);
    VerifyReport { seed, passed: results.iter().all(|r| r.passed), total_slots, criteria: results }
}

/// Criterion outcomes keyed by id, for callers that only need pass/fail.
pub fn pattern(report: &VerifyReport) -> BTreeMap<u8, bool> {
    report.criteria.iter().map(|c| (c.id, c.passed)).collect()
}
