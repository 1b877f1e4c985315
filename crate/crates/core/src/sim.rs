//! Seeded slotted-time Monte Carlo engine.
//!
//! Each replication is a strictly sequential slot loop:
//!
//! 1. draw `h_t` from the channel stream,
//! 2. the transmitter (and receiver) decide from `(h_t, B_t)`,
//! 3. the slot's rate accrues,
//! 4. both batteries spend, then harvest, then clamp at capacity.
//!
//! Replications run in parallel on disjoint RNG streams and are reduced in
//! replication order, so results are bit-identical for a given config.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::model::{battery_step, ArrivalModel, BatteryState, ChannelModel, MedianQuantizer, RngStream, StreamRole};
use crate::policies::{cfp_general_wrap, CfpState, CtpState, LatchMode, RxPolicy, TxPolicy};
use crate::{Error, Result, Scalar};

/// Multiplier in front of `log₂(1 + h·P)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Prefactor {
    Half,
    One,
}

impl Prefactor {
    pub fn value(self) -> f64 {
        match self {
            Prefactor::Half => 0.5,
            Prefactor::One => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    TxOnly,
    TxRx,
}

/// Transmitter policy requested by a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TxPolicySpec {
    /// Constant fraction policy; the median-quantized variant is used
    /// automatically for non-Bernoulli arrivals.
    Cfp,
    Greedy,
    /// Common threshold policy; needs unit batteries and a receiver.
    Ctp {
        latch: LatchMode,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RxPolicySpec<T> {
    WhenCharged,
    Threshold {
        gamma: T,
    },
    /// Threshold at `γ* = −ln min{p, q}`.
    Ctp,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReceiverConfig<T> {
    pub arrivals: ArrivalModel<T>,
    pub b_max: T,
    pub policy: RxPolicySpec<T>,
    pub on_cost: T,
}

impl<T: Scalar> ReceiverConfig<T> {
    /// Unit battery, unit on-cost, Bernoulli(q) unit arrivals.
    pub fn unit(q: T, policy: RxPolicySpec<T>) -> Result<Self> {
        let arrivals =
            if q > T::zero() { ArrivalModel::bernoulli(q, T::one())? } else { ArrivalModel::constant(T::zero())? };
        Ok(Self { arrivals, b_max: T::one(), policy, on_cost: T::one() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig<T> {
    pub n_slots: u64,
    pub n_replications: u32,
    pub seed: u64,
    pub warmup_slots: u64,
    pub channel: ChannelModel,
    pub tx_arrivals: ArrivalModel<T>,
    pub b_max: T,
    pub tx_policy: TxPolicySpec,
    pub receiver: Option<ReceiverConfig<T>>,
    /// `None` picks the prefactor matching the analysed formula for the
    /// configuration: `one` for the common threshold policy, `half` otherwise.
    pub rate_prefactor: Option<Prefactor>,
    /// Lags at which FKG correlation terms of the spend sequence are tracked.
    pub fkg_lags: Vec<usize>,
}

pub const DEFAULT_SLOTS: u64 = 1_000_000;
pub const DEFAULT_REPLICATIONS: u32 = 20;

impl<T: Scalar> SimConfig<T> {
    pub fn tx_only(tx_arrivals: ArrivalModel<T>, b_max: T, tx_policy: TxPolicySpec) -> Self {
        Self {
            n_slots: DEFAULT_SLOTS,
            n_replications: DEFAULT_REPLICATIONS,
            seed: 0,
            warmup_slots: DEFAULT_SLOTS / 100,
            channel: ChannelModel::RayleighPowerExp1,
            tx_arrivals,
            b_max,
            tx_policy,
            receiver: None,
            rate_prefactor: None,
            fkg_lags: Vec::new(),
        }
    }

    pub fn tx_rx(tx_arrivals: ArrivalModel<T>, b_max: T, tx_policy: TxPolicySpec, receiver: ReceiverConfig<T>) -> Self {
        Self { receiver: Some(receiver), ..Self::tx_only(tx_arrivals, b_max, tx_policy) }
    }

    /// Sets the slot count and resets warm-up to 1% of it.
    pub fn with_slots(mut self, n_slots: u64) -> Self {
        self.n_slots = n_slots;
        self.warmup_slots = n_slots / 100;
        self
    }

    pub fn with_replications(mut self, n: u32) -> Self {
        self.n_replications = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn mode(&self) -> Mode {
        if self.receiver.is_some() {
            Mode::TxRx
        } else {
            Mode::TxOnly
        }
    }

    pub fn prefactor(&self) -> Prefactor {
        self.rate_prefactor.unwrap_or(match self.tx_policy {
            TxPolicySpec::Ctp { .. } => Prefactor::One,
            _ => Prefactor::Half,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_slots == 0 {
            return Err(Error::InvalidConfig("n_slots must be >= 1".into()));
        }
        if self.warmup_slots >= self.n_slots {
            return Err(Error::InvalidConfig(format!(
                "warmup_slots ({}) must be below n_slots ({})",
                self.warmup_slots, self.n_slots
            )));
        }
        if self.n_replications == 0 {
            return Err(Error::InvalidConfig("n_replications must be >= 1".into()));
        }
        if !(self.b_max > T::zero()) || self.b_max.is_infinite() {
            return Err(Error::InvalidConfig(format!("b_max must be positive and finite, got {}", self.b_max)));
        }
        if let Some(rx) = &self.receiver {
            if !(rx.b_max > T::zero()) || !(rx.on_cost > T::zero()) || rx.on_cost > rx.b_max {
                return Err(Error::InvalidConfig("receiver needs 0 < on_cost <= b_max".into()));
            }
        }
        Plan::build(self).map(|_| ())
    }
}

/// What gets stored in the battery from a raw arrival.
#[derive(Debug, Clone, Copy)]
enum HarvestRule<T> {
    Raw,
    Quantized(MedianQuantizer<T>),
}

impl<T: Scalar> HarvestRule<T> {
    #[inline]
    fn apply(&self, x: T) -> T {
        match self {
            HarvestRule::Raw => x,
            HarvestRule::Quantized(q) => q.quantize(x),
        }
    }
}

/// Validated, ready-to-run form of a [`SimConfig`].
#[derive(Debug, Clone)]
struct Plan<T> {
    tx_policy: TxPolicy<T>,
    harvest: HarvestRule<T>,
    rx_policy: Option<RxPolicy<T>>,
    gamma: Option<T>,
    prefactor: T,
}

fn bernoulli_rate<T: Scalar>(m: &ArrivalModel<T>) -> Option<(T, T)> {
    match *m {
        ArrivalModel::Bernoulli { p, energy } => Some((p, energy)),
        _ => None,
    }
}

impl<T: Scalar> Plan<T> {
    fn build(cfg: &SimConfig<T>) -> Result<Self> {
        let (tx_policy, harvest) = match cfg.tx_policy {
            TxPolicySpec::Cfp => match bernoulli_rate(&cfg.tx_arrivals) {
                Some((p, e)) if p > T::zero() => {
                    (TxPolicy::Cfp(CfpState::for_bernoulli(p, e, cfg.b_max)?), HarvestRule::Raw)
                }
                Some(_) => (TxPolicy::Cfp(CfpState::new(T::one(), T::zero())?), HarvestRule::Raw),
                None if cfg.tx_arrivals.is_degenerate_zero() => {
                    (TxPolicy::Cfp(CfpState::new(T::one(), T::zero())?), HarvestRule::Raw)
                }
                None => {
                    let (q, s) = cfp_general_wrap(&cfg.tx_arrivals, cfg.b_max)?;
                    (TxPolicy::Cfp(s), HarvestRule::Quantized(q))
                }
            },
            TxPolicySpec::Greedy => (TxPolicy::Greedy, HarvestRule::Raw),
            TxPolicySpec::Ctp { latch } => {
                let rx = cfg
                    .receiver
                    .as_ref()
                    .ok_or_else(|| Error::InvalidConfig("common threshold policy needs a receiver".into()))?;
                let unit = |m: &ArrivalModel<T>| match bernoulli_rate(m) {
                    Some((p, e)) if e == T::one() => Some(p),
                    _ => None,
                };
                let (p, q) = match (unit(&cfg.tx_arrivals), unit(&rx.arrivals)) {
                    (Some(p), Some(q)) => (p, q),
                    _ => {
                        return Err(Error::InvalidConfig(
                            "common threshold policy needs unit Bernoulli arrivals at both nodes".into(),
                        ))
                    }
                };
                if cfg.b_max != T::one() || rx.b_max != T::one() || rx.on_cost != T::one() {
                    return Err(Error::InvalidConfig(
                        "common threshold policy needs unit batteries and unit on-cost".into(),
                    ));
                }
                (TxPolicy::Ctp(CtpState::new(p, q, latch)?), HarvestRule::Raw)
            }
        };
        let rx_policy = match &cfg.receiver {
            None => None,
            Some(rx) => Some(match rx.policy {
                RxPolicySpec::WhenCharged => RxPolicy::WhenCharged { on_cost: rx.on_cost },
                RxPolicySpec::Threshold { gamma } => RxPolicy::Threshold { gamma, on_cost: rx.on_cost },
                RxPolicySpec::Ctp => {
                    let gamma = match (&tx_policy, bernoulli_rate(&rx.arrivals)) {
                        (TxPolicy::Ctp(s), _) => s.gamma_star,
                        (_, Some((q, _))) if q > T::zero() => {
                            let p = bernoulli_rate(&cfg.tx_arrivals).map(|(p, _)| p).unwrap_or(T::one());
                            (-p.min(q).ln()).max(T::zero())
                        }
                        _ => {
                            return Err(Error::InvalidConfig(
                                "threshold receiver needs Bernoulli(q > 0) arrivals".into(),
                            ))
                        }
                    };
                    RxPolicy::Threshold { gamma, on_cost: rx.on_cost }
                }
            }),
        };
        let gamma = match (&tx_policy, &rx_policy) {
            (TxPolicy::Ctp(s), _) => Some(s.gamma_star),
            (_, Some(RxPolicy::Threshold { gamma, .. })) => Some(*gamma),
            _ => None,
        };
        Ok(Self { tx_policy, harvest, rx_policy, gamma, prefactor: T::lit(cfg.prefactor().value()) })
    }
}

/// One slot as seen by a trace sink. Battery levels are the ones the
/// policies observed, before spending and harvesting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotRecord<T> {
    pub slot: u64,
    pub h: T,
    pub spend: T,
    pub battery_tx: T,
    pub battery_rx: Option<T>,
    pub rate: f64,
}

pub trait SlotSink<T> {
    fn record(&mut self, rec: &SlotRecord<T>);
}

/// Sink that drops everything.
pub struct NoTrace;

impl<T> SlotSink<T> for NoTrace {
    #[inline(always)]
    fn record(&mut self, _: &SlotRecord<T>) {}
}

impl<T: Copy> SlotSink<T> for Vec<SlotRecord<T>> {
    fn record(&mut self, rec: &SlotRecord<T>) {
        self.push(*rec);
    }
}

/// Streaming estimate of `E[P(t)·P(t+lag)]` and `E[P(t)]`.
#[derive(Debug, Clone)]
pub struct FkgAccumulator {
    lag: usize,
    window: VecDeque<f64>,
    cross: f64,
    pairs: u64,
    sum: f64,
    count: u64,
}

impl FkgAccumulator {
    pub fn new(lag: usize) -> Self {
        Self { lag, window: VecDeque::with_capacity(lag + 1), cross: 0.0, pairs: 0, sum: 0.0, count: 0 }
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.sum += x;
        self.count += 1;
        self.window.push_back(x);
        if self.window.len() > self.lag {
            let old = self.window.pop_front().unwrap();
            self.cross += old * x;
            self.pairs += 1;
        }
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    /// `(lhs, rhs)` with `lhs = mean of P(t)P(t+lag)`, `rhs = (mean of P)²`.
    pub fn terms(&self) -> Option<(f64, f64)> {
        if self.pairs == 0 {
            return None;
        }
        let mean = self.sum / self.count as f64;
        Some((self.cross / self.pairs as f64, mean * mean))
    }
}

/// FKG correlation terms of a stationary spend trace at one lag.
pub fn estimate_fkg_terms<T: Scalar>(trace: &[T], lag: usize) -> Result<(f64, f64)> {
    let needed = (10 * lag).max(2);
    if trace.len() < needed {
        return Err(Error::InsufficientData(format!(
            "trace of {} slots is shorter than {needed} needed for lag {lag}",
            trace.len()
        )));
    }
    let mut acc = FkgAccumulator::new(lag);
    for &x in trace {
        acc.push(x.widen());
    }
    Ok(acc.terms().expect("trace longer than lag"))
}

/// Whether the empirical `E[P²]` of a spend trace stays within
/// `E[E²] + 3σ̂` of the arrival process.
pub fn estimate_energy_second_moment_bound<T: Scalar>(trace: &[T], arrivals: &ArrivalModel<T>) -> bool {
    if trace.is_empty() {
        return true;
    }
    let n = trace.len() as f64;
    let (mut s2, mut s4) = (0.0, 0.0);
    for &x in trace {
        let sq = x.widen() * x.widen();
        s2 += sq;
        s4 += sq * sq;
    }
    let m2 = s2 / n;
    let var = (s4 / n - m2 * m2).max(0.0);
    let se = (var / n).sqrt();
    m2 <= arrivals.second_moment().widen() + 3.0 * se
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FkgEstimate {
    pub lag: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// Standard error of `lhs − rhs` across replications.
    pub diff_std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateExtras {
    pub epoch_count: u64,
    /// Mean slots between consecutive epochs observed after warm-up.
    pub mean_inter_epoch_time: Option<f64>,
    pub inter_epoch_std_err: Option<f64>,
    /// Fraction of slots where the transmitter spends and the receiver is on.
    pub joint_on_fraction: Option<f64>,
    /// Fraction of slots with `h > γ` for threshold policies.
    pub h_above_gamma_fraction: Option<f64>,
    pub h_above_gamma_std_err: Option<f64>,
    pub spend_mean: f64,
    pub spend_second_moment: f64,
    pub spend_second_moment_std_err: f64,
    pub fkg: Vec<FkgEstimate>,
}

/// Long-run throughput estimate in bits per slot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputEstimate {
    pub mean: f64,
    /// Standard error from the spread of replication means; zero for one replication.
    pub std_err: f64,
    /// Slots that entered the averages (after warm-up), summed over replications.
    pub n_effective: u64,
    pub n_replications: u32,
    /// All simulated slots including warm-up.
    pub slots_simulated: u64,
    pub extras: EstimateExtras,
}

#[derive(Debug, Clone, Default)]
struct ReplicationStats {
    counted: u64,
    rate_sum: f64,
    epochs: u64,
    interval_sum: f64,
    interval_sq: f64,
    intervals: u64,
    joint_on: u64,
    h_above: u64,
    spend_sum: f64,
    spend_sq: f64,
    fkg: Vec<(f64, f64)>,
}

fn run_replication<T: Scalar, S: SlotSink<T>>(
    cfg: &SimConfig<T>,
    plan: &Plan<T>,
    replication: u64,
    sink: &mut S,
) -> Result<ReplicationStats> {
    let mut ch = RngStream::for_replication(cfg.seed, replication, StreamRole::Channel);
    let mut tx_rng = RngStream::for_replication(cfg.seed, replication, StreamRole::TxArrivals);
    let mut rx_rng = RngStream::for_replication(cfg.seed, replication, StreamRole::RxArrivals);
    let mut coins = RngStream::for_replication(cfg.seed, replication, StreamRole::PolicyCoins);

    let mut tx_policy = plan.tx_policy.clone();
    let mut tx_bat = BatteryState::empty(cfg.b_max)?;
    let rx = cfg.receiver.as_ref().zip(plan.rx_policy);
    let mut rx_bat = match rx {
        Some((r, _)) => Some(BatteryState::empty(r.b_max)?),
        None => None,
    };

    let mut stats = ReplicationStats::default();
    let mut fkg: Vec<FkgAccumulator> = cfg.fkg_lags.iter().map(|&l| FkgAccumulator::new(l)).collect();
    let mut last_epoch: Option<u64> = None;
    let pref = plan.prefactor;

    let violation = |e: Error, node: &str, slot: u64| match e {
        Error::NeutralityViolation { spend, level, .. } => Error::NeutralityViolation {
            spend,
            level,
            context: format!(" ({node}, replication {replication}, slot {slot})"),
        },
        other => other,
    };

    for t in 0..cfg.n_slots {
        let h: T = cfg.channel.sample(&mut ch);
        let spend = tx_policy.decide(h, &tx_bat, &mut coins);
        let rx_on = match (rx, &rx_bat) {
            (Some((_, policy)), Some(b)) => policy.decide(h, b),
            _ => true,
        };
        let transmitting = spend > T::zero();
        let rate = if transmitting && rx_on { pref.widen() * (T::one() + h * spend).log2().widen() } else { 0.0 };
        let observed_tx = tx_bat.level;
        let observed_rx = rx_bat.map(|b| b.level);

        let stored = plan.harvest.apply(cfg.tx_arrivals.sample(&mut tx_rng));
        tx_bat = battery_step(tx_bat, spend, stored).map_err(|e| violation(e, "transmitter", t))?;
        tx_policy.on_harvest(stored);
        if let (Some((r, policy)), Some(b)) = (rx, rx_bat.as_mut()) {
            let cost = if rx_on { policy.on_cost() } else { T::zero() };
            let harvest = r.arrivals.sample(&mut rx_rng);
            *b = battery_step(*b, cost, harvest).map_err(|e| violation(e, "receiver", t))?;
        }

        sink.record(&SlotRecord { slot: t, h, spend, battery_tx: observed_tx, battery_rx: observed_rx, rate });

        if t < cfg.warmup_slots {
            continue;
        }
        stats.counted += 1;
        stats.rate_sum += rate;
        let s = spend.widen();
        stats.spend_sum += s;
        stats.spend_sq += s * s;
        for acc in &mut fkg {
            acc.push(s);
        }
        if transmitting && rx_on && rx.is_some() {
            stats.joint_on += 1;
        }
        if let Some(g) = plan.gamma {
            if h > g {
                stats.h_above += 1;
            }
        }
        if stored > T::zero() {
            stats.epochs += 1;
            if let Some(prev) = last_epoch {
                let gap = (t - prev) as f64;
                stats.interval_sum += gap;
                stats.interval_sq += gap * gap;
                stats.intervals += 1;
            }
            last_epoch = Some(t);
        }
    }
    stats.fkg = fkg.iter().map(|a| a.terms().unwrap_or((0.0, 0.0))).collect();
    Ok(stats)
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn reduce<T: Scalar>(cfg: &SimConfig<T>, plan: &Plan<T>, reps: &[ReplicationStats]) -> ThroughputEstimate {
    let per = |f: &dyn Fn(&ReplicationStats) -> f64| -> Vec<f64> { reps.iter().map(f).collect() };
    let (mean, std_err) = mean_and_se(&per(&|r| r.rate_sum / r.counted as f64));
    let (spend_mean, _) = mean_and_se(&per(&|r| r.spend_sum / r.counted as f64));
    let (m2, m2_se) = mean_and_se(&per(&|r| r.spend_sq / r.counted as f64));

    let intervals: u64 = reps.iter().map(|r| r.intervals).sum();
    let (mean_gap, gap_se) = if intervals > 0 {
        let n = intervals as f64;
        let s: f64 = reps.iter().map(|r| r.interval_sum).sum();
        let s2: f64 = reps.iter().map(|r| r.interval_sq).sum();
        let m = s / n;
        let var = if intervals > 1 { ((s2 - n * m * m) / (n - 1.0)).max(0.0) } else { 0.0 };
        (Some(m), Some((var / n).sqrt()))
    } else {
        (None, None)
    };

    let counted: u64 = reps.iter().map(|r| r.counted).sum();
    let joint_on_fraction =
        cfg.receiver.as_ref().map(|_| reps.iter().map(|r| r.joint_on).sum::<u64>() as f64 / counted as f64);
    let (h_frac, h_se) = match plan.gamma {
        Some(_) => {
            let (m, se) = mean_and_se(&per(&|r| r.h_above as f64 / r.counted as f64));
            (Some(m), Some(se))
        }
        None => (None, None),
    };

    let fkg = cfg
        .fkg_lags
        .iter()
        .enumerate()
        .map(|(i, &lag)| {
            let (lhs, _) = mean_and_se(&per(&|r| r.fkg[i].0));
            let (rhs, _) = mean_and_se(&per(&|r| r.fkg[i].1));
            let (_, diff_se) = mean_and_se(&per(&|r| r.fkg[i].0 - r.fkg[i].1));
            FkgEstimate { lag, lhs, rhs, diff_std_err: diff_se }
        })
        .collect();

    ThroughputEstimate {
        mean,
        std_err,
        n_effective: counted,
        n_replications: cfg.n_replications,
        slots_simulated: cfg.n_slots * cfg.n_replications as u64,
        extras: EstimateExtras {
            epoch_count: reps.iter().map(|r| r.epochs).sum(),
            mean_inter_epoch_time: mean_gap,
            inter_epoch_std_err: gap_se,
            joint_on_fraction,
            h_above_gamma_fraction: h_frac,
            h_above_gamma_std_err: h_se,
            spend_mean,
            spend_second_moment: m2,
            spend_second_moment_std_err: m2_se,
            fkg,
        },
    }
}

/// Runs every replication of `cfg`, in parallel across replications.
pub fn simulate<T: Scalar>(cfg: &SimConfig<T>) -> Result<ThroughputEstimate> {
    simulate_with_trace(cfg, &mut NoTrace)
}

/// Like [`simulate`], additionally feeding every slot of replication 0 to `sink`.
pub fn simulate_with_trace<T: Scalar, S: SlotSink<T>>(cfg: &SimConfig<T>, sink: &mut S) -> Result<ThroughputEstimate> {
    cfg.validate()?;
    let plan = Plan::build(cfg)?;
    let first = run_replication(cfg, &plan, 0, sink)?;
    let rest: Vec<ReplicationStats> = (1..cfg.n_replications as u64)
        .into_par_iter()
        .map(|r| run_replication(cfg, &plan, r, &mut NoTrace))
        .collect::<Result<_>>()?;
    let mut reps = Vec::with_capacity(cfg.n_replications as usize);
    reps.push(first);
    reps.extend(rest);
    Ok(reduce(cfg, &plan, &reps))
}

/// Transmitter-only run; rejects configurations with a receiver.
pub fn run_tx_only<T: Scalar>(cfg: &SimConfig<T>) -> Result<ThroughputEstimate> {
    if cfg.mode() != Mode::TxOnly {
        return Err(Error::InvalidConfig("run_tx_only called with a receiver configured".into()));
    }
    simulate(cfg)
}

/// Joint transmitter/receiver run; requires a receiver.
pub fn run_tx_rx<T: Scalar>(cfg: &SimConfig<T>) -> Result<ThroughputEstimate> {
    if cfg.mode() != Mode::TxRx {
        return Err(Error::InvalidConfig("run_tx_rx needs a receiver configuration".into()));
    }
    simulate(cfg)
}
