//! Per-slot decision rules for the transmitter and the receiver.

use serde::Serialize;

use crate::model::{ArrivalModel, BatteryState, MedianQuantizer, RngStream};
use crate::{Error, Result, Scalar};

/// Constant fraction policy: `j` slots after the last epoch, spend
/// `p(1−p)^j · B` regardless of the channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CfpState<T> {
    pub j: u64,
    pub effective_b_max: T,
    pub p_eff: T,
}

impl<T: Scalar> CfpState<T> {
    pub fn new(p_eff: T, effective_b_max: T) -> Result<Self> {
        if !(p_eff > T::zero() && p_eff <= T::one()) {
            return Err(Error::domain(format!("CFP arrival probability must lie in (0, 1], got {p_eff}")));
        }
        if !(effective_b_max >= T::zero()) {
            return Err(Error::domain(format!("CFP battery size must be >= 0, got {effective_b_max}")));
        }
        Ok(Self { j: 0, effective_b_max, p_eff })
    }

    /// CFP for Bernoulli(p, E) arrivals into a battery of size `b_max`.
    pub fn for_bernoulli(p: T, energy: T, b_max: T) -> Result<Self> {
        Self::new(p, cfp_bmax_ge_e_adapter(energy, b_max))
    }

    /// Scheduled spend for the current `j`, before the feasibility clamp.
    #[inline]
    pub fn scheduled(&self) -> T {
        let j = self.j.min(i32::MAX as u64) as i32;
        self.p_eff * (T::one() - self.p_eff).powi(j) * self.effective_b_max
    }

    /// Advances the epoch counter after the slot's harvest: a nonzero stored
    /// amount starts a new epoch.
    #[inline]
    pub fn on_harvest(&mut self, stored: T) {
        if stored > T::zero() {
            self.j = 0;
        } else {
            self.j = self.j.saturating_add(1);
        }
    }
}

#[inline]
pub fn cfp_decide<T: Scalar>(state: &CfpState<T>, battery: &BatteryState<T>) -> T {
    state.scheduled().min(battery.level)
}

/// CFP run as if arrivals were Bernoulli(1/2, δ) with δ the median quantum.
/// Returns the quantization rule together with the policy state.
pub fn cfp_general_wrap<T: Scalar>(arrivals: &ArrivalModel<T>, b_max: T) -> Result<(MedianQuantizer<T>, CfpState<T>)> {
    let q = MedianQuantizer::for_model(arrivals);
    if !(q.delta > T::zero()) {
        return Err(Error::DegenerateMedian);
    }
    if q.delta > b_max {
        return Err(Error::UnsupportedRegime(format!("median quantum {} exceeds battery size {b_max}", q.delta)));
    }
    Ok((q, CfpState::new(T::lit(0.5), q.delta)?))
}

/// Battery size the CFP schedule is built for. A battery larger than the
/// arrival size is treated as if it held exactly one arrival; an arrival
/// larger than the battery is clipped by it.
pub fn cfp_bmax_ge_e_adapter<T: Scalar>(energy: T, b_max: T) -> T {
    energy.min(b_max)
}

/// On iff the receiver holds at least `on_cost` and `h > gamma`.
#[inline]
pub fn threshold_receiver_decide<T: Scalar>(battery: &BatteryState<T>, h: T, gamma: T, on_cost: T) -> bool {
    battery.level >= on_cost && h > gamma
}

/// When a closed CTP gate gets re-armed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LatchMode {
    /// Gate opens once on the first `X1 = 1` and stays open.
    #[default]
    Once,
    /// Gate closes after every transmission and waits for a fresh `X1 = 1`.
    PerTransmission,
}

/// Transmitter half of the common threshold policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CtpState<T> {
    pub gate_open: bool,
    pub gamma_star: T,
    pub coin_prob: T,
    pub latch: LatchMode,
}

impl<T: Scalar> CtpState<T> {
    /// `γ* = −ln min{p, q}`; the coin `X1` is Bernoulli(q).
    pub fn new(p: T, q: T, latch: LatchMode) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q)] {
            if !(v > T::zero() && v <= T::one()) {
                return Err(Error::domain(format!("CTP needs {name} in (0, 1], got {v}")));
            }
        }
        Ok(Self { gate_open: false, gamma_star: (-p.min(q).ln()).max(T::zero()), coin_prob: q, latch })
    }
}

/// Binary-power CTP transmitter. While the gate is closed one coin `X1` is
/// drawn per slot; the slot in which `X1 = 1` already counts as open.
#[inline]
pub fn ctp_tx_decide<T: Scalar>(state: &mut CtpState<T>, battery: &BatteryState<T>, h: T, rng: &mut RngStream) -> T {
    if !state.gate_open {
        if rng.bernoulli(state.coin_prob.widen()) {
            state.gate_open = true;
        } else {
            return T::zero();
        }
    }
    if battery.level >= T::one() && h > state.gamma_star {
        if state.latch == LatchMode::PerTransmission {
            state.gate_open = false;
        }
        T::one()
    } else {
        T::zero()
    }
}

/// Transmitter rule selected for a run.
#[derive(Debug, Clone, PartialEq)]
pub enum TxPolicy<T> {
    Cfp(CfpState<T>),
    Ctp(CtpState<T>),
    /// Baseline: empty the battery every slot.
    Greedy,
}

impl<T: Scalar> TxPolicy<T> {
    #[inline]
    pub fn decide(&mut self, h: T, battery: &BatteryState<T>, coins: &mut RngStream) -> T {
        match self {
            TxPolicy::Cfp(s) => cfp_decide(s, battery),
            TxPolicy::Ctp(s) => ctp_tx_decide(s, battery, h, coins),
            TxPolicy::Greedy => battery.level,
        }
    }

    #[inline]
    pub fn on_harvest(&mut self, stored: T) {
        if let TxPolicy::Cfp(s) = self {
            s.on_harvest(stored);
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TxPolicy::Cfp(_) => "cfp",
            TxPolicy::Ctp(_) => "ctp",
            TxPolicy::Greedy => "greedy",
        }
    }
}

/// Receiver rule selected for a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RxPolicy<T> {
    /// On whenever it holds enough energy.
    WhenCharged { on_cost: T },
    /// On when charged and `h > gamma`.
    Threshold { gamma: T, on_cost: T },
}

impl<T: Scalar> RxPolicy<T> {
    #[inline]
    pub fn decide(&self, h: T, battery: &BatteryState<T>) -> bool {
        match *self {
            RxPolicy::WhenCharged { on_cost } => battery.level >= on_cost,
            RxPolicy::Threshold { gamma, on_cost } => threshold_receiver_decide(battery, h, gamma, on_cost),
        }
    }

    pub fn on_cost(&self) -> T {
        match *self {
            RxPolicy::WhenCharged { on_cost } | RxPolicy::Threshold { on_cost, .. } => on_cost,
        }
    }
}
