//! Arrival processes, the fading channel, finite batteries and RNG streams.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::{Error, Result, Scalar};

// Tolerance for comparing cumulative probabilities against 1/2.
const CDF_SLACK: f64 = 1e-12;

/// Per-slot harvested energy, i.i.d. across slots.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ArrivalModel<T> {
    /// `energy` with probability `p`, otherwise nothing.
    Bernoulli { p: T, energy: T },
    /// Continuous uniform on `[lo, hi]`.
    Uniform { lo: T, hi: T },
    /// Finite support, values sorted ascending.
    Discrete { values: Vec<T>, probs: Vec<T> },
}

impl<T: Scalar> ArrivalModel<T> {
    pub fn bernoulli(p: T, energy: T) -> Result<Self> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::invalid_model(format!("bernoulli p must lie in [0, 1], got {p}")));
        }
        if !(energy > T::zero()) || energy.is_infinite() {
            return Err(Error::invalid_model(format!("bernoulli energy must be positive, got {energy}")));
        }
        Ok(ArrivalModel::Bernoulli { p, energy })
    }

    pub fn uniform(lo: T, hi: T) -> Result<Self> {
        if !(lo >= T::zero()) || !(lo < hi) || hi.is_infinite() {
            return Err(Error::invalid_model(format!("uniform needs 0 <= lo < hi, got [{lo}, {hi}]")));
        }
        Ok(ArrivalModel::Uniform { lo, hi })
    }

    /// Builds a discrete model; atoms are sorted and duplicate values merged.
    pub fn discrete(values: Vec<T>, probs: Vec<T>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::invalid_model("discrete model needs matching, non-empty value and probability lists"));
        }
        let mut atoms: Vec<(T, T)> = values.into_iter().zip(probs).collect();
        let mut total = T::zero();
        for &(v, p) in &atoms {
            if !(v >= T::zero()) || v.is_infinite() {
                return Err(Error::invalid_model(format!("arrival energies must be finite and >= 0, got {v}")));
            }
            if !(p >= T::zero() && p <= T::one()) {
                return Err(Error::invalid_model(format!("probabilities must lie in [0, 1], got {p}")));
            }
            total = total + p;
        }
        if (total - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::invalid_model(format!("probabilities sum to {total}, not 1")));
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(T, T)> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 = last.1 + p,
                _ => merged.push((v, p)),
            }
        }
        let (values, probs) = merged.into_iter().unzip();
        Ok(ArrivalModel::Discrete { values, probs })
    }

    /// Arrivals that are always exactly `value`.
    pub fn constant(value: T) -> Result<Self> {
        Self::discrete(vec![value], vec![T::one()])
    }

    pub fn mean(&self) -> T {
        match self {
            ArrivalModel::Bernoulli { p, energy } => *p * *energy,
            ArrivalModel::Uniform { lo, hi } => (*lo + *hi) * T::lit(0.5),
            ArrivalModel::Discrete { values, probs } => {
                values.iter().zip(probs).fold(T::zero(), |acc, (&v, &p)| acc + v * p)
            }
        }
    }

    /// Closed-form `E[X²]`.
    pub fn second_moment(&self) -> T {
        match self {
            ArrivalModel::Bernoulli { p, energy } => *p * *energy * *energy,
            ArrivalModel::Uniform { lo, hi } => (*lo * *lo + *lo * *hi + *hi * *hi) / T::lit(3.0),
            ArrivalModel::Discrete { values, probs } => {
                values.iter().zip(probs).fold(T::zero(), |acc, (&v, &p)| acc + v * v * p)
            }
        }
    }

    pub fn cdf(&self, x: T) -> T {
        match self {
            ArrivalModel::Bernoulli { p, energy } => {
                if x < T::zero() {
                    T::zero()
                } else if x < *energy {
                    T::one() - *p
                } else {
                    T::one()
                }
            }
            ArrivalModel::Uniform { lo, hi } => {
                if x <= *lo {
                    T::zero()
                } else if x >= *hi {
                    T::one()
                } else {
                    (x - *lo) / (*hi - *lo)
                }
            }
            ArrivalModel::Discrete { values, probs } => values
                .iter()
                .zip(probs)
                .take_while(|(&v, _)| v <= x)
                .fold(T::zero(), |acc, (_, &p)| acc + p)
                .min(T::one()),
        }
    }

    /// Probability mass sitting exactly at `x`.
    pub fn atom(&self, x: T) -> T {
        match self {
            ArrivalModel::Bernoulli { p, energy } => {
                if x == *energy {
                    *p
                } else if x == T::zero() {
                    T::one() - *p
                } else {
                    T::zero()
                }
            }
            ArrivalModel::Uniform { .. } => T::zero(),
            ArrivalModel::Discrete { values, probs } => {
                values.iter().position(|&v| v == x).map(|i| probs[i]).unwrap_or_else(T::zero)
            }
        }
    }

    /// Median quantum `δ = inf{x : F(x) > 1/2}`.
    ///
    /// For continuous models this is the ordinary median. When the CDF sits
    /// exactly at 1/2 on a flat stretch (e.g. Bernoulli with `p = 1/2`) the
    /// upper end of that stretch is returned, so `δ` is the atom that carries
    /// the upper half of the mass.
    pub fn median(&self) -> T {
        let half = T::lit(0.5) + T::lit(CDF_SLACK);
        match self {
            ArrivalModel::Bernoulli { p, energy } => {
                if T::one() - *p > half {
                    T::zero()
                } else {
                    *energy
                }
            }
            ArrivalModel::Uniform { lo, hi } => *lo + (*hi - *lo) * T::lit(0.5),
            ArrivalModel::Discrete { values, probs } => {
                let mut cum = T::zero();
                for (&v, &p) in values.iter().zip(probs) {
                    cum = cum + p;
                    if cum > half {
                        return v;
                    }
                }
                *values.last().unwrap()
            }
        }
    }

    pub fn is_degenerate_zero(&self) -> bool {
        self.second_moment() == T::zero()
    }

    /// One draw, using a single uniform variate from `rng`.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> T {
        let u: f64 = rng.random();
        match self {
            ArrivalModel::Bernoulli { p, energy } => {
                if u < p.widen() {
                    *energy
                } else {
                    T::zero()
                }
            }
            ArrivalModel::Uniform { lo, hi } => *lo + (*hi - *lo) * T::lit(u),
            ArrivalModel::Discrete { values, probs } => {
                let mut cum = 0.0;
                for (&v, &p) in values.iter().zip(probs) {
                    cum += p.widen();
                    if u < cum {
                        return v;
                    }
                }
                *values.last().unwrap()
            }
        }
    }
}

/// Reduction of an arbitrary arrival process to Bernoulli(1/2, δ): a slot
/// stores `δ` when the arrival strictly exceeds `δ`, and nothing otherwise.
///
/// If the strict rule would leave less than half of the mass above `δ`
/// (an atom sits at `δ`), arrivals equal to `δ` are stored as well so the
/// storage probability never drops below 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MedianQuantizer<T> {
    pub delta: T,
    pub include_atom: bool,
}

impl<T: Scalar> MedianQuantizer<T> {
    pub fn for_model(model: &ArrivalModel<T>) -> Self {
        let delta = model.median();
        let above = T::one() - model.cdf(delta);
        let include_atom = above < T::lit(0.5) - T::lit(CDF_SLACK);
        Self { delta, include_atom }
    }

    #[inline]
    pub fn quantize(&self, x: T) -> T {
        if x > self.delta || (self.include_atom && x == self.delta) {
            self.delta
        } else {
            T::zero()
        }
    }

    /// Probability that a slot stores `δ` under `model`.
    pub fn storage_probability(&self, model: &ArrivalModel<T>) -> T {
        let above = T::one() - model.cdf(self.delta);
        if self.include_atom {
            above + model.atom(self.delta)
        } else {
            above
        }
    }
}

/// Fading power gain per slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum ChannelModel {
    /// Rayleigh amplitude: `h ~ Exp(1)`, so `E[h] = 1`, `E[h²] = 2`.
    #[default]
    RayleighPowerExp1,
}

impl ChannelModel {
    pub fn mean(&self) -> f64 {
        1.0
    }

    pub fn second_moment(&self) -> f64 {
        2.0
    }

    #[inline]
    pub fn sample<T: Scalar, R: RngCore + ?Sized>(&self, rng: &mut R) -> T {
        match self {
            ChannelModel::RayleighPowerExp1 => {
                let h: f64 = rng.sample(Exp1);
                T::lit(h)
            }
        }
    }
}

/// Stored energy of one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatteryState<T> {
    pub level: T,
    pub capacity: T,
}

impl<T: Scalar> BatteryState<T> {
    pub fn new(capacity: T, level: T) -> Result<Self> {
        if !(capacity >= T::zero()) || capacity.is_infinite() {
            return Err(Error::invalid_model(format!("battery capacity must be finite and >= 0, got {capacity}")));
        }
        if !(level >= T::zero() && level <= capacity) {
            return Err(Error::invalid_model(format!("battery level {level} outside [0, {capacity}]")));
        }
        Ok(Self { level, capacity })
    }

    pub fn empty(capacity: T) -> Result<Self> {
        Self::new(capacity, T::zero())
    }

    pub fn is_full(&self) -> bool {
        self.level >= self.capacity
    }
}

/// One slot of battery dynamics: spend, then harvest, then clamp at capacity.
/// Energy beyond capacity is lost.
#[inline]
pub fn battery_step<T: Scalar>(b: BatteryState<T>, spend: T, harvest: T) -> Result<BatteryState<T>> {
    if !(spend >= T::zero()) || spend > b.level {
        return Err(Error::NeutralityViolation {
            spend: spend.widen(),
            level: b.level.widen(),
            context: String::new(),
        });
    }
    let level = (b.level - spend + harvest.max(T::zero())).min(b.capacity);
    Ok(BatteryState { level, capacity: b.capacity })
}

/// Roles that get their own RNG stream within a replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamRole {
    Channel = 0,
    TxArrivals = 1,
    RxArrivals = 2,
    PolicyCoins = 3,
}

const ROLES_PER_REPLICATION: u64 = 4;

/// Seeded ChaCha8 stream. Equal `(seed, stream_id)` pairs reproduce the
/// same sequence bit for bit.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn for_replication(seed: u64, replication: u64, role: StreamRole) -> Self {
        Self::new(seed, replication * ROLES_PER_REPLICATION + role as u64)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        let u: f64 = self.rng.random();
        u < p
    }
}

impl RngCore for RngStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::RngCore;

    #[test]
    fn model_validation() {
        assert!(ArrivalModel::bernoulli(1.5, 1.0).is_err());
        assert!(ArrivalModel::bernoulli(0.5, 0.0).is_err());
        assert!(ArrivalModel::uniform(3.0, 3.0).is_err());
        assert!(ArrivalModel::uniform(-1.0, 3.0).is_err());
        assert!(ArrivalModel::discrete(vec![1.0, 2.0], vec![0.5, 0.6]).is_err());
        assert!(ArrivalModel::discrete(vec![1.0], vec![]).is_err());
        assert!(ArrivalModel::discrete(vec![-1.0], vec![1.0]).is_err());
    }

    #[test]
    fn discrete_atoms_sorted_and_merged() {
        let m = ArrivalModel::discrete(vec![3.0, 1.0, 3.0], vec![0.25, 0.5, 0.25]).unwrap();
        assert_eq!(m, ArrivalModel::Discrete { values: vec![1.0, 3.0], probs: vec![0.5, 0.5] });
    }

    #[test]
    fn second_moments() {
        let b = 10.0;
        assert_eq!(ArrivalModel::bernoulli(0.3, b).unwrap().second_moment(), 0.3 * b * b);
        assert_relative_eq!(ArrivalModel::uniform(0.0, b).unwrap().second_moment(), b * b / 3.0, max_relative = 1e-15);
        assert_eq!(ArrivalModel::constant(0.0).unwrap().second_moment(), 0.0);
        assert!(ArrivalModel::constant(0.0).unwrap().is_degenerate_zero());
    }

    #[test]
    fn medians() {
        assert_eq!(ArrivalModel::uniform(0.0, 10.0).unwrap().median(), 5.0);
        let bern = ArrivalModel::bernoulli(0.5, 7.0).unwrap();
        assert_eq!(bern.median(), 7.0);
        // P(X >= δ) = 1/2 at the returned atom.
        assert_eq!(1.0 - bern.cdf(7.0) + bern.atom(7.0), 0.5);
        assert_eq!(ArrivalModel::bernoulli(0.3, 7.0).unwrap().median(), 0.0);
        let third = 1.0 / 3.0;
        let d = ArrivalModel::discrete(vec![1.0, 2.0, 3.0], vec![third, third, third]).unwrap();
        assert_eq!(d.median(), 2.0);
        assert_eq!(ArrivalModel::constant(4.0).unwrap().median(), 4.0);
    }

    #[test]
    fn quantizer_storage_probability_at_least_half() {
        let third = 1.0 / 3.0;
        let cases = [
            ArrivalModel::uniform(0.0, 10.0).unwrap(),
            ArrivalModel::bernoulli(0.5, 10.0).unwrap(),
            ArrivalModel::bernoulli(0.8, 10.0).unwrap(),
            ArrivalModel::constant(3.0).unwrap(),
            ArrivalModel::discrete(vec![1.0, 2.0, 3.0], vec![third, third, third]).unwrap(),
        ];
        for m in &cases {
            let q = MedianQuantizer::for_model(m);
            assert!(q.storage_probability(m) >= 0.5 - 1e-12, "{m:?}");
        }
        let u = MedianQuantizer::for_model(&cases[0]);
        assert!(!u.include_atom);
        assert_eq!(u.quantize(5.0), 0.0);
        assert_eq!(u.quantize(5.1), 5.0);
        let c = MedianQuantizer::for_model(&cases[3]);
        assert!(c.include_atom);
        assert_eq!(c.quantize(3.0), 3.0);
    }

    #[test]
    fn constant_arrivals_empirical_storage_rate() {
        let m = ArrivalModel::constant(2.0).unwrap();
        let q = MedianQuantizer::for_model(&m);
        let mut rng = RngStream::new(11, 0);
        let stored = (0..1_000_000).filter(|_| q.quantize(m.sample(&mut rng)) > 0.0).count();
        assert!(stored as f64 / 1e6 >= 0.5);
    }

    #[test]
    fn bernoulli_degenerate_sampling() {
        let m = ArrivalModel::bernoulli(1.0, 5.0).unwrap();
        let mut rng = RngStream::new(1, 0);
        assert!((0..1000).all(|_| m.sample(&mut rng) == 5.0));
    }

    #[test]
    fn bernoulli_sample_mean_within_ci() {
        let m = ArrivalModel::bernoulli(0.5, 10.0).unwrap();
        let mut rng = RngStream::new(2, 0);
        let n = 1_000_000;
        let mean: f64 = (0..n).map(|_| m.sample(&mut rng)).sum::<f64>() / n as f64;
        let sigma = 10.0 * (0.25f64 / n as f64).sqrt();
        assert!((mean - 5.0).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn uniform_sample_second_moment_within_ci() {
        let m = ArrivalModel::uniform(0.0, 10.0).unwrap();
        let mut rng = RngStream::new(3, 0);
        let n = 1_000_000;
        let m2: f64 = (0..n).map(|_| m.sample(&mut rng)).map(|x: f64| x * x).sum::<f64>() / n as f64;
        // Var[X²] = E[X⁴] - E[X²]² = 10⁴/5 - (100/3)².
        let sigma = ((1e4 / 5.0 - (100.0f64 / 3.0).powi(2)) / n as f64).sqrt();
        assert!((m2 - 100.0 / 3.0).abs() < 3.0 * sigma, "m2 {m2}");
    }

    #[test]
    fn channel_moments_within_ci() {
        let mut rng = RngStream::new(4, 0);
        let n = 1_000_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let h: f64 = ChannelModel::RayleighPowerExp1.sample(&mut rng);
            assert!(h >= 0.0);
            s1 += h;
            s2 += h * h;
        }
        let n = n as f64;
        // Var[h] = 1, Var[h²] = E[h⁴] - 4 = 20.
        assert!((s1 / n - 1.0).abs() < 3.0 / n.sqrt());
        assert!((s2 / n - 2.0).abs() < 3.0 * (20.0 / n).sqrt());
    }

    fn ks_statistic(model: &ArrivalModel<f64>, seed: u64) -> f64 {
        let mut rng = RngStream::new(seed, 9);
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n).map(|_| model.sample(&mut rng)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d: f64 = 0.0;
        let mut i = 0;
        while i < n {
            let x = xs[i];
            let mut j = i;
            while j < n && xs[j] == x {
                j += 1;
            }
            let f = model.cdf(x);
            let f_left = f - model.atom(x);
            d = d.max((j as f64 / n as f64 - f).abs()).max((i as f64 / n as f64 - f_left).abs());
            i = j;
        }
        d
    }

    #[test]
    fn empirical_cdf_kolmogorov_smirnov() {
        // Critical value at α = 0.001: 1.949/√n.
        let crit = 1.949 / (100_000f64).sqrt();
        for (seed, m) in [
            ArrivalModel::uniform(0.0, 10.0).unwrap(),
            ArrivalModel::uniform(2.0, 3.0).unwrap(),
            ArrivalModel::bernoulli(0.3, 4.0).unwrap(),
            ArrivalModel::discrete(vec![0.0, 1.0, 5.0], vec![0.2, 0.5, 0.3]).unwrap(),
        ]
        .iter()
        .enumerate()
        {
            let d = ks_statistic(m, seed as u64 + 100);
            assert!(d < crit, "{m:?}: D = {d}");
        }
    }

    #[test]
    fn battery_step_examples() {
        let b = BatteryState::new(1.0, 1.0).unwrap();
        assert_eq!(battery_step(b, 1.0, 1.0).unwrap().level, 1.0);
        let b = BatteryState::new(10.0, 10.0).unwrap();
        assert_eq!(battery_step(b, 2.5, 0.0).unwrap().level, 7.5);
        let b = BatteryState::new(10.0, 5.0).unwrap();
        assert_eq!(battery_step(b, 0.0, 9.0).unwrap().level, 10.0);
        assert!(matches!(battery_step(b, 5.5, 0.0), Err(Error::NeutralityViolation { .. })));
        assert!(battery_step(b, -1.0, 0.0).is_err());
        assert!(BatteryState::new(1.0, 2.0).is_err());
    }

    #[test]
    fn rng_streams_reproduce_and_differ() {
        let mut a = RngStream::for_replication(42, 3, StreamRole::Channel);
        let mut b = RngStream::for_replication(42, 3, StreamRole::Channel);
        let mut c = RngStream::for_replication(42, 3, StreamRole::TxArrivals);
        let xa: Vec<u64> = (0..64).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..64).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..64).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        assert_eq!(a.seed(), 42);
        assert_eq!(a.stream_id(), 12);
    }

    proptest! {
        #[test]
        fn battery_level_stays_in_range(
            cap in 0.0f64..100.0,
            ops in proptest::collection::vec((0.0f64..1.0, 0.0f64..50.0), 1..200)
        ) {
            let mut b = BatteryState::empty(cap).unwrap();
            for (frac, harvest) in ops {
                b = battery_step(b, b.level * frac, harvest).unwrap();
                prop_assert!(b.level >= 0.0 && b.level <= cap);
            }
        }

        #[test]
        fn quantizer_output_is_zero_or_delta(x in 0.0f64..20.0, hi in 0.5f64..20.0) {
            let m = ArrivalModel::uniform(0.0, hi).unwrap();
            let q = MedianQuantizer::for_model(&m);
            let y = q.quantize(x);
            prop_assert!(y == 0.0 || y == q.delta);
        }
    }
}
