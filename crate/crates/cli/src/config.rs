//! Flat `key = value` configuration with command-line overrides.
//!
//! A config file holds one `key = value` pair per line; blank lines and lines
//! starting with `#` are ignored. Flags given on the command line replace the
//! file's value for the same key. [`KEYS`] lists every accepted key.

use std::collections::BTreeMap;
use std::path::Path;

use ehfade::policies::LatchMode;
use ehfade::sim::{Mode, Prefactor, RxPolicySpec, DEFAULT_REPLICATIONS, DEFAULT_SLOTS};
use ehfade::ArrivalModel;

use crate::error::{CliError, CliResult};

/// Seed used when neither the file nor the flags set one.
pub const DEFAULT_SEED: u64 = 1;

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("mode", "tx (transmitter-only, default) or tx_rx (both nodes harvest)"),
    ("arrivals", "transmitter arrivals: bernoulli:p=P,e=E | uniform:LO,HI | discrete:V:P,V:P,... | constant:V"),
    ("b_max", "transmitter battery size; defaults to the largest possible arrival"),
    ("p", "transmitter arrival probability (tx_rx mode, or tx mode without `arrivals`)"),
    ("q", "receiver arrival probability (tx_rx mode)"),
    ("c", "capacity constant of the median-quantized lower bound (default 0, flagged optimistic)"),
    ("policy", "transmitter policy: cfp | greedy | ctp"),
    ("rx_policy", "receiver policy: when_charged | ctp | threshold:GAMMA"),
    ("latch", "common threshold gate: once (default) | per_transmission"),
    ("seed", "master RNG seed"),
    ("slots", "slots per replication"),
    ("reps", "number of replications"),
    ("warmup", "slots discarded at the start of each replication (default 1% of slots)"),
    ("prefactor", "rate prefactor: half | one (default one for ctp, half otherwise)"),
    ("fkg_lags", "comma-separated lags at which spend correlations are tracked"),
    ("grid.kind", "sweep arrival kinds: comma list of bernoulli, ctp, uniform"),
    ("grid.p", "sweep values of p: comma list or START:STOP:STEP"),
    ("grid.q", "sweep values of q: comma list or START:STOP:STEP"),
    ("grid.b_max", "sweep values of b_max: comma list or START:STOP:STEP"),
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Config {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = Config::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected `key = value`, got `{line}`", n + 1)))?;
            cfg.set(k.trim(), v.trim()).map_err(|e| bad(format!("line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(bad(format!("unknown key `{key}`")));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies `other` on top of `self`; keys in `other` win.
    pub fn overlay(&mut self, other: &Config) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    /// Renders the config back into file form, keys sorted.
    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    fn typed<V>(&self, key: &str, parse: impl Fn(&str) -> Option<V>) -> CliResult<Option<V>> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => parse(s).map(Some).ok_or_else(|| bad(format!("`{key}`: cannot parse `{s}`"))),
        }
    }

    pub fn f64(&self, key: &str) -> CliResult<Option<f64>> {
        self.typed(key, |s| s.parse::<f64>().ok().filter(|x| x.is_finite()))
    }

    pub fn u64(&self, key: &str) -> CliResult<Option<u64>> {
        self.typed(key, parse_count)
    }

    pub fn grid(&self, key: &str) -> CliResult<Vec<f64>> {
        match self.get(key) {
            None => Ok(Vec::new()),
            Some(s) => parse_grid(s).map_err(|e| bad(format!("`{key}`: {e}"))),
        }
    }

    pub fn mode(&self) -> CliResult<Mode> {
        match self.get("mode").unwrap_or("tx") {
            "tx" | "tx_only" => Ok(Mode::TxOnly),
            "tx_rx" => Ok(Mode::TxRx),
            other => Err(bad(format!("`mode`: expected tx or tx_rx, got `{other}`"))),
        }
    }

    pub fn arrivals(&self) -> CliResult<Option<ArrivalModel>> {
        self.get("arrivals").map(parse_arrivals).transpose()
    }

    pub fn seed(&self) -> CliResult<u64> {
        Ok(self.u64("seed")?.unwrap_or(DEFAULT_SEED))
    }

    pub fn slots(&self) -> CliResult<u64> {
        Ok(self.u64("slots")?.unwrap_or(DEFAULT_SLOTS))
    }

    pub fn reps(&self) -> CliResult<u32> {
        let r = self.u64("reps")?.unwrap_or(DEFAULT_REPLICATIONS as u64);
        u32::try_from(r).map_err(|_| bad(format!("`reps`: {r} is too large")))
    }

    pub fn latch(&self) -> CliResult<LatchMode> {
        match self.get("latch").unwrap_or("once") {
            "once" => Ok(LatchMode::Once),
            "per_transmission" => Ok(LatchMode::PerTransmission),
            other => Err(bad(format!("`latch`: expected once or per_transmission, got `{other}`"))),
        }
    }

    pub fn prefactor(&self) -> CliResult<Option<Prefactor>> {
        match self.get("prefactor") {
            None => Ok(None),
            Some("half") => Ok(Some(Prefactor::Half)),
            Some("one") => Ok(Some(Prefactor::One)),
            Some(other) => Err(bad(format!("`prefactor`: expected half or one, got `{other}`"))),
        }
    }

    pub fn rx_policy(&self) -> CliResult<Option<RxPolicySpec<f64>>> {
        let Some(s) = self.get("rx_policy") else { return Ok(None) };
        match s {
            "when_charged" => Ok(Some(RxPolicySpec::WhenCharged)),
            "ctp" => Ok(Some(RxPolicySpec::Ctp)),
            _ => match s.split_once(':') {
                Some(("threshold", g)) => {
                    let gamma: f64 = g.trim().parse().map_err(|_| bad(format!("`rx_policy`: bad threshold `{g}`")))?;
                    Ok(Some(RxPolicySpec::Threshold { gamma }))
                }
                _ => Err(bad(format!("`rx_policy`: expected when_charged, ctp or threshold:GAMMA, got `{s}`"))),
            },
        }
    }

    pub fn fkg_lags(&self) -> CliResult<Vec<usize>> {
        match self.get("fkg_lags") {
            None => Ok(Vec::new()),
            Some(s) => s
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>().map_err(|_| bad(format!("`fkg_lags`: bad lag `{t}`"))))
                .collect(),
        }
    }
}

/// Accepts plain integers and `1e6`-style literals that are whole numbers.
fn parse_count(s: &str) -> Option<u64> {
    if let Ok(n) = s.parse::<u64>() {
        return Some(n);
    }
    let x: f64 = s.parse().ok()?;
    (x >= 0.0 && x.fract() == 0.0 && x < 1.8e19).then_some(x as u64)
}

fn num(s: &str, what: &str) -> CliResult<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| bad(format!("arrivals: bad {what} `{}`", s.trim())))
}

/// Parses an arrival spec such as `bernoulli:p=0.5,e=10` or `uniform:0,10`.
///
/// Parameters may be given positionally or by name (`p`/`e` for Bernoulli,
/// `lo`/`hi` for uniform). Discrete specs list `value:probability` pairs.
pub fn parse_arrivals(spec: &str) -> CliResult<ArrivalModel> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut positional = Vec::new();
    let mut named = BTreeMap::new();
    if kind.trim() != "discrete" {
        for part in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match part.split_once('=') {
                Some((k, v)) => {
                    named.insert(k.trim().to_string(), v.to_string());
                }
                None => positional.push(part.to_string()),
            }
        }
    }
    let pick = |name: &str, idx: usize| -> CliResult<f64> {
        match named.get(name).or(positional.get(idx)) {
            Some(v) => num(v, name),
            None => Err(bad(format!("arrivals `{spec}`: missing `{name}`"))),
        }
    };
    let model = match kind.trim() {
        "bernoulli" => ArrivalModel::bernoulli(pick("p", 0)?, pick("e", 1)?),
        "uniform" => ArrivalModel::uniform(pick("lo", 0)?, pick("hi", 1)?),
        "constant" => ArrivalModel::constant(pick("v", 0)?),
        "discrete" => {
            let mut values = Vec::new();
            let mut probs = Vec::new();
            for pair in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (v, p) = pair
                    .split_once(':')
                    .ok_or_else(|| bad(format!("arrivals `{spec}`: expected VALUE:PROB, got `{pair}`")))?;
                values.push(num(v, "value")?);
                probs.push(num(p, "probability")?);
            }
            ArrivalModel::discrete(values, probs)
        }
        other => return Err(bad(format!("arrivals: unknown kind `{other}`"))),
    };
    model.map_err(|e| bad(format!("arrivals `{spec}`: {e}")))
}

/// Largest value an arrival can take; the default battery size.
pub fn support_max(m: &ArrivalModel) -> f64 {
    match m {
        ArrivalModel::Bernoulli { energy, .. } => *energy,
        ArrivalModel::Uniform { hi, .. } => *hi,
        ArrivalModel::Discrete { values, .. } => values.iter().copied().fold(0.0, f64::max),
    }
}

/// Parses `a,b,c` or the inclusive range `START:STOP:STEP`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let parse = |t: &str| {
        t.trim().parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| format!("bad number `{}`", t.trim()))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [single] => single.split(',').map(str::trim).filter(|t| !t.is_empty()).map(parse).collect(),
        [a, b, step] => {
            let (a, b, step) = (parse(a)?, parse(b)?, parse(step)?);
            if step <= 0.0 || b < a {
                return Err(format!("range `{s}` needs START <= STOP and STEP > 0"));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize + 1;
            if n > 100_000 {
                return Err(format!("range `{s}` has too many points"));
            }
            // Round to 12 significant digits so 0.1:0.9:0.1 yields 0.3, not 0.30000000000000004.
            Ok((0..n).map(|i| format!("{:.11e}", a + i as f64 * step).parse().unwrap()).collect())
        }
        _ => Err(format!("expected a comma list or START:STOP:STEP, got `{s}`")),
    }
}
