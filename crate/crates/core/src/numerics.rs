//! Special functions, series summation and root finding used by the bounds.
//!
//! Fading integrals of the form `∫₀^∞ ln(1 + a·h) e^{-h} dh` reduce to the
//! exponential integral `E1`, so the bounds never need generic quadrature.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// Euler–Mascheroni constant; equals `-∫₀^∞ ln(h) e^{-h} dh`.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Stopping rule shared by the iterative routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    pub rel: T,
    pub abs: T,
    pub max_iter: usize,
}

impl<T: Scalar> Tolerance<T> {
    pub fn new(rel: T, abs: T, max_iter: usize) -> Result<Self> {
        if !(rel > T::zero()) || !(abs >= T::zero()) || max_iter == 0 {
            return Err(Error::domain(format!(
                "tolerance requires rel > 0, abs >= 0, max_iter >= 1 (got {rel}, {abs}, {max_iter})"
            )));
        }
        Ok(Self { rel, abs, max_iter })
    }
}

impl<T: Scalar> Default for Tolerance<T> {
    fn default() -> Self {
        Self { rel: T::lit(1e-10), abs: T::lit(1e-12), max_iter: 1_000_000 }
    }
}

/// Unit of a logarithmic quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    Bits,
    Nats,
}

impl LogBase {
    /// Converts a value computed in nats. This is the only place where the
    /// crate switches from natural logarithms to bits.
    #[inline]
    pub fn from_nats<T: Scalar>(self, nats: T) -> T {
        match self {
            LogBase::Nats => nats,
            LogBase::Bits => nats / T::LN_2(),
        }
    }
}

/// Exponential integral `E1(x) = ∫ₓ^∞ e^{-t}/t dt` for `x > 0`.
pub fn exp_integral_e1<T: Scalar>(x: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::domain(format!("E1 requires x > 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(T::zero());
    }
    if x <= T::one() {
        Ok(e1_series(x))
    } else {
        Ok((-x).exp() * e1_continued_fraction(x))
    }
}

/// `e^x · E1(x)` for `x > 0`, evaluated without overflowing `e^x`.
pub fn scaled_exp_integral_e1<T: Scalar>(x: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::domain(format!("E1 requires x > 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(T::zero());
    }
    if x <= T::one() {
        Ok(x.exp() * e1_series(x))
    } else {
        Ok(e1_continued_fraction(x))
    }
}

// E1(x) = -γ - ln x - Σ_{k≥1} (-x)^k / (k·k!), used on (0, 1].
fn e1_series<T: Scalar>(x: T) -> T {
    let eps = T::epsilon();
    let mut sum = T::zero();
    let mut fact = T::one();
    let mut k = 1usize;
    loop {
        let kf = T::from_usize(k).unwrap();
        fact = fact * (-x) / kf;
        let term = fact / kf;
        sum = sum + term;
        if term.abs() <= eps * sum.abs() || k > 200 {
            break;
        }
        k += 1;
    }
    -T::lit(EULER_GAMMA) - x.ln() - sum
}

// Modified Lentz evaluation of e^x·E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- ...))), x > 1.
fn e1_continued_fraction<T: Scalar>(x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let eps = T::epsilon();
    let two = T::lit(2.0);
    let mut b = x + T::one();
    let mut c = T::one() / tiny;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..=1000usize {
        let fi = T::from_usize(i).unwrap();
        let an = -fi * fi;
        b = b + two;
        d = T::one() / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h = h * del;
        if (del - T::one()).abs() <= eps {
            break;
        }
    }
    h
}

/// `E_h[ln(1 + a·h)]` for `h ~ Exp(1)`, i.e. `∫₀^∞ ln(1 + a·h) e^{-h} dh = e^{1/a} E1(1/a)`.
pub fn fading_log_moment<T: Scalar>(a: T, base: LogBase) -> T {
    if !(a > T::zero()) {
        return T::zero();
    }
    let nats = scaled_exp_integral_e1(a.recip()).unwrap_or_else(|_| T::zero());
    base.from_nats(nats)
}

/// Tail moment `∫_γ^∞ ln(1 + h) e^{-h} dh` for `γ ≥ 0`.
///
/// Integration by parts gives `e^{-γ} [ln(1 + γ) + e^{1+γ} E1(1 + γ)]`.
pub fn tail_log_moment<T: Scalar>(gamma: T, base: LogBase) -> Result<T> {
    if !(gamma >= T::zero()) {
        return Err(Error::domain(format!("threshold must be >= 0, got {gamma}")));
    }
    let shifted = T::one() + gamma;
    let nats = (-gamma).exp() * (shifted.ln() + scaled_exp_integral_e1(shifted)?);
    Ok(base.from_nats(nats))
}

/// Value of a truncated series together with its truncation certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum<T> {
    pub value: T,
    pub tail_bound: T,
    pub terms: usize,
}

/// Sums `Σ_{j≥0} term(j)` for nonnegative terms that decay at least
/// geometrically with the given ratio.
///
/// After term `J` the remaining tail is bounded by `term(J)·r/(1-r)`, where
/// `r` is the larger of `ratio` and the last observed term ratio. Summation
/// stops once that bound drops below `tol.abs`.
pub fn geometric_series_sum<T, F>(mut term: F, ratio: T, tol: &Tolerance<T>) -> Result<SeriesSum<T>>
where
    T: Scalar,
    F: FnMut(usize) -> T,
{
    if !(ratio > T::zero() && ratio < T::one()) {
        return Err(Error::domain(format!("series ratio must lie in (0, 1), got {ratio}")));
    }
    let mut sum = T::zero();
    let mut prev = T::zero();
    for j in 0..tol.max_iter {
        let t = term(j);
        sum = sum + t;
        if j >= 1 {
            let r = if prev > T::zero() { ratio.max(t / prev) } else { ratio };
            if r < T::one() {
                let tail = t * r / (T::one() - r);
                if tail < tol.abs {
                    return Ok(SeriesSum { value: sum, tail_bound: tail, terms: j + 1 });
                }
            }
        }
        prev = t;
    }
    Err(Error::NonConvergence { what: "geometric series", iterations: tol.max_iter })
}

/// Bisection on a sign-changing bracket. Stops when `|f(x)| <= tol.abs`, the
/// bracket width drops below `tol.abs`, or the midpoint stops moving in
/// floating point.
pub fn bisect_root<T, F>(f: F, lo: T, hi: T, tol: &Tolerance<T>) -> Result<T>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    if !(f_lo * f_hi < T::zero()) {
        return Err(Error::Bracket { lo: lo.widen(), hi: hi.widen(), f_lo: f_lo.widen(), f_hi: f_hi.widen() });
    }
    let half = T::lit(0.5);
    for _ in 0..tol.max_iter {
        let mid = lo + (hi - lo) * half;
        let f_mid = f(mid);
        if f_mid.abs() <= tol.abs || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if (f_lo < T::zero()) == (f_mid < T::zero()) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol.abs {
            return Ok(lo + (hi - lo) * half);
        }
    }
    Err(Error::NonConvergence { what: "bisection", iterations: tol.max_iter })
}
