//! Exact rationals for precisions and thresholds.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// A conditional probability kept as the two model counts it came from.
///
/// The counts are not reduced, so `4/4` and `1/1` are distinct
/// representations of the same value; equality and ordering compare by
/// cross-multiplication.
#[derive(Clone, Debug)]
pub struct Precision {
    favorable: BigUint,
    total: BigUint,
}

impl Precision {
    pub fn new(favorable: BigUint, total: BigUint) -> Self {
        assert!(!total.is_zero(), "precision with zero denominator");
        assert!(favorable <= total, "precision above one");
        Precision { favorable, total }
    }

    pub fn one() -> Self {
        Precision::new(BigUint::one(), BigUint::one())
    }

    pub fn numerator(&self) -> &BigUint {
        &self.favorable
    }

    pub fn denominator(&self) -> &BigUint {
        &self.total
    }

    pub fn is_one(&self) -> bool {
        self.favorable == self.total
    }

    /// Numerator and denominator divided by their gcd.
    pub fn reduced(&self) -> (BigUint, BigUint) {
        if self.favorable.is_zero() {
            return (BigUint::zero(), BigUint::one());
        }
        let g = self.favorable.gcd(&self.total);
        (&self.favorable / &g, &self.total / &g)
    }

    /// True iff `self ≥ δ`, decided by `num·q ≥ p·den`.
    pub fn meets(&self, delta: &Threshold) -> bool {
        &self.favorable * &delta.den >= &delta.num * &self.total
    }

    pub fn to_ratio(&self) -> BigRational {
        BigRational::new(self.favorable.clone().into(), self.total.clone().into())
    }

    pub fn to_f64(&self) -> f64 {
        self.to_ratio().to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering rounded half-up to `places` digits.
    pub fn decimal(&self, places: usize) -> String {
        decimal(&self.favorable, &self.total, places)
    }
}

impl PartialEq for Precision {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Precision {}

impl PartialOrd for Precision {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Precision {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.favorable * &other.total).cmp(&(&other.favorable * &self.total))
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = self.reduced();
        write!(f, "{n}/{d}")
    }
}

/// Renders `num/den` (den > 0) with `places` fractional digits, rounding half up.
pub fn decimal(num: &BigUint, den: &BigUint, places: usize) -> String {
    let scale = BigUint::from(10u32).pow(places as u32);
    let scaled = (num * &scale * 2u32 + den) / (den * 2u32);
    let (int, frac) = scaled.div_rem(&scale);
    if places == 0 {
        return int.to_string();
    }
    format!("{int}.{:0>places$}", frac.to_string())
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ThresholdError {
    #[error("threshold {0:?} is not a plain decimal number")]
    Syntax(String),
    #[error("threshold {0:?} is outside [0, 1]")]
    Range(String),
}

/// The probability threshold δ, an exact rational in [0, 1].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Threshold {
    num: BigUint,
    den: BigUint,
    text: String,
}

impl Threshold {
    /// δ = num/den. Panics unless 0 ≤ num ≤ den and den > 0.
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0 && num <= den, "threshold outside [0, 1]");
        let (num, den) = (BigUint::from(num), BigUint::from(den));
        let text = decimal_text(&num, &den);
        Threshold::reduced(num, den, text)
    }

    fn reduced(num: BigUint, den: BigUint, text: String) -> Self {
        let g = num.gcd(&den);
        let g = if g.is_zero() { BigUint::one() } else { g };
        Threshold {
            num: &num / &g,
            den: &den / &g,
            text,
        }
    }

    pub fn one() -> Self {
        Threshold::new(1, 1)
    }

    pub fn zero() -> Self {
        Threshold::new(0, 1)
    }

    /// p in δ = p/q (reduced).
    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    /// q in δ = p/q (reduced).
    pub fn denominator(&self) -> &BigUint {
        &self.den
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }
}

fn decimal_text(num: &BigUint, den: &BigUint) -> String {
    // Exact when den has only factors 2 and 5; otherwise a 6-digit rendering.
    let mut d = den.clone();
    let mut places = 0usize;
    for p in [2u32, 5] {
        while (&d % p).is_zero() {
            d /= p;
            places += 1;
        }
    }
    if d.is_one() {
        let s = decimal(num, den, places);
        if s.contains('.') {
            let s = s.trim_end_matches('0').trim_end_matches('.');
            return s.to_string();
        }
        return s;
    }
    decimal(num, den, 6)
}

impl FromStr for Threshold {
    type Err = ThresholdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        let (int, frac) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text, ""),
        };
        let digits = |part: &str| part.bytes().all(|b| b.is_ascii_digit());
        if int.len() + frac.len() == 0 || !digits(int) || !digits(frac) {
            return Err(ThresholdError::Syntax(s.to_string()));
        }
        let all: String = format!("{int}{frac}");
        let num: BigUint = all
            .parse()
            .map_err(|_| ThresholdError::Syntax(s.to_string()))?;
        let den = BigUint::from(10u32).pow(frac.len() as u32);
        if num > den {
            return Err(ThresholdError::Range(s.to_string()));
        }
        Ok(Threshold::reduced(num, den, text.to_string()))
    }
}

/// The decimal text δ was parsed from.
impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}
