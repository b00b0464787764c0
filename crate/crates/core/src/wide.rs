//! Extended-range scalars.
//!
//! [`WideComplex`] stores a complex mantissa together with a shared binary
//! exponent, so weight products such as `λ^n` or `n!` for `n` in the tens of
//! thousands stay representable while keeping full double precision relative
//! accuracy. [`LogMag`] is a non-negative real kept as its natural logarithm and
//! is used for seminorm values, tolerances and bounds.

use std::cmp::Ordering;
use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// Multiplies `x` by `2^k` without intermediate overflow.
pub(crate) fn ldexp(mut x: f64, mut k: i64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    while k > 1000 {
        x *= f64::from_bits(((1023 + 1000) as u64) << 52);
        k -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while k < -1000 {
        x *= f64::from_bits(((1023 - 1000) as u64) << 52);
        k += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * f64::from_bits(((1023 + k) as u64) << 52)
}

/// Returns `e` such that `|x| = f·2^e` with `f` in `[0.5, 1)`. `x` must be finite and nonzero.
fn frexp_exponent(x: f64) -> i64 {
    let bits = x.abs().to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    if biased == 0 {
        // subnormal
        return frexp_exponent(x * f64::from_bits(((1023 + 64) as u64) << 52)) - 64;
    }
    biased - 1022
}

/// Complex number `(re + i·im)·2^exp` with `max(|re|, |im|)` in `[0.5, 1)`.
///
/// Zero is the unique value with `re == im == 0` and `exp == 0`; it is exact and
/// propagates through products without rounding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WideComplex {
    re: f64,
    im: f64,
    exp: i64,
}

impl WideComplex {
    pub const ZERO: Self = Self {
        re: 0.0,
        im: 0.0,
        exp: 0,
    };
    pub const ONE: Self = Self {
        re: 0.5,
        im: 0.0,
        exp: 1,
    };

    /// Builds `(re + i·im)·2^exp`, normalizing the mantissa.
    pub fn from_parts(re: f64, im: f64, exp: i64) -> Self {
        assert!(re.is_finite() && im.is_finite(), "non-finite mantissa");
        if re == 0.0 && im == 0.0 {
            return Self::ZERO;
        }
        let e = frexp_exponent(re.abs().max(im.abs()));
        Self {
            re: ldexp(re, -e),
            im: ldexp(im, -e),
            exp: exp + e,
        }
    }

    pub fn new(re: f64, im: f64) -> Self {
        Self::from_parts(re, im, 0)
    }

    pub fn real(x: f64) -> Self {
        Self::new(x, 0.0)
    }

    pub fn i() -> Self {
        Self::new(0.0, 1.0)
    }

    /// `e^{ln_mag + i·phase}`; `ln_mag = -∞` gives zero.
    pub fn from_polar_ln(ln_mag: f64, phase: f64) -> Self {
        if ln_mag == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        assert!(ln_mag.is_finite(), "non-finite log magnitude");
        let log2 = ln_mag / LN_2;
        let e = log2.floor();
        let mag = (ln_mag - e * LN_2).exp();
        Self::from_parts(mag * phase.cos(), mag * phase.sin(), e as i64)
    }

    pub fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    /// Normalized mantissa and binary exponent.
    pub fn mantissa(&self) -> (f64, f64, i64) {
        (self.re, self.im, self.exp)
    }

    /// Decodes to ordinary doubles; saturates to ±∞ or flushes to zero outside the f64 range.
    pub fn to_f64_parts(&self) -> (f64, f64) {
        (ldexp(self.re, self.exp), ldexp(self.im, self.exp))
    }

    /// True when both parts decode to normal (or zero) doubles without loss.
    pub fn fits_f64(&self) -> bool {
        if self.is_zero() {
            return true;
        }
        let (re, im) = self.to_f64_parts();
        let ok = |v: f64| v == 0.0 || (v.is_normal() && v.is_finite());
        ok(re) && ok(im) && (re != 0.0 || self.re == 0.0) && (im != 0.0 || self.im == 0.0)
    }

    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.re.hypot(self.im).ln() + self.exp as f64 * LN_2
    }

    pub fn abs(&self) -> LogMag {
        LogMag::from_ln(self.ln_abs())
    }

    /// Principal argument in `(-π, π]`; zero has argument 0.
    pub fn arg(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let a = self.im.atan2(self.re);
        if a == -PI {
            PI
        } else {
            a
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            im: -self.im,
            ..*self
        }
    }

    pub fn scale_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return *self;
        }
        Self {
            exp: self.exp + k,
            ..*self
        }
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        let d = self.re * self.re + self.im * self.im;
        Self::from_parts(self.re / d, -self.im / d, -self.exp)
    }

    pub fn powi(&self, k: u64) -> Self {
        let mut base = *self;
        let mut acc = Self::ONE;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            k >>= 1;
            if k > 0 {
                base = base * base;
            }
        }
        acc
    }

    /// Principal `m`-th root: the argument is divided by `m` into `(-π/m, π/m]`.
    /// The root of zero is zero.
    pub fn principal_root(&self, m: u32) -> Self {
        assert!(m >= 1, "root order must be positive");
        if m == 1 || self.is_zero() {
            return *self;
        }
        let m_i = m as i64;
        let q = self.exp.div_euclid(m_i);
        let rem = self.exp.rem_euclid(m_i);
        let r = self.re.hypot(self.im) * ldexp(1.0, rem);
        let mag = r.powf(1.0 / m as f64);
        let phase = self.arg() / m as f64;
        Self::from_parts(mag * phase.cos(), mag * phase.sin(), q)
    }

    /// Parses `a`, `bi`, `a+bi`, `a-bi` or a parenthesized form; `i` alone means `1i`.
    pub fn parse(text: &str) -> crate::Result<Self> {
        let err = || crate::Error::invalid(format!("invalid complex literal {text:?}"));
        let mut t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if t.starts_with('(') && t.ends_with(')') {
            t = t[1..t.len() - 1].to_string();
        }
        if t.is_empty() {
            return Err(err());
        }
        let real = |s: &str| -> crate::Result<f64> {
            let v: f64 = s.parse().map_err(|_| err())?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(err())
            }
        };
        let Some(body) = t.strip_suffix('i') else {
            return Ok(Self::real(real(&t)?));
        };
        let bytes = body.as_bytes();
        let split = (1..bytes.len()).rev().find(|&k| {
            (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E')
        });
        let (re_s, im_s) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let im = match im_s {
            "" | "+" => 1.0,
            "-" => -1.0,
            s => real(s)?,
        };
        let re = if re_s.is_empty() { 0.0 } else { real(re_s)? };
        Ok(Self::new(re, im))
    }

    /// `|a - b| / max(|a|, |b|)`, zero when both vanish.
    pub fn rel_diff(a: Self, b: Self) -> f64 {
        let scale = a.ln_abs().max(b.ln_abs());
        if scale == f64::NEG_INFINITY {
            return 0.0;
        }
        (a - b).abs().ln().map_or(0.0, |l| (l - scale).exp())
    }
}

impl Default for WideComplex {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<f64> for WideComplex {
    fn from(x: f64) -> Self {
        Self::real(x)
    }
}

impl Mul for WideComplex {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::ZERO;
        }
        Self::from_parts(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
            self.exp + o.exp,
        )
    }
}

impl Div for WideComplex {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl Add for WideComplex {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let (hi, lo) = if self.exp >= o.exp {
            (self, o)
        } else {
            (o, self)
        };
        let d = hi.exp - lo.exp;
        if d > 1100 {
            return hi;
        }
        Self::from_parts(hi.re + ldexp(lo.re, -d), hi.im + ldexp(lo.im, -d), hi.exp)
    }
}

impl Neg for WideComplex {
    type Output = Self;
    fn neg(self) -> Self {
        if self.is_zero() {
            return self;
        }
        Self {
            re: -self.re,
            im: -self.im,
            exp: self.exp,
        }
    }
}

impl Sub for WideComplex {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl fmt::Display for WideComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.fits_f64() {
            let (re, im) = self.to_f64_parts();
            if im == 0.0 {
                write!(f, "{re}")
            } else {
                write!(f, "{re}{:+}i", im)
            }
        } else {
            write!(f, "exp({:.6})·e^(i{:.6})", self.ln_abs(), self.arg())
        }
    }
}

/// Serialized form: `[re, im]` when exact in doubles, otherwise
/// `{"mant": [re, im], "exp2": e}`; `{"log_mag": L, "phase": p}` is accepted on input.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum WideRepr {
    Plain(f64, f64),
    Binary { mant: (f64, f64), exp2: i64 },
    Polar { log_mag: f64, phase: f64 },
}

impl From<&WideComplex> for WideRepr {
    fn from(z: &WideComplex) -> Self {
        if z.fits_f64() {
            let (re, im) = z.to_f64_parts();
            WideRepr::Plain(re, im)
        } else {
            WideRepr::Binary {
                mant: (z.re, z.im),
                exp2: z.exp,
            }
        }
    }
}

impl From<WideRepr> for WideComplex {
    fn from(r: WideRepr) -> Self {
        match r {
            WideRepr::Plain(re, im) => WideComplex::new(re, im),
            WideRepr::Binary { mant, exp2 } => WideComplex::from_parts(mant.0, mant.1, exp2),
            WideRepr::Polar { log_mag, phase } => WideComplex::from_polar_ln(log_mag, phase),
        }
    }
}

impl Serialize for WideComplex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        WideRepr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for WideComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = WideRepr::deserialize(d)?;
        if let WideRepr::Plain(re, im) | WideRepr::Binary { mant: (re, im), .. } = repr {
            if !re.is_finite() || !im.is_finite() {
                return Err(de::Error::custom("non-finite complex component"));
            }
        }
        Ok(repr.into())
    }
}

/// Non-negative real stored as its natural logarithm (`-∞` is zero, `+∞` is overflow).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogMag(f64);

impl LogMag {
    pub const ZERO: Self = Self(f64::NEG_INFINITY);
    pub const ONE: Self = Self(0.0);
    pub const INFINITY: Self = Self(f64::INFINITY);

    pub fn from_ln(ln: f64) -> Self {
        assert!(!ln.is_nan(), "NaN log magnitude");
        Self(ln)
    }

    pub fn from_f64(x: f64) -> Self {
        assert!(x >= 0.0, "negative magnitude {x}");
        Self(x.ln())
    }

    /// `2^-k`.
    pub fn pow2_neg(k: i64) -> Self {
        Self(-(k as f64) * LN_2)
    }

    pub fn ln(&self) -> Option<f64> {
        (self.0 != f64::NEG_INFINITY).then_some(self.0)
    }

    pub fn ln_raw(&self) -> f64 {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(&self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn is_infinite(&self) -> bool {
        self.0 == f64::INFINITY
    }

    pub fn powf(&self, e: f64) -> Self {
        if self.is_zero() {
            return if e == 0.0 { Self::ONE } else { Self::ZERO };
        }
        Self(self.0 * e)
    }

    pub fn max(self, o: Self) -> Self {
        if self.0 >= o.0 {
            self
        } else {
            o
        }
    }

    pub fn min(self, o: Self) -> Self {
        if self.0 <= o.0 {
            self
        } else {
            o
        }
    }

    /// `self / o`; zero divided by zero is zero.
    pub fn ratio(self, o: Self) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        Self(self.0 - o.0)
    }

    /// Sum of many magnitudes with a single rescale by the largest term.
    pub fn sum<I: IntoIterator<Item = LogMag>>(items: I) -> Self {
        let lns: Vec<f64> = items.into_iter().map(|m| m.0).collect();
        let top = lns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top.is_infinite() {
            return Self(top);
        }
        let s: f64 = lns.iter().map(|l| (l - top).exp()).sum();
        Self(top + s.ln())
    }
}

impl Add for LogMag {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (hi, lo) = if self.0 >= o.0 {
            (self.0, o.0)
        } else {
            (o.0, self.0)
        };
        if lo == f64::NEG_INFINITY || hi == f64::INFINITY {
            return Self(hi);
        }
        Self(hi + (lo - hi).exp().ln_1p())
    }
}

impl Mul for LogMag {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::ZERO;
        }
        Self(self.0 + o.0)
    }
}

impl PartialOrd for LogMag {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&o.0)
    }
}

impl fmt::Display for LogMag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        if self.is_infinite() {
            return write!(f, "inf");
        }
        let l10 = self.0 / std::f64::consts::LN_10;
        let e = l10.floor();
        let mut mant = 10f64.powf(l10 - e);
        let mut e = e as i64;
        if mant >= 9.9999995 {
            mant /= 10.0;
            e += 1;
        }
        write!(f, "{mant:.6}e{e}")
    }
}

/// Serialized as the natural log; zero and overflow become the strings `"-inf"` and `"inf"`.
impl Serialize for LogMag {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for LogMag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = LogMag;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a log magnitude or \"-inf\"/\"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<LogMag, E> {
                Ok(LogMag(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<LogMag, E> {
                Ok(LogMag(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<LogMag, E> {
                Ok(LogMag(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<LogMag, E> {
                match v {
                    "-inf" => Ok(LogMag::ZERO),
                    "inf" => Ok(LogMag::INFINITY),
                    _ => Err(E::custom(format!("unexpected log magnitude {v:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}
