//! Exact arithmetic for quadratic irrationals `(a + b√d)/c`.
//!
//! Everything on the certified path is integer arithmetic: `√d` is obtained
//! from an integer square root of a power-of-ten scaled radicand, and every
//! [`CertifiedFixedPoint`] carries an explicit error bound in units of its last
//! digit. Floating point only appears in the `to_f64` conversions.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ExactInteger = BigInt;

/// Extra decimal digits carried beyond `digits(m) + target`.
pub const GUARD_DIGITS: u32 = 10;

/// Target digits used by library-internal distance evaluations.
pub const DEFAULT_TARGET_DIGITS: u32 = 30;

pub fn pow10(k: u32) -> BigInt {
    num_traits::pow(BigInt::from(10u8), k as usize)
}

/// Number of decimal digits of `|m|` (1 for zero).
pub fn decimal_digits(m: &BigInt) -> u32 {
    if m.is_zero() {
        1
    } else {
        m.abs().to_str_radix(10).len() as u32
    }
}

/// Floor of the square root: `r² ≤ n < (r+1)²`.
pub fn isqrt(n: &BigInt) -> Result<BigInt> {
    if n.is_negative() {
        return Err(Error::domain(format!("isqrt of negative value {n}")));
    }
    Ok(n.sqrt())
}

/// Sign of `x + y·√d` for a positive non-square `d`, decided exactly.
pub fn surd_sign(x: &BigInt, y: &BigInt, d: &BigInt) -> Ordering {
    let sx = x.sign();
    let sy = y.sign();
    match (sx, sy) {
        (Sign::NoSign, Sign::NoSign) => Ordering::Equal,
        (_, Sign::NoSign) => sign_to_ord(sx),
        (Sign::NoSign, _) => sign_to_ord(sy),
        _ if sx == sy => sign_to_ord(sx),
        _ => {
            // opposite signs: the larger magnitude wins, x² ≠ y²d since d is not a square
            if x * x > y * y * d {
                sign_to_ord(sx)
            } else {
                sign_to_ord(sy)
            }
        }
    }
}

fn sign_to_ord(s: Sign) -> Ordering {
    match s {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}

fn is_perfect_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}

fn is_squarefree(d: &BigInt) -> Result<bool> {
    let d = d
        .to_u64()
        .ok_or_else(|| Error::invalid(format!("radicand {d} too large for squarefree check")))?;
    let mut p = 2u64;
    while p.saturating_mul(p) <= d {
        if d % (p * p) == 0 {
            return Ok(false);
        }
        p += 1;
    }
    Ok(true)
}

/// The real number `(a + b√d)/c` with `b ≠ 0`, `c > 0`, `d > 1` squarefree and
/// `gcd(a, b, c) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct QuadraticIrrational {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

impl QuadraticIrrational {
    pub fn new(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: impl Into<BigInt>,
    ) -> Result<Self> {
        let (a, b, c, d) = (a.into(), b.into(), c.into(), d.into());
        if d <= BigInt::one() {
            return Err(Error::invalid(format!("radicand must exceed 1, got {d}")));
        }
        if is_perfect_square(&d) {
            return Err(Error::invalid(format!("radicand {d} is a perfect square")));
        }
        if !is_squarefree(&d)? {
            return Err(Error::invalid(format!("radicand {d} is not squarefree")));
        }
        Self::with_radicand(a, b, c, d)
    }

    /// Builds a value over a radicand already known to be valid.
    fn with_radicand(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Result<Self> {
        if b.is_zero() {
            return Err(Error::invalid("surd coefficient b must be nonzero"));
        }
        if c.is_zero() {
            return Err(Error::invalid("denominator c must be nonzero"));
        }
        let (mut a, mut b, mut c) = (a, b, c);
        if c.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        let g = a.gcd(&b).gcd(&c);
        if !g.is_one() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        Ok(Self { a, b, c, d })
    }

    /// `(1 + √5)/2`.
    pub fn golden() -> Self {
        Self::new(1, 1, 2, 5).expect("valid preset")
    }

    pub fn sqrt2() -> Self {
        Self::new(0, 1, 1, 2).expect("valid preset")
    }

    pub fn sqrt3() -> Self {
        Self::new(0, 1, 1, 3).expect("valid preset")
    }

    /// Named presets accepted on the command line: `golden`, `sqrt2`, `sqrt3`
    /// and their fractional parts `golden-1`, `sqrt2-1`, `sqrt3-1`.
    pub fn preset(name: &str) -> Option<Self> {
        let (base_name, minus_one) = match name.strip_suffix("-1") {
            Some(b) => (b, true),
            None => (name, false),
        };
        let base = match base_name {
            "golden" => Self::golden(),
            "sqrt2" => Self::sqrt2(),
            "sqrt3" => Self::sqrt3(),
            _ => return None,
        };
        if minus_one {
            Some(base.add_int(&BigInt::from(-1)))
        } else {
            Some(base)
        }
    }

    /// Parses a preset name or an `a,b,c,d` quadruple.
    pub fn parse(s: &str) -> Result<Self> {
        if let Some(q) = Self::preset(s) {
            return Ok(q);
        }
        let parts: Vec<&str> = s.split([',', '/']).collect();
        if parts.len() != 4 {
            return Err(Error::invalid(format!(
                "unknown alpha `{s}`; expected a preset or a,b,c,d"
            )));
        }
        let mut v = Vec::with_capacity(4);
        for p in parts {
            v.push(
                p.trim()
                    .parse::<BigInt>()
                    .map_err(|e| Error::invalid(format!("bad integer `{p}`: {e}")))?,
            );
        }
        let d = v.pop().unwrap();
        let c = v.pop().unwrap();
        let b = v.pop().unwrap();
        let a = v.pop().unwrap();
        Self::new(a, b, c, d)
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }
    pub fn b(&self) -> &BigInt {
        &self.b
    }
    pub fn c(&self) -> &BigInt {
        &self.c
    }
    pub fn d(&self) -> &BigInt {
        &self.d
    }

    /// `k·self` for a nonzero integer `k`.
    pub fn mul_int(&self, k: &BigInt) -> Result<Self> {
        if k.is_zero() {
            return Err(Error::invalid("multiplying a surd by zero leaves no surd"));
        }
        Self::with_radicand(&self.a * k, &self.b * k, self.c.clone(), self.d.clone())
    }

    pub fn add_int(&self, k: &BigInt) -> Self {
        Self::with_radicand(&self.a + k * &self.c, self.b.clone(), self.c.clone(), self.d.clone())
            .expect("b unchanged")
    }

    pub fn neg(&self) -> Self {
        Self::with_radicand(-&self.a, -&self.b, self.c.clone(), self.d.clone()).expect("b nonzero")
    }

    /// Exact `floor(self)`.
    pub fn floor(&self) -> BigInt {
        let radicand = &self.b * &self.b * &self.d;
        let s = radicand.sqrt();
        if self.b.is_positive() {
            (&self.a + s).div_floor(&self.c)
        } else {
            // a − √X lies strictly inside (a − s − 1, a − s)
            (&self.a - s - BigInt::one()).div_floor(&self.c)
        }
    }

    /// `self − floor(self)`, in `(0, 1)`.
    pub fn frac(&self) -> Self {
        self.add_int(&-self.floor())
    }

    /// Exact sign.
    pub fn signum(&self) -> Ordering {
        surd_sign(&self.a, &self.b, &self.d)
    }

    /// Exact comparison with the rational `num/den`.
    pub fn cmp_rational(&self, num: &BigInt, den: &BigInt) -> Ordering {
        assert!(den.is_positive(), "denominator must be positive");
        let x = &self.a * den - num * &self.c;
        let y = &self.b * den;
        surd_sign(&x, &y, &self.d)
    }

    /// Exact comparison of two values sharing the same radicand.
    pub fn cmp_same_radicand(&self, other: &Self) -> Option<Ordering> {
        if self.d != other.d {
            return None;
        }
        let x = &self.a * &other.c - &other.a * &self.c;
        let y = &self.b * &other.c - &other.b * &self.c;
        Some(surd_sign(&x, &y, &self.d))
    }

    /// `m·self` as a fixed-point number with `scale` decimal digits and an
    /// error of at most two units in the last place.
    ///
    /// `m` is folded into the radicand before the square root, so no leading
    /// digits of the fractional part are lost however large `m` gets.
    pub fn scaled_value(&self, m: &BigInt, scale: u32) -> CertifiedFixedPoint {
        let p = pow10(scale);
        let mb = m * &self.b;
        let radicand = &mb * &mb * &self.d * &p * &p;
        let s = radicand.sqrt();
        let t = m * &self.a * &p;
        let numer = match mb.sign() {
            Sign::Minus => t - s,
            _ => t + s,
        };
        CertifiedFixedPoint {
            mantissa: numer.div_floor(&self.c),
            scale,
            error_ulps: BigInt::from(2),
        }
    }

    /// Fixed-point value with `digits` decimals, error at most `2·10^-digits`.
    pub fn eval(&self, digits: u32) -> Result<CertifiedFixedPoint> {
        if digits == 0 {
            return Err(Error::domain("eval needs at least one digit"));
        }
        // the working value has error ≤ 2 ulps at `digits + 1`, so truncating one
        // digit leaves at most 1 + 0.2 ulps
        let fine = self.scaled_value(&BigInt::one(), digits + 1);
        Ok(fine.rescale(digits))
    }

    pub fn to_f64(&self) -> f64 {
        self.scaled_value(&BigInt::one(), 20).to_f64()
    }
}

impl fmt::Display for QuadraticIrrational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}√{})/{}", self.a, self.b, self.d, self.c)
    }
}

impl From<QuadraticIrrational> for String {
    /// The `a,b,c,d` form accepted by [`QuadraticIrrational::parse`].
    fn from(q: QuadraticIrrational) -> String {
        format!("{},{},{},{}", q.a, q.b, q.c, q.d)
    }
}

impl TryFrom<String> for QuadraticIrrational {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Self::parse(&s)
    }
}

/// `mantissa · 10^-scale` with `|represented − true| ≤ error_ulps · 10^-scale`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedFixedPoint {
    pub mantissa: BigInt,
    pub scale: u32,
    pub error_ulps: BigInt,
}

impl CertifiedFixedPoint {
    pub fn exact_int(v: &BigInt, scale: u32) -> Self {
        Self {
            mantissa: v * pow10(scale),
            scale,
            error_ulps: BigInt::zero(),
        }
    }

    /// `num/den` rounded down to `scale` digits.
    pub fn from_ratio(num: &BigInt, den: &BigInt, scale: u32) -> Self {
        let r = BigRational::new(num.clone(), den.clone());
        let scaled = r * BigRational::from_integer(pow10(scale));
        let floor = scaled.floor().to_integer();
        let exact = scaled.is_integer();
        Self {
            mantissa: floor,
            scale,
            error_ulps: if exact { BigInt::zero() } else { BigInt::one() },
        }
    }

    pub fn error_bound(&self) -> BigRational {
        BigRational::new(self.error_ulps.clone(), pow10(self.scale))
    }

    pub fn value(&self) -> BigRational {
        BigRational::new(self.mantissa.clone(), pow10(self.scale))
    }

    pub fn to_f64(&self) -> f64 {
        // keep ~20 significant digits before going to floating point
        let digits = decimal_digits(&self.mantissa);
        if digits > 20 {
            let drop = digits - 20;
            let m = &self.mantissa / pow10(drop);
            m.to_f64().unwrap_or(f64::NAN) * 10f64.powi(drop as i32 - self.scale as i32)
        } else {
            self.mantissa.to_f64().unwrap_or(f64::NAN) / 10f64.powi(self.scale as i32)
        }
    }

    /// Re-expresses at another scale. Going up is exact; going down truncates
    /// and widens the error by one ulp.
    pub fn rescale(&self, scale: u32) -> Self {
        match scale.cmp(&self.scale) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let f = pow10(scale - self.scale);
                Self {
                    mantissa: &self.mantissa * &f,
                    scale,
                    error_ulps: &self.error_ulps * &f,
                }
            }
            Ordering::Less => {
                let f = pow10(self.scale - scale);
                Self {
                    mantissa: self.mantissa.div_floor(&f),
                    scale,
                    error_ulps: self.error_ulps.div_ceil(&f) + 1,
                }
            }
        }
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        let s = self.scale.max(other.scale);
        (self.rescale(s), other.rescale(s))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (x, y) = self.aligned(other);
        Self {
            mantissa: x.mantissa + y.mantissa,
            scale: x.scale,
            error_ulps: x.error_ulps + y.error_ulps,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            mantissa: -&self.mantissa,
            scale: self.scale,
            error_ulps: self.error_ulps.clone(),
        }
    }

    pub fn abs(&self) -> Self {
        Self {
            mantissa: self.mantissa.abs(),
            scale: self.scale,
            error_ulps: self.error_ulps.clone(),
        }
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        Self {
            mantissa: &self.mantissa * k,
            scale: self.scale,
            error_ulps: &self.error_ulps * k.abs(),
        }
    }

    /// Smaller of two certified values; the error is the larger of the two.
    pub fn min(&self, other: &Self) -> Self {
        let (x, y) = self.aligned(other);
        let error_ulps = x.error_ulps.clone().max(y.error_ulps.clone());
        let mantissa = x.mantissa.min(y.mantissa);
        Self {
            mantissa,
            scale: x.scale,
            error_ulps,
        }
    }

    /// Ordering when the error intervals are disjoint, `None` otherwise.
    pub fn certified_cmp(&self, other: &Self) -> Option<Ordering> {
        let (x, y) = self.aligned(other);
        let gap = &x.mantissa - &y.mantissa;
        let slack = &x.error_ulps + &y.error_ulps;
        if gap > slack {
            Some(Ordering::Greater)
        } else if -&gap > slack {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    /// True unless the intervals prove `self > other`.
    pub fn possibly_le(&self, other: &Self) -> bool {
        self.certified_cmp(other) != Some(Ordering::Greater)
    }

    /// Whether the error intervals of `self` and `other` intersect, i.e. the
    /// two could describe the same real number.
    pub fn consistent_with(&self, other: &Self) -> bool {
        self.certified_cmp(other).is_none()
    }
}

/// Decimal strings, so digits survive JSON round trips untouched.
impl Serialize for CertifiedFixedPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("CertifiedFixedPoint", 4)?;
        st.serialize_field("value", &self.to_string())?;
        st.serialize_field("mantissa", &self.mantissa.to_string())?;
        st.serialize_field("scale", &self.scale)?;
        st.serialize_field("error_ulps", &self.error_ulps.to_string())?;
        st.end()
    }
}

impl fmt::Display for CertifiedFixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let neg = self.mantissa.is_negative();
        let digits = self.mantissa.abs().to_str_radix(10);
        let scale = self.scale as usize;
        let padded = if digits.len() <= scale {
            format!("{}{}", "0".repeat(scale + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int, frac) = padded.split_at(padded.len() - scale);
        write!(f, "{}{}", if neg { "-" } else { "" }, int)?;
        if scale > 0 {
            write!(f, ".{frac}")?;
        }
        write!(f, " ± {}e-{}", self.error_ulps, self.scale)
    }
}

/// Distance to the nearest integer, `‖x‖`, and that integer.
pub fn norm_dist(x: &CertifiedFixedPoint) -> Result<(CertifiedFixedPoint, BigInt)> {
    let one = pow10(x.scale);
    if &x.error_ulps * 4 >= one {
        return Err(Error::domain("norm_dist needs an error bound below 1/4"));
    }
    let two_one = &one * 2;
    let nearest = (&x.mantissa * BigInt::from(2) + &one).div_floor(&two_one);
    let dist = (&x.mantissa - &nearest * &one).abs();
    // the nearest integer is certain only if no half-integer lies within the error
    if &one - &dist * 2 <= &x.error_ulps * 2 {
        return Err(Error::PrecisionInsufficient {
            digits: x.scale,
            context: format!("value {x} is within its error of a half-integer"),
        });
    }
    Ok((
        CertifiedFixedPoint {
            mantissa: dist,
            scale: x.scale,
            error_ulps: x.error_ulps.clone(),
        },
        nearest,
    ))
}

/// Working scale for `‖mα‖` at `target_digits`: `digits(m) + target + guard`.
pub fn working_scale(m: &BigInt, target_digits: u32) -> u32 {
    decimal_digits(m) + target_digits + GUARD_DIGITS
}

/// `‖mα‖` with error at most `10^-target_digits`.
pub fn scaled_dist(
    q: &QuadraticIrrational,
    m: &BigInt,
    target_digits: u32,
) -> Result<CertifiedFixedPoint> {
    if m < &BigInt::one() {
        return Err(Error::domain(format!("scaled_dist needs m ≥ 1, got {m}")));
    }
    let x = q.scaled_value(m, working_scale(m, target_digits));
    norm_dist(&x).map(|(d, _)| d)
}

/// [`scaled_dist`] with the target doubled until the half-integer tie resolves.
pub fn scaled_dist_auto(
    q: &QuadraticIrrational,
    m: &BigInt,
    target_digits: u32,
) -> Result<CertifiedFixedPoint> {
    let mut digits = target_digits.max(1);
    loop {
        match scaled_dist(q, m, digits) {
            Err(Error::PrecisionInsufficient { .. }) if digits < 4096 => digits *= 2,
            other => return other,
        }
    }
}

/// Batch evaluator for `mα` over many `m ≤ max_m`, sharing one high-precision
/// evaluation of `α`.
///
/// `α` is held at `digits(max_m) + target + guard` decimals with a 2-ulp
/// error; `m·α` then carries `2m` ulps, which stays below `10^-target`.
#[derive(Clone, Debug)]
pub struct FracEvaluator {
    alpha: CertifiedFixedPoint,
    one: BigInt,
    max_m: BigInt,
    target_digits: u32,
    q: QuadraticIrrational,
}

impl FracEvaluator {
    pub fn new(q: &QuadraticIrrational, max_m: &BigInt, target_digits: u32) -> Self {
        let scale = working_scale(max_m, target_digits);
        Self {
            alpha: q.scaled_value(&BigInt::one(), scale),
            one: pow10(scale),
            max_m: max_m.clone(),
            target_digits,
            q: q.clone(),
        }
    }

    pub fn scale(&self) -> u32 {
        self.alpha.scale
    }

    pub fn value(&self, m: &BigInt) -> CertifiedFixedPoint {
        debug_assert!(m.abs() <= self.max_m, "m exceeds evaluator range");
        self.alpha.mul_int(m)
    }

    /// Fractional part of `mα` as a double, accurate to far below 1e-15.
    pub fn frac_f64(&self, m: &BigInt) -> f64 {
        let v = self.value(m);
        let r = v.mantissa.mod_floor(&self.one);
        CertifiedFixedPoint {
            mantissa: r,
            scale: v.scale,
            error_ulps: v.error_ulps,
        }
        .to_f64()
    }

    /// `‖mα‖`; falls back to a direct higher-precision evaluation on ties.
    pub fn dist(&self, m: &BigInt) -> Result<CertifiedFixedPoint> {
        match norm_dist(&self.value(m)) {
            Ok((d, _)) => Ok(d),
            Err(Error::PrecisionInsufficient { .. }) => {
                scaled_dist_auto(&self.q, m, self.target_digits * 2).map(|d| d.rescale(self.scale()))
            }
            Err(e) => Err(e),
        }
    }
}

/// `min_{1≤j≤n} j·‖jα‖` and the minimizing `j`.
pub fn khinchin_min(q: &QuadraticIrrational, n: &BigInt) -> Result<(CertifiedFixedPoint, BigInt)> {
    if n < &BigInt::one() {
        return Err(Error::domain("khinchin_min needs n ≥ 1"));
    }
    let count = n
        .to_u64()
        .ok_or_else(|| Error::domain("khinchin_min scan bound must fit in 64 bits"))?;
    let eval = FracEvaluator::new(q, n, DEFAULT_TARGET_DIGITS);
    let mut best: Option<(CertifiedFixedPoint, BigInt)> = None;
    for j in 1..=count {
        let j = BigInt::from(j);
        let v = eval.dist(&j)?.mul_int(&j);
        let better = match &best {
            None => true,
            Some((b, _)) => v.mantissa < b.mantissa,
        };
        if better {
            best = Some((v, j));
        }
    }
    Ok(best.expect("n ≥ 1"))
}
