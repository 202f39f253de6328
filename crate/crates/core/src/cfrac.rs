//! Continued fractions of quadratic irrationals, convergents, Ostrowski
//! numeration and the diagnostics built on it: integer types, type
//! histograms, type-based lower bounds on `‖mβ‖`, the largest-type sum `φ(τ)`
//! and divisor counts.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qirr::{
    self, norm_dist, scaled_dist_auto, CertifiedFixedPoint, QuadraticIrrational,
    DEFAULT_TARGET_DIGITS,
};

/// Decimal scale used for certified `D_k` values and lower bounds.
const BOUND_SCALE: u32 = DEFAULT_TARGET_DIGITS + qirr::GUARD_DIGITS;

/// `[a_0; a_1, a_2, …]` of a quadratic irrational. The expansion is eventually
/// periodic; `period_start` indexes the full sequence `a_0, a_1, …`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CFExpansion {
    pub value: QuadraticIrrational,
    pub a0: BigInt,
    /// `a_1 … a_{k_max}`.
    pub partial_quotients: Vec<BigInt>,
    pub period_start: usize,
    pub period_length: usize,
    #[serde(skip)]
    block: Vec<BigInt>,
}

impl CFExpansion {
    /// `a_k` for any `k`, extended through the period.
    pub fn quotient(&self, k: usize) -> BigInt {
        if k < self.block.len() {
            return self.block[k].clone();
        }
        let idx = self.period_start + (k - self.period_start) % self.period_length;
        self.block[idx].clone()
    }

    /// The periodic block `a_s … a_{s+L-1}`.
    pub fn period(&self) -> &[BigInt] {
        &self.block[self.period_start..]
    }
}

/// Expansion by the integer surd recurrence on `(P + √D)/Q`.
pub fn expand_cf(q: &QuadraticIrrational, k_max: usize) -> Result<CFExpansion> {
    if q.signum() != Ordering::Greater {
        return Err(Error::domain(format!("expand_cf needs a positive value, got {q}")));
    }
    let c2 = q.c() * q.c();
    let d_big = q.b() * q.b() * q.d() * &c2;
    let (mut p, mut qq) = if q.b().is_positive() {
        (q.a() * q.c(), c2)
    } else {
        (-(q.a() * q.c()), -c2)
    };
    let s = d_big.sqrt();

    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut block = Vec::new();
    let (period_start, period_length) = loop {
        if let Some(&first) = seen.get(&(p.clone(), qq.clone())) {
            break (first, block.len() - first);
        }
        seen.insert((p.clone(), qq.clone()), block.len());
        let a = if qq.is_positive() {
            (&p + &s).div_floor(&qq)
        } else {
            -(&p + &s).div_floor(&-&qq) - 1
        };
        p = &a * &qq - &p;
        qq = (&d_big - &p * &p) / &qq;
        block.push(a);
    };

    let mut cf = CFExpansion {
        value: q.clone(),
        a0: block[0].clone(),
        partial_quotients: Vec::new(),
        period_start,
        period_length,
        block,
    };
    cf.partial_quotients = (1..=k_max).map(|k| cf.quotient(k)).collect();
    Ok(cf)
}

/// One approximant `A_k/B_k` and its signed error `D_k = B_k β − A_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub k: usize,
    pub numerator: BigInt,
    pub denominator: BigInt,
    pub d_exact: QuadraticIrrational,
    pub d_value: CertifiedFixedPoint,
}

/// Convergents `0 … k` from `A_{k+1} = a_{k+1}A_k + A_{k-1}` (same for `B`),
/// seeded by `A_{-1}=1, A_0=a_0, B_{-1}=0, B_0=1`.
pub fn convergents(cf: &CFExpansion, k: usize) -> Result<Vec<Convergent>> {
    if k > cf.partial_quotients.len() {
        return Err(Error::domain(format!(
            "requested {k} convergents but only {} quotients expanded",
            cf.partial_quotients.len()
        )));
    }
    let (mut a_prev, mut a_cur) = (BigInt::one(), cf.a0.clone());
    let (mut b_prev, mut b_cur) = (BigInt::zero(), BigInt::one());
    let mut out = Vec::with_capacity(k + 1);
    for j in 0..=k {
        if j > 0 {
            let q = &cf.partial_quotients[j - 1];
            let a_next = q * &a_cur + &a_prev;
            let b_next = q * &b_cur + &b_prev;
            a_prev = std::mem::replace(&mut a_cur, a_next);
            b_prev = std::mem::replace(&mut b_cur, b_next);
        }
        let d_exact = cf.value.mul_int(&b_cur)?.add_int(&-&a_cur);
        let d_value = d_exact.eval(BOUND_SCALE + qirr::decimal_digits(&b_cur))?;
        out.push(Convergent {
            k: j,
            numerator: a_cur.clone(),
            denominator: b_cur.clone(),
            d_exact,
            d_value,
        });
    }
    Ok(out)
}

/// `|mβ − N|` as an exact surd, `N` the nearest integer.
pub fn exact_dist(beta: &QuadraticIrrational, m: &BigInt) -> Result<QuadraticIrrational> {
    let scale = qirr::working_scale(m, DEFAULT_TARGET_DIGITS);
    let mut scale = scale;
    let nearest = loop {
        match norm_dist(&beta.scaled_value(m, scale)) {
            Ok((_, n)) => break n,
            Err(Error::PrecisionInsufficient { .. }) if scale < 4096 => scale *= 2,
            Err(e) => return Err(e),
        }
    };
    let x = beta.mul_int(m)?.add_int(&-nearest);
    Ok(if x.signum() == Ordering::Less { x.neg() } else { x })
}

/// Checks `‖B_k β‖ ≤ ‖jβ‖` for every `0 < j ≤ B_k` by exhaustive exact scan.
pub fn best_approx_check(q: &QuadraticIrrational, k: usize, j_max: u64) -> Result<bool> {
    if j_max > 100_000 {
        return Err(Error::domain("best_approx_check scans at most 1e5 multiples"));
    }
    let positive = if q.signum() == Ordering::Greater {
        q.clone()
    } else {
        q.frac()
    };
    let cf = expand_cf(&positive, k)?;
    let conv = convergents(&cf, k)?;
    let bk = conv[k].denominator.clone();
    let bk_u = bk.to_u64().filter(|&b| b <= j_max).ok_or_else(|| {
        Error::domain(format!("B_{k} = {bk} exceeds the scan limit {j_max}"))
    })?;
    let reference = exact_dist(q, &bk)?;
    for j in 1..=bk_u {
        let dj = exact_dist(q, &BigInt::from(j))?;
        if dj.cmp_same_radicand(&reference) == Some(Ordering::Less) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Convergent data of some `β ∈ (0,1)` up to the first denominator above a limit.
#[derive(Clone, Debug)]
pub struct OstrowskiBasis {
    pub beta: QuadraticIrrational,
    /// `a_0 (= 0), a_1, …, a_{L+1}`.
    pub quotients: Vec<BigInt>,
    /// `B_0 … B_L` with `B_L` the first denominator exceeding the limit.
    pub denominators: Vec<BigInt>,
    /// `A_0 … A_L`.
    pub numerators: Vec<BigInt>,
}

impl OstrowskiBasis {
    pub fn new(beta: &QuadraticIrrational, limit: &BigInt) -> Result<Self> {
        check_unit_interval(beta)?;
        let cf = expand_cf(beta, 0)?;
        let mut quotients = vec![cf.quotient(0)];
        let (mut a_prev, mut a_cur) = (BigInt::one(), cf.quotient(0));
        let (mut b_prev, mut b_cur) = (BigInt::zero(), BigInt::one());
        let mut denominators = vec![b_cur.clone()];
        let mut numerators = vec![a_cur.clone()];
        let mut k = 0;
        while &b_cur <= limit {
            k += 1;
            let q = cf.quotient(k);
            let a_next = &q * &a_cur + &a_prev;
            let b_next = &q * &b_cur + &b_prev;
            a_prev = std::mem::replace(&mut a_cur, a_next);
            b_prev = std::mem::replace(&mut b_cur, b_next);
            quotients.push(q);
            denominators.push(b_cur.clone());
            numerators.push(a_cur.clone());
        }
        quotients.push(cf.quotient(k + 1));
        Ok(Self {
            beta: beta.clone(),
            quotients,
            denominators,
            numerators,
        })
    }

    /// Largest index `p` with `B_p ≤ m` (ties between equal denominators go to
    /// the larger index).
    pub fn top_index(&self, m: &BigInt) -> usize {
        self.denominators
            .iter()
            .rposition(|b| b <= m)
            .unwrap_or(0)
    }

    /// `D_j = B_j β − A_j`, exact.
    pub fn d_exact(&self, j: usize) -> Result<QuadraticIrrational> {
        Ok(self
            .beta
            .mul_int(&self.denominators[j])?
            .add_int(&-&self.numerators[j]))
    }
}

fn check_unit_interval(beta: &QuadraticIrrational) -> Result<()> {
    if beta.signum() != Ordering::Greater || beta.floor() != BigInt::zero() {
        return Err(Error::domain(format!("β = {beta} must lie in (0, 1)")));
    }
    Ok(())
}

/// `m = Σ_j c_{j+1} B_j`; `coeffs[j]` holds `c_{j+1}`, the multiplier of `B_j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OstrowskiRep {
    pub m: BigInt,
    pub coeffs: Vec<BigInt>,
    pub beta: QuadraticIrrational,
}

impl OstrowskiRep {
    /// Coefficient of `B_j` (zero beyond the stored length).
    pub fn coeff(&self, j: usize) -> BigInt {
        self.coeffs.get(j).cloned().unwrap_or_default()
    }

    /// `γ(m)`: index of the smallest nonzero coefficient.
    pub fn type_index(&self) -> usize {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .expect("m ≥ 1 has a nonzero digit")
    }

    pub fn reconstruct(&self, basis: &OstrowskiBasis) -> BigInt {
        self.coeffs
            .iter()
            .zip(&basis.denominators)
            .map(|(c, b)| c * b)
            .sum()
    }

    /// `0 ≤ c_1 < a_1`, `0 ≤ c_{j+1} ≤ a_{j+1}`, and `c_j = 0` whenever
    /// `c_{j+1} = a_{j+1}`.
    pub fn satisfies_constraints(&self, basis: &OstrowskiBasis) -> bool {
        digits_admissible(&self.coeffs, &basis.quotients)
    }
}

/// Digit constraints of Ostrowski numeration for `coeffs[j] = c_{j+1}` against
/// `quotients[i] = a_i`.
pub fn digits_admissible(coeffs: &[BigInt], quotients: &[BigInt]) -> bool {
    for (j, c) in coeffs.iter().enumerate() {
        let a = &quotients[j + 1];
        if c.is_negative() || c > a {
            return false;
        }
        if j == 0 && c == a {
            return false;
        }
        if j > 0 && c == a && !coeffs[j - 1].is_zero() {
            return false;
        }
    }
    true
}

/// Greedy Ostrowski decomposition: divide by the largest `B_p ≤ m`, recurse on
/// the remainder.
pub fn ostrowski(m: &BigInt, beta: &QuadraticIrrational) -> Result<OstrowskiRep> {
    if m < &BigInt::one() {
        return Err(Error::domain(format!("ostrowski needs m ≥ 1, got {m}")));
    }
    let basis = OstrowskiBasis::new(beta, m)?;
    Ok(ostrowski_with(m, &basis))
}

pub fn ostrowski_with(m: &BigInt, basis: &OstrowskiBasis) -> OstrowskiRep {
    let p = basis.top_index(m);
    let mut coeffs = vec![BigInt::zero(); p + 1];
    let mut rem = m.clone();
    for j in (0..=p).rev() {
        let (c, r) = rem.div_rem(&basis.denominators[j]);
        coeffs[j] = c;
        rem = r;
    }
    OstrowskiRep {
        m: m.clone(),
        coeffs,
        beta: basis.beta.clone(),
    }
}

pub fn type_of(m: &BigInt, beta: &QuadraticIrrational) -> Result<usize> {
    Ok(ostrowski(m, beta)?.type_index())
}

/// Type statistics over `Z_n = {1, …, n}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeProfile {
    pub n: u64,
    pub beta: QuadraticIrrational,
    /// `γ_n*`.
    pub max_type: usize,
    /// `(l, c) → #A_{l,c}`: integers of type `l` whose lowest digit is `c`.
    pub histogram: BTreeMap<(usize, u64), u64>,
    /// `B_0 …` up to the first denominator above `n`.
    pub denominators: Vec<u64>,
}

impl TypeProfile {
    /// `2·log2(2n)`.
    pub fn max_type_bound(&self) -> f64 {
        2.0 * (2.0 * self.n as f64).log2()
    }

    /// Cardinality cap: `2⌊n/B_{l+1}⌋` below the maximal type, 1 at it.
    pub fn cardinality_bound(&self, l: usize) -> u64 {
        if l >= self.max_type {
            1
        } else {
            2 * (self.n / self.denominators[l + 1])
        }
    }

    /// Histogram cells exceeding [`Self::cardinality_bound`].
    pub fn cardinality_violations(&self) -> Vec<((usize, u64), u64, u64)> {
        self.histogram
            .iter()
            .filter_map(|(&(l, c), &count)| {
                let cap = self.cardinality_bound(l);
                (count > cap).then_some(((l, c), count, cap))
            })
            .collect()
    }
}

/// Exhaustive type histogram for `m = 1 … n`, `n ≤ 10^6`.
pub fn type_profile(n: u64, beta: &QuadraticIrrational) -> Result<TypeProfile> {
    if n == 0 || n > 1_000_000 {
        return Err(Error::domain("type_profile needs 1 ≤ n ≤ 10^6"));
    }
    let basis = OstrowskiBasis::new(beta, &BigInt::from(n))?;
    let dens: Vec<u64> = basis
        .denominators
        .iter()
        .map(|b| b.to_u64().expect("denominators up to n fit"))
        .collect();
    let mut histogram = BTreeMap::new();
    let mut max_type = 0;
    for m in 1..=n {
        let mut rem = m;
        let mut lowest = (0usize, 0u64);
        let top = dens.iter().rposition(|&b| b <= m).unwrap_or(0);
        for j in (0..=top).rev() {
            let c = rem / dens[j];
            rem %= dens[j];
            if c != 0 {
                lowest = (j, c);
            }
        }
        max_type = max_type.max(lowest.0);
        *histogram.entry(lowest).or_insert(0) += 1;
    }
    Ok(TypeProfile {
        n,
        beta: beta.clone(),
        max_type,
        histogram,
        denominators: dens,
    })
}

/// Lower bound on `‖mβ‖` from the Ostrowski digits of `m`, in the context
/// `Z_m` (the maximal type is taken over `1 … m`).
pub fn type_lower_bound(m: &BigInt, beta: &QuadraticIrrational) -> Result<CertifiedFixedPoint> {
    type_lower_bound_in(m, beta, m)
}

/// Case split on `γ(m)` relative to `γ_n*`:
///
/// * `γ = 0`: `min((c_1−1)|D_0| + (a_2−c_2)|D_1|, (a_1−c_1)|D_0| + c_2|D_1|)`,
///   or `min((c_1−1)|D_0|, (a_1−c_1)|D_0|)` when `γ_n* = 0` as well;
/// * `1 ≤ γ < γ_n*`: `(c_{γ+1}−1)/(2B_{γ+1}) + (a_{γ+2}−c_{γ+2})/(2B_{γ+2})`;
/// * `γ = γ_n* ≥ 1`: `c_{γ+1}·‖B_γ β‖`.
pub fn type_lower_bound_in(
    m: &BigInt,
    beta: &QuadraticIrrational,
    n: &BigInt,
) -> Result<CertifiedFixedPoint> {
    if beta.signum() != Ordering::Greater
        || beta.cmp_rational(&BigInt::one(), &BigInt::from(2)) != Ordering::Less
    {
        return Err(Error::domain(format!("type_lower_bound needs 0 < β < 1/2, got {beta}")));
    }
    if m <= &BigInt::one() || n < m {
        return Err(Error::domain("type_lower_bound needs 1 < m ≤ n"));
    }
    let basis = OstrowskiBasis::new(beta, n)?;
    let rep = ostrowski_with(m, &basis);
    let gamma = rep.type_index();
    let gamma_max = basis.top_index(n);
    let c = |j: usize| rep.coeff(j); // c_{j+1}
    let a = |i: usize| basis.quotients[i].clone();
    let abs_d = |j: usize| -> Result<CertifiedFixedPoint> {
        let d = basis.d_exact(j)?;
        let d = if d.signum() == Ordering::Less { d.neg() } else { d };
        d.eval(BOUND_SCALE + qirr::decimal_digits(&basis.denominators[j]))
    };
    let one = BigInt::one();

    let bound = if gamma == 0 {
        let d0 = abs_d(0)?;
        let first = d0.mul_int(&(c(0) - &one));
        let second = d0.mul_int(&(a(1) - c(0)));
        if gamma_max == 0 {
            first.min(&second)
        } else {
            let d1 = abs_d(1)?;
            let x = first.add(&d1.mul_int(&(a(2) - c(1))));
            let y = second.add(&d1.mul_int(&c(1)));
            x.min(&y)
        }
    } else if gamma < gamma_max {
        let den1 = &basis.denominators[gamma + 1] * 2;
        let den2 = &basis.denominators[gamma + 2] * 2;
        let x = CertifiedFixedPoint::from_ratio(&(c(gamma) - &one), &den1, BOUND_SCALE);
        let y = CertifiedFixedPoint::from_ratio(&(a(gamma + 2) - c(gamma + 1)), &den2, BOUND_SCALE);
        x.add(&y)
    } else {
        abs_d(gamma)?.mul_int(&c(gamma))
    };
    Ok(bound)
}

/// One evaluation of the largest-type sum
/// `φ(τ) = Σ_{j=1}^{⌊λn/B⌋} 1/(1 + n·j·‖Bτα‖)` with `B = B_{γ_n*}` the first
/// integer of maximal type for `β = frac(τα)` (reflected into `(0, 1/2)`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiValue {
    pub tau: u64,
    pub max_type: usize,
    pub first_of_type: u64,
    /// `‖Bτα‖`.
    pub dist: f64,
    pub terms: u64,
    pub value: f64,
    /// `φ(τ)/n`.
    pub normalized: f64,
}

pub fn phi_tau(
    tau: u64,
    alpha: &QuadraticIrrational,
    n: u64,
    lambda: Rational64,
) -> Result<PhiValue> {
    if lambda < Rational64::one() {
        return Err(Error::domain("λ must be at least 1"));
    }
    if n == 0 {
        return Err(Error::domain("φ(τ) needs n ≥ 1"));
    }
    let reach = (lambda * Rational64::from_integer(n as i64)).floor().to_integer() as u64;
    if tau == 0 || tau > reach {
        return Err(Error::domain(format!("τ = {tau} outside 1 ..= λn = {reach}")));
    }
    let tau_big = BigInt::from(tau);
    let beta = alpha.mul_int(&tau_big)?.frac();
    let beta = if beta.cmp_rational(&BigInt::one(), &BigInt::from(2)) == Ordering::Greater {
        beta.neg().add_int(&BigInt::one())
    } else {
        beta
    };
    let basis = OstrowskiBasis::new(&beta, &BigInt::from(n))?;
    let max_type = basis.top_index(&BigInt::from(n));
    let first = basis.denominators[max_type].to_u64().expect("≤ n");

    let terms = ((*lambda.numer() as i128 * n as i128)
        / (*lambda.denom() as i128 * first as i128)) as u64;
    let dist = scaled_dist_auto(alpha, &(BigInt::from(first) * &tau_big), DEFAULT_TARGET_DIGITS)?
        .to_f64();
    let nf = n as f64;
    let value: f64 = (1..=terms)
        .map(|j| 1.0 / (1.0 + nf * j as f64 * dist))
        .sum();
    Ok(PhiValue {
        tau,
        max_type,
        first_of_type: first,
        dist,
        terms,
        value,
        normalized: value / nf,
    })
}

/// `λ·log(n)/(C·n)`, the small-distance cap on `φ(τ)/n`.
pub fn phi_small_distance_cap(n: u64, lambda: Rational64, c_alpha: f64) -> f64 {
    let l = *lambda.numer() as f64 / *lambda.denom() as f64;
    l * (n as f64).ln() / (c_alpha * n as f64)
}

/// Exact divisor count by trial division, `1 ≤ m ≤ 10^12`.
pub fn count_divisors(m: u64) -> Result<u64> {
    if m == 0 || m > 1_000_000_000_000 {
        return Err(Error::domain("count_divisors needs 1 ≤ m ≤ 10^12"));
    }
    let mut count = 0;
    let mut i = 1u64;
    while i * i <= m {
        if m.is_multiple_of(i) {
            count += if i * i == m { 1 } else { 2 };
        }
        i += 1;
    }
    Ok(count)
}

/// `2^{(1+ε)·ln m / ln ln m}`.
pub fn divisor_bound(m: u64, eps: f64) -> f64 {
    let l = (m as f64).ln();
    2f64.powf((1.0 + eps) * l / l.ln())
}

/// Golden-ratio Fibonacci terms with `F_0 = F_1 = 1`.
pub fn fibonacci(count: usize) -> Vec<BigInt> {
    let mut f = vec![BigInt::one(), BigInt::one()];
    while f.len() < count {
        let next = &f[f.len() - 1] + &f[f.len() - 2];
        f.push(next);
    }
    f.truncate(count);
    f
}

/// Rational approximation of `qα` (α the golden ratio) through a Fibonacci
/// term `F_Q` divisible by `q`: `min_p |qα − qp/F_Q|` against `q/(√5·F_Q²)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FibApprox {
    pub q: u64,
    pub index: usize,
    pub term: BigInt,
    pub p: BigInt,
    pub error: CertifiedFixedPoint,
    pub bound: CertifiedFixedPoint,
    /// Exact outcome of `error ≤ bound`.
    pub holds: bool,
}

pub fn fibonacci_approximation(q: u64, index: usize) -> Result<FibApprox> {
    let term = fibonacci(index + 1).pop().expect("nonempty");
    if q == 0 || !(&term % q).is_zero() {
        return Err(Error::domain(format!("F_{index} = {term} is not divisible by {q}")));
    }
    let golden = QuadraticIrrational::golden();
    let scale = 2 * qirr::decimal_digits(&term) + BOUND_SCALE;
    let (_, p) = norm_dist(&golden.scaled_value(&term, scale))?;
    // x = F·α − p, exact; |qα − qp/F| = q|x|/F
    let x = golden.mul_int(&term)?.add_int(&-&p);
    let x = if x.signum() == Ordering::Less { x.neg() } else { x };
    let qb = BigInt::from(q);
    let err_exact = QuadraticIrrational::new(
        x.a() * &qb,
        x.b() * &qb,
        x.c() * &term,
        x.d().clone(),
    )?;
    let f2 = &term * &term;
    let bound_exact = QuadraticIrrational::new(0, qb.clone(), BigInt::from(5) * &f2, 5)?;
    // |x| ≤ 1/(√5·F)  ⟺  c'² − 5F²(a'² + 5b'²) − 10F²a'b'√5 ≥ 0
    let (a1, b1, c1) = (x.a(), x.b(), x.c());
    let lhs = c1 * c1 - BigInt::from(5) * &f2 * (a1 * a1 + BigInt::from(5) * b1 * b1);
    let surd = -(BigInt::from(10) * &f2 * a1 * b1);
    let holds = qirr::surd_sign(&lhs, &surd, x.d()) != Ordering::Less;
    Ok(FibApprox {
        q,
        index,
        term,
        p,
        error: err_exact.eval(scale)?,
        bound: bound_exact.eval(scale)?,
        holds,
    })
}
