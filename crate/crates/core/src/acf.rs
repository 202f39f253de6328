//! Aperiodic and windowed autocorrelation, worst-case decay curves, the
//! Dirichlet-kernel majorant `H_L` and the analytic ACF upper bound.
//!
//! Sums keep their literal limits: `n − τ + 1` terms for the aperiodic ACF and
//! `n + 1` for the windowed one, both scaled by `1/n`. Only ratios against the
//! zero lag are compared, so the extra term cancels.

use std::io::Write;

use num_bigint::BigInt;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qirr::{FracEvaluator, QuadraticIrrational};
use crate::sequences::{generate, SequenceSpec};

/// Length from which full profiles go through the FFT.
pub const FFT_THRESHOLD: usize = 512;
/// Relative disagreement tolerated between the FFT and direct sums.
const FFT_CHECK_TOL: f64 = 1e-10;
/// Default for the additive constant `C′` in [`acf_upper_bound`].
pub const DEFAULT_C_PRIME: f64 = 3.0;

/// `r̃(τ) = (1/n) Σ_{s=0}^{n−τ} u_s conj(u_{s+τ})`.
pub fn aperiodic_acf(u: &[Complex64], n: usize, tau: usize) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::domain("ACF window n must be at least 1"));
    }
    if tau > n {
        return Err(Error::domain(format!("lag τ = {tau} exceeds n = {n}")));
    }
    if u.len() < n + 1 {
        return Err(Error::domain(format!(
            "ACF over n = {n} needs {} samples, got {}",
            n + 1,
            u.len()
        )));
    }
    Ok(direct_lag(u, n, tau))
}

fn direct_lag(u: &[Complex64], n: usize, tau: usize) -> Complex64 {
    let s: Complex64 = (0..=n - tau).map(|s| u[s] * u[s + tau].conj()).sum();
    s / n as f64
}

/// `r(t, τ) = (1/n) Σ_{s=t}^{t+n} u_s conj(u_{s+τ})`; `τ` may be negative.
pub fn windowed_acf(u: &[Complex64], t: usize, n: usize, tau: i64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::domain("ACF window n must be at least 1"));
    }
    let lo = t as i64 + tau.min(0);
    let hi = (t + n) as i64 + tau.max(0);
    if lo < 0 || hi >= u.len() as i64 {
        return Err(Error::domain(format!(
            "window t = {t}, n = {n}, τ = {tau} needs indices {lo}..={hi}, have 0..{}",
            u.len()
        )));
    }
    let s: Complex64 = (t..=t + n)
        .map(|s| u[s] * u[(s as i64 + tau) as usize].conj())
        .sum();
    Ok(s / n as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AcfKind {
    Aperiodic,
    Windowed,
}

/// ACF values over a contiguous lag range. Aperiodic profiles store
/// `τ = 0 ..= n` and answer negative lags by Hermitian symmetry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AcfProfile {
    pub kind: AcfKind,
    pub n: usize,
    /// Window start for windowed profiles.
    pub t: Option<usize>,
    pub tau_min: i64,
    pub values: Vec<Complex64>,
    /// `r(0)` or `r(t, 0)`.
    pub normalizer: f64,
}

impl AcfProfile {
    pub fn tau_max(&self) -> i64 {
        self.tau_min + self.values.len() as i64 - 1
    }

    pub fn value(&self, tau: i64) -> Option<Complex64> {
        if self.kind == AcfKind::Aperiodic && tau < 0 {
            return self.value(-tau).map(|v| v.conj());
        }
        let i = tau - self.tau_min;
        (i >= 0).then(|| self.values.get(i as usize).copied()).flatten()
    }

    /// `max_{τ ≠ 0} |r(τ)| / r(0)` over the stored positive lags, with its lag.
    pub fn max_ratio(&self) -> (f64, i64) {
        let mut best = (0.0, 0);
        for (i, v) in self.values.iter().enumerate() {
            let tau = self.tau_min + i as i64;
            if tau == 0 {
                continue;
            }
            let r = v.norm() / self.normalizer;
            if r > best.0 {
                best = (r, tau);
            }
        }
        best
    }
}

/// Aperiodic profile for lags `0 ..= n`; FFT from [`FFT_THRESHOLD`] on, with
/// a direct cross-check at a few lags (falls back to direct on disagreement).
pub fn aperiodic_profile(u: &[Complex64], n: usize) -> Result<AcfProfile> {
    let values = if n >= FFT_THRESHOLD {
        let fast = aperiodic_values_fft(u, n)?;
        if fft_agrees(u, n, &fast) {
            fast
        } else {
            aperiodic_values_direct(u, n)?
        }
    } else {
        aperiodic_values_direct(u, n)?
    };
    profile_from(values, n)
}

pub fn aperiodic_profile_direct(u: &[Complex64], n: usize) -> Result<AcfProfile> {
    profile_from(aperiodic_values_direct(u, n)?, n)
}

pub fn aperiodic_profile_fft(u: &[Complex64], n: usize) -> Result<AcfProfile> {
    profile_from(aperiodic_values_fft(u, n)?, n)
}

fn profile_from(values: Vec<Complex64>, n: usize) -> Result<AcfProfile> {
    let normalizer = values[0].re;
    if normalizer <= 0.0 {
        return Err(Error::domain("sequence has zero energy on the window"));
    }
    Ok(AcfProfile {
        kind: AcfKind::Aperiodic,
        n,
        t: None,
        tau_min: 0,
        values,
        normalizer,
    })
}

fn aperiodic_values_direct(u: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    aperiodic_acf(u, n, 0)?;
    Ok((0..=n).into_par_iter().map(|tau| direct_lag(u, n, tau)).collect())
}

/// `r̃(τ) = conj(IFFT(|X|²)[τ]) / (N·n)` with `x = u_0 … u_n` zero-padded to
/// `N ≥ 2(n+1)`.
fn aperiodic_values_fft(u: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    aperiodic_acf(u, n, 0)?;
    let size = (2 * (n + 1)).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); size];
    buf[..=n].copy_from_slice(&u[..=n]);
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for x in buf.iter_mut() {
        *x = Complex64::new(x.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let scale = 1.0 / (size as f64 * n as f64);
    Ok(buf[..=n].iter().map(|x| x.conj() * scale).collect())
}

fn fft_agrees(u: &[Complex64], n: usize, fast: &[Complex64]) -> bool {
    let r0 = fast[0].norm().max(f64::MIN_POSITIVE);
    let probes = [0, 1, n / 3, n / 2, n - 1, n];
    probes
        .iter()
        .all(|&tau| (fast[tau] - direct_lag(u, n, tau)).norm() <= FFT_CHECK_TOL * r0)
}

/// Windowed profile at a fixed start `t` for lags `tau_min ..= tau_max`.
pub fn windowed_profile(
    u: &[Complex64],
    t: usize,
    n: usize,
    tau_min: i64,
    tau_max: i64,
) -> Result<AcfProfile> {
    if tau_min > 0 || tau_max < 0 {
        return Err(Error::domain("windowed lag range must contain 0"));
    }
    let values = (tau_min..=tau_max)
        .map(|tau| windowed_acf(u, t, n, tau))
        .collect::<Result<Vec<_>>>()?;
    let normalizer = values[(-tau_min) as usize].re;
    if normalizer <= 0.0 {
        return Err(Error::domain("sequence has zero energy on the window"));
    }
    Ok(AcfProfile {
        kind: AcfKind::Windowed,
        n,
        t: Some(t),
        tau_min,
        values,
        normalizer,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n: usize,
    pub max_ratio: f64,
    pub argmax_tau: usize,
}

/// Worst-case normalized ACF `max_{1≤τ≤n} |r̃(τ)|/r̃(0)` at each length. One
/// sequence of `max(n)+1` samples is generated and shared.
pub fn worst_case_curve(spec: &SequenceSpec, lengths: &[usize]) -> Result<Vec<CurvePoint>> {
    if lengths.is_empty() {
        return Ok(Vec::new());
    }
    if lengths.windows(2).any(|w| w[0] >= w[1]) || lengths[0] == 0 {
        return Err(Error::domain("lengths must be positive and strictly ascending"));
    }
    let max_n = *lengths.last().unwrap();
    let seq = generate(&spec.clone().with_length(max_n + 1))?;
    worst_case_curve_samples(&seq.samples, lengths)
}

/// [`worst_case_curve`] on given samples (`u_0` first).
pub fn worst_case_curve_samples(u: &[Complex64], lengths: &[usize]) -> Result<Vec<CurvePoint>> {
    lengths
        .par_iter()
        .map(|&n| {
            let p = aperiodic_profile(u, n)?;
            let (max_ratio, tau) = p.max_ratio();
            Ok(CurvePoint {
                n,
                max_ratio,
                argmax_tau: tau as usize,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindowedWorst {
    pub n: usize,
    pub p: usize,
    pub max_ratio: f64,
    pub argmax_t: usize,
    pub argmax_tau: i64,
}

/// `max |r(t,τ)|/r(t,0)` over `t ∈ [1, p]`, `τ ≠ 0`, `0 ≤ t+τ ≤ p`, where
/// `p = ⌊λn⌋`. Windows with zero energy are skipped.
pub fn windowed_worst_case(spec: &SequenceSpec, n: usize, lambda: f64) -> Result<WindowedWorst> {
    if n == 0 || lambda.is_nan() || lambda < 1.0 {
        return Err(Error::domain("windowed_worst_case needs n ≥ 1 and λ ≥ 1"));
    }
    let p = (lambda * n as f64).floor() as usize;
    let seq = generate(&spec.clone().with_length(p + n + 1))?;
    windowed_worst_case_samples(&seq.samples, n, p)
}

/// Scan over samples `u_0 … u_{p+n}` using per-lag prefix sums.
pub fn windowed_worst_case_samples(u: &[Complex64], n: usize, p: usize) -> Result<WindowedWorst> {
    if u.len() < p + n + 1 {
        return Err(Error::domain(format!("need {} samples, got {}", p + n + 1, u.len())));
    }
    let len = p + n + 1;
    let window_sums = |tau: i64| -> Vec<Complex64> {
        // prefix[s] = Σ_{k<s} u_k conj(u_{k+τ}) over indices where both exist
        let mut prefix = vec![Complex64::new(0.0, 0.0); len + 1];
        for s in 0..len {
            let j = s as i64 + tau;
            let term = if j >= 0 && (j as usize) < len {
                u[s] * u[j as usize].conj()
            } else {
                Complex64::new(0.0, 0.0)
            };
            prefix[s + 1] = prefix[s] + term;
        }
        prefix
    };
    let energy = window_sums(0);
    let r0 = |t: usize| (energy[t + n + 1] - energy[t]).re / n as f64;

    let lags: Vec<i64> = (-(p as i64)..=(p as i64 - 1)).filter(|&x| x != 0).collect();
    let best = lags
        .par_iter()
        .map(|&tau| {
            let prefix = window_sums(tau);
            let mut best = (0.0f64, 0usize, tau);
            let t_lo = 1.max(-tau) as usize;
            let t_hi = (p as i64).min(p as i64 - tau) as usize;
            for t in t_lo..=t_hi {
                let e = r0(t);
                if e <= 0.0 {
                    continue;
                }
                let r = ((prefix[t + n + 1] - prefix[t]) / n as f64).norm() / e;
                if r > best.0 {
                    best = (r, t, tau);
                }
            }
            best
        })
        .reduce(
            || (0.0, 0, 0),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && (b.2, b.1) < (a.2, a.1)) {
                    b
                } else {
                    a
                }
            },
        );
    Ok(WindowedWorst {
        n,
        p,
        max_ratio: best.0,
        argmax_t: best.1,
        argmax_tau: best.2,
    })
}

/// Distance from `x` to the nearest integer.
pub fn nearest_int_dist(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// `H_L(x) = 3L / (1 + L‖x‖)`, a majorant of `|sin(2πLx)/sin(2πx)|`.
pub fn h_bound(l: u64, x: f64) -> Result<f64> {
    if l == 0 {
        return Err(Error::domain("H_L needs L ≥ 1"));
    }
    let l = l as f64;
    Ok(3.0 * l / (1.0 + l * nearest_int_dist(x)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AcfBound {
    /// `(3/n) Σ_{k=0}^{n} 1/(1 + n‖kτα‖)`.
    pub sum: f64,
    /// `√sum`.
    pub bound: f64,
    /// `√(sum + C′/n)`.
    pub bound_with_constant: f64,
    pub c_prime: f64,
}

/// Upper bound on `|r̃(τ)|` for the cubic chirp with parameter `α`; the
/// distances `‖kτα‖` come from certified fractional parts.
pub fn acf_upper_bound(
    alpha: &QuadraticIrrational,
    n: usize,
    tau: usize,
    c_prime: f64,
) -> Result<AcfBound> {
    if tau == 0 || tau > n {
        return Err(Error::domain(format!("acf_upper_bound needs 1 ≤ τ ≤ n, got τ = {tau}")));
    }
    let eval = FracEvaluator::new(alpha, &BigInt::from(n as u64 * tau as u64), 20);
    acf_upper_bound_with(&eval, n, tau, c_prime)
}

/// [`acf_upper_bound`] reusing an evaluator valid up to `n·τ`.
pub fn acf_upper_bound_with(
    eval: &FracEvaluator,
    n: usize,
    tau: usize,
    c_prime: f64,
) -> Result<AcfBound> {
    let nf = n as f64;
    let total: f64 = (0..=n as u64)
        .map(|k| {
            let f = eval.frac_f64(&BigInt::from(k * tau as u64));
            1.0 / (1.0 + nf * f.min(1.0 - f))
        })
        .sum();
    let sum = 3.0 / nf * total;
    Ok(AcfBound {
        sum,
        bound: sum.sqrt(),
        bound_with_constant: (sum + c_prime / nf).sqrt(),
        c_prime,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    /// Model `max_ratio(n) ≈ C·n^{−γ}`.
    pub c: f64,
    pub gamma: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    pub sample_lengths: Vec<usize>,
    /// Lengths dropped for a non-positive ratio.
    pub excluded: Vec<usize>,
}

/// Least-squares line through `(ln n, ln ratio)`; `γ` is minus the slope.
pub fn fit_decay(curve: &[CurvePoint]) -> Result<DecayFit> {
    let (used, excluded): (Vec<&CurvePoint>, Vec<&CurvePoint>) = curve
        .iter()
        .partition(|p| p.max_ratio > 0.0 && p.max_ratio.is_finite());
    if used.len() < 4 {
        return Err(Error::domain(format!(
            "decay fit needs 4 positive points, got {} (excluded n = {:?})",
            used.len(),
            excluded.iter().map(|p| p.n).collect::<Vec<_>>()
        )));
    }
    let xs: Vec<f64> = used.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.max_ratio.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("decay fit needs at least two distinct lengths"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(DecayFit {
        c: intercept.exp(),
        gamma: -slope,
        residual,
        sample_lengths: used.iter().map(|p| p.n).collect(),
        excluded: excluded.iter().map(|p| p.n).collect(),
    })
}

/// `n,max_ratio,argmax_tau` rows.
pub fn write_curve_csv<W: Write>(curve: &[CurvePoint], mut w: W) -> Result<()> {
    writeln!(w, "n,max_ratio,argmax_tau")?;
    for p in curve {
        writeln!(w, "{},{:e},{}", p.n, p.max_ratio, p.argmax_tau)?;
    }
    Ok(())
}
