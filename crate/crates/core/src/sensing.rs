//! Toeplitz sensing matrices driven by a probing sequence, Gershgorin RIP
//! certificates, Jacobi eigenvalue extremes, the condition-number Monte Carlo
//! and a sparse FIR identification demo (OMP).
//!
//! Matrices use implicit storage: an entry is looked up in the generating
//! sequence when needed. Gram entries between columns `j` and `k` are windowed
//! lag sums `Σ_s u_s conj(u_{s+τ})` with `τ = k − j`, so an `n`-row matrix
//! carries the ACF with window `n − 1`.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequences::{generate, ComplexSequence, SequenceSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToeplitzKind {
    /// `n × p`, `U[i][j] = u_{i−j}` for `i ≥ j`, zero above the diagonal.
    LowerTriangular,
    /// `(n+p−1) × p`, column `j` is `u_0 … u_{n−1}` shifted down by `j`.
    ZeroPaddedFat,
    /// `n × p`, `U[i][j] = u_{p+i−j}` (steady-state observation window).
    SteadyState,
}

impl FromStr for ToeplitzKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "lower_triangular" | "lower" | "triangular" => Ok(Self::LowerTriangular),
            "zero_padded_fat" | "fat" | "zero_padded" => Ok(Self::ZeroPaddedFat),
            "steady_state" | "steady" => Ok(Self::SteadyState),
            other => Err(Error::invalid(format!("unknown Toeplitz kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SensingMatrix {
    pub kind: ToeplitzKind,
    /// Sequence window length the kind is built from.
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    /// `u_0, u_1, …` (only the prefix the kind needs).
    pub samples: Vec<Complex64>,
    pub source: SequenceSpec,
}

/// Samples `u_0 …` a kind needs for an `n`-window, `p`-column matrix.
pub fn required_samples(kind: ToeplitzKind, n: usize, p: usize) -> usize {
    match kind {
        ToeplitzKind::LowerTriangular | ToeplitzKind::ZeroPaddedFat => n,
        ToeplitzKind::SteadyState => p + n,
    }
}

pub fn build_toeplitz(
    seq: &ComplexSequence,
    n: usize,
    p: usize,
    kind: ToeplitzKind,
) -> Result<SensingMatrix> {
    if n == 0 || p == 0 {
        return Err(Error::domain("sensing matrix needs n ≥ 1 and p ≥ 1"));
    }
    if seq.start_index != 0 {
        return Err(Error::domain("sensing sequences must start at index 0"));
    }
    let need = required_samples(kind, n, p);
    if seq.len() < need {
        return Err(Error::domain(format!(
            "{kind:?} with n = {n}, p = {p} needs {need} samples, got {}",
            seq.len()
        )));
    }
    let rows = match kind {
        ToeplitzKind::ZeroPaddedFat => n + p - 1,
        _ => n,
    };
    Ok(SensingMatrix {
        kind,
        n,
        rows,
        cols: p,
        samples: seq.samples[..need].to_vec(),
        source: seq.spec.clone(),
    })
}

/// Generates the sequence for `spec` and builds the matrix.
pub fn build_from_spec(
    spec: &SequenceSpec,
    n: usize,
    p: usize,
    kind: ToeplitzKind,
) -> Result<SensingMatrix> {
    let seq = generate(&spec.clone().with_start(0).with_length(required_samples(kind, n, p)))?;
    build_toeplitz(&seq, n, p, kind)
}

impl SensingMatrix {
    /// Index into the sequence for entry `(i, j)`, `None` for structural zeros.
    pub fn seq_index(&self, i: usize, j: usize) -> Option<usize> {
        match self.kind {
            ToeplitzKind::LowerTriangular => (i >= j).then(|| i - j),
            ToeplitzKind::ZeroPaddedFat => (i >= j && i - j < self.n).then(|| i - j),
            ToeplitzKind::SteadyState => Some(self.cols + i - j),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.seq_index(i, j)
            .map_or(Complex64::new(0.0, 0.0), |s| self.samples[s])
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.entry(i, j)).collect()
    }

    pub fn dense(&self) -> Vec<Vec<Complex64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    pub fn is_real(&self) -> bool {
        self.samples.iter().all(|u| u.im == 0.0)
    }

    /// Inclusive range of `s` in `G_jk = Σ_s u_s conj(u_{s+τ})`, `τ = k − j`.
    fn lag_window(&self, j: usize, k: usize) -> Option<(usize, usize)> {
        let (n, p) = (self.n as i64, self.cols as i64);
        let (j, k) = (j as i64, k as i64);
        let tau = k - j;
        let (lo, hi) = match self.kind {
            ToeplitzKind::LowerTriangular => ((-tau).max(0), n - 1 - k.max(j) + (-tau).max(0)),
            ToeplitzKind::ZeroPaddedFat => ((-tau).max(0), n - 1 - tau.max(0)),
            ToeplitzKind::SteadyState => (p - k, p - k + n - 1),
        };
        (hi >= lo && lo >= 0).then_some((lo as usize, hi as usize))
    }

    /// `G_jk = Σ_i conj(U_ij) U_ik`.
    pub fn gram_entry(&self, j: usize, k: usize) -> Complex64 {
        let tau = k as i64 - j as i64;
        match self.lag_window(j, k) {
            Some((lo, hi)) => (lo..=hi)
                .map(|s| self.samples[s] * self.samples[(s as i64 + tau) as usize].conj())
                .sum(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    fn check_subset(&self, subset: &[usize]) -> Result<()> {
        if subset.is_empty() {
            return Err(Error::domain("column subset is empty"));
        }
        let mut sorted = subset.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("column subset has repeated indices"));
        }
        if *sorted.last().unwrap() >= self.cols {
            return Err(Error::domain(format!("column index beyond p = {}", self.cols)));
        }
        Ok(())
    }

    /// Gram matrix of the selected columns, entry `(a, b)` = `G_{s_a s_b}`.
    pub fn gram(&self, subset: &[usize]) -> Result<CMatrix> {
        self.check_subset(subset)?;
        let q = subset.len();
        let mut g = CMatrix::zeros(q);
        for a in 0..q {
            for b in a..q {
                let v = self.gram_entry(subset[a], subset[b]);
                g.set(a, b, v);
                g.set(b, a, v.conj());
            }
        }
        Ok(g)
    }
}

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), dim * dim);
        Self {
            dim,
            data: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        let mut m = Self::zeros(idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m.set(a, b, self.get(i, j));
            }
        }
        m
    }
}

/// `Σ = D^{-1/2} G D^{-1/2}` with `D = diag(G)`; the diagonal is set to exactly 1.
pub fn column_correlation(u: &SensingMatrix, subset: &[usize]) -> Result<CMatrix> {
    let g = u.gram(subset)?;
    normalize_gram(&g)
}

pub fn normalize_gram(g: &CMatrix) -> Result<CMatrix> {
    let d: Vec<f64> = (0..g.dim).map(|i| g.get(i, i).re).collect();
    if let Some(i) = d.iter().position(|&x| x <= 0.0) {
        return Err(Error::domain(format!("column {i} of the subset has zero norm")));
    }
    let mut s = CMatrix::zeros(g.dim);
    for i in 0..g.dim {
        for j in 0..g.dim {
            let v = if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                g.get(i, j) / (d[i] * d[j]).sqrt()
            };
            s.set(i, j, v);
        }
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GershgorinR {
    /// Sum of all off-diagonal row-normalized magnitudes over the subset.
    pub full_sum: f64,
    /// Largest single-row sum; the Gershgorin radius used for certification.
    pub row_max: f64,
}

/// Radii from `D^{-1} G`, which is similar to `Σ`: row `t` is normalized by
/// `G_tt`, mirroring `|r(t, s−t)| / |r(t, 0)|`.
pub fn gershgorin_r(u: &SensingMatrix, subset: &[usize]) -> Result<GershgorinR> {
    let g = u.gram(subset)?;
    gershgorin_from_gram(&g)
}

pub fn gershgorin_from_gram(g: &CMatrix) -> Result<GershgorinR> {
    let mut full_sum = 0.0;
    let mut row_max = 0.0f64;
    for i in 0..g.dim {
        let d = g.get(i, i).re;
        if d <= 0.0 {
            return Err(Error::domain(format!("column {i} of the subset has zero norm")));
        }
        let row: f64 = (0..g.dim)
            .filter(|&j| j != i)
            .map(|j| g.get(i, j).norm() / d)
            .sum();
        full_sum += row;
        row_max = row_max.max(row);
    }
    Ok(GershgorinR { full_sum, row_max })
}

/// Largest matrix accepted by [`eig_extremes`].
pub const MAX_EIG_DIM: usize = 512;
const HERMITIAN_TOL: f64 = 1e-8;
const JACOBI_TOL: f64 = 1e-10;

/// Extreme eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.
/// Complex input goes through the real embedding `[[A, −B], [B, A]]`, whose
/// spectrum is that of `A + iB` with every eigenvalue doubled.
pub fn eig_extremes(m: &CMatrix) -> Result<(f64, f64)> {
    let ev = eigenvalues(m)?;
    Ok((ev[0], ev[ev.len() - 1]))
}

/// All eigenvalues, ascending (with doubled multiplicity for complex input).
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    if m.dim == 0 {
        return Err(Error::domain("empty matrix"));
    }
    if m.dim > MAX_EIG_DIM {
        return Err(Error::domain(format!("eigen solver limited to {MAX_EIG_DIM}×{MAX_EIG_DIM}")));
    }
    let asym = m.max_asymmetry();
    if asym > HERMITIAN_TOL {
        return Err(Error::domain(format!("matrix is not Hermitian (asymmetry {asym:.3e})")));
    }
    let n = m.dim;
    let real = m.data.iter().all(|z| z.im == 0.0);
    let (dim, a) = if real {
        (n, m.data.iter().map(|z| z.re).collect::<Vec<f64>>())
    } else {
        let d = 2 * n;
        let mut a = vec![0.0; d * d];
        for i in 0..n {
            for j in 0..n {
                let z = m.get(i, j);
                a[i * d + j] = z.re;
                a[(i + n) * d + j + n] = z.re;
                a[i * d + j + n] = -z.im;
                a[(i + n) * d + j] = z.im;
            }
        }
        (d, a)
    };
    let mut ev = jacobi_eigenvalues(a, dim)?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

fn jacobi_eigenvalues(mut a: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    let fro = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = JACOBI_TOL * fro.max(1.0);
    for _sweep in 0..100 {
        let off = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= tol {
            return Ok((0..n).map(|i| a[i * n + i]).collect());
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::IllConditioned("Jacobi iteration did not converge in 100 sweeps".into()))
}

/// Worst row-normalized Gram magnitude per lag: `m(τ) = max_j |G_{j,j+τ}| / G_jj`
/// for `τ = ±1 … ±(p−1)`, each lag once.
pub fn lag_ratio_maxima(u: &SensingMatrix) -> Vec<(i64, f64)> {
    let p = u.cols as i64;
    let len = u.samples.len();
    let lags: Vec<i64> = (-(p - 1)..=p - 1).filter(|&t| t != 0).collect();
    let prefix = |tau: i64| -> Vec<Complex64> {
        let mut acc = vec![Complex64::new(0.0, 0.0); len + 1];
        for s in 0..len {
            let t = s as i64 + tau;
            let w = if t >= 0 && (t as usize) < len {
                u.samples[s] * u.samples[t as usize].conj()
            } else {
                Complex64::new(0.0, 0.0)
            };
            acc[s + 1] = acc[s] + w;
        }
        acc
    };
    let energy = prefix(0);
    let window = |acc: &[Complex64], j: usize, k: usize| -> Complex64 {
        match u.lag_window(j, k) {
            Some((lo, hi)) => acc[hi + 1] - acc[lo],
            None => Complex64::new(0.0, 0.0),
        }
    };
    lags.par_iter()
        .map(|&tau| {
            let acc = prefix(tau);
            let j_lo = 0.max(-tau) as usize;
            let j_hi = (p - 1).min(p - 1 - tau) as usize;
            let worst = (j_lo..=j_hi)
                .filter_map(|j| {
                    let d = window(&energy, j, j).re;
                    let k = (j as i64 + tau) as usize;
                    (d > 0.0).then(|| window(&acc, j, k).norm() / d)
                })
                .fold(0.0f64, f64::max);
            (tau, worst)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RipOrder {
    /// Certified order: the `q` largest entries of the lag multiset sum below 1.
    pub q: usize,
    /// Sum of the `q` largest entries (the Gershgorin radius certificate).
    pub r_bound: f64,
    /// Largest normalized off-diagonal magnitude over all lags.
    pub max_coherence: f64,
}

/// Largest `q ≤ p` whose `q` largest worst-case lag ratios (both signs of
/// each lag counted) sum to less than 1. Every row of any size-`q` subset has
/// `q − 1` off-diagonals, each bounded by a distinct entry of that multiset.
pub fn rip_order_bound(u: &SensingMatrix) -> RipOrder {
    let mut ratios: Vec<f64> = lag_ratio_maxima(u).into_iter().map(|(_, r)| r).collect();
    ratios.sort_by(|a, b| b.total_cmp(a));
    let mut sum = 0.0;
    let mut q = 0;
    for r in &ratios {
        if q == u.cols || sum + r >= 1.0 {
            break;
        }
        sum += r;
        q += 1;
    }
    if q == ratios.len() {
        q = u.cols;
    }
    RipOrder {
        q: q.max(1),
        r_bound: sum,
        max_coherence: ratios.first().copied().unwrap_or(0.0),
    }
}

/// Uniform size-`q` subset of `0..p`, sorted.
pub fn random_subset<R: Rng>(rng: &mut R, p: usize, q: usize) -> Vec<usize> {
    let mut s = sample(rng, p, q).into_vec();
    s.sort_unstable();
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsetEigs {
    pub subset: Vec<usize>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub r_row_max: f64,
    pub r_full_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RipReport {
    pub q: usize,
    pub r_bound: f64,
    pub certified: bool,
    pub sampled_eigs: Vec<SubsetEigs>,
    /// `max(1 − λmin, λmax − 1)` over the sampled subsets.
    pub delta_q_estimate: f64,
}

pub fn subset_eigs(u: &SensingMatrix, subset: &[usize]) -> Result<SubsetEigs> {
    let g = u.gram(subset)?;
    let r = gershgorin_from_gram(&g)?;
    let (lambda_min, lambda_max) = eig_extremes(&normalize_gram(&g)?)?;
    Ok(SubsetEigs {
        subset: subset.to_vec(),
        lambda_min,
        lambda_max,
        r_row_max: r.row_max,
        r_full_sum: r.full_sum,
    })
}

/// [`rip_order_bound`] plus eigenvalue checks on `subsets` random subsets of
/// the certified size.
pub fn rip_report(u: &SensingMatrix, subsets: usize, seed: u64) -> Result<RipReport> {
    let order = rip_order_bound(u);
    let q = order.q.min(u.cols);
    let sampled_eigs = (0..subsets)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, q as u64, i as u64));
            subset_eigs(u, &random_subset(&mut rng, u.cols, q))
        })
        .collect::<Result<Vec<_>>>()?;
    let delta_q_estimate = sampled_eigs
        .iter()
        .map(|e| (1.0 - e.lambda_min).max(e.lambda_max - 1.0))
        .fold(0.0, f64::max);
    Ok(RipReport {
        q,
        r_bound: order.r_bound,
        certified: order.r_bound < 1.0,
        sampled_eigs,
        delta_q_estimate,
    })
}

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-cell seed `splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b)`.
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b)
}

/// Column or sparsity count as a function of `n`: `floor(num·n/den) + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeRule {
    pub num: u64,
    pub den: u64,
    pub offset: u64,
}

impl SizeRule {
    pub fn apply(&self, n: usize) -> usize {
        (self.num * n as u64 / self.den + self.offset) as usize
    }
}

impl FromStr for SizeRule {
    type Err = Error;

    /// Accepts `2n`, `n/5`, `3n/10`, `2*n`, `n`, or a constant such as `40`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("size rule {s:?}: expected forms like 2n, n/5, 3n/10, 40"));
        let t: String = s.chars().filter(|c| !c.is_whitespace() && *c != '*').collect();
        let Some(pos) = t.find('n') else {
            let c = t.parse::<u64>().map_err(|_| bad())?;
            return Ok(Self { num: 0, den: 1, offset: c });
        };
        let num = match &t[..pos] {
            "" => 1,
            x => x.parse::<u64>().map_err(|_| bad())?,
        };
        let den = match &t[pos + 1..] {
            "" => 1,
            x => x
                .strip_prefix('/')
                .and_then(|d| d.parse::<u64>().ok())
                .filter(|&d| d > 0)
                .ok_or_else(bad)?,
        };
        Ok(Self { num, den, offset: 0 })
    }
}

impl std::fmt::Display for SizeRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.num == 0 {
            return write!(f, "{}", self.offset);
        }
        let coef = if self.num == 1 { String::new() } else { self.num.to_string() };
        match self.den {
            1 => write!(f, "{coef}n"),
            d => write!(f, "{coef}n/{d}"),
        }
    }
}

impl Serialize for SizeRule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SizeRule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondExperiment {
    pub n_values: Vec<usize>,
    #[serde(default = "default_p_rule")]
    pub p_rule: SizeRule,
    #[serde(default = "default_q_rule")]
    pub q_rule: SizeRule,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_p_rule() -> SizeRule {
    SizeRule { num: 2, den: 1, offset: 0 }
}

fn default_q_rule() -> SizeRule {
    SizeRule { num: 1, den: 5, offset: 0 }
}

impl CondExperiment {
    /// `n ∈ {50, 100, 200}`, `p = 2n`, `q = n/5`, 200 trials.
    pub fn desk(seed: u64) -> Self {
        Self {
            n_values: vec![50, 100, 200],
            p_rule: default_p_rule(),
            q_rule: default_q_rule(),
            trials: 200,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CondCell {
    pub n: usize,
    pub trial: usize,
    /// `sqrt(λmax/λmin)`: singular-value ratio of the normalized columns.
    pub cond: f64,
    /// `λmax/λmin`.
    pub cond_eig: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CondSummary {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CondResults {
    pub cells: Vec<CondCell>,
    pub summary: Vec<CondSummary>,
}

/// Condition numbers of random size-`q` column subsets of the steady-state
/// matrix; each `(n, trial)` cell draws its subset from its own derived seed.
pub fn cond_mc(exp: &CondExperiment, spec: &SequenceSpec) -> Result<CondResults> {
    if exp.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if exp.n_values.is_empty() {
        return Err(Error::Config("n_values is empty".into()));
    }
    let mut cells = Vec::new();
    let mut summary = Vec::new();
    for &n in &exp.n_values {
        let p = exp.p_rule.apply(n);
        let q = exp.q_rule.apply(n);
        if q == 0 || q > p || n == 0 {
            return Err(Error::Config(format!("n = {n} gives q = {q}, p = {p}; need 1 ≤ q ≤ p")));
        }
        let u = build_from_spec(spec, n, p, ToeplitzKind::SteadyState)?;
        let mut row = (0..exp.trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(exp.seed, n as u64, trial as u64));
                let subset = random_subset(&mut rng, p, q);
                let (lo, hi) = eig_extremes(&column_correlation(&u, &subset)?)?;
                let (cond, cond_eig) = if lo > 0.0 {
                    ((hi / lo).sqrt(), hi / lo)
                } else {
                    (f64::INFINITY, f64::INFINITY)
                };
                Ok(CondCell {
                    n,
                    trial,
                    cond: cond.max(1.0),
                    cond_eig: cond_eig.max(1.0),
                    lambda_min: lo,
                    lambda_max: hi,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        row.sort_by_key(|c| c.trial);
        summary.push(summarize(n, p, q, &row));
        cells.extend(row);
    }
    Ok(CondResults { cells, summary })
}

fn summarize(n: usize, p: usize, q: usize, row: &[CondCell]) -> CondSummary {
    let mut v: Vec<f64> = row.iter().map(|c| c.cond).collect();
    v.sort_by(f64::total_cmp);
    CondSummary {
        n,
        p,
        q,
        min: v[0],
        median: median_sorted(&v),
        max: v[v.len() - 1],
        mean: v.iter().sum::<f64>() / v.len() as f64,
    }
}

pub fn median_sorted(v: &[f64]) -> f64 {
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Sparse FIR system `g` of length `p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FirSystem {
    pub p: usize,
    pub g: Vec<f64>,
    pub support: Vec<usize>,
    pub noise_sigma: f64,
}

impl FirSystem {
    pub fn new(g: Vec<f64>, noise_sigma: f64) -> Self {
        let support = (0..g.len()).filter(|&i| g[i] != 0.0).collect();
        Self {
            p: g.len(),
            g,
            support,
            noise_sigma,
        }
    }

    /// `k` taps at uniform positions with magnitudes uniform in `[0.5, 1.5]`
    /// and random signs.
    pub fn random<R: Rng>(rng: &mut R, p: usize, k: usize, noise_sigma: f64) -> Result<Self> {
        if k > p {
            return Err(Error::domain(format!("sparsity {k} exceeds length {p}")));
        }
        let support = random_subset(rng, p, k);
        let mut g = vec![0.0; p];
        for &i in &support {
            let mag: f64 = rng.gen_range(0.5..=1.5);
            g[i] = if rng.gen::<bool>() { mag } else { -mag };
        }
        Ok(Self {
            p,
            g,
            support,
            noise_sigma,
        })
    }
}

fn real_dense(u: &SensingMatrix) -> Result<Vec<Vec<f64>>> {
    if !u.is_real() {
        return Err(Error::domain("identification runs on real-valued sensing matrices"));
    }
    Ok((0..u.cols)
        .map(|j| u.column(j).iter().map(|z| z.re).collect())
        .collect())
}

/// `y = U g + w`, `w ~ N(0, σ²)` i.i.d. from a ChaCha8 stream seeded by `seed`.
pub fn simulate_output(u: &SensingMatrix, sys: &FirSystem, seed: u64) -> Result<Vec<f64>> {
    if sys.p != u.cols {
        return Err(Error::domain(format!("system length {} ≠ matrix columns {}", sys.p, u.cols)));
    }
    let cols = real_dense(u)?;
    let mut y = vec![0.0; u.rows];
    for &j in &sys.support {
        for (yi, c) in y.iter_mut().zip(&cols[j]) {
            *yi += c * sys.g[j];
        }
    }
    if sys.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, sys.noise_sigma)
            .map_err(|e| Error::domain(format!("noise σ: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for yi in y.iter_mut() {
            *yi += normal.sample(&mut rng);
        }
    }
    Ok(y)
}

const PIVOT_TOL: f64 = 1e-12;

/// Solves the symmetric positive definite system by `LDLᵀ` elimination.
fn solve_spd(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for k in 0..n {
        let pivot = a[k][k];
        if pivot.abs() <= PIVOT_TOL * scale {
            return Err(Error::IllConditioned(format!(
                "active set is rank deficient (pivot {pivot:.3e} at step {k})"
            )));
        }
        let (top, rest) = a.split_at_mut(k + 1);
        let row_k = &top[k];
        for (off, row) in rest.iter_mut().enumerate() {
            let f = row[k] / pivot;
            for (x, y) in row[k..].iter_mut().zip(&row_k[k..]) {
                *x -= f * y;
            }
            b[k + 1 + off] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Ok(x)
}

/// Orthogonal matching pursuit: `k` rounds of picking the column with the
/// largest normalized correlation to the residual, then least squares on the
/// active set.
pub fn omp_recover(u: &SensingMatrix, y: &[f64], k: usize) -> Result<FirSystem> {
    if k > u.rows.min(u.cols) {
        return Err(Error::domain(format!("k = {k} exceeds min(rows, cols)")));
    }
    if y.len() != u.rows {
        return Err(Error::domain(format!("observation length {} ≠ rows {}", y.len(), u.rows)));
    }
    let cols = real_dense(u)?;
    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let y_norm = y.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut g = vec![0.0; u.cols];
    let mut active: Vec<usize> = Vec::new();
    let mut residual = y.to_vec();
    for _ in 0..k {
        let r_norm = residual.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r_norm <= 1e-14 * y_norm.max(f64::MIN_POSITIVE) || y_norm == 0.0 {
            break;
        }
        let pick = (0..u.cols)
            .filter(|j| !active.contains(j) && norms[*j] > 0.0)
            .map(|j| {
                let c: f64 = cols[j].iter().zip(&residual).map(|(a, b)| a * b).sum();
                (j, c.abs() / norms[j])
            })
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        let Some((j, _)) = pick else { break };
        active.push(j);
        let gram: Vec<Vec<f64>> = active
            .iter()
            .map(|&a| {
                active
                    .iter()
                    .map(|&b| cols[a].iter().zip(&cols[b]).map(|(x, z)| x * z).sum())
                    .collect()
            })
            .collect();
        let rhs: Vec<f64> = active
            .iter()
            .map(|&a| cols[a].iter().zip(y).map(|(x, z)| x * z).sum())
            .collect();
        let coef = solve_spd(gram, rhs)?;
        residual = y.to_vec();
        for (&a, &c) in active.iter().zip(&coef) {
            for (r, x) in residual.iter_mut().zip(&cols[a]) {
                *r -= c * x;
            }
        }
        g.iter_mut().for_each(|x| *x = 0.0);
        for (&a, &c) in active.iter().zip(&coef) {
            g[a] = c;
        }
    }
    Ok(FirSystem::new(g, 0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentifyTrial {
    pub trial: usize,
    pub support_exact: bool,
    /// `‖ĝ − g‖ / ‖g‖`.
    pub rel_error: f64,
    /// `max |ĝ_i − g_i|`.
    pub max_abs_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentifyReport {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub sigma: f64,
    pub trials: Vec<IdentifyTrial>,
    pub support_recovery_rate: f64,
    pub median_rel_error: f64,
    pub max_abs_error: f64,
}

/// Repeated identification on one matrix: random `k`-sparse system, simulated
/// output, OMP estimate. Trial `i` uses seeds derived from `(seed, i)`.
pub fn identify_experiment(
    u: &SensingMatrix,
    k: usize,
    sigma: f64,
    trials: usize,
    seed: u64,
) -> Result<IdentifyReport> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let results = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, trial as u64));
            let sys = FirSystem::random(&mut rng, u.cols, k, sigma)?;
            let y = simulate_output(u, &sys, derive_seed(seed, 1, trial as u64))?;
            let est = omp_recover(u, &y, k)?;
            let diff: Vec<f64> = est.g.iter().zip(&sys.g).map(|(a, b)| a - b).collect();
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let g_norm = norm(&sys.g);
            Ok(IdentifyTrial {
                trial,
                support_exact: est.support == sys.support,
                rel_error: if g_norm > 0.0 { norm(&diff) / g_norm } else { norm(&diff) },
                max_abs_error: diff.iter().map(|x| x.abs()).fold(0.0, f64::max),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut errs: Vec<f64> = results.iter().map(|t| t.rel_error).collect();
    errs.sort_by(f64::total_cmp);
    Ok(IdentifyReport {
        n: u.n,
        p: u.cols,
        k,
        sigma,
        support_recovery_rate: results.iter().filter(|t| t.support_exact).count() as f64
            / trials as f64,
        median_rel_error: median_sorted(&errs),
        max_abs_error: results.iter().map(|t| t.max_abs_error).fold(0.0, f64::max),
        trials: results,
    })
}

/// Per-`n` grouping helper for reports.
pub fn group_by_n(cells: &[CondCell]) -> BTreeMap<usize, Vec<f64>> {
    let mut m: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for c in cells {
        m.entry(c.n).or_default().push(c.cond);
    }
    m
}
