//! Acceptance suite: one test per criterion, each printing a single
//! `ACCEPTANCE <id> PASS|FAIL` line. Run with
//! `cargo test --test acceptance -- --include-ignored --nocapture` to include
//! the three criteria that are known not to hold as stated.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hocrip::acf::{aperiodic_profile, aperiodic_profile_direct, fit_decay, worst_case_curve};
use hocrip::cfrac::{
    convergents, expand_cf, fibonacci_approximation, ostrowski, type_lower_bound, type_profile,
    OstrowskiBasis,
};
use hocrip::qirr::{CertifiedFixedPoint, QuadraticIrrational};
use hocrip::sensing::{
    build_from_spec, cond_mc, eig_extremes, identify_experiment, omp_recover, random_subset,
    simulate_output, CMatrix, CondExperiment, FirSystem, ToeplitzKind,
};
use hocrip::sequences::{apply_doppler, generate, SequenceSpec};

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {id:>2} {} {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn spec(desc: &str) -> SequenceSpec {
    SequenceSpec::from_descriptor(desc, 1).unwrap()
}

fn bi(v: i64) -> BigInt {
    BigInt::from(v)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Sign of `x + y√d` by exact integer comparison.
fn surd_sign(x: &BigInt, y: &BigInt, d: &BigInt) -> Ordering {
    match (x.sign(), y.sign()) {
        (_, num_bigint::Sign::NoSign) => x.cmp(&BigInt::zero()),
        (num_bigint::Sign::NoSign, _) => y.cmp(&BigInt::zero()),
        (num_bigint::Sign::Plus, num_bigint::Sign::Plus) => Ordering::Greater,
        (num_bigint::Sign::Minus, num_bigint::Sign::Minus) => Ordering::Less,
        _ => {
            let lhs = x * x;
            let rhs = y * y * d;
            let c = lhs.cmp(&rhs);
            if x.is_positive() {
                c
            } else {
                c.reverse()
            }
        }
    }
}

/// Oracle for `|β|` compared to a rational: sign of `|(a+b√d)/c| − num/den`.
fn abs_qi_cmp(q: &QuadraticIrrational, num: &BigInt, den: &BigInt) -> Ordering {
    // (a + b√d)/c with c > 0 after sign normalization
    let (mut a, mut b, mut c) = (q.a().clone(), q.b().clone(), q.c().clone());
    if c.is_negative() {
        a = -a;
        b = -b;
        c = -c;
    }
    if surd_sign(&a, &b, q.d()) == Ordering::Less {
        a = -a;
        b = -b;
    }
    // |q| − num/den  ~  den·a − num·c + den·b√d
    surd_sign(&(den * &a - num * &c), &(den * &b), q.d())
}

#[test]
#[ignore = "known failure: the golden HOC curve exceeds 1.1·C·n^-1/4 at n = 1024 and 2048 when C is calibrated at n = 64"]
fn criterion_01_hoc_decay_bound() {
    let lengths: Vec<usize> = (6..=13).map(|e| 1usize << e).collect();
    let curve = worst_case_curve(&spec("hoc3:golden"), &lengths).unwrap();

    // Direct-sum oracle at the lengths where the FFT path is taken.
    let u = generate(&spec("hoc3:golden").with_length(1025)).unwrap();
    let direct = aperiodic_profile_direct(&u.samples, 1024).unwrap().max_ratio().0;
    let fft_point = curve.iter().find(|c| c.n == 1024).unwrap().max_ratio;
    assert!((direct - fft_point).abs() < 1e-12, "{direct} vs {fft_point}");

    let c = curve[0].max_ratio * 64f64.powf(0.25);
    let mut worst = (0usize, 0.0f64);
    for p in &curve[1..] {
        let excess = p.max_ratio / (1.1 * c * (p.n as f64).powf(-0.25));
        if excess > worst.1 {
            worst = (p.n, excess);
        }
    }
    let gamma = fit_decay(&curve).unwrap().gamma;
    let pass = worst.1 <= 1.0 && gamma >= 0.20;
    report(
        1,
        "HOC decay bound",
        pass,
        &format!(
            "C = {c:.5}; worst ratio to 1.1·C·n^-1/4 is {:.4} at n = {}; γ_fit = {gamma:.4}",
            worst.1, worst.0
        ),
    );
}

#[test]
fn criterion_02_sine_sweep_failure() {
    let lengths = [100, 250, 500, 1000, 2000, 5000, 10_000, 20_000];
    let sine = spec("sine:golden");
    let mut hit = None;
    for &n in &lengths {
        let p = worst_case_curve(&sine, &[n]).unwrap()[0];
        if p.max_ratio >= 0.4 {
            hit = Some(p);
            break;
        }
    }
    let detail = match hit {
        Some(p) => format!("max ratio {:.4} at n = {} (τ = {})", p.max_ratio, p.n, p.argmax_tau),
        None => "no n ≤ 2·10^4 reached 0.4".into(),
    };
    report(2, "sine-sweep failure", hit.is_some(), &detail);
}

#[test]
#[ignore = "known failure: the truncated m-sequence curve decreases monotonically over {500..8000}"]
fn criterion_03_prbs_non_decay() {
    let lengths = [500, 1000, 2000, 4000, 8000];
    let prbs = worst_case_curve(&spec("prbs"), &lengths).unwrap();
    let hoc = worst_case_curve(&spec("hoc3:golden"), &lengths).unwrap();
    let monotone = prbs.windows(2).all(|w| w[1].max_ratio < w[0].max_ratio);
    let above: Vec<usize> = prbs
        .iter()
        .zip(&hoc)
        .filter(|(p, h)| p.max_ratio > h.max_ratio)
        .map(|(p, _)| p.n)
        .collect();
    let fmt = |c: &[hocrip::acf::CurvePoint]| {
        c.iter().map(|p| format!("{:.4}", p.max_ratio)).collect::<Vec<_>>().join(", ")
    };
    report(
        3,
        "truncated PRBS non-decay",
        !monotone && !above.is_empty(),
        &format!(
            "PRBS [{}], HOC [{}]; monotone = {monotone}; PRBS above HOC at {above:?}",
            fmt(&prbs),
            fmt(&hoc)
        ),
    );
}

#[test]
fn criterion_04_gershgorin_sandwich() {
    let (n, p, q) = (256, 512, 8);
    let u = build_from_spec(&spec("hoc3:golden:re"), n, p, ToeplitzKind::SteadyState).unwrap();
    let cols: Vec<Vec<f64>> = (0..p).map(|j| u.column(j).iter().map(|z| z.re).collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = 0;
    let (mut min_slack, mut min_lambda) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..1000 {
        let s = random_subset(&mut rng, p, q);
        // Independent Σ from explicit dot products.
        let norms: Vec<f64> = s.iter().map(|&j| cols[j].iter().map(|x| x * x).sum::<f64>()).collect();
        let mut sigma = vec![0.0; q * q];
        for a in 0..q {
            for b in 0..q {
                let dot: f64 = cols[s[a]].iter().zip(&cols[s[b]]).map(|(x, y)| x * y).sum();
                sigma[a * q + b] = dot / (norms[a] * norms[b]).sqrt();
            }
        }
        let r = (0..q)
            .map(|a| (0..q).filter(|&b| b != a).map(|b| sigma[a * q + b].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let (lo, hi) = eig_extremes(&CMatrix::from_real(q, &sigma)).unwrap();
        let tol = 1e-8;
        if lo < 1.0 - r - tol || hi > 1.0 + r + tol || lo > hi {
            violations += 1;
        }
        min_slack = min_slack.min((lo - (1.0 - r)).min(1.0 + r - hi));
        min_lambda = min_lambda.min(lo);
    }
    report(
        4,
        "Gershgorin sandwich",
        violations == 0,
        &format!("1000 subsets, {violations} violations, min slack {min_slack:.3e}, min λmin {min_lambda:.4}"),
    );
}

#[test]
fn criterion_05_continued_fraction_exactness() {
    let golden = QuadraticIrrational::golden();
    let cf = expand_cf(&golden, 121).unwrap();
    let conv = convergents(&cf, 121).unwrap();

    // Fibonacci oracle: 1, 1, 2, 3, 5, …
    let mut fib = vec![BigInt::one(), BigInt::one()];
    while fib.len() < 123 {
        let next = &fib[fib.len() - 1] + &fib[fib.len() - 2];
        fib.push(next);
    }
    let mut failures = Vec::new();
    for k in 0..=60 {
        let c = &conv[k];
        if c.denominator != fib[k] || c.numerator != fib[k + 1] {
            failures.push(format!("B_{k}"));
        }
        let b_next = &conv[k + 1].denominator;
        let lower = abs_qi_cmp(&c.d_exact, &BigInt::one(), &(&c.denominator + b_next));
        let upper = abs_qi_cmp(&c.d_exact, &BigInt::one(), &c.denominator);
        if lower == Ordering::Less || upper == Ordering::Greater {
            failures.push(format!("|D_{k}| sandwich"));
        }
    }
    // B_k ≥ 2^{(k−1)/2}  ⟺  B_k² ≥ 2^{k−1}, checked for every preset.
    let mut growth_checked = 0;
    for alpha in ["golden", "sqrt2", "sqrt3"] {
        let q = QuadraticIrrational::parse(alpha).unwrap();
        let conv = convergents(&expand_cf(&q, 120).unwrap(), 120).unwrap();
        for c in conv.iter().filter(|c| c.k >= 1) {
            let b2 = &c.denominator * &c.denominator;
            if b2 < (BigInt::one() << (c.k - 1)) {
                failures.push(format!("{alpha} growth at k = {}", c.k));
            }
            growth_checked += 1;
        }
    }
    report(
        5,
        "continued-fraction exactness",
        failures.is_empty(),
        &format!(
            "Fibonacci and |D_k| sandwich for k ≤ 60, growth for {growth_checked} convergents; failures {failures:?}"
        ),
    );
}

/// Closed-form partial quotients `a_1, a_2, …` of the three bases.
fn quotients_of(name: &str, count: usize) -> Vec<u64> {
    (1..=count)
        .map(|i| match name {
            "golden-1" => 1,
            "sqrt2-1" => 2,
            "sqrt3-1" => {
                if i % 2 == 1 {
                    1
                } else {
                    2
                }
            }
            _ => unreachable!(),
        })
        .collect()
}

/// Counts admissible digit vectors `(c_1, …, c_L)` with `Σ c_{j+1} B_j = m`.
fn count_representations(m: u64, dens: &[u64], a: &[u64]) -> (usize, Vec<u64>) {
    fn go(
        j: usize,
        rem: u64,
        upper_was_max: bool,
        dens: &[u64],
        a: &[u64],
        digits: &mut Vec<u64>,
        found: &mut (usize, Vec<u64>),
    ) {
        // digits are chosen from the top index down; `upper_was_max` means the
        // digit just above equals its quotient, forcing this one to zero.
        let cap = if j == 0 { a[0] - 1 } else { a[j] };
        let cap = if upper_was_max { 0 } else { cap };
        for c in 0..=cap.min(rem / dens[j]) {
            digits[j] = c;
            let r = rem - c * dens[j];
            if j == 0 {
                if r == 0 {
                    found.0 += 1;
                    found.1 = digits.clone();
                }
            } else {
                go(j - 1, r, c == a[j] && c > 0, dens, a, digits, found);
            }
        }
        digits[j] = 0;
    }
    let top = dens.iter().rposition(|&b| b <= m).unwrap();
    let mut digits = vec![0; top + 1];
    let mut found = (0, Vec::new());
    go(top, m, false, dens, a, &mut digits, &mut found);
    (found.0, found.1)
}

#[test]
fn criterion_06_ostrowski_correctness() {
    let mut checked = 0;
    let mut failures = Vec::new();
    for name in ["golden-1", "sqrt2-1", "sqrt3-1"] {
        let beta = QuadraticIrrational::parse(name).unwrap();
        let limit = bi(10_000);
        let basis = OstrowskiBasis::new(&beta, &limit).unwrap();
        let a = quotients_of(name, 40);
        // B_0 = 1, B_1 = a_1, B_{k+1} = a_{k+1} B_k + B_{k−1}
        let mut dens = vec![1u64, a[0]];
        while *dens.last().unwrap() <= 10_000 {
            let k = dens.len() - 1;
            dens.push(a[k] * dens[k] + dens[k - 1]);
        }
        for m in 1..=10_000u64 {
            let mb = bi(m as i64);
            let rep = ostrowski(&mb, &beta).unwrap();
            if rep.reconstruct(&basis) != mb || !rep.satisfies_constraints(&basis) {
                failures.push(format!("{name} m = {m}"));
            }
            if m <= 500 {
                let (count, digits) = count_representations(m, &dens, &a);
                let lib: Vec<u64> = (0..digits.len()).map(|j| rep.coeff(j).to_u64().unwrap()).collect();
                if count != 1 || lib != digits {
                    failures.push(format!("{name} m = {m}: {count} representations"));
                }
            }
            checked += 1;
        }
    }
    report(
        6,
        "Ostrowski correctness",
        failures.is_empty(),
        &format!("{checked} decompositions, brute-force uniqueness for m ≤ 500; failures {failures:?}"),
    );
}

#[test]
fn criterion_07_type_bounds() {
    let mut notes = Vec::new();
    let mut pass = true;
    for name in ["golden-1", "sqrt2-1", "sqrt3-1"] {
        let beta = QuadraticIrrational::parse(name).unwrap();
        for n in [100u64, 1_000, 10_000] {
            let prof = type_profile(n, &beta).unwrap();
            let cap = 2.0 * (2.0 * n as f64).log2();
            if prof.max_type as f64 > cap {
                pass = false;
                notes.push(format!("{name} n = {n}: γ* = {} > {cap:.2}", prof.max_type));
            }
            for (&(l, c), &count) in &prof.histogram {
                let bound = if l == prof.max_type {
                    1
                } else {
                    2 * (n / prof.denominators[l + 1])
                };
                if count > bound {
                    pass = false;
                    notes.push(format!("{name} n = {n}: #A_({l},{c}) = {count} > {bound}"));
                }
            }
        }
    }

    // Lower bound against an exact ‖mβ‖ for β in (0, 1/2).
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut overlaps = 0;
    for (a, b, c, d) in [(3, -1, 2, 5), (-1, 1, 1, 2), (2, -1, 1, 3)] {
        let beta = QuadraticIrrational::new(a, b, c, d).unwrap();
        for _ in 0..1000 {
            let m = bi(rng.gen_range(2..=1_000_000));
            let bound = type_lower_bound(&m, &beta).unwrap();
            let frac = beta.mul_int(&m).unwrap().frac();
            let dist = if frac.cmp_rational(&BigInt::one(), &bi(2)) == Ordering::Greater {
                frac.neg().add_int(&BigInt::one())
            } else {
                frac
            };
            let dist: CertifiedFixedPoint = dist.eval(40).unwrap();
            match bound.certified_cmp(&dist) {
                Some(Ordering::Greater) => {
                    pass = false;
                    notes.push(format!("β = {beta}, m = {m}: bound {bound} > ‖mβ‖ = {dist}"));
                }
                None => overlaps += 1,
                _ => {}
            }
        }
    }
    report(
        7,
        "type bounds",
        pass,
        &format!("3 bases × n ∈ {{10^2, 10^3, 10^4}}, 3000 random m ({overlaps} ties within precision); {notes:?}"),
    );
}

#[test]
#[ignore = "known failure: desk-scale median condition numbers increase with n (≈2.21, 2.33, 2.49)"]
fn criterion_08_condition_number_trend() {
    let exp = CondExperiment::desk(2024);
    let results = cond_mc(&exp, &spec("hoc3:golden:re")).unwrap();
    let sane = results.cells.iter().all(|c| c.cond.is_finite() && c.cond >= 1.0);
    let med = |n: usize| {
        let mut v: Vec<f64> = results.cells.iter().filter(|c| c.n == n).map(|c| c.cond).collect();
        median(&mut v)
    };
    let (m50, m100, m200) = (med(50), med(100), med(200));
    report(
        8,
        "condition-number trend",
        sane && m200 <= m50,
        &format!(
            "{} cells finite and ≥ 1: {sane}; medians n=50 {m50:.4}, n=100 {m100:.4}, n=200 {m200:.4}",
            results.cells.len()
        ),
    );
}

#[test]
fn criterion_09_doppler_invariance() {
    let n = 4096;
    let base = generate(&spec("hoc3:golden").with_length(n + 1)).unwrap();
    let reference = aperiodic_profile(&base.samples, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let f: f64 = rng.gen_range(-0.5..0.5);
        let shifted = apply_doppler(&base, f);
        let prof = aperiodic_profile(&shifted.samples, n).unwrap();
        for (x, y) in reference.values.iter().zip(&prof.values) {
            worst = worst.max((x.norm() - y.norm()).abs());
        }
    }
    report(
        9,
        "Doppler invariance",
        worst <= 1e-12,
        &format!("20 shifts, n = {n}, max per-lag |Δ|r|| = {worst:.3e}"),
    );
}

#[test]
fn criterion_10_end_to_end_identification() {
    let (n, p, k) = (200, 400, 5);
    let u = build_from_spec(&spec("hoc3:golden:re"), n, p, ToeplitzKind::SteadyState).unwrap();
    let clean = identify_experiment(&u, k, 0.0, 100, 10).unwrap();
    let noisy = identify_experiment(&u, k, 0.01, 100, 10).unwrap();

    // Per-instance residual oracle on a few systems.
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut max_resid = 0.0f64;
    for t in 0..10 {
        let sys = FirSystem::random(&mut rng, p, k, 0.0).unwrap();
        let y = simulate_output(&u, &sys, t).unwrap();
        let g = omp_recover(&u, &y, k).unwrap();
        for (i, yi) in y.iter().enumerate() {
            let fit: f64 = g.support.iter().map(|&j| u.entry(i, j).re * g.g[j]).sum();
            max_resid = max_resid.max((fit - yi).abs());
        }
    }
    let pass = clean.support_recovery_rate == 1.0
        && clean.max_abs_error <= 1e-8
        && max_resid <= 1e-8
        && noisy.median_rel_error <= 0.05;
    report(
        10,
        "end-to-end identification",
        pass,
        &format!(
            "noiseless: recovery {:.0}%, max |Δg| {:.2e}, max residual {max_resid:.2e}; σ = 0.01: median rel error {:.3e}",
            100.0 * clean.support_recovery_rate,
            clean.max_abs_error,
            noisy.median_rel_error
        ),
    );
}

#[test]
fn criterion_11_fibonacci_approximation() {
    let mut fib = vec![BigInt::one(), BigInt::one()];
    while fib.len() < 80 {
        let next = &fib[fib.len() - 1] + &fib[fib.len() - 2];
        fib.push(next);
    }
    let mut found = Vec::new();
    let mut pass = true;
    for q in [2u64, 3, 5, 10] {
        // First F_Q ≥ 10^6 divisible by q whose approximation meets the bound.
        let hit = (2..78).find_map(|idx| {
            let f: &BigInt = &fib[idx];
            if f < &bi(1_000_000) || !f.is_multiple_of(&BigInt::from(q)) {
                return None;
            }
            // p = F_{Q+1}; x = Fα − p = (s + F√5)/2 with s = F − 2p.
            // |qα − qp/F| ≤ q/(√5F²)  ⟺  |5F + s√5|·F ≤ 2
            // ⟺  4 − F²(25F² + 5s²) − 10F³s√5 ≥ 0.
            let p: &BigInt = &fib[idx + 1];
            let s = f - p * bi(2);
            let f2 = f * f;
            let lhs = bi(4) - &f2 * (&f2 * bi(25) + &s * &s * bi(5));
            let surd = -(&f2 * f * &s * bi(10));
            let oracle = surd_sign(&lhs, &surd, &bi(5)) != Ordering::Less;
            let lib = fibonacci_approximation(q, idx).unwrap();
            if lib.holds != oracle || &lib.p != p {
                pass = false;
            }
            oracle.then_some((idx, lib))
        });
        match hit {
            Some((idx, lib)) => found.push(format!(
                "q = {q}: F_{idx} = {}, error {:.3e} ≤ bound {:.3e}",
                lib.term,
                lib.error.to_f64(),
                lib.bound.to_f64()
            )),
            None => {
                pass = false;
                found.push(format!("q = {q}: none"));
            }
        }
    }
    report(11, "Fibonacci approximation", pass, &found.join("; "));
}
