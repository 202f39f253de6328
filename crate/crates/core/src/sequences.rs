//! Probing sequences: third-order chirps, sine sweeps, maximal-length PRBS,
//! constants and a unit pulse, with Doppler modulation, channel selection and
//! CSV / binary export.
//!
//! Chirp phases are reduced modulo one turn in exact arithmetic before the
//! single floating-point `exp`, so samples stay accurate at indices where
//! `α·t³` in double precision has no fractional digits left.

use std::f64::consts::TAU;
use std::io::{BufRead, Read, Write};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qirr::{pow10, FracEvaluator, QuadraticIrrational};

/// Fractional digits carried by the phase before conversion to `f64`.
const PHASE_DIGITS: u32 = 20;

/// π to 80 decimals.
const PI_DIGITS: &str =
    "31415926535897932384626433832795028841971693993751058209749445923078164062862089";
const PI_SCALE: u32 = 80;

pub const DEFAULT_PRBS_DEGREE: u32 = 15;
/// `x^15 + x^14 + 1`: bit `k` is the coefficient of `x^k`, leading term implicit.
pub const DEFAULT_PRBS_TAPS: u32 = 0x4001;
pub const DEFAULT_PRBS_SEED: u32 = 1;
pub const MAX_PRBS_DEGREE: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    Hoc3,
    SineSweep,
    Prbs,
    Constant,
    /// `u_0 = 1`, zero elsewhere; an ideal-autocorrelation reference.
    Pulse,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueMode {
    #[default]
    Complex,
    RealPart,
    ImagPart,
}

/// Everything needed to regenerate a sequence bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub kind: SequenceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<QuadraticIrrational>,
    pub start: u64,
    pub length: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lfsr_degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taps: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u32>,
    #[serde(default)]
    pub value_mode: ValueMode,
    /// Frequency shift in cycles per sample.
    #[serde(default)]
    pub doppler: f64,
}

impl SequenceSpec {
    fn base(kind: SequenceKind, length: usize) -> Self {
        Self {
            kind,
            alpha: None,
            start: 0,
            length,
            lfsr_degree: None,
            taps: None,
            seed: None,
            value_mode: ValueMode::Complex,
            doppler: 0.0,
        }
    }

    pub fn hoc3(alpha: QuadraticIrrational, length: usize) -> Self {
        Self {
            alpha: Some(alpha),
            ..Self::base(SequenceKind::Hoc3, length)
        }
    }

    pub fn sine_sweep(alpha: QuadraticIrrational, length: usize) -> Self {
        Self {
            alpha: Some(alpha),
            ..Self::base(SequenceKind::SineSweep, length)
        }
    }

    pub fn prbs(degree: u32, taps: u32, length: usize) -> Self {
        Self {
            lfsr_degree: Some(degree),
            taps: Some(taps),
            seed: Some(DEFAULT_PRBS_SEED),
            ..Self::base(SequenceKind::Prbs, length)
        }
    }

    pub fn constant(length: usize) -> Self {
        Self::base(SequenceKind::Constant, length)
    }

    pub fn pulse(length: usize) -> Self {
        Self::base(SequenceKind::Pulse, length)
    }

    pub fn with_mode(mut self, mode: ValueMode) -> Self {
        self.value_mode = mode;
        self
    }

    pub fn with_doppler(mut self, f: f64) -> Self {
        self.doppler = f;
        self
    }

    pub fn with_start(mut self, start: u64) -> Self {
        self.start = start;
        self
    }

    pub fn with_length(mut self, length: usize) -> Self {
        self.length = length;
        self
    }

    /// Parses a compact descriptor:
    /// `hoc3:<alpha>`, `sine:<alpha>`, `prbs[:<degree>[:<taps>[:<seed>]]]`,
    /// `const`, `pulse`. `<alpha>` is a preset name or `a,b,c,d`; taps accept
    /// a `0x` prefix. A trailing `:re` or `:im` selects a real channel.
    pub fn from_descriptor(desc: &str, length: usize) -> Result<Self> {
        let mut parts: Vec<&str> = desc.split(':').map(str::trim).collect();
        let mode = match parts.last() {
            Some(&"re") if parts.len() > 1 => ValueMode::RealPart,
            Some(&"im") if parts.len() > 1 => ValueMode::ImagPart,
            _ => ValueMode::Complex,
        };
        if mode != ValueMode::Complex {
            parts.pop();
        }
        let alpha = |parts: &[&str]| -> Result<QuadraticIrrational> {
            match parts.get(1) {
                Some(s) => QuadraticIrrational::parse(s),
                None => Ok(QuadraticIrrational::golden()),
            }
        };
        let spec = match parts[0].to_ascii_lowercase().as_str() {
            "hoc3" | "hoc" => Self::hoc3(alpha(&parts)?, length),
            "sine" | "sine_sweep" | "sweep" => Self::sine_sweep(alpha(&parts)?, length),
            "prbs" => {
                let degree = match parts.get(1) {
                    Some(s) => s
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad PRBS degree {s:?}")))?,
                    None => DEFAULT_PRBS_DEGREE,
                };
                let taps = match parts.get(2) {
                    Some(s) => parse_u32(s)?,
                    None if degree == DEFAULT_PRBS_DEGREE => DEFAULT_PRBS_TAPS,
                    None => {
                        return Err(Error::invalid(format!(
                            "no default taps for degree {degree}; pass prbs:{degree}:<taps>"
                        )))
                    }
                };
                let mut s = Self::prbs(degree, taps, length);
                if let Some(seed) = parts.get(3) {
                    s.seed = Some(parse_u32(seed)?);
                }
                s
            }
            "const" | "constant" => Self::constant(length),
            "pulse" => Self::pulse(length),
            other => return Err(Error::invalid(format!("unknown sequence kind {other:?}"))),
        };
        Ok(spec.with_mode(mode))
    }
}

fn parse_u32(s: &str) -> Result<u32> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u32::from_str_radix(hex, 16),
        None => match s.strip_prefix("0b") {
            Some(bin) => u32::from_str_radix(bin, 2),
            None => s.parse(),
        },
    };
    r.map_err(|_| Error::invalid(format!("bad integer {s:?}")))
}

/// `samples[i]` is `u_{start_index + i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSequence {
    pub samples: Vec<Complex64>,
    pub spec: SequenceSpec,
    pub start_index: u64,
}

impl ComplexSequence {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Builds the sequence a spec describes.
pub fn generate(spec: &SequenceSpec) -> Result<ComplexSequence> {
    if spec.length == 0 {
        return Err(Error::domain("sequence length must be at least 1"));
    }
    let t_from = spec.start;
    let t_to = spec.start + spec.length as u64 - 1;
    let need_alpha = || {
        spec.alpha
            .clone()
            .ok_or_else(|| Error::invalid("chirp sequences need alpha"))
    };
    let mut seq = match spec.kind {
        SequenceKind::Hoc3 => gen_hoc3(&need_alpha()?, t_from, t_to)?,
        SequenceKind::SineSweep => gen_sine_sweep(&need_alpha()?, t_from, t_to)?,
        SequenceKind::Prbs => {
            let degree = spec.lfsr_degree.unwrap_or(DEFAULT_PRBS_DEGREE);
            let taps = spec.taps.unwrap_or(DEFAULT_PRBS_TAPS);
            let seed = spec.seed.unwrap_or(DEFAULT_PRBS_SEED);
            let mut s = gen_prbs(degree, taps, spec.length + spec.start as usize, seed)?;
            s.samples.drain(..spec.start as usize);
            s.start_index = spec.start;
            s
        }
        SequenceKind::Constant => ComplexSequence {
            samples: vec![Complex64::new(1.0, 0.0); spec.length],
            spec: spec.clone(),
            start_index: t_from,
        },
        SequenceKind::Pulse => ComplexSequence {
            samples: (t_from..=t_to)
                .map(|t| Complex64::new(if t == 0 { 1.0 } else { 0.0 }, 0.0))
                .collect(),
            spec: spec.clone(),
            start_index: t_from,
        },
    };
    if spec.doppler != 0.0 {
        seq = apply_doppler(&seq, spec.doppler);
    }
    seq = match spec.value_mode {
        ValueMode::Complex => seq,
        ValueMode::RealPart => real_part(&seq),
        ValueMode::ImagPart => imag_part(&seq),
    };
    seq.spec = spec.clone();
    Ok(seq)
}

fn check_range(t_from: u64, t_to: u64) -> Result<()> {
    if t_to < t_from {
        return Err(Error::domain(format!("empty index range {t_from}..={t_to}")));
    }
    Ok(())
}

/// `u_t = exp(i2π·frac(α t³))`, `t_from ..= t_to`.
pub fn gen_hoc3(alpha: &QuadraticIrrational, t_from: u64, t_to: u64) -> Result<ComplexSequence> {
    check_range(t_from, t_to)?;
    let cube = |t: u64| BigInt::from(t).pow(3);
    let eval = FracEvaluator::new(alpha, &cube(t_to.max(1)), PHASE_DIGITS);
    let samples = (t_from..=t_to)
        .into_par_iter()
        .map(|t| Complex64::from_polar(1.0, TAU * eval.frac_f64(&cube(t))))
        .collect();
    let spec = SequenceSpec::hoc3(alpha.clone(), (t_to - t_from + 1) as usize).with_start(t_from);
    Ok(ComplexSequence {
        samples,
        spec,
        start_index: t_from,
    })
}

/// `u_t = exp(iα t²)`; `α t²` is reduced modulo `2π` in fixed point.
pub fn gen_sine_sweep(
    alpha: &QuadraticIrrational,
    t_from: u64,
    t_to: u64,
) -> Result<ComplexSequence> {
    check_range(t_from, t_to)?;
    let square = |t: u64| BigInt::from(t).pow(2);
    let eval = FracEvaluator::new(alpha, &square(t_to.max(1)), PHASE_DIGITS);
    let scale = eval.scale();
    if scale > PI_SCALE {
        return Err(Error::domain("sine sweep index too large for the stored π"));
    }
    let two_pi: BigInt = PI_DIGITS[..=scale as usize].parse::<BigInt>().expect("digits") * 2;
    let one = pow10(scale);
    let samples = (t_from..=t_to)
        .into_par_iter()
        .map(|t| {
            let x = eval.value(&square(t)).mantissa;
            let r = x.mod_floor(&two_pi);
            // r < 2π·10^scale, so the split keeps f64 precision
            let (hi, lo) = r.div_rem(&one);
            let phase = hi.to_f64().unwrap() + lo.to_f64().unwrap() / one.to_f64().unwrap();
            Complex64::from_polar(1.0, phase)
        })
        .collect();
    let spec =
        SequenceSpec::sine_sweep(alpha.clone(), (t_to - t_from + 1) as usize).with_start(t_from);
    Ok(ComplexSequence {
        samples,
        spec,
        start_index: t_from,
    })
}

/// Fibonacci LFSR over `GF(2)` with characteristic polynomial
/// `x^degree + Σ_k taps_k x^k`. The state holds the next `degree` output bits,
/// oldest in bit 0.
#[derive(Clone, Debug)]
pub struct Lfsr {
    degree: u32,
    taps: u32,
    state: u32,
}

impl Lfsr {
    pub fn new(degree: u32, taps: u32, seed: u32) -> Result<Self> {
        if degree == 0 || degree > MAX_PRBS_DEGREE {
            return Err(Error::invalid(format!("LFSR degree must be 1 ..= {MAX_PRBS_DEGREE}")));
        }
        let mask = (1u32 << degree) - 1;
        if seed & mask == 0 {
            return Err(Error::invalid("LFSR seed must be nonzero (all-zero state is absorbing)"));
        }
        if taps & !mask != 0 {
            return Err(Error::invalid(format!("taps {taps:#x} exceed degree {degree}")));
        }
        Ok(Self {
            degree,
            taps,
            state: seed & mask,
        })
    }

    pub fn next_bit(&mut self) -> u32 {
        let out = self.state & 1;
        let feedback = (self.state & self.taps).count_ones() & 1;
        self.state = (self.state >> 1) | (feedback << (self.degree - 1));
        out
    }

    /// Steps until the state recurs (bounded by `2^degree`).
    pub fn period(&self) -> Option<u64> {
        let mut probe = self.clone();
        let start = self.state;
        for k in 1..=(1u64 << self.degree) {
            probe.next_bit();
            if probe.state == start {
                return Some(k);
            }
        }
        None
    }
}

/// ±1 maximal-length sequence; bit 0 ↦ +1, bit 1 ↦ −1.
pub fn gen_prbs(degree: u32, taps: u32, length: usize, seed: u32) -> Result<ComplexSequence> {
    if length == 0 {
        return Err(Error::domain("sequence length must be at least 1"));
    }
    let mut lfsr = Lfsr::new(degree, taps, seed)?;
    let full = (1u64 << degree) - 1;
    if lfsr.period() != Some(full) {
        return Err(Error::invalid(format!(
            "taps {taps:#x} are not primitive for degree {degree} (period ≠ {full})"
        )));
    }
    let samples = (0..length)
        .map(|_| Complex64::new(if lfsr.next_bit() == 0 { 1.0 } else { -1.0 }, 0.0))
        .collect();
    let mut spec = SequenceSpec::prbs(degree, taps, length);
    spec.seed = Some(seed);
    Ok(ComplexSequence {
        samples,
        spec,
        start_index: 0,
    })
}

/// `u_t ← u_t·exp(i2πft)` with `t` the absolute sample index.
pub fn apply_doppler(seq: &ComplexSequence, f: f64) -> ComplexSequence {
    let samples = seq
        .samples
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let t = (seq.start_index + i as u64) as f64;
            // error-free product so the cycle count keeps full precision
            let p = f * t;
            let e = f.mul_add(t, -p);
            let turns = (p - p.floor()) + e;
            u * Complex64::from_polar(1.0, TAU * turns)
        })
        .collect();
    let mut spec = seq.spec.clone();
    spec.doppler += f;
    ComplexSequence {
        samples,
        spec,
        start_index: seq.start_index,
    }
}

pub fn real_part(seq: &ComplexSequence) -> ComplexSequence {
    map_channel(seq, ValueMode::RealPart, |u| Complex64::new(u.re, 0.0))
}

pub fn imag_part(seq: &ComplexSequence) -> ComplexSequence {
    map_channel(seq, ValueMode::ImagPart, |u| Complex64::new(u.im, 0.0))
}

fn map_channel(
    seq: &ComplexSequence,
    mode: ValueMode,
    f: impl Fn(&Complex64) -> Complex64,
) -> ComplexSequence {
    let mut spec = seq.spec.clone();
    if spec.value_mode == ValueMode::Complex {
        spec.value_mode = mode;
    }
    ComplexSequence {
        samples: seq.samples.iter().map(f).collect(),
        spec,
        start_index: seq.start_index,
    }
}

const BINARY_MAGIC: &[u8; 8] = b"HOCSEQ01";

/// `# <spec JSON>` line, a `t,re,im` header, then one row per sample.
pub fn write_csv<W: Write>(seq: &ComplexSequence, mut w: W) -> Result<()> {
    writeln!(w, "# {}", serde_json::to_string(&seq.spec)?)?;
    writeln!(w, "t,re,im")?;
    for (i, u) in seq.samples.iter().enumerate() {
        writeln!(w, "{},{:e},{:e}", seq.start_index + i as u64, u.re, u.im)?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(r: R) -> Result<ComplexSequence> {
    let mut lines = r.lines();
    let bad = |m: &str| Error::invalid(format!("sequence CSV: {m}"));
    let header = lines.next().ok_or_else(|| bad("empty file"))??;
    let json = header.strip_prefix("# ").ok_or_else(|| bad("missing spec line"))?;
    let spec: SequenceSpec = serde_json::from_str(json)?;
    lines.next().ok_or_else(|| bad("missing column header"))??;
    let mut samples = Vec::new();
    let mut start_index = None;
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(bad(&format!("row {line:?} needs 3 columns")));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("bad number {s:?}")));
        let t: u64 = cols[0].trim().parse().map_err(|_| bad("bad index"))?;
        start_index.get_or_insert(t);
        samples.push(Complex64::new(num(cols[1])?, num(cols[2])?));
    }
    Ok(ComplexSequence {
        samples,
        start_index: start_index.unwrap_or(spec.start),
        spec,
    })
}

/// `HOCSEQ01`, `u32` LE header length, spec JSON, `u64` LE start index, then
/// `(re, im)` as `f64` LE pairs.
pub fn write_binary<W: Write>(seq: &ComplexSequence, mut w: W) -> Result<()> {
    let header = serde_json::to_vec(&seq.spec)?;
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&(header.len() as u32).to_le_bytes())?;
    w.write_all(&header)?;
    w.write_all(&seq.start_index.to_le_bytes())?;
    for u in &seq.samples {
        w.write_all(&u.re.to_le_bytes())?;
        w.write_all(&u.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<ComplexSequence> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(Error::invalid("not a HOCSEQ01 stream"));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let mut header = vec![0u8; u32::from_le_bytes(word) as usize];
    r.read_exact(&mut header)?;
    let spec: SequenceSpec = serde_json::from_slice(&header)?;
    let mut buf8 = [0u8; 8];
    r.read_exact(&mut buf8)?;
    let start_index = u64::from_le_bytes(buf8);
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if rest.len() % 16 != 0 {
        return Err(Error::invalid("truncated sample stream"));
    }
    let samples = rest
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    Ok(ComplexSequence {
        samples,
        spec,
        start_index,
    })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn golden() -> QuadraticIrrational {
        QuadraticIrrational::golden()
    }

    fn phase_turns(u: Complex64) -> f64 {
        u.arg().rem_euclid(TAU) / TAU
    }

    #[test]
    fn hoc_phase_oracles() {
        // 80-digit reference values of frac(φ t³)
        let cases = [
            (0u64, 0.0),
            (1, 0.618033988749894848204586834366),
            (12345, 0.448330209845610781297022932901),
            (100_000, 0.84820458683436563811772030918),
        ];
        for (t, want) in cases {
            let s = gen_hoc3(&golden(), t, t).unwrap();
            let got = phase_turns(s.samples[0]);
            let diff = (got - want).abs().min(1.0 - (got - want).abs());
            assert!(diff * TAU < 1e-12, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn sine_phase_oracle() {
        let s = gen_sine_sweep(&golden(), 12345, 12345).unwrap();
        let got = s.samples[0].arg().rem_euclid(TAU);
        assert!((got - 3.06394602520203887688587414929).abs() < 1e-12);
        let s = gen_sine_sweep(&golden(), 0, 2).unwrap();
        assert_eq!(s.samples[0], Complex64::new(1.0, 0.0));
        assert!((s.samples[1].arg() - 1.618033988749895).abs() < 1e-13);
    }

    #[test]
    fn sine_second_difference() {
        let s = gen_sine_sweep(&golden(), 500, 520).unwrap();
        let two_alpha = 2.0 * 1.618033988749895f64;
        for w in s.samples.windows(3) {
            let d2 = (w[2] * w[0] / (w[1] * w[1])).arg();
            let want = two_alpha.rem_euclid(TAU);
            let want = if want > std::f64::consts::PI { want - TAU } else { want };
            assert!((d2 - want).abs() < 1e-9);
        }
    }

    #[test]
    fn unit_modulus() {
        let s = gen_hoc3(&golden(), 0, 2000).unwrap();
        assert!(s.samples.iter().all(|u| (u.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn prbs_degree3() {
        let s = gen_prbs(3, 0b011, 7, 1).unwrap();
        let sum: f64 = s.samples.iter().map(|u| u.re).sum();
        assert_eq!(sum.abs(), 1.0);
        assert!(s.samples.iter().all(|u| u.re.abs() == 1.0 && u.im == 0.0));
        assert!(gen_prbs(3, 0b011, 7, 0).is_err());
        // x³ + x² + x + 1 = (x+1)³ is not primitive
        assert!(gen_prbs(3, 0b111, 7, 1).is_err());
    }

    #[test]
    fn prbs_default_m_sequence() {
        let n = (1usize << 15) - 1;
        let s = gen_prbs(DEFAULT_PRBS_DEGREE, DEFAULT_PRBS_TAPS, n, 1).unwrap();
        let x: Vec<f64> = s.samples.iter().map(|u| u.re).collect();
        for lag in [1usize, 2, 77, 1000, 16384, n - 1] {
            let c: f64 = (0..n).map(|i| x[i] * x[(i + lag) % n]).sum();
            assert_eq!(c, -1.0, "lag {lag}");
        }
    }

    #[test]
    fn doppler_examples() {
        let c = generate(&SequenceSpec::constant(6)).unwrap();
        assert_eq!(apply_doppler(&c, 0.0).samples, c.samples);
        let alt = apply_doppler(&c, 0.5);
        for (t, u) in alt.samples.iter().enumerate() {
            let want = if t % 2 == 0 { 1.0 } else { -1.0 };
            assert!((u.re - want).abs() < 1e-12 && u.im.abs() < 1e-12);
        }
    }

    #[test]
    fn channels() {
        let s = gen_hoc3(&golden(), 0, 50).unwrap();
        let r = real_part(&s);
        assert_eq!(real_part(&r), r);
        for (a, b) in s.samples.iter().zip(&r.samples) {
            assert_eq!(b.re, a.re);
            assert_eq!(b.im, 0.0);
        }
        let p = gen_prbs(5, 0b00101, 31, 1).unwrap();
        assert_eq!(real_part(&p).samples, p.samples);
    }

    #[test]
    fn descriptors() {
        let s = SequenceSpec::from_descriptor("hoc3:sqrt2:re", 10).unwrap();
        assert_eq!(s.kind, SequenceKind::Hoc3);
        assert_eq!(s.alpha, Some(QuadraticIrrational::sqrt2()));
        assert_eq!(s.value_mode, ValueMode::RealPart);
        let p = SequenceSpec::from_descriptor("prbs:3:0b011", 10).unwrap();
        assert_eq!((p.lfsr_degree, p.taps), (Some(3), Some(3)));
        assert!(SequenceSpec::from_descriptor("prbs:7", 10).is_err());
        assert!(SequenceSpec::from_descriptor("chirp5", 10).is_err());
        let g = generate(&SequenceSpec::from_descriptor("pulse", 4).unwrap()).unwrap();
        assert_eq!(g.samples[0].re, 1.0);
        assert_eq!(g.samples[1].re, 0.0);
    }

    #[test]
    fn offset_generation_matches_prefix() {
        let full = generate(&SequenceSpec::hoc3(golden(), 40)).unwrap();
        let tail = generate(&SequenceSpec::hoc3(golden(), 15).with_start(25)).unwrap();
        assert_eq!(&full.samples[25..], &tail.samples[..]);
        let fullp = generate(&SequenceSpec::prbs(15, DEFAULT_PRBS_TAPS, 40)).unwrap();
        let tailp = generate(&SequenceSpec::prbs(15, DEFAULT_PRBS_TAPS, 15).with_start(25)).unwrap();
        assert_eq!(&fullp.samples[25..], &tailp.samples[..]);
    }

    #[test]
    fn csv_and_binary_round_trip() {
        let s = generate(&SequenceSpec::hoc3(golden(), 64).with_start(3).with_doppler(0.1)).unwrap();
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap(), s);
        let mut bin = Vec::new();
        write_binary(&s, &mut bin).unwrap();
        assert_eq!(read_binary(bin.as_slice()).unwrap(), s);
        assert!(read_binary(&b"NOTMAGIC...."[..]).is_err());
    }
}
