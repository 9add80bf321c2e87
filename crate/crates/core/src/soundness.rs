//! Closed-form quantum-value bounds and round counts, evaluated in base-10
//! logarithms.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::graph::extended_counts;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SoundnessError {
    #[error("3n - 3 - 2*max_deg must be positive (n={n}, max_deg={max_deg})")]
    DegenerateDegree { n: u64, max_deg: u64 },
    #[error("invalid parameters: {0}")]
    BadInput(String),
    #[error("target k must be positive and finite, got {0}")]
    BadK(f64),
    #[error("scaling fit needs at least 4 points with distinct edge counts")]
    InsufficientPoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Variant {
    MainTheorem,
    AppendixChain,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::MainTheorem => "main",
            Variant::AppendixChain => "appendix",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        match s {
            "main" => Some(Variant::MainTheorem),
            "appendix" => Some(Variant::AppendixChain),
            _ => None,
        }
    }
}

/// `mantissa * 10^exponent` with `1 <= mantissa < 10`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sci {
    pub mantissa: f64,
    pub exponent: i32,
}

impl Sci {
    pub fn from_log10(l: f64) -> Sci {
        let mut exponent = l.floor() as i32;
        let mut mantissa = 10f64.powf(l - exponent as f64);
        if mantissa >= 10.0 {
            mantissa /= 10.0;
            exponent += 1;
        }
        Sci { mantissa, exponent }
    }

    pub fn log10(&self) -> f64 {
        self.mantissa.log10() + self.exponent as f64
    }

    /// `f64` value; underflows to zero or overflows to infinity if out of range.
    pub fn value(&self) -> f64 {
        10f64.powf(self.log10())
    }
}

impl fmt::Display for Sci {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(2);
        let mut s = Sci::from_log10(self.log10());
        let rounded: f64 = format!("{:.*}", digits, s.mantissa).parse().unwrap_or(s.mantissa);
        if rounded >= 10.0 {
            s.mantissa = rounded / 10.0;
            s.exponent += 1;
        } else {
            s.mantissa = rounded;
        }
        write!(f, "{:.*}e{}", digits, s.mantissa, s.exponent)
    }
}

fn check_inputs(n: u64, m: u64, max_deg: u64) -> Result<(), SoundnessError> {
    if n < 2 || m < 1 {
        return Err(SoundnessError::BadInput(format!("n={n}, m={m}")));
    }
    if 3 * n <= 3 + 2 * max_deg {
        return Err(SoundnessError::DegenerateDegree { n, max_deg });
    }
    if extended_edges(n, m) <= 0.0 {
        return Err(SoundnessError::BadInput(format!("too many edges: m={m} for n={n}")));
    }
    Ok(())
}

/// `(9/2) n (n-1) - 8m`, the extended edge count.
fn extended_edges(n: u64, m: u64) -> f64 {
    let n = n as f64;
    4.5 * n * (n - 1.0) - 8.0 * m as f64
}

/// The per-variant bracket `B(n, m, max_deg)`.
pub fn bracket(n: u64, m: u64, max_deg: u64, variant: Variant) -> Result<f64, SoundnessError> {
    check_inputs(n, m, max_deg)?;
    let den = 3.0 * n as f64 - 3.0 - 2.0 * max_deg as f64;
    let (mf, d) = (m as f64, max_deg as f64);
    let (s2, s3, s6) = (2f64.sqrt(), 3f64.sqrt(), 6f64.sqrt());
    Ok(match variant {
        Variant::AppendixChain => {
            (36.0 + 24.0 * s6 + 24.0 * s3) / den
                + 216.0 * s3 * (19.0 + s2) * d / mf
                + (9.0 + 4.0 * s2) * (3.0 + s3) / mf
        }
        Variant::MainTheorem => (324.0 + 108.0 * s2) * mf / den + 20412.0 * s2 * d + 117.0,
    })
}

/// Lower bound on the edge-verification pass rate of an `eps`-perfect
/// strategy. Negative values mean the bound is vacuous.
pub fn edge_win_floor(n: u64, m: u64, max_deg: u64, eps: f64) -> Result<f64, SoundnessError> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(SoundnessError::BadInput(format!("eps={eps}")));
    }
    let b = bracket(n, m, max_deg, Variant::AppendixChain)?;
    Ok(1.0 - eps.powf(0.25) * extended_edges(n, m) * b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoundnessReport {
    pub variant: Variant,
    pub n: u64,
    pub m: u64,
    pub max_deg: u64,
    pub k: Option<f64>,
    pub bracket: f64,
    pub log10_epsilon_star: f64,
    /// `1 - omega_q`, equal to `epsilon_star`.
    pub one_minus_omega_q: Sci,
    /// Rounded to `f64`: exactly 1 whenever `epsilon_star < 1e-16`.
    pub omega_q: f64,
    pub rounds: Option<Sci>,
    /// `e^{-k}`.
    pub target_soundness: Option<f64>,
    pub n_ext: u64,
    pub m_ext: u64,
}

impl SoundnessReport {
    pub fn epsilon_star(&self) -> f64 {
        self.one_minus_omega_q.value()
    }
}

fn log10_epsilon_star(n: u64, m: u64, max_deg: u64, variant: Variant) -> Result<(f64, f64), SoundnessError> {
    let b = bracket(n, m, max_deg, variant)?;
    let l = (m as f64).log10() + extended_edges(n, m).log10() + b.log10();
    Ok((b, -4.0 * l))
}

/// `epsilon_star = (m * E' * B)^-4` and `omega_q = 1 - epsilon_star`.
pub fn quantum_value_bound(
    n: u64,
    m: u64,
    max_deg: u64,
    variant: Variant,
) -> Result<SoundnessReport, SoundnessError> {
    let (b, l) = log10_epsilon_star(n, m, max_deg, variant)?;
    let (n_ext, m_ext) =
        extended_counts(n, m).map_err(|e| SoundnessError::BadInput(e.to_string()))?;
    let eps = Sci::from_log10(l);
    Ok(SoundnessReport {
        variant,
        n,
        m,
        max_deg,
        k: None,
        bracket: b,
        log10_epsilon_star: l,
        one_minus_omega_q: eps,
        omega_q: 1.0 - eps.value(),
        rounds: None,
        target_soundness: None,
        n_ext,
        m_ext,
    })
}

/// `k / epsilon_star`.
pub fn rounds_required(
    n: u64,
    m: u64,
    max_deg: u64,
    k: f64,
    variant: Variant,
) -> Result<Sci, SoundnessError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(SoundnessError::BadK(k));
    }
    let (_, l) = log10_epsilon_star(n, m, max_deg, variant)?;
    Ok(Sci::from_log10(k.log10() - l))
}

/// Full report including rounds for target soundness `e^{-k}`.
pub fn report(
    n: u64,
    m: u64,
    max_deg: u64,
    k: f64,
    variant: Variant,
) -> Result<SoundnessReport, SoundnessError> {
    let rounds = rounds_required(n, m, max_deg, k, variant)?;
    let mut r = quantum_value_bound(n, m, max_deg, variant)?;
    r.k = Some(k);
    r.rounds = Some(rounds);
    r.target_soundness = Some((-k).exp());
    Ok(r)
}

/// Least-squares slope of `log(1/(1 - omega_q))` against `log m`.
pub fn scaling_probe(points: &[(u64, u64)], max_deg: u64, variant: Variant) -> Result<f64, SoundnessError> {
    if points.len() < 4 {
        return Err(SoundnessError::InsufficientPoints);
    }
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|&(n, m)| Ok(((m as f64).log10(), -log10_epsilon_star(n, m, max_deg, variant)?.1)))
        .collect::<Result<_, SoundnessError>>()?;
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx < 1e-12 {
        return Err(SoundnessError::InsufficientPoints);
    }
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}
