//! Classical coloring by sequential projective measurement.

use rand::Rng;

use super::assignment::Assignment;
use super::linalg::C64;
use super::QuantumError;
use crate::graph::{Color, Coloring};

/// Outcome probabilities below this are treated as impossible.
pub const PROB_FLOOR: f64 = 1e-15;

/// Measures `{B^v_alpha}` for each `v` in `order`, sampling by the Born rule
/// and updating `rho <- B rho B / Tr(B rho B)` after every step.
pub fn sequential_coloring<R: Rng + ?Sized>(
    a: &Assignment,
    order: &[usize],
    rng: &mut R,
) -> Result<Coloring, QuantumError> {
    let n = a.vertices();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&v| v >= n || std::mem::replace(&mut seen[v], true)) {
        return Err(QuantumError::DimensionMismatch(format!(
            "order {order:?} is not a permutation of 0..{n}"
        )));
    }
    let mut rho = a.rho.clone();
    let mut colors = vec![0 as Color; n];
    for &v in order {
        let mut probs = [0.0f64; 3];
        for (alpha, p) in probs.iter_mut().enumerate() {
            let b = a.proj(v, alpha as Color)?;
            *p = (b * &rho).trace().re.max(0.0);
        }
        let total: f64 = probs.iter().filter(|&&p| p >= PROB_FLOOR).sum();
        if total < PROB_FLOOR {
            return Err(QuantumError::ZeroProbability);
        }
        let alpha = loop {
            let mut u = rng.gen::<f64>() * total;
            let mut pick = None;
            for (k, &p) in probs.iter().enumerate() {
                if p < PROB_FLOOR {
                    continue;
                }
                if u < p {
                    pick = Some(k);
                    break;
                }
                u -= p;
            }
            if let Some(k) = pick {
                break k;
            }
        };
        let b = a.proj(v, alpha as Color)?;
        rho = b * &rho * b * C64::new(1.0 / probs[alpha], 0.0);
        colors[v] = alpha as Color;
    }
    Ok(Coloring(colors))
}
