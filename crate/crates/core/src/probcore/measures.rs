use super::{empirical_distribution, DataMatrix, JointDistribution};
use crate::{OcteError, Result};

/// Values whose magnitude is below this are floating-point residue of the
/// four-entropy formula and are reported as exactly zero.
pub const NOISE_FLOOR: f64 = 1e-12;

/// Most negative raw value a (conditional) mutual information may take
/// before clamping; anything lower indicates a broken table.
pub const NEGATIVE_TOLERANCE: f64 = -1e-9;

/// `-Σ p log2 p` with `0 log 0 = 0`.
pub(crate) fn entropy_raw<'a>(probs: impl IntoIterator<Item = &'a f64>) -> f64 {
    let mut h = 0.0;
    for &p in probs {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

pub(crate) fn clamp(raw: f64) -> f64 {
    debug_assert!(raw >= NEGATIVE_TOLERANCE, "information value {raw} below tolerance");
    if raw < NOISE_FLOOR {
        0.0
    } else {
        raw
    }
}

/// Raw (unclamped) `I(A;B|S)` from a table laid out as `(s * na + a) * nb + b`.
pub(crate) fn cmi_from_table(table: &[f64], na: usize, nb: usize, ns: usize) -> f64 {
    debug_assert_eq!(table.len(), na * nb * ns);
    let mut p_as = vec![0.0; ns * na];
    let mut p_bs = vec![0.0; ns * nb];
    let mut p_s = vec![0.0; ns];
    for s in 0..ns {
        for a in 0..na {
            let row = &table[(s * na + a) * nb..(s * na + a + 1) * nb];
            for (b, &p) in row.iter().enumerate() {
                p_as[s * na + a] += p;
                p_bs[s * nb + b] += p;
            }
        }
        p_s[s] = p_as[s * na..(s + 1) * na].iter().sum();
    }
    entropy_raw(&p_as) + entropy_raw(&p_bs) - entropy_raw(table) - entropy_raw(&p_s)
}

/// Shannon entropy in bits.
pub fn entropy(dist: &JointDistribution) -> f64 {
    entropy_raw(dist.probabilities()).max(0.0)
}

/// `I(A;B)` in bits.
pub fn mutual_information(dist: &JointDistribution, a: &[usize], b: &[usize]) -> Result<f64> {
    cmi(dist, a, b, &[])
}

/// `I(A;B|S)` in bits; `S` may be empty.
pub fn cmi(dist: &JointDistribution, a: &[usize], b: &[usize], s: &[usize]) -> Result<f64> {
    cmi_raw(dist, a, b, s).map(clamp)
}

pub(crate) fn cmi_raw(dist: &JointDistribution, a: &[usize], b: &[usize], s: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(OcteError::arg("both sides of a mutual information must be nonempty"));
    }
    check_disjoint(a, b, "A", "B")?;
    check_disjoint(a, s, "A", "S")?;
    check_disjoint(b, s, "B", "S")?;
    let (table, cards) = dist.project(&[s, a, b])?;
    Ok(cmi_from_table(&table, cards[1], cards[2], cards[0]))
}

/// Plug-in `I(A;B|S)` on the relative frequencies of `data`.
pub fn plugin_cmi(data: &DataMatrix, a: &[usize], b: &[usize], s: &[usize]) -> Result<f64> {
    let mut vars: Vec<usize> = Vec::with_capacity(a.len() + b.len() + s.len());
    for &v in s.iter().chain(a).chain(b) {
        if vars.contains(&v) {
            return Err(OcteError::arg(format!("variable #{v} appears twice")));
        }
        vars.push(v);
    }
    if a.is_empty() || b.is_empty() {
        return Err(OcteError::arg("both sides of a mutual information must be nonempty"));
    }
    cmi(&empirical_distribution(data, &vars)?, a, b, s)
}

fn check_disjoint(x: &[usize], y: &[usize], xn: &str, yn: &str) -> Result<()> {
    match x.iter().find(|v| y.contains(v)) {
        Some(v) => Err(OcteError::arg(format!("variable #{v} is in both {xn} and {yn}"))),
        None => Ok(()),
    }
}
