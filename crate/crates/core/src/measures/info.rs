use std::fmt;
use std::ops::Add;

use super::pmf::Pmf;
use crate::error::{Error, Result};

/// Roundoff allowed below zero before a computed information quantity is
/// considered a bug rather than cancellation noise.
const NEGATIVE_ROUNDOFF: f64 = 1e-9;

/// A nonnegative amount of information in nats, possibly `+inf`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct InfoValue(f64);

impl InfoValue {
    pub const ZERO: InfoValue = InfoValue(0.0);
    pub const INFINITY: InfoValue = InfoValue(f64::INFINITY);

    /// Wraps a computed value. Cancellation noise slightly below zero is
    /// flushed to zero.
    pub fn from_nats(nats: f64) -> Self {
        debug_assert!(!nats.is_nan(), "information value is NaN");
        debug_assert!(nats >= -NEGATIVE_ROUNDOFF, "information value {nats} < 0");
        InfoValue(nats.max(0.0))
    }

    pub fn nats(self) -> f64 {
        self.0
    }

    pub fn bits(self) -> f64 {
        self.0 / std::f64::consts::LN_2
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// Multiplication by a nonnegative weight with `0 * inf = 0`.
    pub fn scale(self, weight: f64) -> Self {
        if weight == 0.0 {
            InfoValue::ZERO
        } else {
            InfoValue(self.0 * weight)
        }
    }
}

impl Add for InfoValue {
    type Output = InfoValue;

    fn add(self, rhs: InfoValue) -> InfoValue {
        InfoValue(self.0 + rhs.0)
    }
}

impl std::iter::Sum for InfoValue {
    fn sum<I: Iterator<Item = InfoValue>>(iter: I) -> InfoValue {
        iter.fold(InfoValue::ZERO, Add::add)
    }
}

impl fmt::Display for InfoValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_finite() {
            write!(f, "{} nats", self.0)
        } else {
            f.write_str("inf nats")
        }
    }
}

/// Relative entropy `D(a || b)` in nats.
///
/// Terms with `a(w) = 0` contribute nothing; any `a(w) > 0` with `b(w) = 0`
/// makes the divergence infinite.
pub fn kl_divergence(a: &Pmf, b: &Pmf) -> Result<InfoValue> {
    if a.len() != b.len() {
        return Err(Error::SpecMismatch(format!(
            "divergence between pmfs of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(kl_divergence_slices(a.as_slice(), b.as_slice()))
}

pub(crate) fn kl_divergence_slices(a: &[f64], b: &[f64]) -> InfoValue {
    let mut acc = 0.0;
    for (&pa, &pb) in a.iter().zip(b) {
        if pa == 0.0 {
            continue;
        }
        if pb == 0.0 {
            return InfoValue::INFINITY;
        }
        acc += pa * (pa / pb).ln();
    }
    InfoValue::from_nats(acc)
}

/// Shannon entropy in nats with `0 log 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&w| w > 0.0).map(|&w| -w * w.ln()).sum()
}

/// Binary entropy `h(t)` in nats.
pub fn binary_entropy(t: f64) -> f64 {
    entropy(&[t, 1.0 - t])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn pmf(w: &[f64]) -> Pmf {
        Pmf::new(w.to_vec()).unwrap()
    }

    #[test]
    fn self_divergence_is_zero() {
        let p = pmf(&[0.2, 0.3, 0.5]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), InfoValue::ZERO);
    }

    #[test]
    fn single_surviving_term() {
        let d = kl_divergence(&pmf(&[1.0, 0.0]), &pmf(&[0.5, 0.5])).unwrap();
        assert!((d.nats() - LN_2).abs() < 1e-15);
        assert!((d.bits() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn absolute_continuity_failure_is_infinite() {
        let d = kl_divergence(&pmf(&[0.5, 0.5]), &pmf(&[1.0, 0.0])).unwrap();
        assert_eq!(d, InfoValue::INFINITY);
        assert!(!d.is_finite());
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            kl_divergence(&pmf(&[1.0]), &pmf(&[0.5, 0.5])),
            Err(Error::SpecMismatch(_))
        ));
    }

    #[test]
    fn infinity_arithmetic() {
        assert_eq!(InfoValue::INFINITY + InfoValue::from_nats(1.0), InfoValue::INFINITY);
        assert_eq!(InfoValue::INFINITY.scale(0.0), InfoValue::ZERO);
        assert_eq!(InfoValue::from_nats(-1e-15), InfoValue::ZERO);
    }

    #[test]
    fn binary_entropy_values() {
        assert!((binary_entropy(0.5) - LN_2).abs() < 1e-15);
        assert_eq!(binary_entropy(0.0), 0.0);
        // h(0.1) = -0.1 ln 0.1 - 0.9 ln 0.9
        assert!((binary_entropy(0.1) - 0.325_082_973_391_448_2).abs() < 1e-15);
    }
}
