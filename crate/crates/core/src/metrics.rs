//! Robustness measures of a finished allocation and the dissimilarity
//! between two allocations.
//!
//! Empty subchannels (`r_i = 0`) have an unbounded SNR-gap and carry no bits,
//! so they are left out of both the system margin and the weighted BER.

use serde::{Deserialize, Serialize};

use crate::ber::{self, MODEL_VALIDITY_BER};
use crate::channel::{linear_to_db, SnrProfile};
use crate::error::{Error, Result};

/// Integer bit vector with granularity `beta` and per-channel cap `r_max`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Allocation {
    bits: Vec<u32>,
    granularity: u32,
    cap: u32,
}

impl Allocation {
    pub fn new(bits: Vec<u32>, granularity: u32, cap: u32) -> Result<Self> {
        if granularity == 0 {
            return Err(Error::InvalidParameter("granularity must be >= 1".into()));
        }
        if !cap.is_multiple_of(granularity) {
            return Err(Error::InvalidParameter(format!(
                "cap {cap} is not a multiple of granularity {granularity}"
            )));
        }
        if cap > ber::MAX_BITS {
            return Err(Error::InvalidParameter(format!(
                "cap {cap} exceeds {} bits",
                ber::MAX_BITS
            )));
        }
        for (i, &r) in bits.iter().enumerate() {
            if r % granularity != 0 || r > cap {
                return Err(Error::InvalidParameter(format!(
                    "subchannel {i} carries {r} bits, not a multiple of {granularity} in [0, {cap}]"
                )));
            }
        }
        Ok(Self {
            bits,
            granularity,
            cap,
        })
    }

    /// Allocation with `beta = 1` and the cap set to the largest entry.
    pub fn from_bits(bits: Vec<u32>) -> Result<Self> {
        let cap = bits.iter().copied().max().unwrap_or(0);
        Self::new(bits, 1, cap)
    }

    pub fn bits(&self) -> &[u32] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<u32> {
        self.bits
    }

    pub fn granularity(&self) -> u32 {
        self.granularity
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.bits.iter().map(|&r| r as u64).sum()
    }

    pub fn loaded(&self) -> usize {
        self.bits.iter().filter(|&&r| r > 0).count()
    }
}

fn check_lengths(bits: &[u32], profile: &SnrProfile) -> Result<()> {
    if bits.len() != profile.len() {
        return Err(Error::DimensionMismatch {
            what: "allocation",
            expected: profile.len(),
            got: bits.len(),
        });
    }
    if bits.iter().all(|&r| r == 0) {
        return Err(Error::EmptyAllocation);
    }
    Ok(())
}

/// `max_i (2^r_i - 1) / snr_i` over loaded channels, the quantity the margin
/// problem minimizes.
pub fn inverse_margin(bits: &[u32], profile: &SnrProfile) -> Result<f64> {
    check_lengths(bits, profile)?;
    Ok(inverse_margin_unchecked(bits, profile.as_slice()))
}

pub(crate) fn inverse_margin_unchecked(bits: &[u32], snr: &[f64]) -> f64 {
    bits.iter()
        .zip(snr)
        .filter(|(&r, _)| r > 0)
        .map(|(&r, &s)| ber::inverse_gap(r, s))
        .fold(0.0, f64::max)
}

/// System margin `10 log10(min_i gamma_i)` over loaded channels, in dB.
pub fn system_margin(bits: &[u32], profile: &SnrProfile) -> Result<f64> {
    check_lengths(bits, profile)?;
    let min_gap = bits
        .iter()
        .zip(profile.as_slice())
        .filter(|(&r, _)| r > 0)
        .map(|(&r, &s)| s / ber::pow2_minus_one(r))
        .fold(f64::INFINITY, f64::min);
    Ok(linear_to_db(min_gap))
}

/// Bit-weighted mean BER `sum_i r_i ber_i(r_i) / sum_i r_i`.
pub fn weighted_ber(bits: &[u32], profile: &SnrProfile) -> Result<f64> {
    check_lengths(bits, profile)?;
    Ok(weighted_ber_unchecked(bits, profile.as_slice()))
}

pub(crate) fn weighted_ber_unchecked(bits: &[u32], snr: &[f64]) -> f64 {
    let total: u64 = bits.iter().map(|&r| r as u64).sum();
    let errors: f64 = bits
        .iter()
        .zip(snr)
        .map(|(&r, &s)| ber::expected_bit_errors(r, s))
        .sum();
    errors / total as f64
}

/// Power fraction needed to run `r` bits at SNR-gap `gap` on a channel whose
/// full-power SNR is `full_snr`: `(2^r - 1) gap / full_snr`.
pub fn required_power_fraction(bits: u32, gap: f64, full_snr: f64) -> f64 {
    if bits == 0 {
        return 0.0;
    }
    ber::inverse_gap(bits, full_snr) * gap
}

/// Largest power fraction an allocation needs to meet per-channel SNR-gap
/// targets, given full-power SNRs `|h_i|^2 P / sigma_i^2`.
pub fn peak_power(bits: &[u32], gaps: &[f64], full_snr: &[f64]) -> Result<f64> {
    if bits.len() != gaps.len() || bits.len() != full_snr.len() {
        return Err(Error::DimensionMismatch {
            what: "gap targets",
            expected: bits.len(),
            got: gaps.len().min(full_snr.len()),
        });
    }
    Ok(bits
        .iter()
        .zip(gaps)
        .zip(full_snr)
        .map(|((&r, &g), &s)| required_power_fraction(r, g, s))
        .fold(0.0, f64::max))
}

/// Fraction of loaded subchannels whose bit counts differ between `x` and `y`.
///
/// The denominator is the larger number of loaded subchannels of the two
/// allocations, so channels empty in both never count.
pub fn dissimilarity(x: &[u32], y: &[u32]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            what: "allocation",
            expected: x.len(),
            got: y.len(),
        });
    }
    let loaded_x = x.iter().filter(|&&r| r != 0).count();
    let loaded_y = y.iter().filter(|&&r| r != 0).count();
    let denom = loaded_x.max(loaded_y);
    if denom == 0 {
        return Err(Error::UndefinedDissimilarity);
    }
    let differ = x.iter().zip(y).filter(|(a, b)| a != b).count();
    Ok(differ as f64 / denom as f64)
}

/// Robustness summary of one allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub system_margin_db: f64,
    pub weighted_ber: f64,
    /// SNR-gap of each subchannel in dB; `None` for empty subchannels.
    pub per_channel_gap_db: Vec<Option<f64>>,
    pub per_channel_ber: Vec<f64>,
    /// True when every loaded subchannel stays within the BER model's validity.
    pub validity_flag: bool,
}

impl RobustnessReport {
    pub fn evaluate(bits: &[u32], profile: &SnrProfile) -> Result<Self> {
        let system_margin_db = system_margin(bits, profile)?;
        let weighted_ber = weighted_ber(bits, profile)?;
        let snr = profile.as_slice();
        let per_channel_gap_db = bits
            .iter()
            .zip(snr)
            .map(|(&r, &s)| (r > 0).then(|| linear_to_db(s / ber::pow2_minus_one(r))))
            .collect();
        let per_channel_ber: Vec<f64> = bits
            .iter()
            .zip(snr)
            .map(|(&r, &s)| ber::channel_ber(r, s))
            .collect();
        let validity_flag = per_channel_ber.iter().all(|&b| b <= MODEL_VALIDITY_BER);
        Ok(Self {
            system_margin_db,
            weighted_ber,
            per_channel_gap_db,
            per_channel_ber,
            validity_flag,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ber::qam_ber;

    fn profile(v: &[f64]) -> SnrProfile {
        SnrProfile::new(v.to_vec()).unwrap()
    }

    #[test]
    fn allocation_invariants() {
        assert!(Allocation::new(vec![2, 4, 0], 2, 4).is_ok());
        assert!(Allocation::new(vec![2, 3], 2, 4).is_err());
        assert!(Allocation::new(vec![6], 2, 4).is_err());
        assert!(Allocation::new(vec![1], 2, 5).is_err());
        assert!(Allocation::new(vec![1], 0, 5).is_err());
        let a = Allocation::from_bits(vec![3, 0, 5]).unwrap();
        assert_eq!((a.total(), a.loaded(), a.cap()), (8, 2, 5));
    }

    #[test]
    fn margin_examples() {
        assert!(system_margin(&[1], &profile(&[1.0])).unwrap().abs() < 1e-12);
        assert!(
            system_margin(&[2, 0], &profile(&[3.0, 999.0]))
                .unwrap()
                .abs()
                < 1e-12
        );
        let m = system_margin(&[1, 2], &profile(&[10.0, 30.0])).unwrap();
        assert!((m - 10.0).abs() < 1e-12);
        assert_eq!(
            system_margin(&[0, 0], &profile(&[1.0, 1.0])),
            Err(Error::EmptyAllocation)
        );
        assert!(matches!(
            system_margin(&[1], &profile(&[1.0, 1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(
            inverse_margin(&[1, 2], &profile(&[10.0, 30.0])).unwrap(),
            0.1
        );
    }

    #[test]
    fn weighted_ber_examples() {
        let p = profile(&[12.0]);
        assert_eq!(weighted_ber(&[3], &p).unwrap(), qam_ber(3, 12.0).unwrap());

        let p = profile(&[7.0, 7.0]);
        let b = qam_ber(1, 7.0).unwrap();
        assert!((weighted_ber(&[1, 1], &p).unwrap() - b).abs() <= 1e-16);

        let (s1, s2) = (40.0, 300.0);
        let p = profile(&[s1, s2]);
        let want = (2.0 * qam_ber(2, s1).unwrap() + 4.0 * qam_ber(4, s2).unwrap()) / 6.0;
        assert!((weighted_ber(&[2, 4], &p).unwrap() - want).abs() <= 1e-16);
        assert_eq!(weighted_ber(&[0, 0], &p), Err(Error::EmptyAllocation));
    }

    #[test]
    fn dissimilarity_examples() {
        let x = [4, 3, 3, 0];
        assert_eq!(dissimilarity(&x, &[3, 2, 2, 2]).unwrap(), 1.0);
        assert_eq!(dissimilarity(&x, &[5, 5, 0, 0]).unwrap(), 1.0);
        assert_eq!(dissimilarity(&x, &[4, 3, 2, 1]).unwrap(), 0.5);
        assert_eq!(dissimilarity(&x, &x).unwrap(), 0.0);
        assert_eq!(
            dissimilarity(&[0, 0], &[0, 0]),
            Err(Error::UndefinedDissimilarity)
        );
        assert!(dissimilarity(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn report_fields() {
        let p = profile(&[100.0, 0.5, 1.0e4]);
        let r = RobustnessReport::evaluate(&[3, 0, 8], &p).unwrap();
        assert_eq!(r.per_channel_gap_db[1], None);
        assert_eq!(r.per_channel_ber[1], 0.0);
        let g0 = r.per_channel_gap_db[0].unwrap();
        let g2 = r.per_channel_gap_db[2].unwrap();
        assert!((r.system_margin_db - g0.min(g2)).abs() < 1e-12);
        assert!(r.validity_flag);

        let r = RobustnessReport::evaluate(&[3, 1, 8], &p).unwrap();
        assert!(!r.validity_flag);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("system_margin_db"));
    }

    #[test]
    fn peak_power_requirement() {
        let full = [4.0, 9.0];
        let p = peak_power(&[2, 1], &[1.0, 3.0], &full).unwrap();
        assert_eq!(p, (3.0f64 / 4.0).max(3.0 / 9.0));
        assert_eq!(required_power_fraction(0, 5.0, 0.0), 0.0);
    }
}
