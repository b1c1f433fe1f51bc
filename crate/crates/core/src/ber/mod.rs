//! Bit-error-rate model for Gray-mapped square and rectangular QAM.
//!
//! The per-subchannel BER keeps only the leading term of the exact closed
//! form. An `r`-bit constellation is laid out as an `I x J` grid with
//! `I = 2^floor(r/2) <= J = 2^ceil(r/2)`, so BPSK (`r = 1`) is the `1 x 2`
//! case. The expression is within 1 % of the exact BER below
//! [`MODEL_VALIDITY_BER`] and `r * ber(r)` is convex in `r` below
//! [`CONVEX_DOMAIN_BER`].

mod erfc;

pub use erfc::erfc;

use crate::error::{Error, Result};

/// Largest per-channel BER for which the leading-term approximation is trusted.
pub const MODEL_VALIDITY_BER: f64 = 5e-2;

/// Largest per-channel BER for which `r -> r * ber(r)` is locally convex.
pub const CONVEX_DOMAIN_BER: f64 = 2e-2;

/// Largest bit count accepted by the model; keeps `2^r - 1` exact in an `f64`.
pub const MAX_BITS: u32 = 52;

/// Side lengths of the QAM grid carrying `r` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QamShape {
    bits: u32,
    i_side: u64,
    j_side: u64,
}

impl QamShape {
    pub fn new(bits: u32) -> Result<Self> {
        if bits == 0 {
            return Err(Error::ZeroBits);
        }
        if bits > MAX_BITS {
            return Err(Error::InvalidParameter(format!(
                "constellations above {MAX_BITS} bits are not supported, got {bits}"
            )));
        }
        Ok(Self {
            bits,
            i_side: 1u64 << (bits / 2),
            j_side: 1u64 << bits.div_ceil(2),
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// In-phase side, the shorter one.
    pub fn i_side(&self) -> u64 {
        self.i_side
    }

    pub fn j_side(&self) -> u64 {
        self.j_side
    }

    pub fn is_square(&self) -> bool {
        self.i_side == self.j_side
    }

    /// `(2 - 1/I - 1/J) / r`
    fn coefficient(&self) -> f64 {
        (2.0 - 1.0 / self.i_side as f64 - 1.0 / self.j_side as f64) / self.bits as f64
    }

    /// `3 / (I^2 + J^2 - 2)`, exact for one and two bits so the BPSK and
    /// QPSK arguments are `snr` and `snr / 2` without extra rounding.
    fn snr_scale(&self) -> f64 {
        3.0 / self.energy_spread()
    }

    /// `I^2 + J^2 - 2`
    fn energy_spread(&self) -> f64 {
        let (i, j) = (self.i_side as f64, self.j_side as f64);
        i * i + j * j - 2.0
    }
}

/// `2^r - 1` computed on integers before conversion.
pub fn pow2_minus_one(bits: u32) -> f64 {
    debug_assert!(bits <= MAX_BITS);
    ((1u64 << bits) - 1) as f64
}

fn check_snr(snr: f64) -> Result<()> {
    if snr.is_nan() || snr < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "SNR must be non-negative, got {snr}"
        )));
    }
    Ok(())
}

/// Approximate BER of an `r`-bit QAM constellation at linear SNR `snr`.
pub fn qam_ber(bits: u32, snr: f64) -> Result<f64> {
    let shape = QamShape::new(bits)?;
    check_snr(snr)?;
    Ok(shape.coefficient() * erfc((snr * shape.snr_scale()).sqrt()))
}

/// Same BER written in terms of the SNR-gap `gamma = snr / (2^r - 1)`.
pub fn qam_ber_from_gap(bits: u32, gamma: f64) -> Result<f64> {
    let shape = QamShape::new(bits)?;
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "SNR-gap must be positive, got {gamma}"
        )));
    }
    let size = (shape.i_side * shape.j_side - 1) as f64;
    Ok(shape.coefficient() * erfc((3.0 * size * gamma / shape.energy_spread()).sqrt()))
}

/// SNR-gap `snr / (2^r - 1)` of a channel carrying `r` bits.
pub fn snr_gap(bits: u32, snr: f64) -> Result<f64> {
    QamShape::new(bits)?;
    check_snr(snr)?;
    Ok(snr / pow2_minus_one(bits))
}

/// Inverse SNR-gap `(2^r - 1) / snr`; zero for an empty channel and infinite
/// for a loaded channel with no SNR.
///
/// This is the single definition used by the margin objective, the margin
/// greedy and the exhaustive oracle.
pub fn inverse_gap(bits: u32, snr: f64) -> f64 {
    if bits == 0 {
        return 0.0;
    }
    pow2_minus_one(bits) / snr
}

/// Expected erroneous bits per symbol, `r * ber(r, snr)`, with `ber(0) = 0`.
pub fn expected_bit_errors(bits: u32, snr: f64) -> f64 {
    if bits == 0 {
        return 0.0;
    }
    let shape = QamShape::new(bits).expect("bit count checked by caller");
    let ber = shape.coefficient() * erfc((snr * shape.snr_scale()).sqrt());
    bits as f64 * ber
}

/// Per-channel BER with the `ber(0) = 0` convention for empty channels.
pub fn channel_ber(bits: u32, snr: f64) -> f64 {
    if bits == 0 {
        0.0
    } else {
        expected_bit_errors(bits, snr) / bits as f64
    }
}

/// True when `qam_ber(r, snr) <= 2e-2`, the regime where `r * ber(r)` is a
/// convex sequence and BER-greedy loading is optimal.
pub fn in_convex_domain(bits: u32, snr: f64) -> Result<bool> {
    Ok(qam_ber(bits, snr)? <= CONVEX_DOMAIN_BER)
}
