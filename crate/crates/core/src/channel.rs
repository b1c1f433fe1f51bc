//! Subchannel SNR profiles.
//!
//! A profile is the vector of post-power linear SNRs
//! `snr_i = |h_i|^2 p_i P / sigma_i^2`. It can be built from explicit channel
//! data, drawn from a Rayleigh fading distribution, or evaluated from a
//! multipath frequency-response model.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of the random generator behind [`rayleigh_profile`], written
/// into every output file that depends on a draw.
pub const RNG_ALGORITHM: &str =
    "pcg64-xsl-rr-128/64 seed_from_u64; u=(next_u64>>11)*2^-53; gain=-ln(1-u)";

/// Raw channel description for `n` subchannels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    /// Channel power gains `|h_i|^2`.
    pub gains: Vec<f64>,
    /// Noise variances `sigma_i^2`.
    pub noise_vars: Vec<f64>,
    /// Peak transmit power `P`.
    pub peak_power: f64,
    /// Fractions `p_i` of the peak power used on each subchannel.
    pub power_fractions: Vec<f64>,
}

impl ChannelSpec {
    pub fn new(
        gains: Vec<f64>,
        noise_vars: Vec<f64>,
        peak_power: f64,
        power_fractions: Vec<f64>,
    ) -> Result<Self> {
        let spec = Self {
            gains,
            noise_vars,
            peak_power,
            power_fractions,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Spec with every subchannel at full power.
    pub fn full_power(gains: Vec<f64>, noise_vars: Vec<f64>, peak_power: f64) -> Result<Self> {
        let n = gains.len();
        Self::new(gains, noise_vars, peak_power, vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.gains.len();
        if n == 0 {
            return Err(Error::EmptyChannel);
        }
        for (what, len) in [
            ("noise_vars", self.noise_vars.len()),
            ("power_fractions", self.power_fractions.len()),
        ] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: n,
                    got: len,
                });
            }
        }
        if !(self.peak_power.is_finite() && self.peak_power > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "peak power must be positive, got {}",
                self.peak_power
            )));
        }
        for (index, &value) in self.noise_vars.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveNoise { index, value });
            }
        }
        for (i, &g) in self.gains.iter().enumerate() {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "gain at subchannel {i} must be non-negative, got {g}"
                )));
            }
        }
        for (i, &p) in self.power_fractions.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "power fraction at subchannel {i} must lie in [0, 1], got {p}"
                )));
            }
        }
        Ok(())
    }

    /// `|h_i|^2 P / sigma_i^2`, the SNR each subchannel reaches at full power.
    pub fn full_power_snr(&self) -> Vec<f64> {
        self.gains
            .iter()
            .zip(&self.noise_vars)
            .map(|(g, s)| g * self.peak_power / s)
            .collect()
    }
}

/// Per-subchannel linear SNRs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SnrProfile {
    snr: Vec<f64>,
}

impl SnrProfile {
    pub fn new(snr: Vec<f64>) -> Result<Self> {
        if snr.is_empty() {
            return Err(Error::EmptyChannel);
        }
        for (i, &s) in snr.iter().enumerate() {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "SNR at subchannel {i} must be finite and non-negative, got {s}"
                )));
            }
        }
        if snr.iter().all(|&s| s == 0.0) {
            return Err(Error::AllZeroProfile);
        }
        Ok(Self { snr })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.snr
    }

    pub fn len(&self) -> usize {
        self.snr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snr.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.snr.iter().sum::<f64>() / self.snr.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.snr.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest strictly positive SNR.
    pub fn min_positive(&self) -> f64 {
        self.snr
            .iter()
            .copied()
            .filter(|&s| s > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Mean SNR in dB; equals the PSDNR when every subchannel runs at full power.
    pub fn mean_db(&self) -> f64 {
        10.0 * self.mean().log10()
    }

    /// Rescales the profile so that its mean SNR equals `psdnr_db`.
    pub fn scaled_to_psdnr(&self, psdnr_db: f64) -> Result<Self> {
        let target = db_to_linear(psdnr_db);
        if !(target.is_finite() && target > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "PSDNR must be finite, got {psdnr_db} dB"
            )));
        }
        let factor = target / self.mean();
        Self::new(self.snr.iter().map(|s| s * factor).collect())
    }
}

impl TryFrom<Vec<f64>> for SnrProfile {
    type Error = Error;

    fn try_from(snr: Vec<f64>) -> Result<Self> {
        Self::new(snr)
    }
}

impl From<SnrProfile> for Vec<f64> {
    fn from(p: SnrProfile) -> Self {
        p.snr
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `snr_i = |h_i|^2 p_i P / sigma_i^2`.
pub fn snr_profile(spec: &ChannelSpec) -> Result<SnrProfile> {
    spec.validate()?;
    let snr = spec
        .gains
        .iter()
        .zip(&spec.noise_vars)
        .zip(&spec.power_fractions)
        .map(|((g, s), p)| g * p * spec.peak_power / s)
        .collect();
    SnrProfile::new(snr)
}

/// Power-spectrum-density-to-noise ratio in dB; ignores the power fractions.
pub fn psdnr_db(spec: &ChannelSpec) -> Result<f64> {
    spec.validate()?;
    let full = spec.full_power_snr();
    Ok(linear_to_db(full.iter().sum::<f64>() / full.len() as f64))
}

fn unit_interval(rng: &mut Pcg64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Unit-mean exponential power gains (squared Rayleigh amplitudes).
pub fn rayleigh_gains(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = Pcg64::seed_from_u64(seed);
    (0..n)
        .map(|_| -(1.0 - unit_interval(&mut rng)).ln() + 0.0)
        .collect()
}

/// Rayleigh-faded profile whose realized mean SNR is exactly `psdnr_db`.
pub fn rayleigh_profile(n: usize, psdnr_db: f64, seed: u64) -> Result<SnrProfile> {
    if n == 0 {
        return Err(Error::EmptyChannel);
    }
    let target = db_to_linear(psdnr_db);
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "PSDNR must be finite, got {psdnr_db} dB"
        )));
    }
    let gains = rayleigh_gains(n, seed);
    let mean = gains.iter().sum::<f64>() / n as f64;
    let snr = if mean > 0.0 {
        gains.iter().map(|g| g * target / mean).collect()
    } else {
        vec![target; n]
    };
    SnrProfile::new(snr)
}

/// One propagation path of the multipath model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Path {
    /// Weighting factor (reflection/transmission product), may be negative.
    pub gain: f64,
    /// Path length in metres.
    pub delay_m: f64,
}

/// Frequency-dependent cable loss `exp(-(a0 + a1 f^k) d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Attenuation {
    pub a0: f64,
    pub a1: f64,
    pub k: f64,
}

/// Echo model `H(f) = sum_k g_k exp(-(a0 + a1 f^K) d_k) exp(-j 2 pi f d_k / v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultipathModel {
    pub paths: Vec<Path>,
    pub attenuation: Attenuation,
    /// Propagation speed in m/s.
    pub speed: f64,
}

impl MultipathModel {
    pub fn validate(&self) -> Result<()> {
        if self.paths.is_empty() {
            return Err(Error::InvalidParameter(
                "multipath model has no paths".into(),
            ));
        }
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "propagation speed must be positive, got {}",
                self.speed
            )));
        }
        Ok(())
    }

    /// Complex response `(re, im)` at frequency `f` in Hz.
    pub fn response(&self, f: f64) -> (f64, f64) {
        let Attenuation { a0, a1, k } = self.attenuation;
        let loss = a0 + a1 * f.powf(k);
        self.paths.iter().fold((0.0, 0.0), |(re, im), p| {
            let amp = p.gain * (-loss * p.delay_m).exp();
            let phase = -2.0 * PI * f * p.delay_m / self.speed;
            (re + amp * phase.cos(), im + amp * phase.sin())
        })
    }

    pub fn power_response(&self, f: f64) -> f64 {
        let (re, im) = self.response(f);
        re * re + im * im
    }
}

/// `snr_i = |H(f_i)|^2 P / N0` over a strictly increasing frequency grid.
pub fn multipath_profile(
    model: &MultipathModel,
    freqs: &[f64],
    noise_psd: f64,
    peak_power: f64,
) -> Result<SnrProfile> {
    model.validate()?;
    if freqs.is_empty() {
        return Err(Error::EmptyChannel);
    }
    if freqs.windows(2).any(|w| w[1] <= w[0]) || freqs.iter().any(|f| !f.is_finite()) {
        return Err(Error::InvalidParameter(
            "frequencies must be finite and strictly increasing".into(),
        ));
    }
    if !(noise_psd.is_finite() && noise_psd > 0.0) {
        return Err(Error::NonPositiveNoise {
            index: 0,
            value: noise_psd,
        });
    }
    if !(peak_power.is_finite() && peak_power > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "peak power must be positive, got {peak_power}"
        )));
    }
    SnrProfile::new(
        freqs
            .iter()
            .map(|&f| model.power_response(f) * peak_power / noise_psd)
            .collect(),
    )
}

/// Evenly spaced grid of `count` frequencies from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count).map(|i| start + step * i as f64).collect()
        }
    }
}

/// Rate target that keeps every subchannel reliable:
/// `floor(sum_i min(log2(1 + snr_i / 2), r_max))`.
pub fn target_bitrate(profile: &SnrProfile, r_max: u32) -> u64 {
    let total: f64 = profile
        .as_slice()
        .iter()
        .map(|&s| (1.0 + s / 2.0).log2().min(r_max as f64))
        .sum();
    total.floor() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_examples() {
        let spec = ChannelSpec::new(vec![1.0], vec![1.0], 1.0, vec![1.0]).unwrap();
        assert_eq!(snr_profile(&spec).unwrap().as_slice(), &[1.0]);

        let spec = ChannelSpec::new(vec![2.0, 0.5], vec![1.0, 1.0], 4.0, vec![1.0, 0.5]).unwrap();
        assert_eq!(snr_profile(&spec).unwrap().as_slice(), &[8.0, 1.0]);

        assert_eq!(
            ChannelSpec::new(vec![1.0], vec![0.0], 1.0, vec![1.0]),
            Err(Error::NonPositiveNoise {
                index: 0,
                value: 0.0
            })
        );
        assert!(matches!(
            ChannelSpec::new(vec![1.0, 2.0], vec![1.0], 1.0, vec![1.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(ChannelSpec::new(vec![1.0], vec![1.0], 1.0, vec![1.5]).is_err());
        assert_eq!(
            ChannelSpec::new(vec![], vec![], 1.0, vec![]),
            Err(Error::EmptyChannel)
        );
    }

    #[test]
    fn snr_is_homogeneous_in_peak_power() {
        let spec = ChannelSpec::new(
            vec![0.3, 2.0, 0.0],
            vec![0.5, 1.5, 1.0],
            3.0,
            vec![1.0, 0.2, 0.7],
        )
        .unwrap();
        let mut doubled = spec.clone();
        doubled.peak_power *= 2.0;
        let a = snr_profile(&spec).unwrap();
        let b = snr_profile(&doubled).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn psdnr_examples() {
        let spec = ChannelSpec::full_power(vec![100.0], vec![1.0], 1.0).unwrap();
        assert!((psdnr_db(&spec).unwrap() - 20.0).abs() < 1e-12);

        let spec = ChannelSpec::full_power(vec![10.0, 1000.0], vec![1.0, 1.0], 1.0).unwrap();
        let got = psdnr_db(&spec).unwrap();
        assert!((got - 10.0 * 505f64.log10()).abs() < 1e-12);
        assert!((got - 27.03).abs() < 5e-3);

        let spec = ChannelSpec::full_power(vec![7.0; 5], vec![1.0; 5], 1.0).unwrap();
        assert!((psdnr_db(&spec).unwrap() - 10.0 * 7f64.log10()).abs() < 1e-12);

        // power fractions do not enter the PSDNR
        let mut reduced = spec.clone();
        reduced.power_fractions = vec![0.1, 0.9, 0.0, 0.5, 1.0];
        assert_eq!(psdnr_db(&reduced).unwrap(), psdnr_db(&spec).unwrap());
    }

    #[test]
    fn rayleigh_examples() {
        for seed in [0, 1, 99] {
            let p = rayleigh_profile(1, 20.0, seed).unwrap();
            assert!((p.as_slice()[0] - 100.0).abs() < 1e-12);
        }
        let p = rayleigh_profile(1024, 25.0, 7).unwrap();
        let want = 10f64.powf(2.5);
        assert!(((p.mean() - want) / want).abs() < 1e-9);
        assert_eq!(p, rayleigh_profile(1024, 25.0, 7).unwrap());
        assert_ne!(p, rayleigh_profile(1024, 25.0, 8).unwrap());
        assert_eq!(rayleigh_profile(0, 25.0, 7), Err(Error::EmptyChannel));
    }

    #[test]
    fn rayleigh_gains_have_unit_mean() {
        let g = rayleigh_gains(200_000, 3);
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
        assert!(g.iter().all(|&x| x >= 0.0));
    }

    fn lossless(paths: Vec<Path>) -> MultipathModel {
        MultipathModel {
            paths,
            attenuation: Attenuation {
                a0: 0.0,
                a1: 0.0,
                k: 1.0,
            },
            speed: 1.5e8,
        }
    }

    #[test]
    fn single_lossless_path() {
        let model = lossless(vec![Path {
            gain: 1.0,
            delay_m: 123.0,
        }]);
        let freqs = linear_grid(1e6, 2e7, 50);
        let p = multipath_profile(&model, &freqs, 0.25, 2.0).unwrap();
        for &s in p.as_slice() {
            assert!((s - 8.0).abs() < 1e-12);
        }
    }

    #[test]
    fn half_wavelength_cancellation() {
        let f0 = 3e6;
        let d = 200.0;
        let model = lossless(vec![
            Path {
                gain: 1.0,
                delay_m: d,
            },
            Path {
                gain: 1.0,
                delay_m: d + 1.5e8 / (2.0 * f0),
            },
        ]);
        assert!(model.power_response(f0) < 1e-20);
        assert!((model.power_response(f0 / 2.0) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn magnitude_ignores_common_delay_shift_without_loss() {
        let a = lossless(vec![
            Path {
                gain: 0.6,
                delay_m: 100.0,
            },
            Path {
                gain: -0.3,
                delay_m: 170.0,
            },
        ]);
        let b = lossless(vec![
            Path {
                gain: 0.6,
                delay_m: 400.0,
            },
            Path {
                gain: -0.3,
                delay_m: 470.0,
            },
        ]);
        for f in linear_grid(5e5, 2e7, 40) {
            assert!((a.power_response(f) - b.power_response(f)).abs() < 1e-9);
        }
    }

    #[test]
    fn multipath_errors() {
        let model = lossless(vec![]);
        assert!(multipath_profile(&model, &[1e6], 1.0, 1.0).is_err());
        let model = lossless(vec![Path {
            gain: 1.0,
            delay_m: 10.0,
        }]);
        assert!(multipath_profile(&model, &[2e6, 1e6], 1.0, 1.0).is_err());
    }

    #[test]
    fn target_bitrate_examples() {
        let p = SnrProfile::new(vec![6.0]).unwrap();
        assert_eq!(target_bitrate(&p, 15), 2);
        let p = SnrProfile::new(vec![2f64.powi(20)]).unwrap();
        assert_eq!(target_bitrate(&p, 15), 15);
        let p = SnrProfile::new(vec![6.0, 6.0, 2f64.powi(20)]).unwrap();
        assert_eq!(target_bitrate(&p, 15), 19);
    }

    #[test]
    fn profile_validation() {
        assert_eq!(SnrProfile::new(vec![0.0, 0.0]), Err(Error::AllZeroProfile));
        assert!(SnrProfile::new(vec![1.0, -1.0]).is_err());
        assert!(SnrProfile::new(vec![f64::NAN]).is_err());
        let p: SnrProfile = serde_json::from_str("[1.0, 0.0, 3.0]").unwrap();
        assert_eq!(p.min_positive(), 1.0);
        assert_eq!(p.max(), 3.0);
        assert!(serde_json::from_str::<SnrProfile>("[]").is_err());
    }

    #[test]
    fn rescaling_hits_target() {
        let p = SnrProfile::new(vec![1.0, 3.0, 8.0]).unwrap();
        let q = p.scaled_to_psdnr(30.0).unwrap();
        assert!((q.mean_db() - 30.0).abs() < 1e-12);
    }
}
