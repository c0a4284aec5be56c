//! Binary-input AWGN channel with antipodal signalling.
//!
//! QPSK with Gray mapping is modelled as two independent BPSK rails of
//! amplitude 1/sqrt(2); with unit symbol energy the noise variance per rail is
//! (2 Es/N0)^-1 in both cases.

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Amplitude of a BPSK rail when a unit-energy QPSK symbol is split in two.
pub const QPSK_RAIL_AMPLITUDE: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub amplitude: f64,
    pub noise_variance: f64,
}

/// dB to linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Es/N0 (dB) for a given Eb/N0 (dB), code rate and bits per channel symbol.
pub fn esn0_from_ebn0(ebn0_db: f64, rate: f64, bits_per_symbol: u32) -> f64 {
    ebn0_db + 10.0 * (rate * bits_per_symbol as f64).log10()
}

pub fn ebn0_from_esn0(esn0_db: f64, rate: f64, bits_per_symbol: u32) -> f64 {
    esn0_db - 10.0 * (rate * bits_per_symbol as f64).log10()
}

/// Standard normal CDF.
pub fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Gaussian tail probability Q(x) = 1 - phi(x).
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

impl ChannelSpec {
    pub fn new(amplitude: f64, noise_variance: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!("amplitude {amplitude}")));
        }
        if !(noise_variance > 0.0 && noise_variance.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise variance {noise_variance}"
            )));
        }
        Ok(ChannelSpec {
            amplitude,
            noise_variance,
        })
    }

    /// sigma^2 = (2 Es/N0)^-1.
    pub fn from_esn0_db(amplitude: f64, esn0_db: f64) -> Result<Self> {
        ChannelSpec::new(amplitude, 1.0 / (2.0 * db_to_linear(esn0_db)))
    }

    pub fn sigma(&self) -> f64 {
        self.noise_variance.sqrt()
    }

    /// Uncoded hard-decision error probability Q(a / sigma).
    pub fn raw_ber(&self) -> f64 {
        q_function(self.amplitude / self.sigma())
    }

    /// Density of |R|: the sum of the N(+a, s^2) and N(-a, s^2) densities.
    pub fn magnitude_pdf(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::OutOfRange(format!("magnitude {r} < 0")));
        }
        let s = self.sigma();
        let norm = 1.0 / (s * (2.0 * std::f64::consts::PI).sqrt());
        let a = self.amplitude;
        Ok(norm * ((-(r - a).powi(2) / (2.0 * self.noise_variance)).exp()
            + (-(r + a).powi(2) / (2.0 * self.noise_variance)).exp()))
    }

    /// P(|R| <= r) given a transmitted +a.
    pub fn magnitude_cdf(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::OutOfRange(format!("magnitude {r} < 0")));
        }
        let s = self.sigma();
        let a = self.amplitude;
        // phi((r-a)/s) - phi((-r-a)/s), written with tails for accuracy
        let v = q_function((-r - a) / s) - q_function((r - a) / s);
        Ok(v.clamp(0.0, 1.0))
    }

    /// Inverse of [`magnitude_cdf`](Self::magnitude_cdf) for p in [0, 1),
    /// to an absolute tolerance well below 1e-9.
    pub fn magnitude_quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::OutOfRange(format!("probability {p}")));
        }
        if p == 0.0 {
            return Ok(0.0);
        }
        let mut lo = 0.0;
        let mut hi = self.amplitude + 40.0 * self.sigma();
        let mut x = self.amplitude.min(hi);
        // Newton steps safeguarded by a shrinking bracket.
        for _ in 0..200 {
            let f = self.magnitude_cdf(x)? - p;
            if f == 0.0 {
                return Ok(x);
            }
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            if hi - lo < 1e-13 {
                break;
            }
            let d = self.magnitude_pdf(x)?;
            let step = x - f / d;
            x = if d > 0.0 && step > lo && step < hi && step != x {
                step
            } else {
                0.5 * (lo + hi)
            };
        }
        Ok(x)
    }

    /// Sends `bits` (0 -> +a, 1 -> -a) and returns per-bit magnitudes and
    /// hard decisions in the provided buffers.
    pub fn transmit<R: Rng + ?Sized>(
        &self,
        bits: &[u8],
        rng: &mut R,
        magnitudes: &mut Vec<f64>,
        hard: &mut Vec<u8>,
    ) {
        let s = self.sigma();
        let a = self.amplitude;
        magnitudes.clear();
        hard.clear();
        magnitudes.reserve(bits.len());
        hard.reserve(bits.len());
        for &b in bits {
            let n: f64 = rng.sample(StandardNormal);
            let y = if b & 1 == 0 { a } else { -a } + s * n;
            magnitudes.push(y.abs());
            hard.push((y < 0.0) as u8);
        }
    }

    /// Noise-free reception, used when the noise is disabled.
    pub fn transmit_noiseless(&self, bits: &[u8], magnitudes: &mut Vec<f64>, hard: &mut Vec<u8>) {
        magnitudes.clear();
        hard.clear();
        magnitudes.extend(bits.iter().map(|_| self.amplitude));
        hard.extend(bits.iter().map(|&b| b & 1));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bisect_cdf(ch: &ChannelSpec, p: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, 50.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ch.magnitude_cdf(mid).unwrap() < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn variance_from_esn0() {
        let ch = ChannelSpec::from_esn0_db(QPSK_RAIL_AMPLITUDE, 0.0).unwrap();
        assert!((ch.noise_variance - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pdf_at_zero_is_twice_one_gaussian() {
        let ch = ChannelSpec::new(1.0, 0.3).unwrap();
        let s = ch.sigma();
        let g = (-1.0 / (2.0 * 0.3f64)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
        assert!((ch.magnitude_pdf(0.0).unwrap() - 2.0 * g).abs() < 1e-14);
        assert!(ch.magnitude_pdf(-0.1).is_err());
    }

    #[test]
    fn pdf_integrates_to_one() {
        for (a, v) in [(1.0, 0.27), (QPSK_RAIL_AMPLITUDE, 0.12), (1.0, 2.0)] {
            let ch = ChannelSpec::new(a, v).unwrap();
            // composite Simpson on [0, a + 20 sigma]
            let upper = a + 20.0 * ch.sigma();
            let n = 20_000;
            let h = upper / n as f64;
            let mut acc = ch.magnitude_pdf(0.0).unwrap() + ch.magnitude_pdf(upper).unwrap();
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * ch.magnitude_pdf(i as f64 * h).unwrap();
            }
            let integral = acc * h / 3.0;
            assert!((integral - 1.0).abs() < 1e-8, "{integral}");
            // cdf agrees with the integral of the pdf
            assert!((ch.magnitude_cdf(upper).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quantile_round_trip() {
        let ch = ChannelSpec::new(1.0, 0.49).unwrap();
        for i in 0..200 {
            let r = i as f64 * 0.015;
            let p = ch.magnitude_cdf(r).unwrap();
            let back = ch.magnitude_quantile(p).unwrap();
            assert!((back - r).abs() < 1e-8, "r={r} back={back}");
        }
        for i in 1..100 {
            let p = i as f64 / 100.0;
            assert!((ch.magnitude_quantile(p).unwrap() - bisect_cdf(&ch, p)).abs() < 1e-9);
        }
        assert!(ch.magnitude_quantile(1.0).is_err());
    }

    #[test]
    fn raw_ber_matches_q_function_monte_carlo() {
        let ch = ChannelSpec::new(1.0, 0.25).unwrap();
        let p = ch.raw_ber();
        let n = 2_000_000usize;
        let bits = vec![0u8; n];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (mut mag, mut hard) = (Vec::new(), Vec::new());
        ch.transmit(&bits, &mut rng, &mut mag, &mut hard);
        let errs = hard.iter().filter(|&&h| h == 1).count() as f64;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((errs - n as f64 * p).abs() < 3.0 * sd, "{errs} vs {}", n as f64 * p);
    }

    #[test]
    fn deterministic_replay() {
        let ch = ChannelSpec::new(1.0, 0.5).unwrap();
        let bits: Vec<u8> = (0..1000).map(|i| (i % 3 == 0) as u8).collect();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut m, mut h) = (Vec::new(), Vec::new());
            ch.transmit(&bits, &mut rng, &mut m, &mut h);
            (m, h)
        };
        assert_eq!(run(4), run(4));
        assert_ne!(run(4).0, run(5).0);
    }

    #[test]
    fn small_noise_has_no_errors() {
        let ch = ChannelSpec::new(1.0, 1e-4).unwrap();
        let bits: Vec<u8> = (0..100_000).map(|i| (i % 2) as u8).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (mut m, mut h) = (Vec::new(), Vec::new());
        ch.transmit(&bits, &mut rng, &mut m, &mut h);
        assert_eq!(h, bits);
    }

    #[test]
    fn ebn0_esn0_conversion() {
        let es = esn0_from_ebn0(3.6, 103.0 / 127.0, 1);
        assert!((es - 2.69034).abs() < 1e-5);
        assert!((ebn0_from_esn0(es, 103.0 / 127.0, 1) - 3.6).abs() < 1e-12);
    }
}
