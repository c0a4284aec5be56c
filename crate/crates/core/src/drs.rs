//! Dynamic reliability scores: quantizer thresholds, per-bit initialization
//! and the clipped score register.

use crate::channel::ChannelSpec;
use crate::error::{Error, Result};

/// Marker for an erased position in a ternary word.
pub const ERASED: u8 = 2;

/// How the reliability quantizer thresholds are placed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantizer {
    /// Every score level receives the same probability mass.
    EqualMass,
    /// Equal mass below `t_quan_max`; everything above maps to the top level.
    Capped { t_quan_max: f64 },
}

fn check_levels(i_s: i32, i_e: i32) -> Result<()> {
    if i_s >= i_e {
        return Err(Error::InvalidParameter(format!(
            "DRS range [{i_s}, {i_e}] is empty"
        )));
    }
    if i_s < i16::MIN as i32 || i_e > i16::MAX as i32 {
        return Err(Error::InvalidParameter(format!(
            "DRS range [{i_s}, {i_e}] exceeds 16 bits"
        )));
    }
    Ok(())
}

/// t_k = max(0, F^-1((k - i_s) / (i_e - i_s + 1))) for k = i_s..=i_e.
pub fn drs_thresholds_equal_mass(i_s: i32, i_e: i32, channel: &ChannelSpec) -> Result<Vec<f64>> {
    check_levels(i_s, i_e)?;
    let cells = (i_e - i_s + 1) as f64;
    (i_s..=i_e)
        .map(|k| {
            let p = (k - i_s) as f64 / cells;
            Ok(channel.magnitude_quantile(p)?.max(0.0))
        })
        .collect()
}

/// t_k = max(0, F^-1((k - i_s) / (i_e - i_s) * F(t_quan_max))).
pub fn drs_thresholds_capped(
    i_s: i32,
    i_e: i32,
    channel: &ChannelSpec,
    t_quan_max: f64,
) -> Result<Vec<f64>> {
    check_levels(i_s, i_e)?;
    if !(t_quan_max > 0.0 && t_quan_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_quan_max = {t_quan_max}")));
    }
    let top = channel.magnitude_cdf(t_quan_max)?;
    let span = (i_e - i_s) as f64;
    (i_s..=i_e)
        .map(|k| {
            if k == i_e {
                return Ok(t_quan_max);
            }
            let p = (k - i_s) as f64 / span * top;
            Ok(channel.magnitude_quantile(p)?.max(0.0))
        })
        .collect()
}

/// Decoder-wide DRS configuration for one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct DrsParams {
    pub i_s: i32,
    pub i_e: i32,
    /// Magnitudes strictly below this are erased.
    pub erasure_threshold: f64,
    /// Upper bound on complementary fill-pattern pairs, 1..=4.
    pub j_max: usize,
    thresholds: Vec<f64>,
    cap: Option<f64>,
}

impl DrsParams {
    pub fn new(
        i_s: i32,
        i_e: i32,
        erasure_threshold: f64,
        j_max: usize,
        thresholds: Vec<f64>,
    ) -> Result<Self> {
        check_levels(i_s, i_e)?;
        if !(1..=4).contains(&j_max) {
            return Err(Error::InvalidParameter(format!("J = {j_max} not in 1..=4")));
        }
        if !(erasure_threshold >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "erasure threshold {erasure_threshold}"
            )));
        }
        if thresholds.len() != (i_e - i_s + 1) as usize {
            return Err(Error::LengthMismatch {
                expected: (i_e - i_s + 1) as usize,
                actual: thresholds.len(),
            });
        }
        if thresholds[0] != 0.0 || thresholds.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter(
                "thresholds must start at 0 and be nondecreasing".into(),
            ));
        }
        Ok(DrsParams {
            i_s,
            i_e,
            erasure_threshold,
            j_max,
            thresholds,
            cap: None,
        })
    }

    /// Thresholds placed for the given channel by `quantizer`.
    pub fn for_channel(
        i_s: i32,
        i_e: i32,
        erasure_threshold: f64,
        j_max: usize,
        quantizer: Quantizer,
        channel: &ChannelSpec,
    ) -> Result<Self> {
        let (thresholds, cap) = match quantizer {
            Quantizer::EqualMass => (drs_thresholds_equal_mass(i_s, i_e, channel)?, None),
            Quantizer::Capped { t_quan_max } => (
                drs_thresholds_capped(i_s, i_e, channel, t_quan_max)?,
                Some(t_quan_max),
            ),
        };
        let mut p = DrsParams::new(i_s, i_e, erasure_threshold, j_max, thresholds)?;
        p.cap = cap;
        Ok(p)
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Score d with t_d <= r < t_(d+1), or i_e above the last threshold.
    #[inline]
    pub fn quantize(&self, r: f64) -> i16 {
        if let Some(cap) = self.cap {
            if r > cap {
                return self.i_e as i16;
            }
        }
        let idx = self.thresholds.partition_point(|&t| t <= r).max(1) - 1;
        (self.i_s + idx as i32) as i16
    }

    #[inline]
    pub fn clip(&self, d: i32) -> i16 {
        d.clamp(self.i_s, self.i_e) as i16
    }

    /// Ternary hard decisions and initial scores for a block of received
    /// magnitudes and signs.
    pub fn initialize(
        &self,
        magnitudes: &[f64],
        hard: &[u8],
        values: &mut [u8],
        drs: &mut [i16],
    ) -> Result<()> {
        let n = magnitudes.len();
        for (len, _) in [(hard.len(), 0), (values.len(), 1), (drs.len(), 2)] {
            if len != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: len,
                });
            }
        }
        for i in 0..n {
            let r = magnitudes[i];
            if !(r >= 0.0) {
                return Err(Error::OutOfRange(format!("magnitude {r} < 0")));
            }
            values[i] = if r < self.erasure_threshold {
                ERASED
            } else {
                hard[i] & 1
            };
            drs[i] = self.quantize(r);
        }
        Ok(())
    }
}

/// Word over {0, 1, erased}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TernaryWord(pub Vec<u8>);

impl TernaryWord {
    pub fn from_bits(bits: &[u8]) -> Self {
        TernaryWord(bits.iter().map(|b| b & 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn erase(&mut self, pos: usize) {
        self.0[pos] = ERASED;
    }

    pub fn erased_count(&self) -> usize {
        self.0.iter().filter(|&&v| v == ERASED).count()
    }
}

/// Per-bit reliability scores, always inside [i_s, i_e].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrsRegister {
    scores: Vec<i16>,
    i_s: i16,
    i_e: i16,
}

impl DrsRegister {
    pub fn new(scores: Vec<i16>, i_s: i32, i_e: i32) -> Result<Self> {
        check_levels(i_s, i_e)?;
        if let Some(s) = scores.iter().find(|&&s| (s as i32) < i_s || (s as i32) > i_e) {
            return Err(Error::OutOfRange(format!("score {s}")));
        }
        Ok(DrsRegister {
            scores,
            i_s: i_s as i16,
            i_e: i_e as i16,
        })
    }

    pub fn filled(len: usize, value: i16, i_s: i32, i_e: i32) -> Result<Self> {
        DrsRegister::new(vec![value; len], i_s, i_e)
    }

    pub fn scores(&self) -> &[i16] {
        &self.scores
    }

    pub fn bounds(&self) -> (i16, i16) {
        (self.i_s, self.i_e)
    }

    pub fn get(&self, i: usize) -> i16 {
        self.scores[i]
    }

    /// Adds `delta` and clips.
    pub fn bump(&mut self, i: usize, delta: i16) {
        self.scores[i] = (self.scores[i] + delta).clamp(self.i_s, self.i_e);
    }
}
