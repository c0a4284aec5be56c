//! Two-round parameter search for DRSD: seeded random sampling with local
//! refinement on the SNR threshold, then coordinate perturbation on the BER
//! at a fixed SNR.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::drs::Quantizer;
use crate::error::{Error, Result};
use crate::harness::{parse_key_values, parse_value, run_point, RunConfig, StopRule};

/// A tunable parameter of [`RunConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    IS,
    IE,
    ErasureThreshold,
    TaInit,
    TaStep,
    TaStar,
    PA,
    PR,
    J,
    TQuanMax,
}

impl Param {
    pub const ALL: [Param; 10] = [
        Param::IS,
        Param::IE,
        Param::ErasureThreshold,
        Param::TaInit,
        Param::TaStep,
        Param::TaStar,
        Param::PA,
        Param::PR,
        Param::J,
        Param::TQuanMax,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Param::IS => "i_s",
            Param::IE => "i_e",
            Param::ErasureThreshold => "erasure_threshold",
            Param::TaInit => "ta_init",
            Param::TaStep => "ta_step",
            Param::TaStar => "ta_star",
            Param::PA => "p_a",
            Param::PR => "p_r",
            Param::J => "j",
            Param::TQuanMax => "t_quan_max",
        }
    }

    fn is_real(self) -> bool {
        matches!(self, Param::ErasureThreshold | Param::TQuanMax)
    }

    pub fn get(self, c: &RunConfig) -> f64 {
        match self {
            Param::IS => c.i_s as f64,
            Param::IE => c.i_e as f64,
            Param::ErasureThreshold => c.erasure_threshold,
            Param::TaInit => c.ta_init as f64,
            Param::TaStep => c.ta_step as f64,
            Param::TaStar => c.ta_star as f64,
            Param::PA => c.p_a as f64,
            Param::PR => c.p_r as f64,
            Param::J => c.j as f64,
            Param::TQuanMax => match c.quantizer {
                Quantizer::Capped { t_quan_max } => t_quan_max,
                Quantizer::EqualMass => f64::INFINITY,
            },
        }
    }

    /// Sets the parameter; integers are rounded. Setting `t_quan_max`
    /// selects the capped quantizer.
    pub fn set(self, c: &mut RunConfig, v: f64) {
        let i = v.round();
        match self {
            Param::IS => c.i_s = i as i32,
            Param::IE => c.i_e = i as i32,
            Param::ErasureThreshold => c.erasure_threshold = v,
            Param::TaInit => c.ta_init = i as i32,
            Param::TaStep => c.ta_step = i as i32,
            Param::TaStar => c.ta_star = i as i32,
            Param::PA => c.p_a = i.max(0.0) as u32,
            Param::PR => c.p_r = i.max(0.0) as u32,
            Param::J => c.j = i.max(0.0) as usize,
            Param::TQuanMax => c.quantizer = Quantizer::Capped { t_quan_max: v },
        }
    }
}

/// Inclusive range of one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

/// Parameters to vary and their ranges; all others stay at the base config.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchSpace {
    pub ranges: Vec<(Param, Range)>,
}

impl SearchSpace {
    pub fn new(ranges: Vec<(Param, Range)>) -> Result<Self> {
        for (p, r) in &ranges {
            let empty = if p.is_real() {
                !(r.lo <= r.hi)
            } else {
                r.lo.ceil() > r.hi.floor()
            };
            if empty || !r.lo.is_finite() || !r.hi.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "empty range for {}: {}..{}",
                    p.key(),
                    r.lo,
                    r.hi
                )));
            }
        }
        for (i, (p, _)) in ranges.iter().enumerate() {
            if ranges[..i].iter().any(|(q, _)| q == p) {
                return Err(Error::InvalidParameter(format!("{} listed twice", p.key())));
            }
        }
        Ok(SearchSpace { ranges })
    }

    fn draw(&self, p: Param, r: Range, rng: &mut ChaCha8Rng) -> f64 {
        if p.is_real() {
            rng.gen_range(r.lo..=r.hi)
        } else {
            rng.gen_range(r.lo.ceil() as i64..=r.hi.floor() as i64) as f64
        }
    }

    /// Uniform sample, rejecting configurations that fail validation.
    pub fn sample(&self, base: &RunConfig, rng: &mut ChaCha8Rng) -> Result<RunConfig> {
        for _ in 0..10_000 {
            let mut c = base.clone();
            for &(p, r) in &self.ranges {
                p.set(&mut c, self.draw(p, r, rng));
            }
            if c.validate().is_ok() {
                return Ok(c);
            }
        }
        Err(Error::InvalidParameter(
            "search space yields no valid configuration".into(),
        ))
    }

    /// Random perturbation of `center`: each parameter moves by up to
    /// `scale` of its range (at least one step for integers), kept in range.
    pub fn perturb(&self, center: &RunConfig, scale: f64, rng: &mut ChaCha8Rng) -> Result<RunConfig> {
        for _ in 0..10_000 {
            let mut c = center.clone();
            for &(p, r) in &self.ranges {
                let width = (r.hi - r.lo) * scale;
                let v = p.get(center);
                let nv = if p.is_real() {
                    (v + rng.gen_range(-width..=width)).clamp(r.lo, r.hi)
                } else {
                    let w = width.round().max(1.0) as i64;
                    (v + rng.gen_range(-w..=w) as f64).clamp(r.lo.ceil(), r.hi.floor())
                };
                p.set(&mut c, nv);
            }
            if c.validate().is_ok() {
                return Ok(c);
            }
        }
        Ok(center.clone())
    }

    /// The config with one parameter moved by `delta` steps, if still in range
    /// and valid. Real parameters use 1/20 of their range as a step.
    pub fn neighbour(&self, center: &RunConfig, index: usize, delta: f64) -> Option<RunConfig> {
        let (p, r) = self.ranges[index];
        let step = if p.is_real() { (r.hi - r.lo) / 20.0 } else { 1.0 };
        let v = p.get(center) + delta * step;
        if v < r.lo - 1e-12 || v > r.hi + 1e-12 {
            return None;
        }
        let mut c = center.clone();
        p.set(&mut c, v.clamp(r.lo, r.hi));
        c.validate().ok().map(|_| c)
    }

    pub fn describe(&self, c: &RunConfig) -> String {
        self.ranges
            .iter()
            .map(|(p, _)| format!("{}={}", p.key(), p.get(c)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Settings of a search, read together with the space from one file.
#[derive(Debug, Clone, PartialEq)]
pub struct TuneSettings {
    pub round1_budget: usize,
    pub round2_budget: usize,
    /// Fraction of round-1 trials drawn uniformly before local refinement.
    pub explore_fraction: f64,
    pub target_ber: f64,
    pub snr_lo: f64,
    pub snr_hi: f64,
    pub resolution_db: f64,
    pub round1_bits: u64,
    pub round2_snr: f64,
    pub round2_bits: u64,
    pub seed: u64,
}

impl Default for TuneSettings {
    fn default() -> Self {
        TuneSettings {
            round1_budget: 16,
            round2_budget: 8,
            explore_fraction: 0.5,
            target_ber: 1e-4,
            snr_lo: 3.3,
            snr_hi: 3.9,
            resolution_db: 0.02,
            round1_bits: 10_000_000,
            round2_snr: 3.55,
            round2_bits: 20_000_000,
            seed: 1,
        }
    }
}

/// Parses a search file: `param = lo..hi` lines for the space plus the
/// settings keys. Unknown keys are errors.
pub fn parse_search_file(text: &str) -> Result<(SearchSpace, TuneSettings)> {
    let mut s = TuneSettings::default();
    let mut ranges = Vec::new();
    for (line, key, v) in parse_key_values(text)? {
        let v = v.as_str();
        match key.as_str() {
            "round1_budget" => s.round1_budget = parse_value(line, v)?,
            "round2_budget" => s.round2_budget = parse_value(line, v)?,
            "explore_fraction" => s.explore_fraction = parse_value(line, v)?,
            "target_ber" => s.target_ber = parse_value(line, v)?,
            "snr_lo" => s.snr_lo = parse_value(line, v)?,
            "snr_hi" => s.snr_hi = parse_value(line, v)?,
            "resolution_db" => s.resolution_db = parse_value(line, v)?,
            "round1_bits" => s.round1_bits = parse_value(line, v)?,
            "round2_snr" => s.round2_snr = parse_value(line, v)?,
            "round2_bits" => s.round2_bits = parse_value(line, v)?,
            "seed" => s.seed = parse_value(line, v)?,
            k => {
                let p = Param::ALL.into_iter().find(|p| p.key() == k).ok_or_else(|| Error::Config {
                    line,
                    msg: format!("unknown key '{k}'"),
                })?;
                let (lo, hi) = v.split_once("..").ok_or_else(|| Error::Config {
                    line,
                    msg: format!("expected lo..hi, got '{v}'"),
                })?;
                ranges.push((
                    p,
                    Range {
                        lo: parse_value(line, lo.trim())?,
                        hi: parse_value(line, hi.trim())?,
                    },
                ));
            }
        }
    }
    if s.round1_budget == 0 || !(s.snr_lo < s.snr_hi) || !(s.resolution_db > 0.0) {
        return Err(Error::InvalidParameter(
            "need round1_budget >= 1, snr_lo < snr_hi and resolution_db > 0".into(),
        ));
    }
    Ok((SearchSpace::new(ranges)?, s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Censoring {
    /// Target already met at the lower edge.
    AtLowerEdge,
    /// Target not met at the upper edge.
    AtUpperEdge,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub snr: f64,
    pub censored: Option<Censoring>,
}

/// BER of `config` at `snr` with a budget of `bits` information bits.
fn short_ber(config: &RunConfig, snr: f64, bits: u64) -> Result<f64> {
    let mut c = config.clone();
    c.stop = StopRule::bits(bits);
    Ok(run_point(&c, snr)?.counters.ber())
}

/// SNR at which the BER crosses `target`, bracketed by bisection to
/// `resolution` dB; returns the midpoint of the final bracket.
pub fn objective_snr_threshold(
    config: &RunConfig,
    target: f64,
    lo: f64,
    hi: f64,
    resolution: f64,
    bits: u64,
) -> Result<Threshold> {
    if short_ber(config, hi, bits)? > target {
        return Ok(Threshold {
            snr: hi,
            censored: Some(Censoring::AtUpperEdge),
        });
    }
    if short_ber(config, lo, bits)? <= target {
        return Ok(Threshold {
            snr: lo,
            censored: Some(Censoring::AtLowerEdge),
        });
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if short_ber(config, mid, bits)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Threshold {
        snr: 0.5 * (lo + hi),
        censored: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedSnrResult {
    pub ber: f64,
    pub interval: (f64, f64),
}

pub fn objective_fixed_snr(config: &RunConfig, snr: f64, bits: u64) -> Result<FixedSnrResult> {
    let mut c = config.clone();
    c.stop = StopRule::bits(bits);
    let counters = run_point(&c, snr)?.counters;
    Ok(FixedSnrResult {
        ber: counters.ber(),
        interval: counters.ber_interval(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub index: usize,
    pub round: u8,
    pub params: String,
    pub objective: f64,
    pub censored: Option<Censoring>,
    /// Best objective of the round so far, this trial included.
    pub incumbent: f64,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best: RunConfig,
    pub trials: Vec<Trial>,
}

/// Runs both rounds. Round 1 minimizes the SNR threshold; round 2 starts
/// from its incumbent and minimizes the BER at `round2_snr`.
pub fn search(
    base: &RunConfig,
    space: &SearchSpace,
    settings: &TuneSettings,
    mut on_trial: impl FnMut(&Trial),
) -> Result<SearchOutcome> {
    if settings.round1_budget == 0 {
        return Err(Error::InvalidParameter("budget must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut trials = Vec::new();
    let explore = ((settings.round1_budget as f64 * settings.explore_fraction).ceil() as usize)
        .clamp(1, settings.round1_budget);

    let mut best: Option<(RunConfig, f64)> = None;
    for i in 0..settings.round1_budget {
        let cfg = match &best {
            Some((inc, _)) if i >= explore => {
                // shrink the neighbourhood as refinement proceeds
                let progress = (i - explore) as f64 / (settings.round1_budget - explore).max(1) as f64;
                space.perturb(inc, 0.2 * (1.0 - 0.75 * progress), &mut rng)?
            }
            _ => space.sample(base, &mut rng)?,
        };
        let th = objective_snr_threshold(
            &cfg,
            settings.target_ber,
            settings.snr_lo,
            settings.snr_hi,
            settings.resolution_db,
            settings.round1_bits,
        )?;
        if best.as_ref().map_or(true, |(_, b)| th.snr < *b) {
            best = Some((cfg.clone(), th.snr));
        }
        let t = Trial {
            index: trials.len(),
            round: 1,
            params: space.describe(&cfg),
            objective: th.snr,
            censored: th.censored,
            incumbent: best.as_ref().map(|b| b.1).unwrap_or(f64::INFINITY),
        };
        on_trial(&t);
        trials.push(t);
    }
    let (mut inc, _) = best.expect("round 1 ran at least once");

    if settings.round2_budget > 0 && !space.ranges.is_empty() {
        let eval = |c: &RunConfig| objective_fixed_snr(c, settings.round2_snr, settings.round2_bits);
        let mut inc_ber = eval(&inc)?.ber;
        let mut k = 0usize;
        let mut used = 0usize;
        let mut misses = 0usize;
        while used < settings.round2_budget && misses < 2 * space.ranges.len() {
            let index = k / 2 % space.ranges.len();
            let delta = if k % 2 == 0 { 1.0 } else { -1.0 };
            k += 1;
            let Some(cfg) = space.neighbour(&inc, index, delta) else {
                misses += 1;
                continue;
            };
            misses = 0;
            used += 1;
            let r = eval(&cfg)?;
            if r.ber < inc_ber {
                inc = cfg.clone();
                inc_ber = r.ber;
            }
            let t = Trial {
                index: trials.len(),
                round: 2,
                params: space.describe(&cfg),
                objective: r.ber,
                censored: None,
                incumbent: inc_ber,
            };
            on_trial(&t);
            trials.push(t);
        }
    }
    Ok(SearchOutcome { best: inc, trials })
}

pub const TRIAL_LOG_HEADER: &str = "trial;round;objective;censored;incumbent;params";

pub fn trial_log_csv(trials: &[Trial]) -> String {
    let mut s = String::from(TRIAL_LOG_HEADER);
    s.push('\n');
    for t in trials {
        let c = match t.censored {
            None => "no",
            Some(Censoring::AtLowerEdge) => "lower",
            Some(Censoring::AtUpperEdge) => "upper",
        };
        let _ = writeln!(
            s,
            "{};{};{};{};{};{}",
            t.index, t.round, t.objective, c, t.incumbent, t.params
        );
    }
    s
}
