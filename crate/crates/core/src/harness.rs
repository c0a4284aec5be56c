//! Monte-Carlo BER/FER engine: run configuration, streams of frames,
//! deterministic merging under a stop rule, and result files.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::bch::BchCode;
use crate::channel::{esn0_from_ebn0, ebn0_from_esn0, ChannelSpec, QPSK_RAIL_AMPLITUDE};
use crate::drs::{DrsParams, Quantizer};
use crate::error::{Error, Result};
use crate::ofec::{
    self, row_pair_info, AnchorSchedule, OfecDecoder, OfecDecoderConfig, OfecEncoder, OfecLayout,
    OfecMode,
};
use crate::staircase::{
    block_info, StaircaseConfig, StaircaseDecoder, StaircaseEncoder, StaircaseMode,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeKind {
    Staircase,
    Ofec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    Drsd,
    Ibdd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrAxis {
    EbN0,
    EsN0,
}

/// Simulation stops at the first frame after which any bound is reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StopRule {
    pub max_bits: Option<u64>,
    pub max_bit_errors: Option<u64>,
    pub max_frame_errors: Option<u64>,
}

impl StopRule {
    pub fn bits(max_bits: u64) -> Self {
        StopRule {
            max_bits: Some(max_bits),
            ..StopRule::default()
        }
    }

    pub fn reached(&self, c: &BerCounters) -> bool {
        self.max_bits.is_some_and(|m| c.bits >= m)
            || self.max_bit_errors.is_some_and(|m| c.bit_errors >= m)
            || self.max_frame_errors.is_some_and(|m| c.frame_errors >= m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub code: CodeKind,
    pub decoder: DecoderKind,
    pub axis: SnrAxis,
    pub snr: Vec<f64>,
    pub i_s: i32,
    pub i_e: i32,
    /// Erasure threshold T on the received magnitude.
    pub erasure_threshold: f64,
    /// Number of complementary random pattern pairs J.
    pub j: usize,
    pub quantizer: Quantizer,
    /// Staircase decoding window in blocks.
    pub window: usize,
    /// Staircase: iterations per window; OFEC: full decoding iterations L.
    pub iterations: usize,
    pub anchors: bool,
    pub ta_init: i32,
    pub ta_step: i32,
    pub ta_star: i32,
    pub p_a: u32,
    pub p_r: u32,
    pub spr: bool,
    pub stop: StopRule,
    pub seed: u64,
    pub workers: usize,
    pub noise: bool,
    /// Frames emitted by one independent stream.
    pub frames_per_stream: usize,
}

impl RunConfig {
    /// Shipped defaults for each code.
    pub fn default_for(code: CodeKind) -> Self {
        let base = RunConfig {
            code,
            decoder: DecoderKind::Drsd,
            axis: SnrAxis::EbN0,
            snr: vec![3.6],
            i_s: 0,
            i_e: 31,
            erasure_threshold: 0.1207456990994544,
            j: 1,
            quantizer: Quantizer::EqualMass,
            window: 7,
            iterations: 8,
            anchors: true,
            ta_init: 0,
            ta_step: 0,
            ta_star: 0,
            p_a: 1,
            p_r: 0,
            spr: false,
            stop: StopRule {
                max_bits: Some(100_000_000),
                max_bit_errors: Some(1_000_000),
                max_frame_errors: None,
            },
            seed: 1,
            workers: 1,
            noise: true,
            frames_per_stream: 200,
        };
        match code {
            CodeKind::Staircase => base,
            CodeKind::Ofec => RunConfig {
                axis: SnrAxis::EsN0,
                snr: vec![7.0],
                i_s: 2,
                i_e: 35,
                erasure_threshold: 0.09374879687086977,
                iterations: 20,
                ta_init: 9,
                ta_step: 1,
                ta_star: 28,
                p_a: 4,
                p_r: 7,
                spr: true,
                frames_per_stream: 2000,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.snr.is_empty() || self.snr.iter().any(|s| !s.is_finite()) {
            return bad("SNR grid must be nonempty and finite".into());
        }
        if self.stop == StopRule::default() {
            return bad("stop rule needs at least one bound".into());
        }
        if self.workers == 0 || self.frames_per_stream == 0 {
            return bad("workers and frames_per_stream must be positive".into());
        }
        if self.iterations == 0 {
            return bad("iterations must be positive".into());
        }
        self.anchor_schedule().validate(self.iterations)?;
        // builds and checks DRS parameters on a representative channel
        let ch = ChannelSpec::new(1.0, 0.5)?;
        DrsParams::for_channel(self.i_s, self.i_e, self.erasure_threshold, self.j, self.quantizer, &ch)?;
        if self.code == CodeKind::Staircase {
            StaircaseConfig::new(BchCode::staircase_default(), self.window, self.iterations)?;
        }
        Ok(())
    }

    pub fn rate(&self) -> f64 {
        match self.code {
            CodeKind::Staircase => StaircaseConfig::standard().rate(),
            CodeKind::Ofec => ofec::INFO_PER_PAIR as f64 / ofec::CODED_PER_PAIR as f64,
        }
    }

    /// BPSK for the staircase code, QPSK as two rails for OFEC.
    pub fn bits_per_symbol(&self) -> u32 {
        match self.code {
            CodeKind::Staircase => 1,
            CodeKind::Ofec => 2,
        }
    }

    pub fn amplitude(&self) -> f64 {
        match self.code {
            CodeKind::Staircase => 1.0,
            CodeKind::Ofec => QPSK_RAIL_AMPLITUDE,
        }
    }

    /// (Eb/N0, Es/N0) in dB for a grid value.
    pub fn snr_pair(&self, snr: f64) -> (f64, f64) {
        let (r, b) = (self.rate(), self.bits_per_symbol());
        match self.axis {
            SnrAxis::EbN0 => (snr, esn0_from_ebn0(snr, r, b)),
            SnrAxis::EsN0 => (ebn0_from_esn0(snr, r, b), snr),
        }
    }

    pub fn channel(&self, snr: f64) -> Result<ChannelSpec> {
        ChannelSpec::from_esn0_db(self.amplitude(), self.snr_pair(snr).1)
    }

    fn anchor_schedule(&self) -> AnchorSchedule {
        if self.anchors {
            AnchorSchedule::Steps {
                init: self.ta_init,
                step: self.ta_step,
                star: self.ta_star,
                p_a: self.p_a,
                p_r: self.p_r,
            }
        } else {
            AnchorSchedule::Disabled
        }
    }

    /// Flat `key = value` text accepted by [`RunConfig::parse`].
    pub fn to_text(&self) -> String {
        let opt = |v: Option<u64>| v.map_or("none".to_string(), |v| v.to_string());
        let (quantizer, t_quan_max) = match self.quantizer {
            Quantizer::EqualMass => ("equal_mass", None),
            Quantizer::Capped { t_quan_max } => ("capped", Some(t_quan_max)),
        };
        let snr: Vec<String> = self.snr.iter().map(|s| s.to_string()).collect();
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("code", self.code.to_string());
        kv("decoder", self.decoder.to_string());
        kv("axis", self.axis.to_string());
        kv("snr", snr.join(","));
        kv("i_s", self.i_s.to_string());
        kv("i_e", self.i_e.to_string());
        kv("erasure_threshold", self.erasure_threshold.to_string());
        kv("j", self.j.to_string());
        kv("quantizer", quantizer.to_string());
        if let Some(t) = t_quan_max {
            kv("t_quan_max", t.to_string());
        }
        kv("window", self.window.to_string());
        kv("iterations", self.iterations.to_string());
        kv("anchors", self.anchors.to_string());
        kv("ta_init", self.ta_init.to_string());
        kv("ta_step", self.ta_step.to_string());
        kv("ta_star", self.ta_star.to_string());
        kv("p_a", self.p_a.to_string());
        kv("p_r", self.p_r.to_string());
        kv("spr", self.spr.to_string());
        kv("max_bits", opt(self.stop.max_bits));
        kv("max_bit_errors", opt(self.stop.max_bit_errors));
        kv("max_frame_errors", opt(self.stop.max_frame_errors));
        kv("seed", self.seed.to_string());
        kv("workers", self.workers.to_string());
        kv("noise", self.noise.to_string());
        kv("frames_per_stream", self.frames_per_stream.to_string());
        s
    }

    /// Parses a config file. `code` may appear anywhere and selects the
    /// defaults the other keys override; unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let entries = parse_key_values(text)?;
        let code = entries
            .iter()
            .find(|(_, k, _)| k == "code")
            .map(|(line, _, v)| parse_value::<CodeKind>(*line, v))
            .transpose()?
            .unwrap_or(CodeKind::Staircase);
        let mut cfg = RunConfig::default_for(code);
        let mut t_quan_max = None;
        let mut capped = matches!(cfg.quantizer, Quantizer::Capped { .. });
        for (line, key, value) in &entries {
            let line = *line;
            let v = value.as_str();
            match key.as_str() {
                "code" => {}
                "decoder" => cfg.decoder = parse_value(line, v)?,
                "axis" => cfg.axis = parse_value(line, v)?,
                "snr" => {
                    cfg.snr = v
                        .split(',')
                        .map(|s| parse_value(line, s.trim()))
                        .collect::<Result<_>>()?
                }
                "i_s" => cfg.i_s = parse_value(line, v)?,
                "i_e" => cfg.i_e = parse_value(line, v)?,
                "erasure_threshold" => cfg.erasure_threshold = parse_value(line, v)?,
                "j" => cfg.j = parse_value(line, v)?,
                "quantizer" => {
                    capped = match v {
                        "equal_mass" => false,
                        "capped" => true,
                        _ => return Err(config_error(line, format!("unknown quantizer '{v}'"))),
                    }
                }
                "t_quan_max" => t_quan_max = Some(parse_value::<f64>(line, v)?),
                "window" => cfg.window = parse_value(line, v)?,
                "iterations" => cfg.iterations = parse_value(line, v)?,
                "anchors" => cfg.anchors = parse_value(line, v)?,
                "ta_init" => cfg.ta_init = parse_value(line, v)?,
                "ta_step" => cfg.ta_step = parse_value(line, v)?,
                "ta_star" => cfg.ta_star = parse_value(line, v)?,
                "p_a" => cfg.p_a = parse_value(line, v)?,
                "p_r" => cfg.p_r = parse_value(line, v)?,
                "spr" => cfg.spr = parse_value(line, v)?,
                "max_bits" => cfg.stop.max_bits = parse_optional(line, v)?,
                "max_bit_errors" => cfg.stop.max_bit_errors = parse_optional(line, v)?,
                "max_frame_errors" => cfg.stop.max_frame_errors = parse_optional(line, v)?,
                "seed" => cfg.seed = parse_value(line, v)?,
                "workers" => cfg.workers = parse_value(line, v)?,
                "noise" => cfg.noise = parse_value(line, v)?,
                "frames_per_stream" => cfg.frames_per_stream = parse_value(line, v)?,
                other => return Err(config_error(line, format!("unknown key '{other}'"))),
            }
        }
        cfg.quantizer = match (capped, t_quan_max) {
            (false, None) => Quantizer::EqualMass,
            (true, Some(t)) => Quantizer::Capped { t_quan_max: t },
            (true, None) => {
                return Err(Error::Config {
                    line: 0,
                    msg: "quantizer 'capped' needs t_quan_max".into(),
                })
            }
            (false, Some(_)) => {
                return Err(Error::Config {
                    line: 0,
                    msg: "t_quan_max given without quantizer = capped".into(),
                })
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn config_error(line: usize, msg: String) -> Error {
    Error::Config { line, msg }
}

/// Splits `key = value` lines; blank lines and `#` comments are skipped.
/// Returns (1-based line, key, value).
pub fn parse_key_values(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_error(i + 1, format!("expected key = value, got '{line}'")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(config_error(i + 1, "empty key".into()));
        }
        if out.iter().any(|(_, key, _): &(usize, String, String)| key == k) {
            return Err(config_error(i + 1, format!("duplicate key '{k}'")));
        }
        out.push((i + 1, k.to_string(), v.to_string()));
    }
    Ok(out)
}

pub fn parse_value<T: FromStr>(line: usize, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| config_error(line, format!("cannot parse '{v}'")))
}

fn parse_optional(line: usize, v: &str) -> Result<Option<u64>> {
    if v == "none" {
        Ok(None)
    } else {
        parse_value(line, v).map(Some)
    }
}

macro_rules! text_enum {
    ($t:ty, $($variant:ident => $name:literal),+) => {
        impl std::fmt::Display for $t {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(match self { $(<$t>::$variant => $name),+ })
            }
        }
        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok(<$t>::$variant),)+
                    _ => Err(Error::Parse(format!("unknown value '{s}'"))),
                }
            }
        }
    };
}

text_enum!(CodeKind, Staircase => "staircase", Ofec => "ofec");
text_enum!(DecoderKind, Drsd => "drsd", Ibdd => "ibdd");
text_enum!(SnrAxis, EbN0 => "ebn0", EsN0 => "esn0");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BerCounters {
    pub bits: u64,
    pub bit_errors: u64,
    pub frames: u64,
    pub frame_errors: u64,
}

impl BerCounters {
    pub fn add_frame(&mut self, f: FrameCount) {
        self.bits += f.bits as u64;
        self.bit_errors += f.errors as u64;
        self.frames += 1;
        self.frame_errors += (f.errors > 0) as u64;
    }

    pub fn merge(&self, other: &BerCounters) -> BerCounters {
        BerCounters {
            bits: self.bits + other.bits,
            bit_errors: self.bit_errors + other.bit_errors,
            frames: self.frames + other.frames,
            frame_errors: self.frame_errors + other.frame_errors,
        }
    }

    pub fn ber(&self) -> f64 {
        ratio(self.bit_errors, self.bits)
    }

    pub fn fer(&self) -> f64 {
        ratio(self.frame_errors, self.frames)
    }

    pub fn ber_interval(&self) -> (f64, f64) {
        wilson_interval(self.bit_errors, self.bits, 0.95)
    }

    pub fn fer_interval(&self) -> (f64, f64) {
        wilson_interval(self.frame_errors, self.frames, 0.95)
    }
}

fn ratio(k: u64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        k as f64 / n as f64
    }
}

/// Wilson score interval for k successes out of n at the given confidence.
pub fn wilson_interval(k: u64, n: u64, confidence: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(0.5 + confidence / 2.0);
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Information bits and bit errors of one emitted frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameCount {
    pub bits: u32,
    pub errors: u32,
}

/// 64-bit mix used to derive independent stream seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of stream `stream` at grid value `snr`.
pub fn stream_seed(master: u64, snr: f64, stream: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ snr.to_bits()) ^ stream)
}

fn count_errors(sent: &[u8], got: &[u8]) -> FrameCount {
    FrameCount {
        bits: sent.len() as u32,
        errors: sent.iter().zip(got).filter(|(a, b)| a != b).count() as u32,
    }
}

/// Frames per stream for a point: capped so that a single stream does not
/// overshoot the bit bound by more than one frame.
fn stream_frames(config: &RunConfig, bits_per_frame: usize) -> usize {
    match config.stop.max_bits {
        Some(m) => config
            .frames_per_stream
            .min((m as usize).div_ceil(bits_per_frame).max(1)),
        None => config.frames_per_stream,
    }
}

pub fn bits_per_frame(code: CodeKind) -> usize {
    match code {
        CodeKind::Staircase => StaircaseConfig::standard().info_per_block(),
        CodeKind::Ofec => ofec::INFO_PER_PAIR,
    }
}

/// Simulates one independent stream and returns its emitted frames in order.
/// Only frames released during regular operation are counted; the window
/// contents left at the end are dropped.
pub fn simulate_stream(config: &RunConfig, snr: f64, stream: u64, frames: usize) -> Result<Vec<FrameCount>> {
    let seed = stream_seed(config.seed, snr, stream);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let decoder_seed = splitmix64(seed ^ 0xD1B5_4A32_D192_ED03);
    let ch = config.channel(snr)?;
    let params = DrsParams::for_channel(
        config.i_s,
        config.i_e,
        config.erasure_threshold,
        config.j,
        config.quantizer,
        &ch,
    )?;
    let mut out = Vec::with_capacity(frames);
    let (mut mags, mut hard) = (Vec::new(), Vec::new());
    let mut pending: VecDeque<Vec<u8>> = VecDeque::new();
    let send = |bits: &[u8], rng: &mut ChaCha8Rng, mags: &mut Vec<f64>, hard: &mut Vec<u8>| {
        if config.noise {
            ch.transmit(bits, rng, mags, hard);
        } else {
            ch.transmit_noiseless(bits, mags, hard);
        }
    };
    match config.code {
        CodeKind::Staircase => {
            let mut cfg = StaircaseConfig::new(BchCode::staircase_default(), config.window, config.iterations)?;
            cfg.early_stop = true;
            let mode = match config.decoder {
                DecoderKind::Ibdd => StaircaseMode::Ibdd,
                DecoderKind::Drsd if config.anchors => StaircaseMode::Drsd {
                    anchor_thresholds: cfg.standard_anchor_thresholds()?,
                    params,
                },
                DecoderKind::Drsd => StaircaseMode::drsd_without_anchors(params, cfg.window),
            };
            let mut enc = StaircaseEncoder::new(cfg.clone());
            let mut dec = StaircaseDecoder::new(cfg.clone(), mode, decoder_seed)?;
            while out.len() < frames {
                let info: Vec<u8> = (0..cfg.info_per_block()).map(|_| rng.gen_range(0..2)).collect();
                let block = enc.encode_block(&info)?;
                send(&block, &mut rng, &mut mags, &mut hard);
                pending.push_back(info);
                if let Some(released) = dec.push_block(&mags, &hard)? {
                    let sent = pending.pop_front().expect("released block was sent");
                    out.push(count_errors(&sent, &block_info(&cfg, &released)));
                }
            }
        }
        CodeKind::Ofec => {
            let mode = match config.decoder {
                DecoderKind::Ibdd => OfecMode::Ibdd,
                DecoderKind::Drsd => OfecMode::Drsd {
                    params,
                    anchors: config.anchor_schedule(),
                },
            };
            let code = BchCode::ofec_default();
            let mut enc = OfecEncoder::new(code.clone(), OfecLayout::identity())?;
            let dec_cfg = OfecDecoderConfig {
                code,
                layout: OfecLayout::identity(),
                iterations: config.iterations,
                stall_pattern_removal: config.spr,
            };
            let mut dec = OfecDecoder::new(dec_cfg, mode, decoder_seed)?;
            while out.len() < frames {
                let info: Vec<u8> = (0..ofec::INFO_PER_PAIR).map(|_| rng.gen_range(0..2)).collect();
                let coded = enc.encode_row_pair(&info)?;
                send(&coded, &mut rng, &mut mags, &mut hard);
                pending.push_back(info);
                if let Some(released) = dec.push_row_pair(&mags, &hard)? {
                    let sent = pending.pop_front().expect("released pair was sent");
                    out.push(count_errors(&sent, &row_pair_info(&released)));
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResult {
    pub ebn0: f64,
    pub esn0: f64,
    pub counters: BerCounters,
}

/// Runs one grid value. Streams are simulated in batches of `workers` and
/// merged frame by frame in (stream, frame) order until the stop rule fires,
/// so the totals do not depend on the worker count.
pub fn run_point(config: &RunConfig, snr: f64) -> Result<PointResult> {
    config.validate()?;
    let frames = stream_frames(config, bits_per_frame(config.code));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let mut counters = BerCounters::default();
    let mut next_stream = 0u64;
    'outer: loop {
        let batch: Vec<u64> = (next_stream..next_stream + config.workers as u64).collect();
        next_stream += config.workers as u64;
        let results: Vec<Result<Vec<FrameCount>>> = pool.install(|| {
            use rayon::prelude::*;
            batch
                .par_iter()
                .map(|&s| simulate_stream(config, snr, s, frames))
                .collect()
        });
        for stream in results {
            for f in stream? {
                counters.add_frame(f);
                if config.stop.reached(&counters) {
                    break 'outer;
                }
            }
        }
    }
    let (ebn0, esn0) = config.snr_pair(snr);
    Ok(PointResult {
        ebn0,
        esn0,
        counters,
    })
}

pub fn run_all(config: &RunConfig) -> Result<Vec<PointResult>> {
    config.snr.iter().map(|&s| run_point(config, s)).collect()
}

pub const CSV_HEADER: &str = "EbNo;EsNo;decodedFrame;FrameErr;FER;BER";

/// Semicolon CSV with one row per point.
pub fn results_csv(points: &[PointResult]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for p in points {
        let c = &p.counters;
        let _ = writeln!(
            s,
            "{};{};{};{};{:e};{:e}",
            p.ebn0,
            p.esn0,
            c.frames,
            c.frame_errors,
            c.fer(),
            c.ber()
        );
    }
    s
}

/// One parsed CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub ebn0: f64,
    pub esn0: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub fer: f64,
    pub ber: f64,
}

pub fn parse_results_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Parse("missing result header".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(';').collect();
            if f.len() != 6 {
                return Err(Error::Parse(format!("expected 6 fields in '{l}'")));
            }
            let num = |i: usize| -> Result<f64> {
                f[i].parse().map_err(|_| Error::Parse(format!("bad number '{}'", f[i])))
            };
            let int = |i: usize| -> Result<u64> {
                f[i].parse().map_err(|_| Error::Parse(format!("bad integer '{}'", f[i])))
            };
            Ok(CsvRow {
                ebn0: num(0)?,
                esn0: num(1)?,
                frames: int(2)?,
                frame_errors: int(3)?,
                fer: num(4)?,
                ber: num(5)?,
            })
        })
        .collect()
}

/// Plain-text manifest: revision, the full configuration and per-point
/// counters with 95% Wilson intervals.
pub fn manifest(config: &RunConfig, points: &[PointResult], revision: &str) -> String {
    let mut s = format!("revision = {revision}\n\n[config]\n{}\n[points]\n", config.to_text());
    for p in points {
        let c = &p.counters;
        let (bl, bh) = c.ber_interval();
        let (fl, fh) = c.fer_interval();
        let _ = writeln!(
            s,
            "EbNo={} EsNo={} bits={} bit_errors={} frames={} frame_errors={} BER={:e} BER95=[{:e},{:e}] FER={:e} FER95=[{:e},{:e}]",
            p.ebn0, p.esn0, c.bits, c.bit_errors, c.frames, c.frame_errors, c.ber(), bl, bh, c.fer(), fl, fh
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quick(code: CodeKind) -> RunConfig {
        RunConfig {
            stop: StopRule::bits(200_000),
            frames_per_stream: 8,
            ..RunConfig::default_for(code)
        }
    }

    #[test]
    fn config_text_round_trips() {
        for code in [CodeKind::Staircase, CodeKind::Ofec] {
            let mut cfg = RunConfig::default_for(code);
            cfg.quantizer = Quantizer::Capped { t_quan_max: 0.9 };
            cfg.snr = vec![3.5, 3.55, 3.6];
            cfg.stop.max_frame_errors = Some(12);
            assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
        }
    }

    #[test]
    fn config_rejects_bad_input() {
        assert!(matches!(
            RunConfig::parse("code = ofec\nbogus = 1\n"),
            Err(Error::Config { line: 2, .. })
        ));
        assert!(RunConfig::parse("snr = \n").is_err());
        assert!(RunConfig::parse("max_bits = none\nmax_bit_errors = none\n").is_err());
        assert!(RunConfig::parse("decoder = turbo\n").is_err());
        assert!(RunConfig::parse("quantizer = capped\n").is_err());
        assert!(RunConfig::parse("j = 1\nj = 2\n").is_err());
        assert!(RunConfig::parse("code = ofec\niterations = 2\np_r = 4\n").is_err());
        let cfg = RunConfig::parse("# comment\ncode = ofec  # trailing\n\nsnr = 6.5, 6.6\n").unwrap();
        assert_eq!(cfg.snr, vec![6.5, 6.6]);
        assert_eq!(cfg.code, CodeKind::Ofec);
    }

    #[test]
    fn snr_axis_conversion() {
        let sc = RunConfig::default_for(CodeKind::Staircase);
        let (eb, es) = sc.snr_pair(3.6);
        assert_eq!(eb, 3.6);
        assert!((es - 2.69034).abs() < 1e-5);
        let of = RunConfig::default_for(CodeKind::Ofec);
        let (eb, es) = of.snr_pair(6.0);
        assert_eq!(es, 6.0);
        assert!((eb - (6.0 - 10.0 * (2.0 * 3552.0 / 4096.0f64).log10())).abs() < 1e-12);
    }

    #[test]
    fn noiseless_runs_are_error_free() {
        for code in [CodeKind::Staircase, CodeKind::Ofec] {
            for decoder in [DecoderKind::Drsd, DecoderKind::Ibdd] {
                let cfg = RunConfig {
                    noise: false,
                    decoder,
                    iterations: if code == CodeKind::Ofec { 2 } else { 8 },
                    p_r: 0,
                    ..quick(code)
                };
                let p = run_point(&cfg, 0.0).unwrap();
                assert_eq!(p.counters.bit_errors, 0);
                assert_eq!(p.counters.frame_errors, 0);
                assert!(p.counters.bits >= 200_000);
                assert!(p.counters.bits < 200_000 + bits_per_frame(code) as u64);
            }
        }
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let mut cfg = quick(CodeKind::Staircase);
        cfg.stop = StopRule {
            max_bits: Some(400_000),
            max_bit_errors: Some(3000),
            max_frame_errors: None,
        };
        cfg.frames_per_stream = 3;
        let snr = 3.3;
        let one = run_point(&cfg, snr).unwrap();
        cfg.workers = 3;
        let three = run_point(&cfg, snr).unwrap();
        assert_eq!(one, three);
        assert!(one.counters.bit_errors > 0);
    }

    #[test]
    fn streams_are_replayable_and_distinct() {
        let cfg = quick(CodeKind::Staircase);
        let a = simulate_stream(&cfg, 3.4, 0, 4).unwrap();
        assert_eq!(a, simulate_stream(&cfg, 3.4, 0, 4).unwrap());
        assert_ne!(a, simulate_stream(&cfg, 3.4, 1, 4).unwrap());
    }

    #[test]
    fn stop_rule_bounds() {
        let mut cfg = quick(CodeKind::Staircase);
        cfg.stop = StopRule {
            max_bits: None,
            max_bit_errors: None,
            max_frame_errors: Some(2),
        };
        let p = run_point(&cfg, 3.0).unwrap();
        assert_eq!(p.counters.frame_errors, 2);
        assert_eq!(p.counters.frames, 2);
    }

    #[test]
    fn csv_layout() {
        let p = PointResult {
            ebn0: 3.6,
            esn0: 2.69034,
            counters: BerCounters {
                bits: 1000,
                bit_errors: 3,
                frames: 10,
                frame_errors: 2,
            },
        };
        let s = results_csv(&[p]);
        assert_eq!(s.lines().count(), 2);
        assert_eq!(s.lines().nth(1).unwrap(), "3.6;2.69034;10;2;2e-1;3e-3");
        let m = manifest(&RunConfig::default_for(CodeKind::Staircase), &[p], "abc123");
        assert!(m.starts_with("revision = abc123"));
        assert!(m.contains("bit_errors=3"));
    }

    #[test]
    fn wilson_interval_reference_values() {
        // closed form for k = 0: [0, z^2 / (n + z^2)]
        let z = 1.959963984540054f64;
        let (lo, hi) = wilson_interval(0, 100, 0.95);
        assert_eq!(lo, 0.0);
        assert!((hi - z * z / (100.0 + z * z)).abs() < 1e-12);
        // symmetric case k = n/2 is centered on 1/2
        let (lo, hi) = wilson_interval(50, 100, 0.95);
        assert!((lo + hi - 1.0).abs() < 1e-12);
        assert!((hi - 0.5 - z * (0.25 / 100.0 + z * z / 40000.0).sqrt() / (1.0 + z * z / 100.0)).abs() < 1e-12);
    }

    #[test]
    fn doubling_budget_shrinks_interval() {
        let w = |k, n| {
            let (lo, hi) = wilson_interval(k, n, 0.95);
            hi - lo
        };
        let ratio = w(2000, 1_000_000) / w(1000, 500_000);
        assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.01, "{ratio}");
    }

    fn counters() -> impl Strategy<Value = BerCounters> {
        (0u64..1 << 40, 0u64..1 << 20).prop_flat_map(|(bits, frames)| {
            (0..=bits, 0..=frames).prop_map(move |(e, fe)| BerCounters {
                bits,
                bit_errors: e,
                frames,
                frame_errors: fe,
            })
        })
    }

    proptest! {
        #[test]
        fn merge_is_associative_and_commutative(a in counters(), b in counters(), c in counters()) {
            prop_assert_eq!(a.merge(&b).merge(&c), a.merge(&b.merge(&c)));
            prop_assert_eq!(a.merge(&b), b.merge(&a));
            let m = a.merge(&b);
            prop_assert!(m.bit_errors <= m.bits);
        }

        #[test]
        fn frame_partition_gives_same_totals(frames in proptest::collection::vec((1u32..20000, 0u32..50), 1..40), cut in 0usize..40) {
            let frames: Vec<FrameCount> = frames.into_iter().map(|(b, e)| FrameCount { bits: b, errors: e.min(b) }).collect();
            let cut = cut.min(frames.len());
            let mut whole = BerCounters::default();
            frames.iter().for_each(|&f| whole.add_frame(f));
            let (mut x, mut y) = (BerCounters::default(), BerCounters::default());
            frames[..cut].iter().for_each(|&f| x.add_frame(f));
            frames[cut..].iter().for_each(|&f| y.add_frame(f));
            prop_assert_eq!(x.merge(&y), whole);
        }

        #[test]
        fn csv_round_trips(rows in proptest::collection::vec((-5.0f64..12.0, 0u64..1 << 30, 0u64..1 << 20, 1u64..1 << 20), 1..6)) {
            let points: Vec<PointResult> = rows.iter().map(|&(snr, bits, errs, frames)| PointResult {
                ebn0: snr,
                esn0: snr - 0.91,
                counters: BerCounters { bits: bits.max(errs), bit_errors: errs, frames, frame_errors: frames / 3 },
            }).collect();
            let text = results_csv(&points);
            let parsed = parse_results_csv(&text).unwrap();
            prop_assert_eq!(parsed.len(), points.len());
            for (p, r) in points.iter().zip(&parsed) {
                prop_assert_eq!(r.ebn0.to_bits(), p.ebn0.to_bits());
                prop_assert_eq!(r.esn0.to_bits(), p.esn0.to_bits());
                prop_assert_eq!(r.frames, p.counters.frames);
                prop_assert_eq!(r.frame_errors, p.counters.frame_errors);
                prop_assert_eq!(r.ber.to_bits(), p.counters.ber().to_bits());
                prop_assert_eq!(r.fer.to_bits(), p.counters.fer().to_bits());
            }
            prop_assert_eq!(results_csv(&points), text);
        }
    }
}
