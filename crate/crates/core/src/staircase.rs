//! Staircase codes: block encoder and sliding-window decoder.
//!
//! Every row `j` of `[B(i-1)^T | B(i)]` is a component codeword: the first
//! `m` positions are column `j` of the previous block, the last `m` positions
//! are row `j` of the current block with the component parity at its tail.
//! Blocks are stored row-major.

use crate::bch::{BchCode, FlipSet};
use crate::drs::{DrsParams, ERASED};
use crate::eaed::{ibdd_decode, ComponentDecoder, ComponentOutcome, NO_ANCHOR, PERMANENT_ANCHOR};
use crate::error::{Error, Result};

/// Anchor threshold for a block `x` positions away from the newest block of
/// a 7-block window.
pub fn anchor_threshold_staircase(x: usize) -> Result<i32> {
    match x {
        0..=5 => Ok(2 * (x as i32 + 1)),
        6 => Ok(28),
        _ => Err(Error::OutOfRange(format!("block distance {x} > 6"))),
    }
}

#[derive(Debug, Clone)]
pub struct StaircaseConfig {
    pub code: BchCode,
    /// Blocks held by the decoder, newest included.
    pub window: usize,
    pub iterations: usize,
    /// Stop iterating once every word of a sweep has zero syndrome. The
    /// skipped sweeps are accounted for, so decisions and scores are the same
    /// as without early stopping.
    pub early_stop: bool,
}

impl StaircaseConfig {
    pub fn new(code: BchCode, window: usize, iterations: usize) -> Result<Self> {
        if code.n() % 2 != 0 || code.is_extended() {
            return Err(Error::InvalidCode(
                "staircase component must be unextended with even length".into(),
            ));
        }
        let m = code.n() / 2;
        if code.k() <= m {
            return Err(Error::InvalidCode(format!(
                "k = {} leaves no information per block of side {m}",
                code.k()
            )));
        }
        if window < 2 || iterations == 0 {
            return Err(Error::InvalidParameter(format!(
                "window {window}, iterations {iterations}"
            )));
        }
        Ok(StaircaseConfig {
            code,
            window,
            iterations,
            early_stop: true,
        })
    }

    /// [254,230] component, 7-block window, 8 iterations.
    pub fn standard() -> Self {
        StaircaseConfig::new(BchCode::staircase_default(), 7, 8).unwrap()
    }

    /// Block side m = n/2.
    pub fn block_size(&self) -> usize {
        self.code.n() / 2
    }

    pub fn block_bits(&self) -> usize {
        self.block_size() * self.block_size()
    }

    /// Information columns per block row, k - m.
    pub fn info_columns(&self) -> usize {
        self.code.k() - self.block_size()
    }

    pub fn info_per_block(&self) -> usize {
        self.block_size() * self.info_columns()
    }

    pub fn rate(&self) -> f64 {
        self.info_columns() as f64 / self.block_size() as f64
    }

    /// The per-block anchor thresholds of the 7-block window, indexed by
    /// distance from the newest block.
    pub fn standard_anchor_thresholds(&self) -> Result<Vec<i32>> {
        (0..self.window).map(anchor_threshold_staircase).collect()
    }
}

/// Streaming encoder; the block before the first is all zero.
#[derive(Debug, Clone)]
pub struct StaircaseEncoder {
    config: StaircaseConfig,
    prev: Vec<u8>,
    word: Vec<u8>,
    info: Vec<u8>,
}

impl StaircaseEncoder {
    pub fn new(config: StaircaseConfig) -> Self {
        let m = config.block_size();
        StaircaseEncoder {
            prev: vec![0; m * m],
            word: vec![0; config.code.n()],
            info: vec![0; config.code.k()],
            config,
        }
    }

    pub fn config(&self) -> &StaircaseConfig {
        &self.config
    }

    /// Encodes one block of `m * (k - m)` information bits, row by row.
    pub fn encode_block(&mut self, info: &[u8]) -> Result<Vec<u8>> {
        let m = self.config.block_size();
        let ki = self.config.info_columns();
        if info.len() != m * ki {
            return Err(Error::LengthMismatch {
                expected: m * ki,
                actual: info.len(),
            });
        }
        let mut block = vec![0u8; m * m];
        for j in 0..m {
            for r in 0..m {
                self.info[r] = self.prev[r * m + j];
            }
            self.info[m..].copy_from_slice(&info[j * ki..(j + 1) * ki]);
            self.config.code.encode_into(&self.info, &mut self.word)?;
            block[j * m..(j + 1) * m].copy_from_slice(&self.word[m..]);
        }
        self.prev.copy_from_slice(&block);
        Ok(block)
    }
}

/// Extracts the information bits of a block.
pub fn block_info(config: &StaircaseConfig, block: &[u8]) -> Vec<u8> {
    let m = config.block_size();
    let ki = config.info_columns();
    block
        .chunks(m)
        .flat_map(|row| row[..ki].iter().copied())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Settled {
    No,
    // no erasures, zero syndrome
    Zero,
    // no erasures, nothing the decoder may apply
    Stuck,
}

#[derive(Debug, Clone)]
pub enum StaircaseMode {
    /// Soft-aided decoding. `anchor_thresholds[x]` applies to the block `x`
    /// positions away from the newest one.
    Drsd {
        params: DrsParams,
        anchor_thresholds: Vec<i32>,
    },
    Ibdd,
}

impl StaircaseMode {
    /// DRSD with anchors switched off.
    pub fn drsd_without_anchors(params: DrsParams, window: usize) -> Self {
        StaircaseMode::Drsd {
            params,
            anchor_thresholds: vec![NO_ANCHOR; window],
        }
    }
}

/// Sliding-window decoder. Each pushed block triggers the configured number
/// of sweeps over the window's adjacent block pairs (oldest pair first), after
/// which the oldest block is released.
#[derive(Debug, Clone)]
pub struct StaircaseDecoder {
    config: StaircaseConfig,
    mode: StaircaseMode,
    component: ComponentDecoder,
    m: usize,
    // ring of `window` blocks; slot of window position k is (head + k) % window
    head: usize,
    values: Vec<u8>,
    drs: Vec<i16>,
    hard: Vec<u8>,
    known: Vec<bool>,
    // flushed slots: no codeword links them to the preceding block
    absent: Vec<bool>,
    view: Vec<u32>,
    flipped: FlipSet,
    // per word, keyed by (slot of the newer block, row): result of the last
    // decoding if it cannot change until one of the word's bits does
    settled: Vec<Settled>,
    sweeps: usize,
    trace: Option<Vec<usize>>,
}

impl StaircaseDecoder {
    /// The window starts filled with known all-zero blocks.
    pub fn new(config: StaircaseConfig, mode: StaircaseMode, seed: u64) -> Result<Self> {
        let (j_max, i_s, i_e) = match &mode {
            StaircaseMode::Drsd {
                params,
                anchor_thresholds,
            } => {
                if anchor_thresholds.len() != config.window {
                    return Err(Error::LengthMismatch {
                        expected: config.window,
                        actual: anchor_thresholds.len(),
                    });
                }
                (params.j_max, params.i_s, params.i_e)
            }
            StaircaseMode::Ibdd => (1, 0, 1),
        };
        let m = config.block_size();
        let w = config.window;
        let top = i_e as i16;
        Ok(StaircaseDecoder {
            component: ComponentDecoder::new(j_max, i_s, i_e, seed),
            m,
            head: 0,
            values: vec![0; w * m * m],
            drs: vec![top; w * m * m],
            hard: vec![0; w * m * m],
            known: vec![true; w],
            absent: vec![false; w],
            view: vec![0; 2 * m],
            flipped: FlipSet::new(),
            settled: vec![Settled::No; w * m],
            sweeps: 0,
            trace: None,
            config,
            mode,
        })
    }

    pub fn config(&self) -> &StaircaseConfig {
        &self.config
    }

    /// Total sweeps executed so far.
    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// Records, after every sweep, how many window bits are nonzero or
    /// erased. With the all-zero stream this is the residual error count.
    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn trace(&self) -> &[usize] {
        self.trace.as_deref().unwrap_or(&[])
    }

    fn slot(&self, k: usize) -> usize {
        (self.head + k) % self.config.window
    }

    /// Receives the next block (channel magnitudes and hard decisions,
    /// row-major), decodes the window and returns the released block unless
    /// it was one of the initial known blocks.
    pub fn push_block(&mut self, magnitudes: &[f64], hard: &[u8]) -> Result<Option<Vec<u8>>> {
        let mm = self.m * self.m;
        if magnitudes.len() != mm || hard.len() != mm {
            return Err(Error::LengthMismatch {
                expected: mm,
                actual: magnitudes.len().min(hard.len()),
            });
        }
        // the oldest slot is recycled for the incoming block
        let w = self.config.window;
        let released = self.release_oldest();
        let slot = self.head;
        self.head = (self.head + 1) % w;
        let range = slot * mm..(slot + 1) * mm;
        self.hard[range.clone()].copy_from_slice(hard);
        match &self.mode {
            StaircaseMode::Drsd { params, .. } => {
                params.initialize(
                    magnitudes,
                    hard,
                    &mut self.values[range.clone()],
                    &mut self.drs[range],
                )?;
            }
            StaircaseMode::Ibdd => {
                for (v, &h) in self.values[range].iter_mut().zip(hard) {
                    *v = h & 1;
                }
            }
        }
        self.known[slot] = false;
        self.absent[slot] = false;
        self.settled[slot * self.m..(slot + 1) * self.m].fill(Settled::No);
        self.decode_window();
        Ok(released)
    }

    // Advances the window without a new block.
    fn push_absent(&mut self) -> Option<Vec<u8>> {
        let mm = self.m * self.m;
        let released = self.release_oldest();
        let slot = self.head;
        self.head = (self.head + 1) % self.config.window;
        let top = match &self.mode {
            StaircaseMode::Drsd { params, .. } => params.i_e as i16,
            StaircaseMode::Ibdd => 1,
        };
        self.values[slot * mm..(slot + 1) * mm].fill(0);
        self.hard[slot * mm..(slot + 1) * mm].fill(0);
        self.drs[slot * mm..(slot + 1) * mm].fill(top);
        self.known[slot] = true;
        self.absent[slot] = true;
        self.settled[slot * self.m..(slot + 1) * self.m].fill(Settled::No);
        self.decode_window();
        released
    }

    // Hard decisions of the oldest block, erasures resolved by the channel.
    fn release_oldest(&self) -> Option<Vec<u8>> {
        let slot = self.slot(0);
        if self.known[slot] {
            return None;
        }
        let mm = self.m * self.m;
        let vals = &self.values[slot * mm..(slot + 1) * mm];
        let hard = &self.hard[slot * mm..(slot + 1) * mm];
        Some(
            vals.iter()
                .zip(hard)
                .map(|(&v, &h)| if v == ERASED { h & 1 } else { v })
                .collect(),
        )
    }

    fn fill_view(&mut self, older: usize, newer: usize, j: usize) {
        let m = self.m;
        let mm = m * m;
        for r in 0..m {
            self.view[r] = (older * mm + r * m + j) as u32;
        }
        for c in 0..m {
            self.view[m + c] = (newer * mm + j * m + c) as u32;
        }
    }

    fn decode_window(&mut self) {
        let w = self.config.window;
        let m = self.m;
        let iterations = self.config.iterations;
        // per-slot anchor threshold; known blocks are never flipped
        let slot_ta: Vec<i32> = (0..w)
            .map(|s| {
                if self.known[s] {
                    return PERMANENT_ANCHOR;
                }
                match &self.mode {
                    StaircaseMode::Drsd {
                        anchor_thresholds, ..
                    } => {
                        let k = (s + w - self.head) % w;
                        anchor_thresholds[w - 1 - k]
                    }
                    StaircaseMode::Ibdd => NO_ANCHOR,
                }
            })
            .collect();

        for it in 0..iterations {
            let mut all_zero = true;
            let mut changed = false;
            for k in 1..w {
                let older = self.slot(k - 1);
                let newer = self.slot(k);
                if self.absent[newer] || (self.known[older] && self.known[newer]) {
                    continue;
                }
                let (ta_old, ta_new) = (slot_ta[older], slot_ta[newer]);
                for j in 0..m {
                    match self.settled[newer * m + j] {
                        Settled::Stuck => {
                            all_zero = false;
                            continue;
                        }
                        Settled::Zero => {
                            self.bump_word(older, newer, j);
                            continue;
                        }
                        Settled::No => {}
                    }
                    self.fill_view(older, newer, j);
                    let (out, erasures) = match self.mode {
                        StaircaseMode::Drsd { .. } => {
                            let out = self.component.decode(
                                &self.config.code,
                                &self.view,
                                &mut self.values,
                                &mut self.drs,
                                |p| if p < m { ta_old } else { ta_new },
                            );
                            self.flipped.clear();
                            self.flipped
                                .extend(self.component.changed_positions().map(|p| p as u16));
                            (out, self.component.last_erasures())
                        }
                        StaircaseMode::Ibdd => {
                            let (ko, kn) = (self.known[older], self.known[newer]);
                            let out = ibdd_decode(
                                &self.config.code,
                                &self.view,
                                &mut self.values,
                                |p| if p < m { ko } else { kn },
                                &mut self.flipped,
                            );
                            (out, 0)
                        }
                    };
                    let settled = match out {
                        ComponentOutcome::ZeroSyndrome => Settled::Zero,
                        ComponentOutcome::Failure => Settled::Stuck,
                        ComponentOutcome::AllMiscorrected
                            if matches!(self.mode, StaircaseMode::Ibdd) =>
                        {
                            Settled::Stuck
                        }
                        _ => Settled::No,
                    };
                    self.settled[newer * m + j] =
                        if erasures == 0 { settled } else { Settled::No };
                    match out {
                        ComponentOutcome::ZeroSyndrome => {}
                        ComponentOutcome::Accepted { .. } => {
                            all_zero = false;
                            changed = true;
                            self.mark_changed();
                        }
                        _ => all_zero = false,
                    }
                }
            }
            self.sweeps += 1;
            self.record_trace();
            let remaining = iterations - it - 1;
            if !self.config.early_stop || remaining == 0 {
                continue;
            }
            match self.mode {
                StaircaseMode::Drsd { .. } if all_zero => {
                    self.fast_forward_zero_sweeps(remaining);
                    break;
                }
                StaircaseMode::Ibdd if !changed => break,
                _ => {}
            }
        }
    }

    // Invalidates the settled state of both words through each changed bit.
    fn mark_changed(&mut self) {
        let m = self.m;
        let mm = m * m;
        let w = self.config.window;
        for &p in &self.flipped {
            let idx = self.view[p as usize] as usize;
            let (s, r, c) = (idx / mm, (idx % mm) / m, idx % m);
            self.settled[s * m + r] = Settled::No;
            self.settled[((s + 1) % w) * m + c] = Settled::No;
        }
    }

    // Score update of a word known to have zero syndrome.
    fn bump_word(&mut self, older: usize, newer: usize, j: usize) {
        let StaircaseMode::Drsd { params, .. } = &self.mode else {
            return;
        };
        let i_e = params.i_e as i16;
        let m = self.m;
        let mm = m * m;
        for r in 0..m {
            let d = &mut self.drs[older * mm + r * m + j];
            *d = (*d + 1).min(i_e);
        }
        for d in &mut self.drs[newer * mm + j * m..newer * mm + (j + 1) * m] {
            *d = (*d + 1).min(i_e);
        }
    }

    // Score effect of `sweeps` further sweeps in which every word has zero
    // syndrome: +1 per sweep for each word containing the bit, clipped.
    fn fast_forward_zero_sweeps(&mut self, sweeps: usize) {
        let StaircaseMode::Drsd { params, .. } = &self.mode else {
            return;
        };
        let w = self.config.window;
        let mm = self.m * self.m;
        let i_e = params.i_e;
        for k in 0..w {
            let s = self.slot(k);
            if self.known[s] {
                continue;
            }
            // its rows (pair k-1, k) and its columns (pair k, k+1)
            let words = (k > 0) as usize + (k + 1 < w && !self.absent[self.slot(k + 1)]) as usize;
            let add = (words * sweeps) as i32;
            for d in &mut self.drs[s * mm..(s + 1) * mm] {
                *d = (*d as i32 + add).min(i_e) as i16;
            }
        }
    }

    fn record_trace(&mut self) {
        if let Some(t) = self.trace.as_mut() {
            t.push(self.values.iter().filter(|&&v| v != 0).count());
        }
    }

    /// Decodes and releases every block still in the window.
    pub fn flush(&mut self) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        for _ in 0..self.config.window {
            if let Some(b) = self.push_absent() {
                out.push(b);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelSpec;
    use crate::drs::Quantizer;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_info(cfg: &StaircaseConfig, rng: &mut ChaCha8Rng) -> Vec<u8> {
        (0..cfg.info_per_block()).map(|_| rng.gen_range(0..2)).collect()
    }

    fn drsd_mode(cfg: &StaircaseConfig, t: f64, sigma2: f64) -> StaircaseMode {
        let ch = ChannelSpec::new(1.0, sigma2).unwrap();
        StaircaseMode::Drsd {
            params: DrsParams::for_channel(0, 31, t, 1, Quantizer::EqualMass, &ch).unwrap(),
            anchor_thresholds: cfg.standard_anchor_thresholds().unwrap(),
        }
    }

    #[test]
    fn anchor_rule() {
        assert_eq!(anchor_threshold_staircase(0).unwrap(), 2);
        assert_eq!(anchor_threshold_staircase(5).unwrap(), 12);
        assert_eq!(anchor_threshold_staircase(6).unwrap(), 28);
        assert!(anchor_threshold_staircase(7).is_err());
    }

    #[test]
    fn dimensions() {
        let cfg = StaircaseConfig::standard();
        assert_eq!(cfg.block_size(), 127);
        assert_eq!(cfg.info_per_block(), 13081);
        assert!((cfg.rate() - 0.811).abs() < 5e-4);
    }

    #[test]
    fn zero_info_gives_zero_chain() {
        let cfg = StaircaseConfig::standard();
        let mut enc = StaircaseEncoder::new(cfg.clone());
        for _ in 0..3 {
            assert!(enc
                .encode_block(&vec![0; cfg.info_per_block()])
                .unwrap()
                .iter()
                .all(|&b| b == 0));
        }
        assert!(enc.encode_block(&[0; 5]).is_err());
    }

    #[test]
    fn every_row_is_a_codeword() {
        let cfg = StaircaseConfig::standard();
        let m = cfg.block_size();
        let mut enc = StaircaseEncoder::new(cfg.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut prev = vec![0u8; m * m];
        for _ in 0..3 {
            let info = random_info(&cfg, &mut rng);
            let b = enc.encode_block(&info).unwrap();
            assert_eq!(block_info(&cfg, &b), info);
            for j in 0..m {
                let word: Vec<u8> = (0..m)
                    .map(|r| prev[r * m + j])
                    .chain(b[j * m..(j + 1) * m].iter().copied())
                    .collect();
                let out = cfg.code.bdd_decode(&word).unwrap();
                assert_eq!(out.status, crate::bch::BddStatus::Codeword);
            }
            prev = b;
        }
    }

    fn run_stream(
        cfg: &StaircaseConfig,
        mode: StaircaseMode,
        blocks: usize,
        corrupt: impl Fn(usize, &mut [f64], &mut [u8]),
    ) -> (Vec<Vec<u8>>, Vec<Vec<u8>>, StaircaseDecoder) {
        let mut enc = StaircaseEncoder::new(cfg.clone());
        let mut dec = StaircaseDecoder::new(cfg.clone(), mode, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut sent = Vec::new();
        let mut got = Vec::new();
        for i in 0..blocks {
            let b = enc.encode_block(&random_info(cfg, &mut rng)).unwrap();
            let mut mags = vec![1.0; b.len()];
            let mut hard = b.clone();
            corrupt(i, &mut mags, &mut hard);
            if let Some(out) = dec.push_block(&mags, &hard).unwrap() {
                got.push(out);
            }
            sent.push(b);
        }
        got.extend(dec.flush());
        (sent, got, dec)
    }

    #[test]
    fn noiseless_stream_is_released_unchanged() {
        let cfg = StaircaseConfig::standard();
        let mode = drsd_mode(&cfg, 0.3, 0.3);
        let (sent, got, dec) = run_stream(&cfg, mode, 9, |_, _, _| {});
        assert_eq!(sent, got);
        // one sweep per push, then early stop
        assert_eq!(dec.sweeps(), 9 + 7);
    }

    #[test]
    fn single_error_corrected() {
        let cfg = StaircaseConfig::standard();
        for mode in [drsd_mode(&cfg, 0.0, 0.3), StaircaseMode::Ibdd] {
            let (sent, got, _) = run_stream(&cfg, mode, 8, |i, mags, hard| {
                if i == 3 {
                    hard[500] ^= 1;
                    mags[500] = 0.4;
                }
            });
            assert_eq!(sent, got);
        }
    }

    #[test]
    fn early_stop_does_not_change_decisions() {
        let mut cfg = StaircaseConfig::standard();
        let sigma2 = 1.0 / (2.0 * 10f64.powf(0.4) * cfg.rate());
        let ch = ChannelSpec::new(1.0, sigma2).unwrap();
        let mode = drsd_mode(&cfg, 0.25, sigma2);
        let noisy = |seed: u64| {
            move |i: usize, mags: &mut [f64], hard: &mut [u8]| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed + i as u64);
                let bits = hard.to_vec();
                let (mut m2, mut h2) = (Vec::new(), Vec::new());
                ch.transmit(&bits, &mut rng, &mut m2, &mut h2);
                mags.copy_from_slice(&m2);
                hard.copy_from_slice(&h2);
            }
        };
        let (_, fast, dec_fast) = run_stream(&cfg, mode.clone(), 10, noisy(100));
        cfg.early_stop = false;
        let (_, slow, dec_slow) = run_stream(&cfg, mode, 10, noisy(100));
        assert_eq!(fast, slow);
        assert_eq!(dec_fast.drs, dec_slow.drs);
        assert!(dec_fast.sweeps() < dec_slow.sweeps());
    }

    // Four rows and four columns of one block each carry four errors: a
    // stall for t = 3 bounded-distance decoding.
    fn stall(i: usize, mags: &mut [f64], hard: &mut [u8], mag: f64) {
        if i == 2 {
            for r in [3, 40, 77, 100] {
                for c in [5, 31, 64, 90] {
                    hard[r * 127 + c] ^= 1;
                    mags[r * 127 + c] = mag;
                }
            }
        }
    }

    fn errors(sent: &[Vec<u8>], got: &[Vec<u8>]) -> usize {
        sent.iter()
            .zip(got)
            .map(|(a, b)| a.iter().zip(b).filter(|(x, y)| x != y).count())
            .sum()
    }

    #[test]
    fn stall_pattern_defeats_ibdd() {
        let cfg = StaircaseConfig::standard();
        let (sent, got, _) =
            run_stream(&cfg, StaircaseMode::Ibdd, 6, |i, m, h| stall(i, m, h, 1.0));
        assert_eq!(errors(&sent, &got), 16);
    }

    // Zero stream with the stall at the third block; the diagonal of the
    // stall gets magnitude `diag`, the rest `off`. Returns the per-sweep trace
    // and the residual errors after the flush.
    fn stall_trace(erasure_threshold: f64, diag: f64, off: f64) -> (Vec<usize>, usize) {
        let mut cfg = StaircaseConfig::standard();
        cfg.early_stop = false;
        let mode = drsd_mode(&cfg, erasure_threshold, 0.3);
        let mut enc = StaircaseEncoder::new(cfg.clone());
        let mut dec = StaircaseDecoder::new(cfg.clone(), mode, 9).unwrap();
        dec.enable_trace();
        let mut sent = Vec::new();
        let mut got = Vec::new();
        for i in 0..4 {
            let b = enc.encode_block(&vec![0; cfg.info_per_block()]).unwrap();
            let mut mags = vec![1.5; b.len()];
            let mut hard = b.clone();
            stall(i, &mut mags, &mut hard, off);
            if i == 2 {
                for (r, c) in [(3, 5), (40, 31), (77, 64), (100, 90)] {
                    mags[r * 127 + c] = diag;
                }
            }
            got.extend(dec.push_block(&mags, &hard).unwrap());
            sent.push(b);
        }
        got.extend(dec.flush());
        (dec.trace()[16..].to_vec(), errors(&sent, &got))
    }

    #[test]
    fn stall_fully_erased_is_resolved_at_once() {
        let (trace, residual) = stall_trace(0.3, 0.1, 0.1);
        assert!(trace.iter().all(|&e| e == 0));
        assert_eq!(residual, 0);
    }

    #[test]
    fn stall_without_erasures_persists() {
        // every word sees four errors and fails; nothing moves
        let (trace, residual) = stall_trace(0.05, 0.06, 0.06);
        // the count drops to zero only once the block has left the window
        let (held, left) = trace.split_at(trace.iter().position(|&e| e == 0).unwrap());
        assert!(held.iter().all(|&e| e == 16));
        assert!(left.iter().all(|&e| e == 0));
        assert_eq!(residual, 16);
    }

    #[test]
    fn stall_with_erased_diagonal_trace() {
        let (trace, residual) = stall_trace(0.3, 0.1, 0.5);
        assert_eq!(trace[..STALL_TRACE.len()], STALL_TRACE);
        assert!(trace[STALL_TRACE.len()..].iter().all(|&e| e == 0));
        assert_eq!(residual, 0);
    }

    // recorded: the diagonal anchors lose score until the rows are accepted
    const STALL_TRACE: [usize; 4] = [16, 16, 16, 0];

    #[test]
    fn degenerate_drsd_matches_ibdd() {
        let cfg = StaircaseConfig::standard();
        let sigma2 = 1.0 / (2.0 * 10f64.powf(0.42) * cfg.rate());
        let ch = ChannelSpec::new(1.0, sigma2).unwrap();
        let params = DrsParams::for_channel(0, 31, 0.0, 3, Quantizer::EqualMass, &ch).unwrap();
        let noisy = |i: usize, mags: &mut [f64], hard: &mut [u8]| {
            let mut rng = ChaCha8Rng::seed_from_u64(500 + i as u64);
            let bits = hard.to_vec();
            let (mut m2, mut h2) = (Vec::new(), Vec::new());
            ch.transmit(&bits, &mut rng, &mut m2, &mut h2);
            mags.copy_from_slice(&m2);
            hard.copy_from_slice(&h2);
        };
        let (sent, a, _) = run_stream(
            &cfg,
            StaircaseMode::drsd_without_anchors(params, cfg.window),
            12,
            noisy,
        );
        let (_, b, _) = run_stream(&cfg, StaircaseMode::Ibdd, 12, noisy);
        assert_eq!(a, b);
        assert!(errors(&sent, &a) > 0);
    }
}
