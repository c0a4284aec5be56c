//! OFEC: a [256,239] extended BCH component arranged over 16x16 square
//! blocks, eight block columns per block row.
//!
//! The back of codeword (R, r) is row r of block row R (128 bits, parity in
//! its last 17 positions). Its front consists of eight 16-bit chunks: chunk C
//! is column pi(r) of square block (R - 20 + 2C, C). Codeword positions
//! 0..128 hold the front (chunk C at 16C.., top to bottom), 128..256 the back.
//!
//! Within a block row, bit (C, r, c) is stored at r * 128 + 16 C + c.

use std::fmt::Write as _;

use crate::bch::{BchCode, FlipSet};
use crate::drs::{DrsParams, ERASED};
use crate::eaed::{ibdd_decode, ComponentDecoder, ComponentOutcome, NO_ANCHOR, PERMANENT_ANCHOR};
use crate::error::{Error, Result};

pub const SQUARE: usize = 16;
pub const BLOCK_COLUMNS: usize = 8;
/// Largest distance in block rows between a back and one of its chunks.
pub const MAX_GAP: usize = 20;
/// Smallest such distance.
pub const MIN_GAP: usize = MAX_GAP - 2 * (BLOCK_COLUMNS - 1);
pub const ROW_BITS: usize = SQUARE * SQUARE * BLOCK_COLUMNS;
pub const HALF: usize = SQUARE * BLOCK_COLUMNS;
pub const INFO_PER_CODEWORD: usize = 111;
pub const INFO_PER_PAIR: usize = 2 * SQUARE * INFO_PER_CODEWORD;
pub const CODED_PER_PAIR: usize = 2 * ROW_BITS;

/// A bit: block row, block column, row and column inside the square block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitPos {
    pub row: i64,
    pub col: usize,
    pub r: usize,
    pub c: usize,
}

impl BitPos {
    pub fn offset(&self) -> usize {
        self.r * HALF + SQUARE * self.col + self.c
    }

    pub fn from_offset(row: i64, offset: usize) -> Self {
        BitPos {
            row,
            col: (offset % HALF) / SQUARE,
            r: offset / HALF,
            c: offset % SQUARE,
        }
    }
}

/// Codeword (R, r): the one whose back is row r of block row R.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CodewordId {
    pub row: i64,
    pub r: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OfecLayout {
    perm: [usize; SQUARE],
    inv: [usize; SQUARE],
}

impl Default for OfecLayout {
    fn default() -> Self {
        OfecLayout::identity()
    }
}

impl OfecLayout {
    pub fn identity() -> Self {
        let p: [usize; SQUARE] = std::array::from_fn(|i| i);
        OfecLayout { perm: p, inv: p }
    }

    /// `perm[r]` is the block column carrying the front chunks of row r.
    pub fn with_permutation(perm: [usize; SQUARE]) -> Result<Self> {
        let mut inv = [usize::MAX; SQUARE];
        for (r, &c) in perm.iter().enumerate() {
            if c >= SQUARE || inv[c] != usize::MAX {
                return Err(Error::InvalidParameter(format!(
                    "{perm:?} is not a permutation of 0..16"
                )));
            }
            inv[c] = r;
        }
        Ok(OfecLayout { perm, inv })
    }

    pub fn permutation(&self) -> &[usize; SQUARE] {
        &self.perm
    }

    /// Block row holding front chunk `col` of codewords with back in `row`.
    pub fn front_row(row: i64, col: usize) -> i64 {
        row - MAX_GAP as i64 + 2 * col as i64
    }

    /// The back and front codewords through a bit, with the bit's position
    /// inside each.
    pub fn bit_to_codewords(&self, b: BitPos) -> ((CodewordId, usize), (CodewordId, usize)) {
        let back = CodewordId { row: b.row, r: b.r };
        let front = CodewordId {
            row: b.row + MAX_GAP as i64 - 2 * b.col as i64,
            r: self.inv[b.c],
        };
        (
            (back, HALF + SQUARE * b.col + b.c),
            (front, SQUARE * b.col + b.r),
        )
    }

    /// The bit at position `p` of a codeword.
    pub fn codeword_bit(&self, cw: CodewordId, p: usize) -> BitPos {
        if p < HALF {
            let col = p / SQUARE;
            BitPos {
                row: Self::front_row(cw.row, col),
                col,
                r: p % SQUARE,
                c: self.perm[cw.r],
            }
        } else {
            let q = p - HALF;
            BitPos {
                row: cw.row,
                col: q / SQUARE,
                r: cw.r,
                c: q % SQUARE,
            }
        }
    }

    /// Diagnostic table: one line per bit of block rows `rows`, giving its
    /// back and front codewords and positions.
    pub fn dump(&self, rows: std::ops::Range<i64>) -> String {
        let mut s = String::from("row;col;r;c;back_row;back_r;back_pos;front_row;front_r;front_pos\n");
        for row in rows {
            for off in 0..ROW_BITS {
                let b = BitPos::from_offset(row, off);
                let ((bk, bp), (fr, fp)) = self.bit_to_codewords(b);
                let _ = writeln!(
                    s,
                    "{};{};{};{};{};{};{};{};{};{}",
                    b.row, b.col, b.r, b.c, bk.row, bk.r, bp, fr.row, fr.r, fp
                );
            }
        }
        s
    }
}

/// Streaming encoder; block rows before the first are all zero.
#[derive(Debug, Clone)]
pub struct OfecEncoder {
    code: BchCode,
    layout: OfecLayout,
    // the last MAX_GAP block rows, oldest first
    history: Vec<Vec<u8>>,
    info: Vec<u8>,
    word: Vec<u8>,
}

impl OfecEncoder {
    pub fn new(code: BchCode, layout: OfecLayout) -> Result<Self> {
        check_code(&code)?;
        Ok(OfecEncoder {
            history: vec![vec![0; ROW_BITS]; MAX_GAP],
            info: vec![0; code.k()],
            word: vec![0; code.n()],
            code,
            layout,
        })
    }

    /// Encodes 3552 information bits into the next two block rows (4096 bits,
    /// older row first).
    pub fn encode_row_pair(&mut self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != INFO_PER_PAIR {
            return Err(Error::LengthMismatch {
                expected: INFO_PER_PAIR,
                actual: info.len(),
            });
        }
        let mut out = Vec::with_capacity(CODED_PER_PAIR);
        for half in info.chunks(INFO_PER_PAIR / 2) {
            let row = self.encode_row(half)?;
            out.extend_from_slice(&row);
            self.history.remove(0);
            self.history.push(row);
        }
        Ok(out)
    }

    fn encode_row(&mut self, info: &[u8]) -> Result<Vec<u8>> {
        let mut row = vec![0u8; ROW_BITS];
        for r in 0..SQUARE {
            let c = self.layout.perm[r];
            for col in 0..BLOCK_COLUMNS {
                // front row R - 20 + 2C is history[2C] relative to the new row
                let src = &self.history[2 * col];
                for i in 0..SQUARE {
                    self.info[SQUARE * col + i] = src[i * HALF + SQUARE * col + c];
                }
            }
            self.info[HALF..]
                .copy_from_slice(&info[r * INFO_PER_CODEWORD..(r + 1) * INFO_PER_CODEWORD]);
            self.code.encode_into(&self.info, &mut self.word)?;
            row[r * HALF..(r + 1) * HALF].copy_from_slice(&self.word[HALF..]);
        }
        Ok(row)
    }
}

/// Information bits of an encoded row pair.
pub fn row_pair_info(coded: &[u8]) -> Vec<u8> {
    coded
        .chunks(HALF)
        .flat_map(|back| back[..INFO_PER_CODEWORD].iter().copied())
        .collect()
}

fn check_code(code: &BchCode) -> Result<()> {
    if code.n() != 2 * HALF || code.k() != HALF + INFO_PER_CODEWORD {
        return Err(Error::InvalidCode(format!(
            "OFEC needs a [256,239] component, got [{},{}]",
            code.n(),
            code.k()
        )));
    }
    Ok(())
}

/// Anchor threshold from a bit's decoding count `ell` (1-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnchorSchedule {
    Disabled,
    /// `step * floor((ell - 1) / p_a) + init` while `ell <= 2L - p_r`,
    /// `star` afterwards.
    Steps {
        init: i32,
        step: i32,
        star: i32,
        p_a: u32,
        p_r: u32,
    },
}

impl AnchorSchedule {
    pub fn validate(&self, iterations: usize) -> Result<()> {
        if let AnchorSchedule::Steps { p_a, p_r, .. } = *self {
            if p_a == 0 || p_r as usize >= 2 * iterations {
                return Err(Error::InvalidParameter(format!(
                    "anchor schedule needs p_a >= 1 and p_r < 2L, got p_a = {p_a}, p_r = {p_r}"
                )));
            }
        }
        Ok(())
    }

    pub fn threshold(&self, ell: u32, iterations: usize) -> i32 {
        match *self {
            AnchorSchedule::Disabled => NO_ANCHOR,
            AnchorSchedule::Steps {
                init,
                step,
                star,
                p_a,
                p_r,
            } => anchor_threshold_ofec(ell, init, step, star, p_a, p_r, iterations),
        }
    }
}

pub fn anchor_threshold_ofec(
    ell: u32,
    init: i32,
    step: i32,
    star: i32,
    p_a: u32,
    p_r: u32,
    iterations: usize,
) -> i32 {
    let ell = ell.max(1) as i64;
    if ell <= 2 * iterations as i64 - p_r as i64 {
        step * ((ell - 1) / p_a as i64) as i32 + init
    } else {
        star
    }
}

/// Decoding count of a bit in block column `col` at relative depth `depth`
/// (0 for the newest block row), when depths 0 and 1 are the buffer rows.
pub fn iteration_count_closed_form(depth: i64, col: usize, buffer_row: bool) -> i64 {
    let span = MAX_GAP as i64;
    let front = (depth.rem_euclid(span) - MIN_GAP as i64).div_euclid(2) >= 7 - col as i64;
    2 * depth.div_euclid(span) + front as i64 + buffer_row as i64
}

#[derive(Debug, Clone)]
pub enum OfecMode {
    Drsd {
        params: DrsParams,
        anchors: AnchorSchedule,
    },
    Ibdd,
}

#[derive(Debug, Clone)]
pub struct OfecDecoderConfig {
    pub code: BchCode,
    pub layout: OfecLayout,
    /// Full decoding iterations L; the window holds 20L + 2 block rows.
    pub iterations: usize,
    pub stall_pattern_removal: bool,
}

impl OfecDecoderConfig {
    pub fn new(iterations: usize, stall_pattern_removal: bool) -> Self {
        OfecDecoderConfig {
            code: BchCode::ofec_default(),
            layout: OfecLayout::identity(),
            iterations,
            stall_pattern_removal,
        }
    }

    pub fn window_rows(&self) -> usize {
        MAX_GAP * self.iterations + 2
    }
}

/// Bookkeeping of the decoding schedule, collected when enabled.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScheduleAudit {
    /// Codeword decodings before flushing started.
    pub decodes: u64,
    /// Bit decodings outside the buffer rows compared with the closed form.
    pub closed_form_checked: u64,
    pub closed_form_mismatches: u64,
    /// Of those mismatches: column-0 bits one decoding short of the closed
    /// form. At depths 20k and 20k + 1 their back and front decodings fall into the same
    /// event, which the closed form counts as already done.
    pub column0_mismatches: u64,
    /// Bits released before flushing started.
    pub emitted_bits: u64,
    /// Of those, bits whose decoding count differs from 2L.
    pub emitted_count_errors: u64,
}

/// Stall-pattern removal counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SprStats {
    pub flips: u64,
    /// Flipped bits whose stored value was 1 before the flip.
    pub ones_flipped: u64,
}

const FRONT_FAIL: u8 = 1;
const BACK_FAIL: u8 = 2;

/// Windowed decoder. Every arriving block-row pair triggers the decoding of
/// all codewords whose back lies at a depth of 0 or 1 modulo 20, oldest
/// first; the pair reaching depths 20L and 20L + 1 is then released.
#[derive(Debug, Clone)]
pub struct OfecDecoder {
    config: OfecDecoderConfig,
    mode: OfecMode,
    component: ComponentDecoder,
    cap: usize,
    // slot of the newest block row
    newest: usize,
    values: Vec<u8>,
    drs: Vec<i16>,
    hard: Vec<u8>,
    count: Vec<u16>,
    flags: Vec<u8>,
    known: Vec<bool>,
    absent: Vec<bool>,
    view: Vec<u32>,
    ta: Vec<i32>,
    flipped: FlipSet,
    audit: Option<ScheduleAudit>,
    draining: bool,
    spr: SprStats,
}

impl OfecDecoder {
    pub fn new(config: OfecDecoderConfig, mode: OfecMode, seed: u64) -> Result<Self> {
        check_code(&config.code)?;
        if config.iterations == 0 {
            return Err(Error::InvalidParameter("L must be at least 1".into()));
        }
        let (j_max, i_s, i_e) = match &mode {
            OfecMode::Drsd { params, anchors } => {
                anchors.validate(config.iterations)?;
                (params.j_max, params.i_s, params.i_e)
            }
            OfecMode::Ibdd => (1, 0, 1),
        };
        let cap = config.window_rows();
        let bits = cap * ROW_BITS;
        Ok(OfecDecoder {
            component: ComponentDecoder::new(j_max, i_s, i_e, seed),
            cap,
            newest: 0,
            values: vec![0; bits],
            drs: vec![i_e as i16; bits],
            hard: vec![0; bits],
            count: vec![0; bits],
            flags: vec![0; bits],
            known: vec![true; cap],
            absent: vec![false; cap],
            view: vec![0; 2 * HALF],
            ta: vec![0; 2 * HALF],
            flipped: FlipSet::new(),
            audit: None,
            draining: false,
            spr: SprStats::default(),
            config,
            mode,
        })
    }

    pub fn config(&self) -> &OfecDecoderConfig {
        &self.config
    }

    pub fn enable_audit(&mut self) {
        self.audit = Some(ScheduleAudit::default());
    }

    pub fn audit(&self) -> Option<&ScheduleAudit> {
        self.audit.as_ref()
    }

    pub fn spr_stats(&self) -> SprStats {
        self.spr
    }

    fn slot(&self, depth: usize) -> usize {
        (self.newest + self.cap - depth) % self.cap
    }

    fn top_score(&self) -> i16 {
        match &self.mode {
            OfecMode::Drsd { params, .. } => params.i_e as i16,
            OfecMode::Ibdd => 1,
        }
    }

    /// Receives two block rows (older first) and returns the two rows
    /// released by this step, unless they precede the stream.
    pub fn push_row_pair(&mut self, magnitudes: &[f64], hard: &[u8]) -> Result<Option<Vec<u8>>> {
        if magnitudes.len() != CODED_PER_PAIR || hard.len() != CODED_PER_PAIR {
            return Err(Error::LengthMismatch {
                expected: CODED_PER_PAIR,
                actual: magnitudes.len().min(hard.len()),
            });
        }
        for half in 0..2 {
            self.newest = (self.newest + 1) % self.cap;
            let slot = self.newest;
            let range = slot * ROW_BITS..(slot + 1) * ROW_BITS;
            let src = half * ROW_BITS..(half + 1) * ROW_BITS;
            self.hard[range.clone()].copy_from_slice(&hard[src.clone()]);
            match &self.mode {
                OfecMode::Drsd { params, .. } => params.initialize(
                    &magnitudes[src.clone()],
                    &hard[src.clone()],
                    &mut self.values[range.clone()],
                    &mut self.drs[range.clone()],
                )?,
                OfecMode::Ibdd => {
                    for (v, &h) in self.values[range.clone()].iter_mut().zip(&hard[src]) {
                        *v = h & 1;
                    }
                }
            }
            self.count[range.clone()].fill(0);
            self.flags[range].fill(0);
            self.known[slot] = false;
            self.absent[slot] = false;
        }
        Ok(self.step())
    }

    // Advances the window by a pair of rows that carry no codewords.
    fn push_absent_pair(&mut self) -> Option<Vec<u8>> {
        let top = self.top_score();
        for _ in 0..2 {
            self.newest = (self.newest + 1) % self.cap;
            let slot = self.newest;
            let range = slot * ROW_BITS..(slot + 1) * ROW_BITS;
            self.values[range.clone()].fill(0);
            self.hard[range.clone()].fill(0);
            self.drs[range.clone()].fill(top);
            self.count[range.clone()].fill(0);
            self.flags[range].fill(0);
            self.known[slot] = true;
            self.absent[slot] = true;
        }
        self.step()
    }

    /// Decodes and releases every row pair still in the window.
    pub fn flush(&mut self) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        for _ in 0..self.cap / 2 {
            if let Some(rows) = self.push_absent_pair() {
                out.push(rows);
            }
        }
        out
    }

    fn step(&mut self) -> Option<Vec<u8>> {
        let l = self.config.iterations;
        self.draining = self.absent.iter().any(|&a| a);
        if self.config.stall_pattern_removal {
            let d = MAX_GAP * (l - 1);
            for depth in [d + 1, d] {
                self.remove_stall_patterns(depth);
            }
        }
        for k in (0..l).rev() {
            for depth in [MAX_GAP * k + 1, MAX_GAP * k] {
                let slot = self.slot(depth);
                if self.absent[slot] || self.known[slot] {
                    continue;
                }
                for r in 0..SQUARE {
                    self.decode_codeword(depth, r);
                }
            }
        }
        self.release()
    }

    fn remove_stall_patterns(&mut self, depth: usize) {
        let slot = self.slot(depth);
        if self.known[slot] {
            return;
        }
        let range = slot * ROW_BITS..(slot + 1) * ROW_BITS;
        for i in range {
            if self.flags[i] == FRONT_FAIL | BACK_FAIL && self.values[i] != ERASED {
                self.spr.flips += 1;
                self.spr.ones_flipped += self.values[i] as u64;
                self.values[i] ^= 1;
            }
        }
    }

    fn fill_view(&mut self, depth: usize, r: usize) {
        let c = self.config.layout.perm[r];
        for col in 0..BLOCK_COLUMNS {
            let front = self.slot(depth + MAX_GAP - 2 * col) * ROW_BITS;
            for i in 0..SQUARE {
                self.view[SQUARE * col + i] = (front + i * HALF + SQUARE * col + c) as u32;
            }
        }
        let back = self.slot(depth) * ROW_BITS + r * HALF;
        for p in 0..HALF {
            self.view[HALF + p] = (back + p) as u32;
        }
    }

    fn decode_codeword(&mut self, depth: usize, r: usize) {
        let l = self.config.iterations;
        self.fill_view(depth, r);
        if let (Some(audit), false) = (self.audit.as_mut(), self.draining) {
            audit.decodes += 1;
            for p in 0..2 * HALF {
                let idx = self.view[p] as usize;
                let bit_depth = if p < HALF {
                    depth + MAX_GAP - 2 * (p / SQUARE)
                } else {
                    depth
                };
                if bit_depth < 2 || self.known[idx / ROW_BITS] {
                    continue;
                }
                let col = (idx % HALF) / SQUARE;
                let closed = iteration_count_closed_form(bit_depth as i64, col, false);
                let tracked = self.count[idx] as i64;
                audit.closed_form_checked += 1;
                if closed != tracked {
                    audit.closed_form_mismatches += 1;
                    if col == 0 && bit_depth % MAX_GAP < 2 && tracked + 1 == closed {
                        audit.column0_mismatches += 1;
                    }
                }
            }
        }

        let out = match &self.mode {
            OfecMode::Drsd { anchors, .. } => {
                let anchors = *anchors;
                for p in 0..2 * HALF {
                    let idx = self.view[p] as usize;
                    self.ta[p] = if self.known[idx / ROW_BITS] {
                        PERMANENT_ANCHOR
                    } else {
                        anchors.threshold(self.count[idx] as u32, l)
                    };
                }
                let ta = &self.ta;
                self.component.decode(
                    &self.config.code,
                    &self.view,
                    &mut self.values,
                    &mut self.drs,
                    |p| ta[p],
                )
            }
            OfecMode::Ibdd => {
                let known = &self.known;
                let view = &self.view;
                ibdd_decode(
                    &self.config.code,
                    view,
                    &mut self.values,
                    |p| known[view[p] as usize / ROW_BITS],
                    &mut self.flipped,
                )
            }
        };

        let failed = matches!(
            out,
            ComponentOutcome::Failure | ComponentOutcome::AllMiscorrected
        );
        for p in 0..2 * HALF {
            let idx = self.view[p] as usize;
            self.count[idx] = self.count[idx].saturating_add(1);
            let flag = if p < HALF { FRONT_FAIL } else { BACK_FAIL };
            if failed {
                self.flags[idx] |= flag;
            } else {
                self.flags[idx] &= !flag;
            }
        }
    }

    fn release(&mut self) -> Option<Vec<u8>> {
        let l = self.config.iterations;
        let deepest = MAX_GAP * l + 1;
        let (older, newer) = (self.slot(deepest), self.slot(deepest - 1));
        if self.known[older] || self.known[newer] {
            return None;
        }
        let mut out = Vec::with_capacity(CODED_PER_PAIR);
        for slot in [older, newer] {
            let range = slot * ROW_BITS..(slot + 1) * ROW_BITS;
            if let (Some(audit), false) = (self.audit.as_mut(), self.draining) {
                audit.emitted_bits += ROW_BITS as u64;
                audit.emitted_count_errors += self.count[range.clone()]
                    .iter()
                    .filter(|&&c| c as usize != 2 * l)
                    .count() as u64;
            }
            out.extend(
                self.values[range.clone()]
                    .iter()
                    .zip(&self.hard[range])
                    .map(|(&v, &h)| if v == ERASED { h & 1 } else { v }),
            );
        }
        Some(out)
    }
}
