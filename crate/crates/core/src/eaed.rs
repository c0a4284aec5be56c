//! Component decoder: error-and-erasure decoding with complementary random
//! fill patterns, anchor-based miscorrection detection and DRS update.
//!
//! The decoder works on a *view*: a list of storage indices, one per codeword
//! position, into flat value and score arrays owned by the product-code
//! decoder. Positions whose anchor threshold is [`PERMANENT_ANCHOR`] are never
//! flipped (known or shortened bits).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;

use crate::bch::{BchCode, BddStatus, FlipSet, Syndrome};
use crate::drs::{DrsRegister, TernaryWord, ERASED};
use crate::error::{Error, Result};

/// Anchor threshold that makes a position an anchor regardless of its score.
pub const PERMANENT_ANCHOR: i32 = i32::MIN;

/// Anchor threshold that never classifies a position as an anchor.
pub const NO_ANCHOR: i32 = i32::MAX;

type Bits = SmallVec<[u64; 4]>;

/// One BDD output of a filled test pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    /// Non-erased positions where the candidate disagrees with the word.
    pub flips: FlipSet,
    /// Candidate values on the erased positions, bit e for the e-th erasure.
    pub fill: Bits,
    /// Generation index of the test pattern that produced it.
    pub pattern: usize,
}

impl Candidate {
    /// Hamming distance to the word over non-erased positions.
    pub fn distance(&self) -> usize {
        self.flips.len()
    }

    pub fn fill_value(&self, e: usize) -> u8 {
        ((self.fill[e / 64] >> (e % 64)) & 1) as u8
    }
}

/// Unique candidates ordered by distance (ties by pattern index).
#[derive(Debug, Clone, Default)]
pub struct CandidateList {
    /// Erased word positions, ascending.
    pub erased: Vec<u16>,
    pub candidates: Vec<Candidate>,
    /// Number of test patterns that were decoded.
    pub patterns: usize,
}

impl CandidateList {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    fn clear(&mut self) {
        self.erased.clear();
        self.candidates.clear();
        self.patterns = 0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EaedOutcome {
    /// No erasures and the word is already a codeword.
    ZeroSyndrome,
    /// At least one candidate in the list.
    Candidates,
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdOutcome {
    Accepted(usize),
    AllMiscorrected,
}

/// Final result of decoding one component word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentOutcome {
    ZeroSyndrome,
    Accepted { flips: usize },
    AllMiscorrected,
    Failure,
}

impl ComponentOutcome {
    /// Zero syndrome or an accepted candidate.
    pub fn is_success(self) -> bool {
        matches!(
            self,
            ComponentOutcome::ZeroSyndrome | ComponentOutcome::Accepted { .. }
        )
    }
}

/// Number of complementary pattern pairs for `e` erasures.
pub fn pattern_pairs(e: usize, j_max: usize) -> usize {
    match e {
        0 => 0,
        1 => 1,
        _ => j_max.min(e),
    }
}

fn random_bits<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Bits {
    let words = len.div_ceil(64);
    let mut b: Bits = (0..words).map(|_| rng.gen::<u64>()).collect();
    if len % 64 != 0 {
        b[words - 1] &= (1u64 << (len % 64)) - 1;
    }
    b
}

fn complement(b: &Bits, len: usize) -> Bits {
    let mut c: Bits = b.iter().map(|w| !w).collect();
    if len % 64 != 0 {
        let last = c.len() - 1;
        c[last] &= (1u64 << (len % 64)) - 1;
    }
    c
}

/// EaED of `y` into `list`. Fill patterns come in `J` distinct complementary
/// pairs drawn from `rng`.
pub fn eaed_candidates_into<R: Rng + ?Sized>(
    code: &BchCode,
    y: &[u8],
    j_max: usize,
    rng: &mut R,
    list: &mut CandidateList,
) -> EaedOutcome {
    list.clear();
    let n_inner = code.inner_len();
    let mut syn: Syndrome = 0;
    let mut parity = 0u8;
    for (i, &v) in y.iter().enumerate() {
        if v == ERASED {
            list.erased.push(i as u16);
        } else if v & 1 == 1 {
            parity ^= 1;
            if i < n_inner {
                syn ^= code.position_syndrome(i);
            }
        }
    }
    let e = list.erased.len();
    if e == 0 {
        let out = code.decode_syndrome(syn, parity);
        return match out.status {
            BddStatus::Codeword => EaedOutcome::ZeroSyndrome,
            BddStatus::Failure => EaedOutcome::Failure,
            BddStatus::Corrected => {
                list.patterns = 1;
                list.candidates.push(Candidate {
                    flips: out.flips,
                    fill: Bits::new(),
                    pattern: 0,
                });
                EaedOutcome::Candidates
            }
        };
    }

    let erased_syn_all = list
        .erased
        .iter()
        .fold(0, |s, &p| s ^ code.position_syndrome(p as usize));
    let pairs = pattern_pairs(e, j_max);
    let mut drawn: SmallVec<[Bits; 8]> = SmallVec::new();
    for _ in 0..pairs {
        let p = loop {
            let p = random_bits(rng, e);
            let pc = complement(&p, e);
            if !drawn.iter().any(|d| *d == p || *d == pc) {
                break p;
            }
        };
        let pc = complement(&p, e);
        drawn.push(p);
        drawn.push(pc);
    }

    let mut pattern_syn: (Syndrome, u8) = (0, 0);
    for (idx, pattern) in drawn.iter().enumerate() {
        // odd entries are complements of the preceding pattern
        let (s, par) = if idx % 2 == 0 {
            pattern_syn = ones_syndrome(code, &list.erased, pattern);
            (syn ^ pattern_syn.0, parity ^ pattern_syn.1)
        } else {
            (
                syn ^ pattern_syn.0 ^ erased_syn_all,
                parity ^ pattern_syn.1 ^ (e & 1) as u8,
            )
        };
        list.patterns += 1;
        let out = code.decode_syndrome(s, par);
        if out.is_failure() {
            continue;
        }
        let mut fill = pattern.clone();
        let mut flips = FlipSet::new();
        for &f in &out.flips {
            match list.erased.binary_search(&f) {
                Ok(k) => fill[k / 64] ^= 1 << (k % 64),
                Err(_) => flips.push(f),
            }
        }
        let cand = Candidate {
            flips,
            fill,
            pattern: idx,
        };
        if !list
            .candidates
            .iter()
            .any(|c| c.flips == cand.flips && c.fill == cand.fill)
        {
            list.candidates.push(cand);
        }
    }
    if list.candidates.is_empty() {
        return EaedOutcome::Failure;
    }
    // stable: equal distances keep generation order
    list.candidates.sort_by_key(|c| c.distance());
    EaedOutcome::Candidates
}

// Syndrome and parity contribution of the ones of `pattern`.
fn ones_syndrome(code: &BchCode, erased: &[u16], pattern: &Bits) -> (Syndrome, u8) {
    let mut s = 0;
    let mut par = 0u8;
    for (k, &pos) in erased.iter().enumerate() {
        if (pattern[k / 64] >> (k % 64)) & 1 == 1 {
            s ^= code.position_syndrome(pos as usize);
            par ^= 1;
        }
    }
    (s, par)
}

/// Owned-result form of [`eaed_candidates_into`].
pub fn eaed_candidates<R: Rng + ?Sized>(
    code: &BchCode,
    y: &TernaryWord,
    j_max: usize,
    rng: &mut R,
) -> Result<(EaedOutcome, CandidateList)> {
    if y.len() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            actual: y.len(),
        });
    }
    let mut list = CandidateList::default();
    let out = eaed_candidates_into(code, &y.0, j_max, rng, &mut list);
    Ok((out, list))
}

/// First candidate that flips no anchor, where `is_anchor(pos)` tells whether
/// word position `pos` is currently an anchor.
pub fn md_select_by(list: &CandidateList, is_anchor: impl Fn(usize) -> bool) -> MdOutcome {
    list.candidates
        .iter()
        .position(|c| c.flips.iter().all(|&p| !is_anchor(p as usize)))
        .map_or(MdOutcome::AllMiscorrected, MdOutcome::Accepted)
}

/// Anchor test against per-position scores and thresholds: anchor iff
/// score > threshold.
pub fn md_select(list: &CandidateList, drs: &[i16], anchor_threshold: &[i32]) -> MdOutcome {
    md_select_by(list, |p| {
        anchor_threshold[p] == PERMANENT_ANCHOR || drs[p] as i32 > anchor_threshold[p]
    })
}

/// Mutable access to the values and scores of one component word.
pub trait WordStorage {
    fn value(&self, pos: usize) -> u8;
    fn set_value(&mut self, pos: usize, v: u8);
    fn add_drs(&mut self, pos: usize, delta: i16);
    fn len(&self) -> usize;
}

/// A component word scattered over flat arrays through an index view.
pub struct ViewStorage<'a> {
    pub view: &'a [u32],
    pub values: &'a mut [u8],
    pub drs: &'a mut [i16],
    pub i_s: i16,
    pub i_e: i16,
}

impl WordStorage for ViewStorage<'_> {
    #[inline]
    fn value(&self, pos: usize) -> u8 {
        self.values[self.view[pos] as usize]
    }
    #[inline]
    fn set_value(&mut self, pos: usize, v: u8) {
        self.values[self.view[pos] as usize] = v;
    }
    #[inline]
    fn add_drs(&mut self, pos: usize, delta: i16) {
        let d = &mut self.drs[self.view[pos] as usize];
        *d = (*d + delta).clamp(self.i_s, self.i_e);
    }
    fn len(&self) -> usize {
        self.view.len()
    }
}

/// A standalone word with its own register.
pub struct LocalStorage<'a> {
    pub word: &'a mut TernaryWord,
    pub drs: &'a mut DrsRegister,
}

impl WordStorage for LocalStorage<'_> {
    fn value(&self, pos: usize) -> u8 {
        self.word.0[pos]
    }
    fn set_value(&mut self, pos: usize, v: u8) {
        self.word.0[pos] = v;
    }
    fn add_drs(&mut self, pos: usize, delta: i16) {
        self.drs.bump(pos, delta);
    }
    fn len(&self) -> usize {
        self.word.len()
    }
}

/// What the EaED and MD steps decided for one word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    ZeroSyndrome,
    Accept(usize),
    AllMiscorrected,
    Failure,
}

/// Applies a decision: +1 everywhere on a zero syndrome; write the accepted
/// candidate (fills included) and -1 at its flips; -1 at the first
/// candidate's flips if all were miscorrections; nothing on failure.
pub fn apply_and_update<S: WordStorage>(
    store: &mut S,
    list: &CandidateList,
    decision: Decision,
) -> ComponentOutcome {
    match decision {
        Decision::ZeroSyndrome => {
            for p in 0..store.len() {
                store.add_drs(p, 1);
            }
            ComponentOutcome::ZeroSyndrome
        }
        Decision::Accept(i) => {
            let c = &list.candidates[i];
            for (k, &pos) in list.erased.iter().enumerate() {
                store.set_value(pos as usize, c.fill_value(k));
            }
            for &p in &c.flips {
                let p = p as usize;
                let v = store.value(p);
                store.set_value(p, v ^ 1);
                store.add_drs(p, -1);
            }
            ComponentOutcome::Accepted {
                flips: c.flips.len(),
            }
        }
        Decision::AllMiscorrected => {
            for &p in &list.candidates[0].flips {
                store.add_drs(p as usize, -1);
            }
            ComponentOutcome::AllMiscorrected
        }
        Decision::Failure => ComponentOutcome::Failure,
    }
}

/// Reusable component decoder: owns the fill-pattern generator and scratch.
#[derive(Debug, Clone)]
pub struct ComponentDecoder {
    j_max: usize,
    i_s: i16,
    i_e: i16,
    rng: ChaCha8Rng,
    word: Vec<u8>,
    list: CandidateList,
    last: Decision,
}

impl ComponentDecoder {
    pub fn new(j_max: usize, i_s: i32, i_e: i32, seed: u64) -> Self {
        ComponentDecoder {
            j_max,
            i_s: i_s as i16,
            i_e: i_e as i16,
            rng: ChaCha8Rng::seed_from_u64(seed),
            word: Vec::with_capacity(256),
            list: CandidateList::default(),
            last: Decision::Failure,
        }
    }

    /// DRSD of the word at `view`. `anchor_threshold(pos)` gives T_a for word
    /// position `pos`.
    pub fn decode(
        &mut self,
        code: &BchCode,
        view: &[u32],
        values: &mut [u8],
        drs: &mut [i16],
        anchor_threshold: impl Fn(usize) -> i32,
    ) -> ComponentOutcome {
        self.word.clear();
        self.word.extend(view.iter().map(|&i| values[i as usize]));
        let decision =
            match eaed_candidates_into(code, &self.word, self.j_max, &mut self.rng, &mut self.list) {
                EaedOutcome::ZeroSyndrome => Decision::ZeroSyndrome,
                EaedOutcome::Failure => Decision::Failure,
                EaedOutcome::Candidates => {
                    let drs_ro: &[i16] = drs;
                    match md_select_by(&self.list, |p| {
                        let ta = anchor_threshold(p);
                        ta == PERMANENT_ANCHOR || drs_ro[view[p] as usize] as i32 > ta
                    }) {
                        MdOutcome::Accepted(i) => Decision::Accept(i),
                        MdOutcome::AllMiscorrected => Decision::AllMiscorrected,
                    }
                }
            };
        let mut store = ViewStorage {
            view,
            values,
            drs,
            i_s: self.i_s,
            i_e: self.i_e,
        };
        self.last = decision;
        apply_and_update(&mut store, &self.list, decision)
    }

    /// Word positions whose stored value the last [`decode`](Self::decode)
    /// changed: the accepted candidate's flips and the filled erasures.
    pub fn changed_positions(&self) -> impl Iterator<Item = usize> + '_ {
        let flips: &[u16] = match self.last {
            Decision::Accept(i) => &self.list.candidates[i].flips,
            _ => &[],
        };
        let erased: &[u16] = match self.last {
            Decision::Accept(_) => &self.list.erased,
            _ => &[],
        };
        flips.iter().chain(erased).map(|&p| p as usize)
    }

    /// Erasures seen by the last [`decode`](Self::decode).
    pub fn last_erasures(&self) -> usize {
        self.list.erased.len()
    }
}

/// Plain iterative-BDD step on the word at `view`: flips are applied unless
/// one of them hits a frozen position, in which case the word is left alone.
/// Applied flips are written to `flipped`.
pub fn ibdd_decode(
    code: &BchCode,
    view: &[u32],
    values: &mut [u8],
    is_frozen: impl Fn(usize) -> bool,
    flipped: &mut FlipSet,
) -> ComponentOutcome {
    flipped.clear();
    let mut syn: Syndrome = 0;
    let mut parity = 0u8;
    let n_inner = code.inner_len();
    for (i, &idx) in view.iter().enumerate() {
        let b = values[idx as usize] & 1;
        parity ^= b;
        if i < n_inner {
            syn ^= code.position_syndrome(i) & 0u64.wrapping_sub(b as u64);
        }
    }
    let out = code.decode_syndrome(syn, parity);
    match out.status {
        BddStatus::Codeword => ComponentOutcome::ZeroSyndrome,
        BddStatus::Failure => ComponentOutcome::Failure,
        BddStatus::Corrected => {
            if out.flips.iter().any(|&p| is_frozen(p as usize)) {
                return ComponentOutcome::AllMiscorrected;
            }
            for &p in &out.flips {
                values[view[p as usize] as usize] ^= 1;
            }
            flipped.extend_from_slice(&out.flips);
            ComponentOutcome::Accepted {
                flips: out.flips.len(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldSpec;
    use rand::SeedableRng;

    fn c15_5() -> BchCode {
        BchCode::new(FieldSpec::default_for(4).unwrap(), 3, 0, false).unwrap()
    }

    fn c15_7() -> BchCode {
        BchCode::new(FieldSpec::default_for(4).unwrap(), 2, 0, false).unwrap()
    }

    #[test]
    fn pair_counts() {
        assert_eq!(pattern_pairs(0, 3), 0);
        assert_eq!(pattern_pairs(1, 4), 1);
        assert_eq!(pattern_pairs(5, 3), 3);
        assert_eq!(pattern_pairs(2, 4), 2);
    }

    #[test]
    fn no_erasures_reduces_to_bdd() {
        let code = c15_7();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for w in 0u32..(1 << 15) {
            let bits: Vec<u8> = (0..15).map(|i| ((w >> i) & 1) as u8).collect();
            let direct = code.bdd_decode(&bits).unwrap();
            let (out, list) =
                eaed_candidates(&code, &TernaryWord::from_bits(&bits), 2, &mut rng).unwrap();
            match direct.status {
                BddStatus::Codeword => assert_eq!(out, EaedOutcome::ZeroSyndrome),
                BddStatus::Failure => assert_eq!(out, EaedOutcome::Failure),
                BddStatus::Corrected => {
                    assert_eq!(out, EaedOutcome::Candidates);
                    assert_eq!(list.len(), 1);
                    assert_eq!(list.candidates[0].flips, direct.flips);
                }
            }
        }
    }

    #[test]
    fn one_erasure_tries_both_fills() {
        let code = c15_7();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut y = TernaryWord::from_bits(&[0; 15]);
        y.erase(4);
        let (out, list) = eaed_candidates(&code, &y, 4, &mut rng).unwrap();
        assert_eq!(out, EaedOutcome::Candidates);
        assert_eq!(list.patterns, 2);
        // fill 0 is the zero codeword; fill 1 is one error away from it
        assert_eq!(list.len(), 1);
        assert_eq!(list.candidates[0].fill_value(0), 0);
        assert!(list.candidates[0].flips.is_empty());
    }

    #[test]
    fn five_erasures_three_pairs() {
        let code = c15_5();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut y = TernaryWord::from_bits(&[0; 15]);
        for p in [0, 3, 6, 9, 12] {
            y.erase(p);
        }
        let (_, list) = eaed_candidates(&code, &y, 3, &mut rng).unwrap();
        assert_eq!(list.patterns, 6);
        assert!(list.len() <= 6);
        assert!(list.candidates.windows(2).all(|w| w[0].distance() <= w[1].distance()));
    }

    #[test]
    fn two_erasures_exhaust_all_fillings() {
        // with J = E = 2 the four patterns are all of {0,1}^2
        let code = c15_7();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let mut y = TernaryWord::from_bits(&[0; 15]);
            y.erase(2);
            y.erase(11);
            let mut list = CandidateList::default();
            eaed_candidates_into(&code, &y.0, 2, &mut rng, &mut list);
            assert_eq!(list.patterns, 4);
        }
    }

    #[test]
    fn md_prefers_first_anchor_free_candidate() {
        let mut list = CandidateList::default();
        list.candidates.push(Candidate {
            flips: smallvec::smallvec![1, 2],
            fill: Bits::new(),
            pattern: 0,
        });
        list.candidates.push(Candidate {
            flips: smallvec::smallvec![5, 6],
            fill: Bits::new(),
            pattern: 1,
        });
        let drs = [0i16, 0, 9, 0, 0, 0, 0];
        assert_eq!(md_select(&list, &drs, &[NO_ANCHOR; 7]), MdOutcome::Accepted(0));
        assert_eq!(md_select(&list, &drs, &[4; 7]), MdOutcome::Accepted(1));
        let mut ta = [4; 7];
        ta[6] = PERMANENT_ANCHOR;
        assert_eq!(md_select(&list, &drs, &ta), MdOutcome::AllMiscorrected);
    }

    #[test]
    fn update_rules() {
        let mut list = CandidateList::default();
        list.erased = vec![3];
        list.candidates.push(Candidate {
            flips: smallvec::smallvec![0, 1, 2],
            fill: smallvec::smallvec![1],
            pattern: 0,
        });
        // zero syndrome at the top of the range stays clipped
        let mut w = TernaryWord::from_bits(&[0; 5]);
        let mut r = DrsRegister::filled(5, 31, 0, 31).unwrap();
        let out = apply_and_update(
            &mut LocalStorage { word: &mut w, drs: &mut r },
            &list,
            Decision::ZeroSyndrome,
        );
        assert_eq!(out, ComponentOutcome::ZeroSyndrome);
        assert!(r.scores().iter().all(|&s| s == 31));

        // all miscorrected: scores at c1 flips drop, bits unchanged
        let mut w = TernaryWord(vec![0, 1, 0, ERASED, 1]);
        let mut r = DrsRegister::filled(5, 10, 0, 31).unwrap();
        apply_and_update(
            &mut LocalStorage { word: &mut w, drs: &mut r },
            &list,
            Decision::AllMiscorrected,
        );
        assert_eq!(w.0, vec![0, 1, 0, ERASED, 1]);
        assert_eq!(r.scores(), &[9, 9, 9, 10, 10]);

        // accepted: flips written and decremented, erasure filled, no DRS change there
        apply_and_update(
            &mut LocalStorage { word: &mut w, drs: &mut r },
            &list,
            Decision::Accept(0),
        );
        assert_eq!(w.0, vec![1, 0, 1, 1, 1]);
        assert_eq!(r.scores(), &[8, 8, 8, 10, 10]);
    }

    #[test]
    fn ibdd_respects_frozen_positions() {
        let code = c15_7();
        let view: Vec<u32> = (0..15).collect();
        let mut vals = vec![0u8; 15];
        vals[3] = 1;
        let mut flipped = FlipSet::new();
        assert_eq!(
            ibdd_decode(&code, &view, &mut vals, |p| p == 3, &mut flipped),
            ComponentOutcome::AllMiscorrected
        );
        assert_eq!(vals[3], 1);
        assert!(flipped.is_empty());
        assert_eq!(
            ibdd_decode(&code, &view, &mut vals, |_| false, &mut flipped),
            ComponentOutcome::Accepted { flips: 1 }
        );
        assert_eq!(flipped.as_slice(), &[3]);
        assert!(vals.iter().all(|&v| v == 0));
    }
}
