//! Quick consistency checks run by the `selftest` command.

use std::collections::HashMap;

use crate::bch::{BchCode, BddStatus};
use crate::gf::FieldSpec;
use crate::ofec::{CodewordId, OfecLayout, HALF, MAX_GAP, MIN_GAP, ROW_BITS, SQUARE};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Compares bounded-distance decoding of every word of length n <= 20 with
/// a brute-force search for a codeword within distance t.
/// Returns (words checked, mismatches).
pub fn bch_exhaustive(code: &BchCode) -> (u64, u64) {
    let (n, k, t) = (code.n(), code.k(), code.t());
    assert!(n <= 20, "exhaustive check needs n <= 20");
    let to_word = |v: u32| (0..n).map(|i| ((v >> i) & 1) as u8).collect::<Vec<u8>>();
    let codewords: Vec<u32> = (0..1u32 << k)
        .map(|m| {
            let info: Vec<u8> = (0..k).map(|i| ((m >> i) & 1) as u8).collect();
            let c = code.encode(&info).expect("info length");
            c.iter().enumerate().fold(0, |a, (i, &b)| a | ((b as u32) << i))
        })
        .collect();
    let mut mismatches = 0;
    for w in 0..1u32 << n {
        let near = codewords.iter().find(|&&c| (c ^ w).count_ones() as usize <= t);
        let out = code.bdd_decode(&to_word(w)).expect("word length");
        let decoded = match out.status {
            BddStatus::Failure => None,
            _ => Some(out.flips.iter().fold(w, |a, &p| a ^ (1 << p))),
        };
        if decoded != near.copied() {
            mismatches += 1;
        }
    }
    (1 << n, mismatches)
}

/// Layout checks over codewords with backs in block rows 20..40: role slots
/// hit once, gaps within bounds, pairwise intersections of at most one bit.
pub fn ofec_layout(layout: &OfecLayout) -> Result<usize, String> {
    let mut slots: HashMap<(i64, usize, bool), u32> = HashMap::new();
    let mut owners: HashMap<(i64, usize), Vec<CodewordId>> = HashMap::new();
    for row in 20..40i64 {
        for r in 0..SQUARE {
            let cw = CodewordId { row, r };
            for p in 0..2 * HALF {
                let b = layout.codeword_bit(cw, p);
                let back = p >= HALF;
                let gap = row - b.row;
                if back && gap != 0 || !back && !(MIN_GAP as i64..=MAX_GAP as i64).contains(&gap) {
                    return Err(format!("position {p} of {cw:?} has gap {gap}"));
                }
                let ((bk, bp), (fr, fp)) = layout.bit_to_codewords(b);
                if (back && (bk, bp) != (cw, p)) || (!back && (fr, fp) != (cw, p)) {
                    return Err(format!("position {p} of {cw:?} does not map back"));
                }
                *slots.entry((b.row, b.offset(), back)).or_default() += 1;
                owners.entry((b.row, b.offset())).or_default().push(cw);
            }
        }
    }
    if slots.values().any(|&n| n != 1) || slots.len() != 2 * 20 * ROW_BITS {
        return Err("role slots are not covered exactly once".into());
    }
    let mut shared: HashMap<(CodewordId, CodewordId), u32> = HashMap::new();
    for cws in owners.values() {
        if let [a, b] = cws[..] {
            *shared.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    if shared.values().any(|&n| n > 1) {
        return Err("two codewords share more than one bit".into());
    }
    Ok(slots.len())
}

pub fn run() -> Vec<Check> {
    let mut out = Vec::new();
    for (t, label) in [(2, "[15,7]"), (3, "[15,5]")] {
        let code = BchCode::new(FieldSpec::default_for(4).expect("GF(16)"), t, 0, false)
            .expect("length-15 BCH code");
        let (n, bad) = bch_exhaustive(&code);
        out.push(Check {
            name: format!("bch {label} exhaustive decoding"),
            passed: bad == 0,
            detail: format!("{n} words, {bad} mismatches"),
        });
    }
    let layout = ofec_layout(&OfecLayout::identity());
    out.push(Check {
        name: "ofec layout".into(),
        passed: layout.is_ok(),
        detail: match layout {
            Ok(n) => format!("{n} role slots"),
            Err(e) => e,
        },
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn extended_code_agrees_with_search() {
        let code = BchCode::new(FieldSpec::default_for(4).unwrap(), 2, 0, true).unwrap();
        assert_eq!(bch_exhaustive(&code).1, 0);
    }
}
