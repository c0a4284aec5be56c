//! Binary BCH component codes: systematic encoding and bounded-distance
//! decoding, with optional shortening and a single overall-parity extension.
//!
//! Word layout: position `i` in `0..n_inner` carries the coefficient of
//! x^(n_inner - 1 - i), so information bits come first and the `n - k` parity
//! bits occupy the tail. Shortened positions are the highest-degree
//! coefficients and are not stored. When extended, position `n_inner` holds
//! the overall parity bit.

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::gf::{FieldSpec, GaloisField};

/// Odd-indexed syndromes S1, S3, ..., S(2t-1) packed m bits apiece.
pub type Syndrome = u64;

/// Positions flipped by a decoder, ascending.
pub type FlipSet = SmallVec<[u16; 4]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BddStatus {
    /// The input already was a codeword.
    Codeword,
    Corrected,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BddOutcome {
    pub status: BddStatus,
    pub flips: FlipSet,
}

impl BddOutcome {
    fn codeword() -> Self {
        BddOutcome {
            status: BddStatus::Codeword,
            flips: FlipSet::new(),
        }
    }

    fn failure() -> Self {
        BddOutcome {
            status: BddStatus::Failure,
            flips: FlipSet::new(),
        }
    }

    pub fn is_failure(&self) -> bool {
        self.status == BddStatus::Failure
    }
}

#[derive(Debug, Clone)]
pub struct BchCode {
    field: GaloisField,
    t: usize,
    shortening: usize,
    extended: bool,
    n_inner: usize,
    n: usize,
    k: usize,
    generator: u128,
    parity_len: usize,
    syn_table: Vec<Syndrome>,
    roots: RootTables,
}

const MAX_T: usize = 8;
const NO_ROOT: u16 = u16::MAX;

// Lookup tables for the roots of low-degree locator polynomials.
#[derive(Debug, Clone)]
struct RootTables {
    // one root y of y^2 + y = c, or NO_ROOT
    quadratic: Vec<u16>,
    // all roots u of u^3 + u = c (count, roots)
    depressed_cubic: Vec<(u8, [u16; 3])>,
    // all roots w of w^3 = c
    cube: Vec<(u8, [u16; 3])>,
}

impl RootTables {
    fn new(f: &GaloisField, t: usize) -> Self {
        let size = f.order() + 1;
        let mut quadratic = vec![NO_ROOT; size];
        for y in 0..size as u16 {
            quadratic[(f.square(y) ^ y) as usize] = y;
        }
        let (mut depressed_cubic, mut cube) = (Vec::new(), Vec::new());
        if t >= 3 {
            depressed_cubic = vec![(0u8, [0u16; 3]); size];
            cube = vec![(0u8, [0u16; 3]); size];
            for u in 0..size as u16 {
                let u3 = f.mul(u, f.square(u));
                for (table, c) in [(&mut depressed_cubic, u3 ^ u), (&mut cube, u3)] {
                    let e = &mut table[c as usize];
                    if (e.0 as usize) < 3 {
                        e.1[e.0 as usize] = u;
                    }
                    e.0 += 1;
                }
            }
        }
        RootTables {
            quadratic,
            depressed_cubic,
            cube,
        }
    }
}

impl BchCode {
    /// Narrow-sense binary BCH code of designed radius `t` over `field`.
    pub fn new(field: FieldSpec, t: usize, shortening: usize, extended: bool) -> Result<Self> {
        let field = GaloisField::new(field)?;
        let m = field.m() as usize;
        if t == 0 || t > MAX_T || m * t > 64 {
            return Err(Error::InvalidCode(format!("t = {t} unsupported for m = {m}")));
        }
        let generator = generator_polynomial(&field, t);
        let parity_len = 127 - generator.leading_zeros() as usize;
        let full = field.order();
        if parity_len >= full || shortening + parity_len >= full {
            return Err(Error::InvalidCode(format!(
                "generator degree {parity_len} and shortening {shortening} leave no information bits"
            )));
        }
        let n_inner = full - shortening;
        let k = n_inner - parity_len;
        let n = n_inner + extended as usize;

        let syn_table = (0..n_inner)
            .map(|i| {
                let deg = (n_inner - 1 - i) as i64;
                pack_odd_syndromes(&field, t, |j| field.alpha_pow(deg * j as i64))
            })
            .collect();

        let roots = RootTables::new(&field, t);
        Ok(BchCode {
            field,
            t,
            shortening,
            extended,
            n_inner,
            n,
            k,
            generator,
            parity_len,
            syn_table,
            roots,
        })
    }

    /// 1-bit shortened [255,231] t=3 code, i.e. [254,230].
    pub fn staircase_default() -> Self {
        BchCode::new(FieldSpec::default_for(8).unwrap(), 3, 1, false).unwrap()
    }

    /// Singly extended [256,239] t=2 code.
    pub fn ofec_default() -> Self {
        BchCode::new(FieldSpec::default_for(8).unwrap(), 2, 0, true).unwrap()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn shortening(&self) -> usize {
        self.shortening
    }

    pub fn is_extended(&self) -> bool {
        self.extended
    }

    /// Length of the BCH part (excluding the extension bit).
    pub fn inner_len(&self) -> usize {
        self.n_inner
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    /// Generator polynomial, bit j = coefficient of x^j.
    pub fn generator(&self) -> u128 {
        self.generator
    }

    /// Number of parity bits including the extension bit.
    pub fn redundancy(&self) -> usize {
        self.n - self.k
    }

    /// Systematic encoding: `info` lands verbatim in positions `0..k`.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        let mut out = vec![0u8; self.n];
        self.encode_into(info, &mut out)?;
        Ok(out)
    }

    pub fn encode_into(&self, info: &[u8], out: &mut [u8]) -> Result<()> {
        if info.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                actual: info.len(),
            });
        }
        if out.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: out.len(),
            });
        }
        out[..self.k].copy_from_slice(info);
        let parity = self.parity_of(info);
        for (i, slot) in out[self.k..self.n_inner].iter_mut().enumerate() {
            *slot = ((parity >> (self.parity_len - 1 - i)) & 1) as u8;
        }
        if self.extended {
            out[self.n_inner] = out[..self.n_inner].iter().fold(0, |a, &b| a ^ (b & 1));
        }
        Ok(())
    }

    /// Remainder of info(x) * x^(n-k) modulo the generator.
    fn parity_of(&self, info: &[u8]) -> u128 {
        let r = self.parity_len;
        let low = self.generator & !(1u128 << r);
        let top = 1u128 << (r - 1);
        let mask = (1u128 << r) - 1;
        let mut reg = 0u128;
        for &b in info {
            let fb = (b & 1 != 0) ^ (reg & top != 0);
            reg = (reg << 1) & mask;
            if fb {
                reg ^= low;
            }
        }
        reg
    }

    /// Contribution of a single set bit at `pos` to the syndrome; zero for the
    /// extension bit.
    #[inline]
    pub fn position_syndrome(&self, pos: usize) -> Syndrome {
        if pos < self.n_inner {
            self.syn_table[pos]
        } else {
            0
        }
    }

    /// Syndrome of a word. Only the low bit of each entry is read, so the
    /// erasure marker behaves as 0.
    pub fn syndrome(&self, word: &[u8]) -> Syndrome {
        word[..self.n_inner]
            .iter()
            .zip(&self.syn_table)
            .fold(0, |s, (&b, &row)| s ^ (row & 0u64.wrapping_sub((b & 1) as u64)))
    }

    /// XOR of all `n` bits. Only meaningful for extended codes.
    pub fn extended_parity_check(&self, word: &[u8]) -> Result<u8> {
        if !self.extended {
            return Err(Error::InvalidParameter("code is not extended".into()));
        }
        if word.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: word.len(),
            });
        }
        Ok(word.iter().fold(0, |a, &b| a ^ (b & 1)))
    }

    pub fn is_codeword(&self, word: &[u8]) -> bool {
        self.syndrome(word) == 0
            && (!self.extended || word.iter().fold(0, |a, &b| a ^ (b & 1)) == 0)
    }

    /// Bounded-distance decoding of a hard-decision word.
    pub fn bdd_decode(&self, word: &[u8]) -> Result<BddOutcome> {
        if word.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: word.len(),
            });
        }
        let parity = if self.extended {
            word.iter().fold(0, |a, &b| a ^ (b & 1))
        } else {
            0
        };
        Ok(self.decode_syndrome(self.syndrome(word), parity))
    }

    /// Bounded-distance decoding from a syndrome and, for extended codes, the
    /// overall parity of the word.
    pub fn decode_syndrome(&self, syn: Syndrome, parity: u8) -> BddOutcome {
        let ext = self.n_inner as u16;
        if syn == 0 {
            if self.extended && parity & 1 == 1 {
                return BddOutcome {
                    status: BddStatus::Corrected,
                    flips: smallvec::smallvec![ext],
                };
            }
            return BddOutcome::codeword();
        }
        let mut flips = match self.locate(syn) {
            Some(f) => f,
            None => return BddOutcome::failure(),
        };
        if self.extended && (parity ^ (flips.len() as u8)) & 1 == 1 {
            if flips.len() < self.t {
                flips.push(ext);
            } else {
                return BddOutcome::failure();
            }
        }
        BddOutcome {
            status: BddStatus::Corrected,
            flips,
        }
    }

    /// Error positions for a nonzero syndrome, or `None` when more than `t`
    /// errors (or errors in shortened positions) are indicated.
    fn locate(&self, syn: Syndrome) -> Option<FlipSet> {
        let f = &self.field;
        let m = f.m();
        let mask = (1u64 << m) - 1;
        let t = self.t;

        // S[0] = S1 .. S[2t-1] = S2t
        let mut s = [0u16; 2 * MAX_T];
        for j in 0..t {
            s[2 * j] = ((syn >> (m as usize * j)) & mask) as u16;
        }
        for i in 1..=t {
            // S_{2i} = S_i^2
            s[2 * i - 1] = f.square(s[i - 1]);
        }

        // Single error shortcut: S_j = S1^j for all j.
        let s1 = s[0];
        if s1 != 0 && (1..2 * t).all(|j| s[j] == f.pow(s1, j as u64 + 1)) {
            let deg = f.log(s1)?;
            if deg >= self.n_inner {
                return None;
            }
            return Some(smallvec::smallvec![(self.n_inner - 1 - deg) as u16]);
        }

        let lambda = berlekamp_massey(f, &s[..2 * t]);
        let mut out = FlipSet::new();
        let nu = lambda.iter().rposition(|&c| c != 0).unwrap_or(0);
        if nu == 0 || nu > t {
            return None;
        }

        let locators = match nu {
            2 => self.quadratic_roots(lambda[1], lambda[2]),
            3 => self.cubic_roots(lambda[1], lambda[2], lambda[3]),
            _ => None,
        };
        if let Some(xs) = locators {
            // roots of z^nu + l1 z^(nu-1) + ... are the locators alpha^deg
            for x in xs.into_iter().take(nu) {
                let deg = f.log(x)?;
                if deg >= self.n_inner {
                    return None;
                }
                out.push((self.n_inner - 1 - deg) as u16);
            }
            out.sort_unstable();
            if out.windows(2).any(|w| w[0] == w[1]) {
                return None;
            }
            return Some(out);
        }
        if nu <= 3 {
            return None;
        }

        // Chien search over stored positions: error at degree d iff
        // Lambda(alpha^-d) = 0. Term k is tracked as the log of
        // lambda_k alpha^(-d k).
        let order = f.order();
        let mut terms: SmallVec<[(usize, usize); MAX_T]> = (1..=nu)
            .filter_map(|k| f.log(lambda[k]).map(|l| (k, l)))
            .collect();
        for deg in 0..self.n_inner {
            let mut acc = lambda[0];
            for (k, l) in terms.iter_mut() {
                acc ^= f.alpha_pow(*l as i64);
                *l = if *l >= *k { *l - *k } else { *l + order - *k };
            }
            if acc == 0 {
                out.push((self.n_inner - 1 - deg) as u16);
                if out.len() == nu {
                    break;
                }
            }
        }
        if out.len() != nu {
            return None;
        }
        out.sort_unstable();
        Some(out)
    }

    // Distinct roots of z^2 + l1 z + l2 via z = l1 y, y^2 + y = l2 / l1^2.
    fn quadratic_roots(&self, l1: u16, l2: u16) -> Option<SmallVec<[u16; 3]>> {
        let f = &self.field;
        if l1 == 0 || l2 == 0 {
            return None;
        }
        let y = self.roots.quadratic[f.div(l2, f.square(l1)) as usize];
        if y == NO_ROOT {
            return None;
        }
        Some(smallvec::smallvec![f.mul(l1, y), f.mul(l1, y ^ 1)])
    }

    // Distinct roots of z^3 + l1 z^2 + l2 z + l3. With z = w + l1 this is
    // w^3 + a w + b, a = l1^2 + l2, b = l1 l2 + l3; for a != 0, w = sqrt(a) u
    // gives u^3 + u = b / sqrt(a)^3.
    fn cubic_roots(&self, l1: u16, l2: u16, l3: u16) -> Option<SmallVec<[u16; 3]>> {
        let f = &self.field;
        if l3 == 0 {
            return None;
        }
        let a = f.square(l1) ^ l2;
        let b = f.mul(l1, l2) ^ l3;
        let (count, ws) = if a == 0 {
            self.roots.cube[b as usize]
        } else {
            let sa = f.sqrt(a);
            let s3 = f.mul(sa, a);
            let (count, us) = self.roots.depressed_cubic[f.div(b, s3) as usize];
            (count, us.map(|u| f.mul(sa, u)))
        };
        if count != 3 {
            return None;
        }
        Some(ws.iter().map(|&w| w ^ l1).collect())
    }
}

fn pack_odd_syndromes(field: &GaloisField, t: usize, eval: impl Fn(usize) -> u16) -> Syndrome {
    let m = field.m() as usize;
    (0..t).fold(0u64, |acc, j| acc | (eval(2 * j + 1) as u64) << (m * j))
}

/// Error-locator polynomial (coefficients lowest degree first).
fn berlekamp_massey(f: &GaloisField, s: &[u16]) -> [u16; 2 * MAX_T + 1] {
    let mut c = [0u16; 2 * MAX_T + 1];
    let mut b = [0u16; 2 * MAX_T + 1];
    c[0] = 1;
    b[0] = 1;
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut last_d = 1u16;
    for n in 0..s.len() {
        let mut d = s[n];
        for i in 1..=l {
            d ^= f.mul(c[i], s[n - i]);
        }
        if d == 0 {
            shift += 1;
            continue;
        }
        let coef = f.div(d, last_d);
        let prev = c;
        for i in 0..c.len() - shift {
            c[i + shift] ^= f.mul(coef, b[i]);
        }
        if 2 * l <= n {
            l = n + 1 - l;
            b = prev;
            last_d = d;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    c
}

/// Product of the distinct minimal polynomials of alpha, alpha^3, ..., alpha^(2t-1).
fn generator_polynomial(field: &GaloisField, t: usize) -> u128 {
    let order = field.order();
    let mut seen = vec![false; order];
    let mut g: u128 = 1;
    for e in (1..2 * t).step_by(2) {
        let e = e % order;
        if seen[e] {
            continue;
        }
        // cyclotomic coset of e
        let mut coset = Vec::new();
        let mut x = e;
        while !seen[x] {
            seen[x] = true;
            coset.push(x);
            x = (2 * x) % order;
        }
        // prod (x + alpha^c) with GF(2^m) coefficients, lowest degree first
        let mut poly = vec![1u16];
        for &c in &coset {
            let root = field.alpha_pow(c as i64);
            let mut next = vec![0u16; poly.len() + 1];
            for (i, &a) in poly.iter().enumerate() {
                next[i + 1] ^= a;
                next[i] ^= field.mul(a, root);
            }
            poly = next;
        }
        let minimal = poly.iter().enumerate().fold(0u128, |acc, (i, &a)| {
            debug_assert!(a <= 1, "minimal polynomial must be binary");
            acc | ((a as u128) << i)
        });
        g = clmul(g, minimal);
    }
    g
}

fn clmul(a: u128, b: u128) -> u128 {
    let mut out = 0u128;
    for i in 0..128 {
        if (b >> i) & 1 == 1 {
            out ^= a << i;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn code(m: u32, t: usize, s: usize, ext: bool) -> BchCode {
        BchCode::new(FieldSpec::default_for(m).unwrap(), t, s, ext).unwrap()
    }

    // GF(2) polynomial multiplication by schoolbook on coefficient vectors.
    fn poly_mul(a: &[u8], b: &[u8]) -> Vec<u8> {
        let mut out = vec![0u8; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] ^= x & y;
            }
        }
        out
    }

    #[test]
    fn dimensions_of_production_codes() {
        let sc = BchCode::staircase_default();
        assert_eq!((sc.n(), sc.k(), sc.t()), (254, 230, 3));
        // [255,231] has 24 parity bits
        assert_eq!(sc.n() - sc.k(), 24);
        let of = BchCode::ofec_default();
        assert_eq!((of.n(), of.k(), of.t()), (256, 239, 2));
        assert_eq!(of.redundancy(), 17);
    }

    #[test]
    fn generator_15_7_is_product_of_minimal_polynomials() {
        // GF(16) with x^4+x+1: M1 = x^4+x+1, M3 = x^4+x^3+x^2+x+1
        let m1 = [1, 1, 0, 0, 1];
        let m3 = [1, 1, 1, 1, 1];
        let expect = poly_mul(&m1, &m3);
        let c = code(4, 2, 0, false);
        let g = c.generator();
        let got: Vec<u8> = (0..expect.len()).map(|i| ((g >> i) & 1) as u8).collect();
        assert_eq!(got, expect);
        assert_eq!(c.k(), 7);
        assert_eq!(code(4, 3, 0, false).k(), 5);
    }

    #[test]
    fn zero_info_gives_zero_codeword() {
        let c = BchCode::staircase_default();
        let cw = c.encode(&vec![0; c.k()]).unwrap();
        assert!(cw.iter().all(|&b| b == 0));
    }

    #[test]
    fn encode_rejects_bad_length() {
        let c = code(4, 2, 0, false);
        assert!(matches!(
            c.encode(&[0; 6]),
            Err(Error::LengthMismatch { expected: 7, actual: 6 })
        ));
    }

    #[test]
    fn codewords_have_zero_syndrome_and_even_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for c in [BchCode::staircase_default(), BchCode::ofec_default(), code(4, 2, 1, true)] {
            for _ in 0..50 {
                let info: Vec<u8> = (0..c.k()).map(|_| rng.gen_range(0..2)).collect();
                let cw = c.encode(&info).unwrap();
                assert_eq!(&cw[..c.k()], &info[..]);
                assert_eq!(c.syndrome(&cw), 0);
                if c.is_extended() {
                    assert_eq!(c.extended_parity_check(&cw).unwrap(), 0);
                }
                let out = c.bdd_decode(&cw).unwrap();
                assert_eq!(out.status, BddStatus::Codeword);
                assert!(out.flips.is_empty());
            }
        }
    }

    #[test]
    fn extended_parity_examples() {
        let c = BchCode::ofec_default();
        assert_eq!(c.extended_parity_check(&vec![0; 256]).unwrap(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let info: Vec<u8> = (0..c.k()).map(|_| rng.gen_range(0..2)).collect();
        let mut cw = c.encode(&info).unwrap();
        cw[17] ^= 1;
        assert_eq!(c.extended_parity_check(&cw).unwrap(), 1);
        cw[200] ^= 1;
        assert_eq!(c.extended_parity_check(&cw).unwrap(), 0);
        assert!(BchCode::staircase_default()
            .extended_parity_check(&[0; 254])
            .is_err());
    }

    #[test]
    fn corrects_up_to_t_errors_at_m8() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for c in [BchCode::staircase_default(), BchCode::ofec_default()] {
            for _ in 0..300 {
                let info: Vec<u8> = (0..c.k()).map(|_| rng.gen_range(0..2)).collect();
                let cw = c.encode(&info).unwrap();
                let e = rng.gen_range(1..=c.t());
                let mut pos: Vec<u16> = rand::seq::index::sample(&mut rng, c.n(), e)
                    .into_iter()
                    .map(|p| p as u16)
                    .collect();
                pos.sort_unstable();
                let mut w = cw.clone();
                for &p in &pos {
                    w[p as usize] ^= 1;
                }
                let out = c.bdd_decode(&w).unwrap();
                assert_eq!(out.status, BddStatus::Corrected);
                assert_eq!(out.flips.as_slice(), pos.as_slice());
            }
        }
    }

    #[test]
    fn extended_code_fails_on_t_plus_one_errors() {
        let c = BchCode::ofec_default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let mut w = vec![0u8; 256];
            for p in rand::seq::index::sample(&mut rng, 256, 3) {
                w[p] = 1;
            }
            // d_min = 6 so 3 errors are never within radius 2 of a codeword
            assert!(c.bdd_decode(&w).unwrap().is_failure());
        }
    }

    #[test]
    fn shortened_positions_never_flipped() {
        // [15,7] shortened by 3 -> [12,4]; any decoded flip must be stored.
        let c = code(4, 2, 3, false);
        for w in 0u32..(1 << c.n()) {
            let word: Vec<u8> = (0..c.n()).map(|i| ((w >> i) & 1) as u8).collect();
            let out = c.bdd_decode(&word).unwrap();
            assert!(out.flips.iter().all(|&p| (p as usize) < c.n()));
            if out.status != BddStatus::Failure {
                let mut fixed = word.clone();
                for &p in &out.flips {
                    fixed[p as usize] ^= 1;
                }
                assert!(c.is_codeword(&fixed));
            }
        }
    }

    // Every error pattern of weight <= 3 whose syndrome matches, found by
    // meeting single-position syndromes against pairs.
    fn syndrome_matches(c: &BchCode, syn: Syndrome) -> Vec<Vec<u16>> {
        let n = c.inner_len();
        let single: std::collections::HashMap<Syndrome, u16> =
            (0..n).map(|p| (c.position_syndrome(p), p as u16)).collect();
        let mut found = Vec::new();
        if syn == 0 {
            return vec![vec![]];
        }
        if let Some(&p) = single.get(&syn) {
            found.push(vec![p]);
        }
        for i in 0..n {
            for j in i + 1..n {
                let s2 = c.position_syndrome(i) ^ c.position_syndrome(j);
                if s2 == syn {
                    found.push(vec![i as u16, j as u16]);
                }
                if c.t() >= 3 {
                    if let Some(&k) = single.get(&(syn ^ s2)) {
                        if k as usize > j {
                            found.push(vec![i as u16, j as u16, k]);
                        }
                    }
                }
            }
        }
        found.retain(|f| f.len() <= c.t());
        found
    }

    #[test]
    fn root_finding_matches_exhaustive_search_at_m8() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let c = BchCode::new(FieldSpec::default_for(8).unwrap(), 3, 1, false).unwrap();
        for trial in 0..150 {
            let weight = 2 + trial % 6;
            let mut w = vec![0u8; c.n()];
            for p in rand::seq::index::sample(&mut rng, c.n(), weight) {
                w[p] = 1;
            }
            let out = c.bdd_decode(&w).unwrap();
            let matches = syndrome_matches(&c, c.syndrome(&w));
            assert!(matches.len() <= 1);
            match matches.first() {
                Some(f) => assert_eq!(out.flips.as_slice(), f.as_slice()),
                None => assert!(out.is_failure()),
            }
        }
    }
}
