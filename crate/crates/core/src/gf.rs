//! Arithmetic in binary extension fields GF(2^m), 2 <= m <= 16.
//!
//! Elements are stored as `u16` bit vectors in the polynomial basis. All
//! multiplications go through log/antilog tables built once at construction.

use crate::error::{Error, Result};

/// Field definition: extension degree and primitive polynomial (bit mask
/// including the x^m term).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldSpec {
    pub m: u32,
    pub primitive_polynomial: u32,
}

impl FieldSpec {
    pub const fn new(m: u32, primitive_polynomial: u32) -> Self {
        FieldSpec {
            m,
            primitive_polynomial,
        }
    }

    /// Conventional primitive polynomials for small fields.
    pub fn default_for(m: u32) -> Result<Self> {
        let poly = match m {
            2 => 0x7,
            3 => 0xB,
            4 => 0x13,
            5 => 0x25,
            6 => 0x43,
            7 => 0x89,
            8 => 0x11D,
            9 => 0x211,
            10 => 0x409,
            11 => 0x805,
            12 => 0x1053,
            13 => 0x201B,
            14 => 0x4443,
            15 => 0x8003,
            16 => 0x1100B,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "no default primitive polynomial for m = {m}"
                )))
            }
        };
        Ok(FieldSpec::new(m, poly))
    }
}

/// GF(2^m) with precomputed exponent and logarithm tables.
#[derive(Debug, Clone)]
pub struct GaloisField {
    spec: FieldSpec,
    order: usize,
    // exp has 2*order entries so that exp[log a + log b] needs no reduction.
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl GaloisField {
    /// Builds the tables, rejecting polynomials whose root does not have
    /// multiplicative order 2^m - 1.
    pub fn new(spec: FieldSpec) -> Result<Self> {
        let m = spec.m;
        if !(2..=16).contains(&m) {
            return Err(Error::InvalidParameter(format!("field degree m = {m}")));
        }
        let size = 1usize << m;
        let poly = spec.primitive_polynomial as usize;
        if poly >> m != 1 {
            return Err(Error::NotPrimitive {
                m,
                poly: spec.primitive_polynomial,
            });
        }
        let order = size - 1;
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; size];
        let mut x = 1usize;
        for (i, slot) in exp.iter_mut().take(order).enumerate() {
            if i > 0 && x == 1 {
                return Err(Error::NotPrimitive {
                    m,
                    poly: spec.primitive_polynomial,
                });
            }
            *slot = x as u16;
            log[x] = i as u16;
            x <<= 1;
            if x & size != 0 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(Error::NotPrimitive {
                m,
                poly: spec.primitive_polynomial,
            });
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(GaloisField {
            spec,
            order,
            exp,
            log,
        })
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn m(&self) -> u32 {
        self.spec.m
    }

    /// Multiplicative group order, 2^m - 1.
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    #[inline]
    pub fn inv(&self, a: u16) -> u16 {
        assert!(a != 0, "zero has no inverse");
        self.exp[(self.order - self.log[a as usize] as usize) % self.order]
    }

    #[inline]
    pub fn div(&self, a: u16, b: u16) -> u16 {
        self.mul(a, self.inv(b))
    }

    /// alpha^e for any (possibly negative) exponent.
    #[inline]
    pub fn alpha_pow(&self, e: i64) -> u16 {
        self.exp[e.rem_euclid(self.order as i64) as usize]
    }

    /// Discrete logarithm base alpha; `None` for zero.
    #[inline]
    pub fn log(&self, a: u16) -> Option<usize> {
        (a != 0).then(|| self.log[a as usize] as usize)
    }

    pub fn pow(&self, a: u16, e: u64) -> u16 {
        if e == 0 {
            return 1;
        }
        match self.log(a) {
            None => 0,
            Some(l) => self.exp[((l as u64 * (e % self.order as u64)) % self.order as u64) as usize],
        }
    }

    #[inline]
    pub fn square(&self, a: u16) -> u16 {
        self.mul(a, a)
    }

    /// The unique square root (squaring is a bijection in characteristic 2).
    pub fn sqrt(&self, a: u16) -> u16 {
        match self.log(a) {
            None => 0,
            Some(l) => {
                let half = if l % 2 == 0 { l / 2 } else { (l + self.order) / 2 };
                self.exp[half]
            }
        }
    }
}
