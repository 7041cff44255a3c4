//! Primitive integer pairs `[p:q]` labelling the complementary regions of
//! the tree of superbases, i.e. the vertices of the Farey tessellation.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// A primitive pair `(p, q)` up to sign, stored with `q > 0`, or `p = 1`
/// when `q = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fraction {
    p: BigInt,
    q: BigInt,
}

/// Reduction modulo 2 of a primitive class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    /// `p` and `q` both odd ("totally odd"); the region carries a real trace.
    RealRegion,
    /// `p` odd, `q` even.
    ImaginaryRegionX,
    /// `p` even, `q` odd.
    ImaginaryRegionY,
}

impl Fraction {
    /// Reduces `(p, q)` to canonical primitive form; `None` for `(0, 0)`.
    pub fn new(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Option<Self> {
        let (mut p, mut q) = (p.into(), q.into());
        if p.is_zero() && q.is_zero() {
            return None;
        }
        let g = p.gcd(&q);
        p /= &g;
        q /= &g;
        if q.is_negative() || (q.is_zero() && p.is_negative()) {
            p = -p;
            q = -q;
        }
        Some(Self { p, q })
    }

    pub fn infinity() -> Self {
        Self { p: BigInt::one(), q: BigInt::zero() }
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    /// `(p, q)` as machine integers when they fit.
    pub fn to_i64_pair(&self) -> Option<(i64, i64)> {
        use num_traits::ToPrimitive;
        Some((self.p.to_i64()?, self.q.to_i64()?))
    }

    pub fn parity(&self) -> Parity {
        match (self.p.is_odd(), self.q.is_odd()) {
            (true, true) => Parity::RealRegion,
            (true, false) => Parity::ImaginaryRegionX,
            (false, true) => Parity::ImaginaryRegionY,
            (false, false) => unreachable!("primitive pair with both entries even"),
        }
    }

    /// `p·q' - q·p'`.
    pub fn det(&self, other: &Fraction) -> BigInt {
        &self.p * &other.q - &self.q * &other.p
    }

    /// True when the pair spans a Farey edge (`|det| = 1`).
    pub fn is_farey_neighbor(&self, other: &Fraction) -> bool {
        self.det(other).abs().is_one()
    }

    /// Reflection of `w` across the Farey edge `{u, v}`: of the two
    /// primitive classes `u + v` and `u - v`, the one that is not `w`.
    pub fn flip(u: &Fraction, v: &Fraction, w: &Fraction) -> Fraction {
        let sum = Fraction::new(&u.p + &v.p, &u.q + &v.q).expect("Farey neighbors are independent");
        if &sum == w {
            Fraction::new(&u.p - &v.p, &u.q - &v.q).expect("Farey neighbors are independent")
        } else {
            sum
        }
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        if self.q.is_zero() {
            f64::INFINITY
        } else {
            // ratio of big integers via rational to avoid overflow
            num_rational::BigRational::new(self.p.clone(), self.q.clone())
                .to_f64()
                .unwrap_or(f64::NAN)
        }
    }

    /// Regular continued fraction `[a0; a1, a2, ...]` of `p/q`, `None` for ∞.
    pub fn continued_fraction(&self) -> Option<Vec<BigInt>> {
        if self.q.is_zero() {
            return None;
        }
        let (mut a, mut b) = (self.p.clone(), self.q.clone());
        let mut out = Vec::new();
        while !b.is_zero() {
            let (quot, rem) = a.div_mod_floor(&b);
            out.push(quot);
            a = b;
            b = rem;
        }
        Some(out)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl Serialize for Fraction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let (p, q) = s
            .split_once('/')
            .ok_or_else(|| serde::de::Error::custom(format!("expected p/q, got {s:?}")))?;
        let p: BigInt = p.trim().parse().map_err(serde::de::Error::custom)?;
        let q: BigInt = q.trim().parse().map_err(serde::de::Error::custom)?;
        Fraction::new(p, q).ok_or_else(|| serde::de::Error::custom("0/0 is not a class"))
    }
}
