//! Arithmetic in Z/p^m together with the unit filtration U_i = 1 + p^i Z and,
//! for p = 2, the shifted filtration -U_v.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A filtration level: a non-negative integer or +∞ (ordered above every integer).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    Finite(u32),
    Infinite,
}

impl Level {
    pub fn finite(self) -> Option<u32> {
        match self {
            Level::Finite(v) => Some(v),
            Level::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Level::Infinite)
    }
}

impl From<u32> for Level {
    fn from(v: u32) -> Self {
        Level::Finite(v)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Finite(v) => write!(f, "{v}"),
            Level::Infinite => write!(f, "inf"),
        }
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut k = 2u64;
    while k.saturating_mul(k) <= p {
        if p % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// The coefficient ring Z/p^m.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RingCtx {
    p: u64,
    m: u32,
    modulus: u64,
}

impl RingCtx {
    pub fn new(p: u64, m: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if m == 0 {
            return Err(Error::InvalidArgument("exponent m must be at least 1".into()));
        }
        let modulus = p.checked_pow(m).ok_or(Error::ModulusOverflow { p, m })?;
        // products are formed in u128, so any 64-bit modulus is fine
        Ok(RingCtx { p, m, modulus })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn m(&self) -> u32 {
        self.m
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// p^e reduced modulo p^m (zero once e >= m).
    #[inline]
    pub fn p_pow(&self, e: u32) -> u64 {
        if e >= self.m {
            0
        } else {
            self.p.pow(e)
        }
    }

    /// The same prime with a different exponent.
    pub fn with_m(&self, m: u32) -> Result<Self> {
        RingCtx::new(self.p, m)
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.modulus
    }

    pub fn reduce_i64(&self, x: i64) -> u64 {
        (x as i128).rem_euclid(self.modulus as i128) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        (s % self.modulus as u128) as u64
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.modulus - (b - a)
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.modulus;
        base %= self.modulus;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// p-adic valuation of a canonical representative; `Infinite` for zero.
    pub fn val(&self, x: u64) -> Level {
        let mut x = x % self.modulus;
        if x == 0 {
            return Level::Infinite;
        }
        let mut v = 0;
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        Level::Finite(v)
    }

    /// Valuation as an integer, saturating at m for zero.
    #[inline]
    pub fn val_sat(&self, x: u64) -> u32 {
        match self.val(x) {
            Level::Finite(v) => v,
            Level::Infinite => self.m,
        }
    }

    pub fn is_unit(&self, x: u64) -> bool {
        x % self.p != 0
    }

    /// Inverse of a unit; `None` when x is divisible by p.
    pub fn inv(&self, x: u64) -> Option<u64> {
        if !self.is_unit(x) {
            return None;
        }
        let (mut r0, mut r1) = (self.modulus as i128, (x % self.modulus) as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Some(t0.rem_euclid(self.modulus as i128) as u64)
    }

    /// Splits a nonzero x as p^e * u with u a unit.
    pub fn split_unit(&self, x: u64) -> Option<(u32, u64)> {
        let mut x = x % self.modulus;
        if x == 0 {
            return None;
        }
        let mut e = 0;
        while x % self.p == 0 {
            x /= self.p;
            e += 1;
        }
        Some((e, x))
    }

    pub fn residue(&self, value: u64) -> Residue {
        Residue { ctx: *self, value: value % self.modulus }
    }

    pub fn residue_i64(&self, value: i64) -> Residue {
        Residue { ctx: *self, value: self.reduce_i64(value) }
    }
}

/// An element of Z/p^m stored by its canonical representative in [0, p^m).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Residue {
    ctx: RingCtx,
    value: u64,
}

impl Residue {
    pub fn ctx(&self) -> RingCtx {
        self.ctx
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn pow(&self, exp: u64) -> Residue {
        Residue { ctx: self.ctx, value: self.ctx.pow(self.value, exp) }
    }

    pub fn val_p(&self) -> Level {
        self.ctx.val(self.value)
    }

    pub fn is_one(&self) -> bool {
        self.value == 1 % self.ctx.modulus
    }

    /// Membership in U_i, decided modulo p^min(i, m).
    pub fn in_u(&self, level: Level) -> bool {
        match level {
            Level::Infinite => self.is_one(),
            Level::Finite(i) => {
                let k = i.min(self.ctx.m);
                let q = self.ctx.p.pow(k);
                (self.value % q) == 1 % q
            }
        }
    }

    /// Membership in -U_v (p = 2 only), decided modulo 2^min(v, m).
    pub fn in_minus_u(&self, level: Level) -> Result<bool> {
        if self.ctx.p != 2 {
            return Err(Error::InvalidArgument("-U_v is only defined here for p = 2".into()));
        }
        let plus_one = Residue { ctx: self.ctx, value: self.ctx.add(self.value, 1) };
        Ok(match level {
            Level::Infinite => plus_one.value == 0,
            Level::Finite(v) => {
                let k = v.min(self.ctx.m);
                plus_one.value % (1u64 << k) == 0
            }
        })
    }

    /// The largest level i with x in U_i (U_0 is everything).
    pub fn u_level(&self) -> Level {
        if self.is_one() {
            return Level::Infinite;
        }
        match self.ctx.val(self.ctx.sub(self.value, 1)) {
            Level::Finite(v) => Level::Finite(v),
            Level::Infinite => Level::Infinite,
        }
    }

    /// For p = 2: the largest v with x in -U_v; `Infinite` when x = -1.
    pub fn minus_u_level(&self) -> Result<Level> {
        if self.ctx.p != 2 {
            return Err(Error::InvalidArgument("-U_v is only defined here for p = 2".into()));
        }
        Ok(self.ctx.val(self.ctx.add(self.value, 1)))
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.ctx.modulus)
    }
}

impl Add for Residue {
    type Output = Residue;
    fn add(self, rhs: Residue) -> Residue {
        assert_eq!(self.ctx, rhs.ctx, "residues from different rings");
        Residue { ctx: self.ctx, value: self.ctx.add(self.value, rhs.value) }
    }
}

impl Sub for Residue {
    type Output = Residue;
    fn sub(self, rhs: Residue) -> Residue {
        assert_eq!(self.ctx, rhs.ctx, "residues from different rings");
        Residue { ctx: self.ctx, value: self.ctx.sub(self.value, rhs.value) }
    }
}

impl Mul for Residue {
    type Output = Residue;
    fn mul(self, rhs: Residue) -> Residue {
        assert_eq!(self.ctx, rhs.ctx, "residues from different rings");
        Residue { ctx: self.ctx, value: self.ctx.mul(self.value, rhs.value) }
    }
}

impl Neg for Residue {
    type Output = Residue;
    fn neg(self) -> Residue {
        Residue { ctx: self.ctx, value: self.ctx.neg(self.value) }
    }
}

/// The class of d^{p^j} guaranteed by the power law for the unit filtration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerClass {
    /// In U_level but not in U_{level+1}.
    InUExact(u32),
    /// Equal to 1.
    ExactlyOne,
    /// In U_level.
    InU(u32),
}

impl PowerClass {
    /// Whether `x` (taken modulo p^m) is consistent with this class.
    pub fn contains(&self, x: Residue) -> bool {
        match *self {
            PowerClass::ExactlyOne => x.is_one(),
            PowerClass::InU(l) => x.in_u(Level::Finite(l)),
            PowerClass::InUExact(l) => {
                // U_{l+1} is only visible modulo p^m when l < m
                x.in_u(Level::Finite(l)) && (l >= x.ctx().m() || !x.in_u(Level::Finite(l + 1)))
            }
        }
    }
}

/// Class of d^{p^j} for d in U_i.
///
/// For p = 2, i = 1, j > 0 the case split is on -U_v. A unit that is in fact in
/// U_2 is not in any -U_v with v >= 2, and is classified through U_2 instead.
pub fn pow_class(d: Residue, i: u32, j: u32) -> Result<PowerClass> {
    let ctx = d.ctx();
    if i == 0 {
        return Err(Error::InvalidArgument("the filtration level i must be at least 1".into()));
    }
    if !d.in_u(Level::Finite(i)) {
        return Err(Error::NotInUnitFiltration { value: d.value(), level: i, modulus: ctx.modulus() });
    }
    let p = ctx.p();
    let m = ctx.m();
    let plain = |level: u32| -> PowerClass {
        // exactness is only observable when level + 1 fits below the modulus
        if level < m && !d.in_u(Level::Finite(level + 1)) {
            PowerClass::InUExact(level + j)
        } else {
            PowerClass::InU(level + j)
        }
    };
    if p > 2 || i > 1 || j == 0 {
        return Ok(plain(i));
    }
    if d.in_minus_u(Level::Infinite)? {
        return Ok(PowerClass::ExactlyOne);
    }
    if d.in_u(Level::Finite(2)) {
        return Ok(plain(2));
    }
    let v = match d.minus_u_level()? {
        Level::Finite(v) => v,
        Level::Infinite => unreachable!("d = -1 handled above"),
    };
    debug_assert!(v >= 2);
    if v < m {
        Ok(PowerClass::InUExact(v + j))
    } else {
        Ok(PowerClass::InU(v + j))
    }
}

/// Checks the congruence consequence of the explicit expansion of d^{p^j}:
/// with d = 1 + p^i x (canonical lift),
/// p odd: d^{p^j} = 1 + p^{i+j} x  (mod p^{2i+j});
/// p = 2: d^{2^j} = 1 + 2^{i+j} x (1 + 2^{i-1} x)  (mod 2^{2i+j}), for j >= 1.
pub fn pow_expansion_check(d: Residue, i: u32, j: u32) -> Result<bool> {
    let ctx = d.ctx();
    let p = ctx.p();
    if i == 0 {
        return Err(Error::InvalidArgument("the filtration level i must be at least 1".into()));
    }
    if !d.in_u(Level::Finite(i)) {
        return Err(Error::NotInUnitFiltration { value: d.value(), level: i, modulus: ctx.modulus() });
    }
    if p == 2 && j == 0 {
        return Err(Error::InvalidArgument("the p = 2 expansion needs j >= 1".into()));
    }
    let big = p as u128;
    let exp = 2 * i + j;
    let q = big.checked_pow(exp).filter(|q| *q < (1u128 << 62)).ok_or_else(|| {
        Error::TooLarge(format!("{p}^{exp} exceeds the exact-check range"))
    })?;
    let dv = d.value() as u128;
    let pi = big.pow(i);
    // d = 1 + p^i x for the canonical lift, or x = 0 when d = 1 and i > m
    let x = if dv == 1 { 0 } else { (dv - 1) / pi };
    debug_assert_eq!(1 + pi * x, dv);
    let mulq = |a: u128, b: u128| (a % q) * (b % q) % q;
    let mut lhs = dv % q;
    for _ in 0..j {
        let mut acc = 1u128;
        for _ in 0..p {
            acc = mulq(acc, lhs);
        }
        lhs = acc;
    }
    let pij = big.pow(i + j) % q;
    let rhs = if p == 2 {
        let inner = (1 + mulq(big.pow(i - 1), x)) % q;
        (1 + mulq(mulq(pij, x), inner)) % q
    } else {
        (1 + mulq(pij, x)) % q
    };
    Ok(lhs == rhs)
}

impl PartialOrd for Residue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.ctx != other.ctx {
            return None;
        }
        Some(self.value.cmp(&other.value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: u64, m: u32, x: i64) -> Residue {
        RingCtx::new(p, m).unwrap().residue_i64(x)
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(r(3, 4, 9).val_p(), Level::Finite(2));
        assert_eq!(r(2, 3, 0).val_p(), Level::Infinite);
        assert_eq!(r(2, 3, 6).val_p(), Level::Finite(1));
    }

    #[test]
    fn unit_filtration_examples() {
        assert!(r(3, 4, 4).in_u(Level::Finite(1)));
        assert!(!r(3, 4, 4).in_u(Level::Finite(2)));
        assert!(r(2, 3, 1).in_u(Level::Infinite));
        assert!(r(2, 4, 7).in_minus_u(Level::Finite(3)).unwrap());
        assert!(!r(2, 4, 7).in_minus_u(Level::Finite(4)).unwrap());
        assert!(r(2, 4, 15).in_minus_u(Level::Finite(4)).unwrap());
        assert!(r(3, 4, 2).in_minus_u(Level::Finite(1)).is_err());
    }

    #[test]
    fn ctx_rejects_bad_parameters() {
        assert_eq!(RingCtx::new(4, 2), Err(Error::NotPrime(4)));
        assert!(RingCtx::new(3, 0).is_err());
        assert!(matches!(RingCtx::new(3, 50), Err(Error::ModulusOverflow { .. })));
    }

    #[test]
    fn inverse_and_split() {
        let c = RingCtx::new(3, 3).unwrap();
        for x in 0..27 {
            match c.inv(x) {
                Some(y) => assert_eq!(c.mul(x, y), 1),
                None => assert_eq!(x % 3, 0),
            }
        }
        assert_eq!(c.split_unit(18), Some((2, 2)));
        assert_eq!(c.split_unit(0), None);
    }

    #[test]
    fn pow_class_examples() {
        // 4^9 = 262144 and 262143 = 3^3 * 9709
        let d = r(3, 7, 4);
        assert_eq!(d.pow(9).value(), 262144 % 2187);
        let cls = pow_class(d, 1, 2).unwrap();
        assert_eq!(cls, PowerClass::InUExact(3));
        assert!(cls.contains(d.pow(9)));

        assert_eq!(pow_class(r(2, 5, -1), 1, 1).unwrap(), PowerClass::ExactlyOne);

        let d = r(2, 6, 7);
        let cls = pow_class(d, 1, 1).unwrap();
        assert_eq!(cls, PowerClass::InUExact(4));
        assert_eq!(d.pow(2).value(), 49);
        assert!(cls.contains(d.pow(2)));

        assert!(matches!(pow_class(r(3, 4, 2), 1, 1), Err(Error::NotInUnitFiltration { .. })));
    }

    #[test]
    fn pow_expansion_examples() {
        assert!(pow_expansion_check(r(3, 6, 10), 2, 1).unwrap());
        assert!(pow_expansion_check(r(2, 6, 5), 2, 1).unwrap());
        for (p, m) in [(2, 4), (3, 3), (5, 2)] {
            for i in 1..=3 {
                for j in 1..=2 {
                    assert!(pow_expansion_check(r(p, m, 1), i, j).unwrap());
                }
            }
        }
    }

    #[test]
    fn pow_class_matches_direct_exponentiation() {
        for p in [2u64, 3, 5] {
            for m in 1..=6u32 {
                if p == 5 && m > 5 {
                    continue;
                }
                let ctx = RingCtx::new(p, m).unwrap();
                for i in 1..=m {
                    for j in 0..=3u32 {
                        for v in 0..ctx.modulus() {
                            let d = ctx.residue(v);
                            if !d.in_u(Level::Finite(i)) {
                                continue;
                            }
                            let cls = pow_class(d, i, j).unwrap();
                            let direct = d.pow(p.pow(j));
                            assert!(cls.contains(direct), "p={p} m={m} d={v} i={i} j={j} {cls:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn remark_on_squares_for_p_two() {
        for m in 1..=6u32 {
            let ctx = RingCtx::new(2, m).unwrap();
            for v in (1..ctx.modulus()).step_by(2) {
                let d = ctx.residue(v);
                for j in 1..=4u32 {
                    assert!(d.pow(1 << j).in_u(Level::Finite(j + 2)), "m={m} d={v} j={j}");
                }
            }
        }
    }

    #[test]
    fn valuation_of_products() {
        for (p, m) in [(2u64, 5u32), (3, 4)] {
            let ctx = RingCtx::new(p, m).unwrap();
            for a in 0..ctx.modulus() {
                for b in 0..ctx.modulus() {
                    let va = ctx.val_sat(a);
                    let vb = ctx.val_sat(b);
                    let vab = ctx.val_sat(ctx.mul(a, b));
                    assert!(vab >= (va + vb).min(m));
                    if va + vb < m {
                        assert_eq!(vab, va + vb);
                    }
                }
            }
        }
    }
}
