//! Exact rational helpers, pairing functions and the fixed enumerations of rationals.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// 2^e for any integer exponent.
pub fn pow2(e: i64) -> Q {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Q::from_integer(p)
    } else {
        Q::new(BigInt::one(), p)
    }
}

/// Representative of x mod 1 in [0,1).
pub fn frac(x: &Q) -> Q {
    x - x.floor()
}

/// Parses "p/q", "p" or a decimal like "0.25".
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Invalid(format!("not a rational: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().map_err(|_| bad())?;
        let d: BigInt = b.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((a, b)) = s.split_once('.') {
        let neg = a.starts_with('-');
        let ip: BigInt = if a.is_empty() || a == "-" { BigInt::zero() } else { a.parse().map_err(|_| bad())? };
        let fp: BigInt = b.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), b.len());
        let f = Q::new(fp, den);
        let ipq = Q::from_integer(ip.abs());
        let v = ipq + f;
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(n))
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Least m ≥ 0 with 2^-m < r (strict) or ≤ r (non-strict), for r > 0.
pub fn depth_for_radius(r: &Q, strict: bool) -> usize {
    let mut m = 0usize;
    // start near the answer using bit lengths
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let guess = (db - nb - 1).max(0) as usize;
    if guess > 0 {
        m = guess - 1;
        while m > 0 && ok_depth(m, r, strict) {
            m -= 1;
        }
    }
    while !ok_depth(m, r, strict) {
        m += 1;
    }
    m
}

fn ok_depth(m: usize, r: &Q, strict: bool) -> bool {
    let p = pow2(-(m as i64));
    if strict {
        p < *r
    } else {
        p <= *r
    }
}

/// Lower and upper rational bounds on sqrt(x) with error at most 2^-bits.
pub fn sqrt_bounds(x: &Q, bits: u32) -> (Q, Q) {
    if !x.is_positive() {
        return (Q::zero(), Q::zero());
    }
    let scale = BigInt::one() << (2 * bits as usize);
    let lo_n = (x * Q::from_integer(scale.clone())).floor().to_integer();
    let s = lo_n.sqrt();
    let den = BigInt::one() << bits as usize;
    let lo = Q::new(s.clone(), den.clone());
    let hi = if &s * &s == lo_n && Q::from_integer(lo_n) == x * Q::from_integer(scale) {
        lo.clone()
    } else {
        Q::new(s + 1, den)
    };
    (lo, hi)
}

/// Outward rounding of x to a dyadic with denominator 2^bits.
pub fn round_down(x: &Q, bits: u32) -> Q {
    let d = BigInt::one() << bits as usize;
    Q::new((x * Q::from_integer(d.clone())).floor().to_integer(), d)
}

pub fn round_up(x: &Q, bits: u32) -> Q {
    let d = BigInt::one() << bits as usize;
    Q::new((x * Q::from_integer(d.clone())).ceil().to_integer(), d)
}

/// Cantor pairing ℕ×ℕ → ℕ.
pub fn pair(a: &BigUint, b: &BigUint) -> BigUint {
    let s = a + b;
    (&s * (&s + 1u32)) / 2u32 + b
}

pub fn unpair(z: &BigUint) -> (BigUint, BigUint) {
    // w = floor((sqrt(8z+1)-1)/2)
    let w = ((z * 8u32 + 1u32).sqrt() - 1u32) / 2u32;
    let t = (&w * (&w + 1u32)) / 2u32;
    let b = z - &t;
    let a = &w - &b;
    (a, b)
}

/// Codes a finite sequence of naturals as one natural: 0 is empty, otherwise 1 + pair(len-1, fold).
pub fn encode_seq(xs: &[BigUint]) -> BigUint {
    if xs.is_empty() {
        return BigUint::zero();
    }
    let mut acc = xs[xs.len() - 1].clone();
    for x in xs[..xs.len() - 1].iter().rev() {
        acc = pair(x, &acc);
    }
    pair(&BigUint::from(xs.len() - 1), &acc) + 1u32
}

pub fn decode_seq(z: &BigUint) -> Vec<BigUint> {
    if z.is_zero() {
        return vec![];
    }
    let (n, mut acc) = unpair(&(z - 1u32));
    let n = n.to_usize().unwrap_or(0);
    let mut out = Vec::with_capacity(n + 1);
    for _ in 0..n {
        let (x, rest) = unpair(&acc);
        out.push(x);
        acc = rest;
    }
    out.push(acc);
    out
}

fn totients(n: usize) -> Vec<u64> {
    let mut phi: Vec<u64> = (0..=n as u64).collect();
    for i in 2..=n {
        if phi[i] == i as u64 {
            let mut j = i;
            while j <= n {
                phi[j] -= phi[j] / i as u64;
                j += i;
            }
        }
    }
    phi
}

fn small(x: &BigInt, what: &str) -> Result<usize> {
    x.to_usize()
        .filter(|v| *v < 1 << 26)
        .ok_or_else(|| Error::Invalid(format!("{what} too large to index")))
}

/// Index of a positive rational p/q in the order by p+q, then p.
pub fn pos_rational_index(x: &Q) -> Result<BigUint> {
    if !x.is_positive() {
        return Err(Error::Invalid("radius must be positive".into()));
    }
    let p = small(x.numer(), "numerator")?;
    let d = small(x.denom(), "denominator")?;
    let s = p + d;
    let phi = totients(s);
    let mut idx: u64 = phi[2..s].iter().sum();
    idx += (1..p).filter(|k| k.gcd(&s) == 1).count() as u64;
    Ok(BigUint::from(idx))
}

pub fn pos_rational_from_index(i: &BigUint) -> Result<Q> {
    let mut rem = i.to_u64().ok_or_else(|| Error::Invalid("rational index too large".into()))?;
    let mut s = 2usize;
    loop {
        let phi = totients(s)[s];
        if rem < phi {
            let mut k = 0u64;
            for p in 1..s {
                if p.gcd(&s) == 1 {
                    if k == rem {
                        return Ok(q(p as i64, (s - p) as i64));
                    }
                    k += 1;
                }
            }
        }
        rem -= phi;
        s += 1;
    }
}

/// Index of a rational in [0,1]: 0, 1, then by denominator and numerator.
pub fn unit_rational_index(x: &Q) -> Result<BigUint> {
    if x.is_negative() || *x > Q::one() {
        return Err(Error::Invalid(format!("{} not in [0,1]", fmt_q(x))));
    }
    if x.is_zero() {
        return Ok(BigUint::zero());
    }
    if x.is_one() {
        return Ok(BigUint::one());
    }
    let p = small(x.numer(), "numerator")?;
    let d = small(x.denom(), "denominator")?;
    let phi = totients(d);
    let mut idx: u64 = 2 + phi[2..d].iter().sum::<u64>();
    idx += (1..p).filter(|k| k.gcd(&d) == 1).count() as u64;
    Ok(BigUint::from(idx))
}

pub fn unit_rational_from_index(i: &BigUint) -> Result<Q> {
    let mut rem = i.to_u64().ok_or_else(|| Error::Invalid("rational index too large".into()))?;
    if rem < 2 {
        return Ok(qi(rem as i64));
    }
    rem -= 2;
    let mut d = 2usize;
    loop {
        let phi = totients(d)[d];
        if rem < phi {
            let mut k = 0u64;
            for p in 1..d {
                if p.gcd(&d) == 1 {
                    if k == rem {
                        return Ok(q(p as i64, d as i64));
                    }
                    k += 1;
                }
            }
        }
        rem -= phi;
        d += 1;
    }
}

/// Index of an arbitrary rational: 0, then positives and negatives interleaved.
pub fn rational_index(x: &Q) -> Result<BigUint> {
    if x.is_zero() {
        return Ok(BigUint::zero());
    }
    let k = pos_rational_index(&x.abs())?;
    Ok(if x.is_positive() { k * 2u32 + 1u32 } else { k * 2u32 + 2u32 })
}

pub fn rational_from_index(i: &BigUint) -> Result<Q> {
    if i.is_zero() {
        return Ok(Q::zero());
    }
    let j = i - 1u32;
    let (k, r) = j.div_rem(&BigUint::from(2u32));
    let v = pos_rational_from_index(&k)?;
    Ok(if r.is_zero() { v } else { -v })
}

/// Number of stages for a fuel value: ⌊log2(f+1)⌋.
pub fn stage(fuel: u64) -> u32 {
    63 - (fuel.saturating_add(1)).leading_zeros()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_round_trips() {
        for a in 0u32..20 {
            for b in 0u32..20 {
                let z = pair(&a.into(), &b.into());
                assert_eq!(unpair(&z), (a.into(), b.into()));
            }
        }
        let xs: Vec<BigUint> = vec![3u32.into(), 0u32.into(), 7u32.into()];
        assert_eq!(decode_seq(&encode_seq(&xs)), xs);
    }

    #[test]
    fn rational_enumerations_are_bijective_on_prefix() {
        for i in 0u32..200 {
            let x = pos_rational_from_index(&i.into()).unwrap();
            assert_eq!(pos_rational_index(&x).unwrap(), i.into());
            let u = unit_rational_from_index(&i.into()).unwrap();
            assert_eq!(unit_rational_index(&u).unwrap(), i.into());
            let r = rational_from_index(&i.into()).unwrap();
            assert_eq!(rational_index(&r).unwrap(), i.into());
        }
    }

    #[test]
    fn depth_and_sqrt() {
        assert_eq!(depth_for_radius(&q(1, 2), true), 2);
        assert_eq!(depth_for_radius(&q(1, 2), false), 1);
        assert_eq!(depth_for_radius(&qi(2), true), 0);
        assert_eq!(depth_for_radius(&q(3, 4), true), 1);
        let (lo, hi) = sqrt_bounds(&qi(2), 20);
        assert!(&lo * &lo <= qi(2) && &hi * &hi >= qi(2));
        assert!(hi - lo <= pow2(-20));
        assert_eq!(parse_q("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_q("-3/6").unwrap(), q(-1, 2));
    }
}
