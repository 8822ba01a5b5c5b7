//! Rational interval arithmetic with enclosures of π, sin and cos.

use num_traits::{One, Signed, Zero};

use super::rational::*;

/// Closed rational interval [lo, hi].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Iv {
    pub lo: Q,
    pub hi: Q,
}

impl Iv {
    pub fn new(lo: Q, hi: Q) -> Iv {
        debug_assert!(lo <= hi);
        Iv { lo, hi }
    }

    pub fn point(x: Q) -> Iv {
        Iv { lo: x.clone(), hi: x }
    }

    pub fn add(&self, o: &Iv) -> Iv {
        Iv::new(&self.lo + &o.lo, &self.hi + &o.hi)
    }

    pub fn sub(&self, o: &Iv) -> Iv {
        Iv::new(&self.lo - &o.hi, &self.hi - &o.lo)
    }

    pub fn mul(&self, o: &Iv) -> Iv {
        let ps = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = ps.iter().min().unwrap().clone();
        let hi = ps.iter().max().unwrap().clone();
        Iv::new(lo, hi)
    }

    pub fn widen(&self, e: &Q) -> Iv {
        Iv::new(&self.lo - e, &self.hi + e)
    }

    pub fn clamp(&self, lo: &Q, hi: &Q) -> Iv {
        let a = if self.lo < *lo { lo.clone() } else { self.lo.clone() };
        let b = if self.hi > *hi { hi.clone() } else { self.hi.clone() };
        if a > b {
            Iv::point(a)
        } else {
            Iv::new(a, b)
        }
    }

    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Q) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    /// Rounds outward to dyadics with `bits` fractional bits.
    pub fn round(&self, bits: u32) -> Iv {
        Iv::new(round_down(&self.lo, bits), round_up(&self.hi, bits))
    }
}

/// atan(1/n) by its alternating series, to within 2^-bits.
fn atan_inv(n: i64, bits: u32) -> Iv {
    let x = q(1, n);
    let x2 = &x * &x;
    let eps = pow2(-(bits as i64));
    let mut term = x.clone();
    let mut sum = Q::zero();
    let mut k = 0i64;
    loop {
        let t = &term / qi(2 * k + 1);
        if t < eps {
            // the remainder of an alternating series is bounded by the next term
            return if k % 2 == 0 { Iv::new(sum.clone(), sum + t) } else { Iv::new(sum.clone() - t, sum) };
        }
        if k % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
        term *= &x2;
        k += 1;
    }
}

/// π via Machin's formula.
pub fn pi(bits: u32) -> Iv {
    let a = atan_inv(5, bits + 6);
    let b = atan_inv(239, bits + 6);
    Iv::point(qi(16)).mul(&a).sub(&Iv::point(qi(4)).mul(&b)).round(bits + 2)
}

/// sin and cos of a rational number of radians with |x| ≤ 4, to within 2^-bits.
fn sin_cos_small(x: &Q, bits: u32) -> (Iv, Iv) {
    let eps = pow2(-(bits as i64));
    let mut s = Q::zero();
    let mut c = Q::zero();
    let mut term = Q::one();
    let mut n = 0i64;
    loop {
        // term = x^n / n!
        if n > 2 * 4 && term.abs() < eps {
            // Taylor remainder of both series is at most the next term in absolute value
            let r = term.abs();
            return (Iv::new(&s - &r, &s + &r), Iv::new(&c - &r, &c + &r));
        }
        match n % 4 {
            0 => c += &term,
            1 => s += &term,
            2 => c -= &term,
            _ => s -= &term,
        }
        n += 1;
        term = term * x / qi(n);
    }
}

/// Enclosures of cos(2πt) and sin(2πt) for a rational number of turns t.
pub fn cos_sin_turn(t: &Q, bits: u32) -> (Iv, Iv) {
    let t = frac(t);
    // reduce to t ∈ [-1/2, 1/2)
    let t = if t >= q(1, 2) { t - Q::one() } else { t };
    if t.is_zero() {
        return (Iv::point(Q::one()), Iv::point(Q::zero()));
    }
    let p = pi(bits + 8);
    let ang = Iv::point(qi(2) * &t).mul(&p);
    let (s0, c0) = sin_cos_small(&ang.lo, bits + 4);
    // |d/dx sin|, |d/dx cos| ≤ 1 over the enclosure of the angle
    let w = ang.width();
    let one = Q::one();
    let s = s0.widen(&w).clamp(&-one.clone(), &one).round(bits + 2);
    let c = c0.widen(&w).clamp(&-one.clone(), &one).round(bits + 2);
    (c, s)
}

/// Enclosures of cos and sin over every angle in `turns`, by Lipschitz widening at the left end.
pub fn cos_sin_turn_range(turns: &Iv, bits: u32) -> (Iv, Iv) {
    let (c, s) = cos_sin_turn(&turns.lo, bits);
    // 2π < 7
    let w = qi(7) * turns.width();
    let one = Q::one();
    (c.widen(&w).clamp(&-one.clone(), &one), s.widen(&w).clamp(&-one.clone(), &one))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_encloses() {
        let p = pi(40);
        assert!(p.lo < q(314159266, 100000000) && p.hi > q(314159265, 100000000));
        assert!(p.width() < pow2(-38));
    }

    #[test]
    fn quarter_turns() {
        let (c, s) = cos_sin_turn(&q(1, 4), 30);
        assert!(c.contains(&Q::zero()) && s.contains(&Q::one()));
        assert!(c.width() < pow2(-25));
        let (c, s) = cos_sin_turn(&q(1, 2), 30);
        assert!(c.contains(&qi(-1)) && s.contains(&Q::zero()));
        let (c, _) = cos_sin_turn(&q(1, 6), 30);
        assert!(c.contains(&q(1, 2)));
    }
}
