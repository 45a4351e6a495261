//! Rigorous floating-point interval arithmetic. Operations round outward by
//! one ulp after each correctly-rounded f64 step, so every interval is a
//! mathematically sound enclosure of the true value. Used only to gate exact
//! integer decisions (candidate enumeration); no final answer depends on a
//! float comparison alone.

/// A closed interval [lo, hi] of finite f64 values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(v: f64) -> Self {
        assert!(v.is_finite());
        Interval { lo: v, hi: v }
    }

    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo.is_finite() && hi.is_finite() && lo <= hi);
        Interval { lo, hi }
    }

    /// Exact when |v| < 2^53, outward-rounded otherwise.
    pub fn from_i128(v: i128) -> Self {
        let f = v as f64;
        if v.unsigned_abs() < (1u128 << 53) {
            Interval::point(f)
        } else {
            Interval::new(f.next_down(), f.next_up())
        }
    }

    pub fn zero() -> Self {
        Interval::point(0.0)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn neg(&self) -> Self {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Interval {
            lo: (self.lo + o.lo).next_down(),
            hi: (self.hi + o.hi).next_up(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let cands = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        let lo = cands.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = cands.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Interval {
            lo: lo.next_down(),
            hi: hi.next_up(),
        }
    }

    /// Division; the divisor interval must exclude zero.
    pub fn div(&self, o: &Self) -> Self {
        assert!(o.lo > 0.0 || o.hi < 0.0, "division by interval containing 0");
        let cands = [
            self.lo / o.lo,
            self.lo / o.hi,
            self.hi / o.lo,
            self.hi / o.hi,
        ];
        let lo = cands.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = cands.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Interval {
            lo: lo.next_down(),
            hi: hi.next_up(),
        }
    }

    pub fn square(&self) -> Self {
        let m = self.mul(self);
        // A square is nonnegative; tighten the spurious negative side.
        if self.lo <= 0.0 && self.hi >= 0.0 {
            Interval {
                lo: 0.0,
                hi: m.hi,
            }
        } else {
            m
        }
    }

    /// Square root of a nonnegative quantity. A slightly negative lower bound
    /// (rounding slack) is clamped to zero; a genuinely negative interval is
    /// a caller bug.
    pub fn sqrt(&self) -> Self {
        assert!(self.hi >= 0.0, "sqrt of negative interval");
        let lo = if self.lo <= 0.0 {
            0.0
        } else {
            self.lo.sqrt().next_down().max(0.0)
        };
        Interval {
            lo,
            hi: self.hi.sqrt().next_up(),
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn intersects(&self, o: &Self) -> bool {
        self.lo <= o.hi && o.lo <= self.hi
    }

    /// True when every point of the interval is strictly positive.
    pub fn is_pos(&self) -> bool {
        self.lo > 0.0
    }

    pub fn is_neg(&self) -> bool {
        self.hi < 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_encloses_truth() {
        let a = Interval::new(1.0, 2.0);
        let b = Interval::new(-3.0, 0.5);
        let s = a.add(&b);
        assert!(s.lo <= -2.0 && s.hi >= 2.5);
        let m = a.mul(&b);
        assert!(m.lo <= -6.0 && m.hi >= 1.0);
        let d = b.div(&a);
        assert!(d.lo <= -3.0 && d.hi >= 0.5);
    }

    #[test]
    fn sqrt_and_square() {
        let a = Interval::new(4.0, 9.0);
        let r = a.sqrt();
        assert!(r.lo <= 2.0 && r.hi >= 3.0);
        let sq = Interval::new(-2.0, 3.0).square();
        assert_eq!(sq.lo, 0.0);
        assert!(sq.hi >= 9.0);
    }

    #[test]
    fn from_i128_outward() {
        let big = (1i128 << 80) + 12345;
        let iv = Interval::from_i128(big);
        assert!(iv.lo as f64 <= big as f64 && iv.hi >= big as f64);
        assert!(iv.lo < iv.hi);
        let small = Interval::from_i128(42);
        assert_eq!(small.lo, 42.0);
        assert_eq!(small.hi, 42.0);
    }
}
