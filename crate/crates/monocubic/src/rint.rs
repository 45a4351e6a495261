//! Arbitrary-precision interval arithmetic: exact rational endpoints with
//! outward rounding to a dyadic grid of configurable precision. Unlike
//! double-precision intervals, enclosure widths here shrink without floor as
//! the requested precision grows, which is what the covariant computation
//! needs when root clusters make its inner products cancel brutally.

use crate::interval::Interval;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Closed interval with exact rational endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct RInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

fn br(v: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// floor(v * 2^bits) / 2^bits
fn floor_dyadic(v: &BigRational, bits: u32) -> BigRational {
    let scaled = (v.numer() << bits).div_floor(v.denom());
    BigRational::new(scaled, BigInt::from(1) << bits)
}

/// ceil(v * 2^bits) / 2^bits
fn ceil_dyadic(v: &BigRational, bits: u32) -> BigRational {
    let scaled = (v.numer() << bits).div_ceil(v.denom());
    BigRational::new(scaled, BigInt::from(1) << bits)
}

impl RInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "inverted interval");
        RInterval { lo, hi }
    }

    pub fn point(v: BigRational) -> Self {
        RInterval {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn from_i128(v: i128) -> Self {
        Self::point(br(v))
    }

    pub fn zero() -> Self {
        Self::from_i128(0)
    }

    /// Round endpoints outward onto the grid of multiples of 2^-bits. This
    /// only ever enlarges the interval, and keeps endpoint bit-size bounded.
    pub fn round_out(&self, bits: u32) -> Self {
        RInterval {
            lo: floor_dyadic(&self.lo, bits),
            hi: ceil_dyadic(&self.hi, bits),
        }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> BigRational {
        (&self.lo + &self.hi) / br(2)
    }

    pub fn neg(&self) -> Self {
        RInterval {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }

    pub fn add(&self, o: &Self, bits: u32) -> Self {
        RInterval {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
        .round_out(bits)
    }

    pub fn sub(&self, o: &Self, bits: u32) -> Self {
        RInterval {
            lo: &self.lo - &o.hi,
            hi: &self.hi - &o.lo,
        }
        .round_out(bits)
    }

    pub fn mul(&self, o: &Self, bits: u32) -> Self {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let mut lo = c[0].clone();
        let mut hi = c[0].clone();
        for v in &c[1..] {
            if *v < lo {
                lo = v.clone();
            }
            if *v > hi {
                hi = v.clone();
            }
        }
        RInterval { lo, hi }.round_out(bits)
    }

    /// Division; the divisor must exclude zero.
    pub fn div(&self, o: &Self, bits: u32) -> Self {
        assert!(
            o.lo.is_positive() || o.hi.is_negative(),
            "division by an interval containing zero"
        );
        let c = [
            &self.lo / &o.lo,
            &self.lo / &o.hi,
            &self.hi / &o.lo,
            &self.hi / &o.hi,
        ];
        let mut lo = c[0].clone();
        let mut hi = c[0].clone();
        for v in &c[1..] {
            if *v < lo {
                lo = v.clone();
            }
            if *v > hi {
                hi = v.clone();
            }
        }
        RInterval { lo, hi }.round_out(bits)
    }

    pub fn square(&self, bits: u32) -> Self {
        let a = &self.lo * &self.lo;
        let b = &self.hi * &self.hi;
        let (mut lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if self.lo.is_negative() && self.hi.is_positive() {
            lo = BigRational::zero();
        }
        RInterval { lo, hi }.round_out(bits)
    }

    /// Square root with outward dyadic rounding. The interval must not be
    /// entirely negative; a slightly negative lower bound is clamped to zero
    /// (it can only arise as enclosure slack around a nonnegative quantity).
    pub fn sqrt(&self, bits: u32) -> Self {
        assert!(!self.hi.is_negative(), "sqrt of a negative interval");
        let lo = if self.lo.is_negative() {
            BigRational::zero()
        } else {
            // floor(sqrt(lo * 4^bits)) / 2^bits <= sqrt(lo)
            let scaled = (self.lo.numer() << (2 * bits)).div_floor(self.lo.denom());
            BigRational::new(scaled.sqrt(), BigInt::from(1) << bits)
        };
        let scaled = (self.hi.numer() << (2 * bits)).div_ceil(self.hi.denom());
        let mut r = scaled.sqrt();
        if &r * &r < scaled {
            r += 1;
        }
        let hi = BigRational::new(r, BigInt::from(1) << bits);
        RInterval { lo, hi }
    }

    pub fn is_pos(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_neg(&self) -> bool {
        self.hi.is_negative()
    }

    /// Outward double-precision image (2-ulp widening absorbs conversion
    /// rounding).
    pub fn to_f64_interval(&self) -> Interval {
        let lo = self.lo.to_f64().expect("endpoint has no f64 image");
        let hi = self.hi.to_f64().expect("endpoint has no f64 image");
        assert!(lo.is_finite() && hi.is_finite(), "endpoint overflows f64");
        Interval::new(
            lo.next_down().next_down(),
            hi.next_up().next_up().max(lo.next_down().next_down()),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i128, d: i128) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn arithmetic_encloses_and_rounds_outward() {
        let bits = 16;
        let a = RInterval::new(rat(1, 3), rat(1, 2));
        let b = RInterval::new(rat(-1, 7), rat(2, 7));
        let s = a.add(&b, bits);
        assert!(s.lo <= rat(1, 3) + rat(-1, 7) && s.hi >= rat(1, 2) + rat(2, 7));
        assert!(s.width() <= (rat(1, 2) - rat(1, 3)) + (rat(2, 7) + rat(1, 7)) + rat(2, 65536));
        let p = a.mul(&b, bits);
        assert!(p.lo <= rat(1, 2) * rat(-1, 7));
        assert!(p.hi >= rat(1, 2) * rat(2, 7));
    }

    #[test]
    fn sqrt_bounds_tighten_with_precision() {
        let two = RInterval::from_i128(2);
        for bits in [8u32, 32, 96] {
            let r = two.sqrt(bits);
            assert!(&r.lo * &r.lo <= rat(2, 1));
            assert!(&r.hi * &r.hi >= rat(2, 1));
            assert!(r.width() <= rat(2, 1) / BigRational::from_integer(BigInt::from(1) << bits));
        }
    }

    #[test]
    fn division_and_square() {
        let bits = 48;
        let a = RInterval::new(rat(-3, 2), rat(5, 2));
        let sq = a.square(bits);
        assert!(sq.lo.is_zero() || sq.lo.is_negative() == false);
        assert!(sq.hi >= rat(25, 4));
        let d = RInterval::new(rat(1, 4), rat(1, 2));
        let q = RInterval::from_i128(1).div(&d, bits);
        assert!(q.lo <= rat(2, 1) && q.hi >= rat(4, 1));
    }

    #[test]
    fn no_precision_floor() {
        // Cancellation that defeats f64: (x + eps)^2 - x^2 - 2 x eps = eps^2
        // with x huge. Rational intervals keep exactness at any magnitude.
        let bits = 128;
        let x = RInterval::from_i128(1_000_000_000_000i128);
        let eps = RInterval::point(rat(1, 1_000_000_000_000i128));
        let lhs = x.add(&eps, bits).square(bits);
        let rhs = x
            .square(bits)
            .add(&x.mul(&eps, bits).mul(&RInterval::from_i128(2), bits), bits);
        let diff = lhs.sub(&rhs, bits);
        let true_val = rat(1, 1_000_000_000_000i128) * rat(1, 1_000_000_000_000i128);
        assert!(diff.lo <= true_val && true_val <= diff.hi);
        assert!(diff.is_pos());
    }
}
