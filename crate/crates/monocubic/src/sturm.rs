//! Exact real-root machinery for rational polynomials: Sturm chains, root
//! counting, isolation into disjoint intervals with rational endpoints, and
//! certified sign evaluation at algebraic points. Everything here is exact
//! (BigRational); floating enclosures are produced only at the boundary via
//! outward rounding.

use crate::interval::Interval;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Polynomial with rational coefficients, ascending order, no trailing zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct QPoly {
    pub c: Vec<BigRational>,
}

fn br(v: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl QPoly {
    pub fn new(c: Vec<BigRational>) -> Self {
        let mut c = c;
        while c.last().map_or(false, |v| v.is_zero()) {
            c.pop();
        }
        QPoly { c }
    }

    pub fn from_int_slice(v: &[i128]) -> Self {
        QPoly::new(v.iter().map(|&x| br(x)).collect())
    }

    pub fn zero() -> Self {
        QPoly { c: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree; zero polynomial reports 0.
    pub fn deg(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn lead(&self) -> &BigRational {
        self.c.last().expect("lead of zero polynomial")
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for coeff in self.c.iter().rev() {
            acc = acc * x + coeff;
        }
        acc
    }

    /// Exact interval extension: encloses {p(t) : t in [lo, hi]} by interval
    /// Horner over exact rational intervals.
    pub fn eval_interval(&self, lo: &BigRational, hi: &BigRational) -> (BigRational, BigRational) {
        let mut alo = BigRational::zero();
        let mut ahi = BigRational::zero();
        for coeff in self.c.iter().rev() {
            // (alo, ahi) * (lo, hi): min/max of the four products.
            let p1 = &alo * lo;
            let p2 = &alo * hi;
            let p3 = &ahi * lo;
            let p4 = &ahi * hi;
            let mut nlo = p1.clone();
            let mut nhi = p1;
            for p in [p2, p3, p4] {
                if p < nlo {
                    nlo = p.clone();
                }
                if p > nhi {
                    nhi = p;
                }
            }
            alo = nlo + coeff;
            ahi = nhi + coeff;
        }
        (alo, ahi)
    }

    pub fn deriv(&self) -> QPoly {
        if self.c.len() <= 1 {
            return QPoly::zero();
        }
        QPoly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, v)| v * br(i as i128))
                .collect(),
        )
    }

    pub fn rem(&self, d: &QPoly) -> QPoly {
        assert!(!d.is_zero());
        let mut r = self.c.clone();
        let dl = d.lead();
        while r.len() >= d.c.len() && !r.is_empty() {
            let q = r.last().unwrap() / dl;
            if q.is_zero() {
                r.pop();
                continue;
            }
            let shift = r.len() - d.c.len();
            for (i, dc) in d.c.iter().enumerate() {
                let v = &r[shift + i] - &q * dc;
                r[shift + i] = v;
            }
            // Leading term cancels exactly.
            debug_assert!(r.last().unwrap().is_zero());
            r.pop();
            while r.last().map_or(false, |v| v.is_zero()) {
                r.pop();
            }
        }
        QPoly { c: r }
    }

    /// Monic gcd via the Euclidean algorithm.
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let l = a.lead().clone();
        QPoly::new(a.c.iter().map(|v| v / &l).collect())
    }

    /// p / gcd(p, p'): same real roots, all simple.
    pub fn squarefree_part(&self) -> QPoly {
        assert!(!self.is_zero());
        let g = self.gcd(&self.deriv());
        if g.deg() == 0 {
            return self.clone();
        }
        self.divide_exact(&g)
    }

    /// Exact division (the remainder must vanish).
    pub fn divide_exact(&self, d: &QPoly) -> QPoly {
        assert!(!d.is_zero());
        let mut r = self.c.clone();
        let mut q = vec![BigRational::zero(); self.c.len().saturating_sub(d.c.len()) + 1];
        let dl = d.lead();
        while r.len() >= d.c.len() && !r.is_empty() {
            let coef = r.last().unwrap() / dl;
            let shift = r.len() - d.c.len();
            q[shift] = coef.clone();
            for (i, dc) in d.c.iter().enumerate() {
                let v = &r[shift + i] - &coef * dc;
                r[shift + i] = v;
            }
            r.pop();
            while r.last().map_or(false, |v| v.is_zero()) {
                r.pop();
            }
        }
        assert!(r.is_empty(), "inexact division");
        QPoly::new(q)
    }

    /// Strict bound on the absolute value of every real root.
    pub fn root_bound(&self) -> BigRational {
        assert!(self.deg() >= 1);
        let lead = self.lead().abs();
        let mut m = BigRational::zero();
        for v in &self.c[..self.c.len() - 1] {
            let a = v.abs() / &lead;
            if a > m {
                m = a;
            }
        }
        m + br(1)
    }
}

/// Sturm chain of a squarefree polynomial.
pub struct SturmChain {
    chain: Vec<QPoly>,
}

fn sign(v: &BigRational) -> i32 {
    if v.is_zero() {
        0
    } else if v.is_positive() {
        1
    } else {
        -1
    }
}

impl SturmChain {
    pub fn new(sf: &QPoly) -> Self {
        let mut chain = vec![sf.clone()];
        if sf.deg() >= 1 {
            chain.push(sf.deriv());
            loop {
                let n = chain.len();
                let r = chain[n - 2].rem(&chain[n - 1]);
                if r.is_zero() {
                    break;
                }
                chain.push(QPoly::new(r.c.iter().map(|v| -v).collect()));
            }
        }
        SturmChain { chain }
    }

    fn variations(signs: impl Iterator<Item = i32>) -> usize {
        let mut count = 0;
        let mut last = 0;
        for s in signs {
            if s == 0 {
                continue;
            }
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    pub fn variations_at(&self, x: &BigRational) -> usize {
        Self::variations(self.chain.iter().map(|p| sign(&p.eval(x))))
    }

    pub fn variations_at_inf(&self, positive: bool) -> usize {
        Self::variations(self.chain.iter().map(|p| {
            if p.is_zero() {
                0
            } else {
                let s = sign(p.lead());
                if positive || p.deg() % 2 == 0 {
                    s
                } else {
                    -s
                }
            }
        }))
    }

    /// Number of roots in the open interval (lo, hi); both endpoints must be
    /// non-roots of the squarefree polynomial.
    pub fn count_open(&self, lo: &BigRational, hi: &BigRational) -> usize {
        debug_assert!(!self.chain[0].eval(lo).is_zero());
        debug_assert!(!self.chain[0].eval(hi).is_zero());
        self.variations_at(lo) - self.variations_at(hi)
    }

    pub fn count_all(&self) -> usize {
        self.variations_at_inf(false) - self.variations_at_inf(true)
    }
}

/// Number of distinct real roots.
pub fn real_root_count(p: &QPoly) -> usize {
    assert!(!p.is_zero());
    if p.deg() == 0 {
        return 0;
    }
    SturmChain::new(&p.squarefree_part()).count_all()
}

/// Outward f64 enclosure of an exact rational (2-ulp widening absorbs the
/// rounding of the conversion itself).
pub fn br_to_interval(v: &BigRational) -> Interval {
    let f = v.to_f64().expect("rational has no f64 image");
    assert!(f.is_finite(), "rational overflows f64");
    Interval::new(f.next_down().next_down(), f.next_up().next_up())
}

/// An isolating interval for one real root: either an exact rational root
/// (lo = hi) or an open interval (lo, hi) containing exactly one root, with
/// non-root endpoints of opposite polynomial sign.
#[derive(Debug, Clone)]
pub struct RootInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RootInterval {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    /// Outward f64 enclosure (2-ulp widening absorbs conversion rounding).
    pub fn to_interval(&self) -> Interval {
        let lo = self.lo.to_f64().expect("root bound overflows f64");
        let hi = self.hi.to_f64().expect("root bound overflows f64");
        assert!(lo.is_finite() && hi.is_finite());
        Interval::new(
            lo.next_down().next_down(),
            hi.next_up().next_up().max(lo.next_down().next_down()),
        )
    }
}

/// Disjoint isolating intervals for every distinct real root, sorted.
pub fn isolate_real_roots(p: &QPoly) -> Vec<RootInterval> {
    assert!(!p.is_zero());
    if p.deg() == 0 {
        return Vec::new();
    }
    let sf = p.squarefree_part();
    if sf.deg() == 0 {
        return Vec::new();
    }
    let chain = SturmChain::new(&sf);
    let bound = sf.root_bound();
    let mut out = Vec::new();
    isolate_rec(&chain, &sf, &(-bound.clone()), &bound, &mut out);
    out
}

fn isolate_rec(
    chain: &SturmChain,
    sf: &QPoly,
    lo: &BigRational,
    hi: &BigRational,
    out: &mut Vec<RootInterval>,
) {
    let n = chain.count_open(lo, hi);
    if n == 0 {
        return;
    }
    if n == 1 {
        out.push(RootInterval {
            lo: lo.clone(),
            hi: hi.clone(),
        });
        return;
    }
    let m = (lo + hi) / br(2);
    if sf.eval(&m).is_zero() {
        // Exact rational root at the midpoint: carve out a band around it
        // containing no other root, then recurse on both sides.
        let mut d = (hi - lo) / br(4);
        loop {
            let a = &m - &d;
            let b = &m + &d;
            if !sf.eval(&a).is_zero()
                && !sf.eval(&b).is_zero()
                && chain.count_open(&a, &b) == 1
            {
                isolate_rec(chain, sf, lo, &a, out);
                out.push(RootInterval {
                    lo: m.clone(),
                    hi: m.clone(),
                });
                isolate_rec(chain, sf, &b, hi, out);
                return;
            }
            d = d / br(2);
        }
    }
    isolate_rec(chain, sf, lo, &m, out);
    isolate_rec(chain, sf, &m, hi, out);
}

/// Shrink an isolating interval below the target width by exact bisection.
pub fn refine_root(sf: &QPoly, r: &mut RootInterval, target: &BigRational) {
    if r.is_exact() {
        return;
    }
    let mut slo = sign(&sf.eval(&r.lo));
    debug_assert!(slo != 0 && sign(&sf.eval(&r.hi)) == -slo);
    while &r.hi - &r.lo > *target {
        let m = (&r.lo + &r.hi) / br(2);
        let sm = sign(&sf.eval(&m));
        if sm == 0 {
            r.lo = m.clone();
            r.hi = m;
            return;
        }
        if sm == slo {
            r.lo = m;
            slo = sm;
        } else {
            r.hi = m;
        }
    }
}

/// Certified sign of num(rho) where rho is the root isolated by r for the
/// squarefree polynomial sf. Requires gcd(num, sf) to be nonzero at the root
/// (num(rho) != 0), which holds for the unit/element evaluations used here;
/// refinement then terminates.
pub fn sign_at_root(num: &QPoly, sf: &QPoly, r: &mut RootInterval) -> i32 {
    if r.is_exact() {
        let v = num.eval(&r.lo);
        let s = sign(&v);
        assert!(s != 0, "numerator vanishes at the algebraic point");
        return s;
    }
    loop {
        let (lo, hi) = num.eval_interval(&r.lo, &r.hi);
        if lo.is_positive() {
            return 1;
        }
        if hi.is_negative() {
            return -1;
        }
        let width = (&r.hi - &r.lo) / br(2);
        refine_root(sf, r, &width);
        if r.is_exact() {
            return sign_at_root(num, sf, r);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_isolation() {
        // (x^2 - 2)(x - 1): roots -sqrt2, 1, sqrt2.
        let p = QPoly::from_int_slice(&[2, -2, -1, 1]);
        assert_eq!(real_root_count(&p), 3);
        let roots = isolate_real_roots(&p);
        assert_eq!(roots.len(), 3);
        // Sorted and the middle one is the exact rational root 1 or an
        // interval containing it.
        let one = br(1);
        assert!(roots[1].lo <= one && one <= roots[1].hi);
        // Refine the last root towards sqrt(2).
        let mut r = roots[2].clone();
        refine_root(&p.squarefree_part(), &mut r, &(br(1) / br(1_000_000)));
        let sqrt2 = 1.4142135623730951_f64;
        let iv = r.to_interval();
        assert!(iv.lo <= sqrt2 && sqrt2 <= iv.hi);
        assert!(iv.width() < 1e-5);
    }

    #[test]
    fn no_real_roots() {
        let p = QPoly::from_int_slice(&[1, 0, 0, 0, 1]); // x^4 + 1
        assert_eq!(real_root_count(&p), 0);
        assert!(isolate_real_roots(&p).is_empty());
    }

    #[test]
    fn rational_root_at_midpoint() {
        // roots 0, ±2: initial bound puts 0 at a midpoint.
        let p = QPoly::from_int_slice(&[0, -4, 0, 1]);
        let roots = isolate_real_roots(&p);
        assert_eq!(roots.len(), 3);
        assert!(roots.iter().any(|r| r.is_exact() && r.lo == br(0)));
    }

    #[test]
    fn certified_signs() {
        // f = x^2 - 2, evaluate x - 1 and x - 2 at sqrt(2).
        let f = QPoly::from_int_slice(&[-2, 0, 1]);
        let roots = isolate_real_roots(&f);
        let positive_root = roots
            .iter()
            .find(|r| r.hi.is_positive() && (r.is_exact() || r.lo >= br(0) || r.hi > br(1)))
            .unwrap();
        let mut r1 = positive_root.clone();
        assert_eq!(sign_at_root(&QPoly::from_int_slice(&[-1, 1]), &f, &mut r1), 1);
        let mut r2 = positive_root.clone();
        assert_eq!(sign_at_root(&QPoly::from_int_slice(&[-2, 1]), &f, &mut r2), -1);
    }

    #[test]
    fn squarefree_part_strips_multiplicity() {
        // (x-1)^2 (x+3)
        let p = QPoly::from_int_slice(&[3, -5, 1, 1]);
        assert_eq!(real_root_count(&p), 2);
        let sf = p.squarefree_part();
        assert_eq!(sf.deg(), 2);
    }
}
