//! Integral binary quartic forms: invariants, unimodular substitutions, and
//! the per-form flags used downstream (real root count in the projective
//! line, irreducibility over the rationals, and the mod-p "square of a
//! quadratic" ramification test).

use crate::arith::{factor, mul, mulmod, powmod, Factorization, Overflow};
use crate::orders::DEFAULT_RHO_BUDGET;
use crate::sturm::{real_root_count as poly_real_roots, QPoly};
use serde::{Deserialize, Serialize};

/// g(x, y) = a x^4 + b x^3 y + c x^2 y^2 + d x y^3 + e y^4 with integer
/// coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i128; 5]", into = "[i128; 5]")]
pub struct BinaryQuartic {
    pub a: i128,
    pub b: i128,
    pub c: i128,
    pub d: i128,
    pub e: i128,
}

impl From<[i128; 5]> for BinaryQuartic {
    fn from(v: [i128; 5]) -> Self {
        BinaryQuartic {
            a: v[0],
            b: v[1],
            c: v[2],
            d: v[3],
            e: v[4],
        }
    }
}

impl From<BinaryQuartic> for [i128; 5] {
    fn from(g: BinaryQuartic) -> [i128; 5] {
        [g.a, g.b, g.c, g.d, g.e]
    }
}

/// A unimodular integer matrix [[p, q], [r, s]] with det = ±1, acting on
/// forms by substitution (x, y) -> (p x + q y, r x + s y).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Unimodular {
    pub p: i128,
    pub q: i128,
    pub r: i128,
    pub s: i128,
}

impl Unimodular {
    pub fn new(p: i128, q: i128, r: i128, s: i128) -> Self {
        let m = Unimodular { p, q, r, s };
        assert!(m.det() == 1 || m.det() == -1, "matrix is not unimodular");
        m
    }

    pub fn det(&self) -> i128 {
        self.p * self.s - self.q * self.r
    }

    pub fn identity() -> Self {
        Unimodular::new(1, 0, 0, 1)
    }

    /// Matrix product self * other.
    pub fn mul(&self, other: &Unimodular) -> Unimodular {
        Unimodular::new(
            self.p * other.p + self.q * other.r,
            self.p * other.q + self.q * other.s,
            self.r * other.p + self.s * other.r,
            self.r * other.q + self.s * other.s,
        )
    }
}

/// Upper-triangular shift (x, y) -> (x + m y, y).
pub fn shift(m: i128) -> Unimodular {
    Unimodular::new(1, m, 0, 1)
}

/// Inversion (x, y) -> (y, -x).
pub fn inversion() -> Unimodular {
    Unimodular::new(0, 1, -1, 0)
}

impl BinaryQuartic {
    pub fn new(a: i128, b: i128, c: i128, d: i128, e: i128) -> Self {
        BinaryQuartic { a, b, c, d, e }
    }

    pub fn coeffs(&self) -> [i128; 5] {
        [self.a, self.b, self.c, self.d, self.e]
    }

    /// The pair (I, J):
    ///   I = 12 a e - 3 b d + c^2
    ///   J = 72 a c e + 9 b c d - 27 a d^2 - 27 b^2 e - 2 c^3
    /// Both are invariant under every unimodular substitution (weights 4 and
    /// 6, so det = -1 leaves them unchanged too).
    pub fn invariants(&self) -> Result<(i128, i128), Overflow> {
        let (a, b, c, d, e) = (self.a, self.b, self.c, self.d, self.e);
        let i = crate::arith::sub(mul(12, mul(a, e)?)?, mul(3, mul(b, d)?)?)?;
        let i = crate::arith::add(i, mul(c, c)?)?;
        let t1 = mul(72, mul(a, mul(c, e)?)?)?;
        let t2 = mul(9, mul(b, mul(c, d)?)?)?;
        let t3 = mul(27, mul(a, mul(d, d)?)?)?;
        let t4 = mul(27, mul(b, mul(b, e)?)?)?;
        let t5 = mul(2, mul(c, mul(c, c)?)?)?;
        let j = t1
            .checked_add(t2)
            .and_then(|v| v.checked_sub(t3))
            .and_then(|v| v.checked_sub(t4))
            .and_then(|v| v.checked_sub(t5))
            .ok_or(Overflow("quartic invariants"))?;
        Ok((i, j))
    }

    /// Form discriminant, which satisfies 27 disc = 4 I^3 - J^2 exactly.
    pub fn disc(&self) -> Result<i128, Overflow> {
        let (i, j) = self.invariants()?;
        let i3 = mul(i, mul(i, i)?)?;
        let num = crate::arith::sub(mul(4, i3)?, mul(j, j)?)?;
        debug_assert_eq!(num % 27, 0);
        Ok(num / 27)
    }

    /// 4 * max(|I|^3, J^2 / 4) = max(4 |I|^3, J^2), the scaled height of the
    /// invariant pair.
    pub fn height_times_4(&self) -> Result<u128, Overflow> {
        let (i, j) = self.invariants()?;
        let ai = i.unsigned_abs();
        let i3 = ai
            .checked_mul(ai)
            .and_then(|v| v.checked_mul(ai))
            .and_then(|v| v.checked_mul(4))
            .ok_or(Overflow("quartic invariants"))?;
        let j2 = j
            .unsigned_abs()
            .checked_mul(j.unsigned_abs())
            .ok_or(Overflow("quartic invariants"))?;
        Ok(i3.max(j2))
    }

    /// Apply the substitution (x, y) -> (p x + q y, r x + s y).
    /// Composition contract: transform(transform(g, n), m) = transform(g, n * m).
    pub fn transform(&self, m: &Unimodular) -> Result<BinaryQuartic, Overflow> {
        // (p x + q y)^k coefficients, ascending in y.
        fn linpow(u: i128, v: i128, k: usize) -> Result<Vec<i128>, Overflow> {
            let mut out = vec![1i128];
            for _ in 0..k {
                let mut next = vec![0i128; out.len() + 1];
                for (i, &w) in out.iter().enumerate() {
                    next[i] = crate::arith::add(next[i], mul(w, u)?)?;
                    next[i + 1] = crate::arith::add(next[i + 1], mul(w, v)?)?;
                }
                out = next;
            }
            Ok(out)
        }
        let mut acc = [0i128; 5];
        let coeffs = self.coeffs();
        for (idx, &cf) in coeffs.iter().enumerate() {
            if cf == 0 {
                continue;
            }
            // x^(4-idx) y^idx picks up (p x + q y)^(4-idx) (r x + s y)^idx.
            let u = linpow(m.p, m.q, 4 - idx)?;
            let v = linpow(m.r, m.s, idx)?;
            for (i, &ui) in u.iter().enumerate() {
                for (j, &vj) in v.iter().enumerate() {
                    let term = mul(cf, mul(ui, vj)?)?;
                    acc[i + j] = crate::arith::add(acc[i + j], term)?;
                }
            }
        }
        Ok(BinaryQuartic::new(acc[0], acc[1], acc[2], acc[3], acc[4]))
    }

    /// Convenience for (x, y) -> (x + m y, y); sends b to b + 4 a m.
    pub fn translate(&self, m: i128) -> Result<BinaryQuartic, Overflow> {
        self.transform(&shift(m))
    }

    pub fn neg(&self) -> BinaryQuartic {
        BinaryQuartic::new(-self.a, -self.b, -self.c, -self.d, -self.e)
    }

    pub fn content(&self) -> i128 {
        let mut g = 0i128;
        for v in self.coeffs() {
            g = crate::arith::gcd_i128(g, v);
        }
        g
    }

    pub fn sup_norm(&self) -> i128 {
        self.coeffs().iter().map(|v| v.unsigned_abs()).max().unwrap() as i128
    }

    /// Dehomogenization g(x, 1) as an exact rational polynomial (ascending).
    pub fn dehomogenize(&self) -> QPoly {
        QPoly::from_int_slice(&[self.e, self.d, self.c, self.b, self.a])
    }

    /// Number of distinct real zeros in the projective line: distinct real
    /// roots of g(x, 1) plus the point at infinity when a = 0. For forms
    /// with nonzero discriminant this is 0, 2, or 4.
    pub fn real_root_count(&self) -> usize {
        let p = self.dehomogenize();
        let affine = if p.is_zero() { 0 } else { poly_real_roots(&p) };
        affine + usize::from(self.a == 0)
    }

    /// Whether g(x, 1) is an irreducible quartic over the rationals. Forms
    /// with a = 0 (a rational zero at infinity) report false.
    pub fn is_irreducible(&self) -> bool {
        if self.a == 0 {
            return false;
        }
        let ct = self.content();
        let (a, b, c, d, e) = (
            self.a / ct,
            self.b / ct,
            self.c / ct,
            self.d / ct,
            self.e / ct,
        );
        if e == 0 {
            return false; // rational root x = 0
        }
        // Rational roots u/v (lowest terms): u | e, v | a.
        for u in divisors(e) {
            for v in divisors(a) {
                if crate::arith::gcd_i128(u, v) != 1 {
                    continue;
                }
                for uu in [u, -u] {
                    // a u^4 + b u^3 v + c u^2 v^2 + d u v^3 + e v^4 = 0
                    let val = a * uu.pow(4)
                        + b * uu.pow(3) * v
                        + c * uu.pow(2) * v.pow(2)
                        + d * uu * v.pow(3)
                        + e * v.pow(4);
                    if val == 0 {
                        return false;
                    }
                }
            }
        }
        // Quadratic factorization over the integers:
        // (alpha x^2 + beta x + gamma)(delta x^2 + eps x + zeta).
        for alpha in divisors(a) {
            let delta = a / alpha;
            for gamma0 in divisors(e) {
                for gamma in [gamma0, -gamma0] {
                    let zeta = e / gamma;
                    // x^3: alpha eps + beta delta = b
                    // x^1: beta zeta + gamma eps = d
                    let det = delta * gamma - alpha * zeta;
                    if det != 0 {
                        let bn = b * gamma - alpha * d;
                        let en = delta * d - zeta * b;
                        if bn % det != 0 || en % det != 0 {
                            continue;
                        }
                        let beta = bn / det;
                        let eps = en / det;
                        if alpha * zeta + beta * eps + gamma * delta == c
                            && beta * zeta + gamma * eps == d
                        {
                            return false;
                        }
                    } else {
                        // Degenerate system: scan beta within a factor bound.
                        let norm2 = ((a * a + b * b + c * c + d * d + e * e) as f64).sqrt();
                        let bound = (4.0 * (1.0 + norm2)).ceil() as i128;
                        for beta in -bound..=bound {
                            let num = b - beta * delta;
                            if num % alpha != 0 {
                                continue;
                            }
                            let eps = num / alpha;
                            if alpha * zeta + beta * eps + gamma * delta == c
                                && beta * zeta + gamma * eps == d
                            {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }

    /// Whether the reduction mod p is a nonzero scalar times the square of a
    /// quadratic form. The identically-zero reduction reports false.
    pub fn is_overramified_at(&self, prime: u64) -> bool {
        let p = prime as u128;
        let pi = prime as i128;
        let red = |v: i128| -> u128 { v.rem_euclid(pi) as u128 };
        let cf = [red(self.a), red(self.b), red(self.c), red(self.d), red(self.e)];
        // k = multiplicity of y in the reduction.
        let k = match cf.iter().position(|&v| v != 0) {
            None => return false, // zero reduction
            Some(k) => k,
        };
        if k % 2 == 1 {
            return false;
        }
        if k == 4 {
            return true; // lambda y^4
        }
        let inv = |v: u128| powmod(v, p - 2, p);
        if k == 2 {
            // y^2 (c x^2 + d x y + e y^2): square iff the quadratic is a
            // scalar times a square, i.e. d^2 - 4 c e = 0 mod p.
            let (c, d, e) = (cf[2], cf[3], cf[4]);
            let m4ce = mulmod(4 % p, mulmod(c, e, p), p);
            let dd = mulmod(d, d, p);
            return (dd + p - m4ce) % p == 0;
        }
        // k = 0: monic normalization m(x) = x^4 + b3 x^3 + b2 x^2 + b1 x + b0.
        let ai = inv(cf[0]);
        let b3 = mulmod(cf[1], ai, p);
        let b2 = mulmod(cf[2], ai, p);
        let b1 = mulmod(cf[3], ai, p);
        let b0 = mulmod(cf[4], ai, p);
        if p == 2 {
            // Squares in F_2[x] have only even-degree terms.
            return b3 == 0 && b1 == 0;
        }
        // m = (x^2 + s x + t)^2 forces s = b3/2, t = (b2 - s^2)/2, then the
        // two remaining coefficients must match.
        let half = inv(2);
        let s = mulmod(b3, half, p);
        let t = mulmod((b2 + p - mulmod(s, s, p)) % p, half, p);
        let want_b1 = mulmod(2 % p, mulmod(s, t, p), p);
        let want_b0 = mulmod(t, t, p);
        want_b1 == b1 && want_b0 == b0
    }

    /// Whether no prime is overramified. Returns None when the discriminant
    /// cannot be fully factored within the budget. Only primes whose square
    /// divides the discriminant can be overramified, so square factors are
    /// what matters.
    pub fn nowhere_overramified(&self, rho_budget: u64) -> Result<Option<bool>, Overflow> {
        let disc = self.disc()?;
        assert!(disc != 0, "degenerate form");
        match factor(disc, rho_budget) {
            Factorization::Indeterminate => Ok(None),
            Factorization::Complete(pairs) => {
                for (prime, exp) in pairs {
                    if exp < 2 {
                        continue;
                    }
                    let p = u64::try_from(prime).map_err(|_| Overflow("prime exceeds u64"))?;
                    if self.is_overramified_at(p) {
                        return Ok(Some(false));
                    }
                }
                Ok(Some(true))
            }
        }
    }

    /// nowhere_overramified with the default factoring budget.
    pub fn nowhere_overramified_default(&self) -> Result<Option<bool>, Overflow> {
        self.nowhere_overramified(DEFAULT_RHO_BUDGET)
    }

    /// Overramification test against a precomputed prime list: true when none
    /// of the listed primes is overramified. The list must contain every prime
    /// whose square divides the discriminant; extra primes are harmless. This
    /// lets callers factor a shared discriminant once for many forms.
    pub fn nowhere_overramified_given(&self, square_primes: &[u64]) -> bool {
        square_primes.iter().all(|&p| !self.is_overramified_at(p))
    }
}

/// Positive divisors of |n| (n nonzero), unsorted.
fn divisors(n: i128) -> Vec<i128> {
    let n = n.unsigned_abs();
    assert!(n != 0);
    let mut out = Vec::new();
    let mut d = 1u128;
    while d * d <= n {
        if n % d == 0 {
            out.push(d as i128);
            if d != n / d {
                out.push((n / d) as i128);
            }
        }
        d += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::SplitMix64;

    fn q(a: i128, b: i128, c: i128, d: i128, e: i128) -> BinaryQuartic {
        BinaryQuartic::new(a, b, c, d, e)
    }

    #[test]
    fn invariants_and_disc() {
        let g = q(1, 0, 0, 0, 1); // x^4 + y^4
        assert_eq!(g.invariants().unwrap(), (12, 0));
        assert_eq!(g.disc().unwrap(), 256);
        let h = q(1, 0, 0, 0, -1); // x^4 - y^4
        assert_eq!(h.invariants().unwrap(), (-12, 0));
        assert_eq!(h.disc().unwrap(), -256);
    }

    #[test]
    fn transform_preserves_invariants_and_composes() {
        let mut rng = SplitMix64::new(7);
        let small = |r: &mut SplitMix64| (r.below(11) as i128) - 5;
        for _ in 0..200 {
            let g = q(
                small(&mut rng),
                small(&mut rng),
                small(&mut rng),
                small(&mut rng),
                small(&mut rng),
            );
            let m = shift((rng.below(7) as i128) - 3);
            let n = if rng.below(2) == 0 {
                inversion()
            } else {
                Unimodular::new(0, 1, 1, 0) // det -1 swap
            };
            let lhs = g.transform(&n).and_then(|h| h.transform(&m));
            let rhs = g.transform(&n.mul(&m));
            match (lhs, rhs) {
                (Ok(lh), Ok(rh)) => {
                    assert_eq!(lh, rh);
                    assert_eq!(g.invariants().unwrap(), lh.invariants().unwrap());
                }
                _ => {}
            }
        }
    }

    #[test]
    fn translate_shifts_b_by_4am() {
        let g = q(2, 1, 0, -3, 5);
        let h = g.translate(3).unwrap();
        assert_eq!(h.b, g.b + 4 * g.a * 3);
        assert_eq!(g.invariants().unwrap(), h.invariants().unwrap());
    }

    #[test]
    fn real_root_counts() {
        assert_eq!(q(1, 0, 0, 0, 1).real_root_count(), 0); // x^4 + y^4
        assert_eq!(q(1, 0, -5, 0, 4).real_root_count(), 4); // (x^2-1)(x^2-4)
        assert_eq!(q(1, 0, 0, 0, -1).real_root_count(), 2); // x^4 - y^4
        assert_eq!(q(0, 1, 0, -1, 0).real_root_count(), 4); // x y (x-y) (x+y)... roots 0, 1, -1, inf
    }

    #[test]
    fn irreducibility() {
        assert!(q(1, 0, 0, 0, 1).is_irreducible()); // x^4 + 1
        assert!(q(1, 0, 0, 0, -2).is_irreducible()); // x^4 - 2
        assert!(!q(1, 0, 0, 0, -1).is_irreducible()); // (x-1)(x+1)(x^2+1)
        assert!(!q(0, 1, 1, 1, 1).is_irreducible()); // a = 0
        assert!(!q(1, 2, 3, 2, 1).is_irreducible()); // (x^2+x+1)^2
        assert!(!q(1, 0, -5, 0, 4).is_irreducible()); // rational roots
        assert!(!q(1, 0, 0, 0, 4).is_irreducible()); // (x^2-2x+2)(x^2+2x+2)
        assert!(!q(2, 0, 0, 0, -2).is_irreducible()); // content 2, x^4 - 1
        assert!(q(1, 1, 1, 1, 1).is_irreducible()); // 5th cyclotomic
    }

    #[test]
    fn irreducibility_matches_root_structure() {
        // x^4 - 4x^2 + 2 is Eisenstein at 2: irreducible.
        assert!(q(1, 0, -4, 0, 2).is_irreducible());
    }

    #[test]
    fn overramified_examples() {
        let g = q(1, 0, 0, 0, 1); // x^4 + y^4
        assert!(g.is_overramified_at(2)); // (x + y)^4 mod 2
        assert!(!g.is_overramified_at(3));
        // y^2 (x^2 + y^2): square mod 2, not mod 3.
        let h = q(0, 0, 1, 0, 1);
        assert!(h.is_overramified_at(2));
        assert!(!h.is_overramified_at(3));
        // lambda y^4 pattern with p = 3.
        let k = q(3, 3, 3, 3, 1);
        assert!(k.is_overramified_at(3));
        // Odd y-multiplicity.
        assert!(!q(0, 1, 0, 0, 1).is_overramified_at(5));
        // Zero reduction.
        assert!(!q(3, 3, 3, 3, 3).is_overramified_at(3));
        // (x^2 + x + 1)^2 mod 5 from a lift.
        let sq = q(1, 2, 3, 2, 1);
        assert!(sq.is_overramified_at(5));
    }

    #[test]
    fn nowhere_overramified_examples() {
        // x^4 + y^4 is overramified at 2.
        assert_eq!(
            q(1, 0, 0, 0, 1).nowhere_overramified_default().unwrap(),
            Some(false)
        );
        // x^4 + x^3 y + x^2 y^2 + x y^3 + y^4: disc = 125, overramified at 5
        // iff the reduction is a scalar square; mod 5 it is (x+...)^4? Check
        // by the function itself against the prime factorization shape.
        let g = q(1, 1, 1, 1, 1);
        let disc = g.disc().unwrap();
        assert_eq!(disc, 125);
        assert_eq!(
            g.nowhere_overramified_default().unwrap(),
            Some(!g.is_overramified_at(5))
        );
    }

    #[test]
    fn overramified_implies_square_divides_disc() {
        let mut rng = SplitMix64::new(99);
        let small = |r: &mut SplitMix64| (r.below(15) as i128) - 7;
        let mut checked = 0u32;
        for _ in 0..3000 {
            let g = q(
                small(&mut rng),
                small(&mut rng),
                small(&mut rng),
                small(&mut rng),
                small(&mut rng),
            );
            let disc = match g.disc() {
                Ok(d) if d != 0 => d,
                _ => continue,
            };
            for p in [2u64, 3, 5, 7, 11, 13] {
                if g.is_overramified_at(p) {
                    let pp = (p as i128) * (p as i128);
                    assert_eq!(disc % pp, 0, "g={:?} p={}", g, p);
                    checked += 1;
                }
            }
        }
        assert!(checked > 20, "property test exercised too few cases");
    }

    #[test]
    fn serde_roundtrip() {
        let g = q(1, -2, 3, -4, 5);
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, "[1,-2,3,-4,5]");
        let back: BinaryQuartic = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }
}
