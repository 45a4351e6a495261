//! Small-degree polynomial arithmetic over prime fields F_p.
//!
//! Everything here works on degree <= 4 inputs; exponents only enter through
//! x^p computed by square-and-multiply modulo the input, so p may be large.

/// Dense polynomial over F_p, coefficients ascending, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpPoly {
    pub p: u64,
    pub c: Vec<u64>,
}

fn addm(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % p as u128) as u64
}

fn subm(a: u64, b: u64, p: u64) -> u64 {
    (((a as u128 + p as u128) - b as u128) % p as u128) as u64
}

fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn powm(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulm(acc, b, p);
        }
        b = mulm(b, b, p);
        e >>= 1;
    }
    acc
}

pub fn invm(a: u64, p: u64) -> u64 {
    // p prime, a != 0 mod p.
    powm(a, p - 2, p)
}

/// Reduce an integer into F_p.
pub fn red(v: i128, p: u64) -> u64 {
    v.rem_euclid(p as i128) as u64
}

impl FpPoly {
    pub fn new(p: u64, coeffs: &[i128]) -> Self {
        let mut c: Vec<u64> = coeffs.iter().map(|&v| red(v, p)).collect();
        while c.last() == Some(&0) {
            c.pop();
        }
        Self { p, c }
    }

    pub fn from_u64(p: u64, coeffs: &[u64]) -> Self {
        let mut c: Vec<u64> = coeffs.iter().map(|&v| v % p).collect();
        while c.last() == Some(&0) {
            c.pop();
        }
        Self { p, c }
    }

    pub fn zero(p: u64) -> Self {
        Self { p, c: vec![] }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, with deg 0 for nonzero constants; panics on the zero polynomial.
    pub fn deg(&self) -> usize {
        assert!(!self.c.is_empty(), "degree of zero polynomial");
        self.c.len() - 1
    }

    pub fn lead(&self) -> u64 {
        *self.c.last().expect("lead of zero polynomial")
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = invm(self.lead(), self.p);
        Self {
            p: self.p,
            c: self.c.iter().map(|&v| mulm(v, inv, self.p)).collect(),
        }
    }

    pub fn eval(&self, x: u64) -> u64 {
        let mut acc = 0u64;
        for &co in self.c.iter().rev() {
            acc = addm(mulm(acc, x, self.p), co, self.p);
        }
        acc
    }

    pub fn deriv(&self) -> Self {
        if self.c.len() <= 1 {
            return Self::zero(self.p);
        }
        let mut c: Vec<u64> = self
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &v)| mulm(v, (k as u64) % self.p, self.p))
            .collect();
        while c.last() == Some(&0) {
            c.pop();
        }
        Self { p: self.p, c }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.p);
        }
        let mut c = vec![0u64; self.c.len() + other.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in other.c.iter().enumerate() {
                c[i + j] = addm(c[i + j], mulm(a, b, self.p), self.p);
            }
        }
        Self::from_u64(self.p, &c)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.c.len().max(other.c.len());
        let mut c = vec![0u64; n];
        for i in 0..n {
            let a = self.c.get(i).copied().unwrap_or(0);
            let b = other.c.get(i).copied().unwrap_or(0);
            c[i] = subm(a, b, self.p);
        }
        Self::from_u64(self.p, &c)
    }

    /// (quotient, remainder) with divisor != 0.
    pub fn divmod(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let p = self.p;
        let dl = invm(divisor.lead(), p);
        let dd = divisor.deg();
        let mut rem = self.c.clone();
        let mut quo = vec![0u64; rem.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1 - dd;
            let coef = mulm(*rem.last().unwrap(), dl, p);
            if coef != 0 {
                quo[k] = coef;
                for (i, &dv) in divisor.c.iter().enumerate() {
                    rem[k + i] = subm(rem[k + i], mulm(coef, dv, p), p);
                }
            }
            rem.pop();
            while rem.last() == Some(&0) {
                rem.pop();
            }
            if rem.len() <= dd {
                break;
            }
        }
        (Self::from_u64(p, &quo), Self::from_u64(p, &rem))
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.divmod(divisor).1
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    /// x^e modulo self (self must have degree >= 1).
    pub fn pow_x_mod(&self, e: u64) -> Self {
        let p = self.p;
        let x = Self::from_u64(p, &[0, 1]);
        let mut base = x.rem(self);
        let mut acc = Self::from_u64(p, &[1]);
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(self);
            }
            base = base.mul(&base).rem(self);
            e >>= 1;
        }
        acc
    }

    /// gcd(x^p - x, self): the product of the distinct linear factors.
    pub fn distinct_root_part(&self) -> Self {
        let p = self.p;
        let xp = self.pow_x_mod(p);
        let x = FpPoly::from_u64(p, &[0, 1]).rem(self);
        let diff = xp.sub(&x);
        self.gcd(&diff)
    }

    /// All roots in F_p with multiplicities, in ascending root order.
    pub fn roots_with_multiplicity(&self) -> Vec<(u64, u32)> {
        assert!(!self.is_zero());
        let p = self.p;
        let mut roots: Vec<u64> = if (p < 1 << 12) || self.deg() as u64 >= p {
            (0..p).filter(|&x| self.eval(x) == 0).collect()
        } else {
            let s = self.distinct_root_part();
            roots_of_splitting(&s)
        };
        roots.sort_unstable();
        let mut out = Vec::new();
        for r in roots {
            let mut m = 0u32;
            let mut f = self.clone();
            let lin = FpPoly::from_u64(p, &[subm(0, r, p), 1]);
            loop {
                let (q, rem) = f.divmod(&lin);
                if !rem.is_zero() {
                    break;
                }
                m += 1;
                f = q;
                if f.is_zero() {
                    break;
                }
            }
            debug_assert!(m >= 1);
            out.push((r, m));
        }
        out
    }
}

/// Roots of a squarefree product of linear factors (monic, deg <= 4).
fn roots_of_splitting(s: &FpPoly) -> Vec<u64> {
    let p = s.p;
    if s.is_zero() || s.deg() == 0 {
        return vec![];
    }
    match s.deg() {
        1 => vec![subm(0, mulm(s.c[0], invm(s.c[1], p), p), p)],
        2 => {
            let m = s.monic();
            quadratic_roots(m.c[1], m.c[0], p)
        }
        _ => {
            // Deterministic Cantor-Zassenhaus split via shifts x -> x + delta.
            for delta in 0..p {
                let shifted = compose_shift(s, delta);
                let w = shifted.pow_x_mod((p - 1) / 2);
                let one = FpPoly::from_u64(p, &[1]);
                let g = shifted.gcd(&w.sub(&one));
                if !g.is_zero() && g.deg() >= 1 && g.deg() < shifted.deg() {
                    let (h, r) = shifted.divmod(&g);
                    debug_assert!(r.is_zero());
                    let mut roots = roots_of_splitting(&g);
                    roots.extend(roots_of_splitting(&h));
                    // Undo the shift: root of shifted at t means t - delta for s.
                    return roots.into_iter().map(|t| subm(t, delta, p)).collect();
                }
            }
            unreachable!("a splitting polynomial of degree >= 2 always splits under some shift");
        }
    }
}

/// s(x + delta).
fn compose_shift(s: &FpPoly, delta: u64) -> FpPoly {
    let p = s.p;
    let mut acc = FpPoly::zero(p);
    let shift = FpPoly::from_u64(p, &[delta, 1]);
    for &co in s.c.iter().rev() {
        acc = acc.mul(&shift);
        acc = acc.sub(&FpPoly::from_u64(p, &[subm(0, co, p)]));
    }
    acc
}

/// Roots of x^2 + bx + c over F_p (monic input).
pub fn quadratic_roots(b: u64, c: u64, p: u64) -> Vec<u64> {
    if p == 2 {
        return (0..2).filter(|&x| addm(mulm(x, x, 2), addm(mulm(b, x, 2), c, 2), 2) == 0).collect();
    }
    let disc = subm(mulm(b, b, p), mulm(4 % p, c, p), p);
    match sqrt_mod(disc, p) {
        None => vec![],
        Some(r) => {
            let inv2 = invm(2, p);
            let mb = subm(0, b, p);
            let mut roots = vec![mulm(addm(mb, r, p), inv2, p), mulm(subm(mb, r, p), inv2, p)];
            roots.sort_unstable();
            roots.dedup();
            roots
        }
    }
}

/// Tonelli-Shanks square root mod an odd prime; None for non-residues.
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if powm(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(powm(a, (p + 1) / 4, p));
    }
    // Find a quadratic non-residue deterministically.
    let mut z = 2;
    while powm(z, (p - 1) / 2, p) == 1 {
        z += 1;
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q & 1 == 0 {
        q >>= 1;
        s += 1;
    }
    let mut m = s;
    let mut c = powm(z, q, p);
    let mut t = powm(a, q, p);
    let mut r = powm(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0u32;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mulm(t2, t2, p);
            i += 1;
        }
        let b = powm(c, 1 << (m - i - 1), p);
        m = i;
        c = mulm(b, b, p);
        t = mulm(t, c, p);
        r = mulm(r, b, p);
    }
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divmod_roundtrip() {
        let p = 101;
        let f = FpPoly::new(p, &[3, 1, 4, 1, 5]);
        let g = FpPoly::new(p, &[2, 7, 1]);
        let (q, r) = f.divmod(&g);
        let sum = q.mul(&g);
        let mut s = sum.c.clone();
        for (i, &rc) in r.c.iter().enumerate() {
            if i < s.len() {
                s[i] = addm(s[i], rc, p);
            } else {
                s.push(rc);
            }
        }
        assert_eq!(FpPoly::from_u64(p, &s), f);
    }

    #[test]
    fn roots_various_primes() {
        // (x-3)^2 (x-5) over F_7
        let p = 7;
        let f = FpPoly::new(p, &[-45, 39, -11, 1]);
        assert_eq!(f.roots_with_multiplicity(), vec![(3, 2), (5, 1)]);

        // x^2 + 1 over F_13 has roots 5, 8.
        let g = FpPoly::new(13, &[1, 0, 1]);
        assert_eq!(g.roots_with_multiplicity(), vec![(5, 1), (8, 1)]);

        // Large prime path: x^3 - 2 over p = 1e9+7 (exercises CZ splitting).
        let p = 1_000_000_007u64;
        let h = FpPoly::new(p, &[-2, 0, 0, 1]);
        let roots = h.roots_with_multiplicity();
        for (r, m) in &roots {
            assert_eq!(*m, 1);
            assert_eq!(powm(*r, 3, p), 2);
        }
        assert!(matches!(roots.len(), 1 | 3));
    }

    #[test]
    fn sqrt_mod_consistency() {
        for p in [3u64, 5, 13, 17, 97, 1_000_000_007] {
            let mut count = 0;
            for a in 1..30.min(p) {
                if let Some(r) = sqrt_mod(a, p) {
                    assert_eq!(mulm(r, r, p), a % p);
                    count += 1;
                }
            }
            assert!(count > 0);
        }
    }
}
