//! Exact integer helpers used throughout: overflow-checked i128 arithmetic,
//! integer roots, and deterministic factorization with an explicit budget.

/// Error raised when an intermediate value leaves the i128 range.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("integer overflow in {0}")]
pub struct Overflow(pub &'static str);

pub fn mul(a: i128, b: i128) -> Result<i128, Overflow> {
    a.checked_mul(b).ok_or(Overflow("mul"))
}

pub fn add(a: i128, b: i128) -> Result<i128, Overflow> {
    a.checked_add(b).ok_or(Overflow("add"))
}

pub fn sub(a: i128, b: i128) -> Result<i128, Overflow> {
    a.checked_sub(b).ok_or(Overflow("sub"))
}

/// Floor of the square root of a non-negative integer.
pub fn isqrt(n: u128) -> u128 {
    if n == 0 {
        return 0;
    }
    // Newton iteration from a float seed; exact fix-up at the end.
    let mut x = (n as f64).sqrt() as u128;
    if x == 0 {
        x = 1;
    }
    loop {
        let y = (x + n / x) / 2;
        if y >= x {
            break;
        }
        x = y;
    }
    while x.checked_mul(x).map_or(true, |s| s > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).map_or(false, |s| s <= n) {
        x += 1;
    }
    x
}

/// Squares-only residue table mod N: `table[n % N]` is false for every
/// non-residue, so most non-squares are rejected with a lookup instead of a
/// root extraction.
const fn square_residues<const N: usize>() -> [bool; N] {
    let mut t = [false; N];
    let mut k = 0;
    while k < N {
        t[(k * k) % N] = true;
        k += 1;
    }
    t
}

const SQ_MOD_64: [bool; 64] = square_residues::<64>();
const SQ_MOD_63: [bool; 63] = square_residues::<63>();
const SQ_MOD_65: [bool; 65] = square_residues::<65>();
const SQ_MOD_11: [bool; 11] = square_residues::<11>();

/// Cheap necessary condition for being a perfect square: the residue filters
/// pass about 1% of uniformly random non-squares.
#[inline]
fn square_candidate_u64(n: u64) -> bool {
    SQ_MOD_64[(n & 63) as usize]
        && SQ_MOD_63[(n % 63) as usize]
        && SQ_MOD_65[(n % 65) as usize]
        && SQ_MOD_11[(n % 11) as usize]
}

#[inline]
fn square_candidate_u128(n: u128) -> bool {
    match u64::try_from(n) {
        Ok(v) => square_candidate_u64(v),
        Err(_) => {
            SQ_MOD_64[(n & 63) as usize]
                && SQ_MOD_63[(n % 63) as usize]
                && SQ_MOD_65[(n % 65) as usize]
                && SQ_MOD_11[(n % 11) as usize]
        }
    }
}

/// Floor of the square root, u64 domain (float seed is within one step of
/// the truth for every input below 2^53, and the fix-ups are exact).
#[inline]
pub fn isqrt_u64(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).map_or(true, |s| s > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).map_or(false, |s| s <= n) {
        x += 1;
    }
    x
}

/// Exact square root when `n` is a perfect square.
pub fn perfect_sqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    if !square_candidate_u128(n as u128) {
        return None;
    }
    let r = isqrt(n as u128) as i128;
    (r * r == n).then_some(r)
}

/// Exact square root when `n` is a perfect square, i64 domain.
#[inline]
pub fn perfect_sqrt_i64(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    if !square_candidate_u64(n as u64) {
        return None;
    }
    let r = isqrt_u64(n as u64) as i64;
    (r * r == n).then_some(r)
}

/// Floor of the cube root (sign-preserving: `icbrt(-8) = -2`).
pub fn icbrt(n: i128) -> i128 {
    if n < 0 {
        // Floor for negatives: -ceil(cbrt(-n)).
        let m = n.unsigned_abs();
        let r = ucbrt(m);
        let r = if r * r * r == m { r } else { r + 1 };
        return -(r as i128);
    }
    ucbrt(n as u128) as i128
}

fn ucbrt(n: u128) -> u128 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).cbrt() as u128;
    if x == 0 {
        x = 1;
    }
    loop {
        // Newton step for cube roots, then exact fix-up.
        let x2 = x * x;
        let y = (2 * x + n / x2) / 3;
        if y >= x {
            break;
        }
        x = y;
    }
    while x.checked_mul(x).and_then(|s| s.checked_mul(x)).map_or(true, |c| c > n) {
        x -= 1;
    }
    while (x + 1)
        .checked_mul(x + 1)
        .and_then(|s| s.checked_mul(x + 1))
        .map_or(false, |c| c <= n)
    {
        x += 1;
    }
    x
}

pub fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i128
}

/// `a*b mod m` without overflow for any `m < 2^127`.
pub fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    if let Some(p) = a.checked_mul(b) {
        return p % m;
    }
    // Double-and-add fallback; sound for m < 2^127 since operands stay < m.
    let (mut a, mut b, mut acc) = (a % m, b % m, 0u128);
    while b > 0 {
        if b & 1 == 1 {
            acc = (acc + a) % m;
        }
        a = (a + a) % m;
        b >>= 1;
    }
    acc
}

pub fn powmod(mut b: u128, mut e: u128, m: u128) -> u128 {
    let mut acc = 1u128 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, valid for all n < 3.3e24 with this base set.
pub fn is_prime(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for a in [2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Outcome of factoring with a bounded effort.
/// Deterministic 64-bit generator (splitmix64). Hand-rolled so that seeded
/// runs are byte-identical across platforms and dependency upgrades, which
/// the reproducibility guarantees require.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform value in [0, bound) by rejection; bound must be nonzero.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factorization {
    /// Sorted list of (prime, exponent) pairs.
    Complete(Vec<(i128, u32)>),
    /// Budget exhausted before a full factorization was certified.
    Indeterminate,
}

/// Factor |n| by trial division to 1e6 and Brent's rho with a step budget.
/// n must be nonzero; the sign is discarded.
pub fn factor(n: i128, rho_budget: u64) -> Factorization {
    assert!(n != 0, "factor(0) is undefined");
    let mut m = n.unsigned_abs();
    let mut out: Vec<(i128, u32)> = Vec::new();
    let push = |p: u128, out: &mut Vec<(i128, u32)>| {
        let p = p as i128;
        match out.iter_mut().find(|(q, _)| *q == p) {
            Some((_, e)) => *e += 1,
            None => out.push((p, 1)),
        }
    };
    let mut d = 2u128;
    while d <= 1_000_000 && d * d <= m {
        while m % d == 0 {
            push(d, &mut out);
            m /= d;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        // Remaining cofactor has no prime factor <= 1e6.
        let mut stack = vec![m];
        let mut steps_left = rho_budget;
        while let Some(c) = stack.pop() {
            if c == 1 {
                continue;
            }
            if is_prime(c) {
                push(c, &mut out);
                continue;
            }
            if let Some(r) = perfect_sqrt(c as i128) {
                stack.push(r as u128);
                stack.push(r as u128);
                continue;
            }
            match brent_rho(c, &mut steps_left) {
                Some(f) => {
                    stack.push(f);
                    stack.push(c / f);
                }
                None => return Factorization::Indeterminate,
            }
        }
    }
    out.sort_unstable();
    Factorization::Complete(out)
}

/// Brent's cycle-finding variant of Pollard rho. Deterministic: the
/// polynomial increment walks 1, 2, 3, ... until a factor splits off.
fn brent_rho(n: u128, steps_left: &mut u64) -> Option<u128> {
    debug_assert!(n > 1 && !is_prime(n) && n % 2 == 1);
    for c in 1u128.. {
        let f = |x: u128| (mulmod(x, x, n) + c) % n;
        let (mut x, mut ys) = (2u128, 2u128);
        let (mut y, mut d) = (2u128, 1u128);
        let mut r = 1u64;
        let m = 128u64;
        while d == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0u64;
            while k < r && d == 1 {
                ys = y;
                let mut q = 1u128;
                for _ in 0..m.min(r - k) {
                    if *steps_left == 0 {
                        return None;
                    }
                    *steps_left -= 1;
                    y = f(y);
                    q = mulmod(q, x.abs_diff(y), n);
                }
                d = gcd_u128(q, n);
                k += m;
            }
            r *= 2;
        }
        if d == n {
            // Backtrack one-by-one from the saved point.
            loop {
                if *steps_left == 0 {
                    return None;
                }
                *steps_left -= 1;
                ys = f(ys);
                d = gcd_u128(x.abs_diff(ys), n);
                if d > 1 {
                    break;
                }
            }
        }
        if d != n {
            return Some(d);
        }
        // Degenerate cycle for this increment; try the next one.
    }
    unreachable!()
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isqrt_exact_at_boundaries() {
        for n in 0u128..2000 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n, "n={n}");
        }
        let big = u128::MAX;
        let r = isqrt(big);
        assert!(r * r <= big);
        assert!(r.checked_mul(r).is_some());
    }

    #[test]
    fn icbrt_signs() {
        assert_eq!(icbrt(-8), -2);
        assert_eq!(icbrt(-9), -3);
        assert_eq!(icbrt(27), 3);
        assert_eq!(icbrt(26), 2);
        for n in -500i128..500 {
            let r = icbrt(n);
            assert!(r * r * r <= n && (r + 1) * (r + 1) * (r + 1) > n, "n={n}");
        }
    }

    #[test]
    fn primality_small() {
        let primes: Vec<u128> = (2..200).filter(|&n| is_prime(n)).collect();
        assert_eq!(&primes[..8], &[2, 3, 5, 7, 11, 13, 17, 19]);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1_000_000_007u128 * 998_244_353));
    }

    #[test]
    fn factor_complete() {
        match factor(-2012, 1 << 20) {
            Factorization::Complete(f) => assert_eq!(f, vec![(2, 2), (503, 1)]),
            _ => panic!(),
        }
        match factor(1_000_003i128 * 1_000_033, 1 << 20) {
            Factorization::Complete(f) => assert_eq!(f, vec![(1_000_003, 1), (1_000_033, 1)]),
            _ => panic!(),
        }
    }
}
