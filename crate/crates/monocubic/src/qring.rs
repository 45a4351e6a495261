//! Quartic rings of integral binary quartic forms with nonzero leading
//! coefficient: exact structure constants on the standard triangular basis,
//! and a p-maximality test via the radical and its multiplier ring modulo p.

use crate::arith::{factor, mulmod, Factorization, Overflow};
use crate::quartic::BinaryQuartic;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Rank-four commutative ring presented by integer structure constants on a
/// basis (1, w1, w2, w3): w_i w_j = sum_k table[i][j][k] w_k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuarticRing {
    table: [[[BigInt; 4]; 4]; 4],
    disc: i128,
}

fn br(v: i128) -> BigRational {
    BigRational::from(BigInt::from(v))
}

/// The ring attached to a binary quartic with nonzero leading coefficient:
/// for a root theta of g(x, 1), the lattice with basis
///
///   1,  a theta,  a theta^2 + b theta,  a theta^3 + b theta^2 + c theta
///
/// is closed under multiplication and has discriminant equal to disc(g)
/// (asserted here); it is equivariant under unimodular substitution, so its
/// p-maximality is an orbit invariant. The structure constants are computed
/// by exact rational arithmetic and checked to be integers.
pub fn ring_of_form(g: &BinaryQuartic) -> Result<QuarticRing, Overflow> {
    assert!(g.a != 0, "quartic ring needs a nonzero leading coefficient");
    let disc = g.disc()?;
    assert!(disc != 0, "degenerate form");
    let [a, b, c, d, e] = g.coeffs().map(br);

    // theta^4, theta^5, theta^6 in the power basis (1, theta, theta^2, theta^3).
    let mut red: Vec<Vec<BigRational>> = Vec::new();
    red.push(vec![-&e / &a, -&d / &a, -&c / &a, -&b / &a]);
    for k in 1..3 {
        let prev = red[k - 1].clone();
        let mut next = vec![BigRational::zero(); 4];
        for (pos, val) in prev.iter().take(3).enumerate() {
            next[pos + 1] = val.clone();
        }
        let top = prev[3].clone();
        for (pos, val) in red[0].iter().enumerate() {
            next[pos] += &top * val;
        }
        red.push(next);
    }

    // Basis elements in the power basis.
    let zero = BigRational::zero();
    let one = BigRational::from(BigInt::from(1));
    let basis: [Vec<BigRational>; 4] = [
        vec![one.clone(), zero.clone(), zero.clone(), zero.clone()],
        vec![zero.clone(), a.clone(), zero.clone(), zero.clone()],
        vec![zero.clone(), b.clone(), a.clone(), zero.clone()],
        vec![zero.clone(), c.clone(), b.clone(), a.clone()],
    ];

    let to_int = |x: &BigRational| -> BigInt {
        assert!(x.is_integer(), "structure constants must be integral");
        x.to_integer()
    };

    let table: [[[BigInt; 4]; 4]; 4] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            // Multiply basis[i] * basis[j] in the power basis (degree <= 6).
            let mut prod = vec![BigRational::zero(); 7];
            for (pi, vi) in basis[i].iter().enumerate() {
                if vi.is_zero() {
                    continue;
                }
                for (pj, vj) in basis[j].iter().enumerate() {
                    prod[pi + pj] += vi * vj;
                }
            }
            // Reduce degrees 6, 5, 4 through the powers of theta.
            for deg in (4..=6).rev() {
                let coef = std::mem::replace(&mut prod[deg], BigRational::zero());
                if coef.is_zero() {
                    continue;
                }
                for (pos, val) in red[deg - 4].iter().enumerate() {
                    prod[pos] += &coef * val;
                }
            }
            // Convert to the triangular basis.
            let x3 = &prod[3] / &a;
            let x2 = (&prod[2] - &b * &x3) / &a;
            let x1 = (&prod[1] - &b * &x2 - &c * &x3) / &a;
            let x0 = prod[0].clone();
            [to_int(&x0), to_int(&x1), to_int(&x2), to_int(&x3)]
        })
    });

    // Internal checks: 1 is the identity, the table is symmetric, and the
    // trace form has determinant disc(g).
    for j in 0..4 {
        for k in 0..4 {
            assert_eq!(
                table[0][j][k],
                BigInt::from((j == k) as u32),
                "identity row is off"
            );
        }
    }
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(table[i][j], table[j][i], "commutativity is off");
        }
    }
    let ring = QuarticRing { table, disc };
    assert_eq!(
        ring.trace_form_determinant(),
        BigInt::from(disc),
        "ring discriminant must equal the form discriminant"
    );
    Ok(ring)
}

fn det4(m: &[[BigInt; 4]; 4]) -> BigInt {
    // Laplace expansion along the first row with 3x3 cofactors.
    let det3 = |r: [usize; 3], c: [usize; 3]| -> BigInt {
        let e = |i: usize, j: usize| &m[r[i]][c[j]];
        e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
            - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
            + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
    };
    let rows = [1, 2, 3];
    let mut acc = BigInt::zero();
    for j in 0..4 {
        let cols: [usize; 3] = match j {
            0 => [1, 2, 3],
            1 => [0, 2, 3],
            2 => [0, 1, 3],
            _ => [0, 1, 2],
        };
        let term = &m[0][j] * det3(rows, cols);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Gaussian elimination mod p: basis of the right kernel of the given rows.
fn kernel_mod_p(rows: &[[u64; 4]], p: u64) -> Vec<[u64; 4]> {
    let inv = |v: u64| -> u64 { crate::arith::powmod(v as u128, (p - 2) as u128, p as u128) as u64 };
    let mut m: Vec<[u64; 4]> = rows.iter().map(|r| r.map(|v| v % p)).collect();
    let mut pivot_of_col: [Option<usize>; 4] = [None; 4];
    let mut rank_row = 0usize;
    for col in 0..4 {
        let Some(sel) = (rank_row..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank_row, sel);
        let iv = inv(m[rank_row][col]);
        for v in m[rank_row].iter_mut() {
            *v = mulmod(*v as u128, iv as u128, p as u128) as u64;
        }
        for r in 0..m.len() {
            if r != rank_row && m[r][col] != 0 {
                let f = m[r][col];
                for cc in 0..4 {
                    let sub = mulmod(f as u128, m[rank_row][cc] as u128, p as u128) as u64;
                    m[r][cc] = (m[r][cc] + p - sub) % p;
                }
            }
        }
        pivot_of_col[col] = Some(rank_row);
        rank_row += 1;
    }
    let mut basis = Vec::new();
    for free in 0..4 {
        if pivot_of_col[free].is_some() {
            continue;
        }
        let mut t = [0u64; 4];
        t[free] = 1;
        for col in 0..4 {
            if let Some(r) = pivot_of_col[col] {
                t[col] = (p - m[r][free] % p) % p;
            }
        }
        basis.push(t);
    }
    basis
}

/// Column-style Hermite normal form of a full-rank 4D lattice given by
/// generator columns: returns the upper-triangular basis matrix H with
/// positive diagonal and off-diagonal entries reduced modulo the diagonal,
/// H[r][c] = 0 for r > c.
fn hnf4(mut cols: Vec<[i128; 4]>) -> [[i128; 4]; 4] {
    let mut h = [[0i128; 4]; 4];
    for row in (0..4).rev() {
        loop {
            let mut nz: Vec<usize> = (0..cols.len()).filter(|&i| cols[i][row] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            nz.sort_by_key(|&i| cols[i][row].unsigned_abs());
            let (i0, i1) = (nz[0], nz[1]);
            let q = cols[i1][row] / cols[i0][row];
            for r in 0..4 {
                cols[i1][r] -= q * cols[i0][r];
            }
        }
        let Some(i) = (0..cols.len()).find(|&i| cols[i][row] != 0) else {
            panic!("lattice generators are not full rank");
        };
        let mut col = cols.remove(i);
        if col[row] < 0 {
            for v in col.iter_mut() {
                *v = -*v;
            }
        }
        for (r, v) in col.iter().enumerate() {
            h[r][row] = *v;
        }
    }
    // Reduce entries to the right of each pivot.
    for r in 0..4 {
        for c2 in r + 1..4 {
            let q = h[r][c2].div_euclid(h[r][r]);
            if q != 0 {
                for rr in 0..4 {
                    h[rr][c2] -= q * h[rr][r];
                }
            }
        }
    }
    h
}

impl QuarticRing {
    pub fn disc(&self) -> i128 {
        self.disc
    }

    fn trace_form_determinant(&self) -> BigInt {
        // trace of multiplication by w_i
        let tr: [BigInt; 4] =
            std::array::from_fn(|i| (0..4).map(|k| self.table[i][k][k].clone()).sum());
        let gram: [[BigInt; 4]; 4] = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                (0..4)
                    .map(|k| &self.table[i][j][k] * &tr[k])
                    .sum::<BigInt>()
            })
        });
        det4(&gram)
    }

    /// Product in the ring of two coordinate vectors.
    fn mul_big(&self, x: &[BigInt; 4], y: &[BigInt; 4]) -> [BigInt; 4] {
        let mut out: [BigInt; 4] = std::array::from_fn(|_| BigInt::zero());
        for i in 0..4 {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..4 {
                if y[j].is_zero() {
                    continue;
                }
                let f = &x[i] * &y[j];
                for k in 0..4 {
                    if !self.table[i][j][k].is_zero() {
                        out[k] += &f * &self.table[i][j][k];
                    }
                }
            }
        }
        out
    }

    /// Whether the ring is maximal at p (p prime): computes the radical of
    /// R/pR through the Frobenius, then the multiplier ring of its preimage;
    /// R is p-maximal exactly when that ring is R itself.
    pub fn is_maximal_at(&self, p: u64) -> bool {
        assert!(p >= 2);
        let pu = p as u128;
        // Structure constants mod p.
        let pb = BigInt::from(p);
        let tp: [[[u64; 4]; 4]; 4] = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                std::array::from_fn(|k| {
                    let m = &self.table[i][j][k] % &pb;
                    let m = if m.is_negative() { m + &pb } else { m };
                    m.to_u64().expect("residue fits")
                })
            })
        });
        let mulp = |x: &[u64; 4], y: &[u64; 4]| -> [u64; 4] {
            let mut out = [0u64; 4];
            for i in 0..4 {
                if x[i] == 0 {
                    continue;
                }
                for j in 0..4 {
                    if y[j] == 0 {
                        continue;
                    }
                    let f = mulmod(x[i] as u128, y[j] as u128, pu);
                    for k in 0..4 {
                        if tp[i][j][k] != 0 {
                            let t = mulmod(f, tp[i][j][k] as u128, pu);
                            out[k] = ((out[k] as u128 + t) % pu) as u64;
                        }
                    }
                }
            }
            out
        };
        // x^(p^r) with p^r >= 4 kills exactly the nilpotents (dimension 4).
        let exp: u128 = if p >= 5 { pu } else { pu * pu };
        let powp = |x: &[u64; 4]| -> [u64; 4] {
            let mut base = *x;
            let mut acc = [1u64, 0, 0, 0];
            let mut e = exp;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mulp(&acc, &base);
                }
                base = mulp(&base, &base);
                e >>= 1;
            }
            acc
        };
        // Rows of the Frobenius-power map; kernel = radical of R/pR.
        let images: [[u64; 4]; 4] = std::array::from_fn(|i| {
            let mut v = [0u64; 4];
            v[i] = 1;
            powp(&v)
        });
        let map_rows: Vec<[u64; 4]> = (0..4)
            .map(|r| std::array::from_fn(|i| images[i][r]))
            .collect();
        let rad = kernel_mod_p(&map_rows, p);
        if rad.is_empty() {
            // R/pR is semisimple, so R is p-maximal.
            return true;
        }
        // Preimage lattice I_p of the radical, as an HNF basis.
        let pi = p as i128;
        let mut gens: Vec<[i128; 4]> = Vec::new();
        for r in 0..4 {
            let mut v = [0i128; 4];
            v[r] = pi;
            gens.push(v);
        }
        for t in &rad {
            gens.push(t.map(|v| v as i128));
        }
        let h = hnf4(gens);
        let hcols: [[BigInt; 4]; 4] =
            std::array::from_fn(|c| std::array::from_fn(|r| BigInt::from(h[r][c])));
        // phi(v) = H^{-1} v mod p for v in I_p (exact triangular backsolve).
        let phi = |v: &[BigInt; 4]| -> [u64; 4] {
            let mut z: [BigInt; 4] = std::array::from_fn(|_| BigInt::zero());
            for row in (0..4).rev() {
                let mut acc = v[row].clone();
                for c2 in row + 1..4 {
                    acc -= BigInt::from(h[row][c2]) * &z[c2];
                }
                let hb = BigInt::from(h[row][row]);
                assert!((&acc % &hb).is_zero(), "backsolve must be exact");
                z[row] = acc / hb;
            }
            std::array::from_fn(|r| {
                let m = &z[r] % &pb;
                let m = if m.is_negative() { m + &pb } else { m };
                m.to_u64().expect("residue fits")
            })
        };
        // Conditions on t in F_p^4 for y = H t to multiply I_p into p I_p:
        // for every generator pair, sum_i t_i phi(h_i h_j) = 0.
        let mut rows: Vec<[u64; 4]> = Vec::new();
        for j in 0..4 {
            let mut cols_phi = [[0u64; 4]; 4];
            for (i, slot) in cols_phi.iter_mut().enumerate() {
                let prod = self.mul_big(&hcols[i], &hcols[j]);
                *slot = phi(&prod);
            }
            for r in 0..4 {
                rows.push(std::array::from_fn(|i| cols_phi[i][r]));
            }
        }
        let sols = kernel_mod_p(&rows, p);
        // U = p I_p + H * solutions; R is maximal iff U = p R.
        let mut ucols: Vec<[i128; 4]> = Vec::new();
        for c in 0..4 {
            ucols.push(std::array::from_fn(|r| pi * h[r][c]));
        }
        for t in &sols {
            let mut y = [0i128; 4];
            for (c, tc) in t.iter().enumerate() {
                for r in 0..4 {
                    y[r] += h[r][c] * (*tc as i128);
                }
            }
            ucols.push(y);
        }
        let u = hnf4(ucols);
        let mut expected = [[0i128; 4]; 4];
        for (r, row) in expected.iter_mut().enumerate() {
            row[r] = pi;
        }
        u == expected
    }

    /// Whether the ring is maximal at every prime whose square divides the
    /// discriminant (p-maximality is automatic elsewhere). None when the
    /// discriminant cannot be factored within the budget.
    pub fn is_maximal(&self, rho_budget: u64) -> Result<Option<bool>, Overflow> {
        match factor(self.disc, rho_budget) {
            Factorization::Indeterminate => Ok(None),
            Factorization::Complete(pairs) => {
                for (prime, exp) in pairs {
                    if exp < 2 {
                        continue;
                    }
                    let p = u64::try_from(prime).map_err(|_| Overflow("prime exceeds u64"))?;
                    if !self.is_maximal_at(p) {
                        return Ok(Some(false));
                    }
                }
                Ok(Some(true))
            }
        }
    }

    /// is_maximal against a precomputed list of primes covering every square
    /// divisor of the discriminant.
    pub fn is_maximal_given(&self, square_primes: &[u64]) -> bool {
        square_primes.iter().all(|&p| self.is_maximal_at(p))
    }
}
