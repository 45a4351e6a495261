//! Field-level classification of a monic cubic form: irreducibility over Q,
//! maximality of Z[theta] via Dedekind's criterion, Galois type (S3 vs C3),
//! and signature from the discriminant sign.

use crate::arith::{factor, perfect_sqrt, Factorization, Overflow};
use crate::cubic::MonicCubic;
use crate::fp::FpPoly;

/// Default step budget handed to the rho factorizer when classifying.
pub const DEFAULT_RHO_BUDGET: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Signature {
    /// disc > 0: three real embeddings.
    TotallyReal,
    /// disc < 0: one real and one complex-conjugate pair.
    Complex,
}

/// Everything downstream consumers need to decide whether a form enters the
/// statistical population and which local invariants apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldClassification {
    pub irreducible: bool,
    /// None when the discriminant could not be fully factored in budget.
    pub maximal: Option<bool>,
    /// Irreducible with non-square discriminant (S3 sextic normal closure).
    pub galois_s3: bool,
    pub signature: Signature,
    pub disc: i128,
}

/// True iff f(x,1) = x^3 + a x^2 + b x + c has no rational root. A monic
/// integer cubic factors over Q iff it has an integer root dividing c.
pub fn is_irreducible_cubic(f: &MonicCubic) -> Result<bool, Overflow> {
    let eval = |t: i128| -> Result<i128, Overflow> {
        let t2 = t.checked_mul(t).ok_or(Overflow("eval t^2"))?;
        let t3 = t2.checked_mul(t).ok_or(Overflow("eval t^3"))?;
        let s = t3
            .checked_add(f.a.checked_mul(t2).ok_or(Overflow("eval"))?)
            .and_then(|s| s.checked_add(f.b.checked_mul(t)?))
            .and_then(|s| s.checked_add(f.c))
            .ok_or(Overflow("eval"))?;
        Ok(s)
    };
    if f.c == 0 {
        return Ok(false); // root at 0
    }
    let n = f.c.unsigned_abs();
    let mut d = 1u128;
    while d * d <= n {
        if n % d == 0 {
            for cand in [d as i128, -(d as i128), (n / d) as i128, -((n / d) as i128)] {
                if eval(cand)? == 0 {
                    return Ok(false);
                }
            }
        }
        d += 1;
    }
    Ok(true)
}

/// Dedekind's criterion: true iff Z[x]/(f(x,1)) is maximal at p.
///
/// Fast path: p^2 does not divide disc(f) forces maximality. Otherwise factor
/// f mod p as prod (x - r_i)^{m_i} * q with q rootless (any repeated factor of
/// a cubic is linear, so q is squarefree), set g = radical, h = f/g mod p,
/// lift monic, T = (g*h - f)/p, and test gcd(T mod p, g, h) = 1.
pub fn is_maximal_at(f: &MonicCubic, p: u64) -> Result<bool, Overflow> {
    assert!(p >= 2);
    let disc = f.disc()?;
    assert!(disc != 0, "degenerate form");
    let p2 = (p as u128) * (p as u128);
    if disc.unsigned_abs() % p2 != 0 {
        return Ok(true);
    }
    let fbar = FpPoly::new(p, &[f.c, f.b, f.a, 1]);
    // Radical of fbar: distinct roots once each, times the rootless part.
    let roots = fbar.roots_with_multiplicity();
    let mut radical = FpPoly::from_u64(p, &[1]);
    let mut linear_part = FpPoly::from_u64(p, &[1]);
    for &(r, m) in &roots {
        let lin = FpPoly::from_u64(p, &[(p - r) % p, 1]);
        radical = radical.mul(&lin);
        let mut pw = FpPoly::from_u64(p, &[1]);
        for _ in 0..m {
            pw = pw.mul(&lin);
        }
        linear_part = linear_part.mul(&pw);
    }
    let (rootless, rem) = fbar.divmod(&linear_part);
    debug_assert!(rem.is_zero());
    radical = radical.mul(&rootless);
    let (hbar, rem) = fbar.divmod(&radical);
    debug_assert!(rem.is_zero());

    // Monic integer lifts with coefficients in [0, p).
    let lift = |q: &FpPoly| -> Vec<i128> { q.c.iter().map(|&v| v as i128).collect() };
    let g = lift(&radical);
    let h = lift(&hbar);
    // T = (g*h - f)/p over Z; exact because g*h = f mod p.
    let mut gh = vec![0i128; g.len() + h.len() - 1];
    for (i, &gi) in g.iter().enumerate() {
        for (j, &hj) in h.iter().enumerate() {
            gh[i + j] = gh[i + j]
                .checked_add(gi.checked_mul(hj).ok_or(Overflow("lift product"))?)
                .ok_or(Overflow("lift product"))?;
        }
    }
    let fcoeffs = [f.c, f.b, f.a, 1];
    let mut t = vec![0i128; 4];
    for k in 0..4 {
        let diff = gh[k]
            .checked_sub(fcoeffs[k])
            .ok_or(Overflow("Dedekind T"))?;
        debug_assert_eq!(diff % p as i128, 0);
        t[k] = diff / p as i128;
    }
    let tbar = FpPoly::new(p, &t);
    let g1 = tbar.gcd(&radical).gcd(&hbar);
    Ok(g1.deg() == 0 && !g1.is_zero())
}

/// True iff Z[theta] is the maximal order: p-maximal at every prime whose
/// square divides the discriminant. None when factorization ran out of budget.
pub fn is_maximal(f: &MonicCubic, rho_budget: u64) -> Result<Option<bool>, Overflow> {
    let disc = f.disc()?;
    assert!(disc != 0, "degenerate form");
    match factor(disc, rho_budget) {
        Factorization::Complete(pairs) => {
            for (p, e) in pairs {
                if e >= 2 {
                    let p = u64::try_from(p).map_err(|_| Overflow("prime too large"))?;
                    if !is_maximal_at(f, p)? {
                        return Ok(Some(false));
                    }
                }
            }
            Ok(Some(true))
        }
        Factorization::Indeterminate => Ok(None),
    }
}

/// Bundle of the field-level facts, computed with the given factor budget.
pub fn classify(f: &MonicCubic, rho_budget: u64) -> Result<FieldClassification, Overflow> {
    let disc = f.disc()?;
    assert!(disc != 0, "degenerate form");
    let irreducible = is_irreducible_cubic(f)?;
    let maximal = is_maximal(f, rho_budget)?;
    let galois_s3 = irreducible && perfect_sqrt(disc).is_none();
    let signature = if disc > 0 {
        Signature::TotallyReal
    } else {
        Signature::Complex
    };
    Ok(FieldClassification {
        irreducible,
        maximal,
        galois_s3,
        signature,
        disc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fp::red;

    /// Independent p-maximality oracle: one Pohst-Zassenhaus multiplier-ring
    /// step on O = Z[theta]. O is p-maximal iff the ring of multipliers of the
    /// p-radical equals O, i.e. the F_p-linear map z -> (mult by z on R/pR)
    /// has trivial kernel on O/pO.
    fn oracle_is_maximal_at(f: &MonicCubic, p: u64) -> bool {
        // theta * (v0, v1, v2) in the basis 1, theta, theta^2 with
        // theta^3 = -(a theta^2 + b theta + c).
        let mul_theta = |v: [i128; 3]| -> [i128; 3] {
            [-f.c * v[2], v[0] - f.b * v[2], v[1] - f.a * v[2]]
        };
        let mul_basis = |k: usize, v: [i128; 3]| -> [i128; 3] {
            let mut w = v;
            for _ in 0..k {
                w = mul_theta(w);
            }
            w
        };
        // Frobenius power map x -> x^q on O/pO with q = p^m >= 3.
        let q = if p == 2 { 4u64 } else { p };
        let fbar = FpPoly::new(p, &[f.c, f.b, f.a, 1]);
        let theta_q = fbar.pow_x_mod(q);
        let theta_2q = theta_q.mul(&theta_q).rem(&fbar);
        let col = |poly: &FpPoly| -> [i128; 3] {
            let mut v = [0i128; 3];
            for i in 0..3 {
                v[i] = *poly.c.get(i).unwrap_or(&0) as i128;
            }
            v
        };
        let frob = [col(&FpPoly::from_u64(p, &[1])), col(&theta_q), col(&theta_2q)];
        // Kernel of the 3x3 Frobenius matrix over F_p (columns frob[j]).
        let mut m = [[0u64; 3]; 3];
        for (j, f_col) in frob.iter().enumerate() {
            for i in 0..3 {
                m[i][j] = red(f_col[i], p);
            }
        }
        let kernel = fp_kernel_3(m, p);
        // R = pO + Z-span of kernel lifts; HNF basis rows.
        let mut gens: Vec<[i128; 3]> = vec![
            [p as i128, 0, 0],
            [0, p as i128, 0],
            [0, 0, p as i128],
        ];
        for k in &kernel {
            gens.push([k[0] as i128, k[1] as i128, k[2] as i128]);
        }
        let basis = hnf_3(&gens);
        // z in {1, theta, theta^2}: matrix of mult-by-z on R/pR, coordinates
        // in the HNF basis. Solve basis^T y = z*b_i exactly.
        let mut cols: Vec<[u64; 9]> = Vec::new();
        for k in 0..3 {
            let mut column = [0u64; 9];
            for (i, b) in basis.iter().enumerate() {
                let prod = mul_basis(k, *b);
                let y = solve_3(&basis, prod);
                for (r, &yv) in y.iter().enumerate() {
                    column[3 * i + r] = red(yv, p);
                }
            }
            cols.push(column);
        }
        // Kernel of the 9x3 matrix with the given columns: z = (z0,z1,z2)
        // with sum z_k * cols[k] = 0 mod p, z != 0 => not maximal.
        for z0 in 0..p.min(50) {
            // p <= 7 in tests; exhaustive scan is fine and simplest.
            for z1 in 0..p {
                for z2 in 0..p {
                    if z0 == 0 && z1 == 0 && z2 == 0 {
                        continue;
                    }
                    let mut ok = true;
                    for r in 0..9 {
                        let s = (z0 as u128 * cols[0][r] as u128
                            + z1 as u128 * cols[1][r] as u128
                            + z2 as u128 * cols[2][r] as u128)
                            % p as u128;
                        if s != 0 {
                            ok = false;
                            break;
                        }
                    }
                    if ok {
                        return false; // nontrivial multiplier: not maximal
                    }
                }
            }
        }
        true
    }

    /// Kernel basis of a 3x3 matrix over F_p by Gaussian elimination.
    fn fp_kernel_3(m: [[u64; 3]; 3], p: u64) -> Vec<[u64; 3]> {
        let mut a = m;
        let mut pivot_col_of_row = [usize::MAX; 3];
        let mut row = 0;
        for col in 0..3 {
            if let Some(r) = (row..3).find(|&r| a[r][col] % p != 0) {
                a.swap(row, r);
                let inv = crate::fp::invm(a[row][col] % p, p);
                for c in 0..3 {
                    a[row][c] = a[row][c] % p * inv % p;
                }
                for r2 in 0..3 {
                    if r2 != row && a[r2][col] % p != 0 {
                        let fct = a[r2][col] % p;
                        for c in 0..3 {
                            a[r2][c] = (a[r2][c] + (p - fct) * a[row][c]) % p;
                        }
                    }
                }
                pivot_col_of_row[row] = col;
                row += 1;
            }
        }
        let pivots: Vec<usize> = pivot_col_of_row[..row].to_vec();
        let mut kernel = Vec::new();
        for free in 0..3 {
            if pivots.contains(&free) {
                continue;
            }
            let mut v = [0u64; 3];
            v[free] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - a[r][free] % p) % p;
            }
            kernel.push(v);
        }
        kernel
    }

    /// Row HNF (upper-triangular rows, positive diagonal) of a set of
    /// 3-vectors spanning a finite-index sublattice of Z^3.
    fn hnf_3(gens: &[[i128; 3]]) -> [[i128; 3]; 3] {
        let mut rows: Vec<[i128; 3]> = gens.to_vec();
        // Column-by-column gcd elimination, from the left.
        let mut basis: Vec<[i128; 3]> = Vec::new();
        for col in 0..3 {
            loop {
                let mut nz: Vec<usize> =
                    (0..rows.len()).filter(|&r| rows[r][col] != 0).collect();
                if nz.is_empty() {
                    break;
                }
                nz.sort_by_key(|&r| rows[r][col].unsigned_abs());
                let r0 = nz[0];
                if nz.len() == 1 {
                    let mut row = rows.remove(r0);
                    if row[col] < 0 {
                        row.iter_mut().for_each(|v| *v = -*v);
                    }
                    basis.push(row);
                    break;
                }
                let q = rows[nz[1]][col].div_euclid(rows[r0][col]);
                for c in 0..3 {
                    rows[nz[1]][c] -= q * rows[r0][c];
                }
            }
        }
        assert_eq!(basis.len(), 3, "generators must span full rank");
        // Reduce above-diagonal entries.
        let mut b = [[0i128; 3]; 3];
        for (i, row) in basis.iter().enumerate() {
            b[i] = *row;
        }
        for i in (0..3).rev() {
            for j in (i + 1)..3 {
                let q = b[i][j].div_euclid(b[j][j]);
                for c in 0..3 {
                    b[i][c] -= q * b[j][c];
                }
            }
        }
        b
    }

    /// Solve y * basis = v exactly over the integers (v must lie in the
    /// row lattice). basis rows are in echelon form: basis[i][j] = 0 for
    /// j < i, so coordinates resolve in ascending order.
    fn solve_3(basis: &[[i128; 3]; 3], v: [i128; 3]) -> [i128; 3] {
        let mut y = [0i128; 3];
        let mut rest = v;
        for i in 0..3 {
            assert_eq!(rest[i] % basis[i][i], 0, "v outside lattice");
            y[i] = rest[i] / basis[i][i];
            for c in 0..3 {
                rest[c] -= y[i] * basis[i][c];
            }
        }
        assert_eq!(rest, [0, 0, 0]);
        y
    }

    #[test]
    fn irreducibility_examples() {
        assert!(is_irreducible_cubic(&MonicCubic::new(0, -1, -1)).unwrap());
        assert!(!is_irreducible_cubic(&MonicCubic::new(0, -1, 0)).unwrap());
        assert!(is_irreducible_cubic(&MonicCubic::new(0, 4, -1)).unwrap());
    }

    #[test]
    fn dedekind_examples() {
        // Classical index-2 example.
        let ded = MonicCubic::new(-1, -2, -8);
        assert_eq!(ded.disc().unwrap(), -2012);
        assert!(!is_maximal_at(&ded, 2).unwrap());
        assert_eq!(is_maximal(&ded, 1 << 16).unwrap(), Some(false));
        // Squarefree disc => maximal everywhere.
        let f = MonicCubic::new(0, -1, -1);
        assert!(is_maximal_at(&f, 23).unwrap());
        assert_eq!(is_maximal(&f, 1 << 16).unwrap(), Some(true));
        let g = MonicCubic::new(0, -4, -1);
        assert_eq!(g.disc().unwrap(), 229);
        assert_eq!(is_maximal(&g, 1 << 16).unwrap(), Some(true));
    }

    #[test]
    fn classify_examples() {
        let cyclic = MonicCubic::new(1, -2, -1);
        let cls = classify(&cyclic, 1 << 16).unwrap();
        assert_eq!(cls.disc, 49);
        assert!(cls.irreducible);
        assert!(!cls.galois_s3);
        assert_eq!(cls.signature, Signature::TotallyReal);

        let complex = classify(&MonicCubic::new(0, -1, -1), 1 << 16).unwrap();
        assert!(complex.galois_s3);
        assert_eq!(complex.signature, Signature::Complex);
        assert_eq!(complex.disc, -23);

        let real = classify(&MonicCubic::new(0, -4, -1), 1 << 16).unwrap();
        assert!(real.galois_s3);
        assert_eq!(real.signature, Signature::TotallyReal);
    }

    #[test]
    fn classify_is_star_invariant() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state
        };
        for _ in 0..100 {
            let a = (next() % 7) as i128 - 3;
            let b = (next() % 21) as i128 - 10;
            let c = (next() % 21) as i128 - 10;
            let f = MonicCubic::new(a, b, c);
            if f.disc().unwrap() == 0 {
                continue;
            }
            let g = f.star();
            let cf = classify(&f, 1 << 16).unwrap();
            let cg = classify(&g, 1 << 16).unwrap();
            assert_eq!(cf, cg);
        }
    }

    #[test]
    fn dedekind_agrees_with_multiplier_ring_oracle() {
        let mut state = 0x51afd02ed4d0b171u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state
        };
        let mut tested = 0;
        while tested < 200 {
            let a = (next() % 11) as i128 - 5;
            let b = (next() % 41) as i128 - 20;
            let c = (next() % 41) as i128 - 20;
            let f = MonicCubic::new(a, b, c);
            if f.disc().unwrap() == 0 {
                continue;
            }
            for p in [2u64, 3, 5, 7] {
                assert_eq!(
                    is_maximal_at(&f, p).unwrap(),
                    oracle_is_maximal_at(&f, p),
                    "disagreement at f = {f:?}, p = {p}"
                );
            }
            tested += 1;
        }
    }
}
