//! Enumeration of integral binary quartics: exhaustive coefficient boxes with
//! prescribed invariants, and (further down) the windowed search used to list
//! whole orbits for a given invariant pair.

use crate::arith::{add, factor, icbrt, isqrt, mul, perfect_sqrt, sub, Factorization, Overflow};
use crate::qequiv;
use crate::quartic::{inversion, BinaryQuartic};
use std::collections::{BTreeMap, HashMap};

/// Every form with invariants exactly (i, j) and sup-norm at most n, in
/// lexicographic coefficient order. The invariant pair must be nondegenerate
/// (4 i^3 != j^2).
pub fn forms_with_invariants_in_box(
    i: i128,
    j: i128,
    n: i128,
) -> Result<Vec<BinaryQuartic>, Overflow> {
    let i3 = mul(i, mul(i, i)?)?;
    assert!(mul(4, i3)? != mul(j, j)?, "degenerate invariant pair");
    assert!(n >= 0);
    let mut out = Vec::new();
    for a in -n..=n {
        for b in -n..=n {
            for c in -n..=n {
                if a != 0 {
                    for d in -n..=n {
                        // 12 a e = i - c^2 + 3 b d
                        let num = add(sub(i, mul(c, c)?)?, mul(3, mul(b, d)?)?)?;
                        let den = 12 * a;
                        if num % den != 0 {
                            continue;
                        }
                        let e = num / den;
                        if e.abs() > n {
                            continue;
                        }
                        let g = BinaryQuartic::new(a, b, c, d, e);
                        if g.invariants()? == (i, j) {
                            out.push(g);
                        }
                    }
                } else if b != 0 {
                    // I = c^2 - 3 b d pins d; then 27 b^2 e = 9 b c d - 2 c^3 - j.
                    let dn = sub(mul(c, c)?, i)?;
                    if dn % (3 * b) != 0 {
                        continue;
                    }
                    let d = dn / (3 * b);
                    if d.abs() > n {
                        continue;
                    }
                    let num = sub(sub(mul(9, mul(b, mul(c, d)?)?)?, mul(2, mul(c, mul(c, c)?)?)?)?, j)?;
                    let den = mul(27, mul(b, b)?)?;
                    if num % den != 0 {
                        continue;
                    }
                    let e = num / den;
                    if e.abs() > n {
                        continue;
                    }
                    let g = BinaryQuartic::new(0, b, c, d, e);
                    if g.invariants()? == (i, j) {
                        out.push(g);
                    }
                }
                // a = b = 0 forces 4 I^3 = J^2 (degenerate), excluded above.
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod box_tests {
    use super::*;

    #[test]
    fn box_enumeration_finds_known_forms() {
        // Invariants of x^4 + y^4 in the unit box: the form and its negative.
        let forms = forms_with_invariants_in_box(12, 0, 1).unwrap();
        assert_eq!(
            forms,
            vec![
                BinaryQuartic::new(-1, 0, 0, 0, -1),
                BinaryQuartic::new(1, 0, 0, 0, 1),
            ]
        );
        for g in &forms {
            assert_eq!(g.invariants().unwrap(), (12, 0));
        }
    }

    #[test]
    fn box_enumeration_is_exhaustive_on_a_small_box() {
        // Brute-force cross-check on a tiny box for a handful of pairs.
        let n = 2i128;
        let mut brute: Vec<(i128, i128, BinaryQuartic)> = Vec::new();
        for a in -n..=n {
            for b in -n..=n {
                for c in -n..=n {
                    for d in -n..=n {
                        for e in -n..=n {
                            let g = BinaryQuartic::new(a, b, c, d, e);
                            if let Ok((i, j)) = g.invariants() {
                                brute.push((i, j, g));
                            }
                        }
                    }
                }
            }
        }
        for (i, j) in [(12i128, 0i128), (-12, 0), (9, -27), (1, 1)] {
            if 4 * i * i * i == j * j {
                continue;
            }
            let mut want: Vec<BinaryQuartic> = brute
                .iter()
                .filter(|(bi, bj, _)| (*bi, *bj) == (i, j))
                .map(|(_, _, g)| *g)
                .collect();
            want.sort();
            let got = forms_with_invariants_in_box(i, j, n).unwrap();
            assert_eq!(got, want, "mismatch at ({}, {})", i, j);
        }
    }
}

// ---------------------------------------------------------------------------
// Windowed orbit enumeration
// ---------------------------------------------------------------------------

/// Ceiling on max(4|I|^3, J^2) accepted by the orbit enumeration. Under this
/// cap every intermediate of the window scan provably fits in i128 (see the
/// bound worked out in `leading_window_candidates`), so the hot loop can use
/// plain arithmetic.
pub const HEIGHT4_BUDGET: u128 = 10u128.pow(16);

/// Window half-widths for the scan over forms with nonzero leading
/// coefficient, as rational multiples (num, den) of T^(1/6) for the leading
/// coefficient and T^(1/3) for the middle coefficient, T = max(|I|^3, J^2/4).
///
/// Calibration (see `calibrate_window_constants`): over the full audit range
/// T <= 10^4 (636 invariant pairs carrying orbits), the census at kappa = 1
/// already equals both the census at kappa = 8 and the exhaustive box-scan
/// oracle, and so do kappa = 3/2, 2, 3, 4. The constants are frozen at 2x
/// the smallest validated value. The largest coefficient actually seen on a
/// chosen representative was a = 2.001 T^(1/6), c = 0.333 T^(1/3).
const KAPPA_A: (u128, u128) = (2, 1);
const KAPPA_C: (u128, u128) = (2, 1);

/// Box half-widths for the brute-force oracle, as multiples of T^(1/6),
/// T^(1/6), T^(1/3), T^(1/2) for a, b, c, d. Deliberately wider than the
/// window constants so the two searches are not the same scan in disguise:
/// at least 2x the frozen window in every coordinate, and far above the
/// largest observed representative spread (d peaked at 0.179 T^(1/2),
/// |b| at 1.565 T^(1/6) in either branch).
const ORACLE_A: (u128, u128) = (8, 1);
const ORACLE_B: (u128, u128) = (16, 1);
const ORACLE_C: (u128, u128) = (8, 1);
const ORACLE_D: (u128, u128) = (8, 1);

/// Failure modes of orbit enumeration.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrbitError {
    /// 4 I^3 = J^2: every form with these invariants has discriminant zero,
    /// so there is no orbit set to enumerate.
    #[error("degenerate invariants: 4I^3 = J^2 admits no nondegenerate forms")]
    DegenerateInvariants,
    /// The invariants exceed the height budget that keeps the scan exact.
    #[error("invariants exceed the enumeration height budget")]
    BudgetExceeded,
    #[error("arithmetic overflow during enumeration: {0}")]
    Arithmetic(#[from] Overflow),
}

/// One PGL2(Z)-orbit of integral binary quartics: a small representative
/// together with the orbit-invariant flags the class-group correspondence
/// consumes.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct OrbitRep {
    pub form: BinaryQuartic,
    pub irreducible: bool,
    /// None when the discriminant could not be factored within the budget.
    pub nowhere_overramified: Option<bool>,
    pub real_root_count: usize,
}

/// The complete set of PGL2(Z)-orbits with invariants (I, J), one
/// representative per orbit, sorted by (sup norm, coefficients).
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct QuarticOrbitSet {
    pub i: i128,
    pub j: i128,
    pub representatives: Vec<OrbitRep>,
}

/// Validates an invariant pair and returns max(4|I|^3, J^2).
fn validated_height4(i: i128, j: i128) -> Result<u128, OrbitError> {
    let cube = i
        .unsigned_abs()
        .checked_pow(3)
        .and_then(|v| v.checked_mul(4));
    let square = j.unsigned_abs().checked_pow(2);
    let (four_i3, j2) = match (cube, square) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(OrbitError::BudgetExceeded),
    };
    let t4 = four_i3.max(j2);
    if t4 > HEIGHT4_BUDGET {
        return Err(OrbitError::BudgetExceeded);
    }
    // 4I^3 = J^2 forces I >= 0; comparing absolute values then suffices.
    if i >= 0 && four_i3 == j2 {
        return Err(OrbitError::DegenerateInvariants);
    }
    Ok(t4)
}

/// Largest n >= 1 with 4 (den n)^k <= num^k t4, i.e. the integer part of
/// (num/den) (t4/4)^(1/k), computed exactly. Floored at 1 so that tiny
/// invariants still get a nonempty window.
fn window_bound(t4: u128, kappa: (u128, u128), k: u32) -> i128 {
    let (num, den) = kappa;
    let rhs = num
        .checked_pow(k)
        .and_then(|v| v.checked_mul(t4))
        .expect("window bound out of range");
    let fits = |n: u128| -> bool {
        den.checked_mul(n)
            .and_then(|dn| dn.checked_pow(k))
            .and_then(|v| v.checked_mul(4))
            .map(|v| v <= rhs)
            .unwrap_or(false)
    };
    if !fits(1) {
        return 1;
    }
    let mut lo = 1u128;
    while fits(lo * 2) {
        lo *= 2;
    }
    let mut hi = lo * 2; // fits(lo) and not fits(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo as i128
}

/// Integers n with lo <= den * n <= hi, as an inclusive (possibly empty)
/// range. den must be nonzero.
fn band(mut lo: i128, mut hi: i128, mut den: i128) -> (i128, i128) {
    if den < 0 {
        den = -den;
        (lo, hi) = (-hi, -lo);
    }
    (-((-lo).div_euclid(den)), hi.div_euclid(den))
}

/// Forms with invariants (i, j) and nonzero leading coefficient inside the
/// reduction window: |a| <= kappa_a T^(1/6) with both signs, b
/// translation-normalized to |b| <= 2|a|, |c| <= kappa_c T^(1/3). Once
/// (a, b, c) are fixed the invariants force d up to a square root:
///
///   324 a^2 d^2 - 81 b (4ac - b^2) d - B0 = 0,
///   B0 = (I - c^2)(72ac - 27b^2) - 24 a c^3 - 12 a J,
///
/// and then 12 a e = I - c^2 + 3 b d pins e. Every candidate is re-verified
/// against (i, j) exactly before being kept.
///
/// Overflow bound: with t4 <= 10^16 and kappa <= 16 the worst intermediate is
/// the discriminant of the d-quadratic, below 10^36 < i128::MAX, so the hot
/// loop uses plain arithmetic.
/// One monomorphized copy of the (a, b, c) scan. The i64 instantiation runs
/// several times faster than i128 and is selected only when
/// `scan_fits_i64` certifies that no intermediate can overflow.
macro_rules! window_scan {
    ($t:ty, $sqrt:path, $i:expr, $j:expr, $a_max:expr, $c_max:expr, $out:expr) => {{
        let (wi, wj) = ($i as $t, $j as $t);
        let (a_max, c_max) = ($a_max as $t, $c_max as $t);
        for a_abs in 1..=a_max {
            let den = 648 * a_abs * a_abs;
            let aa1296 = 1296 * a_abs * a_abs;
            for a in [a_abs, -a_abs] {
                for b in -2 * a_abs..=2 * a_abs {
                    let b2 = b * b;
                    for c in -c_max..=c_max {
                        let four_ac = 4 * a * c;
                        let q1 = 81 * b * (four_ac - b2);
                        let c2 = c * c;
                        let b0 =
                            (wi - c2) * (18 * four_ac - 27 * b2) - 24 * a * c2 * c - 12 * a * wj;
                        let delta = q1 * q1 + aa1296 * b0;
                        if delta < 0 {
                            continue;
                        }
                        let Some(s) = $sqrt(delta) else {
                            continue;
                        };
                        for sign in [1 as $t, -1] {
                            if sign < 0 && s == 0 {
                                break;
                            }
                            let num = q1 + sign * s;
                            if num % den != 0 {
                                continue;
                            }
                            let d = num / den;
                            let e_num = wi - c2 + 3 * b * d;
                            let e_den = 12 * a;
                            if e_num % e_den != 0 {
                                continue;
                            }
                            let g = BinaryQuartic::new(
                                a as i128,
                                b as i128,
                                c as i128,
                                d as i128,
                                (e_num / e_den) as i128,
                            );
                            if g.invariants()? == ($i, $j) {
                                $out.push(g);
                            }
                        }
                    }
                }
            }
        }
    }};
}

/// True when every intermediate of the scan over the given window is
/// certified to stay within +/- 2^62, so the i64 instantiation cannot
/// overflow. All worst-case magnitudes are evaluated in u128.
fn scan_fits_i64(i: i128, j: i128, a_max: i128, c_max: i128) -> bool {
    let (ia, ja) = (i.unsigned_abs(), j.unsigned_abs());
    let (am, cm) = (a_max as u128, c_max as u128);
    let bm = 2 * am;
    let c2 = cm * cm;
    // |q1| <= 81 bm (4 am cm + bm^2); |B0| <= (|i| + cm^2)(72 am cm + 27
    // bm^2) + 24 am cm^3 + 12 am |j|; |delta| <= q1^2 + 1296 am^2 |B0|.
    // Everything downstream (num, d, e_num) is dominated by these.
    let q1m = 81 * bm * (4 * am * cm + bm * bm);
    let b0m = (ia + c2) * (72 * am * cm + 27 * bm * bm) + 24 * am * c2 * cm + 12 * am * ja;
    let Some(q1sq) = q1m.checked_mul(q1m) else {
        return false;
    };
    let Some(rest) = (1296 * am * am).checked_mul(b0m) else {
        return false;
    };
    let Some(delta_max) = q1sq.checked_add(rest) else {
        return false;
    };
    delta_max <= 1 << 62
}

fn leading_window_candidates(
    i: i128,
    j: i128,
    t4: u128,
    kappa_a: (u128, u128),
    kappa_c: (u128, u128),
    out: &mut Vec<BinaryQuartic>,
) -> Result<(), OrbitError> {
    assert!(t4 <= HEIGHT4_BUDGET && kappa_a.0 <= 16 * kappa_a.1 && kappa_c.0 <= 16 * kappa_c.1);
    let a_max = window_bound(t4, kappa_a, 6);
    let c_max = window_bound(t4, kappa_c, 3);
    if scan_fits_i64(i, j, a_max, c_max) {
        window_scan!(i64, crate::arith::perfect_sqrt_i64, i, j, a_max, c_max, out);
    } else {
        window_scan!(i128, perfect_sqrt, i, j, a_max, c_max, out);
    }
    Ok(())
}

/// Forms with invariants (i, j) and zero leading coefficient. Such a form is
/// y times an integral cubic with leading coefficient b, and its discriminant
/// is b^2 times the cubic's, so b^2 divides disc exactly — no heuristic
/// window is needed. c is translation-normalized modulo 3b (2c in
/// (-3|b|, 3|b|]), after which I pins d and J pins e by exact division.
fn zero_leading_candidates(
    i: i128,
    j: i128,
    disc: i128,
    out: &mut Vec<BinaryQuartic>,
) -> Result<(), OrbitError> {
    let b_max = isqrt(disc.unsigned_abs()) as i128;
    for b_abs in 1..=b_max {
        if disc % (b_abs * b_abs) != 0 {
            continue;
        }
        for b in [b_abs, -b_abs] {
            let c_lo = -((3 * b_abs - 1) / 2);
            let c_hi = (3 * b_abs) / 2;
            for c in c_lo..=c_hi {
                let d_num = sub(mul(c, c)?, i)?;
                let d_den = 3 * b;
                if d_num % d_den != 0 {
                    continue;
                }
                let d = d_num / d_den;
                let c3 = mul(c, mul(c, c)?)?;
                let e_num = sub(sub(mul(9, mul(b, mul(c, d)?)?)?, mul(2, c3)?)?, j)?;
                let e_den = mul(27, mul(b, b)?)?;
                if e_num % e_den != 0 {
                    continue;
                }
                let g = BinaryQuartic::new(0, b, c, d, e_num / e_den);
                if g.invariants()? == (i, j) {
                    out.push(g);
                }
            }
        }
    }
    Ok(())
}

/// Inexpensive exact orbit normalization: translation-normalize the second
/// coefficient (or, with zero leading coefficient, the third), and invert
/// whenever that strictly shrinks the leading coefficient. Each inversion
/// strictly decreases |a| (a zero leading coefficient can arise only from the
/// input and is left at most once), so the walk terminates; the iteration cap
/// is a safety belt. The output is always a member of the input's orbit, so
/// mapping forms through this before rigorous grouping merges most
/// orbit-mates for free.
pub(crate) fn cheap_collapse(g: &BinaryQuartic) -> Result<BinaryQuartic, Overflow> {
    let mut cur = *g;
    for _ in 0..64 {
        if cur.a != 0 {
            let m4 = mul(4, cur.a.abs())?;
            let r = cur.b.rem_euclid(m4);
            let bn = if 2 * r > m4 { r - m4 } else { r };
            if bn != cur.b {
                cur = cur.translate((bn - cur.b) / (4 * cur.a))?;
            }
            if cur.e != 0 && cur.e.abs() < cur.a.abs() {
                cur = cur.transform(&inversion())?;
                continue;
            }
            break;
        } else {
            // b != 0 for a nondegenerate form.
            let m3 = mul(3, cur.b.abs())?;
            let r = cur.c.rem_euclid(m3);
            let cn = if 2 * r > m3 { r - m3 } else { r };
            if cn != cur.c {
                cur = cur.translate((cn - cur.c) / (3 * cur.b))?;
            }
            if cur.e != 0 {
                cur = cur.transform(&inversion())?;
                continue;
            }
            break;
        }
    }
    Ok(cur)
}

/// Partition nondegenerate forms sharing one invariant pair into
/// PGL2(Z)-orbits: bucket by cheap orbit invariants (content, number of real
/// roots, value profiles modulo small primes), then union within each bucket
/// with the rigorous equivalence test. Returns groups of indices into the
/// input slice.
fn group_orbits(forms: &[BinaryQuartic]) -> Result<Vec<Vec<usize>>, OrbitError> {
    let mut buckets: BTreeMap<(i128, usize, Vec<u32>), Vec<usize>> = BTreeMap::new();
    for (idx, g) in forms.iter().enumerate() {
        let mut profile = Vec::new();
        for p in [2i128, 3, 5, 7] {
            profile.extend(qequiv::value_profile(g, p));
        }
        buckets
            .entry((g.content(), g.real_root_count(), profile))
            .or_default()
            .push(idx);
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for idxs in buckets.values() {
        let mut local: Vec<usize> = Vec::new();
        for &idx in idxs {
            let mut placed = false;
            for &gid in &local {
                if qequiv::is_equivalent(&forms[idx], &forms[groups[gid][0]])? {
                    groups[gid].push(idx);
                    placed = true;
                    break;
                }
            }
            if !placed {
                local.push(groups.len());
                groups.push(vec![idx]);
            }
        }
    }
    Ok(groups)
}

/// Collapse, dedup, and group candidate forms into orbits; each returned
/// orbit lists the collapsed members followed by the original candidates that
/// collapsed into it, for representative selection.
fn orbits_from_candidates(cands: Vec<BinaryQuartic>) -> Result<Vec<Vec<BinaryQuartic>>, OrbitError> {
    if cands.is_empty() {
        return Ok(Vec::new());
    }
    let mut pairs = Vec::with_capacity(cands.len());
    for g in &cands {
        pairs.push((cheap_collapse(g)?, *g));
    }
    let mut uniq: Vec<BinaryQuartic> = pairs.iter().map(|(coll, _)| *coll).collect();
    uniq.sort();
    uniq.dedup();
    let groups = group_orbits(&uniq)?;
    let mut orbit_of: HashMap<[i128; 5], usize> = HashMap::new();
    let mut out: Vec<Vec<BinaryQuartic>> = vec![Vec::new(); groups.len()];
    for (oid, group) in groups.iter().enumerate() {
        for &idx in group {
            orbit_of.insert(uniq[idx].coeffs(), oid);
            out[oid].push(uniq[idx]);
        }
    }
    for (coll, orig) in &pairs {
        out[orbit_of[&coll.coeffs()]].push(*orig);
    }
    Ok(out)
}

fn best_representative(members: &[BinaryQuartic]) -> BinaryQuartic {
    *members
        .iter()
        .min_by_key(|g| (g.sup_norm(), g.coeffs()))
        .expect("orbit has at least one member")
}

/// disc = (4 I^3 - J^2) / 27 when 27 divides the numerator; otherwise no
/// integral form has these invariants.
fn invariant_disc(i: i128, j: i128) -> Result<Option<i128>, OrbitError> {
    let num = sub(mul(4, mul(i, mul(i, i)?)?)?, mul(j, j)?)?;
    Ok(if num % 27 == 0 { Some(num / 27) } else { None })
}

/// Primes whose square divides n, for the overramification flags; None when
/// factorization exceeds the budget.
fn square_primes_of(n: i128, rho_budget: u64) -> Result<Option<Vec<u64>>, OrbitError> {
    match factor(n, rho_budget) {
        Factorization::Indeterminate => Ok(None),
        Factorization::Complete(pairs) => {
            let mut primes = Vec::new();
            for (p, e) in pairs {
                if e >= 2 {
                    primes.push(u64::try_from(p).map_err(|_| Overflow("prime exceeds u64"))?);
                }
            }
            Ok(Some(primes))
        }
    }
}

/// All PGL2(Z)-orbits of integral binary quartic forms with invariants
/// exactly (i, j), with per-orbit flags. rho_budget controls the
/// discriminant factorization behind the overramification flag.
pub fn orbits_with_invariants(
    i: i128,
    j: i128,
    rho_budget: u64,
) -> Result<QuarticOrbitSet, OrbitError> {
    let t4 = validated_height4(i, j)?;
    let Some(disc) = invariant_disc(i, j)? else {
        return Ok(QuarticOrbitSet {
            i,
            j,
            representatives: Vec::new(),
        });
    };
    let mut cands = Vec::new();
    leading_window_candidates(i, j, t4, KAPPA_A, KAPPA_C, &mut cands)?;
    zero_leading_candidates(i, j, disc, &mut cands)?;
    cands.sort();
    cands.dedup();
    let orbits = orbits_from_candidates(cands)?;
    let square_primes = square_primes_of(disc, rho_budget)?;
    let mut representatives = Vec::with_capacity(orbits.len());
    for members in &orbits {
        let form = best_representative(members);
        representatives.push(OrbitRep {
            form,
            irreducible: form.is_irreducible(),
            nowhere_overramified: square_primes
                .as_deref()
                .map(|ps| form.nowhere_overramified_given(ps)),
            real_root_count: form.real_root_count(),
        });
    }
    representatives.sort_by_key(|r| (r.form.sup_norm(), r.form.coeffs()));
    Ok(QuarticOrbitSet {
        i,
        j,
        representatives,
    })
}

/// Orbit tallies for the class-group correspondence, under both readings of
/// the overramification condition. "Weak" counts orbits passing the mod-p
/// square test alone at every prime whose square divides the discriminant;
/// "strict" additionally requires the quartic ring of the orbit to be
/// p-maximal at those primes (both properties are orbit invariants). The
/// real fields (weak_real / strict_real) count the subsets whose forms have
/// four real roots.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct OrbitClassCounts {
    pub weak_total: usize,
    pub weak_real: usize,
    pub strict_total: usize,
    pub strict_real: usize,
}

/// The orbit counts the class-group correspondence consumes: irreducible
/// nowhere-overramified orbits with invariants (i, j), tallied under both
/// conventions of OrbitClassCounts. Returns None when overramification is
/// indeterminate (discriminant not factorable within rho_budget).
///
/// Irreducible forms never have a zero leading coefficient (that would give
/// the rational root (1 : 0)), so the scan skips the zero-leading branch.
pub fn class_orbit_counts(
    i: i128,
    j: i128,
    rho_budget: u64,
) -> Result<Option<OrbitClassCounts>, OrbitError> {
    let t4 = validated_height4(i, j)?;
    let Some(disc) = invariant_disc(i, j)? else {
        return Ok(Some(OrbitClassCounts::default()));
    };
    let Some(square_primes) = square_primes_of(disc, rho_budget)? else {
        return Ok(None);
    };
    let mut cands = Vec::new();
    leading_window_candidates(i, j, t4, KAPPA_A, KAPPA_C, &mut cands)?;
    let mut collapsed = Vec::with_capacity(cands.len());
    for g in &cands {
        collapsed.push(cheap_collapse(g)?);
    }
    collapsed.sort();
    collapsed.dedup();
    // Both filters are orbit invariants, so they commute with grouping.
    collapsed.retain(|g| g.is_irreducible() && g.nowhere_overramified_given(&square_primes));
    let groups = group_orbits(&collapsed)?;
    let mut counts = OrbitClassCounts::default();
    for grp in &groups {
        let rep = &collapsed[grp[0]];
        let real = rep.real_root_count() == 4;
        let maximal = crate::qring::ring_of_form(rep)?.is_maximal_given(&square_primes);
        counts.weak_total += 1;
        counts.weak_real += real as usize;
        if maximal {
            counts.strict_total += 1;
            counts.strict_real += real as usize;
        }
    }
    Ok(Some(counts))
}

/// Applies f to every item, in parallel when the parallel feature is on.
fn try_map_parallel<T, U, F>(items: &[T], f: F) -> Result<Vec<U>, OrbitError>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U, OrbitError> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Every nondegenerate invariant pair with max(|I|^3, J^2/4) <= max_t.
fn invariant_range(max_t: u128) -> Vec<(i128, i128)> {
    let i_max = icbrt(max_t as i128);
    let j_max = isqrt(4 * max_t) as i128;
    let mut pairs = Vec::new();
    for i in -i_max..=i_max {
        for j in -j_max..=j_max {
            if i >= 0 && 4 * i * i * i == j * j {
                continue;
            }
            pairs.push((i, j));
        }
    }
    pairs
}

/// Orbit counts from the windowed enumeration for every nondegenerate
/// invariant pair with max(|I|^3, J^2/4) <= max_t; pairs with no orbits are
/// omitted.
pub fn window_orbit_census(max_t: u128) -> Result<BTreeMap<(i128, i128), usize>, OrbitError> {
    window_census_with(max_t, KAPPA_A, KAPPA_C)
}

fn window_census_with(
    max_t: u128,
    kappa_a: (u128, u128),
    kappa_c: (u128, u128),
) -> Result<BTreeMap<(i128, i128), usize>, OrbitError> {
    assert!(max_t <= HEIGHT4_BUDGET / 4, "census range exceeds budget");
    let pairs = invariant_range(max_t);
    let counted = try_map_parallel(&pairs, |&(i, j)| {
        let t4 = validated_height4(i, j)?;
        let Some(disc) = invariant_disc(i, j)? else {
            return Ok(((i, j), 0));
        };
        let mut cands = Vec::new();
        leading_window_candidates(i, j, t4, kappa_a, kappa_c, &mut cands)?;
        zero_leading_candidates(i, j, disc, &mut cands)?;
        cands.sort();
        cands.dedup();
        Ok(((i, j), orbits_from_candidates(cands)?.len()))
    })?;
    Ok(counted.into_iter().filter(|&(_, n)| n > 0).collect())
}

/// Independent brute-force census over the same range: scan whole coefficient
/// boxes with no reduction theory beyond the box radii, bucket every form by
/// its invariants, and count orbits per bucket. The trailing coefficient is
/// not boxed; for each (a, b, c, d) it runs over the band that keeps |I|
/// within range (leading case), with J then checked, so the scan stays
/// four-dimensional. Practical for audit ranges only.
pub fn box_scan_orbit_census(max_t: u128) -> Result<BTreeMap<(i128, i128), usize>, OrbitError> {
    assert!(max_t <= 10u128.pow(6), "box scan is for audit ranges");
    let t4 = 4 * max_t;
    let i_max = icbrt(max_t as i128);
    let j_max = isqrt(t4) as i128;
    let b_a = window_bound(t4, ORACLE_A, 6);
    let b_b = window_bound(t4, ORACLE_B, 6);
    let b_c = window_bound(t4, ORACLE_C, 3);
    let b_d = window_bound(t4, ORACLE_D, 2);

    let keep = |g: BinaryQuartic,
                map: &mut BTreeMap<(i128, i128), Vec<BinaryQuartic>>|
     -> Result<(), OrbitError> {
        let (gi, gj) = g.invariants()?;
        if gi.abs() > i_max || gj.abs() > j_max {
            return Ok(());
        }
        if gi >= 0 && 4 * gi * gi * gi == gj * gj {
            return Ok(());
        }
        map.entry((gi, gj)).or_default().push(cheap_collapse(&g)?);
        Ok(())
    };

    // Leading slices scan independently and merge.
    let slices: Vec<i128> = (-b_a..=b_a).filter(|&a| a != 0).collect();
    let slice_maps = try_map_parallel(&slices, |&a| {
        let mut map = BTreeMap::new();
        for b in -b_b..=b_b {
            for c in -b_c..=b_c {
                for d in -b_d..=b_d {
                    // I = 12 a e + (c^2 - 3 b d)
                    let u = c * c - 3 * b * d;
                    let (lo, hi) = band(-i_max - u, i_max - u, 12 * a);
                    for e in lo..=hi {
                        keep(BinaryQuartic::new(a, b, c, d, e), &mut map)?;
                    }
                }
            }
        }
        Ok(map)
    })?;
    let mut buckets: BTreeMap<(i128, i128), Vec<BinaryQuartic>> = BTreeMap::new();
    for map in slice_maps {
        for (key, mut forms) in map {
            buckets.entry(key).or_default().append(&mut forms);
        }
    }
    // Zero-leading slice: I bands d, then J bands e.
    for b in (-b_b..=b_b).filter(|&b| b != 0) {
        for c in -b_c..=b_c {
            let (d_lo, d_hi) = band(c * c - i_max, c * c + i_max, 3 * b);
            for d in d_lo..=d_hi {
                let x = 9 * b * c * d - 2 * c * c * c;
                let (e_lo, e_hi) = band(x - j_max, x + j_max, 27 * b * b);
                for e in e_lo..=e_hi {
                    keep(BinaryQuartic::new(0, b, c, d, e), &mut buckets)?;
                }
            }
        }
    }

    let entries: Vec<((i128, i128), Vec<BinaryQuartic>)> = buckets
        .into_iter()
        .map(|(key, mut forms)| {
            forms.sort();
            forms.dedup();
            (key, forms)
        })
        .collect();
    let counted = try_map_parallel(&entries, |(key, forms)| {
        Ok((*key, group_orbits(forms)?.len()))
    })?;
    Ok(counted.into_iter().filter(|&(_, n)| n > 0).collect())
}

#[cfg(test)]
mod orbit_tests {
    use super::*;
    use crate::arith::SplitMix64;

    const RHO: u64 = 10_000;

    /// Stage timing of the per-field orbit-count pipeline, for optimization
    /// work only.
    #[test]
    #[ignore = "manual profiling aid"]
    fn profile_orbit_count_stages() {
        use std::time::{Duration, Instant};
        let x: u128 = 50_000;
        let classes = crate::cubic::enumerate_by_height(x).unwrap();
        let mut admitted = Vec::new();
        for cf in &classes {
            let cls = crate::orders::classify(&cf.form, 2_000_000).unwrap();
            if cls.irreducible && cls.galois_s3 && cls.maximal == Some(true) {
                admitted.push(cf.form.invariants().unwrap());
            }
        }
        let mut t_scan = Duration::ZERO;
        let mut t_collapse = Duration::ZERO;
        let mut t_retain = Duration::ZERO;
        let mut t_group = Duration::ZERO;
        let mut t_post = Duration::ZERO;
        let (mut n_cands, mut n_collapsed, mut n_retained, mut n_groups) = (0, 0, 0, 0);
        for &(i, j) in &admitted {
            let t4 = validated_height4(i, j).unwrap();
            let disc = invariant_disc(i, j).unwrap().unwrap();
            let square_primes = square_primes_of(disc, 2_000_000).unwrap().unwrap();
            let t = Instant::now();
            let mut cands = Vec::new();
            leading_window_candidates(i, j, t4, KAPPA_A, KAPPA_C, &mut cands).unwrap();
            t_scan += t.elapsed();
            n_cands += cands.len();
            let t = Instant::now();
            let mut collapsed: Vec<BinaryQuartic> =
                cands.iter().map(|g| cheap_collapse(g).unwrap()).collect();
            collapsed.sort();
            collapsed.dedup();
            t_collapse += t.elapsed();
            n_collapsed += collapsed.len();
            let t = Instant::now();
            collapsed.retain(|g| g.is_irreducible() && g.nowhere_overramified_given(&square_primes));
            t_retain += t.elapsed();
            n_retained += collapsed.len();
            let t = Instant::now();
            let groups = group_orbits(&collapsed).unwrap();
            t_group += t.elapsed();
            n_groups += groups.len();
            let t = Instant::now();
            for grp in &groups {
                let rep = &collapsed[grp[0]];
                let _ = rep.real_root_count() == 4;
                let _ = crate::qring::ring_of_form(rep)
                    .unwrap()
                    .is_maximal_given(&square_primes);
            }
            t_post += t.elapsed();
        }
        println!(
            "fields {} | scan {:?} ({} cands) | collapse {:?} ({} kept) | retain {:?} ({} kept) | group {:?} ({} groups) | post {:?}",
            admitted.len(), t_scan, n_cands, t_collapse, n_collapsed, t_retain, n_retained, t_group, n_groups, t_post
        );
    }

    /// The scan's solved-for-d-and-e algebra must reconstruct arbitrary forms
    /// from their own invariants.
    #[test]
    fn window_algebra_reconstructs_random_forms() {
        let mut rng = SplitMix64::new(0x5eed);
        let draw = |k: u64, rng: &mut SplitMix64| rng.below(2 * k + 1) as i128 - k as i128;
        let mut made = 0;
        while made < 300 {
            let (a, b, c, d, e) = (
                draw(6, &mut rng),
                draw(6, &mut rng),
                draw(6, &mut rng),
                draw(6, &mut rng),
                draw(6, &mut rng),
            );
            let g = BinaryQuartic::new(a, b, c, d, e);
            let (i, j) = g.invariants().unwrap();
            if a != 0 {
                let b0 = (i - c * c) * (72 * a * c - 27 * b * b) - 24 * a * c * c * c - 12 * a * j;
                assert_eq!(
                    324 * a * a * d * d - 81 * b * (4 * a * c - b * b) * d - b0,
                    0,
                    "d-quadratic fails at {:?}",
                    g
                );
                assert_eq!(12 * a * e, i - c * c + 3 * b * d);
            } else if b != 0 {
                assert_eq!(3 * b * d, c * c - i);
                assert_eq!(27 * b * b * e, 9 * b * c * d - 2 * c * c * c - j);
            }
            made += 1;
        }
    }

    #[test]
    fn degenerate_and_oversized_invariants_are_rejected() {
        assert_eq!(
            orbits_with_invariants(0, 0, RHO),
            Err(OrbitError::DegenerateInvariants)
        );
        assert_eq!(
            orbits_with_invariants(4, 16, RHO),
            Err(OrbitError::DegenerateInvariants)
        );
        assert_eq!(
            orbits_with_invariants(4, -16, RHO),
            Err(OrbitError::DegenerateInvariants)
        );
        assert_eq!(
            orbits_with_invariants(10_000_000, 0, RHO),
            Err(OrbitError::BudgetExceeded)
        );
    }

    /// Invariants of x^3 + 4x - 1 (two-torsion in its class group): exactly
    /// one irreducible nowhere-overramified orbit, with two real roots since
    /// the cubic is complex.
    #[test]
    fn orbit_set_for_a_class_number_two_field() {
        let set = orbits_with_invariants(-12, 27, RHO).unwrap();
        let class: Vec<&OrbitRep> = set
            .representatives
            .iter()
            .filter(|r| r.irreducible && r.nowhere_overramified == Some(true))
            .collect();
        assert_eq!(class.len(), 1);
        assert_eq!(class[0].real_root_count, 2);
        // disc = -283 is squarefree, so both conventions must coincide.
        let counts = class_orbit_counts(-12, 27, RHO).unwrap().unwrap();
        assert_eq!(
            counts,
            OrbitClassCounts {
                weak_total: 1,
                weak_real: 0,
                strict_total: 1,
                strict_real: 0,
            }
        );
    }

    /// Invariants of x^3 - x - 1 (class number one): no irreducible
    /// nowhere-overramified orbit at all.
    #[test]
    fn orbit_set_for_a_class_number_one_field() {
        let set = orbits_with_invariants(3, 27, RHO).unwrap();
        assert!(set
            .representatives
            .iter()
            .all(|r| !(r.irreducible && r.nowhere_overramified == Some(true))));
        assert_eq!(
            class_orbit_counts(3, 27, RHO).unwrap(),
            Some(OrbitClassCounts::default())
        );
    }

    /// Invariants of x^3 - 4x - 1 (totally real, class number one): no
    /// orbit with four real roots survives the class filters.
    #[test]
    fn orbit_set_for_a_totally_real_class_number_one_field() {
        let counts = class_orbit_counts(12, 27, RHO).unwrap().unwrap();
        assert_eq!(counts.weak_real, 0);
        assert_eq!(counts.strict_real, 0);
    }

    /// (12, 0) carries both definite orbits: x^4 + y^4 and its negative.
    #[test]
    fn definite_orbits_come_in_mirror_pairs() {
        let set = orbits_with_invariants(12, 0, RHO).unwrap();
        let definite: Vec<&OrbitRep> = set
            .representatives
            .iter()
            .filter(|r| r.real_root_count == 0)
            .collect();
        assert_eq!(definite.len(), 2);
        let plus = BinaryQuartic::new(1, 0, 0, 0, 1);
        let minus = plus.neg();
        assert!(definite
            .iter()
            .any(|r| qequiv::is_equivalent(&r.form, &plus).unwrap()));
        assert!(definite
            .iter()
            .any(|r| qequiv::is_equivalent(&r.form, &minus).unwrap()));
    }

    /// Negating a form negates J and fixes I, and preserves irreducibility,
    /// overramification, and the real root count; so the orbit sets of (I, J)
    /// and (I, -J) must match flag-for-flag.
    #[test]
    fn reflected_invariants_give_matching_orbit_sets() {
        for (i, j) in [(-12i128, 27i128), (3, 27), (12, 27), (9, -27), (5, 11)] {
            let a = orbits_with_invariants(i, j, RHO).unwrap();
            let b = orbits_with_invariants(i, -j, RHO).unwrap();
            let flags = |s: &QuarticOrbitSet| {
                let mut v: Vec<(bool, Option<bool>, usize)> = s
                    .representatives
                    .iter()
                    .map(|r| (r.irreducible, r.nowhere_overramified, r.real_root_count))
                    .collect();
                v.sort();
                v
            };
            assert_eq!(flags(&a), flags(&b), "mismatch at ({}, {})", i, j);
        }
    }

    /// Filtering the full orbit set must agree with the direct class counts.
    #[test]
    fn class_counts_agree_with_full_orbit_sets() {
        for (i, j) in [(-12i128, 27i128), (3, 27), (12, 27), (12, 0), (-8, 20)] {
            let set = orbits_with_invariants(i, j, RHO).unwrap();
            let expect_total = set
                .representatives
                .iter()
                .filter(|r| r.irreducible && r.nowhere_overramified == Some(true))
                .count();
            let expect_four = set
                .representatives
                .iter()
                .filter(|r| {
                    r.irreducible && r.nowhere_overramified == Some(true) && r.real_root_count == 4
                })
                .count();
            let counts = class_orbit_counts(i, j, RHO).unwrap().unwrap();
            assert_eq!(
                (counts.weak_total, counts.weak_real),
                (expect_total, expect_four),
                "mismatch at ({}, {})",
                i,
                j
            );
            assert!(counts.strict_total <= counts.weak_total);
            assert!(counts.strict_real <= counts.weak_real);
        }
    }

    /// The windowed search and the brute-force box scan must see exactly the
    /// same orbit counts on a small audit range.
    #[test]
    fn window_census_matches_box_scan_on_a_small_range() {
        let window = window_orbit_census(120).unwrap();
        let oracle = box_scan_orbit_census(120).unwrap();
        assert_eq!(window, oracle);
        assert!(!window.is_empty());
    }

    /// Manual calibration sweep for the window constants; run with
    /// `cargo test -p monocubic --release calibrate -- --ignored --nocapture`.
    #[test]
    #[ignore = "manual calibration sweep over the full audit range"]
    fn calibrate_window_constants() {
        let max_t = 10_000u128;
        let reference = window_census_with(max_t, (8, 1), (8, 1)).unwrap();
        eprintln!("reference pairs with orbits: {}", reference.len());
        for kappa in [(1u128, 1u128), (3, 2), (2, 1), (3, 1), (4, 1)] {
            let census = window_census_with(max_t, kappa, kappa).unwrap();
            let verdict = if census == reference {
                "matches reference".to_string()
            } else {
                let missing: usize = reference
                    .iter()
                    .map(|(k, n)| n - census.get(k).copied().unwrap_or(0))
                    .sum();
                format!("MISSES {} orbits", missing)
            };
            eprintln!("kappa = {:?}: {}", kappa, verdict);
        }
        let oracle = box_scan_orbit_census(max_t).unwrap();
        assert_eq!(window_orbit_census(max_t).unwrap(), oracle);
        eprintln!("box scan agrees with frozen constants on the full range");

        // Representative coefficient spread, to size the oracle boxes.
        let (mut ra, mut rb, mut rc, mut rd, mut rzb) = (0f64, 0f64, 0f64, 0f64, 0f64);
        for (&(i, j), _) in &oracle {
            let t = (i.unsigned_abs().pow(3) as f64).max(j.pow(2) as f64 / 4.0);
            let set = orbits_with_invariants(i, j, RHO).unwrap();
            for rep in &set.representatives {
                let [a, b, c, d, _] = rep.form.coeffs();
                if a != 0 {
                    ra = ra.max(a.unsigned_abs() as f64 / t.powf(1.0 / 6.0));
                    rb = rb.max(b.unsigned_abs() as f64 / t.powf(1.0 / 6.0));
                    rc = rc.max(c.unsigned_abs() as f64 / t.powf(1.0 / 3.0));
                    rd = rd.max(d.unsigned_abs() as f64 / t.powf(1.0 / 2.0));
                } else {
                    rzb = rzb.max(b.unsigned_abs() as f64 / t.powf(1.0 / 6.0));
                }
            }
        }
        eprintln!(
            "observed rep ratios: a/T^(1/6) = {:.3}, b/T^(1/6) = {:.3}, \
             c/T^(1/3) = {:.3}, d/T^(1/2) = {:.3}, zero-leading b/T^(1/6) = {:.3}",
            ra, rb, rc, rd, rzb
        );
    }
}
