//! Local analysis at each place: the etale algebra Q_p[x]/(f) falls into one
//! of five types; each type determines the local 2-torsion size, the
//! unramified-cohomology size, and the local mass. Family specifications
//! restrict signature and per-prime etale types.

use crate::arith::Overflow;
use crate::cubic::MonicCubic;
use crate::fp::FpPoly;
use crate::orders::{is_maximal_at, FieldClassification, Signature};
use num_rational::Rational64;
use num_traits::One;
use std::collections::{BTreeMap, BTreeSet};

/// Exact rational mass; never floating point.
pub type MassValue = Rational64;

/// Isomorphism type of the etale cubic algebra Q_p[x]/(f(x,1)) for a form
/// maximal at p. The first three are unramified at p, the last two ramified.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum EtaleCubicType {
    /// Q_p x Q_p x Q_p: three distinct roots mod p.
    Split,
    /// Q_p x (unramified quadratic): one root plus an irreducible quadratic.
    UnramQuad,
    /// Unramified cubic extension: irreducible mod p.
    UnramCubic,
    /// Q_p x (ramified quadratic): a double root plus a simple root.
    RamQuad,
    /// Totally ramified cubic: a triple root.
    RamCubic,
}

pub const ALL_ETALE_TYPES: [EtaleCubicType; 5] = [
    EtaleCubicType::Split,
    EtaleCubicType::UnramQuad,
    EtaleCubicType::UnramCubic,
    EtaleCubicType::RamQuad,
    EtaleCubicType::RamCubic,
];

/// A place of Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Place {
    Infinity,
    Finite(u64),
}

/// The two local-condition systems whose masses appear in the predictions:
/// the everywhere-unramified structure and its relaxation at the real place
/// (classes that remain soluble at infinity).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelmerStructure {
    Unramified,
    SolubleAtInfinity,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LocalError {
    #[error("form is not maximal at {p}; etale classification would be wrong")]
    NotMaximal { p: u64 },
    #[error("degenerate form: discriminant is zero")]
    Degenerate,
    #[error("mass undefined for this structure/signature/place combination")]
    UnsupportedMass,
    #[error(transparent)]
    Overflow(#[from] Overflow),
}

/// Classify Q_p[x]/(f) among the five types. Requires maximality at p (the
/// splitting of p then mirrors the factorization of f mod p); reducible f is
/// fine, the classification is of the etale algebra.
pub fn etale_type(f: &MonicCubic, p: u64) -> Result<EtaleCubicType, LocalError> {
    if f.disc()? == 0 {
        return Err(LocalError::Degenerate);
    }
    if !is_maximal_at(f, p)? {
        return Err(LocalError::NotMaximal { p });
    }
    let fbar = FpPoly::new(p, &[f.c, f.b, f.a, 1]);
    let roots = fbar.roots_with_multiplicity();
    let mults: Vec<u32> = {
        let mut m: Vec<u32> = roots.iter().map(|&(_, m)| m).collect();
        m.sort_unstable();
        m
    };
    Ok(match mults.as_slice() {
        [1, 1, 1] => EtaleCubicType::Split,
        // One root plus a rootless (hence irreducible) quadratic cofactor.
        [1] => EtaleCubicType::UnramQuad,
        [] => EtaleCubicType::UnramCubic,
        [1, 2] => EtaleCubicType::RamQuad,
        [3] => EtaleCubicType::RamCubic,
        // A doubled root forces a third root mod p (degree count), and a
        // form maximal at p cannot factor as [2] alone.
        other => unreachable!("impossible multiplicity pattern {other:?}"),
    })
}

/// #E(Q_p)[2] as a function of the etale type: 4, 2, 1, 2, 1.
pub fn two_torsion_size_of_type(t: EtaleCubicType) -> u64 {
    match t {
        EtaleCubicType::Split => 4,
        EtaleCubicType::UnramQuad => 2,
        EtaleCubicType::UnramCubic => 1,
        EtaleCubicType::RamQuad => 2,
        EtaleCubicType::RamCubic => 1,
    }
}

/// Size of the local 2-torsion group at p for a form maximal at p.
pub fn local_two_torsion_size(f: &MonicCubic, p: u64) -> Result<u64, LocalError> {
    Ok(two_torsion_size_of_type(etale_type(f, p)?))
}

/// Size of the unramified local-cohomology subgroup at a place: equal to the
/// local 2-torsion size at finite places, and 1 at the infinite place.
pub fn h1_unramified_size(f: &MonicCubic, v: Place) -> Result<u64, LocalError> {
    match v {
        Place::Infinity => {
            if f.disc()? == 0 {
                return Err(LocalError::Degenerate);
            }
            Ok(1)
        }
        Place::Finite(p) => local_two_torsion_size(f, p),
    }
}

/// The exact local mass of the structure at the given place.
///
/// Every finite-place mass is 1 for both structures. At infinity the
/// unramified structure has mass 1/4 (totally real) or 1/2 (complex); the
/// soluble-at-infinity relaxation has mass 1/2 and only applies to the
/// totally real side (it coincides with the unramified structure otherwise).
pub fn local_mass(
    structure: SelmerStructure,
    sig: Signature,
    v: Place,
) -> Result<MassValue, LocalError> {
    match v {
        Place::Finite(_) => Ok(MassValue::one()),
        Place::Infinity => match (structure, sig) {
            (SelmerStructure::Unramified, Signature::TotallyReal) => Ok(MassValue::new(1, 4)),
            (SelmerStructure::Unramified, Signature::Complex) => Ok(MassValue::new(1, 2)),
            (SelmerStructure::SolubleAtInfinity, Signature::TotallyReal) => {
                Ok(MassValue::new(1, 2))
            }
            (SelmerStructure::SolubleAtInfinity, Signature::Complex) => {
                Err(LocalError::UnsupportedMass)
            }
        },
    }
}

/// Signature restriction of a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SignatureFilter {
    #[serde(rename = "real")]
    TotallyReal,
    #[serde(rename = "complex")]
    Complex,
    #[serde(rename = "all")]
    All,
}

impl SignatureFilter {
    pub fn matches(self, sig: Signature) -> bool {
        match self {
            SignatureFilter::All => true,
            SignatureFilter::TotallyReal => sig == Signature::TotallyReal,
            SignatureFilter::Complex => sig == Signature::Complex,
        }
    }
}

/// A family of fields cut out by a signature condition and finitely many
/// per-prime etale-type conditions; unlisted primes are unconstrained.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FamilySpec {
    #[serde(rename = "signature")]
    pub signature_filter: SignatureFilter,
    #[serde(rename = "primes", default)]
    pub prime_conditions: BTreeMap<u64, BTreeSet<EtaleCubicType>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FamilySpecError {
    #[error("prime list key {0} is not prime")]
    NotPrime(u64),
    #[error("empty type list for prime {0}")]
    EmptyTypes(u64),
    #[error("invalid family JSON: {0}")]
    Json(String),
}

impl Default for FamilySpec {
    fn default() -> Self {
        FamilySpec {
            signature_filter: SignatureFilter::All,
            prime_conditions: BTreeMap::new(),
        }
    }
}

impl FamilySpec {
    pub fn from_json_str(s: &str) -> Result<Self, FamilySpecError> {
        let spec: FamilySpec =
            serde_json::from_str(s).map_err(|e| FamilySpecError::Json(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), FamilySpecError> {
        for (&p, types) in &self.prime_conditions {
            if !crate::arith::is_prime(p as u128) {
                return Err(FamilySpecError::NotPrime(p));
            }
            if types.is_empty() {
                return Err(FamilySpecError::EmptyTypes(p));
            }
        }
        Ok(())
    }

    /// Primes whose allowed set omits one of the four not-totally-ramified
    /// types (Split, UnramQuad, UnramCubic, RamQuad). Such a restriction
    /// leaves the regime in which the mass predictions are proved, so
    /// consumers surface a warning.
    pub fn largeness_warning_primes(&self) -> Vec<u64> {
        let required = [
            EtaleCubicType::Split,
            EtaleCubicType::UnramQuad,
            EtaleCubicType::UnramCubic,
            EtaleCubicType::RamQuad,
        ];
        self.prime_conditions
            .iter()
            .filter(|(_, types)| required.iter().any(|t| !types.contains(t)))
            .map(|(&p, _)| p)
            .collect()
    }

    pub fn has_largeness_warning(&self) -> bool {
        !self.largeness_warning_primes().is_empty()
    }
}

/// Membership test: signature matches and each listed prime's etale type is
/// allowed. The classification supplies the signature; etale types are
/// computed per listed prime.
pub fn family_contains(
    spec: &FamilySpec,
    f: &MonicCubic,
    cls: &FieldClassification,
) -> Result<bool, LocalError> {
    if !spec.signature_filter.matches(cls.signature) {
        return Ok(false);
    }
    for (&p, allowed) in &spec.prime_conditions {
        if !allowed.contains(&etale_type(f, p)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Numerical sanity check of the finite-place mass: sample forms uniformly
/// mod p^4, discard degenerate or non-p-maximal samples, and average
/// h1_unramified_size / local_two_torsion_size. Every kept term is exactly 1,
/// so the estimate must be exactly 1; deterministic for a fixed seed.
pub fn monte_carlo_mass_check(p: u64, samples: u64, seed: u64) -> Result<MassValue, LocalError> {
    assert!(samples >= 1);
    let modulus = (p as i128).pow(4);
    let mut rng = crate::arith::SplitMix64::new(seed);
    let mut total = MassValue::new(0, 1);
    let mut kept = 0i64;
    for _ in 0..samples {
        let a = (rng.next_u64() as i128).rem_euclid(modulus);
        let b = (rng.next_u64() as i128).rem_euclid(modulus);
        let c = (rng.next_u64() as i128).rem_euclid(modulus);
        let f = MonicCubic::new(a, b, c);
        if f.disc()? == 0 || !is_maximal_at(&f, p)? {
            continue;
        }
        let h1 = h1_unramified_size(&f, Place::Finite(p))?;
        let tors = local_two_torsion_size(&f, p)?;
        total += MassValue::new(h1 as i64, tors as i64);
        kept += 1;
    }
    assert!(kept > 0, "all samples discarded");
    Ok(total / MassValue::new(kept, 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn etale_examples() {
        // x^3 - x y^2 at 5: roots 0, 1, 4 mod 5.
        let f = MonicCubic::new(0, -1, 0);
        assert_eq!(etale_type(&f, 5).unwrap(), EtaleCubicType::Split);
        // x^3 - x - 1 at 23: (x-10)^2 (x-3) mod 23.
        let g = MonicCubic::new(0, -1, -1);
        assert_eq!(etale_type(&g, 23).unwrap(), EtaleCubicType::RamQuad);
        // x^3 - x - 1 at 2: irreducible mod 2.
        assert_eq!(etale_type(&g, 2).unwrap(), EtaleCubicType::UnramCubic);
        // x^3 - x y^2 is not maximal at 2 (index 2): rejected there.
        assert_eq!(etale_type(&f, 2), Err(LocalError::NotMaximal { p: 2 }));
    }

    #[test]
    fn torsion_size_table() {
        let sizes: Vec<u64> = ALL_ETALE_TYPES
            .iter()
            .map(|&t| two_torsion_size_of_type(t))
            .collect();
        assert_eq!(sizes, vec![4, 2, 1, 2, 1]);
    }

    #[test]
    fn h1_examples() {
        let f = MonicCubic::new(0, -1, 0);
        let g = MonicCubic::new(0, -1, -1);
        assert_eq!(h1_unramified_size(&g, Place::Infinity).unwrap(), 1);
        assert_eq!(h1_unramified_size(&f, Place::Finite(5)).unwrap(), 4);
        assert_eq!(h1_unramified_size(&g, Place::Finite(23)).unwrap(), 2);
    }

    #[test]
    fn masses_are_exact() {
        use SelmerStructure::*;
        use Signature::*;
        assert_eq!(
            local_mass(Unramified, TotallyReal, Place::Infinity).unwrap(),
            MassValue::new(1, 4)
        );
        assert_eq!(
            local_mass(Unramified, Complex, Place::Infinity).unwrap(),
            MassValue::new(1, 2)
        );
        assert_eq!(
            local_mass(Unramified, TotallyReal, Place::Finite(7)).unwrap(),
            MassValue::one()
        );
        assert_eq!(
            local_mass(SolubleAtInfinity, TotallyReal, Place::Infinity).unwrap(),
            MassValue::new(1, 2)
        );
        assert_eq!(
            local_mass(SolubleAtInfinity, Complex, Place::Infinity),
            Err(LocalError::UnsupportedMass)
        );
        // 4 * (1/4) = 1 and 2 * (1/2) = 1 exactly.
        assert!(
            (local_mass(Unramified, TotallyReal, Place::Infinity).unwrap()
                * MassValue::new(4, 1))
            .is_one()
        );
        assert!(
            (local_mass(Unramified, Complex, Place::Infinity).unwrap() * MassValue::new(2, 1))
                .is_one()
        );
    }

    #[test]
    fn ramified_iff_p_divides_disc() {
        let mut rng = crate::arith::SplitMix64::new(7);
        let mut checked = 0;
        while checked < 200 {
            let a = (rng.next_u64() % 7) as i128 - 3;
            let b = (rng.next_u64() % 31) as i128 - 15;
            let c = (rng.next_u64() % 31) as i128 - 15;
            let f = MonicCubic::new(a, b, c);
            let disc = f.disc().unwrap();
            if disc == 0 {
                continue;
            }
            for p in [2u64, 3, 5, 7, 11, 13] {
                let Ok(t) = etale_type(&f, p) else { continue };
                let ramified =
                    matches!(t, EtaleCubicType::RamQuad | EtaleCubicType::RamCubic);
                assert_eq!(
                    ramified,
                    disc % p as i128 == 0,
                    "f = {f:?}, p = {p}, type {t:?}, disc {disc}"
                );
                checked += 1;
            }
        }
    }

    #[test]
    fn family_spec_json_and_membership() {
        let spec = FamilySpec::from_json_str(
            r#"{"signature":"all","primes":{"2":["split"]}}"#,
        )
        .unwrap();
        let g = MonicCubic::new(0, -1, -1);
        let cls = crate::orders::classify(&g, 1 << 16).unwrap();
        assert!(!family_contains(&spec, &g, &cls).unwrap());

        let spec_cubic = FamilySpec::from_json_str(
            r#"{"signature":"all","primes":{"2":["unram_cubic"]}}"#,
        )
        .unwrap();
        assert!(family_contains(&spec_cubic, &g, &cls).unwrap());

        let vacuous = FamilySpec::default();
        assert!(family_contains(&vacuous, &g, &cls).unwrap());
        assert!(!vacuous.has_largeness_warning());

        // Omitting a not-totally-ramified type raises the warning.
        assert!(spec.has_largeness_warning());
        let full = FamilySpec::from_json_str(
            r#"{"signature":"real","primes":{"3":["split","unram_quad","unram_cubic","ram_quad"]}}"#,
        )
        .unwrap();
        assert!(!full.has_largeness_warning());
        let with_ram_cubic = FamilySpec::from_json_str(
            r#"{"signature":"real","primes":{"3":["split","unram_quad","unram_cubic","ram_quad","ram_cubic"]}}"#,
        )
        .unwrap();
        assert!(!with_ram_cubic.has_largeness_warning());

        // Bad inputs.
        assert!(matches!(
            FamilySpec::from_json_str(r#"{"signature":"all","primes":{"4":["split"]}}"#),
            Err(FamilySpecError::NotPrime(4))
        ));
        assert!(matches!(
            FamilySpec::from_json_str(r#"{"signature":"all","primes":{"5":[]}}"#),
            Err(FamilySpecError::EmptyTypes(5))
        ));

        // Round trip.
        let text = serde_json::to_string(&full).unwrap();
        assert_eq!(FamilySpec::from_json_str(&text).unwrap(), full);
    }

    #[test]
    fn monte_carlo_mass_is_exactly_one() {
        for p in [2u64, 3, 5] {
            let est = monte_carlo_mass_check(p, 1000, 1).unwrap();
            assert!(est.is_one(), "p = {p}: {est}");
        }
    }

    #[test]
    fn lemma_table_on_sampled_pairs() {
        // >= 500 (maximal form, prime) pairs: h1 = 2-torsion size, and the
        // type -> size map is the frozen (4,2,1,2,1) table.
        let mut rng = crate::arith::SplitMix64::new(99);
        let mut pairs = 0;
        while pairs < 500 {
            let a = (rng.next_u64() % 9) as i128 - 4;
            let b = (rng.next_u64() % 41) as i128 - 20;
            let c = (rng.next_u64() % 41) as i128 - 20;
            let f = MonicCubic::new(a, b, c);
            if f.disc().unwrap() == 0 {
                continue;
            }
            for p in [2u64, 3, 5, 7, 11] {
                let Ok(t) = etale_type(&f, p) else { continue };
                let h1 = h1_unramified_size(&f, Place::Finite(p)).unwrap();
                let tors = local_two_torsion_size(&f, p).unwrap();
                assert_eq!(h1, tors);
                assert_eq!(tors, two_torsion_size_of_type(t));
                pairs += 1;
            }
        }
    }
}
