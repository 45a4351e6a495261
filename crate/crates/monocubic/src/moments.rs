//! Predicted moments of 2-class and narrow 2-class numbers as exact
//! rationals derived from the local mass table, plus streaming empirical
//! moment estimation over height-enumerated fields.
//!
//! The predictor layer is pure arithmetic: first moment 1 + n*M, second
//! moment 1 + 6M + 8M^2, and the narrow values by inclusion-exclusion
//! between the unramified and soluble-at-infinity structures. Empirical
//! moments stream the corpus survey, exclude exactly the populations the
//! predictions exclude (reducible, cyclic cubic, non-maximal, indeterminate),
//! and report running averages at X/4, X/2, X so convergence can be judged
//! without arbitrary tolerances.

use crate::arith::Overflow;
use crate::class_groups::DirectConfig;
use crate::corpus::{survey, ExclusionReason, FieldOutcome, FieldRecord, SurveyError, SurveyMethod};
use crate::cubic::height_times_4_of;
use crate::local::{family_contains, local_mass, FamilySpec, LocalError, Place, SelmerStructure};
use crate::orders::{classify, Signature};
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MomentError {
    #[error(transparent)]
    Survey(#[from] SurveyError),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Overflow(#[from] Overflow),
}

// ---------------------------------------------------------------------------
// Predictors (exact rationals).
// ---------------------------------------------------------------------------

/// Average n-torsion Selmer size for total mass M: 1 + n*M.
pub fn predicted_first_moment(n: u32, total_mass: Rational64) -> Rational64 {
    assert!(
        (2..=5).contains(&n),
        "first-moment formula covers n in 2..=5"
    );
    assert!(total_mass >= Rational64::zero(), "mass must be nonnegative");
    Rational64::one() + Rational64::from_integer(n as i64) * total_mass
}

/// Average squared 2-torsion Selmer size for total mass M: 1 + 6M + 8M^2.
pub fn predicted_second_moment(m: Rational64) -> Rational64 {
    assert!(m >= Rational64::zero(), "mass must be nonnegative");
    Rational64::one() + Rational64::from_integer(6) * m + Rational64::from_integer(8) * m * m
}

/// Average 4-Selmer size from the 2-structure and 4-structure masses:
/// 1 + 2*M2 + 4*M4. Pure arithmetic; nothing in this artifact enumerates
/// the n = 4 side.
pub fn predicted_fourth_selmer_first_moment(m2: Rational64, m4: Rational64) -> Rational64 {
    assert!(m2 >= Rational64::zero() && m4 >= Rational64::zero());
    Rational64::one()
        + Rational64::from_integer(2) * m2
        + Rational64::from_integer(4) * m4
}

/// Whether a predicted value is unconditional or an upper bound whose
/// exactness is conditional.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueStatus {
    Exact,
    ConditionalUpperBound,
}

impl ValueStatus {
    pub fn label(self) -> &'static str {
        match self {
            ValueStatus::Exact => "exact",
            ValueStatus::ConditionalUpperBound => {
                "upper bound, exact conditional on a tail estimate"
            }
        }
    }
}

impl Serialize for ValueStatus {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

fn ser_rat<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// The four predicted moments for one signature regime, with a status flag
/// per value (first moments are exact; second moments are upper bounds,
/// exact conditional on a tail estimate).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PredictedMoments {
    pub regime: Signature,
    #[serde(serialize_with = "ser_rat")]
    pub first_cl2: Rational64,
    pub first_cl2_status: ValueStatus,
    #[serde(serialize_with = "ser_rat")]
    pub second_cl2: Rational64,
    pub second_cl2_status: ValueStatus,
    #[serde(serialize_with = "ser_rat")]
    pub first_cl2_plus: Rational64,
    pub first_cl2_plus_status: ValueStatus,
    #[serde(serialize_with = "ser_rat")]
    pub second_cl2_plus: Rational64,
    pub second_cl2_plus_status: ValueStatus,
}

/// Total mass of a structure over the family's constrained places: the mass
/// at infinity times the (all-1) finite masses of the listed primes.
fn total_mass(
    structure: SelmerStructure,
    sig: Signature,
    spec: &FamilySpec,
) -> Result<Rational64, LocalError> {
    let mut m = local_mass(structure, sig, Place::Infinity)?;
    for &p in spec.prime_conditions.keys() {
        m *= local_mass(structure, sig, Place::Finite(p))?;
    }
    Ok(m)
}

/// Narrow first and second moments by inclusion-exclusion between the
/// relaxed (soluble-at-infinity) and unramified structures:
/// narrow = (relaxed - ordinary) + relaxed, per moment.
pub fn narrow_moments_with(m_tilde: Rational64, m: Rational64) -> (Rational64, Rational64) {
    let first = (predicted_first_moment(2, m_tilde) - predicted_first_moment(2, m))
        + predicted_first_moment(2, m_tilde);
    let second =
        (predicted_second_moment(m_tilde) - predicted_second_moment(m)) + predicted_second_moment(m_tilde);
    (first, second)
}

/// Predicted moments for one regime under a family's finite conditions
/// (which never change the values: every finite mass is 1).
pub fn predicted_moments(
    regime: Signature,
    spec: &FamilySpec,
) -> Result<PredictedMoments, LocalError> {
    let m = total_mass(SelmerStructure::Unramified, regime, spec)?;
    let first_cl2 = predicted_first_moment(2, m);
    let second_cl2 = predicted_second_moment(m);
    let (first_cl2_plus, second_cl2_plus) = match regime {
        Signature::Complex => (first_cl2, second_cl2),
        Signature::TotallyReal => {
            let m_tilde = total_mass(SelmerStructure::SolubleAtInfinity, regime, spec)?;
            narrow_moments_with(m_tilde, m)
        }
    };
    Ok(PredictedMoments {
        regime,
        first_cl2,
        first_cl2_status: ValueStatus::Exact,
        second_cl2,
        second_cl2_status: ValueStatus::ConditionalUpperBound,
        first_cl2_plus,
        first_cl2_plus_status: ValueStatus::Exact,
        second_cl2_plus,
        second_cl2_plus_status: ValueStatus::ConditionalUpperBound,
    })
}

/// Predicted moments for the totally real regime, narrow values included.
pub fn predicted_narrow_moments() -> PredictedMoments {
    predicted_moments(Signature::TotallyReal, &FamilySpec::default())
        .expect("unconstrained masses always evaluate")
}

// ---------------------------------------------------------------------------
// Streaming accumulation.
// ---------------------------------------------------------------------------

/// Mergeable sums of class-number data over a set of fields.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MomentAccumulator {
    pub n_fields: u64,
    pub sum_cl2: u64,
    pub sum_cl2_sq: u64,
    pub sum_cl2p: u64,
    pub sum_cl2p_sq: u64,
    pub excluded_counts: BTreeMap<ExclusionReason, u64>,
}

impl MomentAccumulator {
    pub fn add_field(&mut self, cl2: u64, cl2_plus: u64) -> Result<(), Overflow> {
        let ck = |a: u64, b: u64| a.checked_add(b).ok_or(Overflow("moment sum"));
        let sq = |v: u64| v.checked_mul(v).ok_or(Overflow("moment square"));
        self.n_fields = ck(self.n_fields, 1)?;
        self.sum_cl2 = ck(self.sum_cl2, cl2)?;
        self.sum_cl2_sq = ck(self.sum_cl2_sq, sq(cl2)?)?;
        self.sum_cl2p = ck(self.sum_cl2p, cl2_plus)?;
        self.sum_cl2p_sq = ck(self.sum_cl2p_sq, sq(cl2_plus)?)?;
        Ok(())
    }

    pub fn add_exclusion(&mut self, reason: ExclusionReason) {
        *self.excluded_counts.entry(reason).or_insert(0) += 1;
    }

    /// Componentwise sum; associative and commutative.
    pub fn merge(&self, other: &MomentAccumulator) -> Result<MomentAccumulator, Overflow> {
        let ck = |a: u64, b: u64| a.checked_add(b).ok_or(Overflow("moment merge"));
        let mut excluded_counts = self.excluded_counts.clone();
        for (&k, &v) in &other.excluded_counts {
            let slot = excluded_counts.entry(k).or_insert(0);
            *slot = ck(*slot, v)?;
        }
        Ok(MomentAccumulator {
            n_fields: ck(self.n_fields, other.n_fields)?,
            sum_cl2: ck(self.sum_cl2, other.sum_cl2)?,
            sum_cl2_sq: ck(self.sum_cl2_sq, other.sum_cl2_sq)?,
            sum_cl2p: ck(self.sum_cl2p, other.sum_cl2p)?,
            sum_cl2p_sq: ck(self.sum_cl2p_sq, other.sum_cl2p_sq)?,
            excluded_counts,
        })
    }

    pub fn first_moment_cl2(&self) -> Option<f64> {
        (self.n_fields > 0).then(|| self.sum_cl2 as f64 / self.n_fields as f64)
    }

    pub fn second_moment_cl2(&self) -> Option<f64> {
        (self.n_fields > 0).then(|| self.sum_cl2_sq as f64 / self.n_fields as f64)
    }

    pub fn first_moment_cl2_plus(&self) -> Option<f64> {
        (self.n_fields > 0).then(|| self.sum_cl2p as f64 / self.n_fields as f64)
    }

    pub fn second_moment_cl2_plus(&self) -> Option<f64> {
        (self.n_fields > 0).then(|| self.sum_cl2p_sq as f64 / self.n_fields as f64)
    }
}

// ---------------------------------------------------------------------------
// Report assembly.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentPair {
    /// Empirical first moment (mean); absent when no fields qualified.
    pub m1: Option<f64>,
    /// Empirical second moment (mean square); absent when no fields
    /// qualified.
    pub m2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunningEntry {
    #[serde(rename = "X")]
    pub x: u128,
    pub m1: Option<f64>,
    pub n_fields: u64,
}

fn ser_excluded<S: Serializer>(
    m: &BTreeMap<ExclusionReason, u64>,
    s: S,
) -> Result<S::Ok, S::Error> {
    let mut map = BTreeMap::new();
    for (&k, &v) in m {
        map.insert(k.label(), v);
    }
    map.serialize(s)
}

fn ser_predicted<S: Serializer>(v: &Vec<PredictedMoments>, s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for p in v {
        seq.serialize_element(p)?;
    }
    seq.end()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    #[serde(rename = "X")]
    pub x: u128,
    pub family: FamilySpec,
    pub n_fields: u64,
    #[serde(serialize_with = "ser_excluded")]
    pub excluded: BTreeMap<ExclusionReason, u64>,
    pub cl2: MomentPair,
    pub cl2_plus: MomentPair,
    /// One entry per regime admitted by the family's signature filter.
    #[serde(serialize_with = "ser_predicted")]
    pub predicted: Vec<PredictedMoments>,
    /// Running first moment of cl2 at X/4, X/2, X.
    pub running: Vec<RunningEntry>,
    /// True when the family restricts some prime's allowed types beyond the
    /// regime in which the mass predictions are proved.
    pub largeness_warning: bool,
}

/// Accumulate one survey's records into per-threshold accumulators and build
/// the report. The survey itself is parallel; this pass is sequential and
/// deterministic.
pub fn empirical_moments(
    x: u128,
    spec: &FamilySpec,
    method: SurveyMethod,
    cfg: &DirectConfig,
) -> Result<MomentReport, MomentError> {
    let records = survey(x, method, cfg)?;
    report_from_records(x, spec, cfg, &records)
}

/// Build a moment report from already-surveyed records (which must cover
/// height <= x).
pub fn report_from_records(
    x: u128,
    spec: &FamilySpec,
    cfg: &DirectConfig,
    records: &[FieldRecord],
) -> Result<MomentReport, MomentError> {
    let thresholds = [x / 4, x / 2, x];
    let mut accs = [
        MomentAccumulator::default(),
        MomentAccumulator::default(),
        MomentAccumulator::default(),
    ];
    for r in records {
        let h4 = height_times_4_of(r.i, r.j)?;
        let stages = thresholds.map(|t| h4 <= t.saturating_mul(4));
        match &r.outcome {
            FieldOutcome::Excluded(reason) => {
                for (acc, &live) in accs.iter_mut().zip(&stages) {
                    if live {
                        acc.add_exclusion(*reason);
                    }
                }
            }
            FieldOutcome::Included { data, .. } => {
                let f = crate::cubic::MonicCubic::new(r.a, r.b, r.c);
                let cls = classify(&f, cfg.rho_budget)?;
                if !family_contains(spec, &f, &cls)? {
                    continue;
                }
                for (acc, &live) in accs.iter_mut().zip(&stages) {
                    if live {
                        acc.add_field(data.cl2_size, data.cl2_plus_size)?;
                    }
                }
            }
        }
    }
    let [q, h, full] = accs;
    let predicted = [Signature::TotallyReal, Signature::Complex]
        .into_iter()
        .filter(|&sig| spec.signature_filter.matches(sig))
        .map(|sig| predicted_moments(sig, spec))
        .collect::<Result<Vec<_>, _>>()?;
    let running = vec![
        RunningEntry {
            x: thresholds[0],
            m1: q.first_moment_cl2(),
            n_fields: q.n_fields,
        },
        RunningEntry {
            x: thresholds[1],
            m1: h.first_moment_cl2(),
            n_fields: h.n_fields,
        },
        RunningEntry {
            x: thresholds[2],
            m1: full.first_moment_cl2(),
            n_fields: full.n_fields,
        },
    ];
    Ok(MomentReport {
        x,
        family: spec.clone(),
        n_fields: full.n_fields,
        excluded: full.excluded_counts.clone(),
        cl2: MomentPair {
            m1: full.first_moment_cl2(),
            m2: full.second_moment_cl2(),
        },
        cl2_plus: MomentPair {
            m1: full.first_moment_cl2_plus(),
            m2: full.second_moment_cl2_plus(),
        },
        predicted,
        running,
        largeness_warning: spec.has_largeness_warning(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::SignatureFilter;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn predictors_reproduce_the_six_frozen_values() {
        // Totally real: ordinary 3/2 and 3; narrow 5/2 and 9.
        let tr = predicted_moments(Signature::TotallyReal, &FamilySpec::default()).unwrap();
        assert_eq!(tr.first_cl2, r(3, 2));
        assert_eq!(tr.second_cl2, r(3, 1));
        assert_eq!(tr.first_cl2_plus, r(5, 2));
        assert_eq!(tr.second_cl2_plus, r(9, 1));
        // Complex: 2 and 6, narrow coincides.
        let cx = predicted_moments(Signature::Complex, &FamilySpec::default()).unwrap();
        assert_eq!(cx.first_cl2, r(2, 1));
        assert_eq!(cx.second_cl2, r(6, 1));
        assert_eq!(cx.first_cl2_plus, r(2, 1));
        assert_eq!(cx.second_cl2_plus, r(6, 1));
        // Status flags: first moments exact, second moments conditional.
        assert_eq!(tr.first_cl2_status, ValueStatus::Exact);
        assert_eq!(tr.second_cl2_status, ValueStatus::ConditionalUpperBound);
        assert_eq!(
            tr.second_cl2_plus_status.label(),
            "upper bound, exact conditional on a tail estimate"
        );
        // The narrow constructor is the totally real regime.
        assert_eq!(predicted_narrow_moments(), tr);
    }

    #[test]
    fn predictor_arithmetic_spot_values() {
        assert_eq!(predicted_first_moment(2, r(1, 4)), r(3, 2));
        assert_eq!(predicted_first_moment(2, r(1, 2)), r(2, 1));
        assert_eq!(predicted_first_moment(2, r(0, 1)), r(1, 1));
        assert_eq!(predicted_second_moment(r(1, 4)), r(3, 1));
        assert_eq!(predicted_second_moment(r(1, 2)), r(6, 1));
        assert_eq!(predicted_second_moment(r(0, 1)), r(1, 1));
        assert_eq!(
            predicted_fourth_selmer_first_moment(r(0, 1), r(0, 1)),
            r(1, 1)
        );
        assert_eq!(
            predicted_fourth_selmer_first_moment(r(1, 4), r(1, 4)),
            r(5, 2)
        );
        assert_eq!(
            predicted_fourth_selmer_first_moment(r(1, 2), r(1, 2)),
            r(4, 1)
        );
    }

    #[test]
    fn variance_is_nonnegative_for_all_masses() {
        for num in 0..=8 {
            let m = r(num, 4);
            let var = predicted_second_moment(m) - {
                let f = predicted_first_moment(2, m);
                f * f
            };
            assert_eq!(var, r(2, 1) * m + r(4, 1) * m * m);
            assert!(var >= r(0, 1));
        }
    }

    #[test]
    fn narrow_collapses_when_both_masses_coincide() {
        for num in 0..=4 {
            let m = r(num, 4);
            let (first, second) = narrow_moments_with(m, m);
            assert_eq!(first, predicted_first_moment(2, m));
            assert_eq!(second, predicted_second_moment(m));
        }
    }

    #[test]
    fn finite_prime_conditions_never_move_predictions() {
        let constrained = FamilySpec::from_json_str(
            r#"{"signature":"all","primes":{"2":["split","unram_cubic"],"7":["ram_quad"]}}"#,
        )
        .unwrap();
        for sig in [Signature::TotallyReal, Signature::Complex] {
            assert_eq!(
                predicted_moments(sig, &constrained).unwrap(),
                predicted_moments(sig, &FamilySpec::default()).unwrap()
            );
        }
    }

    #[test]
    fn accumulator_merge_is_a_commutative_monoid() {
        let mut a = MomentAccumulator::default();
        a.add_field(2, 4).unwrap();
        a.add_field(1, 1).unwrap();
        a.add_exclusion(ExclusionReason::Reducible);
        let mut b = MomentAccumulator::default();
        b.add_field(4, 4).unwrap();
        b.add_exclusion(ExclusionReason::Reducible);
        b.add_exclusion(ExclusionReason::NonMaximal);
        let empty = MomentAccumulator::default();
        assert_eq!(a.merge(&empty).unwrap(), a);
        assert_eq!(a.merge(&b).unwrap(), b.merge(&a).unwrap());
        let c = {
            let mut c = MomentAccumulator::default();
            c.add_field(8, 16).unwrap();
            c
        };
        assert_eq!(
            a.merge(&b).unwrap().merge(&c).unwrap(),
            a.merge(&b.merge(&c).unwrap()).unwrap()
        );
        let ab = a.merge(&b).unwrap();
        assert_eq!(ab.n_fields, 3);
        assert_eq!(ab.sum_cl2, 7);
        assert_eq!(ab.sum_cl2_sq, 21);
        assert_eq!(ab.excluded_counts[&ExclusionReason::Reducible], 2);
    }

    #[test]
    fn empty_height_range_reports_undefined_moments() {
        let report = empirical_moments(
            1,
            &FamilySpec::default(),
            SurveyMethod::Quartic,
            &DirectConfig::default(),
        )
        .unwrap();
        assert_eq!(report.n_fields, 0);
        assert_eq!(report.cl2.m1, None);
        assert_eq!(report.cl2.m2, None);
        assert_eq!(report.cl2_plus.m1, None);
    }

    #[test]
    fn moments_are_invariant_under_height_partitioning() {
        let cfg = DirectConfig::default();
        let records = survey(2_000, SurveyMethod::Quartic, &cfg).unwrap();
        // Whole-range accumulator.
        let mut whole = MomentAccumulator::default();
        // Two parts split at height 700 (height_times_4 = 2800).
        let mut low = MomentAccumulator::default();
        let mut high = MomentAccumulator::default();
        for r in &records {
            let h4 = height_times_4_of(r.i, r.j).unwrap();
            let part = if h4 <= 2_800 { &mut low } else { &mut high };
            match &r.outcome {
                FieldOutcome::Excluded(reason) => {
                    whole.add_exclusion(*reason);
                    part.add_exclusion(*reason);
                }
                FieldOutcome::Included { data, .. } => {
                    whole.add_field(data.cl2_size, data.cl2_plus_size).unwrap();
                    part.add_field(data.cl2_size, data.cl2_plus_size).unwrap();
                }
            }
        }
        assert_eq!(low.merge(&high).unwrap(), whole);
    }

    #[test]
    fn complex_family_report_sits_in_the_sanity_corridor() {
        // Cross-validated small-corpus report: no discrepancies by
        // construction (the audit would have panicked), first moment of a
        // genuine distribution of 2-class numbers.
        let spec = FamilySpec {
            signature_filter: SignatureFilter::Complex,
            prime_conditions: Default::default(),
        };
        let report = empirical_moments(
            10_000,
            &spec,
            SurveyMethod::Both,
            &DirectConfig::default(),
        )
        .unwrap();
        assert!(report.n_fields > 0);
        let m1 = report.cl2.m1.unwrap();
        assert!((1.0..=4.0).contains(&m1), "first moment {m1} out of corridor");
        assert_eq!(report.predicted.len(), 1);
        assert_eq!(report.predicted[0].regime, Signature::Complex);
        assert_eq!(report.running.len(), 3);
        assert!(!report.largeness_warning);
        // Report serializes with the documented keys.
        let json = serde_json::to_value(&report).unwrap();
        for key in [
            "X",
            "family",
            "n_fields",
            "excluded",
            "cl2",
            "cl2_plus",
            "predicted",
            "running",
        ] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
    }
}
