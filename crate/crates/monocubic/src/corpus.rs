//! Height-bounded field surveys: enumerate canonical monogenized cubics,
//! classify each, compute two-class data by the requested method(s), and
//! return one record per isomorphism class. This is the shared engine behind
//! the class-group CSV, the cross-method audit, and the moment statistics.

use crate::class_groups::{
    cl2_plus_via_quartics, cl2_via_quartics, cross_validate, direct_class_group,
    narrow_two_part_direct, AnalyticWindow, ClassGroupError, ConventionEvidence, DirectConfig,
    MethodTag, TwoClassData,
};
use crate::cubic::{
    enumerate_by_height, CanonicalForm, CountingConvention, EnumerateError, MonicCubic,
};
use crate::orders::{classify, Signature};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SurveyError {
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
    #[error(transparent)]
    ClassGroup(#[from] ClassGroupError),
}

/// Which class-group machinery a survey runs per field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurveyMethod {
    /// Quartic-orbit counts only (the production route).
    Quartic,
    /// Direct relation-matrix class groups only (the oracle route).
    Direct,
    /// Both, cross-validated field by field.
    Both,
}

/// Why a field was left out of the statistics population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    Reducible,
    CyclicCubic,
    NonMaximal,
    Indeterminate,
}

impl ExclusionReason {
    pub fn label(self) -> &'static str {
        match self {
            ExclusionReason::Reducible => "reducible",
            ExclusionReason::CyclicCubic => "cyclic_cubic",
            ExclusionReason::NonMaximal => "non_maximal",
            ExclusionReason::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldOutcome {
    Included {
        data: TwoClassData,
        /// Present only for cross-validated records where the direct oracle
        /// was determinate.
        evidence: Option<ConventionEvidence>,
        /// Direct-method records note a weak analytic window here.
        window: Option<AnalyticWindow>,
    },
    Excluded(ExclusionReason),
}

/// One isomorphism class of monogenized cubic fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldRecord {
    pub i: i128,
    pub j: i128,
    /// Canonical form coefficients: x^3 + a x^2 + b x + c.
    pub a: i128,
    pub b: i128,
    pub c: i128,
    pub disc: i128,
    pub signature: Signature,
    /// Number of translation-equivalence classes this record stands for
    /// (2 when J > 0 folds a mirror pair, 1 when J = 0).
    pub weight: u64,
    pub outcome: FieldOutcome,
}

impl FieldRecord {
    /// Short flag tokens for the CSV `flags` column.
    pub fn flags(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        match &self.outcome {
            FieldOutcome::Excluded(r) => out.push(r.label()),
            FieldOutcome::Included {
                data,
                evidence,
                window,
            } => {
                if data.discrepancy.is_some() {
                    out.push("discrepancy");
                }
                if let Some(ev) = evidence {
                    if ev.readings_differ {
                        out.push("readings_differ");
                    }
                }
                if data.method == MethodTag::Quartic && evidence.is_none() {
                    out.push("oracle_indeterminate");
                }
                if let Some(AnalyticWindow::WeakOnly) = window {
                    out.push("weak_window");
                }
            }
        }
        out
    }
}

fn try_map_parallel<T, U, F>(items: &[T], f: F) -> Result<Vec<U>, SurveyError>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U, SurveyError> + Sync + Send,
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

fn field_outcome(
    f: &MonicCubic,
    method: SurveyMethod,
    cfg: &DirectConfig,
) -> Result<FieldOutcome, SurveyError> {
    let cls = classify(f, cfg.rho_budget).map_err(ClassGroupError::from)?;
    if !cls.irreducible {
        return Ok(FieldOutcome::Excluded(ExclusionReason::Reducible));
    }
    if cls.galois_s3 && cls.maximal.is_none() {
        return Ok(FieldOutcome::Excluded(ExclusionReason::Indeterminate));
    }
    if !cls.galois_s3 {
        return Ok(FieldOutcome::Excluded(ExclusionReason::CyclicCubic));
    }
    if cls.maximal == Some(false) {
        return Ok(FieldOutcome::Excluded(ExclusionReason::NonMaximal));
    }
    match method {
        SurveyMethod::Quartic => {
            let cl2 = match cl2_via_quartics(f, cfg.rho_budget) {
                Ok(v) => v,
                Err(ClassGroupError::Indeterminate(_)) => {
                    return Ok(FieldOutcome::Excluded(ExclusionReason::Indeterminate))
                }
                Err(e) => return Err(e.into()),
            };
            let cl2_plus = cl2_plus_via_quartics(f, cfg.rho_budget)?;
            Ok(FieldOutcome::Included {
                data: TwoClassData {
                    cl2_size: cl2,
                    cl2_plus_size: cl2_plus,
                    method: MethodTag::Quartic,
                    discrepancy: None,
                },
                evidence: None,
                window: None,
            })
        }
        SurveyMethod::Direct => {
            let analysis = match direct_class_group(f, cfg) {
                Ok(a) => a,
                Err(ClassGroupError::Indeterminate(_)) => {
                    return Ok(FieldOutcome::Excluded(ExclusionReason::Indeterminate))
                }
                Err(e) => return Err(e.into()),
            };
            let cl2_plus = match analysis.signature {
                Signature::Complex => analysis.group.two_part,
                Signature::TotallyReal => match narrow_two_part_direct(f, &analysis) {
                    Ok(v) => v,
                    Err(ClassGroupError::Indeterminate(_)) => {
                        return Ok(FieldOutcome::Excluded(ExclusionReason::Indeterminate))
                    }
                    Err(e) => return Err(e.into()),
                },
            };
            Ok(FieldOutcome::Included {
                data: TwoClassData {
                    cl2_size: analysis.group.two_part,
                    cl2_plus_size: cl2_plus,
                    method: MethodTag::Direct,
                    discrepancy: None,
                },
                evidence: None,
                window: Some(analysis.group.window),
            })
        }
        SurveyMethod::Both => {
            let (data, evidence) = match cross_validate(f, cfg) {
                Ok(v) => v,
                Err(ClassGroupError::Indeterminate(_)) => {
                    return Ok(FieldOutcome::Excluded(ExclusionReason::Indeterminate))
                }
                Err(e) => return Err(e.into()),
            };
            Ok(FieldOutcome::Included {
                data,
                evidence,
                window: None,
            })
        }
    }
}

/// Survey every isomorphism class with height <= x. Records come back sorted
/// by (I, J); the computation is order-independent, so the output is
/// identical whatever the thread count.
pub fn survey(
    x: u128,
    method: SurveyMethod,
    cfg: &DirectConfig,
) -> Result<Vec<FieldRecord>, SurveyError> {
    let classes = enumerate_by_height(x)?;
    survey_forms(&classes, method, cfg)
}

/// Survey an explicit batch of canonical classes. Callers that need progress
/// or budget checkpoints can split an enumeration into blocks, survey each,
/// and concatenate; the records of each block come back sorted by (I, J).
pub fn survey_forms(
    classes: &[CanonicalForm],
    method: SurveyMethod,
    cfg: &DirectConfig,
) -> Result<Vec<FieldRecord>, SurveyError> {
    let mut records = try_map_parallel(classes, |cf| {
        let f = cf.form;
        let (i, j) = f.invariants().map_err(ClassGroupError::from)?;
        let disc = f.disc().map_err(ClassGroupError::from)?;
        let weight = f
            .class_weight(CountingConvention::TranslationEquivalence)
            .map_err(ClassGroupError::from)?;
        let outcome = field_outcome(&f, method, cfg)?;
        Ok(FieldRecord {
            i,
            j,
            a: f.a,
            b: f.b,
            c: f.c,
            disc,
            signature: if disc > 0 {
                Signature::TotallyReal
            } else {
                Signature::Complex
            },
            weight,
            outcome,
        })
    })?;
    records.sort_by_key(|r| (r.i, r.j));
    Ok(records)
}

/// Aggregate tallies of a cross-validated survey, for audits.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct AuditSummary {
    pub classes: usize,
    pub included: usize,
    pub excluded_reducible: usize,
    pub excluded_cyclic: usize,
    pub excluded_non_maximal: usize,
    pub excluded_indeterminate: usize,
    pub both_agree: usize,
    pub oracle_indeterminate: usize,
    pub discrepancies: usize,
    /// Fields where the two overramification readings disagree with each
    /// other, and how each fares against the determinate oracle.
    pub readings_differ: usize,
    pub weak_reading_matches: usize,
    pub strict_reading_matches: usize,
}

pub fn audit_summary(records: &[FieldRecord]) -> AuditSummary {
    let mut s = AuditSummary {
        classes: records.len(),
        ..Default::default()
    };
    for r in records {
        match &r.outcome {
            FieldOutcome::Excluded(ExclusionReason::Reducible) => s.excluded_reducible += 1,
            FieldOutcome::Excluded(ExclusionReason::CyclicCubic) => s.excluded_cyclic += 1,
            FieldOutcome::Excluded(ExclusionReason::NonMaximal) => s.excluded_non_maximal += 1,
            FieldOutcome::Excluded(ExclusionReason::Indeterminate) => {
                s.excluded_indeterminate += 1
            }
            FieldOutcome::Included { data, evidence, .. } => {
                s.included += 1;
                if data.method == MethodTag::BothAgree {
                    s.both_agree += 1;
                }
                if data.discrepancy.is_some() {
                    s.discrepancies += 1;
                }
                match evidence {
                    None => {
                        if data.method == MethodTag::Quartic {
                            s.oracle_indeterminate += 1;
                        }
                    }
                    Some(ev) => {
                        if ev.readings_differ {
                            s.readings_differ += 1;
                            if ev.weak_matches {
                                s.weak_reading_matches += 1;
                            }
                            if ev.strict_matches {
                                s.strict_reading_matches += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    s
}
