//! Reduction invariants predicted from CM field data, with assumption
//! diagnostics and cross-checks against the Frobenius and crystal routes.

use serde::{Deserialize, Serialize};

use crate::arith::{fundamental_discriminant, require_prime, valuation_i64};
use crate::error::{invalid, Error, Result};
use crate::fields::{
    analyze_place, biquadratic_order_index_at_p, check_unramified_consistency, CmFieldSpec,
    Consistency, PlaceInvariants,
};
use crate::frobenius::{analyze, FrobCharPoly, Height};
use crate::kummer;
use crate::lattice::{disc_pic, nonsplit_criterion, singular_normal_form, GramMatrix};
use crate::witt::{artin_invariant_via_cokernel, FCrystal, LocalFieldData, DEFAULT_PRECISION};

/// Input document for `predict`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct K3CmInput {
    pub field: CmFieldSpec,
    pub p: u64,
    /// p ∤ disc Pic(X_C).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disc_pic_coprime_to_p: Option<bool>,
    /// End_Hdg(T) ⊗ Z_(p) is the maximal order O_E ⊗ Z_(p).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_maximal_at_p: Option<bool>,
    /// Transcendental lattice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<GramMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frobenius_poly: Option<FrobCharPoly>,
}

impl K3CmInput {
    pub fn new(field: CmFieldSpec, p: u64) -> Self {
        K3CmInput {
            field,
            p,
            disc_pic_coprime_to_p: None,
            order_maximal_at_p: None,
            gram: None,
            frobenius_poly: None,
        }
    }

    pub fn with_assumptions(mut self, disc_ok: bool, order_max: bool) -> Self {
        self.disc_pic_coprime_to_p = Some(disc_ok);
        self.order_maximal_at_p = Some(order_max);
        self
    }

    pub fn picard_complex(&self) -> u32 {
        22 - self.field.degree() as u32
    }
}

/// Artin invariant entry of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArtinInvariant {
    Value(u32),
    Label(ArtinLabel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtinLabel {
    /// Not supersingular.
    NotApplicable,
    /// Supersingular, but the formula's hypotheses fail.
    NotDetermined,
}

impl ArtinInvariant {
    pub fn value(self) -> Option<u32> {
        match self {
            ArtinInvariant::Value(a) => Some(a),
            ArtinInvariant::Label(_) => None,
        }
    }
}

impl std::fmt::Display for ArtinInvariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ArtinInvariant::Value(a) => write!(f, "{a}"),
            ArtinInvariant::Label(ArtinLabel::NotApplicable) => f.write_str("not applicable"),
            ArtinInvariant::Label(ArtinLabel::NotDetermined) => f.write_str("not determined"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Info,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
}

impl Diagnostic {
    fn info(code: &str, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Info, code: code.into(), message: message.into() }
    }

    fn warning(code: &str, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, code: code.into(), message: message.into() }
    }
}

/// Which rule produced each field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub picard: String,
    pub height: String,
    pub artin_invariant: String,
}

/// Assumption flags after merging supplied and derived values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assumptions {
    pub disc_pic_coprime_to_p: Option<bool>,
    pub order_maximal_at_p: Option<bool>,
}

impl Assumptions {
    pub fn both_hold(&self) -> bool {
        self.disc_pic_coprime_to_p == Some(true) && self.order_maximal_at_p == Some(true)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub field: CmFieldSpec,
    pub p: u64,
    pub picard_complex: u32,
    pub picard: u32,
    pub height: Height,
    pub supersingular: bool,
    pub artin_invariant: ArtinInvariant,
    pub place: PlaceInvariants,
    pub assumptions: Assumptions,
    pub diagnostics: Vec<Diagnostic>,
    pub provenance: Provenance,
}

const GOOD_REDUCTION_NOTE: &str =
    "potential good reduction at p is assumed, not verified";

/// Flags derived from the lattice and order data carried by the input.
fn derive_assumptions(input: &K3CmInput) -> Result<Assumptions> {
    let p = input.p;
    let mut derived = Assumptions { disc_pic_coprime_to_p: None, order_maximal_at_p: None };
    if let Some(gram) = &input.gram {
        let det = gram.determinant();
        derived.disc_pic_coprime_to_p = Some(det % p as i128 != 0);
        if gram.rank() == 2 {
            if let CmFieldSpec::ImagQuadratic { d } = input.field {
                let disc = disc_pic(gram);
                let fund = fundamental_discriminant(disc)?;
                if fund != d {
                    return Err(Error::Inconsistent(format!(
                        "Gram matrix has disc Pic {disc} with field discriminant {fund}, \
                         but the field is Q(sqrt({d}))"
                    )));
                }
                // The order of discriminant disc Pic has conductor f, f² = disc/fund.
                let f2 = disc / fund;
                let conductor = crate::arith::exact_sqrt(f2 as i128).ok_or_else(|| {
                    Error::Internal(format!("{disc}/{fund} is not a square"))
                })? as i64;
                derived.order_maximal_at_p = Some(valuation_i64(conductor, p) == Some(0));
            }
        }
    }
    if let CmFieldSpec::Biquadratic { d1, d2 } = input.field {
        derived.order_maximal_at_p = Some(biquadratic_order_index_at_p(d1, d2, p)?.maximal_at_p());
    }
    Ok(derived)
}

fn merge_flag(
    name: &str,
    supplied: Option<bool>,
    derived: Option<bool>,
    diagnostics: &mut Vec<Diagnostic>,
) -> Option<bool> {
    match (supplied, derived) {
        (Some(s), Some(d)) if s != d => {
            diagnostics.push(Diagnostic::warning(
                "assumption_conflict",
                format!("{name}: supplied {s} but the input data gives {d}; using {d}"),
            ));
            Some(d)
        }
        (_, Some(d)) => Some(d),
        (s, None) => s,
    }
}

fn prop_violation(inv: &PlaceInvariants, source: &str) -> Error {
    Error::Inconsistent(format!(
        "{source} assumptions (p does not divide disc Pic, End is maximal at p) are \
         incompatible with the place data: E_p/F_q is ramified (e_p = {}, e_q = {}), \
         whereas both assumptions force it to be unramified",
        inv.e_p, inv.e_q
    ))
}

/// Predicts Picard number, height, supersingularity and Artin invariant.
pub fn predict_reduction(input: &K3CmInput) -> Result<ReductionReport> {
    input.field.validate()?;
    require_prime(input.p)?;
    let inv = analyze_place(&input.field, input.p)?;
    let mut diagnostics = vec![Diagnostic::info("good_reduction_assumed", GOOD_REDUCTION_NOTE)];

    if let (Some(a), Some(b)) = (input.disc_pic_coprime_to_p, input.order_maximal_at_p) {
        if check_unramified_consistency(&inv, a, b) == Consistency::Violated {
            return Err(prop_violation(&inv, "supplied"));
        }
    }
    let derived = derive_assumptions(input)?;
    let assumptions = Assumptions {
        disc_pic_coprime_to_p: merge_flag(
            "disc_pic_coprime_to_p",
            input.disc_pic_coprime_to_p,
            derived.disc_pic_coprime_to_p,
            &mut diagnostics,
        ),
        order_maximal_at_p: merge_flag(
            "order_maximal_at_p",
            input.order_maximal_at_p,
            derived.order_maximal_at_p,
            &mut diagnostics,
        ),
    };
    if let (Some(a), Some(b)) = (assumptions.disc_pic_coprime_to_p, assumptions.order_maximal_at_p)
    {
        if check_unramified_consistency(&inv, a, b) == Consistency::Violated {
            return Err(prop_violation(&inv, "effective"));
        }
    }

    let degree = input.field.degree() as u32;
    let report = if inv.split_q_in_e {
        ReductionReport {
            field: input.field,
            p: input.p,
            picard_complex: input.picard_complex(),
            picard: 22 - degree,
            height: Height::Finite(inv.local_degree as u32),
            supersingular: false,
            artin_invariant: ArtinInvariant::Label(ArtinLabel::NotApplicable),
            place: inv,
            assumptions,
            diagnostics,
            provenance: Provenance {
                picard: "q splits in E: picard = 22 - [E:Q]".into(),
                height: "q splits in E: height = [E_p:Q_p]".into(),
                artin_invariant: "not supersingular".into(),
            },
        }
    } else {
        let (artin, artin_source) = if assumptions.both_hold() {
            (
                ArtinInvariant::Value(inv.kq_degree as u32),
                "both assumptions hold: artin = [k(q):F_p]".to_string(),
            )
        } else {
            for (name, flag) in [
                ("disc_pic_coprime_to_p", assumptions.disc_pic_coprime_to_p),
                ("order_maximal_at_p", assumptions.order_maximal_at_p),
            ] {
                match flag {
                    Some(false) => diagnostics.push(Diagnostic::warning(
                        "assumption_failed",
                        format!("{name} fails; the Artin invariant formula does not apply"),
                    )),
                    None => diagnostics.push(Diagnostic::warning(
                        "assumption_unknown",
                        format!("{name} was not supplied and cannot be derived"),
                    )),
                    Some(true) => {}
                }
            }
            if let Some(known) = kummer::known_artin_invariant(&input.field, input.p) {
                diagnostics.push(Diagnostic::info("catalog_known_answer", known));
            }
            (
                ArtinInvariant::Label(ArtinLabel::NotDetermined),
                "assumptions fail: no formula applies".to_string(),
            )
        };
        ReductionReport {
            field: input.field,
            p: input.p,
            picard_complex: input.picard_complex(),
            picard: 22,
            height: Height::Infinite,
            supersingular: true,
            artin_invariant: artin,
            place: inv,
            assumptions,
            diagnostics,
            provenance: Provenance {
                picard: "q does not split in E: supersingular, picard = 22".into(),
                height: "q does not split in E: height = inf".into(),
                artin_invariant: artin_source,
            },
        }
    };
    Ok(report)
}

/// Singular K3 (picard 20 over C) from its rank-2 transcendental lattice.
pub fn predict_singular(gram: &GramMatrix, p: u64) -> Result<ReductionReport> {
    let nf = singular_normal_form(gram, p)?;
    let fund = fundamental_discriminant(nf.disc_pic)?;
    let field = CmFieldSpec::ImagQuadratic { d: fund };
    let inv = analyze_place(&field, p)?;
    let nonsplit = nonsplit_criterion(&nf);
    if nonsplit == inv.split_q_in_e {
        return Err(Error::Internal(format!(
            "lattice criterion and splitting of p in Q(sqrt({fund})) disagree"
        )));
    }
    let assumptions = Assumptions { disc_pic_coprime_to_p: Some(true), order_maximal_at_p: Some(true) };
    let mut diagnostics = vec![Diagnostic::info("good_reduction_assumed", GOOD_REDUCTION_NOTE)];
    if nf.swapped {
        diagnostics.push(Diagnostic::info("basis_swapped", "basis vectors exchanged so that p does not divide a'1"));
    }
    let criterion = if p == 2 { "n = 0 and a'3 odd" } else { "Legendre symbol of disc Pic is -1" };
    let report = if nonsplit {
        ReductionReport {
            field,
            p,
            picard_complex: 20,
            picard: 22,
            height: Height::Infinite,
            supersingular: true,
            artin_invariant: ArtinInvariant::Value(1),
            place: inv,
            assumptions,
            diagnostics,
            provenance: Provenance {
                picard: format!("singular K3, {criterion}: supersingular"),
                height: format!("singular K3, {criterion}: height = inf"),
                artin_invariant: "singular K3 with p not dividing disc Pic: artin = 1".into(),
            },
        }
    } else {
        ReductionReport {
            field,
            p,
            picard_complex: 20,
            picard: 20,
            height: Height::Finite(inv.local_degree as u32),
            supersingular: false,
            artin_invariant: ArtinInvariant::Label(ArtinLabel::NotApplicable),
            place: inv,
            assumptions,
            diagnostics,
            provenance: Provenance {
                picard: "singular K3, p splits in E: picard = 20".into(),
                height: "singular K3, p splits in E: height = [E_p:Q_p]".into(),
                artin_invariant: "not supersingular".into(),
            },
        }
    };
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub checks: Vec<CheckRecord>,
}

impl ValidationRecord {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }
}

fn frobenius_check(report: &ReductionReport, input: &K3CmInput) -> CheckRecord {
    let name = "frobenius".to_string();
    let Some(fp) = &input.frobenius_poly else {
        return CheckRecord { name, status: CheckStatus::Skipped, detail: "no Frobenius polynomial supplied".into() };
    };
    if fp.p != input.p {
        return CheckRecord {
            name,
            status: CheckStatus::Fail,
            detail: format!("Frobenius polynomial is over characteristic {}, input p = {}", fp.p, input.p),
        };
    }
    match analyze(fp, false) {
        Ok(fr) => {
            let agree = fr.picard == report.picard
                && fr.height == report.height
                && fr.supersingular == report.supersingular;
            CheckRecord {
                name,
                status: if agree { CheckStatus::Pass } else { CheckStatus::Fail },
                detail: format!(
                    "formula: picard {}, height {}, supersingular {}; Frobenius: picard {}, height {}, supersingular {}",
                    report.picard, report.height, report.supersingular, fr.picard, fr.height, fr.supersingular
                ),
            }
        }
        Err(e) => CheckRecord { name, status: CheckStatus::Fail, detail: format!("Frobenius analysis failed: {e}") },
    }
}

fn crystal_check(report: &ReductionReport) -> CheckRecord {
    let name = "crystal".to_string();
    let Some(artin) = report.artin_invariant.value() else {
        return CheckRecord {
            name,
            status: CheckStatus::Skipped,
            detail: format!("Artin invariant is {}; nothing to compare", report.artin_invariant),
        };
    };
    let inv = &report.place;
    let d = 2 * inv.kq_degree as u32;
    let e = inv.e as u32;
    let run = || -> Result<u32> {
        let lfd = LocalFieldData::new(report.p, d, e)?;
        let precision = crate::witt::crystal::max_precision(report.p).min(DEFAULT_PRECISION);
        let crystal = FCrystal::build(&lfd, d, precision)?;
        Ok(artin_invariant_via_cokernel(&crystal)?.artin_invariant)
    };
    match run() {
        Ok(a) => CheckRecord {
            name,
            status: if a == artin { CheckStatus::Pass } else { CheckStatus::Fail },
            detail: format!("formula {artin}, crystal cokernel (d = {d}, e = {e}) {a}"),
        },
        Err(err) => CheckRecord { name, status: CheckStatus::Fail, detail: format!("crystal route failed: {err}") },
    }
}

/// Runs the Frobenius and crystal cross-checks that apply.
pub fn cross_validate(report: &ReductionReport, input: &K3CmInput) -> Result<ValidationRecord> {
    if report.field != input.field || report.p != input.p {
        return invalid("report does not belong to this input");
    }
    let (frob, crys) = rayon::join(|| frobenius_check(report, input), || crystal_check(report));
    Ok(ValidationRecord { checks: vec![frob, crys] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::RationalPoly;
    use crate::frobenius::slope_quadratic;

    fn iq(d: i64) -> CmFieldSpec {
        CmFieldSpec::ImagQuadratic { d }
    }

    #[test]
    fn gaussian_split_and_inert() {
        let r = predict_reduction(&K3CmInput::new(iq(-4), 5).with_assumptions(true, true)).unwrap();
        assert_eq!((r.picard, r.height, r.supersingular), (20, Height::Finite(1), false));
        assert_eq!(r.artin_invariant, ArtinInvariant::Label(ArtinLabel::NotApplicable));

        let r = predict_reduction(&K3CmInput::new(iq(-4), 3).with_assumptions(true, true)).unwrap();
        assert_eq!((r.picard, r.height, r.supersingular), (22, Height::Infinite, true));
        assert_eq!(r.artin_invariant, ArtinInvariant::Value(1));
    }

    #[test]
    fn biquadratic_counterexample_not_determined() {
        let input = K3CmInput::new(CmFieldSpec::Biquadratic { d1: -20, d2: -15 }, 5)
            .with_assumptions(true, false);
        let r = predict_reduction(&input).unwrap();
        assert!(r.supersingular);
        assert_eq!(r.artin_invariant, ArtinInvariant::Label(ArtinLabel::NotDetermined));
        assert!(r.diagnostics.iter().any(|d| d.code == "assumption_failed" && d.message.contains("order_maximal")));
        assert!(r.diagnostics.iter().any(|d| d.code == "catalog_known_answer"));
        let v = cross_validate(&r, &input).unwrap();
        assert_eq!(v.checks[1].status, CheckStatus::Skipped);
    }

    #[test]
    fn ramified_with_both_assumptions_is_an_error() {
        let err = predict_reduction(&K3CmInput::new(iq(-20), 5).with_assumptions(true, true)).unwrap_err();
        assert!(matches!(err, Error::Inconsistent(_)));
        // Supplied flags claim maximality, derived index says otherwise: still an error.
        let input = K3CmInput::new(CmFieldSpec::Biquadratic { d1: -20, d2: -15 }, 5)
            .with_assumptions(true, true);
        assert!(matches!(predict_reduction(&input), Err(Error::Inconsistent(_))));
        // Not engaged when maximality fails.
        assert!(predict_reduction(&K3CmInput::new(iq(-20), 5).with_assumptions(false, true)).is_ok());
    }

    #[test]
    fn derived_flags_override_with_warning() {
        let mut input = K3CmInput::new(iq(-3), 5).with_assumptions(false, true);
        input.gram = Some(GramMatrix::binary(2, 1, 2));
        let r = predict_reduction(&input).unwrap();
        assert_eq!(r.assumptions.disc_pic_coprime_to_p, Some(true));
        assert!(r.diagnostics.iter().any(|d| d.code == "assumption_conflict"));
        assert_eq!(r.artin_invariant, ArtinInvariant::Value(1));

        input.field = iq(-4);
        assert!(matches!(predict_reduction(&input), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn singular_examples() {
        let r = predict_singular(&GramMatrix::binary(2, 1, 2), 5).unwrap();
        assert!(r.supersingular);
        assert_eq!(r.artin_invariant, ArtinInvariant::Value(1));
        let r = predict_singular(&GramMatrix::binary(2, 1, 2), 7).unwrap();
        assert_eq!((r.picard, r.height), (20, Height::Finite(1)));
        let r = predict_singular(&GramMatrix::binary(2, 1, 4), 2).unwrap();
        assert_eq!((r.picard, r.height), (20, Height::Finite(1)));
        assert!(predict_singular(&GramMatrix::binary(2, 1, 2), 3).is_err());
    }

    #[test]
    fn singular_is_special_case_of_general() {
        for p in [2u64, 3, 5, 7, 11, 13, 31, 97] {
            for a1 in (2..=12).step_by(2) {
                for a3 in (a1..=12).step_by(2) {
                    for a2 in -(a1 / 2)..=(a1 / 2) {
                        let g = GramMatrix::binary(a1, a2, a3);
                        let Ok(sing) = predict_singular(&g, p) else { continue };
                        let mut input = K3CmInput::new(sing.field, p);
                        input.gram = Some(g);
                        let gen = predict_reduction(&input).unwrap();
                        assert_eq!(
                            (gen.picard, gen.height, gen.supersingular, gen.artin_invariant),
                            (sing.picard, sing.height, sing.supersingular, sing.artin_invariant),
                            "gram ({a1},{a2},{a3}) p={p}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn cross_validation_routes() {
        let input = K3CmInput::new(iq(-4), 3).with_assumptions(true, true);
        let r = predict_reduction(&input).unwrap();
        let v = cross_validate(&r, &input).unwrap();
        assert_eq!(v.checks[1].status, CheckStatus::Pass, "{:?}", v.checks[1]);

        let mut input = K3CmInput::new(iq(-4), 5).with_assumptions(true, true);
        let poly = &RationalPoly::from_ints(&[-1, 1]).pow(20) * &slope_quadratic(5, 1);
        input.frobenius_poly = Some(FrobCharPoly::new(5, 5, poly).unwrap());
        let r = predict_reduction(&input).unwrap();
        let v = cross_validate(&r, &input).unwrap();
        assert_eq!(v.checks[0].status, CheckStatus::Pass, "{:?}", v.checks[0]);
        assert!(v.all_passed());

        // A supersingular polynomial against a split prediction fails loudly.
        input.frobenius_poly =
            Some(FrobCharPoly::new(5, 5, RationalPoly::from_ints(&[-1, 1]).pow(22)).unwrap());
        let v = cross_validate(&r, &input).unwrap();
        assert_eq!(v.checks[0].status, CheckStatus::Fail);
    }

    #[test]
    fn report_json_round_trip() {
        let r = predict_reduction(&K3CmInput::new(iq(-4), 3).with_assumptions(true, true)).unwrap();
        let s = serde_json::to_string_pretty(&r).unwrap();
        let back: ReductionReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        assert_eq!(serde_json::to_string_pretty(&back).unwrap(), s);
    }
}
