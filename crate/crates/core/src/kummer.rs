//! Kummer surfaces of products of CM elliptic curves, and the order
//! non-maximality example over Q(√−5, √−15).

use serde::{Deserialize, Serialize};

use crate::arith::{is_fundamental_discriminant, kronecker_symbol, require_prime};
use crate::error::{invalid, Result};
use crate::fields::{analyze_place, biquadratic_order_index_at_p, CmFieldSpec, PlaceInvariants};
use crate::lattice::{direct_sum, double_pairing, hyperbolic_plane, GramMatrix};
use crate::predictor::{predict_reduction, K3CmInput, ReductionReport};

/// Discriminants of the CM fields of two elliptic curves C1, C2; equal
/// discriminants stand for the isogenous self-product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KummerInput {
    pub d1: i64,
    pub d2: i64,
}

/// CM field of Km(C1 × C2) and its Picard number over C.
pub fn kummer_cm_data(input: &KummerInput) -> Result<(CmFieldSpec, u32)> {
    for d in [input.d1, input.d2] {
        if d >= 0 || !is_fundamental_discriminant(d) {
            return invalid(format!("{d} is not a negative fundamental discriminant"));
        }
    }
    let spec = if input.d1 == input.d2 {
        CmFieldSpec::ImagQuadratic { d: input.d1 }
    } else {
        CmFieldSpec::Biquadratic { d1: input.d1, d2: input.d2 }
    };
    Ok((spec, 22 - spec.degree() as u32))
}

/// T(Km(A)) for A = C1 × C2 with C1, C2 not isogenous: T(A) = U ⊕ U with the
/// pairing doubled.
pub fn kummer_transcendental_lattice() -> GramMatrix {
    let u = hyperbolic_plane();
    double_pairing(&direct_sum(&u, &u))
}

/// Recorded Artin invariants for configurations outside the formula's
/// hypotheses. Returns a human-readable note.
pub fn known_artin_invariant(field: &CmFieldSpec, p: u64) -> Option<String> {
    match *field {
        CmFieldSpec::Biquadratic { d1, d2 }
            if p == 5 && ((d1, d2) == (-20, -15) || (d1, d2) == (-15, -20)) =>
        {
            Some(
                "if X = Km(C1 x C2) with End(C1) = Z[sqrt(-5)] and End(C2) maximal in \
                 Q(sqrt(-15)), the reduction at 5 has Artin invariant 1 (the formula would give 2)"
                    .into(),
            )
        }
        CmFieldSpec::ImagQuadratic { d }
            if p != 2 && kronecker_symbol(d, p as i64).ok() == Some(0) =>
        {
            Some(format!(
                "if X = Km(C x C) with C a CM elliptic curve by Q(sqrt({d})), the reduction at \
                 the ramified prime {p} is supersingular with Artin invariant 1"
            ))
        }
        _ => None,
    }
}

/// Artin invariant recorded for the catalog configuration, if any.
fn recorded_value(field: &CmFieldSpec, p: u64) -> Option<u32> {
    known_artin_invariant(field, p).map(|_| 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailedAssumption {
    DiscPicCoprimeToP,
    OrderMaximality,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KummerFinding {
    pub d1: i64,
    pub d2: i64,
    pub p: u64,
    pub field: CmFieldSpec,
    pub picard_complex: u32,
    /// det of the doubled transcendental lattice, when it is U ⊕ U doubled.
    pub doubled_lattice_disc: Option<i64>,
    pub disc_coprime_to_p: Option<bool>,
    pub order_index: Option<u64>,
    pub order_maximal_at_p: Option<bool>,
    pub q_inert_in_f: bool,
    pub place: PlaceInvariants,
    pub supersingular: bool,
    /// [k(q):F_p], what the Artin invariant formula would return.
    pub would_give: Option<u32>,
    /// Recorded true value.
    pub actual: Option<u32>,
    pub assumption_failed: Vec<FailedAssumption>,
    /// Formula value and recorded value differ.
    pub counterexample: bool,
    pub report: ReductionReport,
}

/// Runs the whole chain for Km(C1 × C2) at p.
pub fn kummer_finding(input: &KummerInput, p: u64) -> Result<KummerFinding> {
    require_prime(p)?;
    let (field, picard_complex) = kummer_cm_data(input)?;
    let place = analyze_place(&field, p)?;
    let mut k3 = K3CmInput::new(field, p);
    let (lattice_disc, order_index) = match field {
        CmFieldSpec::Biquadratic { d1, d2 } => {
            let t = kummer_transcendental_lattice();
            k3.gram = Some(t.clone());
            (Some(t.determinant() as i64), Some(biquadratic_order_index_at_p(d1, d2, p)?.index))
        }
        _ => (None, None),
    };
    let report = predict_reduction(&k3)?;
    let disc_ok = report.assumptions.disc_pic_coprime_to_p;
    let order_ok = report.assumptions.order_maximal_at_p;
    let mut failed = Vec::new();
    if disc_ok == Some(false) {
        failed.push(FailedAssumption::DiscPicCoprimeToP);
    }
    if order_ok == Some(false) {
        failed.push(FailedAssumption::OrderMaximality);
    }
    let would_give = report.supersingular.then_some(place.kq_degree as u32);
    let actual = if report.supersingular { recorded_value(&field, p) } else { None };
    let counterexample = matches!((would_give, actual), (Some(w), Some(a)) if w != a);
    Ok(KummerFinding {
        d1: input.d1,
        d2: input.d2,
        p,
        field,
        picard_complex,
        doubled_lattice_disc: lattice_disc,
        disc_coprime_to_p: disc_ok,
        order_index,
        order_maximal_at_p: order_ok,
        q_inert_in_f: place.f_q == 2 && place.g_q == 1 && place.e_q == 1 && place.field_degree == 4,
        place,
        supersingular: report.supersingular,
        would_give,
        actual,
        assumption_failed: failed,
        counterexample,
        report,
    })
}

/// The Q(√−5, √−15) example at p.
pub fn counterexample_report(p: u64) -> Result<KummerFinding> {
    kummer_finding(&KummerInput { d1: -20, d2: -15 }, p)
}
