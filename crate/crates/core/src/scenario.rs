//! Rational envelopes, lagrangian form bookkeeping, and the case analysis that
//! turns a construction scenario into a fibered/nonfibered verdict with
//! fundamental-group extension ranks.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg;

/// A rational matrix entry. JSON accepts integers or `"p/q"` strings and
/// always writes strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QEntry(pub BigRational);

impl Serialize for QEntry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for QEntry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(QEntry(BigRational::from_integer(n.into()))),
            Raw::Text(t) => BigRational::from_str(t.trim())
                .map(QEntry)
                .map_err(|e| serde::de::Error::custom(format!("bad rational {t:?}: {e}"))),
        }
    }
}

impl From<i64> for QEntry {
    fn from(n: i64) -> Self {
        QEntry(BigRational::from_integer(n.into()))
    }
}

/// Row `r` holds the Q-coordinates of `w` against the `r`-th basis element of
/// the coefficient field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawEnvelope", into = "RawEnvelope")]
pub struct RationalEnvelopeInput {
    dim_vq: usize,
    coeff_matrix: Vec<Vec<BigRational>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnvelope {
    #[serde(rename = "dim_VQ")]
    dim_vq: usize,
    coeff_matrix: Vec<Vec<QEntry>>,
}

impl TryFrom<RawEnvelope> for RationalEnvelopeInput {
    type Error = Error;

    fn try_from(r: RawEnvelope) -> Result<Self> {
        let rows = r.coeff_matrix.into_iter().map(|row| row.into_iter().map(|q| q.0).collect()).collect();
        RationalEnvelopeInput::new(r.dim_vq, rows)
    }
}

impl From<RationalEnvelopeInput> for RawEnvelope {
    fn from(e: RationalEnvelopeInput) -> Self {
        RawEnvelope {
            dim_vq: e.dim_vq,
            coeff_matrix: e.coeff_matrix.into_iter().map(|row| row.into_iter().map(QEntry).collect()).collect(),
        }
    }
}

impl RationalEnvelopeInput {
    pub fn new(dim_vq: usize, coeff_matrix: Vec<Vec<BigRational>>) -> Result<Self> {
        if dim_vq == 0 {
            return Err(Error::InvalidInput("dim_VQ must be positive".into()));
        }
        if let Some(row) = coeff_matrix.iter().find(|r| r.len() != dim_vq) {
            return Err(Error::DimensionMismatch { expected: dim_vq, got: row.len() });
        }
        Ok(Self { dim_vq, coeff_matrix })
    }

    pub fn from_integers(dim_vq: usize, rows: &[Vec<i64>]) -> Result<Self> {
        let rows = rows.iter().map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect();
        Self::new(dim_vq, rows)
    }

    pub fn dim_vq(&self) -> usize {
        self.dim_vq
    }

    pub fn coeff_matrix(&self) -> &[Vec<BigRational>] {
        &self.coeff_matrix
    }
}

/// Dimension of `L(w)`: the rank of the coefficient matrix over Q.
pub fn rational_envelope_dim(input: &RationalEnvelopeInput) -> Result<usize> {
    if input.coeff_matrix.is_empty() {
        return Err(Error::InvalidInput("empty coefficient matrix".into()));
    }
    Ok(linalg::rational_rank(&input.coeff_matrix))
}

pub fn k_genericity(input: &RationalEnvelopeInput) -> Result<usize> {
    Ok(input.dim_vq - rational_envelope_dim(input)?)
}

/// True when no weakly lagrangian surface can exist.
pub fn weakly_lagrangian_obstruction(k: i64) -> Result<bool> {
    if k < 0 {
        return Err(Error::InvalidInput(format!("genericity {k} is negative")));
    }
    Ok(k < 3)
}

/// Coefficients of `λ2 ω1 - λ1 ω2`, the combination vanishing on the image
/// when the pullbacks of `ω1`, `ω2` are `λ1 σ` and `λ2 σ`.
pub fn lagrangian_combination(l1: &BigRational, l2: &BigRational) -> Result<(BigRational, BigRational)> {
    if l1.is_zero() || l2.is_zero() {
        return Err(Error::InvalidInput("zero multiplier: pullback is degenerate".into()));
    }
    Ok((l2.clone(), -l1.clone()))
}

/// `dim Λ² H⁰(Y12, Ω¹) + 1`
pub fn dim_lx_degenerate_case(h0: u64) -> u64 {
    h0 * h0.saturating_sub(1) / 2 + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormParity {
    #[serde(rename = "nondegenerate")]
    Nondegenerate,
    #[serde(rename = "corank-1")]
    Corank1,
    #[serde(rename = "n/a")]
    NotApplicable,
}

pub fn generic_form_parity(alb_dim: u64) -> Result<FormParity> {
    if alb_dim < 4 {
        return Err(Error::InvalidInput(format!("Albanese dimension {alb_dim} < 4")));
    }
    Ok(if alb_dim.is_multiple_of(2) { FormParity::Nondegenerate } else { FormParity::Corank1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "case")]
pub enum Pi1Case {
    Generic,
    Curve { g: u64 },
    ThreeSurfaces,
}

/// Ranks `(k, b)` of `0 → Z^k → G → Z^b → 0`.
pub fn pi1_extension_ranks(case: Pi1Case, i: u64) -> Result<(u64, u64)> {
    if i > 3 {
        return Err(Error::InvalidInput(format!("Picard defect {i} outside 0..=3")));
    }
    match case {
        Pi1Case::Generic => Ok((5, 8)),
        Pi1Case::Curve { g: 0 } => Err(Error::InvalidInput("curve case needs genus ≥ 1".into())),
        Pi1Case::Curve { g } => Ok((1 + i + g * (2 * g - 1), 8 + 2 * g)),
        Pi1Case::ThreeSurfaces => Ok((4 + 2 * i, 12)),
    }
}

/// Envelope of the (2,0)-form of a generic abelian surface: a 5-dimensional
/// rational envelope inside a 6-dimensional `V_Q`.
pub fn generic_surface_envelope() -> RationalEnvelopeInput {
    let rows: Vec<Vec<BigRational>> = (0..5)
        .map(|r| {
            (0..6)
                .map(|c| {
                    if c == r {
                        BigRational::from_integer(BigInt::from(1))
                    } else if c == 5 {
                        BigRational::new(BigInt::from(1), BigInt::from(r as i64 + 2))
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    RationalEnvelopeInput::new(6, rows).expect("fixed shape")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionScenario {
    pub g1_is_iso: bool,
    pub g2_is_iso: bool,
    #[serde(rename = "composition_lifts_to_CxC")]
    pub composition_lifts_to_cxc: bool,
    #[serde(rename = "h0_Y12")]
    pub h0_y12: u64,
    pub wedge_nondegenerate: bool,
    pub intersection_graph_connected: bool,
    #[serde(rename = "genus_C", default, skip_serializing_if = "Option::is_none")]
    pub genus_c: Option<u64>,
    #[serde(default)]
    pub picard_defect: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fibered {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlbStructure {
    #[serde(rename = "A1×A2")]
    Product,
    #[serde(rename = "A1×A2×Jac(C)")]
    WithJacobian,
    #[serde(rename = "A1×A2×A12")]
    ThreeSurfaces,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DimLxLabel {
    #[serde(rename = "two (C×C case)")]
    ProductOfCurves,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DimLx {
    Count(u64),
    Label(DimLxLabel),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleFired {
    pub rule: String,
    pub anchor: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Verdict {
    #[serde(rename = "dim_LX")]
    pub dim_lx: Option<DimLx>,
    pub lagrangian_form_count: u64,
    pub fibered: Fibered,
    pub alb_structure: Option<AlbStructure>,
    pub pi1_kernel_rank: Option<u64>,
    pub pi1_ab_rank: Option<u64>,
    pub generic_form_rank_parity: FormParity,
    /// `h⁰(Y12, Ω¹)` after any rule forcing it.
    #[serde(rename = "h0_Y12")]
    pub h0_y12: u64,
    pub rules_fired: Vec<RuleFired>,
}

impl fmt::Display for Fibered {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fibered::Yes => "yes",
            Fibered::No => "no",
            Fibered::Unknown => "unknown",
        })
    }
}

fn fired(rule: &str, anchor: &str) -> RuleFired {
    RuleFired { rule: rule.into(), anchor: anchor.into() }
}

fn validate(s: &ConstructionScenario) -> Result<()> {
    if s.picard_defect > 3 {
        return Err(Error::InvalidScenario(format!("picard_defect {} outside 0..=3", s.picard_defect)));
    }
    if s.genus_c == Some(0) {
        return Err(Error::InvalidScenario("genus_C must be positive".into()));
    }
    if s.h0_y12 == 0 && s.wedge_nondegenerate {
        return Err(Error::InvalidScenario("wedge_nondegenerate requires h0_Y12 > 0".into()));
    }
    if s.wedge_nondegenerate && s.h0_y12 != 2 {
        return Err(Error::InconsistentScenario(format!(
            "a nondegenerate wedge product needs h0_Y12 = 2, got {}",
            s.h0_y12
        )));
    }
    if s.wedge_nondegenerate && s.intersection_graph_connected {
        return Err(Error::InconsistentScenario(
            "Y12 maps onto an abelian surface, so the intersection graph must be totally disconnected".into(),
        ));
    }
    if !s.wedge_nondegenerate && s.h0_y12 > 0 {
        if let Some(g) = s.genus_c {
            if g != s.h0_y12 {
                return Err(Error::InconsistentScenario(format!(
                    "all 1-forms on Y12 come from C, so h0_Y12 = g(C); got h0_Y12 = {} and genus_C = {g}",
                    s.h0_y12
                )));
            }
        }
    }
    Ok(())
}

/// Applies the case rules in priority order; the first matching rule decides.
pub fn classify(s: &ConstructionScenario) -> Result<Verdict> {
    validate(s)?;
    let generic = pi1_extension_ranks(Pi1Case::Generic, s.picard_defect)?;
    let unknown = Verdict {
        dim_lx: None,
        lagrangian_form_count: 1,
        fibered: Fibered::Unknown,
        alb_structure: None,
        pi1_kernel_rank: None,
        pi1_ab_rank: None,
        generic_form_rank_parity: FormParity::NotApplicable,
        h0_y12: s.h0_y12,
        rules_fired: Vec::new(),
    };

    if s.g1_is_iso && s.g2_is_iso && s.composition_lifts_to_cxc {
        return Ok(Verdict {
            dim_lx: Some(DimLx::Label(DimLxLabel::ProductOfCurves)),
            lagrangian_form_count: 2,
            fibered: Fibered::Yes,
            rules_fired: vec![fired("product-of-curves", "cover of a product of two curves; dim L^X = 2")],
            ..unknown
        });
    }
    let nonfibered_generic = |rule: RuleFired| Verdict {
        dim_lx: Some(DimLx::Count(1)),
        lagrangian_form_count: 1,
        fibered: Fibered::No,
        alb_structure: Some(AlbStructure::Product),
        pi1_kernel_rank: Some(generic.0),
        pi1_ab_rank: Some(generic.1),
        generic_form_rank_parity: FormParity::Nondegenerate,
        h0_y12: 0,
        rules_fired: vec![rule],
    };
    if s.intersection_graph_connected {
        return Ok(nonfibered_generic(fired(
            "connected-intersection-graph",
            "Y12 dominates nothing, Alb(Y12) = 0; surface is not fibered",
        )));
    }
    if s.g1_is_iso {
        return Ok(nonfibered_generic(fired(
            "first-map-isomorphism",
            "g1 an isomorphism without a lift to C×C; single lagrangian form, not fibered",
        )));
    }
    if s.h0_y12 > 0 && !s.wedge_nondegenerate {
        let g = s.genus_c.unwrap_or(s.h0_y12);
        let (k, b) = pi1_extension_ranks(Pi1Case::Curve { g }, s.picard_defect)?;
        return Ok(Verdict {
            dim_lx: Some(DimLx::Count(dim_lx_degenerate_case(s.h0_y12))),
            fibered: if g >= 2 { Fibered::Yes } else { Fibered::No },
            alb_structure: Some(AlbStructure::WithJacobian),
            pi1_kernel_rank: Some(k),
            pi1_ab_rank: Some(b),
            generic_form_rank_parity: generic_form_parity(4 + g)?,
            rules_fired: vec![fired(
                "degenerate-wedge-curve",
                "maps to curves factor through C; dim L^X = dim Λ²H⁰(Y12, Ω¹) + 1",
            )],
            ..unknown
        });
    }
    if s.h0_y12 == 2 && s.wedge_nondegenerate {
        let (k, b) = pi1_extension_ranks(Pi1Case::ThreeSurfaces, s.picard_defect)?;
        return Ok(Verdict {
            alb_structure: Some(AlbStructure::ThreeSurfaces),
            pi1_kernel_rank: Some(k),
            pi1_ab_rank: Some(b),
            rules_fired: vec![fired(
                "three-surfaces",
                "Alb(X) isogenous to A1×A2×A12; intersection graph totally disconnected",
            )],
            ..unknown
        });
    }
    Ok(Verdict { rules_fired: vec![fired("fallback", "no rule applies")], ..unknown })
}
