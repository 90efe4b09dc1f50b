//! Table of groups with their root multiplicities and derived constants.
//!
//! Every other module takes `(n, d, e)` from a [`CaseDescriptor`]; nothing
//! else in the crate hard-codes a multiplicity.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseField {
    Real,
    Complex,
    Quaternion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    FullMatrix,
    SymmetricMatrix,
    SkewMatrix,
    MetadataOnly,
}

/// Concrete linear-algebra realization of a case with a backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    /// n x n real matrices, `x -> a x b^T`.
    RealFull,
    /// n x n complex matrices, `x -> a x b^T`.
    ComplexFull,
    /// n x n complex symmetric matrices, `x -> l x l^T`.
    ComplexSymmetric,
    /// 2n x 2n real skew-symmetric matrices, `x -> l x l^T`.
    RealSkew,
}

impl Backend {
    pub fn is_complex(self) -> bool {
        matches!(self, Backend::ComplexFull | Backend::ComplexSymmetric)
    }

    /// Side length of the matrices realizing a rank-n algebra.
    pub fn matrix_size(self, n: usize) -> usize {
        match self {
            Backend::RealSkew => 2 * n,
            _ => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    GlReal,
    OSplit,
    E7Split,
    OPp,
    SpComplex,
    GlComplex,
    OComplex4n,
    E7Complex,
    OComplexP4,
    SpNn,
    GlQuaternion,
}

#[derive(Debug, Clone, Copy)]
enum Multiplicity {
    Fixed(u32),
    /// The family parameter p.
    Param,
}

#[derive(Debug, Clone, Copy)]
struct FamilyRow {
    family: Family,
    id: &'static str,
    group_name: &'static str,
    base_field: BaseField,
    model_kind: ModelKind,
    d: Multiplicity,
    e: u32,
    fixed_rank: Option<usize>,
}

const TABLE: [FamilyRow; 11] = [
    FamilyRow {
        family: Family::GlReal,
        id: "gl_r",
        group_name: "GL_2n(R)",
        base_field: BaseField::Real,
        model_kind: ModelKind::FullMatrix,
        d: Multiplicity::Fixed(1),
        e: 0,
        fixed_rank: None,
    },
    FamilyRow {
        family: Family::OSplit,
        id: "o_2n2n",
        group_name: "O_2n,2n",
        base_field: BaseField::Real,
        model_kind: ModelKind::SkewMatrix,
        d: Multiplicity::Fixed(2),
        e: 0,
        fixed_rank: None,
    },
    FamilyRow {
        family: Family::E7Split,
        id: "e7_7",
        group_name: "E_7(7)",
        base_field: BaseField::Real,
        model_kind: ModelKind::MetadataOnly,
        d: Multiplicity::Fixed(4),
        e: 0,
        fixed_rank: Some(3),
    },
    FamilyRow {
        family: Family::OPp,
        id: "o_pp",
        group_name: "O_p+2,p+2",
        base_field: BaseField::Real,
        model_kind: ModelKind::MetadataOnly,
        d: Multiplicity::Param,
        e: 0,
        fixed_rank: Some(2),
    },
    FamilyRow {
        family: Family::SpComplex,
        id: "sp_c",
        group_name: "Sp_n(C)",
        base_field: BaseField::Complex,
        model_kind: ModelKind::SymmetricMatrix,
        d: Multiplicity::Fixed(1),
        e: 1,
        fixed_rank: None,
    },
    FamilyRow {
        family: Family::GlComplex,
        id: "gl_c",
        group_name: "GL_2n(C)",
        base_field: BaseField::Complex,
        model_kind: ModelKind::FullMatrix,
        d: Multiplicity::Fixed(2),
        e: 1,
        fixed_rank: None,
    },
    FamilyRow {
        family: Family::OComplex4n,
        id: "o_4n_c",
        group_name: "O_4n(C)",
        base_field: BaseField::Complex,
        model_kind: ModelKind::MetadataOnly,
        d: Multiplicity::Fixed(4),
        e: 1,
        fixed_rank: None,
    },
    FamilyRow {
        family: Family::E7Complex,
        id: "e7_c",
        group_name: "E_7(C)",
        base_field: BaseField::Complex,
        model_kind: ModelKind::MetadataOnly,
        d: Multiplicity::Fixed(8),
        e: 1,
        fixed_rank: Some(3),
    },
    FamilyRow {
        family: Family::OComplexP4,
        id: "o_p4_c",
        group_name: "O_p+4(C)",
        base_field: BaseField::Complex,
        model_kind: ModelKind::MetadataOnly,
        d: Multiplicity::Param,
        e: 1,
        fixed_rank: Some(2),
    },
    FamilyRow {
        family: Family::SpNn,
        id: "sp_nn",
        group_name: "Sp_n,n",
        base_field: BaseField::Quaternion,
        model_kind: ModelKind::MetadataOnly,
        d: Multiplicity::Fixed(2),
        e: 2,
        fixed_rank: None,
    },
    FamilyRow {
        family: Family::GlQuaternion,
        id: "gl_h",
        group_name: "GL_2n(H)",
        base_field: BaseField::Quaternion,
        model_kind: ModelKind::MetadataOnly,
        d: Multiplicity::Fixed(4),
        e: 3,
        fixed_rank: None,
    },
];

/// Default representative parameter for the `o_pp` and `o_p4_c` families.
pub const DEFAULT_P: u32 = 1;
/// Rank used for the free-rank families in [`list_cases`].
pub const DEFAULT_LIST_RANK: usize = 2;

fn row(family: Family) -> &'static FamilyRow {
    TABLE
        .iter()
        .find(|r| r.family == family)
        .expect("every family has a table row")
}

/// Family plus the parameter p where the family has one. Serialized as
/// `gl_r`, `o_pp:3`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CaseId {
    pub family: Family,
    pub p: Option<u32>,
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let id = row(self.family).id;
        match self.p {
            Some(p) => write!(f, "{id}:{p}"),
            None => f.write_str(id),
        }
    }
}

fn inadmissible_o_pq(id: &str) -> Error {
    Error::Inadmissible {
        case: id.to_string(),
        reason: "O(p,q) with p != q has two distinct short-root multiplicities (D2 = A1 x A1) \
                 and is excluded from consideration"
            .to_string(),
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "o_pq_unequal" {
            return Err(inadmissible_o_pq(s));
        }
        let (head, tail) = match s.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (s, None),
        };
        if head == "o_pq" {
            // O(p,q): admissible only for p = q, where it is O_{(p-2)+2,(p-2)+2}.
            let tail = tail.ok_or_else(|| Error::Parse(format!("`{s}`: expected o_pq:p,q")))?;
            let (p, q) = tail
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("`{s}`: expected o_pq:p,q")))?;
            let p: u32 = p.trim().parse().map_err(|_| Error::Parse(s.to_string()))?;
            let q: u32 = q.trim().parse().map_err(|_| Error::Parse(s.to_string()))?;
            if p != q {
                return Err(inadmissible_o_pq(s));
            }
            if p < 3 {
                return Err(Error::Inadmissible {
                    case: s.to_string(),
                    reason: "O(p,p) needs p >= 3 for a rank-2 Jordan algebra".to_string(),
                });
            }
            return Ok(CaseId {
                family: Family::OPp,
                p: Some(p - 2),
            });
        }
        let r = TABLE
            .iter()
            .find(|r| r.id == head)
            .ok_or_else(|| Error::UnknownCase(s.to_string()))?;
        let p = match (r.d, tail) {
            (Multiplicity::Param, None) => Some(DEFAULT_P),
            (Multiplicity::Param, Some(t)) => {
                let p: u32 = t.trim().parse().map_err(|_| Error::Parse(s.to_string()))?;
                if p == 0 {
                    return Err(Error::Parse(format!("`{s}`: p must be >= 1")));
                }
                Some(p)
            }
            (Multiplicity::Fixed(_), None) => None,
            (Multiplicity::Fixed(_), Some(_)) => {
                return Err(Error::Parse(format!("`{s}`: family takes no parameter")))
            }
        };
        Ok(CaseId {
            family: r.family,
            p,
        })
    }
}

impl Serialize for CaseId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CaseId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One row of the group table, instantiated at a rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseDescriptor {
    pub case_id: CaseId,
    #[serde(deserialize_with = "static_name::deserialize")]
    pub group_name: &'static str,
    pub base_field: BaseField,
    pub model_kind: ModelKind,
    pub n: usize,
    pub d: u32,
    pub e: u32,
    pub ambient_dim: usize,
    pub backend_available: bool,
}

// `&'static str` cannot be deserialized from an owned string; map it back
// through the table instead.
mod static_name {
    use super::TABLE;
    use serde::{Deserialize, Deserializer};

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<&'static str, D::Error> {
        let s = String::deserialize(d)?;
        TABLE
            .iter()
            .find(|r| r.group_name == s)
            .map(|r| r.group_name)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown group `{s}`")))
    }
}

impl CaseDescriptor {
    fn build(id: CaseId, n: usize) -> Self {
        let r = row(id.family);
        let d = match r.d {
            Multiplicity::Fixed(d) => d,
            Multiplicity::Param => id.p.unwrap_or(DEFAULT_P),
        };
        let nn = n as u64;
        let ambient_dim = (nn * (r.e as u64 + 1) + d as u64 * nn * (nn - 1)) as usize;
        let backend_available = r.model_kind != ModelKind::MetadataOnly;
        CaseDescriptor {
            case_id: id,
            group_name: r.group_name,
            base_field: r.base_field,
            model_kind: r.model_kind,
            n,
            d,
            e: r.e,
            ambient_dim,
            backend_available,
        }
    }

    /// r = d(n-1) + (e+1).
    pub fn r(&self) -> u32 {
        self.d * (self.n as u32 - 1) + self.e + 1
    }

    pub fn backend(&self) -> Option<Backend> {
        match (self.model_kind, self.base_field) {
            (ModelKind::FullMatrix, BaseField::Real) => Some(Backend::RealFull),
            (ModelKind::FullMatrix, BaseField::Complex) => Some(Backend::ComplexFull),
            (ModelKind::SymmetricMatrix, BaseField::Complex) => Some(Backend::ComplexSymmetric),
            (ModelKind::SkewMatrix, BaseField::Real) => Some(Backend::RealSkew),
            _ => None,
        }
    }

    pub fn require_backend(&self) -> Result<Backend> {
        self.backend()
            .ok_or_else(|| Error::UnsupportedBackend(self.case_id.to_string()))
    }

    /// Descriptor of the rank-k Peirce subalgebra: same family, same (d, e).
    ///
    /// Fixed-rank families are allowed here since the subalgebra is not itself
    /// a table row.
    pub fn sub_case(&self, k: usize) -> Result<CaseDescriptor> {
        if k == 0 || k > self.n {
            return Err(Error::RankOutOfRange { k, n: self.n });
        }
        Ok(CaseDescriptor::build(self.case_id, k))
    }

    pub fn is_sp_c(&self) -> bool {
        self.case_id.family == Family::SpComplex
    }

    pub fn fixed_rank(&self) -> Option<usize> {
        row(self.case_id.family).fixed_rank
    }
}

/// All table rows: free-rank families at n = 2, p-families at p = 1.
pub fn list_cases() -> Vec<CaseDescriptor> {
    TABLE
        .iter()
        .map(|r| {
            let n = r.fixed_rank.unwrap_or(DEFAULT_LIST_RANK);
            let p = matches!(r.d, Multiplicity::Param).then_some(DEFAULT_P);
            CaseDescriptor::build(
                CaseId {
                    family: r.family,
                    p,
                },
                n,
            )
        })
        .collect()
}

pub fn lookup_case(case_id: &str, n: usize) -> Result<CaseDescriptor> {
    let id: CaseId = case_id.parse()?;
    lookup(id, n)
}

pub fn lookup(id: CaseId, n: usize) -> Result<CaseDescriptor> {
    if n == 0 {
        return Err(Error::InvalidRank(n));
    }
    if let Some(fixed) = row(id.family).fixed_rank {
        if n != fixed {
            return Err(Error::FixedRank {
                case: id.to_string(),
                fixed,
                requested: n,
            });
        }
    }
    Ok(CaseDescriptor::build(id, n))
}

/// Lower L^2 threshold for the spherical vector: -(d(n-1) + (e+1)/2).
pub fn l2_threshold(case: &CaseDescriptor) -> f64 {
    -(case.d as f64 * (case.n as f64 - 1.0) + (case.e as f64 + 1.0) / 2.0)
}

/// Multiple of nu in the character carried by the rank-k orbit measure.
/// `k = n` is reported separately by [`lebesgue_exponent`].
pub fn equivariance_exponent(case: &CaseDescriptor, k: usize) -> Result<f64> {
    if k == 0 || k > case.n {
        return Err(Error::RankOutOfRange { k, n: case.n });
    }
    Ok(2.0 * case.d as f64 * k as f64)
}

/// Lebesgue measure on the algebra transforms by e^{2 r nu}.
pub fn lebesgue_exponent(case: &CaseDescriptor) -> f64 {
    2.0 * case.r() as f64
}

/// tau = (d - e - 1)/2, the order of the rank-1 K-Bessel kernel.
pub fn bessel_parameter(case: &CaseDescriptor) -> f64 {
    (case.d as f64 - case.e as f64 - 1.0) / 2.0
}

/// Names the registry's internal invariant that fails, if any.
pub fn check_invariants(case: &CaseDescriptor) -> std::result::Result<(), String> {
    let n = case.n as u64;
    let expect_dim = n * (case.e as u64 + 1) + case.d as u64 * n * (n - 1);
    if case.ambient_dim as u64 != expect_dim {
        return Err(format!(
            "ambient_dim {} != n(e+1)+dn(n-1) = {expect_dim}",
            case.ambient_dim
        ));
    }
    if case.r() < 1 {
        return Err("r < 1".to_string());
    }
    let has_model = case.model_kind != ModelKind::MetadataOnly;
    if case.backend_available != has_model {
        return Err("backend_available inconsistent with model_kind".to_string());
    }
    let lhs = l2_threshold(case);
    let rhs = -(case.r() as f64) + (case.e as f64 + 1.0) / 2.0;
    if lhs != rhs {
        return Err(format!("l2_threshold {lhs} != -r + (e+1)/2 = {rhs}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn find(group: &str) -> CaseDescriptor {
        list_cases()
            .into_iter()
            .find(|c| c.group_name == group)
            .unwrap()
    }

    #[test]
    fn table_multiplicities() {
        let gl = find("GL_2n(R)");
        assert_eq!((gl.d, gl.e), (1, 0));
        let sp = find("Sp_n(C)");
        assert_eq!((sp.d, sp.e), (1, 1));
        let o = find("O_2n,2n");
        assert_eq!((o.d, o.e), (2, 0));
        assert_eq!((find("GL_2n(C)").d, find("GL_2n(C)").e), (2, 1));
        assert_eq!((find("E_7(7)").d, find("E_7(7)").e), (4, 0));
        assert_eq!((find("E_7(C)").d, find("E_7(C)").e), (8, 1));
        assert_eq!((find("O_4n(C)").d, find("O_4n(C)").e), (4, 1));
        assert_eq!((find("Sp_n,n").d, find("Sp_n,n").e), (2, 2));
        assert_eq!((find("GL_2n(H)").d, find("GL_2n(H)").e), (4, 3));
    }

    #[test]
    fn backends_and_metadata_rows() {
        let cases = list_cases();
        assert_eq!(cases.len(), 11);
        for c in &cases {
            check_invariants(c).unwrap();
            let expect = matches!(c.case_id.family, Family::GlReal | Family::SpComplex | Family::OSplit | Family::GlComplex);
            assert_eq!(c.backend_available, expect, "{}", c.case_id);
            assert_eq!(c.backend().is_some(), expect);
        }
        assert_eq!(find("E_7(7)").n, 3);
        assert_eq!(find("E_7(C)").n, 3);
        assert_eq!(find("O_p+2,p+2").n, 2);
        assert_eq!(find("Sp_n,n").base_field, BaseField::Quaternion);
    }

    #[test]
    fn lookup_examples() {
        let gl = lookup_case("gl_r", 2).unwrap();
        assert_eq!((gl.n, gl.d, gl.e, gl.ambient_dim), (2, 1, 0, 4));
        let sp = lookup_case("sp_c", 2).unwrap();
        assert_eq!((sp.n, sp.d, sp.e, sp.ambient_dim), (2, 1, 1, 6));
        let o = lookup_case("o_2n2n", 2).unwrap();
        assert_eq!(o.ambient_dim, 6);
        let glc = lookup_case("gl_c", 2).unwrap();
        assert_eq!(glc.ambient_dim, 8);
    }

    #[test]
    fn excluded_family_never_constructs() {
        for id in ["o_pq_unequal", "o_pq:3,4", "o_pq:5,2"] {
            assert!(matches!(lookup_case(id, 2), Err(Error::Inadmissible { .. })), "{id}");
        }
        let equal = lookup_case("o_pq:4,4", 2).unwrap();
        assert_eq!(equal.case_id.family, Family::OPp);
        assert_eq!(equal.d, 2);
    }

    #[test]
    fn lookup_errors() {
        assert!(matches!(lookup_case("nope", 2), Err(Error::UnknownCase(_))));
        assert!(matches!(lookup_case("gl_r", 0), Err(Error::InvalidRank(0))));
        assert!(matches!(lookup_case("e7_7", 2), Err(Error::FixedRank { .. })));
        assert!(matches!(lookup_case("o_pp:3", 3), Err(Error::FixedRank { .. })));
        assert_eq!(lookup_case("o_pp:3", 2).unwrap().d, 3);
        assert_eq!(lookup_case("o_p4_c:5", 2).unwrap().d, 5);
    }

    #[test]
    fn thresholds_and_exponents() {
        let gl = lookup_case("gl_r", 2).unwrap();
        let sp = lookup_case("sp_c", 2).unwrap();
        let o = lookup_case("o_2n2n", 2).unwrap();
        assert_eq!(l2_threshold(&gl), -1.5);
        assert_eq!(l2_threshold(&sp), -2.0);
        assert_eq!(l2_threshold(&o), -2.5);
        assert_eq!(equivariance_exponent(&gl, 1).unwrap(), 2.0);
        assert_eq!(equivariance_exponent(&o, 1).unwrap(), 4.0);
        assert!(equivariance_exponent(&gl, 3).is_err());
        assert!(equivariance_exponent(&gl, 0).is_err());
        assert_eq!(lebesgue_exponent(&gl), 2.0 * gl.r() as f64);
        assert_eq!(bessel_parameter(&gl), 0.0);
        assert_eq!(bessel_parameter(&o), 0.5);
        assert_eq!(bessel_parameter(&sp), -0.5);
    }

    #[test]
    fn bessel_parameter_is_rank_independent() {
        for fam in ["gl_r", "o_2n2n", "sp_c", "gl_c", "sp_nn", "gl_h", "o_4n_c"] {
            let tau: Vec<f64> = (1..=5)
                .map(|n| bessel_parameter(&lookup_case(fam, n).unwrap()))
                .collect();
            assert!(tau.windows(2).all(|w| w[0] == w[1]), "{fam}");
        }
    }

    #[test]
    fn sub_case_keeps_multiplicities() {
        let o = lookup_case("o_pp:2", 2).unwrap();
        let s = o.sub_case(1).unwrap();
        assert_eq!((s.n, s.d, s.e), (1, 2, 0));
        assert!(o.sub_case(3).is_err());
    }

    #[test]
    fn case_id_round_trips_through_json() {
        let c = lookup_case("o_pp:3", 2).unwrap();
        let s = serde_json::to_string(&c.case_id).unwrap();
        assert_eq!(s, "\"o_pp:3\"");
        let back: CaseId = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c.case_id);
    }
}
