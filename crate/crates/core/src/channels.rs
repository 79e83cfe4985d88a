//! Kraus maps: the two MEMS-generating families, application to states,
//! lifting onto photon a of a pair, and trace/unitality/CP audits.

use crate::error::{Error, Result};
use crate::linalg::{sigma_y, sigma_z, tensor, CMatrix, DensityMatrix, C64, TOL};
use crate::numfmt::serialize_g17;
use serde::{Deserialize, Serialize};

/// The two MEMS subclasses and their parameter windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyTag {
    I,
    II,
}

impl FamilyTag {
    /// Closed parameter interval `[lo, hi]`.
    pub fn range(self) -> (f64, f64) {
        match self {
            FamilyTag::I => (2.0 / 3.0, 1.0),
            FamilyTag::II => (0.0, 2.0 / 3.0),
        }
    }

    fn range_text(self) -> &'static str {
        match self {
            FamilyTag::I => "[2/3, 1]",
            FamilyTag::II => "[0, 2/3]",
        }
    }

    /// Reject `p` outside the family window. No clamping.
    pub fn validate(self, p: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !p.is_finite() || p < lo || p > hi {
            return Err(Error::OutOfRange {
                name: "p",
                value: p,
                range: self.range_text(),
            });
        }
        Ok(p)
    }

    pub fn kraus_map(self, p: f64) -> Result<KrausMap> {
        match self {
            FamilyTag::I => mems1_map(p),
            FamilyTag::II => mems2_map(p),
        }
    }
}

impl std::str::FromStr for FamilyTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "I" | "1" => Ok(FamilyTag::I),
            "II" | "2" => Ok(FamilyTag::II),
            other => Err(format!("unknown MEMS family '{other}' (expected I or II)")),
        }
    }
}

impl std::fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FamilyTag::I => "I",
            FamilyTag::II => "II",
        })
    }
}

/// An ordered list of Kraus operators, ρ ↦ Σ Aμ ρ Aμ†.
///
/// Zero operators are kept so that indices line up with the usual
/// μ = 0..3 labelling of the MEMS maps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KrausMap {
    label: String,
    dim: usize,
    ops: Vec<CMatrix>,
}

impl KrausMap {
    pub fn new(label: impl Into<String>, ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops.first().ok_or(Error::EmptyKrausMap)?;
        let dim = first.rows();
        for op in &ops {
            if !op.is_square() || op.rows() != dim {
                return Err(Error::DimensionMismatch {
                    expected: format!("{dim}x{dim}"),
                    found: op.shape_string(),
                });
            }
        }
        if ops.iter().all(CMatrix::is_zero) {
            return Err(Error::EmptyKrausMap);
        }
        Ok(KrausMap {
            label: label.into(),
            dim,
            ops,
        })
    }

    pub fn identity(dim: usize) -> Self {
        KrausMap {
            label: format!("identity{dim}"),
            dim,
            ops: vec![CMatrix::identity(dim)],
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    /// Raw (unnormalized) image Σ Aμ m Aμ†.
    pub fn apply_matrix(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.rows() != self.dim || m.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{0}", self.dim),
                found: m.shape_string(),
            });
        }
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for a in &self.ops {
            out = &out + &(&(a * m) * &a.adjoint());
        }
        Ok(out)
    }

    /// Apply to a state. The result is not renormalized.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.apply_matrix(rho.matrix())
            .map(DensityMatrix::from_trusted)
    }

    /// Act on photon a of a pair: each operator becomes Aμ ⊗ I₂.
    pub fn lift_first_qubit(&self) -> Result<KrausMap> {
        if self.dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: "single-qubit map".into(),
                found: format!("{0}x{0}", self.dim),
            });
        }
        let id = CMatrix::identity(2);
        Ok(KrausMap {
            label: format!("{}⊗I", self.label),
            dim: 4,
            ops: self.ops.iter().map(|a| tensor(a, &id)).collect(),
        })
    }

    /// Σ Aμ† Aμ
    pub fn kraus_sum(&self) -> CMatrix {
        self.ops
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, a| {
                &acc + &(&a.adjoint() * a)
            })
    }

    /// Σ Aμ Aμ†
    pub fn kraus_transpose_sum(&self) -> CMatrix {
        self.ops
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, a| {
                &acc + &(a * &a.adjoint())
            })
    }

    /// Σ vec(Aμ) vec(Aμ)† with column-stacking vec.
    pub fn choi_matrix(&self) -> CMatrix {
        let n = self.dim * self.dim;
        self.ops.iter().fold(CMatrix::zeros(n, n), |acc, a| {
            &acc + &CMatrix::outer(&a.vec_columns())
        })
    }

    pub fn audit(&self) -> Result<ChannelAudit> {
        let id = CMatrix::identity(self.dim);
        let choi_eigs = crate::linalg::hermitian_eigenvalues(&self.choi_matrix())?;
        let min_choi_eigenvalue = *choi_eigs.last().expect("non-empty spectrum");
        Ok(ChannelAudit {
            kraus_sum_defect: (&self.kraus_sum() - &id).frobenius_norm(),
            unital_defect: (&self.kraus_transpose_sum() - &id).frobenius_norm(),
            is_cp: min_choi_eigenvalue >= -TOL,
            min_choi_eigenvalue,
        })
    }
}

#[derive(Deserialize)]
struct RawKrausMap {
    label: String,
    dim: usize,
    ops: Vec<CMatrix>,
}

impl<'de> Deserialize<'de> for KrausMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawKrausMap::deserialize(d)?;
        let map = KrausMap::new(raw.label, raw.ops).map_err(serde::de::Error::custom)?;
        if map.dim != raw.dim {
            return Err(serde::de::Error::custom(format!(
                "declared dim {} but operators are {}x{}",
                raw.dim, map.dim, map.dim
            )));
        }
        Ok(map)
    }
}

/// Result of [`KrausMap::audit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelAudit {
    /// ‖Σ A†A − I‖_F
    #[serde(serialize_with = "serialize_g17")]
    pub kraus_sum_defect: f64,
    /// ‖Σ AA† − I‖_F
    #[serde(serialize_with = "serialize_g17")]
    pub unital_defect: f64,
    pub is_cp: bool,
    #[serde(serialize_with = "serialize_g17")]
    pub min_choi_eigenvalue: f64,
}

impl ChannelAudit {
    pub fn is_trace_preserving(&self) -> bool {
        self.kraus_sum_defect <= TOL
    }

    pub fn is_unital(&self) -> bool {
        self.unital_defect <= TOL
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// [[0, −1], [1, 0]], the π/2 polarization rotation.
pub(crate) fn rotation_quarter() -> CMatrix {
    CMatrix::from_real_rows(&[[0.0, -1.0], [1.0, 0.0]])
}

/// Projector |H⟩⟨H| = diag(1, 0).
pub(crate) fn projector_h() -> CMatrix {
    CMatrix::diag_real(&[1.0, 0.0])
}

/// MEMS I map, 2/3 ≤ p ≤ 1:
/// M₀ = M₁ = 0, M₂ = √(2(1−p))·diag(1,0), M₃ = √p·[[0,−1],[1,0]].
pub fn mems1_map(p: f64) -> Result<KrausMap> {
    let p = FamilyTag::I.validate(p)?;
    let zero = CMatrix::zeros(2, 2);
    let m2 = projector_h().scale(real((2.0 * (1.0 - p)).sqrt()));
    let m3 = rotation_quarter().scale(real(p.sqrt()));
    KrausMap::new(format!("mems1({p})"), vec![zero.clone(), zero, m2, m3])
}

/// MEMS II map, 0 ≤ p ≤ 2/3:
/// K₀ = √(2/3)·diag(1,0), K₁ = 0, K₂ = √(1/3 − p/2)·σx, K₃ = √(1/3 + p/2)·[[0,−1],[1,0]].
pub fn mems2_map(p: f64) -> Result<KrausMap> {
    let p = FamilyTag::II.validate(p)?;
    let k0 = projector_h().scale(real((2.0f64 / 3.0).sqrt()));
    let k1 = CMatrix::zeros(2, 2);
    // at p = 2/3 the radicand may round to a tiny negative number
    let k2 = crate::linalg::sigma_x().scale(real((1.0 / 3.0 - p / 2.0).max(0.0).sqrt()));
    let k3 = rotation_quarter().scale(real((1.0 / 3.0 + p / 2.0).sqrt()));
    KrausMap::new(format!("mems2({p})"), vec![k0, k1, k2, k3])
}

/// The MEMS I map written with Pauli matrices:
/// ½[(1−p)ρ + 2p σyρσy + (1−p)σzρσz + (1−p){ρ, σz}].
pub fn pauli_form_apply(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    let p = FamilyTag::I.validate(p)?;
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: "2x2".into(),
            found: rho.matrix().shape_string(),
        });
    }
    let r = rho.matrix();
    let (sy, sz) = (sigma_y(), sigma_z());
    let q = 1.0 - p;
    let terms = [
        r.scale_real(q),
        (&(&sy * r) * &sy).scale_real(2.0 * p),
        (&(&sz * r) * &sz).scale_real(q),
        r.anticommutator(&sz).scale_real(q),
    ];
    let sum = terms
        .iter()
        .fold(CMatrix::zeros(2, 2), |acc, t| &acc + t)
        .scale_real(0.5);
    Ok(DensityMatrix::from_trusted(sum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, sigma_x, ONE, ZERO};

    fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }

    #[test]
    fn mems1_at_p_one_drops_m2() {
        let m = mems1_map(1.0).unwrap();
        assert!(m.ops()[2].is_zero());
        assert_eq!(m.ops()[3], rotation_quarter());
        assert!(m.ops()[0].is_zero() && m.ops()[1].is_zero());
    }

    #[test]
    fn mems1_operators_at_p_08() {
        let m = mems1_map(0.8).unwrap();
        assert!(m.ops()[2].approx_eq(&CMatrix::diag_real(&[sqrt(0.4), 0.0]), 1e-15));
        assert!(m.ops()[3].approx_eq(&rotation_quarter().scale_real(sqrt(0.8)), 1e-15));
        assert!(m
            .kraus_sum()
            .approx_eq(&CMatrix::diag_real(&[1.2, 0.8]), 1e-12));
    }

    #[test]
    fn mems2_endpoints() {
        let top = mems2_map(2.0 / 3.0).unwrap();
        assert!(top.ops()[2].approx_eq(&CMatrix::zeros(2, 2), 1e-8));
        assert!(top.ops()[3].approx_eq(&rotation_quarter().scale_real(sqrt(2.0 / 3.0)), 1e-15));
        assert!(top.ops()[0].approx_eq(&CMatrix::diag_real(&[sqrt(2.0 / 3.0), 0.0]), 1e-15));

        let bottom = mems2_map(0.0).unwrap();
        let k = sqrt(1.0 / 3.0);
        assert!(bottom.ops()[2].approx_eq(&sigma_x().scale_real(k), 1e-15));
        assert!(bottom.ops()[3].approx_eq(&rotation_quarter().scale_real(k), 1e-15));
    }

    #[test]
    fn mems2_kraus_sum_is_constant() {
        let expected = CMatrix::diag_real(&[4.0 / 3.0, 2.0 / 3.0]);
        for p in [0.0, 0.1, 0.3, 0.5, 2.0 / 3.0] {
            let m = mems2_map(p).unwrap();
            assert!(m.kraus_sum().approx_eq(&expected, 1e-12), "p = {p}");
        }
    }

    #[test]
    fn out_of_range_parameters_are_rejected() {
        for p in [0.5, 1.0001, f64::NAN] {
            assert!(matches!(mems1_map(p), Err(Error::OutOfRange { .. })));
        }
        for p in [-0.01, 0.7, f64::INFINITY] {
            assert!(matches!(mems2_map(p), Err(Error::OutOfRange { .. })));
        }
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(pauli_form_apply(&rho, 0.2).is_err());
    }

    #[test]
    fn apply_mems1_to_horizontal() {
        let h = DensityMatrix::new(CMatrix::diag_real(&[1.0, 0.0])).unwrap();
        let out = mems1_map(0.8).unwrap().apply(&h).unwrap();
        assert!(out
            .matrix()
            .approx_eq(&CMatrix::diag_real(&[0.4, 0.8]), 1e-15));
    }

    #[test]
    fn apply_identity_is_noop() {
        let rho = DensityMatrix::new(CMatrix::from_rows(&[
            [C64::new(0.6, 0.0), C64::new(0.1, -0.3)],
            [C64::new(0.1, 0.3), C64::new(0.4, 0.0)],
        ]))
        .unwrap();
        let out = KrausMap::identity(2).apply(&rho).unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn apply_checks_dimension() {
        let rho4 = DensityMatrix::maximally_mixed(4).unwrap();
        assert!(matches!(
            mems1_map(0.8).unwrap().apply(&rho4),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn lifted_mems1_operators() {
        let p: f64 = 0.75;
        let lifted = mems1_map(p).unwrap().lift_first_qubit().unwrap();
        let n2 = CMatrix::diag_real(&[1.0, 1.0, 0.0, 0.0]).scale_real((2.0 * (1.0 - p)).sqrt());
        let n3 = CMatrix::from_real_rows(&[
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
        ])
        .scale_real(p.sqrt());
        assert_eq!(lifted.dim(), 4);
        assert!(lifted.ops()[0].is_zero() && lifted.ops()[1].is_zero());
        assert!(lifted.ops()[2].approx_eq(&n2, 1e-15));
        assert!(lifted.ops()[3].approx_eq(&n3, 1e-15));
    }

    #[test]
    fn lifted_mems2_operators() {
        let p: f64 = 0.4;
        let lifted = mems2_map(p).unwrap().lift_first_qubit().unwrap();
        let l0 = CMatrix::diag_real(&[1.0, 1.0, 0.0, 0.0]).scale_real((2.0f64 / 3.0).sqrt());
        let swap_blocks = CMatrix::from_real_rows(&[
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
        ]);
        let rotate_blocks = CMatrix::from_real_rows(&[
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
        ]);
        assert!(lifted.ops()[0].approx_eq(&l0, 1e-15));
        assert!(lifted.ops()[1].is_zero());
        assert!(
            lifted.ops()[2].approx_eq(&swap_blocks.scale_real((1.0 / 3.0 - p / 2.0).sqrt()), 1e-15)
        );
        assert!(lifted.ops()[3].approx_eq(
            &rotate_blocks.scale_real((1.0 / 3.0 + p / 2.0).sqrt()),
            1e-15
        ));
    }

    #[test]
    fn lift_identity_and_reject_two_qubit_maps() {
        let lifted = KrausMap::identity(2).lift_first_qubit().unwrap();
        assert_eq!(lifted.ops(), &[CMatrix::identity(4)]);
        assert!(lifted.lift_first_qubit().is_err());
    }

    #[test]
    fn audit_mems1() {
        let audit = mems1_map(0.8).unwrap().audit().unwrap();
        assert!((audit.kraus_sum_defect - 0.2 * 2f64.sqrt()).abs() < 1e-12);
        assert!((audit.unital_defect - 0.2 * 2f64.sqrt()).abs() < 1e-12);
        assert!(audit.is_cp);
        assert!(!audit.is_trace_preserving());
    }

    #[test]
    fn audit_unitary_channel() {
        let y = KrausMap::new("sigma_y", vec![sigma_y()]).unwrap();
        let audit = y.audit().unwrap();
        assert!(audit.kraus_sum_defect < 1e-15);
        assert!(audit.unital_defect < 1e-15);
        assert!(audit.is_cp && audit.is_trace_preserving());
    }

    #[test]
    fn audit_mems2_is_cp() {
        let audit = mems2_map(0.3).unwrap().audit().unwrap();
        assert!(audit.is_cp);
        assert!(audit.min_choi_eigenvalue >= -TOL);
    }

    #[test]
    fn choi_detects_non_cp_operator_sets() {
        // the transpose map has Choi matrix equal to the swap, which has eigenvalue −1;
        // it is not a Kraus map, so build its Choi matrix directly and check the audit logic
        let swap = CMatrix::from_real_rows(&[
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]);
        let eig = hermitian_eigenvalues(&swap).unwrap();
        assert!(*eig.last().unwrap() < -TOL);
        // the identity channel's Choi matrix is |I⟩⟩⟨⟨I|, rank one with eigenvalue 2
        let choi = KrausMap::identity(2).choi_matrix();
        let eig = hermitian_eigenvalues(&choi).unwrap();
        assert!((eig[0] - 2.0).abs() < 1e-14 && eig[1].abs() < 1e-14);
    }

    #[test]
    fn pauli_form_examples() {
        let h = DensityMatrix::new(CMatrix::diag_real(&[1.0, 0.0])).unwrap();
        let out = pauli_form_apply(&h, 0.8).unwrap();
        assert!(out
            .matrix()
            .approx_eq(&CMatrix::diag_real(&[0.4, 0.8]), 1e-15));

        let v = DensityMatrix::new(CMatrix::diag_real(&[0.0, 1.0])).unwrap();
        for p in [2.0 / 3.0, 0.75, 0.9, 1.0] {
            let out = pauli_form_apply(&v, p).unwrap();
            assert!(out
                .matrix()
                .approx_eq(&CMatrix::diag_real(&[p, 0.0]), 1e-15));
            let kraus = mems1_map(p).unwrap().apply(&v).unwrap();
            assert!(out.matrix().approx_eq(kraus.matrix(), 1e-15));
        }

        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        let out = pauli_form_apply(&mixed, 1.0).unwrap();
        assert!(out.matrix().approx_eq(mixed.matrix(), 1e-15));
    }

    #[test]
    fn kraus_map_constructor_checks() {
        assert_eq!(KrausMap::new("e", vec![]), Err(Error::EmptyKrausMap));
        assert_eq!(
            KrausMap::new("z", vec![CMatrix::zeros(2, 2)]),
            Err(Error::EmptyKrausMap)
        );
        assert!(KrausMap::new("mixed", vec![CMatrix::identity(2), CMatrix::identity(4)]).is_err());
        let ops = vec![CMatrix::from_rows(&[[ONE, ZERO], [ZERO, ZERO]])];
        assert!(KrausMap::new("proj", ops).is_ok());
    }

    #[test]
    fn kraus_json_round_trip() {
        let m = mems2_map(0.25).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        let back: KrausMap = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        let bad =
            r#"{"label":"x","dim":4,"ops":[{"rows":2,"cols":2,"data":[[1,0],[0,0],[0,0],[1,0]]}]}"#;
        assert!(serde_json::from_str::<KrausMap>(bad).is_err());
    }
}
