//! MEMS state families, the singlet resource, and two-qubit diagnostics.

use crate::channels::FamilyTag;
use crate::error::{Error, Result};
use crate::linalg::{
    basis_index, partial_trace, psd_factor, sigma_y, singular_values, tensor, CMatrix,
    DensityMatrix, Keep, C64, TOL,
};
use crate::numfmt::serialize_g17;
use serde::Serialize;

/// A point on one of the two MEMS branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemsFamily {
    pub tag: FamilyTag,
    #[serde(serialize_with = "serialize_g17")]
    pub p: f64,
}

impl MemsFamily {
    pub fn new(tag: FamilyTag, p: f64) -> Result<Self> {
        Ok(MemsFamily {
            tag,
            p: tag.validate(p)?,
        })
    }

    pub fn state(&self) -> DensityMatrix {
        match self.tag {
            FamilyTag::I => mems1_unchecked(self.p),
            FamilyTag::II => mems2_unchecked(self.p),
        }
    }
}

fn from_real(rows: [[f64; 4]; 4]) -> DensityMatrix {
    DensityMatrix::from_trusted(CMatrix::from_real_rows(&rows))
}

/// |φ⁻⟩⟨φ⁻| with |φ⁻⟩ = (|01⟩ − |10⟩)/√2.
pub fn singlet() -> DensityMatrix {
    from_real([
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 0.5, -0.5, 0.0],
        [0.0, -0.5, 0.5, 0.0],
        [0.0, 0.0, 0.0, 0.0],
    ])
}

/// |Φ⁺⟩⟨Φ⁺| with |Φ⁺⟩ = (|00⟩ + |11⟩)/√2.
pub fn bell_phi_plus() -> DensityMatrix {
    from_real([
        [0.5, 0.0, 0.0, 0.5],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
        [0.5, 0.0, 0.0, 0.5],
    ])
}

fn mems1_unchecked(p: f64) -> DensityMatrix {
    let h = p / 2.0;
    from_real([
        [h, 0.0, 0.0, h],
        [0.0, 1.0 - p, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
        [h, 0.0, 0.0, h],
    ])
}

const TWO_THIRDS: f64 = 2.0 / 3.0;

fn mems2_unchecked(p: f64) -> DensityMatrix {
    // Both spellings of 1/3 are the ones MEMS I produces at p = 2/3, so the
    // two branches agree bit-for-bit on the boundary.
    let corner_third = TWO_THIRDS / 2.0;
    let center_third = 1.0 - TWO_THIRDS;
    let h = p / 2.0;
    from_real([
        [corner_third, 0.0, 0.0, h],
        [0.0, center_third, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
        [h, 0.0, 0.0, corner_third],
    ])
}

/// MEMS I: p|Φ⁺⟩⟨Φ⁺| + (1−p)|01⟩⟨01|, for 2/3 ≤ p ≤ 1.
pub fn mems1_state(p: f64) -> Result<DensityMatrix> {
    Ok(mems1_unchecked(FamilyTag::I.validate(p)?))
}

/// MEMS II: diagonal (1/3, 1/3, 0, 1/3) with coherence p/2 between |00⟩
/// and |11⟩, for 0 ≤ p ≤ 2/3.
pub fn mems2_state(p: f64) -> Result<DensityMatrix> {
    Ok(mems2_unchecked(FamilyTag::II.validate(p)?))
}

pub fn mems_state(tag: FamilyTag, p: f64) -> Result<DensityMatrix> {
    MemsFamily::new(tag, p).map(|f| f.state())
}

/// Wootters spin flip (σy⊗σy) ρ* (σy⊗σy).
pub fn spin_flip(rho: &CMatrix) -> CMatrix {
    let yy = tensor(&sigma_y(), &sigma_y());
    &(&yy * &rho.conj()) * &yy
}

fn require_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "4x4".into(),
            found: rho.matrix().shape_string(),
        });
    }
    Ok(())
}

/// Square roots of the eigenvalues of ρ·ρ̃, descending, padded to four.
///
/// With ρ = X X† these are the singular values of Xᵀ(σy⊗σy)X, which avoids
/// taking square roots of eigenvalues that should be zero but carry
/// rounding noise.
pub fn wootters_roots(rho: &DensityMatrix) -> Result<Vec<f64>> {
    require_two_qubit(rho)?;
    let x = psd_factor(rho.matrix())?;
    let yy = tensor(&sigma_y(), &sigma_y());
    let tau = &(&x.transpose() * &yy) * &x;
    let mut roots = singular_values(&tau);
    roots.resize(4, 0.0);
    Ok(roots)
}

/// Eigenvalues of ρ·(σy⊗σy)ρ*(σy⊗σy), descending.
pub fn wootters_eigenvalues(rho: &DensityMatrix) -> Result<Vec<f64>> {
    Ok(wootters_roots(rho)?.into_iter().map(|s| s * s).collect())
}

/// Wootters concurrence C = max(0, √λ₁ − √λ₂ − √λ₃ − √λ₄).
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubit(rho)?;
    rho.require_unit_trace()?;
    let roots = wootters_roots(rho)?;
    let c = roots[0] - roots[1] - roots[2] - roots[3];
    Ok(c.clamp(0.0, 1.0))
}

/// Normalized linear entropy (4/3)(1 − Tr ρ²), in [0, 1] for two qubits.
pub fn linear_entropy(rho: &DensityMatrix) -> Result<f64> {
    rho.require_unit_trace()?;
    let d = rho.dim() as f64;
    Ok(d / (d - 1.0) * (1.0 - rho.purity()))
}

/// Uhlmann fidelity (Tr √(√ρ σ √ρ))², clamped to [0, 1].
///
/// Computed as the squared trace norm of X†Y where ρ = XX† and σ = YY†.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.matrix().shape_string(),
            found: sigma.matrix().shape_string(),
        });
    }
    let x = psd_factor(rho.matrix())?;
    let y = psd_factor(sigma.matrix())?;
    let root_fidelity: f64 = singular_values(&(&x.adjoint() * &y)).into_iter().sum();
    Ok((root_fidelity * root_fidelity).clamp(0.0, 1.0))
}

/// Snap a parameter read off a matrix onto the family window when it sits
/// within `TOL` of an edge.
fn snap(tag: FamilyTag, p: f64) -> Option<f64> {
    let (lo, hi) = tag.range();
    if p < lo - TOL || p > hi + TOL {
        None
    } else {
        Some(p.clamp(lo, hi))
    }
}

/// Identify which MEMS branch (if any) `rho` lies on.
///
/// The candidate parameter is read directly off the matrix (p = 2ρ₁₁ for
/// MEMS I, p = 2|ρ₁₄| for MEMS II) and accepted when the Frobenius distance
/// to the corresponding family member is at most `tol`. On the shared
/// boundary p = 2/3 the MEMS I label wins.
pub fn classify(rho: &DensityMatrix, tol: f64) -> Result<Option<MemsFamily>> {
    require_two_qubit(rho)?;
    rho.require_unit_trace()?;
    let m = rho.matrix();
    let candidates = [
        (FamilyTag::I, 2.0 * m[(0, 0)].re),
        (FamilyTag::II, 2.0 * m[(0, 3)].norm()),
    ];
    for (tag, raw) in candidates {
        if let Some(p) = snap(tag, raw) {
            let family = MemsFamily { tag, p };
            if rho.distance(&family.state()) <= tol {
                return Ok(Some(family));
            }
        }
    }
    Ok(None)
}

/// ‖Tr_a ρ_out − Tr_a ρ_in‖_F: how much photon b's reduced state moved.
pub fn locality_defect(rho_in: &DensityMatrix, rho_out: &DensityMatrix) -> Result<f64> {
    let before = partial_trace(rho_in, Keep::Second)?;
    let after = partial_trace(rho_out, Keep::Second)?;
    Ok(after.distance(&before))
}

/// Summary diagnostics for a two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemsReport {
    pub family: Option<MemsFamily>,
    #[serde(serialize_with = "serialize_g17")]
    pub concurrence: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub linear_entropy: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub trace: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub fidelity_to_reference: f64,
}

impl MemsReport {
    /// Diagnose `rho` (unit trace) against `reference`.
    pub fn analyze(rho: &DensityMatrix, reference: &DensityMatrix) -> Result<Self> {
        Ok(MemsReport {
            family: classify(rho, 1e-9)?,
            concurrence: concurrence(rho)?,
            linear_entropy: linear_entropy(rho)?,
            trace: rho.trace(),
            fidelity_to_reference: fidelity(rho, reference)?,
        })
    }
}

/// Amplitudes of the singlet, for building pure-state variants in tests.
pub fn singlet_amplitudes() -> [C64; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = [C64::new(0.0, 0.0); 4];
    v[basis_index(0, 1)] = C64::new(s, 0.0);
    v[basis_index(1, 0)] = C64::new(-s, 0.0);
    v
}
