//! Two-port Jones-calculus model of the MEMS I channel.
//!
//! A single photon carries polarization ⊗ path. The composite basis is
//! ordered H1, H2, V1, V2 (polarization index major). The 50/50 beam
//! splitter sends path 1 into both paths; path 1 then passes a π/2
//! polarization rotator, path 2 a horizontal polarizer and an attenuator.
//! A detector that cannot tell the paths apart sees the path-traced state.

use crate::channels::{mems1_map, projector_h, rotation_quarter, FamilyTag};
use crate::error::{Error, Result};
use crate::linalg::{tensor, CMatrix, DensityMatrix, C64, I, ONE, TOL, ZERO};
use crate::numfmt::G17;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

/// Elementary 2×2 blocks of the device.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalElements {
    /// 50/50 beam splitter on path space, (1/√2)[[1, i], [i, 1]].
    pub beam_splitter: CMatrix,
    /// Horizontal polarizer.
    pub polarizer_h: CMatrix,
    /// Polarization rotation by θ = π/2.
    pub rotator: CMatrix,
    /// Projector onto path 1.
    pub path1: CMatrix,
    /// Projector onto path 2.
    pub path2: CMatrix,
}

impl OpticalElements {
    pub fn standard() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        OpticalElements {
            beam_splitter: CMatrix::from_rows(&[[ONE, I], [I, ONE]]).scale_real(s),
            polarizer_h: projector_h(),
            rotator: rotation_quarter(),
            path1: CMatrix::diag_real(&[1.0, 0.0]),
            path2: CMatrix::diag_real(&[0.0, 1.0]),
        }
    }
}

/// Amplitude factor e^{−α} of the path-2 attenuator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attenuation {
    alpha: f64,
}

impl Attenuation {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_nan() || alpha < 0.0 {
            return Err(Error::OutOfRange {
                name: "alpha",
                value: alpha,
                range: "[0, inf]",
            });
        }
        Ok(Attenuation { alpha })
    }

    /// Total extinction of path 2 (α = ∞).
    pub fn opaque() -> Self {
        Attenuation {
            alpha: f64::INFINITY,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// e^{−α}; exactly zero for the opaque attenuator.
    pub fn amplitude(&self) -> f64 {
        (-self.alpha).exp()
    }
}

/// Attenuation that turns the device into the MEMS I map at parameter p:
/// α(p) = −½ ln[2(1−p)/p], defined for 2/3 ≤ p < 1.
pub fn alpha_for_p(p: f64) -> Result<Attenuation> {
    let p = FamilyTag::I.validate(p)?;
    if p >= 1.0 {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            range: "[2/3, 1) (p = 1 needs infinite attenuation)",
        });
    }
    let alpha = -0.5 * (2.0 * (1.0 - p) / p).ln();
    // ln can return −0.0 or a hair below zero at p = 2/3
    Attenuation::new(alpha.max(0.0))
}

/// T = R ⊗ (P·B) + e^{−α} H ⊗ (Q·B), polarization ⊗ path.
pub fn transmission_matrix(att: Attenuation) -> CMatrix {
    let e = OpticalElements::standard();
    let open = tensor(&e.rotator, &(&e.path1 * &e.beam_splitter));
    let attenuated = tensor(&e.polarizer_h, &(&e.path2 * &e.beam_splitter));
    &open + &attenuated.scale_real(att.amplitude())
}

/// Single-photon state in polarization ⊗ path, ordered H1, H2, V1, V2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeState {
    amps: [C64; 4],
}

pub const COMPOSITE_BASIS: &str = "pol⊗path";

const fn composite_index(pol: usize, path: usize) -> usize {
    2 * pol + path
}

impl CompositeState {
    pub fn new(amps: [C64; 4]) -> Result<Self> {
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if norm > 1.0 + TOL {
            return Err(Error::OutOfRange {
                name: "norm^2",
                value: norm,
                range: "[0, 1]",
            });
        }
        Ok(CompositeState { amps })
    }

    /// (φ_H, φ_V) ⊗ path 1.
    pub fn on_path1(phi_h: C64, phi_v: C64) -> Result<Self> {
        let mut amps = [ZERO; 4];
        amps[composite_index(0, 0)] = phi_h;
        amps[composite_index(1, 0)] = phi_v;
        Self::new(amps)
    }

    pub fn amps(&self) -> &[C64; 4] {
        &self.amps
    }

    pub fn amplitude(&self, pol: usize, path: usize) -> C64 {
        self.amps[composite_index(pol, path)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    fn has_path2_support(&self) -> bool {
        (0..2).any(|pol| self.amplitude(pol, 1) != ZERO)
    }
}

impl Serialize for CompositeState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let amps: Vec<[G17; 2]> = self.amps.iter().map(|z| [G17(z.re), G17(z.im)]).collect();
        let mut st = s.serialize_struct("CompositeState", 2)?;
        st.serialize_field("basis", COMPOSITE_BASIS)?;
        st.serialize_field("amps", &amps)?;
        st.end()
    }
}

#[derive(Deserialize)]
struct RawComposite {
    basis: String,
    amps: Vec<[f64; 2]>,
}

impl<'de> Deserialize<'de> for CompositeState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawComposite::deserialize(d)?;
        if raw.basis != COMPOSITE_BASIS {
            return Err(D::Error::custom(format!(
                "unsupported basis '{}', expected '{COMPOSITE_BASIS}'",
                raw.basis
            )));
        }
        let amps: [[f64; 2]; 4] = raw.amps.try_into().map_err(|v: Vec<_>| {
            D::Error::custom(format!("expected 4 amplitudes, got {}", v.len()))
        })?;
        CompositeState::new(amps.map(|[re, im]| C64::new(re, im))).map_err(D::Error::custom)
    }
}

/// |out⟩ = T|in⟩. Vacuum must enter port 2.
pub fn propagate(input: &CompositeState, att: Attenuation) -> Result<CompositeState> {
    if input.has_path2_support() {
        return Err(Error::PathTwoSupport);
    }
    let out = transmission_matrix(att).mul_vec(&input.amps);
    Ok(CompositeState {
        amps: out.try_into().expect("4 amplitudes"),
    })
}

/// Mode-blind detection: J = Tr_path |out⟩⟨out|.
pub fn detected_state(out: &CompositeState) -> DensityMatrix {
    let mut j = CMatrix::zeros(2, 2);
    for a in 0..2 {
        for b in 0..2 {
            j[(a, b)] = (0..2)
                .map(|path| out.amplitude(a, path) * out.amplitude(b, path).conj())
                .sum();
        }
    }
    DensityMatrix::from_trusted(j)
}

/// Detection map on an arbitrary 2×2 operator: Tr_path[T (m ⊗ |1⟩⟨1|) T†].
fn detect_operator(t: &CMatrix, m: &CMatrix) -> CMatrix {
    let joint = tensor(m, &CMatrix::diag_real(&[1.0, 0.0]));
    let out = &(t * &joint) * &t.adjoint();
    let mut j = CMatrix::zeros(2, 2);
    for a in 0..2 {
        for b in 0..2 {
            j[(a, b)] = (0..2)
                .map(|path| out[(composite_index(a, path), composite_index(b, path))])
                .sum();
        }
    }
    j
}

/// Linear extension of the detection map to a mixed polarization input.
pub fn detected_from_density(rho_in: &DensityMatrix, att: Attenuation) -> Result<DensityMatrix> {
    if rho_in.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: "2x2".into(),
            found: rho_in.matrix().shape_string(),
        });
    }
    let j = detect_operator(&transmission_matrix(att), rho_in.matrix());
    Ok(DensityMatrix::from_trusted(j))
}

/// Photon a of a two-photon polarization state goes through the setup,
/// photon b is untouched. Unnormalized.
pub fn detected_two_photon(rho_ab: &DensityMatrix, att: Attenuation) -> Result<DensityMatrix> {
    if rho_ab.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "4x4".into(),
            found: rho_ab.matrix().shape_string(),
        });
    }
    let t = transmission_matrix(att);
    let m = rho_ab.matrix();
    let mut out = CMatrix::zeros(4, 4);
    for b in 0..2 {
        for b2 in 0..2 {
            let mut block = CMatrix::zeros(2, 2);
            for a in 0..2 {
                for a2 in 0..2 {
                    block[(a, a2)] = m[(2 * a + b, 2 * a2 + b2)];
                }
            }
            let d = detect_operator(&t, &block);
            for a in 0..2 {
                for a2 in 0..2 {
                    out[(2 * a + b, 2 * a2 + b2)] = d[(a, a2)];
                }
            }
        }
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// ‖2p·J_out − Σ Mμ ρ Mμ†‖_F with the attenuator tuned to α(p).
pub fn verify_channel_equivalence(rho_in: &DensityMatrix, p: f64) -> Result<f64> {
    let att = alpha_for_p(p)?;
    let detected = detected_from_density(rho_in, att)?;
    let kraus = mems1_map(p)?.apply(rho_in)?;
    Ok((&detected.matrix().scale_real(2.0 * p) - kraus.matrix()).frobenius_norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn elements_have_stated_structure() {
        let e = OpticalElements::standard();
        let bb = &e.beam_splitter * &e.beam_splitter.adjoint();
        assert!(bb.approx_eq(&CMatrix::identity(2), 1e-15));
        assert_eq!(&e.polarizer_h * &e.polarizer_h, e.polarizer_h);
        assert_eq!(&e.rotator * &e.rotator.transpose(), CMatrix::identity(2));
        assert_eq!(&e.path1 + &e.path2, CMatrix::identity(2));
        assert!((&e.path1 * &e.path2).is_zero());
    }

    #[test]
    fn opaque_limit_blocks_path2() {
        let e = OpticalElements::standard();
        let t = transmission_matrix(Attenuation::opaque());
        let expected = tensor(&e.rotator, &(&e.path1 * &e.beam_splitter));
        assert_eq!(t, expected);
    }

    #[test]
    fn transmission_is_never_unitary() {
        for alpha in [0.0, 0.3, 2.0, 20.0] {
            let t = transmission_matrix(Attenuation::new(alpha).unwrap());
            let defect = (&(&t.adjoint() * &t) - &CMatrix::identity(4)).frobenius_norm();
            assert!(defect > 0.1, "alpha = {alpha}");
        }
    }

    #[test]
    fn propagate_general_input_at_zero_alpha() {
        let (ph, pv) = (c(0.6, 0.0), c(0.0, 0.8));
        let input = CompositeState::on_path1(ph, pv).unwrap();
        let out = propagate(&input, Attenuation::new(0.0).unwrap()).unwrap();
        // (1/√2)[(−φ_V, φ_H) ⊗ path1 + i(φ_H, 0) ⊗ path2]
        let expected = [-pv * S, I * ph * S, ph * S, ZERO];
        assert!((out.amplitude(0, 0) - expected[0]).norm() < 1e-15);
        assert!((out.amplitude(0, 1) - expected[1]).norm() < 1e-15);
        assert!((out.amplitude(1, 0) - expected[2]).norm() < 1e-15);
        assert!((out.amplitude(1, 1) - expected[3]).norm() < 1e-15);
    }

    #[test]
    fn propagate_horizontal_photon() {
        let input = CompositeState::on_path1(ONE, ZERO).unwrap();
        let out = propagate(&input, Attenuation::new(0.0).unwrap()).unwrap();
        assert!((out.amplitude(1, 0) - c(S, 0.0)).norm() < 1e-15);
        assert!((out.amplitude(0, 1) - c(0.0, S)).norm() < 1e-15);
        assert_eq!(out.amplitude(0, 0), ZERO);
        assert_eq!(out.amplitude(1, 1), ZERO);
    }

    #[test]
    fn polarizer_kills_vertical_on_path2() {
        for alpha in [0.0, 0.5, 3.0] {
            let input = CompositeState::on_path1(ZERO, ONE).unwrap();
            let out = propagate(&input, Attenuation::new(alpha).unwrap()).unwrap();
            assert!((out.amplitude(0, 0) - c(-S, 0.0)).norm() < 1e-15);
            assert_eq!(out.amplitude(0, 1), ZERO);
            assert_eq!(out.amplitude(1, 1), ZERO);
            assert_eq!(out.amplitude(1, 0), ZERO);
        }
    }

    #[test]
    fn output_norm_closed_form() {
        for alpha in [0.0, 0.2, 1.1] {
            for h in [0.0, 0.3, 0.8, 1.0f64] {
                let v = (1.0 - h * h).sqrt();
                let input = CompositeState::on_path1(c(h, 0.0), c(0.0, v)).unwrap();
                let out = propagate(&input, Attenuation::new(alpha).unwrap()).unwrap();
                let expected = 0.5 * (1.0 + (-2.0 * alpha).exp() * h * h);
                assert!((out.norm_sqr() - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn propagate_rejects_path2_input() {
        let input = CompositeState::new([ZERO, ONE, ZERO, ZERO]).unwrap();
        assert_eq!(
            propagate(&input, Attenuation::new(0.0).unwrap()),
            Err(Error::PathTwoSupport)
        );
    }

    #[test]
    fn detected_horizontal_is_maximally_mixed() {
        let input = CompositeState::on_path1(ONE, ZERO).unwrap();
        let out = propagate(&input, Attenuation::new(0.0).unwrap()).unwrap();
        let j = detected_state(&out);
        assert!(j
            .matrix()
            .approx_eq(&CMatrix::diag_real(&[0.5, 0.5]), 1e-15));
    }

    #[test]
    fn pure_and_density_detection_agree() {
        let input = CompositeState::on_path1(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let rho = DensityMatrix::from_pure(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let att = Attenuation::new(0.4).unwrap();
        let a = detected_state(&propagate(&input, att).unwrap());
        let b = detected_from_density(&rho, att).unwrap();
        assert!(a.matrix().approx_eq(b.matrix(), 1e-15));
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_for_p(2.0 / 3.0).unwrap().alpha(), 0.0);
        let a = alpha_for_p(0.8).unwrap().alpha();
        assert!((a - std::f64::consts::LN_2 / 2.0).abs() < 1e-15);
        assert!(alpha_for_p(1.0).is_err());
        assert!(alpha_for_p(0.6).is_err());
        assert!(Attenuation::new(-0.1).is_err());
    }

    #[test]
    fn worst_case_detection_probability_is_half() {
        // as p → 1 the attenuator closes and only path 1 reaches the detector
        let rho = DensityMatrix::from_pure(&[c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        let j = detected_from_density(&rho, Attenuation::opaque()).unwrap();
        assert!((j.trace() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn equivalence_examples() {
        let h = DensityMatrix::new(CMatrix::diag_real(&[1.0, 0.0])).unwrap();
        let v = DensityMatrix::new(CMatrix::diag_real(&[0.0, 1.0])).unwrap();
        assert!(verify_channel_equivalence(&h, 0.8).unwrap() <= 1e-12);
        assert!(verify_channel_equivalence(&v, 0.7).unwrap() <= 1e-12);
    }

    #[test]
    fn composite_json_round_trip() {
        let s = CompositeState::on_path1(c(0.6, 0.1), c(0.0, -0.7)).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.starts_with(r#"{"basis":"pol⊗path","amps":[["#));
        let back: CompositeState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<CompositeState>(
            r#"{"basis":"path⊗pol","amps":[[1,0],[0,0],[0,0],[0,0]]}"#
        )
        .is_err());
        assert!(
            serde_json::from_str::<CompositeState>(r#"{"basis":"pol⊗path","amps":[[1,0]]}"#)
                .is_err()
        );
    }

    #[test]
    fn two_photon_detection_on_singlet_gives_mems1() {
        for p in [2.0 / 3.0, 0.75, 0.9] {
            let j = detected_two_photon(&crate::mems::singlet(), alpha_for_p(p).unwrap()).unwrap();
            let want = crate::mems::mems1_state(p).unwrap();
            assert!((j.trace() - 1.0 / (2.0 * p)).abs() < 1e-12);
            assert!(j.normalized().unwrap().distance(&want) < 1e-12);
        }
    }
}
