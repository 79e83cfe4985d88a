//! Unitary second-quantized model of the MEMS I channel.
//!
//! Photon a occupies one of four spatial modes with polarization 0 (H) or
//! 1 (V); photon b only carries polarization. A two-photon state is the
//! amplitude table c[i, α, β] of a†_{iα} b†_β |0⟩. Optical elements act by
//! rewriting creation operators, a†_{iα} ↣ Σ S_{jβ,iα} a†_{jβ}, which maps
//! the amplitude table linearly.
//!
//! The four elements in order: a 50/50 beam splitter on modes (1, 2), a
//! π/2 polarization rotator on mode 1, a polarizing beam splitter on modes
//! (2, 3), and a variable beam splitter on modes (2, 4) standing in for the
//! attenuator. Modes 3 and 4 carry what the lossy device would discard.

use crate::error::{Error, Result};
use crate::linalg::{partial_trace, CMatrix, DensityMatrix, Keep, C64, I, ONE, TOL, ZERO};
use crate::mems::mems1_state;
use crate::numfmt::G17;
use serde::{Deserialize, Serialize, Serializer};

pub const MODES: usize = 4;

/// Amplitudes over (spatial mode of a, polarization of a, polarization of b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhotonState {
    amps: [[[C64; 2]; 2]; MODES],
}

/// One term of a creation-operator image: coefficient times a†_{mode, pol}.
type Term = (usize, usize, C64);

impl TwoPhotonState {
    pub fn vacuum_amplitudes() -> Self {
        TwoPhotonState {
            amps: [[[ZERO; 2]; 2]; MODES],
        }
    }

    /// `mode` is 1-based.
    pub fn amplitude(&self, mode: usize, pol_a: usize, pol_b: usize) -> C64 {
        self.amps[mode - 1][pol_a][pol_b]
    }

    pub fn set_amplitude(&mut self, mode: usize, pol_a: usize, pol_b: usize, value: C64) {
        self.amps[mode - 1][pol_a][pol_b] = value;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.iter().map(|(_, _, _, z)| z.norm_sqr()).sum()
    }

    /// All entries as (mode, pol_a, pol_b, amplitude), mode 1-based.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, usize, C64)> + '_ {
        (0..MODES).flat_map(move |m| {
            (0..2).flat_map(move |a| (0..2).map(move |b| (m + 1, a, b, self.amps[m][a][b])))
        })
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &TwoPhotonState) -> C64 {
        self.iter()
            .zip(other.iter())
            .map(|((_, _, _, x), (_, _, _, y))| x.conj() * y)
            .sum()
    }

    pub fn max_abs_diff(&self, other: &TwoPhotonState) -> f64 {
        self.iter()
            .zip(other.iter())
            .map(|((_, _, _, x), (_, _, _, y))| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Apply the creation-operator substitution a†_{mode,pol} ↣ image(mode, pol).
    /// `image` returns `None` for operators the element leaves alone.
    fn rewrite(&self, image: impl Fn(usize, usize) -> Option<Vec<Term>>) -> TwoPhotonState {
        let mut out = TwoPhotonState::vacuum_amplitudes();
        for (mode, pol_a, pol_b, c) in self.iter() {
            if c == ZERO {
                continue;
            }
            match image(mode, pol_a) {
                Some(terms) => {
                    for (m, pa, coeff) in terms {
                        out.amps[m - 1][pa][pol_b] += coeff * c;
                    }
                }
                None => out.amps[mode - 1][pol_a][pol_b] += c,
            }
        }
        out
    }

    /// Restriction to modes `(lo, hi)`; everything else zeroed.
    pub fn restrict(&self, modes: &[usize]) -> TwoPhotonState {
        let mut out = TwoPhotonState::vacuum_amplitudes();
        for &m in modes {
            out.amps[m - 1] = self.amps[m - 1];
        }
        out
    }
}

impl std::ops::Add for TwoPhotonState {
    type Output = TwoPhotonState;

    fn add(mut self, rhs: TwoPhotonState) -> TwoPhotonState {
        for m in 0..MODES {
            for a in 0..2 {
                for b in 0..2 {
                    self.amps[m][a][b] += rhs.amps[m][a][b];
                }
            }
        }
        self
    }
}

#[derive(Serialize, Deserialize)]
struct AmpEntry {
    mode: usize,
    pol_a: usize,
    pol_b: usize,
    #[serde(serialize_with = "crate::numfmt::serialize_g17")]
    re: f64,
    #[serde(serialize_with = "crate::numfmt::serialize_g17")]
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct AmpTable {
    amps: Vec<AmpEntry>,
}

impl Serialize for TwoPhotonState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let amps = self
            .iter()
            .filter(|(_, _, _, z)| *z != ZERO)
            .map(|(mode, pol_a, pol_b, z)| AmpEntry {
                mode,
                pol_a,
                pol_b,
                re: z.re,
                im: z.im,
            })
            .collect();
        AmpTable { amps }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TwoPhotonState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let table = AmpTable::deserialize(d)?;
        let mut state = TwoPhotonState::vacuum_amplitudes();
        let mut seen = [[[false; 2]; 2]; MODES];
        for e in table.amps {
            if !(1..=MODES).contains(&e.mode) || e.pol_a > 1 || e.pol_b > 1 {
                return Err(D::Error::custom(format!(
                    "label (mode {}, pol_a {}, pol_b {}) out of range",
                    e.mode, e.pol_a, e.pol_b
                )));
            }
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(D::Error::custom(Error::NonFinite));
            }
            let slot = &mut seen[e.mode - 1][e.pol_a][e.pol_b];
            if *slot {
                return Err(D::Error::custom(format!(
                    "duplicate amplitude for (mode {}, pol_a {}, pol_b {})",
                    e.mode, e.pol_a, e.pol_b
                )));
            }
            *slot = true;
            state.set_amplitude(e.mode, e.pol_a, e.pol_b, C64::new(e.re, e.im));
        }
        if state.norm_sqr() > 1.0 + TOL {
            return Err(D::Error::custom("two-photon state has norm above one"));
        }
        Ok(state)
    }
}

/// Variable-reflectivity beam splitter: transmission T, reflection R = √(1 − T²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmissivity {
    t: f64,
    r: f64,
}

impl Transmissivity {
    pub fn new(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfRange {
                name: "T",
                value: t,
                range: "[0, 1]",
            });
        }
        Ok(Transmissivity {
            t,
            r: (1.0 - t * t).max(0.0).sqrt(),
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Transmissivity realizing MEMS I parameter p: T² = 2/p − 2.
    pub fn for_p(p: f64) -> Result<Self> {
        let p = crate::channels::FamilyTag::I.validate(p)?;
        Self::new((2.0 / p - 2.0).clamp(0.0, 1.0).sqrt())
    }
}

/// (1/√2)(a†_{1,H} b†_V − a†_{1,V} b†_H)|0⟩
pub fn initial_singlet_fock() -> TwoPhotonState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut st = TwoPhotonState::vacuum_amplitudes();
    st.set_amplitude(1, 0, 1, C64::new(s, 0.0));
    st.set_amplitude(1, 1, 0, C64::new(-s, 0.0));
    st
}

/// 50/50 beam splitter on modes 1 and 2: a†_{1α} ↣ (a†_{1α} + i a†_{2α})/√2,
/// a†_{2α} ↣ (i a†_{1α} + a†_{2α})/√2.
pub fn apply_bs(s: &TwoPhotonState) -> TwoPhotonState {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    s.rewrite(|mode, pol| match mode {
        1 => Some(vec![(1, pol, h), (2, pol, I * h)]),
        2 => Some(vec![(1, pol, I * h), (2, pol, h)]),
        _ => None,
    })
}

/// Polarization rotator on mode 1: a†_{1,0} ↣ a†_{1,1}, a†_{1,1} ↣ −a†_{1,0}.
pub fn apply_rotator(s: &TwoPhotonState) -> TwoPhotonState {
    s.rewrite(|mode, pol| match (mode, pol) {
        (1, 0) => Some(vec![(1, 1, ONE)]),
        (1, 1) => Some(vec![(1, 0, -ONE)]),
        _ => None,
    })
}

/// Polarizing beam splitter acting on (a†_{20}, a†_{21}, a†_{30}, a†_{31}).
pub fn pbs_matrix() -> CMatrix {
    CMatrix::from_rows(&[
        [ONE, ZERO, ZERO, ZERO],
        [ZERO, ZERO, ZERO, I],
        [ZERO, ZERO, ONE, ZERO],
        [ZERO, I, ZERO, ZERO],
    ])
}

/// Polarizing beam splitter: H stays in mode 2 (3), V swaps between modes
/// 2 and 3 with a factor i.
pub fn apply_pbs(s: &TwoPhotonState) -> TwoPhotonState {
    let u = pbs_matrix();
    let labels = [(2, 0), (2, 1), (3, 0), (3, 1)];
    s.rewrite(|mode, pol| {
        let row = labels.iter().position(|&l| l == (mode, pol))?;
        Some(
            labels
                .iter()
                .enumerate()
                .filter(|(col, _)| u[(row, *col)] != ZERO)
                .map(|(col, &(m, p))| (m, p, u[(row, col)]))
                .collect(),
        )
    })
}

/// Attenuator as a beam splitter between modes 2 and 4:
/// a†_{2α} ↣ T a†_{2α} + iR a†_{4α}, a†_{4α} ↣ iR a†_{2α} + T a†_{4α}.
pub fn apply_attenuator(s: &TwoPhotonState, tr: Transmissivity) -> TwoPhotonState {
    let t = C64::new(tr.t, 0.0);
    let ir = C64::new(0.0, tr.r);
    s.rewrite(|mode, pol| match mode {
        2 => Some(vec![(2, pol, t), (4, pol, ir)]),
        4 => Some(vec![(2, pol, ir), (4, pol, t)]),
        _ => None,
    })
}

/// Every intermediate state of the channel acting on the singlet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QedPipeline {
    pub transmissivity: Transmissivity,
    pub input: TwoPhotonState,
    pub after_bs: TwoPhotonState,
    pub after_rotator: TwoPhotonState,
    pub after_pbs: TwoPhotonState,
    pub output: TwoPhotonState,
}

pub fn run_pipeline(tr: Transmissivity) -> QedPipeline {
    let input = initial_singlet_fock();
    let after_bs = apply_bs(&input);
    let after_rotator = apply_rotator(&after_bs);
    let after_pbs = apply_pbs(&after_rotator);
    let output = apply_attenuator(&after_pbs, tr);
    QedPipeline {
        transmissivity: tr,
        input,
        after_bs,
        after_rotator,
        after_pbs,
        output,
    }
}

/// Split into the parts living on modes (1, 2) and (3, 4).
pub fn split_by_modes(s: &TwoPhotonState) -> (TwoPhotonState, TwoPhotonState) {
    (s.restrict(&[1, 2]), s.restrict(&[3, 4]))
}

/// Trace out the spatial mode of photon a:
/// ρ[αβ, α′β′] = Σ_i c[i, α, β] c*[i, α′, β′].
pub fn trace_spatial(s: &TwoPhotonState) -> DensityMatrix {
    let mut rho = CMatrix::zeros(4, 4);
    for m in 0..MODES {
        for a in 0..2 {
            for b in 0..2 {
                for a2 in 0..2 {
                    for b2 in 0..2 {
                        rho[(2 * a + b, 2 * a2 + b2)] += s.amps[m][a][b] * s.amps[m][a2][b2].conj();
                    }
                }
            }
        }
    }
    DensityMatrix::from_trusted(rho)
}

/// MEMS I parameter realized by transmissivity T: p = 2/(2 + T²).
pub fn p_of_t(tr: Transmissivity) -> f64 {
    2.0 / (2.0 + tr.t * tr.t)
}

/// Spatially traced output, split into the detected (modes 1, 2) and
/// undetected (modes 3, 4) parts.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedStates {
    pub rho12: DensityMatrix,
    pub rho34: DensityMatrix,
    pub total: DensityMatrix,
}

pub fn truncated_states(tr: Transmissivity) -> TruncatedStates {
    let out = run_pipeline(tr).output;
    let (psi12, psi34) = split_by_modes(&out);
    TruncatedStates {
        rho12: trace_spatial(&psi12),
        rho34: trace_spatial(&psi34),
        total: trace_spatial(&out),
    }
}

/// ρ₁₂ / Tr ρ₁₂, which should be the MEMS I state at p = p_of_t(T).
pub fn normalized_mems_from_qed(tr: Transmissivity) -> Result<DensityMatrix> {
    truncated_states(tr).rho12.normalized()
}

/// ‖ρ₁₂/Tr ρ₁₂ − mems1_state(p_of_t(T))‖_F
pub fn qed_mems_defect(tr: Transmissivity) -> Result<f64> {
    let got = normalized_mems_from_qed(tr)?;
    let want = mems1_state(p_of_t(tr))?;
    Ok(got.distance(&want))
}

/// Reduced one-photon matrices of the truncated states. `trace_a` means
/// photon a was traced out (photon b kept), and vice versa.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMatrices {
    pub rho12_trace_a: DensityMatrix,
    pub rho12_trace_b: DensityMatrix,
    pub rho34_trace_a: DensityMatrix,
    pub rho34_trace_b: DensityMatrix,
}

impl ReducedMatrices {
    /// Tr ρ₁₂|_a + Tr ρ₃₄|_a, photon b's view of the full output.
    pub fn sum_trace_a(&self) -> CMatrix {
        self.rho12_trace_a.matrix() + self.rho34_trace_a.matrix()
    }

    /// Tr ρ₁₂|_b + Tr ρ₃₄|_b, photon a's view of the full output.
    pub fn sum_trace_b(&self) -> CMatrix {
        self.rho12_trace_b.matrix() + self.rho34_trace_b.matrix()
    }
}

pub fn reduced_matrices(tr: Transmissivity) -> Result<ReducedMatrices> {
    let ts = truncated_states(tr);
    Ok(ReducedMatrices {
        rho12_trace_a: partial_trace(&ts.rho12, Keep::Second)?,
        rho12_trace_b: partial_trace(&ts.rho12, Keep::First)?,
        rho34_trace_a: partial_trace(&ts.rho34, Keep::Second)?,
        rho34_trace_b: partial_trace(&ts.rho34, Keep::First)?,
    })
}

impl Serialize for Transmissivity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Transmissivity", 2)?;
        st.serialize_field("T", &G17(self.t))?;
        st.serialize_field("R", &G17(self.r))?;
        st.end()
    }
}
