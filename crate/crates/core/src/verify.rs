//! Cross-model verification suite: Kraus form, closed-form states, the
//! linear-optics setup and the second-quantized model must all agree.

use crate::channels::{mems1_map, pauli_form_apply, FamilyTag};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{CMatrix, DensityMatrix};
use crate::mems::{concurrence, locality_defect, mems1_state, mems2_state, singlet};
use crate::numfmt::fmt_g17;
use crate::optics::{alpha_for_p, detected_two_photon, verify_channel_equivalence};
use crate::qed::{qed_mems_defect, reduced_matrices, truncated_states, Transmissivity};
use crate::random::{random_pure_state, stream_rng};
use serde::Serialize;

/// A check fails when its defect exceeds this.
pub const VERIFY_THRESHOLD: f64 = 1e-9;

pub const DEFAULT_P_GRID: [f64; 4] = [0.7, 0.8, 0.9, 0.99];
pub const DEFAULT_TRIALS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    p_grid: Vec<f64>,
    trials: usize,
    seed: u64,
}

impl VerifyConfig {
    pub fn new(p_grid: Vec<f64>, trials: usize, seed: u64) -> Result<Self> {
        if p_grid.is_empty() {
            return Err(Error::OutOfRange {
                name: "p_grid",
                value: 0.0,
                range: "at least one point",
            });
        }
        for &p in &p_grid {
            FamilyTag::I.validate(p)?;
        }
        if trials == 0 {
            return Err(Error::OutOfRange {
                name: "trials",
                value: 0.0,
                range: ">= 1",
            });
        }
        Ok(VerifyConfig {
            p_grid,
            trials,
            seed,
        })
    }

    pub fn p_grid(&self) -> &[f64] {
        &self.p_grid
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            p_grid: DEFAULT_P_GRID.to_vec(),
            trials: DEFAULT_TRIALS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(serialize_with = "crate::numfmt::serialize_g17")]
    pub defect: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, defect: f64) -> Self {
        Check {
            name: name.into(),
            pass: defect.is_finite() && defect <= VERIFY_THRESHOLD,
            defect,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    #[serde(serialize_with = "crate::numfmt::serialize_g17")]
    pub max_defect: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

struct PointResult {
    checks: Vec<Check>,
    notes: Vec<String>,
}

fn max_over<F>(n: usize, f: F) -> Result<f64>
where
    F: Fn(usize) -> Result<f64>,
{
    (0..n).try_fold(0.0_f64, |acc, k| Ok(acc.max(f(k)?)))
}

fn check_point(cfg: &VerifyConfig, index: usize, p: f64) -> Result<PointResult> {
    let tag = format!("[p={}]", fmt_g17(p));
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let map = mems1_map(p)?;
    let lifted = map.lift_first_qubit()?;
    let target = mems1_state(p)?;

    let from_kraus = lifted.apply(&singlet())?;
    checks.push(Check::new(
        format!("kraus_singlet_vs_mems1{tag}"),
        from_kraus.distance(&target),
    ));

    let sum_defect = (&map.kraus_sum() - &CMatrix::diag_real(&[2.0 - p, p])).frobenius_norm();
    checks.push(Check::new(
        format!("kraus_sum_closed_form{tag}"),
        sum_defect,
    ));

    // Per-trial streams: even indices for the Pauli leg, odd for optics.
    let base = (index * cfg.trials) as u64;
    let pauli = max_over(cfg.trials, |k| {
        let rho = random_pure_state(2, &mut stream_rng(cfg.seed, 2 * (base + k as u64)));
        let a = pauli_form_apply(&rho, p)?;
        let b = map.apply(&rho)?;
        Ok((a.matrix() - b.matrix()).frobenius_norm())
    })?;
    checks.push(Check::new(format!("pauli_vs_kraus{tag}"), pauli));

    if p < 1.0 {
        let optics = max_over(cfg.trials, |k| {
            let rho = random_pure_state(2, &mut stream_rng(cfg.seed, 2 * (base + k as u64) + 1));
            verify_channel_equivalence(&rho, p)
        })?;
        checks.push(Check::new(format!("optics_vs_kraus{tag}"), optics));
        let detected = detected_two_photon(&singlet(), alpha_for_p(p)?)?;
        checks.push(Check::new(
            format!("optics_singlet_vs_mems1{tag}"),
            detected.normalized()?.distance(&target),
        ));
    } else {
        notes.push(format!(
            "optics leg skipped at p={}: requires infinite attenuation; second-quantized model covers it at T=0",
            fmt_g17(p)
        ));
    }

    let tr = Transmissivity::for_p(p)?;
    checks.push(Check::new(
        format!("qed_vs_mems1{tag}"),
        qed_mems_defect(tr)?,
    ));

    let ts = truncated_states(tr);
    let full = DensityMatrix::new(ts.rho12.matrix() + ts.rho34.matrix())?;
    checks.push(Check::new(
        format!("qed_locality_full_output{tag}"),
        locality_defect(&singlet(), &full)?,
    ));
    let red = reduced_matrices(tr)?;
    let half = CMatrix::identity(2).scale_real(0.5);
    let sums = (&red.sum_trace_a() - &half)
        .frobenius_norm()
        .max((&red.sum_trace_b() - &half).frobenius_norm());
    checks.push(Check::new(format!("qed_reduced_sums{tag}"), sums));

    Ok(PointResult { checks, notes })
}

/// Run the whole suite. Output order depends only on the config.
pub fn run_verify(cfg: &VerifyConfig, exec: Execution) -> Result<VerifyReport> {
    let points = exec.map_range(cfg.p_grid.len(), |i| check_point(cfg, i, cfg.p_grid[i]));
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    for point in points {
        let point = point?;
        checks.extend(point.checks);
        notes.extend(point.notes);
    }

    let b = 2.0 / 3.0;
    let m1 = mems1_state(b)?;
    let m2 = mems2_state(b)?;
    checks.push(Check::new("boundary_states_continuous", m1.distance(&m2)));
    checks.push(Check::new(
        "boundary_concurrence_continuous",
        (concurrence(&m1)? - concurrence(&m2)?).abs(),
    ));

    let max_defect = checks.iter().map(|c| c.defect).fold(0.0, f64::max);
    Ok(VerifyReport {
        checks,
        notes,
        max_defect,
    })
}
