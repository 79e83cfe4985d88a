//! Statistical check that random two-qubit states stay below the MEMS curve
//! in the (linear entropy, concurrence) plane.

use crate::channels::FamilyTag;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::mems::{concurrence, linear_entropy, mems_state};
use crate::random::{hilbert_schmidt_state, stream_rng};
use serde::Serialize;

/// Linear entropy where the two families meet (p = 2/3).
pub const S_BOUNDARY: f64 = 16.0 / 27.0;
/// Linear entropy of the MEMS II state at p = 0; beyond it the curve is C = 0.
pub const S_MAX_MEMS: f64 = 8.0 / 9.0;

pub const DEFAULT_BAND: f64 = 0.005;
pub const DEFAULT_SLACK: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontierSample {
    #[serde(serialize_with = "crate::numfmt::serialize_g17")]
    pub linear_entropy: f64,
    #[serde(serialize_with = "crate::numfmt::serialize_g17")]
    pub concurrence: f64,
}

/// Draw `n` Hilbert–Schmidt states; sample i uses stream i of `seed`.
pub fn sample_frontier(n: usize, seed: u64, exec: Execution) -> Result<Vec<FrontierSample>> {
    exec.map_range(n, |i| {
        let rho = hilbert_schmidt_state(4, &mut stream_rng(seed, i as u64));
        Ok(FrontierSample {
            linear_entropy: linear_entropy(&rho)?,
            concurrence: concurrence(&rho)?,
        })
    })
    .into_iter()
    .collect()
}

/// MEMS parameter p whose state has linear entropy `s`, or `None` past the curve.
pub fn mems_p_for_entropy(s: f64) -> Option<(FamilyTag, f64)> {
    if !(0.0..=S_MAX_MEMS).contains(&s) {
        return None;
    }
    if s <= S_BOUNDARY {
        // (8/3) p (1 − p) = s on the branch p ≥ 2/3
        let p = 0.5 * (1.0 + (1.0 - 1.5 * s).max(0.0).sqrt());
        Some((FamilyTag::I, p.clamp(2.0 / 3.0, 1.0)))
    } else {
        // 8/9 − 2p²/3 = s
        let p = (1.5 * (S_MAX_MEMS - s)).max(0.0).sqrt();
        Some((FamilyTag::II, p.min(2.0 / 3.0)))
    }
}

/// Concurrence of the MEMS state with linear entropy `s` (which equals its p).
pub fn mems_frontier_concurrence(s: f64) -> Option<f64> {
    mems_p_for_entropy(s).map(|(_, p)| p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierViolation {
    pub index: usize,
    pub sample: FrontierSample,
    #[serde(serialize_with = "crate::numfmt::serialize_g17")]
    pub mems_entropy: f64,
    #[serde(serialize_with = "crate::numfmt::serialize_g17")]
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierCheck {
    pub samples: usize,
    /// Samples within the band of at least one MEMS point.
    pub in_band: usize,
    #[serde(serialize_with = "crate::numfmt::serialize_g17")]
    pub band: f64,
    #[serde(serialize_with = "crate::numfmt::serialize_g17")]
    pub slack: f64,
    /// Largest C(sample) − C(MEMS point) over all in-band pairs.
    #[serde(serialize_with = "crate::numfmt::serialize_g17")]
    pub worst_excess: f64,
    pub violations: Vec<FrontierViolation>,
}

impl FrontierCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Compare every sample with every MEMS point whose linear entropy lies
/// within `band` of it. The MEMS concurrence decreases with entropy, so the
/// binding point is the one at the upper edge of the band.
pub fn check_frontier(samples: &[FrontierSample], band: f64, slack: f64) -> FrontierCheck {
    let mut in_band = 0;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for (index, s) in samples.iter().enumerate() {
        if s.linear_entropy - band > S_MAX_MEMS {
            continue;
        }
        let edge = (s.linear_entropy + band).min(S_MAX_MEMS);
        let Some(c_mems) = mems_frontier_concurrence(edge.max(0.0)) else {
            continue;
        };
        in_band += 1;
        let excess = s.concurrence - c_mems;
        worst_excess = worst_excess.max(excess);
        if excess > slack {
            violations.push(FrontierViolation {
                index,
                sample: *s,
                mems_entropy: edge,
                excess,
            });
        }
    }
    FrontierCheck {
        samples: samples.len(),
        in_band,
        band,
        slack,
        worst_excess,
        violations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub family: FamilyTag,
    #[serde(serialize_with = "crate::numfmt::serialize_g17")]
    pub p: f64,
    #[serde(serialize_with = "crate::numfmt::serialize_g17")]
    pub linear_entropy: f64,
    #[serde(serialize_with = "crate::numfmt::serialize_g17")]
    pub concurrence: f64,
}

/// `points_per_family` evenly spaced points of each family, endpoints included,
/// computed from the states themselves.
pub fn mems_curve(points_per_family: usize) -> Result<Vec<CurvePoint>> {
    if points_per_family < 2 {
        return Err(Error::OutOfRange {
            name: "points_per_family",
            value: points_per_family as f64,
            range: ">= 2",
        });
    }
    let mut out = Vec::with_capacity(2 * points_per_family);
    for tag in [FamilyTag::I, FamilyTag::II] {
        let (lo, hi) = tag.range();
        for k in 0..points_per_family {
            let p = if k + 1 == points_per_family {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (points_per_family - 1) as f64
            };
            let rho = mems_state(tag, p)?;
            out.push(CurvePoint {
                family: tag,
                p,
                linear_entropy: linear_entropy(&rho)?,
                concurrence: concurrence(&rho)?,
            });
        }
    }
    Ok(out)
}
