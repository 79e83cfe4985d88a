use crate::report::{emit, RunReport, EXIT_INVALID_INPUT};
use crate::Common;
use mems_core::channels::{mems1_map, FamilyTag, KrausMap};
use mems_core::exec::Execution;
use mems_core::frontier::{mems_curve, sample_frontier};
use mems_core::linalg::{CMatrix, C64};
use mems_core::mems::{locality_defect, mems_state, singlet, MemsReport};
use mems_core::numfmt::{fmt_g17, G17};
use mems_core::optics::{alpha_for_p, detected_state, propagate, Attenuation, CompositeState};
use mems_core::qed::{
    p_of_t, qed_mems_defect, reduced_matrices, run_pipeline, truncated_states, Transmissivity,
};
use mems_core::verify::{run_verify, Check, VerifyConfig};
use serde_json::{json, Value};

type Outcome = Result<(Value, Vec<Check>), String>;

/// Run `body`, wrap its result in a report and write it out.
fn run_json(command: &str, inputs: Value, common: &Common, body: impl FnOnce() -> Outcome) -> i32 {
    let report = match body() {
        Ok((outputs, checks)) => RunReport::finished(command, inputs, outputs, checks),
        Err(message) => {
            eprintln!("mems {command}: {message}");
            RunReport::invalid(command, inputs, message)
        }
    };
    match emit(&report.to_json(), common.out.as_deref()) {
        Ok(()) => report.exit_code,
        Err(e) => {
            eprintln!("mems {command}: cannot write output: {e}");
            EXIT_INVALID_INPUT
        }
    }
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

pub fn gen(family: FamilyTag, p: f64, common: &Common) -> i32 {
    let inputs = json!({ "family": family, "p": G17(p) });
    run_json("gen", inputs, common, || {
        let state = mems_state(family, p).map_err(err)?;
        let from_map = family
            .kraus_map(p)
            .and_then(|m| m.lift_first_qubit())
            .and_then(|m| m.apply(&singlet()))
            .map_err(err)?;
        let report = MemsReport::analyze(&state, &from_map).map_err(err)?;
        let checks = vec![
            Check::new("kraus_on_singlet_matches", state.distance(&from_map)),
            Check::new("unit_trace", (state.trace() - 1.0).abs()),
        ];
        Ok((json!({ "state": state, "report": report }), checks))
    })
}

fn builtin_map(spec: &str) -> Result<KrausMap, String> {
    let (name, p) = spec
        .split_once(':')
        .ok_or_else(|| format!("builtin '{spec}' must look like mems1:<p> or mems2:<p>"))?;
    let p: f64 = p
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse p in '{spec}'"))?;
    let tag = match name {
        "mems1" => FamilyTag::I,
        "mems2" => FamilyTag::II,
        other => return Err(format!("unknown builtin map '{other}'")),
    };
    tag.kraus_map(p).map_err(err)
}

pub fn audit(builtin: Option<String>, map: Option<std::path::PathBuf>, common: &Common) -> i32 {
    let inputs = json!({
        "builtin": builtin,
        "map": map.as_ref().map(|p| p.display().to_string()),
    });
    run_json("audit", inputs, common, || {
        let kraus = match (&builtin, &map) {
            (Some(spec), _) => builtin_map(spec)?,
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("{}: {e}", path.display()))?;
                serde_json::from_str::<KrausMap>(&text)
                    .map_err(|e| format!("{}: {e}", path.display()))?
            }
            (None, None) => return Err("one of --builtin or --map is required".into()),
        };
        let audit = kraus.audit().map_err(err)?;
        let outputs = json!({
            "label": kraus.label(),
            "dim": kraus.dim(),
            "kraus_sum": kraus.kraus_sum(),
            "kraus_transpose_sum": kraus.kraus_transpose_sum(),
            "audit": audit,
            "trace_preserving": audit.is_trace_preserving(),
            "unital": audit.is_unital(),
            "completely_positive": audit.is_cp,
        });
        // The audit reports; it does not judge.
        Ok((outputs, Vec::new()))
    })
}

pub fn verify(
    p_grid: Vec<f64>,
    trials: usize,
    seed: u64,
    sequential: bool,
    common: &Common,
) -> i32 {
    let inputs = json!({
        "p_grid": p_grid.iter().map(|&p| G17(p)).collect::<Vec<_>>(),
        "trials": trials,
        "seed": seed,
    });
    run_json("verify", inputs, common, || {
        let cfg = VerifyConfig::new(p_grid.clone(), trials, seed).map_err(err)?;
        let report = run_verify(&cfg, execution(sequential)).map_err(err)?;
        let outputs = json!({
            "threshold": G17(mems_core::verify::VERIFY_THRESHOLD),
            "max_defect": G17(report.max_defect),
            "notes": report.notes,
        });
        Ok((outputs, report.checks))
    })
}

pub fn frontier(
    samples: usize,
    seed: u64,
    curve_points: usize,
    sequential: bool,
    common: &Common,
) -> i32 {
    let result = (|| -> Result<String, String> {
        if samples < 1 {
            return Err("--samples must be at least 1".into());
        }
        let random = sample_frontier(samples, seed, execution(sequential)).map_err(err)?;
        let curve = mems_curve(curve_points).map_err(err)?;
        let mut csv = String::from("S_L,C,source\n");
        for s in &random {
            csv.push_str(&format!(
                "{},{},random\n",
                fmt_g17(s.linear_entropy),
                fmt_g17(s.concurrence)
            ));
        }
        for c in &curve {
            let source = match c.family {
                FamilyTag::I => "mems1",
                FamilyTag::II => "mems2",
            };
            csv.push_str(&format!(
                "{},{},{source}\n",
                fmt_g17(c.linear_entropy),
                fmt_g17(c.concurrence)
            ));
        }
        Ok(csv)
    })();
    match result {
        Ok(csv) => match emit(&csv, common.out.as_deref()) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("mems frontier: cannot write output: {e}");
                EXIT_INVALID_INPUT
            }
        },
        Err(message) => {
            eprintln!("mems frontier: {message}");
            EXIT_INVALID_INPUT
        }
    }
}

pub fn optics(alpha: Option<f64>, p: Option<f64>, phi_h: f64, phi_v: f64, common: &Common) -> i32 {
    let inputs = json!({
        "alpha": alpha.map(G17),
        "p": p.map(G17),
        "phi_h": G17(phi_h),
        "phi_v": G17(phi_v),
    });
    run_json("optics", inputs, common, || {
        let (att, p) = match (alpha, p) {
            (_, Some(p)) => (alpha_for_p(p).map_err(err)?, p),
            (Some(a), None) => {
                let att = Attenuation::new(a).map_err(err)?;
                // Inverse of α(p): p = 2 / (2 + e^{−2α}).
                (att, 2.0 / (2.0 + (-2.0 * a).exp()))
            }
            (None, None) => return Err("one of --alpha or --p is required".into()),
        };
        let norm = phi_h * phi_h + phi_v * phi_v;
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-10 {
            return Err(format!(
                "input polarization must be normalized, |phi_h|^2 + |phi_v|^2 = {}",
                fmt_g17(norm)
            ));
        }
        let input =
            CompositeState::on_path1(C64::new(phi_h, 0.0), C64::new(phi_v, 0.0)).map_err(err)?;
        let output = propagate(&input, att).map_err(err)?;
        let detected = detected_state(&output);
        let trace_closed = 0.5 * (1.0 + 2.0 * (1.0 - p) / p * phi_h * phi_h);
        let rho_in = mems_core::linalg::DensityMatrix::from_pure(&[
            C64::new(phi_h, 0.0),
            C64::new(phi_v, 0.0),
        ])
        .map_err(err)?;
        let kraus = mems1_map(p).and_then(|m| m.apply(&rho_in)).map_err(err)?;
        let equivalence =
            (&detected.matrix().scale_real(2.0 * p) - kraus.matrix()).frobenius_norm();
        let outputs = json!({
            "alpha": G17(att.alpha()),
            "p": G17(p),
            "input": input,
            "output": output,
            "detected": detected,
            "trace_detected": G17(detected.trace()),
            "trace_closed_form": G17(trace_closed),
            "kraus_output": kraus,
        });
        let checks = vec![
            Check::new(
                "trace_matches_closed_form",
                (detected.trace() - trace_closed).abs(),
            ),
            Check::new("two_p_detected_equals_kraus", equivalence),
        ];
        Ok((outputs, checks))
    })
}

pub fn qed(t: f64, common: &Common) -> i32 {
    let inputs = json!({ "T": G17(t) });
    run_json("qed", inputs, common, || {
        let tr = Transmissivity::new(t).map_err(err)?;
        let pipe = run_pipeline(tr);
        let ts = truncated_states(tr);
        let red = reduced_matrices(tr).map_err(err)?;
        let normalized = ts.rho12.normalized().map_err(err)?;
        let half = CMatrix::identity(2).scale_real(0.5);
        let norm_defect = [
            pipe.after_bs,
            pipe.after_rotator,
            pipe.after_pbs,
            pipe.output,
        ]
        .iter()
        .map(|s| (s.norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max);
        let checks = vec![
            Check::new("norm_conserved", norm_defect),
            Check::new(
                "normalized_rho12_is_mems1",
                qed_mems_defect(tr).map_err(err)?,
            ),
            Check::new(
                "locality_sum_trace_a",
                (&red.sum_trace_a() - &half).frobenius_norm(),
            ),
            Check::new(
                "locality_sum_trace_b",
                (&red.sum_trace_b() - &half).frobenius_norm(),
            ),
            Check::new(
                "full_output_locality",
                locality_defect(&singlet(), &ts.total).map_err(err)?,
            ),
        ];
        let outputs = json!({
            "transmissivity": tr,
            "p": G17(p_of_t(tr)),
            "stages": {
                "input": pipe.input,
                "after_bs": pipe.after_bs,
                "after_rotator": pipe.after_rotator,
                "after_pbs": pipe.after_pbs,
                "output": pipe.output,
            },
            "rho12": ts.rho12,
            "rho34": ts.rho34,
            "trace_rho12": G17(ts.rho12.trace()),
            "trace_rho34": G17(ts.rho34.trace()),
            "reduced": {
                "rho12_trace_a": red.rho12_trace_a,
                "rho12_trace_b": red.rho12_trace_b,
                "rho34_trace_a": red.rho34_trace_a,
                "rho34_trace_b": red.rho34_trace_b,
            },
            "normalized_rho12": normalized,
        });
        Ok((outputs, checks))
    })
}
