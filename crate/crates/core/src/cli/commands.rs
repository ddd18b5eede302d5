use std::path::Path;

use serde_json::{json, Value};

use super::io::{complex_list_json, matrix_json, num, vector_json, write_json, Csv};
use super::RunConfig;
use crate::asymptotics::{
    buffer_probe_stable_schur, buffer_probe_vanishing, build_scaling, g_rank_check,
    g_rank_matches_hautus, phi_exact_oracle, verify_scaled_limit, JordanImaginarySystem,
    ProbeTable,
};
use crate::energy::{
    default_steps, default_witness_grid, endpoint_error, finite_horizon_control,
    infinite_horizon_solve_with, r_transform, refine_energy, simulate, AdmissibilityThresholds,
    ControlLaw, InfiniteHorizonOutcome, RTransform, Trajectory,
};
use crate::error::{Error, Result};
use crate::gramian::{gramian_cross_validated, GramianMethod};
use crate::limitk::{classify, gramian_limit_table, limit_k, membership_v_a, verify_theta};
use crate::linalg::{format_ratio, CVec, Field, RationalMatrix};
use crate::model::{controllability_report, is_controllable, spectral_partition, LtiSystem};
use crate::selftest::{run_all, SelftestOptions};

/// What a command produced: a JSON report, extra files, and its exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: &'static str,
    pub report: Value,
    pub files: Vec<(String, OutputFile)>,
    pub text: Option<String>,
    pub exit_code: i32,
}

#[derive(Debug, Clone)]
pub enum OutputFile {
    Json(Value),
    Csv(Csv),
}

impl Outcome {
    fn new(name: &'static str, report: Value) -> Self {
        Outcome {
            name,
            report,
            files: Vec::new(),
            text: None,
            exit_code: 0,
        }
    }

    fn csv(&mut self, file: &str, table: Csv) {
        self.files.push((file.to_string(), OutputFile::Csv(table)));
    }

    fn json(&mut self, file: &str, value: Value) {
        self.files.push((file.to_string(), OutputFile::Json(value)));
    }

    /// Writes `<name>.json` and every extra file into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join(format!("{}.json", self.name)), &self.report)?;
        for (file, content) in &self.files {
            let path = dir.join(file);
            match content {
                OutputFile::Json(v) => write_json(&path, v)?,
                OutputFile::Csv(t) => t.write(&path)?,
            }
        }
        Ok(())
    }

    pub fn stdout(&self) -> String {
        self.text
            .clone()
            .unwrap_or_else(|| serde_json::to_string_pretty(&self.report).expect("serializable"))
    }
}

fn system_json(sys: &LtiSystem) -> Value {
    json!({
        "n": sys.n(),
        "m": sys.m(),
        "field": sys.field,
        "form": sys.form,
    })
}

pub fn cmd_classify(config: &RunConfig) -> Result<Outcome> {
    let sys = config.system()?;
    let ctrl = controllability_report(&sys)?;
    let verdict = classify(&sys)?;
    let membership = match &config.x0 {
        Some(x0) if verdict.per_x0 => {
            let summary = limit_k(&sys)?;
            let m = membership_v_a(&summary, x0, config.tolerances.tau_mem)?;
            json!({
                "member": m.member,
                "residual": m.residual,
                "tolerance": m.tolerance,
                "optimal_cost": summary.cost(x0),
            })
        }
        Some(_) => json!({ "member": null, "note": "pair is not stabilizable" }),
        None => Value::Null,
    };
    let report = json!({
        "command": "classify",
        "system": system_json(&sys),
        "eigenvalues": complex_list_json(&sys.eigenvalues()?),
        "controllable": ctrl.kalman && ctrl.hautus,
        "controllability": {
            "kalman": ctrl.kalman,
            "hautus": ctrl.hautus,
            "kalman_rank": ctrl.kalman_rank,
            "margin": ctrl.margin,
        },
        "stabilizable": verdict.per_x0,
        "global_solvable": verdict.global_solvable,
        "reason": verdict.reason,
        "n_u": verdict.n_u,
        "n_o": verdict.n_o,
        "n_a": verdict.n_a,
        "offending_eigenvalues": verdict.offending,
        "membership_v_a": membership,
    });
    Ok(Outcome::new("classify", report))
}

pub fn cmd_limit(config: &RunConfig) -> Result<Outcome> {
    let sys = config.system()?;
    if !is_controllable(&sys, crate::linalg::RANK_RTOL) {
        return Err(Error::NotControllable);
    }
    let grid = config.grid_or("1:50:50:lin");
    let summary = limit_k(&sys)?;
    let table = gramian_limit_table(&summary, &grid)?;
    let theta = verify_theta(&sys, &summary)?;

    let mut header = vec!["T", "inverse_error"];
    let mut xval = Vec::new();
    if config.cross_validate {
        header.push("method_gap");
        for &t in &grid {
            let s = gramian_cross_validated(&sys, t, GramianMethod::AugmentedExpm)?;
            xval.push(s.est_error.unwrap_or(0.0));
        }
    }
    let mut csv = Csv::new(header);
    for (k, (t, e)) in table.iter().enumerate() {
        let mut row = vec![num(*t), num(*e)];
        if config.cross_validate {
            row.push(num(xval[k]));
        }
        csv.row(row);
    }
    let worst_gap = xval.iter().copied().fold(0.0, f64::max);
    let decreasing = table.windows(2).all(|w| w[1].1 <= w[0].1);
    let report = json!({
        "command": "limit",
        "system": system_json(&sys),
        "K": matrix_json(&summary.k),
        "riccati_residual": summary.riccati_residual,
        "riccati_bound": summary.riccati_bound,
        "riccati_ok": summary.riccati_residual <= summary.riccati_bound,
        "theta": {
            "ok": theta.ok,
            "mismatch": theta.mismatch,
            "tolerance": theta.tolerance,
            "closed_loop_spectrum": complex_list_json(&summary.theta_spectrum),
        },
        "partition": {
            "n_u": summary.partition.n_u,
            "n_o": summary.partition.n_o,
            "n_a": summary.partition.n_a,
        },
        "curve": {
            "points": table.len(),
            "first": table.first(),
            "last": table.last(),
            "nonincreasing": decreasing,
        },
        "cross_validation": config.cross_validate.then(|| json!({
            "max_relative_gap": worst_gap,
            "tolerance": config.tolerances.xval_rtol,
            "ok": worst_gap <= config.tolerances.xval_rtol,
        })),
    });
    let mut out = Outcome::new("limit", report);
    out.csv("limit.csv", csv);
    Ok(out)
}

/// Trajectory table; complex systems get `_re` / `_im` column pairs.
/// `to_input` maps the simulated input back to the caller's input.
fn trajectory_csv(traj: &Trajectory, field: Field, to_input: &dyn Fn(&CVec) -> CVec) -> Csv {
    let n = traj.x[0].len();
    let us: Vec<CVec> = traj.u.iter().map(to_input).collect();
    let m = us[0].len();
    let names = |prefix: &str, k: usize| -> Vec<String> {
        (1..=k)
            .flat_map(|i| match field {
                Field::Real => vec![format!("{prefix}_{i}")],
                Field::Complex => vec![format!("{prefix}_{i}_re"), format!("{prefix}_{i}_im")],
            })
            .collect()
    };
    let mut header = vec!["t".to_string()];
    header.extend(names("x", n));
    header.extend(names("u", m));
    header.push("cumulative_energy".into());
    let mut csv = Csv::new(header);
    let cells = |v: &CVec| -> Vec<String> {
        v.iter()
            .flat_map(|z| match field {
                Field::Real => vec![num(z.re)],
                Field::Complex => vec![num(z.re), num(z.im)],
            })
            .collect()
    };
    for k in 0..traj.t.len() {
        let mut row = vec![num(traj.t[k])];
        row.extend(cells(&traj.x[k]));
        row.extend(cells(&us[k]));
        row.push(num(traj.cumulative[k]));
        csv.row(row);
    }
    csv
}

fn horizon_label(t: f64) -> String {
    let s = num(t);
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

pub fn cmd_solve(config: &RunConfig) -> Result<Outcome> {
    let sys = config.system()?;
    let x0 = config
        .x0
        .clone()
        .ok_or_else(|| Error::Input("solve requires --x0".into()))?;
    if x0.len() != sys.n() {
        return Err(Error::Input(format!(
            "--x0 has length {}, the system has {} states",
            x0.len(),
            sys.n()
        )));
    }
    let transform: Option<RTransform> = config
        .weight
        .as_ref()
        .map(|r| r_transform(&sys, r))
        .transpose()?;
    let work = transform.as_ref().map_or(&sys, |t| &t.system);
    let to_input = |v: &CVec| -> CVec {
        match &transform {
            Some(t) => t.v_to_u(v),
            None => v.clone(),
        }
    };
    let weight_json = config.weight.as_ref().map(matrix_json);

    match (config.horizon, &config.x1) {
        (None, Some(_)) => Err(Error::Input("--x1 requires --T".into())),
        (Some(t), x1) => {
            let x1 = x1.clone().unwrap_or_else(|| CVec::zeros(sys.n()));
            if x1.len() != sys.n() {
                return Err(Error::Input(format!(
                    "--x1 has length {}, the system has {} states",
                    x1.len(),
                    sys.n()
                )));
            }
            let law = finite_horizon_control(work, &x0, &x1, t)?;
            let steps = default_steps(&[&work.a], t, 20_000)?;
            let traj = refine_energy(|k| simulate(work, &law, &x0, t, k), steps, 1e-10, 1 << 17)?;
            let (predicted, condition, lambda) = match &law {
                ControlLaw::OpenLoop {
                    predicted_cost,
                    gramian_condition,
                    lambda,
                    ..
                } => (*predicted_cost, *gramian_condition, lambda.clone()),
                ControlLaw::Feedback { .. } => unreachable!(),
            };
            let gap = (traj.energy - predicted).abs() / predicted.abs().max(f64::MIN_POSITIVE);
            let end = endpoint_error(&traj, t, &x1);
            let tol = &config.tolerances;
            let mut sweep = Vec::new();
            if let Some(g) = &config.tgrid {
                for s in g.points() {
                    if let ControlLaw::OpenLoop { predicted_cost, .. } =
                        finite_horizon_control(work, &x0, &x1, s)?
                    {
                        sweep.push((s, predicted_cost));
                    }
                }
            }
            let report = json!({
                "command": "solve",
                "mode": "finite_horizon",
                "system": system_json(&sys),
                "horizon": t,
                "x0": vector_json(&x0),
                "x1": vector_json(&x1),
                "R": weight_json,
                "lambda": vector_json(&lambda),
                "predicted_cost": predicted,
                "simulated_energy": traj.energy,
                "relative_cost_gap": gap,
                "cost_ok": gap <= tol.cost_rtol,
                "endpoint_error": end,
                "endpoint_ok": end <= tol.endpoint_rtol,
                "gramian_condition": condition,
                "grid_points": traj.t.len(),
            });
            let mut out = Outcome::new("solve", report);
            out.csv(
                &format!("trajectory_T{}.csv", horizon_label(t)),
                trajectory_csv(&traj, sys.field, &to_input),
            );
            if !sweep.is_empty() {
                let mut csv = Csv::new(["T", "cost", "input_norm"]);
                for (s, cost) in sweep {
                    csv.row([num(s), num(cost), num(cost.max(0.0).sqrt())]);
                }
                out.csv("cost_vs_T.csv", csv);
            }
            Ok(out)
        }
        (None, None) => {
            let grid = config
                .tgrid
                .map(|g| g.points())
                .unwrap_or_else(default_witness_grid);
            let thresholds = AdmissibilityThresholds {
                delta_adm: config.tolerances.delta_adm,
                eps_tail: config.tolerances.eps_tail,
            };
            let outcome = infinite_horizon_solve_with(
                work,
                &x0,
                &grid,
                config.tolerances.tau_mem,
                &thresholds,
            )?;
            match outcome {
                InfiniteHorizonOutcome::Solution(s) => {
                    let gap = (s.energy - s.optimal_cost).abs() / (1.0 + s.optimal_cost.abs());
                    let gain = match &s.law {
                        ControlLaw::Feedback { gain, .. } => gain.clone(),
                        ControlLaw::OpenLoop { .. } => unreachable!(),
                    };
                    let gain = match &transform {
                        Some(t) => &t.r_inv_half * gain,
                        None => gain,
                    };
                    let report = json!({
                        "command": "solve",
                        "mode": "infinite_horizon",
                        "verdict": "solution",
                        "system": system_json(&sys),
                        "x0": vector_json(&x0),
                        "R": weight_json,
                        "energy": s.energy,
                        "optimal_cost": s.optimal_cost,
                        "relative_gap": gap,
                        "gain": matrix_json(&gain),
                        "admissibility": s.admissibility,
                        "membership_v_a": s.membership,
                        "simulation_horizon": s.trajectory.t.last(),
                        "grid_points": s.trajectory.t.len(),
                    });
                    let mut out = Outcome::new("solve", report);
                    out.csv(
                        "trajectory.csv",
                        trajectory_csv(&s.trajectory, sys.field, &to_input),
                    );
                    Ok(out)
                }
                InfiniteHorizonOutcome::NoSolution(ns) => {
                    let decreasing = ns.witness.windows(2).all(|w| w[1].1 <= w[0].1);
                    let mut csv = Csv::new(["T", "cost"]);
                    for (t, v) in &ns.witness {
                        csv.row([num(*t), num(*v)]);
                    }
                    let report = json!({
                        "command": "solve",
                        "mode": "infinite_horizon",
                        "verdict": "no_solution",
                        "system": system_json(&sys),
                        "x0": vector_json(&x0),
                        "R": weight_json,
                        "infimum": ns.infimum,
                        "membership_v_a": ns.membership,
                        "witness": ns.witness.iter().map(|(t, v)| json!({"T": t, "cost": v})).collect::<Vec<_>>(),
                        "witness_decreasing": decreasing,
                        "final_witness_cost": ns.witness.last().map(|w| w.1),
                        "final_witness_excess": ns.witness.last().map(|w| w.1 - ns.infimum),
                    });
                    let mut out = Outcome::new("solve", report);
                    out.csv("witness.csv", csv);
                    Ok(out)
                }
            }
        }
    }
}

fn rational_json(m: &RationalMatrix) -> Value {
    json!(m.to_strings())
}

fn probe_rows(csv: &mut Csv, name: &str, rows: &[(f64, f64)]) {
    for (t, v) in rows {
        csv.row([num(*t), name.to_string(), num(*v)]);
    }
}

fn probe_summary(p: &ProbeTable) -> Value {
    match &p.rows {
        Some(rows) => json!({
            "name": p.name,
            "quantity": p.quantity,
            "applicable": true,
            "final": rows.last(),
        }),
        None => json!({ "name": p.name, "quantity": p.quantity, "applicable": false }),
    }
}

pub fn cmd_asymptotics(config: &RunConfig) -> Result<Outcome> {
    let sys = config.system()?;
    let grid = config.grid_or("1:1024:11:geo");
    let mut out = Outcome::new("asymptotics", Value::Null);
    let mut probes = Csv::new(["T", "quantity_name", "norm_value"]);

    let scaled = match JordanImaginarySystem::from_system(&sys) {
        Ok(jsys) => {
            let scaling = build_scaling(&jsys)?;
            let table = verify_scaled_limit(&jsys, &grid)?;
            probe_rows(&mut probes, "scaled_gramian_error", &table.rows);
            let oracle = match phi_exact_oracle(&jsys) {
                Ok(o) => json!({
                    "exact_match": true,
                    "group_positive_definite": o.group_positive_definite,
                }),
                Err(Error::NonRational(msg)) => json!({ "exact_match": null, "note": msg }),
                Err(e) => return Err(e),
            };
            let mut sidecar = json!({
                "sizes": scaling.sizes,
                "eigenvalues": complex_list_json(&scaling.eigenvalues),
                "Delta": rational_json(&scaling.delta),
                "Psi": rational_json(&scaling.psi),
                "Pi": rational_json(&scaling.pi),
                "groups": scaling.groups,
            });
            match &scaling.exact {
                Some(ex) => {
                    sidecar["Gamma"] = rational_json(&ex.gamma);
                    sidecar["Phi"] = rational_json(&ex.phi);
                    sidecar["S"] = rational_json(&ex.s);
                    sidecar["group_determinants"] = json!(ex
                        .group_determinants
                        .iter()
                        .map(format_ratio)
                        .collect::<Vec<_>>());
                }
                None => {
                    sidecar["Gamma"] = matrix_json(&scaling.gamma);
                    sidecar["Phi"] = matrix_json(&scaling.phi);
                    sidecar["S"] = matrix_json(&scaling.s);
                }
            }
            out.json("constants.json", sidecar);
            json!({
                "applicable": true,
                "exact": scaling.exact.is_some(),
                "final": table.rows.last(),
                "loglog_slope": table.slope,
                "g_rank_full": g_rank_check(&jsys),
                "g_rank_matches_hautus": g_rank_matches_hautus(&jsys)?,
                "phi_oracle": oracle,
            })
        }
        Err(e) => json!({ "applicable": false, "reason": e.to_string() }),
    };

    let part = spectral_partition(&sys)?;
    let mut tables = Vec::new();
    if part.n_a > 0 {
        tables.push(buffer_probe_stable_schur(&part, &grid)?);
    }
    tables.extend(buffer_probe_vanishing(&part, &grid)?);
    for t in &tables {
        if let Some(rows) = &t.rows {
            probe_rows(&mut probes, t.name, rows);
        }
    }
    out.report = json!({
        "command": "asymptotics",
        "system": system_json(&sys),
        "grid": grid,
        "partition": { "n_u": part.n_u, "n_o": part.n_o, "n_a": part.n_a },
        "scaled_limit": scaled,
        "buffer_probes": tables.iter().map(probe_summary).collect::<Vec<_>>(),
    });
    out.csv("probes.csv", probes);
    Ok(out)
}

pub fn cmd_selftest(config: &RunConfig) -> Result<Outcome> {
    let opts = SelftestOptions {
        seed: config.seed,
        corrupt: config.corrupt_fixture,
    };
    let reports = run_all(&opts);
    let passed = reports.iter().all(|r| r.passed);
    let mut text: Vec<String> = reports.iter().map(|r| r.to_string()).collect();
    let failed: Vec<u8> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    text.push(if passed {
        format!("selftest passed (seed {})", config.seed)
    } else {
        format!(
            "selftest FAILED (seed {}): criteria {failed:?}",
            config.seed
        )
    });
    let report = json!({
        "command": "selftest",
        "seed": config.seed,
        "passed": passed,
        "failed": failed,
        "criteria": reports,
    });
    let mut out = Outcome::new("selftest", report);
    out.text = Some(text.join("\n"));
    out.exit_code = if passed { 0 } else { 1 };
    Ok(out)
}
