//! Command front end: validated run configurations, trajectory and suite
//! drivers, and machine-readable reports (JSON states, CSV summaries).
//!
//! Exit-code contract of the binary: `2` for configuration errors, `3` for
//! mid-run degeneracies; reports are UTF-8 with LF line endings and exact
//! rationals serialized as `p/q` strings.

use crate::algebra::{Backend, CentralScalar};
use crate::biortho::{self, Flow};
use crate::leapfrog::{self, Mode};
use crate::ncnet;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {field}: {message}")]
    Config { field: String, message: String },
    #[error("degeneracy at step {step}: {message}")]
    Degenerate { step: usize, message: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Degenerate { .. } => 3,
            CliError::Io { .. } => 3,
        }
    }

    fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Validated run configuration shared by the subcommands.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub backend: Backend,
    pub d: usize,
    pub n: usize,
    pub mode: Mode,
    pub w: usize,
    pub seed: u64,
    pub steps: usize,
    pub n_max: usize,
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn validate_for_simulate(&self) -> Result<(), CliError> {
        if self.d == 0 || self.d > 8 {
            return Err(CliError::config("d", "dimension must be in 1..=8"));
        }
        if self.backend == Backend::Scalar && self.d != 1 {
            return Err(CliError::config("d", "scalar backend requires d = 1"));
        }
        match self.mode {
            Mode::Periodic => {
                if self.n < 3 {
                    return Err(CliError::config(
                        "N",
                        "periodic mode needs N >= 3 (the map uses i-1, i, i+1 as distinct sites)",
                    ));
                }
            }
            Mode::Windowed => {
                if self.n < 2 {
                    return Err(CliError::config(
                        "N",
                        "windowed mode needs N >= 2 (the map uses i-1, i, i+1 as distinct sites)",
                    ));
                }
                let len = self.n + 2 * self.w;
                if len < 2 * self.steps + 3 {
                    return Err(CliError::config(
                        "steps",
                        format!(
                            "window of {len} sites supports at most {} steps",
                            len.saturating_sub(3) / 2
                        ),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::Io {
            path: parent.display().to_string(),
            source: e,
        })?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn json_to_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn fmt_norm(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.17e}")
    }
}

/// Run a leapfrog trajectory, writing one JSON state per step and a CSV of
/// residual norms per identity per step.
pub fn cmd_simulate(config: &RunConfig) -> Result<PathBuf, CliError> {
    config.validate_for_simulate()?;
    let state0 = match config.mode {
        Mode::Periodic => {
            leapfrog::random_periodic_state(config.seed, config.backend, config.d, config.n)
        }
        Mode::Windowed => leapfrog::random_windowed_state(
            config.seed,
            config.backend,
            config.d,
            config.n,
            config.w,
        ),
    }
    .map_err(|e| CliError::Degenerate {
        step: 0,
        message: e.to_string(),
    })?;

    let mut csv = String::from("step,eq_k,lax_first_at_1,lax_second,pq_route,ab_route\n");
    let mut state = state0;
    write_file(
        &config.out_dir.join("state_0000.json"),
        &json_to_string(&state.to_json(0)),
    )?;
    for step in 0..config.steps {
        let fail = |e: leapfrog::LeapfrogError| CliError::Degenerate {
            step: step + 1,
            message: e.to_string(),
        };
        let pq = leapfrog::pq_from_vertices(&state).map_err(fail)?;
        let next = leapfrog::step_vertices(&state).map_err(fail)?;
        let eq_k = leapfrog::eq_k_residuals(&state, &next)
            .map_err(fail)?
            .iter()
            .map(|(_, r)| r.max_abs_f64())
            .fold(0.0, f64::max);
        let (lax1, lax2) =
            leapfrog::lax_residual(&pq, &state, &CentralScalar::from_int(1)).map_err(fail)?;
        let lax1_max = lax1.iter().map(|r| r.max_abs_f64()).fold(0.0, f64::max);
        let lax2_max = lax2.iter().map(|r| r.max_abs_f64()).fold(0.0, f64::max);
        let pq_route = {
            let mapped = leapfrog::step_pq(&pq).map_err(fail)?;
            let direct = leapfrog::pq_from_vertices(&next).map_err(fail)?;
            let mut worst: f64 = 0.0;
            let (lo, hi) = direct.p.range();
            for i in lo..=hi {
                worst = worst.max((mapped.p.get(i) - direct.p.get(i)).max_abs_f64());
            }
            let (lo, hi) = direct.q.range();
            for i in lo..=hi {
                worst = worst.max((mapped.q.get(i) - direct.q.get(i)).max_abs_f64());
            }
            worst
        };
        let ab_route = if state.mode() == Mode::Windowed {
            let ex = leapfrog::ab_from_vertices(&state).map_err(fail)?;
            let mapped = leapfrog::step_ab(&ex.coords).map_err(fail)?;
            let (av, avm) = leapfrog::transported_anchor(&state, &ex).map_err(fail)?;
            let ex2 = leapfrog::ab_from_vertices_anchored(&next, &av, &avm).map_err(fail)?;
            let mut worst: f64 = 0.0;
            let (lo, hi) = ex2.coords.a.range();
            for i in lo..=hi {
                worst = worst.max((mapped.a.get(i) - ex2.coords.a.get(i)).max_abs_f64());
                worst = worst.max((mapped.b.get(i) - ex2.coords.b.get(i)).max_abs_f64());
            }
            fmt_norm(worst)
        } else {
            String::new()
        };
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            step + 1,
            fmt_norm(eq_k),
            fmt_norm(lax1_max),
            fmt_norm(lax2_max),
            fmt_norm(pq_route),
            ab_route
        );
        state = next;
        write_file(
            &config.out_dir.join(format!("state_{:04}.json", step + 1)),
            &json_to_string(&state.to_json(step as u64 + 1)),
        )?;
    }
    write_file(&config.out_dir.join("residuals.csv"), &csv)?;
    Ok(config.out_dir.clone())
}

/// Run the network conservation check, writing a drift CSV
/// `(step, i, j, value, drift)` with exact rational entries.
pub fn cmd_invariants(config: &RunConfig) -> Result<PathBuf, CliError> {
    if config.backend == Backend::Float {
        return Err(CliError::config(
            "backend",
            "invariants require an exact backend (rational or scalar)",
        ));
    }
    if config.n == 0 {
        return Err(CliError::config("N", "need at least one square"));
    }
    let net = ncnet::NumericNetwork::random(config.seed, config.backend, config.d, config.n);
    let weights = net.xy_weights().map_err(|e| CliError::Degenerate {
        step: 0,
        message: e.to_string(),
    })?;
    let i_max = 2 * config.n;
    let reference = ncnet::t_invariants(&weights, i_max).map_err(|e| CliError::Degenerate {
        step: 0,
        message: e.to_string(),
    })?;
    let mut csv = String::from("step,i,j,value,drift\n");
    for ((i, j), v) in &reference {
        let _ = writeln!(csv, "0,{i},{j},{v},0");
    }
    let mut cur = weights;
    for step in 1..=config.steps {
        cur = ncnet::step_xy(&cur).map_err(|e| CliError::Degenerate {
            step,
            message: e.to_string(),
        })?;
        let t = ncnet::t_invariants(&cur, i_max).map_err(|e| CliError::Degenerate {
            step,
            message: e.to_string(),
        })?;
        for ((i, j), v) in &t {
            let drift = v - reference
                .get(&(*i, *j))
                .cloned()
                .unwrap_or_else(num_traits::Zero::zero);
            let _ = writeln!(csv, "{step},{i},{j},{v},{drift}");
        }
    }
    let path = config.out_dir.join("invariants.csv");
    write_file(&path, &csv)?;
    Ok(path)
}

/// Run the bi-orthogonality and spectral-transformation suites; on the float
/// backend additionally the two semi-discrete flows.
pub fn cmd_biortho(config: &RunConfig) -> Result<PathBuf, CliError> {
    let n_max = config.n_max.clamp(1, 5);
    let mut report = json!({
        "backend": config.backend.to_string(),
        "d": config.d,
        "seed": config.seed,
        "n_max": n_max,
    });
    if config.backend == Backend::Float {
        let terms = biortho::random_flow_terms(config.seed, config.d, n_max + 2);
        let mut flows = Vec::new();
        for flow in [Flow::Negative, Flow::Positive] {
            let mut reports = Vec::new();
            let mut h = 1e-2;
            while h > 1.1e-3 {
                let r = match flow {
                    Flow::Negative => {
                        biortho::negative_flow_residual(&terms, 0.2, n_max.min(3), h)
                    }
                    Flow::Positive => {
                        biortho::positive_flow_residual(&terms, 0.2, n_max.min(3), h)
                    }
                }
                .map_err(|e| CliError::Degenerate {
                    step: 0,
                    message: e.to_string(),
                })?;
                reports.push(r);
                h /= 2.0;
            }
            let slope = |pick: fn(&biortho::FlowResidualReport) -> f64| {
                biortho::convergence_slope(&reports, pick)
            };
            flows.push(json!({
                "flow": match flow { Flow::Negative => "negative", Flow::Positive => "positive" },
                "residuals": reports,
                "slopes": {
                    "moment": slope(|r| r.moment),
                    "tw": slope(|r| r.tw),
                    "psi_ode": slope(|r| r.psi_ode),
                    "xi_ode": slope(|r| r.xi_ode),
                },
            }));
        }
        report["flows"] = json!(flows);
    } else {
        let window = biortho::MomentWindow::random(config.seed, config.backend, config.d, -14, 14);
        let run = || -> Result<Value, biortho::BiorthoError> {
            let sys_m1 = biortho::build_family(&window, -1, n_max)?;
            let sys_0 = biortho::build_family(&window, 0, n_max)?;
            let sys_1 = biortho::build_family(&window, 1, n_max)?;
            let mut ortho: f64 = 0.0;
            for n in 0..=n_max {
                for m in 0..=n_max {
                    let v = biortho::pair_with_star(&sys_0.p[n], &sys_0.q_star[m], 0, &window)?;
                    let want = if n == m {
                        sys_0.h[n].clone()
                    } else {
                        v.zero_like()
                    };
                    ortho = ortho.max((&v - &want).max_abs_f64());
                }
            }
            let max_poly = |rs: &[biortho::LaurentPoly]| {
                rs.iter().map(|p| p.max_abs_f64()).fold(0.0, f64::max)
            };
            let ct = max_poly(&biortho::christoffel_residual(&sys_0, &sys_1));
            let gt = max_poly(&biortho::geronimus_residual(&sys_m1, &sys_0));
            let rrr = max_poly(&biortho::recurrence_residual(&sys_0));
            let toda = biortho::discrete_toda_residual(&window, 0, n_max.saturating_sub(1))?
                .iter()
                .map(|(a, b)| a.max_abs_f64().max(b.max_abs_f64()))
                .fold(0.0, f64::max);
            let corr = biortho::leapfrog_correspondence(&window, 0, n_max.saturating_sub(2))?
                .iter()
                .map(|(a, b)| a.max_abs_f64().max(b.max_abs_f64()))
                .fold(0.0, f64::max);
            Ok(json!({
                "orthogonality": fmt_norm(ortho),
                "christoffel": fmt_norm(ct),
                "geronimus": fmt_norm(gt),
                "recurrence": fmt_norm(rrr),
                "toda": fmt_norm(toda),
                "correspondence": fmt_norm(corr),
            }))
        };
        let residuals = run().map_err(|e| CliError::Degenerate {
            step: 0,
            message: e.to_string(),
        })?;
        report["residuals"] = residuals;
    }
    let path = config.out_dir.join("biortho.json");
    write_file(&path, &json_to_string(&report))?;
    Ok(path)
}

/// Run the symbolic bracket relation suite (N <= 4) and write the relation
/// report.
pub fn cmd_brackets(config: &RunConfig) -> Result<PathBuf, CliError> {
    if config.n == 0 || config.n > 4 {
        return Err(CliError::config(
            "N",
            "the symbolic suite supports N in 1..=4 (expression growth)",
        ));
    }
    let report = ncnet::bracket_relation_suite(config.n, config.seed).map_err(|e| {
        CliError::Degenerate {
            step: 0,
            message: e.to_string(),
        }
    })?;
    let path = config.out_dir.join("brackets.json");
    write_file(&path, &json_to_string(&report.to_json()))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dir: &Path) -> RunConfig {
        RunConfig {
            backend: Backend::Rational,
            d: 2,
            n: 5,
            mode: Mode::Windowed,
            w: 3,
            seed: 7,
            steps: 3,
            n_max: 3,
            out_dir: dir.to_path_buf(),
        }
    }

    #[test]
    fn simulate_rejects_n1() {
        let dir = std::env::temp_dir().join("ncleap-test-n1");
        let mut c = cfg(&dir);
        c.n = 1;
        c.w = 0;
        c.mode = Mode::Periodic;
        let err = cmd_simulate(&c).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn brackets_rejects_n5() {
        let dir = std::env::temp_dir().join("ncleap-test-n5");
        let mut c = cfg(&dir);
        c.n = 5;
        let err = cmd_brackets(&c).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
