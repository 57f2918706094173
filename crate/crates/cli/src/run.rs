//! Pipeline execution: build the experiment from its config, run the
//! requested task, and emit report.json, grid.csv, and a console summary.

use std::path::{Path, PathBuf};

use semel::checkers::{self, VerifyOptions};
use semel::measure::{classify_polar, decompose, pos_neg_parts, tv_norm};
use semel::potential::{potential, tv_via_resolvent};
use semel::solver::{self, SolveOptions};
use semel::stochastic::{fk_estimate, lifetime_transform, McOptions};
use semel::{Domain64, GridFunction64, Measure64};

use crate::config::{ConfigError, ExperimentConfig, Task};
use crate::report::{
    DecomposeSection, GridTable, Report, SweepSection, TvSection,
};

/// Exit codes: 0 ok, 2 config error, 3 non-convergence, 4 checker
/// violation, 5 internal error.
#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    NonConvergence(String),
    CheckerViolation(String),
    Internal(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::NonConvergence(_) => 3,
            RunError::CheckerViolation(_) => 4,
            RunError::Internal(_) => 5,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::NonConvergence(m) => write!(f, "solver did not converge: {m}"),
            RunError::CheckerViolation(m) => write!(f, "checker violation: {m}"),
            RunError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

pub struct RunOutput {
    pub report_path: PathBuf,
    pub grid_path: PathBuf,
    pub summary: String,
}

struct Pipeline {
    cfg: ExperimentConfig,
    dom: Domain64,
    mu: Measure64,
    f: semel::Nonlinearity64,
}

impl Pipeline {
    fn solve_opts(&self) -> SolveOptions<f64> {
        SolveOptions {
            tol: self.cfg.options.tol,
            max_iter: self.cfg.options.max_iter,
            damping: self.cfg.options.damping,
        }
    }

    fn solve(&self) -> Result<(GridFunction64, semel::SolveReport<f64>), RunError> {
        let (u, rep) = solver::solve_semilinear(&self.dom, &self.f, &self.mu, self.solve_opts())
            .map_err(|e| RunError::Internal(e.to_string()))?;
        if !rep.converged {
            return Err(RunError::NonConvergence(format!(
                "residual {} after {} iterations",
                rep.final_residual, rep.iterations
            )));
        }
        Ok((u, rep))
    }
}

/// Execute `task` for the given config; writes `report.json` and `grid.csv`
/// under `out_dir` and returns the summary printed by the binary.
pub fn run(task: Task, cfg: ExperimentConfig, out_dir: &Path) -> Result<RunOutput, RunError> {
    if let Some(declared) = cfg.task {
        if declared != task {
            return Err(ConfigError::TaskMismatch {
                config: declared.name().into(),
                cli: task.name().into(),
            }
            .into());
        }
    }
    let dom = cfg.build_domain()?;
    let mu = cfg.build_measure(&dom)?;
    let f = cfg.build_nonlinearity()?;
    let violations = f.flag_violations(dom.points().iter().copied().step_by(16).collect::<Vec<_>>().as_slice());
    if !violations.is_empty() {
        log::warn!("declared nonlinearity flags look inconsistent: {violations:?}");
    }
    let p = Pipeline {
        cfg: cfg.clone(),
        dom,
        mu,
        f,
    };
    let mut report = Report::new(task.name(), cfg.clone());
    let mut table = GridTable::new(&p.dom);
    let mut summary = String::new();

    match task {
        Task::Solve => {
            let (u, rep) = p.solve()?;
            report.solve = Some((&rep).into());
            table.push("u", &u);
            table.push("R_mu", &potential(&p.dom, &p.mu));
            summary = format!(
                "solve: converged in {} iterations, residual {:.3e}, |f_u|_L1 {:.6}",
                rep.iterations, rep.final_residual, rep.f_u_l1
            );
        }
        Task::Verify => {
            let (u, rep) = p.solve()?;
            report.solve = Some((&rep).into());
            let vopts = VerifyOptions {
                k_list: cfg.options.k_list.clone(),
                exclusion_radius: cfg.options.exclusion_radius,
                battery_seed: cfg.options.seed ^ 0x5eed,
                solver_tol: cfg.options.tol,
            };
            let ver = checkers::verify_all(&p.dom, &u, &p.f, &p.mu, &vopts);
            report.verification = Some((&ver).into());
            table.push("u", &u);
            for &k in &vopts.k_list {
                table.push(format!("Tk_u_{k}"), &solver::truncate(&u, k));
            }
            table.push("R_mu", &potential(&p.dom, &p.mu));
            let (mu_d, _mu_c) = decompose(&p.dom, &p.mu)
                .map_err(|e| RunError::Internal(e.to_string()))?;
            for &k in &vopts.k_list {
                let corr =
                    checkers::reconstruct_correction(&p.dom, &u, &p.f, &mu_d, k, &[]);
                table.push(format!("R_nu_k_{k}"), &corr.potential);
            }
            summary = format!(
                "verify: resolvent {:.3e}, stampacchia {:.3e}, l1 {} , energy {}, positivity {:?}",
                ver.resolvent_residual,
                ver.stampacchia_max_residual,
                if ver.l1_estimate.holds { "ok" } else { "VIOLATED" },
                if ver.energy_estimates.iter().all(|e| e.holds) {
                    "ok"
                } else {
                    "VIOLATED"
                },
                ver.positivity_ok
            );
            let mut problems = Vec::new();
            if ver.resolvent_residual > cfg.options.resolvent_tol {
                problems.push(format!(
                    "resolvent residual {} > {}",
                    ver.resolvent_residual, cfg.options.resolvent_tol
                ));
            }
            if ver.stampacchia_max_residual > cfg.options.stampacchia_tol {
                problems.push(format!(
                    "stampacchia residual {} > {}",
                    ver.stampacchia_max_residual, cfg.options.stampacchia_tol
                ));
            }
            if !ver.l1_estimate.holds {
                problems.push("l1 estimate violated".into());
            }
            if ver.energy_estimates.iter().any(|e| !e.holds) {
                problems.push("energy estimate violated".into());
            }
            if ver.positivity_ok == Some(false) {
                problems.push("positivity violated".into());
            }
            if !problems.is_empty() {
                write_outputs(&report, &table, out_dir)?;
                return Err(RunError::CheckerViolation(problems.join("; ")));
            }
        }
        Task::Fk => {
            let (u, rep) = p.solve()?;
            report.solve = Some((&rep).into());
            let g = p
                .mu
                .density()
                .cloned()
                .unwrap_or_else(|| GridFunction64::zeros(p.dom.len()));
            if !p.mu.atoms().is_empty() {
                return Err(RunError::Config(ConfigError::Range {
                    field: "measure.atoms",
                    message: "the fk task requires a measure given by a density".into(),
                }));
            }
            let mc = McOptions {
                n_paths: cfg.options.n_paths,
                dt: cfg.options.dt,
                seed: cfg.options.seed,
            };
            let est = fk_estimate(&p.dom, &p.f, &g, &u, cfg.options.x, &mc)
                .map_err(|e| RunError::Config(ConfigError::Range {
                    field: "options",
                    message: e.to_string(),
                }))?;
            let lt = lifetime_transform(&p.dom, cfg.options.x, 1.0, &mc)
                .map_err(|e| RunError::Internal(e.to_string()))?;
            report.fk = Some((&est).into());
            report.lifetime = Some((&lt).into());
            table.push("u", &u);
            let at = u.eval_linear(p.dom.grid(), cfg.options.x);
            summary = format!(
                "fk: estimate {:.6} ± {:.2e} vs grid solution {:.6}; lifetime transform {:.6} ± {:.2e}",
                est.mean, est.std_error, at, lt.mean, lt.std_error
            );
        }
        Task::Sweep => {
            let rep = solver::mollified_dirac_sweep(
                &p.dom,
                &p.f,
                cfg.options.x,
                &cfg.options.widths,
                cfg.options.weight,
                p.solve_opts(),
            )
            .map_err(|e| match e {
                solver::SweepError::Solve(inner) => RunError::Internal(inner.to_string()),
                other => RunError::Config(ConfigError::Range {
                    field: "options",
                    message: other.to_string(),
                }),
            })?;
            if rep.reports.iter().any(|r| !r.converged) {
                return Err(RunError::NonConvergence(
                    "a sweep width failed to converge".into(),
                ));
            }
            table.push("u_zero", &rep.zero_solution.0);
            for (i, u) in rep.solutions.iter().enumerate() {
                table.push(format!("u_w{i}"), u);
            }
            let l1s: Vec<f64> = rep
                .solutions
                .iter()
                .map(|u| p.dom.l1_norm(u))
                .collect();
            summary = format!(
                "sweep: widths {:?}, |u|_L1 {:?}, gap_to_atom {:?}, gap_to_zero {:.4e}",
                rep.widths, l1s, rep.gap_to_atom, rep.gap_to_zero
            );
            report.sweep = Some(SweepSection {
                widths: rep.widths.clone(),
                l1_norms: l1s,
                successive_gaps: rep.successive_gaps.clone(),
                converged: rep.reports.iter().map(|r| r.converged).collect(),
                gap_to_atom: rep.gap_to_atom,
                gap_to_zero: rep.gap_to_zero,
            });
        }
        Task::Decompose => {
            let (mu_d, mu_c) = decompose(&p.dom, &p.mu)
                .map_err(|e| RunError::Internal(e.to_string()))?;
            let rules = p
                .mu
                .atoms()
                .iter()
                .map(|a| {
                    classify_polar(&p.dom, &[a.location])
                        .map(|v| v.rule.to_string())
                        .unwrap_or_else(|e| e.to_string())
                })
                .collect();
            report.decompose = Some(DecomposeSection {
                tv_total: tv_norm(&p.dom, &p.mu),
                tv_diffuse: tv_norm(&p.dom, &mu_d),
                tv_concentrated: tv_norm(&p.dom, &mu_c),
                diffuse_atoms: mu_d.atoms().iter().map(|a| [a.location, a.weight]).collect(),
                concentrated_atoms: mu_c
                    .atoms()
                    .iter()
                    .map(|a| [a.location, a.weight])
                    .collect(),
                polarity_rules: rules,
            });
            if let Some(g) = p.mu.density() {
                table.push("g", g);
            }
            let d = report.decompose.as_ref().expect("just set");
            summary = format!(
                "decompose: tv {:.6} = diffuse {:.6} + concentrated {:.6} ({} polar atoms)",
                d.tv_total,
                d.tv_diffuse,
                d.tv_concentrated,
                d.concentrated_atoms.len()
            );
        }
        Task::Tvnorm => {
            let (pos, neg) = pos_neg_parts(&p.mu);
            let ladder = if p.mu.is_nonnegative() {
                Some(
                    tv_via_resolvent(&p.dom, &p.mu, &cfg.options.n_list)
                        .map_err(|e| RunError::Internal(e.to_string()))?
                        .iter()
                        .map(|e| [e.n, e.value])
                        .collect(),
                )
            } else {
                None
            };
            report.tvnorm = Some(TvSection {
                tv_norm: tv_norm(&p.dom, &p.mu),
                tv_positive_part: tv_norm(&p.dom, &pos),
                tv_negative_part: tv_norm(&p.dom, &neg),
                resolvent_ladder: ladder,
            });
            if let Some(g) = p.mu.density() {
                table.push("g", g);
            }
            let t = report.tvnorm.as_ref().expect("just set");
            summary = format!(
                "tvnorm: {:.6} (+ part {:.6}, - part {:.6}); resolvent ladder {:?}",
                t.tv_norm, t.tv_positive_part, t.tv_negative_part, t.resolvent_ladder
            );
        }
    }

    let out = write_outputs(&report, &table, out_dir)?;
    Ok(RunOutput {
        report_path: out.0,
        grid_path: out.1,
        summary,
    })
}

fn write_outputs(
    report: &Report,
    table: &GridTable,
    out_dir: &Path,
) -> Result<(PathBuf, PathBuf), RunError> {
    std::fs::create_dir_all(out_dir).map_err(|e| RunError::Internal(e.to_string()))?;
    let report_path = out_dir.join("report.json");
    let grid_path = out_dir.join("grid.csv");
    std::fs::write(&report_path, report.to_json())
        .map_err(|e| RunError::Internal(e.to_string()))?;
    std::fs::write(&grid_path, table.to_csv()).map_err(|e| RunError::Internal(e.to_string()))?;
    Ok((report_path, grid_path))
}
