//! Subcommands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use purposedyn::analytics::{
    average_socialization, comparative_sweep, compare_ownership, profit_closed_form,
    steady_state_profit, steady_state_utility, BracketCoefficients, ComparativeReport, Parameter,
    Sign, DEFAULT_FD_STEP,
};
use purposedyn::dp::{dp_oracle_with, DpConfig};
use purposedyn::experiments::{
    fosd_sweep, profit_ambiguity_search_with, spread_sweep, OutcomeDelta, AMBIGUITY_POINTS,
    AMBIGUITY_RANGE,
};
use purposedyn::firm::{characteristic_roots, saddle_condition, steady_state, transition_path};
use purposedyn::{Execution, FirmParams};
use serde_json::json;

use crate::report::{exact, sig6, table, Artifacts, Manifest};
use crate::scenario::{load_scenario, Scenario};
use crate::{CliError, THREADS_ENV};

#[derive(Debug, Parser)]
#[command(
    name = "purposedyn",
    version,
    about = "Firm investment in workplace purpose: steady states, paths and experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Io {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form steady state, utility and profit.
    SteadyState {
        #[command(flatten)]
        io: Io,
        /// Also solve the grid oracle with N points.
        #[arg(long)]
        grid: Option<usize>,
        /// Backward steps of the grid oracle.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Optimal transition path from the initial meaning stock.
    Path {
        #[command(flatten)]
        io: Io,
        /// Number of periods (overrides the scenario).
        #[arg(long)]
        horizon: Option<usize>,
        /// Initial meaning (overrides the scenario).
        #[arg(long)]
        m0: Option<f64>,
        /// Add the greedy path of an N-point grid oracle.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Investor-owned versus worker-owned steady states.
    CompareOwnership {
        #[command(flatten)]
        io: Io,
    },
    /// Finite-difference sensitivities with predicted signs.
    ComparativeStatics {
        #[command(flatten)]
        io: Io,
        /// Parameter to perturb (repeatable; default: all).
        #[arg(long = "param")]
        params: Vec<Parameter>,
        /// Relative step of the central differences.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Mean-preserving spreads of a lognormal baseline.
    SosdSweep {
        #[command(flatten)]
        io: Io,
        /// Spread size (repeatable).
        #[arg(long = "gamma")]
        gammas: Vec<f64>,
        /// Search cost parameters for opposite profit responses.
        #[arg(long)]
        profit_search: bool,
        /// Points per axis of the profit search.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Upward shifts of an empirical distribution.
    FosdShift {
        #[command(flatten)]
        io: Io,
        /// Shift size (repeatable).
        #[arg(long = "shift")]
        shifts: Vec<f64>,
    },
    /// Check a scenario and print its derived moments.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SteadyState { .. } => "steady-state",
            Command::Path { .. } => "path",
            Command::CompareOwnership { .. } => "compare-ownership",
            Command::ComparativeStatics { .. } => "comparative-statics",
            Command::SosdSweep { .. } => "sosd-sweep",
            Command::FosdShift { .. } => "fosd-shift",
            Command::Validate { .. } => "validate",
        }
    }

    fn paths(&self) -> (&Path, Option<&Path>) {
        match self {
            Command::SteadyState { io, .. }
            | Command::Path { io, .. }
            | Command::CompareOwnership { io }
            | Command::ComparativeStatics { io, .. }
            | Command::SosdSweep { io, .. }
            | Command::FosdShift { io, .. } => (&io.scenario, Some(&io.out)),
            Command::Validate { scenario, out } => (scenario, out.as_deref()),
        }
    }
}

/// Applies the thread-count variable; returns the pool size in use.
fn configure_threads() -> Result<usize, CliError> {
    let requested = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| CliError::Validation {
                    path: THREADS_ENV.into(),
                    message: format!("must be a positive integer (got {v:?})"),
                })?,
        ),
        Err(_) => None,
    };
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = requested {
            // a second call in the same process keeps the first pool
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
        Ok(rayon::current_num_threads())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = requested;
        Ok(1)
    }
}

/// Runs one command, printing human-readable tables to stdout.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let threads = configure_threads()?;
    let (scenario_path, out) = cli.command.paths();
    let sc = load_scenario(scenario_path)?;
    let mut art = match out {
        Some(dir) => Some(Artifacts::create(dir)?),
        None => None,
    };

    match &cli.command {
        Command::SteadyState { grid, horizon, .. } => {
            steady_state_cmd(&sc, art.as_mut().expect("out"), *grid, *horizon)?
        }
        Command::Path {
            horizon, m0, grid, ..
        } => path_cmd(&sc, art.as_mut().expect("out"), *horizon, *m0, *grid)?,
        Command::CompareOwnership { .. } => ownership_cmd(&sc, art.as_mut().expect("out"))?,
        Command::ComparativeStatics { params, step, .. } => {
            statics_cmd(&sc, art.as_mut().expect("out"), params, *step)?
        }
        Command::SosdSweep {
            gammas,
            profit_search,
            grid,
            ..
        } => spread_cmd(
            &sc,
            art.as_mut().expect("out"),
            gammas,
            *profit_search,
            *grid,
        )?,
        Command::FosdShift { shifts, .. } => shift_cmd(&sc, art.as_mut().expect("out"), shifts)?,
        Command::Validate { .. } => validate_cmd(&sc, art.as_mut())?,
    }

    if let Some(art) = art {
        let manifest = Manifest {
            tool: "purposedyn",
            version: env!("CARGO_PKG_VERSION"),
            command: cli.command.name(),
            scenario_name: &sc.file.name,
            scenario_path: scenario_path.display().to_string(),
            scenario_sha256: &sc.sha256,
            threads,
            wall_time_seconds: start.elapsed().as_secs_f64(),
            artifacts: art.written(),
        };
        let path = art.dir().join("manifest.json");
        let mut text =
            serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        std::fs::write(&path, text)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

/// Smallest horizon with `delta^T < 1e-9`.
fn default_dp_horizon(fp: &FirmParams) -> usize {
    ((1e-9f64).ln() / fp.delta.ln()).ceil() as usize + 1
}

fn dp_config(sc: &Scenario, grid: Option<usize>, horizon: Option<usize>) -> Option<DpConfig> {
    let file = sc.file.dp;
    let grid = grid.or(file.map(|d| d.grid))?;
    let horizon = horizon
        .or(file.map(|d| d.horizon))
        .unwrap_or_else(|| default_dp_horizon(&sc.params));
    Some(DpConfig::new(grid, horizon))
}

fn sign_name(s: Option<Sign>) -> &'static str {
    s.map_or("none", Sign::name)
}

fn steady_state_cmd(
    sc: &Scenario,
    art: &mut Artifacts,
    grid: Option<usize>,
    horizon: Option<usize>,
) -> Result<(), CliError> {
    let fp = &sc.params;
    let ss = steady_state(fp);
    let b_ref = sc.reference_ability();
    let utility = steady_state_utility(b_ref, fp);
    let profit = steady_state_profit(fp);
    let socialization = average_socialization(&ss, fp);
    let (d, l) = (fp.delta, fp.lambda);
    let consistent = profit_closed_form(fp, BracketCoefficients::consistent(d, l));
    let cross = profit_closed_form(fp, BracketCoefficients::with_inflated_cross_term(d, l));
    let persistence = profit_closed_form(
        fp,
        BracketCoefficients::with_inflated_persistence_term(d, l),
    );

    let dp = match dp_config(sc, grid, horizon) {
        Some(cfg) => {
            let sol = dp_oracle_with(fp, &cfg, Execution::default())?;
            Some(json!({
                "grid": cfg.grid_size,
                "horizon": cfg.horizon,
                "fixed_point": sol.fixed_point,
                "cell_width": sol.cell_width,
                "abs_error": (sol.fixed_point - ss.m_star).abs(),
            }))
        }
        None => None,
    };

    art.csv(
        "steady_state.csv",
        &[
            "m_star",
            "r_star",
            "k_star",
            "mean_socialization",
            "reference_ability",
            "utility",
            "profit",
        ],
        &[[
            ss.m_star,
            ss.r_star,
            ss.k_star,
            socialization,
            b_ref,
            utility,
            profit,
        ]
        .map(exact)
        .to_vec()],
    )?;
    let roots = characteristic_roots(fp);
    art.json(
        "steady_state.json",
        &json!({
            "scenario": sc.file.name,
            "steady_state": ss,
            "mean_socialization": socialization,
            "reference_ability": b_ref,
            "utility": utility,
            "profit": profit,
            "saddle_condition": saddle_condition(fp),
            "stable_root": roots.mu2,
            "unstable_root": if roots.mu1.is_finite() { json!(roots.mu1) } else { json!("inf") },
            "profit_closed_forms": {
                "note": "profit is the discounted steady-state payoff; the consistent bracket reproduces it, the two inflated variants do not",
                "direct": profit,
                "consistent": consistent,
                "inflated_cross_term": cross,
                "inflated_persistence_term": persistence,
            },
            "dp_check": dp,
        }),
    )?;

    let mut rows = vec![
        vec!["m*".into(), sig6(ss.m_star)],
        vec!["r*".into(), sig6(ss.r_star)],
        vec!["k*".into(), sig6(ss.k_star)],
        vec![format!("u*(b={})", sig6(b_ref)), sig6(utility)],
        vec!["profit".into(), sig6(profit)],
        vec!["profit (inflated cross term)".into(), sig6(cross)],
    ];
    if let Some(dp) = &dp {
        rows.push(vec![
            "grid oracle m*".into(),
            sig6(dp["fixed_point"].as_f64().unwrap_or(f64::NAN)),
        ]);
    }
    print!("{}", table(&["quantity", "value"], &rows));
    Ok(())
}

fn path_cmd(
    sc: &Scenario,
    art: &mut Artifacts,
    horizon: Option<usize>,
    m0: Option<f64>,
    grid: Option<usize>,
) -> Result<(), CliError> {
    let fp = &sc.params;
    let horizon = horizon.unwrap_or(sc.file.horizon);
    let m0 = m0.unwrap_or(sc.file.initial_meaning);
    let traj = transition_path(m0, horizon, fp)?;

    let greedy = match grid {
        Some(n) => {
            let m_star = steady_state(fp).m_star;
            let cfg =
                DpConfig::new(n, default_dp_horizon(fp)).with_upper((3.0 * m_star).max(1.5 * m0));
            let sol = dp_oracle_with(fp, &cfg, Execution::default())?;
            Some(sol.simulate(m0, horizon))
        }
        None => None,
    };

    let mut header = vec!["t", "m_bar", "r", "per_period_profit"];
    if greedy.is_some() {
        header.push("m_bar_grid");
    }
    let mut rows = Vec::with_capacity(horizon + 1);
    let mut first = vec!["0".to_string(), exact(m0), String::new(), String::new()];
    if let Some(g) = &greedy {
        first.push(exact(g[0]));
    }
    rows.push(first);
    for p in &traj.points {
        let mut row = vec![
            p.t.to_string(),
            exact(p.m_bar),
            exact(p.r),
            exact(p.per_period_profit),
        ];
        if let Some(g) = &greedy {
            row.push(exact(g[p.t]));
        }
        rows.push(row);
    }
    art.csv("path.csv", &header, &rows)?;

    let human: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .map(|(i, c)| {
                    if i == 0 || c.is_empty() {
                        c.clone()
                    } else {
                        sig6(c.parse().expect("own output"))
                    }
                })
                .collect()
        })
        .collect();
    print!("{}", table(&header, &human));
    Ok(())
}

fn ownership_cmd(sc: &Scenario, art: &mut Artifacts) -> Result<(), CliError> {
    let cmp = compare_ownership(&sc.params, sc.reference_ability());
    let rows: Vec<Vec<String>> = [cmp.investor, cmp.worker_owned]
        .iter()
        .map(|o| {
            let s = o.steady_state;
            vec![
                o.mode.to_string(),
                exact(s.m_star),
                exact(s.r_star),
                exact(s.k_star),
                exact(o.utility),
                exact(o.surplus),
            ]
        })
        .collect();
    let header = ["mode", "m_star", "r_star", "k_star", "utility", "surplus"];
    art.csv("ownership.csv", &header, &rows)?;
    art.json(
        "ownership.json",
        &json!({
            "reference_ability": sc.reference_ability(),
            "investor_owned": cmp.investor,
            "worker_owned": cmp.worker_owned,
            "worker_owned_dominates": cmp.worker_owned_dominates(),
        }),
    )?;
    let human: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            std::iter::once(r[0].clone())
                .chain(r[1..].iter().map(|c| sig6(c.parse().unwrap())))
                .collect()
        })
        .collect();
    print!("{}", table(&header, &human));
    Ok(())
}

fn statics_cmd(
    sc: &Scenario,
    art: &mut Artifacts,
    params: &[Parameter],
    step: Option<f64>,
) -> Result<(), CliError> {
    let spec = sc.file.comparative_statics.as_ref();
    let params: Vec<Parameter> = if !params.is_empty() {
        params.to_vec()
    } else {
        match spec.map(|s| s.parameters.clone()) {
            Some(p) if !p.is_empty() => p,
            _ => Parameter::ALL.to_vec(),
        }
    };
    let step = step
        .or(spec.and_then(|s| s.step))
        .unwrap_or(DEFAULT_FD_STEP);
    if !(step.is_finite() && step > 0.0) {
        return Err(CliError::Validation {
            path: "--step".into(),
            message: "must be finite and > 0".into(),
        });
    }
    let reports: Vec<ComparativeReport> = comparative_sweep(
        &sc.params,
        &params,
        step,
        sc.reference_ability(),
        Execution::default(),
    )?;

    let header = [
        "parameter",
        "outcome",
        "base_value",
        "step",
        "value",
        "derivative",
        "numeric_sign",
        "predicted_sign",
        "agrees",
    ];
    let mut rows = Vec::new();
    let mut human = Vec::new();
    for rep in &reports {
        for r in &rep.rows {
            rows.push(vec![
                rep.parameter.to_string(),
                r.outcome.to_string(),
                exact(rep.base_value),
                exact(rep.step),
                exact(r.value),
                exact(r.derivative),
                r.numeric_sign.to_string(),
                sign_name(r.predicted_sign).into(),
                r.agrees.to_string(),
            ]);
            human.push(vec![
                rep.parameter.to_string(),
                r.outcome.to_string(),
                sig6(r.derivative),
                r.numeric_sign.to_string(),
                sign_name(r.predicted_sign).into(),
                r.agrees.to_string(),
            ]);
        }
    }
    art.csv("comparative_statics.csv", &header, &rows)?;
    art.json("comparative_statics.json", &reports)?;
    print!(
        "{}",
        table(
            &[
                "parameter",
                "outcome",
                "derivative",
                "numeric",
                "predicted",
                "agrees"
            ],
            &human
        )
    );
    let disagreements = reports
        .iter()
        .flat_map(|r| &r.rows)
        .filter(|r| !r.agrees)
        .count();
    println!("{disagreements} disagreement(s) with predicted signs");
    Ok(())
}

fn delta_rows(prefix: &[String], deltas: &[OutcomeDelta]) -> Vec<Vec<String>> {
    deltas
        .iter()
        .map(|d| {
            let mut row = prefix.to_vec();
            row.extend([
                d.outcome.to_string(),
                exact(d.before),
                exact(d.after),
                exact(d.delta),
                sign_name(d.predicted_sign).into(),
                d.agrees.to_string(),
            ]);
            row
        })
        .collect()
}

fn humanize(rows: &[Vec<String>], text_cols: &[usize]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .map(|(i, c)| match c.parse::<f64>() {
                    Ok(x) if !text_cols.contains(&i) => sig6(x),
                    _ => c.clone(),
                })
                .collect()
        })
        .collect()
}

fn spread_cmd(
    sc: &Scenario,
    art: &mut Artifacts,
    gammas: &[f64],
    profit_search: bool,
    grid: Option<usize>,
) -> Result<(), CliError> {
    let spec = sc.file.spread.as_ref();
    let gammas: Vec<f64> = if gammas.is_empty() {
        spec.map(|s| s.gammas.clone()).unwrap_or_default()
    } else {
        gammas.to_vec()
    };
    if gammas.is_empty() {
        return Err(CliError::Validation {
            path: "spread.gammas".into(),
            message: "no spread sizes given (use --gamma or the scenario)".into(),
        });
    }
    if let Some(g) = gammas.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
        return Err(CliError::Validation {
            path: "--gamma".into(),
            message: format!("must be finite and >= 0 (got {g})"),
        });
    }
    let exps = spread_sweep(&sc.params, &gammas, Execution::default())?;

    let header = [
        "baseline_power",
        "gamma",
        "outcome",
        "before",
        "after",
        "delta",
        "predicted_sign",
        "agrees",
    ];
    let rows: Vec<Vec<String>> = exps
        .iter()
        .flat_map(|e| delta_rows(&[exact(e.baseline.power), exact(e.gamma)], &e.deltas))
        .collect();
    art.csv("spread.csv", &header, &rows)?;
    art.json(
        "spread.json",
        &json!({
            "direction": "gamma > 0 is a mean-preserving increase in the dispersion of b^power, the reverse of a second-order dominance improvement",
            "reference_ability": exps[0].reference_ability,
            "experiments": exps,
        }),
    )?;
    print!("{}", table(&header, &humanize(&rows, &[])));

    if profit_search || spec.is_some_and(|s| s.profit_search) {
        let gamma = gammas.iter().copied().find(|g| *g > 0.0).unwrap_or(0.0);
        let points = grid.unwrap_or(AMBIGUITY_POINTS);
        let search = profit_ambiguity_search_with(
            &sc.params,
            gamma,
            AMBIGUITY_RANGE,
            points,
            Execution::default(),
        )?;
        art.json("profit_search.json", &search)?;
        for (label, w) in [
            ("profit rises", search.positive),
            ("profit falls", search.negative),
        ] {
            match w {
                Some(w) => println!(
                    "{label}: a_e={}, a_k={}, delta={}",
                    sig6(w.a_e),
                    sig6(w.a_k),
                    sig6(w.delta_profit)
                ),
                None => println!("{label}: no witness on the grid"),
            }
        }
        if let Some(d) = &search.diagnostic {
            println!("{d}");
        }
    }
    Ok(())
}

fn shift_cmd(sc: &Scenario, art: &mut Artifacts, shifts: &[f64]) -> Result<(), CliError> {
    let shifts: Vec<f64> = if shifts.is_empty() {
        sc.file
            .shift
            .as_ref()
            .map(|s| s.shifts.clone())
            .unwrap_or_default()
    } else {
        shifts.to_vec()
    };
    if shifts.is_empty() {
        return Err(CliError::Validation {
            path: "shift.shifts".into(),
            message: "no shifts given (use --shift or the scenario)".into(),
        });
    }
    if let Some(s) = shifts.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(CliError::Validation {
            path: "--shift".into(),
            message: format!("must be finite and >= 0 (got {s})"),
        });
    }
    let exps = fosd_sweep(&sc.params, &shifts, Execution::default())?;
    let header = [
        "shift",
        "outcome",
        "before",
        "after",
        "delta",
        "predicted_sign",
        "agrees",
    ];
    let rows: Vec<Vec<String>> = exps
        .iter()
        .flat_map(|e| delta_rows(&[exact(e.shift)], &e.deltas))
        .collect();
    art.csv("fosd.csv", &header, &rows)?;
    art.json("fosd.json", &exps)?;
    print!("{}", table(&header, &humanize(&rows, &[])));
    Ok(())
}

fn validate_cmd(sc: &Scenario, art: Option<&mut Artifacts>) -> Result<(), CliError> {
    let mb = sc.params.moments();
    let names = ["E[b^(1/3)]", "E[b^(2/3)]", "E[b]", "E[b^(4/3)]", "E[b^2]"];
    let mut rows: Vec<Vec<String>> = names
        .iter()
        .zip(mb.as_array())
        .map(|(n, v)| vec![n.to_string(), sig6(v)])
        .collect();
    rows.push(vec![
        "A3 margin m1 - m43/m13".into(),
        sig6(mb.condition_a3_margin()),
    ]);
    rows.push(vec![
        "saddle condition".into(),
        sig6(saddle_condition(&sc.params)),
    ]);
    println!("scenario {:?} is valid", sc.file.name);
    print!("{}", table(&["moment", "value"], &rows));
    if let Some(art) = art {
        art.json(
            "moments.json",
            &json!({
                "scenario": sc.file.name,
                "moments": mb,
                "condition_a3_margin": mb.condition_a3_margin(),
                "saddle_condition": saddle_condition(&sc.params),
            }),
        )?;
    }
    Ok(())
}
