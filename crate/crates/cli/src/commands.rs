use std::path::Path;

use serde_json::{json, Map, Value};

use reservoir_core::decomposition::{all_reports, premium_weights};
use reservoir_core::econometrics::{
    contract_moment_setup, cycle_rank_correlation, replication_data, CycleTransform, FevdHorizon, ReplicationData,
    SamplerOptions, CONDITIONAL_HORIZON, FEVD_ROWS, PANEL_VARIABLES,
};
use reservoir_core::equilibrium::{step_residuals, Drivers, RESIDUAL_NAMES};
use reservoir_core::growth::{
    discounted_wage_stream, equilibrium_alpha, offsetting_rate, rd_discounted_value, technology_path, wage_bill,
    Expectation, GrowthEnv,
};
use reservoir_core::simulation::impulse_path_from;
use reservoir_core::{simulate, solve_steady_state, EconomyState, ShockPanel, ShockProcess, SimPath};

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::report::{num, Reporter};
use crate::series::{check_aligned, read_series};

/// Human-readable lines plus the `--json` document.
pub struct Summary {
    pub text: String,
    pub json: Value,
}

fn state_names() -> impl Iterator<Item = &'static str> {
    EconomyState::NAMES.iter().copied().chain(["GDP"])
}

fn path_after_burn_in(cfg: &RunConfig, periods: usize) -> CliResult<SimPath> {
    let ss = solve_steady_state(&cfg.params)?;
    let panel = ShockPanel::draw(&cfg.shock_spec(), cfg.burn_in + periods, cfg.seed);
    Ok(simulate(&cfg.params, &panel, &ss)?.skip(cfg.burn_in))
}

pub fn steady(cfg: &RunConfig, rep: &mut Reporter) -> CliResult<Summary> {
    let p = &cfg.params;
    let ss = solve_steady_state(p)?;
    let s = &ss.state;
    rep.write(
        "steady.csv",
        &["variable", "value"],
        state_names().map(|n| [n.to_string(), num(s.series(n).unwrap())]),
    )?;
    let resid = step_residuals(s, s, s, &Drivers::steady(p), p, &ss.anchors());
    rep.write(
        "residuals.csv",
        &["equation", "residual"],
        RESIDUAL_NAMES.iter().zip(&resid).map(|(n, r)| [n.to_string(), num(*r)]),
    )?;
    let state: Map<String, Value> = state_names().map(|n| (n.to_string(), json!(s.series(n).unwrap()))).collect();
    Ok(Summary {
        text: format!(
            "steady state converged in {} iterations, residual ∞-norm {:.3e}\nC = {:.6}  GDP = {:.6}  omega_h = {:.4}  R = {:.4}",
            ss.iterations,
            ss.residual_norm,
            s.c,
            s.gdp(),
            s.omega_h,
            s.r
        ),
        json: json!({
            "command": "steady",
            "converged": true,
            "iterations": ss.iterations,
            "residual_norm": ss.residual_norm,
            "chi": ss.chi,
            "state": state,
        }),
    })
}

fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    (m, v.sqrt())
}

pub fn simulate_cmd(cfg: &RunConfig, rep: &mut Reporter) -> CliResult<Summary> {
    let path = path_after_burn_in(cfg, cfg.periods)?;
    let header = SimPath::csv_header();
    let cols: Vec<&str> = header.iter().map(String::as_str).collect();
    rep.write(
        "simulate.csv",
        &cols,
        (0..path.len()).map(|t| {
            let mut row = path.csv_row(t).into_iter().map(num).collect::<Vec<_>>();
            row[0] = t.to_string();
            row
        }),
    )?;
    let mut stats = Map::new();
    let mut text = format!(
        "simulated {} periods after {} burn-in, max clearing residual {:.3e}",
        path.len(),
        cfg.burn_in,
        path.max_clearing_residual()
    );
    for v in PANEL_VARIABLES {
        let (m, s) = mean_std(&path.deviation_series(v).unwrap());
        stats.insert(v.to_string(), json!({ "mean_pct_dev": m, "std_pct_dev": s }));
        text.push_str(&format!("\n{v:>8}: mean {m:+.3}%  std {s:.3}%"));
    }
    Ok(Summary {
        text,
        json: json!({
            "command": "simulate",
            "periods": path.len(),
            "max_clearing_residual": path.max_clearing_residual(),
            "series": stats,
        }),
    })
}

fn replication(cfg: &RunConfig) -> CliResult<ReplicationData> {
    Ok(replication_data(&path_after_burn_in(cfg, cfg.var_periods)?)?)
}

pub fn irf(cfg: &RunConfig, rep: &mut Reporter) -> CliResult<Summary> {
    let p = &cfg.params;
    let spec = cfg.shock_spec();
    let ss = solve_steady_state(p)?;
    let data = replication(cfg)?;
    let model = data.fit(cfg.max_lag)?;
    let cmp = data.compare_irfs(&model, cfg.horizon)?;
    let mut rows = Vec::new();
    for proc in ShockProcess::ALL {
        let truth = impulse_path_from(p, &spec, &ss, proc, 1.0, cfg.horizon + 1)?;
        let j = proc.index();
        for (i, v) in PANEL_VARIABLES.iter().enumerate() {
            let model_path = truth.get(v).unwrap();
            for (h, m) in model_path.iter().enumerate() {
                rows.push([
                    proc.label().to_string(),
                    v.to_string(),
                    h.to_string(),
                    num(*m),
                    num(cmp.var[h][(j, i)]),
                    num(cmp.lp[h][(j, i)]),
                    num(cmp.lp_std_err[h][(j, i)]),
                ]);
            }
        }
    }
    rep.write("irf.csv", &["shock", "variable", "horizon", "model", "var", "lp", "lp_se"], rows)?;
    let gap = cmp.largest_gap();
    Ok(Summary {
        text: format!(
            "VAR({}) on {} periods; responses to +1 sd shocks over {} horizons\nlargest |VAR - LP| {:.4} pp ({} to {} at h={})",
            model.lag,
            cfg.var_periods,
            cfg.horizon + 1,
            gap.gap,
            cmp.outcomes[gap.outcome],
            cmp.shocks[gap.shock],
            gap.horizon
        ),
        json: json!({
            "command": "irf",
            "var_lag": model.lag,
            "periods": cfg.var_periods,
            "horizon": cfg.horizon,
            "largest_gap": {
                "value": gap.gap,
                "variable": cmp.outcomes[gap.outcome],
                "shock": cmp.shocks[gap.shock],
                "horizon": gap.horizon,
            },
        }),
    })
}

pub fn fevd(cfg: &RunConfig, rep: &mut Reporter) -> CliResult<Summary> {
    let data = replication(cfg)?;
    let model = data.fit(cfg.max_lag)?;
    let modes = [("conditional", FevdHorizon::Steps(CONDITIONAL_HORIZON)), ("unconditional", FevdHorizon::Converged)];
    let table = data.fevd(&model, &modes.map(|m| m.1))?;
    let shock_name = |p: ShockProcess| format!("x_{}", p.label());
    let mut rows = Vec::new();
    let mut doc = Map::new();
    let mut text = format!("VAR({}) on {} periods; shares in percent\n{:>8} {:>13}", model.lag, cfg.var_periods, "", "");
    for p in ShockProcess::ALL {
        text.push_str(&format!(" {:>8}", p.label()));
    }
    text.push_str(&format!(" {:>8}", "other"));
    for v in FEVD_ROWS {
        let mut per_mode = Map::new();
        for (m, (mode, _)) in modes.iter().enumerate() {
            let mut shares: Vec<f64> = ShockProcess::ALL
                .iter()
                .map(|p| table.share(m, v, &shock_name(*p)).unwrap())
                .collect();
            // innovations of the observables themselves
            shares.push(1.0 - shares.iter().sum::<f64>());
            let mut row = vec![v.to_string(), mode.to_string(), table.steps[m].to_string()];
            row.extend(shares.iter().map(|s| num(*s)));
            rows.push(row);
            text.push_str(&format!("\n{v:>8} {mode:>13}"));
            for s in &shares {
                text.push_str(&format!(" {:>8.2}", 100.0 * s));
            }
            per_mode.insert(
                mode.to_string(),
                ShockProcess::ALL
                    .iter()
                    .map(|p| p.label())
                    .chain(["other"])
                    .zip(&shares)
                    .map(|(n, s)| (n.to_string(), json!(s)))
                    .collect(),
            );
        }
        doc.insert(v.to_string(), Value::Object(per_mode));
    }
    let mut cols = vec!["variable", "mode", "steps"];
    cols.extend(ShockProcess::ALL.iter().map(|p| p.label()));
    cols.push("other");
    rep.write("fevd.csv", &cols, rows)?;
    Ok(Summary {
        text,
        json: json!({
            "command": "fevd",
            "var_lag": model.lag,
            "conditional_steps": table.steps[0],
            "unconditional_steps": table.steps[1],
            "shares": doc,
        }),
    })
}

pub fn premium(cfg: &RunConfig, rep: &mut Reporter) -> CliResult<Summary> {
    let p = &cfg.params;
    let w = premium_weights(p, p.xi_bar)?;
    let weights = [
        ("leverage", w.leverage),
        ("rate", w.rate),
        ("land", w.land),
        ("payment_factor", w.payment_factor),
    ];
    rep.write("premium_weights.csv", &["factor", "weight"], weights.iter().map(|(n, v)| [n.to_string(), num(*v)]))?;
    let path = path_after_burn_in(cfg, cfg.periods)?;
    let reports = all_reports(&path, p);
    let mut rows = Vec::new();
    for r in &reports {
        for (t, factor, e, c, contrib) in r.csv_rows() {
            rows.push([r.target.clone(), t.to_string(), factor, num(e), num(c), num(contrib)]);
        }
    }
    rep.write(
        "decomposition.csv",
        &["target", "t", "factor", "elasticity", "change", "contribution"],
        rows,
    )?;
    let mut text = format!(
        "premium weights: leverage {:+.4}, rate {:+.4}, land {:+.4}, payment factor {:+.4}\nreconstructions over {} periods (rms residual / rms observed):",
        w.leverage,
        w.rate,
        w.land,
        w.payment_factor,
        path.len()
    );
    let mut fits = Vec::new();
    let mut doc = Map::new();
    for r in &reports {
        let f = r.fit();
        text.push_str(&format!("\n{:>10}: {:.3e} / {:.3e}", r.target, f.rms_residual, f.rms_observed));
        fits.push([
            r.target.clone(),
            num(f.rms_observed),
            num(f.rms_residual),
            num(f.max_abs_residual),
            num(f.relative_residual),
        ]);
        doc.insert(r.target.clone(), serde_json::to_value(f)?);
    }
    rep.write(
        "decomposition_fit.csv",
        &["target", "rms_observed", "rms_residual", "max_abs_residual", "relative_residual"],
        fits,
    )?;
    Ok(Summary {
        text,
        json: json!({
            "command": "premium",
            "weights": serde_json::to_value(w)?,
            "fit": doc,
        }),
    })
}

pub fn growth(cfg: &RunConfig, rep: &mut Reporter) -> CliResult<Summary> {
    let p = &cfg.params;
    let ss = solve_steady_state(p)?;
    let wb = wage_bill(&ss.state, p);
    let env = GrowthEnv {
        eta: p.eta,
        labor: p.labor_supply,
        n_growth: cfg.growth_n_growth,
        n_sigma: cfg.growth_n_sigma,
        wage_bill: vec![wb.approximation],
        rate: vec![ss.state.r],
        wage_alpha_elasticity: 0.0,
        horizon: cfg.growth_horizon,
        expectation: Expectation::MonteCarlo {
            draws: cfg.growth_draws,
            seed: cfg.seed,
        },
    };
    let stream = discounted_wage_stream(&env)?;
    let alpha = equilibrium_alpha(&env)?;
    let value = rd_discounted_value(&env, alpha.alpha)?;
    let tech = technology_path(&env, &vec![alpha.alpha; cfg.growth_periods])?;
    let interior = alpha.alpha > 0.0 && alpha.alpha < 1.0;
    let offsets = if interior {
        let mut levered = ss.state;
        levered.omega_h *= 1.2;
        let up = GrowthEnv {
            wage_bill: vec![wage_bill(&levered, p).approximation],
            ..env.clone()
        };
        let down = GrowthEnv {
            n_growth: env.n_growth - 0.01,
            ..env.clone()
        };
        Some((offsetting_rate(&up, alpha.alpha)?.shift, offsetting_rate(&down, alpha.alpha)?.shift))
    } else {
        None
    };
    let quantities = [
        ("wage_bill_direct", wb.direct),
        ("wage_bill_approximation", wb.approximation),
        ("wage_bill_perpetuity", wb.perpetuity),
        ("stream", stream.value),
        ("stream_std_err", stream.std_err),
        ("stream_tail_bound", stream.tail_bound),
        ("alpha", alpha.alpha),
        ("alpha_clamped", if alpha.clamped { 1.0 } else { 0.0 }),
        ("rd_value", value.value),
        ("rd_value_std_err", value.std_err),
        ("rate_offset_leverage_up", offsets.map_or(f64::NAN, |o| o.0)),
        ("rate_offset_population_down", offsets.map_or(f64::NAN, |o| o.1)),
    ];
    rep.write("growth.csv", &["quantity", "value"], quantities.iter().map(|(n, v)| [n.to_string(), num(*v)]))?;
    rep.write(
        "technology.csv",
        &["t", "alpha", "A"],
        tech.iter().enumerate().map(|(t, a)| [t.to_string(), num(alpha.alpha), num(*a)]),
    )?;
    if !interior {
        log::warn!("α = {} at the boundary; rate offsets are undefined", alpha.alpha);
    }
    let mut text = format!(
        "wage bill {:.6} (approximation {:.6}), discounted stream {:.4} ± {:.4}\nα = {:.6}{}, technology after {} periods {:.6}",
        wb.direct,
        wb.approximation,
        stream.value,
        stream.std_err,
        alpha.alpha,
        if alpha.clamped { " (clamped)" } else { "" },
        cfg.growth_periods,
        tech.last().unwrap()
    );
    if let Some((up, down)) = offsets {
        text.push_str(&format!(
            "\nrate shift restoring α: {up:+.5} under leverage ×1.2, {down:+.5} under n_g −0.01"
        ));
    }
    Ok(Summary {
        text,
        json: json!({
            "command": "growth",
            "wage_bill": serde_json::to_value(wb)?,
            "stream": serde_json::to_value(stream)?,
            "alpha": serde_json::to_value(alpha)?,
            "technology_final": tech.last(),
            "rate_offsets": offsets.map(|(u, d)| json!({ "leverage_up": u, "population_down": d })),
        }),
    })
}

pub fn cycles(a_path: &Path, b_path: &Path, transform: CycleTransform, rep: &mut Reporter) -> CliResult<Summary> {
    let a = read_series(a_path)?;
    let b = read_series(b_path)?;
    check_aligned(&a, &b, b_path)?;
    let c = cycle_rank_correlation(&a.values, &b.values, transform)?;
    let stats = [
        ("pearson", num(c.pearson)),
        ("amplitude_rank", num(c.amplitude_rank)),
        ("frequencies", c.frequencies.to_string()),
        ("observations", a.values.len().to_string()),
    ];
    rep.write("cycles.csv", &["statistic", "value"], stats.iter().map(|(n, v)| [n.to_string(), v.clone()]))?;
    Ok(Summary {
        text: format!(
            "{} observations {} to {}: amplitude-rank correlation {:.4} over {} frequencies, Pearson {:.4}",
            a.values.len(),
            a.dates[0],
            a.dates.last().unwrap(),
            c.amplitude_rank,
            c.frequencies,
            c.pearson
        ),
        json: json!({
            "command": "cycles",
            "observations": a.values.len(),
            "first_date": a.dates[0],
            "last_date": a.dates.last(),
            "pearson": c.pearson,
            "amplitude_rank": c.amplitude_rank,
            "frequencies": c.frequencies,
        }),
    })
}

pub fn estimate(cfg: &RunConfig, rep: &mut Reporter) -> CliResult<Summary> {
    let setup = contract_moment_setup(&cfg.params)?;
    let opts = SamplerOptions {
        draws: cfg.draws,
        burn_in: cfg.draws_burn_in,
        seed: cfg.seed,
        ..SamplerOptions::default()
    };
    let post = setup.estimate(&opts)?;
    if post.acceptance_warning {
        log::warn!("acceptance rate {:.3} outside the target band after adaptation", post.acceptance);
    }
    let rows = setup.priors.iter().enumerate().map(|(i, pr)| {
        [
            pr.name.clone(),
            num(pr.mean),
            num(pr.std),
            num(post.mean[i]),
            num(post.std[i]),
            num(post.mcse[i]),
        ]
    });
    rep.write("posterior.csv", &["parameter", "prior_mean", "prior_std", "mean", "std", "mcse"], rows)?;
    let mut cols = vec!["draw"];
    cols.extend(post.names.iter().map(String::as_str));
    rep.write(
        "chain.csv",
        &cols,
        post.chain.iter().enumerate().map(|(i, x)| {
            std::iter::once(i.to_string()).chain(x.iter().map(|v| num(*v))).collect::<Vec<_>>()
        }),
    )?;
    let mut text = format!("{} draws after {} burn-in, acceptance {:.3}", cfg.draws, cfg.draws_burn_in, post.acceptance);
    for (i, n) in post.names.iter().enumerate() {
        text.push_str(&format!(
            "\n{n:>4}: mean {:.5}  std {:.5}  mcse {:.5}",
            post.mean[i], post.std[i], post.mcse[i]
        ));
    }
    Ok(Summary {
        text,
        json: json!({
            "command": "estimate",
            "draws": cfg.draws,
            "acceptance": post.acceptance,
            "acceptance_warning": post.acceptance_warning,
            "parameters": post.names.iter().enumerate().map(|(i, n)| json!({
                "name": n, "mean": post.mean[i], "std": post.std[i], "mcse": post.mcse[i],
            })).collect::<Vec<_>>(),
        }),
    })
}
