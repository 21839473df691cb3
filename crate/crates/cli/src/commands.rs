use std::f64::consts::TAU;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};
use sqzcav_core::models::{build_model, build_t0, build_t4i, ground_bloch_vector, Model, Tier};
use sqzcav_core::regime::{default_nogo_grid, summarize_nogo, NogoRow};
use sqzcav_core::spectra::SZ_DISCREPANCY_LIMIT;
use sqzcav_core::{
    check_regime, derived_params, evolve, fit_decay, spectrum_scan, trace_distance, BlochRates, DecayModel,
    DensityMatrix, LevelScheme, NumericOptions, ProbeConfig, RegimeReport, ResponseKernel, SpectrumMethod,
    SpectrumResult, SpectrumWarning, SystemConfig, C64,
};

use crate::config::{closed_form_rates, parse_tier, ProbeMode, RunConfig};
use crate::output::{record, write_json, OutDir, Table};
use crate::{Failure, Method};

pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub out: &'a OutDir,
    pub seed: Option<u64>,
}

type Outcome = Result<(), Failure>;

impl Context<'_> {
    fn finish(&self, command: &str, mut result: Value, warnings: Vec<String>, started: Instant) -> anyhow::Result<()> {
        if let Some(seed) = self.seed {
            result["seed"] = json!(seed);
        }
        for w in &warnings {
            eprintln!("warning: {w}");
        }
        let rec = record(command, self.cfg, result, warnings, started.elapsed());
        write_json(&self.out.file(&format!("{command}.json")), &rec)
    }
}

fn rates_json(r: &BlochRates) -> Value {
    json!({
        "gamma_x": r.gamma_x,
        "gamma_y": r.gamma_y,
        "gamma_z": r.gamma_z,
        "gamma_drive": r.gamma_drive,
        "gamma_x_over_2pi": r.gamma_x / TAU,
        "gamma_y_over_2pi": r.gamma_y / TAU,
        "gamma_z_over_2pi": r.gamma_z / TAU,
        "quadrature_angle": r.quadrature_angle,
        "sz_steady": r.sz_steady(),
    })
}

fn regime_json(report: &RegimeReport) -> Value {
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| json!({"name": r.name, "small": r.small, "large": r.large, "ratio": r.ratio, "threshold": r.threshold, "pass": r.pass}))
        .collect();
    json!({"rows": rows, "pass": report.pass})
}

fn scheme_of(tier: Tier) -> LevelScheme {
    tier.scheme().unwrap_or(LevelScheme::FourLevel)
}

fn build(tier: Tier, cfg: &SystemConfig) -> sqzcav_core::Result<Model> {
    match tier {
        Tier::T0 => build_t0(cfg.decay.gamma_r, &cfg.squeezing),
        _ => build_model(tier, cfg),
    }
}

pub fn validate(ctx: &Context) -> Outcome {
    let started = Instant::now();
    let cfg = ctx.cfg.system_config()?;
    let tier = parse_tier(&ctx.cfg.tier)?;
    let report = check_regime(&cfg, &ctx.cfg.regime_thresholds());
    let d = derived_params(&cfg, scheme_of(tier));

    println!("{:<24} {:>12} {:>12} {:>10} {:>9}  status", "condition", "small", "large", "ratio", "limit");
    for r in &report.rows {
        let status = if r.pass { "ok" } else { "FAIL" };
        println!("{:<24} {:>12.4e} {:>12.4e} {:>10.3e} {:>9.3e}  {status}", r.name, r.small, r.large, r.ratio, r.threshold);
    }
    println!("regime: {}", if report.pass { "valid" } else { "violated" });

    let mut warnings = Vec::new();
    let rates = match closed_form_rates(tier, &cfg) {
        Ok(r) => rates_json(&r),
        Err(e) => {
            warnings.push(format!("closed-form rates unavailable: {e}"));
            Value::Null
        }
    };
    let result = json!({
        "tier": tier.name(),
        "regime": regime_json(&report),
        "derived": {
            "beta_r": d.beta_r,
            "eta_r": d.eta_r,
            "alpha": d.alpha,
            "cooperativity": d.big_c,
            "p_const": d.p_const,
            "d_const": d.d_const,
        },
        "rates": rates,
    });
    ctx.finish("validate", result, warnings, started)?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure::physics(anyhow::anyhow!("validity conditions violated")))
    }
}

pub fn bloch(ctx: &Context) -> Outcome {
    let started = Instant::now();
    let rc = ctx.cfg;
    let cfg = rc.system_config()?;
    let tier = parse_tier(&rc.tier)?;
    let model = build(tier, &cfg)?;
    let [x, y, z] = rc.bloch.initial;
    let ground = DensityMatrix::from_bloch(x, y, z)?;
    let t_final = rc.bloch.t_final_us.expect("resolved");
    let traj = evolve(&model.liouvillian, &model.initial_state(&ground)?, t_final, rc.bloch.samples, &rc.step_controls())?;

    let mut warnings: Vec<String> = model.warnings.iter().map(|w| w.to_string()).collect();
    let analytic = closed_form_rates(tier, &cfg);
    let angle = analytic.as_ref().map_or(0.0, |r| r.quadrature_angle);
    let (c, s) = (angle.cos(), angle.sin());

    let mut table = Table::new(&["t_us", "sx", "sy", "sz"]);
    let mut series: [Vec<f64>; 3] = Default::default();
    for (state, &t) in traj.states.iter().zip(&traj.times) {
        let v = ground_bloch_vector(&model, state.op(), t)?;
        table.row(&[t, v[0], v[1], v[2]]);
        series[0].push(c * v[0] + s * v[1]);
        series[1].push(-s * v[0] + c * v[1]);
        series[2].push(v[2]);
    }
    table.write(&ctx.out.file("bloch.csv"))?;

    let names = ["gamma_x", "gamma_y", "gamma_z"];
    let models = [DecayModel::PureExp, DecayModel::PureExp, DecayModel::OffsetExp];
    let mut fitted = serde_json::Map::new();
    let mut fitted_rates = [f64::NAN; 3];
    for k in 0..3 {
        match fit_decay(&traj.times, &series[k], models[k]) {
            Ok(f) => {
                if f.flagged {
                    warnings.push(format!("{} fit residual {:.3} exceeds 5%", names[k], f.residual));
                }
                fitted_rates[k] = f.rate;
                fitted.insert(names[k].into(), json!(f.rate));
                fitted.insert(format!("{}_over_2pi", names[k]), json!(f.rate / TAU));
                fitted.insert(format!("{}_residual", names[k]), json!(f.residual));
            }
            Err(e) => {
                warnings.push(format!("{} fit failed: {e}", names[k]));
                fitted.insert(names[k].into(), Value::Null);
            }
        }
    }
    fitted.insert("sz_final".into(), json!(series[2].last().copied()));

    let (analytic_json, relative) = match &analytic {
        Ok(r) => {
            let want = [r.gamma_x, r.gamma_y, r.gamma_z];
            let rel: serde_json::Map<String, Value> =
                (0..3).map(|k| (names[k].to_string(), json!(((fitted_rates[k] - want[k]) / want[k]).abs()))).collect();
            (rates_json(r), Value::Object(rel))
        }
        Err(e) => {
            warnings.push(format!("closed-form rates unavailable: {e}"));
            (Value::Null, Value::Null)
        }
    };
    let result = json!({
        "tier": tier.name(),
        "t_final_us": t_final,
        "fitted": fitted,
        "analytic": analytic_json,
        "relative_error": relative,
    });
    ctx.finish("bloch", result, warnings, started)?;
    Ok(())
}

fn probe_config(rc: &RunConfig) -> ProbeConfig {
    let p = &rc.probe;
    let e = C64::new(p.e_plus[0], p.e_plus[1]) * TAU;
    let grid = ProbeConfig::grid(TAU * p.nu_max, p.points);
    match p.mode {
        ProbeMode::Single => ProbeConfig::single(e, grid),
        ProbeMode::Sym => ProbeConfig::sym(e, grid),
        ProbeMode::Antisym => ProbeConfig::antisym(e, grid),
        ProbeMode::Custom => ProbeConfig { e_plus: e, e_minus: C64::new(p.e_minus[0], p.e_minus[1]) * TAU, nu_grid: grid },
    }
}

/// Numeric route: one kernel, the detuning grid evaluated in parallel.
fn numeric_spectrum(cfg: &SystemConfig, probe: &ProbeConfig, nu_max: f64) -> sqzcav_core::Result<SpectrumResult> {
    let mut out = spectrum_scan(cfg, probe, SpectrumMethod::Analytic)?;
    let rates = out.rates.expect("analytic route records rates");
    let model = build_t4i(cfg)?;
    let kernel = ResponseKernel::compute(&model, nu_max, &NumericOptions::for_rates(&rates, cfg.cavity.kappa))?;
    let chunk = probe.nu_grid.len().div_ceil(rayon::current_num_threads().max(1)).max(1);
    let parts: Vec<SpectrumResult> = probe
        .nu_grid
        .par_chunks(chunk)
        .map(|nu| kernel.spectrum(&ProbeConfig { e_plus: probe.e_plus, e_minus: probe.e_minus, nu_grid: nu.to_vec() }))
        .collect::<sqzcav_core::Result<_>>()?;
    out.method = SpectrumMethod::Numeric;
    out.a_plus = parts.iter().flat_map(|p| p.a_plus.iter().copied()).collect();
    out.a_minus = parts.iter().flat_map(|p| p.a_minus.iter().copied()).collect();
    if let Some(first) = parts.first() {
        out.warnings.extend(first.warnings.iter().cloned());
    }
    let sz = kernel.sz();
    let sz_cf = rates.sz_steady();
    out.sz_numeric = Some(sz);
    let relative = ((sz - sz_cf) / sz_cf).abs();
    if !(relative <= SZ_DISCREPANCY_LIMIT) {
        out.warnings.push(SpectrumWarning::SzDiscrepancy { relative });
    }
    Ok(out)
}

fn spectrum_table(r: &SpectrumResult) -> Table {
    let mut t = Table::new(&[
        "nu_over_2pi_MHz",
        "re_Ap_plus",
        "im_Ap_plus",
        "abs2_Ap_plus",
        "re_Ap_minus",
        "im_Ap_minus",
        "abs2_Ap_minus",
    ]);
    for k in 0..r.nu.len() {
        let (p, m) = (r.a_plus[k], r.a_minus[k]);
        t.row(&[r.nu[k] / TAU, p.re, p.im, p.norm_sqr(), m.re, m.im, m.norm_sqr()]);
    }
    t
}

fn spectrum_summary(r: &SpectrumResult) -> Value {
    let peak = |v: Vec<f64>| v.into_iter().fold(0.0f64, f64::max);
    json!({
        "sz_closed_form": r.sz_closed_form,
        "sz_numeric": r.sz_numeric,
        "max_abs2_Ap_plus": peak(r.abs2_plus()),
        "max_abs2_Ap_minus": peak(r.abs2_minus()),
    })
}

pub fn spectrum(ctx: &Context, method: Method) -> Outcome {
    let started = Instant::now();
    let rc = ctx.cfg;
    let cfg = rc.system_config()?;
    let probe = probe_config(rc);
    let mut results = Vec::new();
    if matches!(method, Method::Analytic | Method::Both) {
        results.push(spectrum_scan(&cfg, &probe, SpectrumMethod::Analytic)?);
    }
    if matches!(method, Method::Numeric | Method::Both) {
        results.push(numeric_spectrum(&cfg, &probe, TAU * rc.probe.nu_max)?);
    }

    let mut warnings = Vec::new();
    let mut routes = serde_json::Map::new();
    for r in &results {
        let name = r.method.name();
        spectrum_table(r).write(&ctx.out.file(&format!("spectrum_{name}.csv")))?;
        routes.insert(name.into(), spectrum_summary(r));
        warnings.extend(r.warnings.iter().map(|w| format!("{name}: {w}")));
    }
    let mut result = json!({
        "probe_mode": rc.probe.mode,
        "rates": results[0].rates.as_ref().map(rates_json),
        "regime": results[0].regime.as_ref().map(regime_json),
        "routes": routes,
    });
    if let [a, n] = &results[..] {
        let rel = |num: f64, ana: f64| if num == ana { 0.0 } else { (num - ana).abs() / ana };
        let mut t = Table::new(&["nu_over_2pi_MHz", "rel_diff_abs2_Ap_plus", "rel_diff_abs2_Ap_minus"]);
        let (mut worst_p, mut worst_m) = (0.0f64, 0.0f64);
        let (ap, am, np, nm) = (a.abs2_plus(), a.abs2_minus(), n.abs2_plus(), n.abs2_minus());
        for k in 0..a.nu.len() {
            let (dp, dm) = (rel(np[k], ap[k]), rel(nm[k], am[k]));
            worst_p = worst_p.max(dp);
            worst_m = worst_m.max(dm);
            t.row(&[a.nu[k] / TAU, dp, dm]);
        }
        t.write(&ctx.out.file("spectrum_discrepancy.csv"))?;
        result["discrepancy"] = json!({"max_rel_diff_abs2_Ap_plus": worst_p, "max_rel_diff_abs2_Ap_minus": worst_m});
    }
    ctx.finish("spectrum", result, warnings, started)?;
    Ok(())
}

pub fn compare(ctx: &Context) -> Outcome {
    let started = Instant::now();
    let rc = ctx.cfg;
    let cfg = rc.system_config()?;
    let tiers = [parse_tier(&rc.compare.tier_a)?, parse_tier(&rc.compare.tier_b)?];
    let [x, y, z] = rc.compare.initial;
    let ground = DensityMatrix::from_bloch(x, y, z)?;
    let t_final = rc.compare.t_final_us.expect("resolved");
    let n = rc.compare.samples;
    let controls = rc.step_controls();

    let run = |tier: Tier| -> sqzcav_core::Result<(Model, sqzcav_core::Trajectory)> {
        let m = build(tier, &cfg)?;
        let traj = evolve(&m.liouvillian, &m.initial_state(&ground)?, t_final, n, &controls)?;
        Ok((m, traj))
    };
    let (a, b) = rayon::join(|| run(tiers[0]), || run(tiers[1]));
    let ((ma, ta), (mb, tb)) = (a?, b?);

    let mut table = Table::new(&["t_us", "trace_distance"]);
    let mut worst = (0.0f64, 0.0f64);
    for k in 0..n {
        let ga = ma.ground_block(ta.states[k].op(), ta.times[k])?;
        let gb = mb.ground_block(tb.states[k].op(), tb.times[k])?;
        let d = trace_distance(&ga, &gb)?;
        if d > worst.1 {
            worst = (ta.times[k], d);
        }
        table.row(&[ta.times[k], d]);
    }
    table.write(&ctx.out.file("compare.csv"))?;

    let warnings = ma.warnings.iter().chain(&mb.warnings).map(|w| w.to_string()).collect();
    let result = json!({
        "tier_a": tiers[0].name(),
        "tier_b": tiers[1].name(),
        "t_final_us": t_final,
        "max_trace_distance": worst.1,
        "t_at_max_us": worst.0,
    });
    ctx.finish("compare", result, warnings, started)?;
    Ok(())
}

pub fn nogo(ctx: &Context) -> Outcome {
    let started = Instant::now();
    let (ns, fractions) = default_nogo_grid(ctx.cfg.nogo.points);
    let rows: Vec<NogoRow> = ns.par_iter().flat_map_iter(|&n| fractions.iter().map(move |&f| NogoRow::new(n, f))).collect();
    let scan = summarize_nogo(rows);

    let mut table = Table::new(&["N", "M_fraction", "P", "quad_sum", "ratio"]);
    for r in &scan.rows {
        table.row(&[r.n, r.m_fraction, r.p, r.quad_sum, r.ratio]);
    }
    table.write(&ctx.out.file("nogo.csv"))?;

    let at = |k: usize| json!({"N": scan.rows[k].n, "M_fraction": scan.rows[k].m_fraction});
    let sys = &ctx.cfg.system;
    let configured = (sys.n > 0.0).then(|| {
        let fraction = (sys.m_re.hypot(sys.m_im) / (sys.n * (sys.n + 1.0)).sqrt()).min(1.0);
        let r = NogoRow::new(sys.n, fraction);
        json!({"N": r.n, "M_fraction": r.m_fraction, "P": r.p, "quad_sum": r.quad_sum, "ratio": r.ratio})
    });
    let result = json!({
        "rows": scan.rows.len(),
        "min_quad_sum": scan.min_quad_sum,
        "argmin_quad_sum": at(scan.argmin_quad_sum),
        "min_ratio": scan.min_ratio,
        "argmin_ratio": at(scan.argmin_ratio),
        "bound_holds": scan.min_quad_sum >= 1.0 - 1e-12,
        "configured": configured,
    });
    ctx.finish("nogo", result, Vec::new(), started)?;
    Ok(())
}
