//! The five CLI subcommands. Each returns `true` when every configured
//! check passed and no record was flagged unreliable; the binary maps that
//! to the exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::fourier::{hyperbolic_cross, level_simplex};
use crate::kernels::{AveragerKind, DefectOrder};
use crate::smolyak::{c0_of_smolyak, combination_plan, smolyak_grid_size};
use crate::spaces::{
    averager_norm_lqj, besov_norm, check_cond, compat_condition_proxy,
    discrete_lp_quasi_norm, tl_norm, NormFamily,
};
use crate::testbed::{
    f_lower, fit_rate, korobov, measure_error, phi_j, ErrorRecord, ERROR_RECORD_HEADER,
};
use crate::{Error, Result};

/// Resolve the output directory: HYPERCROSS_OUT env > --out flag > config.
pub fn resolve_out_dir(cfg: &ExperimentConfig, flag: Option<&Path>) -> PathBuf {
    if let Ok(env) = std::env::var("HYPERCROSS_OUT") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    PathBuf::from(cfg.output.dir.as_deref().unwrap_or("."))
}

fn metadata_header(cfg: &ExperimentConfig) -> String {
    format!(
        "# schema_version={} seed={} measure=normalized phi0={}\n",
        cfg.schema_version, cfg.seed, cfg.norms.phi0
    )
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn binom(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Convergence sweep: error records per (n, q), rate fit, comparison with
/// the predicted exponent r from the configured norm parameters.
pub fn cmd_rates(cfg: &ExperimentConfig, out: &Path, jobs: usize) -> Result<bool> {
    let op = cfg.build_operator()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    let ns: Vec<u32> = (cfg.sweep.n_min..=cfg.sweep.n_max).collect();

    let mut all_records: Vec<ErrorRecord> = Vec::new();
    let mut summary = String::new();
    let mut ok = true;
    let predicted_r = cfg.norms.r;

    for &q in &cfg.sweep.q {
        let records: Vec<Result<ErrorRecord>> = pool.install(|| {
            ns.par_iter()
                .map(|&n| {
                    let f = cfg.build_function(&op, n)?;
                    measure_error(&op, &f, n, q)
                })
                .collect()
        });
        let mut recs = Vec::new();
        for r in records {
            recs.push(r?);
        }
        let fit = fit_rate(&recs);
        let q_label = if q.is_infinite() { "inf".into() } else { format!("{q}") };
        writeln!(summary, "q = {q_label}, op = {}", op.label()).unwrap();
        writeln!(summary, "  {:>3}  {:>12}  {:>10}  {:>8}", "n", "error", "dof", "flag")
            .unwrap();
        for r in &recs {
            writeln!(
                summary,
                "  {:>3}  {:>12.4e}  {:>10}  {:>8}",
                r.n,
                r.error,
                r.dof,
                if r.reliable { "ok" } else { "UNRELIABLE" }
            )
            .unwrap();
            if !r.reliable {
                ok = false;
            }
        }
        match &fit {
            Ok(f) => {
                writeln!(
                    summary,
                    "  fit: r_hat = {:.4} (predicted r = {:.4}), beta_hat = {:.3} \
                     (reported, no tolerance), C = {:.4}, resid_rms = {:.3e}",
                    f.r, predicted_r, f.beta, f.c, f.resid_rms
                )
                .unwrap();
                let json = serde_json::json!({
                    "q": q_label,
                    "op": op.label(),
                    "predicted_r": predicted_r,
                    "fit": f.to_json(),
                });
                write_text(
                    out,
                    &format!("rate_fit_q{}.json", q_label.replace('.', "_")),
                    &serde_json::to_string_pretty(&json)?,
                )?;
            }
            Err(e) => {
                writeln!(summary, "  fit failed: {e}").unwrap();
                ok = false;
            }
        }
        all_records.extend(recs);
    }

    let mut csv = metadata_header(cfg);
    csv.push_str(ERROR_RECORD_HEADER);
    csv.push('\n');
    for r in &all_records {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    write_text(out, "rates.csv", &csv)?;
    // plot-ready (n, log2 error) pairs
    let mut plot = String::from("n,log2_error\n");
    for r in &all_records {
        if r.error > 0.0 {
            writeln!(plot, "{},{}", r.n, r.error.log2()).unwrap();
        }
    }
    write_text(out, "rates_plot.csv", &plot)?;
    write_text(out, "rates.txt", &summary)?;
    print!("{summary}");
    Ok(ok)
}

/// Operator condition table: bandwidth confinement, normalization,
/// averager norm sweep, compatibility proxy per s, symbol pattern (ξ, λ),
/// defect order.
pub fn cmd_conditions(cfg: &ExperimentConfig, out: &Path, _jobs: usize) -> Result<bool> {
    let op = cfg.build_operator()?;
    let cc = &cfg.conditions;
    let mut rows: Vec<serde_json::Value> = Vec::new();
    let mut text = String::new();
    let mut ok = true;
    writeln!(text, "operator: {}", op.label()).unwrap();

    // bandwidth: symbol vanishes outside the declared bandwidth
    let mut bw_ok = true;
    for j in 0..=8u32 {
        let bw = op.kern.bandwidth(j);
        for k in bw + 1..=bw + 8 {
            if op.kern.symbol(j, k).norm() > 0.0 || op.kern.symbol(j, -k).norm() > 0.0 {
                bw_ok = false;
            }
        }
    }
    writeln!(text, "bandwidth confinement: {}", if bw_ok { "PASS" } else { "FAIL" })
        .unwrap();
    rows.push(serde_json::json!({"check": "bandwidth", "status": if bw_ok {"PASS"} else {"FAIL"}}));
    ok &= bw_ok;

    // normalization at frequency zero
    let mut norm_ok = true;
    for j in 0..=8u32 {
        if (op.kern.symbol(j, 0) - Complex64::new(1.0, 0.0)).norm() > 1e-12
            || (op.avg.symbol(j, 0) - Complex64::new(1.0, 0.0)).norm() > 1e-12
        {
            norm_ok = false;
        }
    }
    writeln!(text, "normalization at k=0: {}", if norm_ok { "PASS" } else { "FAIL" })
        .unwrap();
    rows.push(serde_json::json!({"check": "normalization", "status": if norm_ok {"PASS"} else {"FAIL"}}));
    ok &= norm_ok;

    // averager norm sweep (time-domain L_q norms per level)
    match op.avg.kind() {
        AveragerKind::Function => {
            let mut vals = Vec::new();
            let mut bounded = true;
            for j in 0..=8u32 {
                for &q in &[1.0, 2.0, f64::INFINITY] {
                    let v = averager_norm_lqj(&op.avg, q, j)?;
                    if !v.is_finite() {
                        bounded = false;
                    }
                    vals.push(serde_json::json!({"j": j, "q": if q.is_infinite() {"inf".to_string()} else {q.to_string()}, "value": v}));
                }
            }
            writeln!(
                text,
                "averager L_q norm sweep: {}",
                if bounded { "PASS (bounded in j)" } else { "FAIL" }
            )
            .unwrap();
            rows.push(serde_json::json!({"check": "averager_norms", "status": if bounded {"PASS"} else {"FAIL"}, "values": vals}));
            ok &= bounded;
        }
        _ => {
            writeln!(text, "averager L_q norm sweep: N/A (delta kind)").unwrap();
            rows.push(serde_json::json!({"check": "averager_norms", "status": "N/A"}));
        }
    }

    // compatibility proxy per configured s
    for &s in &cc.s_values {
        let proxy = compat_condition_proxy(&op, s, cc.delta, 10)?;
        writeln!(
            text,
            "compat proxy s={s}: {} (HEURISTIC, slope {:.3})",
            if proxy.pass { "PASS" } else { "FAIL" },
            proxy.slope
        )
        .unwrap();
        rows.push(serde_json::json!({
            "check": "compat_proxy", "s": s,
            "status": if proxy.pass {"PASS"} else {"FAIL"},
            "slope": proxy.slope, "per_level": proxy.per_level,
        }));
        ok &= proxy.pass;
    }

    // averager symbol pattern at frequencies 2^u
    match check_cond(&op.avg, cc.umax) {
        Some((xi, lambda)) => {
            writeln!(
                text,
                "symbol pattern: xi = {xi}, lambda = {:.12} + {:.3e}i",
                lambda.re, lambda.im
            )
            .unwrap();
            rows.push(serde_json::json!({"check": "cond", "xi": xi, "lambda_re": lambda.re, "lambda_im": lambda.im}));
        }
        None => {
            writeln!(text, "symbol pattern: none detected").unwrap();
            rows.push(serde_json::json!({"check": "cond", "status": "none"}));
        }
    }

    // defect vanishing order
    match crate::kernels::taylor_defect(&op.kern, &op.avg, cc.defect_level) {
        Ok(est) => {
            let order = match est.order {
                DefectOrder::Finite(u) => u.to_string(),
                DefectOrder::Infinite => "inf".to_string(),
            };
            writeln!(text, "defect order: {order}").unwrap();
            rows.push(serde_json::json!({"check": "defect_order", "order": order, "leading_re": est.leading.re}));
        }
        Err(e) => {
            writeln!(text, "defect order: indeterminate ({e})").unwrap();
            rows.push(serde_json::json!({"check": "defect_order", "order": "indeterminate"}));
        }
    }

    write_text(out, "conditions.json", &serde_json::to_string_pretty(&rows)?)?;
    write_text(out, "conditions.txt", &text)?;
    print!("{text}");
    Ok(ok)
}

/// Littlewood-Paley equivalence sweep: ratio of the discrete operator
/// quasi-norm to the block norm across a small corpus.
pub fn cmd_lp_check(cfg: &ExperimentConfig, out: &Path, jobs: usize) -> Result<bool> {
    let op = cfg.build_operator()?;
    let spec = cfg.norm_spec()?;
    let phi = cfg.resolution();
    let d = op.d;

    let mut corpus = Vec::new();
    for j in 0..=cfg.norms.corpus_jmax {
        for lv in level_simplex(j, d) {
            if lv.total() == j {
                corpus.push(phi_j(&lv, phi));
            }
        }
    }
    corpus.push(korobov(2.0, d, 64)?);
    if let Ok(xi) = cfg.xi_for_lower(&op) {
        corpus.push(f_lower(4 + xi, xi, d));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    let jmax = cfg.norms.jmax;
    let rows: Vec<Result<(String, f64, f64, f64)>> = pool.install(|| {
        corpus
            .par_iter()
            .map(|f| {
                let p = f.model.to_trig_poly()?;
                let disc =
                    discrete_lp_quasi_norm(&op, &crate::operators::FunctionModel::exact(p.clone()), &spec, jmax)?;
                let block = match spec.family {
                    NormFamily::B => besov_norm(&p, &spec, phi)?,
                    NormFamily::F => tl_norm(&p, &spec, phi)?,
                };
                Ok((f.label.clone(), disc, block, disc / block))
            })
            .collect()
    });

    let mut csv = String::from("label,discrete,block,ratio\n");
    let mut text = String::new();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for row in rows {
        let (label, disc, block, ratio) = row?;
        writeln!(csv, "{label},{disc:e},{block:e},{ratio:e}").unwrap();
        writeln!(text, "{label:<28} discrete {disc:>11.4e}  block {block:>11.4e}  ratio {ratio:>9.4}")
            .unwrap();
        if ratio.is_finite() && ratio > 0.0 {
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        } else {
            lo = 0.0;
        }
    }
    let spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    let ok = spread <= cfg.norms.ratio_bound;
    writeln!(
        text,
        "ratio interval [{lo:.4}, {hi:.4}], spread {spread:.2} (bound {}): {}",
        cfg.norms.ratio_bound,
        if ok { "PASS" } else { "FAIL" }
    )
    .unwrap();
    write_text(out, "lp_check.csv", &csv)?;
    write_text(out, "lp_check.txt", &text)?;
    print!("{text}");
    Ok(ok)
}

/// Sharpness table: zeroth coefficient of the Smolyak output on the
/// lower-bound witness versus the counting prediction λ^d · C(n-1, d-1).
pub fn cmd_sharpness(cfg: &ExperimentConfig, out: &Path, _jobs: usize) -> Result<bool> {
    let op = cfg.build_operator()?;
    let d = op.d;
    let (xi, lambda) = match check_cond(&op.avg, cfg.conditions.umax) {
        Some(pair) => pair,
        None => {
            let msg = "averager shows no symbol pattern; sharpness table undefined\n";
            write_text(out, "sharpness.txt", msg)?;
            print!("{msg}");
            return Ok(false);
        }
    };
    let mut text = String::new();
    writeln!(text, "op = {}, d = {d}, xi = {xi}, lambda = {:.6}", op.label(), lambda.re)
        .unwrap();
    writeln!(text, "  {:>3}  {:>16}  {:>16}  {:>6}", "n", "c0", "predicted", "match")
        .unwrap();
    let mut ok = true;
    let mut rows = Vec::new();
    for n in cfg.sweep.n_min.max(d as u32)..=cfg.sweep.n_max {
        let f = f_lower(n, xi, d);
        let p = f.model.to_trig_poly()?;
        let c0 = c0_of_smolyak(&op, &p, n)?;
        let predicted = lambda.powu(d as u32) * binom(n - 1, d as u32 - 1) as f64;
        let exact = (c0 - predicted).norm() <= 1e-10 * predicted.norm().max(1.0);
        writeln!(
            text,
            "  {:>3}  {:>16.10e}  {:>16.10e}  {:>6}",
            n,
            c0.re,
            predicted.re,
            if exact { "yes" } else { "NO" }
        )
        .unwrap();
        rows.push(serde_json::json!({
            "n": n, "c0_re": c0.re, "c0_im": c0.im,
            "predicted_re": predicted.re, "match": exact,
        }));
        ok &= exact;
    }
    write_text(out, "sharpness.json", &serde_json::to_string_pretty(&rows)?)?;
    write_text(out, "sharpness.txt", &text)?;
    print!("{text}");
    Ok(ok)
}

/// Grid diagnostics: Smolyak sample counts, hyperbolic-cross cardinalities,
/// combination-plan coefficients.
pub fn cmd_grid_info(cfg: &ExperimentConfig, out: &Path, _jobs: usize) -> Result<bool> {
    let d = cfg.operator.d;
    let mut text = String::new();
    let mut ok = true;
    writeln!(text, "d = {d}").unwrap();
    writeln!(text, "  {:>3}  {:>12}  {:>12}", "n", "grid size", "cross size").unwrap();
    for n in cfg.sweep.n_min..=cfg.sweep.n_max {
        writeln!(
            text,
            "  {:>3}  {:>12}  {:>12}",
            n,
            smolyak_grid_size(n, d),
            hyperbolic_cross(n, d).len()
        )
        .unwrap();
    }
    let plan = combination_plan(cfg.sweep.n_max, d);
    let csum: i64 = plan.terms.iter().map(|(_, c)| c).sum();
    writeln!(
        text,
        "combination plan at n = {}: {} terms, coefficient sum {} ({})",
        cfg.sweep.n_max,
        plan.terms.len(),
        csum,
        if csum == 1 { "PASS" } else { "FAIL" }
    )
    .unwrap();
    ok &= csum == 1;
    for (j, c) in &plan.terms {
        writeln!(text, "    j = {:?}, c = {c}", j.0).unwrap();
    }
    write_text(out, "grid_info.txt", &text)?;
    write_text(
        out,
        "plan.json",
        &serde_json::to_string_pretty(&plan.to_json())?,
    )?;
    print!("{text}");
    Ok(ok)
}
