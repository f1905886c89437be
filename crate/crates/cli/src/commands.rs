use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};
use seqclass::approx::{en_brackets, tail_vs_lower_check, block_sine_check};
use seqclass::class::{counterexample, ClassId, DEFAULT_HORIZON};
use seqclass::convergence::{
    criterion_l1, criterion_sine, criterion_uniform, default_grid, l1_decay_experiment, phi_bound_sweep,
    rate_match, uniform_decay_experiment, CriterionReport, Verdict,
};
use seqclass::fit::{WindowFit, TREND_SLOPE_CAP};
use seqclass::seq::{parse_neg_rule, parse_rule};
use seqclass::trig::{
    identity_residuals, kernel_log_fit, natural_domain, reference_order, tail_evals, GridSpec,
};
use seqclass::{check_class, verify_inclusions, SequenceRule, TwoSidedSeq};

use crate::args::{parse_n_list, CommandKind, Params};
use crate::fail::Failure;

/// Window cap for `approx` when `--threshold-c` is not given.
pub const DEFAULT_WINDOW_C: f64 = 20.0;
/// Residual cap for the kernel identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

/// What a command produced: results for the report, a pass/fail status for
/// the exit code, a one-line summary and optional CSV text.
pub struct Outcome {
    pub results: Value,
    pub passed: bool,
    pub summary: String,
    pub csv: Option<String>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn pos_rule(p: &Params) -> Result<SequenceRule, Failure> {
    let spec = p.pos.as_deref().ok_or_else(|| Failure::usage("--pos is required"))?;
    Ok(parse_rule(spec)?)
}

fn two_sided(p: &Params) -> Result<TwoSidedSeq, Failure> {
    let pos = pos_rule(p)?;
    let neg = parse_neg_rule(p.neg.as_deref().unwrap_or("zero"))?;
    Ok(neg.pair_with(pos))
}

fn horizon(p: &Params) -> u64 {
    p.horizon.unwrap_or(DEFAULT_HORIZON)
}

fn slope_cap(p: &Params) -> f64 {
    p.threshold_slope.unwrap_or(TREND_SLOPE_CAP)
}

/// `--nlist`, else `4, 8, …, --nmax` (default 128).
fn n_list(p: &Params, default_max: u64) -> Result<Vec<u64>, Failure> {
    let ns = match &p.nlist {
        Some(spec) => parse_n_list(spec)?,
        None => parse_n_list(&format!("4..{}", p.nmax.unwrap_or(default_max)))?,
    };
    if ns.is_empty() {
        return Err(Failure::param("the n list is empty"));
    }
    if ns.contains(&0) || ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Failure::param("the n list must be positive and strictly increasing"));
    }
    Ok(ns)
}

fn grid(p: &Params, seq: &TwoSidedSeq, ns: &[u64]) -> Result<GridSpec, Failure> {
    let spec = default_grid(seq, ns);
    match p.grid {
        None => Ok(spec),
        Some(points) => Ok(GridSpec::new(natural_domain(seq), points)?.with_extra(spec.extra_points)?),
    }
}

fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6e}")
    } else {
        v.to_string()
    }
}

pub fn run(kind: CommandKind, p: &Params) -> Result<Outcome, Failure> {
    match kind {
        CommandKind::Check => check(p),
        CommandKind::VerifyInclusions => inclusions(p),
        CommandKind::Counterexample => dyadic_counterexample(p),
        CommandKind::Eval => eval(p),
        CommandKind::Uniform => uniform(p),
        CommandKind::Sine => sine(p),
        CommandKind::L1 => l1(p),
        CommandKind::Rate => rate(p),
        CommandKind::Approx => approx(p),
        CommandKind::Kernels => kernels(p),
    }
}

fn check(p: &Params) -> Result<Outcome, Failure> {
    let seq = pos_rule(p)?;
    let h = horizon(p);
    let which = p.class.as_deref().unwrap_or("all");
    if which == "all" {
        let mut verdicts = Vec::new();
        let mut out_of_domain = Vec::new();
        for class in ClassId::ALL {
            match check_class(&seq, class, h) {
                Ok(v) => verdicts.push(v),
                Err(seqclass::Error::Domain(msg)) => out_of_domain.push(json!({"class": class, "reason": msg})),
                Err(e) => return Err(e.into()),
            }
        }
        let members: Vec<String> = verdicts.iter().filter(|v| v.member).map(|v| v.class.to_string()).collect();
        return Ok(Outcome {
            summary: format!("member of [{}] up to {h}", members.join(", ")),
            results: json!({"verdicts": verdicts, "out_of_domain": out_of_domain}),
            passed: true,
            csv: None,
        });
    }
    let class: ClassId = which.parse()?;
    let v = check_class(&seq, class, h)?;
    Ok(Outcome {
        summary: format!("{class}: member = {}, K̂ = {} at m = {}", v.member, fmt(v.k_hat), v.witness_m),
        results: json!({"verdict": v}),
        passed: true,
        csv: None,
    })
}

fn inclusions(p: &Params) -> Result<Outcome, Failure> {
    let r = verify_inclusions(&pos_rule(p)?, horizon(p))?;
    Ok(Outcome {
        summary: format!("{} chain violations", r.violations.len()),
        passed: r.consistent(),
        results: to_value(&r),
        csv: None,
    })
}

fn dyadic_counterexample(p: &Params) -> Result<Outcome, Failure> {
    let r = counterexample(horizon(p))?;
    Ok(Outcome {
        summary: format!(
            "NBVS member = {}, GBVS member = {}, witness m = {}, reproduced = {}",
            r.nbvs.member, r.gbvs.member, r.gbvs.witness_m, r.reproduced
        ),
        passed: r.reproduced,
        results: to_value(&r),
        csv: None,
    })
}

fn eval(p: &Params) -> Result<Outcome, Failure> {
    let seq = two_sided(p)?;
    let ns = n_list(p, 128)?;
    let grid = grid(p, &seq, &ns)?.realize();
    let evals = tail_evals(&seq, &ns, &grid, reference_order(*ns.last().expect("nonempty")))?;
    let rows: Vec<Value> = ns
        .iter()
        .zip(&evals)
        .map(|(n, e)| json!({"n": n, "eval": e}))
        .collect();
    let mut csv = Vec::new();
    evals.last().expect("nonempty").write_csv(&mut csv).map_err(|e| Failure::io(e.to_string()))?;
    let last = evals.last().expect("nonempty");
    Ok(Outcome {
        summary: format!(
            "‖f - S_{}‖ ∈ [{}, {}]",
            ns.last().expect("nonempty"),
            fmt(last.sup_norm.lo),
            fmt(last.sup_norm.hi)
        ),
        results: json!({"grid_points": grid.len(), "rows": rows}),
        passed: true,
        csv: Some(String::from_utf8(csv).expect("ascii csv")),
    })
}

fn criterion_summary(r: &CriterionReport) -> String {
    let verdict = match r.verdict {
        Verdict::Satisfied => "satisfied",
        Verdict::Violated => "violated",
        Verdict::Inconclusive => "inconclusive",
    };
    let mut s = format!("{}: {verdict}", r.criterion);
    if let Some(w) = r.witness {
        let _ = write!(s, " (witness n = {w})");
    }
    if !r.hypotheses_hold() {
        s.push_str(", hypotheses not met");
    }
    s
}

fn decay_csv(rows: &[seqclass::convergence::DecayRow]) -> String {
    let mut out = String::from("n,sup,sup_hi,l1,l1_hi\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.n, r.sup.value, r.sup.hi, r.l1.value, r.l1.hi);
    }
    out
}

fn uniform(p: &Params) -> Result<Outcome, Failure> {
    let seq = two_sided(p)?;
    let report = criterion_uniform(&seq, horizon(p))?;
    let ns = n_list(p, 128)?;
    let table = uniform_decay_experiment(&seq, &ns, Some(&grid(p, &seq, &ns)?))?;
    Ok(Outcome {
        summary: criterion_summary(&report),
        passed: report.verdict != Verdict::Violated,
        csv: Some(decay_csv(&table.rows)),
        results: json!({"criterion": report, "decay": table}),
    })
}

fn sine(p: &Params) -> Result<Outcome, Failure> {
    let b = pos_rule(p)?;
    let report = criterion_sine(&b, horizon(p))?;
    let seq = TwoSidedSeq::sine_series(b);
    let ns = n_list(p, 128)?;
    let table = uniform_decay_experiment(&seq, &ns, Some(&grid(p, &seq, &ns)?))?;
    Ok(Outcome {
        summary: criterion_summary(&report),
        passed: report.verdict != Verdict::Violated,
        csv: Some(decay_csv(&table.rows)),
        results: json!({"criterion": report, "decay": table}),
    })
}

fn l1(p: &Params) -> Result<Outcome, Failure> {
    let seq = two_sided(p)?;
    let report = criterion_l1(&seq, horizon(p))?;
    let ns = n_list(p, 128)?;
    let table = l1_decay_experiment(&seq, &ns, Some(&grid(p, &seq, &ns)?))?;
    let mut csv = String::from("n,distance,distance_hi,phi_lower,tau_gap_hi,block_log_max\n");
    for r in &table.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.n, r.distance.value, r.distance.hi, r.phi_lower, r.tau_gap.hi, r.block_log_max
        );
    }
    Ok(Outcome {
        summary: format!("{}; decreasing = {}, dominated = {}", criterion_summary(&report), table.decreasing, table.dominated),
        passed: report.verdict != Verdict::Violated && table.dominated,
        csv: Some(csv),
        results: json!({"criterion": report, "decay": table}),
    })
}

fn rate(p: &Params) -> Result<Outcome, Failure> {
    let seq = two_sided(p)?;
    let psi = parse_rule(p.psi.as_deref().ok_or_else(|| Failure::usage("--psi is required"))?)?;
    let ns = n_list(p, 128)?;
    let r = rate_match(&seq, psi, &ns, Some(&grid(p, &seq, &ns)?))?;
    let cap = p.threshold_c.unwrap_or(f64::INFINITY);
    let slope = slope_cap(p);
    let within = [&r.c1, &r.c2, &r.c3]
        .iter()
        .all(|c| c.sup <= cap && c.sup.is_finite() && c.slope.map_or(true, |s| s < slope));
    let mut csv = String::from("n,psi,distance_hi,phi_lower,en_lower,coefficient_term\n");
    for row in &r.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            row.n, row.psi, row.distance.hi, row.phi_lower, row.en_lower, row.coefficient_term
        );
    }
    Ok(Outcome {
        summary: format!("C1 = {}, C2 = {}, C3 = {}, consistent = {within}", fmt(r.c1.sup), fmt(r.c2.sup), fmt(r.c3.sup)),
        passed: within,
        csv: Some(csv),
        results: to_value(&r),
    })
}

fn approx(p: &Params) -> Result<Outcome, Failure> {
    let seq = two_sided(p)?;
    let ns = n_list(p, 128)?;
    let spec = grid(p, &seq, &ns)?;
    let hypotheses = criterion_uniform(&seq, horizon(p))?;
    let brackets = en_brackets(&seq, &ns, None, Some(&spec))?;
    let up: Vec<(u64, f64)> = brackets.iter().filter_map(|b| b.q_over_upper.map(|r| (b.n, r))).collect();
    let lo: Vec<(u64, f64)> = brackets.iter().filter_map(|b| b.lower_over_q.map(|r| (b.n, r))).collect();
    let (q_upper, lower_q) = (WindowFit::fit(&up), WindowFit::fit(&lo));
    let cap = p.threshold_c.unwrap_or(DEFAULT_WINDOW_C);
    let slope = slope_cap(p);
    let within = q_upper.within(cap, slope) && lower_q.within(cap, slope);
    let ordered = brackets.iter().all(|b| b.is_ordered());
    let tail_vs_lower = match tail_vs_lower_check(&seq, &brackets) {
        Ok(t) => to_value(&t),
        Err(seqclass::Error::Domain(msg)) => json!({"skipped": msg}),
        Err(e) => return Err(e.into()),
    };
    let block_sine = block_sine_check(&seq, &ns, &spec)?;
    let mut csv = String::from("n,lower,upper,q,q_over_upper,lower_over_q\n");
    for b in &brackets {
        let ratio = |r: Option<f64>| r.map_or(String::new(), |v| v.to_string());
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            b.n,
            b.lower,
            b.upper.hi,
            b.q.total.value,
            ratio(b.q_over_upper),
            ratio(b.lower_over_q)
        );
    }
    Ok(Outcome {
        summary: format!(
            "window C = {}/{} (cap {cap}), slopes {}/{}, ordered = {ordered}",
            fmt(q_upper.c),
            fmt(lower_q.c),
            q_upper.slope.map_or("-".into(), |s| format!("{s:+.3}")),
            lower_q.slope.map_or("-".into(), |s| format!("{s:+.3}")),
        ),
        passed: within && ordered,
        csv: Some(csv),
        results: json!({
            "hypotheses": {"uniform_criterion": hypotheses.verdict, "standing": hypotheses.hypotheses},
            "brackets": brackets,
            "q_over_upper": q_upper,
            "lower_over_q": lower_q,
            "tail_vs_lower": tail_vs_lower,
            "block_sine_sums": block_sine,
        }),
    })
}

fn kernels(p: &Params) -> Result<Outcome, Failure> {
    let which = p.check.as_deref().unwrap_or("all");
    if !matches!(which, "all" | "identities" | "norms" | "phi") {
        return Err(Failure::param(format!("unknown kernel check `{which}`")));
    }
    let mut results = serde_json::Map::new();
    let mut passed = true;
    let mut summary = Vec::new();
    if matches!(which, "all" | "identities") {
        let kmax = p.kmax.unwrap_or(64);
        let points = p.grid.unwrap_or(4096);
        let grid = GridSpec::full(points)?.realize();
        let r = identity_residuals(kmax, &grid.points, kmax);
        let ok = r.difference < IDENTITY_TOLERANCE && r.symmetry < IDENTITY_TOLERANCE;
        passed &= ok;
        summary.push(format!("identity residuals {:.1e}/{:.1e}", r.difference, r.symmetry));
        results.insert("identities".into(), json!({"residuals": r, "tolerance": IDENTITY_TOLERANCE, "passed": ok}));
    }
    if matches!(which, "all" | "norms") {
        let ks = match &p.nlist {
            Some(s) => parse_n_list(s)?,
            None => parse_n_list("4..512")?,
        };
        let fit = kernel_log_fit(&ks);
        let cap = p.threshold_c.unwrap_or(f64::INFINITY);
        let ok = fit.fitted.sup <= cap && fit.fitted.slope.map_or(true, |s| s.abs() < slope_cap(p));
        passed &= ok;
        summary.push(format!("norm/log k ≤ {}", fmt(fit.fitted.sup)));
        results.insert("norms".into(), json!({"fit": fit, "passed": ok}));
    }
    if matches!(which, "all" | "phi") {
        let n_max = p.nmax.unwrap_or(512);
        let points = p.grid.unwrap_or(1 << 14).max(2);
        let xs: Vec<f64> = (0..points)
            .map(|i| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / (points - 1) as f64)
            .collect();
        let rows = phi_bound_sweep(n_max, &xs)?;
        let worst = rows.iter().map(|r| r.max_abs).fold(0.0, f64::max);
        let ok = rows.iter().all(|r| r.holds);
        passed &= ok;
        summary.push(format!("max |φ| = {worst:.4}"));
        results.insert("phi".into(), json!({"max_abs": worst, "bound": seqclass::convergence::phi_sup_bound(), "passed": ok, "rows": rows}));
    }
    Ok(Outcome {
        results: Value::Object(results),
        passed,
        summary: summary.join(", "),
        csv: None,
    })
}
