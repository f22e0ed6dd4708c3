use std::collections::BTreeSet;
use std::path::Path;

use serde_json::json;

use crate::algebra::{FieldContext, GroupElem, XiElem};
use crate::characters::{verify_decoupled_grid, CharacterSpec};
use crate::error::{Error, Result};
use crate::measures::io::{coset_measure_to_entries, measure_to_entries, point_measure_from_entries, read_measure, PointEntry};
use crate::measures::{
    absorb_lift, affine_step_measure, commuting_average, e_bs, e_lamp, lambda_saturation, support_is_saturated,
    theta_of, PointMeasure, SparseMeasure,
};
use crate::rational::{format_rational, parse_rational, to_f64, Rational};
use crate::spectrum::{
    conv_power_entropy, furstenberg_entropy, plan_spectrum, spectrum_value, subsum_classify, subsum_enumerate,
    subsum_member, BetaSeq,
};
use crate::walk::{
    contraction_stat, empirical_stationary, fit_geometric, invariance_stats, sample_path, stationarity_residual,
    BallMeasure, WalkRecordJson,
};

use super::config::{Format, RunConfig, Subcommand};
use super::report::{Outcome, Status};

pub fn execute(c: &RunConfig) -> Result<Outcome> {
    c.validate()?;
    match c.subcommand {
        Subcommand::CheckAbsorbing => check_absorbing(c),
        Subcommand::Construct => construct(c),
        Subcommand::Completion => completion(c),
        Subcommand::Simulate => simulate(c),
        Subcommand::Stationary => stationary(c),
        Subcommand::Entropy => entropy(c),
        Subcommand::Spectrum => spectrum(c),
        Subcommand::Subsum => subsum(c),
        Subcommand::Decouple => decouple(c),
    }
}

fn context(c: &RunConfig) -> Result<FieldContext> {
    match &c.context {
        Some(cc) => cc.build(),
        None => FieldContext::baumslag_solitar(2),
    }
}

fn require<'a>(v: &'a Option<String>, what: &str) -> Result<&'a str> {
    v.as_deref().ok_or_else(|| Error::Parse(format!("missing input {what}")))
}

/// `e-lamp`, `e-bs`, `file:<path>` (or a `.json` path), or inline
/// `(x | n)@w, (x | n)@w, …`.
pub fn parse_measure(c: &RunConfig, desc: &str) -> Result<SparseMeasure> {
    let named = match desc.trim() {
        "e-lamp" => Some(e_lamp()),
        "e-bs" => Some(e_bs()),
        _ => None,
    };
    if let Some(t) = named {
        if let Some(cc) = &c.context {
            cc.build()?.check(&t.ctx())?;
        }
        return Ok(t);
    }
    let ctx = context(c)?;
    if let Some(path) = file_ref(desc) {
        return read_measure(ctx, path);
    }
    let pairs = split_inline(desc)?
        .into_iter()
        .map(|(x, w)| Ok((GroupElem::parse(ctx, x)?, parse_rational(w)?)))
        .collect::<Result<Vec<_>>>()?;
    SparseMeasure::from_pairs(ctx, pairs)
}

fn parse_point_measure(ctx: FieldContext, desc: &str) -> Result<PointMeasure> {
    if let Some(path) = file_ref(desc) {
        let entries: Vec<PointEntry> = serde_json::from_slice(&std::fs::read(path)?)?;
        return point_measure_from_entries(ctx, &entries);
    }
    let mut out = PointMeasure::new();
    for (x, w) in split_inline(desc)? {
        *out.entry(XiElem::parse(ctx, x)?).or_default() += parse_rational(w)?;
    }
    Ok(out)
}

fn file_ref(desc: &str) -> Option<&Path> {
    let d = desc.trim();
    d.strip_prefix("file:").or_else(|| d.ends_with(".json").then_some(d)).map(|p| Path::new(p.trim()))
}

fn split_inline(desc: &str) -> Result<Vec<(&str, &str)>> {
    desc.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            item.rsplit_once('@')
                .map(|(x, w)| (x.trim(), w.trim()))
                .ok_or_else(|| Error::Parse(format!("expected <elem>@<weight>, got {item:?}")))
        })
        .collect()
}

fn measure(c: &RunConfig) -> Result<SparseMeasure> {
    parse_measure(c, require(&c.inputs.measure, "measure")?)
}

fn measure_json(t: &SparseMeasure) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(&measure_to_entries(t))?;
    v.push(b'\n');
    Ok(v)
}

fn check_absorbing(c: &RunConfig) -> Result<Outcome> {
    let t = measure(c)?;
    let check = t.is_absorbing();
    let status = if check.absorbing { Status::Ok } else { Status::CheckFailed };
    Outcome::new(status, json!({ "context": t.ctx().to_string(), "absorbing": check.absorbing, "witness": check.witness }))
}

fn construct(c: &RunConfig) -> Result<Outcome> {
    let op = c.inputs.op.as_deref().unwrap_or("absorb-lift");
    let t = match op {
        "absorb-lift" => absorb_lift(&measure(c)?)?,
        "commuting-average" => commuting_average(&measure(c)?)?,
        "affine-step" => {
            let ctx = context(c)?;
            let kappa = parse_point_measure(ctx, require(&c.inputs.kappa, "kappa")?)?;
            let t_minus = parse_point_measure(ctx, require(&c.inputs.t_minus, "t_minus")?)?;
            let delta = parse_rational(require(&c.inputs.delta, "delta")?)?;
            affine_step_measure(ctx, &kappa, &t_minus, &delta)?
        }
        "e-lamp" => e_lamp(),
        "e-bs" => e_bs(),
        other => return Err(Error::Parse(format!("unknown construct op {other:?}"))),
    };
    let check = t.is_absorbing();
    let status = if check.absorbing { Status::Ok } else { Status::CheckFailed };
    Ok(Outcome::new(
        status,
        json!({
            "op": op,
            "context": t.ctx().to_string(),
            "absorbing": check.absorbing,
            "z_drift": format_rational(&t.z_drift()),
            "measure": measure_to_entries(&t),
        }),
    )?
    .with_artifact("measure.json", measure_json(&t)?))
}

fn completion(c: &RunConfig) -> Result<Outcome> {
    let t = measure(c)?;
    let check = t.is_absorbing();
    if !check.absorbing {
        return Outcome::new(
            Status::PreconditionViolated,
            json!({ "absorbing": false, "witness": check.witness, "message": "completion needs an absorbing measure" }),
        );
    }
    let theta = theta_of(&t)?;
    let keys: Vec<_> = t.weights().keys().map(GroupElem::coset_key).collect();
    let entries = coset_measure_to_entries(&theta);
    let mut bytes = serde_json::to_vec_pretty(&entries)?;
    bytes.push(b'\n');
    Ok(Outcome::new(
        Status::Ok,
        json!({
            "absorbing": true,
            "theta": entries,
            "z_drift_tau": format_rational(&t.z_drift()),
            "z_drift_theta": format_rational(&theta.z_drift()),
            "support_saturated": support_is_saturated(&t, &theta),
            "saturation_size": lambda_saturation(&keys).len(),
        }),
    )?
    .with_artifact("theta.json", bytes))
}

fn simulate(c: &RunConfig) -> Result<Outcome> {
    let t = measure(c)?;
    let b = &c.budgets;
    let record = sample_path(&t, b.steps as usize, c.seed)?;
    let mut result = json!({ "walk": WalkRecordJson::from(&record) });
    if b.trials > 0 {
        let curve = contraction_stat(&t, b.steps as usize, b.k, b.trials, c.seed, b.window.1, &b.guard)?;
        let fit = fit_geometric(&curve, (b.steps as usize / 8).max(1), b.steps as usize).ok();
        result["contraction"] = json!({
            "k": b.k,
            "trials": b.trials,
            "curve": curve,
            "fit": fit.map(|(c0, rho)| json!({ "c": c0, "rho": rho })),
            "contraction_moment": format_rational(&t.contraction_moment()),
        });
    }
    let mut out = Outcome::new(Status::Ok, result)?;
    if c.output.format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["k", "step", "position", "exponent"])?;
        for (k, z) in record.partials.iter().enumerate() {
            let step = if k == 0 { String::new() } else { record.steps[k - 1].to_string() };
            w.write_record([k.to_string(), step, z.to_string(), z.n.to_string()])?;
        }
        out = out.with_artifact("path.csv", w.into_inner().map_err(|e| Error::Io(e.into_error()))?);
    }
    Ok(out)
}

fn ball_csv(nu: &BallMeasure, exact: bool) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    nu.write_csv(&mut buf, !exact)?;
    Ok(buf)
}

fn stationary(c: &RunConfig) -> Result<Outcome> {
    let t = measure(c)?;
    let b = &c.budgets;
    let (nu, diag) = empirical_stationary(&t, b.samples, b.window, c.seed, &b.guard)?;
    let residual = stationarity_residual(&t, &nu)?;
    let invariance = if b.window.0 <= 0 && b.window.1 > 0 { Some(invariance_stats(&nu)?) } else { None };
    let status = match b.tolerance {
        Some(tol) if residual.tv > tol => Status::CheckFailed,
        _ => Status::Ok,
    };
    Ok(Outcome::new(
        status,
        json!({
            "window": b.window,
            "diagnostics": diag,
            "residual": residual,
            "invariance": invariance,
        }),
    )?
    .with_artifact("stationary.csv", ball_csv(&nu, b.exact)?))
}

fn nu_for_entropy(c: &RunConfig, t: &SparseMeasure) -> Result<BallMeasure> {
    let b = &c.budgets;
    match c.inputs.nu.as_deref().unwrap_or("sample") {
        "haar" => BallMeasure::haar_o(t.ctx(), b.window.0, b.window.1),
        "sample" => Ok(empirical_stationary(t, b.samples, b.window, c.seed, &b.guard)?.0),
        path => BallMeasure::read_csv(t.ctx(), std::fs::File::open(path)?),
    }
}

fn entropy(c: &RunConfig) -> Result<Outcome> {
    let t = measure(c)?;
    let b = &c.budgets;
    let nu = nu_for_entropy(c, &t)?;
    let level = c.inputs.level.unwrap_or(nu.level());
    let furstenberg = furstenberg_entropy(&t, &nu, level)?;
    let powers = conv_power_entropy(&t, b.n_max, b.max_support)?;
    let tail = powers.tail_average(3);
    let relative_gap = tail.map(|h| (furstenberg.estimate - h).abs() / h.abs().max(f64::MIN_POSITIVE));
    let status = match (b.tolerance, relative_gap) {
        (Some(tol), Some(gap)) if gap > tol => Status::CheckFailed,
        _ => Status::Ok,
    };
    let mut out = Outcome::new(
        status,
        json!({
            "furstenberg": furstenberg,
            "conv_power": powers,
            "conv_tail_average": tail,
            "relative_gap": relative_gap,
            "drift_log_q": to_f64(&t.z_drift()) * (t.ctx().q() as f64).ln(),
        }),
    )?;
    if c.output.format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        for s in &powers.steps {
            w.serialize(s)?;
        }
        out = out.with_artifact("conv_power.csv", w.into_inner().map_err(|e| Error::Io(e.into_error()))?);
    }
    Ok(out)
}

fn beta(c: &RunConfig) -> Result<BetaSeq> {
    BetaSeq::parse(require(&c.inputs.beta, "beta")?)
}

fn spectrum(c: &RunConfig) -> Result<Outcome> {
    let beta = beta(c)?;
    let h_o = parse_rational(c.inputs.h_sigma_o.as_deref().unwrap_or("1"))?;
    let plan = plan_spectrum(&beta, &h_o)?;
    let n = c.budgets.truncation;
    let summary = plan.summary(n);
    let value = match &c.inputs.subset {
        Some(s) => {
            let set: BTreeSet<usize> = s.iter().copied().collect();
            let v = spectrum_value(&plan, &set, n)?;
            Some(json!({
                "subset": set,
                "value": format_rational(&v.value),
                "cross_check": format_rational(&v.cross_check),
                "agree": v.value == v.cross_check,
            }))
        }
        None => None,
    };
    let ok = summary.invariants == "ok" && value.as_ref().is_none_or(|v| v["agree"] == true);
    Outcome::new(if ok { Status::Ok } else { Status::CheckFailed }, json!({ "plan": summary, "spectrum_value": value }))
}

fn subsum(c: &RunConfig) -> Result<Outcome> {
    let beta = beta(c)?;
    let n = c.budgets.truncation;
    let op = c.inputs.op.as_deref().unwrap_or("classify");
    let sums_csv = |sums: &[Rational]| -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["sum"])?;
        for s in sums {
            w.write_record([format_rational(s)])?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    };
    let (result, sums) = match op {
        "classify" => {
            let r = subsum_classify(&beta, n)?;
            (serde_json::to_value(&r)?, None)
        }
        "enumerate" => {
            let s = subsum_enumerate(&beta, n)?.to_vec();
            let v = json!({
                "truncation_level": n,
                "count": s.len(),
                "B_N": format_rational(&beta.remainder(n)),
                "sums": s.iter().map(format_rational).collect::<Vec<_>>(),
            });
            (v, Some(s))
        }
        "member" => {
            let target = parse_rational(require(&c.inputs.target, "target")?)?;
            let m = subsum_member(&beta, &target, n)?;
            (json!({ "target": format_rational(&target), "truncation_level": n, "membership": m }), None)
        }
        other => return Err(Error::Parse(format!("unknown subsum op {other:?} (classify|enumerate|member)"))),
    };
    let mut out = Outcome::new(Status::Ok, result)?;
    if let (Format::Csv, Some(s)) = (c.output.format, sums) {
        out = out.with_artifact("subsums.csv", sums_csv(&s)?);
    }
    Ok(out)
}

fn decouple(c: &RunConfig) -> Result<Outcome> {
    let ctx = context(c)?;
    let spec = CharacterSpec::new(ctx, c.inputs.char_shift.unwrap_or(-2))?;
    let z1 = XiElem::parse(ctx, c.inputs.z1.as_deref().unwrap_or("1"))?;
    let z2 = match &c.inputs.z2 {
        Some(s) => XiElem::parse(ctx, s)?,
        None => &XiElem::one(ctx) + &ctx.uniformizer(),
    };
    let range = c.inputs.m_range.unwrap_or((-3, 4));
    let report = verify_decoupled_grid(&spec, &z1, &z2, range, c.budgets.reps_per_m)?;
    // Control pairs that violate the hypotheses are expected to be nonzero.
    let status = if report.hypotheses.status == "ok" && !report.all_zero { Status::CheckFailed } else { Status::Ok };
    let mut out = Outcome::new(status, &report)?;
    if c.output.format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["m", "y", "value", "re", "im", "exact_zero", "case"])?;
        for e in &report.entries {
            w.write_record([
                e.m.to_string(),
                e.y.clone(),
                e.value.clone(),
                format!("{:.16e}", e.value_float[0]),
                format!("{:.16e}", e.value_float[1]),
                e.exact_zero.to_string(),
                serde_json::to_value(e.case)?.as_str().unwrap_or_default().to_string(),
            ])?;
        }
        out = out.with_artifact("decouple.csv", w.into_inner().map_err(|e| Error::Io(e.into_error()))?);
    }
    Ok(out)
}

