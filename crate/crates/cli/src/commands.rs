use serde_json::json;

use dyadic_nets::discrepancy::DiscrepancyContext;
use dyadic_nets::nets::{load_generators, random_shift, rescale_to_count, verify_box_counts, NetSource};
use dyadic_nets::norms::{
    default_theta, exp_orlicz_estimate, l2_m_exact, lq_norm_mc, scaling_sweep, ApproximationIntegrand,
    DiscrepancyIntegrand, McConfig, NormReport, QGrid, SweepConfig,
};
use dyadic_nets::verify::{run_suite, Status, SuiteOptions};
use dyadic_nets::{DigitShift, Error, GeneratorSet, PointSet};

use crate::output::{emit, num, opt, RunConfig, Table};
use crate::{Common, Failure, Format, SweepArgs, VerifyArgs};

const DESK_MAX_S: u32 = 10;
const DESK_MAX_N: usize = 4;
/// Box counts are checked up to this many points (log2).
const BOX_CHECK_MAX_S: u32 = 20;

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn desk_guard(c: &Common, n: usize, s: u32) -> Result<(), Failure> {
    if !c.large && (s > DESK_MAX_S || n > DESK_MAX_N) {
        return Err(input(format!(
            "n = {n}, s = {s} exceeds the desk limits (n <= {DESK_MAX_N}, s <= {DESK_MAX_S}); pass --large to run anyway"
        )));
    }
    Ok(())
}

fn load(c: &Common, s: Option<u32>) -> Result<GeneratorSet, Failure> {
    let n = match c.net {
        NetSource::File(_) => c.n,
        _ => Some(c.n.unwrap_or(2)),
    };
    let g = load_generators(&c.net, n, s)?;
    if let NetSource::File(_) = c.net {
        if c.n.is_some_and(|n| n != g.dim()) || s.is_some_and(|s| s != g.resolution()) {
            return Err(Error::DimensionMismatch {
                n: c.n.unwrap_or(g.dim()),
                s: s.unwrap_or(g.resolution()),
                got_n: g.dim(),
                got_s: g.resolution(),
            }
            .into());
        }
    }
    desk_guard(c, g.dim(), g.resolution())?;
    Ok(g)
}

fn shift_for(c: &Common, g: &GeneratorSet) -> Option<DigitShift> {
    c.shift_seed.map(|seed| random_shift(g.dim(), g.resolution(), seed))
}

fn config(c: &Common, command: &'static str, g: Option<&GeneratorSet>, default: Format) -> RunConfig {
    RunConfig {
        command,
        net: c.net.to_string(),
        n: g.map_or(c.n.unwrap_or(2), GeneratorSet::dim),
        s: g.map(GeneratorSet::resolution).or(c.s),
        count: c.count,
        shift_seed: c.shift_seed,
        shifts: None,
        q_grid: None,
        samples: None,
        seed: c.seed,
        exact: c.exact,
        theta: None,
        stratified: c.stratified,
        cap: c.cap,
        s_range: None,
        format: c.format.unwrap_or(default),
    }
}

fn mc_config(c: &Common) -> Result<McConfig, Failure> {
    if c.samples == 0 {
        return Err(Error::ZeroSamples.into());
    }
    Ok(McConfig::new(c.samples, c.seed)
        .workers(c.workers)
        .stratified(c.stratified))
}

fn point_strings(p: &PointSet, exact: bool) -> Vec<Vec<String>> {
    let den = p.denominator();
    p.iter()
        .map(|x| {
            x.iter()
                .map(|&v| {
                    if exact {
                        format!("{v}/{den}")
                    } else {
                        num(v as f64 / den as f64)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn gen(c: &Common) -> Result<(), Failure> {
    let s = match (c.s, c.count) {
        (Some(s), _) => Some(s),
        (None, Some(0)) => return Err(input("--count must be positive")),
        (None, Some(count)) => Some(count.next_power_of_two().trailing_zeros()),
        (None, None) => None,
    };
    let g = load(c, s)?;
    let shift = shift_for(c, &g);
    let (points, side, dropped) = match c.count {
        Some(count) => {
            let r = rescale_to_count(&g, count, shift.as_ref())?;
            (r.points, r.side.to_string(), r.dropped)
        }
        None => (g.net_points(shift.as_ref())?, "1".to_string(), 0),
    };
    let rows = point_strings(&points, c.exact);
    let mut table = Table::new((1..=g.dim()).map(|j| format!("x{j}")));
    for r in &rows {
        table.push(r.clone());
    }
    let payload = json!({
        "n": g.dim(),
        "s": g.resolution(),
        "count": points.len(),
        "side": side,
        "dropped": dropped,
        "points": if c.exact {
            json!(rows)
        } else {
            json!(points.to_f64())
        },
    });
    emit(&config(c, "gen", Some(&g), Format::Csv), c.out.as_deref(), &table, payload)
}

pub fn certify(c: &Common) -> Result<(), Failure> {
    let g = load(c, c.s)?;
    let q = g.certify_deficiency(c.cap);
    let s = g.resolution();
    let boxes = if s <= BOX_CHECK_MAX_S {
        Some(verify_box_counts(&g.net_points(None)?, q.deficiency)?)
    } else {
        None
    };
    let method = q
        .method
        .map(|m| serde_json::to_value(m).expect("serializes"))
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    let mut table = Table::new([
        "n",
        "s",
        "deficiency",
        "dual_rt_weight",
        "exhaustive",
        "method",
        "box_counts",
    ]);
    table.push(vec![
        g.dim().to_string(),
        s.to_string(),
        q.deficiency.to_string(),
        q.dual_rt_weight.map(|w| w.to_string()).unwrap_or_default(),
        q.exhaustive.to_string(),
        method,
        boxes.map_or("skipped".to_string(), |b| if b { "pass" } else { "fail" }.to_string()),
    ]);
    let payload = json!({
        "n": g.dim(),
        "s": s,
        "deficiency": q.deficiency,
        "dual_rt_weight": q.dual_rt_weight,
        "exhaustive": q.exhaustive,
        "method": q.method,
        "box_counts": boxes,
    });
    emit(&config(c, "certify", Some(&g), Format::Json), c.out.as_deref(), &table, payload)?;
    if boxes == Some(false) && q.exhaustive {
        return Err(Failure::Identity(format!(
            "box counts fail at the certified deficiency {}",
            q.deficiency
        )));
    }
    Ok(())
}

pub fn verify(v: &VerifyArgs) -> Result<(), Failure> {
    let c = &v.common;
    let g = load(c, c.s)?;
    let shift = shift_for(c, &g);
    let opts = SuiteOptions {
        corrupt_dual: v.corrupt_dual,
        ..Default::default()
    };
    let report = run_suite(&g, shift, &opts)?;
    let mut table = Table::new(["identity", "status", "checked", "anchor", "detail", "witness"]);
    for r in &report.results {
        let status = match r.status {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        };
        table.push(vec![
            r.name.to_string(),
            status.to_string(),
            r.checked.to_string(),
            r.anchor.to_string(),
            r.detail.clone(),
            r.witness.clone().unwrap_or_default(),
        ]);
    }
    let payload = serde_json::to_value(&report).expect("report serializes");
    emit(&config(c, "verify", Some(&g), Format::Json), c.out.as_deref(), &table, payload)?;
    if !report.passed() {
        let failed: Vec<&str> = report
            .results
            .iter()
            .filter(|r| r.status == Status::Fail)
            .map(|r| r.name)
            .collect();
        return Err(Failure::Identity(failed.join(", ")));
    }
    Ok(())
}

fn norm_rows(table: &mut Table, rep: &NormReport) {
    for e in &rep.estimates {
        table.push(vec![
            rep.function.clone(),
            num(e.q),
            num(e.estimate),
            num(e.stderr),
            opt(e.normalized),
        ]);
    }
}

pub fn norms(c: &Common) -> Result<(), Failure> {
    let g = load(c, c.s)?;
    let (n, s) = (g.dim(), g.resolution());
    let shift = shift_for(c, &g);
    let grid = c.q_grid.clone().unwrap_or_default();
    let mc = mc_config(c)?;
    let theta = c.theta.unwrap_or_else(|| default_theta(n));

    // with a shift seed, 𝒟_N is measured for that shift; otherwise over (Y, T)
    let d = DiscrepancyIntegrand::new(&g, shift.as_ref());
    let drep = lq_norm_mc(&d, &grid, &mc, "discrepancy")?.with_normalization(n, s);
    let m = ApproximationIntegrand::new(&g, None);
    let mrep = lq_norm_mc(&m, &grid, &mc, "approximation")?.with_normalization(n, s);
    let dorl = exp_orlicz_estimate(&drep, theta)?;
    let morl = exp_orlicz_estimate(&mrep, theta)?;
    let l2 = match DiscrepancyContext::with_cap(g.clone(), None, c.cap).and_then(|ctx| l2_m_exact(&ctx)) {
        Ok(v) => Some(v),
        Err(Error::RouteUnavailable(_)) | Err(Error::EnumerationCap { .. }) => None,
        Err(e) => return Err(e.into()),
    };

    let mut table = Table::new(["function", "q", "estimate", "stderr", "normalized"]);
    norm_rows(&mut table, &drep);
    norm_rows(&mut table, &mrep);
    if let Some(l2) = &l2 {
        let norm2 = 2f64.powf((n as f64 + 1.0) / 2.0) * (s as f64).powf((n as f64 - 1.0) / 2.0);
        let estimate = if c.exact {
            format!("sqrt({}/{})", l2.dyadic_part, l2.divisor)
        } else {
            num(l2.norm)
        };
        table.push(vec![
            "approximation_l2_exact".into(),
            num(2.0),
            estimate,
            num(0.0),
            num(l2.norm / norm2),
        ]);
    }
    for (name, o) in [("discrepancy_exp_orlicz", &dorl), ("approximation_exp_orlicz", &morl)] {
        table.push(vec![name.into(), num(o.argmax_q), num(o.value), String::new(), String::new()]);
    }
    let payload = json!({
        "n": n,
        "s": s,
        "discrepancy": drep,
        "approximation": mrep,
        "approximation_l2_exact": l2,
        "exp_orlicz": { "discrepancy": dorl, "approximation": morl },
    });
    let mut cfg = config(c, "norms", Some(&g), Format::Csv);
    cfg.q_grid = Some(grid.values().to_vec());
    cfg.samples = Some(mc.samples);
    cfg.theta = Some(theta);
    emit(&cfg, c.out.as_deref(), &table, payload)
}

pub fn sweep(a: &SweepArgs) -> Result<(), Failure> {
    let c = &a.common;
    if let NetSource::File(_) = c.net {
        return Err(input("sweep needs a builtin net family"));
    }
    if c.s.is_some() {
        return Err(input("sweep takes --s-min/--s-max, not --s"));
    }
    if a.s_min > a.s_max {
        return Err(input(format!("--s-min {} > --s-max {}", a.s_min, a.s_max)));
    }
    let n = c.n.unwrap_or(2);
    desk_guard(c, n, a.s_max)?;
    let shifts = c.shifts.unwrap_or(8);
    if shifts == 0 {
        return Err(input("--shifts must be positive"));
    }
    let grid = match &c.q_grid {
        Some(g) => g.clone(),
        None => QGrid::new(vec![2.0, 4.0, 8.0])?,
    };
    let cfg = SweepConfig {
        n,
        s_values: (a.s_min..=a.s_max).collect(),
        shifts,
        grid: grid.clone(),
        mc: mc_config(c)?,
        with_approximation: !a.no_approximation,
    };
    let net = c.net.clone();
    let table_data = scaling_sweep(&cfg, |s| load_generators(&net, Some(n), Some(s)))?;

    let mut table = Table::new([
        "kind", "s", "shift", "q", "estimate", "stderr", "ratio", "normalized", "min", "median", "max",
    ]);
    for r in &table_data.rows {
        table.push(vec![
            "row".into(),
            r.s.to_string(),
            r.shift.to_string(),
            num(r.q),
            num(r.estimate),
            num(r.stderr),
            num(r.ratio),
            num(r.normalized),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    for r in &table_data.summary {
        let mut row = vec![String::new(); 11];
        row[0] = "summary".into();
        row[1] = r.s.to_string();
        row[3] = num(r.q);
        row[8] = num(r.min);
        row[9] = num(r.median);
        row[10] = num(r.max);
        table.push(row);
    }
    for r in &table_data.approximation {
        let mut row = vec![String::new(); 11];
        row[0] = "approximation".into();
        row[1] = r.s.to_string();
        row[3] = num(r.q);
        row[4] = num(r.estimate);
        row[5] = num(r.stderr);
        table.push(row);
    }
    let spread: Vec<_> = grid
        .values()
        .iter()
        .map(|&q| json!({ "q": q, "spread": table_data.spread(q) }))
        .collect();
    let growth: Vec<_> = cfg
        .s_values
        .iter()
        .map(|&s| json!({ "s": s, "growth": table_data.approximation_growth(s) }))
        .collect();
    let payload = json!({
        "table": table_data,
        "spread": spread,
        "approximation_growth": growth,
    });
    let mut rc = config(c, "sweep", None, Format::Csv);
    rc.n = n;
    rc.shifts = Some(shifts);
    rc.q_grid = Some(grid.values().to_vec());
    rc.samples = Some(cfg.mc.samples);
    rc.s_range = Some((a.s_min, a.s_max));
    emit(&rc, c.out.as_deref(), &table, payload)
}
