use std::io::Write;

use curstat::bandwidth::{
    amse_optimal_c, bootstrap_bandwidth, log_grid, mc_bandwidth, mc_estimates, summarize,
    true_value, BandwidthPlan, BootstrapConfig, Smoother, TargetMethod,
};
use curstat::estimators::{EstimateCurve, Method, Target};
use curstat::kernels::{by_name, Kernel};
use curstat::mle::ObservedSample;
use curstat::sim::{child_seed, sample_current_status, truth_gamma4_exp3, TruthSpec};
use curstat::smoothed::GridSpec;
use serde_json::{json, Value};

use crate::args::{BandwidthArgs, BootstrapArgs, EstimateArgs, SimulateArgs, TableArgs};
use crate::io::{fmt9, open_output, read_sample, round9, write_rows};
use crate::CliError;

fn kernel(name: &str) -> Result<Kernel, CliError> {
    by_name(name).ok_or_else(|| CliError::Input(format!("unknown kernel \"{name}\"")))
}

fn method(name: &str) -> Result<Method, CliError> {
    Method::parse(name).ok_or_else(|| CliError::Input(format!("unknown method \"{name}\"")))
}

fn target(name: &str) -> Result<Target, CliError> {
    Target::parse(name).ok_or_else(|| CliError::Input(format!("unknown target \"{name}\"")))
}

fn smoother(m: Method) -> Result<Smoother, CliError> {
    match m {
        Method::Msle | Method::Naive => Ok(Smoother::Msle),
        Method::Smle => Ok(Smoother::Smle),
        Method::Mle => Err(CliError::Input("the MLE has no bandwidth".into())),
    }
}

fn target_method(m: &str, t: &str) -> Result<TargetMethod, CliError> {
    let m = method(m)?;
    if m == Method::Naive {
        return Err(CliError::Input(
            "bandwidth selection supports msle and smle".into(),
        ));
    }
    Ok(TargetMethod::new(target(t)?, smoother(m)?))
}

fn bootstrap_config(args: &BootstrapArgs, n: u64, t: f64) -> Result<BootstrapConfig, CliError> {
    let m = args.m.unwrap_or((n / 5).max(1));
    let mut cfg = BootstrapConfig::new(n, m, args.b, args.c0, t, args.seed);
    let lo = args.c_min.unwrap_or(args.c0 / 10.0);
    let hi = args.c_max.unwrap_or(args.c0 * 10.0);
    if !(lo > 0.0 && hi >= lo) {
        return Err(CliError::Input(format!(
            "candidate range [{lo}, {hi}] is invalid"
        )));
    }
    cfg.c_grid = log_grid(lo, hi, args.c_points);
    Ok(cfg)
}

pub fn estimate(args: &EstimateArgs) -> Result<(), CliError> {
    let sample = read_sample(&args.input)?;
    let k = kernel(&args.kernel)?;
    let mut columns = Vec::new();
    for m in &args.method {
        for t in &args.target {
            let (m, t) = (method(m)?, target(t)?);
            if m == Method::Mle && t != Target::F {
                return Err(CliError::Input(format!(
                    "the MLE does not estimate {}",
                    t.name()
                )));
            }
            columns.push((m, t));
        }
    }
    let n = sample.n();
    let s = &args.smoothing;
    let mut curves = Vec::with_capacity(columns.len());
    for &(m, t) in &columns {
        let h = if m == Method::Mle {
            None
        } else if let Some(h) = s.h {
            Some(h)
        } else if let Some(c) = s.c {
            let alpha = s
                .alpha
                .unwrap_or(TargetMethod::new(t, Smoother::Smle).alpha());
            Some(c * (n as f64).powf(-alpha))
        } else if s.select_bootstrap {
            let [point] = args.t[..] else {
                return Err(CliError::Input(
                    "--select-bootstrap needs exactly one --t value".into(),
                ));
            };
            let cfg = bootstrap_config(&args.bootstrap, n, point)?;
            let sel = bootstrap_bandwidth(&sample, &cfg, TargetMethod::new(t, smoother(m)?), &k)?;
            Some(sel.h_hat)
        } else {
            return Err(CliError::Input(format!(
                "{} needs one of --h, --c or --select-bootstrap",
                m.name()
            )));
        };
        curves.push(EstimateCurve::fit(
            m,
            t,
            &sample,
            &k,
            h,
            GridSpec::default(),
        )?);
    }

    let explicit = !args.t.is_empty();
    let points: Vec<f64> = if explicit {
        args.t.iter().map(|&t| round9(t)).collect()
    } else {
        if args.grid_points < 2 {
            return Err(CliError::Input("--grid-points must be at least 2".into()));
        }
        let h_max = curves
            .iter()
            .filter_map(|c| c.bandwidth())
            .fold(0.0, f64::max);
        let end = sample.max_time() + h_max;
        let last = args.grid_points - 1;
        // Evaluate at the printed times so the output is self-consistent.
        (0..=last)
            .map(|i| round9(end * i as f64 / last as f64))
            .collect()
    };

    let mut header = vec!["t".to_string()];
    header.extend(
        columns
            .iter()
            .map(|(m, t)| format!("{}_{}", m.name(), t.name())),
    );
    let mut rows = Vec::with_capacity(points.len());
    for &t in &points {
        let mut row = vec![fmt9(t)];
        for c in &curves {
            match c.eval(t) {
                Ok(v) => row.push(fmt9(v)),
                Err(e) if explicit => return Err(e.into()),
                Err(_) => row.push(String::new()),
            }
        }
        rows.push(row);
    }
    write_rows(args.output.as_deref(), &header, &rows)
}

fn num(v: f64) -> Value {
    json!(round9(v))
}

pub fn bandwidth(args: &BandwidthArgs) -> Result<(), CliError> {
    let sample = read_sample(&args.input)?;
    let k = kernel(&args.kernel)?;
    let tm = target_method(&args.method, &args.target)?;
    let cfg = bootstrap_config(&args.bootstrap, sample.n(), args.t)?;
    let sel = bootstrap_bandwidth(&sample, &cfg, tm, &k)?;
    let curve: Vec<Value> = sel
        .curve
        .iter()
        .map(|&(c, mse)| json!([num(c), mse.map_or(Value::Null, num)]))
        .collect();
    let doc = json!({
        "c_hat": num(sel.c_hat),
        "h_hat": num(sel.h_hat),
        "curve": curve,
        "seed": sel.seed,
        "config": {
            "method": args.method,
            "target": tm.target.name(),
            "kernel": k.name(),
            "t": num(args.t),
            "n": cfg.n,
            "m": cfg.m,
            "B": cfg.b,
            "c0": num(cfg.c0),
            "h0": num(cfg.h0()),
            "pilot_value": num(sel.reference),
            "c_min": num(cfg.c_grid[0]),
            "c_max": num(cfg.c_grid[cfg.c_grid.len() - 1]),
            "c_points": cfg.c_grid.len(),
        },
    });
    let mut out = open_output(args.output.as_deref())?;
    let text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
    writeln!(out, "{text}")
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Input(format!("writing output: {e}")))
}

fn truth(name: &str) -> Result<impl TruthSpec, CliError> {
    match name {
        "gamma4-exp3" => Ok(truth_gamma4_exp3()),
        other => Err(CliError::Input(format!("unknown truth \"{other}\""))),
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let tr = truth(&args.truth)?;
    let k = kernel(&args.kernel)?;
    let tm = target_method(&args.method, &args.target)?;
    if args.n == 0 || args.b == 0 {
        return Err(CliError::Input("--n and --B must be positive".into()));
    }
    let c = match (args.h, args.c) {
        (Some(h), _) => h * (args.n as f64).powf(tm.alpha()),
        (None, Some(c)) => c,
        (None, None) => amse_optimal_c(tm, &tr, args.t, &k)?,
    };
    let h = BandwidthPlan::new(tm, c, args.n as u64)?.h();
    let estimates = mc_estimates(&tr, args.n, args.b, c, args.t, tm, &k, args.seed)?;
    let header: Vec<String> = [
        "row",
        "estimate",
        "sd",
        "normalized_mean",
        "normalized_sd",
        "h",
        "seed",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut rows = Vec::with_capacity(args.b + 1);
    let mut ok = Vec::with_capacity(args.b);
    for (i, e) in estimates.iter().enumerate() {
        let cell = match e {
            Ok(v) => {
                ok.push(*v);
                fmt9(*v)
            }
            Err(_) => String::new(),
        };
        rows.push(vec![
            i.to_string(),
            cell,
            String::new(),
            String::new(),
            String::new(),
            fmt9(h),
            child_seed(args.seed, i as u64).to_string(),
        ]);
    }
    if ok.is_empty() {
        return Err(CliError::Domain("no replicate produced an estimate".into()));
    }
    let s = summarize(&ok, true_value(&tr, tm.target, args.t), args.n, tm.rate());
    rows.push(vec![
        "summary".into(),
        fmt9(s.mean),
        fmt9(s.sd),
        fmt9(s.normalized_mean),
        fmt9(s.normalized_sd),
        fmt9(h),
        args.seed.to_string(),
    ]);
    write_rows(args.output.as_deref(), &header, &rows)
}

pub fn reproduce_table1(args: &TableArgs) -> Result<(), CliError> {
    let k = kernel(&args.kernel)?;
    if args.n == 0 || args.m == 0 || args.m > args.n || args.b == 0 {
        return Err(CliError::Input("need n ≥ m ≥ 1 and B ≥ 1".into()));
    }
    if args.c0.is_empty()
        || args
            .c0
            .iter()
            .any(|c| c.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater))
    {
        return Err(CliError::Input("--c0 needs positive values".into()));
    }
    if !(args.c_min > 0.0 && args.c_max >= args.c_min && args.c_points >= 1) {
        return Err(CliError::Input("invalid candidate range".into()));
    }
    let tr = truth_gamma4_exp3();
    let tm = TargetMethod::new(Target::F, Smoother::Smle);
    let points = [4.0, 6.5];
    let scale = (args.n as f64).powf(-tm.alpha());
    let data_seed = child_seed(args.seed, 0);
    let sample: ObservedSample = sample_current_status(&tr, args.n, data_seed)?.sample;
    let grid = log_grid(args.c_min, args.c_max, args.c_points);

    let mut rows = Vec::new();
    let mut push = |label: String, cs: [f64; 2], seed: Option<u64>| {
        let mut row = vec![label];
        for c in cs {
            row.push(fmt9(c));
            row.push(fmt9(c * scale));
        }
        row.push(seed.map_or(String::new(), |s| s.to_string()));
        rows.push(row);
    };
    for (j, &c0) in args.c0.iter().enumerate() {
        let seed = child_seed(args.seed, 1 + j as u64);
        let mut cs = [0.0; 2];
        for (slot, &t) in cs.iter_mut().zip(&points) {
            let mut cfg = BootstrapConfig::new(args.n as u64, args.m as u64, args.b, c0, t, seed);
            cfg.c_grid = log_grid(c0 / 10.0, 10.0 * c0, args.c_points);
            *slot = bootstrap_bandwidth(&sample, &cfg, tm, &k)?.c_hat;
        }
        push(format!("c0 = {}", fmt9(c0)), cs, Some(seed));
    }
    for (label, size, index) in [("MC-sim (n)", args.n, 100), ("MC-sim (m)", args.m, 101)] {
        let seed = child_seed(args.seed, index);
        let mut cs = [0.0; 2];
        for (slot, &t) in cs.iter_mut().zip(&points) {
            *slot = mc_bandwidth(&tr, size, args.b, &grid, t, tm, &k, seed)?.c_hat;
        }
        push(label.to_string(), cs, Some(seed));
    }
    let theory = [
        amse_optimal_c(tm, &tr, points[0], &k)?,
        amse_optimal_c(tm, &tr, points[1], &k)?,
    ];
    push("Theor. val.".to_string(), theory, None);

    let header: Vec<String> = ["row", "c_t4", "h_t4", "c_t6.5", "h_t6.5", "seed"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    write_rows(args.output.as_deref(), &header, &rows)
}
