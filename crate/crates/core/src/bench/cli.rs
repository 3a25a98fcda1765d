use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::config::{Config, Mode, Resolved};
use super::presets::Preset;
use super::report::queue_count_report;
use crate::error::{Error, Result};
use crate::fluid::{
    certify_h_drift, certify_l_drift, integrate_multihop, integrate_single_hop, lyapunov_h,
    lyapunov_l, reduction_study, Check, FluidOptions,
};
use crate::model::{load_headroom, Network, ScheduleSet};
use crate::policy::PolicyKind;
use crate::program::{Objective, SolverOptions, Utility};
use crate::sim::{run_experiment, StabilityDiagnostic, Trajectory};

/// Arguments of `switchsim run`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArgs {
    pub config: PathBuf,
    pub mode: Option<Mode>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub replicas: usize,
}

impl RunArgs {
    pub fn new(config: impl Into<PathBuf>) -> Self {
        RunArgs {
            config: config.into(),
            mode: None,
            out: None,
            seed: None,
            replicas: 1,
        }
    }
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub mode: Mode,
    /// False when a certificate or check failed.
    pub passed: bool,
    pub files: Vec<PathBuf>,
    /// Human-readable summary for stdout.
    pub summary: String,
}

/// Process exit code for a run result: 0 on success, 1 on a failed
/// certificate or a runtime error, 2 on config and validation errors.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(o) if o.passed => 0,
        Ok(_) => 1,
        Err(Error::Config(_) | Error::Validation(_)) => 2,
        Err(_) => 1,
    }
}

pub fn presets_listing() -> String {
    let mut out = String::new();
    for p in Preset::builtin() {
        let _ = writeln!(out, "{:<16} {}", p.to_string(), p.describe());
    }
    out
}

struct Ctx<'a> {
    cfg: &'a Config,
    net: &'a Network,
    resolved: &'a Resolved,
    dir: PathBuf,
    stem: String,
    files: Vec<PathBuf>,
}

impl Ctx<'_> {
    fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}{suffix}", self.stem))
    }

    fn write(&mut self, suffix: &str, body: &str) -> Result<()> {
        let path = self.path(suffix);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        log::info!("wrote {}", path.display());
        self.files.push(path);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, suffix: &str, value: &T) -> Result<()> {
        let mut body = serde_json::to_string_pretty(value).expect("report values serialize");
        body.push('\n');
        self.write(suffix, &body)
    }
}

pub fn run(args: &RunArgs) -> Result<Outcome> {
    let cfg = Config::load(&args.config).map_err(|e| match e {
        Error::Io { path, source } => {
            Error::Config(format!("cannot read {}: {source}", path.display()))
        }
        other => other,
    })?;
    let mode = args.mode.or(cfg.mode).unwrap_or(Mode::Discrete);
    if args.replicas == 0 {
        return Err(Error::Config("--replicas must be at least 1".into()));
    }
    let resolved = cfg.resolve()?;
    let dir = match &args.out {
        Some(d) => d.clone(),
        None => args
            .config
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let stem = args
        .config
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("run")
        .to_string();
    let mut ctx = Ctx {
        cfg: &cfg,
        net: &resolved.net,
        resolved: &resolved,
        dir,
        stem,
        files: Vec::new(),
    };
    log::info!(
        "mode {mode:?}, {} links, {} routes",
        ctx.net.num_links(),
        ctx.net.routes().len()
    );
    let seed = args.seed.unwrap_or(cfg.arrivals.seed);
    let (passed, summary) = match mode {
        Mode::Discrete => discrete(&mut ctx, seed, args.replicas)?,
        Mode::Fluid => fluid(&mut ctx, false)?,
        Mode::Certify => fluid(&mut ctx, true)?,
        Mode::Reduce => reduce(&mut ctx)?,
        Mode::Report => report(&mut ctx)?,
    };
    Ok(Outcome {
        mode,
        passed,
        files: ctx.files,
        summary,
    })
}

fn discrete(ctx: &mut Ctx<'_>, seed: u64, replicas: usize) -> Result<(bool, String)> {
    let set = ctx.resolved.schedule_set()?;
    let kind = ctx.cfg.policy_kind()?;
    let seeds: Vec<u64> = (0..replicas as u64).map(|k| seed.wrapping_add(k)).collect();
    let (net, cfg) = (ctx.net, ctx.cfg);
    let results: Vec<Result<(Trajectory, StabilityDiagnostic)>> = std::thread::scope(|s| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&sd| s.spawn(move || run_experiment(net, set, kind, &cfg.experiment(sd))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("replica thread panicked"))
            .collect()
    });

    let mut summary = String::new();
    let mut merged = String::from("replica,seed,slope,std_error,verdict,final_total\n");
    for (k, (res, &sd)) in results.into_iter().zip(&seeds).enumerate() {
        let (traj, diag) = res?;
        let suffix = if replicas == 1 {
            String::new()
        } else {
            format!(".r{k}")
        };
        ctx.write(&format!("{suffix}.csv"), &traj.to_csv())?;
        let doc = json!({
            "policy": kind.name(),
            "horizon": cfg.horizon,
            "stride": cfg.stride,
            "seed": sd,
            "arrived": traj.arrived,
            "departed": traj.departed,
            "final_total": traj.final_total,
            "slots_checked": traj.slots_checked,
            "diagnostic": diag,
        });
        ctx.write_json(&format!("{suffix}.diagnostic.json"), &doc)?;
        let _ = writeln!(
            merged,
            "{k},{sd},{},{},{},{}",
            diag.slope, diag.std_error, diag.verdict, traj.final_total
        );
        let _ = writeln!(
            summary,
            "replica {k} (seed {sd}): {} slope {:.4e} +- {:.1e}, final total {}",
            diag.verdict, diag.slope, diag.std_error, traj.final_total
        );
    }
    if replicas > 1 {
        ctx.write(".replicas.csv", &merged)?;
    }
    Ok((true, summary))
}

fn even_mass(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

fn initial_state(cfg: &Config, n: usize) -> Result<Vec<f64>> {
    match &cfg.fluid.q0 {
        Some(q) if q.len() != n => Err(Error::Config(format!(
            "fluid.q0 has {} entries, expected {n}",
            q.len()
        ))),
        Some(q) => Ok(q.clone()),
        None => Ok(even_mass(n)),
    }
}

/// Objective of the single-hop fluid under the configured policy.
fn fluid_objective(kind: &PolicyKind) -> Result<Objective> {
    match *kind {
        PolicyKind::AlphaG(obj) => Ok(obj),
        PolicyKind::MaxWeightAlpha { alpha } => Objective::new(alpha, Utility::Linear),
        _ => Ok(Objective::proportional()),
    }
}

fn fluid(ctx: &mut Ctx<'_>, certify: bool) -> Result<(bool, String)> {
    let set = ctx.resolved.schedule_set()?;
    let kind = ctx.cfg.policy_kind()?;
    let opts = FluidOptions::new(ctx.cfg.fluid.dt, ctx.cfg.fluid.t_end);
    let ids = ctx.net.link_ids();
    if ctx.net.is_single_hop() && !kind.is_multihop() {
        single_hop_fluid(ctx, set, &kind, &opts, &ids, certify)
    } else {
        multihop_fluid(ctx, set, &opts, &ids, certify)
    }
}

fn single_hop_fluid(
    ctx: &mut Ctx<'_>,
    set: &ScheduleSet,
    kind: &PolicyKind,
    opts: &FluidOptions,
    ids: &[String],
    certify: bool,
) -> Result<(bool, String)> {
    let obj = fluid_objective(kind)?;
    let a_bar = ctx.net.link_loads().to_vec();
    let q0 = initial_state(ctx.cfg, a_bar.len())?;
    let traj = integrate_single_hop(&q0, &a_bar, &obj, set, opts)?;

    let head = load_headroom(&a_bar, set)?;
    let gp: Option<Vec<f64>> = (head.is_interior() && a_bar.iter().all(|&a| a > 0.0)).then(|| {
        a_bar
            .iter()
            .map(|a| obj.utility.deriv((1.0 + head.epsilon) * a))
            .collect()
    });
    let mut csv = String::from("t,q_norm1");
    if gp.is_some() {
        csv.push_str(",L");
    }
    for id in ids {
        let _ = write!(csv, ",q_{id}");
    }
    csv.push('\n');
    for i in 0..traj.len() {
        let _ = write!(csv, "{},{}", traj.t[i], traj.norm1(i));
        if let Some(gp) = &gp {
            let _ = write!(csv, ",{}", lyapunov_l(&traj.q[i], gp, obj.alpha));
        }
        for v in &traj.q[i] {
            let _ = write!(csv, ",{v}");
        }
        csv.push('\n');
    }
    ctx.write(".fluid.csv", &csv)?;

    let hit = match traj.hit_time {
        Some(t) => format!("hits zero at t = {t:.4}"),
        None => "does not reach zero".into(),
    };
    if !certify {
        return Ok((
            true,
            format!("single-hop fluid over [0, {}]: {hit}\n", opts.t_end),
        ));
    }
    let cert = certify_l_drift(&traj, &obj, &a_bar, set)?;
    let passed = cert.passed();
    let mut doc = serde_json::to_value(&cert).expect("certificate serializes");
    doc["verdict"] = json!(if passed { "pass" } else { "fail" });
    ctx.write_json(".certificate.json", &doc)?;
    let summary = format!(
        "L certificate: {} (envelope {}, monotone {}, hitting {} with T = {:.3}); {hit}\n",
        if passed { "pass" } else { "fail" },
        cert.envelope.as_str(),
        cert.monotone.as_str(),
        cert.hitting.as_str(),
        cert.t_bound
    );
    Ok((passed, summary))
}

fn multihop_fluid(
    ctx: &mut Ctx<'_>,
    set: &ScheduleSet,
    opts: &FluidOptions,
    ids: &[String],
    certify: bool,
) -> Result<(bool, String)> {
    let net = ctx.net;
    let x0 = initial_state(ctx.cfg, net.stations().len())?;
    let traj = integrate_multihop(net, &x0, set, opts)?;
    let with_h = net.route_rates().iter().all(|&a| a > 0.0);
    let solver = SolverOptions::fluid();

    let mut h = Vec::new();
    if with_h {
        for x in &traj.x {
            h.push(lyapunov_h(net, x, set, &solver)?);
        }
    }
    let mut csv = String::from("t,q_norm1");
    if with_h {
        csv.push_str(",H,dH_estimate");
    }
    for id in ids {
        let _ = write!(csv, ",q_{id}");
    }
    csv.push('\n');
    for i in 0..traj.len() {
        let _ = write!(csv, "{},{}", traj.t[i], traj.mass(i));
        if with_h {
            let d = if i + 1 < traj.len() {
                (h[i + 1] - h[i]) / (traj.t[i + 1] - traj.t[i])
            } else {
                0.0
            };
            let _ = write!(csv, ",{},{d}", h[i]);
        }
        for v in &traj.q[i] {
            let _ = write!(csv, ",{v}");
        }
        csv.push('\n');
    }
    ctx.write(".fluid.csv", &csv)?;

    let hit = match traj.hit_time {
        Some(t) => format!("hits zero at t = {t:.4}"),
        None => "does not reach zero".into(),
    };
    if !certify {
        return Ok((
            true,
            format!("multihop fluid over [0, {}]: {hit}\n", opts.t_end),
        ));
    }
    let monitor = certify_h_drift(net, &traj, set, 0.0, &solver)?;
    let mut hitting = Check::Pass;
    match traj.hit_time {
        None => hitting = Check::Fail { t: None },
        Some(th) => {
            for i in 0..traj.len() {
                if traj.t[i] >= th && traj.mass(i) > opts.hit_tol {
                    hitting.fail_at(traj.t[i]);
                }
            }
        }
    }
    let passed = monitor.passed() && hitting.passed();
    let doc = json!({
        "hit_time": traj.hit_time,
        "hitting": hitting,
        "H_nonincreasing": monitor.nonincreasing,
        "H_strict_drift": monitor.strictly_negative,
        "sup_dH_dt": monitor.sup_drift,
        "max_analytic_mismatch": monitor.max_analytic_mismatch,
        "drift_floor": monitor.drift_floor,
        "verdict": if passed { "pass" } else { "fail" },
    });
    ctx.write_json(".certificate.json", &doc)?;
    let summary = format!(
        "H certificate: {} (non-increasing {}, strict drift {}, hitting {}; sup dH/dt = {:.3e}); {hit}\n",
        if passed { "pass" } else { "fail" },
        monitor.nonincreasing.as_str(),
        monitor.strictly_negative.as_str(),
        hitting.as_str(),
        monitor.sup_drift
    );
    Ok((passed, summary))
}

fn reduce(ctx: &mut Ctx<'_>) -> Result<(bool, String)> {
    let set = ctx.resolved.schedule_set()?;
    let net = ctx.net;
    let x0 = initial_state(ctx.cfg, net.stations().len())?;
    let study = reduction_study(net, set, &x0, ctx.cfg.fluid.t_end, ctx.cfg.fluid.dt)?;
    let passed = study.within(10.0) && study.order >= 1.0;
    let mut doc = serde_json::to_value(&study).expect("study serializes");
    doc["verdict"] = json!(if passed { "pass" } else { "fail" });
    ctx.write_json(".reduction.json", &doc)?;
    Ok((
        passed,
        format!(
            "reduction: sup diff {:.3e} at dt = {}, {:.3e} at dt/2, order {:.3}\n",
            study.coarse.trajectory_sup_diff,
            study.coarse.dt,
            study.fine.trajectory_sup_diff,
            study.order
        ),
    ))
}

fn report(ctx: &mut Ctx<'_>) -> Result<(bool, String)> {
    let r = queue_count_report(ctx.net);
    ctx.write_json(".report.json", &r)?;
    let b = &r.busiest;
    Ok((
        true,
        format!(
            "{} leaves, {} routes\nnode {}: per-route backpressure {}, per-destination backpressure {}, proportional scheduler {}\n",
            r.leaves, r.routes, b.node, b.per_route_bp, b.per_destination_bp, b.proportional
        ),
    ))
}
