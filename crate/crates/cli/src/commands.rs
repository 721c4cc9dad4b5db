use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use bo_birkhoff::birkhoff::{birkhoff_forward_with, JacobianKind};
use bo_birkhoff::counterexample::{sweep, CounterexampleParams};
use bo_birkhoff::flow::{
    evolve_birkhoff_trajectory, evolve_direct_trajectory, weak_limit_observable, BirkhoffFlowOptions,
    ObservableOptions,
};
use bo_birkhoff::io;
use bo_birkhoff::lax::{eigendecompose_with, trace_residual};
use bo_birkhoff::verify::{format_table, run_suite, Suite, VerifyOptions};
use bo_birkhoff::{
    assemble_lax_matrix, birkhoff_inverse, make_potential, InverseOptions, PotentialFamily, PotentialSpectrum,
    Precision,
};
use serde_json::{json, Value};

use crate::config::{Params, SCHEMA};
use crate::Failure;

const DEFAULT_MODES: usize = 128;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

fn check_finite(name: &str, v: Option<f64>) -> Result<(), Failure> {
    match v {
        Some(x) if !x.is_finite() => Err(invalid(format!("{name} must be finite"))),
        _ => Ok(()),
    }
}

fn validate(p: &Params) -> Result<(), Failure> {
    for (name, v) in [("amplitude", p.amplitude), ("decay", p.decay), ("scale", p.scale), ("dt", p.dt), ("beta", p.beta)] {
        check_finite(name, v)?;
    }
    if let Some(m) = p.modes {
        if m < 2 {
            return Err(invalid("modes must be at least 2"));
        }
    }
    if p.coeffs == Some(0) || p.coords == Some(0) {
        return Err(invalid("coeffs and coords must be positive"));
    }
    if let Some(dt) = p.dt {
        if dt <= 0.0 {
            return Err(invalid("dt must be positive"));
        }
    }
    if let Some(t) = &p.tgrid {
        if t.is_empty() || t.iter().any(|x| !x.is_finite()) {
            return Err(invalid("tgrid must be a non-empty list of finite times"));
        }
    }
    if let Some(q) = &p.q {
        if q.is_empty() {
            return Err(invalid("q grid is empty"));
        }
    }
    Ok(())
}

fn precision(p: &Params, m: usize) -> Result<Precision, Failure> {
    match p.precision.as_deref() {
        None | Some("auto") => Ok(Precision::auto(m)),
        Some("compensated") => Ok(Precision::Compensated),
        Some("standard") => Ok(Precision::Standard),
        Some(s) => Err(invalid(format!("unknown precision {s:?}"))),
    }
}

fn single_q(p: &Params) -> Result<f64, Failure> {
    match p.q.as_deref() {
        Some([q]) => Ok(*q),
        _ => Err(invalid("the counterexample family needs exactly one --q")),
    }
}

fn potential(p: &Params, m: usize) -> Result<PotentialSpectrum, Failure> {
    if let Some(path) = &p.input {
        if p.family.is_some() {
            return Err(invalid("give either --input or --family, not both"));
        }
        return Ok(io::read_potential_csv(BufReader::new(open(path)?))?);
    }
    let (family, default_n) = match p.family.as_deref() {
        Some("zero") => (PotentialFamily::Zero, 1),
        Some("cosine") => (PotentialFamily::Cosine { amplitude: p.amplitude.unwrap_or(0.2) }, 1),
        Some("random") => (
            PotentialFamily::Random {
                seed: p.seed.unwrap_or(0),
                decay: p.decay.unwrap_or(2.0),
                scale: p.scale.unwrap_or(0.1),
            },
            32,
        ),
        Some("counterexample") => {
            let params = CounterexampleParams::new(p.beta.unwrap_or(2.0), single_q(p)?)?;
            (params.family(), params.decay_rule_m().min(m / 2).max(1))
        }
        Some(f) => return Err(invalid(format!("unknown family {f:?}"))),
        None => return Err(invalid("a potential needs --family or --input")),
    };
    let n = p.coeffs.unwrap_or(default_n);
    if n > m {
        return Err(invalid(format!("{n} coefficients exceed M = {m}")));
    }
    Ok(make_potential(&family, n)?)
}

fn open(path: &Path) -> Result<File, Failure> {
    File::open(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))
}

struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn new(p: &Params) -> Result<Self, Failure> {
        let dir = p.out.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir)
            .map_err(|e| invalid(format!("output directory {} is not writable: {e}", dir.display())))?;
        Ok(Self { dir, files: Vec::new() })
    }

    fn write(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> bo_birkhoff::Result<()>,
    ) -> Result<(), Failure> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        f(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn manifest(&mut self, command: &str, p: &Params, jobs: usize, start: Instant, summary: Value) -> Result<(), Failure> {
        let outputs = self.files.clone();
        let body = json!({
            "schema": SCHEMA,
            "tool": "bo-birkhoff",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config": p,
            "seeds": { "seed": p.seed },
            "jobs": jobs,
            "wall_time_s": start.elapsed().as_secs_f64(),
            "outputs": outputs,
            "summary": summary,
        });
        self.write("manifest.json", |w| {
            serde_json::to_writer_pretty(&mut *w, &body)?;
            writeln!(w)?;
            Ok(())
        })
    }
}

pub fn run(command: &str, p: &Params, jobs: usize, start: Instant) -> Result<(), Failure> {
    validate(p)?;
    match command {
        "spectrum" => spectrum(p, jobs, start),
        "birkhoff" => birkhoff(p, jobs, start),
        "invert" => invert(p, jobs, start),
        "evolve" => evolve(p, jobs, start),
        "counterexample" => counterexample(p, jobs, start),
        "verify" => verify(p, jobs, start),
        other => Err(invalid(format!("unknown command {other:?}"))),
    }
}

fn spectrum(p: &Params, jobs: usize, start: Instant) -> Result<(), Failure> {
    let m = p.modes.unwrap_or(DEFAULT_MODES);
    let u = potential(p, m)?;
    let sd = eigendecompose_with(&assemble_lax_matrix(&u, m)?, precision(p, m)?)?;
    let mut out = Output::new(p)?;
    out.write("spectrum.csv", |w| io::write_spectrum_csv(w, &sd))?;
    let summary = json!({
        "m": m,
        "reliable": sd.reliable_count(),
        "lambda0": sd.lambda(0),
        "trace_residual": trace_residual(&sd),
    });
    out.manifest("spectrum", p, jobs, start, summary)
}

fn birkhoff(p: &Params, jobs: usize, start: Instant) -> Result<(), Failure> {
    let m = p.modes.unwrap_or(DEFAULT_MODES);
    let u = potential(p, m)?;
    let z = birkhoff_forward_with(&u, m, precision(p, m)?)?;
    let mut out = Output::new(p)?;
    out.write("birkhoff.csv", |w| io::write_birkhoff_csv(w, &z))?;
    out.manifest("birkhoff", p, jobs, start, json!({ "m": m, "coordinates": z.len() }))
}

fn invert(p: &Params, jobs: usize, start: Instant) -> Result<(), Failure> {
    let path = p.input.as_ref().ok_or_else(|| invalid("invert needs --input with zeta_re, zeta_im columns"))?;
    let mut target = io::read_birkhoff_csv(BufReader::new(open(path)?))?;
    if let Some(n) = p.coords {
        if n > target.len() {
            return Err(invalid(format!("{n} coords requested, input has {}", target.len())));
        }
        target.truncate(n);
    }
    let m = p.modes.unwrap_or(2 * target.len());
    let opts = InverseOptions { jacobian: JacobianKind::Analytic, precision: precision(p, m)?, ..Default::default() };
    let res = birkhoff_inverse(&target, m, &opts)?;
    let mut out = Output::new(p)?;
    out.write("potential.csv", |w| io::write_potential_csv(w, &res.u))?;
    out.write("inverse_log.csv", |w| io::write_inverse_log_csv(w, &res.log))?;
    let summary = json!({
        "m": m,
        "coordinates": target.len(),
        "converged": res.converged,
        "residual": res.residual,
        "iterations": res.iterations,
    });
    out.manifest("invert", p, jobs, start, summary)?;
    if res.converged {
        Ok(())
    } else {
        Err(Failure::Numerical(format!(
            "inverse did not converge: residual {:e} after {} iterations",
            res.residual, res.iterations
        )))
    }
}

fn evolve(p: &Params, jobs: usize, start: Instant) -> Result<(), Failure> {
    let times = p.tgrid.clone().ok_or_else(|| invalid("evolve needs --tgrid"))?;
    let method = p.method.as_deref().unwrap_or("birkhoff");
    let m = p.modes.unwrap_or(DEFAULT_MODES);
    let u = potential(p, m)?;
    let traj = match method {
        "birkhoff" => {
            let mut opts = BirkhoffFlowOptions::new(m);
            opts.inverse.precision = precision(p, m)?;
            opts.n_coords = p.coords;
            evolve_birkhoff_trajectory(&u, &times, &opts)?
        }
        "direct" => {
            let grid = p.grid.unwrap_or_else(|| (4 * u.n_max()).next_power_of_two().max(256));
            evolve_direct_trajectory(&u, &times, p.dt.unwrap_or(1e-4), grid)?
        }
        other => return Err(invalid(format!("unknown method {other:?}"))),
    };
    let mut out = Output::new(p)?;
    out.write("trajectory.csv", |w| io::write_trajectory_csv(w, &traj))?;
    let truncated = traj.truncated_at.map(|t| json!({ "time": t.time, "residual": t.residual }));
    out.manifest("evolve", p, jobs, start, json!({ "method": method, "m": m, "truncated_at": truncated }))?;
    match traj.truncated_at {
        None => Ok(()),
        Some(t) => Err(Failure::Numerical(format!(
            "inverse stopped converging at t = {} (residual {:e}); trajectory written up to there",
            t.time, t.residual
        ))),
    }
}

fn q_label(q: f64) -> String {
    q.to_string().replace('.', "p")
}

fn counterexample(p: &Params, jobs: usize, start: Instant) -> Result<(), Failure> {
    let beta = p.beta.unwrap_or(2.0);
    let qgrid = p.q.clone().ok_or_else(|| invalid("counterexample needs --q"))?;
    for &q in &qgrid {
        CounterexampleParams::new(beta, q)?;
    }
    let mut rows = sweep(beta, &qgrid, None)?;
    let mut out = Output::new(p)?;
    if p.window.unwrap_or(false) {
        let max_m = p.window_max_m.unwrap_or(600);
        for row in rows.iter_mut() {
            let params = CounterexampleParams::new(beta, row.q)?;
            if row.mu_q.is_nan() || 2 * params.decay_rule_m() > max_m {
                continue;
            }
            let report = weak_limit_observable(&params, &ObservableOptions::default())?;
            row.xi_window_ratio = report.ratio;
            out.write(&format!("observable_q{}.csv", q_label(row.q)), |w| {
                io::write_observable_csv(w, &report.times, &report.xi)
            })?;
        }
    }
    out.write("ce_sweep.csv", |w| io::write_sweep_csv(w, &rows))?;
    out.manifest("counterexample", p, jobs, start, json!({ "beta": beta, "rows": rows.len() }))
}

fn verify(p: &Params, jobs: usize, start: Instant) -> Result<(), Failure> {
    let suite: Suite = p.suite.as_deref().unwrap_or("all").parse().map_err(Failure::Validation)?;
    let defaults = VerifyOptions::default();
    let opts = VerifyOptions { modes: p.modes.unwrap_or(defaults.modes), seed: p.seed.unwrap_or(defaults.seed) };
    let checks = run_suite(suite, &opts);
    print!("{}", format_table(&checks));
    let failed = checks.iter().filter(|c| !c.passed).count();
    if p.out.is_some() {
        let mut out = Output::new(p)?;
        out.write("verify.json", |w| {
            serde_json::to_writer_pretty(&mut *w, &checks)?;
            writeln!(w)?;
            Ok(())
        })?;
        out.manifest("verify", p, jobs, start, json!({ "checks": checks.len(), "failed": failed }))?;
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("{failed} of {} checks failed", checks.len())))
    }
}
