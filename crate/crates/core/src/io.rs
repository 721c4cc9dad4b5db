//! CSV emitters. Every file starts with a header row; floats carry 17 significant digits.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::birkhoff::{BirkhoffCoordinates, IterationLog};
use crate::counterexample::SweepRow;
use crate::flow::FlowTrajectory;
use crate::hardy::{ObstructionRow, ProbeReport};
use crate::lax::SpectralData;
use crate::hardy::PotentialSpectrum;
use crate::{Error, Result};

/// Round-trip exact float formatting.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Int(usize),
    Float(f64),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

/// Writes `header` followed by `rows`.
pub fn write_csv<W: Write>(w: &mut W, header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Int(i) => i.to_string(),
                Cell::Float(x) => fmt_f64(*x),
            })
            .collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// `n, lambda, gamma, inner1_re, inner1_im` for `n = 0..=K`; `γ₀` is written as NaN.
pub fn write_spectrum_csv<W: Write>(w: &mut W, sd: &SpectralData) -> Result<()> {
    let rows = (0..=sd.reliable_count()).map(|n| {
        let g = if n == 0 { f64::NAN } else { sd.gap(n) };
        let z = sd.inner1()[n];
        vec![n.into(), sd.lambda(n).into(), g.into(), z.re.into(), z.im.into()]
    });
    write_csv(w, &["n", "lambda", "gamma", "inner1_re", "inner1_im"], rows)
}

/// `n, zeta_re, zeta_im, gamma, kappa` for `n = 1..=K`.
pub fn write_birkhoff_csv<W: Write>(w: &mut W, z: &BirkhoffCoordinates) -> Result<()> {
    let rows = z.zetas.iter().enumerate().map(|(i, zeta)| {
        vec![(i + 1).into(), zeta.re.into(), zeta.im.into(), z.gaps[i].into(), z.kappas[i + 1].into()]
    });
    write_csv(w, &["n", "zeta_re", "zeta_im", "gamma", "kappa"], rows)
}

/// `t`, then `u{k}_re, u{k}_im` for `k = 1..=n_max` of the widest state.
pub fn write_trajectory_csv<W: Write>(w: &mut W, traj: &FlowTrajectory) -> Result<()> {
    let n = traj.states.iter().map(|s| s.n_max()).max().unwrap_or(0);
    let names: Vec<String> = (1..=n).flat_map(|k| [format!("u{k}_re"), format!("u{k}_im")]).collect();
    let mut header = vec!["t"];
    header.extend(names.iter().map(String::as_str));
    let rows = traj.times.iter().zip(&traj.states).map(|(t, u)| {
        let mut r: Vec<Cell> = vec![(*t).into()];
        for k in 1..=n as i64 {
            let c = u.coeff(k);
            r.push(c.re.into());
            r.push(c.im.into());
        }
        r
    });
    write_csv(w, &header, rows)
}

/// `t, xi_re, xi_im`.
pub fn write_observable_csv<W: Write>(w: &mut W, times: &[f64], xi: &[Complex64]) -> Result<()> {
    let rows = times.iter().zip(xi).map(|(t, x)| vec![(*t).into(), x.re.into(), x.im.into()]);
    write_csv(w, &["t", "xi_re", "xi_im"], rows)
}

/// `q, eps, mu_q, lambda0_matrix, norm_sqrtlog, xi_window_ratio`.
pub fn write_sweep_csv<W: Write>(w: &mut W, rows: &[SweepRow]) -> Result<()> {
    let rows = rows.iter().map(|r| {
        vec![
            r.q.into(),
            r.eps.into(),
            r.mu_q.into(),
            r.lambda0_matrix.into(),
            r.norm_sqrtlog.into(),
            r.xi_window_ratio.into(),
        ]
    });
    write_csv(w, &["q", "eps", "mu_q", "lambda0_matrix", "norm_sqrtlog", "xi_window_ratio"], rows)
}

/// `pair, product_ratio, half_ratio`.
pub fn write_probe_csv<W: Write>(w: &mut W, report: &ProbeReport) -> Result<()> {
    let rows = report.rows.iter().map(|(i, a, b)| vec![(*i).into(), (*a).into(), (*b).into()]);
    write_csv(w, &["pair", "product_ratio", "half_ratio"], rows)
}

/// `iteration, residual, step_norm`.
pub fn write_inverse_log_csv<W: Write>(w: &mut W, log: &[IterationLog]) -> Result<()> {
    let rows = log.iter().map(|l| vec![l.iteration.into(), l.residual.into(), l.step_norm.into()]);
    write_csv(w, &["iteration", "residual", "step_norm"], rows)
}

/// `n, q_l2_sq, q_sqrtlog_sq, x_norm_sq`.
pub fn write_obstruction_csv<W: Write>(w: &mut W, rows: &[ObstructionRow]) -> Result<()> {
    let rows = rows
        .iter()
        .map(|r| vec![r.n.into(), r.q_l2_sq.into(), r.q_sqrtlog_sq.into(), r.x_norm_sq.into()]);
    write_csv(w, &["n", "q_l2_sq", "q_sqrtlog_sq", "x_norm_sq"], rows)
}

/// `k, re, im` for `k = 1..=n_max`.
pub fn write_potential_csv<W: Write>(w: &mut W, u: &PotentialSpectrum) -> Result<()> {
    let rows = u.coeffs().iter().enumerate().map(|(i, c)| vec![(i + 1).into(), c.re.into(), c.im.into()]);
    write_csv(w, &["k", "re", "im"], rows)
}

/// Reads the named columns of a headed CSV, one `Vec<f64>` per data row.
pub fn read_columns<R: BufRead>(r: R, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::invalid("empty CSV"))??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| cols.iter().position(|c| c == n).ok_or_else(|| Error::invalid(format!("missing column {n:?}"))))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        let vals = idx
            .iter()
            .map(|&i| {
                fields
                    .get(i)
                    .and_then(|f| f.parse::<f64>().ok())
                    .ok_or_else(|| Error::invalid(format!("row {}: bad or missing field {}", row + 1, cols[i])))
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(vals);
    }
    Ok(out)
}

/// Inverse of [`write_potential_csv`]; rows must list `k = 1, 2, …` in order.
pub fn read_potential_csv<R: BufRead>(r: R) -> Result<PotentialSpectrum> {
    let rows = read_columns(r, &["k", "re", "im"])?;
    for (i, row) in rows.iter().enumerate() {
        if row[0] != (i + 1) as f64 {
            return Err(Error::invalid(format!("expected k = {} on row {}, found {}", i + 1, i + 1, row[0])));
        }
    }
    PotentialSpectrum::new(rows.iter().map(|r| Complex64::new(r[1], r[2])).collect())
}

/// `ζₙ` from the `zeta_re, zeta_im` columns of a Birkhoff CSV.
pub fn read_birkhoff_csv<R: BufRead>(r: R) -> Result<Vec<Complex64>> {
    Ok(read_columns(r, &["zeta_re", "zeta_im"])?.iter().map(|r| Complex64::new(r[0], r[1])).collect())
}
