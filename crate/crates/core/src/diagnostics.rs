//! Energy functionals along trajectories and the inequalities the blow-up
//! and decay arguments assert about them.
//!
//! * `calE(t) = ||u||^2 + ||grad_gamma u||^2`
//! * `calF(t) = -1/2 ||grad_gamma u||^2 + int (F(u) - theta)`
//! * `E(t) = int_0^t calE + M` (trapezoid over recorded times)

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::geometry::{Grid, GrushinSpace};
use crate::integrator::{sup_norm, SimState};
use crate::nonlinearity::Nonlinearity;
use crate::operator::{grushin_energy, l2_norm_sq};

/// Number of trailing records excluded from certification after a blow-up.
pub const UNDER_RESOLVED_TAIL: usize = 3;
/// Relative tolerance of the certified inequalities.
pub const CERTIFY_REL_TOL: f64 = 1e-6;

pub const CSV_HEADER: &str = "t,dt,l2,grad,calE,calF,supnorm,min_u,E";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub dt: f64,
    pub l2: f64,
    pub grad: f64,
    #[serde(rename = "calE")]
    pub cal_e: f64,
    #[serde(rename = "calF")]
    pub cal_f: f64,
    pub supnorm: f64,
    pub min_u: f64,
    #[serde(rename = "E")]
    pub e: f64,
}

impl EnergyRecord {
    pub fn field(&self, name: &str) -> Option<f64> {
        Some(match name {
            "t" => self.t,
            "dt" => self.dt,
            "l2" => self.l2,
            "grad" => self.grad,
            "calE" => self.cal_e,
            "calF" => self.cal_f,
            "supnorm" => self.supnorm,
            "min_u" => self.min_u,
            "E" => self.e,
            _ => return None,
        })
    }

    /// Synthetic record carrying only time, energy and potential.
    pub fn synthetic(t: f64, cal_e: f64, cal_f: f64) -> Self {
        Self {
            t,
            dt: 0.0,
            l2: cal_e,
            grad: 0.0,
            cal_e,
            cal_f,
            supnorm: 0.0,
            min_u: 0.0,
            e: 0.0,
        }
    }
}

/// `-1/2 grushin_energy(u) + integral(F(u) - theta)`; equals `calF(0)` at `u = u0`.
#[allow(non_snake_case)]
pub fn compute_F_functional(
    grid: &Grid,
    space: &GrushinSpace,
    nl: &Nonlinearity,
    theta: f64,
    u: &[f64],
) -> Result<f64> {
    let grad = grushin_energy(grid, space, u)?;
    potential(grid, nl, theta, u, grad)
}

fn potential(grid: &Grid, nl: &Nonlinearity, theta: f64, u: &[f64], grad: f64) -> Result<f64> {
    let mut s = 0.0;
    for &v in u {
        s += nl.eval_big_f(v)? - theta;
    }
    Ok(-0.5 * grad + s * grid.cell_volume())
}

/// `int_D (u^2 + |grad_gamma u|^2)`.
pub fn combined_energy(grid: &Grid, space: &GrushinSpace, u: &[f64]) -> Result<f64> {
    Ok(l2_norm_sq(grid, u)? + grushin_energy(grid, space, u)?)
}

/// Builds [`EnergyRecord`]s from observed states, accumulating `E` on the fly.
pub struct EnergyTracker<'a> {
    grid: &'a Grid,
    space: &'a GrushinSpace,
    nl: &'a Nonlinearity,
    theta: f64,
    m_const: f64,
    records: Vec<EnergyRecord>,
}

impl<'a> EnergyTracker<'a> {
    pub fn new(grid: &'a Grid, space: &'a GrushinSpace, nl: &'a Nonlinearity, theta: f64, m_const: f64) -> Self {
        Self {
            grid,
            space,
            nl,
            theta,
            m_const,
            records: Vec::new(),
        }
    }

    pub fn observe(&mut self, state: &SimState) -> Result<()> {
        let u = &state.u;
        let l2 = l2_norm_sq(self.grid, u)?;
        let grad = grushin_energy(self.grid, self.space, u)?;
        let cal_e = l2 + grad;
        let cal_f = potential(self.grid, self.nl, self.theta, u, grad)?;
        let e = match self.records.last() {
            None => self.m_const,
            Some(prev) => prev.e + 0.5 * (cal_e + prev.cal_e) * (state.t - prev.t),
        };
        self.records.push(EnergyRecord {
            t: state.t,
            dt: state.last_dt,
            l2,
            grad,
            cal_e,
            cal_f,
            supnorm: sup_norm(u),
            min_u: u.iter().copied().fold(f64::INFINITY, f64::min),
            e,
        });
        Ok(())
    }

    pub fn records(&self) -> &[EnergyRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<EnergyRecord> {
        self.records
    }
}

fn check_sorted(records: &[EnergyRecord]) -> Result<()> {
    if let Some(w) = records.windows(2).find(|w| !(w[1].t >= w[0].t)) {
        return Err(Error::invalid(format!("records not time-sorted: {} after {}", w[1].t, w[0].t)));
    }
    Ok(())
}

/// Cumulative trapezoid of `calE` plus `M`; `E(t_0) = M`.
#[allow(non_snake_case)]
pub fn compute_E_series(records: &[EnergyRecord], m_const: f64) -> Result<Vec<f64>> {
    check_sorted(records)?;
    let mut out = Vec::with_capacity(records.len());
    let mut acc = m_const;
    for (i, r) in records.iter().enumerate() {
        if i > 0 {
            let p = &records[i - 1];
            acc += 0.5 * (r.cal_e + p.cal_e) * (r.t - p.t);
        }
        out.push(acc);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConcavityPoint {
    pub t: f64,
    /// `E'' E - (1 + sigma) E'^2`
    pub margin: f64,
    /// `max(|E'' E|, (1 + sigma) E'^2)`
    pub scale: f64,
}

/// Concavity defect at every interior record. `E'` is `calE` itself, `E''`
/// the three-point derivative of `calE` on the (possibly uneven) time grid.
pub fn concavity_profile(records: &[EnergyRecord], sigma: f64, m_const: f64) -> Result<Vec<ConcavityPoint>> {
    if records.len() < 3 {
        return Err(Error::invalid(format!("concavity check needs >= 3 records, got {}", records.len())));
    }
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be > 0, got {sigma}")));
    }
    let e = compute_E_series(records, m_const)?;
    let mut out = Vec::with_capacity(records.len() - 2);
    for i in 1..records.len() - 1 {
        let (p, c, n) = (&records[i - 1], &records[i], &records[i + 1]);
        let h1 = c.t - p.t;
        let h2 = n.t - c.t;
        if h1 <= 0.0 || h2 <= 0.0 {
            continue;
        }
        let d2 = (h1 * h1 * n.cal_e - h2 * h2 * p.cal_e - (h1 * h1 - h2 * h2) * c.cal_e) / (h1 * h2 * (h1 + h2));
        let a = d2 * e[i];
        let b = (1.0 + sigma) * c.cal_e * c.cal_e;
        out.push(ConcavityPoint {
            t: c.t,
            margin: a - b,
            scale: a.abs().max(b),
        });
    }
    Ok(out)
}

/// Minimum of `E'' E - (1 + sigma) E'^2` over interior records.
pub fn concavity_margin(records: &[EnergyRecord], sigma: f64, m_const: f64) -> Result<f64> {
    Ok(concavity_profile(records, sigma, m_const)?
        .iter()
        .map(|p| p.margin)
        .fold(f64::INFINITY, f64::min))
}

/// Minimum increment of `calF` between consecutive records.
pub fn monotonicity_margin(records: &[EnergyRecord]) -> Result<f64> {
    if records.len() < 2 {
        return Err(Error::invalid(format!("monotonicity check needs >= 2 records, got {}", records.len())));
    }
    Ok(records
        .windows(2)
        .map(|w| w[1].cal_f - w[0].cal_f)
        .fold(f64::INFINITY, f64::min))
}

/// `max_t calE(t) e^{rate t} / calE(0)`; at most `1 + tol` certifies the envelope.
pub fn decay_margin(records: &[EnergyRecord], rate: f64) -> Result<f64> {
    let first = records.first().ok_or_else(|| Error::invalid("decay check needs records"))?;
    if first.cal_e == 0.0 {
        return Err(Error::invalid("calE(0) = 0"));
    }
    Ok(records
        .iter()
        .map(|r| r.cal_e * (rate * (r.t - first.t)).exp() / first.cal_e)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Outcome of one certified inequality.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certification {
    pub check: String,
    /// raw worst margin over certified records
    pub margin: f64,
    /// worst margin divided by its local scale
    pub normalized_margin: f64,
    pub tolerance: f64,
    pub certified: bool,
    pub records_used: usize,
    pub records_excluded: usize,
}

fn certified_slice(records: &[EnergyRecord], exclude_tail: usize) -> &[EnergyRecord] {
    &records[..records.len().saturating_sub(exclude_tail)]
}

/// `calF` nondecreasing, with scale `|calF_i| + |calF_{i+1}| + (grad_i + grad_{i+1}) / 2` per pair.
pub fn certify_monotonicity(records: &[EnergyRecord], exclude_tail: usize, rel_tol: f64) -> Result<Certification> {
    let used = certified_slice(records, exclude_tail);
    let margin = monotonicity_margin(used)?;
    let normalized = used
        .windows(2)
        .map(|w| {
            let scale = w[0].cal_f.abs() + w[1].cal_f.abs() + 0.5 * (w[0].grad + w[1].grad);
            (w[1].cal_f - w[0].cal_f) / scale.max(f64::MIN_POSITIVE)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(Certification {
        check: "calF nondecreasing".into(),
        margin,
        normalized_margin: normalized,
        tolerance: rel_tol,
        certified: normalized >= -rel_tol,
        records_used: used.len(),
        records_excluded: records.len() - used.len(),
    })
}

pub fn certify_concavity(
    records: &[EnergyRecord],
    sigma: f64,
    m_const: f64,
    exclude_tail: usize,
    rel_tol: f64,
) -> Result<Certification> {
    let used = certified_slice(records, exclude_tail);
    let profile = concavity_profile(used, sigma, m_const)?;
    let margin = profile.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min);
    let normalized = profile
        .iter()
        .map(|p| p.margin / p.scale.max(f64::MIN_POSITIVE))
        .fold(f64::INFINITY, f64::min);
    Ok(Certification {
        check: "E''E - (1+sigma)E'^2 >= 0".into(),
        margin,
        normalized_margin: normalized,
        tolerance: rel_tol,
        certified: normalized >= -rel_tol,
        records_used: used.len(),
        records_excluded: records.len() - used.len(),
    })
}

pub fn certify_decay(records: &[EnergyRecord], rate: f64, tol: f64) -> Result<Certification> {
    let m = decay_margin(records, rate)?;
    Ok(Certification {
        check: format!("calE(t) <= exp(-{rate} t) calE(0)"),
        margin: m,
        normalized_margin: m - 1.0,
        tolerance: tol,
        certified: m <= 1.0 + tol,
        records_used: records.len(),
        records_excluded: 0,
    })
}

fn csv_row(r: &EnergyRecord) -> String {
    [r.t, r.dt, r.l2, r.grad, r.cal_e, r.cal_f, r.supnorm, r.min_u, r.e]
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn csv_string(records: &[EnergyRecord]) -> String {
    let mut s = String::with_capacity(64 * (records.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&csv_row(r));
        s.push('\n');
    }
    s
}

/// Header plus one row per record, 17 significant digits, LF endings.
pub fn write_csv(records: &[EnergyRecord], path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(csv_string(records).as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<EnergyRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::invalid(format!("{}: unexpected header", path.display())));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let v: Vec<f64> = line
                .split(',')
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::invalid(format!("{}:{}: {e}", path.display(), i + 2)))?;
            check_len(9, v.len())?;
            Ok(EnergyRecord {
                t: v[0],
                dt: v[1],
                l2: v[2],
                grad: v[3],
                cal_e: v[4],
                cal_f: v[5],
                supnorm: v[6],
                min_u: v[7],
                e: v[8],
            })
        })
        .collect()
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// True when some field spans more than three decades in magnitude.
pub fn wants_log_axis(records: &[EnergyRecord], fields: &[&str]) -> bool {
    fields.iter().any(|f| {
        let vals: Vec<f64> = records.iter().filter_map(|r| r.field(f)).map(f64::abs).collect();
        let hi = vals.iter().copied().fold(0.0, f64::max);
        let lo = vals.iter().copied().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
        lo.is_finite() && hi / lo > 1e3
    })
}

/// Renders the requested columns against `t` as a standalone SVG document.
pub fn svg_plot(records: &[EnergyRecord], fields: &[&str]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::invalid("cannot plot an empty record list"));
    }
    if fields.is_empty() {
        return Err(Error::invalid("no fields to plot"));
    }
    if let Some(f) = fields.iter().find(|f| records[0].field(f).is_none()) {
        return Err(Error::invalid(format!("unknown field {f:?}")));
    }
    let log = wants_log_axis(records, fields);
    let ty = |v: f64| if log { (v > 0.0).then(|| v.log10()) } else { Some(v) };

    let series: Vec<Vec<(f64, f64)>> = fields
        .iter()
        .map(|f| {
            records
                .iter()
                .filter_map(|r| ty(r.field(f).unwrap()).map(|y| (r.t, y)))
                .filter(|(_, y)| y.is_finite())
                .collect()
        })
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in series.iter().flatten() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }

    let (w, h) = (800.0, 500.0);
    let (left, right, top, bottom) = (90.0, 160.0, 30.0, 60.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let px = sx(fx);
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
            top + ph,
            top + ph + 5.0,
            top + ph + 20.0,
            tick_label(fx)
        );
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let py = sy(fy);
        let label = if log { format!("1e{fy:.2}") } else { tick_label(fy) };
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{left}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{label}</text>"#,
            left - 5.0,
            left - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">t</text>"#,
        left + pw / 2.0,
        h - 15.0
    );
    let ylabel = if log { "value (log10 scale)" } else { "value" };
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {:.2})">{ylabel}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (k, (pts, name)) in series.iter().zip(fields).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.3},{:.3}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let ly = top + 15.0 + 20.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-size="12">{name}</text>"#,
            left + pw + 10.0,
            left + pw + 35.0,
            left + pw + 40.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

pub fn emit_svg_plot(records: &[EnergyRecord], fields: &[&str], path: &Path) -> Result<()> {
    let svg = svg_plot(records, fields)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series<F: Fn(f64) -> f64>(n: usize, t_max: f64, cal_e: F) -> Vec<EnergyRecord> {
        (0..n)
            .map(|i| {
                let t = t_max * i as f64 / (n - 1) as f64;
                EnergyRecord::synthetic(t, cal_e(t), 0.0)
            })
            .collect()
    }

    #[test]
    fn e_series_basics() {
        let one = [EnergyRecord::synthetic(0.0, 3.0, 0.0)];
        assert_eq!(compute_E_series(&one, 2.5).unwrap(), vec![2.5]);
        let recs = series(11, 2.0, |_| 3.0);
        let e = compute_E_series(&recs, 1.0).unwrap();
        assert!((e[10] - 7.0).abs() < 1e-12);
        let mut bad = recs.clone();
        bad.swap(2, 3);
        assert!(compute_E_series(&bad, 0.0).is_err());
    }

    #[test]
    fn e_series_telescopes() {
        let recs: Vec<_> = [0.0, 0.1, 0.35, 0.4, 1.0]
            .iter()
            .map(|&t| EnergyRecord::synthetic(t, 1.0 + t * t, 0.0))
            .collect();
        let e = compute_E_series(&recs, 0.5).unwrap();
        for j in 1..recs.len() {
            let inc = 0.5 * (recs[j].cal_e + recs[j - 1].cal_e) * (recs[j].t - recs[j - 1].t);
            assert!((e[j] - e[j - 1] - inc).abs() <= 4.0 * f64::EPSILON * e[j]);
        }
    }

    #[test]
    fn concavity_exponential_profile_fails() {
        // E = M e^{ct}: E' = c M e^{ct}
        let (m, c, sigma) = (2.0, 1.5, 0.5);
        let recs = series(201, 1.0, |t| c * m * (c * t).exp());
        assert!(concavity_margin(&recs, sigma, m).unwrap() < 0.0);
    }

    #[test]
    fn concavity_constant_energy() {
        let recs = series(5, 1.0, |_| 2.0);
        let m = concavity_margin(&recs, 1.0, 1.0).unwrap();
        assert!((m + 2.0 * 4.0).abs() < 1e-12);
        assert!(concavity_margin(&recs[..2], 1.0, 1.0).is_err());
        assert!(concavity_margin(&recs, 0.0, 1.0).is_err());
    }

    #[test]
    fn monotonicity_examples() {
        let recs = [EnergyRecord::synthetic(0.0, 1.0, 0.0), EnergyRecord::synthetic(1.0, 1.0, 1.0)];
        assert_eq!(monotonicity_margin(&recs).unwrap(), 1.0);
        assert!(monotonicity_margin(&recs[..1]).is_err());
    }

    #[test]
    fn decay_examples() {
        let recs = series(11, 1.0, |t| 3.0 * (-2.0 * t).exp());
        assert!((decay_margin(&recs, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((decay_margin(&recs, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(decay_margin(&recs, 3.0).unwrap() > 1.0);
        assert!(decay_margin(&[], 1.0).is_err());
        assert!(decay_margin(&[EnergyRecord::synthetic(0.0, 0.0, 0.0)], 1.0).is_err());
    }

    #[test]
    fn csv_shapes_and_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_csv(&[], &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), format!("{CSV_HEADER}\n"));

        let r = EnergyRecord {
            t: 0.1,
            dt: 1.0 / 3.0,
            l2: 2.0f64.sqrt(),
            grad: 1e-300,
            cal_e: -0.0,
            cal_f: std::f64::consts::PI,
            supnorm: 12345.678,
            min_u: -1e-17,
            e: 7.0,
        };
        write_csv(&[r], &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(!text.contains('\r'));
        let back = read_csv(&p).unwrap();
        assert_eq!(back.len(), 1);
        for name in CSV_HEADER.split(',') {
            assert_eq!(back[0].field(name).unwrap().to_bits(), r.field(name).unwrap().to_bits(), "{name}");
        }
    }

    #[test]
    fn svg_examples() {
        let recs = series(2, 1.0, |t| 1.0 + t);
        let svg = svg_plot(&recs, &["calE"]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        let pts = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(pts.split(' ').count(), 2);
        assert!(svg.contains(">t</text>"));
        assert!(svg_plot(&[], &["calE"]).is_err());
        assert!(svg_plot(&recs, &["nope"]).is_err());
        assert!(!wants_log_axis(&recs, &["calE"]));
        let steep = series(10, 1.0, |t| (10.0 * t).exp());
        assert!(wants_log_axis(&steep, &["calE"]));
        assert!(svg_plot(&steep, &["calE", "l2"]).unwrap().contains("log10"));
    }
}
