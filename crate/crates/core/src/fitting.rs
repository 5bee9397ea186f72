//! Log-linear regressions for the transmission deficit and the trapped mass.

use crate::error::{invalid, Error, Result};

/// Smallest trapped mass that can be fitted, `e^{-14}`.
pub fn measurement_floor() -> f64 {
    (-14.0f64).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// `a` or `d`.
    pub coefficient: f64,
    /// `b` or `f`.
    pub exponent: f64,
    /// RMS residual of the linearized fit.
    pub residual: f64,
    /// `(v, value)` pairs, sorted by `v`.
    pub points_used: Vec<(f64, f64)>,
}

/// Ordinary least squares `y = c0 + c1 x`; returns `(c0, c1, rms)`.
pub fn linear_regression(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::Dimension {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!("{} points", xs.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("abscissae are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok((intercept, slope, (rss / n).sqrt()))
}

fn sorted(points: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "at least 3 points are needed, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| !(p.0.is_finite() && p.1.is_finite())) {
        return Err(invalid("points", format!("non-finite point {p:?}")));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    Ok(pts)
}

/// Fits `T(v) = 1/(1+α²) - a v^{-b}` by regressing `log(1/(1+α²) - T)` on
/// `log v`.
pub fn fit_power_law(points: &[(f64, f64)], alpha: f64) -> Result<FitResult> {
    let pts = sorted(points)?;
    if let Some(p) = pts.iter().find(|p| p.0 <= 0.0) {
        return Err(invalid("v", format!("velocities must be positive, got {}", p.0)));
    }
    let limit = 1.0 / (1.0 + alpha * alpha);
    let bad: Vec<f64> = pts.iter().filter(|p| limit - p.1 <= 0.0).map(|p| p.0).collect();
    if !bad.is_empty() {
        return Err(Error::NonPositiveDeficit { velocities: bad });
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| (limit - p.1).ln()).collect();
    let (c0, c1, residual) = linear_regression(&xs, &ys)?;
    Ok(FitResult {
        coefficient: c0.exp(),
        exponent: -c1,
        residual,
        points_used: pts,
    })
}

/// Fits `B(v) = d e^{-f v}` by regressing `log B` on `v`.
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<FitResult> {
    let pts = sorted(points)?;
    let floor = measurement_floor();
    let bad: Vec<f64> = pts.iter().filter(|p| p.1 <= floor).map(|p| p.0).collect();
    if !bad.is_empty() {
        return Err(Error::BelowFloor { velocities: bad });
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (c0, c1, residual) = linear_regression(&xs, &ys)?;
    Ok(FitResult {
        coefficient: c0.exp(),
        exponent: -c1,
        residual,
        points_used: pts,
    })
}

pub const FIT_HEADER: &str = "alpha,coefficient,exponent,residual,n_points";

/// One fit-report line per `(alpha, fit)`.
pub fn fit_report_csv(fits: &[(f64, FitResult)]) -> String {
    let mut s = String::from(FIT_HEADER);
    s.push('\n');
    for (alpha, f) in fits {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            alpha,
            f.coefficient,
            f.exponent,
            f.residual,
            f.points_used.len()
        ));
    }
    s
}

/// Reads a headed CSV and returns the named columns as rows of `f64`.
pub fn read_columns(text: &str, columns: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(Error::Parse {
            line: 1,
            message: "missing header".into(),
        });
    };
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let idx: Vec<usize> = columns
        .iter()
        .map(|c| {
            names.iter().position(|n| n == c).ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("missing column `{c}`"),
            })
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != names.len() {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected {} fields, found {}", names.len(), fields.len()),
            });
        }
        let row = idx
            .iter()
            .map(|&k| {
                fields[k].parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 1,
                    message: format!("column `{}`: {e}", names[k]),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
