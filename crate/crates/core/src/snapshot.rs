//! Plain-text field snapshots.
//!
//! A snapshot is a block of `# key=value` header lines followed by one
//! `x,re,im` row per node. Values are written with 17 significant digits,
//! so reading a snapshot back reproduces the field bit for bit.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fem::{ComplexField, Mesh1D};

/// Format tag written as `scheme`.
pub const SCHEME_VERSION: &str = "p1-midpoint-1";

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotHeader {
    pub q: f64,
    pub v: f64,
    pub x0: f64,
    pub t: f64,
    pub scheme: String,
}

impl SnapshotHeader {
    pub fn new(q: f64, v: f64, x0: f64, t: f64) -> Self {
        Self {
            q,
            v,
            x0,
            t,
            scheme: SCHEME_VERSION.to_string(),
        }
    }
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn render(u: &ComplexField, header: &SnapshotHeader) -> String {
    let mesh = u.mesh();
    let mut s = String::with_capacity(64 * (mesh.len() + 8));
    s.push_str(&format!("# q={}\n", sci(header.q)));
    s.push_str(&format!("# v={}\n", sci(header.v)));
    s.push_str(&format!("# x0={}\n", sci(header.x0)));
    s.push_str(&format!("# t={}\n", sci(header.t)));
    s.push_str(&format!("# R={}\n", sci(mesh.half_width())));
    s.push_str(&format!("# nodes={}\n", mesh.len()));
    s.push_str(&format!("# scheme={}\n", header.scheme));
    for (x, z) in mesh.nodes().iter().zip(&u.values) {
        s.push_str(&format!("{},{},{}\n", sci(*x), sci(z.re), sci(z.im)));
    }
    s
}

fn parse_f64(text: &str, line: usize, what: &str) -> Result<f64> {
    text.trim().parse::<f64>().map_err(|e| Error::Parse {
        line,
        message: format!("{what}: {e}"),
    })
}

pub fn parse(text: &str) -> Result<(SnapshotHeader, ComplexField)> {
    let mut keys: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if let Some(rest) = l.strip_prefix('#') {
            if !nodes.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "header line after data rows".into(),
                });
            }
            let (k, v) = rest.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `# key=value`, found `{l}`"),
            })?;
            keys.insert(k.trim().to_string(), (line, v.trim().to_string()));
            continue;
        }
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected `x,re,im`, found {} fields", fields.len()),
            });
        }
        nodes.push(parse_f64(fields[0], line, "x")?);
        values.push(Complex64::new(
            parse_f64(fields[1], line, "re")?,
            parse_f64(fields[2], line, "im")?,
        ));
    }
    let get = |k: &str| -> Result<f64> {
        let (line, v) = keys.get(k).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing header key `{k}`"),
        })?;
        parse_f64(v, *line, k)
    };
    let header = SnapshotHeader {
        q: get("q")?,
        v: get("v")?,
        x0: get("x0")?,
        t: get("t")?,
        scheme: keys.get("scheme").map(|(_, s)| s.clone()).unwrap_or_default(),
    };
    let count = get("nodes")?;
    if count != nodes.len() as f64 {
        return Err(Error::Parse {
            line: keys["nodes"].0,
            message: format!("header announces {count} nodes, found {}", nodes.len()),
        });
    }
    let r = get("R")?;
    if nodes.last() != Some(&r) {
        return Err(Error::Parse {
            line: keys["R"].0,
            message: format!("R = {r} does not match the last node"),
        });
    }
    let mesh = Arc::new(Mesh1D::from_nodes(nodes)?);
    Ok((header, ComplexField::new(mesh, values)?))
}

pub fn write(path: &Path, u: &ComplexField, header: &SnapshotHeader) -> Result<()> {
    std::fs::write(path, render(u, header))?;
    Ok(())
}

/// Reads a snapshot; warns when the file name carries a `t<time>` tag that
/// disagrees with the header.
pub fn read(path: &Path) -> Result<(SnapshotHeader, ComplexField)> {
    let text = std::fs::read_to_string(path)?;
    let (header, u) = parse(&text)?;
    if let Some(t) = time_from_name(path) {
        if (t - header.t).abs() > 1e-9 * header.t.abs().max(1.0) {
            log::warn!(
                "{}: file name says t = {t} but header says t = {}",
                path.display(),
                header.t
            );
        }
    }
    Ok((header, u))
}

/// File name used for a snapshot at time `t`.
pub fn file_name(t: f64) -> String {
    format!("snapshot_t{t:.4}.csv")
}

/// Time encoded in a name produced by [`file_name`].
pub fn time_from_name(path: &Path) -> Option<f64> {
    let stem = path.file_stem()?.to_str()?;
    stem.strip_prefix("snapshot_t")?.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::project;

    fn field() -> ComplexField {
        let mesh = Arc::new(Mesh1D::with_spacing(4.0, 0.5, 0.125).unwrap());
        project(&mesh, |x| Complex64::new((0.3 * x).sin() / 3.0, 1.0 / (x + 0.1).cosh()))
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let u = field();
        let h = SnapshotHeader::new(3.0, 3.0, -10.0, 1.0 / 3.0);
        let (h2, u2) = parse(&render(&u, &h)).unwrap();
        assert_eq!(h, h2);
        assert_eq!(u.mesh().nodes(), u2.mesh().nodes());
        for (a, b) in u.values.iter().zip(&u2.values) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let u = field();
        let text = render(&u, &SnapshotHeader::new(0.0, 1.0, 0.0, 0.0));
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[9] = "0.1,oops,0".into();
        let err = parse(&lines.join("\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 10, .. }), "{err:?}");

        let truncated: String = text.lines().take(12).collect::<Vec<_>>().join("\n");
        assert!(matches!(parse(&truncated), Err(Error::Parse { .. })));
        assert!(matches!(parse("# q\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn name_carries_time() {
        assert_eq!(time_from_name(Path::new(&file_name(2.7))), Some(2.7));
        assert_eq!(time_from_name(Path::new("other.csv")), None);
    }
}
