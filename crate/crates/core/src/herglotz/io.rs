//! Plain-text kernel tables.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::HerglotzKernel;
use crate::error::{Error, Result};

/// Writes `dim`, `n_nodes` and `omega` header lines, then one row per node:
/// θ components, weight, Re g, Im g.
pub fn write_kernel(kernel: &HerglotzKernel, path: &Path) -> Result<()> {
    std::fs::write(path, kernel_to_string(kernel)).map_err(|e| Error::io(path, e))
}

pub fn kernel_to_string(kernel: &HerglotzKernel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dim {}", kernel.dim);
    let _ = writeln!(s, "n_nodes {}", kernel.len());
    let _ = writeln!(s, "omega {:.16e}", kernel.omega);
    for j in 0..kernel.len() {
        for c in kernel.node(j) {
            let _ = write!(s, "{c:.16e} ");
        }
        let g = kernel.coeffs[j];
        let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", kernel.weights[j], g.re, g.im);
    }
    s
}

pub fn read_kernel(path: &Path) -> Result<HerglotzKernel> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    kernel_from_str(&text)
}

fn header<T: std::str::FromStr>(line: Option<&str>, key: &str) -> Result<T> {
    let line = line.ok_or_else(|| Error::Parse(format!("missing '{key}' header")))?;
    let mut it = line.split_whitespace();
    if it.next() != Some(key) {
        return Err(Error::Parse(format!("expected '{key}' header, found '{line}'")));
    }
    it.next().and_then(|v| v.parse().ok()).ok_or_else(|| Error::Parse(format!("bad value in '{key}' header")))
}

pub fn kernel_from_str(text: &str) -> Result<HerglotzKernel> {
    let mut lines = text.lines();
    let dim: u8 = header(lines.next(), "dim")?;
    let n: usize = header(lines.next(), "n_nodes")?;
    let omega: f64 = header(lines.next(), "omega")?;
    let d = dim as usize;
    let (mut nodes, mut weights, mut coeffs) =
        (Vec::with_capacity(n * d), Vec::with_capacity(n), Vec::with_capacity(n));
    for (k, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("row {k}: {e}"))))
            .collect::<Result<_>>()?;
        if vals.len() != d + 3 {
            return Err(Error::Parse(format!("row {k} has {} columns, expected {}", vals.len(), d + 3)));
        }
        nodes.extend_from_slice(&vals[..d]);
        weights.push(vals[d]);
        coeffs.push(Complex64::new(vals[d + 1], vals[d + 2]));
    }
    if weights.len() != n {
        return Err(Error::Parse(format!("header announces {n} nodes, found {}", weights.len())));
    }
    let k = HerglotzKernel { dim, nodes, weights, coeffs, omega };
    k.validate()?;
    Ok(k)
}
