//! Plain-text store of normalized graph kernel values, one
//! `id_a id_b w d value` line per unordered pair and grid point.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use super::graph_kernel::GraphKernelBank;
use crate::error::{GboError, Result};

pub fn format_kernel_cache(bank: &GraphKernelBank, ids: &[String]) -> Result<String> {
    if ids.len() != bank.len() {
        return Err(GboError::DimensionMismatch { expected: bank.len(), actual: ids.len() });
    }
    let mut out = String::new();
    for (g, &(w, d)) in bank.grid().iter().enumerate() {
        for i in 0..ids.len() {
            for j in i..ids.len() {
                writeln!(out, "{} {} {} {} {:?}", ids[i], ids[j], w, d, bank.value(g, i, j)).unwrap();
            }
        }
    }
    Ok(out)
}

pub fn write_kernel_cache(path: &Path, bank: &GraphKernelBank, ids: &[String]) -> Result<()> {
    std::fs::write(path, format_kernel_cache(bank, ids)?)?;
    Ok(())
}

/// Rebuilds a bank for `ids` (in that order) from cache text. Every grid
/// point found in the file must cover every pair.
pub fn parse_kernel_cache(text: &str, path: &Path, ids: &[String]) -> Result<GraphKernelBank> {
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let n = ids.len();
    let mut mats: BTreeMap<(usize, usize), (Vec<f64>, usize)> = BTreeMap::new();
    let err = |line: usize, message: String| GboError::Parse { path: path.to_path_buf(), line, message };
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 5 {
            return Err(err(lineno, format!("expected 5 fields, found {}", parts.len())));
        }
        let (Some(&a), Some(&b)) = (index.get(parts[0]), index.get(parts[1])) else {
            continue;
        };
        let w: usize = parts[2].parse().map_err(|_| err(lineno, format!("bad window `{}`", parts[2])))?;
        let d: usize = parts[3].parse().map_err(|_| err(lineno, format!("bad dimension `{}`", parts[3])))?;
        let v: f64 = parts[4].parse().map_err(|_| err(lineno, format!("bad value `{}`", parts[4])))?;
        let (m, filled) = mats.entry((w, d)).or_insert_with(|| (vec![f64::NAN; n * n], 0));
        if m[a * n + b].is_nan() {
            *filled += if a == b { 1 } else { 2 };
        }
        m[a * n + b] = v;
        m[b * n + a] = v;
    }
    let mut entries = Vec::new();
    for (point, (m, filled)) in mats {
        if filled != n * n {
            return Err(GboError::Config(format!(
                "kernel cache {} misses pairs for grid point {:?}",
                path.display(),
                point
            )));
        }
        entries.push((point, m));
    }
    GraphKernelBank::from_dense(n, entries)
}

pub fn read_kernel_cache(path: &Path, ids: &[String]) -> Result<GraphKernelBank> {
    let text = std::fs::read_to_string(path)?;
    parse_kernel_cache(&text, path, ids)
}
