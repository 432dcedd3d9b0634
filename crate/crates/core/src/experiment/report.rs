use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::runner::{median, quantile, Summary};
use crate::error::{GboError, Result};

/// Columns of a CSV file keyed by header name.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<String> = lines.next().unwrap_or("").split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let row: Vec<String> = line.split(',').map(str::to_string).collect();
            if row.len() != header.len() {
                return Err(GboError::Parse {
                    path: path.to_path_buf(),
                    line: n + 2,
                    message: format!("expected {} fields, found {}", header.len(), row.len()),
                });
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, path)
    }

    /// Numeric column; empty cells become `None`.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j].parse().ok()).collect())
    }
}

/// Run and fit tables of one output directory grouped by strategy.
#[derive(Debug, Clone)]
pub struct RunDir {
    pub path: PathBuf,
    pub summary: Summary,
    pub runs: BTreeMap<String, Vec<(u64, Table)>>,
    pub fits: BTreeMap<String, Vec<(u64, Table)>>,
}

fn parse_stem(stem: &str) -> Option<(String, u64, bool)> {
    let (stem, fits) = match stem.strip_suffix("-fits") {
        Some(s) => (s, true),
        None => (stem, false),
    };
    let (strategy, seed) = stem.rsplit_once("-s")?;
    Some((strategy.to_string(), seed.parse().ok()?, fits))
}

impl RunDir {
    pub fn load(path: &Path) -> Result<Self> {
        let summary: Summary = serde_json::from_str(&std::fs::read_to_string(path.join("summary.json"))?)?;
        let mut runs: BTreeMap<String, Vec<(u64, Table)>> = BTreeMap::new();
        let mut fits: BTreeMap<String, Vec<(u64, Table)>> = BTreeMap::new();
        let mut entries: Vec<PathBuf> = std::fs::read_dir(path)?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        entries.sort();
        for file in entries {
            if file.extension().and_then(|e| e.to_str()) != Some("csv") {
                continue;
            }
            let Some((strategy, seed, is_fit)) = file.file_stem().and_then(|s| s.to_str()).and_then(parse_stem) else {
                continue;
            };
            let table = Table::read(&file)?;
            let target = if is_fit { &mut fits } else { &mut runs };
            target.entry(strategy).or_default().push((seed, table));
        }
        for v in runs.values_mut().chain(fits.values_mut()) {
            v.sort_by_key(|(s, _)| *s);
        }
        Ok(Self { path: path.to_path_buf(), summary, runs, fits })
    }

    /// Mean and variance of best-so-far across seeds at each iteration.
    pub fn curve(&self, strategy: &str) -> Vec<(f64, f64)> {
        let Some(runs) = self.runs.get(strategy) else { return Vec::new() };
        let cols: Vec<Vec<f64>> = runs
            .iter()
            .map(|(_, t)| t.column("best_so_far").unwrap_or_default().into_iter().flatten().collect())
            .collect();
        let len = cols.iter().map(Vec::len).max().unwrap_or(0);
        (0..len)
            .map(|i| {
                // runs that stopped early keep their final value
                let v: Vec<f64> = cols.iter().filter_map(|c| c.get(i).or(c.last()).copied()).collect();
                let n = v.len() as f64;
                let mean = v.iter().sum::<f64>() / n;
                let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
                (mean, var)
            })
            .collect()
    }

    /// Per-parameter values of the final fit of each seed.
    pub fn final_params(&self, strategy: &str) -> BTreeMap<String, Vec<f64>> {
        let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for (_, t) in self.fits.get(strategy).into_iter().flatten() {
            let Some(last) = t.rows.last() else { continue };
            for (h, cell) in t.header.iter().zip(last) {
                if h == "alpha" || h.starts_with("beta_") || h.starts_with("l_") {
                    if let Ok(v) = cell.parse() {
                        out.entry(h.clone()).or_default().push(v);
                    }
                }
            }
        }
        out
    }
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "-".into()
    } else {
        format!("{v:.4}")
    }
}

/// Text report over one or more output directories.
pub fn report(dirs: &[RunDir]) -> String {
    let mut out = String::new();
    for dir in dirs {
        let s = &dir.summary;
        writeln!(out, "# {} ({})", s.name, dir.path.display()).unwrap();
        writeln!(out, "candidates {}  budget {}  optimum {}", s.candidates, s.budget, s.optimum).unwrap();
        if !s.excluded.is_empty() {
            writeln!(out, "excluded {} infeasible candidates", s.excluded.len()).unwrap();
        }
        writeln!(out, "\nstrategy      median     q1     q3  found  gamma").unwrap();
        for st in &s.strategies {
            writeln!(
                out,
                "{:<12} {:>7.1} {:>6.1} {:>6.1} {:>3}/{:<2} {}",
                st.strategy,
                st.median,
                st.q1,
                st.q3,
                st.found,
                st.seeds.len(),
                st.gamma_median.map_or("-".into(), fmt)
            )
            .unwrap();
        }
        writeln!(out, "\nbest so far, mean (variance) across seeds").unwrap();
        let names: Vec<&String> = dir.runs.keys().collect();
        let curves: Vec<Vec<(f64, f64)>> = names.iter().map(|n| dir.curve(n)).collect();
        write!(out, "iter").unwrap();
        for n in &names {
            write!(out, "  {n:>24}").unwrap();
        }
        out.push('\n');
        let len = curves.iter().map(Vec::len).max().unwrap_or(0);
        for i in (0..len).filter(|i| (i + 1) % 10 == 0 || i + 1 == len) {
            write!(out, "{:>4}", i + 1).unwrap();
            for c in &curves {
                match c.get(i) {
                    Some((m, v)) => write!(out, "  {:>12} ({:>9})", fmt(*m), fmt(*v)).unwrap(),
                    None => write!(out, "  {:>24}", "-").unwrap(),
                }
            }
            out.push('\n');
        }
        for name in dir.fits.keys() {
            let params = dir.final_params(name);
            if params.is_empty() {
                continue;
            }
            writeln!(out, "\nfinal hyperparameters of {name}: q1 / median / q3").unwrap();
            for (p, v) in &params {
                let inv: Vec<f64>;
                let (label, vals) = if p.starts_with("l_") {
                    inv = v.iter().map(|l| 1.0 / l).collect();
                    (format!("1/{p}"), &inv)
                } else {
                    (p.clone(), v)
                };
                writeln!(
                    out,
                    "  {label:<40} {} / {} / {}",
                    fmt(quantile(vals, 0.25)),
                    fmt(median(vals)),
                    fmt(quantile(vals, 0.75))
                )
                .unwrap();
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems() {
        assert_eq!(parse_stem("bo_f-s12"), Some(("bo_f".into(), 12, false)));
        assert_eq!(parse_stem("gbo_base-s3-fits"), Some(("gbo_base".into(), 3, true)));
        assert_eq!(parse_stem("summary"), None);
    }

    #[test]
    fn table_columns() {
        let t = Table::parse("a,b\n1,\n2,3\n", Path::new("t.csv")).unwrap();
        assert_eq!(t.column("b").unwrap(), vec![None, Some(3.0)]);
        assert!(Table::parse("a,b\n1\n", Path::new("t.csv")).is_err());
    }
}
