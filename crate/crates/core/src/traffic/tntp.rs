//! Reader for the TNTP network and trip-table text formats.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{GboError, Result};

/// A directed link with BPR cost parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    /// Zero-based tail node.
    pub from: usize,
    /// Zero-based head node.
    pub to: usize,
    pub capacity: f64,
    pub length: f64,
    pub free_flow_time: f64,
    pub b: f64,
    pub power: f64,
}

/// Positive demand from `origin` to `destination` (zero-based nodes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Demand {
    pub origin: usize,
    pub destination: usize,
    pub flow: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficNetwork {
    pub node_count: usize,
    pub zone_count: usize,
    /// Zero-based; zones below this index are never passed through.
    pub first_thru_node: usize,
    pub links: Vec<Link>,
    pub demand: Vec<Demand>,
}

impl TrafficNetwork {
    pub fn total_demand(&self) -> f64 {
        self.demand.iter().map(|d| d.flow).sum()
    }

    /// Same network with the links at `removed` dropped.
    pub fn without_links(&self, removed: &[usize]) -> TrafficNetwork {
        let mut keep = vec![true; self.links.len()];
        for &i in removed {
            keep[i] = false;
        }
        TrafficNetwork {
            links: self.links.iter().zip(&keep).filter(|(_, &k)| k).map(|(l, _)| l.clone()).collect(),
            ..self.clone()
        }
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> GboError {
    GboError::Parse { path: path.to_path_buf(), line, message: message.into() }
}

/// Splits off `<KEY> value` metadata lines; returns the metadata and the
/// 1-based number of the first body line.
fn metadata<'a>(lines: &[&'a str], path: &Path) -> Result<(BTreeMap<String, (String, usize)>, usize)> {
    let mut meta = BTreeMap::new();
    for (i, raw) in lines.iter().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('~') {
            continue;
        }
        if !line.starts_with('<') {
            return Ok((meta, i));
        }
        let close = line.find('>').ok_or_else(|| parse_err(path, i + 1, "unterminated metadata tag"))?;
        let key = line[1..close].trim().to_uppercase();
        if key == "END OF METADATA" {
            return Ok((meta, i + 1));
        }
        meta.insert(key, (line[close + 1..].trim().to_string(), i + 1));
    }
    Ok((meta, lines.len()))
}

fn meta_number<T: std::str::FromStr>(
    meta: &BTreeMap<String, (String, usize)>,
    key: &str,
    path: &Path,
) -> Result<Option<T>> {
    match meta.get(key) {
        None => Ok(None),
        Some((v, line)) => v
            .parse()
            .map(Some)
            .map_err(|_| parse_err(path, *line, format!("bad value `{v}` for <{key}>"))),
    }
}

/// Parses a `*_net.tntp` file body. The demand is left empty.
pub fn parse_net(text: &str, path: &Path) -> Result<TrafficNetwork> {
    let lines: Vec<&str> = text.lines().collect();
    let (meta, body) = metadata(&lines, path)?;
    let need = |key: &str| -> Result<usize> {
        meta_number(&meta, key, path)?.ok_or_else(|| parse_err(path, 1, format!("missing <{key}>")))
    };
    let node_count = need("NUMBER OF NODES")?;
    let zone_count = need("NUMBER OF ZONES")?;
    let link_count = need("NUMBER OF LINKS")?;
    let first_thru: usize = meta_number(&meta, "FIRST THRU NODE", path)?.unwrap_or(1);
    if zone_count > node_count {
        return Err(parse_err(path, 1, "more zones than nodes"));
    }

    let mut links = Vec::with_capacity(link_count);
    for (i, raw) in lines.iter().enumerate().skip(body) {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('~') {
            continue;
        }
        let line = line.trim_end_matches(';').trim();
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 7 {
            return Err(parse_err(path, lineno, format!("expected at least 7 fields, found {}", fields.len())));
        }
        let num = |k: usize, name: &str| -> Result<f64> {
            fields[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(path, lineno, format!("bad {name} `{}`", fields[k])))
        };
        let node = |k: usize| -> Result<usize> {
            match fields[k].parse::<usize>() {
                Ok(v) if (1..=node_count).contains(&v) => Ok(v - 1),
                _ => Err(parse_err(path, lineno, format!("bad node `{}`", fields[k]))),
            }
        };
        let link = Link {
            from: node(0)?,
            to: node(1)?,
            capacity: num(2, "capacity")?,
            length: num(3, "length")?,
            free_flow_time: num(4, "free flow time")?,
            b: num(5, "b")?,
            power: num(6, "power")?,
        };
        if !(link.capacity > 0.0) {
            return Err(parse_err(path, lineno, "capacity must be positive"));
        }
        if link.free_flow_time < 0.0 || link.b < 0.0 || link.power < 0.0 {
            return Err(parse_err(path, lineno, "negative cost parameter"));
        }
        links.push(link);
    }
    if links.len() != link_count {
        return Err(parse_err(
            path,
            lines.len(),
            format!("header declares {link_count} links, found {}", links.len()),
        ));
    }
    Ok(TrafficNetwork {
        node_count,
        zone_count,
        first_thru_node: first_thru.saturating_sub(1),
        links,
        demand: Vec::new(),
    })
}

/// Parses a `*_trips.tntp` body into positive OD demands. An empty file is
/// zero demand. The sum must match `<TOTAL OD FLOW>` when present.
pub fn parse_trips(text: &str, path: &Path, zone_count: usize) -> Result<Vec<Demand>> {
    let lines: Vec<&str> = text.lines().collect();
    let (meta, body) = metadata(&lines, path)?;
    if let Some(z) = meta_number::<usize>(&meta, "NUMBER OF ZONES", path)? {
        if z != zone_count {
            return Err(parse_err(path, meta["NUMBER OF ZONES"].1, format!("{z} zones, network has {zone_count}")));
        }
    }
    let total: Option<f64> = meta_number(&meta, "TOTAL OD FLOW", path)?;

    let mut demand = Vec::new();
    let mut listed = 0.0;
    let mut origin: Option<usize> = None;
    for (i, raw) in lines.iter().enumerate().skip(body) {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('~') {
            continue;
        }
        let zone = |s: &str| -> Result<usize> {
            match s.trim().parse::<usize>() {
                Ok(v) if (1..=zone_count).contains(&v) => Ok(v - 1),
                _ => Err(parse_err(path, lineno, format!("bad zone `{}`", s.trim()))),
            }
        };
        if let Some(rest) = line.strip_prefix("Origin") {
            origin = Some(zone(rest)?);
            continue;
        }
        let o = origin.ok_or_else(|| parse_err(path, lineno, "entry before any Origin line"))?;
        for entry in line.split(';').map(str::trim).filter(|e| !e.is_empty()) {
            let (d, v) = entry
                .split_once(':')
                .ok_or_else(|| parse_err(path, lineno, format!("expected `dest : flow`, found `{entry}`")))?;
            let destination = zone(d)?;
            let flow: f64 = v
                .trim()
                .parse()
                .ok()
                .filter(|f: &f64| f.is_finite() && *f >= 0.0)
                .ok_or_else(|| parse_err(path, lineno, format!("bad flow `{}`", v.trim())))?;
            listed += flow;
            if flow > 0.0 && destination != o {
                demand.push(Demand { origin: o, destination, flow });
            }
        }
    }
    if let Some(expected) = total {
        // intrazonal entries count toward the declared total
        let found = listed;
        if (found - expected).abs() > 1e-6 * expected.abs().max(1.0) + 1e-3 {
            return Err(parse_err(path, meta["TOTAL OD FLOW"].1, format!("declared total {expected}, found {found}")));
        }
    }
    Ok(demand)
}

/// Reads a network and, optionally, its trip table.
pub fn read_tntp(net_path: &Path, trips_path: Option<&Path>) -> Result<TrafficNetwork> {
    let mut net = parse_net(&std::fs::read_to_string(net_path)?, net_path)?;
    if let Some(p) = trips_path {
        net.demand = parse_trips(&std::fs::read_to_string(p)?, p, net.zone_count)?;
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    const NET: &str = "<NUMBER OF ZONES> 2\n<NUMBER OF NODES> 3\n<FIRST THRU NODE> 1\n<NUMBER OF LINKS> 3\n<END OF METADATA>\n\n~ from to cap len fft b p\n\t1\t3\t100\t1\t2\t0.15\t4\t0\t0\t1\t;\n\t3\t2\t50.5\t1\t1\t0.15\t4\t0\t0\t1\t;\n\t1\t2\t10\t3\t6\t0.5\t2\t;\n";
    const TRIPS: &str = "<NUMBER OF ZONES> 2\n<TOTAL OD FLOW> 40.0\n<END OF METADATA>\n\nOrigin 1\n    1 :    0.0;    2 :   30.0;\nOrigin 2\n    1 :   10.0;\n";

    #[test]
    fn parses_small_files() {
        let net = parse_net(NET, Path::new("n")).unwrap();
        assert_eq!(net.node_count, 3);
        assert_eq!(net.links.len(), 3);
        assert_eq!(net.links[1], Link { from: 2, to: 1, capacity: 50.5, length: 1.0, free_flow_time: 1.0, b: 0.15, power: 4.0 });
        let d = parse_trips(TRIPS, Path::new("t"), 2).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d[0], Demand { origin: 0, destination: 1, flow: 30.0 });
        assert!(parse_trips("", Path::new("t"), 2).unwrap().is_empty());
    }

    #[test]
    fn count_mismatch_is_an_error() {
        let bad = NET.replace("<NUMBER OF LINKS> 3", "<NUMBER OF LINKS> 4");
        assert!(matches!(parse_net(&bad, Path::new("n")), Err(GboError::Parse { .. })));
        let bad = TRIPS.replace("40.0", "41.0");
        assert!(parse_trips(&bad, Path::new("t"), 2).is_err());
    }

    #[test]
    fn malformed_records_report_lines() {
        let bad = NET.replace("\t3\t2\t50.5", "\t3\t9\t50.5");
        match parse_net(&bad, Path::new("n")) {
            Err(GboError::Parse { line, .. }) => assert_eq!(line, 9),
            other => panic!("{other:?}"),
        }
        let bad = TRIPS.replace("2 :   30.0", "2 -   30.0");
        assert!(parse_trips(&bad, Path::new("t"), 2).is_err());
        assert!(parse_trips("1 : 3.0;\n", Path::new("t"), 2).is_err());
    }
}
