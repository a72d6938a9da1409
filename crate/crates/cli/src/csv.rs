//! Path CSV: header `t,x1,…,xm,y1,…,yn`, one row per grid node.
//!
//! Values are written with Rust's shortest round-trip formatting, so a
//! written file reads back bit-identically.

use std::fmt::Write as _;

use qmbvp_core::{Grid, PathPair, VecPath};

use crate::config::ConfigError;

fn header(prefixes: &[(&str, usize)]) -> String {
    let mut h = String::from("t");
    for (p, n) in prefixes {
        for i in 1..=*n {
            let _ = write!(h, ",{p}{i}");
        }
    }
    h.push('\n');
    h
}

fn rows(grid: &Grid, blocks: &[&VecPath]) -> String {
    let mut s = String::new();
    for (k, t) in grid.nodes().enumerate() {
        let _ = write!(s, "{t}");
        for b in blocks {
            for v in b.at(k) {
                let _ = write!(s, ",{v}");
            }
        }
        s.push('\n');
    }
    s
}

pub fn pair_to_csv(pair: &PathPair) -> String {
    let mut s = header(&[("x", pair.x.dim()), ("y", pair.y.dim())]);
    s.push_str(&rows(pair.grid(), &[&pair.x, &pair.y]));
    s
}

/// A single path with columns `t,{prefix}1,…`.
pub fn path_to_csv(path: &VecPath, prefix: &str) -> String {
    let mut s = header(&[(prefix, path.dim())]);
    s.push_str(&rows(path.grid(), &[path]));
    s
}

/// Columns of plain numbers under an arbitrary header.
pub fn table_to_csv(columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = columns.join(",");
    s.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| format!("{v}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Reads a pair CSV; the grid is rebuilt from the first and last `t` and
/// must be uniform.
pub fn pair_from_csv(text: &str) -> Result<PathPair, ConfigError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let Some(head) = lines.next() else {
        return bad("empty CSV");
    };
    let cols: Vec<&str> = head.split(',').map(str::trim).collect();
    if cols.first() != Some(&"t") {
        return bad("CSV header must start with t");
    }
    let m = cols.iter().filter(|c| c.starts_with('x')).count();
    let n = cols.iter().filter(|c| c.starts_with('y')).count();
    if m == 0 || n == 0 || m + n + 1 != cols.len() {
        return bad("CSV header must be t,x1..xm,y1..yn");
    }
    let mut ts = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (no, line) in lines.enumerate() {
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| ConfigError(format!("CSV row {} is not numeric", no + 2)))?;
        if vals.len() != cols.len() {
            return bad(format!("CSV row {} has {} fields, expected {}", no + 2, vals.len(), cols.len()));
        }
        ts.push(vals[0]);
        xs.extend_from_slice(&vals[1..=m]);
        ys.extend_from_slice(&vals[1 + m..]);
    }
    if ts.len() < 3 || ts[0] != 0.0 {
        return bad("CSV needs at least three rows starting at t = 0");
    }
    let grid = Grid::new(ts[ts.len() - 1], ts.len() - 1).map_err(|e| ConfigError(e.to_string()))?;
    for (k, &t) in ts.iter().enumerate() {
        if (grid.node(k) - t).abs() > 1e-9 * grid.horizon().max(1.0) {
            return bad(format!("CSV grid is not uniform at row {}", k + 2));
        }
    }
    let x = VecPath::new(grid, m, xs).map_err(|e| ConfigError(e.to_string()))?;
    let y = VecPath::new(grid, n, ys).map_err(|e| ConfigError(e.to_string()))?;
    PathPair::new(x, y).map_err(|e| ConfigError(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PathPair {
        let g = Grid::new(0.7, 9).unwrap();
        PathPair::new(
            VecPath::from_fn(g, 2, |t, o| {
                o[0] = t.sin() / 3.0;
                o[1] = -1e-300 * t;
            })
            .unwrap(),
            VecPath::from_fn(g, 1, |t, o| o[0] = (t * 10.0).exp2()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn header_shape() {
        let csv = pair_to_csv(&sample());
        assert!(csv.starts_with("t,x1,x2,y1\n"));
        assert_eq!(csv.lines().count(), 11);
    }

    #[test]
    fn round_trip_is_exact() {
        let p = sample();
        let q = pair_from_csv(&pair_to_csv(&p)).unwrap();
        assert_eq!(p.x.values(), q.x.values());
        assert_eq!(p.y.values().len(), q.y.values().len());
        for (a, b) in p.y.values().iter().zip(q.y.values()) {
            assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
        }
        assert_eq!(p.grid(), q.grid());
    }

    #[test]
    fn rejects_malformed_tables() {
        assert!(pair_from_csv("").is_err());
        assert!(pair_from_csv("s,x1,y1\n0,1,2\n").is_err());
        assert!(pair_from_csv("t,x1,y1\n0,1,2\n0.5,1\n1,1,2\n").is_err());
        assert!(pair_from_csv("t,x1,y1\n0,1,2\n0.2,1,2\n1,1,2\n").is_err());
        assert!(pair_from_csv("t,x1,y1\n0,1,2\n0.5,a,2\n1,1,2\n").is_err());
    }
}
