//! Value parsers for command-line flags. Errors surface as clap usage errors.

use crunch::{Method, ObjectiveKind};

pub fn point(s: &str) -> Result<Vec<f64>, String> {
    let coords = s
        .split(',')
        .map(|c| {
            let c = c.trim();
            let v: f64 = c
                .parse()
                .map_err(|_| format!("`{c}` is not a number (in point `{s}`)"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("coordinate `{c}` is not finite"))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    if coords.is_empty() {
        return Err("empty point".into());
    }
    Ok(coords)
}

/// Either `x,y;x,y;...` or a diagonal range `lo:hi:step` (inclusive).
/// Ranges expand to `[s; dimension]` for every `s` in the range.
pub fn starts(s: &str, dimension: usize) -> Result<Vec<Vec<f64>>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("no start points given".into());
    }
    if s.contains(':') {
        return diagonal_range(s, dimension);
    }
    let points = s
        .split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(point)
        .collect::<Result<Vec<_>, _>>()?;
    if points.is_empty() {
        return Err("no start points given".into());
    }
    Ok(points)
}

fn diagonal_range(s: &str, dimension: usize) -> Result<Vec<Vec<f64>>, String> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad range `{s}`"))
        })
        .collect::<Result<_, _>>()?;
    let [lo, hi, step] = parts[..] else {
        return Err(format!("range `{s}` must look like lo:hi:step"));
    };
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || hi < lo {
        return Err(format!("range `{s}` needs finite lo <= hi and step > 0"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| vec![lo + step * i as f64; dimension])
        .collect())
}

pub fn method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: crunch::Error| e.to_string())
}

pub fn methods(s: &str) -> Result<Vec<Method>, String> {
    Method::parse_list(s).map_err(|e| e.to_string())
}

pub fn objective_kind(s: &str) -> Result<ObjectiveKind, String> {
    s.parse().map_err(|e: crunch::Error| e.to_string())
}
