//! Small CSV helpers for the GP commands.

use std::path::Path;

/// Read a two-column x,y CSV. A non-numeric first line is treated as a
/// header; `#` comments and blank lines are skipped.
pub fn read_xy_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 2 {
            return Err(format!(
                "{}:{}: expected two columns x,y",
                path.display(),
                i + 1
            ));
        }
        match (fields[0].parse::<f64>(), fields[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => {
                xs.push(x);
                ys.push(y);
            }
            _ if xs.is_empty() && i == 0 => continue, // header
            _ => {
                return Err(format!(
                    "{}:{}: could not parse {line:?} as numbers",
                    path.display(),
                    i + 1
                ))
            }
        }
    }
    Ok((xs, ys))
}

/// Read the first column of a CSV as points, with the same header rule.
pub fn read_points_csv(path: &Path) -> Result<Vec<f64>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut xs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let first = line.split(',').next().unwrap_or("").trim();
        match first.parse::<f64>() {
            Ok(x) => xs.push(x),
            _ if xs.is_empty() && i == 0 => continue,
            _ => {
                return Err(format!(
                    "{}:{}: could not parse {first:?} as a number",
                    path.display(),
                    i + 1
                ))
            }
        }
    }
    Ok(xs)
}

/// Parse an inline comma-separated point list.
pub fn parse_point_list(spec: &str) -> Result<Vec<f64>, String> {
    spec.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("could not parse point {t:?}"))
        })
        .collect()
}
