use std::fmt;
use std::str::FromStr;

/// Power grid as given on the command line: `min:max:count` or `a,b,c`.
#[derive(Debug, Clone, PartialEq)]
pub enum PowerGrid {
    Range { min: f64, max: f64, count: usize },
    List(Vec<f64>),
}

impl PowerGrid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            PowerGrid::List(v) => v.clone(),
            PowerGrid::Range { min, count: 1, .. } => vec![*min],
            PowerGrid::Range { min, max, count } => {
                let last = (count - 1) as f64;
                (0..*count)
                    .map(|i| {
                        let t = i as f64;
                        (min * (last - t) + max * t) / last
                    })
                    .collect()
            }
        }
    }
}

fn parse_real(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !v.is_finite() {
        return Err(format!("not a finite number: {s:?}"));
    }
    Ok(v)
}

/// Comma-separated reals, e.g. channel taps.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Err("empty list".into());
    }
    s.split(',').map(parse_real).collect()
}

impl FromStr for PowerGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let grid = if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [min, max, count] = parts[..] else {
                return Err(format!("expected min:max:count, got {s:?}"));
            };
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| format!("grid count must be a positive integer, got {count:?}"))?;
            let (min, max) = (parse_real(min)?, parse_real(max)?);
            if count == 0 {
                return Err("grid count must be at least 1".into());
            }
            if max < min {
                return Err(format!("grid must be ascending, got {min} > {max}"));
            }
            if count == 1 && max != min {
                return Err("a single-point grid needs min == max".into());
            }
            PowerGrid::Range { min, max, count }
        } else {
            let v = parse_list(s)?;
            if v.windows(2).any(|w| w[1] < w[0]) {
                return Err("grid must be ascending".into());
            }
            PowerGrid::List(v)
        };
        if grid.points().iter().any(|&p| p <= 0.0) {
            return Err("grid values must be positive".into());
        }
        Ok(grid)
    }
}

impl fmt::Display for PowerGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PowerGrid::Range { min, max, count } => write!(f, "{min}:{max}:{count}"),
            PowerGrid::List(v) => f.write_str(&join(v)),
        }
    }
}

pub(crate) fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}
