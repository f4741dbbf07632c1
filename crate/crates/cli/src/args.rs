//! Parsers for compact command-line values.

use gradbem::Vec3;

/// `start:step:count` or a comma-separated list, in Hz.
pub fn parse_frequencies(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let freqs: Vec<f64> = match parts.as_slice() {
        [start, step, count] => {
            let start: f64 = start.trim().parse().map_err(|_| format!("bad start '{start}'"))?;
            let step: f64 = step.trim().parse().map_err(|_| format!("bad step '{step}'"))?;
            let count: usize = count.trim().parse().map_err(|_| format!("bad count '{count}'"))?;
            if count == 0 {
                return Err("count must be >= 1".into());
            }
            (0..count).map(|i| start + step * i as f64).collect()
        }
        [list] => list
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| format!("bad frequency '{v}'")))
            .collect::<Result<_, _>>()?,
        _ => return Err(format!("expected start:step:count or a list, got '{s}'")),
    };
    if let Some(f) = freqs.iter().find(|f| !(**f > 0.0 && f.is_finite())) {
        return Err(format!("frequencies must be positive, got {f}"));
    }
    Ok(freqs)
}

/// `x,y,z` in meters.
pub fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|_| format!("bad coordinate '{c}'")))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [x, y, z] if v.iter().all(|c| c.is_finite()) => Ok(Vec3::new(*x, *y, *z)),
        _ => Err(format!("expected x,y,z, got '{s}'")),
    }
}
