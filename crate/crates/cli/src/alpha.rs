//! Aperture tokens such as `pi`, `pi/2`, `3*pi/4`, `pi-1e-3` or `2.0`, and
//! sweep specifications.

use std::f64::consts::PI;

/// Parses one aperture token.
pub fn parse_alpha(token: &str) -> Result<f64, String> {
    let s: String = token.chars().filter(|c| !c.is_whitespace()).collect();
    let lower = s.to_ascii_lowercase();
    let Some(at) = lower.find("pi") else {
        return number(&lower, token);
    };
    let coef = match &lower[..at] {
        "" => 1.0,
        "-" => -1.0,
        pre => match pre.strip_suffix('*') {
            Some(c) => number(c, token)?,
            None => return Err(bad(token)),
        },
    };
    let mut rest = &lower[at + 2..];
    let mut value = coef * PI;
    if let Some(after) = rest.strip_prefix('/') {
        let end = offset_start(after).unwrap_or(after.len());
        value /= number(&after[..end], token)?;
        rest = &after[end..];
    }
    if !rest.is_empty() {
        // Leading sign belongs to the offset.
        if !(rest.starts_with('+') || rest.starts_with('-')) {
            return Err(bad(token));
        }
        value += number(rest, token)?;
    }
    if !value.is_finite() {
        return Err(bad(token));
    }
    Ok(value)
}

/// Index of the first `+`/`-` that is not part of an exponent.
fn offset_start(s: &str) -> Option<usize> {
    let b = s.as_bytes();
    (1..b.len()).find(|&i| (b[i] == b'+' || b[i] == b'-') && !matches!(b[i - 1], b'e' | b'E'))
}

fn number(s: &str, token: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|_| bad(token))
}

fn bad(token: &str) -> String {
    format!("cannot parse angle '{token}' (expected a number or a form like pi, pi/2, 3*pi/4, pi-1e-3)")
}

/// Expands a sweep specification into ascending apertures:
///
/// * `geometric:CENTER,EPS_MIN,EPS_MAX,COUNT`: `CENTER - eps` with `COUNT`
///   log-spaced gaps;
/// * `linear:START,STOP,COUNT`: evenly spaced, endpoints included.
pub fn parse_alpha_spec(spec: &str) -> Result<Vec<f64>, String> {
    let (kind, args) = spec
        .split_once(':')
        .ok_or_else(|| format!("alpha spec '{spec}' must look like KIND:ARGS"))?;
    let parts: Vec<&str> = args.split(',').map(str::trim).collect();
    let count = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| format!("invalid point count '{s}' in '{spec}'"))
    };
    let mut alphas = match (kind.trim(), parts.as_slice()) {
        ("geometric", [center, lo, hi, k]) => {
            let center = parse_alpha(center)?;
            let (lo, hi) = (parse_alpha(lo)?, parse_alpha(hi)?);
            if !(lo > 0.0 && hi >= lo) {
                return Err(format!("need 0 < EPS_MIN <= EPS_MAX in '{spec}'"));
            }
            let k = count(k)?;
            match k {
                0 => Vec::new(),
                1 => vec![center - lo],
                _ => {
                    let step = (hi.ln() - lo.ln()) / (k - 1) as f64;
                    (0..k).map(|i| center - (hi.ln() - i as f64 * step).exp()).collect()
                }
            }
        }
        ("linear", [start, stop, k]) => {
            let (a, b) = (parse_alpha(start)?, parse_alpha(stop)?);
            let k = count(k)?;
            match k {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect(),
            }
        }
        _ => {
            return Err(format!(
                "unknown alpha spec '{spec}' (use geometric:CENTER,EPS_MIN,EPS_MAX,COUNT or linear:START,STOP,COUNT)"
            ))
        }
    };
    alphas.sort_by(f64::total_cmp);
    Ok(alphas)
}
