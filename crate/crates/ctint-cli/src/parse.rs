//! Flag-value parsing: complex numbers, comma lists, windows, resolutions.
//!
//! Every error names the offending token, so a typo buried in a long list is
//! findable from the message alone.

use ctint::Complex64;

/// Parses tokens like `2`, `-1.5e-3`, `i`, `-2i`, `0.5-0.5i`.
pub fn parse_complex(token: &str) -> Result<Complex64, String> {
    ctint::presets::parse_complex_token(token).map_err(|e| match e {
        ctint::Error::InvalidInput(msg) => msg,
        other => other.to_string(),
    })
}

/// Parses a comma-separated list of complex tokens; `what` names the flag in
/// error messages.
pub fn parse_complex_list(raw: &str, what: &str) -> Result<Vec<Complex64>, String> {
    raw.split(',')
        .enumerate()
        .map(|(i, tok)| parse_complex(tok).map_err(|e| format!("{what} entry {}: {e}", i + 1)))
        .collect()
}

/// Parses a comma-separated list of real numbers.
pub fn parse_f64_list(raw: &str, what: &str) -> Result<Vec<f64>, String> {
    raw.split(',')
        .enumerate()
        .map(|(i, tok)| {
            let t = tok.trim();
            t.parse::<f64>()
                .map_err(|_| format!("{what} entry {}: `{t}` is not a number", i + 1))
        })
        .collect()
}

/// Parses `re_min,re_max,im_min,im_max`.
pub fn parse_window(raw: &str) -> Result<[f64; 4], String> {
    let values = parse_f64_list(raw, "window")?;
    window_from_values(&values)
}

/// Validates a four-number window from any source.
pub fn window_from_values(values: &[f64]) -> Result<[f64; 4], String> {
    <[f64; 4]>::try_from(values).map_err(|_| {
        format!(
            "window needs four numbers re_min,re_max,im_min,im_max, got {}",
            values.len()
        )
    })
}

/// Parses `N` (square grid) or `NX,NY`.
pub fn parse_res(raw: &str) -> Result<(usize, usize), String> {
    let values: Vec<usize> = raw
        .split(',')
        .enumerate()
        .map(|(i, tok)| {
            let t = tok.trim();
            t.parse::<usize>()
                .map_err(|_| format!("res entry {}: `{t}` is not a positive integer", i + 1))
        })
        .collect::<Result<_, _>>()?;
    res_from_values(&values)
}

/// Validates a one- or two-number resolution from any source.
pub fn res_from_values(values: &[usize]) -> Result<(usize, usize), String> {
    match values {
        [n] => Ok((*n, *n)),
        [nx, ny] => Ok((*nx, *ny)),
        other => Err(format!("res needs one or two integers, got {}", other.len())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_token_forms() {
        assert_eq!(parse_complex("2").unwrap(), c(2.0, 0.0));
        assert_eq!(parse_complex("-1.5e-3").unwrap(), c(-1.5e-3, 0.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("+2i").unwrap(), c(0.0, 2.0));
        assert_eq!(parse_complex("1e-3i").unwrap(), c(0.0, 1e-3));
        assert_eq!(parse_complex("0.5-0.5i").unwrap(), c(0.5, -0.5));
        assert_eq!(parse_complex("0.1134-0.06i").unwrap(), c(0.1134, -0.06));
        assert_eq!(parse_complex("1-1e-3i").unwrap(), c(1.0, -1e-3));
        assert_eq!(parse_complex("2+i").unwrap(), c(2.0, 1.0));
        assert_eq!(parse_complex(" 3.5 ").unwrap(), c(3.5, 0.0));
    }

    #[test]
    fn complex_token_errors_name_the_token() {
        for bad in ["", "abc", "1+2j", "--5i", "1.2.3", "2i3"] {
            let err = parse_complex(bad).unwrap_err();
            if !bad.trim().is_empty() {
                assert!(err.contains(bad.trim()), "{err} should mention {bad}");
            }
        }
    }

    #[test]
    fn list_errors_carry_positions() {
        let err = parse_complex_list("1,zzz,3", "weights").unwrap_err();
        assert!(err.contains("weights entry 2"), "{err}");
        assert!(err.contains("zzz"), "{err}");
        let err = parse_f64_list("0.1,oops", "dt").unwrap_err();
        assert!(err.contains("dt entry 2") && err.contains("oops"), "{err}");
    }

    #[test]
    fn window_and_res_shapes() {
        assert_eq!(parse_window("-3,1,-2,2").unwrap(), [-3.0, 1.0, -2.0, 2.0]);
        assert!(parse_window("1,2,3").unwrap_err().contains("four numbers"));
        assert_eq!(parse_res("400").unwrap(), (400, 400));
        assert_eq!(parse_res("300,200").unwrap(), (300, 200));
        assert!(parse_res("1,2,3").unwrap_err().contains("one or two"));
        assert!(parse_res("4x4").unwrap_err().contains("4x4"));
    }
}
