//! WebAssembly bindings for the browser demo: a stability-region explorer,
//! the full-order path families, and the stiff oscillatory benchmark, each
//! returning plain data (RGBA bytes or JSON strings) for a static page to
//! render.
//!
//! Everything here is ordinary Rust; `wasm_bindgen` adds the JS glue only
//! when compiled for the `wasm32` target, so the crate builds and tests
//! natively too.

use std::fmt::Write;

use ctint::experiments::{prothero_robinson_run, ProjectiveVariant};
use ctint::models::ProtheroRobinsonProblem;
use ctint::paths::{enumerate_full_order_paths, StepPath};
use ctint::poly::{region_grid, RegionWindow, StabilityPolynomial};
use ctint::{presets, Complex64};
use wasm_bindgen::prelude::wasm_bindgen;

/// JSON array of the polynomial preset names, for populating a dropdown.
#[wasm_bindgen]
pub fn preset_names() -> String {
    let quoted: Vec<String> = presets::POLYNOMIAL_PRESETS
        .iter()
        .map(|name| format!("\"{name}\""))
        .collect();
    format!("[{}]", quoted.join(","))
}

fn polynomial_from_spec(mode: &str, spec: &str) -> Result<StabilityPolynomial, String> {
    let parse_list = |what: &str| -> Result<Vec<Complex64>, String> {
        spec.split(',')
            .enumerate()
            .map(|(i, tok)| {
                presets::parse_complex_token(tok)
                    .map_err(|e| format!("{what} entry {}: {e}", i + 1))
            })
            .collect()
    };
    match mode {
        "preset" => presets::polynomial(spec.trim()).map_err(|e| e.to_string()),
        "weights" => Ok(StepPath::new(parse_list("weights")?)
            .map_err(|e| e.to_string())?
            .stability_polynomial()),
        "coeffs" => StabilityPolynomial::new(parse_list("coeffs")?).map_err(|e| e.to_string()),
        other => Err(format!("mode must be preset, weights, or coeffs, got `{other}`")),
    }
}

/// RGBA pixels of |Phi| over the window, row-major from the top scanline so
/// the bytes drop straight into an `ImageData`: blues inside the stability
/// region (darker = stronger damping), pale-to-amber outside.
#[wasm_bindgen]
pub fn region_rgba(
    mode: &str,
    spec: &str,
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
    nx: usize,
    ny: usize,
) -> Result<Vec<u8>, String> {
    let polynomial = polynomial_from_spec(mode, spec)?;
    let window =
        RegionWindow::new(re_min, re_max, im_min, im_max, nx, ny).map_err(|e| e.to_string())?;
    let grid = region_grid(&polynomial, &window);
    let mut rgba = vec![0u8; nx * ny * 4];
    for row in 0..ny {
        // Canvas scanlines run top-down; the grid's rows run bottom-up.
        let source_row = ny - 1 - row;
        for col in 0..nx {
            let [r, g, b] = shade(grid.magnitude(source_row, col));
            let px = 4 * (row * nx + col);
            rgba[px] = r;
            rgba[px + 1] = g;
            rgba[px + 2] = b;
            rgba[px + 3] = 255;
        }
    }
    Ok(rgba)
}

fn shade(mag: f64) -> [u8; 3] {
    fn lerp(a: f64, b: f64, t: f64) -> u8 {
        (a + (b - a) * t).round().clamp(0.0, 255.0) as u8
    }
    if mag <= 1.0 {
        let t = mag.clamp(0.0, 1.0);
        [lerp(21.0, 122.0, t), lerp(72.0, 172.0, t), lerp(134.0, 216.0, t)]
    } else {
        let t = (mag.ln() / 3.0).clamp(0.0, 1.0);
        [lerp(252.0, 201.0, t), lerp(250.0, 166.0, t), lerp(244.0, 98.0, t)]
    }
}

/// The full-order family with n substeps, serialized as
/// `{n_steps, order, paths: [[{re, im}, ...], ...]}` (weights per path; the
/// drawn polyline is their running sum from the origin).
#[wasm_bindgen]
pub fn paths_json(n: usize) -> Result<String, String> {
    let family = enumerate_full_order_paths(n).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    family.write_json(&mut out).expect("writing to a vec cannot fail");
    Ok(String::from_utf8(out).expect("serializer emits ascii"))
}

/// Runs the stiff oscillatory benchmark with both inner-step variants and
/// returns plot-ready JSON: shared times `t` with `exact` and `complex`
/// series, the real variant on its own (possibly truncated) `real_t`, plus
/// divergence flags and max errors for the caption.
#[wasm_bindgen]
pub fn prothero_comparison_json(xi: f64, outer_dt: f64) -> Result<String, String> {
    let prob = ProtheroRobinsonProblem::new(1e-6, xi).map_err(|e| e.to_string())?;
    let t_end = 6.0;
    let real = prothero_robinson_run(&prob, ProjectiveVariant::Real, outer_dt, t_end)
        .map_err(|e| e.to_string())?;
    let complex = prothero_robinson_run(&prob, ProjectiveVariant::Complex, outer_dt, t_end)
        .map_err(|e| e.to_string())?;

    let times = complex.trajectory.times();
    let mut doc = String::from("{\"t\":[");
    push_numbers(&mut doc, times.iter().copied());
    doc.push_str("],\"exact\":[");
    push_numbers(&mut doc, times.iter().map(|&t| prob.exact(t).re));
    doc.push_str("],\"complex\":[");
    push_numbers(&mut doc, complex.trajectory.states().iter().map(|s| s[0].re));
    doc.push_str("],\"real_t\":[");
    push_numbers(&mut doc, real.trajectory.times().iter().copied());
    doc.push_str("],\"real\":[");
    push_numbers(&mut doc, real.trajectory.states().iter().map(|s| s[0].re));
    write!(
        doc,
        "],\"xi\":{xi},\"dt\":{outer_dt},\"real_diverged\":{},\"complex_diverged\":{},\
         \"real_max_error\":{:.6e},\"complex_max_error\":{:.6e}}}",
        real.trajectory.divergence().is_some(),
        complex.trajectory.divergence().is_some(),
        real.max_error(),
        complex.max_error(),
    )
    .expect("writing to a string cannot fail");
    Ok(doc)
}

fn push_numbers<I: Iterator<Item = f64>>(doc: &mut String, values: I) {
    for (i, v) in values.enumerate() {
        if i > 0 {
            doc.push(',');
        }
        write!(doc, "{v:.6e}").expect("writing to a string cannot fail");
    }
}
