//! WebAssembly bindings for the demo page in `www/`.
//!
//! Each export takes plain strings and returns a string, so the page needs no
//! generated TypeScript types. Errors come back as JavaScript exceptions.

use ratcher::apartment::make_slope;
use ratcher::dimensions::{total_dimension, DimOptions};
use ratcher::rootdata::{build_root_datum, RootDatum};
use ratcher::svg::apartment_figure;
use wasm_bindgen::prelude::*;

/// Limits suited to a browser tab.
const BUDGET: u128 = 20_000;
const ALCOVE_CAP: usize = 200_000;

fn datum(type_label: &str) -> Result<RootDatum, String> {
    let spec = type_label.parse().map_err(|e: ratcher::Error| e.to_string())?;
    build_root_datum(spec).map_err(|e| e.to_string())
}

fn slope(s: &str) -> Result<(u64, u64), String> {
    let (d, m) = s.trim().split_once('/').unwrap_or(("1", s.trim()));
    let d: u64 = d.trim().parse().map_err(|_| format!("bad slope '{s}'"))?;
    let m: u64 = m.trim().parse().map_err(|_| format!("bad slope '{s}'"))?;
    if d == 0 || m == 0 {
        return Err(format!("slope '{s}' must be positive"));
    }
    let g = num_gcd(d, m);
    Ok((d / g, m / g))
}

fn num_gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}

pub fn apartment_svg_str(type_label: &str, slope_text: &str) -> Result<String, String> {
    let datum = datum(type_label)?;
    let (d, m) = slope(slope_text)?;
    apartment_figure(&datum, d, m, BUDGET, ALCOVE_CAP).map(|f| f.svg).map_err(|e| e.to_string())
}

pub fn dimension_json_str(type_label: &str, slope_text: &str) -> Result<String, String> {
    let datum = datum(type_label)?;
    let (d, m) = slope(slope_text)?;
    let s = make_slope(&datum, d, m).map_err(|e| e.to_string())?;
    let opts = DimOptions { budget: BUDGET, alcove_cap: ALCOVE_CAP, ..DimOptions::default() };
    let report = total_dimension(&datum, &s, &opts).map_err(|e| e.to_string())?;
    serde_json::to_string_pretty(&report).map_err(|e| e.to_string())
}

pub fn root_system_json_str(type_label: &str) -> Result<String, String> {
    let datum = datum(type_label)?;
    serde_json::to_string_pretty(&datum).map_err(|e| e.to_string())
}

/// SVG picture of the apartment of a rank-one or rank-two group.
#[wasm_bindgen]
pub fn apartment_svg(type_label: &str, slope: &str) -> Result<String, JsError> {
    apartment_svg_str(type_label, slope).map_err(|e| JsError::new(&e))
}

/// Full dimension report as JSON.
#[wasm_bindgen]
pub fn dimension_report(type_label: &str, slope: &str) -> Result<String, JsError> {
    dimension_json_str(type_label, slope).map_err(|e| JsError::new(&e))
}

/// Relative root datum as JSON.
#[wasm_bindgen]
pub fn root_system(type_label: &str) -> Result<String, JsError> {
    root_system_json_str(type_label).map_err(|e| JsError::new(&e))
}
