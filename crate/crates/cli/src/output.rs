//! CSV and JSON artifact writers.
//!
//! Numbers are printed like C's `%.12e`: twelve fractional digits and an
//! exponent with an explicit sign and at least two digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cfbmc::{ComplexSignal, EsdCurve, LeakageMap, Window};
use serde::Serialize;

use crate::CliError;

pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn signal_csv(s: &ComplexSignal) -> String {
    let mut out = String::from("n,re,im\n");
    for (n, x) in s.iter() {
        let _ = writeln!(out, "{n},{},{}", sci(x.re), sci(x.im));
    }
    out
}

pub fn window_csv(w: &Window) -> String {
    let mut out = String::from("n,value\n");
    for (n, t) in w.iter() {
        let _ = writeln!(out, "{n},{}", sci(t));
    }
    out
}

pub fn esd_csv(curve: &EsdCurve) -> String {
    let mut out = String::from("omega,esd_db\n");
    for (omega, db) in curve.omega.iter().zip(curve.db()) {
        let _ = writeln!(out, "{},{}", sci(*omega), sci(db));
    }
    out
}

pub fn leakage_csv(map: &LeakageMap) -> String {
    let mut out = String::from("p,m,gain,gain_db\n");
    for (p, m, gain, db) in map.entries() {
        let _ = writeln!(out, "{p},{m},{},{}", sci(gain), sci(db));
    }
    out
}

pub fn write_text(dir: &Path, name: &str, contents: &str) -> Result<String, CliError> {
    write_file(&dir.join(name), contents)?;
    Ok(name.to_string())
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<String, CliError> {
    write_text(dir, name, &to_json(value))
}
