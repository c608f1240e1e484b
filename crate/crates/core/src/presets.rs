//! Named boundary functions used by the CLI and the examples.

use crate::circle::FourierFunction;
use crate::error::{Error, Result};

/// Preset names with a one-line description.
pub const PRESETS: [(&str, &str); 5] = [
    ("cos", "cos t, extension Re z"),
    ("sin", "sin t, extension Im z"),
    ("re_z2", "cos 2t, extension Re z^2"),
    (
        "re_z3_plus_im_z2",
        "cos 3t + sin 2t, extension Re z^3 + Im z^2",
    ),
    ("const", "the constant 1"),
];

pub fn preset(name: &str) -> Result<FourierFunction> {
    match name {
        "cos" => Ok(FourierFunction::cos_mode(1)),
        "sin" => Ok(FourierFunction::sin_mode(1)),
        "re_z2" => Ok(FourierFunction::cos_mode(2)),
        "re_z3_plus_im_z2" => FourierFunction::cos_mode(3).add(&FourierFunction::sin_mode(2)),
        "const" => FourierFunction::constant(vec![1.0]),
        other => Err(Error::Config(format!(
            "unknown preset {other:?}; expected one of {}",
            PRESETS.map(|(n, _)| n).join(", ")
        ))),
    }
}

/// Text listing of every preset with its coefficients.
pub fn list_presets() -> String {
    let mut out = String::new();
    for (name, description) in PRESETS {
        let f = preset(name).expect("presets are valid");
        out.push_str(&format!("{name:<18} {description}\n"));
        out.push_str(&format!("{:<18} a0 = {:?}", "", f.a0()));
        for n in 1..=f.degree() {
            let (a, b) = (f.cos_coeff(n), f.sin_coeff(n));
            if a.iter().chain(b).any(|&v| v != 0.0) {
                out.push_str(&format!(", a{n} = {a:?}, b{n} = {b:?}"));
            }
        }
        out.push('\n');
    }
    out
}
