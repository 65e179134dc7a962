//! Number formatting shared by every CSV/JSON writer.

/// 17 significant digits, lowercase `inf` for infinities.
pub fn float(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

/// Like [`float`] but an absent value becomes an empty field.
pub fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}
