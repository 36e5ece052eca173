//! Number formatting shared by the text file formats.

/// Formats `v` with 17 significant digits, enough for an exact `f64`
/// round trip.
pub fn sig17(v: f64) -> String {
    if v == 0.0 {
        // keep the sign of negative zero
        return if v.is_sign_negative() { "-0.0000000000000000e0" } else { "0.0000000000000000e0" }
            .to_string();
    }
    format!("{v:.16e}")
}
