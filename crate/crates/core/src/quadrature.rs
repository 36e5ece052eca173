//! Adaptive Simpson quadrature.

use crate::scalar::Real;

/// Recursion limit; at depth 48 the panel width is below `f64` resolution
/// for any interval the crate integrates over.
pub const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` using adaptive
/// Simpson with Richardson correction.
///
/// Oscillatory integrands should be split into panels shorter than one
/// oscillation before calling, since the initial five-point estimate can
/// otherwise agree by accident.
pub fn adaptive_simpson<T, F>(f: &F, a: T, b: T, tol: T) -> T
where
    T: Real,
    F: Fn(T) -> T + ?Sized,
{
    if a == b {
        return T::zero();
    }
    let two = T::lit(2.0);
    let m = (a + b) / two;
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    refine(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[inline]
fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<T, F>(f: &F, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: u32) -> T
where
    T: Real,
    F: Fn(T) -> T + ?Sized,
{
    let two = T::lit(2.0);
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::lit(15.0) * tol {
        return left + right + delta / T::lit(15.0);
    }
    refine(f, a, m, fa, flm, fm, left, tol / two, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, tol / two, depth - 1)
}

/// Composite adaptive Simpson: splits `[a, b]` into `panels` equal pieces
/// and shares the tolerance between them.
pub fn integrate_panels<T, F>(f: &F, a: T, b: T, panels: usize, tol: T) -> T
where
    T: Real,
    F: Fn(T) -> T + ?Sized,
{
    let panels = panels.max(1);
    let n = T::from_usize(panels).unwrap();
    let h = (b - a) / n;
    let per = tol / n;
    (0..panels)
        .map(|i| {
            let lo = a + h * T::from_usize(i).unwrap();
            let hi = if i + 1 == panels {
                b
            } else {
                a + h * T::from_usize(i + 1).unwrap()
            };
            adaptive_simpson(f, lo, hi, per)
        })
        .fold(T::zero(), |acc, v| acc + v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(&|x: f64| x * x * x - 2.0 * x, -1.0, 3.0, 1e-12);
        // ∫ x³ − 2x = [x⁴/4 − x²] from −1 to 3 = (81/4 − 9) − (1/4 − 1) = 12
        assert!((v - 12.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_mass() {
        let f = |x: f64| (-0.5 * x * x).exp();
        let v = integrate_panels(&f, -10.0, 10.0, 16, 1e-12);
        assert!((v - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn oscillatory_with_panels() {
        let f = |x: f64| (20.0 * x).cos().powi(2);
        // ∫₀^π cos²(20x) dx = π/2
        let v = integrate_panels(&f, 0.0, std::f64::consts::PI, 64, 1e-12);
        assert!((v - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(adaptive_simpson(&|x: f64| x, 2.0, 2.0, 1e-9), 0.0);
    }

    #[test]
    fn single_precision() {
        let v = adaptive_simpson(&|x: f32| x.sin(), 0.0f32, std::f32::consts::PI, 1e-6);
        assert!((v - 2.0).abs() < 1e-5);
    }
}
