//! Monotone piecewise-cubic Hermite interpolation.

use crate::scalar::Real;

/// Cubic Hermite interpolant through monotone data.
///
/// Node slopes are supplied by the caller (typically an exact derivative)
/// and limited per interval with the Fritsch–Carlson condition, so the
/// interpolant is non-decreasing whenever the node values are.
#[derive(Debug, Clone)]
pub struct MonotoneCubic<T> {
    xs: Vec<T>,
    ys: Vec<T>,
    // limited (left, right) slopes of each interval
    slopes: Vec<(T, T)>,
}

impl<T: Real> MonotoneCubic<T> {
    /// `xs` strictly increasing, `ys` non-decreasing, `ds` non-negative.
    pub fn new(xs: Vec<T>, ys: Vec<T>, ds: &[T]) -> Self {
        assert!(xs.len() >= 2 && xs.len() == ys.len() && ys.len() == ds.len());
        let slopes = (0..xs.len() - 1)
            .map(|i| limit_slopes(xs[i + 1] - xs[i], ys[i + 1] - ys[i], ds[i], ds[i + 1]))
            .collect();
        Self { xs, ys, slopes }
    }

    pub fn nodes(&self) -> &[T] {
        &self.xs
    }

    pub fn values(&self) -> &[T] {
        &self.ys
    }

    /// Index `i` of the interval `[xs[i], xs[i+1]]` containing `x`,
    /// clamped to the valid range.
    pub fn interval_of(&self, x: T) -> usize {
        let k = self.xs.partition_point(|&n| n <= x);
        k.saturating_sub(1).min(self.xs.len() - 2)
    }

    /// Evaluates the interpolant, clamping outside the node range.
    pub fn eval(&self, x: T) -> T {
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[self.xs.len() - 1] {
            return self.ys[self.ys.len() - 1];
        }
        self.eval_in(self.interval_of(x), x)
    }

    /// Evaluates the cubic of interval `i` at `x`.
    #[inline]
    pub fn eval_in(&self, i: usize, x: T) -> T {
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (d0, d1) = self.slopes[i];
        let h = x1 - x0;
        let t = (x - x0) / h;
        let one = T::one();
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = two * t3 - three * t2 + one;
        let h10 = t3 - two * t2 + t;
        let h01 = three * t2 - two * t3;
        let h11 = t3 - t2;
        let v = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
        // clamp against rounding so monotonicity holds across cell boundaries
        v.max(y0).min(y1)
    }

    /// Derivative of the cubic of interval `i` at `x`.
    #[inline]
    pub fn slope_in(&self, i: usize, x: T) -> T {
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (d0, d1) = self.slopes[i];
        let h = x1 - x0;
        let t = (x - x0) / h;
        let six = T::lit(6.0);
        let t2 = t * t;
        let dh00 = (six * t2 - six * t) / h;
        let dh10 = T::lit(3.0) * t2 - T::lit(4.0) * t + T::one();
        let dh01 = (six * t - six * t2) / h;
        let dh11 = T::lit(3.0) * t2 - T::lit(2.0) * t;
        dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1
    }
}

/// Fritsch–Carlson limited end slopes for one interval of width `h` and
/// rise `dy`.
pub fn limit_slopes<T: Real>(h: T, dy: T, d0: T, d1: T) -> (T, T) {
    let secant = dy / h;
    if secant <= T::zero() {
        return (T::zero(), T::zero());
    }
    let d0 = d0.max(T::zero());
    let d1 = d1.max(T::zero());
    let a = d0 / secant;
    let b = d1 / secant;
    let r = (a * a + b * b).sqrt();
    let three = T::lit(3.0);
    if r > three {
        let tau = three / r;
        (tau * d0, tau * d1)
    } else {
        (d0, d1)
    }
}

/// Value at the midpoint of one limited Hermite interval, measured from
/// its left node.
pub fn midpoint_rise<T: Real>(h: T, dy: T, d0: T, d1: T) -> T {
    let (d0, d1) = limit_slopes(h, dy, d0, d1);
    dy / T::lit(2.0) + h * (d0 - d1) / T::lit(8.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_with_exact_slopes() {
        // F(x) = x³/3 + x, F' = x² + 1 > 0
        let xs: Vec<f64> = (0..=10).map(|i| i as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x * x / 3.0 + x).collect();
        let ds: Vec<f64> = xs.iter().map(|x| x * x + 1.0).collect();
        let c = MonotoneCubic::new(xs, ys, &ds);
        for k in 0..300 {
            let x = k as f64 * 0.01;
            assert!((c.eval(x) - (x * x * x / 3.0 + x)).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn limiter_keeps_step_data_monotone() {
        let xs = vec![0.0, 1.0, 2.0, 3.0];
        let ys = vec![0.0, 0.0, 1.0, 1.0];
        // wildly overshooting slopes
        let ds = vec![0.0, 10.0, 10.0, 0.0];
        let c = MonotoneCubic::new(xs, ys, &ds);
        let mut prev = -1.0;
        for k in 0..=3000 {
            let v = c.eval(k as f64 * 0.001);
            assert!(v >= prev);
            assert!((0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn clamps_outside() {
        let c = MonotoneCubic::new(vec![0.0f32, 1.0], vec![0.25, 0.75], &[0.5, 0.5]);
        assert_eq!(c.eval(-3.0), 0.25);
        assert_eq!(c.eval(3.0), 0.75);
        assert!((c.eval(0.5) - 0.5).abs() < 1e-7);
    }
}
