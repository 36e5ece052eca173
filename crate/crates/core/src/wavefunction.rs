//! Screen-axis intensity models and the Born distribution they induce.
//!
//! A [`WavefunctionSpec`] describes |ψ(x)|² up to a constant on the screen
//! coordinate. [`BornDistribution::new`] truncates it to `[-L, L]`,
//! normalizes it and tabulates the cumulative distribution on a grid that
//! is refined until cubic Hermite interpolation between nodes reproduces
//! direct quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::{midpoint_rise, MonotoneCubic};
use crate::quadrature::adaptive_simpson;
use crate::scalar::Real;

/// Default bound on the probability mass discarded by truncating to `[-L, L]`.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;

/// Absolute quadrature tolerance on the normalized cdf grid.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;

/// Midpoint agreement required between the Hermite interpolant and direct
/// quadrature before a grid cell is accepted.
pub const INTERPOLATION_TOLERANCE: f64 = 1e-11;

const BASE_CELLS: usize = 4096;
const MAX_CELLS: usize = 1 << 22;
const MAX_REFINE_DEPTH: u32 = 24;

/// Parametric model of the detection intensity along the screen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WavefunctionSpec {
    /// `exp(-x² / 2σ²)`
    Gaussian {
        sigma: f64,
        support_halfwidth: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail_tolerance: Option<f64>,
    },
    /// `sinc²(βx)`
    SingleSlit {
        beta: f64,
        support_halfwidth: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail_tolerance: Option<f64>,
    },
    /// `cos²(δx) · sinc²(βx)`
    DoubleSlit {
        beta: f64,
        delta: f64,
        support_halfwidth: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail_tolerance: Option<f64>,
    },
    /// Piecewise-linear intensity through `(x, intensity)` knots, zero
    /// outside the table.
    Tabulated {
        table: Vec<(f64, f64)>,
        support_halfwidth: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail_tolerance: Option<f64>,
    },
}

impl WavefunctionSpec {
    pub fn gaussian(sigma: f64, support_halfwidth: f64) -> Self {
        WavefunctionSpec::Gaussian {
            sigma,
            support_halfwidth,
            tail_tolerance: None,
        }
    }

    pub fn single_slit(beta: f64, support_halfwidth: f64) -> Self {
        WavefunctionSpec::SingleSlit {
            beta,
            support_halfwidth,
            tail_tolerance: None,
        }
    }

    pub fn double_slit(beta: f64, delta: f64, support_halfwidth: f64) -> Self {
        WavefunctionSpec::DoubleSlit {
            beta,
            delta,
            support_halfwidth,
            tail_tolerance: None,
        }
    }

    pub fn tabulated(table: Vec<(f64, f64)>, support_halfwidth: f64) -> Self {
        WavefunctionSpec::Tabulated {
            table,
            support_halfwidth,
            tail_tolerance: None,
        }
    }

    /// Returns the spec with an explicit truncation tolerance.
    pub fn with_tail_tolerance(mut self, tol: f64) -> Self {
        match &mut self {
            WavefunctionSpec::Gaussian { tail_tolerance, .. }
            | WavefunctionSpec::SingleSlit { tail_tolerance, .. }
            | WavefunctionSpec::DoubleSlit { tail_tolerance, .. }
            | WavefunctionSpec::Tabulated { tail_tolerance, .. } => *tail_tolerance = Some(tol),
        }
        self
    }

    pub fn kind(&self) -> &'static str {
        match self {
            WavefunctionSpec::Gaussian { .. } => "gaussian",
            WavefunctionSpec::SingleSlit { .. } => "single_slit",
            WavefunctionSpec::DoubleSlit { .. } => "double_slit",
            WavefunctionSpec::Tabulated { .. } => "tabulated",
        }
    }

    pub fn support_halfwidth(&self) -> f64 {
        match self {
            WavefunctionSpec::Gaussian {
                support_halfwidth, ..
            }
            | WavefunctionSpec::SingleSlit {
                support_halfwidth, ..
            }
            | WavefunctionSpec::DoubleSlit {
                support_halfwidth, ..
            }
            | WavefunctionSpec::Tabulated {
                support_halfwidth, ..
            } => *support_halfwidth,
        }
    }

    fn tail_tolerance(&self) -> Option<f64> {
        match self {
            WavefunctionSpec::Gaussian { tail_tolerance, .. }
            | WavefunctionSpec::SingleSlit { tail_tolerance, .. }
            | WavefunctionSpec::DoubleSlit { tail_tolerance, .. }
            | WavefunctionSpec::Tabulated { tail_tolerance, .. } => *tail_tolerance,
        }
    }

    /// True for the kinds whose intensity is even in `x` by construction.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self, WavefunctionSpec::Tabulated { .. })
    }

    /// Checks parameter ranges and the truncation tolerance.
    pub fn check(&self) -> Result<()> {
        let l = self.support_halfwidth();
        positive("support_halfwidth", l)?;
        if let Some(tol) = self.tail_tolerance() {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::InvalidSpec {
                    field: "tail_tolerance",
                    reason: format!("must lie in (0, 1), got {tol}"),
                });
            }
        }
        match self {
            WavefunctionSpec::Gaussian { sigma, .. } => {
                positive("sigma", *sigma)?;
                let tol = self.tail_tolerance().unwrap_or(DEFAULT_TAIL_TOLERANCE);
                let tail = |l: f64| libm::erfc(l / (sigma * std::f64::consts::SQRT_2));
                check_tail(l, tol, tail)
            }
            WavefunctionSpec::SingleSlit { beta, .. } => {
                positive("beta", *beta)?;
                match self.tail_tolerance() {
                    Some(tol) => {
                        let total = std::f64::consts::PI / beta;
                        check_tail(l, tol, |l| 2.0 / (beta * beta * l * total))
                    }
                    None => Ok(()),
                }
            }
            WavefunctionSpec::DoubleSlit { beta, delta, .. } => {
                positive("beta", *beta)?;
                positive("delta", *delta)?;
                match self.tail_tolerance() {
                    Some(tol) => {
                        // cos² = (1 + cos 2δx)/2 and the Fourier transform of
                        // sinc² is a triangle of half-width 2β
                        let total = std::f64::consts::PI / (2.0 * beta)
                            * (1.0 + (1.0 - delta / beta).max(0.0));
                        check_tail(l, tol, |l| 2.0 / (beta * beta * l * total))
                    }
                    None => Ok(()),
                }
            }
            WavefunctionSpec::Tabulated { table, .. } => {
                check_table(table)?;
                let total = table_mass(table, f64::NEG_INFINITY, f64::INFINITY);
                if total <= 0.0 {
                    return Err(Error::DegenerateSpec(
                        "tabulated intensity has zero total mass".into(),
                    ));
                }
                if table_mass(table, -l, l) <= 0.0 {
                    return Err(Error::DegenerateSpec(format!(
                        "tabulated intensity has zero mass inside [-{l}, {l}]"
                    )));
                }
                let tol = self.tail_tolerance().unwrap_or(DEFAULT_TAIL_TOLERANCE);
                check_tail(l, tol, |l| 1.0 - table_mass(table, -l, l) / total)
            }
        }
    }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpec {
            field,
            reason: format!("must be a positive finite number, got {v}"),
        })
    }
}

fn check_table(table: &[(f64, f64)]) -> Result<()> {
    if table.len() < 3 {
        return Err(Error::InvalidSpec {
            field: "table",
            reason: format!("needs at least 3 points, got {}", table.len()),
        });
    }
    for (i, &(x, y)) in table.iter().enumerate() {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidSpec {
                field: "table",
                reason: format!("row {i} is not finite"),
            });
        }
        if y < 0.0 {
            return Err(Error::InvalidSpec {
                field: "table",
                reason: format!("row {i} has negative intensity {y}"),
            });
        }
        if i > 0 && x <= table[i - 1].0 {
            return Err(Error::InvalidSpec {
                field: "table",
                reason: format!("x must be strictly increasing (row {i})"),
            });
        }
    }
    if table.iter().all(|&(_, y)| y == 0.0) {
        return Err(Error::DegenerateSpec(
            "tabulated intensity is identically zero".into(),
        ));
    }
    Ok(())
}

/// Exact integral of the piecewise-linear table over `[lo, hi]`.
fn table_mass(table: &[(f64, f64)], lo: f64, hi: f64) -> f64 {
    table
        .windows(2)
        .map(|w| {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            let a = x0.max(lo);
            let b = x1.min(hi);
            if b <= a {
                return 0.0;
            }
            let at = |x: f64| y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            0.5 * (at(a) + at(b)) * (b - a)
        })
        .sum()
}

/// Tail mass must be below `tol`; on failure, bisects the monotone tail
/// function for the smallest admissible half-width.
fn check_tail(l: f64, tol: f64, tail: impl Fn(f64) -> f64) -> Result<()> {
    let mass = tail(l);
    if mass <= tol {
        return Ok(());
    }
    let mut lo = l;
    let mut hi = l.max(1.0);
    while tail(hi) > tol {
        hi *= 2.0;
        if !hi.is_finite() {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if tail(mid) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Truncation {
        halfwidth: l,
        tail_mass: mass,
        tolerance: tol,
        required_halfwidth: hi,
    })
}

/// Unnormalized |ψ|² in the working scalar type.
#[derive(Debug, Clone)]
enum Intensity<T> {
    Gaussian { inv_two_var: T },
    SingleSlit { beta: T },
    DoubleSlit { beta: T, delta: T },
    Tabulated { xs: Vec<T>, ys: Vec<T> },
}

impl<T: Real> Intensity<T> {
    fn from_spec(spec: &WavefunctionSpec) -> Self {
        match spec {
            WavefunctionSpec::Gaussian { sigma, .. } => Intensity::Gaussian {
                inv_two_var: T::lit(1.0 / (2.0 * sigma * sigma)),
            },
            WavefunctionSpec::SingleSlit { beta, .. } => Intensity::SingleSlit {
                beta: T::lit(*beta),
            },
            WavefunctionSpec::DoubleSlit { beta, delta, .. } => Intensity::DoubleSlit {
                beta: T::lit(*beta),
                delta: T::lit(*delta),
            },
            WavefunctionSpec::Tabulated { table, .. } => Intensity::Tabulated {
                xs: table.iter().map(|r| T::lit(r.0)).collect(),
                ys: table.iter().map(|r| T::lit(r.1)).collect(),
            },
        }
    }

    #[inline]
    fn eval(&self, x: T) -> T {
        match self {
            Intensity::Gaussian { inv_two_var } => (-x * x * *inv_two_var).exp(),
            Intensity::SingleSlit { beta } => sinc_sq(*beta * x),
            Intensity::DoubleSlit { beta, delta } => {
                let c = (*delta * x).cos();
                c * c * sinc_sq(*beta * x)
            }
            Intensity::Tabulated { xs, ys } => {
                let n = xs.len();
                if x < xs[0] || x > xs[n - 1] {
                    return T::zero();
                }
                let k = xs.partition_point(|&v| v <= x).clamp(1, n - 1);
                let (x0, x1) = (xs[k - 1], xs[k]);
                let (y0, y1) = (ys[k - 1], ys[k]);
                (y0 + (y1 - y0) * (x - x0) / (x1 - x0)).max(T::zero())
            }
        }
    }

    /// Largest angular frequency the grid has to resolve.
    fn frequency(&self, spec: &WavefunctionSpec) -> f64 {
        match spec {
            WavefunctionSpec::Gaussian { sigma, .. } => 1.0 / sigma,
            WavefunctionSpec::SingleSlit { beta, .. } => *beta,
            WavefunctionSpec::DoubleSlit { beta, delta, .. } => beta.max(*delta),
            WavefunctionSpec::Tabulated { .. } => 0.0,
        }
    }
}

#[inline]
fn sinc_sq<T: Real>(u: T) -> T {
    let s = if u.abs() < T::lit(1e-4) {
        let u2 = u * u;
        T::one() - u2 / T::lit(6.0) + u2 * u2 / T::lit(120.0)
    } else {
        u.sin() / u
    };
    s * s
}

/// Anything with a cumulative distribution function on the screen axis.
pub trait CumulativeDistribution<T> {
    fn cdf(&self, x: T) -> T;
}

impl<T, F> CumulativeDistribution<T> for F
where
    F: Fn(T) -> T,
{
    fn cdf(&self, x: T) -> T {
        self(x)
    }
}

/// Validated, normalized Born density `pdf = norm · |ψ|²` on `[-L, L]` with
/// a tabulated cumulative distribution.
#[derive(Debug, Clone)]
pub struct BornDistribution<T> {
    spec: WavefunctionSpec,
    intensity: Intensity<T>,
    halfwidth: T,
    norm: T,
    grid: MonotoneCubic<T>,
}

impl<T: Real> BornDistribution<T> {
    /// Validates `spec`, normalizes the truncated intensity and builds the
    /// cdf grid.
    pub fn new(spec: &WavefunctionSpec) -> Result<Self> {
        spec.check()?;
        let intensity = Intensity::<T>::from_spec(spec);
        let l = spec.support_halfwidth();
        let halfwidth = T::lit(l);
        let f = |x: T| intensity.eval(x);

        // base grid: uniform, fine enough to keep every cell below a quarter
        // oscillation, plus tabulated knots
        let freq = intensity.frequency(spec);
        let wanted = (2.0 * l * freq * 8.0 / std::f64::consts::PI).ceil() as usize;
        let cells = BASE_CELLS.max(wanted.next_power_of_two()).min(MAX_CELLS);
        let mut base: Vec<T> = (0..=cells)
            .map(|i| {
                if i == cells {
                    halfwidth
                } else {
                    T::lit(-l + 2.0 * l * i as f64 / cells as f64)
                }
            })
            .collect();
        if let WavefunctionSpec::Tabulated { table, .. } = spec {
            base.extend(
                table
                    .iter()
                    .filter(|r| r.0 > -l && r.0 < l)
                    .map(|r| T::lit(r.0)),
            );
            base.sort_by(|a, b| a.partial_cmp(b).unwrap());
            base.dedup();
        }

        // rough total for scaling absolute tolerances
        let rough: T = base
            .windows(2)
            .map(|w| (w[1] - w[0]) * (f(w[0]) + f(w[1])) / T::lit(2.0))
            .fold(T::zero(), |a, b| a + b);
        if !(rough > T::zero()) {
            return Err(Error::DegenerateSpec(
                "intensity has zero mass on the support".into(),
            ));
        }
        let span = T::lit(2.0 * l);
        let quad_tol = T::lit(QUADRATURE_TOLERANCE) * rough;
        let interp_tol = T::lit(INTERPOLATION_TOLERANCE) * rough;

        let mut xs = vec![base[0]];
        let mut masses = Vec::with_capacity(base.len());
        for w in base.windows(2) {
            refine_cell(
                &f,
                w[0],
                w[1],
                quad_tol / span,
                interp_tol,
                MAX_REFINE_DEPTH,
                &mut xs,
                &mut masses,
            );
        }

        let mut cumulative = Vec::with_capacity(xs.len());
        let mut acc = T::zero();
        cumulative.push(acc);
        for m in &masses {
            acc = acc + *m;
            cumulative.push(acc);
        }
        let total = acc;
        if !(total > T::zero()) || !total.is_finite() {
            return Err(Error::DegenerateSpec(
                "intensity has zero mass on the support".into(),
            ));
        }
        let norm = T::one() / total;
        let mut ys: Vec<T> = cumulative.iter().map(|&c| c / total).collect();
        let last = ys.len() - 1;
        ys[0] = T::zero();
        ys[last] = T::one();
        let ds: Vec<T> = xs.iter().map(|&x| f(x) * norm).collect();
        let grid = MonotoneCubic::new(xs, ys, &ds);

        Ok(Self {
            spec: spec.clone(),
            intensity,
            halfwidth,
            norm,
            grid,
        })
    }

    pub fn spec(&self) -> &WavefunctionSpec {
        &self.spec
    }

    pub fn norm(&self) -> T {
        self.norm
    }

    pub fn support_halfwidth(&self) -> T {
        self.halfwidth
    }

    /// `(x, F_B(x))` nodes of the cdf grid.
    pub fn grid(&self) -> (&[T], &[T]) {
        (self.grid.nodes(), self.grid.values())
    }

    /// Normalized |ψ(x)|², zero outside `[-L, L]`.
    #[inline]
    pub fn pdf(&self, x: T) -> T {
        if x.is_nan() || x < -self.halfwidth || x > self.halfwidth {
            return T::zero();
        }
        self.intensity.eval(x) * self.norm
    }

    /// `F_B(x)`: exactly 0 below `-L`, exactly 1 above `L`.
    #[inline]
    pub fn cdf(&self, x: T) -> T {
        if x <= -self.halfwidth {
            T::zero()
        } else if x >= self.halfwidth {
            T::one()
        } else {
            self.grid.eval(x)
        }
    }

    /// `∫_{-L}^{x} pdf` by direct adaptive quadrature, bypassing the grid.
    pub fn cdf_by_quadrature(&self, x: T) -> T {
        let x = x.max(-self.halfwidth).min(self.halfwidth);
        let f = |t: T| self.pdf(t);
        let (nodes, _) = self.grid();
        // integrate over the same panel boundaries the grid uses so
        // oscillations are resolved
        let end = nodes.partition_point(|&n| n < x);
        let mut acc = T::zero();
        for w in nodes[..end].windows(2) {
            acc = acc + adaptive_simpson(&f, w[0], w[1], T::lit(1e-15));
        }
        if end >= 1 {
            acc = acc + adaptive_simpson(&f, nodes[end - 1], x, T::lit(1e-15));
        }
        acc
    }

    /// Smallest-residual `x` with `cdf(x) = p`; `quantile(0) = -L`,
    /// `quantile(1) = L`.
    pub fn quantile(&self, p: T) -> Result<T> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::Domain {
                value: p.as_f64(),
                domain: "[0, 1]",
            });
        }
        Ok(self.quantile_unchecked(p))
    }

    /// [`quantile`](Self::quantile) without the domain check; `p` must lie
    /// in `[0, 1]`.
    #[inline]
    pub fn quantile_unchecked(&self, p: T) -> T {
        if p <= T::zero() {
            return -self.halfwidth;
        }
        if p >= T::one() {
            return self.halfwidth;
        }
        let (xs, ys) = self.grid();
        let k = ys.partition_point(|&v| v < p);
        if ys[k] == p {
            return xs[k];
        }
        let i = k - 1;
        let (mut lo, mut hi) = (xs[i], xs[k]);
        let (flo, fhi) = (ys[i], ys[k]);
        let target_tol = T::lit(1e-14).max(T::epsilon() * T::lit(4.0));
        // secant start, then safeguarded Newton on the cell's cubic
        let mut x = lo + (hi - lo) * (p - flo) / (fhi - flo);
        for _ in 0..100 {
            let fx = self.grid.eval_in(i, x);
            let r = fx - p;
            if r.abs() <= target_tol {
                return x;
            }
            if r < T::zero() {
                lo = x;
            } else {
                hi = x;
            }
            let slope = self.grid.slope_in(i, x);
            let newton = x - r / slope;
            let next = if slope > T::zero() && newton > lo && newton < hi {
                newton
            } else {
                lo + (hi - lo) / T::lit(2.0)
            };
            if next <= lo || next >= hi {
                return x;
            }
            x = next;
        }
        x
    }
}

impl<T: Real> CumulativeDistribution<T> for BornDistribution<T> {
    #[inline]
    fn cdf(&self, x: T) -> T {
        BornDistribution::cdf(self, x)
    }
}

/// Splits `[a, b]` until the Hermite midpoint agrees with quadrature, then
/// appends the accepted right nodes and cell masses.
#[allow(clippy::too_many_arguments)]
fn refine_cell<T, F>(
    f: &F,
    a: T,
    b: T,
    quad_tol_per_len: T,
    interp_tol: T,
    depth: u32,
    xs: &mut Vec<T>,
    masses: &mut Vec<T>,
) where
    T: Real,
    F: Fn(T) -> T,
{
    let h = b - a;
    let m = a + h / T::lit(2.0);
    let half_tol = quad_tol_per_len * h / T::lit(2.0);
    let left = adaptive_simpson(f, a, m, half_tol);
    let right = adaptive_simpson(f, m, b, half_tol);
    let mass = left + right;
    let predicted = midpoint_rise(h, mass, f(a), f(b));
    if depth == 0 || (predicted - left).abs() <= interp_tol {
        xs.push(b);
        masses.push(mass);
        return;
    }
    refine_cell(f, a, m, quad_tol_per_len, interp_tol, depth - 1, xs, masses);
    refine_cell(f, m, b, quad_tol_per_len, interp_tol, depth - 1, xs, masses);
}

/// Parses two-column `x,intensity` CSV. Blank lines, `#` comments and a
/// non-numeric header row are skipped.
pub fn parse_table_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(Error::parse(idx + 1, "expected two columns `x,intensity`"));
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(x), Ok(y)) => rows.push((x, y)),
            _ if rows.is_empty() && a.parse::<f64>().is_err() => continue,
            _ => return Err(Error::parse(idx + 1, format!("non-numeric row `{line}`"))),
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn born(spec: &WavefunctionSpec) -> BornDistribution<f64> {
        BornDistribution::new(spec).unwrap()
    }

    #[test]
    fn gaussian_norm_matches_closed_form() {
        let d = born(&WavefunctionSpec::gaussian(1.0, 8.0));
        let expected = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((d.norm() - expected).abs() < 1e-9);
        assert!((d.pdf(0.0) - expected).abs() < 1e-9);
    }

    #[test]
    fn zero_table_is_degenerate() {
        let spec = WavefunctionSpec::tabulated(vec![(-1.0, 0.0), (0.0, 0.0), (1.0, 0.0)], 2.0);
        assert!(matches!(
            BornDistribution::<f64>::new(&spec),
            Err(Error::DegenerateSpec(_))
        ));
    }

    #[test]
    fn non_positive_parameters_name_the_field() {
        let cases = [
            (WavefunctionSpec::gaussian(0.0, 8.0), "sigma"),
            (WavefunctionSpec::single_slit(-1.0, 8.0), "beta"),
            (WavefunctionSpec::double_slit(1.0, 0.0, 8.0), "delta"),
            (WavefunctionSpec::gaussian(1.0, -8.0), "support_halfwidth"),
            (WavefunctionSpec::gaussian(1.0, f64::NAN), "support_halfwidth"),
        ];
        for (spec, want) in cases {
            match BornDistribution::<f64>::new(&spec) {
                Err(Error::InvalidSpec { field, .. }) => assert_eq!(field, want),
                other => panic!("{spec:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn short_table_rejected() {
        let spec = WavefunctionSpec::tabulated(vec![(0.0, 1.0), (1.0, 1.0)], 2.0);
        assert!(matches!(
            BornDistribution::<f64>::new(&spec),
            Err(Error::InvalidSpec { field: "table", .. })
        ));
        let spec = WavefunctionSpec::tabulated(vec![(0.0, 1.0), (1.0, -1.0), (2.0, 1.0)], 2.0);
        assert!(BornDistribution::<f64>::new(&spec).is_err());
        let spec = WavefunctionSpec::tabulated(vec![(0.0, 1.0), (0.0, 1.0), (2.0, 1.0)], 2.0);
        assert!(BornDistribution::<f64>::new(&spec).is_err());
    }

    #[test]
    fn narrow_gaussian_support_reports_required_halfwidth() {
        match BornDistribution::<f64>::new(&WavefunctionSpec::gaussian(1.0, 3.0)) {
            Err(Error::Truncation {
                required_halfwidth, ..
            }) => {
                // erfc(L/√2) = 1e-12 at L ≈ 7.13
                assert!(required_halfwidth > 7.0 && required_halfwidth < 7.3);
                let ok = WavefunctionSpec::gaussian(1.0, required_halfwidth);
                assert!(BornDistribution::<f64>::new(&ok).is_ok());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn slit_tail_checked_only_on_request() {
        let spec = WavefunctionSpec::single_slit(1.0, 10.0);
        assert!(BornDistribution::<f64>::new(&spec).is_ok());
        let strict = spec.with_tail_tolerance(1e-3);
        match BornDistribution::<f64>::new(&strict) {
            Err(Error::Truncation {
                required_halfwidth, ..
            }) => {
                // 2/(π L) = 1e-3
                assert!((required_halfwidth - 2000.0 / std::f64::consts::PI).abs() < 1e-6);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tabulated_tail_outside_support() {
        let table = vec![(-4.0, 1.0), (0.0, 1.0), (4.0, 1.0)];
        let spec = WavefunctionSpec::tabulated(table.clone(), 2.0);
        match BornDistribution::<f64>::new(&spec) {
            Err(Error::Truncation {
                required_halfwidth, ..
            }) => assert!((required_halfwidth - 4.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        let spec = WavefunctionSpec::tabulated(table, 2.0).with_tail_tolerance(0.6);
        let d = born(&spec);
        assert!((d.cdf(0.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn uniform_table_has_linear_cdf() {
        let d = born(&WavefunctionSpec::tabulated(
            vec![(0.0, 1.0), (2.0, 1.0), (4.0, 1.0)],
            4.0,
        ));
        for k in 0..=40 {
            let x = k as f64 * 0.1;
            assert!((d.cdf(x) - x / 4.0).abs() < 1e-12, "x={x}");
        }
        assert_eq!(d.cdf(-0.5), 0.0);
        assert_eq!(d.pdf(-0.5), 0.0);
    }

    #[test]
    fn pdf_zero_outside_support() {
        for spec in [
            WavefunctionSpec::gaussian(1.0, 8.0),
            WavefunctionSpec::single_slit(1.0, 10.0),
            WavefunctionSpec::double_slit(1.0, 5.0, 10.0),
        ] {
            let d = born(&spec);
            let l = spec.support_halfwidth();
            assert_eq!(d.pdf(l + 1.0), 0.0);
            assert_eq!(d.pdf(-l - 1.0), 0.0);
            assert_eq!(d.cdf(l), 1.0);
            assert_eq!(d.cdf(-l), 0.0);
        }
    }

    #[test]
    fn quantile_domain() {
        let d = born(&WavefunctionSpec::gaussian(1.0, 8.0));
        assert!(d.quantile(-0.1).is_err());
        assert!(d.quantile(1.1).is_err());
        assert!(d.quantile(f64::NAN).is_err());
        assert_eq!(d.quantile(0.0).unwrap(), -8.0);
        assert_eq!(d.quantile(1.0).unwrap(), 8.0);
        assert!(d.quantile(0.5).unwrap().abs() < 1e-8);
        assert!((d.quantile(0.8413).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn spec_json_shape() {
        let spec = WavefunctionSpec::double_slit(1.0, 5.0, 10.0);
        let s = serde_json::to_string(&spec).unwrap();
        assert_eq!(
            s,
            r#"{"kind":"double_slit","beta":1.0,"delta":5.0,"support_halfwidth":10.0}"#
        );
        let back: WavefunctionSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec);
        assert!(serde_json::from_str::<WavefunctionSpec>(
            r#"{"kind":"gaussian","sigma":1,"support_halfwidth":8,"bogus":1}"#
        )
        .is_err());
    }

    #[test]
    fn table_csv() {
        let rows = parse_table_csv("x,intensity\n# c\n-1, 0.5\n0,1\n\n1,0.5\n").unwrap();
        assert_eq!(rows, vec![(-1.0, 0.5), (0.0, 1.0), (1.0, 0.5)]);
        assert!(matches!(
            parse_table_csv("0,1\n1,x\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn single_precision_distribution() {
        let d = BornDistribution::<f32>::new(&WavefunctionSpec::gaussian(1.0, 8.0)).unwrap();
        assert!((d.cdf(0.0) - 0.5).abs() < 1e-5);
        assert!((d.cdf(1.0) - 0.841_344_75).abs() < 1e-4);
        let q = d.quantile(0.975).unwrap();
        assert!((q - 1.959_964).abs() < 1e-3);
    }
}
