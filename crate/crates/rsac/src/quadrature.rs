//! Deterministic adaptive quadrature.
//!
//! A 15-point Gauss-Kronrod rule is applied per panel; the panel with the
//! largest error estimate is bisected until the summed error meets the
//! tolerance contract. Integrands with step discontinuities (prime counting
//! functions) are handled by the same refinement: each bisection halves the
//! error a jump contributes, so no jump-aware panel placement is needed.

use crate::error::{Error, Result};

/// Tolerance contract for quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum bisection depth per panel.
    pub max_subdivisions: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdivisions: 60,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rel_tol.is_nan()
            || self.rel_tol <= 0.0
            || self.abs_tol.is_nan()
            || self.abs_tol <= 0.0
        {
            return Err(Error::InvalidParam(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::InvalidParam("max_subdivisions must be >= 1".into()));
        }
        Ok(())
    }
}

// 15-point Kronrod abscissae on [-1, 1] (positive half) with the embedded
// 7-point Gauss rule; classical QUADPACK constants.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    /// Sum of the two half-panel rule values (the kept estimate).
    value: f64,
    /// Rule value over the left and right half, reused on split.
    half: [f64; 2],
    err: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.a == other.a
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    /// Largest error first; ties broken by left endpoint for determinism.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err
            .total_cmp(&other.err)
            .then(other.a.total_cmp(&self.a))
    }
}

impl Panel {
    /// Build a panel from the rule value over the whole interval: evaluate
    /// both halves and estimate the error as the whole-vs-halves
    /// disagreement. Either estimate alone can vanish spuriously when a
    /// jump lands on the wrong spot of the rule, so the kept error is the
    /// larger of the two-level disagreement and the halves' own
    /// Gauss-vs-Kronrod estimates.
    fn create<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, depth: u32) -> Panel {
        let mid = 0.5 * (a + b);
        let (vl, el) = gk15(f, a, mid);
        let (vr, er) = gk15(f, mid, b);
        let value = vl + vr;
        let err = (whole - value)
            .abs()
            .max(0.5 * (el + er))
            .max(50.0 * f64::EPSILON * value.abs());
        Panel {
            a,
            b,
            value,
            half: [vl, vr],
            err,
            depth,
        }
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = kronrod.abs();
    let mut fv = [0.0f64; 15];
    fv[7] = fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[i] = f1;
        fv[14 - i] = f2;
        kronrod += WGK[i] * (f1 + f2);
        resabs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for i in 0..7 {
        resasc += WGK[i] * ((fv[i] - mean).abs() + (fv[14 - i] - mean).abs());
    }
    let value = kronrod * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * 1.0f64.min((200.0 * err / resasc).powf(1.5));
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

/// Integrate `f` over `[a, b]` (`a <= b`) to the tolerances in `spec`.
///
/// Fails with a convergence error, carrying the best estimate and its error
/// bound, when the tolerance cannot be met within the subdivision budget.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("quadrature bounds must be finite".into()));
    }
    if a >= b {
        return Ok(0.0);
    }

    // Seed with a few uniform panels instead of one root: a single panel
    // whose nodes all miss a narrow feature would freeze with a spurious
    // zero error estimate.
    const SEEDS: usize = 4;
    let mut total_value = 0.0;
    let mut total_err = 0.0;
    let mut panels = std::collections::BinaryHeap::new();
    for i in 0..SEEDS {
        let lo = a + (b - a) * i as f64 / SEEDS as f64;
        let hi = a + (b - a) * (i + 1) as f64 / SEEDS as f64;
        let (whole, _) = gk15(&f, lo, hi);
        let seed = Panel::create(&f, lo, hi, whole, 0);
        if !seed.value.is_finite() {
            return Err(Error::Convergence {
                estimate: seed.value,
                error_bound: f64::INFINITY,
            });
        }
        total_value += seed.value;
        total_err += seed.err;
        panels.push(seed);
    }
    // Panels that reached the subdivision limit; they keep contributing
    // their value and error but are never revisited.
    let mut frozen: Vec<Panel> = Vec::new();

    // Hard cap on panel count so a hostile integrand cannot grow the heap
    // without bound before hitting the depth limit.
    const MAX_PANELS: usize = 1 << 20;

    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total_value.abs());
        if total_err <= tol {
            break;
        }
        let p = match panels.pop() {
            Some(p) => p,
            None => {
                return Err(Error::Convergence {
                    estimate: total_value,
                    error_bound: total_err,
                })
            }
        };
        let mid = 0.5 * (p.a + p.b);
        if p.depth >= spec.max_subdivisions
            || mid <= p.a
            || mid >= p.b
            || panels.len() + frozen.len() + 2 > MAX_PANELS
        {
            frozen.push(p);
            continue;
        }
        total_value -= p.value;
        total_err -= p.err;
        for (lo, hi, known) in [(p.a, mid, p.half[0]), (mid, p.b, p.half[1])] {
            let child = Panel::create(&f, lo, hi, known, p.depth + 1);
            if !child.value.is_finite() {
                return Err(Error::Convergence {
                    estimate: total_value,
                    error_bound: f64::INFINITY,
                });
            }
            total_value += child.value;
            total_err += child.err;
            panels.push(child);
        }
    }

    // Deterministic final sum, independent of refinement order.
    let mut ordered: Vec<Panel> = panels.into_vec();
    ordered.append(&mut frozen);
    ordered.sort_by(|p, q| p.a.total_cmp(&q.a));
    Ok(ordered.iter().map(|p| p.value).sum())
}

/// Integrate with signed orientation: reversed bounds negate the result.
pub fn integrate_signed<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if a <= b {
        integrate(f, a, b, spec)
    } else {
        integrate(f, b, a, spec).map(|v| -v)
    }
}
