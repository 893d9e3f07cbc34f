//! Adaptive Gauss-Kronrod quadrature for vector-valued integrands.
//!
//! The integrator works on a set of user-supplied breakpoints, applies the
//! 10-point Gauss / 21-point Kronrod pair on every panel and bisects the
//! panel with the largest tolerance-normalised error until every component
//! meets `max(rel_tol * |I_k|, abs_tol_k)`. Several Green-function traces
//! share the same reflection coefficients, so integrating them together
//! costs a single pass over the wave-vector axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_284_810,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and limits for every adaptive integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    /// Absolute floor, expressed as a fraction of the natural scale of the
    /// integral (the free-space trace for Green functions).
    pub abs_floor: f64,
    pub max_panels: usize,
    /// Number of e-foldings of the slowest evanescent exponential kept
    /// before the wave-vector axis is truncated.
    pub tail_cutoff: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_floor: 1e-12,
            max_panels: 4000,
            tail_cutoff: 70.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return crate::error::domain("rel_tol must be positive");
        }
        if !(self.abs_floor >= 0.0) {
            return crate::error::domain("abs_floor must be non-negative");
        }
        if self.max_panels == 0 {
            return crate::error::domain("max_panels must be at least 1");
        }
        if !(self.tail_cutoff > 0.0) {
            return crate::error::domain("tail_cutoff must be positive");
        }
        Ok(())
    }
}

/// A value with its absolute error estimate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate {
        value: 0.0,
        error: 0.0,
    };

    pub fn new(value: f64, error: f64) -> Self {
        Self { value, error }
    }

    pub fn scale(self, s: f64) -> Self {
        Self {
            value: self.value * s,
            error: self.error * s.abs(),
        }
    }

    pub fn rel_error(&self) -> f64 {
        if self.value == 0.0 {
            if self.error == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.error / self.value.abs()
        }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate::new(self.value + rhs.value, self.error + rhs.error)
    }
}

impl std::ops::Sub for Estimate {
    type Output = Estimate;
    fn sub(self, rhs: Estimate) -> Estimate {
        Estimate::new(self.value - rhs.value, self.error + rhs.error)
    }
}

impl std::iter::Sum for Estimate {
    fn sum<I: Iterator<Item = Estimate>>(iter: I) -> Estimate {
        iter.fold(Estimate::ZERO, |acc, e| acc + e)
    }
}

#[derive(Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > err {
            err = min_err;
        }
    }
    err
}

fn gk21<const N: usize, F>(f: &mut F, a: f64, b: f64) -> Panel<N>
where
    F: FnMut(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv1 = [[0.0; N]; 10];
    let mut fv2 = [[0.0; N]; 10];

    let fc = f(center);
    let mut res_k = [0.0; N];
    let mut res_g = [0.0; N];
    let mut res_abs = [0.0; N];
    for k in 0..N {
        res_k[k] = WGK[10] * fc[k];
        res_abs[k] = res_k[k].abs();
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for k in 0..N {
            let sum = f1[k] + f2[k];
            res_k[k] += WGK[j] * sum;
            res_abs[k] += WGK[j] * (f1[k].abs() + f2[k].abs());
            if j % 2 == 1 {
                res_g[k] += WG[j / 2] * sum;
            }
        }
        fv1[j] = f1;
        fv2[j] = f2;
    }

    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for k in 0..N {
        let mean = 0.5 * res_k[k];
        let mut res_asc = WGK[10] * (fc[k] - mean).abs();
        for j in 0..10 {
            res_asc += WGK[j] * ((fv1[j][k] - mean).abs() + (fv2[j][k] - mean).abs());
        }
        let err = (res_k[k] - res_g[k]) * half;
        value[k] = res_k[k] * half;
        error[k] = rescale_error(err, res_abs[k] * half.abs(), res_asc * half.abs());
    }
    Panel { a, b, value, error }
}

/// Integrates a vector-valued function over `[breaks[0], breaks.last()]`,
/// starting from one panel per consecutive pair of breakpoints.
///
/// `abs_tol[k]` is the absolute tolerance of component `k`.
pub fn integrate<const N: usize, F>(
    mut f: F,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: [f64; N],
    max_panels: usize,
) -> Result<[Estimate; N]>
where
    F: FnMut(f64) -> [f64; N],
{
    assert!(breaks.len() >= 2, "need at least one panel");
    let mut panels: Vec<Panel<N>> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk21(&mut f, w[0], w[1]))
        .collect();
    if panels.is_empty() {
        return Ok([Estimate::ZERO; N]);
    }

    loop {
        let mut total = [0.0; N];
        let mut err = [0.0; N];
        for p in &panels {
            for k in 0..N {
                total[k] += p.value[k];
                err[k] += p.error[k];
            }
        }
        let mut tol = [0.0; N];
        let mut converged = true;
        for k in 0..N {
            tol[k] = (rel_tol * total[k].abs()).max(abs_tol[k]);
            if !(err[k] <= tol[k]) {
                converged = false;
            }
        }
        if converged {
            let mut out = [Estimate::ZERO; N];
            for k in 0..N {
                out[k] = Estimate::new(total[k], err[k]);
            }
            return Ok(out);
        }

        let worst = panels
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let score: f64 = (0..N)
                    .map(|k| p.error[k] / tol[k].max(f64::MIN_POSITIVE))
                    .sum();
                (i, score)
            })
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(i, _)| i)
            .unwrap_or(0);

        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        let too_narrow = !(mid > p.a && mid < p.b);
        if panels.len() >= max_panels || too_narrow {
            let k = (0..N)
                .max_by(|&x, &y| (err[x] / tol[x]).total_cmp(&(err[y] / tol[y])))
                .unwrap_or(0);
            return Err(Error::Integration {
                partial: total[k],
                error: err[k],
                panels: panels.len(),
            });
        }
        panels[worst] = gk21(&mut f, p.a, mid);
        panels.push(gk21(&mut f, mid, p.b));
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(
    mut f: F,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    integrate(|x| [f(x)], breaks, rel_tol, [abs_tol], max_panels).map(|r| r[0])
}

/// Breakpoints `lo, lo*r, lo*r^2, ..., hi` with `per_decade` points per decade.
pub fn geometric_breaks(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo);
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let ratio = (hi / lo).powf(1.0 / n as f64);
    let mut out = Vec::with_capacity(n + 1);
    let mut x = lo;
    for _ in 0..n {
        out.push(x);
        x *= ratio;
    }
    out.push(hi);
    out
}
