//! Adaptive Gauss–Kronrod quadrature and bracketed root finding.

use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("invalid integration interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("invalid quadrature settings: {0}")]
    InvalidSpec(&'static str),
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (best estimate {value}, error bound {error_estimate})"
    )]
    NoConvergence {
        value: f64,
        error_estimate: f64,
        subdivisions: usize,
    },
    #[error("integrand is not finite at x = {x}")]
    NonFiniteIntegrand { x: f64 },
    #[error("root is not bracketed: g({lo}) = {g_lo}, g({hi}) = {g_hi}")]
    InvalidBracket {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },
    #[error("root finding did not converge in {iterations} iterations (bracket [{lo}, {hi}])")]
    RootNoConvergence { lo: f64, hi: f64, iterations: usize },
}

/// Tolerances for [`integrate`] and the truncation of semi-infinite CRPS tails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
    /// Upper tail probability `1 - F(x*)` at which semi-infinite CRPS integrals are cut.
    pub tail_cutoff_probability: T,
}

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        // f32 cannot reach the f64 targets; fall back to a few hundred ulps.
        let floor = T::epsilon() * T::lit(64.0);
        Self {
            abs_tol: T::lit(1e-9).max(floor),
            rel_tol: T::lit(1e-8).max(floor),
            max_subdivisions: 200,
            tail_cutoff_probability: T::lit(1e-9).max(floor),
        }
    }
}

impl<T: Real> QuadratureSpec<T> {
    pub fn validate(&self) -> Result<(), NumericsError> {
        let positive = |v: T| v.is_finite() && v > T::zero();
        if !positive(self.abs_tol) || !positive(self.rel_tol) {
            return Err(NumericsError::InvalidSpec("tolerances must be finite and positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(NumericsError::InvalidSpec("max_subdivisions must be at least 1"));
        }
        let p = self.tail_cutoff_probability;
        if !(p > T::zero() && p < T::one()) {
            return Err(NumericsError::InvalidSpec("tail cutoff probability must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Integral value together with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: T,
}

// Kronrod 15-point abscissae on [-1, 1]; odd indices are the embedded Gauss 7-point nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    lo: T,
    hi: T,
    value: T,
    error: T,
}

fn kronrod15<T: Real, F: FnMut(T) -> T>(f: &mut F, lo: T, hi: T) -> Result<Segment<T>, NumericsError> {
    let half = T::lit(0.5);
    let center = half * (lo + hi);
    let half_len = half * (hi - lo);
    let eval = |f: &mut F, x: T| -> Result<T, NumericsError> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumericsError::NonFiniteIntegrand { x: x.as_f64() })
        }
    };

    let f_center = eval(f, center)?;
    let mut gauss = f_center * T::lit(WG[3]);
    let mut kronrod = f_center * T::lit(WGK[7]);
    let mut abs_sum = kronrod.abs();
    let mut values = [(T::zero(), T::zero()); 7];
    for (j, slot) in values.iter_mut().enumerate() {
        let dx = half_len * T::lit(XGK[j]);
        let f1 = eval(f, center - dx)?;
        let f2 = eval(f, center + dx)?;
        *slot = (f1, f2);
        let wk = T::lit(WGK[j]);
        kronrod = kronrod + wk * (f1 + f2);
        abs_sum = abs_sum + wk * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }

    let mean = kronrod * half;
    let mut asc = T::lit(WGK[7]) * (f_center - mean).abs();
    for (j, &(f1, f2)) in values.iter().enumerate() {
        asc = asc + T::lit(WGK[j]) * ((f1 - mean).abs() + (f2 - mean).abs());
    }

    let scale = half_len.abs();
    let value = kronrod * half_len;
    let res_abs = abs_sum * scale;
    let res_asc = asc * scale;
    let mut error = ((kronrod - gauss) * half_len).abs();
    if res_asc != T::zero() && error != T::zero() {
        let ratio = (T::lit(200.0) * error / res_asc).powf(T::lit(1.5));
        error = res_asc * ratio.min(T::one());
    }
    let round_off = T::lit(50.0) * T::epsilon() * res_abs;
    if res_abs > T::min_positive_value() / (T::lit(50.0) * T::epsilon()) && round_off > error {
        error = round_off;
    }
    Ok(Segment { lo, hi, value, error })
}

fn adaptive<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    lo: T,
    hi: T,
    spec: &QuadratureSpec<T>,
) -> Result<Quadrature<T>, NumericsError> {
    let mut segments = vec![kronrod15(&mut f, lo, hi)?];
    let mut subdivisions = 0usize;
    loop {
        let value: T = segments.iter().map(|s| s.value).sum();
        let error: T = segments.iter().map(|s| s.error).sum();
        if error <= spec.abs_tol.max(spec.rel_tol * value.abs()) {
            return Ok(Quadrature { value, error });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.partial_cmp(&b.1.error).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let seg = segments[worst];
        let mid = T::lit(0.5) * (seg.lo + seg.hi);
        let too_narrow = !(mid > seg.lo && mid < seg.hi);
        if subdivisions >= spec.max_subdivisions || too_narrow {
            return Err(NumericsError::NoConvergence {
                value: value.as_f64(),
                error_estimate: error.as_f64(),
                subdivisions,
            });
        }
        let left = kronrod15(&mut f, seg.lo, mid)?;
        let right = kronrod15(&mut f, mid, seg.hi)?;
        segments[worst] = left;
        segments.push(right);
        subdivisions += 1;
    }
}

/// Integrates `f` over `[lo, hi]` where `hi` may be `+∞`.
///
/// Finite intervals are bisected adaptively with the 7/15-point Gauss–Kronrod
/// pair until the summed error estimate satisfies
/// `error <= max(abs_tol, rel_tol * |value|)`. A semi-infinite interval is
/// mapped onto `[0, 1)` with `x = lo + t / (1 - t)`.
pub fn integrate<T, F>(mut f: F, lo: T, hi: T, spec: &QuadratureSpec<T>) -> Result<Quadrature<T>, NumericsError>
where
    T: Real,
    F: FnMut(T) -> T,
{
    spec.validate()?;
    if !lo.is_finite() || hi.is_nan() || hi == T::neg_infinity() || !(lo < hi) {
        return Err(NumericsError::InvalidInterval {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    if hi.is_infinite() {
        let mapped = |t: T| {
            let s = T::one() - t;
            f(lo + t / s) / (s * s)
        };
        adaptive(mapped, T::zero(), T::one(), spec)
    } else {
        adaptive(f, lo, hi, spec)
    }
}

const ROOT_MAX_ITERATIONS: usize = 200;

/// Finds a zero of `g` inside `[lo, hi]` to bracket width `tol`.
///
/// Bisection safeguarded Brent iteration: secant or inverse quadratic steps are
/// taken when they land inside the bracket and shrink it fast enough,
/// otherwise the bracket is halved.
pub fn find_root<T, G>(mut g: G, lo: T, hi: T, tol: T) -> Result<T, NumericsError>
where
    T: Real,
    G: FnMut(T) -> T,
{
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let mut a = lo;
    let mut b = hi;
    let mut fa = g(a);
    let mut fb = g(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(NumericsError::InvalidBracket {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            g_lo: fa.as_f64(),
            g_hi: fb.as_f64(),
        });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..ROOT_MAX_ITERATIONS {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol_here = two * T::epsilon() * b.abs() + half * tol;
        let m = half * (c - b);
        if m.abs() <= tol_here || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol_here && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * m * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < (T::lit(3.0) * m * q - (tol_here * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol_here { b + d } else { b + tol_here * m.signum() };
        fb = g(b);
        if fb.is_nan() {
            return Err(NumericsError::RootNoConvergence {
                lo: b.min(c).as_f64(),
                hi: b.max(c).as_f64(),
                iterations: ROOT_MAX_ITERATIONS,
            });
        }
    }
    Err(NumericsError::RootNoConvergence {
        lo: b.min(c).as_f64(),
        hi: b.max(c).as_f64(),
        iterations: ROOT_MAX_ITERATIONS,
    })
}
