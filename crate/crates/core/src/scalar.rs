//! Scalar C^2 maps carried with their first two derivatives, plus the small
//! catalog of named maps the command line exposes.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real map together with explicit first and second derivatives. The
/// derivatives are trusted inputs; `check_derivatives` spot-checks them
/// against finite differences so a mistyped formula fails loudly instead of
/// quietly bending every downstream computation.
#[derive(Clone)]
pub struct ScalarMap {
    label: String,
    f: ScalarFn,
    df: ScalarFn,
    d2f: ScalarFn,
}

impl fmt::Debug for ScalarMap {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "ScalarMap({})", self.label)
    }
}

impl ScalarMap {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), f: Arc::new(f), df: Arc::new(df), d2f: Arc::new(d2f) }
    }

    /// x -> mu x (1 - x).
    pub fn logistic(mu: f64) -> Self {
        Self::new(
            format!("logistic({mu})"),
            move |x| mu * x * (1.0 - x),
            move |x| mu * (1.0 - 2.0 * x),
            move |_| -2.0 * mu,
        )
    }

    /// x -> delta x.
    pub fn linear(delta: f64) -> Self {
        Self::new(format!("linear({delta})"), move |x| delta * x, move |_| delta, |_| 0.0)
    }

    /// x -> delta x + eta sin x.
    pub fn linear_plus_sine(delta: f64, eta: f64) -> Self {
        Self::new(
            format!("linear_plus_sine({delta}, {eta})"),
            move |x| delta * x + eta * x.sin(),
            move |x| delta + eta * x.cos(),
            move |x| -eta * x.sin(),
        )
    }

    /// Parse a catalog name such as `logistic(2)`, `linear(0.1)` or
    /// `linear_plus_sine(0.1, 0.001)`.
    pub fn from_catalog(spec: &str) -> Result<Self> {
        let s = spec.trim();
        let open = s
            .find('(')
            .ok_or_else(|| Error::InvalidParams(format!("malformed map spec `{s}`")))?;
        if !s.ends_with(')') {
            return Err(Error::InvalidParams(format!("malformed map spec `{s}`")));
        }
        let name = s[..open].trim();
        let args: Vec<f64> = s[open + 1..s.len() - 1]
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParams(format!("bad number `{}` in `{s}`", a.trim())))
            })
            .collect::<Result<_>>()?;
        let want = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("`{name}` takes {n} argument(s), got {}", args.len())))
            }
        };
        match name {
            "logistic" => {
                want(1)?;
                Ok(Self::logistic(args[0]))
            }
            "linear" => {
                want(1)?;
                Ok(Self::linear(args[0]))
            }
            "linear_plus_sine" => {
                want(2)?;
                Ok(Self::linear_plus_sine(args[0], args[1]))
            }
            _ => Err(Error::InvalidParams(format!("unknown map `{name}`"))),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        (self.df)(x)
    }

    pub fn second_deriv(&self, x: f64) -> f64 {
        (self.d2f)(x)
    }

    /// Compare the supplied derivatives against central differences at
    /// `samples` points of `interval`. Tolerance is relative where the
    /// derivative is large and absolute near zero, so the logistic peak
    /// (derivative exactly zero) does not trip a relative test.
    pub fn check_derivatives(&self, interval: (f64, f64), samples: usize) -> Result<()> {
        let (lo, hi) = interval;
        if lo.is_nan() || hi.is_nan() || lo >= hi || samples < 2 {
            return Err(Error::InvalidParams("need lo < hi and at least 2 samples".into()));
        }
        for i in 0..samples {
            let x = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            let scale = x.abs().max(1.0);
            let h1 = 1e-6 * scale;
            let fd1 = (self.eval(x + h1) - self.eval(x - h1)) / (2.0 * h1);
            let df = self.deriv(x);
            if (fd1 - df).abs() > 1e-5 * df.abs().max(1.0) {
                return Err(Error::InvalidParams(format!(
                    "first derivative of {} disagrees with finite differences at x = {x}: {df} vs {fd1}",
                    self.label
                )));
            }
            let h2 = 1e-4 * scale;
            let fd2 = (self.eval(x + h2) - 2.0 * self.eval(x) + self.eval(x - h2)) / (h2 * h2);
            let d2f = self.second_deriv(x);
            if (fd2 - d2f).abs() > 1e-4 * d2f.abs().max(1.0) {
                return Err(Error::InvalidParams(format!(
                    "second derivative of {} disagrees with finite differences at x = {x}: {d2f} vs {fd2}",
                    self.label
                )));
            }
        }
        Ok(())
    }
}

/// A sampled estimate of the C^2 distance from `h` to x -> delta x.
#[derive(Debug, Clone, Copy)]
pub struct C2Distance {
    pub value: f64,
    pub interval: (f64, f64),
    pub samples: usize,
    /// Always true: the supremum is estimated on a sample grid, not certified
    /// over the whole interval.
    pub sampled_only: bool,
}

/// sup over sampled x of max(|h(x) - delta x|, |h'(x) - delta|, |h''(x)|).
pub fn c2_distance_to_linear(
    h: &ScalarMap,
    delta: f64,
    interval: (f64, f64),
    samples: usize,
) -> Result<C2Distance> {
    let (lo, hi) = interval;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::InvalidParams("need lo < hi".into()));
    }
    if samples < 2 {
        return Err(Error::InvalidParams("need at least 2 samples".into()));
    }
    let mut sup: f64 = 0.0;
    for i in 0..samples {
        let x = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
        let d0 = (h.eval(x) - delta * x).abs();
        let d1 = (h.deriv(x) - delta).abs();
        let d2 = h.second_deriv(x).abs();
        sup = sup.max(d0).max(d1).max(d2);
    }
    Ok(C2Distance { value: sup, interval, samples, sampled_only: true })
}
