//! Reparametrizations `phi: [c, d] -> [a, b]` of a family parameter.

use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Affine,
    /// Flat on collars of the given width, C-infinity transition in between.
    Smoothstep { collar: f64 },
    Custom { f: ScalarFn, df: ScalarFn },
}

/// A monotone map from a parameter domain onto a family interval with
/// `phi(domain.0) = target.0` and `phi(domain.1) = target.1`.
#[derive(Clone)]
pub struct Reparam {
    domain: (f64, f64),
    target: (f64, f64),
    kind: Kind,
}

impl fmt::Debug for Reparam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            Kind::Affine => "affine".to_string(),
            Kind::Smoothstep { collar } => format!("smoothstep(collar={collar})"),
            Kind::Custom { .. } => "custom".to_string(),
        };
        f.debug_struct("Reparam")
            .field("domain", &self.domain)
            .field("target", &self.target)
            .field("kind", &kind)
            .finish()
    }
}

/// `e^{-1/x}` for `x > 0`, zero otherwise.
fn bump_tail(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

fn bump_tail_deriv(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        bump_tail(x) / (x * x)
    }
}

/// Smooth transition from 0 on `x <= 0` to 1 on `x >= 1`.
fn transition(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let g = bump_tail(x);
    g / (g + bump_tail(1.0 - x))
}

fn transition_deriv(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let g0 = bump_tail(x);
    let g1 = bump_tail(1.0 - x);
    let denom = g0 + g1;
    (bump_tail_deriv(x) * g1 + g0 * bump_tail_deriv(1.0 - x)) / (denom * denom)
}

impl Reparam {
    pub fn identity(a: f64, b: f64) -> Self {
        Self {
            domain: (a, b),
            target: (a, b),
            kind: Kind::Affine,
        }
    }

    /// The increasing affine bijection `[c, d] -> [a, b]`.
    pub fn affine(domain: (f64, f64), target: (f64, f64)) -> Result<Self> {
        if !(domain.0 < domain.1) || !(target.0 < target.1) {
            return Err(Error::InvalidArgument(format!(
                "affine reparametrization needs increasing intervals, got {domain:?} -> {target:?}"
            )));
        }
        Ok(Self {
            domain,
            target,
            kind: Kind::Affine,
        })
    }

    /// Smoothstep on `[a, b]` with collar width `(b - a) / 8`.
    pub fn smoothstep(a: f64, b: f64) -> Self {
        Self::smoothstep_with_collar(a, b, (b - a) / 8.0)
    }

    pub fn smoothstep_with_collar(a: f64, b: f64, collar: f64) -> Self {
        assert!(a < b && collar >= 0.0 && 2.0 * collar < b - a);
        Self {
            domain: (a, b),
            target: (a, b),
            kind: Kind::Smoothstep { collar },
        }
    }

    /// A user supplied map together with its derivative. Rejected unless it
    /// is nondecreasing and hits the interval endpoints.
    pub fn custom(
        domain: (f64, f64),
        target: (f64, f64),
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let (c, d) = domain;
        let samples = 1024;
        let mut prev = f(c);
        if (prev - target.0).abs() > 1e-12 || (f(d) - target.1).abs() > 1e-12 {
            return Err(Error::InvalidArgument(
                "custom reparametrization must map endpoints to endpoints".into(),
            ));
        }
        for i in 1..=samples {
            let t = c + (d - c) * i as f64 / samples as f64;
            let v = f(t);
            if v < prev - 1e-14 || df(t) < -1e-12 {
                return Err(Error::NonMonotone(t));
            }
            prev = v;
        }
        Ok(Self {
            domain,
            target,
            kind: Kind::Custom {
                f: Arc::new(f),
                df: Arc::new(df),
            },
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn target(&self) -> (f64, f64) {
        self.target
    }

    /// Width of the collars on which the map is constant (zero if none).
    pub fn collar(&self) -> f64 {
        match self.kind {
            Kind::Smoothstep { collar } => collar,
            _ => 0.0,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (c, d) = self.domain;
        let (a, b) = self.target;
        match &self.kind {
            Kind::Affine => a + (b - a) * (t - c) / (d - c),
            Kind::Smoothstep { collar } => {
                let x = (t - c - collar) / (d - c - 2.0 * collar);
                a + (b - a) * transition(x)
            }
            Kind::Custom { f, .. } => f(t),
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let (c, d) = self.domain;
        let (a, b) = self.target;
        match &self.kind {
            Kind::Affine => (b - a) / (d - c),
            Kind::Smoothstep { collar } => {
                let width = d - c - 2.0 * collar;
                let x = (t - c - collar) / width;
                (b - a) * transition_deriv(x) / width
            }
            Kind::Custom { df, .. } => df(t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_is_flat_on_collars_and_hits_endpoints() {
        let phi = Reparam::smoothstep(0.0, 1.0);
        for &t in &[0.0, 0.05, 0.125] {
            assert_eq!(phi.eval(t), 0.0);
            assert_eq!(phi.deriv(t), 0.0);
        }
        for &t in &[0.875, 0.95, 1.0] {
            assert_eq!(phi.eval(t), 1.0);
            assert_eq!(phi.deriv(t), 0.0);
        }
        assert!((phi.eval(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn smoothstep_derivative_matches_finite_differences() {
        let phi = Reparam::smoothstep(-0.5, 0.5);
        let h = 1e-6;
        for i in 1..40 {
            let t = -0.5 + i as f64 / 40.0;
            let fd = (phi.eval(t + h) - phi.eval(t - h)) / (2.0 * h);
            assert!((fd - phi.deriv(t)).abs() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn custom_rejects_non_monotone_maps() {
        let err = Reparam::custom(
            (0.0, 1.0),
            (0.0, 1.0),
            |t| t + 0.3 * (2.0 * std::f64::consts::PI * t).sin(),
            |t| 1.0 + 0.6 * std::f64::consts::PI * (2.0 * std::f64::consts::PI * t).cos(),
        );
        assert!(matches!(err, Err(Error::NonMonotone(_))));
    }
}
