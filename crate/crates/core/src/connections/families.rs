//! Built-in connection families.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{axis_pairs, ConnectionFamily, OneFormFn, TwoFormFn};
use crate::exterior::Chart;
use crate::linalg;
use crate::{Error, Result, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Families selectable by name from configs and the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum BuiltinFamily {
    #[serde(rename = "maurer-cartan-u1")]
    MaurerCartanU1 {
        winding: i64,
        #[serde(default)]
        perturbation: f64,
    },
    #[serde(rename = "maurer-cartan-uN")]
    MaurerCartanUN { windings: Vec<i64> },
    #[serde(rename = "hypersurface-circle")]
    HypersurfaceCircle { degree: i64, radius: f64 },
    #[serde(rename = "torus-test-u2")]
    TorusTestU2,
}

impl BuiltinFamily {
    pub const NAMES: [&'static str; 4] = [
        "maurer-cartan-u1",
        "maurer-cartan-uN",
        "hypersurface-circle",
        "torus-test-u2",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::MaurerCartanU1 { .. } => Self::NAMES[0],
            Self::MaurerCartanUN { .. } => Self::NAMES[1],
            Self::HypersurfaceCircle { .. } => Self::NAMES[2],
            Self::TorusTestU2 => Self::NAMES[3],
        }
    }

    /// Build on a chart with `samples` nodes per axis.
    pub fn build(&self, samples: usize) -> Result<ConnectionFamily> {
        match self {
            Self::MaurerCartanU1 {
                winding,
                perturbation,
            } => Ok(maurer_cartan_u1(samples, *winding, *perturbation)),
            Self::MaurerCartanUN { windings } => {
                if windings.is_empty() {
                    return Err(Error::InvalidArgument("maurer-cartan-uN needs windings".into()));
                }
                Ok(maurer_cartan_un(samples, windings))
            }
            Self::HypersurfaceCircle { degree, radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::InvalidArgument(format!("radius {radius} must be positive")));
                }
                Ok(hypersurface_circle(samples, *degree, *radius))
            }
            Self::TorusTestU2 => Ok(torus_test_u2([samples; 3])),
        }
    }
}

/// Pullback of the U(1) Maurer-Cartan form `i d phi` along
/// `theta -> m theta + eps sin theta`, scaled by `s in [0, 1]`.
pub fn maurer_cartan_u1(samples: usize, winding: i64, perturbation: f64) -> ConnectionFamily {
    let chart = Arc::new(Chart::circle(samples));
    let m = winding as f64;
    let eps = perturbation;
    let rate = move |x: &[f64]| m + eps * x[0].cos();
    let omega: OneFormFn = Arc::new(move |s, x| vec![c(0.0, s * rate(x))]);
    let ds: OneFormFn = Arc::new(move |_, x| vec![c(0.0, rate(x))]);
    ConnectionFamily::new(format!("maurer-cartan-u1(m={winding})"), chart, 1, (0.0, 1.0), omega)
        .expect("skew-Hermitian by construction")
        .with_exact_curvature(Arc::new(|_, _| Vec::new()))
        .with_ds_omega(ds)
}

/// Unitary discrete Fourier matrix, used to mix the diagonal windings.
fn fourier_unitary(n: usize) -> Vec<C64> {
    let norm = 1.0 / (n as f64).sqrt();
    let mut u = vec![c(0.0, 0.0); n * n];
    for j in 0..n {
        for k in 0..n {
            u[j * n + k] = C64::from_polar(norm, TAU * (j * k) as f64 / n as f64);
        }
    }
    u
}

/// `U diag(i m_j) U^*` on the circle: the Maurer-Cartan form of
/// `theta -> U diag(e^{i m_j theta}) U^*`, scaled by `s in [0, 1]`.
pub fn maurer_cartan_un(samples: usize, windings: &[i64]) -> ConnectionFamily {
    let n = windings.len();
    let chart = Arc::new(Chart::circle(samples));
    let u = fourier_unitary(n);
    let mut diag = vec![c(0.0, 0.0); n * n];
    for (j, m) in windings.iter().enumerate() {
        diag[j * n + j] = c(0.0, *m as f64);
    }
    let mc = linalg::matmul(&linalg::matmul(&u, &diag, n), &linalg::adjoint(&u, n), n);
    // Clean rounding so the form is skew-Hermitian to machine precision.
    let adj = linalg::adjoint(&mc, n);
    let mc: Arc<Vec<C64>> = Arc::new(mc.iter().zip(&adj).map(|(a, b)| 0.5 * (a - b)).collect());
    let mc2 = mc.clone();
    let omega: OneFormFn = Arc::new(move |s, _| mc.iter().map(|z| z * s).collect());
    let ds: OneFormFn = Arc::new(move |_, _| mc2.as_ref().clone());
    ConnectionFamily::new(format!("maurer-cartan-uN(m={windings:?})"), chart, n, (0.0, 1.0), omega)
        .expect("skew-Hermitian by construction")
        .with_exact_curvature(Arc::new(|_, _| Vec::new()))
        .with_ds_omega(ds)
}

/// Generalized Killing connections `nabla^{+1/2} + (s - 1/2) gamma(W .)` on the
/// spinor line of a circle of radius `radius` in the plane (inward normal,
/// Weingarten map `1/r`), pulled back along a degree-`degree` map from the
/// unit circle. The frame is trivialized by `nabla^{+1/2}`-parallel spinors;
/// the family parameter runs over `[-1/2, 1/2]`.
pub fn hypersurface_circle(samples: usize, degree: i64, radius: f64) -> ConnectionFamily {
    let chart = Arc::new(Chart::circle(samples));
    // gamma(e_1) = -i on the unit tangent; d/dphi has length r and W = 1/r.
    let shape = -c(0.0, 1.0) * (radius * radius.recip());
    let d = degree as f64;
    let omega: OneFormFn = Arc::new(move |s, _| vec![shape * ((s - 0.5) * d)]);
    let ds: OneFormFn = Arc::new(move |_, _| vec![shape * d]);
    ConnectionFamily::new(
        format!("hypersurface-circle(d={degree}, r={radius})"),
        chart,
        1,
        (-0.5, 0.5),
        omega,
    )
    .expect("skew-Hermitian by construction")
    .with_exact_curvature(Arc::new(|_, _| Vec::new()))
    .with_ds_omega(ds)
}

/// `e^{i t P}` for a rank-one projector `P`.
fn exp_projector(p: &[C64; 4], t: f64) -> Vec<C64> {
    let phase = C64::from_polar(1.0, t) - 1.0;
    let mut m = linalg::identity(2);
    for (e, q) in m.iter_mut().zip(p) {
        *e += phase * q;
    }
    m
}

const PX: [C64; 4] = [c_const(0.5, 0.0), c_const(0.5, 0.0), c_const(0.5, 0.0), c_const(0.5, 0.0)];
const PY: [C64; 4] = [c_const(0.5, 0.0), c_const(0.0, -0.5), c_const(0.0, 0.5), c_const(0.5, 0.0)];
const PZ: [C64; 4] = [c_const(1.0, 0.0), c_const(0.0, 0.0), c_const(0.0, 0.0), c_const(0.0, 0.0)];

const fn c_const(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn times_i(p: &[C64; 4]) -> Vec<C64> {
    p.iter().map(|z| z * c(0.0, 1.0)).collect()
}

/// Maurer-Cartan form `g^{-1} dg` of `g = e^{x A} e^{y B} e^{z C}` on the
/// 3-torus, with `A, B, C = i` times the `+1` spectral projectors of the
/// Pauli matrices.
pub fn maurer_cartan_u2_torus_form(x: &[f64]) -> Vec<C64> {
    let (y, z) = (x[1], x[2]);
    let (a, b, cc) = (times_i(&PX), times_i(&PY), times_i(&PZ));
    let eb = exp_projector(&PY, y);
    let ec = exp_projector(&PZ, z);
    let m = linalg::matmul(&eb, &ec, 2);
    let wx = linalg::matmul(&linalg::matmul(&linalg::adjoint(&m, 2), &a, 2), &m, 2);
    let wy = linalg::matmul(&linalg::matmul(&linalg::adjoint(&ec, 2), &b, 2), &ec, 2);
    let mut out = wx;
    out.extend(wy);
    out.extend(cc);
    out
}

/// `(w ^ w)_{ij} = w_i w_j - w_j w_i` for the pairs `i < j`.
fn wedge_square(w: &[C64], dim: usize, n: usize) -> Vec<C64> {
    let n2 = n * n;
    let mut out = Vec::with_capacity(dim * (dim - 1) / 2 * n2);
    for (i, j) in axis_pairs(dim) {
        let wi = &w[i * n2..(i + 1) * n2];
        let wj = &w[j * n2..(j + 1) * n2];
        let ij = linalg::matmul(wi, wj, n);
        let ji = linalg::matmul(wj, wi, n);
        out.extend(ij.iter().zip(&ji).map(|(p, q)| p - q));
    }
    out
}

/// `d + s omega_MC` on the 3-torus, `s in [0, 1]`, with exact curvature
/// `s(s - 1) omega_MC ^ omega_MC`.
pub fn maurer_cartan_torus_u2(samples: [usize; 3]) -> ConnectionFamily {
    let chart = Arc::new(Chart::torus(&samples));
    let omega: OneFormFn = Arc::new(|s, x| {
        maurer_cartan_u2_torus_form(x).into_iter().map(|z| z * s).collect()
    });
    let curvature: TwoFormFn = Arc::new(|s, x| {
        wedge_square(&maurer_cartan_u2_torus_form(x), 3, 2)
            .into_iter()
            .map(|z| z * (s * (s - 1.0)))
            .collect()
    });
    let ds: OneFormFn = Arc::new(|_, x| maurer_cartan_u2_torus_form(x));
    ConnectionFamily::new("maurer-cartan-u2-torus", chart, 2, (0.0, 1.0), omega)
        .expect("skew-Hermitian by construction")
        .with_exact_curvature(curvature)
        .with_ds_omega(ds)
}

/// Scalar 1-form `sin(y + cos z) dx + cos(z + sin x) dy + sin(x + cos y) dz`.
fn abelian_part(x: &[f64]) -> [f64; 3] {
    let (px, py, pz) = (x[0], x[1], x[2]);
    [(py + pz.cos()).sin(), (pz + px.sin()).cos(), (px + py.cos()).sin()]
}

/// Its exterior derivative, coefficients of `dx^dy, dx^dz, dy^dz`.
fn abelian_part_d(x: &[f64]) -> [f64; 3] {
    let (px, py, pz) = (x[0], x[1], x[2]);
    [
        -(pz + px.sin()).sin() * px.cos() - (py + pz.cos()).cos(),
        (px + py.cos()).cos() + pz.sin() * (py + pz.cos()).cos(),
        -py.sin() * (px + py.cos()).cos() + (pz + px.sin()).sin(),
    ]
}

/// Non-flat U(2) family on the 3-torus,
/// `omega^s = s omega_MC + i (1 + s^2) b I` with `b` a fixed real 1-form,
/// `s in [0, 1]`. Curvature: `(s^2 - s) omega_MC ^ omega_MC + i (1 + s^2) db I`.
pub fn torus_test_u2(samples: [usize; 3]) -> ConnectionFamily {
    let chart = Arc::new(Chart::torus(&samples));
    let id = linalg::identity(2);
    let with_abelian = move |mc: Vec<C64>, coeff: f64, b: [f64; 3]| -> Vec<C64> {
        let mut out = mc;
        for k in 0..3 {
            for e in 0..4 {
                out[k * 4 + e] += id[e] * c(0.0, coeff * b[k]);
            }
        }
        out
    };
    let w1 = with_abelian.clone();
    let omega: OneFormFn = Arc::new(move |s, x| {
        let mc = maurer_cartan_u2_torus_form(x).into_iter().map(|z| z * s).collect();
        w1(mc, 1.0 + s * s, abelian_part(x))
    });
    let w2 = with_abelian.clone();
    let ds: OneFormFn = Arc::new(move |s, x| w2(maurer_cartan_u2_torus_form(x), 2.0 * s, abelian_part(x)));
    let w3 = with_abelian;
    let curvature: TwoFormFn = Arc::new(move |s, x| {
        let mc2 = wedge_square(&maurer_cartan_u2_torus_form(x), 3, 2)
            .into_iter()
            .map(|z| z * (s * s - s))
            .collect();
        w3(mc2, 1.0 + s * s, abelian_part_d(x))
    });
    ConnectionFamily::new("torus-test-u2", chart, 2, (0.0, 1.0), omega)
        .expect("skew-Hermitian by construction")
        .with_exact_curvature(curvature)
        .with_ds_omega(ds)
}
