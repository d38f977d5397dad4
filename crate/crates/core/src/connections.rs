//! One-parameter families of metric connections `s -> d + omega^s` on a
//! trivial `C^N` bundle over a chart, their curvature, pullbacks, and the lift
//! to the cylinder `chart x [a, b]`.

use std::fmt;
use std::sync::Arc;

use crate::exterior::{Chart, GradedMatrixForm, MultiIndex};
use crate::linalg;
use crate::param::Reparam;
use crate::{Error, Result, C64};

pub mod families;

/// `(s, coords) -> [omega(d/dx^0), ..., omega(d/dx^{dim-1})]`, each an `N x N`
/// row-major block.
pub type OneFormFn = Arc<dyn Fn(f64, &[f64]) -> Vec<C64> + Send + Sync>;

/// `(s, coords) -> [Omega_{ij} for i < j in lexicographic order]`, the
/// coefficients of `dx^i ^ dx^j`.
pub type TwoFormFn = Arc<dyn Fn(f64, &[f64]) -> Vec<C64> + Send + Sync>;

/// Coordinate map `coords -> coords`.
pub type MapFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

const SKEW_TOL: f64 = 1e-12;

/// All `(i, j)` with `i < j < dim`, in the order used by [`TwoFormFn`].
pub fn axis_pairs(dim: usize) -> Vec<(usize, usize)> {
    (0..dim)
        .flat_map(|i| (i + 1..dim).map(move |j| (i, j)))
        .collect()
}

#[derive(Clone)]
pub enum CurvatureMode {
    /// Curvature from an analytic callback.
    Exact(TwoFormFn),
    /// `d omega + omega ^ omega` with finite differences.
    Structural,
}

impl fmt::Debug for CurvatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvatureMode::Exact(_) => f.write_str("Exact"),
            CurvatureMode::Structural => f.write_str("Structural"),
        }
    }
}

#[derive(Clone)]
pub struct ConnectionFamily {
    name: String,
    chart: Arc<Chart>,
    rank: usize,
    interval: (f64, f64),
    omega: OneFormFn,
    curvature: CurvatureMode,
    ds_omega: Option<OneFormFn>,
}

impl fmt::Debug for ConnectionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConnectionFamily")
            .field("name", &self.name)
            .field("dim", &self.chart.dim())
            .field("nodes", &self.chart.nodes())
            .field("rank", &self.rank)
            .field("interval", &self.interval)
            .field("curvature", &self.curvature)
            .field("ds_callback", &self.ds_omega.is_some())
            .finish()
    }
}

impl ConnectionFamily {
    /// A family with structural curvature and finite-difference `d/ds`.
    /// The connection forms are checked to be skew-Hermitian at both ends and
    /// the midpoint of the interval.
    pub fn new(
        name: impl Into<String>,
        chart: Arc<Chart>,
        rank: usize,
        interval: (f64, f64),
        omega: OneFormFn,
    ) -> Result<Self> {
        let (a, b) = interval;
        if !(a < b) {
            return Err(Error::InvalidArgument(format!("family interval [{a}, {b}] is empty")));
        }
        let fam = Self {
            name: name.into(),
            chart,
            rank,
            interval,
            omega,
            curvature: CurvatureMode::Structural,
            ds_omega: None,
        };
        for s in [a, 0.5 * (a + b), b] {
            let dev = fam.max_skew_deviation(s);
            if dev > SKEW_TOL {
                return Err(Error::NotSkewHermitian(dev));
            }
        }
        Ok(fam)
    }

    pub fn with_exact_curvature(mut self, f: TwoFormFn) -> Self {
        self.curvature = CurvatureMode::Exact(f);
        self
    }

    pub fn with_structural_curvature(mut self) -> Self {
        self.curvature = CurvatureMode::Structural;
        self
    }

    pub fn with_ds_omega(mut self, f: OneFormFn) -> Self {
        self.ds_omega = Some(f);
        self
    }

    /// The same family on a copy of the chart with the given orientation.
    pub fn with_orientation(mut self, orientation: f64) -> Self {
        self.chart = Arc::new(self.chart.as_ref().clone().with_orientation(orientation));
        self
    }

    /// Drop the `d/ds` callback so that finite differences in `s` are used.
    pub fn without_ds_omega(mut self) -> Self {
        self.ds_omega = None;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn curvature_mode(&self) -> &CurvatureMode {
        &self.curvature
    }

    pub fn has_ds_callback(&self) -> bool {
        self.ds_omega.is_some()
    }

    fn max_skew_deviation(&self, s: f64) -> f64 {
        let n = self.rank;
        (0..self.chart.nodes())
            .map(|node| {
                let w = (self.omega)(s, &self.chart.coords(node));
                w.chunks(n * n)
                    .map(|m| linalg::skew_hermitian_deviation(m, n))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    pub fn check_param(&self, s: f64) -> Result<()> {
        let (a, b) = self.interval;
        let slack = 1e-12 * (b - a);
        if s.is_nan() || s < a - slack || s > b + slack {
            return Err(Error::ParameterOutOfRange { s, a, b });
        }
        Ok(())
    }

    /// Raw `omega^s` blocks at arbitrary coordinates.
    pub fn omega_values(&self, s: f64, coords: &[f64]) -> Vec<C64> {
        (self.omega)(s, coords)
    }

    pub fn omega(&self, s: f64) -> Result<GradedMatrixForm> {
        self.check_param(s)?;
        let f = self.omega.clone();
        Ok(GradedMatrixForm::one_form_from_fn(self.chart.clone(), self.rank, move |x| f(s, x)))
    }

    /// `d omega^s + omega^s ^ omega^s`, always via finite differences.
    pub fn structural_curvature(&self, s: f64) -> Result<GradedMatrixForm> {
        let w = self.omega(s)?;
        w.d()?.add(&w.wedge(&w)?)
    }

    pub fn curvature(&self, s: f64) -> Result<GradedMatrixForm> {
        self.check_param(s)?;
        match &self.curvature {
            CurvatureMode::Structural => self.structural_curvature(s),
            CurvatureMode::Exact(f) => {
                let indices: Vec<MultiIndex> = axis_pairs(self.chart.dim())
                    .into_iter()
                    .map(|(i, j)| MultiIndex::pair(i, j))
                    .collect();
                let f = f.clone();
                Ok(GradedMatrixForm::from_components_fn(
                    self.chart.clone(),
                    self.rank,
                    &indices,
                    move |x| f(s, x),
                ))
            }
        }
    }

    /// Step of the finite difference in `s` used without a callback.
    pub fn ds_step(&self) -> f64 {
        (self.interval.1 - self.interval.0) / 1024.0
    }

    /// `d omega^s / ds` at arbitrary coordinates: the callback if present,
    /// otherwise a five-point difference (one-sided near the interval ends).
    pub fn ds_omega_values(&self, s: f64, coords: &[f64]) -> Vec<C64> {
        if let Some(f) = &self.ds_omega {
            return f(s, coords);
        }
        let (a, b) = self.interval;
        let h = self.ds_step();
        let (weights, offsets): ([f64; 5], [f64; 5]) = if s - 2.0 * h >= a && s + 2.0 * h <= b {
            ([1.0, -8.0, 0.0, 8.0, -1.0], [-2.0, -1.0, 0.0, 1.0, 2.0])
        } else if s - 2.0 * h < a {
            ([-25.0, 48.0, -36.0, 16.0, -3.0], [0.0, 1.0, 2.0, 3.0, 4.0])
        } else {
            ([3.0, -16.0, 36.0, -48.0, 25.0], [-4.0, -3.0, -2.0, -1.0, 0.0])
        };
        let mut out: Vec<C64> = Vec::new();
        for (w, o) in weights.iter().zip(offsets) {
            if *w == 0.0 {
                continue;
            }
            let v = (self.omega)(s + o * h, coords);
            if out.is_empty() {
                out = vec![C64::new(0.0, 0.0); v.len()];
            }
            for (acc, x) in out.iter_mut().zip(v) {
                *acc += x * (w / (12.0 * h));
            }
        }
        out
    }

    pub fn ds_omega(&self, s: f64) -> Result<GradedMatrixForm> {
        self.check_param(s)?;
        let fam = self.clone();
        Ok(GradedMatrixForm::one_form_from_fn(self.chart.clone(), self.rank, move |x| {
            fam.ds_omega_values(s, x)
        }))
    }

    /// `f^* omega^s` on the source chart of `map`.
    pub fn pullback(&self, map: &ChartMap) -> Result<Self> {
        if *map.target != *self.chart {
            return Err(Error::ChartMismatch(
                "pullback map target differs from the family chart".into(),
            ));
        }
        let n2 = self.rank * self.rank;
        let src_dim = map.source.dim();
        let tgt_dim = map.target.dim();
        let pull_one = {
            let map = map.clone();
            move |vals: Vec<C64>, x: &[f64]| -> Vec<C64> {
                let df = (map.differential)(x);
                let mut out = vec![C64::new(0.0, 0.0); src_dim * n2];
                for k in 0..src_dim {
                    for j in 0..tgt_dim {
                        let c = df[j * src_dim + k];
                        if c == 0.0 {
                            continue;
                        }
                        for e in 0..n2 {
                            out[k * n2 + e] += vals[j * n2 + e] * c;
                        }
                    }
                }
                out
            }
        };
        let pull_one = Arc::new(pull_one);
        let omega: OneFormFn = {
            let base = self.omega.clone();
            let map = map.clone();
            let pull = pull_one.clone();
            Arc::new(move |s, x| pull(base(s, &(map.map)(x)), x))
        };
        let curvature = match &self.curvature {
            CurvatureMode::Structural => CurvatureMode::Structural,
            CurvatureMode::Exact(f) => {
                let f = f.clone();
                let map = map.clone();
                let tgt_pairs = axis_pairs(tgt_dim);
                let src_pairs = axis_pairs(src_dim);
                CurvatureMode::Exact(Arc::new(move |s, x| {
                    let vals = f(s, &(map.map)(x));
                    let df = (map.differential)(x);
                    let mut out = vec![C64::new(0.0, 0.0); src_pairs.len() * n2];
                    for (q, &(k, l)) in src_pairs.iter().enumerate() {
                        for (p, &(i, j)) in tgt_pairs.iter().enumerate() {
                            let minor = df[i * src_dim + k] * df[j * src_dim + l]
                                - df[i * src_dim + l] * df[j * src_dim + k];
                            if minor == 0.0 {
                                continue;
                            }
                            for e in 0..n2 {
                                out[q * n2 + e] += vals[p * n2 + e] * minor;
                            }
                        }
                    }
                    out
                }))
            }
        };
        let ds_omega = self.ds_omega.as_ref().map(|f| {
            let f = f.clone();
            let map = map.clone();
            let pull = pull_one.clone();
            Arc::new(move |s: f64, x: &[f64]| pull(f(s, &(map.map)(x)), x)) as OneFormFn
        });
        Ok(Self {
            name: format!("{}(pullback)", self.name),
            chart: map.source.clone(),
            rank: self.rank,
            interval: self.interval,
            omega,
            curvature,
            ds_omega,
        })
    }

    /// The family `t -> omega^{phi(t)}` over the domain of `phi`.
    pub fn reparametrized(&self, phi: &Reparam) -> Result<Self> {
        self.check_target(phi)?;
        let omega: OneFormFn = {
            let f = self.omega.clone();
            let phi = phi.clone();
            Arc::new(move |t, x| f(phi.eval(t), x))
        };
        let curvature = match &self.curvature {
            CurvatureMode::Structural => CurvatureMode::Structural,
            CurvatureMode::Exact(f) => {
                let f = f.clone();
                let phi = phi.clone();
                CurvatureMode::Exact(Arc::new(move |t, x| f(phi.eval(t), x)))
            }
        };
        let ds_omega: Option<OneFormFn> = {
            let fam = self.clone();
            let phi = phi.clone();
            Some(Arc::new(move |t, x| {
                let scale = phi.deriv(t);
                let mut v = fam.ds_omega_values(phi.eval(t), x);
                v.iter_mut().for_each(|z| *z *= scale);
                v
            }))
        };
        Ok(Self {
            name: format!("{}(reparametrized)", self.name),
            chart: self.chart.clone(),
            rank: self.rank,
            interval: phi.domain(),
            omega,
            curvature,
            ds_omega,
        })
    }

    /// The same family on a sub-interval.
    pub fn restricted(&self, a: f64, b: f64) -> Result<Self> {
        self.check_param(a)?;
        self.check_param(b)?;
        if !(a < b) {
            return Err(Error::InvalidArgument(format!("empty sub-interval [{a}, {b}]")));
        }
        let mut out = self.clone();
        out.interval = (a, b);
        Ok(out)
    }

    fn check_target(&self, phi: &Reparam) -> Result<()> {
        let (ta, tb) = phi.target();
        let (a, b) = self.interval;
        let tol = 1e-12 * (b - a);
        if (ta - a).abs() > tol || (tb - b).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "reparametrization targets [{ta}, {tb}] but the family lives on [{a}, {b}]"
            )));
        }
        Ok(())
    }

    /// Lift to the cylinder `chart x [a, b]` with `t_samples` nodes in `t`,
    /// using the parameters `phi(t)`.
    pub fn lift(&self, phi: Reparam, t_samples: usize) -> Result<LiftedConnection> {
        self.check_target(&phi)?;
        let (pa, pb) = phi.domain();
        let (a, b) = self.interval;
        if (pa - a).abs() > 1e-12 * (b - a) || (pb - b).abs() > 1e-12 * (b - a) {
            return Err(Error::InvalidArgument(
                "lift smoothing must map [a, b] onto itself".into(),
            ));
        }
        let chart = Arc::new(self.chart.cylinder(t_samples, a, b)?);
        Ok(LiftedConnection {
            base: self.clone(),
            phi,
            chart,
        })
    }
}

/// A smooth map between charts with its differential.
#[derive(Clone)]
pub struct ChartMap {
    source: Arc<Chart>,
    target: Arc<Chart>,
    map: MapFn,
    /// `dim_target x dim_source` row-major Jacobian.
    differential: MapFn,
}

impl fmt::Debug for ChartMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartMap")
            .field("source_dim", &self.source.dim())
            .field("target_dim", &self.target.dim())
            .finish()
    }
}

impl ChartMap {
    pub fn new(source: Arc<Chart>, target: Arc<Chart>, map: MapFn, differential: MapFn) -> Self {
        Self {
            source,
            target,
            map,
            differential,
        }
    }

    pub fn identity(chart: Arc<Chart>) -> Self {
        let dim = chart.dim();
        Self::linear(chart.clone(), chart, &linalg_identity_real(dim))
    }

    /// `x -> A x` with `A` given row-major, `dim_target x dim_source`.
    pub fn linear(source: Arc<Chart>, target: Arc<Chart>, matrix: &[f64]) -> Self {
        let (ds, dt) = (source.dim(), target.dim());
        assert_eq!(matrix.len(), ds * dt);
        let a: Arc<Vec<f64>> = Arc::new(matrix.to_vec());
        let a2 = a.clone();
        Self::new(
            source,
            target,
            Arc::new(move |x| {
                (0..dt)
                    .map(|j| (0..ds).map(|k| a[j * ds + k] * x[k]).sum())
                    .collect()
            }),
            Arc::new(move |_| a2.as_ref().clone()),
        )
    }

    pub fn source(&self) -> &Arc<Chart> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Chart> {
        &self.target
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.map)(x)
    }

    pub fn differential_at(&self, x: &[f64]) -> Vec<f64> {
        (self.differential)(x)
    }

    /// Largest deviation between the supplied differential and a central
    /// difference of the map with the source grid spacings, an `O(h^2)`
    /// quantity for consistent data.
    pub fn consistency_error(&self) -> f64 {
        let (ds, dt) = (self.source.dim(), self.target.dim());
        let mut worst: f64 = 0.0;
        for node in 0..self.source.nodes() {
            let x = self.source.coords(node);
            let df = (self.differential)(&x);
            for k in 0..ds {
                let h = self.source.axis(k).spacing;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                let (fp, fm) = ((self.map)(&xp), (self.map)(&xm));
                for j in 0..dt {
                    let mut diff = fp[j] - fm[j];
                    let ax = self.target.axis(j);
                    if ax.periodic {
                        let len = ax.length();
                        diff -= len * (diff / len).round();
                    }
                    worst = worst.max((diff / (2.0 * h) - df[j * ds + k]).abs());
                }
            }
        }
        worst
    }

    pub fn check_consistency(&self, tol: f64) -> Result<f64> {
        let err = self.consistency_error();
        if err > tol {
            return Err(Error::InvalidArgument(format!(
                "chart map differential inconsistent with its values (deviation {err:e})"
            )));
        }
        Ok(err)
    }

    /// Pull back a sampled form. Each source node must map onto a target
    /// grid node.
    pub fn pull_form(&self, form: &GradedMatrixForm) -> Result<GradedMatrixForm> {
        if **form.chart() != *self.target {
            return Err(Error::ChartMismatch("form does not live on the map target".into()));
        }
        let ds = self.source.dim();
        let n2 = form.rank() * form.rank();
        let nodes = self.source.nodes();
        let mut landing = Vec::with_capacity(nodes);
        for node in 0..nodes {
            let x = self.source.coords(node);
            let y = (self.map)(&x);
            let tol = 1e-9 * self.target.axes().iter().map(|a| a.spacing).fold(f64::MAX, f64::min);
            let t = self.target.locate(&y, tol).ok_or_else(|| {
                Error::InvalidArgument(format!("map sends node {x:?} to {y:?}, not a target node"))
            })?;
            landing.push((t, (self.differential)(&x)));
        }
        let mut out = GradedMatrixForm::zero(self.source.clone(), form.rank());
        for (idx, data) in form.components() {
            let rows: Vec<usize> = idx.axes().collect();
            for cols in subsets(ds, rows.len()) {
                let src_idx = MultiIndex::new(&cols, ds)?;
                let mut comp = vec![C64::new(0.0, 0.0); nodes * n2];
                let mut any = false;
                for (node, (t, df)) in landing.iter().enumerate() {
                    let det = minor_det(df, ds, &rows, &cols);
                    if det == 0.0 {
                        continue;
                    }
                    any = true;
                    for e in 0..n2 {
                        comp[node * n2 + e] = data[t * n2 + e] * det;
                    }
                }
                if any {
                    let prev = out.component(src_idx).map(|c| c.to_vec());
                    if let Some(prev) = prev {
                        for (c, p) in comp.iter_mut().zip(prev) {
                            *c += p;
                        }
                    }
                    out.set_component(src_idx, comp);
                }
            }
        }
        Ok(out)
    }
}

fn linalg_identity_real(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// Increasing `k`-subsets of `0..n`.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Determinant of the `rows x cols` submatrix of a row-major matrix with
/// `stride` columns, by Laplace expansion.
fn minor_det(m: &[f64], stride: usize, rows: &[usize], cols: &[usize]) -> f64 {
    match rows.len() {
        0 => 1.0,
        1 => m[rows[0] * stride + cols[0]],
        _ => {
            let mut det = 0.0;
            for (c, &col) in cols.iter().enumerate() {
                let entry = m[rows[0] * stride + col];
                if entry == 0.0 {
                    continue;
                }
                let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != col).collect();
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                det += sign * entry * minor_det(m, stride, &rows[1..], &rest);
            }
            det
        }
    }
}

/// A family lifted to a single connection on `chart x [a, b]` with
/// `omega_bar(v + alpha d/dt) = omega^{phi(t)}(v)`.
#[derive(Clone, Debug)]
pub struct LiftedConnection {
    base: ConnectionFamily,
    phi: Reparam,
    chart: Arc<Chart>,
}

impl LiftedConnection {
    pub fn base(&self) -> &ConnectionFamily {
        &self.base
    }

    pub fn phi(&self) -> &Reparam {
        &self.phi
    }

    /// The cylinder chart; `t` is the last axis.
    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn t_axis(&self) -> usize {
        self.chart.dim() - 1
    }

    pub fn t_values(&self) -> Vec<f64> {
        let ax = self.chart.axis(self.t_axis());
        (0..ax.samples).map(|j| ax.coord(j)).collect()
    }

    /// Family parameters `phi(t_j)` at the `t` nodes.
    pub fn parameters(&self) -> Vec<f64> {
        self.t_values().into_iter().map(|t| self.phi.eval(t)).collect()
    }

    /// Assemble `pi^*` of per-slice base forms (one per `t` node).
    pub fn pi_star(&self, slices: &[GradedMatrixForm]) -> Result<GradedMatrixForm> {
        pi_star(&self.chart, slices)
    }

    pub fn omega_bar(&self) -> Result<GradedMatrixForm> {
        let slices = self
            .parameters()
            .into_iter()
            .map(|s| self.base.omega(s))
            .collect::<Result<Vec<_>>>()?;
        self.pi_star(&slices)
    }

    /// `pi^* d omega^{phi(t)} / dt = phi'(t) pi^* d omega / ds`, without `dt`.
    pub fn dt_omega(&self) -> Result<GradedMatrixForm> {
        let slices = self
            .t_values()
            .into_iter()
            .map(|t| {
                Ok(self
                    .base
                    .ds_omega(self.phi.eval(t))?
                    .scale(C64::new(self.phi.deriv(t), 0.0)))
            })
            .collect::<Result<Vec<_>>>()?;
        self.pi_star(&slices)
    }

    /// `pi^* Omega^{phi(t)}`.
    pub fn pulled_curvature(&self) -> Result<GradedMatrixForm> {
        let slices = self
            .parameters()
            .into_iter()
            .map(|s| self.base.curvature(s))
            .collect::<Result<Vec<_>>>()?;
        self.pi_star(&slices)
    }

    /// The grade-1 form `dt` times the identity on the cylinder.
    pub fn dt(&self) -> GradedMatrixForm {
        GradedMatrixForm::constant(
            self.chart.clone(),
            self.base.rank(),
            MultiIndex::single(self.t_axis()),
            &linalg::identity(self.base.rank()),
        )
    }

    /// `d omega_bar + omega_bar ^ omega_bar` on the cylinder grid.
    pub fn curvature_structural(&self) -> Result<GradedMatrixForm> {
        let w = self.omega_bar()?;
        w.d()?.add(&w.wedge(&w)?)
    }

    /// `pi^* Omega^{phi(t)} + dt ^ pi^* d omega^{phi(t)} / dt`.
    pub fn curvature_decomposed(&self) -> Result<GradedMatrixForm> {
        self.pulled_curvature()?.add(&self.dt().wedge(&self.dt_omega()?)?)
    }
}

/// `pi^*` from the base of a cylinder chart: slice `j` is placed at the
/// `j`-th node of the last axis.
pub fn pi_star(cylinder: &Arc<Chart>, slices: &[GradedMatrixForm]) -> Result<GradedMatrixForm> {
    let t_samples = cylinder.axis(cylinder.dim() - 1).samples;
    if slices.len() != t_samples {
        return Err(Error::InvalidArgument(format!(
            "{} slices for {t_samples} t-samples",
            slices.len()
        )));
    }
    let rank = slices[0].rank();
    let n2 = rank * rank;
    let base_nodes = slices[0].chart().nodes();
    if base_nodes * t_samples != cylinder.nodes() {
        return Err(Error::ChartMismatch("slices do not match the cylinder base".into()));
    }
    let indices: std::collections::BTreeSet<MultiIndex> = slices
        .iter()
        .flat_map(|f| f.components().map(|(k, _)| k).collect::<Vec<_>>())
        .collect();
    let mut out = GradedMatrixForm::zero(cylinder.clone(), rank);
    for idx in indices {
        let mut data = vec![C64::new(0.0, 0.0); cylinder.nodes() * n2];
        for (j, slice) in slices.iter().enumerate() {
            if let Some(c) = slice.component(idx) {
                for node in 0..base_nodes {
                    let dst = (node * t_samples + j) * n2;
                    data[dst..dst + n2].copy_from_slice(&c[node * n2..(node + 1) * n2]);
                }
            }
        }
        out.set_component(idx, data);
    }
    Ok(out)
}
