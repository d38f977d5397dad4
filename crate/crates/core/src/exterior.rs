//! Graded exterior algebra of complex-matrix-valued differential forms sampled
//! on a rectangular chart grid.
//!
//! A form is stored as one dense array per multi-index `dx^I`; each array holds
//! an `N x N` row-major matrix per grid node. Components are coordinate
//! components: `sum_I a_I dx^{i_1} ^ ... ^ dx^{i_p}` with `i_1 < ... < i_p`.
//! Absent multi-indices are zero.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::linalg;
use crate::{Error, Result, C64};

pub const MAX_DIM: usize = 8;

/// One coordinate axis of a chart grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub samples: usize,
    pub origin: f64,
    pub spacing: f64,
    /// Periodic axes carry `samples` nodes on a circle of length
    /// `samples * spacing`; closed axes include both endpoints.
    pub periodic: bool,
}

impl Axis {
    /// `samples` nodes on `[0, length)` with wrap-around.
    pub fn periodic(samples: usize, length: f64) -> Self {
        Self {
            samples,
            origin: 0.0,
            spacing: length / samples as f64,
            periodic: true,
        }
    }

    /// `samples` nodes on the closed interval `[lo, hi]`, endpoints included.
    pub fn closed(samples: usize, lo: f64, hi: f64) -> Self {
        Self {
            samples,
            origin: lo,
            spacing: (hi - lo) / (samples.max(2) - 1) as f64,
            periodic: false,
        }
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.origin + self.spacing * i as f64
    }

    pub fn length(&self) -> f64 {
        if self.periodic {
            self.spacing * self.samples as f64
        } else {
            self.spacing * (self.samples - 1) as f64
        }
    }

    fn min_samples_for_derivative(&self) -> usize {
        if self.periodic {
            4
        } else {
            5
        }
    }

    /// Quadrature weight of node `i`: rectangle rule on periodic axes
    /// (trapezoid with wrap-around), composite Simpson on closed axes.
    fn quadrature_weight(&self, i: usize) -> f64 {
        if self.periodic {
            return self.spacing;
        }
        let last = self.samples - 1;
        let w = if i == 0 || i == last {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        w * self.spacing / 3.0
    }
}

/// Rectangular coordinate grid on which forms are sampled.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    axes: Vec<Axis>,
    strides: Vec<usize>,
    orientation: f64,
    /// Riemannian density relative to the coordinate measure, per node.
    volume_weight: Option<Vec<f64>>,
}

impl Chart {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > MAX_DIM {
            return Err(Error::InvalidChart(format!(
                "dimension must lie in 1..={MAX_DIM}, got {}",
                axes.len()
            )));
        }
        for (k, ax) in axes.iter().enumerate() {
            if ax.samples == 0 || !(ax.spacing > 0.0) || !ax.spacing.is_finite() {
                return Err(Error::InvalidChart(format!(
                    "axis {k}: need samples >= 1 and finite spacing > 0, got {} / {}",
                    ax.samples, ax.spacing
                )));
            }
        }
        let mut strides = vec![1; axes.len()];
        for k in (0..axes.len() - 1).rev() {
            strides[k] = strides[k + 1] * axes[k + 1].samples;
        }
        Ok(Self {
            axes,
            strides,
            orientation: 1.0,
            volume_weight: None,
        })
    }

    /// The unit circle `[0, 2 pi)` with `samples` nodes.
    pub fn circle(samples: usize) -> Self {
        Self::new(vec![Axis::periodic(samples, std::f64::consts::TAU)]).expect("valid circle")
    }

    /// The flat torus `(R / 2 pi Z)^n` with the given samples per axis.
    pub fn torus(samples: &[usize]) -> Self {
        Self::new(
            samples
                .iter()
                .map(|&n| Axis::periodic(n, std::f64::consts::TAU))
                .collect(),
        )
        .expect("valid torus")
    }

    pub fn with_orientation(mut self, orientation: f64) -> Self {
        assert!(orientation == 1.0 || orientation == -1.0);
        self.orientation = orientation;
        self
    }

    pub fn with_volume_weight(mut self, weight: Vec<f64>) -> Result<Self> {
        if weight.len() != self.nodes() {
            return Err(Error::InvalidChart(format!(
                "volume weight has {} entries for {} nodes",
                weight.len(),
                self.nodes()
            )));
        }
        self.volume_weight = Some(weight);
        Ok(self)
    }

    /// `self x [lo, hi]` with the interval as the last (fastest) axis.
    pub fn cylinder(&self, samples: usize, lo: f64, hi: f64) -> Result<Self> {
        let mut axes = self.axes.clone();
        axes.push(Axis::closed(samples, lo, hi));
        let mut chart = Chart::new(axes)?;
        chart.orientation = self.orientation;
        if let Some(w) = &self.volume_weight {
            chart.volume_weight = Some(w.iter().flat_map(|&x| std::iter::repeat_n(x, samples)).collect());
        }
        Ok(chart)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn nodes(&self) -> usize {
        self.strides[0] * self.axes[0].samples
    }

    pub fn stride(&self, k: usize) -> usize {
        self.strides[k]
    }

    pub fn index_along(&self, node: usize, axis: usize) -> usize {
        (node / self.strides[axis]) % self.axes[axis].samples
    }

    pub fn node_from_indices(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        (0..self.dim())
            .map(|k| self.axes[k].coord(self.index_along(node, k)))
            .collect()
    }

    pub fn volume_weight(&self, node: usize) -> f64 {
        self.volume_weight.as_ref().map_or(1.0, |w| w[node])
    }

    /// Riemannian volume: sum of weights times cell volumes.
    pub fn volume(&self) -> f64 {
        (0..self.nodes())
            .map(|node| {
                let cell: f64 = (0..self.dim())
                    .map(|k| self.axes[k].quadrature_weight(self.index_along(node, k)))
                    .product();
                cell * self.volume_weight(node)
            })
            .sum()
    }

    /// Node whose coordinates match `coords` (modulo periods), if any.
    pub fn locate(&self, coords: &[f64], tol: f64) -> Option<usize> {
        let mut idx = Vec::with_capacity(self.dim());
        for (ax, &x) in self.axes.iter().zip(coords) {
            let mut u = (x - ax.origin) / ax.spacing;
            if ax.periodic {
                u = u.rem_euclid(ax.samples as f64);
            }
            let mut i = u.round();
            if ax.periodic && i as usize == ax.samples {
                i = 0.0;
            }
            if (u - u.round()).abs() * ax.spacing > tol || i < 0.0 || i as usize >= ax.samples {
                return None;
            }
            idx.push(i as usize);
        }
        Some(self.node_from_indices(&idx))
    }

    pub(crate) fn same_as(self: &Arc<Self>, other: &Arc<Self>) -> bool {
        Arc::ptr_eq(self, other) || **self == **other
    }
}

/// Strictly increasing set of axis labels, stored as a bit mask.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(u8);

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dx{:?}", self.axes().collect::<Vec<_>>())
    }
}

impl MultiIndex {
    pub const EMPTY: MultiIndex = MultiIndex(0);

    /// Build from a strictly increasing list of 0-based axes below `dim`.
    pub fn new(axes: &[usize], dim: usize) -> Result<Self> {
        let mut bits = 0u8;
        for (pos, &k) in axes.iter().enumerate() {
            if k >= dim || k >= MAX_DIM || (pos > 0 && axes[pos - 1] >= k) {
                return Err(Error::InvalidMultiIndex(axes.to_vec()));
            }
            bits |= 1 << k;
        }
        Ok(MultiIndex(bits))
    }

    pub fn single(axis: usize) -> Self {
        assert!(axis < MAX_DIM);
        MultiIndex(1 << axis)
    }

    pub fn pair(i: usize, j: usize) -> Self {
        assert!(i < j && j < MAX_DIM);
        MultiIndex((1 << i) | (1 << j))
    }

    /// The top-degree index `dx^0 ^ ... ^ dx^{dim-1}`.
    pub fn full(dim: usize) -> Self {
        assert!(dim <= MAX_DIM);
        MultiIndex(((1u16 << dim) - 1) as u8)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, axis: usize) -> bool {
        self.0 & (1 << axis) != 0
    }

    pub fn axes(self) -> impl Iterator<Item = usize> {
        (0..MAX_DIM).filter(move |&k| self.0 & (1 << k) != 0)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    /// Sign and index of `dx^I ^ dx^J`, or `None` when they share an axis.
    pub fn wedge(self, other: MultiIndex) -> Option<(f64, MultiIndex)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        // Inversions: pairs (i in I, j in J) with i > j.
        let inversions: u32 = other
            .axes()
            .map(|j| (self.0 as u16 >> (j + 1)).count_ones())
            .sum();
        let sign = if inversions.is_multiple_of(2) { 1.0 } else { -1.0 };
        Some((sign, MultiIndex(self.0 | other.0)))
    }

    /// Sign of moving `dx^k` past the axes of `self` smaller than `k`.
    fn derivative_sign(self, k: usize) -> f64 {
        let below = (self.0 as u16 & ((1u16 << k) - 1)).count_ones();
        if below.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

/// A formal power series truncated to finitely many coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct CharPowerSeries {
    coeffs: Vec<f64>,
}

impl CharPowerSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// `exp(x)` through degree `degree`.
    pub fn exp(degree: usize) -> Self {
        let mut coeffs = Vec::with_capacity(degree + 1);
        let mut fact = 1.0;
        for k in 0..=degree {
            if k > 0 {
                fact *= k as f64;
            }
            coeffs.push(1.0 / fact);
        }
        Self { coeffs }
    }

    /// `exp` with enough terms for both `q` and `q'` on a chart of dimension
    /// `dim`.
    pub fn exp_for_dim(dim: usize) -> Self {
        Self::exp(dim / 2 + 1)
    }

    pub fn monomial(power: usize) -> Self {
        let mut coeffs = vec![0.0; power + 1];
        coeffs[power] = 1.0;
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| k as f64 * c)
            .collect::<Vec<_>>();
        Self {
            coeffs: if coeffs.is_empty() { vec![0.0] } else { coeffs },
        }
    }

    pub fn truncated(&self, degree: usize) -> Self {
        Self {
            coeffs: self.coeffs.iter().take(degree + 1).copied().collect(),
        }
    }
}

/// A matrix-valued differential form sampled on a chart.
#[derive(Clone, Debug)]
pub struct GradedMatrixForm {
    chart: Arc<Chart>,
    rank: usize,
    comps: BTreeMap<MultiIndex, Vec<C64>>,
}

/// Forms with `rank == 1`.
pub type ScalarForm = GradedMatrixForm;

/// Result of integrating a top-degree scalar form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TopIntegral {
    pub value: C64,
    /// Set when the form had no top-degree component (value is then 0).
    pub missing_top: bool,
}

impl GradedMatrixForm {
    pub fn zero(chart: Arc<Chart>, rank: usize) -> Self {
        assert!(rank >= 1);
        Self {
            chart,
            rank,
            comps: BTreeMap::new(),
        }
    }

    /// Grade-0 form equal to the identity matrix at every node.
    pub fn identity(chart: Arc<Chart>, rank: usize) -> Self {
        Self::constant(chart, rank, MultiIndex::EMPTY, &linalg::identity(rank))
    }

    /// Same matrix at every node in the given component.
    pub fn constant(chart: Arc<Chart>, rank: usize, index: MultiIndex, matrix: &[C64]) -> Self {
        assert_eq!(matrix.len(), rank * rank);
        let data = matrix
            .iter()
            .copied()
            .cycle()
            .take(chart.nodes() * rank * rank)
            .collect();
        let mut form = Self::zero(chart, rank);
        form.comps.insert(index, data);
        form
    }

    /// Sample one component from a function of node coordinates.
    pub fn from_fn(
        chart: Arc<Chart>,
        rank: usize,
        index: MultiIndex,
        f: impl Fn(&[f64]) -> Vec<C64> + Sync,
    ) -> Self {
        let block = rank * rank;
        let mut data = vec![C64::new(0.0, 0.0); chart.nodes() * block];
        data.par_chunks_mut(block).enumerate().for_each(|(node, out)| {
            let m = f(&chart.coords(node));
            out.copy_from_slice(&m[..block]);
        });
        let mut form = Self::zero(chart, rank);
        form.comps.insert(index, data);
        form
    }

    /// A 1-form from a function returning `dim` matrices `a(d/dx^k)`
    /// concatenated.
    pub fn one_form_from_fn(
        chart: Arc<Chart>,
        rank: usize,
        f: impl Fn(&[f64]) -> Vec<C64> + Sync,
    ) -> Self {
        let indices: Vec<MultiIndex> = (0..chart.dim()).map(MultiIndex::single).collect();
        Self::from_components_fn(chart, rank, &indices, f)
    }

    /// Several components at once from a function returning one matrix per
    /// entry of `indices`, concatenated in that order.
    pub fn from_components_fn(
        chart: Arc<Chart>,
        rank: usize,
        indices: &[MultiIndex],
        f: impl Fn(&[f64]) -> Vec<C64> + Sync,
    ) -> Self {
        let count = indices.len();
        let block = rank * rank;
        let nodes = chart.nodes();
        let mut all = vec![C64::new(0.0, 0.0); nodes * count * block];
        if count > 0 {
            all.par_chunks_mut(count * block).enumerate().for_each(|(node, out)| {
                let m = f(&chart.coords(node));
                out.copy_from_slice(&m[..count * block]);
            });
        }
        let mut form = Self::zero(chart, rank);
        for (k, idx) in indices.iter().enumerate() {
            let mut data = vec![C64::new(0.0, 0.0); nodes * block];
            for node in 0..nodes {
                data[node * block..(node + 1) * block]
                    .copy_from_slice(&all[(node * count + k) * block..(node * count + k + 1) * block]);
            }
            let entry = form
                .comps
                .entry(*idx)
                .or_insert_with(|| vec![C64::new(0.0, 0.0); nodes * block]);
            for (e, v) in entry.iter_mut().zip(data) {
                *e += v;
            }
        }
        form
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    fn block(&self) -> usize {
        self.rank * self.rank
    }

    pub fn component(&self, index: MultiIndex) -> Option<&[C64]> {
        self.comps.get(&index).map(|v| v.as_slice())
    }

    pub fn components(&self) -> impl Iterator<Item = (MultiIndex, &[C64])> {
        self.comps.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    /// The matrix of component `index` at `node`, or `None` if absent.
    pub fn matrix_at(&self, index: MultiIndex, node: usize) -> Option<&[C64]> {
        let b = self.block();
        self.component(index).map(|c| &c[node * b..(node + 1) * b])
    }

    /// Scalar value of a rank-1 component at a node (0 if absent).
    pub fn scalar_at(&self, index: MultiIndex, node: usize) -> C64 {
        self.matrix_at(index, node)
            .map_or(C64::new(0.0, 0.0), |m| m[0])
    }

    /// Insert or replace a component; `data` holds one matrix per node.
    pub fn set_component(&mut self, index: MultiIndex, data: Vec<C64>) {
        assert_eq!(data.len(), self.chart.nodes() * self.block());
        assert!(index.axes().all(|k| k < self.chart.dim()));
        self.comps.insert(index, data);
    }

    pub fn grades(&self) -> BTreeSet<usize> {
        self.comps.keys().map(|k| k.len()).collect()
    }

    pub fn grade_part(&self, grade: usize) -> Self {
        Self {
            chart: self.chart.clone(),
            rank: self.rank,
            comps: self
                .comps
                .iter()
                .filter(|(k, _)| k.len() == grade)
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if !self.chart.same_as(&other.chart) {
            return Err(Error::ChartMismatch("forms live on different charts".into()));
        }
        if self.rank != other.rank {
            return Err(Error::RankMismatch {
                left: self.rank,
                right: other.rank,
            });
        }
        Ok(())
    }

    fn combine(&self, other: &Self, factor: f64) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (k, v) in &other.comps {
            let entry = out
                .comps
                .entry(*k)
                .or_insert_with(|| vec![C64::new(0.0, 0.0); v.len()]);
            for (a, b) in entry.iter_mut().zip(v) {
                *a += b * factor;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        for v in out.comps.values_mut() {
            for z in v.iter_mut() {
                *z *= c;
            }
        }
        out
    }

    /// Pointwise multiplication by a real function of the node.
    pub fn scale_nodewise(&self, f: impl Fn(usize) -> f64 + Sync) -> Self {
        let b = self.block();
        let mut out = self.clone();
        for v in out.comps.values_mut() {
            v.par_chunks_mut(b).enumerate().for_each(|(node, m)| {
                let w = f(node);
                m.iter_mut().for_each(|z| *z *= w);
            });
        }
        out
    }

    /// Sup norm over all entries of all components.
    pub fn max_abs(&self) -> f64 {
        self.comps
            .values()
            .flat_map(|v| v.iter())
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Exterior product with matrix multiplication `a * b` at each node.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.rank;
        let b = self.block();
        let nodes = self.chart.nodes();
        let mut out: BTreeMap<MultiIndex, Vec<C64>> = BTreeMap::new();
        for (ia, da) in &self.comps {
            for (ib, db) in &other.comps {
                let Some((sign, idx)) = ia.wedge(*ib) else {
                    continue;
                };
                let dst = out
                    .entry(idx)
                    .or_insert_with(|| vec![C64::new(0.0, 0.0); nodes * b]);
                let s = C64::new(sign, 0.0);
                dst.par_chunks_mut(b).enumerate().for_each(|(node, o)| {
                    let r = node * b..(node + 1) * b;
                    linalg::matmul_acc(o, &da[r.clone()], &db[r], n, s);
                });
            }
        }
        Ok(Self {
            chart: self.chart.clone(),
            rank: n,
            comps: out,
        })
    }

    /// `k`-fold wedge power; `a^0` is the grade-0 identity.
    pub fn power(&self, k: usize) -> Result<Self> {
        let mut acc = Self::identity(self.chart.clone(), self.rank);
        for _ in 0..k {
            acc = acc.wedge(self)?;
        }
        Ok(acc)
    }

    /// Entrywise matrix trace per multi-index.
    pub fn trace(&self) -> ScalarForm {
        let n = self.rank;
        let b = self.block();
        let comps = self
            .comps
            .iter()
            .map(|(k, v)| (*k, v.chunks(b).map(|m| linalg::trace(m, n)).collect()))
            .collect();
        Self {
            chart: self.chart.clone(),
            rank: 1,
            comps,
        }
    }

    /// `sum_k c_k a^k`, truncated where `2k` exceeds the chart dimension.
    pub fn apply_series(&self, q: &CharPowerSeries) -> Result<Self> {
        for (k, v) in &self.comps {
            let p = k.len();
            if (p == 0 || p % 2 == 1) && v.iter().any(|z| *z != C64::new(0.0, 0.0)) {
                return Err(Error::SeriesInput(p));
            }
        }
        let dim = self.chart.dim();
        let mut acc = Self::identity(self.chart.clone(), self.rank).scale(C64::new(q.coeff(0), 0.0));
        let mut pow = Self::identity(self.chart.clone(), self.rank);
        for k in 1..q.coeffs().len() {
            if 2 * k > dim {
                break;
            }
            pow = pow.wedge(self)?;
            if q.coeff(k) != 0.0 {
                acc = acc.add(&pow.scale(C64::new(q.coeff(k), 0.0)))?;
            }
        }
        Ok(acc)
    }

    /// Exterior derivative with 4th-order finite differences.
    pub fn d(&self) -> Result<Self> {
        let dim = self.chart.dim();
        let nodes = self.chart.nodes();
        let b = self.block();
        let mut out: BTreeMap<MultiIndex, Vec<C64>> = BTreeMap::new();
        for (idx, data) in &self.comps {
            for k in (0..dim).filter(|&k| !idx.contains(k)) {
                let deriv = derivative_along(&self.chart, data, b, k)?;
                let sign = idx.derivative_sign(k);
                let target = MultiIndex(idx.0 | (1 << k));
                let dst = out
                    .entry(target)
                    .or_insert_with(|| vec![C64::new(0.0, 0.0); nodes * b]);
                for (o, dv) in dst.iter_mut().zip(&deriv) {
                    *o += dv * sign;
                }
            }
        }
        Ok(Self {
            chart: self.chart.clone(),
            rank: self.rank,
            comps: out,
        })
    }
}

/// Partial derivative along `axis` of blocked nodal data.
pub fn derivative_along(chart: &Chart, data: &[C64], block: usize, axis: usize) -> Result<Vec<C64>> {
    let ax = chart.axis(axis);
    let n = ax.samples;
    if n < ax.min_samples_for_derivative() {
        return Err(Error::InsufficientSamples {
            axis,
            samples: n,
            required: ax.min_samples_for_derivative(),
        });
    }
    let stride = chart.stride(axis);
    let inv12h = 1.0 / (12.0 * ax.spacing);
    let mut out = vec![C64::new(0.0, 0.0); data.len()];
    out.par_chunks_mut(block).enumerate().for_each(|(node, o)| {
        let i = chart.index_along(node, axis);
        let base = node - i * stride;
        let at = |j: usize| &data[(base + j * stride) * block..(base + j * stride + 1) * block];
        let (stencil, offsets): ([f64; 5], [usize; 5]) = if ax.periodic {
            let w = |d: isize| (i as isize + d).rem_euclid(n as isize) as usize;
            ([1.0, -8.0, 0.0, 8.0, -1.0], [w(-2), w(-1), i, w(1), w(2)])
        } else if i >= 2 && i + 2 < n {
            ([1.0, -8.0, 0.0, 8.0, -1.0], [i - 2, i - 1, i, i + 1, i + 2])
        } else if i == 0 {
            ([-25.0, 48.0, -36.0, 16.0, -3.0], [0, 1, 2, 3, 4])
        } else if i == 1 {
            ([-3.0, -10.0, 18.0, -6.0, 1.0], [0, 1, 2, 3, 4])
        } else if i == n - 1 {
            ([3.0, -16.0, 36.0, -48.0, 25.0], [n - 5, n - 4, n - 3, n - 2, n - 1])
        } else {
            ([-1.0, 6.0, -18.0, 10.0, 3.0], [n - 5, n - 4, n - 3, n - 2, n - 1])
        };
        for (w, j) in stencil.iter().zip(offsets) {
            if *w == 0.0 {
                continue;
            }
            for (dst, src) in o.iter_mut().zip(at(j)) {
                *dst += src * (w * inv12h);
            }
        }
    });
    Ok(out)
}

/// Integral of the top-degree component of a scalar form.
///
/// Uses the rectangle rule on periodic axes and composite Simpson on closed
/// axes, times the chart orientation. Components are coordinate densities, so
/// the chart volume weight is not applied.
pub fn integrate_top(form: &ScalarForm) -> Result<TopIntegral> {
    if form.rank != 1 {
        return Err(Error::RankMismatch {
            left: form.rank,
            right: 1,
        });
    }
    let chart = form.chart();
    let top = MultiIndex::full(chart.dim());
    let Some(data) = form.component(top) else {
        return Ok(TopIntegral {
            value: C64::new(0.0, 0.0),
            missing_top: true,
        });
    };
    for (k, ax) in chart.axes().iter().enumerate() {
        if !ax.periodic && (ax.samples < 3 || ax.samples % 2 == 0) {
            return Err(Error::InvalidChart(format!(
                "closed axis {k} has {} samples; Simpson needs an odd count >= 3",
                ax.samples
            )));
        }
    }
    let sum: C64 = (0..chart.nodes())
        .into_par_iter()
        .map(|node| {
            let w: f64 = (0..chart.dim())
                .map(|k| chart.axis(k).quadrature_weight(chart.index_along(node, k)))
                .product();
            data[node] * w
        })
        .sum();
    Ok(TopIntegral {
        value: sum * chart.orientation(),
        missing_top: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn circle(n: usize) -> Arc<Chart> {
        Arc::new(Chart::circle(n))
    }

    #[test]
    fn multi_index_rejects_unsorted_and_out_of_range() {
        assert!(MultiIndex::new(&[1, 0], 3).is_err());
        assert!(MultiIndex::new(&[0, 0], 3).is_err());
        assert!(MultiIndex::new(&[3], 3).is_err());
        assert_eq!(MultiIndex::new(&[0, 2], 3).unwrap().len(), 2);
    }

    #[test]
    fn shuffle_signs() {
        let x = MultiIndex::single(0);
        let y = MultiIndex::single(1);
        let z = MultiIndex::single(2);
        assert_eq!(x.wedge(y), Some((1.0, MultiIndex::pair(0, 1))));
        assert_eq!(y.wedge(x), Some((-1.0, MultiIndex::pair(0, 1))));
        assert_eq!(MultiIndex::pair(1, 2).wedge(x), Some((1.0, MultiIndex::full(3))));
        assert_eq!(MultiIndex::pair(0, 2).wedge(y), Some((-1.0, MultiIndex::full(3))));
        assert_eq!(x.wedge(x), None);
        assert_eq!(z.wedge(MultiIndex::pair(0, 1)), Some((1.0, MultiIndex::full(3))));
    }

    #[test]
    fn dtheta_wedge_dtheta_vanishes() {
        let ch = circle(16);
        let nil = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let any = [c(1.0, 2.0), c(3.0, 0.0), c(0.5, -1.0), c(2.0, 0.0)];
        let a = GradedMatrixForm::constant(ch.clone(), 2, MultiIndex::single(0), &nil);
        let b = GradedMatrixForm::constant(ch, 2, MultiIndex::single(0), &any);
        let w = a.wedge(&b).unwrap();
        assert_eq!(w.max_abs(), 0.0);
        assert!(w.grades().is_empty());
    }

    #[test]
    fn identity_is_unit_for_wedge() {
        let ch = Arc::new(Chart::torus(&[4, 5, 6]));
        let b = GradedMatrixForm::from_fn(ch.clone(), 2, MultiIndex::pair(0, 2), |x| {
            vec![c(x[0].sin(), 0.0), c(x[1], 1.0), c(0.0, x[2]), c(2.0, 0.0)]
        });
        let id = GradedMatrixForm::identity(ch, 2);
        assert_eq!(id.wedge(&b).unwrap().max_abs_diff(&b).unwrap(), 0.0);
        assert_eq!(b.wedge(&id).unwrap().max_abs_diff(&b).unwrap(), 0.0);
    }

    #[test]
    fn wedge_rejects_mismatches() {
        let a = GradedMatrixForm::identity(circle(8), 2);
        let b = GradedMatrixForm::identity(circle(9), 2);
        let r = GradedMatrixForm::identity(circle(8), 3);
        assert!(matches!(a.wedge(&b), Err(Error::ChartMismatch(_))));
        assert!(matches!(a.wedge(&r), Err(Error::RankMismatch { .. })));
    }

    #[test]
    fn trace_of_identity_is_rank() {
        let t = GradedMatrixForm::identity(circle(8), 3).trace();
        assert_eq!(t.rank(), 1);
        assert!((0..8).all(|n| t.scalar_at(MultiIndex::EMPTY, n) == c(3.0, 0.0)));
    }

    #[test]
    fn trace_of_graded_commutator_vanishes() {
        let ch = Arc::new(Chart::torus(&[4, 4, 4]));
        let alpha = GradedMatrixForm::one_form_from_fn(ch.clone(), 2, |x| {
            let mut v = Vec::new();
            for k in 0..3 {
                let t = x[k] + k as f64;
                v.extend([c(t.cos(), 0.1), c(0.2, t.sin()), c(-1.0, 0.0), c(0.0, t)]);
            }
            v
        });
        let beta = GradedMatrixForm::from_fn(ch, 2, MultiIndex::pair(1, 2), |x| {
            vec![c(x[0], 0.0), c(1.0, -x[1]), c(0.3, 0.0), c(x[2], 2.0)]
        });
        // p = 1, q = 2: (-1)^{pq} = 1.
        let comm = alpha.wedge(&beta).unwrap().sub(&beta.wedge(&alpha).unwrap()).unwrap();
        assert!(comm.trace().max_abs() < 1e-12);
        assert!(comm.max_abs() > 1e-3);
    }

    #[test]
    fn cube_of_one_form_on_circle_is_absent() {
        let ch = circle(8);
        let w = GradedMatrixForm::constant(ch, 1, MultiIndex::single(0), &[c(0.0, 3.0)]);
        let cube = w.power(3).unwrap().trace();
        assert!(cube.grades().is_empty());
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let ch = Arc::new(Chart::torus(&[4, 4]));
        let z = GradedMatrixForm::zero(ch.clone(), 2);
        let e = z.apply_series(&CharPowerSeries::exp(3)).unwrap();
        assert_eq!(e.max_abs_diff(&GradedMatrixForm::identity(ch, 2)).unwrap(), 0.0);
    }

    #[test]
    fn exp_in_dim_three_truncates_after_linear_term() {
        let ch = Arc::new(Chart::torus(&[4, 4, 4]));
        let a = GradedMatrixForm::from_fn(ch.clone(), 2, MultiIndex::pair(0, 1), |x| {
            vec![c(x[0], 0.0), c(1.0, 0.0), c(0.0, 1.0), c(x[2], 0.0)]
        })
        .add(&GradedMatrixForm::constant(
            ch.clone(),
            2,
            MultiIndex::pair(1, 2),
            &[c(0.0, 1.0), c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        ))
        .unwrap();
        let e = a.apply_series(&CharPowerSeries::exp(5)).unwrap();
        let expected = GradedMatrixForm::identity(ch, 2).add(&a).unwrap();
        assert_eq!(e.max_abs_diff(&expected).unwrap(), 0.0);
    }

    #[test]
    fn series_rejects_odd_and_grade_zero_input() {
        let ch = circle(8);
        let odd = GradedMatrixForm::constant(ch.clone(), 1, MultiIndex::single(0), &[c(1.0, 0.0)]);
        assert!(matches!(odd.apply_series(&CharPowerSeries::exp(2)), Err(Error::SeriesInput(1))));
        let zero_grade = GradedMatrixForm::identity(ch, 1);
        assert!(matches!(
            zero_grade.apply_series(&CharPowerSeries::exp(2)),
            Err(Error::SeriesInput(0))
        ));
    }

    #[test]
    fn d_of_constant_vanishes() {
        let ch = Arc::new(Chart::torus(&[6, 7]));
        let a = GradedMatrixForm::constant(ch, 2, MultiIndex::single(0), &[c(1.0, 2.0); 4]);
        assert!(a.d().unwrap().max_abs() < 1e-14);
        let circ = GradedMatrixForm::constant(circle(16), 1, MultiIndex::single(0), &[c(0.0, 3.0)]);
        assert!(circ.d().unwrap().grades().is_empty());
    }

    #[test]
    fn d_squared_vanishes_to_fourth_order() {
        let run = |n: usize| {
            let ch = Arc::new(Chart::torus(&[n, n, n]));
            let f = GradedMatrixForm::from_fn(ch, 1, MultiIndex::EMPTY, |x| {
                vec![c((x[0] + 2.0 * x[1]).sin() * x[2].cos(), 0.0)]
            });
            f.d().unwrap().d().unwrap().max_abs()
        };
        // Central difference operators commute, so d^2 vanishes to rounding.
        assert!(run(16) < 1e-12);
    }

    #[test]
    fn derivative_is_fourth_order_on_closed_and_periodic_axes() {
        let err = |n: usize, periodic: bool| {
            let ax = if periodic {
                Axis::periodic(n, TAU)
            } else {
                Axis::closed(n, 0.0, 2.0)
            };
            let ch = Arc::new(Chart::new(vec![ax]).unwrap());
            let f = GradedMatrixForm::from_fn(ch.clone(), 1, MultiIndex::EMPTY, |x| vec![c(x[0].sin(), 0.0)]);
            let df = f.d().unwrap();
            (0..ch.nodes())
                .map(|i| (df.scalar_at(MultiIndex::single(0), i) - ch.coords(i)[0].cos()).norm())
                .fold(0.0, f64::max)
        };
        for periodic in [true, false] {
            let ratio = err(33, periodic) / err(65, periodic);
            assert!((12.0..20.0).contains(&ratio), "periodic={periodic} ratio={ratio}");
        }
    }

    #[test]
    fn d_reports_insufficient_samples() {
        let ch = Arc::new(Chart::new(vec![Axis::closed(4, 0.0, 1.0)]).unwrap());
        let f = GradedMatrixForm::from_fn(ch, 1, MultiIndex::EMPTY, |x| vec![c(x[0], 0.0)]);
        assert!(matches!(f.d(), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn integrate_constant_one_forms_on_circle() {
        let ch = circle(64);
        let unit = GradedMatrixForm::constant(ch.clone(), 1, MultiIndex::single(0), &[c(1.0 / TAU, 0.0)]);
        assert!((integrate_top(&unit).unwrap().value - 1.0).norm() < 1e-12);
        let three = unit.scale(c(3.0, 0.0));
        assert!((integrate_top(&three).unwrap().value - 3.0).norm() < 1e-10);
        let flipped = GradedMatrixForm::constant(
            Arc::new(Chart::circle(64).with_orientation(-1.0)),
            1,
            MultiIndex::single(0),
            &[c(1.0 / TAU, 0.0)],
        );
        assert!((integrate_top(&flipped).unwrap().value + 1.0).norm() < 1e-12);
    }

    #[test]
    fn missing_top_grade_is_flagged() {
        let f = GradedMatrixForm::identity(circle(8), 1);
        let r = integrate_top(&f).unwrap();
        assert!(r.missing_top);
        assert_eq!(r.value, c(0.0, 0.0));
    }

    #[test]
    fn simpson_on_closed_axis() {
        let ch = Arc::new(Chart::new(vec![Axis::closed(129, 0.0, PI)]).unwrap());
        let f = GradedMatrixForm::from_fn(ch, 1, MultiIndex::single(0), |x| vec![c(x[0].sin(), 0.0)]);
        assert!((integrate_top(&f).unwrap().value - 2.0).norm() < 1e-8);
        let even = Arc::new(Chart::new(vec![Axis::closed(32, 0.0, PI)]).unwrap());
        let g = GradedMatrixForm::constant(even, 1, MultiIndex::single(0), &[c(1.0, 0.0)]);
        assert!(integrate_top(&g).is_err());
    }

    #[test]
    fn chart_volume_and_locate() {
        let ch = Chart::torus(&[8, 4]);
        assert!((ch.volume() - TAU * TAU).abs() < 1e-12);
        let node = ch.node_from_indices(&[3, 2]);
        let x = ch.coords(node);
        assert_eq!(ch.locate(&x, 1e-9), Some(node));
        assert_eq!(ch.locate(&[x[0] + TAU, x[1] - 2.0 * TAU], 1e-9), Some(node));
        assert_eq!(ch.locate(&[x[0] + 0.1, x[1]], 1e-9), None);
    }
}
