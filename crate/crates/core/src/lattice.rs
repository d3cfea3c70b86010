//! Multi-index conventions, the sinc and lin kernels, and band-limited
//! functions represented by their samples on the exponential lattice
//! `e^{k/T}`, `k ∈ Z^n`.
//!
//! A [`LatticeFunction`] stores `c_k = f(e^{k/T})` and evaluates
//!
//! ```text
//! f(x) = Σ_k c_k · x^{-c} · e^{<c,k>/T} · sinc(T log x − k)
//! ```
//!
//! Internally most work happens in log coordinates `u = log x`, where the
//! weighted function `x^c f(x)` becomes an ordinary cardinal series
//! `Σ_k a_k sinc(T u − k)` with `a_k = c_k e^{<c,k>/T}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::sin_pi;

/// Default ceiling on the number of lattice points any routine will enumerate.
pub const DEFAULT_LATTICE_CAP: u128 = 1 << 24;

const TAYLOR_GUARD: f64 = 1e-4;

/// Dimension, Mellin weight and band parameter of the function space.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceParams {
    c: Vec<f64>,
    t: f64,
}

impl SpaceParams {
    pub fn new(c: Vec<f64>, t: f64) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("Mellin weight c must be finite"));
        }
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::invalid(format!("band parameter T must be positive, got {t}")));
        }
        Ok(Self { c, t })
    }

    /// One-dimensional space with weight `c` and band parameter `t`.
    pub fn one_dim(c: f64, t: f64) -> Result<Self> {
        Self::new(vec![c], t)
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// Band parameter `T`; the lattice step is `1/T` in log coordinates.
    pub fn t(&self) -> f64 {
        self.t
    }

    pub(crate) fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: len });
        }
        Ok(())
    }

    /// `<c, u>`
    #[inline]
    pub fn c_dot(&self, u: &[f64]) -> f64 {
        self.c.iter().zip(u).map(|(a, b)| a * b).sum()
    }
}

/// Integer lattice index. Ordering is lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<i64>);

impl MultiIndex {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `max_i |k(i)|`
    pub fn sup_norm(&self) -> u64 {
        self.0.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0)
    }

    /// Whether every coordinate satisfies `|k(i)| <= half_width`.
    pub fn within(&self, half_width: f64) -> bool {
        self.0.iter().all(|&k| (k as f64).abs() <= half_width)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// All `k ∈ Z^n` with `|k(i)| <= half`, in lexicographic order.
pub fn cube_indices(n: usize, half: i64) -> impl Iterator<Item = MultiIndex> {
    let side = (2 * half + 1) as u64;
    let total = side.pow(n as u32);
    (0..total).map(move |mut flat| {
        let mut k = vec![0i64; n];
        for slot in k.iter_mut().rev() {
            *slot = (flat % side) as i64 - half;
            flat /= side;
        }
        MultiIndex(k)
    })
}

/// Index restriction for series evaluation.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum IndexWindow {
    #[default]
    All,
    /// Keep `k` with `|k(i)| <= half_width` in every coordinate.
    Cube {
        half_width: f64,
    },
    Set(BTreeSet<MultiIndex>),
}

impl IndexWindow {
    pub fn contains(&self, k: &MultiIndex) -> bool {
        match self {
            IndexWindow::All => true,
            IndexWindow::Cube { half_width } => k.within(*half_width),
            IndexWindow::Set(set) => set.contains(k),
        }
    }
}

/// One-dimensional `sin(πx)/(πx)` with the removable singularity filled.
#[inline]
pub fn sinc(x: f64) -> f64 {
    let px = std::f64::consts::PI * x;
    if px.abs() < TAYLOR_GUARD {
        1.0 - px * px / 6.0
    } else {
        sin_pi(x) / px
    }
}

/// Product kernel `Π_i sinc(x(i))`.
pub fn sinc_nd(x: &[f64]) -> f64 {
    x.iter().map(|&v| sinc(v)).product()
}

/// `lin_c(x) = x^{-c} sinc(log x)`, coordinatewise logarithm.
pub fn lin_c(c: &[f64], x: &[f64]) -> Result<f64> {
    if c.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: c.len(), got: x.len() });
    }
    check_positive(x)?;
    let mut log_weight = 0.0;
    let mut kernel = 1.0;
    for (&ci, &xi) in c.iter().zip(x) {
        let u = xi.ln();
        log_weight -= ci * u;
        kernel *= sinc(u);
    }
    Ok(log_weight.exp() * kernel)
}

pub(crate) fn check_positive(x: &[f64]) -> Result<()> {
    if let Some(bad) = x.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Domain(format!("point coordinates must be positive and finite, got {bad}")));
    }
    Ok(())
}

/// The points `e^{k/T}` for `k ∈ Z^n ∩ [−N/2, N/2]^n`, lexicographic in `k`.
pub fn lattice_points(params: &SpaceParams, big_n: u64, cap: u128) -> Result<Vec<Vec<f64>>> {
    let half = (big_n / 2) as i64;
    let side = 2 * half as u128 + 1;
    let count = side.checked_pow(params.n() as u32).ok_or(Error::SizeOverflow { requested: u128::MAX, cap })?;
    if count > cap {
        return Err(Error::SizeOverflow { requested: count, cap });
    }
    let t = params.t();
    Ok(cube_indices(params.n(), half).map(|k| k.0.iter().map(|&ki| (ki as f64 / t).exp()).collect()).collect())
}

/// A Mellin band-limited function given by finitely many exponential samples.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeFunction {
    params: SpaceParams,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl LatticeFunction {
    /// The zero function (empty coefficient map).
    pub fn zero(params: SpaceParams) -> Self {
        Self { params, coeffs: BTreeMap::new() }
    }

    /// Builds a function from `(k, c_k)` pairs. Duplicate keys are rejected.
    pub fn from_pairs<I>(params: SpaceParams, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut coeffs = BTreeMap::new();
        for (k, v) in pairs {
            params.check_dim(k.dim())?;
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::invalid(format!("coefficient at {k} is not finite")));
            }
            if coeffs.insert(k.clone(), v).is_some() {
                return Err(Error::invalid(format!("duplicate lattice index {k}")));
            }
        }
        Ok(Self { params, coeffs })
    }

    /// Single coefficient `value` at `k`: the shifted kernel `value · lin_{c/T}(e^{-k} x^T)`.
    pub fn single(params: SpaceParams, k: MultiIndex, value: Complex64) -> Result<Self> {
        Self::from_pairs(params, [(k, value)])
    }

    pub fn params(&self) -> &SpaceParams {
        &self.params
    }

    pub fn coeffs(&self) -> &BTreeMap<MultiIndex, Complex64> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    pub fn coeff(&self, k: &MultiIndex) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Largest sup-norm of any stored index (0 for the zero function).
    pub fn support_radius(&self) -> u64 {
        self.coeffs.keys().map(MultiIndex::sup_norm).max().unwrap_or(0)
    }

    /// Per-coordinate `(min k(i), max k(i))`, or `None` when empty.
    pub fn support_box(&self) -> Option<Vec<(i64, i64)>> {
        let mut keys = self.coeffs.keys();
        let first = keys.next()?;
        let mut bounds: Vec<(i64, i64)> = first.0.iter().map(|&k| (k, k)).collect();
        for key in keys {
            for (b, &k) in bounds.iter_mut().zip(&key.0) {
                b.0 = b.0.min(k);
                b.1 = b.1.max(k);
            }
        }
        Some(bounds)
    }

    /// `a_k = c_k e^{<c,k>/T}`, the coefficients of `x^c f(x)` as a cardinal series.
    pub fn weighted_coeff(&self, k: &MultiIndex, value: Complex64) -> Complex64 {
        let exponent: f64 =
            self.params.c().iter().zip(&k.0).map(|(ci, &ki)| ci * ki as f64).sum::<f64>() / self.params.t();
        value * exponent.exp()
    }

    /// Keeps only the coefficients selected by `window`.
    pub fn restrict(&self, window: &IndexWindow) -> Self {
        Self {
            params: self.params.clone(),
            coeffs: self.coeffs.iter().filter(|(k, _)| window.contains(k)).map(|(k, v)| (k.clone(), *v)).collect(),
        }
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scale(&self, factor: Complex64) -> Self {
        Self { params: self.params.clone(), coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v * factor)).collect() }
    }

    /// Coefficientwise difference `self − other` over the union of supports.
    pub fn sub(&self, other: &LatticeFunction) -> Result<Self> {
        if self.params != other.params {
            return Err(Error::invalid("functions live in different spaces"));
        }
        let mut coeffs = self.coeffs.clone();
        for (k, v) in &other.coeffs {
            *coeffs.entry(k.clone()).or_default() -= v;
        }
        Ok(Self { params: self.params.clone(), coeffs })
    }

    /// `x^c f(x)` at `x = e^u`, as `Σ a_k sinc(T u − k)` over `window`.
    pub fn eval_weighted_log(&self, u: &[f64], window: &IndexWindow) -> Complex64 {
        let t = self.params.t();
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, v) in &self.coeffs {
            if !window.contains(k) {
                continue;
            }
            let kernel: f64 = u.iter().zip(&k.0).map(|(&ui, &ki)| sinc(t * ui - ki as f64)).product();
            if kernel != 0.0 {
                acc += self.weighted_coeff(k, *v) * kernel;
            }
        }
        acc
    }

    /// `f(e^u)`.
    pub fn eval_log(&self, u: &[f64]) -> Complex64 {
        self.eval_weighted_log(u, &IndexWindow::All) * (-self.params.c_dot(u)).exp()
    }

    /// Exponential sampling series `Σ_{k ∈ window} c_k lin_{c/T}(e^{-k} x^T)`.
    pub fn eval_series(&self, x: &[f64], window: &IndexWindow) -> Result<Complex64> {
        self.params.check_dim(x.len())?;
        check_positive(x)?;
        let u: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        Ok(self.eval_weighted_log(&u, window) * (-self.params.c_dot(&u)).exp())
    }

    /// Shorthand for [`eval_series`](Self::eval_series) over the full support.
    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        self.eval_series(x, &IndexWindow::All)
    }

    /// Evaluates `x^c f(x)` on the tensor grid `axes[0] × … × axes[n−1]`
    /// (log coordinates) and feeds each value to `sink` in row-major order.
    ///
    /// The series is contracted one axis at a time, so the cost per node is
    /// the size of the remaining coefficient block rather than the full
    /// support.
    pub fn for_each_weighted_on_grid<F>(&self, axes: &[&[f64]], mut sink: F)
    where
        F: FnMut(&[usize], Complex64),
    {
        let n = self.params.n();
        assert_eq!(axes.len(), n, "one axis per dimension");
        let mut idx = vec![0usize; n];
        let Some(bounds) = self.support_box() else {
            walk_zero(axes, 0, &mut idx, &mut sink);
            return;
        };
        let dims: Vec<usize> = bounds.iter().map(|(lo, hi)| (hi - lo + 1) as usize).collect();
        let mut dense = vec![Complex64::new(0.0, 0.0); dims.iter().product()];
        for (k, v) in &self.coeffs {
            let mut flat = 0usize;
            for ((&ki, &(lo, _)), &d) in k.0.iter().zip(&bounds).zip(&dims) {
                flat = flat * d + (ki - lo) as usize;
            }
            dense[flat] = self.weighted_coeff(k, *v);
        }
        let t = self.params.t();
        let tables: Vec<Vec<f64>> = axes
            .iter()
            .zip(&bounds)
            .map(|(axis, &(lo, hi))| {
                let mut table = Vec::with_capacity(axis.len() * (hi - lo + 1) as usize);
                for &u in axis.iter() {
                    for k in lo..=hi {
                        table.push(sinc(t * u - k as f64));
                    }
                }
                table
            })
            .collect();
        contract(&dense, &dims, axes, &tables, 0, &mut idx, &mut sink);
    }

    /// Serializes to the lattice-function JSON document.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&LatticeFunctionDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: LatticeFunctionDoc = serde_json::from_str(text)?;
        doc.try_into()
    }
}

fn walk_zero<F: FnMut(&[usize], Complex64)>(axes: &[&[f64]], depth: usize, idx: &mut Vec<usize>, sink: &mut F) {
    if depth == axes.len() {
        sink(idx, Complex64::new(0.0, 0.0));
        return;
    }
    for i in 0..axes[depth].len() {
        idx[depth] = i;
        walk_zero(axes, depth + 1, idx, sink);
    }
}

fn contract<F: FnMut(&[usize], Complex64)>(
    block: &[Complex64],
    dims: &[usize],
    axes: &[&[f64]],
    tables: &[Vec<f64>],
    depth: usize,
    idx: &mut Vec<usize>,
    sink: &mut F,
) {
    let width = dims[0];
    let rest: usize = dims[1..].iter().product();
    let table = &tables[depth];
    let mut reduced = vec![Complex64::new(0.0, 0.0); rest];
    for i in 0..axes[depth].len() {
        idx[depth] = i;
        let row = &table[i * width..(i + 1) * width];
        if rest == 1 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, &s) in block.iter().zip(row) {
                acc += a * s;
            }
            sink(idx, acc);
            continue;
        }
        reduced.iter_mut().for_each(|r| *r = Complex64::new(0.0, 0.0));
        for (j, &s) in row.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            let slab = &block[j * rest..(j + 1) * rest];
            for (r, a) in reduced.iter_mut().zip(slab) {
                *r += a * s;
            }
        }
        contract(&reduced, &dims[1..], axes, tables, depth + 1, idx, sink);
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffEntry {
    k: Vec<i64>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeFunctionDoc {
    n: usize,
    c: Vec<f64>,
    #[serde(rename = "T")]
    t: f64,
    coeffs: Vec<CoeffEntry>,
}

impl From<&LatticeFunction> for LatticeFunctionDoc {
    fn from(f: &LatticeFunction) -> Self {
        Self {
            n: f.params.n(),
            c: f.params.c().to_vec(),
            t: f.params.t(),
            coeffs: f.coeffs.iter().map(|(k, v)| CoeffEntry { k: k.0.clone(), re: v.re, im: v.im }).collect(),
        }
    }
}

impl TryFrom<LatticeFunctionDoc> for LatticeFunction {
    type Error = Error;

    fn try_from(doc: LatticeFunctionDoc) -> Result<Self> {
        let params = SpaceParams::new(doc.c, doc.t)?;
        if doc.n != params.n() {
            return Err(Error::Parse(format!("n = {} but c has length {}", doc.n, params.n())));
        }
        LatticeFunction::from_pairs(
            params,
            doc.coeffs.into_iter().map(|e| (MultiIndex(e.k), Complex64::new(e.re, e.im))),
        )
        .map_err(|e| match e {
            Error::InvalidParameter(m) => Error::Parse(m),
            Error::DimensionMismatch { expected, got } => {
                Error::Parse(format!("index of length {got} in a {expected}-dimensional space"))
            }
            other => other,
        })
    }
}
