//! Sparse Fourier representation of periodic functions on the torus,
//! dyadic sampling grids, folding discrete Fourier transforms, and
//! hyperbolic-cross index sets.
//!
//! Frequencies live on ℤ^d. The sampling lattice at level j uses the index
//! set `A_j = [-2^{j-1}, 2^{j-1}) ∩ ℤ` with nodes `x_k = πk / 2^{j-1}`;
//! a frequency k contributes to the folded bin `k mod 2^j` represented in
//! `A_j`. Coefficients are stored sparsely: hyperbolic crosses are tiny
//! relative to full tensor grids, so dense tensors only ever appear on
//! sampling grids.

use std::collections::{BTreeMap, BTreeSet};

use ndarray::{ArrayD, Axis, IxDyn};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A frequency vector on ℤ^d.
pub type FreqIndex = Vec<i64>;

/// A vector of nonnegative dyadic levels, one per coordinate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LevelVec(pub Vec<u32>);

impl LevelVec {
    pub fn new(j: Vec<u32>) -> Self {
        LevelVec(j)
    }

    pub fn uniform(j: u32, d: usize) -> Self {
        LevelVec(vec![j; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// The ℓ₁ size |j|₁ = Σ jᵢ.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }
}

/// Number of lattice points per axis at level j.
pub fn axis_len(j: u32) -> usize {
    1usize << j
}

/// True iff k lies in the sampling index set A_j = [-2^{j-1}, 2^{j-1}) ∩ ℤ.
pub fn in_aj(j: u32, k: i64) -> bool {
    if j == 0 {
        k == 0
    } else {
        let h = 1i64 << (j - 1);
        -h <= k && k < h
    }
}

/// Fold a frequency into its representative in A_j (k mod 2^j, centered).
pub fn fold_freq(k: i64, j: u32) -> i64 {
    let n = 1i64 << j;
    if n == 1 {
        return 0;
    }
    let r = k.rem_euclid(n);
    if r >= n / 2 {
        r - n
    } else {
        r
    }
}

/// Array position of a folded frequency a ∈ A_j (ascending order of a).
fn pos_of(a: i64, n: usize) -> usize {
    if n == 1 {
        0
    } else {
        (a + (n as i64) / 2) as usize
    }
}

/// Frequency stored at array position p for an axis of n = 2^j bins.
fn freq_at(p: usize, n: usize) -> i64 {
    if n == 1 {
        0
    } else {
        p as i64 - (n as i64) / 2
    }
}

/// A sparse multivariate trigonometric polynomial Σ_k c_k e^{i(k,x)}.
///
/// Exactly-zero coefficients are dropped on insertion; no epsilon pruning is
/// performed, so telescoping sums cancel without silent accuracy loss.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    d: usize,
    coeffs: BTreeMap<FreqIndex, Complex64>,
}

impl TrigPoly {
    pub fn new(d: usize) -> Self {
        assert!(d >= 1, "dimension must be at least 1");
        TrigPoly {
            d,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(d: usize, c: Complex64) -> Self {
        let mut p = TrigPoly::new(d);
        p.add_coeff(&vec![0; d], c);
        p
    }

    /// Single exponential e^{i(k,x)}.
    pub fn exponential(k: &[i64]) -> Self {
        let mut p = TrigPoly::new(k.len());
        p.add_coeff(k, Complex64::new(1.0, 0.0));
        p
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, k: &[i64]) -> Complex64 {
        self.coeffs
            .get(k)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FreqIndex, &Complex64)> {
        self.coeffs.iter()
    }

    /// Set c_k, dropping the entry when the value is exactly zero.
    pub fn set_coeff(&mut self, k: &[i64], c: Complex64) {
        assert_eq!(k.len(), self.d);
        if c.re == 0.0 && c.im == 0.0 {
            self.coeffs.remove(k);
        } else {
            self.coeffs.insert(k.to_vec(), c);
        }
    }

    pub fn add_coeff(&mut self, k: &[i64], c: Complex64) {
        assert_eq!(k.len(), self.d);
        let v = self.coeff(k) + c;
        self.set_coeff(k, v);
    }

    /// Naive pointwise evaluation Σ_k c_k e^{i(k,x)}.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        assert_eq!(x.len(), self.d);
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in &self.coeffs {
            let phase: f64 = k.iter().zip(x).map(|(&ki, &xi)| ki as f64 * xi).sum();
            acc += c * Complex64::new(0.0, phase).exp();
        }
        acc
    }

    pub fn scale(&self, a: Complex64) -> TrigPoly {
        let mut out = TrigPoly::new(self.d);
        for (k, c) in &self.coeffs {
            out.set_coeff(k, c * a);
        }
        out
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        assert_eq!(self.d, other.d);
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add_coeff(k, *c);
        }
        out
    }

    pub fn sub(&self, other: &TrigPoly) -> TrigPoly {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Coefficient-wise multiplication by a symbol k ↦ m(k).
    pub fn apply_symbol<F: Fn(&[i64]) -> Complex64>(&self, m: F) -> TrigPoly {
        let mut out = TrigPoly::new(self.d);
        for (k, c) in &self.coeffs {
            out.set_coeff(k, c * m(k));
        }
        out
    }

    /// Largest |k_i| over stored frequencies, per axis.
    pub fn max_abs_freq(&self) -> Vec<i64> {
        let mut b = vec![0i64; self.d];
        for k in self.coeffs.keys() {
            for (i, &ki) in k.iter().enumerate() {
                b[i] = b[i].max(ki.abs());
            }
        }
        b
    }

    /// ℓ₂ norm of the coefficient sequence (= L₂ norm in the normalized measure).
    pub fn coeff_l2(&self) -> f64 {
        self.coeffs
            .values()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let coeffs: Vec<_> = self
            .coeffs
            .iter()
            .map(|(k, c)| {
                serde_json::json!({"k": k, "re": c.re, "im": c.im})
            })
            .collect();
        serde_json::json!({"d": self.d, "coeffs": coeffs})
    }

    pub fn from_json(v: &serde_json::Value) -> Result<TrigPoly> {
        #[derive(Deserialize)]
        struct Term {
            k: Vec<i64>,
            re: f64,
            im: f64,
        }
        #[derive(Deserialize)]
        struct Poly {
            d: usize,
            coeffs: Vec<Term>,
        }
        let p: Poly = serde_json::from_value(v.clone())?;
        let mut out = TrigPoly::new(p.d);
        for t in p.coeffs {
            if t.k.len() != p.d {
                return Err(Error::DimensionMismatch {
                    expected: p.d,
                    got: t.k.len(),
                });
            }
            out.add_coeff(&t.k, Complex64::new(t.re, t.im));
        }
        Ok(out)
    }
}

/// The dyadic tensor sampling grid at level vector j: axis i carries the
/// 2^{j_i} nodes x_k = πk/2^{j_i-1}, k ∈ A_{j_i}, all lying in [-π, π).
#[derive(Debug, Clone)]
pub struct DyadicGrid {
    j: LevelVec,
}

impl DyadicGrid {
    pub fn new(j: LevelVec) -> Self {
        DyadicGrid { j }
    }

    pub fn level(&self) -> &LevelVec {
        &self.j
    }

    pub fn dim(&self) -> usize {
        self.j.dim()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.j.iter().map(axis_len).collect()
    }

    /// Nodes of axis i in ascending order.
    pub fn axis_nodes(&self, i: usize) -> Vec<f64> {
        let j = self.j.get(i);
        let n = axis_len(j);
        (0..n)
            .map(|p| {
                let a = freq_at(p, n);
                std::f64::consts::PI * a as f64 / f64::powi(2.0, j as i32 - 1)
            })
            .collect()
    }

    /// The node indexed by array position `pos`.
    pub fn node(&self, pos: &[usize]) -> Vec<f64> {
        pos.iter()
            .enumerate()
            .map(|(i, &p)| self.axis_nodes(i)[p])
            .collect()
    }
}

/// In-place transform of every 1-D lane along `axis`.
fn transform_axis(
    arr: &mut ArrayD<Complex64>,
    axis: usize,
    planner: &mut FftPlanner<f64>,
    inverse: bool,
) {
    let n = arr.shape()[axis];
    if n == 1 {
        return;
    }
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let half = n / 2;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let scale = if inverse { 1.0 } else { 1.0 / n as f64 };
    for mut lane in arr.lanes_mut(Axis(axis)) {
        // A_j-ordered data <-> residue-ordered FFT input: rotate by n/2.
        for p in 0..n {
            buf[(p + half) % n] = lane[p];
        }
        fft.process(&mut buf);
        for p in 0..n {
            lane[p] = buf[(p + half) % n] * scale;
        }
    }
}

/// Evaluate a trigonometric polynomial at all nodes of a dyadic grid.
///
/// Each frequency k contributes at the folded bin `k mod 2^{j_i}` per axis,
/// after which one inverse DFT per axis produces the node values. Exact on
/// all inputs: folding reproduces the aliasing identity
/// `e^{i(k+ℓ2^j)x} = e^{ikx}` on the level-j lattice.
pub fn eval_on_grid(f: &TrigPoly, grid: &DyadicGrid) -> ArrayD<Complex64> {
    assert_eq!(f.dim(), grid.dim(), "polynomial/grid dimension mismatch");
    let shape = grid.shape();
    let mut arr = ArrayD::from_elem(IxDyn(&shape), Complex64::new(0.0, 0.0));
    for (k, c) in f.terms() {
        let pos: Vec<usize> = k
            .iter()
            .enumerate()
            .map(|(i, &ki)| {
                let j = grid.level().get(i);
                pos_of(fold_freq(ki, j), axis_len(j))
            })
            .collect();
        arr[IxDyn(&pos)] += c;
    }
    let mut planner = FftPlanner::new();
    for axis in 0..grid.dim() {
        transform_axis(&mut arr, axis, &mut planner, true);
    }
    arr
}

/// Recover the unique interpolant with frequencies in ∏ A_{j_i} from grid
/// values; inverse of [`eval_on_grid`] on that span.
pub fn grid_to_coeffs(values: &ArrayD<Complex64>, j: &LevelVec) -> Result<TrigPoly> {
    let expected: Vec<usize> = j.iter().map(axis_len).collect();
    if values.shape() != expected.as_slice() {
        return Err(Error::ShapeMismatch {
            expected,
            got: values.shape().to_vec(),
        });
    }
    let mut arr = values.clone();
    let mut planner = FftPlanner::new();
    for axis in 0..j.dim() {
        transform_axis(&mut arr, axis, &mut planner, false);
    }
    let shape = arr.shape().to_vec();
    let mut poly = TrigPoly::new(j.dim());
    for (pos, c) in arr.indexed_iter() {
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        let k: Vec<i64> = (0..j.dim())
            .map(|i| freq_at(pos[i], shape[i]))
            .collect();
        poly.set_coeff(&k, *c);
    }
    Ok(poly)
}

/// The tensor dyadic frequency block at level j:
/// per axis, ⌊2^{j_i-1}⌋ ≤ |k_i| < 2^{j_i}. Blocks over all j partition ℤ^d.
pub fn dyadic_block(j: &LevelVec) -> BTreeSet<FreqIndex> {
    fn axis_block(j: u32) -> Vec<i64> {
        if j == 0 {
            vec![0]
        } else {
            let lo = 1i64 << (j - 1);
            let hi = 1i64 << j;
            let mut v: Vec<i64> = (lo..hi).collect();
            v.extend((lo..hi).map(|k| -k));
            v.sort_unstable();
            v
        }
    }
    let axes: Vec<Vec<i64>> = j.iter().map(axis_block).collect();
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; axes.len()];
    loop {
        out.insert(
            idx.iter()
                .enumerate()
                .map(|(i, &p)| axes[i][p])
                .collect::<Vec<i64>>(),
        );
        let mut i = axes.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < axes[i].len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// The step hyperbolic cross 𝒬_n: the union of dyadic blocks over |j|₁ ≤ n.
pub fn hyperbolic_cross(n: u32, d: usize) -> BTreeSet<FreqIndex> {
    let mut out = BTreeSet::new();
    for j in level_simplex(n, d) {
        out.extend(dyadic_block(&j));
    }
    out
}

/// All level vectors j ∈ ℤ_+^d with |j|₁ ≤ n, in lexicographic order.
pub fn level_simplex(n: u32, d: usize) -> Vec<LevelVec> {
    fn rec(n: u32, d: usize, prefix: &mut Vec<u32>, out: &mut Vec<LevelVec>) {
        if d == 0 {
            out.push(LevelVec::new(prefix.clone()));
            return;
        }
        for j in 0..=n {
            prefix.push(j);
            rec(n - j, d - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}
