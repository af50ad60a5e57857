//! Quasi-interpolation operators Q_j(f, φ, φ̃) in one and several variables.
//!
//! Two independent evaluation paths are provided and cross-checked:
//!
//! * [`apply_aliasing`] computes the output coefficients from the exact
//!   aliasing identity Q̂_j(f)(k) = φ̂_j(k) Σ_ℓ φ̃̂_j(k+ℓ2^j) f̂(k+ℓ2^j)
//!   per axis. This path is the correctness oracle.
//! * [`apply_sampled`] assembles the reconstruction the way the operator is
//!   defined: mollified samples on the dyadic grid, folded back through the
//!   grid transform, extended by the kernel symbol. This is the "real"
//!   algorithm; it agrees with the oracle to rounding error on exact inputs.

use std::sync::Arc;

use ndarray::Dimension;
use num_complex::Complex64;

use crate::fourier::{
    eval_on_grid, fold_freq, grid_to_coeffs, DyadicGrid, LevelVec, TrigPoly,
};
use crate::kernels::{AveragerFamily, KernelFamily};
use crate::{Error, Result};

/// One factor of a tensor-product spectral model: a univariate coefficient
/// sequence with a truncation bandwidth.
#[derive(Clone)]
pub struct UnivariateSpectral {
    pub coeff: Arc<dyn Fn(i64) -> Complex64 + Send + Sync>,
    /// Coefficients are treated as zero for |k| > bandwidth.
    pub bandwidth: i64,
}

impl UnivariateSpectral {
    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.abs() > self.bandwidth {
            Complex64::new(0.0, 0.0)
        } else {
            (self.coeff)(k)
        }
    }

    /// ℓ₂ norm of the retained coefficient sequence.
    pub fn l2(&self) -> f64 {
        (-self.bandwidth..=self.bandwidth)
            .map(|k| self.coeff(k).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// The input function of an operator application.
///
/// `Exact` carries a finite coefficient map. `Spectral` is a coefficient
/// callable truncated at a declared box bandwidth with a recorded tail
/// bound. `Tensor` is a product of univariate spectral factors, which keeps
/// very large bandwidths tractable through per-axis folding. `Pointwise` is
/// a black-box evaluator, usable with delta-kind averagers (and with
/// function-kind averagers through quadrature in one dimension).
#[derive(Clone)]
pub enum FunctionModel {
    Exact(TrigPoly),
    Spectral {
        d: usize,
        coeff: Arc<dyn Fn(&[i64]) -> Complex64 + Send + Sync>,
        bandwidth: i64,
        /// L₂ bound on the discarded tail.
        tail: f64,
    },
    Tensor {
        factors: Vec<UnivariateSpectral>,
        /// L₂ bound on the discarded tail of the full product.
        tail: f64,
    },
    Pointwise {
        d: usize,
        f: Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>,
    },
}

impl FunctionModel {
    pub fn exact(p: TrigPoly) -> FunctionModel {
        FunctionModel::Exact(p)
    }

    pub fn dim(&self) -> usize {
        match self {
            FunctionModel::Exact(p) => p.dim(),
            FunctionModel::Spectral { d, .. } => *d,
            FunctionModel::Tensor { factors, .. } => factors.len(),
            FunctionModel::Pointwise { d, .. } => *d,
        }
    }

    /// Truncation tail bound (0 for exact models).
    pub fn tail(&self) -> f64 {
        match self {
            FunctionModel::Exact(_) => 0.0,
            FunctionModel::Spectral { tail, .. } => *tail,
            FunctionModel::Tensor { tail, .. } => *tail,
            FunctionModel::Pointwise { .. } => 0.0,
        }
    }

    /// The coefficient f̂(k); errors for pointwise models.
    pub fn fhat(&self, k: &[i64]) -> Result<Complex64> {
        match self {
            FunctionModel::Exact(p) => Ok(p.coeff(k)),
            FunctionModel::Spectral { coeff, bandwidth, .. } => {
                if k.iter().any(|ki| ki.abs() > *bandwidth) {
                    Ok(Complex64::new(0.0, 0.0))
                } else {
                    Ok(coeff(k))
                }
            }
            FunctionModel::Tensor { factors, .. } => Ok(k
                .iter()
                .zip(factors)
                .map(|(&ki, f)| f.coeff(ki))
                .product()),
            FunctionModel::Pointwise { .. } => Err(Error::UnsupportedModel(
                "pointwise models have no coefficient accessor",
            )),
        }
    }

    /// Materialize a finite coefficient map. Refuses boxes above a size
    /// guard; large tensor models must stay on the per-axis folding paths.
    pub fn to_trig_poly(&self) -> Result<TrigPoly> {
        const GUARD: u128 = 1 << 22;
        let per_axis_bw: Vec<i64> = match self {
            FunctionModel::Exact(p) => return Ok(p.clone()),
            FunctionModel::Spectral { bandwidth, .. } => vec![*bandwidth; self.dim()],
            FunctionModel::Tensor { factors, .. } => {
                factors.iter().map(|f| f.bandwidth).collect()
            }
            FunctionModel::Pointwise { .. } => {
                return Err(Error::UnsupportedModel(
                    "pointwise models cannot be materialized",
                ))
            }
        };
        let cells: u128 = per_axis_bw.iter().map(|&b| (2 * b + 1) as u128).product();
        if cells > GUARD {
            return Err(Error::UnsupportedModel(
                "coefficient box too large to materialize",
            ));
        }
        let mut out = TrigPoly::new(self.dim());
        let mut k: Vec<i64> = per_axis_bw.iter().map(|&b| -b).collect();
        loop {
            out.set_coeff(&k, self.fhat(&k)?);
            let mut i = self.dim();
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                k[i] += 1;
                if k[i] <= per_axis_bw[i] {
                    break;
                }
                k[i] = -per_axis_bw[i];
            }
        }
    }
}

/// A quasi-interpolation operator: a reconstruction-kernel family and an
/// averager family, tensorized over `d` coordinates. With `convolution`
/// set, the operator is the pure convolution f ∗ φ_j (no sampling and no
/// averager).
#[derive(Debug, Clone)]
pub struct QuasiInterpOp {
    pub kern: KernelFamily,
    pub avg: AveragerFamily,
    pub d: usize,
    pub convolution: bool,
}

impl QuasiInterpOp {
    pub fn new(kern: KernelFamily, avg: AveragerFamily, d: usize) -> QuasiInterpOp {
        QuasiInterpOp {
            kern,
            avg,
            d,
            convolution: false,
        }
    }

    pub fn label(&self) -> String {
        if self.convolution {
            format!("conv({})", self.kern.name())
        } else {
            format!("({}, {})", self.kern.name(), self.avg.name())
        }
    }
}

/// Named operator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpName {
    /// Point sampling with a de la Vallée Poussin kernel.
    I,
    /// Pure de la Vallée Poussin convolution means.
    V,
    /// Kantorovich sampling: dlvp kernel, characteristic averager.
    K,
    /// Kantorovich sampling with the inverse-sinc-corrected dlvp kernel.
    KStar,
}

/// Construct one of the named operators. `sigma` is the averager dilation
/// (ignored for I and V).
pub fn named_operator(name: OpName, d: usize, sigma: u32) -> Result<QuasiInterpOp> {
    // smooth generator: the sampled operators need edge-flat ramps, see
    // `dlvp_generator_smooth`
    let dlvp = KernelFamily::dlvp_smooth(0.5, 1.0)?;
    Ok(match name {
        OpName::I => QuasiInterpOp::new(dlvp, AveragerFamily::delta(), d),
        OpName::V => QuasiInterpOp {
            kern: dlvp,
            avg: AveragerFamily::delta(),
            d,
            convolution: true,
        },
        OpName::K => QuasiInterpOp::new(dlvp, AveragerFamily::char_averager(sigma)?, d),
        OpName::KStar => QuasiInterpOp::new(
            KernelFamily::modified_dlvp_smooth(0.5, 1.0, sigma)?,
            AveragerFamily::char_averager(sigma)?,
            d,
        ),
    })
}

fn check_dims(op: &QuasiInterpOp, f: &FunctionModel, j: &LevelVec) -> Result<()> {
    if f.dim() != op.d {
        return Err(Error::DimensionMismatch {
            expected: op.d,
            got: f.dim(),
        });
    }
    if j.dim() != op.d {
        return Err(Error::DimensionMismatch {
            expected: op.d,
            got: j.dim(),
        });
    }
    Ok(())
}

/// Extend a folded spectrum s (supported on ∏ A_{j_i}) by the kernel:
/// out(k) = ∏ φ̂_{j_i}(k_i) · s(k mod 2^j), over the kernel bandwidth box.
pub(crate) fn extend_by_kernel(
    kern: &KernelFamily,
    s: &TrigPoly,
    j: &LevelVec,
) -> TrigPoly {
    let d = j.dim();
    let bw: Vec<i64> = j.iter().map(|ji| kern.bandwidth(ji)).collect();
    let mut out = TrigPoly::new(d);
    for (c, v) in s.terms() {
        // enumerate all unfoldings k_i = c_i + ℓ 2^{j_i} with |k_i| < B_i
        let choices: Vec<Vec<(i64, Complex64)>> = (0..d)
            .map(|i| {
                let n = 1i64 << j.get(i);
                let lo = -(bw[i] - 1);
                let hi = bw[i] - 1;
                let lmin = (lo - c[i]).div_euclid(n)
                    + if (lo - c[i]).rem_euclid(n) != 0 { 1 } else { 0 };
                let lmax = (hi - c[i]).div_euclid(n);
                (lmin..=lmax)
                    .filter_map(|l| {
                        let k = c[i] + l * n;
                        let sym = kern.symbol(j.get(i), k);
                        if sym.re == 0.0 && sym.im == 0.0 {
                            None
                        } else {
                            Some((k, sym))
                        }
                    })
                    .collect()
            })
            .collect();
        if choices.iter().any(|ch| ch.is_empty()) {
            continue;
        }
        let mut idx = vec![0usize; d];
        loop {
            let mut k = Vec::with_capacity(d);
            let mut w = *v;
            for (i, &p) in idx.iter().enumerate() {
                k.push(choices[i][p].0);
                w *= choices[i][p].1;
            }
            out.add_coeff(&k, w);
            let mut i = d;
            let mut done = false;
            loop {
                if i == 0 {
                    done = true;
                    break;
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < choices[i].len() {
                    break;
                }
                idx[i] = 0;
            }
            if done {
                break;
            }
        }
    }
    out
}

/// The folded averaged spectrum S(c) = Σ_{m ≡ c mod 2^j} ∏ φ̃̂_{j_i}(m_i) f̂(m)
/// for an exact input, as a polynomial supported on ∏ A_{j_i}.
fn folded_spectrum_exact(
    avg: &AveragerFamily,
    f: &TrigPoly,
    j: &LevelVec,
) -> TrigPoly {
    let mut s = TrigPoly::new(f.dim());
    for (m, c) in f.terms() {
        let w: Complex64 = m
            .iter()
            .enumerate()
            .map(|(i, &mi)| avg.symbol(j.get(i), mi))
            .product();
        if w.re == 0.0 && w.im == 0.0 {
            continue;
        }
        let folded: Vec<i64> = m
            .iter()
            .enumerate()
            .map(|(i, &mi)| fold_freq(mi, j.get(i)))
            .collect();
        s.add_coeff(&folded, c * w);
    }
    s
}

/// Per-axis folded averaged spectrum for one tensor factor:
/// S_i(c) = Σ_{m ≡ c mod 2^j} φ̃̂_j(m) f_i(m), c ∈ A_j.
fn folded_axis_spectrum(
    avg: &AveragerFamily,
    f: &UnivariateSpectral,
    j: u32,
) -> Vec<Complex64> {
    let n = 1i64 << j;
    let mut s = vec![Complex64::new(0.0, 0.0); n as usize];
    for m in -f.bandwidth..=f.bandwidth {
        let c = f.coeff(m);
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        let w = avg.symbol(j, m);
        if w.re == 0.0 && w.im == 0.0 {
            continue;
        }
        let folded = fold_freq(m, j);
        let pos = if n == 1 { 0 } else { (folded + n / 2) as usize };
        s[pos] += c * w;
    }
    s
}

/// Apply the operator through the exact aliasing identity.
///
/// Exact for exact inputs; spectral and tensor inputs are exact up to their
/// declared truncation. Pointwise inputs are rejected.
pub fn apply_aliasing(
    op: &QuasiInterpOp,
    f: &FunctionModel,
    j: &LevelVec,
) -> Result<TrigPoly> {
    check_dims(op, f, j)?;
    if op.convolution {
        return apply_convolution(op, f, j);
    }
    match f {
        FunctionModel::Exact(p) => {
            let s = folded_spectrum_exact(&op.avg, p, j);
            Ok(extend_by_kernel(&op.kern, &s, j))
        }
        FunctionModel::Spectral { .. } => {
            let p = f.to_trig_poly()?;
            let s = folded_spectrum_exact(&op.avg, &p, j);
            Ok(extend_by_kernel(&op.kern, &s, j))
        }
        FunctionModel::Tensor { factors, .. } => {
            // separable folding: S(c) = ∏_i S_i(c_i)
            let axes: Vec<Vec<Complex64>> = factors
                .iter()
                .enumerate()
                .map(|(i, fac)| folded_axis_spectrum(&op.avg, fac, j.get(i)))
                .collect();
            let d = j.dim();
            let mut s = TrigPoly::new(d);
            let mut idx = vec![0usize; d];
            loop {
                let mut c = Vec::with_capacity(d);
                let mut v = Complex64::new(1.0, 0.0);
                for (i, &p) in idx.iter().enumerate() {
                    let n = 1i64 << j.get(i);
                    c.push(if n == 1 { 0 } else { p as i64 - n / 2 });
                    v *= axes[i][p];
                }
                s.set_coeff(&c, v);
                let mut i = d;
                let mut done = false;
                loop {
                    if i == 0 {
                        done = true;
                        break;
                    }
                    i -= 1;
                    idx[i] += 1;
                    if idx[i] < axes[i].len() {
                        break;
                    }
                    idx[i] = 0;
                }
                if done {
                    break;
                }
            }
            Ok(extend_by_kernel(&op.kern, &s, j))
        }
        FunctionModel::Pointwise { .. } => Err(Error::UnsupportedModel(
            "aliasing path needs coefficient access",
        )),
    }
}

fn apply_convolution(
    op: &QuasiInterpOp,
    f: &FunctionModel,
    j: &LevelVec,
) -> Result<TrigPoly> {
    let p = f.to_trig_poly()?;
    Ok(p.apply_symbol(|k| {
        k.iter()
            .enumerate()
            .map(|(i, &ki)| op.kern.symbol(j.get(i), ki))
            .product()
    }))
}

/// Peel scalar wrappers off an averager, returning (overall factor, base).
fn flatten_averager(avg: &AveragerFamily) -> (Complex64, &AveragerFamily) {
    match avg {
        AveragerFamily::Scaled { factor, inner } => {
            let (f, base) = flatten_averager(inner);
            (factor * f, base)
        }
        other => (Complex64::new(1.0, 0.0), other),
    }
}

/// Apply the operator by its defining reconstruction: averaged samples on
/// the level-j dyadic grid, folded through the grid transform, extended by
/// the kernel symbol.
pub fn apply_sampled(
    op: &QuasiInterpOp,
    f: &FunctionModel,
    j: &LevelVec,
) -> Result<TrigPoly> {
    check_dims(op, f, j)?;
    if op.convolution {
        return apply_convolution(op, f, j);
    }
    let grid = DyadicGrid::new(j.clone());
    let samples = match f {
        FunctionModel::Exact(_) | FunctionModel::Spectral { .. } => {
            // closed-form mollification, then the folding grid transform
            let p = f.to_trig_poly()?;
            let moll = p.apply_symbol(|k| {
                k.iter()
                    .enumerate()
                    .map(|(i, &ki)| op.avg.symbol(j.get(i), ki))
                    .product()
            });
            eval_on_grid(&moll, &grid)
        }
        FunctionModel::Tensor { .. } => {
            return Err(Error::UnsupportedModel(
                "tensor models use the aliasing path",
            ))
        }
        FunctionModel::Pointwise { f: eval, .. } => {
            let (factor, base) = flatten_averager(&op.avg);
            let shape = grid.shape();
            let mut arr =
                ndarray::ArrayD::from_elem(ndarray::IxDyn(&shape), Complex64::new(0.0, 0.0));
            match base {
                AveragerFamily::Delta => {
                    for (pos, v) in arr.indexed_iter_mut() {
                        let x = grid.node(pos.as_array_view().as_slice().unwrap());
                        *v = factor * eval(&x);
                    }
                }
                AveragerFamily::Char { sigma } => {
                    if op.d != 1 {
                        return Err(Error::UnsupportedModel(
                            "pointwise Kantorovich averaging is univariate",
                        ));
                    }
                    for (pos, v) in arr.indexed_iter_mut() {
                        let x = grid.node(pos.as_array_view().as_slice().unwrap());
                        *v = factor
                            * kantorovich_avg(f, j.get(0), *sigma, x[0])?;
                    }
                }
                AveragerFamily::DeltaCombo { sigma, weights } => {
                    for (pos, v) in arr.indexed_iter_mut() {
                        let x = grid.node(pos.as_array_view().as_slice().unwrap());
                        *v = factor
                            * combo_average(eval.as_ref(), &x, j, *sigma, weights);
                    }
                }
                AveragerFamily::Scaled { .. } => unreachable!("flattened"),
            }
            arr
        }
    };
    let s = grid_to_coeffs(&samples, j)?;
    Ok(extend_by_kernel(&op.kern, &s, j))
}

/// Tensorized shifted-delta average Σ_ν (∏ b_{ν_i}) f(x - πν/2^{j+σ}).
fn combo_average(
    eval: &(dyn Fn(&[f64]) -> Complex64 + Send + Sync),
    x: &[f64],
    j: &LevelVec,
    sigma: u32,
    weights: &[Complex64],
) -> Complex64 {
    let d = x.len();
    let mut idx = vec![0usize; d];
    let mut acc = Complex64::new(0.0, 0.0);
    loop {
        let mut w = Complex64::new(1.0, 0.0);
        let mut y = x.to_vec();
        for (i, &nu) in idx.iter().enumerate() {
            w *= weights[nu];
            y[i] -= std::f64::consts::PI * nu as f64
                / f64::powi(2.0, (j.get(i) + sigma) as i32);
        }
        acc += w * eval(&y);
        let mut i = d;
        loop {
            if i == 0 {
                return acc;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < weights.len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Newton iteration from the Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// The normalized average of a univariate f over
/// [x - π2^{-j-σ}, x + π2^{-j-σ}].
///
/// Exact and spectral models use the closed form (each coefficient picks up
/// a sinc factor); pointwise models use composite Gauss-Legendre with panel
/// doubling until two successive estimates agree to 1e-9.
pub fn kantorovich_avg(f: &FunctionModel, j: u32, sigma: u32, x: f64) -> Result<Complex64> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: f.dim(),
        });
    }
    match f {
        FunctionModel::Exact(_) | FunctionModel::Spectral { .. } | FunctionModel::Tensor { .. } => {
            let avg = AveragerFamily::char_averager(sigma)?;
            match f {
                FunctionModel::Exact(p) => Ok(p
                    .terms()
                    .map(|(k, c)| {
                        c * avg.symbol(j, k[0]) * Complex64::new(0.0, k[0] as f64 * x).exp()
                    })
                    .sum()),
                _ => {
                    let bw = match f {
                        FunctionModel::Spectral { bandwidth, .. } => *bandwidth,
                        FunctionModel::Tensor { factors, .. } => factors[0].bandwidth,
                        _ => unreachable!(),
                    };
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in -bw..=bw {
                        let c = f.fhat(&[k])?;
                        if c.re == 0.0 && c.im == 0.0 {
                            continue;
                        }
                        acc += c * avg.symbol(j, k) * Complex64::new(0.0, k as f64 * x).exp();
                    }
                    Ok(acc)
                }
            }
        }
        FunctionModel::Pointwise { f: eval, .. } => {
            let h = std::f64::consts::PI / f64::powi(2.0, (j + sigma) as i32);
            let (nodes, weights) = gauss_legendre(16);
            let integrate = |panels: usize| -> Complex64 {
                let mut acc = Complex64::new(0.0, 0.0);
                let w = 2.0 * h / panels as f64;
                for p in 0..panels {
                    let a = x - h + p as f64 * w;
                    for (t, gw) in nodes.iter().zip(&weights) {
                        let y = a + 0.5 * w * (t + 1.0);
                        acc += gw * 0.5 * w * eval(&[y]);
                    }
                }
                acc / (2.0 * h)
            };
            let mut prev = integrate(1);
            let mut panels = 2usize;
            loop {
                let cur = integrate(panels);
                let diff = (cur - prev).norm();
                if diff < 1e-9 {
                    return Ok(cur);
                }
                if panels > 1 << 12 {
                    return Err(Error::QuadratureNotConverged {
                        est: diff,
                        tol: 1e-9,
                    });
                }
                prev = cur;
                panels *= 2;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel_err(a: &TrigPoly, b: &TrigPoly) -> f64 {
        a.sub(b).coeff_l2() / b.coeff_l2().max(1e-300)
    }

    fn random_poly(rng: &mut ChaCha8Rng, d: usize, bw: i64, terms: usize) -> TrigPoly {
        let mut f = TrigPoly::new(d);
        for _ in 0..terms {
            let k: Vec<i64> = (0..d).map(|_| rng.gen_range(-bw..=bw)).collect();
            f.add_coeff(&k, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        f
    }

    #[test]
    fn constant_is_preserved() {
        let op = named_operator(OpName::I, 2, 2).unwrap();
        let f = FunctionModel::exact(TrigPoly::constant(2, c(1.0, 0.0)));
        for j in [vec![0, 0], vec![2, 1], vec![3, 3]] {
            let out = apply_aliasing(&op, &f, &LevelVec::new(j)).unwrap();
            assert!((out.coeff(&[0, 0]) - c(1.0, 0.0)).norm() < 1e-14);
            assert_eq!(out.num_terms(), 1);
        }
    }

    #[test]
    fn single_frequency_dirichlet_char() {
        // Q_j e^{ix} = sinc(2^{-j-2}π) e^{ix} for the (Dirichlet, char σ=2)
        // pair at j ≥ 2
        let op = QuasiInterpOp::new(
            KernelFamily::dirichlet(),
            AveragerFamily::char_averager(2).unwrap(),
            1,
        );
        let f = FunctionModel::exact(TrigPoly::exponential(&[1]));
        for j in 2..=8u32 {
            let out = apply_aliasing(&op, &f, &LevelVec::uniform(j, 1)).unwrap();
            let arg = PI / f64::powi(2.0, (j + 2) as i32);
            let want = arg.sin() / arg;
            assert!((out.coeff(&[1]) - c(want, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn high_frequency_aliases_to_constant_term() {
        // c_0(Q_j e^{i 2^u x}) equals the averager symbol at 2^u for j ≤ u
        let op = QuasiInterpOp::new(
            KernelFamily::dirichlet(),
            AveragerFamily::char_averager(2).unwrap(),
            1,
        );
        for u in 3..=8u32 {
            let f = FunctionModel::exact(TrigPoly::exponential(&[1i64 << u]));
            for j in 0..=u {
                let out = apply_aliasing(&op, &f, &LevelVec::uniform(j, 1)).unwrap();
                let want = op.avg.symbol(j, 1i64 << u);
                assert!(
                    (out.coeff(&[0]) - want).norm() < 1e-14,
                    "u={u}, j={j}"
                );
            }
        }
    }

    #[test]
    fn sampled_matches_aliasing_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let ops = [
            named_operator(OpName::I, 2, 2).unwrap(),
            named_operator(OpName::K, 2, 2).unwrap(),
            named_operator(OpName::KStar, 2, 2).unwrap(),
        ];
        for op in &ops {
            for _ in 0..10 {
                let j = LevelVec::new(vec![rng.gen_range(0..=4), rng.gen_range(0..=4)]);
                let f = FunctionModel::exact(random_poly(&mut rng, 2, 20, 8));
                let a = apply_aliasing(op, &f, &j).unwrap();
                let b = apply_sampled(op, &f, &j).unwrap();
                assert!(rel_err(&b, &a) < 1e-10, "{} at {j:?}", op.label());
            }
        }
    }

    #[test]
    fn reproduction_modified_dirichlet_char() {
        let op = QuasiInterpOp::new(
            KernelFamily::modified_dirichlet(2).unwrap(),
            AveragerFamily::char_averager(2).unwrap(),
            1,
        );
        for j in 0..=6u32 {
            let h = if j == 0 { 1 } else { 1i64 << (j - 1) };
            for k in -h..h.max(1) {
                if !crate::fourier::in_aj(j, k) {
                    continue;
                }
                let p = TrigPoly::exponential(&[k]);
                let f = FunctionModel::exact(p.clone());
                let out = apply_sampled(&op, &f, &LevelVec::uniform(j, 1)).unwrap();
                assert!(out.sub(&p).coeff_l2() < 1e-12, "j={j}, k={k}");
            }
        }
    }

    #[test]
    fn pointwise_sampling_interpolates() {
        // (Dirichlet, delta) interpolates the samples of any function
        let op = QuasiInterpOp::new(KernelFamily::dirichlet(), AveragerFamily::delta(), 1);
        let f = FunctionModel::Pointwise {
            d: 1,
            f: Arc::new(|x: &[f64]| c((x[0].cos() + 0.3 * (2.0 * x[0]).sin()).exp(), 0.0)),
        };
        let j = LevelVec::uniform(4, 1);
        let out = apply_sampled(&op, &f, &j).unwrap();
        let grid = DyadicGrid::new(j);
        for x in grid.axis_nodes(0) {
            let want = c((x.cos() + 0.3 * (2.0 * x).sin()).exp(), 0.0);
            assert!((out.eval(&[x]) - want).norm() < 1e-10);
        }
    }

    #[test]
    fn tensor_input_product_structure() {
        // d=2 tensor exponential equals the product of univariate outputs
        let op = named_operator(OpName::K, 2, 2).unwrap();
        let op1 = named_operator(OpName::K, 1, 2).unwrap();
        let f2 = FunctionModel::exact(TrigPoly::exponential(&[1, 1]));
        let f1 = FunctionModel::exact(TrigPoly::exponential(&[1]));
        let j = LevelVec::new(vec![3, 4]);
        let out = apply_aliasing(&op, &f2, &j).unwrap();
        let a = apply_aliasing(&op1, &f1, &LevelVec::uniform(3, 1)).unwrap();
        let b = apply_aliasing(&op1, &f1, &LevelVec::uniform(4, 1)).unwrap();
        for (k, v) in out.terms() {
            let want = a.coeff(&[k[0]]) * b.coeff(&[k[1]]);
            assert!((v - want).norm() < 1e-14);
        }
    }

    #[test]
    fn tensor_model_matches_exact_model() {
        let fac = UnivariateSpectral {
            coeff: Arc::new(|k: i64| c(1.0 / (1 + k * k) as f64, 0.0)),
            bandwidth: 12,
        };
        let tensor = FunctionModel::Tensor {
            factors: vec![fac.clone(), fac.clone()],
            tail: 0.0,
        };
        let exact = FunctionModel::exact(tensor.to_trig_poly().unwrap());
        let op = named_operator(OpName::KStar, 2, 2).unwrap();
        let j = LevelVec::new(vec![2, 3]);
        let a = apply_aliasing(&op, &tensor, &j).unwrap();
        let b = apply_aliasing(&op, &exact, &j).unwrap();
        assert!(rel_err(&a, &b) < 1e-12);
    }

    #[test]
    fn convolution_operator_is_symbol_multiplication() {
        let op = named_operator(OpName::V, 1, 2).unwrap();
        for j in 0..=6u32 {
            for k in [0i64, 1, 3, 7] {
                let f = FunctionModel::exact(TrigPoly::exponential(&[k]));
                let out = apply_aliasing(&op, &f, &LevelVec::uniform(j, 1)).unwrap();
                let want = op.kern.symbol(j, k);
                assert!((out.coeff(&[k]) - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn kstar_preserves_plateau_coefficients() {
        // the inverse-sinc correction makes φ̂φ̃̂ = 1 wherever η = 1, so the
        // coefficient at a plateau frequency passes through unchanged; the
        // operator is not a projection, and the aliasing residue lands
        // strictly on the kernel ramp |k'| > ρ2^j
        let op = named_operator(OpName::KStar, 1, 2).unwrap();
        let j = 5u32;
        for k in [-7i64, 0, 5, 15] {
            let f = FunctionModel::exact(TrigPoly::exponential(&[k]));
            let out = apply_sampled(&op, &f, &LevelVec::uniform(j, 1)).unwrap();
            assert!((out.coeff(&[k]) - c(1.0, 0.0)).norm() < 1e-12, "k={k}");
            for (kk, v) in out.terms() {
                if kk[0] != k && v.norm() > 1e-12 {
                    assert!(kk[0].abs() > 16, "residue at {} inside plateau", kk[0]);
                }
            }
        }
    }

    #[test]
    fn linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let op = named_operator(OpName::K, 1, 2).unwrap();
        let f = random_poly(&mut rng, 1, 20, 6);
        let g = random_poly(&mut rng, 1, 20, 6);
        let j = LevelVec::uniform(3, 1);
        let alpha = c(0.7, -0.2);
        let lhs = apply_aliasing(
            &op,
            &FunctionModel::exact(f.scale(alpha).add(&g)),
            &j,
        )
        .unwrap();
        let qf = apply_aliasing(&op, &FunctionModel::exact(f), &j).unwrap();
        let qg = apply_aliasing(&op, &FunctionModel::exact(g), &j).unwrap();
        let rhs = qf.scale(alpha).add(&qg);
        assert!(rel_err(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn output_stays_within_kernel_bandwidth() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for op in [
            named_operator(OpName::I, 1, 2).unwrap(),
            named_operator(OpName::KStar, 1, 2).unwrap(),
        ] {
            for j in 0..=5u32 {
                let f = FunctionModel::exact(random_poly(&mut rng, 1, 100, 10));
                let out = apply_aliasing(&op, &f, &LevelVec::uniform(j, 1)).unwrap();
                let b = op.kern.bandwidth(j);
                for (k, _) in out.terms() {
                    assert!(k[0].abs() < b);
                }
            }
        }
    }

    #[test]
    fn kantorovich_avg_of_constant_is_one() {
        let f = FunctionModel::exact(TrigPoly::constant(1, c(1.0, 0.0)));
        for (j, sigma, x) in [(0, 1, 0.0), (3, 2, 0.7), (5, 3, -2.1)] {
            let v = kantorovich_avg(&f, j, sigma, x).unwrap();
            assert!((v - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn kantorovich_avg_unit_frequency() {
        // average of e^{it} over [-π/4, π/4] is sinc(π/4)
        let f = FunctionModel::exact(TrigPoly::exponential(&[1]));
        let v = kantorovich_avg(&f, 0, 2, 0.0).unwrap();
        let want = (PI / 4.0).sin() / (PI / 4.0);
        assert!((v - c(want, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn kantorovich_quadrature_matches_closed_form() {
        let pw = FunctionModel::Pointwise {
            d: 1,
            f: Arc::new(|x: &[f64]| c(0.0, 3.0 * x[0]).exp() + c(0.5, 0.0) * c(0.0, -x[0]).exp()),
        };
        let mut ex = TrigPoly::new(1);
        ex.add_coeff(&[3], c(1.0, 0.0));
        ex.add_coeff(&[-1], c(0.5, 0.0));
        let ex = FunctionModel::exact(ex);
        for (j, sigma, x) in [(0u32, 2u32, 0.3), (2, 1, -1.0), (4, 3, 2.2)] {
            let a = kantorovich_avg(&pw, j, sigma, x).unwrap();
            let b = kantorovich_avg(&ex, j, sigma, x).unwrap();
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn kantorovich_avg_of_square_wave_at_jump_is_zero() {
        let pw = FunctionModel::Pointwise {
            d: 1,
            f: Arc::new(|x: &[f64]| c(x[0].sin().signum(), 0.0)),
        };
        let v = kantorovich_avg(&pw, 2, 2, 0.0).unwrap();
        assert!(v.norm() < 1e-9);
    }

    #[test]
    fn delta_combo_sampled_matches_aliasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let weights = vec![c(0.5, 0.0), c(0.3, 0.0), c(0.2, 0.0)];
        let op = QuasiInterpOp::new(
            KernelFamily::dirichlet(),
            AveragerFamily::delta_combo(2, weights).unwrap(),
            1,
        );
        let f = random_poly(&mut rng, 1, 10, 6);
        let j = LevelVec::uniform(4, 1);
        let a = apply_aliasing(&op, &FunctionModel::exact(f.clone()), &j).unwrap();
        let fc = f.clone();
        let pw = FunctionModel::Pointwise {
            d: 1,
            f: Arc::new(move |x: &[f64]| fc.eval(x)),
        };
        let b = apply_sampled(&op, &pw, &j).unwrap();
        assert!(rel_err(&b, &a) < 1e-10);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (nodes, weights) = gauss_legendre(16);
        assert_eq!(nodes.len(), 16);
        // degree-31 monomial integrals are exact for the 16-point rule
        for p in 0..=31usize {
            let got: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(x, w)| w * x.powi(p as i32))
                .sum();
            let want = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((got - want).abs() < 1e-12, "degree {p}");
        }
    }
}
