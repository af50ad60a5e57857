//! Level-indexed Fourier symbols for reconstruction kernels φ_j and
//! averagers φ̃_j.
//!
//! A kernel family assigns to each level j a trigonometric polynomial via
//! its symbol k ↦ φ̂_j(k); an averager family assigns either an integrable
//! function (characteristic averagers), the periodic delta, or a finite
//! combination of shifted deltas. Symbols are evaluated lazily per (j, k);
//! k = 0 singularities (sinc and its reciprocal) take the explicit limit
//! value 1 so that reproduction identities hold exactly.

use num_complex::Complex64;

use crate::fourier::in_aj;
use crate::{Error, Result};

/// sin(x)/x with the limit value 1 at x = 0.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Piecewise-linear de la Vallée Poussin generator: 1 on [-ρ, ρ], 0 outside
/// (-support, support), linear in between.
pub fn dlvp_generator(rho: f64, support: f64, xi: f64) -> f64 {
    let a = xi.abs();
    if a <= rho {
        1.0
    } else if a >= support {
        0.0
    } else {
        (support - a) / (support - rho)
    }
}

/// C^∞ de la Vallée Poussin generator: same plateau and support as the
/// piecewise-linear one, but with a smooth-partition ramp that is flat to
/// all orders at both junctions.
///
/// Flatness at the support edge matters quantitatively, not just
/// cosmetically: on the 2^j-point lattice the alias image of a low
/// frequency k lands at k ∓ 2^j, a distance k·2^{-j} inside the edge of
/// the ramp. A generator with nonzero edge slope passes that image with
/// weight ≈ k·2^{-j}, which caps every sampled-operator error at O(2^{-j})
/// regardless of the smoothness of f. The smooth ramp makes this leakage
/// decay faster than any power of 2^{-j}.
pub fn dlvp_generator_smooth(rho: f64, support: f64, xi: f64) -> f64 {
    fn h(x: f64) -> f64 {
        if x > 0.0 {
            (-1.0 / x).exp()
        } else {
            0.0
        }
    }
    let a = xi.abs();
    if a <= rho {
        1.0
    } else if a >= support {
        0.0
    } else {
        let t = (a - rho) / (support - rho);
        h(1.0 - t) / (h(1.0 - t) + h(t))
    }
}

fn pow2(j: u32) -> f64 {
    f64::powi(2.0, j as i32)
}

/// The characteristic-averager symbol sinc(πk/2^{j+σ}), with exact zeros at
/// nonzero integer multiples of π so condition scans see clean cancellation.
fn char_symbol(j: u32, sigma: u32, k: i64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let t = k as f64 / pow2(j + sigma);
    if t.fract() == 0.0 {
        0.0
    } else {
        sinc(std::f64::consts::PI * t)
    }
}

/// Reconstruction-kernel families, indexed by level j through their symbols.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    /// De la Vallée Poussin kernel with piecewise-linear generator.
    Dlvp { rho: f64, support: f64, smooth: bool },
    /// Dirichlet kernel: symbol 1 on A_j, 0 elsewhere.
    Dirichlet,
    /// Dirichlet kernel with inverse-sinc correction on A_j.
    ModifiedDirichlet { sigma: u32 },
    /// Finite combination of shifted Dirichlet kernels,
    /// symbol 1_{A_j}(k) Σ_ν a_ν e^{-iνπk/2^{j+σ}}.
    ShiftedDirichletCombo { sigma: u32, coeffs: Vec<Complex64> },
    /// De la Vallée Poussin kernel with inverse-sinc correction, the
    /// reconstruction kernel of the K* operator family.
    ModifiedDlvp { rho: f64, support: f64, sigma: u32, smooth: bool },
}

impl KernelFamily {
    pub fn dlvp(rho: f64, support: f64) -> Result<KernelFamily> {
        if !(rho > 0.0 && rho < support) {
            return Err(Error::InvalidParameter(format!(
                "dlvp kernel requires 0 < rho < support, got rho={rho}, support={support}"
            )));
        }
        Ok(KernelFamily::Dlvp { rho, support, smooth: false })
    }

    pub fn dirichlet() -> KernelFamily {
        KernelFamily::Dirichlet
    }

    pub fn modified_dirichlet(sigma: u32) -> Result<KernelFamily> {
        if sigma < 1 {
            return Err(Error::InvalidParameter(
                "modified Dirichlet kernel requires sigma >= 1".into(),
            ));
        }
        Ok(KernelFamily::ModifiedDirichlet { sigma })
    }

    pub fn shifted_dirichlet_combo(sigma: u32, coeffs: Vec<Complex64>) -> Result<KernelFamily> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "shifted Dirichlet combination needs at least one coefficient".into(),
            ));
        }
        Ok(KernelFamily::ShiftedDirichletCombo { sigma, coeffs })
    }

    pub fn modified_dlvp(rho: f64, support: f64, sigma: u32) -> Result<KernelFamily> {
        if !(rho > 0.0 && rho < support) {
            return Err(Error::InvalidParameter(format!(
                "modified dlvp kernel requires 0 < rho < support, got rho={rho}, support={support}"
            )));
        }
        Ok(KernelFamily::ModifiedDlvp { rho, support, sigma, smooth: false })
    }

    /// Like [`Self::dlvp`], with the C^∞ generator. This is the variant the
    /// named sampled operators use; see [`dlvp_generator_smooth`] for why
    /// edge flatness is required there.
    pub fn dlvp_smooth(rho: f64, support: f64) -> Result<KernelFamily> {
        match Self::dlvp(rho, support)? {
            KernelFamily::Dlvp { rho, support, .. } => {
                Ok(KernelFamily::Dlvp { rho, support, smooth: true })
            }
            _ => unreachable!(),
        }
    }

    /// Like [`Self::modified_dlvp`], with the C^∞ generator.
    pub fn modified_dlvp_smooth(rho: f64, support: f64, sigma: u32) -> Result<KernelFamily> {
        match Self::modified_dlvp(rho, support, sigma)? {
            KernelFamily::ModifiedDlvp { rho, support, sigma, .. } => Ok(
                KernelFamily::ModifiedDlvp { rho, support, sigma, smooth: true },
            ),
            _ => unreachable!(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Dlvp { smooth: true, .. } => "dlvp_smooth",
            KernelFamily::ModifiedDlvp { smooth: true, .. } => "modified_dlvp_smooth",
            KernelFamily::Dlvp { .. } => "dlvp",
            KernelFamily::Dirichlet => "dirichlet",
            KernelFamily::ModifiedDirichlet { .. } => "modified_dirichlet",
            KernelFamily::ShiftedDirichletCombo { .. } => "shifted_dirichlet_combo",
            KernelFamily::ModifiedDlvp { .. } => "modified_dlvp",
        }
    }

    /// The symbol φ̂_j(k).
    pub fn symbol(&self, j: u32, k: i64) -> Complex64 {
        let re = |x: f64| Complex64::new(x, 0.0);
        match self {
            KernelFamily::Dlvp { rho, support, smooth } => {
                let gen = if *smooth { dlvp_generator_smooth } else { dlvp_generator };
                re(gen(*rho, *support, k as f64 / pow2(j)))
            }
            KernelFamily::Dirichlet => {
                if in_aj(j, k) {
                    re(1.0)
                } else {
                    re(0.0)
                }
            }
            KernelFamily::ModifiedDirichlet { sigma } => {
                if !in_aj(j, k) {
                    re(0.0)
                } else if k == 0 {
                    re(1.0)
                } else {
                    let x = std::f64::consts::PI * k as f64 / pow2(j + sigma);
                    debug_assert!(x.sin() != 0.0, "inverse sinc pole inside A_j");
                    re(x / x.sin())
                }
            }
            KernelFamily::ShiftedDirichletCombo { sigma, coeffs } => {
                if !in_aj(j, k) {
                    return re(0.0);
                }
                let xi = std::f64::consts::PI * k as f64 / pow2(j + sigma);
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(nu, a)| a * Complex64::new(0.0, -(nu as f64) * xi).exp())
                    .sum()
            }
            KernelFamily::ModifiedDlvp { rho, support, sigma, smooth } => {
                let gen = if *smooth { dlvp_generator_smooth } else { dlvp_generator };
                let eta = gen(*rho, *support, k as f64 / pow2(j));
                if eta == 0.0 {
                    re(0.0)
                } else if k == 0 {
                    re(1.0)
                } else {
                    let x = std::f64::consts::PI * k as f64 / pow2(j + sigma);
                    re(eta * x / x.sin())
                }
            }
        }
    }

    /// A bandwidth bound B_j with φ̂_j(k) = 0 for |k| ≥ B_j.
    pub fn bandwidth(&self, j: u32) -> i64 {
        match self {
            KernelFamily::Dlvp { support, .. } | KernelFamily::ModifiedDlvp { support, .. } => {
                (support * pow2(j)).ceil() as i64
            }
            KernelFamily::Dirichlet
            | KernelFamily::ModifiedDirichlet { .. }
            | KernelFamily::ShiftedDirichletCombo { .. } => {
                if j == 0 {
                    1
                } else {
                    (1i64 << (j - 1)) + 1
                }
            }
        }
    }

    /// Whether φ̂_j(0) = 1 holds (up to rounding) for this family.
    pub fn is_normalized(&self) -> bool {
        (self.symbol(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-12
    }
}

/// Classification of averager families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AveragerKind {
    Function,
    Delta,
    DeltaCombination,
}

/// Averager families φ̃_j defining the sample mollification of a
/// quasi-interpolation operator.
#[derive(Debug, Clone, PartialEq)]
pub enum AveragerFamily {
    /// Periodic delta: symbol ≡ 1; point sampling.
    Delta,
    /// Normalized characteristic function of [-π/2^{j+σ}, π/2^{j+σ}]
    /// (Kantorovich averaging); symbol sinc(πk/2^{j+σ}).
    Char { sigma: u32 },
    /// Finite combination Σ_ν b_ν δ(· - πν/2^{j+σ}) of shifted deltas.
    DeltaCombo { sigma: u32, weights: Vec<Complex64> },
    /// Scalar multiple of another family.
    Scaled { factor: Complex64, inner: Box<AveragerFamily> },
}

impl AveragerFamily {
    pub fn delta() -> AveragerFamily {
        AveragerFamily::Delta
    }

    pub fn char_averager(sigma: u32) -> Result<AveragerFamily> {
        if sigma < 1 {
            return Err(Error::InvalidParameter(
                "characteristic averager requires sigma >= 1".into(),
            ));
        }
        Ok(AveragerFamily::Char { sigma })
    }

    pub fn delta_combo(sigma: u32, weights: Vec<Complex64>) -> Result<AveragerFamily> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter(
                "delta combination needs at least one weight".into(),
            ));
        }
        Ok(AveragerFamily::DeltaCombo { sigma, weights })
    }

    pub fn scaled(factor: Complex64, inner: AveragerFamily) -> AveragerFamily {
        AveragerFamily::Scaled {
            factor,
            inner: Box::new(inner),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AveragerFamily::Delta => "delta",
            AveragerFamily::Char { .. } => "char",
            AveragerFamily::DeltaCombo { .. } => "delta_combo",
            AveragerFamily::Scaled { .. } => "scaled",
        }
    }

    pub fn kind(&self) -> AveragerKind {
        match self {
            AveragerFamily::Delta => AveragerKind::Delta,
            AveragerFamily::Char { .. } => AveragerKind::Function,
            AveragerFamily::DeltaCombo { .. } => AveragerKind::DeltaCombination,
            AveragerFamily::Scaled { inner, .. } => inner.kind(),
        }
    }

    /// The symbol φ̃̂_j(k).
    pub fn symbol(&self, j: u32, k: i64) -> Complex64 {
        match self {
            AveragerFamily::Delta => Complex64::new(1.0, 0.0),
            AveragerFamily::Char { sigma } => Complex64::new(char_symbol(j, *sigma, k), 0.0),
            AveragerFamily::DeltaCombo { sigma, weights } => {
                let xi = std::f64::consts::PI * k as f64 / pow2(j + sigma);
                weights
                    .iter()
                    .enumerate()
                    .map(|(nu, b)| b * Complex64::new(0.0, -(nu as f64) * xi).exp())
                    .sum()
            }
            AveragerFamily::Scaled { factor, inner } => factor * inner.symbol(j, k),
        }
    }
}

/// Solve a small complex linear system by Gaussian elimination with partial
/// pivoting. `a` is row-major n x n.
fn solve_complex(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        if a[piv][col].norm() < 1e-14 {
            return Err(Error::SingularSystem("shift-coefficient solver"));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                let v = a[col][c];
                a[row][c] -= f * v;
            }
            let bb = b[col];
            b[row] -= f * bb;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for c in row + 1..n {
            s -= a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    Ok(x)
}

/// Output of [`solve_shift_coefficients`].
#[derive(Debug, Clone)]
pub struct ShiftSolution {
    /// Shift coefficients a_0 .. a_{s-1}.
    pub coeffs: Vec<Complex64>,
    /// Leading defect coefficient α: 1 - sinc(ξ) Σ a_ν e^{-iνξ} = αξ^s + O(ξ^{s+1}).
    pub leading: Complex64,
}

/// Taylor coefficient of ξ^t in sinc(ξ)·e^{-iνξ}.
fn sinc_shift_taylor(t: usize, nu: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut m = 0usize;
    while 2 * m <= t {
        // sinc term: (-1)^m / (2m+1)!
        let mut sincc = if m % 2 == 0 { 1.0 } else { -1.0 };
        for q in 2..=(2 * m + 1) {
            sincc /= q as f64;
        }
        // exponential term: (-iν)^{t-2m} / (t-2m)!
        let p = t - 2 * m;
        let mut ex = Complex64::new(1.0, 0.0);
        let base = Complex64::new(0.0, -(nu as f64));
        for q in 1..=p {
            ex = ex * base / q as f64;
        }
        acc += sincc * ex;
        m += 1;
    }
    acc
}

/// Coefficients a_0..a_{s-1} zeroing the Taylor coefficients of orders
/// 0..s-1 of 1 - sinc(ξ) Σ_ν a_ν e^{-iνξ} at ξ = 0, together with the
/// leading coefficient of the residual defect.
///
/// The system is square: s unknowns against the s lowest orders; it is
/// independent of the dilation level at which the shifts are later placed.
pub fn solve_shift_coefficients(s: usize) -> Result<ShiftSolution> {
    if s < 2 {
        return Err(Error::InvalidParameter(
            "shift-coefficient order must be at least 2".into(),
        ));
    }
    let a: Vec<Vec<Complex64>> = (0..s)
        .map(|t| (0..s).map(|nu| sinc_shift_taylor(t, nu)).collect())
        .collect();
    let mut rhs = vec![Complex64::new(0.0, 0.0); s];
    rhs[0] = Complex64::new(1.0, 0.0);
    let coeffs = solve_complex(a, rhs)?;
    // leading defect: order-s Taylor coefficient of 1 - sinc Σ a e^{-iνξ}
    let leading = -coeffs
        .iter()
        .enumerate()
        .map(|(nu, a)| a * sinc_shift_taylor(s, nu))
        .sum::<Complex64>();
    Ok(ShiftSolution { coeffs, leading })
}

/// Estimated vanishing order of the defect 1 - φ̂_j(k)·φ̃̂_j(k) as
/// ξ = 2^{-j}k → 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DefectOrder {
    Finite(u32),
    /// Defect identically zero on the sampled range.
    Infinite,
}

#[derive(Debug, Clone, Copy)]
pub struct DefectEstimate {
    pub order: DefectOrder,
    /// Leading coefficient estimate in the variable ξ = 2^{-j}k
    /// (meaningless for `Infinite`).
    pub leading: Complex64,
}

/// Numerically estimate the vanishing order of g(ξ) = 1 - φ̂_j(k)φ̃̂_j(k) at
/// ξ = 0, via the log-log slope of |g| over k = 1..K at level j.
///
/// Level j trades resolution against cancellation noise; j around 10 keeps
/// ξ small enough for the leading term to dominate while |g| stays far above
/// the 1e-16 floor of the `1 - (...)` subtraction. A slope that rounds
/// poorly is reported as indeterminate rather than guessed.
pub fn taylor_defect(
    kern: &KernelFamily,
    avg: &AveragerFamily,
    j: u32,
) -> Result<DefectEstimate> {
    const K: i64 = 6;
    let mut xs = Vec::new();
    let mut gs = Vec::new();
    for k in 1..=K {
        let g = Complex64::new(1.0, 0.0) - kern.symbol(j, k) * avg.symbol(j, k);
        xs.push(k as f64 / pow2(j));
        gs.push(g);
    }
    if gs.iter().all(|g| g.norm() < 1e-12) {
        return Ok(DefectEstimate {
            order: DefectOrder::Infinite,
            leading: Complex64::new(0.0, 0.0),
        });
    }
    // least-squares slope of ln|g| against ln ξ
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = gs.iter().map(|g| g.norm().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let resid = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let pred = my + slope * (x - mx);
            (y - pred) * (y - pred)
        })
        .sum::<f64>()
        / n)
        .sqrt();
    let order = slope.round();
    if (slope - order).abs() > 0.05 || resid > 0.05 || order < 0.0 {
        return Err(Error::IndeterminateOrder { slope, resid });
    }
    let order = order as u32;
    let leading = gs
        .iter()
        .zip(&xs)
        .map(|(g, x)| g / x.powi(order as i32))
        .sum::<Complex64>()
        / gs.len() as f64;
    Ok(DefectEstimate {
        order: DefectOrder::Finite(order),
        leading,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn dlvp_generator_values() {
        assert_eq!(dlvp_generator(1.0, 2.0, 0.0), 1.0);
        // j=3, k=12: η(1.5) = 0.5 on the linear ramp
        let s = KernelFamily::dlvp(1.0, 2.0).unwrap().symbol(3, 12);
        assert!((s.re - 0.5).abs() < 1e-15);
        // vanishes at and beyond the support edge
        for j in 0..6u32 {
            let kern = KernelFamily::dlvp(1.0, 2.0).unwrap();
            let b = kern.bandwidth(j);
            for k in [b, b + 1, 2 * b] {
                assert_eq!(kern.symbol(j, k).norm(), 0.0);
                assert_eq!(kern.symbol(j, -k).norm(), 0.0);
            }
        }
    }

    #[test]
    fn dirichlet_indicator_of_aj() {
        let k = KernelFamily::dirichlet();
        assert_eq!(k.symbol(2, -2).re, 1.0);
        assert_eq!(k.symbol(2, 2).re, 0.0);
        assert_eq!(k.symbol(0, 0).re, 1.0);
        for j in 0..=8u32 {
            assert_eq!(k.symbol(j, 0).re, 1.0);
        }
    }

    #[test]
    fn modified_dirichlet_values() {
        let k = KernelFamily::modified_dirichlet(2).unwrap();
        assert_eq!(k.symbol(5, 0).re, 1.0);
        // σ=2, j=3, k=-4: arg = -π/8; the inverse sinc is even
        let x = PI / 8.0;
        let got = k.symbol(3, -4).re;
        assert!((got - x / x.sin()).abs() < 1e-15);
        assert!((got - 1.0262).abs() < 1e-3);
        // the right endpoint k = 2^{j-1} lies outside A_j
        assert_eq!(k.symbol(3, 4).norm(), 0.0);
    }

    #[test]
    fn modified_dirichlet_cancels_char_averager_on_aj() {
        let kern = KernelFamily::modified_dirichlet(2).unwrap();
        let avg = AveragerFamily::char_averager(2).unwrap();
        for j in 0..=12u32 {
            let h = if j == 0 { 1 } else { 1i64 << (j - 1) };
            for k in -h..h.max(1) {
                if !in_aj(j, k) {
                    continue;
                }
                let prod = kern.symbol(j, k) * avg.symbol(j, k);
                assert!(
                    (prod - Complex64::new(1.0, 0.0)).norm() < 1e-12,
                    "j={j}, k={k}: {prod}"
                );
            }
        }
    }

    #[test]
    fn char_averager_symbol_values() {
        let a = AveragerFamily::char_averager(2).unwrap();
        assert_eq!(a.symbol(3, 0).re, 1.0);
        // σ=2, j=0, k=2 → sinc(π/2) = 2/π
        assert!((a.symbol(0, 2).re - 2.0 / PI).abs() < 1e-15);
        // vanishes at k = 2^u whenever j ≤ u - σ
        for u in 3..=10u32 {
            for j in 0..=(u - 2) {
                assert_eq!(a.symbol(j, 1i64 << u).norm(), 0.0);
            }
        }
        // real, even, bounded by 1
        for j in 0..=6u32 {
            for k in -40i64..=40 {
                let s = a.symbol(j, k);
                assert_eq!(s.im, 0.0);
                assert_eq!(s, a.symbol(j, -k));
                assert!(s.norm() <= 1.0 + 1e-15);
            }
        }
    }

    #[test]
    fn delta_symbol_is_one() {
        let a = AveragerFamily::delta();
        for j in 0..=8u32 {
            for k in [-17i64, 0, 3, 1024] {
                assert_eq!(a.symbol(j, k), Complex64::new(1.0, 0.0));
            }
        }
        // single unshifted delta with weight 1 is the same symbol
        let combo = AveragerFamily::delta_combo(2, vec![Complex64::new(1.0, 0.0)]).unwrap();
        for j in 0..=6u32 {
            for k in -20i64..=20 {
                assert!((combo.symbol(j, k) - a.symbol(j, k)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn shifted_combo_single_term_is_dirichlet() {
        let combo =
            KernelFamily::shifted_dirichlet_combo(3, vec![Complex64::new(1.0, 0.0)]).unwrap();
        let dir = KernelFamily::dirichlet();
        for j in 0..=6u32 {
            for k in -40i64..=40 {
                assert!((combo.symbol(j, k) - dir.symbol(j, k)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn shifted_combo_symbol_formula() {
        let a = [
            Complex64::new(6.0 / 7.0, 0.0),
            Complex64::new(2.0 / 7.0, 0.0),
            Complex64::new(-1.0 / 7.0, 0.0),
        ];
        let combo = KernelFamily::shifted_dirichlet_combo(2, a.to_vec()).unwrap();
        // normalization at k=0: Σ a_ν = 1
        assert!((combo.symbol(4, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        // direct formula at a generic k in A_j
        let (j, k) = (5u32, 7i64);
        let xi = PI * k as f64 / f64::powi(2.0, (j + 2) as i32);
        let want: Complex64 = a
            .iter()
            .enumerate()
            .map(|(nu, av)| av * Complex64::new(0.0, -(nu as f64) * xi).exp())
            .sum();
        assert!((combo.symbol(j, k) - want).norm() < 1e-15);
    }

    #[test]
    fn bandwidth_bound_holds() {
        let fams = [
            KernelFamily::dlvp(0.5, 1.0).unwrap(),
            KernelFamily::dirichlet(),
            KernelFamily::modified_dirichlet(2).unwrap(),
            KernelFamily::modified_dlvp(0.5, 1.0, 2).unwrap(),
        ];
        for kern in &fams {
            for j in 0..=8u32 {
                let b = kern.bandwidth(j);
                assert!(b <= 2i64 << j, "B_j must stay within 2^{{j+1}}");
                for k in b..=(2 * b) {
                    assert_eq!(kern.symbol(j, k).norm(), 0.0, "{} j={j} k={k}", kern.name());
                    assert_eq!(kern.symbol(j, -k).norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn solver_order_two_is_single_unshifted_delta() {
        let sol = solve_shift_coefficients(2).unwrap();
        assert!((sol.coeffs[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(sol.coeffs[1].norm() < 1e-12);
        // defect 1 - sinc(ξ) = ξ²/6 + O(ξ⁴)
        assert!((sol.leading - Complex64::new(1.0 / 6.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn solver_order_three_closed_form() {
        // hand elimination of the 3x3 system gives (5/6, 1/3, -1/6)
        let sol = solve_shift_coefficients(3).unwrap();
        let want = [5.0 / 6.0, 1.0 / 3.0, -1.0 / 6.0];
        for (c, w) in sol.coeffs.iter().zip(want) {
            assert!((c - Complex64::new(w, 0.0)).norm() < 1e-12, "{c} vs {w}");
        }
        let sum: Complex64 = sol.coeffs.iter().sum();
        assert!((sum - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn solver_outputs_have_measured_order() {
        for s in 2..=5usize {
            let sol = solve_shift_coefficients(s).unwrap();
            let sum: Complex64 = sol.coeffs.iter().sum();
            assert!((sum - Complex64::new(1.0, 0.0)).norm() < 1e-10);
            let kern = KernelFamily::shifted_dirichlet_combo(2, sol.coeffs.clone()).unwrap();
            let avg = AveragerFamily::char_averager(2).unwrap();
            // level 6 keeps the order-4 and order-5 defects above the
            // cancellation noise of the 1 - (...) subtraction
            let est = taylor_defect(&kern, &avg, 6).unwrap();
            match est.order {
                DefectOrder::Finite(o) => assert!(o as usize >= s, "s={s}, measured {o}"),
                DefectOrder::Infinite => {}
            }
        }
    }

    #[test]
    fn defect_dirichlet_char_is_order_two() {
        let kern = KernelFamily::dirichlet();
        let avg = AveragerFamily::char_averager(2).unwrap();
        let est = taylor_defect(&kern, &avg, 12).unwrap();
        assert_eq!(est.order, DefectOrder::Finite(2));
        // 1 - sinc(πξ/4) = (π/4)²ξ²/6 + ...
        let want = (PI / 4.0).powi(2) / 6.0;
        assert!((est.leading.re - want).abs() < 1e-3 * want);
    }

    #[test]
    fn defect_modified_dirichlet_char_is_infinite() {
        let kern = KernelFamily::modified_dirichlet(2).unwrap();
        let avg = AveragerFamily::char_averager(2).unwrap();
        let est = taylor_defect(&kern, &avg, 12).unwrap();
        assert_eq!(est.order, DefectOrder::Infinite);
    }

    #[test]
    fn defect_dlvp_delta_is_infinite_on_plateau() {
        let kern = KernelFamily::dlvp(0.5, 1.0).unwrap();
        let avg = AveragerFamily::delta();
        let est = taylor_defect(&kern, &avg, 10).unwrap();
        assert_eq!(est.order, DefectOrder::Infinite);
    }
}
