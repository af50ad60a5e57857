//! Witness functions and error measurement: the block polynomials Φ_j, the
//! lacunary lower-bound functions, smoothness-calibrated Korobov products,
//! square waves for rough-data experiments, Smolyak error sweeps, and
//! least-squares rate fitting against the model error ≈ C·2^{-rn}·n^β.

use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;

use crate::fourier::{LevelVec, TrigPoly};
use crate::operators::{FunctionModel, QuasiInterpOp, UnivariateSpectral};
use crate::smolyak::{smolyak_apply, smolyak_grid_size, SmolyakMode};
use crate::spaces::{lq_norm, NormFamily, ResolutionOfUnity};
use crate::{Error, Result};

/// A claimed smoothness-space membership, with the reason it is believed.
#[derive(Debug, Clone)]
pub struct Membership {
    pub family: NormFamily,
    pub p: f64,
    pub theta: f64,
    pub r: f64,
    pub note: String,
}

/// A labeled test function.
#[derive(Clone)]
pub struct TestFunction {
    pub model: FunctionModel,
    pub label: String,
    pub claimed_membership: Option<Membership>,
}

/// The tensor block polynomial Φ_j: coefficients ∏ φ_{j_i}(k_i) over the
/// support box of the resolution of unity.
pub fn phi_j(j: &LevelVec, phi: ResolutionOfUnity) -> TestFunction {
    let d = j.dim();
    let bw: Vec<i64> = j.iter().map(|ji| 1i64 << (ji + 1)).collect();
    let mut p = TrigPoly::new(d);
    let mut k: Vec<i64> = bw.iter().map(|&b| -b).collect();
    loop {
        let w: f64 = k
            .iter()
            .enumerate()
            .map(|(i, &ki)| phi.phi(j.get(i), ki as f64))
            .product();
        p.set_coeff(&k, Complex64::new(w, 0.0));
        let mut i = d;
        let mut done = false;
        loop {
            if i == 0 {
                done = true;
                break;
            }
            i -= 1;
            k[i] += 1;
            if k[i] <= bw[i] {
                break;
            }
            k[i] = -bw[i];
        }
        if done {
            break;
        }
    }
    TestFunction {
        model: FunctionModel::exact(p),
        label: format!("phi_{:?}", j.0),
        claimed_membership: None,
    }
}

/// The lacunary lower-bound witness: unit coefficients at the frequencies
/// (2^{u_1}, …, 2^{u_d}) with |u|₁ = n + dξ and u_i ≥ ξ + 1.
pub fn f_lower(n: u32, xi: u32, d: usize) -> TestFunction {
    let total = n + d as u32 * xi;
    let mut p = TrigPoly::new(d);
    let mut u = vec![xi + 1; d];
    fn rec(p: &mut TrigPoly, u: &mut Vec<u32>, i: usize, rem: u32, xi: u32, d: usize) {
        if i == d - 1 {
            if rem >= xi + 1 {
                u[i] = rem;
                let k: Vec<i64> = u.iter().map(|&ui| 1i64 << ui).collect();
                p.add_coeff(&k, Complex64::new(1.0, 0.0));
            }
            return;
        }
        let reserve = (d - 1 - i) as u32 * (xi + 1);
        let mut v = xi + 1;
        while v + reserve <= rem {
            u[i] = v;
            rec(p, u, i + 1, rem - v, xi, d);
            v += 1;
        }
    }
    rec(&mut p, &mut u, 0, total, xi, d);
    TestFunction {
        model: FunctionModel::exact(p),
        label: format!("f_lower(n={n},xi={xi},d={d})"),
        claimed_membership: None,
    }
}

/// Per-axis squared tail Σ_{|k| > bw} |k|^{-2a}, bounded by the integral.
fn korobov_axis_tail_sq(a: f64, bw: i64) -> f64 {
    2.0 * (bw as f64).powf(1.0 - 2.0 * a) / (2.0 * a - 1.0)
}

/// Smoothness-calibrated tensor family f̂(k) = ∏ max(1, |k_i|)^{-a},
/// truncated at the given per-axis bandwidth with a recorded L₂ tail.
///
/// The claimed membership r = a - 1/2 (B-family, p = 2, θ = ∞) is backed by
/// block-norm computation in the tests, not assumed.
pub fn korobov(a: f64, d: usize, bandwidth: i64) -> Result<TestFunction> {
    if !(a > 0.5) {
        return Err(Error::InvalidParameter(format!(
            "korobov decay must exceed 1/2, got {a}"
        )));
    }
    let factor = UnivariateSpectral {
        coeff: Arc::new(move |k: i64| {
            Complex64::new((k.abs().max(1) as f64).powf(-a), 0.0)
        }),
        bandwidth,
    };
    let axis_full = factor.l2().powi(2) + korobov_axis_tail_sq(a, bandwidth);
    let axis_tail = korobov_axis_tail_sq(a, bandwidth);
    // union bound over axes for the product tail
    let tail = (d as f64 * axis_tail * axis_full.powi(d as i32 - 1)).sqrt();
    Ok(TestFunction {
        model: FunctionModel::Tensor {
            factors: vec![factor; d],
            tail,
        },
        label: format!("korobov(a={a},d={d})"),
        claimed_membership: Some(Membership {
            family: NormFamily::B,
            p: 2.0,
            theta: f64::INFINITY,
            r: a - 0.5,
            note: "block-norm sweep: 2^{r|j|} ||delta_j f||_2 stays level in j".into(),
        }),
    })
}

/// Tensor product of univariate square waves sign(sin x_i), represented
/// spectrally: per axis f̂(k) = 2/(iπk) for odd k, truncated.
pub fn step_signal(d: usize, bandwidth: i64) -> TestFunction {
    let factor = UnivariateSpectral {
        coeff: Arc::new(|k: i64| {
            if k.rem_euclid(2) == 1 || k.rem_euclid(2) == -1 {
                Complex64::new(0.0, -2.0 / (std::f64::consts::PI * k as f64))
            } else {
                Complex64::new(0.0, 0.0)
            }
        }),
        bandwidth,
    };
    // squared axis tail: Σ_{odd |k| > bw} (2/πk)² ≈ (8/π²)·(1/2bw)
    let axis_tail = 8.0 / (std::f64::consts::PI.powi(2)) / (2.0 * bandwidth as f64);
    let tail = (d as f64 * axis_tail).sqrt();
    TestFunction {
        model: FunctionModel::Tensor {
            factors: vec![factor; d],
            tail,
        },
        label: format!("step(d={d})"),
        claimed_membership: None,
    }
}

/// One measured point of an error sweep.
#[derive(Debug, Clone)]
pub struct ErrorRecord {
    pub label: String,
    pub op: String,
    pub d: usize,
    pub n: u32,
    pub q: f64,
    pub error: f64,
    /// Distinct Smolyak sample points at this n.
    pub dof: u64,
    /// Truncation tail of the test-function model.
    pub tail: f64,
    pub wallclock_ms: f64,
    /// False when the truncation tail reaches 1% of the measured error.
    pub reliable: bool,
}

pub const ERROR_RECORD_HEADER: &str = "label,op,d,n,q,error,dof,tail,wallclock_ms";

impl ErrorRecord {
    pub fn csv_row(&self) -> String {
        let q = if self.q.is_infinite() {
            "inf".to_string()
        } else {
            format!("{}", self.q)
        };
        fn field(s: &str) -> String {
            if s.contains(',') || s.contains('"') {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.to_string()
            }
        }
        format!(
            "{},{},{},{},{},{:e},{},{:e},{:.3}",
            field(&self.label),
            field(&self.op),
            self.d,
            self.n,
            q,
            self.error,
            self.dof,
            self.tail,
            self.wallclock_ms
        )
    }
}

/// ‖f - T_n f‖_q for the truncated model, with degrees-of-freedom and
/// truncation-tail accounting. Tensor models support q = 2 (inner products
/// factor per axis); other models go through a materialized difference.
pub fn measure_error(
    op: &QuasiInterpOp,
    f: &TestFunction,
    n: u32,
    q: f64,
) -> Result<ErrorRecord> {
    let start = Instant::now();
    let tn = smolyak_apply(op, &f.model, n, SmolyakMode::Combination)?;
    let error = match &f.model {
        FunctionModel::Tensor { factors, .. } if q == 2.0 => {
            // ||f - Tf||² = ||f||² - 2 Re<Tf, f> + ||Tf||²
            let norm_f_sq: f64 = factors.iter().map(|fa| fa.l2().powi(2)).product();
            let mut cross = 0.0;
            for (k, c) in tn.terms() {
                let fk: Complex64 = k
                    .iter()
                    .zip(factors)
                    .map(|(&ki, fa)| fa.coeff(ki))
                    .product();
                cross += (c * fk.conj()).re;
            }
            let norm_t_sq = tn.coeff_l2().powi(2);
            (norm_f_sq - 2.0 * cross + norm_t_sq).max(0.0).sqrt()
        }
        FunctionModel::Tensor { .. } => {
            return Err(Error::UnsupportedModel(
                "tensor error measurement supports q = 2 only",
            ))
        }
        _ => {
            let p = f.model.to_trig_poly()?;
            lq_norm(&p.sub(&tn), q)?
        }
    };
    let tail = f.model.tail();
    Ok(ErrorRecord {
        label: f.label.clone(),
        op: op.label(),
        d: op.d,
        n,
        q,
        error,
        dof: smolyak_grid_size(n, op.d),
        tail,
        wallclock_ms: start.elapsed().as_secs_f64() * 1e3,
        reliable: tail < error / 100.0,
    })
}

/// Fitted parameters of the model error ≈ C·2^{-rn}·n^β.
#[derive(Debug, Clone)]
pub struct RateFit {
    pub r: f64,
    pub beta: f64,
    pub c: f64,
    pub resid_rms: f64,
    /// Number of records actually used by the fit.
    pub used: usize,
}

impl RateFit {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "r": self.r,
            "beta": self.beta,
            "C": self.c,
            "resid_rms": self.resid_rms,
            "used": self.used,
        })
    }
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Result<[f64; 3]> {
    let mut m = a;
    let mut v = b;
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[piv][col].abs() < 1e-12 {
            return Err(Error::SingularSystem("rate fit normal equations"));
        }
        m.swap(col, piv);
        v.swap(col, piv);
        for row in 0..3 {
            if row == col {
                continue;
            }
            let f = m[row][col] / m[col][col];
            for c in 0..3 {
                m[row][c] -= f * m[col][c];
            }
            v[row] -= f * v[col];
        }
    }
    Ok([v[0] / m[0][0], v[1] / m[1][1], v[2] / m[2][2]])
}

/// Least-squares fit of log₂ e_n = c - r·n + β·log₂ n.
///
/// Unreliable records (error under 10x the truncation tail) and zero errors
/// are discarded; the two smallest remaining n values are dropped as
/// preasymptotic. At least three distinct n must survive.
pub fn fit_rate(records: &[ErrorRecord]) -> Result<RateFit> {
    let mut usable: Vec<&ErrorRecord> = records
        .iter()
        .filter(|r| r.error > 0.0 && r.error > 10.0 * r.tail)
        .collect();
    usable.sort_by_key(|r| r.n);
    let mut distinct: Vec<u32> = usable.iter().map(|r| r.n).collect();
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::RankDeficientFit(distinct.len()));
    }
    let dropped: Vec<u32> = distinct[..2].to_vec();
    let usable: Vec<&ErrorRecord> = usable
        .into_iter()
        .filter(|r| !dropped.contains(&r.n))
        .collect();
    let mut distinct: Vec<u32> = usable.iter().map(|r| r.n).collect();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::RankDeficientFit(distinct.len()));
    }
    // design rows (1, -n, log2 n) against log2 e
    let rows: Vec<([f64; 3], f64)> = usable
        .iter()
        .map(|r| {
            (
                [1.0, -(r.n as f64), (r.n as f64).log2()],
                r.error.log2(),
            )
        })
        .collect();
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for (x, y) in &rows {
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += x[i] * x[j];
            }
            atb[i] += x[i] * y;
        }
    }
    let sol = solve3(ata, atb)?;
    let resid_rms = (rows
        .iter()
        .map(|(x, y)| {
            let pred = sol[0] * x[0] + sol[1] * x[1] + sol[2] * x[2];
            (y - pred) * (y - pred)
        })
        .sum::<f64>()
        / rows.len() as f64)
        .sqrt();
    Ok(RateFit {
        r: sol[1],
        beta: sol[2],
        c: 2f64.powf(sol[0]),
        resid_rms,
        used: rows.len(),
    })
}
