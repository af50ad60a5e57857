//! Mixed differences, the Smolyak sparse-grid operator T_n, and its
//! combination-technique evaluation.
//!
//! T_n = Σ_{|j|₁ ≤ n} Δ_j where Δ_j = ∏_i (Q_{j_i} - Q_{j_i-1}) and the
//! level -1 operator is zero. Telescoping collapses the double sum to a
//! signed combination Σ c_j Q_j supported on the outer simplex shells
//! n-d+1 ≤ |j|₁ ≤ n; the combination form is the default execution path and
//! the direct difference expansion is kept as its oracle.

use num_complex::Complex64;

use crate::fourier::{level_simplex, LevelVec, TrigPoly};
use crate::operators::{apply_aliasing, FunctionModel, QuasiInterpOp};
use crate::Result;

/// The active level vectors of T_n with their combination coefficients.
#[derive(Debug, Clone)]
pub struct SmolyakPlan {
    pub n: u32,
    pub d: usize,
    /// Sorted lexicographically by level vector for reproducible
    /// accumulation order.
    pub terms: Vec<(LevelVec, i64)>,
}

impl SmolyakPlan {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms
                .iter()
                .map(|(j, c)| serde_json::json!({"j": j.0, "c": c}))
                .collect(),
        )
    }
}

fn binomial(n: u32, k: u32) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1i64;
    for i in 0..k {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    acc
}

/// The combination technique plan for (n, d):
/// c_j = (-1)^{n-|j|₁} · C(d-1, n-|j|₁) for max(0, n-d+1) ≤ |j|₁ ≤ n.
pub fn combination_plan(n: u32, d: usize) -> SmolyakPlan {
    let lo = (n as i64 - d as i64 + 1).max(0) as u32;
    let mut terms = Vec::new();
    for j in level_simplex(n, d) {
        let t = j.total();
        if t < lo {
            continue;
        }
        let m = n - t;
        let sign = if m % 2 == 0 { 1 } else { -1 };
        let c = sign * binomial(d as u32 - 1, m);
        if c != 0 {
            terms.push((j, c));
        }
    }
    SmolyakPlan { n, d, terms }
}

/// The mixed difference Δ_j f = ∏_i (Q_{j_i} - Q_{j_i-1}) f, expanded over
/// offsets b ∈ {-1, 0}^d with the level -1 operator equal to zero.
pub fn mixed_difference(
    op: &QuasiInterpOp,
    f: &FunctionModel,
    j: &LevelVec,
) -> Result<TrigPoly> {
    let d = j.dim();
    let mut acc = TrigPoly::new(d);
    for mask in 0u32..(1 << d) {
        let mut jb = Vec::with_capacity(d);
        let mut skip = false;
        let mut sign = 1.0;
        for i in 0..d {
            if mask & (1 << i) != 0 {
                sign = -sign;
                if j.get(i) == 0 {
                    skip = true;
                    break;
                }
                jb.push(j.get(i) - 1);
            } else {
                jb.push(j.get(i));
            }
        }
        if skip {
            continue;
        }
        let term = apply_aliasing(op, f, &LevelVec::new(jb))?;
        acc = acc.add(&term.scale(Complex64::new(sign, 0.0)));
    }
    Ok(acc)
}

/// Evaluation strategy for [`smolyak_apply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmolyakMode {
    /// Sum mixed differences over the full simplex |j|₁ ≤ n.
    Direct,
    /// Evaluate the telescoped combination Σ c_j Q_j.
    Combination,
}

/// The Smolyak operator T_n applied to f.
pub fn smolyak_apply(
    op: &QuasiInterpOp,
    f: &FunctionModel,
    n: u32,
    mode: SmolyakMode,
) -> Result<TrigPoly> {
    let d = op.d;
    match mode {
        SmolyakMode::Direct => {
            let mut acc = TrigPoly::new(d);
            for j in level_simplex(n, d) {
                acc = acc.add(&mixed_difference(op, f, &j)?);
            }
            Ok(acc)
        }
        SmolyakMode::Combination => {
            let plan = combination_plan(n, d);
            let mut acc = TrigPoly::new(d);
            for (j, c) in &plan.terms {
                let term = apply_aliasing(op, f, j)?;
                acc = acc.add(&term.scale(Complex64::new(*c as f64, 0.0)));
            }
            Ok(acc)
        }
    }
}

/// Number of distinct sample points in the union of level-j grids over
/// |j|₁ ≤ n, by direct set union. Each node is encoded per axis as
/// k·2^{n-j} mod 2^n on the common refinement lattice.
pub fn smolyak_grid_size(n: u32, d: usize) -> u64 {
    use std::collections::BTreeSet;
    let mut points: BTreeSet<Vec<u64>> = BTreeSet::new();
    let scale = 1u64 << n;
    for j in level_simplex(n, d) {
        let axes: Vec<Vec<u64>> = (0..d)
            .map(|i| {
                let ji = j.get(i);
                let m = 1i64 << ji;
                (-(m / 2).max(0)..(m - m / 2))
                    .map(|k| (k * (1i64 << (n - ji))).rem_euclid(scale as i64) as u64)
                    .collect()
            })
            .collect();
        let mut idx = vec![0usize; d];
        loop {
            points.insert((0..d).map(|i| axes[i][idx[i]]).collect());
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
    }
    points.len() as u64
}

/// The zeroth Fourier coefficient of T_n f, computed exactly through the
/// aliasing path (the sharpness witness of the lower-bound construction).
pub fn c0_of_smolyak(op: &QuasiInterpOp, f: &TrigPoly, n: u32) -> Result<Complex64> {
    let t = smolyak_apply(
        op,
        &FunctionModel::exact(f.clone()),
        n,
        SmolyakMode::Combination,
    )?;
    Ok(t.coeff(&vec![0i64; f.dim()]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{AveragerFamily, KernelFamily};
    use crate::operators::{named_operator, OpName};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_poly(rng: &mut ChaCha8Rng, d: usize, bw: i64, terms: usize) -> TrigPoly {
        let mut f = TrigPoly::new(d);
        for _ in 0..terms {
            let k: Vec<i64> = (0..d).map(|_| rng.gen_range(-bw..=bw)).collect();
            f.add_coeff(&k, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        f
    }

    fn reproducing_op(d: usize) -> QuasiInterpOp {
        QuasiInterpOp::new(
            KernelFamily::modified_dirichlet(2).unwrap(),
            AveragerFamily::char_averager(2).unwrap(),
            d,
        )
    }

    #[test]
    fn plan_d1_is_single_term() {
        for n in 0..=6u32 {
            let plan = combination_plan(n, 1);
            assert_eq!(plan.terms.len(), 1);
            assert_eq!(plan.terms[0], (LevelVec::new(vec![n]), 1));
        }
    }

    #[test]
    fn plan_d2_n2_coefficients() {
        let plan = combination_plan(2, 2);
        let mut pos = 0;
        let mut neg = 0;
        for (j, c) in &plan.terms {
            match j.total() {
                2 => {
                    assert_eq!(*c, 1);
                    pos += 1;
                }
                1 => {
                    assert_eq!(*c, -1);
                    neg += 1;
                }
                t => panic!("unexpected shell |j|={t}"),
            }
        }
        assert_eq!((pos, neg), (3, 2));
    }

    #[test]
    fn plan_coefficients_sum_to_one() {
        for d in 1..=4usize {
            for n in 0..=8u32 {
                let s: i64 = combination_plan(n, d).terms.iter().map(|(_, c)| c).sum();
                assert_eq!(s, 1, "n={n}, d={d}");
            }
        }
    }

    #[test]
    fn plan_json_shape() {
        let v = combination_plan(1, 2).to_json();
        let arr = v.as_array().unwrap();
        assert!(!arr.is_empty());
        for t in arr {
            assert!(t.get("j").unwrap().is_array());
            assert!(t.get("c").unwrap().is_i64());
        }
    }

    #[test]
    fn mixed_difference_at_zero_level_is_q0() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let op = named_operator(OpName::K, 1, 2).unwrap();
        let f = FunctionModel::exact(random_poly(&mut rng, 1, 6, 5));
        let delta = mixed_difference(&op, &f, &LevelVec::new(vec![0])).unwrap();
        let q0 = apply_aliasing(&op, &f, &LevelVec::new(vec![0])).unwrap();
        assert!(delta.sub(&q0).coeff_l2() < 1e-14);
    }

    #[test]
    fn mixed_difference_expansion_d2() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let op = named_operator(OpName::K, 2, 2).unwrap();
        let f = FunctionModel::exact(random_poly(&mut rng, 2, 6, 6));
        let delta = mixed_difference(&op, &f, &LevelVec::new(vec![1, 1])).unwrap();
        let q = |j: Vec<u32>| apply_aliasing(&op, &f, &LevelVec::new(j)).unwrap();
        let want = q(vec![1, 1])
            .sub(&q(vec![0, 1]))
            .sub(&q(vec![1, 0]))
            .add(&q(vec![0, 0]));
        assert!(delta.sub(&want).coeff_l2() < 1e-13);
    }

    #[test]
    fn mixed_difference_vanishes_below_reproduced_level() {
        // for a reproducing operator, Q_j f = Q_{j-1} f = f once f is
        // band-limited to the coarser lattice, so the difference cancels
        let op = reproducing_op(1);
        for j in 2..=6u32 {
            let h = 1i64 << (j - 2);
            let mut f = TrigPoly::new(1);
            f.add_coeff(&[-h], c(0.3, 0.1));
            f.add_coeff(&[h - 1], c(-0.2, 0.5));
            let delta =
                mixed_difference(&op, &FunctionModel::exact(f), &LevelVec::new(vec![j]))
                    .unwrap();
            assert!(delta.coeff_l2() < 1e-12, "j={j}");
        }
    }

    #[test]
    fn direct_and_combination_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for d in 2..=3usize {
            let op = named_operator(OpName::K, d, 2).unwrap();
            for n in [0u32, 1, 3, 5] {
                let f = FunctionModel::exact(random_poly(&mut rng, d, 12, 8));
                let a = smolyak_apply(&op, &f, n, SmolyakMode::Direct).unwrap();
                let b = smolyak_apply(&op, &f, n, SmolyakMode::Combination).unwrap();
                assert!(
                    a.sub(&b).coeff_l2() <= 1e-10 * a.coeff_l2().max(1.0),
                    "d={d}, n={n}"
                );
            }
        }
    }

    #[test]
    fn univariate_smolyak_is_single_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let op = named_operator(OpName::KStar, 1, 2).unwrap();
        let f = FunctionModel::exact(random_poly(&mut rng, 1, 20, 8));
        for n in 0..=5u32 {
            let t = smolyak_apply(&op, &f, n, SmolyakMode::Direct).unwrap();
            let q = apply_aliasing(&op, &f, &LevelVec::new(vec![n])).unwrap();
            assert!(t.sub(&q).coeff_l2() < 1e-12);
        }
    }

    #[test]
    fn constant_preserved_by_smolyak() {
        let op = named_operator(OpName::I, 2, 2).unwrap();
        let f = FunctionModel::exact(TrigPoly::constant(2, c(1.0, 0.0)));
        for n in 0..=5u32 {
            let t = smolyak_apply(&op, &f, n, SmolyakMode::Combination).unwrap();
            assert!((t.coeff(&[0, 0]) - c(1.0, 0.0)).norm() < 1e-12);
            assert_eq!(t.num_terms(), 1);
        }
    }

    #[test]
    fn nesting_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let op = named_operator(OpName::K, 2, 2).unwrap();
        let f = FunctionModel::exact(random_poly(&mut rng, 2, 10, 8));
        for n in 1..=4u32 {
            let tn = smolyak_apply(&op, &f, n, SmolyakMode::Combination).unwrap();
            let tm = smolyak_apply(&op, &f, n - 1, SmolyakMode::Combination).unwrap();
            let mut shell = TrigPoly::new(2);
            for j in level_simplex(n, 2) {
                if j.total() == n {
                    shell = shell.add(&mixed_difference(&op, &f, &j).unwrap());
                }
            }
            let lhs = tn.sub(&tm);
            assert!(lhs.sub(&shell).coeff_l2() <= 1e-10 * tn.coeff_l2().max(1.0));
        }
    }

    #[test]
    fn smolyak_reproduces_cross_supported_polynomials() {
        // univariate reproduction on A_j spans lifts to exactness of T_n on
        // the step hyperbolic cross built from the A_j sets
        let op = reproducing_op(2);
        let n = 5u32;
        let mut f = TrigPoly::new(2);
        // frequencies in A_{j_1} x A_{j_2} with |j|_1 ≤ n = 5
        for (k1, k2) in [(0i64, 15i64), (-16, 0), (3, -2), (-1, 7), (1, 1)] {
            f.add_coeff(&[k1, k2], c(0.4, -0.1));
        }
        let t = smolyak_apply(
            &op,
            &FunctionModel::exact(f.clone()),
            n,
            SmolyakMode::Combination,
        )
        .unwrap();
        assert!(t.sub(&f).coeff_l2() < 1e-10);
    }

    #[test]
    fn grid_size_d1_is_power_of_two() {
        for n in 0..=10u32 {
            assert_eq!(smolyak_grid_size(n, 1), 1u64 << n);
        }
    }

    #[test]
    fn grid_size_matches_coordinate_union_oracle() {
        // independent oracle: collect actual node coordinates (as strings of
        // rounded rationals) from the DyadicGrid nodes themselves
        use std::collections::BTreeSet;
        let n = 3u32;
        let mut oracle: BTreeSet<(i64, i64)> = BTreeSet::new();
        for j in level_simplex(n, 2) {
            let g = crate::fourier::DyadicGrid::new(j);
            for x in g.axis_nodes(0) {
                for y in g.axis_nodes(1) {
                    let enc = |v: f64| ((v + std::f64::consts::PI) / (2.0 * std::f64::consts::PI)
                        * 1024.0)
                        .round() as i64;
                    oracle.insert((enc(x), enc(y)));
                }
            }
        }
        assert_eq!(smolyak_grid_size(n, 2), oracle.len() as u64);
    }

    #[test]
    fn grid_size_monotone_in_n() {
        let mut prev = 0;
        for n in 0..=6u32 {
            let s = smolyak_grid_size(n, 2);
            assert!(s >= prev);
            prev = s;
        }
    }

    #[test]
    fn c0_linear_in_input() {
        let op = QuasiInterpOp::new(
            KernelFamily::dirichlet(),
            AveragerFamily::char_averager(2).unwrap(),
            1,
        );
        let f = TrigPoly::exponential(&[8]);
        let a = c0_of_smolyak(&op, &f, 2).unwrap();
        let b = c0_of_smolyak(&op, &f.scale(c(2.5, 0.0)), 2).unwrap();
        assert!((b - a * 2.5).norm() < 1e-14);
    }

    #[test]
    fn c0_of_constant_is_one() {
        let op = reproducing_op(2);
        let f = TrigPoly::constant(2, c(1.0, 0.0));
        for n in 0..=4u32 {
            let v = c0_of_smolyak(&op, &f, n).unwrap();
            assert!((v - c(1.0, 0.0)).norm() < 1e-12);
        }
    }
}
