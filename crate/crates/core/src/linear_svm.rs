//! Linear L2-SVM training and prediction.
//!
//! The binary trainer minimizes `½‖w‖² + C·Σ max(1 − y_i wᵀx_i, 0)²` by
//! dual coordinate descent over instances with a seeded random
//! permutation per epoch. Multiclass is one-vs-all by default, with the
//! Crammer-Singer joint objective as an alternative. Training tracks the
//! primal objective per epoch and keeps the best iterate, so the
//! recorded trajectory never increases.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vectorspace::SparseVector;

/// A training instance. Binary labels are ±1; multiclass labels are
/// nonnegative class ids.
#[derive(Debug, Clone)]
pub struct LabeledInstance<T> {
    pub x: SparseVector<T>,
    pub y: i32,
}

impl<T: Scalar> LabeledInstance<T> {
    pub fn new(x: SparseVector<T>, y: i32) -> Self {
        LabeledInstance { x, y }
    }
}

/// Multiclass training strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiclass {
    OneVsAll,
    CrammerSinger,
}

/// Training controls.
#[derive(Debug, Clone)]
pub struct SvmParams {
    /// Regularization weight on the loss term.
    pub c: f64,
    /// Stop when the objective decrease over one epoch falls below this.
    pub tol: f64,
    pub max_epochs: usize,
    pub seed: u64,
    /// Optional class universe for one-vs-all; classes absent from the
    /// data are skipped.
    pub classes: Option<Vec<i32>>,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            tol: 1e-6,
            max_epochs: 1000,
            seed: 42,
            classes: None,
        }
    }
}

/// Per-class dense weight vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel<T> {
    pub classes: Vec<i32>,
    /// `weights[i]` belongs to `classes[i]`; all rows have equal length.
    pub weights: Vec<Vec<T>>,
    pub c: T,
    pub bias: bool,
    pub strategy: Multiclass,
    /// False when any training sub-problem hit its epoch cap with the
    /// tolerance unmet; the weights are still the best iterate seen.
    pub converged: bool,
}

impl<T: Scalar> LinearModel<T> {
    pub fn n_features(&self) -> usize {
        self.weights.first().map(Vec::len).unwrap_or(0)
    }

    /// Validates weight shape and finiteness.
    pub fn validate(&self) -> Result<()> {
        if self.classes.len() != self.weights.len() {
            return Err(Error::Validation(
                "class list and weight rows disagree".into(),
            ));
        }
        let n = self.n_features();
        for (c, w) in self.classes.iter().zip(&self.weights) {
            if w.len() != n {
                return Err(Error::Validation(format!(
                    "class {c} has {} weights, expected {n}",
                    w.len()
                )));
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "class {c} has non-finite weights"
                )));
            }
        }
        Ok(())
    }
}

fn check_dims<T: Scalar>(w_len: usize, x: &SparseVector<T>) -> Result<()> {
    if let Some(max) = x.max_index() {
        if max >= w_len {
            return Err(Error::Parameter(format!(
                "feature index {max} outside weight vector of length {w_len}"
            )));
        }
    }
    Ok(())
}

/// Squared hinge loss `max(1 − y·wᵀx, 0)²` for `y ∈ {−1, +1}`.
pub fn l2_hinge_loss<T: Scalar>(w: &[T], x: &SparseVector<T>, y: i32) -> Result<T> {
    check_dims(w.len(), x)?;
    let margin = T::one() - T::from_f64_lossy(y as f64) * x.dense_dot(w);
    let viol = margin.max(T::zero());
    Ok(viol * viol)
}

/// Regularized objective `½‖w‖² + C·Σ l2_hinge_loss`.
pub fn objective<T: Scalar>(w: &[T], data: &[LabeledInstance<T>], c: f64) -> Result<T> {
    if c <= 0.0 {
        return Err(Error::Parameter(format!("C must be > 0, got {c}")));
    }
    let mut reg = T::zero();
    for &v in w {
        reg += v * v;
    }
    let mut loss = T::zero();
    for inst in data {
        loss += l2_hinge_loss(w, &inst.x, inst.y)?;
    }
    Ok(T::from_f64_lossy(0.5) * reg + T::from_f64_lossy(c) * loss)
}

/// Gradient of the objective: `w − 2C·Σ_{i: y_i wᵀx_i < 1} y_i x_i (1 − y_i wᵀx_i)`.
pub fn gradient<T: Scalar>(w: &[T], data: &[LabeledInstance<T>], c: f64) -> Result<Vec<T>> {
    if c <= 0.0 {
        return Err(Error::Parameter(format!("C must be > 0, got {c}")));
    }
    let mut grad: Vec<T> = w.to_vec();
    let two_c = T::from_f64_lossy(2.0 * c);
    for inst in data {
        check_dims(w.len(), &inst.x)?;
        let y = T::from_f64_lossy(inst.y as f64);
        let margin = T::one() - y * inst.x.dense_dot(w);
        if margin > T::zero() {
            let coeff = two_c * y * margin;
            for (i, v) in inst.x.iter() {
                grad[i] -= coeff * v;
            }
        }
    }
    Ok(grad)
}

/// Output of a binary training run: the weight vector, the accepted
/// per-epoch objective trajectory (starting at the zero iterate), and
/// whether the tolerance was reached.
#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub weights: Vec<T>,
    pub epoch_objectives: Vec<T>,
    pub converged: bool,
}

fn validate_binary<T: Scalar>(data: &[LabeledInstance<T>]) -> Result<()> {
    let mut pos = false;
    let mut neg = false;
    for inst in data {
        match inst.y {
            1 => pos = true,
            -1 => neg = true,
            other => {
                return Err(Error::Parameter(format!(
                    "binary label must be ±1, got {other}"
                )))
            }
        }
    }
    if !(pos && neg) {
        return Err(Error::DegenerateInput(
            "binary training needs both classes present".into(),
        ));
    }
    Ok(())
}

/// Trains the binary L2-SVM by dual coordinate descent.
///
/// Each epoch visits the instances in a fresh seeded permutation.
/// Termination tracks the dual objective, which coordinate descent
/// decreases monotonically; the primal objective of intermediate
/// iterates can bounce above the optimum, so the incumbent (best primal
/// iterate so far) is what is kept and what `epoch_objectives` records —
/// a non-increasing trajectory by construction.
pub fn train_binary<T: Scalar>(
    data: &[LabeledInstance<T>],
    n_features: usize,
    params: &SvmParams,
) -> Result<TrainOutcome<T>> {
    validate_binary(data)?;
    if params.c <= 0.0 {
        return Err(Error::Parameter(format!("C must be > 0, got {}", params.c)));
    }
    for inst in data {
        check_dims(n_features, &inst.x)?;
    }
    let c = T::from_f64_lossy(params.c);
    let half_inv_c = T::one() / (T::from_f64_lossy(2.0) * c);
    let mut w = vec![T::zero(); n_features];
    let mut alpha = vec![T::zero(); data.len()];
    // Diagonal of the dual Hessian: x_i·x_i + 1/(2C).
    let q_diag: Vec<T> = data.iter().map(|i| i.x.norm_sq() + half_inv_c).collect();

    // Dual objective ½αᵀQ̄α − Σα = ½‖w‖² + Σα²/(4C) − Σα.
    let dual = |w: &[T], alpha: &[T]| -> T {
        let mut wsq = T::zero();
        for &v in w {
            wsq += v * v;
        }
        let mut asq = T::zero();
        let mut asum = T::zero();
        for &a in alpha {
            asq += a * a;
            asum += a;
        }
        T::from_f64_lossy(0.5) * (wsq + asq * half_inv_c) - asum
    };

    let mut best_w = w.clone();
    let mut best_obj = objective(&w, data, params.c)?;
    let mut objectives = vec![best_obj];
    let mut prev_dual = dual(&w, &alpha);
    let mut converged = false;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();

    for _ in 0..params.max_epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let inst = &data[i];
            let y = T::from_f64_lossy(inst.y as f64);
            let g = y * inst.x.dense_dot(&w) - T::one() + alpha[i] * half_inv_c;
            let next = (alpha[i] - g / q_diag[i]).max(T::zero());
            let delta = next - alpha[i];
            if delta != T::zero() {
                alpha[i] = next;
                let step = delta * y;
                for (j, v) in inst.x.iter() {
                    w[j] += step * v;
                }
            }
        }
        let obj = objective(&w, data, params.c)?;
        if obj < best_obj {
            best_obj = obj;
            best_w.copy_from_slice(&w);
        }
        objectives.push(best_obj);
        let d = dual(&w, &alpha);
        if prev_dual - d < T::from_f64_lossy(params.tol) {
            converged = true;
            break;
        }
        prev_dual = d;
    }

    Ok(TrainOutcome {
        weights: best_w,
        epoch_objectives: objectives,
        converged,
    })
}

fn distinct_classes<T: Scalar>(data: &[LabeledInstance<T>]) -> Vec<i32> {
    let mut classes: Vec<i32> = data.iter().map(|i| i.y).collect();
    classes.sort_unstable();
    classes.dedup();
    classes
}

/// One-vs-all multiclass training: one binary problem per class, that
/// class positive and the rest negative. Classes from the configured
/// universe with no positive instances are skipped.
pub fn train_ova<T: Scalar>(
    data: &[LabeledInstance<T>],
    n_features: usize,
    params: &SvmParams,
) -> Result<LinearModel<T>> {
    let present = distinct_classes(data);
    if present.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "one-vs-all needs at least 2 classes, got {}",
            present.len()
        )));
    }
    let universe = match &params.classes {
        Some(list) => {
            let mut list = list.clone();
            list.sort_unstable();
            list.dedup();
            list
        }
        None => present.clone(),
    };
    let mut classes = Vec::new();
    let mut weights = Vec::new();
    let mut converged = true;
    for (slot, &class) in universe.iter().enumerate() {
        if !present.contains(&class) {
            // No positive instances; a one-vs-all problem cannot be posed.
            continue;
        }
        let flipped: Vec<LabeledInstance<T>> = data
            .iter()
            .map(|inst| LabeledInstance {
                x: inst.x.clone(),
                y: if inst.y == class { 1 } else { -1 },
            })
            .collect();
        let sub_params = SvmParams {
            seed: params
                .seed
                .wrapping_add((slot as u64).wrapping_mul(0x9E3779B97F4A7C15)),
            classes: None,
            ..params.clone()
        };
        let outcome = train_binary(&flipped, n_features, &sub_params)?;
        converged &= outcome.converged;
        classes.push(class);
        weights.push(outcome.weights);
    }
    let model = LinearModel {
        classes,
        weights,
        c: T::from_f64_lossy(params.c),
        bias: false,
        strategy: Multiclass::OneVsAll,
        converged,
    };
    model.validate()?;
    Ok(model)
}

/// Crammer-Singer primal objective:
/// `½Σ_c‖w_c‖² + C·Σ_i max(0, 1 + max_{r≠y_i} w_rᵀx_i − w_{y_i}ᵀx_i)`.
pub fn cs_objective<T: Scalar>(
    weights: &[Vec<T>],
    classes: &[i32],
    data: &[LabeledInstance<T>],
    c: f64,
) -> Result<T> {
    if c <= 0.0 {
        return Err(Error::Parameter(format!("C must be > 0, got {c}")));
    }
    let mut reg = T::zero();
    for w in weights {
        for &v in w {
            reg += v * v;
        }
    }
    let mut loss = T::zero();
    for inst in data {
        let yi = classes
            .iter()
            .position(|&c| c == inst.y)
            .ok_or_else(|| Error::Parameter(format!("label {} not in class list", inst.y)))?;
        let scores: Vec<T> = weights.iter().map(|w| inst.x.dense_dot(w)).collect();
        let mut worst = T::neg_infinity();
        for (r, &s) in scores.iter().enumerate() {
            if r != yi {
                worst = worst.max(s);
            }
        }
        let viol = (T::one() + worst - scores[yi]).max(T::zero());
        loss += viol;
    }
    Ok(T::from_f64_lossy(0.5) * reg + T::from_f64_lossy(c) * loss)
}

/// Solves `min ½A‖β‖² + Bᵀβ s.t. Σβ = 0, β_r ≤ U_r` by bisection on the
/// equality multiplier; `β_r(ρ) = min((−B_r − ρ)/A, U_r)` is monotone.
fn solve_cs_subproblem<T: Scalar>(a: T, b: &[T], upper: &[T]) -> Vec<T> {
    let beta_at = |rho: T| -> Vec<T> {
        b.iter()
            .zip(upper)
            .map(|(&bi, &ui)| ((-bi - rho) / a).min(ui))
            .collect()
    };
    let sum = |beta: &[T]| -> T {
        let mut s = T::zero();
        for &v in beta {
            s += v;
        }
        s
    };
    let mut lo = T::neg_infinity();
    let mut hi = T::infinity();
    for (&bi, &ui) in b.iter().zip(upper) {
        // ρ where this coordinate alone would cross zero or its bound.
        let at_zero = -bi;
        let at_bound = -bi - a * ui;
        lo = if lo.is_infinite() {
            at_bound
        } else {
            lo.min(at_bound)
        };
        hi = if hi.is_infinite() {
            at_zero
        } else {
            hi.max(at_zero)
        };
    }
    let one = T::one();
    lo -= one;
    hi += one;
    for _ in 0..200 {
        let mid = (lo + hi) * T::from_f64_lossy(0.5);
        if sum(&beta_at(mid)) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::epsilon() * (T::one() + hi.abs()) {
            break;
        }
    }
    let rho = (lo + hi) * T::from_f64_lossy(0.5);
    let mut beta = beta_at(rho);
    // Remove the bisection slack so the equality constraint holds exactly
    // on the unbounded coordinates.
    let excess = sum(&beta);
    let free = beta.iter().zip(upper).filter(|(b, u)| **b < **u).count();
    if free > 0 {
        let shift = excess / T::from_count(free);
        for (b, &u) in beta.iter_mut().zip(upper) {
            if *b < u {
                *b -= shift;
            }
        }
    }
    beta
}

/// Crammer-Singer multiclass training by dual decomposition: one
/// sub-problem per instance per epoch, seeded permutation order, primal
/// objective tracked per epoch with rollback on increase.
pub fn train_crammer_singer<T: Scalar>(
    data: &[LabeledInstance<T>],
    n_features: usize,
    params: &SvmParams,
) -> Result<LinearModel<T>> {
    let classes = distinct_classes(data);
    if classes.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "multiclass training needs at least 2 classes, got {}",
            classes.len()
        )));
    }
    if params.c <= 0.0 {
        return Err(Error::Parameter(format!("C must be > 0, got {}", params.c)));
    }
    for inst in data {
        check_dims(n_features, &inst.x)?;
    }
    let n_classes = classes.len();
    let class_slot: std::collections::HashMap<i32, usize> =
        classes.iter().enumerate().map(|(s, &c)| (c, s)).collect();
    let c = T::from_f64_lossy(params.c);
    let mut weights = vec![vec![T::zero(); n_features]; n_classes];
    let mut alpha = vec![vec![T::zero(); n_classes]; data.len()];
    let norms: Vec<T> = data.iter().map(|i| i.x.norm_sq()).collect();

    // Dual objective ½Σ_r‖w_r‖² + Σ_{i,r} e_{i,r}·α_{i,r}, nonincreasing
    // under exact per-instance minimization.
    let dual = |weights: &[Vec<T>], alpha: &[Vec<T>]| -> T {
        let mut wsq = T::zero();
        for w in weights {
            for &v in w {
                wsq += v * v;
            }
        }
        let mut lin = T::zero();
        for (inst, a) in data.iter().zip(alpha) {
            let yi = class_slot[&inst.y];
            for (r, &v) in a.iter().enumerate() {
                if r != yi {
                    lin += v;
                }
            }
        }
        T::from_f64_lossy(0.5) * wsq + lin
    };

    let mut best = weights.clone();
    let mut best_obj = cs_objective(&weights, &classes, data, params.c)?;
    let mut prev_dual = dual(&weights, &alpha);
    let mut converged = false;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();

    for _ in 0..params.max_epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let a = norms[i];
            if a == T::zero() {
                continue;
            }
            let inst = &data[i];
            let yi = class_slot[&inst.y];
            // B_r = w_rᵀx_i − A·α_ir + e_r with e_r = 1 − δ(r = y_i).
            let mut b = vec![T::zero(); n_classes];
            let mut upper = vec![T::zero(); n_classes];
            for r in 0..n_classes {
                let e = if r == yi { T::zero() } else { T::one() };
                b[r] = inst.x.dense_dot(&weights[r]) - a * alpha[i][r] + e;
            }
            upper[yi] = c;
            let beta = solve_cs_subproblem(a, &b, &upper);
            for r in 0..n_classes {
                let delta = beta[r] - alpha[i][r];
                if delta != T::zero() {
                    for (j, v) in inst.x.iter() {
                        weights[r][j] += delta * v;
                    }
                    alpha[i][r] = beta[r];
                }
            }
        }
        let obj = cs_objective(&weights, &classes, data, params.c)?;
        if obj < best_obj {
            best_obj = obj;
            for (dst, src) in best.iter_mut().zip(&weights) {
                dst.copy_from_slice(src);
            }
        }
        let d = dual(&weights, &alpha);
        if prev_dual - d < T::from_f64_lossy(params.tol) {
            converged = true;
            break;
        }
        prev_dual = d;
    }
    let model = LinearModel {
        classes,
        weights: best,
        c,
        bias: false,
        strategy: Multiclass::CrammerSinger,
        converged,
    };
    model.validate()?;
    Ok(model)
}

/// Argmax prediction with the full score vector; ties go to the smallest
/// class id (classes are stored ascending).
pub fn predict<T: Scalar>(model: &LinearModel<T>, x: &SparseVector<T>) -> Result<(i32, Vec<T>)> {
    if model.classes.is_empty() {
        return Err(Error::DegenerateInput("model has no classes".into()));
    }
    check_dims(model.n_features(), x)?;
    let scores: Vec<T> = model.weights.iter().map(|w| x.dense_dot(w)).collect();
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    Ok((model.classes[best], scores))
}
