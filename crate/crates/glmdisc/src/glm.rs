//! Logistic regression by Newton's method with ridge-stabilized refits.
//!
//! Designs are dense row-major matrices organized in per-feature blocks. A
//! block flagged `pinned_last` holds a one-hot dummy encoding whose last column
//! is not a free parameter (it is absorbed by the intercept); unpinned blocks
//! (e.g. raw continuous columns) are fully free.

use crate::error::{Error, Result};
use crate::numeric::{bernoulli_loglik, cholesky, cholesky_solve, sigmoid};

/// Starting ridge used by refits; escalated tenfold on trouble, up to [`RIDGE_CAP`].
pub const DEFAULT_RIDGE: f64 = 1e-8;
/// Largest ridge the escalation ladder will try.
pub const RIDGE_CAP: f64 = 1e-2;

const MAX_ITER: usize = 100;
const GRAD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DesignBlock {
    pub size: usize,
    /// Last column of the block is fixed at 0 for identifiability.
    pub pinned_last: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    n_rows: usize,
    blocks: Vec<DesignBlock>,
    /// Row-major, n_rows x n_cols.
    values: Vec<f64>,
}

impl DesignMatrix {
    pub fn zeros(blocks: Vec<DesignBlock>, n_rows: usize) -> Self {
        let n_cols: usize = blocks.iter().map(|b| b.size).sum();
        Self { n_rows, blocks, values: vec![0.0; n_rows * n_cols] }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.blocks.iter().map(|b| b.size).sum()
    }

    pub fn blocks(&self) -> &[DesignBlock] {
        &self.blocks
    }

    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        let n_cols = self.n_cols();
        self.values[row * n_cols + col] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n_cols = self.n_cols();
        &self.values[i * n_cols..(i + 1) * n_cols]
    }

    /// Column indices carrying free parameters: every column of an unpinned
    /// block, all but the last of a pinned one.
    pub fn free_columns(&self) -> Vec<usize> {
        let mut free = Vec::new();
        let mut offset = 0;
        for b in &self.blocks {
            let keep = if b.pinned_last { b.size - 1 } else { b.size };
            free.extend(offset..offset + keep);
            offset += b.size;
        }
        free
    }

    /// Number of free parameters including the intercept.
    pub fn nu(&self) -> usize {
        1 + self.free_columns().len()
    }

    fn validate(&self) -> Result<()> {
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("design value {v}")));
        }
        Ok(())
    }
}

/// Intercept plus one coefficient vector per feature block. Pinned positions
/// are stored explicitly as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticParams {
    pub theta0: f64,
    pub blocks: Vec<Vec<f64>>,
}

impl LogisticParams {
    pub fn zeros(block_sizes: &[usize]) -> Self {
        Self { theta0: 0.0, blocks: block_sizes.iter().map(|&m| vec![0.0; m]).collect() }
    }

    pub fn n_cols(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }

    /// Linear predictor against a dense row laid out block by block.
    pub fn logit(&self, row: &[f64]) -> f64 {
        debug_assert_eq!(row.len(), self.n_cols());
        let mut z = self.theta0;
        let mut offset = 0;
        for block in &self.blocks {
            for (h, &theta) in block.iter().enumerate() {
                z += theta * row[offset + h];
            }
            offset += block.len();
        }
        z
    }
}

/// P(y=1 | row) under `params`.
pub fn predict_proba(params: &LogisticParams, row: &[f64]) -> Result<f64> {
    if row.len() != params.n_cols() {
        return Err(Error::ShapeMismatch(format!(
            "row has {} columns, parameters expect {}",
            row.len(),
            params.n_cols()
        )));
    }
    Ok(sigmoid(params.logit(row)))
}

/// Bernoulli log-likelihood of `y` under `params` on `design`.
pub fn loglik(params: &LogisticParams, design: &DesignMatrix, y: &[u8]) -> Result<f64> {
    if y.len() != design.n_rows() {
        return Err(Error::ShapeMismatch("target length != design rows".into()));
    }
    if params.n_cols() != design.n_cols() {
        return Err(Error::ShapeMismatch("parameter width != design width".into()));
    }
    Ok((0..design.n_rows())
        .map(|i| bernoulli_loglik(y[i], params.logit(design.row(i))))
        .sum())
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: LogisticParams,
    /// Unpenalized log-likelihood at the fitted parameters.
    pub loglik: f64,
    /// Free parameter count including the intercept.
    pub nu: usize,
    pub bic: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Ridge the successful attempt ran with.
    pub ridge_used: f64,
}

/// BIC at sample size `n`: -2 loglik + nu ln(n).
pub fn bic(fit: &FitResult, n: usize) -> f64 {
    -2.0 * fit.loglik + fit.nu as f64 * (n as f64).ln()
}

/// Maximum-likelihood fit by damped Newton iterations.
///
/// The ridge penalizes every free coordinate except the intercept, so ordinary
/// problems reproduce the exact MLE while separated ones stay finite. On a
/// failed factorization, non-finite step, or an attempt that exhausts its
/// iteration budget, the ridge escalates tenfold up to [`RIDGE_CAP`] and the
/// fit restarts.
pub fn fit_mle(design: &DesignMatrix, y: &[u8], ridge: f64) -> Result<FitResult> {
    design.validate()?;
    let n = design.n_rows();
    if y.len() != n {
        return Err(Error::ShapeMismatch("target length != design rows".into()));
    }
    if !(y.iter().any(|v| *v == 1) && y.iter().any(|v| *v == 0)) {
        return Err(Error::SingleClass);
    }
    if !ridge.is_finite() || ridge < 0.0 {
        return Err(Error::NonFinite(format!("ridge {ridge}")));
    }

    let free = design.free_columns();
    let mut lambda = ridge;
    let mut last = None;
    loop {
        let attempt = newton_attempt(design, y, &free, lambda);
        match attempt {
            Some(inner) if inner.converged => {
                last = Some((inner, lambda));
                break;
            }
            other => {
                if let Some(inner) = other {
                    last = Some((inner, lambda));
                }
                if lambda >= RIDGE_CAP {
                    break;
                }
                lambda = if lambda == 0.0 { DEFAULT_RIDGE } else { (lambda * 10.0).min(RIDGE_CAP) };
            }
        }
    }
    let (inner, lambda) = last.ok_or_else(|| {
        Error::NonFinite("logistic fit failed at every ridge level".into())
    })?;

    let params = expand_params(design, &free, &inner.beta);
    let ll = loglik(&params, design, y)?;
    if !ll.is_finite() {
        return Err(Error::NonFinite("log-likelihood at fitted parameters".into()));
    }
    let nu = design.nu();
    let mut fit = FitResult {
        params,
        loglik: ll,
        nu,
        bic: 0.0,
        converged: inner.converged,
        iterations: inner.iterations,
        ridge_used: lambda,
    };
    fit.bic = bic(&fit, n);
    Ok(fit)
}

struct NewtonState {
    beta: Vec<f64>,
    converged: bool,
    iterations: usize,
}

/// One Newton run at a fixed ridge. Returns None when the damped Hessian
/// cannot be factorized or the iterates go non-finite.
fn newton_attempt(design: &DesignMatrix, y: &[u8], free: &[usize], lambda: f64) -> Option<NewtonState> {
    let n = design.n_rows();
    let p = free.len() + 1;
    let mut beta = vec![0.0; p];
    let mut obj = penalized_objective(design, y, free, &beta, lambda);

    for iter in 0..MAX_ITER {
        let (grad, mut hess) = gradient_and_hessian(design, y, free, &beta, lambda);
        let gmax = grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
        if !gmax.is_finite() {
            return None;
        }
        if gmax < GRAD_TOL {
            return Some(NewtonState { beta, converged: true, iterations: iter });
        }
        if !cholesky(&mut hess, p) {
            return None;
        }
        let dir = cholesky_solve(&hess, p, &grad);
        if dir.iter().any(|d| !d.is_finite()) {
            return None;
        }

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = beta.iter().zip(&dir).map(|(b, d)| b + t * d).collect();
            let cand_obj = penalized_objective(design, y, free, &cand, lambda);
            if cand_obj.is_finite() && cand_obj > obj - 1e-12 * (1.0 + obj.abs()) {
                beta = cand;
                obj = cand_obj;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // ascent stalled below the gradient tolerance target
            return Some(NewtonState { beta, converged: false, iterations: iter + 1 });
        }

        // n and p bound the work per iteration; nothing else allocates
        let _ = n;
    }
    Some(NewtonState { beta, converged: false, iterations: MAX_ITER })
}

fn penalized_objective(
    design: &DesignMatrix,
    y: &[u8],
    free: &[usize],
    beta: &[f64],
    lambda: f64,
) -> f64 {
    let mut obj = 0.0;
    for i in 0..design.n_rows() {
        let row = design.row(i);
        let mut z = beta[0];
        for (k, &col) in free.iter().enumerate() {
            z += beta[k + 1] * row[col];
        }
        obj += bernoulli_loglik(y[i], z);
    }
    // the intercept is never penalized
    obj - 0.5 * lambda * beta[1..].iter().map(|b| b * b).sum::<f64>()
}

/// Gradient of the penalized log-likelihood and the damped Newton matrix
/// X' W X + lambda I (damping on every coordinate keeps the factorization
/// stable; it does not move the stationary point).
fn gradient_and_hessian(
    design: &DesignMatrix,
    y: &[u8],
    free: &[usize],
    beta: &[f64],
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let p = free.len() + 1;
    let mut grad = vec![0.0; p];
    let mut hess = vec![0.0; p * p];
    let mut xi = vec![0.0; p];
    for i in 0..design.n_rows() {
        let row = design.row(i);
        xi[0] = 1.0;
        for (k, &col) in free.iter().enumerate() {
            xi[k + 1] = row[col];
        }
        let mut z = beta[0];
        for k in 1..p {
            z += beta[k] * xi[k];
        }
        let prob = sigmoid(z);
        let r = f64::from(y[i]) - prob;
        let w = prob * (1.0 - prob);
        for a in 0..p {
            grad[a] += r * xi[a];
            let wxa = w * xi[a];
            for b in 0..=a {
                hess[a * p + b] += wxa * xi[b];
            }
        }
    }
    for a in 0..p {
        if a > 0 {
            grad[a] -= lambda * beta[a];
        }
        hess[a * p + a] += lambda;
        for b in 0..a {
            hess[b * p + a] = hess[a * p + b];
        }
    }
    (grad, hess)
}

fn expand_params(design: &DesignMatrix, free: &[usize], beta: &[f64]) -> LogisticParams {
    let mut flat = vec![0.0; design.n_cols()];
    for (k, &col) in free.iter().enumerate() {
        flat[col] = beta[k + 1];
    }
    let mut blocks = Vec::with_capacity(design.blocks().len());
    let mut offset = 0;
    for b in design.blocks() {
        blocks.push(flat[offset..offset + b.size].to_vec());
        offset += b.size;
    }
    LogisticParams { theta0: beta[0], blocks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// One pinned one-hot block; rows pick levels by index.
    fn one_hot_design(m: usize, levels: &[usize]) -> DesignMatrix {
        let mut dm = DesignMatrix::zeros(vec![DesignBlock { size: m, pinned_last: true }], levels.len());
        for (i, &h) in levels.iter().enumerate() {
            dm.set(i, h, 1.0);
        }
        dm
    }

    #[test]
    fn predict_matches_hand_computed_logit() {
        let p = LogisticParams { theta0: 0.0, blocks: vec![vec![-2.0, 2.0, 0.0]] };
        // one-hot at the middle level
        let prob = predict_proba(&p, &[0.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(prob, 0.8807970779778823, epsilon = 1e-10);
    }

    #[test]
    fn zero_params_predict_one_half() {
        let p = LogisticParams::zeros(&[3]);
        assert_relative_eq!(predict_proba(&p, &[1.0, 0.0, 0.0]).unwrap(), 0.5);
    }

    #[test]
    fn pinned_level_prediction_reduces_to_the_intercept() {
        let p = LogisticParams { theta0: 0.7, blocks: vec![vec![-1.0, 3.0, 0.0]] };
        let prob = predict_proba(&p, &[0.0, 0.0, 1.0]).unwrap();
        assert_relative_eq!(prob, sigmoid(0.7), epsilon = 1e-15);
    }

    #[test]
    fn predict_rejects_wrong_width_rows() {
        let p = LogisticParams::zeros(&[3]);
        assert!(matches!(predict_proba(&p, &[1.0, 0.0]), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn loglik_of_uninformative_params_is_n_ln_half() {
        let design = one_hot_design(2, &[0, 1, 0, 1]);
        let p = LogisticParams::zeros(&[2]);
        let ll = loglik(&p, &design, &[1, 0, 1, 0]).unwrap();
        assert_relative_eq!(ll, 4.0 * 0.5f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn loglik_matches_a_hand_computed_instance() {
        // theta0=0.5, block (-1, 0); rows: level0 y=1 (z=-0.5), level1 y=0 (z=0.5)
        let design = one_hot_design(2, &[0, 1]);
        let p = LogisticParams { theta0: 0.5, blocks: vec![vec![-1.0, 0.0]] };
        // both rows score z = -0.5 for their observed class: ll = -2 ln(1+e^0.5)
        let ll = loglik(&p, &design, &[1, 0]).unwrap();
        assert_relative_eq!(ll, -1.9481539683602134, epsilon = 1e-12);
    }

    #[test]
    fn loglik_is_invariant_under_row_permutation() {
        // rows reordered by the permutation (1, 0, 4, 2, 3)
        let design = one_hot_design(3, &[0, 1, 2, 1, 0]);
        let permuted = one_hot_design(3, &[1, 0, 0, 2, 1]);
        let y = [1, 0, 1, 1, 0];
        let y_perm = [0, 1, 0, 1, 1];
        let p = LogisticParams { theta0: 0.3, blocks: vec![vec![0.5, -0.4, 0.0]] };
        assert_relative_eq!(
            loglik(&p, &design, &y).unwrap(),
            loglik(&p, &permuted, &y_perm).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn intercept_only_fit_reproduces_the_closed_form_log_odds() {
        let design = DesignMatrix::zeros(vec![], 4);
        let fit = fit_mle(&design, &[1, 0, 0, 0], DEFAULT_RIDGE).unwrap();
        assert!(fit.converged);
        assert_eq!(fit.nu, 1);
        assert_relative_eq!(fit.params.theta0, (1.0f64 / 3.0).ln(), epsilon = 1e-8);
        assert!(fit.iterations <= 100);
    }

    #[test]
    fn saturated_one_hot_fit_recovers_empirical_rate_contrasts() {
        // level rates 0.2, 0.5, 0.8 realized exactly by the counts
        let mut levels = Vec::new();
        let mut y = Vec::new();
        for (h, ones) in [(0usize, 2usize), (1, 5), (2, 8)] {
            for k in 0..10 {
                levels.push(h);
                y.push(u8::from(k < ones));
            }
        }
        let design = one_hot_design(3, &levels);
        let fit = fit_mle(&design, &y, DEFAULT_RIDGE).unwrap();
        let logit = |p: f64| (p / (1.0 - p)).ln();
        assert_relative_eq!(fit.params.theta0, logit(0.8), epsilon = 1e-6);
        assert_relative_eq!(fit.params.blocks[0][0], logit(0.2) - logit(0.8), epsilon = 1e-6);
        assert_relative_eq!(fit.params.blocks[0][1], logit(0.5) - logit(0.8), epsilon = 1e-6);
        assert_eq!(fit.params.blocks[0][2], 0.0);
        assert_eq!(fit.nu, 3);
    }

    #[test]
    fn separated_design_still_returns_finite_converged_coefficients() {
        let design = one_hot_design(2, &[0, 0, 1, 1]);
        let fit = fit_mle(&design, &[1, 1, 0, 0], DEFAULT_RIDGE).unwrap();
        assert!(fit.converged, "ridge escalation should rescue separation");
        assert!(fit.params.theta0.is_finite());
        assert!(fit.params.blocks[0][0].is_finite());
        // the fitted rates saturate in the right direction
        let p0 = predict_proba(&fit.params, &[1.0, 0.0]).unwrap();
        let p1 = predict_proba(&fit.params, &[0.0, 1.0]).unwrap();
        assert!(p0 > 0.95 && p1 < 0.05);
    }

    #[test]
    fn spurious_split_raises_bic_by_the_parameter_penalty() {
        // one informative binary feature; splitting level A into two identical
        // halves leaves the likelihood unchanged and costs ln(n)
        let mut lev2 = Vec::new();
        let mut lev3 = Vec::new();
        let mut y = Vec::new();
        for i in 0..100 {
            lev2.push(0);
            lev3.push(usize::from(i % 2 == 0));
            y.push(u8::from(i < 20));
        }
        for i in 0..100 {
            lev2.push(1);
            lev3.push(2);
            y.push(u8::from(i < 80));
        }
        let fit2 = fit_mle(&one_hot_design(2, &lev2), &y, DEFAULT_RIDGE).unwrap();
        let fit3 = fit_mle(&one_hot_design(3, &lev3), &y, DEFAULT_RIDGE).unwrap();
        assert_relative_eq!(fit2.loglik, fit3.loglik, epsilon = 1e-6);
        assert_relative_eq!(fit3.bic - fit2.bic, (200.0f64).ln(), epsilon = 1e-5);
    }

    #[test]
    fn single_level_block_contributes_no_free_parameter() {
        let n = 40;
        let mut levels = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            levels.push(i % 2);
            y.push(u8::from((i / 2) % 3 == 0));
        }
        let with_m1 = {
            let mut dm = DesignMatrix::zeros(
                vec![
                    DesignBlock { size: 1, pinned_last: true },
                    DesignBlock { size: 2, pinned_last: true },
                ],
                n,
            );
            for (i, &h) in levels.iter().enumerate() {
                dm.set(i, 0, 1.0);
                dm.set(i, 1 + h, 1.0);
            }
            dm
        };
        let without = one_hot_design(2, &levels);
        let fa = fit_mle(&with_m1, &y, DEFAULT_RIDGE).unwrap();
        let fb = fit_mle(&without, &y, DEFAULT_RIDGE).unwrap();
        assert_eq!(fa.nu, fb.nu);
        assert_relative_eq!(fa.loglik, fb.loglik, epsilon = 1e-8);
        assert_eq!(fa.params.blocks[0][0], 0.0);
    }

    #[test]
    fn bic_arithmetic_matches_the_definition() {
        let fit = FitResult {
            params: LogisticParams::zeros(&[]),
            loglik: -100.0,
            nu: 5,
            bic: 0.0,
            converged: true,
            iterations: 1,
            ridge_used: DEFAULT_RIDGE,
        };
        assert_relative_eq!(bic(&fit, 1000), 234.53877639491068, epsilon = 1e-9);
    }

    #[test]
    fn gradient_at_the_fitted_optimum_is_negligible() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let levels: Vec<usize> = (0..60).map(|_| rng.random_range(0..3)).collect();
        let y: Vec<u8> = levels.iter().map(|&h| u8::from(rng.random::<f64>() < 0.2 + 0.3 * h as f64)).collect();
        if !(y.contains(&0) && y.contains(&1)) {
            panic!("seed produced a single class");
        }
        let design = one_hot_design(3, &levels);
        let fit = fit_mle(&design, &y, DEFAULT_RIDGE).unwrap();
        let free = design.free_columns();
        let beta: Vec<f64> = std::iter::once(fit.params.theta0)
            .chain(free.iter().map(|&c| {
                let mut offset = 0;
                for b in &fit.params.blocks {
                    if c < offset + b.len() {
                        return b[c - offset];
                    }
                    offset += b.len();
                }
                unreachable!()
            }))
            .collect();
        let (grad, _) = gradient_and_hessian(&design, &y, &free, &beta, fit.ridge_used);
        let gmax = grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
        assert!(gmax < 1e-6, "stationarity violated: {gmax}");
    }

    #[test]
    fn analytic_gradient_and_hessian_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let n = 12;
            // a pinned 3-level block plus a raw continuous column
            let mut dm = DesignMatrix::zeros(
                vec![
                    DesignBlock { size: 3, pinned_last: true },
                    DesignBlock { size: 1, pinned_last: false },
                ],
                n,
            );
            let mut y = Vec::new();
            for i in 0..n {
                dm.set(i, rng.random_range(0..3), 1.0);
                dm.set(i, 3, rng.random_range(-2.0..2.0));
                y.push(u8::from(rng.random::<f64>() < 0.5));
            }
            if !(y.contains(&0) && y.contains(&1)) {
                continue;
            }
            let free = dm.free_columns();
            let p = free.len() + 1;
            let beta: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (grad, hess) = gradient_and_hessian(&dm, &y, &free, &beta, 0.0);
            let h = 1e-6;
            for a in 0..p {
                let mut up = beta.clone();
                let mut dn = beta.clone();
                up[a] += h;
                dn[a] -= h;
                let fd = (penalized_objective(&dm, &y, &free, &up, 0.0)
                    - penalized_objective(&dm, &y, &free, &dn, 0.0))
                    / (2.0 * h);
                let denom = grad[a].abs().max(fd.abs()).max(1e-4);
                assert!(
                    (grad[a] - fd).abs() / denom < 1e-5,
                    "gradient mismatch at {a}: {} vs {}",
                    grad[a],
                    fd
                );
                // Hessian row via gradient differences (note the Newton matrix
                // here is minus the loglik Hessian)
                let (gup, _) = gradient_and_hessian(&dm, &y, &free, &up, 0.0);
                let (gdn, _) = gradient_and_hessian(&dm, &y, &free, &dn, 0.0);
                for b in 0..p {
                    let fd2 = -(gup[b] - gdn[b]) / (2.0 * h);
                    let denom = hess[a * p + b].abs().max(fd2.abs()).max(1e-4);
                    assert!(
                        (hess[a * p + b] - fd2).abs() / denom < 1e-4,
                        "hessian mismatch at ({a},{b})"
                    );
                }
            }
        }
    }

    #[test]
    fn non_finite_design_is_rejected() {
        let mut dm = DesignMatrix::zeros(vec![DesignBlock { size: 1, pinned_last: false }], 2);
        dm.set(0, 0, f64::NAN);
        dm.set(1, 0, 1.0);
        assert!(matches!(fit_mle(&dm, &[0, 1], DEFAULT_RIDGE), Err(Error::NonFinite(_))));
    }

    #[test]
    fn single_class_targets_are_rejected() {
        let design = one_hot_design(2, &[0, 1]);
        assert!(matches!(fit_mle(&design, &[1, 1], DEFAULT_RIDGE), Err(Error::SingleClass)));
    }
}
