//! Symmetric binary coordination model with a scalar fixed-point equation
//! `p = 1 / (1 + exp(beta * delta(p)))`, where `p` is the probability of the
//! status-quo action and `delta` is affine in `p`.

use crate::error::{domain, Error, Result};

use super::{MultiplicityPolicy, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// Beyond this magnitude of the logit exponent the logistic is replaced by
/// its 0/1 limit.
pub const LOGIT_CUTOFF: f64 = 700.0;

/// `1 / (1 + exp(z))`.
pub fn logistic(z: f64) -> f64 {
    if z > LOGIT_CUTOFF {
        0.0
    } else if z < -LOGIT_CUTOFF {
        1.0
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// `L(1 - L)` for `L = logistic(z)`, evaluated without cancellation.
fn logistic_slope(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

/// A scalar logit fixed-point problem `p = logistic(beta * (intercept + slope * p))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarLogit {
    pub beta: f64,
    pub intercept: f64,
    pub slope: f64,
}

impl ScalarLogit {
    pub fn delta(&self, p: f64) -> f64 {
        self.intercept + self.slope * p
    }

    pub fn map(&self, p: f64) -> f64 {
        logistic(self.beta * self.delta(p))
    }

    /// `F(p) = p - map(p)`.
    pub fn residual_fn(&self, p: f64) -> f64 {
        p - self.map(p)
    }

    /// Lipschitz bound of `map` on [0, 1].
    pub fn lipschitz_bound(&self) -> f64 {
        self.beta * self.slope.abs() / 4.0
    }

    pub fn is_contraction(&self) -> bool {
        self.lipschitz_bound() < 1.0
    }

    /// Every root of `F` on [0, 1]: sign changes on a uniform grid, each
    /// refined by bisection until the bracket stops shrinking, then
    /// deduplicated within 1e-9.
    pub fn roots(&self, grid_size: usize) -> Vec<f64> {
        let n = grid_size.max(2);
        let grid: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
        let values: Vec<f64> = grid.iter().map(|&p| self.residual_fn(p)).collect();
        let mut roots = Vec::new();
        for k in 0..n {
            if values[k] == 0.0 {
                roots.push(grid[k]);
            } else if k + 1 < n && values[k] * values[k + 1] < 0.0 {
                roots.push(self.bisect(grid[k], grid[k + 1], values[k]).0);
            }
        }
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|b, a| (*b - *a).abs() <= 1e-9);
        roots
    }

    /// Bisection on a sign-change bracket; returns the endpoint with the
    /// smaller residual and the number of halvings.
    fn bisect(&self, mut lo: f64, mut hi: f64, mut f_lo: f64) -> (f64, usize) {
        let mut f_hi = self.residual_fn(hi);
        let mut steps = 0;
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let f_mid = self.residual_fn(mid);
            steps += 1;
            if f_mid == 0.0 {
                return (mid, steps);
            }
            if (f_mid < 0.0) == (f_lo < 0.0) {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
                f_hi = f_mid;
            }
        }
        (if f_lo.abs() <= f_hi.abs() { lo } else { hi }, steps)
    }
}

/// Parameters of the symmetric two-player coordination game with payoffs
/// `u(X,X)=a`, `u(X,Y)=c`, `u(Y,X)=d`, `u(Y,Y)=b`, status quo `X`,
/// switching cost `kappa`, precision `beta`, and a tax `tax` on `X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryCoordParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub kappa: f64,
    pub beta: f64,
    pub tax: f64,
}

impl BinaryCoordParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64, kappa: f64, beta: f64, tax: f64) -> Result<Self> {
        let p = Self { a, b, c, d, kappa, beta, tax };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.c, self.d, self.kappa, self.beta, self.tax];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(domain("binary model parameters must be finite"));
        }
        if !(self.a > self.c && self.b > self.d && self.b > self.a) {
            return Err(domain(format!(
                "payoffs must satisfy a > c, b > d, b > a (got a={}, b={}, c={}, d={})",
                self.a, self.b, self.c, self.d
            )));
        }
        if self.kappa < 0.0 || self.beta < 0.0 || self.tax < 0.0 {
            return Err(domain("kappa, beta and tax must be nonnegative"));
        }
        Ok(())
    }

    pub fn with_tax(self, tax: f64) -> Self {
        Self { tax, ..self }
    }

    pub fn with_beta(self, beta: f64) -> Self {
        Self { beta, ..self }
    }

    pub fn with_kappa(self, kappa: f64) -> Self {
        Self { kappa, ..self }
    }

    /// `b - c`.
    pub fn alpha(&self) -> f64 {
        self.b - self.c
    }

    /// `a - d`.
    pub fn gamma(&self) -> f64 {
        self.a - self.d
    }

    /// Payoff advantage of `Y` over `X` against an opponent playing `X`
    /// with probability `p`, net of switching cost and tax.
    pub fn delta(&self, p: f64) -> f64 {
        self.alpha() - self.kappa - p * (self.alpha() + self.gamma()) + self.tax
    }

    /// `beta * (alpha + gamma)`; the map is a contraction when this is below 4.
    pub fn contraction_factor(&self) -> f64 {
        self.beta * (self.alpha() + self.gamma())
    }

    pub fn is_contraction(&self) -> bool {
        self.contraction_factor() < 4.0
    }

    pub fn scalar(&self) -> ScalarLogit {
        ScalarLogit {
            beta: self.beta,
            intercept: self.alpha() - self.kappa + self.tax,
            slope: -(self.alpha() + self.gamma()),
        }
    }

    pub fn logit_map(&self, p: f64) -> f64 {
        logistic(self.beta * self.delta(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub grid_size: usize,
    pub policy: MultiplicityPolicy,
}

impl Default for BinaryOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, grid_size: 10_001, policy: MultiplicityPolicy::Lowest }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryResult {
    /// Equilibrium probability of the status-quo action.
    pub p: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub unique_certified: bool,
    /// Number of fixed points found; 1 under the contraction certificate.
    pub fixed_point_count: usize,
}

/// Solves the symmetric fixed point of a scalar logit problem.
///
/// Under the contraction certificate this is plain iteration from
/// `init_p`. Otherwise every root is enumerated and one is picked by
/// `opts.policy`.
pub(crate) fn solve_scalar(problem: &ScalarLogit, init_p: f64, opts: &BinaryOptions) -> Result<BinaryResult> {
    if !(0.0..=1.0).contains(&init_p) {
        return Err(domain(format!("initial probability must lie in [0, 1], got {init_p}")));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(domain("tolerance must be positive"));
    }
    if problem.is_contraction() {
        let mut p = init_p;
        let mut iterations = 0;
        loop {
            let next = problem.map(p);
            let residual = (p - next).abs();
            if residual <= opts.tol || iterations >= opts.max_iter {
                return Ok(BinaryResult {
                    p,
                    residual,
                    iterations,
                    converged: residual <= opts.tol,
                    unique_certified: true,
                    fixed_point_count: 1,
                });
            }
            p = next;
            iterations += 1;
        }
    }
    let roots = problem.roots(opts.grid_size);
    let p = opts
        .policy
        .pick(&roots, init_p)
        .ok_or_else(|| Error::Numeric("no fixed point found on the grid".into()))?;
    let residual = problem.residual_fn(p).abs();
    Ok(BinaryResult {
        p,
        residual,
        iterations: 0,
        converged: residual <= opts.tol,
        unique_certified: false,
        fixed_point_count: roots.len(),
    })
}

/// Symmetric equilibrium probability of the status-quo action.
pub fn solve_binary(params: &BinaryCoordParams, init_p: f64, opts: &BinaryOptions) -> Result<BinaryResult> {
    params.validate()?;
    solve_scalar(&params.scalar(), init_p, opts)
}

/// All symmetric equilibria, sorted ascending.
pub fn find_all_fixed_points(params: &BinaryCoordParams, grid_size: usize) -> Result<Vec<f64>> {
    params.validate()?;
    if grid_size < 2 {
        return Err(domain("grid size must be at least 2"));
    }
    Ok(params.scalar().roots(grid_size))
}

/// Derivatives of the equilibrium probability with respect to the model
/// parameters, obtained by implicit differentiation of `F(p) = p - L(p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivities {
    pub p_star: f64,
    pub d_kappa: f64,
    pub d_tax: f64,
    pub d_alpha: f64,
    pub d_gamma: f64,
}

impl Sensitivities {
    pub fn as_array(&self) -> [f64; 4] {
        [self.d_kappa, self.d_tax, self.d_alpha, self.d_gamma]
    }
}

pub fn comparative_statics(params: &BinaryCoordParams) -> Result<Sensitivities> {
    params.validate()?;
    if !params.is_contraction() {
        return Err(Error::Precondition(format!(
            "comparative statics need beta*(alpha+gamma) < 4, got {}",
            params.contraction_factor()
        )));
    }
    let res = solve_binary(params, 0.5, &BinaryOptions::default())?;
    if !res.converged {
        return Err(Error::Numeric(format!("fixed point did not converge (residual {:e})", res.residual)));
    }
    let p = res.p;
    let beta = params.beta;
    let s = logistic_slope(beta * params.delta(p));
    let f_p = 1.0 - beta * (params.alpha() + params.gamma()) * s;
    Ok(Sensitivities {
        p_star: p,
        d_kappa: beta * s / f_p,
        d_tax: -beta * s / f_p,
        d_alpha: -beta * (1.0 - p) * s / f_p,
        d_gamma: beta * p * s / f_p,
    })
}

/// Central finite differences of the equilibrium probability with step
/// `h`, re-solving the fixed point at each shifted parameter. `alpha` is
/// shifted through `b` and `gamma` through `a`.
pub fn finite_difference_statics(params: &BinaryCoordParams, h: f64) -> Result<Sensitivities> {
    params.validate()?;
    let opts = BinaryOptions::default();
    let solve = |p: BinaryCoordParams| -> Result<f64> {
        // shifted parameters may leave the validated region by O(h)
        let res = solve_scalar(&p.scalar(), 0.5, &opts)?;
        Ok(res.p)
    };
    let diff = |up: BinaryCoordParams, down: BinaryCoordParams| -> Result<f64> {
        Ok((solve(up)? - solve(down)?) / (2.0 * h))
    };
    let p = *params;
    Ok(Sensitivities {
        p_star: solve(p)?,
        d_kappa: diff(BinaryCoordParams { kappa: p.kappa + h, ..p }, BinaryCoordParams { kappa: p.kappa - h, ..p })?,
        d_tax: diff(BinaryCoordParams { tax: p.tax + h, ..p }, BinaryCoordParams { tax: p.tax - h, ..p })?,
        d_alpha: diff(BinaryCoordParams { b: p.b + h, ..p }, BinaryCoordParams { b: p.b - h, ..p })?,
        d_gamma: diff(BinaryCoordParams { a: p.a + h, ..p }, BinaryCoordParams { a: p.a - h, ..p })?,
    })
}
