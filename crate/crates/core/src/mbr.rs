//! Model-based reconstruction.
//!
//! The unknown is the vector of pixels inside the FOV, so the support
//! constraint holds by construction. The forward model maps it through
//! `scatter -> (coil weighting) -> fft2 -> pattern selection`; the least
//! squares problem is solved with LSQR. POCS on the full image is kept as a
//! baseline.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::Fft2Plan;
use crate::grid::{CoilSet, ComplexImage, SamplingPattern, SupportMask};
use crate::par;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 500;

/// Matrix-free linear map with its conjugate transpose.
pub trait LinearOperator {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64>;
    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64>;
}

/// `y = [M_b F sigma_j M_S^T x]_j`, stacked over coils.
#[derive(Clone)]
pub struct ForwardModel {
    support: SupportMask,
    pattern: SamplingPattern,
    sensitivities: Option<Vec<ComplexImage>>,
    plan: Fft2Plan,
}

impl ForwardModel {
    pub fn new(support: SupportMask, pattern: SamplingPattern) -> Result<Self> {
        if support.dims() != pattern.dims() {
            return Err(Error::DimMismatch(support.dims(), pattern.dims()));
        }
        if support.count() == 0 {
            return Err(Error::EmptySupport);
        }
        let plan = Fft2Plan::new(support.dims());
        Ok(Self {
            support,
            pattern,
            sensitivities: None,
            plan,
        })
    }

    pub fn with_coils(support: SupportMask, pattern: SamplingPattern, coils: &CoilSet) -> Result<Self> {
        if coils.dims() != support.dims() {
            return Err(Error::DimMismatch(support.dims(), coils.dims()));
        }
        let mut model = Self::new(support, pattern)?;
        model.sensitivities = Some(coils.sensitivities().to_vec());
        Ok(model)
    }

    pub fn support(&self) -> &SupportMask {
        &self.support
    }

    pub fn pattern(&self) -> &SamplingPattern {
        &self.pattern
    }

    pub fn coils(&self) -> usize {
        self.sensitivities.as_ref().map_or(1, Vec::len)
    }

    pub fn forward(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(x.len(), self.input_len())?;
        Ok(self.apply(x))
    }

    pub fn adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(y.len(), self.output_len())?;
        Ok(self.apply_adjoint(y))
    }

    fn check_len(&self, got: usize, expected: usize) -> Result<()> {
        if got != expected {
            return Err(Error::LengthMismatch { expected, got });
        }
        Ok(())
    }

    fn forward_coil(&self, image: &[Complex64], sens: Option<&ComplexImage>) -> Vec<Complex64> {
        let mut grid = match sens {
            Some(s) => image.iter().zip(s.data()).map(|(a, b)| a * b).collect(),
            None => image.to_vec(),
        };
        self.plan.forward(&mut grid);
        self.pattern.mask().gather_slice(&grid)
    }

    fn adjoint_coil(&self, samples: &[Complex64], sens: Option<&ComplexImage>) -> Vec<Complex64> {
        let mut grid = vec![Complex64::new(0.0, 0.0); self.support.dims().len()];
        self.pattern.mask().scatter_into(samples, &mut grid);
        self.plan.backward(&mut grid);
        if let Some(s) = sens {
            for (g, w) in grid.iter_mut().zip(s.data()) {
                *g *= w.conj();
            }
        }
        grid
    }
}

impl LinearOperator for ForwardModel {
    fn input_len(&self) -> usize {
        self.support.count()
    }

    fn output_len(&self) -> usize {
        self.coils() * self.pattern.count()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut image = vec![Complex64::new(0.0, 0.0); self.support.dims().len()];
        self.support.scatter_into(x, &mut image);
        match &self.sensitivities {
            None => self.forward_coil(&image, None),
            Some(sens) => par::map(sens, |s| self.forward_coil(&image, Some(s))).concat(),
        }
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let per_coil = self.pattern.count();
        let grid = match &self.sensitivities {
            None => self.adjoint_coil(y, None),
            Some(sens) => {
                let parts = par::map_range(sens.len(), |j| {
                    self.adjoint_coil(&y[j * per_coil..(j + 1) * per_coil], Some(&sens[j]))
                });
                let mut acc = vec![Complex64::new(0.0, 0.0); self.support.dims().len()];
                for part in parts {
                    for (a, p) in acc.iter_mut().zip(part) {
                        *a += p;
                    }
                }
                acc
            }
        };
        self.support.gather_slice(&grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Tolerance,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// `||A x_k - b||_2` after each iteration.
    pub residual_history: Vec<f64>,
    pub stop_reason: StopReason,
    /// `||x_k - x_{k-1}||_2` per iteration; recorded by POCS only.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub update_norms: Vec<f64>,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_solver_params(tol: f64, max_iters: usize) -> Result<()> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    if max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
    }
    Ok(())
}

/// LSQR (Golub-Kahan bidiagonalisation) from a zero start.
///
/// Stops when the residual estimate drops to `tol * ||b||` and the true
/// residual confirms it, or when `||A^H r|| <= tol * ||A|| * ||r||` (the
/// least-squares optimum of an inconsistent system), or after `max_iters`.
pub fn lsqr<A: LinearOperator + ?Sized>(op: &A, b: &[Complex64], tol: f64, max_iters: usize) -> Result<(Vec<Complex64>, SolveReport)> {
    check_solver_params(tol, max_iters)?;
    if b.len() != op.output_len() {
        return Err(Error::LengthMismatch {
            expected: op.output_len(),
            got: b.len(),
        });
    }
    let n = op.input_len();
    let zero = Complex64::new(0.0, 0.0);
    let mut x = vec![zero; n];
    let done = |x: Vec<Complex64>, history: Vec<f64>, reason| {
        let report = SolveReport {
            iterations: history.len(),
            residual_history: history,
            stop_reason: reason,
            update_norms: Vec::new(),
        };
        Ok((x, report))
    };

    let bnorm = norm(b);
    if bnorm == 0.0 {
        return done(x, Vec::new(), StopReason::Tolerance);
    }
    let mut beta = bnorm;
    let mut u: Vec<Complex64> = b.iter().map(|z| z / beta).collect();
    let mut v = op.apply_adjoint(&u);
    let mut alpha = norm(&v);
    if alpha == 0.0 {
        // b is orthogonal to the range: x = 0 is already optimal
        return done(x, Vec::new(), StopReason::Tolerance);
    }
    v.iter_mut().for_each(|z| *z /= alpha);
    let mut w = v.clone();
    let mut phibar = beta;
    let mut rhobar = alpha;
    let mut anorm_sq = 0.0;
    let mut history = Vec::new();

    for _ in 0..max_iters {
        let av = op.apply(&v);
        for (ui, avi) in u.iter_mut().zip(&av) {
            *ui = avi - *ui * alpha;
        }
        beta = norm(&u);
        if beta > 0.0 {
            u.iter_mut().for_each(|z| *z /= beta);
        }
        anorm_sq += alpha * alpha + beta * beta;

        let atu = op.apply_adjoint(&u);
        for (vi, ai) in v.iter_mut().zip(&atu) {
            *vi = ai - *vi * beta;
        }
        alpha = norm(&v);
        if alpha > 0.0 {
            v.iter_mut().for_each(|z| *z /= alpha);
        }

        let rho = rhobar.hypot(beta);
        let c = rhobar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        rhobar = -c * alpha;
        let phi = c * phibar;
        phibar *= s;

        let step = phi / rho;
        let wscale = theta / rho;
        for ((xi, wi), vi) in x.iter_mut().zip(w.iter_mut()).zip(&v) {
            *xi += *wi * step;
            *wi = vi - *wi * wscale;
        }

        history.push(phibar);
        let arnorm = phibar * alpha * c.abs();
        if phibar <= tol * bnorm {
            let ax = op.apply(&x);
            let true_res = norm(&ax.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>());
            if true_res <= tol * bnorm {
                return done(x, history, StopReason::Tolerance);
            }
        }
        if arnorm <= tol * anorm_sq.sqrt() * phibar || alpha == 0.0 {
            return done(x, history, StopReason::Tolerance);
        }
    }
    done(x, history, StopReason::MaxIters)
}

/// Least-squares estimate of the in-FOV pixels for a single-coil model.
pub fn solve_lsqr(model: &ForwardModel, b: &[Complex64], tol: f64, max_iters: usize) -> Result<(Vec<Complex64>, SolveReport)> {
    lsqr(model, b, tol, max_iters)
}

/// Stacked multi-coil problem; `b[j]` holds coil `j`'s samples.
pub fn solve_parallel(model: &ForwardModel, b: &[Vec<Complex64>], tol: f64, max_iters: usize) -> Result<(Vec<Complex64>, SolveReport)> {
    if b.len() != model.coils() {
        return Err(Error::CoilCountMismatch {
            expected: model.coils(),
            got: b.len(),
        });
    }
    lsqr(model, &b.concat(), tol, max_iters)
}

/// Alternating projections onto data consistency and the support.
///
/// Each iteration replaces the acquired entries of `fft2(x)` with `b`,
/// inverts and masks by `S`. Stops when the data residual reaches
/// `tol * ||b||`, when the update shrinks to `tol * ||x||`, or after
/// `max_iters`.
pub fn solve_pocs(
    support: &SupportMask,
    pattern: &SamplingPattern,
    b: &[Complex64],
    tol: f64,
    max_iters: usize,
) -> Result<(ComplexImage, SolveReport)> {
    check_solver_params(tol, max_iters)?;
    let dims = support.dims();
    if pattern.dims() != dims {
        return Err(Error::DimMismatch(dims, pattern.dims()));
    }
    if b.len() != pattern.count() {
        return Err(Error::LengthMismatch {
            expected: pattern.count(),
            got: b.len(),
        });
    }
    let plan = Fft2Plan::new(dims);
    let mask = pattern.mask();
    let bnorm = norm(b);
    let zero = Complex64::new(0.0, 0.0);
    let mut x = vec![zero; dims.len()];
    let mut spectrum = vec![zero; dims.len()];
    let mut report = SolveReport {
        iterations: 0,
        residual_history: Vec::new(),
        stop_reason: StopReason::MaxIters,
        update_norms: Vec::new(),
    };
    if bnorm == 0.0 {
        report.stop_reason = StopReason::Tolerance;
        return Ok((ComplexImage::from_vec_unchecked(dims, x), report));
    }

    for _ in 0..max_iters {
        mask.scatter_into(b, &mut spectrum);
        plan.inverse(&mut spectrum);
        for (z, &keep) in spectrum.iter_mut().zip(support.bits()) {
            if !keep {
                *z = zero;
            }
        }
        let update = spectrum.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        x.copy_from_slice(&spectrum);
        plan.forward(&mut spectrum);
        let residual = mask
            .bits()
            .iter()
            .zip(&spectrum)
            .filter(|(&k, _)| k)
            .zip(b)
            .map(|((_, s), t)| (s - t).norm_sqr())
            .sum::<f64>()
            .sqrt();
        report.iterations += 1;
        report.residual_history.push(residual);
        report.update_norms.push(update);
        if residual <= tol * bnorm || update <= tol * norm(&x) {
            report.stop_reason = StopReason::Tolerance;
            break;
        }
    }
    Ok((ComplexImage::from_vec_unchecked(dims, x), report))
}
