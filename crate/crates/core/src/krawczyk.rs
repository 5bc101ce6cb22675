//! Krawczyk existence test with epsilon-inflation.
//!
//! For a square system `G`, a center `c`, a box `X` around zero and any
//! matrix `R`, if
//!
//! ```text
//! K = -R·G(c) + (I - R·M)·X  ⊂  int(X)
//! ```
//!
//! where `M` encloses the Jacobian over `c + X`, then `G` has exactly one
//! root in `c + X`, it lies in `c + K`, and every matrix in `M` is
//! nonsingular. All quantities on the right are computed with outward
//! rounded interval arithmetic.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::interval::{enclose_poly, subset_interior, Enclosure, IntervalMatrix};
use crate::linalg;
use crate::poly::{eval_matrix, PolySystem, Polynomial};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KrawczykError {
    #[error("system has {eqs} equations in {vars} unknowns; a square system is required")]
    NotSquare { eqs: usize, vars: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Tunables of [`verify_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub newton_steps: usize,
    /// Newton stops once `‖δ‖∞ <= newton_tol·‖y‖∞`.
    pub newton_tol: f64,
    pub inflation_factor: f64,
    pub inflation_floor: f64,
    pub inflation_rounds: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            newton_steps: 20,
            newton_tol: 1e-15,
            inflation_factor: 1.1,
            inflation_floor: 1e-306,
            inflation_rounds: 15,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerificationStatus {
    Certified,
    Inconclusive,
}

/// Result of [`verify_root`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationCertificate<T: Scalar> {
    pub status: VerificationStatus,
    /// Refined center `ỹ`.
    pub center: Vec<T>,
    /// The Krawczyk box `K` on success, otherwise the last box tried.
    pub offsets: Vec<T::Enclosure>,
    /// `ỹ + K`; empty unless certified.
    pub inclusion: Vec<T::Enclosure>,
    pub newton_steps: usize,
    pub inflation_rounds: usize,
    /// `‖G(ỹ)‖∞` at the refined center.
    pub residual_norm: f64,
    /// Smallest singular value of `G_y(ỹ)`.
    pub sigma_min_final: f64,
    pub reason: Option<String>,
}

impl<T: Scalar> VerificationCertificate<T> {
    pub fn is_certified(&self) -> bool {
        self.status == VerificationStatus::Certified
    }

    /// Largest absolute value over all inclusion components.
    pub fn max_magnitude(&self, indices: impl IntoIterator<Item = usize>) -> f64 {
        indices
            .into_iter()
            .map(|i| self.inclusion[i].magnitude())
            .fold(0.0, f64::max)
    }
}

/// A square system together with its symbolic Jacobian.
#[derive(Debug, Clone)]
pub struct PreparedSystem<T: Scalar> {
    system: PolySystem<T>,
    jacobian: Vec<Vec<Polynomial<T>>>,
}

impl<T: Scalar> PreparedSystem<T> {
    pub fn new(system: &PolySystem<T>) -> Result<Self, KrawczykError> {
        if !system.is_square() {
            return Err(KrawczykError::NotSquare {
                eqs: system.len(),
                vars: system.nvars(),
            });
        }
        Ok(PreparedSystem {
            jacobian: system.jacobian(),
            system: system.clone(),
        })
    }

    pub fn system(&self) -> &PolySystem<T> {
        &self.system
    }

    pub fn dim(&self) -> usize {
        self.system.len()
    }

    fn check(&self, len: usize) -> Result<(), KrawczykError> {
        if len != self.dim() {
            return Err(KrawczykError::DimensionMismatch {
                expected: self.dim(),
                found: len,
            });
        }
        Ok(())
    }

    fn value(&self, y: &[T]) -> DVector<T> {
        DVector::from_iterator(self.dim(), self.system.polys().iter().map(|p| p.eval_unchecked(y)))
    }

    fn jacobian_value(&self, y: &[T]) -> DMatrix<T> {
        eval_matrix(&self.jacobian, y)
    }

    /// Rigorous enclosure of `G(center)`.
    pub fn residual_enclosure(&self, center: &[T]) -> Result<Vec<T::Enclosure>, KrawczykError> {
        self.check(center.len())?;
        let b: Vec<T::Enclosure> = center.iter().map(|&c| T::Enclosure::from_point(c)).collect();
        Ok(self.system.polys().iter().map(|p| enclose_poly(p, &b)).collect())
    }

    /// `M ⊇ {G_y(t) : t ∈ center + x}`.
    pub fn jacobian_enclosure(
        &self,
        center: &[T],
        x: &[T::Enclosure],
    ) -> Result<IntervalMatrix<T::Enclosure>, KrawczykError> {
        self.check(center.len())?;
        self.check(x.len())?;
        let b: Vec<T::Enclosure> = center
            .iter()
            .zip(x)
            .map(|(&c, &r)| T::Enclosure::from_point(c) + r)
            .collect();
        let n = self.dim();
        Ok(IntervalMatrix::from_fn(n, n, |i, j| {
            enclose_poly(&self.jacobian[i][j], &b)
        }))
    }

    /// Evaluates the Krawczyk operator and tests strict containment.
    pub fn krawczyk_test(
        &self,
        center: &[T],
        x: &[T::Enclosure],
        r: &DMatrix<T>,
    ) -> Result<KrawczykOutcome<T::Enclosure>, KrawczykError> {
        let n = self.dim();
        if r.nrows() != n || r.ncols() != n {
            return Err(KrawczykError::DimensionMismatch {
                expected: n,
                found: r.nrows().max(r.ncols()),
            });
        }
        let g = self.residual_enclosure(center)?;
        let m = self.jacobian_enclosure(center, x)?;
        let rm = m.left_mul_points(r);
        let k: Vec<T::Enclosure> = (0..n)
            .map(|i| {
                let mut acc = T::Enclosure::zero();
                for (j, gj) in g.iter().enumerate() {
                    acc = acc - T::Enclosure::from_point(r[(i, j)]) * *gj;
                }
                for (j, xj) in x.iter().enumerate() {
                    let mut e = -rm.get(i, j);
                    if i == j {
                        e = T::Enclosure::one() + e;
                    }
                    acc = acc + e * *xj;
                }
                acc
            })
            .collect();
        if !k.iter().all(Enclosure::is_finite) {
            return Ok(KrawczykOutcome::Inconclusive { k: None });
        }
        if subset_interior(&k, x) {
            Ok(KrawczykOutcome::Certified(k))
        } else {
            Ok(KrawczykOutcome::Inconclusive { k: Some(k) })
        }
    }
}

/// Outcome of one Krawczyk containment test.
#[derive(Debug, Clone, PartialEq)]
pub enum KrawczykOutcome<E> {
    /// Containment holds; carries `K`.
    Certified(Vec<E>),
    /// Containment failed; carries `K` when it was finite.
    Inconclusive { k: Option<Vec<E>> },
}

/// Convenience wrapper around [`PreparedSystem::jacobian_enclosure`].
pub fn jacobian_enclosure<T: Scalar>(
    g: &PolySystem<T>,
    center: &[T],
    x: &[T::Enclosure],
) -> Result<IntervalMatrix<T::Enclosure>, KrawczykError> {
    PreparedSystem::new(g)?.jacobian_enclosure(center, x)
}

/// Convenience wrapper around [`PreparedSystem::krawczyk_test`].
pub fn krawczyk_test<T: Scalar>(
    g: &PolySystem<T>,
    center: &[T],
    x: &[T::Enclosure],
    r: &DMatrix<T>,
) -> Result<KrawczykOutcome<T::Enclosure>, KrawczykError> {
    PreparedSystem::new(g)?.krawczyk_test(center, x, r)
}

fn inf_norm<T: Scalar>(v: impl IntoIterator<Item = T>) -> f64 {
    v.into_iter().map(|x| x.max_part()).fold(0.0, f64::max)
}

/// Floating-point Newton refinement. Returns the refined point and the
/// number of accepted steps.
fn newton<T: Scalar>(g: &PreparedSystem<T>, y0: &[T], opts: &VerifyOptions) -> (Vec<T>, usize) {
    let mut y = y0.to_vec();
    let mut steps = 0;
    for _ in 0..opts.newton_steps {
        let f = g.value(&y);
        let j = g.jacobian_value(&y);
        let Some(delta) = j.lu().solve(&f) else { break };
        if !delta.iter().all(Scalar::is_finite_value) {
            break;
        }
        let next: Vec<T> = y.iter().zip(delta.iter()).map(|(&a, &d)| a - d).collect();
        if !next.iter().all(Scalar::is_finite_value) {
            break;
        }
        let dn = inf_norm(delta.iter().copied());
        let yn = inf_norm(next.iter().copied());
        y = next;
        steps += 1;
        if dn == 0.0 || dn <= opts.newton_tol * yn {
            break;
        }
    }
    (y, steps)
}

/// Newton refinement from `y_tilde` followed by the epsilon-inflation loop.
pub fn verify_root<T: Scalar>(
    g: &PolySystem<T>,
    y_tilde: &[T],
    opts: &VerifyOptions,
) -> Result<VerificationCertificate<T>, KrawczykError> {
    let prep = PreparedSystem::new(g)?;
    verify_prepared(&prep, y_tilde, opts)
}

/// [`verify_root`] on a system whose Jacobian has already been prepared.
pub fn verify_prepared<T: Scalar>(
    prep: &PreparedSystem<T>,
    y_tilde: &[T],
    opts: &VerifyOptions,
) -> Result<VerificationCertificate<T>, KrawczykError> {
    prep.check(y_tilde.len())?;
    let (center, newton_steps) = newton(prep, y_tilde, opts);
    let residual = prep.value(&center);
    let jac = prep.jacobian_value(&center);
    let sigma_min_final = linalg::singular_values(&jac)
        .ok()
        .and_then(|s| s.last().copied())
        .unwrap_or(f64::NAN);
    let mut cert = VerificationCertificate {
        status: VerificationStatus::Inconclusive,
        center: center.clone(),
        offsets: Vec::new(),
        inclusion: Vec::new(),
        newton_steps,
        inflation_rounds: 0,
        residual_norm: inf_norm(residual.iter().copied()),
        sigma_min_final,
        reason: None,
    };
    let r = match linalg::approximate_inverse(&jac) {
        Ok(r) => r,
        Err(e) => {
            cert.reason = Some(format!("approximate inverse failed: {e}"));
            return Ok(cert);
        }
    };
    let delta0 = -(&r * &residual);
    let mut radii: Vec<f64> = delta0.iter().map(|d| d.max_part()).collect();
    for round in 1..=opts.inflation_rounds {
        for r in radii.iter_mut() {
            *r = opts.inflation_factor * *r + opts.inflation_floor;
        }
        let x: Vec<T::Enclosure> = radii.iter().map(|&r| T::Enclosure::symmetric(r)).collect();
        cert.inflation_rounds = round;
        match prep.krawczyk_test(&center, &x, &r)? {
            KrawczykOutcome::Certified(k) => {
                cert.inclusion = center
                    .iter()
                    .zip(&k)
                    .map(|(&c, &ki)| T::Enclosure::from_point(c) + ki)
                    .collect();
                cert.offsets = k;
                cert.status = VerificationStatus::Certified;
                return Ok(cert);
            }
            KrawczykOutcome::Inconclusive { k } => {
                if let Some(k) = k {
                    for (r, ki) in radii.iter_mut().zip(&k) {
                        let m = ki.magnitude();
                        if m.is_finite() {
                            *r = m;
                        }
                    }
                }
                cert.offsets = x;
            }
        }
        if !radii.iter().all(|r| r.is_finite()) {
            break;
        }
    }
    cert.reason = Some(format!(
        "Krawczyk containment not established after {} inflation rounds",
        cert.inflation_rounds
    ));
    Ok(cert)
}
