//! End-to-end verification of an isolated singular solution: deflate with
//! smoothing parameters until the augmented system is regular at the
//! approximate root, then run the Krawczyk test on it.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::deflation::{DeflationError, DeflationState, VariableLayout};
use crate::interval::{enclose_poly, Enclosure};
use crate::krawczyk::{verify_root, KrawczykError, VerificationCertificate, VerifyOptions};
use crate::linalg::{SelectionRule, SelectionSets};
use crate::poly::{DirectionEntry, PolySystem};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VissOptions {
    pub eps: f64,
    pub max_deflations: usize,
    pub rule: SelectionRule,
    pub verify: VerifyOptions,
}

impl Default for VissOptions {
    fn default() -> Self {
        VissOptions {
            eps: 1e-4,
            max_deflations: 10,
            rule: SelectionRule::default(),
            verify: VerifyOptions::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum VissError<T: Scalar> {
    #[error("deflation cap of {cap} reached with corank {last_corank} (coranks {coranks:?})")]
    DeflationCap {
        cap: usize,
        last_corank: usize,
        coranks: Vec<usize>,
    },
    #[error("verification inconclusive: {}", .0.certificate.reason.as_deref().unwrap_or("unknown"))]
    NotCertified(Box<VissResult<T>>),
    #[error(transparent)]
    Deflation(#[from] DeflationError),
    #[error(transparent)]
    Krawczyk(#[from] KrawczykError),
}

/// Everything produced by a [`viss`] run.
#[derive(Debug, Clone)]
pub struct VissResult<T: Scalar> {
    /// The perturbed system in the unknowns `(x, b)`.
    pub f_tilde: PolySystem<T>,
    /// The perturbed system over the full layout.
    pub f_tilde_full: PolySystem<T>,
    /// The final square regular system.
    pub system: PolySystem<T>,
    pub layout: VariableLayout,
    pub certificate: VerificationCertificate<T>,
    pub x_box: Vec<T::Enclosure>,
    pub lambda_box: Vec<T::Enclosure>,
    pub b_box: Vec<T::Enclosure>,
    pub corank_sequence: Vec<usize>,
    pub selections: Vec<SelectionSets>,
    pub templates: Vec<Vec<DirectionEntry>>,
    pub lambda_hats: Vec<Vec<T>>,
    pub sigma_min_before: f64,
    pub sigma_min_after: f64,
    pub deflation_count: usize,
    pub eps: f64,
    pub runtime: Duration,
}

impl<T: Scalar> VissResult<T> {
    pub fn is_certified(&self) -> bool {
        self.certificate.is_certified()
    }

    /// The full box reassembled from the x, λ and b parts.
    pub fn full_box(&self) -> Vec<T::Enclosure> {
        let mut out = vec![T::Enclosure::zero(); self.layout.total()];
        let parts = [
            (self.layout.x_indices(), &self.x_box),
            (self.layout.lambda_indices(), &self.lambda_box),
            (self.layout.b_indices(), &self.b_box),
        ];
        for (idx, vals) in parts {
            for (i, v) in idx.into_iter().zip(vals.iter()) {
                out[i] = *v;
            }
        }
        out
    }

    /// Largest magnitude over the x inclusions.
    pub fn x_bound(&self) -> f64 {
        self.x_box.iter().map(Enclosure::magnitude).fold(0.0, f64::max)
    }

    /// Largest magnitude over the b inclusions.
    pub fn b_bound(&self) -> f64 {
        self.b_box.iter().map(Enclosure::magnitude).fold(0.0, f64::max)
    }

    /// Largest radius over the x and b inclusions.
    pub fn max_width(&self) -> f64 {
        self.x_box
            .iter()
            .chain(&self.b_box)
            .map(|e| 2.0 * e.radius())
            .fold(0.0, f64::max)
    }
}

/// Deflates `F` at `x̃` until regular, then verifies the augmented system.
pub fn viss<T: Scalar>(f: &PolySystem<T>, x_tilde: &[T], opts: &VissOptions) -> Result<VissResult<T>, VissError<T>> {
    let start = Instant::now();
    let mut state = DeflationState::new(f, x_tilde, opts.eps, opts.rule)?;
    while state.current_corank() > 0 {
        if state.order() >= opts.max_deflations {
            return Err(VissError::DeflationCap {
                cap: opts.max_deflations,
                last_corank: state.current_corank(),
                coranks: state.coranks().to_vec(),
            });
        }
        state = state.deflate_step()?;
    }
    let certificate = verify_root(state.system(), state.y_tilde(), &opts.verify)?;
    let result = package(&state, certificate, start.elapsed())?;
    if result.is_certified() {
        Ok(result)
    } else {
        Err(VissError::NotCertified(Box::new(result)))
    }
}

fn package<T: Scalar>(
    state: &DeflationState<T>,
    certificate: VerificationCertificate<T>,
    runtime: Duration,
) -> Result<VissResult<T>, DeflationError> {
    let layout = state.layout().clone();
    let pick = |idx: Vec<usize>| -> Vec<T::Enclosure> {
        if certificate.is_certified() {
            idx.into_iter().map(|i| certificate.inclusion[i]).collect()
        } else {
            Vec::new()
        }
    };
    let sig = state.sigma_min_history();
    Ok(VissResult {
        f_tilde: state.f_tilde_xb()?,
        f_tilde_full: state.f_tilde().clone(),
        system: state.system().clone(),
        x_box: pick(layout.x_indices()),
        lambda_box: pick(layout.lambda_indices()),
        b_box: pick(layout.b_indices()),
        layout,
        corank_sequence: state.coranks().to_vec(),
        selections: state.selections().to_vec(),
        templates: state.templates().to_vec(),
        lambda_hats: state.lambda_hats().to_vec(),
        sigma_min_before: sig[0],
        sigma_min_after: *sig.last().expect("non-empty history"),
        deflation_count: state.order(),
        eps: state.eps(),
        certificate,
        runtime,
    })
}

/// Re-evaluates `F̃` and `F̃_x·v1` over the reported boxes with interval
/// arithmetic and checks that every component encloses zero.
pub fn consequence_check<T: Scalar>(result: &VissResult<T>) -> bool {
    if !result.is_certified() {
        return false;
    }
    let full = result.full_box();
    let f_ok = result
        .f_tilde_full
        .polys()
        .iter()
        .all(|p| enclose_poly(p, &full).contains_zero());
    if !f_ok {
        return false;
    }
    let Some(v1) = result.templates.first() else {
        return true;
    };
    let diff_vars: Vec<usize> = (0..v1.len()).collect();
    match result.f_tilde_full.jacobian_apply(&diff_vars, v1) {
        Ok(rows) => rows.polys().iter().all(|p| enclose_poly(p, &full).contains_zero()),
        Err(_) => false,
    }
}
