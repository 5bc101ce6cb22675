//! The breadth-one alternative: a printed 8×8 augmented system for the
//! fourfold root of `{x1²x2 − x1x2², x1 − x2²}` at the origin, verified
//! directly, and compared against the 16×16 system produced by [`viss`].

use thiserror::Error;

use crate::fixtures;
use crate::krawczyk::{verify_root, KrawczykError, VerificationCertificate, VerifyOptions};
use crate::linalg::SelectionRule;
use crate::poly::PolySystem;
use crate::sysio::{parse_system, ParseError};
use crate::viss::{viss, VissError, VissOptions, VissResult};

pub const FIXTURE_NAME: &str = "rugr09-breadth-one";

/// Rank threshold for the VISS side of the cross-check. At the published
/// start the `x2` column of the Jacobian has norm about 6e-3, so any
/// threshold below that treats it as independent and picks the wrong
/// column to delete.
pub const CROSS_CHECK_EPS: f64 = 0.01;

const ORIGINAL: &str = "vars x1 x2\nx1^2*x2 - x1*x2^2\nx1 - x2^2\n";

#[derive(Debug, Error)]
pub enum BreadthOneError {
    #[error("fixture {0} is missing from the registry")]
    Missing(&'static str),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Krawczyk(#[from] KrawczykError),
    #[error("VISS path failed: {0}")]
    Viss(Box<VissError<f64>>),
}

#[derive(Debug, Clone)]
pub struct BreadthOneFixture {
    pub system: PolySystem<f64>,
    pub start: Vec<f64>,
    pub mu: usize,
}

impl BreadthOneFixture {
    pub fn load() -> Result<Self, BreadthOneError> {
        let f = fixtures::find(FIXTURE_NAME).ok_or(BreadthOneError::Missing(FIXTURE_NAME))?;
        let (system, start) = f.load::<f64>()?;
        Ok(BreadthOneFixture {
            system,
            start,
            mu: f.mu.unwrap_or(4) as usize,
        })
    }

    /// Size of the original system.
    pub fn n(&self) -> usize {
        self.system.len() / self.mu
    }

    /// `x = 0`, `b = 0`, `λ = (0, 1, 0)`.
    pub fn exact_root(&self) -> Vec<f64> {
        self.system
            .var_names()
            .iter()
            .map(|v| if v == "lam2" { 1.0 } else { 0.0 })
            .collect()
    }

    fn indices(&self, prefix: &str) -> Vec<usize> {
        self.system
            .var_names()
            .iter()
            .enumerate()
            .filter(|(_, v)| v.starts_with(prefix))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn x_indices(&self) -> Vec<usize> {
        self.indices("x")
    }

    pub fn b_indices(&self) -> Vec<usize> {
        self.indices("b")
    }

    pub fn lambda_indices(&self) -> Vec<usize> {
        self.indices("lam")
    }
}

/// Runs the verifier on the fixture from its published start.
pub fn verify_breadth_one_fixture() -> Result<VerificationCertificate<f64>, BreadthOneError> {
    let f = BreadthOneFixture::load()?;
    Ok(verify_root(&f.system, &f.start, &VerifyOptions::default())?)
}

/// Both certified results side by side.
#[derive(Debug, Clone)]
pub struct CrossCheck {
    pub breadth_one: VerificationCertificate<f64>,
    pub breadth_one_size: usize,
    pub breadth_one_x_bound: f64,
    pub breadth_one_b_bound: f64,
    pub viss: VissResult<f64>,
    pub viss_size: usize,
}

impl CrossCheck {
    pub fn viss_x_bound(&self) -> f64 {
        self.viss.x_bound()
    }

    pub fn viss_b_bound(&self) -> f64 {
        self.viss.b_bound()
    }
}

/// Verifies the 8×8 fixture and runs [`viss`] on the original two
/// equations from the same x-start.
pub fn cross_check_with_viss() -> Result<CrossCheck, BreadthOneError> {
    let f = BreadthOneFixture::load()?;
    let cert = verify_root(&f.system, &f.start, &VerifyOptions::default())?;
    let breadth_one_x_bound = cert.max_magnitude(f.x_indices());
    let breadth_one_b_bound = cert.max_magnitude(f.b_indices());

    let original = parse_system::<f64>(ORIGINAL)?;
    let x_start: Vec<f64> = f.x_indices().iter().map(|&i| f.start[i]).collect();
    let opts = VissOptions {
        eps: CROSS_CHECK_EPS,
        rule: SelectionRule::Lexicographic,
        ..Default::default()
    };
    let result = viss(&original, &x_start, &opts).map_err(|e| BreadthOneError::Viss(Box::new(e)))?;
    Ok(CrossCheck {
        breadth_one_size: f.system.len(),
        breadth_one: cert,
        breadth_one_x_bound,
        breadth_one_b_bound,
        viss_size: result.system.len(),
        viss: result,
    })
}
