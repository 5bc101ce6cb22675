//! Registry of benchmark systems with known isolated singular roots.
//!
//! Each entry records the reference corank sequence, multiplicity and
//! smallest-singular-value pair for comparison. Start points for systems
//! without a published one are the known root offset by `1e-4` per
//! coordinate; the files carry a comment saying so.

use crate::poly::PolySystem;
use crate::scalar::Scalar;
use crate::sysio::{parse_start, parse_system, ParseError};

/// What kind of run a fixture is meant for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureKind {
    /// Deflate with smoothing parameters, then verify.
    Viss,
    /// Already square and regular; verify directly.
    BreadthOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureStatus {
    Active,
    /// Not runnable; the string says why.
    Quarantined(&'static str),
}

#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub kind: FixtureKind,
    pub status: FixtureStatus,
    pub n: usize,
    pub mu: Option<u32>,
    pub complex: bool,
    /// Rank threshold used for this fixture.
    pub eps: f64,
    pub expected_coranks: &'static [usize],
    /// Reference smallest singular values before and after deflation.
    pub reference_sigma: Option<(f64, f64)>,
    pub system_text: &'static str,
    pub start_text: &'static str,
    pub root_text: &'static str,
}

macro_rules! files {
    ($name:literal) => {
        (
            include_str!(concat!("../fixtures/", $name, ".sys")),
            include_str!(concat!("../fixtures/", $name, ".start")),
            include_str!(concat!("../fixtures/", $name, ".root")),
        )
    };
}

const FIXTURE_EPS: f64 = 0.005;

const fn viss(
    name: &'static str,
    n: usize,
    mu: u32,
    complex: bool,
    coranks: &'static [usize],
    sigma: (f64, f64),
    f: (&'static str, &'static str, &'static str),
) -> Fixture {
    Fixture {
        name,
        kind: FixtureKind::Viss,
        status: FixtureStatus::Active,
        n,
        mu: Some(mu),
        complex,
        eps: FIXTURE_EPS,
        expected_coranks: coranks,
        reference_sigma: Some(sigma),
        system_text: f.0,
        start_text: f.1,
        root_text: f.2,
    }
}

const fn quarantined(name: &'static str, n: usize, mu: u32, coranks: &'static [usize], why: &'static str) -> Fixture {
    Fixture {
        name,
        kind: FixtureKind::Viss,
        status: FixtureStatus::Quarantined(why),
        n,
        mu: Some(mu),
        complex: false,
        eps: FIXTURE_EPS,
        expected_coranks: coranks,
        reference_sigma: None,
        system_text: "",
        start_text: "",
        root_text: "",
    }
}

static REGISTRY: [Fixture; 16] = [
    viss("dz1", 4, 131, false, &[4, 4, 0], (1.1e-7, 6.2e-1), files!("dz1")),
    viss("dz2", 3, 16, false, &[2, 2, 1, 0], (7.1e-11, 5.3e-3), files!("dz2")),
    viss("cbms1", 3, 11, false, &[3, 0], (5.5e-4, 1.0), files!("cbms1")),
    viss("cbms2", 3, 8, false, &[3, 0], (3.2e-4, 1.0), files!("cbms2")),
    viss("mth191", 3, 4, false, &[2, 0], (2.5e-4, 3.7e-1), files!("mth191")),
    viss("kss", 10, 638, false, &[9, 0], (6.5e-5, 3.0e-1), files!("kss")),
    viss("caprasse", 4, 4, true, &[2, 0], (1.4e-3, 9.9e-1), files!("caprasse")),
    viss("cyclic9", 9, 4, false, &[2, 0], (2.1e-10, 3.8e-1), files!("cyclic9")),
    viss("rugr09", 2, 4, false, &[1, 1, 1, 0], (3.0e-7, 1.0), files!("rugr09")),
    quarantined(
        "lizhi12",
        100,
        3,
        &[1, 1, 0],
        "polynomials not available offline; not transcribed",
    ),
    viss("ojika1", 2, 3, false, &[1, 1, 0], (3.7e-4, 5.6e-2), files!("ojika1")),
    viss("ojika2", 3, 2, false, &[1, 0], (9.9e-4, 4.6e-1), files!("ojika2")),
    viss("ojika3", 3, 2, false, &[1, 0], (9.6e-5, 5.0e-2), files!("ojika3")),
    quarantined(
        "ojika4",
        3,
        3,
        &[1, 1, 0],
        "polynomials not available offline; not transcribed",
    ),
    viss("decker2", 2, 4, false, &[1, 1, 1, 0], (2.2e-9, 1.0), files!("decker2")),
    {
        let f = files!("rugr09-breadth-one");
        Fixture {
            name: "rugr09-breadth-one",
            kind: FixtureKind::BreadthOne,
            status: FixtureStatus::Active,
            n: 2,
            mu: Some(4),
            complex: false,
            eps: FIXTURE_EPS,
            expected_coranks: &[0],
            reference_sigma: None,
            system_text: f.0,
            start_text: f.1,
            root_text: f.2,
        }
    },
];

/// All registered fixtures in table order.
pub fn registry() -> &'static [Fixture] {
    &REGISTRY
}

pub fn find(name: &str) -> Option<&'static Fixture> {
    REGISTRY.iter().find(|f| f.name.eq_ignore_ascii_case(name))
}

impl Fixture {
    pub fn is_active(&self) -> bool {
        self.status == FixtureStatus::Active
    }

    /// Parses the system and start point over the scalar field `T`.
    pub fn load<T: Scalar>(&self) -> Result<(PolySystem<T>, Vec<T>), ParseError> {
        let s = parse_system::<T>(self.system_text)?;
        let start = parse_start::<T>(self.start_text, s.nvars())?;
        Ok((s, start))
    }

    /// The known root over the scalar field `T`.
    pub fn root<T: Scalar>(&self) -> Result<Vec<T>, ParseError> {
        let n = parse_system::<T>(self.system_text)?.nvars();
        parse_start::<T>(self.root_text, n)
    }
}
