#![allow(dead_code)]

use num_complex::Complex64;
use singcert::fixtures::{registry, Fixture, FixtureKind};
use singcert::linalg::SelectionRule;
use singcert::{DeflationState, PolySystem, Scalar};

pub fn viss_fixtures() -> impl Iterator<Item = &'static Fixture> {
    registry()
        .iter()
        .filter(|f| f.is_active() && f.kind == FixtureKind::Viss)
}

/// Every deflation state from the start point until the corank reaches 0.
pub fn chain<T: Scalar>(f: &PolySystem<T>, x: &[T], eps: f64) -> Vec<DeflationState<T>> {
    let mut st = DeflationState::new(f, x, eps, SelectionRule::Lexicographic).unwrap();
    let mut out = vec![st.clone()];
    while st.current_corank() > 0 {
        st = st.deflate_step().unwrap();
        out.push(st.clone());
    }
    out
}

pub fn start_chain<T: Scalar>(fx: &Fixture) -> Vec<DeflationState<T>> {
    let (f, x) = fx.load::<T>().unwrap();
    chain(&f, &x, fx.eps)
}

pub fn root_chain<T: Scalar>(fx: &Fixture) -> Vec<DeflationState<T>> {
    let (f, _) = fx.load::<T>().unwrap();
    let r = fx.root::<T>().unwrap();
    chain(&f, &r, fx.eps)
}

/// Runs `body` over the fixture in its own scalar field.
#[macro_export]
macro_rules! for_field {
    ($fx:expr, $body:ident) => {
        if $fx.complex {
            $body::<num_complex::Complex64>($fx)
        } else {
            $body::<f64>($fx)
        }
    };
}

pub fn random_point<T: Scalar>(rng: &mut impl rand::Rng, len: usize, complex: bool) -> Vec<T> {
    (0..len)
        .map(|_| {
            let im = if complex { rng.random_range(-1.0..1.0) } else { 0.0 };
            T::from_parts(rng.random_range(-1.0..1.0), im).unwrap()
        })
        .collect()
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}
