//! Random regular systems with planted roots, used to spot-check that
//! every certificate actually encloses the known solution.
//!
//! Roots and coefficients are small dyadic rationals, so `p(r)` is computed
//! exactly and the planted point is an exact root of the floating system.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::interval::Enclosure;
use crate::poly::{PolySystem, Polynomial};
use crate::viss::{viss, VissOptions};

#[derive(Debug, Clone)]
pub struct PlantedSystem {
    pub system: PolySystem<f64>,
    pub root: Vec<f64>,
    pub start: Vec<f64>,
}

/// Builds a random square system of 2 to 4 variables and total degree at
/// most 3 that vanishes exactly at a planted dyadic root.
pub fn planted_system(rng: &mut impl Rng) -> PlantedSystem {
    let n = rng.random_range(2..=4);
    let root: Vec<f64> = (0..n).map(|_| rng.random_range(-16i32..=16) as f64 / 8.0).collect();
    let mut polys = Vec::with_capacity(n);
    for i in 0..n {
        let mut terms: Vec<(Vec<u32>, f64)> = Vec::new();
        let nterms = rng.random_range(2..=5);
        for _ in 0..nterms {
            let mut e = vec![0u32; n];
            for _ in 0..rng.random_range(1..=3) {
                e[rng.random_range(0..n)] += 1;
            }
            terms.push((e, rng.random_range(-8i32..=8) as f64 / 4.0));
        }
        // a dominant linear term keeps the root regular in practice
        let mut lin = vec![0u32; n];
        lin[i] = 1;
        terms.push((lin, 4.0 + rng.random_range(0..4) as f64));
        let q = Polynomial::from_terms(n, terms).expect("in range");
        let c = q.evaluate(&root).expect("matching length");
        polys.push(q - Polynomial::constant(n, c));
    }
    let names = (1..=n).map(|k| format!("x{k}")).collect();
    let system = PolySystem::new(polys, names).expect("square system");
    let start = root.iter().map(|r| r + rng.random_range(-1e-6..1e-6)).collect();
    PlantedSystem { system, root, start }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SoundnessSummary {
    pub trials: usize,
    pub certified: usize,
    /// Certified boxes that miss the planted root.
    pub false_certificates: usize,
}

/// Runs [`viss`] on `trials` planted systems drawn from a seeded generator.
pub fn soundness_run(seed: u64, trials: usize, opts: &VissOptions) -> SoundnessSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SoundnessSummary {
        trials,
        ..Default::default()
    };
    for _ in 0..trials {
        let p = planted_system(&mut rng);
        if let Ok(r) = viss(&p.system, &p.start, opts) {
            out.certified += 1;
            let inside = r.x_box.iter().zip(&p.root).all(|(x, &v)| x.contains_point(v));
            if !inside {
                out.false_certificates += 1;
            }
        }
    }
    out
}
