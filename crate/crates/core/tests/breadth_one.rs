use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use singcert::breadth_one::{cross_check_with_viss, verify_breadth_one_fixture, BreadthOneFixture};
use singcert::krawczyk::{verify_root, VerifyOptions};
use singcert::sysio::parse_system;
use singcert::{Enclosure, Interval, PolySystem};

/// The eight equations typed in a second time, independently of the
/// fixture file.
fn hand_entered(v: &[f64]) -> [f64; 8] {
    let (x1, x2, b1, b2, b3, l1, l2, l3) = (v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]);
    [
        x1 * x1 * x2 - x1 * x2 * x2 - b1 - b2 * x2 - b3 * x2 * x2 / 2.0,
        x1 - x2 * x2,
        2.0 * l1 * x1 * x2 - l1 * x2 * x2 + x1 * x1 - 2.0 * x1 * x2 - b2 - b3 * x2,
        l1 - 2.0 * x2,
        l1 * l1 * x2 + 2.0 * l1 * x1 - 2.0 * l1 * x2 + 2.0 * l2 * x1 * x2 - l2 * x2 * x2 - x1 - b3 / 2.0,
        l2 - 1.0,
        l1 * l1 + 2.0 * l1 * l2 * x2 - l1 + 2.0 * l2 * x1 - 2.0 * l2 * x2 + 2.0 * l3 * x1 * x2 - l3 * x2 * x2,
        l3,
    ]
}

#[test]
fn transcription_matches_hand_entered_copy() {
    let f = BreadthOneFixture::load().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for _ in 0..200 {
        // small dyadic points keep both evaluations exact
        let p: Vec<f64> = (0..8).map(|_| rng.random_range(-32i32..=32) as f64 / 16.0).collect();
        let a = f.system.evaluate(&p).unwrap();
        let b = hand_entered(&p);
        for i in 0..8 {
            assert_eq!(a[i], b[i], "row {i} at {p:?}");
        }
    }
}

#[test]
fn printed_start_certifies_tightly() {
    let f = BreadthOneFixture::load().unwrap();
    let c = verify_breadth_one_fixture().unwrap();
    assert!(c.is_certified());
    assert_eq!(f.mu * f.n(), f.system.len());
    assert!(c.max_magnitude(f.x_indices()) <= 1e-12);
    assert!(c.max_magnitude(f.b_indices()) <= 1e-12);
}

#[test]
fn exact_root_start_gives_a_tiny_box() {
    let f = BreadthOneFixture::load().unwrap();
    let c = verify_root(&f.system, &f.exact_root(), &VerifyOptions::default()).unwrap();
    assert!(c.is_certified());
    assert!(c.inclusion.iter().all(|i| i.width() <= 1e-300));
}

#[test]
fn altered_row_does_not_certify_the_original_box() {
    let f = BreadthOneFixture::load().unwrap();
    let orig = verify_breadth_one_fixture().unwrap();
    let text = singcert::sysio::format_system(&f.system).replace("lam2 - 1", "lam2 - 2");
    let altered: PolySystem<f64> = parse_system(&text).unwrap();
    assert_ne!(altered, f.system);
    let c = verify_root(&altered, &f.start, &VerifyOptions::default()).unwrap();
    if c.is_certified() {
        let lam2 = f.lambda_indices()[1];
        assert!(c.inclusion[lam2].intersection(&orig.inclusion[lam2]).is_none());
        assert!(!c.inclusion[lam2].contains(1.0));
    }
}

#[test]
fn viss_cross_check() {
    let r = cross_check_with_viss().unwrap();
    assert!(r.breadth_one.is_certified());
    assert!(r.viss.is_certified());
    assert_eq!(r.breadth_one_size, 8);
    assert_eq!(r.viss_size, 16);
    assert_eq!(r.viss.corank_sequence, vec![1, 1, 1, 0]);
    assert!(r.viss.b_box.iter().all(Enclosure::contains_zero));
    // both x boxes hold points with |x| <= 1e-10
    let f = BreadthOneFixture::load().unwrap();
    let near = Interval::symmetric(1e-10);
    for (k, &i) in f.x_indices().iter().enumerate() {
        assert!(r.breadth_one.inclusion[i].intersection(&near).is_some());
        assert!(r.viss.x_box[k].intersection(&near).is_some());
    }
    assert!(r.viss_x_bound() <= 1e-10 && r.breadth_one_x_bound <= 1e-12);
}
