mod common;

use common::{random_point, root_chain, start_chain, viss_fixtures};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use singcert::deflation::BlockKind;
use singcert::fixtures::{find, Fixture};
use singcert::linalg::numerical_rank;
use singcert::scalar::inverse_factorial;
use singcert::{DirectionEntry, Polynomial, Scalar};

fn structure<T: Scalar>(fx: &Fixture) {
    let states = start_chain::<T>(fx);
    for (s, st) in states.iter().enumerate() {
        assert_eq!(st.system().len(), fx.n << s, "{} order {s}", fx.name);
        assert_eq!(st.system().nvars(), st.system().len(), "{} order {s}", fx.name);
        assert_eq!(st.layout().total(), st.system().len());
        assert_eq!(st.y_tilde().len(), st.system().len());
    }
    let last = states.last().unwrap();
    assert!(last.coranks().windows(2).all(|w| w[1] <= w[0]), "{}", fx.name);
    for w in last.selections().windows(2) {
        assert!(w[1].nested_in(&w[0]), "{}: {:?}", fx.name, last.selections());
    }
    // F̃ with b = 0 is F exactly
    let total = last.layout().total();
    let b = last.layout().b_indices();
    for (p, q) in last.f_tilde().polys().iter().zip(last.original().polys()) {
        assert_eq!(p.substitute_zero(&b), q.extend_vars(total).unwrap(), "{}", fx.name);
    }
}

#[test]
fn squareness_monotonicity_and_nesting() {
    for fx in viss_fixtures() {
        for_field!(fx, structure);
    }
}

/// With `b = 0`, and every multiplier that weights the direction of a
/// zeroed unknown also zero, the smoothed system is the chain built from the
/// unperturbed `F`.
fn unsmoothed<T: Scalar>(fx: &Fixture) {
    let last = start_chain::<T>(fx).pop().unwrap();
    let mut zeroed = last.layout().b_indices();
    loop {
        let before = zeroed.len();
        for v in last.templates() {
            for (p, e) in v.iter().enumerate() {
                if let DirectionEntry::Var(l) = e {
                    if zeroed.contains(&p) && !zeroed.contains(l) {
                        zeroed.push(*l);
                    }
                }
            }
        }
        if zeroed.len() == before {
            break;
        }
    }
    let plain = last.unsmoothed_chain().unwrap();
    assert_eq!(plain.substitute_zero(&zeroed), plain, "{}", fx.name);
    assert_eq!(last.system().substitute_zero(&zeroed), plain, "{}", fx.name);
}

#[test]
fn zero_smoothing_recovers_unsmoothed_chain() {
    for fx in viss_fixtures() {
        for_field!(fx, unsmoothed);
    }
}

fn max_abs<T: Scalar>(v: impl IntoIterator<Item = T>) -> f64 {
    v.into_iter().map(|z| z.modulus()).fold(0.0, f64::max)
}

/// `F̃_x·v1 = JF·v1 − Σ_{s≥1} X'_s·b_s` where `X'_s` has `x_c^{s−1}/(s−1)!`
/// in row `k` for the paired `(c, k)` of order `s`.
fn first_order_identity<T: Scalar>(fx: &Fixture) {
    let last = start_chain::<T>(fx).pop().unwrap();
    if last.order() < 2 {
        return;
    }
    let n = fx.n;
    let total = last.layout().total();
    let v1 = &last.templates()[0];
    let x_vars: Vec<usize> = (0..n).collect();
    let lhs_sys = last.f_tilde().jacobian_apply(&x_vars, v1).unwrap();
    let f_full = singcert::PolySystem::new(
        last.original()
            .polys()
            .iter()
            .map(|p| p.extend_vars(total).unwrap())
            .collect(),
        last.layout().names(),
    )
    .unwrap();
    let jf_v1 = f_full.jacobian_apply(&x_vars, v1).unwrap();
    let mut rhs: Vec<Polynomial<T>> = jf_v1.into_polys();
    for (s, sets) in last.selections().iter().enumerate().skip(1) {
        let block = last.layout().block(BlockKind::Smoothing(s)).unwrap();
        let coef = T::from_real(inverse_factorial(s as u32 - 1));
        for ((&c, &k), b) in sets.columns.iter().zip(&sets.rows).zip(block.indices()) {
            let mut e = vec![0u32; total];
            e[c] = s as u32 - 1;
            e[b] = 1;
            let term = Polynomial::from_terms(total, [(e, coef)]).unwrap();
            rhs[k] = &rhs[k] - &term;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    for _ in 0..500 {
        let y: Vec<T> = random_point(&mut rng, total, fx.complex);
        let a = lhs_sys.evaluate(&y).unwrap();
        let scale = 1.0 + max_abs(a.iter().copied());
        for (i, p) in rhs.iter().enumerate() {
            let diff = (a[i] - p.evaluate(&y).unwrap()).modulus();
            assert!(diff <= 1e-12 * scale, "{} row {i}: {diff}", fx.name);
        }
    }
    // the second block of the final system is exactly these rows
    for i in 0..n {
        assert_eq!(
            last.system().polys()[n + i],
            lhs_sys.polys()[i],
            "{} row {}",
            fx.name,
            n + i
        );
    }
}

#[test]
fn perturbed_first_order_identity() {
    let mut checked = 0;
    for fx in viss_fixtures() {
        for_field!(fx, first_order_identity);
        checked += usize::from(fx.expected_coranks.len() > 2);
    }
    assert!(checked >= 4);
}

fn nullity<T: Scalar>(m: &DMatrix<T>, eps: f64) -> usize {
    m.ncols() - numerical_rank(m, eps).unwrap().rank
}

/// At `(x̂, λ̂1, 0)` the smoothed first-order system and the unsmoothed one
/// (without `b0` columns) have null spaces of equal dimension.
fn first_step_corank<T: Scalar>(fx: &Fixture) {
    let states = root_chain::<T>(fx);
    let st = &states[1];
    let j_smooth = st.jacobian_at_y().unwrap();
    let b0: Vec<usize> = st.layout().block(BlockKind::Smoothing(0)).unwrap().indices().collect();
    let keep: Vec<usize> = (0..st.layout().total()).filter(|i| !b0.contains(i)).collect();
    let plain = st.unsmoothed_chain().unwrap();
    let j_plain = plain.jacobian_at(st.y_tilde()).unwrap().select_columns(&keep);
    assert_eq!(nullity(&j_smooth, fx.eps), nullity(&j_plain, fx.eps), "{}", fx.name);
    assert_eq!(nullity(&j_smooth, fx.eps), st.current_corank(), "{}", fx.name);
}

#[test]
fn smoothing_preserves_first_order_corank_at_exact_roots() {
    for name in ["dz1", "dz2", "rugr09"] {
        first_step_corank::<f64>(find(name).unwrap());
    }
    for fx in viss_fixtures() {
        for_field!(fx, first_step_corank);
    }
}

#[test]
fn exact_roots_reproduce_reference_coranks() {
    for fx in viss_fixtures() {
        let seq = if fx.complex {
            root_chain::<num_complex::Complex64>(fx)
                .pop()
                .unwrap()
                .coranks()
                .to_vec()
        } else {
            root_chain::<f64>(fx).pop().unwrap().coranks().to_vec()
        };
        assert_eq!(seq, fx.expected_coranks, "{}", fx.name);
    }
}

#[test]
fn templates_fix_selected_entries() {
    let last = start_chain::<f64>(find("dz2").unwrap()).pop().unwrap();
    for (sets, v) in last.selections().iter().zip(last.templates()) {
        for (p, e) in v.iter().enumerate() {
            assert_eq!(sets.columns.contains(&p), *e == DirectionEntry::One);
        }
    }
}
