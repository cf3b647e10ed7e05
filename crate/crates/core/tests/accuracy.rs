//! Convergence order of the pass integrators and agreement between schemes.

use recycle_reactor::integrator::integrate_pass;
use recycle_reactor::{IntegratorConfig, Method, ReactorParams, State};

fn outlet(method: Method, steps: usize, inlet: State, p: &ReactorParams) -> State {
    integrate_pass(inlet, p, &IntegratorConfig::new(method, steps))
        .unwrap()
        .outlet
}

/// Observed orders log2(e_N / e_2N) for N = 400, 800 on an igniting pass.
fn observed_orders(method: Method) -> Vec<f64> {
    let p = ReactorParams::reference(-0.0335);
    let inlet = State::new(0.2, 0.05);
    let reference = outlet(Method::Rk4, 40_000, inlet, &p);
    let err = |n| outlet(method, n, inlet, &p).sup_dist(&reference);
    [400, 800].iter().map(|&n| (err(n) / err(2 * n)).log2()).collect()
}

#[test]
fn euler_is_first_order() {
    for q in observed_orders(Method::Euler) {
        assert!((q - 1.0).abs() < 0.1, "{q}");
    }
}

#[test]
fn rk4_is_fourth_order() {
    for q in observed_orders(Method::Rk4) {
        assert!((q - 4.0).abs() < 0.3, "{q}");
    }
}

#[test]
fn rk38_is_fourth_order() {
    for q in observed_orders(Method::Rk38) {
        assert!((q - 4.0).abs() < 0.3, "{q}");
    }
}

#[test]
fn fourth_order_schemes_agree() {
    let p = ReactorParams::reference(-0.033003);
    for inlet in [State::new(0.0, 0.0), State::new(0.2, 0.05), State::new(0.35, 0.1)] {
        let a = outlet(Method::Rk4, 1600, inlet, &p);
        let b = outlet(Method::Rk38, 1600, inlet, &p);
        assert!(a.sup_dist(&b) < 1e-9, "{a:?} vs {b:?}");
    }
}

#[test]
fn euler_converges_to_rk4() {
    let p = ReactorParams::reference(-0.0335);
    let inlet = State::new(0.1, 0.0);
    let reference = outlet(Method::Rk4, 2000, inlet, &p);
    assert!(outlet(Method::Euler, 100_000, inlet, &p).sup_dist(&reference) < 1e-7);
}
