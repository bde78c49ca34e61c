use ncleap::algebra::Backend;
use ncleap::ncnet::*;
use std::time::Instant;

fn main() {
    for (backend, d) in [(Backend::Scalar, 1usize), (Backend::Rational, 2)] {
        let net = NumericNetwork::random(5, backend, d, 3);
        let mut w = net.xy_weights().unwrap();
        let t0 = Instant::now();
        let t_start = t_invariants(&w, 6).unwrap();
        for _ in 0..20 {
            w = step_xy(&w).unwrap();
        }
        let t_mid = Instant::now();
        let t_end = t_invariants(&w, 6).unwrap();
        println!(
            "backend {:?}: stepped in {:?}, t_end in {:?}, conserved={}",
            backend,
            t_mid.duration_since(t0),
            t_mid.elapsed(),
            t_start == t_end
        );
    }
}
