use ymflow::flow::*;
use ymflow::lattice::*;
use std::time::Instant;
fn main() {
    for &(mag, t_end) in &[(0.3f64, 0.5f64), (0.1, 0.5)] {
        let t0 = Instant::now();
        let lat = Lattice::hypercubic(8, 1.0).unwrap();
        let u = hot_start(lat, 42, mag);
        let p = FlowParams { alpha: 1.1, dt: 0.001, t_end, integrator: Integrator::Rk3,
            adaptive: true, tolerance: 1e-12, record_every: 1 };
        let run = run_flow(&u, &p).unwrap();
        let mut integral = 0.0;
        for w in run.trace.windows(2) {
            integral += 0.5 * (w[0].dissipation + w[1].dissipation) * (w[1].t - w[0].t);
        }
        let drop = run.trace[0].action - run.trace.last().unwrap().action;
        let budget = run.trace[0].action - lat.volume();
        println!("mag {mag}: drop {drop:.6}, integral {integral:.6}, defect {:.3e}, rel {:.3e}  [{:.1?}]",
            (drop-integral).abs(), (drop-integral).abs()/budget, t0.elapsed());
    }
}
