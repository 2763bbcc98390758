use orlicz_bounds::bound_engine::*;
use orlicz_bounds::nfunc::NFunction;
use orlicz_bounds::ou_model::OUModel;
use orlicz_bounds::MeasureGrid;

fn main() {
    let m = OUModel::new(1.0, 0.5, 0.5, 0.95, 2.4).unwrap();
    let (tau, b1) = (m.tau(), m.beta1());
    let dm = DeviationModel::stationary(move |h: f64| {
        std::f64::consts::SQRT_2 * (tau * h).powf(b1 / 2.0)
    });
    let z = m.zeta_spec();
    let u = NFunction::power(1.0, 2.0).unwrap();
    let g = MeasureGrid::lebesgue(m.t_horizon(), 64).unwrap();
    let norm = m.gamma2_closed(0.0).sqrt();
    let sm = m.sigma_beta2();
    let t_grid = BoundQuery::default_t_grid(&g, 9);
    let q = BoundQuery::new(vec![1.0],
        SearchSpec{grid:19, refine_steps:30, sweeps:2},
        SearchSpec{grid:19, refine_steps:30, sweeps:2}, 1e-6, t_grid.clone()).unwrap();
    // c_p landscape
    for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let cp = c_p(p, &g, &sm, &z, &u, &t_grid, 1e-6);
        println!("p={p}: C_p={cp:?}");
    }
    for x in [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0] {
        match theorem1_bound(x, norm, &dm, &sm, &z, &u, &g, &q) {
            Ok(b) => println!("x={x}: value={:.4} raw={:.4} a*={:.3} p*={:.3}", b.value, b.raw, b.alpha_star, b.p_star),
            Err(e) => println!("x={x}: ERR {e}"),
        }
    }
}
