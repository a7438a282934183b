use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use fracflux::burgers::{self, CharParams, Characteristics};
use fracflux::diagnostics::{self, Analyticity};
use fracflux::evolve::{self, DysonSubstep, Scheme};
use fracflux::{initial, mild, Grid, PhysicsParams, Profile, SolverConfig};

fn second_moment(p: &Profile) -> f64 {
    let g = p.grid();
    g.nodes().iter().zip(p.values()).map(|(x, r)| x * x * r).sum::<f64>() * g.dx()
}

#[test]
fn scale_invariance_of_the_direct_solver() {
    // λ^{α−1} ρ(λx, λ^α t) solves the same equation on the dilated torus
    let (alpha, lam) = (1.5, 2.0);
    let params = PhysicsParams::new(alpha, 1.0, 0.0).unwrap();
    let g = Grid::new(512, 16.0).unwrap();
    let g_small = Grid::new(512, 16.0 / lam).unwrap();
    let p0 = initial::gaussian(g, 0.8, 1.0).unwrap();
    let q0 = Profile::new(g_small, p0.values().iter().map(|v| lam.powf(alpha - 1.0) * v).collect()).unwrap();
    let t = 0.4;
    let a = evolve::run(&p0, &params, &SolverConfig::new(t / 200.0, t).unwrap()).unwrap();
    let ts = t / lam.powf(alpha);
    let b = evolve::run(&q0, &params, &SolverConfig::new(ts / 200.0, ts).unwrap()).unwrap();
    let scale = lam.powf(alpha - 1.0);
    let gap = a
        .last()
        .1
        .values()
        .iter()
        .zip(b.last().1.values())
        .map(|(x, y)| (scale * x - y).abs())
        .fold(0.0, f64::max);
    assert!(gap < 1e-12, "{gap}");
}

/// Closed-form `∫x²ρ` for α = 2 and unit mass. On the torus the Hilbert kernel
/// is `cot(πz/2L)/2L`, whose leading correction adds `−(π/6L²) m₂` to the rate.
fn second_moment_law(m2_0: f64, nu: f64, gamma: f64, half_length: f64, t: f64) -> f64 {
    let a = 1.0 / PI + 2.0 * nu;
    let b = 2.0 * gamma + PI / (6.0 * half_length * half_length);
    let m2_star = a / b;
    m2_star + (m2_0 - m2_star) * (-b * t).exp()
}

#[test]
fn second_moment_grows_linearly_without_confinement() {
    let g = Grid::new(1024, 32.0).unwrap();
    let p0 = initial::semicircle(g);
    let params = PhysicsParams::new(2.0, 0.5, 0.0).unwrap();
    let traj = evolve::run(&p0, &params, &SolverConfig::new(0.01, 1.0).unwrap().with_record_every(10)).unwrap();
    for (t, p) in traj.times().iter().zip(traj.profiles()) {
        let expected = second_moment_law(second_moment(&p0), 0.5, 0.0, 32.0, *t);
        assert!((second_moment(p) - expected).abs() < 5e-6, "t = {t}: {} vs {expected}", second_moment(p));
    }
}

#[test]
fn confined_run_relaxes_second_moment() {
    let g = Grid::new(2048, 32.0).unwrap();
    let p0 = initial::semicircle(g);
    let (nu, gamma) = (0.5, 1.0);
    let params = PhysicsParams::new(2.0, nu, gamma).unwrap();
    let traj = evolve::run(&p0, &params, &SolverConfig::new(0.005, 1.0).unwrap().with_record_every(20)).unwrap();
    for (t, p) in traj.times().iter().zip(traj.profiles()) {
        assert!((p.mass() - 1.0).abs() < 1e-6);
        // the confined run is the dilation of a γ = 0 run on the clock τ(t)
        let s2 = (2.0 * gamma * t).exp();
        let tau = (s2 - 1.0) / (2.0 * gamma);
        let expected = second_moment_law(second_moment(&p0), nu, 0.0, 32.0, tau) / s2;
        assert!((second_moment(p) - expected).abs() < 5e-6, "t = {t}: {} vs {expected}", second_moment(p));
    }
}

#[test]
fn energy_descends_along_alpha_two_run() {
    let g = Grid::new(1024, 16.0).unwrap();
    let p0 = initial::smoothed_semicircle(g, 0.1, 0.0).unwrap();
    let params = PhysicsParams::new(2.0, 1.0, 0.0).unwrap();
    let traj = evolve::run(&p0, &params, &SolverConfig::new(0.005, 1.0).unwrap().with_record_every(10)).unwrap();
    let e: Vec<f64> = traj
        .profiles()
        .iter()
        .map(|p| diagnostics::energy(p, 0.0, 1.0).unwrap().total)
        .collect();
    for w in e.windows(2) {
        assert!(w[1] <= w[0] + 1e-10, "{} > {}", w[1], w[0]);
    }
}

#[test]
fn splitting_conserves_and_contracts() {
    let g = Grid::new(1024, 8.0).unwrap();
    let p0 = initial::semicircle(g);
    let params = PhysicsParams::new(1.5, 1.0, 0.0).unwrap();
    let cfg = SolverConfig::new(0.02, 0.5).unwrap().with_scheme(Scheme::Splitting);
    let traj = evolve::run(&p0, &params, &cfg).unwrap();
    let ps = traj.profiles();
    for w in ps.windows(2) {
        assert!((w[1].mass() - w[0].mass()).abs() < 1e-8);
        assert!(w[1].lp_norm(1.0).unwrap() <= w[0].lp_norm(1.0).unwrap() + 1e-6);
        assert!(diagnostics::h_half_seminorm(&w[1]) <= diagnostics::h_half_seminorm(&w[0]) + 1e-6);
    }
}

#[test]
fn dyson_substep_variants_agree() {
    let g = Grid::new(2048, 16.0).unwrap();
    let p = initial::smoothed_semicircle(g, 0.1, 1e-3).unwrap();
    let mut cfg = SolverConfig::new(0.05, 0.05).unwrap();
    let spectral = evolve::dyson_step(&p, 0.05, &cfg).unwrap();
    cfg.dyson_substep = DysonSubstep::Characteristics;
    let exact = evolve::dyson_step(&p, 0.05, &cfg).unwrap();
    let gap = spectral.linf_distance(&exact).unwrap();
    assert!(gap < 1e-3, "{gap}");
    assert!((exact.mass() - p.mass()).abs() < 1e-6);
}

#[test]
fn direct_trajectory_is_a_mild_fixed_point() {
    let g = Grid::new(2048, 16.0).unwrap();
    let p0 = initial::semicircle(g);
    let params = PhysicsParams::new(1.5, 1.0, 0.0).unwrap();
    let mesh = mild::graded_mesh(0.25, 64, 1.5).unwrap();
    let direct = mild::direct_on_mesh(&p0, &params, &mesh, 1e-3).unwrap();
    let image = mild::duhamel_apply(&direct, &p0, &params).unwrap();
    let residual = mild::xt_distance(&image, &direct, 1.5).unwrap();
    assert!(residual < 5e-3, "{residual}");
}

#[test]
fn smallness_regression_value() {
    let g = Grid::new(1024, 16.0).unwrap();
    let params = PhysicsParams::new(1.5, 1.0, 0.0).unwrap();
    let a = mild::measure_smallness(&initial::semicircle(g), &params, 0.1).unwrap();
    let b = mild::measure_smallness(&initial::semicircle(g), &params, 0.1).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
    assert!((a - 0.250_016_483_646_787_2).abs() < 1e-12, "{a:.16}");
}

#[test]
fn trace_is_continuous_at_zero() {
    let g = Grid::new(2048, 16.0).unwrap();
    let p0 = initial::smoothed_semicircle(g, 0.1, 1e-3).unwrap();
    let cp = CharParams::new(1.0, 1.0, 0.0).unwrap();
    let sol = burgers::trace_solution(&p0, 1e-3, &cp).unwrap();
    let gap = sol.rho.iter().zip(p0.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap < 5e-3, "{gap}");
}

#[test]
fn characteristics_jacobian_is_positive() {
    let g = Grid::new(1024, 16.0).unwrap();
    let p0 = initial::smoothed_semicircle(g, 0.1, 1e-3).unwrap();
    let cp = CharParams::new(1.0, 1.0, 0.0).unwrap();
    let ch = Characteristics::new(&p0, 0.7, &cp).unwrap();
    let xs: Vec<f64> = (0..41).map(|i| -4.0 + 0.2 * i as f64).collect();
    let sol = burgers::trace_at(&p0, &xs, 0.7, &cp).unwrap();
    for w in &sol.preimages {
        let w = w.to_complex();
        let j = ch.jacobian(w);
        assert!(j > 0.0);
        // against finite differences of the forward map
        let h = 1e-6;
        let fd = (ch.forward(w + h) - ch.forward(w - h)) / (2.0 * h);
        assert!((fd.norm_sqr() - j).abs() < 1e-5 * (1.0 + j));
    }
}

#[test]
fn imaginary_component_crosses_once() {
    let g = Grid::new(1024, 16.0).unwrap();
    let p0 = initial::smoothed_semicircle(g, 0.1, 1e-3).unwrap();
    let cp = CharParams::new(1.0, 1.0, 0.0).unwrap();
    let ch = Characteristics::new(&p0, 0.5, &cp).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let x = rng.gen_range(-3.0..3.0);
        let target = rng.gen_range(0.0..2.0);
        let ys: Vec<f64> = (1..=400).map(|k| 1e-4 * 1.04f64.powi(k)).collect();
        let signs: Vec<bool> = ys.iter().map(|&y| ch.components(x, y).1 > target).collect();
        let crossings = signs.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(crossings, 1, "x = {x}, target = {target}");
    }
}

#[test]
fn lower_bound_with_negative_data() {
    let g = Grid::new(1024, 16.0).unwrap();
    let mu = 0.05;
    let p0 = initial::shifted(&initial::smoothed_semicircle(g, 0.2, 0.0).unwrap(), -mu);
    let cp = CharParams::new(1.0, 1.0, mu).unwrap();
    let t = 0.5;
    let xs: Vec<f64> = (0..61).map(|i| -6.0 + 0.2 * i as f64).collect();
    let sol = burgers::trace_at(&p0, &xs, t, &cp).unwrap();
    let floor = -mu * (cp.gamma * t).exp() - 1e-9;
    assert!(sol.rho.iter().all(|r| *r >= floor));
}

#[test]
fn preimages_approach_the_longtime_limit() {
    let g = Grid::new(1024, 16.0).unwrap();
    let p0 = initial::smoothed_semicircle(g, 0.1, 1e-3).unwrap();
    let cp = CharParams::new(1.0, 1.0, 0.0).unwrap();
    let z = Complex64::new(0.5, 0.0);
    let w_inf = burgers::longtime_limit_w(z, 1.0, 1.0).unwrap();
    assert!(w_inf.im > 0.0);
    let gaps: Vec<f64> = [2.0, 4.0, 8.0]
        .iter()
        .map(|&t| {
            let w = burgers::invert_map(z, t, &p0, &cp).unwrap().to_complex();
            (w * (-t).exp() - w_inf).norm()
        })
        .collect();
    assert!(gaps[1] <= 0.5 * gaps[0] && gaps[2] <= 0.5 * gaps[1], "{gaps:?}");
}

#[test]
fn analyticity_radius_grows() {
    let g = Grid::new(1024, 16.0).unwrap();
    let p0 = initial::smoothed_semicircle(g, 0.3, 0.0).unwrap();
    let params = PhysicsParams::new(1.5, 1.0, 0.0).unwrap();
    let traj = evolve::run(&p0, &params, &SolverConfig::new(0.005, 0.2).unwrap().with_record_every(8)).unwrap();
    let radii: Vec<Analyticity> = traj.profiles().iter().skip(1).map(diagnostics::analyticity_radius).collect();
    let mut last = 0.0;
    for r in radii {
        // snapshots whose spectrum reaches the noise floor are only flagged
        if let Analyticity::Radius(v) = r {
            assert!(v >= last * (1.0 - 1e-3), "{v} < {last}");
            last = v;
        }
    }
}
