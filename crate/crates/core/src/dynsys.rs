//! Benchmark dynamical systems with deterministic fixed-step integration
//! and a stochastically forced variant.

use std::collections::BTreeMap;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::timeseries::PointCloud;

type VectorField = Box<dyn Fn(&[f64], f64, &mut [f64]) + Send + Sync>;

/// Autonomous or time-dependent ODE right-hand side with named parameters.
pub struct OdeSystem {
    name: String,
    dimension: usize,
    params: BTreeMap<String, f64>,
    field: VectorField,
}

impl OdeSystem {
    pub fn new(
        name: impl Into<String>,
        dimension: usize,
        params: BTreeMap<String, f64>,
        field: VectorField,
    ) -> Self {
        OdeSystem {
            name: name.into(),
            dimension,
            params,
            field,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    /// Evaluate the vector field at (state, t) into `out`.
    pub fn eval(&self, state: &[f64], t: f64, out: &mut [f64]) {
        (self.field)(state, t, out);
    }
}

/// Integrated orbit: `states` has one row per retained step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: PointCloud,
    pub dt: f64,
    pub discarded_transient: usize,
}

fn check_finite(state: &[f64], step: usize) -> Result<()> {
    if state.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence { step });
    }
    Ok(())
}

fn states_to_cloud(states: Vec<f64>, dim: usize, dt: f64) -> PointCloud {
    let rows = states.len() / dim;
    let points = Array2::from_shape_vec((rows, dim), states).expect("row-major state buffer");
    PointCloud::new(points, dt).expect("integrator states checked finite")
}

/// Classical fixed-step 4th-order Runge-Kutta starting at `t0`.
///
/// Returns `steps + 1` states including `y0`, minus any `transient` prefix.
pub fn integrate_rk4_from(
    system: &OdeSystem,
    y0: &[f64],
    t0: f64,
    dt: f64,
    steps: usize,
    transient: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
    }
    if steps < 1 {
        return Err(Error::invalid("steps must be >= 1"));
    }
    if y0.len() != system.dimension() {
        return Err(Error::shape(format!(
            "y0 has {} components, system {} expects {}",
            y0.len(),
            system.name(),
            system.dimension()
        )));
    }
    if transient > steps {
        return Err(Error::invalid(format!(
            "transient {transient} exceeds steps {steps}"
        )));
    }
    let d = system.dimension();
    let mut y = y0.to_vec();
    check_finite(&y, 0)?;

    let mut k1 = vec![0.0; d];
    let mut k2 = vec![0.0; d];
    let mut k3 = vec![0.0; d];
    let mut k4 = vec![0.0; d];
    let mut tmp = vec![0.0; d];

    let mut kept = Vec::with_capacity((steps + 1 - transient) * d);
    if transient == 0 {
        kept.extend_from_slice(&y);
    }
    for step in 1..=steps {
        let t = t0 + (step - 1) as f64 * dt;
        system.eval(&y, t, &mut k1);
        for i in 0..d {
            tmp[i] = y[i] + 0.5 * dt * k1[i];
        }
        system.eval(&tmp, t + 0.5 * dt, &mut k2);
        for i in 0..d {
            tmp[i] = y[i] + 0.5 * dt * k2[i];
        }
        system.eval(&tmp, t + 0.5 * dt, &mut k3);
        for i in 0..d {
            tmp[i] = y[i] + dt * k3[i];
        }
        system.eval(&tmp, t + dt, &mut k4);
        for i in 0..d {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        check_finite(&y, step)?;
        if step >= transient {
            kept.extend_from_slice(&y);
        }
    }
    Ok(Trajectory {
        states: states_to_cloud(kept, d, dt),
        dt,
        discarded_transient: transient,
    })
}

/// RK4 from t = 0 with no transient discard.
pub fn integrate_rk4(system: &OdeSystem, y0: &[f64], dt: f64, steps: usize) -> Result<Trajectory> {
    integrate_rk4_from(system, y0, 0.0, dt, steps, 0)
}

/// Explicit Euler, the zero-noise limit of [`integrate_euler_maruyama`].
pub fn integrate_euler(system: &OdeSystem, y0: &[f64], dt: f64, steps: usize) -> Result<Trajectory> {
    integrate_euler_maruyama(system, y0, dt, steps, 0.0, 0, 0)
}

/// Euler-Maruyama with additive white noise:
/// `y_{n+1} = y_n + f(y_n) dt + xi0 sqrt(dt) eta_n`, eta i.i.d. standard
/// normal per component from a ChaCha stream seeded with `seed`.
///
/// With `xi0 = 0` no noise term is added and the path equals the plain
/// Euler trajectory bit for bit.
pub fn integrate_euler_maruyama(
    system: &OdeSystem,
    y0: &[f64],
    dt: f64,
    steps: usize,
    xi0: f64,
    seed: u64,
    transient: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
    }
    if !(0.0..=1.0).contains(&xi0) {
        return Err(Error::invalid(format!("xi0 must lie in [0, 1], got {xi0}")));
    }
    if y0.len() != system.dimension() {
        return Err(Error::shape(format!(
            "y0 has {} components, system {} expects {}",
            y0.len(),
            system.name(),
            system.dimension()
        )));
    }
    if transient > steps {
        return Err(Error::invalid(format!(
            "transient {transient} exceeds steps {steps}"
        )));
    }
    let d = system.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sqrt_dt = dt.sqrt();
    let mut y = y0.to_vec();
    check_finite(&y, 0)?;
    let mut f = vec![0.0; d];

    let mut kept = Vec::with_capacity((steps + 1 - transient) * d);
    if transient == 0 {
        kept.extend_from_slice(&y);
    }
    for step in 1..=steps {
        let t = (step - 1) as f64 * dt;
        system.eval(&y, t, &mut f);
        for i in 0..d {
            y[i] += f[i] * dt;
            if xi0 > 0.0 {
                let eta: f64 = StandardNormal.sample(&mut rng);
                y[i] += xi0 * sqrt_dt * eta;
            }
        }
        check_finite(&y, step)?;
        if step >= transient {
            kept.extend_from_slice(&y);
        }
    }
    Ok(Trajectory {
        states: states_to_cloud(kept, d, dt),
        dt,
        discarded_transient: transient,
    })
}

fn params3(names: [&str; 3], values: [f64; 3]) -> BTreeMap<String, f64> {
    names
        .iter()
        .zip(values)
        .map(|(n, v)| (n.to_string(), v))
        .collect()
}

/// Lorenz system: dx = sigma (y - x), dy = x (rho - z) - y, dz = x y - beta z.
pub fn lorenz_system(sigma: f64, rho: f64, beta: f64) -> OdeSystem {
    OdeSystem::new(
        "lorenz",
        3,
        params3(["sigma", "rho", "beta"], [sigma, rho, beta]),
        Box::new(move |y, _t, out| {
            out[0] = sigma * (y[1] - y[0]);
            out[1] = y[0] * (rho - y[2]) - y[1];
            out[2] = y[0] * y[1] - beta * y[2];
        }),
    )
}

pub const LORENZ_SIGMA: f64 = 10.0;
pub const LORENZ_RHO: f64 = 28.0;
pub const LORENZ_BETA: f64 = 2.667;
pub const LORENZ_DT: f64 = 0.004;

#[allow(clippy::too_many_arguments)]
pub fn simulate_lorenz(
    sigma: f64,
    rho: f64,
    beta: f64,
    y0: [f64; 3],
    dt: f64,
    steps: usize,
    transient: usize,
) -> Result<Trajectory> {
    integrate_rk4_from(&lorenz_system(sigma, rho, beta), &y0, 0.0, dt, steps, transient)
}

/// Lorenz with additive white-noise forcing on every component,
/// integrated by Euler-Maruyama.
pub fn simulate_lorenz_stochastic(
    xi0: f64,
    seed: u64,
    y0: [f64; 3],
    dt: f64,
    steps: usize,
    transient: usize,
) -> Result<Trajectory> {
    integrate_euler_maruyama(
        &lorenz_system(LORENZ_SIGMA, LORENZ_RHO, LORENZ_BETA),
        &y0,
        dt,
        steps,
        xi0,
        seed,
        transient,
    )
}

/// Roessler system: dx = -y - z, dy = x + a y, dz = b + z (x - c).
pub fn rossler_system(a: f64, b: f64, c: f64) -> OdeSystem {
    OdeSystem::new(
        "rossler",
        3,
        params3(["a", "b", "c"], [a, b, c]),
        Box::new(move |y, _t, out| {
            out[0] = -y[1] - y[2];
            out[1] = y[0] + a * y[1];
            out[2] = b + y[2] * (y[0] - c);
        }),
    )
}

pub const ROSSLER_A: f64 = 0.2;
pub const ROSSLER_B: f64 = 0.2;
pub const ROSSLER_C: f64 = 5.7;
pub const ROSSLER_DT: f64 = 0.125;

#[allow(clippy::too_many_arguments)]
pub fn simulate_rossler(
    a: f64,
    b: f64,
    c: f64,
    y0: [f64; 3],
    dt: f64,
    steps: usize,
    transient: usize,
) -> Result<Trajectory> {
    integrate_rk4_from(&rossler_system(a, b, c), &y0, 0.0, dt, steps, transient)
}

/// Inner equilibrium of the Roessler flow, the root of
/// a z^2 - c z + b = 0 with the smaller magnitude.
pub fn rossler_equilibrium(a: f64, b: f64, c: f64) -> [f64; 3] {
    let disc = (c * c - 4.0 * a * b).sqrt();
    let z = (c - disc) / (2.0 * a);
    [a * z, -z, z]
}

/// Quasiperiodic torus traced as a non-autonomous flow; with winding
/// number `n` irrational the orbit never closes. The solution is
/// x = (r + a cos nt) cos t, y = (r + a cos nt) sin t, z = a sin nt.
pub fn torus_system(r: f64, a: f64, n: f64) -> OdeSystem {
    OdeSystem::new(
        "torus",
        3,
        params3(["r", "a", "n"], [r, a, n]),
        Box::new(move |_y, t, out| {
            let (sin_nt, cos_nt) = (n * t).sin_cos();
            let (sin_t, cos_t) = t.sin_cos();
            out[0] = -a * n * sin_nt * cos_t - (r + a * cos_nt) * sin_t;
            out[1] = -a * n * sin_nt * sin_t + (r + a * cos_nt) * cos_t;
            out[2] = a * n * cos_nt;
        }),
    )
}

pub const TORUS_R: f64 = 1.0;
pub const TORUS_A: f64 = 0.5;
pub const TORUS_N: f64 = 15.3;
pub const TORUS_DT: f64 = 0.02;

/// Point of the torus parametrization at time `t`.
pub fn torus_point(r: f64, a: f64, n: f64, t: f64) -> [f64; 3] {
    let tube = r + a * (n * t).cos();
    [tube * t.cos(), tube * t.sin(), a * (n * t).sin()]
}

/// Integrate the torus flow starting from the parametric point at `t0`.
pub fn simulate_torus_from(
    r: f64,
    a: f64,
    n: f64,
    t0: f64,
    dt: f64,
    steps: usize,
    transient: usize,
) -> Result<Trajectory> {
    let y0 = torus_point(r, a, n, t0);
    integrate_rk4_from(&torus_system(r, a, n), &y0, t0, dt, steps, transient)
}

pub fn simulate_torus(r: f64, a: f64, n: f64, dt: f64, steps: usize) -> Result<Trajectory> {
    simulate_torus_from(r, a, n, 0.0, dt, steps, 0)
}

/// Resource-competition ecosystem: 5 species on 5 nutrients.
///
/// State ordering is `[R_1..R_5, N_1..N_5]` so that the first column is the
/// resource series used as the default measurement channel.
pub const ECOSYSTEM_DIM: usize = 10;
pub const ECOSYSTEM_D: f64 = 0.25;
pub const ECOSYSTEM_R_GROWTH: f64 = 1.0;
pub const ECOSYSTEM_M: f64 = 0.25;
pub const ECOSYSTEM_S: [f64; 5] = [6.0, 10.0, 14.0, 4.0, 9.0];
/// Half-saturation constants, K[resource][species].
pub const ECOSYSTEM_K: [[f64; 5]; 5] = [
    [0.39, 0.34, 0.30, 0.24, 0.23],
    [0.22, 0.39, 0.34, 0.30, 0.27],
    [0.27, 0.22, 0.39, 0.34, 0.30],
    [0.30, 0.24, 0.22, 0.39, 0.34],
    [0.34, 0.30, 0.22, 0.20, 0.39],
];
/// Consumption rates, c[resource][species].
pub const ECOSYSTEM_C: [[f64; 5]; 5] = [
    [0.04, 0.04, 0.07, 0.04, 0.04],
    [0.08, 0.08, 0.08, 0.10, 0.08],
    [0.10, 0.10, 0.10, 0.10, 0.14],
    [0.05, 0.03, 0.03, 0.03, 0.03],
    [0.07, 0.09, 0.07, 0.07, 0.07],
];

pub fn ecosystem_system() -> OdeSystem {
    let params = BTreeMap::from([
        ("D".to_string(), ECOSYSTEM_D),
        ("r".to_string(), ECOSYSTEM_R_GROWTH),
        ("m".to_string(), ECOSYSTEM_M),
    ]);
    OdeSystem::new(
        "ecosystem",
        ECOSYSTEM_DIM,
        params,
        Box::new(move |y, _t, out| {
            let resources = &y[0..5];
            let species = &y[5..10];
            // Liebig growth: the most limiting resource sets the rate.
            let mut mu = [0.0; 5];
            for i in 0..5 {
                let mut rate = f64::INFINITY;
                for j in 0..5 {
                    let r_j = resources[j];
                    rate = rate.min(ECOSYSTEM_R_GROWTH * r_j / (ECOSYSTEM_K[j][i] + r_j));
                }
                mu[i] = rate;
            }
            for j in 0..5 {
                let mut consumption = 0.0;
                for i in 0..5 {
                    consumption += ECOSYSTEM_C[j][i] * mu[i] * species[i];
                }
                out[j] = ECOSYSTEM_D * (ECOSYSTEM_S[j] - resources[j]) - consumption;
            }
            for i in 0..5 {
                out[5 + i] = species[i] * (mu[i] - ECOSYSTEM_M);
            }
        }),
    )
}

/// Default on-attractor-ish start: resources at supply, small positive
/// abundances.
pub fn ecosystem_default_y0() -> [f64; ECOSYSTEM_DIM] {
    let mut y0 = [0.0; ECOSYSTEM_DIM];
    y0[..5].copy_from_slice(&ECOSYSTEM_S);
    for i in 0..5 {
        y0[5 + i] = 0.1 + 0.1 * i as f64;
    }
    y0
}

pub fn simulate_ecosystem(
    y0: &[f64; ECOSYSTEM_DIM],
    dt: f64,
    steps: usize,
    transient: usize,
) -> Result<Trajectory> {
    integrate_rk4_from(&ecosystem_system(), y0, 0.0, dt, steps, transient)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_system(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> OdeSystem {
        OdeSystem::new(
            "scalar",
            1,
            BTreeMap::new(),
            Box::new(move |y, _t, out| out[0] = f(y[0])),
        )
    }

    #[test]
    fn rk4_constant_field_stays_put() {
        let sys = scalar_system(|_| 0.0);
        let traj = integrate_rk4(&sys, &[3.0], 0.1, 50).unwrap();
        assert_eq!(traj.states.len(), 51);
        assert!(traj.states.points().iter().all(|&v| v == 3.0));
    }

    #[test]
    fn rk4_exponential_matches_closed_form() {
        let sys = scalar_system(|y| y);
        let traj = integrate_rk4(&sys, &[1.0], 0.01, 100).unwrap();
        let last = traj.states.points()[[100, 0]];
        assert!((last - std::f64::consts::E).abs() < 1e-8);
    }

    #[test]
    fn rk4_is_fourth_order() {
        // Global error on dy = y at t = 1 for halved steps; the log-log
        // slope must sit at 4.
        let sys = scalar_system(|y| y);
        let dts: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
        let errs: Vec<f64> = dts
            .iter()
            .map(|&dt| {
                let steps = (1.0 / dt).round() as usize;
                let traj = integrate_rk4(&sys, &[1.0], dt, steps).unwrap();
                (traj.states.points()[[steps, 0]] - std::f64::consts::E).abs()
            })
            .collect();
        // Least-squares slope of log err vs log dt.
        let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
        let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        let xm = xs.iter().sum::<f64>() / xs.len() as f64;
        let ym = ys.iter().sum::<f64>() / ys.len() as f64;
        let slope = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - xm) * (y - ym))
            .sum::<f64>()
            / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>();
        assert!((slope - 4.0).abs() < 0.2, "observed order {slope}");
        // Halving dt shrinks the error by roughly 16x.
        let ratio = errs[0] / errs[1];
        assert!((10.0..24.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rk4_reports_divergence_step() {
        let sys = scalar_system(|y| y * y);
        let err = integrate_rk4(&sys, &[1.0], 1.0, 100).unwrap_err();
        match err {
            Error::Divergence { step } => assert!(step > 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lorenz_origin_is_fixed_point() {
        let traj = simulate_lorenz(
            LORENZ_SIGMA,
            LORENZ_RHO,
            LORENZ_BETA,
            [0.0, 0.0, 0.0],
            LORENZ_DT,
            200,
            0,
        )
        .unwrap();
        assert!(traj.states.points().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lorenz_stays_in_bounding_box() {
        let traj = simulate_lorenz(
            LORENZ_SIGMA,
            LORENZ_RHO,
            LORENZ_BETA,
            [-9.8, -15.2, 20.5],
            LORENZ_DT,
            60_000,
            5_000,
        )
        .unwrap();
        for row in traj.states.points().rows() {
            assert!(row[0].abs() < 25.0);
            assert!(row[1].abs() < 30.0);
            assert!(row[2] > 0.0 && row[2] < 50.0);
        }
    }

    #[test]
    fn stochastic_zero_noise_equals_euler() {
        let sys = lorenz_system(LORENZ_SIGMA, LORENZ_RHO, LORENZ_BETA);
        let em = simulate_lorenz_stochastic(0.0, 42, [1.0, 1.0, 1.0], 0.0004, 2_000, 0).unwrap();
        let euler = integrate_euler(&sys, &[1.0, 1.0, 1.0], 0.0004, 2_000).unwrap();
        assert_eq!(em.states.points(), euler.states.points());
    }

    #[test]
    fn stochastic_replay_is_bit_identical() {
        let a = simulate_lorenz_stochastic(0.5, 7, [1.0, 1.0, 20.0], 0.0004, 3_000, 0).unwrap();
        let b = simulate_lorenz_stochastic(0.5, 7, [1.0, 1.0, 20.0], 0.0004, 3_000, 0).unwrap();
        assert_eq!(a.states.points(), b.states.points());
    }

    #[test]
    fn pure_noise_increment_variance() {
        // With f = 0 the increments are xi0 sqrt(dt) eta, so their sample
        // variance must approach xi0^2 dt.
        let sys = OdeSystem::new(
            "null",
            1,
            BTreeMap::new(),
            Box::new(|_y, _t, out| out[0] = 0.0),
        );
        let xi0 = 0.5;
        let dt = 0.01;
        let steps = 100_000;
        let traj = integrate_euler_maruyama(&sys, &[0.0], dt, steps, xi0, 99, 0).unwrap();
        let pts = traj.states.points();
        let increments: Vec<f64> = (1..=steps).map(|i| pts[[i, 0]] - pts[[i - 1, 0]]).collect();
        let mean = increments.iter().sum::<f64>() / steps as f64;
        let var = increments.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / steps as f64;
        let expected = xi0 * xi0 * dt;
        assert!(
            (var - expected).abs() / expected < 0.05,
            "var {var}, expected {expected}"
        );
    }

    #[test]
    fn rossler_equilibrium_residual() {
        let eq = rossler_equilibrium(ROSSLER_A, ROSSLER_B, ROSSLER_C);
        let sys = rossler_system(ROSSLER_A, ROSSLER_B, ROSSLER_C);
        let mut out = [0.0; 3];
        sys.eval(&eq, 0.0, &mut out);
        for v in out {
            assert!(v.abs() < 1e-10, "residual {v}");
        }
    }

    #[test]
    fn rossler_bounded_and_mostly_positive_z() {
        let traj = simulate_rossler(
            ROSSLER_A,
            ROSSLER_B,
            ROSSLER_C,
            [1.0, 1.0, 0.2],
            ROSSLER_DT,
            20_000,
            2_000,
        )
        .unwrap();
        for row in traj.states.points().rows() {
            assert!(row[0].abs() < 15.0 && row[1].abs() < 15.0);
            assert!(row[2] > -0.5);
        }
    }

    #[test]
    fn rossler_halved_step_consistency() {
        let y0 = [1.0, 1.0, 0.2];
        let endpoint = |dt: f64, steps: usize| {
            let t = simulate_rossler(ROSSLER_A, ROSSLER_B, ROSSLER_C, y0, dt, steps, 0).unwrap();
            let p = t.states.points();
            [p[[steps, 0]], p[[steps, 1]], p[[steps, 2]]]
        };
        // Richardson-style order check over one model-time unit: the
        // distance between successive refinements shrinks ~16x per halving.
        let coarse = endpoint(0.02, 50);
        let mid = endpoint(0.01, 100);
        let fine = endpoint(0.005, 200);
        let dist = |a: &[f64; 3], b: &[f64; 3]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt()
        };
        let ratio = dist(&coarse, &mid) / dist(&mid, &fine);
        assert!((8.0..32.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn torus_starts_at_parametric_point() {
        let traj = simulate_torus(TORUS_R, TORUS_A, TORUS_N, TORUS_DT, 10).unwrap();
        let p = traj.states.points();
        assert!((p[[0, 0]] - 1.5).abs() < 1e-14);
        assert!(p[[0, 1]].abs() < 1e-14);
        assert!(p[[0, 2]].abs() < 1e-14);
    }

    #[test]
    fn torus_surface_identity_holds() {
        let traj = simulate_torus(TORUS_R, TORUS_A, TORUS_N, TORUS_DT, 2_000).unwrap();
        for row in traj.states.points().rows() {
            let tube = (row[0] * row[0] + row[1] * row[1]).sqrt() - TORUS_R;
            let resid = tube * tube + row[2] * row[2] - TORUS_A * TORUS_A;
            assert!(resid.abs() < 1e-4, "surface residual {resid}");
        }
    }

    #[test]
    fn torus_orbit_does_not_close_after_two_pi() {
        let dt = 0.001;
        let steps = (2.0 * std::f64::consts::PI / dt).round() as usize;
        let traj = simulate_torus(TORUS_R, TORUS_A, TORUS_N, dt, steps).unwrap();
        let p = traj.states.points();
        let d2: f64 = (0..3)
            .map(|j| (p[[steps, j]] - p[[0, j]]) * (p[[steps, j]] - p[[0, j]]))
            .sum();
        assert!(d2.sqrt() > 0.1, "orbit nearly closed: {}", d2.sqrt());
    }

    #[test]
    fn ecosystem_empty_state_is_equilibrium() {
        let sys = ecosystem_system();
        let mut y0 = [0.0; ECOSYSTEM_DIM];
        y0[..5].copy_from_slice(&ECOSYSTEM_S);
        let mut out = [0.0; ECOSYSTEM_DIM];
        sys.eval(&y0, 0.0, &mut out);
        for v in out {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn ecosystem_is_ten_dimensional_and_positive() {
        let traj = simulate_ecosystem(&ecosystem_default_y0(), 0.1, 50_000, 10_000).unwrap();
        assert_eq!(traj.states.dim(), 10);
        for row in traj.states.points().rows() {
            for v in row {
                assert!(*v > 0.0, "non-positive state {v}");
            }
        }
    }
}
