use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::spectrum::{ThermalState, UnitSystem};

/// Positions and momenta of non-interacting particles in a box `[0, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    positions: Vec<f64>,
    momenta: Vec<f64>,
    length: f64,
}

impl ParticleState {
    pub fn new(positions: Vec<f64>, momenta: Vec<f64>, length: f64) -> Result<Self> {
        if positions.len() != momenta.len() {
            return Err(invalid("positions and momenta differ in length"));
        }
        if !(length > 0.0) {
            return Err(invalid(format!("box length must be positive, got {length}")));
        }
        if positions.iter().any(|&x| !(0.0..=length).contains(&x)) {
            return Err(invalid("particle position outside [0, L]"));
        }
        Ok(Self {
            positions,
            momenta,
            length,
        })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn kinetic_energy(&self, units: &UnitSystem) -> f64 {
        self.momenta.iter().map(|p| p * p).sum::<f64>() / (2.0 * units.mass())
    }
}

fn maxwell_boltzmann(state: &ThermalState, units: &UnitSystem) -> Normal<f64> {
    let sd = (units.mass() * units.k_boltzmann() * state.temperature()).sqrt();
    Normal::new(0.0, sd).expect("positive standard deviation")
}

/// `n` particles uniform on `[0, L]` with Maxwell–Boltzmann momenta
/// (variance `m k_B T`).
pub fn init_gas(
    n: usize,
    length: f64,
    state: &ThermalState,
    units: &UnitSystem,
    seed: u64,
) -> Result<ParticleState> {
    if n == 0 {
        return Err(invalid("gas needs at least one particle"));
    }
    if !(length > 0.0) {
        return Err(invalid(format!("box length must be positive, got {length}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mb = maxwell_boltzmann(state, units);
    let positions = (0..n).map(|_| rng.random_range(0.0..=length)).collect();
    let momenta = (0..n).map(|_| mb.sample(&mut rng)).collect();
    Ok(ParticleState {
        positions,
        momenta,
        length,
    })
}

/// Indices left of the wall at `x·L` (side A) and the rest (side B).
/// A particle exactly on the wall belongs to B.
pub fn partition_particles(st: &ParticleState, x: f64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(x > 0.0 && x < 1.0) {
        return Err(invalid(format!("wall fraction must lie in (0, 1), got {x}")));
    }
    let wall = x * st.length;
    Ok((0..st.len()).partition(|&i| st.positions[i] < wall))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compression {
    pub state: ParticleState,
    /// Work done on the gas by the moving wall.
    pub work_on_gas: f64,
}

impl Compression {
    /// Work delivered by the gas to the piston (positive on expansion).
    pub fn work_by_engine(&self) -> f64 {
        -self.work_on_gas
    }
}

/// Move the right wall from `L` to `target_length` in `steps` equal
/// increments. Each increment lasts `L₀/√(k_B T/m)` (one thermal crossing of
/// the initial box); particles fly freely, reflect off the fixed left wall,
/// and reflect specularly off the moving wall (`v → −v + 2u`). With
/// `thermostatted`, momenta are redrawn from Maxwell–Boltzmann after every
/// increment.
pub fn quasistatic_compress(
    st: &ParticleState,
    target_length: f64,
    steps: usize,
    thermostatted: bool,
    state: &ThermalState,
    units: &UnitSystem,
    seed: u64,
) -> Result<Compression> {
    if !(target_length > 0.0 && target_length.is_finite()) {
        return Err(invalid(format!(
            "target length must be positive, got {target_length}"
        )));
    }
    if steps == 0 {
        return Ok(Compression {
            state: st.clone(),
            work_on_gas: 0.0,
        });
    }

    let mass = units.mass();
    let thermal_speed = (units.k_boltzmann() * state.temperature() / mass).sqrt();
    let dt = st.length / thermal_speed;
    let increment = (st.length - target_length) / steps as f64;
    // Velocity of the wall; negative while compressing.
    let wall_velocity = -increment / dt;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mb = maxwell_boltzmann(state, units);
    let mut positions = st.positions.clone();
    let mut velocities: Vec<f64> = st.momenta.iter().map(|p| p / mass).collect();
    let mut work = 0.0;
    let mut wall = st.length;

    for k in 0..steps {
        let wall_end = if k + 1 == steps {
            target_length
        } else {
            st.length - increment * (k + 1) as f64
        };
        for (x, v) in positions.iter_mut().zip(velocities.iter_mut()) {
            work += fly(x, v, wall, wall_velocity, dt, mass);
            *x = x.clamp(0.0, wall_end);
        }
        wall = wall_end;
        if thermostatted {
            for v in velocities.iter_mut() {
                *v = mb.sample(&mut rng) / mass;
            }
        }
    }

    let momenta = velocities.iter().map(|v| v * mass).collect();
    Ok(Compression {
        state: ParticleState {
            positions,
            momenta,
            length: target_length,
        },
        work_on_gas: work,
    })
}

/// Free flight for `dt` between a fixed wall at 0 and a wall starting at
/// `wall` moving with `wall_velocity`. Returns the kinetic energy gained
/// from collisions with the moving wall.
fn fly(x: &mut f64, v: &mut f64, wall: f64, wall_velocity: f64, dt: f64, mass: f64) -> f64 {
    let mut remaining = dt;
    let mut wall = wall;
    let mut gained = 0.0;
    loop {
        let to_left = if *v < 0.0 { *x / -*v } else { f64::INFINITY };
        let closing = *v - wall_velocity;
        let to_right = if closing > 0.0 {
            ((wall - *x) / closing).max(0.0)
        } else {
            f64::INFINITY
        };
        let hit = to_left.min(to_right);
        if hit >= remaining {
            *x += *v * remaining;
            return gained;
        }
        *x += *v * hit;
        wall += wall_velocity * hit;
        remaining -= hit;
        if to_left <= to_right {
            *x = 0.0;
            *v = -*v;
        } else {
            *x = wall;
            let reflected = -*v + 2.0 * wall_velocity;
            gained += 0.5 * mass * (reflected * reflected - *v * *v);
            *v = reflected;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, standard_error};
    use approx::assert_relative_eq;

    fn natural() -> (ThermalState, UnitSystem) {
        let u = UnitSystem::natural();
        (ThermalState::new(1.0, &u).unwrap(), u)
    }

    #[test]
    fn positions_stay_in_the_box() {
        let (s, u) = natural();
        let g = init_gas(1000, 2.5, &s, &u, 1).unwrap();
        assert!(g.positions().iter().all(|&x| (0.0..=2.5).contains(&x)));
        assert!(init_gas(0, 1.0, &s, &u, 1).is_err());
    }

    #[test]
    fn equipartition_of_initial_momenta() {
        let (s, u) = natural();
        let g = init_gas(10_000, 1.0, &s, &u, 7).unwrap();
        let ke: Vec<f64> = g.momenta().iter().map(|p| p * p / 2.0).collect();
        assert!((mean(&ke) - 0.5).abs() < 3.0 * standard_error(&ke));
    }

    #[test]
    fn seeded_gas_is_repeatable() {
        let (s, u) = natural();
        assert_eq!(init_gas(50, 1.0, &s, &u, 3).unwrap(), init_gas(50, 1.0, &s, &u, 3).unwrap());
    }

    #[test]
    fn partition_covers_all_indices() {
        let (s, u) = natural();
        let g = init_gas(10_000, 1.0, &s, &u, 5).unwrap();
        let (a, b) = partition_particles(&g, 0.3).unwrap();
        assert_eq!(a.len() + b.len(), g.len());
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..g.len()).collect::<Vec<_>>());
        let frac = a.len() as f64 / g.len() as f64;
        let se = (0.3f64 * 0.7 / g.len() as f64).sqrt();
        assert!((frac - 0.3).abs() < 3.0 * se);
        assert!(partition_particles(&g, 1.0).is_err());
        assert!(partition_particles(&g, 0.0).is_err());
    }

    #[test]
    fn boundary_particle_goes_right() {
        let st = ParticleState::new(vec![0.1, 0.5, 0.9], vec![0.0; 3], 1.0).unwrap();
        let (a, b) = partition_particles(&st, 0.5).unwrap();
        assert_eq!(a, vec![0]);
        assert_eq!(b, vec![1, 2]);
        let (a, _) = partition_particles(&st, 0.999_999).unwrap();
        assert_eq!(a.len(), 3);
    }

    #[test]
    fn zero_steps_is_a_no_op() {
        let (s, u) = natural();
        let g = init_gas(10, 1.0, &s, &u, 2).unwrap();
        let c = quasistatic_compress(&g, 0.5, 0, false, &s, &u, 0).unwrap();
        assert_eq!(c.state, g);
        assert_eq!(c.work_on_gas, 0.0);
        assert!(quasistatic_compress(&g, 0.0, 10, false, &s, &u, 0).is_err());
    }

    #[test]
    fn adiabatic_work_equals_energy_change() {
        let (s, u) = natural();
        let g = init_gas(200, 1.0, &s, &u, 9).unwrap();
        for target in [0.5, 1.5] {
            let c = quasistatic_compress(&g, target, 500, false, &s, &u, 0).unwrap();
            let de = c.state.kinetic_energy(&u) - g.kinetic_energy(&u);
            assert_relative_eq!(de, c.work_on_gas, max_relative = 1e-9);
            assert_eq!(c.state.length(), target);
            assert!(c.state.positions().iter().all(|&x| (0.0..=target).contains(&x)));
        }
    }

    #[test]
    fn slow_adiabatic_compression_heats_the_gas() {
        // 1-D adiabatic invariant: v·L is conserved, so halving L quadruples energy.
        let (s, u) = natural();
        let g = init_gas(500, 1.0, &s, &u, 4).unwrap();
        let c = quasistatic_compress(&g, 0.5, 2000, false, &s, &u, 0).unwrap();
        assert_relative_eq!(
            c.state.kinetic_energy(&u) / g.kinetic_energy(&u),
            4.0,
            max_relative = 0.02
        );
    }
}
