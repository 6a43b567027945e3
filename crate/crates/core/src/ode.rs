//! Deterministic mass-action integration of `dX/dt = S r`.
//!
//! Rates use the plain power-law form with no availability guard; the
//! state is a continuous concentration vector. The default integrator
//! is classic fixed-step fourth-order Runge-Kutta; an embedded
//! Fehlberg 4(5) pair with step control is available for stiff-ish
//! inputs.

use thiserror::Error;

use crate::kinetics::unguarded_power_product;
use crate::network::ReactionNetwork;
use crate::scalar::Scalar;
use crate::trajectory::{Record, Termination, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub enum StepMode<F> {
    Fixed { dt: F },
    Adaptive { rel_tol: F, abs_tol: F },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeConfig<F> {
    pub t_end: F,
    pub step: StepMode<F>,
    pub record: Record<F>,
    /// A step may undershoot zero by at most this much before the run
    /// is declared unstable; smaller undershoots clamp to zero.
    pub clamp_tol: F,
}

impl<F: Scalar> OdeConfig<F> {
    pub fn fixed(t_end: F, dt: F) -> Self {
        Self {
            t_end,
            step: StepMode::Fixed { dt },
            record: Record::All,
            clamp_tol: F::from_f64_lossy(1e-9),
        }
    }

    pub fn adaptive(t_end: F, rel_tol: F, abs_tol: F) -> Self {
        Self {
            t_end,
            step: StepMode::Adaptive { rel_tol, abs_tol },
            record: Record::All,
            clamp_tol: abs_tol,
        }
    }

    /// Fixed-step config at the default step size for this network.
    pub fn with_default_dt(network: &ReactionNetwork, t_end: F) -> Self {
        Self::fixed(t_end, F::from_f64_lossy(default_dt(network)))
    }
}

/// Default step: `min(0.01, 0.1 / max_i k_i * M^(order_i - 1))` where
/// `M` is the total initial amount. The second term bounds the fastest
/// initial timescale so aggregation networks with large populations
/// stay stable; override via [`OdeConfig::fixed`].
pub fn default_dt(network: &ReactionNetwork) -> f64 {
    let mass: f64 = network.initial_amounts().iter().sum::<f64>().max(1.0);
    let fastest = network
        .reactions
        .iter()
        .filter(|r| r.rate_constant > 0.0)
        .map(|r| r.rate_constant * mass.powi(r.order() as i32 - 1))
        .fold(0.0f64, f64::max);
    if fastest > 0.0 {
        (0.1 / fastest).min(0.01)
    } else {
        0.01
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum OdeError {
    #[error("invalid ODE config: {0}")]
    InvalidConfig(String),
    #[error("integration unstable at t = {t}: {detail}")]
    Instability { t: f64, detail: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeOutcome<F> {
    pub trajectory: Trajectory<F, F>,
    /// Number of state entries clamped from small negative undershoots
    /// back to zero.
    pub clamped: u64,
    /// Accepted integration steps.
    pub steps: u64,
}

/// Right-hand side `S r(state)` with `r_i = k_i * prod_j X_j^a_ij`.
pub fn rhs<F: Scalar>(network: &ReactionNetwork, state: &[F]) -> Vec<F> {
    let mut derivative = vec![F::zero(); network.n_species()];
    for reaction in &network.reactions {
        let rate = F::from_f64_lossy(reaction.rate_constant)
            * unguarded_power_product(&reaction.reactants, state);
        for term in &reaction.reactants {
            derivative[term.species] =
                derivative[term.species] - F::from_count(term.coefficient) * rate;
        }
        for term in &reaction.products {
            derivative[term.species] =
                derivative[term.species] + F::from_count(term.coefficient) * rate;
        }
    }
    derivative
}

/// Integrate an admissible network from its initial amounts to `t_end`.
pub fn simulate_ode<F: Scalar>(
    network: &ReactionNetwork,
    config: &OdeConfig<F>,
) -> Result<OdeOutcome<F>, OdeError> {
    if !(config.t_end > F::zero()) {
        return Err(OdeError::InvalidConfig("t_end must be positive".into()));
    }
    match config.step {
        StepMode::Fixed { dt } => {
            if !(dt > F::zero()) {
                return Err(OdeError::InvalidConfig("dt must be positive".into()));
            }
        }
        StepMode::Adaptive { rel_tol, abs_tol } => {
            if !(rel_tol > F::zero()) || !(abs_tol > F::zero()) {
                return Err(OdeError::InvalidConfig("tolerances must be positive".into()));
            }
        }
    }
    let targets: Vec<F> = match &config.record {
        Record::All => vec![config.t_end],
        Record::OnGrid(grid) => {
            if grid.is_empty() || grid[0] != F::zero() {
                return Err(OdeError::InvalidConfig("recording grid must start at 0".into()));
            }
            if grid.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(OdeError::InvalidConfig(
                    "recording grid must be strictly ascending".into(),
                ));
            }
            if *grid.last().unwrap() > config.t_end {
                return Err(OdeError::InvalidConfig("recording grid exceeds t_end".into()));
            }
            grid[1..].to_vec()
        }
    };

    let mut integrator = Integrator {
        network,
        config,
        state: network
            .initial_amounts()
            .iter()
            .map(|&a| F::from_f64_lossy(a))
            .collect(),
        t: F::zero(),
        times: vec![F::zero()],
        states: Vec::new(),
        clamped: 0,
        steps: 0,
    };
    integrator.states.push(integrator.state.clone());

    for &target in &targets {
        integrator.advance_to(target)?;
        if matches!(config.record, Record::OnGrid(_)) {
            integrator.times.push(target);
            integrator.states.push(integrator.state.clone());
        }
    }

    Ok(OdeOutcome {
        trajectory: Trajectory {
            times: integrator.times,
            states: integrator.states,
            terminated_by: Termination::TEnd,
            t_end: config.t_end,
        },
        clamped: integrator.clamped,
        steps: integrator.steps,
    })
}

struct Integrator<'a, F: Scalar> {
    network: &'a ReactionNetwork,
    config: &'a OdeConfig<F>,
    state: Vec<F>,
    t: F,
    times: Vec<F>,
    states: Vec<Vec<F>>,
    clamped: u64,
    steps: u64,
}

impl<F: Scalar> Integrator<'_, F> {
    fn advance_to(&mut self, target: F) -> Result<(), OdeError> {
        // Relative slack under which a remaining sliver of time is
        // considered already covered.
        let epsilon = (target - self.t).abs() * F::from_f64_lossy(1e-12);
        match self.config.step {
            StepMode::Fixed { dt } => {
                while target - self.t > epsilon {
                    let h = dt.min(target - self.t);
                    let next = rk4_step(self.network, &self.state, h);
                    self.accept(next)?;
                    self.t = self.t + h;
                    self.record_step();
                }
            }
            StepMode::Adaptive { rel_tol, abs_tol } => {
                let mut h = F::from_f64_lossy(default_dt(self.network)).min(target - self.t);
                let h_min = self.config.t_end * F::from_f64_lossy(1e-14);
                while target - self.t > epsilon {
                    h = h.min(target - self.t);
                    if h < h_min {
                        return Err(OdeError::Instability {
                            t: self.t.to_f64().unwrap_or(f64::NAN),
                            detail: "step size underflow".into(),
                        });
                    }
                    let (next, error) = rkf45_step(self.network, &self.state, h, rel_tol, abs_tol);
                    if !error.is_finite() {
                        return Err(OdeError::Instability {
                            t: self.t.to_f64().unwrap_or(f64::NAN),
                            detail: "non-finite error estimate".into(),
                        });
                    }
                    if error <= F::one() {
                        self.accept(next)?;
                        self.t = self.t + h;
                        self.record_step();
                        h = h * grow_factor(error);
                    } else {
                        h = h * shrink_factor(error);
                    }
                }
            }
        }
        self.t = target;
        Ok(())
    }

    /// Clamp small undershoots, reject NaN/Inf or deep negatives.
    fn accept(&mut self, mut next: Vec<F>) -> Result<(), OdeError> {
        for (i, value) in next.iter_mut().enumerate() {
            if !value.is_finite() {
                return Err(OdeError::Instability {
                    t: self.t.to_f64().unwrap_or(f64::NAN),
                    detail: format!(
                        "state of `{}` became non-finite (dt too large?)",
                        self.network.species[i].name
                    ),
                });
            }
            if *value < F::zero() {
                if -*value <= self.config.clamp_tol {
                    *value = F::zero();
                    self.clamped += 1;
                } else {
                    return Err(OdeError::Instability {
                        t: self.t.to_f64().unwrap_or(f64::NAN),
                        detail: format!(
                            "state of `{}` undershot zero by {} (dt too large?)",
                            self.network.species[i].name,
                            -*value
                        ),
                    });
                }
            }
        }
        self.state = next;
        self.steps += 1;
        Ok(())
    }

    fn record_step(&mut self) {
        if matches!(self.config.record, Record::All) {
            self.times.push(self.t);
            self.states.push(self.state.clone());
        }
    }
}

fn grow_factor<F: Scalar>(error: F) -> F {
    let safety = F::from_f64_lossy(0.9);
    let exponent = F::from_f64_lossy(-0.2);
    let factor = if error <= F::zero() {
        F::from_f64_lossy(5.0)
    } else {
        safety * error.powf(exponent)
    };
    factor.min(F::from_f64_lossy(5.0)).max(F::one())
}

fn shrink_factor<F: Scalar>(error: F) -> F {
    let safety = F::from_f64_lossy(0.9);
    let exponent = F::from_f64_lossy(-0.2);
    (safety * error.powf(exponent)).max(F::from_f64_lossy(0.2))
}

fn axpy<F: Scalar>(y: &[F], coeffs: &[(F, &[F])], h: F) -> Vec<F> {
    let mut out = y.to_vec();
    for (c, k) in coeffs {
        for (o, &ki) in out.iter_mut().zip(*k) {
            *o = *o + h * *c * ki;
        }
    }
    out
}

/// One classic RK4 step of size `h`.
fn rk4_step<F: Scalar>(network: &ReactionNetwork, y: &[F], h: F) -> Vec<F> {
    let half = F::from_f64_lossy(0.5);
    let k1 = rhs(network, y);
    let k2 = rhs(network, &axpy(y, &[(half, &k1)], h));
    let k3 = rhs(network, &axpy(y, &[(half, &k2)], h));
    let k4 = rhs(network, &axpy(y, &[(F::one(), &k3)], h));
    let sixth = F::from_f64_lossy(1.0 / 6.0);
    let third = F::from_f64_lossy(1.0 / 3.0);
    axpy(
        y,
        &[(sixth, &k1), (third, &k2), (third, &k3), (sixth, &k4)],
        h,
    )
}

/// One Fehlberg 4(5) step: returns the fifth-order state and the scaled
/// error estimate (accept when <= 1).
fn rkf45_step<F: Scalar>(
    network: &ReactionNetwork,
    y: &[F],
    h: F,
    rel_tol: F,
    abs_tol: F,
) -> (Vec<F>, F) {
    let c = |v: f64| F::from_f64_lossy(v);
    let k1 = rhs(network, y);
    let k2 = rhs(network, &axpy(y, &[(c(0.25), &k1)], h));
    let k3 = rhs(network, &axpy(y, &[(c(3.0 / 32.0), &k1), (c(9.0 / 32.0), &k2)], h));
    let k4 = rhs(
        network,
        &axpy(
            y,
            &[
                (c(1932.0 / 2197.0), &k1),
                (c(-7200.0 / 2197.0), &k2),
                (c(7296.0 / 2197.0), &k3),
            ],
            h,
        ),
    );
    let k5 = rhs(
        network,
        &axpy(
            y,
            &[
                (c(439.0 / 216.0), &k1),
                (c(-8.0), &k2),
                (c(3680.0 / 513.0), &k3),
                (c(-845.0 / 4104.0), &k4),
            ],
            h,
        ),
    );
    let k6 = rhs(
        network,
        &axpy(
            y,
            &[
                (c(-8.0 / 27.0), &k1),
                (c(2.0), &k2),
                (c(-3544.0 / 2565.0), &k3),
                (c(1859.0 / 4104.0), &k4),
                (c(-11.0 / 40.0), &k5),
            ],
            h,
        ),
    );
    let fourth = axpy(
        y,
        &[
            (c(25.0 / 216.0), &k1),
            (c(1408.0 / 2565.0), &k3),
            (c(2197.0 / 4104.0), &k4),
            (c(-0.2), &k5),
        ],
        h,
    );
    let fifth = axpy(
        y,
        &[
            (c(16.0 / 135.0), &k1),
            (c(6656.0 / 12825.0), &k3),
            (c(28561.0 / 56430.0), &k4),
            (c(-9.0 / 50.0), &k5),
            (c(2.0 / 55.0), &k6),
        ],
        h,
    );
    let mut error = F::zero();
    for i in 0..y.len() {
        let scale = abs_tol + rel_tol * fourth[i].abs().max(fifth[i].abs());
        let e = (fifth[i] - fourth[i]).abs() / scale;
        error = error.max(e);
    }
    (fifth, error)
}
