//! Stochastic and deterministic simulation of a compiled model.
//!
//! [`ReactionNetwork::compile`] turns a document into species, change
//! vectors and propensities with parameters bound; [`run`] drives one of the
//! three engines and [`ensemble_run`] repeats a stochastic run over seeds.

mod ensemble;
mod network;
mod ode;
mod pqueue;
mod rng;
mod ssa;
mod trace;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use ensemble::{
    auto_horizon, ensemble_run, replica_signalling_time, signalling_time, EnsembleStats, Horizon,
    SignalSpec, AUTO_HORIZON_CAP, AUTO_HORIZON_FACTOR, ODE_SIGNAL_FRACTION,
};
pub use network::{Reaction, ReactionNetwork, Slot};
pub use ode::ode_run;
pub use pqueue::IndexedMinHeap;
pub use rng::SimRng;
pub use ssa::{ssa_direct, ssa_gibson_bruck};
pub use trace::{Trace, TraceKind, Watch};

use crate::biopepa::GenError;
use crate::expr::EvalError;
use crate::model::ModelError;

/// Default RK4 step.
pub const ODE_STEP: f64 = 0.01;

/// Called with `(t, state)` at the start and after every event or step.
pub type Observer<'a> = dyn FnMut(f64, &[f64]) + 'a;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unknown species `{0}`")]
    UnknownSpecies(String),
    #[error("reaction `{reaction}`: {source}")]
    Eval {
        reaction: String,
        #[source]
        source: EvalError,
    },
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("{0}")]
    Invalid(String),
    #[error("replica with seed {seed}: {source}")]
    Replica {
        seed: u64,
        #[source]
        source: Box<SimError>,
    },
}

impl SimError {
    pub(crate) fn eval(reaction: &str, source: EvalError) -> Self {
        SimError::Eval {
            reaction: reaction.to_string(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Direct,
    GibsonBruck,
    Ode { dt: f64 },
}

impl Method {
    pub fn is_stochastic(self) -> bool {
        !matches!(self, Method::Ode { .. })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Direct => "direct",
            Method::GibsonBruck => "gibson-bruck",
            Method::Ode { .. } => "ode",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "direct" => Ok(Method::Direct),
            "gibson-bruck" => Ok(Method::GibsonBruck),
            "ode" => Ok(Method::Ode { dt: ODE_STEP }),
            _ => Err(format!(
                "unknown method `{s}` (expected direct, gibson-bruck or ode)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub t_end: f64,
    /// Sampling period; infinity keeps only the first and last rows.
    pub output_interval: f64,
    pub watch: Option<Watch>,
}

impl RunOptions {
    pub fn new(t_end: f64, output_interval: f64) -> Self {
        RunOptions {
            t_end,
            output_interval,
            watch: None,
        }
    }

    fn check(&self) -> Result<(), SimError> {
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(SimError::Invalid(format!(
                "end time must be finite and >= 0, got {}",
                self.t_end
            )));
        }
        if self.output_interval.is_nan() || self.output_interval <= 0.0 {
            return Err(SimError::Invalid(format!(
                "output interval must be positive, got {}",
                self.output_interval
            )));
        }
        Ok(())
    }
}

/// Run one trajectory with the chosen engine. The seed is ignored by the
/// ODE engine.
pub fn run(
    net: &ReactionNetwork,
    method: Method,
    seed: u64,
    opts: &RunOptions,
    observer: &mut Observer<'_>,
) -> Result<Trace, SimError> {
    match method {
        Method::Direct => ssa_direct(net, seed, opts, observer),
        Method::GibsonBruck => ssa_gibson_bruck(net, seed, opts, observer),
        Method::Ode { dt } => ode_run(net, dt, opts, observer),
    }
}
