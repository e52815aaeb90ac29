use std::io::{self, Write};

use rayon::prelude::*;

use super::network::ReactionNetwork;
use super::trace::{Trace, Watch};
use super::{run, Method, RunOptions, SimError, ODE_STEP};

/// Fraction of the pool that counts as full activation on an ODE trace,
/// which only approaches the pool total asymptotically.
pub const ODE_SIGNAL_FRACTION: f64 = 0.99;
/// Horizon used when the pilot ODE never reaches the activation level.
pub const AUTO_HORIZON_CAP: f64 = 1000.0;
/// Auto horizon = this many times the ODE signalling time.
pub const AUTO_HORIZON_FACTOR: f64 = 10.0;

/// What counts as the signal having arrived.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub species: String,
    pub fraction: f64,
}

impl SignalSpec {
    pub fn new(species: impl Into<String>, fraction: f64) -> Self {
        SignalSpec {
            species: species.into(),
            fraction,
        }
    }

    /// Full pool for stochastic runs, [`ODE_SIGNAL_FRACTION`] for the ODE.
    pub fn for_method(species: impl Into<String>, method: Method) -> Self {
        let fraction = if method.is_stochastic() {
            1.0
        } else {
            ODE_SIGNAL_FRACTION
        };
        SignalSpec::new(species, fraction)
    }

    /// Species index and absolute activation level.
    pub fn level(&self, net: &ReactionNetwork) -> Result<(usize, f64), SimError> {
        let i = net
            .species_index(&self.species)
            .ok_or_else(|| SimError::UnknownSpecies(self.species.clone()))?;
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(SimError::Invalid(format!(
                "signal fraction must lie in (0, 1], got {}",
                self.fraction
            )));
        }
        Ok((i, self.fraction * net.pool_total(i)))
    }
}

/// First time `species` reaches `fraction * total` on a trace; `None` when
/// it never does. Uses the exact crossing time when the run watched that
/// level, the sampled rows otherwise.
pub fn signalling_time(
    trace: &Trace,
    species: &str,
    fraction: f64,
    total: f64,
) -> Result<Option<f64>, SimError> {
    let i = trace
        .species
        .iter()
        .position(|s| s == species)
        .ok_or_else(|| SimError::UnknownSpecies(species.into()))?;
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(SimError::Invalid(format!(
            "signal fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let level = fraction * total;
    match trace.watch {
        Some(w) if w.species == i && w.level == level => Ok(trace.crossing),
        _ => Ok(trace.first_reach(i, level)),
    }
}

/// Signalling time of one run to `t_end`, stopping as soon as the level
/// is reached.
pub fn replica_signalling_time(
    net: &ReactionNetwork,
    method: Method,
    seed: u64,
    t_end: f64,
    spec: &SignalSpec,
) -> Result<Option<f64>, SimError> {
    let (species, level) = spec.level(net)?;
    let opts = RunOptions {
        t_end,
        output_interval: f64::INFINITY,
        watch: Some(Watch {
            species,
            level,
            stop: true,
        }),
    };
    Ok(run(net, method, seed, &opts, &mut |_, _| {})?.crossing)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Horizon {
    pub t_end: f64,
    /// Signalling time of the pilot ODE run, if it got there.
    pub ode_signalling_time: Option<f64>,
}

/// Horizon from a pilot ODE run on `species`: ten times its signalling
/// time, or the cap when the ODE does not get there within the cap.
pub fn auto_horizon(net: &ReactionNetwork, species: &str) -> Result<Horizon, SimError> {
    let ode = Method::Ode { dt: ODE_STEP };
    let spec = SignalSpec::for_method(species, ode);
    let t = replica_signalling_time(net, ode, 0, AUTO_HORIZON_CAP, &spec)?;
    Ok(Horizon {
        t_end: t.map_or(AUTO_HORIZON_CAP, |t| AUTO_HORIZON_FACTOR * t),
        ode_signalling_time: t,
    })
}

/// Signalling times over a set of seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub t_end: f64,
    /// `(seed, signalling time)` in seed order.
    pub times: Vec<(u64, Option<f64>)>,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub cv: Option<f64>,
}

impl EnsembleStats {
    /// Mean, sample standard deviation and coefficient of variation over
    /// the replicas that reached the level.
    pub fn from_times(t_end: f64, times: Vec<(u64, Option<f64>)>) -> Self {
        let xs: Vec<f64> = times.iter().filter_map(|(_, t)| *t).collect();
        let n = xs.len() as f64;
        let mean = (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / n);
        let std = match mean {
            Some(m) if xs.len() >= 2 => {
                Some((xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
            }
            _ => None,
        };
        let cv = match (mean, std) {
            (Some(m), Some(s)) if m > 0.0 => Some(s / m),
            _ => None,
        };
        EnsembleStats {
            t_end,
            times,
            mean,
            std,
            cv,
        }
    }

    pub fn reached(&self) -> usize {
        self.times.iter().filter(|(_, t)| t.is_some()).count()
    }

    /// `seed,signalling_time` rows (`NA` when not reached) followed by
    /// `mean`, `std` and `cv` summary rows over the reached replicas.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
        writeln!(w, "seed,signalling_time")?;
        for (seed, t) in &self.times {
            writeln!(w, "{seed},{}", opt(*t))?;
        }
        writeln!(w, "mean,{}", opt(self.mean))?;
        writeln!(w, "std,{}", opt(self.std))?;
        writeln!(w, "cv,{}", opt(self.cv))
    }
}

/// Run one replica per seed in parallel. Results are ordered by seed
/// position, so the outcome does not depend on the thread count.
pub fn ensemble_run(
    net: &ReactionNetwork,
    method: Method,
    seeds: &[u64],
    t_end: f64,
    spec: &SignalSpec,
) -> Result<EnsembleStats, SimError> {
    if seeds.len() < 2 {
        return Err(SimError::Invalid(
            "an ensemble needs at least two replicas".into(),
        ));
    }
    spec.level(net)?;
    let times = seeds
        .par_iter()
        .map(|&seed| {
            replica_signalling_time(net, method, seed, t_end, spec)
                .map(|t| (seed, t))
                .map_err(|e| SimError::Replica {
                    seed,
                    source: Box::new(e),
                })
        })
        .collect::<Vec<_>>()
        // the lowest failing seed position wins, whatever the thread timing
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EnsembleStats::from_times(t_end, times))
}
