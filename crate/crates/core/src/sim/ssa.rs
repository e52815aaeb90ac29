use super::network::ReactionNetwork;
use super::pqueue::IndexedMinHeap;
use super::rng::SimRng;
use super::trace::{Recorder, Trace, TraceKind};
use super::{Observer, RunOptions, SimError};

struct Stepper<'a> {
    net: &'a ReactionNetwork,
    state: Vec<f64>,
    rec: Recorder,
    opts: &'a RunOptions,
}

impl<'a> Stepper<'a> {
    fn new(net: &'a ReactionNetwork, opts: &'a RunOptions) -> Self {
        let rec = Recorder::new(
            TraceKind::Stochastic,
            net.species.clone(),
            net.reactions.len(),
            opts.output_interval,
            opts.watch,
        );
        Stepper {
            net,
            state: net.initial.clone(),
            rec,
            opts,
        }
    }

    fn propensity(&mut self, r: usize, t: f64) -> Result<f64, SimError> {
        self.rec.trace.propensity_evals[r] += 1;
        let name = &self.net.reactions[r].name;
        let a = self
            .net
            .propensity(r, &self.state)
            .map_err(|e| SimError::eval(name, e))?;
        if !a.is_finite() || a < 0.0 {
            return Err(SimError::Numerical(format!(
                "propensity of `{name}` is {a} at t = {t}"
            )));
        }
        Ok(a)
    }

    /// Check the watch before any event; true when the run should stop.
    fn watch_initial(&mut self) -> bool {
        match self.opts.watch {
            Some(w) if self.state[w.species] >= w.level => {
                self.rec.trace.crossing = Some(0.0);
                w.stop
            }
            _ => false,
        }
    }

    /// Fire reaction `r` at time `t`. Returns true when the run should stop.
    fn fire(&mut self, r: usize, t: f64, observer: &mut Observer<'_>) -> Result<bool, SimError> {
        self.rec
            .sample_until(t, false, self.opts.t_end, &self.state);
        for &(i, d) in &self.net.reactions[r].changes {
            self.state[i] += d;
            if self.state[i] < 0.0 {
                return Err(SimError::Numerical(format!(
                    "`{}` went negative firing `{}` at t = {t}",
                    self.net.species[i], self.net.reactions[r].name
                )));
            }
        }
        self.rec.trace.events += 1;
        observer(t, &self.state);
        if let Some(w) = self.opts.watch {
            if self.rec.trace.crossing.is_none() && self.state[w.species] >= w.level {
                self.rec.trace.crossing = Some(t);
                return Ok(w.stop);
            }
        }
        Ok(false)
    }

    fn finish(self, t: f64) -> Trace {
        self.rec.finish(t, &self.state)
    }
}

/// Gillespie's direct method. Propensities touched by a firing are
/// re-evaluated through the dependency graph; the total is re-summed every
/// step.
pub fn ssa_direct(
    net: &ReactionNetwork,
    seed: u64,
    opts: &RunOptions,
    observer: &mut Observer<'_>,
) -> Result<Trace, SimError> {
    opts.check()?;
    let mut rng = SimRng::new(seed);
    let mut s = Stepper::new(net, opts);
    observer(0.0, &s.state);
    if s.watch_initial() {
        return Ok(s.finish(0.0));
    }
    let n = net.reactions.len();
    let mut a = Vec::with_capacity(n);
    for r in 0..n {
        a.push(s.propensity(r, 0.0)?);
    }
    let mut t = 0.0;
    loop {
        let total: f64 = a.iter().sum();
        if total <= 0.0 {
            return Ok(s.finish(t));
        }
        let next = t + rng.exponential(total);
        if next > opts.t_end {
            return Ok(s.finish(opts.t_end));
        }
        let target = rng.uniform() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (r, &ar) in a.iter().enumerate() {
            if ar > 0.0 {
                acc += ar;
                chosen = Some(r);
                if target < acc {
                    break;
                }
            }
        }
        // `chosen` is the last positive reaction if rounding left target >= acc
        let r = chosen.expect("total > 0 implies a positive propensity");
        t = next;
        if s.fire(r, t, observer)? {
            return Ok(s.finish(t));
        }
        for &d in &net.dependents[r] {
            a[d] = s.propensity(d, t)?;
        }
    }
}

/// Gibson and Bruck's next reaction method: absolute tentative times in an
/// indexed priority queue, only dependents of the fired reaction
/// re-evaluated, and unused waiting times rescaled rather than redrawn.
pub fn ssa_gibson_bruck(
    net: &ReactionNetwork,
    seed: u64,
    opts: &RunOptions,
    observer: &mut Observer<'_>,
) -> Result<Trace, SimError> {
    opts.check()?;
    let mut rng = SimRng::new(seed);
    let mut s = Stepper::new(net, opts);
    observer(0.0, &s.state);
    if s.watch_initial() {
        return Ok(s.finish(0.0));
    }
    let n = net.reactions.len();
    let mut a = Vec::with_capacity(n);
    let mut tau = Vec::with_capacity(n);
    for r in 0..n {
        let ar = s.propensity(r, 0.0)?;
        a.push(ar);
        tau.push(if ar > 0.0 {
            rng.exponential(ar)
        } else {
            f64::INFINITY
        });
    }
    let mut heap = IndexedMinHeap::new(tau);
    let mut t = 0.0;
    loop {
        let Some((mu, next)) = heap.peek() else {
            return Ok(s.finish(t));
        };
        if next.is_infinite() {
            return Ok(s.finish(t));
        }
        if next > opts.t_end {
            return Ok(s.finish(opts.t_end));
        }
        t = next;
        if s.fire(mu, t, observer)? {
            return Ok(s.finish(t));
        }
        let mut fired_updated = false;
        for &alpha in &net.dependents[mu] {
            let old = a[alpha];
            let new = s.propensity(alpha, t)?;
            a[alpha] = new;
            let key = if new <= 0.0 {
                f64::INFINITY
            } else if alpha == mu || old <= 0.0 {
                t + rng.exponential(new)
            } else {
                t + (old / new) * (heap.key(alpha) - t)
            };
            heap.update(alpha, key);
            fired_updated |= alpha == mu;
        }
        if !fired_updated {
            let key = if a[mu] > 0.0 {
                t + rng.exponential(a[mu])
            } else {
                f64::INFINITY
            };
            heap.update(mu, key);
        }
    }
}
