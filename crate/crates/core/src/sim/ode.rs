use super::network::ReactionNetwork;
use super::trace::{Recorder, Trace, TraceKind};
use super::{Observer, RunOptions, SimError};

/// Fixed-step classical Runge-Kutta on the mean-field equations. Steps are
/// shortened to land exactly on output times and on `t_end`.
pub fn ode_run(
    net: &ReactionNetwork,
    dt: f64,
    opts: &RunOptions,
    observer: &mut Observer<'_>,
) -> Result<Trace, SimError> {
    opts.check()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SimError::Invalid(format!(
            "step size must be positive, got {dt}"
        )));
    }
    let n = net.species.len();
    let mut rec = Recorder::new(
        TraceKind::Continuous,
        net.species.clone(),
        net.reactions.len(),
        opts.output_interval,
        opts.watch,
    );
    let mut x = net.initial.clone();
    let mut t = 0.0;
    observer(t, &x);
    if let Some(w) = opts.watch {
        if x[w.species] >= w.level {
            rec.trace.crossing = Some(0.0);
            if w.stop {
                return Ok(rec.finish(0.0, &x));
            }
        }
    }
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    while t < opts.t_end {
        rec.sample_until(t, true, opts.t_end, &x);
        let next_sample = rec.next_sample();
        let mut h = dt.min(opts.t_end - t);
        if next_sample > t {
            h = h.min(next_sample - t);
        }
        let stage = |k: &[f64], f: f64, tmp: &mut Vec<f64>, x: &[f64]| {
            for i in 0..n {
                tmp[i] = x[i] + f * h * k[i];
            }
        };
        net.derivative(&x, &mut k1)?;
        stage(&k1, 0.5, &mut tmp, &x);
        net.derivative(&tmp, &mut k2)?;
        stage(&k2, 0.5, &mut tmp, &x);
        net.derivative(&tmp, &mut k3)?;
        stage(&k3, 1.0, &mut tmp, &x);
        net.derivative(&tmp, &mut k4)?;
        let prev = x.clone();
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        // land exactly on the grid point instead of accumulating round-off
        t = if next_sample > t && next_sample - t <= h {
            next_sample
        } else {
            t + h
        };
        if opts.t_end - t < 1e-12 * opts.t_end.max(1.0) {
            t = opts.t_end;
        }
        rec.trace.events += 1;
        rec.trace.propensity_evals.iter_mut().for_each(|c| *c += 4);
        observer(t, &x);
        if let Some(w) = opts.watch {
            if rec.trace.crossing.is_none() && x[w.species] >= w.level {
                let (x0, x1) = (prev[w.species], x[w.species]);
                let tc = t - h + (w.level - x0) / (x1 - x0) * h;
                rec.trace.crossing = Some(tc);
                if w.stop {
                    return Ok(rec.finish(t, &x));
                }
            }
        }
    }
    Ok(rec.finish(opts.t_end, &x))
}
