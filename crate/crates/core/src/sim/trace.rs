use std::io::{self, Write};

/// Whether a trace came from a stochastic or a continuous engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Stochastic,
    Continuous,
}

/// Threshold watched during a run. The first time `species` reaches
/// `level` the time is recorded; with `stop` the run ends there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Watch {
    pub species: usize,
    pub level: f64,
    pub stop: bool,
}

/// Sampled trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub kind: TraceKind,
    pub species: Vec<String>,
    pub times: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub watch: Option<Watch>,
    /// First time the watched level was reached.
    pub crossing: Option<f64>,
    /// Reaction firings (stochastic) or integration steps (ODE).
    pub events: u64,
    /// Propensity evaluations per reaction.
    pub propensity_evals: Vec<u64>,
}

impl Trace {
    pub fn column(&self, species: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(move |r| r[species])
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.rows.last().map(Vec::as_slice)
    }

    pub fn end_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// First sampled time at which `species` is at least `level`. Between
    /// samples a continuous trace is interpolated linearly; a stochastic
    /// one is read as piecewise constant.
    pub fn first_reach(&self, species: usize, level: f64) -> Option<f64> {
        let col: Vec<f64> = self.column(species).collect();
        let first = col.iter().position(|&x| x >= level)?;
        if first == 0 || self.kind == TraceKind::Stochastic {
            return Some(self.times[first]);
        }
        let (t0, t1) = (self.times[first - 1], self.times[first]);
        let (x0, x1) = (col[first - 1], col[first]);
        Some(t0 + (level - x0) / (x1 - x0) * (t1 - t0))
    }

    /// `time,<species...>` header then one line per sample.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        write!(w, "time")?;
        for s in &self.species {
            write!(w, ",{s}")?;
        }
        writeln!(w)?;
        for (t, row) in self.times.iter().zip(&self.rows) {
            write!(w, "{t}")?;
            for x in row {
                write!(w, ",{x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Collects samples on the grid `k * interval` plus the final state.
pub(crate) struct Recorder {
    interval: f64,
    next_k: u64,
    pub trace: Trace,
}

impl Recorder {
    pub fn new(
        kind: TraceKind,
        species: Vec<String>,
        reactions: usize,
        interval: f64,
        watch: Option<Watch>,
    ) -> Self {
        Recorder {
            interval,
            next_k: 0,
            trace: Trace {
                kind,
                species,
                times: Vec::new(),
                rows: Vec::new(),
                watch,
                crossing: None,
                events: 0,
                propensity_evals: vec![0; reactions],
            },
        }
    }

    /// Next grid time, or infinity once sampling is off.
    pub fn next_sample(&self) -> f64 {
        if self.interval.is_finite() && self.interval > 0.0 {
            self.next_k as f64 * self.interval
        } else if self.next_k == 0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// Record `state` at every grid time strictly before `t` (or up to and
    /// including `t` when `inclusive`), never beyond `limit`.
    pub fn sample_until(&mut self, t: f64, inclusive: bool, limit: f64, state: &[f64]) {
        loop {
            let s = self.next_sample();
            let due = if inclusive { s <= t } else { s < t };
            if !due || s > limit {
                break;
            }
            self.push(s, state);
            self.next_k += 1;
        }
    }

    fn push(&mut self, t: f64, state: &[f64]) {
        self.trace.times.push(t);
        self.trace.rows.push(state.to_vec());
    }

    /// Close the trace at time `t`: samples through `t`, then a final row
    /// unless the last sample already sits at `t`.
    pub fn finish(mut self, t: f64, state: &[f64]) -> Trace {
        self.sample_until(t, true, t, state);
        if self.trace.times.last() != Some(&t) {
            self.push(t, state);
        }
        self.trace
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_final_row() {
        let mut r = Recorder::new(TraceKind::Stochastic, vec!["A".into()], 0, 1.0, None);
        r.sample_until(2.5, false, 10.0, &[1.0]);
        r.sample_until(3.0, false, 10.0, &[2.0]);
        let t = r.finish(3.2, &[3.0]);
        assert_eq!(t.times, vec![0.0, 1.0, 2.0, 3.0, 3.2]);
        assert_eq!(
            t.column(0).collect::<Vec<_>>(),
            vec![1.0, 1.0, 1.0, 3.0, 3.0]
        );
    }

    #[test]
    fn no_duplicate_final_row() {
        let r = Recorder::new(TraceKind::Continuous, vec!["A".into()], 0, 0.5, None);
        let t = r.finish(1.0, &[0.0]);
        assert_eq!(t.times, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn interpolated_first_reach() {
        let t = Trace {
            kind: TraceKind::Continuous,
            species: vec!["A".into()],
            times: vec![0.0, 1.0, 2.0],
            rows: vec![vec![0.0], vec![2.0], vec![6.0]],
            watch: None,
            crossing: None,
            events: 0,
            propensity_evals: vec![],
        };
        assert_eq!(t.first_reach(0, 4.0), Some(1.5));
        assert_eq!(t.first_reach(0, 7.0), None);
        let s = Trace {
            kind: TraceKind::Stochastic,
            ..t
        };
        assert_eq!(s.first_reach(0, 4.0), Some(2.0));
    }
}
