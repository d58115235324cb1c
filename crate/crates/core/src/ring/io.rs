use std::path::Path;

use serde::Serialize;

use super::reconstruct::Trajectories;
use super::sim::RingState;
use crate::error::{Error, Result};

#[derive(Serialize)]
struct Row {
    tau: f64,
    n: usize,
    x: f64,
    v: f64,
    headway: f64,
}

impl Trajectories {
    /// Samples of simulated states; the last column is the first vehicle shifted by `L`.
    pub fn from_states(states: &[RingState]) -> Self {
        let mut out = Trajectories {
            tau: Vec::with_capacity(states.len()),
            x: Vec::with_capacity(states.len()),
            v: Vec::with_capacity(states.len()),
        };
        for s in states {
            let mut x = s.x.clone();
            x.push(s.x[0] + s.length);
            let mut v = s.v.clone();
            v.push(s.v[0]);
            out.tau.push(s.time);
            out.x.push(x);
            out.v.push(v);
        }
        out
    }
}

/// CSV with columns `tau, n, x, v, headway` for vehicles `1 … N`.
pub fn write_trajectories(path: &Path, traj: &Trajectories) -> Result<()> {
    let fmt = |e: csv::Error| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(fmt)?;
    for (k, &tau) in traj.tau.iter().enumerate() {
        let (x, v) = (&traj.x[k], &traj.v[k]);
        for n in 0..x.len() - 1 {
            w.serialize(Row {
                tau,
                n: n + 1,
                x: x[n],
                v: v[n],
                headway: x[n + 1] - x[n],
            })
            .map_err(fmt)?;
        }
    }
    w.flush()?;
    Ok(())
}
