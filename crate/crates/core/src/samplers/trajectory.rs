use std::io::{BufRead, Read, Write};

use rand::Rng;

use super::{ChainState, Stepper};
use crate::error::{Error, Result};
use crate::geometry::Body;

const MAGIC: &[u8; 8] = b"CWTRAJ01";

/// Retained states of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dims: usize,
    pub seed: u64,
    /// Step index of each retained state.
    pub steps: Vec<u64>,
    /// Row-major `steps.len() × dims`.
    pub points: Vec<f64>,
}

impl Trajectory {
    pub fn new(dims: usize, seed: u64) -> Self {
        Self {
            dims,
            seed,
            steps: Vec::new(),
            points: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, step: u64, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dims);
        self.steps.push(step);
        self.points.extend_from_slice(x);
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dims..(i + 1) * self.dims]
    }

    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.points.iter().skip(j).step_by(self.dims).copied().collect()
    }

    /// CSV with header `step,x0,x1,…`. Lines starting with `#` are left to
    /// the caller.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = std::iter::once("step".to_string())
            .chain((0..self.dims).map(|j| format!("x{j}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.len() {
            write!(w, "{}", self.steps[i])?;
            for v in self.point(i) {
                write!(w, ",{v:?}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Parses [`Trajectory::write_csv`] output, skipping `#` comment lines.
    pub fn read_csv<R: BufRead>(r: R, seed: u64) -> Result<Self> {
        let bad = |msg: String| Error::InvalidParameter(format!("trajectory csv: {msg}"));
        let mut lines = r
            .lines()
            .map(|l| l.map_err(|e| bad(e.to_string())))
            .filter(|l| !matches!(l, Ok(s) if s.starts_with('#') || s.trim().is_empty()));
        let header = lines.next().ok_or_else(|| bad("missing header".into()))??;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.first() != Some(&"step") {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let mut traj = Trajectory::new(cols.len() - 1, seed);
        for (k, line) in lines.enumerate() {
            let line = line?;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != cols.len() {
                return Err(bad(format!("row {k} has {} fields", fields.len())));
            }
            let step = fields[0].parse().map_err(|e| bad(format!("row {k}: {e}")))?;
            let x = fields[1..]
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| bad(format!("row {k}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            traj.push(step, &x);
        }
        Ok(traj)
    }

    /// Binary dump: magic `CWTRAJ01`, then `dims`, `count`, `seed` as
    /// little-endian u64, then `count` rows of `1 + dims` little-endian f64
    /// (step index first).
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        for v in [self.dims as u64, self.len() as u64, self.seed] {
            w.write_all(&v.to_le_bytes())?;
        }
        for i in 0..self.len() {
            w.write_all(&(self.steps[i] as f64).to_le_bytes())?;
            for v in self.point(i) {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidParameter(format!("trajectory binary: {msg}"));
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
        if &magic != MAGIC {
            return Err(bad("bad magic"));
        }
        let mut word = [0u8; 8];
        let mut header = [0u64; 3];
        for h in &mut header {
            r.read_exact(&mut word).map_err(|_| bad("truncated header"))?;
            *h = u64::from_le_bytes(word);
        }
        let [dims, count, seed] = header;
        let mut traj = Trajectory::new(dims as usize, seed);
        let mut row = vec![0.0; dims as usize];
        for _ in 0..count {
            r.read_exact(&mut word).map_err(|_| bad("truncated body"))?;
            let step = f64::from_le_bytes(word) as u64;
            for v in &mut row {
                r.read_exact(&mut word).map_err(|_| bad("truncated body"))?;
                *v = f64::from_le_bytes(word);
            }
            traj.push(step, &row);
        }
        Ok(traj)
    }
}

/// Runs `steps` steps, keeping the initial state and every `thin`-th state.
pub fn record_trajectory<S: Stepper, R: Rng + ?Sized>(
    body: &Body,
    walk: &S,
    state: &mut ChainState,
    steps: u64,
    thin: u64,
    seed: u64,
    rng: &mut R,
) -> Result<Trajectory> {
    if thin == 0 {
        return Err(Error::InvalidParameter("thinning must be at least 1".into()));
    }
    let mut traj = Trajectory::new(state.x().len(), seed);
    traj.push(state.steps(), state.x());
    for i in 1..=steps {
        walk.step(body, state, rng)?;
        if i % thin == 0 {
            traj.push(state.steps(), state.x());
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::samplers::CoordinateHitAndRun;

    fn sample_trajectory() -> Trajectory {
        let body = Body::standard_simplex(3).unwrap();
        let mut state = ChainState::new(&body, vec![0.2, 0.2, 0.2], 0).unwrap();
        let mut rng = stream_rng(5, 0);
        record_trajectory(&body, &CoordinateHitAndRun::uniform(), &mut state, 100, 7, 5, &mut rng)
            .unwrap()
    }

    #[test]
    fn thinning_keeps_expected_steps() {
        let t = sample_trajectory();
        assert_eq!(t.steps, (0..=100).step_by(7).collect::<Vec<u64>>());
    }

    #[test]
    fn csv_round_trip() {
        let t = sample_trajectory();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"step,x0,x1,x2\n"));
        let back = Trajectory::read_csv(buf.as_slice(), 5).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn binary_round_trip() {
        let t = sample_trajectory();
        let mut buf = Vec::new();
        t.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 32 + t.len() * 4 * 8);
        assert_eq!(Trajectory::read_binary(buf.as_slice()).unwrap(), t);
        buf[0] = b'X';
        assert!(Trajectory::read_binary(buf.as_slice()).is_err());
    }
}
