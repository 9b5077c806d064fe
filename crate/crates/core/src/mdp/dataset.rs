use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numerics::DenseMatrix;

/// One observed step `(s, a, r, s')`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

/// `n` trajectories of exactly `horizon` steps each.
///
/// States are stored once per trajectory as a `(horizon + 1) × d` block, so
/// the next state of step `t` is by construction the state of step `t + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryDataset {
    n: usize,
    horizon: usize,
    d: usize,
    num_actions: usize,
    states: Vec<f64>,
    actions: Vec<usize>,
    rewards: Vec<f64>,
}

/// Aligned rows for one timestep, or a pooled set of stationary tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionBatch {
    pub states: DenseMatrix,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub next_states: DenseMatrix,
}

impl TransitionBatch {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Row indices taking action `a`, in order.
    pub fn rows_with_action(&self, a: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.actions[i] == a).collect()
    }

    pub fn select(&self, idx: &[usize]) -> TransitionBatch {
        TransitionBatch {
            states: self.states.select_rows(idx),
            actions: idx.iter().map(|&i| self.actions[i]).collect(),
            rewards: idx.iter().map(|&i| self.rewards[i]).collect(),
            next_states: self.next_states.select_rows(idx),
        }
    }

    /// Validated construction from stationary tuples.
    pub fn from_transitions(transitions: &[Transition], num_actions: usize) -> Result<Self> {
        let first = transitions
            .first()
            .ok_or_else(|| Error::InvalidInput("empty transition list".into()))?;
        let d = first.state.len();
        for tr in transitions {
            check_dim("TransitionBatch: state dimension", d, tr.state.len())?;
            check_dim("TransitionBatch: next-state dimension", d, tr.next_state.len())?;
            if tr.action >= num_actions {
                return Err(Error::InvalidInput(format!(
                    "action {} outside 0..{num_actions}",
                    tr.action
                )));
            }
        }
        let n = transitions.len();
        Ok(Self {
            states: DenseMatrix::from_fn_rows(n, d, |i, r| r.copy_from_slice(&transitions[i].state)),
            actions: transitions.iter().map(|t| t.action).collect(),
            rewards: transitions.iter().map(|t| t.reward).collect(),
            next_states: DenseMatrix::from_fn_rows(n, d, |i, r| r.copy_from_slice(&transitions[i].next_state)),
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    n: usize,
    #[serde(rename = "T")]
    horizon: usize,
    d: usize,
    #[serde(rename = "A")]
    num_actions: usize,
}

impl TrajectoryDataset {
    /// Builds a dataset from per-trajectory transition lists, validating
    /// lengths, dimensions, action range, and the chaining invariant.
    pub fn from_trajectories(trajectories: &[Vec<Transition>], num_actions: usize) -> Result<Self> {
        let first = trajectories
            .first()
            .and_then(|t| t.first())
            .ok_or_else(|| Error::InvalidInput("dataset needs at least one non-empty trajectory".into()))?;
        let horizon = trajectories[0].len();
        let d = first.state.len();
        let mut ds = Self::with_capacity(trajectories.len(), horizon, d, num_actions);
        for (i, traj) in trajectories.iter().enumerate() {
            check_dim("TrajectoryDataset: trajectory length", horizon, traj.len())?;
            for (t, tr) in traj.iter().enumerate() {
                check_dim("TrajectoryDataset: state dimension", d, tr.state.len())?;
                check_dim("TrajectoryDataset: next-state dimension", d, tr.next_state.len())?;
                if tr.action >= num_actions {
                    return Err(Error::InvalidInput(format!(
                        "action {} outside 0..{num_actions}",
                        tr.action
                    )));
                }
                if t > 0 && traj[t - 1].next_state != tr.state {
                    return Err(Error::InvalidInput(format!(
                        "trajectory {i} breaks chaining at step {t}: next_state differs from following state"
                    )));
                }
            }
            let mut states = Vec::with_capacity((horizon + 1) * d);
            for tr in traj {
                states.extend_from_slice(&tr.state);
            }
            states.extend_from_slice(&traj[horizon - 1].next_state);
            let actions: Vec<usize> = traj.iter().map(|tr| tr.action).collect();
            let rewards: Vec<f64> = traj.iter().map(|tr| tr.reward).collect();
            ds.push_trajectory(&states, &actions, &rewards)?;
        }
        Ok(ds)
    }

    /// Empty dataset to be filled with [`push_trajectory`](Self::push_trajectory).
    pub fn with_capacity(n: usize, horizon: usize, d: usize, num_actions: usize) -> Self {
        Self {
            n: 0,
            horizon,
            d,
            num_actions,
            states: Vec::with_capacity(n * (horizon + 1) * d),
            actions: Vec::with_capacity(n * horizon),
            rewards: Vec::with_capacity(n * horizon),
        }
    }

    /// Appends a trajectory given its `horizon + 1` states (flattened), actions, and rewards.
    pub fn push_trajectory(&mut self, states: &[f64], actions: &[usize], rewards: &[f64]) -> Result<()> {
        check_dim("push_trajectory: states", (self.horizon + 1) * self.d, states.len())?;
        check_dim("push_trajectory: actions", self.horizon, actions.len())?;
        check_dim("push_trajectory: rewards", self.horizon, rewards.len())?;
        if let Some(&a) = actions.iter().find(|&&a| a >= self.num_actions) {
            return Err(Error::InvalidInput(format!(
                "action {a} outside 0..{}",
                self.num_actions
            )));
        }
        if states.iter().chain(rewards).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite value in trajectory".into()));
        }
        self.states.extend_from_slice(states);
        self.actions.extend_from_slice(actions);
        self.rewards.extend_from_slice(rewards);
        self.n += 1;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn state_dim(&self) -> usize {
        self.d
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// State of trajectory `i` at step `t` (`t ≤ horizon`).
    pub fn state(&self, i: usize, t: usize) -> &[f64] {
        let base = (i * (self.horizon + 1) + t) * self.d;
        &self.states[base..base + self.d]
    }

    pub fn action(&self, i: usize, t: usize) -> usize {
        self.actions[i * self.horizon + t]
    }

    pub fn reward(&self, i: usize, t: usize) -> f64 {
        self.rewards[i * self.horizon + t]
    }

    pub fn transition(&self, i: usize, t: usize) -> Transition {
        Transition {
            state: self.state(i, t).to_vec(),
            action: self.action(i, t),
            reward: self.reward(i, t),
            next_state: self.state(i, t + 1).to_vec(),
        }
    }

    /// All trajectories as transition lists.
    pub fn trajectories(&self) -> Vec<Vec<Transition>> {
        (0..self.n)
            .map(|i| (0..self.horizon).map(|t| self.transition(i, t)).collect())
            .collect()
    }

    /// The `n` aligned rows at step `t`, in trajectory order.
    pub fn slice_timestep(&self, t: usize) -> Result<TransitionBatch> {
        if t >= self.horizon {
            return Err(Error::InvalidInput(format!("timestep {t} outside 0..{}", self.horizon)));
        }
        Ok(self.slice_rows(t, &(0..self.n).collect::<Vec<_>>()))
    }

    fn slice_rows(&self, t: usize, trajs: &[usize]) -> TransitionBatch {
        let d = self.d;
        TransitionBatch {
            states: DenseMatrix::from_fn_rows(trajs.len(), d, |k, r| r.copy_from_slice(self.state(trajs[k], t))),
            actions: trajs.iter().map(|&i| self.action(i, t)).collect(),
            rewards: trajs.iter().map(|&i| self.reward(i, t)).collect(),
            next_states: DenseMatrix::from_fn_rows(trajs.len(), d, |k, r| {
                r.copy_from_slice(self.state(trajs[k], t + 1))
            }),
        }
    }

    /// Every transition of every step pooled into one batch (trajectory-major order).
    pub fn pooled(&self) -> TransitionBatch {
        let rows: Vec<(usize, usize)> = (0..self.n)
            .flat_map(|i| (0..self.horizon).map(move |t| (i, t)))
            .collect();
        let d = self.d;
        TransitionBatch {
            states: DenseMatrix::from_fn_rows(rows.len(), d, |k, r| {
                r.copy_from_slice(self.state(rows[k].0, rows[k].1))
            }),
            actions: rows.iter().map(|&(i, t)| self.action(i, t)).collect(),
            rewards: rows.iter().map(|&(i, t)| self.reward(i, t)).collect(),
            next_states: DenseMatrix::from_fn_rows(rows.len(), d, |k, r| {
                r.copy_from_slice(self.state(rows[k].0, rows[k].1 + 1))
            }),
        }
    }

    /// Dataset restricted to the listed trajectories, in the given order.
    pub fn subset(&self, trajs: &[usize]) -> Result<TrajectoryDataset> {
        let mut out = Self::with_capacity(trajs.len(), self.horizon, self.d, self.num_actions);
        let block = (self.horizon + 1) * self.d;
        for &i in trajs {
            if i >= self.n {
                return Err(Error::InvalidInput(format!(
                    "trajectory index {i} outside 0..{}",
                    self.n
                )));
            }
            out.states.extend_from_slice(&self.states[i * block..(i + 1) * block]);
            out.actions
                .extend_from_slice(&self.actions[i * self.horizon..(i + 1) * self.horizon]);
            out.rewards
                .extend_from_slice(&self.rewards[i * self.horizon..(i + 1) * self.horizon]);
            out.n += 1;
        }
        Ok(out)
    }

    /// Copy with every reward multiplied by `-1`.
    pub fn negated_rewards(&self) -> TrajectoryDataset {
        let mut out = self.clone();
        for r in &mut out.rewards {
            *r = -*r;
        }
        out
    }

    /// Writes the CSV body `(traj_id, t, s_*, a, r, sp_*)` to `path` and the
    /// `(n, T, d, A)` sidecar to `path` with a `.json` extension.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        let mut header = vec!["traj_id".to_string(), "t".to_string()];
        header.extend((0..self.d).map(|j| format!("s_{j}")));
        header.push("a".into());
        header.push("r".into());
        header.extend((0..self.d).map(|j| format!("sp_{j}")));
        w.write_record(&header)?;
        for i in 0..self.n {
            for t in 0..self.horizon {
                let mut rec = vec![i.to_string(), t.to_string()];
                rec.extend(self.state(i, t).iter().map(|v| v.to_string()));
                rec.push(self.action(i, t).to_string());
                rec.push(self.reward(i, t).to_string());
                rec.extend(self.state(i, t + 1).iter().map(|v| v.to_string()));
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        let side = Sidecar {
            n: self.n,
            horizon: self.horizon,
            d: self.d,
            num_actions: self.num_actions,
        };
        serde_json::to_writer_pretty(BufWriter::new(File::create(path.with_extension("json"))?), &side)?;
        Ok(())
    }

    /// Reads a dataset written by [`write_csv`](Self::write_csv).
    pub fn read_csv(path: &Path) -> Result<TrajectoryDataset> {
        let side: Sidecar = serde_json::from_reader(BufReader::new(File::open(path.with_extension("json"))?))?;
        let mut rdr = csv::Reader::from_reader(BufReader::new(File::open(path)?));
        let d = side.d;
        let mut trajs: Vec<Vec<Transition>> = vec![Vec::with_capacity(side.horizon); side.n];
        for rec in rdr.records() {
            let rec = rec?;
            check_dim("read_csv: record width", 2 * d + 4, rec.len())?;
            let parse = |k: usize| -> Result<f64> {
                rec[k]
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("bad number '{}': {e}", &rec[k])))
            };
            let idx = |k: usize| -> Result<usize> {
                rec[k]
                    .parse::<usize>()
                    .map_err(|e| Error::InvalidInput(format!("bad integer '{}': {e}", &rec[k])))
            };
            let i = idx(0)?;
            let t = idx(1)?;
            if i >= side.n || t != trajs[i].len() {
                return Err(Error::InvalidInput(format!("unexpected row (traj {i}, t {t})")));
            }
            let state = (0..d).map(|j| parse(2 + j)).collect::<Result<Vec<_>>>()?;
            let action = idx(2 + d)?;
            let reward = parse(3 + d)?;
            let next_state = (0..d).map(|j| parse(4 + d + j)).collect::<Result<Vec<_>>>()?;
            trajs[i].push(Transition {
                state,
                action,
                reward,
                next_state,
            });
        }
        let ds = Self::from_trajectories(&trajs, side.num_actions)?;
        check_dim("read_csv: horizon", side.horizon, ds.horizon)?;
        Ok(ds)
    }
}
