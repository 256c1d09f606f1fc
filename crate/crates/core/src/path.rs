//! Recorded sample paths with their marked jump point system.

use serde::Serialize;

/// One proposed jump. Rejected proposals are kept so the acceptance rule can
/// be re-checked from the stored pre-jump state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpRecord {
    pub s: f64,
    pub z: f64,
    /// Auxiliary mark on the envelope scale.
    pub v: f64,
    pub accepted: bool,
    pub pre_state: f64,
    /// Independent uniform mark in [0, 1].
    pub x_mark: f64,
}

/// Per-step decomposition of the continuous part of an Euler step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepTrace {
    pub drift: f64,
    pub compensator: f64,
    pub gauss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathRecord {
    pub dt: f64,
    pub horizon: f64,
    /// `states[i]` is the state at time `i * dt`.
    pub states: Vec<f64>,
    pub jumps: Vec<JumpRecord>,
    /// Time at which the path left the window, if it did.
    pub exit_time: Option<f64>,
    pub trace: Option<Vec<StepTrace>>,
}

impl PathRecord {
    pub fn accepted(&self) -> impl Iterator<Item = &JumpRecord> {
        self.jumps.iter().filter(|j| j.accepted)
    }

    pub fn exited(&self) -> bool {
        self.exit_time.is_some()
    }

    /// End of the usable segment: the exit time or the horizon.
    pub fn valid_until(&self) -> f64 {
        self.exit_time.unwrap_or(self.horizon)
    }

    pub fn final_state(&self) -> f64 {
        *self.states.last().expect("paths hold at least the initial state")
    }

    /// State at time `t`: grid value of the step containing `t`, plus the
    /// accepted jumps of that step up to `t`. Càdlàg by construction.
    pub fn state_at(&self, t: f64) -> f64 {
        let n = self.states.len() - 1;
        let i = ((t / self.dt).floor() as usize).min(n);
        let t0 = i as f64 * self.dt;
        let mut x = self.states[i];
        if i < n {
            let start = self.jumps.partition_point(|j| j.s <= t0);
            for j in &self.jumps[start..] {
                if j.s > t {
                    break;
                }
                if j.accepted {
                    x += j.z;
                }
            }
        }
        x
    }

    /// Accepted jumps as `(time, |size|)` pairs, restricted to the usable segment.
    pub fn point_system(&self) -> Vec<(f64, f64)> {
        let end = self.valid_until();
        self.accepted().filter(|j| j.s <= end).map(|j| (j.s, j.z.abs())).collect()
    }

    /// Index range of jumps whose time lies in `(a, b]`.
    pub fn jumps_in(&self, a: f64, b: f64) -> &[JumpRecord] {
        let lo = self.jumps.partition_point(|j| j.s <= a);
        let hi = self.jumps.partition_point(|j| j.s <= b);
        &self.jumps[lo..hi]
    }

    /// Path export: states CSV `(t, M_t)`.
    pub fn states_csv(&self) -> String {
        let mut s = String::from("t,M_t\n");
        for (i, x) in self.states.iter().enumerate() {
            s.push_str(&format!("{:.9e},{:.12e}\n", i as f64 * self.dt, x));
        }
        s
    }

    /// Path export: jumps CSV `(s, z, v, accepted, pre_state, x_mark)`.
    pub fn jumps_csv(&self) -> String {
        let mut s = String::from("s,z,v,accepted,pre_state,x_mark\n");
        for j in &self.jumps {
            s.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{},{:.12e},{:.12e}\n",
                j.s, j.z, j.v, j.accepted as u8, j.pre_state, j.x_mark
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jr(s: f64, z: f64, accepted: bool) -> JumpRecord {
        JumpRecord { s, z, v: 0.5, accepted, pre_state: 0.0, x_mark: 0.5 }
    }

    #[test]
    fn state_at_adds_jumps_inside_a_step() {
        let p = PathRecord {
            dt: 1.0,
            horizon: 2.0,
            states: vec![0.0, 1.5, 2.0],
            jumps: vec![jr(0.25, 1.0, true), jr(0.5, 7.0, false), jr(0.75, 0.25, true)],
            exit_time: None,
            trace: None,
        };
        assert_eq!(p.state_at(0.1), 0.0);
        assert_eq!(p.state_at(0.25), 1.0);
        assert_eq!(p.state_at(0.8), 1.25);
        assert_eq!(p.state_at(1.0), 1.5);
        assert_eq!(p.state_at(5.0), 2.0);
        assert_eq!(p.point_system(), vec![(0.25, 1.0), (0.75, 0.25)]);
        assert_eq!(p.jumps_in(0.25, 0.75).len(), 2);
    }
}
