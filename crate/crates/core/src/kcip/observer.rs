use serde::Serialize;
use serde_json::{Map, Value};

use super::{Density, SpinConfig, UpdateDraw};
use crate::graph::{Graph, Vertex};

/// Transition `x_t -> x_{t+1}` handed to observers.
///
/// `after` is `x_{t+1}`; `x_t` differs from it only at `flipped`.
pub struct Step<'a> {
    pub t: u64,
    pub draw: UpdateDraw,
    pub flipped: Option<Vertex>,
    pub after: &'a SpinConfig,
}

impl Step<'_> {
    /// Label of `v` in `x_t`.
    pub fn before(&self, v: Vertex) -> bool {
        self.after.get(v) ^ (self.flipped == Some(v))
    }

    pub fn count_before(&self) -> usize {
        match self.flipped {
            Some(v) if self.after.get(v) => self.after.count() - 1,
            Some(_) => self.after.count() + 1,
            None => self.after.count(),
        }
    }
}

/// Hook attached to a trajectory.
pub trait Observer {
    fn name(&self) -> &'static str;

    fn on_start(&mut self, _g: &Graph, _x0: &SpinConfig) {}

    fn on_step(&mut self, g: &Graph, step: &Step<'_>);

    fn summary(&self) -> Value;
}

/// Serializable outcome of one seeded run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub graph: String,
    pub c: f64,
    pub seed: u64,
    #[serde(rename = "T")]
    pub steps: u64,
    pub final_state_hex: String,
    pub observers: Map<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl TrajectoryRecord {
    pub(crate) fn new(
        g: &Graph,
        density: Density,
        seed: u64,
        steps: u64,
        final_state: SpinConfig,
        observers: &[&mut dyn Observer],
        warnings: Vec<String>,
    ) -> Self {
        TrajectoryRecord {
            graph: g.to_string(),
            c: density.c(),
            seed,
            steps,
            final_state_hex: final_state.to_hex(),
            observers: observers
                .iter()
                .map(|o| (o.name().to_string(), o.summary()))
                .collect(),
            warnings,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record is always serializable")
    }
}

/// Tracks the extremes of `V_t` and the times it changed.
#[derive(Debug, Clone, Default)]
pub struct VertexCountTrace {
    pub min: usize,
    pub max: usize,
    pub changes: u64,
    pub last: usize,
}

impl Observer for VertexCountTrace {
    fn name(&self) -> &'static str {
        "vertex_count"
    }

    fn on_start(&mut self, _g: &Graph, x0: &SpinConfig) {
        *self = VertexCountTrace {
            min: x0.count(),
            max: x0.count(),
            changes: 0,
            last: x0.count(),
        };
    }

    fn on_step(&mut self, _g: &Graph, step: &Step<'_>) {
        let v = step.after.count();
        self.min = self.min.min(v);
        self.max = self.max.max(v);
        if step.flipped.is_some() {
            self.changes += 1;
        }
        self.last = v;
    }

    fn summary(&self) -> Value {
        serde_json::json!({ "min": self.min, "max": self.max, "changes": self.changes, "last": self.last })
    }
}
