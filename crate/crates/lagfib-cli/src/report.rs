//! The one JSON document every command prints to stdout. Reports are
//! deterministic for a fixed spec, flags, and seed; the timings block is
//! the only observational part, and consumers comparing runs must drop it.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

pub const REPORT_SCHEMA: &str = "lagfib.report/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Fail,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub command: &'static str,
    pub spec_digest: String,
    pub status: Status,
    pub results: Value,
    pub timings_ms: BTreeMap<String, u128>,
}

impl RunReport {
    pub fn new(
        command: &'static str,
        spec_digest: String,
        status: Status,
        results: Value,
        timings_ms: BTreeMap<String, u128>,
    ) -> Self {
        RunReport { schema: REPORT_SCHEMA, command, spec_digest, status, results, timings_ms }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// 0 for ok, 1 for any failed check; parse and I/O problems never get
    /// this far and exit 2 from main.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => 0,
            Status::Fail => 1,
        }
    }
}

/// Accumulates per-stage wall-clock laps.
pub struct StageClock {
    last: Instant,
    laps: BTreeMap<String, u128>,
}

impl StageClock {
    pub fn start() -> Self {
        StageClock { last: Instant::now(), laps: BTreeMap::new() }
    }

    /// Records the time since the previous lap under the stage name.
    pub fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        let ms = now.duration_since(self.last).as_millis();
        *self.laps.entry(stage.to_string()).or_insert(0) += ms;
        self.last = now;
    }

    pub fn finish(self) -> BTreeMap<String, u128> {
        self.laps
    }
}
