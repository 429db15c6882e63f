//! Request counters and latency histograms with a text exposition renderer.
//!
//! The hot path never locks: every cell is a relaxed atomic, and a scrape
//! assembles a snapshot from whatever the counters hold at that instant.
//! Counters only grow, so a scrape can lag a concurrent request but never
//! goes backward. Rendering does not touch the counters, which makes two
//! consecutive scrapes with no traffic in between byte-identical.

use std::sync::atomic::{AtomicU64, Ordering};

use readmit_core::drift::FeatureKl;

/// Upper bucket bounds in milliseconds; a +Inf bucket follows implicitly.
pub const LATENCY_BUCKETS_MS: [f64; 10] =
    [1.0, 2.5, 5.0, 10.0, 25.0, 50.0, 100.0, 200.0, 500.0, 1000.0];

const BUCKETS: usize = LATENCY_BUCKETS_MS.len() + 1;

/// Every status the handlers can produce; one counter cell each.
const STATUS_CODES: [u16; 4] = [200, 422, 500, 503];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Predict,
    Explain,
    Health,
}

impl Endpoint {
    pub const ALL: [Endpoint; 3] = [Endpoint::Predict, Endpoint::Explain, Endpoint::Health];

    pub fn name(self) -> &'static str {
        match self {
            Endpoint::Predict => "predict",
            Endpoint::Explain => "explain",
            Endpoint::Health => "health",
        }
    }

    fn index(self) -> usize {
        match self {
            Endpoint::Predict => 0,
            Endpoint::Explain => 1,
            Endpoint::Health => 2,
        }
    }
}

struct EndpointCells {
    statuses: [AtomicU64; STATUS_CODES.len()],
    /// Per-bucket increments (not cumulative); the renderer cumulates.
    buckets: [AtomicU64; BUCKETS],
    latency_micros: AtomicU64,
}

impl EndpointCells {
    fn new() -> EndpointCells {
        const ZERO: AtomicU64 = AtomicU64::new(0);
        EndpointCells {
            statuses: [ZERO; STATUS_CODES.len()],
            buckets: [ZERO; BUCKETS],
            latency_micros: AtomicU64::new(0),
        }
    }
}

pub struct MetricsRegistry {
    endpoints: [EndpointCells; 3],
}

impl Default for MetricsRegistry {
    fn default() -> Self {
        Self::new()
    }
}

impl MetricsRegistry {
    pub fn new() -> MetricsRegistry {
        MetricsRegistry {
            endpoints: [EndpointCells::new(), EndpointCells::new(), EndpointCells::new()],
        }
    }

    /// Records one finished request. Latency is stored at microsecond
    /// granularity so the `_sum` series stays a plain integer counter.
    pub fn record(&self, endpoint: Endpoint, status: u16, latency_ms: f64) {
        let cells = &self.endpoints[endpoint.index()];
        // Handlers only emit the codes above; anything else would be a bug,
        // but a scrape must still conserve totals, so fall back by class.
        let slot = STATUS_CODES.iter().position(|&c| c == status).unwrap_or(match status {
            200..=299 => 0,
            400..=499 => 1,
            _ => 2,
        });
        cells.statuses[slot].fetch_add(1, Ordering::Relaxed);
        let bucket =
            LATENCY_BUCKETS_MS.iter().position(|&b| latency_ms <= b).unwrap_or(BUCKETS - 1);
        cells.buckets[bucket].fetch_add(1, Ordering::Relaxed);
        cells.latency_micros.fetch_add((latency_ms * 1000.0).round() as u64, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> RegistrySnapshot {
        let endpoints = Endpoint::ALL
            .iter()
            .map(|&e| {
                let cells = &self.endpoints[e.index()];
                let statuses = STATUS_CODES
                    .iter()
                    .zip(&cells.statuses)
                    .map(|(&code, cell)| (code, cell.load(Ordering::Relaxed)))
                    .collect();
                let mut buckets = [0u64; BUCKETS];
                for (out, cell) in buckets.iter_mut().zip(&cells.buckets) {
                    *out = cell.load(Ordering::Relaxed);
                }
                EndpointSnapshot {
                    endpoint: e.name(),
                    statuses,
                    buckets,
                    sum_ms: cells.latency_micros.load(Ordering::Relaxed) as f64 / 1000.0,
                }
            })
            .collect();
        RegistrySnapshot { endpoints }
    }
}

/// Point-in-time counter values for one endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointSnapshot {
    pub endpoint: &'static str,
    /// (status code, count) for every code the service can produce.
    pub statuses: Vec<(u16, u64)>,
    /// Per-bucket observation counts, +Inf last.
    pub buckets: [u64; BUCKETS],
    pub sum_ms: f64,
}

impl EndpointSnapshot {
    pub fn total(&self) -> u64 {
        self.statuses.iter().map(|(_, n)| n).sum()
    }

    pub fn server_errors(&self) -> u64 {
        self.statuses.iter().filter(|(code, _)| *code >= 500).map(|(_, n)| n).sum()
    }

    pub fn observations(&self) -> u64 {
        self.buckets.iter().sum()
    }

    /// Latency quantile by linear interpolation inside the first bucket
    /// whose cumulative count reaches the rank. Observations landing in
    /// +Inf pin the estimate to the largest finite bound: the histogram
    /// carries no information beyond it.
    pub fn quantile_ms(&self, q: f64) -> Option<f64> {
        debug_assert!(q > 0.0 && q <= 1.0);
        let count = self.observations();
        if count == 0 {
            return None;
        }
        let rank = q * count as f64;
        let mut cumulative = 0u64;
        for (i, &c) in self.buckets.iter().enumerate() {
            cumulative += c;
            if cumulative as f64 >= rank {
                if i == BUCKETS - 1 {
                    return Some(LATENCY_BUCKETS_MS[BUCKETS - 2]);
                }
                let hi = LATENCY_BUCKETS_MS[i];
                let lo = if i == 0 { 0.0 } else { LATENCY_BUCKETS_MS[i - 1] };
                let below = (cumulative - c) as f64;
                return Some(lo + (hi - lo) * (rank - below) / c as f64);
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegistrySnapshot {
    pub endpoints: Vec<EndpointSnapshot>,
}

impl RegistrySnapshot {
    pub fn endpoint(&self, name: &str) -> Option<&EndpointSnapshot> {
        self.endpoints.iter().find(|e| e.endpoint == name)
    }

    pub fn total_requests(&self) -> u64 {
        self.endpoints.iter().map(EndpointSnapshot::total).sum()
    }

    pub fn server_errors(&self) -> u64 {
        self.endpoints.iter().map(EndpointSnapshot::server_errors).sum()
    }
}

/// Drift gauge values computed at scrape time from the serving monitor.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftGauges {
    pub features: Vec<FeatureKl>,
    pub window_fill: usize,
    pub window_capacity: usize,
    pub window_mean: Option<f64>,
    pub prediction_alert: bool,
}

/// Text exposition (version 0.0.4). Counter families are emitted for every
/// endpoint and status, zeros included, so the scrape schema is fixed from
/// the first request. Drift gauges appear only when a monitor is attached.
pub fn render_metrics(snapshot: &RegistrySnapshot, drift: Option<&DriftGauges>) -> String {
    let mut out = String::with_capacity(4096);

    out.push_str("# HELP requests_total Requests handled, by endpoint and status code.\n");
    out.push_str("# TYPE requests_total counter\n");
    for e in &snapshot.endpoints {
        for &(code, n) in &e.statuses {
            out.push_str(&format!(
                "requests_total{{endpoint=\"{}\",status=\"{code}\"}} {n}\n",
                e.endpoint
            ));
        }
    }

    out.push_str("# HELP request_latency_ms Request handling latency in milliseconds.\n");
    out.push_str("# TYPE request_latency_ms histogram\n");
    for e in &snapshot.endpoints {
        let mut cumulative = 0u64;
        for (i, &c) in e.buckets.iter().enumerate() {
            cumulative += c;
            let le = if i == BUCKETS - 1 {
                "+Inf".to_string()
            } else {
                format!("{}", LATENCY_BUCKETS_MS[i])
            };
            out.push_str(&format!(
                "request_latency_ms_bucket{{endpoint=\"{}\",le=\"{le}\"}} {cumulative}\n",
                e.endpoint
            ));
        }
        out.push_str(&format!("request_latency_ms_sum{{endpoint=\"{}\"}} {}\n", e.endpoint, e.sum_ms));
        out.push_str(&format!(
            "request_latency_ms_count{{endpoint=\"{}\"}} {cumulative}\n",
            e.endpoint
        ));
    }

    let Some(gauges) = drift else {
        return out;
    };

    if !gauges.features.is_empty() {
        out.push_str(
            "# HELP feature_kl_nats KL(serving || training) per feature over served requests.\n",
        );
        out.push_str("# TYPE feature_kl_nats gauge\n");
        for f in &gauges.features {
            out.push_str(&format!("feature_kl_nats{{feature=\"{}\"}} {}\n", f.feature, f.kl));
        }
        out.push_str("# HELP feature_drift_alert 1 when a feature KL exceeds the drift gate.\n");
        out.push_str("# TYPE feature_drift_alert gauge\n");
        for f in &gauges.features {
            out.push_str(&format!(
                "feature_drift_alert{{feature=\"{}\"}} {}\n",
                f.feature,
                u8::from(f.alert)
            ));
        }
    }

    out.push_str(
        "# HELP prediction_window_fill Predictions currently held by the rolling window.\n",
    );
    out.push_str("# TYPE prediction_window_fill gauge\n");
    out.push_str(&format!("prediction_window_fill {}\n", gauges.window_fill));
    out.push_str("# HELP prediction_window_capacity Rolling window capacity.\n");
    out.push_str("# TYPE prediction_window_capacity gauge\n");
    out.push_str(&format!("prediction_window_capacity {}\n", gauges.window_capacity));
    if let Some(mean) = gauges.window_mean {
        out.push_str(
            "# HELP prediction_window_mean Mean predicted probability over the rolling window.\n",
        );
        out.push_str("# TYPE prediction_window_mean gauge\n");
        out.push_str(&format!("prediction_window_mean {mean}\n"));
    }
    out.push_str(
        "# HELP prediction_drift_alert 1 when the full window mean deviates beyond the gate.\n",
    );
    out.push_str("# TYPE prediction_drift_alert gauge\n");
    out.push_str(&format!("prediction_drift_alert {}\n", u8::from(gauges.prediction_alert)));

    out
}
