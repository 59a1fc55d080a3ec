//! Discrete-event simulation of a metric-based autoscaler.
//!
//! Requests arrive as a Poisson stream and are routed to the ready container
//! with the fewest requests in flight. Every second the monitor samples the
//! per-container metric and averages it across ready containers; the
//! observation window keeps a moving average of those samples, and every
//! `T_eva` the evaluator orders `clamp(⌈OV/TV⌉, 1, N_max)` replicas. The
//! provisioning engine moves the ready count toward the order one replica at a
//! time with exponential delays whose rate is proportional to the gap.

mod container;
mod events;

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::config::{positive, AutoscalerConfig, MetricKind, ProfilingTrace, TraceRow};
use crate::error::{invalid, Result};
use container::Container;
use events::{Event, EventQueue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceDistribution {
    #[default]
    Exponential,
    Deterministic,
}

/// How a container serves the requests it holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WorkloadModel {
    /// Every request is served independently; no interference.
    InfiniteServer {
        mean_service_s: f64,
        #[serde(default)]
        distribution: ServiceDistribution,
    },
    /// Requests in one container share a single unit-rate server equally.
    ProcessorSharing {
        mean_demand_s: f64,
        #[serde(default)]
        distribution: ServiceDistribution,
    },
}

impl WorkloadModel {
    pub fn infinite_server(mean_service_s: f64) -> Self {
        WorkloadModel::InfiniteServer {
            mean_service_s,
            distribution: ServiceDistribution::Exponential,
        }
    }

    pub fn mean_service_s(&self) -> f64 {
        match *self {
            WorkloadModel::InfiniteServer { mean_service_s, .. } => mean_service_s,
            WorkloadModel::ProcessorSharing { mean_demand_s, .. } => mean_demand_s,
        }
    }

    fn distribution(&self) -> ServiceDistribution {
        match *self {
            WorkloadModel::InfiniteServer { distribution, .. }
            | WorkloadModel::ProcessorSharing { distribution, .. } => distribution,
        }
    }

    fn is_processor_sharing(&self) -> bool {
        matches!(self, WorkloadModel::ProcessorSharing { .. })
    }
}

pub const DEFAULT_WARMUP_S: f64 = 300.0;

fn default_warmup() -> f64 {
    DEFAULT_WARMUP_S
}

fn default_initial_replicas() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub autoscaler: AutoscalerConfig,
    pub workload: WorkloadModel,
    /// Mean arrival rate to the whole service, req/s.
    pub lambda: f64,
    pub duration_s: f64,
    #[serde(default = "default_warmup")]
    pub warmup_s: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_initial_replicas")]
    pub initial_replicas: usize,
}

impl SimulationConfig {
    pub fn new(autoscaler: AutoscalerConfig, workload: WorkloadModel, lambda: f64, duration_s: f64) -> Self {
        Self {
            autoscaler,
            workload,
            lambda,
            duration_s,
            warmup_s: DEFAULT_WARMUP_S,
            seed: 0,
            initial_replicas: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.autoscaler.validate()?;
        positive("lambda", self.lambda)?;
        positive("mean_service_s", self.workload.mean_service_s())?;
        positive("duration_s", self.duration_s)?;
        if !(self.warmup_s >= 0.0) || !(self.duration_s > self.warmup_s) {
            return Err(invalid(
                "warmup_s",
                format!(
                    "need 0 <= warmup_s < duration_s, got {} and {}",
                    self.warmup_s, self.duration_s
                ),
            ));
        }
        if self.initial_replicas < 1 || self.initial_replicas > self.autoscaler.n_max {
            return Err(invalid(
                "initial_replicas",
                format!("{} outside [1, {}]", self.initial_replicas, self.autoscaler.n_max),
            ));
        }
        Ok(())
    }
}

/// State at one monitor tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondSample {
    pub t: f64,
    pub ready: usize,
    pub ordered: usize,
    /// Cross-container mean of the metric at this tick.
    pub sample: f64,
    /// Moving average over the observation window, including this tick.
    pub observed_value: f64,
    pub completions: usize,
    /// Mean response time of requests completing during the last second.
    pub mean_response_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub lambda: f64,
    pub warmup_s: f64,
    pub duration_s: f64,
    pub seed: u64,
    /// Time-average of the ready replica count.
    pub avg_replica_count: f64,
    /// Average of the window-averaged per-container metric over monitor ticks.
    pub avg_concurrency: f64,
    /// Average of the instantaneous per-container metric over monitor ticks.
    pub avg_sampled_metric: f64,
    pub avg_response_time_s: f64,
    /// Requests completed after warmup.
    pub completed_requests: u64,
    /// Totals over the whole run, warmup included.
    pub arrivals: u64,
    pub completions: u64,
    pub in_flight_at_end: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<SecondSample>,
}

impl SimulationReport {
    /// Samples taken strictly after warmup.
    pub fn post_warmup(&self) -> impl Iterator<Item = &SecondSample> {
        let warmup = self.warmup_s;
        self.series.iter().filter(move |s| s.t > warmup)
    }

    /// One trace row per post-warmup second. Seconds without completions reuse
    /// the most recent response time; the second vector flags those rows.
    pub fn profiling_trace(&self) -> (ProfilingTrace, Vec<bool>) {
        let mut rows = Vec::new();
        let mut carried = Vec::new();
        let mut last_rt = None;
        for s in &self.series {
            let fresh = s.mean_response_time_s;
            if fresh.is_some() {
                last_rt = fresh;
            }
            if s.t <= self.warmup_s {
                continue;
            }
            let Some(rt) = last_rt else { continue };
            rows.push(TraceRow::new(self.lambda / s.ready as f64, s.observed_value, rt));
            carried.push(fresh.is_none());
        }
        (ProfilingTrace { rows }, carried)
    }
}

const ARRIVAL_STREAM: u64 = 0;
const SERVICE_STREAM: u64 = 1;
const PROVISIONING_STREAM: u64 = 2;

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

struct Simulation {
    cfg: SimulationConfig,
    queue: EventQueue,
    containers: Vec<Container>,
    /// Ready container ids, ascending.
    ready: Vec<usize>,
    ordered: usize,
    generation: u64,
    window: VecDeque<f64>,
    window_len: usize,
    arrival_rng: ChaCha8Rng,
    service_rng: ChaCha8Rng,
    provisioning_rng: ChaCha8Rng,
    interarrival: Exp<f64>,
    service: Option<Exp<f64>>,

    arrivals: u64,
    completions: u64,
    second_completions: usize,
    second_rt_sum: f64,
    post_completions: u64,
    post_rt_sum: f64,
    ready_area: f64,
    last_ready_change: f64,
    series: Vec<SecondSample>,
}

impl Simulation {
    fn new(cfg: SimulationConfig) -> Self {
        let ps = cfg.workload.is_processor_sharing();
        let initial = cfg.initial_replicas;
        let service = match cfg.workload.distribution() {
            ServiceDistribution::Exponential => Some(Exp::new(1.0 / cfg.workload.mean_service_s()).unwrap()),
            ServiceDistribution::Deterministic => None,
        };
        Self {
            queue: EventQueue::default(),
            containers: (0..initial).map(|_| Container::new(ps)).collect(),
            ready: (0..initial).collect(),
            ordered: initial,
            generation: 0,
            window: VecDeque::with_capacity(cfg.autoscaler.window_len() + 1),
            window_len: cfg.autoscaler.window_len(),
            arrival_rng: substream(cfg.seed, ARRIVAL_STREAM),
            service_rng: substream(cfg.seed, SERVICE_STREAM),
            provisioning_rng: substream(cfg.seed, PROVISIONING_STREAM),
            interarrival: Exp::new(cfg.lambda).unwrap(),
            service,
            arrivals: 0,
            completions: 0,
            second_completions: 0,
            second_rt_sum: 0.0,
            post_completions: 0,
            post_rt_sum: 0.0,
            ready_area: 0.0,
            last_ready_change: 0.0,
            series: Vec::with_capacity(libm::ceil(cfg.duration_s) as usize),
            cfg,
        }
    }

    fn run(mut self) -> SimulationReport {
        let first_arrival = self.interarrival.sample(&mut self.arrival_rng);
        self.queue.push(first_arrival, Event::Arrival);
        self.queue.push(1.0, Event::Monitor);
        self.queue.push(self.cfg.autoscaler.t_eva_s, Event::Evaluation);

        let end = self.cfg.duration_s;
        while self.queue.peek_time().is_some_and(|t| t <= end) {
            let (now, event) = self.queue.pop().unwrap();
            match event {
                Event::Arrival => self.on_arrival(now),
                Event::Departure { container, arrived } => {
                    self.containers[container].in_flight -= 1;
                    self.record_completion(now, arrived);
                }
                Event::SharedDeparture { container, version } => self.on_shared_departure(now, container, version),
                Event::Monitor => self.on_monitor(now),
                Event::Evaluation => self.on_evaluation(now),
                Event::Provisioning { generation } => self.on_provisioning(now, generation),
            }
        }
        self.accumulate_ready(end);
        self.finish()
    }

    fn service_time(&mut self) -> f64 {
        match &self.service {
            Some(exp) => exp.sample(&mut self.service_rng),
            None => self.cfg.workload.mean_service_s(),
        }
    }

    fn on_arrival(&mut self, now: f64) {
        self.arrivals += 1;
        // Least in-flight; `ready` is sorted so ties go to the lowest id.
        let target = *self
            .ready
            .iter()
            .min_by_key(|&&id| self.containers[id].in_flight)
            .expect("at least one ready container");
        let demand = self.service_time();
        let c = &mut self.containers[target];
        c.in_flight += 1;
        c.arrivals_this_second += 1;
        match c.shared.as_mut() {
            None => self.queue.push(
                now + demand,
                Event::Departure {
                    container: target,
                    arrived: now,
                },
            ),
            Some(server) => {
                server.advance(now);
                server.jobs.push((now, demand));
                let wait = server.next_completion().unwrap();
                let version = server.version;
                self.queue.push(
                    now + wait,
                    Event::SharedDeparture {
                        container: target,
                        version,
                    },
                );
            }
        }
        let gap = self.interarrival.sample(&mut self.arrival_rng);
        self.queue.push(now + gap, Event::Arrival);
    }

    fn on_shared_departure(&mut self, now: f64, container: usize, version: u64) {
        let c = &mut self.containers[container];
        let server = c
            .shared
            .as_mut()
            .expect("shared departure on infinite-server container");
        if server.version != version {
            return;
        }
        server.advance(now);
        let arrived = server.complete().expect("departure from idle server");
        c.in_flight -= 1;
        if let Some(wait) = server.next_completion() {
            let version = server.version;
            self.queue
                .push(now + wait, Event::SharedDeparture { container, version });
        }
        self.record_completion(now, arrived);
    }

    fn record_completion(&mut self, now: f64, arrived: f64) {
        let rt = now - arrived;
        self.completions += 1;
        self.second_completions += 1;
        self.second_rt_sum += rt;
        if now > self.cfg.warmup_s {
            self.post_completions += 1;
            self.post_rt_sum += rt;
        }
    }

    fn on_monitor(&mut self, now: f64) {
        let n = self.ready.len() as f64;
        let total: usize = match self.cfg.autoscaler.metric_kind {
            MetricKind::Cc => self.ready.iter().map(|&id| self.containers[id].in_flight).sum(),
            MetricKind::Rps => self
                .ready
                .iter()
                .map(|&id| self.containers[id].arrivals_this_second)
                .sum(),
        };
        for c in &mut self.containers {
            c.arrivals_this_second = 0;
        }
        let sample = total as f64 / n;
        self.window.push_back(sample);
        if self.window.len() > self.window_len {
            self.window.pop_front();
        }
        let mean_rt = (self.second_completions > 0).then(|| self.second_rt_sum / self.second_completions as f64);
        self.series.push(SecondSample {
            t: now,
            ready: self.ready.len(),
            ordered: self.ordered,
            sample,
            observed_value: self.observed_value(),
            completions: self.second_completions,
            mean_response_time_s: mean_rt,
        });
        self.second_completions = 0;
        self.second_rt_sum = 0.0;
        self.queue.push(now + 1.0, Event::Monitor);
    }

    fn observed_value(&self) -> f64 {
        if self.window.is_empty() {
            0.0
        } else {
            self.window.iter().sum::<f64>() / self.window.len() as f64
        }
    }

    fn on_evaluation(&mut self, now: f64) {
        let a = &self.cfg.autoscaler;
        let raw = libm::ceil(self.observed_value() / a.target_value);
        let order = if raw < 1.0 { 1 } else { (raw as usize).min(a.n_max) };
        if order != self.ordered {
            self.ordered = order;
            self.reschedule_provisioning(now);
        }
        self.queue.push(now + self.cfg.autoscaler.t_eva_s, Event::Evaluation);
    }

    /// Schedules the next ready-count change toward the order. Pending steps
    /// are invalidated; exponential delays make the restart memoryless.
    fn reschedule_provisioning(&mut self, now: f64) {
        self.generation += 1;
        let ready = self.ready.len();
        let rate = if ready < self.ordered {
            (self.ordered - ready) as f64 * self.cfg.autoscaler.mu_pro
        } else if ready > self.ordered {
            (ready - self.ordered) as f64 * self.cfg.autoscaler.mu_dep
        } else {
            return;
        };
        let delay = Exp::new(rate).unwrap().sample(&mut self.provisioning_rng);
        self.queue.push(
            now + delay,
            Event::Provisioning {
                generation: self.generation,
            },
        );
    }

    fn on_provisioning(&mut self, now: f64, generation: u64) {
        if generation != self.generation {
            return;
        }
        self.accumulate_ready(now);
        let ready = self.ready.len();
        if ready < self.ordered {
            let id = self.containers.len();
            self.containers
                .push(Container::new(self.cfg.workload.is_processor_sharing()));
            self.ready.push(id);
        } else if ready > self.ordered {
            // Graceful: the newest ready container stops receiving traffic and
            // finishes what it holds.
            self.ready.pop();
        }
        self.reschedule_provisioning(now);
    }

    fn accumulate_ready(&mut self, now: f64) {
        let from = self.last_ready_change.max(self.cfg.warmup_s);
        if now > from {
            self.ready_area += (now - from) * self.ready.len() as f64;
        }
        self.last_ready_change = now;
    }

    fn finish(self) -> SimulationReport {
        let warmup = self.cfg.warmup_s;
        let post: Vec<&SecondSample> = self.series.iter().filter(|s| s.t > warmup).collect();
        let ticks = post.len().max(1) as f64;
        let in_flight: usize = self.containers.iter().map(|c| c.in_flight).sum();
        SimulationReport {
            lambda: self.cfg.lambda,
            warmup_s: warmup,
            duration_s: self.cfg.duration_s,
            seed: self.cfg.seed,
            avg_replica_count: self.ready_area / (self.cfg.duration_s - warmup),
            avg_concurrency: post.iter().map(|s| s.observed_value).sum::<f64>() / ticks,
            avg_sampled_metric: post.iter().map(|s| s.sample).sum::<f64>() / ticks,
            avg_response_time_s: if self.post_completions > 0 {
                self.post_rt_sum / self.post_completions as f64
            } else {
                0.0
            },
            completed_requests: self.post_completions,
            arrivals: self.arrivals,
            completions: self.completions,
            in_flight_at_end: in_flight as u64,
            series: self.series,
        }
    }
}

/// Runs one simulation. Identical configurations (including the seed) give
/// identical reports.
pub fn simulate(cfg: &SimulationConfig) -> Result<SimulationReport> {
    cfg.validate()?;
    Ok(Simulation::new(*cfg).run())
}
