use alloc::vec::Vec;

/// Processor-sharing bookkeeping: remaining work of each job in service.
#[derive(Debug, Default)]
pub(crate) struct SharedServer {
    /// `(arrival time, remaining work in seconds)`.
    pub(crate) jobs: Vec<(f64, f64)>,
    last_update: f64,
    pub(crate) version: u64,
}

impl SharedServer {
    /// Drains the work done since the last update; each job gets `1/n` of the server.
    pub(crate) fn advance(&mut self, now: f64) {
        let n = self.jobs.len();
        if n > 0 {
            let served = (now - self.last_update) / n as f64;
            for job in &mut self.jobs {
                job.1 -= served;
            }
        }
        self.last_update = now;
    }

    /// Time until the next completion if nothing else changes, bumping the version.
    pub(crate) fn next_completion(&mut self) -> Option<f64> {
        self.version += 1;
        let n = self.jobs.len();
        self.jobs
            .iter()
            .map(|j| j.1.max(0.0))
            .min_by(f64::total_cmp)
            .map(|w| w * n as f64)
    }

    /// Removes and returns the arrival time of the job closest to completion.
    pub(crate) fn complete(&mut self) -> Option<f64> {
        let idx = (0..self.jobs.len()).min_by(|&a, &b| self.jobs[a].1.total_cmp(&self.jobs[b].1))?;
        Some(self.jobs.swap_remove(idx).0)
    }
}

#[derive(Debug)]
pub(crate) struct Container {
    pub(crate) in_flight: usize,
    /// Arrivals since the last monitor tick (RPS metric).
    pub(crate) arrivals_this_second: usize,
    pub(crate) shared: Option<SharedServer>,
}

impl Container {
    pub(crate) fn new(processor_sharing: bool) -> Self {
        Self {
            in_flight: 0,
            arrivals_this_second: 0,
            shared: processor_sharing.then(SharedServer::default),
        }
    }
}
