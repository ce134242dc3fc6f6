use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Seed plus number of independent substreams. Row `j` of any sampled set
/// belongs to stream `j mod streams`, so the output depends only on
/// `(seed, streams, rows)` and not on how many workers run the streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSpec {
    pub seed: u64,
    pub streams: usize,
}

impl RngSpec {
    pub fn new(seed: u64, streams: usize) -> Result<Self> {
        if streams == 0 {
            return Err(Error::DomainError(0.0));
        }
        Ok(Self { seed, streams })
    }

    /// Runs `draw` for every row `0..rows`, one RNG and one scratch state per
    /// stream, and returns the results in row order.
    pub(crate) fn map_rows<S, T, Init, Draw>(&self, rows: usize, init: Init, draw: Draw) -> Vec<T>
    where
        T: Send,
        Init: Fn() -> S + Sync,
        Draw: Fn(&mut ChaCha8Rng, &mut S, usize) -> T + Sync,
    {
        let streams = self.streams.min(rows.max(1));
        let per_stream: Vec<Vec<T>> = (0..streams)
            .into_par_iter()
            .map(|s| {
                let mut rng = stream_rng(self.seed, s as u64);
                let mut state = init();
                (s..rows)
                    .step_by(streams)
                    .map(|j| draw(&mut rng, &mut state, j))
                    .collect()
            })
            .collect();
        let mut iters: Vec<_> = per_stream.into_iter().map(Vec::into_iter).collect();
        (0..rows)
            .map(|j| iters[j % streams].next().expect("row assigned to stream"))
            .collect()
    }
}

impl Default for RngSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            streams: 16,
        }
    }
}

/// ChaCha8 keyed by the seed, on the stream selected by `stream`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
