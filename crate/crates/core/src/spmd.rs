//! SPMD-style parallel map over a grid of blocks and threads.
//!
//! A launch covers `blocks * threads_per_block` logical lanes. Lane `i` runs
//! the kernel on element `i` only if `i < input.len()`; surplus lanes do no
//! work. Lanes are multiplexed onto `workers` OS threads in contiguous index
//! ranges, each worker owning a disjoint slice of the output, so the result
//! never depends on scheduling and no atomics are needed.

use std::ops::Range;
use std::thread;
use std::time::{Duration, Instant};

/// Upper bound on threads per block.
pub const MAX_THREADS_PER_BLOCK: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LaunchError<E> {
    #[error("grid too small: {lanes} lanes for {len} elements")]
    GridTooSmall { lanes: usize, len: usize },
    #[error("thread index {thread} out of range for block of {threads_per_block}")]
    ThreadOutOfRange {
        thread: usize,
        threads_per_block: usize,
    },
    #[error("kernel failed at element {index}: {source}")]
    Kernel { index: usize, source: E },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid launch config: {0}")]
pub struct ConfigError(pub String);

/// Grid shape plus the number of physical workers that execute it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LaunchConfig {
    blocks: usize,
    threads_per_block: usize,
    workers: usize,
}

pub fn default_workers() -> usize {
    thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

impl LaunchConfig {
    pub fn new(blocks: usize, threads_per_block: usize) -> Result<Self, ConfigError> {
        if blocks == 0 {
            return Err(ConfigError("blocks must be >= 1".into()));
        }
        if !(1..=MAX_THREADS_PER_BLOCK).contains(&threads_per_block) {
            return Err(ConfigError(format!(
                "threads per block must be in 1..={MAX_THREADS_PER_BLOCK}, got {threads_per_block}"
            )));
        }
        Ok(Self {
            blocks,
            threads_per_block,
            workers: default_workers(),
        })
    }

    /// Smallest grid of `threads_per_block`-wide blocks covering `len` elements.
    pub fn covering(len: usize, threads_per_block: usize) -> Result<Self, ConfigError> {
        Self::new(
            len.div_ceil(threads_per_block.max(1)).max(1),
            threads_per_block,
        )
    }

    /// Sets the physical worker count; zero is treated as one.
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn threads_per_block(&self) -> usize {
        self.threads_per_block
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn lanes(&self) -> usize {
        self.blocks * self.threads_per_block
    }
}

/// Wall-clock split of one launch, in the order the phases run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LaunchTiming {
    pub distribute: Duration,
    pub compute: Duration,
    pub gather: Duration,
    pub total: Duration,
}

/// Flat lane id for thread `thread` of block `block`.
pub fn global_index<E>(
    thread: usize,
    block: usize,
    threads_per_block: usize,
) -> Result<usize, LaunchError<E>> {
    if thread >= threads_per_block {
        return Err(LaunchError::ThreadOutOfRange {
            thread,
            threads_per_block,
        });
    }
    Ok(thread + threads_per_block * block)
}

/// Contiguous lane ranges handed to each worker. Ranges are disjoint, ordered
/// and together cover `0..config.lanes()`; empty ranges are dropped.
pub fn partition_lanes(config: &LaunchConfig) -> Vec<Range<usize>> {
    let lanes = config.lanes();
    let workers = config.workers.min(lanes).max(1);
    (0..workers)
        .map(|w| (w * lanes / workers)..((w + 1) * lanes / workers))
        .filter(|r| !r.is_empty())
        .collect()
}

/// One worker's share of a launch. Returns the outputs of its guarded lanes,
/// which are the elements starting at `out_start`.
fn run_lanes<T, R, C, E, F>(
    lanes: Range<usize>,
    tpb: usize,
    input: &[T],
    out_start: usize,
    kernel: &F,
    ctx: &C,
) -> Result<Vec<R>, LaunchError<E>>
where
    T: Copy,
    C: ?Sized,
    F: Fn(T, &C) -> Result<R, E>,
{
    let mut out = Vec::with_capacity(input.len().saturating_sub(out_start).min(lanes.len()));
    for lane in lanes {
        let (block, thread) = (lane / tpb, lane % tpb);
        let i = global_index(thread, block, tpb)?;
        if i < input.len() {
            debug_assert_eq!(i, out_start + out.len());
            let v =
                kernel(input[i], ctx).map_err(|source| LaunchError::Kernel { index: i, source })?;
            out.push(v);
        }
    }
    Ok(out)
}

/// Applies `kernel` to every element on the configured grid.
///
/// Output order is element order regardless of `workers`. If any kernel call
/// fails, the error with the lowest element index is returned.
pub fn launch_map<T, R, C, E, F>(
    config: &LaunchConfig,
    input: &[T],
    kernel: F,
    ctx: &C,
) -> Result<(Vec<R>, LaunchTiming), LaunchError<E>>
where
    T: Copy + Sync,
    R: Send,
    C: Sync + ?Sized,
    E: Send,
    F: Fn(T, &C) -> Result<R, E> + Sync,
{
    let start = Instant::now();
    if config.lanes() < input.len() {
        return Err(LaunchError::GridTooSmall {
            lanes: config.lanes(),
            len: input.len(),
        });
    }
    let tpb = config.threads_per_block;
    let parts = partition_lanes(config);
    let distributed = Instant::now();

    let results: Vec<Result<Vec<R>, LaunchError<E>>> = if parts.len() == 1 {
        vec![run_lanes(parts[0].clone(), tpb, input, 0, &kernel, ctx)]
    } else {
        let kernel = &kernel;
        thread::scope(|scope| {
            let handles: Vec<_> = parts
                .iter()
                .map(|r| {
                    let r = r.clone();
                    let out_start = r.start.min(input.len());
                    scope.spawn(move || run_lanes(r, tpb, input, out_start, kernel, ctx))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
                .collect()
        })
    };
    let computed = Instant::now();

    let mut output = Vec::with_capacity(input.len());
    for part in results {
        // Parts are in lane order, so the first error seen is the lowest index.
        output.extend(part?);
    }
    let end = Instant::now();
    Ok((
        output,
        LaunchTiming {
            distribute: distributed - start,
            compute: computed - distributed,
            gather: end - computed,
            total: end - start,
        },
    ))
}

/// Single-lane baseline with the same output contract as [`launch_map`].
pub fn sequential_map<T, R, C, E, F>(
    input: &[T],
    kernel: F,
    ctx: &C,
) -> Result<(Vec<R>, LaunchTiming), LaunchError<E>>
where
    T: Copy,
    C: ?Sized,
    F: Fn(T, &C) -> Result<R, E>,
{
    let start = Instant::now();
    let output = input
        .iter()
        .enumerate()
        .map(|(index, &x)| kernel(x, ctx).map_err(|source| LaunchError::Kernel { index, source }))
        .collect::<Result<Vec<R>, _>>()?;
    let total = start.elapsed();
    Ok((
        output,
        LaunchTiming {
            compute: total,
            total,
            ..LaunchTiming::default()
        },
    ))
}
