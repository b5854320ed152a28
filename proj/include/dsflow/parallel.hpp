#pragma once

#include <cstddef>

namespace dsflow {

/// Worker count for per-node loops. Initialised from DSFLOW_NUM_THREADS
/// (default 1); set_worker_count overrides it for the process.
int worker_count();
void set_worker_count(int workers);

/// Loops shorter than this run serially regardless of the worker count.
inline constexpr std::size_t kParallelThreshold = 4096;

}  // namespace dsflow
