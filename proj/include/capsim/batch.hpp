// Batch execution of independent simulation runs. Each run owns its RNG and
// controller state, so the parallel and serial paths produce identical
// results; the serial loop is kept as the reference implementation.
#pragma once

#include <vector>

#include "capsim/simloop.hpp"

namespace capsim::sim {

/// Serial reference: runs the configs one by one, in order.
std::vector<RunResult> run_batch_serial(const std::vector<SimConfig>& configs);

/// OpenMP-parallel over runs; falls back to the serial loop when built
/// without OpenMP. Output order matches the input order.
std::vector<RunResult> run_batch_parallel(const std::vector<SimConfig>& configs);

std::vector<RunResult> run_batch(const std::vector<SimConfig>& configs, bool parallel);

}  // namespace capsim::sim
