#include "capsim/batch.hpp"

namespace capsim::sim {

std::vector<RunResult> run_batch_serial(const std::vector<SimConfig>& configs) {
    std::vector<RunResult> out(configs.size());
    for (size_t i = 0; i < configs.size(); ++i) out[i] = run_simulation(configs[i]);
    return out;
}

std::vector<RunResult> run_batch_parallel(const std::vector<SimConfig>& configs) {
    std::vector<RunResult> out(configs.size());
    const int n = static_cast<int>(configs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int i = 0; i < n; ++i) out[i] = run_simulation(configs[i]);
    return out;
}

std::vector<RunResult> run_batch(const std::vector<SimConfig>& configs, bool parallel) {
    return parallel ? run_batch_parallel(configs) : run_batch_serial(configs);
}

}  // namespace capsim::sim
