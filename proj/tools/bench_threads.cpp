// Benchmark of the OpenMP-parallel paths against their serial reference
// implementations: the batch runner and the shooting-solver Jacobian.
#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "capsim/batch.hpp"
#include "capsim/control.hpp"
#include "capsim/path.hpp"
#include "capsim/presets.hpp"
#include "capsim/simloop.hpp"

using namespace capsim;

namespace {

double wall_seconds(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; parallel paths fall back to serial\n");
#endif

    // Batch of independent closed-loop runs.
    std::vector<sim::SimConfig> batch;
    for (int k = 0; k < 8; ++k) {
        sim::SimConfig cfg;
        cfg.key_points = presets::path_preset("serpentine300");
        cfg.environment = env::EnvironmentModel::preset(k % 2 ? "env3" : "env1");
        cfg.controller = sim::ControllerSpec::defaults(k % 2 ? sim::ControllerType::ac
                                                             : sim::ControllerType::pd);
        cfg.seed = 10 + k;
        cfg.max_duration_s = 30.0;
        batch.push_back(cfg);
    }
    std::vector<sim::RunResult> serial_results, parallel_results;
    const double t_serial = wall_seconds([&] { serial_results = sim::run_batch_serial(batch); });
    const double t_parallel =
        wall_seconds([&] { parallel_results = sim::run_batch_parallel(batch); });
    bool identical = serial_results.size() == parallel_results.size();
    for (size_t i = 0; identical && i < serial_results.size(); ++i)
        identical = serial_results[i].mean_pos_err == parallel_results[i].mean_pos_err;
    std::printf("batch of %zu runs:        serial %6.2f s, parallel %6.2f s, speedup %.2fx, results %s\n",
                batch.size(), t_serial, t_parallel, t_serial / t_parallel,
                identical ? "identical" : "DIFFER");

    // Shooting-solver Jacobian (per-solve kernel).
    const path::SplinePath path(presets::path_preset("serpentine300"));
    ctrl::PlantParams plant;
    plant.rho_fric = 0.05;
    ctrl::MpcConfig cfg = ctrl::MpcConfig::defaults();
    const ctrl::ScenarioSet scen = ctrl::ScenarioSet::mmc_default(2.0);
    env::CapsuleState x;
    x.p = path.position(0.2) + Vec3(0.001, -0.002, 0.0005);
    x.v = Vec3(0.002, 0.001, 0);
    x.heading = path.tangent(0.2);
    const auto window = path::reference_sequence(path, x.p, cfg.N, 0.003, cfg.f_c);

    ctrl::MpcSolution serial_sol, parallel_sol;
    cfg.parallel_jacobian = false;
    const double t_s = wall_seconds([&] {
        for (int i = 0; i < 20; ++i) serial_sol = ctrl::rmmpc_solve(x, window, cfg, plant, scen);
    });
    cfg.parallel_jacobian = true;
    const double t_p = wall_seconds([&] {
        for (int i = 0; i < 20; ++i) parallel_sol = ctrl::rmmpc_solve(x, window, cfg, plant, scen);
    });
    std::printf("rmmpc solve x20:         serial %6.2f s, parallel %6.2f s, speedup %.2fx, results %s\n",
                t_s, t_p, t_s / t_p,
                (serial_sol.f_d - parallel_sol.f_d).norm() == 0.0 ? "identical" : "DIFFER");
    return 0;
}
