// Scenario-file handling and machine-readable outputs: strict JSON parsing
// into SimConfig bundles, the fixed-schema steps.csv writer, and summary
// reports mirroring the experiment tables.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "capsim/simloop.hpp"

namespace capsim::cli {

struct Scenario {
    sim::SimConfig config;
    int trials = 1;
};

/// Parse a scenario document (JSON text). Unknown keys are rejected;
/// errors carry line/column diagnostics. `name` is used in messages.
Scenario parse_scenario(const std::string& text, const std::string& name = "<scenario>");

Scenario load_scenario_file(const std::filesystem::path& file);

/// One trial's summary numbers (errors in mm / deg / mm/s to match the
/// reporting units).
struct TrialSummary {
    int trial = 0;
    uint64_t seed = 0;
    double mean_pos_err_mm = 0.0, max_pos_err_mm = 0.0;
    double mean_ori_err_deg = 0.0, max_ori_err_deg = 0.0;
    double mean_speed_mm_s = 0.0;
    double completion_time_s = 0.0;
    bool completed = false, diverged = false;
};

struct SummaryReport {
    std::vector<TrialSummary> trials;
    double mean_pos_err_mm = 0.0, std_pos_err_mm = 0.0;
    double mean_ori_err_deg = 0.0, std_ori_err_deg = 0.0;
    double mean_speed_mm_s = 0.0;
    double mean_completion_time_s = 0.0;

    static SummaryReport aggregate(std::vector<TrialSummary> trials);
};

TrialSummary summarize_trial(const sim::RunResult& result, int trial, uint64_t seed);

/// Fixed-schema step log:
/// t,px,py,pz,vx,vy,vz,hx,hy,hz,pdx,pdy,pdz,fx,fy,fz,d,alpha,beta,phase,R,pos_err,ori_err
void write_steps_csv(const std::filesystem::path& file, const std::vector<sim::StepLog>& log);

void write_summary_json(const std::filesystem::path& file, const SummaryReport& report);

}  // namespace capsim::cli
