// Self-contained invariant checks shared by the `validate` CLI command and
// the acceptance suite: actuation-field geometry, force-gradient oracle,
// nearest-point brute force, controller degeneracy and SLERP properties.
#pragma once

#include <functional>
#include <string>
#include <vector>

namespace capsim::checks {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;  // worst-case numbers, sample counts
};

struct CheckOptions {
    uint64_t seed = 20240601;
    /// Test hook: flips the sign of the analytic dipole force inside the
    /// gradient check, which must then fail.
    bool mutate_dipole_force_sign = false;
};

CheckResult check_field_rotation(const CheckOptions& opts, int samples = 1000);
CheckResult check_force_gradient(const CheckOptions& opts, int samples = 1000);
CheckResult check_nearest_point_oracle(const CheckOptions& opts, int queries_per_path = 200,
                                       int grid = 100000);
CheckResult check_rmmpc_degeneracy(const CheckOptions& opts, int samples = 10);
CheckResult check_slerp(const CheckOptions& opts, int samples = 10000);

/// All checks, optionally filtered by substring match on the name.
std::vector<CheckResult> run_all(const CheckOptions& opts, const std::string& filter = "");

}  // namespace capsim::checks
