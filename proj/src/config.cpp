#include "capsim/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "capsim/errors.hpp"
#include "capsim/presets.hpp"

namespace capsim::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail_at(const std::string& name, const std::string& what) {
    throw ConfigError(name + ": " + what);
}

// Convert a byte offset from nlohmann's parse_error into line/column.
std::pair<int, int> line_col(const std::string& text, size_t byte) {
    int line = 1, col = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& where, const std::string& name) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key()))
            fail_at(name, "unknown key \"" + it.key() + "\" in " + where);
    }
}

double get_num(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
    return obj[key].get<double>();
}

Mat3 gain_matrix(const json& v, const char* key) {
    if (v.is_number()) return v.get<double>() * Mat3::Identity();
    if (v.is_array() && v.size() == 3) {
        Mat3 m = Mat3::Zero();
        for (int i = 0; i < 3; ++i) m(i, i) = v[i].get<double>();
        return m;
    }
    throw ConfigError(std::string(key) + " must be a scalar or a 3-element diagonal");
}

void parse_path_section(const json& sec, sim::SimConfig& cfg, const std::string& name) {
    reject_unknown(sec, {"preset", "key_points"}, "path", name);
    if (sec.contains("preset") == sec.contains("key_points"))
        fail_at(name, "path needs exactly one of \"preset\" or \"key_points\"");
    if (sec.contains("preset")) {
        cfg.key_points = presets::path_preset(sec["preset"].get<std::string>());
        return;
    }
    const auto& arr = sec["key_points"];
    if (!arr.is_array() || arr.size() < 2)
        fail_at(name, "key_points must be an array of at least 2 [x,y,z] triples");
    cfg.key_points.clear();
    for (const auto& p : arr) {
        if (!p.is_array() || p.size() != 3) fail_at(name, "each key point must be [x,y,z]");
        cfg.key_points.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    }
}

void parse_env_section(const json& sec, sim::SimConfig& cfg, const std::string& name) {
    reject_unknown(sec, {"preset", "rho_fric", "R_max", "rho_dist", "mmc_mode", "slow_period_s"},
                   "environment", name);
    if (sec.contains("preset"))
        cfg.environment = env::EnvironmentModel::preset(sec["preset"].get<std::string>());
    if (sec.contains("mmc_mode")) {
        const std::string mode = sec["mmc_mode"].get<std::string>();
        if (mode == "constant") cfg.environment.mmc_mode = env::MmcMode::constant;
        else if (mode == "slow_varying") cfg.environment.mmc_mode = env::MmcMode::slow_varying;
        else if (mode == "probabilistic") cfg.environment.mmc_mode = env::MmcMode::probabilistic;
        else fail_at(name, "mmc_mode must be constant|slow_varying|probabilistic");
    }
    cfg.environment.rho_fric = get_num(sec, "rho_fric", cfg.environment.rho_fric);
    cfg.environment.R_max = get_num(sec, "R_max", cfg.environment.R_max);
    cfg.environment.rho_dist = get_num(sec, "rho_dist", cfg.environment.rho_dist);
    cfg.environment.slow_period_s = get_num(sec, "slow_period_s", cfg.environment.slow_period_s);
    if (cfg.environment.rho_fric < 0 || cfg.environment.rho_dist < 0 ||
        cfg.environment.R_max < 1.0)
        fail_at(name, "environment requires rho_fric >= 0, rho_dist >= 0, R_max >= 1");
}

void parse_controller_section(const json& sec, sim::SimConfig& cfg, const std::string& name) {
    reject_unknown(sec, {"name", "params"}, "controller", name);
    if (!sec.contains("name")) fail_at(name, "controller needs a \"name\"");
    cfg.controller = sim::ControllerSpec::defaults(
        sim::controller_from_name(sec["name"].get<std::string>()));
    if (!sec.contains("params")) return;
    const auto& p = sec["params"];
    reject_unknown(p,
                   {"K_P", "K_D", "ac_rate", "ac_a0", "ac_a_max", "N", "W_x_pos", "W_x_vel",
                    "W_N_scale", "W_f", "f_min", "f_max", "scenario_R_max"},
                   "controller.params", name);
    if (p.contains("K_P")) cfg.controller.gains.K_P = gain_matrix(p["K_P"], "K_P");
    if (p.contains("K_D")) cfg.controller.gains.K_D = gain_matrix(p["K_D"], "K_D");
    cfg.controller.gains.validate();
    cfg.controller.ac.gains = cfg.controller.gains;
    cfg.controller.ac.rate = get_num(p, "ac_rate", cfg.controller.ac.rate);
    cfg.controller.ac.a0 = get_num(p, "ac_a0", cfg.controller.ac.a0);
    cfg.controller.ac.a_max = get_num(p, "ac_a_max", cfg.controller.ac.a_max);
    auto& mpc = cfg.controller.mpc;
    if (p.contains("N")) {
        mpc.N = p["N"].get<int>();
        if (mpc.N < 1) fail_at(name, "N must be >= 1");
    }
    const double wxp = get_num(p, "W_x_pos", mpc.W_x(0, 0));
    const double wxv = get_num(p, "W_x_vel", mpc.W_x(3, 3));
    mpc.W_x = Mat6::Zero();
    mpc.W_x.topLeftCorner<3, 3>() = wxp * Mat3::Identity();
    mpc.W_x.bottomRightCorner<3, 3>() = wxv * Mat3::Identity();
    mpc.W_N = get_num(p, "W_N_scale", 10.0) * mpc.W_x;
    mpc.W_f = get_num(p, "W_f", mpc.W_f(0, 0)) * Mat3::Identity();
    mpc.f_min = get_num(p, "f_min", mpc.f_min);
    mpc.f_max = get_num(p, "f_max", mpc.f_max);
    if (mpc.f_min > mpc.f_max) fail_at(name, "f_min must not exceed f_max");
    cfg.controller.scenario_R_max = get_num(p, "scenario_R_max", cfg.controller.scenario_R_max);
}

int parse_run_section(const json& sec, sim::SimConfig& cfg, const std::string& name) {
    reject_unknown(sec, {"V_c", "f_c", "seed", "trials", "max_duration_s"}, "run", name);
    cfg.V_c = get_num(sec, "V_c", cfg.V_c);
    cfg.f_c = get_num(sec, "f_c", cfg.f_c);
    cfg.max_duration_s = get_num(sec, "max_duration_s", cfg.max_duration_s);
    if (cfg.V_c <= 0 || cfg.f_c <= 0) fail_at(name, "run requires V_c > 0 and f_c > 0");
    if (sec.contains("seed")) cfg.seed = sec["seed"].get<uint64_t>();
    int trials = 1;
    if (sec.contains("trials")) {
        trials = sec["trials"].get<int>();
        if (trials < 1) fail_at(name, "trials must be >= 1");
    }
    return trials;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& name) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ConfigError(name + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": " + e.what());
    }
    if (!doc.is_object()) fail_at(name, "top level must be an object");
    reject_unknown(doc, {"path", "environment", "controller", "run"}, "scenario", name);
    if (!doc.contains("path")) fail_at(name, "missing \"path\" section");
    if (!doc.contains("controller")) fail_at(name, "missing \"controller\" section");

    Scenario sc;
    parse_path_section(doc["path"], sc.config, name);
    if (doc.contains("environment")) parse_env_section(doc["environment"], sc.config, name);
    parse_controller_section(doc["controller"], sc.config, name);
    if (doc.contains("run")) sc.trials = parse_run_section(doc["run"], sc.config, name);
    return sc;
}

Scenario load_scenario_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read scenario file: " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), file.filename().string());
}

TrialSummary summarize_trial(const sim::RunResult& result, int trial, uint64_t seed) {
    TrialSummary t;
    t.trial = trial;
    t.seed = seed;
    t.mean_pos_err_mm = 1e3 * result.mean_pos_err;
    t.max_pos_err_mm = 1e3 * result.max_pos_err;
    t.mean_ori_err_deg = result.mean_ori_err_deg;
    t.max_ori_err_deg = result.max_ori_err_deg;
    t.mean_speed_mm_s = 1e3 * result.mean_speed;
    t.completion_time_s = result.completion_time_s;
    t.completed = result.completed;
    t.diverged = result.diverged;
    return t;
}

SummaryReport SummaryReport::aggregate(std::vector<TrialSummary> trials) {
    SummaryReport r;
    r.trials = std::move(trials);
    if (r.trials.empty()) return r;
    const double n = static_cast<double>(r.trials.size());
    double sp = 0, so = 0, sv = 0, st = 0;
    for (const auto& t : r.trials) {
        sp += t.mean_pos_err_mm;
        so += t.mean_ori_err_deg;
        sv += t.mean_speed_mm_s;
        st += t.completion_time_s;
    }
    r.mean_pos_err_mm = sp / n;
    r.mean_ori_err_deg = so / n;
    r.mean_speed_mm_s = sv / n;
    r.mean_completion_time_s = st / n;
    double vp = 0, vo = 0;
    for (const auto& t : r.trials) {
        vp += (t.mean_pos_err_mm - r.mean_pos_err_mm) * (t.mean_pos_err_mm - r.mean_pos_err_mm);
        vo += (t.mean_ori_err_deg - r.mean_ori_err_deg) * (t.mean_ori_err_deg - r.mean_ori_err_deg);
    }
    r.std_pos_err_mm = std::sqrt(vp / n);
    r.std_ori_err_deg = std::sqrt(vo / n);
    return r;
}

namespace {

void put(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    out += buf;
}

}  // namespace

void write_steps_csv(const std::filesystem::path& file, const std::vector<sim::StepLog>& log) {
    std::string out;
    out.reserve(log.size() * 220 + 256);
    out += "t,px,py,pz,vx,vy,vz,hx,hy,hz,pdx,pdy,pdz,fx,fy,fz,d,alpha,beta,phase,R,pos_err,ori_err\n";
    for (const auto& r : log) {
        put(out, r.t);
        for (const Vec3* v : {&r.p_c, &r.v_c, &r.heading, &r.p_d, &r.f_d}) {
            for (int i = 0; i < 3; ++i) {
                out += ',';
                put(out, (*v)[i]);
            }
        }
        out += ',';
        put(out, r.d);
        out += ',';
        put(out, r.alpha_deg);
        out += ',';
        put(out, r.beta_deg);
        out += ',';
        out += std::to_string(r.phase);
        out += ',';
        put(out, r.R);
        out += ',';
        put(out, r.pos_err);
        out += ',';
        put(out, r.ori_err_deg);
        out += '\n';
    }
    std::ofstream f(file, std::ios::binary);
    if (!f) throw Error("cannot write " + file.string());
    f << out;
}

void write_summary_json(const std::filesystem::path& file, const SummaryReport& report) {
    json doc;
    doc["aggregate"] = {{"mean_pos_err_mm", report.mean_pos_err_mm},
                        {"std_pos_err_mm", report.std_pos_err_mm},
                        {"mean_ori_err_deg", report.mean_ori_err_deg},
                        {"std_ori_err_deg", report.std_ori_err_deg},
                        {"mean_speed_mm_s", report.mean_speed_mm_s},
                        {"mean_completion_time_s", report.mean_completion_time_s}};
    doc["trials"] = json::array();
    for (const auto& t : report.trials) {
        doc["trials"].push_back({{"trial", t.trial},
                                 {"seed", t.seed},
                                 {"mean_pos_err_mm", t.mean_pos_err_mm},
                                 {"max_pos_err_mm", t.max_pos_err_mm},
                                 {"mean_ori_err_deg", t.mean_ori_err_deg},
                                 {"max_ori_err_deg", t.max_ori_err_deg},
                                 {"mean_speed_mm_s", t.mean_speed_mm_s},
                                 {"completion_time_s", t.completion_time_s},
                                 {"completed", t.completed},
                                 {"diverged", t.diverged}});
    }
    std::ofstream f(file, std::ios::binary);
    if (!f) throw Error("cannot write " + file.string());
    f << doc.dump(2) << "\n";
}

}  // namespace capsim::cli
