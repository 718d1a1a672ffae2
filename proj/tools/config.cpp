#include "config.hpp"

#include <initializer_list>
#include <set>

#include "ubot/io.hpp"

namespace ubot::cli {

namespace {

void check_keys(const nlohmann::json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
        if (!ok.contains(key)) {
            throw std::invalid_argument("config: unknown key '" + key + "' in " + section);
        }
    }
}

Vec2 vec2_of(const nlohmann::json& a, const std::string& what) {
    if (!a.is_array() || a.size() != 2) {
        throw std::invalid_argument("config: " + what + " must be a 2-element array");
    }
    return {a[0].get<double>(), a[1].get<double>()};
}

Mat2 mat2_of(const nlohmann::json& a, const std::string& what) {
    if (!a.is_array() || a.size() != 4) {
        throw std::invalid_argument("config: " + what + " must be a 4-element array (row-major)");
    }
    Mat2 m;
    m << a[0].get<double>(), a[1].get<double>(), a[2].get<double>(), a[3].get<double>();
    return m;
}

std::array<double, 3> arr3_of(const nlohmann::json& a, const std::string& what) {
    if (!a.is_array() || a.size() != 3) {
        throw std::invalid_argument("config: " + what + " must be a 3-element array");
    }
    return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

sim::AxisField axis_field_of(const nlohmann::json& j, const std::string& section) {
    check_keys(j, section, {"cos", "sin", "f_poly"});
    sim::AxisField f;
    if (j.contains("cos")) f.cos_coef = arr3_of(j["cos"], section + ".cos");
    if (j.contains("sin")) f.sin_coef = arr3_of(j["sin"], section + ".sin");
    if (j.contains("f_poly")) f.f_poly = arr3_of(j["f_poly"], section + ".f_poly");
    return f;
}

nlohmann::json axis_field_json(const sim::AxisField& f) {
    return {{"cos", f.cos_coef}, {"sin", f.sin_coef}, {"f_poly", f.f_poly}};
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
    check_keys(j, "top level",
               {"seed", "output_dir", "ground_truth", "sweep", "sysid", "gp", "mpc", "planner",
                "scenario"});
    RunConfig cfg;
    cfg.seed = j.value("seed", cfg.seed);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);

    if (j.contains("ground_truth")) {
        const auto& g = j["ground_truth"];
        check_keys(g, "ground_truth",
                   {"a0_true", "bias", "field_x", "field_y", "brownian_sigma", "seed"});
        cfg.ground_truth.a0_true = g.value("a0_true", cfg.ground_truth.a0_true);
        if (g.contains("bias")) cfg.ground_truth.bias = vec2_of(g["bias"], "ground_truth.bias");
        if (g.contains("field_x")) {
            cfg.ground_truth.field_x = axis_field_of(g["field_x"], "ground_truth.field_x");
        }
        if (g.contains("field_y")) {
            cfg.ground_truth.field_y = axis_field_of(g["field_y"], "ground_truth.field_y");
        }
        cfg.ground_truth.brownian_sigma = g.value("brownian_sigma", cfg.ground_truth.brownian_sigma);
        cfg.ground_truth.seed = g.value("seed", cfg.ground_truth.seed);
    }

    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        check_keys(s, "sweep", {"f_max", "f_step", "alpha_step_deg", "dwell_steps", "dt"});
        cfg.sweep.f_max = s.value("f_max", cfg.sweep.f_max);
        cfg.sweep.f_step = s.value("f_step", cfg.sweep.f_step);
        cfg.sweep.alpha_step_deg = s.value("alpha_step_deg", cfg.sweep.alpha_step_deg);
        cfg.sweep.dwell_steps = s.value("dwell_steps", cfg.sweep.dwell_steps);
        cfg.sweep_dt = s.value("dt", cfg.sweep_dt);
    }

    if (j.contains("sysid")) {
        const auto& s = j["sysid"];
        check_keys(s, "sysid",
                   {"cutoff_hz", "trim_samples", "split_seed", "max_train_points",
                    "search_subsample"});
        cfg.sysid.cutoff_hz = s.value("cutoff_hz", cfg.sysid.cutoff_hz);
        cfg.sysid.trim_samples = s.value("trim_samples", cfg.sysid.trim_samples);
        cfg.sysid.split_seed = s.value("split_seed", cfg.sysid.split_seed);
        cfg.sysid.max_train_points = s.value("max_train_points", cfg.sysid.max_train_points);
        cfg.sysid.search_subsample = s.value("search_subsample", cfg.sysid.search_subsample);
    }

    if (j.contains("gp")) {
        const auto& g = j["gp"];
        check_keys(g, "gp",
                   {"scale_c_min", "scale_c_max", "length_scale_min", "length_scale_max",
                    "noise_var_min", "noise_var_max", "restarts", "sweeps", "seed"});
        auto& sp = cfg.gp_search;
        sp.scale_c_min = g.value("scale_c_min", sp.scale_c_min);
        sp.scale_c_max = g.value("scale_c_max", sp.scale_c_max);
        sp.length_scale_min = g.value("length_scale_min", sp.length_scale_min);
        sp.length_scale_max = g.value("length_scale_max", sp.length_scale_max);
        sp.noise_var_min = g.value("noise_var_min", sp.noise_var_min);
        sp.noise_var_max = g.value("noise_var_max", sp.noise_var_max);
        sp.restarts = g.value("restarts", sp.restarts);
        sp.sweeps = g.value("sweeps", sp.sweeps);
        sp.seed = g.value("seed", sp.seed);
    }

    if (j.contains("mpc")) {
        const auto& m = j["mpc"];
        check_keys(m, "mpc",
                   {"Q", "R", "horizon_T", "dt", "u_min", "u_max", "solver_tol", "max_iters"});
        if (m.contains("Q")) cfg.mpc.Q = mat2_of(m["Q"], "mpc.Q");
        if (m.contains("R")) cfg.mpc.R = mat2_of(m["R"], "mpc.R");
        cfg.mpc.horizon_T = m.value("horizon_T", cfg.mpc.horizon_T);
        cfg.mpc.dt = m.value("dt", cfg.mpc.dt);
        if (m.contains("u_min")) cfg.mpc.u_min = vec2_of(m["u_min"], "mpc.u_min");
        if (m.contains("u_max")) cfg.mpc.u_max = vec2_of(m["u_max"], "mpc.u_max");
        cfg.mpc.solver_tol = m.value("solver_tol", cfg.mpc.solver_tol);
        cfg.mpc.max_iters = m.value("max_iters", cfg.mpc.max_iters);
        cfg.mpc.validate();
    }

    if (j.contains("planner")) {
        const auto& p = j["planner"];
        check_keys(p, "planner",
                   {"max_iters", "steer_step", "goal_radius", "rewire_radius_const", "goal_bias",
                    "seed"});
        cfg.planner.max_iters = p.value("max_iters", cfg.planner.max_iters);
        cfg.planner.steer_step = p.value("steer_step", cfg.planner.steer_step);
        cfg.planner.goal_radius = p.value("goal_radius", cfg.planner.goal_radius);
        cfg.planner.rewire_radius_const =
            p.value("rewire_radius_const", cfg.planner.rewire_radius_const);
        cfg.planner.goal_bias = p.value("goal_bias", cfg.planner.goal_bias);
        cfg.planner.seed = p.value("seed", cfg.planner.seed);
        cfg.planner.validate();
    }

    if (j.contains("scenario")) {
        const auto& s = j["scenario"];
        check_keys(s, "scenario",
                   {"kind", "duration", "radius", "angular_speed", "use_gp", "dt", "start",
                    "f_nominal"});
        cfg.path_f_nominal = s.value("f_nominal", cfg.path_f_nominal);
        const std::string kind = s.value("kind", std::string("circle"));
        if (kind == "circle") {
            cfg.scenario.kind = sim::ScenarioKind::circle;
        } else if (kind == "planner_path") {
            cfg.scenario.kind = sim::ScenarioKind::planner_path;
        } else if (kind == "custom") {
            cfg.scenario.kind = sim::ScenarioKind::custom;
        } else {
            throw std::invalid_argument("config: scenario.kind must be circle|planner_path|custom");
        }
        cfg.scenario.duration = s.value("duration", cfg.scenario.duration);
        cfg.scenario.radius = s.value("radius", cfg.scenario.radius);
        cfg.scenario.angular_speed = s.value("angular_speed", cfg.scenario.angular_speed);
        cfg.scenario.use_gp = s.value("use_gp", cfg.scenario.use_gp);
        if (s.contains("start")) cfg.scenario.start = vec2_of(s["start"], "scenario.start");
        if (s.contains("dt")) {
            const double sdt = s["dt"].get<double>();
            if (std::abs(sdt - cfg.mpc.dt) > 1e-12) {
                throw std::invalid_argument("config: scenario.dt does not match mpc.dt");
            }
        }
    }

    cfg.scenario.controller = cfg.mpc;
    cfg.scenario.ground_truth = cfg.ground_truth;
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    return run_config_from_json(nlohmann::json::parse(io::read_text_file(path)));
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    j["ground_truth"] = {{"a0_true", cfg.ground_truth.a0_true},
                         {"bias", {cfg.ground_truth.bias.x(), cfg.ground_truth.bias.y()}},
                         {"field_x", axis_field_json(cfg.ground_truth.field_x)},
                         {"field_y", axis_field_json(cfg.ground_truth.field_y)},
                         {"brownian_sigma", cfg.ground_truth.brownian_sigma},
                         {"seed", cfg.ground_truth.seed}};
    j["sweep"] = {{"f_max", cfg.sweep.f_max},
                  {"f_step", cfg.sweep.f_step},
                  {"alpha_step_deg", cfg.sweep.alpha_step_deg},
                  {"dwell_steps", cfg.sweep.dwell_steps},
                  {"dt", cfg.sweep_dt}};
    j["sysid"] = {{"cutoff_hz", cfg.sysid.cutoff_hz},
                  {"trim_samples", cfg.sysid.trim_samples},
                  {"split_seed", cfg.sysid.split_seed},
                  {"max_train_points", cfg.sysid.max_train_points},
                  {"search_subsample", cfg.sysid.search_subsample}};
    j["gp"] = {{"scale_c_min", cfg.gp_search.scale_c_min},
               {"scale_c_max", cfg.gp_search.scale_c_max},
               {"length_scale_min", cfg.gp_search.length_scale_min},
               {"length_scale_max", cfg.gp_search.length_scale_max},
               {"noise_var_min", cfg.gp_search.noise_var_min},
               {"noise_var_max", cfg.gp_search.noise_var_max},
               {"restarts", cfg.gp_search.restarts},
               {"sweeps", cfg.gp_search.sweeps},
               {"seed", cfg.gp_search.seed}};
    j["mpc"] = {{"Q", {cfg.mpc.Q(0, 0), cfg.mpc.Q(0, 1), cfg.mpc.Q(1, 0), cfg.mpc.Q(1, 1)}},
                {"R", {cfg.mpc.R(0, 0), cfg.mpc.R(0, 1), cfg.mpc.R(1, 0), cfg.mpc.R(1, 1)}},
                {"horizon_T", cfg.mpc.horizon_T},
                {"dt", cfg.mpc.dt},
                {"u_min", {cfg.mpc.u_min.x(), cfg.mpc.u_min.y()}},
                {"u_max", {cfg.mpc.u_max.x(), cfg.mpc.u_max.y()}},
                {"solver_tol", cfg.mpc.solver_tol},
                {"max_iters", cfg.mpc.max_iters}};
    j["planner"] = {{"max_iters", cfg.planner.max_iters},
                    {"steer_step", cfg.planner.steer_step},
                    {"goal_radius", cfg.planner.goal_radius},
                    {"rewire_radius_const", cfg.planner.rewire_radius_const},
                    {"goal_bias", cfg.planner.goal_bias},
                    {"seed", cfg.planner.seed}};
    const char* kind = cfg.scenario.kind == sim::ScenarioKind::circle        ? "circle"
                       : cfg.scenario.kind == sim::ScenarioKind::planner_path ? "planner_path"
                                                                              : "custom";
    j["scenario"] = {{"kind", kind},
                     {"duration", cfg.scenario.duration},
                     {"radius", cfg.scenario.radius},
                     {"angular_speed", cfg.scenario.angular_speed},
                     {"use_gp", cfg.scenario.use_gp},
                     {"dt", cfg.mpc.dt},
                     {"f_nominal", cfg.path_f_nominal}};
    if (cfg.scenario.start) {
        j["scenario"]["start"] = {cfg.scenario.start->x(), cfg.scenario.start->y()};
    }
    return j;
}

}  // namespace ubot::cli
