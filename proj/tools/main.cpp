#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "config.hpp"
#include "json.hpp"
#include "ubot/io.hpp"
#include "ubot/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitNoSolution = 3;
constexpr int kExitIo = 4;

struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw std::runtime_error("cannot create output directory: " + dir.string());
    }
}

void write_resolved_config(const ubot::cli::RunConfig& cfg, const fs::path& dir) {
    ubot::io::write_text_file(dir / "resolved_config.json",
                              ubot::cli::run_config_to_json(cfg).dump(2) + "\n");
}

int cmd_generate(const std::string& config_path, const std::string& out_override) {
    auto cfg = ubot::cli::load_run_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    const fs::path out(cfg.output_dir);
    ensure_dir(out);

    const auto traj =
        ubot::sim::generate_training_run(cfg.ground_truth, cfg.sweep, cfg.sweep_dt, cfg.seed);
    ubot::io::write_raw_trajectory_csv(out / "sweep.csv", traj);

    json summary;
    summary["rows"] = traj.times.size();
    summary["grid_cells"] = cfg.sweep.grid_size();
    summary["dwell_steps"] = cfg.sweep.dwell_steps;
    summary["dt"] = cfg.sweep_dt;
    summary["seed"] = cfg.seed;
    ubot::io::write_text_file(out / "generate_summary.json", summary.dump(2) + "\n");
    write_resolved_config(cfg, out);
    std::cout << "wrote " << (out / "sweep.csv").string() << " (" << traj.times.size()
              << " rows)\n";
    return kExitOk;
}

int cmd_sysid(const std::string& data_path, const std::string& config_path,
              const std::string& out_override) {
    auto cfg = ubot::cli::load_run_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    const fs::path out(cfg.output_dir);
    ensure_dir(out);

    const auto traj = ubot::io::read_raw_trajectory_csv(data_path);

    ubot::sysid::PipelineOptions opts;
    opts.cutoff_hz = cfg.sysid.cutoff_hz;
    opts.trim_samples = cfg.sysid.trim_samples;
    opts.train.split_seed = cfg.sysid.split_seed;
    opts.train.max_train_points = cfg.sysid.max_train_points;
    opts.train.search_subsample = cfg.sysid.search_subsample;
    opts.train.space = cfg.gp_search;

    const auto result = ubot::sysid::identify(traj, opts);

    ubot::io::ModelBundle bundle;
    bundle.a0_hat = result.a0_hat;
    bundle.linear_fit = result.linear_fit;
    bundle.gp_x = result.models.gp_x;
    bundle.gp_y = result.models.gp_y;
    ubot::io::write_text_file(out / "model.json", ubot::io::bundle_to_json(bundle) + "\n");
    ubot::io::write_text_file(out / "mae_report.json",
                              ubot::io::mae_report_to_json(result.models.report) + "\n");
    write_resolved_config(cfg, out);

    std::cout << "a0_hat = " << ubot::io::format_double(result.a0_hat)
              << "  (mae_pct x = " << ubot::io::format_double(result.models.report.x.mae_pct)
              << "%, y = " << ubot::io::format_double(result.models.report.y.mae_pct) << "%)\n";
    return kExitOk;
}

int cmd_plan(const std::string& world_path, const std::string& start_s, const std::string& goal_s,
             const std::string& config_path, const std::string& out_override) {
    auto cfg = ubot::cli::load_run_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    const fs::path out(cfg.output_dir);
    ensure_dir(out);

    const auto world = ubot::planner::world_from_json(ubot::io::read_text_file(world_path));

    auto parse_point = [](const std::string& s, const char* what) {
        const auto comma = s.find(',');
        if (comma == std::string::npos) {
            throw std::invalid_argument(std::string(what) + " must be 'x,y'");
        }
        return ubot::Vec2(std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1)));
    };
    const ubot::Vec2 start = parse_point(start_s, "--start");
    const ubot::Vec2 goal = parse_point(goal_s, "--goal");

    const auto path = ubot::planner::plan(start, goal, world, cfg.planner);
    ubot::io::write_path_csv(out / "path.csv", path.waypoints);

    json summary;
    summary["cost"] = path.cost;
    summary["waypoints"] = path.waypoints.rows();
    summary["straight_line"] = (goal - start).norm();
    summary["seed"] = cfg.planner.seed;
    ubot::io::write_text_file(out / "plan_summary.json", summary.dump(2) + "\n");
    write_resolved_config(cfg, out);
    std::cout << "path cost " << ubot::io::format_double(path.cost) << " with "
              << path.waypoints.rows() << " waypoints\n";
    return kExitOk;
}

struct TrackOutputs {
    ubot::sim::Metrics metrics;
    bool all_converged = true;
};

TrackOutputs run_track_once(const ubot::cli::RunConfig& cfg, const ubot::io::ModelBundle& bundle,
                            const ubot::planner::World* world, std::uint64_t seed,
                            const fs::path& out) {
    ensure_dir(out);
    const auto log = ubot::sim::simulate_closed_loop(cfg.scenario, bundle.a0_hat, &bundle.gp_x,
                                                     &bundle.gp_y, seed);

    ubot::io::write_trajectory_log_csv(out / "log.csv", log);
    ubot::svg::write_xy_overlay(out / "xy.svg", log, world);
    ubot::svg::write_time_traces(out / "traces.svg", log);

    std::ofstream diag(out / "diagnostics.jsonl");
    bool all_converged = true;
    for (std::size_t k = 0; k < log.records.size(); ++k) {
        const auto& r = log.records[k];
        ubot::mpc::StepDiagnostics d;
        d.d_hat = r.d_hat;
        d.objective = r.objective;
        d.converged = r.converged;
        diag << ubot::mpc::diagnostics_json_line(static_cast<int>(k), r.u, d) << '\n';
        all_converged = all_converged && r.converged;
    }

    const auto m = ubot::sim::metrics(log);
    json mj;
    mj["rms_error"] = m.rms_error;
    mj["max_error"] = m.max_error;
    mj["mean_abs_dhat_error"] = m.mean_abs_dhat_error;
    mj["steps"] = log.records.size();
    mj["seed"] = seed;
    mj["use_gp"] = cfg.scenario.use_gp;
    mj["all_converged"] = all_converged;
    ubot::io::write_text_file(out / "metrics.json", mj.dump(2) + "\n");
    return {m, all_converged};
}

int cmd_track(const std::string& model_path, const std::string& config_path,
              const std::string& reference_path, const std::string& world_path,
              const std::string& out_override, const std::string& seeds_range, bool baseline) {
    auto cfg = ubot::cli::load_run_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    const fs::path out(cfg.output_dir);
    ensure_dir(out);

    const auto bundle = ubot::io::bundle_from_json(ubot::io::read_text_file(model_path));

    ubot::planner::World world_storage;
    const ubot::planner::World* world = nullptr;
    if (!world_path.empty()) {
        world_storage = ubot::planner::world_from_json(ubot::io::read_text_file(world_path));
        world = &world_storage;
    }

    if (!reference_path.empty()) {
        ubot::planner::Path path;
        path.waypoints = ubot::io::read_path_csv(reference_path);
        path.cost = 0.0;
        for (Eigen::Index i = 1; i < path.waypoints.rows(); ++i) {
            path.cost += (path.waypoints.row(i) - path.waypoints.row(i - 1)).norm();
        }
        const double spacing = bundle.a0_hat * cfg.path_f_nominal * cfg.mpc.dt;
        cfg.scenario.kind = ubot::sim::ScenarioKind::planner_path;
        cfg.scenario.waypoints = ubot::planner::resample_path(path, spacing);
    }

    write_resolved_config(cfg, out);

    std::vector<std::uint64_t> seeds;
    if (seeds_range.empty()) {
        seeds.push_back(cfg.seed);
    } else {
        const auto dots = seeds_range.find("..");
        if (dots == std::string::npos) {
            seeds.push_back(std::stoull(seeds_range));
        } else {
            const auto lo = std::stoull(seeds_range.substr(0, dots));
            const auto hi = std::stoull(seeds_range.substr(dots + 2));
            if (hi < lo) throw std::invalid_argument("--seeds range must be ascending");
            for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
        }
    }

    bool all_converged = true;
    if (seeds.size() == 1) {
        auto res = run_track_once(cfg, bundle, world, seeds[0], out);
        all_converged = res.all_converged;
        std::cout << "rms_error " << ubot::io::format_double(res.metrics.rms_error) << " max_error "
                  << ubot::io::format_double(res.metrics.max_error) << '\n';
        if (baseline) {
            auto base_cfg = cfg;
            base_cfg.scenario.use_gp = false;
            auto base = run_track_once(base_cfg, bundle, world, seeds[0], out / "baseline");
            all_converged = all_converged && base.all_converged;
            std::cout << "baseline rms_error "
                      << ubot::io::format_double(base.metrics.rms_error) << '\n';
        }
    } else {
        std::vector<std::future<TrackOutputs>> jobs;
        jobs.reserve(seeds.size());
        for (const auto s : seeds) {
            jobs.push_back(std::async(std::launch::async, [&, s] {
                return run_track_once(cfg, bundle, world, s, out / ("seed_" + std::to_string(s)));
            }));
        }
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            const auto res = jobs[i].get();
            all_converged = all_converged && res.all_converged;
            std::cout << "seed " << seeds[i] << " rms_error "
                      << ubot::io::format_double(res.metrics.rms_error) << '\n';
        }
    }

    if (!all_converged) {
        throw NonConvergence("solver failed to converge on at least one control step");
    }
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_path) {
    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("cannot open for writing: " + out_path);
    os << "file,seed,use_gp,steps,rms_error,max_error,mean_abs_dhat_error,all_converged\n";
    for (const auto& in : inputs) {
        const json j = json::parse(ubot::io::read_text_file(in));
        os << in << ',' << j.value("seed", 0) << ',' << (j.value("use_gp", true) ? 1 : 0) << ','
           << j.value("steps", 0) << ','
           << ubot::io::format_double(j.value("rms_error", 0.0)) << ','
           << ubot::io::format_double(j.value("max_error", 0.0)) << ','
           << ubot::io::format_double(j.value("mean_abs_dhat_error", 0.0)) << ','
           << (j.value("all_converged", true) ? 1 : 0) << '\n';
    }
    std::cout << "wrote " << out_path << " (" << inputs.size() << " runs)\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GP-learned disturbance rejection with MPC for rolling microrobots"};
    app.require_subcommand(1);

    std::string config_path, out_dir, data_path, world_path, start_s, goal_s, model_path;
    std::string reference_path, seeds_range, report_out;
    std::vector<std::string> report_inputs;
    bool baseline = false;

    auto* gen = app.add_subcommand("generate", "Generate a training sweep dataset");
    gen->add_option("--config", config_path, "Run configuration JSON")->required();
    gen->add_option("--out", out_dir, "Output directory (overrides config)");

    auto* sys = app.add_subcommand("sysid", "Identify a0 and train disturbance GPs");
    sys->add_option("--data", data_path, "Training sweep CSV")->required();
    sys->add_option("--config", config_path, "Run configuration JSON")->required();
    sys->add_option("--out", out_dir, "Output directory (overrides config)");

    auto* pl = app.add_subcommand("plan", "Plan a path through a circular-obstacle world");
    pl->add_option("--world", world_path, "World JSON")->required();
    pl->add_option("--start", start_s, "Start point 'x,y'")->required();
    pl->add_option("--goal", goal_s, "Goal point 'x,y'")->required();
    pl->add_option("--config", config_path, "Run configuration JSON")->required();
    pl->add_option("--out", out_dir, "Output directory (overrides config)");

    auto* tr = app.add_subcommand("track", "Run the closed-loop tracking simulation");
    tr->add_option("--model", model_path, "Model bundle JSON from sysid")->required();
    tr->add_option("--config", config_path, "Run configuration JSON")->required();
    tr->add_option("--reference", reference_path, "Waypoint CSV (overrides circle scenario)");
    tr->add_option("--world", world_path, "World JSON, drawn in the plots");
    tr->add_option("--out", out_dir, "Output directory (overrides config)");
    tr->add_option("--seeds", seeds_range, "Seed or range 'a..b'; runs fan out in parallel");
    tr->add_flag("--baseline", baseline, "Also run the no-GP baseline");

    auto* rp = app.add_subcommand("report", "Aggregate metrics JSONs into a comparison CSV");
    rp->add_option("--out", report_out, "Output CSV")->required();
    rp->add_option("inputs", report_inputs, "metrics.json files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitBadInput;
    }

    try {
        if (gen->parsed()) return cmd_generate(config_path, out_dir);
        if (sys->parsed()) return cmd_sysid(data_path, config_path, out_dir);
        if (pl->parsed()) return cmd_plan(world_path, start_s, goal_s, config_path, out_dir);
        if (tr->parsed()) {
            return cmd_track(model_path, config_path, reference_path, world_path, out_dir,
                             seeds_range, baseline);
        }
        if (rp->parsed()) return cmd_report(report_inputs, report_out);
    } catch (const ubot::NoPathFound& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNoSolution;
    } catch (const NonConvergence& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNoSolution;
    } catch (const ubot::NotPositiveDefinite& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitOk;
}
