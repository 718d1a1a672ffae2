#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ubot/dynamics.hpp"
#include "ubot/gp.hpp"
#include "ubot/io.hpp"
#include "ubot/mpc.hpp"
#include "ubot/planner.hpp"
#include "ubot/sim.hpp"
#include "ubot/sysid.hpp"

namespace py = pybind11;
using namespace ubot;

namespace {

const gp::TrainedGP* gp_or_null(const py::object& obj) {
    return obj.is_none() ? nullptr : obj.cast<const gp::TrainedGP*>();
}

MatX2 log_column(const sim::TrajectoryLog& log, Vec2 sim::LogRecord::*field) {
    MatX2 out(static_cast<Eigen::Index>(log.records.size()), 2);
    for (std::size_t i = 0; i < log.records.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = (log.records[i].*field).transpose();
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "GP-learned disturbance rejection with MPC for rolling microrobots";
    m.attr("__version__") = "0.1.0";

    py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefiniteError");
    py::register_exception<NoPathFound>(m, "NoPathFoundError");

    // gp
    py::class_<gp::KernelParams>(m, "KernelParams")
        .def(py::init<>())
        .def(py::init([](double scale_c, VecX length_scales, double noise_var) {
                 gp::KernelParams p;
                 p.scale_c = scale_c;
                 p.length_scales = std::move(length_scales);
                 p.noise_var = noise_var;
                 return p;
             }),
             py::arg("scale_c"), py::arg("length_scales"), py::arg("noise_var"))
        .def_readwrite("scale_c", &gp::KernelParams::scale_c)
        .def_readwrite("length_scales", &gp::KernelParams::length_scales)
        .def_readwrite("noise_var", &gp::KernelParams::noise_var);

    py::class_<gp::GPPrediction>(m, "GPPrediction")
        .def_readonly("mean", &gp::GPPrediction::mean)
        .def_readonly("variance", &gp::GPPrediction::variance);

    py::class_<gp::TrainedGP>(m, "TrainedGP")
        .def_readonly("inputs", &gp::TrainedGP::inputs)
        .def_readonly("weights", &gp::TrainedGP::weights)
        .def_readonly("params", &gp::TrainedGP::params)
        .def_readonly("y_mean", &gp::TrainedGP::y_mean)
        .def_readonly("x_mean", &gp::TrainedGP::x_mean)
        .def_readonly("x_scale", &gp::TrainedGP::x_scale)
        .def("predict", &gp::predict, py::arg("x_star"));

    py::class_<gp::SearchSpace>(m, "SearchSpace")
        .def(py::init<>())
        .def_readwrite("scale_c_min", &gp::SearchSpace::scale_c_min)
        .def_readwrite("scale_c_max", &gp::SearchSpace::scale_c_max)
        .def_readwrite("length_scale_min", &gp::SearchSpace::length_scale_min)
        .def_readwrite("length_scale_max", &gp::SearchSpace::length_scale_max)
        .def_readwrite("noise_var_min", &gp::SearchSpace::noise_var_min)
        .def_readwrite("noise_var_max", &gp::SearchSpace::noise_var_max)
        .def_readwrite("restarts", &gp::SearchSpace::restarts)
        .def_readwrite("sweeps", &gp::SearchSpace::sweeps)
        .def_readwrite("seed", &gp::SearchSpace::seed);

    m.def("kernel_eval", &gp::kernel_eval, py::arg("x"), py::arg("x_prime"), py::arg("params"));
    m.def("gram_matrix", &gp::gram_matrix, py::arg("X"), py::arg("params"), py::arg("add_noise"));
    m.def("fit", &gp::fit, py::arg("X"), py::arg("y"), py::arg("params"));
    m.def("predict", &gp::predict, py::arg("gp"), py::arg("x_star"));
    m.def("log_marginal_likelihood", &gp::log_marginal_likelihood, py::arg("X"), py::arg("y"),
          py::arg("params"));
    m.def("optimize_hyperparameters", &gp::optimize_hyperparameters, py::arg("X"), py::arg("y"),
          py::arg("space"));
    m.def("gp_to_json", &gp::to_json, py::arg("gp"));
    m.def("gp_from_json", &gp::from_json, py::arg("text"));

    // dynamics
    py::class_<dynamics::PolarControl>(m, "PolarControl")
        .def(py::init([](double freq, double heading) {
                 return dynamics::PolarControl{freq, heading};
             }),
             py::arg("freq"), py::arg("heading"))
        .def_readwrite("freq", &dynamics::PolarControl::freq)
        .def_readwrite("heading", &dynamics::PolarControl::heading);

    py::class_<dynamics::ModelParams>(m, "ModelParams")
        .def(py::init([](double a0, double dt) { return dynamics::ModelParams{a0, dt}; }),
             py::arg("a0"), py::arg("dt"))
        .def_readwrite("a0", &dynamics::ModelParams::a0)
        .def_readwrite("dt", &dynamics::ModelParams::dt);

    m.def("polar_to_u", &dynamics::polar_to_u, py::arg("pc"));
    m.def("u_to_polar", &dynamics::u_to_polar, py::arg("u"));
    m.def("step", &dynamics::step, py::arg("p"), py::arg("u"), py::arg("disturbance"),
          py::arg("params"));

    // sysid
    py::class_<sysid::RawTrajectory>(m, "RawTrajectory")
        .def(py::init<>())
        .def(py::init([](VecX times, MatX2 positions, MatX2 commands) {
                 sysid::RawTrajectory t;
                 t.times = std::move(times);
                 t.positions = std::move(positions);
                 t.commands = std::move(commands);
                 t.validate();
                 return t;
             }),
             py::arg("times"), py::arg("positions"), py::arg("commands"))
        .def_readwrite("times", &sysid::RawTrajectory::times)
        .def_readwrite("positions", &sysid::RawTrajectory::positions)
        .def_readwrite("commands", &sysid::RawTrajectory::commands);

    py::class_<sysid::VelocityDataset>(m, "VelocityDataset")
        .def(py::init<>())
        .def_readwrite("inputs", &sysid::VelocityDataset::inputs)
        .def_readwrite("controls_u", &sysid::VelocityDataset::controls_u)
        .def_readwrite("velocities", &sysid::VelocityDataset::velocities);

    py::class_<sysid::LinearFit>(m, "LinearFit")
        .def_readonly("a0x", &sysid::LinearFit::a0x)
        .def_readonly("a0y", &sysid::LinearFit::a0y)
        .def_readonly("dcx", &sysid::LinearFit::dcx)
        .def_readonly("dcy", &sysid::LinearFit::dcy)
        .def_readonly("r2x", &sysid::LinearFit::r2x)
        .def_readonly("r2y", &sysid::LinearFit::r2y);

    py::class_<sysid::ResidualDataset>(m, "ResidualDataset")
        .def(py::init<>())
        .def_readwrite("inputs", &sysid::ResidualDataset::inputs)
        .def_readwrite("residuals_x", &sysid::ResidualDataset::residuals_x)
        .def_readwrite("residuals_y", &sysid::ResidualDataset::residuals_y);

    py::class_<sysid::MAEAxisReport>(m, "MAEAxisReport")
        .def_readonly("mae_abs", &sysid::MAEAxisReport::mae_abs)
        .def_readonly("mae_pct", &sysid::MAEAxisReport::mae_pct)
        .def_readonly("n_train", &sysid::MAEAxisReport::n_train)
        .def_readonly("n_test", &sysid::MAEAxisReport::n_test)
        .def_readonly("seed", &sysid::MAEAxisReport::seed);

    py::class_<sysid::MAEReport>(m, "MAEReport")
        .def_readonly("x", &sysid::MAEReport::x)
        .def_readonly("y", &sysid::MAEReport::y);

    py::class_<sysid::TrainOptions>(m, "TrainOptions")
        .def(py::init<>())
        .def_readwrite("split_seed", &sysid::TrainOptions::split_seed)
        .def_readwrite("max_train_points", &sysid::TrainOptions::max_train_points)
        .def_readwrite("search_subsample", &sysid::TrainOptions::search_subsample)
        .def_readwrite("space", &sysid::TrainOptions::space);

    py::class_<sysid::DisturbanceModels>(m, "DisturbanceModels")
        .def_readonly("gp_x", &sysid::DisturbanceModels::gp_x)
        .def_readonly("gp_y", &sysid::DisturbanceModels::gp_y)
        .def_readonly("report", &sysid::DisturbanceModels::report);

    py::class_<sysid::PipelineOptions>(m, "PipelineOptions")
        .def(py::init<>())
        .def_readwrite("cutoff_hz", &sysid::PipelineOptions::cutoff_hz)
        .def_readwrite("trim_samples", &sysid::PipelineOptions::trim_samples)
        .def_readwrite("train", &sysid::PipelineOptions::train);

    py::class_<sysid::IdentificationResult>(m, "IdentificationResult")
        .def_readonly("linear_fit", &sysid::IdentificationResult::linear_fit)
        .def_readonly("a0_hat", &sysid::IdentificationResult::a0_hat)
        .def_readonly("dataset", &sysid::IdentificationResult::dataset)
        .def_readonly("residual_data", &sysid::IdentificationResult::residual_data)
        .def_readonly("models", &sysid::IdentificationResult::models);

    m.def("differentiate", &sysid::differentiate, py::arg("traj"));
    m.def("lowpass", &sysid::lowpass, py::arg("signal"), py::arg("cutoff_hz"),
          py::arg("sample_hz"));
    m.def("build_velocity_dataset", &sysid::build_velocity_dataset, py::arg("traj"),
          py::arg("velocities"), py::arg("trim_samples") = 1);
    m.def("fit_linear", &sysid::fit_linear, py::arg("data"));
    m.def("effective_radius", &sysid::effective_radius, py::arg("fit"));
    m.def("residuals", &sysid::residuals, py::arg("data"), py::arg("a0_hat"));
    m.def(
        "train_disturbance_models",
        [](const sysid::ResidualDataset& res, const sysid::TrainOptions& opts) {
            return sysid::train_disturbance_models(res, opts);
        },
        py::arg("res"), py::arg("opts"));
    m.def("identify", &sysid::identify, py::arg("traj"), py::arg("opts"));

    // mpc
    py::class_<mpc::MPCConfig>(m, "MPCConfig")
        .def(py::init<>())
        .def_readwrite("Q", &mpc::MPCConfig::Q)
        .def_readwrite("R", &mpc::MPCConfig::R)
        .def_readwrite("horizon_T", &mpc::MPCConfig::horizon_T)
        .def_readwrite("dt", &mpc::MPCConfig::dt)
        .def_readwrite("u_min", &mpc::MPCConfig::u_min)
        .def_readwrite("u_max", &mpc::MPCConfig::u_max)
        .def_readwrite("solver_tol", &mpc::MPCConfig::solver_tol)
        .def_readwrite("max_iters", &mpc::MPCConfig::max_iters);

    py::class_<mpc::QPProblem>(m, "QPProblem")
        .def_readonly("hessian", &mpc::QPProblem::hessian)
        .def_readonly("gradient", &mpc::QPProblem::gradient)
        .def_readonly("lower", &mpc::QPProblem::lower)
        .def_readonly("upper", &mpc::QPProblem::upper)
        .def_readonly("constant", &mpc::QPProblem::constant);

    py::class_<mpc::ControlSequence>(m, "ControlSequence")
        .def_readonly("controls", &mpc::ControlSequence::controls)
        .def_readonly("predicted_positions", &mpc::ControlSequence::predicted_positions)
        .def_readonly("objective", &mpc::ControlSequence::objective)
        .def_readonly("converged", &mpc::ControlSequence::converged)
        .def_readonly("iterations", &mpc::ControlSequence::iterations);

    m.def("build_qp", &mpc::build_qp, py::arg("p0"), py::arg("ref"), py::arg("d_hat"),
          py::arg("a0_hat"), py::arg("cfg"));
    m.def("solve_qp", &mpc::solve_qp, py::arg("qp"), py::arg("cfg"));
    m.def("reference_window", &mpc::reference_window, py::arg("full_ref"), py::arg("step_index"),
          py::arg("T"));
    m.def(
        "mpc_step",
        [](const Vec2& p0, const MatX2& full_ref, int step_index, const py::object& gp_x,
           const py::object& gp_y, double a0_hat, const mpc::MPCConfig& cfg, const Vec2& u_prev) {
            mpc::StepDiagnostics diag;
            const Vec2 u = mpc::mpc_step(p0, full_ref, step_index, gp_or_null(gp_x),
                                         gp_or_null(gp_y), a0_hat, cfg, u_prev, &diag);
            return py::make_tuple(u, diag);
        },
        py::arg("p0"), py::arg("full_ref"), py::arg("step_index"), py::arg("gp_x"),
        py::arg("gp_y"), py::arg("a0_hat"), py::arg("cfg"), py::arg("u_prev"));

    py::class_<mpc::StepDiagnostics>(m, "StepDiagnostics")
        .def_readonly("d_hat", &mpc::StepDiagnostics::d_hat)
        .def_readonly("objective", &mpc::StepDiagnostics::objective)
        .def_readonly("converged", &mpc::StepDiagnostics::converged)
        .def_readonly("iterations", &mpc::StepDiagnostics::iterations)
        .def_readonly("predicted_positions", &mpc::StepDiagnostics::predicted_positions);

    // planner
    py::class_<planner::Circle>(m, "Circle")
        .def(py::init([](const Vec2& center, double radius) {
                 return planner::Circle{center, radius};
             }),
             py::arg("center"), py::arg("radius"))
        .def_readwrite("center", &planner::Circle::center)
        .def_readwrite("radius", &planner::Circle::radius);

    py::class_<planner::World>(m, "World")
        .def(py::init<>())
        .def_readwrite("lower", &planner::World::lower)
        .def_readwrite("upper", &planner::World::upper)
        .def_readwrite("obstacles", &planner::World::obstacles)
        .def_readwrite("clearance", &planner::World::clearance);

    py::class_<planner::PlannerConfig>(m, "PlannerConfig")
        .def(py::init<>())
        .def_readwrite("max_iters", &planner::PlannerConfig::max_iters)
        .def_readwrite("steer_step", &planner::PlannerConfig::steer_step)
        .def_readwrite("goal_radius", &planner::PlannerConfig::goal_radius)
        .def_readwrite("rewire_radius_const", &planner::PlannerConfig::rewire_radius_const)
        .def_readwrite("goal_bias", &planner::PlannerConfig::goal_bias)
        .def_readwrite("seed", &planner::PlannerConfig::seed);

    py::class_<planner::Path>(m, "Path")
        .def(py::init<>())
        .def_readwrite("waypoints", &planner::Path::waypoints)
        .def_readwrite("cost", &planner::Path::cost);

    m.def("segment_free", &planner::segment_free, py::arg("p1"), py::arg("p2"), py::arg("world"));
    m.def(
        "plan",
        [](const Vec2& start, const Vec2& goal, const planner::World& world,
           const planner::PlannerConfig& cfg) { return planner::plan(start, goal, world, cfg); },
        py::arg("start"), py::arg("goal"), py::arg("world"), py::arg("cfg"));
    m.def("resample_path", &planner::resample_path, py::arg("path"), py::arg("spacing"));
    m.def("world_from_json", &planner::world_from_json, py::arg("text"));
    m.def("world_to_json", &planner::world_to_json, py::arg("world"));

    // sim
    py::class_<sim::AxisField>(m, "AxisField")
        .def(py::init<>())
        .def_readwrite("cos_coef", &sim::AxisField::cos_coef)
        .def_readwrite("sin_coef", &sim::AxisField::sin_coef)
        .def_readwrite("f_poly", &sim::AxisField::f_poly);

    py::class_<sim::GroundTruthModel>(m, "GroundTruthModel")
        .def(py::init<>())
        .def_readwrite("a0_true", &sim::GroundTruthModel::a0_true)
        .def_readwrite("bias", &sim::GroundTruthModel::bias)
        .def_readwrite("field_x", &sim::GroundTruthModel::field_x)
        .def_readwrite("field_y", &sim::GroundTruthModel::field_y)
        .def_readwrite("brownian_sigma", &sim::GroundTruthModel::brownian_sigma)
        .def_readwrite("seed", &sim::GroundTruthModel::seed);

    py::class_<sim::SweepConfig>(m, "SweepConfig")
        .def(py::init<>())
        .def_readwrite("f_max", &sim::SweepConfig::f_max)
        .def_readwrite("f_step", &sim::SweepConfig::f_step)
        .def_readwrite("alpha_step_deg", &sim::SweepConfig::alpha_step_deg)
        .def_readwrite("dwell_steps", &sim::SweepConfig::dwell_steps)
        .def("grid_size", &sim::SweepConfig::grid_size);

    py::enum_<sim::ScenarioKind>(m, "ScenarioKind")
        .value("circle", sim::ScenarioKind::circle)
        .value("planner_path", sim::ScenarioKind::planner_path)
        .value("custom", sim::ScenarioKind::custom);

    py::class_<sim::LogRecord>(m, "LogRecord")
        .def_readonly("t", &sim::LogRecord::t)
        .def_readonly("ref", &sim::LogRecord::ref)
        .def_readonly("pos", &sim::LogRecord::pos)
        .def_readonly("u", &sim::LogRecord::u)
        .def_readonly("d_hat", &sim::LogRecord::d_hat)
        .def_readonly("d_true", &sim::LogRecord::d_true)
        .def_readonly("objective", &sim::LogRecord::objective)
        .def_readonly("converged", &sim::LogRecord::converged);

    py::class_<sim::TrajectoryLog>(m, "TrajectoryLog")
        .def_readonly("dt", &sim::TrajectoryLog::dt)
        .def_readonly("records", &sim::TrajectoryLog::records)
        .def("positions", [](const sim::TrajectoryLog& l) { return log_column(l, &sim::LogRecord::pos); })
        .def("references", [](const sim::TrajectoryLog& l) { return log_column(l, &sim::LogRecord::ref); })
        .def("controls", [](const sim::TrajectoryLog& l) { return log_column(l, &sim::LogRecord::u); });

    py::class_<sim::ScenarioConfig>(m, "ScenarioConfig")
        .def(py::init<>())
        .def_readwrite("kind", &sim::ScenarioConfig::kind)
        .def_readwrite("duration", &sim::ScenarioConfig::duration)
        .def_readwrite("radius", &sim::ScenarioConfig::radius)
        .def_readwrite("angular_speed", &sim::ScenarioConfig::angular_speed)
        .def_readwrite("waypoints", &sim::ScenarioConfig::waypoints)
        .def_readwrite("start", &sim::ScenarioConfig::start)
        .def_readwrite("use_gp", &sim::ScenarioConfig::use_gp)
        .def_readwrite("controller", &sim::ScenarioConfig::controller)
        .def_readwrite("ground_truth", &sim::ScenarioConfig::ground_truth);

    py::class_<sim::Metrics>(m, "Metrics")
        .def_readonly("rms_error", &sim::Metrics::rms_error)
        .def_readonly("max_error", &sim::Metrics::max_error)
        .def_readonly("mean_abs_dhat_error", &sim::Metrics::mean_abs_dhat_error);

    m.def("eval_disturbance", &sim::eval_disturbance, py::arg("model"), py::arg("alpha"),
          py::arg("f"));
    m.def("generate_training_run", &sim::generate_training_run, py::arg("model"), py::arg("sweep"),
          py::arg("dt"), py::arg("seed"));
    m.def(
        "simulate_closed_loop",
        [](const sim::ScenarioConfig& scenario, double a0_hat, const py::object& gp_x,
           const py::object& gp_y, std::uint64_t seed) {
            return sim::simulate_closed_loop(scenario, a0_hat, gp_or_null(gp_x), gp_or_null(gp_y),
                                             seed);
        },
        py::arg("scenario"), py::arg("a0_hat"), py::arg("gp_x"), py::arg("gp_y"), py::arg("seed"));
    m.def("circle_reference", &sim::circle_reference, py::arg("radius"), py::arg("angular_speed"),
          py::arg("dt"), py::arg("duration"));
    m.def("metrics", &sim::metrics, py::arg("log"));
}
