#include "ubot/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "json.hpp"

namespace ubot::io {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double_or_throw(const std::string& tok, std::size_t line_no) {
    double v = 0.0;
    const char* begin = tok.data();
    const char* end = begin + tok.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": bad number '" +
                                    tok + "'");
    }
    if (!std::isfinite(v)) {
        throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": non-finite value");
    }
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
}

}  // namespace

void write_raw_trajectory_csv(const std::filesystem::path& file,
                              const sysid::RawTrajectory& traj) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot open for writing: " + file.string());
    os << "t,x,y,ux,uy\n";
    for (Eigen::Index i = 0; i < traj.times.size(); ++i) {
        os << format_double(traj.times[i]) << ',' << format_double(traj.positions(i, 0)) << ','
           << format_double(traj.positions(i, 1)) << ',' << format_double(traj.commands(i, 0))
           << ',' << format_double(traj.commands(i, 1)) << '\n';
    }
}

sysid::RawTrajectory read_raw_trajectory_csv(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw std::runtime_error("cannot open for reading: " + file.string());

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(is, line)) throw std::invalid_argument("CSV: empty file " + file.string());
    ++line_no;
    if (line != "t,x,y,ux,uy") {
        throw std::invalid_argument("CSV line 1: expected header 't,x,y,ux,uy'");
    }

    std::vector<std::array<double, 5>> rows;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto toks = split_csv_line(line);
        if (toks.size() != 5) {
            throw std::invalid_argument("CSV line " + std::to_string(line_no) +
                                        ": expected 5 fields, got " + std::to_string(toks.size()));
        }
        std::array<double, 5> row{};
        for (std::size_t c = 0; c < 5; ++c) row[c] = parse_double_or_throw(toks[c], line_no);
        if (!rows.empty() && !(row[0] > rows.back()[0])) {
            throw std::invalid_argument("CSV line " + std::to_string(line_no) +
                                        ": time not strictly increasing");
        }
        rows.push_back(row);
    }

    sysid::RawTrajectory traj;
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    traj.times.resize(n);
    traj.positions.resize(n, 2);
    traj.commands.resize(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        traj.times[i] = r[0];
        traj.positions(i, 0) = r[1];
        traj.positions(i, 1) = r[2];
        traj.commands(i, 0) = r[3];
        traj.commands(i, 1) = r[4];
    }
    return traj;
}

void write_trajectory_log_csv(const std::filesystem::path& file, const sim::TrajectoryLog& log) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot open for writing: " + file.string());
    os << "t,rx,ry,x,y,ux,uy,dhat_x,dhat_y,dtrue_x,dtrue_y,objective,converged\n";
    for (const auto& r : log.records) {
        os << format_double(r.t) << ',' << format_double(r.ref.x()) << ','
           << format_double(r.ref.y()) << ',' << format_double(r.pos.x()) << ','
           << format_double(r.pos.y()) << ',' << format_double(r.u.x()) << ','
           << format_double(r.u.y()) << ',' << format_double(r.d_hat.x()) << ','
           << format_double(r.d_hat.y()) << ',' << format_double(r.d_true.x()) << ','
           << format_double(r.d_true.y()) << ',' << format_double(r.objective) << ','
           << (r.converged ? 1 : 0) << '\n';
    }
}

void write_path_csv(const std::filesystem::path& file, const MatX2& waypoints) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot open for writing: " + file.string());
    os << "x,y\n";
    for (Eigen::Index i = 0; i < waypoints.rows(); ++i) {
        os << format_double(waypoints(i, 0)) << ',' << format_double(waypoints(i, 1)) << '\n';
    }
}

MatX2 read_path_csv(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw std::runtime_error("cannot open for reading: " + file.string());
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(is, line)) throw std::invalid_argument("CSV: empty file " + file.string());
    ++line_no;
    if (line != "x,y") throw std::invalid_argument("CSV line 1: expected header 'x,y'");

    std::vector<std::array<double, 2>> rows;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto toks = split_csv_line(line);
        if (toks.size() != 2) {
            throw std::invalid_argument("CSV line " + std::to_string(line_no) +
                                        ": expected 2 fields");
        }
        rows.push_back({parse_double_or_throw(toks[0], line_no),
                        parse_double_or_throw(toks[1], line_no)});
    }
    MatX2 out(static_cast<Eigen::Index>(rows.size()), 2);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out(static_cast<Eigen::Index>(i), 0) = rows[i][0];
        out(static_cast<Eigen::Index>(i), 1) = rows[i][1];
    }
    return out;
}

namespace {

nlohmann::json axis_report_json(const sysid::MAEAxisReport& r) {
    return {{"mae_abs", r.mae_abs}, {"mae_pct", r.mae_pct},     {"n_train", r.n_train},
            {"n_test", r.n_test},   {"seed", r.seed}};
}

}  // namespace

std::string mae_report_to_json(const sysid::MAEReport& report) {
    nlohmann::json j;
    j["x"] = axis_report_json(report.x);
    j["y"] = axis_report_json(report.y);
    return j.dump(2);
}

namespace {
constexpr int kBundleSchemaVersion = 1;
}

std::string bundle_to_json(const ModelBundle& bundle) {
    nlohmann::json j;
    j["schema_version"] = kBundleSchemaVersion;
    j["a0_hat"] = bundle.a0_hat;
    j["linear_fit"] = {{"a0x", bundle.linear_fit.a0x}, {"a0y", bundle.linear_fit.a0y},
                       {"dcx", bundle.linear_fit.dcx}, {"dcy", bundle.linear_fit.dcy},
                       {"r2x", bundle.linear_fit.r2x}, {"r2y", bundle.linear_fit.r2y}};
    j["gp_x"] = nlohmann::json::parse(gp::to_json(bundle.gp_x));
    j["gp_y"] = nlohmann::json::parse(gp::to_json(bundle.gp_y));
    return j.dump();
}

ModelBundle bundle_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("schema_version").get<int>() != kBundleSchemaVersion) {
        throw std::invalid_argument("ModelBundle: unsupported schema_version");
    }
    ModelBundle b;
    b.a0_hat = j.at("a0_hat").get<double>();
    const auto& lf = j.at("linear_fit");
    b.linear_fit.a0x = lf.at("a0x").get<double>();
    b.linear_fit.a0y = lf.at("a0y").get<double>();
    b.linear_fit.dcx = lf.at("dcx").get<double>();
    b.linear_fit.dcy = lf.at("dcy").get<double>();
    b.linear_fit.r2x = lf.at("r2x").get<double>();
    b.linear_fit.r2y = lf.at("r2y").get<double>();
    b.gp_x = gp::from_json(j.at("gp_x").dump());
    b.gp_y = gp::from_json(j.at("gp_y").dump());
    return b;
}

void write_text_file(const std::filesystem::path& file, const std::string& text) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot open for writing: " + file.string());
    os << text;
}

std::string read_text_file(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw std::runtime_error("cannot open for reading: " + file.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace ubot::io
