#include "ubot/svg.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ubot/io.hpp"

namespace ubot::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 40.0;

struct Frame {
    double xmin, xmax, ymin, ymax;
    double width, height, y_offset;

    double sx(double x) const {
        return kMargin + (x - xmin) / (xmax - xmin) * (width - 2 * kMargin);
    }
    // SVG y grows downward.
    double sy(double y) const {
        return y_offset + height - kMargin - (y - ymin) / (ymax - ymin) * (height - 2 * kMargin);
    }
};

void expand(double& lo, double& hi) {
    if (hi - lo < 1e-9) {
        lo -= 1.0;
        hi += 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
}

std::string fmt(double v) { return io::format_double(v); }

void polyline(std::ostream& os, const Frame& fr, const std::vector<Vec2>& pts,
              const std::string& stroke, bool dashed) {
    os << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\"";
    if (dashed) os << " stroke-dasharray=\"6 4\"";
    os << " points=\"";
    for (const auto& p : pts) os << fmt(fr.sx(p.x())) << ',' << fmt(fr.sy(p.y())) << ' ';
    os << "\"/>\n";
}

void axes(std::ostream& os, const Frame& fr, const std::string& xlabel,
          const std::string& ylabel) {
    os << "<rect x=\"" << fmt(kMargin) << "\" y=\"" << fmt(fr.y_offset + kMargin) << "\" width=\""
       << fmt(fr.width - 2 * kMargin) << "\" height=\"" << fmt(fr.height - 2 * kMargin)
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(fr.width / 2) << "\" y=\"" << fmt(fr.y_offset + fr.height - 8)
       << "\" font-size=\"12\" text-anchor=\"middle\">" << xlabel << "</text>\n";
    os << "<text x=\"14\" y=\"" << fmt(fr.y_offset + fr.height / 2)
       << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
       << fmt(fr.y_offset + fr.height / 2) << ")\">" << ylabel << "</text>\n";
}

}  // namespace

void write_xy_overlay(const std::filesystem::path& file, const sim::TrajectoryLog& log,
                      const planner::World* world) {
    std::vector<Vec2> ref, act;
    ref.reserve(log.records.size());
    act.reserve(log.records.size());
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& r : log.records) {
        ref.push_back(r.ref);
        act.push_back(r.pos);
        for (const Vec2& p : {r.ref, r.pos}) {
            xmin = std::min(xmin, p.x());
            xmax = std::max(xmax, p.x());
            ymin = std::min(ymin, p.y());
            ymax = std::max(ymax, p.y());
        }
    }
    if (world != nullptr) {
        for (const auto& ob : world->obstacles) {
            xmin = std::min(xmin, ob.center.x() - ob.radius);
            xmax = std::max(xmax, ob.center.x() + ob.radius);
            ymin = std::min(ymin, ob.center.y() - ob.radius);
            ymax = std::max(ymax, ob.center.y() + ob.radius);
        }
    }
    expand(xmin, xmax);
    expand(ymin, ymax);

    Frame fr{xmin, xmax, ymin, ymax, kWidth, kHeight, 0.0};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    if (world != nullptr) {
        for (const auto& ob : world->obstacles) {
            const double rx = fr.sx(ob.center.x() + ob.radius) - fr.sx(ob.center.x());
            os << "<circle cx=\"" << fmt(fr.sx(ob.center.x())) << "\" cy=\""
               << fmt(fr.sy(ob.center.y())) << "\" r=\"" << fmt(rx)
               << "\" fill=\"lightgray\" stroke=\"gray\"/>\n";
        }
    }
    polyline(os, fr, ref, "gray", true);
    polyline(os, fr, act, "steelblue", false);
    axes(os, fr, "x (um)", "y (um)");
    os << "</svg>\n";
    io::write_text_file(file, os.str());
}

void write_time_traces(const std::filesystem::path& file, const sim::TrajectoryLog& log) {
    const double panel_h = kHeight / 2.0;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";

    for (int axis = 0; axis < 2; ++axis) {
        double tmin = 1e300, tmax = -1e300, vmin = 1e300, vmax = -1e300;
        std::vector<Vec2> ref, act;
        for (const auto& r : log.records) {
            const double rv = axis == 0 ? r.ref.x() : r.ref.y();
            const double pv = axis == 0 ? r.pos.x() : r.pos.y();
            ref.emplace_back(r.t, rv);
            act.emplace_back(r.t, pv);
            tmin = std::min(tmin, r.t);
            tmax = std::max(tmax, r.t);
            vmin = std::min({vmin, rv, pv});
            vmax = std::max({vmax, rv, pv});
        }
        expand(tmin, tmax);
        expand(vmin, vmax);
        Frame fr{tmin, tmax, vmin, vmax, kWidth, panel_h, axis * panel_h};
        polyline(os, fr, ref, "gray", true);
        polyline(os, fr, act, "steelblue", false);
        axes(os, fr, "t (s)", axis == 0 ? "x (um)" : "y (um)");
    }
    os << "</svg>\n";
    io::write_text_file(file, os.str());
}

}  // namespace ubot::svg
