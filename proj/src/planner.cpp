#include "ubot/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "json.hpp"

namespace ubot::planner {

void World::validate() const {
    if (!(upper.x() > lower.x()) || !(upper.y() > lower.y())) {
        throw std::invalid_argument("World: degenerate bounds");
    }
    for (const auto& ob : obstacles) {
        if (!(ob.radius > 0.0)) throw std::invalid_argument("World: obstacle radius must be > 0");
    }
    if (clearance < 0.0) throw std::invalid_argument("World: clearance must be >= 0");
}

bool World::point_free(const Vec2& p) const {
    if (p.x() < lower.x() || p.x() > upper.x() || p.y() < lower.y() || p.y() > upper.y()) {
        return false;
    }
    for (const auto& ob : obstacles) {
        if ((p - ob.center).norm() <= ob.radius + clearance) return false;
    }
    return true;
}

void PlannerConfig::validate() const {
    if (max_iters < 1 || !(steer_step > 0.0) || !(goal_radius > 0.0) ||
        !(rewire_radius_const > 0.0)) {
        throw std::invalid_argument("PlannerConfig: all parameters must be positive");
    }
    if (goal_bias < 0.0 || goal_bias > 1.0) {
        throw std::invalid_argument("PlannerConfig: goal_bias must be in [0, 1]");
    }
}

namespace {

double point_segment_distance(const Vec2& c, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) return (c - a).norm();
    const double t = std::clamp((c - a).dot(ab) / len2, 0.0, 1.0);
    return (c - (a + t * ab)).norm();
}

}  // namespace

bool segment_free(const Vec2& p1, const Vec2& p2, const World& world) {
    // The bounds rectangle is convex, so endpoint containment covers the
    // whole segment.
    auto in_bounds = [&](const Vec2& p) {
        return p.x() >= world.lower.x() && p.x() <= world.upper.x() && p.y() >= world.lower.y() &&
               p.y() <= world.upper.y();
    };
    if (!in_bounds(p1) || !in_bounds(p2)) return false;
    for (const auto& ob : world.obstacles) {
        if (point_segment_distance(ob.center, p1, p2) <= ob.radius + world.clearance) {
            return false;
        }
    }
    return true;
}

namespace {

struct Node {
    Vec2 pos;
    int parent;
    double edge_len;
    double cost; ///< total length from the root
    std::vector<int> children;
};

void propagate_cost(std::vector<Node>& nodes, int idx, double delta) {
    nodes[static_cast<std::size_t>(idx)].cost += delta;
    for (const int ch : nodes[static_cast<std::size_t>(idx)].children) {
        propagate_cost(nodes, ch, delta);
    }
}

}  // namespace

Path plan(const Vec2& start, const Vec2& goal, const World& world, const PlannerConfig& cfg,
          PlanTrace* trace) {
    world.validate();
    cfg.validate();

    std::vector<Node> nodes;
    nodes.push_back({start, -1, 0.0, 0.0, {}});

    std::vector<int> goal_nodes; ///< nodes with a free segment into the goal
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    if (trace != nullptr) trace->incumbent_costs.clear();

    auto incumbent = [&]() {
        double best = std::numeric_limits<double>::infinity();
        for (const int gi : goal_nodes) {
            const Node& nd = nodes[static_cast<std::size_t>(gi)];
            best = std::min(best, nd.cost + (goal - nd.pos).norm());
        }
        return best;
    };

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        Vec2 sample;
        if (unit(rng) < cfg.goal_bias) {
            sample = goal;
        } else {
            sample.x() = world.lower.x() + (world.upper.x() - world.lower.x()) * unit(rng);
            sample.y() = world.lower.y() + (world.upper.y() - world.lower.y()) * unit(rng);
        }

        int nearest = 0;
        double nearest_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double d2 = (nodes[i].pos - sample).squaredNorm();
            if (d2 < nearest_d2) {
                nearest_d2 = d2;
                nearest = static_cast<int>(i);
            }
        }

        const Vec2& from = nodes[static_cast<std::size_t>(nearest)].pos;
        Vec2 to = sample;
        const double dist = (sample - from).norm();
        if (dist < 1e-12) {
            if (trace != nullptr) trace->incumbent_costs.push_back(incumbent());
            continue;
        }
        if (dist > cfg.steer_step) to = from + (cfg.steer_step / dist) * (sample - from);

        if (!segment_free(from, to, world)) {
            if (trace != nullptr) trace->incumbent_costs.push_back(incumbent());
            continue;
        }

        const double n = static_cast<double>(nodes.size());
        const double radius =
            std::min(cfg.rewire_radius_const * std::sqrt(std::log(n) / n), cfg.steer_step * 4.0);

        // Parent choice: lowest cost-to-come among the nearest node and the
        // collision-free neighborhood.
        int parent = nearest;
        double parent_edge = (to - from).norm();
        double best_cost = nodes[static_cast<std::size_t>(nearest)].cost + parent_edge;
        std::vector<int> neighbors;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double d = (nodes[i].pos - to).norm();
            if (d <= radius) neighbors.push_back(static_cast<int>(i));
        }
        for (const int nb : neighbors) {
            if (nb == nearest) continue;
            const Node& cand = nodes[static_cast<std::size_t>(nb)];
            const double edge = (to - cand.pos).norm();
            if (cand.cost + edge < best_cost && segment_free(cand.pos, to, world)) {
                best_cost = cand.cost + edge;
                parent = nb;
                parent_edge = edge;
            }
        }

        const int new_idx = static_cast<int>(nodes.size());
        nodes.push_back({to, parent, parent_edge, best_cost, {}});
        nodes[static_cast<std::size_t>(parent)].children.push_back(new_idx);

        // Rewire the neighborhood through the new node when that shortens it.
        for (const int nb : neighbors) {
            if (nb == parent) continue;
            Node& other = nodes[static_cast<std::size_t>(nb)];
            const double edge = (other.pos - to).norm();
            const double through = best_cost + edge;
            if (through + 1e-12 < other.cost && segment_free(to, other.pos, world)) {
                auto& old_children = nodes[static_cast<std::size_t>(other.parent)].children;
                old_children.erase(std::find(old_children.begin(), old_children.end(), nb));
                const double delta = through - other.cost;
                other.parent = new_idx;
                other.edge_len = edge;
                nodes[static_cast<std::size_t>(new_idx)].children.push_back(nb);
                propagate_cost(nodes, nb, delta);
            }
        }

        if ((to - goal).norm() <= cfg.goal_radius && segment_free(to, goal, world)) {
            goal_nodes.push_back(new_idx);
        }

        if (trace != nullptr) trace->incumbent_costs.push_back(incumbent());
    }

    if (goal_nodes.empty()) {
        throw NoPathFound("plan: no path into the goal region after max_iters iterations");
    }

    int best = goal_nodes.front();
    double best_total = std::numeric_limits<double>::infinity();
    for (const int gi : goal_nodes) {
        const Node& nd = nodes[static_cast<std::size_t>(gi)];
        const double total = nd.cost + (goal - nd.pos).norm();
        if (total < best_total) {
            best_total = total;
            best = gi;
        }
    }

    std::vector<Vec2> rev;
    rev.push_back(goal);
    for (int i = best; i != -1; i = nodes[static_cast<std::size_t>(i)].parent) {
        rev.push_back(nodes[static_cast<std::size_t>(i)].pos);
    }

    Path path;
    path.waypoints.resize(static_cast<Eigen::Index>(rev.size()), 2);
    for (std::size_t i = 0; i < rev.size(); ++i) {
        path.waypoints.row(static_cast<Eigen::Index>(rev.size() - 1 - i)) = rev[i].transpose();
    }
    path.cost = best_total;
    return path;
}

MatX2 resample_path(const Path& path, double spacing) {
    if (!(spacing > 0.0)) throw std::invalid_argument("resample_path: spacing must be positive");
    const Eigen::Index m = path.waypoints.rows();
    if (m < 1) throw std::invalid_argument("resample_path: empty path");
    if (m == 1) return path.waypoints;

    VecX cum(m);
    cum[0] = 0.0;
    for (Eigen::Index i = 1; i < m; ++i) {
        cum[i] = cum[i - 1] + (path.waypoints.row(i) - path.waypoints.row(i - 1)).norm();
    }
    const double total = cum[m - 1];

    std::vector<Vec2> pts;
    Eigen::Index seg = 0;
    for (double s = 0.0; s < total - 1e-9 * std::max(1.0, total); s += spacing) {
        while (seg + 2 < m && cum[seg + 1] <= s) ++seg;
        const double seg_len = cum[seg + 1] - cum[seg];
        const double t = seg_len > 0.0 ? (s - cum[seg]) / seg_len : 0.0;
        pts.emplace_back(path.waypoints.row(seg).transpose() +
                         t * (path.waypoints.row(seg + 1) - path.waypoints.row(seg)).transpose());
    }
    pts.emplace_back(path.waypoints.row(m - 1).transpose());

    MatX2 out(static_cast<Eigen::Index>(pts.size()), 2);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
    }
    return out;
}

World world_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    for (const auto& [key, _] : j.items()) {
        if (key != "bounds" && key != "obstacles" && key != "clearance") {
            throw std::invalid_argument("World: unknown key '" + key + "'");
        }
    }
    World w;
    const auto& b = j.at("bounds");
    if (b.size() != 4) throw std::invalid_argument("World: bounds must be [xmin,ymin,xmax,ymax]");
    w.lower = {b[0].get<double>(), b[1].get<double>()};
    w.upper = {b[2].get<double>(), b[3].get<double>()};
    if (j.contains("obstacles")) {
        for (const auto& ob : j.at("obstacles")) {
            Circle c;
            c.center = {ob.at("c")[0].get<double>(), ob.at("c")[1].get<double>()};
            c.radius = ob.at("r").get<double>();
            w.obstacles.push_back(c);
        }
    }
    w.clearance = j.value("clearance", 0.0);
    w.validate();
    return w;
}

std::string world_to_json(const World& world) {
    nlohmann::json j;
    j["bounds"] = {world.lower.x(), world.lower.y(), world.upper.x(), world.upper.y()};
    j["obstacles"] = nlohmann::json::array();
    for (const auto& ob : world.obstacles) {
        j["obstacles"].push_back({{"c", {ob.center.x(), ob.center.y()}}, {"r", ob.radius}});
    }
    j["clearance"] = world.clearance;
    return j.dump();
}

}  // namespace ubot::planner
