#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iecc/errors.hpp"
#include "iecc/raster.hpp"
#include "iecc/rng.hpp"

namespace iecc {

enum class Algorithm : std::uint8_t { kmeans = 0, kmeanspp = 1, fcm = 2, fcmpp = 3 };

inline const char* algorithm_name(Algorithm a) {
    switch (a) {
    case Algorithm::kmeans: return "kmeans";
    case Algorithm::kmeanspp: return "kmeanspp";
    case Algorithm::fcm: return "fcm";
    case Algorithm::fcmpp: return "fcmpp";
    }
    return "?";
}

inline std::optional<Algorithm> parse_algorithm(const std::string& name) {
    if (name == "kmeans") return Algorithm::kmeans;
    if (name == "kmeanspp") return Algorithm::kmeanspp;
    if (name == "fcm") return Algorithm::fcm;
    if (name == "fcmpp") return Algorithm::fcmpp;
    return std::nullopt;
}

inline bool uses_dsquared_seeding(Algorithm a) {
    return a == Algorithm::kmeanspp || a == Algorithm::fcmpp;
}

inline bool is_fuzzy(Algorithm a) { return a == Algorithm::fcm || a == Algorithm::fcmpp; }

struct Centroids {
    std::vector<PixelPoint> points;

    int k() const { return static_cast<int>(points.size()); }
};

struct ClusterConfig {
    Algorithm algorithm = Algorithm::kmeanspp;
    int k = 16;
    double fuzzifier = 2.0; // FCM only
    double tolerance = 1e-4;
    int max_iterations = 300;
    std::uint64_t seed = 0;
    int restarts = 1;
    // Iterate over unique points carrying multiplicity weights instead of the
    // raw sequence. Seeding always sees the raw sequence, so a fixed seed
    // draws the same initial centers on either path.
    bool aggregate_duplicates = false;
    // Fill ClusterOutcome::membership (FCM). Off by default: n*K doubles.
    bool keep_membership = false;

    void validate() const {
        if (k < 1) throw degenerate_input_error("cluster config: K must be >= 1");
        if (fuzzifier <= 1.0) throw degenerate_input_error("cluster config: fuzzifier must be > 1");
        if (tolerance <= 0.0) throw degenerate_input_error("cluster config: tolerance must be > 0");
        if (max_iterations < 1)
            throw degenerate_input_error("cluster config: max_iterations must be >= 1");
        if (restarts < 1) throw degenerate_input_error("cluster config: restarts must be >= 1");
    }
};

struct MembershipMatrix {
    std::vector<double> degrees; // n x k, row-major
    int k = 0;

    std::size_t rows() const { return k == 0 ? 0 : degrees.size() / std::size_t(k); }
    double at(std::size_t point, int cluster) const {
        return degrees[point * std::size_t(k) + std::size_t(cluster)];
    }
};

struct ClusterOutcome {
    Centroids centroids;
    std::vector<std::uint32_t> assignments;
    std::vector<double> objective_trace;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    MembershipMatrix membership; // FCM with keep_membership only
};

namespace detail {

struct PointKey {
    std::array<double, 3> c;
    auto operator<=>(const PointKey&) const = default;
};

inline PointKey key_of(const PixelPoint& p) {
    PointKey k{{0.0, 0.0, 0.0}};
    for (int i = 0; i < p.dim; ++i) k.c[std::size_t(i)] = p.coords[std::size_t(i)];
    return k;
}

// Points with multiplicity weights; origin maps raw index -> unique index.
struct WeightedSet {
    std::vector<PixelPoint> points;
    std::vector<double> weights;
    std::vector<std::uint32_t> origin;
};

inline WeightedSet aggregate_points(const std::vector<PixelPoint>& raw) {
    WeightedSet set;
    set.origin.resize(raw.size());
    std::map<PointKey, std::uint32_t> index;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        auto [it, inserted] = index.try_emplace(key_of(raw[i]),
                                                static_cast<std::uint32_t>(set.points.size()));
        if (inserted) {
            set.points.push_back(raw[i]);
            set.weights.push_back(0.0);
        }
        set.weights[it->second] += 1.0;
        set.origin[i] = it->second;
    }
    return set;
}

inline WeightedSet identity_set(const std::vector<PixelPoint>& raw) {
    WeightedSet set;
    set.points = raw;
    set.weights.assign(raw.size(), 1.0);
    set.origin.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) set.origin[i] = static_cast<std::uint32_t>(i);
    return set;
}

inline std::uint32_t nearest_centroid(const PixelPoint& p, const std::vector<PixelPoint>& centers) {
    std::uint32_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centers.size(); ++k) {
        const double d = squared_distance(p, centers[k]);
        if (d < best_d) { // ties keep the lowest index
            best_d = d;
            best = static_cast<std::uint32_t>(k);
        }
    }
    return best;
}

inline double max_displacement(const std::vector<PixelPoint>& a, const std::vector<PixelPoint>& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        worst = std::max(worst, std::sqrt(squared_distance(a[k], b[k])));
    return worst;
}

// Assign every point to its nearest centroid. Empty clusters are repaired by
// moving the centroid onto the point currently farthest from its own center,
// keeping K palette entries live, then reassigning.
inline std::vector<std::uint32_t> assign_with_repair(const WeightedSet& set,
                                                     std::vector<PixelPoint>& centers) {
    const int k = static_cast<int>(centers.size());
    std::vector<std::uint32_t> assign(set.points.size());
    std::vector<char> used_for_repair(set.points.size(), 0);
    for (int pass = 0; pass <= k; ++pass) {
        std::vector<char> populated(std::size_t(k), 0);
        for (std::size_t i = 0; i < set.points.size(); ++i) {
            assign[i] = nearest_centroid(set.points[i], centers);
            populated[assign[i]] = 1;
        }
        int empty = -1;
        for (int c = 0; c < k; ++c)
            if (!populated[std::size_t(c)]) { empty = c; break; }
        if (empty < 0) break;
        std::size_t farthest = set.points.size();
        double far_d = 0.0;
        for (std::size_t i = 0; i < set.points.size(); ++i) {
            if (used_for_repair[i]) continue;
            const double d = squared_distance(set.points[i], centers[assign[i]]);
            if (d > far_d) {
                far_d = d;
                farthest = i;
            }
        }
        if (farthest == set.points.size()) break; // all points sit on centroids already
        centers[std::size_t(empty)] = set.points[farthest];
        used_for_repair[farthest] = 1;
    }
    return assign;
}

inline double weighted_sse(const WeightedSet& set, const std::vector<std::uint32_t>& assign,
                           const std::vector<PixelPoint>& centers) {
    double sse = 0.0;
    for (std::size_t i = 0; i < set.points.size(); ++i)
        sse += set.weights[i] * squared_distance(set.points[i], centers[assign[i]]);
    return sse;
}

} // namespace detail

inline std::size_t count_distinct(const std::vector<PixelPoint>& points) {
    std::vector<detail::PointKey> keys;
    keys.reserve(points.size());
    for (const auto& p : points) keys.push_back(detail::key_of(p));
    std::sort(keys.begin(), keys.end());
    return std::size_t(std::unique(keys.begin(), keys.end()) - keys.begin());
}

inline void require_k_distinct(const std::vector<PixelPoint>& points, int k, const char* who) {
    if (points.empty()) throw degenerate_input_error(std::string(who) + ": no points");
    const std::size_t distinct = count_distinct(points);
    if (std::size_t(k) > distinct)
        throw degenerate_input_error(std::string(who) + ": K=" + std::to_string(k) +
                                     " exceeds distinct points=" + std::to_string(distinct));
}

// K distinct data points drawn uniformly without replacement.
inline Centroids seed_random(const std::vector<PixelPoint>& points, int k, rng::Engine& eng) {
    require_k_distinct(points, k, "seed_random");
    std::vector<std::uint32_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
    Centroids out;
    std::vector<detail::PointKey> seen;
    for (std::size_t i = 0; i < order.size() && out.k() < k; ++i) {
        const std::size_t j = i + rng::uniform_index(eng, order.size() - i);
        std::swap(order[i], order[j]);
        const auto key = detail::key_of(points[order[i]]);
        if (std::find(seen.begin(), seen.end(), key) == seen.end()) {
            seen.push_back(key);
            out.points.push_back(points[order[i]]);
        }
    }
    return out;
}

// D-squared sampling: first center uniform, then each next center drawn with
// probability proportional to the squared distance to the nearest chosen one.
inline Centroids seed_kmeanspp(const std::vector<PixelPoint>& points, int k, rng::Engine& eng) {
    require_k_distinct(points, k, "seed_kmeanspp");
    Centroids out;
    out.points.push_back(points[rng::uniform_index(eng, points.size())]);
    std::vector<double> d2(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        d2[i] = squared_distance(points[i], out.points[0]);
    while (out.k() < k) {
        double total = 0.0;
        for (double d : d2) total += d;
        if (!(total > 0.0))
            throw degenerate_input_error("seed_kmeanspp: no candidate left at positive distance");
        const double r = rng::uniform_unit(eng) * total;
        std::size_t pick = points.size();
        double cum = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            cum += d2[i];
            if (cum > r) {
                pick = i;
                break;
            }
        }
        if (pick == points.size()) { // r landed on the cumulative tail
            for (std::size_t i = points.size(); i-- > 0;)
                if (d2[i] > 0.0) {
                    pick = i;
                    break;
                }
        }
        out.points.push_back(points[pick]);
        for (std::size_t i = 0; i < points.size(); ++i)
            d2[i] = std::min(d2[i], squared_distance(points[i], out.points.back()));
    }
    return out;
}

// Lloyd iterations until the largest centroid displacement drops below
// config.tolerance or the iteration cap is hit.
inline ClusterOutcome kmeans_run(const std::vector<PixelPoint>& raw_points, const Centroids& init,
                                 const ClusterConfig& config) {
    config.validate();
    if (init.k() < 1 || raw_points.empty())
        throw degenerate_input_error("kmeans_run: empty input or init");
    const detail::WeightedSet set = config.aggregate_duplicates
                                        ? detail::aggregate_points(raw_points)
                                        : detail::identity_set(raw_points);
    const int k = init.k();
    const int dim = raw_points.front().dim;

    std::vector<PixelPoint> centers = init.points;
    ClusterOutcome out;
    std::vector<std::uint32_t> assign = detail::assign_with_repair(set, centers);
    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        out.iterations = iter;
        std::vector<PixelPoint> next(std::size_t(k), PixelPoint{{}, dim});
        std::vector<double> mass(std::size_t(k), 0.0);
        for (std::size_t i = 0; i < set.points.size(); ++i) {
            const double w = set.weights[i];
            mass[assign[i]] += w;
            for (int d = 0; d < dim; ++d)
                next[assign[i]].coords[std::size_t(d)] +=
                    w * set.points[i].coords[std::size_t(d)];
        }
        for (int c = 0; c < k; ++c) {
            if (mass[std::size_t(c)] > 0.0)
                for (int d = 0; d < dim; ++d)
                    next[std::size_t(c)].coords[std::size_t(d)] /= mass[std::size_t(c)];
            else
                next[std::size_t(c)] = centers[std::size_t(c)];
        }
        out.objective_trace.push_back(detail::weighted_sse(set, assign, next));
        const double delta = detail::max_displacement(centers, next);
        centers = std::move(next);
        assign = detail::assign_with_repair(set, centers);
        if (delta < config.tolerance) {
            out.converged = true;
            break;
        }
    }
    out.objective = detail::weighted_sse(set, assign, centers);
    out.centroids.points = std::move(centers);
    out.assignments.resize(raw_points.size());
    for (std::size_t i = 0; i < raw_points.size(); ++i) out.assignments[i] = assign[set.origin[i]];
    return out;
}

// Membership row for one point: u_k = d_k^(-2/(m-1)) / sum_j d_j^(-2/(m-1)),
// computed from squared distances normalized by the smallest to avoid
// overflow. A point coincident with a centroid gets full membership there.
inline void fcm_membership_row(const PixelPoint& point, const std::vector<PixelPoint>& centers,
                               double fuzzifier, double* row) {
    const std::size_t k = centers.size();
    double d2_min = std::numeric_limits<double>::infinity();
    std::size_t arg_min = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const double d2 = squared_distance(point, centers[c]);
        row[c] = d2;
        if (d2 < d2_min) {
            d2_min = d2;
            arg_min = c;
        }
    }
    if (d2_min == 0.0) {
        for (std::size_t c = 0; c < k; ++c) row[c] = 0.0;
        row[arg_min] = 1.0;
        return;
    }
    const double p = 1.0 / (fuzzifier - 1.0);
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        const double ratio = d2_min / row[c];
        row[c] = (fuzzifier == 2.0) ? ratio : std::pow(ratio, p);
        sum += row[c];
    }
    for (std::size_t c = 0; c < k; ++c) row[c] /= sum;
}

inline MembershipMatrix fcm_memberships(const std::vector<PixelPoint>& points,
                                        const Centroids& centroids, double fuzzifier) {
    MembershipMatrix m;
    m.k = centroids.k();
    m.degrees.resize(points.size() * std::size_t(m.k));
    for (std::size_t i = 0; i < points.size(); ++i)
        fcm_membership_row(points[i], centroids.points, fuzzifier, &m.degrees[i * std::size_t(m.k)]);
    return m;
}

// Alternating membership/centroid updates; objective J_m = sum w u^m d^2.
inline ClusterOutcome fcm_run(const std::vector<PixelPoint>& raw_points, const Centroids& init,
                              const ClusterConfig& config) {
    config.validate();
    if (init.k() < 1 || raw_points.empty())
        throw degenerate_input_error("fcm_run: empty input or init");
    const detail::WeightedSet set = config.aggregate_duplicates
                                        ? detail::aggregate_points(raw_points)
                                        : detail::identity_set(raw_points);
    const int k = init.k();
    const int dim = raw_points.front().dim;
    const double m = config.fuzzifier;
    const std::size_t n = set.points.size();

    std::vector<PixelPoint> centers = init.points;
    std::vector<double> u(n * std::size_t(k));
    ClusterOutcome out;
    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        out.iterations = iter;
        for (std::size_t i = 0; i < n; ++i)
            fcm_membership_row(set.points[i], centers, m, &u[i * std::size_t(k)]);
        std::vector<PixelPoint> next(std::size_t(k), PixelPoint{{}, dim});
        std::vector<double> mass(std::size_t(k), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (int c = 0; c < k; ++c) {
                const double uim = u[i * std::size_t(k) + std::size_t(c)];
                const double wum = set.weights[i] * (m == 2.0 ? uim * uim : std::pow(uim, m));
                mass[std::size_t(c)] += wum;
                for (int d = 0; d < dim; ++d)
                    next[std::size_t(c)].coords[std::size_t(d)] +=
                        wum * set.points[i].coords[std::size_t(d)];
            }
        for (int c = 0; c < k; ++c) {
            if (mass[std::size_t(c)] > 0.0)
                for (int d = 0; d < dim; ++d)
                    next[std::size_t(c)].coords[std::size_t(d)] /= mass[std::size_t(c)];
            else
                next[std::size_t(c)] = centers[std::size_t(c)];
        }
        double jm = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (int c = 0; c < k; ++c) {
                const double uim = u[i * std::size_t(k) + std::size_t(c)];
                const double wum = set.weights[i] * (m == 2.0 ? uim * uim : std::pow(uim, m));
                jm += wum * squared_distance(set.points[i], next[std::size_t(c)]);
            }
        out.objective_trace.push_back(jm);
        const double delta = detail::max_displacement(centers, next);
        centers = std::move(next);
        if (delta < config.tolerance) {
            out.converged = true;
            break;
        }
    }
    // Final memberships consistent with the final centroids.
    for (std::size_t i = 0; i < n; ++i)
        fcm_membership_row(set.points[i], centers, m, &u[i * std::size_t(k)]);
    double jm = 0.0;
    std::vector<std::uint32_t> assign(n);
    for (std::size_t i = 0; i < n; ++i) {
        double best = -1.0;
        for (int c = 0; c < k; ++c) {
            const double uim = u[i * std::size_t(k) + std::size_t(c)];
            const double wum = set.weights[i] * (m == 2.0 ? uim * uim : std::pow(uim, m));
            jm += wum * squared_distance(set.points[i], centers[std::size_t(c)]);
            if (uim > best) { // argmax membership, ties keep the lowest index
                best = uim;
                assign[i] = static_cast<std::uint32_t>(c);
            }
        }
    }
    out.objective = jm;
    out.centroids.points = std::move(centers);
    out.assignments.resize(raw_points.size());
    for (std::size_t i = 0; i < raw_points.size(); ++i) out.assignments[i] = assign[set.origin[i]];
    if (config.keep_membership) {
        out.membership.k = k;
        out.membership.degrees.resize(raw_points.size() * std::size_t(k));
        for (std::size_t i = 0; i < raw_points.size(); ++i)
            std::copy_n(&u[set.origin[i] * std::size_t(k)], std::size_t(k),
                        &out.membership.degrees[i * std::size_t(k)]);
    }
    return out;
}

// Seed per config.algorithm, iterate, and with restarts > 1 keep the run with
// the smallest objective (first winner on ties).
inline ClusterOutcome run_clustering(const std::vector<PixelPoint>& points,
                                     const ClusterConfig& config) {
    config.validate();
    require_k_distinct(points, config.k, "run_clustering");
    std::optional<ClusterOutcome> best;
    for (int r = 0; r < config.restarts; ++r) {
        auto eng = rng::make_engine(rng::sub_seed(config.seed, std::uint64_t(r)));
        const Centroids init = uses_dsquared_seeding(config.algorithm)
                                   ? seed_kmeanspp(points, config.k, eng)
                                   : seed_random(points, config.k, eng);
        ClusterOutcome out = is_fuzzy(config.algorithm) ? fcm_run(points, init, config)
                                                        : kmeans_run(points, init, config);
        if (!best || out.objective < best->objective) best = std::move(out);
    }
    return *best;
}

} // namespace iecc
