#include "facet/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "facet/errors.hpp"
#include "facet/kernels.hpp"
#include "facet/parallel.hpp"
#include "facet/rng.hpp"

namespace facet {

using kernels::squared_distance;
using nlohmann::json;

void PointSet::validate() const {
    if (points.rank() != 2) throw shape_error("point set must be an M x n matrix");
    points.require_finite("point set");
    if (!labels.empty() && labels.size() != count()) {
        throw shape_error("label count does not match point count");
    }
}

const double* CentroidSet::centroid_of_class(int c) const {
    for (std::size_t j = 0; j < class_of_cluster.size(); ++j) {
        if (class_of_cluster[j] == c) return centroids.row(j);
    }
    throw config_error("no centroid labeled with class " + std::to_string(c));
}

void CentroidSet::validate() const {
    if (centroids.rank() != 2) throw shape_error("centroids must be a k x n matrix");
    centroids.require_finite("centroids");
    if (!class_of_cluster.empty()) {
        if (class_of_cluster.size() != k()) {
            throw config_error("class_of_cluster size does not match k");
        }
        std::vector<bool> seen(k(), false);
        for (int c : class_of_cluster) {
            if (c < 0 || static_cast<std::size_t>(c) >= k() || seen[c]) {
                throw config_error("class_of_cluster is not a bijection onto 0..k-1");
            }
            seen[c] = true;
        }
    }
}

std::vector<int> assign_points(const Tensor& points, const Tensor& centroids,
                               double* sse) {
    const std::size_t m = points.rows();
    const std::size_t k = centroids.rows();
    const std::size_t n = points.cols();
    if (centroids.cols() != n) throw shape_error("point/centroid dimension mismatch");

    std::vector<int> assign(m, 0);
    std::vector<double> dist(m, 0.0);
    parallel_for(m, [&](std::size_t i) {
        const double* p = points.row(i);
        double best = std::numeric_limits<double>::infinity();
        int best_j = 0;
        for (std::size_t j = 0; j < k; ++j) {
            const double d = squared_distance(p, centroids.row(j), n);
            if (d < best) {
                best = d;
                best_j = static_cast<int>(j);
            }
        }
        assign[i] = best_j;
        dist[i] = best;
    }, /*grain=*/64);

    if (sse) {
        double total = 0.0;
        for (double d : dist) total += d; // fixed order, bit-deterministic
        *sse = total;
    }
    return assign;
}

namespace {

// k-means++ seeding: first centroid uniform, the rest sampled with
// probability proportional to the squared distance to the nearest chosen one.
Tensor seed_centroids(const Tensor& points, std::size_t k, Rng& rng) {
    const std::size_t m = points.rows();
    const std::size_t n = points.cols();
    Tensor centroids = Tensor::matrix(k, n);

    std::size_t first = rng.uniform_int(m);
    for (std::size_t c = 0; c < n; ++c) centroids.at(0, c) = points.at(first, c);

    std::vector<double> d2(m);
    for (std::size_t i = 0; i < m; ++i) {
        d2[i] = squared_distance(points.row(i), centroids.row(0), n);
    }
    for (std::size_t j = 1; j < k; ++j) {
        double total = 0.0;
        for (double d : d2) total += d;
        std::size_t pick;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            pick = m - 1;
            for (std::size_t i = 0; i < m; ++i) {
                acc += d2[i];
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.uniform_int(m); // all remaining points coincide
        }
        for (std::size_t c = 0; c < n; ++c) centroids.at(j, c) = points.at(pick, c);
        for (std::size_t i = 0; i < m; ++i) {
            const double d = squared_distance(points.row(i), centroids.row(j), n);
            if (d < d2[i]) d2[i] = d;
        }
    }
    return centroids;
}

struct LloydRun {
    Tensor centroids;
    double inertia = 0.0;
    std::vector<double> history;
};

LloydRun lloyd(const Tensor& points, std::size_t k, Rng& rng, const KmeansOptions& opts) {
    const std::size_t m = points.rows();
    const std::size_t n = points.cols();

    LloydRun run;
    run.centroids = seed_centroids(points, k, rng);

    std::vector<int> prev_assign;
    double prev_sse = std::numeric_limits<double>::infinity();
    bool centroids_dirty = false; // centroids changed after the last sse

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        double sse = 0.0;
        std::vector<int> assign = assign_points(points, run.centroids, &sse);
        run.history.push_back(sse);
        run.inertia = sse;
        centroids_dirty = false;

        if (assign == prev_assign) break; // fixpoint; means already match

        // update step: centroid = mean of its members
        std::vector<std::size_t> counts(k, 0);
        Tensor sums = Tensor::matrix(k, n);
        for (std::size_t i = 0; i < m; ++i) {
            const int j = assign[i];
            ++counts[j];
            const double* p = points.row(i);
            double* s = sums.row(j);
            for (std::size_t c = 0; c < n; ++c) s[c] += p[c];
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] == 0) continue;
            double* cj = run.centroids.row(j);
            const double* s = sums.row(j);
            for (std::size_t c = 0; c < n; ++c) cj[c] = s[c] / static_cast<double>(counts[j]);
        }
        centroids_dirty = true;

        // Re-seed empty clusters from the farthest point; never return one.
        bool reseeded = false;
        std::vector<bool> taken(m, false);
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] != 0) continue;
            double worst = -1.0;
            std::size_t pick = 0;
            for (std::size_t i = 0; i < m; ++i) {
                if (taken[i]) continue;
                const double d =
                    squared_distance(points.row(i), run.centroids.row(assign[i]), n);
                if (d > worst) {
                    worst = d;
                    pick = i;
                }
            }
            taken[pick] = true;
            double* cj = run.centroids.row(j);
            const double* p = points.row(pick);
            for (std::size_t c = 0; c < n; ++c) cj[c] = p[c];
            reseeded = true;
        }

        if (!reseeded && iter > 0 && prev_sse - sse < opts.tol) break;
        prev_assign = std::move(assign);
        prev_sse = sse;
    }

    if (centroids_dirty) {
        // Loop ended right after an update; report inertia of the final
        // centroids so the value always matches what we return.
        double sse = 0.0;
        assign_points(points, run.centroids, &sse);
        run.history.push_back(sse);
        run.inertia = sse;
    }
    return run;
}

} // namespace

KmeansResult kmeans_fit_detailed(const PointSet& data, std::size_t k,
                                 std::uint64_t seed, const KmeansOptions& opts) {
    data.validate();
    const std::size_t m = data.count();
    if (k < 1) throw config_error("k must be at least 1");
    if (k > m) {
        throw config_error("k = " + std::to_string(k) + " exceeds point count " +
                           std::to_string(m));
    }
    if (opts.restarts < 1) throw config_error("restarts must be at least 1");

    std::vector<LloydRun> runs(opts.restarts);
    parallel_for(static_cast<std::size_t>(opts.restarts), [&](std::size_t r) {
        Rng rng(derive_seed(seed, 0x6b6d65616e73ULL, r));
        runs[r] = lloyd(data.points, k, rng, opts);
    });

    int best = 0;
    for (int r = 1; r < opts.restarts; ++r) {
        if (runs[r].inertia < runs[best].inertia) best = r;
    }

    KmeansResult result;
    result.best.centroids = std::move(runs[best].centroids);
    result.best.inertia = runs[best].inertia;
    result.best_restart = best;
    for (auto& run : runs) result.inertia_history.push_back(std::move(run.history));
    result.best.centroids.require_finite("kmeans centroids");
    return result;
}

CentroidSet kmeans_fit(const PointSet& data, std::size_t k, std::uint64_t seed,
                       const KmeansOptions& opts) {
    return kmeans_fit_detailed(data, k, seed, opts).best;
}

CentroidSet label_clusters(const CentroidSet& model, const PointSet& data) {
    data.validate();
    model.validate();
    if (!data.has_labels()) throw config_error("label_clusters requires labeled points");
    const std::size_t k = model.k();
    if (k > 25) throw config_error("label_clusters supports at most 25 clusters");

    std::vector<int> distinct(data.labels);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() != k) {
        throw config_error("need exactly " + std::to_string(k) +
                           " distinct labels, found " + std::to_string(distinct.size()));
    }
    for (int c : data.labels) {
        if (c < 0 || static_cast<std::size_t>(c) >= k) {
            throw config_error("labels must lie in [0, k)");
        }
    }

    const std::vector<int> assign = assign_points(data.points, model.centroids);
    // agreement[j][c]: members of cluster j carrying label c
    std::vector<std::vector<long long>> agreement(k, std::vector<long long>(k, 0));
    for (std::size_t i = 0; i < data.count(); ++i) {
        ++agreement[assign[i]][data.labels[i]];
    }

    // Exact assignment via DP over label subsets: clusters are consumed in
    // index order, mask holds the labels already used.
    const std::size_t full = (std::size_t{1} << k) - 1;
    const long long kNeg = std::numeric_limits<long long>::min();
    std::vector<long long> best(full + 1, kNeg);
    std::vector<int> choice(full + 1, -1);
    best[0] = 0;
    for (std::size_t mask = 0; mask < full; ++mask) {
        if (best[mask] == kNeg) continue;
        const std::size_t j = static_cast<std::size_t>(std::popcount(mask)); // next cluster
        for (std::size_t c = 0; c < k; ++c) {
            if (mask & (std::size_t{1} << c)) continue;
            const std::size_t next = mask | (std::size_t{1} << c);
            const long long cand = best[mask] + agreement[j][c];
            if (cand > best[next]) {
                best[next] = cand;
                choice[next] = static_cast<int>(c);
            }
        }
    }

    CentroidSet labeled = model;
    labeled.class_of_cluster.assign(k, -1);
    std::size_t mask = full;
    for (std::size_t j = k; j-- > 0;) {
        const int c = choice[mask];
        labeled.class_of_cluster[j] = c;
        mask &= ~(std::size_t{1} << c);
    }
    labeled.validate();
    return labeled;
}

CentroidSet class_mean_centroids(const PointSet& data) {
    data.validate();
    if (!data.has_labels()) throw config_error("class_mean_centroids requires labels");
    int max_label = 0;
    for (int c : data.labels) {
        if (c < 0) throw config_error("negative class label");
        max_label = std::max(max_label, c);
    }
    const std::size_t k = static_cast<std::size_t>(max_label) + 1;
    const std::size_t n = data.dim();

    std::vector<std::size_t> counts(k, 0);
    Tensor sums = Tensor::matrix(k, n);
    for (std::size_t i = 0; i < data.count(); ++i) {
        const int c = data.labels[i];
        ++counts[c];
        const double* p = data.points.row(i);
        double* s = sums.row(c);
        for (std::size_t d = 0; d < n; ++d) s[d] += p[d];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
            throw config_error("class " + std::to_string(c) + " has no points");
        }
    }

    CentroidSet model;
    model.centroids = Tensor::matrix(k, n);
    model.class_of_cluster.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        model.class_of_cluster[c] = static_cast<int>(c);
        double* row = model.centroids.row(c);
        const double* s = sums.row(c);
        for (std::size_t d = 0; d < n; ++d) row[d] = s[d] / static_cast<double>(counts[c]);
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < data.count(); ++i) {
        sse += squared_distance(data.points.row(i), model.centroids.row(data.labels[i]), n);
    }
    model.inertia = sse;
    return model;
}

double centroid_separation(const PointSet& data, const CentroidSet& model) {
    const std::vector<int> assign = assign_points(data.points, model.centroids);
    const std::size_t n = data.dim();
    double total = 0.0;
    for (std::size_t i = 0; i < data.count(); ++i) {
        const double a =
            std::sqrt(squared_distance(data.points.row(i), model.centroids.row(assign[i]), n));
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < model.k(); ++j) {
            if (static_cast<int>(j) == assign[i]) continue;
            b = std::min(b, std::sqrt(squared_distance(data.points.row(i),
                                                       model.centroids.row(j), n)));
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return data.count() > 0 ? total / static_cast<double>(data.count()) : 0.0;
}

// ---------------------------------------------------------------------------
// Centroid file
// ---------------------------------------------------------------------------

std::string centroids_to_json(const CentroidSet& model) {
    json j;
    j["format_version"] = kCentroidFormatVersion;
    j["n"] = model.dim();
    j["k"] = model.k();
    json rows = json::array();
    for (std::size_t r = 0; r < model.k(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < model.dim(); ++c) row.push_back(model.centroids.at(r, c));
        rows.push_back(std::move(row));
    }
    j["centroids"] = std::move(rows);
    j["class_of_cluster"] = model.class_of_cluster;
    j["inertia"] = model.inertia;
    return j.dump();
}

CentroidSet centroids_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("centroid file parse error: ") + e.what());
    }
    try {
        if (j.at("format_version").get<int>() != kCentroidFormatVersion) {
            throw config_error("unsupported centroid format_version");
        }
        const std::size_t k = j.at("k").get<std::size_t>();
        const std::size_t n = j.at("n").get<std::size_t>();
        CentroidSet model;
        model.centroids = Tensor::matrix(k, n);
        const json& rows = j.at("centroids");
        if (rows.size() != k) throw config_error("centroid row count does not match k");
        for (std::size_t r = 0; r < k; ++r) {
            const auto row = rows[r].get<std::vector<double>>();
            if (row.size() != n) throw config_error("centroid row has wrong dimension");
            for (std::size_t c = 0; c < n; ++c) model.centroids.at(r, c) = row[c];
        }
        model.class_of_cluster = j.at("class_of_cluster").get<std::vector<int>>();
        model.inertia = j.at("inertia").get<double>();
        model.validate();
        return model;
    } catch (const json::exception& e) {
        throw config_error(std::string("centroid file field error: ") + e.what());
    }
}

void save_centroids(const CentroidSet& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write centroid file: " + path);
    out << centroids_to_json(model) << '\n';
}

CentroidSet load_centroids(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot read centroid file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return centroids_from_json(text);
}

} // namespace facet
