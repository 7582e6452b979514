#ifndef FACET_KMEANS_HPP
#define FACET_KMEANS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "facet/tensor.hpp"

// Lloyd's k-means with k-means++ seeding and restarts, plus the cluster-to-
// class labeling used to turn centroids into per-class targets.

namespace facet {

struct PointSet {
    Tensor points;           // M x n
    std::vector<int> labels; // empty when unlabeled; class ids in [0, C)

    std::size_t count() const { return points.rows(); }
    std::size_t dim() const { return points.cols(); }
    bool has_labels() const { return !labels.empty(); }
    void validate() const;
};

struct CentroidSet {
    Tensor centroids;                  // k x n
    std::vector<int> class_of_cluster; // cluster index -> class id; bijection
    double inertia = 0.0;

    std::size_t k() const { return centroids.rows(); }
    std::size_t dim() const { return centroids.cols(); }
    // Row of the centroid belonging to class c (inverse of class_of_cluster).
    const double* centroid_of_class(int c) const;
    void validate() const;
};

struct KmeansOptions {
    int restarts = 10;
    int max_iter = 100;
    double tol = 0.0; // stop when the inertia improvement drops below this
};

struct KmeansResult {
    CentroidSet best;
    int best_restart = 0;
    // Per-restart inertia history, one entry per Lloyd assignment pass.
    std::vector<std::vector<double>> inertia_history;
};

// Nearest-centroid assignment (squared Euclidean, ties to the lowest index).
// Returns per-point cluster indices; sse, when given, receives the total.
std::vector<int> assign_points(const Tensor& points, const Tensor& centroids,
                               double* sse = nullptr);

KmeansResult kmeans_fit_detailed(const PointSet& data, std::size_t k,
                                 std::uint64_t seed, const KmeansOptions& opts = {});
CentroidSet kmeans_fit(const PointSet& data, std::size_t k, std::uint64_t seed,
                       const KmeansOptions& opts = {});

// One-to-one cluster -> class assignment maximizing member/label agreement
// (exact, via subset DP). Requires exactly k distinct labels.
CentroidSet label_clusters(const CentroidSet& model, const PointSet& data);

// One centroid per ground-truth class: centroid i = mean of points labeled i.
CentroidSet class_mean_centroids(const PointSet& data);

// Silhouette-style separation diagnostic in [-1, 1]; higher is better
// separated. Reported only, never asserted.
double centroid_separation(const PointSet& data, const CentroidSet& model);

inline constexpr int kCentroidFormatVersion = 1;

void save_centroids(const CentroidSet& model, const std::string& path);
CentroidSet load_centroids(const std::string& path);
std::string centroids_to_json(const CentroidSet& model);
CentroidSet centroids_from_json(const std::string& text);

} // namespace facet

#endif
