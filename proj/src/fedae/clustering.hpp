#pragma once

#include "fedae/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fedae {

struct KMeansResult {
  Labels labels;
  Matrix centroids;  // k x dim
  double inertia = 0.0;
  std::size_t iterations_run = 0;
  // Inertia after each assignment step, ending with the final assignment.
  std::vector<double> inertia_trace;
};

struct KMeansOptions {
  std::size_t max_iter = 300;
  double tol = 1e-4;
};

// k-means++ seeding followed by Lloyd iterations until the Frobenius norm of
// the centroid displacement drops below tol. An empty cluster is reseeded at
// the point farthest from its assigned centroid.
KMeansResult kmeans_fit(const Matrix& points, std::size_t k, std::uint64_t seed,
                        const KMeansOptions& options = {});

// Sum of squared distances of each point to the centroid its label names.
double kmeans_inertia(const Matrix& points, const Matrix& centroids, const Labels& labels);

}  // namespace fedae
