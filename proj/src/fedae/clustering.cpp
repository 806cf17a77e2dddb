#include "fedae/clustering.hpp"

#include "fedae/error.hpp"

#include <algorithm>
#include <limits>
#include <random>

namespace fedae {

namespace {

// Assigns every point to its nearest centroid (lowest index wins ties);
// returns the inertia and fills per-point squared distances.
double assign(const Matrix& points, const Matrix& centroids, Labels& labels, std::vector<double>& dist) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_j = 0;
    for (Eigen::Index j = 0; j < centroids.rows(); ++j) {
      const double d = (points.row(i) - centroids.row(j)).squaredNorm();
      if (d < best) {
        best = d;
        best_j = static_cast<int>(j);
      }
    }
    labels[static_cast<std::size_t>(i)] = best_j;
    dist[static_cast<std::size_t>(i)] = best;
    inertia += best;
  }
  return inertia;
}

Matrix plus_plus_init(const Matrix& points, std::size_t k, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(points.rows());
  Matrix centroids(static_cast<Eigen::Index>(k), points.cols());
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  centroids.row(0) = points.row(static_cast<Eigen::Index>(pick(rng)));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = (points.row(static_cast<Eigen::Index>(i)) - centroids.row(0)).squaredNorm();
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t chosen = n - 1;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target) {
          chosen = i;
          break;
        }
      }
    } else {
      // All remaining points coincide with a centroid.
      chosen = pick(rng);
    }
    centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(chosen));
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (points.row(static_cast<Eigen::Index>(i)) - centroids.row(static_cast<Eigen::Index>(c))).squaredNorm());
    }
  }
  return centroids;
}

}  // namespace

double kmeans_inertia(const Matrix& points, const Matrix& centroids, const Labels& labels) {
  if (labels.size() != static_cast<std::size_t>(points.rows())) throw ShapeError("kmeans_inertia: label count");
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    total += (points.row(i) - centroids.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return total;
}

KMeansResult kmeans_fit(const Matrix& points, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
  if (k == 0) throw InvalidArgument("kmeans: k must be positive");
  const auto n = static_cast<std::size_t>(points.rows());
  if (k > n) {
    throw InvalidArgument("kmeans: k = " + std::to_string(k) + " exceeds point count " + std::to_string(n));
  }
  if (options.max_iter == 0) throw InvalidArgument("kmeans: max_iter must be positive");

  std::mt19937_64 rng(seed);
  KMeansResult r;
  r.centroids = plus_plus_init(points, k, rng);
  r.labels.assign(n, 0);
  std::vector<double> dist(n);
  std::vector<std::size_t> counts(k);

  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    r.inertia_trace.push_back(assign(points, r.centroids, r.labels, dist));
    ++r.iterations_run;

    Matrix next = Matrix::Zero(r.centroids.rows(), r.centroids.cols());
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(r.labels[i]);
      next.row(static_cast<Eigen::Index>(j)) += points.row(static_cast<Eigen::Index>(i));
      ++counts[j];
    }
    std::vector<bool> taken(n, false);
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] > 0) {
        next.row(static_cast<Eigen::Index>(j)) /= static_cast<double>(counts[j]);
        continue;
      }
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i] && dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      }
      taken[far] = true;
      next.row(static_cast<Eigen::Index>(j)) = points.row(static_cast<Eigen::Index>(far));
    }
    const double shift = (next - r.centroids).norm();
    r.centroids = std::move(next);
    if (shift < options.tol) break;
  }
  r.inertia = assign(points, r.centroids, r.labels, dist);
  r.inertia_trace.push_back(r.inertia);
  return r;
}

}  // namespace fedae
