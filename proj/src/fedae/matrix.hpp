#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <algorithm>
#include <vector>

namespace fedae {

// Row-major so that one row is one sample and the FEDAE layout (row-major
// weight entries) is a straight memcpy of the storage.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

using Labels = std::vector<int>;

// Rows of `source` selected by `indices`, in that order.
inline Matrix gather_rows(const Matrix& source, const std::vector<std::size_t>& indices) {
  Matrix out(static_cast<Eigen::Index>(indices.size()), source.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = source.row(static_cast<Eigen::Index>(indices[i]));
  }
  return out;
}

inline bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return a.size() == 0 ||
         std::equal(a.data(), a.data() + a.size(), b.data(), [](double x, double y) {
           return std::memcmp(&x, &y, sizeof(double)) == 0;
         });
}

}  // namespace fedae
