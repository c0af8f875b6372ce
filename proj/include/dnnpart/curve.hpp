#pragma once

#include <algorithm>
#include <sstream>
#include <vector>

#include <Eigen/Core>

#include "dnnpart/error.hpp"

namespace dnnpart {

/// Piecewise-linear, non-decreasing slowdown curve anchored at (0, 1).
/// Queries beyond the last anchor are clamped to its value.
template <typename Scalar>
class PiecewiseLinearCurve {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  /// Identity curve: multiplier 1 everywhere.
  PiecewiseLinearCurve() : x_(Array::Zero(1)), y_(Array::Ones(1)) {}

  PiecewiseLinearCurve(Array x, Array y) : x_(std::move(x)), y_(std::move(y)) { validate(); }

  static PiecewiseLinearCurve from_points(const std::vector<std::pair<Scalar, Scalar>>& points) {
    std::vector<std::pair<Scalar, Scalar>> sorted = points;
    std::sort(sorted.begin(), sorted.end());
    Array x(static_cast<Eigen::Index>(sorted.size()));
    Array y(static_cast<Eigen::Index>(sorted.size()));
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      x(static_cast<Eigen::Index>(i)) = sorted[i].first;
      y(static_cast<Eigen::Index>(i)) = sorted[i].second;
    }
    return PiecewiseLinearCurve(std::move(x), std::move(y));
  }

  Scalar operator()(Scalar stress) const {
    const Eigen::Index n = x_.size();
    if (stress <= x_(0)) return y_(0);
    if (stress >= x_(n - 1)) return y_(n - 1);
    const Scalar* begin = x_.data();
    const auto hi = static_cast<Eigen::Index>(std::upper_bound(begin, begin + n, stress) - begin);
    const Eigen::Index lo = hi - 1;
    const Scalar t = (stress - x_(lo)) / (x_(hi) - x_(lo));
    return y_(lo) + t * (y_(hi) - y_(lo));
  }

  Array operator()(const Array& stress) const { return stress.unaryExpr(*this); }

  const Array& anchors() const { return x_; }
  const Array& values() const { return y_; }

  bool operator==(const PiecewiseLinearCurve& o) const {
    return x_.size() == o.x_.size() && (x_ == o.x_).all() && (y_ == o.y_).all();
  }

 private:
  void validate() const {
    if (x_.size() == 0 || x_.size() != y_.size()) {
      throw ValidationError("stress curve needs matching, non-empty anchor and value lists");
    }
    if (x_(0) != Scalar(0) || y_(0) != Scalar(1)) {
      throw ValidationError("stress curve must include the anchor 0 -> 1");
    }
    for (Eigen::Index i = 1; i < x_.size(); ++i) {
      if (!(x_(i) > x_(i - 1))) throw ValidationError("stress curve anchors must be distinct");
      if (y_(i) < y_(i - 1)) {
        std::ostringstream os;
        os << "stress curve is not non-decreasing: " << x_(i - 1) << " -> " << y_(i - 1) << " but "
           << x_(i) << " -> " << y_(i);
        throw ValidationError(os.str());
      }
    }
  }

  Array x_;
  Array y_;
};

using StressCurve = PiecewiseLinearCurve<double>;

}  // namespace dnnpart
