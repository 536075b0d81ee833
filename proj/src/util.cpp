#include "transonic/util.hpp"

#include <algorithm>

namespace transonic {

CubicCurve::CubicCurve(std::vector<double> x, std::vector<double> y,
                       std::vector<double> dy)
    : x_(std::move(x)), y_(std::move(y)), d_(std::move(dy)) {
  if (x_.size() < 2 || x_.size() != y_.size() || x_.size() != d_.size())
    throw ValidationError("curve needs matching samples with at least 2 points");
  for (std::size_t i = 1; i < x_.size(); ++i)
    if (!(x_[i] > x_[i - 1]))
      throw ValidationError("curve abscissae must strictly increase");
}

std::size_t CubicCurve::cell(double x) const {
  double span = x_.back() - x_.front();
  double slack = 1e-12 * span;
  if (x < x_.front() - slack || x > x_.back() + slack)
    throw DomainError("curve evaluated outside its sampled range");
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - x_.begin());
  if (i == 0) return 0;
  if (i >= x_.size()) return x_.size() - 2;
  return i - 1;
}

double CubicCurve::operator()(double x) const {
  std::size_t i = cell(x);
  double h = x_[i + 1] - x_[i];
  double t = (x - x_[i]) / h;
  double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
  double h10 = t * (1.0 - t) * (1.0 - t);
  double h01 = t * t * (3.0 - 2.0 * t);
  double h11 = t * t * (t - 1.0);
  return h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] + h * h11 * d_[i + 1];
}

double CubicCurve::deriv(double x) const {
  std::size_t i = cell(x);
  double h = x_[i + 1] - x_[i];
  double t = (x - x_[i]) / h;
  double g00 = 6.0 * t * (t - 1.0);
  double g10 = (1.0 - t) * (1.0 - 3.0 * t);
  double g01 = -g00;
  double g11 = t * (3.0 * t - 2.0);
  return g00 * y_[i] / h + g10 * d_[i] + g01 * y_[i + 1] / h + g11 * d_[i + 1];
}

const Quad8& gauss8() {
  // nodes/weights of the 8-point Gauss-Legendre rule mapped from [-1,1]
  static const Quad8 q = [] {
    const double a[4] = {0.1834346424956498, 0.5255324099163290,
                         0.7966664774136267, 0.9602898564975363};
    const double w[4] = {0.3626837833783620, 0.3137066458778873,
                         0.2223810344533745, 0.1012285362903763};
    Quad8 out{};
    for (int k = 0; k < 4; ++k) {
      out.t[2 * k] = 0.5 * (1.0 - a[k]);
      out.t[2 * k + 1] = 0.5 * (1.0 + a[k]);
      out.w[2 * k] = 0.5 * w[k];
      out.w[2 * k + 1] = 0.5 * w[k];
    }
    return out;
  }();
  return q;
}

}  // namespace transonic
