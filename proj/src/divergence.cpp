#include "dmof/divergence.hpp"

#include <cmath>
#include <string>

namespace dmof {

FiniteDist make_dist(std::vector<double> weights) {
  require(!weights.empty(), ErrorCode::Empty, "make_dist: empty weight vector");
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    require(std::isfinite(w), ErrorCode::NonFinite,
            "make_dist: non-finite weight at index " + std::to_string(i));
    require(w >= 0.0, ErrorCode::NegativeWeight,
            "make_dist: negative weight at index " + std::to_string(i));
    sum += w;
  }
  require(sum > 0.0, ErrorCode::ZeroMass, "make_dist: weights sum to zero");
  if (std::abs(sum - 1.0) > kNormTol) {
    for (auto& w : weights) w /= sum;
  }
  return FiniteDist(std::move(weights));
}

FiniteDist uniform_dist(std::size_t n) {
  require(n >= 1, ErrorCode::Empty, "uniform_dist: n must be >= 1");
  return make_dist(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

FiniteDist point_mass(std::size_t n, std::size_t at) {
  require(n >= 1, ErrorCode::Empty, "point_mass: n must be >= 1");
  require(at < n, ErrorCode::IndexOutOfRange, "point_mass: index out of range");
  std::vector<double> w(n, 0.0);
  w[at] = 1.0;
  return make_dist(std::move(w));
}

namespace {

void check_same_length(const FiniteDist& p, const FiniteDist& q, const char* op) {
  require(p.size() == q.size(), ErrorCode::LengthMismatch,
          std::string(op) + ": distributions have different lengths");
}

}  // namespace

double hellinger_sq(const FiniteDist& p, const FiniteDist& q) {
  check_same_length(p, q, "hellinger_sq");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
    acc += d * d;
  }
  return acc;
}

double kl(const FiniteDist& p, const FiniteDist& q) {
  check_same_length(p, q, "kl");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return kInf;
    acc += p[i] * std::log(p[i] / q[i]);
  }
  return acc < 0.0 ? 0.0 : acc;  // guards tiny negative rounding at p ~ q
}

double tv(const FiniteDist& p, const FiniteDist& q) {
  check_same_length(p, q, "tv");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return acc / 2.0;
}

FiniteDist product_dist(const FiniteDist& p, std::size_t n, std::size_t cap) {
  require(n >= 1, ErrorCode::InvalidArgument, "product_dist: n must be >= 1");
  const std::size_t k = p.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    require(total <= cap / k, ErrorCode::EnumerationCapExceeded,
            "product_dist: |support|^n exceeds enumeration cap");
    total *= k;
  }
  std::vector<double> w(total, 1.0);
  // index = sum_i x_i * k^(n-1-i); filling position by position keeps the
  // lexicographic order without materializing tuples.
  std::size_t block = total;
  for (std::size_t pos = 0; pos < n; ++pos) {
    block /= k;
    for (std::size_t idx = 0; idx < total; ++idx) {
      w[idx] *= p[(idx / block) % k];
    }
  }
  return make_dist(std::move(w));
}

double expectation(const FiniteDist& p, const std::vector<double>& f) {
  require(p.size() == f.size(), ErrorCode::LengthMismatch,
          "expectation: function length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += p[i] * f[i];
  return acc;
}

}  // namespace dmof
