#pragma once

#include <cstddef>
#include <vector>

#include "dmof/common.hpp"

namespace dmof {

// Probability vector over an indexed finite set. Instances are only ever
// created through make_dist (or the named factories), so every FiniteDist in
// flight is non-empty, non-negative and sums to 1 within kNormTol.
class FiniteDist {
 public:
  FiniteDist() : w_{1.0} {}  // degenerate single-point law

  const std::vector<double>& weights() const { return w_; }
  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }

  friend FiniteDist make_dist(std::vector<double> weights);

 private:
  explicit FiniteDist(std::vector<double> w) : w_(std::move(w)) {}
  std::vector<double> w_;
};

// Normalizes non-negative weights into a FiniteDist. Inputs already summing
// to 1 within kNormTol are preserved exactly.
FiniteDist make_dist(std::vector<double> weights);

FiniteDist uniform_dist(std::size_t n);
FiniteDist point_mass(std::size_t n, std::size_t at);

// Squared Hellinger distance, sum_x (sqrt p - sqrt q)^2. Range [0, 2].
double hellinger_sq(const FiniteDist& p, const FiniteDist& q);

// KL divergence in nats with the 0 log 0 = 0 convention. Returns +infinity
// when p puts mass where q has none; callers treat that as a value, not an
// error (the sup/inf arithmetic downstream needs it).
double kl(const FiniteDist& p, const FiniteDist& q);

// Total variation, sum_x |p - q| / 2. Range [0, 1].
double tv(const FiniteDist& p, const FiniteDist& q);

// n-fold product distribution over tuples in lexicographic index order
// (first coordinate most significant).
FiniteDist product_dist(const FiniteDist& p, std::size_t n,
                        std::size_t cap = kEnumerationCap);

double expectation(const FiniteDist& p, const std::vector<double>& f);

}  // namespace dmof
