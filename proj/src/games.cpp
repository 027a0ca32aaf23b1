#include "dmof/games.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <string>

namespace dmof {

PayoffMatrix PayoffMatrix::from_rows(const std::vector<std::vector<double>>& data) {
  require(!data.empty(), ErrorCode::Empty, "PayoffMatrix: no rows");
  PayoffMatrix g;
  g.rows = data.size();
  g.cols = data[0].size();
  require(g.cols >= 1, ErrorCode::Empty, "PayoffMatrix: no columns");
  g.entries.reserve(g.rows * g.cols);
  for (const auto& row : data) {
    require(row.size() == g.cols, ErrorCode::LengthMismatch,
            "PayoffMatrix: ragged rows");
    g.entries.insert(g.entries.end(), row.begin(), row.end());
  }
  return g;
}

namespace {

void check_matrix(const PayoffMatrix& g) {
  require(g.rows >= 1 && g.cols >= 1, ErrorCode::Empty, "game: empty matrix");
  require(g.entries.size() == g.rows * g.cols, ErrorCode::LengthMismatch,
          "game: entry count does not match rows*cols");
  for (double v : g.entries) {
    require(std::isfinite(v), ErrorCode::NonFinite, "game: non-finite entry");
  }
}

// Primal simplex for: max 1.u  s.t.  A u <= 1, u >= 0, with A > 0.
// This is the classic reduction of a (shifted) zero-sum game; the slack
// basis is feasible from the start so no phase 1 is needed. Returns the
// optimal u and the duals under the slack columns.
struct GameLp {
  std::vector<double> u;     // size n
  std::vector<double> dual;  // size m
  double objective = 0.0;
  long pivots = 0;
};

GameLp simplex_game_lp(const std::vector<double>& a, std::size_t m, std::size_t n,
                       long pivot_cap) {
  const std::size_t width = n + m + 1;  // structural + slack + rhs
  std::vector<double> t((m + 1) * width, 0.0);
  auto tab = [&](std::size_t r, std::size_t c) -> double& { return t[r * width + c]; };

  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) tab(i, j) = a[i * n + j];
    tab(i, n + i) = 1.0;
    tab(i, width - 1) = 1.0;
  }
  for (std::size_t j = 0; j < n; ++j) tab(m, j) = -1.0;  // reduced costs of max 1.u

  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;

  const double tol = 1e-11;
  GameLp out;
  const long bland_after = 64 * static_cast<long>(m + n);

  while (true) {
    // Entering column: Dantzig rule, Bland once the pivot budget suggests
    // cycling.
    std::size_t enter = width;
    if (out.pivots < bland_after) {
      double best = -tol;
      for (std::size_t j = 0; j + 1 < width; ++j) {
        if (tab(m, j) < best) {
          best = tab(m, j);
          enter = j;
        }
      }
    } else {
      for (std::size_t j = 0; j + 1 < width; ++j) {
        if (tab(m, j) < -tol) {
          enter = j;
          break;
        }
      }
    }
    if (enter == width) break;  // optimal

    std::size_t leave = m;
    double best_ratio = kInf;
    for (std::size_t i = 0; i < m; ++i) {
      const double col = tab(i, enter);
      if (col <= tol) continue;
      const double ratio = tab(i, width - 1) / col;
      if (ratio < best_ratio - tol ||
          (ratio < best_ratio + tol && (leave == m || basis[i] < basis[leave]))) {
        best_ratio = ratio;
        leave = i;
      }
    }
    require(leave < m, ErrorCode::NonFinite, "simplex: unbounded game LP");

    const double pivot = tab(leave, enter);
    for (std::size_t j = 0; j < width; ++j) tab(leave, j) /= pivot;
    for (std::size_t r = 0; r <= m; ++r) {
      if (r == leave) continue;
      const double factor = tab(r, enter);
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) tab(r, j) -= factor * tab(leave, j);
    }
    basis[leave] = enter;

    require(++out.pivots <= pivot_cap, ErrorCode::Timeout,
            "simplex: pivot cap reached before certification");
  }

  out.u.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) out.u[basis[i]] = std::max(0.0, tab(i, width - 1));
  }
  out.dual.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) out.dual[i] = std::max(0.0, tab(m, n + i));
  out.objective = 0.0;
  for (double v : out.u) out.objective += v;
  return out;
}

FiniteDist normalize_mixture(std::vector<double> w, std::size_t fallback_index) {
  double sum = 0.0;
  for (auto& x : w) {
    if (x < 0.0) x = 0.0;
    sum += x;
  }
  if (sum <= 0.0) {
    w.assign(w.size(), 0.0);
    w[fallback_index] = 1.0;
  }
  return make_dist(std::move(w));
}

}  // namespace

GameSolution certified_from_mixtures(const PayoffMatrix& game, FiniteDist col_mixture,
                                     FiniteDist row_mixture) {
  GameSolution s{std::move(col_mixture), std::move(row_mixture), 0.0, 0.0};
  const double primal = best_response_row(game, s.col_mixture).second;
  const double dual = best_response_col(game, s.row_mixture).second;
  s.value = 0.5 * (primal + dual);
  s.gap = std::max(0.0, primal - dual);
  return s;
}

GameSolution solve_zero_sum(const PayoffMatrix& game, double eps) {
  SolveOptions options;
  options.eps = eps;
  return solve_zero_sum(game, options);
}

GameSolution solve_zero_sum(const PayoffMatrix& game, const SolveOptions& options) {
  check_matrix(game);
  require(options.eps > 0.0, ErrorCode::InvalidArgument, "solve_zero_sum: eps <= 0");

  const std::size_t m = game.rows;
  const std::size_t n = game.cols;
  GameSolution solution;

  if (m == 1) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < n; ++j) {
      if (game.at(0, j) < game.at(0, best)) best = j;
    }
    solution = certified_from_mixtures(game, point_mass(n, best), point_mass(1, 0));
  } else if (n == 1) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < m; ++i) {
      if (game.at(i, 0) > game.at(best, 0)) best = i;
    }
    solution = certified_from_mixtures(game, point_mass(1, 0), point_mass(m, best));
  } else {
    // Shift all payoffs positive so the game value is > 0, then solve
    //   max 1.u  s.t.  G' u <= 1, u >= 0  with  y = u / (1.u).
    // The duals under the slack columns are the adversary mixture.
    double lo = game.entries[0], hi = game.entries[0];
    for (double v : game.entries) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double shift = 1.0 - lo;  // entries land in [1, 1 + range]
    std::vector<double> shifted(game.entries);
    for (auto& v : shifted) v += shift;

    const GameLp lp = simplex_game_lp(shifted, m, n, options.pivot_cap);
    require(lp.objective > 0.0, ErrorCode::NonFinite,
            "solve_zero_sum: degenerate LP objective");

    solution = certified_from_mixtures(game, normalize_mixture(lp.u, 0),
                                      normalize_mixture(lp.dual, 0));
  }

  const bool ok = solution.gap <= options.eps;
  CertificationAudit::instance().record(solution.gap, options.eps, ok);
  require(ok, ErrorCode::Timeout,
          "solve_zero_sum: could not certify gap <= eps (gap = " +
              std::to_string(solution.gap) + ")");
  return solution;
}

std::pair<std::size_t, double> best_response_row(const PayoffMatrix& game,
                                                 const FiniteDist& col_mixture) {
  check_matrix(game);
  require(col_mixture.size() == game.cols, ErrorCode::LengthMismatch,
          "best_response_row: mixture length != cols");
  std::size_t best = 0;
  double best_value = -kInf;
  for (std::size_t i = 0; i < game.rows; ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < game.cols; ++j) v += game.at(i, j) * col_mixture[j];
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  return {best, best_value};
}

std::pair<std::size_t, double> best_response_col(const PayoffMatrix& game,
                                                 const FiniteDist& row_mixture) {
  check_matrix(game);
  require(row_mixture.size() == game.rows, ErrorCode::LengthMismatch,
          "best_response_col: mixture length != rows");
  std::size_t best = 0;
  double best_value = kInf;
  for (std::size_t j = 0; j < game.cols; ++j) {
    double v = 0.0;
    for (std::size_t i = 0; i < game.rows; ++i) v += game.at(i, j) * row_mixture[i];
    if (v < best_value) {
      best_value = v;
      best = j;
    }
  }
  return {best, best_value};
}

CertificateCheck validate_certificate(const PayoffMatrix& game,
                                      const GameSolution& solution, double eps) {
  CertificateCheck check;
  check.primal_bound = best_response_row(game, solution.col_mixture).second;
  check.dual_bound = best_response_col(game, solution.row_mixture).second;
  check.gap = check.primal_bound - check.dual_bound;
  check.ok = check.gap <= eps &&
             check.primal_bound <= solution.value + solution.gap + eps &&
             check.dual_bound >= solution.value - solution.gap - eps;
  return check;
}

namespace {

struct AuditState {
  std::mutex mutex;
  std::uint64_t count = 0;
  std::uint64_t failures = 0;
  double worst_gap = 0.0;
  double worst_eps = kInf;
};

AuditState& audit_state() {
  static AuditState state;
  return state;
}

}  // namespace

CertificationAudit& CertificationAudit::instance() {
  static CertificationAudit audit;
  return audit;
}

void CertificationAudit::reset() {
  auto& s = audit_state();
  std::lock_guard<std::mutex> lock(s.mutex);
  s.count = 0;
  s.failures = 0;
  s.worst_gap = 0.0;
  s.worst_eps = kInf;
}

void CertificationAudit::record(double gap, double eps, bool ok) {
  auto& s = audit_state();
  std::lock_guard<std::mutex> lock(s.mutex);
  ++s.count;
  if (!ok) ++s.failures;
  s.worst_gap = std::max(s.worst_gap, gap);
  s.worst_eps = std::min(s.worst_eps, eps);
}

std::uint64_t CertificationAudit::count() const {
  auto& s = audit_state();
  std::lock_guard<std::mutex> lock(s.mutex);
  return s.count;
}

std::uint64_t CertificationAudit::failures() const {
  auto& s = audit_state();
  std::lock_guard<std::mutex> lock(s.mutex);
  return s.failures;
}

double CertificationAudit::worst_gap() const {
  auto& s = audit_state();
  std::lock_guard<std::mutex> lock(s.mutex);
  return s.worst_gap;
}

double CertificationAudit::worst_eps() const {
  auto& s = audit_state();
  std::lock_guard<std::mutex> lock(s.mutex);
  return s.worst_eps;
}

}  // namespace dmof
