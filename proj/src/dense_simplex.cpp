#include "mkdual/dense_simplex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace mkdual {

int LinearProgram::add_variable(double c, double lo, double hi) {
  cost.push_back(c);
  lower.push_back(lo);
  upper.push_back(hi);
  return static_cast<int>(cost.size()) - 1;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-11;
constexpr int kRefactorInterval = 64;

enum class VarState : unsigned char { Basic, AtLower, AtUpper, FreeZero };

struct Column {
  std::vector<std::pair<int, double>> entries;  // (row, coefficient)
};

class DenseSimplex {
 public:
  DenseSimplex(const LinearProgram& lp, const SolverConfig& cfg) : cfg_(cfg) {
    m_ = static_cast<int>(lp.rows.size());
    n_struct_ = lp.num_variables();
    if (lp.lower.size() != lp.cost.size() || lp.upper.size() != lp.cost.size())
      throw std::invalid_argument("solve_dense_lp: bound vectors do not match cost vector");
    cols_.resize(static_cast<std::size_t>(n_struct_));
    rhs_.resize(static_cast<std::size_t>(m_));
    for (int r = 0; r < m_; ++r) {
      const LpRow& row = lp.rows[r];
      rhs_[r] = row.rhs;
      for (const auto& [var, coef] : row.terms) {
        if (var < 0 || var >= n_struct_) throw std::invalid_argument("solve_dense_lp: bad variable index");
        if (coef != 0.0) cols_[var].entries.emplace_back(r, coef);
      }
    }
    lower_ = lp.lower;
    upper_ = lp.upper;
    true_cost_ = lp.cost;
    for (int j = 0; j < n_struct_; ++j)
      if (lower_[j] > upper_[j]) throw SolveError(SolveStatus::Infeasible, "solve_dense_lp: empty bound interval");
    // Slacks turn inequalities into equalities.
    for (int r = 0; r < m_; ++r) {
      const RowSense s = lp.rows[r].sense;
      if (s == RowSense::Equal) continue;
      cols_.push_back({{{r, s == RowSense::LessEqual ? 1.0 : -1.0}}});
      lower_.push_back(0.0);
      upper_.push_back(kInf);
      true_cost_.push_back(0.0);
    }
    n_nonart_ = static_cast<int>(cols_.size());
    n_total_ = n_nonart_ + m_;
    x_.assign(static_cast<std::size_t>(n_total_), 0.0);
    state_.assign(static_cast<std::size_t>(n_total_), VarState::AtLower);
    for (int j = 0; j < n_nonart_; ++j) {
      if (std::isfinite(lower_[j])) {
        x_[j] = lower_[j];
        state_[j] = VarState::AtLower;
      } else if (std::isfinite(upper_[j])) {
        x_[j] = upper_[j];
        state_[j] = VarState::AtUpper;
      } else {
        x_[j] = 0.0;
        state_[j] = VarState::FreeZero;
      }
    }
    // Artificial basis absorbs the initial residual.
    std::vector<double> residual(rhs_);
    for (int j = 0; j < n_nonart_; ++j)
      if (x_[j] != 0.0)
        for (const auto& [r, a] : cols_[j].entries) residual[r] -= a * x_[j];
    basis_.resize(static_cast<std::size_t>(m_));
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      const double sign = residual[r] >= 0.0 ? 1.0 : -1.0;
      const int j = n_nonart_ + r;
      cols_.push_back({{{r, sign}}});
      lower_.push_back(0.0);
      upper_.push_back(kInf);
      true_cost_.push_back(0.0);
      x_[j] = std::abs(residual[r]);
      state_[j] = VarState::Basic;
      basis_[r] = j;
      binv_[static_cast<std::size_t>(r) * m_ + r] = sign;
    }
  }

  LpSolution run() {
    const auto start = std::chrono::steady_clock::now();
    cost_.assign(static_cast<std::size_t>(n_total_), 0.0);
    for (int j = n_nonart_; j < n_total_; ++j) cost_[j] = 1.0;
    iterate();
    double infeasibility = 0.0;
    for (int j = n_nonart_; j < n_total_; ++j) infeasibility += std::max(x_[j], 0.0);
    if (infeasibility > cfg_.feasibility_tol)
      throw SolveError(SolveStatus::Infeasible,
                       "linear program infeasible: phase-one residual " + std::to_string(infeasibility));

    for (int j = n_nonart_; j < n_total_; ++j) {
      upper_[j] = 0.0;
      if (state_[j] != VarState::Basic) {
        x_[j] = 0.0;
        state_[j] = VarState::AtLower;
      }
    }
    cost_ = true_cost_;
    iterate();

    LpSolution sol;
    sol.x.assign(x_.begin(), x_.begin() + n_struct_);
    for (int j = 0; j < n_struct_; ++j) sol.objective += true_cost_[j] * x_[j];
    sol.row_duals = duals();
    stats_.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    sol.stats = stats_;
    return sol;
  }

 private:
  double& binv(int i, int k) { return binv_[static_cast<std::size_t>(i) * m_ + k]; }

  std::vector<double> duals() const {
    std::vector<double> y(static_cast<std::size_t>(m_), 0.0);
    for (int i = 0; i < m_; ++i) {
      const double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &binv_[static_cast<std::size_t>(i) * m_];
      for (int k = 0; k < m_; ++k) y[k] += cb * row[k];
    }
    return y;
  }

  double reduced_cost(int j, const std::vector<double>& y) const {
    double d = cost_[j];
    for (const auto& [r, a] : cols_[j].entries) d -= y[r] * a;
    return d;
  }

  // Returns entering column and direction (+1 increase, -1 decrease), or -1.
  std::pair<int, int> price(const std::vector<double>& y, bool bland) const {
    int best = -1, best_dir = 0;
    double best_score = cfg_.optimality_tol;
    for (int j = 0; j < n_total_; ++j) {
      const VarState s = state_[j];
      if (s == VarState::Basic || lower_[j] == upper_[j]) continue;
      const double d = reduced_cost(j, y);
      int dir = 0;
      if (d < -cfg_.optimality_tol && (s == VarState::AtLower || s == VarState::FreeZero)) dir = 1;
      if (d > cfg_.optimality_tol && (s == VarState::AtUpper || s == VarState::FreeZero)) dir = -1;
      if (dir == 0) continue;
      if (bland) return {j, dir};
      if (std::abs(d) > best_score) {
        best_score = std::abs(d);
        best = j;
        best_dir = dir;
      }
    }
    return {best, best_dir};
  }

  std::vector<double> ftran(int j) const {
    std::vector<double> w(static_cast<std::size_t>(m_), 0.0);
    for (const auto& [r, a] : cols_[j].entries)
      for (int i = 0; i < m_; ++i) w[i] += binv_[static_cast<std::size_t>(i) * m_ + r] * a;
    return w;
  }

  void refactor() {
    const std::size_t m = static_cast<std::size_t>(m_);
    std::vector<double> b(m * m, 0.0);
    for (int i = 0; i < m_; ++i)
      for (const auto& [r, a] : cols_[basis_[i]].entries) b[static_cast<std::size_t>(r) * m + i] = a;
    // Gauss-Jordan with partial pivoting on [B | I].
    std::vector<double> inv(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) inv[i * m + i] = 1.0;
    for (std::size_t c = 0; c < m; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < m; ++r)
        if (std::abs(b[r * m + c]) > std::abs(b[piv * m + c])) piv = r;
      if (std::abs(b[piv * m + c]) < 1e-14)
        throw SolveError(SolveStatus::Internal, "dense simplex: singular basis");
      if (piv != c)
        for (std::size_t k = 0; k < m; ++k) {
          std::swap(b[piv * m + k], b[c * m + k]);
          std::swap(inv[piv * m + k], inv[c * m + k]);
        }
      const double p = b[c * m + c];
      for (std::size_t k = 0; k < m; ++k) {
        b[c * m + k] /= p;
        inv[c * m + k] /= p;
      }
      for (std::size_t r = 0; r < m; ++r) {
        if (r == c) continue;
        const double f = b[r * m + c];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < m; ++k) {
          b[r * m + k] -= f * b[c * m + k];
          inv[r * m + k] -= f * inv[c * m + k];
        }
      }
    }
    binv_ = std::move(inv);
    // Recompute basic values from the nonbasic ones.
    std::vector<double> resid(rhs_);
    for (int j = 0; j < n_total_; ++j) {
      if (state_[j] == VarState::Basic || x_[j] == 0.0) continue;
      for (const auto& [r, a] : cols_[j].entries) resid[r] -= a * x_[j];
    }
    for (int i = 0; i < m_; ++i) {
      double v = 0.0;
      for (int k = 0; k < m_; ++k) v += binv(i, k) * resid[k];
      x_[basis_[i]] = v;
    }
  }

  void iterate() {
    long degenerate_run = 0;
    const long bland_threshold = 10L * (m_ + n_struct_);
    long since_refactor = 0;
    while (true) {
      const bool bland = degenerate_run > bland_threshold;
      const auto y = duals();
      const auto [entering, dir] = price(y, bland);
      if (entering < 0) return;
      if (stats_.iterations >= cfg_.max_iterations)
        throw SolveError(SolveStatus::IterationLimit, "dense simplex: iteration limit");
      ++stats_.iterations;

      const auto w = ftran(entering);
      // Basic variable i moves at rate -dir*w[i] per unit step of the entering variable.
      double step = kInf;
      bool flip = false;
      const double own = dir > 0 ? upper_[entering] - x_[entering] : x_[entering] - lower_[entering];
      if (std::isfinite(own)) {
        step = std::max(own, 0.0);
        flip = true;
      }
      auto row_limit = [&](int i) {
        const double rate = -dir * w[i];
        const int j = basis_[i];
        if (rate < -kPivotTol && std::isfinite(lower_[j])) return std::max(x_[j] - lower_[j], 0.0) / -rate;
        if (rate > kPivotTol && std::isfinite(upper_[j])) return std::max(upper_[j] - x_[j], 0.0) / rate;
        return kInf;
      };
      double row_min = kInf;
      for (int i = 0; i < m_; ++i) row_min = std::min(row_min, row_limit(i));
      int leave_row = -1;
      if (row_min < step) {
        step = row_min;
        flip = false;
      }
      if (step == kInf)
        throw SolveError(SolveStatus::Unbounded, "linear program unbounded");
      if (!flip) {
        // Ties: largest pivot magnitude, or lowest column index under Bland.
        const double cutoff = step + 1e-12 * std::max(1.0, step);
        for (int i = 0; i < m_; ++i) {
          if (row_limit(i) > cutoff) continue;
          if (leave_row < 0) {
            leave_row = i;
            continue;
          }
          if (bland ? basis_[i] < basis_[leave_row] : std::abs(w[i]) > std::abs(w[leave_row]))
            leave_row = i;
        }
      }

      x_[entering] += dir * step;
      for (int i = 0; i < m_; ++i) x_[basis_[i]] -= dir * step * w[i];
      if (step <= 1e-12) {
        ++stats_.degenerate_pivots;
        ++degenerate_run;
      } else {
        degenerate_run = 0;
      }

      if (flip) {
        state_[entering] = dir > 0 ? VarState::AtUpper : VarState::AtLower;
        x_[entering] = dir > 0 ? upper_[entering] : lower_[entering];
        continue;
      }

      const int leaving = basis_[leave_row];
      const double rate = -dir * w[leave_row];
      if (rate < 0.0) {
        state_[leaving] = VarState::AtLower;
        x_[leaving] = lower_[leaving];
      } else {
        state_[leaving] = VarState::AtUpper;
        x_[leaving] = upper_[leaving];
      }
      basis_[leave_row] = entering;
      state_[entering] = VarState::Basic;
      ++stats_.pivots;

      const double p = w[leave_row];
      double* prow = &binv_[static_cast<std::size_t>(leave_row) * m_];
      for (int k = 0; k < m_; ++k) prow[k] /= p;
      for (int i = 0; i < m_; ++i) {
        if (i == leave_row || w[i] == 0.0) continue;
        const double f = w[i];
        double* row = &binv_[static_cast<std::size_t>(i) * m_];
        for (int k = 0; k < m_; ++k) row[k] -= f * prow[k];
      }
      if (++since_refactor >= kRefactorInterval) {
        refactor();
        since_refactor = 0;
      }
    }
  }

  SolverConfig cfg_;
  int m_ = 0, n_struct_ = 0, n_nonart_ = 0, n_total_ = 0;
  std::vector<Column> cols_;
  std::vector<double> rhs_, lower_, upper_, true_cost_, cost_, x_;
  std::vector<VarState> state_;
  std::vector<int> basis_;
  std::vector<double> binv_;
  SolverStats stats_;
};

}  // namespace

LpSolution solve_dense_lp(const LinearProgram& lp, const SolverConfig& cfg) {
  cfg.validate();
  if (lp.rows.empty()) throw std::invalid_argument("solve_dense_lp: no constraints");
  DenseSimplex simplex(lp, cfg);
  return simplex.run();
}

}  // namespace mkdual
