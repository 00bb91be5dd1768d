#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mkdual/extended.hpp"

namespace mkdual {

inline constexpr std::size_t kMaxDimension = 2000;
inline constexpr double kConstructionTol = 1e-12;
inline constexpr double kSolverTol = 1e-9;

/// Probability vector over a finite space.
class Marginal {
 public:
  explicit Marginal(std::vector<double> weights, std::vector<std::string> labels = {});

  static Marginal uniform(std::size_t n);

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<double> weights_;
  std::vector<std::string> labels_;
};

/// Nonnegative cost with explicit +inf entries marking forbidden cells.
class CostMatrix {
 public:
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<Extended> entries);
  /// All entries finite.
  CostMatrix(std::size_t rows, std::size_t cols, std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_finite(std::size_t i, std::size_t j) const { return finite_[i * cols_ + j] != 0; }
  Extended at(std::size_t i, std::size_t j) const {
    return is_finite(i, j) ? Extended(values_[i * cols_ + j]) : Extended::infinity();
  }
  /// Value of a finite cell; unspecified for forbidden cells.
  double finite_value(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  std::size_t finite_count() const;

 private:
  std::size_t rows_, cols_;
  std::vector<double> values_;
  std::vector<unsigned char> finite_;
};

enum class PlanKind { ExactCoupling, SubCoupling };

/// Dense nonnegative mass matrix with (sub-)marginal structure.
class TransportPlan {
 public:
  /// Validates the marginal constraints for `kind` at tolerance `tol`.
  TransportPlan(std::size_t rows, std::size_t cols, std::vector<double> mass, PlanKind kind,
                const Marginal& mu, const Marginal& nu, double tol = kSolverTol);

  /// Exact coupling whose marginals are, by definition, its own row and
  /// column sums.
  static TransportPlan from_mass(std::size_t rows, std::size_t cols, std::vector<double> mass);
  static TransportPlan zero(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  PlanKind kind() const { return kind_; }
  double operator()(std::size_t i, std::size_t j) const { return mass_[i * cols_ + j]; }
  std::span<const double> mass() const { return mass_; }

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
  double total_mass() const;
  /// Cells with strictly positive mass.
  bool in_support(std::size_t i, std::size_t j) const { return (*this)(i, j) > 0.0; }

 private:
  TransportPlan(std::size_t rows, std::size_t cols, std::vector<double> mass, PlanKind kind);

  std::size_t rows_, cols_;
  std::vector<double> mass_;
  PlanKind kind_;
};

/// Kantorovich potentials. Entries may be -inf, never +inf.
class PotentialPair {
 public:
  PotentialPair(std::vector<Extended> phi, std::vector<Extended> psi);
  static PotentialPair finite(std::span<const double> phi, std::span<const double> psi);

  std::span<const Extended> phi() const { return phi_; }
  std::span<const Extended> psi() const { return psi_; }
  /// phi[x] + psi[y] with -inf absorbing.
  Extended sum(std::size_t x, std::size_t y) const { return phi_[x] + psi_[y]; }
  bool all_finite() const;

  /// L1(mu) norm of phi plus L1(nu) norm of psi; +inf if a charged point is -inf.
  Extended l1_norm(const Marginal& mu, const Marginal& nu) const;
  /// Sum(phi mu) + Sum(psi nu), -inf absorbing on charged points.
  Extended dual_objective(const Marginal& mu, const Marginal& nu) const;
  /// phi <- phi - m, psi <- psi + m with m = Sum(phi mu); requires finite phi on charged points.
  PotentialPair gauge_normalized(const Marginal& mu) const;

 private:
  std::vector<Extended> phi_, psi_;
};

struct SolverStats {
  long iterations = 0;
  long pivots = 0;
  long degenerate_pivots = 0;
  double wall_ms = 0.0;
};

struct DualityReport {
  Extended primal_value;
  Extended dual_value;
  std::optional<TransportPlan> optimal_plan;
  std::optional<PotentialPair> optimal_potentials;
  SolverStats stats;

  /// primal - dual when both finite, otherwise 0.
  double gap() const;
};

/// <c, pi> with 0 * inf = 0.
Extended transport_cost(const CostMatrix& c, const TransportPlan& pi);

/// Integral of phi (+) psi against pi; -inf if a charged cell touches a -inf potential.
Extended j_c(const PotentialPair& pp, const TransportPlan& pi);

TransportPlan mixture_plan(std::span<const TransportPlan> plans, std::span<const double> weights);

struct Domination {
  bool dominated = false;
  /// max of pi1/pi2 over supp(pi1); meaningful only when dominated.
  double density_bound = 0.0;
};

/// pi1 <= pi2 in the bounded-density order: supp(pi1) within supp(pi2).
Domination plan_dominates(const TransportPlan& pi1, const TransportPlan& pi2);

}  // namespace mkdual
