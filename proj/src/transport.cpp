#include "mkdual/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mkdual {

std::string Extended::str() const {
  if (is_pos_inf()) return "inf";
  if (is_neg_inf()) return "-inf";
  std::ostringstream os;
  os.precision(17);
  os << value_;
  return os.str();
}

namespace {

void check_dims(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("empty dimension");
  if (rows > kMaxDimension || cols > kMaxDimension)
    throw std::invalid_argument("dimension exceeds " + std::to_string(kMaxDimension));
}

void check_shape(const CostMatrix& c, const TransportPlan& pi) {
  if (c.rows() != pi.rows() || c.cols() != pi.cols())
    throw std::invalid_argument("cost/plan shape mismatch");
}

}  // namespace

Marginal::Marginal(std::vector<double> weights, std::vector<std::string> labels)
    : weights_(std::move(weights)), labels_(std::move(labels)) {
  if (weights_.empty()) throw std::invalid_argument("Marginal: empty");
  if (weights_.size() > kMaxDimension) throw std::invalid_argument("Marginal: too many points");
  if (!labels_.empty() && labels_.size() != weights_.size())
    throw std::invalid_argument("Marginal: label count mismatch");
  double total = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("Marginal: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > kConstructionTol)
    throw std::invalid_argument("Marginal: weights do not sum to 1");
}

Marginal Marginal::uniform(std::size_t n) {
  return Marginal(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<Extended> entries)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0), finite_(rows * cols, 0) {
  check_dims(rows, cols);
  if (entries.size() != rows * cols) throw std::invalid_argument("CostMatrix: entry count");
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Extended& e = entries[k];
    if (e.is_neg_inf()) throw std::invalid_argument("CostMatrix: -inf entry");
    if (e.is_finite()) {
      if (e.value() < 0.0) throw std::invalid_argument("CostMatrix: negative entry");
      values_[k] = e.value();
      finite_[k] = 1;
    }
  }
}

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::span<const double> values)
    : rows_(rows), cols_(cols), values_(values.begin(), values.end()), finite_(rows * cols, 1) {
  check_dims(rows, cols);
  if (values.size() != rows * cols) throw std::invalid_argument("CostMatrix: entry count");
  for (double v : values_)
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("CostMatrix: bad entry");
}

std::size_t CostMatrix::finite_count() const {
  return static_cast<std::size_t>(std::count(finite_.begin(), finite_.end(), 1));
}

TransportPlan::TransportPlan(std::size_t rows, std::size_t cols, std::vector<double> mass,
                             PlanKind kind)
    : rows_(rows), cols_(cols), mass_(std::move(mass)), kind_(kind) {
  check_dims(rows, cols);
  if (mass_.size() != rows * cols) throw std::invalid_argument("TransportPlan: entry count");
  for (double m : mass_)
    if (!std::isfinite(m) || m < 0.0) throw std::invalid_argument("TransportPlan: negative mass");
}

TransportPlan::TransportPlan(std::size_t rows, std::size_t cols, std::vector<double> mass,
                             PlanKind kind, const Marginal& mu, const Marginal& nu, double tol)
    : TransportPlan(rows, cols, std::move(mass), kind) {
  if (mu.size() != rows || nu.size() != cols)
    throw std::invalid_argument("TransportPlan: marginal shape mismatch");
  const auto rs = row_sums();
  const auto cs = col_sums();
  for (std::size_t i = 0; i < rows; ++i) {
    const bool ok = kind == PlanKind::ExactCoupling ? std::abs(rs[i] - mu[i]) <= tol
                                                     : rs[i] <= mu[i] + tol;
    if (!ok) throw std::invalid_argument("TransportPlan: row marginal violated");
  }
  for (std::size_t j = 0; j < cols; ++j) {
    const bool ok = kind == PlanKind::ExactCoupling ? std::abs(cs[j] - nu[j]) <= tol
                                                     : cs[j] <= nu[j] + tol;
    if (!ok) throw std::invalid_argument("TransportPlan: column marginal violated");
  }
  if (total_mass() > 1.0 + tol) throw std::invalid_argument("TransportPlan: total mass > 1");
}

TransportPlan TransportPlan::from_mass(std::size_t rows, std::size_t cols,
                                       std::vector<double> mass) {
  TransportPlan p(rows, cols, std::move(mass), PlanKind::ExactCoupling);
  if (std::abs(p.total_mass() - 1.0) > kSolverTol)
    throw std::invalid_argument("TransportPlan: exact coupling must have mass 1");
  return p;
}

TransportPlan TransportPlan::zero(std::size_t rows, std::size_t cols) {
  return TransportPlan(rows, cols, std::vector<double>(rows * cols, 0.0), PlanKind::SubCoupling);
}

std::vector<double> TransportPlan::row_sums() const {
  std::vector<double> out(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out[i] += mass_[i * cols_ + j];
  return out;
}

std::vector<double> TransportPlan::col_sums() const {
  std::vector<double> out(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out[j] += mass_[i * cols_ + j];
  return out;
}

double TransportPlan::total_mass() const {
  return std::accumulate(mass_.begin(), mass_.end(), 0.0);
}

PotentialPair::PotentialPair(std::vector<Extended> phi, std::vector<Extended> psi)
    : phi_(std::move(phi)), psi_(std::move(psi)) {
  if (phi_.empty() || psi_.empty()) throw std::invalid_argument("PotentialPair: empty");
  for (const auto* v : {&phi_, &psi_})
    for (const Extended& e : *v)
      if (e.is_pos_inf()) throw std::invalid_argument("PotentialPair: +inf entry");
}

PotentialPair PotentialPair::finite(std::span<const double> phi, std::span<const double> psi) {
  std::vector<Extended> a, b;
  a.reserve(phi.size());
  b.reserve(psi.size());
  for (double v : phi) a.emplace_back(v);
  for (double v : psi) b.emplace_back(v);
  return PotentialPair(std::move(a), std::move(b));
}

bool PotentialPair::all_finite() const {
  auto fin = [](const Extended& e) { return e.is_finite(); };
  return std::all_of(phi_.begin(), phi_.end(), fin) && std::all_of(psi_.begin(), psi_.end(), fin);
}

Extended PotentialPair::l1_norm(const Marginal& mu, const Marginal& nu) const {
  if (mu.size() != phi_.size() || nu.size() != psi_.size())
    throw std::invalid_argument("PotentialPair: marginal shape mismatch");
  double total = 0.0;
  auto add = [&](std::span<const Extended> v, const Marginal& m) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (m[i] == 0.0) continue;
      if (!v[i].is_finite()) return false;
      total += std::abs(v[i].value()) * m[i];
    }
    return true;
  };
  if (!add(phi_, mu) || !add(psi_, nu)) return Extended::infinity();
  return Extended(total);
}

Extended PotentialPair::dual_objective(const Marginal& mu, const Marginal& nu) const {
  if (mu.size() != phi_.size() || nu.size() != psi_.size())
    throw std::invalid_argument("PotentialPair: marginal shape mismatch");
  Extended total(0.0);
  for (std::size_t i = 0; i < phi_.size(); ++i) total = total + scale(mu[i], phi_[i]);
  for (std::size_t j = 0; j < psi_.size(); ++j) total = total + scale(nu[j], psi_[j]);
  return total;
}

PotentialPair PotentialPair::gauge_normalized(const Marginal& mu) const {
  if (mu.size() != phi_.size()) throw std::invalid_argument("gauge: marginal shape mismatch");
  Extended m(0.0);
  for (std::size_t i = 0; i < phi_.size(); ++i) m = m + scale(mu[i], phi_[i]);
  if (!m.is_finite()) throw std::domain_error("gauge: phi is -inf on a charged point");
  std::vector<Extended> a(phi_), b(psi_);
  for (auto& e : a) e = e - m;
  for (auto& e : b) e = e + m;
  return PotentialPair(std::move(a), std::move(b));
}

double DualityReport::gap() const {
  if (primal_value.is_finite() && dual_value.is_finite())
    return primal_value.value() - dual_value.value();
  return 0.0;
}

Extended transport_cost(const CostMatrix& c, const TransportPlan& pi) {
  check_shape(c, pi);
  double total = 0.0;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) {
      const double m = pi(i, j);
      if (m == 0.0) continue;
      if (!c.is_finite(i, j)) return Extended::infinity();
      total += c.finite_value(i, j) * m;
    }
  return Extended(total);
}

Extended j_c(const PotentialPair& pp, const TransportPlan& pi) {
  if (pp.phi().size() != pi.rows() || pp.psi().size() != pi.cols())
    throw std::invalid_argument("j_c: shape mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < pi.rows(); ++i)
    for (std::size_t j = 0; j < pi.cols(); ++j) {
      const double m = pi(i, j);
      if (m == 0.0) continue;
      const Extended s = pp.sum(i, j);
      if (s.is_neg_inf()) return Extended::neg_infinity();
      total += s.value() * m;
    }
  return Extended(total);
}

TransportPlan mixture_plan(std::span<const TransportPlan> plans, std::span<const double> weights) {
  if (plans.empty()) throw std::invalid_argument("mixture_plan: empty list");
  if (plans.size() != weights.size()) throw std::invalid_argument("mixture_plan: weight count");
  double wsum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("mixture_plan: negative weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > kConstructionTol)
    throw std::invalid_argument("mixture_plan: weights do not sum to 1");
  const std::size_t rows = plans.front().rows(), cols = plans.front().cols();
  std::vector<double> mass(rows * cols, 0.0);
  for (std::size_t p = 0; p < plans.size(); ++p) {
    const TransportPlan& plan = plans[p];
    if (plan.rows() != rows || plan.cols() != cols)
      throw std::invalid_argument("mixture_plan: shape mismatch");
    if (plan.kind() != PlanKind::ExactCoupling)
      throw std::invalid_argument("mixture_plan: plans must be exact couplings");
    if (weights[p] == 0.0) continue;
    const auto src = plan.mass();
    for (std::size_t k = 0; k < mass.size(); ++k) mass[k] += weights[p] * src[k];
  }
  return TransportPlan::from_mass(rows, cols, std::move(mass));
}

Domination plan_dominates(const TransportPlan& pi1, const TransportPlan& pi2) {
  if (pi1.rows() != pi2.rows() || pi1.cols() != pi2.cols()) return {};
  Domination d{true, 0.0};
  const auto a = pi1.mass(), b = pi2.mass();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] == 0.0) continue;
    if (b[k] == 0.0) return {};
    d.density_bound = std::max(d.density_bound, a[k] / b[k]);
  }
  return d;
}

}  // namespace mkdual
