#include "netplan/ambiguity.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace netplan {

namespace {

void check_moments(const MomentInfo& m) {
  if (!(m.mean > 0.0) || !std::isfinite(m.mean))
    throw std::invalid_argument("moment mean must be positive");
  if (m.variance < 0.0 || !std::isfinite(m.variance))
    throw std::invalid_argument("moment variance must be nonnegative");
}

void check_d(double d_tilde) {
  if (!(d_tilde >= 0.0) || !std::isfinite(d_tilde))
    throw std::invalid_argument("satisfied demand must be nonnegative");
}

}  // namespace

double TwoPointDistribution::expected_shortfall(double d_tilde) const {
  return lower_mass * std::max(lower_point - d_tilde, 0.0) +
         upper_mass * std::max(upper_point - d_tilde, 0.0);
}

double threshold(const MomentInfo& m) {
  check_moments(m);
  return (m.mean * m.mean + m.variance) / (2.0 * m.mean);
}

double worst_case_shortfall(double d_tilde, const MomentInfo& m) {
  check_moments(m);
  check_d(d_tilde);
  if (m.variance == 0.0) return std::max(m.mean - d_tilde, 0.0);
  const double mu = m.mean, s2 = m.variance;
  if (d_tilde > threshold(m)) {
    const double dev = d_tilde - mu;
    return 0.5 * (mu - d_tilde + std::sqrt(dev * dev + s2));
  }
  return mu - d_tilde * (mu * mu) / (mu * mu + s2);
}

double shortfall_derivative(double d_tilde, const MomentInfo& m) {
  check_moments(m);
  check_d(d_tilde);
  const double mu = m.mean, s2 = m.variance;
  if (m.variance == 0.0) return d_tilde < mu ? -1.0 : 0.0;
  if (d_tilde > threshold(m)) {
    const double dev = d_tilde - mu;
    return 0.5 * (dev / std::sqrt(dev * dev + s2) - 1.0);
  }
  return -(mu * mu) / (mu * mu + s2);
}

TwoPointDistribution worst_case_distribution(double d_tilde, const MomentInfo& m) {
  check_moments(m);
  check_d(d_tilde);
  if (m.variance == 0.0)
    throw std::invalid_argument(
        "degenerate moments (variance 0) have a point-mass worst case, not a "
        "two-point law");
  const double mu = m.mean, s2 = m.variance;
  TwoPointDistribution out;
  if (d_tilde > threshold(m)) {
    const double dev = d_tilde - mu;
    const double chi2 = d_tilde + std::sqrt(dev * dev + s2);
    const double off = chi2 - mu;
    const double q = off * off / (s2 + off * off);
    out.upper_point = chi2;
    out.upper_mass = 1.0 - q;
    out.lower_mass = q;
    out.lower_point = (mu - (1.0 - q) * chi2) / q;
  } else {
    out.lower_point = 0.0;
    out.upper_point = (s2 + mu * mu) / mu;
    out.lower_mass = s2 / (s2 + mu * mu);
    out.upper_mass = mu * mu / (s2 + mu * mu);
  }
  return out;
}

double multi_commodity_shortfall(std::span<const double> d_tilde,
                                 std::span<const MomentInfo> moments) {
  if (d_tilde.size() != moments.size())
    throw std::invalid_argument("satisfied-demand vector and moments differ in length");
  double total = 0.0;
  for (std::size_t k = 0; k < moments.size(); ++k)
    total += worst_case_shortfall(d_tilde[k], moments[k]);
  return total;
}

void write_shortfall_curve(const MomentInfo& m, double d_max, double step,
                           std::ostream& out) {
  check_moments(m);
  if (!(step > 0.0) || !(d_max >= 0.0))
    throw std::invalid_argument("curve needs d_max >= 0 and step > 0");
  out << "d_tilde,shortfall\n";
  char buf[80];
  const int steps = static_cast<int>(std::floor(d_max / step + 1e-9));
  for (int i = 0; i <= steps; ++i) {
    const double d = i * step;
    std::snprintf(buf, sizeof buf, "%.6f,%.6f\n", d, worst_case_shortfall(d, m));
    out << buf;
  }
}

}  // namespace netplan
