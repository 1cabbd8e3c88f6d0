#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace netplan {

/// First two moments of a single commodity's demand; together they define
/// the ambiguity set of all distributions sharing them.
struct MomentInfo {
  double mean = 0.0;      // mu > 0
  double variance = 0.0;  // sigma^2 >= 0; 0 collapses to a point mass at mu
};

/// Nature's worst-case demand law: two support points with their masses.
struct TwoPointDistribution {
  double lower_point = 0.0;
  double upper_point = 0.0;
  double lower_mass = 0.0;
  double upper_mass = 0.0;

  double mean() const { return lower_mass * lower_point + upper_mass * upper_point; }
  double variance() const {
    const double m = mean();
    return lower_mass * (lower_point - m) * (lower_point - m) +
           upper_mass * (upper_point - m) * (upper_point - m);
  }
  /// E[max(d - d_tilde, 0)] under this law.
  double expected_shortfall(double d_tilde) const;
};

/// Branch point (mu^2 + sigma^2) / (2 mu) separating the two closed forms.
double threshold(const MomentInfo& m);

/// N(d_tilde): the worst-case expected unmet demand over all distributions
/// with the given moments. Decreasing and convex in d_tilde; N(0) = mu.
double worst_case_shortfall(double d_tilde, const MomentInfo& m);

/// dN/dd_tilde; constant -mu^2/(mu^2+sigma^2) at and below the threshold.
double shortfall_derivative(double d_tilde, const MomentInfo& m);

/// The two-point law attaining N(d_tilde). Requires variance > 0 (a point
/// mass cannot be represented by two distinct support points).
TwoPointDistribution worst_case_distribution(double d_tilde, const MomentInfo& m);

/// Sum of per-commodity worst cases; nature's problem separates over
/// commodities.
double multi_commodity_shortfall(std::span<const double> d_tilde,
                                 std::span<const MomentInfo> moments);

/// CSV of (d_tilde, N(d_tilde)) sampled on [0, d_max] with the given step.
void write_shortfall_curve(const MomentInfo& m, double d_max, double step,
                           std::ostream& out);

}  // namespace netplan
