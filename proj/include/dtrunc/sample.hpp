#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dtrunc {

/**
 * Doubly truncated observations (X_i, U_i, V_i), each satisfying U_i <= X_i <= V_i,
 * with optional covariate rows and competing-event labels.
 *
 * Instances are validated on construction and immutable afterwards.
 */
class TruncatedSample {
 public:
  TruncatedSample() = default;

  /// Throws ValidationError listing every offending record.
  TruncatedSample(std::vector<double> x, std::vector<double> u, std::vector<double> v,
                  Eigen::MatrixXd z = {}, std::vector<std::string> z_names = {},
                  std::vector<int> event = {});

  std::size_t size() const noexcept { return x_.size(); }
  bool empty() const noexcept { return x_.empty(); }

  std::span<const double> x() const noexcept { return x_; }
  std::span<const double> u() const noexcept { return u_; }
  std::span<const double> v() const noexcept { return v_; }

  double x(std::size_t i) const { return x_[i]; }
  double u(std::size_t i) const { return u_[i]; }
  double v(std::size_t i) const { return v_[i]; }

  bool has_covariates() const noexcept { return z_.cols() > 0; }
  std::size_t covariate_count() const noexcept { return static_cast<std::size_t>(z_.cols()); }
  const Eigen::MatrixXd& z() const noexcept { return z_; }
  const std::vector<std::string>& z_names() const noexcept { return z_names_; }

  bool has_events() const noexcept { return !event_.empty(); }
  std::span<const int> event() const noexcept { return event_; }

  /// Records at the given indices, in that order; duplicates allowed (bootstrap draws).
  TruncatedSample subset(std::span<const std::size_t> indices) const;
  TruncatedSample with_events(std::vector<int> event) const;
  TruncatedSample without_covariates() const;

  friend bool operator==(const TruncatedSample& a, const TruncatedSample& b);

 private:
  std::vector<double> x_, u_, v_;
  Eigen::MatrixXd z_;
  std::vector<std::string> z_names_;
  std::vector<int> event_;
};

/// Step cdf with mass on strictly increasing support points.
class StepDistribution {
 public:
  StepDistribution() = default;
  StepDistribution(std::vector<double> support, std::vector<double> mass);

  std::size_t size() const noexcept { return support_.size(); }
  const std::vector<double>& support() const noexcept { return support_; }
  const std::vector<double>& mass() const noexcept { return mass_; }
  const std::vector<double>& cumulative() const noexcept { return cumulative_; }

  /// F(t) = sum of mass at support <= t.
  double cdf(double t) const;
  /// F(t-) = sum of mass at support < t.
  double cdf_left(double t) const;

 private:
  std::vector<double> support_;
  std::vector<double> mass_;
  std::vector<double> cumulative_;
};

double eval_cdf(const StepDistribution& f, double t);
double eval_cdf_leftlimit(const StepDistribution& f, double t);

/// Counts behind the necessary condition for existence and uniqueness of the NPMLE.
struct ExistenceReport {
  std::vector<std::size_t> s1;  ///< #{k : U_k <= X_i <= V_k}
  std::vector<std::size_t> s2;  ///< #{k : U_i <= X_k <= V_i}
  bool ok = false;
  std::vector<std::size_t> violating_indices;  ///< 0-based, ascending
};

ExistenceReport existence_check(const TruncatedSample& s);

// ---------------------------------------------------------------------------
// Ingestion

struct ColumnMap {
  std::string x = "x";
  std::string u = "u";
  std::string v = "v";
  /// Empty means: every header named "z" or "z<digits>".
  std::vector<std::string> z;
  /// Empty means: use a column named "event" when present.
  std::string event;
};

struct LoadOptions {
  ColumnMap columns;
  /// Drop records violating U <= X <= V instead of failing.
  bool drop_invalid = false;
};

struct LoadResult {
  TruncatedSample sample;
  std::vector<std::size_t> dropped_rows;  ///< 1-based data rows removed under drop_invalid
};

/**
 * Reads a header-first table separated by commas or whitespace.
 *
 * A header with one fewer field than the data rows is treated as having a
 * leading unnamed row-label column, which is skipped.
 */
LoadResult read_sample(std::istream& in, const LoadOptions& options = {});
LoadResult load_sample(const std::string& path, const LoadOptions& options = {});

/// Comma-separated with shortest round-trip number formatting.
void write_sample(std::ostream& out, const TruncatedSample& s);

}  // namespace dtrunc
