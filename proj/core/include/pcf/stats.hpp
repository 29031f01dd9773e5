#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pcf {

/// Two-sided 99% normal quantile used for descriptive confidence intervals.
inline constexpr double kZ995 = 2.5758293035489004;

struct DescriptiveStats {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  double sample_std = 0.0;  // n - 1 denominator; 0 when n == 1
  std::array<double, 2> ci99{};
};

/// Throws EmptyInput.
DescriptiveStats descriptive(std::span<const double> values);

/// Linear-interpolation sample quantile (numpy's default) of sorted data.
double quantile_sorted(std::span<const double> sorted, double q);

/// Dense row-major design matrix.
class DesignMatrix {
 public:
  DesignMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  /// Throws DimensionMismatch on ragged columns.
  static DesignMatrix from_columns(const std::vector<std::vector<double>>& columns);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  [[nodiscard]] const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

struct RegressionFit {
  std::vector<std::string> terms;
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> t_stats;
  std::vector<double> p_values;
  std::vector<std::array<double, 2>> ci95;
  double r_squared = 0.0;
  double adj_r_squared = 0.0;
  double f_statistic = 0.0;
  double f_p_value = 0.0;
  double log_likelihood = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::size_t n_obs = 0;
  std::size_t df_model = 0;
  std::size_t df_resid = 0;
  std::vector<double> fitted;
  std::vector<double> residuals;
};

/// Least squares via column-pivoted Householder QR. `design` must carry an
/// intercept column. Errors: DimensionMismatch, RankDeficient,
/// DegenerateResponse (constant y).
RegressionFit ols(const DesignMatrix& design, std::span<const double> y, std::vector<std::string> terms = {});

/// Two-sided Student-t tail probability; normal approximation for df > 1e5.
double two_sided_p(double t, double df);
/// Upper (1 - alpha/2) Student-t quantile; normal for df > 1e5.
double t_critical(double alpha, double df);

struct Diagnostics {
  double skew = 0.0;
  double kurtosis = 0.0;  // non-excess
  double jarque_bera = 0.0;
  double jb_p_value = 0.0;
  double durbin_watson = 0.0;
};

/// Throws InsufficientData for fewer than 8 residuals.
Diagnostics diagnostics(std::span<const double> residuals);

/// Clamped B-spline basis with interior knots at equally spaced sample quantiles.
class BSplineBasis {
 public:
  /// `df - degree` interior knots at the k/(df - degree + 1) quantiles of x;
  /// boundary knots at min/max. Errors: DegenerateX, InsufficientData.
  static BSplineBasis from_sample(std::span<const double> x, int degree, int df);
  BSplineBasis(int degree, std::vector<double> interior, double lower, double upper);

  [[nodiscard]] int degree() const noexcept { return degree_; }
  [[nodiscard]] const std::vector<double>& interior_knots() const noexcept { return interior_; }
  [[nodiscard]] double lower() const noexcept { return lower_; }
  [[nodiscard]] double upper() const noexcept { return upper_; }
  [[nodiscard]] const std::vector<double>& knot_vector() const noexcept { return knots_; }
  /// df + 1 functions; they sum to one everywhere on [lower, upper].
  [[nodiscard]] std::size_t full_size() const noexcept { return knots_.size() - static_cast<std::size_t>(degree_) - 1; }
  /// df, the first (lowest) function being absorbed by the model intercept.
  [[nodiscard]] std::size_t df() const noexcept { return full_size() - 1; }

  /// All basis functions at x; throws IndexOutOfRange outside [lower, upper].
  [[nodiscard]] std::vector<double> evaluate_full(double x) const;
  /// The df regression columns at x.
  [[nodiscard]] std::vector<double> evaluate(double x) const;

 private:
  int degree_;
  std::vector<double> interior_;
  double lower_;
  double upper_;
  std::vector<double> knots_;
};

struct BasisMatrix {
  BSplineBasis basis;
  DesignMatrix values;  // rows = observations, cols = df
};

BasisMatrix bspline_basis(std::span<const double> x, int degree, int df);

struct SplineFit {
  RegressionFit fit;  // Intercept, Star_Level, bs[0..df-1]
  BSplineBasis basis;

  [[nodiscard]] double predict(double star_level, double time) const;
};

/// satisfaction ~ 1 + star_level + bs(time, degree=3, df).
/// Errors: DimensionMismatch, InsufficientData, plus those of ols.
SplineFit spline_fit(std::span<const double> time, std::span<const double> star_level,
                     std::span<const double> satisfaction, int df = 5);

}  // namespace pcf
