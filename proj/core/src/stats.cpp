#include "pcf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "pcf/error.hpp"

namespace pcf {

namespace {

constexpr double kNormalApproxDf = 1e5;

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "quantile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

DescriptiveStats descriptive(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "descriptive statistics of empty data");
  DescriptiveStats s;
  s.n = values.size();
  const double n = static_cast<double>(s.n);

  CompensatedSum sum;
  for (double v : values) sum.add(v);
  s.mean = sum.value() / n;

  CompensatedSum sq;
  for (double v : values) sq.add((v - s.mean) * (v - s.mean));
  s.sample_std = s.n > 1 ? std::sqrt(sq.value() / (n - 1.0)) : 0.0;

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  const std::size_t mid = s.n / 2;
  s.median = s.n % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);

  const double half = kZ995 * s.sample_std / std::sqrt(n);
  s.ci99 = {s.mean - half, s.mean + half};
  return s;
}

DesignMatrix DesignMatrix::from_columns(const std::vector<std::vector<double>>& columns) {
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  DesignMatrix m(rows, columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].size() != rows) throw Error(ErrorCode::DimensionMismatch, "ragged design columns");
    for (std::size_t r = 0; r < rows; ++r) m(r, c) = columns[c][r];
  }
  return m;
}

double two_sided_p(double t, double df) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const double a = std::abs(t);
  if (df > kNormalApproxDf) return 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), a));
  return 2.0 * boost::math::cdf(boost::math::complement(boost::math::students_t(df), a));
}

double t_critical(double alpha, double df) {
  const double p = 1.0 - alpha / 2.0;
  if (df > kNormalApproxDf) return boost::math::quantile(boost::math::normal(), p);
  return boost::math::quantile(boost::math::students_t(df), p);
}

RegressionFit ols(const DesignMatrix& design, std::span<const double> y, std::vector<std::string> terms) {
  const std::size_t n = design.rows();
  const std::size_t p = design.cols();
  if (y.size() != n) throw Error(ErrorCode::DimensionMismatch, "response length differs from design rows");
  if (p == 0 || n < p) throw Error(ErrorCode::DimensionMismatch, "need at least as many rows as columns");
  if (!terms.empty() && terms.size() != p) throw Error(ErrorCode::DimensionMismatch, "term names vs columns");

  CompensatedSum ysum;
  for (double v : y) ysum.add(v);
  const double ybar = ysum.value() / static_cast<double>(n);
  CompensatedSum sst_sum;
  for (double v : y) sst_sum.add((v - ybar) * (v - ybar));
  const double sst = sst_sum.value();
  if (!(sst > 0.0)) throw Error(ErrorCode::DegenerateResponse, "response is constant");

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::MatrixXd X = Eigen::Map<const RowMajor>(design.data().data(), static_cast<Eigen::Index>(n),
                                                       static_cast<Eigen::Index>(p));
  const Eigen::Map<const Eigen::VectorXd> Y(y.data(), static_cast<Eigen::Index>(n));

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (static_cast<std::size_t>(qr.rank()) < p) {
    throw Error(ErrorCode::RankDeficient, "design rank " + std::to_string(qr.rank()) + " < " + std::to_string(p));
  }
  const Eigen::VectorXd beta = qr.solve(Y);

  // (X'X)^-1 = P R^-1 R^-T P'
  const auto pi = static_cast<Eigen::Index>(p);
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(pi, pi).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(pi, pi));
  const Eigen::MatrixXd xtx_inv = qr.colsPermutation() * (Rinv * Rinv.transpose()) * qr.colsPermutation().transpose();

  RegressionFit fit;
  fit.terms = terms.empty() ? std::vector<std::string>(p) : std::move(terms);
  if (fit.terms.front().empty()) {
    for (std::size_t j = 0; j < p; ++j) fit.terms[j] = j == 0 ? "Intercept" : "x" + std::to_string(j);
  }
  fit.n_obs = n;
  fit.df_model = p - 1;
  fit.df_resid = n - p;

  const Eigen::VectorXd fitted = X * beta;
  fit.fitted.assign(fitted.data(), fitted.data() + fitted.size());
  fit.residuals.resize(n);
  CompensatedSum ssr_sum;
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = y[i] - fit.fitted[i];
    ssr_sum.add(fit.residuals[i] * fit.residuals[i]);
  }
  const double ssr = ssr_sum.value();
  const double df_resid = static_cast<double>(fit.df_resid);
  const double sigma2 = fit.df_resid > 0 ? ssr / df_resid : std::numeric_limits<double>::quiet_NaN();
  const double tcrit = fit.df_resid > 0 ? t_critical(0.05, df_resid) : std::numeric_limits<double>::quiet_NaN();

  for (std::size_t j = 0; j < p; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double b = beta(jj);
    const double se = std::sqrt(sigma2 * xtx_inv(jj, jj));
    double t = b / se;
    if (se == 0.0) t = b == 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::copysign(INFINITY, b);
    fit.coefficients.push_back(b);
    fit.std_errors.push_back(se);
    fit.t_stats.push_back(t);
    fit.p_values.push_back(fit.df_resid > 0 ? two_sided_p(t, df_resid) : std::numeric_limits<double>::quiet_NaN());
    fit.ci95.push_back({b - tcrit * se, b + tcrit * se});
  }

  const double nd = static_cast<double>(n);
  const double pd = static_cast<double>(p);
  fit.r_squared = 1.0 - ssr / sst;
  fit.adj_r_squared = fit.df_resid > 0 ? 1.0 - (1.0 - fit.r_squared) * (nd - 1.0) / df_resid
                                       : std::numeric_limits<double>::quiet_NaN();
  if (p >= 2 && fit.df_resid > 0) {
    fit.f_statistic = ((sst - ssr) / (pd - 1.0)) / (ssr / df_resid);
    fit.f_p_value = std::isfinite(fit.f_statistic)
                        ? boost::math::cdf(boost::math::complement(boost::math::fisher_f(pd - 1.0, df_resid),
                                                                   fit.f_statistic))
                        : 0.0;
  } else {
    fit.f_statistic = std::numeric_limits<double>::quiet_NaN();
    fit.f_p_value = std::numeric_limits<double>::quiet_NaN();
  }
  fit.log_likelihood = -0.5 * nd * (std::log(2.0 * std::numbers::pi) + std::log(ssr / nd) + 1.0);
  fit.aic = 2.0 * pd - 2.0 * fit.log_likelihood;
  fit.bic = pd * std::log(nd) - 2.0 * fit.log_likelihood;
  return fit;
}

Diagnostics diagnostics(std::span<const double> residuals) {
  const std::size_t n = residuals.size();
  if (n < 8) throw Error(ErrorCode::InsufficientData, "need at least 8 residuals, got " + std::to_string(n));
  const double nd = static_cast<double>(n);

  CompensatedSum s1;
  for (double e : residuals) s1.add(e);
  const double mean = s1.value() / nd;
  CompensatedSum m2s, m3s, m4s, num, den;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = residuals[i] - mean;
    const double d2 = d * d;
    m2s.add(d2);
    m3s.add(d2 * d);
    m4s.add(d2 * d2);
    den.add(residuals[i] * residuals[i]);
    if (i > 0) {
      const double diff = residuals[i] - residuals[i - 1];
      num.add(diff * diff);
    }
  }
  const double m2 = m2s.value() / nd;
  const double m3 = m3s.value() / nd;
  const double m4 = m4s.value() / nd;

  Diagnostics d;
  d.skew = m3 / std::pow(m2, 1.5);
  d.kurtosis = m4 / (m2 * m2);
  d.jarque_bera = nd / 6.0 * (d.skew * d.skew + 0.25 * (d.kurtosis - 3.0) * (d.kurtosis - 3.0));
  d.jb_p_value = std::exp(-0.5 * d.jarque_bera);  // chi-square survival with 2 df
  d.durbin_watson = num.value() / den.value();
  return d;
}

BSplineBasis::BSplineBasis(int degree, std::vector<double> interior, double lower, double upper)
    : degree_(degree), interior_(std::move(interior)), lower_(lower), upper_(upper) {
  if (degree_ < 0) throw Error(ErrorCode::InsufficientData, "negative spline degree");
  if (!(lower_ < upper_)) throw Error(ErrorCode::DegenerateX, "spline boundary has zero width");
  knots_.assign(static_cast<std::size_t>(degree_) + 1, lower_);
  knots_.insert(knots_.end(), interior_.begin(), interior_.end());
  knots_.insert(knots_.end(), static_cast<std::size_t>(degree_) + 1, upper_);
}

BSplineBasis BSplineBasis::from_sample(std::span<const double> x, int degree, int df) {
  if (degree < 1 || df < degree) {
    throw Error(ErrorCode::InsufficientData, "need degree >= 1 and df >= degree");
  }
  if (x.empty()) throw Error(ErrorCode::EmptyInput, "spline basis of empty data");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) throw Error(ErrorCode::DegenerateX, "all x values are equal");
  const int n_interior = df - degree;
  std::vector<double> interior;
  for (int k = 1; k <= n_interior; ++k) {
    interior.push_back(quantile_sorted(sorted, static_cast<double>(k) / static_cast<double>(n_interior + 1)));
  }
  return {degree, std::move(interior), sorted.front(), sorted.back()};
}

std::vector<double> BSplineBasis::evaluate_full(double x) const {
  if (x < lower_ || x > upper_ || std::isnan(x)) {
    throw Error(ErrorCode::IndexOutOfRange, "x outside the spline boundary");
  }
  const auto p = static_cast<std::size_t>(degree_);
  const std::size_t m = full_size();
  // span index s with knots[s] <= x < knots[s+1]; the last non-empty span is closed on the right
  std::size_t s = p;
  if (x >= upper_) {
    s = m - 1;
    while (s > p && knots_[s] == knots_[s + 1]) --s;
  } else {
    s = static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), x) - knots_.begin()) - 1;
  }

  // Cox-de Boor triangle for the p+1 functions that are non-zero on span s
  std::vector<double> local(p + 1, 0.0), left(p + 1, 0.0), right(p + 1, 0.0);
  local[0] = 1.0;
  for (std::size_t j = 1; j <= p; ++j) {
    left[j] = x - knots_[s + 1 - j];
    right[j] = knots_[s + j] - x;
    double saved = 0.0;
    for (std::size_t r = 0; r < j; ++r) {
      const double tmp = local[r] / (right[r + 1] + left[j - r]);
      local[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    local[j] = saved;
  }
  std::vector<double> out(m, 0.0);
  for (std::size_t r = 0; r <= p; ++r) out[s - p + r] = local[r];
  return out;
}

std::vector<double> BSplineBasis::evaluate(double x) const {
  auto full = evaluate_full(x);
  full.erase(full.begin());
  return full;
}

BasisMatrix bspline_basis(std::span<const double> x, int degree, int df) {
  auto basis = BSplineBasis::from_sample(x, degree, df);
  DesignMatrix values(x.size(), basis.df());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto row = basis.evaluate(x[i]);
    for (std::size_t j = 0; j < row.size(); ++j) values(i, j) = row[j];
  }
  return {std::move(basis), std::move(values)};
}

double SplineFit::predict(double star_level, double time) const {
  const auto& c = fit.coefficients;
  double y = c[0] + c[1] * star_level;
  const auto b = basis.evaluate(time);
  for (std::size_t j = 0; j < b.size(); ++j) y += c[2 + j] * b[j];
  return y;
}

SplineFit spline_fit(std::span<const double> time, std::span<const double> star_level,
                     std::span<const double> satisfaction, int df) {
  const std::size_t n = time.size();
  if (star_level.size() != n || satisfaction.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "time, star_level and satisfaction differ in length");
  }
  if (n < 8) throw Error(ErrorCode::InsufficientData, "spline fit needs at least 8 observations");
  constexpr int kDegree = 3;
  auto basis = bspline_basis(time, kDegree, df);

  const std::size_t cols = 2 + basis.basis.df();
  DesignMatrix X(n, cols);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = star_level[i];
    for (std::size_t j = 0; j < basis.basis.df(); ++j) X(i, 2 + j) = basis.values(i, j);
  }
  std::vector<std::string> terms{"Intercept", "Star_Level"};
  for (std::size_t j = 0; j < basis.basis.df(); ++j) {
    terms.push_back("bs(total_time_per_meal, degree=3, df=" + std::to_string(df) + ")[" + std::to_string(j) + "]");
  }
  return {ols(X, satisfaction, std::move(terms)), std::move(basis.basis)};
}

}  // namespace pcf
