#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qfconv {

struct DataPoint {
  double x = 0;
  double y = 0;
  /// One-sigma uncertainty on y; 0 means "not provided".
  double sigma = 0;
};

/// Ordered (x, y, sigma) triples with axis labels.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::string x_label, std::string y_label) : x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

  void add(double x, double y, double sigma = 0.0);

  const std::vector<DataPoint>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const DataPoint& operator[](std::size_t i) const { return points_[i]; }

  const std::string& x_label() const noexcept { return x_label_; }
  const std::string& y_label() const noexcept { return y_label_; }

  /// True when every point carries sigma > 0.
  bool has_uncertainties() const noexcept;
  /// Copy sorted by x; throws ValidationError on repeated x.
  Dataset sorted() const;

 private:
  std::string x_label_ = "x";
  std::string y_label_ = "y";
  std::vector<DataPoint> points_;
};

struct Estimate {
  std::string name;
  double value = 0;
  double std_error = 0;
  /// Half-width of the two-sided 95% confidence interval.
  double ci_half_width = 0;
};

struct FitResult {
  std::vector<Estimate> params;
  /// Row-major covariance of `params`.
  std::vector<double> covariance;
  /// Row-major parameter correlations; set by the design alone, so defined for exact data.
  std::vector<double> correlations;
  /// Quantities computed from the parameters (e.g. eta_n L^2).
  std::vector<Estimate> derived;
  double rss = 0;
  int dof = 0;
  int iterations = 0;
  /// Parameters not separately identifiable from the data.
  bool ill_conditioned = false;

  const Estimate& param(std::string_view name) const;
  const Estimate& derived_value(std::string_view name) const;
  double cov(std::size_t i, std::size_t j) const { return covariance[i * params.size() + j]; }
  double correlation(std::size_t i, std::size_t j) const { return correlations[i * params.size() + j]; }
};

struct FitOptions {
  /// Weight by 1/sigma^2 when every point has an uncertainty; unit weights otherwise.
  bool use_weights = true;
  int max_iterations = 200;
};

/// Two-sided 95% Student-t quantile; infinity when dof <= 0.
double t_quantile_95(int dof);

/// Weighted least squares y = slope x (+ intercept) via the normal equations.
FitResult fit_linear(const Dataset& data, bool force_zero_intercept, const FitOptions& options = {});

/// Weighted linear least squares on arbitrary basis functions.
FitResult fit_linear_basis(const Dataset& data, std::span<const std::function<double(double)>> basis,
                           std::span<const std::string> names, const FitOptions& options = {});

/// A model y = f(x; p) with its gradient with respect to p.
struct NonlinearModel {
  std::vector<std::string> names;
  std::function<double(double, std::span<const double>)> value;
  std::function<void(double, std::span<const double>, std::span<double>)> gradient;
};

/// Gauss-Newton with Levenberg damping. Throws FitError (carrying the best
/// parameters) when it does not converge within `max_iterations`.
FitResult fit_nonlinear(const Dataset& data, const NonlinearModel& model, std::vector<double> initial,
                        const FitOptions& options = {});

/// The conversion curve eta_ext^M sin^2(L sqrt(P eta_n)) with x = P in mW.
NonlinearModel conversion_model(double length_cm);

/// Fits (eta_ext_max, eta_n) to external-efficiency vs pump-power (mW) data.
/// Derived: "eta_n_L2" (1/W). Flags ill-conditioning when the data stay in
/// the quasi-linear part of the curve.
FitResult fit_conversion(const Dataset& data, double length_cm, const FitOptions& options = {});

/// SNR = mu / mu1 through the origin; returns mu1 with its uncertainty.
/// Throws NumericalError when SNR = 1 is not reached within the data range.
Estimate extract_mu1(const Dataset& snr_vs_mu, const FitOptions& options = {});

/// Gaussian A exp(-(x - c)^2 / (2 s^2)); derived "fwhm".
FitResult fit_gaussian(const Dataset& data, const FitOptions& options = {});

/// Delta-method 95% band of a fitted model at x: {value, half_width}.
std::pair<double, double> prediction_band(const FitResult& fit, const NonlinearModel& model, double x);

struct SweepRange {
  double start = 0;
  double stop = 0;
  std::size_t points = 1;

  /// Evenly spaced grid; start == stop yields a single point.
  std::vector<double> grid() const;
};

struct Observation {
  double y = 0;
  double sigma = 0;
};

/// Evaluates `observable` over the grid in order. Inner errors are rethrown
/// with the failing grid point in the message, keeping their type.
Dataset sweep(const SweepRange& range, const std::function<Observation(double)>& observable,
              std::string x_label = "x", std::string y_label = "y");

}  // namespace qfconv
