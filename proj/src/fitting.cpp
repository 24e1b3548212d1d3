#include "qfconv/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qfconv/errors.hpp"

namespace qfconv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// |corr(eta_ext_max, eta_n)| above this means the data only constrain their product.
constexpr double kIllConditionedCorrelation = 0.99;

Eigen::VectorXd weights_for(const Dataset& data, const FitOptions& options) {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(data.size()));
  if (options.use_weights && data.has_uncertainties()) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      w[static_cast<Eigen::Index>(i)] = 1.0 / (data[i].sigma * data[i].sigma);
    }
  }
  return w;
}

// Fills covariance, standard errors and CIs from the unscaled (J^T W J)^-1.
void finish_uncertainties(FitResult& fit, const Eigen::MatrixXd& normal_inverse) {
  const auto k = static_cast<std::size_t>(normal_inverse.rows());
  const double variance = fit.dof > 0 ? fit.rss / fit.dof : kInf;
  const double t = t_quantile_95(fit.dof);
  fit.covariance.assign(k * k, 0.0);
  fit.correlations.assign(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double c = normal_inverse(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      fit.covariance[i * k + j] = fit.dof > 0 ? variance * c : (i == j ? kInf : 0.0);
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      fit.correlations[i * k + j] = c / std::sqrt(normal_inverse(ii, ii) * normal_inverse(jj, jj));
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    fit.params[i].std_error = std::sqrt(fit.covariance[i * k + i]);
    fit.params[i].ci_half_width = t * fit.params[i].std_error;
  }
}

Eigen::MatrixXd invert_normal(const Eigen::MatrixXd& normal) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
  lu.setThreshold(1e-13);
  if (lu.rank() < normal.rows()) throw NumericalError("singular design matrix");
  return lu.inverse();
}

template <class Error>
[[noreturn]] void rethrow_at(double x, const std::string& what) {
  std::ostringstream os;
  os << "at grid point x = " << x << ": " << what;
  throw Error(os.str());
}

}  // namespace

void Dataset::add(double x, double y, double sigma) {
  if (!std::isfinite(x) || !std::isfinite(y)) throw ValidationError("dataset values must be finite");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be finite and >= 0");
  points_.push_back({x, y, sigma});
}

bool Dataset::has_uncertainties() const noexcept {
  return !points_.empty() &&
         std::all_of(points_.begin(), points_.end(), [](const DataPoint& p) { return p.sigma > 0.0; });
}

Dataset Dataset::sorted() const {
  Dataset out = *this;
  std::stable_sort(out.points_.begin(), out.points_.end(),
                   [](const DataPoint& a, const DataPoint& b) { return a.x < b.x; });
  for (std::size_t i = 1; i < out.points_.size(); ++i) {
    if (!(out.points_[i].x > out.points_[i - 1].x)) throw ValidationError("dataset has repeated x values");
  }
  return out;
}

const Estimate& FitResult::param(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("no fitted parameter named " + std::string(name));
}

const Estimate& FitResult::derived_value(std::string_view name) const {
  for (const auto& p : derived) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("no derived quantity named " + std::string(name));
}

double t_quantile_95(int dof) {
  if (dof <= 0) return kInf;
  boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(boost::math::complement(dist, 0.025));
}

FitResult fit_linear_basis(const Dataset& data, std::span<const std::function<double(double)>> basis,
                           std::span<const std::string> names, const FitOptions& options) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto k = static_cast<Eigen::Index>(basis.size());
  if (basis.empty() || names.size() != basis.size()) throw ValidationError("basis/name mismatch");
  if (n < k) throw ValidationError("need at least as many points as parameters");

  const Eigen::VectorXd w = weights_for(data, options);
  Eigen::MatrixXd xw(n, k);
  Eigen::VectorXd yw(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sw = std::sqrt(w[i]);
    const DataPoint& p = data[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < k; ++j) xw(i, j) = sw * basis[static_cast<std::size_t>(j)](p.x);
    yw[i] = sw * p.y;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xw);
  qr.setThreshold(1e-13);
  if (qr.rank() < k) throw NumericalError("singular design matrix (e.g. all x equal)");
  const Eigen::VectorXd beta = qr.solve(yw);
  const Eigen::VectorXd resid = yw - xw * beta;

  FitResult fit;
  fit.rss = resid.squaredNorm();
  fit.dof = static_cast<int>(n - k);
  for (Eigen::Index j = 0; j < k; ++j) fit.params.push_back({names[static_cast<std::size_t>(j)], beta[j], 0, 0});
  finish_uncertainties(fit, invert_normal(xw.transpose() * xw));
  return fit;
}

FitResult fit_linear(const Dataset& data, bool force_zero_intercept, const FitOptions& options) {
  const std::size_t needed = force_zero_intercept ? 1 : 2;
  if (data.size() < needed) throw ValidationError("not enough points for a linear fit");
  std::vector<std::function<double(double)>> basis{[](double x) { return x; }};
  std::vector<std::string> names{"slope"};
  if (!force_zero_intercept) {
    basis.emplace_back([](double) { return 1.0; });
    names.emplace_back("intercept");
  }
  return fit_linear_basis(data, basis, names, options);
}

FitResult fit_nonlinear(const Dataset& data, const NonlinearModel& model, std::vector<double> initial,
                        const FitOptions& options) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto k = static_cast<Eigen::Index>(initial.size());
  if (model.names.size() != initial.size()) throw ValidationError("parameter name/initial mismatch");
  if (n < k) throw ValidationError("need at least as many points as parameters");

  const Eigen::VectorXd w = weights_for(data, options);
  std::vector<double> grad(initial.size());

  auto cost_of = [&](const std::vector<double>& p) {
    double c = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const DataPoint& d = data[static_cast<std::size_t>(i)];
      const double r = d.y - model.value(d.x, p);
      c += w[i] * r * r;
    }
    return c;
  };
  auto linearize = [&](const std::vector<double>& p, Eigen::MatrixXd& normal, Eigen::VectorXd& g) {
    normal.setZero(k, k);
    g.setZero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      const DataPoint& d = data[static_cast<std::size_t>(i)];
      model.gradient(d.x, p, grad);
      const Eigen::Map<const Eigen::VectorXd> row(grad.data(), k);
      const double r = d.y - model.value(d.x, p);
      normal.noalias() += w[i] * row * row.transpose();
      g.noalias() += w[i] * r * row;
    }
  };

  std::vector<double> p = std::move(initial);
  double cost = cost_of(p);
  if (!std::isfinite(cost)) throw FitError("initial parameters give a non-finite residual", p);

  double lambda = 1e-3;
  Eigen::MatrixXd normal;
  Eigen::VectorXd g;
  bool converged = false;
  int it = 0;
  for (; it < options.max_iterations && !converged; ++it) {
    linearize(p, normal, g);
    bool accepted = false;
    while (lambda < 1e16) {
      Eigen::MatrixXd damped = normal;
      for (Eigen::Index j = 0; j < k; ++j) damped(j, j) += lambda * std::max(normal(j, j), 1e-300);
      const Eigen::VectorXd step = damped.ldlt().solve(g);
      std::vector<double> trial = p;
      for (Eigen::Index j = 0; j < k; ++j) trial[static_cast<std::size_t>(j)] += step[j];
      const double trial_cost = cost_of(trial);
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        bool small_step = true;
        for (Eigen::Index j = 0; j < k; ++j) {
          const double scale = std::abs(trial[static_cast<std::size_t>(j)]) + 1e-30;
          if (std::abs(step[j]) > 1e-12 * scale) small_step = false;
        }
        const bool flat = cost - trial_cost <= 1e-15 * cost;
        p = std::move(trial);
        cost = trial_cost;
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
        converged = small_step || flat || cost == 0.0;
        break;
      }
      lambda *= 10.0;
    }
    // No downhill step at any damping: already at the minimum to rounding.
    if (!accepted) converged = true;
  }
  if (!converged) throw FitError("nonlinear fit did not converge", p);

  linearize(p, normal, g);
  FitResult fit;
  fit.rss = cost;
  fit.dof = static_cast<int>(n - k);
  fit.iterations = it;
  for (std::size_t j = 0; j < p.size(); ++j) fit.params.push_back({model.names[j], p[j], 0, 0});
  finish_uncertainties(fit, invert_normal(normal));
  return fit;
}

NonlinearModel conversion_model(double length_cm) {
  NonlinearModel m;
  m.names = {"eta_ext_max", "eta_n"};
  m.value = [length_cm](double x_mw, std::span<const double> p) {
    const double s = std::sin(length_cm * std::sqrt(std::max(x_mw, 0.0) * 1e-3 * p[1]));
    return p[0] * s * s;
  };
  m.gradient = [length_cm](double x_mw, std::span<const double> p, std::span<double> g) {
    const double theta = length_cm * std::sqrt(std::max(x_mw, 0.0) * 1e-3 * p[1]);
    const double s = std::sin(theta);
    g[0] = s * s;
    // d theta / d eta_n = theta / (2 eta_n)
    g[1] = p[0] * std::sin(2.0 * theta) * theta / (2.0 * p[1]);
  };
  return m;
}

FitResult fit_conversion(const Dataset& data, double length_cm, const FitOptions& options) {
  if (data.size() < 3) throw ValidationError("conversion fit needs at least 3 points");
  if (!(length_cm > 0.0)) throw ValidationError("waveguide length must be > 0");
  // Sorting makes the result independent of input order.
  const Dataset sorted = data.sorted();

  const auto peak = std::max_element(sorted.points().begin(), sorted.points().end(),
                                     [](const DataPoint& a, const DataPoint& b) { return a.y < b.y; });
  if (!(peak->y > 0.0) || !(peak->x > 0.0)) throw NumericalError("conversion data have no positive peak");
  const double quarter = std::numbers::pi / 2.0;
  const double eta_n0 = quarter * quarter / (length_cm * length_cm * peak->x * 1e-3);

  FitResult fit = fit_nonlinear(sorted, conversion_model(length_cm), {peak->y, eta_n0}, options);
  const Estimate& eta_n = fit.params[1];
  const double l2 = length_cm * length_cm;
  fit.derived.push_back({"eta_n_L2", eta_n.value * l2, eta_n.std_error * l2, eta_n.ci_half_width * l2});
  fit.ill_conditioned = !(std::abs(fit.correlation(0, 1)) <= kIllConditionedCorrelation);
  return fit;
}

Estimate extract_mu1(const Dataset& snr_vs_mu, const FitOptions& options) {
  const FitResult line = fit_linear(snr_vs_mu, true, options);
  const Estimate& slope = line.params[0];
  if (!(slope.value > 0.0)) throw NumericalError("SNR does not increase with mu; no SNR = 1 crossing");
  const double mu1 = 1.0 / slope.value;
  double lo = kInf, hi = -kInf;
  for (const auto& p : snr_vs_mu.points()) {
    lo = std::min(lo, p.x);
    hi = std::max(hi, p.x);
  }
  if (mu1 < lo || mu1 > hi) throw NumericalError("SNR = 1 crossing lies outside the data range");
  const double se = slope.std_error / (slope.value * slope.value);
  return {"mu1", mu1, se, t_quantile_95(line.dof) * se};
}

FitResult fit_gaussian(const Dataset& data, const FitOptions& options) {
  if (data.size() < 4) throw ValidationError("Gaussian fit needs at least 4 points");
  double sw = 0, sx = 0, peak_y = -kInf, peak_x = 0;
  for (const auto& p : data.points()) {
    if (p.y > peak_y) {
      peak_y = p.y;
      peak_x = p.x;
    }
    if (p.y > 0) {
      sw += p.y;
      sx += p.y * p.x;
    }
  }
  if (!(sw > 0.0)) throw NumericalError("Gaussian fit needs positive data");
  const double mean = sx / sw;
  double sxx = 0;
  for (const auto& p : data.points()) {
    if (p.y > 0) sxx += p.y * (p.x - mean) * (p.x - mean);
  }
  const double sigma0 = std::max(std::sqrt(sxx / sw), 1e-6);

  NonlinearModel m;
  m.names = {"amplitude", "center", "sigma"};
  m.value = [](double x, std::span<const double> p) {
    const double z = (x - p[1]) / p[2];
    return p[0] * std::exp(-0.5 * z * z);
  };
  m.gradient = [](double x, std::span<const double> p, std::span<double> g) {
    const double z = (x - p[1]) / p[2];
    const double e = std::exp(-0.5 * z * z);
    g[0] = e;
    g[1] = p[0] * e * z / p[2];
    g[2] = p[0] * e * z * z / p[2];
  };
  FitResult fit = fit_nonlinear(data, m, {peak_y, peak_x, sigma0}, options);
  fit.params[2].value = std::abs(fit.params[2].value);
  constexpr double k = 2.3548200450309493;
  const Estimate& s = fit.params[2];
  fit.derived.push_back({"fwhm", k * s.value, k * s.std_error, k * s.ci_half_width});
  return fit;
}

std::pair<double, double> prediction_band(const FitResult& fit, const NonlinearModel& model, double x) {
  std::vector<double> p;
  for (const auto& e : fit.params) p.push_back(e.value);
  std::vector<double> g(p.size());
  model.gradient(x, p, g);
  double var = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) var += g[i] * fit.cov(i, j) * g[j];
  }
  return {model.value(x, p), t_quantile_95(fit.dof) * std::sqrt(std::max(var, 0.0))};
}

std::vector<double> SweepRange::grid() const {
  if (!std::isfinite(start) || !std::isfinite(stop)) throw ValidationError("sweep range must be finite");
  if (points == 0) throw ValidationError("sweep needs a positive point count");
  if (start == stop || points == 1) return {start};
  std::vector<double> xs(points);
  const double step = (stop - start) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) xs[i] = start + step * static_cast<double>(i);
  xs.back() = stop;
  return xs;
}

Dataset sweep(const SweepRange& range, const std::function<Observation(double)>& observable,
              std::string x_label, std::string y_label) {
  Dataset out(std::move(x_label), std::move(y_label));
  for (double x : range.grid()) {
    Observation o;
    try {
      o = observable(x);
    } catch (const FitError& e) {
      throw FitError("at grid point x = " + std::to_string(x) + ": " + e.what(), e.best_params());
    } catch (const ValidationError& e) {
      rethrow_at<ValidationError>(x, e.what());
    } catch (const DegenerateDenominator& e) {
      rethrow_at<DegenerateDenominator>(x, e.what());
    } catch (const std::exception& e) {
      rethrow_at<NumericalError>(x, e.what());
    }
    out.add(x, o.y, o.sigma);
  }
  return out;
}

}  // namespace qfconv
