#include "ersim/fit.hpp"

#include <algorithm>
#include <cmath>

#include "ersim/error.hpp"

namespace ersim {

std::string_view to_string(FitStatus status) {
  switch (status) {
    case FitStatus::Converged:
      return "converged";
    case FitStatus::MaxIterations:
      return "max_iterations";
    case FitStatus::Degenerate:
      return "degenerate";
  }
  return "unknown";
}

bool FitResult::has(std::string_view name) const {
  return std::any_of(parameters.begin(), parameters.end(),
                     [&](const FitParameter& p) { return p.name == name; });
}

const FitParameter& FitResult::at(std::string_view name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p;
  throw AnalysisError("fit result has no parameter '" + std::string(name) + "'");
}

namespace {
const double kFourLn2 = 4.0 * std::log(2.0);
}

double LorentzianModel::eval(double x, std::span<const double, kParams> p,
                             std::span<double, kParams> grad) {
  const double h = 0.5 * p[1];
  const double d = x - p[0];
  const double den = d * d + h * h;
  const double shape = h * h / den;
  grad[0] = p[2] * h * h * 2.0 * d / (den * den);
  grad[1] = p[2] * h * d * d / (den * den);
  grad[2] = shape;
  grad[3] = 1.0;
  return p[3] + p[2] * shape;
}

double GaussianModel::eval(double x, std::span<const double, kParams> p,
                           std::span<double, kParams> grad) {
  const double f = p[1];
  const double d = x - p[0];
  const double e = std::exp(-kFourLn2 * d * d / (f * f));
  grad[0] = p[2] * e * 2.0 * kFourLn2 * d / (f * f);
  grad[1] = p[2] * e * 2.0 * kFourLn2 * d * d / (f * f * f);
  grad[2] = e;
  grad[3] = 1.0;
  return p[3] + p[2] * e;
}

double ExponentialModel::eval(double x, std::span<const double, kParams> p,
                              std::span<double, kParams> grad) {
  const double rate = std::exp(-p[1]);
  const double e = std::exp(-x * rate);
  grad[0] = e;
  grad[1] = p[0] * e * x * rate;
  grad[2] = 1.0;
  return p[0] * e + p[2];
}

template <class Model>
LmOutcome levenberg_marquardt(std::span<const double> x, std::span<const double> y,
                              std::span<const double> w,
                              const std::array<double, Model::kParams>& initial,
                              const LmOptions& options) {
  constexpr std::size_t np = Model::kParams;
  const std::size_t n = x.size();
  if (y.size() != n || w.size() != n) throw InvalidParameter("fit arrays differ in length");
  if (n < np) throw InvalidParameter("fewer data points than parameters");

  using Vec = Eigen::Matrix<double, static_cast<int>(np), 1>;
  using Mat = Eigen::Matrix<double, static_cast<int>(np), static_cast<int>(np)>;

  const auto residual_ss = [&](const std::array<double, np>& p) {
    std::array<double, np> g{};
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - Model::eval(x[i], p, g);
      s += w[i] * r * r;
    }
    return s;
  };
  const auto normal_equations = [&](const std::array<double, np>& p, Mat& a, Vec& b) {
    a.setZero();
    b.setZero();
    std::array<double, np> g{};
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - Model::eval(x[i], p, g);
      const Eigen::Map<const Vec> gv(g.data());
      a.noalias() += w[i] * gv * gv.transpose();
      b.noalias() += w[i] * r * gv;
    }
  };

  std::array<double, np> p = initial;
  LmOutcome out;
  if (!Model::admissible(p)) throw InvalidParameter("initial guess outside the model domain");
  double rss = residual_ss(p);
  double lambda = 1e-3;
  Mat a;
  Vec b;

  for (out.iterations = 1; out.iterations <= options.max_iterations; ++out.iterations) {
    normal_equations(p, a, b);
    bool improved = false;
    while (lambda < 1e20) {
      Mat damped = a;
      for (std::size_t k = 0; k < np; ++k)
        damped(k, k) += lambda * std::max(a(k, k), 1e-300);
      const Vec step = damped.ldlt().solve(b);
      std::array<double, np> trial;
      for (std::size_t k = 0; k < np; ++k) trial[k] = p[k] + step[k];
      if (!step.allFinite() || !Model::admissible(trial)) {
        lambda *= 10.0;
        continue;
      }
      const double trial_rss = residual_ss(trial);
      if (std::isfinite(trial_rss) && trial_rss <= rss) {
        bool small = true;
        for (std::size_t k = 0; k < np; ++k)
          small = small && std::abs(step[k]) <= options.step_tolerance * (std::abs(p[k]) + 1e-8);
        const double drop = rss - trial_rss;
        p = trial;
        rss = trial_rss;
        lambda = std::max(lambda * 0.1, 1e-15);
        improved = true;
        if (small || drop <= 1e-15 * rss) out.converged = true;
        break;
      }
      lambda *= 10.0;
    }
    // No step lowers the residual any further: at the minimum to working precision.
    if (!improved) out.converged = true;
    if (out.converged) break;
  }
  out.iterations = std::min(out.iterations, options.max_iterations);

  normal_equations(p, a, b);
  out.params = Eigen::Map<const Vec>(p.data());
  out.rss = rss;
  const double dof = n > np ? static_cast<double>(n - np) : 1.0;
  const Eigen::LDLT<Mat> ldlt(a);
  const Mat inv = ldlt.solve(Mat::Identity());
  out.covariance = inv * (rss / dof);
  return out;
}

template LmOutcome levenberg_marquardt<LorentzianModel>(std::span<const double>,
                                                        std::span<const double>,
                                                        std::span<const double>,
                                                        const std::array<double, 4>&,
                                                        const LmOptions&);
template LmOutcome levenberg_marquardt<GaussianModel>(std::span<const double>,
                                                      std::span<const double>,
                                                      std::span<const double>,
                                                      const std::array<double, 4>&,
                                                      const LmOptions&);
template LmOutcome levenberg_marquardt<ExponentialModel>(std::span<const double>,
                                                         std::span<const double>,
                                                         std::span<const double>,
                                                         const std::array<double, 3>&,
                                                         const LmOptions&);

}  // namespace ersim
