#pragma once

// Weighted nonlinear least squares (Levenberg-Marquardt) for single-peak and
// single-exponential models with analytic Jacobians.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ersim {

enum class FitStatus { Converged, MaxIterations, Degenerate };

std::string_view to_string(FitStatus status);

struct FitParameter {
  std::string name;
  double value = 0.0;
  double uncertainty = 0.0;  // 1 sigma
  std::string unit;
};

struct FitResult {
  std::vector<FitParameter> parameters;
  double rss = 0.0;  // weighted residual sum of squares
  int iterations = 0;
  FitStatus status = FitStatus::MaxIterations;
  std::string message;

  bool converged() const { return status == FitStatus::Converged; }
  bool has(std::string_view name) const;
  const FitParameter& at(std::string_view name) const;
  double value(std::string_view name) const { return at(name).value; }
  double error(std::string_view name) const { return at(name).uncertainty; }
};

// Model functions evaluate value and gradient with respect to their own
// parameter vector. The fitter works in a shifted/scaled abscissa.

/// p = {center, fwhm, amplitude, baseline}
struct LorentzianModel {
  static constexpr std::size_t kParams = 4;
  static double eval(double x, std::span<const double, kParams> p, std::span<double, kParams> grad);
  static bool admissible(std::span<const double, kParams> p) { return p[1] > 0.0; }
};

/// p = {center, fwhm, amplitude, baseline}
struct GaussianModel {
  static constexpr std::size_t kParams = 4;
  static double eval(double x, std::span<const double, kParams> p, std::span<double, kParams> grad);
  static bool admissible(std::span<const double, kParams> p) { return p[1] > 0.0; }
};

/// p = {amplitude, log(lifetime), baseline}; the log keeps the lifetime positive.
struct ExponentialModel {
  static constexpr std::size_t kParams = 3;
  static double eval(double x, std::span<const double, kParams> p, std::span<double, kParams> grad);
  static bool admissible(std::span<const double, kParams> p) { return p[1] < 700.0 && p[1] > -700.0; }
};

struct LmOptions {
  int max_iterations = 500;
  double step_tolerance = 1e-12;
};

struct LmOutcome {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;  // scaled by the reduced chi-square
  double rss = 0.0;
  int iterations = 0;
  bool converged = false;
};

template <class Model>
LmOutcome levenberg_marquardt(std::span<const double> x, std::span<const double> y,
                              std::span<const double> w,
                              const std::array<double, Model::kParams>& initial,
                              const LmOptions& options = {});

extern template LmOutcome levenberg_marquardt<LorentzianModel>(
    std::span<const double>, std::span<const double>, std::span<const double>,
    const std::array<double, 4>&, const LmOptions&);
extern template LmOutcome levenberg_marquardt<GaussianModel>(
    std::span<const double>, std::span<const double>, std::span<const double>,
    const std::array<double, 4>&, const LmOptions&);
extern template LmOutcome levenberg_marquardt<ExponentialModel>(
    std::span<const double>, std::span<const double>, std::span<const double>,
    const std::array<double, 3>&, const LmOptions&);

}  // namespace ersim
