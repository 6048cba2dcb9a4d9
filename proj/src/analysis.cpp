#include "ersim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ersim/error.hpp"
#include "ersim/physics.hpp"

namespace ersim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double upper = v[mid];
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid) - 1, v.end());
  return 0.5 * (upper + v[mid - 1]);
}

double sqrt_nonneg(double v) { return v > 0.0 ? std::sqrt(v) : 0.0; }

FitStatus lm_status(const LmOutcome& lm) {
  return lm.converged ? FitStatus::Converged : FitStatus::MaxIterations;
}

struct PeakGuess {
  double center, fwhm, amplitude, baseline;
};

// Heuristic start for a single peak or dip: edge median baseline, extremum, half-max crossings.
std::optional<PeakGuess> guess_peak(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  const std::size_t edge = std::max<std::size_t>(2, n / 10);
  std::vector<double> edges(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(edge));
  edges.insert(edges.end(), y.end() - static_cast<std::ptrdiff_t>(edge), y.end());
  const double baseline = median(edges);

  std::size_t peak = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(y[i] - baseline) > std::abs(y[peak] - baseline)) peak = i;
  const double amplitude = y[peak] - baseline;
  const double scale = std::max({std::abs(baseline), std::abs(amplitude), 1e-300});
  if (!(std::abs(amplitude) > 1e-12 * scale)) return std::nullopt;

  const auto level = [&](std::size_t i) { return (y[i] - baseline) / amplitude; };
  std::optional<double> left, right;
  for (std::size_t i = peak; i > 0; --i) {
    if (level(i - 1) < 0.5) {
      const double t = (level(i) - 0.5) / (level(i) - level(i - 1));
      left = x[i] - t * (x[i] - x[i - 1]);
      break;
    }
  }
  for (std::size_t i = peak; i + 1 < n; ++i) {
    if (level(i + 1) < 0.5) {
      const double t = (level(i) - 0.5) / (level(i) - level(i + 1));
      right = x[i] + t * (x[i + 1] - x[i]);
      break;
    }
  }
  double fwhm = 0.0;
  if (left && right) fwhm = *right - *left;
  else if (left) fwhm = 2.0 * (x[peak] - *left);
  else if (right) fwhm = 2.0 * (*right - x[peak]);
  if (!(fwhm > 0.0)) fwhm = 0.25 * (x.back() - x.front());
  return PeakGuess{x[peak], fwhm, amplitude, baseline};
}

template <class Model>
FitResult fit_peak(const Spectrum& spectrum, const FitOptions& options, const char* what) {
  spectrum.validate();
  if (spectrum.size() < 5) throw AnalysisError(std::string(what) + " fit needs at least 5 points");
  const std::vector<double> freq = spectrum.frequencies();
  const std::vector<double> y = spectrum.counts();

  // Work on a centered, unit-span abscissa; absolute optical frequencies are ~1e14.
  const double origin = 0.5 * (freq.front() + freq.back());
  const double scale = 0.5 * (freq.back() - freq.front());
  std::vector<double> x(freq.size());
  std::transform(freq.begin(), freq.end(), x.begin(), [&](double f) { return (f - origin) / scale; });

  FitResult result;
  std::array<double, 4> start{};
  if (options.initial) {
    const auto& g = *options.initial;
    if (g.size() != 4) throw InvalidParameter("peak fit initial guess needs 4 values");
    start = {(g[0] - origin) / scale, g[1] / scale, g[2], g[3]};
  } else {
    const auto guess = guess_peak(x, y);
    if (!guess) {
      const double base = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
      result.status = FitStatus::Degenerate;
      result.message = "no peak above the baseline";
      result.parameters = {{"center", kNaN, kInf, "Hz"},
                           {"fwhm", kNaN, kInf, "Hz"},
                           {"amplitude", 0.0, kInf, ""},
                           {"baseline", base, 0.0, ""}};
      return result;
    }
    start = {guess->center, guess->fwhm, guess->amplitude, guess->baseline};
  }

  const std::vector<double> w(y.size(), 1.0);
  const LmOutcome lm = levenberg_marquardt<Model>(x, y, w, start, options.lm);
  const auto& p = lm.params;
  const auto sd = [&](int k) { return sqrt_nonneg(lm.covariance(k, k)); };
  result.status = lm_status(lm);
  result.iterations = lm.iterations;
  result.rss = lm.rss;
  result.parameters = {{"center", origin + p[0] * scale, sd(0) * scale, "Hz"},
                       {"fwhm", p[1] * scale, sd(1) * scale, "Hz"},
                       {"amplitude", p[2], sd(2), ""},
                       {"baseline", p[3], sd(3), ""}};
  if (!result.converged()) result.message = "iteration limit reached";
  return result;
}

}  // namespace

std::vector<double> Spectrum::frequencies() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.frequency);
  return out;
}

std::vector<double> Spectrum::counts() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.counts);
  return out;
}

void Spectrum::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].frequency)) throw AnalysisError("non-finite spectrum frequency");
    if (!(points[i].counts >= 0.0) || !std::isfinite(points[i].counts))
      throw AnalysisError("spectrum counts must be finite and non-negative");
    if (i > 0 && !(points[i].frequency > points[i - 1].frequency))
      throw AnalysisError("spectrum frequencies must be strictly increasing");
  }
}

double DecayHistogram::total() const { return std::accumulate(counts.begin(), counts.end(), 0.0); }

DecayHistogram histogram_arrivals(const ClickStream& stream, double bin_width) {
  if (!(bin_width > 0.0)) throw InvalidParameter("bin width must be > 0");
  const PulseSequence& seq = stream.sequence;
  DecayHistogram hist;
  hist.bin_width = bin_width;
  hist.total_shots = seq.n_shots;
  const auto bins = static_cast<std::size_t>(std::ceil(seq.t_coll / bin_width * (1.0 - 1e-12)));
  hist.counts.assign(std::max<std::size_t>(bins, 1), 0.0);
  for (const Click& c : stream.records) {
    const double delay = c.t - seq.t_pulse;
    const double pos = std::ceil(delay / bin_width) - 1.0;
    const auto k = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(hist.bins() - 1)));
    hist.counts[k] += 1.0;
  }
  return hist;
}

FitResult fit_exponential(const DecayHistogram& hist, const FitOptions& options) {
  const std::size_t n = hist.bins();
  const auto nonempty = std::count_if(hist.counts.begin(), hist.counts.end(), [](double c) { return c > 0.0; });
  if (nonempty < 4) throw AnalysisError("exponential fit needs at least 4 nonempty bins");

  const auto [lo, hi] = std::minmax_element(hist.counts.begin(), hist.counts.end());
  FitResult result;
  if (*hi == *lo) {
    const double base = *lo;
    result.status = FitStatus::Degenerate;
    result.message = "flat histogram; baseline-only fallback";
    result.parameters = {{"amplitude", 0.0, kInf, "counts/bin"},
                         {"t1", kNaN, kInf, "s"},
                         {"baseline", base, std::sqrt(base / static_cast<double>(n)), "counts/bin"}};
    return result;
  }

  const double span = hist.bin_width * static_cast<double>(n);
  std::vector<double> x(n), w(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = hist.center(k) / span;
    w[k] = 1.0 / std::max(hist.counts[k], 1.0);
  }

  std::array<double, 3> start{};
  if (options.initial) {
    const auto& g = *options.initial;
    if (g.size() != 3 || !(g[1] > 0.0)) throw InvalidParameter("exponential initial guess needs {A, t1 > 0, B}");
    start = {g[0], std::log(g[1] / span), g[2]};
  } else {
    const std::size_t tail = std::max<std::size_t>(1, n / 10);
    const double base = std::accumulate(hist.counts.end() - static_cast<std::ptrdiff_t>(tail),
                                        hist.counts.end(), 0.0) / static_cast<double>(tail);
    double amp = hist.counts.front() - base;
    if (!(amp > 0.0)) amp = *hi - base;
    double t1 = span / 3.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (hist.counts[k] - base < amp / std::exp(1.0)) {
        t1 = std::max(hist.center(k), hist.bin_width);
        break;
      }
    }
    start = {amp, std::log(t1 / span), base};
  }

  const LmOutcome lm = levenberg_marquardt<ExponentialModel>(x, hist.counts, w, start, options.lm);
  const double t1 = span * std::exp(lm.params[1]);
  result.status = lm_status(lm);
  result.iterations = lm.iterations;
  result.rss = lm.rss;
  result.parameters = {
      {"amplitude", lm.params[0], sqrt_nonneg(lm.covariance(0, 0)), "counts/bin"},
      {"t1", t1, t1 * sqrt_nonneg(lm.covariance(1, 1)), "s"},
      {"baseline", lm.params[2], sqrt_nonneg(lm.covariance(2, 2)), "counts/bin"}};
  if (!result.converged()) result.message = "iteration limit reached";
  return result;
}

FitResult fit_lorentzian(const Spectrum& spectrum, const FitOptions& options) {
  FitResult r = fit_peak<LorentzianModel>(spectrum, options, "lorentzian");
  const double c = r.value("center");
  const double f = r.value("fwhm");
  const double q = c / f;
  const double q_err = q * std::hypot(r.error("center") / c, r.error("fwhm") / f);
  r.parameters.push_back({"q_factor", q, std::isfinite(q_err) ? q_err : kInf, ""});
  return r;
}

FitResult fit_gaussian(const Spectrum& spectrum, const FitOptions& options) {
  FitResult r = fit_peak<GaussianModel>(spectrum, options, "gaussian");
  const double k = 2.0 * std::sqrt(2.0 * std::log(2.0));
  r.parameters.push_back({"sigma", r.value("fwhm") / k, r.error("fwhm") / k, "Hz"});
  return r;
}

CorrelationHistogram pulsed_g2(const ClickStream& stream, int max_offset) {
  if (max_offset < 1) throw InvalidParameter("max_offset must be >= 1");
  const auto& rec = stream.records;
  const std::size_t width = 2 * static_cast<std::size_t>(max_offset) + 1;
  CorrelationHistogram h;
  h.max_offset = max_offset;
  h.t_rep = stream.sequence.t_rep;
  h.n_shots = stream.sequence.n_shots;
  h.n_clicks = rec.size();
  h.coincidences.assign(width, 0.0);
  h.shot_pairs.assign(width, 0.0);
  h.g2.assign(width, kNaN);
  h.g2_error.assign(width, kNaN);
  for (int d = -max_offset; d <= max_offset; ++d) {
    const auto ad = static_cast<std::uint64_t>(std::abs(d));
    h.shot_pairs[h.index(d)] = h.n_shots > ad ? static_cast<double>(h.n_shots - ad) : 0.0;
  }
  h.empty = rec.size() < 2;
  if (h.empty) return h;

  // Pairs at shot distance d >= 0; integer accumulation keeps the result order-independent.
  std::vector<std::uint64_t> pairs(static_cast<std::size_t>(max_offset) + 1, 0);
  const auto k = static_cast<std::uint64_t>(max_offset);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    for (std::size_t j = i + 1; j < rec.size(); ++j) {
      const std::uint64_t d = rec[j].shot - rec[i].shot;
      if (d > k) break;
      ++pairs[d];
    }
  }
  h.coincidences[h.index(0)] = 2.0 * static_cast<double>(pairs[0]);
  double side_total = 0.0;
  double side_rate = 0.0;
  int side_offsets = 0;
  for (int d = 1; d <= max_offset; ++d) {
    const double c = static_cast<double>(pairs[static_cast<std::size_t>(d)]);
    h.coincidences[h.index(d)] = c;
    h.coincidences[h.index(-d)] = c;
    side_total += c;
    if (h.shot_pairs[h.index(d)] > 0.0) {
      side_rate += c / h.shot_pairs[h.index(d)];
      ++side_offsets;
    }
  }
  if (side_offsets == 0 || side_rate == 0.0) return h;
  h.normalization = side_rate / side_offsets;

  const double norm_rel = 1.0 / std::sqrt(side_total);
  for (int d = -max_offset; d <= max_offset; ++d) {
    const std::size_t i = h.index(d);
    if (h.shot_pairs[i] == 0.0) continue;
    const double c = h.coincidences[i];
    // A same-shot pair is counted twice at zero offset.
    const double var_c = d == 0 ? 2.0 * std::max(c, 2.0) : std::max(c, 1.0);
    const double g = c / h.shot_pairs[i] / h.normalization;
    h.g2[i] = g;
    const double rel = std::sqrt(var_c) / std::max(c, 1.0);
    h.g2_error[i] = std::max(g, 1.0 / h.shot_pairs[i] / h.normalization) * std::hypot(rel, norm_rel);
  }
  return h;
}

DarkFloor dark_count_floor(double signal_rate_per_shot, double dark_rate, double t_coll,
                           std::uint64_t n_shots, int max_offset) {
  if (!(signal_rate_per_shot >= 0.0) || !(dark_rate >= 0.0) || !(t_coll >= 0.0))
    throw InvalidParameter("dark floor inputs must be non-negative");
  if (max_offset < 0) throw InvalidParameter("max_offset must be >= 0");
  const double dark = dark_rate * t_coll;
  DarkFloor floor;
  // Signal and dark clicks are independent and dark clicks are Poisson, so
  // E[pairs with >= 1 dark click] = d^2 + 2 s d at every offset, zero included.
  floor.per_shot_pair = dark * dark + 2.0 * signal_rate_per_shot * dark;
  for (int d = -max_offset; d <= max_offset; ++d) {
    const auto ad = static_cast<std::uint64_t>(std::abs(d));
    const double pairs = n_shots > ad ? static_cast<double>(n_shots - ad) : 0.0;
    floor.expected.push_back(floor.per_shot_pair * pairs);
  }
  return floor;
}

double background_corrected_g2(double g2_raw, double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidParameter("signal fraction must lie in (0, 1]");
  if (!(g2_raw >= 0.0)) throw InvalidParameter("g2 must be >= 0");
  const double r2 = rho * rho;
  return std::max(0.0, (g2_raw - (1.0 - r2)) / r2);
}

double signal_fraction(double clicks_per_shot, double dark_rate, double t_coll) {
  if (!(clicks_per_shot > 0.0)) throw InvalidParameter("no clicks to attribute");
  const double background = dark_rate * t_coll;
  return std::clamp((clicks_per_shot - background) / clicks_per_shot, 0.0, 1.0);
}

SpectralDiffusionMap spectral_diffusion_map(const std::vector<Spectrum>& scans) {
  if (scans.size() < 2) throw AnalysisError("a diffusion map needs at least 2 scans");
  SpectralDiffusionMap map;
  map.frequencies = scans.front().frequencies();
  for (const Spectrum& s : scans) {
    s.validate();
    if (s.frequencies() != map.frequencies) throw AnalysisError("scans use different frequency grids");
    map.counts.push_back(s.counts());
  }

  map.averaged.label = "time-averaged";
  const auto nf = map.frequencies.size();
  for (std::size_t j = 0; j < nf; ++j) {
    double sum = 0.0;
    for (const auto& row : map.counts) sum += row[j];
    map.averaged.points.push_back({map.frequencies[j], sum / static_cast<double>(scans.size())});
  }
  for (const Spectrum& s : scans) map.averaged.acquisition_time += s.acquisition_time;

  double sum = 0.0;
  int good = 0;
  for (const Spectrum& s : scans) {
    FitResult fit = fit_gaussian(s);
    const double fwhm = fit.converged() ? std::abs(fit.value("fwhm")) : kNaN;
    if (fit.converged()) {
      sum += fwhm;
      ++good;
    }
    map.scan_fwhm.push_back(fwhm);
    map.scan_fits.push_back(std::move(fit));
  }
  map.mean_scan_fwhm = good > 0 ? sum / good : kNaN;
  map.averaged_fit = fit_gaussian(map.averaged);
  map.averaged_fwhm = map.averaged_fit.converged() ? std::abs(map.averaged_fit.value("fwhm")) : kNaN;
  return map;
}

PurcellEstimate purcell_report(const FitResult& t1_fit, const FitResult& t1_0_fit) {
  if (!t1_fit.converged() || !t1_0_fit.converged())
    throw AnalysisError("Purcell factor needs two converged lifetime fits");
  const double t1 = t1_fit.value("t1");
  const double t1_0 = t1_0_fit.value("t1");
  PurcellEstimate est;
  est.purcell = purcell_from_lifetimes(t1, t1_0);
  est.uncertainty = (est.purcell + 1.0) * std::hypot(t1_fit.error("t1") / t1, t1_0_fit.error("t1") / t1_0);
  return est;
}

FitResult lifetime_result(double t1, double t1_error) {
  if (!(t1 > 0.0) || !(t1_error >= 0.0)) throw InvalidParameter("lifetime must be > 0 with error >= 0");
  FitResult r;
  r.status = FitStatus::Converged;
  r.parameters = {{"t1", t1, t1_error, "s"}};
  return r;
}

}  // namespace ersim
