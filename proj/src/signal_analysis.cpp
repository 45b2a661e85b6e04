#include "levisim/signal_analysis.hpp"

#include "levisim/least_squares.hpp"
#include "levisim/random.hpp"

#include <fftw3.h>
#include <fmt/format.h>

#include <algorithm>
#include <mutex>

namespace levisim {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

}  // namespace

const char* to_string(Window w) { return w == Window::Hann ? "hann" : "rectangular"; }

double PsdEstimate::integrate(double f_lo, double f_hi) const {
  double s = 0.0;
  for (std::size_t k = 0; k < frequency.size(); ++k) {
    if (frequency[k] >= f_lo && frequency[k] <= f_hi) s += density[k];
  }
  return s * df();
}

PsdEstimate welch_psd(const std::vector<double>& x, double dt, std::size_t seg, double overlap,
                      Window window) {
  if (!power_of_two(seg)) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("segment length {} is not a power of two", seg));
  }
  if (seg > x.size()) {
    throw Error(ErrorKind::TooShort, fmt::format("series of {} samples is shorter than one "
                                                 "segment of {}",
                                                 x.size(), seg));
  }
  if (!(dt > 0.0) || overlap < 0.0 || overlap >= 1.0) {
    throw Error(ErrorKind::InvalidArgument, "dt must be positive and overlap in [0, 1)");
  }
  const std::size_t hop =
      std::max<std::size_t>(1, seg - static_cast<std::size_t>(std::lround(overlap * seg)));
  const std::size_t n_seg = 1 + (x.size() - seg) / hop;

  std::vector<double> w(seg, 1.0);
  if (window == Window::Hann) {
    for (std::size_t i = 0; i < seg; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * phys::pi * static_cast<double>(i) / static_cast<double>(seg));
    }
  }
  double w2 = 0.0;
  for (const double v : w) w2 += v * v;

  const std::size_t n_out = seg / 2 + 1;
  double* in = fftw_alloc_real(seg);
  fftw_complex* out = fftw_alloc_complex(n_out);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(seg), in, out, FFTW_ESTIMATE);
  }

  std::vector<double> acc(n_out, 0.0);
  for (std::size_t s = 0; s < n_seg; ++s) {
    const double* xs = x.data() + s * hop;
    double mean = 0.0;
    for (std::size_t i = 0; i < seg; ++i) mean += xs[i];
    mean /= static_cast<double>(seg);
    for (std::size_t i = 0; i < seg; ++i) in[i] = (xs[i] - mean) * w[i];
    fftw_execute(plan);
    for (std::size_t k = 0; k < n_out; ++k) acc[k] += out[k][0] * out[k][0] + out[k][1] * out[k][1];
  }
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);

  PsdEstimate p;
  p.segments = n_seg;
  p.segment_length = seg;
  p.window = window;
  p.frequency.resize(n_out);
  p.density.resize(n_out);
  for (std::size_t k = 0; k < n_out; ++k) {
    const double one_sided = (k == 0 || k == n_out - 1) ? 1.0 : 2.0;
    p.frequency[k] = static_cast<double>(k) / (static_cast<double>(seg) * dt);
    p.density[k] = one_sided * acc[k] / static_cast<double>(n_seg) * dt / w2;
  }
  return p;
}

PsdEstimate welch_psd(const TimeSeries& ts, const std::string& channel, std::size_t seg,
                      double overlap, Window window) {
  return welch_psd(ts.channel(channel), ts.dt, seg, overlap, window);
}

double lorentzian(double f, double f0, double gamma, double area) {
  const double d = f * f - f0 * f0;
  return area * gamma * f0 * f0 / (phys::pi * phys::pi) /
         (d * d + f * f * gamma * gamma / (4.0 * phys::pi * phys::pi));
}

LorentzianFit lorentzian_fit(const PsdEstimate& psd, double f_lo, double f_hi) {
  std::vector<double> fs;
  std::vector<double> ys;
  for (std::size_t k = 0; k < psd.frequency.size(); ++k) {
    const double f = psd.frequency[k];
    if (f > 0.0 && f >= f_lo && f <= f_hi && psd.density[k] > 0.0) {
      fs.push_back(f);
      ys.push_back(psd.density[k]);
    }
  }
  if (fs.size() < 8) {
    throw Error(ErrorKind::TooShort, fmt::format("only {} spectral bins in the fit band", fs.size()));
  }

  // Start: peak bin, half-maximum width, band integral.
  const auto ipk = static_cast<std::size_t>(std::max_element(ys.begin(), ys.end()) - ys.begin());
  std::size_t lo = ipk;
  std::size_t hi = ipk;
  while (lo > 0 && ys[lo] > 0.5 * ys[ipk]) --lo;
  while (hi + 1 < ys.size() && ys[hi] > 0.5 * ys[ipk]) ++hi;
  const double df = psd.df();
  const double width = std::max(fs[hi] - fs[lo], 2.0 * df);
  double area0 = 0.0;
  for (const double y : ys) area0 += y * df;

  const auto n = static_cast<int>(fs.size());
  const auto residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    const double f0 = std::exp(p(0));
    const double g = std::exp(p(1));
    const double a = std::exp(p(2));
    for (int i = 0; i < n; ++i) r(i) = std::log(lorentzian(fs[i], f0, g, a) / ys[i]);
  };
  const LeastSquaresResult res = levenberg_marquardt(
      residual, n, Eigen::Vector3d(std::log(fs[ipk]), std::log(2.0 * phys::pi * width), std::log(area0)));
  if (!res.converged || !res.params.allFinite()) {
    throw Error(ErrorKind::NoConvergence,
                fmt::format("Lorentzian fit failed after {} evaluations (SSR {:.3e}, {} bins)",
                            res.evaluations, res.ssr, n));
  }

  LorentzianFit fit;
  fit.f0 = std::exp(res.params(0));
  fit.gamma = std::exp(res.params(1));
  fit.area = std::exp(res.params(2));
  const Eigen::Vector3d scale(fit.f0, fit.gamma, fit.area);
  fit.covariance = scale.asDiagonal() * res.covariance * scale.asDiagonal();
  fit.rms_log_residual = std::sqrt(res.ssr / n);
  fit.evaluations = res.evaluations;
  // Log of a Welch average over K segments scatters by about 1/sqrt(K).
  const double expected = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(psd.segments, 1)));
  fit.flagged = fit.rms_log_residual > std::max(0.1, 3.0 * expected);
  return fit;
}

RotationPeak detect_rotation_peak(const PsdEstimate& psd, double min_prominence) {
  const std::size_t n = psd.density.size();
  if (n < 4) throw Error(ErrorKind::TooShort, "spectrum too short for peak detection");
  std::vector<double> body(psd.density.begin() + 1, psd.density.end());
  std::nth_element(body.begin(), body.begin() + body.size() / 2, body.end());
  const double median = body[body.size() / 2];

  const auto k = static_cast<std::size_t>(
      std::max_element(psd.density.begin() + 1, psd.density.end()) - psd.density.begin());
  const double prominence = median > 0.0 ? psd.density[k] / median : 0.0;
  if (!(prominence >= min_prominence)) {
    throw Error(ErrorKind::NoPeak, fmt::format("strongest line is only {:.2f}x the median level "
                                               "(need {:.1f})",
                                               prominence, min_prominence));
  }
  double offset = 0.0;
  if (k + 1 < n) {
    const double l = std::log(psd.density[k - 1]);
    const double c = std::log(psd.density[k]);
    const double r = std::log(psd.density[k + 1]);
    const double den = l - 2.0 * c + r;
    if (den < 0.0) offset = std::clamp(0.5 * (l - r) / den, -0.5, 0.5);
  }
  const double f_signal = (static_cast<double>(k) + offset) * psd.df();
  return {f_signal, 0.5 * f_signal, prominence};
}

std::vector<double> rotation_signal(double f_rot, double sample_rate, std::size_t n,
                                    double noise_sigma, std::uint64_t seed) {
  const CounterRng rng(seed);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = 2.0 * phys::pi * f_rot * static_cast<double>(i) / sample_rate;
    const auto [a, b] = rng.normal_pair(i / 2, 0);
    x[i] = std::sin(2.0 * phase) + noise_sigma * (i % 2 ? b : a);
  }
  return x;
}

double thermal_torque_sensitivity(double temperature, double inertia, double gamma) {
  return std::sqrt(4.0 * phys::kB * temperature * inertia * gamma);
}

double torque_sensitivity(double inertia, double gamma, double omega, double sqrt_s_noise) {
  return inertia * std::sqrt(gamma * gamma + omega * omega) * sqrt_s_noise;
}

TorqueSpectrum torque_sensitivity_spectrum(const PsdEstimate& omega_psd, double inertia,
                                           double gamma, double f_lo, double f_hi) {
  TorqueSpectrum out;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 1; k < omega_psd.frequency.size(); ++k) {
    const double f = omega_psd.frequency[k];
    const double s = torque_sensitivity(inertia, gamma, 2.0 * phys::pi * f,
                                        std::sqrt(omega_psd.density[k]));
    out.frequency.push_back(f);
    out.sensitivity.push_back(s);
    if (f >= f_lo && f <= f_hi) {
      sum += s;
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorKind::TooShort, "no spectral bins in the averaging band");
  out.band_average = sum / static_cast<double>(count);
  return out;
}

Vec3 force_sensitivity(double mass, double temperature, const Vec3& rates) {
  return (4.0 * phys::kB * temperature * mass * rates.array()).sqrt().matrix();
}

std::vector<SensitivityPoint> torque_sensitivity_curve(const Environment& env,
                                                       const DumbbellGeom& geom,
                                                       const std::vector<double>& pressures) {
  std::vector<SensitivityPoint> out;
  for (const double p : pressures) {
    const double g = rotational_damping(env.at(Pressure::torr(p)), geom).gamma;
    out.push_back(
        {p, g, thermal_torque_sensitivity(env.temperature, geom.moment_of_inertia(), g)});
  }
  return out;
}

std::vector<DistanceRow> sensitivity_vs_distance(const BeamParams& beam,
                                                 const SurfaceSpec& surface,
                                                 const DumbbellGeom& geom,
                                                 const Environment& env,
                                                 const std::vector<int>& wells) {
  const Vec3 axis = polarization_axis(beam.polarization);
  const Vec3 rates = dumbbell_damping(env, geom).lab_rates(axis);
  std::vector<DistanceRow> rows;
  rows.push_back({0, 0.0, force_sensitivity(geom.mass(), env.temperature, rates)});
  for (const int n : wells) {
    SurfaceSpec s = surface;
    s.z = loading_surface_position(beam, n);
    const TrapWell w = well_near_focus(TrapPotential(beam, make_reflector(s, beam.wavelength), geom));
    const double corr = proximity_correction(env, w.separation, geom.radius());
    rows.push_back({w.index, w.separation,
                    force_sensitivity(geom.mass(), env.temperature, corr * rates)});
  }
  return rows;
}

}  // namespace levisim
