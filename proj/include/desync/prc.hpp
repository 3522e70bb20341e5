#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "desync/numerics.hpp"

namespace desync {

struct ControlWaveform;  // control.hpp

/// Phase response curve Z(theta), 2*pi-periodic, with analytic first and
/// second derivatives. Either a closed form (sine / sniper) or a truncated
/// Fourier series.
class PhaseResponseCurve {
 public:
  enum class Kind { Sine, Sniper, Fourier };

  static PhaseResponseCurve sine(double amplitude);    // a*sin(theta)
  static PhaseResponseCurve sniper(double amplitude);  // a*(1-cos(theta))
  static PhaseResponseCurve fourier(double a0, std::vector<double> a, std::vector<double> b);

  /// Z (order 0), Z' (order 1) or Z'' (order 2) at theta.
  double eval(double theta, int order = 0) const;

  Kind kind() const { return kind_; }
  double amplitude() const { return amplitude_; }
  double a0() const { return a0_; }
  const std::vector<double>& cos_coeffs() const { return a_; }
  const std::vector<double>& sin_coeffs() const { return b_; }
  std::size_t harmonics() const { return a_.size(); }

  /// max |Z^(order)| over a 4096-point grid.
  double max_abs(int order) const;

  std::string to_json() const;
  static PhaseResponseCurve from_json(const std::string& text);
  void save(const std::string& path) const;
  static PhaseResponseCurve load(const std::string& path);

 private:
  PhaseResponseCurve() = default;
  Kind kind_ = Kind::Sine;
  double amplitude_ = 0.0;            // closed forms
  double a0_ = 0.0;                   // fourier
  std::vector<double> a_, b_;         // fourier, 1-based harmonic k at index k-1
};

struct PhaseModelParams {
  double omega = 1.0;
  double period() const { return 2.0 * M_PI / omega; }
};

/// Least-squares-free Fourier fit by trapezoid quadrature on a uniform grid
/// over [0, 2*pi). Needs at least 2K+1 samples.
PhaseResponseCurve fit_fourier(const std::vector<double>& theta_samples,
                               const std::vector<double>& z_samples, std::size_t K);

/// Integrate dtheta/dt = omega + Z(theta) u(t). Phase is kept unwrapped.
/// u == nullptr means zero input.
Trajectory simulate_phase(const PhaseResponseCurve& prc, const PhaseModelParams& params,
                          const ControlWaveform* u, double theta0, double t_end, double dt);

}  // namespace desync
