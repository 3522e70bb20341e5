#pragma once

#include <string>
#include <vector>

#include "desync/numerics.hpp"
#include "desync/prc.hpp"

namespace desync {

struct CannotRescale : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShootingFailed : std::runtime_error {
  std::vector<double> probe_lambda0;
  std::vector<double> probe_residual;
  explicit ShootingFailed(std::string what) : std::runtime_error(std::move(what)) {}
};

/// Control input u(t) sampled on a uniform grid covering one period [0, T].
struct ControlWaveform {
  std::vector<double> samples;
  double dt = 0.0;

  double period() const { return dt * static_cast<double>(samples.size() - 1); }
  double energy() const;  // trapezoid of u^2 over [0, T]

  /// Linear interpolation between grid points, zero outside [0, T].
  double at(double t) const;

  ControlWaveform scaled(double factor) const;
  void save_csv(const std::string& path) const;
};

/// Shooting solution of the optimal-waveform boundary value problem.
struct BVPSolution {
  double lambda0 = 0.0;
  Trajectory theta_traj;   // states {theta}
  Trajectory lambda_traj;  // states {lambda}
  ControlWaveform waveform;
  double lyap = 0.0;
  double cost = 0.0;
  double beta = 0.0;
  double residual = 0.0;  // theta(T) - 2*pi

  std::string summary_json() const;
};

inline constexpr std::size_t kGridPerPeriod = 2048;

/// Finite-time Lyapunov exponent of the phase difference over one period:
/// (1/T) * integral of Z'(theta(s)) u(s) ds, with theta(s) from the full
/// phase equation driven by u.
double lyapunov_exponent(const PhaseResponseCurve& prc, double omega,
                         const ControlWaveform& waveform);

/// Cost integral u^2 - beta*Z'(theta)*u over one period.
double cost_G(const PhaseResponseCurve& prc, double omega, const ControlWaveform& waveform,
              double beta);

/// Euler-Lagrange flow of the (theta, lambda) system from (0, lambda0) over
/// one period. Returns single-component theta and lambda trajectories.
std::pair<Trajectory, Trajectory> euler_lagrange_flow(const PhaseResponseCurve& prc, double omega,
                                                      double beta, double lambda0, double dt);

/// Single shooting on lambda(0): finds the waveform that extremizes the cost
/// subject to theta(0)=0, theta(T)=2*pi. Among bracketed roots, returns the
/// one with minimal cost. Falls back to continuation in beta when the direct
/// bracket search fails.
BVPSolution shoot_optimal(const PhaseResponseCurve& prc, double omega, double beta,
                          double tol = 1e-10);

/// First-order approximation (beta/2) Z'(omega t).
ControlWaveform approx_u1(const PhaseResponseCurve& prc, double omega, double beta,
                          std::size_t grid = kGridPerPeriod);

/// Second-order approximation (beta/2) Z'(omega t)
///   - (beta^2 / 8 omega) [Z'(omega t)]^2 Z(omega t).
ControlWaveform approx_u2(const PhaseResponseCurve& prc, double omega, double beta,
                          std::size_t grid = kGridPerPeriod);

/// Scale so that the waveform carries exactly target_energy.
ControlWaveform rescale_energy(const ControlWaveform& waveform, double target_energy);

/// Closed-form Lyapunov exponent estimate built from the u2 approximation
/// with theta ~ omega t.
double approx_lyapunov(const PhaseResponseCurve& prc, double omega, double beta,
                       std::size_t grid = kGridPerPeriod);

}  // namespace desync
