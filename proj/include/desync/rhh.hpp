#pragma once

#include <array>
#include <string>
#include <vector>

#include "desync/numerics.hpp"
#include "desync/prc.hpp"

namespace desync {

struct NoOscillation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AdjointDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reduced (V, n) Hodgkin-Huxley membrane state.
struct RHHState {
  double V = -65.0;  // mV
  double n = 0.35;
};

struct RHHParams {
  double V_Na = 50.0;   // mV
  double V_K = -77.0;
  double V_L = -54.4;
  double g_Na = 120.0;  // mS/cm^2
  double g_K = 36.0;
  double g_L = 0.3;
  double C = 1.0;       // uF/cm^2
  double I_b = 10.0;    // uA/cm^2
};

// gating rate functions; removable singularities at V=-40 and V=-55 are
// handled by series expansion
double rate_am(double V);
double rate_bm(double V);
double rate_an(double V);
double rate_bn(double V);
double m_inf(double V);

/// (dV/dt, dn/dt) with input u added to the voltage equation.
RHHState rhh_field(const RHHState& s, const RHHParams& p, double u = 0.0);

/// One periodic orbit resampled at uniform dt, phase origin (index 0) at the
/// voltage maximum. samples.front() and samples.back() coincide within
/// solver tolerance.
struct LimitCycle {
  double period = 0.0;  // ms
  double dt = 0.0;
  std::vector<RHHState> samples;

  /// Periodic cubic-Hermite state lookup at arbitrary time (t=0 is the
  /// phase origin).
  RHHState at(double t, const RHHParams& p) const;

  void save_csv(const std::string& path) const;
};

/// Locate the stable limit cycle: skip transients, time successive Poincare
/// section crossings until the period estimate settles, then resample one
/// period.
LimitCycle find_limit_cycle(const RHHParams& p, double tol = 1e-6, double dt = 0.001,
                            RHHState x0 = {-65.0, 0.35});

/// Adjoint solution around the cycle, normalized so that z(t).xdot(t) equals
/// the angular frequency everywhere; returns the voltage component divided
/// by C, fitted to K Fourier harmonics in theta = omega*t.
PhaseResponseCurve compute_adjoint_prc(const LimitCycle& cycle, const RHHParams& p,
                                       std::size_t K = 200, double tol = 1e-8,
                                       int max_sweeps = 50);

/// Converged periodic adjoint vector z(t) at the cycle grid, already scaled
/// to the z.xdot = omega normalization.
struct AdjointSolution {
  std::vector<double> times;
  std::vector<std::array<double, 2>> z;  // (z_V, z_n)
};

AdjointSolution solve_adjoint(const LimitCycle& cycle, const RHHParams& p, double tol = 1e-8,
                              int max_sweeps = 50);

}  // namespace desync
