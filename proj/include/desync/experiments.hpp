#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "desync/control.hpp"
#include "desync/prc.hpp"

namespace desync {

enum class InputLabel { Optimal, Approx1, Approx2 };

std::string to_string(InputLabel label);

/// One two-oscillator run: phase difference phi(t) = theta2 - theta1 over a
/// single waveform cycle.
struct PairRunResult {
  Trajectory phi_traj;
  double phi_final = 0.0;
  InputLabel label = InputLabel::Optimal;
  double phi0 = 0.0;

  void save_csv(const std::string& path) const;  // columns t, phi
};

/// Integrate the full (not linearized) pair of phase oscillators under a
/// common waveform, theta1(0)=0, theta2(0)=phi0.
PairRunResult two_oscillator_run(const PhaseResponseCurve& prc, double omega,
                                 const ControlWaveform& waveform, double phi0, double dt,
                                 InputLabel label = InputLabel::Optimal);

/// Optimal waveform plus both approximations, rescaled to the shot energy.
struct WaveformTriple {
  BVPSolution optimal;
  ControlWaveform u1;  // rescaled
  ControlWaveform u2;  // rescaled
};

WaveformTriple build_waveforms(const PhaseResponseCurve& prc, double omega, double beta,
                               double tol = 1e-10);

struct SweepRow {
  double beta = 0.0;
  bool ok = false;
  std::string error;
  double phi_opt = 0.0, phi_u1 = 0.0, phi_u2 = 0.0;
};

/// Full pipeline (shoot, approximate, rescale, pair-run) per beta. Failures
/// are recorded in the row, not thrown.
std::vector<SweepRow> beta_sweep(const PhaseResponseCurve& prc, double omega,
                                 const std::vector<double>& beta_list, double phi0, double dt);

void save_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

/// Named reference configurations.
struct Preset {
  std::string name;
  std::string prc_name;  // "sin", "sniper" or "rhh"
  double omega = 1.0;    // ignored for rhh (set from the limit cycle)
  double beta = 0.0;
  double phi0 = 0.0;
};

const std::vector<Preset>& presets();
std::optional<Preset> find_preset(const std::string& name);

}  // namespace desync
