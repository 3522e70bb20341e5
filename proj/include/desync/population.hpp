#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "desync/control.hpp"
#include "desync/rhh.hpp"

namespace desync {

/// All-to-all coupled noisy RHH population under event-based control.
struct PopulationConfig {
  std::size_t N = 100;
  double alpha = 0.04;       // coupling strength
  double D = 2.0;            // noise intensity
  double I_b = 10.0;         // uA/cm^2
  double threshold = -30.0;  // mean-voltage trigger (mV)
  double duration = 350.0;   // ms
  double dt = 0.01;          // ms
  std::uint64_t seed = 0;
  double jitter = 0.5;       // initial phase jitter width (rad)

  /// Noise stream id per neuron; empty means identity. Lets tests permute
  /// neurons together with their noise realizations.
  std::vector<std::uint64_t> stream_ids;

  void validate() const;  // throws std::invalid_argument
};

struct SimulationTrace {
  std::vector<double> times;
  std::vector<double> mean_voltage;
  std::vector<double> control;
  std::vector<std::vector<double>> spikes;  // per neuron
  std::vector<double> trigger_times;
  double energy = 0.0;

  void save_mean_voltage_csv(const std::string& path) const;  // t, mean_v
  void save_control_csv(const std::string& path) const;       // t, u
  void save_spikes_csv(const std::string& path) const;        // neuron_index, spike_time
};

/// Upward threshold crossing arms one full waveform cycle; crossings during
/// playback are ignored.
bool controller_should_trigger(double mean_v_prev, double mean_v_now, double threshold,
                               bool playing);

/// Upward zero crossings with a 2 ms refractory window.
std::vector<double> detect_spikes(const std::vector<double>& v_trace, double dt);

/// Euler-Maruyama simulation of the coupled population; neurons start on the
/// limit cycle at phase 0 plus uniform jitter. waveform == nullptr disables
/// control.
SimulationTrace simulate_population(const PopulationConfig& config, const LimitCycle& cycle,
                                    const ControlWaveform* waveform);

struct EnergyStats {
  std::size_t runs = 0;
  std::size_t failures = 0;
  double mean = 0.0;
  double stdev = 0.0;
};

/// Monte Carlo over noise realizations (seeds seed+1 .. seed+runs) for each
/// labeled waveform. Throws if more than 10% of runs fail.
std::map<std::string, EnergyStats> monte_carlo_energy(
    const PopulationConfig& config, const LimitCycle& cycle,
    const std::map<std::string, ControlWaveform>& waveforms, std::size_t runs);

}  // namespace desync
