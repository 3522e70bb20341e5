#include "desync/population.hpp"

#include <cmath>
#include <fstream>

namespace desync {

void PopulationConfig::validate() const {
  if (N < 2) throw std::invalid_argument("N must be >= 2");
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
  if (duration <= 0.0) throw std::invalid_argument("duration must be positive");
  if (D < 0.0) throw std::invalid_argument("D must be non-negative");
  if (!stream_ids.empty() && stream_ids.size() != N)
    throw std::invalid_argument("stream_ids must have one entry per neuron");
}

void SimulationTrace::save_mean_voltage_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(10);
  out << "t,mean_v\n";
  for (std::size_t i = 0; i < times.size(); ++i) out << times[i] << "," << mean_voltage[i] << "\n";
}

void SimulationTrace::save_control_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(10);
  out << "t,u\n";
  for (std::size_t i = 0; i < times.size(); ++i) out << times[i] << "," << control[i] << "\n";
}

void SimulationTrace::save_spikes_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(10);
  out << "neuron_index,spike_time\n";
  for (std::size_t i = 0; i < spikes.size(); ++i)
    for (double t : spikes[i]) out << i << "," << t << "\n";
}

bool controller_should_trigger(double mean_v_prev, double mean_v_now, double threshold,
                               bool playing) {
  return !playing && mean_v_prev < threshold && mean_v_now >= threshold;
}

std::vector<double> detect_spikes(const std::vector<double>& v_trace, double dt) {
  const double refractory = 2.0;  // ms
  std::vector<double> out;
  double last = -refractory;
  for (std::size_t i = 1; i < v_trace.size(); ++i) {
    if (v_trace[i - 1] < 0.0 && v_trace[i] >= 0.0) {
      double t = (static_cast<double>(i - 1) +
                  v_trace[i - 1] / (v_trace[i - 1] - v_trace[i])) *
                 dt;
      if (t - last >= refractory) {
        out.push_back(t);
        last = t;
      }
    }
  }
  return out;
}

SimulationTrace simulate_population(const PopulationConfig& config, const LimitCycle& cycle,
                                    const ControlWaveform* waveform) {
  config.validate();
  const std::size_t N = config.N;
  const double dt = config.dt;
  const double sq_noise = std::sqrt(2.0 * config.D * dt);
  const auto n_steps = static_cast<std::size_t>(std::llround(config.duration / dt));

  RHHParams params;
  params.I_b = config.I_b;

  auto stream = [&](std::size_t i) {
    return config.stream_ids.empty() ? static_cast<std::uint64_t>(i) : config.stream_ids[i];
  };

  // neurons start on the cycle at phase 0 plus uniform jitter
  std::vector<double> V(N), n(N);
  const double omega = 2.0 * M_PI / cycle.period;
  for (std::size_t i = 0; i < N; ++i) {
    double phase = config.jitter * (counter_uniform(config.seed, stream(i), ~0ULL) - 0.5);
    RHHState s = cycle.at(phase / omega, params);
    V[i] = s.V;
    n[i] = s.n;
  }

  SimulationTrace trace;
  trace.times.reserve(n_steps + 1);
  trace.mean_voltage.reserve(n_steps + 1);
  trace.control.reserve(n_steps + 1);
  trace.spikes.resize(N);

  std::vector<double> prev_v = V;
  std::vector<double> last_spike(N, -1e9);

  bool playing = false;
  double play_start = 0.0;
  double mean_prev = 0.0;
  const double play_T = waveform ? waveform->period() : 0.0;

  for (std::size_t step = 0; step <= n_steps; ++step) {
    double t = static_cast<double>(step) * dt;
    double mean_v = 0.0;
    for (double v : V) mean_v += v;
    mean_v /= static_cast<double>(N);

    if (playing && t - play_start >= play_T) playing = false;
    if (waveform && step > 0 &&
        controller_should_trigger(mean_prev, mean_v, config.threshold, playing)) {
      playing = true;
      play_start = t;
      trace.trigger_times.push_back(t);
    }
    double u = (waveform && playing) ? waveform->at(t - play_start) : 0.0;

    trace.times.push_back(t);
    trace.mean_voltage.push_back(mean_v);
    trace.control.push_back(u);
    mean_prev = mean_v;
    if (step == n_steps) break;

    for (std::size_t i = 0; i < N; ++i) {
      RHHState d = rhh_field({V[i], n[i]}, params);
      double dV = d.V + config.alpha * (mean_v - V[i]) + u;
      double Vn = V[i] + dt * dV + sq_noise * counter_gaussian(config.seed, stream(i), step);
      double nn = n[i] + dt * d.n;
      if (!std::isfinite(Vn) || !std::isfinite(nn))
        throw IntegrationDiverged(t);
      // online spike detection: upward zero crossing, 2 ms refractory
      if (V[i] < 0.0 && Vn >= 0.0) {
        double ts = t + dt * V[i] / (V[i] - Vn);
        if (ts - last_spike[i] >= 2.0) {
          trace.spikes[i].push_back(ts);
          last_spike[i] = ts;
        }
      }
      V[i] = Vn;
      n[i] = nn;
    }
  }

  std::vector<double> usq(trace.control.size());
  for (std::size_t i = 0; i < usq.size(); ++i) usq[i] = trace.control[i] * trace.control[i];
  trace.energy = trapezoid_integral(usq, dt);
  return trace;
}

std::map<std::string, EnergyStats> monte_carlo_energy(
    const PopulationConfig& config, const LimitCycle& cycle,
    const std::map<std::string, ControlWaveform>& waveforms, std::size_t runs) {
  if (runs < 2) throw std::invalid_argument("monte_carlo_energy needs runs >= 2");
  std::map<std::string, EnergyStats> out;
  for (const auto& [label, waveform] : waveforms) {
    std::vector<double> energies;
    std::size_t failures = 0;
    for (std::size_t r = 1; r <= runs; ++r) {
      PopulationConfig c = config;
      c.seed = config.seed + r;
      try {
        energies.push_back(simulate_population(c, cycle, &waveform).energy);
      } catch (const IntegrationDiverged&) {
        ++failures;
      }
    }
    if (failures * 10 > runs)
      throw std::runtime_error("more than 10% of Monte Carlo runs failed for " + label);
    double mean = 0.0;
    for (double e : energies) mean += e;
    mean /= static_cast<double>(energies.size());
    double var = 0.0;
    for (double e : energies) var += (e - mean) * (e - mean);
    var /= static_cast<double>(energies.size() - 1);
    out[label] = {energies.size(), failures, mean, std::sqrt(var)};
  }
  return out;
}

}  // namespace desync
