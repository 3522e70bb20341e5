#include "desync/experiments.hpp"

#include <cmath>
#include <fstream>

namespace desync {

std::string to_string(InputLabel label) {
  switch (label) {
    case InputLabel::Optimal: return "optimal";
    case InputLabel::Approx1: return "approx1";
    case InputLabel::Approx2: return "approx2";
  }
  return "?";
}

void PairRunResult::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(12);
  out << "t,phi\n";
  for (std::size_t i = 0; i < phi_traj.size(); ++i)
    out << phi_traj.times[i] << "," << phi_traj.states[i][0] << "\n";
}

PairRunResult two_oscillator_run(const PhaseResponseCurve& prc, double omega,
                                 const ControlWaveform& waveform, double phi0, double dt,
                                 InputLabel label) {
  auto field = [&](const State& x, double t) -> State {
    double u = waveform.at(t);
    return {omega + prc.eval(x[0]) * u, omega + prc.eval(x[1]) * u};
  };
  double T = waveform.period();
  Trajectory pair = integrate_ode(field, {0.0, phi0}, 0.0, T, dt);

  PairRunResult r;
  r.label = label;
  r.phi0 = phi0;
  r.phi_traj.times = pair.times;
  r.phi_traj.states.reserve(pair.size());
  for (const State& s : pair.states) r.phi_traj.states.push_back({s[1] - s[0]});
  r.phi_final = r.phi_traj.back()[0];
  return r;
}

WaveformTriple build_waveforms(const PhaseResponseCurve& prc, double omega, double beta,
                               double tol) {
  WaveformTriple t;
  t.optimal = shoot_optimal(prc, omega, beta, tol);
  double e = t.optimal.waveform.energy();
  t.u1 = rescale_energy(approx_u1(prc, omega, beta), e);
  t.u2 = rescale_energy(approx_u2(prc, omega, beta), e);
  return t;
}

std::vector<SweepRow> beta_sweep(const PhaseResponseCurve& prc, double omega,
                                 const std::vector<double>& beta_list, double phi0, double dt) {
  std::vector<SweepRow> rows;
  for (double beta : beta_list) {
    SweepRow row;
    row.beta = beta;
    try {
      if (beta == 0.0) {
        row.phi_opt = row.phi_u1 = row.phi_u2 = phi0;
        row.ok = true;
      } else {
        WaveformTriple w = build_waveforms(prc, omega, beta);
        row.phi_opt =
            two_oscillator_run(prc, omega, w.optimal.waveform, phi0, dt, InputLabel::Optimal)
                .phi_final;
        row.phi_u1 =
            two_oscillator_run(prc, omega, w.u1, phi0, dt, InputLabel::Approx1).phi_final;
        row.phi_u2 =
            two_oscillator_run(prc, omega, w.u2, phi0, dt, InputLabel::Approx2).phi_final;
        row.ok = true;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void save_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(12);
  out << "beta,phi_opt,phi_u1,phi_u2\n";
  for (const SweepRow& r : rows) {
    out << r.beta << ",";
    if (r.ok)
      out << r.phi_opt << "," << r.phi_u1 << "," << r.phi_u2 << "\n";
    else
      out << "nan,nan,nan\n";
  }
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> list = {
      {"sin", "sin", 1.0, 10.0, 0.01},
      {"sniper", "sniper", 1.0, 10.0, 0.01},
      {"rhh", "rhh", 2.0 * M_PI / 11.85, 7.0, 0.001},
      {"rhh-sync", "rhh", 2.0 * M_PI / 11.85, -5.0, 0.5},
  };
  return list;
}

std::optional<Preset> find_preset(const std::string& name) {
  for (const Preset& p : presets())
    if (p.name == name) return p;
  return std::nullopt;
}

}  // namespace desync
