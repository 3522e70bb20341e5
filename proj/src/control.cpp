#include "desync/control.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>

#include "json.hpp"

namespace desync {

double ControlWaveform::energy() const {
  std::vector<double> sq(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) sq[i] = samples[i] * samples[i];
  return trapezoid_integral(sq, dt);
}

double ControlWaveform::at(double t) const {
  if (t < 0.0 || samples.size() < 2) return 0.0;
  double pos = t / dt;
  auto n = static_cast<double>(samples.size() - 1);
  if (pos >= n) return pos <= n + 1e-9 ? samples.back() : 0.0;
  auto j = static_cast<std::size_t>(pos);
  double frac = pos - static_cast<double>(j);
  return samples[j] * (1.0 - frac) + samples[j + 1] * frac;
}

ControlWaveform ControlWaveform::scaled(double factor) const {
  ControlWaveform w = *this;
  for (double& s : w.samples) s *= factor;
  return w;
}

void ControlWaveform::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(12);
  out << "t_ms,u\n";
  for (std::size_t j = 0; j < samples.size(); ++j)
    out << static_cast<double>(j) * dt << "," << samples[j] << "\n";
}

std::string BVPSolution::summary_json() const {
  nlohmann::json j;
  j["beta"] = beta;
  j["lambda0"] = lambda0;
  j["lyap"] = lyap;
  j["cost"] = cost;
  j["energy"] = waveform.energy();
  j["residual"] = residual;
  return j.dump(2);
}

double lyapunov_exponent(const PhaseResponseCurve& prc, double omega,
                         const ControlWaveform& waveform) {
  double T = waveform.period();
  Trajectory traj = simulate_phase(prc, {omega}, &waveform, 0.0, T, waveform.dt);
  std::vector<double> integrand(traj.size());
  for (std::size_t j = 0; j < traj.size(); ++j)
    integrand[j] = prc.eval(traj.states[j][0], 1) * waveform.at(traj.times[j]);
  return trapezoid_integral(integrand, traj.dt()) / T;
}

double cost_G(const PhaseResponseCurve& prc, double omega, const ControlWaveform& waveform,
              double beta) {
  double T = waveform.period();
  return waveform.energy() - beta * T * lyapunov_exponent(prc, omega, waveform);
}

std::pair<Trajectory, Trajectory> euler_lagrange_flow(const PhaseResponseCurve& prc, double omega,
                                                      double beta, double lambda0, double dt) {
  auto field = [&](const State& x, double) -> State {
    double th = x[0], la = x[1];
    double z = prc.eval(th, 0), z1 = prc.eval(th, 1), z2 = prc.eval(th, 2);
    double u = (beta * z1 + la * z) / 2.0;
    return {z * u + omega, -u * (beta * z2 + la * z1)};
  };
  double T = 2.0 * M_PI / omega;
  Trajectory joint = integrate_ode(field, {0.0, lambda0}, 0.0, T, dt);
  Trajectory theta, lambda;
  theta.times = lambda.times = joint.times;
  theta.states.reserve(joint.size());
  lambda.states.reserve(joint.size());
  for (const State& s : joint.states) {
    theta.states.push_back({s[0]});
    lambda.states.push_back({s[1]});
  }
  return {std::move(theta), std::move(lambda)};
}

namespace {

BVPSolution assemble_solution(const PhaseResponseCurve& prc, double omega, double beta,
                              double lambda0, double dt) {
  auto [theta, lambda] = euler_lagrange_flow(prc, omega, beta, lambda0, dt);
  ControlWaveform w;
  w.dt = theta.dt();
  w.samples.resize(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) {
    double th = theta.states[j][0], la = lambda.states[j][0];
    w.samples[j] = (beta * prc.eval(th, 1) + la * prc.eval(th, 0)) / 2.0;
  }
  BVPSolution sol;
  sol.lambda0 = lambda0;
  sol.residual = theta.back()[0] - 2.0 * M_PI;
  sol.theta_traj = std::move(theta);
  sol.lambda_traj = std::move(lambda);
  sol.waveform = std::move(w);
  sol.beta = beta;
  sol.lyap = lyapunov_exponent(prc, omega, sol.waveform);
  sol.cost = cost_G(prc, omega, sol.waveform, beta);
  return sol;
}

/// theta(T) - 2*pi, or NaN when the flow blows up.
double shooting_residual(const PhaseResponseCurve& prc, double omega, double beta, double lambda0,
                         double dt) {
  try {
    auto [theta, lambda] = euler_lagrange_flow(prc, omega, beta, lambda0, dt);
    return theta.back()[0] - 2.0 * M_PI;
  } catch (const IntegrationDiverged&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

/// Probe the residual on [center-halfwidth, center+halfwidth] and root-find
/// every sign change; return the root list (may be empty).
std::vector<double> bracket_roots(const PhaseResponseCurve& prc, double omega, double beta,
                                  double center, double halfwidth, double dt, double tol,
                                  std::vector<double>* probes_out = nullptr,
                                  std::vector<double>* residuals_out = nullptr) {
  const int n_probe = 64;
  std::vector<double> roots;
  double prev_l = 0.0, prev_r = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i <= n_probe; ++i) {
    double l0 = center - halfwidth + 2.0 * halfwidth * i / n_probe;
    double r = shooting_residual(prc, omega, beta, l0, dt);
    if (probes_out) probes_out->push_back(l0);
    if (residuals_out) residuals_out->push_back(r);
    if (std::isfinite(r) && std::abs(r) <= tol) {
      roots.push_back(l0);
    } else if (std::isfinite(r) && std::isfinite(prev_r) && prev_r * r < 0) {
      auto f = [&](double x) { return shooting_residual(prc, omega, beta, x, dt); };
      roots.push_back(find_root_1d(f, prev_l, l0, tol));
    }
    prev_l = l0;
    prev_r = r;
  }
  // drop near-duplicates
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [&](double x, double y) {
                            return std::abs(x - y) <= 1e-9 * (halfwidth + 1.0);
                          }),
              roots.end());
  return roots;
}

std::optional<BVPSolution> best_solution(const PhaseResponseCurve& prc, double omega, double beta,
                                         const std::vector<double>& roots, double dt, double tol) {
  std::optional<BVPSolution> best;
  for (double l0 : roots) {
    BVPSolution sol = assemble_solution(prc, omega, beta, l0, dt);
    if (std::abs(sol.residual) > 10.0 * tol) continue;
    if (!best || sol.cost < best->cost) best = std::move(sol);
  }
  return best;
}

}  // namespace

BVPSolution shoot_optimal(const PhaseResponseCurve& prc, double omega, double beta, double tol) {
  double T = 2.0 * M_PI / omega;
  double dt = T / static_cast<double>(kGridPerPeriod);
  double z1max = prc.max_abs(1);
  double scale = beta * beta * z1max * z1max / omega;
  if (scale <= 0.0) scale = 1.0;

  std::vector<double> probes, residuals;
  auto roots = bracket_roots(prc, omega, beta, 0.0, scale, dt, tol, &probes, &residuals);
  if (auto sol = best_solution(prc, omega, beta, roots, dt, tol)) return *std::move(sol);

  // continuation in beta, warm-starting the bracket center
  double center = 0.0;
  std::optional<BVPSolution> sol;
  for (double f : {0.25, 0.5, 0.75, 1.0}) {
    double b = f * beta;
    double w = std::max(0.5 * scale, 2.0 * std::abs(center)) + 1e-6;
    auto rs = bracket_roots(prc, omega, b, center, w, dt, tol);
    sol = best_solution(prc, omega, b, rs, dt, tol);
    if (!sol) break;
    center = sol->lambda0;
  }
  if (sol && sol->beta == beta) return *std::move(sol);

  ShootingFailed err("shooting failed: no bracket for beta=" + std::to_string(beta));
  err.probe_lambda0 = std::move(probes);
  err.probe_residual = std::move(residuals);
  throw err;
}

ControlWaveform approx_u1(const PhaseResponseCurve& prc, double omega, double beta,
                          std::size_t grid) {
  ControlWaveform w;
  double T = 2.0 * M_PI / omega;
  w.dt = T / static_cast<double>(grid);
  w.samples.resize(grid + 1);
  for (std::size_t j = 0; j <= grid; ++j)
    w.samples[j] = beta / 2.0 * prc.eval(omega * static_cast<double>(j) * w.dt, 1);
  return w;
}

ControlWaveform approx_u2(const PhaseResponseCurve& prc, double omega, double beta,
                          std::size_t grid) {
  ControlWaveform w;
  double T = 2.0 * M_PI / omega;
  w.dt = T / static_cast<double>(grid);
  w.samples.resize(grid + 1);
  for (std::size_t j = 0; j <= grid; ++j) {
    double th = omega * static_cast<double>(j) * w.dt;
    double z = prc.eval(th, 0), z1 = prc.eval(th, 1);
    w.samples[j] = beta / 2.0 * z1 - beta * beta / (8.0 * omega) * z1 * z1 * z;
  }
  return w;
}

ControlWaveform rescale_energy(const ControlWaveform& waveform, double target_energy) {
  double e = waveform.energy();
  if (e <= 0.0) throw CannotRescale("cannot rescale a zero-energy waveform");
  if (target_energy <= 0.0) throw CannotRescale("target energy must be positive");
  return waveform.scaled(std::sqrt(target_energy / e));
}

double approx_lyapunov(const PhaseResponseCurve& prc, double omega, double beta,
                       std::size_t grid) {
  double T = 2.0 * M_PI / omega;
  double dt = T / static_cast<double>(grid);
  std::vector<double> integrand(grid + 1);
  for (std::size_t j = 0; j <= grid; ++j) {
    double th = omega * static_cast<double>(j) * dt;
    double z = prc.eval(th, 0), z1 = prc.eval(th, 1);
    integrand[j] = z1 * (beta / 2.0 * z1 - beta * beta / (8.0 * omega) * z1 * z1 * z);
  }
  return trapezoid_integral(integrand, dt) / T;
}

}  // namespace desync
