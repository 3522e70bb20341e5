#include "desync/numerics.hpp"

#include <cmath>

namespace desync {

namespace {

bool finite_state(const State& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

State axpy(const State& x, const State& d, double h) {
  State y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + h * d[i];
  return y;
}

State rk4_step(const VectorField& f, const State& x, double t, double h) {
  State k1 = f(x, t);
  State k2 = f(axpy(x, k1, h / 2), t + h / 2);
  State k3 = f(axpy(x, k2, h / 2), t + h / 2);
  State k4 = f(axpy(x, k3, h), t + h);
  State y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = x[i] + h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return y;
}

uint64_t splitmix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::vector<double> Trajectory::component(std::size_t i) const {
  std::vector<double> out(states.size());
  for (std::size_t j = 0; j < states.size(); ++j) out[j] = states[j][i];
  return out;
}

Trajectory integrate_ode(const VectorField& field, const State& x0, double t0, double t1,
                         double dt) {
  Trajectory traj;
  State x = x0;
  double t = t0;
  traj.times.push_back(t);
  traj.states.push_back(x);
  while (t < t1 - 1e-12 * (t1 - t0)) {
    double h = std::min(dt, t1 - t);
    x = rk4_step(field, x, t, h);
    t += h;
    if (!finite_state(x)) throw IntegrationDiverged(t);
    traj.times.push_back(t);
    traj.states.push_back(x);
  }
  return traj;
}

Trajectory integrate_sde(const VectorField& drift, const std::vector<double>& noise_scale,
                         const State& x0, double t0, double t1, double dt, std::uint64_t seed) {
  Trajectory traj;
  State x = x0;
  double t = t0;
  traj.times.push_back(t);
  traj.states.push_back(x);
  std::uint64_t step = 0;
  while (t < t1 - 1e-12 * (t1 - t0)) {
    double h = std::min(dt, t1 - t);
    double sqh = std::sqrt(h);
    State d = drift(x, t);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += h * d[i];
      if (noise_scale[i] != 0.0)
        x[i] += noise_scale[i] * sqh * counter_gaussian(seed, i, step);
    }
    t += h;
    ++step;
    if (!finite_state(x)) throw IntegrationDiverged(t);
    traj.times.push_back(t);
    traj.states.push_back(x);
  }
  return traj;
}

double find_root_1d(const std::function<double(double)>& f, double a, double b, double tol) {
  double fa = f(a), fb = f(b);
  if (std::abs(fa) <= tol) return a;
  if (std::abs(fb) <= tol) return b;
  if (fa * fb > 0) throw BracketInvalid(a, b);
  for (int it = 0; it < 200; ++it) {
    // secant candidate, falling back to the midpoint when it leaves the bracket
    double m = 0.5 * (a + b);
    double x = m;
    if (fb != fa) {
      double s = b - fb * (b - a) / (fb - fa);
      if (s > std::min(a, b) && s < std::max(a, b)) x = s;
    }
    double fx = f(x);
    if (std::abs(fx) <= tol || std::abs(b - a) <= tol) return x;
    if (fa * fx <= 0) {
      b = x;
      fb = fx;
    } else {
      a = x;
      fa = fx;
    }
  }
  return 0.5 * (a + b);
}

double trapezoid_integral(const std::vector<double>& samples, double dt) {
  if (samples.size() < 2) throw InsufficientData("trapezoid_integral needs >= 2 samples");
  double s = 0.5 * (samples.front() + samples.back());
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) s += samples[i];
  return s * dt;
}

double counter_gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  // two uniforms from a splitmix64 chain keyed on (seed, stream, counter)
  std::uint64_t key = splitmix64(seed ^ splitmix64(stream ^ splitmix64(counter)));
  std::uint64_t u1 = splitmix64(key);
  std::uint64_t u2 = splitmix64(u1);
  double a = (static_cast<double>(u1 >> 11) + 0.5) * 0x1p-53;  // (0,1)
  double b = (static_cast<double>(u2 >> 11) + 0.5) * 0x1p-53;
  return std::sqrt(-2.0 * std::log(a)) * std::cos(2.0 * M_PI * b);
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  std::uint64_t key = splitmix64(seed ^ splitmix64(stream ^ splitmix64(counter ^ 0xabcdef12345ULL)));
  return (static_cast<double>(key >> 11) + 0.5) * 0x1p-53;
}

}  // namespace desync
