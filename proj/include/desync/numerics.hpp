#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace desync {

using State = std::vector<double>;
using VectorField = std::function<State(const State&, double)>;

struct IntegrationDiverged : std::runtime_error {
  double t;
  explicit IntegrationDiverged(double time)
      : std::runtime_error("integration diverged at t=" + std::to_string(time)), t(time) {}
};

struct BracketInvalid : std::runtime_error {
  BracketInvalid(double a, double b)
      : std::runtime_error("no sign change on bracket [" + std::to_string(a) + ", " +
                           std::to_string(b) + "]") {}
};

struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Time-stamped state sequence on a uniform grid.
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;

  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
  const State& front() const { return states.front(); }
  const State& back() const { return states.back(); }
  std::size_t size() const { return times.size(); }

  /// Component i of every state, as one flat series.
  std::vector<double> component(std::size_t i) const;
};

/// Fixed-step classical RK4 from t0 to t1; the last step is shortened to land
/// exactly on t1.
Trajectory integrate_ode(const VectorField& field, const State& x0, double t0, double t1,
                         double dt);

/// Euler-Maruyama with additive noise. noise_scale[i] is sqrt(2*D) for
/// component i (0 disables noise on that component). Streams are keyed by
/// (seed, component, step) so the result is reproducible regardless of
/// evaluation order.
Trajectory integrate_sde(const VectorField& drift, const std::vector<double>& noise_scale,
                         const State& x0, double t0, double t1, double dt, std::uint64_t seed);

/// Bracketing root finder: bisection with secant acceleration. Requires
/// f(a)*f(b) <= 0; returns x with |f(x)| <= tol or bracket width <= tol.
double find_root_1d(const std::function<double(double)>& f, double a, double b, double tol);

/// Composite trapezoid rule on uniformly spaced samples.
double trapezoid_integral(const std::vector<double>& samples, double dt);

/// One standard normal draw from a counter-based generator. Independent
/// streams for distinct (seed, stream, counter) keys.
double counter_gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

/// Uniform draw in (0, 1) from the same keyed generator.
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

}  // namespace desync
