#include "desync/rhh.hpp"

#include <cmath>
#include <fstream>

namespace desync {

namespace {

// y / (1 - exp(-y)) with the series limit near y = 0
double expm_ratio(double y) {
  if (std::abs(y) < 1e-5) return 1.0 + y / 2.0 + y * y / 12.0;
  return y / (1.0 - std::exp(-y));
}

using Vec2 = std::array<double, 2>;

Vec2 field(const Vec2& x, const RHHParams& p, double u = 0.0) {
  RHHState d = rhh_field({x[0], x[1]}, p, u);
  return {d.V, d.n};
}

Vec2 rk4(const Vec2& x, double h, const RHHParams& p) {
  Vec2 k1 = field(x, p);
  Vec2 k2 = field({x[0] + h / 2 * k1[0], x[1] + h / 2 * k1[1]}, p);
  Vec2 k3 = field({x[0] + h / 2 * k2[0], x[1] + h / 2 * k2[1]}, p);
  Vec2 k4 = field({x[0] + h * k3[0], x[1] + h * k3[1]}, p);
  return {x[0] + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
          x[1] + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
}

// cubic Hermite value at fraction s in [0,1] of a step of width h
double hermite(double y0, double d0, double y1, double d1, double h, double s) {
  double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 +
         (s3 - s2) * h * d1;
}

// fraction in [0,1] where the Hermite interpolant of V crosses level upward
double crossing_fraction(double v0, double dv0, double v1, double dv1, double h, double level) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 80; ++i) {
    double mid = 0.5 * (lo + hi);
    if (hermite(v0, dv0, v1, dv1, h, mid) < level)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Jacobian of the unforced field by central differences
std::array<Vec2, 2> jacobian(const Vec2& x, const RHHParams& p) {
  const double h = 1e-6;
  std::array<Vec2, 2> J{};  // J[row][col]
  for (int col = 0; col < 2; ++col) {
    Vec2 xp = x, xm = x;
    xp[col] += h;
    xm[col] -= h;
    Vec2 fp = field(xp, p), fm = field(xm, p);
    J[0][col] = (fp[0] - fm[0]) / (2 * h);
    J[1][col] = (fp[1] - fm[1]) / (2 * h);
  }
  return J;
}

}  // namespace

double rate_am(double V) { return expm_ratio((V + 40.0) / 10.0); }
double rate_bm(double V) { return 4.0 * std::exp(-(V + 65.0) / 18.0); }
double rate_an(double V) { return 0.1 * expm_ratio((V + 55.0) / 10.0); }
double rate_bn(double V) { return 0.125 * std::exp(-(V + 65.0) / 80.0); }

double m_inf(double V) {
  double a = rate_am(V);
  return a / (a + rate_bm(V));
}

RHHState rhh_field(const RHHState& s, const RHHParams& p, double u) {
  double m = m_inf(s.V);
  double I_Na = p.g_Na * m * m * m * (0.8 - s.n) * (s.V - p.V_Na);
  double I_K = p.g_K * std::pow(s.n, 4) * (s.V - p.V_K);
  double I_L = p.g_L * (s.V - p.V_L);
  RHHState d;
  d.V = (p.I_b - I_Na - I_K - I_L) / p.C + u;
  d.n = rate_an(s.V) * (1.0 - s.n) - rate_bn(s.V) * s.n;
  return d;
}

RHHState LimitCycle::at(double t, const RHHParams& p) const {
  double tau = std::fmod(t, period);
  if (tau < 0) tau += period;
  double pos = tau / dt;
  auto j = static_cast<std::size_t>(pos);
  if (j >= samples.size() - 1) j = samples.size() - 2;
  double s = pos - static_cast<double>(j);
  RHHState d0 = rhh_field(samples[j], p);
  RHHState d1 = rhh_field(samples[j + 1], p);
  double h = dt;
  return {hermite(samples[j].V, d0.V, samples[j + 1].V, d1.V, h, s),
          hermite(samples[j].n, d0.n, samples[j + 1].n, d1.n, h, s)};
}

void LimitCycle::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(12);
  out << "t,V,n\n";
  for (std::size_t i = 0; i < samples.size(); ++i)
    out << static_cast<double>(i) * dt << "," << samples[i].V << "," << samples[i].n << "\n";
}

LimitCycle find_limit_cycle(const RHHParams& p, double tol, double dt, RHHState x0) {
  const double section = -20.0;  // mV, crossed upward on the spike upstroke
  const double transient = 500.0;
  const double search = 400.0;

  Vec2 x{x0.V, x0.n};
  for (double t = 0.0; t < transient; t += dt) x = rk4(x, dt, p);

  // collect upward section crossings with Hermite-refined times
  std::vector<double> crossing_times;
  Vec2 crossing_state{};
  double t = 0.0;
  double period = 0.0;
  bool converged = false;
  Vec2 prev = x;
  while (t < search) {
    Vec2 next = rk4(prev, dt, p);
    if (prev[0] < section && next[0] >= section) {
      Vec2 d0 = field(prev, p), d1 = field(next, p);
      double s = crossing_fraction(prev[0], d0[0], next[0], d1[0], dt, section);
      double tc = t + s * dt;
      crossing_times.push_back(tc);
      crossing_state = {hermite(prev[0], d0[0], next[0], d1[0], dt, s),
                        hermite(prev[1], d0[1], next[1], d1[1], dt, s)};
      std::size_t m = crossing_times.size();
      if (m >= 3) {
        double T1 = crossing_times[m - 1] - crossing_times[m - 2];
        double T2 = crossing_times[m - 2] - crossing_times[m - 3];
        if (std::abs(T1 - T2) < tol) {
          period = T1;
          converged = true;
          break;
        }
      }
    }
    prev = next;
    t += dt;
  }
  if (crossing_times.size() < 3)
    throw NoOscillation("fewer than 3 Poincare section crossings; no stable oscillation");
  if (!converged) period = crossing_times.back() - crossing_times[crossing_times.size() - 2];

  // resample one period from the refined crossing state
  auto n_steps = static_cast<std::size_t>(std::llround(period / dt));
  double h = period / static_cast<double>(n_steps);
  std::vector<Vec2> cycle(n_steps + 1);
  cycle[0] = crossing_state;
  for (std::size_t i = 0; i < n_steps; ++i) cycle[i + 1] = rk4(cycle[i], h, p);

  // rotate so the voltage maximum sits at index 0 (theta = 0, the spike)
  std::size_t peak = 0;
  for (std::size_t i = 0; i < n_steps; ++i)
    if (cycle[i][0] > cycle[peak][0]) peak = i;

  LimitCycle lc;
  lc.period = period;
  lc.dt = h;
  lc.samples.resize(n_steps + 1);
  for (std::size_t i = 0; i <= n_steps; ++i) {
    const Vec2& v = cycle[(peak + i) % n_steps];
    lc.samples[i] = {v[0], v[1]};
  }
  return lc;
}

AdjointSolution solve_adjoint(const LimitCycle& cycle, const RHHParams& p, double tol,
                              int max_sweeps) {
  const double T = cycle.period;
  const double h = cycle.dt;
  const std::size_t n = cycle.samples.size() - 1;

  auto state_at = [&](double t) -> Vec2 {
    RHHState s = cycle.at(t, p);
    return {s.V, s.n};
  };
  // dz/dt = -J^T(x(t)) z
  auto adj_rhs = [&](const Vec2& z, double t) -> Vec2 {
    auto J = jacobian(state_at(t), p);
    return {-(J[0][0] * z[0] + J[1][0] * z[1]), -(J[0][1] * z[0] + J[1][1] * z[1])};
  };
  auto adj_rk4 = [&](const Vec2& z, double t, double step) -> Vec2 {
    Vec2 k1 = adj_rhs(z, t);
    Vec2 k2 = adj_rhs({z[0] + step / 2 * k1[0], z[1] + step / 2 * k1[1]}, t + step / 2);
    Vec2 k3 = adj_rhs({z[0] + step / 2 * k2[0], z[1] + step / 2 * k2[1]}, t + step / 2);
    Vec2 k4 = adj_rhs({z[0] + step * k3[0], z[1] + step * k3[1]}, t + step);
    return {z[0] + step / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            z[1] + step / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
  };

  double omega = 2.0 * M_PI / T;
  RHHState d_end = rhh_field(cycle.samples[n], p);

  // normalize at the sweep anchor t = T
  auto anchor_normalize = [&](Vec2 z) -> Vec2 {
    double dot = z[0] * d_end.V + z[1] * d_end.n;
    if (dot == 0.0) throw AdjointDiverged("degenerate adjoint normalization");
    double s = omega / dot;
    return {z[0] * s, z[1] * s};
  };

  Vec2 z = anchor_normalize({1.0, 0.0});
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    Vec2 start = z;
    for (std::size_t i = n; i-- > 0;) z = adj_rk4(z, static_cast<double>(i + 1) * h, -h);
    z = anchor_normalize(z);  // periodicity: z(0) becomes the next z(T)
    double dv = std::hypot(z[0] - start[0], z[1] - start[1]);
    if (dv <= tol * std::hypot(z[0], z[1])) converged = true;
  }
  if (!converged) throw AdjointDiverged("adjoint did not converge within sweep limit");

  // final recording sweep
  AdjointSolution sol;
  sol.times.resize(n + 1);
  sol.z.resize(n + 1);
  sol.times[n] = T;
  sol.z[n] = z;
  for (std::size_t i = n; i-- > 0;) {
    z = adj_rk4(z, static_cast<double>(i + 1) * h, -h);
    sol.times[i] = static_cast<double>(i) * h;
    sol.z[i] = z;
  }
  return sol;
}

PhaseResponseCurve compute_adjoint_prc(const LimitCycle& cycle, const RHHParams& p, std::size_t K,
                                       double tol, int max_sweeps) {
  AdjointSolution adj = solve_adjoint(cycle, p, tol, max_sweeps);
  const std::size_t n = cycle.samples.size() - 1;
  double omega = 2.0 * M_PI / cycle.period;

  // resample z_V / C on a uniform theta grid; theta = omega * t
  const std::size_t grid = std::max<std::size_t>(2048, 4 * K + 1);
  std::vector<double> theta(grid), zv(grid);
  for (std::size_t j = 0; j < grid; ++j) {
    theta[j] = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(grid);
    double t = theta[j] / omega;
    double pos = t / cycle.dt;
    auto i = static_cast<std::size_t>(pos);
    if (i >= n) i = n - 1;
    double s = pos - static_cast<double>(i);
    zv[j] = ((1.0 - s) * adj.z[i][0] + s * adj.z[i + 1][0]) / p.C;
  }
  return fit_fourier(theta, zv, K);
}

}  // namespace desync
