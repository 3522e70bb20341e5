#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "desync/control.hpp"
#include "doctest.h"

using namespace desync;

namespace {

ControlWaveform sampled(const std::function<double(double)>& f, double T,
                        std::size_t grid = kGridPerPeriod) {
  ControlWaveform w;
  w.dt = T / static_cast<double>(grid);
  w.samples.resize(grid + 1);
  for (std::size_t j = 0; j <= grid; ++j) w.samples[j] = f(static_cast<double>(j) * w.dt);
  return w;
}

ControlWaveform zero_waveform(double T) {
  return sampled([](double) { return 0.0; }, T);
}

const auto z_sine = PhaseResponseCurve::sine(0.5);
const auto z_sniper = PhaseResponseCurve::sniper(0.3);

}  // namespace

TEST_CASE("waveform energy and interpolation") {
  auto w = sampled([](double t) { return std::sin(t); }, 2 * M_PI);
  CHECK(w.energy() == doctest::Approx(M_PI).epsilon(1e-8));
  CHECK(w.at(-1.0) == 0.0);
  CHECK(w.at(100.0) == 0.0);
  CHECK(w.at(1.0) == doctest::Approx(std::sin(1.0)).epsilon(1e-6));
}

TEST_CASE("lyapunov exponent of zero input is zero") {
  CHECK(lyapunov_exponent(z_sine, 1.0, zero_waveform(2 * M_PI)) == 0.0);
}

TEST_CASE("lyapunov exponent, linearized oracle") {
  // u = eps*0.5*cos(t), Z' = 0.5*cos: (1/2pi) * eps * int 0.25 cos^2 = eps/8
  const double eps = 0.01;
  auto u = sampled([&](double t) { return eps * 0.5 * std::cos(t); }, 2 * M_PI);
  CHECK(lyapunov_exponent(z_sine, 1.0, u) == doctest::Approx(eps / 8.0).epsilon(0.01));
}

TEST_CASE("lyapunov exponent flips sign with the input") {
  auto u = sampled([](double t) { return 0.01 * 0.5 * std::cos(t); }, 2 * M_PI);
  double lp = lyapunov_exponent(z_sine, 1.0, u);
  double lm = lyapunov_exponent(z_sine, 1.0, u.scaled(-1.0));
  CHECK(lm == doctest::Approx(-lp).epsilon(1e-3));
}

TEST_CASE("cost functional") {
  CHECK(cost_G(z_sine, 1.0, zero_waveform(2 * M_PI), 10.0) == 0.0);

  auto u = sampled([](double t) { return 0.01 * 0.5 * std::cos(t); }, 2 * M_PI);
  CHECK(cost_G(z_sine, 1.0, u, 0.0) == doctest::Approx(u.energy()));

  double lam = lyapunov_exponent(z_sine, 1.0, u);
  CHECK(cost_G(z_sine, 1.0, u, 10.0) ==
        doctest::Approx(u.energy() - 10.0 * 2 * M_PI * lam).epsilon(1e-10));
}

TEST_CASE("euler-lagrange flow with beta=0, lambda0=0 is free rotation") {
  auto [theta, lambda] = euler_lagrange_flow(z_sine, 1.0, 0.0, 0.0, 2 * M_PI / 2048);
  CHECK(std::abs(theta.back()[0] - 2 * M_PI) < 1e-10);
  for (const auto& s : lambda.states) CHECK(s[0] == 0.0);
}

TEST_CASE("euler-lagrange flow with beta=0 keeps lambda constant") {
  // beta = 0: lambdadot = -lambda^2 Z Z' / 2... vanishes only when Z' or Z
  // term cancels; for Z = a sin the product does not vanish, so check
  // against an independent integration of the same reduced system instead.
  const double c = 0.7;
  auto [theta, lambda] = euler_lagrange_flow(z_sine, 1.0, 0.0, c, 2 * M_PI / 2048);
  auto field = [&](const State& x, double) -> State {
    double z = z_sine.eval(x[0]), z1 = z_sine.eval(x[0], 1);
    double u = x[1] * z / 2.0;
    return {z * u + 1.0, -u * x[1] * z1};
  };
  auto ref = integrate_ode(field, {0.0, c}, 0.0, 2 * M_PI, 2 * M_PI / 2048);
  CHECK(theta.back()[0] == doctest::Approx(ref.back()[0]).epsilon(1e-12));
  CHECK(lambda.back()[0] == doctest::Approx(ref.back()[1]).epsilon(1e-12));
}

TEST_CASE("shooting at beta=0 returns the zero input") {
  auto sol = shoot_optimal(z_sine, 1.0, 0.0, 1e-10);
  CHECK(sol.lambda0 == doctest::Approx(0.0));
  CHECK(std::abs(sol.lyap) < 1e-12);
  CHECK(std::abs(sol.cost) < 1e-12);
  for (double s : sol.waveform.samples) CHECK(std::abs(s) < 1e-12);
}

TEST_CASE("shooting solves the sine problem at beta=10") {
  auto sol = shoot_optimal(z_sine, 1.0, 10.0, 1e-10);
  CHECK(std::abs(sol.residual) <= 1e-8);
  CHECK(sol.lyap > 0.0);

  // pointwise consistency of the reconstructed waveform
  for (std::size_t j = 0; j < sol.theta_traj.size(); ++j) {
    double th = sol.theta_traj.states[j][0], la = sol.lambda_traj.states[j][0];
    double u = (10.0 * z_sine.eval(th, 1) + la * z_sine.eval(th)) / 2.0;
    CHECK(std::abs(sol.waveform.samples[j] - u) <= 1e-8);
  }
}

TEST_CASE("the lambda(0) estimate from the costate approximation is bracketable") {
  for (double beta : {2.0, 4.0}) {
    auto sol = shoot_optimal(z_sine, 1.0, beta, 1e-10);
    double guess = -beta * beta * 0.25 / 4.0;  // -beta^2 [Z'(0)]^2 / (4 omega)
    // the estimate points at the right sign and lands inside the probe range
    CHECK(guess * sol.lambda0 > 0.0);
    double probe_limit = beta * beta * 0.25;  // beta^2 max(Z')^2 / omega
    CHECK(std::abs(guess) <= probe_limit);
    CHECK(std::abs(sol.lambda0) <= probe_limit);
  }
}

TEST_CASE("first approximation closed form") {
  auto u1 = approx_u1(z_sine, 1.0, 10.0);
  CHECK(u1.samples[0] == doctest::Approx(2.5));
  CHECK(u1.energy() == doctest::Approx(6.25 * M_PI).epsilon(1e-6));

  auto u1s = approx_u1(z_sniper, 1.0, 10.0);
  CHECK(u1s.samples[0] == doctest::Approx(0.0));
}

TEST_CASE("second approximation closed form") {
  auto u2 = approx_u2(z_sine, 1.0, 10.0);
  CHECK(u2.samples[0] == doctest::Approx(2.5));
  CHECK(u2.samples[2048 / 4] == doctest::Approx(0.0).epsilon(1e-12));
  // t = pi/4: 2.5*sqrt(2)/2 - 12.5*(0.5*cos^2)*(0.5*sin) = 1.21534
  CHECK(u2.samples[2048 / 8] == doctest::Approx(1.21534).epsilon(1e-5));
}

TEST_CASE("energy rescaling") {
  auto w = sampled([](double t) { return 2.0 * std::sin(t); }, 2 * M_PI);
  double e = w.energy();
  auto half = rescale_energy(w, e / 4.0);
  for (std::size_t j = 0; j < w.samples.size(); ++j)
    CHECK(half.samples[j] == doctest::Approx(w.samples[j] / 2.0).epsilon(1e-12));

  auto same = rescale_energy(w, e);
  for (std::size_t j = 0; j < w.samples.size(); ++j)
    CHECK(same.samples[j] == doctest::Approx(w.samples[j]).epsilon(1e-14));

  CHECK_THROWS_AS(rescale_energy(zero_waveform(2 * M_PI), 1.0), CannotRescale);
}

TEST_CASE("rescaled approximations match the shot energy") {
  auto sol = shoot_optimal(z_sine, 1.0, 10.0, 1e-10);
  double e = sol.waveform.energy();
  auto u1 = rescale_energy(approx_u1(z_sine, 1.0, 10.0), e);
  auto u2 = rescale_energy(approx_u2(z_sine, 1.0, 10.0), e);
  CHECK(std::abs(u1.energy() - e) / e <= 1e-10);
  CHECK(std::abs(u2.energy() - e) / e <= 1e-10);
}

TEST_CASE("approximate lyapunov exponent") {
  CHECK(approx_lyapunov(z_sine, 1.0, 0.0) == doctest::Approx(0.0));
  // beta = 10: (beta/2)(1/2pi) int 0.25 cos^2 = 0.625; the cubic term
  // integrates to zero by symmetry
  CHECK(approx_lyapunov(z_sine, 1.0, 10.0) == doctest::Approx(0.625).epsilon(1e-6));
}

TEST_CASE("c-independence of the approximate lyapunov exponent") {
  const double omega = 1.0, beta = 10.0, T = 2 * M_PI;
  double base = approx_lyapunov(z_sine, omega, beta);
  for (double c : {-5.0, 5.0}) {
    const std::size_t n = kGridPerPeriod;
    double dt = T / n;
    std::vector<double> integrand(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
      double th = omega * j * dt;
      double z = z_sine.eval(th), z1 = z_sine.eval(th, 1);
      double u = beta / 2.0 * z1 - beta * beta / (8 * omega) * z1 * z1 * z + c / 2.0 * z;
      integrand[j] = z1 * u;
    }
    double with_c = trapezoid_integral(integrand, dt) / T;
    CHECK(std::abs(with_c - base) < 1e-10);
  }
}

TEST_CASE("vanishing integral of Z' Z over one period") {
  for (const auto& z : {z_sine, z_sniper, PhaseResponseCurve::fourier(0.1, {0.2, -0.1}, {0.3, 0.05})}) {
    const std::size_t n = kGridPerPeriod;
    double dt = 2 * M_PI / n;
    std::vector<double> integrand(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
      double th = j * dt;
      integrand[j] = z.eval(th, 1) * z.eval(th);
    }
    CHECK(std::abs(trapezoid_integral(integrand, dt)) <= 1e-10);
  }
}

TEST_CASE("the shot input beats both rescaled approximations on cost") {
  auto sol = shoot_optimal(z_sine, 1.0, 10.0, 1e-10);
  double e = sol.waveform.energy();
  auto u1 = rescale_energy(approx_u1(z_sine, 1.0, 10.0), e);
  auto u2 = rescale_energy(approx_u2(z_sine, 1.0, 10.0), e);
  CHECK(sol.cost <= cost_G(z_sine, 1.0, u1, 10.0) + 1e-9);
  CHECK(sol.cost <= cost_G(z_sine, 1.0, u2, 10.0) + 1e-9);
}

TEST_CASE("sign symmetry of the shot lyapunov exponent in beta") {
  for (double beta : {2.0, 5.0}) {
    auto plus = shoot_optimal(z_sine, 1.0, beta, 1e-10);
    auto minus = shoot_optimal(z_sine, 1.0, -beta, 1e-10);
    CHECK(plus.lyap > 0.0);
    CHECK(minus.lyap < 0.0);
    CHECK(std::abs(minus.lyap) == doctest::Approx(plus.lyap).epsilon(0.05));
  }
}
