#include "desync/prc.hpp"

#include <cmath>
#include <fstream>

#include "desync/control.hpp"
#include "json.hpp"

namespace desync {

PhaseResponseCurve PhaseResponseCurve::sine(double amplitude) {
  PhaseResponseCurve p;
  p.kind_ = Kind::Sine;
  p.amplitude_ = amplitude;
  return p;
}

PhaseResponseCurve PhaseResponseCurve::sniper(double amplitude) {
  PhaseResponseCurve p;
  p.kind_ = Kind::Sniper;
  p.amplitude_ = amplitude;
  return p;
}

PhaseResponseCurve PhaseResponseCurve::fourier(double a0, std::vector<double> a,
                                               std::vector<double> b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("fourier PRC needs matching, non-empty coefficient lists");
  PhaseResponseCurve p;
  p.kind_ = Kind::Fourier;
  p.a0_ = a0;
  p.a_ = std::move(a);
  p.b_ = std::move(b);
  return p;
}

double PhaseResponseCurve::eval(double theta, int order) const {
  theta = std::fmod(theta, 2.0 * M_PI);
  if (theta < 0.0) theta += 2.0 * M_PI;
  switch (kind_) {
    case Kind::Sine:
      switch (order) {
        case 0: return amplitude_ * std::sin(theta);
        case 1: return amplitude_ * std::cos(theta);
        case 2: return -amplitude_ * std::sin(theta);
      }
      break;
    case Kind::Sniper:
      switch (order) {
        case 0: return amplitude_ * (1.0 - std::cos(theta));
        case 1: return amplitude_ * std::sin(theta);
        case 2: return amplitude_ * std::cos(theta);
      }
      break;
    case Kind::Fourier: {
      if (order < 0 || order > 2) throw std::invalid_argument("order must be 0, 1 or 2");
      // harmonics via the angle-addition recurrence, no per-term trig calls
      double s = (order == 0) ? a0_ : 0.0;
      const double c1 = std::cos(theta), s1 = std::sin(theta);
      double ck = 1.0, sk = 0.0;  // cos/sin of k*theta, starting at k=0
      for (std::size_t i = 0; i < a_.size(); ++i) {
        double cn = ck * c1 - sk * s1;
        double sn = sk * c1 + ck * s1;
        ck = cn;
        sk = sn;
        double k = static_cast<double>(i + 1);
        switch (order) {
          case 0: s += a_[i] * ck + b_[i] * sk; break;
          case 1: s += k * (-a_[i] * sk + b_[i] * ck); break;
          default: s += k * k * (-a_[i] * ck - b_[i] * sk); break;
        }
      }
      return s;
    }
  }
  throw std::invalid_argument("order must be 0, 1 or 2");
}

double PhaseResponseCurve::max_abs(int order) const {
  const std::size_t n = 4096;
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    m = std::max(m, std::abs(eval(2.0 * M_PI * static_cast<double>(i) / n, order)));
  return m;
}

std::string PhaseResponseCurve::to_json() const {
  nlohmann::json j;
  j["schema"] = "prc-v1";
  switch (kind_) {
    case Kind::Sine:
      j["variant"] = "sine";
      j["amplitude"] = amplitude_;
      break;
    case Kind::Sniper:
      j["variant"] = "sniper";
      j["amplitude"] = amplitude_;
      break;
    case Kind::Fourier:
      j["variant"] = "fourier";
      j["a0"] = a0_;
      j["a"] = a_;
      j["b"] = b_;
      break;
  }
  return j.dump(2);
}

PhaseResponseCurve PhaseResponseCurve::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("schema", "") != "prc-v1")
    throw std::runtime_error("unsupported PRC file schema");
  std::string variant = j.at("variant");
  if (variant == "sine") return sine(j.at("amplitude"));
  if (variant == "sniper") return sniper(j.at("amplitude"));
  if (variant == "fourier")
    return fourier(j.at("a0"), j.at("a").get<std::vector<double>>(),
                   j.at("b").get<std::vector<double>>());
  throw std::runtime_error("unknown PRC variant: " + variant);
}

void PhaseResponseCurve::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json() << "\n";
}

PhaseResponseCurve PhaseResponseCurve::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

PhaseResponseCurve fit_fourier(const std::vector<double>& theta_samples,
                               const std::vector<double>& z_samples, std::size_t K) {
  const std::size_t n = theta_samples.size();
  if (n != z_samples.size()) throw std::invalid_argument("sample length mismatch");
  if (n < 2 * K + 1)
    throw InsufficientData("need at least 2K+1 samples for K=" + std::to_string(K));
  // uniform grid over [0, 2*pi): periodic trapezoid reduces to the mean
  double a0 = 0.0;
  for (double z : z_samples) a0 += z;
  a0 /= static_cast<double>(n);
  std::vector<double> a(K, 0.0), b(K, 0.0);
  for (std::size_t k = 1; k <= K; ++k) {
    double ca = 0.0, cb = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      ca += z_samples[j] * std::cos(static_cast<double>(k) * theta_samples[j]);
      cb += z_samples[j] * std::sin(static_cast<double>(k) * theta_samples[j]);
    }
    a[k - 1] = 2.0 * ca / static_cast<double>(n);
    b[k - 1] = 2.0 * cb / static_cast<double>(n);
  }
  return PhaseResponseCurve::fourier(a0, std::move(a), std::move(b));
}

Trajectory simulate_phase(const PhaseResponseCurve& prc, const PhaseModelParams& params,
                          const ControlWaveform* u, double theta0, double t_end, double dt) {
  auto field = [&](const State& x, double t) -> State {
    double input = u ? u->at(t) : 0.0;
    return {params.omega + prc.eval(x[0]) * input};
  };
  return integrate_ode(field, {theta0}, 0.0, t_end, dt);
}

}  // namespace desync
