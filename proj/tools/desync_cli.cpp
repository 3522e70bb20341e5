// Command-line front end: computes PRCs, optimal and approximate waveforms,
// two-oscillator runs, beta sweeps, and population simulations, emitting CSV
// and JSON files.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "desync/control.hpp"
#include "desync/experiments.hpp"
#include "desync/population.hpp"
#include "desync/prc.hpp"
#include "desync/rhh.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace desync;

namespace {

constexpr const char* kVersion = "0.1.0";

// exit codes, also listed in --help
constexpr int kOk = 0;
constexpr int kInvalidConfig = 2;
constexpr int kSolverFailure = 3;
constexpr int kIoFailure = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// SAX pass that rejects duplicate object keys (nlohmann silently keeps the
// last one otherwise)
struct DuplicateKeyChecker : json::json_sax_t {
  std::vector<std::set<std::string>> stack;
  bool key(string_t& val) override {
    if (!stack.back().insert(val).second)
      throw ConfigError("duplicate key in config: " + val);
    return true;
  }
  bool start_object(std::size_t) override { stack.emplace_back(); return true; }
  bool end_object() override { stack.pop_back(); return true; }
  bool start_array(std::size_t) override { return true; }
  bool end_array() override { return true; }
  bool null() override { return true; }
  bool boolean(bool) override { return true; }
  bool number_integer(number_integer_t) override { return true; }
  bool number_unsigned(number_unsigned_t) override { return true; }
  bool number_float(number_float_t, const string_t&) override { return true; }
  bool string(string_t&) override { return true; }
  bool binary(binary_t&) override { return true; }
  bool parse_error(std::size_t pos, const std::string&, const json::exception& ex) override {
    throw ConfigError("config parse error at byte " + std::to_string(pos) + ": " + ex.what());
  }
};

json load_config(const std::string& path, const std::set<std::string>& allowed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  DuplicateKeyChecker checker;
  json::sax_parse(text, &checker);
  json j = json::parse(text);
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown config key: " + key);
  return j;
}

void atomic_write(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
  }
  fs::rename(tmp, path);
}

// CSV/JSON emitters in the library write directly; route them through a temp
// file for atomicity
template <typename Fn>
void atomic_emit(const std::string& path, Fn&& save) {
  std::string tmp = path + ".tmp";
  save(tmp);
  fs::rename(tmp, path);
}

void write_manifest(const std::string& path, const std::string& command, const json& resolved) {
  json m;
  m["artifact_version"] = kVersion;
  m["command"] = command;
  m["config"] = resolved;
  atomic_write(path, m.dump(2) + "\n");
}

struct PrcContext {
  PhaseResponseCurve prc;
  double omega;
};

// "sin" | "sniper" | "rhh" | path to a coefficient file; omega_flag > 0
// overrides the natural frequency (ignored for rhh, which derives it from
// the limit cycle)
PrcContext resolve_prc(const std::string& name, double omega_flag) {
  if (name == "sin")
    return {PhaseResponseCurve::sine(0.5), omega_flag > 0 ? omega_flag : 1.0};
  if (name == "sniper")
    return {PhaseResponseCurve::sniper(0.3), omega_flag > 0 ? omega_flag : 1.0};
  if (name == "rhh") {
    RHHParams p;
    auto cycle = find_limit_cycle(p);
    return {compute_adjoint_prc(cycle, p), 2.0 * M_PI / cycle.period};
  }
  if (fs::exists(name)) {
    if (omega_flag <= 0)
      throw ConfigError("--omega is required with a PRC coefficient file");
    return {PhaseResponseCurve::load(name), omega_flag};
  }
  throw ConfigError("unknown PRC '" + name + "' (expected sin, sniper, rhh or a file path)");
}

std::string out_path(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "desync: energy-optimal stimulation waveforms for desynchronizing (or\n"
      "synchronizing) neural oscillators from their phase response curves.\n\n"
      "Exit codes: 0 success, 2 invalid config/usage, 3 solver failure,\n"
      "4 I/O failure."};
  app.require_subcommand(1);

  std::string config_path, prc_name, out_dir = ".", tag;
  double beta = 0.0, omega = 0.0, phi0 = 0.01;
  bool have_beta = false;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool needs_prc) {
    sub->add_option("--config", config_path, "JSON config file (flags override)");
    sub->add_option("--out-dir", out_dir, "output directory");
    sub->add_option("--tag", tag, "output file name tag (default: preset or prc name)");
    if (needs_prc) {
      sub->add_option("--prc", prc_name, "sin | sniper | rhh | coefficient file path");
      sub->add_option("--omega", omega, "angular frequency (rad/ms)");
      sub->add_option("--beta", beta, "lyapunov-exponent weight")->each([&](const std::string&) {
        have_beta = true;
      });
    }
  };

  auto* cmd_prc = app.add_subcommand("prc-compute",
                                     "compute the RHH limit cycle and adjoint PRC, write the "
                                     "coefficient file and cycle CSV");
  double ib = 10.0;
  std::size_t harmonics = 200;
  cmd_prc->add_option("--ib", ib, "baseline current (uA/cm^2)");
  cmd_prc->add_option("--harmonics", harmonics, "fourier harmonic count");
  add_common(cmd_prc, false);

  auto* cmd_solve =
      app.add_subcommand("solve", "shoot the optimal-waveform BVP; write waveform CSV + summary");
  add_common(cmd_solve, true);

  auto* cmd_approx = app.add_subcommand(
      "approx", "closed-form approximate waveforms u1, u2; optionally rescaled to the shot energy");
  bool rescale_opt = false;
  cmd_approx->add_flag("--rescale-to-optimal", rescale_opt,
                       "rescale both approximations to the energy of the shot optimum");
  add_common(cmd_approx, true);

  auto* cmd_pair = app.add_subcommand("pair-run",
                                      "two-oscillator run with optimal and approximate inputs");
  std::string preset_name;
  cmd_pair->add_option("--preset", preset_name, "named preset: sin, sniper, rhh, rhh-sync");
  cmd_pair->add_option("--phi0", phi0, "initial phase separation (rad)");
  add_common(cmd_pair, true);

  auto* cmd_sweep = app.add_subcommand("beta-sweep", "phi(T) table across beta values");
  std::vector<double> beta_list{2, 4, 6, 8, 10};
  cmd_sweep->add_option("--betas", beta_list, "beta grid");
  cmd_sweep->add_option("--phi0", phi0, "initial phase separation (rad)");
  add_common(cmd_sweep, true);

  auto* cmd_pop = app.add_subcommand("population",
                                     "coupled noisy RHH population under event-based control");
  PopulationConfig pop;
  std::string pop_input = "u2";  // optimal | u1 | u2 | none
  cmd_pop->add_option("--n", pop.N, "neuron count");
  cmd_pop->add_option("--alpha", pop.alpha, "coupling strength");
  cmd_pop->add_option("--noise", pop.D, "noise intensity D");
  cmd_pop->add_option("--threshold", pop.threshold, "trigger threshold (mV)");
  cmd_pop->add_option("--duration", pop.duration, "simulation length (ms)");
  cmd_pop->add_option("--dt", pop.dt, "time step (ms)");
  cmd_pop->add_option("--jitter", pop.jitter, "initial phase jitter width (rad)");
  cmd_pop->add_option("--seed", seed, "noise seed");
  cmd_pop->add_option("--input", pop_input, "optimal | u1 | u2 | none");
  add_common(cmd_pop, true);

  auto* cmd_mc = app.add_subcommand("monte-carlo",
                                    "energy statistics over noise realizations (Table-style)");
  std::size_t runs = 100;
  cmd_mc->add_option("--runs", runs, "number of noise realizations");
  cmd_mc->add_option("--n", pop.N, "neuron count");
  cmd_mc->add_option("--alpha", pop.alpha, "coupling strength");
  cmd_mc->add_option("--noise", pop.D, "noise intensity D");
  cmd_mc->add_option("--threshold", pop.threshold, "trigger threshold (mV)");
  cmd_mc->add_option("--duration", pop.duration, "simulation length (ms)");
  cmd_mc->add_option("--dt", pop.dt, "time step (ms)");
  cmd_mc->add_option("--jitter", pop.jitter, "initial phase jitter width (rad)");
  cmd_mc->add_option("--seed", seed, "base seed");
  add_common(cmd_mc, true);

  CLI11_PARSE(app, argc, argv);

  try {
    // config file first, then flag overrides
    auto merge_config = [&](const std::set<std::string>& allowed) -> json {
      json resolved = json::object();
      if (!config_path.empty()) {
        json cfg = load_config(config_path, allowed);
        for (const auto& [k, v] : cfg.items()) resolved[k] = v;
        if (cfg.contains("prc") && prc_name.empty()) prc_name = cfg["prc"];
        if (cfg.contains("omega") && omega == 0.0) omega = cfg["omega"];
        if (cfg.contains("beta") && !have_beta) {
          beta = cfg["beta"];
          have_beta = true;
        }
        if (cfg.contains("phi0") && !cmd_pair->count("--phi0") && !cmd_sweep->count("--phi0"))
          phi0 = cfg["phi0"];
        if (cfg.contains("N")) pop.N = cfg["N"];
        if (cfg.contains("alpha")) pop.alpha = cfg["alpha"];
        if (cfg.contains("D")) pop.D = cfg["D"];
        if (cfg.contains("threshold")) pop.threshold = cfg["threshold"];
        if (cfg.contains("duration")) pop.duration = cfg["duration"];
        if (cfg.contains("dt")) pop.dt = cfg["dt"];
        if (cfg.contains("jitter")) pop.jitter = cfg["jitter"];
        if (cfg.contains("seed") && !cmd_pop->count("--seed") && !cmd_mc->count("--seed"))
          seed = cfg["seed"];
        if (cfg.contains("runs") && !cmd_mc->count("--runs")) runs = cfg["runs"];
        if (cfg.contains("betas") && !cmd_sweep->count("--betas"))
          beta_list = cfg["betas"].get<std::vector<double>>();
        if (cfg.contains("input") && !cmd_pop->count("--input")) pop_input = cfg["input"];
      }
      return resolved;
    };

    if (*cmd_prc) {
      merge_config({"ib", "harmonics"});
      RHHParams p;
      p.I_b = ib;
      auto cycle = find_limit_cycle(p);
      auto prc = compute_adjoint_prc(cycle, p, harmonics);
      std::string base = tag.empty() ? "rhh" : tag;
      std::string prc_path = out_path(out_dir, "prc-" + base + ".json");
      std::string cyc_path = out_path(out_dir, "cycle-" + base + ".csv");
      atomic_emit(prc_path, [&](const std::string& t) { prc.save(t); });
      atomic_emit(cyc_path, [&](const std::string& t) { cycle.save_csv(t); });
      json resolved{{"ib", ib}, {"harmonics", harmonics}};
      write_manifest(out_path(out_dir, "prc-compute-" + base + "-manifest.json"), "prc-compute",
                     resolved);
      json summary{{"period_ms", cycle.period}, {"prc_file", prc_path}, {"cycle_file", cyc_path}};
      std::cout << summary.dump() << "\n";
      return kOk;
    }

    if (*cmd_solve || *cmd_approx) {
      merge_config({"prc", "omega", "beta"});
      if (prc_name.empty()) throw ConfigError("--prc is required");
      if (!have_beta) throw ConfigError("--beta is required");
      auto ctx = resolve_prc(prc_name, omega);
      std::string base = (tag.empty() ? prc_name : tag) + "-beta" + std::to_string(beta);
      json resolved{{"prc", prc_name}, {"omega", ctx.omega}, {"beta", beta}};

      if (*cmd_solve) {
        auto sol = shoot_optimal(ctx.prc, ctx.omega, beta);
        std::string wf = out_path(out_dir, "solve-" + base + ".csv");
        std::string sm = out_path(out_dir, "solve-" + base + ".json");
        atomic_emit(wf, [&](const std::string& t) { sol.waveform.save_csv(t); });
        atomic_write(sm, sol.summary_json() + "\n");
        write_manifest(out_path(out_dir, "solve-" + base + "-manifest.json"), "solve", resolved);
        json summary{{"beta", beta},       {"lambda0", sol.lambda0},
                     {"lyap", sol.lyap},   {"cost", sol.cost},
                     {"residual", sol.residual}, {"waveform_file", wf}};
        std::cout << summary.dump() << "\n";
      } else {
        auto u1 = approx_u1(ctx.prc, ctx.omega, beta);
        auto u2 = approx_u2(ctx.prc, ctx.omega, beta);
        if (rescale_opt) {
          double e = shoot_optimal(ctx.prc, ctx.omega, beta).waveform.energy();
          u1 = rescale_energy(u1, e);
          u2 = rescale_energy(u2, e);
        }
        std::string f1 = out_path(out_dir, "approx1-" + base + ".csv");
        std::string f2 = out_path(out_dir, "approx2-" + base + ".csv");
        atomic_emit(f1, [&](const std::string& t) { u1.save_csv(t); });
        atomic_emit(f2, [&](const std::string& t) { u2.save_csv(t); });
        resolved["rescale_to_optimal"] = rescale_opt;
        write_manifest(out_path(out_dir, "approx-" + base + "-manifest.json"), "approx", resolved);
        json summary{{"u1_energy", u1.energy()}, {"u2_energy", u2.energy()},
                     {"u1_file", f1},            {"u2_file", f2}};
        std::cout << summary.dump() << "\n";
      }
      return kOk;
    }

    if (*cmd_pair) {
      merge_config({"prc", "omega", "beta", "phi0", "preset"});
      if (!preset_name.empty()) {
        auto p = find_preset(preset_name);
        if (!p) throw ConfigError("unknown preset: " + preset_name);
        prc_name = p->prc_name == "rhh" ? "rhh" : (p->prc_name == "sin" ? "sin" : "sniper");
        beta = p->beta;
        have_beta = true;
        phi0 = p->phi0;
        if (p->prc_name != "rhh") omega = p->omega;
      }
      if (prc_name.empty()) throw ConfigError("--prc or --preset is required");
      if (!have_beta) throw ConfigError("--beta is required");
      auto ctx = resolve_prc(prc_name, omega);
      auto w = build_waveforms(ctx.prc, ctx.omega, beta);
      double dt = w.optimal.waveform.dt;
      auto r_opt = two_oscillator_run(ctx.prc, ctx.omega, w.optimal.waveform, phi0, dt,
                                      InputLabel::Optimal);
      auto r_u1 = two_oscillator_run(ctx.prc, ctx.omega, w.u1, phi0, dt, InputLabel::Approx1);
      auto r_u2 = two_oscillator_run(ctx.prc, ctx.omega, w.u2, phi0, dt, InputLabel::Approx2);
      std::string base = tag.empty() ? (preset_name.empty() ? prc_name : preset_name) : tag;
      for (const auto* r : {&r_opt, &r_u1, &r_u2})
        atomic_emit(out_path(out_dir, "pair-" + base + "-" + to_string(r->label) + ".csv"),
                    [&](const std::string& t) { r->save_csv(t); });
      json resolved{{"prc", prc_name}, {"omega", ctx.omega}, {"beta", beta}, {"phi0", phi0}};
      write_manifest(out_path(out_dir, "pair-" + base + "-manifest.json"), "pair-run", resolved);
      json summary{{"phi_T_optimal", r_opt.phi_final},
                   {"phi_T_approx1", r_u1.phi_final},
                   {"phi_T_approx2", r_u2.phi_final},
                   {"phi0", phi0}};
      std::cout << summary.dump() << "\n";
      return kOk;
    }

    if (*cmd_sweep) {
      merge_config({"prc", "omega", "betas", "phi0"});
      if (prc_name.empty()) throw ConfigError("--prc is required");
      auto ctx = resolve_prc(prc_name, omega);
      auto rows = beta_sweep(ctx.prc, ctx.omega, beta_list, phi0,
                             2.0 * M_PI / ctx.omega / kGridPerPeriod);
      std::string base = tag.empty() ? prc_name : tag;
      std::string f = out_path(out_dir, "sweep-" + base + ".csv");
      atomic_emit(f, [&](const std::string& t) { save_sweep_csv(rows, t); });
      json resolved{{"prc", prc_name}, {"omega", ctx.omega}, {"betas", beta_list}, {"phi0", phi0}};
      write_manifest(out_path(out_dir, "sweep-" + base + "-manifest.json"), "beta-sweep",
                     resolved);
      json summary{{"rows", rows.size()}, {"sweep_file", f}};
      std::cout << summary.dump() << "\n";
      return kOk;
    }

    if (*cmd_pop || *cmd_mc) {
      merge_config({"prc", "omega", "beta", "N", "alpha", "D", "threshold", "duration", "dt",
                    "jitter", "seed", "runs", "input"});
      if (!have_beta) beta = 7.0;
      pop.seed = seed;
      pop.validate();
      RHHParams params;
      auto cycle = find_limit_cycle(params);
      auto prc = compute_adjoint_prc(cycle, params);
      auto w = build_waveforms(prc, 2.0 * M_PI / cycle.period, beta);
      json resolved{{"beta", beta},           {"N", pop.N},
                    {"alpha", pop.alpha},     {"D", pop.D},
                    {"threshold", pop.threshold}, {"duration", pop.duration},
                    {"dt", pop.dt},           {"jitter", pop.jitter},
                    {"seed", seed}};

      if (*cmd_pop) {
        const ControlWaveform* wf = nullptr;
        if (pop_input == "optimal") wf = &w.optimal.waveform;
        else if (pop_input == "u1") wf = &w.u1;
        else if (pop_input == "u2") wf = &w.u2;
        else if (pop_input != "none") throw ConfigError("invalid --input: " + pop_input);
        auto trace = simulate_population(pop, cycle, wf);
        std::string base =
            (tag.empty() ? pop_input : tag) + "-" + std::to_string(seed);
        atomic_emit(out_path(out_dir, "population-" + base + "-meanv.csv"),
                    [&](const std::string& t) { trace.save_mean_voltage_csv(t); });
        atomic_emit(out_path(out_dir, "population-" + base + "-control.csv"),
                    [&](const std::string& t) { trace.save_control_csv(t); });
        atomic_emit(out_path(out_dir, "population-" + base + "-spikes.csv"),
                    [&](const std::string& t) { trace.save_spikes_csv(t); });
        resolved["input"] = pop_input;
        write_manifest(out_path(out_dir, "population-" + base + "-manifest.json"), "population",
                       resolved);
        json summary{{"energy", trace.energy},
                     {"triggers", trace.trigger_times.size()},
                     {"input", pop_input}};
        std::cout << summary.dump() << "\n";
      } else {
        std::map<std::string, ControlWaveform> labeled{
            {"optimal", w.optimal.waveform}, {"u1", w.u1}, {"u2", w.u2}};
        auto stats = monte_carlo_energy(pop, cycle, labeled, runs);
        json out = json::array();
        for (const auto& [label, s] : stats)
          out.push_back({{"label", label},
                         {"runs", s.runs},
                         {"mean_energy", s.mean},
                         {"stdev_energy", s.stdev}});
        std::string base = (tag.empty() ? "table" : tag) + "-" + std::to_string(seed);
        atomic_write(out_path(out_dir, "monte-carlo-" + base + ".json"), out.dump(2) + "\n");
        resolved["runs"] = runs;
        write_manifest(out_path(out_dir, "monte-carlo-" + base + "-manifest.json"), "monte-carlo",
                       resolved);
        std::cout << out.dump() << "\n";
      }
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "{\"error\":\"invalid-config\",\"detail\":\"" << e.what() << "\"}\n";
    return kInvalidConfig;
  } catch (const ShootingFailed& e) {
    std::cerr << "{\"error\":\"shooting-failed\",\"detail\":\"" << e.what() << "\"}\n";
    return kSolverFailure;
  } catch (const IntegrationDiverged& e) {
    std::cerr << "{\"error\":\"integration-diverged\",\"detail\":\"" << e.what() << "\"}\n";
    return kSolverFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "{\"error\":\"invalid-config\",\"detail\":\"" << e.what() << "\"}\n";
    return kInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":\"io-failure\",\"detail\":\"" << e.what() << "\"}\n";
    return kIoFailure;
  }
  return kInvalidConfig;
}
