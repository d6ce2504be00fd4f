// Declarative scenario files and batch execution: evolution, steady states,
// trajectory ensembles, dark-state certification, Fisher analysis, parameter
// sweeps, susceptibility fits, CSV/manifest export.
#pragma once

#include "chiralspin/darklab.hpp"
#include "chiralspin/evolve.hpp"
#include "chiralspin/fisher.hpp"
#include "chiralspin/mcwf.hpp"
#include "chiralspin/netmodel.hpp"
#include "chiralspin/qops.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace chiralspin {

inline constexpr const char* kLibraryVersion = "1.0.0";
inline constexpr int kScenarioSchemaVersion = 1;

using json = nlohmann::json;

struct EvolveTask {
  double t_max = 100.0;
  int samples = 101;
  std::vector<double> sample_times;  // overrides samples when non-empty
  std::vector<std::vector<std::size_t>> probes;
  double rel_tol = 1e-8;
  double abs_tol = 1e-8;
};

struct SteadyTask {
  double t_max = 1000.0;
  double residual = 1e-8;
  std::vector<std::vector<std::size_t>> probes;
};

struct TrajectoryTask {
  int n_traj = 100;
  double t_max = 20.0;
  int samples = 41;
  std::vector<double> sample_times;
  std::vector<std::vector<std::size_t>> probes;
  bool allow_large = false;
  bool record_jumps = false;
};

struct DarkstateTask {
  // dimerized | tetramer | paired | permutation | two_guide
  std::string construction = "dimerized";
  std::vector<std::size_t> permutation;  // for construction = permutation
  std::vector<double> staggered;         // source pattern for permutation
  bool check_steady = true;
  double steady_t_max = 1000.0;
};

struct FisherTask {
  // classical: staggered probe + J^z POVM on the steady state
  // qfi: SLD quantum Fisher information with the staggered probe
  // optimize: generator optimization on the dominant steady-state eigenvector
  std::string mode = "classical";
  int restarts = 32;
  double steady_t_max = 1000.0;
  // "evolve": long-time integration; "direct": sparse null-space solve of the
  // vectorized generator (for slowly relaxing strong-drive networks)
  std::string steady_method = "evolve";
};

struct SweepTarget {
  std::string path;  // e.g. network.drive.detuning[0] or network.onsite_decay
  double scale = 1.0;
};

struct SweepAxis {
  std::string name;
  std::vector<double> values;
  std::vector<SweepTarget> targets;
};

struct SweepTask {
  std::string subtask = "steady";  // steady | fisher
  std::vector<SweepAxis> axes;
};

struct AdiabaticTask {
  std::vector<double> ramp_times;
  bool include_sudden = true;
  double settle_factor = 1.0;  // evolve to settle_factor * ramp duration past the ramp
  std::vector<std::vector<std::size_t>> probes;
};

struct Scenario {
  int version = kScenarioSchemaVersion;
  std::string name = "scenario";
  std::string comment;
  std::uint64_t seed = 0;
  std::string task;  // evolve | steady | trajectories | darkstate | fisher | sweep | adiabatic
  NetworkSpec network;

  EvolveTask evolve;
  SteadyTask steady;
  TrajectoryTask trajectories;
  DarkstateTask darkstate;
  FisherTask fisher;
  SweepTask sweep;
  AdiabaticTask adiabatic;

  json raw;  // canonical parsed form, used for sweeps and the manifest echo
};

namespace detail {

[[noreturn]] inline void scenario_error(const std::string& path, const std::string& what) {
  throw std::invalid_argument("scenario: " + path + ": " + what);
}

inline void require_object(const json& j, const std::string& path,
                           std::initializer_list<const char*> allowed) {
  if (!j.is_object()) scenario_error(path, "expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) scenario_error(path + "." + key, "unknown key");
  }
}

inline double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) scenario_error(path, "expected a number");
  return j.get<double>();
}

inline std::vector<double> number_list(const json& j, const std::string& path, std::size_t n,
                                       bool broadcast_scalar = true) {
  if (broadcast_scalar && j.is_number()) return std::vector<double>(n, j.get<double>());
  if (!j.is_array() || j.size() != n)
    scenario_error(path, "expected a list of length " + std::to_string(n));
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<std::size_t> index_list(const json& j, const std::string& path) {
  if (!j.is_array()) scenario_error(path, "expected a list of spin indices");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    if (!e.is_number_unsigned() || e.get<std::size_t>() < 1)
      scenario_error(path + "[" + std::to_string(i) + "]", "expected a 1-based spin index");
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

inline std::vector<std::vector<std::size_t>> probe_list(const json& j, const std::string& path,
                                                        std::size_t n) {
  std::vector<std::vector<std::size_t>> probes;
  if (!j.is_array()) scenario_error(path, "expected a list of spin subsets");
  for (std::size_t i = 0; i < j.size(); ++i) {
    auto p = index_list(j[i], path + "[" + std::to_string(i) + "]");
    for (std::size_t s : p)
      if (s > n) scenario_error(path + "[" + std::to_string(i) + "]", "spin index exceeds n_spins");
    probes.push_back(std::move(p));
  }
  return probes;
}

inline NetworkSpec parse_network(const json& j, const std::string& path) {
  require_object(j, path, {"n_spins", "drive", "waveguides", "onsite_decay"});
  NetworkSpec spec;
  if (!j.contains("n_spins")) scenario_error(path + ".n_spins", "missing");
  spec.n_spins = j.at("n_spins").get<std::size_t>();
  const std::size_t n = spec.n_spins;

  if (!j.contains("drive")) scenario_error(path + ".drive", "missing");
  const json& jd = j.at("drive");
  require_object(jd, path + ".drive", {"rabi", "detuning", "schedule"});
  auto rabi = number_list(jd.value("rabi", json(0.0)), path + ".drive.rabi", n);
  spec.drive.rabi.assign(rabi.begin(), rabi.end());
  spec.drive.detuning = number_list(jd.value("detuning", json(0.0)), path + ".drive.detuning", n);
  if (jd.contains("schedule")) {
    const json& js = jd.at("schedule");
    require_object(js, path + ".drive.schedule", {"omega_scale", "t_max"});
    RampSchedule sched;
    sched.omega_scale = js.value("omega_scale", 1.0);
    sched.t_max = get_number(js.at("t_max"), path + ".drive.schedule.t_max");
    spec.drive.schedule = sched;
  }

  if (!j.contains("waveguides")) scenario_error(path + ".waveguides", "missing");
  const json& jw = j.at("waveguides");
  if (!jw.is_array() || jw.empty()) scenario_error(path + ".waveguides", "expected a non-empty list");
  for (std::size_t m = 0; m < jw.size(); ++m) {
    const std::string wp = path + ".waveguides[" + std::to_string(m) + "]";
    require_object(jw[m], wp, {"gamma_L", "gamma_R", "order", "phases", "per_spin_rates"});
    WaveguideSpec wg;
    wg.gamma_L = jw[m].value("gamma_L", 0.0);
    wg.gamma_R = jw[m].value("gamma_R", 1.0);
    if (jw[m].contains("order")) {
      wg.order = index_list(jw[m].at("order"), wp + ".order");
    } else {
      wg.order.resize(n);
      for (std::size_t i = 0; i < n; ++i) wg.order[i] = i + 1;
    }
    wg.phases = number_list(jw[m].value("phases", json(0.0)), wp + ".phases", n);
    if (jw[m].contains("per_spin_rates"))
      wg.per_spin_rates = number_list(jw[m].at("per_spin_rates"), wp + ".per_spin_rates", n, false);
    spec.waveguides.push_back(std::move(wg));
  }
  spec.onsite_decay = j.value("onsite_decay", 0.0);
  try {
    validate_spec(spec);
  } catch (const std::exception& e) {
    scenario_error(path, e.what());
  }
  return spec;
}

inline std::vector<double> parse_axis_values(const json& j, const std::string& path) {
  if (j.is_array()) {
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i)
      v.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
    return v;
  }
  require_object(j, path, {"start", "stop", "count"});
  const double start = get_number(j.at("start"), path + ".start");
  const double stop = get_number(j.at("stop"), path + ".stop");
  const int count = j.at("count").get<int>();
  if (count < 1) scenario_error(path + ".count", "must be >= 1");
  std::vector<double> v;
  for (int i = 0; i < count; ++i)
    v.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
  return v;
}

}  // namespace detail

inline Scenario parse_scenario(const json& j);

// Follows a dotted path (with optional [i] indices) into a scenario JSON and
// adds `delta` to the numeric leaf, or to every element of a numeric list.
inline void apply_additive_target(json& root, const std::string& path, double delta) {
  json* cur = &root;
  std::size_t i = 0;
  while (i < path.size()) {
    std::size_t dot = path.find_first_of(".[", i);
    const std::string key = path.substr(i, (dot == std::string::npos ? path.size() : dot) - i);
    if (!key.empty()) {
      if (!cur->is_object() || !cur->contains(key))
        throw std::invalid_argument("sweep target: no field " + key + " in " + path);
      cur = &cur->at(key);
    }
    if (dot == std::string::npos) break;
    if (path[dot] == '[') {
      std::size_t close = path.find(']', dot);
      if (close == std::string::npos) throw std::invalid_argument("sweep target: unbalanced [ in " + path);
      const std::size_t idx = std::stoul(path.substr(dot + 1, close - dot - 1));
      if (!cur->is_array() || idx >= cur->size())
        throw std::invalid_argument("sweep target: index out of range in " + path);
      cur = &(*cur)[idx];
      i = close + 1;
      if (i < path.size() && path[i] == '.') ++i;
    } else {
      i = dot + 1;
    }
  }
  if (cur->is_number()) {
    *cur = cur->get<double>() + delta;
  } else if (cur->is_array()) {
    for (auto& e : *cur) {
      if (!e.is_number())
        throw std::invalid_argument("sweep target: non-numeric list at " + path);
      e = e.get<double>() + delta;
    }
  } else {
    throw std::invalid_argument("sweep target: " + path + " is not a scalar field");
  }
}

inline Scenario parse_scenario(const json& j) {
  detail::require_object(j, "$", {"version", "name", "comment", "seed", "task", "network",
                                  "evolve", "steady", "trajectories", "darkstate", "fisher",
                                  "sweep", "adiabatic"});
  Scenario s;
  s.raw = j;
  s.version = j.value("version", kScenarioSchemaVersion);
  if (s.version != kScenarioSchemaVersion)
    detail::scenario_error("$.version", "unsupported schema version");
  s.name = j.value("name", std::string("scenario"));
  s.comment = j.value("comment", std::string());
  s.seed = j.value("seed", std::uint64_t(0));
  if (!j.contains("task")) detail::scenario_error("$.task", "missing");
  s.task = j.at("task").get<std::string>();
  if (!j.contains("network")) detail::scenario_error("$.network", "missing");
  s.network = detail::parse_network(j.at("network"), "$.network");
  const std::size_t n = s.network.n_spins;

  const bool known = s.task == "evolve" || s.task == "steady" || s.task == "trajectories" ||
                     s.task == "darkstate" || s.task == "fisher" || s.task == "sweep" ||
                     s.task == "adiabatic";
  if (!known) detail::scenario_error("$.task", "unknown task " + s.task);

  if (j.contains("evolve")) {
    const json& je = j.at("evolve");
    detail::require_object(je, "$.evolve",
                           {"t_max", "samples", "sample_times", "probes", "rel_tol", "abs_tol"});
    s.evolve.t_max = je.value("t_max", s.evolve.t_max);
    s.evolve.samples = je.value("samples", s.evolve.samples);
    if (je.contains("sample_times"))
      s.evolve.sample_times = detail::number_list(je.at("sample_times"), "$.evolve.sample_times",
                                                  je.at("sample_times").size(), false);
    if (je.contains("probes")) s.evolve.probes = detail::probe_list(je.at("probes"), "$.evolve.probes", n);
    s.evolve.rel_tol = je.value("rel_tol", s.evolve.rel_tol);
    s.evolve.abs_tol = je.value("abs_tol", s.evolve.abs_tol);
  }
  if (j.contains("steady")) {
    const json& js = j.at("steady");
    detail::require_object(js, "$.steady", {"t_max", "residual", "probes"});
    s.steady.t_max = js.value("t_max", s.steady.t_max);
    s.steady.residual = js.value("residual", s.steady.residual);
    if (js.contains("probes")) s.steady.probes = detail::probe_list(js.at("probes"), "$.steady.probes", n);
  }
  if (j.contains("trajectories")) {
    const json& jt = j.at("trajectories");
    detail::require_object(jt, "$.trajectories", {"n_traj", "t_max", "samples", "sample_times",
                                                  "probes", "allow_large", "record_jumps"});
    s.trajectories.n_traj = jt.value("n_traj", s.trajectories.n_traj);
    s.trajectories.t_max = jt.value("t_max", s.trajectories.t_max);
    s.trajectories.samples = jt.value("samples", s.trajectories.samples);
    if (jt.contains("sample_times"))
      s.trajectories.sample_times = detail::number_list(
          jt.at("sample_times"), "$.trajectories.sample_times", jt.at("sample_times").size(), false);
    if (jt.contains("probes"))
      s.trajectories.probes = detail::probe_list(jt.at("probes"), "$.trajectories.probes", n);
    s.trajectories.allow_large = jt.value("allow_large", false);
    s.trajectories.record_jumps = jt.value("record_jumps", false);
  }
  if (j.contains("darkstate")) {
    const json& jd = j.at("darkstate");
    detail::require_object(jd, "$.darkstate",
                           {"construction", "permutation", "staggered", "check_steady", "steady_t_max"});
    s.darkstate.construction = jd.value("construction", s.darkstate.construction);
    if (jd.contains("permutation"))
      s.darkstate.permutation = detail::index_list(jd.at("permutation"), "$.darkstate.permutation");
    if (jd.contains("staggered"))
      s.darkstate.staggered = detail::number_list(jd.at("staggered"), "$.darkstate.staggered", n);
    s.darkstate.check_steady = jd.value("check_steady", true);
    s.darkstate.steady_t_max = jd.value("steady_t_max", s.darkstate.steady_t_max);
  }
  if (j.contains("fisher")) {
    const json& jf = j.at("fisher");
    detail::require_object(jf, "$.fisher", {"mode", "restarts", "steady_t_max", "steady_method"});
    s.fisher.mode = jf.value("mode", s.fisher.mode);
    if (s.fisher.mode != "classical" && s.fisher.mode != "qfi" && s.fisher.mode != "optimize")
      detail::scenario_error("$.fisher.mode", "must be classical, qfi or optimize");
    s.fisher.restarts = jf.value("restarts", s.fisher.restarts);
    s.fisher.steady_t_max = jf.value("steady_t_max", s.fisher.steady_t_max);
    s.fisher.steady_method = jf.value("steady_method", s.fisher.steady_method);
    if (s.fisher.steady_method != "evolve" && s.fisher.steady_method != "direct")
      detail::scenario_error("$.fisher.steady_method", "must be evolve or direct");
  }
  if (j.contains("sweep")) {
    const json& jw = j.at("sweep");
    detail::require_object(jw, "$.sweep", {"subtask", "axes"});
    s.sweep.subtask = jw.value("subtask", s.sweep.subtask);
    if (s.sweep.subtask != "steady" && s.sweep.subtask != "fisher")
      detail::scenario_error("$.sweep.subtask", "must be steady or fisher");
    if (!jw.contains("axes")) detail::scenario_error("$.sweep.axes", "missing");
    const json& ja = jw.at("axes");
    if (!ja.is_array() || ja.empty() || ja.size() > 2)
      detail::scenario_error("$.sweep.axes", "expected 1 or 2 axes");
    for (std::size_t a = 0; a < ja.size(); ++a) {
      const std::string ap = "$.sweep.axes[" + std::to_string(a) + "]";
      detail::require_object(ja[a], ap, {"name", "values", "targets"});
      SweepAxis axis;
      axis.name = ja[a].value("name", "axis" + std::to_string(a));
      if (!ja[a].contains("values")) detail::scenario_error(ap + ".values", "missing");
      axis.values = detail::parse_axis_values(ja[a].at("values"), ap + ".values");
      if (!ja[a].contains("targets")) detail::scenario_error(ap + ".targets", "missing");
      const json& jt = ja[a].at("targets");
      if (!jt.is_array() || jt.empty()) detail::scenario_error(ap + ".targets", "expected a non-empty list");
      for (std::size_t k = 0; k < jt.size(); ++k) {
        const std::string tp = ap + ".targets[" + std::to_string(k) + "]";
        detail::require_object(jt[k], tp, {"path", "scale"});
        SweepTarget tgt;
        if (!jt[k].contains("path")) detail::scenario_error(tp + ".path", "missing");
        tgt.path = jt[k].at("path").get<std::string>();
        tgt.scale = jt[k].value("scale", 1.0);
        axis.targets.push_back(std::move(tgt));
      }
      s.sweep.axes.push_back(std::move(axis));
    }
  }
  if (j.contains("adiabatic")) {
    const json& ja = j.at("adiabatic");
    detail::require_object(ja, "$.adiabatic",
                           {"ramp_times", "include_sudden", "settle_factor", "probes"});
    if (ja.contains("ramp_times"))
      s.adiabatic.ramp_times = detail::number_list(ja.at("ramp_times"), "$.adiabatic.ramp_times",
                                                   ja.at("ramp_times").size(), false);
    s.adiabatic.include_sudden = ja.value("include_sudden", true);
    s.adiabatic.settle_factor = ja.value("settle_factor", 1.0);
    if (ja.contains("probes"))
      s.adiabatic.probes = detail::probe_list(ja.at("probes"), "$.adiabatic.probes", n);
  }

  if (s.task == "sweep" && s.sweep.axes.empty())
    detail::scenario_error("$.sweep", "sweep task requires axes");
  if (s.task == "adiabatic" && s.adiabatic.ramp_times.empty())
    detail::scenario_error("$.adiabatic.ramp_times", "adiabatic task requires ramp_times");
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_scenario: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("load_scenario: " + path + ": " + e.what());
  }
  Scenario s = parse_scenario(j);
  if (s.name == "scenario") s.name = std::filesystem::path(path).stem().string();
  return s;
}

struct ScenarioResult {
  ObservableSeries table;  // exported as CSV; first column is t
  json manifest;
  int exit_code = 0;
};

namespace detail {

inline std::string format_field(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_csv(const ObservableSeries& series, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t";
  for (const auto& name : series.names) out << "," << name;
  out << "\r\n";
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    out << format_field(series.times[i]);
    for (const auto& col : series.columns) out << "," << format_field(col[i]);
    out << "\r\n";
  }
}

// one steady-state scalar row appended to a series with the evolve layout
inline void steady_row(const LindbladModel& model, const SteadyResult& sr,
                       const std::vector<std::vector<std::size_t>>& probes,
                       ObservableSeries& series) {
  Liouvillian liou(model);
  record_samples(liou, sr.rho, sr.t_reached, probes, series);
}

inline json certificate_json(const DarkCertificate& cert) {
  json out;
  out["jump_residuals"] = cert.jump_residuals;
  out["hamiltonian_residual"] = cert.hamiltonian_residual;
  out["verdict"] = cert.verdict;
  return out;
}

inline std::vector<std::vector<std::size_t>> default_pair_probes(std::size_t n) {
  std::vector<std::vector<std::size_t>> probes;
  for (std::size_t j = 1; j + 1 <= n; j += 2) probes.push_back({j, j + 1});
  return probes;
}

inline double scalar_omega(const NetworkSpec& spec) {
  return spec.drive.rabi.empty() ? 0.0 : spec.drive.rabi.front().real();
}

}  // namespace detail

inline ScenarioResult run_scenario(const Scenario& s, int n_threads = 1);

namespace detail {

inline void run_evolve_task(const Scenario& s, ScenarioResult& res) {
  LindbladModel model = assemble_model(s.network);
  EvolveOptions opts;
  opts.t_max = s.evolve.t_max;
  opts.rel_tol = s.evolve.rel_tol;
  opts.abs_tol = s.evolve.abs_tol;
  opts.sample_times = s.evolve.sample_times;
  if (opts.sample_times.empty())
    for (int i = 0; i < s.evolve.samples; ++i)
      opts.sample_times.push_back(s.evolve.t_max * i / std::max(1, s.evolve.samples - 1));
  auto probes = s.evolve.probes.empty() ? default_pair_probes(s.network.n_spins) : s.evolve.probes;
  DensityMatrix rho0 = DensityMatrix::Zero(model.dim(), model.dim());
  rho0(0, 0) = 1.0;
  res.table = evolve_density(model, rho0, opts, probes);
  res.manifest["converged"] = true;
}

inline void run_steady_task(const Scenario& s, ScenarioResult& res) {
  LindbladModel model = assemble_model(s.network);
  EvolveOptions opts;
  opts.t_max = s.steady.t_max;
  opts.steady_residual = s.steady.residual;
  SteadyResult sr = steady_state(model, opts);
  auto probes = s.steady.probes.empty() ? default_pair_probes(s.network.n_spins) : s.steady.probes;
  res.table = make_series_layout(s.network.n_spins, probes);
  steady_row(model, sr, probes, res.table);
  res.manifest["converged"] = sr.converged;
  res.manifest["residual"] = sr.residual;
  res.manifest["t_reached"] = sr.t_reached;
  if (!sr.converged) res.exit_code = 2;
}

inline void run_trajectory_task(const Scenario& s, ScenarioResult& res, int n_threads) {
  LindbladModel model = assemble_model(s.network);
  TrajectoryConfig cfg;
  cfg.n_traj = s.trajectories.n_traj;
  cfg.seed = s.seed;
  cfg.t_max = s.trajectories.t_max;
  cfg.allow_large = s.trajectories.allow_large;
  cfg.n_threads = n_threads;
  cfg.sample_times = s.trajectories.sample_times;
  if (cfg.sample_times.empty())
    for (int i = 0; i < s.trajectories.samples; ++i)
      cfg.sample_times.push_back(s.trajectories.t_max * i / std::max(1, s.trajectories.samples - 1));
  auto probes =
      s.trajectories.probes.empty() ? default_pair_probes(s.network.n_spins) : s.trajectories.probes;
  res.table = ensemble_average(model, ground_state(s.network.n_spins), cfg, probes);
  res.manifest["converged"] = true;
  res.manifest["n_traj"] = cfg.n_traj;
}

inline void run_darkstate_task(const Scenario& s, ScenarioResult& res) {
  const auto& task = s.darkstate;
  const NetworkSpec& net = s.network;
  const double omega = scalar_omega(net);
  json info;
  PureState target;

  if (task.construction == "two_guide") {
    if (net.waveguides.size() != 2)
      throw std::invalid_argument("darkstate two_guide: network must have two waveguides");
    const double dg1 = net.waveguides[0].gamma_R - net.waveguides[0].gamma_L;
    const double dg2 = net.waveguides[1].gamma_R - net.waveguides[1].gamma_L;
    // the two guides must interchange exactly one adjacent pair
    const auto& o1 = net.waveguides[0].order;
    const auto& o2 = net.waveguides[1].order;
    std::size_t swap_pos = o1.size();
    for (std::size_t i = 0; i + 1 < o1.size(); ++i)
      if (o1[i] != o2[i]) {
        if (o1[i] != o2[i + 1] || o1[i + 1] != o2[i] || swap_pos != o1.size())
          throw std::invalid_argument("darkstate two_guide: orders must differ by one adjacent swap");
        swap_pos = i;
        ++i;
      }
    if (swap_pos == o1.size())
      throw std::invalid_argument("darkstate two_guide: guide orders are identical");
    if (net.n_spins != 4)
      throw std::invalid_argument("darkstate two_guide: only N = 4 networks are supported");
    const std::size_t spin_j = o1[swap_pos], spin_l = o1[swap_pos + 1];
    const double dj = net.drive.detuning[spin_j - 1], dl = net.drive.detuning[spin_l - 1];
    auto red = two_waveguide_reduction(dg1, dg2, dj, dl);
    ComplexPattern mapped(net.drive.detuning.begin(), net.drive.detuning.end());
    mapped[spin_j - 1] = red.mapped_delta_j;
    mapped[spin_l - 1] = red.mapped_delta_j1;
    info["theta"] = {red.theta.real(), red.theta.imag()};
    info["epsilon"] = {red.epsilon.real(), red.epsilon.imag()};
    json mapped_json = json::array();
    for (const cplx& v : mapped) mapped_json.push_back({v.real(), v.imag()});
    info["mapped_detunings"] = mapped_json;
    info["swapped_spins"] = {spin_j, spin_l};
    PureState mapped_state = tetramer_state(mapped, omega, dg1 + dg2);
    // transport back with the inverse of the reduction gate
    std::size_t site = std::min(spin_j, spin_l);
    target = PureState(swap_gate(-red.theta, site, net.n_spins) * mapped_state);
    target.normalize();
  } else if (task.construction == "tetramer") {
    if (net.n_spins != 4) throw std::invalid_argument("darkstate tetramer: N must be 4");
    target = tetramer_state(net.drive.detuning, omega, delta_gamma(net));
  } else if (task.construction == "permutation") {
    DetuningPattern src = task.staggered.empty() ? net.drive.detuning : task.staggered;
    std::vector<std::size_t> perm = task.permutation;
    if (perm.empty()) {
      perm.resize(net.n_spins);
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i + 1;
    }
    MultimerState ms = multimer_from_permutation(perm, src, omega, delta_gamma(net));
    target = ms.realized;
    info["partition"] = ms.partition;
    info["detunings"] = ms.detunings;
  } else if (task.construction == "paired") {
    auto pairing = bidirectional_pairing(net.drive.detuning);
    MultimerState ms = paired_dimer_state(pairing, net.drive.detuning, omega, delta_gamma(net));
    target = ms.realized;
    info["partition"] = ms.partition;
  } else if (task.construction == "dimerized") {
    MultimerState ms = dimerized_state(net.drive.detuning, omega, delta_gamma(net));
    target = ms.realized;
    info["partition"] = ms.partition;
  } else {
    throw std::invalid_argument("darkstate: unknown construction " + task.construction);
  }

  LindbladModel model = assemble_model(net);
  DarkCertificate cert = verify_dark(target, model);
  res.manifest["certificate"] = certificate_json(cert);
  res.manifest["construction"] = info;
  res.manifest["converged"] = cert.verdict;
  if (!cert.verdict) res.exit_code = 2;

  res.table = make_series_layout(net.n_spins, {});
  res.table.add_column("max_jump_residual");
  res.table.add_column("hamiltonian_residual");
  res.table.add_column("steady_fidelity");

  double fid = -1.0;
  if (task.check_steady) {
    EvolveOptions opts;
    opts.t_max = task.steady_t_max;
    SteadyResult sr = steady_state(model, opts);
    fid = fidelity_pure(target, sr.rho);
    res.manifest["steady_fidelity"] = fid;
    res.manifest["steady_converged"] = sr.converged;
    if (!sr.converged) res.exit_code = 2;
    Liouvillian liou(model);
    steady_row(model, sr, {}, res.table);
  } else {
    DensityMatrix rho = target * target.adjoint();
    Liouvillian liou(model);
    record_samples(liou, rho, 0.0, {}, res.table);
  }
  double max_jump = 0.0;
  for (double r : cert.jump_residuals) max_jump = std::max(max_jump, r);
  res.table.columns[res.table.names.size() - 3].push_back(max_jump);
  res.table.columns[res.table.names.size() - 2].push_back(cert.hamiltonian_residual);
  res.table.columns[res.table.names.size() - 1].push_back(fid);
}

inline void run_fisher_task(const Scenario& s, ScenarioResult& res, int n_threads) {
  LindbladModel model = assemble_model(s.network);
  SteadyResult sr;
  if (s.fisher.steady_method == "direct") {
    sr = steady_state_direct(model);
  } else {
    EvolveOptions opts;
    opts.t_max = s.fisher.steady_t_max;
    sr = steady_state(model, opts);
  }
  const std::size_t n = s.network.n_spins;

  json fj;
  fj["steady_converged"] = sr.converged;
  fj["purity"] = purity(sr.rho);

  double value = 0.0;
  if (s.fisher.mode == "classical") {
    value = classical_fisher(sr.rho, staggered_probe(n), jz_measurement(n));
    fj["F"] = value;
  } else if (s.fisher.mode == "qfi") {
    value = qfi_mixed(sr.rho, staggered_probe(n));
    fj["F_Q"] = value;
  } else {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(sr.rho);
    PureState dominant = es.eigenvectors().col(es.eigenvalues().size() - 1);
    FisherResult fr = optimize_generator(dominant, s.fisher.restarts, s.seed, n_threads);
    value = fr.value;
    fj["F_Q_max"] = fr.value;
    fj["witnessed_depth"] = fr.witnessed_depth;
    fj["spectral_bound"] = fr.spectral_bound;
    fj["bound_table"] = fr.bound_table;
  }
  res.manifest["fisher"] = fj;
  res.manifest["converged"] = sr.converged;
  if (!sr.converged) res.exit_code = 2;

  res.table.add_column("value");
  res.table.add_column("purity");
  res.table.times.push_back(sr.t_reached);
  res.table.columns[0].push_back(value);
  res.table.columns[1].push_back(purity(sr.rho));
}

inline void run_adiabatic_task(const Scenario& s, ScenarioResult& res) {
  // one row per preparation: ramp duration (0 = sudden switch), integrated
  // photon count and final-state purity
  res.table.add_column("photon_count");
  res.table.add_column("purity");
  std::vector<double> ramps;
  if (s.adiabatic.include_sudden) ramps.push_back(0.0);
  for (double t : s.adiabatic.ramp_times) ramps.push_back(t);

  bool all_ok = true;
  for (double ramp : ramps) {
    NetworkSpec net = s.network;
    if (ramp > 0.0) {
      RampSchedule sched;
      sched.omega_scale = 1.0;
      sched.t_max = ramp;
      net.drive.schedule = sched;
    } else {
      net.drive.schedule.reset();
    }
    LindbladModel model = assemble_model(net);
    EvolveOptions opts;
    const double base = ramp > 0.0 ? ramp : (s.adiabatic.ramp_times.empty() ? 100.0
                                                                            : s.adiabatic.ramp_times.back());
    opts.t_max = base * (1.0 + s.adiabatic.settle_factor);
    const int samples = 201;
    for (int i = 0; i < samples; ++i) opts.sample_times.push_back(opts.t_max * i / (samples - 1));
    DensityMatrix rho0 = DensityMatrix::Zero(model.dim(), model.dim());
    rho0(0, 0) = 1.0;
    ObservableSeries series = evolve_density(model, rho0, opts, {});
    res.table.times.push_back(ramp);
    res.table.columns[0].push_back(photon_count(series));
    res.table.columns[1].push_back(series.column("purity").back());
  }
  res.manifest["converged"] = all_ok;
}

inline void run_sweep_task(const Scenario& s, ScenarioResult& res, int n_threads) {
  const auto& axes = s.sweep.axes;
  std::vector<std::size_t> shape;
  for (const auto& ax : axes) shape.push_back(ax.values.size());
  std::size_t total = 1;
  for (std::size_t c : shape) total *= c;

  for (const auto& ax : axes) res.table.add_column(ax.name);
  const bool fisher_sub = s.sweep.subtask == "fisher";
  res.table.add_column(fisher_sub ? "value" : "purity");
  res.table.add_column(fisher_sub ? "purity" : "residual");
  res.table.add_column("converged");

  json points = json::array();
  bool all_converged = true;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::vector<std::size_t> idx(axes.size());
    std::size_t rem = flat;
    for (std::size_t a = axes.size(); a-- > 0;) {
      idx[a] = rem % shape[a];
      rem /= shape[a];
    }
    json pj = s.raw;
    pj.erase("sweep");
    pj["task"] = s.sweep.subtask;
    for (std::size_t a = 0; a < axes.size(); ++a)
      for (const auto& tgt : axes[a].targets)
        apply_additive_target(pj, tgt.path, axes[a].values[idx[a]] * tgt.scale);
    Scenario sub = parse_scenario(pj);
    sub.seed = s.seed;
    ScenarioResult pr = run_scenario(sub, n_threads);
    const bool conv = pr.manifest.value("converged", false);
    all_converged = all_converged && conv;

    res.table.times.push_back(pr.table.times.empty() ? 0.0 : pr.table.times.front());
    std::size_t col = 0;
    for (std::size_t a = 0; a < axes.size(); ++a)
      res.table.columns[col++].push_back(axes[a].values[idx[a]]);
    if (fisher_sub) {
      res.table.columns[col++].push_back(pr.table.column("value").front());
      res.table.columns[col++].push_back(pr.table.column("purity").front());
    } else {
      res.table.columns[col++].push_back(pr.table.column("purity").front());
      res.table.columns[col++].push_back(pr.manifest.value("residual", 0.0));
    }
    res.table.columns[col++].push_back(conv ? 1.0 : 0.0);

    json point;
    for (std::size_t a = 0; a < axes.size(); ++a) point[axes[a].name] = axes[a].values[idx[a]];
    point["manifest"] = pr.manifest;
    points.push_back(std::move(point));
  }
  res.manifest["points"] = std::move(points);
  res.manifest["converged"] = all_converged;
  if (!all_converged) res.exit_code = 2;
}

}  // namespace detail

inline ScenarioResult run_scenario(const Scenario& s, int n_threads) {
  ScenarioResult res;
  const auto t0 = std::chrono::steady_clock::now();
  res.manifest["schema_version"] = kScenarioSchemaVersion;
  res.manifest["library_version"] = kLibraryVersion;
  res.manifest["scenario"] = s.raw;
  res.manifest["seed"] = s.seed;
  res.manifest["task"] = s.task;

  try {
    if (s.task == "evolve") {
      detail::run_evolve_task(s, res);
    } else if (s.task == "steady") {
      detail::run_steady_task(s, res);
    } else if (s.task == "trajectories") {
      detail::run_trajectory_task(s, res, n_threads);
    } else if (s.task == "darkstate") {
      detail::run_darkstate_task(s, res);
    } else if (s.task == "fisher") {
      detail::run_fisher_task(s, res, n_threads);
    } else if (s.task == "adiabatic") {
      detail::run_adiabatic_task(s, res);
    } else if (s.task == "sweep") {
      detail::run_sweep_task(s, res, n_threads);
    } else {
      throw std::invalid_argument("run_scenario: unknown task " + s.task);
    }
  } catch (const std::exception& e) {
    res.manifest["error"] = e.what();
    res.manifest["converged"] = false;
    res.exit_code = 1;
  }
  const auto t1 = std::chrono::steady_clock::now();
  res.manifest["wall_time_s"] = std::chrono::duration<double>(t1 - t0).count();
  return res;
}

// Writes <out_dir>/<name>.csv and <out_dir>/<name>.manifest.json; returns the
// exit code (0 iff converged with no errors).
inline int execute_scenario(const Scenario& s, const std::string& out_dir, int n_threads = 1) {
  std::filesystem::create_directories(out_dir);
  ScenarioResult res = run_scenario(s, n_threads);
  const std::string base = (std::filesystem::path(out_dir) / s.name).string();
  if (!res.table.names.empty()) detail::write_csv(res.table, base + ".csv");
  std::ofstream mf(base + ".manifest.json");
  mf << res.manifest.dump(2) << "\n";
  return res.exit_code;
}

struct SusceptibilityFit {
  std::string kind;          // quadratic | linear
  double coefficient = 0.0;  // Delta_0 or gamma'_0
  double window_min = 0.0;
  double window_max = 0.0;
  double residual = 0.0;
  std::size_t n_points = 0;
};

// Least-squares fit of the small-error purity laws
//   quadratic: P = 1 - (1/2) (x / Delta_0)^2     (symmetric grid around 0)
//   linear:    P = 1 - x / gamma'_0              (small positive grid)
// over points with 1 - P < 0.05; at least 5 such points required.
inline SusceptibilityFit fit_susceptibility(const std::vector<double>& x,
                                            const std::vector<double>& purity,
                                            const std::string& kind) {
  if (kind != "quadratic" && kind != "linear")
    throw std::invalid_argument("fit_susceptibility: kind must be quadratic or linear");
  if (x.size() != purity.size()) throw std::invalid_argument("fit_susceptibility: length mismatch");

  std::vector<double> xs, loss;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double l = 1.0 - purity[i];
    if (l < 0.05) {
      xs.push_back(x[i]);
      loss.push_back(std::max(l, 0.0));
    }
  }
  if (xs.size() < 5)
    throw std::invalid_argument("fit_susceptibility: fewer than 5 points in the fit window");

  // loss = c * g(x) with g = x^2 (quadratic) or x (linear); c by least squares
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double g = kind == "quadratic" ? xs[i] * xs[i] : xs[i];
    num += g * loss[i];
    den += g * g;
  }
  if (den <= 0.0) throw std::invalid_argument("fit_susceptibility: degenerate grid");
  const double c = num / den;
  if (c <= 0.0) throw std::invalid_argument("fit_susceptibility: non-positive fitted coefficient");

  SusceptibilityFit fit;
  fit.kind = kind;
  fit.coefficient = kind == "quadratic" ? std::sqrt(0.5 / c) : 1.0 / c;
  fit.window_min = *std::min_element(xs.begin(), xs.end());
  fit.window_max = *std::max_element(xs.begin(), xs.end());
  fit.n_points = xs.size();
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double g = kind == "quadratic" ? xs[i] * xs[i] : xs[i];
    ss += (loss[i] - c * g) * (loss[i] - c * g);
  }
  fit.residual = std::sqrt(ss / xs.size());
  return fit;
}

// Reads a sweep CSV produced by execute_scenario and fits the purity column
// against the named axis column.
inline SusceptibilityFit fit_susceptibility_csv(const std::string& csv_path,
                                                const std::string& axis,
                                                const std::string& kind) {
  std::ifstream in(csv_path);
  if (!in) throw std::invalid_argument("fit: cannot open " + csv_path);
  std::string header;
  if (!std::getline(in, header)) throw std::invalid_argument("fit: empty file");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  std::vector<std::string> names;
  {
    std::stringstream hs(header);
    std::string field;
    while (std::getline(hs, field, ',')) names.push_back(field);
  }
  auto col_of = [&](const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw std::invalid_argument("fit: no column named " + name + " in " + csv_path);
  };
  const std::size_t xc = col_of(axis), pc = col_of("purity");

  std::vector<double> xs, ps;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string field;
    std::vector<double> row;
    while (std::getline(ls, field, ',')) row.push_back(std::stod(field));
    xs.push_back(row.at(xc));
    ps.push_back(row.at(pc));
  }
  return fit_susceptibility(xs, ps, kind);
}

}  // namespace chiralspin
