#include "transonic/driver.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

namespace transonic {

namespace {

using nlohmann::json;

int log_level() {
  static const int lvl = [] {
    const char* env = std::getenv("TRANSONIC_LOG");
    if (env == nullptr) return 0;
    const std::string v(env);
    if (v.empty() || v == "off" || v == "error") return 0;
    if (v == "debug") return 2;
    return 1;  // info, and the safe reading of anything unrecognized
  }();
  return lvl;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::fprintf(stderr, "[transonic] %s\n", msg.c_str());
}

// one parsed configuration value; both config formats funnel into this
struct ConfigValue {
  enum class Kind { Num, Str, Bool, List };
  Kind kind = Kind::Num;
  double num = 0.0;
  bool integral = false;  // set when the source text is a plain unsigned integer
  std::uint64_t unum = 0;
  std::string str;
  bool flag = false;
  std::vector<double> list;
};

using ConfigMap = std::map<std::string, ConfigValue>;

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (std::isalnum(static_cast<unsigned char>(c)) == 0 && c != '_' && c != '-')
      return false;
  }
  return true;
}

[[noreturn]] void parse_fail(int line, const std::string& why) {
  throw ParseError("config line " + std::to_string(line) + ": " + why);
}

double parse_number(const std::string& text, int line) {
  if (text.empty()) parse_fail(line, "missing number");
  char* end = nullptr;
  const double x = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size())
    parse_fail(line, "expected a number, got '" + text + "'");
  if (!std::isfinite(x)) parse_fail(line, "number '" + text + "' is not finite");
  return x;
}

ConfigValue parse_toml_value(const std::string& text, int line) {
  ConfigValue v;
  if (text.empty()) parse_fail(line, "missing value");
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"')
      parse_fail(line, "unterminated string");
    v.kind = ConfigValue::Kind::Str;
    v.str = text.substr(1, text.size() - 2);
    if (v.str.find('"') != std::string::npos)
      parse_fail(line, "embedded quote in string");
    return v;
  }
  if (text == "true" || text == "false") {
    v.kind = ConfigValue::Kind::Bool;
    v.flag = text == "true";
    return v;
  }
  if (text.front() == '[') {
    if (text.back() != ']') parse_fail(line, "unterminated array");
    v.kind = ConfigValue::Kind::List;
    std::string inner = trim(text.substr(1, text.size() - 2));
    while (!inner.empty()) {
      const std::size_t comma = inner.find(',');
      const std::string item = trim(inner.substr(0, comma));
      v.list.push_back(parse_number(item, line));
      if (comma == std::string::npos) break;
      inner = trim(inner.substr(comma + 1));
      if (inner.empty()) parse_fail(line, "trailing comma in array");
    }
    return v;
  }
  v.kind = ConfigValue::Kind::Num;
  v.num = parse_number(text, line);
  if (text.find_first_not_of("0123456789") == std::string::npos) {
    v.integral = true;
    v.unum = std::strtoull(text.c_str(), nullptr, 10);
  }
  return v;
}

ConfigMap parse_toml_text(std::istream& in) {
  ConfigMap out;
  std::string section;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s;
    bool quoted = false;
    for (char c : raw) {
      if (c == '"') quoted = !quoted;
      if (c == '#' && !quoted) break;
      s.push_back(c);
    }
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') parse_fail(line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!valid_key(section))
        parse_fail(line, "bad section name '" + section + "'");
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) parse_fail(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (!valid_key(key)) parse_fail(line, "bad key '" + key + "'");
    const std::string path = section.empty() ? key : section + "." + key;
    if (out.count(path) > 0) parse_fail(line, "duplicate key '" + path + "'");
    out[path] = parse_toml_value(trim(s.substr(eq + 1)), line);
  }
  return out;
}

ConfigValue json_leaf(const std::string& path, const json& v) {
  ConfigValue cv;
  if (v.is_string()) {
    cv.kind = ConfigValue::Kind::Str;
    cv.str = v.get<std::string>();
  } else if (v.is_boolean()) {
    cv.kind = ConfigValue::Kind::Bool;
    cv.flag = v.get<bool>();
  } else if (v.is_number()) {
    cv.kind = ConfigValue::Kind::Num;
    cv.num = v.get<double>();
    if (v.is_number_unsigned()) {
      cv.integral = true;
      cv.unum = v.get<std::uint64_t>();
    }
  } else if (v.is_array()) {
    cv.kind = ConfigValue::Kind::List;
    for (const auto& item : v) {
      if (!item.is_number())
        throw ParseError("config: array '" + path + "' must hold numbers");
      cv.list.push_back(item.get<double>());
    }
  } else {
    throw ParseError("config: unsupported value at '" + path + "'");
  }
  return cv;
}

ConfigMap parse_json_text(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config json: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config json: top level must be an object");
  ConfigMap out;
  for (const auto& item : j.items()) {
    const std::string& k = item.key();
    const json& v = item.value();
    if (v.is_object()) {
      for (const auto& inner : v.items()) {
        const std::string path = k + "." + inner.key();
        if (inner.value().is_object())
          throw ParseError("config json: nesting too deep at '" + path + "'");
        out[path] = json_leaf(path, inner.value());
      }
    } else {
      out[k] = json_leaf(k, v);
    }
  }
  return out;
}

double as_num(const ConfigValue& v, const std::string& path) {
  if (v.kind != ConfigValue::Kind::Num)
    throw ValidationError(path + ": expected a number");
  return v.num;
}

int as_int(const ConfigValue& v, const std::string& path) {
  const double x = as_num(v, path);
  if (x != std::floor(x) || std::abs(x) > 2147483647.0)
    throw ValidationError(path + ": expected an integer");
  return static_cast<int>(x);
}

std::uint64_t as_seed(const ConfigValue& v, const std::string& path) {
  if (v.kind != ConfigValue::Kind::Num)
    throw ValidationError(path + ": expected a number");
  if (v.integral) return v.unum;
  if (v.num < 0.0 || v.num != std::floor(v.num))
    throw ValidationError(path + ": expected a nonnegative integer");
  return static_cast<std::uint64_t>(v.num);
}

bool as_bool(const ConfigValue& v, const std::string& path) {
  if (v.kind != ConfigValue::Kind::Bool)
    throw ValidationError(path + ": expected true or false");
  return v.flag;
}

std::string as_str(const ConfigValue& v, const std::string& path) {
  if (v.kind != ConfigValue::Kind::Str)
    throw ValidationError(path + ": expected a string");
  return v.str;
}

std::vector<double> as_list(const ConfigValue& v, const std::string& path) {
  if (v.kind != ConfigValue::Kind::List)
    throw ValidationError(path + ": expected an array of numbers");
  return v.list;
}

void apply_entry(RunConfig& cfg, const std::string& path, const ConfigValue& v) {
  if (path == "mode") { cfg.mode = parse_run_mode(as_str(v, path)); return; }
  if (path == "gas.gamma") { cfg.gamma = as_num(v, path); return; }
  if (path == "nozzle.r0") { cfg.r0 = as_num(v, path); return; }
  if (path == "nozzle.r1") { cfg.r1 = as_num(v, path); return; }
  if (path == "nozzle.dim") { cfg.dim = as_int(v, path); return; }
  if (path == "nozzle.theta") { cfg.theta = as_num(v, path); return; }
  if (path == "inflow.rho") { cfg.rho_in = as_num(v, path); return; }
  if (path == "inflow.u") { cfg.u_in = as_num(v, path); return; }
  if (path == "inflow.p") { cfg.p_in = as_num(v, path); return; }
  if (path == "shock.r_s") { cfg.r_s = as_num(v, path); return; }
  if (path == "exit.pressure") {
    cfg.exit_p = as_num(v, path);
    cfg.exit_p_set = true;
    return;
  }
  if (path == "exit.coeff") { cfg.exit_coeff = as_list(v, path); return; }
  if (path == "perturbation.psi_family") { cfg.psi_family = as_str(v, path); return; }
  if (path == "perturbation.psi_amp") { cfg.psi_amp = as_num(v, path); return; }
  if (path == "perturbation.psi_mode") { cfg.psi_mode = as_int(v, path); return; }
  if (path == "perturbation.upstream_phi_amp") { cfg.up_phi_amp = as_num(v, path); return; }
  if (path == "perturbation.upstream_phi_mode") { cfg.up_phi_mode = as_int(v, path); return; }
  if (path == "perturbation.upstream_p_amp") { cfg.up_p_amp = as_num(v, path); return; }
  if (path == "perturbation.upstream_p_mode") { cfg.up_p_mode = as_int(v, path); return; }
  if (path == "perturbation.vex_coeff") { cfg.vex_coeff = as_list(v, path); return; }
  if (path == "sweep.levels") { cfg.sweep_levels = as_int(v, path); return; }
  if (path == "sweep.factor") { cfg.sweep_factor = as_num(v, path); return; }
  if (path == "numerics.nr") { cfg.nr = as_int(v, path); return; }
  if (path == "numerics.nt") { cfg.nt = as_int(v, path); return; }
  if (path == "numerics.modes") { cfg.n_modes = as_int(v, path); return; }
  if (path == "numerics.mode_grid") { cfg.mode_grid = as_int(v, path); return; }
  if (path == "numerics.tol_outer") { cfg.tol_outer = as_num(v, path); return; }
  if (path == "numerics.tol_newton") { cfg.tol_newton = as_num(v, path); return; }
  if (path == "numerics.tol_shock") { cfg.tol_shock = as_num(v, path); return; }
  if (path == "numerics.tol_basis") { cfg.tol_basis = as_num(v, path); return; }
  if (path == "numerics.wall_slip") { cfg.wall_slip = as_num(v, path); return; }
  if (path == "numerics.kernel_floor") { cfg.kernel_floor = as_num(v, path); return; }
  if (path == "numerics.max_outer") { cfg.max_outer = as_int(v, path); return; }
  if (path == "numerics.max_newton") { cfg.max_newton = as_int(v, path); return; }
  if (path == "numerics.seed") { cfg.seed = as_seed(v, path); return; }
  if (path == "numerics.parallel") { cfg.parallel = as_bool(v, path); return; }
  throw ValidationError("unknown configuration key: " + path);
}

double perturbation_amplitude(const RunConfig& cfg) {
  double a = std::abs(cfg.psi_amp) + std::abs(cfg.up_phi_amp) + std::abs(cfg.up_p_amp);
  for (double c : cfg.vex_coeff) a += std::abs(c);
  return a;
}

}  // namespace

RunMode parse_run_mode(const std::string& name) {
  if (name == "background") return RunMode::Background;
  if (name == "locate-shock") return RunMode::LocateShock;
  if (name == "solve") return RunMode::Solve;
  if (name == "sweep") return RunMode::Sweep;
  if (name == "check") return RunMode::Check;
  if (name == "demo-isentropic") return RunMode::DemoIsentropic;
  throw ValidationError("unknown run mode '" + name + "'");
}

std::string run_mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::Background: return "background";
    case RunMode::LocateShock: return "locate-shock";
    case RunMode::Solve: return "solve";
    case RunMode::Sweep: return "sweep";
    case RunMode::Check: return "check";
    case RunMode::DemoIsentropic: return "demo-isentropic";
  }
  return "background";
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file " + path);
  ConfigMap kv;
  if (path.ends_with(".toml")) {
    kv = parse_toml_text(f);
  } else if (path.ends_with(".json")) {
    kv = parse_json_text(f);
  } else {
    throw ParseError("config format is chosen by extension, expected .toml or .json: " + path);
  }
  RunConfig cfg;
  for (const auto& [k, v] : kv) apply_entry(cfg, k, v);
  validate_config(cfg);
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  auto fail = [](const std::string& path, const std::string& why) {
    throw ValidationError(path + ": " + why);
  };
  if (!(cfg.gamma > 1.0)) fail("gas.gamma", "adiabatic exponent must exceed 1");
  if (!(cfg.r0 > 0.0)) fail("nozzle.r0", "inner radius must be positive");
  if (!(cfg.r1 > cfg.r0)) fail("nozzle.r1", "outer radius must exceed the inner radius");
  if (cfg.dim < 2) fail("nozzle.dim", "spatial dimension must be at least 2");
  if (!(cfg.theta > 0.0 && cfg.theta < 2.0 * kPi))
    fail("nozzle.theta", "opening angle must lie in (0, 2 pi)");
  if (!(cfg.rho_in > 0.0)) fail("inflow.rho", "density must be positive");
  if (!(cfg.u_in > 0.0)) fail("inflow.u", "speed must be positive");
  if (!(cfg.p_in > 0.0)) fail("inflow.p", "pressure must be positive");
  {
    const FlowState inflow{cfg.rho_in, cfg.u_in, cfg.p_in};
    const GasModel gas = make_gas(cfg.gamma, inflow);
    if (mach_class(gas, inflow) != MachClass::Supersonic)
      fail("inflow.u", "inflow must be strictly supersonic for the configured gas");
  }
  if (!(cfg.r0 < cfg.r_s && cfg.r_s < cfg.r1))
    fail("shock.r_s", "shock radius must lie strictly inside the nozzle");
  if (cfg.exit_p_set && !(cfg.exit_p > 0.0))
    fail("exit.pressure", "target pressure must be positive");
  if (cfg.psi_family != "identity" && cfg.psi_family != "radial_bump")
    fail("perturbation.psi_family", "unknown deformation family '" + cfg.psi_family + "'");
  if (cfg.psi_mode < 0) fail("perturbation.psi_mode", "mode index must be nonnegative");
  if (cfg.up_phi_mode < 0) fail("perturbation.upstream_phi_mode", "mode index must be nonnegative");
  if (cfg.up_p_mode < 0) fail("perturbation.upstream_p_mode", "mode index must be nonnegative");
  if (cfg.sweep_levels < 2) fail("sweep.levels", "a sweep needs at least two amplitudes");
  if (!(cfg.sweep_factor > 0.0 && cfg.sweep_factor < 1.0))
    fail("sweep.factor", "amplitude factor must lie in (0, 1)");
  if (cfg.nr < 8) fail("numerics.nr", "grid size must be at least 8");
  if (cfg.nt < 8) fail("numerics.nt", "grid size must be at least 8");
  if (cfg.mode_grid < 8) fail("numerics.mode_grid", "grid size must be at least 8");
  if (cfg.n_modes < 1) fail("numerics.modes", "mode cutoff must be at least 1");
  if (!(cfg.tol_outer > 0.0)) fail("numerics.tol_outer", "tolerance must be positive");
  if (!(cfg.tol_newton > 0.0)) fail("numerics.tol_newton", "tolerance must be positive");
  if (!(cfg.tol_shock > 0.0)) fail("numerics.tol_shock", "tolerance must be positive");
  if (!(cfg.tol_basis > 0.0)) fail("numerics.tol_basis", "tolerance must be positive");
  if (!(cfg.wall_slip > 0.0)) fail("numerics.wall_slip", "tolerance must be positive");
  if (!(cfg.kernel_floor > 0.0)) fail("numerics.kernel_floor", "tolerance must be positive");
  if (cfg.max_outer < 1) fail("numerics.max_outer", "iteration budget must be at least 1");
  if (cfg.max_newton < 1) fail("numerics.max_newton", "iteration budget must be at least 1");
  if (cfg.mode == RunMode::LocateShock && !cfg.exit_p_set)
    fail("exit.pressure", "the locate-shock mode needs a pressure target");
  if (cfg.mode == RunMode::Sweep && perturbation_amplitude(cfg) == 0.0)
    fail("perturbation", "the sweep mode needs a nonzero perturbation");
  if (cfg.mode == RunMode::Solve &&
      static_cast<int>(cfg.exit_coeff.size()) > std::min(cfg.n_modes, cfg.nt - 1))
    fail("exit.coeff", "more target modes than the solver keeps");
}

int RunReport::failed_invariants() const {
  int n = 0;
  for (const auto& iv : invariants) {
    if (!iv.pass) ++n;
  }
  return n;
}

namespace {

// the invariant table demands one verdict per declared name
void add_invariant(RunReport& rep, std::string name, double value, double bound,
                   bool pass) {
  for (const auto& iv : rep.invariants) {
    if (iv.name == name) throw Error("duplicate invariant '" + name + "'");
  }
  rep.invariants.push_back({std::move(name), value, bound, pass});
}

void add_bounded(RunReport& rep, std::string name, double value, double bound) {
  const bool pass = value <= bound;
  add_invariant(rep, std::move(name), value, bound, pass);
}

class StageClock {
 public:
  StageClock(RunReport& rep, std::string& label, const std::string& name)
      : rep_(rep), idx_(rep.stages.size()), t0_(std::chrono::steady_clock::now()) {
    label = name;
    rep_.stages.push_back({name, 0.0, 0, 0.0});
    log_info("stage " + name);
  }
  ~StageClock() {
    rep_.stages[idx_].seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }
  StageReport& stage() { return rep_.stages[idx_]; }

 private:
  RunReport& rep_;
  std::size_t idx_;
  std::chrono::steady_clock::time_point t0_;
};

[[noreturn]] void rethrow_with_stage(const std::string& stage, const Error& e) {
  const std::string msg = "stage " + stage + ": " + e.what();
#define TRANSONIC_RETHROW(TYPE) \
  if (dynamic_cast<const TYPE*>(&e) != nullptr) throw TYPE(msg)
  TRANSONIC_RETHROW(CavitationError);
  TRANSONIC_RETHROW(SonicSingularityError);
  TRANSONIC_RETHROW(NotSupersonicError);
  TRANSONIC_RETHROW(DegenerateShockError);
  TRANSONIC_RETHROW(DomainError);
  TRANSONIC_RETHROW(PressureOutOfRangeError);
  TRANSONIC_RETHROW(NoRootError);
  TRANSONIC_RETHROW(EllipticityLossError);
  TRANSONIC_RETHROW(ObliquenessError);
  TRANSONIC_RETHROW(SolverDivergenceError);
  TRANSONIC_RETHROW(TrustRegionError);
  TRANSONIC_RETHROW(FrontEscapeError);
  TRANSONIC_RETHROW(NoConvergenceError);
  TRANSONIC_RETHROW(RadialFloorError);
  TRANSONIC_RETHROW(StepFailureError);
  TRANSONIC_RETHROW(ModeSolveError);
  TRANSONIC_RETHROW(NearSingularError);
  TRANSONIC_RETHROW(ParseError);
  TRANSONIC_RETHROW(ValidationError);
  TRANSONIC_RETHROW(IoError);
#undef TRANSONIC_RETHROW
  throw Error(msg);
}

// Bernoulli drift, branch sign pattern, and jump admissibility of the
// background; returns the drift for the stage residual
double background_invariants(RunReport& rep, const GasModel& gas,
                             const RadialSolution& sol) {
  double drift = 0.0;
  auto scan = [&](const RadialBranch& br) {
    for (std::size_t i = 0; i < br.r.size(); ++i) {
      const FlowState s{br.rho[i], br.u[i], br.p[i]};
      drift = std::max(drift, std::abs(bernoulli(gas, s) - gas.b0) / std::abs(gas.b0));
    }
  };
  scan(sol.sup);
  scan(sol.sub);
  add_bounded(rep, "bernoulli-drift", drift, 1e-9);

  int bad = 0;
  for (std::size_t i = 1; i < sol.sup.r.size(); ++i) {
    if (!(sol.sup.u[i] > sol.sup.u[i - 1])) ++bad;
    if (!(sol.sup.p[i] < sol.sup.p[i - 1])) ++bad;
  }
  for (std::size_t i = 1; i < sol.sub.r.size(); ++i) {
    if (!(sol.sub.u[i] < sol.sub.u[i - 1])) ++bad;
    if (!(sol.sub.p[i] > sol.sub.p[i - 1])) ++bad;
  }
  add_bounded(rep, "branch-monotone", static_cast<double>(bad), 0.0);

  const JumpResult& j = sol.jump;
  const RhResiduals res = rh_residuals(gas, j.upstream, j.downstream,
                                       j.normal_speed_up, j.normal_speed_down);
  const double rel = std::max(
      {std::abs(res.mass) / std::abs(j.upstream.rho * j.upstream.u),
       std::abs(res.momentum) /
           std::abs(j.upstream.rho * j.upstream.u * j.upstream.u + j.upstream.p),
       std::abs(res.energy) / std::abs(gas.b0)});
  add_bounded(rep, "rh-residual", rel, 1e-12);

  const double mach = std::abs(j.downstream.u) / sound_speed(gas, j.downstream);
  add_invariant(rep, "downstream-subsonic", mach, 1.0, mach < 1.0);
  const double ds = entropy_measure(gas, j.downstream) - entropy_measure(gas, j.upstream);
  add_invariant(rep, "entropy-increase", ds, 0.0, ds > 0.0);
  return drift;
}

RadialSolution build_background(RunReport& rep, const GasModel& gas,
                                const NozzleRadial& noz, const FlowState& inflow,
                                double r_s, std::string& stage) {
  StageClock sc(rep, stage, "background");
  RadialSolution sol = background_solution(gas, noz, inflow, r_s);
  rep.r_s = sol.r_s;
  rep.p_c = sol.p_plus(noz.r1);
  rep.sup = {sol.sup.r, sol.sup.u, sol.sup.p, sol.sup.rho};
  rep.sub = {sol.sub.r, sol.sub.u, sol.sub.p, sol.sub.rho};
  sc.stage().residual = background_invariants(rep, gas, sol);
  sc.stage().work = static_cast<long long>(sol.sup.r.size() + sol.sub.r.size());
  return sol;
}

PerturbationData perturbation_from(const RunConfig& cfg, double theta_half) {
  PerturbationData d;
  d.psi_family = cfg.psi_family;
  d.psi_amp = cfg.psi_amp;
  d.psi_mode = cfg.psi_mode;
  d.up_phi_amp = cfg.up_phi_amp;
  d.up_phi_mode = cfg.up_phi_mode;
  d.up_p_amp = cfg.up_p_amp;
  d.up_p_mode = cfg.up_p_mode;
  d.vex_coeff = cfg.vex_coeff;
  d.theta_half = theta_half;
  return d;
}

InversionOptions options_from(const RunConfig& cfg, int n_use) {
  InversionOptions opt;
  opt.fbp.max_outer = cfg.max_outer;
  opt.fbp.tol_outer = cfg.tol_outer;
  opt.fbp.parallel = cfg.parallel;
  opt.n_modes = n_use;
  opt.mode_grid = cfg.mode_grid;
  opt.kernel_floor_rel = cfg.kernel_floor;
  opt.tol_newton = cfg.tol_newton;
  opt.max_newton = cfg.max_newton;
  opt.tol_basis = cfg.tol_basis;
  opt.wall_slip_tol = cfg.wall_slip;
  return opt;
}

void scale_perturbation(PerturbationData& d, double s) {
  d.psi_amp *= s;
  d.up_phi_amp *= s;
  d.up_p_amp *= s;
  for (double& c : d.vex_coeff) c *= s;
}

// the isentropic comparison family carries the same mass flux as the inflow,
// expressed in vacuum-normalized speed units
double inflow_isentropic_flux(const GasModel& gas, const NozzleRadial& noz,
                              const FlowState& inflow) {
  const double w = inflow.u / std::sqrt((gas.gamma - 1.0) * gas.b0);
  return std::pow(noz.r0, noz.n - 1) * isentropic_density(gas, w * w) * w;
}

void mode_system_invariants(RunReport& rep, const ModeSystem& modes) {
  int nonneg = 0;
  double dmin = std::numeric_limits<double>::infinity();
  for (double d : modes.d) {
    if (d >= 0.0) ++nonneg;
    dmin = std::min(dmin, std::abs(d));
  }
  add_bounded(rep, "mode-negative", static_cast<double>(nonneg), 0.0);
  add_invariant(rep, "mode-floor", dmin, modes.kernel_floor, dmin >= modes.kernel_floor);
  const double e0a1 = modes.e0 * modes.a1;
  const double tail = std::abs(modes.d.back() - e0a1) / std::abs(e0a1);
  add_bounded(rep, "mode-tail", tail, 0.05);
}

ModeSystem build_modes_stage(RunReport& rep, const GasModel& gas,
                             const RadialSolution& sol, const SectorGrid& grid,
                             int n_use, std::string& stage) {
  const RunConfig& cfg = rep.config;
  StageClock sc(rep, stage, "mode-system");
  ModeSystem modes = build_mode_system(gas, sol, grid.theta_half, n_use,
                                       cfg.mode_grid, cfg.kernel_floor, cfg.parallel);
  rep.mode_lambda = modes.lambda;
  rep.mode_q_shock = modes.q_shock;
  rep.mode_d = modes.d;
  double dmin = std::numeric_limits<double>::infinity();
  for (double d : modes.d) dmin = std::min(dmin, std::abs(d));
  sc.stage().residual = dmin;
  sc.stage().work = static_cast<long long>(n_use) * cfg.mode_grid;
  mode_system_invariants(rep, modes);
  return modes;
}

void run_locate(RunReport& rep, const GasModel& gas, const NozzleRadial& noz,
                const FlowState& inflow, std::string& stage) {
  const RunConfig& cfg = rep.config;
  double rs = 0.0;
  {
    StageClock sc(rep, stage, "locate");
    rs = locate_shock(gas, noz, inflow, cfg.exit_p, cfg.tol_shock);
    sc.stage().work = 1;
  }
  build_background(rep, gas, noz, inflow, rs, stage);
  const double gap = std::abs(rep.p_c - cfg.exit_p) / cfg.exit_p;
  rep.stages.front().residual = gap;
  add_bounded(rep, "locate-round-trip", gap, 1e-8);
}

void run_solve(RunReport& rep, const GasModel& gas, const NozzleRadial& noz,
               const FlowState& inflow, std::string& stage) {
  const RunConfig& cfg = rep.config;
  const RadialSolution sol = build_background(rep, gas, noz, inflow, cfg.r_s, stage);
  const SectorGrid grid = make_sector_grid(gas, sol, cfg.nr, cfg.nt, cfg.theta);
  const int n_use = std::min(cfg.n_modes, cfg.nt - 1);
  const ModeSystem modes = build_modes_stage(rep, gas, sol, grid, n_use, stage);

  std::vector<double> tc(std::max<std::size_t>(cfg.exit_coeff.size(), 1), 0.0);
  std::copy(cfg.exit_coeff.begin(), cfg.exit_coeff.end(), tc.begin());
  tc[0] += cfg.exit_p_set ? cfg.exit_p : rep.p_c;
  const ExitProfile target = profile_from_coeffs(grid.theta_half, tc, cfg.nt);
  const PerturbationData base = perturbation_from(cfg, grid.theta_half);
  const InversionOptions opt = options_from(cfg, n_use);

  InversionResult res;
  {
    StageClock sc(rep, stage, "newton");
    res = invert_P(gas, sol, grid, base, target, modes, opt);
    sc.stage().residual =
        res.residual_history.empty() ? 0.0 : res.residual_history.back();
    sc.stage().work = res.iterations;
  }
  rep.front_theta = grid.theta;
  rep.front_f = res.bundle.fbp.front.f;
  rep.exit_p = res.p_ex;
  rep.exit_v = res.v_ex;
  rep.residual_history = res.residual_history;

  add_bounded(rep, "fbp-residual", res.bundle.fbp.residuals.max(), cfg.tol_outer);
  const double last =
      res.residual_history.empty() ? 0.0 : res.residual_history.back();
  add_bounded(rep, "newton-converged", last, cfg.tol_newton);
  int bad = 0;
  for (std::size_t i = 1; i + 1 < res.residual_history.size(); ++i) {
    if (!(res.residual_history[i] < res.residual_history[i - 1])) ++bad;
  }
  add_bounded(rep, "newton-strict-decrease", static_cast<double>(bad), 0.0);
  add_bounded(rep, "target-tail", profile_tail_gap(target), opt.tol_basis);
}

void run_check(RunReport& rep, const GasModel& gas, const NozzleRadial& noz,
               const FlowState& inflow, std::string& stage) {
  const RunConfig& cfg = rep.config;
  const RadialSolution sol = build_background(rep, gas, noz, inflow, cfg.r_s, stage);
  const SectorGrid grid = make_sector_grid(gas, sol, cfg.nr, cfg.nt, cfg.theta);
  const int n_use = std::min(cfg.n_modes, cfg.nt - 1);
  build_modes_stage(rep, gas, sol, grid, n_use, stage);

  const PerturbationData data = perturbation_from(cfg, grid.theta_half);
  const InversionOptions opt = options_from(cfg, n_use);
  const double amp = data.amplitude();
  {
    StageClock sc(rep, stage, "forward");
    FlowBundle bundle;
    const ExitProfile pex = forward_P(gas, sol, grid, data, opt, &bundle);
    sc.stage().residual = bundle.fbp.residuals.max();
    sc.stage().work = bundle.fbp.iterations;
    rep.front_theta = grid.theta;
    rep.front_f = bundle.fbp.front.f;
    rep.exit_p = pex;
    const double v_c = background_exit_flux(gas, sol);
    std::vector<double> vex_s(static_cast<std::size_t>(grid.nt), 0.0);
    for (int j = 0; j < grid.nt; ++j) vex_s[j] = data.vex(grid.theta[j], v_c);
    rep.exit_v = profile_from_samples(grid.theta_half, vex_s, n_use);
    rep.residual_history = bundle.fbp.step_history;

    add_bounded(rep, "fbp-residual", bundle.fbp.residuals.max(), cfg.tol_outer);
    add_bounded(rep, "psi-size-bound", bundle.fbp.psi_norm, 50.0 * amp + 1e-10);
    add_bounded(rep, "front-size-bound", bundle.fbp.front_offset, 50.0 * amp + 1e-10);
    add_invariant(rep, "obliqueness-margin", bundle.fbp.min_b1_dot_nu, 0.0,
                  bundle.fbp.min_b1_dot_nu > 0.0);
    add_invariant(rep, "shock-coefficient-floor", bundle.fbp.min_mu_ratio, 0.5,
                  bundle.fbp.min_mu_ratio >= 0.5);

    double dev = 0.0;
    for (int i = 0; i < grid.nr; ++i) {
      for (int j = 0; j < grid.nt; ++j) {
        const double r = node_radius(grid, bundle.fbp.front, i, j);
        dev = std::max(dev, std::abs(bundle.pressure.at(i, j) - sol.p_plus(r)));
      }
    }
    add_bounded(rep, "pressure-deviation", dev, 50.0 * amp + 1e-9);

    double gap = 0.0;
    for (int k = 1; k <= 5; ++k) {
      const double r = grid.r_s + k * (grid.r1 - grid.r_s) / 6.0;
      const double th = -grid.theta_half + k * grid.theta_full() / 6.0;
      gap = std::max(gap, trace_halving_gap(bundle.field, r, th));
    }
    add_bounded(rep, "trace-halving", gap, 1e-8);
  }
  {
    StageClock sc(rep, stage, "invariants");
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    int bad_entropy = 0;
    int bad_sub = 0;
    for (int k = 0; k < 200; ++k) {
      const double p = 0.2 + 3.0 * unif(rng);
      const double rho = 0.3 + 2.0 * unif(rng);
      const double u = std::sqrt(cfg.gamma * p / rho) * (1.05 + 2.0 * unif(rng));
      const FlowState up{rho, u, p};
      const GasModel g2 = make_gas(cfg.gamma, up);
      const JumpResult jr = rh_jump_radial(g2, up);
      const RhResiduals rr = rh_residuals(g2, jr.upstream, jr.downstream,
                                          jr.normal_speed_up, jr.normal_speed_down);
      worst = std::max({worst, std::abs(rr.mass) / std::abs(rho * u),
                        std::abs(rr.momentum) / std::abs(rho * u * u + p),
                        std::abs(rr.energy) / std::abs(g2.b0)});
      if (!(entropy_measure(g2, jr.downstream) > entropy_measure(g2, up))) ++bad_entropy;
      if (mach_class(g2, jr.downstream) != MachClass::Subsonic) ++bad_sub;
    }
    add_bounded(rep, "rh-random-residual", worst, 1e-12);
    add_bounded(rep, "rh-random-entropy", static_cast<double>(bad_entropy), 0.0);
    add_bounded(rep, "rh-random-subsonic", static_cast<double>(bad_sub), 0.0);

    const double span = cfg.r1 - cfg.r0;
    int bad_mono = 0;
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 11; ++i) {
      const double rs = cfg.r0 + (0.2 + 0.6 * i / 10.0) * span;
      const double pe = exit_pressure(gas, noz, inflow, rs);
      if (!(pe < prev)) ++bad_mono;
      prev = pe;
    }
    add_bounded(rep, "exit-monotone", static_cast<double>(bad_mono), 0.0);

    const double rs_back = locate_shock(gas, noz, inflow, rep.p_c, cfg.tol_shock);
    add_bounded(rep, "locate-round-trip", std::abs(rs_back - rep.r_s), 1e-8);

    const double flux = inflow_isentropic_flux(gas, noz, inflow);
    double var = 0.0;
    IsentropicExit first{0.0, 0.0};
    for (int i = 0; i < 5; ++i) {
      const double rs = cfg.r0 + (0.2 + 0.6 * i / 4.0) * span;
      const IsentropicExit ie = isentropic_radial_family(gas, noz, flux, rs);
      if (i == 0) {
        first = ie;
      } else {
        var = std::max(var, std::abs(ie.exit_u - first.exit_u) / std::abs(first.exit_u));
        var = std::max(var, std::abs(ie.exit_p - first.exit_p) / std::abs(first.exit_p));
      }
    }
    add_bounded(rep, "isentropic-degenerate", var, 1e-12);
    sc.stage().residual = worst;
    sc.stage().work = 200 + 11 + 5;
  }
}

void run_sweep(RunReport& rep, const GasModel& gas, const NozzleRadial& noz,
               const FlowState& inflow, std::string& stage) {
  const RunConfig& cfg = rep.config;
  const RadialSolution sol = build_background(rep, gas, noz, inflow, cfg.r_s, stage);
  const int n_use = std::min(cfg.n_modes, cfg.nt - 1);
  {
    StageClock sc(rep, stage, "sweep");
    const SectorGrid grid = make_sector_grid(gas, sol, cfg.nr, cfg.nt, cfg.theta);
    const InversionOptions opt = options_from(cfg, n_use);
    long long work = 0;
    for (int k = 0; k < cfg.sweep_levels; ++k) {
      PerturbationData d = perturbation_from(cfg, grid.theta_half);
      scale_perturbation(d, std::pow(cfg.sweep_factor, k));
      FlowBundle bundle;
      const ExitProfile pex = forward_P(gas, sol, grid, d, opt, &bundle);
      double gap = 0.0;
      for (double v : pex.value) gap = std::max(gap, std::abs(v - rep.p_c));
      rep.sweep_amp.push_back(d.amplitude());
      rep.sweep_psi.push_back(bundle.fbp.psi_norm);
      rep.sweep_front.push_back(bundle.fbp.front_offset);
      rep.sweep_gap.push_back(gap);
      work += bundle.fbp.iterations;
      if (k == 0) {
        rep.front_theta = grid.theta;
        rep.front_f = bundle.fbp.front.f;
        rep.exit_p = pex;
      }
    }
    sc.stage().residual = rep.sweep_gap.back();
    sc.stage().work = work;
  }
  int bad = 0;
  for (std::size_t k = 1; k < rep.sweep_gap.size(); ++k) {
    if (!(rep.sweep_gap[k] < rep.sweep_gap[k - 1])) ++bad;
  }
  add_bounded(rep, "sweep-monotone", static_cast<double>(bad), 0.0);
  const std::size_t n = rep.sweep_gap.size();
  const double ratio = rep.sweep_gap[n - 1] / rep.sweep_gap[n - 2];
  add_invariant(rep, "sweep-first-order", ratio, cfg.sweep_factor,
                std::abs(ratio / cfg.sweep_factor - 1.0) <= 0.4);
  double c_psi = 0.0;
  double c_front = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    c_psi = std::max(c_psi, rep.sweep_psi[k] / rep.sweep_amp[k]);
    c_front = std::max(c_front, rep.sweep_front[k] / rep.sweep_amp[k]);
  }
  add_bounded(rep, "psi-linear-bound", c_psi, 50.0);
  add_bounded(rep, "front-linear-bound", c_front, 50.0);
}

void run_demo(RunReport& rep, const GasModel& gas, const NozzleRadial& noz,
              const FlowState& inflow, std::string& stage) {
  const RunConfig& cfg = rep.config;
  build_background(rep, gas, noz, inflow, cfg.r_s, stage);
  StageClock sc(rep, stage, "family");
  const double span = cfg.r1 - cfg.r0;
  const double flux = inflow_isentropic_flux(gas, noz, inflow);
  const int npt = 21;
  for (int i = 0; i < npt; ++i) {
    const double rs = cfg.r0 + (0.2 + 0.6 * i / (npt - 1.0)) * span;
    rep.demo_rs.push_back(rs);
    rep.demo_exit_p.push_back(exit_pressure(gas, noz, inflow, rs));
    const IsentropicExit ie = isentropic_radial_family(gas, noz, flux, rs);
    rep.demo_isen_u.push_back(ie.exit_u);
    rep.demo_isen_p.push_back(ie.exit_p);
  }
  double var = 0.0;
  for (int i = 1; i < npt; ++i) {
    var = std::max(var, std::abs(rep.demo_isen_u[i] - rep.demo_isen_u[0]) /
                            std::abs(rep.demo_isen_u[0]));
    var = std::max(var, std::abs(rep.demo_isen_p[i] - rep.demo_isen_p[0]) /
                            std::abs(rep.demo_isen_p[0]));
  }
  add_bounded(rep, "isentropic-degenerate", var, 1e-12);
  const auto [lo, hi] =
      std::minmax_element(rep.demo_exit_p.begin(), rep.demo_exit_p.end());
  const double contrast = (*hi - *lo) / (0.5 * (*hi + *lo));
  add_invariant(rep, "exit-contrast", contrast, 0.01, contrast > 0.01);
  sc.stage().residual = var;
  sc.stage().work = npt;
}

}  // namespace

RunReport run(const RunConfig& cfg) {
  validate_config(cfg);
  RunReport rep;
  rep.config = cfg;
  const FlowState inflow{cfg.rho_in, cfg.u_in, cfg.p_in};
  const GasModel gas = make_gas(cfg.gamma, inflow);
  const NozzleRadial noz(cfg.r0, cfg.r1, cfg.dim);
  std::string stage = "setup";
  try {
    switch (cfg.mode) {
      case RunMode::Background:
        build_background(rep, gas, noz, inflow, cfg.r_s, stage);
        break;
      case RunMode::LocateShock:
        run_locate(rep, gas, noz, inflow, stage);
        break;
      case RunMode::Solve:
        run_solve(rep, gas, noz, inflow, stage);
        break;
      case RunMode::Sweep:
        run_sweep(rep, gas, noz, inflow, stage);
        break;
      case RunMode::Check:
        run_check(rep, gas, noz, inflow, stage);
        break;
      case RunMode::DemoIsentropic:
        run_demo(rep, gas, noz, inflow, stage);
        break;
    }
    if (!cfg.out_dir.empty()) {
      stage = "emit";
      emit_plot_data(rep, cfg.out_dir);
    }
  } catch (const Error& e) {
    rethrow_with_stage(stage, e);
  }
  log_info("run finished, " + std::to_string(rep.failed_invariants()) +
           " failed invariant(s)");
  return rep;
}

namespace {

std::FILE* open_out(const std::filesystem::path& p) {
  std::FILE* f = std::fopen(p.c_str(), "wb");
  if (f == nullptr) throw IoError("cannot open " + p.string() + " for writing");
  return f;
}

}  // namespace

std::string report_json(const RunReport& rep) {
  const RunConfig& cfg = rep.config;
  json j;
  j["schema"] = "transonic-report/1";
  j["mode"] = run_mode_name(cfg.mode);
  j["r_s"] = rep.r_s;
  j["p_c"] = rep.p_c;
  j["failed"] = rep.failed_invariants();

  json c;
  c["mode"] = run_mode_name(cfg.mode);
  c["gas"]["gamma"] = cfg.gamma;
  c["nozzle"]["r0"] = cfg.r0;
  c["nozzle"]["r1"] = cfg.r1;
  c["nozzle"]["dim"] = cfg.dim;
  c["nozzle"]["theta"] = cfg.theta;
  c["inflow"]["rho"] = cfg.rho_in;
  c["inflow"]["u"] = cfg.u_in;
  c["inflow"]["p"] = cfg.p_in;
  c["shock"]["r_s"] = cfg.r_s;
  if (cfg.exit_p_set) c["exit"]["pressure"] = cfg.exit_p;
  if (!cfg.exit_coeff.empty()) c["exit"]["coeff"] = cfg.exit_coeff;
  c["perturbation"]["psi_family"] = cfg.psi_family;
  c["perturbation"]["psi_amp"] = cfg.psi_amp;
  c["perturbation"]["psi_mode"] = cfg.psi_mode;
  c["perturbation"]["upstream_phi_amp"] = cfg.up_phi_amp;
  c["perturbation"]["upstream_phi_mode"] = cfg.up_phi_mode;
  c["perturbation"]["upstream_p_amp"] = cfg.up_p_amp;
  c["perturbation"]["upstream_p_mode"] = cfg.up_p_mode;
  c["perturbation"]["vex_coeff"] = cfg.vex_coeff;
  c["sweep"]["levels"] = cfg.sweep_levels;
  c["sweep"]["factor"] = cfg.sweep_factor;
  c["numerics"]["nr"] = cfg.nr;
  c["numerics"]["nt"] = cfg.nt;
  c["numerics"]["modes"] = cfg.n_modes;
  c["numerics"]["mode_grid"] = cfg.mode_grid;
  c["numerics"]["tol_outer"] = cfg.tol_outer;
  c["numerics"]["tol_newton"] = cfg.tol_newton;
  c["numerics"]["tol_shock"] = cfg.tol_shock;
  c["numerics"]["tol_basis"] = cfg.tol_basis;
  c["numerics"]["wall_slip"] = cfg.wall_slip;
  c["numerics"]["kernel_floor"] = cfg.kernel_floor;
  c["numerics"]["max_outer"] = cfg.max_outer;
  c["numerics"]["max_newton"] = cfg.max_newton;
  c["numerics"]["seed"] = cfg.seed;
  c["numerics"]["parallel"] = cfg.parallel;
  j["config"] = c;

  json st = json::array();
  for (const auto& s : rep.stages) {
    st.push_back({{"name", s.name}, {"residual", s.residual}, {"work", s.work}});
  }
  j["stages"] = st;

  json iv = json::array();
  for (const auto& i : rep.invariants) {
    iv.push_back({{"name", i.name},
                  {"value", i.value},
                  {"bound", i.bound},
                  {"pass", i.pass}});
  }
  j["invariants"] = iv;

  if (!rep.front_f.empty()) {
    j["front"]["theta"] = rep.front_theta;
    j["front"]["f"] = rep.front_f;
  }
  if (rep.exit_p.n_samples() > 0) {
    j["exit"]["theta"] = rep.exit_p.theta;
    j["exit"]["pressure"] = rep.exit_p.value;
    j["exit"]["pressure_coeff"] = rep.exit_p.coeff;
    if (rep.exit_v.n_samples() > 0) {
      j["exit"]["flux"] = rep.exit_v.value;
      j["exit"]["flux_coeff"] = rep.exit_v.coeff;
    }
  }
  if (!rep.residual_history.empty()) j["residual_history"] = rep.residual_history;
  if (!rep.mode_d.empty()) {
    j["modes"]["lambda"] = rep.mode_lambda;
    j["modes"]["q_shock"] = rep.mode_q_shock;
    j["modes"]["d"] = rep.mode_d;
  }
  if (!rep.sweep_amp.empty()) {
    j["sweep"]["amplitude"] = rep.sweep_amp;
    j["sweep"]["psi_norm"] = rep.sweep_psi;
    j["sweep"]["front_offset"] = rep.sweep_front;
    j["sweep"]["exit_gap"] = rep.sweep_gap;
  }
  if (!rep.demo_rs.empty()) {
    j["isentropic"]["r_s"] = rep.demo_rs;
    j["isentropic"]["exit_p"] = rep.demo_exit_p;
    j["isentropic"]["isen_u"] = rep.demo_isen_u;
    j["isentropic"]["isen_p"] = rep.demo_isen_p;
  }
  return j.dump(2) + "\n";
}

void emit_plot_data(const RunReport& rep, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  const fs::path base(dir);

  {
    std::FILE* f = open_out(base / "branches.csv");
    std::fprintf(f, "branch,r,u,p,rho\n");
    auto dump = [&](const char* name, const BranchTable& b) {
      for (std::size_t i = 0; i < b.r.size(); ++i) {
        std::fprintf(f, "%s,%.17e,%.17e,%.17e,%.17e\n", name, b.r[i], b.u[i],
                     b.p[i], b.rho[i]);
      }
    };
    dump("sup", rep.sup);
    dump("sub", rep.sub);
    std::fclose(f);
  }
  if (!rep.front_f.empty()) {
    std::FILE* f = open_out(base / "front.csv");
    std::fprintf(f, "theta,f\n");
    for (std::size_t i = 0; i < rep.front_f.size(); ++i)
      std::fprintf(f, "%.17e,%.17e\n", rep.front_theta[i], rep.front_f[i]);
    std::fclose(f);
  }
  if (rep.exit_p.n_samples() > 0) {
    std::FILE* f = open_out(base / "exit_profiles.csv");
    const bool with_flux = rep.exit_v.n_samples() == rep.exit_p.n_samples();
    std::fprintf(f, with_flux ? "theta,p,v\n" : "theta,p\n");
    for (int i = 0; i < rep.exit_p.n_samples(); ++i) {
      if (with_flux) {
        std::fprintf(f, "%.17e,%.17e,%.17e\n", rep.exit_p.theta[i],
                     rep.exit_p.value[i], rep.exit_v.value[i]);
      } else {
        std::fprintf(f, "%.17e,%.17e\n", rep.exit_p.theta[i], rep.exit_p.value[i]);
      }
    }
    std::fclose(f);
  }
  if (!rep.residual_history.empty()) {
    std::FILE* f = open_out(base / "residuals.csv");
    std::fprintf(f, "iter,residual\n");
    for (std::size_t i = 0; i < rep.residual_history.size(); ++i)
      std::fprintf(f, "%zu,%.17e\n", i, rep.residual_history[i]);
    std::fclose(f);
  }
  if (!rep.mode_d.empty()) {
    std::FILE* f = open_out(base / "modes.csv");
    std::fprintf(f, "j,lambda,q_shock,d\n");
    for (std::size_t i = 0; i < rep.mode_d.size(); ++i) {
      std::fprintf(f, "%zu,%.17e,%.17e,%.17e\n", i, rep.mode_lambda[i],
                   rep.mode_q_shock[i], rep.mode_d[i]);
    }
    std::fclose(f);
  }
  if (!rep.sweep_amp.empty()) {
    std::FILE* f = open_out(base / "sweep.csv");
    std::fprintf(f, "amplitude,psi_norm,front_offset,exit_gap\n");
    for (std::size_t i = 0; i < rep.sweep_amp.size(); ++i) {
      std::fprintf(f, "%.17e,%.17e,%.17e,%.17e\n", rep.sweep_amp[i],
                   rep.sweep_psi[i], rep.sweep_front[i], rep.sweep_gap[i]);
    }
    std::fclose(f);
  }
  if (!rep.demo_rs.empty()) {
    std::FILE* f = open_out(base / "isentropic.csv");
    std::fprintf(f, "r_s,exit_p,isen_u,isen_p\n");
    for (std::size_t i = 0; i < rep.demo_rs.size(); ++i) {
      std::fprintf(f, "%.17e,%.17e,%.17e,%.17e\n", rep.demo_rs[i],
                   rep.demo_exit_p[i], rep.demo_isen_u[i], rep.demo_isen_p[i]);
    }
    std::fclose(f);
  }
  {
    const std::string s = report_json(rep);
    std::FILE* f = open_out(base / "report.json");
    std::fwrite(s.data(), 1, s.size(), f);
    std::fclose(f);
  }
}

int exit_code_for(const Error& e) {
#define TRANSONIC_CODE(TYPE, CODE) \
  if (dynamic_cast<const TYPE*>(&e) != nullptr) return CODE
  TRANSONIC_CODE(ParseError, 2);
  TRANSONIC_CODE(ValidationError, 3);
  TRANSONIC_CODE(IoError, 4);
  TRANSONIC_CODE(CavitationError, 10);
  TRANSONIC_CODE(SonicSingularityError, 11);
  TRANSONIC_CODE(NotSupersonicError, 12);
  TRANSONIC_CODE(DegenerateShockError, 13);
  TRANSONIC_CODE(DomainError, 14);
  TRANSONIC_CODE(PressureOutOfRangeError, 15);
  TRANSONIC_CODE(NoRootError, 16);
  TRANSONIC_CODE(EllipticityLossError, 20);
  TRANSONIC_CODE(ObliquenessError, 21);
  TRANSONIC_CODE(SolverDivergenceError, 22);
  TRANSONIC_CODE(TrustRegionError, 23);
  TRANSONIC_CODE(FrontEscapeError, 24);
  TRANSONIC_CODE(NoConvergenceError, 25);
  TRANSONIC_CODE(RadialFloorError, 30);
  TRANSONIC_CODE(StepFailureError, 31);
  TRANSONIC_CODE(ModeSolveError, 32);
  TRANSONIC_CODE(NearSingularError, 33);
#undef TRANSONIC_CODE
  return 64;
}

}  // namespace transonic
