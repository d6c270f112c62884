#include "ctsim/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace ctsim::io {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw std::runtime_error("config: unknown key '" + where + key + "'");
}

double num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw std::runtime_error(std::string("config: '") + key + "' must be a number");
  return j[key].get<double>();
}

std::uint64_t unsigned_num(const json& j, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_unsigned())
    throw std::runtime_error(std::string("config: '") + key +
                             "' must be a nonnegative integer");
  return j[key].get<std::uint64_t>();
}

std::vector<double> num_list(const json& j, const char* key,
                             std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_array() || j[key].empty())
    throw std::runtime_error(std::string("config: '") + key +
                             "' must be a nonempty array");
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (!v.is_number())
      throw std::runtime_error(std::string("config: '") + key +
                               "' entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j = json::parse(in);
  if (!j.is_object()) throw std::runtime_error("config: root must be an object");
  reject_unknown(j, {"model", "priors", "mc", "pipeline", "io"}, "");

  RunConfig cfg;
  if (j.contains("model")) {
    const json& m = j["model"];
    reject_unknown(m, {"beta", "xi", "lambda", "nu"}, "model.");
    cfg.bp.beta = num(m, "beta", cfg.bp.beta);
    cfg.bp.xi = num(m, "xi", cfg.bp.xi);
    cfg.proc.lambda = num(m, "lambda", cfg.proc.lambda);
    cfg.proc.nu = num(m, "nu", cfg.proc.nu);
  }
  if (j.contains("priors")) {
    const json& p = j["priors"];
    reject_unknown(p, {"mu_p", "sigma_p", "mu_s", "sigma_s"}, "priors.");
    cfg.priors.mu_p = num(p, "mu_p", cfg.priors.mu_p);
    cfg.priors.sigma_p = num(p, "sigma_p", cfg.priors.sigma_p);
    cfg.priors.mu_s = num(p, "mu_s", cfg.priors.mu_s);
    cfg.priors.sigma_s = num(p, "sigma_s", cfg.priors.sigma_s);
  }
  if (j.contains("mc")) {
    const json& m = j["mc"];
    reject_unknown(m,
                   {"mode", "replications", "agents", "t", "seed", "threads",
                    "backend", "grid"},
                   "mc.");
    if (m.contains("mode")) {
      std::string mode = m["mode"].get<std::string>();
      if (mode == "linear_gaussian") cfg.mode = mc::Mode::LinearGaussian;
      else if (mode == "microfounded") cfg.mode = mc::Mode::Microfounded;
      else throw std::runtime_error("config: unknown mc.mode '" + mode + "'");
    }
    cfg.replications = unsigned_num(m, "replications", cfg.replications);
    cfg.agents = unsigned_num(m, "agents", cfg.agents);
    cfg.t = num(m, "t", cfg.t);
    cfg.seed = unsigned_num(m, "seed", cfg.seed);
    std::uint64_t threads = unsigned_num(m, "threads", std::uint64_t(cfg.threads));
    if (threads > 1024)
      throw std::runtime_error("config: mc.threads must lie in [1,1024]");
    cfg.threads = int(threads);
    if (m.contains("backend"))
      cfg.backend = mc::backend_from_string(m["backend"].get<std::string>());
    if (m.contains("grid")) {
      const json& g = m["grid"];
      reject_unknown(g, {"beta", "xi", "eta_s"}, "mc.grid.");
      cfg.grid.betas = num_list(g, "beta", cfg.grid.betas);
      cfg.grid.xis = num_list(g, "xi", cfg.grid.xis);
      cfg.grid.eta_ss = num_list(g, "eta_s", cfg.grid.eta_ss);
    }
  }
  if (j.contains("pipeline")) {
    const json& p = j["pipeline"];
    reject_unknown(p, {"tau_kts", "min_per_side", "total", "grade_mode", "strict"},
                   "pipeline.");
    cfg.pipeline.tau_kts = int(unsigned_num(p, "tau_kts", cfg.pipeline.tau_kts));
    if (cfg.pipeline.tau_kts > 10)
      throw std::runtime_error("config: pipeline.tau_kts must lie in [0,10]");
    cfg.pipeline.reason_rule.min_per_side =
        int(unsigned_num(p, "min_per_side", cfg.pipeline.reason_rule.min_per_side));
    cfg.pipeline.reason_rule.total =
        int(unsigned_num(p, "total", cfg.pipeline.reason_rule.total));
    if (p.contains("grade_mode")) {
      std::string gm = p["grade_mode"].get<std::string>();
      if (gm == "majority") cfg.pipeline.grade_mode = inference::GradeMode::Majority;
      else if (gm == "unanimity") cfg.pipeline.grade_mode = inference::GradeMode::Unanimity;
      else throw std::runtime_error("config: unknown grade_mode '" + gm + "'");
    }
    if (p.contains("strict")) {
      if (!p["strict"].is_boolean())
        throw std::runtime_error("config: pipeline.strict must be a boolean");
      cfg.pipeline.strict = p["strict"].get<bool>();
    }
  }
  if (j.contains("io")) {
    const json& io = j["io"];
    reject_unknown(io, {"out"}, "io.");
    if (io.contains("out")) cfg.out = io["out"].get<std::string>();
  }

  // range validation happens here, not at first use
  validate(cfg.bp);
  validate(cfg.proc);
  validate(cfg.priors);
  if (cfg.replications < 1)
    throw std::runtime_error("config: mc.replications must be >= 1");
  if (cfg.mode == mc::Mode::Microfounded && cfg.agents < 1)
    throw std::runtime_error("config: mc.agents must be >= 1");
  if (cfg.threads < 1) throw std::runtime_error("config: mc.threads must be >= 1");
  return cfg;
}

void apply_env_seed(RunConfig& cfg) {
  const char* env = std::getenv("CTSIM_SEED");
  if (!env || !*env) return;
  char* end = nullptr;
  unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0')
    throw std::runtime_error("CTSIM_SEED must be a nonnegative integer");
  cfg.seed = v;
}

}  // namespace ctsim::io
