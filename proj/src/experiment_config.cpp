#include "sdeop/experiment_config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sdeop/errors.hpp"

namespace sdeop {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) {
      std::string list;
      for (const char* a : allowed) {
        if (!list.empty()) list += ", ";
        list += a;
      }
      throw ConfigError("config: unknown key '" + key + "' in " + where + " (known: " + list +
                        ")");
    }
  }
}

template <typename T>
void read_into(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for '" + std::string(key) + "' in " + where);
  }
}

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  throw ConfigError("config: unknown activation '" + name + "' (known: tanh, sigmoid)");
}

BranchInput parse_branch_input(const std::string& name) {
  if (name == "values") return BranchInput::Values;
  if (name == "increments") return BranchInput::Increments;
  throw ConfigError("config: unknown branch_input '" + name + "' (known: values, increments)");
}

const char* activation_text(Activation a) { return a == Activation::Tanh ? "tanh" : "sigmoid"; }

const char* branch_input_text(BranchInput b) {
  return b == BranchInput::Values ? "values" : "increments";
}

}  // namespace

void ExperimentConfig::validate() const {
  make_grid(grid.t0, grid.h, grid.M);  // reuses the grid invariants
  net.validate();
  train.validate();
  if (data.n_train < 1) throw ConfigError("config: data.n_train must be >= 1");
  if (data.n_eval < 1) throw ConfigError("config: data.n_eval must be >= 1");
  if (data.emp_particles < 1) throw ConfigError("config: data.emp_particles must be >= 1");
  parse_x0_policy(data.x0);
  if (eval.scales.empty()) throw ConfigError("config: eval.scales must not be empty");
  for (double s : eval.scales) {
    if (!(s > 0.0)) throw ConfigError("config: eval scales must be positive");
  }
  for (int n : bench.particle_counts) {
    if (n < 1) throw ConfigError("config: bench particle counts must be >= 1");
  }
  for (int m : bench.node_counts) {
    if (m < 2) throw ConfigError("config: bench node counts must be >= 2");
  }
  resolve_model(*this);  // model name, params and solver choice all line up
}

ExperimentConfig config_from_json_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + origin + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: " + origin + " must be a JSON object");

  reject_unknown(j, {"model", "grid", "data", "net", "train", "eval", "bench", "base_seed",
                     "out_dir"},
                 origin);

  ExperimentConfig config;
  if (j.contains("model")) {
    const auto& m = j.at("model");
    reject_unknown(m, {"name", "params"}, origin + ".model");
    read_into(m, "name", config.model.name, "model");
    if (m.contains("params")) {
      if (!m.at("params").is_object()) throw ConfigError("config: model.params must be an object");
      for (const auto& [key, value] : m.at("params").items()) {
        if (!value.is_number()) {
          throw ConfigError("config: model param '" + key + "' must be a number");
        }
        config.model.params[key] = value.get<double>();
      }
    }
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    reject_unknown(g, {"t0", "h", "M"}, origin + ".grid");
    read_into(g, "t0", config.grid.t0, "grid");
    read_into(g, "h", config.grid.h, "grid");
    read_into(g, "M", config.grid.M, "grid");
  }
  if (j.contains("data")) {
    const auto& d = j.at("data");
    reject_unknown(d, {"n_train", "n_eval", "solver", "emp_particles", "x0"}, origin + ".data");
    read_into(d, "n_train", config.data.n_train, "data");
    read_into(d, "n_eval", config.data.n_eval, "data");
    read_into(d, "solver", config.data.solver, "data");
    read_into(d, "emp_particles", config.data.emp_particles, "data");
    read_into(d, "x0", config.data.x0, "data");
  }
  if (j.contains("net")) {
    const auto& n = j.at("net");
    reject_unknown(n, {"rnn_hidden", "branch_layers", "trunk_layers", "p", "activation",
                       "branch_input", "sensor_times", "init_seed"},
                   origin + ".net");
    read_into(n, "rnn_hidden", config.net.rnn_hidden, "net");
    read_into(n, "branch_layers", config.net.branch_layers, "net");
    read_into(n, "trunk_layers", config.net.trunk_layers, "net");
    read_into(n, "p", config.net.p, "net");
    if (n.contains("activation")) {
      config.net.activation = parse_activation(n.at("activation").get<std::string>());
    }
    if (n.contains("branch_input")) {
      config.net.branch_input = parse_branch_input(n.at("branch_input").get<std::string>());
    }
    read_into(n, "sensor_times", config.net.sensor_times, "net");
    read_into(n, "init_seed", config.net.init_seed, "net");
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    reject_unknown(t, {"lr", "max_epochs", "threshold", "batch_size", "beta1", "beta2", "eps",
                       "clip_norm", "seed", "threads"},
                   origin + ".train");
    read_into(t, "lr", config.train.lr, "train");
    read_into(t, "max_epochs", config.train.max_epochs, "train");
    read_into(t, "threshold", config.train.threshold, "train");
    read_into(t, "batch_size", config.train.batch_size, "train");
    read_into(t, "beta1", config.train.beta1, "train");
    read_into(t, "beta2", config.train.beta2, "train");
    read_into(t, "eps", config.train.eps, "train");
    read_into(t, "clip_norm", config.train.clip_norm, "train");
    read_into(t, "seed", config.train.seed, "train");
    read_into(t, "threads", config.train.threads, "train");
  }
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    reject_unknown(e, {"scales"}, origin + ".eval");
    read_into(e, "scales", config.eval.scales, "eval");
  }
  if (j.contains("bench")) {
    const auto& b = j.at("bench");
    reject_unknown(b, {"particle_counts", "node_counts"}, origin + ".bench");
    read_into(b, "particle_counts", config.bench.particle_counts, "bench");
    read_into(b, "node_counts", config.bench.node_counts, "bench");
  }
  read_into(j, "base_seed", config.base_seed, origin);
  read_into(j, "out_dir", config.out_dir, origin);

  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_config: cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return config_from_json_text(text.str(), path);
}

std::string canonical_json(const ExperimentConfig& config) {
  json params = json::object();
  for (const auto& [key, value] : config.model.params) params[key] = value;
  const json j{
      {"model", {{"name", config.model.name}, {"params", params}}},
      {"grid", {{"t0", config.grid.t0}, {"h", config.grid.h}, {"M", config.grid.M}}},
      {"data",
       {{"n_train", config.data.n_train},
        {"n_eval", config.data.n_eval},
        {"solver", config.data.solver},
        {"emp_particles", config.data.emp_particles},
        {"x0", config.data.x0}}},
      {"net",
       {{"rnn_hidden", config.net.rnn_hidden},
        {"branch_layers", config.net.branch_layers},
        {"trunk_layers", config.net.trunk_layers},
        {"p", config.net.p},
        {"activation", activation_text(config.net.activation)},
        {"branch_input", branch_input_text(config.net.branch_input)},
        {"sensor_times", config.net.sensor_times},
        {"init_seed", config.net.init_seed}}},
      {"train",
       {{"lr", config.train.lr},
        {"max_epochs", config.train.max_epochs},
        {"threshold", config.train.threshold},
        {"batch_size", config.train.batch_size},
        {"beta1", config.train.beta1},
        {"beta2", config.train.beta2},
        {"eps", config.train.eps},
        {"clip_norm", config.train.clip_norm},
        {"seed", config.train.seed},
        {"threads", config.train.threads}}},
      {"eval", {{"scales", config.eval.scales}}},
      {"bench",
       {{"particle_counts", config.bench.particle_counts},
        {"node_counts", config.bench.node_counts}}},
      {"base_seed", config.base_seed},
  };
  return j.dump(1);
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = canonical_json(config);
  std::uint64_t hash = 1469598103934665603ull;  // FNV-1a 64
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string hex(16, '0');
  for (int i = 15; i >= 0; --i) {
    hex[i] = digits[hash & 0xF];
    hash >>= 4;
  }
  return hex;
}

namespace {

double model_param(const ModelConfig& model, const char* key, double fallback) {
  const auto it = model.params.find(key);
  return it == model.params.end() ? fallback : it->second;
}

void require_solver(const std::string& got, std::initializer_list<const char*> allowed,
                    const std::string& model_name) {
  for (const char* a : allowed) {
    if (got == a) return;
  }
  std::string list;
  for (const char* a : allowed) {
    if (!list.empty()) list += ", ";
    list += a;
  }
  throw ConfigError("config: solver '" + got + "' not available for model '" + model_name +
                    "' (available: " + list + ")");
}

void require_params(const ModelConfig& model, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : model.params) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) {
      throw ConfigError("config: model '" + model.name + "' has no parameter '" + key + "'");
    }
  }
}

}  // namespace

ResolvedModel resolve_model(const ExperimentConfig& config) {
  ResolvedModel out;
  out.x0 = parse_x0_policy(config.data.x0);
  const std::string& name = config.model.name;
  const std::string& solver = config.data.solver;

  if (name == "gbm") {
    require_params(config.model, {"a", "b"});
    require_solver(solver, {"exact", "em"}, name);
    const double a = model_param(config.model, "a", 0.05);
    const double b = model_param(config.model, "b", 0.2);
    out.sde = gbm_model(a, b);
    if (solver == "exact") {
      out.reference = [a, b](double x0, const BrownianPath& p) { return exact_gbm(a, b, x0, p); };
    } else {
      out.reference = [model = out.sde](double x0, const BrownianPath& p) {
        return euler_maruyama(model, x0, p);
      };
    }
  } else if (name == "ou") {
    require_params(config.model, {"a", "b"});
    require_solver(solver, {"exact", "em"}, name);
    const double a = model_param(config.model, "a", 1.0);
    const double b = model_param(config.model, "b", 1.0);
    out.sde = ou_model(a, b);
    if (solver == "exact") {
      out.reference = [a, b](double x0, const BrownianPath& p) { return exact_ou(a, b, x0, p); };
    } else {
      out.reference = [model = out.sde](double x0, const BrownianPath& p) {
        return euler_maruyama(model, x0, p);
      };
    }
  } else if (name == "langevin_gaussian") {
    require_params(config.model, {});
    require_solver(solver, {"em"}, name);
    out.sde = langevin_gaussian_model();
    out.reference = [model = out.sde](double x0, const BrownianPath& p) {
      return euler_maruyama(model, x0, p);
    };
  } else if (name == "burgers") {
    require_params(config.model, {"sigma"});
    require_solver(solver, {"emp"}, name);
    out.mckean_vlasov = true;
    out.mv = burgers_model(model_param(config.model, "sigma", 1.0));
  } else {
    throw ConfigError("config: unknown model '" + name +
                      "' (known: gbm, ou, langevin_gaussian, burgers)");
  }
  out.descriptor = out.mckean_vlasov ? out.mv.descriptor : out.sde.descriptor;
  return out;
}

}  // namespace sdeop
