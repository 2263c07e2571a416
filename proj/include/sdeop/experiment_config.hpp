#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sdeop/evaluation.hpp"
#include "sdeop/models.hpp"
#include "sdeop/operator_net.hpp"
#include "sdeop/solvers.hpp"
#include "sdeop/time_grid.hpp"
#include "sdeop/training.hpp"

namespace sdeop {

struct ModelConfig {
  std::string name = "ou";
  std::map<std::string, double> params;  // missing entries take model defaults
};

struct DataConfig {
  int n_train = 20;
  int n_eval = 800;
  std::string solver = "exact";  // "exact" | "em" | "emp"
  int emp_particles = 10000;     // ensemble size when solver = "emp"
  std::string x0 = "fixed(1)";
};

struct EvalSettings {
  std::vector<double> scales{1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0};
};

struct BenchSettings {
  std::vector<int> particle_counts{100, 1000, 10000};
  std::vector<int> node_counts{31, 51, 101};
};

// One experiment, end to end.  Every field has a default; a config file only
// names what it overrides.  Unknown keys are rejected.
struct ExperimentConfig {
  ModelConfig model;
  TimeGrid grid{0.0, 0.01, 31};
  DataConfig data;
  NetConfig net;
  TrainConfig train;
  EvalSettings eval;
  BenchSettings bench;
  std::uint64_t base_seed = 42;
  std::string out_dir = "out";

  void validate() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text, const std::string& origin);

// Full config (defaults filled in) as sorted-key JSON; stable bytes.
// `out_dir` is excluded: where artifacts land is not part of the experiment,
// so relocating a run never changes its identity.
std::string canonical_json(const ExperimentConfig& config);

// FNV-1a 64-bit hash of the canonical JSON, as 16 hex digits.  Echoed into
// every output header so artifacts can be traced to their configuration.
std::string config_hash(const ExperimentConfig& config);

// The model a config names, with everything the pipeline needs to drive it.
struct ResolvedModel {
  bool mckean_vlasov = false;
  SdeModel sde;          // valid when !mckean_vlasov
  McKeanVlasovModel mv;  // valid when mckean_vlasov
  PathSolver reference;  // produces training/evaluation truth (empty for mv)
  std::string descriptor;
  X0Policy x0;
};

ResolvedModel resolve_model(const ExperimentConfig& config);

}  // namespace sdeop
