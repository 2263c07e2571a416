#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sdeop/adam.hpp"
#include "sdeop/operator_net.hpp"
#include "sdeop/time_grid.hpp"

namespace sdeop {

// Everything a checkpoint records beyond the weights themselves.
struct CheckpointMeta {
  std::string model;      // descriptor of the system the net was fitted to
  std::string solver;     // how the training targets were produced
  std::string x0_policy;  // initial-condition convention
  TimeGrid grid;          // training grid
  std::string config_hash;
  double final_loss = 0.0;
  long epochs = 0;
  std::string stopped_by;  // "threshold" | "max_epochs"
  std::uint64_t base_seed = 0;
};

struct Checkpoint {
  DeepONetParams params;
  CheckpointMeta meta;
  std::optional<AdamState> adam;  // present when the run is resumable
};

// JSON on disk; doubles survive bit-exactly.  Readers verify the format tag
// and version and reject anything else with a FormatError.  The net config
// (including sensor times) rides along, so inference always reconstructs the
// view of the driving path the net was trained on.
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace sdeop
