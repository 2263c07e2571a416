#include "sdeop/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "sdeop/errors.hpp"
#include "sdeop/version.hpp"

namespace sdeop {

namespace {

using nlohmann::json;

json tensor_to_json(const Tensor& t) {
  return json{{"shape", t.shape}, {"data", t.data}};
}

Tensor tensor_from_json(const json& j, const std::string& name) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("data")) {
    throw FormatError("checkpoint: tensor '" + name + "' must carry shape and data");
  }
  Tensor t = Tensor::zeros(j.at("shape").get<std::vector<int>>());
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != t.size()) {
    throw FormatError("checkpoint: tensor '" + name + "' data length " +
                      std::to_string(data.size()) + " does not match shape");
  }
  t.data = data;
  return t;
}

std::string activation_name(Activation a) { return a == Activation::Tanh ? "tanh" : "sigmoid"; }

Activation activation_from(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  throw FormatError("checkpoint: unknown activation '" + name + "'");
}

std::string branch_input_name(BranchInput b) {
  return b == BranchInput::Values ? "values" : "increments";
}

BranchInput branch_input_from(const std::string& name) {
  if (name == "values") return BranchInput::Values;
  if (name == "increments") return BranchInput::Increments;
  throw FormatError("checkpoint: unknown branch_input '" + name + "'");
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  const auto& params = checkpoint.params;
  const auto& config = params.config;
  config.validate();

  json j;
  j["format"] = "sdeop-checkpoint";
  j["format_version"] = kCheckpointFormatVersion;
  j["tool_version"] = kToolVersion;
  j["model"] = checkpoint.meta.model;
  j["solver"] = checkpoint.meta.solver;
  j["x0_policy"] = checkpoint.meta.x0_policy;
  j["config_hash"] = checkpoint.meta.config_hash;
  j["grid"] = {{"t0", checkpoint.meta.grid.t0},
               {"h", checkpoint.meta.grid.h},
               {"M", checkpoint.meta.grid.M}};
  j["net"] = {{"rnn_hidden", config.rnn_hidden},
              {"branch_layers", config.branch_layers},
              {"trunk_layers", config.trunk_layers},
              {"p", config.p},
              {"activation", activation_name(config.activation)},
              {"branch_input", branch_input_name(config.branch_input)},
              {"sensor_times", config.sensor_times},
              {"init_seed", config.init_seed}};
  j["train"] = {{"final_loss", checkpoint.meta.final_loss},
                {"epochs", checkpoint.meta.epochs},
                {"stopped_by", checkpoint.meta.stopped_by},
                {"base_seed", checkpoint.meta.base_seed}};

  json tensors = json::object();
  const auto names = params.tensor_names();
  const auto list = params.tensors();
  for (std::size_t i = 0; i < list.size(); ++i) tensors[names[i]] = tensor_to_json(*list[i]);
  j["params"] = std::move(tensors);

  if (checkpoint.adam) {
    j["adam"] = {{"step", checkpoint.adam->step},
                 {"m", checkpoint.adam->m},
                 {"v", checkpoint.adam->v}};
  }

  std::ofstream out(path);
  if (!out) throw IoError("save_checkpoint: cannot open " + path);
  out << j.dump(1) << "\n";
  if (!out) throw IoError("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_checkpoint: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw FormatError("load_checkpoint: " + path + " is not valid JSON: " + e.what());
  }

  if (!j.is_object() || j.value("format", "") != "sdeop-checkpoint") {
    throw FormatError("load_checkpoint: " + path + " is not a checkpoint file");
  }
  const int version = j.value("format_version", -1);
  if (version != kCheckpointFormatVersion) {
    throw FormatError("load_checkpoint: unsupported format_version " +
                      std::to_string(version) + " (expected " +
                      std::to_string(kCheckpointFormatVersion) + ")");
  }

  try {
    Checkpoint ckpt;
    const auto& net = j.at("net");
    NetConfig config;
    config.rnn_hidden = net.at("rnn_hidden").get<int>();
    config.branch_layers = net.at("branch_layers").get<std::vector<int>>();
    config.trunk_layers = net.at("trunk_layers").get<std::vector<int>>();
    config.p = net.at("p").get<int>();
    config.activation = activation_from(net.at("activation").get<std::string>());
    config.branch_input = branch_input_from(net.at("branch_input").get<std::string>());
    config.sensor_times = net.at("sensor_times").get<std::vector<double>>();
    config.init_seed = net.at("init_seed").get<std::uint64_t>();
    config.validate();

    // allocate the right shapes, then overwrite from the file
    ckpt.params = init_params(config);
    const auto names = ckpt.params.tensor_names();
    const auto list = ckpt.params.tensors();
    const auto& tensors = j.at("params");
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!tensors.contains(names[i])) {
        throw FormatError("checkpoint: missing tensor '" + names[i] + "'");
      }
      Tensor loaded = tensor_from_json(tensors.at(names[i]), names[i]);
      if (loaded.shape != list[i]->shape) {
        throw FormatError("checkpoint: tensor '" + names[i] + "' has shape " +
                          shape_string(loaded) + ", expected " + shape_string(*list[i]));
      }
      *list[i] = std::move(loaded);
    }

    const auto& grid = j.at("grid");
    ckpt.meta.grid = make_grid(grid.at("t0").get<double>(), grid.at("h").get<double>(),
                               grid.at("M").get<int>());
    ckpt.meta.model = j.value("model", "");
    ckpt.meta.solver = j.value("solver", "");
    ckpt.meta.x0_policy = j.value("x0_policy", "");
    ckpt.meta.config_hash = j.value("config_hash", "");
    const auto& train = j.at("train");
    ckpt.meta.final_loss = train.at("final_loss").get<double>();
    ckpt.meta.epochs = train.at("epochs").get<long>();
    ckpt.meta.stopped_by = train.value("stopped_by", "");
    ckpt.meta.base_seed = train.at("base_seed").get<std::uint64_t>();

    if (j.contains("adam")) {
      AdamState adam;
      adam.step = j.at("adam").at("step").get<long>();
      adam.m = j.at("adam").at("m").get<std::vector<double>>();
      adam.v = j.at("adam").at("v").get<std::vector<double>>();
      if (adam.m.size() != ckpt.params.param_count() || adam.v.size() != adam.m.size()) {
        throw FormatError("checkpoint: optimizer state does not match parameter count");
      }
      ckpt.adam = std::move(adam);
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw FormatError("load_checkpoint: " + path + ": " + e.what());
  }
}

}  // namespace sdeop
