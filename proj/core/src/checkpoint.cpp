#include "hibpool/checkpoint.hpp"

#include <fstream>

#include "hibpool/error.hpp"

namespace hibpool {

nlohmann::json checkpoint_to_json(const ModelParams& params, const ExperimentConfig& config) {
  nlohmann::json tensors = nlohmann::json::object();
  for (const auto& [name, v] : params.named()) {
    tensors[name] = {{"rows", v.rows()}, {"cols", v.cols()}, {"data", v.value().data()}};
  }
  const auto& s = params.shape;
  return {
      {"format", "hibpool-checkpoint"},
      {"version", kCheckpointVersion},
      {"config_hash", config_hash(config)},
      {"config", to_json(config)},
      {"shape",
       {{"input_dim", s.input_dim},
        {"hidden", s.hidden},
        {"num_classes", s.num_classes},
        {"layers", s.layers},
        {"readout", to_string(s.readout)},
        {"per_layer_readout_weight", s.per_layer_readout_weight}}},
      {"params", tensors},
  };
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "hibpool-checkpoint") throw FormatError("checkpoint: unexpected format tag");
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw FormatError("checkpoint: unsupported version " + j.at("version").dump());
    }
    Checkpoint cp;
    cp.config = config_from_json(j.at("config"));
    const auto& js = j.at("shape");
    ModelShape shape;
    shape.input_dim = js.at("input_dim").get<std::size_t>();
    shape.hidden = js.at("hidden").get<std::size_t>();
    shape.num_classes = js.at("num_classes").get<std::size_t>();
    shape.layers = js.at("layers").get<std::size_t>();
    shape.readout = parse_readout(js.at("readout").get<std::string>());
    shape.per_layer_readout_weight = js.at("per_layer_readout_weight").get<bool>();
    cp.params = ModelParams::init(shape, 0);
    const auto& tensors = j.at("params");
    for (auto& [name, v] : cp.params.named()) {
      const auto& t = tensors.at(name);
      const auto rows = t.at("rows").get<std::size_t>();
      const auto cols = t.at("cols").get<std::size_t>();
      if (rows != v.rows() || cols != v.cols()) {
        throw FormatError("checkpoint: tensor " + name + " has shape " + std::to_string(rows) + "x" +
                          std::to_string(cols) + ", expected " + v.value().shape_string());
      }
      v.mutable_value() = Matrix::from_rows(rows, cols, t.at("data").get<std::vector<double>>());
    }
    return cp;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const ExperimentConfig& config) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(params, config).dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint " + path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace hibpool
