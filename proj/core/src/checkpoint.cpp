#include <fstream>
#include <sstream>

#include "json.hpp"
#include "warmstart/error.hpp"
#include "warmstart/gnn.hpp"

namespace warmstart {

using ordered_json = nlohmann::ordered_json;

std::string model_to_json(const GnnModel& model) {
  const auto& c = model.config();
  ordered_json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["layer_type"] = to_string(c.layer_type);
  j["p"] = c.p;
  j["input_dim"] = c.input_dim;
  j["hidden_dim"] = c.hidden_dim;
  j["num_layers"] = c.num_layers;
  j["dropout"] = c.dropout;
  j["attention_variant"] = to_string(c.attention);
  j["leaky_slope"] = c.leaky_slope;
  ordered_json weights = ordered_json::object();
  for (const auto& [name, t] : model.weights()) {
    ordered_json w;
    w["shape"] = ordered_json::array({t.rows(), t.cols()});
    w["values"] = std::vector<double>(t.values().begin(), t.values().end());
    weights[name] = std::move(w);
  }
  j["weights"] = std::move(weights);
  return j.dump(1);
}

GnnModel model_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("checkpoint is not valid JSON: ") + e.what(), 1);
  }
  auto fail = [](const std::string& what) -> void { throw SchemaError("checkpoint: " + what, 1); };
  if (!j.is_object()) fail("root must be an object");
  for (const char* key : {"format_version", "layer_type", "p", "input_dim", "hidden_dim", "num_layers", "dropout",
                          "weights"})
    if (!j.contains(key)) fail(std::string("missing field \"") + key + "\"");
  if (!j["format_version"].is_number_integer() || j["format_version"].get<int>() != kCheckpointFormatVersion)
    fail("unsupported format_version");

  ModelConfig c;
  if (!j["layer_type"].is_string()) fail("\"layer_type\" must be a string");
  const auto layer = parse_layer_type(j["layer_type"].get<std::string>());
  if (!layer) fail("unknown layer_type \"" + j["layer_type"].get<std::string>() + "\"");
  c.layer_type = *layer;
  for (const char* key : {"p", "input_dim", "hidden_dim", "num_layers"})
    if (!j[key].is_number_unsigned()) fail(std::string("\"") + key + "\" must be a positive integer");
  c.p = j["p"].get<std::size_t>();
  c.input_dim = j["input_dim"].get<std::size_t>();
  c.hidden_dim = j["hidden_dim"].get<std::size_t>();
  c.num_layers = j["num_layers"].get<std::size_t>();
  if (!j["dropout"].is_number()) fail("\"dropout\" must be a number");
  c.dropout = j["dropout"].get<double>();
  if (j.contains("attention_variant")) {
    const auto variant = j["attention_variant"].is_string()
                             ? parse_attention_variant(j["attention_variant"].get<std::string>())
                             : std::nullopt;
    if (!variant) fail("unknown attention_variant");
    c.attention = *variant;
  }
  if (j.contains("leaky_slope")) {
    if (!j["leaky_slope"].is_number()) fail("\"leaky_slope\" must be a number");
    c.leaky_slope = j["leaky_slope"].get<double>();
  }

  if (!j["weights"].is_object()) fail("\"weights\" must be an object");
  std::vector<GnnModel::NamedTensor> weights;
  for (const auto& [name, w] : j["weights"].items()) {
    if (!w.is_object() || !w.contains("shape") || !w.contains("values") || !w["shape"].is_array() ||
        w["shape"].size() != 2 || !w["values"].is_array())
      fail("weight \"" + name + "\" needs \"shape\" [rows, cols] and \"values\"");
    const auto rows = w["shape"][0].get<std::size_t>();
    const auto cols = w["shape"][1].get<std::size_t>();
    std::vector<double> values;
    for (const auto& x : w["values"]) {
      if (!x.is_number()) fail("weight \"" + name + "\" has a non-numeric value");
      values.push_back(x.get<double>());
    }
    if (values.size() != rows * cols) fail("weight \"" + name + "\" values do not match its shape");
    weights.emplace_back(name, Tensor::from(rows, cols, std::move(values), true));
  }
  try {
    return GnnModel::from_weights(c, std::move(weights));
  } catch (const InvalidArgument& e) {
    throw SchemaError(std::string("checkpoint: ") + e.what(), 1);
  }
}

void save_model(const GnnModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << model_to_json(model) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

GnnModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace warmstart
