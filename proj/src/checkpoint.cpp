#include "lsam/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace lsam {

using nlohmann::json;

namespace {

json schema_to_json(const std::vector<FeatureSchema>& schema) {
  json arr = json::array();
  for (const auto& fs : schema) {
    json j;
    j["name"] = fs.name;
    j["kind"] = fs.kind == FeatureKind::kNumeric ? "numeric" : "categorical";
    if (fs.kind == FeatureKind::kCategorical) j["levels"] = fs.levels;
    arr.push_back(j);
  }
  return arr;
}

std::vector<FeatureSchema> schema_from_json(const json& arr) {
  std::vector<FeatureSchema> schema;
  for (const auto& j : arr) {
    FeatureSchema fs;
    fs.name = j.at("name").get<std::string>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "numeric") {
      fs.kind = FeatureKind::kNumeric;
    } else if (kind == "categorical") {
      fs.kind = FeatureKind::kCategorical;
      fs.levels = j.at("levels").get<std::vector<std::string>>();
    } else {
      throw DataError("checkpoint: unknown feature kind '" + kind + "'");
    }
    schema.push_back(std::move(fs));
  }
  return schema;
}

}  // namespace

LsamModel Checkpoint::make_lsam() const {
  if (kind != "lsam") throw ConfigError("checkpoint holds a '" + kind + "' model, not lsam");
  return LsamModel(lsam_config, schema, params);
}

EnsembleModel Checkpoint::make_ensemble() const {
  if (kind != "ensemble") {
    throw ConfigError("checkpoint holds a '" + kind + "' model, not ensemble");
  }
  return EnsembleModel(ensemble_config, schema, subsets, params, trained);
}

Checkpoint checkpoint_of(const LsamModel& model, const std::string& target_name,
                         const std::vector<std::string>& class_labels,
                         const Standardizer& standardizer) {
  Checkpoint ck;
  ck.kind = "lsam";
  ck.lsam_config = model.config();
  ck.schema = model.schema();
  ck.target_name = target_name;
  ck.class_labels = class_labels;
  ck.standardizer = standardizer;
  ck.params = model.params();
  return ck;
}

Checkpoint checkpoint_of(const EnsembleModel& model, const std::string& target_name,
                         const std::vector<std::string>& class_labels,
                         const Standardizer& standardizer) {
  Checkpoint ck;
  ck.kind = "ensemble";
  ck.ensemble_config = model.config();
  ck.subsets = model.subsets();
  ck.trained = model.trained_flags();
  ck.schema = model.schema();
  ck.target_name = target_name;
  ck.class_labels = class_labels;
  ck.standardizer = standardizer;
  ck.params = model.params();
  return ck;
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  json j;
  j["format_version"] = 1;
  j["kind"] = ck.kind;
  j["target"] = ck.target_name;
  j["class_labels"] = ck.class_labels;
  j["schema"] = schema_to_json(ck.schema);

  json stats = json::array();
  for (const auto& st : ck.standardizer.stats) {
    stats.push_back({{"mean", st.mean}, {"scale", st.scale}, {"constant", st.constant}});
  }
  j["standardizer"] = stats;

  if (ck.kind == "lsam") {
    const auto& c = ck.lsam_config;
    j["config"] = {{"embed_dim", c.embed_dim},
                   {"attn_layers", c.attn_layers},
                   {"attn_heads", c.attn_heads},
                   {"hidden_dim", c.hidden()},
                   {"concrete_temperature", c.concrete_temperature},
                   {"out_dim", c.out_dim}};
  } else {
    const auto& c = ck.ensemble_config;
    json subsets = json::array();
    for (const auto& s : ck.subsets) subsets.push_back(s.indices);
    j["config"] = {{"embed_dim", c.embed_dim},
                   {"hidden_dim", c.hidden()},
                   {"out_dim", c.out_dim},
                   {"subsets", subsets},
                   {"trained", ck.trained}};
  }

  json params = json::array();
  for (const auto& e : ck.params.entries) {
    json p;
    p["name"] = e.name;
    std::vector<std::int64_t> dims;
    for (int i = 0; i < e.shape.rank; ++i) dims.push_back(e.shape.d[static_cast<std::size_t>(i)]);
    p["shape"] = dims;
    p["decay"] = e.decay;
    p["data"] = e.value;
    params.push_back(std::move(p));
  }
  j["params"] = std::move(params);

  std::ofstream out(path);
  if (!out) throw DataError("checkpoint: cannot write " + path);
  out << j.dump();
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("checkpoint: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("checkpoint: invalid JSON in " + path + ": " + e.what());
  }
  if (j.at("format_version").get<int>() != 1) {
    throw DataError("checkpoint: unsupported format version");
  }

  Checkpoint ck;
  ck.kind = j.at("kind").get<std::string>();
  ck.target_name = j.at("target").get<std::string>();
  ck.class_labels = j.at("class_labels").get<std::vector<std::string>>();
  ck.schema = schema_from_json(j.at("schema"));

  for (const auto& s : j.at("standardizer")) {
    FeatureStats st;
    st.mean = s.at("mean").get<double>();
    st.scale = s.at("scale").get<double>();
    st.constant = s.at("constant").get<bool>();
    ck.standardizer.stats.push_back(st);
  }

  const json& cfg = j.at("config");
  if (ck.kind == "lsam") {
    ck.lsam_config.embed_dim = cfg.at("embed_dim").get<std::int64_t>();
    ck.lsam_config.attn_layers = cfg.at("attn_layers").get<std::int32_t>();
    ck.lsam_config.attn_heads = cfg.at("attn_heads").get<std::int32_t>();
    ck.lsam_config.hidden_dim = cfg.at("hidden_dim").get<std::int64_t>();
    ck.lsam_config.concrete_temperature = cfg.at("concrete_temperature").get<double>();
    ck.lsam_config.out_dim = cfg.at("out_dim").get<std::int32_t>();
  } else if (ck.kind == "ensemble") {
    ck.ensemble_config.embed_dim = cfg.at("embed_dim").get<std::int64_t>();
    ck.ensemble_config.hidden_dim = cfg.at("hidden_dim").get<std::int64_t>();
    ck.ensemble_config.out_dim = cfg.at("out_dim").get<std::int32_t>();
    for (const auto& s : cfg.at("subsets")) {
      ck.subsets.push_back(SubsetSpec(s.get<std::vector<std::int32_t>>()));
    }
    ck.trained = cfg.at("trained").get<std::vector<std::uint8_t>>();
  } else {
    throw DataError("checkpoint: unknown model kind '" + ck.kind + "'");
  }

  for (const auto& p : j.at("params")) {
    const auto dims = p.at("shape").get<std::vector<std::int64_t>>();
    if (dims.empty() || dims.size() > 3) throw DataError("checkpoint: bad parameter shape");
    Shape shape;
    shape.rank = static_cast<int>(dims.size());
    for (std::size_t i = 0; i < dims.size(); ++i) shape.d[i] = dims[i];
    const auto idx = ck.params.add(p.at("name").get<std::string>(), shape,
                                   p.at("decay").get<bool>());
    auto data = p.at("data").get<std::vector<double>>();
    if (data.size() != ck.params.entries[idx].value.size()) {
      throw DataError("checkpoint: parameter '" + ck.params.entries[idx].name +
                      "' has wrong length");
    }
    ck.params.entries[idx].value = std::move(data);
  }
  return ck;
}

}  // namespace lsam
