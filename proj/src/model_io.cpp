#include "corex/model_io.hpp"

#include <unistd.h>

#include <fstream>
#include <sstream>

#include "corex/common.hpp"
#include "json.hpp"

namespace corex {
namespace {

using nlohmann::json;

const char* kind_name(ColumnKind kind) { return kind == ColumnKind::discrete ? "discrete" : "continuous"; }

json schema_json(const std::vector<ColumnSchema>& schema) {
  json cols = json::array();
  for (const ColumnSchema& c : schema) {
    cols.push_back({{"name", c.name},
                    {"kind", kind_name(c.kind)},
                    {"cardinality", c.cardinality},
                    {"missing_allowed", c.missing_allowed}});
  }
  return cols;
}

std::vector<ColumnSchema> schema_from(const json& cols) {
  std::vector<ColumnSchema> schema;
  for (const json& c : cols) {
    const std::string kind = c.at("kind").get<std::string>();
    if (kind == "discrete") {
      schema.push_back(ColumnSchema::discrete(c.at("name"), c.at("cardinality"), c.at("missing_allowed")));
    } else if (kind == "continuous") {
      schema.push_back(ColumnSchema::continuous(c.at("name"), c.at("missing_allowed")));
    } else {
      throw IngestionError("model file: unknown column kind '" + kind + "'");
    }
  }
  return schema;
}

json layer_config_json(const LayerConfig& c) {
  json j = {{"m", c.m},
            {"cardinality", c.cardinality},
            {"max_iter", c.max_iter},
            {"tol", c.tol},
            {"alpha_policy", to_string(c.alpha_policy)},
            {"restarts", c.restarts},
            {"seed", c.seed},
            {"smoothing", c.smoothing},
            {"alpha_window", c.alpha_window},
            {"alpha_warmup", c.alpha_warmup}};
  if (c.fixed_alpha) {
    j["fixed_alpha"] = {{"variables", c.fixed_alpha->variables()},
                        {"factors", c.fixed_alpha->factors()},
                        {"values", c.fixed_alpha->values()}};
  }
  return j;
}

LayerConfig layer_config_from(const json& j) {
  LayerConfig c;
  c.m = j.at("m");
  c.cardinality = j.at("cardinality");
  c.max_iter = j.at("max_iter");
  c.tol = j.at("tol");
  c.alpha_policy = parse_alpha_policy(j.at("alpha_policy"));
  c.restarts = j.at("restarts");
  c.seed = j.at("seed");
  c.smoothing = j.at("smoothing");
  c.alpha_window = j.at("alpha_window");
  c.alpha_warmup = j.at("alpha_warmup");
  if (j.contains("fixed_alpha")) {
    const json& a = j["fixed_alpha"];
    c.fixed_alpha = AlphaMatrix(a.at("variables"), a.at("factors"), a.at("values").get<std::vector<double>>());
  }
  return c;
}

json marginal_json(const ColumnMarginal& m) {
  if (const auto* d = std::get_if<DiscreteMarginal>(&m)) {
    return {{"type", "discrete"}, {"levels", d->levels}, {"states", d->states}, {"table", d->table}, {"counts", d->counts}};
  }
  const auto& g = std::get<GaussianMarginal>(m);
  return {{"type", "gaussian"},
          {"mu", g.mu},
          {"sigma", g.sigma},
          {"pooled_mu", g.pooled_mu},
          {"pooled_sigma", g.pooled_sigma}};
}

ColumnMarginal marginal_from(const json& j) {
  const std::string type = j.at("type");
  if (type == "discrete") {
    DiscreteMarginal d;
    d.levels = j.at("levels");
    d.states = j.at("states");
    d.table = j.at("table").get<std::vector<double>>();
    d.counts = j.at("counts").get<std::vector<double>>();
    if (d.table.size() != d.levels * d.states || d.counts.size() != d.levels) {
      throw IngestionError("model file: discrete marginal has the wrong size");
    }
    return d;
  }
  if (type == "gaussian") {
    GaussianMarginal g;
    g.mu = j.at("mu").get<std::vector<double>>();
    g.sigma = j.at("sigma").get<std::vector<double>>();
    g.pooled_mu = j.at("pooled_mu");
    g.pooled_sigma = j.at("pooled_sigma");
    if (g.mu.size() != g.sigma.size()) throw IngestionError("model file: gaussian marginal has the wrong size");
    return g;
  }
  throw IngestionError("model file: unknown marginal type '" + type + "'");
}

template <typename Tag>
json table_json(const VariableFactorTable<Tag>& t) {
  return {{"variables", t.variables()}, {"factors", t.factors()}, {"values", t.values()}};
}

template <typename Table>
Table table_from(const json& j) {
  return Table(j.at("variables"), j.at("factors"), j.at("values").get<std::vector<double>>());
}

StopReason stop_reason_from(const std::string& s) {
  if (s == "converged") return StopReason::converged;
  if (s == "max_iter") return StopReason::max_iter;
  if (s == "alpha_window") return StopReason::alpha_window;
  throw IngestionError("model file: unknown stop reason '" + s + "'");
}

json layer_json(const LayerModel& layer) {
  json priors = json::array();
  for (const FactorPrior& p : layer.marginals.priors) priors.push_back(p.probs);
  json columns = json::array();
  for (const auto& per_factor : layer.marginals.columns) {
    json f = json::array();
    for (const ColumnMarginal& m : per_factor) f.push_back(marginal_json(m));
    columns.push_back(std::move(f));
  }
  json trace = json::array();
  for (const TraceEntry& t : layer.trace) trace.push_back({{"total", t.total}, {"per_factor", t.per_factor}});
  return {{"input_schema", schema_json(layer.input_schema)},
          {"cardinality", layer.cardinality},
          {"alpha_policy", to_string(layer.alpha_policy)},
          {"alpha", table_json(layer.alpha)},
          {"priors", priors},
          {"marginals", columns},
          {"factor_contribution", layer.factor_contribution},
          {"mi", table_json(layer.mi)},
          {"trace", trace},
          {"stop_reason", to_string(layer.stop_reason)},
          {"restart_index", layer.restart_index},
          {"restart_objectives", layer.restart_objectives}};
}

LayerModel layer_from(const json& j) {
  LayerModel layer;
  layer.input_schema = schema_from(j.at("input_schema"));
  layer.cardinality = j.at("cardinality");
  layer.alpha_policy = parse_alpha_policy(j.at("alpha_policy"));
  layer.alpha = table_from<AlphaMatrix>(j.at("alpha"));
  for (const json& p : j.at("priors")) layer.marginals.priors.push_back(FactorPrior{p.get<std::vector<double>>()});
  for (const json& f : j.at("marginals")) {
    std::vector<ColumnMarginal> per_factor;
    for (const json& m : f) per_factor.push_back(marginal_from(m));
    layer.marginals.columns.push_back(std::move(per_factor));
  }
  layer.factor_contribution = j.at("factor_contribution").get<std::vector<double>>();
  layer.mi = table_from<MiTable>(j.at("mi"));
  for (const json& t : j.at("trace")) {
    layer.trace.push_back(TraceEntry{t.at("total"), t.at("per_factor").get<std::vector<double>>()});
  }
  layer.stop_reason = stop_reason_from(j.at("stop_reason"));
  layer.restart_index = j.at("restart_index");
  layer.restart_objectives = j.at("restart_objectives").get<std::vector<double>>();

  const std::size_t n = layer.input_schema.size();
  const std::size_t m = layer.factor_contribution.size();
  if (layer.alpha.variables() != n || layer.alpha.factors() != m || layer.marginals.priors.size() != m ||
      layer.marginals.columns.size() != m) {
    throw IngestionError("model file: layer shapes are inconsistent");
  }
  for (const auto& per_factor : layer.marginals.columns) {
    if (per_factor.size() != n) throw IngestionError("model file: layer shapes are inconsistent");
  }
  return layer;
}

}  // namespace

std::string model_to_json(const ModelFile& file) {
  json layers = json::array();
  for (const LayerModel& layer : file.model.layers) layers.push_back(layer_json(layer));
  json configs = json::array();
  for (const LayerConfig& c : file.config.layers) configs.push_back(layer_config_json(c));
  json doc = {{"format_version", file.format_version},
              {"config", {{"layers", configs}, {"stop_threshold", file.config.stop_threshold}}},
              {"layers", layers},
              {"layer_contributions", file.model.layer_contributions},
              {"lower_bound", file.model.lower_bound}};
  doc["upper_bound"] = file.model.upper_bound ? json(*file.model.upper_bound) : json(nullptr);
  if (!file.config.layers.empty()) doc["seed"] = file.config.layers.front().seed;
  return doc.dump(1);
}

ModelFile model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IngestionError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    ModelFile file;
    file.format_version = doc.at("format_version");
    if (file.format_version != kModelFormatVersion) {
      throw IngestionError("unsupported model format version " + std::to_string(file.format_version));
    }
    for (const json& c : doc.at("config").at("layers")) file.config.layers.push_back(layer_config_from(c));
    file.config.stop_threshold = doc.at("config").at("stop_threshold");
    for (const json& l : doc.at("layers")) file.model.layers.push_back(layer_from(l));
    file.model.layer_contributions = doc.at("layer_contributions").get<std::vector<double>>();
    file.model.lower_bound = doc.at("lower_bound");
    if (!doc.at("upper_bound").is_null()) file.model.upper_bound = doc["upper_bound"].get<double>();
    if (file.model.layers.empty() || file.model.layer_contributions.size() != file.model.layers.size()) {
      throw IngestionError("model file: layer count mismatch");
    }
    return file;
  } catch (const json::exception& e) {
    throw IngestionError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
  write_file_atomic(path, model_to_json(file));
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open model file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

std::string truth_to_json(const GroundTruth& truth) {
  json doc = {{"latent_names", truth.latent_names},
              {"latent_values", truth.latent_values},
              {"parents", truth.parents},
              {"cluster", truth.cluster}};
  return doc.dump(1);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw std::runtime_error("failed writing " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace corex
