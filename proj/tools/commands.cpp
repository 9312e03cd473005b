#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "corex/common.hpp"
#include "corex/dataset.hpp"
#include "corex/graph_export.hpp"
#include "corex/hierarchy.hpp"
#include "corex/model_io.hpp"

namespace corex::cli {
namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::vector<std::size_t> parse_size_list(const std::string& text, const char* flag) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != item.size() || item.front() == '-') {
      throw ArgumentError(std::string(flag) + " expects a comma-separated list of positive integers");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw ArgumentError(std::string(flag) + " must not be empty");
  return out;
}

/// "out/model.json" -> "out/model"
fs::path stem_of(const fs::path& p) { return p.parent_path() / p.stem(); }

fs::path with_suffix(const fs::path& stem, const std::string& suffix) {
  fs::path out = stem;
  out += suffix;
  return out;
}

struct FitArgs {
  std::string data;
  std::string layers = "1";
  std::string cardinality = "2";
  std::string alpha = "tree";
  std::size_t restarts = 1;
  std::uint64_t seed = 0;
  std::size_t max_iter = 100;
  double tol = 1e-6;
  double stop_threshold = kDefaultStopThreshold;
  bool upper = false;
  std::string missing_token = "NA";
  std::string schema;
  std::string output;
};

struct TransformArgs {
  std::string model;
  std::string data;
  std::string output;
  bool soft = false;
  std::string missing_token = "NA";
};

struct GraphArgs {
  std::string model;
  std::string output;
  double edge_threshold = 0.0;
  std::string metadata;
};

struct GenerateArgs {
  std::string kind;
  std::size_t blocks = 4;
  std::size_t size = 100;
  double noise = 0.1;
  bool overlap = false;
  std::size_t depth = 1;
  std::size_t branching = 1;
  std::size_t leaves = 5;
  double flip = 0.0;
  std::size_t samples = 100;
  std::uint64_t seed = 0;
  bool shuffle = false;
  std::string output;
};

std::string trace_csv(const LayerModel& layer) {
  std::ostringstream out;
  out << "iteration,total";
  for (std::size_t j = 0; j < layer.factors(); ++j) out << ",factor" << j;
  out << '\n';
  for (std::size_t t = 0; t < layer.trace.size(); ++t) {
    out << t + 1 << ',' << fmt(layer.trace[t].total);
    for (double v : layer.trace[t].per_factor) out << ',' << fmt(v);
    out << '\n';
  }
  return out.str();
}

DataMatrix load_with_model_schema(const ModelFile& file, const std::string& path, const std::string& token) {
  CsvOptions options;
  options.missing_token = token;
  options.schema = file.model.layers.front().input_schema;
  return load_csv(path, options);
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
  CsvOptions options;
  options.missing_token = a.missing_token;
  if (!a.schema.empty()) options.schema = load_schema_json(a.schema);

  const std::vector<std::size_t> sizes = parse_size_list(a.layers, "--layers");
  std::vector<std::size_t> cards = parse_size_list(a.cardinality, "--cardinality");
  if (cards.size() == 1) cards.assign(sizes.size(), cards.front());
  if (cards.size() != sizes.size()) throw ArgumentError("--cardinality needs one value or one per layer");

  LayerConfig base;
  base.alpha_policy = parse_alpha_policy(a.alpha);
  if (base.alpha_policy == AlphaPolicy::fixed) throw ArgumentError("--alpha must be tree or unique");
  base.restarts = a.restarts;
  base.seed = a.seed;
  base.max_iter = a.max_iter;
  base.tol = a.tol;
  HierarchyConfig config = HierarchyConfig::uniform(sizes, base);
  for (std::size_t k = 0; k < sizes.size(); ++k) config.layers[k].cardinality = cards[k];
  config.stop_threshold = a.stop_threshold;

  const DataMatrix data = load_csv(a.data, options);
  if (a.upper) {
    if (!data.all_discrete()) throw UnsupportedConfiguration("--upper-bound requires all columns to be discrete");
    if (sizes.back() != 1) throw UnsupportedConfiguration("--upper-bound requires the last layer to have one factor");
  }
  for (std::size_t k = 0; k < config.layers.size(); ++k) {
    config.layers[k].validate(k == 0 ? data.cols() : config.layers[k - 1].m);
  }

  ModelFile file;
  file.config = config;
  file.model = fit_hierarchy(data, config);
  if (a.upper) {
    if (file.model.layers.back().factors() != 1) {
      throw UnsupportedConfiguration("fitting stopped before the single-factor top layer; no upper bound");
    }
    file.model.upper_bound = upper_bound(file.model, data);
  }

  const fs::path output(a.output);
  save_model(output, file);
  for (std::size_t k = 0; k < file.model.layers.size(); ++k) {
    write_file_atomic(with_suffix(stem_of(output), ".layer" + std::to_string(k + 1) + ".trace.csv"),
                      trace_csv(file.model.layers[k]));
  }

  out << "samples " << data.rows() << ", columns " << data.cols() << ", layers fitted "
      << file.model.layers.size() << " of " << sizes.size() << '\n';
  for (std::size_t k = 0; k < file.model.layers.size(); ++k) {
    const LayerModel& layer = file.model.layers[k];
    out << "layer " << k + 1 << ": contribution " << fmt(file.model.layer_contributions[k]) << " nats, "
        << layer.trace.size() << " iterations (" << to_string(layer.stop_reason) << ")\n";
    for (std::size_t j : layer.factor_order()) {
      out << "  " << factor_node_id(k + 1, j) << ' ' << fmt(layer.factor_contribution[j]) << '\n';
    }
  }
  out << "lower_bound " << fmt(file.model.lower_bound) << '\n';
  if (file.model.upper_bound) out << "upper_bound " << fmt(*file.model.upper_bound) << '\n';
  return kOk;
}

int cmd_transform(const TransformArgs& a, std::ostream& out) {
  const ModelFile file = load_model(a.model);
  const DataMatrix data = load_with_model_schema(file, a.data, a.missing_token);
  const std::vector<LabelUpdate> passes = transform_hierarchy(file.model, data);

  std::ostringstream csv;
  csv << "index";
  for (std::size_t k = 0; k < passes.size(); ++k) {
    for (std::size_t j = 0; j < passes[k].labels.size(); ++j) {
      csv << ',' << factor_node_id(k + 1, j);
      if (a.soft) {
        for (std::size_t y = 0; y < passes[k].labels[j].states; ++y) {
          csv << ',' << factor_node_id(k + 1, j) << "_p" << y;
        }
      }
    }
  }
  csv << '\n';
  for (std::size_t l = 0; l < data.rows(); ++l) {
    csv << l;
    for (const LabelUpdate& pass : passes) {
      for (const FactorLabels& lab : pass.labels) {
        csv << ',' << argmax(lab.row(l));
        if (a.soft) {
          for (double p : lab.row(l)) csv << ',' << fmt(p);
        }
      }
    }
    csv << '\n';
  }
  if (a.output.empty()) {
    out << csv.str();
  } else {
    write_file_atomic(a.output, csv.str());
  }
  return kOk;
}

int cmd_score(const TransformArgs& a, std::ostream& out) {
  const ModelFile file = load_model(a.model);
  const DataMatrix data = load_with_model_schema(file, a.data, a.missing_token);
  const LabelUpdate pass = transform(file.model.layers.front(), data);

  std::ostringstream csv;
  csv << "index,pointwise_tc";
  for (std::size_t j = 0; j < pass.log_z.size(); ++j) csv << ",log_z" << j;
  csv << '\n';
  for (std::size_t l = 0; l < data.rows(); ++l) {
    double total = 0.0;
    for (const auto& lz : pass.log_z) total += lz[l];
    csv << l << ',' << fmt(total);
    for (const auto& lz : pass.log_z) csv << ',' << fmt(lz[l]);
    csv << '\n';
  }
  if (a.output.empty()) {
    out << csv.str();
  } else {
    write_file_atomic(a.output, csv.str());
  }
  return kOk;
}

int cmd_export_graph(const GraphArgs& a, std::ostream& out) {
  const ModelFile file = load_model(a.model);
  NodeMetadata metadata;
  if (!a.metadata.empty()) metadata = load_node_metadata(a.metadata);
  const Graph graph = build_graph(file.model, a.edge_threshold, metadata);

  fs::path stem(a.output);
  if (stem.extension() == ".dot" || stem.extension() == ".json") stem = stem_of(stem);
  write_file_atomic(with_suffix(stem, ".dot"), graph_to_dot(graph));
  write_file_atomic(with_suffix(stem, ".json"), graph_to_json(graph));
  out << "nodes " << graph.nodes.size() << ", edges " << graph.edges.size() << '\n';
  return kOk;
}

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  SyntheticSpec spec;
  spec.seed = a.seed;
  spec.samples = a.samples;
  spec.shuffle_columns = a.shuffle;
  if (a.kind == "block") {
    BlockGaussianSpec g;
    g.num_blocks = a.blocks;
    g.block_size = a.size;
    g.noise_sd = a.noise;
    g.dependency = a.overlap ? BlockDependency::summed_overlap : BlockDependency::independent;
    spec.generator = g;
  } else {
    LatentTreeSpec g;
    g.depth = a.depth;
    g.branching = a.branching;
    g.leaf_count = a.leaves;
    g.flip_prob = a.flip;
    spec.generator = g;
  }
  const SyntheticData synth = generate(spec);
  const fs::path output(a.output);
  write_file_atomic(output, to_csv(synth.data));
  write_file_atomic(with_suffix(stem_of(output), ".truth.json"), truth_to_json(synth.truth));
  out << "wrote " << synth.data.rows() << " samples x " << synth.data.cols() << " columns to " << output.string()
      << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical total correlation explanation"};
  app.require_subcommand(1);

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a hierarchy and write the model");
  fit_cmd->add_option("data", fit.data, "CSV data file")->required();
  fit_cmd->add_option("--layers", fit.layers, "Factors per layer, e.g. 4,1");
  fit_cmd->add_option("--cardinality", fit.cardinality, "States per factor, one value or one per layer");
  fit_cmd->add_option("--alpha", fit.alpha, "Structure policy")->check(CLI::IsMember({"tree", "unique"}));
  fit_cmd->add_option("--restarts", fit.restarts, "Random restarts per layer");
  fit_cmd->add_option("--seed", fit.seed, "Base seed; layer k uses seed + k");
  fit_cmd->add_option("--max-iter", fit.max_iter, "Iteration cap per restart");
  fit_cmd->add_option("--tol", fit.tol, "Objective change tolerance in nats");
  fit_cmd->add_option("--stop-threshold", fit.stop_threshold, "Stop adding layers below this contribution");
  fit_cmd->add_flag("--upper-bound", fit.upper, "Also compute the upper bound (discrete data, top layer of 1)");
  fit_cmd->add_option("--missing-token", fit.missing_token, "Cell text that marks a missing value");
  fit_cmd->add_option("--schema", fit.schema, "JSON schema sidecar");
  fit_cmd->add_option("-o,--output", fit.output, "Model JSON path")->required();

  TransformArgs transform_args;
  CLI::App* transform_cmd = app.add_subcommand("transform", "Label new data with a fitted model");
  transform_cmd->add_option("model", transform_args.model)->required();
  transform_cmd->add_option("data", transform_args.data)->required();
  transform_cmd->add_option("-o,--output", transform_args.output, "CSV path; standard output if omitted");
  transform_cmd->add_flag("--soft", transform_args.soft, "Also write label probabilities");
  transform_cmd->add_option("--missing-token", transform_args.missing_token);

  TransformArgs score_args;
  CLI::App* score_cmd = app.add_subcommand("score", "Point-wise total correlation per sample");
  score_cmd->add_option("model", score_args.model)->required();
  score_cmd->add_option("data", score_args.data)->required();
  score_cmd->add_option("-o,--output", score_args.output, "CSV path; standard output if omitted");
  score_cmd->add_option("--missing-token", score_args.missing_token);

  GraphArgs graph;
  CLI::App* graph_cmd = app.add_subcommand("export-graph", "Write the model structure as DOT and JSON");
  graph_cmd->add_option("model", graph.model)->required();
  graph_cmd->add_option("-o,--output", graph.output, "Output stem; .dot and .json are appended")->required();
  graph_cmd->add_option("--edge-threshold", graph.edge_threshold, "Drop edges lighter than this");
  graph_cmd->add_option("--metadata", graph.metadata, "JSON object of per-node key/value metadata");

  GenerateArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("generate", "Write a synthetic data set and its ground truth");
  gen_cmd->add_option("kind", gen.kind, "block or tree")->required()->check(CLI::IsMember({"block", "tree"}));
  gen_cmd->add_option("--blocks", gen.blocks);
  gen_cmd->add_option("--size", gen.size, "Columns per block");
  gen_cmd->add_option("--noise", gen.noise, "Gaussian noise standard deviation");
  gen_cmd->add_flag("--overlap", gen.overlap, "Drive the last block by the sum of the first two drivers");
  gen_cmd->add_option("--depth", gen.depth);
  gen_cmd->add_option("--branching", gen.branching);
  gen_cmd->add_option("--leaves", gen.leaves, "Leaves per bottom latent");
  gen_cmd->add_option("--flip", gen.flip, "Per-edge flip probability");
  gen_cmd->add_option("--samples", gen.samples);
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_flag("--shuffle", gen.shuffle, "Shuffle column order");
  gen_cmd->add_option("-o,--output", gen.output, "CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit, out);
    if (transform_cmd->parsed()) return cmd_transform(transform_args, out);
    if (score_cmd->parsed()) return cmd_score(score_args, out);
    if (graph_cmd->parsed()) return cmd_export_graph(graph, out);
    if (gen_cmd->parsed()) return cmd_generate(gen, out);
  } catch (const UnsupportedConfiguration& e) {
    err << "error: " << e.what() << '\n';
    return kUnsupported;
  } catch (const IngestionError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace corex::cli
