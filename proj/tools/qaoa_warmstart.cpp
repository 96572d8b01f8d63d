#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "warmstart/warmstart.hpp"

using namespace warmstart;
namespace fs = std::filesystem;

namespace {

std::string config_scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw InvalidArgument("config values must be scalars or arrays of scalars");
}

// Expands "--config file.json" into "--key value" flags placed directly after
// the subcommand name. Options keep their last occurrence, so explicit flags
// override the file. Keys are long option names, underscores allowed.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty() || args.empty()) return args;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path + ": " + e.what(), 1);
  }
  if (!j.is_object()) throw SchemaError(path + ": config must be a JSON object", 1);
  std::vector<std::string> injected;
  for (const auto& [key, value] : j.items()) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    if (value.is_array()) {
      for (const auto& v : value) {
        injected.push_back("--" + name);
        injected.push_back(config_scalar(v));
      }
    } else {
      injected.push_back("--" + name);
      injected.push_back(config_scalar(value));
    }
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

void log(const std::string& message) { std::fprintf(stderr, "%s\n", message.c_str()); }

std::vector<Graph> read_graph_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError(dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<Graph> graphs;
  for (const auto& f : files) {
    auto g = read_graph_file(f.string());
    g.id = f.stem().string();
    graphs.push_back(std::move(g));
  }
  if (graphs.empty()) throw IoError("no .txt graphs in " + dir);
  return graphs;
}

// Graph directory or dataset JSONL.
std::vector<Graph> read_graphs(const std::string& path) {
  if (fs::is_directory(path)) return read_graph_dir(path);
  std::vector<Graph> graphs;
  for (auto& r : read_records(path)) graphs.push_back(std::move(r.graph));
  return graphs;
}

void ensure_parent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

struct Common {
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

CLI::App* subcommand(CLI::App& app, const std::string& name, const std::string& help, Common& common,
                     bool threaded = false) {
  auto* sub = app.add_subcommand(name, help);
  // Consumed by expand_config before parsing; registered for --help.
  sub->add_option("--config", "JSON file of option values; command-line flags take precedence");
  sub->add_option("--seed", common.seed, "Base seed")->capture_default_str();
  if (threaded) sub->add_option("--threads", common.threads, "Worker threads, 0 for hardware concurrency");
  return sub;
}

const std::vector<std::string> kLayerNames{"gcn", "sage", "gat", "gin"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QAOA max-cut warm starts from graph neural networks", "qaoa-warmstart"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  Common common;

  CorpusConfig corpus;
  std::string graphs_out = "graphs";
  auto* gen = subcommand(app, "gen-graphs", "Generate a random regular graph corpus", common, true);
  gen->add_option("--count", corpus.count, "Number of graphs")->capture_default_str();
  gen->add_option("--n-min", corpus.n_min, "Smallest vertex count")->capture_default_str();
  gen->add_option("--n-max", corpus.n_max, "Largest vertex count")->capture_default_str();
  gen->add_option("--out", graphs_out, "Output directory, one text file per graph")->capture_default_str();

  std::string build_graphs = "graphs", build_out = "dataset.jsonl", fixed_table;
  BuildOptions build;
  auto* build_cmd = subcommand(app, "build-dataset", "Optimize QAOA angles for every graph", common, true);
  build_cmd->add_option("--graphs", build_graphs, "Graph directory")->capture_default_str();
  build_cmd->add_option("--budget", build.budget, "Optimizer iterations per graph")->capture_default_str();
  build_cmd->add_option("--p", build.p, "Circuit depth")->capture_default_str();
  build_cmd->add_option("--fixed-angles", fixed_table, "Fixed-angle table; matching graphs skip optimization");
  build_cmd->add_option("--out", build_out, "Output JSONL")->capture_default_str();

  std::string prune_in = "dataset.jsonl", prune_out = "pruned.jsonl";
  double threshold = kDefaultPruneThreshold, rate = kDefaultSelectiveRate;
  auto* prune_cmd = subcommand(app, "prune", "Selective data pruning", common);
  prune_cmd->add_option("--in", prune_in, "Input JSONL")->capture_default_str();
  prune_cmd->add_option("--threshold", threshold, "Approximation ratio threshold")->capture_default_str();
  prune_cmd->add_option("--rate", rate, "Fraction of below-threshold records kept")->capture_default_str();
  prune_cmd->add_option("--out", prune_out, "Output JSONL")->capture_default_str();

  std::string split_in = "pruned.jsonl", split_dir = "split";
  SplitFractions fractions;
  std::size_t test_count = kDefaultTestCount;
  auto* split_cmd = subcommand(app, "split", "Seeded train/val/test split", common);
  split_cmd->add_option("--in", split_in, "Input JSONL")->capture_default_str();
  split_cmd->add_option("--train", fractions.train, "Train fraction")->capture_default_str();
  split_cmd->add_option("--val", fractions.val, "Validation fraction")->capture_default_str();
  split_cmd->add_option("--test", fractions.test, "Test fraction, used when --test-count is 0")->capture_default_str();
  split_cmd->add_option("--test-count", test_count, "Exact test size, 0 to use --test")->capture_default_str();
  split_cmd->add_option("--out-dir", split_dir, "Writes train.jsonl, val.jsonl and test.jsonl")->capture_default_str();

  std::string train_in = "split/train.jsonl", val_in, model_name = "gin", model_out = "model.json";
  ModelConfig model_config;
  TrainConfig train_config;
  std::string attention = "mean_weighted";
  auto* train_cmd = subcommand(app, "train", "Train a parameter-prediction model", common);
  train_cmd->add_option("--dataset", train_in, "Training JSONL")->capture_default_str();
  train_cmd->add_option("--val", val_in, "Validation JSONL for best-epoch selection");
  train_cmd->add_option("--model", model_name, "Layer type")->check(CLI::IsMember(kLayerNames))->capture_default_str();
  train_cmd->add_option("--epochs", train_config.epochs, "Epochs")->capture_default_str();
  train_cmd->add_option("--lr", train_config.adam.learning_rate, "Initial learning rate")->capture_default_str();
  train_cmd->add_option("--batch-size", train_config.batch_size, "Graphs per step, 0 for full batch")
      ->capture_default_str();
  train_cmd->add_option("--hidden-dim", model_config.hidden_dim, "Hidden width")->capture_default_str();
  train_cmd->add_option("--layers", model_config.num_layers, "Message-passing layers")->capture_default_str();
  train_cmd->add_option("--dropout", model_config.dropout, "Dropout rate")->capture_default_str();
  train_cmd->add_option("--attention", attention, "GAT variant")
      ->check(CLI::IsMember({"mean_weighted", "standard"}))
      ->capture_default_str();
  train_cmd->add_option("--out", model_out, "Checkpoint path")->capture_default_str();

  std::vector<std::string> model_paths;
  std::string eval_test = "split/test.jsonl", eval_out = "report.json";
  EvalOptions eval_options;
  auto* eval_cmd = subcommand(app, "eval", "Compare warm starts against seeded random initialization", common, true);
  eval_cmd->add_option("--models", model_paths, "Checkpoints, optionally name=path");
  eval_cmd->add_option("--test", eval_test, "Test JSONL or graph directory")->capture_default_str();
  eval_cmd->add_option("--budget", eval_options.budget, "Optimizer iterations per run")->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "Report JSON")->capture_default_str();

  std::string report_in = "report.json", report_dir = "report";
  auto* report_cmd = subcommand(app, "report", "Write CSV tables and SVG plots from a report", common);
  report_cmd->add_option("--in", report_in, "Report JSON")->capture_default_str();
  report_cmd->add_option("--out-dir", report_dir, "Output directory")->capture_default_str();

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const std::exception& e) {
    log(std::string("config error: ") + e.what());
    return 2;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) {
      corpus.seed = common.seed;
      corpus.threads = common.threads;
      const auto graphs = generate_corpus(corpus);
      fs::create_directories(graphs_out);
      for (const auto& g : graphs) write_graph_file(g, (fs::path(graphs_out) / (g.id + ".txt")).string());
      log("wrote " + std::to_string(graphs.size()) + " graphs to " + graphs_out);
    } else if (*build_cmd) {
      const auto graphs = read_graph_dir(build_graphs);
      std::optional<FixedAngleTable> table;
      if (!fixed_table.empty()) table = load_fixed_angle_table(fixed_table);
      std::vector<DatasetRecord> records(graphs.size());
      parallel_for(
          graphs.size(),
          [&](std::size_t i) {
            if (table) {
              const auto deg = degrees(graphs[i]);
              const bool regular =
                  !deg.empty() && std::all_of(deg.begin(), deg.end(), [&](int x) { return x == deg[0]; });
              if (regular)
                if (const auto params = fixed_angle_lookup(*table, deg[0], build.p)) {
                  records[i] = build_fixed_angle_record(graphs[i], *params);
                  return;
                }
            }
            records[i] = build_record(graphs[i], derive_seed(common.seed, i), build);
          },
          common.threads);
      ensure_parent(build_out);
      write_records(records, build_out);
      double mean_ar = 0.0;
      for (const auto& r : records) mean_ar += r.ar / static_cast<double>(records.size());
      log("wrote " + std::to_string(records.size()) + " records to " + build_out + ", mean AR " +
          format_decimal(mean_ar));
    } else if (*prune_cmd) {
      const auto records = read_records(prune_in);
      const auto kept = prune(records, threshold, rate, common.seed);
      ensure_parent(prune_out);
      write_records(kept, prune_out);
      log("kept " + std::to_string(kept.size()) + " of " + std::to_string(records.size()) + " records");
    } else if (*split_cmd) {
      const auto records = read_records(split_in);
      const auto parts = split(records, fractions, common.seed,
                               test_count > 0 ? std::optional<std::size_t>(test_count) : std::nullopt);
      fs::create_directories(split_dir);
      write_records(parts.train, (fs::path(split_dir) / "train.jsonl").string());
      write_records(parts.val, (fs::path(split_dir) / "val.jsonl").string());
      write_records(parts.test, (fs::path(split_dir) / "test.jsonl").string());
      log("split " + std::to_string(parts.train.size()) + " / " + std::to_string(parts.val.size()) + " / " +
          std::to_string(parts.test.size()));
    } else if (*train_cmd) {
      const auto train_set = read_records(train_in);
      const auto val_set = val_in.empty() ? std::vector<DatasetRecord>{} : read_records(val_in);
      if (train_set.empty()) throw InvalidArgument("training set is empty");
      model_config.layer_type = *parse_layer_type(model_name);
      model_config.attention = *parse_attention_variant(attention);
      model_config.p = train_set.front().depth();
      train_config.seed = common.seed;
      const auto result = train(model_config, train_set, val_set, train_config);
      for (const auto& h : result.history)
        log("epoch " + std::to_string(h.epoch) + " train " + format_decimal(h.train_loss) +
            (h.val_loss ? " val " + format_decimal(*h.val_loss) : std::string()) + " lr " + format_decimal(h.lr));
      ensure_parent(model_out);
      save_model(result.model, model_out);
      log("saved epoch " + std::to_string(result.best_epoch) + " weights to " + model_out);
    } else if (*eval_cmd) {
      const auto graphs = read_graphs(eval_test);
      std::vector<InitMethod> methods;
      std::vector<std::pair<std::string, GnnModel>> models;
      for (const auto& entry : model_paths) {
        const auto eq = entry.find('=');
        auto model = load_model(eq == std::string::npos ? entry : entry.substr(eq + 1));
        auto name = eq == std::string::npos ? std::string(to_string(model.config().layer_type)) : entry.substr(0, eq);
        if (name == kRandomMethod) throw InvalidArgument("method name 'random' is reserved for the baseline");
        models.emplace_back(std::move(name), std::move(model));
      }
      std::size_t p = 1;
      if (!models.empty()) {
        p = models.front().second.config().p;
        for (const auto& [name, m] : models)
          if (m.config().p != p) throw InvalidArgument("model " + name + " predicts a different depth");
      }
      methods.push_back(random_init_method(p, common.seed));
      for (auto& [name, m] : models) methods.push_back(model_init_method(name, std::move(m)));
      eval_options.seed = common.seed;
      eval_options.threads = common.threads;
      const auto report = evaluate(methods, graphs, eval_options);
      ensure_parent(eval_out);
      save_report(report, eval_out);
      for (const auto& s : report.summaries)
        log(s.method + ": improvement " + format_decimal(s.mean_improvement_pp) + " +- " +
            format_decimal(s.std_improvement_pp) + " pp, ar_init " + format_decimal(s.mean_ar_init) + ", ar_final " +
            format_decimal(s.mean_ar_final));
    } else if (*report_cmd) {
      const auto files = write_report(load_report(report_in), report_dir);
      log("wrote " + files.per_graph_csv + ", " + files.aggregate_csv + " and " + std::to_string(files.svgs.size()) +
          " plots");
    }
  } catch (const SchemaError& e) {
    log(std::string("schema error: ") + e.what());
    return 3;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return 2;
  }
  return 0;
}
