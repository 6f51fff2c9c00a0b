// Command-line front end: train, predict, explain, benchmark.
#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "gaminet/data.hpp"
#include "gaminet/errors.hpp"
#include "gaminet/interpret.hpp"
#include "gaminet/model_io.hpp"
#include "gaminet/svg.hpp"
#include "gaminet/synth.hpp"
#include "gaminet/trainer.hpp"
#include "gaminet/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gaminet;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitDivergence = 2;

int default_threads() {
  if (const char* env = std::getenv("GAMINET_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

std::string fnv1a_file_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file for digest: " + path);
  std::uint64_t h = 1469598103934665603ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

json schema_to_json(const Schema& s) {
  return json{{"response", s.response},
              {"numerical", s.numerical},
              {"categorical", s.categorical},
              {"ignore", s.ignore}};
}

Schema schema_from_json(const json& j) {
  Schema s;
  s.response = j.at("response").get<std::string>();
  s.numerical = j.at("numerical").get<std::vector<std::string>>();
  s.categorical = j.at("categorical").get<std::vector<std::string>>();
  s.ignore = j.at("ignore").get<std::vector<std::string>>();
  s.validate();
  return s;
}

json config_to_json(const TrainConfig& c) {
  return json{{"subnet_layers", c.subnet_layers},
              {"activation", to_string(c.activation)},
              {"learning_rate", c.learning_rate},
              {"epochs_stage1", c.epochs_stage1},
              {"epochs_stage2", c.epochs_stage2},
              {"epochs_stage3", c.epochs_stage3},
              {"batch_size", c.batch_size},
              {"early_stop_patience", c.early_stop_patience},
              {"tolerance_eta", c.tolerance_eta},
              {"max_interactions", c.max_interactions},
              {"clarity_lambda", c.clarity_lambda},
              {"heredity", to_string(c.heredity)},
              {"seed", c.seed},
              {"screen_bins", c.screen_bins},
              {"threads", c.threads}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.subnet_layers = j.at("subnet_layers").get<std::vector<int>>();
  c.activation = activation_from_string(j.at("activation").get<std::string>());
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs_stage1 = j.at("epochs_stage1").get<int>();
  c.epochs_stage2 = j.at("epochs_stage2").get<int>();
  c.epochs_stage3 = j.at("epochs_stage3").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.early_stop_patience = j.at("early_stop_patience").get<int>();
  c.tolerance_eta = j.at("tolerance_eta").get<double>();
  c.max_interactions = j.at("max_interactions").get<int>();
  c.clarity_lambda = j.at("clarity_lambda").get<double>();
  c.heredity = heredity_from_string(j.at("heredity").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  c.screen_bins = j.at("screen_bins").get<int>();
  c.threads = j.at("threads").get<int>();
  c.validate();
  return c;
}

std::string prune_to_csv(const PruneResult& result, const GamiNetModel& model) {
  std::ostringstream out;
  out.precision(17);
  out << "count,effect_added,cumulative_val_loss,selected\n";
  for (std::size_t i = 0; i < result.cumulative_val_losses.size(); ++i) {
    out << i << ',';
    if (i == 0)
      out << "\"(none)\"";
    else
      out << '"' << model.effect_label(result.ordered_effect_ids[i - 1]) << '"';
    out << ',' << result.cumulative_val_losses[i] << ','
        << (static_cast<int>(i) <= result.selected_count ? 1 : 0) << '\n';
  }
  return out.str();
}

json prune_to_json(const PruneResult& result, const GamiNetModel& model) {
  json ids = json::array();
  for (const auto& id : result.ordered_effect_ids)
    ids.push_back(model.effect_label(id));
  return json{{"ordered_effects", std::move(ids)},
              {"cumulative_val_losses", result.cumulative_val_losses},
              {"selected_count", result.selected_count},
              {"threshold", result.threshold}};
}

std::string sanitize(const std::string& label) {
  std::string out;
  for (char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      out.push_back(c);
    else if (!out.empty() && out.back() != '_')
      out.push_back('_');
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "effect" : out;
}

void write_svgs(const std::vector<ShapeGrid>& grids, const ImportanceTable& importance,
                const std::string& svg_dir) {
  fs::create_directories(svg_dir);
  for (std::size_t i = 0; i < grids.size(); ++i) {
    std::ostringstream name;
    name << "shape_" << (i < 10 ? "0" : "") << i << '_' << sanitize(grids[i].label)
         << ".svg";
    write_text_file((fs::path(svg_dir) / name.str()).string(),
                    svg_shape_grid(grids[i]));
  }
  if (!grids.empty())
    write_text_file((fs::path(svg_dir) / "panel.svg").string(), svg_panel(grids));
  if (!importance.rows.empty())
    write_text_file((fs::path(svg_dir) / "importance.svg").string(),
                    svg_importance(importance));
}

struct TrainArgs {
  std::string data_path, schema_path, config_path, out_dir, manifest_path;
  std::string task = "regression";
  double val_fraction = 0.2;
  long long seed = -1;
  int threads = 0;
  double lambda = -1.0;
};

int cmd_train(const TrainArgs& args) {
  Schema schema;
  TrainConfig config;
  std::string data_path = args.data_path;
  Task task = Task::kRegression;
  double val_fraction = args.val_fraction;

  if (!args.manifest_path.empty()) {
    std::ifstream in(args.manifest_path);
    if (!in) throw ValidationError("cannot open manifest: " + args.manifest_path);
    json manifest = json::parse(in);
    if (manifest.value("format", "") != "gaminet-manifest")
      throw ValidationError("not a gaminet manifest: " + args.manifest_path);
    schema = schema_from_json(manifest.at("schema"));
    config = config_from_json(manifest.at("train_config"));
    task = task_from_string(manifest.at("task").get<std::string>());
    val_fraction = manifest.at("val_fraction").get<double>();
    data_path = manifest.at("data").at("path").get<std::string>();
    const std::string digest = manifest.at("data").at("fnv1a64").get<std::string>();
    if (fnv1a_file_hex(data_path) != digest)
      throw ValidationError("data file digest does not match the manifest");
  } else {
    if (args.data_path.empty() || args.schema_path.empty())
      throw ValidationError("train requires --data and --schema (or --from-manifest)");
    schema = Schema::from_toml(TomlTable::parse_file(args.schema_path));
    if (!args.config_path.empty()) {
      const TomlTable table = TomlTable::parse_file(args.config_path);
      static const std::set<std::string> known = {
          "subnet_layers", "activation", "learning_rate", "epochs_stage1",
          "epochs_stage2", "epochs_stage3", "batch_size", "early_stop_patience",
          "tolerance_eta", "max_interactions", "clarity_lambda", "heredity",
          "seed", "screen_bins", "threads", "val_fraction", "task"};
      for (const auto& key : table.keys())
        if (!known.count(key))
          throw ValidationError("unknown config key: " + key);
      config = TrainConfig::from_toml(table);
      val_fraction = table.get_double("val_fraction", val_fraction);
      task = task_from_string(table.get_string("task", args.task));
    } else {
      task = task_from_string(args.task);
    }
  }
  // Flags override file values.
  if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);
  if (args.threads > 0) config.threads = args.threads;
  if (args.lambda >= 0.0) config.clarity_lambda = args.lambda;
  config.validate();
  if (schema.response.empty())
    throw ValidationError("training requires a response column in the schema");

  const RawTable table = load_csv(data_path, schema);
  const Dataset data = fit_transform(table, task);
  const SplitResult parts = split_train_val(data, val_fraction, config.seed);

  FitResult result = fit(parts.train, parts.validation, config);

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);
  save_model(result.model, (out / "model.json").string());
  write_text_file((out / "trace.csv").string(), result.trace.to_csv());
  write_text_file((out / "prune_mains.csv").string(),
                  prune_to_csv(result.prune_mains, result.model));
  write_text_file((out / "prune_interactions.csv").string(),
                  prune_to_csv(result.prune_interactions, result.model));
  const ImportanceTable importance = importance_ratios(result.model, parts.train);
  write_text_file((out / "importance.csv").string(), importance.to_csv());

  json report;
  report["final_val_loss"] = result.final_val_loss;
  report["clarity_total"] = clarity_loss(result.model, parts.train.features).total;
  report["events"] = result.trace.events;
  report["prune_mains"] = prune_to_json(result.prune_mains, result.model);
  report["prune_interactions"] = prune_to_json(result.prune_interactions, result.model);
  write_text_file((out / "training_report.json").string(), report.dump(2) + "\n");

  json manifest;
  manifest["format"] = "gaminet-manifest";
  manifest["version"] = kVersion;
  manifest["data"] = json{{"path", data_path}, {"fnv1a64", fnv1a_file_hex(data_path)}};
  manifest["task"] = to_string(task);
  manifest["val_fraction"] = val_fraction;
  manifest["schema"] = schema_to_json(schema);
  manifest["train_config"] = config_to_json(config);
  manifest["artifacts"] =
      json{{"model", "model.json"},
           {"trace", "trace.csv"},
           {"prune_mains", "prune_mains.csv"},
           {"prune_interactions", "prune_interactions.csv"},
           {"importance", "importance.csv"},
           {"training_report", "training_report.json"}};
  write_text_file((out / "manifest.json").string(), manifest.dump(2) + "\n");

  std::cerr << "model written to " << (out / "model.json").string() << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_path) {
  const GamiNetModel model = load_model(model_path);
  const RawTable table = load_csv_columns(data_path, model.meta);
  const Eigen::MatrixXd features = transform_features(table, model.meta);
  const Eigen::VectorXd eta = predict_eta(model, features);
  const Eigen::VectorXd mean = invert_link(model.link, eta);

  std::ostringstream out;
  out.precision(17);
  out << "row,eta,mean_response\n";
  for (long i = 0; i < eta.size(); ++i)
    out << i << ',' << eta[i] << ',' << mean[i] << '\n';
  write_text_file(out_path, out.str());
  return 0;
}

int cmd_explain(const std::string& model_path, const std::string& data_path,
                bool global, long long row, const std::string& out_dir,
                std::string svg_dir, int grid_1d, int grid_2d) {
  const GamiNetModel model = load_model(model_path);
  const RawTable table = load_csv_columns(data_path, model.meta);

  Dataset data;
  data.task = model.task;
  data.meta = model.meta;
  data.features = transform_features(table, model.meta);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  if (svg_dir.empty()) svg_dir = (out / "svg").string();

  if (global) {
    const ImportanceTable importance = importance_ratios(model, data);
    write_text_file((out / "importance.csv").string(), importance.to_csv());
    write_text_file((out / "importance.json").string(), importance_to_json(importance));
    const std::vector<ShapeGrid> grids = global_explain(model, data, grid_1d, grid_2d);
    write_text_file((out / "shape_grids.json").string(), shape_grids_to_json(grids));
    for (std::size_t i = 0; i < grids.size(); ++i) {
      std::ostringstream name;
      name << "shape_" << (i < 10 ? "0" : "") << i << '_' << sanitize(grids[i].label)
           << ".csv";
      write_text_file((out / name.str()).string(), shape_grid_to_csv(grids[i]));
    }
    write_svgs(grids, importance, svg_dir);
  } else {
    if (row < 0 || row >= data.n())
      throw ValidationError("row index " + std::to_string(row) +
                            " out of range (data has " + std::to_string(data.n()) +
                            " rows)");
    const LocalExplanation explanation =
        local_explain(model, data.features.row(row));
    write_text_file((out / "local_explanation.json").string(),
                    local_explanation_to_json(explanation));
    fs::create_directories(svg_dir);
    write_text_file((fs::path(svg_dir) / "local_explanation.svg").string(),
                    svg_local_explanation(explanation));
  }
  return 0;
}

struct BenchArgs {
  std::string suite = "synthetic";
  int n = 10000;
  std::string dist = "uniform";
  double lambda = 1.0;
  int reps = 10;
  std::string out_dir;
  long long seed = 0;
  double noise_sd = 1.0;
  int p_total = 100;
  int epochs1 = 5000, epochs2 = 5000, epochs3 = 500;
  std::string config_path;
  int threads = 0;
  bool emit_svg = false;
};

int cmd_benchmark(const BenchArgs& args) {
  if (args.suite != "synthetic")
    throw ValidationError("unknown suite: " + args.suite + " (expected synthetic)");

  SynthConfig synth;
  synth.n = args.n;
  synth.distribution = synth_distribution_from_string(args.dist);
  synth.seed = static_cast<std::uint64_t>(args.seed);
  synth.noise_sd = args.noise_sd;
  synth.p_total = args.p_total;
  synth.validate();

  TrainConfig config;
  if (!args.config_path.empty())
    config = TrainConfig::from_toml(TomlTable::parse_file(args.config_path));
  config.clarity_lambda = args.lambda;
  config.epochs_stage1 = args.epochs1;
  config.epochs_stage2 = args.epochs2;
  config.epochs_stage3 = args.epochs3;
  config.threads = args.threads > 0 ? args.threads : default_threads();
  config.validate();

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);

  std::vector<BenchReport> reports;
  bool failed = false;
  std::string failure;
  for (int rep = 0; rep < args.reps; ++rep) {
    try {
      BenchReport report = run_repetition(synth, config, rep, args.out_dir);
      std::cerr << "rep " << (rep + 1) << "/" << args.reps << ": test rmse "
                << report.test_rmse << ", |s1|=" << report.s1.size()
                << ", |s2|=" << report.s2.size() << ", clarity "
                << report.clarity_total << " ("
                << static_cast<int>(report.wall_seconds) << "s)\n";
      if (args.emit_svg) {
        SynthConfig rep_cfg = synth;
        rep_cfg.seed = report.data_seed;
        const Dataset data = generate(rep_cfg);
        const SplitResult parts = split(data, 0.2, 0.2, report.data_seed);
        const GamiNetModel model = load_model(
            (out / ("rep_" + std::to_string(rep)) / "model.json").string());
        const ImportanceTable importance = importance_ratios(model, parts.train);
        const std::vector<ShapeGrid> grids = global_explain(model, parts.train);
        write_svgs(grids, importance,
                   (out / ("rep_" + std::to_string(rep)) / "svg").string());
      }
      reports.push_back(std::move(report));
    } catch (const std::exception& e) {
      failed = true;
      failure = e.what();
      std::cerr << "rep " << (rep + 1) << " failed: " << failure << "\n";
      break;
    }
    // Partial results survive an aborted run.
    BenchSummary partial;
    partial.reports = reports;
    write_text_file((out / "reports.csv").string(), partial.to_csv());
  }

  if (!reports.empty()) {
    BenchSummary summary = summarize(reports);
    write_text_file((out / "reports.csv").string(), summary.to_csv());
    write_text_file((out / "summary.csv").string(), summary.summary_csv());
    write_text_file((out / "summary.txt").string(), summary.table_row() + "\n");
    std::cout << summary.table_row() << "\n";
  }
  if (failed) {
    std::cerr << "benchmark aborted: " << failure << "\n";
    return kExitDivergence;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Additive-subnetwork models with sparsity, heredity and "
               "marginal-clarity constraints"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Fit a model on CSV data");
  train->add_option("--data", train_args.data_path, "training CSV file");
  train->add_option("--schema", train_args.schema_path, "column-role TOML file");
  train->add_option("--config", train_args.config_path, "hyperparameter TOML file");
  train->add_option("--out", train_args.out_dir, "output directory")->required();
  train->add_option("--task", train_args.task, "regression | binary_classification");
  train->add_option("--val-fraction", train_args.val_fraction,
                    "validation share of the training data");
  train->add_option("--seed", train_args.seed, "base random seed");
  train->add_option("--threads", train_args.threads, "worker threads (1 = reproducible)");
  train->add_option("--lambda", train_args.lambda, "clarity regularization strength");
  train->add_option("--from-manifest", train_args.manifest_path,
                    "reproduce a previous run from its manifest");

  std::string model_path, data_path, out_path;
  CLI::App* predict = app.add_subcommand("predict", "Score new data with a model");
  predict->add_option("--model", model_path, "model document")->required();
  predict->add_option("--data", data_path, "CSV file to score")->required();
  predict->add_option("--out", out_path, "output CSV path")->required();

  std::string ex_model, ex_data, ex_out, ex_svg_dir;
  bool ex_global = false;
  long long ex_row = -1;
  int ex_grid1 = 101, ex_grid2 = 51;
  CLI::App* explain = app.add_subcommand("explain", "Global or local explanations");
  explain->add_option("--model", ex_model, "model document")->required();
  explain->add_option("--data", ex_data, "CSV file (training data for --global)")
      ->required();
  explain->add_flag("--global", ex_global, "emit importance, shape grids and SVGs");
  explain->add_option("--row", ex_row, "explain one row (0-based)");
  explain->add_option("--out", ex_out, "output directory")->required();
  explain->add_option("--svg-dir", ex_svg_dir, "directory for SVG files");
  explain->add_option("--grid", ex_grid1, "1D grid size");
  explain->add_option("--grid2", ex_grid2, "heatmap grid size");

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("benchmark", "Synthetic-function benchmark");
  bench->add_option("--suite", bench_args.suite, "benchmark suite (synthetic)");
  bench->add_option("--n", bench_args.n, "sample size");
  bench->add_option("--dist", bench_args.dist, "uniform | normal | exponential");
  bench->add_option("--lambda", bench_args.lambda, "clarity regularization strength");
  bench->add_option("--reps", bench_args.reps, "repetitions");
  bench->add_option("--out", bench_args.out_dir, "output directory")->required();
  bench->add_option("--seed", bench_args.seed, "base random seed");
  bench->add_option("--noise-sd", bench_args.noise_sd, "response noise sd");
  bench->add_option("--p", bench_args.p_total, "total feature count");
  bench->add_option("--epochs1", bench_args.epochs1, "stage-1 epoch budget");
  bench->add_option("--epochs2", bench_args.epochs2, "stage-2 epoch budget");
  bench->add_option("--epochs3", bench_args.epochs3, "stage-3 epoch budget");
  bench->add_option("--config", bench_args.config_path, "hyperparameter TOML file");
  bench->add_option("--threads", bench_args.threads, "worker threads");
  bench->add_flag("--emit-svg", bench_args.emit_svg, "write shape panels per repetition");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      if (train_args.threads == 0 && train_args.manifest_path.empty())
        train_args.threads = default_threads();
      return cmd_train(train_args);
    }
    if (predict->parsed()) return cmd_predict(model_path, data_path, out_path);
    if (explain->parsed()) {
      if (ex_global == (ex_row >= 0))
        throw ValidationError("explain requires exactly one of --global or --row");
      return cmd_explain(ex_model, ex_data, ex_global, ex_row, ex_out, ex_svg_dir,
                         ex_grid1, ex_grid2);
    }
    if (bench->parsed()) return cmd_benchmark(bench_args);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
