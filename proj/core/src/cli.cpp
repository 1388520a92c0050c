#include "relmine/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "relmine/dfg.hpp"
#include "relmine/error.hpp"
#include "relmine/evaluation.hpp"
#include "relmine/event_log.hpp"
#include "relmine/ggnn.hpp"
#include "relmine/instance_graph.hpp"
#include "relmine/model_io.hpp"
#include "relmine/relevance.hpp"
#include "relmine/training.hpp"

namespace relmine::cli {

namespace {

struct Options {
  std::string input;
  std::string out_dir = ".";
  std::string model_path;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::string annotate = "frequency";
  std::string mode = "both";
  std::size_t folds = 10;
  double validation_fraction = 0.1;
  bool kv = false;

  SchemaConfig schema;
  TrainConfig train;
  GgnnConfig ggnn;
  std::string optimizer = "adam";
  std::string readout = "literal";

  SynthSpec synth;
  std::size_t min_edge_count = 0;
  std::size_t gradcheck_cases = 20;
  double gradcheck_epsilon = 1e-5;
  double gradcheck_tolerance = 1e-4;
};

EventLog load_log(const Options& opt) {
  if (opt.input.empty()) throw ConfigError("--input is required for this command");
  std::ifstream in(opt.input);
  if (!in) throw ConfigError("cannot open input file '" + opt.input + "'");
  return parse_csv(in, opt.schema);
}

std::filesystem::path out_file(const Options& opt, const std::string& name) {
  std::filesystem::create_directories(opt.out_dir);
  return std::filesystem::path(opt.out_dir) / name;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

std::string model_output_path(const Options& opt) {
  if (!opt.model_path.empty()) return opt.model_path;
  return out_file(opt, "model.json").string();
}

int cmd_stats(const Options& opt) {
  const EventLog log = load_log(opt);
  const LogStats stats = log_statistics(log);
  std::cout << (opt.kv ? format_stats_kv(stats) : format_stats_table(stats));
  return 0;
}

int cmd_synth(const Options& opt) {
  const EventLog log = generate_synthetic_log(opt.synth, opt.seed);
  const auto path = out_file(opt, "synthetic.csv");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  write_csv(out, log, opt.schema);
  std::cout << "wrote " << log.traces.size() << " traces to " << path.string()
            << '\n';
  return 0;
}

// Splits off a seeded validation share; everything else trains.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> train_val_split(
    std::size_t n, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, 0x76616c));
  rng.shuffle(order);
  const std::size_t val = static_cast<std::size_t>(
      static_cast<double>(n) * fraction);
  return {{order.begin() + static_cast<std::ptrdiff_t>(val), order.end()},
          {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(val)}};
}

int cmd_train(const Options& opt) {
  const EventLog log = load_log(opt);
  const ActivityVocabulary vocab = build_vocabulary(log);
  const std::size_t dim = vocab.size() + opt.ggnn.padding;

  std::vector<EncodedGraph> graphs;
  graphs.reserve(log.traces.size());
  for (const Trace& t : log.traces) {
    graphs.push_back(encode_graph(build_instance_graph(t), vocab, dim));
  }
  const auto [train_idx, val_idx] =
      train_val_split(graphs.size(), opt.validation_fraction, opt.seed);
  std::vector<EncodedGraph> train_set, val_set;
  for (std::size_t i : train_idx) train_set.push_back(graphs[i]);
  for (std::size_t i : val_idx) val_set.push_back(graphs[i]);

  Rng rng(derive_seed(opt.seed, 0x747261696e));
  const TrainedModel model =
      train(train_set, val_set, opt.train, opt.ggnn, vocab, rng);

  const std::string model_path = model_output_path(opt);
  save_model_file(model_path, model.params, model.vocab);
  std::ofstream report(out_file(opt, "training_report.csv"));
  write_training_report_csv(report, model.report);
  std::cout << "trained " << model.stopped_epoch << " epochs (best epoch "
            << model.best_epoch << "); model written to " << model_path << '\n';
  return 0;
}

int cmd_crossval(const Options& opt) {
  const EventLog log = load_log(opt);
  CvOptions options;
  options.k = opt.folds;
  options.seed = opt.seed;
  options.validation_fraction = opt.validation_fraction;
  options.jobs = opt.jobs;
  const CvRun run = cross_validate(log, opt.train, opt.ggnn, options);

  const auto path = out_file(opt, "cv_report.csv");
  std::ofstream out(path);
  write_cv_report_csv(out, run.report);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f (%.3f)", run.report.auc.mean,
                run.report.auc.stddev);
  std::cout << "mean auc over " << run.report.auc.count << " folds: " << buf
            << "; report written to " << path.string() << '\n';
  return 0;
}

// Relevance vectors for every encodable trace, with a skip count.
std::pair<std::vector<RelevanceVector>, std::size_t> score_log(
    const EventLog& log, const LoadedModel& model) {
  std::vector<RelevanceVector> vectors;
  std::size_t skipped = 0;
  vectors.reserve(log.traces.size());
  for (const Trace& t : log.traces) {
    EncodedGraph g;
    try {
      g = encode_graph(build_instance_graph(t), model.vocab, model.params.dim);
    } catch (const DataError&) {
      ++skipped;
      continue;
    }
    vectors.push_back(instance_relevance(model.params, model.vocab, g));
  }
  return {std::move(vectors), skipped};
}

int cmd_relevance(const Options& opt) {
  if (opt.model_path.empty()) throw ConfigError("--model is required for relevance");
  const LoadedModel model = load_model_file(opt.model_path);
  const EventLog log = load_log(opt);
  const auto [vectors, skipped] = score_log(log, model);
  if (vectors.empty()) throw DataError("no trace could be scored with this model");

  std::ofstream per_instance(out_file(opt, "relevance.csv"));
  write_relevance_csv(per_instance, model.vocab, vectors);
  const AggregatedRelevance agg = aggregate_relevance(vectors);
  std::ofstream aggregate(out_file(opt, "relevance_aggregate.csv"));
  write_aggregate_csv(aggregate, agg);
  std::cout << "scored " << vectors.size() << " instances (" << skipped
            << " skipped); wrote relevance.csv and relevance_aggregate.csv to "
            << opt.out_dir << '\n';
  return 0;
}

int cmd_dfg(const Options& opt) {
  const EventLog log = load_log(opt);
  DotOptions dot_options;
  dot_options.min_edge_count = opt.min_edge_count;

  if (opt.annotate == "frequency") {
    const Dfg dfg = mine_dfg(log);
    AnnotationMap ann;
    ann.kind = AnnotationKind::frequency;
    const auto path = out_file(opt, "dfg_frequency.dot");
    write_text_file(path, to_dot(annotate_dfg(dfg, ann), dot_options));
    std::cout << "wrote " << path.string() << '\n';
    return 0;
  }
  if (opt.annotate != "relevance") {
    throw ConfigError("--annotate must be frequency or relevance");
  }

  if (opt.model_path.empty()) {
    throw ConfigError("--model is required for --annotate relevance");
  }
  const LoadedModel model = load_model_file(opt.model_path);
  const auto [vectors, skipped] = score_log(log, model);
  if (vectors.empty()) throw DataError("no trace could be scored with this model");
  const AggregatedRelevance agg = aggregate_relevance(vectors);

  // One graph per predicted-label group: the group's traces mined alone,
  // colored by the group's mean relevance.
  std::map<std::string, int> predicted;
  for (const RelevanceVector& v : vectors) predicted[v.case_id] = v.predicted_label;
  for (int label = 0; label < 2; ++label) {
    EventLog group;
    for (const Trace& t : log.traces) {
      const auto it = predicted.find(t.case_id);
      if (it != predicted.end() && it->second == label) group.traces.push_back(t);
    }
    if (group.traces.empty()) {
      std::cout << "no instances predicted " << label << "; skipping that graph\n";
      continue;
    }
    AnnotationMap ann;
    ann.kind = AnnotationKind::relevance;
    ann.label_group = label;
    ann.values = agg.mean_relevance[label];
    const auto path =
        out_file(opt, "dfg_relevance_label" + std::to_string(label) + ".dot");
    write_text_file(path, to_dot(annotate_dfg(mine_dfg(group), ann), dot_options));
    std::cout << "wrote " << path.string() << '\n';
  }
  if (skipped > 0) std::cout << skipped << " traces could not be scored\n";
  return 0;
}

void write_report_file(const Options& opt, const std::string& name,
                       const CvReport& report) {
  std::ofstream out(out_file(opt, name));
  write_cv_report_csv(out, report);
}

int cmd_ablate(const Options& opt) {
  const EventLog log = load_log(opt);
  CvOptions options;
  options.k = opt.folds;
  options.seed = opt.seed;
  options.validation_fraction = opt.validation_fraction;
  options.jobs = opt.jobs;

  std::ostringstream table;
  if (opt.mode == "both") {
    const AblationOutcome outcome =
        ablation_experiment(log, opt.train, opt.ggnn, options);
    write_report_file(opt, "cv_original.csv", outcome.original);
    write_report_file(opt, "cv_without_least.csv", outcome.without_least);
    write_report_file(opt, "cv_without_most.csv", outcome.without_most);
    write_ablation_table(table, outcome);
  } else {
    // Single-direction run: original plus the one requested ablation.
    const ExtremeMode mode =
        opt.mode == "most" ? ExtremeMode::most : ExtremeMode::least;
    CvRun original = cross_validate(log, opt.train, opt.ggnn, options);
    const AblatedLog ablated =
        ablate_log(log, original.models, original.folds, mode);
    const CvReport rerun =
        cross_validate(ablated.log, opt.train, opt.ggnn, options).report;
    write_report_file(opt, "cv_original.csv", original.report);
    write_report_file(opt, "cv_without_" + opt.mode + ".csv", rerun);
    auto row = [&](const std::string& name, const CvReport& r) {
      table << name;
      for (std::size_t i = name.size(); i < 16; ++i) table << ' ';
      table << metric_cell(r.auc) << "  " << metric_cell(r.sensitivity) << "  "
            << metric_cell(r.specificity) << '\n';
    };
    table << "variant         auc            sensitivity    specificity\n";
    row("original", original.report);
    row("without_" + opt.mode, rerun);
    table << "dropped traces: " << ablated.dropped_traces
          << "; unscored: " << ablated.unscored_traces << '\n';
  }
  write_text_file(out_file(opt, "ablation_table.txt"), table.str());
  std::cout << table.str();
  return 0;
}

int cmd_gradcheck(const Options& opt) {
  const GradCheckResult result =
      gradient_check(opt.gradcheck_cases, opt.gradcheck_epsilon,
                     opt.gradcheck_tolerance, opt.seed);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", result.max_rel_error);
  if (result.passed) {
    std::cout << "gradcheck passed on " << result.cases
              << " cases: max relative error " << buf << " < "
              << opt.gradcheck_tolerance << '\n';
    return 0;
  }
  throw NumericError("gradient check failed: max relative error " +
                     std::string(buf));
}

}  // namespace

int run(int argc, const char* const* argv) {
  Options opt;
  CLI::App app{"Process-outcome GGNN: train, cross-validate, and explain "
               "event logs via activity relevance"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "INI config file (key=value, flags override)");

  app.add_option("--input", opt.input, "Input event log CSV");
  app.add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
  app.add_option("--model", opt.model_path, "Model file path");
  app.add_option("--seed", opt.seed, "Top-level random seed")->capture_default_str();
  app.add_option("--jobs", opt.jobs, "Worker threads for fold-level commands")
      ->capture_default_str();
  app.add_option("--annotate", opt.annotate, "DFG annotation: frequency|relevance")
      ->capture_default_str();
  app.add_option("--mode", opt.mode, "Ablation direction: most|least|both")
      ->capture_default_str();
  app.add_option("--folds", opt.folds, "Cross-validation folds")
      ->capture_default_str();
  app.add_option("--validation-fraction", opt.validation_fraction,
                 "Share of training traces held out for early stopping")
      ->capture_default_str();

  app.add_option("--case-column", opt.schema.case_column, "Case id column")
      ->capture_default_str();
  app.add_option("--activity-column", opt.schema.activity_column,
                 "Activity column")->capture_default_str();
  app.add_option("--timestamp-column", opt.schema.timestamp_column,
                 "Timestamp column")->capture_default_str();
  app.add_option("--label-column", opt.schema.label_column, "Label column")
      ->capture_default_str();
  app.add_option("--timestamp-format", opt.schema.timestamp_format,
                 "Timestamp pattern (yyyy yy MM dd HH mm ss SSS)")
      ->capture_default_str();
  app.add_option("--positive-label", opt.schema.positive_label_value,
                 "Label value treated as the positive class")
      ->capture_default_str();

  app.add_option("--max-epochs", opt.train.max_epochs, "Training epoch cap")
      ->capture_default_str();
  app.add_option("--patience", opt.train.patience,
                 "Epochs without validation improvement before stopping")
      ->capture_default_str();
  app.add_option("--batch-size", opt.train.batch_size, "Mini-batch size")
      ->capture_default_str();
  app.add_option("--learning-rate", opt.train.learning_rate, "Learning rate")
      ->capture_default_str();
  app.add_option("--optimizer", opt.optimizer, "adam|sgd")->capture_default_str();
  app.add_option("--padding", opt.ggnn.padding,
                 "Hidden dimensions beyond the one-hot width")
      ->capture_default_str();
  app.add_option("--steps", opt.ggnn.steps, "Propagation steps")
      ->capture_default_str();
  app.add_option("--readout", opt.readout, "literal|linear_out")
      ->capture_default_str();

  app.add_option("--num-traces", opt.synth.num_traces, "synth: traces to generate")
      ->capture_default_str();
  app.add_option("--alphabet-size", opt.synth.alphabet_size,
                 "synth: distinct activities")->capture_default_str();
  app.add_option("--mean-length", opt.synth.mean_length,
                 "synth: mean trace length")->capture_default_str();
  app.add_option("--planted-activity", opt.synth.planted_activity,
                 "synth: marker activity")->capture_default_str();
  app.add_option("--plant-rate", opt.synth.plant_rate,
                 "synth: probability a trace carries the marker")
      ->capture_default_str();
  app.add_option("--noise-rate", opt.synth.noise_rate,
                 "synth: label flip probability")->capture_default_str();

  app.add_option("--min-edge-count", opt.min_edge_count,
                 "dfg: hide directly-follows edges below this count")
      ->capture_default_str();
  app.add_option("--cases", opt.gradcheck_cases, "gradcheck: random instances")
      ->capture_default_str();
  app.add_option("--epsilon", opt.gradcheck_epsilon,
                 "gradcheck: finite-difference step")->capture_default_str();
  app.add_option("--tolerance", opt.gradcheck_tolerance,
                 "gradcheck: per-coordinate relative error bound")
      ->capture_default_str();
  app.add_flag("--kv", opt.kv, "stats: key=value output instead of a table");

  auto* stats = app.add_subcommand("stats", "Summarize an event log");
  auto* train_cmd = app.add_subcommand("train", "Train a model on a full log");
  auto* crossval = app.add_subcommand("crossval", "k-fold cross-validation");
  auto* relevance =
      app.add_subcommand("relevance", "Per-instance activity relevance");
  auto* dfg = app.add_subcommand("dfg", "Mine and render a directly-follows graph");
  auto* ablate = app.add_subcommand(
      "ablate", "Cross-validate original and most/least-relevance-ablated logs");
  auto* gradcheck = app.add_subcommand(
      "gradcheck", "Verify analytic gradients against finite differences");
  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic log");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  }

  try {
    opt.train.seed = opt.seed;
    opt.train.optimizer = optimizer_from_name(opt.optimizer);
    opt.ggnn.readout = readout_mode_from_name(opt.readout);
    if (opt.mode != "both" && opt.mode != "most" && opt.mode != "least") {
      throw ConfigError("--mode must be most, least, or both");
    }

    if (stats->parsed()) return cmd_stats(opt);
    if (train_cmd->parsed()) return cmd_train(opt);
    if (crossval->parsed()) return cmd_crossval(opt);
    if (relevance->parsed()) return cmd_relevance(opt);
    if (dfg->parsed()) return cmd_dfg(opt);
    if (ablate->parsed()) return cmd_ablate(opt);
    if (gradcheck->parsed()) return cmd_gradcheck(opt);
    if (synth->parsed()) return cmd_synth(opt);
    throw ConfigError("no command given");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace relmine::cli
