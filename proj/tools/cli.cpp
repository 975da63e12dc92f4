#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "lexda/app/config.hpp"
#include "lexda/app/experiment.hpp"
#include "lexda/app/pipeline.hpp"
#include "lexda/error.hpp"
#include "lexda/eval/evaluate.hpp"

namespace lexda::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::optional<std::string> config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool out_required) {
  cmd->add_option("--config", c.config, "JSON run config");
  cmd->add_option("--set", c.overrides, "Override a config key (dotted.key=value); repeatable")
      ->allow_extra_args(false);
  cmd->add_option("--seed", c.seed, "Run seed (overrides the config)");
  auto* out = cmd->add_option("--out", c.out, "Output directory");
  if (out_required) out->required();
}

std::optional<fs::path> config_path(const Common& c) {
  if (!c.config) return std::nullopt;
  return fs::path(*c.config);
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << content;
  if (!f) throw Error("failed writing " + path.string());
}

std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

nn::Checkpoint open_checkpoint(const std::string& path) {
  if (path.empty()) throw ConfigError("--checkpoint is required");
  if (!fs::exists(path)) throw ConfigError("checkpoint " + path + " does not exist");
  return nn::load_checkpoint(path);
}

int cmd_train(const Common& c, std::ostream& out) {
  const auto config = app::load_config(config_path(c), c.overrides, c.seed);
  const fs::path dir(c.out);
  write_file(dir / "effective_config.json", app::to_json(config).dump(2) + "\n");
  const auto data = app::load_run_data(config);
  spdlog::info("training {} on {} examples ({} validation), {} epochs, seed {}",
               model::to_string(config.model.variant), data.train.size(), data.validation.size(),
               config.plan.epochs, config.seed);
  const auto run = app::train(config, data, [](const eval::EpochRecord& r) {
    spdlog::info("epoch {} lambda {:.4f} objective {:.5f}", r.epoch, r.lambda,
                 r.losses.count("objective") ? r.losses.at("objective") : 0.0);
  });

  std::ostringstream report;
  eval::write_jsonl(report, run.report);
  write_file(dir / "report.jsonl", report.str());
  nn::save_checkpoint(dir / "checkpoint.json", app::make_checkpoint(run.bundle));
  if (run.report.final_metrics) {
    std::ostringstream table;
    eval::write_metrics_table(table, *run.report.final_metrics);
    write_file(dir / "metrics.tsv", table.str());
    out << table.str();
  }
  out << "wrote " << (dir / "report.jsonl").string() << " and " << (dir / "checkpoint.json").string() << "\n";
  return kOk;
}

int cmd_evaluate(const Common& c, const std::string& checkpoint_path, const std::vector<std::string>& files,
                 std::ostream& out) {
  const auto checkpoint = open_checkpoint(checkpoint_path);
  const auto config = app::layer_config(app::stored_config(checkpoint), config_path(c), c.overrides, c.seed);
  const auto bundle = app::restore_model(config, checkpoint);
  const auto& names = files.empty() ? config.data.validation : files;
  if (names.empty()) throw ConfigError("name a corpus to evaluate (positional or data.validation)");
  const auto format = config.data.format == app::CorpusFormat::synthetic ? app::CorpusFormat::complex
                                                                          : config.data.format;
  const auto examples = app::load_corpus(format, names, config.data.cwi_grouping);
  std::vector<std::string> groups;
  groups.reserve(examples.size());
  for (const auto& e : examples) groups.push_back(e.group);
  const auto table = eval::evaluate(*bundle.model, bundle.encode(examples), groups);

  std::ostringstream text;
  eval::write_metrics_table(text, table);
  out << text.str();
  if (!c.out.empty()) write_file(fs::path(c.out) / "metrics.tsv", text.str());
  return kOk;
}

int cmd_predict(const Common& c, const std::string& checkpoint_path, const std::string& sentence,
                std::size_t start, std::size_t end, const std::optional<std::string>& target,
                std::ostream& out) {
  const auto checkpoint = open_checkpoint(checkpoint_path);
  const auto config = app::layer_config(app::stored_config(checkpoint), config_path(c), c.overrides, c.seed);
  const auto bundle = app::restore_model(config, checkpoint);
  out << shortest(app::predict_span(bundle, sentence, start, end, target)) << "\n";
  return kOk;
}

int cmd_synth(const Common& c, std::ostream& out) {
  const auto config = app::load_config(config_path(c), c.overrides, c.seed);
  const auto examples = corpus::gen_synthetic_domains(config.data.synthetic, config.seed);
  const fs::path path = fs::path(c.out) / "synthetic.tsv";
  if (!c.out.empty()) fs::create_directories(c.out);
  corpus::write_complex_lcp(path, examples);
  out << "wrote " << examples.size() << " examples to " << path.string() << "\n";
  return kOk;
}

int cmd_experiment(const Common& c, const std::vector<std::uint64_t>& seeds, std::ostream& out) {
  if (c.config || !c.overrides.empty()) {
    throw ConfigError("experiment takes no --config/--set; its setting is fixed");
  }
  const auto experiment = app::default_shift_experiment();
  std::vector<app::ShiftOutcome> outcomes;
  for (auto s : seeds) outcomes.push_back(app::run_shift_seed(experiment, s));
  std::ostringstream table;
  app::write_shift_table(table, outcomes);
  write_file(fs::path(c.out) / "shift.tsv", table.str());
  out << table.str();
  const auto wins = std::count_if(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.da_wins(); });
  out << "base-da beats base on target MAE in " << wins << " of " << outcomes.size() << " seeds\n";
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lexical complexity prediction with adversarial domain, language and task adaptation", "lexda"};
  app.require_subcommand(1);

  Common common;
  std::string checkpoint;
  std::vector<std::string> files;
  std::string sentence;
  std::size_t start = 0;
  std::size_t end = 0;
  std::optional<std::string> target;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

  auto* train = app.add_subcommand("train", "Train a model; writes report.jsonl, checkpoint.json, effective_config.json");
  add_common(train, common, true);

  auto* evaluate = app.add_subcommand("evaluate", "Per-group Pearson/MAE of a checkpoint on a corpus");
  add_common(evaluate, common, false);
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint.json from train")->required();
  evaluate->add_option("corpus", files, "Corpus files (default: data.validation)");

  auto* predict = app.add_subcommand("predict", "Complexity of one target span");
  add_common(predict, common, false);
  predict->add_option("--checkpoint", checkpoint, "checkpoint.json from train")->required();
  predict->add_option("--target", target, "Expected target text at the span");
  predict->add_option("sentence", sentence, "Sentence text")->required();
  predict->add_option("start", start, "First code point of the target")->required();
  predict->add_option("end", end, "One past the last code point of the target")->required();

  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus in CompLex layout (synthetic.tsv)");
  add_common(synth, common, true);

  auto* experiment = app.add_subcommand("experiment", "Run the two-domain shift experiment (shift.tsv)");
  add_common(experiment, common, true);
  experiment->add_option("--seeds", seeds, "Seeds to run")->delimiter(',');

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*train) return cmd_train(common, out);
    if (*evaluate) return cmd_evaluate(common, checkpoint, files, out);
    if (*predict) return cmd_predict(common, checkpoint, sentence, start, end, target, out);
    if (*synth) return cmd_synth(common, out);
    if (*experiment) return cmd_experiment(common, seeds, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ContractError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const ValidationError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const VocabularyError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << "\n";
    return kCheckpointError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace lexda::cli
