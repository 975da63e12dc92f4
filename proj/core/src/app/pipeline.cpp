#include "lexda/app/pipeline.hpp"

#include <numeric>

#include <spdlog/spdlog.h>

#include "lexda/error.hpp"
#include "lexda/eval/evaluate.hpp"
#include "lexda/random.hpp"
#include "lexda/text.hpp"

namespace lexda::app {

namespace {

constexpr const char* kTaskGroups[] = {"complexity", "simplification"};

std::vector<corpus::AnnotatedExample> pick(const std::vector<corpus::AnnotatedExample>& examples,
                                           std::span<const std::size_t> rows) {
  std::vector<corpus::AnnotatedExample> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(examples[r]);
  return out;
}

std::vector<std::size_t> shuffled_rows(std::size_t n, std::uint64_t seed, std::string_view stream) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Rng rng = derive_rng(seed, stream);
  shuffle(rows.begin(), rows.end(), rng);
  return rows;
}

}  // namespace

std::vector<corpus::AnnotatedExample> load_corpus(CorpusFormat format,
                                                  std::span<const std::string> paths,
                                                  corpus::CwiGrouping grouping) {
  if (format == CorpusFormat::synthetic) {
    throw ConfigError("synthetic corpora are generated, not read from files");
  }
  if (paths.empty()) throw ConfigError("no corpus file named");
  std::vector<corpus::AnnotatedExample> out;
  for (const auto& p : paths) {
    auto part = format == CorpusFormat::complex ? corpus::parse_complex_lcp(p)
                                                : corpus::parse_cwi2018(p, {grouping, std::nullopt});
    spdlog::info("read {} examples from {}", part.size(), p);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

RunData load_run_data(const RunConfig& config) {
  const auto& d = config.data;
  RunData data;
  if (d.format == CorpusFormat::synthetic) {
    if (!d.train.empty()) throw ConfigError("data.train must be empty for the synthetic format");
    data.train = corpus::gen_synthetic_domains(d.synthetic, config.seed);
  } else {
    data.train = load_corpus(d.format, d.train, d.cwi_grouping);
  }
  if (data.train.empty()) throw ValidationError("training corpus is empty");

  if (d.max_examples && *d.max_examples < data.train.size()) {
    auto rows = shuffled_rows(data.train.size(), config.seed, "data/subsample");
    rows.resize(*d.max_examples);
    std::sort(rows.begin(), rows.end());
    data.train = pick(data.train, rows);
  }

  if (!d.validation.empty()) {
    data.validation = load_corpus(d.format == CorpusFormat::synthetic ? CorpusFormat::complex : d.format,
                                  d.validation, d.cwi_grouping);
  } else if (d.validation_fraction > 0.0) {
    const auto rows = shuffled_rows(data.train.size(), config.seed, "data/validation");
    const auto held = static_cast<std::size_t>(d.validation_fraction * static_cast<double>(rows.size()));
    if (held == 0 || held == rows.size()) throw ConfigError("data.validation_fraction leaves an empty side");
    std::vector<std::size_t> val(rows.begin(), rows.begin() + static_cast<long>(held));
    std::vector<std::size_t> fit(rows.begin() + static_cast<long>(held), rows.end());
    std::sort(val.begin(), val.end());
    std::sort(fit.begin(), fit.end());
    data.validation = pick(data.train, val);
    data.train = pick(data.train, fit);
  }

  if (d.simplification) data.simplification = corpus::parse_benchls(*d.simplification);
  if (config.model.variant == model::Variant::multitask_da && data.simplification.empty()) {
    throw ConfigError("multitask-da needs data.simplification (a BenchLS file)");
  }
  return data;
}

std::vector<std::string> discriminator_groups(model::Variant variant,
                                              const std::vector<corpus::AnnotatedExample>& train) {
  if (variant == model::Variant::multitask_da) return {kTaskGroups[0], kTaskGroups[1]};
  return corpus::LabelSet::from_examples(train).names();
}

std::vector<corpus::EncodedExample> ModelBundle::encode(
    const std::vector<corpus::AnnotatedExample>& examples) const {
  std::vector<corpus::EncodedExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(corpus::encode(ex, vocab, labels, config.model.limits));
  return out;
}

ModelBundle build_model(const RunConfig& config, const RunData& data) {
  ModelBundle b;
  b.config = config;
  b.vocab = data.simplification.empty() ? corpus::build_vocabularies(data.train)
                                        : corpus::build_vocabularies(data.train, data.simplification);
  b.labels = corpus::LabelSet::from_examples(data.train);
  b.config.model.groups = discriminator_groups(config.model.variant, data.train);
  b.model = std::make_unique<model::CwiModel>(b.config.model, b.vocab.chars.size(), b.vocab.tokens.size(),
                                              config.seed);
  return b;
}

TrainedRun train(const RunConfig& config, const RunData& data, const training::EpochCallback& on_epoch) {
  TrainedRun run{build_model(config, data), {}};
  auto& b = run.bundle;
  const auto train_set = b.encode(data.train);
  const auto validation = b.encode(data.validation);
  if (config.model.variant == model::Variant::multitask_da) {
    std::vector<corpus::EncodedSimplification> simplification;
    simplification.reserve(data.simplification.size());
    for (const auto& ex : data.simplification) {
      simplification.push_back(corpus::encode(ex, b.vocab, config.model.limits));
    }
    run.report = training::train_multitask(*b.model, train_set, simplification, config.plan, validation, on_epoch);
  } else {
    run.report = training::train_single_task(*b.model, train_set, config.plan, validation, on_epoch);
  }
  if (!validation.empty()) {
    std::vector<std::string> groups;
    groups.reserve(data.validation.size());
    for (const auto& ex : data.validation) groups.push_back(ex.group);
    run.report.final_metrics = eval::evaluate(*b.model, validation, groups);
  }
  return run;
}

nn::Checkpoint make_checkpoint(const ModelBundle& bundle) {
  nlohmann::json chars = nlohmann::json::array();
  for (char32_t c : bundle.vocab.chars.characters()) chars.push_back(static_cast<std::uint32_t>(c));
  nlohmann::json meta = {
      {"config", to_json(bundle.config)},
      {"groups", bundle.config.model.groups},
      {"labels", bundle.labels.names()},
      {"vocabulary", {{"chars", chars}, {"tokens", bundle.vocab.tokens.tokens()}}},
  };
  return nn::capture(bundle.model->parameters(), std::move(meta));
}

nlohmann::json stored_config(const nn::Checkpoint& checkpoint) {
  const auto it = checkpoint.metadata.find("config");
  if (it == checkpoint.metadata.end() || !it->is_object()) {
    throw CheckpointError("checkpoint carries no run config");
  }
  return *it;
}

ModelBundle restore_model(const RunConfig& config, const nn::Checkpoint& checkpoint) {
  const auto& meta = checkpoint.metadata;
  ModelBundle b;
  b.config = config;
  try {
    std::u32string chars;
    for (const auto& c : meta.at("vocabulary").at("chars")) chars.push_back(static_cast<char32_t>(c.get<std::uint32_t>()));
    b.vocab.chars = nn::CharVocabulary::from_characters(chars);
    b.vocab.tokens =
        nn::TokenVocabulary::from_tokens(meta.at("vocabulary").at("tokens").get<std::vector<std::string>>());
    b.labels = corpus::LabelSet(meta.at("labels").get<std::vector<std::string>>());
    b.config.model.groups = meta.at("groups").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint metadata is incomplete: ") + e.what());
  }
  try {
    b.model = std::make_unique<model::CwiModel>(b.config.model, b.vocab.chars.size(), b.vocab.tokens.size(),
                                                config.seed);
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint does not fit the config: ") + e.what());
  }
  nn::restore(b.model->parameters(), checkpoint);
  return b;
}

double predict_span(const ModelBundle& bundle, const std::string& sentence, std::size_t start,
                    std::size_t end, const std::optional<std::string>& expected) {
  corpus::AnnotatedExample ex;
  ex.id = "input";
  ex.sentence = text::nfc(sentence);
  const std::u32string chars = text::decode_utf8(ex.sentence);
  if (start >= end || end > chars.size()) {
    throw ContractError("span [" + std::to_string(start) + ", " + std::to_string(end) +
                        ") does not fit a sentence of " + std::to_string(chars.size()) + " characters");
  }
  ex.target = {start, end, text::encode_utf8(chars.substr(start, end - start))};
  if (expected && text::nfc(*expected) != ex.target.surface) {
    throw ContractError("span slices '" + ex.target.surface + "' but the target is '" + *expected + "'");
  }
  const auto encoded = bundle.encode({ex});
  return std::clamp(eval::predict(*bundle.model, encoded).front(), 0.0, 1.0);
}

}  // namespace lexda::app
