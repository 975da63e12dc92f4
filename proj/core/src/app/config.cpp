#include "lexda/app/config.hpp"

#include <fstream>
#include <utility>

#include "lexda/error.hpp"

namespace lexda::app {

using nlohmann::json;

namespace {

template <typename E>
using Names = std::initializer_list<std::pair<E, std::string_view>>;

template <typename E>
std::string_view name_of(E value, Names<E> names) {
  for (const auto& [v, n] : names) {
    if (v == value) return n;
  }
  return "unknown";
}

template <typename E>
E value_of(std::string_view name, Names<E> names, std::string_view key) {
  std::string valid;
  for (const auto& [v, n] : names) {
    if (n == name) return v;
    valid += valid.empty() ? "" : ", ";
    valid += n;
  }
  throw ConfigError("unknown " + std::string(key) + " '" + std::string(name) + "' (valid: " + valid + ")");
}

const Names<CorpusFormat> kFormats = {
    {CorpusFormat::complex, "complex"}, {CorpusFormat::cwi2018, "cwi2018"}, {CorpusFormat::synthetic, "synthetic"}};
const Names<corpus::CwiGrouping> kGroupings = {
    {corpus::CwiGrouping::language, "language"}, {corpus::CwiGrouping::subcorpus, "subcorpus"}};
const Names<nn::Pooling> kPoolings = {{nn::Pooling::first_token, "first"}, {nn::Pooling::mean, "mean"}};
const Names<nn::Activation> kActivations = {{nn::Activation::relu, "relu"}, {nn::Activation::tanh, "tanh"}};
const Names<model::RegressionKind> kLosses = {{model::RegressionKind::l1, "l1"}, {model::RegressionKind::mse, "mse"}};
const Names<training::DiscriminatorKind> kDiscriminators = {{training::DiscriminatorKind::domain, "domain"},
                                                            {training::DiscriminatorKind::language, "language"},
                                                            {training::DiscriminatorKind::task, "task"}};

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

// Reads j[key] as T, naming the dotted key on a type mismatch.
class Reader {
 public:
  Reader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError("config section '" + prefix_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) const {
    const json& v = at(key);
    try {
      out = v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + path(key) + "' has the wrong type: " + v.dump());
    }
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number_unsigned()) throw ConfigError("config key '" + path(key) + "' must be a non-negative integer");
    }
  }

  template <typename T>
  void get(const char* key, std::optional<T>& out) const {
    if (at(key).is_null()) {
      out.reset();
      return;
    }
    T value{};
    get(key, value);
    out = value;
  }

  void get(const char* key, std::vector<std::string>& out) const {
    const json& v = at(key);
    if (v.is_string()) {
      out = {v.get<std::string>()};
      return;
    }
    if (!v.is_array()) throw ConfigError("config key '" + path(key) + "' must be a list of strings");
    out.clear();
    for (const auto& item : v) {
      if (!item.is_string()) throw ConfigError("config key '" + path(key) + "' must be a list of strings");
      out.push_back(item.get<std::string>());
    }
  }

  template <typename E>
  void get_enum(const char* key, E& out, Names<E> names) const {
    std::string name;
    get(key, name);
    out = value_of(name, names, path(key));
  }

  Reader section(const char* key) const { return Reader(at(key), path(key)); }

 private:
  const json& at(const char* key) const {
    const auto it = j_.find(key);
    if (it == j_.end()) throw ConfigError("config key '" + path(key) + "' is missing");
    return *it;
  }
  std::string path(const char* key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  const json& j_;
  std::string prefix_;
};

void read_synthetic(const Reader& r, corpus::SyntheticSpec& s) {
  r.get("domains", s.domains);
  r.get("per_domain", s.per_domain);
  r.get("vocabulary", s.vocabulary);
  r.get("fillers_per_domain", s.fillers_per_domain);
  r.get("spurious_strength", s.spurious_strength);
  r.get("source_domains", s.source_domains);
  r.get("target_marker_rate", s.target_marker_rate);
  r.get("noise", s.noise);
  r.get("min_fillers", s.min_fillers);
  r.get("max_fillers", s.max_fillers);
}

json synthetic_json(const corpus::SyntheticSpec& s) {
  return {{"domains", s.domains},
          {"per_domain", s.per_domain},
          {"vocabulary", s.vocabulary},
          {"fillers_per_domain", s.fillers_per_domain},
          {"spurious_strength", s.spurious_strength},
          {"source_domains", s.source_domains},
          {"target_marker_rate", s.target_marker_rate},
          {"noise", s.noise},
          {"min_fillers", s.min_fillers},
          {"max_fillers", s.max_fillers}};
}

json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + file.string() + " is not valid JSON: " + e.what());
  }
}

}  // namespace

std::string_view to_string(CorpusFormat f) { return name_of(f, kFormats); }

CorpusFormat parse_format(std::string_view name) { return value_of(name, kFormats, "data.format"); }

std::size_t RunConfig::effective_epochs() const {
  return epochs.value_or(training::RunPlan::default_epochs(model.variant));
}

json to_json(const RunConfig& c) {
  const auto& m = c.model;
  const auto& p = c.plan;
  const auto& w = p.weights;
  const auto& o = p.optimizer;
  const auto& d = c.data;
  return {
      {"seed", c.seed},
      {"variant", model::to_string(m.variant)},
      {"data",
       {{"format", to_string(d.format)},
        {"train", d.train},
        {"validation", d.validation},
        {"simplification", optional_json(d.simplification)},
        {"cwi_grouping", name_of(d.cwi_grouping, kGroupings)},
        {"max_examples", optional_json(d.max_examples)},
        {"validation_fraction", d.validation_fraction},
        {"synthetic", synthetic_json(d.synthetic)}}},
      {"model",
       {{"char_embedding", m.char_embedding},
        {"char_hidden", m.char_hidden},
        {"d_model", m.d_model},
        {"layers", m.layers},
        {"heads", m.heads},
        {"feed_forward", m.feed_forward},
        {"pooling", name_of(m.pooling, kPoolings)},
        {"head_hidden1", m.head_hidden1},
        {"head_hidden2", m.head_hidden2},
        {"z_dim", m.z_dim},
        {"vae_hidden", m.vae_hidden},
        {"decoder_embedding", m.decoder_embedding},
        {"decoder_hidden", m.decoder_hidden},
        {"decoder_projection", m.decoder_projection},
        {"disc_hidden1", m.disc_hidden1},
        {"disc_hidden2", m.disc_hidden2},
        {"disc_activation", name_of(m.disc_activation, kActivations)},
        {"dropout", m.dropout},
        {"max_chars", m.limits.max_chars},
        {"max_tokens", m.limits.max_tokens}}},
      {"training",
       {{"epochs", optional_json(c.epochs)},
        {"batch_size", p.batch_size},
        {"loss", name_of(p.loss, kLosses)},
        {"learning_rate", o.learning_rate},
        {"beta1", o.beta1},
        {"beta2", o.beta2},
        {"epsilon", o.epsilon},
        {"weight_decay", o.weight_decay},
        {"clip_norm", o.clip_norm},
        {"discriminator_learning_rate", optional_json(p.discriminator_learning_rate)},
        {"lambda_override", optional_json(p.lambda_override)},
        {"unlabeled_groups", p.unlabeled_groups},
        {"simplification_ratio", p.simplification_ratio},
        {"discriminator", name_of(p.discriminator, kDiscriminators)}}},
      {"loss",
       {{"alpha_vae", w.alpha_vae},
        {"alpha_dec", w.alpha_dec},
        {"alpha_task", w.alpha_task},
        {"beta", w.beta},
        {"gamma", w.gamma},
        {"ml_weight", w.ml_weight}}},
  };
}

RunConfig config_from_json(const json& document) {
  json full = to_json(RunConfig{});
  merge_strict(full, document);

  RunConfig c;
  const Reader root(full, "");
  root.get("seed", c.seed);
  std::string variant;
  root.get("variant", variant);
  c.model.variant = model::parse_variant(variant);

  const Reader data = root.section("data");
  auto& d = c.data;
  data.get_enum("format", d.format, kFormats);
  data.get("train", d.train);
  data.get("validation", d.validation);
  data.get("simplification", d.simplification);
  data.get_enum("cwi_grouping", d.cwi_grouping, kGroupings);
  data.get("max_examples", d.max_examples);
  data.get("validation_fraction", d.validation_fraction);
  read_synthetic(data.section("synthetic"), d.synthetic);

  const Reader m = root.section("model");
  auto& mc = c.model;
  m.get("char_embedding", mc.char_embedding);
  m.get("char_hidden", mc.char_hidden);
  m.get("d_model", mc.d_model);
  m.get("layers", mc.layers);
  m.get("heads", mc.heads);
  m.get("feed_forward", mc.feed_forward);
  m.get_enum("pooling", mc.pooling, kPoolings);
  m.get("head_hidden1", mc.head_hidden1);
  m.get("head_hidden2", mc.head_hidden2);
  m.get("z_dim", mc.z_dim);
  m.get("vae_hidden", mc.vae_hidden);
  m.get("decoder_embedding", mc.decoder_embedding);
  m.get("decoder_hidden", mc.decoder_hidden);
  m.get("decoder_projection", mc.decoder_projection);
  m.get("disc_hidden1", mc.disc_hidden1);
  m.get("disc_hidden2", mc.disc_hidden2);
  m.get_enum("disc_activation", mc.disc_activation, kActivations);
  m.get("dropout", mc.dropout);
  m.get("max_chars", mc.limits.max_chars);
  m.get("max_tokens", mc.limits.max_tokens);

  const Reader t = root.section("training");
  auto& p = c.plan;
  t.get("epochs", c.epochs);
  t.get("batch_size", p.batch_size);
  t.get_enum("loss", p.loss, kLosses);
  t.get("learning_rate", p.optimizer.learning_rate);
  t.get("beta1", p.optimizer.beta1);
  t.get("beta2", p.optimizer.beta2);
  t.get("epsilon", p.optimizer.epsilon);
  t.get("weight_decay", p.optimizer.weight_decay);
  t.get("clip_norm", p.optimizer.clip_norm);
  t.get("discriminator_learning_rate", p.discriminator_learning_rate);
  t.get("lambda_override", p.lambda_override);
  t.get("unlabeled_groups", p.unlabeled_groups);
  t.get("simplification_ratio", p.simplification_ratio);
  t.get_enum("discriminator", p.discriminator, kDiscriminators);

  const Reader l = root.section("loss");
  auto& w = p.weights;
  l.get("alpha_vae", w.alpha_vae);
  l.get("alpha_dec", w.alpha_dec);
  l.get("alpha_task", w.alpha_task);
  l.get("beta", w.beta);
  l.get("gamma", w.gamma);
  l.get("ml_weight", w.ml_weight);

  p.seed = c.seed;
  p.epochs = c.effective_epochs();
  p.validate();
  p.optimizer.validate();
  if (!(d.validation_fraction >= 0.0 && d.validation_fraction < 1.0)) {
    throw ConfigError("data.validation_fraction must lie in [0, 1)");
  }
  if (d.max_examples && *d.max_examples == 0) throw ConfigError("data.max_examples must be positive");
  if (mc.limits.max_chars == 0 || mc.limits.max_tokens < 2) {
    throw ConfigError("model.max_chars must be positive and model.max_tokens at least 2");
  }
  return c;
}

void merge_strict(json& base, const json& patch, const std::string& where) {
  if (!patch.is_object()) {
    throw ConfigError(where.empty() ? "config document must be a JSON object"
                                    : "config key '" + where + "' must be an object");
  }
  for (const auto& [key, value] : patch.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    const auto it = base.find(key);
    if (it == base.end()) throw ConfigError("unknown config key '" + path + "'");
    if (it->is_object()) {
      merge_strict(*it, value, path);
    } else {
      *it = value;
    }
  }
}

void apply_override(json& document, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;

  json patch = std::move(value);
  std::size_t end = key.size();
  while (true) {
    const auto dot = key.rfind('.', end - 1);
    const std::size_t start = dot == std::string::npos ? 0 : dot + 1;
    if (start == end) throw ConfigError("override key '" + key + "' has an empty component");
    patch = json{{key.substr(start, end - start), std::move(patch)}};
    if (dot == std::string::npos) break;
    end = dot;
  }
  merge_strict(document, patch);
}

RunConfig layer_config(json base, const std::optional<std::filesystem::path>& file,
                       std::span<const std::string> overrides, std::optional<std::uint64_t> seed) {
  if (file) merge_strict(base, read_json_file(*file));
  for (const auto& o : overrides) apply_override(base, o);
  if (seed) base["seed"] = *seed;
  return config_from_json(base);
}

RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      std::span<const std::string> overrides, std::optional<std::uint64_t> seed) {
  return layer_config(to_json(RunConfig{}), file, overrides, seed);
}

}  // namespace lexda::app
