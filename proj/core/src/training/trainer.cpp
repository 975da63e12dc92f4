#include "lexda/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "lexda/error.hpp"
#include "lexda/eval/evaluate.hpp"

namespace lexda::training {

namespace {

using ad::Graph;
using ad::Var;
using model::CwiModel;
using model::LossParts;
using model::Variant;

Var mean_of(Graph& g, const std::vector<Var>& scalars) {
  if (scalars.empty()) return g.constant(ad::Tensor::scalar(0.0));
  return ad::mean(ad::concat_cols(scalars));
}

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed, const std::string& stream) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = derive_rng(seed, stream);
  shuffle(order.begin(), order.end(), rng);
  return order;
}

std::vector<std::span<const std::size_t>> chunks(const std::vector<std::size_t>& order,
                                                 std::size_t size) {
  std::vector<std::span<const std::size_t>> out;
  for (std::size_t start = 0; start < order.size(); start += size) {
    out.emplace_back(order.data() + start, std::min(size, order.size() - start));
  }
  return out;
}

std::vector<std::vector<ad::Parameter*>> optimizer_groups(CwiModel& model) {
  std::vector<ad::Parameter*> shared, disc;
  for (auto* p : model.parameters().all()) {
    (p->name.rfind("discriminator.", 0) == 0 ? disc : shared).push_back(p);
  }
  std::vector<std::vector<ad::Parameter*>> groups{std::move(shared)};
  if (!disc.empty()) groups.push_back(std::move(disc));
  return groups;
}

AdamW make_optimizer(CwiModel& model, const RunPlan& plan) {
  auto groups = optimizer_groups(model);
  const bool has_disc = groups.size() > 1;
  AdamW opt(plan.optimizer, std::move(groups));
  if (has_disc && plan.discriminator_learning_rate) opt.set_learning_rate(1, *plan.discriminator_learning_rate);
  return opt;
}

double current_lambda(const RunPlan& plan, std::size_t epoch) {
  return plan.lambda_override ? *plan.lambda_override : lambda_schedule(epoch, plan.weights.gamma);
}

std::optional<double> try_pearson(std::span<const double> pred, std::span<const double> gold) {
  if (pred.size() < 2) return std::nullopt;
  try {
    return eval::pearson(pred, gold);
  } catch (const UndefinedMetricError&) {
    return std::nullopt;
  }
}

/// Running sums of one epoch.
struct EpochTotals {
  eval::LossMap sums;
  std::size_t steps = 0;
  std::vector<double> pred, gold;
  std::size_t hits = 0, seen = 0;

  void add(const eval::LossMap& losses) {
    for (const auto& [k, v] : losses) sums[k] += v;
    ++steps;
  }
  void count_hits(const ad::Tensor& logits, std::span<const std::size_t> labels) {
    const std::size_t k = logits.cols();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      hits += eval::argmax(logits.values().subspan(i * k, k)) == labels[i];
    }
    seen += labels.size();
  }
};

eval::EpochRecord finish_epoch(std::size_t epoch, double lambda, const EpochTotals& t,
                               const CwiModel& model,
                               std::span<const corpus::EncodedExample> validation) {
  eval::EpochRecord r;
  r.epoch = epoch + 1;
  r.lambda = lambda;
  for (const auto& [k, v] : t.sums) r.losses[k] = v / static_cast<double>(t.steps);
  if (!t.pred.empty()) {
    std::vector<double> clamped(t.pred);
    for (auto& p : clamped) p = std::clamp(p, 0.0, 1.0);
    r.train_pearson = try_pearson(clamped, t.gold);
    r.train_mae = eval::mae(clamped, t.gold);
  }
  if (t.seen > 0) r.discriminator_accuracy = static_cast<double>(t.hits) / static_cast<double>(t.seen);
  if (!validation.empty()) {
    auto pred = eval::predict(model, validation);
    std::vector<double> gold;
    for (const auto& ex : validation) gold.push_back(ex.gold);
    for (auto& p : pred) p = std::clamp(p, 0.0, 1.0);
    r.val_pearson = try_pearson(pred, gold);
    r.val_mae = eval::mae(pred, gold);
  }
  return r;
}

}  // namespace

std::size_t RunPlan::default_epochs(Variant variant) { return variant == Variant::vae_da ? 12 : 8; }

void RunPlan::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be at least 1");
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  if (!(simplification_ratio > 0.0)) throw ConfigError("simplification ratio must be positive");
  if (lambda_override && !(*lambda_override >= 0.0 && *lambda_override < 1.0)) {
    throw ConfigError("lambda override must lie in [0, 1)");
  }
  weights.validate();
  optimizer.validate();
  if (discriminator_learning_rate && !(*discriminator_learning_rate > 0.0)) {
    throw ConfigError("discriminator learning rate must be positive");
  }
}

eval::TrainingReport train_single_task(CwiModel& model, std::span<const corpus::EncodedExample> train,
                                       const RunPlan& plan,
                                       std::span<const corpus::EncodedExample> validation,
                                       const EpochCallback& on_epoch) {
  plan.validate();
  const Variant variant = model.config().variant;
  if (variant == Variant::multitask_da) throw ConfigError("multitask-da trains with train_multitask");
  if (train.empty()) throw ConfigError("training corpus is empty");
  const auto& group_names = model.config().groups;

  std::vector<bool> unlabeled(group_names.size(), false);
  for (const auto& name : plan.unlabeled_groups) {
    const auto it = std::find(group_names.begin(), group_names.end(), name);
    if (it == group_names.end()) throw ConfigError("unlabeled group '" + name + "' is not a model group");
    unlabeled[static_cast<std::size_t>(it - group_names.begin())] = true;
  }
  auto is_unlabeled = [&](int group) {
    return group >= 0 && static_cast<std::size_t>(group) < unlabeled.size() && unlabeled[group];
  };
  if (model.has_discriminator()) {
    std::set<int> groups;
    for (const auto& ex : train) {
      if (ex.group < 0 || static_cast<std::size_t>(ex.group) >= group_names.size()) {
        throw ConfigError("training example outside the discriminator label set");
      }
      groups.insert(ex.group);
    }
    if (groups.size() < 2) {
      throw ConfigError("variant " + std::string(model::to_string(variant)) +
                        " needs at least 2 groups in the training corpus");
    }
  }

  AdamW optimizer = make_optimizer(model, plan);
  Rng rng = derive_rng(plan.seed, "dropout");
  eval::TrainingReport report;
  report.variant = std::string(model::to_string(variant));
  report.seed = plan.seed;

  for (std::size_t epoch = 0; epoch < plan.epochs; ++epoch) {
    const double lambda = current_lambda(plan, epoch);
    const double reversal = plan.weights.beta * lambda;
    const auto order = shuffled(train.size(), plan.seed, "batches/" + std::to_string(epoch));
    EpochTotals totals;
    std::size_t batch_no = 0;
    for (const auto rows : chunks(order, plan.batch_size)) {
      Graph g;
      std::vector<Var> labeled, all, vae_terms, decoder_terms;
      std::vector<double> gold;
      std::vector<std::size_t> labels;
      for (auto idx : rows) {
        const auto& ex = train[idx];
        const bool has_gold = !is_unlabeled(ex.group);
        if (!has_gold && !model.has_discriminator()) continue;
        const auto f = model.extract(g, {ex.chars, ex.tokens}, ad::Mode::train, rng);
        if (has_gold) {
          labeled.push_back(f.concat);
          gold.push_back(ex.gold);
        }
        if (model.has_discriminator()) {
          all.push_back(f.concat);
          labels.push_back(static_cast<std::size_t>(ex.group));
        }
        if (model.has_vae()) vae_terms.push_back(model::vae_loss(*f.vae, f.context));
        if (model.has_decoder()) {
          const auto out = model.decode(g, f.hidden, ex.tokens, ad::Mode::train, rng);
          decoder_terms.push_back(
              model::decoder_loss(out.logits, ex.tokens, nn::TokenVocabulary::padding));
        }
      }
      if (labeled.empty() && all.empty()) continue;

      LossParts<Var> parts;
      if (labeled.empty()) {
        parts.regression = g.constant(ad::Tensor::scalar(0.0));
      } else {
        const Var pred = model.regress(g, ad::concat_rows(labeled), ad::Mode::train, rng);
        parts.regression = model::regression_loss(pred, gold, plan.loss);
        const auto pv = pred.value().values();
        totals.pred.insert(totals.pred.end(), pv.begin(), pv.end());
        totals.gold.insert(totals.gold.end(), gold.begin(), gold.end());
      }
      if (model.has_discriminator()) {
        const Var logits = model.discriminate(g, ad::concat_rows(all), reversal);
        parts.discriminator = model::cross_entropy(logits, labels);
        totals.count_hits(logits.value(), labels);
      }
      if (model.has_vae()) parts.vae = mean_of(g, vae_terms);
      if (model.has_decoder()) parts.decoder = mean_of(g, decoder_terms);

      LossParts<double> values;
      eval::LossMap losses;
      auto take = [&](const std::optional<Var>& v, std::optional<double>& slot, const char* name) {
        if (!v) return;
        slot = v->value().item();
        losses[name] = *slot;
      };
      take(parts.regression, values.regression, "regression");
      take(parts.discriminator, values.discriminator, "discriminator");
      take(parts.vae, values.vae, "vae");
      take(parts.decoder, values.decoder, "decoder");
      losses["objective"] = model::compose_loss(values, plan.weights, lambda, variant);

      const Var loss = model::training_loss(parts, plan.weights, variant);
      optimizer.step(g.backward(loss));
      totals.add(losses);
      report.batches.push_back({epoch + 1, ++batch_no, losses});
    }
    report.append(finish_epoch(epoch, lambda, totals, model, validation));
    if (on_epoch) on_epoch(report.epochs.back());
  }
  return report;
}

eval::TrainingReport train_multitask(CwiModel& model, std::span<const corpus::EncodedExample> cwi,
                                     std::span<const corpus::EncodedSimplification> simplification,
                                     const RunPlan& plan,
                                     std::span<const corpus::EncodedExample> validation,
                                     const EpochCallback& on_epoch) {
  plan.validate();
  if (model.config().variant != Variant::multitask_da) {
    throw ConfigError("train_multitask needs a multitask-da model");
  }
  if (simplification.empty()) throw ConfigError("simplification corpus is empty");
  if (cwi.empty()) throw ConfigError("lexical complexity corpus is empty");
  if (model.config().groups.size() != 2) {
    throw ConfigError("the task discriminator needs exactly 2 groups");
  }

  AdamW optimizer = make_optimizer(model, plan);
  Rng rng = derive_rng(plan.seed, "dropout");
  eval::TrainingReport report;
  report.variant = std::string(model::to_string(Variant::multitask_da));
  report.seed = plan.seed;
  const auto e2_size = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(plan.simplification_ratio * static_cast<double>(plan.batch_size))));

  for (std::size_t epoch = 0; epoch < plan.epochs; ++epoch) {
    const double lambda = current_lambda(plan, epoch);
    const double reversal = plan.weights.beta * lambda;
    const auto order1 = shuffled(cwi.size(), plan.seed, "batches/" + std::to_string(epoch));
    const auto order2 =
        shuffled(simplification.size(), plan.seed, "simplification/" + std::to_string(epoch));
    const auto batches1 = chunks(order1, plan.batch_size);
    const auto batches2 = chunks(order2, e2_size);
    const std::size_t steps = std::max(batches1.size(), batches2.size());
    EpochTotals totals;
    for (std::size_t step = 0; step < steps; ++step) {
      Graph g;
      std::vector<Var> labeled, all, mlm_terms;
      std::vector<double> gold;
      std::vector<std::size_t> labels;
      for (auto idx : batches1[step % batches1.size()]) {
        const auto& ex = cwi[idx];
        const auto f = model.extract(g, {ex.chars, ex.tokens}, ad::Mode::train, rng);
        labeled.push_back(f.concat);
        gold.push_back(ex.gold);
        all.push_back(f.concat);
        labels.push_back(0);
      }
      for (auto idx : batches2[step % batches2.size()]) {
        const auto& ex = simplification[idx];
        const auto f = model.extract(g, {ex.chars, ex.tokens}, ad::Mode::train, rng);
        all.push_back(f.concat);
        labels.push_back(1);
        const Var logits = model.mask_and_predict(g, ex.tokens, ex.position, ad::Mode::train, rng);
        const std::size_t answer[] = {static_cast<std::size_t>(ex.answer)};
        mlm_terms.push_back(model::cross_entropy(logits, answer));
      }

      LossParts<Var> parts;
      const Var pred = model.regress(g, ad::concat_rows(labeled), ad::Mode::train, rng);
      parts.regression = model::regression_loss(pred, gold, plan.loss);
      const auto pv = pred.value().values();
      totals.pred.insert(totals.pred.end(), pv.begin(), pv.end());
      totals.gold.insert(totals.gold.end(), gold.begin(), gold.end());
      parts.mlm = mean_of(g, mlm_terms);
      const Var logits = model.discriminate(g, ad::concat_rows(all), reversal);
      parts.task = model::cross_entropy(logits, labels);
      totals.count_hits(logits.value(), labels);

      LossParts<double> values;
      values.regression = parts.regression->value().item();
      values.mlm = parts.mlm->value().item();
      values.task = parts.task->value().item();
      eval::LossMap losses{{"regression", *values.regression},
                           {"mlm", *values.mlm},
                           {"task", *values.task}};
      losses["objective"] = model::compose_loss(values, plan.weights, lambda, Variant::multitask_da);

      optimizer.step(g.backward(model::training_loss(parts, plan.weights, Variant::multitask_da)));
      totals.add(losses);
      report.batches.push_back({epoch + 1, step + 1, losses});
    }
    report.append(finish_epoch(epoch, lambda, totals, model, validation));
    if (on_epoch) on_epoch(report.epochs.back());
  }
  return report;
}

}  // namespace lexda::training
