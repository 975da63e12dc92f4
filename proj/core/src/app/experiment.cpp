#include "lexda/app/experiment.hpp"

#include <chrono>
#include <ostream>

#include <spdlog/spdlog.h>

#include "lexda/corpus/batching.hpp"
#include "lexda/error.hpp"
#include "lexda/eval/evaluate.hpp"
#include "lexda/eval/metrics.hpp"

namespace lexda::app {

ShiftExperiment default_shift_experiment() {
  ShiftExperiment e;
  e.corpus.domains = 2;
  e.corpus.source_domains = 1;
  e.corpus.per_domain = 400;
  e.corpus.fillers_per_domain = 6;
  e.corpus.min_fillers = 8;
  e.corpus.max_fillers = 14;
  e.corpus.noise = 0.1;
  e.corpus.spurious_strength = 1.0;
  e.corpus.target_marker_rate = 0.0;

  auto& m = e.model;
  m.d_model = 32;
  m.layers = 1;
  m.heads = 2;
  m.feed_forward = 64;
  m.pooling = nn::Pooling::mean;
  m.char_hidden = 16;
  m.head_hidden1 = 32;
  m.head_hidden2 = 16;
  m.disc_hidden1 = 32;
  m.disc_hidden2 = 16;

  auto& p = e.plan;
  p.epochs = 16;
  p.batch_size = 32;
  p.optimizer.learning_rate = 1e-3;
  p.discriminator_learning_rate = 1e-2;
  p.weights.beta = 1.0;
  p.weights.gamma = 0.3;
  p.unlabeled_groups = {corpus::synthetic_domain_name(1)};
  return e;
}

ShiftOutcome run_shift_seed(const ShiftExperiment& experiment, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  if (experiment.corpus.domains != 2 || experiment.corpus.source_domains != 1) {
    throw ConfigError("the shift experiment needs one source and one target domain");
  }
  const auto examples = corpus::gen_synthetic_domains(experiment.corpus, seed);
  const auto vocab = corpus::build_vocabularies(examples);
  const auto labels = corpus::LabelSet::from_examples(examples);
  const std::string target = corpus::synthetic_domain_name(1);
  const auto per_domain = experiment.corpus.per_domain;
  const auto cut = static_cast<std::size_t>(experiment.train_share * static_cast<double>(per_domain));
  if (cut == 0 || cut >= per_domain) throw ConfigError("train_share leaves an empty side");

  std::vector<corpus::EncodedExample> train, test;
  std::vector<std::string> test_groups;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    auto e = corpus::encode(examples[i], vocab, labels, experiment.model.limits);
    const bool in_target = examples[i].group == target;
    if (i % per_domain < cut) {
      train.push_back(std::move(e));
    } else if (in_target) {
      test.push_back(std::move(e));
      test_groups.push_back(target);
    }
  }

  auto fit = [&](model::Variant variant, std::optional<double> lambda) {
    auto config = experiment.model;
    config.variant = variant;
    config.groups = labels.names();
    auto m = std::make_unique<model::CwiModel>(config, vocab.chars.size(), vocab.tokens.size(), seed);
    auto plan = experiment.plan;
    plan.seed = seed;
    plan.lambda_override = lambda;
    // base skips the unlabeled target rows entirely
    training::train_single_task(*m, train, plan);
    return m;
  };

  ShiftOutcome out;
  out.seed = seed;
  const auto base = fit(model::Variant::base, std::nullopt);
  out.base_target_mae = eval::evaluate(*base, test, test_groups).overall.mae;

  const auto da = fit(model::Variant::base_da, std::nullopt);
  out.da_target_mae = eval::evaluate(*da, test, test_groups).overall.mae;
  std::vector<std::size_t> domain;
  domain.reserve(train.size());
  for (const auto& e : train) domain.push_back(static_cast<std::size_t>(e.group));
  out.da_discriminator_accuracy = eval::discriminator_accuracy(eval::discriminator_logits(*da, train), domain);
  auto probe = experiment.probe;
  probe.seed = seed;
  out.da_probe_accuracy = training::probe_discriminator(*da, train, labels.size(), probe).heldout_accuracy;

  const auto control = fit(model::Variant::base_da, 0.0);
  out.control_probe_accuracy = training::probe_discriminator(*control, train, labels.size(), probe).heldout_accuracy;

  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  spdlog::info("seed {}: base MAE {:.4f}, base-da MAE {:.4f}, discriminator {:.3f}, control probe {:.3f}",
               seed, out.base_target_mae, out.da_target_mae, out.da_discriminator_accuracy,
               out.control_probe_accuracy);
  return out;
}

void write_shift_table(std::ostream& out, std::span<const ShiftOutcome> outcomes) {
  out << "seed\tbase_mae\tda_mae\tda_wins\tda_discriminator_accuracy\tcontrol_probe_accuracy\tda_probe_accuracy\n";
  for (const auto& o : outcomes) {
    out << o.seed << '\t' << o.base_target_mae << '\t' << o.da_target_mae << '\t' << (o.da_wins() ? 1 : 0)
        << '\t' << o.da_discriminator_accuracy << '\t' << o.control_probe_accuracy << '\t'
        << o.da_probe_accuracy << '\n';
  }
}

}  // namespace lexda::app
