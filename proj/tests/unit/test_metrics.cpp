#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lexda/app/pipeline.hpp"
#include "lexda/error.hpp"
#include "lexda/eval/evaluate.hpp"
#include "lexda/eval/metrics.hpp"
#include "lexda/eval/report.hpp"
#include "lexda/random.hpp"

using namespace lexda;
using eval::mae;
using eval::pearson;

namespace {

using Vec = std::vector<double>;

Vec random_vec(Rng& rng, std::size_t n) {
  Vec v(n);
  for (auto& x : v) x = uniform01(rng);
  return v;
}

std::vector<std::string> random_groups(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::string> g(n);
  for (auto& s : g) s = "g" + std::to_string(uniform_index(rng, k));
  return g;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("pearson examples") {
  CHECK(pearson(Vec{1, 2, 3}, Vec{1, 2, 3}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson(Vec{1, 2, 3}, Vec{3, 2, 1}) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(pearson(Vec{1, 2, 3, 4}, Vec{1, 3, 2, 4}) - 0.8) < 1e-9);
  CHECK_THROWS_AS(pearson(Vec{1, 1, 1}, Vec{1, 2, 3}), UndefinedMetricError);
  CHECK_THROWS_AS(pearson(Vec{1, 2, 3}, Vec{2, 2, 2}), UndefinedMetricError);
  CHECK_THROWS_AS(pearson(Vec{1}, Vec{1}), ContractError);
  CHECK_THROWS_AS(pearson(Vec{1, 2}, Vec{1, 2, 3}), ContractError);
}

TEST_CASE("pearson under affine maps") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng = derive_rng(seed, "pearson-affine");
    const std::size_t n = 2 + uniform_index(rng, 40);
    const Vec x = random_vec(rng, n), y = random_vec(rng, n);
    const double r = pearson(x, y);
    CHECK(r >= -1.0);
    CHECK(r <= 1.0);
    const double a = uniform(rng, 0.1, 10), b = uniform(rng, -5, 5);
    Vec ax = x, neg = x;
    for (std::size_t i = 0; i < n; ++i) {
      ax[i] = a * x[i] + b;
      neg[i] = -a * x[i] + b;
    }
    CHECK(std::abs(pearson(ax, y) - r) < 1e-10);
    CHECK(std::abs(pearson(y, ax) - r) < 1e-10);
    CHECK(std::abs(pearson(neg, y) + r) < 1e-10);
  }
}

TEST_CASE("mae examples and symmetry") {
  CHECK(mae(Vec{0.3, 0.7}, Vec{0.3, 0.7}) == 0.0);
  CHECK(mae(Vec{0, 1}, Vec{1, 0}) == 1.0);
  CHECK(std::abs(mae(Vec{.2, .4, .9}, Vec{.1, .5, .7}) - 0.4 / 3.0) < 1e-9);
  CHECK(std::abs(mae(Vec{.2, .4, .9}, Vec{.1, .5, .7}) - 0.133333) < 1e-6);
  CHECK_THROWS_AS(mae(Vec{}, Vec{}), ContractError);
  CHECK_THROWS_AS(mae(Vec{1}, Vec{1, 2}), ContractError);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng = derive_rng(seed, "mae");
    const std::size_t n = 1 + uniform_index(rng, 30);
    const Vec x = random_vec(rng, n), y = random_vec(rng, n);
    CHECK(mae(x, y) == mae(y, x));
    CHECK(mae(x, y) >= 0.0);
  }
}

TEST_CASE("discriminator accuracy and tie-breaking") {
  const std::vector<std::vector<double>> right{{2, 0}, {0, 3}, {1, 0}};
  const std::size_t labels[] = {0, 1, 0};
  CHECK(eval::discriminator_accuracy(right, labels) == 1.0);
  CHECK(eval::argmax(Vec{1, 3, 3}) == 1);

  const std::vector<std::vector<double>> flat(10, {0.5, 0.5});
  const std::size_t balanced[] = {0, 1, 0, 1, 0, 1, 1, 0, 0, 0};
  CHECK(eval::discriminator_accuracy(flat, balanced) == 0.6);

  for (std::size_t k : {2, 3, 5}) {
    Rng rng = derive_rng(k, "chance");
    const std::size_t n = 10000;
    ad::Tensor logits({n, k});
    std::vector<std::size_t> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
      ys[i] = i % k;
      for (std::size_t c = 0; c < k; ++c) logits.at(i, c) = standard_normal(rng);
    }
    CHECK(std::abs(eval::discriminator_accuracy(logits, ys) - 1.0 / static_cast<double>(k)) < 0.02);
  }
}

TEST_CASE("scoring tables") {
  const Vec gold{0.1, 0.5, 0.7, 0.3};
  const std::vector<std::string> one(4, "en");
  const auto single = eval::score(gold, gold, one);
  REQUIRE(single.groups.size() == 1);
  CHECK(single.overall.mae == single.groups[0].mae);
  CHECK(single.overall.pearson == single.groups[0].pearson);
  CHECK(single.overall.count == 4);
  CHECK(single.overall.mae == 0.0);
  CHECK(*single.overall.pearson == doctest::Approx(1.0).epsilon(1e-12));

  // clamping happens here only
  const auto clamped = eval::score(Vec{-0.5, 1.5}, Vec{0.0, 1.0}, std::vector<std::string>(2, "x"));
  CHECK(clamped.overall.mae == 0.0);

  const std::vector<std::string> mixed{"a", "a", "b", "a"};
  const auto lonely = eval::score(Vec{0.2, 0.4, 0.9, 0.1}, gold, mixed);
  REQUIRE(lonely.find("b") != nullptr);
  CHECK(!lonely.find("b")->pearson.has_value());
  CHECK(lonely.find("b")->mae == doctest::Approx(0.2));
  CHECK(lonely.find("missing") == nullptr);
  CHECK(lonely.groups.front().group == "a");
}

TEST_CASE("score is permutation invariant and overall MAE is the weighted group mean") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng = derive_rng(seed, "score");
    const std::size_t n = 4 + uniform_index(rng, 60);
    const Vec pred = random_vec(rng, n), gold = random_vec(rng, n);
    const auto groups = random_groups(rng, n, 1 + uniform_index(rng, 4));
    const auto table = eval::score(pred, gold, groups);

    double weighted = 0;
    std::size_t total = 0;
    for (const auto& g : table.groups) {
      weighted += g.mae * static_cast<double>(g.count);
      total += g.count;
    }
    CHECK(total == n);
    CHECK(std::abs(weighted / static_cast<double>(n) - table.overall.mae) < 1e-12);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    shuffle(order.begin(), order.end(), rng);
    Vec p2(n), g2(n);
    std::vector<std::string> gr2(n);
    for (std::size_t i = 0; i < n; ++i) {
      p2[i] = pred[order[i]];
      g2[i] = gold[order[i]];
      gr2[i] = groups[order[i]];
    }
    const auto again = eval::score(p2, g2, gr2);
    CHECK(std::abs(again.overall.mae - table.overall.mae) < 1e-12);
    REQUIRE(again.groups.size() == table.groups.size());
    for (std::size_t i = 0; i < table.groups.size(); ++i) {
      CHECK(again.groups[i].group == table.groups[i].group);
      CHECK(std::abs(again.groups[i].mae - table.groups[i].mae) < 1e-12);
      CHECK(again.groups[i].pearson.has_value() == table.groups[i].pearson.has_value());
      if (table.groups[i].pearson) CHECK(std::abs(*again.groups[i].pearson - *table.groups[i].pearson) < 1e-10);
    }
  }
}

TEST_CASE("evaluate agrees with scoring the model's predictions") {
  app::RunConfig config;
  config.seed = 2;
  config.model.d_model = 8;
  config.model.heads = 2;
  config.model.feed_forward = 8;
  config.data.synthetic.per_domain = 20;
  const auto data = app::load_run_data(config);
  const auto bundle = app::build_model(config, data);
  const auto encoded = bundle.encode(data.train);
  std::vector<std::string> groups;
  Vec gold;
  for (const auto& ex : data.train) {
    groups.push_back(ex.group);
    gold.push_back(ex.gold_complexity);
  }
  const auto pred = eval::predict(*bundle.model, encoded);
  const auto table = eval::evaluate(*bundle.model, encoded, groups);
  const auto expected = eval::score(pred, gold, groups);
  CHECK(table.overall.mae == expected.overall.mae);
  CHECK(table.groups.size() == expected.groups.size());
}

TEST_CASE("metrics table text round trip") {
  Rng rng = derive_rng(3, "table");
  const std::size_t n = 30;
  const auto table = eval::score(random_vec(rng, n), random_vec(rng, n),
                                 std::vector<std::string>{"a", "a", "b", "c", "c", "c", "a", "b", "b", "c",
                                                          "a", "a", "b", "c", "c", "c", "a", "b", "b", "c",
                                                          "a", "a", "b", "c", "c", "c", "a", "b", "b", "d"});
  std::stringstream text;
  eval::write_metrics_table(text, table);
  const auto back = eval::read_metrics_table(text);
  CHECK(back.overall.mae == table.overall.mae);
  CHECK(back.overall.pearson == table.overall.pearson);
  REQUIRE(back.groups.size() == table.groups.size());
  for (std::size_t i = 0; i < table.groups.size(); ++i) {
    CHECK(back.groups[i].group == table.groups[i].group);
    CHECK(back.groups[i].count == table.groups[i].count);
    CHECK(back.groups[i].pearson == table.groups[i].pearson);
    CHECK(back.groups[i].mae == table.groups[i].mae);
  }
  CHECK(!back.find("d")->pearson.has_value());

  std::istringstream bad("group\tcount\tpearson\tmae\noverall\t3\tx\t0.1\n");
  CHECK_THROWS_AS(eval::read_metrics_table(bad), ValidationError);
}

TEST_CASE("training report contract and jsonl round trip") {
  eval::TrainingReport report;
  report.variant = "base-da";
  report.seed = 11;
  for (std::size_t e = 1; e <= 3; ++e) {
    eval::EpochRecord r;
    r.epoch = e;
    r.lambda = 0.1 * static_cast<double>(e - 1);
    r.losses = {{"regression", 0.3 / static_cast<double>(e)}, {"objective", 0.25}};
    r.val_pearson = 0.1 * static_cast<double>(e);
    r.val_mae = 0.2;
    r.discriminator_accuracy = 0.55;
    report.append(r);
  }
  eval::EpochRecord skipped;
  skipped.epoch = 5;
  CHECK_THROWS_AS(report.append(skipped), ContractError);
  eval::EpochRecord nonfinite;
  nonfinite.epoch = 4;
  nonfinite.losses["regression"] = std::nan("");
  CHECK_THROWS_AS(report.append(nonfinite), ContractError);

  report.final_metrics = eval::score(Vec{0.1, 0.4, 0.6}, Vec{0.2, 0.3, 0.7}, std::vector<std::string>(3, "x"));
  std::stringstream text;
  eval::write_jsonl(text, report);
  const auto back = eval::read_jsonl(text);
  CHECK(back.variant == report.variant);
  CHECK(back.seed == report.seed);
  REQUIRE(back.epochs.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.epochs[i].epoch == i + 1);
    CHECK(back.epochs[i].lambda == report.epochs[i].lambda);
    CHECK(back.epochs[i].losses == report.epochs[i].losses);
    CHECK(back.epochs[i].val_pearson == report.epochs[i].val_pearson);
    CHECK(!back.epochs[i].train_pearson.has_value());
  }
  REQUIRE(back.final_metrics.has_value());
  CHECK(back.final_metrics->overall.mae == report.final_metrics->overall.mae);

  std::stringstream again;
  eval::write_jsonl(again, back);
  std::stringstream first;
  eval::write_jsonl(first, report);
  CHECK(again.str() == first.str());

  std::istringstream bad("{\"type\":\"epoch\"\n");
  CHECK_THROWS_AS(eval::read_jsonl(bad), ValidationError);
}

}
