#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "lexda/app/config.hpp"
#include "lexda/error.hpp"

using namespace lexda;
using model::Variant;

namespace {

std::filesystem::path write_config(const std::string& name, const std::string& text) {
  const auto dir = std::filesystem::temp_directory_path() / "lexda-config-tests";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults") {
  const auto c = app::load_config(std::nullopt, {});
  CHECK(c.model.variant == Variant::base_da);
  CHECK(c.plan.weights.alpha_vae == 0.1);
  CHECK(c.plan.weights.alpha_dec == 0.01);
  CHECK(c.plan.weights.beta == 0.2);
  CHECK(c.plan.weights.gamma == 0.1);
  CHECK(c.plan.epochs == 8);
  CHECK(c.data.format == app::CorpusFormat::synthetic);
}

TEST_CASE("variant decides the default epoch count") {
  const std::string vae[] = {"variant=vae-da"};
  CHECK(app::load_config(std::nullopt, vae).plan.epochs == 12);
  const std::string da[] = {"variant=base-da"};
  CHECK(app::load_config(std::nullopt, da).plan.epochs == 8);
  const std::string pinned[] = {"variant=vae-da", "training.epochs=3"};
  CHECK(app::load_config(std::nullopt, pinned).plan.epochs == 3);
}

TEST_CASE("unknown keys and values are rejected by name") {
  const std::string typo[] = {"training.learnin_rate=0.1"};
  try {
    app::load_config(std::nullopt, typo);
    FAIL("unknown key accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("training.learnin_rate") != std::string::npos);
  }
  const std::string variant[] = {"variant=giant"};
  try {
    app::load_config(std::nullopt, variant);
    FAIL("unknown variant accepted");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const char* v : {"base", "base-da", "vae-da", "decoder-da", "multitask-da"}) {
      CHECK(msg.find(v) != std::string::npos);
    }
  }
  const std::string wrong_type[] = {"training.batch_size=\"many\""};
  CHECK_THROWS_AS(app::load_config(std::nullopt, wrong_type), ConfigError);
  const std::string negative[] = {"loss.beta=-1"};
  CHECK_THROWS_AS(app::load_config(std::nullopt, negative), ConfigError);
  const std::string no_equals[] = {"seed"};
  CHECK_THROWS_AS(app::load_config(std::nullopt, no_equals), ConfigError);

  const auto file = write_config("bad.json", R"({"model": {"d_modle": 8}})");
  CHECK_THROWS_AS(app::load_config(file, {}), ConfigError);
}

TEST_CASE("layering: file, then overrides, then seed") {
  const auto file = write_config("layers.json", R"({"seed": 4, "variant": "base-da",
                                                    "training": {"batch_size": 16},
                                                    "loss": {"beta": 0.5}})");
  const std::string overrides[] = {"loss.beta=0.3", "model.pooling=mean"};
  const auto c = app::load_config(file, overrides);
  CHECK(c.seed == 4);
  CHECK(c.model.variant == Variant::base_da);
  CHECK(c.plan.batch_size == 16);
  CHECK(c.plan.weights.beta == 0.3);
  CHECK(c.model.pooling == nn::Pooling::mean);
  CHECK(app::load_config(file, overrides, 99).seed == 99);
  CHECK_THROWS_AS(app::load_config(write_config("nojson.json", "{"), {}), ConfigError);
}

TEST_CASE("json round trip is a fixed point") {
  const std::string overrides[] = {"variant=decoder-da", "data.synthetic.per_domain=33",
                                   "training.lambda_override=0.25", "data.max_examples=12",
                                   "training.unlabeled_groups=[\"domain1\"]"};
  const auto c = app::load_config(std::nullopt, overrides, 5);
  const auto doc = app::to_json(c);
  const auto back = app::config_from_json(doc);
  CHECK(app::to_json(back) == doc);
  CHECK(back.model.variant == Variant::decoder_da);
  CHECK(back.data.synthetic.per_domain == 33);
  CHECK(back.plan.lambda_override == 0.25);
  CHECK(back.data.max_examples == 12);
  CHECK(back.plan.unlabeled_groups == std::vector<std::string>{"domain1"});
  CHECK(back.seed == 5);
}

}
