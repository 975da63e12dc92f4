#include <doctest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "lexda/corpus/parsers.hpp"
#include "lexda/eval/metrics.hpp"
#include "lexda/eval/report.hpp"
#include "lexda/nn/checkpoint.hpp"

using namespace lexda;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = cli::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "lexda-cli-tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::vector<std::string> kSmall = {
    "--set", "data.synthetic.per_domain=32", "--set", "model.d_model=16",   "--set", "model.heads=2",
    "--set", "model.feed_forward=16",        "--set", "model.char_hidden=8", "--set", "training.epochs=2",
    "--set", "data.validation_fraction=0.25"};

std::vector<std::string> train_args(const fs::path& out, const std::string& variant) {
  std::vector<std::string> args{"train", "--out", out.string(), "--seed", "3", "--set", "variant=" + variant};
  args.insert(args.end(), kSmall.begin(), kSmall.end());
  return args;
}

// trains the shared base model once
const fs::path& base_run() {
  static const fs::path dir = [] {
    const auto d = fresh_dir("base");
    const auto r = run(train_args(d, "base"));
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("train writes a report per epoch, a checkpoint and the effective config") {
  const auto& dir = base_run();
  std::ifstream report(dir / "report.jsonl");
  const auto parsed = eval::read_jsonl(report);
  CHECK(parsed.variant == "base");
  CHECK(parsed.epochs.size() == 2);
  CHECK(fs::exists(dir / "checkpoint.json"));
  CHECK(fs::exists(dir / "effective_config.json"));
  CHECK(slurp(dir / "effective_config.json").find("\"seed\": 3") != std::string::npos);
}

TEST_CASE("train reruns are byte-identical") {
  const auto dir = fresh_dir("rerun");
  REQUIRE(run(train_args(dir, "base")).code == 0);
  CHECK(slurp(dir / "report.jsonl") == slurp(base_run() / "report.jsonl"));
  CHECK(slurp(dir / "checkpoint.json") == slurp(base_run() / "checkpoint.json"));
}

TEST_CASE("configuration errors exit with 2") {
  const auto dir = fresh_dir("bad");
  auto r = run(train_args(dir, "giant"));
  CHECK(r.code == 2);
  CHECK(r.err.find("multitask-da") != std::string::npos);
  r = run({"train", "--out", dir.string(), "--set", "model.nonsense=1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("model.nonsense") != std::string::npos);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"train"}).code == 2);
  CHECK(run({"synth", "--out", dir.string(), "--set", "data.synthetic.domains=0"}).code == 2);
}

TEST_CASE("corpus errors exit with 3") {
  const auto dir = fresh_dir("corpus");
  std::ofstream(dir / "broken.tsv") << "id\tcorpus\tsentence\ttoken\tcomplexity\na\tx\tA b.\tb\t7\n";
  const auto r = run({"train", "--out", dir.string(), "--set", "data.format=complex", "--set",
                      "data.train=[\"" + (dir / "broken.tsv").string() + "\"]"});
  CHECK(r.code == 3);
  CHECK(r.err.find("line 2") != std::string::npos);
}

TEST_CASE("evaluate prints a table that parses back") {
  const auto& dir = base_run();
  const auto out = fresh_dir("evaluate");
  const auto corpus = out / "synthetic.tsv";
  REQUIRE(run({"synth", "--out", out.string(), "--set", "data.synthetic.per_domain=10"}).code == 0);
  const auto r = run({"evaluate", "--checkpoint", (dir / "checkpoint.json").string(), "--out", out.string(),
                      corpus.string()});
  REQUIRE(r.code == 0);
  std::istringstream text(r.out);
  const auto table = eval::read_metrics_table(text);
  CHECK(table.overall.count == 20);
  CHECK(table.groups.size() == 2);
  CHECK(slurp(out / "metrics.tsv") == r.out);

  CHECK(run({"evaluate", "--checkpoint", (out / "nope.json").string(), corpus.string()}).code == 2);
  const auto mismatch = run({"evaluate", "--checkpoint", (dir / "checkpoint.json").string(), "--set",
                             "model.d_model=24", corpus.string()});
  CHECK(mismatch.code == 4);
}

TEST_CASE("an oracle checkpoint scores MAE 0") {
  const auto& dir = base_run();
  const auto out = fresh_dir("oracle");
  auto ck = nn::load_checkpoint(dir / "checkpoint.json");
  for (auto& [name, tensor] : ck.tensors) {
    if (name.rfind("head.", 0) == 0) tensor = ad::Tensor::zeros(tensor.shape());
  }
  REQUIRE(ck.tensors.count("head.third.bias") == 1);
  ck.tensors.at("head.third.bias")[0] = 0.25;
  nn::save_checkpoint(out / "oracle.json", ck);

  REQUIRE(run({"synth", "--out", out.string(), "--set", "data.synthetic.per_domain=10"}).code == 0);
  auto rows = corpus::parse_complex_lcp(out / "synthetic.tsv");
  for (auto& row : rows) row.gold_complexity = 0.25;
  corpus::write_complex_lcp(out / "constant.tsv", rows);

  const auto r = run({"evaluate", "--checkpoint", (out / "oracle.json").string(), (out / "constant.tsv").string()});
  REQUIRE(r.code == 0);
  std::istringstream text(r.out);
  const auto table = eval::read_metrics_table(text);
  CHECK(table.overall.mae == 0.0);
  for (const auto& g : table.groups) CHECK(g.mae == 0.0);
}

TEST_CASE("predict prints one deterministic value in [0, 1]") {
  const auto ck = (base_run() / "checkpoint.json").string();
  const std::vector<std::string> args{"predict", "--checkpoint", ck, "the sofo of words .", "4", "8"};
  const auto a = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == run(args).out);
  REQUIRE(!a.out.empty());
  CHECK(a.out.back() == '\n');
  CHECK(a.out.find('\n') == a.out.size() - 1);
  double v = -1;
  const auto line = a.out.substr(0, a.out.size() - 1);
  CHECK(std::from_chars(line.data(), line.data() + line.size(), v).ec == std::errc{});
  CHECK(v >= 0.0);
  CHECK(v <= 1.0);

  CHECK(run({"predict", "--checkpoint", ck, "--target", "sofo of", "the sofo of words .", "4", "11"}).code == 0);
  CHECK(run({"predict", "--checkpoint", ck, "--target", "cat", "the sofo of words .", "4", "8"}).code == 2);
  CHECK(run({"predict", "--checkpoint", ck, "the sofo .", "4", "40"}).code == 2);
}

TEST_CASE("synth writes parseable, seeded corpora") {
  const auto a = fresh_dir("synth-a"), b = fresh_dir("synth-b");
  const std::vector<std::string> spec{"--set", "data.synthetic.domains=2", "--set", "data.synthetic.per_domain=100",
                                      "--seed", "8"};
  auto args_a = std::vector<std::string>{"synth", "--out", a.string()};
  auto args_b = std::vector<std::string>{"synth", "--out", b.string()};
  args_a.insert(args_a.end(), spec.begin(), spec.end());
  args_b.insert(args_b.end(), spec.begin(), spec.end());
  REQUIRE(run(args_a).code == 0);
  REQUIRE(run(args_b).code == 0);
  CHECK(corpus::parse_complex_lcp(a / "synthetic.tsv").size() == 200);
  CHECK(slurp(a / "synthetic.tsv") == slurp(b / "synthetic.tsv"));
}

}
