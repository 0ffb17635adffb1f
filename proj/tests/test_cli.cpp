#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// Black-box tests of the ovl binary: every test shells out to the real
// executable (path injected as OVL_CLI_PATH) and checks exit codes, output
// bytes, and the JSON/text contracts. Repo files resolve via OVL_REPO_DIR.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ovl/core_math.hpp"
#include "ovl/dataset_io.hpp"
#include "ovl/errors.hpp"
#include "ovl/evalbench.hpp"
#include "ovl/model.hpp"
#include "ovl/rng.hpp"

using nlohmann::ordered_json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

/// Run the binary through /bin/sh, capturing stdout. `env_prefix` may carry
/// VAR=value assignments; stderr is discarded (messages are for humans).
CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  const std::string cmd =
      env_prefix + std::string(OVL_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) std::abort();
  std::string out;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  CliResult res;
  if (WIFEXITED(status)) res.exit_code = WEXITSTATUS(status);
  res.out = std::move(out);
  return res;
}

const std::string& tmp_dir() {
  static const std::string dir = [] {
    char tmpl[] = "/tmp/ovl_cli_XXXXXX";
    const char* d = mkdtemp(tmpl);
    if (d == nullptr) std::abort();
    return std::string(d);
  }();
  return dir;
}

std::string tmp_path(const std::string& name) { return tmp_dir() + "/" + name; }

const std::string kRefConfig = std::string(OVL_REPO_DIR) + "/configs/reference_benchmark.json";

/// Reports parsed back from the JSON the CLI emitted, so table formatting can
/// be checked against an independently rendered eval_table.
std::vector<ovl::EvalReport> parse_reports(const std::string& text) {
  const ordered_json root = ordered_json::parse(text);
  std::vector<ovl::EvalReport> reports;
  for (const auto& item : root) {
    ovl::EvalReport rep;
    rep.variant = item.at("variant").get<std::string>();
    rep.seed = item.at("seed").get<std::uint64_t>();
    rep.acc_base = item.at("acc_base").get<double>();
    rep.acc_new = item.at("acc_new").get<double>();
    rep.h = item.at("h").get<double>();
    rep.dis = item.at("dis").get<double>();
    reports.push_back(std::move(rep));
  }
  return reports;
}

/// A dataset whose features carry no class signal: orthogonal unit
/// embeddings, iid Gaussian features. Argmax classification of an untrained
/// model is a fair coin per sample.
ovl::Dataset symmetric_two_class_fixture() {
  ovl::Dataset ds;
  ds.d = 4;
  ovl::DatasetClass a;
  a.name = "alpha";
  a.superclass = "root";
  a.embedding = ovl::FeatureVector::Unit(4, 0);
  a.role = "base";
  ovl::DatasetClass b;
  b.name = "beta";
  b.superclass = "root";
  b.embedding = ovl::FeatureVector::Unit(4, 1);
  b.role = "new";
  ds.classes = {a, b};
  ovl::rng::Stream stream(ovl::rng::derive(424242, "symmetric-fixture"));
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < 200; ++i) {
      ovl::Sample s;
      s.class_id = c;
      s.feature = stream.gaussian_vector(4, 1.0);
      s.provenance = ovl::Provenance::Seen;
      ds.samples.add(std::move(s));
    }
  }
  return ds;
}

/// The small taxonomy used by the plain-mode generate tests: three base
/// classes in two superclasses, two candidates, a handful of Seen shots.
std::string write_plain_taxonomy() {
  const std::string path = tmp_path("tax.json");
  ovl::Dataset ds;
  ds.d = 4;
  auto cls = [](const char* name, const char* super, std::initializer_list<double> e,
                const char* role) {
    ovl::DatasetClass dc;
    dc.name = name;
    dc.superclass = super;
    dc.embedding = ovl::FeatureVector(4);
    int i = 0;
    for (double v : e) dc.embedding[i++] = v;
    dc.role = role;
    return dc;
  };
  ds.classes = {cls("oak", "tree", {1, 0, 0, 0}, "base"),
                cls("pine", "tree", {0.9, 0.1, 0, 0}, "base"),
                cls("rose", "flower", {0, 0, 1, 0}, "base"),
                cls("birch", "tree", {0.95, 0.05, 0, 0}, "new"),
                cls("tulip", "flower", {0, 0, 0.9, 0.1}, "new")};
  ovl::rng::Stream stream(ovl::rng::derive(11, "plain-taxonomy"));
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 4; ++i) {
      ovl::Sample s;
      s.class_id = c;
      s.feature = ds.classes[static_cast<std::size_t>(c)].embedding.normalized() +
                  stream.gaussian_vector(4, 0.1);
      s.provenance = ovl::Provenance::Seen;
      ds.samples.add(std::move(s));
    }
  }
  ovl::write_text_file(path, ovl::serialize_dataset(ds));
  return path;
}

}  // namespace

TEST_CASE("bounds verify-joint: acceptance invocation passes and is byte-stable") {
  const std::string args =
      "bounds verify-joint --alphabet 8 --m 200 --delta 0.1 --trials 1000 --seed 7";
  const CliResult a = run_cli(args);
  CHECK(a.exit_code == 0);
  const ordered_json rep = ordered_json::parse(a.out);
  CHECK(rep.at("trials").get<long>() == 1000);
  CHECK(rep.at("violation_rate").get<double>() <= 0.1);
  CHECK(rep.at("seed").get<std::uint64_t>() == 7);
  CHECK(rep.at("delta").get<double>() == doctest::Approx(0.1));

  const CliResult b = run_cli(args);
  CHECK(b.exit_code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("bounds verify-posterior: acceptance invocation passes") {
  const CliResult r = run_cli(
      "bounds verify-posterior --n-yu 10 --n-ye 5 --m 200 --delta 0.1 --trials 1000 "
      "--seed 7");
  CHECK(r.exit_code == 0);
  const ordered_json rep = ordered_json::parse(r.out);
  CHECK(rep.at("violation_rate").get<double>() <= 0.1);
  CHECK(rep.at("violations").get<long>() >= 0);
}

TEST_CASE("bounds: invalid flags exit 2") {
  CHECK(run_cli("bounds verify-joint --alphabet 8 --m 200 --delta 0.1 --trials 0 "
                "--seed 7")
            .exit_code == 2);
  // missing a required flag
  CHECK(run_cli("bounds verify-joint --alphabet 8 --delta 0.1 --trials 10").exit_code == 2);
  // delta outside (0,1)
  CHECK(run_cli("bounds verify-joint --alphabet 8 --m 200 --delta 1.5 --trials 10 "
                "--seed 7")
            .exit_code == 2);
  // no subcommand at all
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("bounds").exit_code == 2);
}

TEST_CASE("bounds: --out writes the same bytes as stdout") {
  const std::string out_path = tmp_path("bound_report.json");
  const CliResult r = run_cli(
      "bounds verify-joint --alphabet 6 --m 100 --delta 0.1 --trials 50 --seed 3 --out " +
      out_path);
  CHECK(r.exit_code == 0);
  CHECK(ovl::read_text_file(out_path) == r.out);
}

TEST_CASE("config file: unknown keys and bad values exit 2") {
  const std::string good = tmp_path("cfg_good.json");
  const std::string bad = tmp_path("cfg_bad.json");
  const std::string not_json = tmp_path("cfg_not_json.json");
  ovl::write_text_file(good, "{\"seed\": 9, \"epochs\": 1}\n");
  ovl::write_text_file(bad, "{\"seed\": 9, \"bogus\": 1}\n");
  ovl::write_text_file(not_json, "{seed: 9}\n");

  CHECK(run_cli("bounds verify-joint --alphabet 6 --m 100 --delta 0.1 --trials 10 "
                "--config " +
                good)
            .exit_code == 0);
  CHECK(run_cli("bounds verify-joint --alphabet 6 --m 100 --delta 0.1 --trials 10 "
                "--config " +
                bad)
            .exit_code == 2);
  CHECK(run_cli("bounds verify-joint --alphabet 6 --m 100 --delta 0.1 --trials 10 "
                "--config " +
                not_json)
            .exit_code == 2);
  CHECK(run_cli("bounds verify-joint --alphabet 6 --m 100 --delta 0.1 --trials 10 "
                "--config " +
                tmp_path("missing_config.json"))
            .exit_code == 2);
}

TEST_CASE("seed precedence: defaults < config < OVL_SEED < flags") {
  const std::string cfg = tmp_path("cfg_seed.json");
  ovl::write_text_file(cfg, "{\"seed\": 100}\n");
  auto seed_of = [](const CliResult& r) {
    return ordered_json::parse(r.out).at("seed").get<std::uint64_t>();
  };
  const std::string base_args =
      "bounds verify-joint --alphabet 6 --m 100 --delta 0.1 --trials 10";

  CHECK(seed_of(run_cli(base_args)) == 0);                              // default
  CHECK(seed_of(run_cli(base_args + " --config " + cfg)) == 100);      // config
  CHECK(seed_of(run_cli(base_args + " --config " + cfg, "OVL_SEED=200 ")) == 200);
  CHECK(seed_of(run_cli(base_args + " --config " + cfg + " --seed 300",
                        "OVL_SEED=200 ")) == 300);                     // flag wins
  CHECK(run_cli(base_args, "OVL_SEED=abc ").exit_code == 2);
}

TEST_CASE("generate: plain mode emits only generated provenance, deterministically") {
  const std::string tax = write_plain_taxonomy();
  const std::string out = tmp_path("gen_plain.json");
  const std::string args = "generate --taxonomy " + tax + " -o " + out +
                           " --k0 1 --k1 2 --k2 2 --n-unseen 4 --n-seen 2 --seed 9";
  CHECK(run_cli(args).exit_code == 0);
  const std::string bytes = ovl::read_text_file(out);
  const ovl::Dataset ds = ovl::parse_dataset(bytes);

  CHECK(ds.classes.size() == 5);  // class table is carried over unchanged
  REQUIRE(!ds.samples.empty());
  int n_unseen = 0;
  int n_seen = 0;
  for (const ovl::Sample& s : ds.samples.samples()) {
    CHECK(s.provenance != ovl::Provenance::Seen);
    if (s.provenance == ovl::Provenance::GeneratedUnseen) ++n_unseen;
    if (s.provenance == ovl::Provenance::GeneratedSeen) ++n_seen;
  }
  CHECK(n_unseen == 4);      // k0=1 predicted class, 4 samples
  CHECK(n_seen == 3 * 2);    // 3 base classes, 2 extras each

  const std::string out2 = tmp_path("gen_plain_rerun.json");
  CHECK(run_cli("generate --taxonomy " + tax + " -o " + out2 +
                " --k0 1 --k1 2 --k2 2 --n-unseen 4 --n-seen 2 --seed 9")
            .exit_code == 0);
  CHECK(ovl::read_text_file(out2) == bytes);
}

TEST_CASE("generate: k0 beyond the candidate pool saturates to all candidates") {
  const std::string tax = write_plain_taxonomy();
  const std::string out = tmp_path("gen_saturated.json");
  CHECK(run_cli("generate --taxonomy " + tax + " -o " + out +
                " --k0 99 --k1 2 --k2 2 --n-unseen 2 --n-seen 0 --seed 9")
            .exit_code == 0);
  const ovl::Dataset ds = ovl::parse_dataset(ovl::read_text_file(out));
  std::set<std::string> generated_classes;
  for (const ovl::Sample& s : ds.samples.samples()) {
    generated_classes.insert(ds.classes[static_cast<std::size_t>(s.class_id)].name);
  }
  CHECK(generated_classes == std::set<std::string>{"birch", "tulip"});
}

TEST_CASE("generate: missing inputs exit 2") {
  CHECK(run_cli("generate -o " + tmp_path("x.json")).exit_code == 2);  // no taxonomy
  CHECK(run_cli("generate --taxonomy " + tmp_path("does_not_exist.json") + " -o " +
                tmp_path("x.json"))
            .exit_code == 2);
  const std::string tax = write_plain_taxonomy();
  CHECK(run_cli("generate --taxonomy " + tax).exit_code == 2);  // no output
}

TEST_CASE("generate --benchmark: writes three consistent splits, byte-stable") {
  const std::string gen = tmp_path("bench_gen.json");
  const std::string train = tmp_path("bench_train.json");
  const std::string test = tmp_path("bench_test.json");
  const std::string args = "generate --benchmark " + kRefConfig + " --seed 101 -o " +
                           gen + " --out-train " + train + " --out-test " + test;
  CHECK(run_cli(args).exit_code == 0);

  const ovl::Dataset gd = ovl::parse_dataset(ovl::read_text_file(gen));
  const ovl::Dataset td = ovl::parse_dataset(ovl::read_text_file(train));
  const ovl::Dataset ed = ovl::parse_dataset(ovl::read_text_file(test));
  CHECK(gd.d == 16);
  CHECK(gd.classes.size() == 16);
  CHECK(td.classes.size() == 16);
  CHECK(td.samples.size() == 8 * 16);   // 8 base classes, 16 shots
  CHECK(ed.samples.size() == 16 * 100); // 100 test samples per class
  for (const ovl::Sample& s : td.samples.samples()) {
    CHECK(s.provenance == ovl::Provenance::Seen);
    CHECK(td.classes[static_cast<std::size_t>(s.class_id)].role == "base");
  }
  for (const ovl::Sample& s : gd.samples.samples()) {
    CHECK(s.provenance != ovl::Provenance::Seen);
  }

  const std::string gen2 = tmp_path("bench_gen2.json");
  CHECK(run_cli("generate --benchmark " + kRefConfig + " --seed 101 -o " + gen2)
            .exit_code == 0);
  CHECK(ovl::read_text_file(gen2) == ovl::read_text_file(gen));
}

TEST_CASE("train: epochs=0 checkpoint equals the zero initialization") {
  const std::string gen = tmp_path("t0_gen.json");
  const std::string train = tmp_path("t0_train.json");
  REQUIRE(run_cli("generate --benchmark " + kRefConfig + " --seed 5 -o " + gen +
                  " --out-train " + train)
              .exit_code == 0);
  const std::string ckpt = tmp_path("t0_ckpt.json");
  CHECK(run_cli("train --data " + train + " --generated " + gen + " --checkpoint " +
                ckpt + " --epochs 0 --seed 5")
            .exit_code == 0);
  const ovl::PromptParams params = ovl::parse_checkpoint(ovl::read_text_file(ckpt));
  CHECK(params.v1.size() == 16);
  CHECK(params.v1.isZero(0.0));
  CHECK(params.v2.isZero(0.0));
  CHECK(ovl::read_text_file(ckpt + ".metrics.jsonl").empty());
}

TEST_CASE("train: metrics use global iteration numbers and record trigger losses") {
  const std::string gen = tmp_path("tm_gen.json");
  const std::string train = tmp_path("tm_train.json");
  REQUIRE(run_cli("generate --benchmark " + kRefConfig + " --seed 6 -o " + gen +
                  " --out-train " + train)
              .exit_code == 0);
  const std::string ckpt = tmp_path("tm_ckpt.json");
  const std::string metrics = tmp_path("tm_metrics.jsonl");
  // 128 seen samples at batch 16 -> 8 iterations per epoch, 2 epochs.
  const std::string args = "train --data " + train + " --generated " + gen +
                           " --checkpoint " + ckpt + " --metrics " + metrics +
                           " --alpha 0 --beta 0 --period 4 --k3 8 --epochs 2 "
                           "--batch-size 16 --lr 0.02 --tau 1.0 --mmd-sigma 0.5 --seed 6";
  CHECK(run_cli(args).exit_code == 0);

  std::vector<ordered_json> rows;
  {
    const std::string text = ovl::read_text_file(metrics);
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      rows.push_back(ordered_json::parse(text.substr(start, end - start)));
      start = end + 1;
    }
  }
  REQUIRE(rows.size() == 16);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int iter = rows[i].at("iter").get<int>();
    CHECK(iter == static_cast<int>(i) + 1);  // global numbering across epochs
    const bool aligned = rows[i].at("aligned").get<bool>();
    CHECK(aligned == (iter % 4 == 0));
    // Alignment losses are recorded at triggers even at alpha=beta=0; the
    // weighted contribution to l_total is zero by construction.
    if (aligned) {
      CHECK(rows[i].at("l_kl").get<double>() > 0.0);
      CHECK(rows[i].at("l_mmd").get<double>() >= 0.0);
      CHECK(rows[i].at("l_total").get<double>() ==
            doctest::Approx(rows[i].at("l_ce").get<double>()).epsilon(1e-12));
    }
  }

  // Byte-identical rerun, checkpoint and metrics both.
  const std::string ckpt2 = tmp_path("tm_ckpt2.json");
  const std::string metrics2 = tmp_path("tm_metrics2.jsonl");
  CHECK(run_cli("train --data " + train + " --generated " + gen + " --checkpoint " +
                ckpt2 + " --metrics " + metrics2 +
                " --alpha 0 --beta 0 --period 4 --k3 8 --epochs 2 --batch-size 16 "
                "--lr 0.02 --tau 1.0 --mmd-sigma 0.5 --seed 6")
            .exit_code == 0);
  CHECK(ovl::read_text_file(ckpt2) == ovl::read_text_file(ckpt));
  CHECK(ovl::read_text_file(metrics2) == ovl::read_text_file(metrics));
}

TEST_CASE("train: missing inputs exit 2") {
  CHECK(run_cli("train --generated nowhere.json --checkpoint " + tmp_path("c.json"))
            .exit_code == 2);  // no --data
  const std::string gen = tmp_path("ti_gen.json");
  const std::string train = tmp_path("ti_train.json");
  REQUIRE(run_cli("generate --benchmark " + kRefConfig + " --seed 5 -o " + gen +
                  " --out-train " + train)
              .exit_code == 0);
  CHECK(run_cli("train --data " + train + " --checkpoint " + tmp_path("c.json"))
            .exit_code == 2);  // no --generated
  CHECK(run_cli("train --data " + tmp_path("missing.json") + " --generated " + gen +
                " --checkpoint " + tmp_path("c.json"))
            .exit_code == 2);  // data file absent
  CHECK(run_cli("train --data " + train + " --generated " + gen).exit_code == 2);
}

TEST_CASE("train --benchmark: runs the reference fixture end to end") {
  const std::string ckpt = tmp_path("tb_ckpt.json");
  CHECK(run_cli("train --benchmark " + kRefConfig + " --seed 101 --checkpoint " + ckpt)
            .exit_code == 0);
  const ovl::PromptParams params = ovl::parse_checkpoint(ovl::read_text_file(ckpt));
  CHECK(params.v1.size() == 16);
  CHECK(!params.v1.isZero(0.0));  // 40 epochs of updates happened

  const std::string ckpt2 = tmp_path("tb_ckpt2.json");
  CHECK(run_cli("train --benchmark " + kRefConfig + " --seed 101 --checkpoint " + ckpt2)
            .exit_code == 0);
  CHECK(ovl::read_text_file(ckpt2) == ovl::read_text_file(ckpt));
}

TEST_CASE("eval: untrained checkpoint on a symmetric fixture scores chance level") {
  const std::string data = tmp_path("sym.json");
  ovl::write_text_file(data, ovl::serialize_dataset(symmetric_two_class_fixture()));
  const std::string ckpt = tmp_path("sym_ckpt.json");
  ovl::write_text_file(ckpt, ovl::serialize_checkpoint(ovl::zero_prompts(4)));

  const std::string out = tmp_path("sym_report.json");
  const CliResult r =
      run_cli("eval --data " + data + " --checkpoint " + ckpt + " --out " + out);
  CHECK(r.exit_code == 0);
  const std::vector<ovl::EvalReport> reports =
      parse_reports(ovl::read_text_file(out));
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].acc_base == doctest::Approx(0.5).epsilon(0.2));  // |acc-0.5| <= 0.1
  CHECK(std::abs(reports[0].acc_base - 0.5) <= 0.1);
  CHECK(std::abs(reports[0].acc_new - 0.5) <= 0.1);
  CHECK(reports[0].variant == "eval");
  CHECK(reports[0].dis == 0.0);  // no train/generated files supplied
}

TEST_CASE("eval: stdout is the JSON array, a blank line, then the matching table") {
  const CliResult r = run_cli("eval --benchmark " + kRefConfig +
                              " --variant wo-da --seed 101");
  CHECK(r.exit_code == 0);
  const std::size_t split = r.out.find("\n\n");
  REQUIRE(split != std::string::npos);
  const std::string json_text = r.out.substr(0, split + 1);
  const std::string table_text = r.out.substr(split + 2);
  const std::vector<ovl::EvalReport> reports = parse_reports(json_text);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].variant == "wo-da");
  CHECK(reports[0].seed == 101);
  // The table printed must be exactly the table rendered from the JSON
  // values, which is what ties the 2-decimal columns to the report.
  CHECK(table_text == ovl::eval_table(reports));

  const CliResult again = run_cli("eval --benchmark " + kRefConfig +
                                  " --variant wo-da --seed 101");
  CHECK(again.out == r.out);
}

TEST_CASE("eval: schema violations and missing files exit 2") {
  const std::string data = tmp_path("sym2.json");
  ovl::write_text_file(data, ovl::serialize_dataset(symmetric_two_class_fixture()));
  const std::string ckpt = tmp_path("sym2_ckpt.json");
  ovl::write_text_file(ckpt, ovl::serialize_checkpoint(ovl::zero_prompts(4)));

  CHECK(run_cli("eval --checkpoint " + ckpt).exit_code == 2);  // no data
  CHECK(run_cli("eval --data " + data).exit_code == 2);        // no checkpoint
  const std::string bad = tmp_path("bad_schema.json");
  ovl::write_text_file(bad,
                       "{\"meta\": {\"d\": 4}, \"classes\": [], \"samples\": [], "
                       "\"extra\": 1}\n");
  CHECK(run_cli("eval --data " + bad + " --checkpoint " + ckpt).exit_code == 2);
  const std::string ckpt8 = tmp_path("sym2_ckpt8.json");
  ovl::write_text_file(ckpt8, ovl::serialize_checkpoint(ovl::zero_prompts(8)));
  CHECK(run_cli("eval --data " + data + " --checkpoint " + ckpt8).exit_code == 2);
}

TEST_CASE("eval: file-driven Dis matches the benchmark computation") {
  const std::string gen = tmp_path("ed_gen.json");
  const std::string train = tmp_path("ed_train.json");
  const std::string test = tmp_path("ed_test.json");
  REQUIRE(run_cli("generate --benchmark " + kRefConfig + " --seed 101 -o " + gen +
                  " --out-train " + train + " --out-test " + test)
              .exit_code == 0);
  const std::string ckpt = tmp_path("ed_ckpt.json");
  REQUIRE(run_cli("train --benchmark " + kRefConfig + " --seed 101 --checkpoint " + ckpt)
              .exit_code == 0);

  const std::string out = tmp_path("ed_report.json");
  const CliResult r = run_cli("eval --data " + test + " --checkpoint " + ckpt +
                              " --train-data " + train + " --generated " + gen +
                              " --tau 1.0 --mmd-sigma 0.5 --seed 101 --out " + out);
  CHECK(r.exit_code == 0);
  const std::vector<ovl::EvalReport> file_driven =
      parse_reports(ovl::read_text_file(out));
  REQUIRE(file_driven.size() == 1);

  // The same (variant, seed) through the in-process benchmark path.
  const ovl::EvalReport direct = ovl::run_benchmark_variant(
      ovl::reference_benchmark(), ovl::variant_by_name("ours"), 101);
  CHECK(file_driven[0].acc_base == doctest::Approx(direct.acc_base).epsilon(1e-9));
  CHECK(file_driven[0].acc_new == doctest::Approx(direct.acc_new).epsilon(1e-9));
  CHECK(file_driven[0].dis == doctest::Approx(direct.dis).epsilon(1e-9));
}

TEST_CASE("ablate: 5 seeds emit 5 x #variants reports, table matches JSON") {
  const std::string out = tmp_path("ablate.json");
  const std::string args = "ablate --benchmark " + kRefConfig +
                           " --variants ours,wo-da --seeds 11,12,13,14,15 --out " + out;
  const CliResult r = run_cli(args);
  CHECK(r.exit_code == 0);

  const std::vector<ovl::EvalReport> reports = parse_reports(ovl::read_text_file(out));
  REQUIRE(reports.size() == 10);  // 2 variants x 5 seeds, variant-major
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(reports[i].variant == "ours");
    CHECK(reports[i + 5].variant == "wo-da");
    CHECK(reports[i].seed == 11 + i);
  }

  const std::size_t split = r.out.find("\n\n");
  REQUIRE(split != std::string::npos);
  CHECK(r.out.substr(0, split + 1) == ovl::read_text_file(out));
  CHECK(r.out.substr(split + 2) == ovl::eval_table(reports));

  const CliResult again = run_cli(args);
  CHECK(again.out == r.out);

  CHECK(run_cli("ablate --benchmark " + kRefConfig + " --variants nope --seeds 1")
            .exit_code == 2);
  CHECK(run_cli("ablate --variants ours --seeds 1").exit_code == 2);  // no benchmark
}

TEST_CASE("help exits 0") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("train --help").exit_code == 0);
}
