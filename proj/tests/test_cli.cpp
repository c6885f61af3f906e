#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "emvc/cli.hpp"
#include "emvc/data.hpp"
#include "emvc/dirichlet.hpp"
#include "emvc/opinion.hpp"

using namespace emvc;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

json out_json(const Run& r) { return json::parse(r.out); }
json err_json(const Run& r) { return json::parse(r.err); }

std::string scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("emvc_cli_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

// Small dataset plus trained model, shared by the eval and sweep cases.
struct Fixture {
  std::string dir;
  std::string manifest;
  std::string model;
  json train_report;
};

const Fixture& trained_fixture() {
  static const Fixture fx = [] {
    Fixture f;
    f.dir = scratch_dir("fixture");
    Run gen = cli({"gen-data", "--out", f.dir + "/data", "--classes", "2", "--per-class", "8",
                   "--view-dims", "2,2", "--spread", "0.3", "--seed", "11"});
    REQUIRE(gen.code == 0);
    f.manifest = out_json(gen)["manifest"];
    f.model = f.dir + "/model.json";
    Run tr = cli({"train", "--data", f.manifest, "--out", f.model, "--epochs", "3", "--batch",
                  "4", "--hidden", "3", "--pseudo-hidden", "2", "--t-anneal", "2", "--seed",
                  "3"});
    REQUIRE(tr.code == 0);
    f.train_report = out_json(tr);
    return f;
  }();
  return fx;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and bad invocations use the right exit codes") {
  Run none = cli({});
  CHECK(none.code == 2);
  CHECK(none.err.find("usage:") != std::string::npos);

  Run help = cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("sweep-gamma") != std::string::npos);
  CHECK(help.err.empty());

  CHECK(cli({"frobnicate"}).code == 2);

  Run bad = cli({"divergence", "--p", "2,3", "--q", "4,1", "--bogus", "1"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("unknown flag") != std::string::npos);

  CHECK(cli({"divergence", "--p"}).code == 2);
  CHECK(cli({"divergence", "p=2,3"}).code == 2);

  // Estimate-only divergence cannot drive training.
  CHECK(cli({"train", "--data", "x.json", "--divergence", "js"}).code == 2);
}

TEST_CASE("errors become JSON on request") {
  Run missing = cli({"eval", "--data", "/nonexistent/m.json", "--model", "/nonexistent/mod.json",
                     "--json-errors"});
  CHECK(missing.code == 1);
  json e = err_json(missing);
  CHECK(e["error"] == "data");
  CHECK(e["detail"].get<std::string>().find("/nonexistent") != std::string::npos);

  Run usage = cli({"fuse", "--json-errors"});
  CHECK(usage.code == 2);
  CHECK(err_json(usage)["error"] == "usage");
}

TEST_CASE("divergence reports the closed form with an oracle cross check") {
  const DirichletParams p({2.0, 3.0});
  const DirichletParams q({4.0, 1.0});

  Run holder = cli({"divergence", "--p", "2,3", "--q", "4,1", "--kind", "holder", "--gamma",
                    "1.7", "--validate"});
  REQUIRE(holder.code == 0);
  json h = out_json(holder);
  CHECK(h["value"].get<double>() == holder_divergence(p, q, HolderExponent(1.7)));
  CHECK(h["oracle"]["method"] == "quadrature");
  CHECK(h["within_bound"] == true);
  const double gap = std::fabs(h["value"].get<double>() - h["oracle"]["value"].get<double>());
  CHECK(gap <= h["oracle"]["error_bound"].get<double>() + 1e-7);

  Run kl = cli({"divergence", "--p", "2,3", "--q", "4,1", "--kind", "kl", "--validate"});
  REQUIRE(kl.code == 0);
  CHECK(out_json(kl)["value"].get<double>() == kl_divergence(p, q));

  // = syntax and the Cauchy-Schwarz alias for gamma = 2.
  Run cs = cli({"divergence", "--p=2,3", "--q=4,1", "--kind=cs", "--oracle=none"});
  REQUIRE(cs.code == 0);
  json c = out_json(cs);
  CHECK(c["value"].get<double>() == holder_divergence(p, q, HolderExponent(2.0)));
  CHECK(c["oracle"].is_null());
  CHECK(!c.contains("within_bound"));

  Run js = cli({"divergence", "--p", "2,3", "--q", "4,1", "--kind", "js", "--samples", "5000",
                "--seed", "9"});
  REQUIRE(js.code == 0);
  json j = out_json(js);
  McEstimate want = js_divergence_mc(p, q, 5000, 9);
  CHECK(j["value"].get<double>() == want.value);
  CHECK(j["std_error"].get<double>() == want.std_error);
  CHECK(j["oracle"].is_null());
  CHECK(cli({"divergence", "--p", "2,3", "--q", "4,1", "--kind", "js", "--validate"}).code == 2);

  // Syntax problems exit 2; well-formed numbers outside the math domain exit 1.
  CHECK(cli({"divergence", "--p", "2,nope", "--q", "4,1"}).code == 2);
  Run neg = cli({"divergence", "--p", "-1,2", "--q", "4,1", "--json-errors"});
  CHECK(neg.code == 1);
  CHECK(err_json(neg)["error"] == "domain");
}

TEST_CASE("fuse folds opinions and preserves the vacuous identity") {
  const std::string certain =
      R"([{"beliefs":[0.5,0.25,0.125],"uncertainty":0.125},)"
      R"({"beliefs":[0.0,0.0,0.0],"uncertainty":1.0}])";
  Run identity = cli({"fuse", "--opinions", certain});
  REQUIRE(identity.code == 0);
  json fused = out_json(identity);
  CHECK(fused["beliefs"] == json({0.5, 0.25, 0.125}));
  CHECK(fused["uncertainty"] == 0.125);

  // Zero evidence is the vacuous opinion, so the first source passes through.
  Run ev = cli({"fuse", "--evidence", "4,1,1;0,0,0"});
  REQUIRE(ev.code == 0);
  CHECK(out_json(ev) == json(opinion_from_evidence({4.0, 1.0, 1.0})));

  CHECK(cli({"fuse"}).code == 2);
  CHECK(cli({"fuse", "--opinions", "[]", "--evidence", "1,2"}).code == 2);
  CHECK(cli({"fuse", "--opinions", "not json"}).code == 2);

  Run conflict = cli({"fuse", "--opinions",
                      R"([{"beliefs":[1.0,0.0],"uncertainty":0.0},)"
                      R"({"beliefs":[0.0,1.0],"uncertainty":0.0}])",
                      "--json-errors"});
  CHECK(conflict.code == 1);
  CHECK(err_json(conflict)["error"] == "conflict");
}

TEST_CASE("gen-data writes a loadable dataset and honors the seed sources") {
  const std::string dir_a = scratch_dir("gen_a");
  Run a = cli({"gen-data", "--out", dir_a, "--classes", "2", "--per-class", "6", "--view-dims",
               "2,2", "--seed", "5"});
  REQUIRE(a.code == 0);
  json ra = out_json(a);
  CHECK(ra["samples"] == 12);
  CHECK(ra["views"] == 2);
  CHECK(ra["classes"] == 2);
  CHECK(ra["seed"] == 5);
  MultiViewDataset da = load_manifest(ra["manifest"]);
  CHECK(da.size() == 12);

  // EMVC_SEED fills in when --seed is absent and an explicit flag beats it.
  setenv("EMVC_SEED", "5", 1);
  const std::string dir_b = scratch_dir("gen_b");
  Run b = cli({"gen-data", "--out", dir_b, "--classes", "2", "--per-class", "6", "--view-dims",
               "2,2"});
  REQUIRE(b.code == 0);
  CHECK(out_json(b)["seed"] == 5);
  MultiViewDataset db = load_manifest(out_json(b)["manifest"]);
  CHECK(da.views[0].values == db.views[0].values);
  CHECK(da.labels == db.labels);

  Run c = cli({"gen-data", "--out", dir_b, "--classes", "2", "--per-class", "6", "--view-dims",
               "2,2", "--seed", "77"});
  REQUIRE(c.code == 0);
  CHECK(out_json(c)["seed"] == 77);

  setenv("EMVC_SEED", "not-a-seed", 1);
  CHECK(cli({"gen-data", "--out", dir_b, "--classes", "2", "--per-class", "6"}).code == 2);
  unsetenv("EMVC_SEED");
}

TEST_CASE("gen-data can split train and test on the way out") {
  const std::string dir = scratch_dir("gen_split");
  Run r = cli({"gen-data", "--out", dir, "--classes", "2", "--per-class", "6", "--view-dims",
               "2,2", "--test-fraction", "0.25", "--seed", "5"});
  REQUIRE(r.code == 0);
  json rep = out_json(r);
  CHECK(rep["train_samples"] == 8);
  CHECK(rep["test_samples"] == 4);
  MultiViewDataset train_side = load_manifest(rep["train_manifest"]);
  MultiViewDataset test_side = load_manifest(rep["test_manifest"]);
  CHECK(train_side.size() + test_side.size() == 12);
  CHECK(train_side.num_classes == 2);
}

TEST_CASE("train then eval round trips through files") {
  const Fixture& fx = trained_fixture();
  const json& tr = fx.train_report;
  CHECK(tr["epochs"] == 3);
  CHECK(tr["epoch_losses"].size() == 3);
  CHECK(tr["divergence"]["kind"] == "holder");
  CHECK(tr["train_samples"] == 16);
  CHECK(tr["test_samples"] == 0);
  CHECK(std::filesystem::exists(fx.model));

  // Same model and data, so eval must reproduce the training report's metrics.
  Run ev = cli({"eval", "--data", fx.manifest, "--model", fx.model});
  REQUIRE(ev.code == 0);
  json er = out_json(ev);
  CHECK(er["samples"] == 16);
  CHECK(er["noise"].is_null());
  CHECK(er["metrics"] == tr["metrics"]);

  Run noisy = cli({"eval", "--data", fx.manifest, "--model", fx.model, "--noise-sigma", "0.5",
                   "--noise-seed", "7"});
  REQUIRE(noisy.code == 0);
  json nr = out_json(noisy);
  CHECK(nr["noise"]["sigma"] == 0.5);
  CHECK(nr["noise"]["view"] == 1);  // defaults to the last view
  CHECK(nr["noise"]["seed"] == 7);

  Run split = cli({"train", "--data", fx.manifest, "--epochs", "2", "--batch", "4", "--hidden",
                   "3", "--test-fraction", "0.5", "--seed", "3"});
  REQUIRE(split.code == 0);
  CHECK(out_json(split)["train_samples"] == 8);
  CHECK(out_json(split)["test_samples"] == 8);
}

TEST_CASE("config files supply defaults that explicit flags override") {
  const Fixture& fx = trained_fixture();
  const std::string dir = scratch_dir("config");
  {
    std::ofstream cfg(dir + "/cfg.json");
    cfg << R"({"epochs": 2, "batch": 4, "hidden": [3], "no-pseudo": true})";
  }
  Run defaults = cli({"train", "--data", fx.manifest, "--config", dir + "/cfg.json", "--seed",
                      "3"});
  REQUIRE(defaults.code == 0);
  CHECK(out_json(defaults)["epochs"] == 2);

  Run overridden = cli({"train", "--data", fx.manifest, "--config", dir + "/cfg.json",
                        "--epochs", "1", "--seed", "3"});
  REQUIRE(overridden.code == 0);
  CHECK(out_json(overridden)["epochs"] == 1);
  CHECK(out_json(overridden)["epoch_losses"].size() == 1);

  {
    std::ofstream cfg(dir + "/bad.json");
    cfg << R"({"no-such-key": 1})";
  }
  CHECK(cli({"train", "--data", fx.manifest, "--config", dir + "/bad.json"}).code == 2);
  CHECK(cli({"train", "--data", fx.manifest, "--config", dir + "/absent.json"}).code == 1);
}

TEST_CASE("sweep-noise scores one model across variances") {
  const Fixture& fx = trained_fixture();
  Run sweep = cli({"sweep-noise", "--data", fx.manifest, "--model", fx.model, "--variances",
                   "0,0.04", "--noise-seed", "7"});
  REQUIRE(sweep.code == 0);
  json rep = out_json(sweep);
  CHECK(rep["view"] == 1);
  CHECK(rep["results"].size() == 2);
  CHECK(rep["results"][0]["variance"] == 0.0);
  CHECK(rep["results"][1]["sigma"].get<double>() == doctest::Approx(0.2));

  // The zero-variance row is plain evaluation of the clean data.
  Run clean = cli({"eval", "--data", fx.manifest, "--model", fx.model});
  json cr = out_json(clean);
  CHECK(rep["results"][0]["fused_accuracy"] == cr["metrics"]["fused_accuracy"]);
  CHECK(rep["results"][0]["mean_fused_uncertainty"] == cr["metrics"]["mean_fused_uncertainty"]);

  CHECK(cli({"sweep-noise", "--data", fx.manifest, "--model", fx.model, "--view", "9"}).code ==
        2);
}

TEST_CASE("sweep-gamma retrains per exponent deterministically") {
  const Fixture& fx = trained_fixture();
  const std::vector<std::string> args = {"sweep-gamma", "--data", fx.manifest, "--gammas",
                                         "1.5,2.0",     "--epochs", "2",       "--batch",
                                         "4",           "--hidden", "3",       "--seed",
                                         "3"};
  Run first = cli(args);
  REQUIRE(first.code == 0);
  json rep = out_json(first);
  REQUIRE(rep["results"].size() == 2);
  CHECK(rep["results"][0]["gamma"] == 1.5);
  CHECK(rep["results"][1]["gamma"] == 2.0);
  for (const json& row : rep["results"]) {
    CHECK(row.contains("first_loss"));
    CHECK(row.contains("loss_decreased"));
    CHECK(row["metrics"].contains("fused_accuracy"));
  }

  Run second = cli(args);
  CHECK(second.out == first.out);
}

}  // TEST_SUITE
