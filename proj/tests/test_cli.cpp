#define DOCTEST_CONFIG_IMPLEMENT
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cts/forecast.hpp"
#include "cts/graph.hpp"
#include "cts/synthgen.hpp"
#include "doctest.h"
#include "nlohmann/json.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_cts;
fs::path g_root;

struct CmdResult {
  int code = -1;
  std::string out;  // stdout only; stderr is discarded

  // The run directory a successful stage prints.
  std::string dir() const {
    std::string d = out;
    while (!d.empty() && (d.back() == '\n' || d.back() == '\r')) d.pop_back();
    return d;
  }
};

CmdResult run_cli(const std::string& args) {
  const std::string cmd = g_cts + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

long count_lines(const std::string& text) {
  long n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

std::string out_arg(const std::string& name) {
  return " --outdir " + (g_root / name).string();
}

}  // namespace

TEST_CASE("generate reruns land in the same directory with identical bytes") {
  const std::string flags =
      "generate --seed 3 --vars 3 --steps 300 --max_lag 20 --cross_edges 1";
  CmdResult a = run_cli(flags + out_arg("gen_a"));
  REQUIRE(a.code == 0);
  CmdResult b = run_cli(flags + out_arg("gen_b"));
  REQUIRE(b.code == 0);
  CHECK(fs::path(a.dir()).filename() == fs::path(b.dir()).filename());
  for (const char* f : {"config.json", "spec.json", "dataset.csv"})
    CHECK(slurp(fs::path(a.dir()) / f) == slurp(fs::path(b.dir()) / f));

  CmdResult again = run_cli(flags + out_arg("gen_a"));
  REQUIRE(again.code == 0);
  CHECK(again.dir() == a.dir());

  CmdResult other_seed = run_cli(
      "generate --seed 4 --vars 3 --steps 300 --max_lag 20 --cross_edges 1" +
      out_arg("gen_a"));
  REQUIRE(other_seed.code == 0);
  CHECK(fs::path(other_seed.dir()).filename() != fs::path(a.dir()).filename());

  const std::string csv = slurp(fs::path(a.dir()) / "dataset.csv");
  CHECK(count_lines(csv) == 301);
}

TEST_CASE("generate validates its arguments") {
  CmdResult r = run_cli("generate --vars 1" + out_arg("gen_bad"));
  CHECK(r.code == 1);
  CHECK(r.out.empty());
  CHECK(run_cli("generate --steps 0" + out_arg("gen_bad")).code == 1);
}

TEST_CASE("discover recovers the planted edge in both formats") {
  CmdResult gen = run_cli(
      "generate --seed 5 --vars 3 --steps 1500 --max_lag 20 --cross_edges 1" +
      out_arg("disc_gen"));
  REQUIRE(gen.code == 0);
  cts::CausalSpec spec =
      cts::spec_from_json(slurp(fs::path(gen.dir()) / "spec.json"));
  const cts::CausalEdge* planted = nullptr;
  for (const auto& e : spec.edges)
    if (e.cause != e.effect) planted = &e;
  REQUIRE(planted != nullptr);

  CmdResult disc = run_cli("discover --input " + gen.dir() +
                           "/dataset.csv --max_lag 20 --ar_order 5" +
                           out_arg("disc_run"));
  REQUIRE(disc.code == 0);
  cts::CausalGraph graph =
      cts::graph_from_json(slurp(fs::path(disc.dir()) / "graph.json"));
  bool found = false;
  for (const auto& e : graph.edges)
    if (e.cause == planted->cause && e.effect == planted->effect) {
      found = true;
      CHECK(e.lag == planted->lag);
    }
  CHECK(found);

  cts::CausalGraph nt =
      cts::import_ntriples(slurp(fs::path(disc.dir()) / "graph.nt"));
  REQUIRE(nt.edges.size() == graph.edges.size());
  for (size_t k = 0; k < nt.edges.size(); ++k) {
    CHECK(nt.edges[k].cause == graph.edges[k].cause);
    CHECK(nt.edges[k].effect == graph.edges[k].effect);
    CHECK(nt.edges[k].lag == graph.edges[k].lag);
  }
}

TEST_CASE("discover on edge-free data reports an empty graph") {
  CmdResult gen = run_cli(
      "generate --seed 9 --vars 2 --steps 800 --max_lag 20 --cross_edges 0" +
      out_arg("noise_gen"));
  REQUIRE(gen.code == 0);
  CmdResult disc = run_cli("discover --input " + gen.dir() +
                           "/dataset.csv --max_lag 20 --alpha 1e-12" +
                           out_arg("noise_disc"));
  REQUIRE(disc.code == 0);
  cts::CausalGraph graph =
      cts::graph_from_json(slurp(fs::path(disc.dir()) / "graph.json"));
  CHECK(graph.edges.empty());
  CHECK(slurp(fs::path(disc.dir()) / "graph.nt").empty());
}

TEST_CASE("pipeline stages chain into training and evaluation") {
  CmdResult gen = run_cli(
      "generate --seed 11 --vars 3 --steps 800 --max_lag 15 --cross_edges 1" +
      out_arg("pipe_gen"));
  REQUIRE(gen.code == 0);
  const std::string input = gen.dir() + "/dataset.csv";
  CmdResult disc = run_cli("discover --input " + input + " --max_lag 15" +
                           out_arg("pipe_disc"));
  REQUIRE(disc.code == 0);
  const std::string graph = disc.dir() + "/graph.json";

  CmdResult pairs = run_cli("pairs --input " + input + " --graph " + graph +
                            out_arg("pipe_pairs"));
  REQUIRE(pairs.code == 0);
  nlohmann::json pj =
      nlohmann::json::parse(slurp(fs::path(pairs.dir()) / "pairs.json"));
  REQUIRE(pj["n_pairs"].get<long>() >= 1);

  CmdResult built = run_cli("build-samples --input " + input + " --graph " +
                            graph + " --context 10 --horizon 5" +
                            out_arg("pipe_samples"));
  REQUIRE(built.code == 0);
  nlohmann::json manifest =
      nlohmann::json::parse(slurp(fs::path(built.dir()) / "manifest.json"));
  REQUIRE(manifest["sets"].size() == pj["n_pairs"].get<size_t>());
  const std::string sample_file = manifest["sets"][0]["file"].get<std::string>();
  const std::string sample_text = slurp(fs::path(built.dir()) / sample_file);
  CHECK(count_lines(sample_text) ==
        manifest["sets"][0]["n_samples"].get<long>());

  CmdResult train = run_cli("train --input " + input + " --graph " + graph +
                            " --model ridge --context 10 --horizon 5" +
                            out_arg("pipe_train"));
  REQUIRE(train.code == 0);
  cts::ForecastModel model =
      cts::load_checkpoint((fs::path(train.dir()) / "model.ckpt").string());
  CHECK(model.kind == cts::ModelKind::ridge);
  CHECK(model.input_dim == 30);
  CHECK(model.output_dim == 5);
  nlohmann::json metrics =
      nlohmann::json::parse(slurp(fs::path(train.dir()) / "metrics.json"));
  CHECK(metrics["val_mape"].get<double>() >= 0.0);

  CmdResult eval = run_cli("evaluate --input " + input + " --graph " + graph +
                           " --checkpoint " + train.dir() +
                           "/model.ckpt --context 10 --horizon 5" +
                           out_arg("pipe_eval"));
  REQUIRE(eval.code == 0);
  nlohmann::json ej =
      nlohmann::json::parse(slurp(fs::path(eval.dir()) / "eval.json"));
  CHECK(ej["mape"].get<double>() >= 0.0);
  CHECK(ej["per_pair"].size() == pj["n_pairs"].get<size_t>());

  CmdResult mismatched = run_cli(
      "evaluate --input " + input + " --graph " + graph + " --checkpoint " +
      train.dir() + "/model.ckpt --context 12 --horizon 5" +
      out_arg("pipe_eval_bad"));
  CHECK(mismatched.code == 1);
}

TEST_CASE("a persisted config reproduces its run bytewise") {
  CmdResult gen = run_cli(
      "generate --seed 5 --vars 3 --steps 1500 --max_lag 20 --cross_edges 1" +
      out_arg("rerun_gen"));
  REQUIRE(gen.code == 0);
  CmdResult disc = run_cli("discover --input " + gen.dir() +
                           "/dataset.csv --max_lag 20" + out_arg("rerun_a"));
  REQUIRE(disc.code == 0);

  CmdResult redo = run_cli("discover --config " + disc.dir() +
                           "/config.json" + out_arg("rerun_b"));
  REQUIRE(redo.code == 0);
  CHECK(fs::path(redo.dir()).filename() == fs::path(disc.dir()).filename());
  for (const char* f : {"config.json", "graph.json", "graph.nt"})
    CHECK(slurp(fs::path(redo.dir()) / f) == slurp(fs::path(disc.dir()) / f));

  CmdResult exported = run_cli("export-graph --input " + disc.dir() +
                               "/graph.json" + out_arg("rerun_export"));
  REQUIRE(exported.code == 0);
  CHECK(slurp(fs::path(exported.dir()) / "graph.nt") ==
        slurp(fs::path(disc.dir()) / "graph.nt"));
  CHECK(slurp(fs::path(exported.dir()) / "graph.json") ==
        slurp(fs::path(disc.dir()) / "graph.json"));
}

TEST_CASE("config file problems exit with the validation code") {
  const fs::path dir = g_root / "cfg";
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name);
    out << text;
    return (dir / name).string();
  };
  const std::string unknown =
      write("unknown.json", "{\"command\": \"discover\", \"bogus\": 1}\n");
  CHECK(run_cli("discover --config " + unknown + out_arg("cfg_r")).code == 1);

  const std::string mismatch =
      write("mismatch.json", "{\"command\": \"generate\"}\n");
  CHECK(run_cli("discover --config " + mismatch + out_arg("cfg_r")).code == 1);

  const std::string broken = write("broken.json", "{nope\n");
  CHECK(run_cli("discover --config " + broken + out_arg("cfg_r")).code == 1);

  const std::string badtype =
      write("badtype.json", "{\"command\": \"discover\", \"alpha\": \"hi\"}\n");
  CHECK(run_cli("discover --config " + badtype + out_arg("cfg_r")).code == 1);

  CHECK(run_cli("discover --config " + (dir / "absent.json").string() +
                out_arg("cfg_r"))
            .code == 1);
}

TEST_CASE("exit codes separate usage, validation, and runtime failures") {
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("generate --help").code == 0);
  CHECK(run_cli("").code == 1);
  CHECK(run_cli("frobnicate").code == 1);
  CHECK(run_cli("discover --input /nonexistent.csv" + out_arg("codes")).code ==
        1);
  CHECK(run_cli("generate --vars 3 --steps 200 --outdir /proc/cts_nowhere")
            .code == 2);
}

int main(int argc, char** argv) {
  doctest::Context context;
  int first_doctest_arg = 1;
  if (argc > 1 && argv[1][0] != '-') {
    g_cts = argv[1];
    first_doctest_arg = 2;
  }
  if (g_cts.empty()) {
    std::fprintf(stderr, "usage: test_cli <path-to-cts-binary> [doctest args]\n");
    return 1;
  }
  g_root = fs::temp_directory_path() /
           ("cts_cli_" + std::to_string(::getpid()));
  fs::remove_all(g_root);
  fs::create_directories(g_root);
  std::vector<const char*> dt_args = {argv[0]};
  for (int k = first_doctest_arg; k < argc; ++k) dt_args.push_back(argv[k]);
  context.applyCommandLine(static_cast<int>(dt_args.size()), dt_args.data());
  const int rc = context.run();
  fs::remove_all(g_root);
  return rc;
}
