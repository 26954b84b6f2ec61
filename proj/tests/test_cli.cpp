#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "samix/error.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string samix_bin() { return std::string(SAMIX_BIN_DIR) + "/samix"; }
std::string fixture(const std::string& name) {
  return std::string(SAMIX_FIXTURE_DIR) + "/" + name;
}

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  std::string cmd = samix_bin() + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  RunResult result;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), p)) > 0) result.out.append(buf, n);
  int status = pclose(p);
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

json last_json_line(const std::string& out) {
  std::istringstream in(out);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  REQUIRE(!last.empty());
  return json::parse(last);
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / fs::path("samix-cli-" + std::to_string(::getpid()) + "-" +
                                               std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string sub(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("gen-synth writes deterministic corpora and a JSON summary") {
  TempDir tmp;
  std::string args = "gen-synth --seed 5 --source-train 12 --source-val 6 --k 1 --target-test 6";
  RunResult a = run(args + " --out " + tmp.sub("a"));
  REQUIRE(a.code == 0);
  json summary = last_json_line(a.out);
  CHECK(summary["command"] == "gen-synth");
  CHECK(summary["source_train"] == 12);
  CHECK(summary["target_train"] == 1);

  RunResult b = run(args + " --out " + tmp.sub("b"));
  REQUIRE(b.code == 0);
  for (std::string rel : {"source_train/00000.png", "source_train/labels.csv",
                          "target_test/00003.png", "target_train/00000.png"})
    CHECK(slurp(tmp.sub("a") + "/" + rel) == slurp(tmp.sub("b") + "/" + rel));
}

TEST_CASE("distance-map of a directory against itself is the zero map") {
  TempDir tmp;
  REQUIRE(run("gen-synth --seed 3 --source-train 6 --source-val 2 --k 1 --target-test 2 --out " +
              tmp.sub("data")).code == 0);
  std::string src = tmp.sub("data") + "/source_train";
  RunResult res = run("distance-map --source " + src + " --target " + src + " --out " +
                      tmp.sub("zero.map"));
  REQUIRE(res.code == 0);
  json summary = last_json_line(res.out);
  CHECK(summary["mean_w1"] == 0.0);

  // Rendering the zero map succeeds and reports a degenerate range.
  RunResult hm = run("heatmap --in " + tmp.sub("zero.map") + " --out " + tmp.sub("zero.png"));
  REQUIRE(hm.code == 0);
  json hms = last_json_line(hm.out);
  CHECK(hms["min"] == 0.0);
  CHECK(hms["max"] == 0.0);
  CHECK(fs::exists(tmp.sub("zero.png")));
  CHECK(fs::exists(tmp.sub("zero.png") + ".range.txt"));
}

TEST_CASE("the full command pipeline runs end to end on a tiny dataset") {
  TempDir tmp;
  REQUIRE(run("gen-synth --seed 11 --source-train 16 --source-val 8 --k 1 --target-test 8 --out " +
              tmp.sub("data")).code == 0);
  const std::string data = tmp.sub("data");

  // Expand the 1-shot target set geometrically.
  RunResult aug = run("augment-target --seed 2 --samples 12 --in " + data + "/target_train --out " +
                      tmp.sub("aug"));
  REQUIRE(aug.code == 0);
  CHECK(last_json_line(aug.out)["outputs"] == 12);

  RunResult dm = run("distance-map --source " + data + "/source_train --target " + tmp.sub("aug") +
                     " --out " + tmp.sub("dw.map"));
  REQUIRE(dm.code == 0);
  CHECK(last_json_line(dm.out)["mean_w1"].get<double>() > 0.0);

  spit(tmp.sub("run.json"), std::string("{\n") +
      "  \"seed\": 9,\n  \"output_dir\": \"" + tmp.sub("out") + "\",\n" +
      "  \"corpus\": {\"source_train\": \"" + data + "/source_train\",\n" +
      "    \"source_train_labels\": \"" + data + "/source_train/labels.csv\",\n" +
      "    \"source_val\": \"" + data + "/source_val\",\n" +
      "    \"source_val_labels\": \"" + data + "/source_val/labels.csv\",\n" +
      "    \"target_train\": \"" + tmp.sub("aug") + "\"},\n" +
      "  \"train\": {\"epochs\": 2, \"batch_size\": 8, \"mu\": 0.01},\n" +
      "  \"mix\": {\"iterations\": 3},\n" +
      "  \"model\": {\"hidden\": 16, \"pool\": true}\n}\n");

  RunResult tr = run("train --config " + tmp.sub("run.json") + " --mode source-only --out-model " +
                     tmp.sub("base.ckpt"));
  REQUIRE(tr.code == 0);
  CHECK(last_json_line(tr.out)["mode"] == "source-only");
  CHECK(fs::exists(tmp.sub("base.ckpt")));
  {
    std::ifstream metrics(tmp.sub("out") + "/metrics.jsonl");
    REQUIRE(metrics.good());
    std::string line;
    int rows = 0;
    while (std::getline(metrics, line))
      if (!line.empty()) {
        json row = json::parse(line);
        CHECK(row.contains("train_loss"));
        ++rows;
      }
    CHECK(rows == 2);
  }

  RunResult ev = run("eval --model " + tmp.sub("base.ckpt") + " --corpus " + data +
                     "/target_test --labels " + data + "/target_test/labels.csv");
  REQUIRE(ev.code == 0);
  double acc = last_json_line(ev.out)["accuracy"].get<double>();
  CHECK(acc >= 0.0);
  CHECK(acc <= 1.0);

  RunResult dd = run("dodiss --corpus " + data + "/source_train --labels " + data +
                     "/source_train/labels.csv --dmap " + tmp.sub("dw.map") +
                     " --oracle builtin:" + tmp.sub("base.ckpt") + " --subsample 8 --seed 4 --out " +
                     tmp.sub("ms.map") + " --heatmap " + tmp.sub("ms.png"));
  REQUIRE(dd.code == 0);
  json dds = last_json_line(dd.out);
  CHECK(dds["dataset_size"] == 8);
  CHECK(fs::exists(tmp.sub("ms.png")));

  RunResult mx = run("mix --source " + data + "/source_val --source-labels " + data +
                     "/source_val/labels.csv --target " + tmp.sub("aug") + " --ms " + tmp.sub("ms.map") +
                     " --oracle builtin:" + tmp.sub("base.ckpt") + " --seed 6 --iterations 3 --out " +
                     tmp.sub("mixed"));
  REQUIRE(mx.code == 0);
  CHECK(last_json_line(mx.out)["count"] == 8);
  CHECK(fs::exists(tmp.sub("mixed") + "/mixed_00000.png"));
  std::string manifest = slurp(tmp.sub("mixed") + "/manifest.txt");
  CHECK(manifest.find("lambda=") != std::string::npos);
  CHECK(manifest.find("loss=") != std::string::npos);

  RunResult tr2 = run("train --config " + tmp.sub("run.json") + " --mode samix --ms " + tmp.sub("ms.map") +
                      " --init-model " + tmp.sub("base.ckpt") + " --out-model " + tmp.sub("samix.ckpt"));
  REQUIRE(tr2.code == 0);
  CHECK(fs::exists(tmp.sub("samix.ckpt")));
}

TEST_CASE("usage errors exit with code 1") {
  CHECK(run("no-such-command").code == 1);
  CHECK(run("distance-map --source only").code == 1);  // missing required options
  TempDir tmp;
  REQUIRE(run("gen-synth --seed 1 --source-train 4 --source-val 2 --k 1 --target-test 2 --out " +
              tmp.sub("d")).code == 0);
  // Malformed oracle spec.
  CHECK(run("dodiss --corpus " + tmp.sub("d") + "/source_train --labels " + tmp.sub("d") +
            "/source_train/labels.csv --dmap " + tmp.sub("missing.map") +
            " --oracle nonsense --out " + tmp.sub("x.map")).code == 2);  // map missing first
  RunResult dm = run("distance-map --source " + tmp.sub("d") + "/source_train --target " +
                     tmp.sub("d") + "/source_train --out " + tmp.sub("z.map"));
  REQUIRE(dm.code == 0);
  CHECK(run("dodiss --corpus " + tmp.sub("d") + "/source_train --labels " + tmp.sub("d") +
            "/source_train/labels.csv --dmap " + tmp.sub("z.map") + " --oracle nonsense --out " +
            tmp.sub("x.map")).code == 1);
}

TEST_CASE("data errors exit with code 2") {
  TempDir tmp;
  CHECK(run("distance-map --source " + tmp.sub("nope") + " --target " + tmp.sub("nope") + " --out " +
            tmp.sub("o.map")).code == 2);
  CHECK(run("eval --model " + tmp.sub("missing.ckpt") + " --corpus " + tmp.sub("nope") +
            " --labels " + tmp.sub("nope.csv")).code == 2);
  CHECK(run("heatmap --in " + tmp.sub("missing.map") + " --out " + tmp.sub("o.png")).code == 2);
}

TEST_CASE("oracle protocol failures exit with code 3") {
  TempDir tmp;
  REQUIRE(run("gen-synth --seed 2 --source-train 4 --source-val 2 --k 1 --target-test 2 --out " +
              tmp.sub("d")).code == 0);
  std::string src = tmp.sub("d") + "/source_train";
  REQUIRE(run("distance-map --source " + src + " --target " + src + " --out " + tmp.sub("z.map"))
              .code == 0);
  RunResult res = run("dodiss --corpus " + src + " --labels " + src + "/labels.csv --dmap " +
                      tmp.sub("z.map") + " --oracle \"subprocess:python3 " +
                      fixture("bad_id_oracle.py") + "\" --classes 2 --out " + tmp.sub("ms.map"));
  CHECK(res.code == 3);
}
