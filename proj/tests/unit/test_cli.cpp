#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(SSDP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ssdp-cli-" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("help and usage exit codes") {
    CHECK(run("--help") == 0);
    for (const char* sub : {"synth", "annotate", "sdp", "train", "eval", "ablate", "gradcheck", "inspect"}) {
      CHECK_MESSAGE(run(std::string(sub) + " --help") == 0, sub);
    }
    CHECK(run("") != 0);
    CHECK(run("frobnicate") == 1);
    CHECK(run("synth --seed notanumber --out /tmp/x") == 1);
  }

  TEST_CASE("synth is deterministic") {
    const auto a = scratch("synth-a"), b = scratch("synth-b");
    REQUIRE(run("synth --seed 9 --train 30 --dev 10 --test 10 --out " + a.string()) == 0);
    REQUIRE(run("synth --seed 9 --train 30 --dev 10 --test 10 --out " + b.string()) == 0);
    for (const auto& e : fs::directory_iterator(a)) {
      CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
    }
  }

  TEST_CASE("train, eval and inspect on a tiny run") {
    const auto data = scratch("data"), run_dir = scratch("run"), eval_dir = scratch("eval");
    REQUIRE(run("synth --seed 4 --train 40 --dev 12 --test 12 --out " + data.string()) == 0);
    CHECK(run("train --out " + run_dir.string()) == 1);
    const fs::path cfg = fs::temp_directory_path() / "ssdp-cli-tiny.cfg";
    std::ofstream(cfg) << "layers = 1\nheads = 2\nd_model = 8\nd_ff = 16\nepochs = 1\ndata = " << data.string()
                       << "\n";
    REQUIRE(run("train --config " + cfg.string() + " --out " + run_dir.string()) == 0);
    CHECK(fs::exists(run_dir / "metrics.csv"));
    const fs::path ckpt = run_dir / "checkpoints" / "final.json";
    REQUIRE(run("eval --checkpoint " + ckpt.string() + " --out " + eval_dir.string()) == 0);
    const auto report = nlohmann::json::parse(slurp(eval_dir / "report.json"));
    CHECK(report.contains("micro_f1"));
    CHECK(fs::exists(eval_dir / "confusion.csv"));
    const auto insp = scratch("inspect");
    CHECK(run("inspect --checkpoint " + ckpt.string() + " --instance dev-00000 --out " + insp.string()) == 0);
    CHECK(run("inspect --checkpoint " + ckpt.string() + " --instance nope --out " + insp.string()) != 0);
    CHECK(run("eval --checkpoint " + (run_dir / "missing.json").string()) != 0);

    std::ofstream(cfg) << "epochs = 1\nbogus_key = 3\n";
    CHECK(run("train --config " + cfg.string() + " --out " + scratch("run-bad").string()) == 1);
  }

  TEST_CASE("annotate and sdp dump") {
    const auto data = scratch("data2"), out = scratch("annot");
    REQUIRE(run("synth --seed 2 --train 10 --dev 2 --test 2 --out " + data.string()) == 0);
    CHECK(run("annotate --data " + data.string() + " --variant SPL --out " + out.string()) == 0);
    CHECK(fs::exists(out / "annotated.jsonl"));
    CHECK(run("sdp dump --data " + data.string() + " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "sdp.jsonl"));
  }

  TEST_CASE("gradcheck writes a report") {
    const auto out = scratch("gc");
    CHECK(run("gradcheck --instances 1 --blocks classifier --out " + out.string()) == 0);
    CHECK_FALSE(fs::is_empty(out));
  }
}
