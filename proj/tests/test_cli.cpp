#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "weier/format.hpp"
#include "weier/histogram.hpp"
#include "weier/phi.hpp"
#include "weierlab.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = weierlab::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("weierlab_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
  std::string read(const std::string& name) const {
    std::ifstream in(path / name, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path / name) << text; }
};

double value_after(const std::string& text, const std::string& key) {
  const auto at = text.find(key + " = ");
  REQUIRE(at != std::string::npos);
  return weier::parse_double(text.substr(at + key.size() + 3, text.find('\n', at) - at - key.size() - 3));
}

}  // namespace

TEST_CASE("params prints derived constants") {
  TempDir d;
  const Result a = run({"params", "--b", "2", "--lambda", "0.7", "--out", d.str()});
  CHECK(a.code == 0);
  CHECK(value_after(a.out, "D") == doctest::Approx(2 + std::log(0.7) / std::log(2.0)).epsilon(1e-15));
  CHECK(std::fabs(value_after(a.out, "D") - 1.485427) < 5e-7);
  const Result b = run({"params", "--b", "10", "--lambda", "0.5", "--out", d.str()});
  CHECK(value_after(b.out, "D") == doctest::Approx(1.69897).epsilon(1e-6));
  const Result bad = run({"params", "--b", "2", "--lambda", "0.4", "--out", d.str()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("lambda") != std::string::npos);
}

TEST_CASE("invalid input exits with 2") {
  TempDir d;
  CHECK(run({"sample", "--phi", "const:1", "--b", "2", "--lambda", "0.5", "--out", d.str()}).code == 2);
  CHECK(run({"dim-box", "--levels", "9:3", "--out", d.str()}).code == 2);
  CHECK(run({"dim-box", "--no-such-flag", "--out", d.str()}).code == 2);
  CHECK(run({"kernel", "--phi", "rademacher", "--grid", "4", "--out", d.str()}).code == 2);
  CHECK(run({"renorm", "--phi", "triangle", "--out", d.str()}).code == 2);
  CHECK(run({"renorm", "--op", "sideways", "--out", d.str()}).code == 2);
  CHECK(run({"theta", "--M", "6", "--n", "2", "--out", d.str()}).code == 2);
  CHECK(run({}).code == 2);
  const Result help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("dim-box") != std::string::npos);
}

TEST_CASE("check-h on the analytic family reports H*-evidence") {
  TempDir d;
  const Result r = run({"check-h", "--phi-from-w0", "cos", "--b", "2", "--lambda", "0.7", "--grid", "256", "--out", d.str()});
  CHECK(r.code == 0);
  CHECK(r.out.find("classification = H*-evidence") != std::string::npos);
  const Result c = run({"check-h", "--b", "2", "--lambda", "0.7", "--grid", "256", "--out", d.str()});
  CHECK(c.out.find("classification = H-evidence") != std::string::npos);
}

TEST_CASE("dim-box reproduces the graph dimension") {
  TempDir d;
  const Result r = run({"dim-box", "--b", "3", "--lambda", "0.5", "--phi", "cos", "--levels", "8:14", "--samples", "4e6", "--seed",
                        "1", "--out", d.str()});
  CHECK(r.code == 0);
  const std::string csv = d.read("dim-box.csv");
  CHECK(csv.rfind("level,count,log_b_count,slope,D\n", 0) == 0);
  CHECK(std::fabs(value_after(r.out, "slope") - 1.3691) <= 0.05);
}

TEST_CASE("property: outputs are byte-identical for the same config and seed") {
  const std::vector<std::vector<std::string>> cmds = {
      {"dim-box", "--levels", "5:9", "--samples", "3e4"},
      {"dim-entropy", "--levels", "4:8", "--samples", "2e4", "--codes", "2"},
      {"sample", "--samples", "1e4", "--level", "8", "--pgm-level", "4"},
      {"theta", "--n", "3", "--i-levels", "0,3,6", "--dump-level", "3"},
      {"convolve", "--n", "5", "--i-level", "2", "--k", "3"},
  };
  for (const auto& base : cmds) {
    TempDir a, b;
    auto ra = base, rb = base;
    ra.insert(ra.end(), {"--seed", "4", "--threads", "1", "--out", a.str()});
    rb.insert(rb.end(), {"--seed", "4", "--threads", "3", "--out", b.str()});
    REQUIRE(run(ra).code == 0);
    REQUIRE(run(rb).code == 0);
    for (const auto& e : fs::directory_iterator(a.path)) {
      const std::string name = e.path().filename().string();
      CHECK(name.find(".tmp") == std::string::npos);
      if (name.find(".meta.json") != std::string::npos) continue;
      CHECK_MESSAGE(a.read(name) == b.read(name), base[0] << " " << name);
    }
  }
}

TEST_CASE("metadata records suffice to re-run") {
  TempDir d, again;
  REQUIRE(run({"dim-box", "--levels", "5:8", "--samples", "2e4", "--seed", "9", "--out", d.str()}).code == 0);
  const auto meta = nlohmann::json::parse(d.read("dim-box.meta.json"));
  CHECK(meta["command"] == "dim-box");
  CHECK(meta["seed"] == 9);
  CHECK(meta["version"].get<std::string>().size() > 0);
  CHECK(meta.contains("timestamp"));
  CHECK(meta["config"]["levels"] == "5:8");
  CHECK(meta["outputs"][0] == "dim-box.csv");
  std::vector<std::string> rerun = meta["rerun"].get<std::vector<std::string>>();
  rerun.push_back("--out=" + again.str());
  REQUIRE(run(rerun).code == 0);
  CHECK(again.read("dim-box.csv") == d.read("dim-box.csv"));
}

TEST_CASE("config files, flag overrides and the output directory variable") {
  TempDir d;
  d.write("run.cfg", "# sample config\nb = 3\nlambda = 0.5   # overridden below\n\nlevels = 4:7\nsamples = 1e4\n");
  const Result r = run({"dim-box", "--config", (d.path / "run.cfg").string(), "--lambda", "0.6", "--out", d.str()});
  REQUIRE(r.code == 0);
  const auto meta = nlohmann::json::parse(d.read("dim-box.meta.json"));
  CHECK(meta["config"]["b"] == "3");
  CHECK(meta["config"]["lambda"] == "0.6");
  CHECK(meta["config"]["levels"] == "4:7");

  d.write("bad.cfg", "b 3\n");
  CHECK(run({"params", "--config", (d.path / "bad.cfg").string(), "--out", d.str()}).code == 2);
  d.write("unknown.cfg", "colour = blue\n");
  CHECK(run({"params", "--config", (d.path / "unknown.cfg").string(), "--out", d.str()}).code == 2);
  CHECK(run({"params", "--config", (d.path / "missing.cfg").string()}).code == 2);

  TempDir env;
  ::setenv("WEIERLAB_OUT", env.str().c_str(), 1);
  const Result e = run({"params"});
  ::unsetenv("WEIERLAB_OUT");
  CHECK(e.code == 0);
  CHECK(fs::exists(env.path / "params.csv"));
  CHECK(fs::exists(env.path / "params.meta.json"));
}

TEST_CASE("graymap output") {
  TempDir d;
  REQUIRE(run({"sample", "--samples", "1e4", "--level", "6", "--pgm-level", "4", "--out", d.str()}).code == 0);
  std::istringstream in(d.read("graph.pgm"));
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  CHECK(magic == "P2");
  CHECK(w == 16);
  CHECK(maxval == 255);
  int count = 0, v = 0, darkest = 255;
  while (in >> v) {
    CHECK(v >= 0);
    CHECK(v <= 255);
    darkest = std::min(darkest, v);
    ++count;
  }
  CHECK(count == w * h);
  CHECK(darkest == 0);
}

TEST_CASE("renorm writes the transformed coefficients") {
  TempDir d;
  const weier::FourierPhi f = weier::FourierPhi::cosine(1) + weier::FourierPhi::cosine(2, 0.5) + weier::FourierPhi::cosine(4);
  d.write("phi.txt", weier::to_text(f));
  const std::string file = (d.path / "phi.txt").string();
  for (const std::string op : {"renormalize", "pre", "s", "rescale"}) {
    REQUIRE(run({"renorm", "--phi-file", file, "--p", "2", "--op", op, "--out", d.str()}).code == 0);
    const weier::FourierPhi g = weier::parse_fourier_text(d.read("renorm.txt"));
    const weier::FourierPhi expect = op == "renormalize" ? weier::renormalize(f, 2)
                                     : op == "pre"       ? weier::pre_renormalize(f, 2)
                                     : op == "s"         ? weier::s_p(f, 2)
                                                         : weier::rescale(f, 2);
    CHECK(g == expect);
  }
}

TEST_CASE("convolve on histogram files") {
  TempDir d;
  // level 12 atoms 16 {0..15} and {0..15}
  std::vector<weier::BadicHistogram::Cell> a, b;
  for (int q = 0; q < 16; ++q) {
    a.push_back({16 * q, 0, 1.0});
    b.push_back({q, 0, 1.0});
  }
  d.write("theta.txt", weier::BadicHistogram(2, 1, 12, a).to_text());
  d.write("tau.txt", weier::BadicHistogram(2, 1, 12, b).to_text());
  const Result r = run({"convolve", "--theta-hist", (d.path / "theta.txt").string(), "--tau-hist", (d.path / "tau.txt").string(),
                        "--n", "4", "--k", "8", "--out", d.str()});
  REQUIRE(r.code == 0);
  CHECK(value_after(r.out, "gain") == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(d.read("convolve.csv").rfind("H_theta,H_tau,H_conv,gain\n", 0) == 0);
  CHECK(run({"convolve", "--theta-hist", (d.path / "theta.txt").string(), "--n", "4", "--k", "8", "--out", d.str()}).code == 2);
  CHECK(run({"convolve", "--theta-hist", (d.path / "theta.txt").string(), "--tau-hist", (d.path / "tau.txt").string(), "--n",
             "6", "--k", "6", "--out", d.str()})
            .code == 2);
}

TEST_CASE("remaining subcommands produce their files") {
  TempDir d;
  CHECK(run({"kernel", "--grid", "8", "--out", d.str()}).code == 0);
  CHECK(d.read("kernel.csv").rfind("x,W,Y,Gamma\n", 0) == 0);
  CHECK(run({"transversality", "--l0", "3", "--stabilize", "4", "--out", d.str()}).code == 0);
  CHECK(fs::exists(d.path / "transversality.csv"));
  CHECK(d.read("stabilization.csv").rfind("level,min_ratio\n", 0) == 0);
  const Result ps = run({"period-scan", "--denominators", "2,3,4", "--out", d.str()});
  CHECK(ps.code == 0);
  CHECK(ps.out.find("regulating denominators = 3") != std::string::npos);
  const Result th = run({"theta", "--n", "3", "--i-levels", "0,3", "--separation", "2", "--out", d.str()});
  CHECK(th.code == 0);
  CHECK(d.read("theta.csv").rfind("n,n_hat,i_level,H,H_over_n,size,subsampled\n", 0) == 0);
  CHECK(d.read("theta-separation.csv").rfind("n,C\n", 0) == 0);
  const Result po = run({"porosity", "--range", "3:5", "--m", "3", "--level-cap", "8", "--samples", "2e4", "--ucas-delta", "0.25",
                         "--out", d.str()});
  CHECK(po.code == 0);
  CHECK(d.read("porosity.csv").rfind("fraction,porous,components\n", 0) == 0);
  CHECK(d.read("ucas.csv").rfind("delta,sup_ratio,degenerate,level\n", 0) == 0);
}
