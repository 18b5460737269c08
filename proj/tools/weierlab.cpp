#include "weierlab.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "weier/errors.hpp"
#include "weier/format.hpp"
#include "weier/funcspace.hpp"
#include "weier/histogram.hpp"
#include "weier/kernel.hpp"
#include "weier/measure.hpp"
#include "weier/params.hpp"
#include "weier/phi.hpp"
#include "weier/weier.hpp"

#ifndef WEIERLAB_VERSION
#define WEIERLAB_VERSION "0.0.0"
#endif

namespace weierlab {

namespace fs = std::filesystem;
using namespace weier;

namespace {

std::string str(const std::string& v) { return v; }
std::string str(double v) { return fmt(v); }
std::string str(bool v) { return v ? "true" : "false"; }
template <class T>
  requires std::is_integral_v<T>
std::string str(T v) {
  return std::to_string(v);
}

// Every option of a subcommand, in declaration order, with its current value as text.
using Echo = std::vector<std::pair<std::string, std::function<std::string()>>>;

struct Common {
  int b = 2;
  double lambda = 0.7;
  std::string phi = "cos";
  std::string phi_file;
  std::string phi_from_w0;
  std::uint64_t seed = 1;
  double tol = 1e-12;
  std::string out_dir;
  int threads = 0;
};

struct Command {
  CLI::App* app = nullptr;
  Echo echo;
  std::function<int()> body;

  template <class T>
  CLI::Option* opt(const std::string& name, T& var, const std::string& desc) {
    echo.emplace_back(name, [&var] { return str(var); });
    return app->add_option("--" + name, var, desc)->capture_default_str();
  }
  CLI::Option* flag(const std::string& name, bool& var, const std::string& desc) {
    echo.emplace_back(name, [&var] { return str(var); });
    return app->add_flag("--" + name, var, desc);
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Temp file in the same directory, then rename over the target.
void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw InvalidArgument("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::pair<int, int> parse_range(const std::string& s, const std::string& what) {
  const auto parts = split(s, ':');
  if (parts.size() != 2) throw InvalidArgument(what + " must look like lo:hi, got '" + s + "'");
  const auto lo = static_cast<int>(parse_int(parts[0])), hi = static_cast<int>(parse_int(parts[1]));
  if (lo > hi) throw InvalidArgument(what + ": lo > hi");
  return {lo, hi};
}

template <class T>
std::vector<T> parse_list(const std::string& s, const std::string& what) {
  std::vector<T> out;
  for (const auto& part : split(s, ',')) {
    const std::string t = trim(part);
    if (t.empty()) continue;
    if constexpr (std::is_floating_point_v<T>)
      out.push_back(parse_double(t));
    else
      out.push_back(static_cast<T>(parse_int(t)));
  }
  if (out.empty()) throw InvalidArgument(what + " must be a non-empty comma list");
  return out;
}

std::uint64_t sample_number(double v) {
  if (!(v >= 1.0) || v > 1e12) throw InvalidArgument("samples must lie in [1, 1e12], got " + fmt(v));
  return static_cast<std::uint64_t>(std::llround(v));
}

// random:SEED, const:SYMBOL, or pre(cycle) digits.
Code parse_code(int b, const std::string& spec) {
  if (spec.rfind("random:", 0) == 0) return Code::random(b, static_cast<std::uint64_t>(parse_int(spec.substr(7))));
  if (spec.rfind("const:", 0) == 0) return Code::constant(b, static_cast<int>(parse_int(spec.substr(6))));
  return Code::parse(b, spec);
}

Phi resolve_phi(const Common& c) {
  const int given = !c.phi_file.empty() + !c.phi_from_w0.empty();
  if (given > 1) throw InvalidArgument("--phi-file and --phi-from-w0 are exclusive");
  if (!c.phi_file.empty()) return Phi(parse_fourier_text(read_file(c.phi_file)));
  if (!c.phi_from_w0.empty()) return Phi(phi_from_W0(parse_builtin(c.phi_from_w0).to_fourier(), c.b, c.lambda));
  return parse_builtin(c.phi);
}

std::string timestamp() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// Plain graymap of a 2D histogram: x across, y upward, darker for more mass.
std::string to_pgm(const BadicHistogram& h) {
  if (h.dim() != 2 || h.empty()) throw InvalidArgument("graymap needs a non-empty 2D histogram");
  std::int64_t x0 = h.cells().front().x, x1 = x0, y0 = h.cells().front().y, y1 = y0;
  double top = 0.0;
  for (const auto& c : h.cells()) {
    x0 = std::min(x0, c.x), x1 = std::max(x1, c.x);
    y0 = std::min(y0, c.y), y1 = std::max(y1, c.y);
    top = std::max(top, c.mass);
  }
  const std::int64_t w = x1 - x0 + 1, ht = y1 - y0 + 1;
  if (w * ht > 16'000'000) throw InvalidArgument("graymap would exceed 16M pixels; lower --pgm-level");
  std::vector<int> px(static_cast<std::size_t>(w * ht), 255);
  for (const auto& c : h.cells())
    px[static_cast<std::size_t>((y1 - c.y) * w + (c.x - x0))] = 255 - static_cast<int>(std::lround(255.0 * c.mass / top));
  std::ostringstream os;
  os << "P2\n" << w << ' ' << ht << "\n255\n";
  for (std::int64_t r = 0; r < ht; ++r) {
    for (std::int64_t q = 0; q < w; ++q) os << (q ? " " : "") << px[static_cast<std::size_t>(r * w + q)];
    os << '\n';
  }
  return os.str();
}

class Cli {
 public:
  Cli(std::ostream& out) : out_(out), app_("Numerical laboratory for Weierstrass-type functions", "weierlab") {
    app_.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app_.require_subcommand(1);
    app_.set_version_flag("--version", WEIERLAB_VERSION);
    add_params();
    add_sample();
    add_dim_box();
    add_dim_entropy();
    add_kernel();
    add_check_h();
    add_transversality();
    add_renorm();
    add_period_scan();
    add_theta();
    add_porosity();
    add_convolve();
  }

  CLI::App& app() { return app_; }

  int dispatch(const std::vector<std::string>& argv) {
    for (auto& [name, cmd] : commands_)
      if (cmd.app->parsed()) {
        name_ = name;
        argv_ = argv;
        return cmd.body();
      }
    return kBadInput;
  }

 private:
  Command& add(const std::string& name, const std::string& desc) {
    Command& c = commands_[name];
    c.app = app_.add_subcommand(name, desc);
    c.opt("b", common_.b, "base b >= 2");
    c.opt("lambda", common_.lambda, "contraction, 1/b < lambda < 1");
    c.opt("phi", common_.phi, "built-in phi: cos [theta=..], triangle, rademacher, const:c, zero");
    c.opt("phi-file", common_.phi_file, "Fourier phi as `k re im` lines");
    c.opt("phi-from-w0", common_.phi_from_w0, "built-in W0; phi = W0 - lambda W0(b x)");
    c.opt("seed", common_.seed, "random seed");
    c.opt("tol", common_.tol, "series tolerance");
    c.opt("out", common_.out_dir, "output directory (default $WEIERLAB_OUT or .)");
    c.opt("threads", common_.threads, "worker cap, 0 for all cores");
    return c;
  }

  SystemParams params() const { return make_params(common_.b, common_.lambda); }
  SampleOptions sample_opt() const {
    SampleOptions o;
    o.threads = common_.threads;
    return o;
  }

  fs::path out_dir() const {
    std::string d = common_.out_dir;
    if (d.empty()) {
      const char* env = std::getenv("WEIERLAB_OUT");
      d = env && *env ? env : ".";
    }
    fs::create_directories(d);
    return d;
  }

  // Writes the outputs and the metadata record that re-runs this command.
  void emit(const std::map<std::string, std::string>& files) {
    const fs::path dir = out_dir();
    nlohmann::json meta;
    meta["command"] = name_;
    meta["version"] = WEIERLAB_VERSION;
    meta["seed"] = common_.seed;
    meta["timestamp"] = timestamp();
    nlohmann::json cfg = nlohmann::json::object();
    std::vector<std::string> rerun = {name_};
    for (const auto& [key, get] : commands_.at(name_).echo) {
      const std::string v = get();
      cfg[key] = v;
      if (key != "out" && !v.empty()) rerun.push_back("--" + key + "=" + v);
    }
    meta["config"] = cfg;
    meta["rerun"] = rerun;
    meta["argv"] = argv_;
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& [file, content] : files) {
      write_atomic(dir / file, content);
      outs.push_back(file);
    }
    meta["outputs"] = outs;
    write_atomic(dir / (name_ + ".meta.json"), meta.dump(2) + "\n");
  }

  void add_params() {
    Command& c = add("params", "print b, lambda, gamma, D and the Holder exponent");
    c.body = [this] {
      const SystemParams p = params();
      out_ << "b = " << p.b << "\nlambda = " << fmt(p.lambda) << "\ngamma = " << fmt(p.gamma) << "\nD = " << fmt(p.D)
           << "\nholder_exponent = " << fmt(p.holder_exp) << '\n';
      emit({{"params.csv", "b,lambda,gamma,D,holder_exponent\n" + std::to_string(p.b) + "," + fmt(p.lambda) + "," +
                               fmt(p.gamma) + "," + fmt(p.D) + "," + fmt(p.holder_exp) + "\n"}});
      return kOk;
    };
  }

  struct SampleArgs {
    std::string code = "random:1";
    double samples = 1e6;
    int level = 12;
    int pgm_level = 0;
  } sample_;
  void add_sample() {
    Command& c = add("sample", "histogram of the projected measure pi_j mu, optional graph graymap");
    c.opt("code", sample_.code, "code j: random:SEED, const:S or pre(cycle)");
    c.opt("samples", sample_.samples, "number of x samples");
    c.opt("level", sample_.level, "b-adic level of the histogram");
    c.opt("pgm-level", sample_.pgm_level, "write graph.pgm of the graph histogram at this level (0: off)");
    c.body = [this] {
      const SystemParams p = params();
      const Phi phi = resolve_phi(common_);
      const std::uint64_t n = sample_number(sample_.samples);
      const auto s = sample_projected_measure(p, phi, parse_code(p.b, sample_.code), n, sample_.level, common_.seed, sample_opt());
      std::map<std::string, std::string> files = {{"sample.txt", s.hist.to_text()},
                                                  {"sample.csv", to_csv(entropy_curve(s.hist, 0, sample_.level))}};
      if (sample_.pgm_level > 0)
        files["graph.pgm"] = to_pgm(graph_histogram(p, phi, n, sample_.pgm_level, common_.seed, sample_opt()));
      out_ << "samples = " << s.n_samples << "\nH/level = " << fmt(s.hist.entropy() / std::max(sample_.level, 1))
           << (s.undersampled ? "\nwarning: fewer samples than cells" : "") << '\n';
      emit(files);
      return kOk;
    };
  }

  struct BoxArgs {
    std::string levels = "8:14";
    double samples = 4e6;
    bool iid = false;
  } box_;
  void add_dim_box() {
    Command& c = add("dim-box", "graph box-counting dimension");
    c.opt("levels", box_.levels, "level range lo:hi");
    c.opt("samples", box_.samples, "number of x samples");
    c.flag("iid", box_.iid, "i.i.d. instead of stratified samples");
    c.body = [this] {
      const SystemParams p = params();
      const auto [lo, hi] = parse_range(box_.levels, "--levels");
      SampleOptions o = sample_opt();
      o.stratified = !box_.iid;
      const BoxReport r = graph_box_dimension(p, resolve_phi(common_), lo, hi, sample_number(box_.samples), common_.seed, o);
      out_ << "slope = " << fmt(r.slope) << "\nD = " << fmt(r.D) << '\n';
      emit({{"dim-box.csv", to_csv(r)}});
      return kOk;
    };
  }

  struct EntropyArgs {
    std::string levels = "6:14";
    double samples = 1e6;
    int codes = 8;
  } ent_;
  void add_dim_entropy() {
    Command& c = add("dim-entropy", "entropy dimension alpha of pi_j mu over seeded codes");
    c.opt("levels", ent_.levels, "level range lo:hi");
    c.opt("samples", ent_.samples, "number of x samples");
    c.opt("codes", ent_.codes, "number of seeded codes");
    c.body = [this] {
      const SystemParams p = params();
      const auto [lo, hi] = parse_range(ent_.levels, "--levels");
      if (ent_.codes < 1) throw InvalidArgument("--codes must be >= 1");
      const AlphaReport a = alpha_estimate(p, resolve_phi(common_), seeded_codes(p.b, ent_.codes, common_.seed), lo, hi,
                                           sample_number(ent_.samples), common_.seed, sample_opt());
      std::string csv = "code_index,slope\n";
      for (std::size_t i = 0; i < a.slopes.size(); ++i) csv += std::to_string(i) + "," + fmt(a.slopes[i]) + "\n";
      out_ << "median = " << fmt(a.median) << "\nq1 = " << fmt(a.q1) << "\nq3 = " << fmt(a.q3) << '\n';
      emit({{"dim-entropy.csv", csv}});
      return kOk;
    };
  }

  struct KernelArgs {
    std::string code = "random:1";
    int grid = 256;
  } ker_;
  void add_kernel() {
    Command& c = add("kernel", "W, Y and Gamma on a grid for one code");
    c.opt("code", ker_.code, "code j");
    c.opt("grid", ker_.grid, "number of grid points k/grid");
    c.body = [this] {
      const SystemParams p = params();
      const Phi phi = resolve_phi(common_);
      const Code j = parse_code(p.b, ker_.code);
      if (ker_.grid < 1) throw InvalidArgument("--grid must be >= 1");
      std::string csv = "x,W,Y,Gamma\n";
      for (int k = 0; k < ker_.grid; ++k) {
        const double x = static_cast<double>(k) / ker_.grid;
        csv += fmt(x) + "," + fmt(eval_W(p, phi, x, common_.tol)) + "," + fmt(eval_Y(p, phi, x, j, common_.tol)) + "," +
               fmt(eval_Gamma(p, phi, x, j, common_.tol)) + "\n";
      }
      emit({{"kernel.csv", csv}});
      return kOk;
    };
  }

  struct CheckHArgs {
    int depth = 2;
    int pairs = 2;
    int grid = 1024;
    bool no_refine = false;
  } chk_;
  void add_check_h() {
    Command& c = add("check-h", "scan code pairs for the separation condition");
    c.opt("depth", chk_.depth, "prefix depth");
    c.opt("samples-per-pair", chk_.pairs, "seeded tails per first-symbol pair");
    c.opt("grid", chk_.grid, "grid size for the separation sup");
    c.flag("no-refine", chk_.no_refine, "skip local refinement of the sup");
    c.body = [this] {
      HScanOptions o;
      o.grid_size = chk_.grid;
      o.refine = !chk_.no_refine;
      o.tol = common_.tol;
      const HScanReport r = condition_H_scan(params(), resolve_phi(common_), chk_.depth, chk_.pairs, common_.seed, o);
      out_ << "classification = " << to_string(r.classification) << "\nmin_sep = " << fmt(r.min_sep)
           << "\nmax_sep = " << fmt(r.max_sep) << '\n';
      emit({{"check-h.csv", to_csv(r)}});
      return kOk;
    };
  }

  struct TransArgs {
    std::string u = "random:1";
    std::string v = "random:2";
    int l0 = 6;
    int stabilize = 0;
  } tr_;
  void add_transversality() {
    Command& c = add("transversality", "transversality certificate for a pair of codes");
    c.opt("code-u", tr_.u, "first code");
    c.opt("code-v", tr_.v, "second code");
    c.opt("l0", tr_.l0, "interval level");
    c.opt("stabilize", tr_.stabilize, "also search the stabilization level up to this value (0: off)");
    c.body = [this] {
      const SystemParams p = params();
      const Phi phi = resolve_phi(common_);
      const Code u = parse_code(p.b, tr_.u), v = parse_code(p.b, tr_.v);
      const Certificate cert = transversality_certificate(p, phi, u, v, tr_.l0, common_.tol);
      out_ << "ratio = " << fmt(cert.ratio) << (cert.degenerate ? " (degenerate)" : "") << '\n';
      std::map<std::string, std::string> files = {{"transversality.csv", to_csv(cert)}};
      if (tr_.stabilize > 0) {
        const StabilizationReport s = certificate_stabilization(p, phi, {{u, v}}, tr_.stabilize);
        std::string csv = "level,min_ratio\n";
        for (std::size_t i = 0; i < s.min_ratio.size(); ++i) csv += std::to_string(i + 1) + "," + fmt(s.min_ratio[i]) + "\n";
        files["stabilization.csv"] = csv;
        out_ << "stabilized = " << str(s.stabilized) << "\nlevel = " << s.level << '\n';
      }
      emit(files);
      return kOk;
    };
  }

  struct RenormArgs {
    int p = 2;
    std::string op = "renormalize";
  } ren_;
  void add_renorm() {
    Command& c = add("renorm", "apply a renormalization operator to a Fourier phi");
    c.opt("p", ren_.p, "operator index p");
    c.opt("op", ren_.op, "renormalize, pre, s or rescale")
        ->check(CLI::IsMember({"renormalize", "pre", "s", "rescale"}));
    c.body = [this] {
      params();
      const FourierPhi f = resolve_phi(common_).to_fourier();
      FourierPhi g;
      if (ren_.op == "renormalize") g = renormalize(f, ren_.p);
      else if (ren_.op == "pre") g = pre_renormalize(f, ren_.p);
      else if (ren_.op == "s") g = s_p(f, ren_.p);
      else g = rescale(f, ren_.p);
      out_ << "coefficients = " << g.coeffs().size() << '\n';
      emit({{"renorm.txt", to_text(g)}});
      return kOk;
    };
  }

  struct PeriodArgs {
    int k = 1;
    std::string denominators = "2:16";
    int M_max = 256;
    double threshold_factor = 100.0;
  } per_;
  void add_period_scan() {
    Command& c = add("period-scan", "classify rational periods by regulating energy");
    c.opt("k", per_.k, "derivative order");
    c.opt("denominators", per_.denominators, "lo:hi range or comma list");
    c.opt("M-max", per_.M_max, "energy truncation");
    c.opt("threshold-factor", per_.threshold_factor, "divergence threshold factor");
    c.body = [this] {
      std::vector<long long> dens;
      if (per_.denominators.find(':') != std::string::npos) {
        const auto [lo, hi] = parse_range(per_.denominators, "--denominators");
        for (int q = lo; q <= hi; ++q) dens.push_back(q);
      } else {
        dens = parse_list<long long>(per_.denominators, "--denominators");
      }
      PeriodScanOptions o;
      o.M_max = per_.M_max;
      o.threshold_factor = per_.threshold_factor;
      const PeriodScanReport r = period_scan(params(), resolve_phi(common_).to_fourier(), per_.k, dens, o);
      out_ << "regulating denominators =";
      for (auto q : r.regulating_denominators) out_ << ' ' << q;
      out_ << '\n';
      emit({{"period-scan.csv", to_csv(r)}});
      return kOk;
    };
  }

  struct ThetaArgs {
    int n = 8;
    std::string i_levels = "0,8,16";
    long long M = 8;
    double cap = 16777216;
    bool subsample = false;
    int separation = 0;
    int dump_level = -1;
  } th_;
  void add_theta() {
    Command& c = add("theta", "entropy of the map measures theta_n on the partitions L_i");
    c.opt("n", th_.n, "scale n (maps have height n-hat)");
    c.opt("i-levels", th_.i_levels, "comma list of partition levels");
    c.opt("M", th_.M, "grid size M, a power of b");
    c.opt("cap", th_.cap, "largest number of maps enumerated");
    c.flag("subsample", th_.subsample, "draw a seeded subsample when b^n-hat exceeds the cap");
    c.opt("separation", th_.separation, "also find the separation constant up to this n (0: off)");
    c.opt("dump-level", th_.dump_level, "write the partition cell of every map at this level (-1: off)");
    c.body = [this] {
      const SystemParams p = params();
      const Phi phi = resolve_phi(common_);
      const Code j = Code::random(p.b, common_.seed);
      ThetaOptions o;
      o.cap = sample_number(th_.cap);
      o.subsample = th_.subsample;
      o.seed = common_.seed;
      o.tol = common_.tol;
      o.threads = common_.threads;
      const ThetaEntropyReport r = theta_entropy(p, phi, j, th_.n, parse_list<int>(th_.i_levels, "--i-levels"), th_.M, o);
      std::string csv = "n,n_hat,i_level,H,H_over_n,size,subsampled\n";
      for (const auto& row : r.rows)
        csv += std::to_string(r.n) + "," + std::to_string(r.n_hat) + "," + std::to_string(row.i_level) + "," + fmt(row.H) +
               "," + fmt(r.n > 0 ? row.H / r.n : 0.0) + "," + std::to_string(r.size) + "," + str(r.subsampled) + "\n";
      std::map<std::string, std::string> files = {{"theta.csv", csv}};
      if (th_.separation > 0) {
        const SeparationReport s = separation_constant_C(p, phi, j, th_.separation, th_.M, 8, common_.tol);
        std::string sc = "n,C\n";
        for (std::size_t i = 0; i < s.C_per_n.size(); ++i) sc += std::to_string(i + 1) + "," + std::to_string(s.C_per_n[i]) + "\n";
        files["theta-separation.csv"] = sc;
        out_ << "separable = " << str(s.separable) << "\nC = " << s.C << '\n';
      }
      if (th_.dump_level >= 0) files["partition.csv"] = partition_dump(p, build_theta(p, phi, j, th_.n, th_.M, o), th_.dump_level);
      for (const auto& row : r.rows) out_ << "H(L_" << row.i_level << ") = " << fmt(row.H) << '\n';
      emit(files);
      return kOk;
    };
  }

  struct PorosityArgs {
    std::string code = "random:1";
    double h = 1.0;
    double delta = 0.1;
    int m = 6;
    std::string range = "4:12";
    int level_cap = 18;
    double samples = 2e6;
    double ucas_delta = 0.0;
    std::string radii = "0.5,0.25,0.125,0.0625";
  } por_;
  void add_porosity() {
    Command& c = add("porosity", "entropy porosity fraction and uniform continuity across scales");
    c.opt("code", por_.code, "code j");
    c.opt("entropy-rate", por_.h, "entropy rate h");
    c.opt("delta", por_.delta, "slack delta");
    c.opt("m", por_.m, "scale gap m");
    c.opt("range", por_.range, "scales n1:n2");
    c.opt("level-cap", por_.level_cap, "finest histogram level");
    c.opt("samples", por_.samples, "number of x samples");
    c.opt("ucas-delta", por_.ucas_delta, "also probe ball-mass ratios at this delta (0: off)");
    c.opt("radii", por_.radii, "radii for the continuity probe");
    c.body = [this] {
      const SystemParams p = params();
      const Phi phi = resolve_phi(common_);
      const Code j = parse_code(p.b, por_.code);
      const auto [n1, n2] = parse_range(por_.range, "--range");
      const std::uint64_t n = sample_number(por_.samples);
      const PorosityReport r = porosity_probe(p, phi, j, por_.h, por_.delta, por_.m, n1, n2, por_.level_cap, n,
                                              common_.seed, sample_opt());
      std::map<std::string, std::string> files = {
          {"porosity.csv", "fraction,porous,components\n" + fmt(r.fraction) + "," + str(r.porous) + "," +
                               std::to_string(r.components) + "\n"}};
      out_ << "fraction = " << fmt(r.fraction) << '\n';
      if (por_.ucas_delta > 0.0) {
        const UcasReport u = ucas_probe(p, phi, {j}, por_.ucas_delta, parse_list<double>(por_.radii, "--radii"), {}, n,
                                        common_.seed, {}, sample_opt());
        files["ucas.csv"] = "delta,sup_ratio,degenerate,level\n" + fmt(por_.ucas_delta) + "," + fmt(u.sup_ratio) + "," +
                            str(u.degenerate) + "," + std::to_string(u.level) + "\n";
        out_ << "ucas sup = " << fmt(u.sup_ratio) << '\n';
      }
      emit(files);
      return kOk;
    };
  }

  struct ConvolveArgs {
    std::string theta_hist;
    std::string tau_hist;
    int n = 10;
    int i_level = 2;
    int k = 4;
    long long M = 4;
  } conv_;
  void add_convolve() {
    Command& c = add("convolve", "convolution entropy gain of two histograms, or the full experiment on theta_n");
    c.opt("theta-hist", conv_.theta_hist, "histogram file for theta");
    c.opt("tau-hist", conv_.tau_hist, "histogram file for tau");
    c.opt("n", conv_.n, "scale n");
    c.opt("i-level", conv_.i_level, "component level i (experiment)");
    c.opt("k", conv_.k, "scale gap k");
    c.opt("M", conv_.M, "grid size M (experiment)");
    c.body = [this] {
      if (conv_.theta_hist.empty() != conv_.tau_hist.empty())
        throw InvalidArgument("--theta-hist and --tau-hist go together");
      if (!conv_.theta_hist.empty()) {
        const auto theta = BadicHistogram::parse_text(read_file(conv_.theta_hist));
        const auto tau = BadicHistogram::parse_text(read_file(conv_.tau_hist));
        const ConvolutionGain g = convolution_entropy_gain(theta, tau, conv_.n, conv_.k);
        out_ << "gain = " << fmt(g.gain) << '\n';
        emit({{"convolve.csv", "H_theta,H_tau,H_conv,gain\n" + fmt(g.H_theta) + "," + fmt(g.H_tau) + "," + fmt(g.H_conv) +
                                   "," + fmt(g.gain) + "\n"}});
        return kOk;
      }
      const SystemParams p = params();
      ExperimentOptions o;
      o.theta.tol = common_.tol;
      o.theta.threads = common_.threads;
      const ExperimentReport r = entropy_increase_experiment(p, resolve_phi(common_), Code::random(p.b, common_.seed),
                                                             conv_.n, conv_.i_level, conv_.k, conv_.M, common_.seed, o);
      out_ << "components = " << r.components << "\nselected = " << r.selected << "\nh_type = " << r.h_type_components
           << "\npositive_fraction = " << fmt(r.positive_fraction) << '\n';
      emit({{"convolve.csv", to_csv(r)}});
      return kOk;
    };
  }

  std::ostream& out_;
  CLI::App app_;
  Common common_;
  std::map<std::string, Command> commands_;
  std::string name_;
  std::vector<std::string> argv_;
};

// `key = value` lines become --key=value right after the subcommand, so later flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  std::vector<std::string> injected;
  std::istringstream in(read_file(path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(body.substr(0, eq)), value = trim(body.substr(eq + 1));
    if (key.empty()) throw InvalidArgument(path + ":" + std::to_string(lineno) + ": empty key");
    injected.push_back("--" + key + "=" + value);
  }
  const auto at = args.empty() ? args.end() : args.begin() + 1;
  args.insert(at, injected.begin(), injected.end());
  return args;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    Cli cli(out);
    const std::vector<std::string> full = expand_config(args);
    std::vector<std::string> rev(full.rbegin(), full.rend());
    try {
      cli.app().parse(rev);
    } catch (const CLI::CallForHelp&) {
      out << cli.app().help();
      return kOk;
    } catch (const CLI::CallForAllHelp&) {
      out << cli.app().help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::CallForVersion&) {
      out << WEIERLAB_VERSION << '\n';
      return kOk;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      return kBadInput;
    }
    return cli.dispatch(full);
  } catch (const InvariantViolation& e) {
    err << "invariant violated: " << e.what() << '\n';
    return kInvariantFailed;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const UnsupportedDerivative& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kInvariantFailed;
  }
}

}  // namespace weierlab
