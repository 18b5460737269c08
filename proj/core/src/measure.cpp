#include "weier/measure.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "numerics.hpp"
#include "parallel.hpp"
#include "weier/batch.hpp"
#include "weier/errors.hpp"
#include "weier/format.hpp"
#include "weier/kernel.hpp"
#include "weier/weier.hpp"

namespace weier {

namespace {

double sample_x(std::uint64_t i, std::uint64_t N, std::uint64_t seed, bool stratified) {
  const double u = detail::unit_from(seed, i);
  if (!stratified) return u;
  const double x = (static_cast<double>(i) + u) / static_cast<double>(N);
  return x < 1.0 ? x : std::nextafter(1.0, 0.0);
}

void check_levels(int lo, int hi) {
  if (lo < 0 || hi < lo) throw InvalidArgument("levels must satisfy 0 <= lo <= hi");
  if (hi == lo) throw InvalidArgument("need at least 2 levels for a slope");
}

double median_of(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double f = pos - static_cast<double>(i);
  return i + 1 < v.size() ? v[i] * (1.0 - f) + v[i + 1] * f : v[i];
}

}  // namespace

std::uint64_t sample_count(int b, std::uint64_t n, bool stratified) {
  if (!stratified) return n;
  std::uint64_t c = 1;
  while (c < n) c *= static_cast<std::uint64_t>(b);
  return c;
}

std::vector<Code> seeded_codes(int b, int count, std::uint64_t seed) {
  std::vector<Code> out;
  for (int k = 0; k < count; ++k) out.push_back(Code::random(b, seed + static_cast<std::uint64_t>(k)));
  return out;
}

std::vector<ProjectedSample> sample_projected_measures(const SystemParams& p, const Phi& phi,
                                                       const std::vector<Code>& codes, std::uint64_t n_samples,
                                                       int level, std::uint64_t seed, const SampleOptions& opt) {
  if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
  if (level < 0) throw InvalidArgument("level must be >= 0");
  if (codes.empty()) throw InvalidArgument("need at least one code");
  const std::uint64_t N = sample_count(p.b, n_samples, opt.stratified);
  if (N > 0xffffffffULL) throw InvalidArgument("too many samples");
  const ProjectionBank bank(p, phi, codes, opt.tol);
  const std::size_t C = codes.size();
  const double scale = std::pow(static_cast<double>(p.b), level);
  const double B = bank.projection_bound();
  const auto lo = static_cast<std::int64_t>(std::floor(-B * scale)) - 1;
  const auto hi = static_cast<std::int64_t>(std::floor(B * scale)) + 1;
  const auto width = static_cast<std::uint64_t>(hi - lo + 1);
  const int workers = detail::worker_count(N, opt.threads);
  const bool dense = width * C * static_cast<std::uint64_t>(workers) <= (std::uint64_t{1} << 27);

  std::vector<std::vector<std::uint32_t>> counts(static_cast<std::size_t>(workers));
  std::vector<std::vector<std::int64_t>> keys(dense ? 0 : C);
  if (!dense)
    for (auto& k : keys) k.resize(N);
  detail::parallel_ranges(N, workers, [&](int w, std::uint64_t a, std::uint64_t e) {
    std::vector<double> out(C);
    auto& cnt = counts[static_cast<std::size_t>(w)];
    if (dense) cnt.assign(width * C, 0);
    for (std::uint64_t i = a; i < e; ++i) {
      bank.project_graph(sample_x(i, N, seed, opt.stratified), out.data());
      for (std::size_t c = 0; c < C; ++c) {
        const auto k = static_cast<std::int64_t>(std::floor(out[c] * scale));
        if (dense) {
          if (k < lo || k > hi) throw InvariantViolation("projection escaped its a priori bound");
          ++cnt[c * width + static_cast<std::uint64_t>(k - lo)];
        } else {
          keys[c][i] = k;
        }
      }
    }
  });

  std::vector<ProjectedSample> res(C);
  for (std::size_t c = 0; c < C; ++c) {
    std::vector<BadicHistogram::Cell> cells;
    if (dense) {
      for (std::uint64_t j = 0; j < width; ++j) {
        std::uint64_t s = 0;
        for (const auto& cnt : counts) s += cnt[c * width + j];
        if (s) cells.push_back({lo + static_cast<std::int64_t>(j), 0, static_cast<double>(s)});
      }
    } else {
      auto& k = keys[c];
      std::sort(k.begin(), k.end());
      for (std::size_t i = 0; i < k.size();) {
        std::size_t j = i;
        while (j < k.size() && k[j] == k[i]) ++j;
        cells.push_back({k[i], 0, static_cast<double>(j - i)});
        i = j;
      }
      std::vector<std::int64_t>().swap(k);
    }
    res[c].hist = BadicHistogram(p.b, 1, level, std::move(cells));
    res[c].n_samples = N;
    res[c].undersampled = static_cast<double>(N) < scale;
  }
  return res;
}

ProjectedSample sample_projected_measure(const SystemParams& p, const Phi& phi, const Code& code,
                                         std::uint64_t n_samples, int level, std::uint64_t seed,
                                         const SampleOptions& opt) {
  return std::move(sample_projected_measures(p, phi, {code}, n_samples, level, seed, opt).front());
}

AlphaReport alpha_estimate(const SystemParams& p, const Phi& phi, const std::vector<Code>& codes, int level_lo,
                           int level_hi, std::uint64_t n_samples, std::uint64_t seed, const SampleOptions& opt) {
  check_levels(level_lo, level_hi);
  auto samples = sample_projected_measures(p, phi, codes, n_samples, level_hi, seed, opt);
  AlphaReport r;
  r.n_samples = samples.front().n_samples;
  for (auto& s : samples) {
    r.curves.push_back(entropy_curve(s.hist, level_lo, level_hi));
    r.slopes.push_back(r.curves.back().slope);
  }
  r.median = median_of(r.slopes, 0.5);
  r.q1 = median_of(r.slopes, 0.25);
  r.q3 = median_of(r.slopes, 0.75);
  return r;
}

namespace {

struct ColumnCounter {
  double scale = 1.0;
  std::int64_t col = 0;
  double lo = 0.0, hi = 0.0;
  std::uint64_t count = 0;

  void start(double x, double y) {
    col = static_cast<std::int64_t>(std::floor(x * scale));
    lo = hi = y;
  }
  void close() {
    count += static_cast<std::uint64_t>(std::floor(hi * scale) - std::floor(lo * scale)) + 1;
  }
  void segment(double x0, double y0, double x1, double y1) {
    const auto c1 = static_cast<std::int64_t>(std::floor(x1 * scale));
    while (col < c1) {
      const double xb = static_cast<double>(col + 1) / scale;
      const double yb = x1 > x0 ? y0 + (y1 - y0) * ((xb - x0) / (x1 - x0)) : y1;
      lo = std::min(lo, yb);
      hi = std::max(hi, yb);
      close();
      ++col;
      lo = hi = yb;
    }
    lo = std::min(lo, y1);
    hi = std::max(hi, y1);
  }
  // Counts the open column unless the polyline ends exactly on its left edge.
  void finish(double x_last) {
    if (x_last * scale != std::floor(x_last * scale) || col != static_cast<std::int64_t>(x_last * scale)) close();
  }
};

std::vector<ColumnCounter> make_counters(int b, int lo, int hi) {
  std::vector<ColumnCounter> cs(static_cast<std::size_t>(hi - lo + 1));
  for (int n = lo; n <= hi; ++n) cs[static_cast<std::size_t>(n - lo)].scale = std::pow(static_cast<double>(b), n);
  return cs;
}

}  // namespace

std::vector<std::uint64_t> polyline_box_counts(int b, const std::vector<double>& xs, const std::vector<double>& ys,
                                               int level_lo, int level_hi) {
  if (xs.size() != ys.size() || xs.empty()) throw InvalidArgument("polyline needs matching non-empty coordinates");
  if (level_lo < 0 || level_hi < level_lo) throw InvalidArgument("levels must satisfy 0 <= lo <= hi");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] < xs[i - 1]) throw InvalidArgument("polyline x coordinates must be sorted");
  auto cs = make_counters(b, level_lo, level_hi);
  for (auto& c : cs) c.start(xs[0], ys[0]);
  for (std::size_t i = 1; i < xs.size(); ++i)
    for (auto& c : cs) c.segment(xs[i - 1], ys[i - 1], xs[i], ys[i]);
  std::vector<std::uint64_t> out;
  for (auto& c : cs) {
    c.finish(xs.back());
    out.push_back(c.count);
  }
  return out;
}

BoxReport graph_box_dimension(const SystemParams& p, const Phi& phi, int level_lo, int level_hi,
                              std::uint64_t n_samples, std::uint64_t seed, const SampleOptions& opt) {
  check_levels(level_lo, level_hi);
  if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
  const std::uint64_t N = sample_count(p.b, n_samples, opt.stratified);
  int s = 0;
  for (std::uint64_t c = 1; c < N; c *= static_cast<std::uint64_t>(p.b)) ++s;
  const int gap = opt.matched_subgrid ? std::max(0, s - level_hi) : 0;

  const double w0 = eval_W(p, phi, 0.0, opt.tol);
  auto cs = make_counters(p.b, level_lo, level_hi);
  // Level n sees one sample per level-(n + gap) stratum, so every level misses the same
  // sub-sample detail relative to its own scale.
  std::vector<std::uint64_t> stride(cs.size(), 1);
  std::vector<double> px(cs.size(), 0.0), py(cs.size(), w0);
  for (int n = level_lo; n <= level_hi; ++n) {
    const auto k = static_cast<std::size_t>(n - level_lo);
    if (opt.matched_subgrid && s > n + gap) stride[k] = static_cast<std::uint64_t>(detail::ipow(p.b, s - n - gap));
    cs[k].start(0.0, w0);
  }

  std::vector<double> xs_all;
  if (!opt.stratified) {
    xs_all.resize(N);
    for (std::uint64_t i = 0; i < N; ++i) xs_all[i] = sample_x(i, N, seed, false);
    std::sort(xs_all.begin(), xs_all.end());
  }
  const std::uint64_t chunk = std::uint64_t{1} << 18;
  std::vector<double> xs(chunk), ys(chunk);
  for (std::uint64_t base = 0; base < N; base += chunk) {
    const std::uint64_t len = std::min(chunk, N - base);
    detail::parallel_ranges(len, opt.threads, [&](int, std::uint64_t a, std::uint64_t e) {
      for (std::uint64_t i = a; i < e; ++i) {
        const double x = opt.stratified ? sample_x(base + i, N, seed, true) : xs_all[base + i];
        xs[i] = x;
        ys[i] = eval_W(p, phi, x, opt.tol);
      }
    });
    for (std::size_t k = 0; k < cs.size(); ++k) {
      const std::uint64_t st = stride[k];
      for (std::uint64_t i = (st - base % st) % st; i < len; i += st) {
        cs[k].segment(px[k], py[k], xs[i], ys[i]);
        px[k] = xs[i];
        py[k] = ys[i];
      }
    }
  }
  for (std::size_t k = 0; k < cs.size(); ++k) {
    cs[k].segment(px[k], py[k], 1.0, w0);
    cs[k].finish(1.0);
  }

  BoxReport r;
  r.D = p.D;
  r.n_samples = N;
  r.sample_gap = gap;
  std::vector<double> lx, ly;
  for (int n = level_lo; n <= level_hi; ++n) {
    const auto cnt = cs[static_cast<std::size_t>(n - level_lo)].count;
    r.levels.push_back(n);
    r.counts.push_back(cnt);
    lx.push_back(n);
    ly.push_back(std::log(static_cast<double>(cnt)) / std::log(static_cast<double>(p.b)));
    r.log_counts.push_back(ly.back());
  }
  const LineFit f = fit_line(lx, ly);
  r.slope = f.slope;
  r.slope_stderr = f.stderr_slope;
  r.intercept = f.intercept;
  return r;
}

std::string to_csv(const BoxReport& r) {
  std::ostringstream os;
  os << "level,count,log_b_count,slope,D\n";
  for (std::size_t i = 0; i < r.levels.size(); ++i)
    os << r.levels[i] << ',' << r.counts[i] << ',' << fmt(r.log_counts[i]) << ',' << fmt(r.slope) << ',' << fmt(r.D)
       << '\n';
  return os.str();
}

BadicHistogram graph_histogram(const SystemParams& p, const Phi& phi, std::uint64_t n_samples, int level,
                               std::uint64_t seed, const SampleOptions& opt) {
  if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
  const std::uint64_t N = sample_count(p.b, n_samples, opt.stratified);
  const double scale = std::pow(static_cast<double>(p.b), level);
  std::vector<BadicHistogram::Cell> cells(N);
  detail::parallel_ranges(N, opt.threads, [&](int, std::uint64_t a, std::uint64_t e) {
    for (std::uint64_t i = a; i < e; ++i) {
      const double x = sample_x(i, N, seed, opt.stratified);
      const double y = eval_W(p, phi, x, opt.tol);
      cells[i] = {static_cast<std::int64_t>(std::floor(x * scale)), static_cast<std::int64_t>(std::floor(y * scale)), 1.0};
    }
  });
  return BadicHistogram(p.b, 2, level, std::move(cells));
}

DimMuReport dim_mu_check(const SystemParams& p, const Phi& phi, int code_count, int level_lo, int level_hi,
                         std::uint64_t n_samples, std::uint64_t seed, const SampleOptions& opt) {
  check_levels(level_lo, level_hi);
  if (code_count < 1) throw InvalidArgument("code_count must be >= 1");
  DimMuReport r;
  r.curve2d = entropy_curve(graph_histogram(p, phi, n_samples, level_hi, seed, opt), level_lo, level_hi);
  r.dim_mu = r.curve2d.slope;
  const AlphaReport a = alpha_estimate(p, phi, seeded_codes(p.b, code_count, seed), level_lo, level_hi, n_samples,
                                       seed, opt);
  r.alpha = a.median;
  r.rhs = 1.0 + (p.D - 1.0) * r.alpha;
  r.gap = std::fabs(r.dim_mu - r.rhs);
  return r;
}

int n_hat(const SystemParams& p, int n) {
  if (n < 0) throw InvalidArgument("n must be >= 0");
  if (n == 0) return 0;
  int e = 0;
  const double m = std::frexp(p.lambda, &e);
  const bool b_pow2 = (p.b & (p.b - 1)) == 0;
  if (b_pow2 && m == 0.5) {
    // lambda = 2^-(1-e), b = 2^s: nhat = ceil(s n / (1-e)), exact in integers
    const long long s = std::countr_zero(static_cast<unsigned>(p.b));
    const long long q = 1 - e;
    return static_cast<int>((s * n + q - 1) / q);
  }
  const long double lb = std::log(static_cast<long double>(p.b));
  const long double ll = -std::log(static_cast<long double>(p.lambda));
  auto k = static_cast<long long>(std::ceil(static_cast<long double>(n) * lb / ll));
  // lambda^k <= b^-n  <=>  k ll >= n lb
  while (static_cast<long double>(k) * ll < static_cast<long double>(n) * lb) ++k;
  while (k > 0 && static_cast<long double>(k - 1) * ll >= static_cast<long double>(n) * lb) --k;
  return static_cast<int>(k);
}

Decomposition decompose_projection(const SystemParams& p, const Phi& phi, const Code& code, int n_decomp, int level,
                                   std::uint64_t n_samples, std::uint64_t seed, std::uint64_t component_cap,
                                   const SampleOptions& opt) {
  if (n_decomp < 0) throw InvalidArgument("n_decomp must be >= 0");
  if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
  const double ncomp = std::pow(static_cast<double>(p.b), n_decomp);
  if (ncomp > static_cast<double>(component_cap))
    throw InvalidArgument("b^n_decomp = " + fmt(ncomp) + " components exceed the cap " + fmt(component_cap));
  const auto K = static_cast<std::uint64_t>(ncomp);
  const std::uint64_t per = std::max<std::uint64_t>(1, n_samples / K);
  const ProjectionBank bank(p, phi, {code}, opt.tol);

  Decomposition d;
  d.tolerance = 3.0 / std::sqrt(static_cast<double>(n_samples));
  d.components.resize(K);
  for (std::uint64_t c = 0; c < K; ++c) d.words.push_back(Word::from_index(p.b, n_decomp, c));
  detail::parallel_ranges(K, opt.threads, [&](int, std::uint64_t a, std::uint64_t e) {
    for (std::uint64_t c = a; c < e; ++c) {
      std::vector<double> vals(per);
      const std::uint64_t s = detail::splitmix64(seed ^ (0x5bd1e995ULL + c));
      for (std::uint64_t i = 0; i < per; ++i) {
        const double x = sample_x(i, per, s, opt.stratified);
        const auto [gx, gy] = apply_word(p, phi, d.words[c], x, bank.W(x));
        double g = 0.0;
        bank.gamma(gx, &g);
        vals[i] = gy - g;
      }
      d.components[c] = BadicHistogram::from_values(p.b, level, vals).normalized();
    }
  });
  std::vector<std::pair<double, const BadicHistogram*>> parts;
  for (const auto& h : d.components) parts.emplace_back(1.0 / static_cast<double>(K), &h);
  d.mixture = BadicHistogram::mix(parts);

  std::vector<double> vals(n_samples);
  const std::uint64_t s = detail::splitmix64(seed ^ 0x9e3779b97f4a7c15ULL);
  detail::parallel_ranges(n_samples, opt.threads, [&](int, std::uint64_t a, std::uint64_t e) {
    for (std::uint64_t i = a; i < e; ++i) {
      const double x = sample_x(i, n_samples, s, opt.stratified);
      bank.project_graph(x, &vals[i]);
    }
  });
  d.direct = BadicHistogram::from_values(p.b, level, vals).normalized();

  const auto& A = d.mixture.cells();
  const auto& B = d.direct.cells();
  std::size_t i = 0, j = 0;
  while (i < A.size() || j < B.size()) {
    double diff;
    if (j == B.size() || (i < A.size() && A[i].x < B[j].x)) diff = A[i++].mass;
    else if (i == A.size() || B[j].x < A[i].x) diff = B[j++].mass;
    else diff = std::fabs(A[i++].mass - B[j++].mass);
    d.residual = std::max(d.residual, diff);
  }
  return d;
}

BallMass::BallMass(const BadicHistogram& h) : b_(h.base()), scale_(std::pow(static_cast<double>(h.base()), h.level())) {
  if (h.dim() != 1) throw InvalidArgument("ball masses need a 1D histogram");
  if (!(h.total() > 0.0)) throw InvalidArgument("ball masses need positive total mass");
  const auto& cells = h.cells();
  first_ = cells.front().x;
  const auto width = static_cast<std::size_t>(cells.back().x - first_ + 1);
  mass_.assign(width, 0.0);
  for (const auto& c : cells) mass_[static_cast<std::size_t>(c.x - first_)] = c.mass / h.total();
  prefix_.assign(width + 1, 0.0);
  for (std::size_t i = 0; i < width; ++i) prefix_[i + 1] = prefix_[i] + mass_[i];
}

double BallMass::cdf(double z) const {
  const double u = z * scale_;
  const double f = std::floor(u);
  const double idx = f - static_cast<double>(first_);
  if (idx < 0.0) return 0.0;
  if (idx >= static_cast<double>(mass_.size())) return prefix_.back();
  const auto i = static_cast<std::size_t>(idx);
  return prefix_[i] + (u - f) * mass_[i];
}

double BallMass::operator()(double center, double radius) const {
  return std::max(0.0, cdf(center + radius) - cdf(center - radius));
}

double BallMass::quantile(double q) const {
  const double target = q * prefix_.back();
  const auto it = std::lower_bound(prefix_.begin() + 1, prefix_.end(), target);
  const auto i = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - prefix_.begin() - 1, static_cast<std::ptrdiff_t>(mass_.size()) - 1));
  const double frac = mass_[i] > 0.0 ? std::clamp((target - prefix_[i]) / mass_[i], 0.0, 1.0) : 0.5;
  return (static_cast<double>(first_) + static_cast<double>(i) + frac) / scale_;
}

UcasReport ucas_ratio(const BadicHistogram& h, double delta, const std::vector<double>& r_grid,
                      const std::vector<double>& x_grid, const UcasOptions& uopt) {
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidArgument("delta must lie in (0, 1]");
  if (r_grid.empty()) throw InvalidArgument("r_grid must be non-empty");
  const BallMass ball(h);
  std::vector<double> xs = x_grid;
  if (xs.empty())
    for (int k = 1; k <= uopt.auto_x_points; ++k) xs.push_back(ball.quantile(static_cast<double>(k) / (uopt.auto_x_points + 1)));
  UcasReport r;
  r.level = h.level();
  r.degenerate = h.max_cell_mass() >= 0.5;
  for (double x : xs)
    for (double rad : r_grid) {
      if (!(rad > 0.0)) throw InvalidArgument("radii must be > 0");
      const double big = ball(x, rad);
      if (big < uopt.min_ball_mass || big <= 0.0) continue;
      const double ratio = ball(x, delta * rad) / big;
      ++r.evaluated;
      if (ratio > r.sup_ratio) {
        r.sup_ratio = ratio;
        r.arg_x = x;
        r.arg_r = rad;
      }
    }
  return r;
}

UcasReport ucas_probe(const SystemParams& p, const Phi& phi, const std::vector<Code>& codes, double delta,
                      const std::vector<double>& r_grid, const std::vector<double>& x_grid, std::uint64_t n_samples,
                      std::uint64_t seed, const UcasOptions& uopt, const SampleOptions& opt) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  if (r_grid.empty()) throw InvalidArgument("r_grid must be non-empty");
  const double r_min = *std::min_element(r_grid.begin(), r_grid.end());
  if (!(r_min > 0.0)) throw InvalidArgument("radii must be > 0");
  const int level = static_cast<int>(std::ceil(std::log(1.0 / (delta * r_min)) / std::log(static_cast<double>(p.b)))) + 2;
  auto samples = sample_projected_measures(p, phi, codes, n_samples, std::max(level, 0), seed, opt);
  UcasReport best;
  best.level = level;
  for (std::size_t c = 0; c < samples.size(); ++c) {
    UcasReport r = ucas_ratio(samples[c].hist, delta, r_grid, x_grid, uopt);
    best.degenerate = best.degenerate || r.degenerate;
    best.evaluated += r.evaluated;
    if (r.sup_ratio > best.sup_ratio) {
      best.sup_ratio = r.sup_ratio;
      best.arg_code = c;
      best.arg_x = r.arg_x;
      best.arg_r = r.arg_r;
    }
  }
  return best;
}

PorosityReport porosity_fraction(const BadicHistogram& hist, double h, double delta, int m, int n1, int n2) {
  if (hist.dim() != 1) throw InvalidArgument("porosity needs a 1D histogram");
  if (m < 1) throw InvalidArgument("m must be >= 1");
  if (n1 < 0 || n2 < n1) throw InvalidArgument("scales must satisfy 0 <= n1 <= n2");
  if (n2 + m > hist.level()) throw InvalidArgument("i + m exceeds the level cap " + std::to_string(hist.level()));
  if (!(delta > 0.0)) throw InvalidArgument("delta must be > 0");
  const double lb = std::log(static_cast<double>(hist.base()));
  PorosityReport r;
  double acc = 0.0;
  for (int i = n1; i <= n2; ++i) {
    const BadicHistogram fine = hist.coarsen(i + m);
    const auto k = detail::ipow(hist.base(), m);
    const auto& cells = fine.cells();
    double good = 0.0;
    for (std::size_t a = 0; a < cells.size();) {
      const std::int64_t parent = detail::floor_div(cells[a].x, k);
      std::size_t e = a;
      double mass = 0.0;
      while (e < cells.size() && detail::floor_div(cells[e].x, k) == parent) mass += cells[e++].mass;
      double H = 0.0;
      for (std::size_t t = a; t < e; ++t) {
        const double q = cells[t].mass / mass;
        H -= q * std::log(q);
      }
      H /= lb;
      if (H / m < h + delta) good += mass;
      ++r.components;
      a = e;
    }
    acc += good / fine.total();
  }
  r.fraction = acc / (n2 - n1 + 1);
  r.porous = r.fraction > 1.0 - delta;
  return r;
}

PorosityReport porosity_probe(const SystemParams& p, const Phi& phi, const Code& code, double h, double delta, int m,
                              int n1, int n2, int level_cap, std::uint64_t n_samples, std::uint64_t seed,
                              const SampleOptions& opt) {
  if (n2 + m > level_cap) throw InvalidArgument("i + m exceeds the level cap " + std::to_string(level_cap));
  const auto s = sample_projected_measure(p, phi, code, n_samples, level_cap, seed, opt);
  return porosity_fraction(s.hist, h, delta, m, n1, n2);
}

}  // namespace weier
