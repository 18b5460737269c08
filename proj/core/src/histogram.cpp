#include "weier/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "numerics.hpp"
#include "weier/errors.hpp"
#include "weier/format.hpp"

namespace weier {

namespace {

bool key_less(const BadicHistogram::Cell& a, const BadicHistogram::Cell& b) {
  return a.x != b.x ? a.x < b.x : a.y < b.y;
}

std::int64_t cell_of(double v, double scale) {
  const double s = std::floor(v * scale);
  if (!(std::fabs(s) < 9.0e18)) throw InvalidArgument("value " + fmt(v) + " outside the histogram index range");
  return static_cast<std::int64_t>(s);
}

double level_scale(int b, int level) { return std::pow(static_cast<double>(b), level); }

}  // namespace

BadicHistogram::BadicHistogram(int b, int dim, int level, std::vector<Cell> cells)
    : b_(b), dim_(dim), level_(level), cells_(std::move(cells)) {
  if (b < 2) throw InvalidArgument("b must be >= 2");
  if (dim != 1 && dim != 2) throw InvalidArgument("histogram dim must be 1 or 2");
  if (level < 0) throw InvalidArgument("histogram level must be >= 0");
  if (level_scale(b, level) > 4.0e18) throw InvalidArgument("histogram level too fine for 64-bit cell indices");
  finalize();
}

void BadicHistogram::finalize() {
  for (const auto& c : cells_) {
    if (!(c.mass >= 0.0) || !std::isfinite(c.mass)) throw InvalidArgument("histogram mass must be finite and >= 0");
    if (dim_ == 1 && c.y != 0) throw InvalidArgument("1D histogram cells must have y = 0");
  }
  std::sort(cells_.begin(), cells_.end(), key_less);
  std::vector<Cell> merged;
  merged.reserve(cells_.size());
  for (const auto& c : cells_) {
    if (!merged.empty() && merged.back().x == c.x && merged.back().y == c.y) merged.back().mass += c.mass;
    else merged.push_back(c);
  }
  std::erase_if(merged, [](const Cell& c) { return c.mass == 0.0; });
  cells_ = std::move(merged);
  detail::CompensatedSum s;
  for (const auto& c : cells_) s.add(c.mass);
  total_ = s.value();
}

BadicHistogram BadicHistogram::from_values(int b, int level, const std::vector<double>& values) {
  const double scale = level_scale(b, level);
  std::vector<Cell> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back({cell_of(v, scale), 0, 1.0});
  return BadicHistogram(b, 1, level, std::move(cells));
}

BadicHistogram BadicHistogram::from_points(int b, int level, const std::vector<double>& xs,
                                           const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw InvalidArgument("xs and ys differ in length");
  const double scale = level_scale(b, level);
  std::vector<Cell> cells;
  cells.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) cells.push_back({cell_of(xs[i], scale), cell_of(ys[i], scale), 1.0});
  return BadicHistogram(b, 2, level, std::move(cells));
}

BadicHistogram BadicHistogram::uniform(int b, int level, std::int64_t first, std::int64_t count) {
  if (count < 1) throw InvalidArgument("uniform histogram needs count >= 1");
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) cells.push_back({first + i, 0, 1.0});
  return BadicHistogram(b, 1, level, std::move(cells));
}

BadicHistogram BadicHistogram::point_mass(int b, int dim, int level, std::int64_t x, std::int64_t y) {
  return BadicHistogram(b, dim, level, {{x, dim == 1 ? 0 : y, 1.0}});
}

BadicHistogram BadicHistogram::mix(const std::vector<std::pair<double, const BadicHistogram*>>& parts) {
  if (parts.empty()) throw InvalidArgument("mix needs at least one part");
  const BadicHistogram& f = *parts.front().second;
  std::vector<Cell> cells;
  for (const auto& [w, h] : parts) {
    if (h->b_ != f.b_ || h->dim_ != f.dim_ || h->level_ != f.level_)
      throw InvalidArgument("mixed histograms must share base, dim and level");
    if (!(w >= 0.0)) throw InvalidArgument("mixture weights must be >= 0");
    for (const auto& c : h->cells_) cells.push_back({c.x, c.y, w * c.mass});
  }
  return BadicHistogram(f.b_, f.dim_, f.level_, std::move(cells));
}

BadicHistogram::Window BadicHistogram::window() const {
  Window w;
  if (cells_.empty()) return w;
  const auto k = detail::ipow(b_, level_);
  std::int64_t xmin = cells_.front().x, xmax = cells_.back().x;
  std::int64_t ymin = std::numeric_limits<std::int64_t>::max(), ymax = std::numeric_limits<std::int64_t>::min();
  for (const auto& c : cells_) {
    ymin = std::min(ymin, c.y);
    ymax = std::max(ymax, c.y);
  }
  w.x0 = detail::floor_div(xmin, k);
  w.x1 = detail::floor_div(xmax, k) + 1;
  if (dim_ == 2) {
    w.y0 = detail::floor_div(ymin, k);
    w.y1 = detail::floor_div(ymax, k) + 1;
  }
  return w;
}

BadicHistogram BadicHistogram::normalized() const {
  if (!(total_ > 0.0)) throw InvalidArgument("histogram has zero total mass");
  BadicHistogram out = *this;
  for (auto& c : out.cells_) c.mass /= total_;
  out.total_ = 1.0;
  return out;
}

double BadicHistogram::max_cell_mass() const {
  if (!(total_ > 0.0)) throw InvalidArgument("histogram has zero total mass");
  double m = 0.0;
  for (const auto& c : cells_) m = std::max(m, c.mass);
  return m / total_;
}

double BadicHistogram::entropy() const {
  if (!(total_ > 0.0)) throw InvalidArgument("entropy of a histogram with zero total mass");
  detail::CompensatedSum s;
  for (const auto& c : cells_) {
    const double q = c.mass / total_;
    s.add(-q * std::log(q));
  }
  return std::max(0.0, s.value() / std::log(static_cast<double>(b_)));
}

BadicHistogram BadicHistogram::coarsen(int m) const {
  if (m < 0 || m > level_) throw InvalidArgument("coarsen level must lie in [0, level]");
  if (m == level_) return *this;
  const auto k = detail::ipow(b_, level_ - m);
  std::vector<Cell> cells;
  cells.reserve(cells_.size());
  for (const auto& c : cells_) cells.push_back({detail::floor_div(c.x, k), dim_ == 2 ? detail::floor_div(c.y, k) : 0, c.mass});
  return BadicHistogram(b_, dim_, m, std::move(cells));
}

double BadicHistogram::conditional_entropy(int m) const {
  if (m > level_) throw InvalidArgument("conditional entropy needs m <= n");
  if (m < 0) throw InvalidArgument("conditional entropy needs m >= 0");
  if (m == level_) return 0.0;
  return entropy() - coarsen(m).entropy();
}

BadicHistogram BadicHistogram::component(int m, std::int64_t cx, std::int64_t cy) const {
  if (m < 0 || m > level_) throw InvalidArgument("component level must lie in [0, level]");
  const auto k = detail::ipow(b_, level_ - m);
  std::vector<Cell> cells;
  for (const auto& c : cells_)
    if (detail::floor_div(c.x, k) == cx && (dim_ == 1 || detail::floor_div(c.y, k) == cy)) cells.push_back(c);
  BadicHistogram out(b_, dim_, level_, std::move(cells));
  if (!(out.total_ > 0.0)) throw InvalidArgument("empty component: cell carries no mass");
  return out.normalized();
}

std::string BadicHistogram::to_text() const {
  std::ostringstream os;
  const Window w = window();
  os << "# base " << b_ << '\n' << dim_ << ' ' << level_ << ' ' << w.x0 << ' ' << w.x1;
  if (dim_ == 2) os << ' ' << w.y0 << ' ' << w.y1;
  os << '\n';
  for (const auto& c : cells_) {
    os << c.x;
    if (dim_ == 2) os << ' ' << c.y;
    os << ' ' << fmt(c.mass) << '\n';
  }
  return os.str();
}

BadicHistogram BadicHistogram::parse_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  int b = 0, dim = 0, level = -1;
  bool header = false;
  std::vector<Cell> cells;
  while (std::getline(is, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      std::istringstream hs(t.substr(1));
      std::string key;
      if (hs >> key && key == "base") hs >> b;
      continue;
    }
    const auto f = split(t, ' ');
    std::vector<std::string> tok;
    for (const auto& s : f)
      if (!s.empty()) tok.push_back(s);
    if (!header) {
      if (tok.size() < 4) throw InvalidArgument("histogram header must be `dim level window`");
      dim = static_cast<int>(parse_int(tok[0]));
      level = static_cast<int>(parse_int(tok[1]));
      header = true;
      continue;
    }
    if (static_cast<int>(tok.size()) != dim + 1) throw InvalidArgument("bad histogram line: " + t);
    Cell c;
    c.x = parse_int(tok[0]);
    if (dim == 2) c.y = parse_int(tok[1]);
    c.mass = parse_double(tok.back());
    cells.push_back(c);
  }
  if (!header) throw InvalidArgument("histogram text has no header");
  if (b < 2) throw InvalidArgument("histogram text lacks a `# base b` line");
  return BadicHistogram(b, dim, level, std::move(cells));
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("line fit needs at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("line fit needs distinct abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.stderr_slope = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return f;
}

EntropyCurve entropy_curve(const BadicHistogram& finest, int lo, int hi, int fit_lo, int fit_hi) {
  if (lo < 0 || hi < lo) throw InvalidArgument("entropy curve needs 0 <= lo <= hi");
  if (hi > finest.level()) throw InvalidArgument("entropy curve level exceeds the histogram level");
  if (fit_lo < lo || fit_hi > hi || fit_hi - fit_lo < 1) throw InvalidArgument("fit window needs at least two levels inside [lo, hi]");
  EntropyCurve c;
  c.fit_lo = fit_lo;
  c.fit_hi = fit_hi;
  BadicHistogram h = finest.coarsen(hi);
  c.levels.resize(static_cast<std::size_t>(hi - lo + 1));
  c.values.resize(c.levels.size());
  for (int n = hi; n >= lo; --n) {
    if (n < hi) h = h.coarsen(n);
    c.levels[static_cast<std::size_t>(n - lo)] = n;
    c.values[static_cast<std::size_t>(n - lo)] = h.entropy();
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < c.levels.size(); ++i)
    if (c.levels[i] >= fit_lo && c.levels[i] <= fit_hi) {
      xs.push_back(c.levels[i]);
      ys.push_back(c.values[i]);
    }
  const LineFit f = fit_line(xs, ys);
  c.slope = f.slope;
  c.slope_stderr = f.stderr_slope;
  c.intercept = f.intercept;
  return c;
}

std::string to_csv(const EntropyCurve& c) {
  std::ostringstream os;
  os << "level,H,slope_window_flag\n";
  for (std::size_t i = 0; i < c.levels.size(); ++i) {
    const int n = c.levels[i];
    os << n << ',' << fmt(c.values[i]) << ',' << (n >= c.fit_lo && n <= c.fit_hi ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace weier
