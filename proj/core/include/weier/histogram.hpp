#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace weier {

// A finite measure on the b-adic cells of level n in R or R^2. Cell (x, y) is
// [x b^-n, (x+1) b^-n) x [y b^-n, (y+1) b^-n); in 1D y is always 0.
class BadicHistogram {
 public:
  struct Cell {
    std::int64_t x = 0;
    std::int64_t y = 0;
    double mass = 0.0;
  };
  // Level-0 bounding box, half open: [x0, x1) x [y0, y1).
  struct Window {
    std::int64_t x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  };

  BadicHistogram() = default;
  // Duplicate cells are merged, zero cells dropped; negative mass is rejected.
  BadicHistogram(int b, int dim, int level, std::vector<Cell> cells);

  // Unit mass at the cell of each value.
  static BadicHistogram from_values(int b, int level, const std::vector<double>& values);
  static BadicHistogram from_points(int b, int level, const std::vector<double>& xs, const std::vector<double>& ys);
  // Equal mass on cells first, ..., first + count - 1.
  static BadicHistogram uniform(int b, int level, std::int64_t first, std::int64_t count);
  static BadicHistogram point_mass(int b, int dim, int level, std::int64_t x, std::int64_t y = 0);
  // sum_k w_k h_k; all inputs share b, dim and level.
  static BadicHistogram mix(const std::vector<std::pair<double, const BadicHistogram*>>& parts);

  int base() const { return b_; }
  int dim() const { return dim_; }
  int level() const { return level_; }
  const std::vector<Cell>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  double total() const { return total_; }
  Window window() const;

  BadicHistogram normalized() const;
  double max_cell_mass() const;  // relative to total
  // Shannon entropy of the normalized measure, log base b.
  double entropy() const;
  BadicHistogram coarsen(int m) const;
  // H(L_n) - H(L_m).
  double conditional_entropy(int m) const;
  // Normalized restriction to the level-m cell (cx, cy).
  BadicHistogram component(int m, std::int64_t cx, std::int64_t cy = 0) const;

  // Header `dim level x0 x1 [y0 y1]` preceded by `# base b`, then `cell mass`
  // (1D) or `ix iy mass` (2D) lines.
  std::string to_text() const;
  static BadicHistogram parse_text(const std::string& text);

 private:
  void finalize();

  int b_ = 2;
  int dim_ = 1;
  int level_ = 0;
  std::vector<Cell> cells_;
  double total_ = 0.0;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};
// Ordinary least squares; needs at least two points.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct EntropyCurve {
  std::vector<int> levels;
  std::vector<double> values;
  int fit_lo = 0;
  int fit_hi = 0;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
};

// H(omega, L_n) for n = lo..hi from a histogram at level >= hi, slope fitted over [fit_lo, fit_hi].
EntropyCurve entropy_curve(const BadicHistogram& finest, int lo, int hi, int fit_lo, int fit_hi);
inline EntropyCurve entropy_curve(const BadicHistogram& finest, int lo, int hi) {
  return entropy_curve(finest, lo, hi, lo, hi);
}
std::string to_csv(const EntropyCurve& c);

}  // namespace weier
