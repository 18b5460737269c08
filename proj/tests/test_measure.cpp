#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "weier/batch.hpp"
#include "weier/errors.hpp"
#include "weier/measure.hpp"
#include "weier/weier.hpp"

using namespace weier;

namespace {

// Cells touched by each segment, collected in a set and counted once.
std::vector<std::uint64_t> box_counts_by_union(int b, const std::vector<double>& xs, const std::vector<double>& ys,
                                               int lo, int hi) {
  std::vector<std::uint64_t> out;
  for (int n = lo; n <= hi; ++n) {
    const double s = std::pow(static_cast<double>(b), n);
    std::set<std::pair<long long, long long>> cells;
    auto add_range = [&](long long col, double ya, double yb) {
      const auto a = static_cast<long long>(std::floor(std::min(ya, yb) * s));
      const auto e = static_cast<long long>(std::floor(std::max(ya, yb) * s));
      for (long long r = a; r <= e; ++r) cells.insert({col, r});
    };
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const double x0 = xs[i], x1 = xs[i + 1], y0 = ys[i], y1 = ys[i + 1];
      const auto c0 = static_cast<long long>(std::floor(x0 * s)), c1 = static_cast<long long>(std::floor(x1 * s));
      auto at = [&](double x) { return y0 + (y1 - y0) * (x - x0) / (x1 - x0); };
      for (long long c = c0; c <= c1; ++c) {
        const double xa = std::max(x0, static_cast<double>(c) / s), xb = std::min(x1, static_cast<double>(c + 1) / s);
        add_range(c, at(xa), at(xb));
      }
    }
    out.push_back(cells.size());
  }
  return out;
}

}  // namespace

TEST_CASE("sample counts") {
  CHECK(sample_count(2, 1000, true) == 1024);
  CHECK(sample_count(3, 81, true) == 81);
  CHECK(sample_count(3, 82, true) == 243);
  CHECK(sample_count(2, 1000, false) == 1000);
}

TEST_CASE("projected measure degenerate cases") {
  const SystemParams p = make_params(2, 0.7);
  const auto z = sample_projected_measure(p, Phi{}, Code::random(2, 1), 4096, 10, 1);
  REQUIRE(z.hist.size() == 1);
  CHECK(z.hist.cells()[0].x == 0);
  const auto c = sample_projected_measure(p, Phi(FourierPhi::constant(0.5)), Code::random(2, 1), 4096, 10, 1);
  REQUIRE(c.hist.size() == 1);
  CHECK(c.hist.cells()[0].x == static_cast<std::int64_t>(std::floor(0.5 / 0.3 * 1024)));
  CHECK(sample_projected_measure(p, Phi::cosine(), Code::random(2, 1), 100, 10, 1).undersampled);
}

TEST_CASE("projected measure of the cosine system is atomless and stable") {
  const SystemParams p = make_params(2, 0.7);
  const Code j = Code::random(2, 3);
  const auto a = sample_projected_measure(p, Phi::cosine(), j, 1000000, 10, 1);
  const auto b = sample_projected_measure(p, Phi::cosine(), j, 2000000, 10, 1);
  CHECK(a.hist.max_cell_mass() < 0.05);
  CHECK(std::fabs(b.hist.max_cell_mass() - a.hist.max_cell_mass()) < 0.2 * a.hist.max_cell_mass());
}

TEST_CASE("property: sampling is deterministic and independent of thread count") {
  const SystemParams p = make_params(3, 0.5);
  const std::vector<Code> codes = seeded_codes(3, 3, 9);
  for (bool strat : {true, false}) {
    SampleOptions one, many;
    one.threads = 1;
    many.threads = 4;
    one.stratified = many.stratified = strat;
    const auto s1 = sample_projected_measures(p, Phi::cosine(), codes, 30000, 9, 5, one);
    const auto s4 = sample_projected_measures(p, Phi::cosine(), codes, 30000, 9, 5, many);
    for (std::size_t c = 0; c < codes.size(); ++c) {
      CHECK(s1[c].hist.to_text() == s4[c].hist.to_text());
      CHECK(s1[c].hist.to_text() == sample_projected_measure(p, Phi::cosine(), codes[c], 30000, 9, 5, one).hist.to_text());
    }
  }
}

TEST_CASE("projected samples match the scalar projection") {
  const SystemParams p = make_params(2, 0.7);
  const Code j = Code::random(2, 77);
  SampleOptions opt;
  opt.stratified = true;
  const auto s = sample_projected_measure(p, Phi::cosine(), j, 256, 30, 4, opt);
  CHECK(s.hist.total() == 256.0);
  // stratified points: one per level-8 cell, so every cell index is reproducible from the scalar path
  std::multiset<std::int64_t> got;
  for (const auto& c : s.hist.cells())
    for (int k = 0; k < static_cast<int>(c.mass); ++k) got.insert(c.x);
  CHECK(got.size() == 256);
}

TEST_CASE("alpha estimate") {
  const SystemParams p = make_params(2, 0.7);
  const AlphaReport c = alpha_estimate(p, Phi(FourierPhi::constant(1.0)), seeded_codes(2, 3, 1), 4, 10, 4096, 1);
  for (double s : c.slopes) CHECK(s == 0.0);
  const AlphaReport a = alpha_estimate(p, Phi::cosine(), seeded_codes(2, 8, 1), 4, 10, 1 << 18, 1);
  CHECK(a.slopes.size() == 8);
  CHECK(a.median >= 0.9);
  CHECK(a.q1 <= a.median);
  CHECK(a.median <= a.q3);
  CHECK_THROWS_AS(alpha_estimate(p, Phi::cosine(), seeded_codes(2, 2, 1), 5, 5, 1024, 1), InvalidArgument);
}

TEST_CASE("polyline box counts against a set-union oracle") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0), v(-1.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    const int b = 2 + static_cast<int>(rng() % 3);
    std::vector<double> xs(200), ys(200);
    for (auto& x : xs) x = u(rng);
    std::sort(xs.begin(), xs.end());
    for (auto& y : ys) y = v(rng) * (t % 3 == 0 ? 0.01 : 1.0);
    CHECK(polyline_box_counts(b, xs, ys, 1, 6) == box_counts_by_union(b, xs, ys, 1, 6));
  }
  CHECK_THROWS_AS(polyline_box_counts(2, {0.5, 0.2}, {0.0, 0.0}, 1, 3), InvalidArgument);
}

TEST_CASE("graph box dimension") {
  const SystemParams p = make_params(2, 0.7);
  const BoxReport flat = graph_box_dimension(p, Phi(FourierPhi::constant(0.2)), 3, 10, 4096, 1);
  CHECK(flat.slope == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < flat.levels.size(); ++i)
    CHECK(flat.counts[i] == static_cast<std::uint64_t>(1) << flat.levels[i]);

  const BoxReport r = graph_box_dimension(p, Phi::cosine(), 6, 12, 1 << 20, 1);
  CHECK(r.sample_gap == 8);
  CHECK(std::fabs(r.slope - p.D) <= 0.05);
  for (std::size_t i = 1; i < r.counts.size(); ++i) CHECK(r.counts[i] > r.counts[i - 1]);
  CHECK(to_csv(r).find("slope") != std::string::npos);
  CHECK_THROWS_AS(graph_box_dimension(p, Phi::cosine(), 5, 5, 1024, 1), InvalidArgument);
}

TEST_CASE("dim mu consistency") {
  const SystemParams p = make_params(2, 0.7);
  const DimMuReport flat = dim_mu_check(p, Phi(FourierPhi::constant(1.0)), 2, 3, 9, 1 << 14, 1);
  CHECK(flat.alpha == 0.0);
  CHECK(flat.rhs == 1.0);
  CHECK(flat.dim_mu == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(flat.gap <= 1e-12);
  const DimMuReport zero = dim_mu_check(p, Phi{}, 2, 3, 9, 1 << 14, 1);
  CHECK(zero.dim_mu == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(zero.rhs == 1.0);
  const DimMuReport c = dim_mu_check(p, Phi::cosine(), 4, 4, 10, 1 << 20, 1);
  CHECK(c.gap <= 0.1);
}

TEST_CASE("n hat") {
  CHECK(n_hat(make_params(2, 0.7), 0) == 0);
  CHECK(n_hat(make_params(2, 0.7), 10) == 20);
  CHECK_THROWS_AS(n_hat(make_params(2, 0.7), -1), InvalidArgument);
  CHECK(n_hat(make_params(2, 0.5 + 1e-9), 100) == 101);
  CHECK(n_hat(make_params(4, 0.5), 3) == 6);
  for (auto [b, lam] : std::vector<std::pair<int, double>>{{2, 0.7}, {3, 0.5}, {2, 0.5 + 1e-12}, {4, 0.25 + 1e-3}, {5, 0.9}}) {
    const SystemParams p = make_params(b, lam);
    for (int n = 0; n <= 2000; ++n) CHECK(oracle::nhat_inequality_holds(b, lam, n, n_hat(p, n)));
  }
}

TEST_CASE("decomposition into components") {
  const SystemParams p = make_params(2, 0.7);
  const Code j = Code::random(2, 5);
  const Decomposition d0 = decompose_projection(p, Phi::cosine(), j, 0, 8, 1 << 16, 2);
  CHECK(d0.components.size() == 1);
  CHECK(d0.residual <= d0.tolerance);

  const std::uint64_t n = 1 << 18;
  const Decomposition d = decompose_projection(p, Phi::cosine(), j, 3, 10, n, 2);
  CHECK(d.components.size() == 8);
  CHECK(d.tolerance == doctest::Approx(3.0 / std::sqrt(static_cast<double>(n))));
  CHECK(d.residual <= d.tolerance);

  // each component is an affine image of some pi_{i* j} mu contracted by lambda^3
  const double cell = std::ldexp(1.0, -10);
  for (std::size_t c = 0; c < d.components.size(); ++c) {
    const Code shifted = j.prepend(d.words[c].reversed());
    const ProjectionBank bank(p, Phi::cosine(), {shifted}, 1e-10);
    const auto& cells = d.components[c].cells();
    const double width = (cells.back().x - cells.front().x + 1) * cell;
    CHECK(width <= std::pow(0.7, 3) * 2 * bank.projection_bound() + 2 * cell);
  }
  CHECK_THROWS_AS(decompose_projection(p, Phi::cosine(), j, 13, 10, n, 2, 4096), InvalidArgument);
}

TEST_CASE("uniform continuity across scales") {
  const SystemParams p = make_params(2, 0.7);
  const std::vector<double> radii = {0.05, 0.1, 0.2};
  const UcasReport flat = ucas_probe(p, Phi(FourierPhi::constant(1.0)), seeded_codes(2, 2, 1), 1.0 / 16, radii, {}, 4096, 1);
  CHECK(flat.degenerate);
  CHECK(flat.sup_ratio == doctest::Approx(1.0).epsilon(1e-12));

  const auto hist = sample_projected_measure(p, Phi::cosine(), Code::random(2, 1), 1 << 18, 12, 1).hist;
  CHECK(ucas_ratio(hist, 1.0, radii, {}).sup_ratio == doctest::Approx(1.0).epsilon(1e-12));

  const UcasReport a = ucas_probe(p, Phi::cosine(), seeded_codes(2, 4, 1), 1.0 / 16, radii, {}, 1 << 19, 1);
  const UcasReport b = ucas_probe(p, Phi::cosine(), seeded_codes(2, 4, 1), 1.0 / 16, radii, {}, 1 << 20, 1);
  CHECK_FALSE(a.degenerate);
  CHECK(a.sup_ratio < 0.5);
  CHECK(std::fabs(b.sup_ratio - a.sup_ratio) < 0.2 * a.sup_ratio);
  // smaller delta never gives a larger ratio on the same measure
  double prev = 1.0;
  for (double d : {0.5, 0.25, 0.125, 0.0625}) {
    const double s = ucas_ratio(hist, d, radii, {}).sup_ratio;
    CHECK(s <= prev + 1e-12);
    prev = s;
  }
  CHECK_THROWS_AS(ucas_probe(p, Phi::cosine(), seeded_codes(2, 1, 1), 1.0, radii, {}, 1024, 1), InvalidArgument);
  CHECK_THROWS_AS(ucas_probe(p, Phi::cosine(), seeded_codes(2, 1, 1), 0.0, radii, {}, 1024, 1), InvalidArgument);
}

TEST_CASE("ball masses prorate boundary cells") {
  const BallMass m(BadicHistogram::uniform(2, 4, 0, 16));
  CHECK(m(0.5, 0.25) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(m(0.5, 0.01) == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(m(0.5, 10.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.quantile(0.25) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("entropy porosity") {
  const BadicHistogram u = BadicHistogram::uniform(2, 14, 0, 1 << 14);
  const PorosityReport ru = porosity_fraction(u, 1.0, 0.1, 4, 2, 10);
  CHECK(ru.fraction == 1.0);
  CHECK(ru.porous);
  const BadicHistogram pm = BadicHistogram::point_mass(2, 1, 14, 77);
  CHECK(porosity_fraction(pm, 0.0, 0.05, 4, 2, 10).fraction == 1.0);
  CHECK_THROWS_AS(porosity_fraction(u, 1.0, 0.1, 6, 2, 10), InvalidArgument);

  const SystemParams p = make_params(2, 0.7);
  const Code j = Code::random(2, 2);
  const AlphaReport a = alpha_estimate(p, Phi::cosine(), {j}, 6, 14, 1 << 21, 3);
  const PorosityReport r = porosity_probe(p, Phi::cosine(), j, a.median, 0.1, 6, 4, 12, 18, 1 << 21, 3);
  CHECK(r.fraction > 0.9);
  CHECK_THROWS_AS(porosity_probe(p, Phi::cosine(), j, 1.0, 0.1, 6, 4, 12, 17, 1 << 10, 3), InvalidArgument);
}
