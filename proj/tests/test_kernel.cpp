#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "weier/batch.hpp"
#include "weier/errors.hpp"
#include "weier/kernel.hpp"
#include "weier/weier.hpp"

using namespace weier;
using std::numbers::pi;

namespace {

Word random_word(std::mt19937_64& rng, int b, int max_len) {
  const int len = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_len));
  std::vector<std::uint8_t> s(static_cast<std::size_t>(len));
  for (auto& c : s) c = static_cast<std::uint8_t>(rng() % static_cast<std::uint64_t>(b));
  return Word(b, s);
}

Code random_eventual(std::mt19937_64& rng, int b) { return Code(random_word(rng, b, 6), random_word(rng, b, 4)); }

}  // namespace

TEST_CASE("words") {
  const Word w = Word::parse(3, "0121");
  CHECK(w.size() == 4);
  CHECK(w.reversed().str() == "1210");
  CHECK(w.reversed().reversed() == w);
  CHECK(w.prefix(2).str() == "01");
  CHECK((w + Word::parse(3, "2")).str() == "01212");
  CHECK(Word::from_index(2, 4, 5).str() == "0101");
  CHECK(Word::parse(2, "10").address() == 0.5);
  CHECK_THROWS_AS(Word::parse(2, "012"), InvalidArgument);
  CHECK_THROWS_AS(Word(1, {}), InvalidArgument);
}

TEST_CASE("codes: symbols, shift and prepend") {
  const Code c = Code::parse(2, "10(011)");
  CHECK(c.str() == "10(011)");
  const int expect[] = {1, 0, 0, 1, 1, 0, 1, 1, 0};
  for (int i = 0; i < 9; ++i) CHECK(c.at(static_cast<std::size_t>(i)) == expect[i]);
  for (std::size_t k = 0; k < 7; ++k)
    for (std::size_t i = 0; i < 10; ++i) CHECK(c.shift(k).at(i) == c.at(i + k));
  CHECK(c.prepend(Word::parse(2, "11")).str() == "1110(011)");
  CHECK(Code::parse(2, "(01)").same_sequence(Code::parse(2, "0(10)")));
  CHECK_FALSE(Code::parse(2, "(01)").same_sequence(Code::parse(2, "(10)")));
  CHECK_THROWS_AS(Code::parse(2, "10"), InvalidArgument);
  CHECK_THROWS_AS(Code::parse(2, "1()"), InvalidArgument);
  CHECK(Code::random(3, 42) == Code::random(3, 42));
  CHECK_FALSE(Code::random(3, 42) == Code::random(3, 43));
}

TEST_CASE("property: reversal is an involution and shift composes") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 200; ++t) {
    const int b = 2 + static_cast<int>(rng() % 4);
    const Word w = random_word(rng, b, 12);
    CHECK(w.reversed().reversed() == w);
    const Code c = random_eventual(rng, b);
    const std::size_t a = rng() % 9, d = rng() % 9;
    for (std::size_t i = 0; i < 12; ++i) CHECK(c.shift(a).shift(d).at(i) == c.shift(a + d).at(i));
  }
}

TEST_CASE("eval_Y values") {
  const SystemParams p = make_params(2, 0.7);
  CHECK(eval_Y(p, Phi::cosine(), 0.0, Code::constant(2, 0), 1e-12) == 0.0);
  CHECK(eval_Y(p, Phi{}, 0.3, Code::constant(2, 1), 1e-12) == 0.0);
  const Code c = Code::parse(2, "1(0)");
  CHECK(eval_Y(p, Phi::cosine(), 0.0, c, 1e-10) == doctest::Approx(oracle::Y_direct(p, Phi::cosine(), 0.0, c)).epsilon(1e-9));
  CHECK_THROWS_AS(eval_Y(p, Phi(PiecewisePhi::rademacher()), 0.2, c, 1e-10), UnsupportedDerivative);
  CHECK_THROWS_AS(eval_Y(p, Phi::cosine(), 0.2, c, 0.0), InvalidArgument);
}

TEST_CASE("eval_Y agrees with direct summation") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto p : {make_params(2, 0.7), make_params(3, 0.5), make_params(5, 0.3)}) {
    for (int i = 0; i < 100; ++i) {
      const Code c = random_eventual(rng, p.b);
      const double x = u(rng);
      CHECK(std::fabs(eval_Y(p, Phi::cosine(0.2), x, c, 1e-12) - oracle::Y_direct(p, Phi::cosine(0.2), x, c)) <= 2e-12);
    }
  }
}

TEST_CASE("eval_Y_deriv") {
  const SystemParams p = make_params(2, 0.7);
  const double r = p.gamma / 2;
  CHECK(eval_Y_deriv(p, Phi::cosine(), 0.0, Code::constant(2, 0), 1, 1e-13) ==
        doctest::Approx(4 * pi * pi * r / (1 - r)).epsilon(1e-12));
  CHECK(eval_Y_deriv(p, Phi{}, 0.2, Code::constant(2, 0), 3, 1e-12) == 0.0);
  CHECK_THROWS_AS(eval_Y_deriv(p, Phi(PiecewisePhi::triangle()), 0.2, Code::constant(2, 0), 1, 1e-12),
                  UnsupportedDerivative);
  CHECK_THROWS_AS(eval_Y_deriv(p, Phi::cosine(), 0.2, Code::constant(2, 0), 0, 1e-12), InvalidArgument);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int i = 0; i < 200; ++i) {
    const Code c = random_eventual(rng, 2);
    const double x = u(rng), h = 1e-6;
    const double fd = (eval_Y(p, Phi::cosine(), x + h, c, 1e-14) - eval_Y(p, Phi::cosine(), x - h, c, 1e-14)) / (2 * h);
    CHECK(std::fabs(fd - eval_Y_deriv(p, Phi::cosine(), x, c, 1, 1e-12)) <= 1e-5);
  }
}

TEST_CASE("eval_Gamma and project") {
  const SystemParams p = make_params(2, 0.7);
  const Code zero = Code::constant(2, 0);
  CHECK(eval_Gamma(p, Phi::cosine(), 0.0, Code::random(2, 1), 1e-12) == 0.0);
  CHECK(eval_Gamma(p, Phi{}, 0.4, zero, 1e-12) == 0.0);
  const double g = oracle::gamma_by_quadrature(p, Phi::cosine(), 0.5, zero);
  CHECK(std::fabs(eval_Gamma(p, Phi::cosine(), 0.5, zero, 1e-12) - g) <= 1e-8);
  CHECK(project(p, Phi::cosine(), zero, 0.0, 1.25, 1e-12) == 1.25);
  CHECK(project(p, Phi{}, zero, 0.3, 1.25, 1e-12) == 1.25);
  CHECK(std::fabs(project(p, Phi::cosine(), zero, 0.5, 2.0, 1e-12) - (2.0 - g)) <= 1e-8);
}

TEST_CASE("property: Gamma' = Y by finite differences") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (auto p : {make_params(2, 0.7), make_params(3, 0.5)}) {
    for (int i = 0; i < 300; ++i) {
      const Code c = Code::random(p.b, rng());
      const double x = u(rng), h = 1e-6;
      const double fd = (eval_Gamma(p, Phi::cosine(), x + h, c, 1e-13) - eval_Gamma(p, Phi::cosine(), x - h, c, 1e-13)) / (2 * h);
      CHECK(std::fabs(fd - eval_Y(p, Phi::cosine(), x, c, 1e-12)) <= 1e-5);
    }
  }
}

TEST_CASE("property: Gamma matches quadrature of Y on random codes") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const SystemParams p = make_params(3, 0.5);
  for (int i = 0; i < 6; ++i) {
    const Code c = random_eventual(rng, 3);
    const double x = u(rng);
    CHECK(std::fabs(eval_Gamma(p, Phi::cosine(0.4), x, c, 1e-12) - oracle::gamma_by_quadrature(p, Phi::cosine(0.4), x, c)) <= 1e-8);
  }
}

TEST_CASE("property: Y and Gamma are linear in phi") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const SystemParams p = make_params(2, 0.7);
  const FourierPhi f = FourierPhi::cosine(1, 0.3), g = FourierPhi::cosine(3, 0.0, 0.5) + FourierPhi::cosine(2, 1.1);
  const double a = 1.75, c = -0.5, tol = 1e-11;
  const Phi mix(f.scaled(a) + g.scaled(c));
  for (int i = 0; i < 200; ++i) {
    const Code code = Code::random(2, rng());
    const double x = u(rng);
    CHECK(std::fabs(eval_Y(p, mix, x, code, tol) - a * eval_Y(p, Phi(f), x, code, tol) - c * eval_Y(p, Phi(g), x, code, tol)) <=
          4 * tol * (1 + std::fabs(a) + std::fabs(c)));
    CHECK(std::fabs(eval_Gamma(p, mix, x, code, tol) - a * eval_Gamma(p, Phi(f), x, code, tol) -
                    c * eval_Gamma(p, Phi(g), x, code, tol)) <= 4 * tol * (1 + std::fabs(a) + std::fabs(c)));
  }
}

TEST_CASE("property: shift scaling of kernel differences") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const SystemParams p = make_params(2, 0.7);
  const double tol = 1e-12;
  for (int i = 0; i < 200; ++i) {
    const int k = 1 + static_cast<int>(rng() % 5);
    const Word common = random_word(rng, 2, 1).prefix(0) + Word::from_index(2, k, rng() % (1u << k));
    const Code uc = Code::random(2, rng()).prepend(common), vc = Code::random(2, rng()).prepend(common);
    const double x = u(rng);
    double z = x;
    for (int l = 0; l < k; ++l) z = (z + common[static_cast<std::size_t>(l)]) / p.b;
    const double lhs = eval_Y(p, Phi::cosine(), x, uc, tol) - eval_Y(p, Phi::cosine(), x, vc, tol);
    const double rhs = std::pow(p.gamma, k) * (eval_Y(p, Phi::cosine(), z, uc.shift(static_cast<std::size_t>(k)), tol) -
                                               eval_Y(p, Phi::cosine(), z, vc.shift(static_cast<std::size_t>(k)), tol));
    CHECK(std::fabs(lhs - rhs) <= 4 * tol);
  }
}

TEST_CASE("IFS maps") {
  const SystemParams p = make_params(2, 0.7);
  const double w0 = eval_W(p, Phi::cosine(), 0.0, 1e-12);
  const auto [x0, y0] = apply_ifs(p, Phi::cosine(), 0, 0.0, w0);
  CHECK(x0 == 0.0);
  CHECK(y0 == doctest::Approx(w0).epsilon(1e-12));
  const auto [x1, y1] = apply_ifs(p, Phi{}, 1, 1.0, 0.0);
  CHECK(x1 == 1.0);
  CHECK(y1 == 0.0);
  CHECK_THROWS_AS(apply_ifs(p, Phi::cosine(), 2, 0.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(apply_ifs(p, Phi::cosine(), -1, 0.0, 0.0), InvalidArgument);

  const Word w10 = Word::parse(2, "10");
  CHECK(apply_word(p, Phi::cosine(), w10, 0.0, 0.0).first == 0.5);
  const auto one = apply_word(p, Phi::cosine(), Word::parse(2, "1"), 0.3, 0.4);
  const auto direct = apply_ifs(p, Phi::cosine(), 1, 0.3, 0.4);
  CHECK(one == direct);
  const auto id = apply_word(p, Phi::cosine(), Word(2, {}), 0.3, 0.4);
  CHECK(id.first == 0.3);
  CHECK(id.second == 0.4);
}

TEST_CASE("property: the graph is invariant under every g_i") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double tol = 1e-12;
  for (auto p : {make_params(2, 0.7), make_params(3, 0.5)}) {
    for (int n = 0; n < 1000; ++n) {
      // image point on a 2^-40 grid so that x = b gx - i and (x + i) / b are both exact
      const double target = std::ldexp(std::floor(std::ldexp(u(rng), 40)), -40);
      const int i = static_cast<int>(std::floor(target * p.b));
      const double x = target * p.b - i;
      const auto [gx, gy] = apply_ifs(p, Phi::cosine(), i, x, eval_W(p, Phi::cosine(), x, tol));
      REQUIRE(gx == target);
      CHECK(std::fabs(gy - eval_W(p, Phi::cosine(), gx, tol)) <= 2 * tol);
    }
  }
}

TEST_CASE("property: g_word(0,0) has x-coordinate sum i_k b^-k and phi = 0 scales y") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 300; ++t) {
    const int b = 2 + static_cast<int>(rng() % 4);
    const SystemParams p = make_params(b, 0.5 + 0.4 / b);
    const Word w = random_word(rng, b, 10);
    double expect = 0.0, scale = 1.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      scale /= b;
      expect += w[k] * scale;
    }
    CHECK(apply_word(p, Phi::cosine(), w, 0.0, 0.0).first == doctest::Approx(expect).epsilon(1e-15));
    const auto z = apply_word(p, Phi{}, w, 0.2, 1.5);
    CHECK(z.second == doctest::Approx(std::pow(p.lambda, static_cast<double>(w.size())) * 1.5).epsilon(1e-14));
  }
}

TEST_CASE("transition formula residual") {
  const SystemParams p = make_params(2, 0.7);
  CHECK(transition_residual(p, Phi::cosine(), Word::parse(2, "1"), Code::parse(2, "(01)"), 0.0, 0.0, 1e-12) <= 4e-12);
  CHECK(transition_residual(p, Phi{}, Word::parse(2, "101"), Code::parse(2, "(01)"), 0.4, 1.0, 1e-12) == 0.0);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ux(0.0, 1.0), uy(-2.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Word w = random_word(rng, 2, 8);
    const Code c = random_eventual(rng, 2);
    worst = std::max(worst, transition_residual(p, Phi::cosine(), w, c, ux(rng), uy(rng), 1e-12));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("separation_sup") {
  const SystemParams p = make_params(2, 0.7);
  const Code u = Code::constant(2, 0), v = Code::parse(2, "1(0)");
  const Separation same = separation_sup(p, Phi::cosine(), u, Code::parse(2, "0(00)"), 256, true);
  CHECK(same.identical);
  CHECK(same.sup == 0.0);
  CHECK(separation_sup(p, Phi{}, u, v, 256, true).sup == 0.0);
  const double s12 = separation_sup(p, Phi::cosine(), u, v, 1 << 12, true).sup;
  const double s14 = separation_sup(p, Phi::cosine(), u, v, 1 << 14, true).sup;
  CHECK(s12 > 0.0);
  CHECK(std::fabs(s14 - s12) <= 0.01 * s14);
  CHECK(separation_sup(p, Phi::cosine(), v, u, 1 << 12, true).sup == s12);
  // nested grids without refinement can only grow
  double prev = 0.0;
  for (int g = 16; g <= 4096; g *= 4) {
    const double s = separation_sup(p, Phi::cosine(), u, v, g, false).sup;
    CHECK(s >= prev);
    prev = s;
  }
}

TEST_CASE("condition (H) scan dichotomy") {
  const SystemParams p = make_params(2, 0.7);
  HScanOptions opt;
  opt.grid_size = 512;
  const Phi analytic(phi_from_W0(FourierPhi::cosine(1), 2, 0.7));
  const HScanReport a = condition_H_scan(p, analytic, 2, 2, 1, opt);
  CHECK(a.max_sep <= 1e-8);
  CHECK(a.classification == HClass::h_star_evidence);
  const HScanReport c = condition_H_scan(p, Phi::cosine(), 2, 2, 1, opt);
  CHECK(c.min_sep > 1e-6);
  CHECK(c.classification == HClass::h_evidence);
  CHECK(c.rows.size() == 8 * 2);
  for (const auto& r : c.rows) CHECK(r.u.at(0) != r.v.at(0));
  const HScanReport z = condition_H_scan(p, Phi{}, 1, 2, 1, opt);
  CHECK(z.classification == HClass::h_star_evidence);
  CHECK(to_csv(c).rfind("u_prefix,v_prefix,seed,sep\n", 0) == 0);
  CHECK_THROWS_AS(condition_H_scan(p, Phi::cosine(), 0, 2, 1, opt), InvalidArgument);
}

TEST_CASE("k-regularity") {
  const SystemParams p = make_params(2, 0.7);
  const Code u = Code::constant(2, 0), v = Code::parse(2, "1(0)");
  const RegularityTable z = k_regularity(p, Phi{}, u, v, 2, 3);
  CHECK(z.degenerate);
  for (const auto& r : z.rows) CHECK_FALSE(r.reg.has_value());

  const RegularityTable t = k_regularity(p, Phi::cosine(), u, v, 4, 5);
  CHECK(t.rows.size() == 16);
  CHECK_FALSE(t.degenerate);
  for (const auto& r : t.rows) {
    REQUIRE(r.reg.has_value());
    CHECK(r.reg->k <= 5);
    CHECK(r.reg->sup <= 2 * r.reg->inf);
  }

  const auto lin = regularity_on_interval([](double x, int k) { return k == 1 ? 1.0 : 0.0 * x; }, 0.0, 1.0, 1, 3);
  REQUIRE(lin.has_value());
  CHECK(lin->k == 1);
  CHECK(lin->sup == 1.0);
  CHECK(lin->inf == 1.0);

  const RegularityTable tri = k_regularity(p, Phi(PiecewisePhi::triangle()), u, v, 1, 4);
  CHECK(tri.truncated);
  CHECK(tri.k_max_used == 1);
}

TEST_CASE("transversality certificate") {
  const SystemParams p = make_params(2, 0.7);
  CHECK(transversality_certificate(p, Phi{}, Code::constant(2, 0), Code::parse(2, "1(0)"), 3).degenerate);
  CHECK(transversality_certificate(p, Phi::cosine(), Code::constant(2, 0), Code::constant(2, 0), 3).degenerate);

  // triangle: Y along 0^inf and 1^inf is constant with opposite signs
  const Certificate k = transversality_certificate(p, Phi(PiecewisePhi::triangle()), Code::constant(2, 0), Code::constant(2, 1), 3);
  // the node grid includes x = 1, where o_1 = 1/2 hits the kink, so only the last interval dips
  for (std::size_t i = 0; i + 1 < k.rows.size(); ++i) CHECK(k.rows[i].inf == doctest::Approx(k.rows[i].sup).epsilon(1e-14));
  CHECK(k.rows.back().inf < k.rows.back().sup);
  CHECK(k.ratio == doctest::Approx((7.0 + k.rows.back().inf / k.rhs_sup) / 8.0).epsilon(1e-9));

  HScanOptions opt;
  opt.grid_size = 256;
  const HScanReport scan = condition_H_scan(make_params(2, 0.7), Phi::cosine(), 2, 3, 4, opt);
  REQUIRE(scan.rows.size() >= 20);
  double rho = 1.0;
  for (const auto& r : scan.rows) {
    const Certificate c = transversality_certificate(p, Phi::cosine(), r.u, r.v, 6);
    CHECK(c.rows.size() == 64);
    CHECK(c.ratio > 0.0);
    CHECK(c.ratio <= 1.0);
    rho = std::min(rho, c.ratio);
  }
  CHECK(rho > 0.0);
  CHECK(to_csv(k).rfind("interval_index,inf,sup\n", 0) == 0);
}

TEST_CASE("certificate stabilization level") {
  const SystemParams p = make_params(2, 0.7);
  const std::vector<std::pair<Code, Code>> pairs = {{Code::constant(2, 0), Code::parse(2, "1(0)")},
                                                    {Code::parse(2, "(01)"), Code::parse(2, "1(10)")}};
  const StabilizationReport s = certificate_stabilization(p, Phi::cosine(), pairs, 7);
  CHECK(s.min_ratio.size() == 7);
  CHECK(s.level >= 1);
  CHECK(s.level <= 7);
  if (s.stabilized) {
    const double a = s.min_ratio[static_cast<std::size_t>(s.level - 1)], b = s.min_ratio[static_cast<std::size_t>(s.level)];
    CHECK(std::fabs(b - a) <= 0.05 * a);
  }
}

TEST_CASE("projection bank agrees with the scalar evaluators") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double tol = 1e-11;
  const std::vector<Phi> phis = {Phi::cosine(), Phi(phi_from_W0(FourierPhi::cosine(1), 3, 0.5)), Phi(PiecewisePhi::triangle())};
  for (const auto& phi : phis) {
    const SystemParams p = make_params(3, 0.5);
    std::vector<Code> codes;
    for (int i = 0; i < 5; ++i) codes.push_back(Code::random(3, 100 + i));
    const ProjectionBank bank(p, phi, codes, tol);
    std::vector<double> g(codes.size()), pr(codes.size());
    for (int i = 0; i < 200; ++i) {
      const double x = u(rng);
      const double w = eval_W(p, phi, x, tol);
      CHECK(std::fabs(bank.W(x) - w) <= 2 * tol);
      bank.gamma(x, g.data());
      bank.project_graph(x, pr.data());
      for (std::size_t c = 0; c < codes.size(); ++c) {
        const double ref = eval_Gamma(p, phi, x, codes[c], tol);
        CHECK(std::fabs(g[c] - ref) <= 4 * tol);
        CHECK(std::fabs(pr[c] - (w - ref)) <= 8 * tol);
        CHECK(std::fabs(pr[c]) <= bank.projection_bound());
      }
    }
  }
}
