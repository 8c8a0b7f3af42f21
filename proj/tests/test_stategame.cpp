#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qdisc/stategame.hpp"
#include "test_util.hpp"

using namespace qdisc;
using namespace qdisc::game;
using linalg::CMat;
using linalg::DensityMatrix;
using linalg::Rng;
using testutil::diag;

namespace {

DensityMatrix dm(const CMat& m) { return DensityMatrix(m); }

Ensemble zero_plus_pair() {
  return Ensemble::uniform({dm(testutil::ket0_proj()), dm(testutil::plus_proj())});
}

Ensemble random_ensemble(int k, int d, Rng& rng) {
  std::vector<DensityMatrix> states;
  for (int x = 0; x < k; ++x) states.push_back(linalg::random_density(d, rng));
  return Ensemble(std::move(states), linalg::random_priors(k, rng));
}

const double kLn2 = std::log(2.0);

}  // namespace

TEST_CASE("orthogonal states are perfectly distinguishable") {
  auto e = Ensemble::uniform({dm(testutil::ket0_proj()), dm(testutil::ket1_proj())});
  auto res = solve_primal(e, {});
  CHECK(res.success_probability == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("pure pair reproduces the two-state optimum and eta-scaling") {
  auto e = zero_plus_pair();
  double want = oracles::helstrom_pure(1.0 / std::sqrt(2.0));
  CHECK(want == doctest::Approx(0.8535533906).epsilon(1e-9));

  auto res0 = solve_primal(e, {});
  CHECK(res0.success_probability == doctest::Approx(want).epsilon(1e-6));

  GameConfig half;
  half.eta = 0.5;
  auto res_half = solve_primal(e, half);
  CHECK(res_half.success_probability == doctest::Approx(0.5 * want).epsilon(1e-6));
  CHECK(res_half.success_probability == doctest::Approx(0.4267766953).epsilon(1e-6));

  // dual route agrees
  auto dual = solve_dual(e, {});
  CHECK(dual.success_probability == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("identical states reduce to the best prior guess") {
  Rng rng(211);
  auto rho = linalg::random_density(3, rng);
  auto e = Ensemble::uniform({rho, rho, rho});
  auto dual = solve_dual(e, {});
  CHECK(dual.success_probability == doctest::Approx(1.0 / 3).epsilon(1e-6));
}

TEST_CASE("primal equals dual and scales linearly in 1-eta on random ensembles") {
  Rng rng(223);
  for (int trial = 0; trial < 12; ++trial) {
    auto e = random_ensemble(2 + int(rng() % 3), 2 + int(rng() % 3), rng);
    auto base = solve_primal(e, {});

    for (double eta : {0.0, 0.3, 0.7}) {
      GameConfig cfg;
      cfg.eta = eta;
      auto pr = solve_primal(e, cfg);
      auto du = solve_dual(e, cfg);
      CHECK(std::abs(pr.success_probability - du.success_probability) <= 1e-6);
      CHECK(pr.success_probability ==
            doctest::Approx((1.0 - eta) * base.success_probability).epsilon(1e-6));

      // the abstention element keeps at least eta weight
      CMat q0 = linalg::identity(e.dim());
      for (const auto& q : pr.optimal_povm) q0 -= q;
      double lmin = linalg::eig(linalg::herm(q0)).eigenvalues.minCoeff();
      CHECK(lmin >= eta - 1e-7);
    }
  }
}

TEST_CASE("primal and dual optimizers are complementary") {
  Rng rng(219);
  for (int trial = 0; trial < 5; ++trial) {
    auto e = random_ensemble(3, 3, rng);
    GameConfig cfg;
    cfg.eta = 0.25;
    auto pr = solve_primal(e, cfg);
    auto du = solve_dual(e, cfg);
    // slack of the measurement-sum cap pairs to zero with the dual operator
    CMat slack = (1.0 - cfg.eta) * linalg::identity(e.dim());
    for (const auto& q : pr.optimal_povm) slack -= q;
    CHECK(std::abs((du.dual_certificate * slack).trace().real()) <= 1e-5);
    // each POVM element pairs to zero with its dominance slack
    for (int x = 0; x < e.k(); ++x) {
      CMat dom = du.dual_certificate - e.priors[x] * e.states[x].entries();
      CHECK(std::abs((dom * pr.optimal_povm[x]).trace().real()) <= 1e-5);
    }
  }
}

TEST_CASE("hypothesis-testing certificate reproduces the game value") {
  // identical states: gamma at tau = rho equals (1-eta)/k
  Rng rng(227);
  auto rho = linalg::random_density(2, rng);
  auto ident = Ensemble::uniform({rho, rho});
  auto cert = hypothesis_testing_certificate(ident, {});
  CHECK(cert.gamma_value == doctest::Approx(0.5).epsilon(1e-6));
  CHECK((cert.tau_hat.entries() - rho.entries()).cwiseAbs().maxCoeff() <= 1e-5);

  // orthogonal pair: perfect discrimination
  auto orth = Ensemble::uniform({dm(testutil::ket0_proj()), dm(testutil::ket1_proj())});
  auto cert_orth = hypothesis_testing_certificate(orth, {});
  CHECK(cert_orth.gamma_value == doctest::Approx(1.0).epsilon(1e-6));

  auto cert_zp = hypothesis_testing_certificate(zero_plus_pair(), {});
  CHECK(cert_zp.gamma_value == doctest::Approx(0.8535533906).epsilon(1e-6));

  for (int trial = 0; trial < 6; ++trial) {
    auto e = random_ensemble(2 + int(rng() % 3), 2 + int(rng() % 3), rng);
    for (double eta : {0.0, 0.4}) {
      GameConfig cfg;
      cfg.eta = eta;
      auto c = hypothesis_testing_certificate(e, cfg);
      CHECK(c.gamma_value == doctest::Approx(c.success_probability).epsilon(1e-6));
    }
  }
}

TEST_CASE("radius exponent bound") {
  Rng rng(229);
  // identical pair: radius 0, bound = 2 ln 2 at alpha = 2, achieved ln 2
  auto rho = linalg::random_density(2, rng);
  auto ident = Ensemble::uniform({rho, rho});
  GameConfig cfg;
  cfg.alpha = 2.0;
  double bound = radius_exponent_bound(ident, cfg);
  CHECK(bound == doctest::Approx(2 * kLn2).epsilon(1e-9));
  double lhs = -std::log1p(-solve_primal(ident, cfg).success_probability);
  CHECK(lhs == doctest::Approx(kLn2).epsilon(1e-7));
  CHECK(lhs <= bound + 1e-9);

  // orthogonal pure pair: the radius diverges
  auto orth = Ensemble::uniform({dm(testutil::ket0_proj()), dm(testutil::ket1_proj())});
  CHECK(std::isinf(radius_exponent_bound(orth, cfg)));

  // commuting qubit pair and random ensembles: bound dominates
  auto comm = Ensemble::uniform({dm(diag({0.75, 0.25})), dm(diag({0.25, 0.75}))});
  for (double alpha : {1.5, 2.0}) {
    for (double eta : {0.0, 0.3}) {
      GameConfig c2;
      c2.alpha = alpha;
      c2.eta = eta;
      double b = radius_exponent_bound(comm, c2);
      double l = -std::log1p(-solve_primal(comm, c2).success_probability);
      CHECK(l <= b + 1e-6);
    }
  }
  for (int trial = 0; trial < 4; ++trial) {
    auto e = random_ensemble(3, 2, rng);
    GameConfig c3;
    c3.alpha = 1.5;
    double b = radius_exponent_bound(e, c3);
    double l = -std::log1p(-solve_primal(e, c3).success_probability);
    CHECK(l <= b + 1e-6);
  }
}

TEST_CASE("asymptotic exponent bound") {
  Rng rng(233);
  auto rho = linalg::random_density(2, rng);
  CHECK(asymptotic_exponent_bound(Ensemble::uniform({rho, rho})).umegaki_radius <=
        1e-9);

  auto orth = Ensemble::uniform({dm(testutil::ket0_proj()), dm(testutil::ket1_proj())});
  CHECK(std::isinf(asymptotic_exponent_bound(orth).umegaki_radius));

  auto comm = Ensemble::uniform({dm(diag({0.75, 0.25})), dm(diag({0.25, 0.75}))});
  auto b = asymptotic_exponent_bound(comm, {2.0});
  CHECK(b.umegaki_radius == doctest::Approx(0.5 * std::log(4.0 / 3.0)).epsilon(1e-4));
  CHECK(b.sandwiched_radii.at(2.0) >= b.umegaki_radius - 1e-6);
}

TEST_CASE("n_copies plays the game on the tensor power") {
  auto comm = Ensemble::uniform({dm(diag({0.75, 0.25})), dm(diag({0.25, 0.75}))});
  GameConfig two;
  two.n_copies = 2;
  double via_cfg = solve_primal(comm, two).success_probability;
  double direct = solve_primal(comm.tensor_power(2), {}).success_probability;
  CHECK(via_cfg == doctest::Approx(direct).epsilon(1e-8));
  CHECK(via_cfg > solve_primal(comm, {}).success_probability);
  auto cert = hypothesis_testing_certificate(comm, two);
  CHECK(cert.gamma_value == doctest::Approx(via_cfg).epsilon(1e-6));
}

TEST_CASE("finite-copy exponents respect the radius bound") {
  auto comm = Ensemble::uniform({dm(diag({0.75, 0.25})), dm(diag({0.25, 0.75}))});
  GameConfig cfg;
  cfg.alpha = 2.0;
  auto rad = divergence::radius(comm.states, divergence::DivergenceSpec::sandwiched(2.0));
  const double add = -2.0 * (std::log(0.5) + std::log(1.0));
  for (int n = 1; n <= 2; ++n) {
    auto en = comm.tensor_power(n);
    double p = solve_primal(en, cfg).success_probability;
    double exponent = -std::log1p(-p) / n;
    CHECK(exponent <= rad.value + add / n + 1e-6);
  }
}

TEST_CASE("dominating trace: fixed pairs and brute-force oracle") {
  auto q0 = testutil::ket0_proj();
  auto q1 = testutil::ket1_proj();
  auto qp = testutil::plus_proj();

  auto orth = qre({q0, q1});
  CHECK(orth.value == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(orth.primal_dual_gap <= 1e-7);

  auto zp = qre({q0, qp});
  CHECK(zp.value == doctest::Approx(1.0 + 1.0 / std::sqrt(2.0)).epsilon(1e-6));
  CHECK(zp.primal_dual_gap <= 1e-7);
  CHECK(zp.value == doctest::Approx(oracles::dominating_trace_2x2(q0, qp)).epsilon(1e-3));

  Rng rng(239);
  auto rho = linalg::random_density(2, rng);
  auto same = qre({rho.entries(), rho.entries(), rho.entries()});
  CHECK(same.value == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("dominating trace properties: lower bound and channel monotonicity") {
  Rng rng(241);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<CMat> ops;
    double max_tr = 0;
    for (int x = 0; x < 3; ++x) {
      CMat q = linalg::random_psd(2, 2, rng);
      max_tr = std::max(max_tr, q.trace().real());
      ops.push_back(q);
    }
    auto base = qre(ops);
    CHECK(base.value >= max_tr - 1e-8);

    // states through a random CPTP map cannot increase the value
    std::vector<CMat> states;
    for (int x = 0; x < 3; ++x) states.push_back(linalg::random_density(2, rng).entries());
    auto before = qre(states);
    auto map = oracles::random_cptp(2, 2, 2, rng);
    std::vector<CMat> after;
    for (const auto& s : states) after.push_back(map.apply(s));
    CHECK(qre(after).value <= before.value + 1e-8);
  }
}

TEST_CASE("abstention threshold") {
  CHECK(abstention_threshold({testutil::ket0_proj(), testutil::ket1_proj()}) ==
        doctest::Approx(0.0).epsilon(1e-6));
  Rng rng(251);
  auto rho = linalg::random_density(2, rng);
  CHECK(abstention_threshold({rho.entries()}) == doctest::Approx(0.0).epsilon(1e-6));

  for (int trial = 0; trial < 5; ++trial) {
    std::vector<CMat> ops;
    for (int x = 0; x < 2; ++x) ops.push_back(linalg::random_density(3, rng).entries());
    double eta = abstention_threshold(ops);
    CHECK(eta >= 0.0);
    CHECK(eta < 1.0);

    // scaling identity: for eta at or above the threshold the constrained
    // detection value is (1-eta) q_re; the constrained program equals
    // k times the uniform-prior game value
    auto q = qre(ops);
    std::vector<DensityMatrix> states;
    for (const auto& o : ops) states.push_back(DensityMatrix(o));
    for (double et : {eta, (1.0 + eta) / 2.0}) {
      GameConfig cfg;
      cfg.eta = et;
      double game = solve_primal(Ensemble::uniform(states), cfg).success_probability;
      CHECK(2.0 * game == doctest::Approx((1.0 - et) * q.value).epsilon(1e-6));
    }
  }
}

TEST_CASE("classical success probability") {
  CHECK(classical_success({0.7, 0.3}, 0.2) == doctest::Approx(0.56));
  CHECK(classical_success({0.25, 0.25, 0.25, 0.25}, 0.0) == doctest::Approx(0.25));
  CHECK(classical_success({0.5, 0.5}, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("quantum advantage ratio equals the dominating trace at uniform priors") {
  auto orth = advantage_ratio({dm(testutil::ket0_proj()), dm(testutil::ket1_proj())}, 0.0);
  CHECK(orth.ratio_at_uniform == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(orth.qre_value == doctest::Approx(2.0).epsilon(1e-6));

  auto zp = advantage_ratio({dm(testutil::ket0_proj()), dm(testutil::plus_proj())}, 0.0);
  CHECK(zp.ratio_at_uniform == doctest::Approx(1.7071067812).epsilon(1e-6));
  CHECK(zp.ratio_at_uniform == doctest::Approx(zp.qre_value).epsilon(1e-6));

  Rng rng(257);
  auto rho = linalg::random_density(2, rng);
  auto same = advantage_ratio({rho, rho}, 0.0);
  CHECK(same.ratio_at_uniform == doctest::Approx(1.0).epsilon(1e-6));

  // non-uniform priors never beat the uniform ratio
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<DensityMatrix> states{linalg::random_density(2, rng),
                                      linalg::random_density(2, rng)};
    std::vector<CMat> ops{states[0].entries(), states[1].entries()};
    double qv = qre(ops).value;
    double eta = abstention_threshold(ops);
    auto priors = linalg::random_priors(2, rng);
    GameConfig cfg;
    cfg.eta = eta;
    double ratio = solve_primal(Ensemble(states, priors), cfg).success_probability /
                   classical_success(priors, eta);
    CHECK(ratio <= qv + 1e-6);
  }
}
