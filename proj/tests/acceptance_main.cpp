// Acceptance suite: every release criterion from the project contract, one
// pass/fail line each, pinned tolerances. Exit code is the number of failed
// criteria.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qdisc/channelgame.hpp"
#include "qdisc/divergences.hpp"
#include "qdisc/stategame.hpp"
#include "test_util.hpp"

using namespace qdisc;
using divergence::DivergenceSpec;
using linalg::CMat;
using linalg::DensityMatrix;
using linalg::Rng;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %2d. %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

DensityMatrix dm(const CMat& m) { return DensityMatrix(m); }

struct Suite {
  std::vector<game::Ensemble> ensembles;
};

Suite make_suite(int count, Rng& rng) {
  Suite s;
  for (int i = 0; i < count; ++i) {
    int k = 2 + static_cast<int>(rng() % 3);
    int d = 2 + static_cast<int>(rng() % 3);
    std::vector<DensityMatrix> states;
    for (int x = 0; x < k; ++x) states.push_back(linalg::random_density(d, rng));
    s.ensembles.emplace_back(std::move(states), linalg::random_priors(k, rng));
  }
  return s;
}

const double kLn2 = std::log(2.0);

// 1. 200 random strictly feasible conic programs close the gap.
void criterion_solver_soundness() {
  Rng rng(1001);
  int bad = 0;
  double worst_gap = 0, worst_kkt = 0;
  for (int t = 0; t < 200; ++t) {
    int dim = 2 + static_cast<int>(rng() % 15);
    int m = 2 + static_cast<int>(rng() % 7);
    auto inst = testutil::random_slater_instance(dim, m, rng);
    auto sol = sdp::solve(inst.problem);
    worst_gap = std::max(worst_gap, sol.gap);
    worst_kkt = std::max(worst_kkt, sol.kkt_residual);
    if (sol.status != sdp::SolveStatus::optimal || sol.gap > 1e-7 ||
        sol.kkt_residual > 1e-7) {
      ++bad;
    }
  }
  report(1, "solver soundness on 200 random strictly feasible programs", bad == 0,
         "violations=" + std::to_string(bad) + " worst gap=" + fmt(worst_gap) +
             " worst residual=" + fmt(worst_kkt));
}

// 2. |0>,|+> game value.
void criterion_two_state_value() {
  auto e = game::Ensemble::uniform({dm(testutil::ket0_proj()), dm(testutil::plus_proj())});
  double p = game::solve_primal(e, {}).success_probability;
  bool pass = std::abs(p - 0.853553391) <= 1e-6;
  report(2, "two-state game reproduces (1+1/sqrt(2))/2", pass, "value=" + fmt(p));
}

// 3+4+5 share the random ensemble suite.
void criteria_game_suite(const Suite& suite) {
  int dual_bad = 0, scale_bad = 0, cert_bad = 0, bound_bad = 0;
  int bound_checked = 0;
  double worst_dual = 0, worst_scale = 0, worst_cert = 0;

  for (const auto& e : suite.ensembles) {
    double p0 = game::solve_primal(e, {}).success_probability;
    for (double eta : {0.0, 0.3, 0.7}) {
      game::GameConfig cfg;
      cfg.eta = eta;
      auto pr = game::solve_primal(e, cfg);
      auto du = game::solve_dual(e, cfg);
      double dgap = std::abs(pr.success_probability - du.success_probability);
      double sgap = std::abs(pr.success_probability - (1.0 - eta) * p0);
      worst_dual = std::max(worst_dual, dgap);
      worst_scale = std::max(worst_scale, sgap);
      if (dgap > 1e-6) ++dual_bad;
      if (sgap > 1e-6) ++scale_bad;

      auto cert = game::hypothesis_testing_certificate(e, cfg);
      double cgap = std::abs(cert.gamma_value - pr.success_probability);
      worst_cert = std::max(worst_cert, cgap);
      if (cgap > 1e-6) ++cert_bad;
    }

    double lhs = -std::log1p(-p0);
    for (double alpha : {1.5, 2.0}) {
      game::GameConfig cfg;
      cfg.alpha = alpha;
      double bound = game::radius_exponent_bound(e, cfg);
      if (std::isinf(bound)) continue;
      ++bound_checked;
      if (lhs > bound + 1e-6) ++bound_bad;
    }
  }
  report(3, "game duality and linear eta-scaling on the random suite",
         dual_bad == 0 && scale_bad == 0,
         "dual violations=" + std::to_string(dual_bad) +
             " scaling violations=" + std::to_string(scale_bad) +
             " worst=" + fmt(std::max(worst_dual, worst_scale)));
  report(4, "hypothesis-test weight at the dual certificate equals the game value",
         cert_bad == 0,
         "violations=" + std::to_string(cert_bad) + " worst=" + fmt(worst_cert));

  // identical-states arithmetic at tight tolerance
  Rng rng(1005);
  auto rho = linalg::random_density(2, rng);
  auto ident = game::Ensemble::uniform({rho, rho});
  sdp::SolveOptions tight;
  tight.gap_tol = 1e-11;
  tight.kkt_tol = 1e-10;
  double p_ident = game::solve_primal(ident, {}, tight).success_probability;
  double lhs_ident = -std::log1p(-p_ident);
  game::GameConfig cfg2;
  cfg2.alpha = 2.0;
  double rhs_ident = game::radius_exponent_bound(ident, cfg2);
  bool ident_ok = std::abs(lhs_ident - kLn2) <= 1e-9 &&
                  std::abs(rhs_ident - 2 * kLn2) <= 1e-9 && lhs_ident <= rhs_ident;
  report(5, "radius bound dominates the exponent (identical-states case exact)",
         bound_bad == 0 && ident_ok,
         "violations=" + std::to_string(bound_bad) + "/" +
             std::to_string(bound_checked) + " identical lhs=" + fmt(lhs_ident) +
             " rhs=" + fmt(rhs_ident));
}

// 6. divergence cross-checks and inequality battery.
void criterion_divergences() {
  Rng rng(1007);
  int bad = 0;
  std::ostringstream notes;

  // cascade vs closed form
  for (int t = 0; t < 20; ++t) {
    auto a = linalg::random_density(2, rng);
    auto b = linalg::random_density(2, rng);
    for (int l : {1, 2}) {
      double alpha = 1.0 + std::pow(2.0, -l);
      if (std::abs(divergence::geometric_renyi_sdp(a, b, l) -
                   divergence::geometric_renyi(a, b, alpha)) > 1e-5) {
        ++bad;
      }
    }
  }
  if (bad) notes << "cascade=" << bad << " ";

  // ln 2 oracles
  auto d10 = linalg::HermitianOperator(testutil::diag({1, 0}));
  auto dhalf = linalg::HermitianOperator(testutil::diag({0.5, 0.5}));
  int oracle_bad = 0;
  if (std::abs(divergence::sandwiched_renyi(dm(testutil::ket0_proj()),
                                            dm(testutil::diag({0.5, 0.5})), 2.0) -
               kLn2) > 1e-8) ++oracle_bad;
  if (std::abs(divergence::geometric_renyi(d10, dhalf, 2.0) - kLn2) > 1e-8) ++oracle_bad;
  if (std::abs(divergence::umegaki(dm(testutil::diag({1, 0})),
                                   dm(testutil::diag({0.5, 0.5}))) -
               kLn2) > 1e-8) ++oracle_bad;
  if (std::abs(divergence::belavkin_staszewski(dm(testutil::diag({1, 0})),
                                               dm(testutil::diag({0.5, 0.5}))) -
               kLn2) > 1e-8) ++oracle_bad;
  bad += oracle_bad;
  if (oracle_bad) notes << "ln2=" << oracle_bad << " ";

  // 100 random instances per inequality family
  int ord = 0, dpi = 0, mono = 0, addv = 0, dsum = 0, l3 = 0, qcx = 0;
  for (int t = 0; t < 100; ++t) {
    auto r = linalg::random_density(3, rng);
    auto s = linalg::random_density(3, rng);

    double du = divergence::umegaki(r, s);
    for (double alpha : {1.5, 2.0}) {
      double ds = divergence::sandwiched_renyi(r, s, alpha);
      double dg = divergence::geometric_renyi(r, s, alpha);
      if (du > ds + 1e-8 || ds > dg + 1e-8) ++ord;
    }

    auto map = oracles::random_cptp(3, 3, 2, rng);
    auto nr = dm(map.apply(r.entries()));
    auto ns = dm(map.apply(s.entries()));
    if (divergence::sandwiched_renyi(nr, ns, 2.0) >
            divergence::sandwiched_renyi(r, s, 2.0) + 1e-8 ||
        divergence::geometric_renyi(nr, ns, 2.0) >
            divergence::geometric_renyi(r, s, 2.0) + 1e-8 ||
        divergence::umegaki(nr, ns) > du + 1e-8 ||
        divergence::belavkin_staszewski(nr, ns) >
            divergence::belavkin_staszewski(r, s) + 1e-8) {
      ++dpi;
    }

    double last_s = -1e30;
    for (double alpha : {1.1, 1.5, 2.0, 4.0}) {
      double v = divergence::sandwiched_renyi(r, s, alpha);
      if (v < last_s - 1e-8) ++mono;
      last_s = v;
    }
    double last_g = -1e30;
    for (double alpha : {1.25, 1.5, 2.0}) {
      double v = divergence::geometric_renyi(r, s, alpha);
      if (v < last_g - 1e-8) ++mono;
      last_g = v;
    }

    auto r2 = linalg::random_density(2, rng);
    auto s2 = linalg::random_density(2, rng);
    double joint =
        divergence::geometric_renyi(dm(linalg::tensor(r2.entries(), r2.entries())),
                                    dm(linalg::tensor(s2.entries(), s2.entries())), 1.5);
    if (std::abs(joint - 2 * divergence::geometric_renyi(r2, s2, 1.5)) > 1e-8) ++addv;

    {
      const double alpha = 1.5;
      auto p = linalg::random_priors(2, rng);
      auto q = linalg::random_priors(2, rng);
      auto ra = linalg::random_density(2, rng);
      auto rb = linalg::random_density(2, rng);
      auto sa = linalg::random_density(2, rng);
      auto sb = linalg::random_density(2, rng);
      CMat rho_cq = CMat::Zero(4, 4), sig_cq = CMat::Zero(4, 4);
      rho_cq.topLeftCorner(2, 2) = p[0] * ra.entries();
      rho_cq.bottomRightCorner(2, 2) = p[1] * rb.entries();
      sig_cq.topLeftCorner(2, 2) = q[0] * sa.entries();
      sig_cq.bottomRightCorner(2, 2) = q[1] * sb.entries();
      double lhs =
          std::exp((alpha - 1) * divergence::geometric_renyi(dm(rho_cq), dm(sig_cq), alpha));
      double rhs =
          std::pow(p[0], alpha) * std::pow(q[0], 1 - alpha) *
              std::exp((alpha - 1) * divergence::geometric_renyi(ra, sa, alpha)) +
          std::pow(p[1], alpha) * std::pow(q[1], 1 - alpha) *
              std::exp((alpha - 1) * divergence::geometric_renyi(rb, sb, alpha));
      if (std::abs(lhs - rhs) > 1e-8 * std::max(1.0, std::abs(rhs))) ++dsum;
    }

    {
      auto rsmall = linalg::random_density(2, rng);
      auto ssmall = linalg::random_density(2, rng);
      for (double eps : {0.1, 0.5}) {
        double lhs = divergence::hypothesis_testing(rsmall, ssmall, eps);
        for (double alpha : {1.5, 2.0}) {
          double rhs = divergence::sandwiched_renyi(rsmall, ssmall, alpha) -
                       alpha / (alpha - 1.0) * std::log1p(-eps);
          if (lhs > rhs + 1e-8) ++l3;
        }
      }
      if (t < 25) {
        auto map2 = oracles::random_cptp(2, 2, 2, rng);
        auto hr = dm(map2.apply(rsmall.entries()));
        auto hs = dm(map2.apply(ssmall.entries()));
        if (divergence::hypothesis_testing(hr, hs, 0.25) >
            divergence::hypothesis_testing(rsmall, ssmall, 0.25) + 1e-8) {
          ++dpi;
        }
      }
    }

    {
      auto p = linalg::random_priors(2, rng);
      auto ra = linalg::random_density(2, rng);
      auto rb = linalg::random_density(2, rng);
      auto sa = linalg::random_density(2, rng);
      auto sb = linalg::random_density(2, rng);
      auto mix_r = dm(p[0] * ra.entries() + p[1] * rb.entries());
      auto mix_s = dm(p[0] * sa.entries() + p[1] * sb.entries());
      double mixed = divergence::sandwiched_renyi(mix_r, mix_s, 2.0);
      double worst = std::max(divergence::sandwiched_renyi(ra, sa, 2.0),
                              divergence::sandwiched_renyi(rb, sb, 2.0));
      if (mixed > worst + 1e-8) ++qcx;
    }
  }
  int ineq = ord + dpi + mono + addv + dsum + l3 + qcx;
  bad += ineq;
  if (ineq) {
    notes << "ordering=" << ord << " dpi=" << dpi << " mono=" << mono
          << " additivity=" << addv << " direct-sum=" << dsum << " budget-ineq=" << l3
          << " quasiconvexity=" << qcx;
  }
  report(6, "divergence cross-checks and inequality battery", bad == 0,
         bad == 0 ? "zero violations" : notes.str());
}

// 7. dominating trace values and monotonicity.
void criterion_qre() {
  bool pass = true;
  std::ostringstream notes;
  auto orth = game::qre({testutil::ket0_proj(), testutil::ket1_proj()});
  if (std::abs(orth.value - 2.0) > 1e-7 || orth.primal_dual_gap > 1e-7) pass = false;
  auto zp = game::qre({testutil::ket0_proj(), testutil::plus_proj()});
  if (std::abs(zp.value - 1.707106781) > 1e-6 || zp.primal_dual_gap > 1e-7) pass = false;
  notes << "orth=" << fmt(orth.value) << " pair=" << fmt(zp.value);

  Rng rng(1011);
  int mono_bad = 0;
  std::vector<CMat> states;
  for (int x = 0; x < 3; ++x) states.push_back(linalg::random_density(2, rng).entries());
  double before = game::qre(states).value;
  for (int t = 0; t < 20; ++t) {
    auto map = oracles::random_cptp(2, 2, 2, rng);
    std::vector<CMat> after;
    for (const auto& s : states) after.push_back(map.apply(s));
    auto q = game::qre(after);
    if (q.value > before + 1e-8 || q.primal_dual_gap > 1e-7) ++mono_bad;
  }
  if (mono_bad) {
    pass = false;
    notes << " monotonicity violations=" << mono_bad;
  }
  report(7, "dominating-trace values, duality and channel monotonicity", pass,
         notes.str());
}

// 8. uniform advantage equals the dominating trace; no prior beats it.
void criterion_advantage() {
  Rng rng(1013);
  int bad = 0;
  int prior_trials = 0;
  for (int t = 0; t < 5; ++t) {
    std::vector<DensityMatrix> states{linalg::random_density(2, rng),
                                      linalg::random_density(2, rng)};
    std::vector<CMat> ops{states[0].entries(), states[1].entries()};
    double qv = game::qre(ops).value;
    double eta_star = game::abstention_threshold(ops);
    for (double eta : {eta_star, (1.0 + eta_star) / 2.0}) {
      auto adv = game::advantage_ratio(states, eta);
      if (std::abs(adv.ratio_at_uniform - qv) > 1e-6) ++bad;
    }
    for (int p = 0; p < 4; ++p, ++prior_trials) {
      auto priors = linalg::random_priors(2, rng);
      game::GameConfig cfg;
      cfg.eta = eta_star;
      double ratio =
          game::solve_primal(game::Ensemble(states, priors), cfg).success_probability /
          game::classical_success(priors, eta_star);
      if (ratio > qv + 1e-6) ++bad;
    }
  }
  report(8, "uniform-prior advantage equals the dominating trace", bad == 0,
         "violations=" + std::to_string(bad) + " over 10 threshold checks and " +
             std::to_string(prior_trials) + " random priors");
}

// 9. channel divergence values and the sampled-input bound.
void criterion_channel_divergence() {
  bool pass = true;
  std::ostringstream notes;
  auto n2 = channel::Channel::depolarizing(0.2);
  auto n5 = channel::Channel::depolarizing(0.5);
  Rng rng0(1015);
  auto nr = channel::Channel::random(2, 2, 4, rng0);
  for (const auto& ch : {n2, n5, nr}) {
    if (std::abs(channel::geometric_renyi(ch, ch, 2.0)) > 1e-7) pass = false;
  }

  double oracle = std::log(0.5 * (1.7 * 1.7 / 1.25 + 3 * 0.1 * 0.1 / 0.25));
  double value = channel::geometric_renyi(n2, n5, 2.0);
  if (std::abs(value - 0.1956) > 1e-3 || std::abs(value - oracle) > 1e-9) pass = false;
  notes << "depolarizing pair=" << fmt(value);

  Rng rng(1017);
  double best = 0;
  for (int s = 0; s < 200; ++s) {
    auto rho = linalg::random_pure(4, rng);
    auto out_n = dm(n2.apply_with_reference(rho.entries(), 2));
    auto out_m = dm(n5.apply_with_reference(rho.entries(), 2));
    best = std::max(best, divergence::geometric_renyi(out_n, out_m, 2.0));
  }
  if (best > value + 1e-6) pass = false;
  notes << " sampled max=" << fmt(best);
  report(9, "channel divergence against the commuting-Choi oracle", pass, notes.str());
}

// 10. adaptive protocols never beat the exponent bound.
void criterion_adaptive_bound() {
  Rng rng(1019);
  int bad = 0, trials = 0;
  std::vector<std::vector<channel::Channel>> instances;
  instances.push_back({channel::Channel::identity(2), channel::Channel::bit_flip(0.25)});
  instances.push_back({channel::Channel::depolarizing(0.2),
                       channel::Channel::depolarizing(0.6),
                       channel::Channel::bit_flip(0.3)});

  for (const auto& channels : instances) {
    std::vector<double> priors(channels.size(), 1.0 / channels.size());
    for (int n = 1; n <= 3; ++n) {
      double bound =
          channel::adaptive_exponent_bound(channels, priors, 0.0, n, 1);
      for (int t = 0; t < 50; ++t, ++trials) {
        auto proto = channel::random_protocol(n, 2, 2, 2, rng);
        auto trace = channel::simulate_protocol(proto, channels);
        double p = channel::protocol_success(trace, priors, 0.0);
        if (-std::log1p(-p) / n > bound + 1e-6) ++bad;
      }
    }
  }

  // identical channels: achieved ln 2 against bound 2 ln 2 at one use
  auto ch = channel::Channel::depolarizing(0.35);
  std::vector<channel::Channel> same{ch, ch};
  double bound = channel::adaptive_exponent_bound(same, {0.5, 0.5}, 0.0, 1, 0);
  auto proto = channel::random_protocol(1, 2, 2, 2, rng);
  double p = channel::protocol_success(simulate_protocol(proto, same), {0.5, 0.5}, 0.0);
  double exponent = -std::log1p(-p);
  bool ident_ok = std::abs(bound - 2 * kLn2) <= 1e-6 &&
                  std::abs(exponent - kLn2) <= 1e-6 && exponent <= bound;
  if (!ident_ok) ++bad;

  report(10, "adaptive protocols respect the exponent bound", bad == 0,
         "violations=" + std::to_string(bad) + " over " + std::to_string(trials) +
             " protocols; identical-pair bound=" + fmt(bound) +
             " achieved=" + fmt(exponent));
}

// 11. cascade sequence nonincreasing in the level.
void criterion_cascade_sequence() {
  Rng rng(1021);
  int bad = 0;
  for (int t = 0; t < 10; ++t) {
    std::vector<channel::Channel> pair{channel::Channel::random(2, 2, 4, rng),
                                       channel::Channel::random(2, 2, 4, rng)};
    auto seq = channel::asymptotic_channel_bound(pair, 3);
    for (size_t i = 0; i + 1 < seq.values.size(); ++i) {
      if (seq.values[i + 1].value > seq.values[i].value + 1e-6) ++bad;
    }
  }
  report(11, "cascade values are nonincreasing toward the vanishing order", bad == 0,
         "violations=" + std::to_string(bad) + " over 10 random pairs");
}

// 12. CLI determinism and the exit-code contract, against the real binary.
void criterion_cli() {
#ifndef QDISC_BIN
  report(12, "command-line determinism", false, "binary path not configured");
#else
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "qdisc_acceptance";
  fs::create_directories(dir);
  fs::path input = dir / "pair.json";
  {
    std::ofstream f(input);
    f << R"({
  "schema_version": "1",
  "kind": "states",
  "dim": 2,
  "matrices": [
    [[[1,0],[0,0]],[[0,0],[0,0]]],
    [[[0.5,0],[0.5,0]],[[0.5,0],[0.5,0]]]
  ],
  "priors": [0.5, 0.5],
  "params": {"eta": 0.0}
})";
  }
  auto read = [](const fs::path& f) {
    std::ifstream in(f);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  std::string base = std::string(QDISC_BIN) + " validate --seed 7 --input " +
                     input.string();
  int rc1 = std::system((base + " > " + (dir / "a.json").string() + " 2>/dev/null").c_str());
  int rc2 = std::system((base + " > " + (dir / "b.json").string() + " 2>/dev/null").c_str());
  std::string a = read(dir / "a.json"), b = read(dir / "b.json");

  fs::path bad = dir / "bad.json";
  {
    std::ofstream f(bad);
    f << "{ broken";
  }
  int rc_bad = std::system((std::string(QDISC_BIN) + " state-game --input " +
                            bad.string() + " >/dev/null 2>&1")
                               .c_str());
  bool pass = rc1 == 0 && rc2 == 0 && !a.empty() && a == b &&
              WEXITSTATUS(rc_bad) == 2;
  report(12, "command-line determinism and exit codes", pass,
         pass ? "byte-identical reports; malformed input exits 2"
              : "rc=" + std::to_string(rc1) + "," + std::to_string(rc2) +
                    " bad=" + std::to_string(WEXITSTATUS(rc_bad)) +
                    " identical=" + (a == b ? "yes" : "no"));
#endif
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion_solver_soundness();
  criterion_two_state_value();
  {
    Rng rng(1003);
    Suite suite = make_suite(100, rng);
    criteria_game_suite(suite);
  }
  criterion_divergences();
  criterion_qre();
  criterion_advantage();
  criterion_channel_divergence();
  criterion_adaptive_bound();
  criterion_cascade_sequence();
  criterion_cli();
  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures;
}
