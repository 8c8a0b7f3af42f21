#include "qdisc/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "qdisc/channelgame.hpp"
#include "qdisc/divergences.hpp"
#include "qdisc/problem_file.hpp"
#include "qdisc/report.hpp"
#include "qdisc/stategame.hpp"

namespace qdisc::cli {

namespace {

using divergence::DivergenceSpec;
using linalg::CMat;
using linalg::DensityMatrix;
using linalg::Rng;
using linalg::TraceOneHermitian;

struct Options {
  std::string command;
  std::string input, output;
  std::string format = "json";
  std::string kind;  // divergence/radius family
  std::string eta_list;
  std::optional<double> alpha, eps, tol;
  std::optional<int> level, rounds, seed;
  bool certificates = false;
};

json mat_to_json(const CMat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> parse_eta_list(const std::string& text, double fallback) {
  if (text.empty()) return {fallback};
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t pos = 0;
      double v = std::stod(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw InputError("--eta: cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw InputError("--eta: empty list");
  return out;
}

json check_entry(const std::string& name, double lhs, double rhs, double tolerance,
                 bool pass) {
  json c = json::object();
  c["name"] = name;
  c["lhs"] = lhs;
  c["rhs"] = rhs;
  c["tolerance"] = tolerance;
  c["pass"] = pass;
  return c;
}

json leq_check(const std::string& name, double lhs, double rhs, double tolerance) {
  bool pass = std::isinf(rhs) ? rhs > 0 : lhs <= rhs + tolerance;
  return check_entry(name, lhs, rhs, tolerance, pass);
}

json close_check(const std::string& name, double lhs, double rhs, double tolerance) {
  return check_entry(name, lhs, rhs, tolerance, std::abs(lhs - rhs) <= tolerance);
}

json base_record(const Options& opt, const ProblemFile& file) {
  json rec = json::object();
  rec["command"] = opt.command;
  rec["schema_version"] = file.schema_version;
  rec["input"] = opt.input;
  rec["params"] = json::object();
  return rec;
}

DivergenceSpec divergence_spec(const std::string& kind, double alpha) {
  if (kind == "sandwiched") return DivergenceSpec::sandwiched(alpha);
  if (kind == "geometric") return DivergenceSpec::geometric(alpha);
  if (kind == "umegaki") return DivergenceSpec::umegaki();
  if (kind == "bs") return DivergenceSpec::bs();
  throw InputError("--kind: unknown radius family '" + kind + "'");
}

// ---- subcommand handlers ------------------------------------------------

std::vector<json> run_divergence(const Options& opt, const ProblemFile& file) {
  if (file.matrices.size() < 2) throw InputError("matrices: need two operators");
  const double alpha = opt.alpha.value_or(file.params.alpha.value_or(2.0));
  const double eps = opt.eps.value_or(file.params.eps.value_or(0.1));
  const int level = opt.level.value_or(file.params.level.value_or(1));

  json rec;
  {
    ProblemFile dummy = file;
    Options o2 = opt;
    rec = base_record(o2, dummy);
  }
  rec["params"]["kind"] = opt.kind;
  double value = 0;
  if (opt.kind == "sandwiched") {
    rec["params"]["alpha"] = alpha;
    value = divergence::sandwiched_renyi(
        TraceOneHermitian(file.matrices[0], file.hermiticity_tol()),
        linalg::HermitianOperator(file.matrices[1], file.hermiticity_tol()), alpha);
  } else if (opt.kind == "geometric") {
    rec["params"]["alpha"] = alpha;
    value = divergence::geometric_renyi(
        linalg::HermitianOperator(file.matrices[0], file.hermiticity_tol()),
        linalg::HermitianOperator(file.matrices[1], file.hermiticity_tol()), alpha);
  } else if (opt.kind == "geometric-sdp") {
    rec["params"]["l"] = level;
    value = divergence::geometric_renyi_sdp(
        linalg::HermitianOperator(file.matrices[0], file.hermiticity_tol()),
        linalg::HermitianOperator(file.matrices[1], file.hermiticity_tol()), level);
  } else if (opt.kind == "umegaki" || opt.kind == "bs") {
    auto states = file.as_states();
    value = opt.kind == "umegaki" ? divergence::umegaki(states[0], states[1])
                                  : divergence::belavkin_staszewski(states[0], states[1]);
  } else if (opt.kind == "hypothesis") {
    rec["params"]["eps"] = eps;
    auto states = file.as_states();
    value = divergence::hypothesis_testing(states[0], states[1], eps);
  } else {
    throw InputError("--kind: unknown divergence '" + opt.kind + "'");
  }
  rec["values"] = json::object();
  rec["values"]["divergence"] = value;
  rec["checks"] = json::array();
  return {rec};
}

std::vector<json> run_radius(const Options& opt, const ProblemFile& file) {
  const double alpha = opt.alpha.value_or(file.params.alpha.value_or(2.0));
  auto spec = divergence_spec(opt.kind.empty() ? "umegaki" : opt.kind, alpha);
  auto states = file.as_states();
  auto res = divergence::radius(states, spec);

  json rec = base_record(opt, file);
  rec["params"]["kind"] = opt.kind.empty() ? "umegaki" : opt.kind;
  if (spec.family == DivergenceSpec::Family::sandwiched ||
      spec.family == DivergenceSpec::Family::geometric) {
    rec["params"]["alpha"] = alpha;
  }
  rec["values"] = json::object();
  rec["values"]["radius"] = res.value;
  rec["values"]["per_state"] = res.per_state;
  if (!std::isnan(res.solver_value)) rec["values"]["solver_value"] = res.solver_value;
  rec["checks"] = json::array();
  rec["checks"].push_back(close_check(
      "radius equals the largest center-to-state divergence", res.value,
      *std::max_element(res.per_state.begin(), res.per_state.end()), 1e-12));
  rec["diagnostics"] = json::object();
  rec["diagnostics"]["iterations"] = res.iterations;
  if (opt.certificates) {
    rec["certificates"] = json::object();
    rec["certificates"]["center"] = mat_to_json(res.optimizer_tau);
  }
  return {rec};
}

std::vector<json> run_state_game(const Options& opt, const ProblemFile& file) {
  auto states = file.as_states();
  game::Ensemble ensemble(states, file.required_priors());
  auto etas = parse_eta_list(opt.eta_list, file.params.eta.value_or(0.0));

  std::vector<json> records;
  for (double eta : etas) {
    game::GameConfig cfg;
    cfg.eta = eta;
    auto primal = game::solve_primal(ensemble, cfg);
    auto dual = game::solve_dual(ensemble, cfg);

    json rec = base_record(opt, file);
    rec["params"]["eta"] = eta;
    rec["values"] = json::object();
    rec["values"]["success_probability"] = primal.success_probability;
    rec["values"]["dual_value"] = dual.success_probability;
    rec["checks"] = json::array();
    rec["checks"].push_back(close_check("primal equals dual",
                                        primal.success_probability,
                                        dual.success_probability, 1e-6));
    rec["diagnostics"] = json::object();
    rec["diagnostics"]["gap"] = primal.gap;
    rec["diagnostics"]["gap_tol"] = sdp::SolveOptions{}.gap_tol;
    rec["diagnostics"]["kkt_residual"] = primal.kkt_residual;
    rec["diagnostics"]["kkt_tol"] = sdp::SolveOptions{}.kkt_tol;
    rec["diagnostics"]["iterations"] = primal.iterations;
    if (opt.certificates) {
      auto cert = game::hypothesis_testing_certificate(ensemble, cfg);
      rec["checks"].push_back(close_check(
          "hypothesis-test weight at the normalized dual certificate",
          cert.gamma_value, primal.success_probability, 1e-6));
      rec["certificates"] = json::object();
      for (size_t x = 0; x < primal.optimal_povm.size(); ++x) {
        rec["certificates"]["Q" + std::to_string(x)] =
            mat_to_json(primal.optimal_povm[x]);
      }
      rec["certificates"]["dual_operator"] = mat_to_json(dual.dual_certificate);
      rec["certificates"]["center"] = mat_to_json(cert.tau_hat.entries());
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<json> run_qre(const Options& opt, const ProblemFile& file) {
  auto ops = file.as_psd_operators();
  auto res = game::qre(ops);

  json rec = base_record(opt, file);
  rec["values"] = json::object();
  rec["values"]["qre"] = res.value;
  double max_tr = 0;
  for (const auto& q : ops) max_tr = std::max(max_tr, q.trace().real());
  rec["checks"] = json::array();
  rec["checks"].push_back(
      close_check("primal equals dual", res.value, res.value + res.primal_dual_gap,
                  1e-7));
  rec["checks"].push_back(
      leq_check("dominating trace is at least the largest trace", max_tr, res.value,
                1e-8));
  rec["diagnostics"] = json::object();
  rec["diagnostics"]["primal_dual_gap"] = res.primal_dual_gap;
  rec["diagnostics"]["gap_tol"] = sdp::SolveOptions{}.gap_tol;
  if (opt.certificates) {
    rec["certificates"] = json::object();
    rec["certificates"]["P"] = mat_to_json(res.dominating_operator);
    for (size_t x = 0; x < res.dual_weights.size(); ++x) {
      rec["certificates"]["Y" + std::to_string(x)] = mat_to_json(res.dual_weights[x]);
    }
  }
  return {rec};
}

std::vector<json> run_advantage(const Options& opt, const ProblemFile& file) {
  auto states = file.as_states();
  std::vector<CMat> ops;
  for (const auto& s : states) ops.push_back(s.entries());
  double eta_star = game::abstention_threshold(ops);
  double eta = opt.eta_list.empty()
                   ? file.params.eta.value_or(eta_star)
                   : parse_eta_list(opt.eta_list, eta_star).front();

  auto res = game::advantage_ratio(states, eta);
  json rec = base_record(opt, file);
  rec["params"]["eta"] = eta;
  rec["values"] = json::object();
  rec["values"]["ratio_at_uniform"] = res.ratio_at_uniform;
  rec["values"]["qre"] = res.qre_value;
  rec["values"]["eta_star"] = res.eta_star;
  rec["values"]["eta_above_threshold"] = res.eta_above_threshold;
  rec["checks"] = json::array();
  if (res.eta_above_threshold) {
    rec["checks"].push_back(close_check("uniform ratio equals the dominating trace",
                                        res.ratio_at_uniform, res.qre_value, 1e-6));
  }
  return {rec};
}

std::vector<json> run_channel_divergence(const Options& opt, const ProblemFile& file) {
  auto channels = file.as_channels();
  if (channels.size() < 2) throw InputError("matrices: need two channels");
  const double alpha = opt.alpha.value_or(file.params.alpha.value_or(2.0));
  double value = channel::geometric_renyi(channels[0], channels[1], alpha);

  json rec = base_record(opt, file);
  rec["params"]["alpha"] = alpha;
  rec["values"] = json::object();
  rec["values"]["divergence"] = value;
  rec["checks"] = json::array();
  return {rec};
}

std::vector<json> run_channel_bound(const Options& opt, const ProblemFile& file) {
  auto channels = file.as_channels();
  auto priors = file.required_priors();
  const double eta = opt.eta_list.empty()
                         ? file.params.eta.value_or(0.0)
                         : parse_eta_list(opt.eta_list, 0.0).front();
  const int rounds = opt.rounds.value_or(file.params.rounds.value_or(1));
  const bool have_level = opt.level.has_value() || file.params.level.has_value();
  const int level = opt.level.value_or(file.params.level.value_or(1));

  json rec = base_record(opt, file);
  rec["params"]["eta"] = eta;
  rec["params"]["n"] = rounds;
  rec["params"]["l"] = level;
  auto rad = channel::choi_divergence_radius(channels, level);
  double bound = channel::adaptive_exponent_bound(channels, priors, eta, rounds, level);
  rec["values"] = json::object();
  rec["values"]["exponent_bound"] = bound;
  rec["values"]["choi_radius"] = rad.value;
  rec["checks"] = json::array();
  rec["checks"].push_back(
      leq_check("choi radius is nonnegative", 0.0, rad.value, 1e-7));
  if (!have_level) {
    auto seq = channel::asymptotic_channel_bound(channels, 3);
    json entries = json::array();
    bool mono = true;
    for (size_t i = 0; i < seq.values.size(); ++i) {
      json e = json::object();
      e["alpha"] = seq.values[i].alpha;
      e["value"] = seq.values[i].value;
      entries.push_back(e);
      if (i > 0) mono = mono && seq.values[i].value <= seq.values[i - 1].value + 1e-6;
    }
    rec["values"]["vanishing_order_sequence"] = entries;
    rec["values"]["vanishing_order_best"] = seq.best;
    rec["checks"].push_back(check_entry("cascade sequence is nonincreasing",
                                        seq.values.back().value,
                                        seq.values.front().value, 1e-6, mono));
  }
  rec["diagnostics"] = json::object();
  rec["diagnostics"]["solver_gap"] = rad.solver_gap;
  rec["diagnostics"]["gap_tol"] = sdp::SolveOptions{}.gap_tol;
  rec["diagnostics"]["iterations"] = rad.iterations;
  rec["diagnostics"]["certified_at_feasible_center"] = rad.via_feasible_center;
  if (opt.certificates) {
    rec["certificates"] = json::object();
    rec["certificates"]["choi_center"] = mat_to_json(rad.choi_center);
  }
  return {rec};
}

std::vector<json> run_simulate(const Options& opt, const ProblemFile& file) {
  auto channels = file.as_channels();
  auto priors = file.required_priors();
  const double eta = opt.eta_list.empty()
                         ? file.params.eta.value_or(0.0)
                         : parse_eta_list(opt.eta_list, 0.0).front();
  const int rounds = opt.rounds.value_or(file.params.rounds.value_or(1));
  const int level = opt.level.value_or(file.params.level.value_or(1));
  const int seed = opt.seed.value_or(file.params.seed.value_or(0));

  Rng rng(static_cast<uint64_t>(seed));
  auto protocol =
      channel::random_protocol(rounds, 2, channels[0].dim_in(), channels[0].dim_out(), rng);
  auto trace = channel::simulate_protocol(protocol, channels);
  double success = channel::protocol_success(trace, priors, eta);
  double exponent = -std::log1p(-success) / rounds;
  double bound = channel::adaptive_exponent_bound(channels, priors, eta, rounds, level);

  json rec = base_record(opt, file);
  rec["params"]["eta"] = eta;
  rec["params"]["n"] = rounds;
  rec["params"]["l"] = level;
  rec["params"]["seed"] = seed;
  rec["values"] = json::object();
  rec["values"]["success_probability"] = success;
  rec["values"]["achieved_exponent"] = exponent;
  rec["values"]["exponent_bound"] = bound;
  rec["checks"] = json::array();
  rec["checks"].push_back(
      leq_check("achieved exponent respects the bound", exponent, bound, 1e-6));
  return {rec};
}

json validate_states(const ProblemFile& file, double eta, int seed, json& checks) {
  auto states = file.as_states();
  auto priors = file.priors.empty()
                    ? std::vector<double>(states.size(), 1.0 / states.size())
                    : file.priors;
  game::Ensemble ensemble(states, priors);
  game::GameConfig cfg;
  cfg.eta = eta;

  auto primal = game::solve_primal(ensemble, cfg);
  auto dual = game::solve_dual(ensemble, cfg);
  checks.push_back(close_check("game primal equals dual", primal.success_probability,
                               dual.success_probability, 1e-6));

  game::GameConfig base;
  double p0 = game::solve_primal(ensemble, base).success_probability;
  for (double e2 : {0.3, 0.7}) {
    game::GameConfig c2;
    c2.eta = e2;
    checks.push_back(close_check(
        "success scales linearly in the admissible weight at eta=" + std::to_string(e2),
        game::solve_primal(ensemble, c2).success_probability, (1.0 - e2) * p0, 1e-6));
  }

  auto cert = game::hypothesis_testing_certificate(ensemble, cfg);
  checks.push_back(close_check("hypothesis-test weight matches the game value",
                               cert.gamma_value, primal.success_probability, 1e-6));

  for (double alpha : {1.5, 2.0}) {
    game::GameConfig c3;
    c3.eta = eta;
    c3.alpha = alpha;
    double bound = game::radius_exponent_bound(ensemble, c3);
    double lhs = -std::log1p(-primal.success_probability);
    checks.push_back(leq_check(
        "radius bound dominates the exponent at alpha=" + std::to_string(alpha), lhs,
        bound, 1e-6));
  }

  std::vector<CMat> ops;
  for (const auto& s : states) ops.push_back(s.entries());
  auto q = game::qre(ops);
  checks.push_back(
      close_check("dominating-trace duality", q.primal_dual_gap, 0.0, 1e-7));
  auto adv = game::advantage_ratio(states, game::abstention_threshold(ops));
  checks.push_back(close_check("uniform advantage equals the dominating trace",
                               adv.ratio_at_uniform, adv.qre_value, 1e-6));

  Rng rng(static_cast<uint64_t>(seed));
  auto map_kraus = channel::Channel::random(states[0].dim(), states[0].dim(), 2, rng);
  for (size_t i = 0; i + 1 < states.size(); ++i) {
    const auto& a = states[i];
    const auto& b = states[i + 1];
    double du = divergence::umegaki(a, b);
    double ds = divergence::sandwiched_renyi(a, b, 2.0);
    double dg = divergence::geometric_renyi(a, b, 2.0);
    checks.push_back(leq_check("relative entropy below the sandwiched order-2 value",
                               du, ds, 1e-8));
    checks.push_back(
        leq_check("sandwiched below the geometric order-2 value", ds, dg, 1e-8));
    DensityMatrix na(map_kraus.apply(a.entries()));
    DensityMatrix nb(map_kraus.apply(b.entries()));
    checks.push_back(leq_check("data processing for the sandwiched divergence",
                               divergence::sandwiched_renyi(na, nb, 2.0), ds, 1e-8));
  }

  json values = json::object();
  values["success_probability"] = primal.success_probability;
  values["qre"] = q.value;
  values["eta_star"] = adv.eta_star;
  return values;
}

json validate_channels(const ProblemFile& file, double eta, int seed, int rounds,
                       json& checks) {
  auto channels = file.as_channels();
  auto priors = file.priors.empty()
                    ? std::vector<double>(channels.size(), 1.0 / channels.size())
                    : file.priors;

  for (size_t i = 0; i < channels.size(); ++i) {
    checks.push_back(close_check("self divergence vanishes for channel " +
                                     std::to_string(i),
                                 channel::geometric_renyi(channels[i], channels[i], 2.0),
                                 0.0, 1e-7));
  }
  for (size_t i = 0; i + 1 < channels.size(); ++i) {
    double last = -divergence::kInf;
    bool mono = true;
    for (double alpha : {1.25, 1.5, 2.0}) {
      double v = channel::geometric_renyi(channels[i], channels[i + 1], alpha);
      mono = mono && (std::isinf(v) || v >= last - 1e-8);
      last = v;
    }
    checks.push_back(check_entry("channel divergence is nondecreasing in the order",
                                 0.0, 0.0, 1e-8, mono));
  }

  Rng rng(static_cast<uint64_t>(seed));
  double alpha = 1.5;
  double pair_value = channel::geometric_renyi(channels[0], channels.back(), alpha);
  if (!std::isinf(pair_value)) {
    double best = 0;
    for (int s = 0; s < 50; ++s) {
      auto rho = linalg::random_pure(channels[0].dim_in() * channels[0].dim_in(), rng);
      auto out_n = DensityMatrix(
          channels[0].apply_with_reference(rho.entries(), channels[0].dim_in()));
      auto out_m = DensityMatrix(
          channels.back().apply_with_reference(rho.entries(), channels[0].dim_in()));
      best = std::max(best, divergence::geometric_renyi(out_n, out_m, alpha));
    }
    checks.push_back(leq_check("sampled inputs stay below the channel divergence",
                               best, pair_value, 1e-6));
  }

  auto seq = channel::asymptotic_channel_bound(channels, 2);
  checks.push_back(check_entry("cascade sequence is nonincreasing",
                               seq.values.back().value, seq.values.front().value, 1e-6,
                               seq.values.back().value <=
                                   seq.values.front().value + 1e-6));

  for (int n = 1; n <= std::max(1, rounds); ++n) {
    double bound = channel::adaptive_exponent_bound(channels, priors, eta, n, 1);
    double worst = -divergence::kInf;
    for (int trial = 0; trial < 10; ++trial) {
      auto proto = channel::random_protocol(n, 2, channels[0].dim_in(),
                                            channels[0].dim_out(), rng);
      auto trace = channel::simulate_protocol(proto, channels);
      double p = channel::protocol_success(trace, priors, eta);
      worst = std::max(worst, -std::log1p(-p) / n);
    }
    checks.push_back(leq_check(
        "sampled adaptive exponents respect the bound at n=" + std::to_string(n),
        worst, bound, 1e-6));
  }

  json values = json::object();
  values["vanishing_order_best"] = seq.best;
  return values;
}

json validate_operators(const ProblemFile& file, int seed, json& checks) {
  auto ops = file.as_psd_operators();
  auto q = game::qre(ops);
  checks.push_back(
      close_check("dominating-trace duality", q.primal_dual_gap, 0.0, 1e-7));
  double max_tr = 0;
  for (const auto& o : ops) max_tr = std::max(max_tr, o.trace().real());
  checks.push_back(leq_check("dominating trace is at least the largest trace",
                             max_tr, q.value, 1e-8));

  Rng rng(static_cast<uint64_t>(seed));
  auto map = channel::Channel::random(static_cast<int>(ops[0].rows()),
                                      static_cast<int>(ops[0].rows()), 2, rng);
  std::vector<CMat> mapped;
  for (const auto& o : ops) mapped.push_back(map.apply(o));
  checks.push_back(leq_check("dominating trace shrinks under a channel",
                             game::qre(mapped).value, q.value, 1e-8));

  json values = json::object();
  values["qre"] = q.value;
  return values;
}

std::vector<json> run_validate(const Options& opt, const ProblemFile& file) {
  const double eta = opt.eta_list.empty()
                         ? file.params.eta.value_or(0.0)
                         : parse_eta_list(opt.eta_list, 0.0).front();
  const int seed = opt.seed.value_or(file.params.seed.value_or(0));
  const int rounds = opt.rounds.value_or(file.params.rounds.value_or(2));

  json rec = base_record(opt, file);
  rec["params"]["eta"] = eta;
  rec["params"]["seed"] = seed;
  json checks = json::array();
  json values;
  switch (file.kind) {
    case ProblemFile::Kind::states:
      values = validate_states(file, eta, seed, checks);
      break;
    case ProblemFile::Kind::channels:
      values = validate_channels(file, eta, seed, rounds, checks);
      break;
    case ProblemFile::Kind::operators:
      values = validate_operators(file, seed, checks);
      break;
  }
  rec["values"] = values;
  rec["checks"] = checks;
  int failed = 0;
  for (const auto& c : checks) {
    if (!c.at("pass").get<bool>()) ++failed;
  }
  rec["values"]["checks_failed"] = failed;
  return {rec};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"discrimination-game and divergence-bound toolkit"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--input", opt.input, "problem file (JSON)")->required();
    sub->add_option("--output", opt.output, "also write the report here");
    sub->add_option("--format", opt.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--eta", opt.eta_list, "abstention floor(s), comma separated");
    sub->add_option("--alpha", opt.alpha, "divergence order");
    sub->add_option("--l", opt.level, "cascade level, alpha = 1 + 2^-l");
    sub->add_option("--n", opt.rounds, "number of channel uses");
    sub->add_option("--eps", opt.eps, "type-I error budget");
    sub->add_option("--seed", opt.seed, "seed for randomized suites");
    sub->add_option("--tol", opt.tol, "input hermiticity tolerance");
    sub->add_flag("--certificates", opt.certificates, "include optimizer blocks");
  };

  for (const char* name :
       {"divergence", "radius", "state-game", "qre", "advantage",
        "channel-divergence", "channel-bound", "simulate", "validate"}) {
    auto* sub = app.add_subcommand(name);
    add_common(sub);
    if (std::string(name) == "divergence" || std::string(name) == "radius") {
      sub->add_option("--kind", opt.kind, "divergence family");
    }
    sub->callback([&opt, name]() { opt.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help
      out << app.help();
      return 0;
    }
    err << "input error: " << e.what() << "\n";
    return 2;
  }

  try {
    // flag ranges are input errors, not computation errors
    for (double eta : parse_eta_list(opt.eta_list, 0.0)) {
      if (!(eta >= 0.0 && eta < 1.0)) throw InputError("--eta: must lie in [0,1)");
    }
    if (opt.eps && !(*opt.eps > 0.0 && *opt.eps < 1.0)) {
      throw InputError("--eps: must lie in (0,1)");
    }
    if (opt.alpha && !(*opt.alpha > 1.0)) throw InputError("--alpha: must exceed 1");
    if (opt.level && (*opt.level < 0 || *opt.level > 3)) {
      throw InputError("--l: must lie in 0..3");
    }
    if (opt.rounds && (*opt.rounds < 1 || *opt.rounds > 8)) {
      throw InputError("--n: must lie in 1..8");
    }

    ProblemFile file = ProblemFile::load(opt.input);
    std::vector<json> records;
    if (opt.command == "divergence") {
      records = run_divergence(opt, file);
    } else if (opt.command == "radius") {
      records = run_radius(opt, file);
    } else if (opt.command == "state-game") {
      records = run_state_game(opt, file);
    } else if (opt.command == "qre") {
      records = run_qre(opt, file);
    } else if (opt.command == "advantage") {
      records = run_advantage(opt, file);
    } else if (opt.command == "channel-divergence") {
      records = run_channel_divergence(opt, file);
    } else if (opt.command == "channel-bound") {
      records = run_channel_bound(opt, file);
    } else if (opt.command == "simulate") {
      records = run_simulate(opt, file);
    } else if (opt.command == "validate") {
      records = run_validate(opt, file);
    } else {
      err << "input error: unknown command\n";
      return 2;
    }

    for (auto& r : records) r = round_floats(r);
    std::string text;
    if (opt.format == "csv") {
      text = emit_csv(records);
    } else if (records.size() == 1) {
      text = emit_json(records.front());
    } else {
      json arr = json::array();
      for (auto& r : records) arr.push_back(r);
      text = emit_json(arr);
    }
    out << text;
    if (!opt.output.empty()) {
      std::ofstream f(opt.output);
      if (!f) throw InputError("cannot write output file: " + opt.output);
      f << text;
    }

    // any failed check is a computation-level failure
    for (const auto& r : records) {
      if (!r.contains("checks")) continue;
      for (const auto& c : r.at("checks")) {
        if (!c.at("pass").get<bool>()) return 1;
      }
    }
    return 0;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "computation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "computation error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace qdisc::cli
