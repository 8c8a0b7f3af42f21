#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qdisc/channelgame.hpp"
#include "qdisc/linalg.hpp"
#include "qdisc/report.hpp"

namespace qdisc::cli {

using linalg::CMat;

/// Versioned problem description: complex matrices as [re, im] pairs in
/// row-major nested arrays, plus priors and named parameters. Matrices are
/// never implicitly Hermitized; asymmetry beyond the tolerance is an input
/// error.
struct ProblemFile {
  enum class Kind { states, channels, operators };

  std::string schema_version;
  Kind kind = Kind::states;
  int dim = 0;
  std::vector<CMat> matrices;
  std::vector<double> priors;  // empty when absent

  struct Params {
    std::optional<double> eta, alpha, eps, tol;
    std::optional<int> level, rounds, seed, dim_in;
  } params;

  static ProblemFile load(const std::string& path);
  static ProblemFile parse(const json& j);

  /// Validated views; every failure is an InputError carrying a field path.
  std::vector<linalg::DensityMatrix> as_states() const;
  std::vector<CMat> as_psd_operators() const;
  std::vector<channel::Channel> as_channels() const;
  std::vector<double> required_priors() const;

  double hermiticity_tol() const;
};

std::string kind_name(ProblemFile::Kind k);

}  // namespace qdisc::cli
