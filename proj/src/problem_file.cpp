#include "qdisc/problem_file.hpp"

#include <cmath>
#include <fstream>

namespace qdisc::cli {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw InputError(path + ": " + what);
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

CMat parse_matrix(const json& j, int dim, const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    fail(path, "expected " + std::to_string(dim) + " rows");
  }
  CMat m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const json& row = j[r];
    const std::string rpath = path + "[" + std::to_string(r) + "]";
    if (!row.is_array() || static_cast<int>(row.size()) != dim) {
      fail(rpath, "expected " + std::to_string(dim) + " entries");
    }
    for (int c = 0; c < dim; ++c) {
      const json& cell = row[c];
      const std::string cpath = rpath + "[" + std::to_string(c) + "]";
      if (!cell.is_array() || cell.size() != 2) {
        fail(cpath, "expected an [re, im] pair");
      }
      m(r, c) = linalg::Complex(get_number(cell[0], cpath + "[0]"),
                                get_number(cell[1], cpath + "[1]"));
    }
  }
  return m;
}

}  // namespace

std::string kind_name(ProblemFile::Kind k) {
  switch (k) {
    case ProblemFile::Kind::states: return "states";
    case ProblemFile::Kind::channels: return "channels";
    case ProblemFile::Kind::operators: return "operators";
  }
  return "?";
}

ProblemFile ProblemFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InputError(path + ": invalid JSON: " + e.what());
  }
  return parse(j);
}

ProblemFile ProblemFile::parse(const json& j) {
  ProblemFile f;
  if (!j.is_object()) fail("$", "expected a JSON object");
  if (!j.contains("schema_version") || !j["schema_version"].is_string()) {
    fail("schema_version", "required string");
  }
  f.schema_version = j["schema_version"].get<std::string>();
  if (f.schema_version != "1") fail("schema_version", "unsupported version");

  if (!j.contains("kind") || !j["kind"].is_string()) fail("kind", "required string");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "states") {
    f.kind = Kind::states;
  } else if (kind == "channels") {
    f.kind = Kind::channels;
  } else if (kind == "operators") {
    f.kind = Kind::operators;
  } else {
    fail("kind", "must be states, channels or operators");
  }

  if (!j.contains("dim")) fail("dim", "required");
  f.dim = get_int(j["dim"], "dim");
  if (f.dim < 1 || f.dim > 64) fail("dim", "must lie in 1..64");

  if (!j.contains("matrices") || !j["matrices"].is_array() || j["matrices"].empty()) {
    fail("matrices", "required nonempty array");
  }
  for (size_t i = 0; i < j["matrices"].size(); ++i) {
    f.matrices.push_back(parse_matrix(j["matrices"][i], f.dim,
                                      "matrices[" + std::to_string(i) + "]"));
  }

  if (j.contains("priors")) {
    if (!j["priors"].is_array()) fail("priors", "expected an array");
    double total = 0;
    for (size_t i = 0; i < j["priors"].size(); ++i) {
      double p = get_number(j["priors"][i], "priors[" + std::to_string(i) + "]");
      if (p <= 0) fail("priors[" + std::to_string(i) + "]", "must be positive");
      f.priors.push_back(p);
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) fail("priors", "must sum to one");
    if (f.priors.size() != f.matrices.size()) {
      fail("priors", "must match the number of matrices");
    }
  }

  if (j.contains("params")) {
    const json& p = j["params"];
    if (!p.is_object()) fail("params", "expected an object");
    for (auto& [key, val] : p.items()) {
      const std::string path = "params." + key;
      if (key == "eta") {
        f.params.eta = get_number(val, path);
      } else if (key == "alpha") {
        f.params.alpha = get_number(val, path);
      } else if (key == "eps") {
        f.params.eps = get_number(val, path);
      } else if (key == "tol") {
        f.params.tol = get_number(val, path);
      } else if (key == "l") {
        f.params.level = get_int(val, path);
      } else if (key == "n") {
        f.params.rounds = get_int(val, path);
      } else if (key == "seed") {
        f.params.seed = get_int(val, path);
      } else if (key == "dim_in") {
        f.params.dim_in = get_int(val, path);
      } else {
        fail(path, "unknown parameter");
      }
    }
  }
  return f;
}

double ProblemFile::hermiticity_tol() const {
  return params.tol.value_or(linalg::kHermTol);
}

std::vector<linalg::DensityMatrix> ProblemFile::as_states() const {
  if (kind != Kind::states) {
    throw InputError("kind: expected states, got " + kind_name(kind));
  }
  std::vector<linalg::DensityMatrix> out;
  for (size_t i = 0; i < matrices.size(); ++i) {
    try {
      out.emplace_back(matrices[i], hermiticity_tol());
    } catch (const Error& e) {
      throw InputError("matrices[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return out;
}

std::vector<CMat> ProblemFile::as_psd_operators() const {
  if (kind == Kind::channels) {
    throw InputError("kind: expected states or operators, got channels");
  }
  std::vector<CMat> out;
  for (size_t i = 0; i < matrices.size(); ++i) {
    try {
      linalg::HermitianOperator h(matrices[i], hermiticity_tol());
      if (linalg::eig(h).eigenvalues.minCoeff() <
          -1e-8 * (1.0 + linalg::operator_norm(h))) {
        throw DomainError("not positive semidefinite");
      }
      out.push_back(h.entries());
    } catch (const Error& e) {
      throw InputError("matrices[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return out;
}

std::vector<channel::Channel> ProblemFile::as_channels() const {
  if (kind != Kind::channels) {
    throw InputError("kind: expected channels, got " + kind_name(kind));
  }
  if (!params.dim_in) throw InputError("params.dim_in: required for channels");
  std::vector<channel::Channel> out;
  for (size_t i = 0; i < matrices.size(); ++i) {
    try {
      out.push_back(channel::Channel::from_choi(matrices[i], *params.dim_in,
                                                params.tol.value_or(1e-8)));
    } catch (const Error& e) {
      throw InputError("matrices[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return out;
}

std::vector<double> ProblemFile::required_priors() const {
  if (priors.empty()) {
    throw InputError("priors: required for this command");
  }
  return priors;
}

}  // namespace qdisc::cli
