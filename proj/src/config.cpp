#include "popsize/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace popsize {

using nlohmann::json;

Grid DomainSpec::grid(double mu) const {
  if (dimension == 1) return Grid::interval(extents[0], cells[0] > 0 ? cells[0] : default_cells(mu));
  if (dimension == 2) {
    return Grid::box(extents[0], extents[1], cells[0] > 0 ? cells[0] : 24, cells[1] > 0 ? cells[1] : 48);
  }
  throw InvalidArgument("domain dimension must be 1 or 2");
}

std::vector<double> SweepSpec::grid() const {
  if (!values.empty()) return values;
  if (!(min > 0.0 && max > min) || points < 2) throw InvalidArgument("sweep needs 0 < min < max and points >= 2");
  std::vector<double> out(points);
  const double a = std::log(min), b = std::log(max);
  for (int i = 0; i < points; ++i) out[i] = std::exp(a + (b - a) * i / (points - 1));
  out.front() = min;
  out.back() = max;
  return out;
}

namespace {

json to_document(const RunConfig& c) {
  const OptimizerConfig& o = c.optimizer;
  json j;
  j["experiment"] = c.experiment;
  j["domain"] = {{"dimension", c.domain.dimension},
                 {"extents", {c.domain.extents[0], c.domain.extents[1]}},
                 {"cells", {c.domain.cells[0], c.domain.cells[1]}}};
  j["budget"] = {{"m0", c.m0}, {"kappa", c.kappa}};
  j["mu"] = c.mu ? json(*c.mu) : json(nullptr);
  j["sweep"] = {{"min", c.sweep.min}, {"max", c.sweep.max}, {"points", c.sweep.points}, {"values", c.sweep.values}};
  j["optimizer"] = {{"max_iters", o.max_iters},
                    {"armijo", o.armijo},
                    {"backtrack", o.backtrack},
                    {"max_backtracks", o.max_backtracks},
                    {"projection_tol", o.projection_tol},
                    {"pg_tol", o.pg_tol},
                    {"starts", o.starts},
                    {"rearrangement_polish", o.rearrangement_polish},
                    {"max_polish_rounds", o.max_polish_rounds},
                    {"parallel", o.parallel}};
  j["solver"] = {{"tol", o.solver.tol},
                 {"max_newton_iters", o.solver.max_newton_iters},
                 {"polish", o.solver.polish},
                 {"continuation", o.solver.continuation},
                 {"max_continuation_steps", o.solver.max_continuation_steps}};
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  return j;
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw InvalidArgument("config: '" + where + "' must be an object");
  for (const auto& item : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; })) {
      throw InvalidArgument("config: unknown key '" + (where.empty() ? "" : where + ".") + item.key() + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

RunConfig from_document(const json& j) {
  RunConfig c;
  check_keys(j, "", {"experiment", "domain", "budget", "mu", "sweep", "optimizer", "solver", "output_dir", "seed",
                     "threads"});
  read(j, "experiment", c.experiment);
  if (j.contains("domain")) {
    const json& d = j["domain"];
    check_keys(d, "domain", {"dimension", "extents", "cells"});
    read(d, "dimension", c.domain.dimension);
    if (d.contains("extents")) {
      const auto e = d["extents"].get<std::vector<double>>();
      for (std::size_t k = 0; k < std::min<std::size_t>(2, e.size()); ++k) c.domain.extents[k] = e[k];
    }
    if (d.contains("cells")) {
      const auto n = d["cells"].get<std::vector<int>>();
      for (std::size_t k = 0; k < std::min<std::size_t>(2, n.size()); ++k) c.domain.cells[k] = n[k];
    }
  }
  if (j.contains("budget")) {
    check_keys(j["budget"], "budget", {"m0", "kappa"});
    read(j["budget"], "m0", c.m0);
    read(j["budget"], "kappa", c.kappa);
  }
  if (j.contains("mu") && !j["mu"].is_null()) c.mu = j["mu"].get<double>();
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    check_keys(s, "sweep", {"min", "max", "points", "values"});
    read(s, "min", c.sweep.min);
    read(s, "max", c.sweep.max);
    read(s, "points", c.sweep.points);
    read(s, "values", c.sweep.values);
  }
  OptimizerConfig& o = c.optimizer;
  if (j.contains("optimizer")) {
    const json& s = j["optimizer"];
    check_keys(s, "optimizer", {"max_iters", "armijo", "backtrack", "max_backtracks", "projection_tol", "pg_tol",
                                "starts", "rearrangement_polish", "max_polish_rounds", "parallel"});
    read(s, "max_iters", o.max_iters);
    read(s, "armijo", o.armijo);
    read(s, "backtrack", o.backtrack);
    read(s, "max_backtracks", o.max_backtracks);
    read(s, "projection_tol", o.projection_tol);
    read(s, "pg_tol", o.pg_tol);
    read(s, "starts", o.starts);
    read(s, "rearrangement_polish", o.rearrangement_polish);
    read(s, "max_polish_rounds", o.max_polish_rounds);
    read(s, "parallel", o.parallel);
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    check_keys(s, "solver", {"tol", "max_newton_iters", "polish", "continuation", "max_continuation_steps"});
    read(s, "tol", o.solver.tol);
    read(s, "max_newton_iters", o.solver.max_newton_iters);
    read(s, "polish", o.solver.polish);
    read(s, "continuation", o.solver.continuation);
    read(s, "max_continuation_steps", o.solver.max_continuation_steps);
  }
  read(j, "output_dir", c.output_dir);
  read(j, "seed", c.seed);
  read(j, "threads", c.threads);
  o.seed = c.seed;
  if (c.domain.dimension != 1 && c.domain.dimension != 2) throw InvalidArgument("config: domain.dimension must be 1 or 2");
  o.validate();
  return c;
}

}  // namespace

std::string RunConfig::to_json() const { return to_document(*this).dump(2) + "\n"; }

RunConfig RunConfig::from_json(const std::string& text) {
  try {
    return from_document(json::parse(text));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("config: cannot write " + path);
  out << to_json();
}

void RunConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw InvalidArgument("override '" + assignment + "' is not key=value");
  std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  std::replace(key.begin(), key.end(), '-', '_');
  if (key.rfind("opt.", 0) == 0) key = "optimizer." + key.substr(4);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json doc = to_document(*this);
  json* node = &doc;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    if (!node->contains(path[k])) throw InvalidArgument("override: unknown section '" + path[k] + "'");
    node = &(*node)[path[k]];
  }
  if (!node->is_object() || !node->contains(path.back())) throw InvalidArgument("override: unknown key '" + key + "'");
  (*node)[path.back()] = value;
  try {
    *this = from_document(doc);
  } catch (const json::exception& e) {
    throw InvalidArgument("override '" + assignment + "': " + e.what());
  }
}

bool same_settings(const RunConfig& a, const RunConfig& b) { return a.to_json() == b.to_json(); }

}  // namespace popsize
