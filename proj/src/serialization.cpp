#include "semibai/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace semibai {

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

// JSON has no infinity; store it as the string "inf".
Json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

double read_number(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw std::runtime_error("expected a number, got " + j.dump());
}

std::vector<std::vector<double>> rows_from_json(const Json& arr) {
  if (!arr.is_array()) throw std::runtime_error("expected an array of vectors");
  std::vector<std::vector<double>> rows;
  for (const auto& r : arr) {
    if (!r.is_array()) throw std::runtime_error("expected a vector (array of numbers)");
    std::vector<double> row;
    for (const auto& v : r) row.push_back(read_number(v));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

FeatureSet read_feature_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("f0", 0) == 0) continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
      if (used == 0 || used != cell.size()) {
        throw std::runtime_error("feature CSV line " + std::to_string(line_no) +
                                 ": cannot parse '" + cell + "'");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("feature CSV line " + std::to_string(line_no) +
                               ": inconsistent number of columns");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("feature CSV has no vectors");
  return FeatureSet(rows);
}

FeatureSet load_feature_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open feature file " + path);
  return read_feature_csv(in);
}

void write_feature_csv(std::ostream& out, const FeatureSet& f) {
  for (std::size_t j = 0; j < f.dim(); ++j) out << (j ? ",f" : "f") << j;
  out << '\n';
  for (std::size_t i = 0; i < f.count(); ++i) {
    for (std::size_t j = 0; j < f.dim(); ++j) {
      out << (j ? "," : "")
          << format_double(f.rows()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
}

Json to_json(const FeatureSet& f) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < f.count(); ++i) {
    Json r = Json::array();
    for (std::size_t j = 0; j < f.dim(); ++j) {
      r.push_back(f.rows()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    rows.push_back(std::move(r));
  }
  return {{"dim", f.dim()}, {"vectors", std::move(rows)}};
}

FeatureSet feature_set_from_json(const Json& j) {
  if (j.is_array()) return FeatureSet(rows_from_json(j));
  FeatureSet f(rows_from_json(j.at("vectors")));
  if (j.contains("dim") && j.at("dim").get<std::size_t>() != f.dim()) {
    throw std::runtime_error("feature set 'dim' does not match its vectors");
  }
  return f;
}

Json to_json(const ShiftSpec& s) {
  Json j{{"kind", to_string(s.kind)}};
  switch (s.kind) {
    case ShiftSpec::Kind::Sinusoidal:
      j["amplitude"] = s.amplitude;
      j["frequency"] = s.frequency;
      j["offset"] = s.offset;
      break;
    case ShiftSpec::Kind::Constant: j["value"] = s.value; break;
    case ShiftSpec::Kind::AnchorAdversarial: j["anchor"] = s.anchor; break;
    case ShiftSpec::Kind::Custom: j["table"] = s.table; break;
  }
  return j;
}

ShiftSpec shift_from_json(const Json& j) {
  const auto kind = shift_kind_from_string(j.at("kind").get<std::string>());
  switch (kind) {
    case ShiftSpec::Kind::Sinusoidal:
      return ShiftSpec::sinusoidal(j.value("amplitude", 1.0), j.value("frequency", 2.0),
                                   j.value("offset", 1.0));
    case ShiftSpec::Kind::Constant: return ShiftSpec::constant(j.value("value", 0.0));
    case ShiftSpec::Kind::AnchorAdversarial:
      return ShiftSpec::anchor_adversarial(j.value("anchor", std::size_t{0}));
    case ShiftSpec::Kind::Custom: return ShiftSpec::custom(j.at("table").get<std::vector<double>>());
  }
  return {};
}

Json to_json(const Instance& inst) {
  Json theta = Json::array();
  for (Eigen::Index i = 0; i < inst.theta_star.size(); ++i) theta.push_back(inst.theta_star(i));
  return {{"name", inst.name},           {"source", to_json(inst.source)},
          {"targets", to_json(inst.targets)}, {"theta_star", theta},
          {"shift", to_json(inst.shift)},     {"noise_std", inst.noise_std},
          {"noise", to_string(inst.noise)}};
}

Instance instance_from_json(const Json& j) {
  Instance inst;
  inst.name = j.value("name", std::string("instance"));
  inst.source = feature_set_from_json(j.at("source"));
  inst.targets = j.contains("targets") ? feature_set_from_json(j.at("targets")) : inst.source;
  const auto theta = j.at("theta_star").get<std::vector<double>>();
  inst.theta_star = Eigen::Map<const Vector>(theta.data(), static_cast<Eigen::Index>(theta.size()));
  if (static_cast<std::size_t>(inst.theta_star.size()) != inst.source.dim()) {
    throw std::runtime_error("theta_star dimension does not match the source set");
  }
  if (inst.targets.dim() != inst.source.dim()) {
    throw std::runtime_error("target and source dimensions differ");
  }
  inst.shift = j.contains("shift") ? shift_from_json(j.at("shift")) : ShiftSpec::constant(0.0);
  inst.noise_std = j.value("noise_std", 1.0);
  inst.noise = noise_kind_from_string(j.value("noise", std::string("gaussian")));
  return inst;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

Instance load_instance(const std::string& path) { return instance_from_json(load_json_file(path)); }

Json to_json(const Policy& p) {
  Json w = Json::array();
  for (std::size_t i = 0; i < p.size(); ++i) w.push_back(p[i]);
  return w;
}

Json to_json(const DesignSolution& s) {
  Json cert = Json::object();
  for (const auto& [k, v] : s.certificates) cert[k] = number(v);
  return {{"policy", to_json(s.policy)},
          {"objective", number(s.objective)},
          {"duality_gap", number(s.duality_gap)},
          {"iterations", s.iterations},
          {"converged", s.converged},
          {"certificates", cert}};
}

Json to_json(const PhaseRecord& r) {
  return {{"type", "phase"},
          {"phase", r.phase_index},
          {"epsilon", r.epsilon},
          {"delta_phase", r.delta_phase},
          {"active_before", r.active_before},
          {"active_after", r.active_after},
          {"policy", to_json(r.policy)},
          {"v_cov", number(r.v_cov)},
          {"n_samples", r.n_samples},
          {"anchor", r.anchor_used},
          {"empirical_best", r.empirical_best},
          {"beta", r.beta}};
}

Json result_json(const RunResult& r) {
  Json j{{"type", "result"},
         {"algorithm", r.algorithm},
         {"recommended", r.recommended},
         {"stopping_time", r.stopping_time},
         {"budget_exhausted", r.budget_exhausted},
         {"phases", r.phases.size()}};
  if (r.has_oracle) j["correct"] = r.correct;
  return j;
}

}  // namespace semibai
