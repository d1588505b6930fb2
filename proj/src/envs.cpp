#include "semibai/envs.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace semibai {

ShiftSpec ShiftSpec::sinusoidal(double amplitude, double frequency, double offset) {
  ShiftSpec s;
  s.kind = Kind::Sinusoidal;
  s.amplitude = amplitude;
  s.frequency = frequency;
  s.offset = offset;
  return s;
}

ShiftSpec ShiftSpec::constant(double value) {
  ShiftSpec s;
  s.kind = Kind::Constant;
  s.value = value;
  return s;
}

ShiftSpec ShiftSpec::anchor_adversarial(std::size_t anchor) {
  ShiftSpec s;
  s.kind = Kind::AnchorAdversarial;
  s.anchor = anchor;
  return s;
}

ShiftSpec ShiftSpec::custom(std::vector<double> table) {
  if (table.empty()) throw ContractError("custom shift table is empty");
  ShiftSpec s;
  s.kind = Kind::Custom;
  s.table = std::move(table);
  return s;
}

std::string to_string(ShiftSpec::Kind kind) {
  switch (kind) {
    case ShiftSpec::Kind::Sinusoidal: return "sinusoidal";
    case ShiftSpec::Kind::Constant: return "constant";
    case ShiftSpec::Kind::AnchorAdversarial: return "anchor_adversarial";
    case ShiftSpec::Kind::Custom: return "custom";
  }
  return "unknown";
}

ShiftSpec::Kind shift_kind_from_string(const std::string& name) {
  if (name == "sinusoidal") return ShiftSpec::Kind::Sinusoidal;
  if (name == "constant") return ShiftSpec::Kind::Constant;
  if (name == "anchor_adversarial") return ShiftSpec::Kind::AnchorAdversarial;
  if (name == "custom") return ShiftSpec::Kind::Custom;
  throw ContractError("unknown shift kind '" + name + "'");
}

ShiftSequence::ShiftSequence(ShiftSpec spec, const FeatureSet& source, const Vector& theta_star)
    : spec_(std::move(spec)) {
  if (spec_.kind == ShiftSpec::Kind::AnchorAdversarial) {
    if (spec_.anchor >= source.count()) throw ContractError("adversarial anchor out of range");
    adversarial_value_ = -source.row(spec_.anchor).dot(theta_star.transpose());
  }
  if (spec_.kind == ShiftSpec::Kind::Custom && spec_.table.empty()) {
    throw ContractError("custom shift table is empty");
  }
}

double ShiftSequence::at(std::uint64_t t) const {
  switch (spec_.kind) {
    case ShiftSpec::Kind::Sinusoidal:
      return spec_.offset + spec_.amplitude * std::sin(spec_.frequency * static_cast<double>(t));
    case ShiftSpec::Kind::Constant: return spec_.value;
    case ShiftSpec::Kind::AnchorAdversarial: return adversarial_value_;
    case ShiftSpec::Kind::Custom:
      return spec_.table[static_cast<std::size_t>((t - 1) % spec_.table.size())];
  }
  return 0.0;
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::Rademacher: return "rademacher";
    case NoiseKind::Uniform: return "uniform";
  }
  return "unknown";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "gaussian") return NoiseKind::Gaussian;
  if (name == "rademacher") return NoiseKind::Rademacher;
  if (name == "uniform") return NoiseKind::Uniform;
  throw ContractError("unknown noise kind '" + name + "'");
}

Environment::Environment(FeatureSet source, Vector theta_star, ShiftSpec shift, double noise_std,
                         std::uint64_t seed, NoiseKind noise, bool enforce_unit_ball)
    : source_(std::move(source)),
      theta_star_(std::move(theta_star)),
      shift_(std::move(shift), source_, theta_star_),
      noise_std_(noise_std),
      noise_(noise),
      enforce_(enforce_unit_ball),
      rng_(seed) {
  if (static_cast<std::size_t>(theta_star_.size()) != source_.dim()) {
    throw ContractError("theta* dimension mismatch");
  }
  if (!(noise_std_ >= 0.0)) throw ContractError("noise_std must be >= 0");
  if (enforce_) source_.check_unit_ball();
}

double Environment::pull(std::size_t arm) {
  if (arm >= source_.count()) throw ContractError("arm " + std::to_string(arm) + " out of range");
  ++t_;
  // The shift is fixed from t alone, before the arm enters the reward.
  const double nu = shift_.at(t_);
  if (enforce_ && std::abs(nu) > 1.0 + 1e-12) {
    throw ContractError("shift |nu_t| = " + std::to_string(std::abs(nu)) + " exceeds 1 at t = " +
                        std::to_string(t_));
  }
  last_shift_ = nu;
  double eta = 0.0;
  if (noise_std_ > 0.0) {
    switch (noise_) {
      case NoiseKind::Gaussian: eta = noise_std_ * gauss_(rng_); break;
      case NoiseKind::Rademacher: eta = (rng_() >> 63) ? noise_std_ : -noise_std_; break;
      case NoiseKind::Uniform: {
        const double u = std::generate_canonical<double, 53>(rng_);
        eta = noise_std_ * std::sqrt(3.0) * (2.0 * u - 1.0);
        break;
      }
    }
  }
  return source_.row(arm).dot(theta_star_.transpose()) + nu + eta;
}

Instance make_small_gap_instance(std::size_t d, double alpha) {
  if (d < 2) throw ContractError("small-gap instance needs d >= 2");
  const double c = std::cos(alpha);
  if (!(2.0 * (1.0 - c) > 0.0)) {
    throw ContractError("alpha gives a duplicate best arm (zero gap)");
  }
  const auto di = static_cast<Eigen::Index>(d);
  Matrix x = Matrix::Zero(di + 1, di);
  x.topRows(di).setIdentity();
  x(di, 0) = c;
  x(di, 1) = std::sin(alpha);
  Instance inst;
  inst.name = "small_gap";
  inst.source = FeatureSet(x);
  inst.targets = inst.source;
  inst.theta_star = Vector::Zero(di);
  inst.theta_star(0) = 2.0;
  inst.shift = ShiftSpec::sinusoidal(1.0, 2.0, 1.0);
  return inst;
}

Instance make_uniform_sphere_instance(std::size_t d, std::size_t K, std::uint64_t seed,
                                      double min_top_gap) {
  if (d < 2 || K < 2) throw ContractError("uniform-sphere instance needs d >= 2 and K >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto di = static_cast<Eigen::Index>(d);
  const auto ki = static_cast<Eigen::Index>(K);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Matrix x(ki, di);
    for (Eigen::Index i = 0; i < ki; ++i) {
      double norm = 0.0;
      while (norm == 0.0) {
        for (Eigen::Index j = 0; j < di; ++j) x(i, j) = g(rng);
        norm = x.row(i).norm();
      }
      x.row(i) /= norm;
    }
    std::vector<double> first(static_cast<std::size_t>(K));
    for (Eigen::Index i = 0; i < ki; ++i) first[static_cast<std::size_t>(i)] = 2.0 * x(i, 0);
    std::sort(first.begin(), first.end(), std::greater<>());
    if (first[0] - first[1] < min_top_gap) continue;
    Instance inst;
    inst.name = "uniform_sphere";
    inst.source = FeatureSet(x);
    inst.targets = inst.source;
    inst.theta_star = Vector::Zero(di);
    inst.theta_star(0) = 2.0;
    inst.shift = ShiftSpec::sinusoidal(1.0, 2.0, 1.0);
    return inst;
  }
  throw std::runtime_error("could not draw a uniform-sphere instance with the requested top gap");
}

Vector RatingMatrix::item_means() const { return ratings.colwise().mean().transpose(); }

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

}  // namespace

RatingMatrix parse_rating_csv(std::istream& in, const std::vector<int>& item_ids,
                              const RatingCsvOptions& opts) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  const std::size_t skip = opts.first_column_is_user_id ? 1 : 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (opts.has_header && line_no == 1) continue;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() <= skip) {
      throw std::runtime_error("rating CSV line " + std::to_string(line_no) + ": no rating columns");
    }
    std::vector<double> r;
    r.reserve(cells.size() - skip);
    for (std::size_t c = skip; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      if (cell.empty()) {
        r.push_back(std::nan(""));
        continue;
      }
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size() || !std::isfinite(v)) {
        throw std::runtime_error("rating CSV line " + std::to_string(line_no) + ", column " +
                                 std::to_string(c + 1) + ": cannot parse '" + cell + "'");
      }
      r.push_back(std::abs(v - opts.missing_marker) < 1e-9 ? std::nan("") : v);
    }
    if (width == 0) width = r.size();
    if (r.size() != width) {
      throw std::runtime_error("rating CSV line " + std::to_string(line_no) + ": expected " +
                               std::to_string(width) + " rating columns, got " +
                               std::to_string(r.size()));
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw std::runtime_error("rating CSV has no data rows");

  std::vector<int> ids = item_ids;
  if (ids.empty()) {
    for (std::size_t c = 0; c < width; ++c) ids.push_back(static_cast<int>(c + 1));
  }
  for (int id : ids) {
    if (id < 1 || static_cast<std::size_t>(id) > width) {
      throw ContractError("item id " + std::to_string(id) + " outside 1.." + std::to_string(width));
    }
  }
  std::vector<std::size_t> keep;
  for (std::size_t u = 0; u < rows.size(); ++u) {
    bool complete = true;
    for (int id : ids) complete = complete && !std::isnan(rows[u][static_cast<std::size_t>(id - 1)]);
    if (complete) keep.push_back(u);
  }
  if (keep.empty()) throw std::runtime_error("complete-case filter left no users");
  RatingMatrix m;
  m.item_ids = ids;
  m.ratings.resize(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    for (std::size_t j = 0; j < ids.size(); ++j) {
      m.ratings(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
          rows[keep[k]][static_cast<std::size_t>(ids[j] - 1)];
    }
  }
  return m;
}

RatingMatrix load_rating_matrix(const std::string& path, const std::vector<int>& item_ids,
                                const RatingCsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open rating file " + path);
  return parse_rating_csv(in, item_ids, opts);
}

void write_rating_csv(std::ostream& out, const RatingMatrix& m) {
  char buf[32];
  for (Eigen::Index u = 0; u < m.ratings.rows(); ++u) {
    for (Eigen::Index i = 0; i < m.ratings.cols(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", m.ratings(u, i));
      out << (i ? "," : "") << buf;
    }
    out << '\n';
  }
}

std::size_t rating_oracle_best(const RatingMatrix& m) {
  const Vector means = m.item_means();
  Eigen::Index best = 0;
  means.maxCoeff(&best);
  for (Eigen::Index i = 0; i < means.size(); ++i) {
    if (i != best && means(i) == means(best)) {
      throw std::runtime_error("tie at the top of the item means");
    }
  }
  return static_cast<std::size_t>(best);
}

RatingMatrix make_surrogate_ratings(const std::vector<double>& item_means, std::size_t users,
                                    double user_sd, double noise_sd, std::uint64_t seed) {
  if (item_means.empty() || users == 0) throw ContractError("surrogate needs items and users");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  RatingMatrix m;
  m.ratings.resize(static_cast<Eigen::Index>(users), static_cast<Eigen::Index>(item_means.size()));
  for (std::size_t i = 0; i < item_means.size(); ++i) m.item_ids.push_back(static_cast<int>(i + 1));
  for (std::size_t u = 0; u < users; ++u) {
    const double bu = user_sd * g(rng);
    for (std::size_t i = 0; i < item_means.size(); ++i) {
      m.ratings(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(i)) =
          item_means[i] + bu + noise_sd * g(rng);
    }
  }
  return m;
}

RatingReplayEnv::RatingReplayEnv(RatingMatrix m, std::uint64_t seed, std::uint64_t session_length)
    : m_(std::move(m)), rng_(seed), session_length_(session_length) {
  if (m_.user_count() == 0 || m_.item_count() == 0) throw ContractError("empty rating matrix");
  if (session_length_ == 0) throw ContractError("session length must be >= 1");
}

double RatingReplayEnv::pull(std::size_t arm) {
  if (arm >= m_.item_count()) throw ContractError("arm " + std::to_string(arm) + " out of range");
  if (pulls_ % session_length_ == 0) {
    std::uniform_int_distribution<std::size_t> pick(0, m_.user_count() - 1);
    user_ = pick(rng_);
  }
  ++pulls_;
  return m_.ratings(static_cast<Eigen::Index>(user_), static_cast<Eigen::Index>(arm));
}

FeatureSet one_hot_features(std::size_t k) {
  if (k == 0) throw ContractError("one-hot features need k >= 1");
  return FeatureSet(Matrix::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)));
}

}  // namespace semibai
