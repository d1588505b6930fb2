#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "semibai/design_solvers.hpp"
#include "semibai/envs.hpp"
#include "semibai/spbai.hpp"

namespace semibai {

using Json = nlohmann::json;

/// Shortest round-trip decimal form ("%.17g"); "inf" for infinities.
std::string format_double(double x);

/// CSV with header f0,...,f{d-1}, one vector per row.
FeatureSet read_feature_csv(std::istream& in);
FeatureSet load_feature_csv(const std::string& path);
void write_feature_csv(std::ostream& out, const FeatureSet& f);

/// {"dim": d, "vectors": [[...], ...]}; a bare array of rows is also accepted on input.
Json to_json(const FeatureSet& f);
FeatureSet feature_set_from_json(const Json& j);

Json to_json(const ShiftSpec& s);
ShiftSpec shift_from_json(const Json& j);

/// {"source", "targets", "theta_star", "shift", "noise_std", "noise"}; targets default to source.
Json to_json(const Instance& inst);
Instance instance_from_json(const Json& j);
Instance load_instance(const std::string& path);

Json to_json(const Policy& p);
Json to_json(const DesignSolution& s);
Json to_json(const PhaseRecord& r);
/// Result line of a run log (phases are logged separately).
Json result_json(const RunResult& r);

/// Reads a whole file into a JSON document; throws std::runtime_error with the path on failure.
Json load_json_file(const std::string& path);

}  // namespace semibai
