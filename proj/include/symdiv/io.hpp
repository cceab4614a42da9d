#pragma once

// JSON and CSV encodings: group descriptors, measures, exact instances,
// training configs, metric histories and verification reports.

#include "symdiv/exactdiv.hpp"
#include "symdiv/gan.hpp"
#include "symdiv/verify.hpp"

#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace symdiv {

/// Insertion-ordered, so dumps are byte-stable.
using Json = nlohmann::ordered_json;

/// Malformed or inconsistent input documents.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Json parse_json(const std::string& text);
Json read_json_file(const std::string& path);
/// Two-space indent with a trailing newline. NaN and infinities become null.
std::string dump(const Json& j);

/// {"kind":"cyclic"|"dihedral","n":int}
FiniteGroup group_from_json(const Json& j);
/// Adds "ambient_dim" (default 2) and an optional "plane":[[u],[v]].
LinearAction action_from_json(const Json& j);

/// {"weights":[...]} with optional "points"; a bare array is read as weights.
DiscreteMeasure measure_from_json(const Json& j);
Json to_json(const DiscreteMeasure& m);

/// {"f":"kl"} or {"f":"alpha","alpha":a}; other keys are ignored.
FDivGenerator generator_from_json(const Json& j);
Json to_json(const FDivGenerator& g);

struct ExactInstance {
  DiscreteMeasure q, p;
  std::optional<MetricSpace> metric;
  std::optional<Eigen::MatrixXd> points;
  std::optional<PermutationAction> action;
  Json divergence;
};

/// {"Q","P","metric","points","group","divergence":{"kind",...}}. The group
/// acts on states through "perms" (one row per element) or, with "points",
/// through its planar action on them. Without "metric", points give the
/// Euclidean one.
ExactInstance instance_from_json(const Json& j);

/// {"value","gap","witness"}. Divergence kinds and parameters:
///   f {f, alpha}; tv; w1 {lipschitz}; fgamma {f, alpha, lipschitz};
///   sinkhorn {eps, cost: "metric"|"squared"}; mmd {bandwidth | kernel}.
/// "invariant": true evaluates on the symmetrized pair, which is the
/// divergence over the invariant test-function class.
Json solve_instance(const ExactInstance& inst);

/// Missing keys keep their defaults; unknown keys are errors.
GanConfig gan_config_from_json(const Json& j);
Json to_json(const GanConfig& cfg);

Json to_json(const EvalRecord& r);
/// Final-evaluation summary plus per-evaluation history arrays and the config.
Json metrics_json(const TrainState& st);

Json to_json(const VerifyReport& r);

/// "# seed=..., source=..." then one comma-separated row per sample.
void write_samples_csv(std::ostream& os, const SampleSet& s, unsigned long long seed);
SampleSet read_samples_csv(std::istream& is);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace symdiv
