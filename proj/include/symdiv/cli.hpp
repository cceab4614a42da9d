#pragma once

// Command implementations behind the symdiv executable. Each returns a
// process exit code and reports problems on `err`.

#include "symdiv/io.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace symdiv {

enum ExitCode : int { kExitOk = 0, kExitVerifyFailed = 1, kExitInputError = 2, kExitAborted = 3 };

inline constexpr const char* kVersion = "0.1.0";

struct VerifyOptions {
  int trials = 100;
  unsigned long long seed = 0;
  FamilySet families = all_families();
  std::string json_path;  ///< empty: no JSON file
};

/// Pass/fail table on `out`; exit 1 when any identity fails.
int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err);
/// The JSON document cmd_verify writes.
Json verify_json(const VerifyOptions& opt, const VerifyReport& report);

struct ExactOptions {
  std::string instance_path;
  std::string out_path;  ///< empty: stdout only
};

int cmd_exact(const ExactOptions& opt, std::ostream& out, std::ostream& err);

struct ToyOptions {
  std::string config_path;  ///< empty: defaults
  std::string out_dir = "toy-out";
  int samples = 3000;  ///< written to samples.csv and drawn in scatter.svg
};

/// Trains one configuration and writes metrics.json, samples.csv,
/// scatter.svg, generator.ckpt, discriminator.ckpt and manifest.json.
int cmd_toy(const ToyOptions& opt, std::ostream& out, std::ostream& err);

struct ToyMatrixOptions {
  int seeds = 3;
  std::vector<std::string> variants{"all"};
  std::string config_path;  ///< base configuration; empty: defaults
  long long epochs = -1;    ///< overrides the base when >= 0
  std::string out_dir = "toy-matrix";
  int samples = 3000;
};

/// Every variant for seeds 0..seeds-1, in parallel up to thread_cap(), with
/// summary.json and summary.csv in out_dir.
int cmd_toy_matrix(const ToyMatrixOptions& opt, std::ostream& out, std::ostream& err);

/// Generator/discriminator/loss settings named as "<G>-<D>[-wgan]", e.g.
/// "eqv-inv", "ieqv-sym-inv", "eqv-inv-wgan".
std::vector<std::string> toy_variants();
GanConfig apply_variant(GanConfig base, const std::string& variant);

/// Result of one finished (or aborted) training run written to a directory.
struct ToyRun {
  GanConfig config;
  std::vector<EvalRecord> history;
  bool aborted = false;
  std::string message;
};

/// Trains `cfg` and writes the run directory. `config_bytes` is hashed into
/// the manifest. Never throws TrainingAborted; the result says so instead.
ToyRun run_toy(const GanConfig& cfg, const std::string& config_bytes, const std::string& dir,
               int samples, const std::string& command, std::ostream* progress);

/// Scatter plot of the plane projection, at most 3000 points, clipped to
/// [-40, 40]^2, with the mixture centers and their 50% regions marked.
std::string scatter_svg(const SampleSet& samples, const TMixtureConfig& cfg,
                        const std::string& title);

/// SYMDIV_THREADS if set and positive, else the hardware concurrency.
int thread_cap();

}  // namespace symdiv
