#include "symdiv/cli.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <sstream>

using namespace symdiv;

namespace {

FamilySet split_families(const std::string& list) {
  FamilySet out;
  std::stringstream ss(list);
  for (std::string f; std::getline(ss, f, ',');) {
    if (!f.empty()) out.insert(f);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetry-preserving divergences: exact checks and toy GAN training"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  VerifyOptions vopt;
  std::string families;
  auto* verify = app.add_subcommand("verify", "Randomized checks of the symmetrization identities");
  verify->add_option("--trials", vopt.trials, "Trials per family")->capture_default_str();
  verify->add_option("--seed", vopt.seed, "Random seed")->capture_default_str();
  verify->add_option("--families", families,
                     "Comma-separated subset of f,tv,w1,mmd,sinkhorn,lemma1,lambda,kernel,infconv");
  verify->add_option("--json", vopt.json_path, "Write the report as JSON to this path");

  ExactOptions eopt;
  auto* exact = app.add_subcommand("exact", "Evaluate one divergence on a finite instance");
  exact->add_option("--instance", eopt.instance_path, "Instance JSON file")->required();
  exact->add_option("--out", eopt.out_path, "Also write the result to this path");

  ToyOptions topt;
  auto* toy = app.add_subcommand("toy", "Train one GAN on the planar t-mixture");
  toy->add_option("--config", topt.config_path, "Training config JSON (defaults when omitted)");
  toy->add_option("--out", topt.out_dir, "Output directory")->capture_default_str();
  toy->add_option("--samples", topt.samples, "Samples written after training")->capture_default_str();

  ToyMatrixOptions mopt;
  std::string variants = "all";
  auto* matrix = app.add_subcommand("toy-matrix", "Train every variant for several seeds");
  matrix->add_option("--seeds", mopt.seeds, "Seeds 0..N-1")->capture_default_str();
  matrix->add_option("--variants", variants, "Comma-separated variants, or all")->capture_default_str();
  matrix->add_option("--config", mopt.config_path, "Base training config JSON");
  matrix->add_option("--epochs", mopt.epochs, "Override the epoch count");
  matrix->add_option("--out", mopt.out_dir, "Output directory")->capture_default_str();
  matrix->add_option("--samples", mopt.samples, "Samples written per run")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  if (*verify) {
    if (!families.empty()) vopt.families = split_families(families);
    return cmd_verify(vopt, std::cout, std::cerr);
  }
  if (*exact) return cmd_exact(eopt, std::cout, std::cerr);
  if (*toy) return cmd_toy(topt, std::cout, std::cerr);
  mopt.variants.clear();
  std::stringstream ss(variants);
  for (std::string v; std::getline(ss, v, ',');) {
    if (!v.empty()) mopt.variants.push_back(v);
  }
  return cmd_toy_matrix(mopt, std::cout, std::cerr);
}
