// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// fails. `acceptance 1,7` runs a subset.

#include "support/gradcheck.hpp"
#include "symdiv/cli.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

using namespace symdiv;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Worst row relative to its tolerance, and the first failing row.
Outcome from_report(const VerifyReport& rep) {
  Outcome o;
  double worst = 0.0;
  std::string worst_row;
  for (const VerifyRow& r : rep.rows) {
    if (!r.passed() && o.pass) {
      o.pass = false;
      o.detail = "failed: " + r.family + " / " + r.identity + " max " + sci(r.max_discrepancy) +
                 " > " + sci(r.tolerance);
    }
    const double ratio = r.tolerance > 0 ? r.max_discrepancy / r.tolerance : r.max_discrepancy;
    if (ratio >= worst) {
      worst = ratio;
      worst_row = r.family + " / " + r.identity + " " + sci(r.max_discrepancy) + " (tol " +
                  sci(r.tolerance) + ")";
    }
  }
  if (rep.rows.empty()) {
    o.pass = false;
    o.detail = "no checks ran";
  }
  if (o.pass) o.detail = std::to_string(rep.rows.size()) + " identities, tightest: " + worst_row;
  return o;
}

Outcome with_runtime(Outcome o, double secs, double limit) {
  char buf[64];
  std::snprintf(buf, sizeof buf, ", %.1f s (limit %.0f s)", secs, limit);
  o.detail += buf;
  if (secs >= limit) o.pass = false;
  return o;
}

const FamilySet kFamilies{"f", "tv", "w1", "mmd", "sinkhorn"};

Outcome criterion1() {
  Rng rng(101);
  const auto t = Clock::now();
  const VerifyReport rep = verify_lemma1(rng, 200);
  return with_runtime(from_report(rep), seconds_since(t), 5.0);
}

Outcome criterion2() {
  Rng rng(102);
  const auto t = Clock::now();
  const VerifyReport rep = verify_theorem1(rng, 100, kFamilies);
  return with_runtime(from_report(rep), seconds_since(t), 120.0);
}

Outcome criterion3() {
  Rng rng(103);
  return from_report(verify_mode_collapse_identity(rng, 100, kFamilies));
}

Outcome criterion4() {
  Rng rng(104);
  // 100 class-restriction instances and 200 data-processing kernels.
  return from_report(verify_kernel_theorem(rng, 100));
}

Outcome criterion5() {
  Rng rng(105);
  const auto t = Clock::now();
  const VerifyReport rep = verify_infconv(rng, 50);
  return with_runtime(from_report(rep), seconds_since(t), 300.0);
}

Outcome criterion6() {
  Rng rng(106);
  return from_report(verify_lambda(rng, 100));
}

Outcome criterion7() {
  Rng rng(107);
  double worst_first = 0.0, worst_nested = 0.0;
  Outcome o;
  for (int t = 0; t < 100; ++t) {
    auto c = gradcheck::random_network(rng, t % 5);
    const int d = c.net->input_dim(), out = c.net->output_dim();
    const auto first = gradcheck::check_away_from_kinks(*c.net, rng, [&](Rng& r) {
      return gradcheck::OutputLoss{gradcheck::normal_matrix(3, d, r), gradcheck::normal_matrix(3, out, r),
                                   r()};
    });
    const auto nested = gradcheck::check_away_from_kinks(*c.net, rng, [&](Rng& r) {
      return gradcheck::PenaltyLoss{gradcheck::normal_matrix(3, d, r), r()};
    });
    if (!first || !nested) {
      o.pass = false;
      o.detail = "no kink-free base point for " + c.description;
      return o;
    }
    worst_first = std::max(worst_first, first->rel_error);
    worst_nested = std::max(worst_nested, nested->rel_error);
  }
  o.pass = worst_first <= 1e-4 && worst_nested <= 1e-3;
  o.detail = "100 networks, first-order max rel " + sci(worst_first) + " (tol 1e-4), nested max rel " +
             sci(worst_nested) + " (tol 1e-3)";
  return o;
}

Outcome criterion8() {
  Rng rng(108);
  double eqv = 0.0, inv = 0.0, ieqv = INFINITY;
  for (const bool dihedral : {false, true}) {
    const FiniteGroup group = dihedral ? make_dihedral(4) : make_cyclic(4);
    auto az = std::make_shared<LinearAction>(planar_rotation_action(group, 10));
    auto ax = std::make_shared<LinearAction>(planar_rotation_action(group, 12));
    const Network g = build_generator(GeneratorVariant::kEqv, az, ax, {}, rng);
    const Network d = build_discriminator(DiscriminatorVariant::kInv, ax, {}, rng);
    const Network bad = build_generator(GeneratorVariant::kIEqv, az, ax, {}, rng);
    const Eigen::MatrixXd z = gradcheck::normal_matrix(100, 10, rng);
    const Eigen::MatrixXd x = 10.0 * gradcheck::normal_matrix(100, 12, rng);
    eqv = std::max(eqv, equivariance_deviation(g, *az, *ax, z));
    inv = std::max(inv, invariance_deviation(d, *ax, x));
    ieqv = std::min(ieqv, equivariance_deviation(bad, *az, *ax, z));
  }
  Outcome o;
  o.pass = eqv <= 1e-4 && inv <= 1e-4 && ieqv > 0.1;
  o.detail = "C4 and D4, 100 inputs: eqv G " + sci(eqv) + ", inv D " + sci(inv) +
             " (tol 1e-4), ieqv G " + sci(ieqv) + " (must exceed 0.1)";
  return o;
}

struct ToyResult {
  std::string name;
  unsigned long long seed = 0;
  std::vector<EvalRecord> history;
  double seconds = 0.0;
  std::string error;
};

Outcome criterion9() {
  struct Spec {
    std::string name;
    GeneratorVariant g;
    LossKind loss;
  };
  const std::vector<Spec> specs{{"eqv-inv", GeneratorVariant::kEqv, LossKind::kLipAlpha},
                                {"vanilla-inv", GeneratorVariant::kVanilla, LossKind::kLipAlpha},
                                {"ieqv-inv", GeneratorVariant::kIEqv, LossKind::kLipAlpha},
                                {"eqv-inv-wgan", GeneratorVariant::kEqv, LossKind::kWganGp}};
  std::vector<ToyResult> runs;
  std::vector<GanConfig> configs;
  for (const Spec& s : specs) {
    for (unsigned long long seed = 0; seed < 3; ++seed) {
      GanConfig c;
      c.generator = s.g;
      c.discriminator = DiscriminatorVariant::kInv;
      c.loss.kind = s.loss;
      c.loss.alpha = 2.0;
      c.loss.lambda = 10.0;
      c.lr_g = 1e-4;
      c.lr_d = 4e-4;
      c.d_steps = 2;
      c.n_train = 200;
      c.epochs = 10000;
      c.seed = seed;
      configs.push_back(c);
      runs.push_back({s.name, seed, {}, 0.0, {}});
    }
  }
  std::atomic<size_t> next{0};
  std::mutex mu;
  auto worker = [&] {
    for (size_t k = next++; k < runs.size(); k = next++) {
      const auto t = Clock::now();
      try {
        runs[k].history = train(configs[k]).history;
      } catch (const TrainingAborted& e) {
        runs[k].history = e.history;
        runs[k].error = e.what();
      } catch (const std::exception& e) {
        runs[k].error = e.what();
      }
      runs[k].seconds = seconds_since(t);
      std::lock_guard<std::mutex> lock(mu);
      const EvalRecord last = runs[k].history.empty() ? EvalRecord{} : runs[k].history.back();
      std::cout << "  toy " << runs[k].name << " seed " << runs[k].seed << ": epoch " << last.epoch
                << " min_mode_freq " << last.modes.min_mode_freq << " orth_median " << last.orth_median
                << " inv_ed " << sci(last.invariance.ed) << " null_hi " << sci(last.invariance.null_hi)
                << ", " << static_cast<int>(runs[k].seconds) << " s"
                << (runs[k].error.empty() ? "" : " ABORTED: " + runs[k].error) << std::endl;
    }
  };
  const int threads = std::min<int>(thread_cap(), static_cast<int>(runs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  auto of = [&](const std::string& name) {
    std::vector<const ToyResult*> out;
    for (const auto& r : runs) {
      if (r.name == name) out.push_back(&r);
    }
    return out;
  };
  auto finished = [](const ToyResult* r) {
    return r->error.empty() && !r->history.empty() && r->history.back().epoch == 10000;
  };
  auto count = [&](const std::string& name, auto pred) {
    int n = 0;
    for (const ToyResult* r : of(name)) n += (finished(r) && pred(*r)) ? 1 : 0;
    return n;
  };
  auto min_freq = [](const ToyResult& r) { return r.history.back().modes.min_mode_freq; };

  const int a = count("eqv-inv", [&](const ToyResult& r) { return min_freq(r) >= 0.15; });
  const int b_van = count("vanilla-inv", [&](const ToyResult& r) { return min_freq(r) <= 0.05; });
  const int b_ieqv = count("ieqv-inv", [&](const ToyResult& r) { return min_freq(r) <= 0.05; });
  auto always_within = [](const ToyResult& r) {
    for (const EvalRecord& e : r.history) {
      if (!e.invariance.within()) return false;
    }
    return true;
  };
  const int c_eqv = count("eqv-inv", always_within) + count("eqv-inv-wgan", always_within);
  const int c_ieqv = count("ieqv-inv", [](const ToyResult& r) { return !r.history.front().invariance.within(); });
  int d = 0;
  for (unsigned long long seed = 0; seed < 3; ++seed) {
    const ToyResult *w = nullptr, *l = nullptr;
    for (const auto& r : runs) {
      if (r.seed != seed) continue;
      if (r.name == "eqv-inv-wgan") w = &r;
      if (r.name == "eqv-inv") l = &r;
    }
    if (finished(w) && finished(l) && w->history.back().orth_median >= 2.0 * l->history.back().orth_median) ++d;
  }
  double slowest = 0.0;
  for (const auto& r : runs) slowest = std::max(slowest, r.seconds);

  Outcome o;
  const bool pa = a >= 2, pb = b_van >= 2 && b_ieqv >= 2, pc = c_eqv == 6 && c_ieqv == 3, pd = d >= 2;
  const bool ptime = slowest <= 1800.0;
  o.pass = pa && pb && pc && pd && ptime;
  std::ostringstream s;
  s << "(a) eqv-inv min_mode_freq>=0.15 in " << a << "/3 " << (pa ? "ok" : "FAIL")
    << "; (b) <=0.05 vanilla-inv " << b_van << "/3, ieqv-inv " << b_ieqv << "/3 " << (pb ? "ok" : "FAIL")
    << "; (c) eqv within band at every eval " << c_eqv << "/6, ieqv outside at init " << c_ieqv << "/3 "
    << (pc ? "ok" : "FAIL") << "; (d) wgan orth median >= 2x lip " << d << "/3 " << (pd ? "ok" : "FAIL")
    << "; slowest run " << static_cast<int>(slowest) << " s (limit 1800) " << (ptime ? "ok" : "FAIL");
  o.detail = s.str();
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion10() {
  const fs::path dir = fs::temp_directory_path() / "symdiv-acceptance-determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ostringstream sink;
  Outcome o;
  VerifyOptions v;
  v.trials = 5;
  v.seed = 1234;
  int codes = 0;
  for (const char* name : {"a.json", "b.json"}) {
    v.json_path = (dir / name).string();
    codes |= cmd_verify(v, sink, sink);
  }
  const bool verify_same = slurp(dir / "a.json") == slurp(dir / "b.json");

  std::ofstream(dir / "cfg.json")
      << R"({"epochs":3,"eval_interval":1,"eval_samples":200,"seed":77,"widths":{"hidden":16,"hidden_layers":2}})";
  for (const char* out : {"toy_a", "toy_b"}) {
    codes |= cmd_toy({(dir / "cfg.json").string(), (dir / out).string(), 500}, sink, sink);
  }
  bool toy_same = true;
  for (const char* f : {"metrics.json", "samples.csv"}) {
    toy_same = toy_same && slurp(dir / "toy_a" / f) == slurp(dir / "toy_b" / f) &&
               !slurp(dir / "toy_a" / f).empty();
  }
  o.pass = codes == 0 && verify_same && toy_same;
  o.detail = std::string("verify JSON ") + (verify_same ? "identical" : "DIFFERS") + ", toy metrics/samples " +
             (toy_same ? "identical" : "DIFFER") + (codes ? ", nonzero exit code" : "");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  if (argc > 1) {
    std::stringstream ss(argv[1]);
    for (std::string t; std::getline(ss, t, ',');) only.insert(std::stoi(t));
  }
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"symmetrization algebra", criterion1},
      {"invariant pairs: full = invariant-class divergence", criterion2},
      {"mode-collapse identity and degeneracy witness", criterion3},
      {"coarse-graining kernels and data processing", criterion4},
      {"(f, Gamma) primal/dual, sandwich, invariant optimizer", criterion5},
      {"Lambda identities", criterion6},
      {"autodiff gradient checks", criterion7},
      {"exact network symmetry", criterion8},
      {"toy reproduction", criterion9},
      {"determinism", criterion10}};
  bool all = true;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first
              << ": " << o.detail << std::endl;
  }
  return all ? 0 : 1;
}
