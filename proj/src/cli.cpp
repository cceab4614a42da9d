#include "symdiv/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace symdiv {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << bytes;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fmt(double v, int prec = 4) {
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s << std::fixed << std::setprecision(prec) << v;
  return s.str();
}

std::string fmt_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// Maps exceptions to exit codes. Anything that is not an input problem is a
// runtime abort.
template <class F>
int guarded(std::ostream& err, F&& f) {
  try {
    return f();
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const TrainingAborted& e) {
    err << "aborted at epoch " << e.epoch << ": " << e.what() << "\n";
    return kExitAborted;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitAborted;
  }
}

GanConfig load_config(const std::string& path, std::string* bytes) {
  if (path.empty()) {
    GanConfig c;
    *bytes = dump(to_json(c));
    return c;
  }
  *bytes = read_file(path);
  return gan_config_from_json(parse_json(*bytes));
}

}  // namespace

int thread_cap() {
  if (const char* env = std::getenv("SYMDIV_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 1024L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Json verify_json(const VerifyOptions& opt, const VerifyReport& report) {
  Json j;
  j["seed"] = opt.seed;
  j["trials"] = opt.trials;
  Json fam = Json::array();
  for (const auto& f : opt.families) fam.push_back(f);
  j["families"] = fam;
  const Json r = to_json(report);
  j["passed"] = r["passed"];
  j["rows"] = r["rows"];
  return j;
}

int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opt.trials < 0) throw InputError("--trials must be nonnegative");
    const FamilySet known = all_families();
    for (const auto& f : opt.families) {
      if (!known.count(f)) throw InputError("unknown family '" + f + "'");
    }
    Rng rng(opt.seed);
    const VerifyReport rep = run_verification(rng, opt.trials, opt.families);
    out << std::left << std::setw(10) << "family" << std::setw(44) << "identity" << std::right
        << std::setw(7) << "cases" << std::setw(12) << "max err" << std::setw(12) << "tol"
        << "  result\n";
    for (const VerifyRow& r : rep.rows) {
      out << std::left << std::setw(10) << r.family << std::setw(44) << r.identity << std::right
          << std::setw(7) << r.cases << std::setw(12) << fmt_sci(r.max_discrepancy) << std::setw(12)
          << fmt_sci(r.tolerance) << "  " << (r.passed() ? "pass" : "FAIL") << "\n";
    }
    out << (rep.passed() ? "all identities hold\n" : "verification FAILED\n");
    if (!opt.json_path.empty()) write_file(opt.json_path, dump(verify_json(opt, rep)));
    return rep.passed() ? kExitOk : kExitVerifyFailed;
  });
}

int cmd_exact(const ExactOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExactInstance inst = instance_from_json(read_json_file(opt.instance_path));
    const std::string text = dump(solve_instance(inst));
    out << text;
    if (!opt.out_path.empty()) write_file(opt.out_path, text);
    return kExitOk;
  });
}

std::string scatter_svg(const SampleSet& samples, const TMixtureConfig& cfg,
                        const std::string& title) {
  constexpr double kLim = 40.0, kSize = 600.0, kPad = 30.0;
  constexpr int kMaxPoints = 3000;
  const double scale = (kSize - 2 * kPad) / (2 * kLim);
  auto px = [&](double x) { return kPad + (x + kLim) * scale; };
  auto py = [&](double y) { return kSize - kPad - (y + kLim) * scale; };
  const Eigen::MatrixXd coords = samples.data * cfg.basis();
  const int n = std::min<int>(kMaxPoints, static_cast<int>(coords.rows()));

  std::ostringstream s;
  s << std::fixed << std::setprecision(2);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
    << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << kSize - 2 * kPad
    << "\" height=\"" << kSize - 2 * kPad << "\" fill=\"none\" stroke=\"#888\"/>\n";
  s << "<line x1=\"" << px(0) << "\" y1=\"" << kPad << "\" x2=\"" << px(0) << "\" y2=\""
    << kSize - kPad << "\" stroke=\"#ddd\"/>\n";
  s << "<line x1=\"" << kPad << "\" y1=\"" << py(0) << "\" x2=\"" << kSize - kPad << "\" y2=\""
    << py(0) << "\" stroke=\"#ddd\"/>\n";
  int clipped = 0;
  s << "<g fill=\"#c0392b\" fill-opacity=\"0.35\">\n";
  for (int i = 0; i < n; ++i) {
    const double x = coords(i, 0), y = coords(i, 1);
    if (!(std::abs(x) <= kLim && std::abs(y) <= kLim)) {
      ++clipped;
      continue;
    }
    s << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"1.6\"/>\n";
  }
  s << "</g>\n";
  const double r50 = t_radius_quantile(cfg.dof, 0.5) * scale;
  const auto centers = cfg.centers();
  s << "<g fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\">\n";
  for (int k = 0; k < 4; ++k) {
    const double cx = px(centers(k, 0)), cy = py(centers(k, 1));
    s << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << r50
      << "\" stroke-dasharray=\"4 3\"/>\n";
    s << "<path d=\"M" << cx - 6 << ' ' << cy << "H" << cx + 6 << "M" << cx << ' ' << cy - 6 << "V"
      << cy + 6 << "\"/>\n";
  }
  s << "</g>\n";
  s << "<text x=\"" << kPad << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"12\">" << title
    << " (" << n - clipped << " of " << n << " points in view)</text>\n";
  s << "</svg>\n";
  return s.str();
}

ToyRun run_toy(const GanConfig& cfg, const std::string& config_bytes, const std::string& dir,
               int samples, const std::string& command, std::ostream* progress) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(dir);
  ToyRun run;
  run.config = cfg;
  TrainState st = make_train_state(cfg);
  auto record = [&] {
    st.history.push_back(evaluate(st));
    const EvalRecord& r = st.history.back();
    if (progress) {
      *progress << "epoch " << r.epoch << "  min_mode_freq " << fmt(r.modes.min_mode_freq, 3)
                << "  orth_median " << fmt(r.orth_median, 3) << "  inv_ed " << fmt_sci(r.invariance.ed)
                << " (null_hi " << fmt_sci(r.invariance.null_hi) << ")\n";
    }
  };
  try {
    record();
    while (st.epoch < cfg.epochs) {
      const long long next = std::min(cfg.epochs, (st.epoch / cfg.eval_interval + 1) * cfg.eval_interval);
      train_epochs(st, next - st.epoch);
      record();
    }
  } catch (const TrainingAborted& e) {
    run.aborted = true;
    run.message = e.what();
  }
  run.history = st.history;

  const fs::path out(dir);
  std::vector<std::string> outputs;
  Json metrics = metrics_json(st);
  if (run.aborted) metrics["aborted"] = run.message;
  write_file(out / "metrics.json", dump(metrics));
  outputs.push_back("metrics.json");
  if (!run.aborted) {
    Rng rng = seeded_stream(cfg.seed, 5);
    const SampleSet s = snapshot_samples(st, samples, rng);
    {
      std::ofstream f(out / "samples.csv", std::ios::binary);
      write_samples_csv(f, s, cfg.seed);
    }
    std::ostringstream title;
    title << to_string(cfg.generator) << " G, " << to_string(cfg.discriminator) << " D, "
          << to_string(cfg.loss.kind) << ", seed " << cfg.seed << ", epoch " << st.epoch;
    write_file(out / "scatter.svg", scatter_svg(s, cfg.data, title.str()));
    {
      std::ofstream f(out / "generator.ckpt", std::ios::binary);
      save_checkpoint(f, st.ema, cfg.seed);
    }
    {
      std::ofstream f(out / "discriminator.ckpt", std::ios::binary);
      save_checkpoint(f, st.discriminator->params(), cfg.seed);
    }
    for (const char* name : {"samples.csv", "scatter.svg", "generator.ckpt", "discriminator.ckpt"}) {
      outputs.push_back(name);
    }
  }
  Json manifest;
  manifest["command"] = command;
  manifest["config_hash"] = hex64(fnv1a(config_bytes));
  manifest["seed"] = cfg.seed;
  manifest["version"] = kVersion;
  manifest["outputs"] = outputs;
  manifest["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_file(out / "manifest.json", dump(manifest));
  return run;
}

int cmd_toy(const ToyOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opt.samples < 4) throw InputError("--samples must be at least 4");
    std::string bytes;
    const GanConfig cfg = load_config(opt.config_path, &bytes);
    const ToyRun run = run_toy(cfg, bytes, opt.out_dir, opt.samples, "toy", &out);
    if (run.aborted) {
      err << "aborted: " << run.message << "\n";
      return kExitAborted;
    }
    out << "wrote " << opt.out_dir << "\n";
    return kExitOk;
  });
}

std::vector<std::string> toy_variants() {
  return {"vanilla-vanilla", "vanilla-inv", "eqv-vanilla", "ieqv-inv",
          "ieqv-sym-inv",    "eqv-inv",     "eqv-inv-wgan"};
}

GanConfig apply_variant(GanConfig c, const std::string& variant) {
  std::vector<std::string> parts;
  std::stringstream ss(variant);
  for (std::string p; std::getline(ss, p, '-');) parts.push_back(p);
  size_t i = 0;
  auto next = [&]() -> std::string {
    if (i >= parts.size()) throw InputError("variant '" + variant + "': expected <G>-<D>[-loss]");
    return parts[i++];
  };
  try {
    c.generator = parse_generator_variant(next());
    c.sym_layer = false;
    if (i < parts.size() && parts[i] == "sym") {
      if (c.generator != GeneratorVariant::kIEqv) throw InputError("variant '" + variant + "': sym needs ieqv");
      c.sym_layer = true;
      ++i;
    }
    c.discriminator = parse_discriminator_variant(next());
  } catch (const InputError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw InputError("variant '" + variant + "': " + e.what());
  }
  if (i < parts.size()) {
    const std::string loss = next();
    if (loss == "wgan") {
      c.loss.kind = LossKind::kWganGp;
    } else if (loss == "falpha") {
      c.loss.kind = LossKind::kFAlpha;
    } else if (loss == "lip") {
      c.loss.kind = LossKind::kLipAlpha;
    } else {
      throw InputError("variant '" + variant + "': unknown loss '" + loss + "'");
    }
  }
  if (i != parts.size()) throw InputError("variant '" + variant + "': trailing parts");
  return c;
}

int cmd_toy_matrix(const ToyMatrixOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opt.seeds < 1) throw InputError("--seeds must be positive");
    std::vector<std::string> variants;
    for (const auto& v : opt.variants) {
      if (v == "all") {
        for (const auto& k : toy_variants()) variants.push_back(k);
      } else {
        variants.push_back(v);
      }
    }
    std::string bytes;
    GanConfig base = load_config(opt.config_path, &bytes);
    if (opt.epochs >= 0) base.epochs = opt.epochs;

    struct Job {
      std::string variant;
      GanConfig cfg;
      ToyRun run;
      std::string error;
    };
    std::vector<Job> jobs;
    for (const auto& v : variants) {
      for (int s = 0; s < opt.seeds; ++s) {
        GanConfig c = apply_variant(base, v);
        c.seed = static_cast<unsigned long long>(s);
        c.validate();
        jobs.push_back({v, c, {}, {}});
      }
    }

    std::atomic<size_t> next{0};
    std::mutex log_mu;
    auto worker = [&] {
      for (size_t k = next++; k < jobs.size(); k = next++) {
        Job& job = jobs[k];
        const std::string dir = (fs::path(opt.out_dir) / job.variant / ("seed" + std::to_string(job.cfg.seed))).string();
        try {
          job.run = run_toy(job.cfg, dump(to_json(job.cfg)), dir, opt.samples, "toy-matrix", nullptr);
        } catch (const std::exception& e) {
          job.error = e.what();
        }
        std::lock_guard<std::mutex> lock(log_mu);
        out << "finished " << job.variant << " seed " << job.cfg.seed
            << (job.run.aborted || !job.error.empty() ? " (aborted)" : "") << "\n";
        out.flush();
      }
    };
    const int threads = std::min<int>(thread_cap(), static_cast<int>(jobs.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    Json runs = Json::array();
    std::ostringstream csv;
    csv << "variant,seed,min_mode_freq,orth_median,invariance_ed,invariance_null_hi,aborted\n";
    out << std::left << std::setw(16) << "variant" << std::right << std::setw(6) << "seed"
        << std::setw(15) << "min_mode_freq" << std::setw(13) << "orth_median" << std::setw(12)
        << "inv_ed" << std::setw(12) << "null_hi" << "\n";
    bool any_abort = false;
    for (const Job& job : jobs) {
      const bool aborted = job.run.aborted || !job.error.empty();
      any_abort = any_abort || aborted;
      const EvalRecord last = job.run.history.empty() ? EvalRecord{} : job.run.history.back();
      bool within_all = !job.run.history.empty();
      for (const EvalRecord& r : job.run.history) within_all = within_all && r.invariance.within();
      runs.push_back({{"variant", job.variant},
                      {"seed", job.cfg.seed},
                      {"epoch", last.epoch},
                      {"min_mode_freq", last.modes.min_mode_freq},
                      {"orth_median", last.orth_median},
                      {"invariance_ed", last.invariance.ed},
                      {"invariance_null_hi", last.invariance.null_hi},
                      {"within_band_every_eval", within_all},
                      {"aborted", aborted}});
      csv << job.variant << ',' << job.cfg.seed << ',' << last.modes.min_mode_freq << ','
          << last.orth_median << ',' << last.invariance.ed << ',' << last.invariance.null_hi << ','
          << (aborted ? 1 : 0) << "\n";
      out << std::left << std::setw(16) << job.variant << std::right << std::setw(6) << job.cfg.seed
          << std::setw(15) << fmt(last.modes.min_mode_freq, 3) << std::setw(13)
          << fmt(last.orth_median, 3) << std::setw(12) << fmt_sci(last.invariance.ed)
          << std::setw(12) << fmt_sci(last.invariance.null_hi) << (aborted ? "  aborted" : "")
          << "\n";
    }
    fs::create_directories(opt.out_dir);
    Json summary;
    summary["base_config"] = to_json(base);
    summary["runs"] = runs;
    write_file(fs::path(opt.out_dir) / "summary.json", dump(summary));
    write_file(fs::path(opt.out_dir) / "summary.csv", csv.str());
    return any_abort ? kExitAborted : kExitOk;
  });
}

}  // namespace symdiv
