#include "symdiv/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace symdiv {

namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const char* what) {
  if (!j.is_object()) throw InputError(std::string(what) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw InputError(std::string(what) + ": unknown key '" + key + "'");
  }
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) throw InputError(std::string(what) + ": expected a number");
  return j.get<double>();
}

long long integer(const Json& j, const char* what) {
  if (!j.is_number_integer()) throw InputError(std::string(what) + ": expected an integer");
  return j.get<long long>();
}

bool boolean(const Json& j, const char* what) {
  if (!j.is_boolean()) throw InputError(std::string(what) + ": expected a boolean");
  return j.get<bool>();
}

std::string text(const Json& j, const char* what) {
  if (!j.is_string()) throw InputError(std::string(what) + ": expected a string");
  return j.get<std::string>();
}

Eigen::VectorXd vector_of(const Json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + ": expected an array");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = number(j[i], what);
  return v;
}

Eigen::MatrixXd matrix_of(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw InputError(std::string(what) + ": expected a nonempty array of rows");
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  Eigen::MatrixXd m(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw InputError(std::string(what) + ": rows must be arrays of equal length");
    }
    for (size_t c = 0; c < cols; ++c) m(r, c) = number(j[r][c], what);
  }
  return m;
}

Json array_of(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json rows_of(const Eigen::MatrixXd& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(array_of(m.row(r).transpose()));
  return a;
}

// Wraps library validation errors so the CLI can classify them as input errors.
template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const InputError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Json parse_json(const std::string& s) {
  try {
    return Json::parse(s);
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str());
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

FiniteGroup group_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("n")) {
    throw InputError("group: needs \"kind\" and \"n\"");
  }
  const std::string kind = text(j["kind"], "group.kind");
  const long long n = integer(j["n"], "group.n");
  if (n < 1 || n > 1024) throw InputError("group.n: out of range");
  if (kind == "cyclic") return make_cyclic(static_cast<int>(n));
  if (kind == "dihedral") return make_dihedral(static_cast<int>(n));
  throw InputError("group.kind: expected \"cyclic\" or \"dihedral\"");
}

LinearAction action_from_json(const Json& j) {
  check_keys(j, {"kind", "n", "ambient_dim", "plane", "perms"}, "group");
  const FiniteGroup group = group_from_json(j);
  const long long dim = j.contains("ambient_dim") ? integer(j["ambient_dim"], "group.ambient_dim") : 2;
  if (dim < 2) throw InputError("group.ambient_dim: must be at least 2");
  if (!j.contains("plane")) return planar_rotation_action(group, static_cast<int>(dim));
  const Eigen::MatrixXd plane = matrix_of(j["plane"], "group.plane");
  if (plane.rows() != 2 || plane.cols() != dim) {
    throw InputError("group.plane: expected two vectors of length ambient_dim");
  }
  return guarded("group.plane", [&] {
    return planar_rotation_action(group, static_cast<int>(dim), plane.row(0).transpose(),
                                  plane.row(1).transpose());
  });
}

DiscreteMeasure measure_from_json(const Json& j) {
  if (j.is_array()) return guarded("measure", [&] { return DiscreteMeasure(vector_of(j, "measure")); });
  check_keys(j, {"weights", "points"}, "measure");
  if (!j.contains("weights")) throw InputError("measure: needs \"weights\"");
  const Eigen::VectorXd w = vector_of(j["weights"], "measure.weights");
  std::optional<Eigen::MatrixXd> pts;
  if (j.contains("points")) pts = matrix_of(j["points"], "measure.points");
  return guarded("measure", [&] { return DiscreteMeasure(w, pts); });
}

Json to_json(const DiscreteMeasure& m) {
  Json j;
  j["weights"] = array_of(m.weights());
  if (m.points()) j["points"] = rows_of(*m.points());
  return j;
}

FDivGenerator generator_from_json(const Json& j) {
  const std::string f = j.contains("f") ? text(j["f"], "f") : "kl";
  if (f == "kl") return FDivGenerator::kl();
  if (f == "alpha") {
    if (!j.contains("alpha")) throw InputError("generator: \"alpha\" requires an \"alpha\" value");
    const double a = number(j["alpha"], "alpha");
    return guarded("generator", [&] { return FDivGenerator::alpha(a); });
  }
  throw InputError("generator: \"f\" must be \"kl\" or \"alpha\"");
}

Json to_json(const FDivGenerator& g) {
  Json j;
  if (g.kind() == FDivGenerator::Kind::kKL) {
    j["f"] = "kl";
  } else {
    j["f"] = "alpha";
    j["alpha"] = g.alpha_value();
  }
  return j;
}

ExactInstance instance_from_json(const Json& j) {
  check_keys(j, {"Q", "P", "metric", "points", "group", "divergence"}, "instance");
  for (const char* k : {"Q", "P", "divergence"}) {
    if (!j.contains(k)) throw InputError(std::string("instance: missing \"") + k + "\"");
  }
  ExactInstance inst{measure_from_json(j["Q"]), measure_from_json(j["P"]), std::nullopt,
                     std::nullopt, std::nullopt, j["divergence"]};
  const int n = inst.q.size();
  if (inst.p.size() != n) throw InputError("instance: Q and P have different sizes");
  if (j.contains("points")) {
    inst.points = matrix_of(j["points"], "points");
    if (inst.points->rows() != n) throw InputError("points: one row per state required");
  }
  if (j.contains("metric")) {
    const Eigen::MatrixXd d = matrix_of(j["metric"], "metric");
    if (d.rows() != n || d.cols() != n) throw InputError("metric: must be |X| x |X|");
    inst.metric = guarded("metric", [&] { return MetricSpace(d); });
  } else if (inst.points) {
    inst.metric = MetricSpace::euclidean(*inst.points);
  }
  if (j.contains("group")) {
    const Json& g = j["group"];
    if (g.is_object() && g.contains("perms")) {
      const FiniteGroup group = group_from_json(g);
      const Json& pj = g["perms"];
      if (!pj.is_array()) throw InputError("group.perms: expected an array");
      std::vector<std::vector<int>> perms;
      for (const auto& row : pj) {
        const Eigen::VectorXd v = vector_of(row, "group.perms");
        std::vector<int> p(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) p[i] = static_cast<int>(v(i));
        perms.push_back(std::move(p));
      }
      inst.action = guarded("group.perms", [&] { return PermutationAction(group, perms); });
    } else {
      if (!inst.points) throw InputError("group: needs \"perms\" or instance \"points\"");
      Json desc = g;
      if (!desc.contains("ambient_dim")) desc["ambient_dim"] = inst.points->cols();
      const LinearAction lin = action_from_json(desc);
      if (lin.dim() != inst.points->cols()) throw InputError("group: ambient_dim differs from points");
      std::vector<Eigen::VectorXd> pts;
      for (int i = 0; i < n; ++i) pts.push_back(inst.points->row(i).transpose());
      inst.action = guarded("group", [&] { return permutation_from_linear(lin, pts); });
    }
    if (inst.action->state_count() != n) throw InputError("group: acts on the wrong number of states");
    if (inst.metric && !inst.metric->is_isometric(*inst.action)) {
      throw InputError("group: the action is not an isometry of the metric");
    }
  }
  if (!inst.divergence.is_object() || !inst.divergence.contains("kind")) {
    throw InputError("divergence: needs \"kind\"");
  }
  return inst;
}

Json solve_instance(const ExactInstance& inst) {
  const Json& d = inst.divergence;
  const std::string kind = text(d["kind"], "divergence.kind");
  DiscreteMeasure q = inst.q, p = inst.p;
  const bool invariant = d.contains("invariant") && boolean(d["invariant"], "divergence.invariant");
  if (invariant) {
    if (!inst.action) throw InputError("divergence.invariant: needs a group");
    q = symmetrize_measure(q, *inst.action);
    p = symmetrize_measure(p, *inst.action);
  }
  auto need_metric = [&]() -> const MetricSpace& {
    if (!inst.metric) throw InputError("divergence." + kind + ": needs \"metric\" or \"points\"");
    return *inst.metric;
  };
  auto lipschitz = [&] {
    const double l = d.contains("lipschitz") ? number(d["lipschitz"], "lipschitz") : 1.0;
    if (!(l > 0.0)) throw InputError("lipschitz: must be positive");
    return l;
  };

  DivergenceReport r;
  if (kind == "f") {
    check_keys(d, {"kind", "invariant", "f", "alpha"}, "divergence");
    r = f_divergence(q, p, generator_from_json(d));
  } else if (kind == "tv") {
    check_keys(d, {"kind", "invariant"}, "divergence");
    r = tv_ipm(q, p);
  } else if (kind == "w1") {
    check_keys(d, {"kind", "invariant", "lipschitz"}, "divergence");
    r = wasserstein1(q, p, need_metric(), lipschitz());
  } else if (kind == "fgamma") {
    check_keys(d, {"kind", "invariant", "f", "alpha", "lipschitz"}, "divergence");
    const PermutationAction* sym = inst.action ? &*inst.action : nullptr;
    r = f_gamma_divergence(q, p, generator_from_json(d), need_metric(), lipschitz(), {}, sym);
  } else if (kind == "sinkhorn") {
    check_keys(d, {"kind", "invariant", "eps", "cost"}, "divergence");
    if (!d.contains("eps")) throw InputError("divergence.sinkhorn: needs \"eps\"");
    const double eps = number(d["eps"], "eps");
    if (!(eps > 0.0)) throw InputError("eps: must be positive");
    const std::string cost = d.contains("cost") ? text(d["cost"], "cost") : "metric";
    Eigen::MatrixXd c = need_metric().distances();
    if (cost == "squared") {
      c = c.array().square();
    } else if (cost != "metric") {
      throw InputError("cost: expected \"metric\" or \"squared\"");
    }
    r = sinkhorn_divergence(q, p, c, eps);
  } else if (kind == "mmd") {
    check_keys(d, {"kind", "invariant", "bandwidth", "kernel"}, "divergence");
    Eigen::MatrixXd k;
    if (d.contains("kernel")) {
      k = matrix_of(d["kernel"], "kernel");
      if (k.rows() != q.size() || k.cols() != q.size()) throw InputError("kernel: must be |X| x |X|");
    } else {
      if (!inst.points || !d.contains("bandwidth")) {
        throw InputError("divergence.mmd: needs \"kernel\", or \"bandwidth\" with points");
      }
      const double h = number(d["bandwidth"], "bandwidth");
      if (!(h > 0.0)) throw InputError("bandwidth: must be positive");
      k = gaussian_kernel(*inst.points, h);
    }
    if (!is_psd(k)) throw InputError("kernel: not positive semidefinite");
    r.value = mmd(q, p, k);
    // Witness function of the maximizing unit-norm element, unnormalized.
    r.witness = k * (q.weights() - p.weights());
  } else {
    throw InputError("divergence.kind: unknown '" + kind + "'");
  }
  Json out;
  out["value"] = r.value;
  out["gap"] = r.gap;
  out["witness"] = array_of(r.witness);
  return out;
}

GanConfig gan_config_from_json(const Json& j) {
  check_keys(j,
             {"generator", "discriminator", "sym_layer", "loss", "lr_g", "lr_d", "d_steps", "batch",
              "epochs", "seed", "data", "n_train", "noise_dim", "widths", "ema", "eval_interval",
              "eval_samples"},
             "config");
  GanConfig c;
  try {
    if (j.contains("generator")) c.generator = parse_generator_variant(text(j["generator"], "generator"));
    if (j.contains("discriminator")) {
      c.discriminator = parse_discriminator_variant(text(j["discriminator"], "discriminator"));
    }
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  if (j.contains("sym_layer")) c.sym_layer = boolean(j["sym_layer"], "sym_layer");
  if (j.contains("loss")) {
    const Json& l = j["loss"];
    check_keys(l, {"kind", "alpha", "kl", "lambda"}, "loss");
    if (l.contains("kind")) {
      c.loss.kind = guarded("loss.kind", [&] { return parse_loss_kind(text(l["kind"], "loss.kind")); });
    }
    if (l.contains("alpha")) c.loss.alpha = number(l["alpha"], "loss.alpha");
    if (l.contains("kl")) c.loss.kl = boolean(l["kl"], "loss.kl");
    if (l.contains("lambda")) c.loss.lambda = number(l["lambda"], "loss.lambda");
  }
  if (j.contains("lr_g")) c.lr_g = number(j["lr_g"], "lr_g");
  if (j.contains("lr_d")) c.lr_d = number(j["lr_d"], "lr_d");
  if (j.contains("d_steps")) c.d_steps = static_cast<int>(integer(j["d_steps"], "d_steps"));
  if (j.contains("batch")) c.batch = static_cast<int>(integer(j["batch"], "batch"));
  if (j.contains("epochs")) c.epochs = integer(j["epochs"], "epochs");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw InputError("seed: expected a nonnegative integer");
    c.seed = j["seed"].get<unsigned long long>();
  }
  if (j.contains("data")) {
    const Json& dj = j["data"];
    check_keys(dj, {"offset", "dof", "ambient_dim", "plane"}, "data");
    if (dj.contains("offset")) c.data.offset = number(dj["offset"], "data.offset");
    if (dj.contains("dof")) c.data.dof = number(dj["dof"], "data.dof");
    if (dj.contains("ambient_dim")) c.data.ambient_dim = static_cast<int>(integer(dj["ambient_dim"], "data.ambient_dim"));
    if (dj.contains("plane")) c.data.plane = matrix_of(dj["plane"], "data.plane").transpose();
  }
  if (j.contains("n_train")) c.n_train = static_cast<int>(integer(j["n_train"], "n_train"));
  if (j.contains("noise_dim")) c.noise_dim = static_cast<int>(integer(j["noise_dim"], "noise_dim"));
  if (j.contains("widths")) {
    const Json& w = j["widths"];
    check_keys(w, {"hidden", "hidden_layers"}, "widths");
    if (w.contains("hidden")) c.widths.hidden = static_cast<int>(integer(w["hidden"], "widths.hidden"));
    if (w.contains("hidden_layers")) {
      c.widths.hidden_layers = static_cast<int>(integer(w["hidden_layers"], "widths.hidden_layers"));
    }
  }
  if (j.contains("ema")) c.ema = number(j["ema"], "ema");
  if (j.contains("eval_interval")) c.eval_interval = integer(j["eval_interval"], "eval_interval");
  if (j.contains("eval_samples")) c.eval_samples = static_cast<int>(integer(j["eval_samples"], "eval_samples"));
  guarded("config", [&] {
    c.validate();
    return 0;
  });
  return c;
}

Json to_json(const GanConfig& c) {
  Json j;
  j["generator"] = to_string(c.generator);
  j["discriminator"] = to_string(c.discriminator);
  j["sym_layer"] = c.sym_layer;
  j["loss"] = {{"kind", to_string(c.loss.kind)},
               {"alpha", c.loss.alpha},
               {"kl", c.loss.kl},
               {"lambda", c.loss.lambda}};
  j["lr_g"] = c.lr_g;
  j["lr_d"] = c.lr_d;
  j["d_steps"] = c.d_steps;
  j["batch"] = c.batch;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  Json data = {{"offset", c.data.offset}, {"dof", c.data.dof}, {"ambient_dim", c.data.ambient_dim}};
  if (c.data.plane.size() > 0) data["plane"] = rows_of(c.data.plane.transpose());
  j["data"] = data;
  j["n_train"] = c.n_train;
  j["noise_dim"] = c.noise_dim;
  j["widths"] = {{"hidden", c.widths.hidden}, {"hidden_layers", c.widths.hidden_layers}};
  j["ema"] = c.ema;
  j["eval_interval"] = c.eval_interval;
  j["eval_samples"] = c.eval_samples;
  return j;
}

Json to_json(const EvalRecord& r) {
  Json j;
  j["epoch"] = r.epoch;
  j["mode_freq"] = r.modes.freq;
  j["min_mode_freq"] = r.modes.min_mode_freq;
  j["orth_residual"] = {{"median", r.orth_median}, {"p90", r.orth_p90}};
  j["invariance"] = {{"ed", r.invariance.ed},
                     {"null_lo", r.invariance.null_lo},
                     {"null_hi", r.invariance.null_hi}};
  j["d_loss"] = r.d_loss;
  j["g_loss"] = r.g_loss;
  return j;
}

Json metrics_json(const TrainState& st) {
  Json j;
  if (!st.history.empty()) {
    const EvalRecord& last = st.history.back();
    j["epoch"] = last.epoch;
    j["mode_freq"] = last.modes.freq;
    j["min_mode_freq"] = last.modes.min_mode_freq;
    j["orth_residual"] = {{"median", last.orth_median}, {"p90", last.orth_p90}};
    j["invariance"] = {{"ed", last.invariance.ed}, {"null_hi", last.invariance.null_hi}};
  }
  Json h;
  for (const char* k : {"epoch", "mode_freq", "min_mode_freq", "orth_median", "orth_p90",
                        "invariance_ed", "invariance_null_lo", "invariance_null_hi", "d_loss",
                        "g_loss"}) {
    h[k] = Json::array();
  }
  for (const EvalRecord& r : st.history) {
    h["epoch"].push_back(r.epoch);
    h["mode_freq"].push_back(r.modes.freq);
    h["min_mode_freq"].push_back(r.modes.min_mode_freq);
    h["orth_median"].push_back(r.orth_median);
    h["orth_p90"].push_back(r.orth_p90);
    h["invariance_ed"].push_back(r.invariance.ed);
    h["invariance_null_lo"].push_back(r.invariance.null_lo);
    h["invariance_null_hi"].push_back(r.invariance.null_hi);
    h["d_loss"].push_back(r.d_loss);
    h["g_loss"].push_back(r.g_loss);
  }
  j["history"] = h;
  j["config"] = to_json(st.config);
  return j;
}

Json to_json(const VerifyReport& r) {
  Json rows = Json::array();
  for (const VerifyRow& row : r.rows) {
    rows.push_back({{"family", row.family},
                    {"identity", row.identity},
                    {"cases", row.cases},
                    {"max_discrepancy", row.max_discrepancy},
                    {"tolerance", row.tolerance},
                    {"passed", row.passed()}});
  }
  Json j;
  j["passed"] = r.passed();
  j["rows"] = rows;
  return j;
}

void write_samples_csv(std::ostream& os, const SampleSet& s, unsigned long long seed) {
  os << "# seed=" << seed << ", source=" << (s.provenance.empty() ? "unknown" : s.provenance) << "\n";
  char buf[32];
  for (Eigen::Index r = 0; r < s.data.rows(); ++r) {
    for (Eigen::Index c = 0; c < s.data.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", s.data(r, c));
      if (c) os << ',';
      os << buf;
    }
    os << '\n';
  }
}

SampleSet read_samples_csv(std::istream& is) {
  SampleSet s;
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto at = line.find("source=");
      if (at != std::string::npos) s.provenance = line.substr(at + 7);
      continue;
    }
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw InputError("samples csv: bad number '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows[0].size()) throw InputError("samples csv: ragged rows");
    rows.push_back(std::move(row));
  }
  s.data.resize(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < rows[r].size(); ++c) s.data(r, c) = rows[r][c];
  }
  return s;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace symdiv
