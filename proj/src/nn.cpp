#include "symdiv/nn.hpp"

#include "json.hpp"

#include <cmath>
#include <limits>
#include <istream>
#include <ostream>

namespace symdiv {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Column-major vec index of entry (r, c) in a matrix with `rows` rows.
int vec_index(int r, int c, int rows) { return c * rows + r; }

Eigen::MatrixXd uniform(int rows, int cols, double bound, Rng& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  Eigen::MatrixXd m(rows, cols);
  // Fill in row-major order so the draw sequence does not depend on storage.
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = u(rng);
  }
  return m;
}

bool same_group(const FiniteGroup& a, const FiniteGroup& b) { return a.cayley() == b.cayley(); }

std::shared_ptr<const LinOp> sparse_op(const Triplets& t, int in_rows, int in_cols, int out_rows,
                                       int out_cols) {
  Eigen::SparseMatrix<double> a(out_rows * out_cols, in_rows * in_cols);
  a.setFromTriplets(t.begin(), t.end());
  a.prune(0.0);
  return LinOp::make(std::move(a), in_rows, in_cols, out_rows, out_cols);
}

// Bias b (1 x C) repeated over the group index: (1 x G*C).
std::shared_ptr<const LinOp> group_bias(int g, int c) {
  Triplets t;
  for (int k = 0; k < g; ++k) {
    for (int j = 0; j < c; ++j) t.emplace_back(vec_index(0, k * c + j, 1), vec_index(0, j, 1), 1.0);
  }
  return sparse_op(t, 1, c, 1, g * c);
}

}  // namespace

LayerSpec LayerSpec::dense(int in, int out) {
  LayerSpec s{Kind::kDense};
  s.in = in;
  s.out = out;
  return s;
}

LayerSpec LayerSpec::act(Activation a) {
  LayerSpec s{Kind::kActivation};
  s.activation = a;
  return s;
}

LayerSpec LayerSpec::lift(std::shared_ptr<const LinearAction> input_action, int channels) {
  LayerSpec s{Kind::kGroupLift};
  s.in = input_action->dim();
  s.out = channels;
  s.action = std::move(input_action);
  return s;
}

LayerSpec LayerSpec::conv(std::shared_ptr<const LinearAction> group_ref, int in_ch, int out_ch) {
  LayerSpec s{Kind::kGroupConv};
  s.in = in_ch;
  s.out = out_ch;
  s.action = std::move(group_ref);
  return s;
}

LayerSpec LayerSpec::pool(std::shared_ptr<const LinearAction> group_ref, int channels, bool max) {
  LayerSpec s{Kind::kGroupPool};
  s.in = channels;
  s.out = channels;
  s.pool_max = max;
  s.action = std::move(group_ref);
  return s;
}

LayerSpec LayerSpec::project(std::shared_ptr<const LinearAction> output_action, int channels) {
  LayerSpec s{Kind::kGroupProject};
  s.in = channels;
  s.out = output_action->dim();
  s.action = std::move(output_action);
  return s;
}

LayerSpec LayerSpec::sym(std::shared_ptr<const LinearAction> feature_action) {
  LayerSpec s{Kind::kSymLayer};
  s.in = feature_action->dim();
  s.out = s.in;
  s.action = std::move(feature_action);
  return s;
}

std::shared_ptr<const LinearAction> regular_action(const FiniteGroup& group, int channels) {
  const int g = group.order();
  std::vector<Eigen::MatrixXd> mats;
  for (Element k = 0; k < g; ++k) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(g * channels, g * channels);
    const Element kinv = group.inverse(k);
    for (Element h = 0; h < g; ++h) {
      const Element src = group.mul(kinv, h);
      for (int c = 0; c < channels; ++c) m(h * channels + c, src * channels + c) = 1.0;
    }
    mats.push_back(std::move(m));
  }
  return std::make_shared<LinearAction>(group, std::move(mats));
}

Network::Network(std::vector<LayerSpec> layers, Rng& rng) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("Network: no layers");
  int dim = -1;
  auto expect = [&](int in, const char* what) {
    if (dim >= 0 && dim != in) {
      throw ShapeError(std::string("Network: ") + what + " input size " + std::to_string(in) +
                       " does not match previous output " + std::to_string(dim));
    }
    if (dim < 0) input_dim_ = in;
  };
  for (const LayerSpec& s : layers_) {
    Built b;
    b.first_param = static_cast<int>(params_.size());
    switch (s.kind) {
      case LayerSpec::Kind::kDense: {
        expect(s.in, "Dense");
        const double bound = 1.0 / std::sqrt(static_cast<double>(s.in));
        params_.push_back(uniform(s.in, s.out, bound, rng));
        params_.push_back(uniform(1, s.out, bound, rng));
        b.param_count = 2;
        b.in_dim = s.in;
        b.out_dim = s.out;
        break;
      }
      case LayerSpec::Kind::kActivation:
        if (dim < 0) throw ShapeError("Network: activation cannot be the first layer");
        b.in_dim = b.out_dim = dim;
        break;
      case LayerSpec::Kind::kGroupLift: {
        const LinearAction& act = *s.action;
        const int g = act.group().order(), d = act.dim(), c = s.out;
        expect(d, "GroupLift");
        // W[i, k*C + j] = sum_l M_k[i, l] psi[l, j]
        Triplets t;
        for (int k = 0; k < g; ++k) {
          const Eigen::MatrixXd& m = act.matrix(k);
          for (int i = 0; i < d; ++i) {
            for (int l = 0; l < d; ++l) {
              if (m(i, l) == 0.0) continue;
              for (int j = 0; j < c; ++j) {
                t.emplace_back(vec_index(i, k * c + j, d), vec_index(l, j, d), m(i, l));
              }
            }
          }
        }
        b.expand = sparse_op(t, d, c, d, g * c);
        b.expand_bias = group_bias(g, c);
        const double bound = 1.0 / std::sqrt(static_cast<double>(d));
        params_.push_back(uniform(d, c, bound, rng));
        params_.push_back(uniform(1, c, bound, rng));
        b.param_count = 2;
        b.in_dim = d;
        b.out_dim = g * c;
        break;
      }
      case LayerSpec::Kind::kGroupConv: {
        const FiniteGroup& grp = s.action->group();
        const int g = grp.order(), ci = s.in, co = s.out;
        expect(g * ci, "GroupConvDense");
        // W[(h, a), (k, b)] = theta[(h^-1 k) * Cin + a, b]; storage is per relative element.
        Triplets t;
        for (int h = 0; h < g; ++h) {
          for (int k = 0; k < g; ++k) {
            const int rel = grp.mul(grp.inverse(h), k);
            for (int a = 0; a < ci; ++a) {
              for (int bb = 0; bb < co; ++bb) {
                t.emplace_back(vec_index(h * ci + a, k * co + bb, g * ci),
                               vec_index(rel * ci + a, bb, g * ci), 1.0);
              }
            }
          }
        }
        b.expand = sparse_op(t, g * ci, co, g * ci, g * co);
        b.expand_bias = group_bias(g, co);
        const double bound = 1.0 / std::sqrt(static_cast<double>(g * ci));
        params_.push_back(uniform(g * ci, co, bound, rng));
        params_.push_back(uniform(1, co, bound, rng));
        b.param_count = 2;
        b.in_dim = g * ci;
        b.out_dim = g * co;
        break;
      }
      case LayerSpec::Kind::kGroupPool: {
        const int g = s.action->group().order(), c = s.in;
        expect(g * c, "GroupPool");
        auto e = std::make_shared<Eigen::MatrixXd>(Eigen::MatrixXd::Zero(g * c, c));
        for (int k = 0; k < g; ++k) {
          for (int j = 0; j < c; ++j) (*e)(k * c + j, j) = s.pool_max ? 1.0 : 1.0 / g;
        }
        b.constant = e;
        b.in_dim = g * c;
        b.out_dim = c;
        break;
      }
      case LayerSpec::Kind::kGroupProject: {
        const LinearAction& act = *s.action;
        const int g = act.group().order(), d = act.dim(), c = s.in;
        expect(g * c, "GroupProject");
        // W[k*C + j, i] = (1/G) sum_l M_k[i, l] B[l, j]
        Triplets t;
        for (int k = 0; k < g; ++k) {
          const Eigen::MatrixXd& m = act.matrix(k);
          for (int i = 0; i < d; ++i) {
            for (int l = 0; l < d; ++l) {
              if (m(i, l) == 0.0) continue;
              for (int j = 0; j < c; ++j) {
                t.emplace_back(vec_index(k * c + j, i, g * c), vec_index(l, j, d), m(i, l) / g);
              }
            }
          }
        }
        b.expand = sparse_op(t, d, c, g * c, d);
        // Bias projected onto the fixed subspace: (1/G) sum_k M_k b0.
        Triplets tb;
        for (int k = 0; k < g; ++k) {
          const Eigen::MatrixXd& m = act.matrix(k);
          for (int i = 0; i < d; ++i) {
            for (int l = 0; l < d; ++l) {
              if (m(i, l) != 0.0) tb.emplace_back(vec_index(0, i, 1), vec_index(0, l, 1), m(i, l) / g);
            }
          }
        }
        b.expand_bias = sparse_op(tb, 1, d, 1, d);
        const double bound = 1.0 / std::sqrt(static_cast<double>(c));
        params_.push_back(uniform(d, c, bound, rng));
        params_.push_back(uniform(1, d, bound, rng));
        b.param_count = 2;
        b.in_dim = g * c;
        b.out_dim = d;
        break;
      }
      case LayerSpec::Kind::kSymLayer:
        expect(s.action->dim(), "SymLayer");
        b.in_dim = b.out_dim = s.action->dim();
        break;
    }
    dim = b.out_dim;
    built_.push_back(std::move(b));
  }
  output_dim_ = dim;
  adam_.m.assign(params_.size(), Eigen::MatrixXd());
  adam_.v.assign(params_.size(), Eigen::MatrixXd());
  for (size_t i = 0; i < params_.size(); ++i) {
    adam_.m[i] = Eigen::MatrixXd::Zero(params_[i].rows(), params_[i].cols());
    adam_.v[i] = adam_.m[i];
  }
}

long long Network::param_count() const {
  long long n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

std::vector<Graph::Id> Network::bind(Graph& g) const {
  std::vector<Graph::Id> ids;
  ids.reserve(params_.size());
  for (const auto& p : params_) ids.push_back(g.leaf(p));
  return ids;
}

Graph::Id Network::forward(Graph& g, Graph::Id x, const std::vector<Graph::Id>& params,
                           Rng* sym_rng) const {
  if (params.size() != params_.size()) throw ShapeError("forward: parameter count mismatch");
  if (g.value(x).cols() != input_dim_) {
    throw ShapeError("forward: input has " + std::to_string(g.value(x).cols()) +
                     " columns, network expects " + std::to_string(input_dim_));
  }
  Graph::Id h = x;
  for (size_t li = 0; li < layers_.size(); ++li) {
    const LayerSpec& s = layers_[li];
    const Built& b = built_[li];
    switch (s.kind) {
      case LayerSpec::Kind::kDense:
        h = g.add_row(g.matmul(h, params[b.first_param]), params[b.first_param + 1]);
        break;
      case LayerSpec::Kind::kActivation:
        switch (s.activation) {
          case Activation::kRelu: h = g.relu(h); break;
          case Activation::kLeakyRelu: h = g.leaky_relu(h, 0.2); break;
          case Activation::kTanh: h = g.tanh(h); break;
        }
        break;
      case LayerSpec::Kind::kGroupLift:
      case LayerSpec::Kind::kGroupConv:
      case LayerSpec::Kind::kGroupProject: {
        const Graph::Id w = g.lin_map(params[b.first_param], b.expand);
        const Graph::Id bias = g.lin_map(params[b.first_param + 1], b.expand_bias);
        h = g.add_row(g.matmul(h, w), bias);
        break;
      }
      case LayerSpec::Kind::kGroupPool:
        if (s.pool_max) {
          // Route each (row, channel) through its arg-max group element.
          const Eigen::MatrixXd& v = g.value(h);
          const int gs = s.action->group().order(), c = s.in;
          auto mask = std::make_shared<Eigen::MatrixXd>(Eigen::MatrixXd::Zero(v.rows(), v.cols()));
          for (int r = 0; r < v.rows(); ++r) {
            for (int j = 0; j < c; ++j) {
              int best = 0;
              for (int k = 1; k < gs; ++k) {
                if (v(r, k * c + j) > v(r, best * c + j)) best = k;
              }
              double runner_up = -std::numeric_limits<double>::infinity();
              for (int k = 0; k < gs; ++k) {
                if (k != best) runner_up = std::max(runner_up, v(r, k * c + j));
              }
              g.note_margin(0.5 * (v(r, best * c + j) - runner_up));
              (*mask)(r, best * c + j) = 1.0;
            }
          }
          h = g.mul_const(h, std::move(mask));
        }
        h = g.matmul(h, g.leaf(*b.constant));
        break;
      case LayerSpec::Kind::kSymLayer: {
        if (!sym_rng) throw std::invalid_argument("forward: SymLayer needs a random source");
        const LinearAction& act = *s.action;
        const int rows = static_cast<int>(g.value(h).rows());
        const int gs = act.group().order();
        std::vector<Element> draw(rows);
        for (int r = 0; r < rows; ++r) draw[r] = haar_sample(act.group(), *sym_rng);
        Graph::Id out = -1;
        for (Element k = 0; k < gs; ++k) {
          auto mask = std::make_shared<Eigen::MatrixXd>(Eigen::MatrixXd::Zero(rows, act.dim()));
          bool any = false;
          for (int r = 0; r < rows; ++r) {
            if (draw[r] == k) {
              mask->row(r).setOnes();
              any = true;
            }
          }
          if (!any) continue;
          // Rows are samples, so T x becomes x T^T.
          const Graph::Id part =
              g.mul_const(g.matmul(h, g.leaf(act.matrix(k)), false, true), std::move(mask));
          out = out < 0 ? part : g.add(out, part);
        }
        h = out < 0 ? h : out;
        break;
      }
    }
  }
  return h;
}

Eigen::MatrixXd Network::predict(const Eigen::MatrixXd& x, Rng* sym_rng) const {
  Graph g;
  const auto params = bind(g);
  const Graph::Id in = g.leaf(x);
  return g.value(forward(g, in, params, sym_rng));
}

void adam_step(std::vector<Eigen::MatrixXd>& params, const std::vector<Eigen::MatrixXd>& grads,
               AdamState& st, double lr, const AdamConfig& cfg) {
  if (grads.size() != params.size()) throw ShapeError("adam_step: gradient count mismatch");
  if (st.m.size() != params.size()) {
    st.m.clear();
    st.v.clear();
    for (const auto& p : params) {
      st.m.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
      st.v.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
    }
  }
  ++st.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.t));
  for (size_t i = 0; i < params.size(); ++i) {
    if (grads[i].rows() != params[i].rows() || grads[i].cols() != params[i].cols()) {
      throw ShapeError("adam_step: gradient shape mismatch");
    }
    st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * grads[i];
    st.v[i] = cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * grads[i].cwiseAbs2();
    params[i].array() -=
        lr * (st.m[i].array() / c1) / ((st.v[i].array() / c2).sqrt() + cfg.eps);
  }
}

Network build_generator(GeneratorVariant variant, std::shared_ptr<const LinearAction> az,
                        std::shared_ptr<const LinearAction> ax, const Widths& w, Rng& rng,
                        bool sym_layer) {
  if (w.hidden <= 0 || w.hidden_layers <= 0) throw ShapeError("build_generator: invalid widths");
  if (!same_group(az->group(), ax->group())) {
    throw ShapeError("build_generator: noise and data actions use different groups");
  }
  std::vector<LayerSpec> l;
  const auto act = LayerSpec::act(Activation::kLeakyRelu);
  if (variant == GeneratorVariant::kVanilla) {
    l.push_back(LayerSpec::dense(az->dim(), w.hidden));
    l.push_back(act);
    for (int i = 1; i < w.hidden_layers; ++i) {
      l.push_back(LayerSpec::dense(w.hidden, w.hidden));
      l.push_back(act);
    }
    l.push_back(LayerSpec::dense(w.hidden, ax->dim()));
    return Network(std::move(l), rng);
  }
  const int g = ax->group().order();
  const int ch = std::max(1, w.hidden / g);
  if (variant == GeneratorVariant::kEqv) {
    l.push_back(LayerSpec::lift(az, ch));
  } else {
    l.push_back(LayerSpec::dense(az->dim(), g * ch));
  }
  l.push_back(act);
  if (variant == GeneratorVariant::kIEqv && sym_layer) {
    l.push_back(LayerSpec::sym(regular_action(ax->group(), ch)));
  }
  for (int i = 1; i < w.hidden_layers; ++i) {
    l.push_back(LayerSpec::conv(ax, ch, ch));
    l.push_back(act);
  }
  l.push_back(LayerSpec::project(ax, ch));
  return Network(std::move(l), rng);
}

Network build_discriminator(DiscriminatorVariant variant, std::shared_ptr<const LinearAction> ax,
                            const Widths& w, Rng& rng) {
  if (w.hidden <= 0 || w.hidden_layers <= 0) {
    throw ShapeError("build_discriminator: invalid widths");
  }
  std::vector<LayerSpec> l;
  const auto act = LayerSpec::act(Activation::kLeakyRelu);
  if (variant == DiscriminatorVariant::kVanilla) {
    l.push_back(LayerSpec::dense(ax->dim(), w.hidden));
    l.push_back(act);
    for (int i = 1; i < w.hidden_layers; ++i) {
      l.push_back(LayerSpec::dense(w.hidden, w.hidden));
      l.push_back(act);
    }
    l.push_back(LayerSpec::dense(w.hidden, 1));
    return Network(std::move(l), rng);
  }
  const int ch = std::max(1, w.hidden / ax->group().order());
  l.push_back(LayerSpec::lift(ax, ch));
  l.push_back(act);
  for (int i = 1; i < w.hidden_layers; ++i) {
    l.push_back(LayerSpec::conv(ax, ch, ch));
    l.push_back(act);
  }
  l.push_back(LayerSpec::pool(ax, ch, false));
  l.push_back(LayerSpec::dense(ch, 1));
  return Network(std::move(l), rng);
}

double equivariance_deviation(const Network& g, const LinearAction& az, const LinearAction& ax,
                              const Eigen::MatrixXd& z) {
  const Eigen::MatrixXd base = g.predict(z);
  double worst = 0.0;
  for (Element s = 0; s < az.group().order(); ++s) {
    const Eigen::MatrixXd moved = g.predict(z * az.matrix(s).transpose());
    const Eigen::MatrixXd expected = base * ax.matrix(s).transpose();
    worst = std::max(worst, (moved - expected).rowwise().norm().maxCoeff());
  }
  return worst;
}

double invariance_deviation(const Network& f, const LinearAction& ax, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd base = f.predict(x);
  double worst = 0.0;
  for (Element s = 0; s < ax.group().order(); ++s) {
    const Eigen::MatrixXd moved = f.predict(x * ax.matrix(s).transpose());
    worst = std::max(worst, (moved - base).cwiseAbs().maxCoeff());
  }
  return worst;
}

void save_checkpoint(std::ostream& os, const std::vector<Eigen::MatrixXd>& params,
                     unsigned long long seed) {
  nlohmann::json header;
  header["format"] = "symdiv-checkpoint";
  header["version"] = 1;
  header["seed"] = seed;
  nlohmann::json shapes = nlohmann::json::array();
  long long count = 0;
  for (const auto& p : params) {
    shapes.push_back({p.rows(), p.cols()});
    count += p.size();
  }
  header["shapes"] = shapes;
  header["count"] = count;
  os << header.dump() << '\n';
  for (const auto& p : params) {
    os.write(reinterpret_cast<const char*>(p.data()),
             static_cast<std::streamsize>(p.size() * sizeof(double)));
  }
}

std::vector<Eigen::MatrixXd> load_checkpoint(std::istream& is, unsigned long long* seed) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("load_checkpoint: missing header");
  const auto header = nlohmann::json::parse(line);
  if (header.value("format", "") != "symdiv-checkpoint") {
    throw std::runtime_error("load_checkpoint: not a checkpoint");
  }
  if (seed) *seed = header.at("seed").get<unsigned long long>();
  std::vector<Eigen::MatrixXd> out;
  for (const auto& s : header.at("shapes")) {
    Eigen::MatrixXd p(s.at(0).get<int>(), s.at(1).get<int>());
    is.read(reinterpret_cast<char*>(p.data()), static_cast<std::streamsize>(p.size() * sizeof(double)));
    if (!is) throw std::runtime_error("load_checkpoint: truncated data");
    out.push_back(std::move(p));
  }
  return out;
}

std::string to_string(GeneratorVariant v) {
  switch (v) {
    case GeneratorVariant::kVanilla: return "vanilla";
    case GeneratorVariant::kEqv: return "eqv";
    case GeneratorVariant::kIEqv: return "ieqv";
  }
  return "?";
}

std::string to_string(DiscriminatorVariant v) {
  return v == DiscriminatorVariant::kVanilla ? "vanilla" : "inv";
}

GeneratorVariant parse_generator_variant(const std::string& s) {
  if (s == "vanilla") return GeneratorVariant::kVanilla;
  if (s == "eqv") return GeneratorVariant::kEqv;
  if (s == "ieqv") return GeneratorVariant::kIEqv;
  throw std::invalid_argument("unknown generator variant '" + s + "'");
}

DiscriminatorVariant parse_discriminator_variant(const std::string& s) {
  if (s == "vanilla") return DiscriminatorVariant::kVanilla;
  if (s == "inv") return DiscriminatorVariant::kInv;
  throw std::invalid_argument("unknown discriminator variant '" + s + "'");
}

}  // namespace symdiv
