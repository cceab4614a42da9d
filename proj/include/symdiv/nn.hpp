#pragma once

// Reverse-mode autodiff on an eager tape of matrix-valued nodes, with
// gradients built as graph nodes so they can be differentiated again; dense
// and group-equivariant layers over the regular representation; Adam.

#include "symdiv/groups.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace symdiv {

/// Fixed linear map on matrices: vec(Y) = A vec(X) (column-major vec).
struct LinOp {
  Eigen::SparseMatrix<double> a;
  int in_rows = 0, in_cols = 0, out_rows = 0, out_cols = 0;
  std::shared_ptr<const LinOp> adjoint;  ///< vec(dX) = A^T vec(dY)

  /// Builds the map and its adjoint.
  static std::shared_ptr<const LinOp> make(Eigen::SparseMatrix<double> a, int in_rows, int in_cols,
                                           int out_rows, int out_cols);
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Graph {
 public:
  using Id = int;

  Id leaf(Eigen::MatrixXd value);
  const Eigen::MatrixXd& value(Id id) const { return nodes_[id].value; }
  double scalar(Id id) const;
  int size() const { return static_cast<int>(nodes_.size()); }

  Id matmul(Id a, Id b, bool ta = false, bool tb = false);
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);
  Id scale(Id a, double c);
  Id add_scalar(Id a, double c);
  /// a (n x m) + row (1 x m) on every row.
  Id add_row(Id a, Id row);
  /// Column sums, 1 x m.
  Id sum_rows(Id a);
  Id broadcast_rows(Id row, int n);
  /// Row sums, n x 1.
  Id sum_cols(Id a);
  Id broadcast_cols(Id col, int m);
  Id sum_all(Id a);
  Id broadcast_all(Id s, int rows, int cols);
  Id tanh(Id a);
  /// x > 0 ? x : slope * x; the kink takes the negative-side slope.
  Id leaky_relu(Id a, double slope);
  Id relu(Id a) { return leaky_relu(a, 0.0); }
  Id exp(Id a);
  /// x > 0 ? x^p : 0
  Id pow_pos(Id a, double p);
  /// Elementwise product with a constant matrix.
  Id mul_const(Id a, std::shared_ptr<const Eigen::MatrixXd> c);
  Id lin_map(Id a, std::shared_ptr<const LinOp> op);
  /// Rows [start, start + count).
  Id rows(Id a, int start, int count);
  /// Places a at rows [start, start + rows(a)) of a zero matrix with `total` rows.
  Id pad_rows(Id a, int start, int total);

  /// d y / d x for scalar y, as nodes of this graph (zero leaves when x does
  /// not influence y). The result can itself be differentiated.
  std::vector<Id> gradients(Id y, const std::vector<Id>& xs);

  /// Distance to the nearest non-smooth point: smallest |pre-activation|
  /// over leaky-relu nodes and any margins reported through note_margin().
  double kink_margin() const;
  void note_margin(double m) { margin_ = std::min(margin_, m); }

 private:
  enum class Op {
    kLeaf, kMatMul, kAdd, kSub, kMul, kScale, kAddScalar, kAddRow, kSumRows, kBroadcastRows,
    kSumCols, kBroadcastCols, kSumAll, kBroadcastAll, kTanh, kLeakyRelu, kExp, kPowPos,
    kMulConst, kLinMap, kRows, kPadRows
  };
  struct Node {
    Node(Op o, Id pa = -1, Id pb = -1) : op(o), a(pa), b(pb) {}
    Op op;
    Id a, b;
    Eigen::MatrixXd value;
    double c = 0.0;
    bool ta = false, tb = false;
    std::shared_ptr<const Eigen::MatrixXd> k;
    std::shared_ptr<const LinOp> lin;
  };
  Id push(Node n);
  void vjp(Id i, Id adj, const std::vector<char>& needs, std::vector<Id>& acc);
  void accumulate(std::vector<Id>& acc, Id target, Id contribution);

  std::vector<Node> nodes_;
  double margin_ = std::numeric_limits<double>::infinity();
};

enum class Activation { kRelu, kLeakyRelu, kTanh };

struct LayerSpec {
  enum class Kind { kDense, kActivation, kGroupLift, kGroupConv, kGroupPool, kGroupProject, kSymLayer };
  explicit LayerSpec(Kind k) : kind(k) {}
  Kind kind;
  int in = 0, out = 0;  ///< Dense sizes; channel counts for group layers
  Activation activation = Activation::kLeakyRelu;
  bool pool_max = false;
  /// Lift: action on the input space. Project: action on the output space.
  /// SymLayer: action on the feature space. Conv/Pool: only the group is used.
  std::shared_ptr<const LinearAction> action;

  static LayerSpec dense(int in, int out);
  static LayerSpec act(Activation a);
  static LayerSpec lift(std::shared_ptr<const LinearAction> input_action, int channels);
  static LayerSpec conv(std::shared_ptr<const LinearAction> group_ref, int in_ch, int out_ch);
  static LayerSpec pool(std::shared_ptr<const LinearAction> group_ref, int channels, bool max);
  static LayerSpec project(std::shared_ptr<const LinearAction> output_action, int channels);
  static LayerSpec sym(std::shared_ptr<const LinearAction> feature_action);
};

/// Regular representation of `group` on R^{|G| * channels}, features laid out
/// group-major (index g * channels + c): (T_k h)_g = h_{k^-1 g}.
std::shared_ptr<const LinearAction> regular_action(const FiniteGroup& group, int channels);

struct AdamConfig {
  double beta1 = 0.0;
  double beta2 = 0.9;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Eigen::MatrixXd> m, v;
  long long t = 0;
};

class Network {
 public:
  Network(std::vector<LayerSpec> layers, Rng& init_rng);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  std::vector<Eigen::MatrixXd>& params() { return params_; }
  const std::vector<Eigen::MatrixXd>& params() const { return params_; }
  long long param_count() const;
  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }

  /// Parameter leaves for one graph, in params() order.
  std::vector<Graph::Id> bind(Graph& g) const;
  /// `sym_rng` drives SymLayer draws (one per row); required when present.
  Graph::Id forward(Graph& g, Graph::Id x, const std::vector<Graph::Id>& params,
                    Rng* sym_rng) const;
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x, Rng* sym_rng = nullptr) const;

  AdamState& adam() { return adam_; }

 private:
  struct Built {
    int first_param = 0;
    int param_count = 0;
    std::shared_ptr<const LinOp> expand;  ///< weight sharing, when used
    std::shared_ptr<const LinOp> expand_bias;
    std::shared_ptr<const Eigen::MatrixXd> constant;  ///< pool matrix
    int in_dim = 0, out_dim = 0;
  };
  std::vector<LayerSpec> layers_;
  std::vector<Built> built_;
  std::vector<Eigen::MatrixXd> params_;
  AdamState adam_;
  int input_dim_ = 0, output_dim_ = 0;
};

void adam_step(std::vector<Eigen::MatrixXd>& params, const std::vector<Eigen::MatrixXd>& grads,
               AdamState& state, double lr, const AdamConfig& cfg = {});

enum class GeneratorVariant { kVanilla, kEqv, kIEqv };
enum class DiscriminatorVariant { kVanilla, kInv };

struct Widths {
  int hidden = 64;  ///< features per hidden layer; group layers use hidden / |G| channels
  int hidden_layers = 3;
};

/// `sym_layer` inserts a SymLayer after the first Dense of the ieqv variant.
Network build_generator(GeneratorVariant variant, std::shared_ptr<const LinearAction> action_z,
                        std::shared_ptr<const LinearAction> action_x, const Widths& widths,
                        Rng& init_rng, bool sym_layer = false);
Network build_discriminator(DiscriminatorVariant variant,
                            std::shared_ptr<const LinearAction> action_x, const Widths& widths,
                            Rng& init_rng);

/// max over samples and group elements of ||g(T z) - T g(z)||.
double equivariance_deviation(const Network& g, const LinearAction& action_z,
                              const LinearAction& action_x, const Eigen::MatrixXd& z);
/// max over samples and group elements of |f(T x) - f(x)|.
double invariance_deviation(const Network& f, const LinearAction& action_x,
                            const Eigen::MatrixXd& x);

/// One JSON header line (shapes, seed) followed by raw little-endian float64.
void save_checkpoint(std::ostream& os, const std::vector<Eigen::MatrixXd>& params,
                     unsigned long long seed);
std::vector<Eigen::MatrixXd> load_checkpoint(std::istream& is, unsigned long long* seed = nullptr);

std::string to_string(GeneratorVariant v);
std::string to_string(DiscriminatorVariant v);
GeneratorVariant parse_generator_variant(const std::string& s);
DiscriminatorVariant parse_discriminator_variant(const std::string& s);

}  // namespace symdiv
