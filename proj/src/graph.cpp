#include "symdiv/nn.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace symdiv {

namespace {

[[noreturn]] void shape_error(const char* op, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  std::ostringstream msg;
  msg << op << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
      << b.cols();
  throw ShapeError(msg.str());
}

}  // namespace

std::shared_ptr<const LinOp> LinOp::make(Eigen::SparseMatrix<double> a, int in_rows, int in_cols,
                                         int out_rows, int out_cols) {
  if (a.rows() != out_rows * out_cols || a.cols() != in_rows * in_cols) {
    throw ShapeError("LinOp: matrix does not match shapes");
  }
  auto adj = std::make_shared<LinOp>();
  adj->a = a.transpose();
  adj->in_rows = out_rows;
  adj->in_cols = out_cols;
  adj->out_rows = in_rows;
  adj->out_cols = in_cols;
  auto fwd = std::make_shared<LinOp>();
  fwd->a = std::move(a);
  fwd->in_rows = in_rows;
  fwd->in_cols = in_cols;
  fwd->out_rows = out_rows;
  fwd->out_cols = out_cols;
  fwd->adjoint = adj;
  // The adjoint's adjoint is needed for double backprop through a LinMap VJP.
  auto back = std::make_shared<LinOp>(*fwd);
  back->adjoint = nullptr;
  adj->adjoint = back;
  return fwd;
}

Graph::Id Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size()) - 1;
}

Graph::Id Graph::leaf(Eigen::MatrixXd value) {
  Node n{Op::kLeaf};
  n.value = std::move(value);
  return push(std::move(n));
}

double Graph::scalar(Id id) const {
  const auto& v = nodes_[id].value;
  if (v.rows() != 1 || v.cols() != 1) throw ShapeError("scalar: node is not 1x1");
  return v(0, 0);
}

Graph::Id Graph::matmul(Id a, Id b, bool ta, bool tb) {
  const auto& A = nodes_[a].value;
  const auto& B = nodes_[b].value;
  const auto inner_a = ta ? A.rows() : A.cols();
  const auto inner_b = tb ? B.cols() : B.rows();
  if (inner_a != inner_b) shape_error("matmul", A, B);
  Node n{Op::kMatMul, a, b};
  n.ta = ta;
  n.tb = tb;
  if (!ta && !tb) n.value.noalias() = A * B;
  else if (ta && !tb) n.value.noalias() = A.transpose() * B;
  else if (!ta && tb) n.value.noalias() = A * B.transpose();
  else n.value.noalias() = A.transpose() * B.transpose();
  return push(std::move(n));
}

Graph::Id Graph::add(Id a, Id b) {
  const auto& A = nodes_[a].value;
  const auto& B = nodes_[b].value;
  if (A.rows() != B.rows() || A.cols() != B.cols()) shape_error("add", A, B);
  Node n{Op::kAdd, a, b};
  n.value = A + B;
  return push(std::move(n));
}

Graph::Id Graph::sub(Id a, Id b) {
  const auto& A = nodes_[a].value;
  const auto& B = nodes_[b].value;
  if (A.rows() != B.rows() || A.cols() != B.cols()) shape_error("sub", A, B);
  Node n{Op::kSub, a, b};
  n.value = A - B;
  return push(std::move(n));
}

Graph::Id Graph::mul(Id a, Id b) {
  const auto& A = nodes_[a].value;
  const auto& B = nodes_[b].value;
  if (A.rows() != B.rows() || A.cols() != B.cols()) shape_error("mul", A, B);
  Node n{Op::kMul, a, b};
  n.value = A.cwiseProduct(B);
  return push(std::move(n));
}

Graph::Id Graph::scale(Id a, double c) {
  Node n{Op::kScale, a};
  n.c = c;
  n.value = c * nodes_[a].value;
  return push(std::move(n));
}

Graph::Id Graph::add_scalar(Id a, double c) {
  Node n{Op::kAddScalar, a};
  n.c = c;
  n.value = nodes_[a].value.array() + c;
  return push(std::move(n));
}

Graph::Id Graph::add_row(Id a, Id row) {
  const auto& A = nodes_[a].value;
  const auto& R = nodes_[row].value;
  if (R.rows() != 1 || R.cols() != A.cols()) shape_error("add_row", A, R);
  Node n{Op::kAddRow, a, row};
  n.value = A.rowwise() + R.row(0);
  return push(std::move(n));
}

Graph::Id Graph::sum_rows(Id a) {
  Node n{Op::kSumRows, a};
  n.value = nodes_[a].value.colwise().sum();
  return push(std::move(n));
}

Graph::Id Graph::broadcast_rows(Id row, int rows) {
  const auto& R = nodes_[row].value;
  if (R.rows() != 1) throw ShapeError("broadcast_rows: input must have one row");
  Node n{Op::kBroadcastRows, row};
  n.value = R.replicate(rows, 1);
  return push(std::move(n));
}

Graph::Id Graph::sum_cols(Id a) {
  Node n{Op::kSumCols, a};
  n.value = nodes_[a].value.rowwise().sum();
  return push(std::move(n));
}

Graph::Id Graph::broadcast_cols(Id col, int cols) {
  const auto& C = nodes_[col].value;
  if (C.cols() != 1) throw ShapeError("broadcast_cols: input must have one column");
  Node n{Op::kBroadcastCols, col};
  n.value = C.replicate(1, cols);
  return push(std::move(n));
}

Graph::Id Graph::sum_all(Id a) {
  Node n{Op::kSumAll, a};
  n.value = Eigen::MatrixXd::Constant(1, 1, nodes_[a].value.sum());
  return push(std::move(n));
}

Graph::Id Graph::broadcast_all(Id s, int rows, int cols) {
  const auto& S = nodes_[s].value;
  if (S.rows() != 1 || S.cols() != 1) throw ShapeError("broadcast_all: input must be 1x1");
  Node n{Op::kBroadcastAll, s};
  n.value = Eigen::MatrixXd::Constant(rows, cols, S(0, 0));
  return push(std::move(n));
}

Graph::Id Graph::tanh(Id a) {
  Node n{Op::kTanh, a};
  n.value = nodes_[a].value.array().tanh();
  return push(std::move(n));
}

Graph::Id Graph::leaky_relu(Id a, double slope) {
  Node n{Op::kLeakyRelu, a};
  n.c = slope;
  n.value = nodes_[a].value.unaryExpr([slope](double x) { return x > 0.0 ? x : slope * x; });
  return push(std::move(n));
}

Graph::Id Graph::exp(Id a) {
  Node n{Op::kExp, a};
  n.value = nodes_[a].value.array().exp();
  return push(std::move(n));
}

Graph::Id Graph::pow_pos(Id a, double p) {
  Node n{Op::kPowPos, a};
  n.c = p;
  n.value = nodes_[a].value.unaryExpr([p](double x) { return x > 0.0 ? std::pow(x, p) : 0.0; });
  return push(std::move(n));
}

Graph::Id Graph::mul_const(Id a, std::shared_ptr<const Eigen::MatrixXd> c) {
  const auto& A = nodes_[a].value;
  if (A.rows() != c->rows() || A.cols() != c->cols()) shape_error("mul_const", A, *c);
  Node n{Op::kMulConst, a};
  n.value = A.cwiseProduct(*c);
  n.k = std::move(c);
  return push(std::move(n));
}

Graph::Id Graph::lin_map(Id a, std::shared_ptr<const LinOp> op) {
  const auto& A = nodes_[a].value;
  if (A.rows() != op->in_rows || A.cols() != op->in_cols) {
    throw ShapeError("lin_map: input shape mismatch");
  }
  Node n{Op::kLinMap, a};
  n.value.resize(op->out_rows, op->out_cols);
  Eigen::Map<Eigen::VectorXd>(n.value.data(), n.value.size()) =
      op->a * Eigen::Map<const Eigen::VectorXd>(A.data(), A.size());
  n.lin = std::move(op);
  return push(std::move(n));
}

Graph::Id Graph::rows(Id a, int start, int count) {
  const auto& A = nodes_[a].value;
  if (start < 0 || count < 0 || start + count > A.rows()) throw ShapeError("rows: range out of bounds");
  Node n{Op::kRows, a};
  n.c = start;
  n.value = A.middleRows(start, count);
  return push(std::move(n));
}

Graph::Id Graph::pad_rows(Id a, int start, int total) {
  const auto& A = nodes_[a].value;
  if (start < 0 || start + A.rows() > total) throw ShapeError("pad_rows: range out of bounds");
  Node n{Op::kPadRows, a};
  n.c = start;
  n.value = Eigen::MatrixXd::Zero(total, A.cols());
  n.value.middleRows(start, A.rows()) = A;
  return push(std::move(n));
}

double Graph::kink_margin() const {
  double m = margin_;
  for (const Node& n : nodes_) {
    if (n.op == Op::kLeakyRelu && n.c != 1.0) {
      m = std::min(m, nodes_[n.a].value.cwiseAbs().minCoeff());
    }
  }
  return m;
}

void Graph::accumulate(std::vector<Id>& acc, Id target, Id contribution) {
  acc[target] = acc[target] < 0 ? contribution : add(acc[target], contribution);
}

// Appends the vector-Jacobian products of node i with adjoint `d` to the
// accumulators of its parents that lead to a requested input. Node data is
// copied up front because push() may reallocate the arena.
void Graph::vjp(Id i, Id d, const std::vector<char>& needs, std::vector<Id>& acc) {
  const Op op = nodes_[i].op;
  const Id a = nodes_[i].a, b = nodes_[i].b;
  const double c = nodes_[i].c;
  const bool ta = nodes_[i].ta, tb = nodes_[i].tb;
  const bool na = a >= 0 && needs[a];
  const bool nb = b >= 0 && needs[b];
  switch (op) {
    case Op::kLeaf:
      break;
    case Op::kMatMul:
      // C = op(A) op(B).
      if (na) {
        // d op(A) = dC op(B)^T
        Id g = ta ? matmul(b, d, tb, true) : matmul(d, b, false, !tb);
        accumulate(acc, a, g);
      }
      if (nb) {
        // d op(B) = op(A)^T dC
        Id g = tb ? matmul(d, a, true, ta) : matmul(a, d, !ta, false);
        accumulate(acc, b, g);
      }
      break;
    case Op::kAdd:
      if (na) accumulate(acc, a, d);
      if (nb) accumulate(acc, b, d);
      break;
    case Op::kSub:
      if (na) accumulate(acc, a, d);
      if (nb) accumulate(acc, b, scale(d, -1.0));
      break;
    case Op::kMul:
      if (na) accumulate(acc, a, mul(d, b));
      if (nb) accumulate(acc, b, mul(d, a));
      break;
    case Op::kScale:
      if (na) accumulate(acc, a, scale(d, c));
      break;
    case Op::kAddScalar:
      if (na) accumulate(acc, a, d);
      break;
    case Op::kAddRow:
      if (na) accumulate(acc, a, d);
      if (nb) accumulate(acc, b, sum_rows(d));
      break;
    case Op::kSumRows:
      if (na) accumulate(acc, a, broadcast_rows(d, static_cast<int>(nodes_[a].value.rows())));
      break;
    case Op::kBroadcastRows:
      if (na) accumulate(acc, a, sum_rows(d));
      break;
    case Op::kSumCols:
      if (na) accumulate(acc, a, broadcast_cols(d, static_cast<int>(nodes_[a].value.cols())));
      break;
    case Op::kBroadcastCols:
      if (na) accumulate(acc, a, sum_cols(d));
      break;
    case Op::kSumAll:
      if (na) {
        accumulate(acc, a,
                   broadcast_all(d, static_cast<int>(nodes_[a].value.rows()),
                                 static_cast<int>(nodes_[a].value.cols())));
      }
      break;
    case Op::kBroadcastAll:
      if (na) accumulate(acc, a, sum_all(d));
      break;
    case Op::kTanh:
      if (na) {
        // 1 - y^2, built from y so it stays differentiable.
        Id one_minus = add_scalar(scale(mul(i, i), -1.0), 1.0);
        accumulate(acc, a, mul(d, one_minus));
      }
      break;
    case Op::kLeakyRelu:
      if (na) {
        auto mask = std::make_shared<Eigen::MatrixXd>(
            nodes_[a].value.unaryExpr([c](double x) { return x > 0.0 ? 1.0 : c; }));
        accumulate(acc, a, mul_const(d, std::move(mask)));
      }
      break;
    case Op::kExp:
      if (na) accumulate(acc, a, mul(d, i));
      break;
    case Op::kPowPos:
      if (na) accumulate(acc, a, mul(d, scale(pow_pos(a, c - 1.0), c)));
      break;
    case Op::kMulConst:
      if (na) {
        auto k = nodes_[i].k;
        accumulate(acc, a, mul_const(d, std::move(k)));
      }
      break;
    case Op::kRows:
      if (na) {
        accumulate(acc, a,
                   pad_rows(d, static_cast<int>(c), static_cast<int>(nodes_[a].value.rows())));
      }
      break;
    case Op::kPadRows:
      if (na) {
        accumulate(acc, a, rows(d, static_cast<int>(c), static_cast<int>(nodes_[a].value.rows())));
      }
      break;
    case Op::kLinMap:
      if (na) {
        auto adj = nodes_[i].lin->adjoint;
        if (!adj) throw ShapeError("lin_map: derivative order too high");
        accumulate(acc, a, lin_map(d, std::move(adj)));
      }
      break;
  }
}

std::vector<Graph::Id> Graph::gradients(Id y, const std::vector<Id>& xs) {
  if (nodes_[y].value.size() != 1) throw ShapeError("gradients: output must be scalar");
  const int n = y + 1;
  std::vector<char> needs(n, 0);
  for (Id x : xs) {
    if (x < n) needs[x] = 1;
  }
  for (int i = 0; i < n; ++i) {
    const Node& nd = nodes_[i];
    if ((nd.a >= 0 && needs[nd.a]) || (nd.b >= 0 && needs[nd.b])) needs[i] = 1;
  }
  std::vector<Id> acc(n, -1);
  acc[y] = leaf(Eigen::MatrixXd::Ones(1, 1));
  for (int i = y; i >= 0; --i) {
    if (acc[i] < 0 || !needs[i]) continue;
    vjp(i, acc[i], needs, acc);
  }
  std::vector<Id> out;
  out.reserve(xs.size());
  for (Id x : xs) {
    if (x < n && acc[x] >= 0) {
      out.push_back(acc[x]);
    } else {
      out.push_back(leaf(Eigen::MatrixXd::Zero(nodes_[x].value.rows(), nodes_[x].value.cols())));
    }
  }
  return out;
}

}  // namespace symdiv
