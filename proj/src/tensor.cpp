#include "selftalk/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "selftalk/errors.hpp"

namespace selftalk {

namespace {

std::shared_ptr<TensorNode> make_node(std::size_t rows, std::size_t cols) {
  auto n = std::make_shared<TensorNode>();
  n->rows = rows;
  n->cols = cols;
  n->value.assign(rows * cols, 0.0);
  return n;
}

std::shared_ptr<TensorNode> make_op(std::size_t rows, std::size_t cols,
                                    std::vector<std::shared_ptr<TensorNode>> parents) {
  auto n = make_node(rows, cols);
  n->parents = std::move(parents);
  for (const auto& p : n->parents) {
    if (p->requires_grad) n->requires_grad = true;
  }
  return n;
}

void ensure_grad(TensorNode& n) {
  if (n.grad.size() != n.value.size()) n.grad.assign(n.value.size(), 0.0);
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw MismatchError(std::string(op) + ": shape mismatch");
  }
}

}  // namespace

Tensor Tensor::constant(const Mat& m) {
  auto n = make_node(m.rows, m.cols);
  n->value = m.v;
  return Tensor(n);
}

Tensor Tensor::constant(std::size_t rows, std::size_t cols, std::vector<double> data) {
  return constant(Mat(rows, cols, std::move(data)));
}

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
  auto n = make_node(rows, cols);
  n->requires_grad = requires_grad;
  return Tensor(n);
}

Tensor Tensor::parameter(const Mat& m) {
  auto n = make_node(m.rows, m.cols);
  n->value = m.v;
  n->requires_grad = true;
  return Tensor(n);
}

double Tensor::item() const {
  if (size() != 1) throw InvalidArgument("Tensor::item: tensor is not scalar");
  return node_->value[0];
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) throw MismatchError("matmul: inner dimensions differ");
  const std::size_t R = a.rows(), K = a.cols(), C = b.cols();
  auto n = make_op(R, C, {a.node(), b.node()});
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t k = 0; k < K; ++k) {
      const double x = av[r * K + k];
      if (x == 0.0) continue;
      for (std::size_t c = 0; c < C; ++c) n->value[r * C + c] += x * bv[k * C + c];
    }
  }
  n->backward = [R, K, C](TensorNode& out) {
    auto& pa = *out.parents[0];
    auto& pb = *out.parents[1];
    if (pa.requires_grad) {
      for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t c = 0; c < C; ++c) {
          const double g = out.grad[r * C + c];
          if (g == 0.0) continue;
          for (std::size_t k = 0; k < K; ++k) pa.grad[r * K + k] += g * pb.value[k * C + c];
        }
      }
    }
    if (pb.requires_grad) {
      for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t k = 0; k < K; ++k) {
          const double x = pa.value[r * K + k];
          if (x == 0.0) continue;
          for (std::size_t c = 0; c < C; ++c) pb.grad[k * C + c] += x * out.grad[r * C + c];
        }
      }
    }
  };
  return Tensor(n);
}

Tensor transpose(const Tensor& a) {
  const std::size_t R = a.rows(), C = a.cols();
  auto n = make_op(C, R, {a.node()});
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c) n->value[c * R + r] = a.values()[r * C + c];
  n->backward = [R, C](TensorNode& out) {
    auto& pa = *out.parents[0];
    if (!pa.requires_grad) return;
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < C; ++c) pa.grad[r * C + c] += out.grad[c * R + r];
  };
  return Tensor(n);
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  auto n = make_op(a.rows(), a.cols(), {a.node(), b.node()});
  for (std::size_t i = 0; i < n->value.size(); ++i) n->value[i] = a.values()[i] + b.values()[i];
  n->backward = [](TensorNode& out) {
    for (int side = 0; side < 2; ++side) {
      auto& p = *out.parents[side];
      if (!p.requires_grad) continue;
      for (std::size_t i = 0; i < out.grad.size(); ++i) p.grad[i] += out.grad[i];
    }
  };
  return Tensor(n);
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  auto n = make_op(a.rows(), a.cols(), {a.node(), b.node()});
  for (std::size_t i = 0; i < n->value.size(); ++i) n->value[i] = a.values()[i] - b.values()[i];
  n->backward = [](TensorNode& out) {
    auto& pa = *out.parents[0];
    auto& pb = *out.parents[1];
    if (pa.requires_grad)
      for (std::size_t i = 0; i < out.grad.size(); ++i) pa.grad[i] += out.grad[i];
    if (pb.requires_grad)
      for (std::size_t i = 0; i < out.grad.size(); ++i) pb.grad[i] -= out.grad[i];
  };
  return Tensor(n);
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "hadamard");
  auto n = make_op(a.rows(), a.cols(), {a.node(), b.node()});
  for (std::size_t i = 0; i < n->value.size(); ++i) n->value[i] = a.values()[i] * b.values()[i];
  n->backward = [](TensorNode& out) {
    auto& pa = *out.parents[0];
    auto& pb = *out.parents[1];
    if (pa.requires_grad)
      for (std::size_t i = 0; i < out.grad.size(); ++i) pa.grad[i] += out.grad[i] * pb.value[i];
    if (pb.requires_grad)
      for (std::size_t i = 0; i < out.grad.size(); ++i) pb.grad[i] += out.grad[i] * pa.value[i];
  };
  return Tensor(n);
}

Tensor scale(const Tensor& a, double s) {
  auto n = make_op(a.rows(), a.cols(), {a.node()});
  for (std::size_t i = 0; i < n->value.size(); ++i) n->value[i] = s * a.values()[i];
  n->backward = [s](TensorNode& out) {
    auto& pa = *out.parents[0];
    if (!pa.requires_grad) return;
    for (std::size_t i = 0; i < out.grad.size(); ++i) pa.grad[i] += s * out.grad[i];
  };
  return Tensor(n);
}

Tensor add_rowvec(const Tensor& a, const Tensor& bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols())
    throw MismatchError("add_rowvec: bias must be 1 x cols(a)");
  const std::size_t R = a.rows(), C = a.cols();
  auto n = make_op(R, C, {a.node(), bias.node()});
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c) n->value[r * C + c] = a.values()[r * C + c] + bias.values()[c];
  n->backward = [R, C](TensorNode& out) {
    auto& pa = *out.parents[0];
    auto& pb = *out.parents[1];
    if (pa.requires_grad)
      for (std::size_t i = 0; i < out.grad.size(); ++i) pa.grad[i] += out.grad[i];
    if (pb.requires_grad) {
      for (std::size_t r = 0; r < R; ++r)
        for (std::size_t c = 0; c < C; ++c) pb.grad[c] += out.grad[r * C + c];
    }
  };
  return Tensor(n);
}

Tensor relu(const Tensor& a) {
  auto n = make_op(a.rows(), a.cols(), {a.node()});
  for (std::size_t i = 0; i < n->value.size(); ++i)
    n->value[i] = a.values()[i] > 0.0 ? a.values()[i] : 0.0;
  n->backward = [](TensorNode& out) {
    auto& pa = *out.parents[0];
    if (!pa.requires_grad) return;
    for (std::size_t i = 0; i < out.grad.size(); ++i)
      if (pa.value[i] > 0.0) pa.grad[i] += out.grad[i];
  };
  return Tensor(n);
}

Tensor softmax_rows(const Tensor& a) {
  const std::size_t R = a.rows(), C = a.cols();
  auto n = make_op(R, C, {a.node()});
  for (std::size_t r = 0; r < R; ++r) {
    double m = a.values()[r * C];
    for (std::size_t c = 1; c < C; ++c) m = std::max(m, a.values()[r * C + c]);
    double s = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      const double e = std::exp(a.values()[r * C + c] - m);
      n->value[r * C + c] = e;
      s += e;
    }
    for (std::size_t c = 0; c < C; ++c) n->value[r * C + c] /= s;
  }
  n->backward = [R, C](TensorNode& out) {
    auto& pa = *out.parents[0];
    if (!pa.requires_grad) return;
    for (std::size_t r = 0; r < R; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < C; ++c) dot += out.grad[r * C + c] * out.value[r * C + c];
      for (std::size_t c = 0; c < C; ++c)
        pa.grad[r * C + c] += out.value[r * C + c] * (out.grad[r * C + c] - dot);
    }
  };
  return Tensor(n);
}

Tensor layer_norm_rows(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps) {
  if (gain.rows() != 1 || gain.cols() != a.cols() || bias.rows() != 1 || bias.cols() != a.cols())
    throw MismatchError("layer_norm_rows: gain/bias must be 1 x cols(a)");
  const std::size_t R = a.rows(), C = a.cols();
  auto n = make_op(R, C, {a.node(), gain.node(), bias.node()});
  std::vector<double> xhat(R * C);
  std::vector<double> inv_std(R);
  for (std::size_t r = 0; r < R; ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < C; ++c) mean += a.values()[r * C + c];
    mean /= static_cast<double>(C);
    double var = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      const double d = a.values()[r * C + c] - mean;
      var += d * d;
    }
    var /= static_cast<double>(C);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[r] = is;
    for (std::size_t c = 0; c < C; ++c) {
      const double xh = (a.values()[r * C + c] - mean) * is;
      xhat[r * C + c] = xh;
      n->value[r * C + c] = gain.values()[c] * xh + bias.values()[c];
    }
  }
  n->backward = [R, C, xhat = std::move(xhat), inv_std = std::move(inv_std)](TensorNode& out) {
    auto& pa = *out.parents[0];
    auto& pg = *out.parents[1];
    auto& pb = *out.parents[2];
    for (std::size_t r = 0; r < R; ++r) {
      if (pa.requires_grad) {
        double mean_dxh = 0.0, mean_dxh_xh = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
          const double dxh = out.grad[r * C + c] * pg.value[c];
          mean_dxh += dxh;
          mean_dxh_xh += dxh * xhat[r * C + c];
        }
        mean_dxh /= static_cast<double>(C);
        mean_dxh_xh /= static_cast<double>(C);
        for (std::size_t c = 0; c < C; ++c) {
          const double dxh = out.grad[r * C + c] * pg.value[c];
          pa.grad[r * C + c] += (dxh - mean_dxh - xhat[r * C + c] * mean_dxh_xh) * inv_std[r];
        }
      }
      if (pg.requires_grad)
        for (std::size_t c = 0; c < C; ++c) pg.grad[c] += out.grad[r * C + c] * xhat[r * C + c];
      if (pb.requires_grad)
        for (std::size_t c = 0; c < C; ++c) pb.grad[c] += out.grad[r * C + c];
    }
  };
  return Tensor(n);
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw InvalidArgument("concat_cols: no parts");
  const std::size_t R = parts[0].rows();
  std::size_t C = 0;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    if (p.rows() != R) throw MismatchError("concat_cols: row counts differ");
    offsets.push_back(C);
    C += p.cols();
    parents.push_back(p.node());
  }
  auto n = make_op(R, C, std::move(parents));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::size_t pc = parts[i].cols();
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < pc; ++c)
        n->value[r * C + offsets[i] + c] = parts[i].values()[r * pc + c];
  }
  n->backward = [R, C, offsets](TensorNode& out) {
    for (std::size_t i = 0; i < out.parents.size(); ++i) {
      auto& p = *out.parents[i];
      if (!p.requires_grad) continue;
      const std::size_t pc = p.cols;
      for (std::size_t r = 0; r < R; ++r)
        for (std::size_t c = 0; c < pc; ++c)
          p.grad[r * pc + c] += out.grad[r * C + offsets[i] + c];
    }
  };
  return Tensor(n);
}

Tensor slice_cols(const Tensor& a, std::size_t first, std::size_t count) {
  if (first + count > a.cols()) throw InvalidArgument("slice_cols: out of range");
  const std::size_t R = a.rows(), C = a.cols();
  auto n = make_op(R, count, {a.node()});
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < count; ++c) n->value[r * count + c] = a.values()[r * C + first + c];
  n->backward = [R, C, first, count](TensorNode& out) {
    auto& pa = *out.parents[0];
    if (!pa.requires_grad) return;
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < count; ++c)
        pa.grad[r * C + first + c] += out.grad[r * count + c];
  };
  return Tensor(n);
}

Tensor slice_rows(const Tensor& a, std::size_t first, std::size_t count) {
  if (first + count > a.rows()) throw InvalidArgument("slice_rows: out of range");
  const std::size_t C = a.cols();
  auto n = make_op(count, C, {a.node()});
  for (std::size_t r = 0; r < count; ++r)
    for (std::size_t c = 0; c < C; ++c) n->value[r * C + c] = a.values()[(first + r) * C + c];
  n->backward = [C, first, count](TensorNode& out) {
    auto& pa = *out.parents[0];
    if (!pa.requires_grad) return;
    for (std::size_t r = 0; r < count; ++r)
      for (std::size_t c = 0; c < C; ++c) pa.grad[(first + r) * C + c] += out.grad[r * C + c];
  };
  return Tensor(n);
}

Tensor gather_cols(const Tensor& a, const std::vector<std::size_t>& indices) {
  const std::size_t R = a.rows(), C = a.cols(), K = indices.size();
  for (std::size_t idx : indices)
    if (idx >= C) throw InvalidArgument("gather_cols: index out of range");
  auto n = make_op(R, K, {a.node()});
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t j = 0; j < K; ++j) n->value[r * K + j] = a.values()[r * C + indices[j]];
  n->backward = [R, C, K, indices](TensorNode& out) {
    auto& pa = *out.parents[0];
    if (!pa.requires_grad) return;
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t j = 0; j < K; ++j) pa.grad[r * C + indices[j]] += out.grad[r * K + j];
  };
  return Tensor(n);
}

Tensor resample_rows(const Tensor& a, std::size_t out_rows) {
  if (out_rows == 0) throw InvalidArgument("resample_rows: zero output rows");
  const std::size_t R = a.rows(), C = a.cols();
  auto n = make_op(out_rows, C, {a.node()});
  std::vector<std::size_t> lo(out_rows), hi(out_rows);
  std::vector<double> frac(out_rows);
  for (std::size_t t = 0; t < out_rows; ++t) {
    double pos = 0.0;
    if (out_rows > 1 && R > 1)
      pos = static_cast<double>(t) * static_cast<double>(R - 1) / static_cast<double>(out_rows - 1);
    const std::size_t i0 = static_cast<std::size_t>(pos);
    lo[t] = i0;
    hi[t] = (i0 + 1 < R) ? i0 + 1 : i0;
    frac[t] = pos - static_cast<double>(i0);
    for (std::size_t c = 0; c < C; ++c)
      n->value[t * C + c] =
          (1.0 - frac[t]) * a.values()[lo[t] * C + c] + frac[t] * a.values()[hi[t] * C + c];
  }
  n->backward = [C, lo = std::move(lo), hi = std::move(hi), frac = std::move(frac)](TensorNode& out) {
    auto& pa = *out.parents[0];
    if (!pa.requires_grad) return;
    for (std::size_t t = 0; t < out.rows; ++t) {
      for (std::size_t c = 0; c < C; ++c) {
        const double g = out.grad[t * C + c];
        pa.grad[lo[t] * C + c] += (1.0 - frac[t]) * g;
        pa.grad[hi[t] * C + c] += frac[t] * g;
      }
    }
  };
  return Tensor(n);
}

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t kernel,
              std::size_t stride) {
  const std::size_t N = x.rows(), Cin = x.cols(), Cout = w.rows();
  if (stride == 0) throw InvalidArgument("conv1d: zero stride");
  if (w.cols() != Cin * kernel) throw MismatchError("conv1d: weight shape must be Cout x (Cin*kernel)");
  if (b.rows() != 1 || b.cols() != Cout) throw MismatchError("conv1d: bias must be 1 x Cout");
  if (N < kernel) throw InvalidArgument("conv1d: input shorter than kernel");
  const std::size_t T = (N - kernel) / stride + 1;
  auto n = make_op(T, Cout, {x.node(), w.node(), b.node()});
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t o = 0; o < Cout; ++o) {
      double acc = b.values()[o];
      for (std::size_t c = 0; c < Cin; ++c)
        for (std::size_t i = 0; i < kernel; ++i)
          acc += x.values()[(t * stride + i) * Cin + c] * w.values()[o * (Cin * kernel) + c * kernel + i];
      n->value[t * Cout + o] = acc;
    }
  }
  n->backward = [N, Cin, Cout, kernel, stride, T](TensorNode& out) {
    auto& px = *out.parents[0];
    auto& pw = *out.parents[1];
    auto& pb = *out.parents[2];
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t o = 0; o < Cout; ++o) {
        const double g = out.grad[t * Cout + o];
        if (g == 0.0) continue;
        if (pb.requires_grad) pb.grad[o] += g;
        for (std::size_t c = 0; c < Cin; ++c) {
          for (std::size_t i = 0; i < kernel; ++i) {
            const std::size_t xi = (t * stride + i) * Cin + c;
            const std::size_t wi = o * (Cin * kernel) + c * kernel + i;
            if (pw.requires_grad) pw.grad[wi] += g * px.value[xi];
            if (px.requires_grad) px.grad[xi] += g * pw.value[wi];
          }
        }
      }
    }
  };
  return Tensor(n);
}

Tensor sum_all(const Tensor& a) {
  auto n = make_op(1, 1, {a.node()});
  double s = 0.0;
  for (double v : a.values()) s += v;
  n->value[0] = s;
  n->backward = [](TensorNode& out) {
    auto& pa = *out.parents[0];
    if (!pa.requires_grad) return;
    for (std::size_t i = 0; i < pa.grad.size(); ++i) pa.grad[i] += out.grad[0];
  };
  return Tensor(n);
}

Tensor mean_all(const Tensor& a) {
  return scale(sum_all(a), 1.0 / static_cast<double>(a.size()));
}

Tensor make_custom_op(std::size_t rows, std::size_t cols, const std::vector<Tensor>& parents,
                      std::function<void(TensorNode&)> backward_fn) {
  std::vector<std::shared_ptr<TensorNode>> nodes;
  nodes.reserve(parents.size());
  for (const auto& p : parents) nodes.push_back(p.node());
  auto n = make_op(rows, cols, std::move(nodes));
  n->backward = std::move(backward_fn);
  return Tensor(n);
}

void backward(const Tensor& loss) {
  if (loss.size() != 1) throw InvalidArgument("backward: loss must be scalar");
  if (!loss.requires_grad()) return;

  // Post-order DFS, then sweep in reverse (children before parents).
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> seen;
  std::vector<std::pair<TensorNode*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorNode* p = node->parents[next++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (TensorNode* n : order) ensure_grad(*n);
  loss.node()->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

void zero_grad(const Tensor& t) {
  auto& g = t.node()->grad;
  std::fill(g.begin(), g.end(), 0.0);
}

}  // namespace selftalk
