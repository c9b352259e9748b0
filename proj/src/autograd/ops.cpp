// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include "coherence/autograd/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coherence/util/error.hpp"

namespace coherence::autograd {
namespace {

Tape& same_tape(std::initializer_list<Var> vars) {
  Tape* tape = nullptr;
  for (const Var& v : vars) {
    if (v.tape == nullptr) throw Error("op input is not attached to a tape");
    if (tape != nullptr && v.tape != tape) throw Error("op inputs live on different tapes");
    tape = v.tape;
  }
  return *tape;
}

Tape& same_tape(std::span<const Var> vars) {
  if (vars.empty()) throw Error("op needs at least one input");
  Tape* tape = vars[0].tape;
  for (const Var& v : vars) {
    if (v.tape == nullptr) throw Error("op input is not attached to a tape");
    if (v.tape != tape) throw Error("op inputs live on different tapes");
  }
  return *tape;
}

[[noreturn]] void mismatch(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " +
                   shape_string(b));
}

template <class F, class D>
Var unary(Var a, F forward, D derivative) {
  Tape& tape = same_tape({a});
  const Tensor& x = a.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = forward(x[i]);
  return tape.record(std::move(out), {a.id}, [derivative](BackwardContext& ctx) {
    auto gx = ctx.in_grad(0);
    if (gx.empty()) return;
    const auto& x = ctx.in(0);
    const auto& y = ctx.out();
    auto gy = ctx.out_grad();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i] * derivative(x[i], y[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = same_tape({a, b});
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.rank() != 2 || B.rank() != 2 || A.dim(1) != B.dim(0)) mismatch("matmul", A.shape(), B.shape());
  const std::size_t m = A.dim(0), k = A.dim(1), n = B.dim(1);
  Tensor C(Shape{m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      for (std::size_t j = 0; j < n; ++j) C[i * n + j] += aip * B[p * n + j];
    }
  }
  return tape.record(std::move(C), {a.id, b.id}, [m, k, n](BackwardContext& ctx) {
    auto gC = ctx.out_grad();
    const auto& A = ctx.in(0);
    const auto& B = ctx.in(1);
    if (auto gA = ctx.in_grad(0); !gA.empty()) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += gC[i * n + j] * B[p * n + j];
          gA[i * k + p] += acc;
        }
    }
    if (auto gB = ctx.in_grad(1); !gB.empty()) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = A[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gB[p * n + j] += aip * gC[i * n + j];
        }
    }
  });
}

Var matvec(Var w, Var x) {
  const std::pair<Var, Var> term{w, x};
  return affine(std::span<const std::pair<Var, Var>>(&term, 1));
}

Var affine(std::span<const std::pair<Var, Var>> terms, std::optional<Var> bias) {
  if (terms.empty()) throw Error("affine: needs at least one term");
  std::vector<Var> all;
  for (const auto& [w, x] : terms) {
    all.push_back(w);
    all.push_back(x);
  }
  if (bias) all.push_back(*bias);
  Tape& tape = same_tape(std::span<const Var>(all));

  const std::size_t m = terms[0].first.value().rank() == 2 ? terms[0].first.value().dim(0) : 0;
  for (const auto& [w, x] : terms) {
    const Tensor& W = w.value();
    const Tensor& X = x.value();
    if (W.rank() != 2 || X.rank() != 1 || W.dim(1) != X.dim(0) || W.dim(0) != m) {
      mismatch("matvec", W.shape(), X.shape());
    }
  }
  if (bias && (bias->value().rank() != 1 || bias->value().dim(0) != m)) {
    mismatch("affine bias", Shape{m}, bias->value().shape());
  }

  Tensor y(Shape{m});
  if (bias) std::copy(bias->value().values().begin(), bias->value().values().end(), y.mutable_values().begin());
  for (const auto& [w, x] : terms) {
    const Tensor& W = w.value();
    const Tensor& X = x.value();
    const std::size_t k = X.size();
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      const double* wr = W.values().data() + i * k;
      for (std::size_t p = 0; p < k; ++p) acc += wr[p] * X[p];
      y[i] += acc;
    }
  }

  std::vector<std::size_t> ids;
  ids.reserve(all.size());
  for (const Var& v : all) ids.push_back(v.id);
  const std::size_t num_terms = terms.size();
  const bool has_bias = bias.has_value();
  return tape.record(std::move(y), std::move(ids), [num_terms, has_bias, m](BackwardContext& ctx) {
    auto gy = ctx.out_grad();
    for (std::size_t t = 0; t < num_terms; ++t) {
      const auto& W = ctx.in(2 * t);
      const auto& X = ctx.in(2 * t + 1);
      const std::size_t k = X.size();
      if (auto gW = ctx.in_grad(2 * t); !gW.empty()) {
        for (std::size_t i = 0; i < m; ++i) {
          const double g = gy[i];
          double* row = gW.data() + i * k;
          for (std::size_t p = 0; p < k; ++p) row[p] += g * X[p];
        }
      }
      if (auto gX = ctx.in_grad(2 * t + 1); !gX.empty()) {
        for (std::size_t i = 0; i < m; ++i) {
          const double g = gy[i];
          const double* wr = W.values().data() + i * k;
          for (std::size_t p = 0; p < k; ++p) gX[p] += g * wr[p];
        }
      }
    }
    if (has_bias) {
      if (auto gb = ctx.in_grad(2 * num_terms); !gb.empty()) {
        for (std::size_t i = 0; i < m; ++i) gb[i] += gy[i];
      }
    }
  });
}

Var add(Var a, Var b) {
  Tape& tape = same_tape({a, b});
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.shape() == B.shape()) {
    Tensor out(A.shape());
    for (std::size_t i = 0; i < A.size(); ++i) out[i] = A[i] + B[i];
    return tape.record(std::move(out), {a.id, b.id}, [](BackwardContext& ctx) {
      auto gy = ctx.out_grad();
      for (std::size_t k = 0; k < 2; ++k) {
        if (auto g = ctx.in_grad(k); !g.empty())
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
      }
    });
  }
  // Bias add along the last axis.
  if (B.rank() != 1 || A.rank() < 2 || A.shape().back() != B.dim(0)) mismatch("add", A.shape(), B.shape());
  const std::size_t n = B.size();
  Tensor out(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = A[i] + B[i % n];
  return tape.record(std::move(out), {a.id, b.id}, [n](BackwardContext& ctx) {
    auto gy = ctx.out_grad();
    if (auto g = ctx.in_grad(0); !g.empty())
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
    if (auto g = ctx.in_grad(1); !g.empty())
      for (std::size_t i = 0; i < gy.size(); ++i) g[i % n] += gy[i];
  });
}

Var sub(Var a, Var b) {
  Tape& tape = same_tape({a, b});
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.shape() != B.shape()) mismatch("sub", A.shape(), B.shape());
  Tensor out(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = A[i] - B[i];
  return tape.record(std::move(out), {a.id, b.id}, [](BackwardContext& ctx) {
    auto gy = ctx.out_grad();
    if (auto g = ctx.in_grad(0); !g.empty())
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
    if (auto g = ctx.in_grad(1); !g.empty())
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= gy[i];
  });
}

Var mul(Var a, Var b) {
  Tape& tape = same_tape({a, b});
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.shape() != B.shape()) mismatch("mul", A.shape(), B.shape());
  Tensor out(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = A[i] * B[i];
  return tape.record(std::move(out), {a.id, b.id}, [](BackwardContext& ctx) {
    auto gy = ctx.out_grad();
    const auto& A = ctx.in(0);
    const auto& B = ctx.in(1);
    if (auto g = ctx.in_grad(0); !g.empty())
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * B[i];
    if (auto g = ctx.in_grad(1); !g.empty())
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * A[i];
  });
}

Var scale(Var a, double factor) {
  return unary(
      a, [factor](double x) { return factor * x; }, [factor](double, double) { return factor; });
}

Var shift(Var a, double offset) {
  return unary(
      a, [offset](double x) { return x + offset; }, [](double, double) { return 1.0; });
}

Var tanh(Var a) {
  return unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(
      a,
      [](double x) {
        // Split by sign so exp never overflows.
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var log(Var a) {
  return unary(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var clamp(Var a, double lo, double hi) {
  return unary(
      a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var concat(std::span<const Var> parts) {
  Tape& tape = same_tape(parts);
  const Shape& first = parts[0].value().shape();
  const Shape lead(first.begin(), first.end() - 1);
  const std::size_t outer = element_count(lead.empty() ? Shape{1} : lead);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    const Shape& s = p.value().shape();
    if (s.size() != first.size() || !std::equal(lead.begin(), lead.end(), s.begin())) {
      mismatch("concat_last_axis", first, s);
    }
    widths.push_back(s.back());
    total += s.back();
  }
  Shape out_shape = lead;
  out_shape.push_back(total);
  Tensor out(out_shape);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& P = parts[k].value();
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t j = 0; j < widths[k]; ++j) out[o * total + offset + j] = P[o * widths[k] + j];
    offset += widths[k];
  }
  std::vector<std::size_t> ids;
  for (const Var& p : parts) ids.push_back(p.id);
  return tape.record(std::move(out), std::move(ids), [widths, outer, total](BackwardContext& ctx) {
    auto gy = ctx.out_grad();
    std::size_t offset = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      if (auto g = ctx.in_grad(k); !g.empty()) {
        for (std::size_t o = 0; o < outer; ++o)
          for (std::size_t j = 0; j < widths[k]; ++j) g[o * widths[k] + j] += gy[o * total + offset + j];
      }
      offset += widths[k];
    }
  });
}

Var sum(Var a) {
  Tape& tape = same_tape({a});
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return tape.record(Tensor::scalar(s), {a.id}, [](BackwardContext& ctx) {
    if (auto g = ctx.in_grad(0); !g.empty()) {
      const double gy = ctx.out_grad()[0];
      for (auto& x : g) x += gy;
    }
  });
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.size())); }

Var softmax(Var a) {
  Tape& tape = same_tape({a});
  const Tensor& x = a.value();
  if (x.rank() != 1) throw ShapeError("softmax: expected a vector, got " + shape_string(x.shape()));
  const double mx = *std::max_element(x.values().begin(), x.values().end());
  Tensor y(x.shape());
  double z = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = std::exp(x[i] - mx);
    z += y[i];
  }
  for (auto& v : y.mutable_values()) v /= z;
  return tape.record(std::move(y), {a.id}, [](BackwardContext& ctx) {
    auto g = ctx.in_grad(0);
    if (g.empty()) return;
    const auto& y = ctx.out();
    auto gy = ctx.out_grad();
    double dot = 0.0;
    for (std::size_t i = 0; i < gy.size(); ++i) dot += gy[i] * y[i];
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += y[i] * (gy[i] - dot);
  });
}

Var log_softmax(Var a) {
  Tape& tape = same_tape({a});
  const Tensor& x = a.value();
  if (x.rank() != 1) throw ShapeError("log_softmax: expected a vector, got " + shape_string(x.shape()));
  const double mx = *std::max_element(x.values().begin(), x.values().end());
  double z = 0.0;
  for (double v : x.values()) z += std::exp(v - mx);
  const double lse = mx + std::log(z);
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - lse;
  return tape.record(std::move(y), {a.id}, [](BackwardContext& ctx) {
    auto g = ctx.in_grad(0);
    if (g.empty()) return;
    const auto& y = ctx.out();
    auto gy = ctx.out_grad();
    double total = 0.0;
    for (double v : gy) total += v;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] - std::exp(y[i]) * total;
  });
}

Var pick(Var a, std::size_t i) {
  Tape& tape = same_tape({a});
  if (i >= a.size()) {
    throw ShapeError("pick: index " + std::to_string(i) + " out of range for shape " +
                     shape_string(a.shape()));
  }
  return tape.record(Tensor::scalar(a.value()[i]), {a.id}, [i](BackwardContext& ctx) {
    if (auto g = ctx.in_grad(0); !g.empty()) g[i] += ctx.out_grad()[0];
  });
}

Var stack(std::span<const Var> rows) {
  Tape& tape = same_tape(rows);
  const Shape& first = rows[0].value().shape();
  if (first.size() != 1) throw ShapeError("stack: rows must be vectors, got " + shape_string(first));
  const std::size_t d = first[0];
  Tensor out(Shape{rows.size(), d});
  std::vector<std::size_t> ids;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Tensor& v = rows[r].value();
    if (v.shape() != first) mismatch("stack", first, v.shape());
    std::copy(v.values().begin(), v.values().end(), out.mutable_values().begin() + r * d);
    ids.push_back(rows[r].id);
  }
  return tape.record(std::move(out), std::move(ids), [d](BackwardContext& ctx) {
    auto gy = ctx.out_grad();
    for (std::size_t r = 0; r < ctx.num_inputs(); ++r) {
      if (auto g = ctx.in_grad(r); !g.empty())
        for (std::size_t j = 0; j < d; ++j) g[j] += gy[r * d + j];
    }
  });
}

Var row(Var m, std::size_t i) {
  Tape& tape = same_tape({m});
  const Tensor& M = m.value();
  if (M.rank() != 2) throw ShapeError("row: expected a matrix, got " + shape_string(M.shape()));
  if (i >= M.dim(0)) {
    throw ShapeError("row: index " + std::to_string(i) + " out of range for " + shape_string(M.shape()));
  }
  const std::size_t c = M.dim(1);
  std::vector<double> v(M.values().begin() + i * c, M.values().begin() + (i + 1) * c);
  return tape.record(Tensor::vector(std::move(v)), {m.id}, [i, c](BackwardContext& ctx) {
    if (auto g = ctx.in_grad(0); !g.empty()) {
      auto gy = ctx.out_grad();
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += gy[j];
    }
  });
}

Var slice(Var a, std::size_t begin, std::size_t length) {
  Tape& tape = same_tape({a});
  const Tensor& A = a.value();
  if (A.rank() != 1 || length == 0 || begin + length > A.size()) {
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " + std::to_string(begin + length) +
                     ") invalid for " + shape_string(A.shape()));
  }
  std::vector<double> v(A.values().begin() + begin, A.values().begin() + begin + length);
  return tape.record(Tensor::vector(std::move(v)), {a.id}, [begin, length](BackwardContext& ctx) {
    if (auto g = ctx.in_grad(0); !g.empty()) {
      auto gy = ctx.out_grad();
      for (std::size_t j = 0; j < length; ++j) g[begin + j] += gy[j];
    }
  });
}

Var transpose(Var m) {
  Tape& tape = same_tape({m});
  const Tensor& M = m.value();
  if (M.rank() != 2) throw ShapeError("transpose: expected a matrix, got " + shape_string(M.shape()));
  const std::size_t r = M.dim(0), c = M.dim(1);
  Tensor out(Shape{c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = M[i * c + j];
  return tape.record(std::move(out), {m.id}, [r, c](BackwardContext& ctx) {
    if (auto g = ctx.in_grad(0); !g.empty()) {
      auto gy = ctx.out_grad();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[i * c + j] += gy[j * r + i];
    }
  });
}

Var reshape(Var a, Shape shape) {
  Tape& tape = same_tape({a});
  const Tensor& x = a.value();
  if (element_count(shape) != x.size()) mismatch("reshape", x.shape(), shape);
  std::vector<double> v(x.values().begin(), x.values().end());
  return tape.record(Tensor(std::move(shape), std::move(v)), {a.id}, [](BackwardContext& ctx) {
    if (auto g = ctx.in_grad(0); !g.empty()) {
      auto gy = ctx.out_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
    }
  });
}

Var pointwise(std::string_view op, std::span<const Var> inputs, double factor) {
  auto arity = [&](std::size_t n) {
    if (inputs.size() != n) {
      throw Error("pointwise " + std::string(op) + ": expected " + std::to_string(n) + " inputs, got " +
                  std::to_string(inputs.size()));
    }
  };
  if (op == "tanh") return arity(1), tanh(inputs[0]);
  if (op == "sigmoid") return arity(1), sigmoid(inputs[0]);
  if (op == "add") return arity(2), add(inputs[0], inputs[1]);
  if (op == "mul") return arity(2), mul(inputs[0], inputs[1]);
  if (op == "scale") return arity(1), scale(inputs[0], factor);
  if (op == "sum") return arity(1), sum(inputs[0]);
  if (op == "mean") return arity(1), mean(inputs[0]);
  if (op == "concat_last_axis") return concat(inputs);
  throw Error("pointwise: unsupported op '" + std::string(op) + "'");
}

}  // namespace coherence::autograd
