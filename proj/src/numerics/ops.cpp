// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "streamrope/numerics/errors.hpp"

namespace streamrope::numerics {

namespace {

void require_same_shape(const char* op, Var a, Var b) {
  if (!a.value().same_shape(b.value())) {
    throw ConfigurationError(std::string(op) + ": shape mismatch " +
                             std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                             std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

void require_same_tape(Var a, Var b) {
  if (&a.tape() != &b.tape()) throw ConfigurationError("operands recorded on different tapes");
}

template <typename F>
DenseMatrix map_values(const DenseMatrix& in, F f) {
  DenseMatrix out(in.rows(), in.cols());
  for (std::size_t i = 0; i < in.size(); ++i) out.values()[i] = f(in.values()[i]);
  return out;
}

// Elementwise op whose derivative depends only on the input value.
template <typename F, typename D>
Var unary(Var a, F f, D df) {
  Tape& t = a.tape();
  return t.record(map_values(a.value(), f), {a}, [a, df](Tape& tp, Var self) {
    const DenseMatrix& g = tp.grad(self);
    const DenseMatrix& x = a.value();
    DenseMatrix ga(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) ga.values()[i] = g.values()[i] * df(x.values()[i]);
    tp.accumulate(a, ga);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  Tape& t = a.tape();
  return t.record(numerics::matmul(a.value(), b.value()), {a, b}, [a, b](Tape& tp, Var self) {
    const DenseMatrix& g = tp.grad(self);
    if (tp.requires_grad(a)) tp.accumulate(a, numerics::matmul_nt(g, b.value()));
    if (tp.requires_grad(b)) tp.accumulate(b, numerics::matmul_tn(a.value(), g));
  });
}

Var matmul_nt(Var a, Var b) {
  require_same_tape(a, b);
  Tape& t = a.tape();
  return t.record(numerics::matmul_nt(a.value(), b.value()), {a, b}, [a, b](Tape& tp, Var self) {
    const DenseMatrix& g = tp.grad(self);
    if (tp.requires_grad(a)) tp.accumulate(a, numerics::matmul(g, b.value()));
    if (tp.requires_grad(b)) tp.accumulate(b, numerics::matmul_tn(g, a.value()));
  });
}

Var add(Var a, Var b) {
  require_same_tape(a, b);
  require_same_shape("add", a, b);
  DenseMatrix out = a.value();
  out += b.value();
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& tp, Var self) {
    const DenseMatrix& g = tp.grad(self);
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  require_same_tape(a, b);
  require_same_shape("sub", a, b);
  DenseMatrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] -= b.value().values()[i];
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& tp, Var self) {
    const DenseMatrix& g = tp.grad(self);
    tp.accumulate(a, g);
    if (tp.requires_grad(b)) {
      DenseMatrix neg = g;
      for (double& v : neg.values()) v = -v;
      tp.accumulate(b, neg);
    }
  });
}

Var hadamard(Var a, Var b) {
  require_same_tape(a, b);
  require_same_shape("hadamard", a, b);
  DenseMatrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= b.value().values()[i];
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& tp, Var self) {
    const DenseMatrix& g = tp.grad(self);
    if (tp.requires_grad(a)) {
      DenseMatrix ga = g;
      for (std::size_t i = 0; i < ga.size(); ++i) ga.values()[i] *= b.value().values()[i];
      tp.accumulate(a, ga);
    }
    if (tp.requires_grad(b)) {
      DenseMatrix gb = g;
      for (std::size_t i = 0; i < gb.size(); ++i) gb.values()[i] *= a.value().values()[i];
      tp.accumulate(b, gb);
    }
  });
}

Var add_row(Var a, Var row) {
  require_same_tape(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw ConfigurationError("add_row: row must be 1x" + std::to_string(a.cols()));
  }
  DenseMatrix out = a.value();
  const auto r = row.value().row(0);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += r[c];
  }
  return a.tape().record(std::move(out), {a, row}, [a, row](Tape& tp, Var self) {
    const DenseMatrix& g = tp.grad(self);
    tp.accumulate(a, g);
    if (tp.requires_grad(row)) {
      DenseMatrix gr(1, g.cols());
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t c = 0; c < g.cols(); ++c) gr(0, c) += g(i, c);
      tp.accumulate(row, gr);
    }
  });
}

Var scale(Var a, double factor) { return affine(a, factor, 0.0); }

Var affine(Var a, double factor, double shift) {
  return unary(
      a, [factor, shift](double x) { return factor * x + shift; },
      [factor](double) { return factor; });
}

Var clamp(Var a, double lo, double hi) {
  return unary(
      a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

Var sum(Var a) {
  double total = 0.0;
  for (double v : a.value().values()) total += v;
  return a.tape().record(DenseMatrix(1, 1, total), {a}, [a](Tape& tp, Var self) {
    tp.accumulate(a, DenseMatrix(a.rows(), a.cols(), tp.grad(self)(0, 0)));
  });
}

Var mean(Var a) {
  if (a.value().empty()) throw ConfigurationError("mean of empty matrix");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var softmax_rows(Var m) {
  Tape& t = m.tape();
  return t.record(numerics::softmax_rows(m.value()), {m}, [m](Tape& tp, Var self) {
    const DenseMatrix& g = tp.grad(self);
    const DenseMatrix& y = self.value();
    DenseMatrix gm(y.rows(), y.cols());
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) gm(r, c) = y(r, c) * (g(r, c) - dot);
    }
    tp.accumulate(m, gm);
  });
}

Var layer_norm_affine(Var x, Var gain, Var bias, double eps) {
  require_same_tape(x, gain);
  require_same_tape(x, bias);
  const DenseMatrix& xv = x.value();
  const std::size_t n = xv.cols();
  if (gain.rows() != 1 || gain.cols() != n || bias.rows() != 1 || bias.cols() != n) {
    throw ConfigurationError("layer_norm_affine: gain/bias must be 1x" + std::to_string(n));
  }
  // Normalized activations and inverse std are kept for the backward pass.
  auto xhat = std::make_shared<DenseMatrix>(xv.rows(), n);
  auto inv_std = std::make_shared<std::vector<double>>(xv.rows());
  DenseMatrix out(xv.rows(), n);
  const auto gv = gain.value().row(0);
  const auto bv = bias.value().row(0);
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    double mu = 0.0;
    for (double v : xv.row(r)) mu += v;
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (double v : xv.row(r)) var += (v - mu) * (v - mu);
    var /= static_cast<double>(n);
    (*inv_std)[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < n; ++c) {
      (*xhat)(r, c) = (xv(r, c) - mu) * (*inv_std)[r];
      out(r, c) = gv[c] * (*xhat)(r, c) + bv[c];
    }
  }
  return x.tape().record(
      std::move(out), {x, gain, bias}, [x, gain, bias, xhat, inv_std](Tape& tp, Var self) {
        const DenseMatrix& g = tp.grad(self);
        const std::size_t rows = g.rows();
        const std::size_t cols = g.cols();
        const double inv_n = 1.0 / static_cast<double>(cols);
        if (tp.requires_grad(gain) || tp.requires_grad(bias)) {
          DenseMatrix gg(1, cols), gb(1, cols);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) {
              gg(0, c) += g(r, c) * (*xhat)(r, c);
              gb(0, c) += g(r, c);
            }
          tp.accumulate(gain, gg);
          tp.accumulate(bias, gb);
        }
        if (tp.requires_grad(x)) {
          const auto gv = gain.value().row(0);
          DenseMatrix gx(rows, cols);
          for (std::size_t r = 0; r < rows; ++r) {
            double mean_d = 0.0, mean_dx = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
              const double d = g(r, c) * gv[c];
              mean_d += d;
              mean_dx += d * (*xhat)(r, c);
            }
            mean_d *= inv_n;
            mean_dx *= inv_n;
            for (std::size_t c = 0; c < cols; ++c) {
              const double d = g(r, c) * gv[c];
              gx(r, c) = (*inv_std)[r] * (d - mean_d - (*xhat)(r, c) * mean_dx);
            }
          }
          tp.accumulate(x, gx);
        }
      });
}

Var gelu(Var a) {
  // tanh approximation; smooth everywhere, which keeps finite-difference checks exact.
  constexpr double k = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double c = 0.044715;
  return unary(
      a,
      [](double x) { return 0.5 * x * (1.0 + std::tanh(k * (x + c * x * x * x))); },
      [](double x) {
        const double u = k * (x + c * x * x * x);
        const double th = std::tanh(u);
        const double du = k * (1.0 + 3.0 * c * x * x);
        return 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * du;
      });
}

Var sigmoid(Var a) {
  auto f = [](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  };
  return unary(a, f, [f](double x) {
    const double s = f(x);
    return s * (1.0 - s);
  });
}

Var abs(Var a) {
  return unary(
      a, [](double x) { return std::abs(x); },
      [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var square(Var a) {
  return unary(a, [](double x) { return x * x; }, [](double x) { return 2.0 * x; });
}

Var bce_with_logits(Var logits, const DenseMatrix& targets) {
  if (!logits.value().same_shape(targets)) throw ConfigurationError("bce_with_logits: shape mismatch");
  const DenseMatrix& z = logits.value();
  DenseMatrix out(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double x = z.values()[i];
    const double softplus = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
    out.values()[i] = softplus - targets.values()[i] * x;
  }
  return logits.tape().record(std::move(out), {logits}, [logits, targets](Tape& tp, Var self) {
    const DenseMatrix& g = tp.grad(self);
    const DenseMatrix& zv = logits.value();
    DenseMatrix gz(zv.rows(), zv.cols());
    for (std::size_t i = 0; i < zv.size(); ++i) {
      const double x = zv.values()[i];
      const double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
      gz.values()[i] = g.values()[i] * (s - targets.values()[i]);
    }
    tp.accumulate(logits, gz);
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ConfigurationError("concat_rows: no inputs");
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const Var& p : parts) {
    require_same_tape(parts.front(), p);
    if (p.cols() != cols) throw ConfigurationError("concat_rows: column count mismatch");
    rows += p.rows();
  }
  DenseMatrix out(rows, cols);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    std::copy(p.value().values().begin(), p.value().values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(offset * cols));
    offset += p.rows();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts.front().tape().record(std::move(out), parts, [inputs](Tape& tp, Var self) {
    const DenseMatrix& g = tp.grad(self);
    std::size_t offset = 0;
    for (const Var& p : inputs) {
      if (tp.requires_grad(p)) {
        DenseMatrix& dst = tp.grad_buffer(p);
        const double* src = g.data() + offset * g.cols();
        for (std::size_t i = 0; i < dst.size(); ++i) dst.values()[i] += src[i];
      }
      offset += p.rows();
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ConfigurationError("concat_cols: no inputs");
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    require_same_tape(parts.front(), p);
    if (p.rows() != rows) throw ConfigurationError("concat_cols: row count mismatch");
    cols += p.cols();
  }
  DenseMatrix out(rows, cols);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const DenseMatrix& v = p.value();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < v.cols(); ++c) out(r, offset + c) = v(r, c);
    offset += v.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts.front().tape().record(std::move(out), parts, [inputs](Tape& tp, Var self) {
    const DenseMatrix& g = tp.grad(self);
    std::size_t offset = 0;
    for (const Var& p : inputs) {
      if (tp.requires_grad(p)) {
        DenseMatrix& dst = tp.grad_buffer(p);
        for (std::size_t r = 0; r < dst.rows(); ++r)
          for (std::size_t c = 0; c < dst.cols(); ++c) dst(r, c) += g(r, offset + c);
      }
      offset += p.cols();
    }
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  const DenseMatrix& v = a.value();
  if (begin + count > v.cols()) throw ConfigurationError("slice_cols: range out of bounds");
  DenseMatrix out(v.rows(), count);
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t c = 0; c < count; ++c) out(r, c) = v(r, begin + c);
  return a.tape().record(std::move(out), {a}, [a, begin](Tape& tp, Var self) {
    if (!tp.requires_grad(a)) return;
    const DenseMatrix& g = tp.grad(self);
    DenseMatrix& dst = tp.grad_buffer(a);
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) dst(r, begin + c) += g(r, c);
  });
}

Var gather_rows(Var a, std::span<const std::size_t> rows) {
  const DenseMatrix& v = a.value();
  DenseMatrix out(rows.size(), v.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= v.rows()) throw ConfigurationError("gather_rows: index out of range");
    std::copy(v.row(rows[i]).begin(), v.row(rows[i]).end(), out.row(i).begin());
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return a.tape().record(std::move(out), {a}, [a, idx](Tape& tp, Var self) {
    if (!tp.requires_grad(a)) return;
    const DenseMatrix& g = tp.grad(self);
    DenseMatrix& dst = tp.grad_buffer(a);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t c = 0; c < g.cols(); ++c) dst(idx[i], c) += g(i, c);
  });
}

}  // namespace streamrope::numerics
