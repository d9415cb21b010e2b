#include "consist/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace consist::ad {

double Var::value() const { return tape->value(id); }
double Var::grad() const { return tape->grad(id); }

int Tape::push(double value, std::uint32_t begin, std::uint32_t count) {
  values_.push_back(value);
  grads_.push_back(0.0);
  arg_begin_.push_back(begin);
  arg_count_.push_back(count);
  return static_cast<int>(values_.size()) - 1;
}

Var Tape::leaf(double value) {
  return Var{this, push(value, static_cast<std::uint32_t>(args_.size()), 0)};
}

Var Tape::make1(double value, Var a, double da) {
  const auto begin = static_cast<std::uint32_t>(args_.size());
  args_.push_back(a.id);
  partials_.push_back(da);
  return Var{this, push(value, begin, 1)};
}

Var Tape::make2(double value, Var a, double da, Var b, double db) {
  const auto begin = static_cast<std::uint32_t>(args_.size());
  args_.push_back(a.id);
  args_.push_back(b.id);
  partials_.push_back(da);
  partials_.push_back(db);
  return Var{this, push(value, begin, 2)};
}

Var Tape::make_n(double value, std::span<const Var> args, std::span<const double> partials) {
  const auto begin = static_cast<std::uint32_t>(args_.size());
  for (std::size_t i = 0; i < args.size(); ++i) {
    args_.push_back(args[i].id);
    partials_.push_back(partials[i]);
  }
  return Var{this, push(value, begin, static_cast<std::uint32_t>(args.size()))};
}

Var Tape::dot(std::span<const Var> a, std::span<const Var> b) {
  const auto begin = static_cast<std::uint32_t>(args_.size());
  double value = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double av = values_[a[i].id], bv = values_[b[i].id];
    value += av * bv;
    args_.push_back(a[i].id);
    partials_.push_back(bv);
    args_.push_back(b[i].id);
    partials_.push_back(av);
  }
  return Var{this, push(value, begin, static_cast<std::uint32_t>(2 * a.size()))};
}

Var Tape::dot_const(std::span<const Var> a, std::span<const double> x) {
  const auto begin = static_cast<std::uint32_t>(args_.size());
  double value = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    value += values_[a[i].id] * x[i];
    args_.push_back(a[i].id);
    partials_.push_back(x[i]);
  }
  return Var{this, push(value, begin, static_cast<std::uint32_t>(a.size()))};
}

void Tape::backward(Var root) {
  if (root.tape != this || root.id < 0 || root.id >= static_cast<int>(values_.size()))
    throw std::invalid_argument("backward: root is not a node of this tape");
  std::fill(grads_.begin(), grads_.end(), 0.0);
  grads_[root.id] = 1.0;
  for (int i = root.id; i >= 0; --i) {
    const double g = grads_[i];
    if (g == 0.0) continue;
    const std::uint32_t begin = arg_begin_[i];
    const std::uint32_t count = arg_count_[i];
    for (std::uint32_t a = 0; a < count; ++a)
      grads_[args_[begin + a]] += g * partials_[begin + a];
  }
}

void Tape::reset() {
  values_.clear();
  grads_.clear();
  arg_begin_.clear();
  arg_count_.clear();
  args_.clear();
  partials_.clear();
}

Var operator+(Var a, Var b) { return a.tape->make2(a.value() + b.value(), a, 1.0, b, 1.0); }
Var operator+(Var a, double b) { return a.tape->make1(a.value() + b, a, 1.0); }
Var operator+(double a, Var b) { return b + a; }
Var operator-(Var a, Var b) { return a.tape->make2(a.value() - b.value(), a, 1.0, b, -1.0); }
Var operator-(Var a) { return a.tape->make1(-a.value(), a, -1.0); }
Var operator*(Var a, Var b) {
  return a.tape->make2(a.value() * b.value(), a, b.value(), b, a.value());
}
Var operator*(double a, Var b) { return b.tape->make1(a * b.value(), b, a); }
Var operator*(Var a, double b) { return b * a; }

Var exp(Var a) {
  const double v = std::exp(a.value());
  return a.tape->make1(v, a, v);
}

Var log(Var a) {
  if (!(a.value() > 0.0)) throw std::domain_error("log of nonpositive value");
  return a.tape->make1(std::log(a.value()), a, 1.0 / a.value());
}

Var relu(Var a) {
  const bool on = a.value() > 0.0;
  return a.tape->make1(on ? a.value() : 0.0, a, on ? 1.0 : 0.0);
}

Var sigmoid(Var a) {
  const double x = a.value();
  const double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  return a.tape->make1(s, a, s * (1.0 - s));
}

Var softplus(Var a) {
  const double x = a.value();
  const double v = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  const double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  return a.tape->make1(v, a, s);
}

Var logsumexp(std::span<const Var> xs) {
  if (xs.empty()) throw std::invalid_argument("logsumexp of empty list");
  Tape* tape = xs[0].tape;
  double m = xs[0].value();
  for (const Var& x : xs) m = std::max(m, x.value());
  double total = 0.0;
  std::vector<double> shifted(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    shifted[i] = std::exp(xs[i].value() - m);
    total += shifted[i];
  }
  std::vector<double> partials(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) partials[i] = shifted[i] / total;
  return tape->make_n(m + std::log(total), xs, partials);
}

Var sum(std::span<const Var> xs) {
  if (xs.empty()) throw std::invalid_argument("sum of empty list");
  Tape* tape = xs[0].tape;
  double total = 0.0;
  std::vector<double> ones(xs.size(), 1.0);
  for (const Var& x : xs) total += x.value();
  return tape->make_n(total, xs, ones);
}

double grad_check(const std::function<Var(Tape&, std::span<const Var>)>& build,
                  std::span<const double> point, double h) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(point.size());
  for (double v : point) leaves.push_back(tape.leaf(v));
  Var root = build(tape, leaves);
  if (!std::isfinite(root.value())) throw std::runtime_error("grad_check: non-finite value");
  tape.backward(root);
  std::vector<double> analytic(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) analytic[i] = leaves[i].grad();

  auto eval = [&build](std::span<const double> x) {
    Tape t;
    std::vector<Var> ls;
    ls.reserve(x.size());
    for (double v : x) ls.push_back(t.leaf(v));
    const double value = build(t, ls).value();
    if (!std::isfinite(value)) throw std::runtime_error("grad_check: non-finite value");
    return value;
  };

  std::vector<double> x(point.begin(), point.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = eval(x);
    x[i] = saved - h;
    const double down = eval(x);
    x[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double err = std::abs(fd - analytic[i]) /
                       std::max(1e-8, std::abs(fd) + std::abs(analytic[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace consist::ad
