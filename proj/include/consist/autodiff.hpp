#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace consist::ad {

class Tape;

// Lightweight handle to a node on a tape. Copyable; valid while the owning
// tape is alive and not reset.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
  double value() const;
  double grad() const;
};

// Reverse-mode tape over scalars. Each node stores its value plus the local
// partial derivative with respect to every argument, computed at build
// time, so the backward pass is a single reverse sweep of multiply-adds.
// Nodes can only reference earlier nodes, which rules out cycles by
// construction. One tape per training step; not thread-safe.
class Tape {
 public:
  Var leaf(double value);
  Var constant(double value) { return leaf(value); }

  Var make1(double value, Var a, double da);
  Var make2(double value, Var a, double da, Var b, double db);
  Var make_n(double value, std::span<const Var> args, std::span<const double> partials);
  // Inner product with variable coefficients on both sides, as one node.
  Var dot(std::span<const Var> a, std::span<const Var> b);
  // Inner product of variables against plain constants, as one node.
  Var dot_const(std::span<const Var> a, std::span<const double> x);

  // Accumulate d(root)/d(node) into every node's gradient slot. Root must
  // be a node of this tape.
  void backward(Var root);

  double value(int id) const { return values_[id]; }
  double grad(int id) const { return grads_[id]; }
  std::size_t size() const { return values_.size(); }
  void reset();

 private:
  int push(double value, std::uint32_t begin, std::uint32_t count);
  std::vector<double> values_;
  std::vector<double> grads_;
  std::vector<std::uint32_t> arg_begin_;
  std::vector<std::uint32_t> arg_count_;
  std::vector<std::uint32_t> args_;
  std::vector<double> partials_;
};

// Primitives. log throws std::domain_error on nonpositive input;
// logsumexp throws std::invalid_argument on an empty list and is
// max-shifted for overflow safety.
Var operator+(Var a, Var b);
Var operator+(Var a, double b);
Var operator+(double a, Var b);
Var operator-(Var a, Var b);
Var operator-(Var a);
Var operator*(Var a, Var b);
Var operator*(double a, Var b);
Var operator*(Var a, double b);
Var exp(Var a);
Var log(Var a);
Var relu(Var a);       // subgradient at 0 is 0
Var sigmoid(Var a);
Var softplus(Var a);   // log(1 + e^x), numerically stable
Var logsumexp(std::span<const Var> xs);
Var sum(std::span<const Var> xs);

// Central-difference check of a scalar function built by `build` on a
// fresh tape whose leaves are the coordinates of `point`. Returns the max
// over coordinates of |fd - ad| / max(1e-8, |fd| + |ad|). Throws on
// non-finite function values.
double grad_check(const std::function<Var(Tape&, std::span<const Var>)>& build,
                  std::span<const double> point, double h);

}  // namespace consist::ad
