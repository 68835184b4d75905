#include "horizon/market_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "horizon/errors.hpp"

namespace horizon {

double ModelParams::horizon() const {
  if (!T) throw DomainError("perpetual model has no finite horizon");
  return *T;
}

DerivedConstants derived_constants(const ModelParams& p) noexcept {
  const double s2 = p.sigma * p.sigma;
  return {2.0 * p.r / s2 - 1.0, p.r - 0.5 * s2, p.r + 0.5 * s2};
}

DerivedConstants validate(const ModelParams& p) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(p.r) || !finite(p.sigma) || !finite(p.lambda) || !finite(p.L))
    throw DomainError("parameters must be finite numbers");
  if (!(p.r > 0.0)) throw DomainError("r must be > 0");
  if (!(p.sigma > 0.0)) throw DomainError("sigma must be > 0");
  if (!(p.lambda >= 0.0)) throw DomainError("lambda must be >= 0");
  if (!(p.r - 0.5 * p.sigma * p.sigma < 0.0))
    throw DomainError("r - sigma^2/2 >= 0: classic Russian option regime, unsupported");
  if (p.is_perpetual()) {
    if (!(p.L > 0.0)) throw DomainError("perpetual horizon requires L>0");
  } else {
    if (!finite(*p.T) || !(*p.T > 0.0)) throw DomainError("finite horizon requires 0<T<inf");
    if (!(p.L > 1.0)) throw DomainError("finite horizon requires L>1");
  }
  return derived_constants(p);
}

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw DomainError("time grid needs at least two nodes");
  if (nodes_.front() != 0.0) throw DomainError("time grid must start at 0");
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    if (!(nodes_[i] > nodes_[i - 1])) throw DomainError("time grid must be strictly increasing");
}

std::size_t TimeGrid::interval_of(double t) const noexcept {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  std::size_t k = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
  return std::min(k, nodes_.size() - 2);
}

TimeGrid make_uniform_grid(double T, int n) {
  if (n < 2) throw DomainError("uniform grid requires n >= 2");
  if (!std::isfinite(T) || !(T > 0.0)) throw DomainError("uniform grid requires 0<T<inf");
  std::vector<double> nodes(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) nodes[static_cast<std::size_t>(i)] = T * i / n;
  nodes.back() = T;
  return TimeGrid(std::move(nodes));
}

}  // namespace horizon
