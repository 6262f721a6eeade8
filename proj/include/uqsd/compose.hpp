#pragma once

#include <string>
#include <utility>

#include "uqsd/states.hpp"

namespace uqsd {

/// n-fold Kronecker power, capped like tensor().
inline CMat tensor_power(const CMat& m, int n, std::size_t dim_cap = limits::kDefaultDimCap) {
  if (n < 1) throw Error(Errc::range_error, "tensor_power: need n >= 1");
  CMat out = m;
  for (int k = 1; k < n; ++k) out = tensor(out, m, dim_cap);
  return out;
}

/// Both inputs a discriminator receives when the program registers hold the
/// two candidate states and the data register holds n copies of one of them:
///   rho_in_i = rho1 (x) rho2 (x) rho_i^{(x) n}
struct ProgrammableInstance {
  DensityMatrix rho_in_1;
  DensityMatrix rho_in_2;
  int n = 1;
  Eigen::Index total_dim = 0;
};

/// Builds the pair of composed inputs. Throws DimensionOverflow if
/// d^(n+2) would exceed dim_cap; the factors themselves are never mutated.
inline ProgrammableInstance compose_instance(const DensityMatrix& rho1,
                                             const DensityMatrix& rho2, int n,
                                             std::size_t dim_cap = limits::kDefaultDimCap,
                                             const Tolerances& tol = {}) {
  if (n < 1) throw Error(Errc::range_error, "compose_instance: need n >= 1");
  if (rho1.dim() != rho2.dim())
    throw Error(Errc::dimension_mismatch, "compose_instance: factor dimensions differ");
  double total = std::pow(static_cast<double>(rho1.dim()), n + 2);
  if (total > static_cast<double>(dim_cap))
    throw Error(Errc::dimension_overflow,
                "compose_instance: composed dimension " + std::to_string(total) +
                    " exceeds cap " + std::to_string(dim_cap));
  CMat prefix = tensor(rho1.matrix(), rho2.matrix(), dim_cap);
  CMat in1 = tensor(prefix, tensor_power(rho1.matrix(), n, dim_cap), dim_cap);
  CMat in2 = tensor(prefix, tensor_power(rho2.matrix(), n, dim_cap), dim_cap);
  // Kronecker products of unit-trace PSD factors stay unit-trace PSD up to
  // roundoff; constructing DensityMatrix re-checks that.
  ProgrammableInstance inst{
      DensityMatrix(std::move(in1), rho1.label().empty() ? "" : rho1.label() + "_in", tol),
      DensityMatrix(std::move(in2), rho2.label().empty() ? "" : rho2.label() + "_in", tol), n,
      0};
  inst.total_dim = inst.rho_in_1.dim();
  return inst;
}

}  // namespace uqsd
