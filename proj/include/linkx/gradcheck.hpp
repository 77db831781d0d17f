#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>

#include "linkx/matrix.hpp"

namespace linkx {

// Central-difference check of analytic gradients. `loss` must recompute the
// scalar objective from the current contents of `params`; each parameter
// element is perturbed in place by +/- eps. Returns the worst relative error
//   |analytic - numeric| / max(1, |analytic|, |numeric|)
// over all elements. The unit floor keeps finite-difference roundoff on
// near-zero components from registering as error; a sign-flipped gradient of
// magnitude >= 1 scores ~2.
inline double gradcheck(const std::function<double()>& loss,
                        std::span<DenseMatrix* const> params,
                        std::span<const DenseMatrix> analytic_grads, double eps = 1e-5) {
  if (params.size() != analytic_grads.size())
    throw std::invalid_argument("gradcheck: params/grads count mismatch");
  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    DenseMatrix& mat = *params[p];
    const DenseMatrix& grad = analytic_grads[p];
    if (!mat.same_shape(grad)) throw std::invalid_argument("gradcheck: grad shape mismatch");
    for (std::size_t i = 0; i < mat.size(); ++i) {
      const double saved = mat.data()[i];
      mat.data()[i] = saved + eps;
      const double up = loss();
      mat.data()[i] = saved - eps;
      const double down = loss();
      mat.data()[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down))
        throw std::runtime_error("gradcheck: non-finite loss at perturbed point");
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = grad.data()[i];
      const double denom = std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
      worst = std::max(worst, std::fabs(analytic - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace linkx
