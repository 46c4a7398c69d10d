#pragma once

#include <functional>
#include <vector>

#include "ltlm/matrix.hpp"
#include "ltlm/rng.hpp"

namespace ltlm {

// Compute precision. The toolkit computes in 64-bit throughout; the enum
// exists so callers (gradient check in particular) can state and validate
// the requirement explicitly.
enum class Precision { Float32, Float64 };

// Probability floor applied before taking logs in cross_entropy.
inline constexpr double kProbFloor = 1e-12;

// Matrix with every entry drawn independently from U[lo, hi).
Matrix uniform_init(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng);

// W * x + b. Throws on dimension mismatch.
Vec affine(const Vec& x, const Matrix& w, const Vec& b);

// Numerically stable softmax (max subtraction).
Vec softmax(const Vec& logits);
void softmax_inplace(double* logits, std::size_t n);

// -ln(max(probs[target], kProbFloor)). Throws if target is out of range.
double cross_entropy(const Vec& probs, std::size_t target);

// Global L2-norm clipping over a set of gradient tensors. Returns the scale
// that was applied (1 when the norm was already within max_norm).
double clip_global_norm(std::vector<Matrix*>& grads, double max_norm);

// Inverted dropout mask: entries are 0 with probability p, else 1/(1-p),
// so the mask has unit expectation and evaluation needs no rescaling.
Vec dropout_mask(std::size_t dim, double p, Rng& rng);

// Central-difference gradient oracle, (f(x+eps e_i) - f(x-eps e_i)) / 2eps.
// The loss function is evaluated twice at the initial point first; a mismatch
// means it is not deterministic and is rejected.
Vec finite_difference_gradient(const std::function<double(const Vec&)>& loss_fn,
                               const Vec& params, double eps);

} // namespace ltlm
