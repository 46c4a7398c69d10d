#include "ltlm/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace ltlm {

Matrix uniform_init(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng) {
    require(lo < hi, ErrorCode::InvalidArgument, "uniform_init: lo must be < hi");
    require(rows > 0 && cols > 0, ErrorCode::InvalidArgument, "uniform_init: empty shape");
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(lo, hi);
    return m;
}

Vec affine(const Vec& x, const Matrix& w, const Vec& b) {
    require(w.cols() == x.size(), ErrorCode::InvalidArgument, "affine: W.cols != x.size");
    require(w.rows() == b.size(), ErrorCode::InvalidArgument, "affine: W.rows != b.size");
    Vec y(b);
    for (std::size_t r = 0; r < w.rows(); ++r)
        y[r] += dot(w.row(r), x.data(), x.size());
    return y;
}

void softmax_inplace(double* logits, std::size_t n) {
    double max_val = logits[0];
    for (std::size_t i = 1; i < n; ++i) max_val = std::max(max_val, logits[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        logits[i] = std::exp(logits[i] - max_val);
        sum += logits[i];
    }
    double inv = 1.0 / sum;
    for (std::size_t i = 0; i < n; ++i) logits[i] *= inv;
}

Vec softmax(const Vec& logits) {
    require(!logits.empty(), ErrorCode::InvalidArgument, "softmax: empty input");
    Vec out(logits);
    softmax_inplace(out.data(), out.size());
    return out;
}

double cross_entropy(const Vec& probs, std::size_t target) {
    require(target < probs.size(), ErrorCode::InvalidArgument, "cross_entropy: target out of range");
    return -std::log(std::max(probs[target], kProbFloor));
}

double clip_global_norm(std::vector<Matrix*>& grads, double max_norm) {
    require(max_norm > 0.0, ErrorCode::InvalidArgument, "clip_global_norm: max_norm must be > 0");
    double sq = 0.0;
    for (const Matrix* g : grads)
        for (double v : g->data()) sq += v * v;
    double norm = std::sqrt(sq);
    if (norm <= max_norm) return 1.0;
    double scale = max_norm / norm;
    for (Matrix* g : grads)
        for (double& v : g->data()) v *= scale;
    return scale;
}

Vec dropout_mask(std::size_t dim, double p, Rng& rng) {
    require(p >= 0.0 && p < 1.0, ErrorCode::InvalidArgument, "dropout_mask: p must be in [0, 1)");
    Vec mask(dim);
    const double keep = 1.0 / (1.0 - p);
    for (double& v : mask) v = (rng.next_double() < p) ? 0.0 : keep;
    return mask;
}

Vec finite_difference_gradient(const std::function<double(const Vec&)>& loss_fn,
                               const Vec& params, double eps) {
    require(eps > 0.0, ErrorCode::InvalidArgument, "finite_difference_gradient: eps must be > 0");
    double l0 = loss_fn(params);
    double l1 = loss_fn(params);
    require(l0 == l1, ErrorCode::InvalidArgument,
            "finite_difference_gradient: loss function is not deterministic");
    Vec grad(params.size());
    Vec probe(params);
    for (std::size_t i = 0; i < params.size(); ++i) {
        probe[i] = params[i] + eps;
        double plus = loss_fn(probe);
        probe[i] = params[i] - eps;
        double minus = loss_fn(probe);
        probe[i] = params[i];
        grad[i] = (plus - minus) / (2.0 * eps);
    }
    return grad;
}

} // namespace ltlm
