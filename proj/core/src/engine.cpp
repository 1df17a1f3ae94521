#include "evc/engine.hpp"

#include <algorithm>
#include <cmath>

#include "evc/errors.hpp"

namespace evc::engine {

namespace {

// Eight independent partial sums so the reduction vectorizes without
// reassociation flags; the summation order is fixed, so results are reproducible.
template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
    T acc[8] = {};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        for (std::size_t l = 0; l < 8; ++l) acc[l] += a[i + l] * b[i + l];
    }
    T s = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

// sum_i a_i^2 * b_i
template <typename T>
T sq_dot(const T* a, const T* b, std::size_t n) {
    T acc[8] = {};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        for (std::size_t l = 0; l < 8; ++l) acc[l] += a[i + l] * a[i + l] * b[i + l];
    }
    T s = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
    for (; i < n; ++i) s += a[i] * a[i] * b[i];
    return s;
}

template <typename T>
void check_image(const Architecture& arch, std::span<const float> image) {
    if (image.size() != arch.input_size * arch.input_size) {
        throw DimensionError("image has " + std::to_string(image.size()) + " pixels, architecture expects " +
                             std::to_string(arch.input_size) + "x" + std::to_string(arch.input_size));
    }
}

template <typename T>
void check_params(const Architecture& arch, ModelKind kind, std::size_t size) {
    const std::size_t expected = ParamLayout::of(kind, arch).total;
    if (size != expected) {
        throw DimensionError("parameter vector has " + std::to_string(size) + " entries, layout needs " +
                             std::to_string(expected));
    }
}

// Valid cross-correlation of x with every kernel; out is [N x co x co].
template <typename T>
void conv_maps(const Architecture& arch, const T* kernels, const T* x, T* out) {
    const std::size_t d = arch.kernel_size, co = arch.conv_out(), in = arch.input_size, area = co * co;
    for (std::size_t n = 0; n < arch.kernels; ++n) {
        T* o = out + n * area;
        std::fill(o, o + area, T(0));
        const T* k = kernels + n * d * d;
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = 0; b < d; ++b) {
                const T w = k[a * d + b];
                for (std::size_t i = 0; i < co; ++i) {
                    const T* src = x + (i + a) * in + b;
                    T* dst = o + i * co;
                    for (std::size_t j = 0; j < co; ++j) dst[j] += w * src[j];
                }
            }
        }
    }
}

// ReLU then 2x2 max-pool on one map: argmax of max(v, 0), first occurrence wins.
template <typename T, typename Emit>
void relu_pool_routes(const Architecture& arch, const T* map, Emit&& emit) {
    const std::size_t co = arch.conv_out(), p = arch.pooled();
    for (std::size_t pi = 0; pi < p; ++pi) {
        for (std::size_t pj = 0; pj < p; ++pj) {
            const std::size_t base = 2 * pi * co + 2 * pj;
            const std::size_t cand[4] = {base, base + 1, base + co, base + co + 1};
            std::size_t best = base;
            T bv = std::max(map[base], T(0));
            for (std::size_t c = 1; c < 4; ++c) {
                const T v = std::max(map[cand[c]], T(0));
                if (v > bv) {
                    bv = v;
                    best = cand[c];
                }
            }
            emit(pi * p + pj, best, map[best] > T(0));
        }
    }
}

template <typename T>
void softmax_into(const T* z, T* p, std::size_t c) {
    double mx = z[0];
    for (std::size_t k = 1; k < c; ++k) mx = std::max<double>(mx, z[k]);
    double e[64];
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
        e[k] = std::exp(static_cast<double>(z[k]) - mx);
        sum += e[k];
    }
    for (std::size_t k = 0; k < c; ++k) p[k] = static_cast<T>(e[k] / sum);
}

template <typename T>
void load_image(std::span<const float> image, std::vector<T>& x) {
    std::copy(image.begin(), image.end(), x.begin());
}

}  // namespace

template <typename T>
BayesState<T>::BayesState(const Architecture& arch)
    : x(arch.input_size * arch.input_size),
      patch_sq(arch.conv_out() * arch.conv_out()),
      conv_mean(arch.kernels * arch.conv_out() * arch.conv_out()),
      route(arch.fc_inputs()),
      gate(arch.fc_inputs()),
      h(arch.fc_inputs()),
      q(arch.fc_inputs()),
      logit_mean(arch.classes),
      logit_var(arch.classes),
      probs(arch.classes),
      prob_var(arch.classes),
      grad_h(arch.fc_inputs()),
      grad_q(arch.fc_inputs()) {
    arch.validate();
    if (arch.classes > 64) throw DimensionError("at most 64 classes supported");
}

template <typename T>
void bayes_forward(const Architecture& arch, std::span<const T> params, std::span<const float> image,
                   BayesState<T>& s) {
    check_image<T>(arch, image);
    check_params<T>(arch, ModelKind::bayesian, params.size());
    const auto L = ParamLayout::of(ModelKind::bayesian, arch);
    const std::size_t d = arch.kernel_size, co = arch.conv_out(), in = arch.input_size;
    const std::size_t area = co * co, pa = arch.pooled_area(), F = arch.fc_inputs(), C = arch.classes;
    load_image(image, s.x);

    // Patch sums of x^2 are shared by every kernel's variance map.
    std::fill(s.patch_sq.begin(), s.patch_sq.end(), T(0));
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
            for (std::size_t i = 0; i < co; ++i) {
                const T* src = s.x.data() + (i + a) * in + b;
                T* dst = s.patch_sq.data() + i * co;
                for (std::size_t j = 0; j < co; ++j) dst[j] += src[j] * src[j];
            }
        }
    }

    conv_maps(arch, params.data() + L.conv_mu, s.x.data(), s.conv_mean.data());

    for (std::size_t n = 0; n < arch.kernels; ++n) {
        const T s2 = softplus(params[L.conv_rho + n]);
        const T* map = s.conv_mean.data() + n * area;
        const std::size_t off = n * pa;
        relu_pool_routes(arch, map, [&](std::size_t cell, std::size_t pos, bool on) {
            s.route[off + cell] = static_cast<std::uint32_t>(pos);
            s.gate[off + cell] = on;
            s.h[off + cell] = on ? map[pos] : T(0);
            s.q[off + cell] = on ? s2 * s.patch_sq[pos] : T(0);
        });
    }

    // Second raw moment of the FC input, shared by all rows' weight-variance terms.
    T raw2 = dot(s.h.data(), s.h.data(), F);
    for (std::size_t i = 0; i < F; ++i) raw2 += s.q[i];
    for (std::size_t k = 0; k < C; ++k) {
        const T* w = params.data() + L.fc_mu + k * F;
        s.logit_mean[k] = dot(w, s.h.data(), F) + params[L.fc_bias + k];
        s.logit_var[k] = sq_dot(w, s.q.data(), F) + softplus(params[L.fc_rho + k]) * raw2;
    }

    softmax_into(s.logit_mean.data(), s.probs.data(), C);
    // var_c = sum_j J_cj^2 v_j with J_cj = p_c (delta_cj - p_j).
    for (std::size_t c = 0; c < C; ++c) {
        T acc = T(0);
        for (std::size_t j = 0; j < C; ++j) {
            const T jac = s.probs[c] * ((c == j ? T(1) : T(0)) - s.probs[j]);
            acc += jac * jac * s.logit_var[j];
        }
        s.prob_var[c] = acc;
    }
}

template <typename T>
T gaussian_nll(std::span<const T> probs, std::span<const T> prob_var, int label, T eps) {
    T nll = T(0);
    for (std::size_t c = 0; c < probs.size(); ++c) {
        const T y = static_cast<int>(c) == label ? T(1) : T(0);
        const T r = y - probs[c];
        const T v = prob_var[c] + eps;
        nll += r * r / v + std::log(v);
    }
    return T(0.5) * nll;
}

template <typename T>
T bayes_backward(const Architecture& arch, std::span<const T> params, int label, T eps, T scale,
                 BayesState<T>& s, std::span<T> grad) {
    check_params<T>(arch, ModelKind::bayesian, grad.size());
    const auto L = ParamLayout::of(ModelKind::bayesian, arch);
    const std::size_t d = arch.kernel_size, co = arch.conv_out(), in = arch.input_size;
    const std::size_t pa = arch.pooled_area(), F = arch.fc_inputs(), C = arch.classes;
    const T* p = s.probs.data();
    const T* v = s.logit_var.data();

    // d nll / d probs and d nll / d prob_var.
    T gp[64], gpv[64];
    for (std::size_t c = 0; c < C; ++c) {
        const T y = static_cast<int>(c) == label ? T(1) : T(0);
        const T r = y - p[c];
        const T inv = T(1) / (s.prob_var[c] + eps);
        gp[c] = -r * inv;
        gpv[c] = T(0.5) * (inv - r * r * inv * inv);
    }

    // prob_var_c = p_c^2 A_c, A_c = sum_j (delta_cj - p_j)^2 v_j.
    T weighted = T(0);  // sum_c gpv_c p_c^2
    for (std::size_t c = 0; c < C; ++c) weighted += gpv[c] * p[c] * p[c];
    T total_p[64];  // d nll / d p_m with both dependencies
    T gz[64], gv[64];
    for (std::size_t m = 0; m < C; ++m) {
        T a = T(0);
        for (std::size_t j = 0; j < C; ++j) {
            const T dj = (m == j ? T(1) : T(0)) - p[j];
            a += dj * dj * v[j];
        }
        total_p[m] = gp[m] + T(2) * p[m] * a * gpv[m] - T(2) * v[m] * p[m] * p[m] * gpv[m] +
                     T(2) * v[m] * p[m] * weighted;
        // d nll / d v_m = sum_c gpv_c p_c^2 (delta_cm - p_m)^2
        const T om = T(1) - p[m];
        gv[m] = gpv[m] * p[m] * p[m] * om * om + p[m] * p[m] * (weighted - gpv[m] * p[m] * p[m]);
    }
    T pg = T(0);
    for (std::size_t m = 0; m < C; ++m) pg += total_p[m] * p[m];
    for (std::size_t j = 0; j < C; ++j) gz[j] = p[j] * (total_p[j] - pg);

    // Fully connected layer.
    T raw2 = dot(s.h.data(), s.h.data(), F);
    for (std::size_t i = 0; i < F; ++i) raw2 += s.q[i];
    std::fill(s.grad_h.begin(), s.grad_h.end(), T(0));
    std::fill(s.grad_q.begin(), s.grad_q.end(), T(0));
    T var_weight = T(0);  // sum_k gv_k sigma2_k
    for (std::size_t k = 0; k < C; ++k) {
        const T* w = params.data() + L.fc_mu + k * F;
        T* gw = grad.data() + L.fc_mu + k * F;
        const T rho = params[L.fc_rho + k];
        const T s2 = softplus(rho);
        const T a = scale * gz[k];
        const T b = scale * T(2) * gv[k];
        for (std::size_t i = 0; i < F; ++i) gw[i] += a * s.h[i] + b * w[i] * s.q[i];
        grad[L.fc_bias + k] += a;
        grad[L.fc_rho + k] += scale * gv[k] * raw2 * sigmoid(rho);
        var_weight += gv[k] * s2;
        const T gzk = gz[k], gvk = gv[k];
        for (std::size_t i = 0; i < F; ++i) {
            s.grad_h[i] += gzk * w[i];
            s.grad_q[i] += gvk * w[i] * w[i];
        }
    }
    for (std::size_t i = 0; i < F; ++i) {
        s.grad_h[i] += T(2) * s.h[i] * var_weight;
        s.grad_q[i] += var_weight;
    }

    // Routed, gated positions back into the kernels.
    for (std::size_t n = 0; n < arch.kernels; ++n) {
        T* gk = grad.data() + L.conv_mu + n * d * d;
        T gs2 = T(0);
        for (std::size_t cell = n * pa; cell < (n + 1) * pa; ++cell) {
            if (!s.gate[cell]) continue;
            const std::size_t pos = s.route[cell];
            const std::size_t i0 = pos / co, j0 = pos % co;
            const T g = scale * s.grad_h[cell];
            for (std::size_t a = 0; a < d; ++a) {
                const T* src = s.x.data() + (i0 + a) * in + j0;
                for (std::size_t b = 0; b < d; ++b) gk[a * d + b] += g * src[b];
            }
            gs2 += s.grad_q[cell] * s.patch_sq[pos];
        }
        grad[L.conv_rho + n] += scale * gs2 * sigmoid(params[L.conv_rho + n]);
    }

    return gaussian_nll<T>(s.probs, s.prob_var, label, eps);
}

template <typename T>
VanillaState<T>::VanillaState(const Architecture& arch)
    : x(arch.input_size * arch.input_size),
      conv(arch.kernels * arch.conv_out() * arch.conv_out()),
      route(arch.fc_inputs()),
      gate(arch.fc_inputs()),
      h(arch.fc_inputs()),
      logits(arch.classes),
      probs(arch.classes),
      grad_h(arch.fc_inputs()) {
    arch.validate();
    if (arch.classes > 64) throw DimensionError("at most 64 classes supported");
}

template <typename T>
void vanilla_forward(const Architecture& arch, std::span<const T> params, std::span<const float> image,
                     VanillaState<T>& s) {
    check_image<T>(arch, image);
    check_params<T>(arch, ModelKind::vanilla, params.size());
    const auto L = ParamLayout::of(ModelKind::vanilla, arch);
    const std::size_t area = arch.conv_out() * arch.conv_out(), pa = arch.pooled_area();
    const std::size_t F = arch.fc_inputs(), C = arch.classes;
    load_image(image, s.x);
    conv_maps(arch, params.data() + L.conv_mu, s.x.data(), s.conv.data());
    for (std::size_t n = 0; n < arch.kernels; ++n) {
        const T* map = s.conv.data() + n * area;
        const std::size_t off = n * pa;
        relu_pool_routes(arch, map, [&](std::size_t cell, std::size_t pos, bool on) {
            s.route[off + cell] = static_cast<std::uint32_t>(pos);
            s.gate[off + cell] = on;
            s.h[off + cell] = on ? map[pos] : T(0);
        });
    }
    for (std::size_t k = 0; k < C; ++k) {
        s.logits[k] = dot(params.data() + L.fc_mu + k * F, s.h.data(), F) + params[L.fc_bias + k];
    }
    softmax_into(s.logits.data(), s.probs.data(), C);
}

template <typename T>
T vanilla_backward(const Architecture& arch, std::span<const T> params, int label, T scale,
                   VanillaState<T>& s, std::span<T> grad) {
    check_params<T>(arch, ModelKind::vanilla, grad.size());
    const auto L = ParamLayout::of(ModelKind::vanilla, arch);
    const std::size_t d = arch.kernel_size, co = arch.conv_out(), in = arch.input_size;
    const std::size_t pa = arch.pooled_area(), F = arch.fc_inputs(), C = arch.classes;

    std::fill(s.grad_h.begin(), s.grad_h.end(), T(0));
    for (std::size_t k = 0; k < C; ++k) {
        const T gz = s.probs[k] - (static_cast<int>(k) == label ? T(1) : T(0));
        const T* w = params.data() + L.fc_mu + k * F;
        T* gw = grad.data() + L.fc_mu + k * F;
        const T a = scale * gz;
        for (std::size_t i = 0; i < F; ++i) {
            gw[i] += a * s.h[i];
            s.grad_h[i] += gz * w[i];
        }
        grad[L.fc_bias + k] += a;
    }
    for (std::size_t n = 0; n < arch.kernels; ++n) {
        T* gk = grad.data() + L.conv_mu + n * d * d;
        for (std::size_t cell = n * pa; cell < (n + 1) * pa; ++cell) {
            if (!s.gate[cell]) continue;
            const std::size_t pos = s.route[cell];
            const std::size_t i0 = pos / co, j0 = pos % co;
            const T g = scale * s.grad_h[cell];
            for (std::size_t a = 0; a < d; ++a) {
                const T* src = s.x.data() + (i0 + a) * in + j0;
                for (std::size_t b = 0; b < d; ++b) gk[a * d + b] += g * src[b];
            }
        }
    }
    const T pl = std::max(s.probs[static_cast<std::size_t>(label)], std::numeric_limits<T>::min());
    return -std::log(pl);
}

template struct BayesState<float>;
template struct BayesState<double>;
template struct VanillaState<float>;
template struct VanillaState<double>;

template void bayes_forward<float>(const Architecture&, std::span<const float>, std::span<const float>,
                                   BayesState<float>&);
template void bayes_forward<double>(const Architecture&, std::span<const double>, std::span<const float>,
                                    BayesState<double>&);
template float gaussian_nll<float>(std::span<const float>, std::span<const float>, int, float);
template double gaussian_nll<double>(std::span<const double>, std::span<const double>, int, double);
template float bayes_backward<float>(const Architecture&, std::span<const float>, int, float, float,
                                     BayesState<float>&, std::span<float>);
template double bayes_backward<double>(const Architecture&, std::span<const double>, int, double, double,
                                       BayesState<double>&, std::span<double>);
template void vanilla_forward<float>(const Architecture&, std::span<const float>, std::span<const float>,
                                     VanillaState<float>&);
template void vanilla_forward<double>(const Architecture&, std::span<const double>, std::span<const float>,
                                      VanillaState<double>&);
template float vanilla_backward<float>(const Architecture&, std::span<const float>, int, float,
                                       VanillaState<float>&, std::span<float>);
template double vanilla_backward<double>(const Architecture&, std::span<const double>, int, double,
                                         VanillaState<double>&, std::span<double>);

}  // namespace evc::engine
