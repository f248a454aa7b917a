#include "dcifp/reference.hpp"

#include <cstring>
#include <stdexcept>

namespace dcifp::ref {

void conv1d_pre(const LayerDef& l, const double* weights, const double* in, double* pre) {
    const size_t K = l.kernel, C = l.in_ch, F = l.out_ch, L = l.in_len;
    const long pad = static_cast<long>((K - 1) / 2);
    const double* bias = weights + K * C * F;
    for (size_t pos = 0; pos < L; ++pos) {
        double* o = pre + pos * F;
        for (size_t f = 0; f < F; ++f) o[f] = bias[f];
        for (size_t k = 0; k < K; ++k) {
            long src = static_cast<long>(pos) + static_cast<long>(k) - pad;
            if (src < 0 || src >= static_cast<long>(L)) continue;
            for (size_t c = 0; c < C; ++c) {
                double x = in[static_cast<size_t>(src) * C + c];
                for (size_t f = 0; f < F; ++f) o[f] += x * weights[(k * C + c) * F + f];
            }
        }
    }
}

void dense_pre(const LayerDef& l, const double* weights, const double* in, double* pre) {
    const size_t I = l.in_ch, J = l.out_ch;
    const double* bias = weights + I * J;
    for (size_t j = 0; j < J; ++j) pre[j] = bias[j];
    for (size_t i = 0; i < I; ++i)
        for (size_t j = 0; j < J; ++j) pre[j] += in[i] * weights[i * J + j];
}

void relu_inplace(double* v, size_t n) {
    for (size_t i = 0; i < n; ++i)
        if (v[i] <= 0.0) v[i] = 0.0;
}

void maxpool2(const LayerDef& l, const double* in, double* out) {
    const size_t C = l.in_ch;
    for (size_t p = 0; p < l.out_len; ++p)
        for (size_t c = 0; c < C; ++c) {
            double a = in[(2 * p) * C + c];
            double b = in[(2 * p + 1) * C + c];
            out[p * C + c] = a >= b ? a : b;
        }
}

std::vector<double> forward_inference(const Network& net, const std::vector<double>& input) {
    const ModelSpec& spec = net.spec();
    if (input.size() != spec.W * spec.n_features)
        throw std::runtime_error("reference forward: input size mismatch");
    std::vector<double> cur = input, next;
    for (size_t li = 0; li < spec.layers.size(); ++li) {
        const LayerDef& l = spec.layers[li];
        next.assign(l.out_size(), 0.0);
        const double* w = net.params().data() + net.param_offset(li);
        switch (l.kind) {
            case LayerKind::Conv1D:
                conv1d_pre(l, w, cur.data(), next.data());
                if (l.relu) relu_inplace(next.data(), next.size());
                break;
            case LayerKind::Dense:
                dense_pre(l, w, cur.data(), next.data());
                if (l.relu) relu_inplace(next.data(), next.size());
                break;
            case LayerKind::MaxPool2:
                maxpool2(l, cur.data(), next.data());
                break;
            case LayerKind::Dropout:
            case LayerKind::Flatten:
                next = cur;
                break;
        }
        cur.swap(next);
    }
    return cur;
}

}  // namespace dcifp::ref
