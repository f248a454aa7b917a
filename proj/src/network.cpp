#include "dcifp/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "dcifp/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dcifp {

int resolve_threads(const ExecConfig& exec) {
    if (exec.engine == Engine::Serial) return 1;
#ifdef _OPENMP
    return exec.threads > 0 ? exec.threads : omp_get_max_threads();
#else
    return 1;
#endif
}

size_t argmax_lowest(const std::vector<double>& v) {
    size_t best = 0;
    for (size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

void softmax_inplace(std::vector<double>& v) {
    double mx = *std::max_element(v.begin(), v.end());
    double sum = 0;
    for (double& x : v) {
        x = std::exp(x - mx);
        sum += x;
    }
    for (double& x : v) x /= sum;
}

Network::Network(ModelSpec spec) : spec_(std::move(spec)) {
    offsets_.reserve(spec_.layers.size());
    size_t off = 0;
    for (const auto& l : spec_.layers) {
        offsets_.push_back(off);
        off += l.param_count();
    }
    params_.assign(off, 0.0);
    wt_.resize(spec_.layers.size());
    for (size_t i = 0; i < spec_.layers.size(); ++i)
        wt_[i].assign(spec_.layers[i].weight_count(), 0.0);
}

size_t Network::layer_of_param(size_t param_index) const {
    for (size_t i = offsets_.size(); i-- > 0;)
        if (param_index >= offsets_[i] && spec_.layers[i].param_count() > 0) return i;
    throw std::runtime_error("layer_of_param: bad index");
}

void Network::init_weights(uint64_t seed) {
    for (size_t li = 0; li < spec_.layers.size(); ++li) {
        const LayerDef& l = spec_.layers[li];
        if (l.param_count() == 0) continue;
        size_t fan_in = l.kind == LayerKind::Conv1D ? l.kernel * l.in_ch : l.in_ch;
        double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        Rng rng(mix_seed(seed, 0x11A7 + li));
        double* w = params_.data() + offsets_[li];
        for (size_t i = 0; i < l.weight_count(); ++i) w[i] = rng.uniform(-limit, limit);
        double* b = w + l.weight_count();
        for (size_t i = 0; i < l.bias_count(); ++i) b[i] = 0.01;
    }
    refresh_transposes();
}

void Network::refresh_transposes() {
    for (size_t li = 0; li < spec_.layers.size(); ++li) {
        const LayerDef& l = spec_.layers[li];
        if (l.weight_count() == 0) continue;
        const double* w = params_.data() + offsets_[li];
        double* t = wt_[li].data();
        if (l.kind == LayerKind::Conv1D) {
            // w[k][c][f] -> t[k][f][c]
            for (size_t k = 0; k < l.kernel; ++k)
                for (size_t c = 0; c < l.in_ch; ++c)
                    for (size_t f = 0; f < l.out_ch; ++f)
                        t[(k * l.out_ch + f) * l.in_ch + c] = w[(k * l.in_ch + c) * l.out_ch + f];
        } else {
            // w[i][j] -> t[j][i]
            for (size_t i = 0; i < l.in_ch; ++i)
                for (size_t j = 0; j < l.out_ch; ++j)
                    t[j * l.in_ch + i] = w[i * l.out_ch + j];
        }
    }
}

void Network::prepare(Workspace& ws) const {
    const size_t n = spec_.layers.size();
    ws.acts.resize(n + 1);
    ws.grads.resize(n + 1);
    ws.drop_mask.resize(n);
    ws.acts[0].resize(spec_.W * spec_.n_features);
    ws.grads[0].resize(spec_.W * spec_.n_features);
    for (size_t i = 0; i < n; ++i) {
        ws.acts[i + 1].resize(spec_.layers[i].out_size());
        ws.grads[i + 1].resize(spec_.layers[i].out_size());
        if (spec_.layers[i].kind == LayerKind::Dropout)
            ws.drop_mask[i].resize(spec_.layers[i].out_size());
        else
            ws.drop_mask[i].clear();
    }
    ws.param_grad.assign(params_.size(), 0.0);
    ws.logits_scratch.resize(spec_.n_classes);
}

void Network::conv_forward(const LayerDef& l, const double* w, const double* in, double* out,
                           const double* frozen_relu) const {
    const size_t K = l.kernel, C = l.in_ch, F = l.out_ch, L = l.in_len;
    const long pad = static_cast<long>((K - 1) / 2);
    const double* bias = w + K * C * F;
    for (size_t pos = 0; pos < L; ++pos) {
        double* o = out + pos * F;
        for (size_t f = 0; f < F; ++f) o[f] = bias[f];
        for (size_t k = 0; k < K; ++k) {
            long src = static_cast<long>(pos) + static_cast<long>(k) - pad;
            if (src < 0 || src >= static_cast<long>(L)) continue;
            const double* irow = in + static_cast<size_t>(src) * C;
            const double* wrow = w + k * C * F;
            for (size_t c = 0; c < C; ++c) {
                double x = irow[c];
                if (x == 0.0) continue;  // post-ReLU inputs are sparse
                const double* wr = wrow + c * F;
                for (size_t f = 0; f < F; ++f) o[f] += x * wr[f];
            }
        }
        if (l.relu) {
            if (frozen_relu) {
                const double* base = frozen_relu + pos * F;
                for (size_t f = 0; f < F; ++f) o[f] = base[f] > 0.0 ? o[f] : 0.0;
            } else {
                for (size_t f = 0; f < F; ++f) o[f] = o[f] > 0.0 ? o[f] : 0.0;
            }
        }
    }
}

void Network::dense_forward(const LayerDef& l, const double* w, const double* in, double* out,
                            const double* frozen_relu) const {
    const size_t I = l.in_ch, J = l.out_ch;
    const double* bias = w + I * J;
    for (size_t j = 0; j < J; ++j) out[j] = bias[j];
    for (size_t i = 0; i < I; ++i) {
        double x = in[i];
        if (x == 0.0) continue;
        const double* wr = w + i * J;
        for (size_t j = 0; j < J; ++j) out[j] += x * wr[j];
    }
    if (l.relu) {
        if (frozen_relu) {
            for (size_t j = 0; j < J; ++j) out[j] = frozen_relu[j] > 0.0 ? out[j] : 0.0;
        } else {
            for (size_t j = 0; j < J; ++j) out[j] = out[j] > 0.0 ? out[j] : 0.0;
        }
    }
}

namespace {

// Counter-hashed dropout mask: element j of layer keyed by drop_seed is a
// pure function of (drop_seed, layer, j) — independent of batching and
// thread schedule.
inline double mask_value(uint64_t drop_seed, size_t layer, size_t j, double rate) {
    uint64_t h = mix_seed(drop_seed, (static_cast<uint64_t>(layer) << 48) + j);
    double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    return u < rate ? 0.0 : 1.0 / (1.0 - rate);
}

}  // namespace

void Network::forward(Workspace& ws, const double* input, bool training,
                      uint64_t drop_seed) const {
    std::memcpy(ws.acts[0].data(), input, ws.acts[0].size() * sizeof(double));
    for (size_t li = 0; li < spec_.layers.size(); ++li) {
        const LayerDef& l = spec_.layers[li];
        const double* in = ws.acts[li].data();
        double* out = ws.acts[li + 1].data();
        switch (l.kind) {
            case LayerKind::Conv1D:
                conv_forward(l, params_.data() + offsets_[li], in, out, nullptr);
                break;
            case LayerKind::Dense:
                dense_forward(l, params_.data() + offsets_[li], in, out, nullptr);
                break;
            case LayerKind::Dropout: {
                const size_t n = l.out_size();
                if (training && l.rate > 0.0) {
                    double* m = ws.drop_mask[li].data();
                    for (size_t j = 0; j < n; ++j) {
                        m[j] = mask_value(drop_seed, li, j, l.rate);
                        out[j] = in[j] * m[j];
                    }
                } else {
                    if (!ws.drop_mask[li].empty())
                        std::fill(ws.drop_mask[li].begin(), ws.drop_mask[li].end(), 1.0);
                    std::memcpy(out, in, n * sizeof(double));
                }
                break;
            }
            case LayerKind::MaxPool2: {
                const size_t C = l.in_ch;
                for (size_t p = 0; p < l.out_len; ++p) {
                    const double* a = in + (2 * p) * C;
                    const double* b = a + C;
                    double* o = out + p * C;
                    for (size_t c = 0; c < C; ++c) o[c] = a[c] >= b[c] ? a[c] : b[c];
                }
                break;
            }
            case LayerKind::Flatten:
                std::memcpy(out, in, l.out_size() * sizeof(double));
                break;
        }
    }
}

void Network::forward_from(Workspace& ws, size_t first_layer, const Workspace* frozen_base) const {
    for (size_t li = first_layer; li < spec_.layers.size(); ++li) {
        const LayerDef& l = spec_.layers[li];
        const double* in = ws.acts[li].data();
        double* out = ws.acts[li + 1].data();
        switch (l.kind) {
            case LayerKind::Conv1D:
                conv_forward(l, params_.data() + offsets_[li], in, out,
                             frozen_base ? frozen_base->acts[li + 1].data() : nullptr);
                break;
            case LayerKind::Dense:
                dense_forward(l, params_.data() + offsets_[li], in, out,
                              frozen_base ? frozen_base->acts[li + 1].data() : nullptr);
                break;
            case LayerKind::Dropout:  // inference mode: identity
                std::memcpy(out, in, l.out_size() * sizeof(double));
                break;
            case LayerKind::MaxPool2: {
                const size_t C = l.in_ch;
                if (frozen_base) {
                    const double* ba = frozen_base->acts[li].data();
                    for (size_t p = 0; p < l.out_len; ++p) {
                        const double* a = in + (2 * p) * C;
                        const double* b = a + C;
                        const double* base_a = ba + (2 * p) * C;
                        const double* base_b = base_a + C;
                        double* o = out + p * C;
                        for (size_t c = 0; c < C; ++c)
                            o[c] = base_a[c] >= base_b[c] ? a[c] : b[c];
                    }
                } else {
                    for (size_t p = 0; p < l.out_len; ++p) {
                        const double* a = in + (2 * p) * C;
                        const double* b = a + C;
                        double* o = out + p * C;
                        for (size_t c = 0; c < C; ++c) o[c] = a[c] >= b[c] ? a[c] : b[c];
                    }
                }
                break;
            }
            case LayerKind::Flatten:
                std::memcpy(out, in, l.out_size() * sizeof(double));
                break;
        }
    }
}

double Network::loss_and_probs(Workspace& ws, size_t true_class) const {
    ws.logits_scratch = ws.acts.back();
    softmax_inplace(ws.logits_scratch);
    return loss_from_probs(ws.logits_scratch, true_class);
}

double Network::loss_from_probs(const std::vector<double>& probs, size_t true_class) {
    double p = std::max(probs[true_class], 1e-300);
    return -std::log(p);
}

void Network::conv_backward(const LayerDef& l, size_t layer_idx, Workspace& ws) const {
    const size_t K = l.kernel, C = l.in_ch, F = l.out_ch, L = l.in_len;
    const long pad = static_cast<long>((K - 1) / 2);
    const std::vector<double>& out_act = ws.acts[layer_idx + 1];
    std::vector<double>& dout = ws.grads[layer_idx + 1];
    std::vector<double>& din = ws.grads[layer_idx];
    const std::vector<double>& in = ws.acts[layer_idx];
    const double* wt = wt_[layer_idx].data();
    double* dw = ws.param_grad.data() + offsets_[layer_idx];
    double* db = dw + l.weight_count();

    if (l.relu)
        for (size_t i = 0; i < dout.size(); ++i)
            if (out_act[i] <= 0.0) dout[i] = 0.0;

    std::fill(din.begin(), din.end(), 0.0);
    for (size_t pos = 0; pos < L; ++pos) {
        const double* g = dout.data() + pos * F;
        for (size_t f = 0; f < F; ++f) db[f] += g[f];
        for (size_t k = 0; k < K; ++k) {
            long src = static_cast<long>(pos) + static_cast<long>(k) - pad;
            if (src < 0 || src >= static_cast<long>(L)) continue;
            const double* irow = in.data() + static_cast<size_t>(src) * C;
            double* drow = din.data() + static_cast<size_t>(src) * C;
            const double* trow = wt + k * F * C;
            double* dwrow = dw + k * C * F;
            for (size_t f = 0; f < F; ++f) {
                double gf = g[f];
                if (gf == 0.0) continue;
                const double* tr = trow + f * C;
                for (size_t c = 0; c < C; ++c) drow[c] += gf * tr[c];
            }
            for (size_t c = 0; c < C; ++c) {
                double x = irow[c];
                if (x == 0.0) continue;
                double* dwr = dwrow + c * F;
                for (size_t f = 0; f < F; ++f) dwr[f] += x * g[f];
            }
        }
    }
}

void Network::dense_backward(const LayerDef& l, size_t layer_idx, Workspace& ws) const {
    const size_t I = l.in_ch, J = l.out_ch;
    const std::vector<double>& out_act = ws.acts[layer_idx + 1];
    std::vector<double>& dout = ws.grads[layer_idx + 1];
    std::vector<double>& din = ws.grads[layer_idx];
    const std::vector<double>& in = ws.acts[layer_idx];
    const double* wt = wt_[layer_idx].data();
    double* dw = ws.param_grad.data() + offsets_[layer_idx];
    double* db = dw + l.weight_count();

    if (l.relu)
        for (size_t j = 0; j < J; ++j)
            if (out_act[j] <= 0.0) dout[j] = 0.0;

    std::fill(din.begin(), din.end(), 0.0);
    for (size_t j = 0; j < J; ++j) {
        double g = dout[j];
        db[j] += g;
        if (g == 0.0) continue;
        const double* tr = wt + j * I;
        for (size_t i = 0; i < I; ++i) din[i] += g * tr[i];
    }
    for (size_t i = 0; i < I; ++i) {
        double x = in[i];
        if (x == 0.0) continue;
        double* dwr = dw + i * J;
        for (size_t j = 0; j < J; ++j) dwr[j] += x * dout[j];
    }
}

void Network::backward(Workspace& ws, const std::vector<double>& dlogits) const {
    ws.grads.back() = dlogits;
    for (size_t li = spec_.layers.size(); li-- > 0;) {
        const LayerDef& l = spec_.layers[li];
        switch (l.kind) {
            case LayerKind::Conv1D:
                conv_backward(l, li, ws);
                break;
            case LayerKind::Dense:
                dense_backward(l, li, ws);
                break;
            case LayerKind::Dropout: {
                const size_t n = l.out_size();
                const std::vector<double>& m = ws.drop_mask[li];
                double* din = ws.grads[li].data();
                const double* dout = ws.grads[li + 1].data();
                if (m.empty()) {
                    std::memcpy(din, dout, n * sizeof(double));
                } else {
                    for (size_t j = 0; j < n; ++j) din[j] = dout[j] * m[j];
                }
                break;
            }
            case LayerKind::MaxPool2: {
                const size_t C = l.in_ch;
                const std::vector<double>& in = ws.acts[li];
                std::vector<double>& din = ws.grads[li];
                const double* dout = ws.grads[li + 1].data();
                std::fill(din.begin(), din.end(), 0.0);
                for (size_t p = 0; p < l.out_len; ++p) {
                    const double* a = in.data() + (2 * p) * C;
                    const double* b = a + C;
                    double* da = din.data() + (2 * p) * C;
                    double* db2 = da + C;
                    const double* g = dout + p * C;
                    for (size_t c = 0; c < C; ++c) {
                        if (a[c] >= b[c])
                            da[c] += g[c];
                        else
                            db2[c] += g[c];
                    }
                }
                break;
            }
            case LayerKind::Flatten:
                std::memcpy(ws.grads[li].data(), ws.grads[li + 1].data(),
                            l.out_size() * sizeof(double));
                break;
        }
    }
}

}  // namespace dcifp
