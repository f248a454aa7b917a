#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dcifp {

enum class LayerKind : uint8_t { Conv1D, Dropout, MaxPool2, Flatten, Dense };

// One step of the layer plan. Sequence layers track (in_len, channels);
// dense layers track flat dims. Convolutions use "same" zero padding and
// ReLU; the final dense layer has no activation (softmax lives in the
// loss / predictor).
struct LayerDef {
    LayerKind kind = LayerKind::Conv1D;
    size_t in_len = 0, out_len = 0;    // sequence length before/after
    size_t in_ch = 0, out_ch = 0;      // channels (conv) / dims (dense)
    size_t kernel = 0;                 // conv taps (odd)
    double rate = 0;                   // dropout rate
    bool relu = false;

    size_t in_size() const { return (kind == LayerKind::Dense ? 1 : in_len) * in_ch; }
    size_t out_size() const { return (kind == LayerKind::Dense ? 1 : out_len) * out_ch; }
    size_t weight_count() const {
        if (kind == LayerKind::Conv1D) return kernel * in_ch * out_ch;
        if (kind == LayerKind::Dense) return in_ch * out_ch;
        return 0;
    }
    size_t bias_count() const {
        return kind == LayerKind::Conv1D || kind == LayerKind::Dense ? out_ch : 0;
    }
    size_t param_count() const { return weight_count() + bias_count(); }
};

// Architecture + the fixed input unit conventions, so a stored model is
// self-describing. The layer plan is a pure function of (W, n_features,
// n_classes).
struct ModelSpec {
    size_t W = 0, n_features = 0, n_classes = 0;
    std::vector<LayerDef> layers;
    double tbs_kb_per_bit = 0.001;  // TBS feature = bits * this
    double dt_s_per_ms = 0.001;     // dt feature = ms * this

    size_t param_count() const {
        size_t n = 0;
        for (const auto& l : layers) n += l.param_count();
        return n;
    }
};

// The window-size-conditional 1D CNN:
//   conv(64, k5, relu) -> dropout 0.2
//   [W >= 40] conv(64, k7, relu) -> dropout 0.2 -> maxpool 2
//   [W >= 80] conv(128, k9, relu) -> dropout 0.3 -> maxpool 2
//   flatten -> dense(256, relu) -> dropout 0.1 -> dense(n_classes)
// Branches are cumulative. Throws if any convolution would see an input
// shorter than its kernel, or n_classes < 2.
ModelSpec build_model(size_t W, size_t n_features, size_t n_classes);

}  // namespace dcifp
