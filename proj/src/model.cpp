#include "dcifp/model.hpp"

#include <stdexcept>
#include <string>

namespace dcifp {
namespace {

LayerDef conv(size_t len, size_t in_ch, size_t out_ch, size_t kernel) {
    if (len < kernel)
        throw std::runtime_error("build_model: input length " + std::to_string(len) +
                                 " is shorter than kernel " + std::to_string(kernel));
    LayerDef l;
    l.kind = LayerKind::Conv1D;
    l.in_len = l.out_len = len;  // same padding
    l.in_ch = in_ch;
    l.out_ch = out_ch;
    l.kernel = kernel;
    l.relu = true;
    return l;
}

LayerDef dropout(size_t len, size_t ch, double rate) {
    LayerDef l;
    l.kind = LayerKind::Dropout;
    l.in_len = l.out_len = len;
    l.in_ch = l.out_ch = ch;
    l.rate = rate;
    return l;
}

LayerDef maxpool2(size_t len, size_t ch) {
    LayerDef l;
    l.kind = LayerKind::MaxPool2;
    l.in_len = len;
    l.out_len = len / 2;  // floor; odd tail dropped
    l.in_ch = l.out_ch = ch;
    if (l.out_len == 0) throw std::runtime_error("build_model: maxpool on length-1 sequence");
    return l;
}

}  // namespace

ModelSpec build_model(size_t W, size_t n_features, size_t n_classes) {
    if (W < 1) throw std::runtime_error("build_model: W must be >= 1");
    if (n_features < 1) throw std::runtime_error("build_model: n_features must be >= 1");
    if (n_classes < 2) throw std::runtime_error("build_model: need at least 2 classes");

    ModelSpec spec;
    spec.W = W;
    spec.n_features = n_features;
    spec.n_classes = n_classes;

    size_t len = W, ch = n_features;
    spec.layers.push_back(conv(len, ch, 64, 5));
    ch = 64;
    spec.layers.push_back(dropout(len, ch, 0.2));
    if (W >= 40) {
        spec.layers.push_back(conv(len, ch, 64, 7));
        ch = 64;
        spec.layers.push_back(dropout(len, ch, 0.2));
        spec.layers.push_back(maxpool2(len, ch));
        len /= 2;
    }
    if (W >= 80) {
        spec.layers.push_back(conv(len, ch, 128, 9));
        ch = 128;
        spec.layers.push_back(dropout(len, ch, 0.3));
        spec.layers.push_back(maxpool2(len, ch));
        len /= 2;
    }
    LayerDef flat;
    flat.kind = LayerKind::Flatten;
    flat.in_len = len;
    flat.in_ch = ch;
    flat.out_len = 1;
    flat.out_ch = len * ch;
    spec.layers.push_back(flat);

    LayerDef d1;
    d1.kind = LayerKind::Dense;
    d1.in_ch = len * ch;
    d1.out_ch = 256;
    d1.in_len = d1.out_len = 1;
    d1.relu = true;
    spec.layers.push_back(d1);

    spec.layers.push_back(dropout(1, 256, 0.1));

    LayerDef d2;
    d2.kind = LayerKind::Dense;
    d2.in_ch = 256;
    d2.out_ch = n_classes;
    d2.in_len = d2.out_len = 1;
    spec.layers.push_back(d2);
    return spec;
}

}  // namespace dcifp
