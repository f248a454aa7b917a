#include "dcifp/model_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "dcifp/digest.hpp"

namespace dcifp {
namespace {

constexpr char kMagic[8] = {'D', 'C', 'I', 'F', 'P', 'M', '0', '1'};

struct Writer {
    std::string buf;
    void raw(const void* p, size_t n) { buf.append(static_cast<const char*>(p), n); }
    void u32(uint32_t v) { raw(&v, 4); }
    void u64(uint64_t v) { raw(&v, 8); }
    void f64(double v) { raw(&v, 8); }
    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
};

struct Reader {
    const std::string& buf;
    size_t pos = 0;
    const std::string& path;
    void raw(void* p, size_t n) {
        if (pos + n > buf.size())
            throw std::runtime_error(path + ": truncated model file");
        std::memcpy(p, buf.data() + pos, n);
        pos += n;
    }
    uint32_t u32() { uint32_t v; raw(&v, 4); return v; }
    uint64_t u64() { uint64_t v; raw(&v, 8); return v; }
    double f64() { double v; raw(&v, 8); return v; }
    std::string str() {
        uint32_t n = u32();
        if (n > (1u << 20)) throw std::runtime_error(path + ": unreasonable string length");
        std::string s(n, '\0');
        raw(s.data(), n);
        return s;
    }
};

}  // namespace

void save_model(const ModelBundle& bundle, const std::string& path) {
    const ModelSpec& spec = bundle.net.spec();
    Writer w;
    w.raw(kMagic, 8);
    w.u32(static_cast<uint32_t>(spec.W));
    w.u32(static_cast<uint32_t>(spec.n_features));
    w.u32(static_cast<uint32_t>(spec.n_classes));
    w.u32(0);  // padding mode 0 = "same"
    w.u32(bundle.burst_gap_ms);
    w.f64(spec.tbs_kb_per_bit);
    w.f64(spec.dt_s_per_ms);
    if (bundle.class_order.size() != spec.n_classes)
        throw std::runtime_error("save_model: class order / n_classes mismatch");
    for (const auto& label : bundle.class_order) w.str(label);
    w.u64(bundle.seed);
    w.u32(bundle.restored_epoch);
    w.u32(static_cast<uint32_t>(bundle.train_loss.size()));
    for (size_t e = 0; e < bundle.train_loss.size(); ++e) {
        w.f64(bundle.train_loss[e]);
        w.f64(e < bundle.val_accuracy.size() ? bundle.val_accuracy[e]
                                             : std::numeric_limits<double>::quiet_NaN());
    }
    const auto& params = bundle.net.params();
    w.u64(params.size());
    w.raw(params.data(), params.size() * sizeof(double));
    uint64_t digest = fnv1a64(w.buf.data(), w.buf.size());
    w.u64(digest);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open model file for write: " + path);
    out.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
    out.flush();
    if (!out) throw std::runtime_error("model write failure: " + path);
}

ModelBundle load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 8 + 8 || std::memcmp(buf.data(), kMagic, 8) != 0)
        throw std::runtime_error(path + ": not a model file (bad magic)");
    uint64_t stored_digest;
    std::memcpy(&stored_digest, buf.data() + buf.size() - 8, 8);
    if (fnv1a64(buf.data(), buf.size() - 8) != stored_digest)
        throw std::runtime_error(path + ": model file corrupt (digest mismatch)");

    Reader r{buf, 8, path};
    uint32_t W = r.u32(), n_features = r.u32(), n_classes = r.u32();
    uint32_t padding = r.u32();
    if (padding != 0) throw std::runtime_error(path + ": unsupported padding mode");
    uint32_t burst_gap_ms = r.u32();
    double tbs_scale = r.f64(), dt_scale = r.f64();

    ModelSpec spec = build_model(W, n_features, n_classes);
    spec.tbs_kb_per_bit = tbs_scale;
    spec.dt_s_per_ms = dt_scale;
    ModelBundle bundle(spec);
    bundle.burst_gap_ms = burst_gap_ms;
    for (uint32_t i = 0; i < n_classes; ++i) bundle.class_order.push_back(r.str());
    bundle.seed = r.u64();
    bundle.restored_epoch = r.u32();
    uint32_t n_epochs = r.u32();
    for (uint32_t e = 0; e < n_epochs; ++e) {
        bundle.train_loss.push_back(r.f64());
        double va = r.f64();
        if (!std::isnan(va)) bundle.val_accuracy.push_back(va);
    }
    uint64_t n_params = r.u64();
    if (n_params != bundle.net.params().size())
        throw std::runtime_error(path + ": parameter count does not match architecture");
    r.raw(bundle.net.params().data(), n_params * sizeof(double));
    if (r.pos != buf.size() - 8)
        throw std::runtime_error(path + ": trailing bytes in model file");
    bundle.net.refresh_transposes();
    return bundle;
}

}  // namespace dcifp
