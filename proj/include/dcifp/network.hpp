#pragma once

#include <cstdint>
#include <vector>

#include "dcifp/model.hpp"

namespace dcifp {

// Batch-level execution strategy. Kernels are identical; OpenMP splits
// independent work (samples, parameters, UEs) across threads. Serial is
// the reference implementation and equals OpenMP at one thread bit for
// bit. Results are bit-deterministic for a fixed (engine, threads) pair.
enum class Engine : uint8_t { Serial, OpenMP };

struct ExecConfig {
    Engine engine = Engine::OpenMP;
    int threads = 0;  // 0 = runtime default
};

int resolve_threads(const ExecConfig& exec);

// Per-worker scratch: activations after every layer (index i+1; index 0
// is the input), matching gradient buffers, dropout masks, and a flat
// parameter-gradient accumulator. Reused across samples.
struct Workspace {
    std::vector<std::vector<double>> acts;
    std::vector<std::vector<double>> grads;
    std::vector<std::vector<double>> drop_mask;  // per layer; empty when inactive
    std::vector<double> param_grad;
    std::vector<double> logits_scratch;  // softmax probabilities
    double loss_sum = 0;
    uint64_t loss_count = 0;
};

// Weights in one flat vector (per layer: weights then biases, in plan
// order) plus cached transposes for the backward data pass. Forward and
// backward are plain deterministic loops laid out so the innermost index
// runs over contiguous output channels / input channels.
class Network {
public:
    explicit Network(ModelSpec spec);

    const ModelSpec& spec() const { return spec_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    size_t param_offset(size_t layer) const { return offsets_[layer]; }
    // layer index owning flat parameter i
    size_t layer_of_param(size_t param_index) const;

    // fan-in-scaled uniform init; biases get a small positive constant so
    // ReLU units start active
    void init_weights(uint64_t seed);
    // must be called after any direct params() mutation before backward()
    void refresh_transposes();

    void prepare(Workspace& ws) const;

    // Full forward. `drop_seed` keys the dropout masks when training;
    // masks are counter-hashed from (drop_seed, layer), so results do not
    // depend on batching or thread schedule.
    void forward(Workspace& ws, const double* input, bool training, uint64_t drop_seed) const;
    // Recompute layers [first_layer, end) reusing ws.acts below first_layer.
    // `frozen`: keep the base run's ReLU/pool decisions from `base` (used
    // by the gradient checker at kinks). Inference-mode only.
    void forward_from(Workspace& ws, size_t first_layer, const Workspace* frozen_base) const;

    // Softmax + cross-entropy against true class; fills ws.logits_scratch
    // with probabilities and returns the loss.
    double loss_and_probs(Workspace& ws, size_t true_class) const;
    static double loss_from_probs(const std::vector<double>& probs, size_t true_class);

    // Backprop from d(loss)/d(logits) (length n_classes, already scaled);
    // accumulates into ws.param_grad.
    void backward(Workspace& ws, const std::vector<double>& dlogits) const;

    const std::vector<double>& output(const Workspace& ws) const { return ws.acts.back(); }

private:
    // frozen_relu: base-run post-activations; when non-null the ReLU uses
    // the base run's on/off pattern instead of the sign of the new
    // pre-activation (keeps the function locally linear at kinks).
    void conv_forward(const LayerDef& l, const double* w, const double* in, double* out,
                      const double* frozen_relu) const;
    void conv_backward(const LayerDef& l, size_t layer_idx, Workspace& ws) const;
    void dense_forward(const LayerDef& l, const double* w, const double* in, double* out,
                       const double* frozen_relu) const;
    void dense_backward(const LayerDef& l, size_t layer_idx, Workspace& ws) const;

    ModelSpec spec_;
    std::vector<double> params_;
    std::vector<size_t> offsets_;           // per layer, into params_
    std::vector<std::vector<double>> wt_;   // per layer transposed weights
};

// softmax probabilities + argmax with lowest-index tie break
size_t argmax_lowest(const std::vector<double>& v);
void softmax_inplace(std::vector<double>& v);

}  // namespace dcifp
