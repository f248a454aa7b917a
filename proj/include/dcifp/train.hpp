#pragma once

#include <optional>
#include <string>

#include "dcifp/features.hpp"
#include "dcifp/network.hpp"

namespace dcifp {

struct TrainConfig {
    size_t epochs = 30;
    size_t batch_size = 64;
    double learning_rate = 1e-3;
    std::string optimizer = "adam";  // or "sgd"
    uint64_t seed = 0;
    double val_fraction = 0.1;  // stratified 9:1 split
    size_t patience = 0;        // stop after this many epochs without val improvement; 0 = off
    ExecConfig exec;
};

// Trained model + everything inference needs to reproduce training-time
// conditions (class order, window size, burst filter, unit scaling).
struct ModelBundle {
    Network net;
    std::vector<AppLabel> class_order;
    uint32_t burst_gap_ms = kDefaultBurstGapMs;
    // training record
    uint64_t seed = 0;
    std::vector<double> train_loss;    // per epoch (mean cross-entropy)
    std::vector<double> val_accuracy;  // per epoch; empty if no validation split
    uint32_t restored_epoch = 0;       // 1-based epoch whose weights are stored; 0 = last run epoch

    explicit ModelBundle(ModelSpec spec) : net(std::move(spec)) {}

    double final_val_accuracy() const {
        return val_accuracy.empty() ? 0.0
               : restored_epoch > 0 ? val_accuracy[restored_epoch - 1]
                                    : val_accuracy.back();
    }
};

// Train the window classifier. Labels must be present on every sample and
// all samples must share one window size. Classes are balanced by
// downsampling to the minority count, then split stratified by class.
// When class_order is given, every listed class must appear in the data
// (and no others may); otherwise the order is the canonical app order for
// known labels, any remaining labels appended sorted.
ModelBundle train(const std::vector<WindowSample>& samples, const TrainConfig& cfg,
                  const std::optional<std::vector<AppLabel>>& class_order = std::nullopt,
                  uint32_t burst_gap_ms = kDefaultBurstGapMs);

struct Prediction {
    size_t class_index = 0;
    double confidence = 0;
    std::vector<double> probs;
};

// Inference on one window (no dropout). Tie on max probability goes to
// the lowest class index.
Prediction predict(const ModelBundle& bundle, const WindowSample& sample);

// Batch inference; outputs are independent of engine/thread choice.
std::vector<Prediction> predict_batch(const ModelBundle& bundle,
                                      const std::vector<WindowSample>& samples,
                                      const ExecConfig& exec = {});

// Order used when train() derives classes from data.
std::vector<AppLabel> canonical_class_order(const std::vector<WindowSample>& samples);

}  // namespace dcifp
