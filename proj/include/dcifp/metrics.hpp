#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcifp/dci.hpp"

namespace dcifp {

// Per-class and aggregate classification metrics plus the confusion
// matrix (rows = true class, columns = predicted class).
struct EvalReport {
    std::vector<AppLabel> class_order;
    std::vector<std::vector<uint64_t>> confusion;  // [true][pred] counts
    std::vector<double> precision, recall, f1;     // per class
    std::vector<uint64_t> support;                 // true count per class
    double macro_precision = 0, macro_recall = 0, macro_f1 = 0;
    double weighted_precision = 0, weighted_recall = 0, weighted_f1 = 0;
    double accuracy = 0;
    uint64_t total = 0;
    bool zero_division_hit = false;  // some per-class metric defaulted to 0
    size_t W = 0;                    // window size the predictions came from, 0 if n/a
};

// Count-exact metrics from parallel label vectors. Labels must be members
// of class_order; zero-denominator metrics are 0 by convention (flagged).
EvalReport compute_metrics(const std::vector<AppLabel>& true_labels,
                           const std::vector<AppLabel>& predicted_labels,
                           const std::vector<AppLabel>& class_order);

// Row-normalized confusion matrix; all-zero rows stay zero.
std::vector<std::vector<double>> normalized_confusion(const EvalReport& report);

// Aligned human-readable table (per-class rows + averages) and a
// machine-readable key=value dump.
std::string format_report(const EvalReport& report);
std::string report_key_values(const EvalReport& report);

}  // namespace dcifp
