#include "dcifp/metrics.hpp"

#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dcifp {

EvalReport compute_metrics(const std::vector<AppLabel>& true_labels,
                           const std::vector<AppLabel>& predicted_labels,
                           const std::vector<AppLabel>& class_order) {
    if (true_labels.empty()) throw std::runtime_error("compute_metrics: empty input");
    if (true_labels.size() != predicted_labels.size())
        throw std::runtime_error("compute_metrics: label list length mismatch");
    if (class_order.empty()) throw std::runtime_error("compute_metrics: empty class order");

    std::map<AppLabel, size_t> index;
    for (size_t i = 0; i < class_order.size(); ++i) {
        if (!index.emplace(class_order[i], i).second)
            throw std::runtime_error("compute_metrics: duplicate class '" + class_order[i] + "'");
    }
    auto idx = [&](const AppLabel& l) {
        auto it = index.find(l);
        if (it == index.end())
            throw std::runtime_error("compute_metrics: label '" + l + "' not in class order");
        return it->second;
    };

    const size_t n = class_order.size();
    EvalReport rep;
    rep.class_order = class_order;
    rep.confusion.assign(n, std::vector<uint64_t>(n, 0));
    for (size_t i = 0; i < true_labels.size(); ++i)
        ++rep.confusion[idx(true_labels[i])][idx(predicted_labels[i])];

    rep.total = true_labels.size();
    rep.precision.assign(n, 0.0);
    rep.recall.assign(n, 0.0);
    rep.f1.assign(n, 0.0);
    rep.support.assign(n, 0);

    uint64_t correct = 0;
    std::vector<uint64_t> col_sum(n, 0);
    for (size_t t = 0; t < n; ++t) {
        for (size_t p = 0; p < n; ++p) {
            rep.support[t] += rep.confusion[t][p];
            col_sum[p] += rep.confusion[t][p];
        }
        correct += rep.confusion[t][t];
    }
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(rep.total);

    for (size_t c = 0; c < n; ++c) {
        uint64_t tp = rep.confusion[c][c];
        uint64_t predicted = col_sum[c];
        rep.precision[c] = predicted == 0 ? 0.0 : static_cast<double>(tp) / predicted;
        rep.recall[c] = rep.support[c] == 0 ? 0.0 : static_cast<double>(tp) / rep.support[c];
        double pr = rep.precision[c] + rep.recall[c];
        rep.f1[c] = pr == 0.0 ? 0.0 : 2.0 * rep.precision[c] * rep.recall[c] / pr;
        if (predicted == 0 || rep.support[c] == 0 || pr == 0.0) rep.zero_division_hit = true;
    }

    for (size_t c = 0; c < n; ++c) {
        rep.macro_precision += rep.precision[c];
        rep.macro_recall += rep.recall[c];
        rep.macro_f1 += rep.f1[c];
        double w = static_cast<double>(rep.support[c]) / rep.total;
        rep.weighted_precision += w * rep.precision[c];
        rep.weighted_f1 += w * rep.f1[c];
    }
    rep.macro_precision /= n;
    rep.macro_recall /= n;
    rep.macro_f1 /= n;
    // support-weighted recall is sum_c (support_c/total)*(tp_c/support_c)
    // = sum_c tp_c / total; computing it from the counts keeps the identity
    // with accuracy exact instead of accumulating per-class rounding
    rep.weighted_recall = static_cast<double>(correct) / static_cast<double>(rep.total);
    return rep;
}

std::vector<std::vector<double>> normalized_confusion(const EvalReport& report) {
    const size_t n = report.class_order.size();
    std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
    for (size_t t = 0; t < n; ++t) {
        uint64_t row_sum = 0;
        for (size_t p = 0; p < n; ++p) row_sum += report.confusion[t][p];
        if (row_sum == 0) continue;  // degenerate row stays zero
        for (size_t p = 0; p < n; ++p)
            out[t][p] = static_cast<double>(report.confusion[t][p]) / row_sum;
    }
    return out;
}

std::string format_report(const EvalReport& report) {
    std::ostringstream os;
    size_t name_w = 8;
    for (const auto& c : report.class_order) name_w = std::max(name_w, c.size());
    os << std::left << std::setw(static_cast<int>(name_w) + 2) << "Class"
       << std::right << std::setw(10) << "Precision" << std::setw(9) << "Recall"
       << std::setw(9) << "F1" << std::setw(10) << "Support" << "\n";
    os << std::fixed << std::setprecision(3);
    for (size_t c = 0; c < report.class_order.size(); ++c) {
        os << std::left << std::setw(static_cast<int>(name_w) + 2) << report.class_order[c]
           << std::right << std::setw(10) << report.precision[c] << std::setw(9)
           << report.recall[c] << std::setw(9) << report.f1[c] << std::setw(10)
           << report.support[c] << "\n";
    }
    os << std::left << std::setw(static_cast<int>(name_w) + 2) << "macro" << std::right
       << std::setw(10) << report.macro_precision << std::setw(9) << report.macro_recall
       << std::setw(9) << report.macro_f1 << std::setw(10) << report.total << "\n";
    os << std::left << std::setw(static_cast<int>(name_w) + 2) << "weighted" << std::right
       << std::setw(10) << report.weighted_precision << std::setw(9) << report.weighted_recall
       << std::setw(9) << report.weighted_f1 << std::setw(10) << report.total << "\n";
    os << "accuracy " << report.accuracy << "  (" << report.total << " samples";
    if (report.W) os << ", window " << report.W;
    os << ")\n";
    os << "\nConfusion (rows = true, cols = predicted, row-normalized):\n";
    auto norm = normalized_confusion(report);
    for (size_t t = 0; t < norm.size(); ++t) {
        os << std::left << std::setw(static_cast<int>(name_w) + 2) << report.class_order[t]
           << std::right;
        for (double v : norm[t]) os << std::setw(7) << std::setprecision(2) << v;
        os << "\n" << std::setprecision(3);
    }
    return os.str();
}

std::string report_key_values(const EvalReport& report) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "samples=" << report.total << "\n";
    if (report.W) os << "window=" << report.W << "\n";
    os << "accuracy=" << report.accuracy << "\n";
    os << "macro_precision=" << report.macro_precision << "\n";
    os << "macro_recall=" << report.macro_recall << "\n";
    os << "macro_f1=" << report.macro_f1 << "\n";
    os << "weighted_precision=" << report.weighted_precision << "\n";
    os << "weighted_recall=" << report.weighted_recall << "\n";
    os << "weighted_f1=" << report.weighted_f1 << "\n";
    for (size_t c = 0; c < report.class_order.size(); ++c) {
        os << "class." << report.class_order[c] << ".precision=" << report.precision[c] << "\n";
        os << "class." << report.class_order[c] << ".recall=" << report.recall[c] << "\n";
        os << "class." << report.class_order[c] << ".f1=" << report.f1[c] << "\n";
        os << "class." << report.class_order[c] << ".support=" << report.support[c] << "\n";
    }
    return os.str();
}

}  // namespace dcifp
