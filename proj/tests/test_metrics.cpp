#include <doctest.h>

#include <cstdint>
#include <vector>

#include "dcifp/metrics.hpp"
#include "dcifp/rng.hpp"

using namespace dcifp;

namespace {

// Independent oracle: enumerate every (sample, class) pair and count
// TP/FP/FN with plain loops, then derive each published metric the same
// slow way. Shares no code with compute_metrics.
struct OracleReport {
    std::vector<uint64_t> tp, fp, fn, support;
    std::vector<double> precision, recall, f1;
    double accuracy = 0, macro_p = 0, macro_r = 0, macro_f1 = 0;
    double weighted_p = 0, weighted_r = 0, weighted_f1 = 0;
};

OracleReport oracle(const std::vector<AppLabel>& truth, const std::vector<AppLabel>& pred,
                    const std::vector<AppLabel>& classes) {
    const size_t n = classes.size();
    OracleReport o;
    o.tp.assign(n, 0);
    o.fp.assign(n, 0);
    o.fn.assign(n, 0);
    o.support.assign(n, 0);
    uint64_t correct = 0;
    for (size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == pred[i]) ++correct;
        for (size_t c = 0; c < n; ++c) {
            bool is_true = truth[i] == classes[c];
            bool is_pred = pred[i] == classes[c];
            if (is_true) ++o.support[c];
            if (is_true && is_pred) ++o.tp[c];
            if (!is_true && is_pred) ++o.fp[c];
            if (is_true && !is_pred) ++o.fn[c];
        }
    }
    o.accuracy = static_cast<double>(correct) / truth.size();
    o.precision.assign(n, 0);
    o.recall.assign(n, 0);
    o.f1.assign(n, 0);
    uint64_t tp_total = 0;
    for (size_t c = 0; c < n; ++c) {
        uint64_t denom_p = o.tp[c] + o.fp[c];
        uint64_t denom_r = o.tp[c] + o.fn[c];
        o.precision[c] = denom_p == 0 ? 0.0 : static_cast<double>(o.tp[c]) / denom_p;
        o.recall[c] = denom_r == 0 ? 0.0 : static_cast<double>(o.tp[c]) / denom_r;
        double pr = o.precision[c] + o.recall[c];
        o.f1[c] = pr == 0.0 ? 0.0 : 2.0 * o.precision[c] * o.recall[c] / pr;
        o.macro_p += o.precision[c];
        o.macro_r += o.recall[c];
        o.macro_f1 += o.f1[c];
        double w = static_cast<double>(o.support[c]) / truth.size();
        o.weighted_p += w * o.precision[c];
        o.weighted_f1 += w * o.f1[c];
        tp_total += o.tp[c];
    }
    o.macro_p /= n;
    o.macro_r /= n;
    o.macro_f1 /= n;
    o.weighted_r = static_cast<double>(tp_total) / truth.size();
    return o;
}

}  // namespace

TEST_CASE("worked two-class example matches hand arithmetic") {
    std::vector<AppLabel> truth = {"A", "A", "B", "B"};
    std::vector<AppLabel> pred = {"A", "B", "A", "B"};
    EvalReport r = compute_metrics(truth, pred, {"A", "B"});
    CHECK(r.accuracy == 0.5);
    CHECK(r.total == 4);
    CHECK(r.support == std::vector<uint64_t>{2, 2});
    for (size_t c = 0; c < 2; ++c) {
        CHECK(r.precision[c] == 0.5);
        CHECK(r.recall[c] == 0.5);
        CHECK(r.f1[c] == 0.5);
    }
    CHECK(r.macro_f1 == 0.5);
    CHECK(r.weighted_f1 == 0.5);
    CHECK(r.weighted_recall == r.accuracy);
    CHECK(!r.zero_division_hit);
    CHECK(r.confusion[0][0] == 1);
    CHECK(r.confusion[0][1] == 1);
    CHECK(r.confusion[1][0] == 1);
    CHECK(r.confusion[1][1] == 1);
}

TEST_CASE("pair-enumeration oracle agrees over random 8-class vectors") {
    std::vector<AppLabel> classes;
    for (int c = 0; c < 8; ++c) classes.push_back("app" + std::to_string(c));
    Rng rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
        size_t n = 50 + rng.uniform_int(0, 400);
        std::vector<AppLabel> truth, pred;
        for (size_t i = 0; i < n; ++i) {
            truth.push_back(classes[rng.uniform_int(0, 7)]);
            // skew predictions toward the truth so the confusion matrix has
            // realistic diagonal mass
            pred.push_back(rng.bernoulli(0.6) ? truth.back()
                                              : classes[rng.uniform_int(0, 7)]);
        }
        EvalReport r = compute_metrics(truth, pred, classes);
        OracleReport o = oracle(truth, pred, classes);
        for (size_t c = 0; c < classes.size(); ++c) {
            // integer-count level: row sums and diagonal vs pair counts
            CHECK(r.support[c] == o.support[c]);
            CHECK(r.confusion[c][c] == o.tp[c]);
            uint64_t col = 0, row = 0;
            for (size_t k = 0; k < classes.size(); ++k) {
                col += r.confusion[k][c];
                row += r.confusion[c][k];
            }
            CHECK(col - r.confusion[c][c] == o.fp[c]);
            CHECK(row - r.confusion[c][c] == o.fn[c]);
            CHECK(r.precision[c] == o.precision[c]);
            CHECK(r.recall[c] == o.recall[c]);
            CHECK(r.f1[c] == o.f1[c]);
        }
        CHECK(r.accuracy == o.accuracy);
        CHECK(r.macro_precision == o.macro_p);
        CHECK(r.macro_recall == o.macro_r);
        CHECK(r.macro_f1 == o.macro_f1);
        CHECK(r.weighted_precision == o.weighted_p);
        CHECK(r.weighted_recall == o.weighted_r);
        CHECK(r.weighted_f1 == o.weighted_f1);
        CHECK(r.weighted_recall == r.accuracy);  // identity, not approximation
    }
}

TEST_CASE("a class never predicted and never true hits the zero-division guard") {
    std::vector<AppLabel> truth = {"A", "A", "B"};
    std::vector<AppLabel> pred = {"A", "A", "A"};
    EvalReport r = compute_metrics(truth, pred, {"A", "B", "C"});
    CHECK(r.zero_division_hit);
    CHECK(r.precision[1] == 0.0);  // B predicted never
    CHECK(r.recall[1] == 0.0);
    CHECK(r.f1[1] == 0.0);
    CHECK(r.precision[2] == 0.0);  // C absent entirely
    CHECK(r.recall[2] == 0.0);
    CHECK(r.support[2] == 0);
    CHECK(r.accuracy == doctest::Approx(2.0 / 3.0));
    CHECK(r.weighted_recall == r.accuracy);
}

TEST_CASE("row normalization leaves degenerate rows at zero") {
    std::vector<AppLabel> truth = {"A", "A"};
    std::vector<AppLabel> pred = {"A", "B"};
    EvalReport r = compute_metrics(truth, pred, {"A", "B"});
    auto norm = normalized_confusion(r);
    CHECK(norm[0][0] == 0.5);
    CHECK(norm[0][1] == 0.5);
    CHECK(norm[1][0] == 0.0);
    CHECK(norm[1][1] == 0.0);
}

TEST_CASE("metric inputs are validated") {
    std::vector<AppLabel> one = {"A"};
    std::vector<AppLabel> two = {"A", "B"};
    CHECK_THROWS(compute_metrics({}, {}, {"A"}));
    CHECK_THROWS(compute_metrics(one, two, {"A", "B"}));
    CHECK_THROWS(compute_metrics(two, two, {}));
    CHECK_THROWS(compute_metrics(two, two, {"A"}));          // B missing
    CHECK_THROWS(compute_metrics(two, two, {"A", "B", "A"}));  // duplicate
}

TEST_CASE("report formatting carries every class and the accuracy line") {
    std::vector<AppLabel> truth = {"A", "B", "B"};
    std::vector<AppLabel> pred = {"A", "B", "A"};
    EvalReport r = compute_metrics(truth, pred, {"A", "B"});
    r.W = 40;
    std::string text = format_report(r);
    CHECK(text.find("Class") != std::string::npos);
    CHECK(text.find("accuracy") != std::string::npos);
    CHECK(text.find("window 40") != std::string::npos);
    std::string kv = report_key_values(r);
    CHECK(kv.find("accuracy=0.6666666666666666") != std::string::npos);
    CHECK(kv.find("class.B.recall=0.5\n") != std::string::npos);
    CHECK(kv.find("window=40") != std::string::npos);
}
