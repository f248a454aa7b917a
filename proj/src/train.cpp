#include "dcifp/train.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "dcifp/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dcifp {
namespace {

void flatten_sample(const WindowSample& s, std::vector<double>& out) {
    out.resize(s.rows.size() * kNumFeatures);
    for (size_t i = 0; i < s.rows.size(); ++i) {
        out[i * kNumFeatures + 0] = s.rows[i].direction_code;
        out[i * kNumFeatures + 1] = s.rows[i].tbs_kb;
        out[i * kNumFeatures + 2] = s.rows[i].dt_s;
    }
}

void shuffle_indices(std::vector<size_t>& idx, Rng& rng) {
    for (size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.uniform_int(0, i - 1)]);
}

struct Adam {
    std::vector<double> m, v;
    double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    uint64_t t = 0;

    void step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
        if (m.empty()) {
            m.assign(params.size(), 0.0);
            v.assign(params.size(), 0.0);
        }
        ++t;
        double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
        double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
        for (size_t i = 0; i < params.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
            v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
            params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
};

}  // namespace

std::vector<AppLabel> canonical_class_order(const std::vector<WindowSample>& samples) {
    std::set<AppLabel> present;
    for (const auto& s : samples) {
        if (!s.label) throw std::runtime_error("train: unlabeled sample in training data");
        present.insert(*s.label);
    }
    std::vector<AppLabel> order;
    for (const auto& l : default_app_labels())
        if (present.erase(l)) order.push_back(l);
    for (const auto& l : present) order.push_back(l);  // set iterates sorted
    return order;
}

ModelBundle train(const std::vector<WindowSample>& samples, const TrainConfig& cfg,
                  const std::optional<std::vector<AppLabel>>& class_order_opt,
                  uint32_t burst_gap_ms) {
    if (samples.empty()) throw std::runtime_error("train: empty dataset");
    if (!(cfg.val_fraction >= 0.0 && cfg.val_fraction < 1.0))
        throw std::runtime_error("train: val_fraction must be in [0, 1)");
    if (cfg.batch_size < 1) throw std::runtime_error("train: batch_size must be >= 1");
    if (cfg.epochs < 1) throw std::runtime_error("train: epochs must be >= 1");
    if (cfg.optimizer != "adam" && cfg.optimizer != "sgd")
        throw std::runtime_error("train: unknown optimizer '" + cfg.optimizer + "'");

    const size_t W = samples[0].rows.size();
    for (const auto& s : samples)
        if (s.rows.size() != W)
            throw std::runtime_error("train: inconsistent window sizes (" + std::to_string(W) +
                                     " vs " + std::to_string(s.rows.size()) + ")");

    std::vector<AppLabel> class_order =
        class_order_opt ? *class_order_opt : canonical_class_order(samples);
    std::map<AppLabel, size_t> class_index;
    for (size_t i = 0; i < class_order.size(); ++i) class_index[class_order[i]] = i;
    if (class_index.size() != class_order.size())
        throw std::runtime_error("train: duplicate class in class order");

    // bucket per class
    std::vector<std::vector<size_t>> by_class(class_order.size());
    for (size_t i = 0; i < samples.size(); ++i) {
        if (!samples[i].label) throw std::runtime_error("train: unlabeled sample in training data");
        auto it = class_index.find(*samples[i].label);
        if (it == class_index.end())
            throw std::runtime_error("train: label '" + *samples[i].label +
                                     "' not in the requested class order");
        by_class[it->second].push_back(i);
    }
    size_t minority = samples.size();
    for (size_t c = 0; c < by_class.size(); ++c) {
        if (by_class[c].empty())
            throw std::runtime_error("train: class '" + class_order[c] +
                                     "' absent from training data");
        minority = std::min(minority, by_class[c].size());
    }
    if (class_order.size() < 2) throw std::runtime_error("train: need at least 2 classes");
    if (minority < 2)
        throw std::runtime_error("train: every class needs at least 2 samples");

    // balance by downsampling to the minority count, then stratified split
    Rng split_rng(mix_seed(cfg.seed, 0xBA7A));
    std::vector<size_t> train_idx, val_idx;
    size_t val_per_class = static_cast<size_t>(std::llround(
        static_cast<double>(minority) * cfg.val_fraction));
    if (cfg.val_fraction > 0.0 && val_per_class == 0) val_per_class = 1;
    if (val_per_class >= minority) val_per_class = minority - 1;
    for (size_t c = 0; c < by_class.size(); ++c) {
        shuffle_indices(by_class[c], split_rng);
        by_class[c].resize(minority);
        for (size_t i = 0; i < minority; ++i)
            (i < val_per_class ? val_idx : train_idx).push_back(by_class[c][i]);
    }

    ModelBundle bundle(build_model(W, kNumFeatures, class_order.size()));
    bundle.class_order = class_order;
    bundle.burst_gap_ms = burst_gap_ms;
    bundle.seed = cfg.seed;
    Network& net = bundle.net;
    net.init_weights(cfg.seed);

    // pre-flatten inputs once
    std::vector<std::vector<double>> inputs(samples.size());
    std::vector<size_t> targets(samples.size());
    for (size_t i : train_idx) {
        flatten_sample(samples[i], inputs[i]);
        targets[i] = class_index[*samples[i].label];
    }
    for (size_t i : val_idx) {
        flatten_sample(samples[i], inputs[i]);
        targets[i] = class_index[*samples[i].label];
    }

    const int n_threads = resolve_threads(cfg.exec);
    std::vector<Workspace> ws(static_cast<size_t>(n_threads));
    for (auto& w : ws) net.prepare(w);
    std::vector<double> grad(net.params().size());
    Adam adam;
    const uint64_t drop_root = mix_seed(cfg.seed, 0xD607);

    std::vector<double> best_params;
    double best_val = -1.0;
    uint32_t best_epoch = 0;
    size_t since_best = 0;

    std::vector<size_t> order = train_idx;
    std::vector<double> dlogits(class_order.size());

    for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng epoch_rng(mix_seed(cfg.seed, 0xE990 + epoch));
        shuffle_indices(order, epoch_rng);
        double epoch_loss = 0.0;

        for (size_t batch_start = 0; batch_start < order.size(); batch_start += cfg.batch_size) {
            const size_t b = std::min(cfg.batch_size, order.size() - batch_start);
            const double inv_b = 1.0 / static_cast<double>(b);
            for (auto& w : ws) {
                std::fill(w.param_grad.begin(), w.param_grad.end(), 0.0);
                w.loss_sum = 0.0;
            }

            auto run_range = [&](size_t lo, size_t hi, Workspace& w) {
                for (size_t bi = lo; bi < hi; ++bi) {
                    const size_t si = order[batch_start + bi];
                    // mask stream depends only on (seed, epoch, sample), so
                    // batch partitioning and threading cannot change it
                    uint64_t drop_seed = mix_seed(drop_root, (static_cast<uint64_t>(epoch) << 40) ^ si);
                    net.forward(w, inputs[si].data(), true, drop_seed);
                    w.loss_sum += net.loss_and_probs(w, targets[si]);
                    std::vector<double> dl = w.logits_scratch;
                    dl[targets[si]] -= 1.0;
                    for (double& g : dl) g *= inv_b;
                    net.backward(w, dl);
                }
            };

            if (cfg.exec.engine == Engine::OpenMP && n_threads > 1) {
#ifdef _OPENMP
#pragma omp parallel num_threads(n_threads)
                {
                    const size_t t = static_cast<size_t>(omp_get_thread_num());
                    const size_t chunk = (b + static_cast<size_t>(n_threads) - 1) /
                                         static_cast<size_t>(n_threads);
                    const size_t lo = std::min(b, t * chunk);
                    const size_t hi = std::min(b, lo + chunk);
                    run_range(lo, hi, ws[t]);
                }
#endif
            } else {
                run_range(0, b, ws[0]);
            }

            // reduce per-thread gradients in thread order (deterministic for
            // a fixed thread count; one thread reproduces the serial engine)
            grad = ws[0].param_grad;
            double batch_loss = ws[0].loss_sum;
            for (size_t t = 1; t < ws.size(); ++t) {
                const auto& g = ws[t].param_grad;
                for (size_t i = 0; i < grad.size(); ++i) grad[i] += g[i];
                batch_loss += ws[t].loss_sum;
            }
            epoch_loss += batch_loss;

            if (cfg.optimizer == "adam") {
                adam.step(net.params(), grad, cfg.learning_rate);
            } else {
                auto& p = net.params();
                for (size_t i = 0; i < p.size(); ++i) p[i] -= cfg.learning_rate * grad[i];
            }
            net.refresh_transposes();
        }
        bundle.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));

        if (!val_idx.empty()) {
            size_t correct = 0;
            Workspace& w = ws[0];
            for (size_t si : val_idx) {
                net.forward(w, inputs[si].data(), false, 0);
                std::vector<double> probs = net.output(w);
                softmax_inplace(probs);
                if (argmax_lowest(probs) == targets[si]) ++correct;
            }
            double acc = static_cast<double>(correct) / static_cast<double>(val_idx.size());
            bundle.val_accuracy.push_back(acc);
            if (acc > best_val) {
                best_val = acc;
                best_params = net.params();
                best_epoch = static_cast<uint32_t>(epoch + 1);
                since_best = 0;
            } else if (++since_best >= cfg.patience && cfg.patience > 0) {
                break;
            }
        }
    }

    if (!best_params.empty()) {
        net.params() = best_params;
        net.refresh_transposes();
        bundle.restored_epoch = best_epoch;
    }
    return bundle;
}

Prediction predict(const ModelBundle& bundle, const WindowSample& sample) {
    if (sample.rows.size() != bundle.net.spec().W)
        throw std::runtime_error("predict: sample has " + std::to_string(sample.rows.size()) +
                                 " rows; model expects " + std::to_string(bundle.net.spec().W));
    Workspace ws;
    bundle.net.prepare(ws);
    std::vector<double> input;
    flatten_sample(sample, input);
    bundle.net.forward(ws, input.data(), false, 0);
    Prediction p;
    p.probs = bundle.net.output(ws);
    softmax_inplace(p.probs);
    p.class_index = argmax_lowest(p.probs);
    p.confidence = p.probs[p.class_index];
    return p;
}

std::vector<Prediction> predict_batch(const ModelBundle& bundle,
                                      const std::vector<WindowSample>& samples,
                                      const ExecConfig& exec) {
    for (const auto& s : samples)
        if (s.rows.size() != bundle.net.spec().W)
            throw std::runtime_error("predict_batch: window size mismatch");
    std::vector<Prediction> out(samples.size());
    const int n_threads = resolve_threads(exec);
    if (exec.engine == Engine::OpenMP && n_threads > 1) {
#ifdef _OPENMP
#pragma omp parallel num_threads(n_threads)
        {
            Workspace ws;
            bundle.net.prepare(ws);
            std::vector<double> input;
#pragma omp for schedule(static)
            for (size_t i = 0; i < samples.size(); ++i) {
                flatten_sample(samples[i], input);
                bundle.net.forward(ws, input.data(), false, 0);
                Prediction p;
                p.probs = bundle.net.output(ws);
                softmax_inplace(p.probs);
                p.class_index = argmax_lowest(p.probs);
                p.confidence = p.probs[p.class_index];
                out[i] = std::move(p);
            }
        }
#endif
    } else {
        Workspace ws;
        bundle.net.prepare(ws);
        std::vector<double> input;
        for (size_t i = 0; i < samples.size(); ++i) {
            flatten_sample(samples[i], input);
            bundle.net.forward(ws, input.data(), false, 0);
            Prediction p;
            p.probs = bundle.net.output(ws);
            softmax_inplace(p.probs);
            p.class_index = argmax_lowest(p.probs);
            p.confidence = p.probs[p.class_index];
            out[i] = std::move(p);
        }
    }
    return out;
}

}  // namespace dcifp
