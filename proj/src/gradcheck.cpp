#include "dcifp/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "dcifp/reference.hpp"
#include "dcifp/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dcifp {
namespace {

// Smallest-magnitude shift d with |v + d| >= margin for every v. The
// feasible set is the complement of finitely many open intervals, so the
// optimum is 0 or an interval endpoint.
double clearing_shift(const std::vector<double>& values, double margin) {
    auto clear = [&](double d) {
        for (double v : values)
            if (std::fabs(v + d) < margin * (1.0 - 1e-9)) return false;
        return true;
    };
    if (clear(0.0)) return 0.0;
    double best = 0.0;
    bool found = false;
    for (double v : values)
        for (double d : {margin - v, -margin - v}) {
            if (!clear(d)) continue;
            if (!found || std::fabs(d) < std::fabs(best)) {
                best = d;
                found = true;
            }
        }
    if (!found) throw std::runtime_error("kink nudge: no clearing shift found");
    return best;
}

struct BaseState {
    std::vector<Workspace> ws;                          // per sample; acts intact
    std::vector<std::vector<std::vector<double>>> pre;  // [sample][layer] pre-activations
};

double rel_err(double a, double n, double floor_) {
    return std::fabs(a - n) / std::max({std::fabs(a), std::fabs(n), floor_});
}

// scratch.acts[li+1] := layer li's base output with flat parameter
// `local_p` of that layer shifted by `delta`. Pre-activations are linear
// in each parameter, so the perturbed output is exact (no re-run of the
// layer itself).
void perturbed_layer_output(const LayerDef& l, size_t local_p, double delta,
                            const std::vector<double>& in_acts,
                            const std::vector<double>& base_pre,
                            const std::vector<double>& base_post, bool frozen,
                            std::vector<double>& out) {
    out = base_post;
    auto decide = [&](size_t u, double new_pre) {
        if (!l.relu)
            out[u] = new_pre;
        else if (frozen)
            out[u] = base_post[u] > 0.0 ? new_pre : 0.0;
        else
            out[u] = new_pre > 0.0 ? new_pre : 0.0;
    };
    if (l.kind == LayerKind::Dense) {
        const size_t I = l.in_ch, J = l.out_ch;
        if (local_p < I * J) {
            size_t i = local_p / J, j = local_p % J;
            decide(j, base_pre[j] + delta * in_acts[i]);
        } else {
            decide(local_p - I * J, base_pre[local_p - I * J] + delta);
        }
        return;
    }
    const size_t K = l.kernel, C = l.in_ch, F = l.out_ch, L = l.in_len;
    const long pad = static_cast<long>((K - 1) / 2);
    if (local_p < K * C * F) {
        size_t k = local_p / (C * F), rem = local_p % (C * F);
        size_t c = rem / F, f = rem % F;
        for (size_t pos = 0; pos < L; ++pos) {
            long src = static_cast<long>(pos) + static_cast<long>(k) - pad;
            if (src < 0 || src >= static_cast<long>(L)) continue;
            double x = in_acts[static_cast<size_t>(src) * C + c];
            if (x == 0.0) continue;
            decide(pos * F + f, base_pre[pos * F + f] + delta * x);
        }
    } else {
        size_t f = local_p - K * C * F;
        for (size_t pos = 0; pos < L; ++pos) decide(pos * F + f, base_pre[pos * F + f] + delta);
    }
}

double batch_loss(const Network& net, Workspace& scratch, const BaseState& base,
                  const std::vector<size_t>& labels, size_t li, size_t local_p, double delta,
                  bool frozen) {
    const LayerDef& l = net.spec().layers[li];
    double sum = 0;
    for (size_t s = 0; s < base.ws.size(); ++s) {
        perturbed_layer_output(l, local_p, delta, base.ws[s].acts[li], base.pre[s][li],
                               base.ws[s].acts[li + 1], frozen, scratch.acts[li + 1]);
        net.forward_from(scratch, li + 1, frozen ? &base.ws[s] : nullptr);
        sum += net.loss_and_probs(scratch, labels[s]);
    }
    return sum / static_cast<double>(base.ws.size());
}

double central_diff(const Network& net, Workspace& scratch, const BaseState& base,
                    const std::vector<size_t>& labels, size_t li, size_t local_p, double h,
                    bool frozen) {
    double lp = batch_loss(net, scratch, base, labels, li, local_p, +h, frozen);
    double lm = batch_loss(net, scratch, base, labels, li, local_p, -h, frozen);
    return (lp - lm) / (2.0 * h);
}

}  // namespace

size_t nudge_relu_biases(Network& net, const std::vector<std::vector<double>>& inputs,
                         double margin) {
    if (margin <= 0) return 0;
    const ModelSpec& spec = net.spec();
    size_t changed = 0;
    Workspace ws;
    net.prepare(ws);
    std::vector<double> pre;
    for (size_t li = 0; li < spec.layers.size(); ++li) {
        const LayerDef& l = spec.layers[li];
        bool has_relu_params =
            (l.kind == LayerKind::Conv1D || l.kind == LayerKind::Dense) && l.relu;
        if (!has_relu_params) continue;
        const size_t F = l.out_ch;
        std::vector<std::vector<double>> groups(F);  // pre values sharing bias f
        pre.resize(l.out_size());
        for (const auto& in : inputs) {
            net.forward(ws, in.data(), false, 0);  // reflects nudges to earlier layers
            const double* w = net.params().data() + net.param_offset(li);
            if (l.kind == LayerKind::Conv1D) {
                ref::conv1d_pre(l, w, ws.acts[li].data(), pre.data());
                for (size_t pos = 0; pos < l.out_len; ++pos)
                    for (size_t f = 0; f < F; ++f) groups[f].push_back(pre[pos * F + f]);
            } else {
                ref::dense_pre(l, w, ws.acts[li].data(), pre.data());
                for (size_t j = 0; j < F; ++j) groups[j].push_back(pre[j]);
            }
        }
        double* bias = net.params().data() + net.param_offset(li) + l.weight_count();
        for (size_t f = 0; f < F; ++f) {
            double d = clearing_shift(groups[f], margin);
            if (d != 0.0) {
                bias[f] += d;
                ++changed;
            }
        }
    }
    net.refresh_transposes();
    return changed;
}

GradCheckReport numeric_grad_check(const Network& src_net,
                                   const std::vector<std::vector<double>>& inputs,
                                   const std::vector<size_t>& labels,
                                   const GradCheckOptions& opt) {
    if (inputs.empty()) throw std::runtime_error("gradient check: empty batch");
    if (inputs.size() != labels.size())
        throw std::runtime_error("gradient check: inputs/labels size mismatch");
    const ModelSpec& spec = src_net.spec();
    for (const auto& in : inputs)
        if (in.size() != spec.W * spec.n_features)
            throw std::runtime_error("gradient check: input size mismatch");
    for (size_t lb : labels)
        if (lb >= spec.n_classes) throw std::runtime_error("gradient check: label out of range");
    if (opt.h <= 0) throw std::runtime_error("gradient check: h must be positive");

    Network net = src_net;  // local copy; kink nudge may shift its biases
    GradCheckReport rep;
    rep.biases_nudged = nudge_relu_biases(net, inputs, opt.kink_margin);

    const size_t B = inputs.size();
    const size_t P = net.params().size();
    const size_t n_layers = spec.layers.size();
    rep.param_count = P;

    // Base pass: activations, reference pre-activations, analytic gradient.
    BaseState base;
    base.ws.resize(B);
    base.pre.resize(B);
    std::vector<double> analytic(P, 0.0);
    std::vector<double> dlogits(spec.n_classes);
    for (size_t s = 0; s < B; ++s) {
        Workspace& ws = base.ws[s];
        net.prepare(ws);
        net.forward(ws, inputs[s].data(), false, 0);
        base.pre[s].resize(n_layers);
        for (size_t li = 0; li < n_layers; ++li) {
            const LayerDef& l = spec.layers[li];
            if (l.kind != LayerKind::Conv1D && l.kind != LayerKind::Dense) continue;
            base.pre[s][li].resize(l.out_size());
            const double* w = net.params().data() + net.param_offset(li);
            if (l.kind == LayerKind::Conv1D)
                ref::conv1d_pre(l, w, ws.acts[li].data(), base.pre[s][li].data());
            else
                ref::dense_pre(l, w, ws.acts[li].data(), base.pre[s][li].data());
            // the optimized forward must agree with the reference kernel
            for (size_t u = 0; u < l.out_size(); ++u) {
                double want = l.relu ? std::max(0.0, base.pre[s][li][u]) : base.pre[s][li][u];
                if (std::fabs(want - ws.acts[li + 1][u]) >
                    1e-9 * std::max(1.0, std::fabs(want)))
                    throw std::runtime_error(
                        "gradient check: forward kernel disagrees with reference");
            }
        }
        net.loss_and_probs(ws, labels[s]);
        for (size_t j = 0; j < spec.n_classes; ++j)
            dlogits[j] = (ws.logits_scratch[j] - (j == labels[s] ? 1.0 : 0.0)) /
                         static_cast<double>(B);
        net.backward(ws, dlogits);
    }
    for (size_t s = 0; s < B; ++s)
        for (size_t p = 0; p < P; ++p) analytic[p] += base.ws[s].param_grad[p];

    // param -> owning layer
    std::vector<uint32_t> owner(P, 0);
    for (size_t li = 0; li < n_layers; ++li) {
        size_t off = net.param_offset(li);
        for (size_t p = off; p < off + spec.layers[li].param_count(); ++p)
            owner[p] = static_cast<uint32_t>(li);
    }

    std::vector<double> errs(P, 0.0);
    std::vector<uint8_t> retested(P, 0);
    auto process = [&](size_t p, Workspace& scratch) {
        size_t li = owner[p];
        size_t local_p = p - net.param_offset(li);
        double numeric = central_diff(net, scratch, base, labels, li, local_p, opt.h, false);
        double e = rel_err(analytic[p], numeric, opt.scale_floor);
        if (e > opt.suspect_threshold) {
            numeric = central_diff(net, scratch, base, labels, li, local_p, opt.h, true);
            e = rel_err(analytic[p], numeric, opt.scale_floor);
            retested[p] = 1;
        }
        errs[p] = e;
    };

    int threads = resolve_threads(opt.exec);
    if (threads <= 1) {
        Workspace scratch;
        net.prepare(scratch);
        for (size_t p = 0; p < P; ++p) process(p, scratch);
    } else {
#ifdef _OPENMP
#pragma omp parallel num_threads(threads)
        {
            Workspace scratch;
            net.prepare(scratch);
#pragma omp for schedule(dynamic, 256)
            for (long p = 0; p < static_cast<long>(P); ++p)
                process(static_cast<size_t>(p), scratch);
        }
#else
        Workspace scratch;
        net.prepare(scratch);
        for (size_t p = 0; p < P; ++p) process(p, scratch);
#endif
    }

    rep.per_layer.resize(n_layers);
    for (size_t li = 0; li < n_layers; ++li) {
        rep.per_layer[li].layer = li;
        rep.per_layer[li].param_count = spec.layers[li].param_count();
    }
    for (size_t p = 0; p < P; ++p) {
        rep.kink_retests += retested[p];
        auto& stat = rep.per_layer[owner[p]];
        stat.max_rel_err = std::max(stat.max_rel_err, errs[p]);
        if (errs[p] > rep.max_rel_err) {
            rep.max_rel_err = errs[p];
            rep.worst_param = p;
            rep.worst_layer = owner[p];
        }
    }
    rep.pass = rep.max_rel_err < opt.tolerance;
    return rep;
}

GradCheckReport numeric_grad_check(const ModelSpec& spec, uint64_t seed,
                                   const GradCheckOptions& opt) {
    Network net(spec);
    net.init_weights(mix_seed(seed, 0x6C41));
    Rng rng(mix_seed(seed, 0x6C42));
    std::vector<std::vector<double>> inputs(opt.batch);
    std::vector<size_t> labels(opt.batch);
    for (size_t s = 0; s < opt.batch; ++s) {
        inputs[s].resize(spec.W * spec.n_features);
        for (double& x : inputs[s]) x = rng.normal();
        labels[s] = static_cast<size_t>(rng.uniform_int(0, spec.n_classes - 1));
    }
    return numeric_grad_check(net, inputs, labels, opt);
}

std::string format_report(const GradCheckReport& rep) {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof(buf),
                  "params=%zu max_rel_err=%.3e worst_param=%zu (layer %zu) "
                  "nudged=%zu kink_retests=%zu %s\n",
                  rep.param_count, rep.max_rel_err, rep.worst_param, rep.worst_layer,
                  rep.biases_nudged, rep.kink_retests, rep.pass ? "PASS" : "FAIL");
    out += buf;
    for (const auto& st : rep.per_layer) {
        if (st.param_count == 0) continue;
        std::snprintf(buf, sizeof(buf), "  layer %zu: params=%zu max_rel_err=%.3e\n", st.layer,
                      st.param_count, st.max_rel_err);
        out += buf;
    }
    return out;
}

}  // namespace dcifp
