// Throughput comparison of the optimized forward pass against the plain
// reference kernels, and of Serial vs OpenMP batch inference. Run with no
// arguments; prints one block per window size.

#include <cstdio>
#include <vector>

#include <omp.h>

#include "dcifp/model.hpp"
#include "dcifp/network.hpp"
#include "dcifp/reference.hpp"
#include "dcifp/rng.hpp"
#include "dcifp/train.hpp"

using namespace dcifp;

namespace {

std::vector<std::vector<double>> random_inputs(const ModelSpec& spec, size_t n, uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> inputs(n);
    for (auto& v : inputs) {
        v.resize(spec.W * spec.n_features);
        for (auto& x : v) x = rng.normal();
    }
    return inputs;
}

std::vector<WindowSample> as_samples(const std::vector<std::vector<double>>& inputs, size_t W) {
    std::vector<WindowSample> samples(inputs.size());
    for (size_t i = 0; i < inputs.size(); ++i) {
        samples[i].rows.resize(W);
        for (size_t r = 0; r < W; ++r) {
            samples[i].rows[r].direction_code = inputs[i][r * kNumFeatures + 0];
            samples[i].rows[r].tbs_kb = inputs[i][r * kNumFeatures + 1];
            samples[i].rows[r].dt_s = inputs[i][r * kNumFeatures + 2];
        }
    }
    return samples;
}

void bench_window(size_t W, size_t n_inputs) {
    ModelSpec spec = build_model(W, kNumFeatures, 8);
    Network net(spec);
    net.init_weights(7);
    auto inputs = random_inputs(spec, n_inputs, 99);

    std::printf("W=%zu, %zu forward passes, %zu parameters\n", W, n_inputs,
                net.params().size());

    // single-pass: reference kernels vs optimized forward
    double sink_ref = 0.0;
    double t0 = omp_get_wtime();
    for (const auto& in : inputs) sink_ref += ref::forward_inference(net, in)[0];
    double t_ref = omp_get_wtime() - t0;

    Workspace ws;
    net.prepare(ws);
    double sink_opt = 0.0;
    t0 = omp_get_wtime();
    for (const auto& in : inputs) {
        net.forward(ws, in.data(), /*training=*/false, /*drop_seed=*/0);
        sink_opt += net.output(ws)[0];
    }
    double t_opt = omp_get_wtime() - t0;

    // batch inference: Serial vs OpenMP engine
    ModelBundle bundle(spec);
    bundle.net = net;
    for (int k = 0; k < 8; ++k) bundle.class_order.push_back("class" + std::to_string(k));
    auto samples = as_samples(inputs, W);

    ExecConfig serial{Engine::Serial, 0};
    t0 = omp_get_wtime();
    auto p1 = predict_batch(bundle, samples, serial);
    double t_serial = omp_get_wtime() - t0;

    ExecConfig openmp{Engine::OpenMP, 0};
    t0 = omp_get_wtime();
    auto p2 = predict_batch(bundle, samples, openmp);
    double t_omp = omp_get_wtime() - t0;

    size_t agree = 0;
    for (size_t i = 0; i < p1.size(); ++i) agree += p1[i].class_index == p2[i].class_index;

    std::printf("  forward, reference kernels : %8.3f ms/pass   (checksum %.6f)\n",
                1e3 * t_ref / n_inputs, sink_ref);
    std::printf("  forward, optimized         : %8.3f ms/pass   (checksum %.6f, %.2fx)\n",
                1e3 * t_opt / n_inputs, sink_opt, t_ref / t_opt);
    std::printf("  batch inference, serial    : %8.3f ms/sample\n", 1e3 * t_serial / n_inputs);
    std::printf("  batch inference, openmp    : %8.3f ms/sample (%.2fx, %d threads, "
                "%zu/%zu predictions agree)\n\n",
                1e3 * t_omp / n_inputs, t_serial / t_omp, resolve_threads(openmp), agree,
                p1.size());
}

}  // namespace

int main() {
    std::printf("kernel benchmark: reference vs optimized forward, serial vs OpenMP batch\n\n");
    for (size_t W : {20, 40, 100}) bench_window(W, W <= 40 ? size_t{400} : size_t{150});
    return 0;
}
