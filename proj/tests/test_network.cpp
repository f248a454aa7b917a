#include <doctest.h>

#include <cmath>

#include "dcifp/network.hpp"
#include "dcifp/reference.hpp"
#include "dcifp/rng.hpp"
#include "dcifp/train.hpp"

using namespace dcifp;

namespace {

std::vector<double> random_input(const ModelSpec& spec, uint64_t seed) {
    Rng rng(seed);
    std::vector<double> in(spec.W * spec.n_features);
    for (auto& x : in) x = rng.normal();
    return in;
}

WindowSample sample_from_input(const std::vector<double>& in, size_t W) {
    WindowSample s;
    s.rows.resize(W);
    for (size_t r = 0; r < W; ++r) {
        s.rows[r].direction_code = in[r * 3 + 0];
        s.rows[r].tbs_kb = in[r * 3 + 1];
        s.rows[r].dt_s = in[r * 3 + 2];
    }
    return s;
}

}  // namespace

TEST_CASE("softmax lands on the simplex and is shift invariant") {
    std::vector<double> v = {2.0, -1.0, 0.5, 7.0};
    std::vector<double> shifted = v;
    for (double& x : shifted) x += 123.0;
    softmax_inplace(v);
    softmax_inplace(shifted);
    double sum = 0;
    for (double x : v) {
        CHECK(x > 0);
        sum += x;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
    for (size_t i = 0; i < v.size(); ++i)
        CHECK(v[i] == doctest::Approx(shifted[i]).epsilon(1e-12));
    CHECK(argmax_lowest(v) == 3);
    // ties resolve to the lowest index
    CHECK(argmax_lowest({1.0, 3.0, 3.0}) == 1);
}

TEST_CASE("forward inference is deterministic and ignores the dropout seed") {
    ModelSpec spec = build_model(40, 3, 8);
    Network net(spec);
    net.init_weights(5);
    auto in = random_input(spec, 1);
    Workspace ws;
    net.prepare(ws);
    net.forward(ws, in.data(), false, 111);
    std::vector<double> out1 = net.output(ws);
    net.forward(ws, in.data(), false, 999);
    std::vector<double> out2 = net.output(ws);
    CHECK(out1 == out2);
    REQUIRE(out1.size() == 8);
    for (double x : out1) CHECK(std::isfinite(x));
}

TEST_CASE("training-mode dropout masks are a pure function of the seed") {
    ModelSpec spec = build_model(20, 3, 8);
    Network net(spec);
    net.init_weights(5);
    auto in = random_input(spec, 2);
    Workspace ws;
    net.prepare(ws);
    net.forward(ws, in.data(), true, 42);
    std::vector<double> a = net.output(ws);
    net.forward(ws, in.data(), true, 42);
    std::vector<double> b = net.output(ws);
    CHECK(a == b);
    net.forward(ws, in.data(), true, 43);
    std::vector<double> c = net.output(ws);
    CHECK(a != c);

    // expectation-preserving scaling: the inference pass must not rescale
    net.forward(ws, in.data(), false, 0);
    std::vector<double> inf1 = net.output(ws);
    // dropping nothing (training pass whose masks all survive) is not
    // available directly, but inference twice must agree bitwise
    net.forward(ws, in.data(), false, 7);
    CHECK(inf1 == net.output(ws));
}

TEST_CASE("optimized forward equals the plain reference kernels") {
    for (size_t W : {20, 40, 100}) {
        ModelSpec spec = build_model(W, 3, 8);
        Network net(spec);
        for (uint64_t seed : {1, 2, 3}) {
            net.init_weights(seed);
            auto in = random_input(spec, seed * 11 + W);
            Workspace ws;
            net.prepare(ws);
            net.forward(ws, in.data(), false, 0);
            std::vector<double> fast = net.output(ws);
            std::vector<double> slow = ref::forward_inference(net, in);
            REQUIRE(fast.size() == slow.size());
            for (size_t i = 0; i < fast.size(); ++i) CHECK(fast[i] == slow[i]);
        }
    }
}

TEST_CASE("loss matches -log softmax probability of the true class") {
    ModelSpec spec = build_model(20, 3, 4);
    Network net(spec);
    net.init_weights(9);
    auto in = random_input(spec, 3);
    Workspace ws;
    net.prepare(ws);
    net.forward(ws, in.data(), false, 0);
    std::vector<double> probs = net.output(ws);
    softmax_inplace(probs);
    for (size_t c = 0; c < 4; ++c) {
        net.forward(ws, in.data(), false, 0);
        double loss = net.loss_and_probs(ws, c);
        CHECK(loss == doctest::Approx(-std::log(probs[c])).epsilon(1e-12));
    }
}

TEST_CASE("serial and openmp batch inference agree bitwise") {
    ModelSpec spec = build_model(40, 3, 8);
    ModelBundle bundle(spec);
    bundle.net.init_weights(21);
    for (int c = 0; c < 8; ++c) bundle.class_order.push_back("c" + std::to_string(c));
    std::vector<WindowSample> samples;
    for (uint64_t s = 0; s < 64; ++s)
        samples.push_back(sample_from_input(random_input(spec, 100 + s), 40));

    auto serial = predict_batch(bundle, samples, {Engine::Serial, 0});
    auto omp1 = predict_batch(bundle, samples, {Engine::OpenMP, 1});
    auto omp4 = predict_batch(bundle, samples, {Engine::OpenMP, 4});
    REQUIRE(serial.size() == samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
        CHECK(serial[i].class_index == omp1[i].class_index);
        CHECK(serial[i].probs == omp1[i].probs);
        CHECK(serial[i].class_index == omp4[i].class_index);
        CHECK(serial[i].probs == omp4[i].probs);
        CHECK(serial[i].confidence == serial[i].probs[serial[i].class_index]);
    }
}

TEST_CASE("weight init is seed-deterministic with small positive biases") {
    ModelSpec spec = build_model(20, 3, 8);
    Network a(spec), b(spec), c(spec);
    a.init_weights(4);
    b.init_weights(4);
    c.init_weights(5);
    CHECK(a.params() == b.params());
    CHECK(a.params() != c.params());
    // biases of the first conv: last 64 of its block
    const LayerDef& l0 = spec.layers[0];
    for (size_t i = 0; i < l0.bias_count(); ++i)
        CHECK(a.params()[l0.weight_count() + i] == 0.01);
    // weights bounded by the glorot limit
    double limit = std::sqrt(6.0 / (5 * 3));
    for (size_t i = 0; i < l0.weight_count(); ++i) {
        CHECK(a.params()[i] <= limit);
        CHECK(a.params()[i] >= -limit);
    }
}

TEST_CASE("parameter bookkeeping maps indices back to layers") {
    ModelSpec spec = build_model(40, 3, 8);
    Network net(spec);
    size_t total = 0;
    for (size_t li = 0; li < spec.layers.size(); ++li) {
        CHECK(net.param_offset(li) == total);
        total += spec.layers[li].param_count();
        if (spec.layers[li].param_count() > 0) {
            CHECK(net.layer_of_param(net.param_offset(li)) == li);
            CHECK(net.layer_of_param(net.param_offset(li) + spec.layers[li].param_count() - 1) ==
                  li);
        }
    }
    CHECK(net.params().size() == total);
}
