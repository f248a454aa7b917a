#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcifp/network.hpp"

namespace dcifp {

struct GradCheckOptions {
    size_t batch = 2;       // samples in the checked loss (mean cross-entropy)
    double h = 1e-4;        // central-difference step
    double tolerance = 1e-4;  // pass iff max_rel_err < tolerance
    // A plain-difference error above this triggers a re-measure with the
    // base run's ReLU/pool decisions frozen (the analytic gradient is the
    // derivative of that frozen function, so a kink inside +-h stops
    // polluting the comparison while a backprop bug still fails).
    double suspect_threshold = 1e-5;
    // Relative-error denominator floor: below this gradient scale the
    // criterion is effectively absolute (|a-n| < tolerance * floor), which
    // keeps finite-difference round-off on near-zero gradients from
    // registering as error.
    double scale_floor = 1e-3;
    // Before checking, shift ReLU biases so every pre-activation sits at
    // least this far from 0 (standard kink avoidance). 0 disables.
    double kink_margin = 1e-2;
    ExecConfig exec;
};

struct GradCheckLayerStat {
    size_t layer = 0;
    size_t param_count = 0;
    double max_rel_err = 0;
};

struct GradCheckReport {
    size_t param_count = 0;
    double max_rel_err = 0;
    size_t worst_param = 0;
    size_t worst_layer = 0;
    size_t biases_nudged = 0;  // ReLU kink avoidance (see nudge_relu_biases)
    size_t kink_retests = 0;   // params re-measured with frozen decisions
    bool pass = false;
    std::vector<GradCheckLayerStat> per_layer;
};

// Shift the biases of ReLU conv/dense layers (in plan order) so that no
// pre-activation over `inputs` lies within `margin` of 0. Returns the
// number of biases changed. Pool near-ties cannot be cleared this way;
// the checker's frozen-decision retest covers those.
size_t nudge_relu_biases(Network& net, const std::vector<std::vector<double>>& inputs,
                         double margin);

// Compare analytic gradients of the mean cross-entropy over `inputs`
// against central finite differences, parameter by parameter, in double
// precision with dropout disabled. The network is copied internally (the
// copy's biases may be nudged per kink_margin); the caller's weights are
// untouched. Exact layer linearity is exploited: a parameter perturbation
// reconstructs its layer's output from cached pre-activations, then only
// downstream layers are re-run.
GradCheckReport numeric_grad_check(const Network& net,
                                   const std::vector<std::vector<double>>& inputs,
                                   const std::vector<size_t>& labels,
                                   const GradCheckOptions& opt = {});

// Same check on seeded random weights, inputs (standard normal), and
// labels for the architecture `spec` describes.
GradCheckReport numeric_grad_check(const ModelSpec& spec, uint64_t seed,
                                   const GradCheckOptions& opt = {});

std::string format_report(const GradCheckReport& rep);

}  // namespace dcifp
