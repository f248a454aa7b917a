#pragma once

#include <vector>

#include "dcifp/network.hpp"

namespace dcifp::ref {

// Textbook single-threaded layer kernels kept as the independent
// reference the optimized forward/backward paths are tested and
// benchmarked against. Convolution and dense kernels return
// PRE-activation values (no ReLU fused) so callers can inspect them;
// apply relu_inplace for the nonlinearity. Loop order matches the
// optimized kernels (position, tap, input channel, output channel) so
// sums accumulate in the same sequence.

// pre[pos*F + f] = bias[f] + sum_{k,c} in[(pos+k-pad)*C + c] * w[(k*C+c)*F + f]
// with "same" zero padding, pad = (K-1)/2.
void conv1d_pre(const LayerDef& l, const double* weights, const double* in, double* pre);

// pre[j] = bias[j] + sum_i in[i] * w[i*J + j]
void dense_pre(const LayerDef& l, const double* weights, const double* in, double* pre);

void relu_inplace(double* v, size_t n);

// out[p*C + c] = max(in[2p*C + c], in[(2p+1)*C + c]); ties keep the left value.
void maxpool2(const LayerDef& l, const double* in, double* out);

// Full inference-mode forward pass (dropout = identity); returns logits.
std::vector<double> forward_inference(const Network& net, const std::vector<double>& input);

}  // namespace dcifp::ref
