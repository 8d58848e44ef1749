#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "icl/kernels.hpp"

namespace icl {

enum class PosEncoding { rotary, none };

struct ModelConfig {
    int n_layers = 2;
    int n_heads = 4;
    int d_model = 64;
    int d_ff = 256;
    int vocab_size = 0;
    int max_positions = 2048;
    PosEncoding pos_encoding = PosEncoding::rotary;
    float norm_eps = 1e-5f;
    bool tied_head = false;

    int head_dim() const { return d_model / n_heads; }
};

struct Tensor {
    std::string name;
    std::vector<int> shape;
    std::vector<float> data;
    size_t elems() const;
};

struct WeightArchive {
    ModelConfig config;
    std::vector<Tensor> tensors;  // manifest order
    std::unordered_map<std::string, int> by_name;

    const Tensor& get(const std::string& name) const;  // throws on missing
    bool has(const std::string& name) const { return by_name.count(name) != 0; }
};

// Tensor names the archive must carry for a config (tok_embed,
// layers.N.attn_norm, layers.N.attn.{wq,wk,wv,wo}, layers.N.mlp_norm,
// layers.N.mlp.{w_in,w_out}, final_norm, and head unless tied).
std::vector<std::pair<std::string, std::vector<int>>> required_tensors(const ModelConfig& cfg);

// Directory with manifest.json (names, shapes, dtype, byte offsets) and
// weights.bin (contiguous little-endian float32). Missing tensors, shape
// mismatches, and truncated blobs raise distinct errors naming the tensor.
WeightArchive load_weights(const std::string& dir);
void save_weights(const WeightArchive& archive, const std::string& dir);

// Matrices drawn from normal(0, 0.02), norm gains set to 1. Deterministic.
WeightArchive init_weights(const ModelConfig& cfg, uint64_t seed);

// Parses the architecture fields out of a JSON object (the same shape the
// weight manifest embeds); unspecified fields keep their defaults.
ModelConfig parse_model_config(const std::string& json_text);

// Per-query allowed-key sets. Rows below test_start are full causal; rows at
// or above it may hide prompt keys but always see the diagonal.
struct VisibilityPlan {
    int length = 0;
    int test_start = 0;
    std::vector<std::vector<uint8_t>> allowed;  // allowed[q][k], entries above q unused
    std::vector<std::string> warnings;

    static VisibilityPlan full_causal(int n);
    bool same_matrix(const VisibilityPlan& other) const;
};

// Diagonal, causality, and full-causal-demo-rows checks; throws before any
// compute runs.
void validate_plan(const VisibilityPlan& plan, int n_tokens);

// Adds `extra` continuation rows that inherit the final test row's key set
// and see the earlier continuation positions causally.
VisibilityPlan extend_plan(const VisibilityPlan& plan, int extra);

// Run-length encoded rows, one line per query, for debugging.
std::string dump_plan(const VisibilityPlan& plan);

// Softmax rows captured per layer/head for tests: attn[layer][h*n*n + q*n + k].
struct ForwardTrace {
    int n = 0;
    int heads = 0;
    std::vector<std::vector<double>> attn;  // one flat [heads, n, n] block per layer
};

// Pre-norm decoder forward pass; returns row-major [n, vocab] logits.
// plan == nullptr means plain causal attention.
template <typename T>
std::vector<T> forward_with_plan(const std::vector<int>& tokens, const WeightArchive& model,
                                 const VisibilityPlan* plan, ExecMode mode = ExecMode::serial,
                                 ForwardTrace* trace = nullptr);

enum class ScoringRule { full_verbalizer, first_token };

// Teacher-forced summed token log-likelihood of each verbalizer continuation
// after the prompt. Continuation rows inherit the test-span visibility rule
// via extend_plan. Ties in the argmax resolve to the lowest label index.
template <typename T>
std::vector<double> score_labels(const std::vector<int>& prompt_tokens,
                                 const WeightArchive& model, const VisibilityPlan* plan,
                                 const std::vector<std::vector<int>>& label_tokens,
                                 ScoringRule rule = ScoringRule::full_verbalizer,
                                 ExecMode mode = ExecMode::serial);

int argmax_label(const std::vector<double>& scores);

}  // namespace icl
