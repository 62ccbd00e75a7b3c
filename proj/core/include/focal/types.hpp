#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace focal {

using TokenId = int;
using LogitVector = std::vector<double>;

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};
struct ScriptError : std::runtime_error {
    explicit ScriptError(const std::string& msg) : std::runtime_error(msg) {}
};
struct InsufficientDataError : std::runtime_error {
    explicit InsufficientDataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Half-open index range [begin, end).
struct Span {
    int begin = 0;
    int end = 0;

    int size() const { return end - begin; }
    bool contains(int i) const { return i >= begin && i < end; }
};

// Partition of a token sequence into system / image / question / output
// spans. Spans are contiguous, ordered, and cover the sequence exactly.
struct SpanMap {
    Span sys, img, que, out;

    int total() const { return out.end; }
    void validate() const;
};

struct TokenSequence {
    std::vector<TokenId> ids;
    SpanMap spans;

    int size() const { return static_cast<int>(ids.size()); }
    void append_output(TokenId id);

    static TokenSequence make(const std::vector<TokenId>& sys,
                              const std::vector<TokenId>& img,
                              const std::vector<TokenId>& que);
};

struct ModelConfig {
    int num_layers = 4;
    int num_heads = 4;
    int model_dim = 64;
    int vocab_size = 64;
    int num_image_tokens = 16;
    TokenId eos_id = 0;
    std::uint64_t seed = 0;

    // Image patches are fed as reserved vocabulary ids at the top of the
    // vocab; first_image_id()..vocab_size-1.
    TokenId first_image_id() const { return vocab_size - num_image_tokens; }
    void validate() const;  // throws ConfigError
};

// Blocks attention from queries in `queries` to key position `key`.
// queries.end < 0 means "all queries to end of sequence".
struct MaskEntry {
    Span queries{0, -1};
    int key = 0;
};

struct AttentionMask {
    std::vector<MaskEntry> blocked;
    int active_from_layer = 0;

    bool empty() const { return blocked.empty(); }
    // Canonical key for scripted replay; empty masks collapse to "none".
    std::string signature() const;
};

// [layer][head][query][key] attention weights, causal rows normalized.
struct AttentionTensor {
    int layers = 0;
    int heads = 0;
    int seq_len = 0;
    std::vector<double> data;

    AttentionTensor() = default;
    AttentionTensor(int l, int h, int t)
        : layers(l), heads(h), seq_len(t),
          data(static_cast<size_t>(l) * h * t * t, 0.0) {}

    double at(int l, int h, int q, int k) const {
        return data[idx(l, h, q, k)];
    }
    double& at(int l, int h, int q, int k) { return data[idx(l, h, q, k)]; }

    size_t idx(int l, int h, int q, int k) const {
        return ((static_cast<size_t>(l) * heads + h) * seq_len + q) * seq_len + k;
    }
};

struct ForwardResult {
    LogitVector logits;  // next-token logits for the final query position
    AttentionTensor attention;
};

}  // namespace focal
