#include "focal/types.hpp"

#include <sstream>

namespace focal {

void SpanMap::validate() const {
    auto bad = [](const char* what) { throw InputError(std::string("span map: ") + what); };
    if (sys.begin != 0) bad("sys span must start at 0");
    if (sys.end != img.begin || img.end != que.begin || que.end != out.begin)
        bad("spans must be contiguous in order sys,img,que,out");
    if (sys.size() < 0 || img.size() < 0 || que.size() < 0 || out.size() < 0)
        bad("negative span length");
}

void TokenSequence::append_output(TokenId id) {
    ids.push_back(id);
    spans.out.end += 1;
}

TokenSequence TokenSequence::make(const std::vector<TokenId>& sys,
                                  const std::vector<TokenId>& img,
                                  const std::vector<TokenId>& que) {
    TokenSequence seq;
    seq.ids.reserve(sys.size() + img.size() + que.size());
    seq.ids.insert(seq.ids.end(), sys.begin(), sys.end());
    seq.ids.insert(seq.ids.end(), img.begin(), img.end());
    seq.ids.insert(seq.ids.end(), que.begin(), que.end());
    int a = static_cast<int>(sys.size());
    int b = a + static_cast<int>(img.size());
    int c = b + static_cast<int>(que.size());
    seq.spans.sys = {0, a};
    seq.spans.img = {a, b};
    seq.spans.que = {b, c};
    seq.spans.out = {c, c};
    return seq;
}

void ModelConfig::validate() const {
    if (num_layers < 3)
        throw ConfigError("num_layers must be >= 3 (scoring layer plus deeper masked layers)");
    if (num_heads < 1) throw ConfigError("num_heads must be positive");
    if (model_dim < 1 || model_dim % num_heads != 0)
        throw ConfigError("model_dim must be positive and divisible by num_heads");
    if (vocab_size < 2) throw ConfigError("vocab_size must be >= 2");
    if (eos_id < 0 || eos_id >= vocab_size)
        throw ConfigError("eos_id must be a valid vocabulary id");
    if (num_image_tokens < 1) throw ConfigError("num_image_tokens must be positive");
    if (num_image_tokens >= vocab_size - 1)
        throw ConfigError("num_image_tokens leaves no room for text vocabulary");
}

std::string AttentionMask::signature() const {
    if (blocked.empty()) return "none";
    std::ostringstream os;
    os << "L" << active_from_layer;
    for (const auto& e : blocked) {
        os << "|q[" << e.queries.begin << "," << e.queries.end << "):k" << e.key;
    }
    return os.str();
}

}  // namespace focal
