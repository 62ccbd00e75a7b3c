#include "focal/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace focal {

LogitVector softmax(const LogitVector& v) {
    LogitVector out(v.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : v) mx = std::max(mx, x);
    double sum = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - mx);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

namespace {

void layer_norm(const double* x, double* out, int d) {
    double mean = 0.0;
    for (int i = 0; i < d; ++i) mean += x[i];
    mean /= d;
    double var = 0.0;
    for (int i = 0; i < d; ++i) {
        double c = x[i] - mean;
        var += c * c;
    }
    var /= d;
    double inv = 1.0 / std::sqrt(var + 1e-5);
    for (int i = 0; i < d; ++i) out[i] = (x[i] - mean) * inv;
}

// y[T][dout] = x[T][din] * w[din][dout]
void matmul(const std::vector<double>& x, const std::vector<double>& w,
            std::vector<double>& y, int t_len, int din, int dout) {
    std::fill(y.begin(), y.end(), 0.0);
    for (int t = 0; t < t_len; ++t) {
        const double* xr = x.data() + static_cast<size_t>(t) * din;
        double* yr = y.data() + static_cast<size_t>(t) * dout;
        for (int i = 0; i < din; ++i) {
            double xi = xr[i];
            const double* wr = w.data() + static_cast<size_t>(i) * dout;
            for (int j = 0; j < dout; ++j) yr[j] += xi * wr[j];
        }
    }
}

std::vector<double> random_matrix(std::mt19937_64& rng, size_t count, double scale) {
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> m(count);
    for (double& x : m) x = dist(rng) * scale;
    return m;
}

}  // namespace

TransformerModel::TransformerModel(const ModelConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    std::mt19937_64 rng(cfg_.seed);
    const int d = cfg_.model_dim;
    const int v = cfg_.vocab_size;
    const int dff = 4 * d;
    const double ws = 1.0 / std::sqrt(static_cast<double>(d));

    tok_emb_ = random_matrix(rng, static_cast<size_t>(v) * d, 0.5);
    layers_.resize(cfg_.num_layers);
    for (auto& l : layers_) {
        l.wq = random_matrix(rng, static_cast<size_t>(d) * d, ws);
        l.wk = random_matrix(rng, static_cast<size_t>(d) * d, ws);
        l.wv = random_matrix(rng, static_cast<size_t>(d) * d, ws);
        l.wo = random_matrix(rng, static_cast<size_t>(d) * d, ws);
        l.w1 = random_matrix(rng, static_cast<size_t>(d) * dff, ws);
        l.b1.assign(dff, 0.0);
        l.w2 = random_matrix(rng, static_cast<size_t>(dff) * d,
                             1.0 / std::sqrt(static_cast<double>(dff)));
        l.b2.assign(d, 0.0);
    }
    unembed_ = random_matrix(rng, static_cast<size_t>(d) * v, ws);
}

ForwardResult TransformerModel::forward(const TokenSequence& seq,
                                        const AttentionMask* mask) const {
    const int t_len = seq.size();
    const int d = cfg_.model_dim;
    const int heads = cfg_.num_heads;
    const int dh = d / heads;
    const int dff = 4 * d;
    if (t_len == 0) throw InputError("forward: empty sequence");
    seq.spans.validate();
    if (seq.spans.total() != t_len)
        throw InputError("forward: span map does not cover sequence");
    for (TokenId id : seq.ids) {
        if (id < 0 || id >= cfg_.vocab_size)
            throw InputError("forward: token id out of range: " + std::to_string(id));
    }

    // Blocked (query, key) lookup, valid for layers >= active_from_layer.
    std::vector<std::uint8_t> blocked;
    int active_layer = cfg_.num_layers + 1;
    if (mask != nullptr && !mask->empty()) {
        if (mask->active_from_layer < 0 || mask->active_from_layer > cfg_.num_layers)
            throw InputError("forward: mask active_from_layer out of range");
        blocked.assign(static_cast<size_t>(t_len) * t_len, 0);
        active_layer = mask->active_from_layer;
        for (const auto& e : mask->blocked) {
            if (e.key < 0 || e.key >= t_len)
                throw InputError("forward: mask key out of range: " + std::to_string(e.key));
            int qb = std::max(0, e.queries.begin);
            int qe = e.queries.end < 0 ? t_len : std::min(e.queries.end, t_len);
            for (int q = qb; q < qe; ++q)
                blocked[static_cast<size_t>(q) * t_len + e.key] = 1;
        }
    }

    // Embeddings + sinusoidal positions.
    std::vector<double> x(static_cast<size_t>(t_len) * d);
    for (int t = 0; t < t_len; ++t) {
        const double* e = tok_emb_.data() + static_cast<size_t>(seq.ids[t]) * d;
        double* xr = x.data() + static_cast<size_t>(t) * d;
        for (int i = 0; i < d; ++i) xr[i] = e[i];
        for (int i = 0; i < d; i += 2) {
            double freq = std::pow(10000.0, -static_cast<double>(i) / d);
            xr[i] += std::sin(t * freq);
            if (i + 1 < d) xr[i + 1] += std::cos(t * freq);
        }
    }

    AttentionTensor att(cfg_.num_layers, heads, t_len);
    std::vector<double> xn(x.size()), q(x.size()), k(x.size()), v(x.size());
    std::vector<double> attn_out(x.size()), proj(x.size());
    std::vector<double> h1(static_cast<size_t>(t_len) * dff), h2(x.size());
    std::vector<double> row(t_len);

    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
    for (int l = 0; l < cfg_.num_layers; ++l) {
        const Layer& ly = layers_[l];
        for (int t = 0; t < t_len; ++t)
            layer_norm(x.data() + static_cast<size_t>(t) * d,
                       xn.data() + static_cast<size_t>(t) * d, d);
        matmul(xn, ly.wq, q, t_len, d, d);
        matmul(xn, ly.wk, k, t_len, d, d);
        matmul(xn, ly.wv, v, t_len, d, d);

        const bool layer_masked = !blocked.empty() && l >= active_layer;
        for (int h = 0; h < heads; ++h) {
            const int off = h * dh;
            for (int t = 0; t < t_len; ++t) {
                const double* qr = q.data() + static_cast<size_t>(t) * d + off;
                double mx = -std::numeric_limits<double>::infinity();
                for (int s = 0; s <= t; ++s) {
                    if (layer_masked && blocked[static_cast<size_t>(t) * t_len + s]) {
                        row[s] = -std::numeric_limits<double>::infinity();
                        continue;
                    }
                    const double* kr = k.data() + static_cast<size_t>(s) * d + off;
                    double dot = 0.0;
                    for (int i = 0; i < dh; ++i) dot += qr[i] * kr[i];
                    row[s] = dot * inv_sqrt_dh;
                    mx = std::max(mx, row[s]);
                }
                if (mx == -std::numeric_limits<double>::infinity())
                    throw InputError("forward: mask blocks an entire attention row");
                double sum = 0.0;
                for (int s = 0; s <= t; ++s) {
                    row[s] = row[s] == -std::numeric_limits<double>::infinity()
                                 ? 0.0
                                 : std::exp(row[s] - mx);
                    sum += row[s];
                }
                double* or_ = attn_out.data() + static_cast<size_t>(t) * d + off;
                std::fill(or_, or_ + dh, 0.0);
                for (int s = 0; s <= t; ++s) {
                    double w = row[s] / sum;
                    att.at(l, h, t, s) = w;
                    const double* vr = v.data() + static_cast<size_t>(s) * d + off;
                    for (int i = 0; i < dh; ++i) or_[i] += w * vr[i];
                }
            }
        }
        matmul(attn_out, ly.wo, proj, t_len, d, d);
        for (size_t i = 0; i < x.size(); ++i) x[i] += proj[i];

        for (int t = 0; t < t_len; ++t)
            layer_norm(x.data() + static_cast<size_t>(t) * d,
                       xn.data() + static_cast<size_t>(t) * d, d);
        matmul(xn, ly.w1, h1, t_len, d, dff);
        for (int t = 0; t < t_len; ++t) {
            double* hr = h1.data() + static_cast<size_t>(t) * dff;
            for (int i = 0; i < dff; ++i) hr[i] = std::tanh(hr[i] + ly.b1[i]);
        }
        matmul(h1, ly.w2, h2, t_len, dff, d);
        for (int t = 0; t < t_len; ++t) {
            double* xr = x.data() + static_cast<size_t>(t) * d;
            const double* hr = h2.data() + static_cast<size_t>(t) * d;
            for (int i = 0; i < d; ++i) xr[i] += hr[i] + ly.b2[i];
        }
    }

    // Final norm + unembedding of the last position only.
    std::vector<double> last(d);
    layer_norm(x.data() + static_cast<size_t>(t_len - 1) * d, last.data(), d);
    LogitVector logits(cfg_.vocab_size, 0.0);
    for (int i = 0; i < d; ++i) {
        double xi = last[i];
        const double* wr = unembed_.data() + static_cast<size_t>(i) * cfg_.vocab_size;
        for (int j = 0; j < cfg_.vocab_size; ++j) logits[j] += xi * wr[j];
    }
    return ForwardResult{std::move(logits), std::move(att)};
}

std::unique_ptr<TransformerModel> init_model(const ModelConfig& cfg) {
    return std::make_unique<TransformerModel>(cfg);
}

}  // namespace focal
