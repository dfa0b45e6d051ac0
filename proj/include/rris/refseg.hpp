#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rris/autodiff.hpp"
#include "rris/error.hpp"
#include "rris/mask.hpp"
#include "rris/random.hpp"
#include "rris/tensor.hpp"
#include "rris/text.hpp"

// Desk-scale f64 model of the token-fusion segmenter: a strided patch
// embedding stands in for the vision backbone and an embedding table for the
// language encoder. Everything downstream (token fusion with memory and blank
// tokens, the pyramid decoder, the existence head and the losses) is built on
// the autodiff tape so gradients can be checked against finite differences.

namespace rris::refseg {

enum class HeadQuery { vision, tokens };

inline std::string to_string(HeadQuery q) { return q == HeadQuery::vision ? "V" : "T"; }

inline HeadQuery head_query_from_string(const std::string& s) {
    if (s == "V") return HeadQuery::vision;
    if (s == "T") return HeadQuery::tokens;
    throw Error(ErrorCode::parse_error, "head query mode must be \"V\" or \"T\"");
}

inline constexpr std::array<std::size_t, 4> kStageStrides = {4, 8, 16, 32};

struct ModelConfig {
    std::size_t image_channels = 3;
    std::array<std::size_t, 4> stage_dims = {8, 16, 24, 32};
    std::size_t vocab_size = 64;
    std::size_t language_dim = 16;
    std::size_t max_tokens = 20;
    std::size_t fusion_dim = 16;
    std::size_t heads = 2;
    std::size_t memory_tokens = 20;  // conditional tokens per fusion block
    std::size_t blank_tokens = 10;
    std::size_t decoder_dim = 16;
    std::size_t head_dim = 16;
    double aux_loss_weight = 0.4;        // weight of the three coarse mask losses
    double existence_loss_weight = 1.0;  // weight of the existence loss
    double init_scale = 0.02;
    double norm_eps = 1e-6;
    std::uint64_t seed = 0;
    HeadQuery head_query = HeadQuery::vision;

    void validate() const {
        auto fail = [](const std::string& m) { throw Error(ErrorCode::invalid_argument, "model config: " + m); };
        if (heads == 0 || fusion_dim % heads != 0) fail("fusion_dim must be divisible by heads");
        if (head_dim % heads != 0) fail("head_dim must be divisible by heads");
        if (memory_tokens == 0) fail("memory_tokens must be positive");
        if (!(aux_loss_weight >= 0.0 && aux_loss_weight <= 1.0)) fail("aux_loss_weight must lie in [0, 1]");
        if (existence_loss_weight < 0.0) fail("existence_loss_weight must be non-negative");
        if (image_channels == 0 || vocab_size == 0 || language_dim == 0 || decoder_dim == 0 || max_tokens == 0)
            fail("dimensions must be positive");
        for (auto d : stage_dims)
            if (d == 0) fail("stage dims must be positive");
    }
};

inline nlohmann::json to_json(const ModelConfig& c) {
    return {{"image_channels", c.image_channels},
            {"stage_dims", c.stage_dims},
            {"vocab_size", c.vocab_size},
            {"language_dim", c.language_dim},
            {"max_tokens", c.max_tokens},
            {"fusion_dim", c.fusion_dim},
            {"heads", c.heads},
            {"memory_tokens", c.memory_tokens},
            {"blank_tokens", c.blank_tokens},
            {"decoder_dim", c.decoder_dim},
            {"head_dim", c.head_dim},
            {"aux_loss_weight", c.aux_loss_weight},
            {"existence_loss_weight", c.existence_loss_weight},
            {"init_scale", c.init_scale},
            {"norm_eps", c.norm_eps},
            {"seed", c.seed},
            {"head_query", to_string(c.head_query)}};
}

/// Missing keys keep their defaults.
inline ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        get("image_channels", c.image_channels);
        get("stage_dims", c.stage_dims);
        get("vocab_size", c.vocab_size);
        get("language_dim", c.language_dim);
        get("max_tokens", c.max_tokens);
        get("fusion_dim", c.fusion_dim);
        get("heads", c.heads);
        get("memory_tokens", c.memory_tokens);
        get("blank_tokens", c.blank_tokens);
        get("decoder_dim", c.decoder_dim);
        get("head_dim", c.head_dim);
        get("aux_loss_weight", c.aux_loss_weight);
        get("existence_loss_weight", c.existence_loss_weight);
        get("init_scale", c.init_scale);
        get("norm_eps", c.norm_eps);
        get("seed", c.seed);
        if (j.contains("head_query")) c.head_query = head_query_from_string(j.at("head_query").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse_error, std::string("bad model config: ") + e.what());
    }
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------
// Parameters. The same layouts hold tensors (storage, gradients) or tape
// variables (one forward pass).

template <class T>
struct LinearParams {
    T weight;  // [in x out]
    T bias;    // [1 x out]
};

template <class T>
struct MhcaParams {
    LinearParams<T> query, key, value, output;
    std::size_t heads = 1;
};

template <class T>
struct VltfParams {
    LinearParams<T> vision_proj;
    LinearParams<T> language_proj;
    MhcaParams<T> language_to_vision;  // language queries, vision keys/values
    MhcaParams<T> memory_to_language;  // memory-token queries -> conditional tokens
    MhcaParams<T> vision_to_tokens;    // vision queries over conditional + blank tokens
    T memory_tokens;                   // [K_c x C]
    T blank_tokens;                    // [K_b x C], never sees the language input
    LinearParams<T> output_proj;
};

template <class T>
struct ToyModelParams {
    std::array<LinearParams<T>, 4> stages;  // patch embeddings, strides 4/8/16/32
    T token_embedding;                      // [vocab x C_l]
    std::array<VltfParams<T>, 3> fusion;    // after stages 2, 3, 4
    std::array<LinearParams<T>, 4> lateral;
    std::array<LinearParams<T>, 4> mask_heads;
    MhcaParams<T> head_attention;
    LinearParams<T> existence;
};

template <class L, class Fn>
void for_each_param(L& p, Fn&& fn, const std::string& prefix)
    requires requires { p.weight; p.bias; }
{
    fn(prefix + ".weight", p.weight);
    fn(prefix + ".bias", p.bias);
}

template <class M, class Fn>
void for_each_param(M& p, Fn&& fn, const std::string& prefix)
    requires requires { p.query; p.heads; }
{
    for_each_param(p.query, fn, prefix + ".query");
    for_each_param(p.key, fn, prefix + ".key");
    for_each_param(p.value, fn, prefix + ".value");
    for_each_param(p.output, fn, prefix + ".output");
}

template <class V, class Fn>
void for_each_param(V& p, Fn&& fn, const std::string& prefix)
    requires requires { p.memory_tokens; p.blank_tokens; }
{
    for_each_param(p.vision_proj, fn, prefix + ".vision_proj");
    for_each_param(p.language_proj, fn, prefix + ".language_proj");
    for_each_param(p.language_to_vision, fn, prefix + ".language_to_vision");
    for_each_param(p.memory_to_language, fn, prefix + ".memory_to_language");
    for_each_param(p.vision_to_tokens, fn, prefix + ".vision_to_tokens");
    fn(prefix + ".memory_tokens", p.memory_tokens);
    fn(prefix + ".blank_tokens", p.blank_tokens);
    for_each_param(p.output_proj, fn, prefix + ".output_proj");
}

template <class P, class Fn>
void for_each_param(P& p, Fn&& fn)
    requires requires { p.token_embedding; p.fusion; }
{
    for (std::size_t i = 0; i < 4; ++i) for_each_param(p.stages[i], fn, "stage" + std::to_string(i + 1));
    fn(std::string("token_embedding"), p.token_embedding);
    for (std::size_t i = 0; i < 3; ++i) for_each_param(p.fusion[i], fn, "fusion" + std::to_string(i + 2));
    for (std::size_t i = 0; i < 4; ++i) for_each_param(p.lateral[i], fn, "lateral" + std::to_string(i + 1));
    for (std::size_t i = 0; i < 4; ++i) for_each_param(p.mask_heads[i], fn, "mask_head" + std::to_string(i + 1));
    for_each_param(p.head_attention, fn, "head_attention");
    for_each_param(p.existence, fn, "existence");
}

/// Same layout with every tensor replaced by fn(tensor).
template <class U, class T, class Fn>
LinearParams<U> map_params(const LinearParams<T>& p, Fn&& fn) {
    return {fn(p.weight), fn(p.bias)};
}

template <class U, class T, class Fn>
MhcaParams<U> map_params(const MhcaParams<T>& p, Fn&& fn) {
    return {map_params<U>(p.query, fn), map_params<U>(p.key, fn), map_params<U>(p.value, fn),
            map_params<U>(p.output, fn), p.heads};
}

template <class U, class T, class Fn>
VltfParams<U> map_params(const VltfParams<T>& p, Fn&& fn) {
    return {map_params<U>(p.vision_proj, fn),
            map_params<U>(p.language_proj, fn),
            map_params<U>(p.language_to_vision, fn),
            map_params<U>(p.memory_to_language, fn),
            map_params<U>(p.vision_to_tokens, fn),
            fn(p.memory_tokens),
            fn(p.blank_tokens),
            map_params<U>(p.output_proj, fn)};
}

template <class U, class T, class Fn>
ToyModelParams<U> map_params(const ToyModelParams<T>& p, Fn&& fn) {
    ToyModelParams<U> out;
    for (std::size_t i = 0; i < 4; ++i) {
        out.stages[i] = map_params<U>(p.stages[i], fn);
        out.lateral[i] = map_params<U>(p.lateral[i], fn);
        out.mask_heads[i] = map_params<U>(p.mask_heads[i], fn);
    }
    out.token_embedding = fn(p.token_embedding);
    for (std::size_t i = 0; i < 3; ++i) out.fusion[i] = map_params<U>(p.fusion[i], fn);
    out.head_attention = map_params<U>(p.head_attention, fn);
    out.existence = map_params<U>(p.existence, fn);
    return out;
}

namespace detail {

inline LinearParams<Tensor> init_linear(std::size_t in, std::size_t out, Rng& rng, double scale) {
    return {random_normal({in, out}, rng, scale), random_normal({1, out}, rng, scale)};
}

}  // namespace detail

inline MhcaParams<Tensor> init_mhca(std::size_t query_dim, std::size_t kv_dim, std::size_t model_dim,
                                    std::size_t out_dim, std::size_t heads, Rng& rng, double scale) {
    if (heads == 0 || model_dim % heads != 0)
        throw Error(ErrorCode::invalid_argument, "attention width must be divisible by the head count");
    return {detail::init_linear(query_dim, model_dim, rng, scale), detail::init_linear(kv_dim, model_dim, rng, scale),
            detail::init_linear(kv_dim, model_dim, rng, scale), detail::init_linear(model_dim, out_dim, rng, scale),
            heads};
}

inline VltfParams<Tensor> init_vltf(std::size_t vision_dim, std::size_t language_dim, std::size_t fusion_dim,
                                    std::size_t heads, std::size_t memory_tokens, std::size_t blank_tokens, Rng& rng,
                                    double scale) {
    VltfParams<Tensor> p;
    p.vision_proj = detail::init_linear(vision_dim, fusion_dim, rng, scale);
    p.language_proj = detail::init_linear(language_dim, fusion_dim, rng, scale);
    p.language_to_vision = init_mhca(fusion_dim, fusion_dim, fusion_dim, fusion_dim, heads, rng, scale);
    p.memory_to_language = init_mhca(fusion_dim, fusion_dim, fusion_dim, fusion_dim, heads, rng, scale);
    p.vision_to_tokens = init_mhca(fusion_dim, fusion_dim, fusion_dim, fusion_dim, heads, rng, scale);
    p.memory_tokens = random_normal({memory_tokens, fusion_dim}, rng, scale);
    p.blank_tokens = random_normal({blank_tokens, fusion_dim}, rng, scale);
    p.output_proj = detail::init_linear(fusion_dim, vision_dim, rng, scale);
    return p;
}

/// Seeded normal initialization of every learned value.
inline ToyModelParams<Tensor> init_params(const ModelConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const double s = cfg.init_scale;
    ToyModelParams<Tensor> p;
    p.stages[0] = detail::init_linear(16 * cfg.image_channels, cfg.stage_dims[0], rng, s);
    for (std::size_t i = 1; i < 4; ++i) p.stages[i] = detail::init_linear(4 * cfg.stage_dims[i - 1], cfg.stage_dims[i], rng, s);
    p.token_embedding = random_normal({cfg.vocab_size, cfg.language_dim}, rng, s);
    for (std::size_t i = 0; i < 3; ++i)
        p.fusion[i] = init_vltf(cfg.stage_dims[i + 1], cfg.language_dim, cfg.fusion_dim, cfg.heads, cfg.memory_tokens,
                                cfg.blank_tokens, rng, s);
    for (std::size_t i = 0; i < 4; ++i) {
        p.lateral[i] = detail::init_linear(cfg.stage_dims[i], cfg.decoder_dim, rng, s);
        p.mask_heads[i] = detail::init_linear(cfg.decoder_dim, 2, rng, s);
    }
    const bool vision_query = cfg.head_query == HeadQuery::vision;
    p.head_attention = init_mhca(vision_query ? cfg.decoder_dim : cfg.fusion_dim,
                                 vision_query ? cfg.fusion_dim : cfg.decoder_dim, cfg.head_dim, cfg.head_dim, cfg.heads,
                                 rng, s);
    p.existence = detail::init_linear(cfg.head_dim, 1, rng, s);
    return p;
}

inline std::size_t parameter_count(ToyModelParams<Tensor>& p) {
    std::size_t n = 0;
    for_each_param(p, [&](const std::string&, Tensor& t) { n += t.size(); });
    return n;
}

/// Registers every tensor as a tape variable (or constant).
template <class P>
auto bind(ad::Graph& g, const P& params, bool trainable = true) {
    using U = ad::Var;
    auto to_var = [&](const Tensor& t) { return trainable ? g.variable(t) : g.constant(t); };
    return map_params<U>(params, to_var);
}

// ---------------------------------------------------------------------------
// Graph-level building blocks.

struct MhcaNodes {
    ad::Var output;
    std::vector<ad::Var> attention;  // one [Lq x Lk] map per head
};

/// Scaled dot-product cross attention, heads concatenated then projected.
inline MhcaNodes mhca(ad::Graph& g, const MhcaParams<ad::Var>& p, ad::Var query, ad::Var key, ad::Var value) {
    const Tensor& kv = g.value(key);
    const Tensor& vv = g.value(value);
    if (kv.rank() != 2 || vv.rank() != 2 || kv.rows() != vv.rows())
        throw Error(ErrorCode::shape_mismatch, "mhca: key " + kv.shape_string() + " and value " + vv.shape_string() +
                                                   " disagree on sequence length");
    const ad::Var q = ad::linear(g, query, p.query.weight, p.query.bias);
    const ad::Var k = ad::linear(g, key, p.key.weight, p.key.bias);
    const ad::Var v = ad::linear(g, value, p.value.weight, p.value.bias);
    const std::size_t width = g.value(q).cols();
    if (p.heads == 0 || width % p.heads != 0) throw Error(ErrorCode::shape_mismatch, "mhca: width not divisible by heads");
    const std::size_t head_width = width / p.heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_width));
    MhcaNodes out;
    std::vector<ad::Var> heads;
    for (std::size_t h = 0; h < p.heads; ++h) {
        const ad::Var qh = ad::slice_cols(g, q, h * head_width, head_width);
        const ad::Var kh = ad::slice_cols(g, k, h * head_width, head_width);
        const ad::Var vh = ad::slice_cols(g, v, h * head_width, head_width);
        const ad::Var logits = ad::scale(g, ad::matmul(g, qh, ad::transpose(g, kh)), inv_sqrt);
        const ad::Var attn = ad::softmax_rows(g, logits);
        out.attention.push_back(attn);
        heads.push_back(ad::matmul(g, attn, vh));
    }
    out.output = ad::linear(g, ad::concat_cols(g, heads), p.output.weight, p.output.bias);
    return out;
}

struct VltfNodes {
    ad::Var fused;                // same shape as the vision input
    ad::Var language_aware;       // language-shaped, vision-aware feature
    ad::Var conditional_tokens;   // [K_c x C]
    ad::Var blank_tokens;         // blank tokens as they enter the last attention
    ad::Var tokens;               // conditional then blank, [K_c + K_b x C]
    std::array<MhcaNodes, 3> attention;
};

inline VltfNodes vltf(ad::Graph& g, const VltfParams<ad::Var>& p, ad::Var vision, ad::Var language) {
    const ad::Var vp = ad::linear(g, vision, p.vision_proj.weight, p.vision_proj.bias);
    const ad::Var lp = ad::linear(g, language, p.language_proj.weight, p.language_proj.bias);
    VltfNodes n;
    n.attention[0] = mhca(g, p.language_to_vision, lp, vp, vp);
    n.language_aware = n.attention[0].output;
    n.attention[1] = mhca(g, p.memory_to_language, p.memory_tokens, n.language_aware, n.language_aware);
    n.conditional_tokens = n.attention[1].output;
    n.blank_tokens = p.blank_tokens;
    n.tokens = g.value(p.blank_tokens).rows() == 0 ? n.conditional_tokens
                                                   : ad::concat_rows(g, n.conditional_tokens, p.blank_tokens);
    n.attention[2] = mhca(g, p.vision_to_tokens, vp, n.tokens, n.tokens);
    n.fused = ad::linear(g, n.attention[2].output, p.output_proj.weight, p.output_proj.bias);
    return n;
}

/// Groups non-overlapping patch x patch blocks of a [h*w x C] feature map
/// (rows in y*w + x order) into rows of [h/patch * w/patch x patch*patch*C].
inline ad::Var patchify(ad::Graph& g, ad::Var x, std::size_t h, std::size_t w, std::size_t patch) {
    const std::size_t c = g.value(x).cols();
    const std::size_t oh = h / patch;
    const std::size_t ow = w / patch;
    std::vector<std::size_t> idx;
    idx.reserve(h * w * c);
    for (std::size_t py = 0; py < oh; ++py)
        for (std::size_t px = 0; px < ow; ++px)
            for (std::size_t dy = 0; dy < patch; ++dy)
                for (std::size_t dx = 0; dx < patch; ++dx)
                    for (std::size_t ch = 0; ch < c; ++ch)
                        idx.push_back(((py * patch + dy) * w + px * patch + dx) * c + ch);
    return ad::gather(g, x, {oh * ow, patch * patch * c}, std::move(idx));
}

/// Nearest-neighbour x2 upsampling of a [h*w x C] map.
inline ad::Var upsample2(ad::Graph& g, ad::Var x, std::size_t h, std::size_t w) {
    const std::size_t c = g.value(x).cols();
    std::vector<std::size_t> idx;
    idx.reserve(4 * h * w * c);
    for (std::size_t y = 0; y < 2 * h; ++y)
        for (std::size_t xx = 0; xx < 2 * w; ++xx)
            for (std::size_t ch = 0; ch < c; ++ch) idx.push_back(((y / 2) * w + xx / 2) * c + ch);
    return ad::gather(g, x, {4 * h * w, c}, std::move(idx));
}

struct EncoderNodes {
    std::size_t height = 0;  // input image size
    std::size_t width = 0;
    ad::Var language;
    std::array<ad::Var, 4> stage_features;  // raw output of each backbone stage
    std::array<ad::Var, 3> fused;           // fusion outputs after stages 2..4
    std::array<ad::Var, 2> normalized;      // normalized fusion outputs fed forward (stages 2, 3)
    std::array<VltfNodes, 3> fusion;
};

inline std::size_t stage_height(const EncoderNodes& e, std::size_t stage) { return e.height / kStageStrides[stage]; }
inline std::size_t stage_width(const EncoderNodes& e, std::size_t stage) { return e.width / kStageStrides[stage]; }

inline void check_inputs(const ModelConfig& cfg, const Tensor& image, const std::vector<std::size_t>& tokens) {
    if (image.rank() != 3 || image.dim(2) != cfg.image_channels)
        throw Error(ErrorCode::shape_mismatch, "image must be [H x W x " + std::to_string(cfg.image_channels) + "], got " +
                                                   image.shape_string());
    if (image.dim(0) == 0 || image.dim(1) == 0 || image.dim(0) % 32 != 0 || image.dim(1) % 32 != 0)
        throw Error(ErrorCode::shape_mismatch, "image height and width must be positive multiples of 32");
    if (tokens.empty()) throw Error(ErrorCode::invalid_argument, "expression has no tokens");
    if (tokens.size() > cfg.max_tokens)
        throw Error(ErrorCode::token_overflow, std::to_string(tokens.size()) + " tokens exceed the limit of " +
                                                   std::to_string(cfg.max_tokens));
    for (auto t : tokens)
        if (t >= cfg.vocab_size) throw Error(ErrorCode::invalid_argument, "token id out of vocabulary");
}

/// Backbone with fusion after stages 2-4. Stage i+1 consumes the raw stage-i
/// feature plus the standardized fusion output of stage i.
inline EncoderNodes encode(ad::Graph& g, const ModelConfig& cfg, const ToyModelParams<ad::Var>& p, ad::Var image,
                           const std::vector<std::size_t>& tokens) {
    const Tensor& img = g.value(image);
    check_inputs(cfg, img, tokens);
    EncoderNodes e;
    e.height = img.dim(0);
    e.width = img.dim(1);

    std::vector<std::size_t> rows;
    const std::size_t dim = g.value(p.token_embedding).cols();
    for (auto t : tokens)
        for (std::size_t c = 0; c < dim; ++c) rows.push_back(t * dim + c);
    e.language = ad::gather(g, p.token_embedding, {tokens.size(), dim}, std::move(rows));

    const ad::Var pixels = ad::gather(g, image, {e.height * e.width, cfg.image_channels}, [&] {
        std::vector<std::size_t> id(img.size());
        for (std::size_t i = 0; i < id.size(); ++i) id[i] = i;
        return id;
    }());
    auto stage = [&](std::size_t i, ad::Var input, std::size_t h, std::size_t w, std::size_t patch) {
        return ad::linear(g, patchify(g, input, h, w, patch), p.stages[i].weight, p.stages[i].bias);
    };
    e.stage_features[0] = stage(0, pixels, e.height, e.width, 4);
    e.stage_features[1] = stage(1, e.stage_features[0], stage_height(e, 0), stage_width(e, 0), 2);
    for (std::size_t k = 0; k < 3; ++k) {
        const std::size_t s = k + 1;
        e.fusion[k] = vltf(g, p.fusion[k], e.stage_features[s], e.language);
        e.fused[k] = e.fusion[k].fused;
        if (s < 3) {
            e.normalized[k] = ad::standardize_cols(g, e.fused[k], cfg.norm_eps);
            const ad::Var next_input = ad::add(g, e.stage_features[s], e.normalized[k]);
            e.stage_features[s + 1] = stage(s + 1, next_input, stage_height(e, s), stage_width(e, s), 2);
        }
    }
    return e;
}

struct DecoderNodes {
    std::array<ad::Var, 4> features;     // finest to coarsest
    std::array<ad::Var, 4> mask_scores;  // 2-channel score maps
};

/// Top-down pyramid: lateral projections plus x2 nearest upsampling.
inline DecoderNodes decode(ad::Graph& g, const ToyModelParams<ad::Var>& p, const EncoderNodes& e) {
    const std::array<ad::Var, 4> inputs = {e.stage_features[0], e.fused[0], e.fused[1], e.fused[2]};
    DecoderNodes d;
    for (std::size_t k = 4; k-- > 0;) {
        ad::Var lateral = ad::linear(g, inputs[k], p.lateral[k].weight, p.lateral[k].bias);
        if (k < 3) lateral = ad::add(g, lateral, upsample2(g, d.features[k + 1], stage_height(e, k + 1), stage_width(e, k + 1)));
        d.features[k] = lateral;
    }
    for (std::size_t k = 0; k < 4; ++k)
        d.mask_scores[k] = ad::linear(g, d.features[k], p.mask_heads[k].weight, p.mask_heads[k].bias);
    return d;
}

struct HeadNodes {
    MhcaNodes attention;
    ad::Var logit;
    ad::Var probability;
};

/// Existence head: attention between the finest decoder features and the
/// last fusion block's tokens, mean-pooled, then linear + sigmoid.
inline HeadNodes existence_head(ad::Graph& g, const ModelConfig& cfg, const ToyModelParams<ad::Var>& p,
                                ad::Var fine_features, ad::Var tokens) {
    HeadNodes h;
    h.attention = cfg.head_query == HeadQuery::vision ? mhca(g, p.head_attention, fine_features, tokens, tokens)
                                                      : mhca(g, p.head_attention, tokens, fine_features, fine_features);
    h.logit = ad::linear(g, ad::mean_rows(g, h.attention.output), p.existence.weight, p.existence.bias);
    h.probability = ad::sigmoid(g, h.logit);
    return h;
}

struct ModelNodes {
    EncoderNodes encoder;
    DecoderNodes decoder;
    HeadNodes head;
};

inline ModelNodes forward(ad::Graph& g, const ModelConfig& cfg, const ToyModelParams<ad::Var>& p, ad::Var image,
                          const std::vector<std::size_t>& tokens) {
    ModelNodes m;
    m.encoder = encode(g, cfg, p, image, tokens);
    m.decoder = decode(g, p, m.encoder);
    m.head = existence_head(g, cfg, p, m.decoder.features[0], m.encoder.fusion[2].tokens);
    return m;
}

/// Majority vote over factor x factor cells; ties go to foreground. Labels
/// come out in y*w + x order to match feature rows.
inline std::vector<int> downsample_labels(const BinaryMask& mask, std::size_t factor) {
    const std::size_t w = mask.width() / factor;
    const std::size_t h = mask.height() / factor;
    std::vector<int> labels(w * h);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            std::size_t on = 0;
            for (std::size_t dy = 0; dy < factor; ++dy)
                for (std::size_t dx = 0; dx < factor; ++dx) on += mask.test(x * factor + dx, y * factor + dy);
            labels[y * w + x] = 2 * on >= factor * factor ? 1 : 0;
        }
    return labels;
}

/// Fine-level cross-entropy plus `aux_weight` times the three coarse ones.
inline ad::Var seg_loss(ad::Graph& g, const std::array<ad::Var, 4>& mask_scores, const BinaryMask& target,
                        double aux_weight) {
    ad::Var total{};
    for (std::size_t k = 0; k < 4; ++k) {
        const std::size_t rows = g.value(mask_scores[k]).rows();
        const std::size_t factor = kStageStrides[k];
        if (target.width() % factor || target.height() % factor ||
            (target.width() / factor) * (target.height() / factor) != rows)
            throw Error(ErrorCode::shape_mismatch, "ground truth does not match mask score resolution");
        ad::Var ce = ad::cross_entropy(g, mask_scores[k], downsample_labels(target, factor));
        if (k == 0)
            total = ce;
        else
            total = ad::add(g, total, ad::scale(g, ce, aux_weight));
    }
    return total;
}

struct Sample {
    Tensor image;  // [H x W x C]
    std::vector<std::size_t> tokens;
    BinaryMask mask;  // all-zero for negative sentences
    bool exists = true;
};

struct LossNodes {
    ad::Var segmentation;
    ad::Var existence;
    ad::Var total;
};

inline LossNodes loss(ad::Graph& g, const ModelConfig& cfg, const ModelNodes& m, const Sample& s) {
    LossNodes l;
    l.segmentation = seg_loss(g, m.decoder.mask_scores, s.mask, cfg.aux_loss_weight);
    l.existence = ad::bce_with_logit(g, m.head.logit, s.exists ? 1.0 : 0.0);
    l.total = ad::add(g, l.segmentation, ad::scale(g, l.existence, cfg.existence_loss_weight));
    return l;
}

// ---------------------------------------------------------------------------
// Value-level API.

struct MhcaOutput {
    Tensor output;
    Tensor attention;  // [heads x Lq x Lk]
};

namespace detail {
inline Tensor stack_heads(const ad::Graph& g, const std::vector<ad::Var>& maps) {
    const Tensor& first = g.value(maps.front());
    Tensor out({maps.size(), first.rows(), first.cols()});
    std::size_t off = 0;
    for (auto m : maps)
        for (double v : g.value(m).data()) out[off++] = v;
    return out;
}
}  // namespace detail

inline MhcaOutput mhca(const MhcaParams<Tensor>& params, const Tensor& query, const Tensor& key, const Tensor& value) {
    ad::Graph g;
    const auto p = bind(g, params, false);
    const auto n = mhca(g, p, g.constant(query), g.constant(key), g.constant(value));
    return {g.value(n.output), detail::stack_heads(g, n.attention)};
}

struct VltfOutput {
    Tensor fused;
    Tensor conditional_tokens;
    Tensor blank_tokens;  // as they enter the vision-to-token attention
    std::array<Tensor, 3> attention;
};

namespace detail {
inline VltfOutput vltf_single(const VltfParams<Tensor>& params, const Tensor& vision, const Tensor& language) {
    ad::Graph g;
    const auto p = bind(g, params, false);
    const auto n = vltf(g, p, g.constant(vision), g.constant(language));
    VltfOutput out{g.value(n.fused), g.value(n.conditional_tokens), g.value(n.blank_tokens), {}};
    for (std::size_t i = 0; i < 3; ++i) out.attention[i] = stack_heads(g, n.attention[i].attention);
    return out;
}

inline Tensor batch_item(const Tensor& t, std::size_t i) {
    const std::size_t per = t.dim(1) * t.dim(2);
    return Tensor({t.dim(1), t.dim(2)}, std::vector<double>(t.data().begin() + static_cast<std::ptrdiff_t>(i * per),
                                                           t.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * per)));
}

inline Tensor stack(const std::vector<Tensor>& items) {
    std::vector<std::size_t> shape = {items.size()};
    for (auto d : items.front().shape()) shape.push_back(d);
    Tensor out(shape);
    std::size_t off = 0;
    for (const auto& t : items)
        for (double v : t.data()) out[off++] = v;
    return out;
}
}  // namespace detail

/// Vision [HW x C_v] with language [T x C_l], or batched [N x HW x C_v] with
/// [N x T x C_l]. The fused output always has the vision input's shape.
inline VltfOutput vltf_forward(const VltfParams<Tensor>& params, const Tensor& vision, const Tensor& language) {
    if (vision.rank() == 2 && language.rank() == 2) return detail::vltf_single(params, vision, language);
    if (vision.rank() != 3 || language.rank() != 3 || vision.dim(0) != language.dim(0))
        throw Error(ErrorCode::shape_mismatch, "vltf_forward: vision " + vision.shape_string() + ", language " +
                                                   language.shape_string());
    std::vector<Tensor> fused, cond, blank;
    std::array<std::vector<Tensor>, 3> attn;
    for (std::size_t i = 0; i < vision.dim(0); ++i) {
        auto one = detail::vltf_single(params, detail::batch_item(vision, i), detail::batch_item(language, i));
        fused.push_back(std::move(one.fused));
        cond.push_back(std::move(one.conditional_tokens));
        blank.push_back(std::move(one.blank_tokens));
        for (std::size_t k = 0; k < 3; ++k) attn[k].push_back(std::move(one.attention[k]));
    }
    VltfOutput out{detail::stack(fused), detail::stack(cond), detail::stack(blank), {}};
    for (std::size_t k = 0; k < 3; ++k) out.attention[k] = detail::stack(attn[k]);
    return out;
}

struct FusionTrace {
    Tensor conditional_tokens;
    Tensor blank_tokens;
    std::array<Tensor, 3> attention;
};

/// Values of one forward pass, for inspection and tests.
struct ForwardTrace {
    std::size_t height = 0;
    std::size_t width = 0;
    std::array<Tensor, 4> stage_features;
    std::array<Tensor, 3> fused;
    std::array<Tensor, 2> normalized;
    std::array<FusionTrace, 3> fusion;
    std::array<Tensor, 4> decoder_features;
    std::array<Tensor, 4> mask_scores;
    Tensor head_attention;
    double existence_probability = 0.0;
    bool decoded = false;
};

namespace detail {
inline void fill_encoder(const ad::Graph& g, const EncoderNodes& e, ForwardTrace& t) {
    t.height = e.height;
    t.width = e.width;
    for (std::size_t i = 0; i < 4; ++i) t.stage_features[i] = g.value(e.stage_features[i]);
    for (std::size_t i = 0; i < 3; ++i) {
        t.fused[i] = g.value(e.fused[i]);
        t.fusion[i].conditional_tokens = g.value(e.fusion[i].conditional_tokens);
        t.fusion[i].blank_tokens = g.value(e.fusion[i].blank_tokens);
        for (std::size_t k = 0; k < 3; ++k) t.fusion[i].attention[k] = stack_heads(g, e.fusion[i].attention[k].attention);
    }
    for (std::size_t i = 0; i < 2; ++i) t.normalized[i] = g.value(e.normalized[i]);
}
}  // namespace detail

/// Encoder only (backbone + fusion).
inline ForwardTrace encoder_forward(const ModelConfig& cfg, const ToyModelParams<Tensor>& params, const Tensor& image,
                                    const std::vector<std::size_t>& tokens) {
    ad::Graph g;
    const auto p = bind(g, params, false);
    const auto e = encode(g, cfg, p, g.constant(image), tokens);
    ForwardTrace t;
    detail::fill_encoder(g, e, t);
    return t;
}

/// Full model: encoder, decoder and existence head.
inline ForwardTrace run_model(const ModelConfig& cfg, const ToyModelParams<Tensor>& params, const Tensor& image,
                              const std::vector<std::size_t>& tokens) {
    ad::Graph g;
    const auto p = bind(g, params, false);
    const auto m = forward(g, cfg, p, g.constant(image), tokens);
    ForwardTrace t;
    detail::fill_encoder(g, m.encoder, t);
    for (std::size_t i = 0; i < 4; ++i) {
        t.decoder_features[i] = g.value(m.decoder.features[i]);
        t.mask_scores[i] = g.value(m.decoder.mask_scores[i]);
    }
    t.head_attention = detail::stack_heads(g, m.head.attention.attention);
    t.existence_probability = g.value(m.head.probability)[0];
    t.decoded = true;
    return t;
}

struct DecoderOutput {
    std::array<Tensor, 4> features;
    std::array<Tensor, 4> mask_scores;
};

/// Decoder on explicit inputs: the stride-4 feature and the three fused maps,
/// for an image of `height` x `width`.
inline DecoderOutput fpn_decode(const ToyModelParams<Tensor>& params, std::size_t height, std::size_t width,
                                const Tensor& stage1, const Tensor& fused2, const Tensor& fused3, const Tensor& fused4) {
    ad::Graph g;
    const auto p = bind(g, params, false);
    EncoderNodes e;
    e.height = height;
    e.width = width;
    e.stage_features[0] = g.constant(stage1);
    e.fused = {g.constant(fused2), g.constant(fused3), g.constant(fused4)};
    for (std::size_t k = 0; k < 4; ++k) {
        const Tensor& in = g.value(k == 0 ? e.stage_features[0] : e.fused[k - 1]);
        if (in.rank() != 2 || in.rows() != stage_height(e, k) * stage_width(e, k))
            throw Error(ErrorCode::shape_mismatch, "fpn_decode: level " + std::to_string(k + 1) + " input " +
                                                       in.shape_string() + " does not match the image size");
    }
    const auto d = decode(g, p, e);
    DecoderOutput out;
    for (std::size_t k = 0; k < 4; ++k) {
        out.features[k] = g.value(d.features[k]);
        out.mask_scores[k] = g.value(d.mask_scores[k]);
    }
    return out;
}

inline double seg_loss(const std::array<Tensor, 4>& mask_scores, const BinaryMask& target, double aux_weight) {
    ad::Graph g;
    std::array<ad::Var, 4> vars;
    for (std::size_t k = 0; k < 4; ++k) vars[k] = g.constant(mask_scores[k]);
    return g.value(seg_loss(g, vars, target, aux_weight))[0];
}

inline double binary_head(const ModelConfig& cfg, const ToyModelParams<Tensor>& params, const Tensor& fine_features,
                          const Tensor& tokens) {
    ad::Graph g;
    const auto p = bind(g, params, false);
    return g.value(existence_head(g, cfg, p, g.constant(fine_features), g.constant(tokens)).probability)[0];
}

inline double exist_loss(double probability, bool exists) {
    if (!(probability > 0.0 && probability < 1.0))
        throw Error(ErrorCode::invalid_argument, "existence probability must lie in (0, 1)");
    return exists ? -std::log(probability) : -std::log(1.0 - probability);
}

inline double total_loss(double segmentation, double existence, double existence_weight) {
    return segmentation + existence_weight * existence;
}

/// Empty mask when the existence head says no; otherwise per-pixel argmax of
/// the finest scores upsampled to image size, ties to background.
inline BinaryMask predict_mask(const ForwardTrace& trace) {
    if (!trace.decoded) throw Error(ErrorCode::invalid_argument, "predict_mask needs a full forward trace");
    BinaryMask mask(trace.width, trace.height);
    if (trace.existence_probability < 0.5) return mask;
    const Tensor& scores = trace.mask_scores[0];
    const std::size_t stride = kStageStrides[0];
    const std::size_t w = trace.width / stride;
    for (std::size_t y = 0; y < trace.height; ++y)
        for (std::size_t x = 0; x < trace.width; ++x) {
            const std::size_t row = (y / stride) * w + x / stride;
            if (scores(row, 1) > scores(row, 0)) mask.set(x, y);
        }
    return mask;
}

struct LossValue {
    double segmentation = 0.0;
    double existence = 0.0;
    double total = 0.0;
};

inline LossValue evaluate_loss(const ModelConfig& cfg, const ToyModelParams<Tensor>& params, const Sample& s) {
    ad::Graph g;
    const auto p = bind(g, params, false);
    const auto m = forward(g, cfg, p, g.constant(s.image), s.tokens);
    const auto l = loss(g, cfg, m, s);
    return {g.value(l.segmentation)[0], g.value(l.existence)[0], g.value(l.total)[0]};
}

/// Summed total loss over `samples` and its gradient for every parameter.
inline std::pair<double, ToyModelParams<Tensor>> loss_and_gradient(const ModelConfig& cfg,
                                                                   const ToyModelParams<Tensor>& params,
                                                                   const std::vector<Sample>& samples) {
    auto grads = map_params<Tensor>(params, [](const Tensor& t) { return Tensor(t.shape()); });
    double total = 0.0;
    for (const auto& s : samples) {
        ad::Graph g;
        const auto p = bind(g, params, true);
        const auto m = forward(g, cfg, p, g.constant(s.image), s.tokens);
        const auto l = loss(g, cfg, m, s);
        total += g.value(l.total)[0];
        g.backward(l.total);
        std::vector<Tensor*> dst;
        for_each_param(grads, [&](const std::string&, Tensor& t) { dst.push_back(&t); });
        std::size_t i = 0;
        auto vars = p;
        for_each_param(vars, [&](const std::string&, ad::Var& v) {
            const Tensor gv = g.grad(v);
            for (std::size_t k = 0; k < gv.size(); ++k) (*dst[i])[k] += gv[k];
            ++i;
        });
    }
    return {total, std::move(grads)};
}

inline double batch_loss(const ModelConfig& cfg, const ToyModelParams<Tensor>& params, const std::vector<Sample>& samples) {
    double total = 0.0;
    for (const auto& s : samples) total += evaluate_loss(cfg, params, s).total;
    return total;
}

// ---------------------------------------------------------------------------
// Text side.

/// Maps words onto embedding rows by hashing.
inline std::vector<std::size_t> encode_tokens(std::string_view text, std::size_t vocab_size, std::size_t max_tokens) {
    const auto words = tokenize(text);
    if (words.size() > max_tokens)
        throw Error(ErrorCode::token_overflow, std::to_string(words.size()) + " words exceed the limit of " +
                                                   std::to_string(max_tokens));
    std::vector<std::size_t> ids;
    for (const auto& w : words) ids.push_back(static_cast<std::size_t>(fnv1a(w) % vocab_size));
    return ids;
}

struct TextPrompt {
    std::string text;
    bool truncated = false;
};

/// Joins all positive sentences of a reference into one expression, cut to
/// `max_tokens` words.
inline TextPrompt text_prompt_concat(const std::vector<std::string>& sentences, std::size_t max_tokens = 20) {
    if (sentences.empty()) throw Error(ErrorCode::empty_input, "no sentences to concatenate");
    std::vector<std::string> words;
    for (const auto& s : sentences)
        for (auto& w : tokenize(s)) words.push_back(std::move(w));
    TextPrompt out;
    if (words.size() > max_tokens) {
        words.resize(max_tokens);
        out.truncated = true;
    }
    out.text = join_words(words);
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic data and a small training demo.

/// Image whose first channel lights up inside `mask` plus seeded noise.
inline Tensor synthetic_image(const BinaryMask& mask, std::size_t channels, Rng& rng, double noise = 0.1) {
    Tensor img({mask.height(), mask.width(), channels});
    for (std::size_t y = 0; y < mask.height(); ++y)
        for (std::size_t x = 0; x < mask.width(); ++x)
            for (std::size_t c = 0; c < channels; ++c)
                img[(y * mask.width() + x) * channels + c] = (c == 0 && mask.test(x, y) ? 1.0 : 0.0) + noise * rng.normal();
    return img;
}

inline BinaryMask box_mask(std::size_t width, std::size_t height, std::size_t x0, std::size_t y0, std::size_t x1,
                           std::size_t y1) {
    BinaryMask m(width, height);
    for (std::size_t x = x0; x < x1; ++x)
        for (std::size_t y = y0; y < y1; ++y) m.set(x, y);
    return m;
}

/// Positive/negative pairs in 1:1 ratio: each image appears once with a
/// describing token sequence and its box, once with other tokens, no mask.
inline std::vector<Sample> synthetic_batch(const ModelConfig& cfg, std::size_t pairs, std::size_t size, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Sample> out;
    for (std::size_t i = 0; i < pairs; ++i) {
        const std::size_t x0 = rng.index(size / 2);
        const std::size_t y0 = rng.index(size / 2);
        const std::size_t side = size / 4 + rng.index(size / 4);
        const BinaryMask box = box_mask(size, size, x0, y0, std::min(size, x0 + side), std::min(size, y0 + side));
        const Tensor image = synthetic_image(box, cfg.image_channels, rng);
        auto tokens = [&] {
            std::vector<std::size_t> t(1 + rng.index(cfg.max_tokens));
            for (auto& id : t) id = rng.index(cfg.vocab_size);
            return t;
        };
        out.push_back({image, tokens(), box, true});
        out.push_back({image, tokens(), BinaryMask(size, size), false});
    }
    return out;
}

/// Full-batch gradient descent; returns the loss before each step and after
/// the last one.
inline std::vector<double> train_demo(const ModelConfig& cfg, ToyModelParams<Tensor>& params,
                                      const std::vector<Sample>& samples, std::size_t steps, double learning_rate) {
    std::vector<double> history;
    for (std::size_t step = 0; step < steps; ++step) {
        auto [value, grads] = loss_and_gradient(cfg, params, samples);
        if (!std::isfinite(value))
            throw Error(ErrorCode::nonfinite_gradient, "training diverged at step " + std::to_string(step) +
                                                           "; lower the learning rate");
        history.push_back(value);
        std::vector<Tensor*> dst;
        for_each_param(params, [&](const std::string&, Tensor& t) { dst.push_back(&t); });
        std::size_t i = 0;
        for_each_param(grads, [&](const std::string&, Tensor& gt) {
            for (std::size_t k = 0; k < gt.size(); ++k) (*dst[i])[k] -= learning_rate * gt[k];
            ++i;
        });
    }
    history.push_back(batch_loss(cfg, params, samples));
    return history;
}

// ---------------------------------------------------------------------------
// Trace dump.

inline nlohmann::json to_json(const Tensor& t) { return {{"shape", t.shape()}, {"data", t.values()}}; }

inline nlohmann::json to_json(const ForwardTrace& t) {
    nlohmann::json fusion = nlohmann::json::array();
    static const char* names[3] = {"language_to_vision", "memory_to_language", "vision_to_tokens"};
    for (std::size_t i = 0; i < 3; ++i) {
        nlohmann::json attn;
        for (std::size_t k = 0; k < 3; ++k) attn[names[k]] = to_json(t.fusion[i].attention[k]);
        fusion.push_back({{"stage", i + 2},
                          {"attention", std::move(attn)},
                          {"conditional_tokens", to_json(t.fusion[i].conditional_tokens)},
                          {"blank_tokens", to_json(t.fusion[i].blank_tokens)}});
    }
    nlohmann::json out = {{"image_size", {t.height, t.width}}, {"fusion", std::move(fusion)}};
    if (t.decoded) {
        out["existence_probability"] = t.existence_probability;
        out["head_attention"] = to_json(t.head_attention);
        out["mask_scores_fine"] = to_json(t.mask_scores[0]);
    }
    return out;
}

/// Every attention map in the trace, flattened, for row-sum checks.
inline std::vector<const Tensor*> attention_maps(const ForwardTrace& t) {
    std::vector<const Tensor*> maps;
    for (const auto& f : t.fusion)
        for (const auto& a : f.attention) maps.push_back(&a);
    if (t.decoded) maps.push_back(&t.head_attention);
    return maps;
}

/// Largest |row sum - 1| over all attention rows of all maps.
inline double max_attention_row_error(const ForwardTrace& t) {
    double worst = 0.0;
    for (const Tensor* a : attention_maps(t)) {
        const std::size_t len = a->dim(a->rank() - 1);
        for (std::size_t r = 0; r < a->size() / len; ++r) {
            double sum = 0.0;
            for (std::size_t k = 0; k < len; ++k) sum += (*a)[r * len + k];
            worst = std::max(worst, std::abs(sum - 1.0));
        }
    }
    return worst;
}

}  // namespace rris::refseg
