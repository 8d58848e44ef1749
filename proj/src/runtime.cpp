#include "icl/runtime.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "icl/rng.hpp"
#include "json.hpp"

namespace icl {

using nlohmann::json;
namespace fs = std::filesystem;

size_t Tensor::elems() const {
    size_t n = 1;
    for (int d : shape) n *= (size_t)d;
    return n;
}

const Tensor& WeightArchive::get(const std::string& name) const {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw std::runtime_error("missing tensor \"" + name + "\"");
    return tensors[it->second];
}

std::vector<std::pair<std::string, std::vector<int>>> required_tensors(const ModelConfig& cfg) {
    std::vector<std::pair<std::string, std::vector<int>>> req;
    req.push_back({"tok_embed", {cfg.vocab_size, cfg.d_model}});
    for (int l = 0; l < cfg.n_layers; ++l) {
        std::string p = "layers." + std::to_string(l) + ".";
        req.push_back({p + "attn_norm", {cfg.d_model}});
        req.push_back({p + "attn.wq", {cfg.d_model, cfg.d_model}});
        req.push_back({p + "attn.wk", {cfg.d_model, cfg.d_model}});
        req.push_back({p + "attn.wv", {cfg.d_model, cfg.d_model}});
        req.push_back({p + "attn.wo", {cfg.d_model, cfg.d_model}});
        req.push_back({p + "mlp_norm", {cfg.d_model}});
        req.push_back({p + "mlp.w_in", {cfg.d_ff, cfg.d_model}});
        req.push_back({p + "mlp.w_out", {cfg.d_model, cfg.d_ff}});
    }
    req.push_back({"final_norm", {cfg.d_model}});
    if (!cfg.tied_head) req.push_back({"head", {cfg.vocab_size, cfg.d_model}});
    return req;
}

namespace {

std::string shape_str(const std::vector<int>& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

ModelConfig config_from_json(const json& j) {
    ModelConfig cfg;
    cfg.n_layers = j.value("n_layers", cfg.n_layers);
    cfg.n_heads = j.value("n_heads", cfg.n_heads);
    cfg.d_model = j.value("d_model", cfg.d_model);
    cfg.d_ff = j.value("d_ff", cfg.d_ff);
    cfg.vocab_size = j.value("vocab_size", cfg.vocab_size);
    cfg.max_positions = j.value("max_positions", cfg.max_positions);
    cfg.norm_eps = j.value("norm_eps", cfg.norm_eps);
    cfg.tied_head = j.value("tied_head", cfg.tied_head);
    std::string pos = j.value("pos_encoding", "rotary");
    if (pos == "rotary") cfg.pos_encoding = PosEncoding::rotary;
    else if (pos == "none") cfg.pos_encoding = PosEncoding::none;
    else throw std::runtime_error("unknown pos_encoding: \"" + pos + "\"");
    if (cfg.d_model % cfg.n_heads != 0)
        throw std::runtime_error("d_model must be divisible by n_heads");
    if (cfg.head_dim() % 2 != 0 && cfg.pos_encoding == PosEncoding::rotary)
        throw std::runtime_error("rotary encoding needs an even head dimension");
    return cfg;
}

json config_to_json(const ModelConfig& cfg) {
    json j;
    j["n_layers"] = cfg.n_layers;
    j["n_heads"] = cfg.n_heads;
    j["d_model"] = cfg.d_model;
    j["d_ff"] = cfg.d_ff;
    j["vocab_size"] = cfg.vocab_size;
    j["max_positions"] = cfg.max_positions;
    j["pos_encoding"] = cfg.pos_encoding == PosEncoding::rotary ? "rotary" : "none";
    j["norm_eps"] = cfg.norm_eps;
    j["tied_head"] = cfg.tied_head;
    return j;
}

}  // namespace

WeightArchive load_weights(const std::string& dir) {
    fs::path manifest_path = fs::path(dir) / "manifest.json";
    std::ifstream mf(manifest_path);
    if (!mf)
        throw std::runtime_error("cannot open weight manifest: " + manifest_path.string());
    json doc;
    try {
        mf >> doc;
    } catch (const std::exception& e) {
        throw std::runtime_error("invalid weight manifest JSON: " + std::string(e.what()));
    }
    if (doc.value("dtype", "float32") != "float32")
        throw std::runtime_error("unsupported weight dtype: " + doc.value("dtype", "?"));
    WeightArchive archive;
    archive.config = config_from_json(doc.at("config"));

    fs::path blob_path = fs::path(dir) / "weights.bin";
    std::ifstream bf(blob_path, std::ios::binary);
    if (!bf) throw std::runtime_error("cannot open weight blob: " + blob_path.string());
    bf.seekg(0, std::ios::end);
    size_t blob_size = (size_t)bf.tellg();
    bf.seekg(0);

    size_t expected = 0;
    for (const auto& t : doc.at("tensors")) {
        Tensor tensor;
        tensor.name = t.at("name").get<std::string>();
        tensor.shape = t.at("shape").get<std::vector<int>>();
        if (t.value("dtype", "float32") != "float32")
            throw std::runtime_error("unsupported dtype for tensor \"" + tensor.name + "\"");
        size_t offset = t.at("offset").get<size_t>();
        size_t bytes = tensor.elems() * sizeof(float);
        if (offset + bytes > blob_size)
            throw std::runtime_error("weight blob truncated: tensor \"" + tensor.name +
                                     "\" needs bytes up to " + std::to_string(offset + bytes) +
                                     ", blob has " + std::to_string(blob_size));
        tensor.data.resize(tensor.elems());
        bf.seekg((std::streamoff)offset);
        bf.read(reinterpret_cast<char*>(tensor.data.data()), (std::streamsize)bytes);
        if (!bf)
            throw std::runtime_error("failed reading tensor \"" + tensor.name + "\"");
        expected += bytes;
        archive.by_name.emplace(tensor.name, (int)archive.tensors.size());
        archive.tensors.push_back(std::move(tensor));
    }
    if (expected != blob_size)
        throw std::runtime_error("weight blob truncated: manifest covers " +
                                 std::to_string(expected) + " bytes, blob has " +
                                 std::to_string(blob_size));

    // exact agreement between manifest and the tensor set the config implies
    auto req = required_tensors(archive.config);
    for (const auto& [name, shape] : req) {
        const Tensor& t = archive.get(name);  // throws "missing tensor" if absent
        if (t.shape != shape)
            throw std::runtime_error("tensor \"" + name + "\" shape mismatch: expected " +
                                     shape_str(shape) + ", found " + shape_str(t.shape));
    }
    if (req.size() != archive.tensors.size()) {
        for (const auto& t : archive.tensors) {
            bool known = false;
            for (const auto& [name, shape] : req) known |= name == t.name;
            if (!known)
                throw std::runtime_error("unexpected tensor \"" + t.name + "\" in archive");
        }
    }
    return archive;
}

void save_weights(const WeightArchive& archive, const std::string& dir) {
    fs::create_directories(dir);
    json doc;
    doc["dtype"] = "float32";
    doc["config"] = config_to_json(archive.config);
    json tensors = json::array();
    size_t offset = 0;
    std::ofstream bf(fs::path(dir) / "weights.bin", std::ios::binary);
    if (!bf) throw std::runtime_error("cannot write weight blob in " + dir);
    for (const auto& t : archive.tensors) {
        json tj;
        tj["name"] = t.name;
        tj["shape"] = t.shape;
        tj["dtype"] = "float32";
        tj["offset"] = offset;
        tensors.push_back(tj);
        bf.write(reinterpret_cast<const char*>(t.data.data()),
                 (std::streamsize)(t.data.size() * sizeof(float)));
        offset += t.data.size() * sizeof(float);
    }
    doc["tensors"] = tensors;
    std::ofstream mf(fs::path(dir) / "manifest.json");
    if (!mf) throw std::runtime_error("cannot write weight manifest in " + dir);
    mf << doc.dump(1) << "\n";
}

ModelConfig parse_model_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const std::exception& e) {
        throw std::runtime_error("invalid model config JSON: " + std::string(e.what()));
    }
    return config_from_json(doc);
}

WeightArchive init_weights(const ModelConfig& cfg, uint64_t seed) {
    if (cfg.vocab_size <= 0) throw std::runtime_error("init_weights needs a vocab_size");
    WeightArchive archive;
    archive.config = cfg;
    Rng rng(seed);
    for (const auto& [name, shape] : required_tensors(cfg)) {
        Tensor t;
        t.name = name;
        t.shape = shape;
        t.data.resize(t.elems());
        bool is_norm = shape.size() == 1;
        for (auto& v : t.data) v = is_norm ? 1.0f : (float)rng.normal(0.0, 0.02);
        archive.by_name.emplace(name, (int)archive.tensors.size());
        archive.tensors.push_back(std::move(t));
    }
    return archive;
}

// ---- visibility plans ------------------------------------------------------

VisibilityPlan VisibilityPlan::full_causal(int n) {
    VisibilityPlan plan;
    plan.length = n;
    plan.test_start = n;
    plan.allowed.resize(n);
    for (int q = 0; q < n; ++q) plan.allowed[q].assign(q + 1, 1);
    return plan;
}

bool VisibilityPlan::same_matrix(const VisibilityPlan& other) const {
    if (length != other.length) return false;
    for (int q = 0; q < length; ++q) {
        for (int k = 0; k <= q; ++k) {
            if ((allowed[q][k] != 0) != (other.allowed[q][k] != 0)) return false;
        }
    }
    return true;
}

void validate_plan(const VisibilityPlan& plan, int n_tokens) {
    if (plan.length != n_tokens)
        throw std::runtime_error("plan length " + std::to_string(plan.length) +
                                 " does not match token count " + std::to_string(n_tokens));
    if ((int)plan.allowed.size() != plan.length)
        throw std::runtime_error("plan row count does not match its length");
    for (int q = 0; q < plan.length; ++q) {
        const auto& row = plan.allowed[q];
        if ((int)row.size() < q + 1)
            throw std::runtime_error("plan row " + std::to_string(q) + " is too short");
        if (!row[q])
            throw std::runtime_error("plan masks the diagonal at q=" + std::to_string(q));
        for (int k = q + 1; k < (int)row.size(); ++k) {
            if (row[k])
                throw std::runtime_error("plan violates causality at (q=" + std::to_string(q) +
                                         ", k=" + std::to_string(k) + ")");
        }
        if (q < plan.test_start) {
            for (int k = 0; k <= q; ++k) {
                if (!row[k])
                    throw std::runtime_error("plan restricts a demonstration row at q=" +
                                             std::to_string(q));
            }
        }
    }
}

VisibilityPlan extend_plan(const VisibilityPlan& plan, int extra) {
    VisibilityPlan out = plan;
    if (extra <= 0) return out;
    int n = plan.length;
    std::vector<uint8_t> base;
    if (n > 0) {
        base = plan.allowed[n - 1];
    }
    for (int e = 0; e < extra; ++e) {
        std::vector<uint8_t> row = base;
        row.resize((size_t)n + e + 1, 1);  // continuation keys are visible causally
        out.allowed.push_back(std::move(row));
    }
    out.length = n + extra;
    return out;
}

std::string dump_plan(const VisibilityPlan& plan) {
    std::ostringstream os;
    os << "length=" << plan.length << " test_start=" << plan.test_start << "\n";
    for (int q = 0; q < plan.length; ++q) {
        os << "q=" << q << ":";
        int k = 0;
        while (k <= q) {
            int v = plan.allowed[q][k] ? 1 : 0;
            int run = 0;
            while (k <= q && (plan.allowed[q][k] ? 1 : 0) == v) {
                ++k;
                ++run;
            }
            os << " " << v << "x" << run;
        }
        os << "\n";
    }
    for (const auto& w : plan.warnings) os << "warning: " << w << "\n";
    return os.str();
}

// ---- forward pass ----------------------------------------------------------

namespace {

template <typename T>
struct Kern {
    ExecMode mode;
    void linear(const T* x, int rows, int d_in, const float* w, int d_out, T* y) const {
        if (mode == ExecMode::parallel) par::linear(x, rows, d_in, w, d_out, y);
        else ref::linear(x, rows, d_in, w, d_out, y);
    }
    void rmsnorm(const T* x, int rows, int d, const float* g, T eps, T* y) const {
        if (mode == ExecMode::parallel) par::rmsnorm(x, rows, d, g, eps, y);
        else ref::rmsnorm(x, rows, d, g, eps, y);
    }
    void gelu(T* x, size_t n) const {
        if (mode == ExecMode::parallel) par::gelu(x, n);
        else ref::gelu(x, n);
    }
    void add(T* a, const T* b, size_t n) const {
        if (mode == ExecMode::parallel) par::add(a, b, n);
        else ref::add(a, b, n);
    }
    void rope(T* x, int rows, int heads, int head_dim) const {
        if (mode == ExecMode::parallel) par::rope(x, rows, heads, head_dim);
        else ref::rope(x, rows, heads, head_dim);
    }
    void attention(const T* q, const T* k, const T* v, int n, int heads, int head_dim,
                   const uint8_t* allowed, T* out, double* trace) const {
        if (mode == ExecMode::parallel) par::attention(q, k, v, n, heads, head_dim, allowed, out, trace);
        else ref::attention(q, k, v, n, heads, head_dim, allowed, out, trace);
    }
};

// dense [n, n] mask built once per forward; entries above the diagonal stay 0
std::vector<uint8_t> flatten_plan(const VisibilityPlan& plan) {
    int n = plan.length;
    std::vector<uint8_t> m((size_t)n * n, 0);
    for (int q = 0; q < n; ++q) {
        for (int k = 0; k <= q; ++k) m[(size_t)q * n + k] = plan.allowed[q][k] ? 1 : 0;
    }
    return m;
}

}  // namespace

template <typename T>
std::vector<T> forward_with_plan(const std::vector<int>& tokens, const WeightArchive& model,
                                 const VisibilityPlan* plan, ExecMode mode, ForwardTrace* trace) {
    const ModelConfig& cfg = model.config;
    const int n = (int)tokens.size();
    if (n == 0) throw std::runtime_error("cannot run the model on an empty token sequence");
    if (n > cfg.max_positions)
        throw std::runtime_error("sequence length " + std::to_string(n) +
                                 " exceeds max_positions " + std::to_string(cfg.max_positions));
    for (int id : tokens) {
        if (id < 0 || id >= cfg.vocab_size)
            throw std::runtime_error("token id " + std::to_string(id) +
                                     " outside the model vocabulary");
    }
    std::vector<uint8_t> mask;
    if (plan) {
        validate_plan(*plan, n);
        mask = flatten_plan(*plan);
    }

    Kern<T> kern{mode};
    const int d = cfg.d_model;
    const Tensor& embed = model.get("tok_embed");

    std::vector<T> x((size_t)n * d);
    for (int i = 0; i < n; ++i) {
        const float* row = embed.data.data() + (size_t)tokens[i] * d;
        for (int j = 0; j < d; ++j) x[(size_t)i * d + j] = (T)row[j];
    }

    if (trace) {
        trace->n = n;
        trace->heads = cfg.n_heads;
        trace->attn.assign(cfg.n_layers,
                           std::vector<double>((size_t)cfg.n_heads * n * n, 0.0));
    }

    std::vector<T> xn((size_t)n * d), q((size_t)n * d), k((size_t)n * d), v((size_t)n * d);
    std::vector<T> att((size_t)n * d), proj((size_t)n * d);
    std::vector<T> h((size_t)n * cfg.d_ff);

    for (int layer = 0; layer < cfg.n_layers; ++layer) {
        std::string p = "layers." + std::to_string(layer) + ".";
        kern.rmsnorm(x.data(), n, d, model.get(p + "attn_norm").data.data(), (T)cfg.norm_eps,
                     xn.data());
        kern.linear(xn.data(), n, d, model.get(p + "attn.wq").data.data(), d, q.data());
        kern.linear(xn.data(), n, d, model.get(p + "attn.wk").data.data(), d, k.data());
        kern.linear(xn.data(), n, d, model.get(p + "attn.wv").data.data(), d, v.data());
        if (cfg.pos_encoding == PosEncoding::rotary) {
            kern.rope(q.data(), n, cfg.n_heads, cfg.head_dim());
            kern.rope(k.data(), n, cfg.n_heads, cfg.head_dim());
        }
        kern.attention(q.data(), k.data(), v.data(), n, cfg.n_heads, cfg.head_dim(),
                       mask.empty() ? nullptr : mask.data(), att.data(),
                       trace ? trace->attn[layer].data() : nullptr);
        kern.linear(att.data(), n, d, model.get(p + "attn.wo").data.data(), d, proj.data());
        kern.add(x.data(), proj.data(), (size_t)n * d);

        kern.rmsnorm(x.data(), n, d, model.get(p + "mlp_norm").data.data(), (T)cfg.norm_eps,
                     xn.data());
        kern.linear(xn.data(), n, d, model.get(p + "mlp.w_in").data.data(), cfg.d_ff, h.data());
        kern.gelu(h.data(), (size_t)n * cfg.d_ff);
        kern.linear(h.data(), n, cfg.d_ff, model.get(p + "mlp.w_out").data.data(), d,
                    proj.data());
        kern.add(x.data(), proj.data(), (size_t)n * d);
    }

    kern.rmsnorm(x.data(), n, d, model.get("final_norm").data.data(), (T)cfg.norm_eps,
                 xn.data());
    const Tensor& head = cfg.tied_head ? model.get("tok_embed") : model.get("head");
    std::vector<T> logits((size_t)n * cfg.vocab_size);
    kern.linear(xn.data(), n, d, head.data.data(), cfg.vocab_size, logits.data());
    return logits;
}

template std::vector<float> forward_with_plan<float>(const std::vector<int>&,
                                                     const WeightArchive&,
                                                     const VisibilityPlan*, ExecMode,
                                                     ForwardTrace*);
template std::vector<double> forward_with_plan<double>(const std::vector<int>&,
                                                       const WeightArchive&,
                                                       const VisibilityPlan*, ExecMode,
                                                       ForwardTrace*);

namespace {

// log softmax of one logits row at a chosen id, accumulated in double
template <typename T>
double log_prob_at(const T* row, int vocab, int id) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < vocab; ++i) mx = std::max(mx, (double)row[i]);
    double denom = 0;
    for (int i = 0; i < vocab; ++i) denom += std::exp((double)row[i] - mx);
    return (double)row[id] - mx - std::log(denom);
}

}  // namespace

template <typename T>
std::vector<double> score_labels(const std::vector<int>& prompt_tokens,
                                 const WeightArchive& model, const VisibilityPlan* plan,
                                 const std::vector<std::vector<int>>& label_tokens,
                                 ScoringRule rule, ExecMode mode) {
    const int vocab = model.config.vocab_size;
    const int n = (int)prompt_tokens.size();
    if (label_tokens.empty()) throw std::runtime_error("no labels to score");
    for (const auto& lt : label_tokens) {
        if (lt.empty()) throw std::runtime_error("label tokenizes to an empty sequence");
    }

    // the first continuation token is scored from the prompt's last row,
    // shared by every label
    std::vector<T> base = forward_with_plan<T>(prompt_tokens, model, plan, mode);
    const T* last = base.data() + (size_t)(n - 1) * vocab;

    std::vector<double> scores;
    scores.reserve(label_tokens.size());
    for (const auto& lt : label_tokens) {
        double s = log_prob_at(last, vocab, lt[0]);
        if (rule == ScoringRule::full_verbalizer && lt.size() > 1) {
            std::vector<int> ext = prompt_tokens;
            ext.insert(ext.end(), lt.begin(), lt.end());
            VisibilityPlan extended;
            const VisibilityPlan* ext_plan = nullptr;
            if (plan) {
                extended = extend_plan(*plan, (int)lt.size());
                ext_plan = &extended;
            }
            std::vector<T> logits = forward_with_plan<T>(ext, model, ext_plan, mode);
            for (size_t j = 1; j < lt.size(); ++j) {
                const T* row = logits.data() + (size_t)(n + j - 1) * vocab;
                s += log_prob_at(row, vocab, lt[j]);
            }
        }
        scores.push_back(s);
    }
    return scores;
}

template std::vector<double> score_labels<float>(const std::vector<int>&, const WeightArchive&,
                                                 const VisibilityPlan*,
                                                 const std::vector<std::vector<int>>&,
                                                 ScoringRule, ExecMode);
template std::vector<double> score_labels<double>(const std::vector<int>&, const WeightArchive&,
                                                  const VisibilityPlan*,
                                                  const std::vector<std::vector<int>>&,
                                                  ScoringRule, ExecMode);

int argmax_label(const std::vector<double>& scores) {
    if (scores.empty()) throw std::runtime_error("no scores to rank");
    int best = 0;
    for (int i = 1; i < (int)scores.size(); ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    return best;
}

}  // namespace icl
