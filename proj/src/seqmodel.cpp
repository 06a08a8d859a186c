#include "styleobf/seqmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "styleobf/checkpoint.hpp"
#include "styleobf/textdata.hpp"

namespace styleobf {

using json = nlohmann::json;
using ad::Var;

void ModelConfig::validate() const {
    if (token_transfer && use_grl)
        throw std::invalid_argument("ModelConfig: TT and GRL are mutually exclusive");
    if (token_transfer && mode != ModelMode::S2S)
        throw std::invalid_argument("ModelConfig: TT requires S2S mode");
    if (embedding_dim <= 0 || encoder_dim <= 0 || decoder_dim <= 0)
        throw std::invalid_argument("ModelConfig: dimensions must be positive");
    if (encoder_dim % 2 != 0)
        throw std::invalid_argument("ModelConfig: encoder_dim must be even (bi-LSTM)");
    if (dropout_p < 0.0 || dropout_p >= 1.0)
        throw std::invalid_argument("ModelConfig: dropout_p must be in [0, 1)");
    if (grl.lambda < 0.0)
        throw std::invalid_argument("ModelConfig: GRL lambda must be non-negative");
    if (conditional && style_embedding_dim <= 0)
        throw std::invalid_argument("ModelConfig: style_embedding_dim must be positive");
    if (num_styles < 1) throw std::invalid_argument("ModelConfig: num_styles must be >= 1");
    if (vocab_size < 4 + num_styles)
        throw std::invalid_argument("ModelConfig: vocab too small for reserved tokens");
}

std::string ModelConfig::to_json() const {
    json j{{"embedding_dim", embedding_dim},
           {"encoder_dim", encoder_dim},
           {"decoder_dim", decoder_dim},
           {"num_layers", num_layers},
           {"dropout_p", dropout_p},
           {"mode", mode == ModelMode::S2S ? "s2s" : "ae"},
           {"use_grl", use_grl},
           {"conditional", conditional},
           {"token_transfer", token_transfer},
           {"grl_lambda", grl.lambda},
           {"adv_weight", adv_weight},
           {"style_embedding_dim", style_embedding_dim},
           {"attention_dim", attention_dim},
           {"num_styles", num_styles},
           {"vocab_size", vocab_size}};
    return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& s) {
    json j = json::parse(s);
    ModelConfig c;
    c.embedding_dim = j.at("embedding_dim");
    c.encoder_dim = j.at("encoder_dim");
    c.decoder_dim = j.at("decoder_dim");
    c.num_layers = j.at("num_layers");
    c.dropout_p = j.at("dropout_p");
    c.mode = j.at("mode") == "s2s" ? ModelMode::S2S : ModelMode::AE;
    c.use_grl = j.at("use_grl");
    c.conditional = j.at("conditional");
    c.token_transfer = j.at("token_transfer");
    c.grl.lambda = j.at("grl_lambda");
    c.adv_weight = j.at("adv_weight");
    c.style_embedding_dim = j.at("style_embedding_dim");
    c.attention_dim = j.at("attention_dim");
    c.num_styles = j.at("num_styles");
    c.vocab_size = j.at("vocab_size");
    return c;
}

namespace {

int half_dim(const ModelConfig& c) { return c.encoder_dim / 2; }
int attn_dim(const ModelConfig& c) {
    return c.attention_dim > 0 ? c.attention_dim : c.decoder_dim;
}
int decoder_input_dim(const ModelConfig& c) {
    return c.embedding_dim + c.encoder_dim +
           (c.conditional ? c.style_embedding_dim : 0);
}

// Parameter shape table. Each parameter is initialized from its own RNG
// stream keyed on (seed, name), so the presence of optional parameters
// (style head, style embeddings, Bahdanau) never shifts the draws of the
// shared ones.
std::vector<std::pair<std::string, std::pair<int, int>>> param_shapes(
    const ModelConfig& c) {
    int h = half_dim(c), H = c.encoder_dim, D = c.embedding_dim, Hd = c.decoder_dim;
    std::vector<std::pair<std::string, std::pair<int, int>>> out;
    out.push_back({"embed", {c.vocab_size, D}});
    for (const char* dir : {"fw", "bw"}) {
        std::string p = std::string("enc_") + dir;
        out.push_back({p + "_Wx", {D, 4 * h}});
        out.push_back({p + "_Wh", {h, 4 * h}});
        out.push_back({p + "_b", {1, 4 * h}});
    }
    out.push_back({"attn_W", {D + H, H}});
    if (c.use_grl) {
        out.push_back({"sty_W1", {H, H}});
        out.push_back({"sty_b1", {1, H}});
        out.push_back({"sty_W2", {H, c.num_styles}});
        out.push_back({"sty_b2", {1, c.num_styles}});
    }
    if (c.conditional) out.push_back({"style_embed", {c.num_styles, c.style_embedding_dim}});
    if (c.token_transfer) {
        int A = attn_dim(c);
        out.push_back({"bah_Ws", {Hd, A}});
        out.push_back({"bah_Wh", {H, A}});
        out.push_back({"bah_v", {A, 1}});
    }
    out.push_back({"dec_Wx", {decoder_input_dim(c), 4 * Hd}});
    out.push_back({"dec_Wh", {Hd, 4 * Hd}});
    out.push_back({"dec_b", {1, 4 * Hd}});
    out.push_back({"out_W", {Hd, c.vocab_size}});
    out.push_back({"out_b", {1, c.vocab_size}});
    return out;
}

void init_param(Mat& m, const std::string& name, std::mt19937_64& rng) {
    if (name.ends_with("_b")) {
        m.setZero();
        // LSTM forget-gate bias starts at 1.
        if (name.find("enc_") == 0 || name.find("dec_") == 0) {
            int hid = static_cast<int>(m.cols()) / 4;
            m.middleCols(hid, hid).setOnes();
        }
        return;
    }
    double a = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    std::uniform_real_distribution<double> u(-a, a);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = u(rng);
}

}  // namespace

Model::Model(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
    cfg_.validate();
    for (const auto& [name, shape] : param_shapes(cfg_)) {
        Mat m(shape.first, shape.second);
        std::mt19937_64 rng(seed ^ (std::hash<std::string>{}(name) | 1));
        init_param(m, name, rng);
        params_.emplace(name, std::move(m));
    }
}

std::map<std::string, Mat> TrainGraph::leaf_gradients() const {
    std::map<std::string, Mat> out;
    for (const auto& [name, v] : params) out.emplace(name, tape->grad(v));
    return out;
}

// Shared graph-building state for one batch.
struct GraphBuilder {
    const Model& model;
    const ModelConfig& cfg;
    ad::Tape& tape;
    bool training;
    std::mt19937_64& rng;
    std::map<std::string, Var>& pvars;

    Var p(const std::string& name) { return pvars.at(name); }

    Var drop(Var x) { return ad::dropout(x, cfg.dropout_p, training, rng); }

    struct LstmState {
        Var h, c;
    };

    // Mask-gated cell update: rows with mask 0 keep the previous state.
    LstmState lstm_step(Var x, const LstmState& prev, const std::string& prefix,
                        int hidden, Var mask_col, Var inv_mask_col) {
        Var gates = ad::add_rowwise(
            ad::add(ad::matmul(x, p(prefix + "_Wx")), ad::matmul(prev.h, p(prefix + "_Wh"))),
            p(prefix + "_b"));
        Var i = ad::sigmoid(ad::cols(gates, 0, hidden));
        Var f = ad::sigmoid(ad::cols(gates, hidden, hidden));
        Var g = ad::tanh_op(ad::cols(gates, 2 * hidden, hidden));
        Var o = ad::sigmoid(ad::cols(gates, 3 * hidden, hidden));
        Var c_new = ad::add(ad::mul(f, prev.c), ad::mul(i, g));
        Var h_new = ad::mul(o, ad::tanh_op(c_new));
        LstmState out;
        out.c = ad::add(ad::mul_colwise(c_new, mask_col), ad::mul_colwise(prev.c, inv_mask_col));
        out.h = ad::add(ad::mul_colwise(h_new, mask_col), ad::mul_colwise(prev.h, inv_mask_col));
        return out;
    }

    struct Encoded {
        std::vector<Var> states;      // per step, B x H
        std::vector<Var> weights;     // per step, B x H
        Var context;                  // B x H
        Mat mask;                     // B x T
    };

    Encoded encode(const std::vector<std::vector<int>>& seqs) {
        int B = static_cast<int>(seqs.size());
        if (B == 0) throw std::invalid_argument("encode: empty batch");
        Eigen::Index T = 0;
        for (const auto& s : seqs) {
            if (s.empty()) throw std::invalid_argument("encode: empty token sequence");
            T = std::max<Eigen::Index>(T, static_cast<Eigen::Index>(s.size()));
        }
        Mat mask = Mat::Zero(B, T);
        std::vector<std::vector<int>> ids(T, std::vector<int>(B, Vocab::kPad));
        for (int b = 0; b < B; ++b)
            for (std::size_t t = 0; t < seqs[b].size(); ++t) {
                ids[t][b] = seqs[b][t];
                mask(b, static_cast<Eigen::Index>(t)) = 1.0;
            }

        std::vector<Var> mcol(T), mcol_inv(T);
        for (Eigen::Index t = 0; t < T; ++t) {
            mcol[t] = tape.constant(mask.col(t));
            mcol_inv[t] = tape.constant(Mat::Ones(B, 1) - mask.col(t));
        }

        std::vector<Var> emb(T), x(T);
        for (Eigen::Index t = 0; t < T; ++t) {
            emb[t] = ad::gather_rows(p("embed"), ids[t]);
            x[t] = drop(emb[t]);
        }

        int h = half_dim(cfg);
        LstmState fw{tape.constant(Mat::Zero(B, h)), tape.constant(Mat::Zero(B, h))};
        std::vector<Var> hf(T);
        for (Eigen::Index t = 0; t < T; ++t) {
            fw = lstm_step(x[t], fw, "enc_fw", h, mcol[t], mcol_inv[t]);
            hf[t] = fw.h;
        }
        LstmState bw{tape.constant(Mat::Zero(B, h)), tape.constant(Mat::Zero(B, h))};
        std::vector<Var> hb(T);
        for (Eigen::Index t = T - 1; t >= 0; --t) {
            bw = lstm_step(x[t], bw, "enc_bw", h, mcol[t], mcol_inv[t]);
            hb[t] = bw.h;
        }

        Encoded enc;
        enc.mask = mask;
        std::vector<Var> scores(T);
        for (Eigen::Index t = 0; t < T; ++t) {
            enc.states.push_back(ad::hcat({hf[t], hb[t]}));
            Var z = ad::hcat({emb[t], enc.states[t]});
            scores[t] = ad::matmul(z, p("attn_W"));
        }

        // Feature-wise softmax over steps. The per-(example, feature) max is
        // subtracted as a constant; the softmax value is invariant to it.
        int H = cfg.encoder_dim;
        Mat mx = Mat::Constant(B, H, -std::numeric_limits<double>::infinity());
        for (Eigen::Index t = 0; t < T; ++t) {
            const Mat& s = tape.value(scores[t]);
            for (int b = 0; b < B; ++b)
                if (mask(b, t) != 0.0)
                    mx.row(b) = mx.row(b).cwiseMax(s.row(b));
        }
        Var mxc = tape.constant(mx);
        std::vector<Var> expd(T);
        Var denom;
        for (Eigen::Index t = 0; t < T; ++t) {
            Var e = ad::exp_op(ad::sub(scores[t], mxc));
            Var mfull = tape.constant(mask.col(t).replicate(1, H));
            expd[t] = ad::mul(e, mfull);
            denom = t == 0 ? expd[t] : ad::add(denom, expd[t]);
        }
        Var context;
        for (Eigen::Index t = 0; t < T; ++t) {
            Var a = ad::cdiv(expd[t], denom);
            enc.weights.push_back(a);
            Var term = ad::mul(a, enc.states[t]);
            context = t == 0 ? term : ad::add(context, term);
        }
        enc.context = context;
        return enc;
    }

    // Additive attention over encoder steps for one decoder step.
    Var bahdanau_context(Var dec_h, const Encoded& enc) {
        Eigen::Index T = static_cast<Eigen::Index>(enc.states.size());
        Var sq = ad::matmul(dec_h, p("bah_Ws"));  // B x A
        std::vector<Var> cols_e;
        for (Eigen::Index t = 0; t < T; ++t) {
            Var u = ad::tanh_op(ad::add(sq, ad::matmul(enc.states[t], p("bah_Wh"))));
            cols_e.push_back(ad::matmul(u, p("bah_v")));  // B x 1
        }
        Var scores = ad::hcat(cols_e);  // B x T
        Var alpha = ad::masked_softmax_rows(scores, enc.mask);
        Var ctx;
        for (Eigen::Index t = 0; t < T; ++t) {
            Var term = ad::mul_colwise(enc.states[t], ad::cols(alpha, t, 1));
            ctx = t == 0 ? term : ad::add(ctx, term);
        }
        return ctx;
    }
};

TrainGraph Model::build_train_graph(const Batch& batch, bool training,
                                    std::mt19937_64& rng) const {
    int B = static_cast<int>(batch.source.size());
    if (B == 0) throw std::invalid_argument("build_train_graph: empty batch");
    if (batch.target.size() != batch.source.size())
        throw std::invalid_argument("build_train_graph: source/target size mismatch");
    if (cfg_.conditional && static_cast<int>(batch.target_style.size()) != B)
        throw std::invalid_argument("build_train_graph: conditional mode needs target styles");
    if (cfg_.use_grl && static_cast<int>(batch.source_style.size()) != B)
        throw std::invalid_argument("build_train_graph: GRL mode needs source styles");

    TrainGraph g;
    g.tape = std::make_unique<ad::Tape>();
    ad::Tape& tape = *g.tape;
    for (const auto& [name, m] : params_) g.params.emplace(name, tape.leaf(m));

    GraphBuilder gb{*this, cfg_, tape, training, rng, g.params};

    std::vector<std::vector<int>> src = batch.source;
    if (cfg_.token_transfer) {
        for (int b = 0; b < B; ++b)
            src[b].insert(src[b].begin(), 4 + batch.target_style.at(b));
    }
    GraphBuilder::Encoded enc = gb.encode(src);
    g.context = enc.context;

    // Teacher-forced decoder: input BOS + target, predict target + EOS.
    Eigen::Index T = 0;
    for (const auto& t : batch.target) {
        if (t.empty()) throw std::invalid_argument("build_train_graph: empty target");
        T = std::max<Eigen::Index>(T, static_cast<Eigen::Index>(t.size()) + 1);
    }
    std::vector<std::vector<int>> in_ids(T, std::vector<int>(B, Vocab::kPad));
    std::vector<std::vector<int>> out_ids(T, std::vector<int>(B, Vocab::kPad));
    std::vector<std::vector<double>> w(T, std::vector<double>(B, 0.0));
    double token_count = 0;
    for (int b = 0; b < B; ++b) {
        const auto& tgt = batch.target[b];
        in_ids[0][b] = Vocab::kBos;
        for (std::size_t t = 0; t < tgt.size(); ++t) {
            if (t + 1 < static_cast<std::size_t>(T)) in_ids[t + 1][b] = tgt[t];
            out_ids[t][b] = tgt[t];
            w[t][b] = 1.0;
        }
        out_ids[tgt.size()][b] = Vocab::kEos;
        w[tgt.size()][b] = 1.0;
        token_count += static_cast<double>(tgt.size()) + 1.0;
    }

    Var style_in;
    if (cfg_.conditional)
        style_in = ad::gather_rows(g.params.at("style_embed"), batch.target_style);

    Var ones = tape.constant(Mat::Ones(B, 1));
    Var zeros_col = tape.constant(Mat::Zero(B, 1));
    GraphBuilder::LstmState dec{tape.constant(Mat::Zero(B, cfg_.decoder_dim)),
                                tape.constant(Mat::Zero(B, cfg_.decoder_dim))};
    std::vector<Var> step_logits;
    for (Eigen::Index t = 0; t < T; ++t) {
        Var emb = gb.drop(ad::gather_rows(g.params.at("embed"), in_ids[t]));
        Var ctx = cfg_.token_transfer ? gb.bahdanau_context(dec.h, enc) : enc.context;
        std::vector<Var> parts{emb, ctx};
        if (cfg_.conditional) parts.push_back(style_in);
        Var x = ad::hcat(parts);
        dec = gb.lstm_step(x, dec, "dec", cfg_.decoder_dim, ones, zeros_col);
        step_logits.push_back(
            ad::add_rowwise(ad::matmul(dec.h, g.params.at("out_W")), g.params.at("out_b")));
    }
    Var all_logits = ad::vcat(step_logits);
    std::vector<int> flat_targets;
    std::vector<double> flat_w;
    for (Eigen::Index t = 0; t < T; ++t)
        for (int b = 0; b < B; ++b) {
            flat_targets.push_back(out_ids[t][b]);
            flat_w.push_back(w[t][b]);
        }
    g.recon_loss_sum = ad::cross_entropy_sum(all_logits, flat_targets, flat_w);
    g.token_count = token_count;
    g.step_logits = tape.value(all_logits);
    g.flat_targets = flat_targets;
    g.flat_weights = flat_w;
    Var loss = ad::scale(g.recon_loss_sum, 1.0 / token_count);

    if (cfg_.use_grl) {
        Var c_adv = cfg_.grl_bypass ? enc.context : ad::grl(enc.context, cfg_.grl.lambda);
        Var hidden = ad::tanh_op(
            ad::add_rowwise(ad::matmul(c_adv, g.params.at("sty_W1")), g.params.at("sty_b1")));
        Var logits = ad::add_rowwise(ad::matmul(hidden, g.params.at("sty_W2")),
                                     g.params.at("sty_b2"));
        std::vector<double> sw(B, 1.0 / B);
        g.style_loss_mean = ad::cross_entropy_sum(logits, batch.source_style, sw);
        g.style_logits = tape.value(logits);
        g.has_style_head = true;
        loss = ad::add(loss, ad::scale(g.style_loss_mean, cfg_.adv_weight));
    }
    g.loss = loss;
    return g;
}

EncoderOutput Model::encode(const std::vector<int>& tokens) const {
    if (tokens.empty()) throw std::invalid_argument("Model::encode: empty sequence");
    ad::Tape tape;
    std::map<std::string, Var> pvars;
    for (const auto& [name, m] : params_) pvars.emplace(name, tape.constant(m));
    std::mt19937_64 rng(0);
    GraphBuilder gb{*this, cfg_, tape, false, rng, pvars};
    GraphBuilder::Encoded enc = gb.encode({tokens});
    Eigen::Index n = static_cast<Eigen::Index>(tokens.size());
    EncoderOutput out;
    out.states.resize(n, cfg_.encoder_dim);
    out.weights.resize(n, cfg_.encoder_dim);
    for (Eigen::Index t = 0; t < n; ++t) {
        out.states.row(t) = tape.value(enc.states[t]).row(0);
        out.weights.row(t) = tape.value(enc.weights[t]).row(0);
    }
    out.context = tape.value(enc.context).row(0);
    return out;
}

RowVec Model::classify_style(const RowVec& context) const {
    if (!cfg_.use_grl)
        throw std::invalid_argument("Model::classify_style: model has no style head");
    require_shape(context, 1, cfg_.encoder_dim, "classify_style: context");
    RowVec h = ((context * params_.at("sty_W1") + params_.at("sty_b1")).array().tanh());
    return h * params_.at("sty_W2") + params_.at("sty_b2");
}

DecoderState Model::initial_decoder_state() const {
    DecoderState s;
    s.h = RowVec::Zero(cfg_.decoder_dim);
    s.c = RowVec::Zero(cfg_.decoder_dim);
    return s;
}

StepResult Model::decode_step(const DecoderState& state, int prev_token,
                              const RowVec& context, const Mat* encoder_states,
                              std::optional<int> style) const {
    if (cfg_.conditional != style.has_value())
        throw std::invalid_argument(
            "Model::decode_step: style id must be given iff the model is conditional");
    if (cfg_.token_transfer && encoder_states == nullptr)
        throw std::invalid_argument("Model::decode_step: TT mode needs encoder states");
    if (prev_token < 0 || prev_token >= cfg_.vocab_size)
        throw std::invalid_argument("Model::decode_step: token id out of range");

    RowVec ctx;
    if (cfg_.token_transfer) {
        const Mat& hs = *encoder_states;
        RowVec sq = state.h * params_.at("bah_Ws");
        Eigen::VectorXd e(hs.rows());
        for (Eigen::Index j = 0; j < hs.rows(); ++j) {
            RowVec u = (sq + hs.row(j) * params_.at("bah_Wh")).array().tanh();
            e(j) = (u * params_.at("bah_v"))(0, 0);
        }
        Eigen::ArrayXd alpha = (e.array() - e.maxCoeff()).exp();
        alpha /= alpha.sum();
        ctx = RowVec::Zero(cfg_.encoder_dim);
        for (Eigen::Index j = 0; j < hs.rows(); ++j) ctx += alpha(j) * hs.row(j);
    } else {
        require_shape(context, 1, cfg_.encoder_dim, "decode_step: context");
        ctx = context;
    }

    RowVec x(decoder_input_dim(cfg_));
    x.segment(0, cfg_.embedding_dim) = params_.at("embed").row(prev_token);
    x.segment(cfg_.embedding_dim, cfg_.encoder_dim) = ctx;
    if (cfg_.conditional) {
        if (*style < 0 || *style >= cfg_.num_styles)
            throw std::invalid_argument("Model::decode_step: style index out of range");
        x.segment(cfg_.embedding_dim + cfg_.encoder_dim, cfg_.style_embedding_dim) =
            params_.at("style_embed").row(*style);
    }

    int Hd = cfg_.decoder_dim;
    RowVec gates = x * params_.at("dec_Wx") + state.h * params_.at("dec_Wh") +
                   params_.at("dec_b");
    auto seg = [&](int k) { return gates.segment(k * Hd, Hd).array(); };
    Eigen::ArrayXd i = 1.0 / (1.0 + (-seg(0)).exp());
    Eigen::ArrayXd f = 1.0 / (1.0 + (-seg(1)).exp());
    Eigen::ArrayXd gg = seg(2).tanh();
    Eigen::ArrayXd o = 1.0 / (1.0 + (-seg(3)).exp());

    StepResult res;
    res.state.c = (f * state.c.transpose().array() + i * gg).matrix().transpose();
    res.state.h = (o * res.state.c.transpose().array().tanh()).matrix().transpose();

    RowVec logits = res.state.h * params_.at("out_W") + params_.at("out_b");
    double mx = logits.maxCoeff();
    double lse = mx + std::log((logits.array() - mx).exp().sum());
    res.log_probs = (logits.array() - lse).matrix();
    return res;
}

void Model::save(const std::string& path, const Adam* optimizer, long epoch,
                 const std::string& rng_state) const {
    TensorBundle b;
    json meta;
    meta["kind"] = "seqmodel";
    meta["model"] = json::parse(cfg_.to_json());
    meta["epoch"] = epoch;
    meta["rng_state"] = rng_state;
    for (const auto& [name, m] : params_) b.tensors.emplace("param." + name, m);
    if (optimizer) {
        const AdamState& s = optimizer->state();
        meta["adam"] = {{"alpha", s.alpha}, {"beta1", s.beta1}, {"beta2", s.beta2},
                        {"eps", s.eps},     {"t", s.t}};
        for (const auto& [name, m] : s.m) b.tensors.emplace("adam_m." + name, m);
        for (const auto& [name, m] : s.v) b.tensors.emplace("adam_v." + name, m);
    }
    b.config_json = meta.dump();
    save_bundle(path, b);
}

LoadedModel Model::load(const std::string& path) {
    TensorBundle b = load_bundle(path);
    json meta = json::parse(b.config_json);
    if (meta.value("kind", "") != "seqmodel")
        throw std::runtime_error("Model::load: '" + path + "' is not a model checkpoint");
    ModelConfig cfg = ModelConfig::from_json(meta.at("model").dump());
    LoadedModel out{Model(cfg, 0)};
    out.epoch = meta.value("epoch", 0L);
    out.rng_state = meta.value("rng_state", "");
    for (auto& [name, m] : out.model.params_) {
        auto it = b.tensors.find("param." + name);
        if (it == b.tensors.end())
            throw std::runtime_error("Model::load: missing tensor 'param." + name + "'");
        if (it->second.rows() != m.rows() || it->second.cols() != m.cols())
            throw std::runtime_error("Model::load: shape mismatch for '" + name + "'");
        m = it->second;
    }
    if (meta.contains("adam")) {
        out.has_adam = true;
        out.adam.alpha = meta["adam"].at("alpha");
        out.adam.beta1 = meta["adam"].at("beta1");
        out.adam.beta2 = meta["adam"].at("beta2");
        out.adam.eps = meta["adam"].at("eps");
        out.adam.t = meta["adam"].at("t");
        for (const auto& [name, m] : b.tensors) {
            if (name.rfind("adam_m.", 0) == 0) out.adam.m[name.substr(7)] = m;
            if (name.rfind("adam_v.", 0) == 0) out.adam.v[name.substr(7)] = m;
        }
    }
    return out;
}

}  // namespace styleobf
