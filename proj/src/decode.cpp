#include "styleobf/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace styleobf {

RowVec apply_noise(const RowVec& context, double mu, std::mt19937_64& rng) {
    if (mu < 0.0) throw std::invalid_argument("apply_noise: mu must be non-negative");
    if (mu == 0.0) return context;
    std::normal_distribution<double> n(0.0, mu);
    RowVec out = context;
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += n(rng);
    return out;
}

namespace {

struct Hyp {
    std::vector<int> tokens;  // generated, EOS excluded
    double logprob = 0.0;
    DecoderState state;
    bool finished = false;
};

double hyp_score(const Hyp& h, bool normalize) {
    // Length counts generated tokens including the terminating EOS.
    double len = static_cast<double>(h.tokens.size()) + (h.finished ? 1.0 : 0.0);
    if (len == 0.0) len = 1.0;
    return normalize ? h.logprob / len : h.logprob;
}

}  // namespace

BeamResult beam_search(const Model& model, const RowVec& context,
                       const Mat* encoder_states, std::optional<int> style,
                       const BeamOptions& opts) {
    if (opts.beam < 1) throw std::invalid_argument("beam_search: beam must be >= 1");
    if (opts.max_len < 1) throw std::invalid_argument("beam_search: max_len must be >= 1");
    int V = model.config().vocab_size;

    std::vector<Hyp> beam{Hyp{{}, 0.0, model.initial_decoder_state(), false}};
    std::vector<Hyp> finished;

    for (int step = 0; step < opts.max_len && !beam.empty(); ++step) {
        std::vector<Hyp> children;
        for (const Hyp& h : beam) {
            int prev = h.tokens.empty() ? Vocab::kBos : h.tokens.back();
            StepResult sr = model.decode_step(h.state, prev, context, encoder_states, style);
            for (int v = 0; v < V; ++v) {
                Hyp n;
                n.logprob = h.logprob + sr.log_probs(v);
                n.state = sr.state;
                n.tokens = h.tokens;
                if (v == Vocab::kEos) {
                    n.finished = true;
                } else {
                    n.tokens.push_back(v);
                }
                children.push_back(std::move(n));
            }
        }
        // Prune by cumulative log-probability; ties broken by insertion order
        // so results are deterministic. A hypothesis only finishes if its EOS
        // child ranks within the beam.
        std::stable_sort(children.begin(), children.end(),
                         [](const Hyp& a, const Hyp& b) { return a.logprob > b.logprob; });
        std::vector<Hyp> next;
        std::size_t keep = std::min<std::size_t>(children.size(),
                                                 static_cast<std::size_t>(opts.beam));
        for (std::size_t i = 0; i < keep; ++i) {
            if (children[i].finished)
                finished.push_back(std::move(children[i]));
            else
                next.push_back(std::move(children[i]));
        }
        beam = std::move(next);
    }

    BeamResult res;
    const std::vector<Hyp>* pool = &finished;
    if (finished.empty()) {
        res.truncated = true;
        pool = &beam;
    }
    const Hyp* best = nullptr;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const Hyp& h : *pool) {
        double s = hyp_score(h, opts.length_normalize);
        if (best == nullptr || s > best_score) {
            best = &h;
            best_score = s;
        }
    }
    res.tokens = best->tokens;
    res.score = best_score;
    return res;
}

ObfuscateResult obfuscate(const Model& model, const Vocab& vocab,
                          const std::vector<std::string>& source_tokens,
                          const ObfuscateOptions& opts, std::mt19937_64& rng) {
    const ModelConfig& cfg = model.config();
    bool wants_style = cfg.token_transfer || cfg.conditional;
    if (wants_style && !opts.target_style)
        throw std::invalid_argument("obfuscate: this model requires a target style");
    if (!wants_style && opts.target_style)
        throw std::invalid_argument("obfuscate: target style given for a plain model");
    if (cfg.token_transfer && opts.noise.mu > 0.0)
        throw std::invalid_argument("obfuscate: context noise does not apply to TT models");
    if (opts.target_style &&
        (*opts.target_style < 0 || *opts.target_style >= cfg.num_styles))
        throw std::invalid_argument("obfuscate: target style out of range");

    std::vector<int> ids = vocab.encode(source_tokens);
    if (cfg.token_transfer)
        ids.insert(ids.begin(), vocab.transfer_token(*opts.target_style));
    EncoderOutput enc = model.encode(ids);
    RowVec context = apply_noise(enc.context, opts.noise.mu, rng);

    BeamOptions bo;
    bo.beam = opts.beam;
    bo.max_len = opts.max_len > 0 ? opts.max_len
                                  : 2 * static_cast<int>(source_tokens.size()) + 5;
    bo.length_normalize = opts.length_normalize;
    std::optional<int> dec_style = cfg.conditional ? opts.target_style : std::nullopt;
    BeamResult br = beam_search(model, context,
                                cfg.token_transfer ? &enc.states : nullptr, dec_style, bo);

    ObfuscateResult out;
    out.truncated = br.truncated;
    out.tokens = vocab.decode(br.tokens);
    out.text = detokenize(out.tokens);
    return out;
}

}  // namespace styleobf
