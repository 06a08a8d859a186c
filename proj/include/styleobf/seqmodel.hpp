#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "styleobf/autodiff.hpp"
#include "styleobf/optim.hpp"
#include "styleobf/tensor.hpp"

namespace styleobf {

struct GrlSpec {
    double lambda = 1.0;
};

enum class ModelMode { S2S, AE };

struct ModelConfig {
    int embedding_dim = 300;   // D
    int encoder_dim = 1000;    // H, both directions concatenated
    int decoder_dim = 1000;
    int num_layers = 1;
    double dropout_p = 0.25;
    ModelMode mode = ModelMode::S2S;
    bool use_grl = false;
    bool conditional = false;     // C: style embedding fed to the decoder
    bool token_transfer = false;  // TT: <2style> token + Bahdanau attention
    GrlSpec grl;
    double adv_weight = 1.0;  // weight of the style loss in the composite loss
    int style_embedding_dim = 50;
    int attention_dim = 0;  // Bahdanau score dim; 0 means decoder_dim
    int num_styles = 0;
    int vocab_size = 0;
    // Test hook: keep the GRL node but make its backward the identity.
    bool grl_bypass = false;

    void validate() const;
    std::string to_json() const;
    static ModelConfig from_json(const std::string& j);
};

/// Token-id batch. Source and target styles are per example; target may be
/// empty for encode-only use.
struct Batch {
    std::vector<std::vector<int>> source;
    std::vector<std::vector<int>> target;
    std::vector<int> source_style;
    std::vector<int> target_style;
};

/// Per-step hidden states, feature-wise attention weights and the pooled
/// context vector for one sequence.
struct EncoderOutput {
    Mat states;   // n x H
    Mat weights;  // n x H, columns sum to 1 over steps
    RowVec context;  // 1 x H
};

/// Tape plus the named graph entry points the trainer and tests need.
/// The tape lives on the heap so the struct stays movable.
struct TrainGraph {
    std::unique_ptr<ad::Tape> tape;
    std::map<std::string, ad::Var> params;  // leaf per model parameter
    ad::Var context;                        // B x H
    ad::Var loss;                           // 1x1 composite objective
    ad::Var recon_loss_sum;                 // 1x1, summed token cross-entropy
    double token_count = 0;
    ad::Var style_loss_mean;  // 1x1; only valid when the style head is active
    Mat style_logits;         // B x num_styles value, empty without style head
    bool has_style_head = false;
    // Flattened teacher-forcing targets (step-major) and the matching logit
    // values, for accuracy bookkeeping outside the tape.
    Mat step_logits;  // (T*B) x vocab
    std::vector<int> flat_targets;
    std::vector<double> flat_weights;

    std::map<std::string, Mat> leaf_gradients() const;
};

struct DecoderState {
    RowVec h, c;
};

struct StepResult {
    RowVec log_probs;  // 1 x vocab
    DecoderState state;
};

struct LoadedModel;

class Model {
public:
    Model(ModelConfig cfg, std::uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    ModelConfig& mutable_config() { return cfg_; }
    std::map<std::string, Mat>& params() { return params_; }
    const std::map<std::string, Mat>& params() const { return params_; }

    /// Teacher-forced composite loss over a batch. Dropout is active only
    /// when training is true; the rng drives dropout masks.
    TrainGraph build_train_graph(const Batch& batch, bool training,
                                 std::mt19937_64& rng) const;

    /// Inference-mode encoder on one sequence (no dropout). In TT mode the
    /// target-style transfer token must already be prepended by the caller.
    EncoderOutput encode(const std::vector<int>& tokens) const;

    /// Style-head logits for a context vector; GRL is the identity forward.
    RowVec classify_style(const RowVec& context) const;

    DecoderState initial_decoder_state() const;

    /// One greedy/beam decoding step. `context` is the attention-pooled
    /// encoder vector (ignored in TT mode); `encoder_states` is required in
    /// TT mode for Bahdanau attention; `style` is required iff conditional.
    StepResult decode_step(const DecoderState& state, int prev_token,
                           const RowVec& context, const Mat* encoder_states,
                           std::optional<int> style) const;

    void save(const std::string& path, const Adam* optimizer = nullptr,
              long epoch = 0, const std::string& rng_state = "") const;
    static LoadedModel load(const std::string& path);

private:
    friend struct GraphBuilder;
    ModelConfig cfg_;
    std::map<std::string, Mat> params_;
};

/// Checkpoint contents: the model plus whatever training state was saved.
struct LoadedModel {
    Model model;
    AdamState adam;
    bool has_adam = false;
    long epoch = 0;
    std::string rng_state;
};

}  // namespace styleobf
