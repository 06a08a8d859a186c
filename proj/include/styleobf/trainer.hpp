#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "styleobf/seqmodel.hpp"
#include "styleobf/textdata.hpp"

namespace styleobf {

struct TrainConfig {
    int batch_size = 50;
    double learning_rate = 0.001;
    double decay_factor = 0.75;
    int patience = 3;  // epochs of no dev-loss improvement before stopping
    int max_epochs = 20;
    std::uint64_t seed = 1;
    double grad_clip_norm = 5.0;  // <= 0 disables clipping

    void validate() const;
};

struct EpochLog {
    int epoch = 0;
    double train_loss = 0;
    double dev_loss = 0;
    double dev_ppl = 0;
    double style_accuracy = -1;  // -1 when the model has no style head
    double learning_rate = 0;
};

struct TrainLog {
    std::vector<EpochLog> epochs;
    int best_epoch = 0;
    double best_dev_loss = 0;
    bool diverged = false;

    /// One JSON object per epoch.
    void write_jsonl(std::ostream& os) const;
    void write_jsonl(const std::string& path) const;
};

/// Shuffles pairs under the rng and packs them into size-capped batches of
/// encoded token ids.
std::vector<Batch> make_batches(const std::vector<PairExample>& pairs,
                                const Vocab& vocab, int batch_size,
                                std::mt19937_64& rng);

/// Unshuffled single pass, for evaluation.
std::vector<Batch> make_eval_batches(const std::vector<PairExample>& pairs,
                                     const Vocab& vocab, int batch_size);

struct EvalStats {
    double loss = 0;       // composite objective, mean over examples/tokens
    double recon_ce = 0;   // mean per-token cross-entropy
    double token_accuracy = 0;
    double style_accuracy = -1;
};

EvalStats evaluate_loss(const Model& model, const std::vector<PairExample>& pairs,
                        const Vocab& vocab, int batch_size);

/// Early-stopping bookkeeping: scan dev losses in order and return
/// {stop_epoch, best_epoch}, 1-based. Training stops after the first epoch
/// with `patience` consecutive non-improvements over the best loss;
/// stop_epoch == losses.size() when the budget is never exhausted.
std::pair<int, int> early_stop_point(const std::vector<double>& dev_losses,
                                     int patience);

/// exp(mean per-token cross-entropy), teacher-forced.
double perplexity(const Model& model, const std::vector<PairExample>& pairs,
                  const Vocab& vocab, int batch_size = 50);

/// Trains in place. Stops at max_epochs or when dev loss has not improved
/// for `patience` consecutive epochs; the model is left at the best-dev-loss
/// parameters. On divergence the last good parameters are restored and
/// `diverged` is set.
TrainLog train(Model& model, const std::vector<PairExample>& train_pairs,
               const std::vector<PairExample>& dev_pairs, const Vocab& vocab,
               const TrainConfig& cfg, std::ostream* progress = nullptr);

}  // namespace styleobf
