#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "styleobf/seqmodel.hpp"
#include "styleobf/textdata.hpp"

namespace styleobf {

struct NoiseSpec {
    double mu = 0.0;  // standard deviation of the Gaussian mask
    std::uint64_t seed = 0;
};

/// c + eps with eps ~ N(0, mu^2) elementwise. mu == 0 returns c unchanged
/// without consuming the rng.
RowVec apply_noise(const RowVec& context, double mu, std::mt19937_64& rng);

struct BeamOptions {
    int beam = 5;
    int max_len = 1;  // generated tokens per hypothesis, EOS included
    bool length_normalize = true;
};

struct BeamResult {
    std::vector<int> tokens;  // generated ids, EOS stripped
    double score = 0;         // normalized (or raw) log-probability
    bool truncated = false;   // no hypothesis finished within max_len
};

/// Deterministic beam search over decode_step. beam == 1 is greedy; the best
/// finished hypothesis under the scoring rule wins.
BeamResult beam_search(const Model& model, const RowVec& context,
                       const Mat* encoder_states, std::optional<int> style,
                       const BeamOptions& opts);

struct ObfuscateOptions {
    int beam = 5;
    NoiseSpec noise;
    std::optional<int> target_style;  // required for C and TT models
    int max_len = 0;  // 0 means 2 * source length + 5
    bool length_normalize = true;
};

struct ObfuscateResult {
    std::vector<std::string> tokens;
    std::string text;
    bool truncated = false;
};

/// encode -> optional context noise -> beam decode -> detokenize.
ObfuscateResult obfuscate(const Model& model, const Vocab& vocab,
                          const std::vector<std::string>& source_tokens,
                          const ObfuscateOptions& opts, std::mt19937_64& rng);

}  // namespace styleobf
