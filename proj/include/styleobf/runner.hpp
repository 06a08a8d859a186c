#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "styleobf/adversary.hpp"
#include "styleobf/seqmodel.hpp"
#include "styleobf/trainer.hpp"

namespace styleobf {

/// One experiment cell: corpus/embedding inputs, model/train/adversary
/// settings, and the noise grid. `preset` rescales the defaults: "toy" is
/// the in-repo small configuration (CI scale), "paper" pins the full-scale
/// hyperparameters.
struct RunConfig {
    std::string preset = "toy";
    std::string corpus_path;      // empty under the toy preset -> synthesized
    std::string embeddings_path;  // empty -> synthetic vectors over the vocab
    std::string out_dir = "out";
    std::uint64_t seed = 1;

    ModelConfig model;
    TrainConfig train;
    AdversaryConfig adversary;

    std::vector<double> noise_grid = {0.0, 0.01, 0.05, 0.10, 0.15, 0.20};
    std::array<double, 3> split_fractions = {0.8, 0.1, 0.1};
    int min_count = 1;
    int beam = 5;
    double noise_mu = 0.0;  // obfuscate-time context noise

    int toy_styles = 2;
    int toy_verses = 60;

    void apply_preset();  // overwrite scale-dependent fields from `preset`
    void validate() const;
    std::string to_json() const;
    static RunConfig from_json(const std::string& j);
    static RunConfig load_file(const std::string& path);
    /// FNV-1a over the canonical JSON form; embedded in every artifact so an
    /// unchanged rerun is a no-op.
    std::uint64_t config_hash() const;
};

/// Artifact locations under cfg.out_dir.
struct RunPaths {
    std::string corpus, vocab, manifest;
    std::string train_pairs, dev_pairs, test_pairs;
    std::string model, trainlog, adversary;
    std::string outputs, report_json, report_txt;
    std::string sweep_json, matrix_txt, matrix_json;
};
RunPaths run_paths(const std::string& out_dir);

/// Commands mirror the CLI subcommands. Validation problems throw
/// std::invalid_argument; execution failures throw std::runtime_error.
void cmd_prepare(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_train_adversary(const RunConfig& cfg);
void cmd_obfuscate(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg);
void cmd_noise_sweep(const RunConfig& cfg);
void cmd_matrix(const RunConfig& cfg);

}  // namespace styleobf
