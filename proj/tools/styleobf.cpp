#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "styleobf/runner.hpp"

using styleobf::RunConfig;

namespace {

struct Cli {
    std::string config_path, preset, out_dir, corpus, embeddings, mode;
    std::optional<std::uint64_t> seed;
    std::optional<int> beam, epochs;
    std::optional<double> mu, lambda, adv_weight;
    bool grl = false, cond = false, tt = false;

    /// Config file first, then flags on top (flags win).
    RunConfig resolve() const {
        RunConfig cfg;
        if (!config_path.empty()) cfg = RunConfig::load_file(config_path);
        if (!preset.empty()) {
            cfg.preset = preset;
            cfg.apply_preset();
        } else if (config_path.empty()) {
            cfg.apply_preset();
        }
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!corpus.empty()) cfg.corpus_path = corpus;
        if (!embeddings.empty()) cfg.embeddings_path = embeddings;
        if (seed) {
            cfg.seed = *seed;
            cfg.train.seed = *seed;
            cfg.adversary.seed = *seed;
        }
        if (beam) cfg.beam = *beam;
        if (epochs) cfg.train.max_epochs = *epochs;
        if (mu) cfg.noise_mu = *mu;
        if (mode == "s2s")
            cfg.model.mode = styleobf::ModelMode::S2S;
        else if (mode == "ae")
            cfg.model.mode = styleobf::ModelMode::AE;
        else if (!mode.empty())
            throw std::invalid_argument("unknown mode: " + mode);
        if (grl) cfg.model.use_grl = true;
        if (cond) cfg.model.conditional = true;
        if (tt) cfg.model.token_transfer = true;
        if (lambda) cfg.model.grl.lambda = *lambda;
        if (adv_weight) cfg.model.adv_weight = *adv_weight;
        return cfg;
    }
};

void add_common(CLI::App* cmd, Cli& cli) {
    cmd->add_option("--config", cli.config_path, "JSON config file");
    cmd->add_option("--seed", cli.seed, "Master RNG seed");
    cmd->add_option("--preset", cli.preset, "Scale preset")
        ->check(CLI::IsMember({"toy", "paper"}));
    cmd->add_option("--out", cli.out_dir, "Output directory");
    cmd->add_option("--corpus", cli.corpus, "Corpus TSV path");
    cmd->add_option("--embeddings", cli.embeddings, "Word-embedding text file");
    cmd->add_option("--mode", cli.mode, "Model mode")
        ->check(CLI::IsMember({"s2s", "ae"}));
    cmd->add_flag("--grl", cli.grl, "Adversarial style head with gradient reversal");
    cmd->add_flag("--cond", cli.cond, "Condition the decoder on a style embedding");
    cmd->add_flag("--tt", cli.tt, "Token-transfer mode with per-step attention");
    cmd->add_option("--lambda", cli.lambda, "Gradient-reversal scale");
    cmd->add_option("--adv-weight", cli.adv_weight, "Style-loss weight");
    cmd->add_option("--beam", cli.beam, "Beam width");
    cmd->add_option("--epochs", cli.epochs, "Max training epochs");
    cmd->add_option("--mu", cli.mu, "Context-noise standard deviation");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Style-invariant sequence-to-sequence text obfuscation"};
    app.require_subcommand(1);
    Cli cli;
    void (*fns[])(const RunConfig&) = {
        styleobf::cmd_prepare,        styleobf::cmd_train, styleobf::cmd_train_adversary,
        styleobf::cmd_obfuscate,      styleobf::cmd_evaluate,
        styleobf::cmd_noise_sweep,    styleobf::cmd_matrix};
    const char* names[] = {"prepare",  "train",    "train-adversary", "obfuscate",
                           "evaluate", "noise-sweep", "matrix"};
    const char* descs[] = {"Build vocabulary, pairs and splits",
                           "Train the sequence model",
                           "Train the style classifier",
                           "Rewrite the test split through the model",
                           "Score obfuscated output",
                           "Evaluate across the context-noise grid",
                           "Run the full experiment grid"};
    void (*selected)(const RunConfig&) = nullptr;
    for (int i = 0; i < 7; ++i) {
        CLI::App* cmd = app.add_subcommand(names[i], descs[i]);
        add_common(cmd, cli);
        auto fn = fns[i];
        cmd->callback([&selected, fn] { selected = fn; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        selected(cli.resolve());
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
