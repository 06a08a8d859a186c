#include "styleobf/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "styleobf/decode.hpp"
#include "styleobf/embeddings.hpp"
#include "styleobf/metrics.hpp"
#include "styleobf/textdata.hpp"

namespace styleobf {

namespace fs = std::filesystem;
using json = nlohmann::json;

void RunConfig::apply_preset() {
    if (preset == "toy") {
        model.embedding_dim = 32;
        model.encoder_dim = 64;
        model.decoder_dim = 64;
        model.style_embedding_dim = 8;
        model.dropout_p = 0.0;
        train.batch_size = 10;
        train.learning_rate = 0.002;
        train.decay_factor = 0.97;
        train.patience = 5;
        train.max_epochs = 30;
        adversary.dim = 16;
        adversary.buckets = 2000;
        adversary.epochs = 10;
        beam = 5;
    } else if (preset == "paper") {
        model.embedding_dim = 300;
        model.encoder_dim = 1000;
        model.decoder_dim = 1000;
        model.style_embedding_dim = 50;
        model.dropout_p = 0.25;
        train.batch_size = 50;
        train.learning_rate = 0.001;
        train.decay_factor = 0.75;
        train.patience = 3;
        train.max_epochs = 20;
        adversary.dim = 100;
        adversary.buckets = 1000000;
        adversary.epochs = 20;
        adversary.learning_rate = 0.01;
        beam = 5;
    } else {
        throw std::invalid_argument("unknown preset: " + preset);
    }
    train.seed = seed;
    adversary.seed = seed;
}

void RunConfig::validate() const {
    if (preset != "toy" && preset != "paper")
        throw std::invalid_argument("unknown preset: " + preset);
    if (preset == "paper" && corpus_path.empty())
        throw std::invalid_argument("the paper preset needs --config with a corpus path");
    if (!corpus_path.empty() && !fs::exists(corpus_path))
        throw std::invalid_argument("corpus path does not exist: " + corpus_path);
    if (!embeddings_path.empty() && !fs::exists(embeddings_path))
        throw std::invalid_argument("embeddings path does not exist: " + embeddings_path);
    if (out_dir.empty()) throw std::invalid_argument("output directory must be set");
    if (beam < 1) throw std::invalid_argument("beam must be >= 1");
    if (noise_mu < 0) throw std::invalid_argument("noise mu must be >= 0");
    if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
    if (toy_styles < 2 || toy_styles > 5)
        throw std::invalid_argument("toy_styles must be in [2, 5]");
    if (toy_verses < 3 || toy_verses > 500)
        throw std::invalid_argument("toy_verses must be in [3, 500]");
    double frac_sum = split_fractions[0] + split_fractions[1] + split_fractions[2];
    if (std::abs(frac_sum - 1.0) > 1e-9)
        throw std::invalid_argument("split fractions must sum to 1");
    for (double mu : noise_grid)
        if (mu < 0) throw std::invalid_argument("noise grid values must be >= 0");
    train.validate();
    // Model num_styles/vocab_size are filled from data later; validate the rest
    // on a completed copy.
    ModelConfig probe = model;
    if (probe.num_styles == 0) probe.num_styles = 2;
    if (probe.vocab_size == 0) probe.vocab_size = 16;
    probe.validate();
}

std::string RunConfig::to_json() const {
    json j{{"preset", preset},
           {"corpus", corpus_path},
           {"embeddings", embeddings_path},
           {"out", out_dir},
           {"seed", seed},
           {"model", json::parse(model.to_json())},
           {"train",
            {{"batch_size", train.batch_size},
             {"learning_rate", train.learning_rate},
             {"decay_factor", train.decay_factor},
             {"patience", train.patience},
             {"max_epochs", train.max_epochs},
             {"seed", train.seed},
             {"grad_clip_norm", train.grad_clip_norm}}},
           {"adversary", json::parse(adversary.to_json())},
           {"noise_grid", noise_grid},
           {"split", split_fractions},
           {"min_count", min_count},
           {"beam", beam},
           {"noise_mu", noise_mu},
           {"toy_styles", toy_styles},
           {"toy_verses", toy_verses}};
    return j.dump(2);
}

RunConfig RunConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    RunConfig cfg;
    cfg.preset = j.value("preset", cfg.preset);
    cfg.apply_preset();
    cfg.corpus_path = j.value("corpus", cfg.corpus_path);
    cfg.embeddings_path = j.value("embeddings", cfg.embeddings_path);
    cfg.out_dir = j.value("out", cfg.out_dir);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("model")) cfg.model = ModelConfig::from_json(j["model"].dump());
    if (j.contains("train")) {
        const json& t = j["train"];
        cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
        cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
        cfg.train.decay_factor = t.value("decay_factor", cfg.train.decay_factor);
        cfg.train.patience = t.value("patience", cfg.train.patience);
        cfg.train.max_epochs = t.value("max_epochs", cfg.train.max_epochs);
        cfg.train.seed = t.value("seed", cfg.train.seed);
        cfg.train.grad_clip_norm = t.value("grad_clip_norm", cfg.train.grad_clip_norm);
    }
    if (j.contains("adversary"))
        cfg.adversary = AdversaryConfig::from_json(j["adversary"].dump());
    if (j.contains("noise_grid"))
        cfg.noise_grid = j["noise_grid"].get<std::vector<double>>();
    if (j.contains("split")) {
        auto v = j["split"].get<std::vector<double>>();
        if (v.size() != 3) throw std::invalid_argument("split must have 3 fractions");
        cfg.split_fractions = {v[0], v[1], v[2]};
    }
    cfg.min_count = j.value("min_count", cfg.min_count);
    cfg.beam = j.value("beam", cfg.beam);
    cfg.noise_mu = j.value("noise_mu", cfg.noise_mu);
    cfg.toy_styles = j.value("toy_styles", cfg.toy_styles);
    cfg.toy_verses = j.value("toy_verses", cfg.toy_verses);
    return cfg;
}

RunConfig RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::uint64_t RunConfig::config_hash() const { return fnv1a64(to_json()); }

RunPaths run_paths(const std::string& out_dir) {
    auto at = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };
    RunPaths p;
    p.corpus = at("corpus.tsv");
    p.vocab = at("vocab.txt");
    p.manifest = at("manifest.json");
    p.train_pairs = at("train.pairs.tsv");
    p.dev_pairs = at("dev.pairs.tsv");
    p.test_pairs = at("test.pairs.tsv");
    p.model = at("model.bin");
    p.trainlog = at("trainlog.jsonl");
    p.adversary = at("adversary.bin");
    p.outputs = at("outputs.tsv");
    p.report_json = at("report.json");
    p.report_txt = at("report.txt");
    p.sweep_json = at("sweep.json");
    p.matrix_txt = at("matrix.txt");
    p.matrix_json = at("matrix.json");
    return p;
}

namespace {

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << v;
    return os.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Stamp sidecar: an artifact is current when its stamp matches the config
/// hash. Rerunning with an unchanged config becomes a no-op.
bool stamp_current(const std::string& artifact, std::uint64_t hash) {
    std::string stamp = artifact + ".stamp";
    if (!fs::exists(artifact) || !fs::exists(stamp)) return false;
    return read_text(stamp) == hex64(hash);
}

void write_stamp(const std::string& artifact, std::uint64_t hash) {
    write_text(artifact + ".stamp", hex64(hash));
}

void require_artifact(const std::string& path, const std::string& producer) {
    if (!fs::exists(path))
        throw std::invalid_argument("missing artifact " + path + "; run `" + producer +
                                    "` first");
}

void maybe_print_paper_banner(const RunConfig& cfg) {
    if (cfg.preset != "paper") return;
    std::cout << "preset paper: D=" << cfg.model.embedding_dim
              << " H=" << cfg.model.encoder_dim << " batch " << cfg.train.batch_size
              << " LR " << cfg.train.learning_rate << " decay " << cfg.train.decay_factor
              << " dropout " << cfg.model.dropout_p << " patience " << cfg.train.patience
              << " beam " << cfg.beam << " adversary " << cfg.adversary.dim << "-dim/"
              << cfg.adversary.epochs << "-epoch/" << cfg.adversary.buckets << "-bucket\n";
}

struct Prepared {
    StyleTable styles;
    std::vector<VerseRecord> records;
    Vocab vocab;
    DataSplit pairs;  // S2S cross-style pairs
};

/// Read (or synthesize) the corpus, build the vocab, pair and split. Pure
/// function of the config, so train/evaluate can re-derive exactly what
/// prepare serialized.
Prepared derive(const RunConfig& cfg) {
    Prepared p;
    if (!cfg.corpus_path.empty()) {
        p.records = read_corpus_tsv(cfg.corpus_path, p.styles);
    } else {
        RunPaths paths = run_paths(cfg.out_dir);
        if (fs::exists(paths.corpus))
            p.records = read_corpus_tsv(paths.corpus, p.styles);
        else
            p.records = make_toy_corpus(cfg.toy_styles, cfg.toy_verses, cfg.seed, p.styles);
    }
    p.vocab = Vocab::build(p.records, p.styles, cfg.min_count);
    p.pairs = split(make_pairs(p.records, p.styles), cfg.split_fractions, cfg.seed);
    return p;
}

void write_pairs_tsv(const std::string& path, const std::vector<PairExample>& pairs,
                     const StyleTable& styles) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const PairExample& p : pairs)
        out << p.verse_key << '\t' << styles.name(p.source_style) << '\t'
            << styles.name(p.target_style) << '\t' << detokenize(p.source) << '\t'
            << detokenize(p.target) << '\n';
}

/// Training examples for the configured mode: cross-style pairs for S2S,
/// one identity example per record for AE (same verse-key partition).
DataSplit mode_examples(const RunConfig& cfg, const Prepared& p) {
    if (cfg.model.mode == ModelMode::S2S) return p.pairs;
    DataSplit ae = split(make_ae_examples(p.records, p.styles), cfg.split_fractions,
                         cfg.seed);
    return ae;
}

ModelConfig complete_model_config(const RunConfig& cfg, const Prepared& p) {
    ModelConfig mc = cfg.model;
    mc.num_styles = p.styles.size();
    mc.vocab_size = p.vocab.size();
    mc.validate();
    return mc;
}

EmbeddingStore load_embeddings(const RunConfig& cfg, const Vocab& vocab) {
    if (!cfg.embeddings_path.empty()) return EmbeddingStore::load(cfg.embeddings_path);
    std::vector<std::string> tokens;
    for (int i = 0; i < vocab.size(); ++i) tokens.push_back(vocab.token(i));
    return EmbeddingStore::synthetic(tokens, 16, cfg.seed);
}

struct ObfuscatedCorpus {
    std::vector<Sentence> outputs, sources, targets;
    std::vector<int> labels;  // source styles
    bool has_targets = false;
};

ObfuscatedCorpus run_obfuscation(const RunConfig& cfg, const Model& model,
                                 const Vocab& vocab,
                                 const std::vector<PairExample>& pairs, double mu) {
    ObfuscatedCorpus oc;
    oc.has_targets = model.config().mode == ModelMode::S2S;
    bool styled = model.config().conditional || model.config().token_transfer;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const PairExample& p = pairs[i];
        ObfuscateOptions opts;
        opts.beam = cfg.beam;
        opts.noise.mu = mu;
        if (styled) opts.target_style = p.target_style;
        std::mt19937_64 rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)));
        ObfuscateResult res = obfuscate(model, vocab, p.source, opts, rng);
        oc.outputs.push_back(res.tokens);
        oc.sources.push_back(p.source);
        oc.targets.push_back(p.target);
        oc.labels.push_back(p.source_style);
    }
    return oc;
}

json report_to_row(const EvalReport& rep, const std::string& label) {
    json j = json::parse(rep.to_json());
    j["label"] = label;
    return j;
}

}  // namespace

void cmd_prepare(const RunConfig& cfg) {
    cfg.validate();
    maybe_print_paper_banner(cfg);
    fs::create_directories(cfg.out_dir);
    RunPaths paths = run_paths(cfg.out_dir);
    std::uint64_t hash = cfg.config_hash();
    if (stamp_current(paths.manifest, hash)) {
        std::cout << "prepare: up to date\n";
        return;
    }
    Prepared p = derive(cfg);
    if (cfg.corpus_path.empty() && !fs::exists(paths.corpus))
        write_corpus_tsv(paths.corpus, p.records);
    else if (!cfg.corpus_path.empty())
        write_corpus_tsv(paths.corpus, p.records);
    p.vocab.save(paths.vocab);
    write_pairs_tsv(paths.train_pairs, p.pairs.train, p.styles);
    write_pairs_tsv(paths.dev_pairs, p.pairs.dev, p.styles);
    write_pairs_tsv(paths.test_pairs, p.pairs.test, p.styles);

    json manifest{{"seed", cfg.seed},
                  {"config_hash", hex64(hash)},
                  {"styles", p.styles.names()},
                  {"records", p.records.size()},
                  {"vocab_size", p.vocab.size()},
                  {"pairs",
                   {{"train", p.pairs.train.size()},
                    {"dev", p.pairs.dev.size()},
                    {"test", p.pairs.test.size()},
                    {"total",
                     p.pairs.train.size() + p.pairs.dev.size() + p.pairs.test.size()}}}};
    write_text(paths.manifest, manifest.dump(2) + "\n");
    write_stamp(paths.manifest, hash);
    std::cout << "prepare: " << p.records.size() << " records, "
              << manifest["pairs"]["total"] << " pairs, vocab " << p.vocab.size() << "\n";
}

void cmd_train(const RunConfig& cfg) {
    cfg.validate();
    maybe_print_paper_banner(cfg);
    cmd_prepare(cfg);
    RunPaths paths = run_paths(cfg.out_dir);
    std::uint64_t hash = cfg.config_hash();
    if (stamp_current(paths.model, hash)) {
        std::cout << "train: up to date\n";
        return;
    }
    Prepared p = derive(cfg);
    DataSplit data = mode_examples(cfg, p);
    Model model(complete_model_config(cfg, p), cfg.seed);
    TrainLog log = train(model, data.train, data.dev, p.vocab, cfg.train, &std::cout);
    model.save(paths.model, nullptr, log.best_epoch);
    log.write_jsonl(paths.trainlog);
    write_stamp(paths.model, hash);
    std::cout << "train: best epoch " << log.best_epoch << ", dev loss "
              << log.best_dev_loss << (log.diverged ? " (diverged, restored)" : "")
              << "\n";
}

void cmd_train_adversary(const RunConfig& cfg) {
    cfg.validate();
    maybe_print_paper_banner(cfg);
    cmd_prepare(cfg);
    RunPaths paths = run_paths(cfg.out_dir);
    std::uint64_t hash = cfg.config_hash();
    if (stamp_current(paths.adversary, hash)) {
        std::cout << "train-adversary: up to date\n";
        return;
    }
    Prepared p = derive(cfg);
    // One labeled sentence per record, restricted to train-split verse keys.
    std::set<std::string> train_keys, dev_keys;
    for (const PairExample& pr : p.pairs.train) train_keys.insert(pr.verse_key);
    for (const PairExample& pr : p.pairs.dev) dev_keys.insert(pr.verse_key);
    std::vector<Sentence> sents, dev_sents;
    std::vector<int> labels, dev_labels;
    for (const VerseRecord& r : p.records) {
        if (train_keys.count(r.verse_key)) {
            sents.push_back(r.tokens);
            labels.push_back(p.styles.index(r.style));
        } else if (dev_keys.count(r.verse_key)) {
            dev_sents.push_back(r.tokens);
            dev_labels.push_back(p.styles.index(r.style));
        }
    }
    AdversaryConfig ac = cfg.adversary;
    ac.num_classes = p.styles.size();
    AdversaryModel adv = train_adversary(sents, labels, ac);
    adv.save(paths.adversary);
    write_stamp(paths.adversary, hash);
    double train_acc = accuracy(adv, sents, labels);
    std::cout << "train-adversary: train acc " << train_acc;
    if (!dev_sents.empty())
        std::cout << ", dev acc " << accuracy(adv, dev_sents, dev_labels);
    std::cout << "\n";
}

void cmd_obfuscate(const RunConfig& cfg) {
    cfg.validate();
    maybe_print_paper_banner(cfg);
    RunPaths paths = run_paths(cfg.out_dir);
    require_artifact(paths.model, "train");
    std::uint64_t hash = cfg.config_hash();
    if (stamp_current(paths.outputs, hash)) {
        std::cout << "obfuscate: up to date\n";
        return;
    }
    Prepared p = derive(cfg);
    LoadedModel loaded = Model::load(paths.model);
    DataSplit data = mode_examples(cfg, p);
    ObfuscatedCorpus oc =
        run_obfuscation(cfg, loaded.model, p.vocab, data.test, cfg.noise_mu);
    std::ofstream out(paths.outputs, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + paths.outputs);
    for (std::size_t i = 0; i < oc.outputs.size(); ++i)
        out << data.test[i].verse_key << '\t' << p.styles.name(data.test[i].source_style)
            << '\t' << p.styles.name(data.test[i].target_style) << '\t'
            << detokenize(oc.sources[i]) << '\t' << detokenize(oc.outputs[i]) << '\n';
    out.close();
    write_stamp(paths.outputs, hash);
    std::cout << "obfuscate: " << oc.outputs.size() << " sentences -> " << paths.outputs
              << "\n";
}

void cmd_evaluate(const RunConfig& cfg) {
    cfg.validate();
    maybe_print_paper_banner(cfg);
    RunPaths paths = run_paths(cfg.out_dir);
    require_artifact(paths.model, "train");
    require_artifact(paths.adversary, "train-adversary");
    require_artifact(paths.outputs, "obfuscate");
    Prepared p = derive(cfg);
    LoadedModel loaded = Model::load(paths.model);
    AdversaryModel adv = AdversaryModel::load(paths.adversary);
    DataSplit data = mode_examples(cfg, p);

    // Reload outputs so evaluate depends only on the serialized artifact.
    std::vector<Sentence> outputs, sources, targets;
    std::vector<int> labels;
    {
        std::ifstream in(paths.outputs, std::ios::binary);
        std::string line;
        std::size_t idx = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::vector<std::string> cols;
            std::size_t start = 0;
            for (std::size_t t = line.find('\t'); t != std::string::npos;
                 t = line.find('\t', start)) {
                cols.push_back(line.substr(start, t - start));
                start = t + 1;
            }
            cols.push_back(line.substr(start));
            if (cols.size() != 5)
                throw std::runtime_error(paths.outputs + ": malformed line " +
                                         std::to_string(idx + 1));
            outputs.push_back(tokenize(cols[4]));
            sources.push_back(tokenize(cols[3]));
            labels.push_back(p.styles.index(cols[1]));
            if (idx < data.test.size()) targets.push_back(data.test[idx].target);
            ++idx;
        }
    }
    if (outputs.empty()) throw std::runtime_error("no outputs in " + paths.outputs);

    EmbeddingStore store = load_embeddings(cfg, p.vocab);
    bool s2s = loaded.model.config().mode == ModelMode::S2S;
    EvalReport rep = evaluate(outputs, sources, s2s ? &targets : nullptr, adv, labels,
                              store, 1.0 / p.styles.size());
    rep.perplexity = perplexity(loaded.model, data.test, p.vocab, cfg.train.batch_size);

    write_text(paths.report_json, rep.to_json() + "\n");
    std::ostringstream table;
    table << EvalReport::table_header() << "\n" << rep.table_row("model") << "\n";
    write_text(paths.report_txt, table.str());
    std::cout << table.str();
}

void cmd_noise_sweep(const RunConfig& cfg) {
    cfg.validate();
    maybe_print_paper_banner(cfg);
    RunPaths paths = run_paths(cfg.out_dir);
    require_artifact(paths.model, "train");
    require_artifact(paths.adversary, "train-adversary");
    Prepared p = derive(cfg);
    LoadedModel loaded = Model::load(paths.model);
    AdversaryModel adv = AdversaryModel::load(paths.adversary);
    DataSplit data = mode_examples(cfg, p);
    EmbeddingStore store = load_embeddings(cfg, p.vocab);
    bool s2s = loaded.model.config().mode == ModelMode::S2S;

    json rows = json::array();
    std::cout << "    mu" << EvalReport::table_header().substr(6) << "\n";
    for (double mu : cfg.noise_grid) {
        ObfuscatedCorpus oc = run_obfuscation(cfg, loaded.model, p.vocab, data.test, mu);
        EvalReport rep = evaluate(oc.outputs, oc.sources, s2s ? &oc.targets : nullptr,
                                  adv, oc.labels, store, 1.0 / p.styles.size());
        std::ostringstream lbl;
        lbl << mu;
        rows.push_back(report_to_row(rep, lbl.str()));
        std::cout << rep.table_row(lbl.str()) << "\n";
    }
    write_text(paths.sweep_json, rows.dump(2) + "\n");
}

void cmd_matrix(const RunConfig& cfg) {
    cfg.validate();
    maybe_print_paper_banner(cfg);
    fs::create_directories(cfg.out_dir);
    Prepared p = derive(cfg);
    // Pin the synthesized corpus so every cell sees the same data.
    RunPaths top = run_paths(cfg.out_dir);
    if (cfg.corpus_path.empty() && !fs::exists(top.corpus))
        write_corpus_tsv(top.corpus, p.records);

    struct Cell {
        std::string label;
        ModelMode mode;
        bool grl, cond, tt;
    };
    const std::vector<Cell> cells = {{"s2s", ModelMode::S2S, false, false, false},
                                     {"s2s+GRL", ModelMode::S2S, true, false, false},
                                     {"s2s+TT", ModelMode::S2S, false, false, true},
                                     {"AE", ModelMode::AE, false, false, false},
                                     {"AE+GRL", ModelMode::AE, true, false, false},
                                     {"AE+C+GRL", ModelMode::AE, true, true, false}};

    EmbeddingStore store = load_embeddings(cfg, p.vocab);
    double chance = 1.0 / p.styles.size();

    // Shared adversary trained on the raw corpus.
    RunConfig adv_cfg = cfg;
    adv_cfg.corpus_path = top.corpus;
    cmd_train_adversary(adv_cfg);
    AdversaryModel adv = AdversaryModel::load(top.adversary);

    json rows = json::array();
    std::ostringstream table;
    table << EvalReport::table_header() << "\n";

    {  // Source-copy baseline: outputs are the sources themselves.
        std::vector<Sentence> outs;
        std::vector<int> labels;
        for (const PairExample& pr : p.pairs.test) {
            outs.push_back(pr.source);
            labels.push_back(pr.source_style);
        }
        EvalReport rep = evaluate(outs, outs, nullptr, adv, labels, store, chance);
        rows.push_back(report_to_row(rep, "source"));
        table << rep.table_row("source") << "\n";
    }

    std::string sweep_dir;
    for (const Cell& cell : cells) {
        RunConfig cc = cfg;
        cc.corpus_path = top.corpus;
        cc.out_dir = (fs::path(cfg.out_dir) / cell.label).string();
        cc.model.mode = cell.mode;
        cc.model.use_grl = cell.grl;
        cc.model.conditional = cell.cond;
        cc.model.token_transfer = cell.tt;
        std::cout << "[matrix] cell " << cell.label << "\n";
        cmd_train(cc);
        Prepared cp = derive(cc);
        LoadedModel loaded = Model::load(run_paths(cc.out_dir).model);
        DataSplit data = mode_examples(cc, cp);
        ObfuscatedCorpus oc =
            run_obfuscation(cc, loaded.model, cp.vocab, data.test, cc.noise_mu);
        EvalReport rep =
            evaluate(oc.outputs, oc.sources, oc.has_targets ? &oc.targets : nullptr, adv,
                     oc.labels, store, chance);
        rep.perplexity =
            perplexity(loaded.model, data.test, cp.vocab, cc.train.batch_size);
        rows.push_back(report_to_row(rep, cell.label));
        table << rep.table_row(cell.label) << "\n";
        if (cell.label == "AE") sweep_dir = cc.out_dir;
    }
    write_text(top.matrix_json, rows.dump(2) + "\n");
    std::cout << table.str();

    // Noise sweep on the plain AE cell.
    if (!sweep_dir.empty()) {
        RunConfig sc = cfg;
        sc.corpus_path = top.corpus;
        sc.out_dir = sweep_dir;
        sc.model.mode = ModelMode::AE;
        std::cout << "[matrix] noise sweep (AE)\n";
        Prepared cp = derive(sc);
        LoadedModel loaded = Model::load(run_paths(sc.out_dir).model);
        DataSplit data = mode_examples(sc, cp);
        table << "\nnoise sweep (AE)\n";
        table << "    mu" << EvalReport::table_header().substr(6) << "\n";
        for (double mu : sc.noise_grid) {
            ObfuscatedCorpus oc =
                run_obfuscation(sc, loaded.model, cp.vocab, data.test, mu);
            EvalReport rep = evaluate(oc.outputs, oc.sources, nullptr, adv, oc.labels,
                                      store, chance);
            std::ostringstream lbl;
            lbl << mu;
            table << rep.table_row(lbl.str()) << "\n";
        }
    }
    write_text(top.matrix_txt, table.str());
    std::cout << "matrix: wrote " << top.matrix_txt << "\n";
}

}  // namespace styleobf
