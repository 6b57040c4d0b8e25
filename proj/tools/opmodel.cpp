// opmodel: opponent priority ranking from partial negotiation dialogues.
// Subcommands cover corpus ingestion, data adaptation, training, evaluation,
// per-k prediction, and plain-text report rendering. Every command writes a
// run manifest next to its outputs; --deterministic --seed S reruns are byte
// identical.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "opm/adapt.hpp"
#include "opm/baselines.hpp"
#include "opm/checkpoint.hpp"
#include "opm/corpus_io.hpp"
#include "opm/errors.hpp"
#include "opm/foldplan.hpp"
#include "opm/hashutil.hpp"
#include "opm/manifest.hpp"
#include "opm/metrics.hpp"
#include "opm/synthetic.hpp"
#include "opm/train.hpp"

namespace fs = std::filesystem;
using namespace opm;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool deterministic = false;
    std::string data_dir;
    std::vector<std::string> argv;
};

std::uint64_t resolved_seed(const GlobalOpts& g) {
    if (g.seed_given) return g.seed;
    if (const char* env = std::getenv("PR_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

std::string resolved_data_dir(const GlobalOpts& g) {
    if (!g.data_dir.empty()) return g.data_dir;
    if (const char* env = std::getenv("PR_DATA_DIR")) return env;
    return "";
}

RunManifest make_manifest(const GlobalOpts& g, const std::string& command, nlohmann::json config) {
    RunManifest m;
    m.command = command;
    m.argv = g.argv;
    m.resolved_config = std::move(config);
    m.seed = resolved_seed(g);
    m.deterministic = g.deterministic;
    return m;
}

std::string manifest_path_for(const std::string& output_path) { return output_path + ".manifest.json"; }

void require_readable(const std::string& path) {
    if (!fs::exists(path)) throw ValidationError("input file not found: " + path);
}

// ---- corpus ingest -------------------------------------------------------

int cmd_ingest(const GlobalOpts& g, const std::string& format, const std::string& in_path,
               const std::string& out_path, const std::string& field_map_path, const std::string& mapping_mode) {
    require_readable(in_path);
    FieldMap fm = field_map_path.empty() ? FieldMap::casino_defaults() : FieldMap::from_file(field_map_path);

    std::vector<Instance> instances;
    int skipped = 0;
    if (format == "casino") {
        CasinoLoad load = load_casino(in_path, fm);
        skipped = load.skipped;
        for (const auto& raw : load.dialogues) {
            auto [a, b] = extract_perspectives(raw, IssueSet::standard());
            instances.push_back(std::move(a));
            instances.push_back(std::move(b));
        }
    } else if (format == "dnd") {
        Rng rng(resolved_seed(g));
        IssueMapping mapping = mapping_mode == "random"
                                   ? IssueMapping::random_mapping(dnd_native_issues(), rng)
                                   : IssueMapping::dnd_default();
        for (const auto& raw : load_dnd(in_path)) {
            if (!filter_dnd(raw)) {
                ++skipped;
                continue;
            }
            instances.push_back(remap_dnd(raw, mapping));
        }
    } else if (format == "canonical") {
        instances = read_instances(in_path);
    } else {
        throw ValidationError("unknown ingest format: " + format);
    }
    write_instances(out_path, instances);

    RunManifest m = make_manifest(g, "corpus ingest",
                                  {{"format", format},
                                   {"field_map", field_map_path},
                                   {"mapping", mapping_mode},
                                   {"instances", instances.size()},
                                   {"skipped", skipped}});
    m.add_input(in_path);
    if (!field_map_path.empty()) m.add_input(field_map_path);
    m.outputs = {out_path};
    m.write(manifest_path_for(out_path));

    std::cerr << "ingested " << instances.size() << " instances (" << skipped << " records skipped)\n";
    return 0;
}

int cmd_synth(const GlobalOpts& g, const SynthConfig& cfg, const std::string& out_path) {
    std::vector<Instance> corpus = generate_synthetic(cfg, resolved_seed(g));
    write_instances(out_path, corpus);
    RunManifest m = make_manifest(g, "corpus synth",
                                  {{"count", cfg.count},
                                   {"noise", cfg.noise},
                                   {"offer_reliant_rate", cfg.offer_reliant_rate},
                                   {"min_opp_utterances", cfg.min_opp_utterances},
                                   {"max_opp_utterances", cfg.max_opp_utterances},
                                   {"offers_only", cfg.offers_only},
                                   {"id_prefix", cfg.id_prefix}});
    m.outputs = {out_path};
    m.write(manifest_path_for(out_path));
    std::cerr << "generated " << corpus.size() << " instances\n";
    return 0;
}

// ---- adapt ---------------------------------------------------------------

int cmd_adapt_ca(const GlobalOpts& g, const std::string& in_path, const std::string& out_path) {
    require_readable(in_path);
    auto arg_sets = extract_argument_sets(in_path, FieldMap::casino_defaults());
    if (arg_sets.empty()) throw ValidationError("no argument sets found in " + in_path);
    Rng rng(resolved_seed(g));
    std::vector<Instance> instances;
    for (const auto& args : arg_sets)
        for (auto& inst : build_ca_instances(args, CaTemplate::standard(), rng)) instances.push_back(std::move(inst));
    write_instances(out_path, instances);

    RunManifest m = make_manifest(g, "adapt ca", {{"argument_sets", arg_sets.size()}, {"instances", instances.size()}});
    m.add_input(in_path);
    m.outputs = {out_path};
    m.write(manifest_path_for(out_path));
    std::cerr << "built " << instances.size() << " template instances from " << arg_sets.size() << " argument sets\n";
    return 0;
}

int cmd_adapt_dnd(const GlobalOpts& g, const std::string& in_path, const std::string& out_path,
                  const std::string& mapping_mode) {
    require_readable(in_path);
    Rng rng(resolved_seed(g));
    IssueMapping mapping = mapping_mode == "random" ? IssueMapping::random_mapping(dnd_native_issues(), rng)
                                                    : IssueMapping::dnd_default();
    int kept = 0, dropped = 0;
    std::vector<Instance> instances;
    for (const auto& raw : load_dnd(in_path)) {
        if (!filter_dnd(raw)) {
            ++dropped;
            continue;
        }
        instances.push_back(remap_dnd(raw, mapping));
        ++kept;
    }
    write_instances(out_path, instances);

    nlohmann::json mapping_json;
    for (const auto& [src, tgt] : mapping.pairs) mapping_json[src] = IssueSet::standard().name(tgt);
    RunManifest m = make_manifest(g, "adapt dnd",
                                  {{"mapping_mode", mapping_mode}, {"mapping", mapping_json}, {"kept", kept}, {"dropped", dropped}});
    m.add_input(in_path);
    m.outputs = {out_path};
    m.write(manifest_path_for(out_path));
    std::cerr << "adapted " << kept << " dialogues (" << dropped << " filtered out)\n";
    return 0;
}

// ---- train ---------------------------------------------------------------

struct TrainPaths {
    std::string cd, ca, dnd, syn;
};

DataMix load_mixture(const TrainConfig& cfg, const TrainPaths& paths, RunManifest& manifest) {
    DataMix mix;
    auto load_if = [&](bool use, const std::string& path, std::vector<Instance>& dst, const char* what) {
        if (!use) return;
        if (path.empty()) throw ValidationError(std::string("mixture includes ") + what + " but no input path was given");
        require_readable(path);
        dst = read_instances(path);
        manifest.add_input(path);
    };
    load_if(cfg.use_cd, paths.cd, mix.cd, "cd");
    load_if(cfg.use_ca, paths.ca, mix.ca, "ca");
    load_if(cfg.use_dnd, paths.dnd, mix.dnd, "dnd");
    load_if(cfg.use_syn, paths.syn, mix.syn, "syn");
    return mix;
}

// primary corpus = the sources carrying full labels that tune/eval read from
std::vector<Instance> primary_of(const TrainConfig& cfg, const DataMix& mix) {
    std::vector<Instance> primary;
    if (cfg.use_cd) primary.insert(primary.end(), mix.cd.begin(), mix.cd.end());
    if (cfg.use_syn) primary.insert(primary.end(), mix.syn.begin(), mix.syn.end());
    if (cfg.use_dnd && primary.empty()) primary.insert(primary.end(), mix.dnd.begin(), mix.dnd.end());
    if (primary.empty()) throw ValidationError("train: mixture has no fully labeled primary source");
    return primary;
}

std::vector<Instance> adjuncts_of(const TrainConfig& cfg, const DataMix& mix, const std::vector<Instance>& primary) {
    std::vector<Instance> adjuncts;
    std::set<std::string> primary_ids;
    for (const auto& i : primary) primary_ids.insert(i.id);
    auto add = [&](bool use, const std::vector<Instance>& src) {
        if (!use) return;
        for (const auto& i : src)
            if (!primary_ids.count(i.id)) adjuncts.push_back(i);
    };
    add(cfg.use_ca, mix.ca);
    add(cfg.use_dnd, mix.dnd);
    return adjuncts;
}

nlohmann::json log_to_json(const std::vector<EpochLog>& log) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& e : log)
        j.push_back({{"epoch", e.epoch}, {"mean_loss", e.mean_loss}, {"tune_ema_at_kmax", e.tune_ema_at_kmax}});
    return j;
}

int cmd_train(const GlobalOpts& g, TrainConfig cfg, const TrainPaths& paths, const std::string& out_dir,
              int tune_count, bool do_crossval, int folds, const std::vector<double>& sweep_fractions,
              const std::string& eval_path) {
    fs::create_directories(out_dir);
    RunManifest manifest = make_manifest(g, "train", cfg.to_json());
    DataMix mix = load_mixture(cfg, paths, manifest);
    std::vector<Instance> primary = primary_of(cfg, mix);
    std::vector<Instance> adjuncts = adjuncts_of(cfg, mix, primary);

    nlohmann::json run_json;
    run_json["config_hash"] = cfg.hash();
    run_json["seed"] = cfg.seed;

    if (do_crossval) {
        FoldPlan plan = make_fold_plan(primary, folds, tune_count, cfg.seed);
        CrossValReport report = crossval(cfg, plan, primary, adjuncts);
        std::string report_path = out_dir + "/report.json";
        std::ofstream(report_path) << report.to_json().dump(2) << "\n";
        std::ofstream(out_dir + "/fold_plan.json") << plan.to_json().dump(2) << "\n";
        run_json["mode"] = "crossval";
        run_json["folds"] = folds;
        manifest.outputs = {report_path, out_dir + "/fold_plan.json"};
        std::cerr << "crossval mean ema@" << cfg.metrics.k_max << " = " << report.mean.at_k(cfg.metrics.k_max).ema
                  << " (" << report.stddev.at_k(cfg.metrics.k_max).ema << ")\n";
    } else if (!sweep_fractions.empty()) {
        if (eval_path.empty()) throw ValidationError("train --sweep requires --eval");
        require_readable(eval_path);
        std::vector<Instance> eval_set = read_instances(eval_path);
        manifest.add_input(eval_path);
        FoldPlan plan = make_fold_plan(primary, 1, tune_count, cfg.seed);
        std::vector<Instance> train_set = select_by_dialogues(primary, plan.folds[0].train_ids);
        std::vector<Instance> tune_set = select_by_dialogues(primary, plan.folds[0].tune_ids);
        auto curve = data_fraction_sweep(cfg, sweep_fractions, train_set, tune_set, eval_set, adjuncts);
        nlohmann::json cj = nlohmann::json::array();
        for (const auto& pt : curve) cj.push_back({{"fraction", pt.fraction}, {"ema_at_kmax", pt.ema_at_kmax}});
        std::string sweep_path = out_dir + "/sweep.json";
        std::ofstream(sweep_path) << cj.dump(2) << "\n";
        run_json["mode"] = "sweep";
        manifest.outputs = {sweep_path};
        std::cerr << "sweep finished over " << curve.size() << " fractions\n";
    } else {
        // single run: hold tune_count dialogues out of the primary corpus
        std::vector<std::string> ids = dialogue_ids(primary);
        Rng split_rng(cfg.seed);
        split_rng.shuffle(ids);
        if (static_cast<int>(ids.size()) <= tune_count)
            throw ValidationError("train: not enough dialogues to hold out a tune split");
        std::vector<std::string> tune_ids(ids.begin(), ids.begin() + tune_count);
        std::vector<std::string> train_ids(ids.begin() + tune_count, ids.end());
        std::vector<Instance> tune_set = select_by_dialogues(primary, tune_ids);
        std::vector<Instance> train_set = select_by_dialogues(primary, train_ids);
        train_set.insert(train_set.end(), adjuncts.begin(), adjuncts.end());

        std::string ckpt_path = out_dir + "/best.ckpt";
        if (cfg.model == "bow") {
            BowTrainResult res = train_bow(cfg, train_set, tune_set);
            save_bow_checkpoint(ckpt_path, res.model, res.meta);
            run_json["epochs"] = log_to_json(res.log);
            run_json["best_epoch"] = res.meta.epoch;
            run_json["tune_ema_at_kmax"] = res.meta.tune_ema_at_kmax;
            if (!eval_path.empty()) {
                require_readable(eval_path);
                std::vector<Instance> eval_set = read_instances(eval_path);
                manifest.add_input(eval_path);
                BowPredictor p(res.model);
                std::ofstream(out_dir + "/report.json") << evaluate(eval_set, p, cfg.metrics).to_json().dump(2) << "\n";
                manifest.outputs.push_back(out_dir + "/report.json");
            }
        } else {
            RankerTrainResult res = train_ranker(cfg, train_set, tune_set);
            save_ranker_checkpoint(ckpt_path, res.model, res.meta);
            run_json["epochs"] = log_to_json(res.log);
            run_json["best_epoch"] = res.meta.epoch;
            run_json["tune_ema_at_kmax"] = res.meta.tune_ema_at_kmax;
            if (!eval_path.empty()) {
                require_readable(eval_path);
                std::vector<Instance> eval_set = read_instances(eval_path);
                manifest.add_input(eval_path);
                RankerPredictor p(res.model);
                std::ofstream(out_dir + "/report.json") << evaluate(eval_set, p, cfg.metrics).to_json().dump(2) << "\n";
                manifest.outputs.push_back(out_dir + "/report.json");
            }
        }
        run_json["mode"] = "single";
        manifest.outputs.push_back(ckpt_path);
        std::cerr << "training done; best epoch " << run_json["best_epoch"] << " tune ema "
                  << run_json["tune_ema_at_kmax"] << "\n";
    }

    std::string run_path = out_dir + "/run.json";
    std::ofstream(run_path) << run_json.dump(2) << "\n";
    manifest.outputs.push_back(run_path);
    manifest.write(out_dir + "/manifest.json");
    return 0;
}

// ---- evaluate ------------------------------------------------------------

int cmd_evaluate(const GlobalOpts& g, const std::string& model_kind, const std::string& in_path,
                 const std::string& ckpt_path, const std::string& out_path, const std::string& csv_path,
                 bool with_ca_accuracy, bool with_attention, bool with_integrative) {
    require_readable(in_path);
    std::vector<Instance> instances = read_instances(in_path);
    MetricConfig mcfg;

    LoadedRanker ranker_loaded;
    LoadedBow bow_loaded;
    std::unique_ptr<RankPredictor> predictor;
    if (model_kind == "random") {
        predictor = std::make_unique<RandomPredictor>(3, resolved_seed(g));
    } else if (model_kind == "oracle") {
        predictor = std::make_unique<TemplateOraclePredictor>();
    } else if (model_kind == "ranker") {
        if (ckpt_path.empty()) throw ValidationError("evaluate --model ranker requires --ckpt");
        ranker_loaded = load_ranker_checkpoint(ckpt_path);
        predictor = std::make_unique<RankerPredictor>(ranker_loaded.model);
    } else if (model_kind == "bow") {
        if (ckpt_path.empty()) throw ValidationError("evaluate --model bow requires --ckpt");
        bow_loaded = load_bow_checkpoint(ckpt_path);
        predictor = std::make_unique<BowPredictor>(bow_loaded.model);
    } else {
        throw ValidationError("unknown model kind: " + model_kind);
    }

    nlohmann::json out_json;
    std::vector<Instance> full_label;
    std::vector<Instance> masked;
    for (const auto& inst : instances) (inst.has_full_label() ? full_label : masked).push_back(inst);

    if (!full_label.empty()) {
        MetricReport report = evaluate(instances, *predictor, mcfg);
        out_json = report.to_json();
        if (!csv_path.empty()) {
            std::ofstream csv(csv_path);
            csv << "k,ema,top1,ndcg_raw,ndcg_scaled,n\n";
            for (const auto& pk : report.per_k)
                csv << pk.k << "," << pk.ema << "," << pk.top1 << "," << pk.ndcg_raw << "," << pk.ndcg_scaled << ","
                    << pk.n << "\n";
        }
    } else {
        out_json["model"] = model_kind;
        out_json["instances"] = 0;
        out_json["skipped_masked"] = static_cast<int>(masked.size());
    }

    if (with_ca_accuracy) {
        if (masked.empty()) throw ValidationError("--ca-accuracy: no pair-masked instances in the input");
        ScoreRowFn score_fn;
        if (model_kind == "ranker")
            score_fn = [&](const Instance& inst, int k) { return ranker_loaded.model.score_row_at_k(inst, k); };
        else if (model_kind == "bow")
            score_fn = [&](const Instance& inst, int k) { return bow_loaded.model.score_row_at_k(inst, k); };
        else if (model_kind == "random") {
            Rng rng(resolved_seed(g) + 1);
            auto shared = std::make_shared<Rng>(rng);
            score_fn = [shared](const Instance&, int) {
                return std::vector<double>{shared->uniform01(), shared->uniform01(), shared->uniform01()};
            };
        } else {
            throw ValidationError("--ca-accuracy needs a score-producing model (ranker, bow, or random)");
        }
        out_json["ca_argument_accuracy"] = ca_argument_accuracy(masked, score_fn);
    }

    if (with_attention) {
        if (model_kind != "ranker") throw ValidationError("--attention-mass requires --model ranker");
        out_json["attention_mass"] = attention_mass_report(instances, ranker_loaded.model).to_json();
    }

    if (with_integrative) {
        IntegrativeSplit split = split_by_integrative_potential(full_label);
        nlohmann::json ij;
        ij["skipped"] = split.skipped;
        if (!split.low.empty()) ij["low"] = evaluate(split.low, *predictor, mcfg).to_json();
        if (!split.high.empty()) ij["high"] = evaluate(split.high, *predictor, mcfg).to_json();
        out_json["integrative_potential"] = ij;
    }

    std::ofstream(out_path) << out_json.dump(2) << "\n";

    RunManifest manifest = make_manifest(g, "evaluate",
                                         {{"model", model_kind},
                                          {"ckpt", ckpt_path},
                                          {"ca_accuracy", with_ca_accuracy},
                                          {"attention_mass", with_attention},
                                          {"integrative", with_integrative}});
    manifest.add_input(in_path);
    if (!ckpt_path.empty()) manifest.add_input(ckpt_path);
    manifest.outputs = {out_path};
    if (!csv_path.empty()) manifest.outputs.push_back(csv_path);
    manifest.write(manifest_path_for(out_path));
    return 0;
}

// ---- predict ---------------------------------------------------------------

int cmd_predict(const GlobalOpts& g, const std::string& ckpt_path, const std::string& in_path,
                const std::string& out_path, int k_flag) {
    require_readable(in_path);
    std::vector<Instance> instances = read_instances(in_path);

    std::string kind = checkpoint_model_type(ckpt_path);
    LoadedRanker ranker_loaded;
    LoadedBow bow_loaded;
    std::function<std::vector<double>(const Instance&, int)> score_fn;
    if (kind == "ranker") {
        ranker_loaded = load_ranker_checkpoint(ckpt_path);
        score_fn = [&](const Instance& inst, int k) { return ranker_loaded.model.score_row_at_k(inst, k); };
    } else {
        bow_loaded = load_bow_checkpoint(ckpt_path);
        score_fn = [&](const Instance& inst, int k) { return bow_loaded.model.score_row_at_k(inst, k); };
    }

    std::ofstream out(out_path);
    if (!out) throw ValidationError("output file not writable: " + out_path);
    const IssueSet& issues = IssueSet::standard();
    for (const auto& inst : instances) {
        std::vector<int> ks;
        if (k_flag > 0)
            ks.push_back(k_flag);
        else
            for (int k = 1; k <= 5; ++k) ks.push_back(k);
        for (int k : ks) {
            std::vector<double> row = score_fn(inst, k);
            nlohmann::json j;
            j["id"] = inst.id;
            j["k"] = k;
            j["ranking"] = predict_ranking(row).to_names(issues);
            j["scores"] = row;
            if (k > inst.opponent_utterance_count()) j["clamped"] = true;
            out << j.dump() << "\n";
        }
    }

    RunManifest manifest = make_manifest(g, "predict", {{"ckpt", ckpt_path}, {"k", k_flag}});
    manifest.add_input(in_path);
    manifest.add_input(ckpt_path);
    manifest.outputs = {out_path};
    manifest.write(manifest_path_for(out_path));
    return 0;
}

// ---- report ----------------------------------------------------------------

void print_report_row(std::ostream& os, const std::string& name, const MetricReport& mean,
                      const MetricReport* stddev, int k_max) {
    auto cell = [&](double m, double s) {
        std::ostringstream c;
        c.setf(std::ios::fixed);
        c.precision(2);
        c << m;
        if (stddev) c << " (" << s << ")";
        return c.str();
    };
    const PerKMetrics& at = mean.at_k(k_max);
    const PerKMetrics* sat = stddev ? &stddev->at_k(k_max) : nullptr;
    os << name << "\t" << cell(at.ema, sat ? sat->ema : 0) << "\t" << cell(at.top1, sat ? sat->top1 : 0) << "\t"
       << cell(at.ndcg_scaled, sat ? sat->ndcg_scaled : 0) << "\t" << cell(mean.kp_ema, stddev ? stddev->kp_ema : 0)
       << "\t" << cell(mean.kp_top1, stddev ? stddev->kp_top1 : 0) << "\t"
       << cell(mean.kp_ndcg_scaled, stddev ? stddev->kp_ndcg_scaled : 0) << "\n";
}

int cmd_report(const std::string& in_path, const std::string& csv_path) {
    require_readable(in_path);
    std::ifstream in(in_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(in_path + ": " + std::string(e.what()));
    }

    int k_max = 5;
    std::cout << "model\tEMA@" << k_max << "\tTop-1@" << k_max << "\tNDCG@3@" << k_max
              << "\tkp-EMA\tkp-Top-1\tkp-NDCG@3\n";
    MetricReport mean;
    if (j.contains("folds")) {
        CrossValReport cv;
        mean = MetricReport::from_json(j.at("mean"));
        MetricReport stddev = MetricReport::from_json(j.at("std"));
        print_report_row(std::cout, mean.model.empty() ? "model" : mean.model, mean, &stddev, k_max);
    } else {
        mean = MetricReport::from_json(j);
        print_report_row(std::cout, mean.model.empty() ? "model" : mean.model, mean, nullptr, k_max);
    }

    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        csv << "k,ema,top1,ndcg_raw,ndcg_scaled,n\n";
        for (const auto& pk : mean.per_k)
            csv << pk.k << "," << pk.ema << "," << pk.top1 << "," << pk.ndcg_raw << "," << pk.ndcg_scaled << ","
                << pk.n << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"opponent priority ranking from partial negotiation dialogues"};
    app.require_subcommand(1);

    GlobalOpts g;
    for (int i = 0; i < argc; ++i) g.argv.push_back(argv[i]);
    app.add_option("--seed", g.seed, "global rng seed (overrides PR_SEED)")->each([&](const std::string&) {
        g.seed_given = true;
    });
    app.add_flag("--deterministic", g.deterministic, "byte-reproducible outputs (no timestamps)");
    app.add_option("--data-dir", g.data_dir, "directory with cd/ca/dnd/syn jsonl files (overrides PR_DATA_DIR)");

    // corpus
    auto* corpus = app.add_subcommand("corpus", "ingestion and generation");
    auto* ingest = corpus->add_subcommand("ingest", "normalize raw data into canonical instances");
    std::string ingest_format, ingest_in, ingest_out, ingest_field_map, ingest_mapping = "default";
    ingest->add_option("--format", ingest_format, "casino|dnd|canonical")->required();
    ingest->add_option("--in", ingest_in, "input file")->required();
    ingest->add_option("--out", ingest_out, "output jsonl")->required();
    ingest->add_option("--field-map", ingest_field_map, "json field-map overrides");
    ingest->add_option("--mapping", ingest_mapping, "issue mapping for dnd: default|random");

    auto* synth = corpus->add_subcommand("synth", "generate the templated corpus");
    SynthConfig synth_cfg;
    std::string synth_out;
    synth->add_option("--count", synth_cfg.count, "instances to generate");
    synth->add_option("--noise", synth_cfg.noise, "chance an informative turn becomes small talk");
    synth->add_option("--offer-rate", synth_cfg.offer_reliant_rate, "share of dialogues whose signal is offers only");
    synth->add_option("--min-opp", synth_cfg.min_opp_utterances, "min opponent utterances");
    synth->add_option("--max-opp", synth_cfg.max_opp_utterances, "max opponent utterances");
    synth->add_flag("--offers-only", synth_cfg.offers_only, "reveal the order only through offers");
    synth->add_option("--prefix", synth_cfg.id_prefix, "instance id prefix");
    synth->add_option("--out", synth_out, "output jsonl")->required();

    // adapt
    auto* adapt = app.add_subcommand("adapt", "data adaptations");
    auto* adapt_ca = adapt->add_subcommand("ca", "argument metadata to template dialogues");
    std::string ca_in, ca_out;
    adapt_ca->add_option("--in", ca_in, "argument metadata (chat records or plain sets)")->required();
    adapt_ca->add_option("--out", ca_out, "output jsonl")->required();

    auto* adapt_dnd = adapt->add_subcommand("dnd", "remap the offer-centric corpus onto the target issues");
    std::string dnd_in, dnd_out, dnd_mapping = "default";
    adapt_dnd->add_option("--in", dnd_in, "line-oriented raw file")->required();
    adapt_dnd->add_option("--out", dnd_out, "output jsonl")->required();
    adapt_dnd->add_option("--mapping", dnd_mapping, "default|random");

    // train
    auto* train = app.add_subcommand("train", "train a model (single run, crossval, or fraction sweep)");
    std::string train_model = "ranker", train_config_path, train_out_dir = "runs/latest", train_mix = "cd";
    TrainPaths paths;
    std::string train_eval_path;
    int tune_count = 100, fold_count = 5;
    bool do_crossval = false;
    std::string sweep_csv;
    train->add_option("--model", train_model, "ranker|bow");
    train->add_option("--config", train_config_path, "training config json");
    train->add_option("--mix", train_mix, "comma list of sources: cd,ca,dnd,syn");
    train->add_option("--cd", paths.cd, "cd jsonl (default <data-dir>/cd.jsonl)");
    train->add_option("--ca", paths.ca, "ca jsonl");
    train->add_option("--dnd", paths.dnd, "dnd jsonl");
    train->add_option("--syn", paths.syn, "syn jsonl");
    train->add_option("--eval", train_eval_path, "held-out eval jsonl (writes report.json)");
    train->add_option("--out-dir", train_out_dir, "output directory");
    train->add_option("--tune-count", tune_count, "dialogues held out for checkpoint selection");
    train->add_flag("--crossval", do_crossval, "k-fold cross validation");
    train->add_option("--folds", fold_count, "fold count for --crossval");
    train->add_option("--sweep", sweep_csv, "comma list of primary-data fractions");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "score a model on canonical instances");
    std::string eval_model = "random", eval_in, eval_ckpt, eval_out = "report.json", eval_csv;
    bool eval_ca_acc = false, eval_attention = false, eval_integrative = false;
    eval_cmd->add_option("--model", eval_model, "random|oracle|ranker|bow");
    eval_cmd->add_option("--in", eval_in, "canonical instances jsonl")->required();
    eval_cmd->add_option("--ckpt", eval_ckpt, "checkpoint for ranker/bow");
    eval_cmd->add_option("--out", eval_out, "metric report json");
    eval_cmd->add_option("--csv", eval_csv, "per-k curve csv");
    eval_cmd->add_flag("--ca-accuracy", eval_ca_acc, "pairwise argument accuracy over pair-masked instances");
    eval_cmd->add_flag("--attention-mass", eval_attention, "per-category attention masses (ranker only)");
    eval_cmd->add_flag("--integrative", eval_integrative, "split metrics by scenario alignment");

    // predict
    auto* predict = app.add_subcommand("predict", "per-k rankings as json lines");
    std::string pred_ckpt, pred_in, pred_out = "predictions.jsonl";
    int pred_k = 0;
    predict->add_option("--ckpt", pred_ckpt, "model checkpoint")->required();
    predict->add_option("--in", pred_in, "canonical instances jsonl")->required();
    predict->add_option("--out", pred_out, "output jsonl");
    predict->add_option("--k", pred_k, "single k (default: 1..5)");

    // report
    auto* report = app.add_subcommand("report", "render a metric report as a table");
    std::string report_in, report_csv;
    report->add_option("--in", report_in, "metric report json")->required();
    report->add_option("--csv", report_csv, "per-k curve csv");

    // allow --seed/--deterministic/--data-dir anywhere on the command line
    std::function<void(CLI::App*)> enable_fallthrough = [&](CLI::App* cmd) {
        cmd->fallthrough(true);
        for (CLI::App* sub : cmd->get_subcommands({})) enable_fallthrough(sub);
    };
    for (CLI::App* sub : app.get_subcommands({})) enable_fallthrough(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 1;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(g, ingest_format, ingest_in, ingest_out, ingest_field_map, ingest_mapping);
        if (synth->parsed()) return cmd_synth(g, synth_cfg, synth_out);
        if (adapt_ca->parsed()) return cmd_adapt_ca(g, ca_in, ca_out);
        if (adapt_dnd->parsed()) return cmd_adapt_dnd(g, dnd_in, dnd_out, dnd_mapping);
        if (train->parsed()) {
            TrainConfig cfg;
            if (!train_config_path.empty()) {
                require_readable(train_config_path);
                std::ifstream cf(train_config_path);
                nlohmann::json cj;
                try {
                    cf >> cj;
                } catch (const nlohmann::json::exception& e) {
                    throw ParseError(train_config_path + ": " + std::string(e.what()));
                }
                cfg = TrainConfig::from_json(cj);
            }
            cfg.model = train_model;
            if (cfg.model == "bow" && train_config_path.empty()) cfg.lr = 2e-3;
            if (g.seed_given || std::getenv("PR_SEED")) cfg.seed = resolved_seed(g);
            cfg.use_cd = cfg.use_ca = cfg.use_dnd = cfg.use_syn = false;
            std::stringstream mix_ss(train_mix);
            std::string src;
            while (std::getline(mix_ss, src, ',')) {
                if (src == "cd") cfg.use_cd = true;
                else if (src == "ca") cfg.use_ca = true;
                else if (src == "dnd") cfg.use_dnd = true;
                else if (src == "syn") cfg.use_syn = true;
                else if (!src.empty()) throw ValidationError("unknown mixture source: " + src);
            }
            cfg.validate();
            std::string dir = resolved_data_dir(g);
            auto default_path = [&](std::string& p, const char* name) {
                if (p.empty() && !dir.empty()) p = dir + "/" + name;
            };
            default_path(paths.cd, "cd.jsonl");
            default_path(paths.ca, "ca.jsonl");
            default_path(paths.dnd, "dnd.jsonl");
            default_path(paths.syn, "syn.jsonl");

            std::vector<double> fractions;
            if (!sweep_csv.empty()) {
                std::stringstream fs_ss(sweep_csv);
                std::string tok;
                while (std::getline(fs_ss, tok, ',')) fractions.push_back(std::stod(tok));
            }
            return cmd_train(g, cfg, paths, train_out_dir, tune_count, do_crossval, fold_count, fractions,
                             train_eval_path);
        }
        if (eval_cmd->parsed())
            return cmd_evaluate(g, eval_model, eval_in, eval_ckpt, eval_out, eval_csv, eval_ca_acc, eval_attention,
                                eval_integrative);
        if (predict->parsed()) return cmd_predict(g, pred_ckpt, pred_in, pred_out, pred_k);
        if (report->parsed()) return cmd_report(report_in, report_csv);
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 2;
    }
}
