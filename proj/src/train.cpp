#include "opm/train.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "opm/adam.hpp"
#include "opm/errors.hpp"
#include "opm/hashutil.hpp"

namespace opm {

void TrainConfig::validate() const {
    if (model != "ranker" && model != "bow") throw ValidationError("train config: model must be ranker or bow");
    if (lr <= 0.0) throw ValidationError("train config: lr must be > 0");
    if (epochs < 1) throw ValidationError("train config: epochs must be >= 1");
    if (batch < 1) throw ValidationError("train config: batch must be >= 1");
    if (precision != "f64")
        throw ValidationError("train config: unsupported precision '" + precision + "' (only f64 is built)");
    if (!use_cd && !use_ca && !use_dnd && !use_syn) throw ValidationError("train config: empty data mixture");
    loss.validate();
    ranker.validate();
}

nlohmann::json TrainConfig::to_json() const {
    return {{"model", model},
            {"lr", lr},
            {"epochs", epochs},
            {"batch", batch},
            {"seed", seed},
            {"precision", precision},
            {"mixture", {{"cd", use_cd}, {"ca", use_ca}, {"dnd", use_dnd}, {"syn", use_syn}}},
            {"loss", {{"margin", loss.margin}, {"loss_dropout", loss.loss_dropout}, {"k_max", loss.k_max}}},
            {"ranker", ranker_config_to_json(ranker)},
            {"bow", {{"hidden1", bow.hidden1}, {"hidden2", bow.hidden2}, {"m", bow.m}}},
            {"metrics", {{"relevance", metrics.relevance}, {"k_max", metrics.k_max}, {"exponential_gains", metrics.exponential_gains}}}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig cfg;
    cfg.model = j.value("model", cfg.model);
    cfg.lr = j.value("lr", cfg.model == "bow" ? 2e-3 : 2e-5);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch = j.value("batch", cfg.batch);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.precision = j.value("precision", cfg.precision);
    if (j.contains("mixture")) {
        const auto& m = j["mixture"];
        cfg.use_cd = m.value("cd", cfg.use_cd);
        cfg.use_ca = m.value("ca", cfg.use_ca);
        cfg.use_dnd = m.value("dnd", cfg.use_dnd);
        cfg.use_syn = m.value("syn", cfg.use_syn);
    }
    if (j.contains("loss")) {
        const auto& l = j["loss"];
        cfg.loss.margin = l.value("margin", cfg.loss.margin);
        cfg.loss.loss_dropout = l.value("loss_dropout", cfg.loss.loss_dropout);
        cfg.loss.k_max = l.value("k_max", cfg.loss.k_max);
    }
    if (j.contains("ranker")) cfg.ranker = ranker_config_from_json(j["ranker"]);
    if (j.contains("bow")) {
        const auto& b = j["bow"];
        cfg.bow.hidden1 = b.value("hidden1", cfg.bow.hidden1);
        cfg.bow.hidden2 = b.value("hidden2", cfg.bow.hidden2);
        cfg.bow.m = b.value("m", cfg.bow.m);
    }
    if (j.contains("metrics")) {
        const auto& m = j["metrics"];
        if (m.contains("relevance")) cfg.metrics.relevance = m["relevance"].get<std::vector<double>>();
        cfg.metrics.k_max = m.value("k_max", cfg.metrics.k_max);
        cfg.metrics.exponential_gains = m.value("exponential_gains", cfg.metrics.exponential_gains);
    }
    cfg.validate();
    return cfg;
}

std::string TrainConfig::hash() const { return hex64(fnv1a64(to_json().dump())); }

namespace {

void check_disjoint(const std::vector<Instance>& train, const std::vector<Instance>& tune) {
    std::set<std::string> train_dialogues;
    for (const auto& i : train) train_dialogues.insert(dialogue_id_of(i.id));
    for (const auto& i : tune)
        if (train_dialogues.count(dialogue_id_of(i.id)))
            throw ValidationError("train/tune sets share dialogue '" + dialogue_id_of(i.id) + "'");
}

std::vector<std::string> training_texts(const std::vector<Instance>& train) {
    std::vector<std::string> texts;
    for (const auto& inst : train)
        for (const auto& u : inst.utterances) texts.push_back(u.text);
    return texts;
}

double tune_ema(RankPredictor& predictor, const std::vector<Instance>& tune, const MetricConfig& mcfg) {
    if (tune.empty()) return 0.0;
    MetricReport r = evaluate(tune, predictor, mcfg);
    return r.at_k(mcfg.k_max).ema;
}

// Shared epoch loop: shuffles, accumulates batch gradients of the margin
// loss, steps Adam, evaluates tune EMA, and snapshots the best epoch.
template <typename BuildLossFn, typename SnapshotFn>
std::vector<EpochLog> run_epochs(const TrainConfig& cfg, const std::vector<Instance>& train,
                                 const std::vector<Instance>& tune, std::vector<nn::Param*> params,
                                 RankPredictor& predictor, BuildLossFn&& build_loss, SnapshotFn&& snapshot,
                                 int* best_epoch, double* best_ema) {
    nn::Adam adam(params, nn::AdamConfig{cfg.lr, 0.9, 0.999, 1e-8});
    Rng master(cfg.seed);
    Rng shuffle_rng = master.fork(1);
    Rng dropout_rng = master.fork(2);
    Rng lossdrop_rng = master.fork(3);

    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<EpochLog> log;
    *best_epoch = 0;
    *best_ema = -1.0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        long loss_count = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
            std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
            adam.zero_grad();
            double inv = 1.0 / static_cast<double>(end - start);
            for (std::size_t bi = start; bi < end; ++bi) {
                const Instance& inst = train[order[bi]];
                try {
                    loss_sum += build_loss(inst, dropout_rng, lossdrop_rng, inv);
                } catch (const NumericError& e) {
                    throw NumericError("epoch " + std::to_string(epoch) + ", instance " + inst.id + ": " + e.what());
                }
                ++loss_count;
            }
            adam.step();
        }
        double ema_now = tune_ema(predictor, tune, cfg.metrics);
        log.push_back({epoch, loss_sum / static_cast<double>(loss_count), ema_now});
        // no tune set -> selection is moot, keep the final epoch
        if (tune.empty() || ema_now > *best_ema) {
            *best_ema = ema_now;
            *best_epoch = epoch;
            snapshot();
        }
    }
    return log;
}

}  // namespace

RankerTrainResult train_ranker(const TrainConfig& cfg, const std::vector<Instance>& train,
                               const std::vector<Instance>& tune) {
    cfg.validate();
    if (train.empty()) throw ValidationError("train_ranker: empty training set");
    check_disjoint(train, tune);

    Vocab vocab = Vocab::build(training_texts(train), cfg.ranker.vocab_min_freq);
    Rng init = Rng(cfg.seed).fork(0);
    RankerTrainResult out{RankerModel(cfg.ranker, vocab, init), {}, {}};
    RankerModel& model = out.model;
    auto params = model.params();

    std::vector<nn::Tensor> best;
    auto snapshot = [&] {
        best.clear();
        for (nn::Param* p : params) best.push_back(p->value);
    };
    auto build_loss = [&](const Instance& inst, Rng& drop_rng, Rng& lossdrop_rng, double inv) {
        nn::Tape tape;
        auto scores = model.build_scores(tape, inst.utterances, /*train=*/true, drop_rng);
        auto loss = build_total_loss(tape, scores, inst, cfg.loss, lossdrop_rng);
        double value = tape.val(loss).scalar();
        if (!std::isfinite(value)) throw NumericError("training loss is not finite");
        tape.backward(loss, inv);
        return value;
    };

    RankerPredictor predictor(model);
    int best_epoch = 0;
    double best_ema = 0.0;
    out.log = run_epochs(cfg, train, tune, params, predictor, build_loss, snapshot, &best_epoch, &best_ema);

    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best[i];
    out.meta = {"ranker", best_epoch, best_ema, cfg.hash()};
    return out;
}

BowTrainResult train_bow(const TrainConfig& cfg, const std::vector<Instance>& train,
                         const std::vector<Instance>& tune) {
    cfg.validate();
    if (train.empty()) throw ValidationError("train_bow: empty training set");
    check_disjoint(train, tune);

    BowVocab vocab = BowVocab::build(train, 500);
    Rng init = Rng(cfg.seed).fork(0);
    BowTrainResult out{BowModel(cfg.bow, vocab, init), {}, {}};
    BowModel& model = out.model;
    auto params = model.params();

    std::vector<nn::Tensor> best;
    auto snapshot = [&] {
        best.clear();
        for (nn::Param* p : params) best.push_back(p->value);
    };
    // one forward per supervised k; the score matrix rows line up with the
    // opponent positions the loss reads
    auto build_loss = [&](const Instance& inst, Rng&, Rng& lossdrop_rng, double inv) {
        nn::Tape tape;
        int n_opp = inst.opponent_utterance_count();
        std::vector<nn::Tape::NodeId> row_by_position(inst.utterances.size(), -1);
        for (int k = 1; k <= std::min(n_opp, cfg.loss.k_max); ++k) {
            PartialDialogue pv = partial_view(inst, k);
            row_by_position[static_cast<std::size_t>(pv.last_position())] =
                model.build_scores(tape, bow_features(pv.utterances, model.bow_vocab()));
        }
        std::vector<nn::Tape::NodeId> stacked;
        for (std::size_t pos = 0; pos < inst.utterances.size(); ++pos)
            stacked.push_back(row_by_position[pos] >= 0 ? row_by_position[pos]
                                                        : tape.input(nn::Tensor(1, cfg.bow.m)));
        auto scores = tape.stack_rows(stacked);
        auto loss = build_total_loss(tape, scores, inst, cfg.loss, lossdrop_rng);
        double value = tape.val(loss).scalar();
        if (!std::isfinite(value)) throw NumericError("training loss is not finite");
        tape.backward(loss, inv);
        return value;
    };

    BowPredictor predictor(model);
    int best_epoch = 0;
    double best_ema = 0.0;
    out.log = run_epochs(cfg, train, tune, params, predictor, build_loss, snapshot, &best_epoch, &best_ema);

    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best[i];
    out.meta = {"bow", best_epoch, best_ema, cfg.hash()};
    return out;
}

std::vector<Instance> assemble_mixture(const TrainConfig& cfg, const DataMix& mix) {
    std::vector<Instance> out;
    if (cfg.use_cd) out.insert(out.end(), mix.cd.begin(), mix.cd.end());
    if (cfg.use_ca) out.insert(out.end(), mix.ca.begin(), mix.ca.end());
    if (cfg.use_dnd) out.insert(out.end(), mix.dnd.begin(), mix.dnd.end());
    if (cfg.use_syn) out.insert(out.end(), mix.syn.begin(), mix.syn.end());
    if (out.empty()) throw ValidationError("assemble_mixture: selected sources are all empty");
    return out;
}

CrossValReport crossval(const TrainConfig& cfg, const FoldPlan& plan, const std::vector<Instance>& primary,
                        const std::vector<Instance>& adjuncts) {
    plan.validate();
    std::vector<MetricReport> reports;
    for (const auto& fold : plan.folds) {
        std::vector<Instance> train = select_by_dialogues(primary, fold.train_ids);
        train.insert(train.end(), adjuncts.begin(), adjuncts.end());
        std::vector<Instance> tune = select_by_dialogues(primary, fold.tune_ids);
        std::vector<Instance> eval_set = select_by_dialogues(primary, fold.eval_ids);

        if (cfg.model == "bow") {
            BowTrainResult r = train_bow(cfg, train, tune);
            BowPredictor p(r.model);
            reports.push_back(evaluate(eval_set, p, cfg.metrics));
        } else {
            RankerTrainResult r = train_ranker(cfg, train, tune);
            RankerPredictor p(r.model);
            reports.push_back(evaluate(eval_set, p, cfg.metrics));
        }
    }
    return CrossValReport::aggregate(std::move(reports));
}

std::vector<SweepPoint> data_fraction_sweep(const TrainConfig& cfg, const std::vector<double>& fractions,
                                            const std::vector<Instance>& train_primary,
                                            const std::vector<Instance>& tune, const std::vector<Instance>& eval,
                                            const std::vector<Instance>& adjuncts) {
    std::vector<std::string> ids = dialogue_ids(train_primary);
    Rng rng(cfg.seed);
    rng.shuffle(ids);

    std::vector<SweepPoint> out;
    for (double f : fractions) {
        if (f <= 0.0 || f > 1.0) throw ValidationError("data_fraction_sweep: fractions must be in (0,1]");
        std::size_t keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(f * static_cast<double>(ids.size()))));
        std::vector<std::string> subset(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(std::min(keep, ids.size())));
        std::vector<Instance> train = select_by_dialogues(train_primary, subset);
        train.insert(train.end(), adjuncts.begin(), adjuncts.end());

        double ema_val = 0.0;
        if (cfg.model == "bow") {
            BowTrainResult r = train_bow(cfg, train, tune);
            BowPredictor p(r.model);
            ema_val = evaluate(eval, p, cfg.metrics).at_k(cfg.metrics.k_max).ema;
        } else {
            RankerTrainResult r = train_ranker(cfg, train, tune);
            RankerPredictor p(r.model);
            ema_val = evaluate(eval, p, cfg.metrics).at_k(cfg.metrics.k_max).ema;
        }
        out.push_back({f, ema_val});
    }
    return out;
}

}  // namespace opm
