#include "opm/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "opm/adapt.hpp"
#include "opm/errors.hpp"

namespace opm {

void MetricConfig::validate(int m) const {
    if (static_cast<int>(relevance.size()) != m)
        throw ValidationError("metric config: relevance vector length " + std::to_string(relevance.size()) +
                              " != issue count " + std::to_string(m));
    for (std::size_t i = 1; i < relevance.size(); ++i)
        if (relevance[i] >= relevance[i - 1])
            throw ValidationError("metric config: relevance values must be strictly decreasing");
    if (k_max < 1) throw ValidationError("metric config: k_max must be >= 1");
}

namespace {

void check_same_set(const PriorityOrder& a, const PriorityOrder& b) {
    int m = a.size();
    if (b.size() != m || !a.is_permutation_of(m) || !b.is_permutation_of(m))
        throw ValidationError("metric: orders are not permutations of the same issue set");
}

double gain(double rel, bool exponential) { return exponential ? std::exp2(rel) - 1.0 : rel; }

double dcg(const std::vector<double>& rels_in_position_order, bool exponential) {
    double out = 0.0;
    for (std::size_t i = 0; i < rels_in_position_order.size(); ++i)
        out += gain(rels_in_position_order[i], exponential) / std::log2(static_cast<double>(i) + 2.0);
    return out;
}

}  // namespace

double ema(const PriorityOrder& predicted, const PriorityOrder& truth) {
    check_same_set(predicted, truth);
    return predicted == truth ? 1.0 : 0.0;
}

double top1(const PriorityOrder& predicted, const PriorityOrder& truth) {
    check_same_set(predicted, truth);
    return predicted.top() == truth.top() ? 1.0 : 0.0;
}

double ndcg3(const PriorityOrder& predicted, const PriorityOrder& truth, const MetricConfig& cfg) {
    check_same_set(predicted, truth);
    int m = predicted.size();
    cfg.validate(m);
    std::vector<double> rels;
    rels.reserve(static_cast<std::size_t>(m));
    for (int pos = 0; pos < m; ++pos)
        rels.push_back(cfg.relevance[static_cast<std::size_t>(truth.rank_of(predicted.at(pos)))]);
    double ideal = dcg(cfg.relevance, cfg.exponential_gains);
    return dcg(rels, cfg.exponential_gains) / ideal;
}

double ndcg_min(const MetricConfig& cfg) {
    // gains ascending against the decreasing discounts minimizes the sum
    std::vector<double> worst(cfg.relevance.rbegin(), cfg.relevance.rend());
    return dcg(worst, cfg.exponential_gains) / dcg(cfg.relevance, cfg.exponential_gains);
}

double ndcg3_scaled(const PriorityOrder& predicted, const PriorityOrder& truth, const MetricConfig& cfg) {
    double lo = ndcg_min(cfg);
    return 100.0 * (ndcg3(predicted, truth, cfg) - lo) / (1.0 - lo);
}

double k_penalty(const std::vector<double>& values_by_k, const MetricConfig& cfg) {
    if (static_cast<int>(values_by_k.size()) != cfg.k_max)
        throw ValidationError("k_penalty: expected " + std::to_string(cfg.k_max) + " values, got " +
                              std::to_string(values_by_k.size()));
    double wsum = 0.0;
    for (int k = 1; k <= cfg.k_max; ++k) wsum += static_cast<double>(cfg.k_max + 1 - k);
    double out = 0.0;
    for (int k = 1; k <= cfg.k_max; ++k)
        out += values_by_k[static_cast<std::size_t>(k - 1)] * static_cast<double>(cfg.k_max + 1 - k) / wsum;
    return out;
}

const PerKMetrics& MetricReport::at_k(int k) const {
    for (const auto& p : per_k)
        if (p.k == k) return p;
    throw ValidationError("metric report: no entry for k=" + std::to_string(k));
}

nlohmann::json MetricReport::to_json() const {
    nlohmann::json j;
    j["model"] = model;
    j["instances"] = instances;
    j["skipped_masked"] = skipped_masked;
    j["per_k"] = nlohmann::json::array();
    for (const auto& p : per_k)
        j["per_k"].push_back({{"k", p.k},
                              {"ema", p.ema},
                              {"top1", p.top1},
                              {"ndcg_raw", p.ndcg_raw},
                              {"ndcg_scaled", p.ndcg_scaled},
                              {"n", p.n}});
    j["k_penalty"] = {{"ema", kp_ema}, {"top1", kp_top1}, {"ndcg_raw", kp_ndcg_raw}, {"ndcg_scaled", kp_ndcg_scaled}};
    return j;
}

MetricReport MetricReport::from_json(const nlohmann::json& j) {
    MetricReport r;
    r.model = j.value("model", "");
    r.instances = j.at("instances").get<int>();
    r.skipped_masked = j.value("skipped_masked", 0);
    for (const auto& p : j.at("per_k"))
        r.per_k.push_back({p.at("k").get<int>(), p.at("ema").get<double>(), p.at("top1").get<double>(),
                           p.at("ndcg_raw").get<double>(), p.at("ndcg_scaled").get<double>(), p.at("n").get<int>()});
    r.kp_ema = j.at("k_penalty").at("ema").get<double>();
    r.kp_top1 = j.at("k_penalty").at("top1").get<double>();
    r.kp_ndcg_raw = j.at("k_penalty").at("ndcg_raw").get<double>();
    r.kp_ndcg_scaled = j.at("k_penalty").at("ndcg_scaled").get<double>();
    return r;
}

nlohmann::json CrossValReport::to_json() const {
    nlohmann::json j;
    j["folds"] = nlohmann::json::array();
    for (const auto& f : folds) j["folds"].push_back(f.to_json());
    j["mean"] = mean.to_json();
    j["std"] = stddev.to_json();
    return j;
}

CrossValReport CrossValReport::aggregate(std::vector<MetricReport> fold_reports) {
    if (fold_reports.empty()) throw ValidationError("aggregate: no fold reports");
    CrossValReport out;
    out.folds = std::move(fold_reports);
    const auto& first = out.folds.front();
    double n = static_cast<double>(out.folds.size());

    auto agg = [&](auto getter) {
        double mu = 0.0;
        for (const auto& f : out.folds) mu += getter(f);
        mu /= n;
        double var = 0.0;
        for (const auto& f : out.folds) var += (getter(f) - mu) * (getter(f) - mu);
        return std::pair<double, double>(mu, std::sqrt(var / n));
    };

    out.mean.model = first.model;
    out.stddev.model = first.model;
    for (std::size_t i = 0; i < first.per_k.size(); ++i) {
        PerKMetrics m{}, s{};
        m.k = s.k = first.per_k[i].k;
        std::tie(m.ema, s.ema) = agg([&](const MetricReport& f) { return f.per_k[i].ema; });
        std::tie(m.top1, s.top1) = agg([&](const MetricReport& f) { return f.per_k[i].top1; });
        std::tie(m.ndcg_raw, s.ndcg_raw) = agg([&](const MetricReport& f) { return f.per_k[i].ndcg_raw; });
        std::tie(m.ndcg_scaled, s.ndcg_scaled) = agg([&](const MetricReport& f) { return f.per_k[i].ndcg_scaled; });
        m.n = first.per_k[i].n;
        out.mean.per_k.push_back(m);
        out.stddev.per_k.push_back(s);
    }
    std::tie(out.mean.kp_ema, out.stddev.kp_ema) = agg([](const MetricReport& f) { return f.kp_ema; });
    std::tie(out.mean.kp_top1, out.stddev.kp_top1) = agg([](const MetricReport& f) { return f.kp_top1; });
    std::tie(out.mean.kp_ndcg_raw, out.stddev.kp_ndcg_raw) = agg([](const MetricReport& f) { return f.kp_ndcg_raw; });
    std::tie(out.mean.kp_ndcg_scaled, out.stddev.kp_ndcg_scaled) =
        agg([](const MetricReport& f) { return f.kp_ndcg_scaled; });
    for (const auto& f : out.folds) out.mean.instances += f.instances;
    return out;
}

std::vector<PriorityOrder> RankPredictor::predict_per_k(const Instance& inst, int k_max) {
    std::vector<PriorityOrder> out;
    out.reserve(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) out.push_back(predict_at_k(inst, k));
    return out;
}

std::vector<PriorityOrder> RankerPredictor::predict_per_k(const Instance& inst, int k_max) {
    nn::Tensor scores = model_.score_matrix(inst.utterances);
    int m = model_.config().m;
    int available = inst.opponent_utterance_count();
    std::vector<PriorityOrder> out;
    out.reserve(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) {
        int row = inst.opponent_position(std::min(k, available));
        std::vector<double> srow(static_cast<std::size_t>(m));
        for (int q = 0; q < m; ++q) srow[static_cast<std::size_t>(q)] = scores.at(row, q);
        out.push_back(predict_ranking(srow));
    }
    return out;
}

PriorityOrder RandomPredictor::predict_at_k(const Instance&, int) {
    std::vector<int> order(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) order[static_cast<std::size_t>(i)] = i;
    rng_.shuffle(order);
    return PriorityOrder(std::move(order));
}

PriorityOrder TemplateOraclePredictor::predict_at_k(const Instance& inst, int k) {
    PartialDialogue pv = partial_view(inst, k);
    auto guess = synthetic_oracle(pv.utterances, issues_);
    if (guess) return *guess;
    std::vector<int> canonical(static_cast<std::size_t>(issues_.size()));
    for (int i = 0; i < issues_.size(); ++i) canonical[static_cast<std::size_t>(i)] = i;
    return PriorityOrder(std::move(canonical));
}

MetricReport evaluate(const std::vector<Instance>& instances, RankPredictor& predictor, const MetricConfig& cfg) {
    if (instances.empty()) throw ValidationError("evaluate: empty instance list");
    MetricReport report;
    report.model = predictor.name();

    std::vector<PerKMetrics> acc(static_cast<std::size_t>(cfg.k_max));
    for (int k = 1; k <= cfg.k_max; ++k) acc[static_cast<std::size_t>(k - 1)].k = k;

    for (const auto& inst : instances) {
        if (!inst.has_full_label()) {
            ++report.skipped_masked;
            continue;
        }
        cfg.validate(inst.label.size());
        std::vector<PriorityOrder> preds = predictor.predict_per_k(inst, cfg.k_max);
        for (int k = 1; k <= cfg.k_max; ++k) {
            auto& a = acc[static_cast<std::size_t>(k - 1)];
            const PriorityOrder& p = preds[static_cast<std::size_t>(k - 1)];
            a.ema += ema(p, inst.label);
            a.top1 += top1(p, inst.label);
            a.ndcg_raw += ndcg3(p, inst.label, cfg);
            a.ndcg_scaled += ndcg3_scaled(p, inst.label, cfg);
            a.n += 1;
        }
        ++report.instances;
    }
    if (report.instances == 0) throw ValidationError("evaluate: no fully labeled instances");

    std::vector<double> ema_k, top1_k, raw_k, scaled_k;
    for (auto& a : acc) {
        double n = static_cast<double>(a.n);
        a.ema = 100.0 * a.ema / n;
        a.top1 = 100.0 * a.top1 / n;
        a.ndcg_raw /= n;
        a.ndcg_scaled /= n;
        ema_k.push_back(a.ema);
        top1_k.push_back(a.top1);
        raw_k.push_back(a.ndcg_raw);
        scaled_k.push_back(a.ndcg_scaled);
        report.per_k.push_back(a);
    }
    report.kp_ema = k_penalty(ema_k, cfg);
    report.kp_top1 = k_penalty(top1_k, cfg);
    report.kp_ndcg_raw = k_penalty(raw_k, cfg);
    report.kp_ndcg_scaled = k_penalty(scaled_k, cfg);
    return report;
}

double ca_argument_accuracy(const std::vector<Instance>& ca_instances, const ScoreRowFn& score_at_k) {
    if (ca_instances.empty()) throw ValidationError("ca_argument_accuracy: empty instance list");
    long correct = 0, total = 0;
    for (const auto& inst : ca_instances) {
        if (!inst.pair_mask || inst.pair_mask->size() != 1)
            throw ValidationError("ca_argument_accuracy: instance " + inst.id + " must carry exactly one masked pair");
        auto [hi, lo] = inst.pair_mask->front();
        std::vector<double> row = score_at_k(inst, 2);
        if (row[static_cast<std::size_t>(hi)] > row[static_cast<std::size_t>(lo)]) ++correct;
        ++total;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

nlohmann::json AttentionMassReport::to_json() const {
    return {{"preference", preference},
            {"offer", offer},
            {"other", other},
            {"queries", queries},
            {"max_row_sum_error", max_row_sum_error}};
}

AttentionMassReport attention_mass_report(const std::vector<Instance>& instances, RankerModel& model) {
    AttentionMassReport out;
    double sum_pref = 0.0, sum_offer = 0.0, sum_other = 0.0;
    for (const auto& inst : instances) {
        nn::AttentionCapture probe;
        (void)model.score_matrix(inst.utterances, &probe);
        if (probe.layer_attention.empty()) continue;
        const nn::Tensor& attn = probe.layer_attention.back();  // final dialogue-encoder layer

        std::vector<UtteranceCategory> cats;
        cats.reserve(inst.utterances.size());
        for (const auto& u : inst.utterances) cats.push_back(tag_utterance_category(u));

        for (int q = 0; q < attn.rows; ++q) {
            double mp = 0.0, mo = 0.0, mx = 0.0;
            for (int j = 0; j < attn.cols; ++j) {
                switch (cats[static_cast<std::size_t>(j)]) {
                    case UtteranceCategory::Preference: mp += attn.at(q, j); break;
                    case UtteranceCategory::Offer: mo += attn.at(q, j); break;
                    case UtteranceCategory::Other: mx += attn.at(q, j); break;
                }
            }
            sum_pref += mp;
            sum_offer += mo;
            sum_other += mx;
            out.max_row_sum_error = std::max(out.max_row_sum_error, std::fabs(1.0 - (mp + mo + mx)));
            ++out.queries;
        }
    }
    if (out.queries == 0) throw ValidationError("attention_mass_report: no attention rows captured");
    out.preference = sum_pref / static_cast<double>(out.queries);
    out.offer = sum_offer / static_cast<double>(out.queries);
    out.other = sum_other / static_cast<double>(out.queries);
    return out;
}

IntegrativeSplit split_by_integrative_potential(const std::vector<Instance>& instances) {
    IntegrativeSplit out;
    for (const auto& inst : instances) {
        if (!inst.scenario) {
            ++out.skipped;
            continue;
        }
        int d = kendall_distance(inst.scenario->self_order, inst.scenario->opp_order);
        if (d <= 1)
            out.low.push_back(inst);
        else
            out.high.push_back(inst);
    }
    return out;
}

}  // namespace opm
