#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "json.hpp"
#include "opm/dialogue.hpp"
#include "opm/ranker.hpp"
#include "opm/rng.hpp"
#include "opm/synthetic.hpp"

namespace opm {

struct MetricConfig {
    std::vector<double> relevance{5.0, 4.0, 3.0};  // per truth rank, highest first
    int k_max = 5;
    bool exponential_gains = false;

    void validate(int m) const;  // relevance strictly decreasing, length m
};

// 1 iff the whole predicted order matches
double ema(const PriorityOrder& predicted, const PriorityOrder& truth);
// 1 iff the top issue matches
double top1(const PriorityOrder& predicted, const PriorityOrder& truth);
// discounted gain of the predicted order under truth-assigned relevances,
// normalized by the ideal ordering; in (0,1]
double ndcg3(const PriorityOrder& predicted, const PriorityOrder& truth, const MetricConfig& cfg);
// worst-permutation raw value for the configured relevance vector
double ndcg_min(const MetricConfig& cfg);
// min-max rescaling of ndcg3 onto [0,100] over the achievable range
double ndcg3_scaled(const PriorityOrder& predicted, const PriorityOrder& truth, const MetricConfig& cfg);
// weighted mean with linearly larger weights at smaller k; weights sum to 1
double k_penalty(const std::vector<double>& values_by_k, const MetricConfig& cfg);

struct PerKMetrics {
    int k = 0;
    double ema = 0.0;          // percent
    double top1 = 0.0;         // percent
    double ndcg_raw = 0.0;     // 0..1
    double ndcg_scaled = 0.0;  // 0..100
    int n = 0;
};

struct MetricReport {
    std::string model;
    std::vector<PerKMetrics> per_k;
    double kp_ema = 0.0;
    double kp_top1 = 0.0;
    double kp_ndcg_raw = 0.0;
    double kp_ndcg_scaled = 0.0;
    int instances = 0;
    int skipped_masked = 0;  // pair-masked instances excluded from full-order metrics

    const PerKMetrics& at_k(int k) const;
    nlohmann::json to_json() const;
    static MetricReport from_json(const nlohmann::json& j);
};

// fold-aggregated view mirroring a mean (std) results table
struct CrossValReport {
    std::vector<MetricReport> folds;
    MetricReport mean;
    MetricReport stddev;

    nlohmann::json to_json() const;
    static CrossValReport aggregate(std::vector<MetricReport> folds);
};

// Anything that can guess the opponent order from a dialogue prefix.
class RankPredictor {
public:
    virtual ~RankPredictor() = default;
    virtual PriorityOrder predict_at_k(const Instance& inst, int k) = 0;
    // one prediction per k in 1..k_max; default calls predict_at_k per k
    virtual std::vector<PriorityOrder> predict_per_k(const Instance& inst, int k_max);
    virtual std::string name() const = 0;
};

class RankerPredictor : public RankPredictor {
public:
    explicit RankerPredictor(RankerModel& model) : model_(model) {}
    PriorityOrder predict_at_k(const Instance& inst, int k) override { return model_.predict_at_k(inst, k); }
    // single full forward; rows at each opponent position (causally equal to
    // running each prefix separately)
    std::vector<PriorityOrder> predict_per_k(const Instance& inst, int k_max) override;
    std::string name() const override { return "ranker"; }

private:
    RankerModel& model_;
};

class RandomPredictor : public RankPredictor {
public:
    RandomPredictor(int m, std::uint64_t seed) : m_(m), rng_(seed) {}
    PriorityOrder predict_at_k(const Instance&, int) override;
    std::string name() const override { return "random"; }

private:
    int m_;
    Rng rng_;
};

// always answers with the ground truth (for metric plumbing checks)
class LabelPredictor : public RankPredictor {
public:
    PriorityOrder predict_at_k(const Instance& inst, int) override { return inst.label; }
    std::string name() const override { return "label"; }
};

// rule-based reader of the synthetic templates, restricted to the prefix
class TemplateOraclePredictor : public RankPredictor {
public:
    explicit TemplateOraclePredictor(const IssueSet& issues = IssueSet::standard()) : issues_(issues) {}
    PriorityOrder predict_at_k(const Instance& inst, int k) override;
    std::string name() const override { return "oracle"; }

private:
    const IssueSet& issues_;
};

// Per-k metrics for k = 1..k_max plus the k-penalty aggregates. Pair-masked
// instances are excluded (counted in skipped_masked).
MetricReport evaluate(const std::vector<Instance>& instances, RankPredictor& predictor, const MetricConfig& cfg);

// fraction (percent) of single-pair instances whose k=2 score row orders the
// known pair strictly correctly; ties count as wrong
using ScoreRowFn = std::function<std::vector<double>(const Instance&, int k)>;
double ca_argument_accuracy(const std::vector<Instance>& ca_instances, const ScoreRowFn& score_at_k);

struct AttentionMassReport {
    double preference = 0.0;  // mean attention mass received per query
    double offer = 0.0;
    double other = 0.0;
    long queries = 0;
    double max_row_sum_error = 0.0;  // worst |1 - sum of category masses|

    nlohmann::json to_json() const;
};

// final dialogue-encoder layer, attention averaged over heads
AttentionMassReport attention_mass_report(const std::vector<Instance>& instances, RankerModel& model);

struct IntegrativeSplit {
    std::vector<Instance> low;   // aligned orders: kendall distance <= 1
    std::vector<Instance> high;  // complementary orders: distance >= 2
    int skipped = 0;             // no scenario recorded
};

IntegrativeSplit split_by_integrative_potential(const std::vector<Instance>& instances);

}  // namespace opm
