#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "opm/baselines.hpp"
#include "opm/checkpoint.hpp"
#include "opm/foldplan.hpp"
#include "opm/loss.hpp"
#include "opm/metrics.hpp"
#include "opm/ranker.hpp"

namespace opm {

struct TrainConfig {
    std::string model = "ranker";  // ranker | bow
    double lr = 2e-5;              // 2e-3 is the usual bag-of-words setting
    int epochs = 20;
    int batch = 25;
    std::uint64_t seed = 0;
    std::string precision = "f64";  // all math runs in double
    bool use_cd = true, use_ca = false, use_dnd = false, use_syn = false;
    LossConfig loss;
    RankerConfig ranker;
    BowConfig bow;
    MetricConfig metrics;

    void validate() const;
    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);
    std::string hash() const;
};

struct EpochLog {
    int epoch = 0;
    double mean_loss = 0.0;
    double tune_ema_at_kmax = 0.0;
};

struct RankerTrainResult {
    RankerModel model;  // weights of the selected epoch
    CheckpointMeta meta;
    std::vector<EpochLog> log;
};

struct BowTrainResult {
    BowModel model;
    CheckpointMeta meta;
    std::vector<EpochLog> log;
};

// Epoch loop with per-epoch tune evaluation; returns the epoch maximizing
// tune EMA at k_max (ties keep the earlier epoch). Pair-masked instances
// train but are excluded from tune selection. Train and tune must be
// disjoint at dialogue level.
RankerTrainResult train_ranker(const TrainConfig& cfg, const std::vector<Instance>& train,
                               const std::vector<Instance>& tune);
BowTrainResult train_bow(const TrainConfig& cfg, const std::vector<Instance>& train,
                         const std::vector<Instance>& tune);

// Sources selected by the config's mixture flags, concatenated.
struct DataMix {
    std::vector<Instance> cd, ca, dnd, syn;
};
std::vector<Instance> assemble_mixture(const TrainConfig& cfg, const DataMix& mix);

// Per-fold train/evaluate over the primary corpus; adjunct instances join
// every fold's training set.
CrossValReport crossval(const TrainConfig& cfg, const FoldPlan& plan, const std::vector<Instance>& primary,
                        const std::vector<Instance>& adjuncts);

struct SweepPoint {
    double fraction = 1.0;
    double ema_at_kmax = 0.0;
};

// EMA at k_max per primary-corpus fraction (dialogue-level subsampling,
// deterministic under the config seed); adjuncts are added whole.
std::vector<SweepPoint> data_fraction_sweep(const TrainConfig& cfg, const std::vector<double>& fractions,
                                            const std::vector<Instance>& train_primary,
                                            const std::vector<Instance>& tune, const std::vector<Instance>& eval,
                                            const std::vector<Instance>& adjuncts);

}  // namespace opm
