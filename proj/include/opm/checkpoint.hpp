#pragma once

#include <string>

#include "json.hpp"
#include "opm/baselines.hpp"
#include "opm/ranker.hpp"

namespace opm {

// Versioned checkpoint: a magic line, a JSON manifest (model type, config,
// vocabulary, shape list, selection metadata), then the raw little-endian
// doubles of every tensor in manifest order. Save/load round-trips bit
// exactly.
struct CheckpointMeta {
    std::string model_type;  // "ranker" | "bow"
    int epoch = 0;
    double tune_ema_at_kmax = 0.0;
    std::string config_hash;
};

void save_ranker_checkpoint(const std::string& path, RankerModel& model, const CheckpointMeta& meta);
void save_bow_checkpoint(const std::string& path, BowModel& model, const CheckpointMeta& meta);

// model type recorded in a checkpoint file without loading the weights
std::string checkpoint_model_type(const std::string& path);

struct LoadedRanker {
    RankerModel model;
    CheckpointMeta meta;
};
struct LoadedBow {
    BowModel model;
    CheckpointMeta meta;
};

LoadedRanker load_ranker_checkpoint(const std::string& path);
LoadedBow load_bow_checkpoint(const std::string& path);

nlohmann::json ranker_config_to_json(const RankerConfig& cfg);
RankerConfig ranker_config_from_json(const nlohmann::json& j);

}  // namespace opm
