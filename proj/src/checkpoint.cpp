#include "opm/checkpoint.hpp"

#include <fstream>

#include "opm/errors.hpp"

namespace opm {

namespace {

constexpr const char* kMagic = "OPMCKPT1";

void write_params(const std::vector<nn::Param*>& params, nlohmann::json& header) {
    header["params"] = nlohmann::json::array();
    for (const nn::Param* p : params)
        header["params"].push_back({{"name", p->name}, {"rows", p->value.rows}, {"cols", p->value.cols}});
}

void write_values(std::ofstream& out, const std::vector<nn::Param*>& params) {
    for (const nn::Param* p : params)
        out.write(reinterpret_cast<const char*>(p->value.v.data()),
                  static_cast<std::streamsize>(p->value.v.size() * sizeof(double)));
}

nlohmann::json read_header(std::ifstream& in, const std::string& path) {
    std::string magic, header_line;
    if (!std::getline(in, magic) || magic != kMagic)
        throw ValidationError("checkpoint " + path + ": bad or missing magic");
    if (!std::getline(in, header_line)) throw ValidationError("checkpoint " + path + ": missing header");
    try {
        return nlohmann::json::parse(header_line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("checkpoint " + path + ": " + e.what());
    }
}

void read_values(std::ifstream& in, const std::string& path, const nlohmann::json& header,
                 const std::vector<nn::Param*>& params) {
    const auto& shapes = header.at("params");
    if (shapes.size() != params.size())
        throw ValidationError("checkpoint " + path + ": parameter count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        nn::Param* p = params[i];
        const auto& s = shapes[i];
        if (s.at("name").get<std::string>() != p->name || s.at("rows").get<int>() != p->value.rows ||
            s.at("cols").get<int>() != p->value.cols)
            throw ValidationError("checkpoint " + path + ": shape manifest mismatch at '" + p->name + "'");
        in.read(reinterpret_cast<char*>(p->value.v.data()),
                static_cast<std::streamsize>(p->value.v.size() * sizeof(double)));
        if (!in) throw ValidationError("checkpoint " + path + ": truncated tensor data");
    }
}

void put_meta(nlohmann::json& header, const CheckpointMeta& meta) {
    header["format"] = 1;
    header["model_type"] = meta.model_type;
    header["epoch"] = meta.epoch;
    header["tune_ema_at_kmax"] = meta.tune_ema_at_kmax;
    header["config_hash"] = meta.config_hash;
}

CheckpointMeta get_meta(const nlohmann::json& header) {
    CheckpointMeta meta;
    meta.model_type = header.at("model_type").get<std::string>();
    meta.epoch = header.at("epoch").get<int>();
    meta.tune_ema_at_kmax = header.at("tune_ema_at_kmax").get<double>();
    meta.config_hash = header.at("config_hash").get<std::string>();
    return meta;
}

}  // namespace

nlohmann::json ranker_config_to_json(const RankerConfig& cfg) {
    return {{"d", cfg.d},
            {"level1_layers", cfg.level1_layers},
            {"level2_layers", cfg.level2_layers},
            {"heads", cfg.heads},
            {"ffn_mult", cfg.ffn_mult},
            {"head_hidden", cfg.head_hidden},
            {"max_tokens", cfg.max_tokens},
            {"max_utterances", cfg.max_utterances},
            {"dropout", cfg.dropout},
            {"pre_norm", cfg.pre_norm},
            {"m", cfg.m},
            {"vocab_min_freq", cfg.vocab_min_freq}};
}

RankerConfig ranker_config_from_json(const nlohmann::json& j) {
    RankerConfig cfg;
    cfg.d = j.value("d", cfg.d);
    cfg.level1_layers = j.value("level1_layers", cfg.level1_layers);
    cfg.level2_layers = j.value("level2_layers", cfg.level2_layers);
    cfg.heads = j.value("heads", cfg.heads);
    cfg.ffn_mult = j.value("ffn_mult", cfg.ffn_mult);
    cfg.head_hidden = j.value("head_hidden", cfg.head_hidden);
    cfg.max_tokens = j.value("max_tokens", cfg.max_tokens);
    cfg.max_utterances = j.value("max_utterances", cfg.max_utterances);
    cfg.dropout = j.value("dropout", cfg.dropout);
    cfg.pre_norm = j.value("pre_norm", cfg.pre_norm);
    cfg.m = j.value("m", cfg.m);
    cfg.vocab_min_freq = j.value("vocab_min_freq", cfg.vocab_min_freq);
    cfg.validate();
    return cfg;
}

void save_ranker_checkpoint(const std::string& path, RankerModel& model, const CheckpointMeta& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("checkpoint not writable: " + path);
    nlohmann::json header;
    put_meta(header, meta);
    header["model_type"] = "ranker";
    header["config"] = ranker_config_to_json(model.config());
    header["vocab"] = model.vocab().words();
    auto params = model.params();
    write_params(params, header);
    out << kMagic << "\n" << header.dump() << "\n";
    write_values(out, params);
}

void save_bow_checkpoint(const std::string& path, BowModel& model, const CheckpointMeta& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("checkpoint not writable: " + path);
    nlohmann::json header;
    put_meta(header, meta);
    header["model_type"] = "bow";
    header["config"] = {{"hidden1", model.config().hidden1}, {"hidden2", model.config().hidden2}, {"m", model.config().m}};
    header["vocab"] = model.bow_vocab().words();
    auto params = model.params();
    write_params(params, header);
    out << kMagic << "\n" << header.dump() << "\n";
    write_values(out, params);
}

std::string checkpoint_model_type(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("checkpoint not readable: " + path);
    return read_header(in, path).at("model_type").get<std::string>();
}

LoadedRanker load_ranker_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("checkpoint not readable: " + path);
    nlohmann::json header = read_header(in, path);
    if (header.at("model_type") != "ranker")
        throw ValidationError("checkpoint " + path + ": not a ranker checkpoint");

    RankerConfig cfg = ranker_config_from_json(header.at("config"));
    Vocab vocab = Vocab::from_words(header.at("vocab").get<std::vector<std::string>>());
    Rng init(0);
    LoadedRanker out{RankerModel(cfg, std::move(vocab), init), get_meta(header)};
    auto params = out.model.params();
    read_values(in, path, header, params);
    return out;
}

LoadedBow load_bow_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("checkpoint not readable: " + path);
    nlohmann::json header = read_header(in, path);
    if (header.at("model_type") != "bow") throw ValidationError("checkpoint " + path + ": not a bow checkpoint");

    BowConfig cfg;
    cfg.hidden1 = header.at("config").at("hidden1").get<int>();
    cfg.hidden2 = header.at("config").at("hidden2").get<int>();
    cfg.m = header.at("config").at("m").get<int>();
    BowVocab vocab = BowVocab::from_words(header.at("vocab").get<std::vector<std::string>>());
    Rng init(0);
    LoadedBow out{BowModel(cfg, std::move(vocab), init), get_meta(header)};
    auto params = out.model.params();
    read_values(in, path, header, params);
    return out;
}

}  // namespace opm
