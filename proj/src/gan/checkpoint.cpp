#include "flowgan/gan/checkpoint.hpp"

#include "flowgan/error.hpp"
#include "flowgan/io.hpp"

#include <set>

namespace flowgan::gan {

namespace {

void put_params(io::ArrayArchive& ar, const std::vector<Param<float>*>& params) {
    for (auto* p : params)
        if (!p->value.empty()) ar.put(p->name, std::span<const float>(p->value), p->shape);
}

void get_params(const io::ArrayArchive& ar, const std::vector<Param<float>*>& params, std::set<std::string>& used) {
    for (auto* p : params) {
        if (p->value.empty()) continue;
        if (!ar.contains(p->name)) throw FormatError("checkpoint is missing parameter " + p->name);
        if (ar.shape(p->name) != p->shape) throw FormatError("checkpoint parameter " + p->name + " has the wrong shape");
        auto v = ar.get_f32(p->name);
        p->value.assign(v.begin(), v.end());
        used.insert(p->name);
    }
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, Models<float>& models, const ArchitectureConfig& arch,
                     int epoch, const LossWeights& w) {
    io::ArrayArchive ar;
    ar.metadata = {{"format_version", kCheckpointFormat},
                   {"architecture", arch.to_json()},
                   {"seed", models.seed},
                   {"epoch", epoch},
                   {"loss_weights", {{"w_i", w.w_i}, {"w_a", w.w_a}}}};
    put_params(ar, models.generator.params());
    put_params(ar, models.discriminator.params());
    ar.save(path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    const auto ar = io::ArrayArchive::load(path);
    const auto& meta = ar.metadata;
    try {
        if (meta.at("format_version").get<int>() != kCheckpointFormat)
            throw FormatError("unsupported checkpoint format version in " + path.string());
        const auto arch = ArchitectureConfig::from_json(meta.at("architecture"));
        arch.validate();
        Checkpoint ck{arch, Models<float>{Generator<float>(arch), Discriminator<float>(arch), meta.at("seed").get<std::uint64_t>()},
                      meta.at("seed").get<std::uint64_t>(), meta.at("epoch").get<int>(),
                      LossWeights{meta.at("loss_weights").at("w_i").get<double>(),
                                  meta.at("loss_weights").at("w_a").get<double>()}};
        std::set<std::string> used;
        get_params(ar, ck.models.generator.params(), used);
        get_params(ar, ck.models.discriminator.params(), used);
        if (used.size() != ar.names().size()) throw FormatError("checkpoint has parameters the architecture lacks");
        return ck;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("malformed checkpoint metadata in " + path.string() + ": " + e.what());
    } catch (const ConfigError& e) {
        throw FormatError("checkpoint architecture is invalid: " + std::string(e.what()));
    }
}

} // namespace flowgan::gan
