#include "fourbar/moe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "fourbar/checkpoint.hpp"

namespace fourbar {

std::vector<TypeConfig> all_configs() {
    std::vector<TypeConfig> out;
    out.reserve(16);
    for (int t = 1; t <= 8; ++t)
        for (Inversion inv : {Inversion::plus, Inversion::minus}) out.push_back({t, inv});
    return out;
}

namespace {

std::pair<int, int> key(const TypeConfig& cfg) {
    return {cfg.type_id, cfg.inversion == Inversion::plus ? 0 : 1};
}

} // namespace

void ExpertRegistry::put(ExpertModel model) { slots_.insert_or_assign(key(model.cfg), std::move(model)); }

bool ExpertRegistry::has(const TypeConfig& cfg) const { return slots_.count(key(cfg)) > 0; }

const ExpertModel& ExpertRegistry::get(const TypeConfig& cfg) const {
    auto it = slots_.find(key(cfg));
    if (it == slots_.end()) throw MissingExpert("no expert loaded for " + config_name(cfg));
    return it->second;
}

ExpertRegistry ExpertRegistry::load(const std::string& dir) {
    std::ifstream is(dir + "/manifest.json");
    if (!is) throw MissingExpert("registry manifest not found: " + dir + "/manifest.json");
    nlohmann::json manifest;
    is >> manifest;
    ExpertRegistry reg;
    for (const auto& e : manifest.at("entries")) {
        const std::string file = e.at("file");
        TrainState st = load_checkpoint(dir + "/" + file);
        const TypeConfig cfg{e.at("type_id").get<int>(),
                             inversion_from_sign(e.at("inversion").get<int>())};
        if (!(st.model.cfg == cfg))
            throw std::runtime_error("manifest entry " + file + " disagrees with checkpoint type");
        reg.put(std::move(st.model));
    }
    return reg;
}

std::string expert_filename(const TypeConfig& cfg) {
    return "expert_t" + std::to_string(cfg.type_id) +
           (cfg.inversion == Inversion::plus ? "_plus" : "_minus") + ".ckpt";
}

void write_manifest(const std::string& dir, const std::vector<TypeConfig>& configs) {
    nlohmann::json entries = nlohmann::json::array();
    for (const TypeConfig& cfg : configs)
        entries.push_back({{"type_id", cfg.type_id},
                           {"inversion", inversion_sign(cfg.inversion)},
                           {"file", expert_filename(cfg)}});
    std::ofstream os(dir + "/manifest.json");
    if (!os) throw std::runtime_error("cannot write manifest in " + dir);
    os << nlohmann::json{{"entries", entries}}.dump(2) << '\n';
}

void ExpertRegistry::save(const std::string& dir) const {
    std::vector<TypeConfig> configs;
    for (const auto& [k, model] : slots_) {
        TrainState st;
        st.model = model;
        st.adam = AdamState::for_model(st.model);
        st.stream_rng = Rng(model.hyper.seed).state();
        save_checkpoint(dir + "/" + expert_filename(model.cfg), st);
        configs.push_back(model.cfg);
    }
    write_manifest(dir, configs);
}

bool result_order(const SynthesisResult& a, const SynthesisResult& b) {
    if (a.s_simul != b.s_simul) return a.s_simul < b.s_simul;
    if (a.cfg.type_id != b.cfg.type_id) return a.cfg.type_id < b.cfg.type_id;
    return inversion_sign(a.cfg.inversion) > inversion_sign(b.cfg.inversion); // + before -
}

SynthesisResult synthesize_single(const ExpertRegistry& reg, const TypeConfig& cfg, const PointSeq& points) {
    const ExpertModel& expert = reg.get(cfg);
    SynthesisResult res;
    res.cfg = cfg;
    res.dims = predict(expert, points);
    res.dims_valid = res.dims.is_valid();
    if (res.dims_valid) {
        res.eval = simulation_metric(res.dims, cfg, points);
        res.s_simul = res.eval.s_simul;
    } else {
        res.s_simul = std::numeric_limits<double>::infinity();
    }
    return res;
}

std::vector<SynthesisResult> synthesize_multi(const ExpertRegistry& reg, const PointSeq& points,
                                              int top_k, bool distinct_types) {
    if (!reg.complete()) throw MissingExpert("multi-type synthesis needs all 16 experts loaded");
    std::vector<SynthesisResult> results;
    results.reserve(16);
    for (const TypeConfig& cfg : all_configs()) results.push_back(synthesize_single(reg, cfg, points));
    std::sort(results.begin(), results.end(), result_order);

    if (distinct_types) {
        std::vector<SynthesisResult> filtered;
        bool seen[9] = {};
        for (auto& r : results) {
            if (seen[r.cfg.type_id]) continue;
            seen[r.cfg.type_id] = true;
            filtered.push_back(std::move(r));
        }
        results = std::move(filtered);
    }
    if (top_k > 0 && static_cast<int>(results.size()) > top_k) results.resize(static_cast<size_t>(top_k));
    return results;
}

std::vector<PointSeq> expand_relative(const PointSeq& rel_points, int variants, Rng& rng) {
    if (rel_points.size() < 2)
        throw std::invalid_argument("expand_relative: need at least the reference plus one offset");
    std::vector<PointSeq> out;
    out.reserve(static_cast<size_t>(variants));
    for (int v = 0; v < variants; ++v) {
        const double in0 = rng.uniform(-kPi, kPi);
        const double out0 = rng.uniform(-kPi, kPi);
        PointSeq abs;
        abs.reserve(rel_points.size());
        for (const auto& d : rel_points) abs.push_back({in0 + d.theta_in, out0 + d.theta_out});
        out.push_back(std::move(abs));
    }
    return out;
}

RelativeSynthesis synthesize_relative(const ExpertRegistry& reg, const PointSeq& rel_points,
                                      int variants, Rng& rng) {
    if (!reg.complete()) throw MissingExpert("relative synthesis needs all 16 experts loaded");
    RelativeSynthesis out;
    out.variants = variants;
    const auto expanded = expand_relative(rel_points, variants, rng);
    out.ranked.reserve(expanded.size() * 16);
    for (const auto& abs_points : expanded) {
        const auto initial = std::make_pair(abs_points[0].theta_in, abs_points[0].theta_out);
        for (const TypeConfig& cfg : all_configs()) {
            SynthesisResult r = synthesize_single(reg, cfg, abs_points);
            r.initial_angles = initial;
            out.ranked.push_back(std::move(r));
        }
    }
    out.candidates = static_cast<int>(out.ranked.size());
    std::stable_sort(out.ranked.begin(), out.ranked.end(), result_order);
    return out;
}

} // namespace fourbar
